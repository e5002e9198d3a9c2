use valfour::fourier::{bochner_multiplier, oracle, MultiplierTable};
use valfour::sphere::sphere_area;
use valfour::C64;

use super::{rel, Ctx, Tol};

const ORACLE_BAND: usize = 16;

pub(super) fn run(ctx: &mut Ctx) {
    for (n, k) in [(2usize, 1usize), (3, 1), (3, 2)] {
        if !ctx.wants(n) {
            continue;
        }
        let want = C64::new(sphere_area(n - k) / sphere_area(k), 0.0);
        let got = bochner_multiplier(n, (n - k) as f64, 0);
        ctx.record(format!("anchor.n{n}.k{k}"), "multiplier-anchor", Some(1), Tol::Spectral(1e-10), got.map(|b| rel(b, want, 1e-300)));
    }
    ctx.grid("oracle-band", ORACLE_BAND);
    for n in ctx.dims(&[2, 3]) {
        let table = match MultiplierTable::new(n, ORACLE_BAND) {
            Ok(t) => t,
            Err(e) => {
                ctx.record(format!("table.n{n}"), "multiplier-oracle", Some(1), Tol::Spectral(1e-8), Err(e));
                continue;
            }
        };
        for row in table.rows() {
            let b = C64::new(row.re, row.im);
            let (lambda, m) = (row.lambda, row.m);
            let q = oracle::multiplier_by_quadrature(n, lambda, m).map(|q| rel(q, b, 1e-300));
            ctx.record(format!("oracle.n{n}.l{lambda}.m{m:02}"), "multiplier-oracle", Some(1), Tol::Spectral(1e-8), q);
            let dual = table.get(n - lambda as usize, m).map(|d| {
                let want = C64::new(if m % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
                rel(b * d, want, 1e-300)
            });
            ctx.record(format!("inversion.n{n}.l{lambda}.m{m:02}"), "multiplier-inversion", None, Tol::Spectral(1e-12), dual);
        }
    }
}
