use rand::Rng;
use valfour::fourier::{fourier0, fourier_form};
use valfour::homforms::{gl_pullback, HomForm, LinMap};
use valfour::signs;
use valfour::sphere::{Mode, Parity};
use valfour::valuations::{fourier_val, gl_action, ValCurrent};
use valfour::C64;

use super::library::{plane_density, random_gl, valuation_library};
use super::{share, Ctx, Tol};

const RANDOM_FORMS: usize = 20;

pub(super) fn run(ctx: &mut Ctx) {
    let band = ctx.cfg.band_limit;
    let dims = ctx.dims(&[2, 3]);
    ctx.grid("form-band", band);
    if !dims.is_empty() {
        for i in 0..RANDOM_FORMS {
            let n = dims[i % dims.len()];
            let q = ctx.rng.random_range(0..=n);
            let p = ctx.rng.random_range(0..=n);
            let res = random_form(n, q, p, band, &mut ctx.rng).and_then(|w| {
                let ff = fourier_form(&fourier_form(&w)?)?;
                let want = w.antipodal_form().scale(C64::new(signs::form_inversion(n, q), 0.0));
                Ok(ff.rel_distance(&want))
            });
            ctx.record(format!("forms.{i:02}.n{n}.q{q}.p{p}"), "form-inversion", Some(2), Tol::Spectral(1e-8), res);
        }
    }

    let library = match valuation_library(band, &mut ctx.rng) {
        Ok(l) => l,
        Err(e) => {
            ctx.record("library".into(), "valuation-type", Some(3), Tol::Spectral(1e-8), Err(e));
            return;
        }
    };
    for (name, phi) in &library {
        let n = phi.dim();
        if !ctx.wants(n) {
            continue;
        }
        let f0 = fourier0(phi.current());
        ctx.record(
            format!("library.{name}.valuation-type"),
            "valuation-type",
            Some(3),
            Tol::Spectral(1e-8),
            f0.and_then(|t| {
                let r = valfour::homforms::is_valuation_type(&t, 1e-8)?;
                Ok(if r.pass { r.ie_norm.max(r.vertical_norm).max(r.closed_norm) / r.scale.max(1e-300) } else { f64::INFINITY })
            }),
        );
        let fphi = fourier_val(phi);
        ctx.record(
            format!("library.{name}.inversion"),
            "valuation-inversion",
            Some(4),
            Tol::Spectral(1e-8),
            share(&fphi).and_then(|f| {
                let ff = fourier_val(&f)?;
                let want = gl_pullback(&LinMap::scalar(n, -1.0), phi.current())?;
                Ok(ff.current().rel_distance(&want))
            }),
        );
        ctx.record(format!("library.{name}.sym2"), "sym2", Some(12), Tol::Spectral(1e-10), Ok(phi.sym2_defect()));
        ctx.record(
            format!("library.{name}.sym2-transform"),
            "sym2",
            Some(12),
            Tol::Spectral(1e-10),
            share(&fphi).map(|f| f.sym2_defect()),
        );
        ctx.record(
            format!("library.{name}.parity"),
            "parity",
            None,
            Tol::Spectral(1e-10),
            parity_defect(phi),
        );
    }

    if ctx.wants(2) {
        let g = plane_density(8.min(band), None, &mut ctx.rng);
        for i in 0..10 {
            let res = share(&g).and_then(|g| {
                let phi = valfour::valuations::plane_current(&g)?;
                let a = random_gl(2, &mut ctx.rng)?;
                let lhs = fourier_val(&gl_action(&a, &phi)?)?;
                let rhs = gl_action(&a.transpose().inverse()?, &fourier_val(&phi)?)?.scale(C64::new(a.det().abs(), 0.0));
                Ok(lhs.rel_distance(&rhs))
            });
            ctx.record(format!("gl.n2.{i:02}"), "gl-equivariance", None, Tol::Quadrature(1e-6), res);
        }
    }
}

/// Random 0-homogeneous form; top-degree coefficients get zero mean.
fn random_form<R: Rng + ?Sized>(n: usize, q: usize, p: usize, band: usize, rng: &mut R) -> valfour::Result<HomForm> {
    let w = HomForm::random(n, q, p, band, rng)?;
    if q < n {
        return Ok(w);
    }
    Ok(w.map_fields(|_, g| {
        let mut h = g.clone();
        h.set(Mode { l: 0, m: 0 }, C64::default());
        h
    }))
}

/// Odd part of the transform of the even part, and the reverse.
fn parity_defect(phi: &ValCurrent) -> valfour::Result<f64> {
    let mut worst = 0.0f64;
    for (p, other) in [(Parity::Even, Parity::Odd), (Parity::Odd, Parity::Even)] {
        let part = phi.parity_part(p)?;
        if part.current().norm() == 0.0 {
            continue;
        }
        let f = fourier_val(&part)?;
        let leak = f.parity_part(other)?.current().norm() / f.current().norm().max(1e-300);
        worst = worst.max(leak);
    }
    Ok(worst)
}
