use std::f64::consts::PI;

use valfour::valuations::{
    convolution_bottom, crofton_current, fourier_val, intrinsic_current, plane_current, product_top, CroftonAtom,
    CroftonData, ValCurrent,
};
use valfour::{Result, C64};

use super::library::plane_density;
use super::{share, rel, Ctx, Tol};

const ATOM_EPS: f64 = 2e-4;
const ATOM_BAND: usize = 400;

/// Smoothed `φ_E` for the line at angle `t`.
fn projection_valuation(t: f64) -> Result<ValCurrent> {
    let data = CroftonData::atoms(2, 1, vec![CroftonAtom::line(&[t.cos(), t.sin()], 1.0)?])?;
    crofton_current(&data.mollified(ATOM_EPS, ATOM_BAND)?)
}

pub(super) fn run(ctx: &mut Ctx) {
    if !ctx.wants(2) {
        return;
    }
    ctx.grid("projection-band", ATOM_BAND);
    let band = ctx.cfg.band_limit;
    let mut pairs: Vec<(String, Result<(ValCurrent, ValCurrent)>, Option<f64>)> = Vec::new();
    pairs.push(("V1.V1".into(), intrinsic_current(2, 1).map(|v| (v.clone(), v)), Some(PI / 2.0)));
    for (s, t) in [(0.2f64, 1.1f64), (0.4, 2.9), (1.3, 1.9)] {
        let p = projection_valuation(s).and_then(|a| Ok((a, projection_valuation(t)?)));
        pairs.push((format!("proj.{s:.1}.{t:.1}"), p, Some((s - t).sin().abs())));
    }
    for i in 0..2 {
        let p = plane_density(band, None, &mut ctx.rng)
            .and_then(|g| plane_current(&g))
            .and_then(|a| Ok((a, plane_current(&plane_density(band, None, &mut ctx.rng)?)?)));
        pairs.push((format!("plane.{i}"), p, None));
    }
    for (name, pair, oracle) in pairs {
        let (a, b) = match pair {
            Ok(p) => p,
            Err(e) => {
                ctx.record(format!("{name}.intertwining"), "product-convolution", Some(9), Tol::Quadrature(1e-3), Err(e));
                continue;
            }
        };
        let prod = product_top(&a, &b);
        let res = share(&prod).and_then(|p| {
            let c = convolution_bottom(&fourier_val(&a)?, &fourier_val(&b)?)?;
            Ok(rel(p, c.value, 1e-300))
        });
        ctx.record(format!("{name}.intertwining"), "product-convolution", Some(9), Tol::Quadrature(1e-3), res);
        if let Some(o) = oracle {
            let res = prod.map(|p| rel(p, C64::new(o, 0.0), 1e-300));
            ctx.record(format!("{name}.oracle"), "product-oracle", Some(9), Tol::Quadrature(1e-3), res);
        }
    }
}
