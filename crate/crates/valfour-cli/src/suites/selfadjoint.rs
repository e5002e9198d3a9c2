use valfour::homforms::{HomForm, LinMap};
use valfour::valuations::{
    convolution_bottom, fourier_val, gl_action, plane_current, poincare_pair, product_top, rumin_D, GeneratingForm,
};
use valfour::Result;

use super::library::plane_density;
use super::{share, rel, Ctx, Tol};

const PAIRS: usize = 6;

pub(super) fn run(ctx: &mut Ctx) {
    let band = ctx.cfg.band_limit;
    if ctx.wants(2) {
        for i in 0..PAIRS {
            let data = plane_density(band, None, &mut ctx.rng).and_then(|gu| Ok((gu, plane_density(band, None, &mut ctx.rng)?)));
            let res = share(&data).and_then(|(gu, gt)| {
                let u = plane_current(&gu)?;
                let theta = GeneratingForm::from_plane_density(&gt)?;
                let f_theta = GeneratingForm::from_plane_density(&fourier_val(&plane_current(&gt)?)?.support_density()?)?;
                let lhs = poincare_pair(&fourier_val(&u)?, &theta)?;
                let rhs = poincare_pair(&u, &f_theta)?;
                Ok(rel(lhs, rhs, 1e-300))
            });
            ctx.record(format!("pair.{i}.self-adjoint"), "self-adjointness", Some(10), Tol::Quadrature(1e-6), res);
            let res = data.and_then(|(gu, gt)| {
                let u = plane_current(&gu)?;
                let w = plane_current(&gt)?;
                let p1 = convolution_bottom(&u, &w)?.value;
                let p2 = product_top(&gl_action(&LinMap::scalar(2, -1.0), &u)?, &w)?;
                Ok(rel(p1, p2, 1e-300))
            });
            ctx.record(format!("pair.{i}.pairing-lemma"), "pairing-lemma", Some(10), Tol::Quadrature(1e-6), res);
        }
    }
    let rumin_band = band.min(8);
    ctx.grid("rumin-band", rumin_band);
    for (n, k) in [(2usize, 1usize), (3, 1), (3, 2)] {
        if !ctx.wants(n) {
            continue;
        }
        let res = HomForm::random(n, n - 1 - k, k - 1, rumin_band, &mut ctx.rng).and_then(|xi| kernel_defect(&GeneratingForm::alpha_wedge(&xi)?));
        ctx.record(format!("rumin.n{n}.k{k}.alpha-wedge"), "rumin-kernel", Some(12), Tol::Spectral(1e-10), res);
        if n >= k + 2 {
            let res = HomForm::random(n, n - 2 - k, k, rumin_band, &mut ctx.rng).and_then(|eta| kernel_defect(&GeneratingForm::exact(&eta)?));
            ctx.record(format!("rumin.n{n}.k{k}.exact"), "rumin-kernel", Some(12), Tol::Spectral(1e-10), res);
        }
    }
}

fn kernel_defect(w: &GeneratingForm) -> Result<f64> {
    let d = rumin_D(w)?;
    Ok(d.form.norm() / w.norm().max(1e-300))
}
