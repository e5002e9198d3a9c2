use valfour::fourier::fourier0;
use valfour::valuations::{
    current_from_generating, eval_on_body_with, fourier_val, intrinsic_current, lambda_form, EvalOptions,
    GeneratingForm, Representation,
};
use valfour::C64;

use super::library::random_boxes;
use super::{share, Ctx, Tol};

const MC_SAMPLES: usize = 100_000;
const BOXES: usize = 10;

pub(super) fn run(ctx: &mut Ctx) {
    for n in ctx.dims(&[2, 3]) {
        for k in 1..n {
            let res = lambda_form(n, k).and_then(|l| {
                let f = fourier0(&l)?;
                Ok(f.rel_distance(&lambda_form(n, n - k)?))
            });
            ctx.record(format!("lambda.n{n}.k{k}"), "lambda-duality", Some(5), Tol::Spectral(1e-8), res);
            let res = intrinsic_current(n, k).and_then(|v| {
                let f = fourier_val(&v)?;
                Ok(f.rel_distance(&intrinsic_current(n, n - k)?))
            });
            ctx.record(format!("intrinsic.n{n}.k{k}"), "intrinsic-duality", Some(5), Tol::Spectral(1e-8), res);
            let res = GeneratingForm::kappa(n, k).and_then(|kap| {
                let g = current_from_generating(&kap, C64::default(), C64::default())?;
                let part = g.part(k).ok_or_else(|| valfour::Error::Precondition("no degree-k part".into()))?;
                Ok(part.rel_distance(&intrinsic_current(n, k)?))
            });
            ctx.record(format!("rumin.n{n}.k{k}"), "rumin-intrinsic", None, Tol::Spectral(1e-8), res);
        }
    }
    if !ctx.wants(3) {
        return;
    }
    ctx.grid("monte-carlo-samples", MC_SAMPLES);
    let data = intrinsic_current(3, 1).and_then(|v| fourier_val(&v)).and_then(|f| f.crofton_data());
    let boxes = random_boxes(3, BOXES, &mut ctx.rng);
    for (i, body) in boxes.iter().enumerate() {
        let seed = ctx.cfg.seed.wrapping_add(i as u64);
        let res = share(&data).and_then(|d| {
            let rep = Representation::Crofton { data: d.clone() };
            let mc = eval_on_body_with(&rep, body, &EvalOptions::monte_carlo(MC_SAMPLES, seed))?;
            let exact = body.intrinsic_volume(2)?;
            Ok((mc.re - exact).abs().max(mc.im.abs()) / exact)
        });
        ctx.record(format!("box.{i:02}"), "intrinsic-duality", Some(5), Tol::Quadrature(1e-2), res);
    }
}
