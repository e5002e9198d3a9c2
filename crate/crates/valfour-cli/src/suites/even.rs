use valfour::valuations::{
    crofton_current, eval_on_body, fourier_val, klain_fourier_atoms, CroftonAtom, CroftonData, Representation,
};
use valfour::Result;

use super::library::{random_boxes, random_unit};
use super::{share, Ctx, Tol};

const FAMILY: usize = 5;
const FAMILY_EPS: f64 = 0.05;
const FAMILY_BAND: usize = 40;
const EVAL_EPS: f64 = 1e-3;
const EVAL_BAND: usize = 150;
const BOXES: usize = 20;

/// Direction `t ↦ E(t)` of a one-parameter family.
fn family_dir(n: usize, t: f64) -> Vec<f64> {
    match n {
        2 => vec![t.cos(), t.sin()],
        _ => vec![t.cos(), t.sin() * 0.3f64.cos(), t.sin() * 0.3f64.sin()],
    }
}

/// Line through `v` for `k = 1`, hyperplane `v^⊥` otherwise.
fn atom(k: usize, v: &[f64], w: f64) -> Result<CroftonAtom> {
    if k == 1 {
        CroftonAtom::line(v, w)
    } else {
        CroftonAtom::hyperplane(v, w)
    }
}

pub(super) fn run(ctx: &mut Ctx) {
    ctx.grid("family-band", FAMILY_BAND);
    ctx.grid("evaluation-band", EVAL_BAND);
    let cases: Vec<(usize, usize)> = [(2, 1), (3, 1), (3, 2)].into_iter().filter(|(n, _)| ctx.wants(*n)).collect();
    for &(n, k) in &cases {
        for j in 0..FAMILY {
            let t = 0.3 + 0.55 * j as f64;
            let res = atom(k, &family_dir(n, t), 1.0).and_then(|a| {
                let data = CroftonData::atoms(n, k, vec![a])?.mollified(FAMILY_EPS, FAMILY_BAND)?;
                let lhs = fourier_val(&crofton_current(&data)?)?;
                let rhs = crofton_current(&data.perp()?)?;
                Ok(lhs.rel_distance(&rhs))
            });
            ctx.record(format!("family.n{n}.k{k}.t{j}"), "even-perp", Some(7), Tol::Spectral(1e-6), res);
        }
    }
    for &(n, k) in &cases {
        let atoms: Result<Vec<CroftonAtom>> =
            (0..3).map(|i| atom(k, &random_unit(n, &mut ctx.rng), 1.0 + 0.5 * i as f64)).collect();
        let routes = atoms.and_then(|atoms| {
            let data = CroftonData::atoms(n, k, atoms)?;
            let exact = klain_fourier_atoms(&data)?;
            let smooth = fourier_val(&crofton_current(&data.mollified(EVAL_EPS, EVAL_BAND)?)?)?;
            Ok((Representation::Crofton { data: exact }, smooth.representation()?))
        });
        let boxes = random_boxes(n, BOXES, &mut ctx.rng);
        for (i, body) in boxes.iter().enumerate() {
            let res = share(&routes).and_then(|(exact, smooth)| {
                let a = eval_on_body(&exact, body)?;
                let b = eval_on_body(&smooth, body)?;
                Ok((a - b).norm() / a.norm().max(1e-300))
            });
            ctx.record(format!("boxes.n{n}.k{k}.{i:02}"), "even-perp", Some(7), Tol::Quadrature(1e-2), res);
        }
    }
}
