use std::f64::consts::PI;

use rand::Rng;
use valfour::exterior::{hodge_star, MultiIndex};
use valfour::fourier::{fourier0, fourier_form};
use valfour::homforms::{
    ext_derivative, ext_derivative_distributional, interior_euler, pair_with_test, HomForm, TestForm,
};
use valfour::signs;
use valfour::sphere::{multiply, Mode};
use valfour::valuations::{
    exterior_product_val, fourier0_tensor, intrinsic_current, plane_current, poincare_pair, product_top, tensor_forms,
    GeneratingForm, ValCurrent,
};
use valfour::{Covector, Result, C64};

use super::functoriality::dual_gap;
use super::library::{plane_density, sphere_density};
use super::{rel, Ctx, Tol};

const EXACT: Tol = Tol::Spectral(1e-10);

fn sum(m: std::collections::BTreeMap<MultiIndex, C64>) -> C64 {
    m.values().sum()
}

fn zero_mean_if_top(w: HomForm) -> HomForm {
    if w.form_degree() < w.dim() {
        return w;
    }
    w.map_fields(|_, g| {
        let mut h = g.clone();
        h.set(Mode { l: 0, m: 0 }, C64::default());
        h
    })
}

pub(super) fn run(ctx: &mut Ctx) {
    let band = ctx.cfg.band_limit.min(8);
    ctx.grid("sign-band", band);

    for n in 1..=4usize {
        for k in 0..=n {
            let mut a = Covector::zero(n);
            for idx in MultiIndex::all_of_size(n, k) {
                a.add_term(idx, C64::new(ctx.rng.random_range(-1.0..1.0), ctx.rng.random_range(-1.0..1.0)));
            }
            let ss = hodge_star(&hodge_star(&a, "V"), "V");
            let want = a.scale(C64::new(signs::double_star(n, k), 0.0));
            let err = ss.add(&want.scale(C64::new(-1.0, 0.0))).map(|d| d.max_abs() / a.max_abs().max(1e-300));
            ctx.record(format!("double-star.n{n}.k{k}"), "double-star", Some(11), EXACT, err);
        }
    }

    for n in ctx.dims(&[2, 3]) {
        for q in 1..n {
            let res = HomForm::random(n, q, 0, band, &mut ctx.rng).and_then(|w| {
                let psi = TestForm::random_gaussian(n, q, &mut ctx.rng);
                let a = sum(pair_with_test(&fourier_form(&w)?, &psi)?);
                let b = sum(pair_with_test(&w, &psi.fourier()?)?);
                Ok(rel(a, b * signs::pairing_symmetry(n, q), 1e-300))
            });
            ctx.record(format!("pairing-symmetry.n{n}.q{q}"), "pairing-symmetry", Some(11), EXACT, res);
        }
        for q in 0..=n {
            let res = HomForm::random(n, q, 0, band, &mut ctx.rng).map(zero_mean_if_top).and_then(|w| {
                let ff = fourier_form(&fourier_form(&w)?)?;
                Ok(ff.rel_distance(&w.antipodal_form().scale(C64::new(signs::form_inversion(n, q), 0.0))))
            });
            ctx.record(format!("form-inversion.n{n}.q{q}"), "form-inversion", Some(11), EXACT, res);
        }
        for q in 0..n - 1 {
            let factor = signs::d_interior_euler(q);
            let res = HomForm::random(n, q, 0, band, &mut ctx.rng).and_then(|w| {
                let lhs = fourier_form(&ext_derivative(&w)?)?;
                let rhs = interior_euler(&fourier_form(&w)?)?.scale(factor);
                Ok(lhs.rel_distance(&rhs))
            });
            ctx.record(format!("d-interior-euler.n{n}.q{q}.F-of-d"), "d-interior-euler", Some(11), EXACT, res);
        }
        for q in 1..n {
            let factor = signs::d_interior_euler(q);
            let res = HomForm::random(n, q, 0, band, &mut ctx.rng).and_then(|w| {
                let lhs = ext_derivative_distributional(&fourier_form(&w)?)?;
                let rhs = fourier_form(&interior_euler(&w)?)?.scale(factor);
                Ok(lhs.rel_distance(&rhs))
            });
            ctx.record(format!("d-interior-euler.n{n}.q{q}.d-of-F"), "d-interior-euler", Some(11), EXACT, res);
        }
    }

    for (n, m) in [(1usize, 2usize), (2, 3), (1, 3)] {
        if !ctx.wants(m) {
            continue;
        }
        for k in 0..=n {
            if (n, m, k) == (1, 3, 1) {
                continue;
            }
            let res = HomForm::random(n, k, 0, band, &mut ctx.rng)
                .map(zero_mean_if_top)
                .and_then(|w| dual_gap(&w, m, &mut ctx.rng));
            ctx.record(format!("functoriality.{n}-{m}.k{k}"), "functoriality", Some(11), EXACT, res);
        }
    }

    if ctx.wants(2) {
        let res = intrinsic_current(2, 1).and_then(|v| product_top(&v, &v)).map(|p| rel(p, C64::new(PI / 2.0, 0.0), 1e-300));
        ctx.record("exterior-product.V1.V1".into(), "exterior-product", Some(11), EXACT, res);
        let res = plane_density(band, None, &mut ctx.rng).and_then(|g| {
            let a = plane_current(&g)?;
            let b = intrinsic_current(2, 1)?;
            let direct = tensor_forms(a.current(), b.current())?.scale(C64::new(signs::exterior_product(2, 1, 1), 0.0));
            Ok(exterior_product_val(&a, &b)?.sample_distance(&direct))
        });
        ctx.record("exterior-product.tensor".into(), "exterior-product", Some(11), EXACT, res);
    }

    let mut cases: Vec<(usize, usize, usize, usize)> = vec![(2, 1, 2, 1), (2, 1, 3, 1), (2, 1, 3, 2), (3, 2, 2, 1)];
    cases.retain(|c| ctx.cfg.n.is_none_or(|n| n == c.0 || n == c.2));
    for (n, k, m, l) in cases {
        let res = fourier0_case(n, k, m, l, band, &mut ctx.rng);
        ctx.record(format!("fourier0-product.{n}{k}.{m}{l}"), "fourier0-product", Some(11), EXACT, res);
    }

    if ctx.wants(2) {
        for i in 0..3 {
            let res = plane_density(band, None, &mut ctx.rng).and_then(|g| {
                let h = plane_density(band, None, &mut ctx.rng)?;
                let paired = poincare_pair(&plane_current(&g)?, &GeneratingForm::from_plane_h(&h)?)?;
                let oracle = multiply(&h, &g.antipodal())?.integral();
                Ok(rel(paired, oracle, 1e-300))
            });
            ctx.record(format!("generating-current.{i}"), "generating-current", Some(11), EXACT, res);
        }
    }
}

fn val_of_degree(n: usize, k: usize, band: usize, rng: &mut impl Rng) -> Result<ValCurrent> {
    match (n, k) {
        (2, 1) => plane_current(&plane_density(band, None, rng)?),
        (3, 1) => valfour::valuations::support_density_current(&sphere_density(band, rng)?),
        _ => intrinsic_current(n, k),
    }
}

/// `F⁰(ω ⊠ ζ) = s F⁰ω ⊠ F⁰ζ` on raw tensor products.
fn fourier0_case(n: usize, k: usize, m: usize, l: usize, band: usize, rng: &mut impl Rng) -> Result<f64> {
    let a = val_of_degree(n, k, band, rng)?;
    let b = val_of_degree(m, l, band, rng)?;
    let lhs = fourier0_tensor(&tensor_forms(a.current(), b.current())?)?;
    let rhs = tensor_forms(&fourier0(a.current())?, &fourier0(b.current())?)?
        .scale(C64::new(signs::fourier0_product(n, k, m, l), 0.0));
    Ok(lhs.sample_distance(&rhs))
}
