use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use valfour::exterior::MultiIndex;
use valfour::fourier::fourier_form;
use valfour::homforms::{pair_with_test, pullback_mono_delta, HomForm, LinMap, TestForm};
use valfour::signs;
use valfour::sphere::{Mode, SpectralField};
use valfour::valuations::{
    crofton_current, euler_current, fourier_val, intrinsic_current, plane_current, pullback_val, pushforward_val,
    support_density_current, CroftonData, ValCurrent,
};
use valfour::{Result, C64};

use super::library::{even_density, plane_density, random_mono, sphere_density};
use super::{share, Ctx, Tol};

const DELTA_TOL: f64 = 1e-10;

fn test_valuations(m: usize, band: usize, rng: &mut impl Rng) -> Result<Vec<(String, ValCurrent)>> {
    Ok(match m {
        2 => vec![
            ("V1(2)".into(), intrinsic_current(2, 1)?),
            ("plane-mixed".into(), plane_current(&plane_density(band, None, rng)?)?),
            ("euler(2)".into(), euler_current(2)?),
        ],
        _ => vec![
            ("V1(3)".into(), intrinsic_current(3, 1)?),
            ("V2(3)".into(), intrinsic_current(3, 2)?),
            ("support-density(3)".into(), support_density_current(&sphere_density(band.min(8), rng)?)?),
            ("crofton-lines(3)".into(), crofton_current(&CroftonData::density(3, 1, even_density(3, band.min(8), rng)?)?)?),
            ("euler(3)".into(), euler_current(3)?),
        ],
    })
}

fn value_gap(a: &BTreeMap<MultiIndex, C64>, b: &BTreeMap<MultiIndex, C64>) -> f64 {
    let scale = a.values().chain(b.values()).map(|z| z.norm()).fold(0.0, f64::max);
    if scale < 1e-13 {
        return 0.0;
    }
    let keys: std::collections::BTreeSet<_> = a.keys().chain(b.keys()).collect();
    keys.into_iter()
        .map(|k| (a.get(k).copied().unwrap_or_default() - b.get(k).copied().unwrap_or_default()).norm())
        .fold(0.0, f64::max)
        / scale
}

/// `F_W i_* ω = s (i^∨)^* F_V ω` paired with a Gaussian test form on `W* = R^m`,
/// for the coordinate inclusion `R^n → R^m`.
pub(super) fn dual_gap(w: &HomForm, m: usize, rng: &mut impl Rng) -> Result<f64> {
    let n = w.dim();
    let q = w.form_degree();
    let d = q + m - n;
    let psi = TestForm::random_gaussian(m, d, rng);
    let restricted = psi.fourier()?.restrict(n);
    let fibered = psi.fiber_integral(n);
    let ls = signs::inclusion_pairing(n, m, q) * signs::pairing_symmetry(m, d) * signs::pairing_symmetry(n, q);
    let rs = signs::pairing_symmetry(n, q) * signs::functoriality(n, m, q);
    let lhs: BTreeMap<_, _> = pair_with_test(w, &restricted)?.into_iter().map(|(j, z)| (j, z * ls)).collect();
    let rhs: BTreeMap<_, _> = pair_with_test(&fourier_form(w)?, &fibered)?.into_iter().map(|(j, z)| (j, z * rs)).collect();
    Ok(value_gap(&lhs, &rhs))
}

/// `sqrt(det(iᵀi))`, the factor picked up by the identity in Euclidean trivializations.
fn jacobian(i: &LinMap) -> Result<f64> {
    Ok(i.transpose().compose(i)?.det().sqrt())
}

/// `dθ = (y_1 dy_2 - y_2 dy_1)/|y|^2` on `R^2`.
fn angle_form() -> Result<HomForm> {
    let mut w = HomForm::new(2, "V*", 1, 0, 0, 1)?;
    w.insert((MultiIndex::new(2, &[1])?, MultiIndex::empty(2)), SpectralField::coordinate(2, 1)?.scale(C64::new(-1.0, 0.0)))?;
    w.insert((MultiIndex::new(2, &[2])?, MultiIndex::empty(2)), SpectralField::coordinate(2, 0)?)?;
    Ok(w)
}

pub(super) fn run(ctx: &mut Ctx) {
    let band = ctx.cfg.band_limit;
    for (n, m) in [(1usize, 2usize), (2, 3)] {
        if !ctx.wants(m) {
            continue;
        }
        let vals = match test_valuations(m, band, &mut ctx.rng) {
            Ok(v) => v,
            Err(e) => {
                ctx.record(format!("valuations.{n}-{m}"), "functoriality", Some(8), Tol::Quadrature(1e-4), Err(e));
                continue;
            }
        };
        let maps = [("coord", Ok(LinMap::coordinate_inclusion(n, m))), ("generic", random_mono(n, m, &mut ctx.rng))];
        for (name, phi) in &vals {
            for (label, map) in &maps {
                let res = share(map).and_then(|i| {
                    let lhs = fourier_val(&pullback_val(&i, phi)?)?;
                    let rhs = pushforward_val(&i.transpose(), &fourier_val(phi)?)?;
                    Ok(lhs.rel_distance(&rhs.scale(C64::new(jacobian(&i)?, 0.0))))
                });
                ctx.record(format!("val.{n}-{m}.{label}.{name}"), "functoriality", Some(8), Tol::Quadrature(1e-4), res);
            }
            let inc = LinMap::coordinate_inclusion(n, m);
            let res = pullback_val(&inc, phi).and_then(|r| {
                let mut w = r.current().clone();
                if w.form_degree() == n {
                    w = w.map_fields(|_, g| {
                        let mut h = g.clone();
                        h.set(Mode { l: 0, m: 0 }, C64::default());
                        h
                    });
                }
                let mut worst = 0.0f64;
                for _ in 0..3 {
                    worst = worst.max(dual_gap(&w, m, &mut ctx.rng)?);
                }
                Ok(worst)
            });
            ctx.record(format!("dual.{n}-{m}.{name}"), "functoriality-dual", Some(8), Tol::Quadrature(1e-4), res);
        }
        for (name, phi) in &vals {
            let w = phi.current();
            let k = w.form_degree();
            if k == 0 || k >= m {
                continue;
            }
            let e = random_mono(k, m, &mut ctx.rng);
            let res = e.and_then(|e| {
                let d = pullback_mono_delta(&e, w, DELTA_TOL)?;
                let cmax = d.values.values().map(|z| z.norm()).fold(0.0, f64::max);
                Ok(d.spread / cmax.max(w.norm()))
            });
            ctx.record(format!("delta.{m}.{name}"), "delta-pullback", Some(12), Tol::Spectral(1e-8), res);
        }
    }
    if ctx.wants(2) {
        let res = angle_form().and_then(|w| {
            let d = pullback_mono_delta(&LinMap::coordinate_inclusion(1, 2), &w, DELTA_TOL)?;
            Ok((d.c() - C64::new(PI, 0.0)).norm().max(d.spread) / PI)
        });
        ctx.record("delta.2.angle-form".into(), "delta-pullback", Some(12), Tol::Spectral(1e-8), res);
    }
}
