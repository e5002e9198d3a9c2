use std::f64::consts::PI;

use valfour::sphere::{Mode, SpectralField};
use valfour::valuations::{fourier_val, plane_current, point_mass_field};
use valfour::C64;

use super::library::plane_density;
use super::{share, Ctx, Tol};

const EPS: f64 = 1e-3;
const BAND: usize = 63;

fn i_pow(m: u64) -> C64 {
    [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)][(m % 4) as usize]
}

/// `f̂_ψ(m)` of `ψ = φ - (-id)^*φ` with `φ = h(1) + h(e^{2πi/3}) + h(e^{4πi/3})`.
fn three_delta_coeff(m: i64) -> f64 {
    if m % 3 == 0 && (m / 3) % 2 != 0 {
        3.0 / PI
    } else {
        0.0
    }
}

pub(super) fn run(ctx: &mut Ctx) {
    if !ctx.wants(2) {
        return;
    }
    ctx.grid("plane-example-band", BAND);
    let mut analytic = SpectralField::zeros(2, BAND).expect("band fits");
    for m in -(BAND as i64)..=BAND as i64 {
        analytic.set(Mode { l: m.unsigned_abs() as usize, m }, C64::new(three_delta_coeff(m) * (-EPS * (m * m) as f64).exp(), 0.0));
    }
    let built = (0..6).try_fold(SpectralField::zeros(2, BAND).expect("band fits"), |acc, j| {
        let th = j as f64 * PI / 3.0;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc.axpy(C64::new(sign, 0.0), &point_mass_field(2, &[th.cos(), th.sin()], EPS, BAND)?)
    });
    ctx.record(
        "density.construction".into(),
        "plane-example",
        Some(6),
        Tol::Spectral(1e-12),
        share(&built).and_then(|b| {
            Ok(b.sub(&analytic)?.max_abs_coeff() / analytic.max_abs_coeff())
        }),
    );
    let transformed = built.and_then(|g| fourier_val(&plane_current(&g)?)?.support_density());
    match transformed {
        Ok(h) => {
            let scale = analytic.max_abs_coeff();
            let mut worst_mode = 0.0f64;
            let mut worst_pattern = 0.0f64;
            let mut worst_unmollified = 0.0f64;
            for m in -(BAND as i64)..=BAND as i64 {
                let want = i_pow(m.unsigned_abs()) * analytic.circle(m);
                let got = h.circle(m);
                worst_mode = worst_mode.max((got - want).norm() / scale);
                let damp = (-EPS * (m * m) as f64).exp();
                if three_delta_coeff(m) == 0.0 {
                    worst_pattern = worst_pattern.max(got.norm() / scale);
                } else {
                    let unmollified = got / damp;
                    let want = i_pow(3 * (m / 3).unsigned_abs()) * (3.0 / PI);
                    worst_unmollified = worst_unmollified.max((unmollified - want).norm() / (3.0 / PI));
                }
            }
            ctx.record("density.modes".into(), "plane-example", Some(6), Tol::Spectral(1e-8), Ok(worst_mode));
            ctx.record("density.zero-pattern".into(), "plane-example", Some(6), Tol::Spectral(1e-8), Ok(worst_pattern));
            ctx.record("density.unmollified".into(), "plane-example", Some(6), Tol::Spectral(1e-8), Ok(worst_unmollified));
        }
        Err(e) => ctx.record("density.modes".into(), "plane-example", Some(6), Tol::Spectral(1e-8), Err(e)),
    }
    let band = ctx.cfg.band_limit;
    for i in 0..4 {
        let res = plane_density(band, None, &mut ctx.rng).and_then(|g| {
            let h = fourier_val(&plane_current(&g)?)?.support_density()?;
            let mut worst = 0.0f64;
            for m in -(band as i64)..=band as i64 {
                worst = worst.max((h.circle(m) - i_pow(m.unsigned_abs()) * g.circle(m)).norm());
            }
            Ok(worst / g.max_abs_coeff())
        });
        ctx.record(format!("multiplier.{i}"), "plane-multiplier", None, Tol::Spectral(1e-10), res);
    }
}
