use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use valfour::sphere::{
    ambient_partial, analyze, grid_for, multiply, random_field, sphere_area, synthesize, Mode, Parity, SpectralField,
};
use valfour::C64;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn grids_have_unit_nodes_and_full_area() {
    for (n, lq) in [(2, 5), (2, 40), (3, 4), (3, 20)] {
        let g = grid_for(n, lq).unwrap();
        assert!((g.area() - sphere_area(n)).abs() < 1e-12 * sphere_area(n));
        for u in &g.nodes {
            let r = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
            assert!((r - 1.0).abs() < 1e-14);
        }
        assert!(g.weights.iter().all(|w| *w > 0.0));
    }
}

#[test]
fn quadrature_kills_nonconstant_harmonics() {
    for (n, l) in [(2usize, 10usize), (3, 8)] {
        let g = grid_for(n, l).unwrap();
        let mut f = SpectralField::zeros(n, l).unwrap();
        for k in 1..f.coeffs().len() {
            let mode = f.mode_of(k);
            if (n == 2 && mode.m != 0) || (n == 3 && mode.l != 0) {
                f.coeffs_mut()[k] = re(1.0);
            }
        }
        let s = g.integrate(&synthesize(&f, &g).unwrap());
        assert!(s.norm() < 1e-12 * g.area(), "n={n}: {s}");
    }
}

#[test]
fn analysis_examples() {
    let g2 = grid_for(2, 8).unwrap();
    let ones = vec![re(1.0); g2.len()];
    let f = analyze(&ones, &g2, 8).unwrap();
    assert!((f.circle(0) - re(1.0)).norm() < 1e-14);
    assert!(f.modes().filter(|(m, _)| m.m != 0).all(|(_, z)| z.norm() < 1e-14));
    let cos3: Vec<C64> = g2.nodes.iter().map(|u| re((3.0 * u[1].atan2(u[0])).cos())).collect();
    let f = analyze(&cos3, &g2, 8).unwrap();
    assert!((f.circle(3) - re(0.5)).norm() < 1e-14 && (f.circle(-3) - re(0.5)).norm() < 1e-14);

    let g3 = grid_for(3, 6).unwrap();
    let y3: Vec<C64> = g3.nodes.iter().map(|u| re(u[2])).collect();
    let f = analyze(&y3, &g3, 6).unwrap();
    assert!(f.modes().filter(|(m, _)| m.l != 1).all(|(_, z)| z.norm() < 1e-13));
    assert!(analyze(&y3, &g3, 7).is_err());
}

#[test]
fn synthesis_examples() {
    let g2 = grid_for(2, 4).unwrap();
    let mut f = SpectralField::zeros(2, 4).unwrap();
    f.set(Mode { l: 0, m: 1 }, re(0.5));
    f.set(Mode { l: 0, m: -1 }, re(0.5));
    for (u, z) in g2.nodes.iter().zip(synthesize(&f, &g2).unwrap()) {
        assert!((z - re(u[0])).norm() < 1e-14);
    }
    let one = SpectralField::constant(3, re(1.0)).unwrap();
    let g3 = grid_for(3, 3).unwrap();
    assert!(synthesize(&one, &g3).unwrap().iter().all(|z| (z - re(1.0)).norm() < 1e-14));
}

#[test]
fn ambient_partial_examples() {
    for n in [2, 3] {
        let u1 = SpectralField::coordinate(n, 0).unwrap();
        let g = ambient_partial(&u1, 1, 0).unwrap();
        assert!(g.sub(&SpectralField::constant(n, re(1.0)).unwrap().with_band(g.band_limit()).unwrap()).unwrap().max_abs_coeff() < 1e-13);
        let one = SpectralField::constant(n, re(1.0)).unwrap();
        assert!(ambient_partial(&one, 0, n - 1).unwrap().max_abs_coeff() < 1e-14);
    }
    // ∂_1(y1/|y|) against a central difference of the 0-homogeneous extension.
    let u1 = SpectralField::coordinate(3, 0).unwrap();
    let g = ambient_partial(&u1, 0, 0).unwrap();
    let ext = |y: [f64; 3]| y[0] / (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
    let mut r = rng(3);
    for _ in 0..5 {
        let y: [f64; 3] = [r.random_range(-2.0..2.0), r.random_range(-2.0..2.0), r.random_range(0.3..2.0)];
        let h = 1e-6;
        let fd = (ext([y[0] + h, y[1], y[2]]) - ext([y[0] - h, y[1], y[2]])) / (2.0 * h);
        let ny = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
        let an = g.eval_at(&[y[0] / ny, y[1] / ny, y[2] / ny]) / ny;
        assert!((an - re(fd)).norm() < 1e-8, "{an} vs {fd}");
    }
}

#[test]
fn multiply_examples() {
    let c = SpectralField::coordinate(2, 0).unwrap();
    let cc = multiply(&c, &c).unwrap();
    assert!((cc.circle(0) - re(0.5)).norm() < 1e-14);
    assert!((cc.circle(2) - re(0.25)).norm() < 1e-14);
    let one = SpectralField::constant(2, re(1.0)).unwrap();
    assert!(multiply(&c, &one).unwrap().sub(&c).unwrap().max_abs_coeff() < 1e-14);
    let u1 = SpectralField::coordinate(3, 0).unwrap();
    let u2 = SpectralField::coordinate(3, 1).unwrap();
    let p = multiply(&u1, &u2).unwrap();
    let g = grid_for(3, 4).unwrap();
    let samples: Vec<C64> = g.nodes.iter().map(|u| re(u[0] * u[1])).collect();
    let oracle = analyze(&samples, &g, 2).unwrap();
    assert!(p.with_band(2).unwrap().sub(&oracle).unwrap().max_abs_coeff() < 1e-14);
    assert!(p.modes().filter(|(m, _)| m.l != 2).all(|(_, z)| z.norm() < 1e-14));
}

#[test]
fn parity_and_antipodes() {
    let f = random_field(3, 6, &mut rng(9)).unwrap();
    let even = f.parity_part(Parity::Even);
    let odd = f.parity_part(Parity::Odd);
    assert!(even.add(&odd).unwrap().sub(&f).unwrap().max_abs_coeff() < 1e-15);
    assert!(even.antipodal().sub(&even).unwrap().max_abs_coeff() < 1e-15);
    assert!(odd.antipodal().add(&odd).unwrap().max_abs_coeff() < 1e-15);
    let u = [0.48, -0.6, 0.64];
    assert!((f.antipodal().eval_at(&u) - f.eval_at(&[-0.48, 0.6, -0.64])).norm() < 1e-13);
}

#[test]
fn real_fields_have_conjugate_coefficients() {
    let f = SpectralField::from_fn(3, 5, |u| re(u[0] * u[2] - u[1].powi(3))).unwrap();
    assert!(f.imaginary_defect() < 1e-13);
    let g = SpectralField::from_fn(2, 5, |u| C64::new(u[0], u[1])).unwrap();
    assert!(g.imaginary_defect() > 0.1);
}

#[test]
fn mollify_is_heat_smoothing() {
    let f = random_field(2, 10, &mut rng(4)).unwrap();
    assert_eq!(f.mollify(0.0), f);
    let m = f.mollify(0.1);
    assert!((m.circle(3) - f.circle(3) * (-0.9f64).exp()).norm() < 1e-15);
}

#[test]
fn field_json_layout() {
    let f = random_field(3, 2, &mut rng(1)).unwrap();
    let v: serde_json::Value = serde_json::to_value(&f).unwrap();
    assert_eq!(v["layout"], "sh-lm");
    assert_eq!(v["L"], 2);
    assert_eq!(v["re"].as_array().unwrap().len(), 9);
    let back: SpectralField = serde_json::from_value(v).unwrap();
    assert_eq!(back, f);
    let g = SpectralField::zeros(2, 3).unwrap();
    assert_eq!(serde_json::to_value(&g).unwrap()["layout"], "circle-modes");
    let bad = serde_json::json!({"n": 2, "L": 1, "layout": "sh-lm", "re": [0, 0, 0], "im": [0, 0, 0]});
    assert!(serde_json::from_value::<SpectralField>(bad).is_err());
}

#[test]
fn circle_integral() {
    let f = SpectralField::from_fn(2, 6, |u| re(u[1] * u[1])).unwrap();
    assert!((f.integral() - re(PI)).norm() < 1e-13);
}

fn band_field() -> impl Strategy<Value = (usize, usize, u64)> {
    (2usize..=3, 1usize..=8, any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn analysis_inverts_synthesis((n, l, seed) in band_field()) {
        let f = random_field(n, l, &mut rng(seed)).unwrap();
        let g = grid_for(n, l).unwrap();
        let back = analyze(&synthesize(&f, &g).unwrap(), &g, l).unwrap();
        prop_assert!(back.sub(&f).unwrap().l2_norm() <= 1e-12 * f.l2_norm());
    }

    #[test]
    fn parseval((n, l, seed) in band_field()) {
        let f = random_field(n, l, &mut rng(seed)).unwrap();
        let g = grid_for(n, 2 * l).unwrap();
        let s = synthesize(&f, &g).unwrap();
        let quad = g.integrate(&s.iter().map(|z| re(z.norm_sqr())).collect::<Vec<_>>()).re;
        prop_assert!((quad - f.l2_norm().powi(2)).abs() <= 1e-12 * quad);
    }

    #[test]
    fn ambient_partials_commute((n, l, seed) in band_field(), r in -2i32..=1) {
        let f = random_field(n, l, &mut rng(seed)).unwrap();
        for i in 0..n {
            for j in 0..i {
                let a = ambient_partial(&ambient_partial(&f, r, i).unwrap(), r - 1, j).unwrap();
                let b = ambient_partial(&ambient_partial(&f, r, j).unwrap(), r - 1, i).unwrap();
                prop_assert!(a.sub(&b).unwrap().l2_norm() <= 1e-10 * a.l2_norm().max(1.0));
            }
        }
    }

    #[test]
    fn multiply_is_pointwise((n, l, seed) in band_field()) {
        let mut r = rng(seed);
        let f = random_field(n, l, &mut r).unwrap();
        let h = random_field(n, 3, &mut r).unwrap();
        let p = multiply(&f, &h).unwrap();
        let u = if n == 2 { vec![0.6, -0.8] } else { vec![0.36, -0.48, 0.8] };
        prop_assert!((p.eval_at(&u) - f.eval_at(&u) * h.eval_at(&u)).norm() < 1e-12);
    }
}
