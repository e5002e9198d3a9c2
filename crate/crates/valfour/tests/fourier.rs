use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use valfour::exterior::MultiIndex;
use valfour::fourier::{bochner_multiplier, fourier0, fourier_form, MultiplierTable};
use valfour::homforms::{
    ext_derivative, ext_derivative_distributional, interior_euler, pair_with_test, HomForm, TestForm,
};
use valfour::signs;
use valfour::sphere::{Mode, SpectralField};
use valfour::valuations::{euler_current, intrinsic_current, lambda_form, volume_current};
use valfour::C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `J_m(x) = (1/π) ∫_0^π cos(mτ - x sin τ) dτ`, trapezoidal in the periodic variable.
fn bessel_j(m: usize, x: f64) -> f64 {
    let k = 96;
    let h = PI / k as f64;
    let f = |t: f64| (m as f64 * t - x * t.sin()).cos();
    let mut s = 0.5 * (f(0.0) + f(PI));
    for j in 1..k {
        s += f(j as f64 * h);
    }
    s * h / PI
}

/// `B(2, 1, m)` from `F(|y|^{-1} e^{imθ} e^{-πε|y|²})(e_1) = 2π i^m ∫ J_m(2πr) e^{-πεr²} dr`,
/// Richardson-extrapolated to `ε = 0`.
fn plane_multiplier_oracle(m: usize) -> C64 {
    let radial = |eps: f64| {
        let rmax = (40.0 / (PI * eps)).sqrt();
        let steps = (rmax / 0.004) as usize * 2;
        let h = rmax / steps as f64;
        let f = |r: f64| bessel_j(m, 2.0 * PI * r) * (-PI * eps * r * r).exp();
        let mut s = f(0.0) + f(rmax);
        for j in 1..steps {
            s += f(j as f64 * h) * if j % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    };
    let (a, b, c) = (radial(0.04), radial(0.02), radial(0.01));
    let r1 = 2.0 * b - a;
    let r2 = 2.0 * c - b;
    let limit = (4.0 * r2 - r1) / 3.0;
    I.powu(m as u32) * (2.0 * PI * limit)
}

#[test]
fn multiplier_anchors() {
    assert!((bochner_multiplier(2, 1.0, 0).unwrap() - re(1.0)).norm() < 1e-14);
    assert!((bochner_multiplier(3, 2.0, 0).unwrap() - re(PI)).norm() < 1e-13);
}

#[test]
fn plane_multipliers_against_hankel_oracle() {
    for m in [0usize, 2, 3, 5] {
        let oracle = plane_multiplier_oracle(m);
        let frozen = I.powu(m as u32);
        assert!((oracle - frozen).norm() < 1e-4, "m = {m}: oracle {oracle}");
        assert!((bochner_multiplier(2, 1.0, m).unwrap() - frozen).norm() < 1e-13);
    }
}

#[test]
fn sphere_multipliers_frozen() {
    // Bochner: i^m π^{λ-n/2} Γ((n+m-λ)/2) / Γ((m+λ)/2).
    let cases = [(1.0, 0, re(1.0 / PI)), (2.0, 1, I * 2.0), (1.0, 1, I * 0.5), (2.0, 2, re(-PI / 2.0))];
    for (lambda, m, want) in cases {
        let got = bochner_multiplier(3, lambda, m).unwrap();
        assert!((got - want).norm() < 1e-13, "λ = {lambda}, m = {m}: {got}");
    }
}

#[test]
fn multipliers_match_quadrature_oracle() {
    for (n, lambda, m) in [(2, 1.0, 4), (2, 0.5, 3), (3, 2.0, 3), (3, 1.5, 2)] {
        let q = valfour::fourier::oracle::multiplier_by_quadrature(n, lambda, m).unwrap();
        let b = bochner_multiplier(n, lambda, m).unwrap();
        assert!((q - b).norm() < 1e-8 * b.norm().max(1.0), "({n}, {lambda}, {m}): {q} vs {b}");
    }
}

#[test]
fn table_rows_cover_every_degree() {
    let t = MultiplierTable::new(3, 6).unwrap();
    assert!(t.rows().iter().all(|r| r.n == 3 && r.m <= 6));
    assert!((t.get(2, 0).unwrap() - re(PI)).norm() < 1e-13);
    for m in 0..=6 {
        let b = bochner_multiplier(3, 1.0, m).unwrap();
        assert_eq!(t.get(1, m).unwrap(), b);
    }
    assert!(bochner_multiplier(3, 1.0, 0).unwrap().re > 0.0);
}

#[test]
fn delta_and_constant_are_dual() {
    let d = HomForm::atom_form(3, 0, re(1.0)).unwrap();
    let f = fourier_form(&d).unwrap();
    assert!((f.coeff_by(&[], &[]).unwrap().eval_at(&[0.0, 0.6, 0.8]) - re(1.0)).norm() < 1e-14);
    let g = SpectralField::constant(3, re(1.0)).unwrap();
    // |y|^{-2} in R^3 goes to π |ξ|^{-1}: a 2-form coefficient transforms with λ = 2.
    let w = HomForm::from_sphere_data(3, 2, 0, 0, [((MultiIndex::new(3, &[1, 2]).unwrap(), MultiIndex::empty(3)), g)]).unwrap();
    let fw = fourier_form(&w).unwrap();
    let z = fw.coeff_by(&[3], &[]).unwrap().eval_at(&[0.0, 0.0, 1.0]);
    assert!((z.norm() - PI).abs() < 1e-12, "{z}");
}

#[test]
fn twisted_transform_examples() {
    let l1 = intrinsic_current(3, 1).unwrap();
    let l2 = intrinsic_current(3, 2).unwrap();
    assert!(fourier0(l1.current()).unwrap().rel_distance(l2.current()) < 1e-12);
    let f = fourier0(&lambda_form(3, 1).unwrap()).unwrap();
    assert!(f.rel_distance(&lambda_form(3, 2).unwrap()) < 1e-12);
    for n in 1..=3 {
        let e = euler_current(n).unwrap();
        let v = volume_current(n).unwrap();
        assert!(fourier0(e.current()).unwrap().rel_distance(v.current()) < 1e-14);
        assert!(fourier0(v.current()).unwrap().rel_distance(e.current()) < 1e-14);
    }
}

fn shape() -> impl Strategy<Value = (usize, usize, u64)> {
    (2usize..=3).prop_flat_map(|n| (Just(n), 0..=n, any::<u64>()))
}

fn drop_mean(w: HomForm) -> HomForm {
    if w.form_degree() < w.dim() {
        return w;
    }
    w.map_fields(|_, g| {
        let mut h = g.clone();
        h.set(Mode { l: 0, m: 0 }, C64::default());
        h
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn transform_squares_to_signed_reflection((n, q, seed) in shape()) {
        let w = drop_mean(HomForm::random(n, q, 0, 6, &mut rng(seed)).unwrap());
        let ff = fourier_form(&fourier_form(&w).unwrap()).unwrap();
        let want = w.antipodal_form().scale(re(signs::form_inversion(n, q)));
        prop_assert!(ff.rel_distance(&want) <= 1e-10);
    }

    #[test]
    fn d_and_euler_contraction_interchange((n, q, seed) in shape()) {
        let mut r = rng(seed);
        if q + 1 < n {
            let w = HomForm::random(n, q, 0, 5, &mut r).unwrap();
            let lhs = fourier_form(&ext_derivative(&w).unwrap()).unwrap();
            let rhs = interior_euler(&fourier_form(&w).unwrap()).unwrap().scale(signs::d_interior_euler(q));
            prop_assert!(lhs.rel_distance(&rhs) <= 1e-8);
        }
        if q >= 1 && q < n {
            let w = HomForm::random(n, q, 0, 5, &mut r).unwrap();
            let lhs = ext_derivative_distributional(&fourier_form(&w).unwrap()).unwrap();
            let rhs = fourier_form(&interior_euler(&w).unwrap()).unwrap().scale(signs::d_interior_euler(q));
            prop_assert!(lhs.rel_distance(&rhs) <= 1e-8);
        }
    }

    #[test]
    fn transform_is_symmetric_under_pairing((n, q, seed) in shape()) {
        prop_assume!(q >= 1 && q < n);
        let mut r = rng(seed);
        let w = HomForm::random(n, q, 0, 5, &mut r).unwrap();
        let psi = TestForm::random_gaussian(n, q, &mut r);
        let a: C64 = pair_with_test(&fourier_form(&w).unwrap(), &psi).unwrap().values().sum();
        let b: C64 = pair_with_test(&w, &psi.fourier().unwrap()).unwrap().values().sum();
        prop_assert!((a - b * signs::pairing_symmetry(n, q)).norm() <= 1e-6 * a.norm().max(1e-3));
    }

    #[test]
    fn dual_multipliers_multiply_to_a_sign(n in 2usize..=3, m in 0usize..=16, lambda in 1usize..=2) {
        prop_assume!(lambda < n);
        let a = bochner_multiplier(n, lambda as f64, m).unwrap();
        let b = bochner_multiplier(n, (n - lambda) as f64, m).unwrap();
        prop_assert!((a * b - re(signs::minus_one_pow(m))).norm() <= 1e-12);
    }
}
