use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use valfour::exterior::MultiIndex;
use valfour::homforms::{
    ext_derivative, gl_pullback, interior_euler, is_valuation_type, mollify, pair_with_test, pullback_mono_delta,
    pullback_mono_smooth, pushforward_spectral, pushforward_weak, vertical_defect, HomForm, LinMap, TestForm,
};
use valfour::sphere::{multiply, random_field, SpectralField};
use valfour::valuations::{intrinsic_current, lambda_form, plane_current, support_density_current};
use valfour::C64;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn idx(n: usize, i: &[usize]) -> MultiIndex {
    MultiIndex::new(n, i).unwrap()
}

fn angle_form() -> HomForm {
    let e = MultiIndex::empty(2);
    HomForm::from_sphere_data(
        2,
        1,
        0,
        0,
        [
            ((idx(2, &[2]), e), SpectralField::coordinate(2, 0).unwrap()),
            ((idx(2, &[1]), e), SpectralField::coordinate(2, 1).unwrap().scale(re(-1.0))),
        ],
    )
    .unwrap()
}

fn first_harmonic_free(n: usize, band: usize, seed: u64) -> SpectralField {
    let g = random_field(n, band, &mut rng(seed)).unwrap();
    let odd = g.parity_part(valfour::sphere::Parity::Odd);
    let l1 = odd.with_band(1).unwrap().with_band(band).unwrap();
    g.sub(&l1).unwrap()
}

#[test]
fn constant_function_extension() {
    let one = SpectralField::constant(3, re(1.0)).unwrap();
    let w = HomForm::from_sphere_data(3, 0, 0, 0, [((MultiIndex::empty(3), MultiIndex::empty(3)), one)]).unwrap();
    for (_, z) in w.eval_at(&[0.0, 0.6, 0.8]) {
        assert!((z - re(1.0)).norm() < 1e-14);
    }
    let f2 = SpectralField::zeros(2, 3).unwrap();
    let f3 = SpectralField::zeros(2, 4).unwrap();
    let e = MultiIndex::empty(2);
    assert!(HomForm::from_sphere_data(2, 1, 0, 0, [((idx(2, &[1]), e), f2), ((idx(2, &[2]), e), f3)]).is_err());
}

#[test]
fn lambda_one_in_three_dimensions() {
    let l = lambda_form(3, 1).unwrap();
    let c = 1.0 / (2.0 * PI);
    for j in 1..=3 {
        let key = (idx(3, &[j]).complement(), idx(3, &[j]));
        let s = valfour::exterior::shuffle_sign(key.1, key.0) as f64;
        assert!((l.coeff(&key).unwrap().eval_at(&[0.0, 0.0, 1.0]) - re(s * c)).norm() < 1e-15);
    }
}

#[test]
fn euler_field_examples() {
    assert!(interior_euler(&angle_form()).unwrap().norm() < 1e-13);
    assert!(ext_derivative(&angle_form()).unwrap().norm() < 1e-12);
    for (n, k) in [(3, 1), (3, 2), (2, 1)] {
        let t = intrinsic_current(n, k).unwrap();
        assert!(vertical_defect(t.current()).unwrap().0 < 1e-10);
        let rep = is_valuation_type(t.current(), 1e-10).unwrap();
        assert!(rep.pass, "{rep:?}");
    }
}

#[test]
fn d_of_contracted_lambda_is_the_plane_current() {
    let t = ext_derivative(&interior_euler(&lambda_form(2, 1).unwrap()).unwrap()).unwrap();
    let half = SpectralField::constant(2, re(0.5)).unwrap();
    let p = plane_current(&half).unwrap();
    assert!(t.rel_distance(p.current()) < 1e-13);
}

#[test]
fn plane_density_current_is_valuation_type() {
    let g = SpectralField::from_fn(2, 6, |u| re((3.0 * u[1].atan2(u[0])).cos())).unwrap();
    let p = plane_current(&g).unwrap();
    assert!(is_valuation_type(p.current(), 1e-10).unwrap().pass);
}

#[test]
fn gl_pullback_examples() {
    let w = support_density_current(&first_harmonic_free(2, 6, 1)).unwrap();
    let id = gl_pullback(&LinMap::identity(2), w.current()).unwrap();
    assert!(id.rel_distance(w.current()) < 1e-15);
    let v1 = intrinsic_current(2, 1).unwrap();
    let flip = gl_pullback(&LinMap::scalar(2, -1.0), v1.current()).unwrap();
    assert!(flip.rel_distance(v1.current()) < 1e-13);
}

#[test]
fn rotating_a_density_rotates_the_current() {
    let g = first_harmonic_free(2, 8, 5);
    let w = plane_current(&g).unwrap();
    let a = 2.0 * PI / 3.0;
    let rot = gl_pullback(&LinMap::rotation_2d(a), w.current()).unwrap();
    let rotated = SpectralField::from_fn(2, 8, |u| {
        let v = [a.cos() * u[0] - a.sin() * u[1], a.sin() * u[0] + a.cos() * u[1]];
        g.eval_at(&v)
    })
    .unwrap();
    let oracle = plane_current(&rotated).unwrap();
    assert!(rot.rel_distance(oracle.current()) < 1e-12, "{}", rot.rel_distance(oracle.current()));
}

#[test]
fn gl_pullback_composes() {
    let w = HomForm::random(3, 1, 1, 5, &mut rng(2)).unwrap();
    let a = LinMap::rotation_3d([1.0, 2.0, -0.5], 0.7);
    let b = LinMap::rotation_3d([0.0, 1.0, 1.0], -1.3);
    let ab = gl_pullback(&a.compose(&b).unwrap(), &w).unwrap();
    let ba = gl_pullback(&b, &gl_pullback(&a, &w).unwrap()).unwrap();
    assert!(ab.rel_distance(&ba) < 1e-12);
    let w2 = HomForm::random(2, 1, 1, 6, &mut rng(3)).unwrap();
    let a = LinMap::new(vec![vec![1.2, 0.3], vec![-0.4, 0.9]]).unwrap();
    let b = LinMap::new(vec![vec![0.8, -0.6], vec![0.5, 1.1]]).unwrap();
    let ab = gl_pullback(&a.compose(&b).unwrap(), &w2).unwrap();
    let ba = gl_pullback(&b, &gl_pullback(&a, &w2).unwrap()).unwrap();
    assert!(ab.rel_distance(&ba) < 1e-8, "{}", ab.rel_distance(&ba));
    assert!(gl_pullback(&LinMap::coordinate_inclusion(1, 2), &w2).is_err());
}

#[test]
fn mollify_commutes_with_rotations() {
    let w = HomForm::random(3, 2, 1, 6, &mut rng(4)).unwrap();
    let r = LinMap::rotation_3d([0.3, -1.0, 0.2], 2.1);
    let a = mollify(&gl_pullback(&r, &w).unwrap(), 0.05);
    let b = gl_pullback(&r, &mollify(&w, 0.05)).unwrap();
    assert!(a.rel_distance(&b) < 1e-12);
    assert_eq!(mollify(&w, 0.0), w);
}

#[test]
fn smooth_pullback_examples() {
    let one = SpectralField::constant(2, re(1.0)).unwrap();
    let w = HomForm::from_sphere_data(2, 0, 0, 0, [((MultiIndex::empty(2), MultiIndex::empty(2)), one)]).unwrap();
    let p = pullback_mono_smooth(&LinMap::coordinate_inclusion(1, 2), &w).unwrap();
    for u in [[1.0], [-1.0]] {
        let v: Vec<C64> = p.eval_at(&u).into_values().collect();
        assert!((v[0] - re(1.0)).norm() < 1e-14);
    }
    // Coordinate plane in R^3: pointwise restriction of a 1-form.
    let w = HomForm::random(3, 1, 0, 5, &mut rng(6)).unwrap();
    let p = pullback_mono_smooth(&LinMap::coordinate_inclusion(2, 3), &w).unwrap();
    for t in [0.3f64, 1.9, 4.0] {
        let u2 = [t.cos(), t.sin()];
        let at = w.eval_at(&[u2[0], u2[1], 0.0]);
        let got = p.eval_at(&u2);
        for i in 1..=2 {
            let a = got[&(idx(2, &[i]), MultiIndex::empty(3))];
            let b = at[&(idx(3, &[i]), MultiIndex::empty(3))];
            assert!((a - b).norm() < 1e-12);
        }
    }
}

#[test]
fn delta_pullback_probes_agree() {
    let w = gl_pullback(&LinMap::rotation_2d(0.4), &angle_form()).unwrap();
    let r = pullback_mono_delta(&LinMap::coordinate_inclusion(1, 2), &w, 1e-10).unwrap();
    assert!((r.c() - re(PI)).norm() < 1e-10);
    let v1 = intrinsic_current(3, 1).unwrap();
    let r = pullback_mono_delta(&LinMap::coordinate_inclusion(2, 3), v1.current(), 1e-8).unwrap();
    assert!(r.spread < 1e-8, "{}", r.spread);
    let bad = HomForm::random(2, 1, 0, 4, &mut rng(7)).unwrap();
    assert!(pullback_mono_delta(&LinMap::coordinate_inclusion(1, 2), &bad, 1e-8).is_err());
}

#[test]
fn spectral_pushforward_examples() {
    let out = pushforward_spectral(&angle_form()).unwrap();
    let g = out.coeff(&(MultiIndex::empty(1), MultiIndex::empty(2))).unwrap();
    assert!((g.eval_at(&[1.0]) - re(PI)).norm() < 1e-10);
    // The angle form times a function odd in the fiber coordinate integrates to zero.
    let u2 = SpectralField::coordinate(2, 1).unwrap();
    let odd = angle_form().map_fields(|_, g| multiply(g, &u2).unwrap());
    assert!(interior_euler(&odd).unwrap().norm() < 1e-13);
    assert!(pushforward_spectral(&odd).unwrap().norm() < 1e-12);
}

#[test]
fn weak_and_spectral_pushforwards_agree() {
    let p = LinMap::coordinate_projection(3, 2);
    let mut r = rng(11);
    for w in [
        intrinsic_current(3, 1).unwrap().into_current(),
        support_density_current(&first_harmonic_free(3, 4, 12)).unwrap().into_current(),
    ] {
        let spectral = pushforward_spectral(&w).unwrap();
        for _ in 0..5 {
            let t = TestForm::random(2, 1, 2, &mut r);
            let a = pushforward_weak(&p, &w, &t).unwrap();
            let b = pair_with_test(&spectral, &t).unwrap();
            let scale = a.values().map(|z| z.norm()).fold(1e-3, f64::max);
            for (j, z) in &a {
                let d = (z - b.get(j).copied().unwrap_or_default()).norm();
                assert!(d < 1e-4 * scale, "{j:?}: {z} vs {:?}", b.get(j));
            }
        }
    }
}

#[test]
fn weak_pushforward_is_linear_in_the_test() {
    let w = intrinsic_current(3, 2).unwrap().into_current();
    let p = LinMap::coordinate_projection(3, 2);
    let mut r = rng(13);
    let t1 = TestForm::random(2, 0, 2, &mut r);
    let mut t2 = t1.clone();
    t2.terms = TestForm::random(2, 0, 2, &mut r).terms;
    let mut sum = t1.clone();
    sum.terms.extend(t2.terms.iter().map(|(k, c, a)| (*k, c * 2.0, a.clone())));
    let a = pushforward_weak(&p, &w, &t1).unwrap();
    let b = pushforward_weak(&p, &w, &t2).unwrap();
    let s = pushforward_weak(&p, &w, &sum).unwrap();
    for (j, z) in &s {
        let lin = a.get(j).copied().unwrap_or_default() + b.get(j).copied().unwrap_or_default() * 2.0;
        assert!((z - lin).norm() < 1e-10 * z.norm().max(1.0));
    }
}

#[test]
fn homform_json_round_trip() {
    let w = intrinsic_current(3, 1).unwrap().into_current();
    let s = serde_json::to_string(&w).unwrap();
    let v: serde_json::Value = serde_json::from_str(&s).unwrap();
    assert_eq!(v["space"]["dim"], 3);
    assert_eq!(v["form_degree"], 2);
    assert_eq!(v["value_degree"], 1);
    let back: HomForm = serde_json::from_str(&s).unwrap();
    assert_eq!(back, w);
}

fn shape() -> impl Strategy<Value = (usize, usize, usize, u64)> {
    (2usize..=3).prop_flat_map(|n| (Just(n), 1..=n, 0..=n, any::<u64>()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn cartan_identities((n, q, p, seed) in shape()) {
        prop_assume!(q < n);
        let w = HomForm::random(n, q, p, 5, &mut rng(seed)).unwrap();
        let ie = interior_euler(&w).unwrap();
        if q >= 2 {
            prop_assert!(interior_euler(&ie).unwrap().norm() <= 1e-10 * w.norm());
        }
        let lie = ext_derivative(&ie).unwrap().add(&interior_euler(&ext_derivative(&w).unwrap()).unwrap()).unwrap();
        prop_assert!(lie.norm() <= 1e-10 * w.norm());
        if q + 2 <= n {
            let dd = ext_derivative(&ext_derivative(&w).unwrap()).unwrap();
            prop_assert!(dd.norm() <= 1e-10 * w.norm());
        }
    }

    #[test]
    fn contracted_forms_round_trip_through_the_sphere((n, q, p, seed) in shape()) {
        prop_assume!(q < n);
        let w = interior_euler(&HomForm::random(n, q + 1, p, 5, &mut rng(seed)).unwrap()).unwrap();
        prop_assert!(interior_euler(&w).unwrap().norm() <= 1e-10 * w.norm());
        let lq = 2 * w.band_limit() + 2;
        let grid = valfour::sphere::grid_for(n, lq).unwrap();
        let samples = w.sample(&grid).unwrap();
        let back = HomForm::from_pointwise(n, n, &w.label, q, p, 0, w.band_limit(), lq, |u| {
            let k = grid.nodes.iter().position(|x| x[..n] == *u).unwrap();
            samples.iter().map(|(key, s)| (*key, s[k])).collect()
        })
        .unwrap();
        prop_assert!(back.rel_distance(&w) <= 1e-12);
    }
}
