use num_complex::Complex;
use proptest::prelude::*;
use valfour::exterior::{
    hodge_star, interior_product, pairing, top_coefficient, wedge, GradedCovector, MultiIndex, UnitTag,
};
use valfour::signs::double_star;
use valfour::{Covector, Covector32};

type C = Complex<f64>;

fn homogeneous(n: usize, k: usize, seeds: &[i32]) -> Covector {
    let mut a = GradedCovector::zero(n);
    for (idx, s) in MultiIndex::all_of_size(n, k).into_iter().zip(seeds) {
        a.add_term(idx, C::new(*s as f64, (s % 3) as f64));
    }
    a
}

fn mixed(n: usize, seeds: &[i32]) -> Covector {
    let mut a = GradedCovector::zero(n);
    for (bits, s) in (0..1u16 << n).zip(seeds) {
        a.add_term(MultiIndex::from_bits(n, bits), C::new(*s as f64, 0.0));
    }
    a
}

fn dim_and_degree() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=4).prop_flat_map(|n| (Just(n), 0..=n))
}

proptest! {
    #[test]
    fn double_star_sign((n, k) in dim_and_degree(), seeds in prop::collection::vec(-6i32..6, 6)) {
        let a = homogeneous(n, k, &seeds);
        let twice = hodge_star(&hodge_star(&a, "V"), "V*");
        prop_assert_eq!(twice.sub_terms(), a.scale(C::new(double_star(n, k), 0.0)).sub_terms());
    }

    #[test]
    fn star_pairing_is_top_coefficient(
        (n, k) in dim_and_degree(),
        s1 in prop::collection::vec(-6i32..6, 6),
        s2 in prop::collection::vec(-6i32..6, 6),
    ) {
        let z = homogeneous(n, k, &s1);
        let t = homogeneous(n, n - k, &s2);
        let lhs = pairing(&hodge_star(&z, "V"), &t).unwrap();
        let rhs = top_coefficient(&wedge(&z, &t).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn wedge_is_associative(
        n in 1usize..=4,
        s1 in prop::collection::vec(-4i32..4, 16),
        s2 in prop::collection::vec(-4i32..4, 16),
        s3 in prop::collection::vec(-4i32..4, 16),
    ) {
        let (a, b, c) = (mixed(n, &s1), mixed(n, &s2), mixed(n, &s3));
        let l = wedge(&wedge(&a, &b).unwrap(), &c).unwrap();
        let r = wedge(&a, &wedge(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(l.sub_terms(), r.sub_terms());
    }

    #[test]
    fn contraction_is_an_antiderivation(
        (n, k) in dim_and_degree(),
        s1 in prop::collection::vec(-4i32..4, 6),
        s2 in prop::collection::vec(-4i32..4, 16),
        v in prop::collection::vec(-3i32..3, 4),
    ) {
        let v: Vec<f64> = v[..n].iter().map(|x| *x as f64).collect();
        let a = homogeneous(n, k, &s1);
        let b = mixed(n, &s2);
        let lhs = interior_product(&v, &wedge(&a, &b).unwrap()).unwrap();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let rhs = wedge(&interior_product(&v, &a).unwrap(), &b)
            .unwrap()
            .add(&wedge(&a, &interior_product(&v, &b).unwrap()).unwrap().scale(C::new(sign, 0.0)))
            .unwrap();
        prop_assert_eq!(lhs.sub_terms(), rhs.sub_terms());
        let twice = interior_product(&v, &interior_product(&v, &b).unwrap()).unwrap();
        prop_assert!(twice.max_abs() == 0.0);
    }

    #[test]
    fn unit_tags_associate_and_follow_wedge(ws in prop::collection::vec(-2i32..3, 3), os in prop::collection::vec(0u8..2, 3)) {
        let tag = |i: usize| {
            let mut t = UnitTag::dens(["V", "W", "V"][i], ws[i]);
            if os[i] == 1 {
                t = t.compose(&UnitTag::or(["W", "V", "V"][i]));
            }
            t
        };
        let (a, b, c) = (tag(0), tag(1), tag(2));
        prop_assert_eq!(a.compose(&b).compose(&c), a.compose(&b.compose(&c)));
        let mut x = Covector::scalar(2, C::new(1.0, 0.0));
        x.unit = a.clone();
        let mut y = Covector::basis(2, 2).unwrap();
        y.unit = b.clone();
        prop_assert_eq!(wedge(&x, &y).unwrap().unit, a.compose(&b));
    }
}

trait Terms {
    fn sub_terms(&self) -> Vec<(MultiIndex, C)>;
}

impl Terms for Covector {
    fn sub_terms(&self) -> Vec<(MultiIndex, C)> {
        self.terms().filter(|(_, c)| c.norm() > 0.0).map(|(i, c)| (*i, *c)).collect()
    }
}

#[test]
fn hodge_tag_rewrite() {
    let a = Covector::basis(3, 1).unwrap();
    let s = hodge_star(&a, "V");
    assert!(s.unit.has_or("V"));
    assert_eq!(s.unit.density.get("V"), Some(&1));
    let back = hodge_star(&s, "V");
    assert!(!back.unit.has_or("V"));
}

#[test]
fn single_precision_kernel() {
    let a = Covector32::basis(3, 1).unwrap();
    let b = Covector32::basis(3, 2).unwrap();
    let ab = wedge(&a, &b).unwrap();
    assert_eq!(ab.coeff(MultiIndex::new(3, &[1, 2]).unwrap()), Complex::new(1.0f32, 0.0));
    assert_eq!(hodge_star(&ab, "V").coeff(MultiIndex::new(3, &[3]).unwrap()), Complex::new(1.0f32, 0.0));
    let v = GradedCovector::<f32>::from_vector(&[0.5, 0.25, 2.0]);
    assert_eq!(v.degree(), Some(1));
}

#[test]
fn multi_index_helpers() {
    let i = MultiIndex::new(4, &[1, 3]).unwrap();
    assert_eq!(i.complement().indices(), vec![2, 4]);
    assert_eq!(MultiIndex::all_of_size(4, 2).len(), 6);
    assert_eq!(valfour::exterior::shuffle_sign(i, i.complement()), -1);
    assert!(MultiIndex::new(2, &[1, 1]).is_err());
}
