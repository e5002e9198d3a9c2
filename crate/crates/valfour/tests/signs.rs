use valfour::signs::{self, LEDGER};
use valfour::sphere::SpectralField;
use valfour::valuations::{exterior_product_val, fourier0_tensor, intrinsic_current, plane_current, tensor_forms};
use valfour::fourier::fourier0;
use valfour::C64;

fn pow(e: usize) -> f64 {
    (-1.0f64).powi(e as i32)
}

#[test]
fn ledger_lists_every_identity_once() {
    let ids: Vec<&str> = LEDGER.iter().map(|e| e.id).collect();
    for id in [
        "double-star",
        "pairing-symmetry",
        "form-inversion",
        "functoriality",
        "exterior-product",
        "fourier0-product",
        "d-interior-euler",
        "generating-current",
    ] {
        assert_eq!(ids.iter().filter(|x| **x == id).count(), 1, "{id}");
    }
    assert!(LEDGER.iter().all(|e| !e.formula.is_empty() && !e.anchor.is_empty()));
}

#[test]
fn factors_match_their_formulas() {
    for n in 0..=4usize {
        for k in 0..=n {
            assert_eq!(signs::double_star(n, k), pow(k * (n - k)));
            assert_eq!(signs::pairing_symmetry(n, k), pow(k * (n - k)));
            assert_eq!(signs::form_inversion(n, k), pow(k * n));
            assert_eq!(signs::generating_current(n, k), pow(n - k));
            for m in n..=4 {
                assert_eq!(signs::functoriality(n, m, k), pow((m - n) * (n - k)));
                assert_eq!(signs::inclusion_pairing(n, m, k), pow((m - n) * (n - k)));
            }
            for l in 0..=4 {
                assert_eq!(signs::exterior_product(n, k, l), pow((n - k) * l));
                for m in 0..=4 {
                    assert_eq!(signs::fourier0_product(n, k, m, l), pow(k * m + l * n));
                }
            }
        }
    }
    for q in 0..5 {
        let z = signs::d_interior_euler(q);
        assert_eq!(z.re, 0.0);
        assert!((z.im - 2.0 * std::f64::consts::PI * pow(q + 1)).abs() < 1e-15);
    }
}

#[test]
fn exterior_product_sign_on_plane_currents() {
    let g = SpectralField::from_fn(2, 6, |u| C64::new(1.0 + 0.3 * (u[0] * u[0] - u[1] * u[1]), 0.0)).unwrap();
    let a = plane_current(&g).unwrap();
    let b = intrinsic_current(2, 1).unwrap();
    let direct = tensor_forms(a.current(), b.current()).unwrap().scale(C64::new(signs::exterior_product(2, 1, 1), 0.0));
    assert!(exterior_product_val(&a, &b).unwrap().sample_distance(&direct) < 1e-14);
}

#[test]
fn twisted_transform_of_products() {
    for (n, k, m, l) in [(2, 1, 2, 1), (2, 1, 3, 2), (3, 1, 2, 1)] {
        let a = intrinsic_current(n, k).unwrap();
        let b = intrinsic_current(m, l).unwrap();
        let lhs = fourier0_tensor(&tensor_forms(a.current(), b.current()).unwrap()).unwrap();
        let rhs = tensor_forms(&fourier0(a.current()).unwrap(), &fourier0(b.current()).unwrap())
            .unwrap()
            .scale(C64::new(signs::fourier0_product(n, k, m, l), 0.0));
        assert!(lhs.sample_distance(&rhs) < 1e-10, "({n},{k},{m},{l})");
    }
}
