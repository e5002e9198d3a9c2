//! Acceptance gate: runs every suite at default settings and prints one line per criterion.

use std::thread;

use valfour_cli::{run_suite, Check, Config, Report, SUITES};

const CRITERIA: [(u8, &str); 12] = [
    (1, "multiplier anchors and quadrature oracle, m <= 16"),
    (2, "F F = (-1)^{qn} (-id)^* on 20 random forms"),
    (3, "valuation type preserved on the library"),
    (4, "F F = (-id)^* on the library"),
    (5, "F lambda_1 = lambda_2, F V_1 = V_2, Monte Carlo boxes"),
    (6, "plane example modes with mollification"),
    (7, "F phi_E = phi_{E perp}: families and atomic boxes"),
    (8, "functoriality and its dual on forms"),
    (9, "product / convolution intertwining in the plane"),
    (10, "self-adjointness and pairing lemma"),
    (11, "sign ledger"),
    (12, "delta pullback, Sym^2, Rumin kernel"),
];

/// Smallest number of checks each criterion must run: `(criterion, anchor, count)`.
const MINIMUM: &[(u8, &str, usize)] = &[
    (1, "multiplier-anchor", 3),
    (1, "multiplier-oracle", 100),
    (2, "form-inversion", 20),
    (3, "valuation-type", 12),
    (4, "valuation-inversion", 12),
    (5, "lambda-duality", 1),
    (5, "intrinsic-duality", 11),
    (6, "plane-example", 3),
    (7, "even-perp", 60),
    (8, "functoriality", 6),
    (8, "functoriality-dual", 6),
    (9, "product-convolution", 6),
    (9, "product-oracle", 2),
    (10, "self-adjointness", 6),
    (10, "pairing-lemma", 6),
    (11, "double-star", 1),
    (11, "pairing-symmetry", 1),
    (11, "functoriality", 1),
    (11, "exterior-product", 1),
    (11, "fourier0-product", 1),
    (11, "d-interior-euler", 1),
    (12, "delta-pullback", 1),
    (12, "sym2", 1),
    (12, "rumin-kernel", 1),
];

#[test]
fn acceptance() {
    let cfg = Config::default();
    let reports: Vec<Report> = thread::scope(|s| {
        let handles: Vec<_> = SUITES.iter().map(|name| s.spawn(|| run_suite(name, &cfg).expect("suite runs"))).collect();
        handles.into_iter().map(|h| h.join().expect("suite thread")).collect()
    });
    let checks: Vec<&Check> = reports.iter().flat_map(|r| &r.checks).collect();
    let mut all = true;
    println!();
    for (c, desc) in CRITERIA {
        let mine: Vec<&&Check> = checks.iter().filter(|k| k.criterion == Some(c)).collect();
        let counts_ok = MINIMUM
            .iter()
            .filter(|m| m.0 == c)
            .all(|m| mine.iter().filter(|k| k.anchor == m.1).count() >= m.2);
        let pass = !mine.is_empty() && counts_ok && mine.iter().all(|k| k.pass);
        let worst = mine.iter().map(|k| k.error / k.tolerance).fold(0.0, f64::max);
        println!(
            "criterion {c:>2} {}  {desc}: {} checks, worst error/tolerance {worst:.2e}{}",
            if pass { "PASS" } else { "FAIL" },
            mine.len(),
            if counts_ok { "" } else { " (too few checks)" }
        );
        for k in mine.iter().filter(|k| !k.pass) {
            println!("    {} [{}] error {:.3e} > {:.1e} {}", k.id, k.anchor, k.error, k.tolerance, k.note.as_deref().unwrap_or(""));
        }
        all &= pass;
    }
    assert!(all, "acceptance criteria failed");
}
