//! Sign factors used across the crate, one entry per identity.
//!
//! Every factor is a power of `-1` except the `d`/`i_E` interchange, which also
//! carries `2πi`. [`LEDGER`] lists the identities with the anchor strings used in reports.

use std::f64::consts::PI;

use serde::Serialize;

use crate::C64;

pub fn minus_one_pow(e: usize) -> f64 {
    if e.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `∗∗ = (-1)^{k(n-k)}` on `k`-vectors.
pub fn double_star(n: usize, k: usize) -> f64 {
    minus_one_pow(k * (n - k))
}

/// `⟨Fω, η⟩ = (-1)^{q(n-q)} ⟨ω, Fη⟩`.
pub fn pairing_symmetry(n: usize, q: usize) -> f64 {
    minus_one_pow(q * (n - q))
}

/// `F∘F = (-1)^{qn} (-id)^*` on `q`-forms.
pub fn form_inversion(n: usize, q: usize) -> f64 {
    minus_one_pow(q * n)
}

/// `F_W∘i_* = (-1)^{(m-n)(n-k)} (i^∨)^*∘F_V` for `i: R^n → R^m` on `k`-forms.
pub fn functoriality(n: usize, m: usize, k: usize) -> f64 {
    minus_one_pow((m - n) * (n - k))
}

/// `⟨i_*T, ψ⟩ = (-1)^{(m-n)(n-k)} ∫_V T ∧ i^*ψ` with `i_*T = T ∧ δ dy_J`, normal directions last.
pub fn inclusion_pairing(n: usize, m: usize, k: usize) -> f64 {
    minus_one_pow((m - n) * (n - k))
}

/// `τ(φ⊠ψ) = (-1)^{(n-k)l} τ(φ)⊠τ(ψ)`.
pub fn exterior_product(n: usize, k: usize, l: usize) -> f64 {
    minus_one_pow((n - k) * l)
}

/// `F⁰(ω⊠ζ) = (-1)^{km+ln} F⁰ω⊠F⁰ζ`, `ω` of value degree `k` on `R^n`, `ζ` of value degree `l` on `R^m`.
pub fn fourier0_product(n: usize, k: usize, m: usize, l: usize) -> f64 {
    minus_one_pow(k * m + l * n)
}

/// `F(dω) = (-1)^{q+1} 2πi · i_E F(ω)` and `d F(ω) = (-1)^{q+1} 2πi · F(i_E ω)`.
pub fn d_interior_euler(q: usize) -> C64 {
    C64::new(0.0, 2.0 * PI * minus_one_pow(q + 1))
}

/// `τ(φ) = (-1)^{n-k} a^* Dω + …` for a generating form of a degree-`k` valuation.
pub fn generating_current(n: usize, k: usize) -> f64 {
    minus_one_pow(n - k)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SignEntry {
    pub id: &'static str,
    pub anchor: &'static str,
    pub formula: &'static str,
}

pub const LEDGER: &[SignEntry] = &[
    SignEntry { id: "double-star", anchor: "Hodge star squared", formula: "(-1)^{k(n-k)}" },
    SignEntry { id: "pairing-symmetry", anchor: "<F w, h> = s <w, F h>", formula: "(-1)^{q(n-q)}" },
    SignEntry { id: "form-inversion", anchor: "F F = s (-id)^*", formula: "(-1)^{qn}" },
    SignEntry { id: "functoriality", anchor: "F_W i_* = s (i^v)^* F_V", formula: "(-1)^{(m-n)(n-k)}" },
    SignEntry { id: "exterior-product", anchor: "tau(phi x psi) = s tau(phi) x tau(psi)", formula: "(-1)^{(n-k)l}" },
    SignEntry { id: "fourier0-product", anchor: "F0(w x z) = s F0 w x F0 z", formula: "(-1)^{km+ln}" },
    SignEntry { id: "d-interior-euler", anchor: "F(dw) = s 2 pi i i_E F(w)", formula: "(-1)^{q+1} 2 pi i" },
    SignEntry { id: "generating-current", anchor: "tau = s a^* D w", formula: "(-1)^{n-k}" },
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powers() {
        assert_eq!(double_star(3, 1), 1.0);
        assert_eq!(double_star(2, 1), -1.0);
        assert_eq!(double_star(4, 2), 1.0);
        assert_eq!(form_inversion(3, 1), -1.0);
        assert_eq!(functoriality(2, 3, 1), -1.0);
        assert_eq!(fourier0_product(2, 1, 3, 1), -1.0);
        assert_eq!(exterior_product(2, 1, 1), -1.0);
        assert_eq!(d_interior_euler(0), C64::new(0.0, -2.0 * PI));
    }

    #[test]
    fn ledger_ids_unique() {
        let mut ids: Vec<_> = LEDGER.iter().map(|e| e.id).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), LEDGER.len());
    }
}
