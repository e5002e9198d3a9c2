//! Identity suites. Each suite draws its data from a seeded generator and records
//! one [`Check`] per identity instance.

mod even;
mod functoriality;
mod intrinsic;
pub mod library;
mod multipliers;
mod inversion;
mod plane_example;
mod product;
mod selfadjoint;
mod signs;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::report::{Check, Environment, Report};
use crate::{CliError, Config, Result};

pub const SUITES: &[&str] = &[
    "inversion",
    "intrinsic",
    "plane-example",
    "even",
    "selfadjoint",
    "functoriality",
    "product-convolution",
    "signs",
    "multipliers",
];

/// Identity registry: every report anchor is one of these names or a sign-ledger id.
pub const IDENTITIES: &[(&str, &str)] = &[
    ("multiplier-anchor", "B(n, n-k, 0) = vol(S^{n-k-1}) / vol(S^{k-1})"),
    ("multiplier-oracle", "B(n, λ, m) equals the Gaussian-regularized transform of |y|^{-λ} Y_m"),
    ("multiplier-inversion", "B(n, λ, m) B(n, n-λ, m) = (-1)^m"),
    ("valuation-type", "F⁰ maps valuation-type currents to valuation-type currents"),
    ("valuation-inversion", "F F φ = (-id)^* φ"),
    ("gl-equivariance", "F(g φ) = |det g| (g^{-T}) F φ"),
    ("parity", "F preserves even and odd parts"),
    ("sym2", "τ̄ is symmetric in its two slots"),
    ("lambda-duality", "F⁰ λ_k = λ_{n-k}"),
    ("intrinsic-duality", "F V_k = V_{n-k}"),
    ("rumin-intrinsic", "D κ_k gives the current of V_k"),
    ("plane-multiplier", "the density of F φ has coefficients i^{|m|} ĝ(m)"),
    ("plane-example", "f̂_ψ(3m) = 3/π for odd m, transformed by i^{|3m|}"),
    ("even-perp", "F φ_E = φ_{E^⊥}"),
    ("functoriality", "F i^* = (i^∨)_* F"),
    ("functoriality-dual", "F_W i_* = s (i^∨)^* F_V on forms"),
    ("delta-pullback", "e^* ω = c δ_0 with c independent of the slice"),
    ("product-convolution", "φ · ψ = F φ * F ψ"),
    ("product-oracle", "φ_E · φ_F = |sin ∠(E, F)|"),
    ("self-adjointness", "<F u, θ> = <u, F θ>"),
    ("pairing-lemma", "(φ * ψ)({0}) = ((-id)^* φ · ψ)_n"),
    ("rumin-kernel", "D(α ∧ ξ) = 0 and D(dη) = 0"),
];

#[derive(Clone, Copy, Debug)]
pub(crate) enum Tol {
    /// Exact spectral identity.
    Spectral(f64),
    /// Limited by quadrature or sampling.
    Quadrature(f64),
}

/// Accumulates checks for one suite run.
pub(crate) struct Ctx<'a> {
    pub cfg: &'a Config,
    pub rng: ChaCha8Rng,
    checks: Vec<Check>,
    grids: BTreeMap<String, usize>,
}

impl<'a> Ctx<'a> {
    fn new(cfg: &'a Config, suite: &str) -> Self {
        let salt = suite.bytes().fold(0xcbf29ce484222325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100000001b3));
        Ctx { cfg, rng: ChaCha8Rng::seed_from_u64(cfg.seed ^ salt), checks: Vec::new(), grids: BTreeMap::new() }
    }

    /// Dimensions from `default` allowed by `--n`.
    pub fn dims(&self, default: &[usize]) -> Vec<usize> {
        default.iter().copied().filter(|d| self.cfg.n.is_none_or(|n| n == *d)).collect()
    }

    pub fn wants(&self, n: usize) -> bool {
        self.cfg.n.is_none_or(|m| m == n)
    }

    pub fn grid(&mut self, name: &str, value: usize) {
        self.grids.insert(name.to_string(), value);
    }

    pub fn tolerance(&self, tol: Tol) -> f64 {
        match tol {
            Tol::Spectral(t) => self.cfg.tol_spectral.unwrap_or(t),
            Tol::Quadrature(t) => self.cfg.tol_quadrature.unwrap_or(t),
        }
    }

    /// Records a measured error; a computation error becomes a failing check.
    pub fn record(&mut self, id: String, anchor: &str, criterion: Option<u8>, tol: Tol, measured: valfour::Result<f64>) {
        let tolerance = self.tolerance(tol);
        let (error, note) = match measured {
            Ok(e) if e.is_finite() => (e, None),
            Ok(e) => (e, Some("non-finite error".to_string())),
            Err(e) => (f64::INFINITY, Some(e.to_string())),
        };
        self.checks.push(Check { id, anchor: anchor.to_string(), criterion, error, tolerance, pass: error <= tolerance, note });
    }

    fn finish(mut self, suite: &str) -> Report {
        self.checks.sort_by(|a, b| a.id.cmp(&b.id));
        let environment =
            Environment { n: self.cfg.n, band_limit: self.cfg.band_limit, seed: self.cfg.seed, grids: self.grids };
        Report { suite: suite.to_string(), checks: self.checks, environment }
    }
}

pub fn run_suite(name: &str, cfg: &Config) -> Result<Report> {
    cfg.validate()?;
    let mut ctx = Ctx::new(cfg, name);
    match name {
        "inversion" => inversion::run(&mut ctx),
        "intrinsic" => intrinsic::run(&mut ctx),
        "plane-example" => plane_example::run(&mut ctx),
        "even" => even::run(&mut ctx),
        "selfadjoint" => selfadjoint::run(&mut ctx),
        "functoriality" => functoriality::run(&mut ctx),
        "product-convolution" => product::run(&mut ctx),
        "signs" => signs::run(&mut ctx),
        "multipliers" => multipliers::run(&mut ctx),
        _ => return Err(CliError::UnknownSuite(name.to_string())),
    }
    Ok(ctx.finish(name))
}

/// `|a - b| / max(|b|, floor)`.
pub(crate) fn rel(a: valfour::C64, b: valfour::C64, floor: f64) -> f64 {
    (a - b).norm() / b.norm().max(floor)
}

/// Reuses a computed result, turning a shared error into a fresh one.
pub(crate) fn share<T: Clone>(r: &valfour::Result<T>) -> valfour::Result<T> {
    r.as_ref().cloned().map_err(|e| valfour::Error::Precondition(e.to_string()))
}
