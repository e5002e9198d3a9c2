//! Alesker–Fourier transform of translation-invariant valuations, computed on
//! 0-homogeneous currents stored as harmonic coefficient fields on the sphere.
//!
//! Layers, bottom up:
//! - [`exterior`]: exact exterior algebra with coordinate blades and unit tags.
//! - [`sphere`]: band-limited fields on `S^{n-1}` for `n = 1, 2, 3`.
//! - [`homforms`]: homogeneous forms with exterior-power values, their calculus,
//!   pullbacks and pushforwards.
//! - [`fourier`]: harmonic multipliers, the transform of forms and its twisted variant.
//! - [`valuations`]: currents of valuations, their transform and the functorial operations.
//! - [`signs`]: the table of sign identities used across the crate.

pub mod exterior;
pub mod fourier;
pub mod homforms;
pub mod signs;
pub mod sphere;
pub mod valuations;

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar accepted by the generic exterior kernel.
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Display + Send + Sync + 'static {}

impl Real for f32 {}
impl Real for f64 {}

pub type C64 = num_complex::Complex<f64>;
pub type Covector = exterior::GradedCovector<f64>;
pub type Covector32 = exterior::GradedCovector<f32>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("band limit {requested} exceeds the supported maximum {max}")]
    BandOverflow { requested: usize, max: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("singular map: {0}")]
    Singular(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) const fn c(re: f64, im: f64) -> C64 {
    C64 { re, im }
}

pub(crate) const ZERO: C64 = c(0.0, 0.0);
pub(crate) const ONE: C64 = c(1.0, 0.0);
pub(crate) const I: C64 = c(0.0, 1.0);
