//! File-level operations of the binary.

use std::path::Path;

use valfour::fourier::MultiplierTable;
use valfour::homforms::{gl_pullback, LinMap};
use valfour::valuations::{fourier_val, ValCurrent};

use crate::{CliError, Result};

pub const ROUND_TRIP_TOL: f64 = 1e-8;
pub const VALUATION_TYPE_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct TransformOutcome {
    pub output: ValCurrent,
    /// `‖F F φ - (-id)^* φ‖ / ‖φ‖`.
    pub round_trip: f64,
}

pub fn read_current(path: &Path) -> Result<ValCurrent> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn transform_current(phi: &ValCurrent) -> Result<TransformOutcome> {
    let report = phi.valuation_type(VALUATION_TYPE_TOL)?;
    if !report.pass {
        return Err(CliError::Check(format!(
            "input is not of valuation type (i_E: {:.3e}, vertical: {:.3e}, d: {:.3e}, scale {:.3e})",
            report.ie_norm, report.vertical_norm, report.closed_norm, report.scale
        )));
    }
    let output = fourier_val(phi)?;
    let twice = fourier_val(&output)?;
    let want = gl_pullback(&LinMap::scalar(phi.dim(), -1.0), phi.current())?;
    Ok(TransformOutcome { round_trip: twice.current().rel_distance(&want), output })
}

pub fn transform_file(input: &Path, output: &Path) -> Result<TransformOutcome> {
    let phi = read_current(input)?;
    let out = transform_current(&phi)?;
    std::fs::write(output, serde_json::to_string_pretty(&out.output)?)?;
    Ok(out)
}

/// Multipliers for `n = 1, 2, 3` up to band `band`, columns `n, lambda, m, re, im`.
pub fn dump_multipliers(path: &Path, band: usize) -> Result<usize> {
    let mut w = csv::Writer::from_path(path)?;
    let mut rows = 0;
    for n in 1..=3 {
        let table = MultiplierTable::new(n, band.min(valfour::sphere::max_band(n)))?;
        for row in table.rows() {
            w.serialize(row)?;
            rows += 1;
        }
    }
    w.flush()?;
    Ok(rows)
}
