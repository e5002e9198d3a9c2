//! Crofton measures on `Gr_1` and `Gr_{n-1}` and their currents.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{legendre_at_zero, re, sgn, single, support_density_current, Provenance, ValCurrent, VAL_LABEL};
use crate::exterior::UnitTag;
use crate::homforms::{complement_basis, HomForm};
use crate::sphere::{self, multiply_coordinate, Mode, Parity, SpectralField};
use crate::{Error, Result, C64};

/// Subspace `E` (orthonormal frame) with a weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CroftonAtom {
    pub frame: Vec<Vec<f64>>,
    pub weight: f64,
}

impl CroftonAtom {
    /// The line through `dir`.
    pub fn line(dir: &[f64], weight: f64) -> Result<Self> {
        Ok(CroftonAtom { frame: vec![unit(dir)?], weight })
    }

    /// The hyperplane orthogonal to `normal`.
    pub fn hyperplane(normal: &[f64], weight: f64) -> Result<Self> {
        let v = unit(normal)?;
        Ok(CroftonAtom { frame: complement_basis(v.len(), &[v]), weight })
    }

    fn normal_frame(&self, n: usize) -> Vec<Vec<f64>> {
        complement_basis(n, &self.frame)
    }
}

fn unit(v: &[f64]) -> Result<Vec<f64>> {
    let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nrm < 1e-300 {
        return Err(Error::Singular("zero direction".into()));
    }
    Ok(v.iter().map(|x| x / nrm).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CroftonMeasure {
    Atoms { atoms: Vec<CroftonAtom> },
    /// `ρ dσ / vol(S^{n-1})`; `v` indexes `span(v)` for `k = 1` and `v^⊥` for `k = n - 1 ≥ 2`.
    Density { density: SpectralField },
}

/// `φ(K) = ∫_{Gr_k} vol(P_{E^⊥}K) dm(E)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CroftonData {
    pub n: usize,
    pub k: usize,
    pub measure: CroftonMeasure,
}

impl CroftonData {
    pub fn atoms(n: usize, k: usize, atoms: Vec<CroftonAtom>) -> Result<Self> {
        if k > n {
            return Err(Error::Dimension(format!("Gr_{k} of R^{n}")));
        }
        for a in &atoms {
            if a.frame.len() != k || a.frame.iter().any(|v| v.len() != n) {
                return Err(Error::Shape(format!("frame of {} vectors for a {k}-plane in R^{n}", a.frame.len())));
            }
            for (i, x) in a.frame.iter().enumerate() {
                for (j, y) in a.frame.iter().enumerate() {
                    let d: f64 = x.iter().zip(y).map(|(p, q)| p * q).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    if (d - want).abs() > 1e-9 {
                        return Err(Error::Precondition("Crofton frames must be orthonormal".into()));
                    }
                }
            }
        }
        Ok(CroftonData { n, k, measure: CroftonMeasure::Atoms { atoms } })
    }

    pub fn density(n: usize, k: usize, rho: SpectralField) -> Result<Self> {
        if !(2..=3).contains(&n) || rho.dim() != n {
            return Err(Error::Unsupported(format!("Crofton densities for n = {n}")));
        }
        if k != 1 && k != n - 1 {
            return Err(Error::Precondition(format!("Crofton densities live on Gr_1 or Gr_(n-1), got k = {k}")));
        }
        let odd = rho.parity_part(Parity::Odd).l2_norm();
        if odd > 1e-10 * rho.l2_norm().max(1e-300) {
            return Err(Error::Precondition(format!("Crofton density must be even (odd part {odd:.3e})")));
        }
        let mut rho = rho;
        rho.parity = Some(Parity::Even);
        Ok(CroftonData { n, k, measure: CroftonMeasure::Density { density: rho } })
    }

    pub fn degree(&self) -> usize {
        self.n - self.k
    }

    /// Same measure pushed forward by `E ↦ E^⊥`.
    pub fn perp(&self) -> Result<Self> {
        match &self.measure {
            CroftonMeasure::Atoms { atoms } => {
                let atoms = atoms.iter().map(|a| CroftonAtom { frame: a.normal_frame(self.n), weight: a.weight }).collect();
                Self::atoms(self.n, self.n - self.k, atoms)
            }
            CroftonMeasure::Density { density } => {
                let rho = if self.n == 2 {
                    density.map_modes(|md| C64::from_polar(1.0, -(md.m as f64) * PI / 2.0))
                } else {
                    density.clone()
                };
                Self::density(self.n, self.n - self.k, rho)
            }
        }
    }

    /// Heat-kernel smoothing of atomic data into a density of band `band`.
    pub fn mollified(&self, eps: f64, band: usize) -> Result<Self> {
        let CroftonMeasure::Atoms { atoms } = &self.measure else {
            let CroftonMeasure::Density { density } = &self.measure else { unreachable!() };
            return Self::density(self.n, self.k, density.with_band(band)?.mollify(eps));
        };
        let n = self.n;
        if self.k != 1 && self.k + 1 != n {
            return Err(Error::Unsupported(format!("mollifying atoms on Gr_{} of R^{n}", self.k)));
        }
        let area = sphere::sphere_area(n);
        let mut rho = SpectralField::zeros(n, band)?;
        for a in atoms {
            let v = if self.k == 1 { a.frame[0].clone() } else { a.normal_frame(n)[0].clone() };
            let minus: Vec<f64> = v.iter().map(|x| -x).collect();
            let w = re(a.weight * area / 2.0);
            rho = rho.axpy(w, &point_mass_field(n, &v, eps, band)?)?;
            rho = rho.axpy(w, &point_mass_field(n, &minus, eps, band)?)?;
        }
        Self::density(n, self.k, rho)
    }
}

/// Heat-kernel smoothed point mass `e^{εΔ}δ_v` at band `band`.
pub fn point_mass_field(n: usize, v: &[f64], eps: f64, band: usize) -> Result<SpectralField> {
    let v = unit(v)?;
    match n {
        2 => {
            let th = v[1].atan2(v[0]);
            let mut f = SpectralField::zeros(2, band)?;
            for m in -(band as i64)..=band as i64 {
                let z = C64::from_polar((-eps * (m * m) as f64).exp() / (2.0 * PI), -(m as f64) * th);
                f.set(Mode { l: m.unsigned_abs() as usize, m }, z);
            }
            Ok(f)
        }
        3 => {
            let weights: Vec<f64> =
                (0..=band).map(|l| (2 * l + 1) as f64 / (4.0 * PI) * (-eps * (l * (l + 1)) as f64).exp()).collect();
            SpectralField::from_fn(3, band, |u| {
                let t = (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]).clamp(-1.0, 1.0);
                let (mut p0, mut p1) = (1.0, t);
                let mut acc = weights[0];
                if band >= 1 {
                    acc += weights[1] * t;
                }
                for l in 2..=band {
                    let lf = l as f64;
                    let p2 = ((2.0 * lf - 1.0) * t * p1 - (lf - 1.0) * p0) / lf;
                    acc += weights[l] * p2;
                    p0 = p1;
                    p1 = p2;
                }
                re(acc)
            })
        }
        _ => Err(Error::Unsupported(format!("point masses on S^{}", n - 1))),
    }
}

/// Funk transform on `S^2`: great-circle averages times `2π`, multiplier `2π P_l(0)`.
pub fn funk(f: &SpectralField) -> Result<SpectralField> {
    if f.dim() != 3 {
        return Err(Error::Dimension("the Funk transform acts on S^2".into()));
    }
    Ok(f.map_modes(|md| re(2.0 * PI * legendre_at_zero(md.l))))
}

/// Current of a smooth Crofton density.
pub fn crofton_current(data: &CroftonData) -> Result<ValCurrent> {
    let CroftonMeasure::Density { density: rho } = &data.measure else {
        return Err(Error::Unsupported(
            "atomic Crofton data has no spectral current; use klain_fourier_atoms or mollify first".into(),
        ));
    };
    let (n, k) = (data.n, data.k);
    let mut v = match (n, k) {
        (2, 1) => {
            let g = rho.map_modes(|md| C64::from_polar(1.0 / PI, -(md.m as f64) * PI / 2.0));
            support_density_current(&g)?
        }
        (3, 2) => support_density_current(&rho.scale(re(1.0 / (2.0 * PI))))?,
        (3, 1) => {
            let mut t = HomForm::new(3, VAL_LABEL, 1, 2, 0, rho.band_limit() + 2)?;
            for j in 0..3 {
                let rj = multiply_coordinate(rho, j)?;
                for i in 0..3 {
                    let ei = single(3, i);
                    let s = sgn(ei, ei.complement()) / (4.0 * PI);
                    let c = funk(&multiply_coordinate(&rj, i)?)?.scale(re(s));
                    t.insert((single(3, j), ei.complement()), c)?;
                }
            }
            t.unit = UnitTag::or(VAL_LABEL);
            ValCurrent::new(t, Provenance::new("crofton", json!({})))?
        }
        _ => return Err(Error::Unsupported(format!("Crofton currents for (n, k) = ({n}, {k})"))),
    };
    v.provenance = Provenance::new(
        "crofton",
        json!({ "n": n, "k": k, "band": rho.band_limit(), "normalization": "rotation-invariant probability measure" }),
    );
    Ok(v)
}

/// `F` on atomic Crofton data: every subspace replaced by its orthogonal complement.
pub fn klain_fourier_atoms(data: &CroftonData) -> Result<CroftonData> {
    match data.measure {
        CroftonMeasure::Atoms { .. } => data.perp(),
        CroftonMeasure::Density { .. } => Err(Error::Precondition("klain_fourier_atoms takes atomic data".into())),
    }
}
