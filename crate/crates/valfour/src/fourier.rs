//! Fourier transform of 0-homogeneous forms by harmonic multipliers.
//!
//! Kernel `e^{2πi⟨y,ξ⟩}`. For a harmonic `Y_m` of degree `m` and `0 < λ < n`,
//! `F(|y|^{-λ} Y_m(y/|y|)) = B(n,λ,m) |ξ|^{λ-n} Y_m(ξ/|ξ|)` with
//! `B(n,λ,m) = i^m π^{λ-n/2} Γ((n-λ+m)/2) / Γ((λ+m)/2)`.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::exterior::{shuffle_sign, UnitTag};
use crate::homforms::{dual_label, HomForm};
use crate::sphere::{self, SpectralField};
use crate::{Error, Result, C64, I, ZERO};

fn i_pow(m: usize) -> C64 {
    match m % 4 {
        0 => C64::new(1.0, 0.0),
        1 => I,
        2 => C64::new(-1.0, 0.0),
        _ => -I,
    }
}

/// Closed-form multiplier; errors at the poles `λ ∈ {0, n}` with `m = 0`.
pub fn bochner_multiplier(n: usize, lambda: f64, m: usize) -> Result<C64> {
    let nf = n as f64;
    let a = (nf - lambda + m as f64) / 2.0;
    let b = (lambda + m as f64) / 2.0;
    if !(0.0..=nf).contains(&lambda) || a <= 0.0 || b <= 0.0 {
        return Err(Error::Precondition(format!("no multiplier at n = {n}, λ = {lambda}, m = {m}")));
    }
    let mag = ((lambda - nf / 2.0) * PI.ln() + ln_gamma(a) - ln_gamma(b)).exp();
    Ok(i_pow(m) * mag)
}

#[derive(Clone, Debug, Serialize)]
pub struct MultiplierRow {
    pub n: usize,
    pub lambda: f64,
    pub m: usize,
    pub re: f64,
    pub im: f64,
}

/// Multipliers `B(n, λ, m)` for integer `λ = 0..=n` and `m ≤ L`.
#[derive(Clone, Debug)]
pub struct MultiplierTable {
    pub n: usize,
    pub band: usize,
    entries: BTreeMap<(usize, usize), C64>,
}

impl MultiplierTable {
    pub fn new(n: usize, band: usize) -> Result<Self> {
        if band > sphere::max_band(n) {
            return Err(Error::BandOverflow { requested: band, max: sphere::max_band(n) });
        }
        let band = if n == 1 { 1 } else { band };
        let mut entries = BTreeMap::new();
        for lambda in 0..=n {
            for m in 0..=band {
                if let Ok(b) = bochner_multiplier(n, lambda as f64, m) {
                    entries.insert((lambda, m), b);
                }
            }
        }
        Ok(MultiplierTable { n, band, entries })
    }

    /// Shared table covering at least band `band`.
    pub fn shared(n: usize, band: usize) -> Result<Arc<Self>> {
        type Cache = Mutex<HashMap<usize, Arc<MultiplierTable>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(t) = cache.lock().unwrap().get(&n) {
            if t.band >= band || n == 1 {
                return Ok(t.clone());
            }
        }
        let t = Arc::new(Self::new(n, band.max(64).min(sphere::max_band(n)))?);
        cache.lock().unwrap().insert(n, t.clone());
        Ok(t)
    }

    pub fn get(&self, lambda: usize, m: usize) -> Result<C64> {
        self.entries
            .get(&(lambda, m))
            .copied()
            .ok_or_else(|| Error::Precondition(format!("no multiplier at n = {}, λ = {lambda}, m = {m}", self.n)))
    }

    pub fn rows(&self) -> Vec<MultiplierRow> {
        self.entries
            .iter()
            .map(|(&(lambda, m), b)| MultiplierRow { n: self.n, lambda: lambda as f64, m, re: b.re, im: b.im })
            .collect()
    }
}

/// Independent quadrature evaluation of the multipliers.
pub mod oracle {
    use super::*;
    use crate::sphere::gauss_legendre;

    fn legendre_p(l: usize, t: f64) -> f64 {
        let (mut p0, mut p1) = (1.0, t);
        if l == 0 {
            return 1.0;
        }
        for k in 2..=l {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        p1
    }

    /// `F(|y|^{-λ} Y e^{-πε|y|²})` at a unit point, divided by `Y` there.
    /// `Y = e^{imθ}` for `n = 2`, `Y = P_m(cos θ)` for `n = 3`.
    pub fn regularized(n: usize, lambda: f64, m: usize, eps: f64) -> Result<C64> {
        if n != 2 && n != 3 {
            return Err(Error::Unsupported(format!("oracle for n = {n}")));
        }
        let r_max = (42.0 / (PI * eps)).sqrt();
        let panels = r_max.ceil() as usize;
        let (px, pw) = gauss_legendre(24);
        let inner_n = match n {
            2 => (2.0 * PI * r_max).ceil() as usize + m + 48,
            _ => (PI * r_max).ceil() as usize + m + 48,
        };
        let (tx, tw) = gauss_legendre(inner_n);
        let pl: Vec<f64> = tx.iter().map(|&t| legendre_p(m, t)).collect();
        let mut acc = ZERO;
        for panel in 0..panels {
            for (x, w) in px.iter().zip(&pw) {
                let rho = panel as f64 + (x + 1.0) / 2.0;
                let radial = w / 2.0 * rho.powf(n as f64 - 1.0 - lambda) * (-PI * eps * rho * rho).exp();
                let inner: C64 = match n {
                    2 => (0..inner_n)
                        .map(|k| {
                            let th = 2.0 * PI * k as f64 / inner_n as f64;
                            C64::from_polar(1.0, m as f64 * th + 2.0 * PI * rho * th.cos())
                        })
                        .sum::<C64>()
                        * (2.0 * PI / inner_n as f64),
                    _ => {
                        tx.iter()
                            .zip(&tw)
                            .zip(&pl)
                            .map(|((t, w), p)| C64::from_polar(w * p, 2.0 * PI * rho * t))
                            .sum::<C64>()
                            * (2.0 * PI)
                    }
                };
                acc += inner * radial;
            }
        }
        Ok(acc)
    }

    /// Polynomial extrapolation of [`regularized`] to `ε = 0` from `ε = ε_0·j`, `j = 1..=k`.
    pub fn multiplier_by_quadrature(n: usize, lambda: f64, m: usize) -> Result<C64> {
        let eps0 = 0.003;
        let k = 8;
        let xs: Vec<f64> = (1..=k).map(|j| eps0 * j as f64).collect();
        let mut ys: Vec<C64> = xs.iter().map(|&e| regularized(n, lambda, m, e)).collect::<Result<_>>()?;
        for level in 1..k {
            for i in 0..k - level {
                let (a, b) = (xs[i], xs[i + level]);
                ys[i] = (ys[i] * b - ys[i + 1] * a) / (b - a);
            }
        }
        Ok(ys[0])
    }
}

/// Transform of one coefficient `|y|^{-q} g(y/|y|)` of a `q`-form on `R^n`.
/// Returns the transformed field and the origin atom produced by a constant 0-form.
pub fn fourier_scalar(n: usize, q: usize, g: &SpectralField) -> Result<(SpectralField, Option<C64>)> {
    let table = MultiplierTable::shared(n, g.band_limit())?;
    let scale = g.l2_norm().max(1e-300);
    let mut h = g.clone();
    let mut atom = None;
    for k in 0..h.coeffs().len() {
        let deg = h.mode_of(k).l;
        let c = h.coeffs()[k];
        let b = if (q == 0 || q == n) && deg == 0 {
            if q == 0 {
                atom = Some(c / const_coeff(n));
            } else if c.norm() > 1e-12 * scale {
                return Err(Error::Precondition(
                    "top-degree part with nonzero mean is not a tempered 0-homogeneous form".into(),
                ));
            }
            ZERO
        } else {
            table.get(q, deg)?
        };
        h.coeffs_mut()[k] = c * b;
    }
    Ok((h, atom))
}

/// Fourier transform of a 0-homogeneous form:
/// `F(Σ f_I dy_I) = Σ f̂_I sgn(I, I^c) dξ_{I^c}`, coefficients multiplied by `B(n, q, m)`.
/// Constants go to origin atoms and atoms to constants.
pub fn fourier_form(w: &HomForm) -> Result<HomForm> {
    if w.homogeneity() != 0 {
        return Err(Error::Unsupported(format!("Fourier transform of {}-homogeneous data", w.homogeneity())));
    }
    let n = w.dim();
    let q = w.form_degree();
    let mut out =
        HomForm::with_value_dim(n, w.value_dim(), &dual_label(&w.label), n - q, w.value_degree(), 0, w.band_limit())?;
    out.unit = w.unit.compose(&UnitTag::or(&w.label));
    for ((i, j), g) in w.coeffs() {
        let s = C64::new(shuffle_sign(*i, i.complement()) as f64, 0.0);
        let (h, atom) = fourier_scalar(n, q, g)?;
        if let Some(a) = atom {
            out.add_atom(*j, a * s)?;
        }
        out.insert((i.complement(), *j), h.scale(s))?;
    }
    for (j, a) in w.atoms() {
        let c = SpectralField::constant(n, *a)?.with_band(out.band_limit())?;
        out.insert((crate::exterior::MultiIndex::empty(n), *j), c)?;
    }
    Ok(out)
}

pub(crate) fn const_coeff(n: usize) -> f64 {
    SpectralField::constant(n, C64::new(1.0, 0.0)).map(|f| f.coeffs()[0].re).unwrap_or(1.0)
}

/// `F⁰`: [`fourier_form`] followed by the Hodge star on the value slot.
pub fn fourier0(tau: &HomForm) -> Result<HomForm> {
    if tau.value_dim() != tau.dim() || tau.form_degree() + tau.value_degree() != tau.dim() {
        return Err(Error::Shape(format!(
            "F⁰ needs a current of shape Ω^(n-k)(∧^k) (n = {}, q = {}, p = {})",
            tau.dim(),
            tau.form_degree(),
            tau.value_degree()
        )));
    }
    let f = fourier_form(tau)?;
    let mut out = f.star_values()?;
    out.unit = f.unit.hodge_rewrite(&f.label);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;

    #[test]
    fn anchors() {
        assert!((bochner_multiplier(2, 1.0, 0).unwrap() - c(1.0, 0.0)).norm() < 1e-14);
        assert!((bochner_multiplier(3, 2.0, 0).unwrap() - c(PI, 0.0)).norm() < 1e-13);
        assert!((bochner_multiplier(3, 1.0, 0).unwrap() - c(1.0 / PI, 0.0)).norm() < 1e-14);
        assert!((bochner_multiplier(1, 0.0, 1).unwrap() - c(0.0, 1.0 / PI)).norm() < 1e-14);
        assert!(bochner_multiplier(2, 0.0, 0).is_err());
        assert!(bochner_multiplier(2, 2.0, 0).is_err());
    }

    #[test]
    fn delta_and_constant() {
        let d = HomForm::atom_form(2, 0, c(1.0, 0.0)).unwrap();
        let f = fourier_form(&d).unwrap();
        let g = f.coeff_by(&[], &[]).unwrap();
        assert!((g.eval_at(&[0.6, 0.8]) - c(1.0, 0.0)).norm() < 1e-14);
        let back = fourier_form(&f).unwrap();
        assert!((back.atom().unwrap() - c(1.0, 0.0)).norm() < 1e-14);
    }
}
