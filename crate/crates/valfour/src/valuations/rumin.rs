//! Generating forms on `V × P₊(V*)`, the Rumin differential and the Poincaré pairing.
//!
//! A translation-invariant form is stored with its `dx` part in the value slot and its
//! `dy` part in the form slot, read `dx_J ∧ dy_I`. The contact form is `α = Σ u_i dx_i`.

use std::cell::Cell;
use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde_json::json;

use super::{
    euler_current, lambda_form, re, sgn, single, volume_current, GradedValuation, Provenance, ValCurrent, VAL_LABEL,
};
use crate::exterior::{MultiIndex, UnitTag};
use crate::homforms::{ext_derivative, interior_euler, HomForm, Key};
use crate::sphere::{multiply, multiply_coordinate, Mode, SpectralField};
use crate::signs;
use crate::{Error, Result, C64};

const SOLVE_TOL: f64 = 1e-10;

/// `(u·dy) ∧ ω` with `u = y/|y|`.
fn radial_wedge(w: &HomForm) -> Result<HomForm> {
    let n = w.dim();
    let mut out = HomForm::with_value_dim(n, w.value_dim(), &w.label, w.form_degree() + 1, w.value_degree(), 0, w.band_limit() + 1)?;
    out.unit = w.unit.clone();
    for ((i, j), g) in w.coeffs() {
        for pos in 0..n {
            if i.contains(pos) {
                continue;
            }
            let s = sgn(single(n, pos), *i);
            out.insert((i.with(pos), *j), multiply_coordinate(g, pos)?.scale(re(s)))?;
        }
    }
    Ok(out)
}

/// `ω - (u·dy) ∧ i_E ω`, which is annihilated by `i_E`.
fn tangential(w: &HomForm) -> Result<HomForm> {
    if w.form_degree() == 0 {
        return Ok(w.clone());
    }
    w.sub(&radial_wedge(&interior_euler(w)?)?)
}

/// `α ∧ ω`.
fn alpha_wedge(w: &HomForm) -> Result<HomForm> {
    let n = w.dim();
    let p = w.value_degree();
    if p >= n {
        return HomForm::new(n, &w.label, w.form_degree(), n, 0, 0);
    }
    let mut out = HomForm::new(n, &w.label, w.form_degree(), p + 1, 0, w.band_limit() + 1)?;
    out.unit = w.unit.clone();
    for ((i, j), g) in w.coeffs() {
        for l in 0..n {
            if j.contains(l) {
                continue;
            }
            let s = sgn(single(n, l), *j);
            out.insert((*i, j.with(l)), multiply_coordinate(g, l)?.scale(re(s)))?;
        }
    }
    Ok(out)
}

/// Total exterior derivative of a translation-invariant form.
fn d_total(w: &HomForm) -> Result<HomForm> {
    let s = if w.value_degree().is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(ext_derivative(w)?.scale(re(s)))
}

/// Translation-invariant form of bidegree `(k, n-1-k)` on `V × P₊(V*)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratingForm {
    n: usize,
    k: usize,
    form: HomForm,
}

impl GeneratingForm {
    /// Wrap a form that is already annihilated by `i_E` (relative `tol`).
    pub fn new(form: HomForm, tol: f64) -> Result<Self> {
        let n = form.dim();
        if form.value_dim() != n || form.form_degree() + form.value_degree() + 1 != n || form.homogeneity() != 0 {
            return Err(Error::Shape(format!(
                "generating form needs bidegree (k, n-1-k) on R^{n}, got ({}, {})",
                form.value_degree(),
                form.form_degree()
            )));
        }
        if form.form_degree() > 0 {
            let ie = interior_euler(&form)?.norm();
            if ie > tol * form.norm().max(1e-300) {
                return Err(Error::Precondition(format!("form is not tangential to the sphere: |i_E ω| = {ie:.3e}")));
            }
        }
        Ok(GeneratingForm { n, k: form.value_degree(), form })
    }

    /// Tangential projection of an arbitrary form of the right bidegree.
    pub fn tangential(form: &HomForm) -> Result<Self> {
        Self::new(tangential(form)?, 1e-10)
    }

    pub fn zero(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::Dimension(format!("bidegree ({k}, {}) on R^{n}", n as i64 - 1 - k as i64)));
        }
        Self::new(HomForm::new(n, VAL_LABEL, n - 1 - k, k, 0, 0)?, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bidegree(&self) -> (usize, usize) {
        (self.k, self.n - 1 - self.k)
    }

    pub fn form(&self) -> &HomForm {
        &self.form
    }

    pub fn norm(&self) -> f64 {
        self.form.norm()
    }

    pub fn scale(&self, c: C64) -> Self {
        GeneratingForm { n: self.n, k: self.k, form: self.form.scale(c) }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(GeneratingForm { n: self.n, k: self.k, form: self.form.add(&other.form)? })
    }

    /// `κ_k = (-1)^k i_E λ_k`, the integrand of `V_k`.
    pub fn kappa(n: usize, k: usize) -> Result<Self> {
        let s = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        Self::new(interior_euler(&lambda_form(n, k)?)?.scale(re(s)), 1e-12)
    }

    /// `n = 2`, `ω = f_1 dx_1 + f_2 dx_2` with `f(u) = h(-u_2, u_1)` read as `h = -f_1 u_2 + f_2 u_1`.
    pub fn from_plane_h(h: &SpectralField) -> Result<Self> {
        if h.dim() != 2 {
            return Err(Error::Dimension("plane generating forms take a field on S^1".into()));
        }
        let mut w = HomForm::new(2, VAL_LABEL, 0, 1, 0, h.band_limit() + 1)?;
        let e = MultiIndex::empty(2);
        w.insert((e, single(2, 0)), multiply_coordinate(h, 1)?.scale(re(-1.0)))?;
        w.insert((e, single(2, 1)), multiply_coordinate(h, 0)?)?;
        Self::new(w, 0.0)
    }

    /// `n = 2` generating form whose valuation has support density `g` (`h + h'' = g`).
    pub fn from_plane_density(g: &SpectralField) -> Result<Self> {
        if g.dim() != 2 {
            return Err(Error::Dimension("plane densities live on S^1".into()));
        }
        let first = g.circle(1).norm().max(g.circle(-1).norm());
        if first > 1e-10 * g.max_abs_coeff().max(1.0) {
            return Err(Error::Precondition("density has first-harmonic content".into()));
        }
        let h = g.map_modes(|md: Mode| if md.l == 1 { C64::default() } else { re(1.0 / (1.0 - (md.m * md.m) as f64)) });
        Self::from_plane_h(&h)
    }

    /// `d_total η` for `η` of bidegree `(k, n-2-k)`.
    pub fn exact(eta: &HomForm) -> Result<Self> {
        Self::new(d_total(&tangential(eta)?)?, 1e-9)
    }

    /// `α ∧ ξ` for `ξ` of bidegree `(k-1, n-1-k)`.
    pub fn alpha_wedge(xi: &HomForm) -> Result<Self> {
        Self::new(alpha_wedge(&tangential(xi)?)?, 1e-9)
    }

    pub fn random<R: Rng + ?Sized>(n: usize, k: usize, band: usize, rng: &mut R) -> Result<Self> {
        if k >= n {
            return Err(Error::Dimension(format!("bidegree ({k}, ·) on R^{n}")));
        }
        Self::tangential(&HomForm::random(n, n - 1 - k, k, band, rng)?)
    }
}

#[derive(Clone, Debug)]
pub struct RuminOutput {
    /// `Dω`, bidegree `(k, n-k)`.
    pub form: HomForm,
    /// Correction `ξ` with `Dω = d(ω + α ∧ ξ)`.
    pub correction: Option<HomForm>,
    /// Largest residual of the fiberwise solve.
    pub solve_residual: f64,
    /// `|α ∧ Dω| / |Dω|`.
    pub vertical_residual: f64,
}

/// Rumin differential `Dω = d(ω + α ∧ ξ)` with `ξ` fixed by `α ∧ dα ∧ ξ = -α ∧ dω` and `i_u ξ = 0`.
#[allow(non_snake_case)]
pub fn rumin_D(omega: &GeneratingForm) -> Result<RuminOutput> {
    let (n, k) = (omega.n, omega.k);
    let w = &omega.form;
    let p = d_total(w)?;
    let scale = p.norm().max(w.norm()).max(1e-300);
    if k == 0 {
        let vr = alpha_wedge(&p)?.norm() / scale;
        return Ok(RuminOutput { form: p, correction: None, solve_residual: 0.0, vertical_residual: vr });
    }
    let qx = n - 1 - k;
    let xi_keys: Vec<Key> = MultiIndex::all_of_size(n, qx)
        .into_iter()
        .flat_map(|i| MultiIndex::all_of_size(n, k - 1).into_iter().map(move |j| (i, j)))
        .collect();
    let mut rows: BTreeMap<Key, usize> = BTreeMap::new();
    for m in MultiIndex::all_of_size(n, n - k) {
        for l in MultiIndex::all_of_size(n, k + 1) {
            let r = rows.len();
            rows.insert((m, l), r);
        }
    }
    if qx > 0 {
        for i in MultiIndex::all_of_size(n, qx - 1) {
            for j in MultiIndex::all_of_size(n, k - 1) {
                let r = rows.len();
                rows.insert((i, j), r);
            }
        }
    }
    let n_eq = MultiIndex::all_of_size(n, n - k).len() * MultiIndex::all_of_size(n, k + 1).len();
    let cons_row = |key: Key| rows[&key];
    let band_xi = (w.band_limit() + 3).min(crate::sphere::max_band(n));
    let lq = band_xi + 4;
    let sign_k = if k % 2 == 0 { 1.0 } else { -1.0 };
    let worst = Cell::new(0.0f64);
    let singular = Cell::new(false);
    let xi = HomForm::from_pointwise(n, n, &w.label, qx, k - 1, 0, band_xi, lq, |u| {
        let mut a = DMatrix::<f64>::zeros(rows.len(), xi_keys.len());
        let mut b_re = DVector::<f64>::zeros(rows.len());
        let mut b_im = DVector::<f64>::zeros(rows.len());
        for (c, (ii, jj)) in xi_keys.iter().enumerate() {
            for t in 0..n {
                if jj.contains(t) || ii.contains(t) {
                    continue;
                }
                let s1 = sign_k * sgn(single(n, t), *jj) * sgn(single(n, t), *ii);
                let (j1, i1) = (jj.with(t), ii.with(t));
                for l in 0..n {
                    if j1.contains(l) {
                        continue;
                    }
                    a[(rows[&(i1, j1.with(l))], c)] += s1 * u[l] * sgn(single(n, l), j1);
                }
            }
            for (idx, pos) in ii.positions().into_iter().enumerate() {
                let s = if idx % 2 == 0 { 1.0 } else { -1.0 };
                a[(cons_row((ii.without(pos), *jj)), c)] += s * u[pos];
            }
        }
        for ((m, l), val) in p.eval_at(u) {
            for t in 0..n {
                if l.contains(t) {
                    continue;
                }
                let r = rows[&(m, l.with(t))];
                let z = val * (u[t] * sgn(single(n, t), l));
                b_re[r] -= z.re;
                b_im[r] -= z.im;
            }
        }
        let svd = a.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let smin_eq = svd.singular_values.iter().filter(|s| **s > 1e-8 * smax).count();
        if smin_eq == 0 {
            singular.set(true);
        }
        let x_re = svd.solve(&b_re, 1e-10 * smax).unwrap_or_else(|_| DVector::zeros(xi_keys.len()));
        let x_im = svd.solve(&b_im, 1e-10 * smax).unwrap_or_else(|_| DVector::zeros(xi_keys.len()));
        let r_re = &a * &x_re - &b_re;
        let r_im = &a * &x_im - &b_im;
        let res = r_re.rows(0, n_eq).norm().hypot(r_im.rows(0, n_eq).norm());
        worst.set(worst.get().max(res));
        xi_keys.iter().enumerate().map(|(c, key)| (*key, C64::new(x_re[c], x_im[c]))).collect()
    })?;
    if singular.get() {
        return Err(Error::Singular("fiberwise Rumin system has no nonzero singular values".into()));
    }
    let corr = alpha_wedge(&xi)?;
    let form = p.add(&d_total(&corr)?)?;
    let vertical_residual = alpha_wedge(&form)?.norm() / scale;
    Ok(RuminOutput { form, correction: Some(xi), solve_residual: worst.get() / scale, vertical_residual })
}

/// `τ(φ) = φ({0})δ_0 + r⁰((-1)^{n-k} a^*Dω + θ)` as a graded valuation.
pub fn current_from_generating(omega: &GeneratingForm, theta: C64, c0: C64) -> Result<GradedValuation> {
    let n = omega.n;
    let mut out = GradedValuation::new(n);
    if omega.norm() > 0.0 {
        let d = rumin_D(omega)?;
        if d.solve_residual > SOLVE_TOL || d.vertical_residual > 1e-8 {
            return Err(Error::Precondition(format!(
                "Rumin correction residuals {:.3e} / {:.3e} exceed tolerance",
                d.solve_residual, d.vertical_residual
            )));
        }
        let mut t = d.form.map_fields(|_, g| g.antipodal());
        t.label = VAL_LABEL.to_string();
        t.unit = UnitTag::or(VAL_LABEL);
        out.push(ValCurrent::new(t, Provenance::new("generating", json!({ "n": n, "k": omega.k })))?)?;
    }
    if theta != C64::default() {
        out.push(volume_current(n)?.scale(theta))?;
    }
    if c0 != C64::default() {
        out.push(euler_current(n)?.scale(c0))?;
    }
    Ok(out)
}

/// `⟨φ, ψ⟩ = (-1)^{n-k} ∫_S ψ ∧ τ(φ)`, values wedged into `∧^n`.
pub fn poincare_pair(phi: &ValCurrent, psi: &GeneratingForm) -> Result<C64> {
    let (n, k) = (phi.dim(), phi.degree());
    if psi.n != n || k == 0 || psi.k + k != n {
        return Err(Error::Precondition(format!(
            "pairing needs bidegree (n-k, k-1) against degree k (n = {n}, k = {k}, ψ bidegree {:?})",
            psi.bidegree()
        )));
    }
    let tau = phi.current();
    let mut acc = C64::default();
    for ((i1, j1), g1) in psi.form.coeffs() {
        for ((i2, j2), g2) in tau.coeffs() {
            let sv = sgn(*j1, *j2);
            let sf = sgn(*i1, *i2);
            if sv == 0.0 || sf == 0.0 {
                continue;
            }
            let i = MultiIndex::from_bits(n, i1.bits() | i2.bits());
            let pos = i.complement().positions()[0];
            let sj = sgn(single(n, pos), i);
            let prod = multiply_coordinate(&multiply(g1, g2)?, pos)?;
            acc += prod.integral() * (sv * sf * sj);
        }
    }
    Ok(acc * signs::generating_current(n, k))
}
