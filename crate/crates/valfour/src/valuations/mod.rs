//! Translation-invariant valuations through their 0-homogeneous currents.
//!
//! A degree-`k` valuation on `R^n` is stored as an `(n-k)`-form on the dual space with
//! values in `∧^k`, oriented by the base space. The transform is [`fourier0`] on that current.

mod crofton;
mod functorial;
mod polytope;
mod product;
mod rumin;

pub use crofton::{crofton_current, funk, klain_fourier_atoms, point_mass_field, CroftonAtom, CroftonData, CroftonMeasure};
pub use functorial::{gl_action, pullback_val, pushforward_val};
pub use polytope::{eval_on_body, eval_on_body_with, CroftonMethod, EvalOptions, Polytope, Representation};
pub use product::{
    convolution_bottom, convolution_bottom_with, exterior_product_val, fourier0_tensor, product_top, product_top_with, tensor_forms, ConvolutionReport, Factor,
    PlaneQuadrature, TensorCurrent, TensorTerm,
};
pub use rumin::{current_from_generating, poincare_pair, rumin_D, GeneratingForm, RuminOutput};

use std::collections::BTreeMap;

use serde::de::Error as _;
use serde::ser::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::exterior::{shuffle_sign, MultiIndex, UnitTag};
use crate::fourier::fourier0;
use crate::homforms::{ext_derivative, interior_euler, is_valuation_type, HomForm, ValTypeReport};
use crate::sphere::{self, multiply_coordinate, Mode, Parity, SpectralField};
use crate::{Error, Result, C64, ONE};

/// Label of the space carrying valuation currents.
pub const VAL_LABEL: &str = "V*";

const RECOGNITION_TOL: f64 = 1e-8;

pub(crate) fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub(crate) fn sgn(a: MultiIndex, b: MultiIndex) -> f64 {
    shuffle_sign(a, b) as f64
}

pub(crate) fn single(n: usize, pos: usize) -> MultiIndex {
    MultiIndex::from_bits(n, 1 << pos)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParityTag {
    Even,
    Odd,
    Mixed,
}

impl ParityTag {
    fn of(t: &HomForm) -> Self {
        let mut even: f64 = t.atoms().values().map(|a| a.norm_sqr()).sum();
        let mut odd = 0.0;
        for g in t.coeffs().values() {
            even += g.parity_part(Parity::Even).l2_norm().powi(2);
            odd += g.parity_part(Parity::Odd).l2_norm().powi(2);
        }
        let tol = 1e-24 * (even + odd);
        if odd <= tol {
            ParityTag::Even
        } else if even <= tol {
            ParityTag::Odd
        } else {
            ParityTag::Mixed
        }
    }
}

/// Record of the constructor or operation that produced a current.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub op: String,
    #[serde(default)]
    pub params: Value,
}

impl Provenance {
    pub fn new(op: &str, params: Value) -> Self {
        Provenance { op: op.to_string(), params }
    }
}

/// The 0-homogeneous current of a degree-`k` valuation.
#[derive(Clone, Debug, PartialEq)]
pub struct ValCurrent {
    current: HomForm,
    degree: usize,
    parity: ParityTag,
    pub provenance: Provenance,
}

impl ValCurrent {
    pub fn new(current: HomForm, provenance: Provenance) -> Result<Self> {
        let n = current.dim();
        if current.value_dim() != n || current.form_degree() + current.value_degree() != n {
            return Err(Error::Shape(format!(
                "valuation current needs an (n-k)-form with values in ∧^k (n = {n}, q = {}, p = {}, value dim {})",
                current.form_degree(),
                current.value_degree(),
                current.value_dim()
            )));
        }
        if current.homogeneity() != 0 {
            return Err(Error::Precondition("valuation currents are 0-homogeneous".into()));
        }
        let mut current = current;
        if !current.unit.has_or(&current.label) {
            current.unit = current.unit.compose(&UnitTag::or(&current.label));
        }
        Ok(ValCurrent { degree: current.value_degree(), parity: ParityTag::of(&current), current, provenance })
    }

    pub fn zero(n: usize, k: usize) -> Result<Self> {
        if k > n {
            return Err(Error::Dimension(format!("degree {k} on R^{n}")));
        }
        Self::new(HomForm::new(n, VAL_LABEL, n - k, k, 0, 0)?, Provenance::new("zero", json!({ "n": n, "k": k })))
    }

    pub fn current(&self) -> &HomForm {
        &self.current
    }

    pub fn into_current(self) -> HomForm {
        self.current
    }

    pub fn dim(&self) -> usize {
        self.current.dim()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn parity(&self) -> ParityTag {
        self.parity
    }

    fn derived(&self, current: HomForm, op: &str) -> Result<Self> {
        Self::new(current, Provenance::new(op, json!({ "source": self.provenance.op })))
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = self.clone();
        out.current = self.current.scale(c);
        out.parity = ParityTag::of(&out.current);
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.derived(self.current.add(&other.current)?, "sum")
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.derived(self.current.sub(&other.current)?, "difference")
    }

    pub fn rel_distance(&self, other: &Self) -> f64 {
        self.current.rel_distance(&other.current)
    }

    /// Even or odd part; atoms are even.
    pub fn parity_part(&self, p: Parity) -> Result<Self> {
        let mut t = self.current.map_fields(|_, g| {
            let mut h = g.parity_part(p);
            h.parity = None;
            h
        });
        if p == Parity::Odd && t.form_degree() == t.dim() {
            t.set_atom(None)?;
        }
        self.derived(t, if p == Parity::Even { "even-part" } else { "odd-part" })
    }

    pub fn valuation_type(&self, tol: f64) -> Result<ValTypeReport> {
        is_valuation_type(&self.current, tol)
    }

    /// Largest asymmetry of `τ̄_{K,J} = sgn(K, K^c)·τ_{K^c,J}` over pairs of `k`-subsets.
    pub fn sym2_defect(&self) -> f64 {
        let (n, k) = (self.dim(), self.degree);
        let scale = self.current.norm();
        if scale == 0.0 {
            return 0.0;
        }
        let bar = |kk: MultiIndex, j: MultiIndex| -> Option<SpectralField> {
            let s = sgn(kk, kk.complement());
            self.current.coeff(&(kk.complement(), j)).map(|g| g.scale(re(s)))
        };
        let sets = MultiIndex::all_of_size(n, k);
        let mut worst = 0.0f64;
        for a in &sets {
            for b in &sets {
                let d = match (bar(*a, *b), bar(*b, *a)) {
                    (Some(x), Some(y)) => x.sub(&y).map(|z| z.l2_norm()).unwrap_or(f64::INFINITY),
                    (Some(x), None) | (None, Some(x)) => x.l2_norm(),
                    (None, None) => 0.0,
                };
                worst = worst.max(d);
            }
        }
        worst / scale
    }

    /// Support density `g` of a degree-1 current in `n = 2, 3`: `φ(K) = ∫ h_K g dσ`.
    pub fn support_density(&self) -> Result<SpectralField> {
        let n = self.dim();
        if self.degree != 1 || !(2..=3).contains(&n) {
            return Err(Error::Unsupported("support densities describe degree-1 valuations in n = 2, 3".into()));
        }
        let mut acc = SpectralField::zeros(n, self.current.band_limit())?;
        for i in 0..n {
            let e = single(n, i);
            if let Some(c) = self.current.coeff(&(e.complement(), e)) {
                acc = acc.axpy(re(sgn(e, e.complement())), c)?;
            }
        }
        Ok(acc.antipodal())
    }

    /// Recover a constructor record from the current and verify it by rebuilding.
    pub fn representation(&self) -> Result<Representation> {
        let (n, k) = (self.dim(), self.degree);
        let t = &self.current;
        let scale = t.norm();
        let fail = || Error::Unsupported(format!("no recognized representation for this degree-{k} current on R^{n}"));
        if scale == 0.0 {
            return Ok(Representation::Zero { n, k });
        }
        if k == 0 {
            let fields: f64 = t.coeffs().values().map(|g| g.l2_norm()).sum();
            if fields > RECOGNITION_TOL * scale {
                return Err(fail());
            }
            return Ok(Representation::Euler { n, c: t.atom().unwrap_or_default() });
        }
        if k == n {
            let g = t.coeff(&(MultiIndex::empty(n), MultiIndex::full(n))).ok_or_else(fail)?;
            let c = g.integral() / sphere::sphere_area(n);
            let rest = g.sub(&SpectralField::constant(n, c)?)?.l2_norm();
            if rest > RECOGNITION_TOL * scale || t.coeffs().len() != 1 {
                return Err(fail());
            }
            return Ok(Representation::Volume { n, c });
        }
        if k == 1 {
            let g = self.support_density()?;
            let rebuilt = support_density_current(&g)?;
            if rebuilt.current.rel_distance(t) <= RECOGNITION_TOL {
                return Ok(Representation::SupportDensity { density: g });
            }
            return Err(fail());
        }
        if n == 3 && k == 2 {
            let data = self.crofton_data()?;
            let CroftonMeasure::Density { density: rho } = &data.measure else {
                return Err(fail());
            };
            let c = rho.integral() / sphere::sphere_area(3);
            let rest = rho.sub(&SpectralField::constant(3, c)?)?.l2_norm();
            if rest <= RECOGNITION_TOL * rho.l2_norm() {
                return Ok(Representation::Intrinsic { n, k, c: c / 2.0 });
            }
            return Ok(Representation::Crofton { data });
        }
        Err(fail())
    }

    /// Crofton density on lines of a degree-2 current on `R^3`, verified by rebuilding.
    pub fn crofton_data(&self) -> Result<CroftonData> {
        let (n, k) = (self.dim(), self.degree);
        let t = &self.current;
        let fail = || Error::Unsupported(format!("no Crofton density for this degree-{k} current on R^{n}"));
        {
            let mut trace = SpectralField::zeros(3, t.band_limit())?;
            for i in 0..3 {
                let e = single(3, i);
                if let Some(c) = t.coeff(&(e, e.complement())) {
                    trace = trace.axpy(re(sgn(e, e.complement())), c)?;
                }
            }
            let rho = trace.map_modes(|md| {
                if md.l % 2 == 1 {
                    C64::default()
                } else {
                    re(2.0 / legendre_at_zero(md.l))
                }
            });
            let data = CroftonData::density(3, 1, rho)?;
            let rebuilt = crofton_current(&data)?;
            if rebuilt.current.rel_distance(t) <= RECOGNITION_TOL {
                return Ok(data);
            }
            Err(fail())
        }
    }

    /// Value on a polytope through the recognized representation.
    pub fn evaluate(&self, body: &Polytope) -> Result<C64> {
        eval_on_body(&self.representation()?, body)
    }
}

/// `P_l(0)`.
pub(crate) fn legendre_at_zero(l: usize) -> f64 {
    if l % 2 == 1 {
        return 0.0;
    }
    let mut p = 1.0;
    let mut j = 0;
    while j < l {
        p *= -((j + 1) as f64) / ((j + 2) as f64);
        j += 2;
    }
    p
}

impl Serialize for ValCurrent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut v = serde_json::to_value(&self.current).map_err(S::Error::custom)?;
        let obj = v.as_object_mut().ok_or_else(|| S::Error::custom("HomForm did not serialize to an object"))?;
        obj.insert("degree".into(), json!(self.degree));
        obj.insert("parity".into(), serde_json::to_value(self.parity).map_err(S::Error::custom)?);
        obj.insert("provenance".into(), serde_json::to_value(&self.provenance).map_err(S::Error::custom)?);
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ValCurrent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let mut v = Value::deserialize(d)?;
        let obj = v.as_object_mut().ok_or_else(|| D::Error::custom("expected an object"))?;
        let degree = obj.remove("degree").map(serde_json::from_value::<usize>).transpose().map_err(D::Error::custom)?;
        obj.remove("parity");
        let provenance = match obj.remove("provenance") {
            Some(p) => serde_json::from_value(p).map_err(D::Error::custom)?,
            None => Provenance::new("file", Value::Null),
        };
        let current: HomForm = serde_json::from_value(v).map_err(D::Error::custom)?;
        let out = ValCurrent::new(current, provenance).map_err(D::Error::custom)?;
        if let Some(k) = degree {
            if k != out.degree {
                return Err(D::Error::custom(format!("degree {k} does not match the current's value degree {}", out.degree)));
            }
        }
        Ok(out)
    }
}

/// Mixed-degree valuation as per-degree currents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradedValuation {
    pub n: usize,
    pub parts: BTreeMap<usize, ValCurrent>,
}

impl GradedValuation {
    pub fn new(n: usize) -> Self {
        GradedValuation { n, parts: BTreeMap::new() }
    }

    /// Add a homogeneous part, summing with an existing part of the same degree.
    pub fn push(&mut self, v: ValCurrent) -> Result<()> {
        if v.dim() != self.n {
            return Err(Error::Dimension(format!("degree part on R^{} for R^{}", v.dim(), self.n)));
        }
        let k = v.degree();
        let e = match self.parts.remove(&k) {
            Some(old) => old.add(&v)?,
            None => v,
        };
        self.parts.insert(k, e);
        Ok(())
    }

    pub fn part(&self, k: usize) -> Option<&ValCurrent> {
        self.parts.get(&k)
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.parts.keys().copied().collect()
    }

    pub fn fourier(&self) -> Result<Self> {
        let mut out = GradedValuation::new(self.n);
        for v in self.parts.values() {
            out.push(fourier_val(v)?)?;
        }
        Ok(out)
    }

    pub fn evaluate(&self, body: &Polytope) -> Result<C64> {
        self.parts.values().map(|v| v.evaluate(body)).sum()
    }
}

/// `τ(χ) = δ_0`.
pub fn euler_current(n: usize) -> Result<ValCurrent> {
    let mut t = HomForm::new(n, VAL_LABEL, n, 0, 0, 0)?;
    t.set_atom(Some(ONE))?;
    ValCurrent::new(t, Provenance::new("euler", json!({ "n": n })))
}

/// `τ(vol)`: the constant 1 with the density tag of the base space.
pub fn volume_current(n: usize) -> Result<ValCurrent> {
    let mut t = HomForm::new(n, VAL_LABEL, 0, n, 0, 0)?;
    t.insert((MultiIndex::empty(n), MultiIndex::full(n)), SpectralField::constant(n, ONE)?)?;
    t.unit = UnitTag::or(VAL_LABEL).compose(&UnitTag::dens("V", 1));
    ValCurrent::new(t, Provenance::new("volume", json!({ "n": n })))
}

/// `λ_k = vol(S^{n-k-1})^{-1} |y|^{-(n-k)} Σ_J sgn(J, J^c) dx_J ⊗ dy_{J^c}`.
pub fn lambda_form(n: usize, k: usize) -> Result<HomForm> {
    if k == 0 || k >= n {
        return Err(Error::Precondition(format!("λ_k needs 1 ≤ k ≤ n-1, got k = {k}, n = {n}")));
    }
    let c = 1.0 / sphere::sphere_area(n - k);
    let mut t = HomForm::new(n, VAL_LABEL, n - k, k, 0, 0)?;
    for j in MultiIndex::all_of_size(n, k) {
        let s = sgn(j, j.complement());
        t.insert((j.complement(), j), SpectralField::constant(n, re(s * c))?)?;
    }
    t.unit = UnitTag::or(VAL_LABEL);
    Ok(t)
}

/// `τ(V_k) = d i_E λ_k`.
pub fn intrinsic_current(n: usize, k: usize) -> Result<ValCurrent> {
    if !(2..=3).contains(&n) {
        return Err(Error::Unsupported(format!("intrinsic volume currents for n = {n}")));
    }
    let t = ext_derivative(&interior_euler(&lambda_form(n, k)?)?)?;
    ValCurrent::new(t, Provenance::new("intrinsic", json!({ "n": n, "k": k })))
}

fn first_harmonic_norm(g: &SpectralField) -> f64 {
    match g.dim() {
        2 => g.circle(1).norm().max(g.circle(-1).norm()),
        3 => (-1..=1).map(|m| g.get(Mode { l: 1, m }).norm()).fold(0.0, f64::max),
        _ => 0.0,
    }
}

/// Degree-1 current of `φ(K) = ∫ h_K g dσ` on `S^{n-1}`, `n = 2, 3`.
///
/// Coefficient at `(form {j}^c, value {i})` is `sgn({j}, {j}^c) g(-u) u_i u_j`.
pub fn support_density_current(g: &SpectralField) -> Result<ValCurrent> {
    let n = g.dim();
    if !(2..=3).contains(&n) {
        return Err(Error::Unsupported(format!("support densities on S^{}", n - 1)));
    }
    let tol = 1e-10 * g.max_abs_coeff().max(1.0);
    if first_harmonic_norm(g) > tol {
        return Err(Error::Precondition(format!(
            "density has first-harmonic content {:.3e}; it does not define a translation-invariant valuation",
            first_harmonic_norm(g)
        )));
    }
    let big_g = g.antipodal();
    let mut t = HomForm::new(n, VAL_LABEL, n - 1, 1, 0, g.band_limit() + 2)?;
    for j in 0..n {
        let gj = multiply_coordinate(&big_g, j)?;
        let ej = single(n, j);
        let sj = sgn(ej, ej.complement());
        for i in 0..n {
            t.insert((ej.complement(), single(n, i)), multiply_coordinate(&gj, i)?.scale(re(sj)))?;
        }
    }
    t.unit = UnitTag::or(VAL_LABEL);
    ValCurrent::new(t, Provenance::new("support-density", json!({ "n": n, "band": g.band_limit() })))
}

/// The plane current `g(-y/|y|)|y|^{-3}(y_1dx_1 + y_2dx_2) ⊗ (y_1dy_2 - y_2dy_1)`.
pub fn plane_current(g: &SpectralField) -> Result<ValCurrent> {
    if g.dim() != 2 {
        return Err(Error::Dimension("plane currents take a density on S^1".into()));
    }
    let mut v = support_density_current(g)?;
    v.provenance = Provenance::new("plane", json!({ "band": g.band_limit() }));
    Ok(v)
}

/// `τ(Fφ) = F⁰τ(φ)`.
pub fn fourier_val(phi: &ValCurrent) -> Result<ValCurrent> {
    phi.derived(fourier0(&phi.current)?, "fourier")
}
