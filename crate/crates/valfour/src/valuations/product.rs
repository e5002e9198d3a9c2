//! Exterior products of currents, the transform on product spaces, and the plane
//! product and convolution of degree-1 valuations.
//!
//! Product currents on `V* × W*` keep the two coefficient fields as separate factors.
//! Form and value indices live in `n_V + n_W` coordinates, `V*` first.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::{re, sgn, ValCurrent};
use crate::exterior::MultiIndex;
use crate::fourier::fourier_scalar;
use crate::homforms::HomForm;
use crate::signs;
use crate::sphere::{gauss_legendre, SpectralField};
use crate::{Error, Result, C64};

#[derive(Clone, Debug, PartialEq)]
pub enum Factor {
    /// `|y|^{-q} g(y/|y|)`.
    Field(SpectralField),
    /// `a·δ_0`.
    Atom(C64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TensorTerm {
    pub form: MultiIndex,
    pub value: MultiIndex,
    pub coef: C64,
    pub left: Factor,
    pub right: Factor,
}

/// Sum of products `coef · left(y) right(z) dy∧dz ⊗ e_J`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorCurrent {
    pub n1: usize,
    pub n2: usize,
    pub terms: Vec<TensorTerm>,
}

fn join(a: MultiIndex, b: MultiIndex, n1: usize) -> MultiIndex {
    MultiIndex::from_bits(n1 + b.dim(), a.bits() | (b.bits() << n1))
}

fn split(i: MultiIndex, n1: usize, n2: usize) -> (MultiIndex, MultiIndex) {
    let mask = (1u16 << n1) - 1;
    (MultiIndex::from_bits(n1, i.bits() & mask), MultiIndex::from_bits(n2, i.bits() >> n1))
}

fn factors(w: &HomForm) -> Vec<(MultiIndex, MultiIndex, Factor)> {
    let mut out: Vec<_> = w.coeffs().iter().map(|((i, j), g)| (*i, *j, Factor::Field(g.clone()))).collect();
    for (j, a) in w.atoms() {
        out.push((MultiIndex::full(w.dim()), *j, Factor::Atom(*a)));
    }
    out
}

/// `ω ⊠ ζ` with forms and values concatenated, no sign.
pub fn tensor_forms(w: &HomForm, z: &HomForm) -> Result<TensorCurrent> {
    let (n1, n2) = (w.dim(), z.dim());
    if w.value_dim() != n1 || z.value_dim() != n2 {
        return Err(Error::Dimension("tensor products need values in the base spaces".into()));
    }
    let mut terms = Vec::new();
    for (i1, j1, f1) in factors(w) {
        for (i2, j2, f2) in factors(z) {
            terms.push(TensorTerm {
                form: join(i1, i2, n1),
                value: join(j1, j2, n1),
                coef: re(1.0),
                left: f1.clone(),
                right: f2,
            });
        }
    }
    Ok(TensorCurrent { n1, n2, terms })
}

/// `τ(φ ⊠ ψ) = (-1)^{(n-k)l} τ(φ) ⊠ τ(ψ)`.
pub fn exterior_product_val(phi: &ValCurrent, psi: &ValCurrent) -> Result<TensorCurrent> {
    let (n, k, l) = (phi.dim(), phi.degree(), psi.degree());
    if n + psi.dim() > 6 {
        return Err(Error::Unsupported("product spaces of dimension above 6".into()));
    }
    let mut t = tensor_forms(phi.current(), psi.current())?;
    let s = signs::exterior_product(n, k, l);
    t.terms.iter_mut().for_each(|term| term.coef *= s);
    Ok(t)
}

fn transform_factor(n: usize, q: usize, f: &Factor) -> Result<Vec<Factor>> {
    Ok(match f {
        Factor::Atom(a) => vec![Factor::Field(SpectralField::constant(n, *a)?)],
        Factor::Field(g) => {
            let (h, atom) = fourier_scalar(n, q, g)?;
            let mut v = Vec::new();
            if h.max_abs_coeff() > 0.0 {
                v.push(Factor::Field(h));
            }
            if let Some(a) = atom {
                v.push(Factor::Atom(a));
            }
            v
        }
    })
}

/// `F⁰` on `V* × W*` applied to each product term: the transform of the product space
/// followed by the Hodge star of `∧(V × W)` on the values.
pub fn fourier0_tensor(t: &TensorCurrent) -> Result<TensorCurrent> {
    let (n1, n2) = (t.n1, t.n2);
    let mut terms = Vec::new();
    for term in &t.terms {
        let (i1, i2) = split(term.form, n1, n2);
        let ls = transform_factor(n1, i1.len(), &term.left)?;
        let rs = transform_factor(n2, i2.len(), &term.right)?;
        let s = sgn(term.form, term.form.complement()) * sgn(term.value, term.value.complement());
        for l in &ls {
            for r in &rs {
                terms.push(TensorTerm {
                    form: term.form.complement(),
                    value: term.value.complement(),
                    coef: term.coef * s,
                    left: l.clone(),
                    right: r.clone(),
                });
            }
        }
    }
    Ok(TensorCurrent { n1, n2, terms })
}

fn sample_points(n: usize) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..7).map(|a| {
            let t = 0.3 + 0.9 * a as f64;
            vec![t.cos(), t.sin()]
        }).collect(),
        _ => (0..9).map(|a| {
            let t = 0.2 + 0.37 * a as f64;
            let p = 0.5 + 0.8 * a as f64;
            vec![t.sin() * p.cos(), t.sin() * p.sin(), t.cos()]
        }).collect(),
    }
}

impl TensorCurrent {
    /// Pointwise samples on fixed direction pairs, grouped by term structure.
    fn samples(&self) -> BTreeMap<(MultiIndex, MultiIndex, u8), Vec<C64>> {
        let (p1, p2) = (sample_points(self.n1), sample_points(self.n2));
        let mut out: BTreeMap<_, Vec<C64>> = BTreeMap::new();
        for term in &self.terms {
            let (kind, vals): (u8, Vec<C64>) = match (&term.left, &term.right) {
                (Factor::Field(a), Factor::Field(b)) => {
                    let va: Vec<C64> = p1.iter().map(|u| a.eval_at(u)).collect();
                    let vb: Vec<C64> = p2.iter().map(|u| b.eval_at(u)).collect();
                    (0, va.iter().flat_map(|x| vb.iter().map(move |y| x * y)).collect())
                }
                (Factor::Field(a), Factor::Atom(b)) => (1, p1.iter().map(|u| a.eval_at(u) * b).collect()),
                (Factor::Atom(a), Factor::Field(b)) => (2, p2.iter().map(|u| b.eval_at(u) * a).collect()),
                (Factor::Atom(a), Factor::Atom(b)) => (3, vec![a * b]),
            };
            let e = out.entry((term.form, term.value, kind)).or_insert_with(|| vec![C64::default(); vals.len()]);
            for (x, v) in e.iter_mut().zip(vals) {
                *x += v * term.coef;
            }
        }
        out
    }

    /// Largest pointwise difference on the sample directions, relative to the larger current.
    pub fn sample_distance(&self, other: &TensorCurrent) -> f64 {
        let (a, b) = (self.samples(), other.samples());
        let mut diff = 0.0f64;
        let mut scale = 0.0f64;
        for key in a.keys().chain(b.keys()) {
            let za = a.get(key);
            let zb = b.get(key);
            let len = za.or(zb).map(|v| v.len()).unwrap_or(0);
            for t in 0..len {
                let x = za.map(|v| v[t]).unwrap_or_default();
                let y = zb.map(|v| v[t]).unwrap_or_default();
                diff = diff.max((x - y).norm());
                scale = scale.max(x.norm()).max(y.norm());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            diff / scale
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = self.clone();
        out.terms.iter_mut().for_each(|t| t.coef *= c);
        out
    }
}

/// Gauss–Legendre order on each half of the angle-difference circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlaneQuadrature {
    pub nodes: usize,
}

impl PlaneQuadrature {
    pub fn for_band(band: usize) -> Self {
        PlaneQuadrature { nodes: 2 * band + 64 }
    }
}

/// Coefficient of `e_1∧e_2` under the sum of the two covector slots.
fn sum_pair(j: MultiIndex) -> f64 {
    let p = j.positions();
    if p.len() != 2 {
        return 0.0;
    }
    match (p[0] % 2, p[1] % 2) {
        (0, 1) => 1.0,
        (1, 0) => -1.0,
        _ => 0.0,
    }
}

struct PlaneTerms {
    /// `(weight, left field, right field)`.
    terms: Vec<(C64, SpectralField, SpectralField)>,
}

fn plane_terms(t: &TensorCurrent, valw: impl Fn(MultiIndex) -> f64, formw: impl Fn(MultiIndex) -> f64) -> Result<PlaneTerms> {
    if t.n1 != 2 || t.n2 != 2 {
        return Err(Error::Unsupported("plane products need two currents on R^2".into()));
    }
    let mut terms = Vec::new();
    for term in &t.terms {
        let w = term.coef * valw(term.value) * formw(term.form);
        if w == C64::default() {
            continue;
        }
        match (&term.left, &term.right) {
            (Factor::Field(a), Factor::Field(b)) => terms.push((w, a.clone(), b.clone())),
            _ => return Err(Error::Unsupported("plane products of degree-1 currents have no atoms".into())),
        }
    }
    Ok(PlaneTerms { terms })
}

/// `∫ C(δ) κ(δ) dδ` with `C(δ) = Σ w ∫ L(θ) R(θ+δ) dθ = 2π Σ_m w a_m b_{-m} e^{-imδ}`,
/// split at `δ = π`.
fn angle_pair_integral(pt: &PlaneTerms, kernel: impl Fn(f64) -> f64, nq: PlaneQuadrature) -> Result<C64> {
    let band = pt.terms.iter().map(|(_, a, b)| a.band_limit().min(b.band_limit())).max().unwrap_or(0) as i64;
    let corr: Vec<C64> = (-band..=band)
        .map(|m| pt.terms.iter().map(|(w, a, b)| w * a.circle(m) * b.circle(-m)).sum::<C64>() * (2.0 * PI))
        .collect();
    let (gx, gw) = gauss_legendre(nq.nodes);
    let mut total = C64::default();
    for half in 0..2 {
        for (x, wx) in gx.iter().zip(&gw) {
            let t = PI * (x + 1.0) / 2.0;
            let delta = t + PI * half as f64;
            let ang = if half == 0 { t } else { PI - t };
            let c: C64 = corr
                .iter()
                .zip(-band..=band)
                .map(|(z, m)| z * C64::from_polar(1.0, -(m as f64) * delta))
                .sum();
            total += c * (kernel(ang) / delta.sin().abs() * wx * PI / 2.0);
        }
    }
    Ok(total)
}

/// `c` with `φ·ψ = c·vol_2` for degree-1 valuations on `R^2`: the pushforward of
/// `τ(φ ⊠ ψ)` along the sum map `V* × V* → V*`.
pub fn product_top(phi: &ValCurrent, psi: &ValCurrent) -> Result<C64> {
    product_top_with(phi, psi, None)
}

pub fn product_top_with(phi: &ValCurrent, psi: &ValCurrent, nq: Option<PlaneQuadrature>) -> Result<C64> {
    check_plane_pair(phi, psi)?;
    let t = exterior_product_val(phi, psi)?;
    let pt = plane_terms(&t, sum_pair, |i| -sum_pair(i))?;
    let nq = nq.unwrap_or_else(|| PlaneQuadrature::for_band(band_of(phi, psi)));
    Ok(angle_pair_integral(&pt, |a| a / (2.0 * PI), nq)? * PRODUCT_ORIENTATION)
}

/// Orientation of the fiber of the sum map relative to `V* × V*`.
const PRODUCT_ORIENTATION: f64 = 1.0;
/// Orientation of the antidiagonal slice relative to `V* × V*`.
const CONVOLUTION_ORIENTATION: f64 = 1.0;

fn band_of(phi: &ValCurrent, psi: &ValCurrent) -> usize {
    phi.current().band_limit().max(psi.current().band_limit())
}

fn check_plane_pair(phi: &ValCurrent, psi: &ValCurrent) -> Result<()> {
    if phi.dim() != 2 || psi.dim() != 2 || phi.degree() != 1 || psi.degree() != 1 {
        return Err(Error::Unsupported("plane products take two degree-1 valuations on R^2".into()));
    }
    Ok(())
}

/// Convolution coefficient with probe diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvolutionReport {
    pub value: C64,
    /// Per-probe values `c(v)` on slices `v + Δ(V*)`, when computed.
    pub probes: Vec<C64>,
    pub spread: Option<f64>,
}

/// Value coefficient of the convolution: star in `∧(V × V)`, then the sum of the two vector slots.
fn conv_value(j: MultiIndex) -> f64 {
    sgn(j, j.complement()) * sum_pair(j.complement())
}

/// Form coefficient of the restriction to the diagonal `y = z`.
fn diag_form(i: MultiIndex) -> f64 {
    sum_pair(i)
}

pub const CONVOLUTION_PROBES: usize = 6;
const PROBE_BAND_MAX: usize = 96;
const SPREAD_TOL: f64 = 1e-6;

/// `c` with `φ * ψ = c·χ` for degree-1 valuations on `R^2`: the delta pullback of
/// `τ̃(φ ⊠ ψ)` along the diagonal `V* → V* × V*`.
pub fn convolution_bottom(phi: &ValCurrent, psi: &ValCurrent) -> Result<ConvolutionReport> {
    convolution_bottom_with(phi, psi, None)
}

pub fn convolution_bottom_with(phi: &ValCurrent, psi: &ValCurrent, nq: Option<PlaneQuadrature>) -> Result<ConvolutionReport> {
    check_plane_pair(phi, psi)?;
    let t = exterior_product_val(phi, psi)?;
    let pt = plane_terms(&t, conv_value, diag_form)?;
    let band = band_of(phi, psi);
    let nq = nq.unwrap_or_else(|| PlaneQuadrature::for_band(band));
    let value = angle_pair_integral(&pt, |a| (PI - a) / (2.0 * PI), nq)? * CONVOLUTION_ORIENTATION;
    if band > PROBE_BAND_MAX {
        return Ok(ConvolutionReport { value, probes: Vec::new(), spread: None });
    }
    let probes: Vec<C64> = (0..CONVOLUTION_PROBES)
        .map(|a| {
            let w = 0.37 + 2.0 * PI * a as f64 / CONVOLUTION_PROBES as f64;
            probe_value(&pt, w, band).map(|z| z * CONVOLUTION_ORIENTATION)
        })
        .collect::<Result<_>>()?;
    let scale = probes.iter().map(|z| z.norm()).fold(value.norm(), f64::max).max(1e-300);
    let spread = probes.iter().map(|z| (z - value).norm()).fold(0.0, f64::max) / scale;
    if spread > SPREAD_TOL {
        return Err(Error::Precondition(format!(
            "slice values of the product current vary by {spread:.3e}; the current is not closed"
        )));
    }
    Ok(ConvolutionReport { value, probes, spread: Some(spread) })
}

fn wrap(a: f64) -> f64 {
    a.rem_euclid(2.0 * PI)
}

/// `c(w) = ∫∫ N(θ, θ') / |sin(θ' - θ)|` over direction pairs with `w ∈ cone(e_θ, -e_θ')`.
fn probe_value(pt: &PlaneTerms, w: f64, band: usize) -> Result<C64> {
    let m = 2 * band + 40;
    let (gx, gw) = gauss_legendre(m);
    let mw = wrap(w + PI);
    let mut acc = C64::default();
    for (start, len) in [(w, PI), (mw, PI)] {
        for (x, wx) in gx.iter().zip(&gw) {
            let th = start + len * (x + 1.0) / 2.0;
            let outer_w = wx * len / 2.0;
            let e = [th.cos(), th.sin()];
            let lv: Vec<C64> = pt.terms.iter().map(|(_, a, _)| a.eval_at(&e)).collect();
            let delta = wrap(th - mw);
            let (a0, a_len) = if delta <= PI { (mw, delta) } else { (th, 2.0 * PI - delta) };
            for (y, wy) in gx.iter().zip(&gw) {
                let tp = a0 + a_len * (y + 1.0) / 2.0;
                let s = (tp - th).sin().abs();
                if s < 1e-300 {
                    continue;
                }
                let f = [tp.cos(), tp.sin()];
                let weight = outer_w * wy * a_len / 2.0 / s;
                for ((wt, _, b), l) in pt.terms.iter().zip(&lv) {
                    acc += wt * l * b.eval_at(&f) * weight;
                }
            }
        }
    }
    Ok(acc)
}
