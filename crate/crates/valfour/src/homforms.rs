//! Homogeneous generalized forms on `R^n∖{0}` with exterior-power values.
//!
//! A [`HomForm`] stores
//! `ω = Σ_{I,J} |y|^{r-q} g_{I,J}(y/|y|) dy_I ⊗ e_J`
//! with `|I| = q`, `|J| = p`, plus an optional multiple of `δ_0 dy_{1..n}`.
//! Values are written first (`e_J ⊗ dy_I`); `d` and `i_E` act on the form slot only.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::exterior::{determinant, minor, shuffle_sign, MultiIndex, UnitTag};
use crate::sphere::{
    self, ambient_gradient, analyze, eval_fields_at, gauss_legendre, grid_for, multiply_coordinate, SpectralField,
};
use crate::{Error, Result, C64, ZERO};

/// `(form index I, value index J)`.
pub type Key = (MultiIndex, MultiIndex);

#[derive(Clone, Debug, PartialEq)]
pub struct HomForm {
    n: usize,
    vdim: usize,
    pub label: String,
    q: usize,
    p: usize,
    r: i32,
    band: usize,
    coeffs: BTreeMap<Key, SpectralField>,
    atoms: BTreeMap<MultiIndex, C64>,
    pub unit: UnitTag,
}

/// Label of the dual space: `V ↔ V*`.
pub fn dual_label(label: &str) -> String {
    match label.strip_suffix('*') {
        Some(s) => s.to_string(),
        None => format!("{label}*"),
    }
}

impl HomForm {
    pub fn new(n: usize, label: &str, q: usize, p: usize, r: i32, band: usize) -> Result<Self> {
        Self::with_value_dim(n, n, label, q, p, r, band)
    }

    /// Form on `R^n` with values in `∧^p` of a `vdim`-dimensional space.
    pub fn with_value_dim(n: usize, vdim: usize, label: &str, q: usize, p: usize, r: i32, band: usize) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::Unsupported(format!("homogeneous forms need n in 1..=3, got {n}")));
        }
        if q > n || p > vdim || vdim > 4 {
            return Err(Error::Dimension(format!("q = {q}, p = {p} in n = {n}, value dim {vdim}")));
        }
        let band = if n == 1 { 1 } else { band };
        if band > sphere::max_band(n) {
            return Err(Error::BandOverflow { requested: band, max: sphere::max_band(n) });
        }
        Ok(HomForm {
            n,
            vdim,
            label: label.to_string(),
            q,
            p,
            r,
            band,
            coeffs: BTreeMap::new(),
            atoms: BTreeMap::new(),
            unit: UnitTag::none(),
        })
    }

    /// Homogeneous extension of sphere data given in normal form.
    pub fn from_sphere_data(
        n: usize,
        q: usize,
        p: usize,
        r: i32,
        coeffs: impl IntoIterator<Item = (Key, SpectralField)>,
    ) -> Result<Self> {
        let coeffs: Vec<(Key, SpectralField)> = coeffs.into_iter().collect();
        let band = coeffs.first().map(|(_, f)| f.band_limit()).unwrap_or(0);
        if coeffs.iter().any(|(_, f)| f.band_limit() != band) {
            return Err(Error::Shape("coefficient fields have different band limits".into()));
        }
        let mut out = Self::new(n, "V*", q, p, r, band)?;
        for (k, f) in coeffs {
            out.insert(k, f)?;
        }
        Ok(out)
    }

    /// `c·δ_0 dy_{1..n} ⊗ e_J` with `J` empty or full.
    pub fn atom_form(n: usize, p: usize, c: C64) -> Result<Self> {
        let mut out = Self::new(n, "V*", n, p, 0, 0)?;
        out.set_atom(Some(c))?;
        Ok(out)
    }

    /// Origin atoms `Σ_J c_J δ_0 dy_{1..n} ⊗ e_J`.
    pub fn atoms(&self) -> &BTreeMap<MultiIndex, C64> {
        &self.atoms
    }

    pub fn add_atom(&mut self, j: MultiIndex, c: C64) -> Result<()> {
        if self.q != self.n || j.len() != self.p || j.dim() != self.vdim {
            return Err(Error::Shape(format!("origin atom at {j:?} needs q = n (q = {})", self.q)));
        }
        *self.atoms.entry(j).or_insert(ZERO) += c;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn value_dim(&self) -> usize {
        self.vdim
    }

    pub fn form_degree(&self) -> usize {
        self.q
    }

    pub fn value_degree(&self) -> usize {
        self.p
    }

    pub fn homogeneity(&self) -> i32 {
        self.r
    }

    pub fn band_limit(&self) -> usize {
        self.band
    }

    /// Atom of a scalar value slot (`p = 0` or `p = vdim`).
    pub fn atom(&self) -> Option<C64> {
        self.atoms.get(&self.atom_value_index()).copied()
    }

    /// Value index carried by the atom.
    pub fn atom_value_index(&self) -> MultiIndex {
        if self.p == 0 {
            MultiIndex::empty(self.vdim)
        } else {
            MultiIndex::full(self.vdim)
        }
    }

    /// Set the atom of a scalar value slot.
    pub fn set_atom(&mut self, c: Option<C64>) -> Result<()> {
        if c.is_some() && (self.q != self.n || (self.p != 0 && self.p != self.vdim)) {
            return Err(Error::Shape(format!(
                "scalar origin atom needs q = n and p in {{0, n}} (q = {}, p = {})",
                self.q, self.p
            )));
        }
        let j = self.atom_value_index();
        match c {
            Some(c) => {
                self.atoms.insert(j, c);
            }
            None => {
                self.atoms.remove(&j);
            }
        }
        Ok(())
    }

    pub fn coeffs(&self) -> &BTreeMap<Key, SpectralField> {
        &self.coeffs
    }

    pub fn coeff(&self, key: &Key) -> Option<&SpectralField> {
        self.coeffs.get(key)
    }

    /// Coefficient field for `(I, J)` given as 1-based index lists.
    pub fn coeff_by(&self, form: &[usize], value: &[usize]) -> Result<SpectralField> {
        let key = (MultiIndex::new(self.n, form)?, MultiIndex::new(self.vdim, value)?);
        match self.coeffs.get(&key) {
            Some(f) => Ok(f.clone()),
            None => SpectralField::zeros(self.n, self.band),
        }
    }

    /// Empty form with the same shape.
    pub fn zero_like(&self) -> Self {
        let mut z = self.clone();
        z.coeffs.clear();
        z.atoms.clear();
        z
    }

    fn check_key(&self, key: &Key) -> Result<()> {
        if key.0.dim() != self.n || key.0.len() != self.q || key.1.dim() != self.vdim || key.1.len() != self.p {
            return Err(Error::Shape(format!("key {:?} does not fit q = {}, p = {}", key, self.q, self.p)));
        }
        Ok(())
    }

    /// Add `f` to the coefficient at `key`, widening the band if needed.
    pub fn insert(&mut self, key: Key, f: SpectralField) -> Result<()> {
        self.check_key(&key)?;
        if f.dim() != self.n {
            return Err(Error::Dimension(format!("field on S^{} for n = {}", f.dim() - 1, self.n)));
        }
        if f.band_limit() > self.band {
            self.set_band(f.band_limit())?;
        }
        let f = f.with_band(self.band)?;
        let e = match self.coeffs.remove(&key) {
            Some(g) => g.add(&f)?,
            None => f,
        };
        self.coeffs.insert(key, e);
        Ok(())
    }

    fn set_band(&mut self, band: usize) -> Result<()> {
        let band = if self.n == 1 { 1 } else { band };
        for f in self.coeffs.values_mut() {
            *f = f.with_band(band)?;
        }
        self.band = band;
        Ok(())
    }

    /// Same form with every coefficient truncated or padded to `band`.
    pub fn with_band(&self, band: usize) -> Result<Self> {
        let mut out = self.clone();
        out.set_band(band)?;
        Ok(out)
    }

    pub fn map_fields(&self, f: impl Fn(&Key, &SpectralField) -> SpectralField) -> Self {
        let mut out = self.clone();
        for (k, g) in out.coeffs.iter_mut() {
            *g = f(k, g);
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.map_fields(|_, g| g.scale(s));
        out.atoms.values_mut().for_each(|a| *a *= s);
        out
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if (self.n, self.vdim, self.q, self.p, self.r) != (other.n, other.vdim, other.q, other.p, other.r) {
            return Err(Error::Shape(format!(
                "shape (n {}, q {}, p {}, r {}) vs (n {}, q {}, p {}, r {})",
                self.n, self.q, self.p, self.r, other.n, other.q, other.p, other.r
            )));
        }
        Ok(())
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: C64, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (k, g) in &other.coeffs {
            out.insert(*k, g.scale(s))?;
        }
        for (j, a) in &other.atoms {
            *out.atoms.entry(*j).or_insert(ZERO) += s * a;
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(C64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(C64::new(-1.0, 0.0), other)
    }

    /// `(Σ ∫_S |g_{I,J}|² + |atom|²)^{1/2}`.
    pub fn norm(&self) -> f64 {
        let s: f64 = self.coeffs.values().map(|g| g.l2_norm().powi(2)).sum();
        (s + self.atoms.values().map(|a| a.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Norm of the difference; infinite on shape mismatch.
    pub fn distance(&self, other: &Self) -> f64 {
        self.sub(other).map(|d| d.norm()).unwrap_or(f64::INFINITY)
    }

    /// `distance / max(norm, norm_other)`.
    pub fn rel_distance(&self, other: &Self) -> f64 {
        let s = self.norm().max(other.norm());
        if s == 0.0 {
            return 0.0;
        }
        self.distance(other) / s
    }

    pub fn mollify(&self, eps: f64) -> Self {
        self.map_fields(|_, g| g.mollify(eps))
    }

    /// Coefficients at a unit vector (the normal-form prefactor is 1 there).
    pub fn eval_at(&self, u: &[f64]) -> BTreeMap<Key, C64> {
        let fields: Vec<&SpectralField> = self.coeffs.values().collect();
        let vals = eval_fields_at(&fields, u);
        self.coeffs.keys().copied().zip(vals).collect()
    }

    /// Samples of every coefficient at the nodes of a grid.
    pub fn sample(&self, grid: &sphere::SphereGrid) -> Result<BTreeMap<Key, Vec<C64>>> {
        self.coeffs
            .iter()
            .map(|(k, g)| Ok((*k, sphere::synthesize(g, grid)?)))
            .collect()
    }

    /// Form from pointwise coefficient values on the sphere.
    #[allow(clippy::too_many_arguments)]
    pub fn from_pointwise(
        n: usize,
        vdim: usize,
        label: &str,
        q: usize,
        p: usize,
        r: i32,
        band: usize,
        lq: usize,
        f: impl Fn(&[f64]) -> BTreeMap<Key, C64>,
    ) -> Result<Self> {
        let mut out = Self::with_value_dim(n, vdim, label, q, p, r, band)?;
        let grid = grid_for(n, lq.max(band))?;
        let mut samples: BTreeMap<Key, Vec<C64>> = BTreeMap::new();
        let len = grid.len();
        for (node, u) in grid.nodes.iter().enumerate() {
            for (k, v) in f(&u[..n]) {
                samples.entry(k).or_insert_with(|| vec![ZERO; len])[node] += v;
            }
        }
        for (k, s) in samples {
            out.insert(k, analyze(&s, &grid, out.band)?)?;
        }
        Ok(out)
    }

    /// `(-id)^*` on the form slot only: `g(-u)`, `dy_I ↦ (-1)^q dy_I`, `δ_0 dy ↦ (-1)^n δ_0 dy`.
    pub fn antipodal_form(&self) -> Self {
        let s = if self.q.is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut out = self.map_fields(|_, g| g.antipodal().scale(C64::new(s, 0.0)));
        let sa = if self.n.is_multiple_of(2) { 1.0 } else { -1.0 };
        out.atoms.values_mut().for_each(|a| *a *= sa);
        out
    }

    /// Apply `Λ^p M` to the value slot, `M: R^{vdim} → R^{m}`.
    pub fn map_values(&self, m: &LinMap) -> Result<Self> {
        if m.cols() != self.vdim {
            return Err(Error::Dimension(format!("value map from R^{} on values in R^{}", m.cols(), self.vdim)));
        }
        let mut out = Self::with_value_dim(self.n, m.rows(), &self.label, self.q, self.p, self.r, self.band)?;
        out.unit = self.unit.clone();
        let targets = MultiIndex::all_of_size(m.rows(), self.p);
        for ((i, j), g) in &self.coeffs {
            for l in &targets {
                let d = m.minor(l, j);
                if d.abs() > 1e-15 {
                    out.insert((*i, *l), g.scale(C64::new(d, 0.0)))?;
                }
            }
        }
        for (j, a) in &self.atoms {
            for l in &targets {
                let d = m.minor(l, j);
                if d.abs() > 1e-15 {
                    out.add_atom(*l, a * d)?;
                }
            }
        }
        Ok(out)
    }

    /// Hodge star on the value slot: `e_J ↦ sgn(J, J^c) e_{J^c}`.
    pub fn star_values(&self) -> Result<Self> {
        let mut out =
            Self::with_value_dim(self.n, self.vdim, &self.label, self.q, self.vdim - self.p, self.r, self.band)?;
        out.unit = self.unit.clone();
        for ((i, j), g) in &self.coeffs {
            let s = shuffle_sign(*j, j.complement()) as f64;
            out.insert((*i, j.complement()), g.scale(C64::new(s, 0.0)))?;
        }
        for (j, a) in &self.atoms {
            out.add_atom(j.complement(), a * shuffle_sign(*j, j.complement()) as f64)?;
        }
        Ok(out)
    }

    /// Random form with every coefficient populated.
    pub fn random<R: Rng + ?Sized>(n: usize, q: usize, p: usize, band: usize, rng: &mut R) -> Result<Self> {
        let mut out = Self::new(n, "V*", q, p, 0, band)?;
        for i in MultiIndex::all_of_size(n, q) {
            for j in MultiIndex::all_of_size(n, p) {
                out.insert((i, j), sphere::random_field(n, out.band, rng)?)?;
            }
        }
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
struct SpaceRepr {
    dim: usize,
    label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value_dim: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct ComplexRepr {
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct AtomRepr {
    #[serde(rename = "J")]
    j: Vec<usize>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct CoeffRepr {
    #[serde(rename = "I")]
    i: Vec<usize>,
    #[serde(rename = "J")]
    j: Vec<usize>,
    field: SpectralField,
}

#[derive(Serialize, Deserialize)]
struct HomFormRepr {
    space: SpaceRepr,
    form_degree: usize,
    value_degree: usize,
    homogeneity: i32,
    unit: UnitTag,
    atom: Option<ComplexRepr>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    atoms: Vec<AtomRepr>,
    coeffs: Vec<CoeffRepr>,
}

impl Serialize for HomForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        HomFormRepr {
            space: SpaceRepr {
                dim: self.n,
                label: self.label.clone(),
                value_dim: (self.vdim != self.n).then_some(self.vdim),
            },
            form_degree: self.q,
            value_degree: self.p,
            homogeneity: self.r,
            unit: self.unit.clone(),
            atom: self.atom().map(|a| ComplexRepr { re: a.re, im: a.im }),
            atoms: self
                .atoms
                .iter()
                .filter(|(j, _)| **j != self.atom_value_index())
                .map(|(j, a)| AtomRepr { j: j.indices(), re: a.re, im: a.im })
                .collect(),
            coeffs: self
                .coeffs
                .iter()
                .map(|((i, j), f)| CoeffRepr { i: i.indices(), j: j.indices(), field: f.clone() })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HomForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = HomFormRepr::deserialize(d)?;
        let build = || -> Result<HomForm> {
            let vdim = r.space.value_dim.unwrap_or(r.space.dim);
            let band = r.coeffs.first().map(|c| c.field.band_limit()).unwrap_or(0);
            let mut out = HomForm::with_value_dim(
                r.space.dim,
                vdim,
                &r.space.label,
                r.form_degree,
                r.value_degree,
                r.homogeneity,
                band,
            )?;
            out.unit = r.unit.clone();
            for c in &r.coeffs {
                if c.field.band_limit() != band {
                    return Err(Error::Shape("coefficient fields have different band limits".into()));
                }
                let key = (MultiIndex::new(r.space.dim, &c.i)?, MultiIndex::new(vdim, &c.j)?);
                out.insert(key, c.field.clone())?;
            }
            if let Some(a) = &r.atom {
                out.set_atom(Some(C64::new(a.re, a.im)))?;
            }
            for a in &r.atoms {
                out.add_atom(MultiIndex::new(vdim, &a.j)?, C64::new(a.re, a.im))?;
            }
            Ok(out)
        };
        build().map_err(D::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Iso,
    Mono,
    Epi,
}

/// Real linear map `R^cols → R^rows` of full rank.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinMap {
    matrix: Vec<Vec<f64>>,
    pub kind: MapKind,
}

fn rank(m: &[Vec<f64>]) -> usize {
    let mut a = m.to_vec();
    let rows = a.len();
    let cols = a.first().map(|r| r.len()).unwrap_or(0);
    let scale = a.iter().flatten().fold(0.0f64, |s, x| s.max(x.abs())).max(1e-300);
    let mut rk = 0;
    for c in 0..cols {
        let Some(piv) = (rk..rows).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())) else {
            break;
        };
        if a[piv][c].abs() <= 1e-12 * scale {
            continue;
        }
        a.swap(rk, piv);
        for r in rk + 1..rows {
            let f = a[r][c] / a[rk][c];
            for cc in c..cols {
                let v = a[rk][cc];
                a[r][cc] -= f * v;
            }
        }
        rk += 1;
    }
    rk
}

impl LinMap {
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let rows = matrix.len();
        let cols = matrix.first().map(|r| r.len()).unwrap_or(0);
        if rows == 0 || cols == 0 || matrix.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged or empty matrix".into()));
        }
        if rank(&matrix) < rows.min(cols) {
            return Err(Error::Singular(format!("{rows}×{cols} matrix is rank deficient")));
        }
        let kind = match rows.cmp(&cols) {
            std::cmp::Ordering::Equal => MapKind::Iso,
            std::cmp::Ordering::Greater => MapKind::Mono,
            std::cmp::Ordering::Less => MapKind::Epi,
        };
        Ok(LinMap { matrix, kind })
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, 1.0)
    }

    pub fn scalar(n: usize, s: f64) -> Self {
        let m = (0..n).map(|i| (0..n).map(|j| if i == j { s } else { 0.0 }).collect()).collect();
        LinMap { matrix: m, kind: MapKind::Iso }
    }

    pub fn rotation_2d(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        LinMap { matrix: vec![vec![c, -s], vec![s, c]], kind: MapKind::Iso }
    }

    /// Rotation about a unit axis (Rodrigues).
    pub fn rotation_3d(axis: [f64; 3], angle: f64) -> Self {
        let nrm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        let k = [axis[0] / nrm, axis[1] / nrm, axis[2] / nrm];
        let (s, c) = angle.sin_cos();
        let mut m = vec![vec![0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let cross = match (i, j) {
                    (0, 1) => -k[2],
                    (0, 2) => k[1],
                    (1, 0) => k[2],
                    (1, 2) => -k[0],
                    (2, 0) => -k[1],
                    (2, 1) => k[0],
                    _ => 0.0,
                };
                m[i][j] = if i == j { c } else { 0.0 } + s * cross + (1.0 - c) * k[i] * k[j];
            }
        }
        LinMap { matrix: m, kind: MapKind::Iso }
    }

    /// `R^j ↪ R^n` onto the first `j` coordinates.
    pub fn coordinate_inclusion(j: usize, n: usize) -> Self {
        let m = (0..n).map(|r| (0..j).map(|c| if r == c { 1.0 } else { 0.0 }).collect()).collect();
        LinMap { matrix: m, kind: if j == n { MapKind::Iso } else { MapKind::Mono } }
    }

    /// `R^n → R^m` keeping the first `m` coordinates.
    pub fn coordinate_projection(n: usize, m: usize) -> Self {
        Self::coordinate_inclusion(m, n).transpose()
    }

    pub fn rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn cols(&self) -> usize {
        self.matrix[0].len()
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn entry(&self, r: usize, c: usize) -> f64 {
        self.matrix[r][c]
    }

    pub fn transpose(&self) -> Self {
        let m: Vec<Vec<f64>> = (0..self.cols()).map(|c| (0..self.rows()).map(|r| self.matrix[r][c]).collect()).collect();
        let kind = match self.kind {
            MapKind::Iso => MapKind::Iso,
            MapKind::Mono => MapKind::Epi,
            MapKind::Epi => MapKind::Mono,
        };
        LinMap { matrix: m, kind }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &LinMap) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(Error::Dimension(format!("{}×{} after {}×{}", self.rows(), self.cols(), other.rows(), other.cols())));
        }
        let m = (0..self.rows())
            .map(|r| (0..other.cols()).map(|c| (0..self.cols()).map(|k| self.matrix[r][k] * other.matrix[k][c]).sum()).collect())
            .collect();
        LinMap::new(m)
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.matrix.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn det(&self) -> f64 {
        let mut a = self.matrix.clone();
        determinant(&mut a, self.rows())
    }

    /// Gauss–Jordan inverse of an isomorphism.
    pub fn inverse(&self) -> Result<Self> {
        if self.kind != MapKind::Iso {
            return Err(Error::Singular("only isomorphisms are invertible".into()));
        }
        let n = self.rows();
        let mut a: Vec<Vec<f64>> = self
            .matrix
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut row = r.clone();
                row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
                row
            })
            .collect();
        for c in 0..n {
            let piv = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
            a.swap(c, piv);
            let d = a[c][c];
            if d == 0.0 {
                return Err(Error::Singular("zero pivot".into()));
            }
            a[c].iter_mut().for_each(|x| *x /= d);
            for r in 0..n {
                if r != c {
                    let f = a[r][c];
                    for k in 0..2 * n {
                        let v = a[c][k];
                        a[r][k] -= f * v;
                    }
                }
            }
        }
        LinMap::new(a.into_iter().map(|r| r[n..].to_vec()).collect())
    }

    /// Determinant of the `(rows K, cols J)` block: the matrix entry of `Λ^p` of the map.
    pub fn minor(&self, rows: &MultiIndex, cols: &MultiIndex) -> f64 {
        minor(&self.matrix, &rows.positions(), &cols.positions())
    }

    pub fn is_neg_identity(&self) -> bool {
        self.kind == MapKind::Iso
            && (0..self.rows()).all(|i| (0..self.cols()).all(|j| self.matrix[i][j] == if i == j { -1.0 } else { 0.0 }))
    }

    /// `AᵀA = I`.
    pub fn has_orthonormal_columns(&self, tol: f64) -> bool {
        let c = self.cols();
        (0..c).all(|a| {
            (0..c).all(|b| {
                let d: f64 = (0..self.rows()).map(|r| self.matrix[r][a] * self.matrix[r][b]).sum();
                (d - if a == b { 1.0 } else { 0.0 }).abs() <= tol
            })
        })
    }

    pub fn is_orthogonal(&self, tol: f64) -> bool {
        self.kind == MapKind::Iso
            && self
                .transpose()
                .compose(self)
                .map(|m| (0..m.rows()).all(|i| (0..m.cols()).all(|j| (m.matrix[i][j] - if i == j { 1.0 } else { 0.0 }).abs() <= tol)))
                .unwrap_or(false)
    }
}

fn unit_of(v: &[f64]) -> (Vec<f64>, f64) {
    let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (v.iter().map(|x| x / nrm).collect(), nrm)
}

/// `i_E ω`; form degree drops by one, band rises by one.
pub fn interior_euler(w: &HomForm) -> Result<HomForm> {
    if w.q == 0 {
        return Err(Error::Precondition("i_E needs form degree ≥ 1".into()));
    }
    let mut out = HomForm::with_value_dim(w.n, w.vdim, &w.label, w.q - 1, w.p, w.r, w.band + 1)?;
    out.unit = w.unit.clone();
    for ((i, j), g) in &w.coeffs {
        for (a, pos) in i.positions().into_iter().enumerate() {
            let s = if a % 2 == 0 { 1.0 } else { -1.0 };
            let h = multiply_coordinate(g, pos)?.scale(C64::new(s, 0.0));
            out.insert((i.without(pos), *j), h)?;
        }
    }
    Ok(out)
}

/// `ω ∧ E` on the value slot, with `E = Σ u_i e_i`, and its norm.
pub fn vertical_defect(w: &HomForm) -> Result<(f64, HomForm)> {
    if w.p >= w.vdim {
        return Err(Error::Precondition("value degree must be below the value dimension".into()));
    }
    if w.vdim != w.n {
        return Err(Error::Dimension("verticality needs values in the base space".into()));
    }
    let mut out = HomForm::with_value_dim(w.n, w.vdim, &w.label, w.q, w.p + 1, w.r, w.band + 1)?;
    out.unit = w.unit.clone();
    for ((i, j), g) in &w.coeffs {
        for pos in 0..w.n {
            if j.contains(pos) {
                continue;
            }
            let single = MultiIndex::from_positions(w.vdim, &[pos])?;
            let s = shuffle_sign(*j, single) as f64;
            out.insert((*i, j.with(pos)), multiply_coordinate(g, pos)?.scale(C64::new(s, 0.0)))?;
        }
    }
    Ok((out.norm(), out))
}

/// Exterior derivative away from the origin; `r` is unchanged.
pub fn ext_derivative(w: &HomForm) -> Result<HomForm> {
    if w.q == w.n {
        return Err(Error::Precondition("d of a top-degree form".into()));
    }
    let mut out = HomForm::with_value_dim(w.n, w.vdim, &w.label, w.q + 1, w.p, w.r, w.band + 1)?;
    out.unit = w.unit.clone();
    let s = w.r - w.q as i32;
    for ((i, j), g) in &w.coeffs {
        let grad = ambient_gradient(g, s)?;
        for (pos, h) in grad.into_iter().enumerate() {
            if i.contains(pos) {
                continue;
            }
            let single = MultiIndex::from_positions(w.n, &[pos])?;
            let sg = shuffle_sign(single, *i) as f64;
            out.insert((i.with(pos), *j), h.scale(C64::new(sg, 0.0)))?;
        }
    }
    Ok(out)
}

/// `d` as a current on `R^n`: for a 0-homogeneous `(n-1)`-form this adds the origin atoms
/// `(∫_{S^{n-1}} ω) δ_0 dy_{1..n}`.
pub fn ext_derivative_distributional(w: &HomForm) -> Result<HomForm> {
    let mut out = ext_derivative(w)?;
    if w.r == 0 && w.q + 1 == w.n {
        for (j, c) in sphere_integral(w)? {
            out.add_atom(j, c)?;
        }
    }
    Ok(out)
}

/// `∫_{S^{n-1}} ω` (outward orientation) of an `(n-1)`-form, per value index.
pub fn sphere_integral(w: &HomForm) -> Result<BTreeMap<MultiIndex, C64>> {
    if w.q + 1 != w.n {
        return Err(Error::Precondition("sphere integral needs an (n-1)-form".into()));
    }
    let mut acc = BTreeMap::new();
    for ((i, j), g) in &w.coeffs {
        let pos = i.complement().positions()[0];
        let single = MultiIndex::from_positions(w.n, &[pos])?;
        let s = shuffle_sign(single, *i) as f64;
        let ug = multiply_coordinate(g, pos)?;
        *acc.entry(*j).or_insert(ZERO) += ug.integral() * s;
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValTypeReport {
    pub homogeneous: bool,
    pub shape_ok: bool,
    pub ie_norm: f64,
    pub vertical_norm: f64,
    pub closed_norm: f64,
    pub scale: f64,
    pub pass: bool,
}

/// Checks 0-homogeneity, `i_E ω = 0`, `ω ∧ E = 0` and `dω = 0`, relative to `‖ω‖`.
pub fn is_valuation_type(w: &HomForm, tol: f64) -> Result<ValTypeReport> {
    let homogeneous = w.r == 0;
    let shape_ok = w.vdim == w.n && w.p + w.q == w.n && (w.atoms.is_empty() || w.q == w.n);
    let ie_norm = if w.q > 0 { interior_euler(w)?.norm() } else { 0.0 };
    let vertical_norm = if w.p < w.vdim && w.vdim == w.n { vertical_defect(w)?.0 } else { 0.0 };
    let closed_norm = if w.q < w.n { ext_derivative_distributional(w)?.norm() } else { 0.0 };
    let scale = w.norm();
    let lim = tol * scale;
    let pass = homogeneous && shape_ok && ie_norm <= lim && vertical_norm <= lim && closed_norm <= lim;
    Ok(ValTypeReport { homogeneous, shape_ok, ie_norm, vertical_norm, closed_norm, scale, pass })
}

/// Natural pullback of a value-twisted form under `y ↦ Ay`:
/// `(A^*ω)(y) = Λ^p(A^{-1}) ω(Ay)` on values, `A^*` on the form slot, and
/// `sign(det A)` for an `or` tag of the form's space.
pub fn gl_pullback(a: &LinMap, w: &HomForm) -> Result<HomForm> {
    if a.is_orthogonal(1e-12) || w.n == 1 {
        return gl_pullback_band(a, w, w.band);
    }
    let cap = match w.n {
        2 => 4096,
        _ => 96,
    }
    .max(w.band);
    grow_band(w.band, cap, |band| gl_pullback_band(a, w, band))
}

/// Doubles the output band from `max(2L, L + 8)` until the tail is negligible or `cap` is hit.
fn grow_band(start: usize, cap: usize, build: impl Fn(usize) -> Result<HomForm>) -> Result<HomForm> {
    let mut band = (2 * start).max(start + 8).min(cap);
    loop {
        let out = build(band)?;
        if band >= cap || band_tail(&out) <= GL_TAIL_TOL {
            return Ok(out);
        }
        band = (2 * band).min(cap);
    }
}

const GL_TAIL_TOL: f64 = 1e-14;

/// Largest coefficient above three quarters of the band, relative to the largest overall.
fn band_tail(w: &HomForm) -> f64 {
    let cut = 3 * w.band / 4;
    let (mut tail, mut all) = (0.0f64, 0.0f64);
    for g in w.coeffs.values() {
        for (mode, z) in g.modes() {
            all = all.max(z.norm());
            if mode.l > cut {
                tail = tail.max(z.norm());
            }
        }
    }
    if all == 0.0 {
        0.0
    } else {
        tail / all
    }
}

/// As [`gl_pullback`] with an explicit output band.
pub fn gl_pullback_band(a: &LinMap, w: &HomForm, band: usize) -> Result<HomForm> {
    if a.kind != MapKind::Iso || a.rows() != w.n {
        return Err(Error::Singular(format!("gl action needs an invertible {0}×{0} map", w.n)));
    }
    if w.vdim != w.n && w.p != 0 {
        return Err(Error::Dimension("value slot is not the base space".into()));
    }
    let or_sign = if w.unit.has_or(&w.label) && a.det() < 0.0 { -1.0 } else { 1.0 };
    if a.is_neg_identity() {
        let s = if (w.q + w.p).is_multiple_of(2) { or_sign } else { -or_sign };
        let mut out = w.map_fields(|_, g| g.antipodal().scale(C64::new(s, 0.0)));
        let sa = if (w.n + w.p).is_multiple_of(2) { or_sign } else { -or_sign };
        out.atoms.values_mut().for_each(|x| *x *= sa);
        return Ok(out);
    }
    let ainv = a.inverse()?;
    let det_sign = a.det().signum();
    let forms = MultiIndex::all_of_size(w.n, w.q);
    let values = MultiIndex::all_of_size(w.vdim, w.p);
    let q = w.q;
    let lq = (2 * band + 2).min(2 * sphere::max_band(w.n) + 2);
    let mut out = HomForm::from_pointwise(w.n, w.vdim, &w.label, w.q, w.p, w.r, band, lq, |u| {
        let (au, nrm) = unit_of(&a.apply(u));
        let vals = w.eval_at(&au);
        let pref = nrm.powi(w.r - q as i32);
        let mut outv = BTreeMap::new();
        for ((i, j), g) in &vals {
            for k in &forms {
                let dk = a.minor(i, k);
                if dk == 0.0 {
                    continue;
                }
                for l in &values {
                    let dl = if w.p == 0 { 1.0 } else { ainv.minor(l, j) };
                    if dl == 0.0 {
                        continue;
                    }
                    *outv.entry((*k, *l)).or_insert(ZERO) += g * (pref * dk * dl * or_sign);
                }
            }
        }
        outv
    })?;
    out.unit = w.unit.clone();
    for (j, x) in &w.atoms {
        for l in &values {
            let dl = if w.p == 0 { 1.0 } else { ainv.minor(l, j) };
            if dl != 0.0 {
                out.add_atom(*l, x * det_sign * dl * or_sign)?;
            }
        }
    }
    Ok(out)
}

/// Restriction of a smooth form along a monomorphism `e: R^j → R^n` with `q < j`.
pub fn pullback_mono_smooth(e: &LinMap, w: &HomForm) -> Result<HomForm> {
    if e.rows() != w.n || e.kind == MapKind::Epi {
        return Err(Error::Shape("pullback needs a monomorphism into the form's space".into()));
    }
    let j = e.cols();
    if w.q >= j {
        return Err(Error::Precondition(format!("form degree {} ≥ source dimension {j}; use the delta pullback", w.q)));
    }
    if j == 1 || e.has_orthonormal_columns(1e-12) {
        return pullback_mono_smooth_band(e, w, if j == 1 { 1 } else { w.band });
    }
    grow_band(w.band, 4096.min(sphere::max_band(j)), |band| pullback_mono_smooth_band(e, w, band))
}

fn pullback_mono_smooth_band(e: &LinMap, w: &HomForm, band: usize) -> Result<HomForm> {
    let j = e.cols();
    let forms = MultiIndex::all_of_size(j, w.q);
    let lq = 2 * band + 2;
    let q = w.q;
    let mut out = HomForm::from_pointwise(j, w.vdim, &w.label, w.q, w.p, w.r, band, lq, |v| {
        let (ev, nrm) = unit_of(&e.apply(v));
        let pref = nrm.powi(w.r - q as i32);
        let mut outv = BTreeMap::new();
        for ((i, jj), g) in w.eval_at(&ev) {
            for k in &forms {
                let d = e.minor(&i, k);
                if d != 0.0 {
                    *outv.entry((*k, jj)).or_insert(ZERO) += g * (d * pref);
                }
            }
        }
        outv
    })?;
    out.unit = w.unit.clone();
    Ok(out)
}

/// Result of the delta pullback: `e^*ω = c·δ_0` with one `c` per value index.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaPullback {
    pub values: BTreeMap<MultiIndex, C64>,
    pub spread: f64,
    pub probes: Vec<Vec<f64>>,
    pub per_probe: Vec<BTreeMap<MultiIndex, C64>>,
}

impl DeltaPullback {
    /// Coefficient for a scalar (or single) value slot.
    pub fn c(&self) -> C64 {
        self.values.values().copied().next().unwrap_or(ZERO)
    }
}

/// Gram–Schmidt; returns the orthonormal columns and the sign of the triangular factor's determinant.
pub fn orthonormal_columns(cols: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, f64)> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut sign = 1.0;
    for c in cols {
        let mut v = c.clone();
        for b in &out {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let (u, nrm) = unit_of(&v);
        if nrm < 1e-12 {
            return Err(Error::Singular("dependent columns".into()));
        }
        sign *= nrm.signum();
        out.push(u);
    }
    Ok((out, sign))
}

/// Orthonormal basis of the complement of the span of orthonormal `basis` in `R^n`.
pub fn complement_basis(n: usize, basis: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut all: Vec<Vec<f64>> = basis.to_vec();
    let mut out = Vec::new();
    for i in 0..n {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        for b in &all {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let (u, nrm) = unit_of(&v);
        if nrm > 1e-8 {
            all.push(u.clone());
            out.push(u);
        }
    }
    out
}

/// `∫_{v + W} ω` for a 0-homogeneous `k`-form, `W` spanned by orthonormal `q_cols`,
/// `v ⊥ W` unit. `eval` gives `Σ_I g_{I,J}(u) det(Q[I,:])` per value index.
pub(crate) fn affine_plane_integral(
    n: usize,
    q_cols: &[Vec<f64>],
    v: &[f64],
    band: usize,
    eval: &dyn Fn(&[f64]) -> BTreeMap<MultiIndex, C64>,
) -> Result<BTreeMap<MultiIndex, C64>> {
    let k = q_cols.len();
    let grid = grid_for(k, band + 2)?;
    let (xs, ws) = gauss_legendre(2 * band + 48);
    let mut acc: BTreeMap<MultiIndex, C64> = BTreeMap::new();
    for (t, wt) in xs.iter().zip(&ws) {
        let alpha = PI / 4.0 * (t + 1.0);
        let (sa, ca) = alpha.sin_cos();
        let radial = wt * PI / 4.0 * sa.powi(k as i32 - 1) / ca;
        for (node, wn) in grid.nodes.iter().zip(&grid.weights) {
            let mut u = vec![0.0; n];
            for i in 0..n {
                u[i] = ca * v[i] + sa * (0..k).map(|a| node[a] * q_cols[a][i]).sum::<f64>();
            }
            for (j, g) in eval(&u) {
                *acc.entry(j).or_insert(ZERO) += g * (radial * wn);
            }
        }
    }
    Ok(acc)
}

/// Deterministic probe directions: `count/2` random unit vectors of `span(basis)` and their negatives.
pub(crate) fn probe_directions(basis: &[Vec<f64>], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = basis[0].len();
    let mut out = Vec::new();
    while out.len() < count {
        let coef: Vec<f64> = (0..basis.len()).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
        let mut v = vec![0.0; n];
        for (c, b) in coef.iter().zip(basis) {
            v.iter_mut().zip(b).for_each(|(x, y)| *x += c * y);
        }
        let (u, _) = unit_of(&v);
        out.push(u.iter().map(|x| -x).collect());
        out.push(u);
    }
    out.truncate(count);
    out
}

pub const DELTA_PROBES: usize = 8;
pub const DELTA_SEED: u64 = 0x5eed_0001;

/// Delta coefficient of `e^*ω` for a closed, `i_E`-closed `k`-form, `e: R^k → R^n`.
///
/// `c(v) = ∫_{v + e(R^k)} ω`, oriented by `e`. In codimension one a form without an
/// orientation twist of its base space is integrated against the fixed orientation of
/// `span(v, e)`, i.e. with the extra sign `sign det(v, e)`; then `c(-v) = c(v)` in both cases.
pub fn pullback_mono_delta(e: &LinMap, w: &HomForm, tol: f64) -> Result<DeltaPullback> {
    let k = e.cols();
    if e.rows() != w.n || k >= w.n {
        return Err(Error::Shape("delta pullback needs a proper monomorphism into the form's space".into()));
    }
    if w.q != k || w.r != 0 {
        return Err(Error::Precondition(format!("need a 0-homogeneous {k}-form, got q = {}, r = {}", w.q, w.r)));
    }
    let scale = w.norm().max(1e-300);
    let ie = interior_euler(w)?.norm();
    let dn = ext_derivative(w)?.norm();
    if ie > tol * scale || dn > tol * scale {
        return Err(Error::Precondition(format!("form is not closed: |i_E ω| = {ie:.3e}, |dω| = {dn:.3e}")));
    }
    let cols: Vec<Vec<f64>> = (0..k).map(|c| (0..w.n).map(|r| e.entry(r, c)).collect()).collect();
    let (qc, orient) = orthonormal_columns(&cols)?;
    let perp = complement_basis(w.n, &qc);
    let probes = probe_directions(&perp, DELTA_PROBES, DELTA_SEED);
    let qmat = LinMap { matrix: (0..w.n).map(|r| (0..k).map(|c| qc[c][r]).collect()).collect(), kind: MapKind::Mono };
    let all_k = MultiIndex::from_positions(k, &(0..k).collect::<Vec<_>>())?;
    let eval = |u: &[f64]| {
        let mut out = BTreeMap::new();
        for ((i, j), g) in w.eval_at(u) {
            let d = qmat.minor(&i, &all_k);
            *out.entry(j).or_insert(ZERO) += g * d;
        }
        out
    };
    let mut per_probe = Vec::new();
    for v in &probes {
        let mut c = affine_plane_integral(w.n, &qc, v, w.band, &eval)?;
        let mut s = orient;
        if w.n - k == 1 && !w.unit.has_or(&w.label) {
            let mut m: Vec<Vec<f64>> = (0..w.n).map(|r| {
                let mut row = vec![v[r]];
                row.extend(qc.iter().map(|col| col[r]));
                row
            }).collect();
            s *= determinant(&mut m, w.n).signum();
        }
        c.values_mut().for_each(|z| *z *= s);
        per_probe.push(c);
    }
    let mut values: BTreeMap<MultiIndex, C64> = BTreeMap::new();
    for c in &per_probe {
        for (j, z) in c {
            *values.entry(*j).or_insert(ZERO) += z / probes.len() as f64;
        }
    }
    let mut spread = 0.0f64;
    for a in &per_probe {
        for b in &per_probe {
            for (j, z) in a {
                spread = spread.max((z - b.get(j).copied().unwrap_or(ZERO)).norm());
            }
        }
    }
    Ok(DeltaPullback { values, spread, probes, per_probe })
}

/// Fiber integral along the last coordinate, `R^n → R^{n-1}`; `p_*(f dy_{I'} ∧ dy_n) = (∫ f dy_n) dy_{I'}`.
pub fn pushforward_spectral(w: &HomForm) -> Result<HomForm> {
    if !(2..=3).contains(&w.n) {
        return Err(Error::Unsupported(format!("spectral pushforward from n = {}", w.n)));
    }
    if w.q == 0 || w.r != 0 {
        return Err(Error::Precondition("need a 0-homogeneous form of degree ≥ 1".into()));
    }
    let m = w.n - 1;
    let last = w.n - 1;
    let band = if m == 1 { 1 } else { w.band };
    let (xs, ws) = gauss_legendre(2 * w.band + 48);
    let q = w.q;
    let lq = 2 * band + 2;
    let mut out = HomForm::from_pointwise(m, w.vdim, &w.label, w.q - 1, w.p, 0, band, lq, |wv| {
        let mut acc = BTreeMap::new();
        for (t, wt) in xs.iter().zip(&ws) {
            let phi = PI / 2.0 * t;
            let (s, c) = phi.sin_cos();
            let mut u = vec![0.0; m + 1];
            for i in 0..m {
                u[i] = c * wv[i];
            }
            u[last] = s;
            let weight = wt * PI / 2.0 * c.powi(q as i32 - 2);
            for ((i, j), g) in w.eval_at(&u) {
                if !i.contains(last) {
                    continue;
                }
                let i2 = MultiIndex::from_bits(m, i.without(last).bits());
                *acc.entry((i2, j)).or_insert(ZERO) += g * weight;
            }
        }
        acc
    })?;
    out.unit = w.unit.compose(&UnitTag::or("ker"));
    for (j, a) in &w.atoms {
        out.add_atom(*j, *a)?;
    }
    Ok(out)
}

/// Schwartz test form on `R^m`: `Σ c·z^α e^{-γ|z|²} dz_K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestForm {
    pub m: usize,
    pub gamma: f64,
    pub terms: Vec<(MultiIndex, C64, Vec<u32>)>,
}

impl TestForm {
    pub fn degree(&self) -> Option<usize> {
        self.terms.first().map(|t| t.0.len())
    }

    pub fn eval(&self, z: &[f64]) -> BTreeMap<MultiIndex, C64> {
        let g = (-self.gamma * z.iter().map(|x| x * x).sum::<f64>()).exp();
        let mut out = BTreeMap::new();
        for (k, c, a) in &self.terms {
            let mono: f64 = a.iter().zip(z).map(|(e, x)| x.powi(*e as i32)).product();
            *out.entry(*k).or_insert(ZERO) += c * mono * g;
        }
        out
    }

    /// Random test form of degree `d` with monomials of degree `≤ deg`.
    pub fn random<R: Rng + ?Sized>(m: usize, d: usize, deg: u32, rng: &mut R) -> Self {
        let mut terms = Vec::new();
        for k in MultiIndex::all_of_size(m, d) {
            for _ in 0..3 {
                let a: Vec<u32> = (0..m).map(|_| rng.random_range(0..=deg)).collect();
                let c = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                terms.push((k, c, a));
            }
        }
        TestForm { m, gamma: PI * rng.random_range(0.5..2.0), terms }
    }

    /// Random form of degree `d` with `γ = π` and monomials of degree at most one in each variable.
    pub fn random_gaussian<R: Rng + ?Sized>(m: usize, d: usize, rng: &mut R) -> Self {
        let mut terms = Vec::new();
        for k in MultiIndex::all_of_size(m, d) {
            for _ in 0..3 {
                let a: Vec<u32> = (0..m).map(|_| rng.random_range(0..=1)).collect();
                let c = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                terms.push((k, c, a));
            }
        }
        TestForm { m, gamma: PI, terms }
    }

    /// Fourier transform with kernel `e^{2πi⟨z,ξ⟩}`:
    /// `z^α e^{-π|z|²} dz_K ↦ i^{|α|} ξ^α e^{-π|ξ|²} sgn(K, K^c) dξ_{K^c}`.
    pub fn fourier(&self) -> Result<Self> {
        if (self.gamma - PI).abs() > 1e-15 || self.terms.iter().any(|t| t.2.iter().any(|e| *e > 1)) {
            return Err(Error::Unsupported("closed-form transform needs γ = π and multilinear monomials".into()));
        }
        let terms = self
            .terms
            .iter()
            .map(|(k, c, a)| {
                let deg: u32 = a.iter().sum();
                let ip = crate::I.powu(deg);
                (k.complement(), c * ip * shuffle_sign(*k, k.complement()) as f64, a.clone())
            })
            .collect();
        Ok(TestForm { m: self.m, gamma: self.gamma, terms })
    }

    /// Restriction to the coordinate subspace of the first `n` coordinates.
    pub fn restrict(&self, n: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(k, _, a)| k.bits() >> n == 0 && a[n..].iter().all(|e| *e == 0))
            .map(|(k, c, a)| (MultiIndex::from_bits(n, k.bits()), *c, a[..n].to_vec()))
            .collect();
        TestForm { m: n, gamma: self.gamma, terms }
    }

    /// Integral over the last `m - n` coordinates, fiber oriented after the base:
    /// `p_*(f dz_A ∧ dz_B) = (∫ f dz_B) dz_A`.
    pub fn fiber_integral(&self, n: usize) -> Self {
        let fiber = ((1u16 << self.m) - 1) & !((1u16 << n) - 1);
        let terms = self
            .terms
            .iter()
            .filter(|(k, _, a)| k.bits() & fiber == fiber && a[n..].iter().all(|e| e % 2 == 0))
            .map(|(k, c, a)| {
                let w: f64 = a[n..].iter().map(|&e| 2.0 * radial_moment(e as f64, self.gamma, 1.0)).product();
                (MultiIndex::from_bits(n, k.bits() & !fiber), c * w, a[..n].to_vec())
            })
            .collect();
        TestForm { m: n, gamma: self.gamma, terms }
    }

    fn value_at_origin(&self) -> C64 {
        self.terms
            .iter()
            .filter(|(k, _, a)| k.is_empty() && a.iter().all(|e| *e == 0))
            .map(|t| t.1)
            .sum()
    }
}

/// `∫_0^∞ ρ^β e^{-γ s² ρ²} dρ`.
fn radial_moment(beta: f64, gamma: f64, s: f64) -> f64 {
    let a = (beta + 1.0) / 2.0;
    (ln_gamma(a) - a * (gamma * s * s).ln()).exp() / 2.0
}

/// `∫_{R^n} p^*ψ ∧ ω` for a 0-homogeneous form and an epimorphism with one-dimensional kernel.
/// Polar quadrature about the kernel line with exact Gaussian radial moments.
pub fn pushforward_weak(p: &LinMap, w: &HomForm, test: &TestForm) -> Result<BTreeMap<MultiIndex, C64>> {
    if p.cols() != w.n || p.kind != MapKind::Epi {
        return Err(Error::Shape("weak pushforward needs an epimorphism from the form's space".into()));
    }
    let s = w.n - p.rows();
    if s != 1 {
        return Err(Error::Unsupported("weak pushforward is implemented for one-dimensional kernels".into()));
    }
    if w.q < s || w.r != 0 {
        return Err(Error::Precondition(format!("pushforward of a {}-form along a rank-{s} kernel diverges", w.q)));
    }
    if test.m != p.rows() {
        return Err(Error::Dimension("test form lives on the wrong space".into()));
    }
    let rows: Vec<Vec<f64>> = p.matrix().to_vec();
    let (rb, _) = orthonormal_columns(&rows)?;
    let kernel = complement_basis(w.n, &rb).remove(0);
    let (xs, ws) = gauss_legendre(2 * w.band + 64);
    let wgrid = if w.n == 2 { grid_for(1, 1)? } else { grid_for(w.n - 1, w.band + 8)? };
    let perp = complement_basis(w.n, std::slice::from_ref(&kernel));
    let mut acc: BTreeMap<MultiIndex, C64> = BTreeMap::new();
    for (t, wt) in xs.iter().zip(&ws) {
        let th = PI / 2.0 * (t + 1.0);
        let (sth, cth) = th.sin_cos();
        for (node, wn) in wgrid.nodes.iter().zip(&wgrid.weights) {
            let mut u = vec![0.0; w.n];
            for i in 0..w.n {
                u[i] = cth * kernel[i] + sth * (0..w.n - 1).map(|a| node[a] * perp[a][i]).sum::<f64>();
            }
            let pu = p.apply(&u);
            let (_, npu) = unit_of(&pu);
            let measure = wt * PI / 2.0 * wn * sth.powi(w.n as i32 - 2);
            for ((i, j), g) in w.eval_at(&u) {
                let ic = i.complement();
                let top = shuffle_sign(ic, i) as f64;
                for (k, c, a) in &test.terms {
                    if k.len() != ic.len() {
                        continue;
                    }
                    let d = p.minor(k, &ic);
                    if d == 0.0 {
                        continue;
                    }
                    let deg: u32 = a.iter().sum();
                    let beta = deg as f64 + w.n as f64 - 1.0 - w.q as f64;
                    if beta <= -1.0 {
                        if g.norm() > 1e-14 {
                            return Err(Error::Precondition("top-degree smooth part does not push forward".into()));
                        }
                        continue;
                    }
                    let mono: f64 = a.iter().zip(&pu).map(|(e, x)| x.powi(*e as i32)).product();
                    let rad = radial_moment(beta, test.gamma, 1.0) / npu.powf(beta + 1.0);
                    *acc.entry(j).or_insert(ZERO) += g * c * (mono * rad * d * top * measure);
                }
            }
        }
    }
    for (j, a) in &w.atoms {
        *acc.entry(*j).or_insert(ZERO) += a * test.value_at_origin();
    }
    Ok(acc)
}

/// `∫_{R^m} ψ ∧ η` for a 0-homogeneous form `η` on `R^m`.
pub fn pair_with_test(eta: &HomForm, test: &TestForm) -> Result<BTreeMap<MultiIndex, C64>> {
    if test.m != eta.n {
        return Err(Error::Dimension("test form lives on the wrong space".into()));
    }
    if eta.q == eta.n {
        for g in eta.coeffs.values() {
            if g.integral().norm() > 1e-12 * g.l2_norm().max(1e-300) {
                return Err(Error::Precondition("top-degree part with nonzero mean is not integrable".into()));
            }
        }
    }
    let deg_max = test.terms.iter().map(|t| t.2.iter().sum::<u32>()).max().unwrap_or(0) as usize;
    let grid = grid_for(eta.n, eta.band + deg_max + 2)?;
    let mut acc: BTreeMap<MultiIndex, C64> = BTreeMap::new();
    for (node, wn) in grid.nodes.iter().zip(&grid.weights) {
        let u = &node[..eta.n];
        for ((i, j), g) in eta.eval_at(u) {
            let ic = i.complement();
            let top = shuffle_sign(ic, i) as f64;
            for (k, c, a) in &test.terms {
                if *k != ic {
                    continue;
                }
                let deg: u32 = a.iter().sum();
                let beta = deg as f64 + eta.n as f64 - 1.0 - eta.q as f64;
                if beta <= -1.0 {
                    // principal value against a radial Gaussian
                    continue;
                }
                let mono: f64 = a.iter().zip(u).map(|(e, x)| x.powi(*e as i32)).product();
                *acc.entry(j).or_insert(ZERO) += g * c * (mono * radial_moment(beta, test.gamma, 1.0) * top * wn);
            }
        }
    }
    for (j, a) in &eta.atoms {
        *acc.entry(*j).or_insert(ZERO) += a * test.value_at_origin();
    }
    Ok(acc)
}

pub fn mollify(w: &HomForm, eps: f64) -> HomForm {
    w.mollify(eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;

    fn angle_form() -> HomForm {
        let u1 = SpectralField::coordinate(2, 0).unwrap();
        let u2 = SpectralField::coordinate(2, 1).unwrap();
        let e = MultiIndex::empty(2);
        HomForm::from_sphere_data(
            2,
            1,
            0,
            0,
            [
                ((MultiIndex::new(2, &[2]).unwrap(), e), u1),
                ((MultiIndex::new(2, &[1]).unwrap(), e), u2.scale(c(-1.0, 0.0))),
            ],
        )
        .unwrap()
    }

    #[test]
    fn angle_form_is_closed_and_radial_free() {
        let w = angle_form();
        assert!(interior_euler(&w).unwrap().norm() < 1e-13);
        assert!(ext_derivative(&w).unwrap().norm() < 1e-12);
    }

    #[test]
    fn euler_contraction_of_dy1() {
        let one = SpectralField::constant(2, c(1.0, 0.0)).unwrap();
        let w = HomForm::from_sphere_data(2, 1, 0, 1, [((MultiIndex::new(2, &[1]).unwrap(), MultiIndex::empty(2)), one)]).unwrap();
        let ie = interior_euler(&w).unwrap();
        let g = ie.coeff(&(MultiIndex::empty(2), MultiIndex::empty(2))).unwrap();
        let u1 = SpectralField::coordinate(2, 0).unwrap();
        assert!(g.sub(&u1).unwrap().max_abs_coeff() < 1e-14);
        assert_eq!(ie.homogeneity(), 1);
    }

    #[test]
    fn vertical_defect_of_constant_dx1() {
        let one = SpectralField::constant(2, c(1.0, 0.0)).unwrap();
        let w = HomForm::from_sphere_data(2, 1, 1, 0, [((MultiIndex::new(2, &[1]).unwrap(), MultiIndex::new(2, &[1]).unwrap()), one)]).unwrap();
        let (nrm, d) = vertical_defect(&w).unwrap();
        assert!(nrm > 0.1);
        let g = d.coeff(&(MultiIndex::new(2, &[1]).unwrap(), MultiIndex::new(2, &[1, 2]).unwrap())).unwrap();
        let u2 = SpectralField::coordinate(2, 1).unwrap();
        assert!(g.sub(&u2).unwrap().max_abs_coeff() < 1e-14);
    }

    #[test]
    fn delta_pullback_of_angle_form_is_pi() {
        let w = angle_form();
        let e = LinMap::coordinate_inclusion(1, 2);
        let r = pullback_mono_delta(&e, &w, 1e-10).unwrap();
        assert!((r.c() - c(PI, 0.0)).norm() < 1e-10, "{}", r.c());
        assert!(r.spread < 1e-10);
    }

    #[test]
    fn spectral_pushforward_of_angle_form() {
        let w = angle_form();
        let out = pushforward_spectral(&w).unwrap();
        let g = out.coeff(&(MultiIndex::empty(1), MultiIndex::empty(2))).unwrap();
        assert!((g.eval_at(&[1.0]) - c(PI, 0.0)).norm() < 1e-10);
        assert!((g.eval_at(&[-1.0]) + c(PI, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn weak_pushforward_matches_sign_pairing() {
        let w = angle_form();
        let p = LinMap::coordinate_projection(2, 1);
        let t = TestForm { m: 1, gamma: PI, terms: vec![(MultiIndex::full(1), c(1.0, 0.0), vec![1])] };
        let v = pushforward_weak(&p, &w, &t).unwrap();
        assert!((v[&MultiIndex::empty(2)] - c(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn linmap_kinds() {
        assert_eq!(LinMap::coordinate_inclusion(1, 2).kind, MapKind::Mono);
        assert_eq!(LinMap::coordinate_projection(3, 2).kind, MapKind::Epi);
        assert!(LinMap::new(vec![vec![1.0, 2.0], vec![2.0, 4.0]]).is_err());
        let a = LinMap::new(vec![vec![2.0, 1.0], vec![0.5, 3.0]]).unwrap();
        let b = a.compose(&a.inverse().unwrap()).unwrap();
        assert!(b.is_orthogonal(1e-12));
    }
}
