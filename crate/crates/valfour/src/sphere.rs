//! Band-limited scalar fields on `S^{n-1}` for `n = 1, 2, 3`.
//!
//! Layouts:
//! - `n = 1`: `f(u) = c_0 + c_1 u` on `S^0 = {±1}`.
//! - `n = 2`: `f(θ) = Σ_{|m|≤L} c_m e^{imθ}`, stored for `m = -L..=L`.
//! - `n = 3`: orthonormal complex spherical harmonics with the Condon–Shortley
//!   phase, stored at `l² + l + m`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64, I, ZERO};

pub const MAX_BAND_CIRCLE: usize = 8192;
pub const MAX_BAND_SPHERE: usize = 160;

pub fn max_band(n: usize) -> usize {
    match n {
        1 => 1,
        2 => MAX_BAND_CIRCLE,
        _ => MAX_BAND_SPHERE,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// Harmonic index: degree `l` and order `m` (`l = |m|` on the circle).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mode {
    pub l: usize,
    pub m: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FieldRepr", into = "FieldRepr")]
pub struct SpectralField {
    n: usize,
    l: usize,
    coeffs: Vec<C64>,
    pub parity: Option<Parity>,
}

#[derive(Serialize, Deserialize)]
struct FieldRepr {
    n: usize,
    #[serde(rename = "L")]
    l: usize,
    layout: String,
    re: Vec<f64>,
    im: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parity: Option<Parity>,
}

impl From<SpectralField> for FieldRepr {
    fn from(f: SpectralField) -> Self {
        FieldRepr {
            n: f.n,
            l: f.l,
            layout: layout_name(f.n).to_string(),
            re: f.coeffs.iter().map(|z| z.re).collect(),
            im: f.coeffs.iter().map(|z| z.im).collect(),
            parity: f.parity,
        }
    }
}

impl TryFrom<FieldRepr> for SpectralField {
    type Error = Error;
    fn try_from(r: FieldRepr) -> Result<Self> {
        if r.layout != layout_name(r.n) {
            return Err(Error::Shape(format!("layout {} does not match n = {}", r.layout, r.n)));
        }
        let mut f = SpectralField::zeros(r.n, r.l)?;
        if r.re.len() != f.coeffs.len() || r.im.len() != f.coeffs.len() {
            return Err(Error::Shape(format!("expected {} coefficients", f.coeffs.len())));
        }
        for (k, z) in f.coeffs.iter_mut().enumerate() {
            *z = C64::new(r.re[k], r.im[k]);
        }
        f.parity = r.parity;
        Ok(f)
    }
}

fn layout_name(n: usize) -> &'static str {
    match n {
        1 => "s0-modes",
        2 => "circle-modes",
        _ => "sh-lm",
    }
}

fn storage_len(n: usize, l: usize) -> usize {
    match n {
        1 => 2,
        2 => 2 * l + 1,
        _ => (l + 1) * (l + 1),
    }
}

impl SpectralField {
    pub fn zeros(n: usize, l: usize) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::Unsupported(format!("spectral fields need n in 1..=3, got {n}")));
        }
        let l = if n == 1 { 1 } else { l };
        if l > max_band(n) {
            return Err(Error::BandOverflow { requested: l, max: max_band(n) });
        }
        Ok(SpectralField { n, l, coeffs: vec![ZERO; storage_len(n, l)], parity: None })
    }

    pub fn constant(n: usize, value: C64) -> Result<Self> {
        let mut f = Self::zeros(n, 0)?;
        f.set(Mode { l: 0, m: 0 }, value * constant_scale(n));
        Ok(f)
    }

    /// The coordinate function `u_j` (0-based `j`).
    pub fn coordinate(n: usize, j: usize) -> Result<Self> {
        if j >= n {
            return Err(Error::Dimension(format!("coordinate {j} in n = {n}")));
        }
        let mut f = Self::zeros(n, 1)?;
        match n {
            1 => f.coeffs[1] = C64::new(1.0, 0.0),
            2 => {
                if j == 0 {
                    f.set(Mode { l: 1, m: 1 }, C64::new(0.5, 0.0));
                    f.set(Mode { l: 1, m: -1 }, C64::new(0.5, 0.0));
                } else {
                    f.set(Mode { l: 1, m: 1 }, C64::new(0.0, -0.5));
                    f.set(Mode { l: 1, m: -1 }, C64::new(0.0, 0.5));
                }
            }
            _ => {
                let a = (2.0 * PI / 3.0).sqrt();
                match j {
                    0 => {
                        f.set(Mode { l: 1, m: -1 }, C64::new(a, 0.0));
                        f.set(Mode { l: 1, m: 1 }, C64::new(-a, 0.0));
                    }
                    1 => {
                        f.set(Mode { l: 1, m: -1 }, C64::new(0.0, a));
                        f.set(Mode { l: 1, m: 1 }, C64::new(0.0, a));
                    }
                    _ => f.set(Mode { l: 1, m: 0 }, C64::new((4.0 * PI / 3.0).sqrt(), 0.0)),
                }
            }
        }
        Ok(f)
    }

    /// Band-limited projection of a function given pointwise on the sphere.
    pub fn from_fn(n: usize, l: usize, f: impl Fn(&[f64]) -> C64) -> Result<Self> {
        Self::from_fn_with_quadrature(n, l, l, f)
    }

    /// As [`from_fn`](Self::from_fn) with an explicit quadrature band `lq ≥ l`.
    pub fn from_fn_with_quadrature(n: usize, l: usize, lq: usize, f: impl Fn(&[f64]) -> C64) -> Result<Self> {
        let grid = grid_for(n, lq.max(l))?;
        let samples: Vec<C64> = grid.nodes.iter().map(|u| f(&u[..n])).collect();
        analyze(&samples, &grid, l)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn band_limit(&self) -> usize {
        self.l
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    fn index(&self, mode: Mode) -> Option<usize> {
        match self.n {
            1 => (mode.m == 0 && mode.l <= 1).then_some(mode.l),
            2 => (mode.m.unsigned_abs() as usize <= self.l).then(|| (mode.m + self.l as i64) as usize),
            _ => (mode.l <= self.l && mode.m.unsigned_abs() as usize <= mode.l)
                .then(|| mode.l * mode.l + mode.l)
                .map(|b| (b as i64 + mode.m) as usize),
        }
    }

    pub fn mode_of(&self, idx: usize) -> Mode {
        match self.n {
            1 => Mode { l: idx, m: 0 },
            2 => {
                let m = idx as i64 - self.l as i64;
                Mode { l: m.unsigned_abs() as usize, m }
            }
            _ => {
                let l = (idx as f64).sqrt().floor() as usize;
                Mode { l, m: idx as i64 - (l * l + l) as i64 }
            }
        }
    }

    /// Coefficient of a mode, zero outside the band.
    pub fn get(&self, mode: Mode) -> C64 {
        self.index(mode).map(|i| self.coeffs[i]).unwrap_or(ZERO)
    }

    /// Circle coefficient `c_m`.
    pub fn circle(&self, m: i64) -> C64 {
        self.get(Mode { l: m.unsigned_abs() as usize, m })
    }

    pub fn set(&mut self, mode: Mode, value: C64) {
        let i = self.index(mode).expect("mode outside band");
        self.coeffs[i] = value;
    }

    pub fn modes(&self) -> impl Iterator<Item = (Mode, C64)> + '_ {
        self.coeffs.iter().enumerate().map(move |(i, z)| (self.mode_of(i), *z))
    }

    /// Same field with a different band limit (truncating or zero padding).
    pub fn with_band(&self, l: usize) -> Result<Self> {
        let mut out = Self::zeros(self.n, l)?;
        for (mode, z) in self.modes() {
            if let Some(i) = out.index(mode) {
                out.coeffs[i] = z;
            }
        }
        out.parity = self.parity;
        Ok(out)
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|z| *z *= s);
        out
    }

    /// `self + s·other`, padded to the larger band.
    pub fn axpy(&self, s: C64, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Dimension(format!("{} vs {}", self.n, other.n)));
        }
        let mut out = self.with_band(self.l.max(other.l))?;
        for (mode, z) in other.modes() {
            let i = out.index(mode).unwrap();
            out.coeffs[i] += s * z;
        }
        out.parity = if self.parity == other.parity { self.parity } else { None };
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(C64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(C64::new(-1.0, 0.0), other)
    }

    /// Multiply each mode by `k(mode)`.
    pub fn map_modes(&self, k: impl Fn(Mode) -> C64) -> Self {
        let mut out = self.clone();
        for i in 0..out.coeffs.len() {
            let mode = out.mode_of(i);
            out.coeffs[i] *= k(mode);
        }
        out
    }

    /// `u ↦ f(-u)`.
    pub fn antipodal(&self) -> Self {
        self.map_modes(|md| if md.l % 2 == 0 { C64::new(1.0, 0.0) } else { C64::new(-1.0, 0.0) })
    }

    /// Even or odd part.
    pub fn parity_part(&self, p: Parity) -> Self {
        let keep = if p == Parity::Even { 0 } else { 1 };
        let mut out = self.map_modes(|md| if md.l % 2 == keep { C64::new(1.0, 0.0) } else { ZERO });
        out.parity = Some(p);
        out
    }

    /// Heat-kernel smoothing.
    pub fn mollify(&self, eps: f64) -> Self {
        let n = self.n;
        self.map_modes(|md| {
            let ev = match n {
                1 => 0.0,
                2 => (md.m * md.m) as f64,
                _ => (md.l * (md.l + 1)) as f64,
            };
            C64::new((-eps * ev).exp(), 0.0)
        })
    }

    /// `∫ f dσ`.
    pub fn integral(&self) -> C64 {
        self.get(Mode { l: 0, m: 0 }) * (sphere_area(self.n) / constant_scale(self.n))
    }

    /// `∫ f·conj(g) dσ`.
    pub fn inner(&self, other: &Self) -> C64 {
        let w = mode_weight(self.n);
        let mut acc = ZERO;
        for (mode, z) in self.modes() {
            acc += z * other.get(mode).conj();
        }
        acc * w
    }

    pub fn l2_norm(&self) -> f64 {
        (self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>() * mode_weight(self.n)).sqrt()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Complex conjugate field `conj(f(u))`.
    pub fn conj(&self) -> Self {
        let mut out = Self::zeros(self.n, self.l).unwrap();
        for (mode, z) in self.modes() {
            let (target, s) = match self.n {
                1 => (mode, 1.0),
                2 => (Mode { l: mode.l, m: -mode.m }, 1.0),
                _ => (Mode { l: mode.l, m: -mode.m }, if mode.m % 2 == 0 { 1.0 } else { -1.0 }),
            };
            out.set(target, z.conj() * s);
        }
        out.parity = self.parity;
        out
    }

    /// Largest violation of the real-field coefficient symmetry.
    pub fn imaginary_defect(&self) -> f64 {
        self.sub(&self.conj()).map(|d| d.max_abs_coeff()).unwrap_or(f64::INFINITY) * 0.5
    }

    /// Pointwise value at a unit vector.
    pub fn eval_at(&self, u: &[f64]) -> C64 {
        match self.n {
            1 => self.coeffs[0] + self.coeffs[1] * u[0].signum(),
            2 => {
                let th = u[1].atan2(u[0]);
                let mut acc = ZERO;
                for (mode, z) in self.modes() {
                    acc += z * C64::from_polar(1.0, mode.m as f64 * th);
                }
                acc
            }
            _ => {
                let x = u[2].clamp(-1.0, 1.0);
                let s = (1.0 - x * x).max(0.0).sqrt();
                let ph = u[1].atan2(u[0]);
                let (p, _) = legendre_table(x, s, self.l, false);
                let mut acc = ZERO;
                for (mode, z) in self.modes() {
                    acc += z * ylm_from_table(&p, mode, ph);
                }
                acc
            }
        }
    }
}

/// Area of `S^{n-1}`.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    }
}

fn constant_scale(n: usize) -> f64 {
    match n {
        1 | 2 => 1.0,
        _ => (4.0 * PI).sqrt(),
    }
}

/// `∫|f|² = weight · Σ|c|²`.
fn mode_weight(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 1.0,
    }
}

fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Orthonormal associated Legendre functions `P̄_l^m(x)` for `0 ≤ m ≤ l ≤ lmax`,
/// and optionally their θ-derivatives.
pub(crate) fn legendre_table(x: f64, s: f64, lmax: usize, with_deriv: bool) -> (Vec<f64>, Vec<f64>) {
    let mut p = vec![0.0; tri(lmax, lmax) + 1];
    p[0] = 1.0 / (4.0 * PI).sqrt();
    for m in 1..=lmax {
        let mf = m as f64;
        p[tri(m, m)] = -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * p[tri(m - 1, m - 1)];
    }
    for m in 0..lmax {
        p[tri(m + 1, m)] = (2.0 * m as f64 + 3.0).sqrt() * x * p[tri(m, m)];
    }
    for m in 0..=lmax {
        for l in m + 2..=lmax {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            p[tri(l, m)] = a * (x * p[tri(l - 1, m)] - b * p[tri(l - 2, m)]);
        }
    }
    let mut dp = Vec::new();
    if with_deriv {
        dp = vec![0.0; p.len()];
        for l in 1..=lmax {
            for m in 0..=l {
                let (lf, mf) = (l as f64, m as f64);
                let prev = if m < l { p[tri(l - 1, m)] } else { 0.0 };
                let k = ((2.0 * lf + 1.0) / (2.0 * lf - 1.0) * (lf * lf - mf * mf)).sqrt();
                dp[tri(l, m)] = (lf * x * p[tri(l, m)] - k * prev) / s;
            }
        }
    }
    (p, dp)
}

fn legendre_signed(p: &[f64], mode: Mode) -> f64 {
    let am = mode.m.unsigned_abs() as usize;
    let v = p[tri(mode.l, am)];
    if mode.m < 0 && am % 2 == 1 {
        -v
    } else {
        v
    }
}

fn ylm_from_table(p: &[f64], mode: Mode, phi: f64) -> C64 {
    C64::from_polar(1.0, mode.m as f64 * phi) * legendre_signed(p, mode)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; k];
    let mut ws = vec![0.0; k];
    let kf = k as f64;
    for i in 0..k.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (kf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=k {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let pk = if k == 0 { 1.0 } else if k == 1 { x } else { p1 };
            let pkm1 = if k == 1 { 1.0 } else { p0 };
            dp = kf * (x * pk - pkm1) / (x * x - 1.0);
            let dx = pk / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        xs[i] = x;
        xs[k - 1 - i] = -x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        ws[i] = w;
        ws[k - 1 - i] = w;
    }
    (xs, ws)
}

/// Quadrature grid integrating harmonics of degree `≤ 2·lq + 1` exactly.
#[derive(Debug)]
pub struct SphereGrid {
    pub n: usize,
    pub lq: usize,
    /// Unit nodes, zero padded to three components.
    pub nodes: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    n_theta: usize,
    n_phi: usize,
    xs: Vec<f64>,
    sins: Vec<f64>,
    roots: Vec<C64>,
    leg: Vec<Vec<f64>>,
    dleg: Vec<Vec<f64>>,
}

impl SphereGrid {
    fn build(n: usize, lq: usize) -> Self {
        match n {
            1 => SphereGrid {
                n,
                lq,
                nodes: vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]],
                weights: vec![1.0, 1.0],
                n_theta: 1,
                n_phi: 2,
                xs: vec![],
                sins: vec![],
                roots: vec![],
                leg: vec![],
                dleg: vec![],
            },
            2 => {
                let np = 2 * lq + 2;
                let roots: Vec<C64> = (0..np).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / np as f64)).collect();
                let nodes = roots.iter().map(|z| [z.re, z.im, 0.0]).collect();
                SphereGrid {
                    n,
                    lq,
                    nodes,
                    weights: vec![2.0 * PI / np as f64; np],
                    n_theta: 1,
                    n_phi: np,
                    xs: vec![],
                    sins: vec![],
                    roots,
                    leg: vec![],
                    dleg: vec![],
                }
            }
            _ => {
                let nt = lq + 1;
                let np = 2 * lq + 2;
                let (xs, ws) = gauss_legendre(nt);
                let sins: Vec<f64> = xs.iter().map(|x| (1.0 - x * x).sqrt()).collect();
                let roots: Vec<C64> = (0..np).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / np as f64)).collect();
                let mut nodes = Vec::with_capacity(nt * np);
                let mut weights = Vec::with_capacity(nt * np);
                let mut leg = Vec::with_capacity(nt);
                let mut dleg = Vec::with_capacity(nt);
                for i in 0..nt {
                    for r in &roots {
                        nodes.push([sins[i] * r.re, sins[i] * r.im, xs[i]]);
                        weights.push(ws[i] * 2.0 * PI / np as f64);
                    }
                    let (p, dp) = legendre_table(xs[i], sins[i], lq, true);
                    leg.push(p);
                    dleg.push(dp);
                }
                SphereGrid { n, lq, nodes, weights, n_theta: nt, n_phi: np, xs, sins, roots, leg, dleg }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Sum of the quadrature weights (area of the sphere).
    pub fn area(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn root(&self, m: i64, j: usize) -> C64 {
        let k = (m * j as i64).rem_euclid(self.n_phi as i64) as usize;
        self.roots[k]
    }

    pub fn integrate(&self, samples: &[C64]) -> C64 {
        samples.iter().zip(&self.weights).map(|(s, w)| s * w).sum()
    }
}

type GridCache = Mutex<HashMap<(usize, usize), Arc<SphereGrid>>>;

/// Cached grid for dimension `n` and quadrature band `lq`.
pub fn grid_for(n: usize, lq: usize) -> Result<Arc<SphereGrid>> {
    if !(1..=3).contains(&n) {
        return Err(Error::Unsupported(format!("no sphere grid for n = {n}")));
    }
    let lq = if n == 1 { 1 } else { lq };
    if lq > 2 * max_band(n) + 2 {
        return Err(Error::BandOverflow { requested: lq, max: 2 * max_band(n) + 2 });
    }
    static CACHE: OnceLock<GridCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(g) = cache.lock().unwrap().get(&(n, lq)) {
        return Ok(g.clone());
    }
    let g = Arc::new(SphereGrid::build(n, lq));
    cache.lock().unwrap().insert((n, lq), g.clone());
    Ok(g)
}

fn check_grid(f: &SpectralField, grid: &SphereGrid) -> Result<()> {
    if f.n != grid.n {
        return Err(Error::Dimension(format!("field n = {} on grid n = {}", f.n, grid.n)));
    }
    if f.n == 3 && f.l > grid.lq {
        return Err(Error::Precondition(format!("band {} above grid band {}", f.l, grid.lq)));
    }
    Ok(())
}

/// Values at the grid nodes.
pub fn synthesize(f: &SpectralField, grid: &SphereGrid) -> Result<Vec<C64>> {
    check_grid(f, grid)?;
    Ok(match f.n {
        1 => vec![f.coeffs[0] + f.coeffs[1], f.coeffs[0] - f.coeffs[1]],
        2 => (0..grid.n_phi)
            .map(|j| f.modes().map(|(md, z)| z * grid.root(md.m, j)).sum())
            .collect(),
        _ => {
            let mut out = Vec::with_capacity(grid.len());
            for i in 0..grid.n_theta {
                let a = ring_coefficients(f, &grid.leg[i]);
                for j in 0..grid.n_phi {
                    out.push(ring_sum(&a, f.l, grid, j));
                }
            }
            out
        }
    })
}

fn ring_coefficients(f: &SpectralField, p: &[f64]) -> Vec<C64> {
    let l = f.l as i64;
    let mut a = vec![ZERO; 2 * f.l + 1];
    for (mode, z) in f.modes() {
        a[(mode.m + l) as usize] += z * legendre_signed(p, mode);
    }
    a
}

fn ring_sum(a: &[C64], l: usize, grid: &SphereGrid, j: usize) -> C64 {
    a.iter().enumerate().map(|(k, z)| z * grid.root(k as i64 - l as i64, j)).sum()
}

/// Tangential gradient of `f` at the grid nodes, in ambient coordinates.
pub fn synthesize_gradient(f: &SpectralField, grid: &SphereGrid) -> Result<Vec<[C64; 3]>> {
    check_grid(f, grid)?;
    Ok(match f.n {
        1 => vec![[ZERO; 3]; 2],
        2 => (0..grid.n_phi)
            .map(|j| {
                let d: C64 = f.modes().map(|(md, z)| z * I * md.m as f64 * grid.root(md.m, j)).sum();
                let u = grid.nodes[j];
                [d * -u[1], d * u[0], ZERO]
            })
            .collect(),
        _ => {
            let l = f.l as i64;
            let mut out = Vec::with_capacity(grid.len());
            for i in 0..grid.n_theta {
                let (x, s) = (grid.xs[i], grid.sins[i]);
                let mut da = vec![ZERO; 2 * f.l + 1];
                let mut pa = vec![ZERO; 2 * f.l + 1];
                for (mode, z) in f.modes() {
                    let k = (mode.m + l) as usize;
                    da[k] += z * legendre_signed(&grid.dleg[i], mode);
                    pa[k] += z * I * mode.m as f64 * legendre_signed(&grid.leg[i], mode) / s;
                }
                for j in 0..grid.n_phi {
                    let ft = ring_sum(&da, f.l, grid, j);
                    let fp = ring_sum(&pa, f.l, grid, j);
                    let r = grid.roots[j];
                    let e_theta = [x * r.re, x * r.im, -s];
                    let e_phi = [-r.im, r.re, 0.0];
                    out.push([
                        ft * e_theta[0] + fp * e_phi[0],
                        ft * e_theta[1] + fp * e_phi[1],
                        ft * e_theta[2] + fp * e_phi[2],
                    ]);
                }
            }
            out
        }
    })
}

/// Harmonic coefficients up to band `l` from samples at the grid nodes.
pub fn analyze(samples: &[C64], grid: &SphereGrid, l: usize) -> Result<SpectralField> {
    if samples.len() != grid.len() {
        return Err(Error::Shape(format!("{} samples for {} nodes", samples.len(), grid.len())));
    }
    if grid.n != 1 && l > grid.lq {
        return Err(Error::Precondition(format!("band {l} above grid band {}", grid.lq)));
    }
    let mut out = SpectralField::zeros(grid.n, l)?;
    match grid.n {
        1 => {
            out.coeffs[0] = (samples[0] + samples[1]) * 0.5;
            out.coeffs[1] = (samples[0] - samples[1]) * 0.5;
        }
        2 => {
            let np = grid.n_phi as f64;
            for k in 0..out.coeffs.len() {
                let m = k as i64 - l as i64;
                out.coeffs[k] = samples.iter().enumerate().map(|(j, s)| s * grid.root(-m, j)).sum::<C64>() / np;
            }
        }
        _ => {
            let li = l as i64;
            let dphi = 2.0 * PI / grid.n_phi as f64;
            for i in 0..grid.n_theta {
                let ring = &samples[i * grid.n_phi..(i + 1) * grid.n_phi];
                let w = grid.weights[i * grid.n_phi] / dphi;
                let b: Vec<C64> = (-li..=li)
                    .map(|m| ring.iter().enumerate().map(|(j, s)| s * grid.root(-m, j)).sum::<C64>() * dphi)
                    .collect();
                for k in 0..out.coeffs.len() {
                    let mode = out.mode_of(k);
                    out.coeffs[k] += b[(mode.m + li) as usize] * (w * legendre_signed(&grid.leg[i], mode));
                }
            }
        }
    }
    Ok(out)
}

/// Band needed to resolve a product of fields with the given bands.
fn checked_band(n: usize, l: usize) -> Result<usize> {
    if n == 1 {
        return Ok(1);
    }
    if l > max_band(n) {
        return Err(Error::BandOverflow { requested: l, max: max_band(n) });
    }
    Ok(l)
}

/// `g` with `∂_j(|y|^r f(y/|y|)) = |y|^{r-1} g(y/|y|)`; raises the band by one.
pub fn ambient_partial(f: &SpectralField, r: i32, j: usize) -> Result<SpectralField> {
    if j >= f.n {
        return Err(Error::Dimension(format!("coordinate {j} in n = {}", f.n)));
    }
    Ok(ambient_gradient(f, r)?.swap_remove(j))
}

/// All `n` ambient partials of `|y|^r f(y/|y|)` in one pass.
pub fn ambient_gradient(f: &SpectralField, r: i32) -> Result<Vec<SpectralField>> {
    let l_out = checked_band(f.n, f.l + 1)?;
    let grid = grid_for(f.n, l_out)?;
    let vals = synthesize(f, &grid)?;
    let grads = synthesize_gradient(f, &grid)?;
    (0..f.n)
        .map(|j| {
            let samples: Vec<C64> = (0..grid.len())
                .map(|k| vals[k] * (r as f64 * grid.nodes[k][j]) + grads[k][j])
                .collect();
            analyze(&samples, &grid, l_out)
        })
        .collect()
}

/// Evaluate several fields of the same dimension at one point.
pub fn eval_fields_at(fields: &[&SpectralField], u: &[f64]) -> Vec<C64> {
    let Some(first) = fields.first() else {
        return Vec::new();
    };
    if first.n != 3 {
        return fields.iter().map(|f| f.eval_at(u)).collect();
    }
    let lmax = fields.iter().map(|f| f.l).max().unwrap_or(0);
    let x = u[2].clamp(-1.0, 1.0);
    let s = (1.0 - x * x).max(0.0).sqrt();
    let ph = u[1].atan2(u[0]);
    let (p, _) = legendre_table(x, s, lmax, false);
    let e: Vec<C64> = (-(lmax as i64)..=lmax as i64).map(|m| C64::from_polar(1.0, m as f64 * ph)).collect();
    fields
        .iter()
        .map(|f| {
            f.modes()
                .map(|(mode, z)| z * e[(mode.m + lmax as i64) as usize] * legendre_signed(&p, mode))
                .sum()
        })
        .collect()
}

/// Random field with coefficients decaying like `(1 + l)^{-2}`.
pub fn random_field<R: rand::Rng + ?Sized>(n: usize, l: usize, rng: &mut R) -> Result<SpectralField> {
    let mut f = SpectralField::zeros(n, l)?;
    for k in 0..f.coeffs.len() {
        let deg = f.mode_of(k).l as f64;
        let s = 1.0 / ((1.0 + deg) * (1.0 + deg));
        f.coeffs[k] = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * s;
    }
    Ok(f)
}

/// Pointwise product, resolved exactly at band `L_f + L_g`.
pub fn multiply(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    if f.n != g.n {
        return Err(Error::Dimension(format!("{} vs {}", f.n, g.n)));
    }
    let l_out = checked_band(f.n, f.l + g.l)?;
    let grid = grid_for(f.n, l_out)?;
    let a = synthesize(f, &grid)?;
    let b = synthesize(g, &grid)?;
    let prod: Vec<C64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    analyze(&prod, &grid, l_out)
}

/// `u_j · f`.
pub fn multiply_coordinate(f: &SpectralField, j: usize) -> Result<SpectralField> {
    multiply(f, &SpectralField::coordinate(f.n, j)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;

    #[test]
    fn circle_examples() {
        let f = SpectralField::from_fn(2, 8, |_| c(1.0, 0.0)).unwrap();
        assert!((f.circle(0) - c(1.0, 0.0)).norm() < 1e-14);
        let g = SpectralField::from_fn(2, 8, |u| {
            let t = u[1].atan2(u[0]);
            c((3.0 * t).cos(), 0.0)
        })
        .unwrap();
        assert!((g.circle(3) - c(0.5, 0.0)).norm() < 1e-14);
        assert!((g.circle(-3) - c(0.5, 0.0)).norm() < 1e-14);
        assert!((g.l2_norm().powi(2) - PI).abs() < 1e-12);
        assert!((f.integral() - c(2.0 * PI, 0.0)).norm() < 1e-13);
        let s = SpectralField::from_fn(3, 4, |u| c(u[2] * u[2], 0.0)).unwrap();
        assert!((s.integral() - c(4.0 * PI / 3.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn sphere_first_harmonic() {
        let f = SpectralField::from_fn(3, 6, |u| c(u[2], 0.0)).unwrap();
        for (mode, z) in f.modes() {
            if mode.l != 1 {
                assert!(z.norm() < 1e-14, "{mode:?} {z}");
            }
        }
        let e = SpectralField::coordinate(3, 2).unwrap();
        assert!(f.sub(&e).unwrap().max_abs_coeff() < 1e-14);
        for j in 0..2 {
            let e = SpectralField::coordinate(3, j).unwrap();
            let g = SpectralField::from_fn(3, 2, |u| c(u[j], 0.0)).unwrap();
            assert!(g.sub(&e).unwrap().max_abs_coeff() < 1e-14);
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((s - 2.0 / 13.0).abs() < 1e-14);
        let s1: f64 = w.iter().sum();
        assert!((s1 - 2.0).abs() < 1e-14);
    }

    #[test]
    fn theta_derivative_matches_finite_difference() {
        let f = SpectralField::from_fn(3, 5, |u| c(u[0] * u[2] * u[2] + u[1], 0.3 * u[0] * u[1])).unwrap();
        let grid = grid_for(3, 7).unwrap();
        let grads = synthesize_gradient(&f, &grid).unwrap();
        let k = 37;
        let u = grid.nodes[k];
        let h = 1e-6;
        for t in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
            let dot = u[0] * t[0] + u[1] * t[1] + u[2] * t[2];
            let tan = [t[0] - dot * u[0], t[1] - dot * u[1], t[2] - dot * u[2]];
            let step = |s: f64| {
                let v = [u[0] + s * tan[0], u[1] + s * tan[1], u[2] + s * tan[2]];
                let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                f.eval_at(&[v[0] / r, v[1] / r, v[2] / r])
            };
            let fd = (step(h) - step(-h)) / (2.0 * h);
            let g = grads[k];
            let an = g[0] * tan[0] + g[1] * tan[1] + g[2] * tan[2];
            assert!((fd - an).norm() < 1e-7, "{fd} vs {an}");
        }
    }
}
