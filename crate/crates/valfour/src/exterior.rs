//! Finite exterior algebra over R^n with coordinate blades.
//!
//! Blades are stored as bitmasks; signs of reorderings are computed exactly.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

/// Largest ambient dimension handled by the kernel.
pub const MAX_DIM: usize = 8;

/// Strictly increasing index set, stored as a bitmask over `0..n`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex {
    n: u8,
    bits: u16,
}

impl MultiIndex {
    /// Build from 1-based indices; they must be strictly increasing and within `1..=n`.
    pub fn new(n: usize, indices: &[usize]) -> Result<Self> {
        if n > MAX_DIM {
            return Err(Error::Dimension(format!("n = {n} exceeds {MAX_DIM}")));
        }
        let mut bits = 0u16;
        let mut last = 0usize;
        for &i in indices {
            if i == 0 || i > n || i <= last {
                return Err(Error::Shape(format!("bad multi-index {indices:?} for n = {n}")));
            }
            bits |= 1 << (i - 1);
            last = i;
        }
        Ok(MultiIndex { n: n as u8, bits })
    }

    /// Build from 0-based positions in any order (duplicates rejected).
    pub fn from_positions(n: usize, pos: &[usize]) -> Result<Self> {
        let mut bits = 0u16;
        for &p in pos {
            if p >= n || bits & (1 << p) != 0 {
                return Err(Error::Shape(format!("bad positions {pos:?} for n = {n}")));
            }
            bits |= 1 << p;
        }
        Ok(MultiIndex { n: n as u8, bits })
    }

    pub fn from_bits(n: usize, bits: u16) -> Self {
        debug_assert!(n <= MAX_DIM && (bits as u32) < (1u32 << n));
        MultiIndex { n: n as u8, bits }
    }

    pub fn empty(n: usize) -> Self {
        MultiIndex { n: n as u8, bits: 0 }
    }

    pub fn full(n: usize) -> Self {
        MultiIndex { n: n as u8, bits: ((1u32 << n) - 1) as u16 }
    }

    pub fn dim(&self) -> usize {
        self.n as usize
    }

    pub fn bits(&self) -> u16 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn contains(&self, p: usize) -> bool {
        self.bits & (1 << p) != 0
    }

    /// 0-based positions in increasing order.
    pub fn positions(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&p| self.contains(p)).collect()
    }

    /// 1-based indices in increasing order.
    pub fn indices(&self) -> Vec<usize> {
        self.positions().into_iter().map(|p| p + 1).collect()
    }

    pub fn complement(&self) -> Self {
        MultiIndex { n: self.n, bits: !self.bits & Self::full(self.dim()).bits }
    }

    pub fn with(&self, p: usize) -> Self {
        MultiIndex { n: self.n, bits: self.bits | (1 << p) }
    }

    pub fn without(&self, p: usize) -> Self {
        MultiIndex { n: self.n, bits: self.bits & !(1 << p) }
    }

    /// All index sets of size `k` in lexicographic order of their positions.
    pub fn all_of_size(n: usize, k: usize) -> Vec<Self> {
        let mut out: Vec<Self> = (0u32..(1u32 << n))
            .filter(|b| b.count_ones() as usize == k)
            .map(|b| MultiIndex::from_bits(n, b as u16))
            .collect();
        out.sort_by_key(|m| m.positions());
        out
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.indices())
    }
}

/// Sign of the permutation sorting the concatenation `(a, b)`; zero if they overlap.
pub fn shuffle_sign(a: MultiIndex, b: MultiIndex) -> i32 {
    if a.bits & b.bits != 0 {
        return 0;
    }
    let mut inversions = 0u32;
    for p in a.positions() {
        inversions += (b.bits & ((1u16 << p) - 1)).count_ones();
    }
    if inversions.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `(-1)^e` for a non-negative or negative integer exponent.
pub fn parity_sign(e: i64) -> i32 {
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Orientation and density weights attached to labelled spaces.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitTag {
    pub orientation: BTreeMap<String, u8>,
    pub density: BTreeMap<String, i32>,
}

impl UnitTag {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn or(label: &str) -> Self {
        let mut t = Self::default();
        t.orientation.insert(label.to_string(), 1);
        t
    }

    pub fn dens(label: &str, w: i32) -> Self {
        let mut t = Self::default();
        if w != 0 {
            t.density.insert(label.to_string(), w);
        }
        t
    }

    /// Tensor product of tags: weights add.
    pub fn compose(&self, other: &UnitTag) -> UnitTag {
        let mut out = self.clone();
        for (k, v) in &other.orientation {
            let e = out.orientation.entry(k.clone()).or_insert(0);
            *e = (*e + v) % 2;
        }
        for (k, v) in &other.density {
            *out.density.entry(k.clone()).or_insert(0) += v;
        }
        out.orientation.retain(|_, v| *v != 0);
        out.density.retain(|_, v| *v != 0);
        out
    }

    /// Whether the tag carries an odd orientation weight on `label`.
    pub fn has_or(&self, label: &str) -> bool {
        self.orientation.get(label).copied().unwrap_or(0) == 1
    }

    /// Rewrite `Dens ⊗ or` of `label` as the top exterior power; the tag records it.
    pub fn hodge_rewrite(&self, label: &str) -> UnitTag {
        let mut t = UnitTag::dens(label, 1);
        t.orientation.insert(label.to_string(), 1);
        self.compose(&t)
    }
}

/// Element of the exterior algebra over R^n with complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedCovector<T: Real> {
    n: usize,
    coeffs: BTreeMap<MultiIndex, Complex<T>>,
    pub unit: UnitTag,
}

impl<T: Real> GradedCovector<T> {
    pub fn zero(n: usize) -> Self {
        GradedCovector { n, coeffs: BTreeMap::new(), unit: UnitTag::none() }
    }

    pub fn scalar(n: usize, c: Complex<T>) -> Self {
        Self::blade(n, MultiIndex::empty(n), c)
    }

    pub fn blade(n: usize, idx: MultiIndex, c: Complex<T>) -> Self {
        let mut out = Self::zero(n);
        out.add_term(idx, c);
        out
    }

    /// Coordinate covector dx_i, 1-based.
    pub fn basis(n: usize, i: usize) -> Result<Self> {
        Ok(Self::blade(n, MultiIndex::new(n, &[i])?, Complex::new(T::one(), T::zero())))
    }

    /// Degree-one element with the given real coordinates.
    pub fn from_vector(v: &[T]) -> Self {
        let n = v.len();
        let mut out = Self::zero(n);
        for (p, &x) in v.iter().enumerate() {
            out.add_term(MultiIndex::from_bits(n, 1 << p), Complex::new(x, T::zero()));
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex<T>)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, idx: MultiIndex) -> Complex<T> {
        self.coeffs.get(&idx).copied().unwrap_or_else(|| Complex::new(T::zero(), T::zero()))
    }

    pub fn add_term(&mut self, idx: MultiIndex, c: Complex<T>) {
        let e = self.coeffs.entry(idx).or_insert_with(|| Complex::new(T::zero(), T::zero()));
        *e = *e + c;
        if e.re == T::zero() && e.im == T::zero() {
            self.coeffs.remove(&idx);
        }
    }

    /// Degree if all terms share one.
    pub fn degree(&self) -> Option<usize> {
        let mut it = self.coeffs.keys().map(|k| k.len());
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        let mut out = Self::zero(self.n);
        out.unit = self.unit.clone();
        for (k, v) in &self.coeffs {
            out.add_term(*k, *v * c);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.n, other.n)?;
        let mut out = self.clone();
        for (k, v) in &other.coeffs {
            out.add_term(*k, *v);
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> T {
        self.coeffs.values().fold(T::zero(), |m, c| m.max(c.norm()))
    }
}

fn check_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Dimension(format!("{a} vs {b}")));
    }
    Ok(())
}

pub fn wedge<T: Real>(a: &GradedCovector<T>, b: &GradedCovector<T>) -> Result<GradedCovector<T>> {
    check_dim(a.n, b.n)?;
    let mut out = GradedCovector::zero(a.n);
    out.unit = a.unit.compose(&b.unit);
    for (i, x) in &a.coeffs {
        for (j, y) in &b.coeffs {
            let s = shuffle_sign(*i, *j);
            if s != 0 {
                let idx = MultiIndex::from_bits(a.n, i.bits | j.bits);
                out.add_term(idx, *x * *y * T::from(s).unwrap());
            }
        }
    }
    Ok(out)
}

/// Hodge star for the standard Euclidean structure and orientation: `∗dx_I = sgn(I, I^c) dx_{I^c}`.
pub fn hodge_star<T: Real>(a: &GradedCovector<T>, space_label: &str) -> GradedCovector<T> {
    let mut out = GradedCovector::zero(a.n);
    out.unit = a.unit.hodge_rewrite(space_label);
    for (i, x) in &a.coeffs {
        let c = i.complement();
        out.add_term(c, *x * T::from(shuffle_sign(*i, c)).unwrap());
    }
    out
}

/// Contraction with the vector `v`.
pub fn interior_product<T: Real>(v: &[T], a: &GradedCovector<T>) -> Result<GradedCovector<T>> {
    check_dim(v.len(), a.n)?;
    let mut out = GradedCovector::zero(a.n);
    out.unit = a.unit.clone();
    for (i, x) in &a.coeffs {
        for (slot, p) in i.positions().into_iter().enumerate() {
            let s = if slot % 2 == 0 { T::one() } else { -T::one() };
            out.add_term(i.without(p), *x * (s * v[p]));
        }
    }
    Ok(out)
}

/// Bilinear pairing making the coordinate blades orthonormal.
pub fn pairing<T: Real>(a: &GradedCovector<T>, b: &GradedCovector<T>) -> Result<Complex<T>> {
    check_dim(a.n, b.n)?;
    let mut acc = Complex::new(T::zero(), T::zero());
    for (i, x) in &a.coeffs {
        acc = acc + *x * b.coeff(*i);
    }
    Ok(acc)
}

/// Coefficient of the volume blade.
pub fn top_coefficient<T: Real>(a: &GradedCovector<T>) -> Complex<T> {
    a.coeff(MultiIndex::full(a.n))
}

/// Induced map on `∧^p` for a real matrix (`m[r][c]`, target rows, source columns):
/// image of `e_J` is `Σ_K det(m[K, J]) e_K`.
pub fn minor<T: Real>(m: &[Vec<T>], rows: &[usize], cols: &[usize]) -> T {
    let k = rows.len();
    let mut a: Vec<Vec<T>> = rows.iter().map(|&r| cols.iter().map(|&c| m[r][c]).collect()).collect();
    determinant(&mut a, k)
}

/// Determinant by partial-pivot elimination; destroys its input.
pub fn determinant<T: Real>(a: &mut [Vec<T>], k: usize) -> T {
    let mut det = T::one();
    for c in 0..k {
        let mut piv = c;
        for r in c + 1..k {
            if a[r][c].abs() > a[piv][c].abs() {
                piv = r;
            }
        }
        if a[piv][c] == T::zero() {
            return T::zero();
        }
        if piv != c {
            a.swap(piv, c);
            det = -det;
        }
        det = det * a[c][c];
        for r in c + 1..k {
            let f = a[r][c] / a[c][c];
            for cc in c..k {
                let v = a[c][cc];
                a[r][cc] = a[r][cc] - f * v;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn dx(n: usize, i: &[usize]) -> GradedCovector<f64> {
        GradedCovector::blade(n, MultiIndex::new(n, i).unwrap(), C::new(1.0, 0.0))
    }

    #[test]
    fn basis_wedges() {
        let a = wedge(&dx(2, &[1]), &dx(2, &[2])).unwrap();
        assert_eq!(a, dx(2, &[1, 2]));
        assert_eq!(wedge(&dx(2, &[1]), &dx(2, &[1])).unwrap(), GradedCovector::zero(2));
        assert_eq!(wedge(&dx(2, &[2]), &dx(2, &[1])).unwrap(), dx(2, &[1, 2]).scale(C::new(-1.0, 0.0)));
    }

    #[test]
    fn star_examples() {
        assert_eq!(hodge_star(&dx(2, &[1]), "V").coeff(MultiIndex::new(2, &[2]).unwrap()), C::new(1.0, 0.0));
        assert_eq!(hodge_star(&dx(3, &[1, 2]), "V").coeff(MultiIndex::new(3, &[3]).unwrap()), C::new(1.0, 0.0));
        let twice = hodge_star(&hodge_star(&dx(3, &[1, 2]), "V*"), "V");
        assert_eq!(twice.coeff(MultiIndex::new(3, &[1, 2]).unwrap()), C::new(1.0, 0.0));
    }

    #[test]
    fn contraction_examples() {
        let v = [0.3, -1.7];
        let c = interior_product(&v, &dx(2, &[1, 2])).unwrap();
        assert_eq!(c.coeff(MultiIndex::new(2, &[2]).unwrap()), C::new(0.3, 0.0));
        assert_eq!(c.coeff(MultiIndex::new(2, &[1]).unwrap()), C::new(1.7, 0.0));
        let one = GradedCovector::scalar(2, C::new(1.0, 0.0));
        assert_eq!(interior_product(&v, &one).unwrap(), GradedCovector::zero(2));
        let w = [0.2, 0.5, -0.9];
        let twice = interior_product(&w, &interior_product(&w, &dx(3, &[1, 2, 3])).unwrap()).unwrap();
        assert!(twice.max_abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        assert!(wedge(&dx(2, &[1]), &dx(3, &[1])).is_err());
        assert!(MultiIndex::new(3, &[2, 1]).is_err());
        assert!(MultiIndex::new(3, &[4]).is_err());
    }

    #[test]
    fn unit_tags_add() {
        let a = UnitTag::or("V");
        let b = UnitTag::or("V").compose(&UnitTag::dens("V", 1));
        let c = a.compose(&b);
        assert!(!c.has_or("V"));
        assert_eq!(c.density.get("V"), Some(&1));
    }

    #[test]
    fn minors_of_identity() {
        let m = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert_eq!(minor(&m, &[0, 2], &[0, 2]), 1.0);
        assert_eq!(minor(&m, &[0, 1], &[0, 2]), 0.0);
    }
}
