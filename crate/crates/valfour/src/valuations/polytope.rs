//! Polytopes and evaluation of valuations given by a constructor record.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitCircle, UnitSphere};
use serde::{Deserialize, Serialize};

use super::{CroftonData, CroftonMeasure};
use crate::homforms::complement_basis;
use crate::sphere::{gauss_legendre, grid_for, synthesize, SpectralField};
use crate::{Error, Result, C64};

/// Convex hull of finitely many points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    pub n: usize,
    pub vertices: Vec<Vec<f64>>,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counterclockwise hull (monotone chain); collinear points dropped.
fn hull_2d(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut p = points.to_vec();
    p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut h: Vec<[f64; 2]> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = h.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while h.len() >= start + 2 && cross(h[h.len() - 2], h[h.len() - 1], q) <= 0.0 {
                h.pop();
            }
            h.push(q);
        }
        h.pop();
    }
    h
}

fn polygon_area(h: &[[f64; 2]]) -> f64 {
    if h.len() < 3 {
        return 0.0;
    }
    let mut a = 0.0;
    for i in 0..h.len() {
        let (p, q) = (h[i], h[(i + 1) % h.len()]);
        a += p[0] * q[1] - p[1] * q[0];
    }
    a.abs() / 2.0
}

fn polygon_perimeter(h: &[[f64; 2]]) -> f64 {
    match h.len() {
        0 | 1 => 0.0,
        2 => 2.0 * ((h[1][0] - h[0][0]).hypot(h[1][1] - h[0][1])),
        _ => (0..h.len()).map(|i| {
            let (p, q) = (h[i], h[(i + 1) % h.len()]);
            (q[0] - p[0]).hypot(q[1] - p[1])
        }).sum(),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Polytope {
    pub fn new(n: usize, vertices: Vec<Vec<f64>>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Precondition("a polytope needs at least one vertex".into()));
        }
        if vertices.iter().any(|v| v.len() != n) {
            return Err(Error::Dimension(format!("vertices must have {n} coordinates")));
        }
        Ok(Polytope { n, vertices })
    }

    /// `[0, a_1] × ⋯ × [0, a_n]`.
    pub fn cuboid(lengths: &[f64]) -> Self {
        let n = lengths.len();
        let vertices = (0..1usize << n)
            .map(|mask| (0..n).map(|i| if mask >> i & 1 == 1 { lengths[i] } else { 0.0 }).collect())
            .collect();
        Polytope { n, vertices }
    }

    pub fn segment(a: &[f64], b: &[f64]) -> Result<Self> {
        Self::new(a.len(), vec![a.to_vec(), b.to_vec()])
    }

    /// `h_K(u) = max_v ⟨v, u⟩`.
    pub fn support(&self, u: &[f64]) -> f64 {
        self.vertices.iter().map(|v| dot(v, u)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn width(&self, u: &[f64]) -> f64 {
        let m: Vec<f64> = u.iter().map(|x| -x).collect();
        self.support(u) + self.support(&m)
    }

    /// Side lengths if the polytope is an axis-parallel box given by all its corners.
    pub fn as_box(&self) -> Option<Vec<f64>> {
        let n = self.n;
        let lo: Vec<f64> = (0..n).map(|i| self.vertices.iter().map(|v| v[i]).fold(f64::INFINITY, f64::min)).collect();
        let hi: Vec<f64> = (0..n).map(|i| self.vertices.iter().map(|v| v[i]).fold(f64::NEG_INFINITY, f64::max)).collect();
        let scale = hi.iter().zip(&lo).map(|(h, l)| h - l).fold(1e-300, f64::max);
        let tol = 1e-12 * scale;
        let on_corner = |v: &Vec<f64>| (0..n).all(|i| (v[i] - lo[i]).abs() <= tol || (v[i] - hi[i]).abs() <= tol);
        if !self.vertices.iter().all(on_corner) {
            return None;
        }
        let corners = (0..1usize << n).all(|mask| {
            self.vertices.iter().any(|v| {
                (0..n).all(|i| {
                    let want = if mask >> i & 1 == 1 { hi[i] } else { lo[i] };
                    (v[i] - want).abs() <= tol
                })
            })
        });
        corners.then(|| hi.iter().zip(&lo).map(|(h, l)| h - l).collect())
    }

    fn planar(&self, basis: &[Vec<f64>]) -> Vec<[f64; 2]> {
        self.vertices.iter().map(|v| [dot(v, &basis[0]), dot(v, &basis[1])]).collect()
    }

    fn hull(&self) -> Result<Vec<[f64; 2]>> {
        if self.n != 2 {
            return Err(Error::Dimension("planar hull of a non-planar polytope".into()));
        }
        Ok(hull_2d(&self.vertices.iter().map(|v| [v[0], v[1]]).collect::<Vec<_>>()))
    }

    pub fn volume(&self) -> Result<f64> {
        match self.n {
            1 => Ok(self.width(&[1.0])),
            2 => Ok(polygon_area(&self.hull()?)),
            _ => self
                .as_box()
                .map(|d| d.iter().product())
                .ok_or_else(|| Error::Unsupported("volume of a general polytope in R^3".into())),
        }
    }

    /// `vol_{n-k}(P_{E^⊥} K)` for `E` spanned by an orthonormal `k`-frame.
    pub fn projection_volume(&self, frame: &[Vec<f64>]) -> Result<f64> {
        let comp = complement_basis(self.n, frame);
        match comp.len() {
            0 => Ok(1.0),
            1 => Ok(self.width(&comp[0])),
            2 if self.n == 2 => self.volume(),
            2 => Ok(polygon_area(&hull_2d(&self.planar(&comp)))),
            _ => self.volume(),
        }
    }

    /// Intrinsic volume `V_k`.
    pub fn intrinsic_volume(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Ok(1.0);
        }
        if k == self.n {
            return self.volume();
        }
        match (self.n, k) {
            (2, 1) => Ok(polygon_perimeter(&self.hull()?) / 2.0),
            (3, _) => {
                let d = self.as_box().ok_or_else(|| Error::Unsupported("intrinsic volumes of general 3-polytopes".into()))?;
                Ok(match k {
                    1 => d[0] + d[1] + d[2],
                    _ => d[0] * d[1] + d[1] * d[2] + d[2] * d[0],
                })
            }
            _ => Err(Error::Dimension(format!("V_{k} on R^{}", self.n))),
        }
    }
}

/// Constructor record of a valuation that can be evaluated on polytopes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Representation {
    Zero { n: usize, k: usize },
    Euler { n: usize, c: C64 },
    Volume { n: usize, c: C64 },
    Intrinsic { n: usize, k: usize, c: C64 },
    /// `φ(K) = ∫ h_K g dσ`.
    SupportDensity { density: SpectralField },
    Crofton { data: CroftonData },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CroftonMethod {
    MonteCarlo { samples: usize, seed: u64 },
    Quadrature,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[derive(Default)]
pub struct EvalOptions {
    /// `None` picks Monte Carlo for low bands and quadrature otherwise.
    pub crofton: Option<CroftonMethod>,
}


impl EvalOptions {
    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        EvalOptions { crofton: Some(CroftonMethod::MonteCarlo { samples, seed }) }
    }
}

pub fn eval_on_body(rep: &Representation, body: &Polytope) -> Result<C64> {
    eval_on_body_with(rep, body, &EvalOptions::default())
}

fn constant_part(g: &SpectralField) -> Option<C64> {
    let c = g.integral() / crate::sphere::sphere_area(g.dim());
    let rest = g.sub(&SpectralField::constant(g.dim(), c).ok()?).ok()?.l2_norm();
    (rest <= 1e-14 * g.l2_norm().max(1e-300)).then_some(c)
}

fn sphere_quadrature(n: usize, band: usize, f: impl Fn(&[f64], C64) -> C64, g: &SpectralField) -> Result<C64> {
    let grid = match n {
        2 => grid_for(2, (8 * band).max(4096))?,
        _ => grid_for(3, (2 * band + 16).clamp(64, 2 * crate::sphere::MAX_BAND_SPHERE + 2))?,
    };
    let gv = synthesize(g, &grid)?;
    Ok(grid.nodes.iter().zip(&grid.weights).zip(&gv).map(|((u, w), x)| f(&u[..n], *x) * w).sum())
}

/// `∫ h_K g dθ` arc by arc: on the normal cone of each hull vertex `h_K` is linear.
fn support_integral_plane(body: &Polytope, g: &SpectralField) -> Result<C64> {
    let pts: Vec<[f64; 2]> = body.vertices.iter().map(|v| [v[0], v[1]]).collect();
    let h = hull_2d(&pts);
    let (gx, gw) = gauss_legendre(g.band_limit() + 8);
    let arc = |p: [f64; 2], a: f64, len: f64| -> C64 {
        gx.iter()
            .zip(&gw)
            .map(|(x, w)| {
                let t = a + len * (x + 1.0) / 2.0;
                let u = [t.cos(), t.sin()];
                g.eval_at(&u) * ((p[0] * u[0] + p[1] * u[1]) * w * len / 2.0)
            })
            .sum()
    };
    if h.len() == 1 {
        return Ok(arc(h[0], 0.0, PI) + arc(h[0], PI, PI));
    }
    let normal = |p: [f64; 2], q: [f64; 2]| (-(q[0] - p[0])).atan2(q[1] - p[1]);
    let k = h.len();
    let mut acc = C64::default();
    for i in 0..k {
        let a = normal(h[(i + k - 1) % k], h[i]);
        let b = normal(h[i], h[(i + 1) % k]);
        acc += arc(h[i], a, (b - a).rem_euclid(2.0 * PI));
    }
    Ok(acc)
}

pub fn eval_on_body_with(rep: &Representation, body: &Polytope, opts: &EvalOptions) -> Result<C64> {
    let check = |n: usize| {
        if n != body.n {
            return Err(Error::Dimension(format!("valuation on R^{n}, body in R^{}", body.n)));
        }
        Ok(())
    };
    match rep {
        Representation::Zero { n, .. } => {
            check(*n)?;
            Ok(C64::default())
        }
        Representation::Euler { n, c } => {
            check(*n)?;
            Ok(*c)
        }
        Representation::Volume { n, c } => {
            check(*n)?;
            Ok(c * body.volume()?)
        }
        Representation::Intrinsic { n, k, c } => {
            check(*n)?;
            Ok(c * body.intrinsic_volume(*k)?)
        }
        Representation::SupportDensity { density: g } => {
            let n = g.dim();
            check(n)?;
            if let Some(c) = constant_part(g) {
                return Ok(match n {
                    2 => c * 2.0 * body.intrinsic_volume(1)?,
                    _ => c * PI * body.intrinsic_volume(1)?,
                });
            }
            if n == 2 {
                return support_integral_plane(body, g);
            }
            sphere_quadrature(n, g.band_limit(), |u, x| x * body.support(u), g)
        }
        Representation::Crofton { data } => {
            check(data.n)?;
            eval_crofton(data, body, opts)
        }
    }
}

/// `vol(P_{E(v)^⊥} K)` for the subspace indexed by `v`.
fn crofton_term(data: &CroftonData, body: &Polytope, v: &[f64]) -> Result<f64> {
    if data.k == 1 {
        body.projection_volume(&[v.to_vec()])
    } else {
        Ok(body.width(v))
    }
}

fn eval_crofton(data: &CroftonData, body: &Polytope, opts: &EvalOptions) -> Result<C64> {
    match &data.measure {
        CroftonMeasure::Atoms { atoms } => {
            let mut acc = 0.0;
            for a in atoms {
                acc += a.weight * body.projection_volume(&a.frame)?;
            }
            Ok(C64::new(acc, 0.0))
        }
        CroftonMeasure::Density { density } => {
            let n = data.n;
            let method = opts.crofton.unwrap_or(if density.band_limit() <= 24 {
                CroftonMethod::MonteCarlo { samples: 100_000, seed: 0x5eed_0002 }
            } else {
                CroftonMethod::Quadrature
            });
            match method {
                CroftonMethod::MonteCarlo { samples, seed } => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let mut acc = C64::default();
                    for _ in 0..samples {
                        let v: Vec<f64> = match n {
                            2 => UnitCircle.sample(&mut rng).to_vec(),
                            _ => UnitSphere.sample(&mut rng).to_vec(),
                        };
                        acc += density.eval_at(&v) * crofton_term(data, body, &v)?;
                    }
                    Ok(acc / samples as f64)
                }
                CroftonMethod::Quadrature => {
                    let area = crate::sphere::sphere_area(n);
                    let err = std::cell::Cell::new(None);
                    let total = sphere_quadrature(
                        n,
                        density.band_limit(),
                        |u, x| match crofton_term(data, body, u) {
                            Ok(t) => x * t,
                            Err(e) => {
                                err.set(Some(e.to_string()));
                                C64::default()
                            }
                        },
                        density,
                    )?;
                    if let Some(e) = err.take() {
                        return Err(Error::Unsupported(e));
                    }
                    Ok(total / area)
                }
            }
        }
    }
}
