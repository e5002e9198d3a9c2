//! Pullback along monomorphisms, pushforward along epimorphisms and the `GL` action.

use serde_json::json;

use super::{re, Provenance, ValCurrent, VAL_LABEL};
use crate::exterior::{MultiIndex, UnitTag};
use crate::homforms::{
    complement_basis, gl_pullback, orthonormal_columns, pullback_mono_delta, pullback_mono_smooth, pushforward_spectral,
    HomForm, LinMap, MapKind,
};
use crate::{Error, Result, C64};

const DELTA_TOL: f64 = 1e-8;

fn finish(mut t: HomForm, op: &str, params: serde_json::Value) -> Result<ValCurrent> {
    t.label = VAL_LABEL.to_string();
    let dens = t.unit.density.clone();
    t.unit = UnitTag::or(VAL_LABEL);
    t.unit.density = dens;
    ValCurrent::new(t, Provenance::new(op, params))
}

/// `g^*φ` for `g ∈ GL(n)`: `φ ↦ (K ↦ φ(gK))`.
pub fn gl_action(g: &LinMap, phi: &ValCurrent) -> Result<ValCurrent> {
    if g.kind != MapKind::Iso || g.rows() != phi.dim() {
        return Err(Error::Singular(format!("GL action needs an invertible {0}×{0} map", phi.dim())));
    }
    let t = gl_pullback(&g.transpose().inverse()?, phi.current())?;
    let mut t = t;
    t.unit = phi.current().unit.clone();
    ValCurrent::new(t, Provenance::new("gl-action", json!({ "source": phi.provenance.op })))
}

/// `f = QR` with `Q` of orthonormal columns spanning the image of `f` and `R = QᵀF` square.
fn orthonormal_factor(f: &LinMap) -> Result<(LinMap, LinMap)> {
    let (n, j) = (f.rows(), f.cols());
    let cols: Vec<Vec<f64>> = (0..j).map(|c| (0..n).map(|r| f.entry(r, c)).collect()).collect();
    let (qc, _) = orthonormal_columns(&cols)?;
    let q = LinMap::new((0..n).map(|r| qc.iter().map(|c| c[r]).collect()).collect())?;
    let r = q.transpose().compose(f)?;
    Ok((q, r))
}

/// `f^*φ` for a monomorphism `f: R^j → R^n`.
///
/// With `f = QR`, `f^*φ = R^*(Q^*φ)`. `Q` is completed to an orthogonal `g = [Q | e]`;
/// then `Q^*φ = ι^* g^*φ` with `ι` the coordinate inclusion, and `ι^*` integrates the
/// current over the last coordinates and drops them from the value slot.
pub fn pullback_val(f: &LinMap, phi: &ValCurrent) -> Result<ValCurrent> {
    let n = phi.dim();
    if f.rows() != n || f.kind == MapKind::Epi {
        return Err(Error::Shape(format!("pullback needs a monomorphism into R^{n}")));
    }
    let j = f.cols();
    if phi.degree() > j {
        return Err(Error::Precondition(format!("degree {} valuation restricts to zero on R^{j}", phi.degree())));
    }
    if j == n {
        return gl_action(f, phi);
    }
    let params = json!({ "source": phi.provenance.op, "from": j, "to": n });
    if !f.has_orthonormal_columns(1e-12) {
        let (q, r) = orthonormal_factor(f)?;
        let mut out = gl_action(&r, &pullback_val(&q, phi)?)?;
        out.provenance = Provenance::new("pullback", params);
        return Ok(out);
    }
    let cols: Vec<Vec<f64>> = (0..j).map(|c| (0..n).map(|r| f.entry(r, c)).collect()).collect();
    let comp = complement_basis(n, &cols);
    let m: Vec<Vec<f64>> = (0..n)
        .map(|r| cols.iter().chain(&comp).map(|c| c[r]).collect())
        .collect();
    let g = LinMap::new(m)?;
    let mut t = gl_pullback(&g, phi.current())?;
    for d in (j..n).rev() {
        t = pushforward_spectral(&t)?;
        t = t.map_values(&LinMap::coordinate_projection(d + 1, d))?;
    }
    finish(t, "pullback", params)
}

/// `e_L ↦ sgn(L^c, L) e_{L^c}`, inverse of the value star.
fn unstar_values(w: &HomForm) -> Result<HomForm> {
    let vd = w.value_dim();
    let mut out =
        HomForm::with_value_dim(w.dim(), vd, &w.label, w.form_degree(), vd - w.value_degree(), 0, w.band_limit())?;
    out.unit = w.unit.clone();
    for ((i, l), g) in w.coeffs() {
        let s = super::sgn(l.complement(), *l);
        out.insert((*i, l.complement()), g.scale(re(s)))?;
    }
    for (l, a) in w.atoms() {
        out.add_atom(l.complement(), a * super::sgn(l.complement(), *l))?;
    }
    Ok(out)
}

/// `f_*φ` for an epimorphism `f: R^n → R^m`: star the values, restrict along `f^T`,
/// map the values by `f` and unstar. With `fᵀ = QR`, `f_* = (Rᵀ)_*(Qᵀ)_*`.
pub fn pushforward_val(f: &LinMap, phi: &ValCurrent) -> Result<ValCurrent> {
    let n = phi.dim();
    if f.cols() != n || f.kind == MapKind::Mono {
        return Err(Error::Shape(format!("pushforward needs an epimorphism out of R^{n}")));
    }
    let m = f.rows();
    if m == n {
        return gl_action(&f.inverse()?, phi);
    }
    let k = phi.degree();
    let params = json!({ "source": phi.provenance.op, "from": n, "to": m });
    if !f.transpose().has_orthonormal_columns(1e-12) {
        let (q, r) = orthonormal_factor(&f.transpose())?;
        let inner = pushforward_val(&q.transpose(), phi)?;
        let mut out = pushforward_val(&r.transpose(), &inner)?;
        let mut params = params;
        if let Some(spread) = inner.provenance.params.get("spread") {
            params["spread"] = spread.clone();
        }
        out.provenance = Provenance::new("pushforward", params);
        return Ok(out);
    }
    if k + m < n {
        let mut z = ValCurrent::zero(m, 0)?;
        z.provenance = Provenance::new("pushforward", params);
        return Ok(z);
    }
    let q = n - k;
    let starred = phi.current().star_values()?;
    let ft = f.transpose();
    if q < m {
        let r = pullback_mono_smooth(&ft, &starred)?;
        let r = r.map_values(f)?;
        return finish(unstar_values(&r)?, "pushforward", params);
    }
    let d = pullback_mono_delta(&ft, &starred, DELTA_TOL)?;
    let full = MultiIndex::full(m);
    let mut c = C64::default();
    for (jj, z) in &d.values {
        c += z * f.minor(&full, jj);
    }
    let mut t = HomForm::new(m, VAL_LABEL, m, 0, 0, 0)?;
    t.set_atom(Some(c))?;
    let mut params = params;
    params["spread"] = json!(d.spread);
    finish(t, "pushforward", params)
}
