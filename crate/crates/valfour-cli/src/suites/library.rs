//! Seeded test data shared by the suites.

use rand::Rng;
use valfour::homforms::LinMap;
use valfour::sphere::{random_field, Mode, Parity, SpectralField};
use valfour::valuations::{
    crofton_current, intrinsic_current, plane_current, support_density_current, CroftonAtom, CroftonData, Polytope,
    ValCurrent,
};
use valfour::{Result, C64};

/// Real density on the circle without first harmonic; `parity` restricts the modes.
pub fn plane_density<R: Rng + ?Sized>(band: usize, parity: Option<Parity>, rng: &mut R) -> Result<SpectralField> {
    let mut g = SpectralField::zeros(2, band)?;
    for m in 0..=band as i64 {
        let keep = match parity {
            Some(Parity::Even) => m % 2 == 0,
            Some(Parity::Odd) => m % 2 == 1,
            None => true,
        };
        if m == 1 || !keep {
            continue;
        }
        let decay = 1.0 / (1.0 + m as f64);
        if m == 0 {
            g.set(Mode { l: 0, m: 0 }, C64::new(1.0 + rng.random::<f64>(), 0.0));
            continue;
        }
        let c = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * decay;
        g.set(Mode { l: m as usize, m }, c);
        g.set(Mode { l: m as usize, m: -m }, c.conj());
    }
    Ok(g)
}

/// Density on `S^2` without `l = 1` modes.
pub fn sphere_density<R: Rng + ?Sized>(band: usize, rng: &mut R) -> Result<SpectralField> {
    let g = random_field(3, band, rng)?;
    Ok(g.map_modes(|md| if md.l == 1 { C64::default() } else { C64::new(1.0, 0.0) }))
}

/// Even density on `S^{n-1}`, positive mean.
pub fn even_density<R: Rng + ?Sized>(n: usize, band: usize, rng: &mut R) -> Result<SpectralField> {
    let g = match n {
        2 => plane_density(band, Some(Parity::Even), rng)?,
        _ => random_field(3, band, rng)?.parity_part(Parity::Even),
    };
    let mut g = g.scale(C64::new(0.3, 0.0));
    g.set(Mode { l: 0, m: 0 }, C64::new(2.0, 0.0));
    Ok(g)
}

pub fn random_unit<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (0.2..=1.0).contains(&r) {
            return v.iter().map(|x| x / r).collect();
        }
    }
}

/// Monomorphism `R^n → R^m` with entries near a coordinate inclusion.
pub fn random_mono<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<LinMap> {
    let rows = (0..m)
        .map(|r| (0..n).map(|c| if r == c { 1.0 } else { 0.0 } + 0.4 * rng.random_range(-1.0..1.0)).collect())
        .collect();
    LinMap::new(rows)
}

/// Invertible map of `R^n` with condition number kept moderate.
pub fn random_gl<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<LinMap> {
    loop {
        let g = random_mono(n, n, rng)?;
        if g.det().abs() > 0.3 {
            return Ok(g);
        }
    }
}

pub fn random_boxes<R: Rng + ?Sized>(n: usize, count: usize, rng: &mut R) -> Vec<Polytope> {
    (0..count)
        .map(|_| {
            let l: Vec<f64> = (0..n).map(|_| rng.random_range(0.3..3.0)).collect();
            Polytope::cuboid(&l)
        })
        .collect()
}

/// Named valuation currents: intrinsic volumes, plane densities and smoothed Crofton data.
pub fn valuation_library<R: Rng + ?Sized>(band: usize, rng: &mut R) -> Result<Vec<(String, ValCurrent)>> {
    let mut out = vec![
        ("V1(2)".to_string(), intrinsic_current(2, 1)?),
        ("V1(3)".to_string(), intrinsic_current(3, 1)?),
        ("V2(3)".to_string(), intrinsic_current(3, 2)?),
        ("plane-even".to_string(), plane_current(&plane_density(band, Some(Parity::Even), rng)?)?),
        ("plane-odd".to_string(), plane_current(&plane_density(band, Some(Parity::Odd), rng)?)?),
        ("plane-mixed".to_string(), plane_current(&plane_density(band, None, rng)?)?),
        ("support-density(3)".to_string(), support_density_current(&sphere_density(band.min(10), rng)?)?),
        ("crofton-lines(2)".to_string(), crofton_current(&CroftonData::density(2, 1, even_density(2, band, rng)?)?)?),
        ("crofton-lines(3)".to_string(), crofton_current(&CroftonData::density(3, 1, even_density(3, band, rng)?)?)?),
        ("crofton-planes(3)".to_string(), crofton_current(&CroftonData::density(3, 2, even_density(3, band, rng)?)?)?),
    ];
    let atoms2: Vec<CroftonAtom> =
        (0..3).map(|i| CroftonAtom::line(&random_unit(2, rng), 1.0 + i as f64)).collect::<Result<_>>()?;
    let atoms3: Vec<CroftonAtom> =
        (0..3).map(|i| CroftonAtom::line(&random_unit(3, rng), 1.0 + i as f64)).collect::<Result<_>>()?;
    out.push(("smoothed-atoms(2)".to_string(), crofton_current(&CroftonData::atoms(2, 1, atoms2)?.mollified(0.05, band)?)?));
    out.push(("smoothed-atoms(3)".to_string(), crofton_current(&CroftonData::atoms(3, 1, atoms3)?.mollified(0.1, band)?)?));
    Ok(out)
}
