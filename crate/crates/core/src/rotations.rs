//! The rotation group `SO_2(Z/p^rZ)`, its orbits, additive energy of
//! circles and orbits, and the L^2 to L^4 extension inequality.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::hensel::{solve_system, PolySystem};
use crate::ring::vector::{encode, split};
use crate::ring::{DiagonalForm, Modulus, PointSet};
use crate::spectral::{difference_histogram, SpectrumTable, Transformer};
use crate::varieties::{sphere_points, SpherePath, SphereSpec};

/// The matrix `[[a, -b], [b, a]]` with `a^2 + b^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rotation {
    pub a: u64,
    pub b: u64,
}

impl Rotation {
    pub const IDENTITY: Rotation = Rotation { a: 1, b: 0 };

    pub fn is_valid(&self, m: &Modulus) -> bool {
        m.add(m.mul(self.a, self.a), m.mul(self.b, self.b)) == 1 % m.q()
    }

    pub fn compose(&self, m: &Modulus, other: &Rotation) -> Rotation {
        Rotation {
            a: m.sub(m.mul(self.a, other.a), m.mul(self.b, other.b)),
            b: m.add(m.mul(self.a, other.b), m.mul(self.b, other.a)),
        }
    }

    pub fn inverse(&self, m: &Modulus) -> Rotation {
        Rotation {
            a: self.a,
            b: m.neg(self.b),
        }
    }

    pub fn apply(&self, m: &Modulus, x: &[u64]) -> [u64; 2] {
        [
            m.sub(m.mul(self.a, x[0]), m.mul(self.b, x[1])),
            m.add(m.mul(self.b, x[0]), m.mul(self.a, x[1])),
        ]
    }
}

/// `|G_r|`: `p^r (1 + 1/p)` for `p = 3 mod 4`, `p^r (1 - 1/p)` for `p = 1 mod 4`.
pub fn expected_group_order(m: &Modulus) -> u128 {
    let base = m.q() as u128 / m.p() as u128;
    if m.p_mod_4() == 3 {
        base * (m.p() as u128 + 1)
    } else {
        base * (m.p() as u128 - 1)
    }
}

/// All of `G_r`, found by lifting the solutions of `a^2 + b^2 = 1 mod p`.
pub fn rotation_group(m: &Modulus) -> Result<Vec<Rotation>> {
    let sys = PolySystem::from_form(&DiagonalForm::distance(2), 1);
    let mut group: Vec<Rotation> = solve_system(&sys, m)?
        .points()
        .map(|v| Rotation { a: v[0], b: v[1] })
        .collect();
    group.sort_unstable();
    Ok(group)
}

fn require_plane_nonzero(m: &Modulus, x: &[u64]) -> Result<()> {
    if x.len() != 2 {
        return Err(LabError::WrongArity {
            expected: 2,
            found: x.len(),
        });
    }
    if x.iter().all(|&c| c % m.q() == 0) {
        return Err(LabError::ZeroVector);
    }
    Ok(())
}

/// `orb_r(x)` by applying every rotation.
pub fn orbit(group: &[Rotation], m: &Modulus, x: &[u64]) -> Result<PointSet> {
    require_plane_nonzero(m, x)?;
    PointSet::from_points(m, 2, group.iter().map(|g| g.apply(m, x)))
}

pub fn stabilizer(group: &[Rotation], m: &Modulus, x: &[u64]) -> Result<Vec<Rotation>> {
    require_plane_nonzero(m, x)?;
    let x = [x[0] % m.q(), x[1] % m.q()];
    Ok(group.iter().copied().filter(|g| g.apply(m, &x) == x).collect())
}

/// `p^v C_{r-v, |x~|}`, the circle description of an orbit when `p = 3 mod 4`.
pub fn orbit_as_scaled_circle(m: &Modulus, x: &[u64]) -> Result<PointSet> {
    require_plane_nonzero(m, x)?;
    if m.p_mod_4() != 3 {
        return Err(LabError::WrongResidueClass { p: m.p() });
    }
    let (v, prim) = split(m, x)?;
    let inner = m.truncate(m.r() - v);
    let norm = inner.add(inner.mul(prim[0], prim[0]), inner.mul(prim[1], prim[1]));
    let circle = sphere_points(&SphereSpec::circle(&inner, norm), SpherePath::Auto)?;
    let scale = m.pow_p(v);
    PointSet::from_points(
        m,
        2,
        circle.points().map(|w| [w[0] * scale, w[1] * scale]),
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberMax {
    /// `max_{z != 0} #{(x, y) in V^2 : x - y = z}`.
    pub max: u64,
    /// Smallest maximiser in encoding order.
    pub argmax: Vec<u64>,
}

pub fn energy_fiber_max(set: &PointSet) -> Result<FiberMax> {
    let hist = difference_histogram(set, set)?;
    let (idx, &max) = hist
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|(i, a), (j, b)| a.cmp(b).then(j.cmp(i)))
        .unwrap_or((0, &0));
    Ok(FiberMax {
        max,
        argmax: crate::ring::vector::decode(set.modulus().q(), idx as u64, set.arity()),
    })
}

/// Where the weights of a surface measure live.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Carrier {
    Circle { radius: u64 },
    Orbit { generator: Vec<u64>, valuation: u32 },
}

/// A weighted circle or orbit; `weights[i]` sits on the `i`-th carrier point
/// in encoding order.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMeasureView {
    pub carrier: PointSet,
    pub kind: Carrier,
    pub weights: Vec<Complex64>,
}

impl SurfaceMeasureView {
    pub fn circle(m: &Modulus, radius: u64) -> Result<Self> {
        let spec = SphereSpec::circle(m, radius);
        spec.require_unit_radius()?;
        let carrier = sphere_points(&spec, SpherePath::Auto)?;
        Ok(Self::uniform(carrier, Carrier::Circle { radius: spec.radius }))
    }

    /// `orb_r(m)`; for `p = 1 mod 4` the primitive part must have unit norm.
    pub fn orbit(group: &[Rotation], m: &Modulus, generator: &[u64]) -> Result<Self> {
        require_plane_nonzero(m, generator)?;
        let (v, prim) = split(m, generator)?;
        let inner = m.truncate(m.r() - v);
        let norm = inner.add(inner.mul(prim[0], prim[0]), inner.mul(prim[1], prim[1]));
        if !inner.is_unit(norm) {
            return Err(LabError::IsotropicOrbit);
        }
        let carrier = orbit(group, m, generator)?;
        Ok(Self::uniform(
            carrier,
            Carrier::Orbit {
                generator: generator.iter().map(|&c| c % m.q()).collect(),
                valuation: v,
            },
        ))
    }

    fn uniform(carrier: PointSet, kind: Carrier) -> Self {
        let weights = vec![Complex64::new(1.0, 0.0); carrier.len()];
        SurfaceMeasureView {
            carrier,
            kind,
            weights,
        }
    }

    pub fn with_weights(mut self, weights: Vec<Complex64>) -> Result<Self> {
        if weights.len() != self.carrier.len() {
            return Err(LabError::SizeMismatch {
                left: weights.len(),
                right: self.carrier.len(),
            });
        }
        self.weights = weights;
        Ok(self)
    }

    pub fn l2_mass(&self) -> f64 {
        self.weights.iter().map(|w| w.norm_sqr()).sum()
    }

    /// The right-hand side scale `p^{-(r+1)/2}` or `p^{-(r - 3v + 1)/2}`.
    pub fn rhs_scale(&self) -> f64 {
        let m = self.carrier.modulus();
        let (p, r) = (m.p() as f64, m.r() as f64);
        match self.kind {
            Carrier::Circle { .. } => p.powf(-(r + 1.0) / 2.0),
            Carrier::Orbit { valuation, .. } => p.powf(-(r - 3.0 * valuation as f64 + 1.0) / 2.0),
        }
    }

    /// Energy bound `2 p^{r-1}` (circle) or `2 p^{r-v-1}` (orbit), as a real
    /// number since `r - v - 1` may be negative.
    pub fn fiber_bound(&self) -> f64 {
        let m = self.carrier.modulus();
        let (p, r) = (m.p() as f64, m.r() as i32);
        match self.kind {
            Carrier::Circle { .. } => 2.0 * p.powi(r - 1),
            Carrier::Orbit { valuation, .. } => 2.0 * p.powi(r - valuation as i32 - 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

fn report(view: &SurfaceMeasureView, fourth_moment: f64) -> ExtensionReport {
    let lhs = fourth_moment.max(0.0).sqrt();
    let rhs = view.rhs_scale() * view.l2_mass();
    let ratio = if rhs == 0.0 { 0.0 } else { lhs / rhs };
    ExtensionReport { lhs, rhs, ratio }
}

/// `(sum_m |(f dsigma)^v(m)|^4)^{1/2}` against the theorem's right-hand side,
/// through `sum_m |.|^4 = q^2 / |V|^4 sum_z |sum_{x - y = z} f(x) conj f(y)|^2`.
pub fn extension_ratio(view: &SurfaceMeasureView) -> Result<ExtensionReport> {
    let m = view.carrier.modulus();
    let q = m.q();
    let pts = view.carrier.flat_points();
    let size = m.ambient_size(2);
    let mut acc = Accumulator::new(size);
    for (x, fx) in pts.chunks(2).zip(&view.weights) {
        for (y, fy) in pts.chunks(2).zip(&view.weights) {
            let z = encode(q, &[m.sub(x[0], y[0]), m.sub(x[1], y[1])]);
            acc.add(z, fx * fy.conj());
        }
    }
    let v = view.carrier.len() as f64;
    let energy = acc.sum_norm_sqr();
    Ok(report(view, (q as f64).powi(2) / v.powi(4) * energy))
}

enum Accumulator {
    Dense(Vec<Complex64>),
    Sparse(HashMap<u64, Complex64>),
}

impl Accumulator {
    fn new(size: u128) -> Self {
        if size <= 1 << 24 {
            Accumulator::Dense(vec![Complex64::new(0.0, 0.0); size as usize])
        } else {
            Accumulator::Sparse(HashMap::new())
        }
    }

    fn add(&mut self, key: u64, v: Complex64) {
        match self {
            Accumulator::Dense(d) => d[key as usize] += v,
            Accumulator::Sparse(s) => *s.entry(key).or_default() += v,
        }
    }

    fn sum_norm_sqr(&self) -> f64 {
        match self {
            Accumulator::Dense(d) => d.par_iter().map(|z| z.norm_sqr()).sum(),
            Accumulator::Sparse(s) => s.values().map(|z| z.norm_sqr()).sum(),
        }
    }
}

/// The same quantity by transforming `f dsigma` over the whole plane.
pub fn extension_ratio_direct(view: &SurfaceMeasureView) -> Result<ExtensionReport> {
    let m = view.carrier.modulus();
    let transformer = Transformer::new(m, 2)?;
    let mut dense = vec![Complex64::new(0.0, 0.0); m.ambient_size(2) as usize];
    let v = view.carrier.len() as f64;
    for (&k, w) in view.carrier.keys().iter().zip(&view.weights) {
        dense[k as usize] = w / v;
    }
    let table = SpectrumTable {
        modulus: m.clone(),
        arity: 2,
        values: dense,
    };
    let ext = transformer.inverse(&table)?;
    let fourth: f64 = ext.par_iter().map(|z| z.norm_sqr().powi(2)).sum();
    Ok(report(view, fourth))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_orders() {
        for (p, r, size) in [(3, 2, 12), (5, 1, 4), (7, 1, 8)] {
            let m = Modulus::new(p, r).unwrap();
            let g = rotation_group(&m).unwrap();
            assert_eq!(g.len(), size);
            assert_eq!(g.len() as u128, expected_group_order(&m));
            assert!(g.contains(&Rotation::IDENTITY));
        }
    }

    #[test]
    fn orbit_and_stabilizer_examples() {
        let m = Modulus::new(3, 2).unwrap();
        let g = rotation_group(&m).unwrap();
        let orb = orbit(&g, &m, &[3, 0]).unwrap();
        assert_eq!(orb.sorted_points(), vec![vec![0, 3], vec![0, 6], vec![3, 0], vec![6, 0]]);
        assert_eq!(stabilizer(&g, &m, &[3, 0]).unwrap().len(), 3);
        assert_eq!(orbit_as_scaled_circle(&m, &[3, 0]).unwrap(), orb);
        assert_eq!(orbit(&g, &m, &[0, 0]), Err(LabError::ZeroVector));

        let m5 = Modulus::new(5, 1).unwrap();
        let g5 = rotation_group(&m5).unwrap();
        assert_eq!(orbit(&g5, &m5, &[1, 0]).unwrap().len(), 4);
    }

    #[test]
    fn fiber_of_small_circle() {
        let m = Modulus::new(3, 1).unwrap();
        let view = SurfaceMeasureView::circle(&m, 1).unwrap();
        let fm = energy_fiber_max(&view.carrier).unwrap();
        assert_eq!(fm, FiberMax { max: 2, argmax: vec![1, 1] });
    }

    #[test]
    fn extension_worked_example() {
        let m = Modulus::new(3, 1).unwrap();
        let view = SurfaceMeasureView::circle(&m, 1).unwrap();
        let rep = extension_ratio(&view).unwrap();
        assert!((rep.lhs - 9.0 / 8.0).abs() < 1e-12);
        assert!((rep.rhs - 4.0 / 3.0).abs() < 1e-12);
        assert!((rep.ratio - 27.0 / 32.0).abs() < 1e-12);
        let direct = extension_ratio_direct(&view).unwrap();
        assert!((direct.lhs - rep.lhs).abs() < 1e-12);

        let zero = view.clone().with_weights(vec![Complex64::new(0.0, 0.0); 4]).unwrap();
        assert_eq!(extension_ratio(&zero).unwrap().ratio, 0.0);
    }

    #[test]
    fn isotropic_orbit_rejected() {
        let m = Modulus::new(5, 1).unwrap();
        let g = rotation_group(&m).unwrap();
        assert_eq!(
            SurfaceMeasureView::orbit(&g, &m, &[1, 2]).unwrap_err(),
            LabError::IsotropicOrbit
        );
        assert_eq!(
            SurfaceMeasureView::circle(&m, 5).unwrap_err(),
            LabError::NonUnitRadius { j: 0, q: 5 }
        );
    }
}
