//! Spheres `S_{r,j} = {z : F(z) = j}` and the plane circles `C_{r,j}`.

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::hensel::{solve_system, PolySystem};
use crate::limits::check_search;
use crate::ring::vector::{all_vectors, decode_into, encode};
use crate::ring::{DiagonalForm, Modulus, PointSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereSpec {
    pub form: DiagonalForm,
    pub modulus: Modulus,
    pub radius: u64,
}

impl SphereSpec {
    pub fn new(form: DiagonalForm, modulus: Modulus, radius: u64) -> Result<Self> {
        form.bind(&modulus)?;
        let radius = radius % modulus.q();
        Ok(SphereSpec {
            form,
            modulus,
            radius,
        })
    }

    /// The plane circle `x^2 + y^2 = j`.
    pub fn circle(modulus: &Modulus, j: u64) -> Self {
        SphereSpec::new(DiagonalForm::distance(2), modulus.clone(), j).expect("distance form binds")
    }

    pub fn arity(&self) -> usize {
        self.form.arity()
    }

    pub fn unit_radius(&self) -> bool {
        self.modulus.is_unit(self.radius)
    }

    pub fn require_unit_radius(&self) -> Result<()> {
        if self.unit_radius() {
            Ok(())
        } else {
            Err(LabError::NonUnitRadius {
                j: self.radius,
                q: self.modulus.q(),
            })
        }
    }

    fn is_plane_circle(&self) -> bool {
        self.arity() == 2 && self.form.is_distance()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpherePath {
    /// Mod-`p` search plus Hensel lifting; the circle decomposition for
    /// non-unit radii of `x^2 + y^2` when `p = 3 (mod 4)`.
    Fast,
    /// Evaluate `F` at every point of `(Z/p^rZ)^n`.
    Oracle,
    /// `Fast` where it applies, else `Oracle` within budget, else lifting
    /// with exhaustive search at singular points.
    Auto,
}

pub fn sphere_points(spec: &SphereSpec, path: SpherePath) -> Result<PointSet> {
    let m = &spec.modulus;
    let plane_decomposable = spec.is_plane_circle() && m.p_mod_4() == 3;
    match path {
        SpherePath::Oracle => sphere_points_exhaustive(spec),
        SpherePath::Fast | SpherePath::Auto if spec.unit_radius() => sphere_points_lifted(spec),
        SpherePath::Fast | SpherePath::Auto if plane_decomposable => {
            circle_decomposition(m.p(), m.r(), spec.radius)?.materialize()
        }
        SpherePath::Fast => sphere_points_exhaustive(spec),
        SpherePath::Auto => match sphere_points_exhaustive(spec) {
            Err(LabError::SearchSpaceTooLarge { .. }) => sphere_points_lifted(spec),
            other => other,
        },
    }
}

fn sphere_points_lifted(spec: &SphereSpec) -> Result<PointSet> {
    let sys = PolySystem::from_form(&spec.form, spec.radius as i64);
    solve_system(&sys, &spec.modulus)
}

fn sphere_points_exhaustive(spec: &SphereSpec) -> Result<PointSet> {
    let m = &spec.modulus;
    let n = spec.arity();
    let total = m.ambient_size(n);
    check_search(total)?;
    let tables = spec.form.term_tables(m);
    let q = m.q();
    let keys: Vec<u64> = (0..total as u64)
        .into_par_iter()
        .fold_with(Vec::new(), |mut acc, idx| {
            let mut rest = idx;
            let mut value = 0;
            for t in &tables {
                value = m.add(value, t[(rest % q) as usize]);
                rest /= q;
            }
            if value == spec.radius {
                acc.push(idx);
            }
            acc
        })
        .flatten()
        .collect();
    Ok(PointSet::from_keys(m, n, keys))
}

/// Every sphere `S_{r,j}` for `j` in `0..q`, indexed by `j`. One pass over
/// the ambient space.
pub fn all_spheres(form: &DiagonalForm, m: &Modulus) -> Result<Vec<PointSet>> {
    form.bind(m)?;
    let n = form.arity();
    let total = m.ambient_size(n);
    check_search(total)?;
    let tables = form.term_tables(m);
    let q = m.q();
    let mut buckets = vec![Vec::new(); q as usize];
    let mut coords = vec![0; n];
    for idx in 0..total as u64 {
        decode_into(q, idx, &mut coords);
        let v = coords
            .iter()
            .zip(&tables)
            .fold(0, |acc, (&c, t)| m.add(acc, t[c as usize]));
        buckets[v as usize].push(idx);
    }
    Ok(buckets
        .into_iter()
        .map(|keys| PointSet::from_keys(m, n, keys))
        .collect())
}

/// `F(z)` for every `z` in encoding order.
pub fn form_values(form: &DiagonalForm, m: &Modulus) -> Result<Vec<u64>> {
    let n = form.arity();
    let total = m.ambient_size(n);
    check_search(total)?;
    let tables = form.term_tables(m);
    let q = m.q();
    Ok((0..total as u64)
        .into_par_iter()
        .map(|idx| {
            let mut rest = idx;
            let mut value = 0;
            for t in &tables {
                value = m.add(value, t[(rest % q) as usize]);
                rest /= q;
            }
            value
        })
        .collect())
}

/// Closed-form `|C_{r,j}|` for `x^2 + y^2 = j` modulo `p^r`, with `v = ord_p(j)`.
pub fn circle_cardinality_formula(p: u64, r: u32, j: u64) -> Result<u128> {
    let m = Modulus::new(p, r)?;
    let v = m.ord_p(j);
    let pr = m.q() as u128;
    let p = p as u128;
    let r128 = r as u128;
    Ok(if m.p_mod_4() == 3 {
        if v == r {
            (p).pow(2 * (r / 2))
        } else if v % 2 == 0 {
            pr / p * (p + 1)
        } else {
            0
        }
    } else if v < r {
        (v as u128 + 1) * pr / p * (p - 1)
    } else {
        (r128 * p + p - r128) * pr / p
    })
}

/// Description of `C_{r,j}` for `p = 3 (mod 4)` as a union of shifted copies
/// of a smaller circle, or as a scaled box when `j = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CircleDecomposition {
    /// `{p^u z + p^{r-u} w : z in C_{r-2u, j_hat}, w in (Z/p^u)^2}`.
    Layered { p: u64, r: u32, u: u32, j_hat: u64 },
    /// `{p^{ceil(r/2)} w : w in (Z/p^{floor(r/2)})^2}`.
    Scaled { p: u64, r: u32 },
    /// `ord_p(j)` is odd and below `r`.
    Empty { p: u64, r: u32 },
}

pub fn circle_decomposition(p: u64, r: u32, j: u64) -> Result<CircleDecomposition> {
    let m = Modulus::new(p, r)?;
    if m.p_mod_4() != 3 {
        return Err(LabError::WrongResidueClass { p });
    }
    let j = j % m.q();
    let v = m.ord_p(j);
    Ok(if v == r {
        CircleDecomposition::Scaled { p, r }
    } else if v % 2 == 1 {
        CircleDecomposition::Empty { p, r }
    } else {
        let u = v / 2;
        let inner = m.pow_p(r - 2 * u);
        CircleDecomposition::Layered {
            p,
            r,
            u,
            j_hat: (j / m.pow_p(v)) % inner,
        }
    })
}

impl CircleDecomposition {
    pub fn materialize(&self) -> Result<PointSet> {
        match *self {
            CircleDecomposition::Empty { p, r } => Ok(PointSet::empty(&Modulus::new(p, r)?, 2)),
            CircleDecomposition::Scaled { p, r } => {
                let m = Modulus::new(p, r)?;
                let shift = m.pow_p(r.div_ceil(2));
                let box_side = m.pow_p(r / 2);
                let pts = all_vectors(box_side, 2).map(|w| [w[0] * shift, w[1] * shift]);
                PointSet::from_points(&m, 2, pts)
            }
            CircleDecomposition::Layered { p, r, u, j_hat } => {
                let m = Modulus::new(p, r)?;
                let inner_mod = m.truncate(r - 2 * u);
                let inner = sphere_points_lifted(&SphereSpec::circle(&inner_mod, j_hat))?;
                let (pu, pru) = (m.pow_p(u), m.pow_p(r - u));
                let mut keys = Vec::with_capacity(inner.len() * (pu * pu) as usize);
                for z in inner.points() {
                    for w in all_vectors(pu, 2) {
                        let pt = [
                            m.add(m.mul(pu, z[0]), m.mul(pru, w[0])),
                            m.add(m.mul(pu, z[1]), m.mul(pru, w[1])),
                        ];
                        keys.push(encode(m.q(), &pt));
                    }
                }
                Ok(PointSet::from_keys(&m, 2, keys))
            }
        }
    }
}

/// `#{x mod p : F(x) = j}` against the heuristic `p^{n-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionCountReport {
    pub count: u128,
    pub expected: u128,
    /// `|count - p^{n-1}| / p^{n-1}` as a reduced fraction.
    pub deviation_numerator: u128,
    pub deviation_denominator: u128,
    pub deviation: f64,
}

pub fn mod_p_solution_count(form: &DiagonalForm, p: u64, j: u64) -> Result<SolutionCountReport> {
    let m = Modulus::new(p, 1)?;
    form.bind(&m)?;
    if !m.is_unit(j) {
        return Err(LabError::NonUnitRadius { j, q: p });
    }
    let spec = SphereSpec::new(form.clone(), m, j)?;
    let count = sphere_points_exhaustive(&spec)?.len() as u128;
    let expected = (p as u128).pow(form.arity() as u32 - 1);
    let dev = Ratio::new(count.abs_diff(expected), expected);
    Ok(SolutionCountReport {
        count,
        expected,
        deviation_numerator: *dev.numer(),
        deviation_denominator: *dev.denom(),
        deviation: *dev.numer() as f64 / *dev.denom() as f64,
    })
}
