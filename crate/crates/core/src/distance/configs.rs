//! Rectangles, closed 4-cycles, chains and pinned trees with a fixed side
//! length `j`.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::limits::check_search;
use crate::ring::vector::{decode_into, encode};
use crate::ring::{DiagonalForm, Modulus, PointSet};
use crate::spectral::cayley_spectrum;
use crate::varieties::{sphere_points, SpherePath, SphereSpec};

fn check_form(form: &DiagonalForm, m: &Modulus, n: usize) -> Result<()> {
    if form.arity() != n {
        return Err(LabError::ArityMismatch {
            expected: n,
            found: form.arity(),
        });
    }
    form.bind(m)
}

/// Encoded elements of `S_j` in an `n`-dimensional space.
fn sphere_keys(form: &DiagonalForm, m: &Modulus, j: u64) -> Result<Vec<u64>> {
    let spec = SphereSpec::new(form.clone(), m.clone(), j)?;
    Ok(sphere_points(&spec, SpherePath::Auto)?.keys().to_vec())
}

/// Precomputed `key(u) -> key(u - s)` for a fixed `s`.
struct Shifter {
    q: u64,
    n: usize,
    offsets: Vec<Vec<u64>>,
}

impl Shifter {
    fn new(m: &Modulus, n: usize, keys: &[u64]) -> Self {
        let offsets = keys
            .iter()
            .map(|&k| {
                let mut v = vec![0; n];
                decode_into(m.q(), k, &mut v);
                v
            })
            .collect();
        Shifter { q: m.q(), n, offsets }
    }

    /// Keys of `u - s` for every offset `s`.
    fn neighbours(&self, u: u64, out: &mut Vec<u64>, buf: &mut [u64]) {
        out.clear();
        decode_into(self.q, u, buf);
        for s in &self.offsets {
            let mut key = 0u64;
            for i in (0..self.n).rev() {
                let c = buf[i] + self.q - s[i];
                key = key * self.q + if c >= self.q { c - self.q } else { c };
            }
            out.push(key);
        }
    }
}

/// Ordered rectangles: corners `(u1, v1), (u1, v2), (u2, v1), (u2, v2)` all in
/// `E` with `F(u1 - u2) = F(v1 - v2) = j`, where `E` sits in `(Z/qZ)^{n + n}`
/// split as `(u, v)`.
pub fn count_rectangles(form: &DiagonalForm, set: &PointSet, j: u64) -> Result<u128> {
    let m = set.modulus();
    let total = set.arity();
    if total % 2 == 1 {
        return Err(LabError::OddArity(total));
    }
    let n = total / 2;
    check_form(form, m, n)?;
    let half = m.ambient_size(n) as u64;
    let mut fibers: HashMap<u64, HashSet<u64>> = HashMap::new();
    for &k in set.keys() {
        fibers.entry(k % half).or_default().insert(k / half);
    }
    let shifter = Shifter::new(m, n, &sphere_keys(form, m, j)?);
    let us: Vec<u64> = fibers.keys().copied().collect();
    Ok(us
        .par_iter()
        .map(|&u1| {
            let mut nb = Vec::new();
            let mut nb2 = Vec::new();
            let mut buf = vec![0; n];
            let mut count = 0u128;
            let v1s = &fibers[&u1];
            shifter.neighbours(u1, &mut nb, &mut buf);
            for u2 in &nb {
                let Some(v2s) = fibers.get(u2) else { continue };
                let (small, large) = if v1s.len() <= v2s.len() { (v1s, v2s) } else { (v2s, v1s) };
                let common: Vec<u64> = small.iter().copied().filter(|v| large.contains(v)).collect();
                for &a in &common {
                    shifter.neighbours(a, &mut nb2, &mut buf);
                    count += nb2.iter().filter(|b| v1s.contains(b) && v2s.contains(b)).count() as u128;
                }
            }
            count
        })
        .sum())
}

/// Adjacency `u -> u - s` with `s` in `S_j`, restricted to `E`.
fn adjacency(form: &DiagonalForm, set: &PointSet, j: u64) -> Result<Vec<Vec<u32>>> {
    let m = set.modulus();
    let n = set.arity();
    check_form(form, m, n)?;
    let shifter = Shifter::new(m, n, &sphere_keys(form, m, j)?);
    let index: HashMap<u64, u32> = set.keys().iter().enumerate().map(|(i, &k)| (k, i as u32)).collect();
    Ok(set
        .keys()
        .par_iter()
        .map(|&u| {
            let mut nb = Vec::new();
            let mut buf = vec![0; n];
            shifter.neighbours(u, &mut nb, &mut buf);
            let mut row: Vec<u32> = nb.iter().filter_map(|k| index.get(k).copied()).collect();
            row.sort_unstable();
            row
        })
        .collect())
}

/// Closed walks `u1 -> u2 -> u3 -> u4 -> u1` in `E` with every step of
/// length `j`; with `distinct` only those on four distinct vertices.
pub fn count_cycles4(form: &DiagonalForm, set: &PointSet, j: u64, distinct: bool) -> Result<u128> {
    let m = set.modulus();
    if !m.is_unit(j) {
        return Err(LabError::NonUnitRadius { j: j % m.q(), q: m.q() });
    }
    let adj = adjacency(form, set, j)?;
    let size = adj.len();
    let two_step = |u: usize| -> HashMap<u32, u64> {
        let mut c = HashMap::new();
        for &w in &adj[u] {
            for &x in &adj[w as usize] {
                *c.entry(x).or_insert(0) += 1;
            }
        }
        c
    };
    let rows: Vec<HashMap<u32, u64>> = (0..size).into_par_iter().map(two_step).collect();
    let total: u128 = (0..size)
        .into_par_iter()
        .map(|u| {
            rows[u]
                .iter()
                .map(|(&w, &c)| c as u128 * rows[w as usize].get(&(u as u32)).copied().unwrap_or(0) as u128)
                .sum::<u128>()
        })
        .sum();
    if !distinct {
        return Ok(total);
    }
    // Steps have unit length, so consecutive vertices differ and the only
    // degenerate walks have u1 = u3 or u2 = u4.
    let back: Vec<u128> = (0..size)
        .map(|u| rows[u].get(&(u as u32)).copied().unwrap_or(0) as u128)
        .collect();
    let sq: u128 = back.iter().map(|s| s * s).sum();
    let lin: u128 = back.iter().sum();
    Ok(total + lin - 2 * sq)
}

/// `sum_m lambda_m^4` for the Cayley graph of `S_j` on the whole space, the
/// number of ordered closed 4-walks.
pub fn count_cycles4_spectral(form: &DiagonalForm, m: &Modulus, n: usize, j: u64) -> Result<f64> {
    check_form(form, m, n)?;
    let spec = SphereSpec::new(form.clone(), m.clone(), j)?;
    let sphere = sphere_points(&spec, SpherePath::Auto)?;
    let spectrum = cayley_spectrum(&sphere)?;
    Ok(spectrum.eigenvalues.values.iter().map(|l| l.powi(4).re).sum())
}

/// `q^{-n} sum_m lambda_m^4`, the closed 4-walks through one fixed vertex.
pub fn cycles4_rooted_spectral(form: &DiagonalForm, m: &Modulus, n: usize, j: u64) -> Result<f64> {
    Ok(count_cycles4_spectral(form, m, n, j)? / m.ambient_size(n) as f64)
}

/// Tuples `(u_1, ..., u_{k+1})` in `E` with `F(u_i - u_{i+1}) = j`.
pub fn count_chains(form: &DiagonalForm, set: &PointSet, j: u64, k: usize) -> Result<u128> {
    if k == 0 {
        return Err(LabError::InvalidParameter("chains need k >= 1".into()));
    }
    let adj = adjacency(form, set, j)?;
    let mut walks = vec![1u128; adj.len()];
    for _ in 0..k {
        walks = adj
            .par_iter()
            .map(|row| row.iter().map(|&w| walks[w as usize]).sum())
            .collect();
    }
    Ok(walks.iter().sum())
}

/// A tree on `0..vertices` with a pinned vertex. Edges are stored with the
/// smaller endpoint first and sorted, so `i_1 <= i_3 <= ...`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeShape {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub pinned: usize,
}

impl TreeShape {
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>, pinned: usize) -> Result<Self> {
        if vertices == 0 || edges.len() + 1 != vertices {
            return Err(LabError::InvalidTree(format!(
                "{vertices} vertices need {} edges, found {}",
                vertices.saturating_sub(1),
                edges.len()
            )));
        }
        if pinned >= vertices {
            return Err(LabError::InvalidTree(format!("pinned vertex {pinned} out of range")));
        }
        let mut edges: Vec<(usize, usize)> = edges.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        edges.sort_unstable();
        let mut parent: Vec<usize> = (0..vertices).collect();
        fn root(parent: &mut [usize], mut v: usize) -> usize {
            while parent[v] != v {
                parent[v] = parent[parent[v]];
                v = parent[v];
            }
            v
        }
        for &(a, b) in &edges {
            if b >= vertices || a == b {
                return Err(LabError::InvalidTree(format!("bad edge ({a}, {b})")));
            }
            let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
            if ra == rb {
                return Err(LabError::InvalidTree("edges contain a cycle".into()));
            }
            parent[ra] = rb;
        }
        Ok(TreeShape {
            vertices,
            edges,
            pinned,
        })
    }

    /// Path `0 - 1 - ... - k`, pinned at an end.
    pub fn path(k: usize) -> Self {
        Self::new(k + 1, (0..k).map(|i| (i, i + 1)).collect(), 0).expect("paths are trees")
    }

    /// Star with centre `0` and `k` leaves, pinned at the centre.
    pub fn star(k: usize) -> Self {
        Self::new(k + 1, (1..=k).map(|i| (0, i)).collect(), 0).expect("stars are trees")
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Vertices in breadth-first order from the pin, each with the edge
    /// (index, parent) attaching it.
    fn attachment_order(&self) -> Vec<(usize, usize, usize)> {
        let mut seen = vec![false; self.vertices];
        seen[self.pinned] = true;
        let mut queue = std::collections::VecDeque::from([self.pinned]);
        let mut order = Vec::new();
        while let Some(v) = queue.pop_front() {
            for (e, &(a, b)) in self.edges.iter().enumerate() {
                let other = if a == v { b } else if b == v { a } else { continue };
                if !seen[other] {
                    seen[other] = true;
                    order.push((other, e, v));
                    queue.push_back(other);
                }
            }
        }
        order
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeCount {
    /// Distinct edge-length vectors `(F(x_a - x_b))` over the canonical edges.
    pub distinct: usize,
    /// Embeddings of the vertices into `E` with the pin sent to `x`.
    pub embeddings: u128,
    pub injective: bool,
}

/// Edge-length vectors realised by maps of `shape` into `E` sending the
/// pinned vertex to `pin`. With `injective` the vertices must land on
/// distinct points.
pub fn count_pinned_trees(
    form: &DiagonalForm,
    set: &PointSet,
    shape: &TreeShape,
    pin: &[u64],
    injective: bool,
) -> Result<TreeCount> {
    let m = set.modulus();
    let n = set.arity();
    check_form(form, m, n)?;
    if pin.len() != n {
        return Err(LabError::ArityMismatch {
            expected: n,
            found: pin.len(),
        });
    }
    let pin_key = encode(m.q(), &pin.iter().map(|&c| c % m.q()).collect::<Vec<_>>());
    if !set.contains_key(pin_key) {
        return Err(LabError::PinNotInSet);
    }
    let k = shape.edge_count() as u32;
    check_search((set.len() as u128).saturating_pow(k))?;

    let points: Vec<Vec<u64>> = set.points().collect();
    let pin_idx = set.keys().binary_search(&pin_key).expect("pin is a member");
    // dist[a][b] = F(x_a - x_b)
    let dist: Vec<Vec<u64>> = points
        .par_iter()
        .map(|x| {
            let mut d = vec![0; n];
            points
                .iter()
                .map(|y| {
                    for i in 0..n {
                        d[i] = m.sub(x[i], y[i]);
                    }
                    form.eval_unchecked(m, &d)
                })
                .collect()
        })
        .collect();

    struct Walk<'a> {
        order: &'a [(usize, usize, usize)],
        edges: &'a [(usize, usize)],
        dist: &'a [Vec<u64>],
        injective: bool,
        place: Vec<usize>,
        lengths: Vec<u64>,
        seen: HashSet<Vec<u64>>,
        embeddings: u128,
    }

    impl Walk<'_> {
        fn run(&mut self, depth: usize) {
            if depth == self.order.len() {
                self.embeddings += 1;
                self.seen.insert(self.lengths.clone());
                return;
            }
            let (v, e, parent) = self.order[depth];
            let at = self.place[parent];
            let (a, _) = self.edges[e];
            for cand in 0..self.dist.len() {
                if self.injective && self.place.contains(&cand) {
                    continue;
                }
                self.place[v] = cand;
                self.lengths[e] = if a == v { self.dist[cand][at] } else { self.dist[at][cand] };
                self.run(depth + 1);
                self.place[v] = usize::MAX;
            }
        }
    }

    let order = shape.attachment_order();
    let mut place = vec![usize::MAX; shape.vertices];
    place[shape.pinned] = pin_idx;
    let mut walk = Walk {
        order: &order,
        edges: &shape.edges,
        dist: &dist,
        injective,
        place,
        lengths: vec![0; shape.edge_count()],
        seen: HashSet::new(),
        embeddings: 0,
    };
    walk.run(0);
    Ok(TreeCount {
        distinct: walk.seen.len(),
        embeddings: walk.embeddings,
        injective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full(p: u64, r: u32, n: usize) -> PointSet {
        PointSet::full(&Modulus::new(p, r).unwrap(), n)
    }

    #[test]
    fn rectangle_examples() {
        let d2 = DiagonalForm::distance(2);
        assert_eq!(count_rectangles(&d2, &full(3, 1, 4), 1).unwrap(), 1296);
        assert_eq!(count_rectangles(&DiagonalForm::distance(1), &full(7, 1, 2), 1).unwrap(), 196);
        assert_eq!(count_rectangles(&d2, &full(3, 1, 3), 1), Err(LabError::OddArity(3)));
    }

    #[test]
    fn chain_examples() {
        let d2 = DiagonalForm::distance(2);
        let e = full(3, 1, 2);
        assert_eq!(count_chains(&d2, &e, 1, 1).unwrap(), 36);
        assert_eq!(count_chains(&d2, &e, 1, 2).unwrap(), 144);
        let m = Modulus::new(3, 1).unwrap();
        assert_eq!(count_chains(&d2, &PointSet::empty(&m, 2), 1, 3).unwrap(), 0);
    }

    #[test]
    fn cycles_match_spectrum_on_full_space() {
        let d2 = DiagonalForm::distance(2);
        let m = Modulus::new(3, 1).unwrap();
        let total = count_cycles4(&d2, &full(3, 1, 2), 1, false).unwrap();
        let spectral = count_cycles4_spectral(&d2, &m, 2, 1).unwrap();
        assert!((total as f64 - spectral).abs() < 1e-6);
        assert!((cycles4_rooted_spectral(&d2, &m, 2, 1).unwrap() * 9.0 - spectral).abs() < 1e-6);
    }

    #[test]
    fn small_sets_have_no_distinct_cycles() {
        let m = Modulus::new(3, 1).unwrap();
        let e = PointSet::from_points(&m, 2, [[0, 0], [0, 1], [1, 1]]).unwrap();
        assert_eq!(count_cycles4(&DiagonalForm::distance(2), &e, 1, true).unwrap(), 0);
    }

    #[test]
    fn tree_examples() {
        let d2 = DiagonalForm::distance(2);
        let e = full(3, 1, 2);
        let star = count_pinned_trees(&d2, &e, &TreeShape::star(1), &[0, 0], false).unwrap();
        assert_eq!(star.distinct, 3);
        assert_eq!(star.embeddings, 9);
        let inj = count_pinned_trees(&d2, &e, &TreeShape::star(1), &[0, 0], true).unwrap();
        assert_eq!(inj.distinct, 2);
        let m = Modulus::new(3, 1).unwrap();
        let single = PointSet::from_points(&m, 2, [[1, 1]]).unwrap();
        let none = count_pinned_trees(&d2, &single, &TreeShape::path(1), &[1, 1], true).unwrap();
        assert_eq!(none.distinct, 0);
        assert_eq!(
            count_pinned_trees(&d2, &single, &TreeShape::path(1), &[0, 0], true),
            Err(LabError::PinNotInSet)
        );
    }

    #[test]
    fn tree_validation() {
        assert!(TreeShape::new(3, vec![(0, 1), (1, 0)], 0).is_err());
        assert!(TreeShape::new(3, vec![(0, 1)], 0).is_err());
        assert!(TreeShape::new(2, vec![(0, 1)], 2).is_err());
        assert_eq!(TreeShape::new(3, vec![(2, 1), (0, 1)], 0).unwrap().edges, vec![(0, 1), (1, 2)]);
    }
}
