//! Counting and enumerating solutions of polynomial systems modulo `p^{l+k}`
//! above a base solution modulo `p^l`.
//!
//! At each level the new digit `w` of a lift solves the linear system
//! `J(y) w = -b (mod p)`, where `b` is the next `p`-adic digit of `G`. When
//! the Jacobian has full row rank the solutions form an affine space of size
//! `p^{n-m}`; at singular base points every digit is searched instead.

mod poly;

use rayon::prelude::*;

pub use poly::{Monomial, Polynomial, PolySystem};

use crate::error::{LabError, Result};
use crate::limits::check_search;
use crate::ring::vector::{all_vectors, encode};
use crate::ring::{Modulus, PointSet};

/// Affine solution set `{particular + sum t_i kernel_i}` of a linear system mod `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineSolutions {
    pub particular: Vec<u64>,
    pub kernel: Vec<Vec<u64>>,
}

impl AffineSolutions {
    pub fn size(&self, p: u64) -> u128 {
        (p as u128).pow(self.kernel.len() as u32)
    }

    pub fn enumerate(&self, p: u64) -> Vec<Vec<u64>> {
        let d = self.kernel.len();
        all_vectors(p, d)
            .map(|t| {
                let mut w = self.particular.clone();
                for (ti, basis) in t.iter().zip(&self.kernel) {
                    for (wi, bi) in w.iter_mut().zip(basis) {
                        *wi = (*wi + ti * bi) % p;
                    }
                }
                w
            })
            .collect()
    }
}

fn inv_mod_p(a: u64, p: u64) -> u64 {
    crate::ring::pow_mod_u128(a, p - 2, p)
}

/// Reduced row echelon form in place; returns the pivot columns.
fn row_reduce(rows: &mut [Vec<u64>], cols: usize, p: u64) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut next = 0;
    for c in 0..cols {
        let Some(found) = (next..rows.len()).find(|&i| !rows[i][c].is_multiple_of(p)) else {
            continue;
        };
        rows.swap(next, found);
        let inv = inv_mod_p(rows[next][c], p);
        for v in rows[next].iter_mut() {
            *v = *v * inv % p;
        }
        for i in 0..rows.len() {
            if i != next && rows[i][c] != 0 {
                let factor = rows[i][c];
                for j in 0..rows[i].len() {
                    let sub = factor * rows[next][j] % p;
                    rows[i][j] = (rows[i][j] + p - sub) % p;
                }
            }
        }
        pivots.push(c);
        next += 1;
        if next == rows.len() {
            break;
        }
    }
    pivots
}

/// Rank of a matrix over `F_p`.
pub fn rank_mod_p(matrix: &[Vec<u64>], p: u64) -> usize {
    let cols = matrix.first().map_or(0, Vec::len);
    let mut rows: Vec<Vec<u64>> = matrix
        .iter()
        .map(|r| r.iter().map(|&v| v % p).collect())
        .collect();
    row_reduce(&mut rows, cols, p).len()
}

/// Solves `A w = b` over `F_p`, returning `None` when inconsistent.
pub fn solve_linear_mod_p(a: &[Vec<u64>], b: &[u64], p: u64) -> Option<AffineSolutions> {
    let n = a.first().map_or(0, Vec::len);
    let mut rows: Vec<Vec<u64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r: Vec<u64> = row.iter().map(|&v| v % p).collect();
            r.push(bi % p);
            r
        })
        .collect();
    let pivots = row_reduce(&mut rows, n, p);
    if rows[pivots.len()..].iter().any(|r| r[n] != 0) {
        return None;
    }
    let mut particular = vec![0; n];
    for (i, &c) in pivots.iter().enumerate() {
        particular[c] = rows[i][n];
    }
    let kernel = (0..n)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![0; n];
            v[free] = 1;
            for (i, &c) in pivots.iter().enumerate() {
                v[c] = (p - rows[i][free]) % p;
            }
            v
        })
        .collect();
    Some(AffineSolutions { particular, kernel })
}

/// Rank of `J(G)` at `y`, modulo `p`.
pub fn jacobian_rank_mod_p(sys: &PolySystem, y: &[u64], p: u64) -> Result<usize> {
    let m = Modulus::new(p, 1)?;
    let y: Vec<u64> = y.iter().map(|&c| c % p).collect();
    Ok(rank_mod_p(&sys.jacobian_at(&m, &y), p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftMode {
    Count,
    Enumerate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LiftOutcome {
    Count(u128),
    /// The digits `z mod p^k`, sorted.
    Points(Vec<Vec<u64>>),
}

struct Lifter<'a> {
    sys: &'a PolySystem,
    big: Modulus,
    l: u32,
    y: Vec<u64>,
    jac: Vec<Vec<u64>>,
    smooth: bool,
}

impl Lifter<'_> {
    fn p(&self) -> u64 {
        self.big.p()
    }

    fn point(&self, z: &[u64]) -> Vec<u64> {
        let pl = self.big.pow_p(self.l);
        self.y
            .iter()
            .zip(z)
            .map(|(&yi, &zi)| self.big.add(yi, self.big.mul(pl, zi)))
            .collect()
    }

    // Digits w mod p with G(y + p^l (z + p^t w)) = 0 mod p^{l+t+1}.
    fn next_digits(&self, z: &[u64], t: u32) -> Vec<Vec<u64>> {
        let p = self.p();
        let depth = self.l + t;
        let x = self.point(z);
        if self.smooth {
            let scale = self.big.pow_p(depth);
            let rhs: Vec<u64> = self
                .sys
                .eval(&self.big, &x)
                .iter()
                .map(|&g| (p - (g / scale) % p) % p)
                .collect();
            match solve_linear_mod_p(&self.jac, &rhs, p) {
                Some(sol) => sol.enumerate(p),
                None => Vec::new(),
            }
        } else {
            let level = self.big.truncate(depth + 1);
            let step = self.big.pow_p(depth);
            all_vectors(p, x.len())
                .filter(|w| {
                    let cand: Vec<u64> = x
                        .iter()
                        .zip(w)
                        .map(|(&xi, &wi)| level.add(xi % level.q(), level.mul(step, wi)))
                        .collect();
                    self.sys.vanishes(&level, &cand)
                })
                .collect()
        }
    }

    fn extend(&self, z: &[u64], t: u32) -> Vec<Vec<u64>> {
        let pt = self.big.pow_p(t);
        self.next_digits(z, t)
            .into_iter()
            .map(|w| z.iter().zip(&w).map(|(&zi, &wi)| zi + pt * wi).collect())
            .collect()
    }
}

/// Counts or enumerates `{z mod p^k : G(y + p^l z) = 0 mod p^{l+k}}`.
pub fn lift(
    sys: &PolySystem,
    p: u64,
    y: &[u64],
    l: u32,
    k: u32,
    mode: LiftMode,
) -> Result<LiftOutcome> {
    if l == 0 || k == 0 {
        return Err(LabError::InvalidParameter("lifting needs l >= 1 and k >= 1".into()));
    }
    if y.len() != sys.arity() {
        return Err(LabError::ArityMismatch {
            expected: sys.arity(),
            found: y.len(),
        });
    }
    let big = Modulus::with_cap(p, l + k, u64::MAX)?;
    let base = big.truncate(l);
    let y_base: Vec<u64> = y.iter().map(|&c| c % base.q()).collect();
    if !sys.vanishes(&base, &y_base) {
        return Err(LabError::BaseNotASolution { level: l });
    }
    let modp = big.truncate(1);
    let y_modp: Vec<u64> = y.iter().map(|&c| c % p).collect();
    let jac = sys.jacobian_at(&modp, &y_modp);
    let smooth = rank_mod_p(&jac, p) == sys.len();
    let lifter = Lifter {
        sys,
        y: y_base,
        big,
        l,
        jac,
        smooth,
    };

    let mut partial = vec![vec![0u64; sys.arity()]];
    for t in 0..k - 1 {
        partial = partial
            .par_iter()
            .flat_map_iter(|z| lifter.extend(z, t))
            .collect();
    }
    Ok(match mode {
        LiftMode::Count => LiftOutcome::Count(
            partial
                .par_iter()
                .map(|z| lifter.next_digits(z, k - 1).len() as u128)
                .sum(),
        ),
        LiftMode::Enumerate => {
            let mut out: Vec<Vec<u64>> = partial
                .par_iter()
                .flat_map_iter(|z| lifter.extend(z, k - 1))
                .collect();
            out.sort_unstable();
            LiftOutcome::Points(out)
        }
    })
}

pub fn lift_count(sys: &PolySystem, p: u64, y: &[u64], l: u32, k: u32) -> Result<u128> {
    match lift(sys, p, y, l, k, LiftMode::Count)? {
        LiftOutcome::Count(c) => Ok(c),
        LiftOutcome::Points(v) => Ok(v.len() as u128),
    }
}

pub fn lift_points(sys: &PolySystem, p: u64, y: &[u64], l: u32, k: u32) -> Result<Vec<Vec<u64>>> {
    match lift(sys, p, y, l, k, LiftMode::Enumerate)? {
        LiftOutcome::Points(v) => Ok(v),
        LiftOutcome::Count(_) => unreachable!("enumerate mode returns points"),
    }
}

/// Solutions modulo `p` by direct search over `(Z/pZ)^n`.
pub fn solutions_mod_p(sys: &PolySystem, p: u64) -> Result<Vec<Vec<u64>>> {
    check_search((p as u128).pow(sys.arity() as u32))?;
    let m = Modulus::new(p, 1)?;
    Ok(all_vectors(p, sys.arity())
        .filter(|x| sys.vanishes(&m, x))
        .collect())
}

/// All solutions modulo `p^r`: mod-`p` search followed by lifting.
pub fn solve_system(sys: &PolySystem, m: &Modulus) -> Result<PointSet> {
    let n = sys.arity();
    let base = solutions_mod_p(sys, m.p())?;
    if m.r() == 1 {
        return PointSet::from_points(m, n, base);
    }
    let keys = base
        .par_iter()
        .map(|y| -> Result<Vec<u64>> {
            let digits = lift_points(sys, m.p(), y, 1, m.r() - 1)?;
            Ok(digits
                .into_iter()
                .map(|z| {
                    let pt: Vec<u64> = y
                        .iter()
                        .zip(&z)
                        .map(|(&yi, &zi)| m.add(yi, m.mul(m.p(), zi)))
                        .collect();
                    encode(m.q(), &pt)
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PointSet::from_keys(m, n, keys.concat()))
}

/// All solutions modulo `p^r` by direct search over `(Z/p^rZ)^n`.
pub fn solve_system_exhaustive(sys: &PolySystem, m: &Modulus) -> Result<PointSet> {
    let n = sys.arity();
    check_search(m.ambient_size(n))?;
    let keys: Vec<u64> = (0..m.ambient_size(n) as u64)
        .into_par_iter()
        .filter(|&i| {
            let x = crate::ring::vector::decode(m.q(), i, n);
            sys.vanishes(m, &x)
        })
        .collect();
    Ok(PointSet::from_keys(m, n, keys))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(j: i64) -> PolySystem {
        let g = Polynomial::new(2, [(1, vec![2, 0]), (1, vec![0, 2]), (-j, vec![0, 0])]).unwrap();
        PolySystem::new(vec![g]).unwrap()
    }

    fn translate() -> PolySystem {
        let a = Polynomial::new(2, [(1, vec![1, 0]), (-1, vec![0, 0])]).unwrap();
        let b = Polynomial::new(2, [(1, vec![0, 1]), (-2, vec![0, 0])]).unwrap();
        PolySystem::new(vec![a, b]).unwrap()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(jacobian_rank_mod_p(&circle(1), &[1, 0], 3), Ok(1));
        assert_eq!(jacobian_rank_mod_p(&circle(1), &[0, 0], 3), Ok(0));
        assert_eq!(jacobian_rank_mod_p(&translate(), &[4, 4], 5), Ok(2));
    }

    #[test]
    fn lift_examples() {
        let g = PolySystem::new(vec![Polynomial::new(1, [(1, vec![2]), (-1, vec![0])]).unwrap()]).unwrap();
        assert_eq!(lift_points(&g, 3, &[1], 1, 1).unwrap(), vec![vec![0]]);
        assert_eq!(lift_count(&circle(1), 3, &[1, 0], 1, 1), Ok(3));
        assert_eq!(lift_count(&translate(), 5, &[1, 2], 1, 2), Ok(1));
        assert_eq!(
            lift_count(&circle(1), 3, &[1, 1], 1, 1),
            Err(LabError::BaseNotASolution { level: 1 })
        );
    }

    #[test]
    fn singular_points_use_search() {
        // x^2 + y^2 = 0 at the origin mod 3: lifts to mod 9 are 3*(a,b), all 9 of them
        assert_eq!(lift_count(&circle(0), 3, &[0, 0], 1, 1), Ok(9));
        // lifts of the origin to mod 27 are divisible by 3 in every coordinate
        let pts = lift_points(&circle(0), 3, &[0, 0], 1, 2).unwrap();
        assert!(pts.iter().all(|z| z[0] % 3 == 0 && z[1] % 3 == 0));
    }

    #[test]
    fn solve_examples() {
        let m2 = Modulus::new(3, 2).unwrap();
        assert_eq!(solve_system(&circle(1), &m2).unwrap().len(), 12);
        let m1 = Modulus::new(3, 1).unwrap();
        let c = solve_system(&circle(1), &m1).unwrap();
        assert_eq!(c.sorted_points(), vec![vec![0, 1], vec![0, 2], vec![1, 0], vec![2, 0]]);
        assert_eq!(solve_system(&circle(0), &m1).unwrap().sorted_points(), vec![vec![0, 0]]);
    }

    #[test]
    fn linear_solver_kernel() {
        let a = vec![vec![1, 2, 0], vec![0, 0, 1]];
        let sol = solve_linear_mod_p(&a, &[1, 2], 5).unwrap();
        assert_eq!(sol.kernel.len(), 1);
        for w in sol.enumerate(5) {
            assert_eq!((w[0] + 2 * w[1]) % 5, 1);
            assert_eq!(w[2], 2);
        }
        assert!(solve_linear_mod_p(&[vec![1, 1], vec![2, 2]], &[1, 0], 3).is_none());
    }
}
