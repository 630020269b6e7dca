//! Brute-force oracles shared by the integration tests. Everything here is
//! written directly from the definitions, with no shared code paths into
//! the library beyond ring arithmetic.

#![allow(dead_code)]

use std::collections::HashSet;

use num_complex::Complex64;
use padic_lab::distance::{FSphere, TreeShape};
use padic_lab::ring::vector::all_vectors;
use padic_lab::{DiagonalForm, Modulus, PointSet};

pub fn eval(form: &DiagonalForm, m: &Modulus, x: &[u64]) -> u64 {
    let mut acc: i128 = 0;
    for ((&c, &e), &xi) in form.coefficients().iter().zip(form.exponents()).zip(x) {
        acc += c as i128 * m.pow(xi, e as u64) as i128;
    }
    m.reduce_i128(acc)
}

pub fn diff(m: &Modulus, x: &[u64], y: &[u64]) -> Vec<u64> {
    x.iter().zip(y).map(|(&a, &b)| m.sub(a, b)).collect()
}

/// Every point with `F(x) = j`, in encoding order.
pub fn sphere(form: &DiagonalForm, m: &Modulus, j: u64) -> Vec<Vec<u64>> {
    all_vectors(m.q(), form.arity()).filter(|x| eval(form, m, x) == j).collect()
}

/// `#{x : F(x) = j}` for every `j`, in one pass.
pub fn value_histogram(form: &DiagonalForm, m: &Modulus) -> Vec<u128> {
    let mut out = vec![0u128; m.q() as usize];
    for x in all_vectors(m.q(), form.arity()) {
        out[eval(form, m, &x) as usize] += 1;
    }
    out
}

/// `N_j = #{(x, y) in E1 x E2 : F(x - y) = j}`.
pub fn census(form: &DiagonalForm, e1: &PointSet, e2: &PointSet) -> Vec<u128> {
    let m = e1.modulus();
    let mut out = vec![0u128; m.q() as usize];
    for x in e1.points() {
        for y in e2.points() {
            out[eval(form, m, &diff(m, &x, &y)) as usize] += 1;
        }
    }
    out
}

fn e(m: &Modulus, t: u64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t as f64 / m.q() as f64)
}

/// `q^{-n} sum_x f(x) e(-m.x)` for every `m`, in `O(q^{2n})`.
pub fn dft(m: &Modulus, n: usize, f: &[Complex64]) -> Vec<Complex64> {
    let pts: Vec<Vec<u64>> = all_vectors(m.q(), n).collect();
    let scale = 1.0 / pts.len() as f64;
    pts.iter()
        .map(|freq| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, fx) in pts.iter().zip(f) {
                let dot = freq.iter().zip(x).fold(0, |a, (&u, &v)| m.add(a, m.mul(u, v)));
                acc += fx * e(m, m.neg(dot));
            }
            acc * scale
        })
        .collect()
}

/// `hat 1_S(freq)` straight from the definition.
pub fn sphere_coefficient(m: &Modulus, points: &[Vec<u64>], freq: &[u64]) -> Complex64 {
    let n = freq.len() as i32;
    let mut acc = Complex64::new(0.0, 0.0);
    for x in points {
        let dot = freq.iter().zip(x).fold(0, |a, (&u, &v)| m.add(a, m.mul(u, v)));
        acc += e(m, m.neg(dot));
    }
    acc / (m.q() as f64).powi(n)
}

/// Corner sets `(u1, v1), (u1, v2), (u2, v1), (u2, v2)` inside `E` with
/// `F(u1 - u2) = F(v1 - v2) = j`, looping over pairs of points of `E`.
pub fn rectangles(form: &DiagonalForm, set: &PointSet, j: u64) -> u128 {
    let m = set.modulus();
    let h = set.arity() / 2;
    let pts: Vec<Vec<u64>> = set.points().collect();
    let members: HashSet<Vec<u64>> = pts.iter().cloned().collect();
    let corner = |u: &[u64], v: &[u64]| members.contains(&[u, v].concat());
    let mut count = 0;
    for a in &pts {
        for b in &pts {
            let (u1, v1) = a.split_at(h);
            let (u2, v2) = b.split_at(h);
            if eval(form, m, &diff(m, u1, u2)) == j
                && eval(form, m, &diff(m, v1, v2)) == j
                && corner(u1, v2)
                && corner(u2, v1)
            {
                count += 1;
            }
        }
    }
    count
}

pub fn cycles4(form: &DiagonalForm, set: &PointSet, j: u64, distinct: bool) -> u128 {
    let m = set.modulus();
    let pts: Vec<Vec<u64>> = set.points().collect();
    let adj = |a: usize, b: usize| eval(form, m, &diff(m, &pts[a], &pts[b])) == j;
    let n = pts.len();
    let mut count = 0;
    for a in 0..n {
        for b in 0..n {
            if !adj(a, b) {
                continue;
            }
            for c in 0..n {
                if !adj(b, c) {
                    continue;
                }
                for d in 0..n {
                    if !adj(c, d) || !adj(d, a) {
                        continue;
                    }
                    let all = [a, b, c, d];
                    if distinct && all.iter().collect::<HashSet<_>>().len() < 4 {
                        continue;
                    }
                    count += 1;
                }
            }
        }
    }
    count
}

/// `(k + 1)`-tuples with consecutive differences on `S_j`, by full enumeration.
pub fn chains(form: &DiagonalForm, set: &PointSet, j: u64, k: usize) -> u128 {
    let m = set.modulus();
    let pts: Vec<Vec<u64>> = set.points().collect();
    let n = pts.len();
    if n == 0 {
        return 0;
    }
    let mut idx = vec![0usize; k + 1];
    let mut count = 0;
    loop {
        if idx.windows(2).all(|w| eval(form, m, &diff(m, &pts[w[0]], &pts[w[1]])) == j) {
            count += 1;
        }
        let mut i = 0;
        while i <= k {
            idx[i] += 1;
            if idx[i] < n {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
        if i > k {
            return count;
        }
    }
}

/// `(distinct length vectors, embeddings)` of a pinned tree, over every map
/// of the free vertices into `E`.
pub fn trees(form: &DiagonalForm, set: &PointSet, shape: &TreeShape, pin: &[u64], injective: bool) -> (usize, u128) {
    let m = set.modulus();
    let pts: Vec<Vec<u64>> = set.points().collect();
    let free: Vec<usize> = (0..shape.vertices).filter(|&v| v != shape.pinned).collect();
    let mut choice = vec![0usize; free.len()];
    let mut seen = HashSet::new();
    let mut embeddings = 0;
    loop {
        let mut place: Vec<&[u64]> = vec![pin; shape.vertices];
        for (&v, &c) in free.iter().zip(&choice) {
            place[v] = &pts[c];
        }
        let distinct = place.iter().collect::<HashSet<_>>().len() == shape.vertices;
        if !injective || distinct {
            embeddings += 1;
            let lengths: Vec<u64> = shape.edges.iter().map(|&(a, b)| eval(form, m, &diff(m, place[a], place[b]))).collect();
            seen.insert(lengths);
        }
        let mut i = 0;
        while i < choice.len() {
            choice[i] += 1;
            if choice[i] < pts.len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
        if i == choice.len() {
            return (seen.len(), embeddings);
        }
    }
}

pub fn incidences(form: &DiagonalForm, points: &PointSet, spheres: &[FSphere]) -> u128 {
    let m = points.modulus();
    let mut count = 0;
    for x in points.points() {
        for s in spheres {
            if eval(form, m, &diff(m, &x, &s.center)) == s.radius {
                count += 1;
            }
        }
    }
    count
}

/// Points of `(Z/p^{l+k})^n` that solve `F = j` and reduce to `y` mod `p^l`.
pub fn lifts(form: &DiagonalForm, p: u64, j: u64, y: &[u64], l: u32, k: u32) -> u128 {
    let top = Modulus::new(p, l + k).unwrap();
    let step = top.pow_p(l);
    let digits = top.pow_p(k);
    all_vectors(digits, y.len())
        .filter(|z| {
            let x: Vec<u64> = y.iter().zip(z).map(|(&yi, &zi)| yi + step * zi).collect();
            eval(form, &top, &x) == j % top.q()
        })
        .count() as u128
}

pub fn random_set(m: &Modulus, n: usize, density: f64, seed: u64) -> PointSet {
    use rand::{Rng, SeedableRng};
    let mut g = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Vec<u64>> = all_vectors(m.q(), n).filter(|_| g.gen_bool(density)).collect();
    PointSet::from_points(m, n, pts).unwrap()
}
