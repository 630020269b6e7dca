//! Acceptance run: one timed pass/fail line per criterion. Exits non-zero
//! if any criterion fails or overruns its time budget.

mod common;

use std::time::{Duration, Instant};

use num_complex::Complex64;
use padic_lab::distance::{
    count_chains, count_cycles4, count_cycles4_spectral, count_pinned_trees, count_rectangles,
    decompose, distance_census, incidence_constant, incidence_report, sharpness_example_even,
    sharpness_example_odd, sphere_constant, threshold_experiment, CensusPath, FSphere, TreeShape,
};
use padic_lab::hensel::{jacobian_rank_mod_p, lift_count, solutions_mod_p, PolySystem};
use padic_lab::ring::vector::{all_vectors, split};
use padic_lab::rotations::{
    energy_fiber_max, expected_group_order, extension_ratio, orbit, orbit_as_scaled_circle,
    rotation_group, stabilizer, SurfaceMeasureView,
};
use padic_lab::spectral::{
    fourier_bound_profile, indicator, kernel_by_name, sphere_fourier_all_radii, SphereFourier,
    Transformer, KERNEL_NAMES,
};
use padic_lab::varieties::{circle_cardinality_formula, sphere_points, SpherePath, SphereSpec};
use padic_lab::{DiagonalForm, Modulus, PointSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

/// `(id, name, budget in seconds, run)`.
type Criterion = (u32, &'static str, u64, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lab<T>(r: padic_lab::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn modulus(p: u64, r: u32) -> Modulus {
    Modulus::new(p, r).expect("grid moduli are valid")
}

fn cubic(n: usize) -> DiagonalForm {
    let coeffs = [1, 2, 1][..n].to_vec();
    DiagonalForm::new(coeffs, vec![3; n]).expect("valid cubic form")
}

fn non_residue(p: u64) -> u64 {
    (2..p).find(|&g| (1..p).all(|x| x * x % p != g)).unwrap()
}

/// Representatives of `U_r / U_r^k`, taken among `1..p`.
fn radius_classes(p: u64, k: u32) -> Vec<u64> {
    let m = modulus(p, 1);
    let powers: std::collections::HashSet<u64> = (1..p).map(|x| m.pow(x, k as u64)).collect();
    let mut reps: Vec<u64> = Vec::new();
    for j in 1..p {
        if !reps.iter().any(|&r| powers.contains(&m.mul(j, m.unit_inverse(r).unwrap()))) {
            reps.push(j);
        }
    }
    reps
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// 1 -----------------------------------------------------------------------

fn exact_cardinalities() -> Check {
    let mut checked = 0;
    for p in [3u64, 7, 11, 5, 13] {
        for r in 1..=3 {
            let m = modulus(p, r);
            let form = DiagonalForm::distance(2);
            let hist = common::value_histogram(&form, &m);
            for j in 0..m.q() {
                let formula = lab(circle_cardinality_formula(p, r, j))?;
                ensure(formula == hist[j as usize], || {
                    format!("p={p} r={r} j={j}: formula {formula}, brute force {}", hist[j as usize])
                })?;
                let listed = lab(sphere_points(&SphereSpec::circle(&m, j), SpherePath::Auto))?.len() as u128;
                ensure(listed == hist[j as usize], || format!("p={p} r={r} j={j}: enumeration gives {listed}"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} circles, all radii mod p^r"))
}

// 2 -----------------------------------------------------------------------

/// `p^v C_{r-v, |x~|}` built point by point.
fn scaled_circle(m: &Modulus, x: &[u64]) -> Result<PointSet, String> {
    let (v, prim) = lab(split(m, x))?;
    let inner = m.truncate(m.r() - v);
    let norm = inner.add(inner.mul(prim[0] % inner.q(), prim[0] % inner.q()), inner.mul(prim[1] % inner.q(), prim[1] % inner.q()));
    let scale = m.pow_p(v);
    let pts: Vec<Vec<u64>> = common::sphere(&DiagonalForm::distance(2), &inner, norm)
        .into_iter()
        .map(|y| vec![m.mul(scale, y[0]), m.mul(scale, y[1])])
        .collect();
    lab(PointSet::from_points(m, 2, pts))
}

fn group_orbits() -> Check {
    let mut points = 0;
    for p in [3u64, 5, 7] {
        for r in 1..=2 {
            let m = modulus(p, r);
            let g = lab(rotation_group(&m))?;
            let order = g.len() as u128;
            let q = m.q() as u128;
            let expected = if p % 4 == 1 { q - q / p as u128 } else { q + q / p as u128 };
            let brute = common::sphere(&DiagonalForm::distance(2), &m, 1).len() as u128;
            ensure(order == expected && order == brute && expected_group_order(&m) == order, || {
                format!("p={p} r={r}: |G| = {order}, expected {expected}, brute {brute}")
            })?;
            for x in all_vectors(m.q(), 2).skip(1) {
                let orb = lab(orbit(&g, &m, &x))?;
                let stab = lab(stabilizer(&g, &m, &x))?;
                ensure(orb.len() as u128 * stab.len() as u128 == order, || format!("orbit-stabilizer fails at {x:?}"))?;
                if p % 4 == 3 {
                    let expect = scaled_circle(&m, &x)?;
                    ensure(orb == expect, || format!("p={p} r={r}: orbit of {x:?} is not the scaled circle"))?;
                    ensure(lab(orbit_as_scaled_circle(&m, &x))? == expect, || format!("library scaled circle differs at {x:?}"))?;
                }
                points += 1;
            }
        }
    }
    Ok(format!("{points} nonzero points"))
}

// 3 -----------------------------------------------------------------------

fn hensel_counts() -> Check {
    let (mut smooth, mut singular) = (0, 0);
    for n in [2usize, 3] {
        let form = DiagonalForm::distance(n);
        for p in [3u64, 5, 7] {
            for j in 0..p {
                let sys = PolySystem::from_form(&form, j as i64);
                for y in lab(solutions_mod_p(&sys, p))? {
                    let rank = lab(jacobian_rank_mod_p(&sys, &y, p))?;
                    for k in 1..=2 {
                        let count = lab(lift_count(&sys, p, &y, 1, k))?;
                        let bound = (p as u128).pow(k * (n - rank) as u32);
                        let brute = common::lifts(&form, p, j, &y, 1, k);
                        ensure(count == brute, || format!("n={n} p={p} j={j} y={y:?} k={k}: {count} vs brute {brute}"))?;
                        if rank == sys.len() {
                            ensure(count == bound, || format!("smooth {y:?} (p={p}, j={j}, k={k}): {count} != {bound}"))?;
                            smooth += 1;
                        } else {
                            ensure(count <= bound, || format!("singular {y:?} (p={p}, k={k}): {count} > {bound}"))?;
                            singular += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{smooth} smooth and {singular} singular lifts"))
}

// 4 -----------------------------------------------------------------------

fn random_complex(len: usize, g: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..len).map(|_| Complex64::new(g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0))).collect()
}

fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn max_gap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

const TRANSFORM_CAP: u128 = 1 << 21;
const KERNEL_COMPARE_CAP: u128 = 1 << 18;

fn transform_identities(g: &mut ChaCha8Rng) -> Result<(usize, Vec<String>), String> {
    let mut grids = 0;
    let mut skipped = Vec::new();
    for p in [3u64, 5, 7] {
        for r in 1..=3 {
            for n in 1..=3usize {
                let m = modulus(p, r);
                let size = m.ambient_size(n);
                if size > TRANSFORM_CAP {
                    skipped.push(format!("({p},{r},{n})"));
                    continue;
                }
                let f = random_complex(size as usize, g);
                let h = random_complex(size as usize, g);
                let scale = max_norm(&f);
                let mut tables = Vec::new();
                // The quadratic reference kernel is only run where it is cheap.
                for name in KERNEL_NAMES.iter().filter(|&&k| size <= KERNEL_COMPARE_CAP || k != "direct") {
                    let t = lab(Transformer::with_kernel(&m, n, lab(kernel_by_name(name))?))?;
                    let ft = lab(t.forward(&f))?;
                    let back = lab(t.inverse(&ft))?;
                    ensure(max_gap(&back, &f) <= 1e-9 * scale, || format!("round trip fails at ({p},{r},{n}) with {name}"))?;
                    let lhs: f64 = f.iter().map(|z| z.norm_sqr()).sum();
                    let rhs: f64 = ft.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * size as f64;
                    ensure((lhs - rhs).abs() <= 1e-9 * lhs, || format!("Parseval fails at ({p},{r},{n}) with {name}"))?;
                    let conv = lab(t.forward(&lab(t.convolve(&f, &h))?))?;
                    let hh = lab(t.forward(&h))?;
                    let prod: Vec<Complex64> = ft.values.iter().zip(&hh.values).map(|(a, b)| a * b).collect();
                    ensure(max_gap(&conv.values, &prod) <= 1e-9 * max_norm(&prod).max(1e-300), || {
                        format!("convolution theorem fails at ({p},{r},{n}) with {name}")
                    })?;
                    tables.push(ft.values);
                }
                ensure(tables.len() < 2 || max_gap(&tables[0], &tables[1]) <= 1e-9 * max_norm(&tables[0]), || {
                    format!("kernels disagree at ({p},{r},{n})")
                })?;
                if size <= 729 {
                    let naive = common::dft(&m, n, &f);
                    ensure(max_gap(&naive, &tables[0]) <= 1e-9 * max_norm(&naive), || format!("naive DFT disagrees at ({p},{r},{n})"))?;
                }
                grids += 1;
            }
        }
    }
    Ok((grids, skipped))
}

/// Every frequency when the whole table is cheap, else one sample per valuation.
fn frequencies(m: &Modulus, n: usize, exhaustive: bool, g: &mut ChaCha8Rng) -> Vec<Vec<u64>> {
    if exhaustive {
        return all_vectors(m.q(), n).collect();
    }
    let mut out = vec![vec![0; n]];
    for nu in 0..m.r() {
        let level = m.pow_p(m.r() - nu);
        let mut f: Vec<u64> = (0..n).map(|_| g.gen_range(0..level)).collect();
        if f.iter().all(|&c| c % m.p() == 0) {
            f[0] = 1;
        }
        out.push(f.iter().map(|&c| c * m.pow_p(nu)).collect());
    }
    out
}

fn sphere_transforms(g: &mut ChaCha8Rng) -> Result<usize, String> {
    let mut spheres = 0;
    for p in [3u64, 5, 7] {
        for r in 1..=3 {
            for n in 2..=3usize {
                let m = modulus(p, r);
                let mut forms = vec![DiagonalForm::distance(n)];
                if p != 3 {
                    forms.push(cubic(n));
                }
                let units = m.units().count() as u128;
                let exhaustive = m.ambient_size(n) * units <= 1 << 18;
                for form in forms {
                    let freqs = frequencies(&m, n, exhaustive, g);
                    // One independent whole-space pass at a primitive frequency.
                    let streamed = lab(sphere_fourier_all_radii(&form, &m, &freqs[1]))?;
                    for j in m.units() {
                        let spec = lab(SphereSpec::new(form.clone(), m.clone(), j))?;
                        let sf = SphereFourier::new(&spec);
                        let table = if exhaustive {
                            let pts = lab(sphere_points(&spec, SpherePath::Oracle))?;
                            Some(lab(lab(Transformer::new(&m, n))?.forward(&indicator(&pts)))?)
                        } else {
                            None
                        };
                        for f in &freqs {
                            let red = lab(sf.reduced(f))?;
                            let dir = lab(sf.direct(f))?;
                            ensure((dir - red).norm() <= 1e-9, || {
                                format!("{form:?} p={p} r={r} j={j} m={f:?}: reduced {red}, direct {dir}")
                            })?;
                            if let Some(t) = &table {
                                let idx = padic_lab::ring::vector::encode(m.q(), f) as usize;
                                ensure((red - t.values[idx]).norm() <= 1e-9, || {
                                    format!("{form:?} p={p} r={r} j={j} m={f:?}: reduced {red}, transform {}", t.values[idx])
                                })?;
                            }
                        }
                        let red = lab(sf.reduced(&freqs[1]))?;
                        ensure((red - streamed[j as usize]).norm() <= 1e-9, || {
                            format!("{form:?} p={p} r={r} j={j}: reduced {red}, streamed {}", streamed[j as usize])
                        })?;
                        spheres += 1;
                    }
                }
            }
        }
    }
    Ok(spheres)
}

fn fourier_machinery() -> Check {
    let mut g = rng(4);
    let (grids, skipped) = transform_identities(&mut g)?;
    let spheres = sphere_transforms(&mut g)?;
    Ok(format!(
        "{grids} transform grids (above 2^21 points skipped: {}), {spheres} unit spheres",
        skipped.join(" ")
    ))
}

// 5 -----------------------------------------------------------------------

/// `max_{m' != 0 mod p} |1^_S(p^{r-1} m')| p^{r + (n-1)/2}`.
fn deep_constant(spec: &SphereSpec) -> Result<f64, String> {
    let m = &spec.modulus;
    let n = spec.arity();
    let sf = SphereFourier::new(spec);
    let scale = m.pow_p(m.r() - 1);
    let mut best: f64 = 0.0;
    for f in all_vectors(m.p(), n).skip(1) {
        let freq: Vec<u64> = f.iter().map(|&c| c * scale).collect();
        best = best.max(lab(sf.reduced(&freq))?.norm());
    }
    Ok(best * (m.p() as f64).powf(m.r() as f64 + (n as f64 - 1.0) / 2.0))
}

fn uniformity() -> Check {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for p in [7u64, 11] {
        for n in 2..=3usize {
            for (form, k) in [(DiagonalForm::distance(n), 2), (cubic(n), 3)] {
                for j in radius_classes(p, k) {
                    let base = deep_constant(&lab(SphereSpec::new(form.clone(), modulus(p, 1), j))?)?;
                    let profile = lab(fourier_bound_profile(&lab(SphereSpec::new(form.clone(), modulus(p, 1), j))?))?;
                    ensure((profile.c2 - base).abs() <= 1e-9 * base, || format!("profile and direct deep constants differ at p={p}"))?;
                    for r in 2..=3 {
                        let c = deep_constant(&lab(SphereSpec::new(form.clone(), modulus(p, r), j))?)?;
                        worst = worst.max(c / base);
                        ensure(c <= 2.0 * base, || format!("{form:?} p={p} r={r} j={j}: {c} > 2 x {base}"))?;
                        cases += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{cases} (form, p, n, r, radius class) cases, max c(r)/c(1) = {worst:.4}"))
}

// 6 -----------------------------------------------------------------------

fn energy_bounds() -> Check {
    let mut circles = 0;
    let mut orbits = 0;
    for p in [3u64, 5, 7, 13] {
        let rmax = if p == 13 { 2 } else { 3 };
        for r in 1..=rmax {
            let m = modulus(p, r);
            let bound = 2 * m.pow_p(r - 1);
            for j in m.units() {
                let f = lab(energy_fiber_max(&lab(sphere_points(&SphereSpec::circle(&m, j), SpherePath::Auto))?))?;
                ensure(f.max <= bound, || format!("circle p={p} r={r} j={j}: fibre {} > {bound}", f.max))?;
                circles += 1;
            }
            let g = lab(rotation_group(&m))?;
            let mut seen = std::collections::HashSet::new();
            for x in all_vectors(m.q(), 2).skip(1) {
                if seen.contains(&x) {
                    continue;
                }
                let orb = lab(orbit(&g, &m, &x))?;
                seen.extend(orb.points());
                let (v, prim) = lab(split(&m, &x))?;
                let inner = m.truncate(r - v);
                let norm = (prim[0] * prim[0] + prim[1] * prim[1]) % inner.q();
                if !inner.is_unit(norm) {
                    continue;
                }
                let f = lab(energy_fiber_max(&orb))?;
                let bound = 2 * m.pow_p(r - v - 1);
                ensure(f.max <= bound, || format!("orbit of {x:?} (p={p} r={r}): fibre {} > {bound}", f.max))?;
                orbits += 1;
            }
        }
    }
    Ok(format!("{circles} unit circles, {orbits} non-isotropic orbits"))
}

// 7 -----------------------------------------------------------------------

const EXTENSION_TRIALS: usize = 100;

fn carriers(m: &Modulus, with_circles: bool, with_orbits: bool) -> Result<Vec<SurfaceMeasureView>, String> {
    let p = m.p();
    let g = non_residue(p);
    let mut out = Vec::new();
    if with_circles {
        for j in [1, g] {
            out.push(lab(SurfaceMeasureView::circle(m, j))?);
        }
    }
    if with_orbits {
        let group = lab(rotation_group(m))?;
        let second = all_vectors(p, 2).find(|v| (v[0] * v[0] + v[1] * v[1]) % p == g).unwrap();
        for v in 0..m.r() {
            let s = m.pow_p(v);
            for base in [[1, 0], [second[0], second[1]]] {
                out.push(lab(SurfaceMeasureView::orbit(&group, m, &[base[0] * s, base[1] * s]))?);
            }
        }
    }
    Ok(out)
}

fn max_ratio(view: &SurfaceMeasureView, g: &mut ChaCha8Rng) -> Result<f64, String> {
    let mut best = lab(extension_ratio(view))?.ratio;
    for _ in 0..EXTENSION_TRIALS {
        let w = lab(view.clone().with_weights(random_complex(view.carrier.len(), g)))?;
        best = best.max(lab(extension_ratio(&w))?.ratio);
    }
    Ok(best)
}

fn extension_estimates() -> Check {
    let mut g = rng(7);
    let mut summary = Vec::new();
    for (p, circles, orbits) in [(3u64, true, true), (7, true, true), (5, true, true), (13, true, true)] {
        let mut pinned: f64 = 0.0;
        for view in carriers(&modulus(p, 1), circles, orbits)? {
            pinned = pinned.max(max_ratio(&view, &mut g)?);
        }
        let c_ext = 2.0 * pinned;
        let mut worst: f64 = 0.0;
        for r in 2..=3 {
            for view in carriers(&modulus(p, r), circles, orbits)? {
                let ratio = max_ratio(&view, &mut g)?;
                ensure(ratio <= c_ext, || format!("p={p} r={r} {:?}: ratio {ratio} > C_ext {c_ext}", view.kind))?;
                worst = worst.max(ratio);
            }
        }
        summary.push(format!("p={p}: C_ext={c_ext:.3}, max r>1 ratio {worst:.3}"));
    }
    let e = lab(extension_ratio(&lab(SurfaceMeasureView::circle(&modulus(3, 1), 1))?))?;
    ensure((e.lhs - 9.0 / 8.0).abs() <= 1e-12 && (e.rhs - 4.0 / 3.0).abs() <= 1e-12, || {
        format!("closed form at (3,1): lhs {} rhs {}", e.lhs, e.rhs)
    })?;
    Ok(summary.join("; "))
}

// 8 -----------------------------------------------------------------------

fn decomposition() -> Check {
    let p = 7;
    let mut g = rng(8);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n in 2..=3usize {
        for r in 1..=2 {
            let m = modulus(p, r);
            let form = DiagonalForm::distance(n);
            let spheres: Vec<_> = m.units().map(|j| lab(sphere_constant(&form, &m, j))).collect::<Result<_, _>>()?;
            for t in 0..100 {
                let e1 = common::random_set(&m, n, g.gen_range(0.05..0.95), 1000 * t + 1);
                let e2 = common::random_set(&m, n, g.gen_range(0.05..0.95), 1000 * t + 2);
                let census = lab(distance_census(&form, &e1, &e2, CensusPath::Convolution))?;
                ensure(census.total() == (e1.len() * e2.len()) as u128, || "census conservation".into())?;
                if e1.len() * e2.len() <= 1_000_000 {
                    ensure(census.counts == common::census(&form, &e1, &e2), || format!("census differs from pair loop, n={n} r={r}"))?;
                }
                for s in &spheres {
                    let d = decompose(&census, s);
                    ensure(d.main + d.error == num_rational::Ratio::from_integer(d.count as i128), || "N != M + E".into())?;
                    ensure(d.holds, || format!("n={n} r={r} j={}: |E| = {} > {}", s.radius, d.error_f64().abs(), d.bound))?;
                    if d.bound > 0.0 {
                        worst = worst.max(d.error_f64().abs() / d.bound);
                    }
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} (pair, radius) cases, max |E|/bound = {worst:.4}"))
}

// 9 -----------------------------------------------------------------------

fn coverage_threshold() -> Check {
    let m = modulus(7, 2);
    let form = DiagonalForm::distance(3);
    let grid = [1.0 / 49.0, 1.0 / 14.0, 1.0 / 7.0, 2.0 / 7.0, 4.0 / 7.0];
    let rows = lab(threshold_experiment(&form, &m, 3, &grid, 20, 9))?;
    let at = rows.last().unwrap();
    ensure(at.full_coverage_trials == 20, || format!("delta = 4/7 covered U_r in {}/20 trials", at.full_coverage_trials))?;
    let measured = rows.iter().find(|r| r.full_coverage_trials == r.trials).map(|r| r.density).unwrap();
    Ok(format!(
        "20/20 at delta = 4/7; smallest grid density with 20/20: {measured:.4} (= {:.3} p^-1)",
        measured * 7.0
    ))
}

// 10 ----------------------------------------------------------------------

fn sharpness() -> Check {
    let mut lines = Vec::new();
    for l in 1..=2u64 {
        for r in 1..=2 {
            let ex = lab(sharpness_example_odd(5, 3, 2, l, r))?;
            let c = lab(distance_census(&DiagonalForm::power_sum(3, 2), &ex.set, &ex.set, CensusPath::Convolution))?;
            let bound = 2 * l * 5u64.pow(r - 1);
            ensure((c.distance_set.len() as u64) < bound, || format!("odd l={l} r={r}: |Delta| = {} >= {bound}", c.distance_set.len()))?;
            lines.push(format!("odd(l={l},r={r}) {}<{bound}", c.distance_set.len()));
        }
    }
    for (p, n, rmax) in [(3u64, 2usize, 2u32), (7, 2, 2), (3, 6, 2), (7, 6, 1)] {
        for c in (1..=p + 1).filter(|c| (p + 1) % c == 0) {
            for r in 1..=rmax {
                let ex = lab(sharpness_example_even(p, n, c, r))?;
                let census = lab(distance_census(&DiagonalForm::distance(n), &ex.set, &ex.set, CensusPath::Convolution))?;
                let bound = p.pow(r - 1) * (p + 1) / c;
                ensure(census.distance_set.len() as u64 <= bound, || {
                    format!("even p={p} n={n} C={c} r={r}: |Delta| = {} > {bound}", census.distance_set.len())
                })?;
                lines.push(format!("even(p={p},n={n},C={c},r={r}) {}<={bound}", census.distance_set.len()));
            }
        }
    }
    Ok(format!("{} instances", lines.len()))
}

// 11 ----------------------------------------------------------------------

fn configuration_counts() -> Check {
    let mut checks = 0;
    let d1 = DiagonalForm::distance(1);
    let d2 = DiagonalForm::distance(2);
    let rect_sets = [
        (d1.clone(), PointSet::full(&modulus(5, 1), 2)),
        (d1.clone(), PointSet::full(&modulus(3, 2), 2)),
        (d2.clone(), PointSet::full(&modulus(3, 1), 4)),
        (d2.clone(), common::random_set(&modulus(5, 1), 4, 0.5, 11)),
        (d2.clone(), common::random_set(&modulus(3, 2), 4, 0.1, 12)),
    ];
    for (form, set) in &rect_sets {
        if (set.len() as u128).pow(2) > 1_000_000 {
            continue;
        }
        for j in set.modulus().units() {
            let fast = lab(count_rectangles(form, set, j))?;
            ensure(fast == common::rectangles(form, set, j), || format!("rectangles differ, j={j}"))?;
            checks += 1;
        }
    }

    let small_sets = [
        PointSet::full(&modulus(3, 1), 2),
        PointSet::full(&modulus(5, 1), 2),
        PointSet::full(&modulus(3, 1), 3),
        common::random_set(&modulus(7, 1), 2, 0.6, 21),
        common::random_set(&modulus(3, 2), 2, 0.35, 22),
        common::random_set(&modulus(5, 2), 2, 0.05, 23),
    ];
    for set in &small_sets {
        let n = set.arity();
        let form = DiagonalForm::distance(n);
        let size = set.len() as u128;
        for j in set.modulus().units() {
            if size.pow(4) <= 1_000_000 {
                for distinct in [false, true] {
                    let fast = lab(count_cycles4(&form, set, j, distinct))?;
                    ensure(fast == common::cycles4(&form, set, j, distinct), || format!("4-cycles differ, j={j}"))?;
                    checks += 1;
                }
            }
            for k in 1..=3 {
                if size.pow(k as u32 + 1) <= 1_000_000 {
                    ensure(lab(count_chains(&form, set, j, k))? == common::chains(&form, set, j, k), || format!("{k}-chains differ"))?;
                    checks += 1;
                }
            }
        }
        let shapes = [TreeShape::path(1), TreeShape::path(2), TreeShape::star(2)];
        for shape in &shapes {
            if size.pow(shape.edge_count() as u32) > 1_000_000 {
                continue;
            }
            for pin in set.sorted_points().into_iter().take(3) {
                for injective in [false, true] {
                    let t = lab(count_pinned_trees(&form, set, shape, &pin, injective))?;
                    let (distinct, embeddings) = common::trees(&form, set, shape, &pin, injective);
                    ensure(t.distinct == distinct && t.embeddings == embeddings, || format!("trees differ for {shape:?}"))?;
                    checks += 1;
                }
            }
        }
    }

    for (p, r, n) in [(3u64, 1u32, 2usize), (3, 2, 2), (5, 1, 2), (7, 1, 2), (3, 1, 3), (3, 1, 4)] {
        let m = modulus(p, r);
        let form = DiagonalForm::distance(n);
        let full = PointSet::full(&m, n);
        for j in m.units() {
            let walks = lab(count_cycles4(&form, &full, j, false))?;
            let spectral = lab(count_cycles4_spectral(&form, &m, n, j))?;
            ensure((spectral - walks as f64).abs() <= 1e-6 * walks.max(1) as f64, || {
                format!("spectral {spectral} vs {walks} at ({p},{r},{n}) j={j}")
            })?;
            ensure(walks == common::cycles4(&form, &full, j, false), || "spectral instance oracle".into())?;
            checks += 1;
        }
    }
    Ok(format!("{checks} counts against loop oracles"))
}

// 12 ----------------------------------------------------------------------

fn incidence_bound() -> Check {
    let p = 7;
    let form = DiagonalForm::distance(2);
    let c1 = lab(incidence_constant(&form, &modulus(p, 1)))?;
    let c2 = lab(incidence_constant(&form, &modulus(p, 2)))?;
    ensure(c2.total <= 2.0 * c1.total, || format!("C(2) = {} > 2 C(1) = {}", c2.total, 2.0 * c1.total))?;
    let mut g = rng(12);
    let mut worst: f64 = f64::NEG_INFINITY;
    for r in 1..=2 {
        let m = modulus(p, r);
        let units: Vec<u64> = m.units().collect();
        for t in 0..20 {
            let points = common::random_set(&m, 2, g.gen_range(0.1..0.9), 500 + t);
            let count = g.gen_range(1..=m.ambient_size(2) as usize);
            let spheres: Vec<FSphere> = (0..count)
                .map(|_| FSphere {
                    center: vec![g.gen_range(0..m.q()), g.gen_range(0..m.q())],
                    radius: units[g.gen_range(0..units.len())],
                })
                .collect();
            let rep = lab(incidence_report(&form, &points, &spheres, c1.total))?;
            if (points.len() * spheres.len()) as u128 <= 2_000_000 {
                ensure(rep.incidences == common::incidences(&form, &points, &spheres), || "incidence count differs from loop".into())?;
            }
            ensure(rep.holds, || format!("r={r}: I = {} > {}", rep.incidences, rep.bound))?;
            worst = worst.max(rep.empirical_ratio);
        }
    }
    Ok(format!(
        "C(1) = {:.4}, C(2) = {:.4}, max empirical ratio {worst:.4}",
        c1.total, c2.total
    ))
}

fn main() {
    let criteria: [Criterion; 12] = [
        (1, "exact circle cardinalities", 30, exact_cardinalities),
        (2, "group and orbit exactness", 30, group_orbits),
        (3, "Hensel lift counts", 10, hensel_counts),
        (4, "Fourier machinery", 60, fourier_machinery),
        (5, "r-uniform deep constants", 120, uniformity),
        (6, "energy bounds", 60, energy_bounds),
        (7, "extension estimates", 120, extension_estimates),
        (8, "pair-count decomposition", 120, decomposition),
        (9, "unit coverage above threshold", 120, coverage_threshold),
        (10, "sharpness examples", 60, sharpness),
        (11, "configuration counts", 120, configuration_counts),
        (12, "incidence bound", 60, incidence_bound),
    ];
    let mut failures = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let (status, detail) = match (&result, in_time) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("over the {budget} s budget; {d}")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failures += 1;
        }
        println!("criterion {id:>2} {status} {:>8.2} s / {budget:>3} s  {name}: {detail}", elapsed.as_secs_f64());
    }
    println!("{} of 12 criteria passed", 12 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
