use std::collections::HashSet;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Assertion, Verification, VerifyParams, VerifyReport};
use crate::distance::{
    decompose, distance_census, incidence_constant, incidence_report, random_subset, rich_pins,
    sphere_constant, CensusPath, FSphere,
};
use crate::error::{LabError, Result};
use crate::hensel::{jacobian_rank_mod_p, lift_count, solutions_mod_p, PolySystem};
use crate::ring::vector::{all_vectors, split};
use crate::ring::{DiagonalForm, Modulus, PointSet};
use crate::rotations::{
    energy_fiber_max, expected_group_order, extension_ratio, extension_ratio_direct, orbit,
    orbit_as_scaled_circle, rotation_group, stabilizer, Rotation, SurfaceMeasureView,
};
use crate::spectral::{
    complete_sum, complete_sum_bound, complete_sum_constants, complete_sum_exhaustive,
    fourier_bound_profile, indicator, moment_regime, second_moment_one_var, sphere_fourier,
    weil_sum, FourierPath, MomentRegime, Transformer,
};
use crate::varieties::{
    circle_cardinality_formula, circle_decomposition, mod_p_solution_count, sphere_points,
    SpherePath, SphereSpec,
};

type Runner = fn(&VerifyParams) -> Result<VerifyReport>;

struct Check {
    id: &'static str,
    summary: &'static str,
    runner: Runner,
}

impl Verification for Check {
    fn id(&self) -> &'static str {
        self.id
    }

    fn summary(&self) -> &'static str {
        self.summary
    }

    fn run(&self, params: &VerifyParams) -> Result<VerifyReport> {
        (self.runner)(params)
    }
}

pub(super) fn all() -> Vec<Arc<dyn Verification>> {
    let table: [(&'static str, &'static str, Runner); 20] = [
        ("hensel-2.1", "lift counts above smooth and singular base points", hensel),
        ("weil-2.2", "Weil bound for one-variable sums mod p", weil),
        ("count-2.3", "mod-p solution counts of F = j", solution_count),
        ("fourier-2.5", "sphere Fourier reduction and r-uniform constants", fourier),
        ("sums-2.6", "two-stratum bound for lifted complete sums", complete_sums),
        ("moment-2.7", "one-variable second moments", moment),
        ("group-4.1", "order and closure of the rotation group", group),
        ("orbit-4.2", "orbit-stabilizer and orbits as scaled circles", orbits),
        ("circle-4.4", "circle cardinalities for p = 3 mod 4", circles_3),
        ("energy-4.5", "difference fibers on circles, p = 3 mod 4", energy_circles_3),
        ("energy-4.6", "difference fibers on orbits, p = 3 mod 4", energy_orbits_3),
        ("ext-4.1T", "L2 to L4 extension on circles, p = 3 mod 4", ext_circles_3),
        ("ext-4.2T", "L2 to L4 extension on orbits, p = 3 mod 4", ext_orbits_3),
        ("ext-4.3T", "L2 to L4 extension on circles and orbits, p = 1 mod 4", ext_split),
        ("circle-4.9", "circle cardinalities for p = 1 mod 4", circles_1),
        ("energy-4.10", "difference fibers on circles, p = 1 mod 4", energy_circles_1),
        ("energy-4.11", "difference fibers on orbits, p = 1 mod 4", energy_orbits_1),
        ("decomp-3", "pair counts split into main term and Fourier error", decomposition),
        ("pinned-6.2", "pins with many unit distances", pinned),
        ("incidence-6.3", "point-sphere incidence bound", incidences_check),
    ];
    table
        .into_iter()
        .map(|(id, summary, runner)| Arc::new(Check { id, summary, runner }) as Arc<dyn Verification>)
        .collect()
}

fn power_form(n: usize, k: u32) -> DiagonalForm {
    if k == 2 {
        DiagonalForm::distance(n)
    } else {
        DiagonalForm::power_sum(n, k)
    }
}

fn require_class(p: u64, class: u64) -> Result<()> {
    if p % 4 != class {
        return Err(LabError::WrongResidueClass { p });
    }
    Ok(())
}

fn rng(params: &VerifyParams, salt: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(salt);
    rng
}

fn hensel(params: &VerifyParams) -> Result<VerifyReport> {
    let p = params.p.unwrap_or(5);
    let kmax = params.k.unwrap_or(2);
    let n = 2;
    let mut rep = VerifyReport::new("hensel-2.1");
    rep.param("p", p).param("k_max", kmax).param("l", 1).param("system", "x^2 + y^2 - j, all j mod p");
    let form = DiagonalForm::distance(n);
    let (mut smooth, mut smooth_exact, mut singular, mut singular_ok, mut oracle_ok, mut oracle_total) =
        (0u128, 0u128, 0u128, 0u128, 0u128, 0u128);
    for j in 0..p {
        let sys = PolySystem::from_form(&form, j as i64);
        for y in solutions_mod_p(&sys, p)? {
            let rank = jacobian_rank_mod_p(&sys, &y, p)?;
            for k in 1..=kmax {
                let count = lift_count(&sys, p, &y, 1, k)?;
                let bound = (p as u128).pow(k * (n - rank) as u32);
                if rank == sys.len() {
                    smooth += 1;
                    smooth_exact += (count == bound) as u128;
                } else {
                    singular += 1;
                    singular_ok += (count <= bound) as u128;
                }
                let top = Modulus::new(p, k + 1)?;
                let pk = top.pow_p(k);
                if (pk as u128).pow(n as u32) <= 1 << 16 || params.oracle {
                    let brute = all_vectors(pk, n)
                        .filter(|z| {
                            let x: Vec<u64> = y.iter().zip(z).map(|(&yi, &zi)| top.add(yi, top.mul(p, zi))).collect();
                            sys.vanishes(&top, &x)
                        })
                        .count() as u128;
                    oracle_total += 1;
                    oracle_ok += (brute == count) as u128;
                }
            }
        }
    }
    rep.check(Assertion::equal("smooth base points lift to exactly p^{k(n-R)}", smooth_exact, smooth))
        .check(Assertion::equal("singular base points stay below p^{k(n-R)}", singular_ok, singular))
        .check(Assertion::equal("lift counts equal brute force", oracle_ok, oracle_total));
    rep.constant("smooth_cases", smooth as u64).constant("singular_cases", singular as u64);
    Ok(rep)
}

fn weil(params: &VerifyParams) -> Result<VerifyReport> {
    let p = params.p.unwrap_or(7);
    let k = params.k.unwrap_or(3);
    let mut rep = VerifyReport::new("weil-2.2");
    rep.param("p", p).param("k", k).param("family", "a x^k + b x, a unit");
    let mut worst: f64 = 0.0;
    let mut bound = 0.0;
    for a in 1..p {
        for b in 0..p {
            let mut coeffs = vec![0i64; k as usize + 1];
            coeffs[k as usize] = a as i64;
            coeffs[1] += b as i64;
            let w = weil_sum(&coeffs, p)?;
            worst = worst.max(w.magnitude);
            bound = w.bound;
        }
    }
    rep.check(Assertion::at_most("max |sum| <= (k - 1) sqrt(p)", worst, bound + 1e-9));
    rep.constant("max_magnitude", worst).constant("ratio", worst / bound);
    Ok(rep)
}

fn solution_count(params: &VerifyParams) -> Result<VerifyReport> {
    let p = params.p.unwrap_or(7);
    let n = params.n.unwrap_or(2);
    let k = params.k.unwrap_or(2);
    let form = power_form(n, k);
    let mut rep = VerifyReport::new("count-2.3");
    rep.param("p", p).param("n", n).param("k", k);
    let m = Modulus::new(p, 1)?;
    let mut total = 0u128;
    let mut agree = 0u128;
    let mut worst: f64 = 0.0;
    for j in 0..p {
        let spec = SphereSpec::new(form.clone(), m.clone(), j)?;
        let brute = sphere_points(&spec, SpherePath::Oracle)?.len() as u128;
        total += brute;
        if j != 0 {
            let r = mod_p_solution_count(&form, p, j)?;
            agree += (r.count == brute) as u128;
            worst = worst.max(r.deviation);
        }
    }
    rep.check(Assertion::equal("counts agree with brute force for every unit j", agree, p as u128 - 1))
        .check(Assertion::equal("sum over all j equals p^n", total, (p as u128).pow(n as u32)));
    rep.constant("max_relative_deviation", worst)
        .constant("deviation_times_sqrt_p", worst * (p as f64).sqrt());
    Ok(rep)
}

fn fourier(params: &VerifyParams) -> Result<VerifyReport> {
    let p = params.p.unwrap_or(7);
    let r = params.r.unwrap_or(2);
    let n = params.n.unwrap_or(2);
    let j = params.j.unwrap_or(1);
    let k = params.k.unwrap_or(2);
    let form = power_form(n, k);
    let mut rep = VerifyReport::new("fourier-2.5");
    rep.param("p", p).param("r", r).param("n", n).param("j", j).param("k", k);
    let m = Modulus::new(p, r)?;
    let spec = SphereSpec::new(form.clone(), m.clone(), j)?;
    let mut g = rng(params, 25);
    let mut worst_gap: f64 = 0.0;
    for nu in 0..r {
        let scale = m.pow_p(nu);
        let level = m.pow_p(r - nu);
        for t in 0..4 {
            let mut mt: Vec<u64> = (0..n).map(|_| g.gen_range(0..level)).collect();
            if t == 0 || mt.iter().all(|&c| c % p == 0) {
                mt[0] = 1 + (t as u64 % (p - 1));
            }
            let freq: Vec<u64> = mt.iter().map(|&c| c * scale % m.q()).collect();
            let direct = sphere_fourier(&spec, &freq, FourierPath::Direct)?;
            let reduced = sphere_fourier(&spec, &freq, FourierPath::Reduced)?;
            worst_gap = worst_gap.max((direct - reduced).norm());
        }
    }
    rep.check(Assertion::at_most("reduced path matches direct path", worst_gap, 1e-9));

    let profile = fourier_bound_profile(&spec)?;
    let base = fourier_bound_profile(&SphereSpec::new(form, m.truncate(1), j)?)?;
    rep.check(Assertion::at_most(
        "deep constant within 2x of its r = 1 value",
        profile.c2,
        2.0 * base.c2,
    ));
    if m.ambient_size(n) <= 1 << 20 {
        let sphere = sphere_points(&spec, SpherePath::Auto)?;
        let table = Transformer::new(&m, n)?.forward(&indicator(&sphere))?;
        let sup = table.values.iter().skip(1).map(|v| v.norm()).fold(0.0, f64::max);
        let from_profile = profile
            .strata
            .iter()
            .map(|s| s.max_magnitude)
            .fold(0.0, f64::max);
        rep.check(Assertion::close("profile maxima cover the full transform", from_profile, sup, 1e-9));
    }
    rep.constant("c2", profile.c2)
        .constant("c3", profile.c3)
        .constant("c2_at_r1", base.c2)
        .constant("kappa", profile.kappa)
        .constant("alignment_max", profile.alignment_max)
        .constant("strata", &profile.strata);
    Ok(rep)
}

fn complete_sums(params: &VerifyParams) -> Result<VerifyReport> {
    let p = params.p.unwrap_or(3);
    let r = params.r.unwrap_or(2);
    let n = params.n.unwrap_or(2);
    let k = params.k.unwrap_or(2);
    let form = power_form(n, k);
    let mut rep = VerifyReport::new("sums-2.6");
    rep.param("p", p).param("r", r).param("n", n).param("k", k);
    let m = Modulus::new(p, r)?;
    crate::limits::check_search(m.ambient_size(n + 1))?;
    let constants = complete_sum_constants(&form, p)?;
    let (mut pairs, mut within, mut worst) = (0u128, 0u128, 0.0f64);
    let (mut compared, mut agree) = (0u128, 0u128);
    for s in 0..m.q() {
        for freq in all_vectors(m.q(), n) {
            if s == 0 && freq.iter().all(|&c| c == 0) {
                continue;
            }
            let value = complete_sum(&form, &m, &freq, s)?;
            let bound = complete_sum_bound(&constants, n, &m, &freq, s);
            pairs += 1;
            within += (value.norm() <= bound * (1.0 + 1e-9) + 1e-9) as u128;
            worst = worst.max(value.norm() / bound);
            if params.oracle || (s + freq[0]) % 5 == 0 {
                compared += 1;
                let brute = complete_sum_exhaustive(&form, &m, &freq, s)?;
                agree += ((brute - value).norm() <= 1e-6) as u128;
            }
        }
    }
    rep.check(Assertion::equal("every nonzero pair obeys its stratum bound", within, pairs))
        .check(Assertion::equal("factorized sums equal exhaustive sums", agree, compared));
    rep.constant("c1", constants.c1)
        .constant("c2", constants.c2)
        .constant("kappa", constants.kappa)
        .constant("max_ratio_to_bound", worst);
    Ok(rep)
}

fn moment(params: &VerifyParams) -> Result<VerifyReport> {
    let p = params.p.unwrap_or(3);
    let rmax = params.r.unwrap_or(3);
    let k = params.k.unwrap_or(2);
    let mut rep = VerifyReport::new("moment-2.7");
    rep.param("p", p).param("r_max", rmax).param("k", k).param("a", 1);
    let mut agree = 0u128;
    let mut total = 0u128;
    let mut per_r = Vec::new();
    for r in 1..=rmax {
        let m = Modulus::new(p, r)?;
        let (mut generic, mut degenerate) = (0.0f64, 0.0f64);
        for f in 0..m.q() {
            let s = second_moment_one_var(1, k, f, r, p)?;
            total += 1;
            agree += ((s.value - s.via_fibers).abs() <= 1e-6 * s.value.max(1.0)) as u128;
            match moment_regime(&m, k, f) {
                MomentRegime::Generic => generic = generic.max(s.ratio),
                MomentRegime::Degenerate => degenerate = degenerate.max(s.ratio),
            }
        }
        if k == 2 {
            let at_zero = second_moment_one_var(1, 2, 0, r, p)?.value;
            let pf = p as f64;
            let closed = pf.powi(2 * r as i32) * (1.0 + r as f64 * (1.0 - 1.0 / pf));
            rep.check(Assertion::close(
                format!("k = 2, m = 0 moment equals p^(2r)(1 + r(1 - 1/p)) at r = {r}"),
                at_zero,
                closed,
                1e-6 * closed,
            ));
        }
        per_r.push(serde_json::json!({"r": r, "generic_max_ratio": generic, "degenerate_max_ratio": degenerate}));
    }
    rep.check(Assertion::equal("direct moment equals fibre form", agree, total));
    rep.constant("ratios", per_r);
    Ok(rep)
}

fn group(params: &VerifyParams) -> Result<VerifyReport> {
    let p = params.p.unwrap_or(3);
    let r = params.r.unwrap_or(2);
    let mut rep = VerifyReport::new("group-4.1");
    rep.param("p", p).param("r", r);
    let m = Modulus::new(p, r)?;
    let g = rotation_group(&m)?;
    let brute = all_vectors(m.q(), 2)
        .filter(|v| m.add(m.mul(v[0], v[0]), m.mul(v[1], v[1])) == 1)
        .count() as u128;
    rep.check(Assertion::equal("|G_r| equals p^r (1 +- 1/p)", g.len() as u128, expected_group_order(&m)))
        .check(Assertion::equal("|G_r| equals brute-force count", g.len() as u128, brute));
    let members: HashSet<Rotation> = g.iter().copied().collect();
    let closed = g.iter().all(|a| {
        members.contains(&a.inverse(&m)) && g.iter().all(|b| members.contains(&a.compose(&m, b)))
    });
    rep.check(Assertion::holds("closed under composition and inverse", closed));
    rep.constant("order", g.len());
    Ok(rep)
}

fn orbits(params: &VerifyParams) -> Result<VerifyReport> {
    let p = params.p.unwrap_or(3);
    let r = params.r.unwrap_or(2);
    let mut rep = VerifyReport::new("orbit-4.2");
    rep.param("p", p).param("r", r);
    let m = Modulus::new(p, r)?;
    let g = rotation_group(&m)?;
    let order = g.len() as u128;
    let (mut points, mut os_ok, mut circle_ok) = (0u128, 0u128, 0u128);
    for x in all_vectors(m.q(), 2).skip(1) {
        points += 1;
        let orb = orbit(&g, &m, &x)?;
        let stab = stabilizer(&g, &m, &x)?;
        os_ok += (orb.len() as u128 * stab.len() as u128 == order) as u128;
        if m.p_mod_4() == 3 {
            circle_ok += (orbit_as_scaled_circle(&m, &x)? == orb) as u128;
        }
    }
    rep.check(Assertion::equal("|stab| |orb| = |G_r| for every x != 0", os_ok, points));
    if m.p_mod_4() == 3 {
        rep.check(Assertion::equal("orb(x) = p^v C_{r-v, |x~|} for every x != 0", circle_ok, points));
    }
    rep.constant("group_order", order as u64);
    Ok(rep)
}

fn circle_cardinalities(id: &str, class: u64, default_p: u64, params: &VerifyParams) -> Result<VerifyReport> {
    let p = params.p.unwrap_or(default_p);
    require_class(p, class)?;
    let r = params.r.unwrap_or(2);
    let mut rep = VerifyReport::new(id);
    rep.param("p", p).param("r", r);
    let m = Modulus::new(p, r)?;
    let path = if params.oracle { SpherePath::Oracle } else { SpherePath::Auto };
    let mut total = 0u128;
    for j in 0..m.q() {
        let pts = sphere_points(&SphereSpec::circle(&m, j), path)?;
        total += pts.len() as u128;
        rep.check(Assertion::equal(
            format!("|C_({r},{j})| matches the closed form"),
            pts.len() as u128,
            circle_cardinality_formula(p, r, j)?,
        ));
        if class == 3 {
            let desc = circle_decomposition(p, r, j)?;
            rep.check(Assertion::holds(format!("C_({r},{j}) equals its layered description"), desc.materialize()? == pts));
        }
    }
    rep.check(Assertion::equal("circles partition the plane", total, m.ambient_size(2)));
    Ok(rep)
}

fn circles_3(params: &VerifyParams) -> Result<VerifyReport> {
    circle_cardinalities("circle-4.4", 3, 3, params)
}

fn circles_1(params: &VerifyParams) -> Result<VerifyReport> {
    circle_cardinalities("circle-4.9", 1, 5, params)
}

fn energy_circles(id: &str, class: u64, default_p: u64, params: &VerifyParams) -> Result<VerifyReport> {
    let p = params.p.unwrap_or(default_p);
    require_class(p, class)?;
    let r = params.r.unwrap_or(2);
    let mut rep = VerifyReport::new(id);
    rep.param("p", p).param("r", r);
    let m = Modulus::new(p, r)?;
    let bound = 2 * m.pow_p(r - 1) as u128;
    let (mut worst, mut ok, mut total) = (0u64, 0u128, 0u128);
    for j in m.units() {
        let view = SurfaceMeasureView::circle(&m, j)?;
        let f = energy_fiber_max(&view.carrier)?;
        total += 1;
        ok += (f.max as u128 <= bound) as u128;
        worst = worst.max(f.max);
    }
    rep.check(Assertion::equal("every unit circle has fibres <= 2p^(r-1)", ok, total))
        .check(Assertion::at_most_int("largest fibre", worst as u128, bound));
    rep.constant("max_fiber", worst).constant("bound", bound as u64);
    Ok(rep)
}

fn energy_circles_3(params: &VerifyParams) -> Result<VerifyReport> {
    energy_circles("energy-4.5", 3, 3, params)
}

fn energy_circles_1(params: &VerifyParams) -> Result<VerifyReport> {
    energy_circles("energy-4.10", 1, 5, params)
}

/// One generator per orbit of `G_r` on the nonzero vectors, in encoding order.
fn orbit_generators(g: &[Rotation], m: &Modulus) -> Result<Vec<(Vec<u64>, PointSet)>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for x in all_vectors(m.q(), 2).skip(1) {
        if seen.contains(&x) {
            continue;
        }
        let orb = orbit(g, m, &x)?;
        seen.extend(orb.points());
        out.push((x, orb));
    }
    Ok(out)
}

fn is_isotropic(m: &Modulus, x: &[u64]) -> Result<bool> {
    let (v, prim) = split(m, x)?;
    let inner = m.truncate(m.r() - v);
    Ok(!inner.is_unit(inner.add(inner.mul(prim[0], prim[0]), inner.mul(prim[1], prim[1]))))
}

fn energy_orbits(id: &str, class: u64, default_p: u64, params: &VerifyParams) -> Result<VerifyReport> {
    let p = params.p.unwrap_or(default_p);
    require_class(p, class)?;
    let r = params.r.unwrap_or(2);
    let mut rep = VerifyReport::new(id);
    rep.param("p", p).param("r", r);
    let m = Modulus::new(p, r)?;
    let g = rotation_group(&m)?;
    let (mut ok, mut total, mut skipped, mut worst) = (0u128, 0u128, 0u64, 0.0f64);
    for (x, orb) in orbit_generators(&g, &m)? {
        if is_isotropic(&m, &x)? {
            skipped += 1;
            continue;
        }
        let (v, _) = split(&m, &x)?;
        let bound = 2.0 * (p as f64).powi(r as i32 - v as i32 - 1);
        let f = energy_fiber_max(&orb)?;
        total += 1;
        ok += (f.max as f64 <= bound) as u128;
        worst = worst.max(f.max as f64 / bound);
    }
    rep.check(Assertion::equal("every orbit has fibres <= 2p^(r-v-1)", ok, total));
    rep.constant("orbits_checked", total as u64)
        .constant("isotropic_orbits_skipped", skipped)
        .constant("max_fiber_over_bound", worst);
    Ok(rep)
}

fn energy_orbits_3(params: &VerifyParams) -> Result<VerifyReport> {
    energy_orbits("energy-4.6", 3, 3, params)
}

fn energy_orbits_1(params: &VerifyParams) -> Result<VerifyReport> {
    energy_orbits("energy-4.11", 1, 5, params)
}

fn random_weights(g: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|_| Complex64::new(g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0)))
        .collect()
}

/// Smallest non-residue modulo `p`.
fn non_residue(p: u64) -> u64 {
    (2..p).find(|&g| (1..p).all(|x| x * x % p != g)).expect("odd primes have non-residues")
}

#[derive(Clone, Copy, PartialEq)]
enum CarrierKind {
    Circles,
    Orbits,
}

/// Representative carriers at level `r`: unit circles of radius 1 and a
/// non-residue, and orbits `p^v x` for those two norm classes and each `v`.
fn carriers(m: &Modulus, kind: CarrierKind) -> Result<Vec<SurfaceMeasureView>> {
    let p = m.p();
    let g = non_residue(p);
    match kind {
        CarrierKind::Circles => [1, g].iter().map(|&j| SurfaceMeasureView::circle(m, j)).collect(),
        CarrierKind::Orbits => {
            let group = rotation_group(m)?;
            let second = all_vectors(p, 2)
                .find(|v| (v[0] * v[0] + v[1] * v[1]) % p == g)
                .expect("every residue is a sum of two squares");
            let mut out = Vec::new();
            for v in 0..m.r() {
                let s = m.pow_p(v);
                for base in [[1, 0], [second[0], second[1]]] {
                    out.push(SurfaceMeasureView::orbit(&group, m, &[base[0] * s, base[1] * s])?);
                }
            }
            Ok(out)
        }
    }
}

fn extension(id: &str, class: u64, default_p: u64, kinds: &[CarrierKind], params: &VerifyParams) -> Result<VerifyReport> {
    let p = params.p.unwrap_or(default_p);
    require_class(p, class)?;
    let rmax = params.r.unwrap_or(3);
    let trials = params.trials.unwrap_or(20);
    let mut rep = VerifyReport::new(id);
    rep.param("p", p).param("r_max", rmax).param("random_trials", trials);
    let mut g = rng(params, 41);

    let ratios = |view: &SurfaceMeasureView, g: &mut ChaCha8Rng| -> Result<Vec<f64>> {
        let mut out = vec![extension_ratio(view)?.ratio];
        for _ in 0..trials {
            let w = view.clone().with_weights(random_weights(g, view.carrier.len()))?;
            out.push(extension_ratio(&w)?.ratio);
        }
        Ok(out)
    };

    let base = Modulus::new(p, 1)?;
    let mut pinned: f64 = 0.0;
    let mut identity_gap: f64 = 0.0;
    for &kind in kinds {
        for view in carriers(&base, kind)? {
            let a = extension_ratio(&view)?;
            let b = extension_ratio_direct(&view)?;
            identity_gap = identity_gap.max((a.lhs - b.lhs).abs() / b.lhs.max(1e-300));
            pinned = pinned.max(ratios(&view, &mut g)?.into_iter().fold(0.0, f64::max));
        }
    }
    let c_ext = 2.0 * pinned;
    rep.check(Assertion::at_most("energy identity equals direct transform at r = 1", identity_gap, 1e-9));
    let mut per_level = Vec::new();
    for r in 1..=rmax {
        let m = Modulus::new(p, r)?;
        let mut worst: f64 = 0.0;
        for &kind in kinds {
            for view in carriers(&m, kind)? {
                worst = worst.max(ratios(&view, &mut g)?.into_iter().fold(0.0, f64::max));
            }
        }
        rep.check(Assertion::at_most(format!("max ratio at r = {r} within C_ext"), worst, c_ext));
        per_level.push(serde_json::json!({"r": r, "max_ratio": worst}));
    }
    if p == 3 && kinds.contains(&CarrierKind::Circles) {
        let view = SurfaceMeasureView::circle(&base, 1)?;
        let e = extension_ratio(&view)?;
        rep.check(Assertion::close("closed form lhs at (3,1), f = 1", e.lhs, 9.0 / 8.0, 1e-12))
            .check(Assertion::close("closed form rhs at (3,1), f = 1", e.rhs, 4.0 / 3.0, 1e-12));
    }
    rep.constant("c_ext", c_ext).constant("pinned_r1_ratio", pinned).constant("levels", per_level);
    Ok(rep)
}

fn ext_circles_3(params: &VerifyParams) -> Result<VerifyReport> {
    extension("ext-4.1T", 3, 3, &[CarrierKind::Circles], params)
}

fn ext_orbits_3(params: &VerifyParams) -> Result<VerifyReport> {
    extension("ext-4.2T", 3, 3, &[CarrierKind::Orbits], params)
}

fn ext_split(params: &VerifyParams) -> Result<VerifyReport> {
    extension("ext-4.3T", 1, 5, &[CarrierKind::Circles, CarrierKind::Orbits], params)
}

fn decomposition(params: &VerifyParams) -> Result<VerifyReport> {
    let p = params.p.unwrap_or(3);
    let r = params.r.unwrap_or(2);
    let n = params.n.unwrap_or(2);
    let trials = params.trials.unwrap_or(10);
    let density = 1.0 / 3.0;
    let form = DiagonalForm::distance(n);
    let mut rep = VerifyReport::new("decomp-3");
    rep.param("p", p).param("r", r).param("n", n).param("trials", trials).param("density", density);
    let m = Modulus::new(p, r)?;
    let spheres = m.units().map(|j| sphere_constant(&form, &m, j)).collect::<Result<Vec<_>>>()?;
    let mut g = rng(params, 3);
    let (mut cases, mut held, mut exact, mut conserved, mut oracle_ok, mut oracle_total) =
        (0u128, 0u128, 0u128, 0u128, 0u128, 0u128);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let e1 = random_subset(&m, n, density, &mut g);
        let e2 = random_subset(&m, n, density, &mut g);
        let census = distance_census(&form, &e1, &e2, CensusPath::Convolution)?;
        conserved += (census.total() == e1.len() as u128 * e2.len() as u128) as u128;
        if params.oracle || (e1.len() * e2.len()) as u128 <= 1_000_000 {
            oracle_total += 1;
            oracle_ok += (distance_census(&form, &e1, &e2, CensusPath::Loop)? == census) as u128;
        }
        for s in &spheres {
            let d = decompose(&census, s);
            cases += 1;
            held += d.holds as u128;
            exact += (d.main + d.error == num_rational::Ratio::from_integer(d.count as i128)) as u128;
            if d.bound > 0.0 {
                worst = worst.max(d.error_f64().abs() / d.bound);
            }
        }
    }
    rep.check(Assertion::equal("sum_j N_j = |E1||E2|", conserved, trials as u128))
        .check(Assertion::equal("convolution census equals pair loop", oracle_ok, oracle_total))
        .check(Assertion::equal("N = M + E exactly", exact, cases))
        .check(Assertion::equal("|E| within the measured bound", held, cases));
    let c = spheres.iter().map(|s| s.constant).fold(0.0, f64::max);
    rep.constant("max_sphere_constant", c).constant("max_error_over_bound", worst);
    Ok(rep)
}

fn pinned(params: &VerifyParams) -> Result<VerifyReport> {
    let p = params.p.unwrap_or(7);
    let r = params.r.unwrap_or(1);
    let n = params.n.unwrap_or(2);
    let trials = params.trials.unwrap_or(5);
    let density = 0.5;
    let form = DiagonalForm::distance(n);
    let mut rep = VerifyReport::new("pinned-6.2");
    rep.param("p", p).param("r", r).param("n", n).param("trials", trials).param("density", density);
    let m = Modulus::new(p, r)?;
    let mut g = rng(params, 62);
    let mut worst: f64 = f64::INFINITY;
    for t in 0..trials {
        let e1 = random_subset(&m, n, density, &mut g);
        let e2 = random_subset(&m, n, density, &mut g);
        let rich = rich_pins(&form, &e1, &e2)?;
        rep.check(Assertion::at_most(
            format!("trial {t}: |E1| / 32 <= rich pins"),
            e1.len() as f64 / 32.0,
            rich.len() as f64,
        ));
        if !e1.is_empty() {
            worst = worst.min(rich.len() as f64 / e1.len() as f64);
        }
    }
    rep.constant("min_rich_fraction", worst);
    Ok(rep)
}

fn random_spheres(m: &Modulus, n: usize, count: usize, g: &mut ChaCha8Rng) -> Vec<FSphere> {
    let units: Vec<u64> = m.units().collect();
    (0..count)
        .map(|_| FSphere {
            center: (0..n).map(|_| g.gen_range(0..m.q())).collect(),
            radius: units[g.gen_range(0..units.len())],
        })
        .collect()
}

fn incidences_check(params: &VerifyParams) -> Result<VerifyReport> {
    let p = params.p.unwrap_or(7);
    let rmax = params.r.unwrap_or(2);
    let n = params.n.unwrap_or(2);
    let trials = params.trials.unwrap_or(5);
    let form = DiagonalForm::distance(n);
    let mut rep = VerifyReport::new("incidence-6.3");
    rep.param("p", p).param("r_max", rmax).param("n", n).param("trials", trials);
    let base = incidence_constant(&form, &Modulus::new(p, 1)?)?;
    let mut g = rng(params, 63);
    let mut levels = Vec::new();
    for r in 1..=rmax {
        let m = Modulus::new(p, r)?;
        let c = incidence_constant(&form, &m)?;
        rep.check(Assertion::at_most(format!("C at r = {r} within 2x of r = 1"), c.total, 2.0 * base.total));
        let mut worst: f64 = f64::NEG_INFINITY;
        for t in 0..trials {
            let points = random_subset(&m, n, 0.5, &mut g);
            let count = (m.ambient_size(n) / 2) as usize;
            let spheres = random_spheres(&m, n, count, &mut g);
            let report = incidence_report(&form, &points, &spheres, base.total)?;
            rep.check(Assertion::at_most(
                format!("r = {r}, trial {t}: I <= |P||S|/q + C q^(n-1/2) p^(-(n-1)/2) sqrt(|P||S|)"),
                report.incidences as f64,
                report.bound,
            ));
            worst = worst.max(report.empirical_ratio);
        }
        levels.push(serde_json::json!({"r": r, "constant": c, "max_empirical_ratio": worst}));
    }
    rep.constant("c_r1", base.total).constant("levels", levels);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_runs_pass() {
        for id in super::super::VERIFY_IDS {
            let rep = super::super::run_verification(id, &VerifyParams::default()).unwrap();
            let failing: Vec<_> = rep.assertions.iter().filter(|a| !a.pass).collect();
            assert!(failing.is_empty(), "{id}: {failing:?}");
        }
    }
}
