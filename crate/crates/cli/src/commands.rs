//! One function per subcommand; each returns an [`Output`].

use anyhow::{bail, Context};
use num_complex::Complex64;
use padic_lab::distance::{
    count_chains, count_cycles4, count_cycles4_spectral, count_pinned_trees, count_rectangles,
    distance_census, fiber_condition, incidence_constant, incidence_report, projection_density,
    random_subset, sharpness_example_even, sharpness_example_odd, threshold_experiment, CensusPath,
    FSphere, SharpnessExample,
};
use padic_lab::ring::vector::{decode, valuation};
use padic_lab::rotations::{
    energy_fiber_max, expected_group_order, extension_ratio, extension_ratio_direct, orbit,
    orbit_as_scaled_circle, rotation_group, stabilizer, SurfaceMeasureView,
};
use padic_lab::spectral::{
    complete_sum, complete_sum_bound, complete_sum_constants, complete_sum_exhaustive,
    fourier_bound_profile, indicator, sphere_fourier, FourierPath, Transformer,
};
use padic_lab::varieties::{sphere_points, SpherePath, SphereSpec};
use padic_lab::verify::{Registry, VerifyParams, VerifyReport};
use padic_lab::{DiagonalForm, Modulus, PointSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{ExampleKind, ExperimentConfig};
use crate::output::{Output, Table};

fn complex(z: Complex64) -> serde_json::Value {
    json!({"re": z.re, "im": z.im, "abs": z.norm()})
}

fn rng(cfg: &ExperimentConfig, stream: u64) -> ChaCha8Rng {
    let mut g = ChaCha8Rng::seed_from_u64(cfg.seed());
    g.set_stream(stream);
    g
}

fn vector_arg(v: &Option<Vec<u64>>, n: usize, default: impl FnOnce() -> Vec<u64>) -> anyhow::Result<Vec<u64>> {
    let v = v.clone().unwrap_or_else(default);
    if v.len() != n {
        bail!("expected a vector of length {n}, got {}", v.len());
    }
    Ok(v)
}

fn unit_vector(n: usize) -> Vec<u64> {
    let mut v = vec![0; n];
    v[0] = 1;
    v
}

fn example(cfg: &ExperimentConfig, kind: ExampleKind) -> anyhow::Result<SharpnessExample> {
    let p = cfg.p.unwrap_or(5);
    let r = cfg.r.unwrap_or(1);
    Ok(match kind {
        ExampleKind::Odd => sharpness_example_odd(p, cfg.n.unwrap_or(3), cfg.k.unwrap_or(2), cfg.l.unwrap_or(1), r)?,
        ExampleKind::Even => sharpness_example_even(p, cfg.n.unwrap_or(2), cfg.c.unwrap_or(1), r)?,
    })
}

/// The working set: a CSV file, a sharpness example, a random subset, or
/// the whole space, in that order of preference.
fn primary_set(cfg: &ExperimentConfig, m: &Modulus, n: usize, stream: u64) -> anyhow::Result<(PointSet, &'static str)> {
    if let Some(path) = &cfg.points {
        return Ok((read_points(path, m, n)?, "file"));
    }
    if let Some(kind) = cfg.example {
        let ex = example(cfg, kind)?;
        if ex.n != n || ex.set.modulus() != m {
            bail!("the example lives in (Z/{}^{})^{}, not the requested space", ex.p, ex.r, ex.n);
        }
        return Ok((ex.set, "example"));
    }
    if let Some(d) = cfg.density {
        if !(0.0..=1.0).contains(&d) {
            bail!("density {d} outside [0, 1]");
        }
        return Ok((random_subset(m, n, d, &mut rng(cfg, stream)), "random"));
    }
    Ok((PointSet::full(m, n), "full"))
}

fn read_points(path: &std::path::Path, m: &Modulus, n: usize) -> anyhow::Result<PointSet> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(PointSet::from_csv(m, n, &text)?)
}

fn form_and_space(cfg: &ExperimentConfig, default_p: u64, default_r: u32, default_n: usize) -> anyhow::Result<(DiagonalForm, Modulus, usize)> {
    let default_n = match cfg.example {
        Some(ExampleKind::Odd) => 3,
        _ => default_n,
    };
    let form = cfg.form(default_n)?;
    let m = cfg.modulus(default_p, default_r)?;
    form.bind(&m)?;
    let n = form.arity();
    Ok((form, m, n))
}

fn describe(form: &DiagonalForm, m: &Modulus) -> serde_json::Value {
    json!({
        "p": m.p(),
        "r": m.r(),
        "n": form.arity(),
        "coefficients": form.coefficients(),
        "exponents": form.exponents(),
    })
}

pub fn sphere(cfg: &ExperimentConfig) -> anyhow::Result<Output> {
    let (form, m, n) = form_and_space(cfg, 3, 1, 2)?;
    let j = cfg.j.unwrap_or(1);
    let spec = SphereSpec::new(form.clone(), m.clone(), j)?;
    let path = if cfg.oracle() { SpherePath::Oracle } else { SpherePath::Auto };
    let pts = sphere_points(&spec, path)?;
    let sorted = pts.sorted_points();
    let mut table = Table::new((1..=n).map(|i| format!("x{i}")));
    for pt in &sorted {
        table.push(pt);
    }
    Ok(Output::json(json!({
        "space": describe(&form, &m),
        "j": j,
        "size": pts.len(),
        "points": sorted,
    }))
    .with_table(table))
}

pub fn fourier(cfg: &ExperimentConfig) -> anyhow::Result<Output> {
    let (form, m, n) = form_and_space(cfg, 3, 1, 2)?;
    let j = cfg.j.unwrap_or(1);
    let spec = SphereSpec::new(form.clone(), m.clone(), j)?;
    if cfg.m.is_some() {
        let freq = vector_arg(&cfg.m, n, || unit_vector(n))?;
        let direct = sphere_fourier(&spec, &freq, FourierPath::Direct)?;
        let mut out = json!({"space": describe(&form, &m), "j": j, "m": freq, "direct": complex(direct)});
        if !cfg.oracle() && spec.unit_radius() {
            out["reduced"] = complex(sphere_fourier(&spec, &freq, FourierPath::Reduced)?);
        }
        return Ok(Output::json(out));
    }
    let pts = sphere_points(&spec, SpherePath::Auto)?;
    let table_values = Transformer::new(&m, n)?.forward(&indicator(&pts))?;
    let mut table = Table::new((1..=n).map(|i| format!("m{i}")).chain(["re".into(), "im".into(), "abs".into()]));
    let mut rows = Vec::new();
    for (idx, v) in table_values.values.iter().enumerate() {
        let freq = decode(m.q(), idx as u64, n);
        let mut row: Vec<String> = freq.iter().map(u64::to_string).collect();
        row.extend([v.re.to_string(), v.im.to_string(), v.norm().to_string()]);
        table.push(row);
        rows.push(json!({"m": freq, "value": complex(*v)}));
    }
    Ok(Output::json(json!({"space": describe(&form, &m), "j": j, "transform": rows})).with_table(table))
}

pub fn bounds(cfg: &ExperimentConfig) -> anyhow::Result<Output> {
    let (form, m, _) = form_and_space(cfg, 3, 1, 2)?;
    let spec = SphereSpec::new(form, m, cfg.j.unwrap_or(1))?;
    let profile = fourier_bound_profile(&spec)?;
    let table = Table::from_records(&profile.strata);
    Ok(Output::json(&profile).with_table(table))
}

pub fn sums(cfg: &ExperimentConfig) -> anyhow::Result<Output> {
    let (form, m, n) = form_and_space(cfg, 3, 2, 2)?;
    let freq = vector_arg(&cfg.m, n, || unit_vector(n))?;
    let s = cfg.s.unwrap_or(1);
    let constants = complete_sum_constants(&form, m.p())?;
    let value = if cfg.oracle() {
        complete_sum_exhaustive(&form, &m, &freq, s)?
    } else {
        complete_sum(&form, &m, &freq, s)?
    };
    let bound = complete_sum_bound(&constants, n, &m, &freq, s);
    Ok(Output::json(json!({
        "space": describe(&form, &m),
        "m": freq,
        "s": s,
        "value": complex(value),
        "bound": bound,
        "within_bound": value.norm() <= bound * (1.0 + 1e-9) + 1e-9,
        "constants": constants,
    })))
}

pub fn orbit_cmd(cfg: &ExperimentConfig) -> anyhow::Result<Output> {
    let m = cfg.modulus(3, 2)?;
    let x = vector_arg(&cfg.x, 2, || vec![1, 0])?;
    let group = rotation_group(&m)?;
    let orb = orbit(&group, &m, &x)?;
    let stab = stabilizer(&group, &m, &x)?;
    let mut out = json!({
        "p": m.p(),
        "r": m.r(),
        "x": x,
        "valuation": valuation(&m, &x),
        "group_order": group.len(),
        "expected_group_order": expected_group_order(&m) as u64,
        "stabilizer_size": stab.len(),
        "orbit_size": orb.len(),
        "points": orb.sorted_points(),
    });
    if m.p_mod_4() == 3 {
        out["equals_scaled_circle"] = json!(orbit_as_scaled_circle(&m, &x)? == orb);
    }
    let mut table = Table::new(["x1", "x2"]);
    for pt in orb.sorted_points() {
        table.push(pt);
    }
    Ok(Output::json(out).with_table(table))
}

fn carrier(cfg: &ExperimentConfig, m: &Modulus) -> anyhow::Result<SurfaceMeasureView> {
    Ok(match &cfg.x {
        Some(_) => {
            let x = vector_arg(&cfg.x, 2, || vec![1, 0])?;
            SurfaceMeasureView::orbit(&rotation_group(m)?, m, &x)?
        }
        None => SurfaceMeasureView::circle(m, cfg.j.unwrap_or(1))?,
    })
}

pub fn energy(cfg: &ExperimentConfig) -> anyhow::Result<Output> {
    let m = cfg.modulus(3, 2)?;
    let view = carrier(cfg, &m)?;
    let f = energy_fiber_max(&view.carrier)?;
    let bound = view.fiber_bound();
    Ok(Output::json(json!({
        "p": m.p(),
        "r": m.r(),
        "carrier": view.kind,
        "size": view.carrier.len(),
        "max_fiber": f.max,
        "argmax": f.argmax,
        "bound": bound,
        "within_bound": f.max as f64 <= bound,
    })))
}

pub fn extension(cfg: &ExperimentConfig) -> anyhow::Result<Output> {
    let m = cfg.modulus(3, 1)?;
    let view = carrier(cfg, &m)?;
    let trials = cfg.trials.unwrap_or(0);
    let eval = |v: &SurfaceMeasureView| if cfg.oracle() { extension_ratio_direct(v) } else { extension_ratio(v) };
    let mut g = rng(cfg, 41);
    let mut table = Table::new(["trial", "weights", "lhs", "rhs", "ratio"]);
    let mut rows = Vec::new();
    let mut max_ratio: f64 = 0.0;
    for t in 0..=trials {
        let w = if t == 0 {
            view.clone()
        } else {
            let weights = (0..view.carrier.len())
                .map(|_| Complex64::new(g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0)))
                .collect();
            view.clone().with_weights(weights)?
        };
        let e = eval(&w)?;
        let label = if t == 0 { "constant" } else { "random" };
        max_ratio = max_ratio.max(e.ratio);
        table.push([t.to_string(), label.into(), e.lhs.to_string(), e.rhs.to_string(), e.ratio.to_string()]);
        rows.push(json!({"trial": t, "weights": label, "lhs": e.lhs, "rhs": e.rhs, "ratio": e.ratio}));
    }
    Ok(Output::json(json!({
        "p": m.p(),
        "r": m.r(),
        "carrier": view.kind,
        "size": view.carrier.len(),
        "results": rows,
        "max_ratio": max_ratio,
    }))
    .with_table(table))
}

pub fn census(cfg: &ExperimentConfig) -> anyhow::Result<Output> {
    let (form, m, n) = form_and_space(cfg, 3, 1, 2)?;
    let (e1, source) = primary_set(cfg, &m, n, 1)?;
    let e2 = match &cfg.points2 {
        Some(path) => read_points(path, &m, n)?,
        None => e1.clone(),
    };
    let path = if cfg.oracle() { CensusPath::Loop } else { CensusPath::Convolution };
    let c = distance_census(&form, &e1, &e2, path)?;
    let mut table = Table::new(["j", "count"]);
    for (j, count) in c.counts.iter().enumerate() {
        table.push([j.to_string(), count.to_string()]);
    }
    Ok(Output::json(json!({
        "space": describe(&form, &m),
        "source": source,
        "sizes": [c.sizes.0, c.sizes.1],
        "total_pairs": c.total().to_string(),
        "distance_set": c.distance_set,
        "distance_count": c.distance_set.len(),
        "unit_coverage": c.unit_coverage(),
        "covers_units": c.covers_units(),
        "density": c.density,
        "counts": c.counts.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
    }))
    .with_table(table))
}

pub fn incidence(cfg: &ExperimentConfig) -> anyhow::Result<Output> {
    let (form, m, n) = form_and_space(cfg, 7, 1, 2)?;
    let cfg_points = ExperimentConfig {
        density: cfg.density.or(Some(0.5)),
        ..cfg.clone()
    };
    let (points, source) = primary_set(&cfg_points, &m, n, 1)?;
    let count = cfg.spheres.unwrap_or((m.ambient_size(n) / 2) as usize);
    let units: Vec<u64> = m.units().collect();
    let mut g = rng(cfg, 2);
    let spheres: Vec<FSphere> = (0..count)
        .map(|_| FSphere {
            center: (0..n).map(|_| g.gen_range(0..m.q())).collect(),
            radius: units[g.gen_range(0..units.len())],
        })
        .collect();
    let constant = incidence_constant(&form, &m.truncate(1))?;
    let report = incidence_report(&form, &points, &spheres, constant.total)?;
    Ok(Output::json(json!({
        "space": describe(&form, &m),
        "source": source,
        "constant_r1": constant,
        "report": report,
    })))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ConfigKind {
    Rectangles,
    Cycles4,
    Chains,
    Trees,
}

pub fn configs(cfg: &ExperimentConfig, kind: ConfigKind) -> anyhow::Result<Output> {
    let (form, m, n) = form_and_space(cfg, 3, 1, 2)?;
    // rectangles live in (Z/q)^{2n}, one form evaluation per half
    let set_n = if kind == ConfigKind::Rectangles { 2 * n } else { n };
    let (set, source) = primary_set(cfg, &m, set_n, 1)?;
    let j = cfg.j.unwrap_or(1);
    let distinct = cfg.distinct.unwrap_or(false);
    let mut out = json!({
        "space": describe(&form, &m),
        "source": source,
        "set_size": set.len(),
        "j": j,
        "convention": "ordered tuples",
    });
    match kind {
        ConfigKind::Rectangles => {
            out["rectangles"] = json!(count_rectangles(&form, &set, j)?.to_string());
        }
        ConfigKind::Cycles4 => {
            out["distinct"] = json!(distinct);
            out["cycles4"] = json!(count_cycles4(&form, &set, j, distinct)?.to_string());
            if set.len() as u128 == m.ambient_size(n) {
                out["spectral_total"] = json!(count_cycles4_spectral(&form, &m, n, j)?);
            }
        }
        ConfigKind::Chains => {
            let k = cfg.length.unwrap_or(2);
            out["length"] = json!(k);
            out["chains"] = json!(count_chains(&form, &set, j, k)?.to_string());
        }
        ConfigKind::Trees => {
            let shape = cfg.tree_shape()?;
            let pin = match &cfg.pin {
                Some(p) => p.clone(),
                None => set.sorted_points().into_iter().next().context("empty set has no pin")?,
            };
            let t = count_pinned_trees(&form, &set, &shape, &pin, distinct)?;
            out["shape"] = json!(shape);
            out["pin"] = json!(pin);
            out["trees"] = json!(t);
        }
    }
    Ok(Output::json(out))
}

pub fn fiber(cfg: &ExperimentConfig) -> anyhow::Result<Output> {
    let m = cfg.modulus(3, 2)?;
    let (set, source) = primary_set(cfg, &m, 2, 1)?;
    let rep = fiber_condition(&set)?;
    let mut out = json!({"p": m.p(), "r": m.r(), "source": source, "set_size": set.len(), "fiber": rep});
    if let Some(gamma) = cfg.gamma {
        let g = projection_density(&set, gamma)?;
        out["projection"] = json!({"gamma": g.gamma, "max": g.max(), "values": g.values});
    }
    Ok(Output::json(out))
}

pub fn sweep(cfg: &ExperimentConfig) -> anyhow::Result<Output> {
    let (form, m, n) = form_and_space(cfg, 7, 1, 2)?;
    let densities = cfg
        .densities
        .clone()
        .unwrap_or_else(|| (1..=10).map(|i| i as f64 / 10.0).collect());
    let trials = cfg.trials.unwrap_or(5);
    let rows = threshold_experiment(&form, &m, n, &densities, trials, cfg.seed())?;
    let table = Table::from_records(&rows);
    Ok(Output::json(json!({"space": describe(&form, &m), "seed": cfg.seed(), "rows": rows})).with_table(table))
}

pub fn example_cmd(cfg: &ExperimentConfig, kind: ExampleKind) -> anyhow::Result<Output> {
    let ex = example(cfg, kind)?;
    let form = DiagonalForm::power_sum(ex.n, ex.exponent);
    let c = distance_census(&form, &ex.set, &ex.set, CensusPath::Convolution)?;
    Ok(Output::json(json!({
        "construction": ex.branch,
        "p": ex.p,
        "r": ex.r,
        "n": ex.n,
        "exponent": ex.exponent,
        "base_size": ex.base.len(),
        "size": ex.set.len(),
        "density": ex.density,
        "base_distances": ex.base_distances,
        "distance_bound": ex.distance_bound.to_string(),
        "distance_set": c.distance_set,
        "distance_count": c.distance_set.len(),
        "within_bound": (c.distance_set.len() as u128) <= ex.distance_bound,
        "base_points": ex.base.sorted_points(),
    })))
}

fn verify_params(cfg: &ExperimentConfig) -> VerifyParams {
    VerifyParams {
        p: cfg.p,
        r: cfg.r,
        n: cfg.n,
        j: cfg.j,
        k: cfg.k,
        trials: cfg.trials,
        seed: cfg.seed(),
        oracle: cfg.oracle(),
    }
}

/// Runs each id on a pool of `jobs` threads; reports come back in request order.
pub fn verify(cfg: &ExperimentConfig, ids: &[String], jobs: usize) -> anyhow::Result<Output> {
    verify_with(&Registry::standard(), cfg, ids, jobs)
}

fn verify_with(registry: &Registry, cfg: &ExperimentConfig, ids: &[String], jobs: usize) -> anyhow::Result<Output> {
    let ids: Vec<String> = if ids.iter().any(|i| i == "all") {
        registry.ids().iter().map(|s| s.to_string()).collect()
    } else {
        ids.to_vec()
    };
    for id in &ids {
        registry.get(id)?;
    }
    let params = verify_params(cfg);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?;
    let reports: Vec<VerifyReport> = pool.install(|| {
        use rayon::prelude::*;
        ids.par_iter()
            .map(|id| registry.run(id, &params))
            .collect::<padic_lab::Result<Vec<_>>>()
    })?;
    let passed = reports.iter().all(VerifyReport::passed);
    let mut table = Table::new(["lemma", "assertion", "lhs", "relation", "rhs", "pass"]);
    for rep in &reports {
        for a in &rep.assertions {
            table.push([
                rep.lemma.clone(),
                a.name.clone(),
                a.lhs.to_string(),
                a.relation.clone(),
                a.rhs.to_string(),
                a.pass.to_string(),
            ]);
        }
    }
    let json = if reports.len() == 1 {
        serde_json::to_value(&reports[0])?
    } else {
        json!({"passed": passed, "reports": reports})
    };
    Ok(Output { json, table: Some(table), passed })
}
