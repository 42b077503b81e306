//! The named acceptance experiments.
//!
//! Every experiment reads a config with serde defaults (unknown keys are
//! rejected), draws each replicate from its own stream of the experiment
//! seed, and returns a report made of one or more checks.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::oracle::brute_force_generations;
use super::report::{config_hash, write_atomic, Check, TestReport, P_FLOOR};
use super::stats::{chi_square_gof, chi_square_two_sample, ks_one_sample, ks_two_sample, mean_se};
use crate::branching::{
    simulate_cb, simulate_twotype, twotype_generator, twotype_semigroup, BranchConfig, TwoTypeState,
};
use crate::error::{Error, Result};
use crate::genealogy::{
    discrete_generations, height_process, infinite_split_rates, level_profile, sample_genealogy_poisson,
    tree_generations, LevelGrid,
};
use crate::levy::{semigroup_u, LaplaceExponent, LevyQuartet, OdeOptions};
use crate::path::{time_change_below, SimConfig};
use crate::rng::replicate_arm;
use crate::sim::{
    contour_functionals, simulate_eta_x, simulate_nu_r, simulate_upsilon_tree, simulate_yule_contour,
    ContourFunctionals, EtaOptions, TreeConfig,
};
use crate::tree::{prolific_skeleton, ChronologicalTree, Detection};

/// What an experiment hands back before it is wrapped into a report.
struct Outcome {
    n: usize,
    checks: Vec<Check>,
    files: Vec<(String, Vec<u8>)>,
}

type Runner = fn(&Value, u64) -> Result<(Value, Outcome)>;

pub struct Experiment {
    pub name: &'static str,
    pub criterion: usize,
    pub default_seed: u64,
    pub summary: &'static str,
    run: Runner,
}

macro_rules! runner {
    ($cfg:ty, $f:ident) => {{
        fn run(v: &Value, seed: u64) -> Result<(Value, Outcome)> {
            let cfg: $cfg = parse(v)?;
            let effective = serde_json::to_value(&cfg)?;
            Ok((effective, $f(&cfg, seed)?))
        }
        run as Runner
    }};
}

pub fn registry() -> Vec<Experiment> {
    vec![
        Experiment {
            name: "yule-geometric",
            criterion: 1,
            default_seed: 101,
            summary: "population at height r of a Yule tree is geometric",
            run: runner!(YuleConfig, yule_geometric),
        },
        Experiment {
            name: "grafting-equivalence",
            criterion: 2,
            default_seed: 102,
            summary: "tree with an infinite line equals the grafted construction",
            run: runner!(GraftingConfig, grafting_equivalence),
        },
        Experiment {
            name: "yule-spacings",
            criterion: 3,
            default_seed: 103,
            summary: "branch heights along the first infinite line are Exp(b) spaced",
            run: runner!(SpacingConfig, yule_spacings),
        },
        Experiment {
            name: "skeleton-roundtrip",
            criterion: 4,
            default_seed: 104,
            summary: "prolific skeleton extraction and reconstruction are inverse",
            run: runner!(SkeletonConfig, skeleton_roundtrip),
        },
        Experiment {
            name: "lamperti-cb",
            criterion: 5,
            default_seed: 105,
            summary: "time-changed Levy process matches the CB semigroup",
            run: runner!(LampertiConfig, lamperti_cb),
        },
        Experiment {
            name: "ray-knight",
            criterion: 6,
            default_seed: 106,
            summary: "local time of the forest from a segment is a CB process",
            run: runner!(RayKnightConfig, ray_knight),
        },
        Experiment {
            name: "twotype-rates",
            criterion: 7,
            default_seed: 107,
            summary: "prolific count jump rates and sizes",
            run: runner!(RatesConfig, twotype_rates),
        },
        Experiment {
            name: "twotype-generator",
            criterion: 8,
            default_seed: 108,
            summary: "finite differences of the two-type process match its generator",
            run: runner!(GeneratorConfig, twotype_generator_check),
        },
        Experiment {
            name: "cross-construction",
            criterion: 9,
            default_seed: 109,
            summary: "level counts of the grafted tree match the two-type process",
            run: runner!(CrossConfig, cross_construction),
        },
        Experiment {
            name: "generations-oracle",
            criterion: 10,
            default_seed: 110,
            summary: "generation sizes from the contour match a brute-force walk",
            run: runner!(GenerationsConfig, generations_oracle),
        },
        Experiment {
            name: "pruning-compatibility",
            criterion: 11,
            default_seed: 111,
            summary: "truncating a taller tree gives the same law as building at r",
            run: runner!(PruningConfig, pruning_compatibility),
        },
    ]
}

pub fn find(name: &str) -> Result<Experiment> {
    registry()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownExperiment(name.to_string()))
}

/// Runs `name` with `config` (`Value::Null` for defaults). The report and
/// the experiment's data files go to `out/<name>/` when `out` is given.
pub fn run_experiment(name: &str, config: &Value, seed: Option<u64>, out: Option<&Path>) -> Result<TestReport> {
    let exp = find(name)?;
    let seed = seed.unwrap_or(exp.default_seed);
    let start = Instant::now();
    let (effective, outcome) = (exp.run)(config, seed)?;
    let hash = config_hash(&serde_json::json!({"experiment": name, "config": effective}));
    let mut report = TestReport::from_checks(name, outcome.n, seed, hash, outcome.checks);
    report.runtime_s = start.elapsed().as_secs_f64();
    if let Some(out) = out {
        let dir = out.join(name);
        std::fs::create_dir_all(&dir)?;
        for (file, bytes) in &outcome.files {
            write_atomic(&dir.join(file), bytes)?;
        }
        write_atomic(
            &dir.join("config.json"),
            serde_json::to_string_pretty(&effective)?.as_bytes(),
        )?;
        report.write(&dir)?;
    }
    Ok(report)
}

fn parse<T: DeserializeOwned + Default>(v: &Value) -> Result<T> {
    if v.is_null() {
        return Ok(T::default());
    }
    serde_json::from_value(v.clone()).map_err(|e| Error::Config(e.to_string()))
}

fn positive(fields: &[(&str, f64)]) -> Result<()> {
    for &(name, v) in fields {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Config(format!("`{name}` must be positive, got {v}")));
        }
    }
    Ok(())
}

fn at_least(name: &str, n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::Config(format!("`{name}` must be at least {min}, got {n}")));
    }
    Ok(())
}

fn collect<T>(v: Vec<Result<T>>) -> Result<Vec<T>> {
    v.into_iter().collect()
}

fn tree_config(mesh: f64) -> TreeConfig {
    TreeConfig {
        sim: SimConfig {
            mesh,
            ..SimConfig::default()
        },
        ..TreeConfig::default()
    }
}

fn counts(v: &[u64]) -> Vec<usize> {
    let mut c = vec![0; v.iter().max().map_or(0, |&m| m as usize + 1)];
    for &x in v {
        c[x as usize] += 1;
    }
    c
}

fn csv(header: &str, rows: impl IntoIterator<Item = String>) -> Vec<u8> {
    let mut out = Vec::new();
    writeln!(out, "{header}").unwrap();
    for r in rows {
        writeln!(out, "{r}").unwrap();
    }
    out
}

fn two_arm_functionals(a: &[ContourFunctionals], b: &[ContourFunctionals]) -> Vec<u8> {
    let rows = a
        .iter()
        .map(|f| (0, f))
        .chain(b.iter().map(|f| (1, f)))
        .map(|(arm, f)| format!("{arm},{:?},{},{:?}", f.lifetime, f.crossings, f.low_occupation));
    csv("arm,lifetime,crossings,low_occupation", rows)
}

/// The exponent with `beta = 1`, one unit atom at 1 and `b = 1`.
pub fn atom_exponent() -> LevyQuartet {
    LevyQuartet::new(0.0, -1.0 - (-1.0f64).exp(), 1.0).with_atom(1.0, 1.0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct YuleConfig {
    pub b: f64,
    pub r: f64,
    pub samples: usize,
}

impl Default for YuleConfig {
    fn default() -> Self {
        YuleConfig {
            b: 0.7,
            r: 1.0,
            samples: 50_000,
        }
    }
}

fn yule_geometric(cfg: &YuleConfig, seed: u64) -> Result<Outcome> {
    positive(&[("b", cfg.b), ("r", cfg.r)])?;
    let n_r: Vec<u64> = replicate_arm(seed, 0, cfg.samples, |_, rng| {
        simulate_yule_contour(cfg.b, cfg.r, rng).n_r as u64
    });
    let q = (-cfg.b * cfg.r).exp();
    let pmf = |k: u64| if k == 0 { 0.0 } else { q * (1.0 - q).powi(k as i32 - 1) };
    let gof = chi_square_gof(&n_r, &pmf)?;
    let (m, se) = mean_se(&n_r.iter().map(|&k| k as f64).collect::<Vec<_>>());
    let n = n_r.len() as f64;
    let rows = counts(&n_r)
        .into_iter()
        .enumerate()
        .map(|(k, c)| format!("{k},{c},{:?}", n * pmf(k as u64)));
    Ok(Outcome {
        n: cfg.samples,
        checks: vec![
            Check::p_value("geometric-gof", gof, P_FLOOR),
            Check::tolerance("mean", m - 1.0 / q, 3.0 * se, Some(se)),
        ],
        files: vec![("pmf.csv".into(), csv("k,observed,expected", rows))],
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraftingConfig {
    pub psi: LevyQuartet,
    pub r: f64,
    pub samples: usize,
    /// Crossings are counted from `r - delta` up to `r`.
    pub delta: f64,
    pub mesh: f64,
}

impl Default for GraftingConfig {
    fn default() -> Self {
        GraftingConfig {
            psi: LevyQuartet::quadratic_supercritical(),
            r: 1.0,
            samples: 10_000,
            delta: 0.1,
            mesh: 1e-3,
        }
    }
}

fn grafting_equivalence(cfg: &GraftingConfig, seed: u64) -> Result<Outcome> {
    positive(&[("r", cfg.r), ("delta", cfg.delta), ("mesh", cfg.mesh)])?;
    let e = LaplaceExponent::new(cfg.psi.clone())?;
    let tc = tree_config(cfg.mesh);
    let (r, d) = (cfg.r, cfg.delta);
    let direct = collect(replicate_arm(seed, 0, cfg.samples, |_, rng| {
        simulate_nu_r(&e, r, &tc, rng).map(|s| contour_functionals(&s.contour, r, d))
    }))?;
    let grafted = collect(replicate_arm(seed, 1, cfg.samples, |_, rng| {
        simulate_upsilon_tree(&e, r, &tc, rng).map(|u| contour_functionals(&u.contour, r, d))
    }))?;
    Ok(Outcome {
        n: cfg.samples,
        checks: functional_checks(&direct, &grafted)?,
        files: vec![("functionals.csv".into(), two_arm_functionals(&direct, &grafted))],
    })
}

fn functional_checks(a: &[ContourFunctionals], b: &[ContourFunctionals]) -> Result<Vec<Check>> {
    let lifetime = |v: &[ContourFunctionals]| v.iter().map(|f| f.lifetime).collect::<Vec<_>>();
    let low = |v: &[ContourFunctionals]| v.iter().map(|f| f.low_occupation).collect::<Vec<_>>();
    let cross = |v: &[ContourFunctionals]| v.iter().map(|f| f.crossings as u64).collect::<Vec<_>>();
    Ok(vec![
        Check::p_value("lifetime-ks", ks_two_sample(&lifetime(a), &lifetime(b)), P_FLOOR),
        Check::p_value("crossings-chi2", chi_square_two_sample(&cross(a), &cross(b))?, P_FLOOR),
        Check::p_value("low-occupation-ks", ks_two_sample(&low(a), &low(b)), P_FLOOR),
    ])
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpacingConfig {
    pub psi: LevyQuartet,
    pub r: f64,
    pub samples: usize,
    pub mesh: f64,
}

impl Default for SpacingConfig {
    fn default() -> Self {
        SpacingConfig {
            psi: LevyQuartet::quadratic_supercritical(),
            r: 1.0,
            samples: 12_000,
            mesh: 1e-3,
        }
    }
}

/// Spacings `(s, room)` along the first line of the skeleton: `s` is the
/// gap to the next branch height and `room` the height left above the
/// previous one.
fn first_line_spacings(spines: &ChronologicalTree, r: f64) -> Result<Vec<(f64, f64)>> {
    let sk = prolific_skeleton(spines, r, Detection::Tagged)?;
    let mut heights: Vec<f64> = sk
        .lines
        .iter()
        .filter(|l| l.label.len() == 1)
        .map(|l| l.alpha)
        .collect();
    heights.sort_by(f64::total_cmp);
    let mut prev = 0.0;
    let mut out = Vec::new();
    for h in heights {
        out.push((h - prev, r - prev));
        prev = h;
    }
    Ok(out)
}

fn yule_spacings(cfg: &SpacingConfig, seed: u64) -> Result<Outcome> {
    positive(&[("r", cfg.r), ("mesh", cfg.mesh)])?;
    let e = LaplaceExponent::new(cfg.psi.clone())?;
    let b = e.b();
    if b <= 0.0 {
        return Err(Error::SubcriticalInput);
    }
    let tc = tree_config(cfg.mesh);
    let per_tree = collect(replicate_arm(seed, 0, cfg.samples, |_, rng| {
        let u = simulate_upsilon_tree(&e, cfg.r, &tc, rng)?;
        Ok((first_line_spacings(&u.spines, cfg.r)?, u.spines.len() as f64))
    }))?;
    let f = |x: f64| 1.0 - (-b * x).exp();
    // Given that the next branch point falls within the room left, its
    // position is a truncated exponential; F(s) / F(room) is uniform.
    let spacings: Vec<(f64, f64)> = per_tree.iter().flat_map(|(s, _)| s.iter().copied()).collect();
    let u: Vec<f64> = spacings.iter().map(|&(s, room)| f(s) / f(room)).collect();
    let ks = ks_one_sample(&u, &|x| x.clamp(0.0, 1.0));
    let first_line = per_tree.iter().map(|(s, _)| s.len() as f64).collect::<Vec<_>>();
    let (m1, se1) = mean_se(&first_line);
    let lines: Vec<f64> = per_tree.iter().map(|&(_, n)| n).collect();
    let (m, se) = mean_se(&lines);
    let rows = spacings.iter().map(|&(s, room)| format!("{s:?},{room:?}"));
    Ok(Outcome {
        n: spacings.len(),
        checks: vec![
            Check::p_value("spacing-ks", ks, P_FLOOR).with_detail(format!("{} spacings", spacings.len())),
            Check::tolerance("branch-count-mean", m1 - b * cfg.r, 3.0 * se1, Some(se1)),
            Check::tolerance("line-count-mean", m - (b * cfg.r).exp(), 3.0 * se, Some(se)),
        ],
        files: vec![("spacings.csv".into(), csv("spacing,room", rows))],
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SkeletonConfig {
    pub psi: LevyQuartet,
    pub r: f64,
    pub samples: usize,
}

impl Default for SkeletonConfig {
    fn default() -> Self {
        SkeletonConfig {
            psi: LevyQuartet::splitting(2.0, 1.0),
            r: 1.5,
            samples: 1000,
        }
    }
}

/// Splitting trees read off truncated contours with an infinite line, with
/// every individual reaching `r` tagged prolific.
fn tagged_trees(
    psi: &LevyQuartet,
    r: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<(crate::path::CadlagPath, ChronologicalTree)>> {
    let e = LaplaceExponent::new(psi.clone())?;
    if !e.quartet().is_finite_variation() || e.quartet().beta > 0.0 {
        return Err(Error::Config("a compound Poisson exponent is required".into()));
    }
    let tc = TreeConfig::default();
    collect(replicate_arm(seed, 0, samples, |_, rng| {
        let c = simulate_nu_r(&e, r, &tc, rng)?.contour;
        let mut t = ChronologicalTree::from_contour(&c)?;
        for i in 0..t.len() {
            if t.node(i).top() >= r - 1e-9 {
                t.set_prolific(i, true);
            }
        }
        Ok((c, t))
    }))
}

fn skeleton_roundtrip(cfg: &SkeletonConfig, seed: u64) -> Result<Outcome> {
    positive(&[("r", cfg.r)])?;
    let trees = tagged_trees(&cfg.psi, cfg.r, cfg.samples, seed)?;
    let mut roundtrip = 0;
    let mut fallback = 0;
    let mut sizes = Vec::new();
    for (_, t) in &trees {
        let sk = prolific_skeleton(t, cfg.r, Detection::Tagged)?;
        let again = prolific_skeleton(&sk.reconstruct(), cfg.r, Detection::Tagged)?;
        if again.sorted() != sk.sorted() {
            roundtrip += 1;
        }
        let geo = prolific_skeleton(t, cfg.r, Detection::Geometric)?;
        if geo.sorted() != sk.sorted() {
            fallback += 1;
        }
        sizes.push(format!("{},{}", t.len(), sk.len()));
    }
    Ok(Outcome {
        n: trees.len(),
        checks: vec![
            Check::exact("extract-reconstruct-extract", roundtrip, trees.len()),
            Check::exact("geometric-equals-tagged", fallback, trees.len()),
        ],
        files: vec![("sizes.csv".into(), csv("nodes,lines", sizes))],
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LampertiConfig {
    pub psi: LevyQuartet,
    pub x: f64,
    pub t: f64,
    pub samples: usize,
    pub dt: f64,
    pub lambdas: Vec<f64>,
}

impl Default for LampertiConfig {
    fn default() -> Self {
        LampertiConfig {
            psi: LevyQuartet::quadratic_supercritical(),
            x: 1.0,
            t: 1.0,
            samples: 20_000,
            dt: 1e-3,
            lambdas: vec![0.5, 1.0, 2.0],
        }
    }
}

fn lamperti_cb(cfg: &LampertiConfig, seed: u64) -> Result<Outcome> {
    positive(&[("x", cfg.x), ("t", cfg.t), ("dt", cfg.dt)])?;
    let e = LaplaceExponent::new(cfg.psi.clone())?;
    if e.quartet().kappa > 0.0 {
        return Err(Error::Config("the mean check needs kappa = 0".into()));
    }
    let bc = BranchConfig {
        dt: cfg.dt,
        ..BranchConfig::default()
    };
    let z = collect(replicate_arm(seed, 0, cfg.samples, |_, rng| {
        simulate_cb(&e, cfg.x, cfg.t, &bc, rng).map(|p| p.final_z())
    }))?;
    let mut checks = Vec::new();
    let (m, se) = mean_se(&z);
    let target = cfg.x * (-e.quartet().psi_prime_zero() * cfg.t).exp();
    checks.push(Check::tolerance("mean", m - target, 3.0 * se, Some(se)));
    let psi = |u: f64| e.psi(u);
    for &l in &cfg.lambdas {
        let u = semigroup_u(&psi, l, cfg.t, OdeOptions::default())?;
        let v: Vec<f64> = z.iter().map(|&x| (-l * x).exp()).collect();
        let (m, se) = mean_se(&v);
        checks.push(Check::tolerance(
            &format!("laplace-{l}"),
            m - (-cfg.x * u).exp(),
            3.0 * se,
            Some(se),
        ));
    }
    // The integrator against the closed form for psi(u) = u^2.
    let mut worst: f64 = 0.0;
    for &l in &cfg.lambdas {
        let u = semigroup_u(&|u| u * u, l, cfg.t, OdeOptions::default())?;
        worst = worst.max((u - l / (1.0 + l * cfg.t)).abs());
    }
    checks.push(Check::tolerance("ode-closed-form", worst, 1e-8, None));
    let rows = z.iter().map(|v| format!("{v:?}"));
    Ok(Outcome {
        n: cfg.samples,
        checks,
        files: vec![("z.csv".into(), csv("z", rows))],
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RayKnightConfig {
    pub psi: LevyQuartet,
    pub x: f64,
    pub a: f64,
    pub truncation: f64,
    /// Width of the level bin centred at `a`.
    pub bin: f64,
    pub samples: usize,
    pub mesh: f64,
    pub dt: f64,
}

impl Default for RayKnightConfig {
    fn default() -> Self {
        RayKnightConfig {
            psi: LevyQuartet::quadratic_supercritical(),
            x: 1.0,
            a: 0.5,
            truncation: 2.0,
            bin: 0.05,
            samples: 10_000,
            mesh: 1e-3,
            dt: 1e-3,
        }
    }
}

/// Contour values are heights when `beta = 1` and there are no jumps.
fn require_brownian_heights(e: &LaplaceExponent) -> Result<()> {
    let q = e.quartet();
    if q.beta != 1.0 || q.jump_mass() > 0.0 {
        return Err(Error::Config("level profiles need beta = 1 and no jumps".into()));
    }
    Ok(())
}

fn ray_knight(cfg: &RayKnightConfig, seed: u64) -> Result<Outcome> {
    positive(&[
        ("x", cfg.x),
        ("a", cfg.a),
        ("bin", cfg.bin),
        ("mesh", cfg.mesh),
        ("dt", cfg.dt),
    ])?;
    let e = LaplaceExponent::new(cfg.psi.clone())?;
    require_brownian_heights(&e)?;
    let grid = LevelGrid::centred(cfg.a, cfg.bin);
    // Heights are read above the running minimum, so a tree grafted at `s`
    // is complete only up to `truncation - s`.
    let complete = cfg.truncation - cfg.x;
    let beta = e.quartet().beta;
    let tc = tree_config(cfg.mesh);
    let forest = collect(replicate_arm(seed, 0, cfg.samples, |_, rng| {
        let f = simulate_eta_x(&e, cfg.x, cfg.truncation, EtaOptions::default(), &tc, rng)?;
        let heights = height_process(&f.contour, beta)?;
        Ok(level_profile(&heights, None, &grid, complete)?.z2[0])
    }))?;
    let bc = BranchConfig {
        dt: cfg.dt,
        ..BranchConfig::default()
    };
    let cb = collect(replicate_arm(seed, 1, cfg.samples, |_, rng| {
        simulate_cb(&e, cfg.x, cfg.a, &bc, rng).map(|p| p.final_z())
    }))?;
    // The bin average of x e^{c s} over [a - h/2, a + h/2].
    let c = -e.quartet().psi_prime_zero();
    let half = 0.5 * c * cfg.bin;
    let smoothing = if half == 0.0 { 1.0 } else { half.sinh() / half };
    let target = cfg.x * (c * cfg.a).exp() * smoothing;
    let (m, se) = mean_se(&forest);
    let rows = forest
        .iter()
        .map(|v| (0, v))
        .chain(cb.iter().map(|v| (1, v)))
        .map(|(arm, v)| format!("{arm},{v:?}"));
    Ok(Outcome {
        n: cfg.samples,
        checks: vec![
            Check::p_value("z2-vs-cb-ks", ks_two_sample(&forest, &cb), P_FLOOR).with_detail(format!(
                "bin {} centred at {}; grafts exact, no compact threshold",
                cfg.bin, cfg.a
            )),
            Check::tolerance("z2-mean", m - target, 3.0 * se, Some(se)),
        ],
        files: vec![("z2.csv".into(), csv("arm,z2", rows))],
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatesConfig {
    pub psi: LevyQuartet,
    pub a_max: f64,
    pub samples: usize,
    pub kmax: usize,
    pub node_budget: usize,
}

impl Default for RatesConfig {
    fn default() -> Self {
        RatesConfig {
            psi: atom_exponent(),
            a_max: 3.0,
            samples: 20_000,
            kmax: 60,
            node_budget: 1_000_000,
        }
    }
}

fn twotype_rates(cfg: &RatesConfig, seed: u64) -> Result<Outcome> {
    positive(&[("a_max", cfg.a_max)])?;
    at_least("kmax", cfg.kmax, 1)?;
    let e = LaplaceExponent::new(cfg.psi.clone())?;
    let rates = infinite_split_rates(&e, cfg.kmax);
    let total: f64 = rates.iter().sum();
    let first = collect(replicate_arm(seed, 0, cfg.samples, |i, rng| {
        let g = sample_genealogy_poisson(&e, cfg.a_max, cfg.node_budget, rng).map_err(|err| err.with_seed(i as u64))?;
        Ok(g.first_event().map(|ev| (ev.height, ev.k as u64)))
    }))?;
    // Censored exponential: events over total exposure.
    let events: Vec<(f64, u64)> = first.iter().flatten().copied().collect();
    let exposure: f64 = first.iter().map(|f| f.map_or(cfg.a_max, |(h, _)| h)).sum();
    let d = events.len() as f64;
    let rate = d / exposure;
    let se = rate / d.sqrt();
    let ks: Vec<u64> = events.iter().map(|&(_, k)| k).collect();
    let pmf = |k: u64| {
        if k == 0 || k as usize > rates.len() {
            0.0
        } else {
            rates[k as usize - 1] / total
        }
    };
    let gof = chi_square_gof(&ks, &pmf)?;
    let rows = first.iter().map(|f| match f {
        Some((h, k)) => format!("{h:?},{k},1"),
        None => format!("{:?},0,0", cfg.a_max),
    });
    Ok(Outcome {
        n: cfg.samples,
        checks: vec![
            Check::tolerance("first-jump-rate", rate - total, 3.0 * se, Some(se))
                .with_detail(format!("estimate {rate:.5}, formula {total:.5}")),
            Check::p_value("jump-size-gof", gof, P_FLOOR),
        ],
        files: vec![("first_jump.csv".into(), csv("height,k,observed", rows))],
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub exponents: Vec<LevyQuartet>,
    /// `(s, lambda)` pairs.
    pub points: Vec<(f64, f64)>,
    pub t: f64,
    pub samples: usize,
    pub dt: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            exponents: vec![LevyQuartet::quadratic_supercritical(), atom_exponent()],
            points: vec![(0.5, 0.0), (0.8, 0.4)],
            t: 0.01,
            samples: 100_000,
            dt: 1e-3,
        }
    }
}

fn twotype_generator_check(cfg: &GeneratorConfig, seed: u64) -> Result<Outcome> {
    positive(&[("t", cfg.t), ("dt", cfg.dt)])?;
    let start = TwoTypeState { n: 1, z: 0.0 };
    let bc = BranchConfig {
        dt: cfg.dt,
        ..BranchConfig::default()
    };
    let opts = OdeOptions::default();
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for (i, q) in cfg.exponents.iter().enumerate() {
        let e = LaplaceExponent::new(q.clone())?;
        let end = collect(replicate_arm(seed, i as u64, cfg.samples, |_, rng| {
            let p = simulate_twotype(&e, start, cfg.t, &bc, rng)?;
            Ok((p.final_n().unwrap_or(0), p.final_z()))
        }))?;
        for &(s, l) in &cfg.points {
            let f0 = s.powi(start.n as i32) * (-l * start.z).exp();
            let v: Vec<f64> = end.iter().map(|&(n, z)| s.powi(n as i32) * (-l * z).exp()).collect();
            let (m, se) = mean_se(&v);
            let fd = (m - f0) / cfg.t;
            let g = twotype_generator(&e, start, s, l);
            // Size of the O(t) term from the exact semigroup at t and t/2.
            let exact = |t: f64| twotype_semigroup(&e, start, s, l, t, opts).map(|p| (p - f0) / t);
            let ct = 2.0 * (exact(cfg.t)? - exact(0.5 * cfg.t)?).abs();
            let tol = 3.0 * se / cfg.t + ct;
            let tag = format!("psi{i}-s{s}-l{l}");
            checks.push(
                Check::tolerance(&format!("fd-{tag}"), fd - g, tol, Some(se / cfg.t))
                    .with_detail(format!("fd {fd:.5}, generator {g:.5}, tol {tol:.5} (Ct {ct:.5})")),
            );
            let p = twotype_semigroup(&e, start, s, l, cfg.t, opts)?;
            checks.push(Check::tolerance(&format!("semigroup-{tag}"), m - p, 3.0 * se, Some(se)));
            rows.push(format!("{i},{s},{l},{fd:?},{g:?},{:?},{ct:?}", se / cfg.t));
        }
    }
    let quad = LaplaceExponent::new(LevyQuartet::quadratic_supercritical())?;
    let spot = twotype_generator(&quad, start, 0.5, 0.0);
    checks.push(Check::tolerance("spot-value", spot + 0.25, 1e-12, None));
    Ok(Outcome {
        n: cfg.samples,
        checks,
        files: vec![(
            "generator.csv".into(),
            csv("exponent,s,lambda,fd,generator,se,ct", rows),
        )],
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossConfig {
    pub psi: LevyQuartet,
    pub r: f64,
    pub a: f64,
    pub bin: f64,
    pub samples: usize,
    pub mesh: f64,
    pub dt: f64,
}

impl Default for CrossConfig {
    fn default() -> Self {
        CrossConfig {
            psi: LevyQuartet::quadratic_supercritical(),
            r: 1.0,
            a: 0.8,
            bin: 0.05,
            samples: 10_000,
            mesh: 1e-3,
            dt: 1e-3,
        }
    }
}

fn cross_construction(cfg: &CrossConfig, seed: u64) -> Result<Outcome> {
    positive(&[
        ("r", cfg.r),
        ("a", cfg.a),
        ("bin", cfg.bin),
        ("mesh", cfg.mesh),
        ("dt", cfg.dt),
    ])?;
    let e = LaplaceExponent::new(cfg.psi.clone())?;
    require_brownian_heights(&e)?;
    let grid = LevelGrid::centred(cfg.a, cfg.bin);
    let tc = tree_config(cfg.mesh);
    let tree = collect(replicate_arm(seed, 0, cfg.samples, |_, rng| {
        let u = simulate_upsilon_tree(&e, cfg.r, &tc, rng)?;
        let p = level_profile(&u.contour, Some(&u.spines), &grid, cfg.r)?;
        Ok((p.z1[0] as u64, p.z2[0]))
    }))?;
    let bc = BranchConfig {
        dt: cfg.dt,
        ..BranchConfig::default()
    };
    let start = TwoTypeState { n: 1, z: 0.0 };
    let twotype = collect(replicate_arm(seed, 1, cfg.samples, |_, rng| {
        let p = simulate_twotype(&e, start, cfg.a, &bc, rng)?;
        Ok((p.final_n().unwrap_or(0), p.final_z()))
    }))?;
    let z1 = |v: &[(u64, f64)]| v.iter().map(|p| p.0).collect::<Vec<_>>();
    let z2 = |v: &[(u64, f64)]| v.iter().map(|p| p.1).collect::<Vec<_>>();
    let rows = tree
        .iter()
        .map(|p| (0, p))
        .chain(twotype.iter().map(|p| (1, p)))
        .map(|(arm, (n, z))| format!("{arm},{n},{z:?}"));
    Ok(Outcome {
        n: cfg.samples,
        checks: vec![
            Check::p_value("z1-chi2", chi_square_two_sample(&z1(&tree), &z1(&twotype))?, P_FLOOR),
            Check::p_value("z2-ks", ks_two_sample(&z2(&tree), &z2(&twotype)), P_FLOOR)
                .with_detail(format!("bin {} centred at {}", cfg.bin, cfg.a)),
        ],
        files: vec![("levels.csv".into(), csv("arm,z1,z2", rows))],
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationsConfig {
    pub psi: LevyQuartet,
    pub r: f64,
    pub samples: usize,
}

impl Default for GenerationsConfig {
    fn default() -> Self {
        GenerationsConfig {
            psi: LevyQuartet::splitting(2.0, 1.0),
            r: 1.5,
            samples: 1000,
        }
    }
}

fn generations_oracle(cfg: &GenerationsConfig, seed: u64) -> Result<Outcome> {
    positive(&[("r", cfg.r)])?;
    let trees = tagged_trees(&cfg.psi, cfg.r, cfg.samples, seed)?;
    let mut contour_vs_oracle = 0;
    let mut tree_vs_oracle = 0;
    let mut rows = Vec::new();
    for (c, t) in &trees {
        let oracle = brute_force_generations(c);
        if discrete_generations(c)?.sizes != oracle {
            contour_vs_oracle += 1;
        }
        if tree_generations(t).sizes != oracle {
            tree_vs_oracle += 1;
        }
        rows.push(oracle.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" "));
    }
    Ok(Outcome {
        n: trees.len(),
        checks: vec![
            Check::exact("contour-vs-oracle", contour_vs_oracle, trees.len()),
            Check::exact("tree-vs-oracle", tree_vs_oracle, trees.len()),
        ],
        files: vec![("generations.csv".into(), csv("sizes", rows))],
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PruningConfig {
    pub psi: LevyQuartet,
    pub r: f64,
    pub r_prime: f64,
    pub samples: usize,
    pub delta: f64,
    pub levels: Vec<f64>,
    pub mesh: f64,
}

impl Default for PruningConfig {
    fn default() -> Self {
        PruningConfig {
            psi: LevyQuartet::quadratic_supercritical(),
            r: 0.5,
            r_prime: 1.0,
            samples: 10_000,
            delta: 0.05,
            levels: vec![0.25, 0.45],
            mesh: 1e-3,
        }
    }
}

fn pruning_compatibility(cfg: &PruningConfig, seed: u64) -> Result<Outcome> {
    positive(&[("r", cfg.r), ("delta", cfg.delta), ("mesh", cfg.mesh)])?;
    if cfg.r_prime <= cfg.r {
        return Err(Error::Config("`r_prime` must exceed `r`".into()));
    }
    if cfg.levels.iter().any(|&a| !(0.0..cfg.r).contains(&a)) {
        return Err(Error::Config("levels must lie in [0, r)".into()));
    }
    let e = LaplaceExponent::new(cfg.psi.clone())?;
    let tc = tree_config(cfg.mesh);
    let (r, d) = (cfg.r, cfg.delta);
    let z1 = |t: &ChronologicalTree| -> Vec<u64> {
        cfg.levels
            .iter()
            .map(|&a| {
                t.nodes()
                    .iter()
                    .filter(|n| n.prolific && n.birth <= a && a < n.top())
                    .count() as u64
            })
            .collect()
    };
    let direct = collect(replicate_arm(seed, 0, cfg.samples, |_, rng| {
        let u = simulate_upsilon_tree(&e, r, &tc, rng)?;
        Ok((contour_functionals(&u.contour, r, d), z1(&u.spines)))
    }))?;
    let pruned = collect(replicate_arm(seed, 1, cfg.samples, |_, rng| {
        let u = simulate_upsilon_tree(&e, cfg.r_prime, &tc, rng)?;
        let c = time_change_below(&u.contour, r);
        Ok((contour_functionals(&c, r, d), z1(&u.spines)))
    }))?;
    let fa: Vec<ContourFunctionals> = direct.iter().map(|p| p.0).collect();
    let fb: Vec<ContourFunctionals> = pruned.iter().map(|p| p.0).collect();
    let mut checks = functional_checks(&fa, &fb)?;
    for (j, a) in cfg.levels.iter().enumerate() {
        let ca: Vec<u64> = direct.iter().map(|p| p.1[j]).collect();
        let cb: Vec<u64> = pruned.iter().map(|p| p.1[j]).collect();
        checks.push(Check::p_value(
            &format!("z1-{a}-chi2"),
            chi_square_two_sample(&ca, &cb)?,
            P_FLOOR,
        ));
    }
    Ok(Outcome {
        n: cfg.samples,
        checks,
        files: vec![("functionals.csv".into(), two_arm_functionals(&fa, &fb))],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_is_complete() {
        let r = registry();
        let crit: Vec<usize> = r.iter().map(|e| e.criterion).collect();
        assert_eq!(crit, (1..=11).collect::<Vec<_>>());
        let mut seeds: Vec<u64> = r.iter().map(|e| e.default_seed).collect();
        seeds.dedup();
        assert_eq!(seeds.len(), 11);
        assert!(matches!(find("nope"), Err(Error::UnknownExperiment(_))));
    }

    #[test]
    fn unknown_config_keys_rejected() {
        let v = serde_json::json!({"samples": 1000, "bogus": 1});
        assert!(matches!(
            run_experiment("yule-geometric", &v, None, None),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn small_run_is_deterministic() {
        let v = serde_json::json!({"samples": 2000});
        let a = run_experiment("yule-geometric", &v, Some(5), None).unwrap();
        let b = run_experiment("yule-geometric", &v, Some(5), None).unwrap();
        assert_eq!(a.statistic, b.statistic);
        assert_eq!(a.config_hash, b.config_hash);
        assert_eq!(a.checks.len(), 2);
        let c = run_experiment("yule-geometric", &serde_json::json!({"samples": 2001}), Some(5), None).unwrap();
        assert_ne!(a.config_hash, c.config_hash);
    }

    #[test]
    fn atom_exponent_has_unit_root() {
        let e = LaplaceExponent::new(atom_exponent()).unwrap();
        assert!((e.b() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn small_generations_run() {
        let v = serde_json::json!({"samples": 50});
        let r = run_experiment("generations-oracle", &v, None, None).unwrap();
        assert!(r.pass, "{}", r.summary());
    }
}
