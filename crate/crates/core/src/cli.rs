//! Command-line front end: `simulate`, `verify`, `export` and
//! `list-experiments`.
//!
//! Exit codes: 0 on success or a passing verification, 1 on a failing
//! verification or a simulation error, 2 on usage and configuration errors.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::branching::{simulate_cb, simulate_cbi, simulate_twotype, BranchConfig, BranchingPath, TwoTypeState};
use crate::error::{Error, Result};
use crate::genealogy::{discrete_generations, level_profile, sample_genealogy_poisson, LevelGrid};
use crate::levy::{LaplaceExponent, LevyQuartet};
use crate::path::{CadlagPath, SimConfig};
use crate::rng::replicate;
use crate::sim::{
    contour_functionals, simulate_eta_x, simulate_nu_r, simulate_sin_tree, simulate_upsilon_tree,
    simulate_yule_contour, EtaOptions, TreeConfig,
};
use crate::tree::{prolific_skeleton, ChronologicalTree, Detection};
use crate::verify::{config_hash, registry, report::write_atomic, run_experiment};

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "SPLITREE_OUT";

#[derive(Parser, Debug)]
#[command(
    name = "splitree",
    version,
    about = "Splitting trees and Levy trees with an infinite line"
)]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample trees, contours or branching processes.
    Simulate(SimulateArgs),
    /// Run a named acceptance experiment.
    Verify(VerifyArgs),
    /// Convert a contour CSV into tree, skeleton, generation or level data.
    Export(ExportArgs),
    /// Print the registered experiments.
    ListExperiments,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimKind {
    Yule,
    NuR,
    Sin,
    UpsilonTree,
    EtaX,
    Cb,
    Cbi,
    Twotype,
    Genealogy,
}

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    #[arg(value_enum)]
    pub kind: SimKind,
    /// Exponent file (TOML, or JSON) with kappa, alpha, beta, atoms, exp_component.
    #[arg(long)]
    pub psi: PathBuf,
    /// Truncation height.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Initial segment length or initial mass.
    #[arg(long, default_value_t = 1.0)]
    pub x: f64,
    /// Horizon for the branching processes.
    #[arg(long = "t", default_value_t = 1.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 1)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Brownian mesh.
    #[arg(long, default_value_t = 1e-3)]
    pub mesh: f64,
    /// Time step of the branching processes.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub node_budget: usize,
    /// Initial number of prolific lines for `twotype`.
    #[arg(long, default_value_t = 1)]
    pub lines: u64,
    /// Crossing band for the functional CSV (default `0.1 r`).
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    pub name: String,
    /// Experiment config (TOML, or JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportKind {
    /// Chronological tree JSON of a finite-variation contour.
    Tree,
    /// Prolific skeleton JSON (lines reaching `r`).
    Skeleton,
    /// Generation sizes CSV.
    Generations,
    /// Level profile CSV of a contour read as heights.
    Profile,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    #[arg(value_enum)]
    pub kind: ExportKind,
    /// Contour CSV with columns t,value,is_jump.
    #[arg(long)]
    pub contour: PathBuf,
    /// Truncation height of the contour.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Bin width of the level profile.
    #[arg(long, default_value_t = 0.05)]
    pub width: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Messages go to stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be at least 1");
            return 2;
        }
        // Fails only when a pool already exists, which keeps its size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    let result = match cli.command {
        Command::Simulate(a) => simulate(&a).map(|()| 0),
        Command::Verify(a) => verify(&a),
        Command::Export(a) => export(&a).map(|()| 0),
        Command::ListExperiments => {
            for e in registry() {
                println!("{:<24} criterion {:>2}  {}", e.name, e.criterion, e.summary);
            }
            Ok(0)
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidExponent(_) | Error::UnknownExperiment(_) | Error::Io(_) | Error::Json(_) => 2,
        _ => 1,
    }
}

fn out_dir(out: &Option<PathBuf>) -> PathBuf {
    out.clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Reads TOML, falling back to JSON.
pub fn read_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    match toml::from_str::<T>(&text) {
        Ok(v) => Ok(v),
        Err(toml_err) => serde_json::from_str(&text).map_err(|json_err| {
            Error::Config(format!(
                "{}: not TOML ({toml_err}) nor JSON ({json_err})",
                path.display()
            ))
        }),
    }
}

fn read_value(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    if let Ok(t) = toml::from_str::<toml::Table>(&text) {
        return Ok(serde_json::to_value(t)?);
    }
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    write_atomic(&dir.join(name), bytes)
}

fn path_csv(p: &CadlagPath) -> Vec<u8> {
    let mut v = Vec::new();
    p.write_csv(&mut v).expect("writing to memory");
    v
}

fn branching_csv(p: &BranchingPath) -> Vec<u8> {
    let mut s = if p.n.is_empty() {
        "t,z\n".to_string()
    } else {
        "t,z,n\n".to_string()
    };
    for i in 0..p.times.len() {
        match p.n.get(i) {
            Some(n) => s.push_str(&format!("{:?},{:?},{n}\n", p.times[i], p.z[i])),
            None => s.push_str(&format!("{:?},{:?}\n", p.times[i], p.z[i])),
        }
    }
    s.into_bytes()
}

/// One simulated sample ready to be written.
enum Sample {
    Contour(CadlagPath, Option<ChronologicalTree>),
    Branching(BranchingPath),
    Json(Value),
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let q: LevyQuartet = read_config(&a.psi)?;
    let e = LaplaceExponent::new(q.clone())?;
    for (name, v) in [("r", a.r), ("mesh", a.mesh), ("dt", a.dt)] {
        if v.is_nan() || v <= 0.0 {
            return Err(Error::Config(format!("--{name} must be positive")));
        }
    }
    if a.x < 0.0 || a.horizon < 0.0 {
        return Err(Error::Config("--x and --t must be non-negative".into()));
    }
    let tc = TreeConfig {
        sim: SimConfig {
            mesh: a.mesh,
            ..SimConfig::default()
        },
        node_budget: a.node_budget,
        ..TreeConfig::default()
    };
    let bc = BranchConfig {
        dt: a.dt,
        ..BranchConfig::default()
    };
    if a.kind == SimKind::Yule && (q.beta != 0.0 || q.jump_mass() != 0.0) {
        return Err(Error::Config("`yule` needs an exponent of the form l - b".into()));
    }
    let samples: Vec<Result<Sample>> = replicate(a.seed, a.samples, |i, rng| {
        let s = match a.kind {
            SimKind::Yule => Sample::Contour(simulate_yule_contour(e.b(), a.r, rng).contour, None),
            SimKind::NuR => Sample::Contour(simulate_nu_r(&e, a.r, &tc, rng)?.contour, None),
            SimKind::Sin => Sample::Contour(simulate_sin_tree(&e, a.r, &tc, rng)?.contour, None),
            SimKind::UpsilonTree => {
                let u = simulate_upsilon_tree(&e, a.r, &tc, rng).map_err(|err| err.with_seed(a.seed))?;
                Sample::Contour(u.contour, Some(u.spines))
            }
            SimKind::EtaX => {
                let f = simulate_eta_x(&e, a.x, a.r, EtaOptions::default(), &tc, rng)?;
                Sample::Contour(f.contour, None)
            }
            SimKind::Cb => Sample::Branching(simulate_cb(&e, a.x, a.horizon, &bc, rng)?),
            SimKind::Cbi => Sample::Branching(simulate_cbi(&e, a.x, a.horizon, &bc, rng)?),
            SimKind::Twotype => {
                let start = TwoTypeState { n: a.lines, z: a.x };
                Sample::Branching(simulate_twotype(&e, start, a.horizon, &bc, rng)?)
            }
            SimKind::Genealogy => {
                let g = sample_genealogy_poisson(&e, a.r, a.node_budget, rng).map_err(|err| err.with_seed(i as u64))?;
                Sample::Json(g.to_json())
            }
        };
        Ok(s)
    });
    let samples: Vec<Sample> = samples.into_iter().collect::<Result<_>>()?;
    let dir = out_dir(&a.out);
    fs::create_dir_all(&dir)?;
    let delta = a.delta.unwrap_or(0.1 * a.r);
    let mut functionals = String::from("sample,lifetime,crossings,low_occupation\n");
    for (i, s) in samples.iter().enumerate() {
        match s {
            Sample::Contour(c, spines) => {
                write(&dir, &format!("contour_{i}.csv"), &path_csv(c))?;
                if let Some(t) = spines {
                    write(
                        &dir,
                        &format!("spines_{i}.json"),
                        serde_json::to_string_pretty(&t.to_json())?.as_bytes(),
                    )?;
                }
                let f = contour_functionals(c, a.r, delta);
                functionals.push_str(&format!(
                    "{i},{:?},{},{:?}\n",
                    f.lifetime, f.crossings, f.low_occupation
                ));
            }
            Sample::Branching(p) => write(&dir, &format!("path_{i}.csv"), &branching_csv(p))?,
            Sample::Json(v) => write(
                &dir,
                &format!("genealogy_{i}.json"),
                serde_json::to_string_pretty(v)?.as_bytes(),
            )?,
        }
    }
    if samples.iter().any(|s| matches!(s, Sample::Contour(..))) {
        write(&dir, "functionals.csv", functionals.as_bytes())?;
    }
    let run = serde_json::json!({"command": "simulate", "args": a, "psi": q});
    let meta = serde_json::json!({"config": run, "config_hash": config_hash(&run)});
    write(&dir, "run.json", serde_json::to_string_pretty(&meta)?.as_bytes())?;
    println!(
        "simulate {:?}: {} samples written to {}",
        a.kind,
        samples.len(),
        dir.display()
    );
    Ok(())
}

fn verify(a: &VerifyArgs) -> Result<i32> {
    let config = match &a.config {
        Some(p) => read_value(p)?,
        None => Value::Null,
    };
    let out = out_dir(&a.out);
    let report = run_experiment(&a.name, &config, a.seed, Some(&out))?;
    println!("{}", report.summary());
    Ok(if report.pass { 0 } else { 1 })
}

fn export(a: &ExportArgs) -> Result<()> {
    let text = fs::read_to_string(&a.contour).map_err(|e| Error::Config(format!("{}: {e}", a.contour.display())))?;
    let contour = CadlagPath::read_csv(&text).map_err(Error::Config)?;
    let dir = out_dir(&a.out);
    fs::create_dir_all(&dir)?;
    match a.kind {
        ExportKind::Tree => {
            let t = ChronologicalTree::from_contour(&contour)?;
            write(
                &dir,
                "tree.json",
                serde_json::to_string_pretty(&t.to_json())?.as_bytes(),
            )?;
        }
        ExportKind::Skeleton => {
            let t = ChronologicalTree::from_contour(&contour)?;
            let sk = prolific_skeleton(&t, a.r, Detection::Geometric)?;
            write(
                &dir,
                "skeleton.json",
                serde_json::to_string_pretty(&sk.to_json())?.as_bytes(),
            )?;
        }
        ExportKind::Generations => {
            let g = discrete_generations(&contour)?;
            let mut s = String::from("generation,size\n");
            for (i, n) in g.sizes.iter().enumerate() {
                s.push_str(&format!("{i},{n}\n"));
            }
            write(&dir, "generations.csv", s.as_bytes())?;
        }
        ExportKind::Profile => {
            if a.width.is_nan() || a.width <= 0.0 {
                return Err(Error::Config("--width must be positive".into()));
            }
            let grid = LevelGrid::uniform(a.r, a.width);
            let p = level_profile(&contour, None, &grid, a.r)?;
            let mut v = Vec::new();
            p.write_csv(&mut v)?;
            write(&dir, "profile.csv", &v)?;
        }
    }
    println!("export: written to {}", dir.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_psi_is_a_usage_error() {
        assert_eq!(run(["splitree", "simulate", "yule"]), 2);
        assert_eq!(run(["splitree", "verify", "no-such-experiment"]), 2);
        assert_eq!(run(["splitree", "list-experiments"]), 0);
    }

    #[test]
    fn psi_file_formats() {
        let dir = tempfile::tempdir().unwrap();
        let t = dir.path().join("p.toml");
        fs::write(&t, "alpha = 1.0\nbeta = 0.0\nkappa = 0.7\n").unwrap();
        let q: LevyQuartet = read_config(&t).unwrap();
        assert_eq!(q, LevyQuartet::yule(0.7));
        let j = dir.path().join("p.json");
        fs::write(&j, r#"{"alpha": -1, "beta": 1, "atoms": [{"mass": 1, "size": 1}]}"#).unwrap();
        let q: LevyQuartet = read_config(&j).unwrap();
        assert_eq!(q.atoms.len(), 1);
        fs::write(&j, r#"{"alpha": -1, "beta": 1, "gamma": 2}"#).unwrap();
        assert!(matches!(read_config::<LevyQuartet>(&j), Err(Error::Config(_))));
    }
}
