use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use intensity_ppt::detector::{self, DetectorModel};
use intensity_ppt::fock::{self, CutoffPolicy, JointPhotonDist};
use intensity_ppt::gaussian::{self, StateKind, SupermodeSpec};
use intensity_ppt::sweep::{self, Fault, SweepConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "intensity-ppt", version, about = "Entanglement witnesses from intensity correlations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Two-mode PPT test along an r grid (one row per r and measurement path).
    TmsvSweep(SweepArgs),
    /// Three-mode witness along an r grid (one row per r, cutoff and path).
    TmgsSweep(SweepArgs),
    /// Click statistics of a single state through the multiplexed detector.
    DetectorSim(DetectorArgs),
    /// Oracle cross-checks; exits nonzero on any failure.
    Verify(VerifyArgs),
}

#[derive(Args, Default)]
struct CommonArgs {
    /// TOML config file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    g2: Option<f64>,
    #[arg(long)]
    supermodes: Option<usize>,
    #[arg(long)]
    channels: Option<usize>,
    #[arg(long)]
    efficiency: Option<f64>,
    /// Sample this many shots instead of using exact click probabilities.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    r_steps: Option<usize>,
    /// Photon-number cutoff (repeatable).
    #[arg(long = "cutoff")]
    cutoffs: Vec<usize>,
    /// Add the simulated detector paths (implied by --channels, --efficiency or --shots).
    #[arg(long)]
    detector: bool,
}

#[derive(Clone, Copy, ValueEnum, Deserialize, Debug)]
#[serde(rename_all = "lowercase")]
enum StateArg {
    Tmsv,
    Tmgs,
}

#[derive(Args)]
struct DetectorArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// State to simulate [default: tmsv].
    #[arg(long, value_enum)]
    state: Option<StateArg>,
    /// Squeezing parameter of the state [default: 0.5].
    #[arg(long)]
    r: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    ResidualSign,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    /// Deliberately corrupt a component to exercise the report.
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<FaultArg>,
}

/// Config file schema; every key is optional and mirrors a flag.
#[derive(Deserialize, Default, Debug)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    r_min: Option<f64>,
    r_max: Option<f64>,
    r_steps: Option<usize>,
    g2: Option<f64>,
    supermodes: Option<usize>,
    cutoffs: Option<Vec<usize>>,
    detector: Option<bool>,
    channels: Option<usize>,
    efficiency: Option<f64>,
    shots: Option<u64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    state: Option<StateArg>,
    r: Option<f64>,
}

/// Fully resolved settings; hashed for provenance.
#[derive(Serialize, Debug)]
struct Resolved {
    command: &'static str,
    r_grid: Vec<f64>,
    g2: f64,
    supermodes: usize,
    cutoffs: Vec<usize>,
    detector: bool,
    channels: usize,
    efficiency: f64,
    shots: Option<u64>,
    seed: u64,
}

impl Resolved {
    fn hash(&self) -> Result<String> {
        let text = toml::to_string(self).context("serializing resolved config")?;
        Ok(hex::encode(&Sha256::digest(text.as_bytes())[..8]))
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
        }
    }
}

fn resolve_common(command: &'static str, c: &CommonArgs, f: &FileConfig, detector: bool) -> Resolved {
    let reference = DetectorModel::reference();
    let channels = c.channels.or(f.channels);
    let efficiency = c.efficiency.or(f.efficiency);
    let shots = c.shots.or(f.shots);
    Resolved {
        command,
        r_grid: Vec::new(),
        g2: c.g2.or(f.g2).unwrap_or(1.8),
        supermodes: c.supermodes.or(f.supermodes).unwrap_or(8),
        cutoffs: Vec::new(),
        detector: detector || channels.is_some() || efficiency.is_some() || shots.is_some(),
        channels: channels.unwrap_or(reference.channels),
        efficiency: efficiency.unwrap_or(reference.efficiency),
        shots,
        seed: c.seed.or(f.seed).unwrap_or(0),
    }
}

fn resolve_sweep(command: &'static str, a: &SweepArgs) -> Result<(Resolved, Option<PathBuf>)> {
    let f = load_config(&a.common.config)?;
    let mut res = resolve_common(command, &a.common, &f, a.detector || f.detector.unwrap_or(false));
    let r_min = a.r_min.or(f.r_min).unwrap_or(0.18);
    let r_max = a.r_max.or(f.r_max).unwrap_or(0.96);
    let steps = a.r_steps.or(f.r_steps).unwrap_or(14);
    res.r_grid = sweep::linspace(r_min, r_max, steps)?;
    res.cutoffs = if a.cutoffs.is_empty() { f.cutoffs.clone().unwrap_or_default() } else { a.cutoffs.clone() };
    Ok((res, a.common.out.clone().or(f.out)))
}

fn sweep_config(kind: StateKind, r: &Resolved) -> Result<SweepConfig> {
    let detector = if r.detector { Some(DetectorModel::new(r.channels, r.efficiency)?) } else { None };
    let cfg = SweepConfig {
        state_kind: kind,
        r_grid: r.r_grid.clone(),
        g2_target: r.g2,
        supermodes: r.supermodes,
        cutoffs: r.cutoffs.clone(),
        detector,
        shots: r.shots,
        seed: r.seed,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn write_csv(out: &Option<PathBuf>, header: &[&str], rows: impl Iterator<Item = Vec<String>>, hash: &str) -> Result<()> {
    let mut buf = String::new();
    let mut line = |fields: Vec<String>| {
        buf.push_str(&fields.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(","));
        buf.push('\n');
    };
    let mut h: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    h.extend(["config_hash".into(), "version".into()]);
    line(h);
    for mut r in rows {
        r.extend([hash.to_string(), VERSION.to_string()]);
        line(r);
    }
    match out {
        Some(p) => std::fs::write(p, buf).with_context(|| format!("writing {}", p.display())),
        None => std::io::stdout().write_all(buf.as_bytes()).context("writing stdout"),
    }
}

fn tmsv_sweep(a: &SweepArgs) -> Result<()> {
    let (res, out) = resolve_sweep("tmsv-sweep", a)?;
    let rows = sweep::run_tmsv_sweep(&sweep_config(StateKind::Tmsv, &res)?)?;
    write_csv(&out, &sweep::TMSV_HEADER, rows.iter().map(|r| r.fields()), &res.hash()?)
}

fn tmgs_sweep(a: &SweepArgs) -> Result<()> {
    let (res, out) = resolve_sweep("tmgs-sweep", a)?;
    let rows = sweep::run_tmgs_sweep(&sweep_config(StateKind::Tmgs, &res)?)?;
    write_csv(&out, &sweep::TMGS_HEADER, rows.iter().map(|r| r.fields()), &res.hash()?)
}

fn detector_sim(a: &DetectorArgs) -> Result<()> {
    let f = load_config(&a.common.config)?;
    let mut res = resolve_common("detector-sim", &a.common, &f, true);
    let state = a.state.or(f.state).unwrap_or(StateArg::Tmsv);
    let r = a.r.or(f.r).unwrap_or(0.5);
    res.r_grid = vec![r];
    if !(r.is_finite() && r >= 0.0) {
        bail!("--r must be finite and >= 0");
    }
    let model = DetectorModel::new(res.channels, res.efficiency)?;
    let spec = SupermodeSpec::new(r, gaussian::mu_from_g2(res.g2)?, res.supermodes)?;
    let (dist, header): (JointPhotonDist, &[&str]) = match state {
        StateArg::Tmsv => (
            fock::mixture_distribution(&spec, StateKind::Tmsv, None, sweep::TMSV_LEVELS, CutoffPolicy { tol: 1e-6, ..Default::default() })?,
            &["k1", "k2", "probability"],
        ),
        StateArg::Tmgs => (
            fock::gaussian_photon_distribution(&gaussian::collective_covariance(&spec, StateKind::Tmgs, r)?, sweep::TMGS_LEVELS)?,
            &["k1", "k2", "k3", "probability"],
        ),
    };
    let models = vec![model; dist.n_modes()];
    let clicks = match res.shots {
        Some(s) => detector::sample_clicks(&dist, &models, s, res.seed)?,
        None => detector::apply_detector(&dist, &models)?,
    };
    let dims: Vec<usize> = clicks.channels().iter().map(|c| c + 1).collect();
    let rows = clicks.probs().iter().enumerate().filter(|(_, p)| **p > 0.0).map(|(i, p)| {
        let mut rem = i;
        let mut idx = vec![0; dims.len()];
        for m in (0..dims.len()).rev() {
            idx[m] = rem % dims[m];
            rem /= dims[m];
        }
        let mut v: Vec<String> = idx.iter().map(|k| k.to_string()).collect();
        v.push(sweep::fmt_num(*p));
        v
    });
    write_csv(&a.common.out.clone().or(f.out), header, rows, &res.hash()?)
}

fn verify(a: &VerifyArgs) -> Result<bool> {
    let fault = a.inject_fault.map(|f| match f {
        FaultArg::ResidualSign => Fault::ResidualSign,
    });
    let report = sweep::run_verify_with(fault)?;
    let rows = report.checks.iter().map(|c| {
        vec![
            c.name.to_string(),
            if c.passed { "PASS".into() } else { "FAIL".into() },
            sweep::fmt_num(c.worst),
            sweep::fmt_num(c.tolerance),
            sweep::fmt_num(c.truncation_mass),
        ]
    });
    let hash = hex::encode(&Sha256::digest(format!("verify {:?}", a.inject_fault.is_some()).as_bytes())[..8]);
    write_csv(&a.out, &["check", "status", "worst", "tolerance", "truncation_mass"], rows, &hash)?;
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::TmsvSweep(a) => tmsv_sweep(a).map(|_| true),
        Command::TmgsSweep(a) => tmgs_sweep(a).map(|_| true),
        Command::DetectorSim(a) => detector_sim(a).map(|_| true),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
