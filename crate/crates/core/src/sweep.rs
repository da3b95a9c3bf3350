//! Parameter sweeps behind the figure data, and the oracle cross-check report.

use crate::detector::{self, DetectorModel};
use crate::error::{Error, Result};
use crate::fock::{self, CutoffPolicy, JointPhotonDist};
use crate::gaussian::{self, CovMatrix, StateKind, SupermodeSpec};
use crate::moments::{self, AssignedPair, Consistency, MomentTable, PairCorrelations};
use crate::random;
use crate::witness::{self, Verdict};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Fock levels per mode for explicit two-mode mixtures.
pub const TMSV_LEVELS: usize = 40;
/// Fock levels per mode for three-mode photon-number distributions.
pub const TMGS_LEVELS: usize = 36;
/// Photon-number cutoff used when inverting two-mode clicks.
pub const TMSV_INVERSION_NMAX: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub state_kind: StateKind,
    pub r_grid: Vec<f64>,
    pub g2_target: f64,
    pub supermodes: usize,
    /// Photon-number cutoffs n ≤ cutoff for truncated or inverted rows.
    pub cutoffs: Vec<usize>,
    pub detector: Option<DetectorModel>,
    pub shots: Option<u64>,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            state_kind: StateKind::Tmsv,
            r_grid: linspace(0.18, 0.96, 14).expect("static grid"),
            g2_target: 1.8,
            supermodes: 8,
            cutoffs: Vec::new(),
            detector: None,
            shots: None,
            seed: 0,
        }
    }
}

/// `steps` evenly spaced points from `min` to `max` inclusive.
pub fn linspace(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || !min.is_finite() || !max.is_finite() {
        return Err(Error::InvalidArgument("grid needs finite bounds and at least one step".into()));
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    Ok((0..steps).map(|i| min + (max - min) * i as f64 / (steps - 1) as f64).collect())
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.r_grid.is_empty() {
            return Err(Error::InvalidArgument("r grid is empty; set --r-steps >= 1".into()));
        }
        if self.r_grid.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::InvalidArgument("r values must be finite and >= 0".into()));
        }
        if self.r_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("r grid must be strictly increasing (check --r-min < --r-max)".into()));
        }
        gaussian::mu_from_g2(self.g2_target)?;
        if self.supermodes == 0 {
            return Err(Error::InvalidArgument("--supermodes must be >= 1".into()));
        }
        if let Some(c) = self.cutoffs.iter().find(|&&c| c < 2) {
            return Err(Error::InvalidArgument(format!("cutoff {c} is below the minimum of 2")));
        }
        if let Some(d) = &self.detector {
            DetectorModel::new(d.channels, d.efficiency)?;
            if let Some(c) = self.cutoffs.iter().find(|&&c| c > d.channels) {
                return Err(Error::InvalidArgument(format!("cutoff {c} exceeds the {} detector channels", d.channels)));
            }
        }
        if self.shots == Some(0) {
            return Err(Error::InvalidArgument("--shots must be >= 1".into()));
        }
        Ok(())
    }

    fn spec(&self, r: f64) -> Result<SupermodeSpec> {
        SupermodeSpec::new(r, gaussian::mu_from_g2(self.g2_target)?, self.supermodes)
    }

    fn row_seed(&self, i: usize) -> u64 {
        self.seed ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }
}

/// Shortest round-trip decimal, switching to exponent form for very small or
/// large magnitudes so CSV cells stay compact.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TmsvRow {
    pub r: f64,
    pub g2: f64,
    /// "gaussian" (moments of the supermode mixture), "clicks" (raw click
    /// counts used as photon numbers) or "inverted" (clicks inverted to photons).
    pub path: &'static str,
    pub delta1_pt: f64,
    pub det_sigma: f64,
    pub lambda_minus: f64,
    pub entangled: Option<bool>,
    pub status: String,
}

pub const TMSV_HEADER: [&str; 8] = ["r", "g2", "path", "delta1_pt", "det_sigma", "lambda_minus", "entangled", "status"];

impl TmsvRow {
    pub fn fields(&self) -> Vec<String> {
        vec![
            fmt_num(self.r),
            fmt_num(self.g2),
            self.path.to_string(),
            fmt_num(self.delta1_pt),
            fmt_num(self.det_sigma),
            fmt_num(self.lambda_minus),
            self.entangled.map_or_else(String::new, |e| e.to_string()),
            self.status.clone(),
        ]
    }

    fn from_result(r: f64, g2: f64, path: &'static str, res: Result<witness::TwoModeVerdict>) -> Self {
        match res {
            Ok(v) => TmsvRow {
                r,
                g2,
                path,
                delta1_pt: v.delta1_pt,
                det_sigma: v.det_sigma,
                lambda_minus: v.lambda_minus,
                entangled: Some(v.entangled),
                status: if v.forms_agree { "ok".into() } else { "verdict forms disagree".into() },
            },
            Err(e) => TmsvRow {
                r,
                g2,
                path,
                delta1_pt: f64::NAN,
                det_sigma: f64::NAN,
                lambda_minus: f64::NAN,
                entangled: None,
                status: e.to_string(),
            },
        }
    }
}

/// Pair correlations, exactly zero when either mode is empty: a Gaussian mode
/// with no photons is pure vacuum and hence uncorrelated.
fn sweep_pair(t: &MomentTable, pair: (usize, usize), mode: Consistency) -> Result<PairCorrelations> {
    if t.mean(pair.0)? == 0.0 || t.mean(pair.1)? == 0.0 {
        return Ok(PairCorrelations { g2: f64::NAN, g4: f64::NAN, beta_plus_sq: 0.0, beta_minus_sq: 0.0, theta: 0.0, clamped: false });
    }
    moments::pair_from_table(t, pair, mode)
}

fn two_mode_from_table(t: &MomentTable, mode: Consistency) -> Result<witness::TwoModeVerdict> {
    let pc = sweep_pair(t, (0, 1), mode)?;
    witness::two_mode_witness(t, &pc)
}

/// Two-mode witness on the g²-matched supermode mixture (exact intensity moments).
pub fn tmsv_gaussian_point(r: f64, g2: f64, supermodes: usize) -> Result<witness::TwoModeVerdict> {
    let spec = SupermodeSpec::new(r, gaussian::mu_from_g2(g2)?, supermodes)?;
    let t = moments::mixture_table(&spec, StateKind::Tmsv, 0.0, 4)?;
    let mode = if spec.mu == 0.0 { Consistency::Strict } else { Consistency::Measured };
    two_mode_from_table(&t, mode)
}

fn clicks_for(dist: &JointPhotonDist, models: &[DetectorModel], shots: Option<u64>, seed: u64) -> Result<detector::ClickDist> {
    match shots {
        Some(s) => detector::sample_clicks(dist, models, s, seed),
        None => detector::apply_detector(dist, models),
    }
}

fn table_from_dist(d: &JointPhotonDist) -> Result<MomentTable> {
    moments::moments_from_distribution(&d.normalized()?, 4)
}

pub fn run_tmsv_sweep(cfg: &SweepConfig) -> Result<Vec<TmsvRow>> {
    cfg.validate()?;
    let rows: Vec<Vec<TmsvRow>> = cfg
        .r_grid
        .par_iter()
        .enumerate()
        .map(|(i, &r)| {
            let g2 = cfg.g2_target;
            let mut out = vec![TmsvRow::from_result(r, g2, "gaussian", tmsv_gaussian_point(r, g2, cfg.supermodes))];
            if let Some(det) = cfg.detector {
                let models = [det; 2];
                let clicks = cfg.spec(r).and_then(|spec| {
                    let dist = fock::mixture_distribution(&spec, StateKind::Tmsv, None, TMSV_LEVELS, CutoffPolicy { tol: 1e-6, ..Default::default() })?;
                    clicks_for(&dist, &models, cfg.shots, cfg.row_seed(i))
                });
                let raw = clicks
                    .clone()
                    .and_then(|c| table_from_dist(&c.as_photon_dist()?))
                    .and_then(|t| two_mode_from_table(&t, Consistency::Measured));
                out.push(TmsvRow::from_result(r, g2, "clicks", raw));
                let nmax = cfg.cutoffs.first().copied().unwrap_or(TMSV_INVERSION_NMAX).min(det.channels);
                let inv = clicks
                    .and_then(|c| detector::estimate_photon_dist(&c, &models, nmax))
                    .and_then(|e| table_from_dist(&e.dist))
                    .and_then(|t| two_mode_from_table(&t, Consistency::Measured));
                out.push(TmsvRow::from_result(r, g2, "inverted", inv));
            }
            out
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TmgsRow {
    pub r: f64,
    pub g2: f64,
    /// Photon-number cutoff; 0 means no truncation.
    pub cutoff: usize,
    /// "gaussian", "truncated" (exact distribution cut at n ≤ cutoff),
    /// "clicks" or "inverted" (detector pipelines).
    pub path: &'static str,
    pub lhs: f64,
    pub rhs_lower: f64,
    pub rhs_upper: f64,
    pub verdict: Option<Verdict>,
    /// Ground-truth PPT value of the covariance (negative ⇒ entangled).
    pub ppt: f64,
    pub status: String,
}

pub const TMGS_HEADER: [&str; 10] = ["r", "g2", "cutoff", "path", "lhs", "rhs_lower", "rhs_upper", "verdict", "ppt", "status"];

impl TmgsRow {
    pub fn fields(&self) -> Vec<String> {
        vec![
            fmt_num(self.r),
            fmt_num(self.g2),
            self.cutoff.to_string(),
            self.path.to_string(),
            fmt_num(self.lhs),
            fmt_num(self.rhs_lower),
            fmt_num(self.rhs_upper),
            self.verdict.map_or_else(String::new, |v| v.to_string()),
            fmt_num(self.ppt),
            self.status.clone(),
        ]
    }

    fn from_result(r: f64, g2: f64, cutoff: usize, path: &'static str, ppt: f64, res: Result<witness::ThreeModeWitness>) -> Self {
        match res {
            Ok(w) => TmgsRow {
                r,
                g2,
                cutoff,
                path,
                lhs: w.lhs,
                rhs_lower: w.rhs_lower,
                rhs_upper: w.rhs_upper,
                verdict: Some(w.verdict),
                ppt,
                status: "ok".into(),
            },
            Err(e) => TmgsRow {
                r,
                g2,
                cutoff,
                path,
                lhs: f64::NAN,
                rhs_lower: f64::NAN,
                rhs_upper: f64::NAN,
                verdict: None,
                ppt,
                status: e.to_string(),
            },
        }
    }
}

/// Collective-mode covariance of the three-mode state at r₁ = r₂ = r.
pub fn tmgs_state(r: f64, g2: f64, supermodes: usize) -> Result<CovMatrix> {
    let spec = SupermodeSpec::new(r, gaussian::mu_from_g2(g2)?, supermodes)?;
    gaussian::collective_covariance(&spec, StateKind::Tmgs, r)
}

fn three_mode_from_table(t: &MomentTable, s: &CovMatrix, mode: Consistency) -> Result<witness::ThreeModeWitness> {
    let mut pcs = Vec::with_capacity(3);
    for (pair, kind) in gaussian::pairs(3).into_iter().zip(witness::TMGS_PAIR_KINDS) {
        pcs.push(AssignedPair::new(sweep_pair(t, pair, mode)?, kind));
    }
    witness::three_mode_witness_with(t, &pcs, Some(s), mode)
}

/// Gaussian-analytic three-mode witness: Wick moments of the covariance.
pub fn tmgs_gaussian_point(s: &CovMatrix) -> Result<witness::ThreeModeWitness> {
    let t = moments::moment_table(&gaussian::normal_params_from_cov(s), 4)?;
    three_mode_from_table(&t, s, Consistency::Strict)
}

/// Witness with moments from the photon-number distribution cut at n ≤ cutoff.
pub fn tmgs_truncated_point(s: &CovMatrix, dist: &JointPhotonDist, cutoff: usize) -> Result<witness::ThreeModeWitness> {
    let t = table_from_dist(&dist.truncated(&[cutoff + 1; 3])?)?;
    three_mode_from_table(&t, s, Consistency::Measured)
}

pub fn run_tmgs_sweep(cfg: &SweepConfig) -> Result<Vec<TmgsRow>> {
    cfg.validate()?;
    let g2 = cfg.g2_target;
    let rows: Vec<Vec<TmgsRow>> = cfg
        .r_grid
        .par_iter()
        .enumerate()
        .map(|(i, &r)| {
            let s = match tmgs_state(r, g2, cfg.supermodes) {
                Ok(s) => s,
                Err(e) => return vec![TmgsRow::from_result(r, g2, 0, "gaussian", f64::NAN, Err(e))],
            };
            let ppt = witness::ppt_condition(&s, 0).unwrap_or(f64::NAN);
            let mut out = vec![TmgsRow::from_result(r, g2, 0, "gaussian", ppt, tmgs_gaussian_point(&s))];
            if cfg.cutoffs.is_empty() && cfg.detector.is_none() {
                return out;
            }
            let dist = fock::gaussian_photon_distribution(&s, TMGS_LEVELS);
            match cfg.detector {
                None => {
                    for &c in &cfg.cutoffs {
                        let res = dist.clone().and_then(|d| tmgs_truncated_point(&s, &d, c));
                        out.push(TmgsRow::from_result(r, g2, c, "truncated", ppt, res));
                    }
                }
                Some(det) => {
                    let models = [det; 3];
                    let clicks = dist.and_then(|d| clicks_for(&d, &models, cfg.shots, cfg.row_seed(i)));
                    for &c in &cfg.cutoffs {
                        let res = clicks
                            .clone()
                            .and_then(|k| detector::estimate_photon_dist(&k, &models, c))
                            .and_then(|e| table_from_dist(&e.dist))
                            .and_then(|t| three_mode_from_table(&t, &s, Consistency::Measured));
                        out.push(TmgsRow::from_result(r, g2, c, "inverted", ppt, res));
                    }
                    let raw = clicks
                        .and_then(|c| table_from_dist(&c.as_photon_dist()?))
                        .and_then(|t| three_mode_from_table(&t, &s, Consistency::Measured));
                    out.push(TmgsRow::from_result(r, g2, det.channels, "clicks", ppt, raw));
                }
            }
            out
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

/// Smallest grid value from which every later row is Entangled.
pub fn onset(rows: &[(f64, Option<Verdict>)]) -> Option<f64> {
    let mut start = None;
    for &(r, v) in rows {
        if v == Some(Verdict::Entangled) {
            start.get_or_insert(r);
        } else {
            start = None;
        }
    }
    start
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub worst: f64,
    pub tolerance: f64,
    /// Truncation mass of the Fock oracle involved (0 when none).
    pub truncation_mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Deliberate faults for exercising the report itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Flips the sign of every residual term F̃.
    ResidualSign,
}

pub fn run_verify() -> Result<VerifyReport> {
    run_verify_with(None)
}

fn rel_diff(a: &MomentTable, b: &MomentTable, max_order: u32) -> f64 {
    a.iter()
        .filter(|(k, _)| k.iter().sum::<u32>() <= max_order)
        .map(|(k, v)| {
            let w = b.get(k).unwrap_or(f64::INFINITY);
            (v - w).abs() / v.abs().max(1e-300)
        })
        .fold(0.0, f64::max)
}

fn check(name: &'static str, worst: f64, tolerance: f64, truncation_mass: f64) -> CheckResult {
    CheckResult { name, passed: worst <= tolerance, worst, tolerance, truncation_mass }
}

/// Oracle cross-checks: Wick vs Fock, invariants vs eigensolve, det σ identity,
/// partial-transpose map, Δ₂ decomposition, bound soundness, detector columns.
pub fn run_verify_with(fault: Option<Fault>) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut checks = Vec::new();
    let sign = if fault == Some(Fault::ResidualSign) { -1.0 } else { 1.0 };

    // Wick moments vs falling-factorial moments of explicit Fock states.
    let t = fock::tmsv_fock(0.5, 0.0, 40)?;
    let wick = moments::moment_table(&gaussian::normal_params_from_cov(&gaussian::tmsv_covariance(0.5, 0.0)?), 4)?;
    let fk = moments::moments_from_distribution(&fock::joint_distribution(&t).normalized()?, 4)?;
    checks.push(check("wick_vs_fock_tmsv", rel_diff(&wick, &fk, 4), 1e-6, t.deficit()));
    let g = fock::tmgs_fock(0.3, 0.3, 0.0, 0.0, 20, CutoffPolicy { tol: 1e-6, ..Default::default() })?;
    let wick = moments::moment_table(&gaussian::normal_params_from_cov(&gaussian::tmgs_covariance(0.3, 0.3, 0.0, 0.0)?), 4)?;
    let fk = moments::moments_from_distribution(&fock::joint_distribution(&g).normalized()?, 4)?;
    checks.push(check("wick_vs_fock_tmgs", rel_diff(&wick, &fk, 4), 1e-6 + 100.0 * g.deficit(), g.deficit()));

    // Invariant formula vs direct eigensolve on partially transposed states.
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let s = gaussian::partial_transpose(&random::random_state(2, 0.8, &mut rng)?, 1)?;
        let inv = gaussian::symplectic_invariants(&s);
        let (lp, lm) = gaussian::two_mode_eigs_from_invariants(inv[0], inv[1])?;
        let nu = gaussian::symplectic_eigenvalues(&s)?;
        worst = worst.max((lm - nu[0]).abs()).max((lp - nu[1]).abs() / nu[1]);
    }
    checks.push(check("invariants_vs_eigensolve", worst, 1e-9, 0.0));

    // det σ from moments.
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let s = random::random_state(2, 0.5, &mut rng)?;
        let t = moments::moment_table(&gaussian::normal_params_from_cov(&s), 4)?;
        worst = worst.max((moments::det_sigma_tmsv_from_moments(&t)? - s.det()).abs());
    }
    checks.push(check("det_sigma_from_moments", worst, 1e-8, 0.0));

    // Partial-transpose parameter map and Δ₂ = Δ₂,w − Δ₂,r.
    let mut map_worst: f64 = 0.0;
    let mut d2_worst: f64 = 0.0;
    for _ in 0..100 {
        let s = random::random_state(3, 0.6, &mut rng)?;
        let p = gaussian::normal_params_from_cov(&s);
        let pt = gaussian::normal_params_from_cov(&gaussian::partial_transpose(&s, 0)?);
        let mapped = p.partial_transpose(0)?;
        for (a, b) in pt.c.iter().chain(&pt.d).chain(&pt.dbar).zip(mapped.c.iter().chain(&mapped.d).chain(&mapped.dbar)) {
            map_worst = map_worst.max((a - b).norm());
        }
        let inv = gaussian::symplectic_invariants(&s);
        let mut resid = 16.0 * p.d.iter().map(|d| d.norm_sqr()).sum::<f64>();
        for perm in witness::PERMUTATIONS {
            resid += sign * witness::residual_f(&p, perm, false)?;
        }
        d2_worst = d2_worst.max((witness::delta2_w(&s)? - resid - inv[1]).abs());
    }
    checks.push(check("partial_transpose_map", map_worst, 1e-12, 0.0));
    checks.push(check("delta2_decomposition", d2_worst, 1e-9, 0.0));

    // Bound soundness |Σ F̃| ≤ bound, and the exact identity LHS + Σ F̃ = PPT value.
    let mut sound = f64::NEG_INFINITY;
    let mut ident: f64 = 0.0;
    for _ in 0..200 {
        let s = random::random_state(3, 0.6, &mut rng)?;
        let p = gaussian::normal_params_from_cov(&s);
        let t = moments::moment_table(&p, 4)?;
        let mut sf = 0.0;
        for perm in witness::PERMUTATIONS {
            sf += sign * witness::residual_f(&p, perm, true)?;
        }
        let bound = witness::rhs_bound(&t)?;
        sound = sound.max(sf.abs() - bound - 1e-12 * (1.0 + bound));
        let exact = witness::ppt_condition(&s, 0)?;
        let w = witness::three_mode_witness(&t, &exact_pairs(&p), Some(&s))?;
        ident = ident.max((w.lhs + sf - exact).abs() / exact.abs().max(1.0));
    }
    checks.push(check("bound_soundness", sound, 0.0, 0.0));
    checks.push(check("ppt_identity", ident, 1e-9, 0.0));

    // Detector response columns.
    let m = detector::click_prob_matrix(&DetectorModel::reference(), 64);
    let worst = (0..=64).map(|n| (m.column(n).sum() - 1.0).abs()).fold(0.0, f64::max);
    checks.push(check("detector_columns", worst, 1e-12, 0.0));

    Ok(VerifyReport { checks })
}

/// Pair correlations assigned from exact parameters (|D|², |D̄|²) of each pair.
pub fn exact_pairs(p: &gaussian::NormalParams) -> [moments::AssignedPair; 3] {
    let mk = |j: usize, k: usize| {
        let (a, b) = (p.d(j, k).norm_sqr(), p.dbar(j, k).norm_sqr());
        let corr = moments::PairCorrelations {
            g2: f64::NAN,
            g4: f64::NAN,
            beta_plus_sq: a.max(b),
            beta_minus_sq: a.min(b),
            theta: f64::NAN,
            clamped: false,
        };
        let kind = if a >= b { moments::PairKind::Squeezing } else { moments::PairKind::Exchange };
        moments::AssignedPair::new(corr, kind)
    };
    [mk(0, 1), mk(0, 2), mk(1, 2)]
}
