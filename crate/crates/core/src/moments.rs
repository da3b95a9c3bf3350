//! Normally-ordered intensity moments ⟨:W₁^{m₁}…W_N^{m_N}:⟩ of zero-mean Gaussian states.

use crate::error::{Error, Result};
use crate::fock::JointPhotonDist;
use crate::gaussian::{self, NormalParams, StateKind, SupermodeSpec};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Maximum number of ladder operators in one Wick expansion.
pub const MAX_OPERATORS: usize = 12;
pub const MAX_ORDER: u32 = (MAX_OPERATORS / 2) as u32;
const THETA_TOL: f64 = 1e-9;

/// Exponent tuple (m₁, …, m_N).
pub type Powers = Vec<u32>;

/// All exponent tuples over `n_modes` with total order ≤ `max_order`, sorted by
/// total order and then lexicographically.
pub fn tuples(n_modes: usize, max_order: u32) -> Vec<Powers> {
    fn rec(j: usize, left: u32, cur: &mut Powers, out: &mut Vec<Powers>) {
        if j == cur.len() {
            out.push(cur.clone());
            return;
        }
        for m in 0..=left {
            cur[j] = m;
            rec(j + 1, left - m, cur, out);
        }
    }
    let mut out = Vec::new();
    rec(0, max_order, &mut vec![0; n_modes], &mut out);
    out.sort_by_key(|t| (t.iter().sum::<u32>(), t.clone()));
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    n_modes: usize,
    max_order: u32,
    entries: BTreeMap<Powers, f64>,
}

impl MomentTable {
    pub fn from_entries(n_modes: usize, max_order: u32, entries: BTreeMap<Powers, f64>) -> Result<Self> {
        for t in tuples(n_modes, max_order) {
            if !entries.contains_key(&t) {
                return Err(Error::MissingMoment(t));
            }
        }
        Ok(MomentTable { n_modes, max_order, entries })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    pub fn get(&self, powers: &[u32]) -> Result<f64> {
        self.entries.get(powers).copied().ok_or_else(|| Error::MissingMoment(powers.to_vec()))
    }

    /// Moment with exponent `m` on the listed modes and 0 elsewhere.
    pub fn at(&self, spec: &[(usize, u32)]) -> Result<f64> {
        let mut p = vec![0; self.n_modes];
        for &(j, m) in spec {
            if j >= self.n_modes {
                return Err(Error::ModeOutOfRange { mode: j, n_modes: self.n_modes });
            }
            p[j] += m;
        }
        self.get(&p)
    }

    /// ⟨W_j⟩.
    pub fn mean(&self, j: usize) -> Result<f64> {
        self.at(&[(j, 1)])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Powers, &f64)> {
        self.entries.iter()
    }

    /// Table restricted to the listed modes (in the given order).
    pub fn marginal(&self, modes: &[usize]) -> Result<MomentTable> {
        let mut entries = BTreeMap::new();
        for t in tuples(modes.len(), self.max_order) {
            let spec: Vec<(usize, u32)> = modes.iter().copied().zip(t.iter().copied()).collect();
            entries.insert(t, self.at(&spec)?);
        }
        MomentTable::from_entries(modes.len(), self.max_order, entries)
    }

    /// Largest absolute difference between matching entries.
    pub fn max_abs_diff(&self, other: &MomentTable) -> f64 {
        self.entries
            .iter()
            .map(|(k, v)| other.entries.get(k).map_or(f64::INFINITY, |w| (v - w).abs()))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy)]
struct Op {
    mode: usize,
    dag: bool,
}

/// Contraction ⟨o₁ o₂⟩ for o₁ left of o₂ in a normally ordered product.
///
/// Only three kinds occur because every a† stands left of every a:
/// ⟨a_j† a_k†⟩ = conj⟨a_k a_j⟩, ⟨a_j† a_k⟩ = B_j or −D̄_jk, ⟨a_j a_k⟩ = C_j or D_jk.
/// Example: ⟨a₁† a₂† a₁ a₂⟩ = ⟨a₁†a₂†⟩⟨a₁a₂⟩ + ⟨a₁†a₁⟩⟨a₂†a₂⟩ + ⟨a₁†a₂⟩⟨a₂†a₁⟩
///        = |D₁₂|² + B₁B₂ + |D̄₁₂|².
fn contraction(p: &NormalParams, a: Op, b: Op) -> C64 {
    match (a.dag, b.dag) {
        (true, true) => {
            if a.mode == b.mode {
                p.c[a.mode].conj()
            } else {
                p.d(a.mode, b.mode).conj()
            }
        }
        (true, false) => {
            if a.mode == b.mode {
                C64::new(p.b[a.mode], 0.0)
            } else {
                -p.dbar(a.mode, b.mode)
            }
        }
        (false, false) => {
            if a.mode == b.mode {
                p.c[a.mode]
            } else {
                p.d(a.mode, b.mode)
            }
        }
        // a before a† never appears in a normally ordered product
        (false, true) => unreachable!("anti-normal pair in normally ordered product"),
    }
}

/// ⟨∏ a_j^{†m_j} ∏ a_j^{m_j}⟩ by summing over perfect matchings (memoized on the
/// set of still-unmatched operators).
pub fn wick_moment(p: &NormalParams, powers: &[u32]) -> Result<f64> {
    p.validate()?;
    if powers.len() != p.n_modes() {
        return Err(Error::SizeMismatch(format!("{} exponents for {} modes", powers.len(), p.n_modes())));
    }
    let count = 2 * powers.iter().map(|&m| m as usize).sum::<usize>();
    if count > MAX_OPERATORS {
        return Err(Error::OrderCap { count, cap: MAX_OPERATORS });
    }
    let mut ops = Vec::with_capacity(count);
    for dag in [true, false] {
        for (mode, &m) in powers.iter().enumerate() {
            ops.extend(std::iter::repeat_n(Op { mode, dag }, m as usize));
        }
    }
    let n = ops.len();
    let mut table = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in i + 1..n {
            table[i * n + j] = contraction(p, ops[i], ops[j]);
        }
    }
    let full = (1usize << n) - 1;
    let mut memo: Vec<Option<C64>> = vec![None; full + 1];
    fn rec(mask: usize, n: usize, table: &[C64], memo: &mut [Option<C64>]) -> C64 {
        if mask == 0 {
            return C64::new(1.0, 0.0);
        }
        if let Some(v) = memo[mask] {
            return v;
        }
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        let mut acc = C64::new(0.0, 0.0);
        let mut bits = rest;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let c = table[i * n + j];
            if c != C64::new(0.0, 0.0) {
                acc += c * rec(rest & !(1 << j), n, table, memo);
            }
        }
        memo[mask] = Some(acc);
        acc
    }
    Ok(rec(full, n, &table, &mut memo).re)
}

pub fn moment_table(p: &NormalParams, max_order: u32) -> Result<MomentTable> {
    if max_order > MAX_ORDER {
        return Err(Error::OrderCap { count: 2 * max_order as usize, cap: MAX_OPERATORS });
    }
    p.validate()?;
    let ts = tuples(p.n_modes(), max_order);
    let vals: Result<Vec<f64>> = ts.par_iter().map(|t| wick_moment(p, t)).collect();
    let entries = ts.into_iter().zip(vals?).collect();
    Ok(MomentTable { n_modes: p.n_modes(), max_order, entries })
}

/// det σ of a two-mode Gaussian state from its intensity moments up to ⟨W₁²W₂²⟩.
pub fn det_sigma_tmsv_from_moments(t: &MomentTable) -> Result<f64> {
    if t.n_modes() != 2 {
        return Err(Error::SizeMismatch("two-mode table required".into()));
    }
    let w1 = t.get(&[1, 0])?;
    let w2 = t.get(&[0, 1])?;
    let w11 = t.get(&[2, 0])?;
    let w22 = t.get(&[0, 2])?;
    let w12 = t.get(&[1, 1])?;
    let w112 = t.get(&[2, 1])?;
    let w122 = t.get(&[1, 2])?;
    let w1122 = t.get(&[2, 2])?;
    let s = w1 + w2;
    Ok(1.0 + 4.0 * s + 12.0 * s * s
        - 4.0 * w11 * (1.0 + 6.0 * w2 + 24.0 * w2 * w2)
        - 4.0 * w22 * (1.0 + 6.0 * w1 + 24.0 * w1 * w1)
        + 8.0 * w112 * (1.0 + 6.0 * w2)
        + 8.0 * w122 * (1.0 + 6.0 * w1)
        - 8.0 * w12 * (1.0 + 6.0 * w1 + 6.0 * w2 + 48.0 * w1 * w2)
        + 96.0 * w1 * w2 * (w1 + w2 + 5.0 * w1 * w2)
        + 24.0 * w11 * w22
        - 8.0 * w1122
        + 48.0 * w12 * w12)
}

/// Closed-form (g², g⁴) of a mode pair from its parameters.
///
/// g⁴ = 4[1 + x² + 4x + 2|D̄|²|D|²/(n_i n_j)²] with x = g² − 1. It equals the
/// Wick value ⟨:W_i²W_j²:⟩/(n_i n_j)² only when C_i = C_j = 0.
pub fn g2_g4_forward(p: &NormalParams, pair: (usize, usize)) -> Result<(f64, f64)> {
    let (i, j) = pair;
    let n = p.n_modes();
    if i == j || i >= n || j >= n {
        return Err(Error::InvalidArgument(format!("bad pair ({i}, {j})")));
    }
    for m in [i, j] {
        if !(p.b[m] > 0.0) {
            return Err(Error::ZeroIntensity(m));
        }
    }
    let nn = p.b[i] * p.b[j];
    let a = p.d(i, j).norm_sqr();
    let b = p.dbar(i, j).norm_sqr();
    let x = (a + b) / nn;
    let g4 = 4.0 * (1.0 + x * x + 4.0 * x + 2.0 * a * b / (nn * nn));
    Ok((1.0 + x, g4))
}

/// (g², g⁴) measured from a moment table: ⟨:W_iW_j:⟩/(n_in_j), ⟨:W_i²W_j²:⟩/(n_in_j)².
pub fn g2_g4_from_table(t: &MomentTable, pair: (usize, usize)) -> Result<(f64, f64)> {
    let (i, j) = pair;
    if i == j {
        return Err(Error::InvalidArgument("pair needs distinct modes".into()));
    }
    let (ni, nj) = (t.mean(i)?, t.mean(j)?);
    for (m, v) in [(i, ni), (j, nj)] {
        if !(v > 0.0) {
            return Err(Error::ZeroIntensity(m));
        }
    }
    let nn = ni * nj;
    Ok((t.at(&[(i, 1), (j, 1)])? / nn, t.at(&[(i, 2), (j, 2)])? / (nn * nn)))
}

/// How strictly to treat moment sets that fall outside the Gaussian-consistent region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Consistency {
    /// Values outside a ±1e-9 band are errors.
    #[default]
    Strict,
    /// Values are clamped into range and the result is flagged.
    Measured,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCorrelations {
    pub g2: f64,
    pub g4: f64,
    /// Larger root of the inversion.
    pub beta_plus_sq: f64,
    /// Smaller root of the inversion.
    pub beta_minus_sq: f64,
    pub theta: f64,
    /// Set when θ or g² − 1 had to be clamped beyond the noise band.
    pub clamped: bool,
}

pub fn invert_g2_g4(n1: f64, n2: f64, g2: f64, g4: f64) -> Result<PairCorrelations> {
    invert_g2_g4_with(n1, n2, g2, g4, Consistency::Strict)
}

/// β±² = n₁n₂(g²−1)(1 ± √(1−θ))/2 with θ = (g⁴ + 12 − 16g² − 4(g²−1)²)/(2(g²−1)²).
pub fn invert_g2_g4_with(n1: f64, n2: f64, g2: f64, g4: f64, mode: Consistency) -> Result<PairCorrelations> {
    if !(n1 > 0.0 && n2 > 0.0) {
        return Err(Error::ZeroIntensity(if n1 > 0.0 { 1 } else { 0 }));
    }
    if !(g2.is_finite() && g4.is_finite()) {
        return Err(Error::InconsistentStatistics("non-finite correlation".into()));
    }
    let x = g2 - 1.0;
    let mut clamped = false;
    if x <= 0.0 {
        if x < -THETA_TOL && mode == Consistency::Strict {
            return Err(Error::InconsistentStatistics(format!("g2 = {g2} below 1")));
        }
        clamped = x < -THETA_TOL;
        return Ok(PairCorrelations { g2, g4, beta_plus_sq: 0.0, beta_minus_sq: 0.0, theta: 0.0, clamped });
    }
    let raw = (g4 + 12.0 - 16.0 * g2 - 4.0 * x * x) / (2.0 * x * x);
    let theta = if (-THETA_TOL..=1.0 + THETA_TOL).contains(&raw) {
        raw.clamp(0.0, 1.0)
    } else if mode == Consistency::Strict {
        return Err(Error::InconsistentStatistics(format!("theta = {raw} outside [0, 1]")));
    } else {
        clamped = true;
        raw.clamp(0.0, 1.0)
    };
    let s = (1.0 - theta).sqrt();
    let total = n1 * n2 * x;
    Ok(PairCorrelations {
        g2,
        g4,
        beta_plus_sq: total * (1.0 + s) / 2.0,
        // Product form: β₊²β₋² = total² θ / 4.
        beta_minus_sq: total * theta / (2.0 * (1.0 + s)),
        theta,
        clamped,
    })
}

/// Which of |D|², |D̄|² is identified with the larger root β₊².
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    /// Pair created by a two-mode squeezer: |D| ≥ |D̄|.
    Squeezing,
    /// Pair correlated through a shared mode (photon exchange): |D̄| ≥ |D|.
    Exchange,
}

/// Pair correlations with a declared branch assignment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssignedPair {
    pub corr: PairCorrelations,
    pub kind: PairKind,
}

impl AssignedPair {
    pub fn new(corr: PairCorrelations, kind: PairKind) -> Self {
        AssignedPair { corr, kind }
    }

    /// |D|².
    pub fn d_sq(&self) -> f64 {
        match self.kind {
            PairKind::Squeezing => self.corr.beta_plus_sq,
            PairKind::Exchange => self.corr.beta_minus_sq,
        }
    }

    /// |D̄|².
    pub fn dbar_sq(&self) -> f64 {
        match self.kind {
            PairKind::Squeezing => self.corr.beta_minus_sq,
            PairKind::Exchange => self.corr.beta_plus_sq,
        }
    }

    /// r = |D|² − |D̄|².
    pub fn r(&self) -> f64 {
        self.d_sq() - self.dbar_sq()
    }
}

/// Measured pair correlations for (i, j) from a table.
pub fn pair_from_table(t: &MomentTable, pair: (usize, usize), mode: Consistency) -> Result<PairCorrelations> {
    let (g2, g4) = g2_g4_from_table(t, pair)?;
    invert_g2_g4_with(t.mean(pair.0)?, t.mean(pair.1)?, g2, g4, mode)
}

fn multi_binom(a: &[u32], b: &[u32]) -> f64 {
    a.iter().zip(b).map(|(&n, &k)| binom(n, k)).product()
}

pub(crate) fn binom(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Sub-tuples β with 0 < β ≤ α and β_i ≥ 1.
fn sub_tuples(alpha: &[u32], i: usize) -> Vec<Powers> {
    let mut out = vec![vec![]];
    for (j, &a) in alpha.iter().enumerate() {
        let lo = if j == i { 1 } else { 0 };
        out = out
            .into_iter()
            .flat_map(|v: Powers| {
                (lo..=a).map(move |b| {
                    let mut w = v.clone();
                    w.push(b);
                    w
                })
            })
            .collect();
    }
    out
}

/// Shared recursion m(α) = Σ_{β} C(α−e_i, β−e_i) κ(β) m(α−β), i = first index with α_i > 0.
fn recursion_terms(alpha: &[u32]) -> (usize, Vec<(Powers, Powers, f64)>) {
    let i = alpha.iter().position(|&a| a > 0).expect("nonzero tuple");
    let mut am = alpha.to_vec();
    am[i] -= 1;
    let terms = sub_tuples(alpha, i)
        .into_iter()
        .map(|beta| {
            let mut bm = beta.clone();
            bm[i] -= 1;
            let rest: Powers = alpha.iter().zip(&beta).map(|(a, b)| a - b).collect();
            (beta, rest, multi_binom(&am, &bm))
        })
        .collect();
    (i, terms)
}

/// Factorial moments → factorial cumulants (same table layout; the constant entry is 0).
pub fn moments_to_cumulants(t: &MomentTable) -> Result<MomentTable> {
    let mut kappa: BTreeMap<Powers, f64> = BTreeMap::new();
    for alpha in tuples(t.n_modes, t.max_order) {
        if alpha.iter().all(|&a| a == 0) {
            kappa.insert(alpha, 0.0);
            continue;
        }
        let (_, terms) = recursion_terms(&alpha);
        let mut v = t.get(&alpha)?;
        for (beta, rest, c) in terms {
            if beta != alpha {
                v -= c * kappa[&beta] * t.get(&rest)?;
            }
        }
        kappa.insert(alpha, v);
    }
    Ok(MomentTable { n_modes: t.n_modes, max_order: t.max_order, entries: kappa })
}

/// Factorial cumulants → factorial moments.
pub fn cumulants_to_moments(k: &MomentTable) -> Result<MomentTable> {
    let mut m: BTreeMap<Powers, f64> = BTreeMap::new();
    for alpha in tuples(k.n_modes, k.max_order) {
        if alpha.iter().all(|&a| a == 0) {
            m.insert(alpha, 1.0);
            continue;
        }
        let (_, terms) = recursion_terms(&alpha);
        let mut v = 0.0;
        for (beta, rest, c) in terms {
            v += c * k.get(&beta)? * m[&rest];
        }
        m.insert(alpha, v);
    }
    Ok(MomentTable { n_modes: k.n_modes, max_order: k.max_order, entries: m })
}

/// Joint moments of the summed intensities (Σ_k W_{1k}, …) of independent supermodes.
pub fn combine_supermodes(tables: &[MomentTable], max_order: u32) -> Result<MomentTable> {
    let first = tables.first().ok_or_else(|| Error::InvalidArgument("no tables".into()))?;
    let n = first.n_modes;
    for t in tables {
        if t.n_modes != n {
            return Err(Error::SizeMismatch("tables differ in mode count".into()));
        }
        if t.max_order < max_order {
            return Err(Error::SizeMismatch(format!(
                "table order {} below requested {max_order}",
                t.max_order
            )));
        }
    }
    let mut acc: BTreeMap<Powers, f64> = tuples(n, max_order).into_iter().map(|t| (t, 0.0)).collect();
    for t in tables {
        let k = moments_to_cumulants(&t.marginal(&(0..n).collect::<Vec<_>>())?.truncated(max_order))?;
        for (key, v) in acc.iter_mut() {
            *v += k.get(key)?;
        }
    }
    cumulants_to_moments(&MomentTable { n_modes: n, max_order, entries: acc })
}

impl MomentTable {
    /// Same table keeping only entries of total order ≤ `max_order`.
    pub fn truncated(&self, max_order: u32) -> MomentTable {
        let max_order = max_order.min(self.max_order);
        let entries = self
            .entries
            .iter()
            .filter(|(k, _)| k.iter().sum::<u32>() <= max_order)
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        MomentTable { n_modes: self.n_modes, max_order, entries }
    }
}

/// Falling-factorial moments E[∏ (n_j)_{m_j}] of a photon-number distribution.
pub fn moments_from_distribution(d: &JointPhotonDist, max_order: u32) -> Result<MomentTable> {
    let total = d.total();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Unnormalized(total));
    }
    let n = d.n_modes();
    let ts = tuples(n, max_order);
    let cut = d.cutoffs().to_vec();
    // falling factorials per mode: ff[j][n][m] = n (n−1)…(n−m+1)
    let ff: Vec<Vec<Vec<f64>>> = cut
        .iter()
        .map(|&c| {
            (0..c)
                .map(|nn| {
                    let mut row = vec![1.0; max_order as usize + 1];
                    for m in 1..=max_order as usize {
                        row[m] = row[m - 1] * (nn as f64 - (m as f64 - 1.0));
                    }
                    row
                })
                .collect()
        })
        .collect();
    let mut sums = vec![0.0; ts.len()];
    for (idx, p) in d.iter() {
        if p == 0.0 {
            continue;
        }
        for (s, t) in sums.iter_mut().zip(&ts) {
            let mut v = p;
            for j in 0..n {
                v *= ff[j][idx[j]][t[j] as usize];
            }
            *s += v;
        }
    }
    Ok(MomentTable { n_modes: n, max_order, entries: ts.into_iter().zip(sums).collect() })
}

/// Per-supermode Wick tables of a supermode mixture (ψ = 0 for every squeezer).
pub fn supermode_tables(spec: &SupermodeSpec, kind: StateKind, r2: f64, max_order: u32) -> Result<Vec<MomentTable>> {
    let r1k = gaussian::supermode_amplitudes(spec)?;
    let r2k = gaussian::supermode_amplitudes(&SupermodeSpec { r: r2, ..*spec })?;
    r1k.iter()
        .zip(&r2k)
        .map(|(&a, &b)| {
            let s = gaussian::supermode_covariance(kind, a, b)?;
            moment_table(&gaussian::normal_params_from_cov(&s), max_order)
        })
        .collect()
}

/// Intensity moments of the detected supermode mixture.
pub fn mixture_table(spec: &SupermodeSpec, kind: StateKind, r2: f64, max_order: u32) -> Result<MomentTable> {
    combine_supermodes(&supermode_tables(spec, kind, r2, max_order)?, max_order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::tmsv_covariance;

    #[test]
    fn tuple_counts() {
        assert_eq!(tuples(2, 4).len(), 15);
        assert_eq!(tuples(3, 6).len(), 84);
        assert_eq!(tuples(3, 2)[0], vec![0, 0, 0]);
    }

    #[test]
    fn vacuum_and_thermal() {
        let p = NormalParams::vacuum(2);
        let t = moment_table(&p, 4).unwrap();
        for (k, v) in t.iter() {
            let expect = if k.iter().all(|&m| m == 0) { 1.0 } else { 0.0 };
            assert_eq!(*v, expect);
        }
        let mut p = NormalParams::vacuum(1);
        p.b[0] = 0.7;
        assert!((wick_moment(&p, &[2]).unwrap() - 2.0 * 0.49).abs() < 1e-15);
        assert!((wick_moment(&p, &[3]).unwrap() - 6.0 * 0.343).abs() < 1e-14);
    }

    #[test]
    fn order_cap() {
        let p = NormalParams::vacuum(2);
        assert!(matches!(wick_moment(&p, &[4, 3]), Err(Error::OrderCap { .. })));
        assert!(moment_table(&p, 7).is_err());
    }

    #[test]
    fn tmsv_cross_moment_and_det() {
        let p = gaussian::normal_params_from_cov(&tmsv_covariance(0.5, 0.0).unwrap());
        let (s, c) = (0.5f64.sinh(), 0.5f64.cosh());
        let w12 = wick_moment(&p, &[1, 1]).unwrap();
        assert!((w12 - (s.powi(4) + c * c * s * s)).abs() < 1e-14);
        let t = moment_table(&p, 4).unwrap();
        assert!((det_sigma_tmsv_from_moments(&t).unwrap() - 1.0).abs() < 1e-12);
        assert!((det_sigma_tmsv_from_moments(&moment_table(&NormalParams::vacuum(2), 4).unwrap()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn g2_values() {
        let p = gaussian::normal_params_from_cov(&tmsv_covariance(0.5, 0.0).unwrap());
        let (g2, g4) = g2_g4_forward(&p, (0, 1)).unwrap();
        assert!((g2 - (1.0 + 1.0 / 0.5f64.tanh().powi(2))).abs() < 1e-12);
        assert!((g2 - 5.682_68).abs() < 2e-5);
        let x = g2 - 1.0;
        assert!((g4 - 4.0 * (1.0 + x * x + 4.0 * x)).abs() < 1e-10);
        let pc = invert_g2_g4(p.b[0], p.b[1], g2, g4).unwrap();
        assert!(pc.theta.abs() <= 1e-9 && pc.beta_minus_sq <= 1e-9);
        assert!((pc.beta_plus_sq - p.d[0].norm_sqr()).abs() < 1e-9);
        // g2 − 2 = 1/sinh²r: about 1e-2 at r = 3, below 1e-3 from r ≈ 4.2 on
        let p3 = gaussian::normal_params_from_cov(&tmsv_covariance(3.0, 0.0).unwrap());
        assert!((g2_g4_forward(&p3, (0, 1)).unwrap().0 - 2.0 - 1.0 / 3.0f64.sinh().powi(2)).abs() < 1e-12);
        let p4 = gaussian::normal_params_from_cov(&tmsv_covariance(4.5, 0.0).unwrap());
        assert!((g2_g4_forward(&p4, (0, 1)).unwrap().0 - 2.0).abs() < 1e-3);
        assert!(g2_g4_forward(&NormalParams::vacuum(2), (0, 1)).is_err());
    }

    #[test]
    fn inversion_near_uncorrelated() {
        let (n1, n2) = (0.3, 0.4);
        let mut last = f64::INFINITY;
        for delta in [1e-2, 1e-3, 1e-4] {
            let (a, b) = (0.8 * delta * n1 * n2, 0.2 * delta * n1 * n2);
            let nn = n1 * n2;
            let x = (a + b) / nn;
            let g4 = 4.0 * (1.0 + x * x + 4.0 * x + 2.0 * a * b / (nn * nn));
            let pc = invert_g2_g4(n1, n2, 1.0 + x, g4).unwrap();
            assert!(pc.beta_plus_sq < last);
            last = pc.beta_plus_sq;
            assert!(pc.beta_plus_sq + pc.beta_minus_sq <= 1.0001 * delta * nn);
        }
        let pc = invert_g2_g4(n1, n2, 1.0, 4.0).unwrap();
        assert_eq!((pc.beta_plus_sq, pc.beta_minus_sq), (0.0, 0.0));
    }

    #[test]
    fn inversion_rejects_inconsistent() {
        // θ < 0: g4 too small for the given g2
        assert!(invert_g2_g4(0.3, 0.3, 1.5, 4.0).is_err());
        let pc = invert_g2_g4_with(0.3, 0.3, 1.5, 4.0, Consistency::Measured).unwrap();
        assert!(pc.clamped && pc.theta == 0.0);
    }

    #[test]
    fn cumulant_round_trip() {
        let p = gaussian::normal_params_from_cov(&tmsv_covariance(0.4, 0.2).unwrap());
        let t = moment_table(&p, 6).unwrap();
        let back = cumulants_to_moments(&moments_to_cumulants(&t).unwrap()).unwrap();
        assert!(t.max_abs_diff(&back) < 1e-12);
        let single = combine_supermodes(std::slice::from_ref(&t), 6).unwrap();
        assert!(t.max_abs_diff(&single) < 1e-12);
    }

    #[test]
    fn two_thermal_modes_combine() {
        let b = 0.4;
        let mut p = NormalParams::vacuum(1);
        p.b[0] = b;
        let t = moment_table(&p, 4).unwrap();
        let c = combine_supermodes(&[t.clone(), t], 4).unwrap();
        assert!((c.get(&[1]).unwrap() - 2.0 * b).abs() < 1e-15);
        // κ₂ of a thermal mode is b², so m₂ = 2b² + (2b)² = 6b².
        assert!((c.get(&[2]).unwrap() - 6.0 * b * b).abs() < 1e-14);
    }
}
