//! Truncated Fock-space oracle: explicit squeezed states, supermode mixtures and
//! joint photon-number distributions.

use crate::error::{Error, Result};
use crate::gaussian::{self, CovMatrix, StateKind, SupermodeSpec};
use na::DMatrix;
use nalgebra as na;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

/// Default tolerated probability mass lost to truncation.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Largest tensor (number of amplitudes or probabilities) built on request.
pub const MAX_ENTRIES: usize = 1 << 24;

fn check_size(cutoffs: &[usize]) -> Result<usize> {
    let mut size: usize = 1;
    for &c in cutoffs {
        if c == 0 {
            return Err(Error::InvalidArgument("cutoffs must be >= 1".into()));
        }
        size = size
            .checked_mul(c)
            .filter(|&s| s <= MAX_ENTRIES)
            .ok_or_else(|| Error::Infeasible(format!("tensor with cutoffs {cutoffs:?} exceeds {MAX_ENTRIES} entries")))?;
    }
    Ok(size)
}

fn strides(cutoffs: &[usize]) -> Vec<usize> {
    let mut s = vec![1; cutoffs.len()];
    for j in (0..cutoffs.len().saturating_sub(1)).rev() {
        s[j] = s[j + 1] * cutoffs[j + 1];
    }
    s
}

fn unravel(mut flat: usize, cutoffs: &[usize], idx: &mut [usize]) {
    for j in (0..cutoffs.len()).rev() {
        idx[j] = flat % cutoffs[j];
        flat /= cutoffs[j];
    }
}

/// Truncated multimode pure state; `deficit` is the probability mass known to be lost.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    cutoffs: Vec<usize>,
    amps: Vec<C64>,
    deficit: f64,
}

/// Internal head-room used when a squeezer pushes amplitude above the cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffPolicy {
    /// Extra Fock levels on each target mode during evolution; dropped afterwards.
    pub margin: usize,
    /// Maximum tolerated accumulated truncation deficit.
    pub tol: f64,
}

impl Default for CutoffPolicy {
    fn default() -> Self {
        CutoffPolicy { margin: 12, tol: DEFAULT_TOL }
    }
}

impl FockState {
    pub fn vacuum(cutoffs: &[usize]) -> Result<Self> {
        let size = check_size(cutoffs)?;
        let mut amps = vec![C64::new(0.0, 0.0); size];
        amps[0] = C64::new(1.0, 0.0);
        Ok(FockState { cutoffs: cutoffs.to_vec(), amps, deficit: 0.0 })
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn n_modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amp(&self, idx: &[usize]) -> C64 {
        let st = strides(&self.cutoffs);
        self.amps[idx.iter().zip(&st).map(|(i, s)| i * s).sum::<usize>()]
    }

    /// Probability mass lost to truncation so far.
    pub fn deficit(&self) -> f64 {
        self.deficit
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Same state re-embedded with different cutoffs (zero-padded or truncated).
    /// Truncated mass is added to the deficit.
    pub fn with_cutoffs(&self, cutoffs: &[usize]) -> Result<FockState> {
        if cutoffs.len() != self.cutoffs.len() {
            return Err(Error::SizeMismatch("cutoff count".into()));
        }
        let size = check_size(cutoffs)?;
        let st = strides(cutoffs);
        let mut amps = vec![C64::new(0.0, 0.0); size];
        let mut idx = vec![0; cutoffs.len()];
        let mut lost = 0.0;
        for (flat, a) in self.amps.iter().enumerate() {
            unravel(flat, &self.cutoffs, &mut idx);
            if idx.iter().zip(cutoffs).all(|(i, c)| i < c) {
                amps[idx.iter().zip(&st).map(|(i, s)| i * s).sum::<usize>()] = *a;
            } else {
                lost += a.norm_sqr();
            }
        }
        Ok(FockState { cutoffs: cutoffs.to_vec(), amps, deficit: self.deficit + lost })
    }

    /// a_j |ψ⟩ as an (unnormalized) amplitude vector on the same grid.
    fn lowered(&self, j: usize) -> Vec<C64> {
        let st = strides(&self.cutoffs);
        let mut out = vec![C64::new(0.0, 0.0); self.amps.len()];
        let mut idx = vec![0; self.cutoffs.len()];
        for (flat, a) in self.amps.iter().enumerate() {
            unravel(flat, &self.cutoffs, &mut idx);
            if idx[j] > 0 {
                out[flat - st[j]] += a * (idx[j] as f64).sqrt();
            }
        }
        out
    }

    /// Normal parameters from Fock expectation values ⟨a†a⟩, ⟨a²⟩, ⟨a_ja_k⟩, ⟨a_j†a_k⟩.
    pub fn expected_params(&self) -> gaussian::NormalParams {
        let n = self.n_modes();
        let inner = |u: &[C64], v: &[C64]| -> C64 { u.iter().zip(v).map(|(a, b)| a.conj() * b).sum() };
        let low: Vec<Vec<C64>> = (0..n).map(|j| self.lowered(j)).collect();
        let mut p = gaussian::NormalParams::vacuum(n);
        for j in 0..n {
            p.b[j] = inner(&low[j], &low[j]).re;
            // ⟨a_j a_j⟩ = ⟨ψ| a_j (a_j ψ)⟩
            let lj = FockState { cutoffs: self.cutoffs.clone(), amps: low[j].clone(), deficit: 0.0 };
            p.c[j] = inner(&self.amps, &lj.lowered(j));
        }
        for (j, k) in gaussian::pairs(n) {
            let lk = FockState { cutoffs: self.cutoffs.clone(), amps: low[k].clone(), deficit: 0.0 };
            let d = inner(&self.amps, &lk.lowered(j));
            let adag_a = inner(&low[j], &low[k]);
            p.set_pair(j, k, d, -adag_a);
        }
        p
    }
}

/// (1/cosh r) Σ_{n<cutoff} e^{inψ} tanhⁿ r |n, n⟩.
pub fn tmsv_fock(r: f64, psi: f64, cutoff: usize) -> Result<FockState> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::InvalidArgument(format!("r must be finite and >= 0, got {r}")));
    }
    let mut s = FockState::vacuum(&[cutoff, cutoff])?;
    s.amps[0] = C64::new(0.0, 0.0);
    let t = r.tanh();
    for n in 0..cutoff {
        s.amps[n * cutoff + n] = C64::from_polar(t.powi(n as i32) / r.cosh(), n as f64 * psi);
    }
    s.deficit = t.powi(2 * cutoff as i32);
    Ok(s)
}

/// Fock-space ladder (n_i, n_j) for the block with fixed n_i − n_j = δ.
fn block_levels(delta: isize, ci: usize, cj: usize) -> Vec<(usize, usize)> {
    let oi = delta.max(0) as usize;
    let oj = (-delta).max(0) as usize;
    let len = ci.saturating_sub(oi).min(cj.saturating_sub(oj));
    (0..len).map(|m| (m + oi, m + oj)).collect()
}

/// exp(ξ a_i†a_j† − ξ* a_i a_j) restricted to one δ-block.
fn block_unitary(levels: &[(usize, usize)], xi: C64) -> DMatrix<C64> {
    let l = levels.len();
    let mut g = DMatrix::from_element(l, l, C64::new(0.0, 0.0));
    for m in 0..l.saturating_sub(1) {
        let (ni, nj) = levels[m];
        let amp = (((ni + 1) * (nj + 1)) as f64).sqrt();
        g[(m + 1, m)] = xi * amp;
        g[(m, m + 1)] = -xi.conj() * amp;
    }
    g.exp()
}

/// Applies `S(ξ) = exp(ξ a_i†a_j† − ξ* a_i a_j)` to modes (i, j).
///
/// The generator conserves n_i − n_j, so the exponential is taken per block of
/// that difference. Evolution runs on cutoffs enlarged by `policy.margin`; mass
/// that ends above the original cutoffs is added to the deficit.
pub fn apply_two_mode_squeezer(s: &FockState, modes: (usize, usize), xi: C64, policy: CutoffPolicy) -> Result<FockState> {
    let (i, j) = modes;
    let n = s.n_modes();
    if i == j || i >= n || j >= n {
        return Err(Error::InvalidArgument(format!("bad mode pair ({i}, {j})")));
    }
    if xi == C64::new(0.0, 0.0) {
        return Ok(s.clone());
    }
    let mut big = s.cutoffs.clone();
    big[i] += policy.margin;
    big[j] += policy.margin;
    let mut work = s.with_cutoffs(&big)?;
    let st = strides(&big);
    let (ci, cj) = (big[i], big[j]);
    // spectator multi-indices: all flat offsets with idx[i] = idx[j] = 0
    let mut spect = Vec::new();
    let mut idx = vec![0; n];
    for flat in 0..work.amps.len() {
        unravel(flat, &big, &mut idx);
        if idx[i] == 0 && idx[j] == 0 {
            spect.push(flat);
        }
    }
    let deltas: Vec<isize> = (-(cj as isize - 1)..=(ci as isize - 1)).collect();
    let blocks: Vec<(Vec<(usize, usize)>, DMatrix<C64>)> = deltas
        .par_iter()
        .map(|&d| {
            let lv = block_levels(d, ci, cj);
            let u = block_unitary(&lv, xi);
            (lv, u)
        })
        .collect();
    for (lv, u) in &blocks {
        for &base in &spect {
            let pos: Vec<usize> = lv.iter().map(|&(a, b)| base + a * st[i] + b * st[j]).collect();
            let v = na::DVector::from_iterator(pos.len(), pos.iter().map(|&p| work.amps[p]));
            if v.iter().all(|a| a.norm_sqr() == 0.0) {
                continue;
            }
            let w = u * v;
            for (p, a) in pos.iter().zip(w.iter()) {
                work.amps[*p] = *a;
            }
        }
    }
    let out = work.with_cutoffs(&s.cutoffs)?;
    if out.deficit > policy.tol {
        return Err(Error::Truncation { deficit: out.deficit, tol: policy.tol });
    }
    Ok(out)
}

/// Cascaded squeezers on (a₁, a₂, b): S₂ on (a₂, b) after S₁ on (a₁, b).
pub fn tmgs_fock(r1: f64, r2: f64, psi1: f64, psi2: f64, cutoff: usize, policy: CutoffPolicy) -> Result<FockState> {
    for r in [r1, r2] {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::InvalidArgument(format!("r must be finite and >= 0, got {r}")));
        }
    }
    let s = FockState::vacuum(&[cutoff; 3])?;
    let s = apply_two_mode_squeezer(&s, (0, 2), C64::from_polar(r1, psi1), policy)?;
    apply_two_mode_squeezer(&s, (1, 2), C64::from_polar(r2, psi2), policy)
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointPhotonDist {
    cutoffs: Vec<usize>,
    probs: Vec<f64>,
}

impl JointPhotonDist {
    /// Row-major probabilities (last mode fastest).
    pub fn new(cutoffs: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let size = check_size(&cutoffs)?;
        if probs.len() != size {
            return Err(Error::SizeMismatch(format!("{} probabilities for {size} cells", probs.len())));
        }
        if probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::InvalidArgument("probabilities must be >= 0".into()));
        }
        let total: f64 = probs.iter().sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::Unnormalized(total));
        }
        Ok(JointPhotonDist { cutoffs, probs })
    }

    pub fn n_modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Mass missing from 1.
    pub fn deficit(&self) -> f64 {
        (1.0 - self.total()).max(0.0)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        if idx.len() != self.cutoffs.len() || idx.iter().zip(&self.cutoffs).any(|(i, c)| i >= c) {
            return 0.0;
        }
        let st = strides(&self.cutoffs);
        self.probs[idx.iter().zip(&st).map(|(i, s)| i * s).sum::<usize>()]
    }

    /// (index tuple, probability) over all cells.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.probs.iter().enumerate().map(move |(flat, &p)| {
            let mut idx = vec![0; self.cutoffs.len()];
            unravel(flat, &self.cutoffs, &mut idx);
            (idx, p)
        })
    }

    pub fn marginal(&self, modes: &[usize]) -> Result<JointPhotonDist> {
        if modes.iter().any(|&m| m >= self.n_modes()) {
            return Err(Error::InvalidArgument(format!("modes {modes:?} out of range")));
        }
        let cut: Vec<usize> = modes.iter().map(|&m| self.cutoffs[m]).collect();
        let st = strides(&cut);
        let mut probs = vec![0.0; check_size(&cut)?];
        for (idx, p) in self.iter() {
            probs[modes.iter().zip(&st).map(|(&m, s)| idx[m] * s).sum::<usize>()] += p;
        }
        Ok(JointPhotonDist { cutoffs: cut, probs })
    }

    /// Rescaled to unit total.
    pub fn normalized(&self) -> Result<JointPhotonDist> {
        let t = self.total();
        if !(t > 0.0) {
            return Err(Error::Unnormalized(t));
        }
        Ok(JointPhotonDist { cutoffs: self.cutoffs.clone(), probs: self.probs.iter().map(|p| p / t).collect() })
    }

    /// Restriction to n_j < cutoffs_j (no renormalization).
    pub fn truncated(&self, cutoffs: &[usize]) -> Result<JointPhotonDist> {
        let cut: Vec<usize> = cutoffs.iter().zip(&self.cutoffs).map(|(&a, &b)| a.min(b)).collect();
        let st = strides(&cut);
        let mut probs = vec![0.0; check_size(&cut)?];
        for (idx, p) in self.iter() {
            if idx.iter().zip(&cut).all(|(i, c)| i < c) {
                probs[idx.iter().zip(&st).map(|(i, s)| i * s).sum::<usize>()] = p;
            }
        }
        Ok(JointPhotonDist { cutoffs: cut, probs })
    }

    /// Distribution of the mode-wise sum of two independent count vectors,
    /// truncated to `cutoffs`.
    pub fn convolve(&self, other: &JointPhotonDist, cutoffs: &[usize]) -> Result<JointPhotonDist> {
        if self.n_modes() != other.n_modes() || cutoffs.len() != self.n_modes() {
            return Err(Error::SizeMismatch("mode count".into()));
        }
        let st = strides(cutoffs);
        let mut probs = vec![0.0; check_size(cutoffs)?];
        let a: Vec<(Vec<usize>, f64)> = self.iter().filter(|x| x.1 > 0.0).collect();
        let b: Vec<(Vec<usize>, f64)> = other.iter().filter(|x| x.1 > 0.0).collect();
        for (ia, pa) in &a {
            for (ib, pb) in &b {
                let mut flat = 0;
                let mut inside = true;
                for j in 0..cutoffs.len() {
                    let n = ia[j] + ib[j];
                    if n >= cutoffs[j] {
                        inside = false;
                        break;
                    }
                    flat += n * st[j];
                }
                if inside {
                    probs[flat] += pa * pb;
                }
            }
        }
        Ok(JointPhotonDist { cutoffs: cutoffs.to_vec(), probs })
    }
}

pub fn joint_distribution(s: &FockState) -> JointPhotonDist {
    JointPhotonDist { cutoffs: s.cutoffs.clone(), probs: s.amps.iter().map(|a| a.norm_sqr()).collect() }
}

/// Detected photon-number distribution of a supermode mixture: each supermode is
/// built explicitly and the per-mode counts of independent supermodes are summed.
pub fn mixture_distribution(
    spec: &SupermodeSpec,
    kind: StateKind,
    r2: Option<f64>,
    cutoff: usize,
    policy: CutoffPolicy,
) -> Result<JointPhotonDist> {
    let r1k = gaussian::supermode_amplitudes(spec)?;
    let r2k = match (kind, r2) {
        (StateKind::Tmgs, Some(r2)) => gaussian::supermode_amplitudes(&SupermodeSpec { r: r2, ..*spec })?,
        (StateKind::Tmgs, None) => return Err(Error::InvalidArgument("TMGS mixture needs r2".into())),
        (StateKind::Tmsv, _) => vec![0.0; spec.k],
    };
    let n = match kind {
        StateKind::Tmsv => 2,
        StateKind::Tmgs => 3,
    };
    let cut = vec![cutoff; n];
    check_size(&cut)?;
    let parts: Result<Vec<JointPhotonDist>> = r1k
        .par_iter()
        .zip(&r2k)
        .map(|(&a, &b)| {
            let st = match kind {
                StateKind::Tmsv => tmsv_fock(a, 0.0, cutoff)?,
                StateKind::Tmgs => tmgs_fock(a, b, 0.0, 0.0, cutoff, CutoffPolicy { tol: 1.0, ..policy })?,
            };
            Ok(joint_distribution(&st))
        })
        .collect();
    let mut parts = parts?.into_iter();
    let mut acc = parts.next().expect("at least one supermode");
    for p in parts {
        acc = acc.convolve(&p, &cut)?;
    }
    if acc.deficit() > policy.tol {
        return Err(Error::Truncation { deficit: acc.deficit(), tol: policy.tol });
    }
    Ok(acc)
}

/// Γ = [[N, M], [M*, N*]] with N_jk = ⟨a_k† a_j⟩, M_jk = ⟨a_j a_k⟩.
fn gamma_matrix(p: &gaussian::NormalParams) -> DMatrix<C64> {
    let n = p.n_modes();
    let mut g = DMatrix::from_element(2 * n, 2 * n, C64::new(0.0, 0.0));
    for j in 0..n {
        for k in 0..n {
            let (nn, mm) = if j == k {
                (C64::new(p.b[j], 0.0), p.c[j])
            } else {
                (-p.dbar(k, j), p.d(j, k))
            };
            g[(j, k)] = nn;
            g[(j, n + k)] = mm;
            g[(n + j, k)] = mm.conj();
            g[(n + j, n + k)] = nn.conj();
        }
    }
    g
}

/// Photon-number distribution of a zero-mean Gaussian state, n_j < cutoff.
///
/// Uses the generating function G(z) = Σ P(n) zⁿ = det(I + (I − Z)Γ)^{-1/2},
/// Z = diag(z, z). The determinant is a polynomial p(z) of degree ≤ 2 in each
/// z_j; its coefficients are read off from values at z_j ∈ {−1, 0, 1}. The
/// coefficients of G = p^{−1/2} follow from p·E[G] = −½ G·E[p], E = Σ z_j ∂_j.
pub fn gaussian_photon_distribution(s: &CovMatrix, cutoff: usize) -> Result<JointPhotonDist> {
    let n = s.n_modes();
    let cut = vec![cutoff; n];
    let size = check_size(&cut)?;
    let gamma = gamma_matrix(&gaussian::normal_params_from_cov(s));
    let id = DMatrix::<C64>::identity(2 * n, 2 * n);
    let grid = [-1.0, 0.0, 1.0];
    let npts = 3usize.pow(n as u32);
    let mut vals = vec![0.0; npts];
    let mut zi = vec![0; n];
    for (pt, v) in vals.iter_mut().enumerate() {
        unravel(pt, &vec![3; n], &mut zi);
        let mut w = id.clone();
        for row in 0..2 * n {
            let f = 1.0 - grid[zi[row % n]];
            for col in 0..2 * n {
                w[(row, col)] += gamma[(row, col)] * f;
            }
        }
        *v = w.determinant().re;
    }
    // Per-axis conversion from values at {−1, 0, 1} to monomial coefficients.
    let three = vec![3; n];
    let st3 = strides(&three);
    for ax in 0..n {
        let mut next = vals.clone();
        for pt in 0..npts {
            unravel(pt, &three, &mut zi);
            if zi[ax] != 0 {
                continue;
            }
            let (fm, f0, fp) = (vals[pt], vals[pt + st3[ax]], vals[pt + 2 * st3[ax]]);
            next[pt] = f0;
            next[pt + st3[ax]] = (fp - fm) / 2.0;
            next[pt + 2 * st3[ax]] = (fp + fm) / 2.0 - f0;
        }
        vals = next;
    }
    let coeffs: Vec<(Vec<usize>, usize, f64)> = (0..npts)
        .filter_map(|pt| {
            let mut m = vec![0; n];
            unravel(pt, &three, &mut m);
            let deg = m.iter().sum();
            (pt != 0 && vals[pt].abs() > 0.0).then(|| (m, deg, vals[pt]))
        })
        .collect();
    let p0 = vals[0];
    if !(p0 > 0.0) {
        return Err(Error::InconsistentStatistics(format!("generating polynomial p(0) = {p0}")));
    }
    let st = strides(&cut);
    let mut g = vec![0.0; size];
    g[0] = p0.powf(-0.5);
    let mut idx = vec![0; n];
    for flat in 1..size {
        unravel(flat, &cut, &mut idx);
        let tot: usize = idx.iter().sum();
        let mut acc = 0.0;
        for (m, deg, pm) in &coeffs {
            if m.iter().zip(&idx).any(|(a, b)| a > b) {
                continue;
            }
            let off: usize = m.iter().zip(&st).map(|(a, s)| a * s).sum();
            acc += pm * g[flat - off] * (-0.5 * *deg as f64 - (tot - deg) as f64);
        }
        g[flat] = (acc / (p0 * tot as f64)).max(0.0);
    }
    JointPhotonDist::new(cut, g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tmsv_closed_form() {
        let s = tmsv_fock(0.5, 0.0, 40).unwrap();
        assert!(s.deficit() < 1e-12);
        assert!((s.norm_sqr() + s.deficit() - 1.0).abs() < 1e-14);
        let d = joint_distribution(&s);
        let mean: f64 = d.iter().map(|(i, p)| i[0] as f64 * p).sum();
        assert!((mean - 0.5f64.sinh().powi(2)).abs() < 1e-12);
        let v = tmsv_fock(0.0, 0.0, 5).unwrap();
        assert_eq!(v.amp(&[0, 0]), C64::new(1.0, 0.0));
    }

    #[test]
    fn squeezer_matches_closed_form() {
        let v = FockState::vacuum(&[40, 40]).unwrap();
        for psi in [0.0, 0.9] {
            let s = apply_two_mode_squeezer(&v, (0, 1), C64::from_polar(0.5, psi), CutoffPolicy::default()).unwrap();
            let t = tmsv_fock(0.5, psi, 40).unwrap();
            let err = s.amps.iter().zip(&t.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-10, "err {err}");
        }
        let same = apply_two_mode_squeezer(&v, (0, 1), C64::new(0.0, 0.0), CutoffPolicy::default()).unwrap();
        assert_eq!(same, v);
    }

    #[test]
    fn fock_params_match_covariance() {
        let s = tmsv_fock(0.5, 0.3, 40).unwrap();
        let p = s.expected_params();
        let q = gaussian::normal_params_from_cov(&gaussian::tmsv_covariance(0.5, 0.3).unwrap());
        assert!((p.b[0] - q.b[0]).abs() < 1e-10 && (p.d[0] - q.d[0]).norm() < 1e-10);
        assert!(p.dbar[0].norm() < 1e-12 && p.c[0].norm() < 1e-12);
    }

    #[test]
    fn thermal_generating_function() {
        let mut p = gaussian::NormalParams::vacuum(1);
        p.b[0] = 0.6;
        let d = gaussian_photon_distribution(&gaussian::cov_from_normal_params(&p).unwrap(), 30).unwrap();
        let q: f64 = 0.6 / 1.6;
        for n in 0..30 {
            assert!((d.get(&[n]) - q.powi(n as i32) / 1.6).abs() < 1e-14);
        }
    }

    #[test]
    fn convolution_and_marginals() {
        let a = JointPhotonDist::new(vec![3], vec![0.5, 0.5, 0.0]).unwrap();
        let c = a.convolve(&a, &[5]).unwrap();
        assert_eq!(c.probs(), &[0.25, 0.5, 0.25, 0.0, 0.0]);
        let t = joint_distribution(&tmsv_fock(0.3, 0.0, 10).unwrap());
        let m = t.marginal(&[1]).unwrap();
        assert!((m.get(&[0]) - 1.0 / 0.3f64.cosh().powi(2)).abs() < 1e-14);
        assert!(JointPhotonDist::new(vec![2], vec![0.7, 0.7]).is_err());
    }
}
