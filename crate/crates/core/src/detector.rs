//! Spatially multiplexed pseudo-photon-number-resolving detector: uniform 1/N
//! splitting into N threshold detectors, per-photon survival η, no dark counts.

use crate::error::{Error, Result};
use crate::fock::JointPhotonDist;
use na::DMatrix;
use nalgebra as na;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const MAX_CONDITION: f64 = 1e8;
const SHARD: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    pub channels: usize,
    pub efficiency: f64,
}

impl DetectorModel {
    pub fn new(channels: usize, efficiency: f64) -> Result<Self> {
        if channels == 0 {
            return Err(Error::InvalidArgument("detector needs at least one channel".into()));
        }
        if !(0.0..=1.0).contains(&efficiency) {
            return Err(Error::InvalidArgument(format!("efficiency must lie in [0, 1], got {efficiency}")));
        }
        Ok(DetectorModel { channels, efficiency })
    }

    /// 32 channels at 82 % total efficiency.
    pub fn reference() -> Self {
        DetectorModel { channels: 32, efficiency: 0.82 }
    }
}

/// P(k | n) for k = 0..=N (rows) and n = 0..=max_n (columns).
///
/// Built photon by photon: an arriving photon is lost (1 − η), lands in an
/// already-fired channel (η k/N), or fires a new one (η (N − k)/N). This is the
/// occupancy form of C(N,k) Σ_j (−1)^j C(k,j) ((1−η) + η(k−j)/N)^n, which loses
/// digits to cancellation for large N.
pub fn click_prob_matrix(d: &DetectorModel, max_n: usize) -> DMatrix<f64> {
    let nch = d.channels;
    let eta = d.efficiency;
    let mut m = DMatrix::zeros(nch + 1, max_n + 1);
    let mut col = vec![0.0; nch + 1];
    col[0] = 1.0;
    for n in 0..=max_n {
        for k in 0..=nch {
            m[(k, n)] = col[k];
        }
        let mut next = vec![0.0; nch + 1];
        for k in 0..=nch {
            next[k] += col[k] * ((1.0 - eta) + eta * k as f64 / nch as f64);
            if k < nch {
                next[k + 1] += col[k] * eta * (nch - k) as f64 / nch as f64;
            }
        }
        col = next;
    }
    m
}

/// Direct alternating-sum evaluation of P(k | n); numerically fragile for large N.
pub fn click_prob_alternating(d: &DetectorModel, k: usize, n: usize) -> f64 {
    use crate::moments::binom;
    let nch = d.channels;
    if k > nch {
        return 0.0;
    }
    let mut s = 0.0;
    for j in 0..=k {
        let base = (1.0 - d.efficiency) + d.efficiency * (k - j) as f64 / nch as f64;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * binom(k as u32, j as u32) * base.powi(n as i32);
    }
    binom(nch as u32, k as u32) * s
}

/// Joint distribution over click tuples (k₁, …); `channels[j] + 1` outcomes per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ClickDist {
    channels: Vec<usize>,
    probs: Vec<f64>,
}

fn dims_of(channels: &[usize]) -> Vec<usize> {
    channels.iter().map(|c| c + 1).collect()
}

/// Contracts axis `axis` of a row-major tensor with `m` (new_len × old_len).
fn mode_product(t: &[f64], dims: &[usize], axis: usize, m: &DMatrix<f64>) -> (Vec<f64>, Vec<usize>) {
    let outer: usize = dims[..axis].iter().product();
    let inner: usize = dims[axis + 1..].iter().product();
    let (old, new) = (dims[axis], m.nrows());
    debug_assert_eq!(m.ncols(), old);
    let mut out = vec![0.0; outer * new * inner];
    for o in 0..outer {
        for a in 0..old {
            for i in 0..inner {
                let v = t[(o * old + a) * inner + i];
                if v == 0.0 {
                    continue;
                }
                for b in 0..new {
                    out[(o * new + b) * inner + i] += m[(b, a)] * v;
                }
            }
        }
    }
    let mut nd = dims.to_vec();
    nd[axis] = new;
    (out, nd)
}

impl ClickDist {
    pub fn new(channels: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let size: usize = dims_of(&channels).iter().product();
        if probs.len() != size {
            return Err(Error::SizeMismatch(format!("{} probabilities for {size} outcomes", probs.len())));
        }
        Ok(ClickDist { channels, probs })
    }

    pub fn channels(&self) -> &[usize] {
        &self.channels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn get(&self, k: &[usize]) -> f64 {
        let dims = dims_of(&self.channels);
        if k.len() != dims.len() || k.iter().zip(&dims).any(|(a, b)| a >= b) {
            return 0.0;
        }
        let flat = k.iter().zip(&dims).fold(0, |acc, (a, d)| acc * d + a);
        self.probs[flat]
    }

    pub fn total_variation(&self, other: &ClickDist) -> Result<f64> {
        if self.channels != other.channels {
            return Err(Error::SizeMismatch("click spaces differ".into()));
        }
        Ok(0.5 * self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).sum::<f64>())
    }

    /// Clicks read directly as photon numbers (no inversion).
    pub fn as_photon_dist(&self) -> Result<JointPhotonDist> {
        JointPhotonDist::new(dims_of(&self.channels), self.probs.iter().map(|p| p.max(0.0)).collect())
    }
}

fn check_models(n_modes: usize, models: &[DetectorModel]) -> Result<()> {
    if models.len() != n_modes {
        return Err(Error::SizeMismatch(format!("{} detector models for {n_modes} modes", models.len())));
    }
    for m in models {
        DetectorModel::new(m.channels, m.efficiency)?;
    }
    Ok(())
}

/// Independent per-mode detection (time-bin sharing of one device counts as
/// separate instances).
pub fn apply_detector(d: &JointPhotonDist, models: &[DetectorModel]) -> Result<ClickDist> {
    check_models(d.n_modes(), models)?;
    let mut t = d.probs().to_vec();
    let mut dims = d.cutoffs().to_vec();
    for (ax, m) in models.iter().enumerate() {
        let p = click_prob_matrix(m, dims[ax] - 1);
        (t, dims) = mode_product(&t, &dims, ax, &p);
    }
    ClickDist::new(models.iter().map(|m| m.channels).collect(), t)
}

/// Photon-number estimate recovered from clicks.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonEstimate {
    pub dist: JointPhotonDist,
    /// Total-variation distance between the observed clicks and the clicks
    /// predicted by the estimate.
    pub residual: f64,
    /// Largest per-mode condition number of the truncated response matrix.
    pub condition: f64,
}

/// Inverts clicks to photon numbers n_j ≤ `n_max`.
///
/// The response tensor is a Kronecker product of per-mode matrices, so the
/// least-squares problem separates: each axis is multiplied by the Tikhonov
/// pseudo-inverse V diag(s/(s²+λ)) Uᵀ with λ = (1e-12 s_max)². Negative entries
/// are then zeroed and the result renormalized.
pub fn estimate_photon_dist(c: &ClickDist, models: &[DetectorModel], n_max: usize) -> Result<PhotonEstimate> {
    check_models(c.channels.len(), models)?;
    for m in models {
        if n_max > m.channels {
            return Err(Error::InvalidArgument(format!(
                "photon-number cutoff {n_max} exceeds channel count {}",
                m.channels
            )));
        }
    }
    let mut t = c.probs.clone();
    let mut dims = dims_of(&c.channels);
    let mut condition: f64 = 1.0;
    let mut fwd = Vec::new();
    for (ax, m) in models.iter().enumerate() {
        let a = click_prob_matrix(m, n_max);
        let svd = a.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        condition = condition.max(cond);
        if cond > MAX_CONDITION {
            return Err(Error::IllConditioned(cond));
        }
        let lam = (1e-12 * smax).powi(2);
        let u = svd.u.as_ref().ok_or(Error::NonConvergent)?;
        let vt = svd.v_t.as_ref().ok_or(Error::NonConvergent)?;
        let filt = DMatrix::from_diagonal(&svd.singular_values.map(|s| s / (s * s + lam)));
        let pinv = vt.transpose() * filt * u.transpose();
        (t, dims) = mode_product(&t, &dims, ax, &pinv);
        fwd.push(a);
    }
    for v in t.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let total: f64 = t.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InconsistentStatistics("inversion produced no probability mass".into()));
    }
    t.iter_mut().for_each(|v| *v /= total);
    let dist = JointPhotonDist::new(dims.clone(), t.clone())
        .or_else(|_| JointPhotonDist::new(dims.clone(), t.iter().map(|v| v / (1.0 + 1e-12)).collect()))?;
    let mut pred = t;
    let mut pd = dims;
    for (ax, a) in fwd.iter().enumerate() {
        (pred, pd) = mode_product(&pred, &pd, ax, a);
    }
    let residual = 0.5 * pred.iter().zip(&c.probs).map(|(a, b)| (a - b).abs()).sum::<f64>();
    Ok(PhotonEstimate { dist, residual, condition })
}

/// Draws `shots` i.i.d. click tuples through the exact forward model and
/// returns their empirical frequencies.
///
/// Photon tuples are drawn from the distribution conditioned on lying inside
/// its cutoffs. Shots are split into fixed shards of 2¹⁶, each with its own
/// ChaCha stream, so the result is reproducible and independent of thread count.
pub fn sample_clicks(d: &JointPhotonDist, models: &[DetectorModel], shots: u64, seed: u64) -> Result<ClickDist> {
    check_models(d.n_modes(), models)?;
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be >= 1".into()));
    }
    let total = d.total();
    if !(total > 0.0) {
        return Err(Error::Unnormalized(total));
    }
    let mut cdf = Vec::with_capacity(d.probs().len());
    let mut acc = 0.0;
    for p in d.probs() {
        acc += p / total;
        cdf.push(acc);
    }
    let n = d.n_modes();
    let cut = d.cutoffs().to_vec();
    let click_cdfs: Vec<Vec<Vec<f64>>> = models
        .iter()
        .zip(&cut)
        .map(|(m, &c)| {
            let p = click_prob_matrix(m, c - 1);
            (0..c)
                .map(|col| {
                    let mut a = 0.0;
                    (0..p.nrows()).map(|k| {
                        a += p[(k, col)];
                        a
                    }).collect()
                })
                .collect()
        })
        .collect();
    let chans: Vec<usize> = models.iter().map(|m| m.channels).collect();
    let dims = dims_of(&chans);
    let size: usize = dims.iter().product();
    let shards = shots.div_ceil(SHARD);
    let counts = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s);
            let here = SHARD.min(shots - s * SHARD);
            let mut h = vec![0u64; size];
            let mut idx = vec![0usize; n];
            for _ in 0..here {
                let u: f64 = rng.random();
                let mut flat = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
                for j in (0..n).rev() {
                    idx[j] = flat % cut[j];
                    flat /= cut[j];
                }
                let mut out = 0;
                for j in 0..n {
                    let v: f64 = rng.random();
                    let col = &click_cdfs[j][idx[j]];
                    let k = col.partition_point(|&c| c <= v).min(col.len() - 1);
                    out = out * dims[j] + k;
                }
                h[out] += 1;
            }
            h
        })
        .reduce(
            || vec![0u64; size],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    ClickDist::new(chans, counts.iter().map(|&c| c as f64 / shots as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_entries() {
        let p = click_prob_matrix(&DetectorModel::reference(), 5);
        assert!((p[(0, 1)] - 0.18).abs() < 1e-15);
        assert!((p[(1, 1)] - 0.82).abs() < 1e-15);
        assert_eq!(p[(0, 0)], 1.0);
        for k in 1..=32 {
            assert_eq!(p[(k, 0)], 0.0);
        }
        assert!((p[(0, 5)] - 0.18f64.powi(5)).abs() < 1e-15);
    }

    #[test]
    fn dp_matches_alternating_sum_small_n() {
        let d = DetectorModel::new(4, 0.7).unwrap();
        let p = click_prob_matrix(&d, 8);
        for n in 0..=8 {
            for k in 0..=4 {
                assert!((p[(k, n)] - click_prob_alternating(&d, k, n)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn vacuum_clicks() {
        let v = JointPhotonDist::new(vec![3, 3], vec![1.0, 0., 0., 0., 0., 0., 0., 0., 0.]).unwrap();
        let m = [DetectorModel::reference(); 2];
        let c = apply_detector(&v, &m).unwrap();
        assert_eq!(c.get(&[0, 0]), 1.0);
        let s = sample_clicks(&v, &m, 1000, 3).unwrap();
        assert_eq!(s.get(&[0, 0]), 1.0);
        assert!(estimate_photon_dist(&c, &m, 40).is_err());
    }
}
