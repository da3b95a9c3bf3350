//! Random physical Gaussian states for property checks and the verify report.

use crate::error::Result;
use crate::gaussian::{self, CovMatrix};
use na::DMatrix;
use nalgebra as na;
use rand::Rng;
use std::f64::consts::PI;

/// σ = S diag(ν) Sᵀ with ν ≥ 1 thermal excess and S a random product of
/// beam splitters, two-mode and single-mode squeezers and phase shifts.
pub fn random_state<R: Rng + ?Sized>(n_modes: usize, max_r: f64, rng: &mut R) -> Result<CovMatrix> {
    let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
    for _ in 0..2 * n_modes {
        let ph: Vec<f64> = (0..n_modes).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        s = gaussian::phase_rotation(&ph) * s;
        let i = rng.random_range(0..n_modes);
        s = gaussian::single_mode_squeezer(n_modes, i, rng.random_range(-max_r..max_r) * 0.5) * s;
        if n_modes > 1 {
            let i = rng.random_range(0..n_modes);
            let mut j = rng.random_range(0..n_modes - 1);
            if j >= i {
                j += 1;
            }
            s = gaussian::two_mode_squeezer(n_modes, i, j, rng.random_range(0.0..max_r), rng.random_range(0.0..2.0 * PI))? * s;
            s = gaussian::beam_splitter(n_modes, i, j, rng.random_range(0.0..PI)) * s;
        }
    }
    let mut nu = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for j in 0..n_modes {
        let v = if rng.random_bool(0.5) { 1.0 } else { 1.0 + rng.random_range(0.0..1.0) };
        nu[(2 * j, 2 * j)] = v;
        nu[(2 * j + 1, 2 * j + 1)] = v;
    }
    CovMatrix::new(&s * nu * s.transpose())
}

/// Cascaded three-mode state with random amplitudes and phases.
pub fn random_tmgs<R: Rng + ?Sized>(max_r: f64, rng: &mut R) -> Result<CovMatrix> {
    gaussian::tmgs_covariance(
        rng.random_range(0.0..max_r),
        rng.random_range(0.0..max_r),
        rng.random_range(0.0..2.0 * PI),
        rng.random_range(0.0..2.0 * PI),
    )
}
