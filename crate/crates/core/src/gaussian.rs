//! Covariance-matrix algebra for zero-mean N-mode Gaussian states.
//!
//! Conventions: quadrature order (x1, p1, ..., xN, pN), vacuum covariance = identity,
//! `a = (x + i p) / 2` so that `<{x, x}>/2 = 1 + 2<a†a> + 2 Re<a²>`.

use crate::error::{Error, Result};
use na::{DMatrix, SymmetricEigen};
use nalgebra as na;
use num_complex::Complex64 as C64;

const SYM_TOL: f64 = 1e-12;
const DISC_TOL: f64 = 1e-9;
pub const PHYSICAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    n_modes: usize,
    m: DMatrix<f64>,
}

impl CovMatrix {
    /// Wraps a matrix after checking it is square, of even size, and symmetric.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() % 2 != 0 || m.nrows() == 0 {
            return Err(Error::SizeMismatch(format!(
                "covariance must be 2n x 2n, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let scale = m.amax().max(1.0);
        let asym = (&m - m.transpose()).amax();
        if asym > SYM_TOL * scale {
            return Err(Error::NotSymmetric(asym));
        }
        // Symmetrize exactly so downstream eigen-solvers see a symmetric input.
        let m = (&m + m.transpose()) * 0.5;
        Ok(CovMatrix { n_modes: m.nrows() / 2, m })
    }

    pub fn vacuum(n_modes: usize) -> Self {
        CovMatrix { n_modes, m: DMatrix::identity(2 * n_modes, 2 * n_modes) }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    /// 2x2 block (j, k); `block(j, j)` is the local matrix, `block(j, k)` the correlation block.
    pub fn block(&self, j: usize, k: usize) -> na::Matrix2<f64> {
        self.m.fixed_view::<2, 2>(2 * j, 2 * k).into_owned()
    }

    pub fn det(&self) -> f64 {
        self.m.clone().determinant()
    }

    /// `S σ Sᵀ`.
    pub fn transform(&self, s: &DMatrix<f64>) -> Result<CovMatrix> {
        if s.nrows() != self.m.nrows() || s.ncols() != self.m.ncols() {
            return Err(Error::SizeMismatch("transform dimension".into()));
        }
        CovMatrix::new(s * &self.m * s.transpose())
    }

    /// Physicality (σ + iΩ ⪰ 0), tested through the symplectic spectrum.
    pub fn is_physical(&self) -> bool {
        match symplectic_eigenvalues(self) {
            Ok(nu) => nu.iter().all(|&v| v >= 1.0 - PHYSICAL_TOL),
            Err(_) => false,
        }
    }
}

/// Normal-ordered characteristic-function parameters.
///
/// Pair quantities are stored for `j < k` in lexicographic order, see [`pair_index`].
/// `d(j, k) = <a_j a_k>` is symmetric; `dbar(j, k) = -<a_j† a_k>` satisfies
/// `dbar(k, j) = conj(dbar(j, k))`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalParams {
    pub b: Vec<f64>,
    pub c: Vec<C64>,
    pub d: Vec<C64>,
    pub dbar: Vec<C64>,
}

pub fn n_pairs(n_modes: usize) -> usize {
    n_modes * n_modes.saturating_sub(1) / 2
}

/// Index of the unordered pair {j, k} (j != k) in lexicographic order.
pub fn pair_index(n_modes: usize, j: usize, k: usize) -> usize {
    let (j, k) = if j < k { (j, k) } else { (k, j) };
    debug_assert!(j != k && k < n_modes);
    j * (2 * n_modes - j - 1) / 2 + (k - j - 1)
}

/// All pairs (j, k) with j < k, in storage order.
pub fn pairs(n_modes: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n_pairs(n_modes));
    for j in 0..n_modes {
        for k in j + 1..n_modes {
            out.push((j, k));
        }
    }
    out
}

impl NormalParams {
    pub fn vacuum(n_modes: usize) -> Self {
        let np = n_pairs(n_modes);
        NormalParams {
            b: vec![0.0; n_modes],
            c: vec![C64::new(0.0, 0.0); n_modes],
            d: vec![C64::new(0.0, 0.0); np],
            dbar: vec![C64::new(0.0, 0.0); np],
        }
    }

    pub fn n_modes(&self) -> usize {
        self.b.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.b.len();
        if n == 0 || self.c.len() != n || self.d.len() != n_pairs(n) || self.dbar.len() != n_pairs(n) {
            return Err(Error::SizeMismatch(format!(
                "B:{} C:{} D:{} Dbar:{}",
                self.b.len(),
                self.c.len(),
                self.d.len(),
                self.dbar.len()
            )));
        }
        Ok(())
    }

    /// `<a_j a_k>` for j != k.
    pub fn d(&self, j: usize, k: usize) -> C64 {
        self.d[pair_index(self.n_modes(), j, k)]
    }

    /// `-<a_j† a_k>` for j != k.
    pub fn dbar(&self, j: usize, k: usize) -> C64 {
        let v = self.dbar[pair_index(self.n_modes(), j, k)];
        if j < k {
            v
        } else {
            v.conj()
        }
    }

    /// Sets `d(j, k)` and `dbar(j, k)` (orientation j -> k as given).
    pub fn set_pair(&mut self, j: usize, k: usize, d: C64, dbar: C64) {
        let i = pair_index(self.n_modes(), j, k);
        self.d[i] = d;
        self.dbar[i] = if j < k { dbar } else { dbar.conj() };
    }

    /// Σ_jk = |D_jk|² + |D̄_jk|².
    pub fn sigma_pair(&self, j: usize, k: usize) -> f64 {
        self.d(j, k).norm_sqr() + self.dbar(j, k).norm_sqr()
    }

    /// r_jk = |D_jk|² − |D̄_jk|².
    pub fn r_pair(&self, j: usize, k: usize) -> f64 {
        self.d(j, k).norm_sqr() - self.dbar(j, k).norm_sqr()
    }

    /// Parameters after the local phase rotation `a_j -> e^{iθ_j} a_j`.
    pub fn rotate_phases(&self, theta: &[f64]) -> Result<NormalParams> {
        self.validate()?;
        let n = self.n_modes();
        if theta.len() != n {
            return Err(Error::SizeMismatch("one phase per mode".into()));
        }
        let e = |t: f64| C64::from_polar(1.0, t);
        let mut out = self.clone();
        for j in 0..n {
            out.c[j] = self.c[j] * e(2.0 * theta[j]);
        }
        for (i, (j, k)) in pairs(n).into_iter().enumerate() {
            out.d[i] = self.d[i] * e(theta[j] + theta[k]);
            out.dbar[i] = self.dbar[i] * e(theta[k] - theta[j]);
        }
        Ok(out)
    }

    /// Parameter map induced by partial transposition of `mode` (a_m -> a_m†).
    pub fn partial_transpose(&self, mode: usize) -> Result<NormalParams> {
        self.validate()?;
        let n = self.n_modes();
        if mode >= n {
            return Err(Error::ModeOutOfRange { mode, n_modes: n });
        }
        let mut out = self.clone();
        out.c[mode] = self.c[mode].conj();
        for (i, (j, k)) in pairs(n).into_iter().enumerate() {
            if j == mode {
                out.d[i] = -self.dbar[i];
                out.dbar[i] = -self.d[i];
            } else if k == mode {
                out.d[i] = -self.dbar[i].conj();
                out.dbar[i] = -self.d[i].conj();
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymplecticForm {
    pub n_modes: usize,
}

impl SymplecticForm {
    pub fn new(n_modes: usize) -> Self {
        SymplecticForm { n_modes }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let mut om = DMatrix::zeros(2 * self.n_modes, 2 * self.n_modes);
        for j in 0..self.n_modes {
            om[(2 * j, 2 * j + 1)] = 1.0;
            om[(2 * j + 1, 2 * j)] = -1.0;
        }
        om
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupermodeSpec {
    pub r: f64,
    pub mu: f64,
    pub k: usize,
}

impl SupermodeSpec {
    pub fn new(r: f64, mu: f64, k: usize) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::InvalidArgument(format!("r must be finite and >= 0, got {r}")));
        }
        if !(0.0..1.0).contains(&mu) {
            return Err(Error::InvalidArgument(format!("mu must lie in [0, 1), got {mu}")));
        }
        if k == 0 {
            return Err(Error::InvalidArgument("at least one supermode required".into()));
        }
        Ok(SupermodeSpec { r, mu, k })
    }
}

/// Which state a supermode (or single) squeezer chain produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateKind {
    Tmsv,
    Tmgs,
}

fn check_r(r: f64) -> Result<()> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::InvalidArgument(format!("squeezing amplitude must be finite and >= 0, got {r}")));
    }
    Ok(())
}

/// Symplectic matrix of the two-mode squeezer `S(ξ) = exp(ξ a_i† a_j† − ξ* a_i a_j)`, ξ = r e^{iψ}.
///
/// Heisenberg picture: `a_i -> cosh r a_i + e^{iψ} sinh r a_j†`, hence on vacuum
/// `<a_i a_j> = e^{iψ} sinh r cosh r` and the Fock expansion is
/// `(1/cosh r) Σ e^{inψ} tanhⁿ r |n, n>`.
pub fn two_mode_squeezer(n_modes: usize, i: usize, j: usize, r: f64, psi: f64) -> Result<DMatrix<f64>> {
    check_r(r)?;
    if i == j || i >= n_modes || j >= n_modes {
        return Err(Error::InvalidArgument(format!("bad mode pair ({i}, {j})")));
    }
    let (c, s) = (r.cosh(), r.sinh());
    let (sc, ss) = (s * psi.cos(), s * psi.sin());
    let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
    let (xi, pi, xj, pj) = (2 * i, 2 * i + 1, 2 * j, 2 * j + 1);
    m[(xi, xi)] = c;
    m[(pi, pi)] = c;
    m[(xj, xj)] = c;
    m[(pj, pj)] = c;
    m[(xi, xj)] = sc;
    m[(xi, pj)] = ss;
    m[(pi, xj)] = ss;
    m[(pi, pj)] = -sc;
    m[(xj, xi)] = sc;
    m[(xj, pi)] = ss;
    m[(pj, xi)] = ss;
    m[(pj, pi)] = -sc;
    Ok(m)
}

/// Symplectic matrix of `a_j -> e^{iθ_j} a_j` on every mode.
pub fn phase_rotation(theta: &[f64]) -> DMatrix<f64> {
    let n = theta.len();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for (j, &t) in theta.iter().enumerate() {
        let (c, s) = (t.cos(), t.sin());
        m[(2 * j, 2 * j)] = c;
        m[(2 * j, 2 * j + 1)] = -s;
        m[(2 * j + 1, 2 * j)] = s;
        m[(2 * j + 1, 2 * j + 1)] = c;
    }
    m
}

/// Beam splitter `a_i -> cos t a_i + sin t a_j`, `a_j -> −sin t a_i + cos t a_j`.
pub fn beam_splitter(n_modes: usize, i: usize, j: usize, t: f64) -> DMatrix<f64> {
    let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
    let (c, s) = (t.cos(), t.sin());
    for q in 0..2 {
        let (a, b) = (2 * i + q, 2 * j + q);
        m[(a, a)] = c;
        m[(a, b)] = s;
        m[(b, a)] = -s;
        m[(b, b)] = c;
    }
    m
}

/// Single-mode squeezer `x -> e^{-r} x, p -> e^{r} p` on mode i.
pub fn single_mode_squeezer(n_modes: usize, i: usize, r: f64) -> DMatrix<f64> {
    let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
    m[(2 * i, 2 * i)] = (-r).exp();
    m[(2 * i + 1, 2 * i + 1)] = r.exp();
    m
}

pub fn tmsv_covariance(r: f64, psi: f64) -> Result<CovMatrix> {
    let m = two_mode_squeezer(2, 0, 1, r, psi)?;
    CovMatrix::new(&m * m.transpose())
}

/// Covariance of `S₂(ξ₂) S₁(ξ₁)|0,0,0>`.
///
/// Mode order is (a₁, a₂, b): the first squeezer couples idler a₁ with the signal b,
/// the second couples the new idler a₂ with b, so that `n_b = n_{a₁} + n_{a₂}`.
pub fn tmgs_covariance(r1: f64, r2: f64, psi1: f64, psi2: f64) -> Result<CovMatrix> {
    let s1 = two_mode_squeezer(3, 0, 2, r1, psi1)?;
    let s2 = two_mode_squeezer(3, 1, 2, r2, psi2)?;
    let m = s2 * s1;
    CovMatrix::new(&m * m.transpose())
}

/// Assembles σ from its local blocks σ_j and correlation blocks γ_jk.
pub fn cov_from_normal_params(p: &NormalParams) -> Result<CovMatrix> {
    p.validate()?;
    let n = p.n_modes();
    let mut m = DMatrix::identity(2 * n, 2 * n);
    for j in 0..n {
        let (b, c) = (p.b[j], p.c[j]);
        m[(2 * j, 2 * j)] = 1.0 + 2.0 * b + 2.0 * c.re;
        m[(2 * j, 2 * j + 1)] = 2.0 * c.im;
        m[(2 * j + 1, 2 * j)] = 2.0 * c.im;
        m[(2 * j + 1, 2 * j + 1)] = 1.0 + 2.0 * b - 2.0 * c.re;
    }
    for (i, (j, k)) in pairs(n).into_iter().enumerate() {
        let u = p.d[i] - p.dbar[i];
        let v = p.d[i] + p.dbar[i];
        let g = [[2.0 * u.re, 2.0 * u.im], [2.0 * v.im, -2.0 * v.re]];
        for a in 0..2 {
            for b in 0..2 {
                m[(2 * j + a, 2 * k + b)] = g[a][b];
                m[(2 * k + b, 2 * j + a)] = g[a][b];
            }
        }
    }
    CovMatrix::new(m)
}

/// Exact linear inverse of [`cov_from_normal_params`].
pub fn normal_params_from_cov(s: &CovMatrix) -> NormalParams {
    let n = s.n_modes();
    let mut p = NormalParams::vacuum(n);
    for j in 0..n {
        let g = s.block(j, j);
        p.b[j] = (g[(0, 0)] + g[(1, 1)] - 2.0) / 4.0;
        p.c[j] = C64::new((g[(0, 0)] - g[(1, 1)]) / 4.0, (g[(0, 1)] + g[(1, 0)]) / 4.0);
    }
    for (i, (j, k)) in pairs(n).into_iter().enumerate() {
        let g = s.block(j, k);
        let u = C64::new(g[(0, 0)], g[(0, 1)]) / 2.0;
        let v = C64::new(-g[(1, 1)], g[(1, 0)]) / 2.0;
        p.d[i] = (u + v) / 2.0;
        p.dbar[i] = (v - u) / 2.0;
    }
    p
}

/// `ΛσΛ` with Λ flipping the momentum quadrature of `mode`.
pub fn partial_transpose(s: &CovMatrix, mode: usize) -> Result<CovMatrix> {
    if mode >= s.n_modes() {
        return Err(Error::ModeOutOfRange { mode, n_modes: s.n_modes() });
    }
    let mut m = s.m.clone();
    let q = 2 * mode + 1;
    for i in 0..m.nrows() {
        if i != q {
            m[(q, i)] = -m[(q, i)];
            m[(i, q)] = -m[(i, q)];
        }
    }
    Ok(CovMatrix { n_modes: s.n_modes, m })
}

/// All `size`-element subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..=n - left {
            cur.push(i);
            rec(i + 1, n, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if size <= n {
        rec(0, n, size, &mut Vec::with_capacity(size), &mut out);
    }
    out
}

/// Sum of principal minors of the given order.
fn principal_minor_sum(m: &DMatrix<f64>, order: usize) -> f64 {
    combinations(m.nrows(), order)
        .iter()
        .map(|idx| m.select_rows(idx).select_columns(idx).determinant())
        .sum()
}

/// Symplectic invariants Δ_1..Δ_n: sums of principal minors of order 2k of Ωσ.
pub fn symplectic_invariants(s: &CovMatrix) -> Vec<f64> {
    let om = SymplecticForm::new(s.n_modes()).matrix();
    let w = om * &s.m;
    (1..=s.n_modes()).map(|k| principal_minor_sum(&w, 2 * k)).collect()
}

/// Symplectic eigenvalues in ascending order.
///
/// With A = σ^{1/2} Ω σ^{1/2} antisymmetric, AᵀA has eigenvalues ν_k², each twice.
pub fn symplectic_eigenvalues(s: &CovMatrix) -> Result<Vec<f64>> {
    let eig = SymmetricEigen::try_new(s.m.clone(), f64::EPSILON, 10_000).ok_or(Error::NonConvergent)?;
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::NotPositiveDefinite);
    }
    let root = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
        * eig.eigenvectors.transpose();
    let om = SymplecticForm::new(s.n_modes()).matrix();
    let a = &root * om * &root;
    let ata = a.transpose() * &a;
    let ata = (&ata + ata.transpose()) * 0.5;
    let e2 = SymmetricEigen::try_new(ata, f64::EPSILON, 10_000).ok_or(Error::NonConvergent)?;
    let mut nu2: Vec<f64> = e2.eigenvalues.iter().copied().collect();
    nu2.sort_by(|a, b| a.total_cmp(b));
    // Pairs are degenerate; average each pair to symmetrize rounding.
    Ok(nu2.chunks(2).map(|c| (0.5 * (c[0] + c[1])).max(0.0).sqrt()).collect())
}

/// Two-mode symplectic eigenvalues (λ₊, λ₋) from Δ₁ and Δ₂ = det σ:
/// λ±² = (Δ₁ ± √(Δ₁² − 4Δ₂)) / 2.
pub fn two_mode_eigs_from_invariants(d1: f64, d2: f64) -> Result<(f64, f64)> {
    if d2 < 0.0 {
        return Err(Error::NegativeInvariant(d2));
    }
    let mut disc = d1 * d1 - 4.0 * d2;
    if disc < 0.0 {
        if disc < -DISC_TOL * d1.abs().max(1.0).powi(2) {
            return Err(Error::NegativeDiscriminant(disc));
        }
        disc = 0.0;
    }
    if d1 <= 0.0 {
        return Err(Error::InconsistentStatistics(format!("first invariant {d1} must be positive")));
    }
    let sq = disc.sqrt();
    let lp2 = 0.5 * (d1 + sq);
    // Product form avoids cancellation in the small root.
    let lm2 = 2.0 * d2 / (d1 + sq);
    Ok((lp2.sqrt(), lm2.sqrt()))
}

/// r_k = r √(1−μ²) μ^k for k = 0..K−1.
pub fn supermode_amplitudes(spec: &SupermodeSpec) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&spec.mu) {
        return Err(Error::InvalidArgument(format!("mu must lie in [0, 1), got {}", spec.mu)));
    }
    let a = spec.r * (1.0 - spec.mu * spec.mu).sqrt();
    Ok((0..spec.k).map(|k| a * spec.mu.powi(k as i32)).collect())
}

/// μ = √(2/g² − 1) for 1 < g² ≤ 2.
pub fn mu_from_g2(g2: f64) -> Result<f64> {
    if !(g2 > 1.0 && g2 <= 2.0) {
        return Err(Error::InvalidArgument(format!("g2 must lie in (1, 2], got {g2}")));
    }
    Ok((2.0 / g2 - 1.0).max(0.0).sqrt())
}

/// Pure covariance of one supermode: TMSV(r_k) or TMGS(r_k, r2_k) with ψ = 0.
pub fn supermode_covariance(kind: StateKind, r1: f64, r2: f64) -> Result<CovMatrix> {
    match kind {
        StateKind::Tmsv => tmsv_covariance(r1, 0.0),
        StateKind::Tmgs => tmgs_covariance(r1, r2, 0.0, 0.0),
    }
}

/// Schmidt-weighted collective-mode covariance Σ_k w_k² σ_k with w_k² ∝ μ^{2k}.
///
/// The second squeezer (TMGS) shares the supermode structure of the pump:
/// r2_k = r2 √(1−μ²) μ^k. The convex combination of physical covariances is physical.
pub fn collective_covariance(spec: &SupermodeSpec, kind: StateKind, r2: f64) -> Result<CovMatrix> {
    let unit = SupermodeSpec { r: 1.0, ..*spec };
    let w: Vec<f64> = supermode_amplitudes(&unit)?.iter().map(|a| a * a).collect();
    let norm: f64 = w.iter().sum();
    let r1k = supermode_amplitudes(spec)?;
    let r2k = supermode_amplitudes(&SupermodeSpec { r: r2, ..*spec })?;
    let n = match kind {
        StateKind::Tmsv => 2,
        StateKind::Tmgs => 3,
    };
    let mut acc = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..spec.k {
        let s = supermode_covariance(kind, r1k[k], r2k[k])?;
        acc += s.matrix() * (w[k] / norm);
    }
    CovMatrix::new(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_invariants() {
        assert_eq!(symplectic_invariants(&CovMatrix::vacuum(3)), vec![3.0, 3.0, 1.0]);
        assert_eq!(symplectic_invariants(&CovMatrix::vacuum(2)), vec![2.0, 1.0]);
    }

    #[test]
    fn tmsv_parameters() {
        let p = normal_params_from_cov(&tmsv_covariance(0.5, 0.0).unwrap());
        let s = 0.5f64.sinh();
        assert!((p.b[0] - s * s).abs() < 1e-14 && (p.b[1] - 0.271_540_317_407_169_5).abs() < 1e-12);
        assert!(p.c[0].norm() < 1e-14 && p.dbar[0].norm() < 1e-14);
        assert!((p.d[0] - C64::new(s * 0.5f64.cosh(), 0.0)).norm() < 1e-14);
        let p = normal_params_from_cov(&tmsv_covariance(0.5, 1.1).unwrap());
        assert!((p.d[0] - C64::from_polar(s * 0.5f64.cosh(), 1.1)).norm() < 1e-14);
    }

    #[test]
    fn tmsv_pt_eigenvalue() {
        let pt = partial_transpose(&tmsv_covariance(0.5, 0.0).unwrap(), 1).unwrap();
        let nu = symplectic_eigenvalues(&pt).unwrap();
        assert!((nu[0] - (-1.0f64).exp()).abs() < 1e-12);
        assert!((nu[1] - 1.0f64.exp()).abs() < 1e-12);
        let inv = symplectic_invariants(&pt);
        let (lp, lm) = two_mode_eigs_from_invariants(inv[0], inv[1]).unwrap();
        assert!((lm - 0.367_879_441_171_442_3).abs() < 1e-12 && (lp - 1.0f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn single_thermal_block() {
        let mut p = NormalParams::vacuum(2);
        p.b[0] = 1.0;
        let s = cov_from_normal_params(&p).unwrap();
        assert_eq!(s.block(0, 0), na::Matrix2::new(3.0, 0.0, 0.0, 3.0));
        assert_eq!(s.block(1, 1), na::Matrix2::identity());
    }

    #[test]
    fn eigs_from_invariants_edges() {
        assert_eq!(two_mode_eigs_from_invariants(2.0, 1.0).unwrap(), (1.0, 1.0));
        assert!(two_mode_eigs_from_invariants(2.0, -0.1).is_err());
        assert!(two_mode_eigs_from_invariants(1.0, 1.0).is_err());
    }

    #[test]
    fn supermodes() {
        let a = supermode_amplitudes(&SupermodeSpec { r: 0.5, mu: 1.0 / 3.0, k: 3 }).unwrap();
        let a0 = 0.5 * (8.0f64 / 9.0).sqrt();
        assert!((a[0] - a0).abs() < 1e-15 && (a[1] - a0 / 3.0).abs() < 1e-15 && (a[2] - a0 / 9.0).abs() < 1e-15);
        assert_eq!(supermode_amplitudes(&SupermodeSpec { r: 0.7, mu: 0.0, k: 3 }).unwrap(), vec![0.7, 0.0, 0.0]);
        assert!((mu_from_g2(1.8).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(mu_from_g2(2.0).unwrap(), 0.0);
        assert!(mu_from_g2(1.0).is_err() && mu_from_g2(2.1).is_err());
        assert!(SupermodeSpec::new(0.5, 1.0, 3).is_err());
    }

    #[test]
    fn tmgs_reduces_to_tmsv() {
        let g = tmgs_covariance(0.4, 0.0, 0.3, 0.0).unwrap();
        let t = tmsv_covariance(0.4, 0.3).unwrap();
        // modes (a1, b) = (0, 2) carry the TMSV; a2 = 1 is vacuum
        let idx = [0, 1, 4, 5];
        let sub = g.matrix().select_rows(&idx).select_columns(&idx);
        assert!((sub - t.matrix()).amax() < 1e-14);
        assert_eq!(g.block(1, 1), na::Matrix2::identity());
        assert!(g.block(0, 1).amax() < 1e-15 && g.block(1, 2).amax() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(tmsv_covariance(-0.1, 0.0).is_err());
        assert!(partial_transpose(&CovMatrix::vacuum(2), 2).is_err());
        let mut m = DMatrix::identity(2, 2);
        m[(0, 1)] = 0.1;
        assert!(matches!(CovMatrix::new(m), Err(Error::NotSymmetric(_))));
        assert!(CovMatrix::new(DMatrix::identity(3, 3)).is_err());
        let p = NormalParams { b: vec![0.0; 2], c: vec![C64::new(0.0, 0.0)], d: vec![], dbar: vec![] };
        assert!(cov_from_normal_params(&p).is_err());
    }

    #[test]
    fn pair_indexing() {
        let ps = pairs(3);
        for (i, &(j, k)) in ps.iter().enumerate() {
            assert_eq!(pair_index(3, j, k), i);
            assert_eq!(pair_index(3, k, j), i);
        }
        assert_eq!(combinations(6, 4).len(), 15);
    }
}
