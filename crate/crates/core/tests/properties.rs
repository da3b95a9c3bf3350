use intensity_ppt::detector::{self, DetectorModel};
use intensity_ppt::fock::{self, CutoffPolicy};
use intensity_ppt::gaussian::{self, CovMatrix};
use intensity_ppt::moments::{self, Consistency, MomentTable};
use intensity_ppt::{random, witness};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn tables_close(a: &MomentTable, b: &MomentTable, tol: f64) -> bool {
    a.iter().all(|(k, v)| close(*v, b.get(k).unwrap(), tol))
}

/// Independent moment oracle: direct sums over a joint distribution.
fn brute_moment(d: &fock::JointPhotonDist, powers: &[u32]) -> f64 {
    let ff = |n: usize, m: u32| (0..m).map(|i| n as f64 - i as f64).product::<f64>();
    d.iter().map(|(idx, p)| p * idx.iter().zip(powers).map(|(&n, &m)| ff(n, m)).product::<f64>()).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normal_params_round_trip(seed in any::<u64>(), n in 1usize..4) {
        let s = random::random_state(n, 0.7, &mut rng(seed)).unwrap();
        let p = gaussian::normal_params_from_cov(&s);
        let back = gaussian::cov_from_normal_params(&p).unwrap();
        prop_assert!((back.matrix() - s.matrix()).amax() < 1e-10);
        prop_assert!(s.is_physical());
    }

    #[test]
    fn invariants_symplectic_invariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = random::random_state(3, 0.5, &mut r).unwrap();
        let t = gaussian::two_mode_squeezer(3, 0, 2, 0.4, r.random_range(0.0..PI)).unwrap()
            * gaussian::beam_splitter(3, 1, 2, 0.7);
        let a = gaussian::symplectic_invariants(&s);
        let b = gaussian::symplectic_invariants(&s.transform(&t).unwrap());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(close(*x, *y, 1e-9));
        }
    }

    #[test]
    fn partial_transpose_maps_agree(seed in any::<u64>(), mode in 0usize..3) {
        let s = random::random_state(3, 0.6, &mut rng(seed)).unwrap();
        let direct = gaussian::normal_params_from_cov(&gaussian::partial_transpose(&s, mode).unwrap());
        let mapped = gaussian::normal_params_from_cov(&s).partial_transpose(mode).unwrap();
        for (a, b) in direct.d.iter().chain(&direct.dbar).chain(&direct.c).zip(mapped.d.iter().chain(&mapped.dbar).chain(&mapped.c)) {
            prop_assert!((a - b).norm() < 1e-12);
        }
        for (a, b) in direct.b.iter().zip(&mapped.b) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn two_mode_eigs_from_invariants(seed in any::<u64>()) {
        let s = gaussian::partial_transpose(&random::random_state(2, 0.7, &mut rng(seed)).unwrap(), 0).unwrap();
        let inv = gaussian::symplectic_invariants(&s);
        let (lp, lm) = gaussian::two_mode_eigs_from_invariants(inv[0], inv[1]).unwrap();
        let nu = gaussian::symplectic_eigenvalues(&s).unwrap();
        prop_assert!(close(lm, nu[0], 1e-9) && close(lp, nu[1], 1e-9));
    }

    #[test]
    fn moments_phase_blind(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = random::random_state(3, 0.5, &mut r).unwrap();
        let th: Vec<f64> = (0..3).map(|_| r.random_range(0.0..2.0 * PI)).collect();
        let rot = s.transform(&gaussian::phase_rotation(&th)).unwrap();
        let a = moments::moment_table(&gaussian::normal_params_from_cov(&s), 4).unwrap();
        let b = moments::moment_table(&gaussian::normal_params_from_cov(&rot), 4).unwrap();
        prop_assert!(tables_close(&a, &b, 1e-9));
        // parameter-level rotation matches the covariance-level one
        let pr = gaussian::normal_params_from_cov(&s).rotate_phases(&th).unwrap();
        let pc = gaussian::normal_params_from_cov(&rot);
        for (x, y) in pr.d.iter().chain(&pr.dbar).chain(&pr.c).zip(pc.d.iter().chain(&pc.dbar).chain(&pc.c)) {
            prop_assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn g2_g4_inversion_round_trip(n1 in 0.01f64..3.0, n2 in 0.01f64..3.0, f in 0.0f64..1.0, g in 0.0f64..1.0, a in 0.0f64..6.3, b in 0.0f64..6.3) {
        // |D|² ≤ n1(1+n2) and |D̄|² ≤ n1 n2 bound each correlation; scale inside them
        let d2 = f * n1.min(n2) * (1.0 + n1.max(n2)) * 0.5;
        let db2 = g * n1 * n2 * 0.5;
        let mut p = gaussian::NormalParams::vacuum(2);
        p.b = vec![n1, n2];
        p.set_pair(0, 1, num_complex::Complex64::from_polar(d2.sqrt(), a), num_complex::Complex64::from_polar(db2.sqrt(), b));
        let (g2, g4) = moments::g2_g4_forward(&p, (0, 1)).unwrap();
        let pc = moments::invert_g2_g4(n1, n2, g2, g4).unwrap();
        let (hi, lo) = (d2.max(db2), d2.min(db2));
        prop_assert!((pc.beta_plus_sq - hi).abs() < 1e-8 * hi.max(1.0));
        prop_assert!((pc.beta_minus_sq - lo).abs() < 1e-8 * hi.max(1.0));
    }

    #[test]
    fn wick_matches_fock_tmsv(r in 0.0f64..0.6, psi in 0.0f64..6.3) {
        let f = fock::tmsv_fock(r, psi, 40).unwrap();
        let d = fock::joint_distribution(&f);
        let t = moments::moment_table(&gaussian::normal_params_from_cov(&gaussian::tmsv_covariance(r, psi).unwrap()), 4).unwrap();
        for (k, v) in t.iter() {
            prop_assert!(close(*v, brute_moment(&d, k), 1e-8));
        }
    }

    #[test]
    fn cumulants_round_trip_and_add(r1 in 0.05f64..0.5, r2 in 0.05f64..0.5) {
        let c = 30;
        let d1 = fock::joint_distribution(&fock::tmsv_fock(r1, 0.0, c).unwrap());
        let d2 = fock::joint_distribution(&fock::tmsv_fock(r2, 1.0, c).unwrap());
        let t1 = moments::moments_from_distribution(&d1.normalized().unwrap(), 4).unwrap();
        let t2 = moments::moments_from_distribution(&d2.normalized().unwrap(), 4).unwrap();
        let back = moments::cumulants_to_moments(&moments::moments_to_cumulants(&t1).unwrap()).unwrap();
        prop_assert!(tables_close(&t1, &back, 1e-12));
        let combined = moments::combine_supermodes(&[t1, t2], 4).unwrap();
        let conv = d1.normalized().unwrap().convolve(&d2.normalized().unwrap(), &[2 * c, 2 * c]).unwrap();
        for (k, v) in combined.iter() {
            prop_assert!(close(*v, brute_moment(&conv, k), 1e-9));
        }
    }

    #[test]
    fn bound_is_sound(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = if seed % 2 == 0 { random::random_state(3, 0.6, &mut r).unwrap() } else { random::random_tmgs(1.0, &mut r).unwrap() };
        let p = gaussian::normal_params_from_cov(&s);
        let t = moments::moment_table(&p, 2).unwrap();
        let sum: f64 = witness::PERMUTATIONS.iter().map(|&o| witness::residual_f(&p, o, true).unwrap()).sum();
        prop_assert!(sum.abs() <= witness::rhs_bound(&t).unwrap() * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn tmgs_witness_identity(r1 in 0.05f64..0.9, r2 in 0.05f64..0.9, p1 in 0.0f64..6.3, p2 in 0.0f64..6.3) {
        // LHS + Σ F̃ reproduces the exact PPT value when pair correlations are exact
        let s = gaussian::tmgs_covariance(r1, r2, p1, p2).unwrap();
        let t = moments::moment_table(&gaussian::normal_params_from_cov(&s), 4).unwrap();
        let pcs = witness::tmgs_pairs(&t, Consistency::Strict).unwrap();
        let w = witness::three_mode_witness(&t, &pcs, Some(&s)).unwrap();
        let p = gaussian::normal_params_from_cov(&s);
        let sum: f64 = witness::PERMUTATIONS.iter().map(|&o| witness::residual_f(&p, o, true).unwrap()).sum();
        let exact = witness::ppt_condition(&s, 0).unwrap();
        prop_assert!(close(w.lhs + sum, exact, 1e-9));
        prop_assert!(exact.abs() < 1e-8 * s.det().max(1.0));
    }

    #[test]
    fn click_columns_normalized(n in 1usize..40, eta in 0.05f64..1.0) {
        let d = DetectorModel::new(n, eta).unwrap();
        let m = detector::click_prob_matrix(&d, 50);
        for col in 0..=50 {
            prop_assert!((m.column(col).sum() - 1.0).abs() < 1e-12);
            prop_assert!(m.column(col).iter().all(|&x| x >= 0.0));
        }
    }
}

#[test]
fn click_dp_matches_alternating_sum() {
    let d = DetectorModel::new(8, 0.7).unwrap();
    let m = detector::click_prob_matrix(&d, 12);
    for n in 0..=12 {
        for k in 0..=8 {
            assert!((m[(k, n)] - detector::click_prob_alternating(&d, k, n)).abs() < 1e-12, "k={k} n={n}");
        }
    }
}

#[test]
fn generating_function_matches_fock_tmgs() {
    let s = gaussian::tmgs_covariance(0.4, 0.3, 0.5, 1.2).unwrap();
    let gf = fock::gaussian_photon_distribution(&s, 12).unwrap();
    let f = fock::tmgs_fock(0.4, 0.3, 0.5, 1.2, 24, CutoffPolicy::default()).unwrap();
    let fd = fock::joint_distribution(&f);
    let mut worst: f64 = 0.0;
    for (idx, p) in gf.iter() {
        worst = worst.max((p - fd.get(&idx)).abs());
    }
    assert!(worst < 1e-10, "worst {worst}");
}

#[test]
fn sampling_is_reproducible_and_converges() {
    let d = fock::joint_distribution(&fock::tmsv_fock(0.5, 0.0, 30).unwrap());
    let models = [DetectorModel::reference(); 2];
    let a = detector::sample_clicks(&d, &models, 200_000, 7).unwrap();
    let b = detector::sample_clicks(&d, &models, 200_000, 7).unwrap();
    assert_eq!(a, b);
    let exact = detector::apply_detector(&d, &models).unwrap();
    assert!(a.total_variation(&exact).unwrap() < 0.01);
}

#[test]
fn detector_inversion_recovers_distribution() {
    let d = fock::joint_distribution(&fock::tmsv_fock(0.4, 0.0, 40).unwrap()).marginal(&[0]).unwrap();
    let model = [DetectorModel::reference()];
    let clicks = detector::apply_detector(&d, &model).unwrap();
    let est = detector::estimate_photon_dist(&clicks, &model, 14).unwrap();
    for n in 0..8 {
        assert!((est.dist.get(&[n]) - d.get(&[n])).abs() < 1e-8, "n={n}");
    }
    assert!(est.residual < 1e-8);
}

#[test]
fn physical_state_checks() {
    let v = CovMatrix::vacuum(2);
    assert!(v.is_physical());
    let mut m = v.matrix().clone();
    m[(0, 0)] = 0.5;
    m[(1, 1)] = 0.5;
    assert!(!CovMatrix::new(m).unwrap().is_physical());
}
