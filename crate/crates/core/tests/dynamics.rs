mod common;

use common::*;
use krylov_core::dynamics::{
    anticommutator_expectation, liouvillian_moments, short_time_coefficients, time_grid, evolve_truncated,
};
use krylov_core::{complexity_profile, evolve_amplitudes, evolve_family, EvolutionMethod, Truncation};
use proptest::prelude::*;

const EIGEN: EvolutionMethod<f64> = EvolutionMethod::TridiagEigen;

#[test]
fn dispersion_bound_on_random_chains() {
    let mut r = rng(31);
    let times = time_grid(10.0, 50).unwrap();
    for _ in 0..100 {
        let b = random_coefficients(&mut r, 20, 3.0);
        let prof = complexity_profile(&evolve_amplitudes(&b, &times, EIGEN).unwrap());
        assert!(prof.max_ratio().unwrap() <= 1.0 + 1e-8);
        for (k, tau) in prof.tau_k.iter().enumerate() {
            if let Some(tau) = tau {
                assert!(tau * b[0] >= 0.5 - 1e-8, "t = {}", times[k]);
            }
        }
    }
}

#[test]
fn amplitudes_match_dense_exponential() {
    let mut r = rng(32);
    for _ in 0..20 {
        let b = random_coefficients(&mut r, 12, 2.0);
        let traj = evolve_amplitudes(&b, &[0.0, 0.4, 1.7, 5.0], EIGEN).unwrap();
        for (k, &t) in traj.times.iter().enumerate() {
            let want = chain_expm(&b, t);
            for (x, y) in traj.phi[k].iter().zip(&want) {
                assert!((x - y).abs() < 1e-10);
            }
        }
        assert!(traj.norm_error() < 1e-12);
    }
}

#[test]
fn rate_matches_finite_differences() {
    let mut r = rng(33);
    let b = random_coefficients(&mut r, 15, 2.0);
    for &dt in &[1e-2, 5e-3] {
        let t0 = 1.3;
        let traj = evolve_amplitudes(&b, &[t0 - dt, t0, t0 + dt], EIGEN).unwrap();
        let p = complexity_profile(&traj);
        let fd = (p.complexity[2] - p.complexity[0]) / (2.0 * dt);
        // error of the centered difference is (dt²/6) K'''
        assert!((fd - p.rate[1]).abs() < 50.0 * dt * dt, "dt = {dt}");
    }
}

#[test]
fn rk4_and_eigen_agree() {
    let mut r = rng(34);
    for len in [5usize, 40, 99] {
        let b = random_coefficients(&mut r, len, 2.0);
        let times = time_grid(10.0, 21).unwrap();
        let a = evolve_amplitudes(&b, &times, EIGEN).unwrap();
        let c = evolve_amplitudes(&b, &times, EvolutionMethod::Rk4 { max_step: None }).unwrap();
        for (x, y) in a.phi.iter().flatten().zip(c.phi.iter().flatten()) {
            assert!((x - y).abs() < 1e-8, "len = {len}");
        }
    }
}

#[test]
fn parity_in_time() {
    let mut r = rng(35);
    let b = random_coefficients(&mut r, 20, 3.0);
    for method in [EIGEN, EvolutionMethod::Rk4 { max_step: None }] {
        let fwd = evolve_amplitudes(&b, &[0.0, 0.8, 2.5], method).unwrap();
        let bwd = evolve_amplitudes(&b, &[0.0, -0.8, -2.5], method).unwrap();
        let kf = complexity_profile(&fwd).complexity;
        let kb = complexity_profile(&bwd).complexity;
        for k in 0..3 {
            assert!((kf[k] - kb[k]).abs() < 1e-9);
            for (n, (x, y)) in fwd.phi[k].iter().zip(&bwd.phi[k]).enumerate() {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                assert!((x - sign * y).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn conserved_moments_and_anticommutator() {
    let mut r = rng(36);
    for _ in 0..10 {
        let b = random_coefficients(&mut r, 20, 3.0);
        let times: Vec<f64> = (0..10).map(|_| 10.0 * rand::Rng::random::<f64>(&mut r)).collect();
        let traj = evolve_amplitudes(&b, &times, EIGEN).unwrap();
        for k in 0..times.len() {
            assert!(anticommutator_expectation(&traj, k).abs() < 1e-10);
            let (m1, m2) = liouvillian_moments(&traj, k);
            assert!(m1.abs() < 1e-9 && (m2 - b[0] * b[0]).abs() < 1e-9);
        }
    }
}

#[test]
fn hw_chain_matches_poisson_amplitudes() {
    let times = [0.0, 0.3, 1.0, 2.0];
    let traj = evolve_family(|n| (n as f64).sqrt(), &times, EIGEN, Truncation::Auto { initial: 32, max: 4096 }).unwrap();
    assert!(traj.tail_mass < 1e-12);
    for (k, &t) in times.iter().enumerate() {
        let mut log_fact = 0.0f64;
        for n in 0..traj.size().min(30) {
            if n > 0 {
                log_fact += (n as f64).ln();
            }
            let want = if t == 0.0 {
                if n == 0 { 1.0 } else { 0.0 }
            } else {
                (-t * t / 2.0 + n as f64 * t.ln() - 0.5 * log_fact).exp()
            };
            assert!((traj.phi[k][n] - want).abs() < 1e-10);
        }
    }
}

#[test]
fn auto_truncation_errors_when_capped() {
    let err = evolve_family(|n| n as f64, &[0.0, 5.0], EIGEN, Truncation::Auto { initial: 8, max: 64 });
    assert!(err.is_err());
}

#[test]
fn truncated_evolution_marks_flag() {
    let b: Vec<f64> = (1..50).map(|n| (n as f64).sqrt()).collect();
    let t = evolve_truncated(&b, &[1.0], EIGEN, 10).unwrap();
    assert!(t.truncated && t.size() == 10);
    let t = evolve_truncated(&b, &[1.0], EIGEN, 80).unwrap();
    assert!(!t.truncated && t.size() == 50);
}

fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[test]
fn short_time_remainder_is_sixth_order() {
    let mut r = rng(37);
    for _ in 0..5 {
        let b = random_coefficients(&mut r, 10, 3.0);
        let (c2, c4) = short_time_coefficients(b[0], b[1]);
        let times: Vec<f64> = (0..9).map(|k| 10f64.powf(-2.0 + 0.125 * k as f64)).collect();
        let prof = complexity_profile(&evolve_amplitudes(&b, &times, EIGEN).unwrap());
        let xs: Vec<f64> = times.iter().map(|t| t.ln()).collect();
        let ys: Vec<f64> = times
            .iter()
            .zip(&prof.complexity)
            .map(|(t, k)| (k - c2 * t * t - c4 * t.powi(4)).abs().ln())
            .collect();
        assert!(fit_slope(&xs, &ys) > 5.5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bound_holds_for_arbitrary_chains(b in prop::collection::vec(0.01f64..5.0, 1..30), t in 0.0f64..20.0) {
        let traj = evolve_amplitudes(&b, &[t], EIGEN).unwrap();
        prop_assert!(traj.norm_error() < 1e-9);
        let p = complexity_profile(&traj);
        if let Some(r) = p.ratio[0] {
            prop_assert!(r <= 1.0 + 1e-8);
        }
        prop_assert!(p.complexity[0] >= -1e-12 && p.dispersion[0] >= 0.0);
    }
}
