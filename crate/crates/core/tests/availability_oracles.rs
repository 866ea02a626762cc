use phavail_core::availability::{
    availability_closed, availability_numeric, mttf_lindley, mttr, reliability_lindley,
    steady_state_availability, steady_state_dlambda, steady_state_dmu, Branch, ClosedFormTerms,
    ComponentParams, Law,
};
use phavail_core::phase_type::PhaseType;
use phavail_oracles::{central_difference, integrate, log_grid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lindley_steady(l: f64, m: f64) -> f64 {
    ComponentParams::lindley(l, m).unwrap().steady_state().unwrap()
}

/// The five reference pairs plus the exact critical point (1, 2) and two
/// pairs straddling it with |disc|/μ² ≈ 5e-9.
fn reference_pairs() -> Vec<(f64, f64)> {
    vec![
        (0.004, 0.03),
        (0.002, 0.08),
        (1.0, 1.0),
        (0.5, 0.2),
        (2.0, 0.05),
        (1.0, 2.0),
        (1.0, 2.0 * (1.0 + 5e-9)),
        (1.0, 2.0 * (1.0 - 5e-9)),
    ]
}

#[test]
fn reference_pairs_cover_every_branch() {
    let branches: Vec<Branch> = reference_pairs()
        .iter()
        .map(|&(l, m)| ClosedFormTerms::new(l, m).unwrap().branch)
        .collect();
    assert!(branches.contains(&Branch::Hyperbolic));
    assert!(branches.contains(&Branch::Trigonometric));
    assert!(branches.contains(&Branch::Critical));
    let near = ClosedFormTerms::new(1.0, 2.0 * (1.0 + 5e-9)).unwrap();
    assert_eq!(near.branch, Branch::Hyperbolic);
    assert!(near.disc / 4.0 <= 1e-8);
}

#[test]
fn closed_form_matches_ctmc_on_log_grid() {
    let grid = log_grid(1e-3, 1e4, 200);
    for (l, m) in reference_pairs() {
        let worst = grid
            .iter()
            .map(|&t| (availability_closed(l, m, t).unwrap() - availability_numeric(l, m, t).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-8, "(λ, μ) = ({l}, {m}): max deviation {worst:e}");
    }
}

#[test]
fn closed_form_matches_ctmc_on_linear_grid() {
    let worst = (0..=1000)
        .map(|k| k as f64)
        .map(|t| (availability_closed(0.004, 0.03, t).unwrap() - availability_numeric(0.004, 0.03, t).unwrap()).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-8);
}

#[test]
fn zero_repair_reduces_to_reliability() {
    for &l in &[0.004, 0.1, 1.0, 5.0] {
        let ph = PhaseType::lindley(l).unwrap();
        for t in (0..50).map(|k| k as f64 * 0.4 / l) {
            let a = availability_closed(l, 0.0, t).unwrap();
            let r = reliability_lindley(l, t).unwrap();
            let s = ph.survival(t).unwrap();
            assert!((a - r).abs() <= 1e-12);
            assert!((r - s).abs() <= 1e-10, "λ={l} t={t}");
        }
    }
    assert!((availability_numeric(1.0_f64, 0.0, 1.0).unwrap() - 0.551_819).abs() < 1e-6);
}

#[test]
fn lindley_dominates_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let l = 10.0 * (1.0 - rng.random::<f64>());
        let m = 10.0 * (1.0 - rng.random::<f64>());
        let lindley = steady_state_availability(&ComponentParams::new(l, m, Law::Lindley).unwrap()).unwrap();
        let exp = steady_state_availability(&ComponentParams::new(l, m, Law::Exponential).unwrap()).unwrap();
        assert!(lindley > exp, "(λ, μ) = ({l}, {m})");
    }
}

#[test]
fn steady_state_monotone_in_both_rates() {
    let lambdas: Vec<f64> = (1..200).map(|k| k as f64 * 0.005).collect();
    let mus: Vec<f64> = (1..200).map(|k| k as f64 * 0.005).collect();
    for &m in &[0.01, 0.03, 0.08, 1.0] {
        for w in lambdas.windows(2) {
            assert!(lindley_steady(w[0], m) > lindley_steady(w[1], m));
        }
    }
    for &l in &[0.002, 0.004, 0.5] {
        for w in mus.windows(2) {
            assert!(lindley_steady(l, w[0]) < lindley_steady(l, w[1]));
        }
    }
    assert!((lindley_steady(1e-12, 0.03) - 1.0).abs() <= 1e-9);
    assert_eq!(lindley_steady(0.004, 0.0), 0.0);
}

#[test]
fn closed_form_converges_to_steady_state() {
    for (l, m) in reference_pairs() {
        let far = availability_closed(l, m, 1e6).unwrap();
        assert!((far - lindley_steady(l, m)).abs() < 1e-12, "({l}, {m})");
    }
}

/// Parameter grids of the four sensitivity tables.
fn sensitivity_grid() -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    out.extend([0.002, 0.004, 0.006, 0.008].map(|l| (l, 0.03)));
    out.extend([0.001, 0.002, 0.003, 0.004].map(|l| (l, 0.08)));
    out.extend([0.015, 0.03, 0.045, 0.06].map(|m| (0.004, m)));
    out.extend([0.04, 0.08, 0.12, 0.16].map(|m| (0.002, m)));
    out
}

#[test]
fn derivatives_match_finite_differences() {
    let h = 1e-7;
    for (l, m) in sensitivity_grid() {
        let fd_l = central_difference(|x| lindley_steady(x, m), l, h);
        let fd_m = central_difference(|x| lindley_steady(l, x), m, h);
        let dl = steady_state_dlambda(l, m).unwrap();
        let dm = steady_state_dmu(l, m).unwrap();
        assert!(((dl - fd_l) / dl).abs() <= 1e-6, "dλ at ({l}, {m}): {dl} vs {fd_l}");
        assert!(((dm - fd_m) / dm).abs() <= 1e-6, "dμ at ({l}, {m}): {dm} vs {fd_m}");
        assert!(dl < 0.0 && dm > 0.0);
    }
}

#[test]
fn mttf_matches_quadrature_and_phase_type_mean() {
    for &l in &[0.004, 0.002, 0.1, 1.0, 5.0] {
        let mttf = mttf_lindley(l).unwrap();
        let area = integrate(|t| reliability_lindley(l, t).unwrap(), 0.0, 200.0 / l, 1e-10);
        assert!(((mttf - area) / mttf).abs() <= 1e-6, "λ={l}");
        let ph_mean = PhaseType::lindley(l).unwrap().mean().unwrap();
        assert!((mttf - ph_mean).abs() <= 1e-10 * mttf.max(1.0), "λ={l}");
    }
    assert!((mttf_lindley(0.004_f64).unwrap() - 499.004).abs() < 5e-5);
    assert_eq!(mttf_lindley(1.0_f64).unwrap(), 1.5);
}

#[test]
fn steady_state_is_mttf_over_cycle() {
    for (l, m) in [(0.004, 0.03), (0.002, 0.08)] {
        let f = mttf_lindley(l).unwrap();
        let r = mttr(m).unwrap();
        assert!((f / (f + r) - lindley_steady(l, m)).abs() <= 1e-12);
    }
}
