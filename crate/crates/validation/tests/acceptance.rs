//! Acceptance suite. Each test covers one criterion and writes a single
//! `criterion N: PASS|FAIL` line (plus any failing details) to stderr, which
//! the test harness does not capture.

use std::io::Write;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use phavail_core::availability::{
    availability_closed, availability_numeric, mttf_lindley, mttr, reliability_lindley,
    steady_state_dlambda, steady_state_dmu, ClosedFormTerms, ComponentParams,
};
use phavail_core::ctmc::stationary_distribution;
use phavail_core::phase_type::PhaseType;
use phavail_core::sim::{simulate, SimulationPlan};
use phavail_core::system::{
    product_space_generator, steady_state_parallel, steady_state_series, Component, SystemModel,
};
use phavail_core::Structure;
use phavail_cli::report::round_half_away;
use phavail_oracles::{central_difference, integrate, log_grid};

struct Criterion {
    number: u32,
    title: &'static str,
    failures: Vec<String>,
    checks: usize,
}

impl Criterion {
    fn new(number: u32, title: &'static str) -> Self {
        Self { number, title, failures: Vec::new(), checks: 0 }
    }

    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(detail());
        }
    }

    fn finish(self) {
        let verdict = if self.failures.is_empty() { "PASS" } else { "FAIL" };
        let mut err = std::io::stderr().lock();
        let _ = writeln!(
            err,
            "criterion {}: {verdict}  {} ({}/{} checks)",
            self.number,
            self.title,
            self.checks - self.failures.len(),
            self.checks
        );
        for f in &self.failures {
            let _ = writeln!(err, "    {f}");
        }
        drop(err);
        assert!(self.failures.is_empty(), "criterion {} failed:\n{}", self.number, self.failures.join("\n"));
    }
}

const G: (f64, f64) = (0.004, 0.03);
const ICE: (f64, f64) = (0.002, 0.08);
const AC: (f64, f64) = (0.002, 0.08);

fn lindley(rates: (f64, f64)) -> ComponentParams<f64> {
    ComponentParams::lindley(rates.0, rates.1).unwrap()
}

fn exponential(rates: (f64, f64)) -> ComponentParams<f64> {
    ComponentParams::exponential(rates.0, rates.1).unwrap()
}

fn cchp(law: fn((f64, f64)) -> ComponentParams<f64>) -> Vec<ComponentParams<f64>> {
    vec![law(G), law(ICE), law(AC)]
}

fn at4(x: f64) -> String {
    round_half_away(x, 4)
}

#[test]
fn criterion_01_component_steady_state() {
    let mut c = Criterion::new(1, "component steady-state availability, 4 decimals");
    let expected = [("G", G, "0.8824", "0.9374"), ("ICE", ICE, "0.9756", "0.9876"), ("AC", AC, "0.9756", "0.9876")];
    for (name, rates, exp_e, exp_l) in expected {
        let e = at4(exponential(rates).steady_state().unwrap());
        let l = at4(lindley(rates).steady_state().unwrap());
        c.check(e == exp_e, || format!("{name} exponential: got {e}, expected {exp_e}"));
        c.check(l == exp_l, || format!("{name} lindley: got {l}, expected {exp_l}"));
    }
    c.finish();
}

#[test]
fn criterion_02_series_system_steady_state() {
    let mut c = Criterion::new(2, "series system availability and relative increase");
    let e = steady_state_series(&cchp(exponential)).unwrap();
    let l = steady_state_series(&cchp(lindley)).unwrap();
    c.check(at4(e) == "0.8398", || format!("exponential series: got {} ({e:.7}), expected 0.8398", at4(e)));
    c.check(at4(l) == "0.9143", || format!("lindley series: got {} ({l:.7}), expected 0.9143", at4(l)));
    let relative = 100.0 * (l / e - 1.0);
    c.check((relative - 8.87).abs() <= 0.01, || format!("relative increase {relative:.4}%, expected 8.87 +- 0.01"));
    let absolute = 100.0 * (l - e);
    c.check(round_half_away(absolute, 2) == "7.45", || format!("absolute gap {absolute:.4} pp, expected 7.45"));
    c.finish();
}

#[test]
fn criterion_03_sensitivity_tables() {
    let mut c = Criterion::new(3, "sensitivity tables at printed precision");
    // (component, varied parameter, value, availability, derivative)
    let printed: [(&str, (f64, f64), char, f64, &str, &str); 16] = [
        ("G", G, 'l', 0.002, "0.9677", "-15.5"),
        ("G", G, 'l', 0.004, "0.9374", "-14.7"),
        ("G", G, 'l', 0.006, "0.9083", "-13.9"),
        ("G", G, 'l', 0.008, "0.8802", "-13.1"),
        ("ICE/AC", ICE, 'l', 0.001, "0.9938", "-6.21"),
        ("ICE/AC", ICE, 'l', 0.002, "0.9876", "-6.11"),
        ("ICE/AC", ICE, 'l', 0.003, "0.9809", "-6.01"),
        ("ICE/AC", ICE, 'l', 0.004, "0.9738", "-5.91"),
        ("G", G, 'm', 0.015, "0.8820", "3.91"),
        ("G", G, 'm', 0.030, "0.9374", "1.96"),
        ("G", G, 'm', 0.045, "0.9605", "1.17"),
        ("G", G, 'm', 0.060, "0.9722", "0.80"),
        ("ICE/AC", ICE, 'm', 0.04, "0.9756", "0.31"),
        ("ICE/AC", ICE, 'm', 0.08, "0.9876", "0.15"),
        ("ICE/AC", ICE, 'm', 0.12, "0.9922", "0.10"),
        ("ICE/AC", ICE, 'm', 0.16, "0.9945", "0.07"),
    ];
    for (name, nominal, param, value, exp_a, exp_d) in printed {
        let (l, m) = if param == 'l' { (value, nominal.1) } else { (nominal.0, value) };
        let a = lindley((l, m)).steady_state().unwrap();
        let d = if param == 'l' { steady_state_dlambda(l, m) } else { steady_state_dmu(l, m) }.unwrap();
        let decimals = exp_d.split_once('.').map_or(0, |(_, f)| f.len());
        let (got_a, got_d) = (at4(a), round_half_away(d, decimals));
        let pname = if param == 'l' { "lambda" } else { "mu" };
        c.check(got_a == exp_a && got_d == exp_d, || {
            format!("{name} {pname}={value}: got ({got_a}, {got_d}), printed ({exp_a}, {exp_d})")
        });
    }
    c.finish();
}

#[test]
fn criterion_04_closed_form_matches_ctmc() {
    let mut c = Criterion::new(4, "closed form vs CTMC transient, 200 log-spaced times");
    let near_critical = (1.0, 2.0 * (1.0 + 5e-9));
    let terms = ClosedFormTerms::new(near_critical.0, near_critical.1).unwrap();
    c.check(terms.disc / (near_critical.1 * near_critical.1) <= 1e-8, || {
        format!("near-critical pair has disc/mu^2 = {:e}", terms.disc / (near_critical.1 * near_critical.1))
    });
    let grid = log_grid(1e-3, 1e4, 200);
    for (l, m) in [G, ICE, (2.0, 0.05), (1.0, 1.0), near_critical] {
        let worst = grid
            .iter()
            .map(|&t| (availability_closed(l, m, t).unwrap() - availability_numeric(l, m, t).unwrap()).abs())
            .fold(0.0_f64, f64::max);
        c.check(worst <= 1e-8, || format!("({l}, {m}): max deviation {worst:e}"));
    }
    c.finish();
}

#[test]
fn criterion_05_no_repair_reduces_to_reliability() {
    let mut c = Criterion::new(5, "mu = 0 reduces to Lindley reliability and PH survival");
    for l in [0.004, 0.1, 1.0, 5.0] {
        let ph = PhaseType::lindley(l).unwrap();
        let stop = 20.0 / l;
        for k in 0..50 {
            let t = stop * k as f64 / 49.0;
            let a = availability_closed(l, 0.0, t).unwrap();
            let r = reliability_lindley(l, t).unwrap();
            let s = ph.survival(t).unwrap();
            let worst = (a - r).abs().max((r - s).abs()).max((a - s).abs());
            c.check(worst <= 1e-10, || format!("lambda={l} t={t}: A={a} R={r} S={s}"));
        }
    }
    c.finish();
}

#[test]
fn criterion_06_product_form() {
    let mut c = Criterion::new(6, "product-space stationary solve vs series/parallel formulas");
    let comps = cchp(lindley);
    for n in [2, 3] {
        let comps = &comps[..n];
        let ps = product_space_generator(comps).unwrap();
        let pi = stationary_distribution(&ps.generator).unwrap();
        let series = pi.mass_of(&ps.classify(Structure::Series).up);
        let parallel = pi.mass_of(&ps.classify(Structure::Parallel).up);
        let ds = (series - steady_state_series(comps).unwrap()).abs();
        let dp = (parallel - steady_state_parallel(comps).unwrap()).abs();
        c.check(ds <= 1e-10, || format!("n={n} series deviation {ds:e}"));
        c.check(dp <= 1e-10, || format!("n={n} parallel deviation {dp:e}"));
    }
    c.finish();
}

#[test]
fn criterion_07_lindley_dominates_exponential() {
    let mut c = Criterion::new(7, "Lindley steady state exceeds exponential on random rates");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        // (0, 10]
        let l = 10.0 * (1.0 - rng.random::<f64>());
        let m = 10.0 * (1.0 - rng.random::<f64>());
        let al = lindley((l, m)).steady_state().unwrap();
        let ae = exponential((l, m)).steady_state().unwrap();
        c.check(al > ae, || format!("({l}, {m}): lindley {al} vs exponential {ae}"));
    }
    c.finish();
}

#[test]
fn criterion_08_derivatives_match_finite_differences() {
    let mut c = Criterion::new(8, "analytic derivatives vs central differences (h = 1e-7)");
    let a = |l: f64, m: f64| lindley((l, m)).steady_state().unwrap();
    let h = 1e-7;
    for (nominal, lambdas, mus) in [
        (G, [0.002, 0.004, 0.006, 0.008], [0.015, 0.03, 0.045, 0.06]),
        (ICE, [0.001, 0.002, 0.003, 0.004], [0.04, 0.08, 0.12, 0.16]),
    ] {
        for l in lambdas {
            let m = nominal.1;
            let exact = steady_state_dlambda(l, m).unwrap();
            let fd = central_difference(|x| a(x, m), l, h);
            let rel = ((exact - fd) / exact).abs();
            c.check(rel <= 1e-6, || format!("d/dlambda at ({l}, {m}): {exact} vs {fd}"));
        }
        for m in mus {
            let l = nominal.0;
            let exact = steady_state_dmu(l, m).unwrap();
            let fd = central_difference(|x| a(l, x), m, h);
            let rel = ((exact - fd) / exact).abs();
            c.check(rel <= 1e-6, || format!("d/dmu at ({l}, {m}): {exact} vs {fd}"));
        }
    }
    c.finish();
}

#[test]
fn criterion_09_mttf_mttr_consistency() {
    let mut c = Criterion::new(9, "MTTF by quadrature and PH mean; A = MTTF/(MTTF+MTTR)");
    for (l, m) in [G, ICE, AC] {
        let mttf = mttf_lindley(l).unwrap();
        let area = integrate(|t| reliability_lindley(l, t).unwrap(), 0.0, 200.0 / l, 1e-10);
        c.check(((mttf - area) / mttf).abs() <= 1e-6, || format!("lambda={l}: MTTF {mttf} vs quadrature {area}"));
        let ph = PhaseType::lindley(l).unwrap().mean().unwrap();
        c.check((mttf - ph).abs() <= 1e-10, || format!("lambda={l}: MTTF {mttf} vs PH mean {ph}"));
        let ratio = mttf / (mttf + mttr(m).unwrap());
        let a = lindley((l, m)).steady_state().unwrap();
        c.check((ratio - a).abs() <= 1e-12, || format!("({l}, {m}): {ratio} vs {a}"));
    }
    c.finish();
}

#[test]
fn criterion_10_monte_carlo_agreement() {
    let mut c = Criterion::new(10, "Monte Carlo within 3 standard errors");
    let components = [("G", G), ("ICE", ICE), ("AC", AC)]
        .into_iter()
        .map(|(label, rates)| Component { label: label.into(), params: lindley(rates) })
        .collect();
    let model = SystemModel::new("cchp", Structure::Series, components).unwrap();
    let est = simulate(&SimulationPlan::new(model.clone(), 1e5, 200, 42)).unwrap();
    for (comp, e) in model.components.iter().zip(&est.components) {
        let target = comp.params.steady_state().unwrap();
        c.check(e.within(target, 3.0), || format!("{}: {} +- {} vs {target}", comp.label, e.mean, e.std_error));
    }
    let s = est.long_run;
    c.check(s.within(0.9143, 3.0), || format!("series: {} +- {} vs 0.9143", s.mean, s.std_error));

    let one = Component { label: "x".into(), params: lindley((1.0, 1.0)) };
    let single = SystemModel::new("x", Structure::Single, vec![one]).unwrap();
    let checkpoints: Vec<f64> = (1..=10).map(|k| 0.5 * k as f64).collect();
    let plan = SimulationPlan::new(single, 6.0, 200, 42).with_checkpoints(checkpoints);
    for (t, e) in simulate(&plan).unwrap().pointwise {
        let target = availability_closed(1.0, 1.0, t).unwrap();
        c.check(e.within(target, 3.0), || format!("(1, 1) t={t}: {} +- {} vs {target}", e.mean, e.std_error));
    }
    c.finish();
}

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// Runs the CLI entry point in-process; returns (exit code, stdout).
fn phavail(args: &[&str]) -> (i32, Vec<u8>) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = phavail_cli::run(std::iter::once("phavail").chain(args.iter().copied()), &mut out, &mut err);
    (code, out)
}

#[test]
fn criterion_11_cli_regression() {
    let mut c = Criterion::new(11, "CLI output matches golden files; verify exits 0");
    let model = data_dir().join("cchp.json");
    let model = model.to_str().unwrap();
    for (args, golden) in [
        (vec!["steady-state", "--model", model], "steady_state.txt"),
        (vec!["sensitivity", "--model", model], "sensitivity.txt"),
    ] {
        let (code, out) = phavail(&args);
        let expected = std::fs::read(data_dir().join("golden").join(golden)).unwrap();
        c.check(code == 0 && out == expected, || format!("{} differs from {golden} (exit {code})", args[0]));
    }
    let (code, out) = phavail(&["verify", "--model", model]);
    c.check(code == 0, || format!("verify exited {code}:\n{}", String::from_utf8_lossy(&out)));
    c.finish();
}
