//! One line per acceptance criterion. Run with
//! `cargo test -p qmphase --test acceptance`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qmphase::cli::{output_path, run};
use qmphase::config::{parse_config, Command};
use qmphase::dp::{afm_distribution, fm_distribution, ConditionedDistribution};
use qmphase::fcs::{
    binomial_limit, exact_generating_samples, invert_generating_function, peak_positions, two_binomial_limit,
};
use qmphase::phase::{linspace, oscillation_period, refine_row_boundary, scan_column_boundary, Axis, BoundaryKind};
use qmphase::qubit::{ModelParams, StateVector};
use qmphase::stats::{local_maxima, max_abs_diff, total_variation};
use qmphase::validate::{dp_vs_enumeration, long_range_convergence, projective_vs_ising};
use qmphase::Result;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn params(theta: f64, omega: f64, r_tau: f64, n: usize, s: StateVector) -> ModelParams {
    ModelParams::new(theta, omega, r_tau, n, s).unwrap()
}

fn off_zero(d: &ConditionedDistribution) -> bool {
    d.argmax() != d.zero_index()
}

fn oracle_equivalence() -> Result<Outcome> {
    let start = Instant::now();
    let worst = dp_vs_enumeration()?;
    let secs = start.elapsed().as_secs_f64();
    Ok(outcome(
        worst <= 1e-12 && secs < 30.0,
        format!("max |dp - enumeration| = {worst:.2e} (<= 1e-12) in {secs:.1} s (< 30 s)"),
    ))
}

fn projective_ising() -> Result<Outcome> {
    let worst = projective_vs_ising(10)?;
    Ok(outcome(worst <= 1e-12, format!("max |dp - Gibbs| = {worst:.2e} (<= 1e-12)")))
}

fn argmax_peaks() -> Result<Outcome> {
    let start = Instant::now();
    let theta = 2.0 * PI / 5.0;
    let at = |omega| params(theta, omega, 0.0, 100, StateVector::plus_x());
    let mut bad = Vec::new();
    for omega in [0.0, 0.1, 0.5] {
        if !off_zero(&fm_distribution(&at(omega))?) {
            bad.push(format!("fm({omega}) at zero"));
        }
    }
    for omega in [1.5, 2.0] {
        if off_zero(&fm_distribution(&at(omega))?) {
            bad.push(format!("fm({omega}) off zero"));
        }
    }
    for omega in [1.1, 1.6] {
        if off_zero(&afm_distribution(&at(omega))?) {
            bad.push(format!("afm({omega}) off zero"));
        }
    }
    for omega in [3.0, PI] {
        if !off_zero(&afm_distribution(&at(omega))?) {
            bad.push(format!("afm({omega}) at zero"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(outcome(
        bad.is_empty() && secs < 5.0,
        format!("10 argmax checks, mismatches: {bad:?}, {secs:.2} s (< 5 s)"),
    ))
}

struct Row {
    theta: f64,
    pl: Option<f64>,
    apl: Option<f64>,
}

/// Bisected boundaries at N = 1000 for theta = 0.5, 0.52, ..., 1.5.
fn row_boundaries(r_tau: f64) -> Result<Vec<Row>> {
    let template = params(1.0, 1.0, r_tau, 1000, StateVector::plus_x());
    (0..=50)
        .map(|i| {
            let theta = 0.5 + 0.02 * i as f64;
            let pl = refine_row_boundary(&template, theta, BoundaryKind::PlUpl, 0.02, 0.1, 0.01)?;
            let apl = refine_row_boundary(&template, theta, BoundaryKind::UplApl, 0.02, 0.1, 0.01)?;
            Ok(Row { theta, pl, apl })
        })
        .collect()
}

fn boundary_lines(rows: &[Row], secs: f64) -> Outcome {
    let mut worst_pl = 0.0f64;
    let mut worst_apl = 0.0f64;
    let mut missing = 0;
    for &Row { theta, pl, apl } in rows {
        match (pl, apl) {
            (Some(pl), Some(apl)) => {
                worst_pl = worst_pl.max((pl - theta).abs());
                worst_apl = worst_apl.max((apl - (PI - theta)).abs());
            }
            _ => missing += 1,
        }
    }
    outcome(
        missing == 0 && worst_pl <= 0.05 && worst_apl <= 0.05 && secs < 600.0,
        format!(
            "{} rows: max |PL/UPL - theta| = {worst_pl:.4}, max |UPL/APL - (pi - theta)| = {worst_apl:.4} (<= 0.05), {missing} rows without a boundary, {secs:.1} s",
            rows.len()
        ),
    )
}

fn period_at(n: usize, theta_max: f64, omega_max: f64) -> Result<(f64, f64)> {
    let thetas = linspace(theta_max / 60.0, theta_max, 60);
    let omegas = linspace(omega_max / 100.0, omega_max, 100);
    let template = params(theta_max, omega_max, 0.0, n, StateVector::plus_x());
    let column = scan_column_boundary(&template, &thetas, &omegas)?;
    Ok((oscillation_period(&column, Axis::Omega)?, 2.0 * PI / (n as f64 - 2.0)))
}

fn oscillation() -> Result<Outcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, theta_max, omega_max) in [(100, 0.3, 0.4), (1000, 0.03, 0.04)] {
        match period_at(n, theta_max, omega_max) {
            Ok((period, reference)) => {
                let rel = (period - reference).abs() / reference;
                ok &= rel <= 0.15;
                parts.push(format!("N={n}: {period:.5} vs 2pi/(N-2) = {reference:.5} ({:.1}%)", 100.0 * rel));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("N={n}: {e}"));
            }
        }
    }
    Ok(outcome(ok, parts.join("; ")))
}

fn fcs_limits() -> Result<Outcome> {
    let a = fm_distribution(&params(0.01, 0.2, 0.0, 100, StateVector::plus_x()))?.probabilities();
    let binom = binomial_limit(100);
    let tv = total_variation(&a, &binom);
    let single = |v: &[f64]| local_maxima(v, 0.01) == vec![50];
    let a_ok = tv <= 0.05 && single(&a) && single(&binom);

    let dp = fm_distribution(&params(0.3, 0.001, 0.0, 100, StateVector::plus_x()))?.probabilities();
    let two = two_binomial_limit(0.3, 0.001, 100)?;
    let (p_hi, p_lo) = peak_positions(0.3, 0.001, 100)?;
    let near = |v: &[f64]| {
        let peaks = local_maxima(v, 0.5);
        peaks.len() == 2
            && peaks.iter().any(|&k| (k as f64 - p_lo).abs() <= 2.0)
            && peaks.iter().any(|&k| (k as f64 - p_hi).abs() <= 2.0)
    };
    let b_ok = near(&dp) && near(&two);
    Ok(outcome(
        a_ok && b_ok,
        format!(
            "(a) TV = {tv:.4} (<= 0.05), peaks dp {:?} binomial {:?}; (b) predicted ({p_lo:.2}, {p_hi:.2}), peaks dp {:?} two-binomial {:?}",
            local_maxima(&a, 0.01),
            local_maxima(&binom, 0.01),
            local_maxima(&dp, 0.5),
            local_maxima(&two, 0.5)
        ),
    ))
}

fn round_trip() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let phi = rng.random_range(0.0..std::f64::consts::TAU);
        let len = rng.random_range(0.0..=1.0);
        let p = params(
            rng.random_range(0.0..=FRAC_PI_2),
            rng.random_range(0.0..=PI),
            rng.random_range(0.0..0.05),
            64,
            StateVector::new(1.0, len * phi.cos(), len * phi.sin()),
        );
        let inv = invert_generating_function(&exact_generating_samples(&p)?, 64)?;
        worst = worst.max(max_abs_diff(&inv, &fm_distribution(&p)?.probabilities()));
    }
    Ok(outcome(worst <= 1e-10, format!("10 random sets at N=64: max |diff| = {worst:.2e} (<= 1e-10)")))
}

fn long_range() -> Result<Outcome> {
    let ratio = long_range_convergence(12)?;
    Ok(outcome(
        ratio < 1.0,
        format!("largest TV(next theta)/TV(previous theta) = {ratio:.3} (< 1 means strictly decreasing)"),
    ))
}

fn relaxation(base: &[Row]) -> Result<Outcome> {
    let relaxed = row_boundaries(0.005)?;
    let mut worst = 0.0f64;
    let mut missing = 0;
    for (a, b) in base.iter().zip(&relaxed) {
        for (x, y) in [(a.pl, b.pl), (a.apl, b.apl)] {
            match (x, y) {
                (Some(x), Some(y)) => worst = worst.max((x - y).abs()),
                _ => missing += 1,
            }
        }
    }
    Ok(outcome(
        missing == 0 && worst <= 0.02,
        format!("max boundary shift at r_tau=0.005 = {worst:.4} (<= 0.02), {missing} unmatched"),
    ))
}

fn run_capture(command: Command, dir: &Path, threads: Option<usize>, extra: &[(&str, &str)]) -> Result<Vec<Vec<u8>>> {
    let mut flags: Vec<(String, String)> = extra.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    flags.push(("out_dir".into(), dir.to_string_lossy().into_owned()));
    if let Some(t) = threads {
        flags.push(("threads".into(), t.to_string()));
    }
    let config = parse_config(command, None, &flags)?;
    let report = run(&config)?;
    let suffixes: &[&str] = match command {
        Command::Diagram => &["diagram"],
        _ => &["sample_fm", "sample_afm"],
    };
    assert_eq!(report.files.len(), suffixes.len());
    suffixes
        .iter()
        .map(|s| Ok(std::fs::read(output_path(&config, s))?))
        .collect()
}

fn determinism() -> Result<Outcome> {
    let max = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut ok = true;
    let mut parts = Vec::new();
    let cases: [(Command, &[(&str, &str)]); 2] = [
        (Command::Diagram, &[("n", "100")]),
        (Command::Sample, &[("n", "100"), ("n_traj", "100000"), ("seed", "42")]),
    ];
    for (command, extra) in cases {
        let mut outputs = Vec::new();
        for (i, threads) in [Some(1), Some(4), None, Some(1)].into_iter().enumerate() {
            let dir = tempfile::tempdir()?;
            outputs.push((i, threads, run_capture(command, dir.path(), threads, extra)?));
        }
        let same = outputs.iter().all(|o| o.2 == outputs[0].2);
        ok &= same;
        let bytes: usize = outputs[0].2.iter().map(Vec::len).sum();
        parts.push(format!("{command}: {} runs on threads 1/4/{max}/1 identical = {same} ({bytes} bytes)", outputs.len()));
    }
    Ok(outcome(ok, parts.join("; ")))
}

fn report(index: usize, name: &str, result: Result<Outcome>, failures: &mut usize) {
    let (passed, detail) = match result {
        Ok(o) => (o.passed, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    if !passed {
        *failures += 1;
    }
    println!("criterion {index:>2} [{}] {name}: {detail}", if passed { "PASS" } else { "FAIL" });
}

fn main() {
    // Respect `--list` and filters from the test runner without running anything.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut failures = 0;
    report(1, "oracle equivalence", oracle_equivalence(), &mut failures);
    report(2, "projective Ising mapping", projective_ising(), &mut failures);
    report(3, "argmax peak structure", argmax_peaks(), &mut failures);

    let start = Instant::now();
    let base = row_boundaries(0.0);
    let secs = start.elapsed().as_secs_f64();
    let c4 = base.as_ref().map(|rows| boundary_lines(rows, secs)).map_err(|e| qmphase::Error::Validation(e.to_string()));
    report(4, "boundary lines at N=1000", c4, &mut failures);
    report(5, "oscillation period", oscillation(), &mut failures);
    report(6, "FCS closed forms", fcs_limits(), &mut failures);
    report(7, "generating-function round trip", round_trip(), &mut failures);
    report(8, "long-range Ising convergence", long_range(), &mut failures);
    let c9 = match &base {
        Ok(rows) => relaxation(rows),
        Err(e) => Err(qmphase::Error::Validation(e.to_string())),
    };
    report(9, "relaxation robustness", c9, &mut failures);
    report(10, "determinism across runs and threads", determinism(), &mut failures);

    println!("acceptance: {} of 10 criteria passed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
