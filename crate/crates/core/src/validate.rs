//! Cross-implementation checks at enumeration scale (N <= 12).

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use num_complex::Complex64;

use crate::dp::{afm_distribution, fm_distribution, OrderKind};
use crate::error::Result;
use crate::fcs::{closed_form_z0, exact_generating_samples, invert_generating_function, k_matrix, mat_vec};
use crate::oracle::{
    brute_force, ising_nn_distribution, long_range_gibbs, monte_carlo_sample, projective_distribution,
};
use crate::phase::linspace;
use crate::qubit::{ModelParams, StateVector};
use crate::stats::{max_abs_diff, total_variation};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    /// Worst observed value of the compared quantity.
    pub metric: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &'static str, metric: f64, tolerance: f64) -> Self {
        Self {
            name,
            metric,
            tolerance,
            passed: metric <= tolerance,
        }
    }
}

pub fn suite_states() -> [StateVector; 3] {
    [
        StateVector::plus_x(),
        StateVector::mixed(),
        StateVector::new(1.0, 1.0, 0.0),
    ]
}

/// Largest deviation between the DP and full enumeration over N in
/// {4, 8, 12}, a 5x5 grid on [0.1, pi/2] x [0.1, pi] and three initial states.
pub fn dp_vs_enumeration() -> Result<f64> {
    let mut worst = 0.0f64;
    for n in [4, 8, 12] {
        for theta in linspace(0.1, FRAC_PI_2, 5) {
            for omega in linspace(0.1, PI, 5) {
                for initial in suite_states() {
                    let p = ModelParams::new(theta, omega, 0.0, n, initial)?;
                    let e = brute_force(&p)?;
                    worst = worst.max(fm_distribution(&p)?.max_abs_diff(&e.fm));
                    if let Some(afm) = e.afm {
                        worst = worst.max(afm_distribution(&p)?.max_abs_diff(&afm));
                    }
                }
            }
        }
    }
    Ok(worst)
}

pub const ISING_OMEGAS: [f64; 4] = [0.5, 1.0, 2.0, 2.6];

/// DP at theta = pi/2 against the nearest-neighbour Gibbs distribution,
/// starting from the maximally mixed state.
pub fn projective_vs_ising(n: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for omega in ISING_OMEGAS {
        let p = ModelParams::new(FRAC_PI_2, omega, 0.0, n, StateVector::mixed())?;
        let dp = fm_distribution(&p)?.probabilities();
        worst = worst.max(max_abs_diff(&dp, &ising_nn_distribution(omega, n)?));
    }
    Ok(worst)
}

fn projective_vs_dp() -> Result<f64> {
    let mut worst = 0.0f64;
    for omega in ISING_OMEGAS {
        for initial in suite_states() {
            for n in [10, 12] {
                let p = ModelParams::new(FRAC_PI_2, omega, 0.0, n, initial)?;
                let chain = projective_distribution(omega, initial, n)?;
                worst = worst.max(fm_distribution(&p)?.max_abs_diff(&chain));
            }
        }
    }
    Ok(worst)
}

fn generating_round_trip() -> Result<f64> {
    let mut worst = 0.0f64;
    for (theta, omega, r_tau) in [(0.3, 0.7, 0.0), (1.2, 2.5, 0.0), (0.9, 1.4, 0.02)] {
        for initial in suite_states() {
            let p = ModelParams::new(theta, omega, r_tau, 12, initial)?;
            let inv = invert_generating_function(&exact_generating_samples(&p)?, 12)?;
            worst = worst.max(max_abs_diff(&inv, &fm_distribution(&p)?.probabilities()));
        }
    }
    Ok(worst)
}

/// Relative mismatch between the closed-form `Z0` and the first component
/// of `K(z)^N (1, 0, 1)` on the unit circle.
fn closed_form_vs_k_power() -> Result<f64> {
    let (theta, omega, n) = (0.05, 0.03, 12);
    let mut worst = 0.0f64;
    for k in 0..16 {
        let z = Complex64::from_polar(1.0, 0.37 + k as f64 * PI / 8.0);
        let m = k_matrix(z, theta, omega).matrix;
        let mut v = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        for _ in 0..n {
            v = mat_vec(&m, &v);
        }
        let z0 = closed_form_z0(z, theta, omega, n)?;
        worst = worst.max((z0 - v[0]).norm() / v[0].norm().max(1e-300));
    }
    Ok(worst)
}

/// Largest ratio TV(theta_next) / TV(theta_prev) along theta = 0.1, 0.05, 0.02.
/// Below 1 means the DP approaches the long-range Gibbs distribution.
pub fn long_range_convergence(n: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for omega in [0.2, 0.8] {
        let mut prev: Option<f64> = None;
        for theta in [0.1, 0.05, 0.02] {
            let p = ModelParams::new(theta, omega, 0.0, n, StateVector::mixed())?;
            let tv = total_variation(
                &fm_distribution(&p)?.probabilities(),
                &long_range_gibbs(theta, omega, n)?,
            );
            if let Some(before) = prev {
                worst = worst.max(tv / before);
            }
            prev = Some(tv);
        }
    }
    Ok(worst)
}

fn monte_carlo_vs_dp() -> Result<f64> {
    let p = ModelParams::new(0.8, 1.1, 0.0, 12, StateVector::plus_x())?;
    let h = monte_carlo_sample(&p, 100_000, 2024)?;
    let fm = total_variation(&h.fm_frequencies(), &fm_distribution(&p)?.probabilities());
    let afm = total_variation(
        &h.estimate(OrderKind::AntiFerro).probabilities(),
        &afm_distribution(&p)?.probabilities(),
    );
    Ok(fm.max(afm))
}

fn normalization() -> Result<f64> {
    let mut worst = 0.0f64;
    for theta in linspace(0.0, FRAC_PI_2, 7) {
        for omega in linspace(0.0, PI, 7) {
            let p = ModelParams::new(theta, omega, 0.01, 12, StateVector::plus_x())?;
            worst = worst.max((fm_distribution(&p)?.total() - 1.0).abs());
            worst = worst.max((afm_distribution(&p)?.total() - 1.0).abs());
        }
    }
    Ok(worst)
}

pub fn run_suite() -> Result<Vec<Check>> {
    let shrink = long_range_convergence(12)?;
    Ok(vec![
        Check::at_most("dp = enumeration (fm, afm)", dp_vs_enumeration()?, 1e-12),
        Check::at_most("dp at theta=pi/2 = projective chain", projective_vs_dp()?, 1e-12),
        Check::at_most("projective = nearest-neighbour Gibbs", projective_vs_ising(10)?, 1e-12),
        Check::at_most("generating function inversion = dp", generating_round_trip()?, 1e-10),
        Check::at_most("closed-form Z0 = K(z)^N (rel.)", closed_form_vs_k_power()?, 1e-10),
        Check {
            name: "long-range Gibbs TV shrinks with theta",
            metric: shrink,
            tolerance: 1.0,
            passed: shrink < 1.0,
        },
        Check::at_most("monte carlo TV vs dp (1e5 traj)", monte_carlo_vs_dp()?, 0.02),
        Check::at_most("total probability = 1", normalization()?, 1e-12),
    ])
}

pub fn write_table<W: Write>(w: &mut W, checks: &[Check]) -> std::io::Result<()> {
    writeln!(w, "{:<40} {:>12} {:>10}  result", "check", "worst", "tolerance")?;
    for c in checks {
        writeln!(
            w,
            "{:<40} {:>12.3e} {:>10.0e}  {}",
            c.name,
            c.metric,
            c.tolerance,
            if c.passed { "PASS" } else { "FAIL" }
        )?;
    }
    Ok(())
}
