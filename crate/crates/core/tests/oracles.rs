use std::f64::consts::FRAC_PI_2;

use qmphase::dp::{afm_distribution, fm_distribution};
use qmphase::oracle::{
    brute_force, ising_nn_distribution, long_range_gibbs, monte_carlo_sample, projective_distribution,
};
use qmphase::phase::linspace;
use qmphase::qubit::{ModelParams, StateVector};
use qmphase::stats::{max_abs_diff, total_variation};

#[test]
fn dp_matches_enumeration_at_every_even_n_up_to_12() {
    // Grid includes the closed edges theta = 0 and omega = 0, pi.
    let states = [StateVector::plus_x(), StateVector::mixed(), StateVector::new(1.0, 0.6, -0.8)];
    let mut worst = 0.0f64;
    for n in (2..=12).step_by(2) {
        for theta in linspace(0.0, FRAC_PI_2, 5) {
            for omega in linspace(0.0, std::f64::consts::PI, 5) {
                for s in states {
                    let p = ModelParams::new(theta, omega, 0.0, n, s).unwrap();
                    let e = brute_force(&p).unwrap();
                    worst = worst.max(fm_distribution(&p).unwrap().max_abs_diff(&e.fm));
                    worst = worst.max(afm_distribution(&p).unwrap().max_abs_diff(e.afm.as_ref().unwrap()));
                }
            }
        }
    }
    assert!(worst <= 1e-12, "{worst:e}");
}

#[test]
fn relaxation_is_enumerated_too() {
    let p = ModelParams::new(0.7, 1.9, 0.05, 10, StateVector::plus_x()).unwrap();
    let e = brute_force(&p).unwrap();
    assert!(fm_distribution(&p).unwrap().max_abs_diff(&e.fm) < 1e-12);
    assert!(afm_distribution(&p).unwrap().max_abs_diff(e.afm.as_ref().unwrap()) < 1e-12);
}

#[test]
fn projective_chain_matches_dp_up_to_n_1000() {
    for omega in [0.3, 1.4, 2.8] {
        for s in [StateVector::plus_x(), StateVector::mixed(), StateVector::new(1.0, 1.0, 0.0)] {
            let p = ModelParams::new(FRAC_PI_2, omega, 0.0, 1000, s).unwrap();
            let d = fm_distribution(&p).unwrap().max_abs_diff(&projective_distribution(omega, s, 1000).unwrap());
            assert!(d <= 1e-12, "omega {omega}: {d:e}");
        }
    }
}

#[test]
fn projective_chain_is_nearest_neighbour_gibbs() {
    for n in (2..=12).step_by(2) {
        for omega in linspace(0.1, 3.0, 9) {
            let chain = projective_distribution(omega, StateVector::mixed(), n).unwrap().probabilities();
            let gibbs = ising_nn_distribution(omega, n).unwrap();
            assert!(max_abs_diff(&chain, &gibbs) <= 1e-12, "n {n} omega {omega}");
        }
    }
}

#[test]
fn monte_carlo_converges_to_dp() {
    let p = ModelParams::new(0.9, 0.6, 0.0, 20, StateVector::plus_x()).unwrap();
    let exact = fm_distribution(&p).unwrap().probabilities();
    let tv: Vec<f64> = [1_000u64, 10_000, 100_000]
        .iter()
        .map(|&m| total_variation(&monte_carlo_sample(&p, m, 11).unwrap().fm_frequencies(), &exact))
        .collect();
    assert!(tv[0] > tv[1] && tv[1] > tv[2], "{tv:?}");
    assert!(tv[2] <= 0.02, "{tv:?}");
}

#[test]
fn monte_carlo_afm_histogram_tracks_dp() {
    let p = ModelParams::new(1.3, 2.9, 0.0, 16, StateVector::plus_x()).unwrap();
    let h = monte_carlo_sample(&p, 100_000, 5).unwrap();
    let tv = total_variation(&h.afm_frequencies(), &afm_distribution(&p).unwrap().probabilities());
    assert!(tv <= 0.02, "{tv}");
}

#[test]
fn long_range_gibbs_approaches_dp_as_theta_shrinks() {
    for omega in [0.2, 0.8] {
        let tv: Vec<f64> = [0.1, 0.05, 0.02]
            .iter()
            .map(|&theta| {
                let p = ModelParams::new(theta, omega, 0.0, 12, StateVector::mixed()).unwrap();
                total_variation(
                    &fm_distribution(&p).unwrap().probabilities(),
                    &long_range_gibbs(theta, omega, 12).unwrap(),
                )
            })
            .collect();
        assert!(tv[0] > tv[1] && tv[1] > tv[2], "omega {omega}: {tv:?}");
    }
}
