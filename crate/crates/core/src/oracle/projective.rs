//! Projective-measurement limit as a two-state Markov chain.
//!
//! At `theta = pi/2` each outcome collapses the qubit onto `+-z`, so the
//! next outcome depends only on the previous one: it repeats with
//! probability `(1 + cos omega)/2`.

use crate::dp::{ConditionedDistribution, OrderKind};
use crate::error::Result;
use crate::qubit::{precess, StateVector};

/// Exact FM distribution of the projective chain, with the full conditioned
/// vector `(w, +-w, 0)` per bin.
pub fn projective_distribution(
    omega: f64,
    initial: StateVector,
    n: usize,
) -> Result<ConditionedDistribution> {
    crate::qubit::validate_angles(std::f64::consts::FRAC_PI_2, omega, 0.0)?;
    initial.validate_initial()?;
    let mut table = vec![StateVector::ZERO; n + 1];
    if n == 0 {
        table[0] = initial;
        return Ok(ConditionedDistribution::new(OrderKind::Ferro, 0, table));
    }
    let stay = 0.5 * (1.0 + omega.cos());
    let flip = 0.5 * (1.0 - omega.cos());
    let first_up = 0.5 * (1.0 + precess(&initial, omega).rhoz);

    // last_up[k] / last_down[k]: weight of records with k ups ending up/down.
    let mut last_up = vec![0.0; n + 1];
    let mut last_down = vec![0.0; n + 1];
    last_up[1] = first_up;
    last_down[0] = 1.0 - first_up;
    for m in 1..n {
        for k in (0..=m + 1).rev() {
            let from_up_stay = if k >= 1 { last_up[k - 1] * stay } else { 0.0 };
            let from_down_flip = if k >= 1 { last_down[k - 1] * flip } else { 0.0 };
            let new_up = from_up_stay + from_down_flip;
            let new_down = last_up[k] * flip + last_down[k] * stay;
            last_up[k] = new_up;
            last_down[k] = new_down;
        }
    }
    for (k, cell) in table.iter_mut().enumerate() {
        let w = last_up[k] + last_down[k];
        *cell = StateVector::new(w, last_up[k] - last_down[k], 0.0);
    }
    Ok(ConditionedDistribution::new(OrderKind::Ferro, n, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{binomial_pmf, max_abs_diff};

    #[test]
    fn static_field_freezes_record() {
        let d = projective_distribution(0.0, StateVector::new(1.0, 0.2, 0.0), 6).unwrap();
        let p = d.probabilities();
        assert!((p[6] - 0.6).abs() < 1e-15);
        assert!((p[0] - 0.4).abs() < 1e-15);
        assert!(p[1..6].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn quarter_turn_gives_fair_coin() {
        let d = projective_distribution(std::f64::consts::FRAC_PI_2, StateVector::plus_x(), 10)
            .unwrap();
        // First outcome is certain (down) after precessing +x, the rest are fair.
        let mut expect = binomial_pmf(9, 0.5);
        expect.push(0.0);
        assert!(max_abs_diff(&d.probabilities(), &expect) < 1e-15);

        let mixed = projective_distribution(std::f64::consts::FRAC_PI_2, StateVector::mixed(), 10)
            .unwrap();
        assert!(max_abs_diff(&mixed.probabilities(), &binomial_pmf(10, 0.5)) < 1e-15);
    }
}
