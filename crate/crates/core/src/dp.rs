//! Exact outcome-count distributions by dynamic programming.
//!
//! Instead of enumerating all `2^N` outcome records, the conditioned state
//! vectors are grouped by the order-parameter count and propagated together.
//! The ferromagnetic table is indexed by the number of up outcomes `n_up`;
//! the anti-ferromagnetic table by `n_A = n_updown - n_downup` over the
//! two-measurement cells `(2k-1, 2k)`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::qubit::{EvolvingMatrix, ModelParams, Outcome, Propagator, StateVector};

/// Roundoff allowance below zero before a weight counts as a real failure.
pub const NEGATIVE_WEIGHT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderKind {
    Ferro,
    AntiFerro,
}

impl OrderKind {
    pub fn name(self) -> &'static str {
        match self {
            OrderKind::Ferro => "fm",
            OrderKind::AntiFerro => "afm",
        }
    }
}

/// Conditioned state vectors indexed by an outcome count.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionedDistribution {
    pub kind: OrderKind,
    pub n_meas: usize,
    /// FM: index is `n_up` in `0..=N`. AFM: index is `n_A + N/2`.
    pub table: Vec<StateVector>,
}

impl ConditionedDistribution {
    pub fn new(kind: OrderKind, n_meas: usize, table: Vec<StateVector>) -> Self {
        Self {
            kind,
            n_meas,
            table,
        }
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.table.iter().map(|p| p.rho0).collect()
    }

    pub fn total(&self) -> f64 {
        self.table.iter().map(|p| p.rho0).sum()
    }

    /// Signed count for a table index: `n_up` for FM, `n_A` for AFM.
    pub fn count(&self, index: usize) -> i64 {
        match self.kind {
            OrderKind::Ferro => index as i64,
            OrderKind::AntiFerro => index as i64 - (self.n_meas / 2) as i64,
        }
    }

    /// Order parameter `M_F = (2 n_up - N)/N` or `M_AF = n_A / (N/2)`.
    pub fn order_param(&self, index: usize) -> f64 {
        let n = self.n_meas as f64;
        match self.kind {
            OrderKind::Ferro => (2.0 * index as f64 - n) / n,
            OrderKind::AntiFerro => self.count(index) as f64 / (n / 2.0),
        }
    }

    /// Index of the zero-order bin. Only exists for even `N`.
    pub fn zero_index(&self) -> usize {
        self.n_meas / 2
    }

    /// Index of the largest weight. Ties within `1e-12` of the maximum are
    /// resolved toward the zero bin, otherwise toward the lowest index.
    pub fn argmax(&self) -> usize {
        let probs = self.probabilities();
        let (mut best, mut best_val) = (0, f64::NEG_INFINITY);
        for (i, &v) in probs.iter().enumerate() {
            if v > best_val {
                best = i;
                best_val = v;
            }
        }
        let zero = self.zero_index();
        if zero < probs.len() && probs[zero] >= best_val - 1e-12 {
            return zero;
        }
        best
    }

    pub fn max_abs_diff(&self, other: &ConditionedDistribution) -> f64 {
        assert_eq!(self.table.len(), other.table.len());
        self.table
            .iter()
            .zip(&other.table)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    /// Clamps roundoff negatives to zero; rejects anything more negative.
    pub(crate) fn clamp_negatives(mut self) -> Result<Self> {
        for (i, p) in self.table.iter_mut().enumerate() {
            if p.rho0 < -NEGATIVE_WEIGHT_TOLERANCE {
                return Err(Error::NumericFailure(format!(
                    "negative probability {:e} at {} index {i}",
                    p.rho0,
                    self.kind.name()
                )));
            }
            if p.rho0 < 0.0 {
                *p = StateVector::ZERO;
            }
        }
        Ok(self)
    }

    /// CSV rows `order_param,probability,rho0,rhoz,rhox`. The `probability`
    /// column repeats `rho0` so plotting scripts need not know the layout.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "order_param,probability,rho0,rhoz,rhox")?;
        for (i, p) in self.table.iter().enumerate() {
            writeln!(
                w,
                "{},{:e},{:e},{:e},{:e}",
                self.order_param(i),
                p.rho0,
                p.rho0,
                p.rhoz,
                p.rhox
            )?;
        }
        Ok(())
    }
}

/// Distribution of the number of up outcomes after `N` measurements.
pub fn fm_distribution(params: &ModelParams) -> Result<ConditionedDistribution> {
    params.validate()?;
    let prop = params.propagator()?;
    fm_table(&prop, params.initial, params.n_meas).clamp_negatives()
}

/// FM recursion for any `n`, including odd counts. No validation or clamping.
pub(crate) fn fm_table(prop: &Propagator, initial: StateVector, n: usize) -> ConditionedDistribution {
    let up = prop.matrix(Outcome::Up);
    let down = prop.matrix(Outcome::Down);
    let mut table = vec![StateVector::ZERO; n + 1];
    table[0] = initial;
    // In-place update from the top: slot k still holds step-m data for k and k-1.
    for m in 0..n {
        table[m + 1] = up.apply(&table[m]);
        for k in (1..=m).rev() {
            table[k] = up.apply(&table[k - 1]) + down.apply(&table[k]);
        }
        table[0] = down.apply(&table[0]);
    }
    ConditionedDistribution::new(OrderKind::Ferro, n, table)
}

/// Propagators for one two-measurement cell.
#[derive(Debug, Clone, Copy)]
pub struct CellPropagators {
    /// Both outcomes equal: up-up plus down-down.
    pub parallel: EvolvingMatrix,
    /// Up then down, raising `n_A`.
    pub up_down: EvolvingMatrix,
    /// Down then up, lowering `n_A`.
    pub down_up: EvolvingMatrix,
}

impl CellPropagators {
    pub fn new(prop: &Propagator) -> Self {
        let up = prop.matrix(Outcome::Up);
        let down = prop.matrix(Outcome::Down);
        Self {
            parallel: up.then_after(&up).plus(&down.then_after(&down)),
            up_down: down.then_after(&up),
            down_up: up.then_after(&down),
        }
    }
}

/// Distribution of `n_A` over the `N/2` measurement cells.
pub fn afm_distribution(params: &ModelParams) -> Result<ConditionedDistribution> {
    params.validate()?;
    let prop = params.propagator()?;
    afm_table(&prop, params.initial, params.n_meas)?.clamp_negatives()
}

pub(crate) fn afm_table(
    prop: &Propagator,
    initial: StateVector,
    n: usize,
) -> Result<ConditionedDistribution> {
    if !n.is_multiple_of(2) {
        return Err(Error::OddMeasurementCount(n));
    }
    let cells = n / 2;
    let ops = CellPropagators::new(prop);
    let width = n + 1;
    let mut cur = vec![StateVector::ZERO; width];
    let mut next = vec![StateVector::ZERO; width];
    cur[cells] = initial;
    for m in 0..cells {
        // After m cells only |n_A| <= m is populated.
        let lo = cells - m;
        let hi = cells + m;
        next[lo - 1..=hi + 1].fill(StateVector::ZERO);
        for k in lo..=hi {
            let p = cur[k];
            next[k] += ops.parallel.apply(&p);
            next[k + 1] += ops.up_down.apply(&p);
            next[k - 1] += ops.down_up.apply(&p);
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(ConditionedDistribution::new(OrderKind::AntiFerro, n, cur))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn params(theta: f64, omega: f64, n: usize, p0: StateVector) -> ModelParams {
        ModelParams::new(theta, omega, 0.0, n, p0).unwrap()
    }

    fn assert_probs(dist: &ConditionedDistribution, expect: &[f64], tol: f64) {
        let got = dist.probabilities();
        assert_eq!(got.len(), expect.len());
        for (g, e) in got.iter().zip(expect) {
            assert!((g - e).abs() <= tol, "{got:?} vs {expect:?}");
        }
    }

    #[test]
    fn fm_unbiased_coin_without_measurement_strength() {
        let d = fm_distribution(&params(0.0, 1.3, 4, StateVector::plus_x())).unwrap();
        let e: Vec<f64> = [1.0, 4.0, 6.0, 4.0, 1.0].iter().map(|v| v / 16.0).collect();
        assert_probs(&d, &e, 1e-15);
    }

    #[test]
    fn fm_projective_frozen() {
        let d = fm_distribution(&params(FRAC_PI_2, 0.0, 10, StateVector::plus_x())).unwrap();
        let mut e = vec![0.0; 11];
        e[0] = 0.5;
        e[10] = 0.5;
        assert_probs(&d, &e, 1e-15);
    }

    #[test]
    fn afm_projective_alternating() {
        let d = afm_distribution(&params(FRAC_PI_2, PI, 8, StateVector::plus_x())).unwrap();
        let mut e = vec![0.0; 9];
        e[0] = 0.5;
        e[8] = 0.5;
        assert_probs(&d, &e, 1e-15);
        assert_eq!(d.count(0), -4);
        assert_eq!(d.order_param(8), 1.0);
    }

    #[test]
    fn afm_trinomial_without_measurement_strength() {
        let d = afm_distribution(&params(0.0, 0.4, 4, StateVector::plus_x())).unwrap();
        let e: Vec<f64> = [1.0, 4.0, 6.0, 4.0, 1.0].iter().map(|v| v / 16.0).collect();
        assert_probs(&d, &e, 1e-15);
    }

    #[test]
    fn afm_rejects_odd_n() {
        let prop = Propagator::new(0.3, 0.3, 0.0).unwrap();
        assert!(matches!(
            afm_table(&prop, StateVector::mixed(), 5),
            Err(Error::OddMeasurementCount(5))
        ));
    }

    #[test]
    fn argmax_peak_structure() {
        let theta = 2.0 * PI / 5.0;
        let fm = |w: f64| fm_distribution(&params(theta, w, 100, StateVector::plus_x())).unwrap();
        let two_peak = fm(0.1);
        assert_ne!(two_peak.argmax(), two_peak.zero_index());
        let single = fm(1.5);
        assert_eq!(single.argmax(), single.zero_index());
        let afm = afm_distribution(&params(theta, PI, 100, StateVector::plus_x())).unwrap();
        assert_ne!(afm.argmax(), afm.zero_index());
    }

    #[test]
    fn normalization_at_large_n() {
        let p = ModelParams::new(0.7, 1.1, 0.0, 2000, StateVector::plus_x()).unwrap();
        assert!((fm_distribution(&p).unwrap().total() - 1.0).abs() < 1e-10);
        assert!((afm_distribution(&p).unwrap().total() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn entries_stay_in_bloch_cone() {
        let p = ModelParams::new(0.9, 0.4, 0.02, 200, StateVector::new(1.0, 0.6, 0.8)).unwrap();
        for d in [fm_distribution(&p).unwrap(), afm_distribution(&p).unwrap()] {
            for e in &d.table {
                assert!(e.rho0 >= 0.0);
                assert!(e.bloch_norm_sq() <= e.rho0 * e.rho0 + 1e-12);
            }
        }
    }

    #[test]
    fn mixed_state_distributions_are_symmetric() {
        for (theta, omega) in [(0.3, 0.2), (1.2, 2.7), (0.8, 1.0)] {
            let p = params(theta, omega, 60, StateVector::mixed());
            for d in [fm_distribution(&p).unwrap(), afm_distribution(&p).unwrap()] {
                let probs = d.probabilities();
                let n = probs.len();
                for i in 0..n {
                    assert!((probs[i] - probs[n - 1 - i]).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn argmax_displacement_grows_with_theta() {
        let mut last = 0usize;
        for theta in [0.1, 0.3, 0.6, 1.0] {
            let d = fm_distribution(&params(theta, 0.0, 500, StateVector::plus_x())).unwrap();
            let disp = d.argmax().abs_diff(d.zero_index());
            assert!(disp >= last, "theta {theta}: {disp} < {last}");
            last = disp;
        }
        assert!(last > 0);
    }

    #[test]
    fn clamp_rejects_large_negative() {
        let d = ConditionedDistribution::new(
            OrderKind::Ferro,
            2,
            vec![
                StateVector::new(-1e-13, 0.0, 0.0),
                StateVector::new(1.0, 0.0, 0.0),
                StateVector::ZERO,
            ],
        );
        let ok = d.clone().clamp_negatives().unwrap();
        assert_eq!(ok.table[0], StateVector::ZERO);
        let mut bad = d;
        bad.table[0].rho0 = -1e-9;
        assert!(matches!(bad.clamp_negatives(), Err(Error::NumericFailure(_))));
    }

    #[test]
    fn csv_layout() {
        let d = fm_distribution(&params(0.0, 0.0, 2, StateVector::mixed())).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "order_param,probability,rho0,rhoz,rhox");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("-1,2.5e-1,"));
    }
}
