//! Sequential-collapse Monte Carlo over outcome records.
//!
//! Trajectory `i` draws from its own ChaCha8 stream `i` under the run seed,
//! so a histogram is a pure function of `(params, n_traj, seed)` no matter
//! how the trajectories are scheduled across threads. Floating-point sums
//! are accumulated per fixed block of trajectories and merged in block
//! order for the same reason.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dp::{ConditionedDistribution, OrderKind};
use crate::error::{Error, Result};
use crate::qubit::{ModelParams, Outcome, Propagator, StateVector};

const BLOCK: u64 = 4096;

/// Recorded in output metadata.
pub const GENERATOR: &str = "chacha8, seed_from_u64(seed), stream = trajectory index";

#[derive(Debug, Clone, PartialEq)]
pub struct SampleHistograms {
    pub n_meas: usize,
    pub n_traj: u64,
    pub seed: u64,
    /// Counts indexed by `n_up`.
    pub fm_counts: Vec<u64>,
    /// Counts indexed by `n_A + N/2`.
    pub afm_counts: Vec<u64>,
    /// Sum of normalized final states per FM bin.
    pub fm_state_sums: Vec<StateVector>,
    pub afm_state_sums: Vec<StateVector>,
}

impl SampleHistograms {
    fn empty(n: usize, n_traj: u64, seed: u64) -> Self {
        Self {
            n_meas: n,
            n_traj,
            seed,
            fm_counts: vec![0; n + 1],
            afm_counts: vec![0; n + 1],
            fm_state_sums: vec![StateVector::ZERO; n + 1],
            afm_state_sums: vec![StateVector::ZERO; n + 1],
        }
    }

    fn merge(mut self, other: &SampleHistograms) -> Self {
        for (a, b) in self.fm_counts.iter_mut().zip(&other.fm_counts) {
            *a += b;
        }
        for (a, b) in self.afm_counts.iter_mut().zip(&other.afm_counts) {
            *a += b;
        }
        for (a, b) in self.fm_state_sums.iter_mut().zip(&other.fm_state_sums) {
            *a += *b;
        }
        for (a, b) in self.afm_state_sums.iter_mut().zip(&other.afm_state_sums) {
            *a += *b;
        }
        self
    }

    /// Unbiased estimate of the conditioned vectors: the mean over
    /// trajectories of the final state times the bin indicator.
    pub fn estimate(&self, kind: OrderKind) -> ConditionedDistribution {
        let sums = match kind {
            OrderKind::Ferro => &self.fm_state_sums,
            OrderKind::AntiFerro => &self.afm_state_sums,
        };
        let scale = 1.0 / self.n_traj as f64;
        ConditionedDistribution::new(kind, self.n_meas, sums.iter().map(|&s| s * scale).collect())
    }

    pub fn counts(&self, kind: OrderKind) -> &[u64] {
        match kind {
            OrderKind::Ferro => &self.fm_counts,
            OrderKind::AntiFerro => &self.afm_counts,
        }
    }

    pub fn fm_frequencies(&self) -> Vec<f64> {
        frequencies(&self.fm_counts, self.n_traj)
    }

    pub fn afm_frequencies(&self) -> Vec<f64> {
        frequencies(&self.afm_counts, self.n_traj)
    }

    pub fn mean_up_count(&self) -> f64 {
        self.fm_counts
            .iter()
            .enumerate()
            .map(|(k, &c)| k as f64 * c as f64)
            .sum::<f64>()
            / self.n_traj as f64
    }
}

fn frequencies(counts: &[u64], n_traj: u64) -> Vec<f64> {
    counts.iter().map(|&c| c as f64 / n_traj as f64).collect()
}

pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One normalized trajectory; returns `(n_up, n_A, final state)`.
fn run_trajectory(
    prop: &Propagator,
    params: &ModelParams,
    rng: &mut ChaCha8Rng,
) -> Result<(usize, i64, StateVector)> {
    let mut state = params.initial;
    let mut n_up = 0usize;
    let mut n_a = 0i64;
    let mut prev = Outcome::Up;
    for pos in 0..params.n_meas {
        let up = prop.step(&state, Outcome::Up);
        let p_up = up.rho0 / state.rho0;
        let u: f64 = rng.random();
        let (alpha, next) = if u < p_up {
            (Outcome::Up, up)
        } else {
            (Outcome::Down, prop.step(&state, Outcome::Down))
        };
        state = next.normalized()?;
        if alpha == Outcome::Up {
            n_up += 1;
        }
        if pos % 2 == 1 {
            n_a += match (prev, alpha) {
                (Outcome::Up, Outcome::Down) => 1,
                (Outcome::Down, Outcome::Up) => -1,
                _ => 0,
            };
        }
        prev = alpha;
    }
    Ok((n_up, n_a, state))
}

pub fn monte_carlo_sample(params: &ModelParams, n_traj: u64, seed: u64) -> Result<SampleHistograms> {
    params.validate()?;
    if n_traj == 0 {
        return Err(Error::InvalidParameter("n_traj must be at least 1".into()));
    }
    let prop = params.propagator()?;
    let n = params.n_meas;
    let half = (n / 2) as i64;
    let blocks: Vec<SampleHistograms> = (0..n_traj.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut hist = SampleHistograms::empty(n, n_traj, seed);
            for index in b * BLOCK..((b + 1) * BLOCK).min(n_traj) {
                let mut rng = trajectory_rng(seed, index);
                let (n_up, n_a, state) = run_trajectory(&prop, params, &mut rng)?;
                let a = (n_a + half) as usize;
                hist.fm_counts[n_up] += 1;
                hist.afm_counts[a] += 1;
                hist.fm_state_sums[n_up] += state;
                hist.afm_state_sums[a] += state;
            }
            Ok(hist)
        })
        .collect::<Result<_>>()?;
    Ok(blocks
        .iter()
        .fold(SampleHistograms::empty(n, n_traj, seed), SampleHistograms::merge))
}
