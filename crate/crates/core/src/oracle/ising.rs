//! Ising-chain reference distributions.
//!
//! Two mappings of the outcome record onto spins `alpha_k = +-1`:
//! the exact nearest-neighbour chain of the projective limit, with
//! `tanh(beta J) = cos(omega)`, and the long-range chain of the weak
//! measurement limit with couplings `theta^2 cos[(k - j - 1) omega]`.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// How close `|cos omega|` may get to one before `beta J` counts as infinite.
const SINGULAR_EPS: f64 = 1e-12;

pub const MAX_LONG_RANGE_SITES: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub enum Coupling {
    /// `beta * J` of `H = -J sum_k alpha_k alpha_{k-1}`.
    NearestNeighbor(f64),
    /// Symmetric `J_jk` (already multiplied by `beta`), zero diagonal.
    LongRange(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsingSpec {
    pub n_sites: usize,
    pub coupling: Coupling,
}

/// `beta J = atanh(cos omega)`; infinite at `omega = 0` and `omega = pi`.
pub fn nearest_neighbor_beta_j(omega: f64) -> Result<f64> {
    let c = omega.cos();
    if 1.0 - c.abs() < SINGULAR_EPS {
        return Err(Error::SingularCoupling(omega));
    }
    Ok(c.atanh())
}

impl IsingSpec {
    pub fn nearest_neighbor(omega: f64, n_sites: usize) -> Result<Self> {
        Ok(Self {
            n_sites,
            coupling: Coupling::NearestNeighbor(nearest_neighbor_beta_j(omega)?),
        })
    }

    pub fn long_range(theta: f64, omega: f64, n_sites: usize) -> Self {
        let t2 = theta * theta;
        let matrix = (0..n_sites)
            .map(|j| {
                (0..n_sites)
                    .map(|k| {
                        if j == k {
                            0.0
                        } else {
                            let lag = j.abs_diff(k) as f64;
                            t2 * ((lag - 1.0) * omega).cos()
                        }
                    })
                    .collect()
            })
            .collect();
        Self {
            n_sites,
            coupling: Coupling::LongRange(matrix),
        }
    }

    /// `-beta H` for one configuration.
    pub fn log_weight(&self, spins: &[i8]) -> f64 {
        assert_eq!(spins.len(), self.n_sites);
        match &self.coupling {
            Coupling::NearestNeighbor(bj) => spins
                .windows(2)
                .map(|w| bj * f64::from(w[0] * w[1]))
                .sum(),
            Coupling::LongRange(j) => {
                let mut acc = 0.0;
                for a in 0..spins.len() {
                    for b in a + 1..spins.len() {
                        acc += j[a][b] * f64::from(spins[a] * spins[b]);
                    }
                }
                acc
            }
        }
    }
}

/// Closed-form partition function of the open nearest-neighbour chain with a
/// free first spin: `2 (2 cosh beta J)^(N-1)`.
pub fn nn_partition_function(beta_j: f64, n: usize) -> f64 {
    2.0 * (2.0 * beta_j.cosh()).powi(n as i32 - 1)
}

/// Gibbs distribution of the number of up spins in the nearest-neighbour
/// chain, by a counting transfer-matrix sum. The infinite-coupling points
/// `omega = 0` and `omega = pi` are returned as their frozen and strictly
/// alternating limits.
pub fn ising_nn_distribution(omega: f64, n: usize) -> Result<Vec<f64>> {
    crate::qubit::validate_angles(0.0, omega, 0.0)?;
    if n == 0 {
        return Err(Error::InvalidParameter("chain needs at least one site".into()));
    }
    let beta_j = match nearest_neighbor_beta_j(omega) {
        Ok(bj) => bj,
        Err(Error::SingularCoupling(_)) => return Ok(singular_limit(omega, n)),
        Err(e) => return Err(e),
    };
    // Bond weights rescaled by exp(-|beta J|) so the larger one is exactly 1.
    let same = (beta_j - beta_j.abs()).exp();
    let diff = (-beta_j - beta_j.abs()).exp();

    let mut end_up = vec![0.0; n + 1];
    let mut end_down = vec![0.0; n + 1];
    end_up[1] = 1.0;
    end_down[0] = 1.0;
    for m in 1..n {
        for k in (0..=m + 1).rev() {
            let (prev_up, prev_down) = if k >= 1 {
                (end_up[k - 1], end_down[k - 1])
            } else {
                (0.0, 0.0)
            };
            let up = prev_up * same + prev_down * diff;
            let down = end_up[k] * diff + end_down[k] * same;
            end_up[k] = up;
            end_down[k] = down;
        }
    }
    let weights: Vec<f64> = end_up.iter().zip(&end_down).map(|(a, b)| a + b).collect();
    let z: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / z).collect())
}

fn singular_limit(omega: f64, n: usize) -> Vec<f64> {
    let mut dist = vec![0.0; n + 1];
    if omega.cos() > 0.0 {
        dist[0] = 0.5;
        dist[n] += 0.5;
    } else {
        dist[n / 2] += 0.5;
        dist[n.div_ceil(2)] += 0.5;
    }
    dist
}

/// Exact Gibbs FM marginal of the long-range chain by enumeration of all
/// `2^N` configurations, normalized by the full partition function.
pub fn long_range_gibbs(theta: f64, omega: f64, n: usize) -> Result<Vec<f64>> {
    if n > MAX_LONG_RANGE_SITES {
        return Err(Error::SizeLimit {
            n,
            max: MAX_LONG_RANGE_SITES,
        });
    }
    if n == 0 {
        return Err(Error::InvalidParameter("chain needs at least one site".into()));
    }
    let spec = IsingSpec::long_range(theta, omega, n);
    let Coupling::LongRange(j) = &spec.coupling else {
        unreachable!()
    };
    // Offset keeps every exponent <= 0.
    let bound: f64 = j.iter().flatten().map(|v| v.abs()).sum::<f64>() / 2.0;

    let depth = n.min(8);
    let partials: Vec<Vec<f64>> = (0..1usize << depth)
        .into_par_iter()
        .map(|prefix| {
            let mut spins = vec![0i8; n];
            for (pos, s) in spins.iter_mut().enumerate().take(depth) {
                *s = if prefix >> pos & 1 == 1 { 1 } else { -1 };
            }
            let mut hist = vec![0.0; n + 1];
            let energy = prefix_energy(j, &spins, depth);
            fill_from(j, &mut spins, depth, energy, bound, &mut hist);
            hist
        })
        .collect();

    let mut hist = vec![0.0; n + 1];
    for part in &partials {
        for (acc, v) in hist.iter_mut().zip(part) {
            *acc += v;
        }
    }
    let z: f64 = hist.iter().sum();
    Ok(hist.into_iter().map(|w| w / z).collect())
}

fn prefix_energy(j: &[Vec<f64>], spins: &[i8], depth: usize) -> f64 {
    let mut e = 0.0;
    for a in 0..depth {
        for b in a + 1..depth {
            e += j[a][b] * f64::from(spins[a] * spins[b]);
        }
    }
    e
}

fn fill_from(j: &[Vec<f64>], spins: &mut [i8], pos: usize, energy: f64, bound: f64, hist: &mut [f64]) {
    let n = spins.len();
    if pos == n {
        let ups = spins.iter().filter(|&&s| s == 1).count();
        hist[ups] += (energy - bound).exp();
        return;
    }
    let field: f64 = (0..pos).map(|a| j[a][pos] * f64::from(spins[a])).sum();
    for s in [1i8, -1] {
        spins[pos] = s;
        fill_from(j, spins, pos + 1, energy + field * f64::from(s), bound, hist);
    }
    spins[pos] = 0;
}

/// Coupling matrix of the long-range chain and the oscillation period of
/// its longest-range bond.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingProfile {
    pub matrix: Vec<Vec<f64>>,
    /// `J_{1,N} = theta^2 cos[(N - 2) omega]`.
    pub longest_range: f64,
    /// `2 pi / (N - 2)`.
    pub period: f64,
}

pub fn coupling_profile(theta: f64, omega: f64, n: usize) -> Result<CouplingProfile> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "coupling profile needs n >= 3, got {n}"
        )));
    }
    let spec = IsingSpec::long_range(theta, omega, n);
    let Coupling::LongRange(matrix) = spec.coupling else {
        unreachable!()
    };
    Ok(CouplingProfile {
        longest_range: matrix[0][n - 1],
        matrix,
        period: std::f64::consts::TAU / (n - 2) as f64,
    })
}
