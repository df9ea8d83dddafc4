//! Independent reference implementations used to check the DP recursions
//! and the counting-statistics formulas.

pub mod brute;
pub mod ising;
pub mod monte_carlo;
pub mod projective;

pub use brute::{brute_force, brute_force_afm, brute_force_fm, enumerate_records, Enumeration};
pub use ising::{
    coupling_profile, ising_nn_distribution, long_range_gibbs, nearest_neighbor_beta_j,
    CouplingProfile, IsingSpec,
};
pub use monte_carlo::{monte_carlo_sample, SampleHistograms};
pub use projective::projective_distribution;
