//! Exhaustive enumeration of all `2^N` outcome records.
//!
//! Each record's conditioned vector is the ordered product of branch
//! matrices applied to the initial state. Records are binned by `n_up` and
//! by `n_A`. Work is split by the first few outcomes; partial tables are
//! summed in prefix order so the result does not depend on the thread count.

use rayon::prelude::*;

use crate::dp::{ConditionedDistribution, OrderKind};
use crate::error::{Error, Result};
use crate::qubit::{ModelParams, Outcome, Propagator, StateVector};

pub const MAX_ENUMERATION: usize = 20;

const PREFIX_DEPTH: usize = 8;

#[derive(Debug, Clone)]
pub struct Enumeration {
    pub fm: ConditionedDistribution,
    /// Present only for even `N`.
    pub afm: Option<ConditionedDistribution>,
}

pub fn brute_force(params: &ModelParams) -> Result<Enumeration> {
    params.validate()?;
    enumerate_records(&params.propagator()?, params.initial, params.n_meas)
}

pub fn brute_force_fm(params: &ModelParams) -> Result<ConditionedDistribution> {
    Ok(brute_force(params)?.fm)
}

pub fn brute_force_afm(params: &ModelParams) -> Result<ConditionedDistribution> {
    brute_force(params)?
        .afm
        .ok_or(Error::OddMeasurementCount(params.n_meas))
}

struct Tables {
    fm: Vec<StateVector>,
    afm: Vec<StateVector>,
}

struct Walker<'a> {
    prop: &'a Propagator,
    n: usize,
    tables: Tables,
}

impl Walker<'_> {
    fn descend(&mut self, state: StateVector, pos: usize, n_up: usize, n_a: i64, prev: Outcome) {
        if pos == self.n {
            self.tables.fm[n_up] += state;
            if self.n.is_multiple_of(2) {
                let idx = (n_a + (self.n / 2) as i64) as usize;
                self.tables.afm[idx] += state;
            }
            return;
        }
        for alpha in Outcome::BOTH {
            let next = self.prop.step(&state, alpha);
            let up = n_up + usize::from(alpha == Outcome::Up);
            let a = n_a + cell_delta(pos, prev, alpha);
            self.descend(next, pos + 1, up, a, alpha);
        }
    }
}

/// Change of `n_A` when outcome `alpha` lands at 0-based position `pos`.
fn cell_delta(pos: usize, prev: Outcome, alpha: Outcome) -> i64 {
    if pos.is_multiple_of(2) {
        return 0;
    }
    match (prev, alpha) {
        (Outcome::Up, Outcome::Down) => 1,
        (Outcome::Down, Outcome::Up) => -1,
        _ => 0,
    }
}

/// Enumerates every record of length `n` (any `n <= 20`, odd allowed).
pub fn enumerate_records(prop: &Propagator, initial: StateVector, n: usize) -> Result<Enumeration> {
    if n > MAX_ENUMERATION {
        return Err(Error::SizeLimit {
            n,
            max: MAX_ENUMERATION,
        });
    }
    let depth = n.min(PREFIX_DEPTH);
    let partials: Vec<Tables> = (0..1usize << depth)
        .into_par_iter()
        .map(|prefix| {
            let mut state = initial;
            let mut n_up = 0;
            let mut n_a = 0;
            let mut prev = Outcome::Up;
            for pos in 0..depth {
                let alpha = if prefix >> pos & 1 == 1 {
                    Outcome::Up
                } else {
                    Outcome::Down
                };
                state = prop.step(&state, alpha);
                n_up += usize::from(alpha == Outcome::Up);
                n_a += cell_delta(pos, prev, alpha);
                prev = alpha;
            }
            let mut walker = Walker {
                prop,
                n,
                tables: Tables {
                    fm: vec![StateVector::ZERO; n + 1],
                    afm: vec![StateVector::ZERO; n + 1],
                },
            };
            walker.descend(state, depth, n_up, n_a, prev);
            walker.tables
        })
        .collect();

    let mut fm = vec![StateVector::ZERO; n + 1];
    let mut afm = vec![StateVector::ZERO; n + 1];
    for part in &partials {
        for (acc, v) in fm.iter_mut().zip(&part.fm) {
            *acc += *v;
        }
        for (acc, v) in afm.iter_mut().zip(&part.afm) {
            *acc += *v;
        }
    }
    Ok(Enumeration {
        fm: ConditionedDistribution::new(OrderKind::Ferro, n, fm),
        afm: n.is_multiple_of(2).then(|| ConditionedDistribution::new(OrderKind::AntiFerro, n, afm)),
    })
}
