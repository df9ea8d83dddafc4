//! Qubit state representation and single-step propagators.
//!
//! The qubit precesses about the transverse `y` axis, so the `y` Bloch
//! component never changes and is fixed to zero. A state is carried as the
//! three-vector `(rho0, rhoz, rhox)`. Conditioned (unnormalized) vectors keep
//! the probability weight of an outcome record in `rho0`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, AddAssign, Mul, Neg};

use crate::error::{Error, Result};

/// Slack allowed on the closed parameter intervals, so that `PI` and
/// `FRAC_PI_2` computed in floating point are accepted.
const RANGE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateVector {
    pub rho0: f64,
    pub rhoz: f64,
    pub rhox: f64,
}

impl StateVector {
    pub const ZERO: StateVector = StateVector {
        rho0: 0.0,
        rhoz: 0.0,
        rhox: 0.0,
    };

    pub const fn new(rho0: f64, rhoz: f64, rhox: f64) -> Self {
        Self { rho0, rhoz, rhox }
    }

    /// Maximally mixed state `(1, 0, 0)`.
    pub const fn mixed() -> Self {
        Self::new(1.0, 0.0, 0.0)
    }

    /// Pure state along `+x`, `(1, 0, 1)`.
    pub const fn plus_x() -> Self {
        Self::new(1.0, 0.0, 1.0)
    }

    pub fn bloch_norm_sq(&self) -> f64 {
        self.rhoz * self.rhoz + self.rhox * self.rhox
    }

    /// Checks the physical-state cone `rhoz^2 + rhox^2 <= rho0^2` and
    /// `0 <= rho0 <= 1`, both within `tol`.
    pub fn is_physical(&self, tol: f64) -> bool {
        self.rho0 >= -tol
            && self.rho0 <= 1.0 + tol
            && self.bloch_norm_sq() <= self.rho0 * self.rho0 + tol
    }

    /// Divides every component by `rho0`.
    pub fn normalized(&self) -> Result<Self> {
        if self.rho0 <= RANGE_SLACK {
            return Err(Error::DegenerateState(self.rho0));
        }
        Ok(*self * (1.0 / self.rho0))
    }

    /// Component-wise sign flip of the Bloch part.
    pub fn spin_flipped(&self) -> Self {
        Self::new(self.rho0, -self.rhoz, -self.rhox)
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        (self.rho0 - other.rho0)
            .abs()
            .max((self.rhoz - other.rhoz).abs())
            .max((self.rhox - other.rhox).abs())
    }

    /// Validates a state used as the starting point of an experiment.
    pub fn validate_initial(&self) -> Result<()> {
        if !self.rho0.is_finite() || !self.rhoz.is_finite() || !self.rhox.is_finite() {
            return Err(Error::InvalidParameter(
                "initial state must be finite".into(),
            ));
        }
        if (self.rho0 - 1.0).abs() > RANGE_SLACK {
            return Err(Error::InvalidParameter(format!(
                "initial state must have rho0 = 1, got {}",
                self.rho0
            )));
        }
        if self.bloch_norm_sq() > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "initial Bloch vector has length {} > 1",
                self.bloch_norm_sq().sqrt()
            )));
        }
        Ok(())
    }
}

impl Add for StateVector {
    type Output = StateVector;
    fn add(self, rhs: StateVector) -> StateVector {
        StateVector::new(
            self.rho0 + rhs.rho0,
            self.rhoz + rhs.rhoz,
            self.rhox + rhs.rhox,
        )
    }
}

impl AddAssign for StateVector {
    fn add_assign(&mut self, rhs: StateVector) {
        self.rho0 += rhs.rho0;
        self.rhoz += rhs.rhoz;
        self.rhox += rhs.rhox;
    }
}

impl Mul<f64> for StateVector {
    type Output = StateVector;
    fn mul(self, k: f64) -> StateVector {
        StateVector::new(self.rho0 * k, self.rhoz * k, self.rhox * k)
    }
}

/// A single measurement outcome, `alpha = +1` (up) or `alpha = -1` (down).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Up,
    Down,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Up, Outcome::Down];

    pub fn sign(self) -> f64 {
        match self {
            Outcome::Up => 1.0,
            Outcome::Down => -1.0,
        }
    }

    pub fn from_sign(alpha: i32) -> Result<Self> {
        match alpha {
            1 => Ok(Outcome::Up),
            -1 => Ok(Outcome::Down),
            other => Err(Error::InvalidParameter(format!(
                "outcome must be +1 or -1, got {other}"
            ))),
        }
    }
}

impl Neg for Outcome {
    type Output = Outcome;
    fn neg(self) -> Outcome {
        match self {
            Outcome::Up => Outcome::Down,
            Outcome::Down => Outcome::Up,
        }
    }
}

/// Full specification of one measurement experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Measurement angle; the strength is `sin(theta)`, projective at `pi/2`.
    pub theta: f64,
    /// Precession angle per measurement interval, `omega_L * tau`.
    pub omega: f64,
    /// Relaxation per interval, `r * tau`.
    pub r_tau: f64,
    /// Number of measurements `N`.
    pub n_meas: usize,
    pub initial: StateVector,
}

impl ModelParams {
    pub fn new(
        theta: f64,
        omega: f64,
        r_tau: f64,
        n_meas: usize,
        initial: StateVector,
    ) -> Result<Self> {
        let params = Self {
            theta,
            omega,
            r_tau,
            n_meas,
            initial,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        validate_angles(self.theta, self.omega, self.r_tau)?;
        if self.n_meas < 2 {
            return Err(Error::InvalidParameter(format!(
                "n must be at least 2, got {}",
                self.n_meas
            )));
        }
        if !self.n_meas.is_multiple_of(2) {
            return Err(Error::OddMeasurementCount(self.n_meas));
        }
        self.initial.validate_initial()
    }

    pub fn propagator(&self) -> Result<Propagator> {
        Propagator::new(self.theta, self.omega, self.r_tau)
    }

    /// Same experiment with a different `(theta, omega)` point.
    pub fn at(&self, theta: f64, omega: f64) -> Self {
        Self {
            theta,
            omega,
            ..*self
        }
    }

    pub fn same_experiment(&self, other: &ModelParams) -> bool {
        self == other
    }
}

pub(crate) fn validate_angles(theta: f64, omega: f64, r_tau: f64) -> Result<()> {
    if !(theta.is_finite() && (-RANGE_SLACK..=FRAC_PI_2 + RANGE_SLACK).contains(&theta)) {
        return Err(Error::InvalidParameter(format!(
            "theta must lie in [0, pi/2], got {theta}"
        )));
    }
    if !(omega.is_finite() && (-RANGE_SLACK..=PI + RANGE_SLACK).contains(&omega)) {
        return Err(Error::InvalidParameter(format!(
            "omega must lie in [0, pi], got {omega}"
        )));
    }
    if !(r_tau.is_finite() && r_tau >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "r_tau must be non-negative, got {r_tau}"
        )));
    }
    Ok(())
}

/// Free precession of the Bloch vector by angle `omega` about `y`.
pub fn precess(p: &StateVector, omega: f64) -> StateVector {
    let (s, c) = omega.sin_cos();
    StateVector::new(p.rho0, p.rhoz * c - p.rhox * s, p.rhox * c + p.rhoz * s)
}

/// Real 3x3 matrix acting on `(rho0, rhoz, rhox)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolvingMatrix {
    pub entries: [[f64; 3]; 3],
}

impl EvolvingMatrix {
    pub const IDENTITY: EvolvingMatrix = EvolvingMatrix {
        entries: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub const ZERO: EvolvingMatrix = EvolvingMatrix {
        entries: [[0.0; 3]; 3],
    };

    #[inline]
    pub fn apply(&self, p: &StateVector) -> StateVector {
        let m = &self.entries;
        StateVector::new(
            m[0][0] * p.rho0 + m[0][1] * p.rhoz + m[0][2] * p.rhox,
            m[1][0] * p.rho0 + m[1][1] * p.rhoz + m[1][2] * p.rhox,
            m[2][0] * p.rho0 + m[2][1] * p.rhoz + m[2][2] * p.rhox,
        )
    }

    /// Matrix product `self * rhs`, i.e. `rhs` acts first.
    pub fn then_after(&self, rhs: &EvolvingMatrix) -> EvolvingMatrix {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.entries[i][k] * rhs.entries[k][j]).sum();
            }
        }
        EvolvingMatrix { entries: out }
    }

    pub fn plus(&self, rhs: &EvolvingMatrix) -> EvolvingMatrix {
        let mut out = self.entries;
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell += rhs.entries[i][j];
            }
        }
        EvolvingMatrix { entries: out }
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

/// Precession followed by measurement for outcome `alpha`, with relaxation
/// `exp(-r_tau)` applied to the precessed Bloch components.
pub fn evolving_matrix(params: &ModelParams, alpha: Outcome) -> Result<EvolvingMatrix> {
    params.validate()?;
    Ok(Propagator::new(params.theta, params.omega, params.r_tau)?.matrix(alpha))
}

fn build_matrix(theta: f64, omega: f64, r_tau: f64, alpha: Outcome) -> EvolvingMatrix {
    let a = alpha.sign();
    let (st, ct) = theta.sin_cos();
    let (sw, cw) = omega.sin_cos();
    let decay = (-r_tau).exp();
    EvolvingMatrix {
        entries: [
            [0.5, 0.5 * a * st * cw * decay, -0.5 * a * st * sw * decay],
            [0.5 * a * st, 0.5 * cw * decay, -0.5 * sw * decay],
            [0.0, 0.5 * ct * sw * decay, 0.5 * ct * cw * decay],
        ],
    }
}

/// Both branch matrices for one `(theta, omega, r_tau)` point, built once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagator {
    pub theta: f64,
    pub omega: f64,
    pub r_tau: f64,
    up: EvolvingMatrix,
    down: EvolvingMatrix,
}

impl Propagator {
    pub fn new(theta: f64, omega: f64, r_tau: f64) -> Result<Self> {
        validate_angles(theta, omega, r_tau)?;
        Ok(Self {
            theta,
            omega,
            r_tau,
            up: build_matrix(theta, omega, r_tau, Outcome::Up),
            down: build_matrix(theta, omega, r_tau, Outcome::Down),
        })
    }

    #[inline]
    pub fn matrix(&self, alpha: Outcome) -> EvolvingMatrix {
        match alpha {
            Outcome::Up => self.up,
            Outcome::Down => self.down,
        }
    }

    /// Conditioned (unnormalized) state after one precession plus outcome `alpha`.
    #[inline]
    pub fn step(&self, p: &StateVector, alpha: Outcome) -> StateVector {
        self.matrix(alpha).apply(p)
    }

    /// Probability of `alpha` given the (possibly unnormalized) state `p`.
    pub fn branch_probability(&self, p: &StateVector, alpha: Outcome) -> Result<f64> {
        if p.rho0 <= RANGE_SLACK {
            return Err(Error::DegenerateState(p.rho0));
        }
        Ok(self.step(p, alpha).rho0 / p.rho0)
    }
}
