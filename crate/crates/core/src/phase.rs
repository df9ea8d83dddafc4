//! Phase classification over the `(theta, omega)` plane.
//!
//! A point is polarized (PL) when the most likely FM order is nonzero,
//! anti-polarized (APL) when the most likely AFM order is nonzero, and
//! unpolarized (UPL) when both maxima sit at zero.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use crate::dp::{afm_distribution, fm_distribution, ConditionedDistribution, OrderKind};
use crate::error::{Error, Result};
use crate::qubit::{ModelParams, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Polarized,
    Unpolarized,
    AntiPolarized,
}

impl Phase {
    pub fn short_name(self) -> &'static str {
        match self {
            Phase::Polarized => "PL",
            Phase::Unpolarized => "UPL",
            Phase::AntiPolarized => "APL",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseLabel {
    pub phase: Phase,
    /// `M_F` at the maximum of the FM distribution.
    pub fm_argmax: f64,
    /// `M_AF` at the maximum of the AFM distribution.
    pub afm_argmax: f64,
    /// Both orders peaked away from zero; the larger displacement won.
    pub conflict: bool,
}

pub fn classify(fm: &ConditionedDistribution, afm: &ConditionedDistribution) -> Result<PhaseLabel> {
    if fm.kind != OrderKind::Ferro
        || afm.kind != OrderKind::AntiFerro
        || fm.n_meas != afm.n_meas
        || fm.len() != afm.len()
    {
        return Err(Error::MismatchedParams);
    }
    let fm_idx = fm.argmax();
    let afm_idx = afm.argmax();
    let fm_argmax = fm.order_param(fm_idx);
    let afm_argmax = afm.order_param(afm_idx);
    let fm_off = fm_idx != fm.zero_index();
    let afm_off = afm_idx != afm.zero_index();
    let (phase, conflict) = match (fm_off, afm_off) {
        (false, false) => (Phase::Unpolarized, false),
        (true, false) => (Phase::Polarized, false),
        (false, true) => (Phase::AntiPolarized, false),
        (true, true) if fm_argmax.abs() >= afm_argmax.abs() => (Phase::Polarized, true),
        (true, true) => (Phase::AntiPolarized, true),
    };
    Ok(PhaseLabel {
        phase,
        fm_argmax,
        afm_argmax,
        conflict,
    })
}

pub fn classify_params(params: &ModelParams) -> Result<PhaseLabel> {
    classify(&fm_distribution(params)?, &afm_distribution(params)?)
}

/// Whether the given order parameter peaks away from zero.
pub fn is_ordered(params: &ModelParams, kind: OrderKind) -> Result<bool> {
    let dist = match kind {
        OrderKind::Ferro => fm_distribution(params)?,
        OrderKind::AntiFerro => afm_distribution(params)?,
    };
    Ok(dist.argmax() != dist.zero_index())
}

/// `count` evenly spaced values from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|i| start + (end - start) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiagram {
    pub theta_grid: Vec<f64>,
    pub omega_grid: Vec<f64>,
    /// `labels[i][j]` belongs to `(theta_grid[i], omega_grid[j])`.
    pub labels: Vec<Vec<PhaseLabel>>,
    pub n_meas: usize,
    pub initial: StateVector,
    pub r_tau: f64,
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter(format!("{name} grid is empty")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!(
            "{name} grid must be strictly increasing"
        )));
    }
    Ok(())
}

pub fn sweep(
    theta_grid: &[f64],
    omega_grid: &[f64],
    n_meas: usize,
    initial: StateVector,
    r_tau: f64,
) -> Result<PhaseDiagram> {
    check_grid("theta", theta_grid)?;
    check_grid("omega", omega_grid)?;
    let template = ModelParams::new(theta_grid[0], omega_grid[0], r_tau, n_meas, initial)?;
    let cols = omega_grid.len();
    let flat: Vec<PhaseLabel> = (0..theta_grid.len() * cols)
        .into_par_iter()
        .map(|idx| {
            let (theta, omega) = (theta_grid[idx / cols], omega_grid[idx % cols]);
            classify_params(&template.at(theta, omega)).map_err(|e| Error::AtGridPoint {
                theta,
                omega,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    Ok(PhaseDiagram {
        theta_grid: theta_grid.to_vec(),
        omega_grid: omega_grid.to_vec(),
        labels: flat.chunks(cols).map(<[PhaseLabel]>::to_vec).collect(),
        n_meas,
        initial,
        r_tau,
    })
}

impl PhaseDiagram {
    pub fn phase_at(&self, i: usize, j: usize) -> Phase {
        self.labels[i][j].phase
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "theta,omega,label,fm_argmax,afm_argmax,conflict")?;
        for (i, theta) in self.theta_grid.iter().enumerate() {
            for (j, omega) in self.omega_grid.iter().enumerate() {
                let l = &self.labels[i][j];
                writeln!(
                    w,
                    "{theta},{omega},{},{},{},{}",
                    l.phase, l.fm_argmax, l.afm_argmax, l.conflict
                )?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    PlUpl,
    UplApl,
}

impl BoundaryKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryKind::PlUpl => "PL-UPL",
            BoundaryKind::UplApl => "UPL-APL",
        }
    }

    /// The order parameter whose peak moves across this boundary.
    pub fn order(self) -> OrderKind {
        match self {
            BoundaryKind::PlUpl => OrderKind::Ferro,
            BoundaryKind::UplApl => OrderKind::AntiFerro,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub theta: f64,
    pub omega: f64,
}

/// Row-wise boundary: for each `theta`, the midpoint of the grid interval
/// where the label changes. For PL-UPL this is after the last PL point, for
/// UPL-APL before the first APL point. Rows without that step are skipped.
pub fn extract_boundary(diagram: &PhaseDiagram, kind: BoundaryKind) -> Vec<BoundaryPoint> {
    let omegas = &diagram.omega_grid;
    let mut out = Vec::new();
    for (i, &theta) in diagram.theta_grid.iter().enumerate() {
        let row = &diagram.labels[i];
        let step = match kind {
            BoundaryKind::PlUpl => row
                .iter()
                .rposition(|l| l.phase == Phase::Polarized)
                .filter(|&j| row.get(j + 1).map(|l| l.phase) == Some(Phase::Unpolarized))
                .map(|j| (j, j + 1)),
            BoundaryKind::UplApl => row
                .iter()
                .position(|l| l.phase == Phase::AntiPolarized)
                .filter(|&j| j > 0 && row[j - 1].phase == Phase::Unpolarized)
                .map(|j| (j - 1, j)),
        };
        if let Some((a, b)) = step {
            out.push(BoundaryPoint {
                theta,
                omega: 0.5 * (omegas[a] + omegas[b]),
            });
        }
    }
    out
}

/// Column-wise PL-UPL boundary: for each `omega`, the midpoint below the
/// lowest PL point when scanning `theta` upward. Columns that never become
/// PL report half a step above the top of the grid.
pub fn extract_column_boundary(diagram: &PhaseDiagram) -> Vec<BoundaryPoint> {
    let thetas = &diagram.theta_grid;
    let top = upper_edge(thetas);
    diagram
        .omega_grid
        .iter()
        .enumerate()
        .filter_map(|(j, &omega)| {
            let first = (0..thetas.len()).find(|&i| diagram.labels[i][j].phase == Phase::Polarized);
            match first {
                Some(0) => None,
                Some(i) => Some(BoundaryPoint {
                    theta: 0.5 * (thetas[i - 1] + thetas[i]),
                    omega,
                }),
                None => Some(BoundaryPoint { theta: top, omega }),
            }
        })
        .collect()
}

fn upper_edge(grid: &[f64]) -> f64 {
    match grid {
        [] => 0.0,
        [only] => *only,
        [.., a, b] => b + 0.5 * (b - a),
    }
}

/// Same as [`extract_column_boundary`] but evaluates only the FM order and
/// stops each column at its first polarized point.
pub fn scan_column_boundary(
    template: &ModelParams,
    theta_grid: &[f64],
    omega_grid: &[f64],
) -> Result<Vec<BoundaryPoint>> {
    check_grid("theta", theta_grid)?;
    check_grid("omega", omega_grid)?;
    template.validate()?;
    let top = upper_edge(theta_grid);
    let columns: Vec<Option<BoundaryPoint>> = omega_grid
        .par_iter()
        .map(|&omega| {
            for (i, &theta) in theta_grid.iter().enumerate() {
                let params = template.at(theta, omega);
                let ordered = is_ordered(&params, OrderKind::Ferro).map_err(|e| Error::AtGridPoint {
                    theta,
                    omega,
                    source: Box::new(e),
                })?;
                if ordered {
                    return Ok((i > 0).then(|| BoundaryPoint {
                        theta: 0.5 * (theta_grid[i - 1] + theta),
                        omega,
                    }));
                }
            }
            Ok(Some(BoundaryPoint { theta: top, omega }))
        })
        .collect::<Result<_>>()?;
    Ok(columns.into_iter().flatten().collect())
}

/// Locates the boundary along `omega` at fixed `theta`: a coarse scan over
/// `[omega_min, pi]` brackets the step, then bisection narrows it to
/// `resolution`. Returns the midpoint of the final bracket.
pub fn refine_row_boundary(
    template: &ModelParams,
    theta: f64,
    kind: BoundaryKind,
    omega_min: f64,
    coarse_step: f64,
    resolution: f64,
) -> Result<Option<f64>> {
    if !(coarse_step > 0.0 && resolution > 0.0) {
        return Err(Error::InvalidParameter(
            "coarse step and resolution must be positive".into(),
        ));
    }
    let order = kind.order();
    let pi = std::f64::consts::PI;
    let ordered = |omega: f64| -> Result<bool> {
        is_ordered(&template.at(theta, omega), order).map_err(|e| Error::AtGridPoint {
            theta,
            omega,
            source: Box::new(e),
        })
    };
    let steps = ((pi - omega_min) / coarse_step).ceil() as usize;
    let coarse: Vec<f64> = (0..=steps)
        .map(|i| (omega_min + i as f64 * coarse_step).min(pi))
        .collect();
    let flags = coarse
        .iter()
        .map(|&w| ordered(w))
        .collect::<Result<Vec<bool>>>()?;

    // PL-UPL: last ordered point followed by a disordered one.
    // UPL-APL: first ordered point preceded by a disordered one.
    let bracket = match kind {
        BoundaryKind::PlUpl => flags
            .iter()
            .rposition(|&f| f)
            .filter(|&j| j + 1 < flags.len())
            .map(|j| (j, j + 1)),
        BoundaryKind::UplApl => flags
            .iter()
            .position(|&f| f)
            .filter(|&j| j > 0)
            .map(|j| (j - 1, j)),
    };
    let Some((a, b)) = bracket else {
        return Ok(None);
    };
    let (mut lo, mut hi) = (coarse[a], coarse[b]);
    let lo_flag = flags[a];
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if ordered(mid)? == lo_flag {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

pub fn write_boundary_csv<W: Write>(
    w: &mut W,
    sets: &[(BoundaryKind, Vec<BoundaryPoint>)],
) -> std::io::Result<()> {
    writeln!(w, "theta,omega_boundary,kind")?;
    for (kind, points) in sets {
        for p in points {
            writeln!(w, "{},{},{}", p.theta, p.omega, kind.name())?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Theta,
    Omega,
}

/// Dominant period of the oscillation along a boundary curve.
///
/// `axis` selects the abscissa; the other coordinate is the signal. The
/// signal is detrended by a least-squares line and the period taken from
/// the spacing of same-direction zero crossings of the residual. A small
/// hysteresis band keeps grid quantization from registering as crossings.
pub fn oscillation_period(points: &[BoundaryPoint], axis: Axis) -> Result<f64> {
    let mut xy: Vec<(f64, f64)> = points
        .iter()
        .map(|p| match axis {
            Axis::Theta => (p.theta, p.omega),
            Axis::Omega => (p.omega, p.theta),
        })
        .collect();
    xy.sort_by(|a, b| a.0.total_cmp(&b.0));
    if xy.len() < 6 {
        return Err(Error::InsufficientResolution(format!(
            "{} boundary points are too few",
            xy.len()
        )));
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let resid: Vec<f64> = xy.iter().map(|p| p.1 - my - slope * (p.0 - mx)).collect();

    let rms = (resid.iter().map(|r| r * r).sum::<f64>() / n).sqrt();
    let band = 0.25 * rms;
    let mut state = 0i8;
    let mut up = Vec::new();
    let mut down = Vec::new();
    for i in 0..resid.len() {
        let r = resid[i];
        if r.abs() <= band {
            continue;
        }
        let sign = if r > 0.0 { 1 } else { -1 };
        if state != 0 && sign != state {
            // Latest sign change of the raw residual before this point.
            let mut k = i;
            while k > 0 && (resid[k - 1] > 0.0) == (r > 0.0) {
                k -= 1;
            }
            let k = k.max(1);
            let (x0, r0) = (xy[k - 1].0, resid[k - 1]);
            let (x1, r1) = (xy[k].0, resid[k]);
            let x = if r1 != r0 { x0 - r0 * (x1 - x0) / (r1 - r0) } else { x0 };
            if sign > 0 {
                up.push(x);
            } else {
                down.push(x);
            }
        }
        state = sign;
    }
    let cycles = up.len().min(down.len());
    if cycles < 3 {
        return Err(Error::InsufficientResolution(format!(
            "only {cycles} oscillation cycles resolved"
        )));
    }
    let spacing = |c: &[f64]| (c[c.len() - 1] - c[0]) / (c.len() - 1) as f64;
    Ok(0.5 * (spacing(&up) + spacing(&down)))
}
