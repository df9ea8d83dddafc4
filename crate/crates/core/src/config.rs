//! Run configuration: flat `key = value` text plus command-line overrides.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::phase::linspace;
use crate::qubit::{ModelParams, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Dist,
    Diagram,
    Boundary,
    Fcs,
    Sample,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Dist => "dist",
            Command::Diagram => "diagram",
            Command::Boundary => "boundary",
            Command::Fcs => "fcs",
            Command::Sample => "sample",
            Command::Validate => "validate",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub struct KeySpec {
    pub key: &'static str,
    pub symbol: &'static str,
    pub help: &'static str,
}

/// Every accepted key. Flags use the same names with `--`.
pub const KEYS: &[KeySpec] = &[
    KeySpec { key: "theta", symbol: "θ", help: "measurement strength, radians in [0, π/2]" },
    KeySpec { key: "omega", symbol: "ω", help: "precession angle per step, radians in [0, π]" },
    KeySpec { key: "r_tau", symbol: "rτ", help: "relaxation rate times step duration, ≥ 0" },
    KeySpec { key: "n", symbol: "N", help: "number of measurements, even" },
    KeySpec { key: "rho_z", symbol: "ρ_z", help: "initial Bloch z component" },
    KeySpec { key: "rho_x", symbol: "ρ_x", help: "initial Bloch x component" },
    KeySpec { key: "rho_y", symbol: "ρ_y", help: "initial Bloch y component, must be 0" },
    KeySpec { key: "theta_min", symbol: "θ_min", help: "first θ row of the diagram grid" },
    KeySpec { key: "theta_max", symbol: "θ_max", help: "last θ row of the diagram grid" },
    KeySpec { key: "theta_steps", symbol: "", help: "number of θ rows" },
    KeySpec { key: "omega_min", symbol: "ω_min", help: "first ω column of the diagram grid" },
    KeySpec { key: "omega_max", symbol: "ω_max", help: "last ω column of the diagram grid" },
    KeySpec { key: "omega_steps", symbol: "", help: "number of ω columns" },
    KeySpec { key: "refine", symbol: "", help: "boundary: bisect each row instead of grid midpoints (true/false)" },
    KeySpec { key: "coarse_step", symbol: "", help: "boundary: ω spacing of the scan before bisection" },
    KeySpec { key: "resolution", symbol: "", help: "boundary: final bisection bracket width" },
    KeySpec { key: "chi_samples", symbol: "", help: "fcs: number of counting-field angles χ on [0, 2π)" },
    KeySpec { key: "n_traj", symbol: "", help: "sample: number of trajectories" },
    KeySpec { key: "seed", symbol: "", help: "sample: 64-bit generator seed" },
    KeySpec { key: "threads", symbol: "", help: "worker threads (default: all cores); never changes results" },
    KeySpec { key: "out", symbol: "", help: "output file prefix" },
    KeySpec { key: "out_dir", symbol: "", help: "output directory (default: $QMPHASE_OUT_DIR, else .)" },
];

pub fn is_known_key(key: &str) -> bool {
    KEYS.iter().any(|k| k.key == key)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub theta_min: f64,
    pub theta_max: f64,
    pub theta_steps: usize,
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_steps: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            theta_min: 0.02,
            theta_max: FRAC_PI_2,
            theta_steps: 157,
            omega_min: 0.02,
            omega_max: PI,
            omega_steps: 157,
        }
    }
}

impl GridSpec {
    pub fn thetas(&self) -> Vec<f64> {
        linspace(self.theta_min, self.theta_max, self.theta_steps)
    }

    pub fn omegas(&self) -> Vec<f64> {
        linspace(self.omega_min, self.omega_max, self.omega_steps)
    }

    fn validate(&self) -> Result<()> {
        let axis = |name: &str, lo: f64, hi: f64, steps: usize, top: f64, top_name: &str| {
            if !(0.0..=top).contains(&lo) || !(0.0..=top).contains(&hi) {
                return Err(Error::Validation(format!(
                    "{name} grid must lie in [0, {top_name}]"
                )));
            }
            if steps == 0 || (steps > 1 && hi <= lo) {
                return Err(Error::Validation(format!(
                    "{name} grid needs {name}_max > {name}_min and at least one step"
                )));
            }
            Ok(())
        };
        axis("theta", self.theta_min, self.theta_max, self.theta_steps, FRAC_PI_2, "pi/2")?;
        axis("omega", self.omega_min, self.omega_max, self.omega_steps, PI, "pi")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: ModelParams,
    pub grid: GridSpec,
    pub refine: bool,
    pub coarse_step: f64,
    pub resolution: f64,
    pub chi_samples: usize,
    pub n_traj: u64,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: String,
    /// `None` defers to the environment.
    pub out_dir: Option<PathBuf>,
}

struct Entry {
    value: String,
    /// 0 for values that came from flags.
    line: usize,
}

fn parse_value<T: FromStr>(key: &str, entry: &Entry) -> Result<T>
where
    T::Err: fmt::Display,
{
    entry.value.parse::<T>().map_err(|e| {
        let msg = format!("bad value {:?} for {key}: {e}", entry.value);
        if entry.line > 0 {
            Error::Parse { line: entry.line, msg }
        } else {
            Error::Validation(msg)
        }
    })
}

/// Parses `text` (one `key = value` per line, `#` comments) and applies
/// `flags` on top. Unknown keys are rejected in both.
pub fn parse_config(command: Command, text: Option<&str>, flags: &[(String, String)]) -> Result<RunConfig> {
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    for (idx, raw) in text.unwrap_or("").lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Parse { line, msg: format!("expected key = value, got {content:?}") });
        };
        let key = key.trim();
        if !is_known_key(key) {
            return Err(Error::Parse { line, msg: format!("unknown key {key:?}") });
        }
        if entries.contains_key(key) {
            return Err(Error::Parse { line, msg: format!("duplicate key {key:?}") });
        }
        entries.insert(key.to_string(), Entry { value: value.trim().to_string(), line });
    }
    for (key, value) in flags {
        if !is_known_key(key) {
            return Err(Error::Validation(format!("unknown key {key:?}")));
        }
        entries.insert(key.clone(), Entry { value: value.trim().to_string(), line: 0 });
    }

    fn get<T: FromStr>(entries: &BTreeMap<String, Entry>, key: &str, default: T) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        entries.get(key).map_or(Ok(default), |e| parse_value(key, e))
    }

    let n: usize = get(&entries, "n", 100)?;
    if n % 2 == 1 {
        return Err(Error::Validation(format!("n must be even, got {n}")));
    }
    let rho_y: f64 = get(&entries, "rho_y", 0.0)?;
    if rho_y != 0.0 {
        return Err(Error::Validation(format!(
            "rho_y must be 0 (states are restricted to the x-z plane), got {rho_y}"
        )));
    }
    let initial = StateVector::new(1.0, get(&entries, "rho_z", 0.0)?, get(&entries, "rho_x", 1.0)?);
    let params = ModelParams::new(
        get(&entries, "theta", 2.0 * PI / 5.0)?,
        get(&entries, "omega", 0.1)?,
        get(&entries, "r_tau", 0.0)?,
        n,
        initial,
    )
    .map_err(|e| Error::Validation(e.to_string()))?;

    let d = GridSpec::default();
    let grid = GridSpec {
        theta_min: get(&entries, "theta_min", d.theta_min)?,
        theta_max: get(&entries, "theta_max", d.theta_max)?,
        theta_steps: get(&entries, "theta_steps", d.theta_steps)?,
        omega_min: get(&entries, "omega_min", d.omega_min)?,
        omega_max: get(&entries, "omega_max", d.omega_max)?,
        omega_steps: get(&entries, "omega_steps", d.omega_steps)?,
    };
    grid.validate()?;

    let coarse_step: f64 = get(&entries, "coarse_step", 0.1)?;
    let resolution: f64 = get(&entries, "resolution", 0.01)?;
    if !(coarse_step > 0.0 && resolution > 0.0) {
        return Err(Error::Validation("coarse_step and resolution must be positive".into()));
    }
    let chi_samples: usize = get(&entries, "chi_samples", 256)?;
    let n_traj: u64 = get(&entries, "n_traj", 100_000)?;
    if chi_samples == 0 || n_traj == 0 {
        return Err(Error::Validation("chi_samples and n_traj must be positive".into()));
    }
    let threads: Option<usize> = entries
        .get("threads")
        .map(|e| parse_value("threads", e))
        .transpose()?;
    if threads == Some(0) {
        return Err(Error::Validation("threads must be at least 1".into()));
    }
    let out: String = get(&entries, "out", "qmphase".to_string())?;
    if out.is_empty() {
        return Err(Error::Validation("out must not be empty".into()));
    }

    Ok(RunConfig {
        command,
        params,
        grid,
        refine: get(&entries, "refine", false)?,
        coarse_step,
        resolution,
        chi_samples,
        n_traj,
        seed: get(&entries, "seed", 0)?,
        threads,
        out,
        out_dir: entries.get("out_dir").map(|e| PathBuf::from(&e.value)),
    })
}

impl RunConfig {
    /// Every setting that can affect output contents, in key order.
    /// Thread count and output location are left out so that identical
    /// computations produce identical files.
    pub fn resolved(&self) -> Vec<(&'static str, String)> {
        let p = &self.params;
        let g = &self.grid;
        vec![
            ("theta", p.theta.to_string()),
            ("omega", p.omega.to_string()),
            ("r_tau", p.r_tau.to_string()),
            ("n", p.n_meas.to_string()),
            ("rho_z", p.initial.rhoz.to_string()),
            ("rho_x", p.initial.rhox.to_string()),
            ("rho_y", "0".to_string()),
            ("theta_min", g.theta_min.to_string()),
            ("theta_max", g.theta_max.to_string()),
            ("theta_steps", g.theta_steps.to_string()),
            ("omega_min", g.omega_min.to_string()),
            ("omega_max", g.omega_max.to_string()),
            ("omega_steps", g.omega_steps.to_string()),
            ("refine", self.refine.to_string()),
            ("coarse_step", self.coarse_step.to_string()),
            ("resolution", self.resolution.to_string()),
            ("chi_samples", self.chi_samples.to_string()),
            ("n_traj", self.n_traj.to_string()),
            ("seed", self.seed.to_string()),
        ]
    }
}
