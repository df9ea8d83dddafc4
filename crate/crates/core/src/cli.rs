//! Subcommand dispatch and CSV emission.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{value_parser, Arg, ArgMatches};

use crate::config::{parse_config, Command, RunConfig, KEYS};
use crate::dp::{afm_distribution, fm_distribution, ConditionedDistribution, OrderKind};
use crate::error::{Error, Result};
use crate::fcs::{
    binomial_limit, closed_form_distribution, eigenvalue_locus, exact_generating_samples,
    invert_generating_function, two_binomial_limit, write_locus_csv,
};
use crate::oracle::{monte_carlo::GENERATOR, monte_carlo_sample};
use crate::phase::{
    extract_boundary, oscillation_period, refine_row_boundary, scan_column_boundary, sweep,
    write_boundary_csv, Axis, BoundaryKind, BoundaryPoint,
};
use crate::validate::{run_suite, write_table};

pub const OUT_DIR_ENV: &str = "QMPHASE_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

const COMMANDS: [(Command, &str); 6] = [
    (Command::Dist, "FM and AFM outcome distributions at one (theta, omega)"),
    (Command::Diagram, "PL / UPL / APL labels over a (theta, omega) grid"),
    (Command::Boundary, "phase boundaries and the period of their small-theta oscillation"),
    (Command::Fcs, "counting-statistics eigenvalue locus and closed-form distributions"),
    (Command::Sample, "Monte Carlo histograms of measurement records"),
    (Command::Validate, "cross-check the exact solver against independent oracles"),
];

pub fn command() -> clap::Command {
    let mut args = vec![Arg::new("config")
        .long("config")
        .short('c')
        .value_name("FILE")
        .value_parser(value_parser!(PathBuf))
        .help("key = value file; flags override it")];
    for k in KEYS {
        let help = if k.symbol.is_empty() {
            k.help.to_string()
        } else {
            format!("{}: {}", k.symbol, k.help)
        };
        args.push(Arg::new(k.key).long(k.key).value_name("VALUE").help(help));
    }
    clap::Command::new("qmphase")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Outcome statistics of a precessing qubit under repeated weak measurement")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommands(
            COMMANDS
                .iter()
                .map(|(c, about)| clap::Command::new(c.name()).about(*about).args(args.clone())),
        )
}

fn config_from_matches(name: &str, sub: &ArgMatches) -> Result<RunConfig> {
    let cmd = COMMANDS
        .iter()
        .map(|(c, _)| *c)
        .find(|c| c.name() == name)
        .ok_or_else(|| Error::Validation(format!("unknown command {name}")))?;
    let text = sub
        .get_one::<PathBuf>("config")
        .map(|p| {
            fs::read_to_string(p)
                .map_err(|e| Error::Validation(format!("cannot read {}: {e}", p.display())))
        })
        .transpose()?;
    let flags: Vec<(String, String)> = KEYS
        .iter()
        .filter_map(|k| sub.get_one::<String>(k.key).map(|v| (k.key.to_string(), v.clone())))
        .collect();
    parse_config(cmd, text.as_deref(), &flags)
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_numeric() {
        return EXIT_NUMERIC;
    }
    match err {
        Error::Parse { .. }
        | Error::Validation(_)
        | Error::InvalidParameter(_)
        | Error::OddMeasurementCount(_) => EXIT_USAGE,
        _ => EXIT_VALIDATION,
    }
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let Some((name, sub)) = matches.subcommand() else {
        return EXIT_USAGE;
    };
    let config = match config_from_matches(name, sub) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("qmphase: {e}");
            return EXIT_USAGE;
        }
    };
    match run(&config) {
        Ok(report) => {
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            if report.passed {
                EXIT_OK
            } else {
                EXIT_VALIDATION
            }
        }
        Err(e) => {
            eprintln!("qmphase {}: {e}", config.command);
            exit_code(&e)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    /// False only when `validate` found a failing check.
    pub passed: bool,
}

pub fn output_dir(config: &RunConfig) -> PathBuf {
    config
        .out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Runs one command inside a pool of `config.threads` workers.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = config.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Validation(format!("cannot start thread pool: {e}")))?;
    pool.install(|| dispatch(config))
}

struct Outputs<'a> {
    config: &'a RunConfig,
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Outputs<'_> {
    /// Writes `<dir>/<out>_<suffix>.csv`: metadata block, then `body`.
    fn write_with(
        &mut self,
        suffix: &str,
        extra: &[(&str, String)],
        body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    ) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let path = self.dir.join(format!("{}_{suffix}.csv", self.config.out));
        let mut w = BufWriter::new(File::create(&path)?);
        write_metadata(&mut w, self.config, extra)?;
        body(&mut w)?;
        w.flush()?;
        self.files.push(path);
        Ok(())
    }
}

pub fn write_metadata<W: Write>(w: &mut W, config: &RunConfig, extra: &[(&str, String)]) -> std::io::Result<()> {
    writeln!(w, "# qmphase {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(w, "# command = {}", config.command)?;
    for (k, v) in config.resolved().iter().chain(extra) {
        writeln!(w, "# {k} = {v}")?;
    }
    Ok(())
}

fn dispatch(config: &RunConfig) -> Result<RunReport> {
    let mut out = Outputs {
        config,
        dir: output_dir(config),
        files: Vec::new(),
    };
    let mut passed = true;
    match config.command {
        Command::Dist => run_dist(&mut out)?,
        Command::Diagram => run_diagram(&mut out)?,
        Command::Boundary => run_boundary(&mut out)?,
        Command::Fcs => run_fcs(&mut out)?,
        Command::Sample => run_sample(&mut out)?,
        Command::Validate => {
            let checks = run_suite()?;
            write_table(&mut std::io::stdout().lock(), &checks)?;
            passed = checks.iter().all(|c| c.passed);
        }
    }
    Ok(RunReport {
        files: out.files,
        passed,
    })
}

fn run_dist(out: &mut Outputs) -> Result<()> {
    let p = &out.config.params;
    let fm = fm_distribution(p)?;
    let afm = afm_distribution(p)?;
    out.write_with("fm", &[], |w| fm.write_csv(w))?;
    out.write_with("afm", &[], |w| afm.write_csv(w))
}

fn run_diagram(out: &mut Outputs) -> Result<()> {
    let c = out.config;
    let d = sweep(&c.grid.thetas(), &c.grid.omegas(), c.params.n_meas, c.params.initial, c.params.r_tau)?;
    out.write_with("diagram", &[], |w| d.write_csv(w))
}

fn run_boundary(out: &mut Outputs) -> Result<()> {
    let c = out.config;
    let (thetas, omegas) = (c.grid.thetas(), c.grid.omegas());
    let kinds = [BoundaryKind::PlUpl, BoundaryKind::UplApl];
    let sets: Vec<(BoundaryKind, Vec<BoundaryPoint>)> = if c.refine {
        kinds
            .iter()
            .map(|&kind| {
                let mut points = Vec::new();
                for &theta in &thetas {
                    let found = refine_row_boundary(
                        &c.params,
                        theta,
                        kind,
                        c.grid.omega_min,
                        c.coarse_step,
                        c.resolution,
                    )?;
                    if let Some(omega) = found {
                        points.push(BoundaryPoint { theta, omega });
                    }
                }
                Ok((kind, points))
            })
            .collect::<Result<_>>()?
    } else {
        let d = sweep(&thetas, &omegas, c.params.n_meas, c.params.initial, c.params.r_tau)?;
        kinds.iter().map(|&k| (k, extract_boundary(&d, k))).collect()
    };
    out.write_with("boundary", &[], |w| write_boundary_csv(w, &sets))?;

    // The PL lobes repeat along omega, so the period is read off the
    // lower edge of the PL region column by column.
    let column = scan_column_boundary(&c.params, &thetas, &omegas)?;
    let reference = std::f64::consts::TAU / (c.params.n_meas as f64 - 2.0);
    let period = match oscillation_period(&column, Axis::Omega) {
        Ok(p) => p,
        Err(Error::InsufficientResolution(msg)) => {
            eprintln!("qmphase boundary: no period: {msg}");
            f64::NAN
        }
        Err(e) => return Err(e),
    };
    out.write_with("period", &[], |w| {
        writeln!(w, "kind,axis,period,reference")?;
        writeln!(w, "{},omega,{period},{reference}", BoundaryKind::PlUpl.name())
    })
}

fn run_fcs(out: &mut Outputs) -> Result<()> {
    let c = out.config;
    let p = &c.params;
    let locus = eigenvalue_locus(p.theta, p.omega, c.chi_samples);
    out.write_with("locus", &[], |w| write_locus_csv(w, &locus))?;

    let n = p.n_meas;
    let dp = fm_distribution(p)?.probabilities();
    let inverse = invert_generating_function(&exact_generating_samples(p)?, n)?;
    let nan = || vec![f64::NAN; n + 1];
    let closed = closed_form_distribution(p.theta, p.omega, n).unwrap_or_else(|_| nan());
    let binomial = binomial_limit(n);
    let two = two_binomial_limit(p.theta, p.omega, n).unwrap_or_else(|_| nan());
    out.write_with("fcs_dist", &[], |w| {
        writeln!(w, "n_up,order_param,dp,generating_inverse,closed_form,binomial_limit,two_binomial")?;
        for k in 0..=n {
            writeln!(
                w,
                "{k},{},{:e},{:e},{:e},{:e},{:e}",
                (2 * k) as f64 / n as f64 - 1.0,
                dp[k],
                inverse[k],
                closed[k],
                binomial[k],
                two[k]
            )?;
        }
        Ok(())
    })
}

fn write_sample_rows<W: Write>(
    w: &mut W,
    est: &ConditionedDistribution,
    counts: &[u64],
    n_traj: u64,
    seed: u64,
) -> std::io::Result<()> {
    writeln!(w, "order_param,probability,rho0,rhoz,rhox,count,n_traj,seed")?;
    for (i, (s, count)) in est.table.iter().zip(counts).enumerate() {
        writeln!(
            w,
            "{},{:e},{:e},{:e},{:e},{count},{n_traj},{seed}",
            est.order_param(i),
            s.rho0,
            s.rho0,
            s.rhoz,
            s.rhox
        )?;
    }
    Ok(())
}

fn run_sample(out: &mut Outputs) -> Result<()> {
    let c = out.config;
    let h = monte_carlo_sample(&c.params, c.n_traj, c.seed)?;
    let extra = [("generator", GENERATOR.to_string())];
    for kind in [OrderKind::Ferro, OrderKind::AntiFerro] {
        let est = h.estimate(kind);
        out.write_with(&format!("sample_{}", kind.name()), &extra, |w| {
            write_sample_rows(w, &est, h.counts(kind), h.n_traj, h.seed)
        })?;
    }
    Ok(())
}

/// Path of an output written by `run` for `config`.
pub fn output_path(config: &RunConfig, suffix: &str) -> PathBuf {
    output_dir(config).join(format!("{}_{suffix}.csv", config.out))
}

/// Reads a CSV written by `run`, skipping the metadata block.
pub fn read_data_rows(path: &Path) -> Result<Vec<String>> {
    Ok(fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}
