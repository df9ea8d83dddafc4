use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("number of measurements must be even, got {0}")]
    OddMeasurementCount(usize),

    #[error("degenerate state: rho0 = {0:e} is not positive")]
    DegenerateState(f64),

    #[error("size limit exceeded: n = {n} (maximum {max})")]
    SizeLimit { n: usize, max: usize },

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("singular coupling at omega = {0} (beta*J is infinite)")]
    SingularCoupling(f64),

    #[error("outside domain: {0}")]
    Domain(String),

    #[error("pole in closed form at z = {re} + {im}i")]
    Pole { re: f64, im: f64 },

    #[error("need at least {need} samples, got {got}")]
    InsufficientSamples { got: usize, need: usize },

    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),

    #[error("distributions come from different parameters")]
    MismatchedParams,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{0}")]
    Validation(String),

    #[error("at theta = {theta}, omega = {omega}: {source}")]
    AtGridPoint {
        theta: f64,
        omega: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures that indicate broken arithmetic rather than bad input.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::NumericFailure(_) => true,
            Error::AtGridPoint { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}
