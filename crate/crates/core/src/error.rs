use thiserror::Error;

/// Failures raised by the numerical modules.
///
/// Every variant carries enough context to locate the offending input;
/// none of them are recoverable by retrying with the same arguments.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("interaction violates |W(k)| <= 1/(1+|k|^gamma): |W({k})| = {value} > {bound}")]
    ConstraintViolation { k: f64, value: f64, bound: f64 },

    #[error("profile is not analytic at width lambda0 = {lambda0}: weighted transform grows at eta = {eta}")]
    NotAnalyticAtWidth { lambda0: f64, eta: f64 },

    #[error("weighted integrand not resolved by the grid: edge value {edge} vs total {total}")]
    TailNotResolved { edge: f64, total: f64 },

    #[error("Z-norm series not converged: last term {last} vs total {total} at n_max = {n_max}")]
    SeriesNotConverged { last: f64, total: f64, n_max: usize },

    #[error("time step too coarse: dt*|k|*scale = {value} (must be < {limit})")]
    StepTooCoarse { value: f64, limit: f64 },

    #[error("dispersion integral diverges at eta = {re}{im:+}i")]
    IntegralDiverges { re: f64, im: f64 },

    #[error("stability margin non-positive: root of 1-L near eta = {re}{im:+}i for k = {k}")]
    MarginNonPositive { k: i64, re: f64, im: f64 },

    #[error("too few envelope peaks: found {found}, need at least {needed}")]
    TooFewPeaks { found: usize, needed: usize },

    #[error("growth control requested for an unstable configuration (kappa = {kappa})")]
    UnstableConfiguration { kappa: f64 },

    #[error("data violate the growth hypothesis at t = {t}: lhs {lhs} > rhs {rhs}")]
    InequalityViolated { t: f64, lhs: f64, rhs: f64 },

    #[error("series exceeds the calibrated envelope at t = {t}: {value} > {envelope}")]
    EnvelopeExceeded { t: f64, value: f64, envelope: f64 },

    #[error("velocity resolution exceeded at t = {t}: top-band energy fraction {fraction}")]
    ResolutionExceeded { t: f64, fraction: f64 },

    #[error("time {t} outside the stored field history [{start}, {end}]")]
    OutOfHistory { t: f64, start: f64, end: f64 },

    #[error("predicted echo time {t_echo} beyond the recurrence time {t_recurrence}")]
    EchoBeyondRecurrence { t_echo: f64, t_recurrence: f64 },

    #[error("no future echo for l = {l}, k = {k}, s = {s}")]
    NoFutureEcho { l: i64, k: i64, s: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
