use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("domain mismatch: [{left_start}, {left_end}] vs [{right_start}, {right_end}]")]
    DomainMismatch {
        left_start: f64,
        left_end: f64,
        right_start: f64,
        right_end: f64,
    },

    #[error("interval [{start}, {end}] is outside the signal domain [{domain_start}, {domain_end}]")]
    OutsideDomain {
        start: f64,
        end: f64,
        domain_start: f64,
        domain_end: f64,
    },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("argument {x} is outside the kernel window [{t0}, {t1}]")]
    OutsideWindow { x: f64, t0: f64, t1: f64 },

    #[error("threshold {0} is not in [0, 1]")]
    InvalidThreshold(f64),

    #[error("horizon shortfall: formula needs {required} time units but only {available} are available (deficit {})", required - available)]
    HorizonShortfall { required: f64, available: f64 },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("kernel shape {0} has no incremental recurrence")]
    UnsupportedKernel(&'static str),

    #[error("integration step must be positive and finite, got {0}")]
    InvalidStep(f64),

    #[error("robustness bracket did not converge after {0} expansions")]
    NonConvergent(usize),

    #[error("convolution is not monotone in r at t = {t}: H({r_lo}) = {h_lo} < H({r_hi}) = {h_hi}")]
    NonMonotone {
        t: f64,
        r_lo: f64,
        h_lo: f64,
        r_hi: f64,
        h_hi: f64,
    },

    #[error("sample at time {time} arrived after time {last}")]
    OutOfOrder { time: f64, last: f64 },
}
