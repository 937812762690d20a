//! Monitoring for Signal Convolution Logic (SCL).
//!
//! SCL extends the Boolean connectives of signal temporal logic with a
//! convolution operator `<k[T0,T1], p> phi`: it holds at `t` when the
//! kernel-weighted fraction of the window `t + [T0, T1]` on which `phi` is
//! true reaches `p`. Globally and eventually are the `p = 1` and dual
//! `p = 0` instances of the operator.
//!
//! The crate is organised bottom-up:
//!
//! * [`signal`]: piecewise-constant traces and Boolean interval signals.
//! * [`kernel`]: bounded kernels (flat, exponential, gaussian) and their window integrals.
//! * [`formula`] and [`parser`]: the formula AST and its text syntax.
//! * [`monitor`]: the Boolean monitor, including the sliding-window convolution
//!   evaluator, its quadrature oracle, incremental recurrences and a streaming facade.
//! * [`robustness`]: quantitative semantics through grid search and bisection over `r`.

pub mod error;
pub mod formula;
pub mod kernel;
pub mod monitor;
pub mod parser;
mod quadrature;
pub mod robustness;
pub mod signal;

pub use error::{Error, Result};
pub use formula::{Atom, Comparison, Formula, Probability};
pub use kernel::{BoundedKernel, KernelShape, Window};
pub use monitor::{monitor, Evaluator, MonitorConfig, VerdictSignal};
pub use parser::{parse, parse_formula_file};
pub use robustness::{rho, rho_trace, RobustnessConfig, RobustnessTrace};
pub use signal::{BooleanSignal, Interval, PiecewiseConstantSignal};
