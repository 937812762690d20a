//! Boolean monitoring of SCL formulas.
//!
//! [`monitor`] evaluates a formula bottom-up. Atoms are thresholded directly
//! on the trace, `!` and `|` use the interval algebra of [`BooleanSignal`],
//! and convolution nodes use one of three evaluators:
//!
//! * [`eval_conv_efficient`]: event-aligned sliding window with step `delta` (default);
//! * [`eval_conv_oracle`]: direct window integration on a uniform grid;
//! * [`eval_conv_incremental`]: edge-mass recurrences for flat and exponential kernels.
//!
//! `<k, p>* phi` is evaluated as `!<k, 1 - p> !phi`, so it holds exactly
//! where `k * chi(phi) > p`.

mod atom;
mod efficient;
mod incremental;
mod oracle;
mod streaming;
mod verdict;

pub use atom::eval_atom;
pub use efficient::eval_conv_efficient;
pub use incremental::eval_conv_incremental;
pub use oracle::eval_conv_oracle;
pub use streaming::StreamingMonitor;
pub use verdict::VerdictSignal;

pub(crate) use efficient::{eval_conv_sparse, verdict_end};

use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::kernel::{BoundedKernel, KernelShape};
use crate::signal::{BooleanSignal, PiecewiseConstantSignal, TIME_EPS};

/// `H` within this distance below `p` still counts as reaching `p`.
pub const VERDICT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Evaluator {
    #[default]
    Efficient,
    Oracle,
    /// Falls back to [`Evaluator::Efficient`] for gaussian kernels.
    Incremental,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MonitorConfig {
    /// Maximum integration step; defaults to `(T1 - T0) / 1000` per kernel.
    pub delta: Option<f64>,
    pub evaluator: Evaluator,
    /// Oracle grid pitch; defaults to half the step.
    pub oracle_grid: Option<f64>,
}

impl MonitorConfig {
    pub fn with_evaluator(evaluator: Evaluator) -> Self {
        Self {
            evaluator,
            ..Self::default()
        }
    }

    pub fn delta_for(&self, kernel: &BoundedKernel) -> f64 {
        self.delta.unwrap_or((kernel.t1() - kernel.t0()) / 1000.0)
    }

    pub fn grid_for(&self, kernel: &BoundedKernel) -> f64 {
        self.oracle_grid.unwrap_or(0.5 * self.delta_for(kernel))
    }
}

pub(crate) fn check_horizon(kernel: &BoundedKernel, b: &BooleanSignal) -> Result<()> {
    match verdict_end(kernel, b.start(), b.end()) {
        Some(_) => Ok(()),
        None => Err(Error::HorizonShortfall {
            required: kernel.t1(),
            available: b.end() - b.start(),
        }),
    }
}

/// Evaluates `<k, p>` over `b` with the configured evaluator.
pub fn eval_conv(kernel: &BoundedKernel, p: f64, b: &BooleanSignal, cfg: &MonitorConfig) -> Result<VerdictSignal> {
    let delta = cfg.delta_for(kernel);
    match cfg.evaluator {
        Evaluator::Efficient => eval_conv_efficient(kernel, p, b, delta),
        Evaluator::Oracle => eval_conv_oracle(kernel, p, b, cfg.grid_for(kernel)),
        Evaluator::Incremental => match kernel.shape() {
            KernelShape::Gaussian { .. } => eval_conv_efficient(kernel, p, b, delta),
            _ => eval_conv_incremental(kernel, p, b, delta),
        },
    }
}

pub(crate) fn check_formula_horizon(s: &PiecewiseConstantSignal, f: &Formula) -> Result<()> {
    let required = f.horizon();
    if s.duration() < required - TIME_EPS {
        return Err(Error::HorizonShortfall {
            required,
            available: s.duration(),
        });
    }
    Ok(())
}

/// Satisfaction signal of `f` on `[0, duration - horizon(f)]`.
///
/// Crossings, plateaus and samples are those of the outermost convolution
/// node when the formula is one (possibly negated), and empty otherwise.
pub fn monitor(s: &PiecewiseConstantSignal, f: &Formula, cfg: &MonitorConfig) -> Result<VerdictSignal> {
    check_formula_horizon(s, f)?;
    eval_node(s, &f.expand_duals(), cfg)
}

pub(crate) fn eval_node(s: &PiecewiseConstantSignal, f: &Formula, cfg: &MonitorConfig) -> Result<VerdictSignal> {
    Ok(match f {
        Formula::True => VerdictSignal::plain(BooleanSignal::all_true(0.0, s.duration())),
        Formula::False => VerdictSignal::plain(BooleanSignal::all_false(0.0, s.duration())),
        Formula::Atom(a) => VerdictSignal::plain(eval_atom(s, a)?),
        Formula::Not(a) => {
            let mut v = eval_node(s, a, cfg)?;
            v.signal = v.signal.not();
            v
        }
        Formula::Or(a, b) => {
            let l = eval_node(s, a, cfg)?.signal;
            let r = eval_node(s, b, cfg)?.signal;
            VerdictSignal::plain(or_common(&l, &r)?)
        }
        Formula::Conv { kernel, p, arg } => {
            let child = eval_node(s, arg, cfg)?.signal;
            eval_conv(kernel, p.value(), &child, cfg)?
        }
        _ => unreachable!("formula is desugared with duals expanded"),
    })
}

/// Disjunction on the common prefix of the two domains.
pub(crate) fn or_common(l: &BooleanSignal, r: &BooleanSignal) -> Result<BooleanSignal> {
    let end = l.end().min(r.end());
    l.restrict(l.start(), end)?.or(&r.restrict(r.start(), end)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    fn cfg() -> MonitorConfig {
        MonitorConfig::default()
    }

    #[test]
    fn globally_on_constant_trace() {
        let s = PiecewiseConstantSignal::univariate("G", &[(0.0, 110.0)], Some(30.0)).unwrap();
        let v = monitor(&s, &parse("G[0,24](G >= 70)").unwrap(), &cfg()).unwrap();
        assert!(v.signal.is_all_true());
        assert_eq!(v.signal.domain(), (0.0, 6.0));
    }

    #[test]
    fn three_hours_in_twenty_four() {
        let mut samples = Vec::new();
        for day in 0..3 {
            let base = 24.0 * day as f64;
            samples.push((base, 200.0));
            samples.push((base + 3.0, 100.0));
        }
        let s = PiecewiseConstantSignal::univariate("G", &samples, Some(72.0)).unwrap();
        let f = parse("<flat[0,24], 0.125> (G >= 180)").unwrap();
        for evaluator in [Evaluator::Efficient, Evaluator::Oracle, Evaluator::Incremental] {
            let v = monitor(&s, &f, &MonitorConfig::with_evaluator(evaluator)).unwrap();
            assert!(v.signal.is_all_true(), "{evaluator:?}: {:?}", v.signal);
            assert!(v.samples.iter().all(|&(_, h)| (h - 0.125).abs() < 1e-9));
            assert!(!v.plateaus.is_empty());
        }
    }

    #[test]
    fn eventually_is_dual_of_globally() {
        let s = PiecewiseConstantSignal::univariate("a", &[(0.0, 0.0), (1.3, 1.0), (1.7, 0.0), (4.0, 1.0)], Some(6.0))
            .unwrap();
        let f = monitor(&s, &parse("F[0,1] a >= 1").unwrap(), &cfg()).unwrap();
        let g = monitor(&s, &parse("!G[0,1] !(a >= 1)").unwrap(), &cfg()).unwrap();
        assert_eq!(f.signal, g.signal);
        let iv = f.signal.intervals();
        assert!((iv[0].start - 0.3).abs() < 1e-9 && (iv[0].end - 1.7).abs() < 1e-9);
    }

    #[test]
    fn horizon_shortfall_names_deficit() {
        let s = PiecewiseConstantSignal::univariate("G", &[(0.0, 110.0)], Some(20.0)).unwrap();
        let err = monitor(&s, &parse("G[0,24](G >= 70)").unwrap(), &cfg()).unwrap_err();
        assert!(matches!(err, Error::HorizonShortfall { required, available } if required == 24.0 && available == 20.0));
        assert!(err.to_string().contains("deficit 4"));
    }

    #[test]
    fn or_uses_common_domain() {
        let s = PiecewiseConstantSignal::univariate("x", &[(0.0, 1.0), (5.0, -1.0)], Some(10.0)).unwrap();
        let v = monitor(&s, &parse("x > 0 | G[0,2] x < 0").unwrap(), &cfg()).unwrap();
        assert_eq!(v.signal.domain(), (0.0, 8.0));
        assert!(v.signal.is_all_true());
    }
}
