//! Recurrences that slide `H` from one schedule point to the next by
//! adding and removing window-edge mass.
//!
//! Flat: `H(t + h) = H(t) + (|chi| on t + T1 + [0, h] - |chi| on t + T0 + [0, h]) / L`.
//!
//! Exponential, from `k(x + y) = k(x) e^{a y}`:
//! `H(t + h) = e^{-a h} (H(t) - A) + B`, where `A` is the mass of window
//! arguments `[T0, T0 + h]` at `t` and `B` the mass of arguments
//! `[T1 - h, T1]` at `t + h`. For `a < 0` the factor `e^{-a h}` exceeds one,
//! so the recurrence is run backwards from the end of the domain instead.

use crate::error::{Error, Result};
use crate::kernel::{BoundedKernel, KernelShape};
use crate::signal::{BooleanSignal, Interval};

use super::efficient::{check_step, verdict_end, Sweep};
use super::verdict::{interpolate, VerdictBuilder, VerdictSignal};

/// Kernel mass of window arguments `[lo, hi]` at time `t`.
pub(crate) fn arg_mass(kernel: &BoundedKernel, intervals: &[Interval], t: f64, lo: f64, hi: f64) -> f64 {
    let first = intervals.partition_point(|iv| iv.end - t <= lo);
    let mut sum = 0.0;
    for iv in &intervals[first..] {
        let a = (iv.start - t).max(lo);
        if a >= hi {
            break;
        }
        let b = (iv.end - t).min(hi);
        if b > a {
            sum += kernel.integral_clamped(a, b);
        }
    }
    sum
}

/// Schedule points of the sliding evaluator over the whole of `b`.
pub(crate) fn schedule(kernel: &BoundedKernel, b: &BooleanSignal, delta: f64) -> Vec<f64> {
    let intervals = b.intervals();
    let usable = 2 * intervals.len();
    let te = verdict_end(kernel, b.start(), b.end()).expect("horizon checked");
    let mut sweep = Sweep::new(kernel, delta, b.start());
    sweep.sync(intervals, usable);
    let mut out = vec![b.start()];
    while sweep.t < te {
        let t_next = sweep.next_time(intervals, usable, Some(te));
        out.push(t_next);
        sweep.advance(t_next, intervals, usable);
    }
    out
}

pub fn eval_conv_incremental(kernel: &BoundedKernel, p: f64, b: &BooleanSignal, delta: f64) -> Result<VerdictSignal> {
    check_step(delta)?;
    super::check_horizon(kernel, b)?;
    let times = schedule(kernel, b, delta);
    let values = match kernel.shape() {
        KernelShape::Flat => flat_values(kernel, b, &times),
        KernelShape::Exponential { alpha } => exp_values(kernel, alpha, b, &times),
        other => return Err(Error::UnsupportedKernel(other.name())),
    };
    let mut builder = VerdictBuilder::new(p, b.start());
    let lin = interpolate(builder.threshold());
    builder.first(times[0], values[0]);
    for (&t, &h) in times.iter().zip(&values).skip(1) {
        builder.step(t, h, &lin);
    }
    Ok(builder.finish())
}

fn flat_values(kernel: &BoundedKernel, b: &BooleanSignal, times: &[f64]) -> Vec<f64> {
    let (t0, t1) = (kernel.t0(), kernel.t1());
    let inv_len = 1.0 / (t1 - t0);
    let mut h = kernel.window_mass(b.intervals(), times[0]);
    let mut out = Vec::with_capacity(times.len());
    out.push(h);
    for w in times.windows(2) {
        let (t, tn) = (w[0], w[1]);
        let entering = b.measure_in(t + t1, tn + t1);
        let leaving = b.measure_in(t + t0, tn + t0);
        h += (entering - leaving) * inv_len;
        out.push(h);
    }
    out
}

fn exp_values(kernel: &BoundedKernel, alpha: f64, b: &BooleanSignal, times: &[f64]) -> Vec<f64> {
    let (t0, t1) = (kernel.t0(), kernel.t1());
    let ivs = b.intervals();
    let n = times.len();
    let mut out = vec![0.0; n];
    if alpha > 0.0 {
        out[0] = kernel.window_mass(ivs, times[0]);
        for i in 0..n - 1 {
            let (t, tn) = (times[i], times[i + 1]);
            let step = tn - t;
            let leaving = arg_mass(kernel, ivs, t, t0, t0 + step);
            let entering = arg_mass(kernel, ivs, tn, t1 - step, t1);
            out[i + 1] = (-alpha * step).exp() * (out[i] - leaving) + entering;
        }
    } else {
        out[n - 1] = kernel.window_mass(ivs, times[n - 1]);
        for i in (0..n - 1).rev() {
            let (t, tn) = (times[i], times[i + 1]);
            let step = tn - t;
            let leaving = arg_mass(kernel, ivs, t, t0, t0 + step);
            let entering = arg_mass(kernel, ivs, tn, t1 - step, t1);
            out[i] = (alpha * step).exp() * (out[i + 1] - entering) + leaving;
        }
    }
    out
}
