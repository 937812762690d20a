//! Sliding-window convolution evaluator.
//!
//! `H(t)` is initialized by a window integral and then advanced along a
//! schedule made of grid points `k * delta` and of the events
//! where a window bound `t + T0` or `t + T1` meets an interval endpoint.
//! Between consecutive schedule points the set of endpoints inside the
//! window is fixed, and
//!
//! ```text
//! dH/dt = sum_{rising u0 in window} k(u0 - t) - sum_{falling u1 in window} k(u1 - t)
//! ```
//!
//! is integrated with Simpson's rule (exact for the flat kernel).

use crate::error::{Error, Result};
use crate::kernel::BoundedKernel;
use crate::signal::{BooleanSignal, Interval, TIME_EPS};

use super::verdict::{VerdictBuilder, VerdictSignal};

/// Endpoint `j` of a sorted interval list: even `j` are rising, odd falling.
#[inline]
pub(crate) fn edge(intervals: &[Interval], j: usize) -> f64 {
    let iv = &intervals[j / 2];
    if j.is_multiple_of(2) {
        iv.start
    } else {
        iv.end
    }
}

/// Number of leading endpoints strictly below `limit`.
pub(crate) fn edges_below(intervals: &[Interval], limit: f64) -> usize {
    let mut n = 2 * intervals.len();
    while n > 0 && edge(intervals, n - 1) >= limit {
        n -= 1;
    }
    n
}

/// End of the verdict domain for an input ending at `d1`, or `None` when
/// the input cannot cover one full window from `d0`.
pub(crate) fn verdict_end(kernel: &BoundedKernel, d0: f64, d1: f64) -> Option<f64> {
    let te = d1 - kernel.t1();
    if te >= d0 {
        Some(te)
    } else if te > d0 - TIME_EPS {
        Some(d0)
    } else {
        None
    }
}

pub(crate) fn check_step(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidStep(delta))
    }
}

/// `dH/dt` at `s` with active endpoints `[lo, hi)`.
fn slope(kernel: &BoundedKernel, intervals: &[Interval], lo: usize, hi: usize, s: f64) -> f64 {
    if kernel.is_flat() {
        let n = hi.saturating_sub(lo) as i64;
        let rising = hi.div_ceil(2) as i64 - lo.div_ceil(2) as i64;
        return (2 * rising - n) as f64 * kernel.sup();
    }
    let mut sum = 0.0;
    for j in lo..hi {
        let k = kernel.density(edge(intervals, j) - s);
        if j.is_multiple_of(2) {
            sum += k;
        } else {
            sum -= k;
        }
    }
    sum
}

/// Event-aligned schedule over a growing interval list.
#[derive(Debug, Clone)]
pub(crate) struct Sweep {
    t0: f64,
    t1: f64,
    t_start: f64,
    delta: f64,
    pub(crate) t: f64,
    /// Endpoints with `e - T1 <= t`.
    pub(crate) enter: usize,
    /// Endpoints with `e - T0 <= t`.
    pub(crate) leave: usize,
    k_next: u64,
    /// Skip grid points where `H` is affine in `t`: everywhere for the flat
    /// kernel, and where no endpoint is inside the window otherwise.
    sparse: bool,
    flat: bool,
}

impl Sweep {
    pub(crate) fn new(kernel: &BoundedKernel, delta: f64, t_start: f64) -> Self {
        Self {
            t0: kernel.t0(),
            t1: kernel.t1(),
            t_start,
            delta,
            t: t_start,
            enter: 0,
            leave: 0,
            k_next: (t_start / delta).floor().max(0.0) as u64 + 1,
            sparse: false,
            flat: kernel.is_flat(),
        }
    }

    /// Grid points are absolute multiples of `delta`, so evaluations over
    /// sub-domains share the schedule of a full-domain run.
    fn grid(&self, k: u64) -> f64 {
        k as f64 * self.delta
    }

    /// Moves the pointers past every event at or before `t`.
    pub(crate) fn sync(&mut self, intervals: &[Interval], usable: usize) {
        while self.enter < usable && edge(intervals, self.enter) - self.t1 <= self.t {
            self.enter += 1;
        }
        while self.leave < usable && edge(intervals, self.leave) - self.t0 <= self.t {
            self.leave += 1;
        }
        if self.grid(self.k_next) <= self.t {
            let mut k = (self.t / self.delta).floor() as u64 + 1;
            while k > self.k_next && self.grid(k - 1) > self.t {
                k -= 1;
            }
            while self.grid(k) <= self.t {
                k += 1;
            }
            self.k_next = k;
        }
    }

    /// Next schedule point after `t`, capped by `stop`.
    pub(crate) fn next_time(&self, intervals: &[Interval], usable: usize, stop: Option<f64>) -> f64 {
        let skip = self.sparse && (self.flat || self.enter == self.leave);
        let mut next = if skip { f64::INFINITY } else { self.grid(self.k_next) };
        if self.enter < usable {
            next = next.min(edge(intervals, self.enter) - self.t1);
        }
        if self.leave < usable {
            next = next.min(edge(intervals, self.leave) - self.t0);
        }
        if let Some(s) = stop {
            next = next.min(s);
        }
        next
    }

    pub(crate) fn advance(&mut self, t_next: f64, intervals: &[Interval], usable: usize) {
        self.t = t_next;
        self.sync(intervals, usable);
    }
}

/// Incremental state of the sliding evaluator; shared by the offline and
/// streaming monitors so both produce identical output.
#[derive(Debug, Clone)]
pub(crate) struct ConvStepper {
    kernel: BoundedKernel,
    sweep: Sweep,
    h: f64,
    started: bool,
    done: bool,
    pub(crate) builder: VerdictBuilder,
}

impl ConvStepper {
    pub(crate) fn new(kernel: BoundedKernel, p: f64, delta: f64, t_start: f64) -> Self {
        Self {
            kernel,
            sweep: Sweep::new(&kernel, delta, t_start),
            h: 0.0,
            started: false,
            done: false,
            builder: VerdictBuilder::new(p, t_start),
        }
    }

    /// Same verdict as [`ConvStepper::new`] with grid points skipped where
    /// they cannot change it; `H` is then only sampled at events.
    pub(crate) fn sparse(kernel: BoundedKernel, p: f64, delta: f64, t_start: f64) -> Self {
        let mut stepper = Self::new(kernel, p, delta, t_start);
        stepper.sweep.sparse = true;
        stepper
    }

    pub(crate) fn resolved(&self) -> Option<f64> {
        self.builder.resolved()
    }

    /// Extends the verdict using the input known on `[t_start, known_end]`.
    ///
    /// Unless `last` is set, only steps whose whole window lies inside the
    /// known input are taken and endpoints at `known_end` are ignored, since
    /// they may still move.
    pub(crate) fn advance(&mut self, intervals: &[Interval], known_end: f64, last: bool) {
        if self.done {
            return;
        }
        let (usable, limit) = if last {
            match verdict_end(&self.kernel, self.sweep.t_start, known_end) {
                Some(te) => (2 * intervals.len(), te),
                None => return,
            }
        } else {
            (edges_below(intervals, known_end), known_end - self.kernel.t1())
        };
        if !self.started {
            if !(self.sweep.t_start <= limit) {
                return;
            }
            self.sweep.sync(intervals, usable);
            self.h = self.kernel.window_mass(intervals, self.sweep.t_start);
            self.builder.first(self.sweep.t_start, self.h);
            self.started = true;
        } else {
            self.sweep.sync(intervals, usable);
        }
        let kernel = self.kernel;
        let flat = kernel.is_flat();
        loop {
            let t = self.sweep.t;
            if last && t >= limit {
                self.done = true;
                break;
            }
            let t_next = self.sweep.next_time(intervals, usable, last.then_some(limit));
            if !last && t_next > limit {
                break;
            }
            let (lo, hi) = (self.sweep.leave, self.sweep.enter);
            let h_step = t_next - t;
            let f0 = slope(&kernel, intervals, lo, hi, t);
            let h1 = if flat {
                self.h + h_step * f0
            } else {
                let fm = slope(&kernel, intervals, lo, hi, t + 0.5 * h_step);
                let f1 = slope(&kernel, intervals, lo, hi, t_next);
                self.h + h_step / 6.0 * (f0 + 4.0 * fm + f1)
            };
            let level = self.builder.threshold();
            let locate = |ta: f64, ha: f64, tb: f64, _hb: f64| -> f64 {
                if flat {
                    return if f0 == 0.0 { tb } else { ta + (level - ha) / f0 };
                }
                let partial = |x: f64| {
                    let fm = slope(&kernel, intervals, lo, hi, ta + 0.5 * x);
                    let fx = slope(&kernel, intervals, lo, hi, ta + x);
                    ha + x / 6.0 * (f0 + 4.0 * fm + fx)
                };
                let above = ha >= level;
                let (mut a, mut b) = (0.0, tb - ta);
                while b - a > 1e-9 {
                    let m = 0.5 * (a + b);
                    if m <= a || m >= b {
                        break;
                    }
                    if (partial(m) >= level) == above {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                ta + 0.5 * (a + b)
            };
            self.builder.step(t_next, h1, locate);
            self.h = h1;
            self.sweep.advance(t_next, intervals, usable);
        }
    }

    pub(crate) fn finish(self) -> VerdictSignal {
        self.builder.finish()
    }
}

/// Sliding-window evaluation of `<k, p>` over `b` with maximum step `delta`.
pub fn eval_conv_efficient(kernel: &BoundedKernel, p: f64, b: &BooleanSignal, delta: f64) -> Result<VerdictSignal> {
    check_step(delta)?;
    super::check_horizon(kernel, b)?;
    let mut stepper = ConvStepper::new(*kernel, p, delta, b.start());
    stepper.advance(b.intervals(), b.end(), true);
    Ok(stepper.finish())
}

/// Verdict of [`eval_conv_efficient`] on a sparse schedule.
pub(crate) fn eval_conv_sparse(kernel: &BoundedKernel, p: f64, b: &BooleanSignal, delta: f64) -> Result<VerdictSignal> {
    check_step(delta)?;
    super::check_horizon(kernel, b)?;
    let mut stepper = ConvStepper::sparse(*kernel, p, delta, b.start());
    stepper.advance(b.intervals(), b.end(), true);
    Ok(stepper.finish())
}
