use crate::signal::{BooleanSignal, Interval};

use super::VERDICT_TOLERANCE;

/// Convolution verdict over the evaluable horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct VerdictSignal {
    pub signal: BooleanSignal,
    /// Times where `H - p` changes sign.
    pub crossings: Vec<f64>,
    /// Stretches where `H` equals `p` within the verdict tolerance.
    pub plateaus: Vec<Interval>,
    /// `(t, H(t))` at every evaluation point.
    pub samples: Vec<(f64, f64)>,
}

impl VerdictSignal {
    /// Verdict at the start of the domain (satisfaction of the whole trace).
    pub fn satisfied(&self) -> bool {
        self.signal.is_true_at(self.signal.start())
    }

    pub(crate) fn plain(signal: BooleanSignal) -> Self {
        Self {
            signal,
            crossings: Vec::new(),
            plateaus: Vec::new(),
            samples: Vec::new(),
        }
    }
}

/// Builds a verdict from `H` sampled at increasing times.
///
/// The true intervals are kept normalized as they grow, so a prefix of the
/// builder output is valid input to another convolution node.
#[derive(Debug, Clone)]
pub(crate) struct VerdictBuilder {
    p: f64,
    start: f64,
    pub(crate) intervals: Vec<Interval>,
    last: Option<(f64, f64, bool)>,
    crossings: Vec<f64>,
    plateaus: Vec<Interval>,
    samples: Vec<(f64, f64)>,
}

impl VerdictBuilder {
    pub(crate) fn new(p: f64, start: f64) -> Self {
        Self {
            p,
            start,
            intervals: Vec::new(),
            last: None,
            crossings: Vec::new(),
            plateaus: Vec::new(),
            samples: Vec::new(),
        }
    }

    pub(crate) fn threshold(&self) -> f64 {
        self.p - VERDICT_TOLERANCE
    }

    fn classify(&self, h: f64) -> bool {
        h >= self.threshold()
    }

    fn at_level(&self, h: f64) -> bool {
        (h - self.p).abs() <= VERDICT_TOLERANCE
    }

    /// Time of the last pushed point.
    pub(crate) fn resolved(&self) -> Option<f64> {
        self.last.map(|(t, ..)| t)
    }

    /// Pushes the first point.
    pub(crate) fn first(&mut self, t: f64, h: f64) {
        debug_assert!(self.last.is_none());
        let c = self.classify(h);
        if c {
            self.intervals.push(Interval::new(t, t));
        }
        self.samples.push((t, h));
        self.last = Some((t, h, c));
    }

    /// Pushes the next point; `locate` returns the crossing time inside the
    /// step when the classification flips.
    pub(crate) fn step(&mut self, t: f64, h: f64, locate: impl FnOnce(f64, f64, f64, f64) -> f64) {
        let (t_prev, h_prev, c_prev) = self.last.expect("first point pushed");
        let c = self.classify(h);
        if self.at_level(h) && self.at_level(h_prev) {
            match self.plateaus.last_mut() {
                Some(last) if last.end == t_prev => last.end = t,
                _ => self.plateaus.push(Interval::new(t_prev, t)),
            }
        }
        if c == c_prev {
            if c {
                self.intervals.last_mut().expect("open run").end = t;
            }
        } else {
            let tc = locate(t_prev, h_prev, t, h).clamp(t_prev, t);
            self.crossings.push(tc);
            if c {
                match self.intervals.last_mut() {
                    Some(last) if last.end >= tc => last.end = t,
                    _ => self.intervals.push(Interval::new(tc, t)),
                }
            } else {
                let last = self.intervals.last_mut().expect("open run");
                last.end = tc;
                if last.end <= last.start {
                    self.intervals.pop();
                }
            }
        }
        self.samples.push((t, h));
        self.last = Some((t, h, c));
    }

    /// Final signal on `[start, end]`, where `end` is the last pushed time.
    pub(crate) fn finish(self) -> VerdictSignal {
        let end = self.resolved().unwrap_or(self.start);
        VerdictSignal {
            signal: BooleanSignal::normalized(self.start, end, self.intervals),
            crossings: self.crossings,
            plateaus: self.plateaus,
            samples: self.samples,
        }
    }
}

/// Crossing time by linear interpolation between two samples.
pub(crate) fn interpolate(level: f64) -> impl Fn(f64, f64, f64, f64) -> f64 {
    move |t0, h0, t1, h1| {
        if h1 == h0 {
            t1
        } else {
            t0 + (level - h0) / (h1 - h0) * (t1 - t0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_runs_and_crossings() {
        let mut b = VerdictBuilder::new(0.5, 0.0);
        let lin = interpolate(b.threshold());
        b.first(0.0, 0.4);
        b.step(1.0, 0.6, &lin);
        b.step(2.0, 0.7, &lin);
        b.step(3.0, 0.3, &lin);
        let v = b.finish();
        assert_eq!(v.crossings.len(), 2);
        assert_eq!(v.signal.intervals().len(), 1);
        let iv = v.signal.intervals()[0];
        assert!((iv.start - 0.5).abs() < 1e-9);
        assert!((iv.end - 2.5).abs() < 1e-9);
        assert_eq!(v.signal.domain(), (0.0, 3.0));
    }

    #[test]
    fn plateau_is_true_and_flagged() {
        let mut b = VerdictBuilder::new(0.125, 0.0);
        let lin = interpolate(b.threshold());
        b.first(0.0, 0.125);
        b.step(1.0, 0.125 - 1e-14, &lin);
        b.step(2.0, 0.125, &lin);
        let v = b.finish();
        assert!(v.signal.is_all_true());
        assert_eq!(v.plateaus, vec![Interval::new(0.0, 2.0)]);
    }

    #[test]
    fn single_point() {
        let mut b = VerdictBuilder::new(0.5, 2.0);
        b.first(2.0, 0.9);
        let v = b.finish();
        assert!(v.satisfied());
        assert_eq!(v.signal.domain(), (2.0, 2.0));
    }
}
