//! Online monitor: samples are pushed one at a time and the verdict is
//! released as soon as every window it depends on is known.
//!
//! Each node of the (desugared, dual-expanded) formula keeps its output as a
//! growing normalized interval list together with the time up to which that
//! output is final. Convolution nodes run the same stepper as the offline
//! sliding evaluator, so after [`StreamingMonitor::finish`] the concatenation
//! of every polled chunk equals [`super::monitor`] with the efficient
//! evaluator exactly. The resolved time of a convolution node is its last
//! schedule point, which trails `latest input - T1` by less than one step.

use crate::error::{Error, Result};
use crate::formula::{Atom, Formula};
use crate::signal::{BooleanSignal, Interval, PiecewiseConstantSignal};

use super::efficient::{verdict_end, ConvStepper};
use super::{check_formula_horizon, MonitorConfig};

#[derive(Debug, Clone)]
enum Kind {
    Const(bool),
    Atom {
        var: usize,
        atom: Atom,
        /// Time and truth of the latest sample.
        latest: Option<(f64, bool)>,
    },
    Not(Box<Node>),
    Or(Box<Node>, Box<Node>),
    Conv {
        stepper: Box<ConvStepper>,
        child: Box<Node>,
    },
}

#[derive(Debug, Clone)]
struct Node {
    kind: Kind,
    out: Vec<Interval>,
    resolved: f64,
}

/// Restriction of `intervals` to `[a, b]` as a normalized signal.
fn clip(intervals: &[Interval], a: f64, b: f64) -> BooleanSignal {
    let first = intervals.partition_point(|iv| iv.end < a);
    let raw = intervals[first..]
        .iter()
        .take_while(|iv| iv.start <= b)
        .map(|iv| Interval::new(iv.start.max(a), iv.end.min(b)))
        .collect();
    BooleanSignal::normalized(a, b, raw)
}

fn append(out: &mut Vec<Interval>, chunk: &[Interval]) {
    for iv in chunk {
        match out.last_mut() {
            Some(last) if iv.start <= last.end => last.end = last.end.max(iv.end),
            _ => out.push(*iv),
        }
    }
}

impl Node {
    fn build(f: &Formula, variables: &[String], cfg: &MonitorConfig) -> Result<Self> {
        let kind = match f {
            Formula::True => Kind::Const(true),
            Formula::False => Kind::Const(false),
            Formula::Atom(a) => Kind::Atom {
                var: variables
                    .iter()
                    .position(|v| *v == a.variable)
                    .ok_or_else(|| Error::UnknownVariable(a.variable.clone()))?,
                atom: a.clone(),
                latest: None,
            },
            Formula::Not(a) => Kind::Not(Box::new(Self::build(a, variables, cfg)?)),
            Formula::Or(a, b) => Kind::Or(
                Box::new(Self::build(a, variables, cfg)?),
                Box::new(Self::build(b, variables, cfg)?),
            ),
            Formula::Conv { kernel, p, arg } => Kind::Conv {
                stepper: Box::new(ConvStepper::new(*kernel, p.value(), cfg.delta_for(kernel), 0.0)),
                child: Box::new(Self::build(arg, variables, cfg)?),
            },
            _ => unreachable!("formula is desugared with duals expanded"),
        };
        Ok(Self {
            kind,
            out: Vec::new(),
            resolved: 0.0,
        })
    }

    fn intervals(&self) -> &[Interval] {
        match &self.kind {
            Kind::Conv { stepper, .. } => &stepper.builder.intervals,
            _ => &self.out,
        }
    }

    /// Brings the node up to date with the input known on `[0, known]`.
    fn update(&mut self, known: f64, sample: Option<&[f64]>, last: bool) {
        match &mut self.kind {
            Kind::Const(value) => {
                if *value && known > self.resolved {
                    append(&mut self.out, &[Interval::new(0.0, known)]);
                }
                self.resolved = self.resolved.max(known);
            }
            Kind::Atom { var, atom, latest } => {
                let next = sample.map(|row| atom.holds(row[*var]));
                if let Some((t, truth)) = *latest {
                    if known > t && truth {
                        append(&mut self.out, &[Interval::new(t, known)]);
                    }
                }
                if let Some(truth) = next {
                    *latest = Some((known, truth));
                } else if let Some((_, truth)) = *latest {
                    *latest = Some((known, truth));
                }
                self.resolved = known;
            }
            Kind::Not(child) => {
                child.update(known, sample, last);
                let (a, b) = (self.resolved, child.resolved);
                if b > a {
                    let chunk = clip(child.intervals(), a, b).not();
                    append(&mut self.out, chunk.intervals());
                    self.resolved = b;
                }
            }
            Kind::Or(l, r) => {
                l.update(known, sample, last);
                r.update(known, sample, last);
                let (a, b) = (self.resolved, l.resolved.min(r.resolved));
                if b > a {
                    let chunk = clip(l.intervals(), a, b)
                        .or(&clip(r.intervals(), a, b))
                        .expect("chunks share a domain");
                    append(&mut self.out, chunk.intervals());
                    self.resolved = b;
                }
            }
            Kind::Conv { stepper, child } => {
                child.update(known, sample, last);
                stepper.advance(child.intervals(), child.resolved, last);
                self.resolved = stepper.resolved().unwrap_or(0.0);
            }
        }
    }

    /// Domain end of the final output for a trace of length `duration`.
    fn final_end(f: &Formula, duration: f64) -> Option<f64> {
        match f {
            Formula::Not(a) => Self::final_end(a, duration),
            Formula::Or(a, b) => Some(Self::final_end(a, duration)?.min(Self::final_end(b, duration)?)),
            Formula::Conv { kernel, arg, .. } => verdict_end(kernel, 0.0, Self::final_end(arg, duration)?),
            _ => Some(duration),
        }
    }
}

/// Sample-by-sample monitor for a single formula.
///
/// Convolution nodes always use the sliding evaluator with the configured
/// step. `push` and `poll` must be called from one thread at a time.
#[derive(Debug, Clone)]
pub struct StreamingMonitor {
    formula: Formula,
    core: Formula,
    cfg: MonitorConfig,
    variables: Vec<String>,
    root: Node,
    samples: Vec<(f64, Vec<f64>)>,
    emitted: f64,
    finished: Option<f64>,
    point: Option<BooleanSignal>,
}

impl StreamingMonitor {
    pub fn new(formula: &Formula, variables: &[String], cfg: &MonitorConfig) -> Result<Self> {
        let core = formula.expand_duals();
        let root = Node::build(&core, variables, cfg)?;
        Ok(Self {
            formula: formula.clone(),
            core,
            cfg: *cfg,
            variables: variables.to_vec(),
            root,
            samples: Vec::new(),
            emitted: 0.0,
            finished: None,
            point: None,
        })
    }

    /// Time of the latest pushed sample.
    pub fn latest(&self) -> Option<f64> {
        self.samples.last().map(|(t, _)| *t)
    }

    /// Time up to which the verdict is final.
    pub fn resolved(&self) -> f64 {
        self.root.resolved
    }

    pub fn push(&mut self, time: f64, values: &[f64]) -> Result<()> {
        if self.finished.is_some() {
            return Err(Error::InvalidSignal("sample pushed after finish".into()));
        }
        if values.len() != self.variables.len() {
            return Err(Error::InvalidSignal(format!(
                "sample at {time} has {} values, expected {}",
                values.len(),
                self.variables.len()
            )));
        }
        if !time.is_finite() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSignal(format!("non-finite sample at time {time}")));
        }
        match self.latest() {
            None if time != 0.0 => {
                return Err(Error::InvalidSignal(format!("first sample must be at time 0, got {time}")));
            }
            Some(last) if time <= last => return Err(Error::OutOfOrder { time, last }),
            _ => {}
        }
        self.samples.push((time, values.to_vec()));
        self.root.update(time, Some(values), false);
        Ok(())
    }

    /// Closes the stream at `duration` (the latest sample time by default).
    pub fn finish(&mut self, duration: Option<f64>) -> Result<()> {
        if self.finished.is_some() {
            return Ok(());
        }
        let Some(latest) = self.latest() else {
            return Err(Error::InvalidSignal("no samples pushed".into()));
        };
        let duration = duration.unwrap_or(latest);
        if !(duration >= latest) || !duration.is_finite() {
            return Err(Error::InvalidSignal(format!(
                "duration {duration} precedes the latest sample at {latest}"
            )));
        }
        let trace = PiecewiseConstantSignal::new(self.variables.clone(), self.samples.clone(), Some(duration))?;
        check_formula_horizon(&trace, &self.formula)?;
        let end = Node::final_end(&self.core, duration).expect("horizon checked");
        if end <= 0.0 {
            self.point = Some(super::monitor(&trace, &self.formula, &self.cfg)?.signal);
        } else {
            self.root.update(duration, None, true);
        }
        self.finished = Some(end);
        Ok(())
    }

    /// Verdict resolved since the previous call, if any.
    pub fn poll(&mut self) -> Option<BooleanSignal> {
        if let Some(point) = self.point.take() {
            return Some(point);
        }
        let (a, b) = (self.emitted, self.root.resolved);
        if b > a {
            self.emitted = b;
            Some(clip(self.root.intervals(), a, b))
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monitor::monitor;
    use crate::parser::parse;

    fn vars() -> Vec<String> {
        vec!["x".to_string()]
    }

    #[test]
    fn empty_poll() {
        let f = parse("G[0,4] x > 0").unwrap();
        let mut m = StreamingMonitor::new(&f, &vars(), &MonitorConfig::default()).unwrap();
        assert!(m.poll().is_none());
    }

    #[test]
    fn resolution_trails_window() {
        let f = parse("<flat[0,4], 0.5> x > 0").unwrap();
        let mut m = StreamingMonitor::new(&f, &vars(), &MonitorConfig::default()).unwrap();
        for i in 0..=10 {
            m.push(i as f64, &[if i % 3 == 0 { 1.0 } else { -1.0 }]).unwrap();
        }
        let delta = 4.0 / 1000.0;
        assert!(m.resolved() <= 6.0 && m.resolved() >= 6.0 - delta, "{}", m.resolved());
        let chunk = m.poll().unwrap();
        assert_eq!(chunk.domain(), (0.0, m.resolved()));

        let cfg = MonitorConfig {
            delta: Some(0.5),
            ..MonitorConfig::default()
        };
        let mut m = StreamingMonitor::new(&f, &vars(), &cfg).unwrap();
        for i in 0..=10 {
            m.push(i as f64, &[1.0]).unwrap();
        }
        assert_eq!(m.resolved(), 6.0);
    }

    #[test]
    fn matches_offline() {
        let f = parse("F[0,1.5] (x > 0 & <exp(2)[0.5,2], 0.4> x < 0.5)").unwrap();
        let samples: Vec<(f64, f64)> = (0..40).map(|i| (i as f64 * 0.37, ((i * 7) % 5) as f64 / 4.0)).collect();
        let trace = PiecewiseConstantSignal::univariate("x", &samples, Some(15.0)).unwrap();
        let offline = monitor(&trace, &f, &MonitorConfig::default()).unwrap().signal;
        let mut m = StreamingMonitor::new(&f, &vars(), &MonitorConfig::default()).unwrap();
        let mut acc: Option<BooleanSignal> = None;
        let absorb = |chunk: Option<BooleanSignal>, acc: &mut Option<BooleanSignal>| {
            if let Some(c) = chunk {
                *acc = Some(match acc.take() {
                    None => c,
                    Some(a) => a.concat(&c).unwrap(),
                });
            }
        };
        for &(t, v) in &samples {
            m.push(t, &[v]).unwrap();
            absorb(m.poll(), &mut acc);
        }
        m.finish(Some(15.0)).unwrap();
        absorb(m.poll(), &mut acc);
        assert_eq!(acc.unwrap(), offline);
    }

    #[test]
    fn rejects_out_of_order() {
        let f = parse("x > 0").unwrap();
        let mut m = StreamingMonitor::new(&f, &vars(), &MonitorConfig::default()).unwrap();
        assert!(m.push(1.0, &[0.0]).is_err());
        m.push(0.0, &[0.0]).unwrap();
        m.push(2.0, &[0.0]).unwrap();
        assert!(matches!(m.push(1.0, &[0.0]), Err(Error::OutOfOrder { .. })));
    }
}
