//! Piecewise-constant traces and Boolean interval signals.
//!
//! A [`BooleanSignal`] stores its true-set as sorted, pairwise disjoint and
//! non-adjacent closed intervals inside a closed domain. Boundary membership
//! is immaterial to every convolution, so endpoints are kept closed and
//! zero-length intervals are discarded, except on a degenerate (single
//! point) domain where a point is the only thing that can be true.

use crate::error::{Error, Result};

/// Slack accepted when a caller-supplied time lands just outside a domain
/// because of floating-point rounding.
pub(crate) const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains(&self, t: f64) -> bool {
        self.start <= t && t <= self.end
    }
}

impl From<(f64, f64)> for Interval {
    fn from((start, end): (f64, f64)) -> Self {
        Self { start, end }
    }
}

/// A Boolean signal over `[start, end]`, represented by its true-intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct BooleanSignal {
    start: f64,
    end: f64,
    intervals: Vec<Interval>,
}

fn check_time(t: f64, what: &str) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSignal(format!("{what} must be finite, got {t}")))
    }
}

impl BooleanSignal {
    /// Builds a signal from arbitrary (possibly overlapping, unsorted)
    /// true-intervals; the result is normalized.
    pub fn new<I, T>(start: f64, end: f64, intervals: I) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: Into<Interval>,
    {
        check_time(start, "domain start")?;
        check_time(end, "domain end")?;
        if start > end {
            return Err(Error::InvalidSignal(format!(
                "domain start {start} exceeds domain end {end}"
            )));
        }
        let mut raw = Vec::new();
        for iv in intervals {
            let iv: Interval = iv.into();
            check_time(iv.start, "interval start")?;
            check_time(iv.end, "interval end")?;
            if iv.start > iv.end {
                return Err(Error::InvalidSignal(format!(
                    "interval start {} exceeds its end {}",
                    iv.start, iv.end
                )));
            }
            if iv.start < start - TIME_EPS || iv.end > end + TIME_EPS {
                return Err(Error::OutsideDomain {
                    start: iv.start,
                    end: iv.end,
                    domain_start: start,
                    domain_end: end,
                });
            }
            raw.push(Interval::new(iv.start.max(start), iv.end.min(end)));
        }
        Ok(Self::normalized(start, end, raw))
    }

    /// Reassembles a signal from its unitary decomposition.
    pub fn from_unitary(start: f64, end: f64, unitary: &[Interval]) -> Result<Self> {
        Self::new(start, end, unitary.iter().copied())
    }

    pub fn all_true(start: f64, end: f64) -> Self {
        Self::normalized(start, end, vec![Interval::new(start, end)])
    }

    pub fn all_false(start: f64, end: f64) -> Self {
        Self {
            start,
            end,
            intervals: Vec::new(),
        }
    }

    /// Normalizes intervals already clipped to the domain.
    pub(crate) fn normalized(start: f64, end: f64, mut raw: Vec<Interval>) -> Self {
        let keep_points = start == end;
        raw.retain(|iv| keep_points || iv.end > iv.start);
        raw.sort_by(|a, b| a.start.total_cmp(&b.start));
        let mut intervals: Vec<Interval> = Vec::with_capacity(raw.len());
        for iv in raw {
            match intervals.last_mut() {
                Some(last) if iv.start <= last.end => {
                    if iv.end > last.end {
                        last.end = iv.end;
                    }
                }
                _ => intervals.push(iv),
            }
        }
        Self {
            start,
            end,
            intervals,
        }
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.start, self.end)
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// Unitary decomposition: one interval per maximal true stretch.
    pub fn decompose(&self) -> Vec<Interval> {
        self.intervals.clone()
    }

    pub fn is_all_false(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn is_all_true(&self) -> bool {
        self.intervals.len() == 1
            && self.intervals[0].start == self.start
            && self.intervals[0].end == self.end
    }

    pub fn is_true_at(&self, t: f64) -> bool {
        let idx = self.intervals.partition_point(|iv| iv.end < t);
        self.intervals.get(idx).is_some_and(|iv| iv.start <= t)
    }

    /// Total length of the true-set.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(Interval::length).sum()
    }

    /// Length of the true-set inside `[a, b]`.
    pub fn measure_in(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let first = self.intervals.partition_point(|iv| iv.end <= a);
        self.intervals[first..]
            .iter()
            .take_while(|iv| iv.start < b)
            .map(|iv| (iv.end.min(b) - iv.start.max(a)).max(0.0))
            .sum()
    }

    /// Alternating `(start, end, truth)` segments covering the domain.
    pub fn segments(&self) -> Vec<(f64, f64, bool)> {
        if self.start == self.end {
            return vec![(self.start, self.end, !self.intervals.is_empty())];
        }
        let mut out = Vec::with_capacity(2 * self.intervals.len() + 1);
        let mut cursor = self.start;
        for iv in &self.intervals {
            if iv.start > cursor {
                out.push((cursor, iv.start, false));
            }
            out.push((iv.start, iv.end, true));
            cursor = iv.end;
        }
        if cursor < self.end {
            out.push((cursor, self.end, false));
        }
        out
    }

    pub fn not(&self) -> Self {
        if self.start == self.end {
            return if self.intervals.is_empty() {
                Self::all_true(self.start, self.end)
            } else {
                Self::all_false(self.start, self.end)
            };
        }
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        let mut cursor = self.start;
        for iv in &self.intervals {
            if iv.start > cursor {
                out.push(Interval::new(cursor, iv.start));
            }
            cursor = iv.end;
        }
        if cursor < self.end {
            out.push(Interval::new(cursor, self.end));
        }
        Self {
            start: self.start,
            end: self.end,
            intervals: out,
        }
    }

    fn check_same_domain(&self, other: &Self) -> Result<()> {
        if self.start == other.start && self.end == other.end {
            Ok(())
        } else {
            Err(Error::DomainMismatch {
                left_start: self.start,
                left_end: self.end,
                right_start: other.start,
                right_end: other.end,
            })
        }
    }

    pub fn or(&self, other: &Self) -> Result<Self> {
        self.check_same_domain(other)?;
        let mut raw = Vec::with_capacity(self.intervals.len() + other.intervals.len());
        raw.extend_from_slice(&self.intervals);
        raw.extend_from_slice(&other.intervals);
        Ok(Self::normalized(self.start, self.end, raw))
    }

    pub fn and(&self, other: &Self) -> Result<Self> {
        Ok(self.not().or(&other.not())?.not())
    }

    /// True where exactly one of the two signals is true.
    pub fn xor(&self, other: &Self) -> Result<Self> {
        let either = self.or(other)?;
        let both = self.and(other)?;
        either.and(&both.not())
    }

    /// Intersects the signal with `[a, b]`, which becomes the new domain.
    pub fn restrict(&self, a: f64, b: f64) -> Result<Self> {
        if !(a <= b) || a < self.start - TIME_EPS || b > self.end + TIME_EPS {
            return Err(Error::OutsideDomain {
                start: a,
                end: b,
                domain_start: self.start,
                domain_end: self.end,
            });
        }
        let a = a.max(self.start);
        let b = b.min(self.end).max(a);
        let first = self.intervals.partition_point(|iv| iv.end < a);
        let raw = self.intervals[first..]
            .iter()
            .take_while(|iv| iv.start <= b)
            .map(|iv| Interval::new(iv.start.max(a), iv.end.min(b)))
            .collect();
        Ok(Self::normalized(a, b, raw))
    }

    /// Appends a signal whose domain starts where this one ends.
    pub fn concat(&self, next: &Self) -> Result<Self> {
        if next.start != self.end {
            return Err(Error::DomainMismatch {
                left_start: self.start,
                left_end: self.end,
                right_start: next.start,
                right_end: next.end,
            });
        }
        let mut raw = self.intervals.clone();
        raw.extend_from_slice(&next.intervals);
        Ok(Self::normalized(self.start, next.end, raw))
    }
}

/// A sampled multi-variable trace with right-continuous step interpretation:
/// the value at `t` is the latest sample at or before `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstantSignal {
    variables: Vec<String>,
    times: Vec<f64>,
    values: Vec<f64>,
    duration: f64,
}

impl PiecewiseConstantSignal {
    /// `duration` defaults to the last sample time.
    pub fn new(
        variables: Vec<String>,
        samples: Vec<(f64, Vec<f64>)>,
        duration: Option<f64>,
    ) -> Result<Self> {
        for (i, name) in variables.iter().enumerate() {
            if variables[..i].contains(name) {
                return Err(Error::InvalidSignal(format!("duplicate variable `{name}`")));
            }
        }
        let Some(first) = samples.first() else {
            return Err(Error::InvalidSignal("trace has no samples".into()));
        };
        if first.0 != 0.0 {
            return Err(Error::InvalidSignal(format!(
                "first sample must be at time 0, got {}",
                first.0
            )));
        }
        let width = variables.len();
        let mut times = Vec::with_capacity(samples.len());
        let mut values = Vec::with_capacity(samples.len() * width);
        for (t, row) in samples {
            check_time(t, "sample time")?;
            if let Some(&last) = times.last() {
                if t <= last {
                    return Err(Error::InvalidSignal(format!(
                        "sample times must be strictly increasing: {t} after {last}"
                    )));
                }
            }
            if row.len() != width {
                return Err(Error::InvalidSignal(format!(
                    "sample at {t} has {} values, expected {width}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidSignal(format!(
                    "sample at {t} has non-finite value {v}"
                )));
            }
            times.push(t);
            values.extend(row);
        }
        let last = *times.last().unwrap();
        let duration = duration.unwrap_or(last);
        check_time(duration, "duration")?;
        if duration < last {
            return Err(Error::InvalidSignal(format!(
                "duration {duration} ends before the last sample at {last}"
            )));
        }
        Ok(Self {
            variables,
            times,
            values,
            duration,
        })
    }

    /// Single-variable convenience constructor.
    pub fn univariate(name: &str, samples: &[(f64, f64)], duration: Option<f64>) -> Result<Self> {
        Self::new(
            vec![name.to_string()],
            samples.iter().map(|&(t, v)| (t, vec![v])).collect(),
            duration,
        )
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn variable_index(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.variables.len();
        &self.values[i * w..(i + 1) * w]
    }

    pub fn value(&self, i: usize, var: usize) -> f64 {
        self.values[i * self.variables.len() + var]
    }

    fn index_at(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s <= t).saturating_sub(1)
    }

    pub fn value_at(&self, var: usize, t: f64) -> f64 {
        self.value(self.index_at(t), var)
    }

    /// `(start, end, value)` pieces of one variable covering `[0, duration]`.
    /// The last piece is zero-length when the final sample sits at `duration`.
    pub fn segments(&self, var: usize) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.times.len()).map(move |i| {
            let end = self.times.get(i + 1).copied().unwrap_or(self.duration);
            (self.times[i], end, self.value(i, var))
        })
    }

    /// Segments of one variable that overlap `[a, b]`, clipped to it.
    pub fn segments_in(&self, var: usize, a: f64, b: f64) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let first = self.index_at(a);
        (first..self.times.len())
            .map(move |i| {
                let end = self.times.get(i + 1).copied().unwrap_or(self.duration);
                (self.times[i], end, self.value(i, var))
            })
            .take_while(move |&(s, _, _)| s <= b)
            .map(move |(s, e, v)| (s.max(a), e.min(b), v))
    }

    pub fn column(&self, var: usize) -> Vec<f64> {
        (0..self.times.len()).map(|i| self.value(i, var)).collect()
    }

    /// Same sample times and duration, new values (row-major, same shape).
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(Error::InvalidSignal(format!(
                "expected {} values, got {}",
                self.values.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidSignal(format!("non-finite value {v}")));
        }
        Ok(Self {
            variables: self.variables.clone(),
            times: self.times.clone(),
            values,
            duration: self.duration,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        (0..self.times.len()).map(move |i| (self.times[i], self.row(i)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(start: f64, end: f64, ivs: &[(f64, f64)]) -> BooleanSignal {
        BooleanSignal::new(start, end, ivs.iter().copied()).unwrap()
    }

    #[test]
    fn decompose_single_interval() {
        let b = sig(0.0, 1.0, &[(0.3, 0.9)]);
        assert_eq!(b.decompose(), vec![Interval::new(0.3, 0.9)]);
    }

    #[test]
    fn decompose_false_and_adjacent() {
        assert!(BooleanSignal::all_false(0.0, 1.0).decompose().is_empty());
        let b = sig(0.0, 1.0, &[(0.0, 0.2), (0.2, 0.5)]);
        assert_eq!(b.decompose(), vec![Interval::new(0.0, 0.5)]);
    }

    #[test]
    fn zero_length_intervals_are_dropped() {
        let b = sig(0.0, 1.0, &[(0.4, 0.4), (0.6, 0.7)]);
        assert_eq!(b.intervals(), &[Interval::new(0.6, 0.7)]);
        let point = sig(2.0, 2.0, &[(2.0, 2.0)]);
        assert!(point.is_true_at(2.0));
        assert!(point.not().is_all_false());
        assert!(BooleanSignal::all_false(2.0, 2.0).not().is_true_at(2.0));
    }

    #[test]
    fn not_complements_within_domain() {
        let b = sig(0.0, 1.0, &[(0.3, 0.9)]);
        assert_eq!(
            b.not().intervals(),
            &[Interval::new(0.0, 0.3), Interval::new(0.9, 1.0)]
        );
        assert!(BooleanSignal::all_true(0.0, 1.0).not().is_all_false());
        assert_eq!(b.not().not(), b);
    }

    #[test]
    fn or_unions_and_checks_domain() {
        let a = sig(0.0, 1.0, &[(0.0, 0.4)]);
        let b = sig(0.0, 1.0, &[(0.3, 0.7)]);
        assert_eq!(a.or(&b).unwrap().intervals(), &[Interval::new(0.0, 0.7)]);
        assert_eq!(a.or(&BooleanSignal::all_false(0.0, 1.0)).unwrap(), a);
        assert!(a.or(&a.not()).unwrap().is_all_true());
        let other = sig(0.0, 2.0, &[]);
        assert!(matches!(a.or(&other), Err(Error::DomainMismatch { .. })));
    }

    #[test]
    fn restrict_cases() {
        let b = sig(0.0, 1.0, &[(0.3, 0.9)]);
        assert_eq!(
            b.restrict(0.0, 0.5).unwrap().intervals(),
            &[Interval::new(0.3, 0.5)]
        );
        assert_eq!(b.restrict(0.0, 1.0).unwrap(), b);
        assert!(b.restrict(0.95, 1.0).unwrap().is_all_false());
        assert!(matches!(b.restrict(0.5, 1.5), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn measure_in_clips() {
        let b = sig(0.0, 3.0, &[(0.5, 1.0), (2.0, 2.5)]);
        assert!((b.measure_in(0.75, 2.25) - 0.5).abs() < 1e-15);
        assert_eq!(b.measure_in(1.0, 2.0), 0.0);
        assert!((b.measure() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn concat_merges_touching() {
        let a = sig(0.0, 1.0, &[(0.5, 1.0)]);
        let b = sig(1.0, 2.0, &[(1.0, 1.5)]);
        assert_eq!(a.concat(&b).unwrap().intervals(), &[Interval::new(0.5, 1.5)]);
    }

    #[test]
    fn trace_validation() {
        assert!(PiecewiseConstantSignal::univariate("x", &[(1.0, 0.0)], None).is_err());
        assert!(PiecewiseConstantSignal::univariate("x", &[(0.0, 0.0), (0.0, 1.0)], None).is_err());
        assert!(PiecewiseConstantSignal::univariate("x", &[(0.0, 0.0), (2.0, 1.0)], Some(1.0)).is_err());
        let s = PiecewiseConstantSignal::univariate("x", &[(0.0, 50.0), (10.0, 80.0), (20.0, 60.0)], None)
            .unwrap();
        assert_eq!(s.value_at(0, 9.99), 50.0);
        assert_eq!(s.value_at(0, 10.0), 80.0);
        assert_eq!(s.duration(), 20.0);
        assert!(matches!(s.variable_index("y"), Err(Error::UnknownVariable(_))));
    }
}
