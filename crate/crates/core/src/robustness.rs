//! Quantitative semantics.
//!
//! `rho(true) = +inf`, `rho(atom)` is the signed distance to the threshold,
//! `rho(!phi) = -rho(phi)`, `rho(a | b) = max`, and for a convolution node
//!
//! ```text
//! rho(<k, p> phi, t) = sup { r : k * [rho(phi, .) > r] (t) >= p }.
//! ```
//!
//! `H(t, r) = k * [rho(phi, .) > r] (t)` is nonincreasing in `r`, so the
//! supremum is bracketed on a grid of `r` values and refined by bisection.
//! The level sets `[rho(phi, .) > r]` are computed exactly as Boolean
//! signals: negation turns `> r` into the complement of `>= -r`, and a nested
//! convolution node exceeds `r` exactly where the Boolean convolution of its
//! argument's level set reaches `p`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::monitor::{eval_conv_sparse, verdict_end, MonitorConfig, VERDICT_TOLERANCE};
use crate::signal::{BooleanSignal, Interval, PiecewiseConstantSignal, TIME_EPS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustnessConfig {
    /// Bisection resolution in `r`.
    pub tolerance: f64,
    /// Pitch of [`rho_trace`]; defaults to the smallest monitor step of the formula.
    pub time_grid: Option<f64>,
    /// Points of the initial `r` grid.
    pub grid_points: usize,
    /// Outward doublings of the `r` grid before giving up.
    pub max_expansions: usize,
    pub monitor: MonitorConfig,
}

impl Default for RobustnessConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            time_grid: None,
            grid_points: 16,
            max_expansions: 16,
            monitor: MonitorConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessTrace {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub tolerance: f64,
}

struct Context<'a> {
    s: &'a PiecewiseConstantSignal,
    cfg: &'a RobustnessConfig,
    /// Largest finite `|rho|` any subformula can take, plus one.
    bound: f64,
}

/// Robustness of `f` at time `t`.
pub fn rho(s: &PiecewiseConstantSignal, f: &Formula, t: f64, cfg: &RobustnessConfig) -> Result<f64> {
    check_config(cfg)?;
    let core = f.expand_duals();
    let end = s.duration() - f.horizon();
    if end < -TIME_EPS || !(t >= 0.0 && t <= end.max(0.0) + TIME_EPS) {
        return Err(Error::HorizonShortfall {
            required: t + f.horizon(),
            available: s.duration(),
        });
    }
    let ctx = Context::new(s, &core, cfg)?;
    ctx.rho_at(&core, t)
}

/// Robustness sampled on a uniform grid over `[0, duration - horizon(f)]`.
///
/// The default pitch is the smallest monitor step of the formula, coarsened
/// so that at most about 1000 samples are taken.
pub fn rho_trace(s: &PiecewiseConstantSignal, f: &Formula, cfg: &RobustnessConfig) -> Result<RobustnessTrace> {
    check_config(cfg)?;
    let core = f.expand_duals();
    let horizon = f.horizon();
    let end = s.duration() - horizon;
    if end < -TIME_EPS {
        return Err(Error::HorizonShortfall {
            required: horizon,
            available: s.duration(),
        });
    }
    let end = end.max(0.0);
    let pitch = match cfg.time_grid {
        Some(g) => g,
        None => {
            let coarse = if end > 0.0 { end / 1000.0 } else { s.duration() / 1000.0 };
            smallest_step(&core, &cfg.monitor).map_or(coarse, |d| d.max(coarse))
        }
    };
    if !(pitch > 0.0 && pitch.is_finite()) {
        return Err(Error::InvalidStep(pitch));
    }
    let mut times: Vec<f64> = (0..)
        .map(|k| k as f64 * pitch)
        .take_while(|&t| t < end - 1e-9 * pitch)
        .collect();
    times.push(end);
    let ctx = Context::new(s, &core, cfg)?;
    let values = times
        .par_iter()
        .map(|&t| ctx.rho_at(&core, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(RobustnessTrace {
        times,
        values,
        tolerance: cfg.tolerance,
    })
}

fn check_config(cfg: &RobustnessConfig) -> Result<()> {
    if !(cfg.tolerance > 0.0 && cfg.tolerance.is_finite()) {
        return Err(Error::InvalidStep(cfg.tolerance));
    }
    if cfg.grid_points < 2 {
        return Err(Error::InvalidSignal(format!(
            "robustness grid needs at least 2 points, got {}",
            cfg.grid_points
        )));
    }
    Ok(())
}

fn smallest_step(f: &Formula, cfg: &MonitorConfig) -> Option<f64> {
    match f {
        Formula::Not(a) => smallest_step(a, cfg),
        Formula::Or(a, b) => match (smallest_step(a, cfg), smallest_step(b, cfg)) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        },
        Formula::Conv { kernel, arg, .. } => {
            let d = cfg.delta_for(kernel);
            Some(smallest_step(arg, cfg).map_or(d, |x| x.min(d)))
        }
        _ => None,
    }
}

impl<'a> Context<'a> {
    fn new(s: &'a PiecewiseConstantSignal, core: &Formula, cfg: &'a RobustnessConfig) -> Result<Self> {
        let mut largest: f64 = 0.0;
        for atom in atoms(core) {
            let var = s.variable_index(&atom.variable)?;
            for i in 0..s.len() {
                largest = largest.max(atom.signed_distance(s.value(i, var)).abs());
            }
        }
        Ok(Self {
            s,
            cfg,
            bound: largest + 1.0,
        })
    }

    fn rho_at(&self, f: &Formula, t: f64) -> Result<f64> {
        Ok(match f {
            Formula::True => f64::INFINITY,
            Formula::False => f64::NEG_INFINITY,
            Formula::Atom(a) => {
                let var = self.s.variable_index(&a.variable)?;
                a.signed_distance(self.s.value_at(var, t))
            }
            Formula::Not(a) => -self.rho_at(a, t)?,
            Formula::Or(a, b) => self.rho_at(a, t)?.max(self.rho_at(b, t)?),
            Formula::Conv { kernel, p, arg } => {
                let level = p.value() - VERDICT_TOLERANCE;
                let h = |r: f64| -> Result<f64> {
                    let set = self.exceeds(arg, r, true, t, t + kernel.t1())?;
                    Ok(kernel.window_mass(set.intervals(), t))
                };
                self.sup_level(t, level, h)?
            }
            _ => unreachable!("formula is desugared with duals expanded"),
        })
    }

    /// `sup { r : h(r) >= level }` for nonincreasing `h`.
    fn sup_level(&self, t: f64, level: f64, h: impl Fn(f64) -> Result<f64>) -> Result<f64> {
        let n = self.cfg.grid_points;
        let (mut lo, mut hi) = (-self.bound, self.bound);
        for _ in 0..=self.cfg.max_expansions {
            let rs: Vec<f64> = (0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                .collect();
            let hs = rs.iter().map(|&r| h(r)).collect::<Result<Vec<_>>>()?;
            for i in 1..n {
                if hs[i] > hs[i - 1] + 1e-9 {
                    return Err(Error::NonMonotone {
                        t,
                        r_lo: rs[i - 1],
                        h_lo: hs[i - 1],
                        r_hi: rs[i],
                        h_hi: hs[i],
                    });
                }
            }
            if hs[0] < level {
                if lo <= -self.bound {
                    return Ok(f64::NEG_INFINITY);
                }
                lo -= hi - lo;
                continue;
            }
            if hs[n - 1] >= level {
                if hi >= self.bound {
                    return Ok(f64::INFINITY);
                }
                hi += hi - lo;
                continue;
            }
            let k = hs.iter().position(|&v| v < level).expect("last point fails");
            let (mut a, mut b) = (rs[k - 1], rs[k]);
            while b - a > self.cfg.tolerance {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if h(m)? >= level {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Ok(0.5 * (a + b));
        }
        Err(Error::NonConvergent(self.cfg.max_expansions))
    }

    /// `[rho(f, .) > r]` (or `>= r` when not `strict`) on `[a, b]`.
    fn exceeds(&self, f: &Formula, r: f64, strict: bool, a: f64, b: f64) -> Result<BooleanSignal> {
        Ok(match f {
            Formula::True => BooleanSignal::all_true(a, b),
            Formula::False => BooleanSignal::all_false(a, b),
            Formula::Atom(atom) => {
                let var = self.s.variable_index(&atom.variable)?;
                let raw = self
                    .s
                    .segments_in(var, a, b)
                    .filter(|&(_, _, v)| {
                        let g = atom.signed_distance(v);
                        if strict {
                            g > r
                        } else {
                            g >= r
                        }
                    })
                    .map(|(x, y, _)| Interval::new(x, y))
                    .collect();
                BooleanSignal::normalized(a, b, raw)
            }
            Formula::Not(inner) => self.exceeds(inner, -r, !strict, a, b)?.not(),
            Formula::Or(l, rr) => self.exceeds(l, r, strict, a, b)?.or(&self.exceeds(rr, r, strict, a, b)?)?,
            Formula::Conv { kernel, p, arg } => {
                let child = self.exceeds(arg, r, strict, a, b + kernel.t1())?;
                let delta = self.cfg.monitor.delta_for(kernel);
                let v = eval_conv_sparse(kernel, p.value(), &child, delta)?;
                let end = verdict_end(kernel, a, child.end()).expect("window covered");
                debug_assert!((end - b).abs() <= TIME_EPS);
                if v.signal.end() >= b {
                    v.signal.restrict(a, b)?
                } else {
                    // `(b + T1) - T1` can fall short of `b` by rounding.
                    let short = v.signal.end();
                    let ivs = v
                        .signal
                        .intervals()
                        .iter()
                        .map(|iv| Interval::new(iv.start, if iv.end == short { b } else { iv.end }))
                        .collect();
                    BooleanSignal::normalized(a, b, ivs)
                }
            }
            _ => unreachable!("formula is desugared with duals expanded"),
        })
    }
}

fn atoms(f: &Formula) -> Vec<&crate::formula::Atom> {
    match f {
        Formula::Atom(a) => vec![a],
        Formula::Not(a) => atoms(a),
        Formula::Or(a, b) => {
            let mut v = atoms(a);
            v.extend(atoms(b));
            v
        }
        Formula::Conv { arg, .. } | Formula::ConvDual { arg, .. } => atoms(arg),
        _ => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    fn trace(samples: &[(f64, f64)], d: f64) -> PiecewiseConstantSignal {
        PiecewiseConstantSignal::univariate("v", samples, Some(d)).unwrap()
    }

    #[test]
    fn constant_trace() {
        let s = trace(&[(0.0, 2.5)], 5.0);
        let cfg = RobustnessConfig::default();
        for text in ["<flat[0,1], 0.5> v >= 0", "<exp(-2)[0,3], 1> v >= 0", "<gauss(1,0.5)[0,2], 0.2> v >= 0"] {
            let r = rho(&s, &parse(text).unwrap(), 0.0, &cfg).unwrap();
            assert!((r - 2.5).abs() <= cfg.tolerance, "{text}: {r}");
        }
    }

    #[test]
    fn two_level_trace() {
        let s = trace(&[(0.0, 1.0), (0.9, 0.2)], 3.0);
        let cfg = RobustnessConfig::default();
        let r = rho(&s, &parse("<flat[0,3], 0.3> v > 0").unwrap(), 0.0, &cfg).unwrap();
        assert!((r - 1.0).abs() <= cfg.tolerance, "{r}");
        let r = rho(&s, &parse("<flat[0,3], 0.31> v > 0").unwrap(), 0.0, &cfg).unwrap();
        assert!((r - 0.2).abs() <= cfg.tolerance, "{r}");
    }

    #[test]
    fn negation_and_infinities() {
        let s = trace(&[(0.0, 1.0), (1.0, -3.0), (2.0, 0.5)], 6.0);
        let cfg = RobustnessConfig::default();
        let f = parse("<exp(1)[0,2], 0.4> v >= 0").unwrap();
        let g = Formula::not(f.clone());
        let a = rho(&s, &f, 0.5, &cfg).unwrap();
        let b = rho(&s, &g, 0.5, &cfg).unwrap();
        assert_eq!(a, -b);
        assert_eq!(rho(&s, &parse("G[0,1] true").unwrap(), 0.0, &cfg).unwrap(), f64::INFINITY);
        assert_eq!(rho(&s, &parse("F[0,1] false").unwrap(), 0.0, &cfg).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn globally_is_window_minimum() {
        let s = trace(&[(0.0, 4.0), (1.5, 2.0), (2.5, 7.0), (4.0, 1.0)], 8.0);
        let cfg = RobustnessConfig::default();
        let g = rho(&s, &parse("G[0,2] v >= 1").unwrap(), 0.0, &cfg).unwrap();
        assert!((g - 1.0).abs() <= cfg.tolerance, "{g}");
        let f = rho(&s, &parse("F[1,3] v >= 1").unwrap(), 0.0, &cfg).unwrap();
        assert!((f - 6.0).abs() <= cfg.tolerance, "{f}");
    }

    #[test]
    fn nested_convolution() {
        let s = trace(&[(0.0, 3.0), (1.0, 5.0), (3.0, -1.0), (3.5, 2.0)], 10.0);
        let cfg = RobustnessConfig::default();
        let r = rho(&s, &parse("G[0,1] F[0,1] v >= 0").unwrap(), 0.0, &cfg).unwrap();
        // min over t in [0,1] of max of v over [t, t+1]
        assert!((r - 5.0).abs() <= cfg.tolerance, "{r}");
        let r = rho(&s, &parse("G[0,3] F[0,0.25] v >= 0").unwrap(), 0.0, &cfg).unwrap();
        assert!((r - 3.0).abs() <= cfg.tolerance, "{r}");
    }

    #[test]
    fn trace_is_constant_for_constant_signal() {
        let s = trace(&[(0.0, -1.5)], 4.0);
        let t = rho_trace(&s, &parse("<flat[0,1], 0.5> v >= 0").unwrap(), &RobustnessConfig::default()).unwrap();
        assert_eq!(t.times.len(), t.values.len());
        assert_eq!(*t.times.last().unwrap(), 3.0);
        assert!(t.values.iter().all(|v| (v + 1.5).abs() <= 1e-6));
    }

    #[test]
    fn shortfall() {
        let s = trace(&[(0.0, 1.0)], 1.0);
        assert!(rho(&s, &parse("G[0,2] v >= 0").unwrap(), 0.0, &RobustnessConfig::default()).is_err());
    }
}
