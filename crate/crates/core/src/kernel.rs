//! Bounded kernels over a window `[T0, T1]`.
//!
//! A kernel is parameterized directly on its window and convolved as
//! `k(tau - t)`, so `k * chi` at time `t` weighs `chi` over `t + [T0, T1]`.
//! Every kernel is normalized to integrate to one over its window.

use std::fmt;

use crate::error::{Error, Result};
use crate::quadrature;
use crate::signal::{BooleanSignal, Interval, TIME_EPS};

/// Window `[t0, t1]` with `0 <= t0 < t1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    t0: f64,
    t1: f64,
}

impl Window {
    pub fn new(t0: f64, t1: f64) -> Result<Self> {
        if !t0.is_finite() || !t1.is_finite() {
            return Err(Error::InvalidKernel(format!(
                "window bounds must be finite, got [{t0}, {t1}]"
            )));
        }
        if t0 < 0.0 {
            return Err(Error::InvalidKernel(format!(
                "window must start at a non-negative offset, got {t0}"
            )));
        }
        if t0 >= t1 {
            return Err(Error::InvalidKernel(format!(
                "window start {t0} must be below its end {t1}"
            )));
        }
        Ok(Self { t0, t1 })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn length(&self) -> f64 {
        self.t1 - self.t0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelShape {
    Flat,
    Exponential { alpha: f64 },
    /// `exp(-((x - mu) / sigma)^2)`, normalized on the window.
    Gaussian { mu: f64, sigma: f64 },
}

impl KernelShape {
    pub fn name(&self) -> &'static str {
        match self {
            KernelShape::Flat => "flat",
            KernelShape::Exponential { .. } => "exp",
            KernelShape::Gaussian { .. } => "gauss",
        }
    }
}

impl fmt::Display for KernelShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelShape::Flat => write!(f, "flat"),
            KernelShape::Exponential { alpha } => write!(f, "exp({alpha})"),
            KernelShape::Gaussian { mu, sigma } => write!(f, "gauss({mu},{sigma})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundedKernel {
    shape: KernelShape,
    window: Window,
    /// Exponent offset for the exponential shape (the heavier window end).
    reference: f64,
    /// Integral of the (offset) unnormalized shape over the window.
    normalizer: f64,
}

impl BoundedKernel {
    pub fn new(shape: KernelShape, window: Window) -> Result<Self> {
        let (t0, t1) = (window.t0, window.t1);
        let (reference, normalizer) = match shape {
            KernelShape::Flat => (t0, window.length()),
            KernelShape::Exponential { alpha } => {
                if !alpha.is_finite() || alpha == 0.0 {
                    return Err(Error::InvalidKernel(format!(
                        "exponential rate must be finite and nonzero, got {alpha}"
                    )));
                }
                let reference = if alpha > 0.0 { t1 } else { t0 };
                (reference, exp_raw_integral(alpha, reference, t0, t1))
            }
            KernelShape::Gaussian { mu, sigma } => {
                if !mu.is_finite() || !sigma.is_finite() || sigma <= 0.0 {
                    return Err(Error::InvalidKernel(format!(
                        "gaussian needs finite mu and sigma > 0, got mu = {mu}, sigma = {sigma}"
                    )));
                }
                let n = quadrature::integrate(|x| gauss_shape(mu, sigma, x), t0, t1, 1e-15 * sigma);
                (t0, n)
            }
        };
        if !(normalizer > 0.0) || !normalizer.is_finite() {
            return Err(Error::InvalidKernel(format!(
                "{shape} has no usable mass on [{t0}, {t1}]"
            )));
        }
        Ok(Self {
            shape,
            window,
            reference,
            normalizer,
        })
    }

    pub fn flat(t0: f64, t1: f64) -> Result<Self> {
        Self::new(KernelShape::Flat, Window::new(t0, t1)?)
    }

    pub fn exponential(alpha: f64, t0: f64, t1: f64) -> Result<Self> {
        Self::new(KernelShape::Exponential { alpha }, Window::new(t0, t1)?)
    }

    pub fn gaussian(mu: f64, sigma: f64, t0: f64, t1: f64) -> Result<Self> {
        Self::new(KernelShape::Gaussian { mu, sigma }, Window::new(t0, t1)?)
    }

    pub fn shape(&self) -> KernelShape {
        self.shape
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn t0(&self) -> f64 {
        self.window.t0
    }

    pub fn t1(&self) -> f64 {
        self.window.t1
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.shape, KernelShape::Flat)
    }

    /// Normalized density at `x`; `x` must lie in the window.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if !(x >= self.t0() - TIME_EPS && x <= self.t1() + TIME_EPS) {
            return Err(Error::OutsideWindow {
                x,
                t0: self.t0(),
                t1: self.t1(),
            });
        }
        Ok(self.density(x))
    }

    /// Density with `x` clamped into the window.
    pub(crate) fn density(&self, x: f64) -> f64 {
        let x = x.clamp(self.t0(), self.t1());
        match self.shape {
            KernelShape::Flat => 1.0 / self.normalizer,
            KernelShape::Exponential { alpha } => (alpha * (x - self.reference)).exp() / self.normalizer,
            KernelShape::Gaussian { mu, sigma } => gauss_shape(mu, sigma, x) / self.normalizer,
        }
    }

    /// Largest density value on the window.
    pub fn sup(&self) -> f64 {
        match self.shape {
            KernelShape::Flat | KernelShape::Exponential { .. } => self.density(self.reference),
            KernelShape::Gaussian { mu, .. } => self.density(mu),
        }
    }

    /// `integral_a^b k(x) dx` for `T0 <= a <= b <= T1`.
    pub fn integral(&self, a: f64, b: f64) -> Result<f64> {
        let (t0, t1) = (self.t0(), self.t1());
        if !(a <= b) || a < t0 - TIME_EPS || b > t1 + TIME_EPS {
            return Err(Error::OutsideWindow {
                x: if a < t0 - TIME_EPS || !(a <= b) { a } else { b },
                t0,
                t1,
            });
        }
        Ok(self.integral_clamped(a, b))
    }

    pub(crate) fn integral_clamped(&self, a: f64, b: f64) -> f64 {
        let a = a.clamp(self.t0(), self.t1());
        let b = b.clamp(self.t0(), self.t1());
        if b <= a {
            return 0.0;
        }
        match self.shape {
            KernelShape::Flat => (b - a) / self.normalizer,
            KernelShape::Exponential { alpha } => {
                exp_raw_integral(alpha, self.reference, a, b) / self.normalizer
            }
            KernelShape::Gaussian { mu, sigma } => {
                quadrature::integrate(|x| gauss_shape(mu, sigma, x), a, b, 1e-11 * self.normalizer)
                    / self.normalizer
            }
        }
    }

    /// `(k * chi)(t)`: kernel-weighted true-time of `b` over `t + [T0, T1]`.
    pub fn weighted_integral(&self, b: &BooleanSignal, t: f64) -> Result<f64> {
        let latest = b.end() - self.t1();
        if !(t >= b.start() - TIME_EPS && t <= latest + TIME_EPS) {
            return Err(Error::HorizonShortfall {
                required: t + self.t1() - b.start(),
                available: b.end() - b.start(),
            });
        }
        Ok(self.window_mass(b.intervals(), t))
    }

    /// Window mass of `intervals` at `t`.
    ///
    /// Window membership is decided in time coordinates (`U - T0` against
    /// `t`), the same comparisons the sliding evaluators use for their
    /// events, so an interval end lying beyond `t + T1` contributes
    /// identically whatever its exact value.
    pub(crate) fn window_mass(&self, intervals: &[Interval], t: f64) -> f64 {
        let (t0, t1) = (self.t0(), self.t1());
        let first = intervals.partition_point(|iv| iv.end - t0 <= t);
        let mut sum = 0.0;
        for iv in &intervals[first..] {
            if iv.start - t1 >= t {
                break;
            }
            let lo = if iv.start - t0 <= t { t0 } else { iv.start - t };
            let hi = if iv.end - t1 >= t { t1 } else { iv.end - t };
            if hi > lo {
                sum += self.integral_clamped(lo, hi);
            }
        }
        sum
    }
}

impl fmt::Display for BoundedKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{},{}]", self.shape, self.t0(), self.t1())
    }
}

fn gauss_shape(mu: f64, sigma: f64, x: f64) -> f64 {
    let z = (x - mu) / sigma;
    (-z * z).exp()
}

/// `integral_a^b exp(alpha (x - reference)) dx`.
fn exp_raw_integral(alpha: f64, reference: f64, a: f64, b: f64) -> f64 {
    (alpha * (a - reference)).exp() * (alpha * (b - a)).exp_m1() / alpha
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson on `evaluate`, independent of the closed forms.
    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let n = n + n % 2;
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn flat_density() {
        let k = BoundedKernel::flat(0.0, 24.0).unwrap();
        for x in [0.0, 3.5, 24.0] {
            assert!((k.evaluate(x).unwrap() - 1.0 / 24.0).abs() < 1e-15);
        }
    }

    #[test]
    fn exponential_density_at_window_end() {
        let k = BoundedKernel::exponential(3.0, 0.0, 0.5).unwrap();
        let e = 1.5f64.exp();
        let expected = 3.0 * e / (e - 1.0);
        assert!((k.evaluate(0.5).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 3.8617).abs() < 1e-4);
        let norm = simpson(|x| (3.0 * x).exp(), 0.0, 0.5, 2000);
        assert!((norm - (e - 1.0) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_case_study_normalizes() {
        let k = BoundedKernel::gaussian(0.03, 0.1, 0.0, 24.0).unwrap();
        let total = simpson(|x| k.evaluate(x).unwrap(), 0.0, 1.5, 20000);
        assert!((total - 1.0).abs() < 1e-9, "{total}");
        assert!((k.integral(0.0, 24.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn integral_examples() {
        let flat = BoundedKernel::flat(0.0, 1.0).unwrap();
        assert!((flat.integral(0.3, 0.5).unwrap() - 0.2).abs() < 1e-15);
        let k = BoundedKernel::exponential(3.0, 0.0, 0.5).unwrap();
        let expected = (1.5f64.exp() - 0.9f64.exp()) / (1.5f64.exp() - 1.0);
        assert!((k.integral(0.3, 0.5).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.5808).abs() < 1e-4);
    }

    #[test]
    fn integral_rejects_bad_bounds() {
        let k = BoundedKernel::flat(0.0, 1.0).unwrap();
        assert!(k.integral(0.5, 0.4).is_err());
        assert!(k.integral(-0.5, 0.4).is_err());
        assert!(k.integral(0.5, 1.4).is_err());
        assert!(k.evaluate(1.5).is_err());
    }

    #[test]
    fn invalid_parameters() {
        assert!(BoundedKernel::exponential(0.0, 0.0, 1.0).is_err());
        assert!(BoundedKernel::gaussian(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(BoundedKernel::flat(1.0, 1.0).is_err());
        assert!(BoundedKernel::flat(-1.0, 1.0).is_err());
    }

    #[test]
    fn weighted_integral_examples() {
        let b = BooleanSignal::new(0.0, 1.5, [(0.3, 0.9)]).unwrap();
        let flat = BoundedKernel::flat(0.0, 0.5).unwrap();
        assert!((flat.weighted_integral(&b, 0.0).unwrap() - 0.4).abs() < 1e-12);
        let neg = BoundedKernel::exponential(-3.0, 0.0, 0.5).unwrap();
        let expected = ((-0.9f64).exp() - (-1.5f64).exp()) / (1.0 - (-1.5f64).exp());
        assert!((neg.weighted_integral(&b, 0.0).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.2362).abs() < 1e-4);
        let all = BooleanSignal::all_true(0.0, 1.5);
        assert!((neg.weighted_integral(&all, 0.7).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(
            flat.weighted_integral(&b, 1.2),
            Err(Error::HorizonShortfall { .. })
        ));
    }

    #[test]
    fn steep_exponential_is_stable() {
        let k = BoundedKernel::exponential(-40.0, 0.0, 10.0).unwrap();
        assert!((k.integral(0.0, 10.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(k.evaluate(10.0).unwrap() > 0.0);
    }
}
