//! Synthetic trace generators. All of them are deterministic for a fixed seed.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use scl_core::PiecewiseConstantSignal;
use serde::Serialize;

use crate::{Error, Result};

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

/// Square wave: `high` for `duty * period` at the start of each period, `low` otherwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepTrain {
    pub period: f64,
    pub duty: f64,
    pub low: f64,
    pub high: f64,
    pub duration: f64,
}

impl StepTrain {
    pub fn generate(&self, var: &str) -> Result<PiecewiseConstantSignal> {
        positive("period", self.period)?;
        positive("duration", self.duration)?;
        if !(self.duty > 0.0 && self.duty < 1.0) {
            return Err(Error::InvalidParameter(format!("duty must be in (0, 1), got {}", self.duty)));
        }
        let mut samples = Vec::new();
        let mut k = 0u64;
        loop {
            let start = k as f64 * self.period;
            if start >= self.duration {
                break;
            }
            samples.push((start, self.high));
            let fall = start + self.duty * self.period;
            if fall < self.duration {
                samples.push((fall, self.low));
            }
            k += 1;
        }
        let last = samples.last().map_or(self.high, |s| s.1);
        samples.push((self.duration, last));
        Ok(PiecewiseConstantSignal::univariate(var, &samples, None)?)
    }
}

/// `offset + amplitude * sin(2 pi t / period)` sampled every `dt` and rounded to multiples of `quantum`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SineQuantized {
    pub period: f64,
    pub amplitude: f64,
    pub offset: f64,
    pub quantum: f64,
    pub dt: f64,
    pub duration: f64,
}

impl SineQuantized {
    pub fn generate(&self, var: &str) -> Result<PiecewiseConstantSignal> {
        positive("period", self.period)?;
        positive("quantum", self.quantum)?;
        positive("dt", self.dt)?;
        positive("duration", self.duration)?;
        let value = |t: f64| {
            let v = self.offset + self.amplitude * (std::f64::consts::TAU * t / self.period).sin();
            (v / self.quantum).round() * self.quantum
        };
        let samples: Vec<(f64, f64)> = uniform_grid(self.dt, self.duration)
            .into_iter()
            .map(|t| (t, value(t)))
            .collect();
        Ok(PiecewiseConstantSignal::univariate(var, &samples, None)?)
    }
}

/// Sample times `0, dt, 2 dt, ...` closed by `duration`.
pub fn uniform_grid(dt: f64, duration: f64) -> Vec<f64> {
    let mut out: Vec<f64> = (0..)
        .map(|k| k as f64 * dt)
        .take_while(|&t| t < duration - 1e-9 * dt)
        .collect();
    out.push(duration);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Meal {
    pub time: f64,
    pub size: f64,
}

/// Daily glucose profile in hours: baseline, meal excursions shaped
/// `size * x * e^(1 - x)` (`x` in hours since the meal, peak after one hour),
/// one flat-bottomed dip (a plateau of `dip_plateau` hours at
/// `baseline - dip_depth` with gaussian shoulders), and additive gaussian
/// noise on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlucoseLike {
    pub baseline: f64,
    pub meals: Vec<Meal>,
    pub dip_time: f64,
    pub dip_depth: f64,
    pub dip_width: f64,
    pub dip_plateau: f64,
    pub dt: f64,
    pub duration: f64,
    pub noise_std: f64,
}

impl Default for GlucoseLike {
    fn default() -> Self {
        Self {
            baseline: 105.0,
            meals: vec![
                Meal { time: 7.5, size: 55.0 },
                Meal { time: 12.5, size: 65.0 },
                Meal { time: 19.0, size: 60.0 },
            ],
            dip_time: 3.0,
            dip_depth: 35.0,
            dip_width: 1.0,
            dip_plateau: 1.0,
            dt: 1.0 / 12.0,
            duration: 24.0,
            noise_std: 0.0,
        }
    }
}

impl GlucoseLike {
    /// Random day: baseline in [95, 115], meals near 7:30, 12:30 and 19:00
    /// of size [30, 80], and a night-time dip centred in [2, 5] with depth
    /// [15, 65], shoulder width [0.5, 1.5] and plateau [1, 1.5] hours.
    pub fn random<R: Rng>(rng: &mut R, duration: f64, noise_std: f64) -> Self {
        let meals = [7.5, 12.5, 19.0]
            .iter()
            .map(|&t| Meal {
                time: t + rng.random_range(-0.5..0.5),
                size: rng.random_range(30.0..80.0),
            })
            .collect();
        Self {
            baseline: rng.random_range(95.0..115.0),
            meals,
            dip_time: rng.random_range(2.0..5.0),
            dip_depth: rng.random_range(15.0..65.0),
            dip_width: rng.random_range(0.5..1.5),
            dip_plateau: rng.random_range(1.0..1.5),
            dt: 1.0 / 12.0,
            duration,
            noise_std,
        }
    }

    /// Noise-free glucose level at `t`.
    pub fn level(&self, t: f64) -> f64 {
        let mut g = self.baseline;
        for m in &self.meals {
            let x = t - m.time;
            if x > 0.0 {
                g += m.size * x * (1.0 - x).exp();
            }
        }
        let z = ((t - self.dip_time).abs() - 0.5 * self.dip_plateau).max(0.0) / self.dip_width;
        g - self.dip_depth * (-z * z).exp()
    }

    fn validate(&self) -> Result<()> {
        positive("dt", self.dt)?;
        positive("duration", self.duration)?;
        positive("dip width", self.dip_width)?;
        if !(self.dip_plateau >= 0.0 && self.dip_plateau.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dip plateau must be non-negative, got {}",
                self.dip_plateau
            )));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise std must be non-negative, got {}",
                self.noise_std
            )));
        }
        Ok(())
    }

    /// Grid samples of the noise-free profile.
    pub fn clean(&self, var: &str) -> Result<PiecewiseConstantSignal> {
        self.validate()?;
        let samples: Vec<(f64, f64)> = uniform_grid(self.dt, self.duration)
            .into_iter()
            .map(|t| (t, self.level(t)))
            .collect();
        Ok(PiecewiseConstantSignal::univariate(var, &samples, None)?)
    }

    /// Grid samples with `N(0, noise_std)` added to every sample.
    pub fn generate<R: Rng>(&self, var: &str, rng: &mut R) -> Result<PiecewiseConstantSignal> {
        let clean = self.clean(var)?;
        if self.noise_std == 0.0 {
            return Ok(clean);
        }
        let normal = Normal::new(0.0, self.noise_std).expect("validated std");
        let values = clean.values().iter().map(|v| v + normal.sample(rng)).collect();
        Ok(clean.with_values(values)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use scl_core::{monitor::eval_atom, Atom, Comparison};

    #[test]
    fn step_train_duty() {
        let s = StepTrain {
            period: 2.0,
            duty: 0.3,
            low: 0.0,
            high: 1.0,
            duration: 24.0,
        }
        .generate("v")
        .unwrap();
        let b = eval_atom(&s, &Atom::new("v", Comparison::Ge, 1.0)).unwrap();
        assert!((b.measure() / 24.0 - 0.3).abs() < 1e-12);
    }

    #[test]
    fn sine_is_quantized() {
        let s = SineQuantized {
            period: 6.0,
            amplitude: 10.0,
            offset: 50.0,
            quantum: 2.5,
            dt: 0.1,
            duration: 12.0,
        }
        .generate("v")
        .unwrap();
        assert!(s.values().iter().all(|v| (v / 2.5 - (v / 2.5).round()).abs() < 1e-12));
        assert_eq!(s.duration(), 12.0);
    }

    #[test]
    fn glucose_noise_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let day = GlucoseLike::random(&mut rng, 24.0, 5.0);
        let clean = day.clean("G").unwrap();
        let noisy = day.generate("G", &mut rng).unwrap();
        let diffs: Vec<f64> = noisy.values().iter().zip(clean.values()).map(|(a, b)| a - b).collect();
        let n = diffs.len() as f64;
        let mean = diffs.iter().sum::<f64>() / n;
        let std = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((std - 5.0).abs() < 0.5, "{std}");
    }

    #[test]
    fn deterministic() {
        let make = || {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let day = GlucoseLike::random(&mut rng, 24.0, 5.0);
            day.generate("G", &mut rng).unwrap()
        };
        assert_eq!(make(), make());
    }
}
