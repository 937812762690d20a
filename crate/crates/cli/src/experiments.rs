//! Noise-agreement and random-sampling falsification experiments.
//!
//! Both draw one sub-seed per trial from the master seed in trial order and
//! evaluate trials in parallel, so reports do not depend on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use scl_core::{monitor, rho, BoundedKernel, Comparison, Formula, MonitorConfig, PiecewiseConstantSignal, RobustnessConfig};
use serde::Serialize;
use serde_json::{json, Value};

use crate::generate::GlucoseLike;
use crate::{Error, Result};

const VAR: &str = "G";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseConfig {
    pub n: usize,
    pub seed: u64,
    pub noise_std: f64,
    /// Thresholds are `min(clean trace) + U[-band, band]`.
    pub band: f64,
    /// Probability of the convolution formula.
    pub p: f64,
    pub window: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            n: 500,
            seed: 0,
            noise_std: 5.0,
            band: 15.0,
            p: 0.03,
            window: 24.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseReport {
    pub n: usize,
    pub seed: u64,
    pub noise_std: f64,
    pub band: f64,
    pub reference: String,
    pub eventually: String,
    pub scl: String,
    pub eventually_agreement: f64,
    pub scl_agreement: f64,
}

fn noise_formulas(cfg: &NoiseConfig, k: f64) -> Result<(Formula, Formula)> {
    let atom = Formula::atom(VAR, Comparison::Le, k);
    let f = Formula::eventually(0.0, cfg.window, atom.clone())?;
    let scl = Formula::conv(BoundedKernel::flat(0.0, cfg.window)?, cfg.p, atom)?;
    Ok((f, scl))
}

fn holds(s: &PiecewiseConstantSignal, f: &Formula) -> Result<bool> {
    Ok(monitor(s, f, &MonitorConfig::default())?.satisfied())
}

/// Per trial: a random glucose-like day and threshold `k`. The reference is
/// `F (G <= k)` on the clean trace; it is compared with the same formula and
/// with `<flat, p> (G <= k)` on the noisy trace.
pub fn noise_agreement(cfg: &NoiseConfig) -> Result<NoiseReport> {
    if cfg.n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(cfg.band >= 0.0 && cfg.band.is_finite()) {
        return Err(Error::InvalidParameter(format!("band must be non-negative, got {}", cfg.band)));
    }
    let mut master = ChaCha8Rng::seed_from_u64(cfg.seed);
    let seeds: Vec<u64> = (0..cfg.n).map(|_| master.random()).collect();
    let outcomes = seeds
        .par_iter()
        .map(|&seed| -> Result<(bool, bool)> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let day = GlucoseLike::random(&mut rng, cfg.window, cfg.noise_std);
            let clean = day.clean(VAR)?;
            let noisy = day.generate(VAR, &mut rng)?;
            let low = clean.values().iter().copied().fold(f64::INFINITY, f64::min);
            let k = low + rng.random_range(-cfg.band..=cfg.band);
            let (f, scl) = noise_formulas(cfg, k)?;
            let reference = holds(&clean, &f)?;
            Ok((holds(&noisy, &f)? == reference, holds(&noisy, &scl)? == reference))
        })
        .collect::<Result<Vec<_>>>()?;
    let pct = |count: usize| 100.0 * count as f64 / cfg.n as f64;
    let (f, scl) = noise_formulas(cfg, 0.0)?;
    let text = |f: &Formula| f.to_string().replace("G <= 0", "G <= k");
    Ok(NoiseReport {
        n: cfg.n,
        seed: cfg.seed,
        noise_std: cfg.noise_std,
        band: cfg.band,
        reference: format!("{} on the noise-free trace", text(&f)),
        eventually: text(&f),
        scl: text(&scl),
        eventually_agreement: pct(outcomes.iter().filter(|o| o.0).count()),
        scl_agreement: pct(outcomes.iter().filter(|o| o.1).count()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FalsifyConfig {
    pub budget: usize,
    pub seed: u64,
    pub duration: f64,
    pub noise_std: f64,
}

impl Default for FalsifyConfig {
    fn default() -> Self {
        Self {
            budget: 100,
            seed: 0,
            duration: 24.0,
            noise_std: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FalsifyReport {
    pub budget: usize,
    pub seed: u64,
    pub evaluations: usize,
    /// Minimum over samples of the smallest robustness at `t = 0` among the formulas.
    pub min_robustness: f64,
    /// Sample index reaching the minimum.
    pub best: usize,
    pub params: GlucoseLike,
    pub witness: PiecewiseConstantSignal,
}

impl FalsifyReport {
    pub fn falsified(&self) -> bool {
        self.min_robustness < 0.0
    }

    pub fn to_json(&self) -> Value {
        json!({
            "budget": self.budget,
            "seed": self.seed,
            "evaluations": self.evaluations,
            "min_robustness": crate::output::num(self.min_robustness),
            "falsified": self.falsified(),
            "best_sample": self.best,
            "params": self.params,
        })
    }
}

/// Samples `budget` random glucose-like days and keeps the one with the
/// smallest robustness at `t = 0`. Ties keep the earliest sample.
pub fn falsify(formulas: &[Formula], cfg: &FalsifyConfig, rcfg: &RobustnessConfig) -> Result<FalsifyReport> {
    if cfg.budget == 0 {
        return Err(Error::InvalidParameter("budget must be at least 1".into()));
    }
    if formulas.is_empty() {
        return Err(Error::InvalidParameter("no formulas to falsify".into()));
    }
    let horizon = formulas.iter().map(Formula::horizon).fold(0.0, f64::max);
    if cfg.duration < horizon {
        return Err(Error::InvalidParameter(format!(
            "duration {} is shorter than the formula horizon {horizon}",
            cfg.duration
        )));
    }
    let mut master = ChaCha8Rng::seed_from_u64(cfg.seed);
    let seeds: Vec<u64> = (0..cfg.budget).map(|_| master.random()).collect();
    let samples = seeds
        .par_iter()
        .map(|&seed| -> Result<(f64, GlucoseLike, PiecewiseConstantSignal)> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let day = GlucoseLike::random(&mut rng, cfg.duration, cfg.noise_std);
            let trace = day.generate(VAR, &mut rng)?;
            let mut r = f64::INFINITY;
            for f in formulas {
                r = r.min(rho(&trace, f, 0.0, rcfg)?);
            }
            Ok((r, day, trace))
        })
        .collect::<Result<Vec<_>>>()?;
    let best = (0..samples.len())
        .reduce(|a, b| if samples[b].0 < samples[a].0 { b } else { a })
        .expect("budget is positive");
    let evaluations = samples.len();
    let (min_robustness, params, witness) = samples.into_iter().nth(best).expect("index in range");
    Ok(FalsifyReport {
        budget: cfg.budget,
        seed: cfg.seed,
        evaluations,
        min_robustness,
        best,
        params,
        witness,
    })
}
