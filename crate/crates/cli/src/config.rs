use clap::ValueEnum;
use scl_core::{Evaluator, MonitorConfig, RobustnessConfig};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Boolean,
    Robustness,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EvaluatorArg {
    Efficient,
    Oracle,
    Incremental,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Settings shared by `check` and `rho`. Unset steps take the per-kernel defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunConfig {
    pub delta: Option<f64>,
    pub oracle_grid: Option<f64>,
    pub r_tolerance: f64,
    pub time_grid: Option<f64>,
    pub mode: Mode,
    pub evaluator: EvaluatorArg,
    pub seed: u64,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            delta: None,
            oracle_grid: None,
            r_tolerance: 1e-6,
            time_grid: None,
            mode: Mode::Boolean,
            evaluator: EvaluatorArg::Efficient,
            seed: 0,
            format: OutputFormat::Csv,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let fields = [
            ("delta", self.delta),
            ("oracle grid", self.oracle_grid),
            ("r tolerance", Some(self.r_tolerance)),
            ("time grid", self.time_grid),
        ];
        for (name, value) in fields {
            if let Some(v) = value {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(crate::Error::InvalidParameter(format!("{name} must be positive, got {v}")));
                }
            }
        }
        Ok(())
    }

    pub fn monitor(&self) -> MonitorConfig {
        MonitorConfig {
            delta: self.delta,
            oracle_grid: self.oracle_grid,
            evaluator: match self.evaluator {
                EvaluatorArg::Efficient => Evaluator::Efficient,
                EvaluatorArg::Oracle => Evaluator::Oracle,
                EvaluatorArg::Incremental => Evaluator::Incremental,
            },
        }
    }

    pub fn robustness(&self) -> RobustnessConfig {
        RobustnessConfig {
            tolerance: self.r_tolerance,
            time_grid: self.time_grid,
            monitor: self.monitor(),
            ..RobustnessConfig::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_positive_fields() {
        let cfg = RunConfig {
            delta: Some(0.0),
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert!(RunConfig::default().validate().is_ok());
    }
}
