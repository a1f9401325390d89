use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{MetricUnits, TrainConfig};
use crate::model::Architecture;

/// Test-set metrics. `r2` is `None` when every target component is
/// constant or there are fewer than two samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mse: f64,
    pub r2: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TrainStatus {
    Completed,
    /// Training loss became non-finite during this (1-based) epoch.
    Diverged {
        epoch: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub architecture: Architecture,
    pub status: TrainStatus,
    pub epoch_train_mse: Vec<f64>,
    pub test_mse: Option<f64>,
    pub test_r2: Option<f64>,
    pub metric_units: MetricUnits,
    pub n_train: usize,
    pub n_test: usize,
    pub num_params: usize,
    pub seed: u64,
    pub wall_clock_seconds: f64,
    pub config: TrainConfig,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| x.to_string())
}

impl TrainReport {
    pub fn final_train_mse(&self) -> Option<f64> {
        self.epoch_train_mse.last().copied()
    }

    /// Flat `key = value` lines. Floats use the shortest representation
    /// that round-trips, so equal reports render to equal text.
    pub fn to_text(&self) -> String {
        let mut s = self.deterministic_text();
        let _ = writeln!(s, "wall_clock_seconds = {:.3}", self.wall_clock_seconds);
        s
    }

    /// [`to_text`](Self::to_text) without the wall-clock line, for
    /// comparing reruns.
    pub fn deterministic_text(&self) -> String {
        let c = &self.config;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("architecture", self.architecture.name().to_string());
        kv(
            "status",
            match self.status {
                TrainStatus::Completed => "completed".to_string(),
                TrainStatus::Diverged { epoch } => format!("diverged at epoch {epoch}"),
            },
        );
        kv("seed", self.seed.to_string());
        kv("metric_units", self.metric_units.name().to_string());
        kv("n_train", self.n_train.to_string());
        kv("n_test", self.n_test.to_string());
        kv("num_params", self.num_params.to_string());
        kv("test_mse", opt(self.test_mse));
        kv("test_r2", opt(self.test_r2));
        kv("final_train_mse", opt(self.final_train_mse()));
        for (i, l) in self.epoch_train_mse.iter().enumerate() {
            kv(&format!("epoch_{}_train_mse", i + 1), l.to_string());
        }
        kv("config.epochs", c.epochs.to_string());
        kv("config.batch_size", c.batch_size.to_string());
        kv("config.learning_rate", c.learning_rate.to_string());
        kv("config.beta1", c.beta1.to_string());
        kv("config.beta2", c.beta2.to_string());
        kv("config.adam_epsilon", c.adam_epsilon.to_string());
        kv("config.qubits", c.qubits.to_string());
        kv("config.spd_epsilon", c.spd_epsilon.to_string());
        kv("config.projection_mode", c.projection_mode.to_string());
        kv(
            "config.hidden",
            c.hidden
                .as_ref()
                .map_or_else(|| "default".to_string(), |h| format!("{h:?}")),
        );
        kv("config.entangler_range", c.entangler_range.to_string());
        kv("config.train_fraction", c.train_fraction.to_string());
        kv("config.gradient", c.gradient.to_string());
        kv(
            "config.data_source",
            c.data_source.clone().unwrap_or_else(|| "unspecified".into()),
        );
        s
    }

    pub fn to_json(&self) -> crate::Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
