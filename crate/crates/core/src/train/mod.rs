//! Training, evaluation, checkpoints and the architecture comparison.

mod adam;
mod checkpoint;
mod compare;
mod report;

use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

pub use adam::Adam;
pub use checkpoint::{
    load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, Checkpoint, CHECKPOINT_MAGIC,
    CHECKPOINT_VERSION,
};
pub use compare::{compare_architectures, format_sig, Comparison, REFERENCE_RESULTS};
pub use report::{Metrics, TrainReport, TrainStatus};

use crate::data::{split, Dataset, Scaler};
use crate::error::{Error, Result};
use crate::features::{self, ProjectionMode};
use crate::model::{mse, r2_score, Architecture, HybridModel, ModelConfig};
use crate::qsim::{GradientMethod, NUM_BLOCKS};
use crate::rng::{self, Stream};

/// Units in which metrics are reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricUnits {
    /// Targets standardised with the training-split scaler.
    #[default]
    Standardized,
    /// Targets in the dataset's own units.
    Original,
}

impl MetricUnits {
    pub fn name(self) -> &'static str {
        match self {
            MetricUnits::Standardized => "standardized",
            MetricUnits::Original => "original",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub architecture: Architecture,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
    /// Qubit count, which is also the projection size `k`. The
    /// quantum-classical architecture always uses one qubit per input.
    pub qubits: usize,
    /// Regulariser `ε` in `z zᵀ + εI`.
    pub spd_epsilon: f64,
    pub projection_mode: ProjectionMode,
    /// Hidden widths; `None` takes the architecture's defaults.
    pub hidden: Option<Vec<usize>>,
    pub entangler_range: usize,
    pub train_fraction: f64,
    pub gradient: GradientMethod,
    pub metric_units: MetricUnits,
    /// Free-form description of where the data came from, echoed in the
    /// report.
    pub data_source: Option<String>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            architecture: Architecture::SpdEnhanced,
            epochs: 100,
            batch_size: 32,
            learning_rate: 1e-3,
            seed: 0,
            beta1: 0.9,
            beta2: 0.999,
            adam_epsilon: 1e-8,
            qubits: features::DEFAULT_K,
            spd_epsilon: features::DEFAULT_EPSILON,
            projection_mode: ProjectionMode::Batch,
            hidden: None,
            entangler_range: 1,
            train_fraction: 0.8,
            gradient: GradientMethod::Adjoint,
            metric_units: MetricUnits::Standardized,
            data_source: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidParameter("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidParameter("batch size must be at least 1".into()));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "learning rate must be a finite non-negative number, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::InvalidParameter("Adam betas must lie in [0, 1)".into()));
        }
        if self.adam_epsilon.is_nan() || self.adam_epsilon <= 0.0 {
            return Err(Error::InvalidParameter("Adam epsilon must be positive".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "train fraction must lie strictly between 0 and 1, got {}",
                self.train_fraction
            )));
        }
        Ok(())
    }

    /// Model shape for a dataset with the given widths.
    pub fn model_config(&self, input_dim: usize, output_dim: usize) -> ModelConfig {
        let mut mc = ModelConfig::new(self.architecture);
        mc.input_dim = input_dim;
        mc.output_dim = output_dim;
        mc.qubits = match self.architecture {
            Architecture::QuantumClassical => input_dim,
            _ => self.qubits,
        };
        if let Some(h) = &self.hidden {
            mc.hidden = h.clone();
        }
        mc.entangler_ranges = [self.entangler_range; NUM_BLOCKS];
        mc.epsilon = self.spd_epsilon;
        mc.projection_mode = self.projection_mode;
        mc
    }
}

/// A trained model with the scaler it expects its inputs to pass through.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: HybridModel,
    pub scaler: Scaler,
    pub report: TrainReport,
}

/// MSE and R² of a model on a dataset.
///
/// `dataset` is in original units. When a scaler is given, inputs are
/// scaled before the forward pass and predictions are compared in the
/// requested units.
pub fn evaluate(
    model: &HybridModel,
    dataset: &Dataset,
    scaler: Option<&Scaler>,
    units: MetricUnits,
) -> Result<Metrics> {
    if dataset.input_dim() != model.input_dim() {
        return Err(Error::DimensionMismatch {
            what: "dataset input width",
            expected: model.input_dim(),
            found: dataset.input_dim(),
        });
    }
    if dataset.output_dim() != model.output_dim() {
        return Err(Error::DimensionMismatch {
            what: "dataset output width",
            expected: model.output_dim(),
            found: dataset.output_dim(),
        });
    }
    let (predictions, targets) = match scaler {
        Some(s) => {
            let inputs: Vec<Vec<f64>> = dataset.inputs().iter().map(|x| s.scale_input(x)).collect();
            let raw = model.forward_batch(&inputs)?;
            match units {
                MetricUnits::Standardized => (raw, dataset.targets().iter().map(|y| s.scale_target(y)).collect()),
                MetricUnits::Original => (
                    raw.iter().map(|p| s.unscale_target(p)).collect(),
                    dataset.targets().to_vec(),
                ),
            }
        }
        None => (model.forward_batch(dataset.inputs())?, dataset.targets().to_vec()),
    };
    Ok(Metrics {
        mse: mse(&predictions, &targets)?,
        r2: r2_score(&predictions, &targets).ok(),
    })
}

/// MSE over a scaled split, from pre-encoded inputs, in row order.
fn encoded_mse(model: &HybridModel, encoded: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<f64> {
    let preds = encoded
        .iter()
        .map(|e| model.forward_encoded(e))
        .collect::<Result<Vec<_>>>()?;
    mse(&preds, targets)
}

/// Runs the full pipeline: split, scale, initialise, optimise, evaluate.
///
/// A non-finite epoch loss stops training and is reported through
/// [`TrainStatus::Diverged`] rather than as an error, so that the report
/// can still be written.
pub fn train_detailed(config: &TrainConfig, dataset: &Dataset) -> Result<TrainOutcome> {
    config.validate()?;
    let started = Instant::now();
    let (train_raw, test_raw) = split(dataset, config.train_fraction, config.seed)?;
    let scaler = Scaler::fit(&train_raw)?;
    let train_set = scaler.apply(&train_raw)?;

    let model_config = config.model_config(dataset.input_dim(), dataset.output_dim());
    let mut model = HybridModel::init(model_config, config.seed, train_set.inputs())?;
    let encoded = train_set
        .inputs()
        .iter()
        .enumerate()
        .map(|(i, x)| model.encode(x).map_err(|e| e.for_sample(i)))
        .collect::<Result<Vec<_>>>()?;
    let targets = train_set.targets();

    let mut params = model.params();
    let mut optimizer = Adam::new(
        params.len(),
        config.learning_rate,
        config.beta1,
        config.beta2,
        config.adam_epsilon,
    );
    let mut order: Vec<usize> = (0..encoded.len()).collect();
    let mut shuffle_rng = rng::stream(config.seed, Stream::Shuffle);
    let mut grad = vec![0.0; params.len()];
    let mut epoch_train_mse = Vec::with_capacity(config.epochs);
    let mut status = TrainStatus::Completed;

    'epochs: for epoch in 1..=config.epochs {
        order.shuffle(&mut shuffle_rng);
        for batch in order.chunks(config.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let weight = 1.0 / batch.len() as f64;
            let mut overflowed = false;
            for &i in batch {
                match model.accumulate_gradient(&encoded[i], &targets[i], config.gradient, weight, &mut grad) {
                    Ok(_) => {}
                    Err(Error::NonFinite(_)) => overflowed = true,
                    Err(e) => return Err(e.for_sample(i)),
                }
            }
            if !overflowed {
                optimizer.step(&mut params, &grad);
            }
            if overflowed || params.iter().any(|p| !p.is_finite()) {
                epoch_train_mse.push(f64::NAN);
                status = TrainStatus::Diverged { epoch };
                break 'epochs;
            }
            model.set_params(&params)?;
        }
        let loss = match encoded_mse(&model, &encoded, targets) {
            Err(Error::NonFinite(_)) => f64::NAN,
            other => other?,
        };
        epoch_train_mse.push(loss);
        if !loss.is_finite() {
            status = TrainStatus::Diverged { epoch };
            break;
        }
    }

    let test = match status {
        TrainStatus::Completed => Some(evaluate(&model, &test_raw, Some(&scaler), config.metric_units)?),
        TrainStatus::Diverged { .. } => None,
    };
    let report = TrainReport {
        architecture: config.architecture,
        status,
        epoch_train_mse,
        test_mse: test.map(|m| m.mse),
        test_r2: test.and_then(|m| m.r2),
        metric_units: config.metric_units,
        n_train: train_raw.len(),
        n_test: test_raw.len(),
        num_params: model.num_params(),
        seed: config.seed,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        config: config.clone(),
    };
    Ok(TrainOutcome { model, scaler, report })
}

/// As [`train_detailed`], but divergence is an error.
pub fn train(config: &TrainConfig, dataset: &Dataset) -> Result<TrainOutcome> {
    let outcome = train_detailed(config, dataset)?;
    if let TrainStatus::Diverged { epoch } = outcome.report.status {
        let loss = outcome.report.epoch_train_mse.last().copied().unwrap_or(f64::NAN);
        return Err(Error::Diverged { epoch, loss });
    }
    Ok(outcome)
}
