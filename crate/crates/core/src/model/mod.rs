//! The three hybrid architectures.
//!
//! | architecture        | stack                                              |
//! |---------------------|----------------------------------------------------|
//! | `classical-quantum` | 3 dense → quantum layer → 1 dense                  |
//! | `quantum-classical` | quantum layer → 5 dense                            |
//! | `spd-enhanced`      | SPD preprocessing → quantum layer → 5 dense        |
//!
//! The quantum layer consumes `n` reals as embedding angles and emits the
//! `n` Pauli-Z expectations of the three-block circuit. No rescaling is
//! applied to the angles: the expectations are periodic in them.

mod dense;
mod metrics;

use serde::{Deserialize, Serialize};

pub use dense::{Activation, DenseLayer};
pub use metrics::{mse, r2_score};

use crate::error::{Error, Result};
use crate::features::{self, ProjectionMode, SpdPipeline};
use crate::qsim::{self, CircuitSpec, EmbeddingAxis, GradientMethod, NUM_BLOCKS};
use crate::rng::{self, Stream};

/// Output width of the bridge response vector.
pub const DEFAULT_OUTPUT_DIM: usize = 1017;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Architecture {
    ClassicalQuantum,
    QuantumClassical,
    SpdEnhanced,
}

impl Architecture {
    pub const ALL: [Architecture; 3] = [
        Architecture::ClassicalQuantum,
        Architecture::QuantumClassical,
        Architecture::SpdEnhanced,
    ];

    /// Command-line name.
    pub fn name(self) -> &'static str {
        match self {
            Architecture::ClassicalQuantum => "classical-quantum",
            Architecture::QuantumClassical => "quantum-classical",
            Architecture::SpdEnhanced => "spd-enhanced",
        }
    }

    /// Row label used in comparison tables.
    pub fn label(self) -> &'static str {
        match self {
            Architecture::ClassicalQuantum => "Classical-Quantum Hybrid",
            Architecture::QuantumClassical => "Quantum-Classical Hybrid",
            Architecture::SpdEnhanced => "SPD-Enhanced Hybrid",
        }
    }

    /// Number of hidden widths the architecture takes.
    pub fn hidden_count(self) -> usize {
        match self {
            Architecture::ClassicalQuantum => 2,
            _ => 4,
        }
    }

    pub fn default_hidden(self) -> Vec<usize> {
        match self {
            Architecture::ClassicalQuantum => vec![64, 32],
            _ => vec![64, 128, 256, 512],
        }
    }
}

impl std::fmt::Display for Architecture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Architecture::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "unknown architecture '{s}' (expected one of: classical-quantum, quantum-classical, spd-enhanced)"
            ))
        })
    }
}

/// `(in, out, activation)` of one dense layer.
pub(crate) type DenseShape = (usize, usize, Activation);

/// Shape and hyperparameters of a [`HybridModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub architecture: Architecture,
    pub input_dim: usize,
    pub output_dim: usize,
    /// Qubit count; also the projection size `k` for `spd-enhanced`.
    pub qubits: usize,
    /// Hidden dense widths: two for `classical-quantum` (the third dense
    /// layer maps to the qubit count), four for the others.
    pub hidden: Vec<usize>,
    pub entangler_ranges: [usize; NUM_BLOCKS],
    pub embedding_axis: EmbeddingAxis,
    pub epsilon: f64,
    pub projection_mode: ProjectionMode,
}

impl ModelConfig {
    pub fn new(architecture: Architecture) -> Self {
        Self {
            architecture,
            input_dim: features::DEFAULT_INPUT_DIM,
            output_dim: DEFAULT_OUTPUT_DIM,
            qubits: features::DEFAULT_K,
            hidden: architecture.default_hidden(),
            entangler_ranges: [1; NUM_BLOCKS],
            embedding_axis: EmbeddingAxis::X,
            epsilon: features::DEFAULT_EPSILON,
            projection_mode: ProjectionMode::Batch,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 || self.qubits == 0 {
            return Err(Error::InvalidParameter(
                "input width, output width and qubit count must be positive".into(),
            ));
        }
        if self.hidden.len() != self.architecture.hidden_count() {
            return Err(Error::InvalidParameter(format!(
                "{} takes {} hidden widths, got {}",
                self.architecture,
                self.architecture.hidden_count(),
                self.hidden.len()
            )));
        }
        if self.hidden.contains(&0) {
            return Err(Error::InvalidParameter("hidden widths must be positive".into()));
        }
        match self.architecture {
            Architecture::QuantumClassical if self.qubits != self.input_dim => Err(Error::InvalidParameter(format!(
                "quantum-classical embeds the raw input, so qubits ({}) must equal the input width ({})",
                self.qubits, self.input_dim
            ))),
            Architecture::SpdEnhanced if self.qubits > features::expanded_dim(self.input_dim) => {
                Err(Error::InvalidParameter(format!(
                    "projection size {} exceeds the expanded width {}",
                    self.qubits,
                    features::expanded_dim(self.input_dim)
                )))
            }
            _ => Ok(()),
        }
    }

    /// `(in, out, activation)` for each dense layer, in stack order, split
    /// into those before and after the quantum layer.
    pub(crate) fn dense_shapes(&self) -> (Vec<DenseShape>, Vec<DenseShape>) {
        let h = &self.hidden;
        let chain = |widths: &[usize], last: Activation| {
            widths
                .windows(2)
                .enumerate()
                .map(|(i, w)| {
                    let act = if i + 2 == widths.len() { last } else { Activation::Relu };
                    (w[0], w[1], act)
                })
                .collect::<Vec<_>>()
        };
        match self.architecture {
            Architecture::ClassicalQuantum => {
                let pre = chain(&[self.input_dim, h[0], h[1], self.qubits], Activation::Identity);
                let post = vec![(self.qubits, self.output_dim, Activation::Identity)];
                (pre, post)
            }
            _ => {
                let widths = [self.qubits, h[0], h[1], h[2], h[3], self.output_dim];
                (Vec::new(), chain(&widths, Activation::Identity))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumLayer {
    pub spec: CircuitSpec,
}

impl QuantumLayer {
    pub fn width(&self) -> usize {
        self.spec.num_qubits()
    }

    pub fn forward(&self, angles: &[f64]) -> Result<Vec<f64>> {
        qsim::run_circuit(&self.spec, angles)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Dense(DenseLayer),
    Quantum(QuantumLayer),
}

impl Layer {
    pub fn in_dim(&self) -> usize {
        match self {
            Layer::Dense(d) => d.in_dim(),
            Layer::Quantum(q) => q.width(),
        }
    }

    pub fn out_dim(&self) -> usize {
        match self {
            Layer::Dense(d) => d.out_dim(),
            Layer::Quantum(q) => q.width(),
        }
    }

    pub fn num_params(&self) -> usize {
        match self {
            Layer::Dense(d) => d.num_params(),
            Layer::Quantum(q) => q.spec.num_weights(),
        }
    }
}

/// A layer stack plus optional SPD preprocessing.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridModel {
    config: ModelConfig,
    preprocessing: Option<SpdPipeline>,
    layers: Vec<Layer>,
}

/// Per-sample loss and, when requested, the accumulated gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Backward {
    pub loss: f64,
    pub gradient: Vec<f64>,
}

impl HybridModel {
    /// Builds a freshly initialised model. `fit_inputs` are the training
    /// inputs used to fit the SPD projection (ignored by the other
    /// architectures).
    pub fn init(config: ModelConfig, seed: u64, fit_inputs: &[Vec<f64>]) -> Result<Self> {
        config.validate()?;
        let preprocessing = match config.architecture {
            Architecture::SpdEnhanced => Some(SpdPipeline::fit(
                fit_inputs,
                config.input_dim,
                config.qubits,
                config.epsilon,
                config.projection_mode,
            )?),
            _ => None,
        };

        let mut dense_rng = rng::stream(seed, Stream::DenseInit);
        let mut circuit_rng = rng::stream(seed, Stream::CircuitInit);
        let (pre, post) = config.dense_shapes();
        let mut layers = Vec::with_capacity(pre.len() + post.len() + 1);
        for (i, o, act) in pre {
            layers.push(Layer::Dense(DenseLayer::glorot(i, o, act, &mut dense_rng)?));
        }
        let random = CircuitSpec::random(config.qubits, &mut circuit_rng)?;
        let spec = CircuitSpec::with_options(
            config.qubits,
            random.blocks().to_vec(),
            config.entangler_ranges,
            config.embedding_axis,
        )?;
        layers.push(Layer::Quantum(QuantumLayer { spec }));
        for (i, o, act) in post {
            layers.push(Layer::Dense(DenseLayer::glorot(i, o, act, &mut dense_rng)?));
        }
        Self::from_parts(config, preprocessing, layers)
    }

    /// Assembles a model from explicit parts, checking that they match the
    /// configured architecture.
    pub fn from_parts(config: ModelConfig, preprocessing: Option<SpdPipeline>, layers: Vec<Layer>) -> Result<Self> {
        config.validate()?;
        let (pre, post) = config.dense_shapes();
        if layers.len() != pre.len() + post.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "{} needs {} layers, got {}",
                config.architecture,
                pre.len() + post.len() + 1,
                layers.len()
            )));
        }
        let expected = pre.iter().map(Some).chain([None]).chain(post.iter().map(Some));
        for (layer, shape) in layers.iter().zip(expected) {
            match (layer, shape) {
                (Layer::Dense(d), Some(&(i, o, act))) => {
                    if d.in_dim() != i || d.out_dim() != o || d.activation() != act {
                        return Err(Error::InvalidInput(format!(
                            "dense layer {}x{} ({:?}) does not match expected {i}x{o} ({act:?})",
                            d.in_dim(),
                            d.out_dim(),
                            d.activation()
                        )));
                    }
                }
                (Layer::Quantum(q), None) => {
                    if q.width() != config.qubits {
                        return Err(Error::DimensionMismatch {
                            what: "quantum layer width",
                            expected: config.qubits,
                            found: q.width(),
                        });
                    }
                }
                _ => return Err(Error::InvalidInput("layer kinds out of order".into())),
            }
        }
        match (&preprocessing, config.architecture) {
            (Some(p), Architecture::SpdEnhanced) => {
                if p.input_dim != config.input_dim || p.k() != config.qubits {
                    return Err(Error::InvalidInput(
                        "SPD preprocessing does not match the configured widths".into(),
                    ));
                }
            }
            (None, Architecture::SpdEnhanced) => {
                return Err(Error::InvalidInput("spd-enhanced model without preprocessing".into()))
            }
            (Some(_), _) => {
                return Err(Error::InvalidInput(format!(
                    "{} does not take SPD preprocessing",
                    config.architecture
                )))
            }
            (None, _) => {}
        }
        Ok(Self {
            config,
            preprocessing,
            layers,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn architecture(&self) -> Architecture {
        self.config.architecture
    }

    pub fn preprocessing(&self) -> Option<&SpdPipeline> {
        self.preprocessing.as_ref()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.config.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.config.output_dim
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(Layer::num_params).sum()
    }

    /// All trainable parameters, layer by layer (dense: weights then bias;
    /// quantum: flat circuit weights).
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for layer in &self.layers {
            match layer {
                Layer::Dense(d) => {
                    out.extend_from_slice(d.weights());
                    out.extend_from_slice(d.bias());
                }
                Layer::Quantum(q) => out.extend(q.spec.weights_flat()),
            }
        }
        out
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_params() {
            return Err(Error::DimensionMismatch {
                what: "parameter count",
                expected: self.num_params(),
                found: params.len(),
            });
        }
        if params.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("parameters must be finite".into()));
        }
        let mut offset = 0;
        for layer in &mut self.layers {
            let len = layer.num_params();
            let chunk = &params[offset..offset + len];
            match layer {
                Layer::Dense(d) => {
                    let (w, b) = d.params_mut();
                    let nw = w.len();
                    w.copy_from_slice(&chunk[..nw]);
                    b.copy_from_slice(&chunk[nw..]);
                }
                Layer::Quantum(q) => q.spec.set_weights_flat(chunk)?,
            }
            offset += len;
        }
        Ok(())
    }

    /// Applies the fixed preprocessing: SPD encoding for `spd-enhanced`,
    /// identity otherwise. The result feeds the first trainable layer.
    pub fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.config.input_dim {
            return Err(Error::DimensionMismatch {
                what: "model input width",
                expected: self.config.input_dim,
                found: x.len(),
            });
        }
        match &self.preprocessing {
            Some(p) => Ok(p.encode(x)?.normalized),
            None => {
                if x.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidInput("model input is not finite".into()));
                }
                Ok(x.to_vec())
            }
        }
    }

    /// Activations of every layer; entry 0 is the encoded input.
    fn trace(&self, encoded: Vec<f64>) -> Result<Vec<Vec<f64>>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(encoded);
        for (i, layer) in self.layers.iter().enumerate() {
            let x = acts.last().expect("non-empty");
            let y = match layer {
                Layer::Dense(d) => d.forward(x),
                Layer::Quantum(q) => q.forward(x)?,
            };
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("layer {i} output")));
            }
            acts.push(y);
        }
        Ok(acts)
    }

    pub fn forward_encoded(&self, encoded: &[f64]) -> Result<Vec<f64>> {
        Ok(self.trace(encoded.to_vec())?.pop().expect("non-empty"))
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.forward_encoded(&self.encode(x)?)
    }

    /// Forward pass over many samples; a failing sample is identified by
    /// index.
    pub fn forward_batch(&self, xs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        xs.iter()
            .enumerate()
            .map(|(i, x)| self.forward(x).map_err(|e| e.for_sample(i)))
            .collect()
    }

    /// Backpropagates `L = weight · mean_c (y_c − t_c)²` from an encoded
    /// input, adding `∂L/∂params` into `grad`. Returns the unweighted
    /// per-sample loss.
    pub fn accumulate_gradient(
        &self,
        encoded: &[f64],
        target: &[f64],
        method: GradientMethod,
        weight: f64,
        grad: &mut [f64],
    ) -> Result<f64> {
        if target.len() != self.config.output_dim {
            return Err(Error::DimensionMismatch {
                what: "target width",
                expected: self.config.output_dim,
                found: target.len(),
            });
        }
        if grad.len() != self.num_params() {
            return Err(Error::DimensionMismatch {
                what: "gradient buffer length",
                expected: self.num_params(),
                found: grad.len(),
            });
        }
        let acts = self.trace(encoded.to_vec())?;
        let out = acts.last().expect("non-empty");
        let m = out.len() as f64;
        let loss = out.iter().zip(target).map(|(y, t)| (y - t) * (y - t)).sum::<f64>() / m;
        let mut upstream: Vec<f64> = out
            .iter()
            .zip(target)
            .map(|(y, t)| weight * 2.0 * (y - t) / m)
            .collect();

        let mut end = grad.len();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let start = end - layer.num_params();
            let g = &mut grad[start..end];
            upstream = match layer {
                Layer::Dense(d) => d.backward(&acts[i], &acts[i + 1], &upstream, g),
                Layer::Quantum(q) => {
                    let vjp = qsim::vjp_with(method, &q.spec, &acts[i], &upstream)?;
                    for (dst, src) in g.iter_mut().zip(&vjp.grad_weights) {
                        *dst += src;
                    }
                    vjp.grad_inputs
                }
            };
            end = start;
        }
        Ok(loss)
    }

    /// Gradient of the per-sample MSE with the quantum layer differentiated
    /// by the parameter-shift rule.
    pub fn backward(&self, x: &[f64], target: &[f64]) -> Result<Backward> {
        self.backward_with(x, target, GradientMethod::ParameterShift)
    }

    pub fn backward_with(&self, x: &[f64], target: &[f64], method: GradientMethod) -> Result<Backward> {
        let encoded = self.encode(x)?;
        let mut gradient = vec![0.0; self.num_params()];
        let loss = self.accumulate_gradient(&encoded, target, method, 1.0, &mut gradient)?;
        Ok(Backward { loss, gradient })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(arch: Architecture) -> ModelConfig {
        ModelConfig {
            input_dim: 3,
            output_dim: 4,
            qubits: 3,
            hidden: if arch == Architecture::ClassicalQuantum {
                vec![8, 6]
            } else {
                vec![8, 8, 6, 5]
            },
            ..ModelConfig::new(arch)
        }
    }

    fn fit_inputs() -> Vec<Vec<f64>> {
        (0..10)
            .map(|i| (0..3).map(|j| ((i * 3 + j) as f64 * 0.61).cos().abs()).collect())
            .collect()
    }

    #[test]
    fn layer_counts_per_architecture() {
        for (arch, dense_before, dense_after) in [
            (Architecture::ClassicalQuantum, 3, 1),
            (Architecture::QuantumClassical, 0, 5),
            (Architecture::SpdEnhanced, 0, 5),
        ] {
            let m = HybridModel::init(tiny(arch), 1, &fit_inputs()).unwrap();
            let q = m.layers().iter().position(|l| matches!(l, Layer::Quantum(_))).unwrap();
            assert_eq!(q, dense_before);
            assert_eq!(m.layers().len() - q - 1, dense_after);
            assert_eq!(m.preprocessing().is_some(), arch == Architecture::SpdEnhanced);
        }
    }

    #[test]
    fn default_output_width_is_1017() {
        for arch in Architecture::ALL {
            let m = HybridModel::init(ModelConfig::new(arch), 3, &fit_inputs_7()).unwrap();
            assert_eq!(m.forward(&[0.5; 7]).unwrap().len(), 1017);
        }
    }

    fn fit_inputs_7() -> Vec<Vec<f64>> {
        (0..12)
            .map(|i| (0..7).map(|j| ((i * 7 + j) as f64 * 0.37).sin().abs()).collect())
            .collect()
    }

    #[test]
    fn zero_parameters_give_zero_output() {
        for arch in Architecture::ALL {
            let mut m = HybridModel::init(tiny(arch), 2, &fit_inputs()).unwrap();
            m.set_params(&vec![0.0; m.num_params()]).unwrap();
            assert_eq!(m.forward(&[0.2, 0.4, 0.9]).unwrap(), vec![0.0; 4]);
        }
    }

    #[test]
    fn quantum_first_model_on_zero_input_sees_ones() {
        let mut m = HybridModel::init(tiny(Architecture::QuantumClassical), 4, &[]).unwrap();
        let mut p = m.params();
        let qlen = m.layers()[0].num_params();
        p[..qlen].iter_mut().for_each(|v| *v = 0.0);
        m.set_params(&p).unwrap();
        let mut expected = vec![1.0; 3];
        for layer in &m.layers()[1..] {
            let Layer::Dense(d) = layer else { unreachable!() };
            expected = d.forward(&expected);
        }
        assert_eq!(m.forward(&[0.0; 3]).unwrap(), expected);
    }

    #[test]
    fn forward_is_deterministic() {
        let m = HybridModel::init(tiny(Architecture::SpdEnhanced), 9, &fit_inputs()).unwrap();
        let a = m.forward(&[0.3, 0.1, 0.7]).unwrap();
        let b = m.forward(&[0.3, 0.1, 0.7]).unwrap();
        assert_eq!(
            a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn degenerate_sample_is_identified() {
        let m = HybridModel::init(tiny(Architecture::SpdEnhanced), 9, &fit_inputs()).unwrap();
        let err = m.forward_batch(&[vec![0.5; 3], vec![0.0; 3]]).unwrap_err();
        assert!(matches!(err, Error::DegenerateState { sample: Some(1), .. }));
    }

    #[test]
    fn zero_residual_gives_zero_gradient() {
        for arch in Architecture::ALL {
            let m = HybridModel::init(tiny(arch), 6, &fit_inputs()).unwrap();
            let x = [0.25, 0.8, 0.4];
            let y = m.forward(&x).unwrap();
            let b = m.backward(&x, &y).unwrap();
            assert_eq!(b.loss, 0.0);
            assert!(b.gradient.iter().all(|g| g.abs() < 1e-10));
        }
    }

    #[test]
    fn gradient_is_linear_in_residual() {
        let m = HybridModel::init(tiny(Architecture::ClassicalQuantum), 7, &[]).unwrap();
        let x = [0.6, 0.1, 0.3];
        let y = m.forward(&x).unwrap();
        let residual = [0.3, -0.2, 0.5, 0.1];
        let target = |c: f64| -> Vec<f64> { y.iter().zip(&residual).map(|(a, r)| a - c * r).collect() };
        let g1 = m.backward(&x, &target(1.0)).unwrap().gradient;
        let g3 = m.backward(&x, &target(3.0)).unwrap().gradient;
        for (a, b) in g1.iter().zip(&g3) {
            assert!((3.0 * a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn config_validation() {
        let mut c = tiny(Architecture::QuantumClassical);
        c.qubits = 2;
        assert!(HybridModel::init(c, 0, &[]).is_err());
        let mut c = tiny(Architecture::ClassicalQuantum);
        c.hidden = vec![4, 4, 4, 4];
        assert!(HybridModel::init(c, 0, &[]).is_err());
        let mut c = tiny(Architecture::SpdEnhanced);
        c.qubits = 10;
        assert!(HybridModel::init(c, 0, &fit_inputs()).is_err());
        assert!("nonsense".parse::<Architecture>().is_err());
        assert_eq!(
            "spd-enhanced".parse::<Architecture>().unwrap(),
            Architecture::SpdEnhanced
        );
    }

    #[test]
    fn params_round_trip() {
        let mut m = HybridModel::init(tiny(Architecture::SpdEnhanced), 1, &fit_inputs()).unwrap();
        let p: Vec<f64> = (0..m.num_params()).map(|i| i as f64 * 1e-3).collect();
        m.set_params(&p).unwrap();
        assert_eq!(m.params(), p);
        assert!(m.set_params(&p[1..]).is_err());
    }
}
