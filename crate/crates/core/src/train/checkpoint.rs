//! Single-file model checkpoints.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic     8 bytes  "QMLPCKPT"
//! version   u32
//! config    u32 length, then that many bytes of JSON (the model config)
//! arrays    u32 count, then per array:
//!             u16 name length, name (UTF-8)
//!             u32 rank, rank × u64 dims
//!             product(dims) × f64
//! ```
//!
//! Arrays are `scaler.{input_min,input_max,target_mean,target_std}`,
//! `projection.basis` (shared SPD projection only), and per layer `i`
//! either `layer{i}.weight` `[out, in]` plus `layer{i}.bias` `[out]`, or
//! `layer{i}.circuit` `[blocks, qubits, 3]`.

use std::collections::BTreeMap;
use std::path::Path;

use crate::data::Scaler;
use crate::error::{Error, Result};
use crate::features::{Projection, ProjectionBasis, ProjectionMode, SpdPipeline};
use crate::linalg::Matrix;
use crate::model::{Activation, Architecture, DenseLayer, HybridModel, Layer, ModelConfig, QuantumLayer};
use crate::qsim::{CircuitSpec, EntanglingBlockWeights, NUM_BLOCKS};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"QMLPCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

/// A model together with the scaler its inputs and outputs pass through.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: HybridModel,
    pub scaler: Scaler,
}

struct Array {
    dims: Vec<usize>,
    data: Vec<f64>,
}

fn push_array(out: &mut Vec<u8>, name: &str, dims: &[usize], data: &[f64]) {
    debug_assert_eq!(dims.iter().product::<usize>(), data.len());
    out.extend_from_slice(&(name.len() as u16).to_le_bytes());
    out.extend_from_slice(name.as_bytes());
    out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for &d in dims {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for v in data {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

/// Serialises a model and scaler to bytes.
pub fn write_checkpoint(model: &HybridModel, scaler: &Scaler) -> Result<Vec<u8>> {
    let config = serde_json::to_vec(model.config())?;
    let mut arrays: Vec<(String, Vec<usize>, Vec<f64>)> = Vec::new();
    let d = scaler.input_dim();
    let m = scaler.output_dim();
    arrays.push(("scaler.input_min".into(), vec![d], scaler.input_min.clone()));
    arrays.push(("scaler.input_max".into(), vec![d], scaler.input_max.clone()));
    arrays.push(("scaler.target_mean".into(), vec![m], scaler.target_mean.clone()));
    arrays.push(("scaler.target_std".into(), vec![m], scaler.target_std.clone()));
    if let Some(SpdPipeline {
        projection: Projection::Shared(basis),
        ..
    }) = model.preprocessing()
    {
        let b = basis.matrix();
        arrays.push((
            "projection.basis".into(),
            vec![b.rows(), b.cols()],
            b.as_slice().to_vec(),
        ));
    }
    for (i, layer) in model.layers().iter().enumerate() {
        match layer {
            Layer::Dense(dl) => {
                arrays.push((
                    format!("layer{i}.weight"),
                    vec![dl.out_dim(), dl.in_dim()],
                    dl.weights().to_vec(),
                ));
                arrays.push((format!("layer{i}.bias"), vec![dl.out_dim()], dl.bias().to_vec()));
            }
            Layer::Quantum(q) => {
                let n = q.width();
                arrays.push((
                    format!("layer{i}.circuit"),
                    vec![NUM_BLOCKS, n, 3],
                    q.spec.weights_flat(),
                ));
            }
        }
    }

    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(config.len() as u32).to_le_bytes());
    out.extend_from_slice(&config);
    out.extend_from_slice(&(arrays.len() as u32).to_le_bytes());
    for (name, dims, data) in &arrays {
        push_array(&mut out, name, dims, data);
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::Truncated(format!(
                "{what}: need {n} bytes at offset {}, file has {}",
                self.pos,
                self.bytes.len()
            ))),
        }
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

fn read_arrays(r: &mut Reader<'_>) -> Result<BTreeMap<String, Array>> {
    let count = r.u32("array count")?;
    let mut arrays = BTreeMap::new();
    for _ in 0..count {
        let len = r.u16("array name length")? as usize;
        let name = std::str::from_utf8(r.take(len, "array name")?)
            .map_err(|_| Error::Format("array name is not UTF-8".into()))?
            .to_string();
        let rank = r.u32("array rank")? as usize;
        if rank > 8 {
            return Err(Error::Format(format!("array {name} has implausible rank {rank}")));
        }
        let mut dims = Vec::with_capacity(rank);
        for _ in 0..rank {
            dims.push(
                usize::try_from(r.u64("array dimension")?)
                    .map_err(|_| Error::Format(format!("array {name} too large")))?,
            );
        }
        let count = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .and_then(|c| c.checked_mul(8))
            .ok_or_else(|| Error::Format(format!("array {name} too large")))?;
        let raw = r.take(count, &format!("array {name}"))?;
        let data = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if arrays.insert(name.clone(), Array { dims, data }).is_some() {
            return Err(Error::Format(format!("duplicate array {name}")));
        }
    }
    Ok(arrays)
}

/// Removes `name`, checking its shape against what the config declares.
/// `labels` names each axis for the error message.
fn expect(arrays: &mut BTreeMap<String, Array>, name: &str, declared: &[usize], labels: &[&str]) -> Result<Vec<f64>> {
    let a = arrays
        .remove(name)
        .ok_or_else(|| Error::Format(format!("checkpoint is missing array {name}")))?;
    if a.dims.len() != declared.len() {
        return Err(Error::ShapeMismatch {
            what: format!("{name} rank"),
            declared: declared.len(),
            actual: a.dims.len(),
        });
    }
    for ((&want, &got), label) in declared.iter().zip(&a.dims).zip(labels) {
        if want != got {
            return Err(Error::ShapeMismatch {
                what: format!("{name} {label}"),
                declared: want,
                actual: got,
            });
        }
    }
    Ok(a.data)
}

fn read_dense(
    arrays: &mut BTreeMap<String, Array>,
    index: usize,
    i: usize,
    o: usize,
    act: Activation,
) -> Result<Layer> {
    let w = expect(
        arrays,
        &format!("layer{index}.weight"),
        &[o, i],
        &["output width", "input width"],
    )?;
    let b = expect(arrays, &format!("layer{index}.bias"), &[o], &["output width"])?;
    Ok(Layer::Dense(DenseLayer::new(i, o, w, b, act)?))
}

/// Parses bytes produced by [`write_checkpoint`].
pub fn read_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    let mut r = Reader { bytes, pos: 0 };
    if bytes.len() < CHECKPOINT_MAGIC.len() {
        return Err(Error::BadMagic);
    }
    if r.take(CHECKPOINT_MAGIC.len(), "magic")? != CHECKPOINT_MAGIC {
        return Err(Error::BadMagic);
    }
    let version = r.u32("format version")?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: CHECKPOINT_VERSION,
        });
    }
    let len = r.u32("config length")? as usize;
    let config: ModelConfig =
        serde_json::from_slice(r.take(len, "config")?).map_err(|e| Error::Format(format!("checkpoint config: {e}")))?;
    config.validate()?;
    let mut arrays = read_arrays(&mut r)?;
    if r.pos != bytes.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes after the last array",
            bytes.len() - r.pos
        )));
    }

    let d = config.input_dim;
    let m = config.output_dim;
    let scaler = Scaler::from_parts(
        expect(&mut arrays, "scaler.input_min", &[d], &["input width"])?,
        expect(&mut arrays, "scaler.input_max", &[d], &["input width"])?,
        expect(&mut arrays, "scaler.target_mean", &[m], &["output width"])?,
        expect(&mut arrays, "scaler.target_std", &[m], &["output width"])?,
    );

    let preprocessing = match (config.architecture, config.projection_mode) {
        (Architecture::SpdEnhanced, ProjectionMode::Batch) => {
            let rows = crate::features::expanded_dim(d);
            let data = expect(
                &mut arrays,
                "projection.basis",
                &[rows, config.qubits],
                &["expanded width", "projection size"],
            )?;
            let basis = ProjectionBasis::new(Matrix::from_row_major(rows, config.qubits, data)?)?;
            Some(SpdPipeline {
                input_dim: d,
                epsilon: config.epsilon,
                projection: Projection::Shared(basis),
            })
        }
        (Architecture::SpdEnhanced, ProjectionMode::PerSample) => Some(SpdPipeline {
            input_dim: d,
            epsilon: config.epsilon,
            projection: Projection::PerSample {
                k: config.qubits,
                epsilon: config.epsilon,
            },
        }),
        _ => None,
    };

    let (pre, post) = config.dense_shapes();
    let mut layers = Vec::with_capacity(pre.len() + post.len() + 1);
    for (i, o, act) in pre {
        layers.push(read_dense(&mut arrays, layers.len(), i, o, act)?);
    }
    let n = config.qubits;
    let flat = expect(
        &mut arrays,
        &format!("layer{}.circuit", layers.len()),
        &[NUM_BLOCKS, n, 3],
        &["blocks", "qubit count", "angles"],
    )?;
    let blocks = flat
        .chunks_exact(n * 3)
        .map(|block| EntanglingBlockWeights::new(block.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect()))
        .collect::<Result<Vec<_>>>()?;
    let spec = CircuitSpec::with_options(n, blocks, config.entangler_ranges, config.embedding_axis)?;
    layers.push(Layer::Quantum(QuantumLayer { spec }));
    for (i, o, act) in post {
        layers.push(read_dense(&mut arrays, layers.len(), i, o, act)?);
    }
    if let Some(name) = arrays.keys().next() {
        return Err(Error::Format(format!("unexpected array {name}")));
    }

    let model = HybridModel::from_parts(config, preprocessing, layers)?;
    Ok(Checkpoint { model, scaler })
}

pub fn save_checkpoint(model: &HybridModel, scaler: &Scaler, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_checkpoint(model, scaler)?)?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    read_checkpoint(&std::fs::read(path)?)
}
