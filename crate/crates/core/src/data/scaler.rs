use super::Dataset;
use crate::error::{Error, Result};

/// Min-max scaling of inputs to `[0, 1]` and standardisation of targets.
///
/// Columns with zero spread pass through unchanged and are listed in
/// `degenerate_inputs` / `degenerate_targets`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    pub input_min: Vec<f64>,
    pub input_max: Vec<f64>,
    pub target_mean: Vec<f64>,
    pub target_std: Vec<f64>,
    pub degenerate_inputs: Vec<usize>,
    pub degenerate_targets: Vec<usize>,
}

impl Scaler {
    /// Fits on a training split. Only `train` is read.
    pub fn fit(train: &Dataset) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::InvalidInput("cannot fit a scaler on an empty dataset".into()));
        }
        let d = train.input_dim();
        let m = train.output_dim();
        let mut input_min = vec![f64::INFINITY; d];
        let mut input_max = vec![f64::NEG_INFINITY; d];
        for x in train.inputs() {
            for i in 0..d {
                input_min[i] = input_min[i].min(x[i]);
                input_max[i] = input_max[i].max(x[i]);
            }
        }
        let n = train.len() as f64;
        let mut target_mean = vec![0.0; m];
        for y in train.targets() {
            for (acc, v) in target_mean.iter_mut().zip(y) {
                *acc += v;
            }
        }
        target_mean.iter_mut().for_each(|v| *v /= n);
        let mut target_std = vec![0.0; m];
        for y in train.targets() {
            for c in 0..m {
                target_std[c] += (y[c] - target_mean[c]).powi(2);
            }
        }
        target_std.iter_mut().for_each(|v| *v = (*v / n).sqrt());

        Ok(Self::from_parts(input_min, input_max, target_mean, target_std))
    }

    /// Rebuilds a scaler from stored parameters, recomputing the
    /// degenerate-column flags.
    pub fn from_parts(input_min: Vec<f64>, input_max: Vec<f64>, target_mean: Vec<f64>, target_std: Vec<f64>) -> Self {
        let degenerate_inputs = (0..input_min.len()).filter(|&i| input_max[i] <= input_min[i]).collect();
        let degenerate_targets = (0..target_std.len()).filter(|&c| target_std[c] <= 0.0).collect();
        Self {
            input_min,
            input_max,
            target_mean,
            target_std,
            degenerate_inputs,
            degenerate_targets,
        }
    }

    pub fn has_degenerate_columns(&self) -> bool {
        !self.degenerate_inputs.is_empty() || !self.degenerate_targets.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.input_min.len()
    }

    pub fn output_dim(&self) -> usize {
        self.target_mean.len()
    }

    fn input_span(&self, i: usize) -> Option<f64> {
        let span = self.input_max[i] - self.input_min[i];
        (span > 0.0).then_some(span)
    }

    fn target_scale(&self, c: usize) -> Option<f64> {
        (self.target_std[c] > 0.0).then_some(self.target_std[c])
    }

    pub fn scale_input(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, v)| match self.input_span(i) {
                Some(s) => (v - self.input_min[i]) / s,
                None => *v,
            })
            .collect()
    }

    pub fn unscale_input(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, v)| match self.input_span(i) {
                Some(s) => v * s + self.input_min[i],
                None => *v,
            })
            .collect()
    }

    pub fn scale_target(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .enumerate()
            .map(|(c, v)| match self.target_scale(c) {
                Some(s) => (v - self.target_mean[c]) / s,
                None => *v,
            })
            .collect()
    }

    pub fn unscale_target(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .enumerate()
            .map(|(c, v)| match self.target_scale(c) {
                Some(s) => v * s + self.target_mean[c],
                None => *v,
            })
            .collect()
    }

    fn check(&self, ds: &Dataset) -> Result<()> {
        if ds.input_dim() != self.input_dim() || ds.output_dim() != self.output_dim() {
            return Err(Error::InvalidInput(format!(
                "scaler fitted for {}→{} columns, dataset has {}→{}",
                self.input_dim(),
                self.output_dim(),
                ds.input_dim(),
                ds.output_dim()
            )));
        }
        Ok(())
    }

    pub fn apply(&self, ds: &Dataset) -> Result<Dataset> {
        self.check(ds)?;
        let mut out = Dataset::new(
            ds.inputs().iter().map(|x| self.scale_input(x)).collect(),
            ds.targets().iter().map(|y| self.scale_target(y)).collect(),
        )?;
        out.metadata = ds.metadata.clone();
        out.metadata.scaler = Some(self.clone());
        Ok(out)
    }

    pub fn invert(&self, ds: &Dataset) -> Result<Dataset> {
        self.check(ds)?;
        let mut out = Dataset::new(
            ds.inputs().iter().map(|x| self.unscale_input(x)).collect(),
            ds.targets().iter().map(|y| self.unscale_target(y)).collect(),
        )?;
        out.metadata = ds.metadata.clone();
        out.metadata.scaler = None;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, split};

    #[test]
    fn constant_input_column_passes_through() {
        let ds = Dataset::new(
            vec![vec![1.0, 5.0], vec![3.0, 5.0], vec![2.0, 5.0]],
            vec![vec![0.0], vec![1.0], vec![2.0]],
        )
        .unwrap();
        let s = Scaler::fit(&ds).unwrap();
        assert_eq!(s.degenerate_inputs, vec![1]);
        assert!(s.has_degenerate_columns());
        let scaled = s.apply(&ds).unwrap();
        assert!(scaled.inputs().iter().all(|x| x[1] == 5.0));
    }

    #[test]
    fn round_trip_and_unit_range() {
        let ds = generate_synthetic(3, 40, 7, 4).unwrap();
        let s = Scaler::fit(&ds).unwrap();
        let scaled = s.apply(&ds).unwrap();
        for i in 0..7 {
            let col: Vec<f64> = scaled.inputs().iter().map(|x| x[i]).collect();
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!(lo.abs() <= 1e-15 && (hi - 1.0).abs() <= 1e-15);
        }
        let back = s.invert(&scaled).unwrap();
        for (a, b) in back.inputs().iter().flatten().zip(ds.inputs().iter().flatten()) {
            assert!((a - b).abs() <= 1e-12);
        }
        for (a, b) in back.targets().iter().flatten().zip(ds.targets().iter().flatten()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn fit_reads_only_the_training_split() {
        use crate::data::split_indices;
        let ds = generate_synthetic(8, 60, 7, 3).unwrap();
        let (_, test_idx) = split_indices(ds.len(), 0.75, 8).unwrap();
        // Corrupt every test row; the training rows stay put.
        let mut inputs = ds.inputs().to_vec();
        let mut targets = ds.targets().to_vec();
        for &i in &test_idx {
            inputs[i].iter_mut().for_each(|v| *v = *v * 10.0 + 3.0);
            targets[i].iter_mut().for_each(|v| *v -= 100.0);
        }
        let corrupted = Dataset::new(inputs, targets).unwrap();
        let (train_a, _) = split(&ds, 0.75, 8).unwrap();
        let (train_b, _) = split(&corrupted, 0.75, 8).unwrap();
        assert_eq!(Scaler::fit(&train_a).unwrap(), Scaler::fit(&train_b).unwrap());
        assert_ne!(Scaler::fit(&ds).unwrap(), Scaler::fit(&corrupted).unwrap());
    }
}
