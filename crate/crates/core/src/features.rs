//! SPD feature pipeline: degree-2 polynomial expansion, the regularised
//! outer-product matrix `Z = z zᵀ + εI`, its spectral decomposition, top-k
//! projection and unit-norm state preparation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, JACOBI_MAX_SWEEPS, JACOBI_TOLERANCE};

pub const DEFAULT_INPUT_DIM: usize = 7;
pub const DEFAULT_EPSILON: f64 = 1e-6;
pub const DEFAULT_K: usize = 7;

/// Largest tolerated `|Z[i][j] - Z[j][i]|` accepted by [`eigendecompose`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Norms at or below this cannot be normalised into a state.
pub const MIN_STATE_NORM: f64 = 1e-12;

/// Raw model input.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("feature vector is empty".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "feature {i} is not finite ({})",
                values[i]
            )));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Length of the degree-2 expansion of a `d`-dimensional input.
pub const fn expanded_dim(d: usize) -> usize {
    2 * d + d * d.saturating_sub(1) / 2
}

/// Degree-2 polynomial features: `x₁..x_d`, then `x₁²..x_d²`, then `xᵢxⱼ`
/// for `i < j` in lexicographic order. No constant term.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedFeatures(Vec<f64>);

impl ExpandedFeatures {
    /// Wraps an already-expanded vector (or any vector living in the
    /// expanded space).
    pub fn from_vec(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("expanded feature {i} is not finite")));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn expand_features(x: &FeatureVector) -> ExpandedFeatures {
    let x = x.as_slice();
    let d = x.len();
    let mut z = Vec::with_capacity(expanded_dim(d));
    z.extend_from_slice(x);
    z.extend(x.iter().map(|v| v * v));
    for i in 0..d {
        for j in (i + 1)..d {
            z.push(x[i] * x[j]);
        }
    }
    ExpandedFeatures(z)
}

/// Validating shorthand for `expand_features(&FeatureVector::new(..)?)`.
pub fn expand(values: &[f64]) -> Result<ExpandedFeatures> {
    Ok(expand_features(&FeatureVector::new(values.to_vec())?))
}

/// A symmetric positive definite matrix built as `z zᵀ + εI`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    entries: Matrix,
    epsilon: f64,
}

impl SpdMatrix {
    pub fn matrix(&self) -> &Matrix {
        &self.entries
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    /// `xᵀ Z x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            acc += x[i] * linalg::dot(self.entries.row(i), x);
        }
        acc
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be a positive finite number, got {epsilon}"
        )));
    }
    Ok(())
}

pub fn build_spd(z: &ExpandedFeatures, epsilon: f64) -> Result<SpdMatrix> {
    check_epsilon(epsilon)?;
    let z = z.as_slice();
    let m = z.len();
    let mut entries = Matrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            entries[(i, j)] = z[i] * z[j];
        }
        entries[(i, i)] += epsilon;
    }
    Ok(SpdMatrix { entries, epsilon })
}

/// Spectral decomposition `Z = V Λ Vᵀ` with eigenvalues sorted in
/// descending order. Column `j` of `eigenvectors` pairs with
/// `eigenvalues[j]`, and its largest-magnitude entry (lowest index on ties)
/// is non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBasis {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl EigenBasis {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V Λ Vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = (0..n).map(|l| v[(i, l)] * self.eigenvalues[l] * v[(j, l)]).sum();
            }
        }
        out
    }

    /// The `m×k` basis made of the top-`k` eigenvectors.
    pub fn top(&self, k: usize) -> Result<ProjectionBasis> {
        check_k(k, self.dim())?;
        Ok(ProjectionBasis(self.eigenvectors.leading_columns(k)))
    }
}

pub fn eigendecompose(z: &Matrix) -> Result<EigenBasis> {
    if z.rows() != z.cols() {
        return Err(Error::InvalidInput(format!(
            "eigendecompose needs a square matrix, got {}x{}",
            z.rows(),
            z.cols()
        )));
    }
    let asym = z.max_asymmetry();
    if asym > SYMMETRY_TOLERANCE {
        return Err(Error::InvalidInput(format!(
            "matrix is not symmetric (max asymmetry {asym:e})"
        )));
    }
    let raw = linalg::jacobi_eigen(z, JACOBI_TOLERANCE, JACOBI_MAX_SWEEPS)?;
    let n = raw.values.len();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw.values[b].total_cmp(&raw.values[a]));

    let mut eigenvectors = Matrix::zeros(n, n);
    let mut eigenvalues = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvalues.push(raw.values[src]);
        let mut col = raw.vectors.column(src);
        apply_sign_convention(&mut col);
        for (i, v) in col.into_iter().enumerate() {
            eigenvectors[(i, dst)] = v;
        }
    }
    Ok(EigenBasis {
        eigenvalues,
        eigenvectors,
    })
}

fn apply_sign_convention(v: &mut [f64]) {
    let mut pivot = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[pivot].abs() {
            pivot = i;
        }
    }
    if v.get(pivot).is_some_and(|&p| p < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn check_k(k: usize, m: usize) -> Result<()> {
    if k == 0 || k > m {
        return Err(Error::InvalidParameter(format!(
            "projection size k = {k} must lie in 1..={m}"
        )));
    }
    Ok(())
}

/// `m×k` matrix whose columns are orthonormal projection directions.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionBasis(Matrix);

impl ProjectionBasis {
    pub fn new(basis: Matrix) -> Result<Self> {
        if basis.cols() == 0 || basis.cols() > basis.rows() {
            return Err(Error::InvalidParameter(format!(
                "projection basis must be m×k with 1 ≤ k ≤ m, got {}x{}",
                basis.rows(),
                basis.cols()
            )));
        }
        Ok(Self(basis))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn input_dim(&self) -> usize {
        self.0.rows()
    }

    pub fn k(&self) -> usize {
        self.0.cols()
    }
}

/// `x_proj = V_kᵀ z`.
pub fn project(z: &ExpandedFeatures, basis: &ProjectionBasis) -> Result<Vec<f64>> {
    let v = basis.matrix();
    if z.len() != v.rows() {
        return Err(Error::DimensionMismatch {
            what: "projection input length",
            expected: v.rows(),
            found: z.len(),
        });
    }
    let z = z.as_slice();
    let mut out = vec![0.0; v.cols()];
    for (i, &zi) in z.iter().enumerate() {
        for (o, &vij) in out.iter_mut().zip(v.row(i)) {
            *o += vij * zi;
        }
    }
    Ok(out)
}

pub fn normalize_state(x_proj: &[f64]) -> Result<Vec<f64>> {
    let norm = linalg::norm2(x_proj);
    if norm.is_nan() || norm <= MIN_STATE_NORM {
        return Err(Error::DegenerateState { norm, sample: None });
    }
    Ok(x_proj.iter().map(|v| v / norm).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedState {
    pub projected: Vec<f64>,
    pub normalized: Vec<f64>,
}

impl ProjectedState {
    pub fn from_projection(projected: Vec<f64>) -> Result<Self> {
        let normalized = normalize_state(&projected)?;
        Ok(Self { projected, normalized })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectionMode {
    /// Eigendecompose each sample's own `z zᵀ + εI`.
    PerSample,
    /// Eigendecompose `mean(zᵢ zᵢᵀ) + εI` over a training set once.
    #[default]
    Batch,
}

impl std::fmt::Display for ProjectionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::PerSample => "per-sample",
            Self::Batch => "batch",
        })
    }
}

impl std::str::FromStr for ProjectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-sample" => Ok(Self::PerSample),
            "batch" => Ok(Self::Batch),
            other => Err(Error::InvalidParameter(format!(
                "unknown projection mode '{other}' (expected per-sample or batch)"
            ))),
        }
    }
}

/// How expanded features are mapped to `k` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum Projection {
    PerSample { k: usize, epsilon: f64 },
    Shared(ProjectionBasis),
}

impl Projection {
    pub fn k(&self) -> usize {
        match self {
            Projection::PerSample { k, .. } => *k,
            Projection::Shared(b) => b.k(),
        }
    }

    pub fn apply(&self, z: &ExpandedFeatures) -> Result<Vec<f64>> {
        match self {
            Projection::Shared(basis) => project(z, basis),
            Projection::PerSample { k, epsilon } => {
                let basis = eigendecompose(build_spd(z, *epsilon)?.matrix())?.top(*k)?;
                project(z, &basis)
            }
        }
    }
}

pub fn fit_projection(
    dataset: &[ExpandedFeatures],
    k: usize,
    epsilon: f64,
    mode: ProjectionMode,
) -> Result<Projection> {
    check_epsilon(epsilon)?;
    match mode {
        ProjectionMode::PerSample => {
            if let Some(first) = dataset.first() {
                check_k(k, first.len())?;
            } else if k == 0 {
                check_k(k, 0)?;
            }
            Ok(Projection::PerSample { k, epsilon })
        }
        ProjectionMode::Batch => {
            let first = dataset
                .first()
                .ok_or_else(|| Error::InvalidInput("batch projection needs a non-empty dataset".into()))?;
            let m = first.len();
            check_k(k, m)?;
            let mut second_moment = Matrix::zeros(m, m);
            for z in dataset {
                if z.len() != m {
                    return Err(Error::DimensionMismatch {
                        what: "expanded feature length",
                        expected: m,
                        found: z.len(),
                    });
                }
                let z = z.as_slice();
                for i in 0..m {
                    for j in 0..m {
                        second_moment[(i, j)] += z[i] * z[j];
                    }
                }
            }
            let scale = 1.0 / dataset.len() as f64;
            for i in 0..m {
                for j in 0..m {
                    second_moment[(i, j)] *= scale;
                }
                second_moment[(i, i)] += epsilon;
            }
            Ok(Projection::Shared(eigendecompose(&second_moment)?.top(k)?))
        }
    }
}

/// Expansion, projection and normalisation bundled for the SPD-enhanced
/// model.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdPipeline {
    pub input_dim: usize,
    pub epsilon: f64,
    pub projection: Projection,
}

impl SpdPipeline {
    /// Fits the projection on raw training inputs.
    pub fn fit(inputs: &[Vec<f64>], input_dim: usize, k: usize, epsilon: f64, mode: ProjectionMode) -> Result<Self> {
        let expanded = inputs
            .iter()
            .map(|x| {
                if x.len() != input_dim {
                    return Err(Error::DimensionMismatch {
                        what: "input width",
                        expected: input_dim,
                        found: x.len(),
                    });
                }
                expand(x)
            })
            .collect::<Result<Vec<_>>>()?;
        if mode == ProjectionMode::PerSample {
            check_k(k, expanded_dim(input_dim))?;
        }
        let projection = fit_projection(&expanded, k, epsilon, mode)?;
        Ok(Self {
            input_dim,
            epsilon,
            projection,
        })
    }

    pub fn k(&self) -> usize {
        self.projection.k()
    }

    pub fn mode(&self) -> ProjectionMode {
        match self.projection {
            Projection::PerSample { .. } => ProjectionMode::PerSample,
            Projection::Shared(_) => ProjectionMode::Batch,
        }
    }

    pub fn encode(&self, x: &[f64]) -> Result<ProjectedState> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                what: "input width",
                expected: self.input_dim,
                found: x.len(),
            });
        }
        let z = expand(x)?;
        ProjectedState::from_projection(self.projection.apply(&z)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn expand_zero_input() {
        let z = expand(&[0.0; 7]).unwrap();
        assert_eq!(z.as_slice(), &[0.0; 35]);
    }

    #[test]
    fn expand_two_dims_by_hand() {
        let z = expand(&[1.0, 2.0]).unwrap();
        assert_eq!(z.as_slice(), &[1.0, 2.0, 1.0, 4.0, 2.0]);
    }

    #[test]
    fn expanded_dimension() {
        assert_eq!(expanded_dim(7), 35);
        assert_eq!(expand(&[0.3; 7]).unwrap().len(), 35);
        assert_eq!(expanded_dim(1), 2);
    }

    #[test]
    fn expand_rejects_non_finite() {
        assert!(matches!(expand(&[1.0, f64::NAN]), Err(Error::InvalidInput(_))));
        assert!(matches!(expand(&[f64::INFINITY]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn spd_of_zero_vector_is_scaled_identity() {
        let z = ExpandedFeatures::from_vec(vec![0.0; 4]).unwrap();
        let spd = build_spd(&z, 1e-6).unwrap();
        assert_eq!(spd.matrix(), &Matrix::from_diagonal(&[1e-6; 4]));
    }

    #[test]
    fn spd_of_unit_vector() {
        let mut v = vec![0.0; 5];
        v[0] = 1.0;
        let spd = build_spd(&ExpandedFeatures::from_vec(v).unwrap(), 0.5).unwrap();
        let m = spd.matrix();
        assert_eq!(m[(0, 0)], 1.5);
        for i in 1..5 {
            assert_eq!(m[(i, i)], 0.5);
        }
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    assert_eq!(m[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn spd_rejects_bad_epsilon() {
        let z = ExpandedFeatures::from_vec(vec![1.0]).unwrap();
        for eps in [0.0, -1.0, f64::NAN] {
            assert!(matches!(build_spd(&z, eps), Err(Error::InvalidParameter(_))));
        }
    }

    #[test]
    fn eigen_of_diagonal() {
        let eig = eigendecompose(&Matrix::from_diagonal(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(eig.eigenvalues, vec![3.0, 2.0, 1.0]);
        let expected = Matrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]]).unwrap();
        assert_eq!(eig.eigenvectors, expected);
    }

    #[test]
    fn eigen_of_identity() {
        let eig = eigendecompose(&Matrix::identity(6)).unwrap();
        assert!(eig.eigenvalues.iter().all(|&v| v == 1.0));
        assert_eq!(eig.eigenvectors, Matrix::identity(6));
    }

    #[test]
    fn top_eigenvector_of_rank_one_plus_identity() {
        let z = expand(&[0.2, -0.7, 0.5, 0.9, -0.1, 0.4, 0.3]).unwrap();
        let eig = eigendecompose(build_spd(&z, 1e-6).unwrap().matrix()).unwrap();
        let mut unit: Vec<f64> = z.as_slice().iter().map(|v| v / linalg::norm2(z.as_slice())).collect();
        apply_sign_convention(&mut unit);
        for (i, u) in unit.iter().enumerate() {
            assert!(close(eig.eigenvectors[(i, 0)], *u, 1e-10));
        }
    }

    #[test]
    fn eigen_rejects_asymmetric() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0 + 1e-9, 1.0]]).unwrap();
        assert!(matches!(eigendecompose(&m), Err(Error::InvalidInput(_))));
        let m = Matrix::zeros(2, 3);
        assert!(matches!(eigendecompose(&m), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn sign_convention_prefers_lowest_index_on_ties() {
        let mut v = vec![-0.5, 0.5, 0.1];
        apply_sign_convention(&mut v);
        assert_eq!(v, vec![0.5, -0.5, -0.1]);
        let mut v = vec![0.1, -0.9];
        apply_sign_convention(&mut v);
        assert_eq!(v, vec![-0.1, 0.9]);
    }

    fn unit(m: usize, i: usize) -> ExpandedFeatures {
        let mut v = vec![0.0; m];
        v[i] = 1.0;
        ExpandedFeatures::from_vec(v).unwrap()
    }

    #[test]
    fn batch_projection_of_two_unit_vectors() {
        let data = vec![unit(5, 0), unit(5, 1)];
        let Projection::Shared(basis) = fit_projection(&data, 2, 1e-6, ProjectionMode::Batch).unwrap() else {
            panic!("batch mode must produce a shared basis");
        };
        let v = basis.matrix();
        // Columns must lie in span{e1, e2}.
        for j in 0..2 {
            for i in 2..5 {
                assert!(v[(i, j)].abs() < 1e-12);
            }
        }
        let det = v[(0, 0)] * v[(1, 1)] - v[(0, 1)] * v[(1, 0)];
        assert!(close(det.abs(), 1.0, 1e-12));
    }

    #[test]
    fn full_projection_is_orthonormal() {
        let data = vec![expand(&[0.1, 0.2, 0.3]).unwrap(), expand(&[0.9, 0.4, 0.2]).unwrap()];
        let Projection::Shared(basis) = fit_projection(&data, 9, 1e-6, ProjectionMode::Batch).unwrap() else {
            unreachable!()
        };
        let gram = basis.matrix().transpose().matmul(basis.matrix()).unwrap();
        assert!(gram.sub(&Matrix::identity(9)).frobenius_norm() < 1e-10);
    }

    #[test]
    fn single_sample_batch_matches_per_sample() {
        let z = expand(&[0.4, 0.1, 0.8, 0.3]).unwrap();
        let batch = fit_projection(std::slice::from_ref(&z), 3, 1e-6, ProjectionMode::Batch).unwrap();
        let per = fit_projection(std::slice::from_ref(&z), 3, 1e-6, ProjectionMode::PerSample).unwrap();
        assert_eq!(batch.apply(&z).unwrap(), per.apply(&z).unwrap());
    }

    #[test]
    fn fit_projection_errors() {
        let data = vec![unit(4, 0)];
        assert!(matches!(
            fit_projection(&data, 5, 1e-6, ProjectionMode::Batch),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            fit_projection(&data, 5, 1e-6, ProjectionMode::PerSample),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            fit_projection(&[], 2, 1e-6, ProjectionMode::Batch),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn project_examples() {
        let basis = ProjectionBasis::new(Matrix::identity(5).leading_columns(3)).unwrap();
        let z = ExpandedFeatures::from_vec(vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(project(&z, &basis).unwrap(), vec![1.0, 2.0, 3.0]);
        let zero = ExpandedFeatures::from_vec(vec![0.0; 5]).unwrap();
        assert_eq!(project(&zero, &basis).unwrap(), vec![0.0; 3]);
        let short = ExpandedFeatures::from_vec(vec![0.0; 4]).unwrap();
        assert!(matches!(project(&short, &basis), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn scaled_top_eigenvector_projects_to_first_axis() {
        let z = expand(&[0.3, 0.6, 0.2]).unwrap();
        let eig = eigendecompose(build_spd(&z, 1e-6).unwrap().matrix()).unwrap();
        let basis = eig.top(4).unwrap();
        let c = 2.5;
        let scaled = ExpandedFeatures::from_vec(eig.eigenvectors.column(0).iter().map(|v| c * v).collect()).unwrap();
        let p = project(&scaled, &basis).unwrap();
        assert!(close(p[0], c, 1e-12));
        assert!(p[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_state(&[3.0, 4.0]).unwrap(), vec![0.6, 0.8]);
        assert!(matches!(
            normalize_state(&[0.0; 7]),
            Err(Error::DegenerateState { sample: None, .. })
        ));
        let u = [0.6, 0.0, -0.8];
        let out = normalize_state(&u).unwrap();
        for (a, b) in out.iter().zip(u) {
            assert!(close(*a, b, 1e-15));
        }
    }

    #[test]
    fn pipeline_encodes_unit_state() {
        let inputs: Vec<Vec<f64>> = (0..20)
            .map(|i| (0..7).map(|j| ((i * 7 + j) as f64 * 0.37).sin().abs()).collect())
            .collect();
        let pipe = SpdPipeline::fit(&inputs, 7, 7, DEFAULT_EPSILON, ProjectionMode::Batch).unwrap();
        assert_eq!(pipe.k(), 7);
        let state = pipe.encode(&inputs[3]).unwrap();
        assert!(close(linalg::norm2(&state.normalized), 1.0, 1e-12));
        assert!(matches!(pipe.encode(&[0.0; 7]), Err(Error::DegenerateState { .. })));
        assert!(matches!(pipe.encode(&[0.0; 6]), Err(Error::DimensionMismatch { .. })));
    }
}
