//! Fitting the kernel PCA latent space.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::eigen::symmetric_eigen;
use crate::kernels::{center, center_vector, gram, CenteringStats, GramMatrix, KernelSpec};
use crate::{DataKind, DataMatrix, Dataset, Error, Result};

/// Components with `λ ≤ NEAR_ZERO_RATIO · λ₁` are kept but treated as null
/// directions by projection and novelty scoring.
pub const NEAR_ZERO_RATIO: f64 = 1e-10;

/// Negative eigenvalues down to `-CLAMP_RATIO · λ₁` are rounding noise.
pub const CLAMP_RATIO: f64 = 1e-8;

/// A point in hidden-unit coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatentPoint {
    pub coords: Vec<f64>,
}

impl LatentPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            coords: vec![0.0; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

impl From<Vec<f64>> for LatentPoint {
    fn from(coords: Vec<f64>) -> Self {
        Self { coords }
    }
}

/// A fitted kernel PCA model. Immutable once built.
#[derive(Debug, Clone)]
pub struct KpcaModel {
    pub(crate) x: DataMatrix,
    pub(crate) spec: KernelSpec,
    pub(crate) k_centered: GramMatrix,
    pub(crate) stats: CenteringStats,
    /// `d × N`; row `l` is the `l`-th unit eigenvector of `K̃`.
    pub(crate) h: DMatrix<f64>,
    pub(crate) lambdas: Vec<f64>,
    pub(crate) kind: DataKind,
    pub(crate) labels: Option<Vec<i64>>,
}

/// Fits `d` components on the rows of `x`.
pub fn fit(x: &DataMatrix, spec: KernelSpec, d: usize) -> Result<KpcaModel> {
    let n = x.rows();
    if d < 1 || d > n {
        return Err(Error::input(format!(
            "component count d={d} outside 1..={n}"
        )));
    }
    if !x.is_finite() {
        return Err(Error::input("data contains non-finite values"));
    }
    let k = gram(&spec, x)?;
    let (k_centered, stats) = center(&k);
    let eig = symmetric_eigen(&k_centered.values)?;

    let lambda1 = eig.values[0].max(0.0);
    let max_entry = k_centered.values.amax();
    let tol = (CLAMP_RATIO * lambda1).max(f64::EPSILON * n as f64 * max_entry);
    let mut lambdas = Vec::with_capacity(d);
    for (l, &v) in eig.values.iter().take(d).enumerate() {
        if v < -tol {
            return Err(Error::numeric(format!(
                "eigenvalue {l} is {v:e}; centered Gram matrix is not positive semidefinite"
            )));
        }
        lambdas.push(v.max(0.0));
    }

    let mut h = DMatrix::zeros(d, n);
    for l in 0..d {
        let col = eig.vectors.column(l);
        let pivot = col
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |best, (i, v)| if v.abs() > best.1.abs() { (i, *v) } else { best });
        let sign = if pivot.1 < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            h[(l, i)] = sign * col[i];
        }
    }

    Ok(KpcaModel {
        x: x.clone(),
        spec,
        k_centered,
        stats,
        h,
        lambdas,
        kind: DataKind::Tabular,
        labels: None,
    })
}

/// Fits a model and carries over the dataset's labels and render kind.
pub fn fit_dataset(ds: &Dataset, spec: KernelSpec, d: usize) -> Result<KpcaModel> {
    let mut model = fit(&ds.x, spec, d)?;
    model.kind = ds.kind;
    model.labels = ds.labels.clone();
    Ok(model)
}

impl KpcaModel {
    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn d(&self) -> usize {
        self.lambdas.len()
    }

    pub fn input_dim(&self) -> usize {
        self.x.cols()
    }

    pub fn data(&self) -> &DataMatrix {
        &self.x
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn centered_gram(&self) -> &GramMatrix {
        &self.k_centered
    }

    pub fn centering(&self) -> &CenteringStats {
        &self.stats
    }

    /// Hidden-unit matrix `H` (`d × N`).
    pub fn hidden_units(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn kind(&self) -> DataKind {
        self.kind
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    /// Whether component `l` carries variance (`λ_l > 1e-10·λ₁`).
    pub fn is_active(&self, l: usize) -> bool {
        let l1 = self.lambdas[0];
        l1 > 0.0 && self.lambdas[l] > NEAR_ZERO_RATIO * l1
    }

    /// Hidden unit `h_i`: column `i` of `H`.
    pub fn hidden_unit(&self, i: usize) -> Result<LatentPoint> {
        if i >= self.n() {
            return Err(Error::Index {
                index: i,
                len: self.n(),
            });
        }
        Ok(LatentPoint::new(self.h.column(i).iter().copied().collect()))
    }

    /// Centered kernel vector `k̃(z, x_i)` and `‖φ̃(z)‖²` for an arbitrary input.
    pub fn centered_kernel_vector(&self, z: &[f64]) -> Result<(Vec<f64>, f64)> {
        if z.len() != self.input_dim() {
            return Err(Error::input(format!(
                "point has dimension {}, model expects {}",
                z.len(),
                self.input_dim()
            )));
        }
        let kv = self.spec.eval_row(z, &self.x);
        center_vector(&self.stats, &kv, self.spec.eval_unchecked(z, z))
    }

    /// Out-of-sample projection onto the hidden-unit scale:
    /// `h_l(z) = (1/λ_l) Σ_i H_{l,i} k̃(z, x_i)`. Training points map onto
    /// their stored hidden units. Near-zero components project to 0.
    pub fn project(&self, z: &[f64]) -> Result<LatentPoint> {
        let (kc, _) = self.centered_kernel_vector(z)?;
        Ok(self.project_centered(&kc))
    }

    pub(crate) fn project_centered(&self, kc: &[f64]) -> LatentPoint {
        let coords = (0..self.d())
            .map(|l| {
                if !self.is_active(l) {
                    return 0.0;
                }
                let dot: f64 = self.h.row(l).iter().zip(kc).map(|(a, b)| a * b).sum();
                dot / self.lambdas[l]
            })
            .collect();
        LatentPoint::new(coords)
    }

    pub(crate) fn check_latent(&self, h: &LatentPoint) -> Result<()> {
        if h.dim() != self.d() {
            return Err(Error::input(format!(
                "latent point has {} coordinates, model has d={}",
                h.dim(),
                self.d()
            )));
        }
        if h.coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("latent point has non-finite coordinates"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_point_hand_eigendecomposition() {
        // K = [[1, .5], [.5, 1]] needs exp(-‖Δ‖²/(2σ²)) = 0.5
        let sigma2 = 1.0 / (2.0 * 2f64.ln());
        let x = DataMatrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let m = fit(&x, KernelSpec::gaussian(sigma2).unwrap(), 1).unwrap();
        assert_abs_diff_eq!(m.eigenvalues()[0], 0.5, epsilon = 1e-12);
        let r = 1.0 / 2f64.sqrt();
        assert_abs_diff_eq!(m.hidden_units()[(0, 0)].abs(), r, epsilon = 1e-12);
        assert_abs_diff_eq!(m.hidden_units()[(0, 1)], -m.hidden_units()[(0, 0)], epsilon = 1e-12);
        let h0 = m.hidden_unit(0).unwrap();
        let h1 = m.hidden_unit(1).unwrap();
        assert_abs_diff_eq!(h0.coords[0], -h1.coords[0], epsilon = 1e-12);
        assert!(matches!(m.hidden_unit(2), Err(Error::Index { index: 2, len: 2 })));
    }

    #[test]
    fn rejects_bad_d_and_nan() {
        let x = DataMatrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let k = KernelSpec::gaussian(1.0).unwrap();
        assert!(matches!(fit(&x, k, 0), Err(Error::Input(_))));
        assert!(matches!(fit(&x, k, 4), Err(Error::Input(_))));
        let bad = DataMatrix::from_rows(&[vec![0.0], vec![f64::NAN]]).unwrap();
        assert!(matches!(fit(&bad, k, 1), Err(Error::Input(_))));
    }

    #[test]
    fn sign_convention_largest_entry_positive() {
        let x = DataMatrix::from_rows(&[vec![0.0], vec![0.3], vec![1.1], vec![2.5], vec![2.6]]).unwrap();
        let m = fit(&x, KernelSpec::gaussian(0.5).unwrap(), 3).unwrap();
        for l in 0..3 {
            let row = m.hidden_units().row(l);
            let max = row.iter().cloned().fold(f64::MIN, f64::max);
            let min = row.iter().cloned().fold(f64::MAX, f64::min);
            assert!(max >= -min, "component {l} has dominant negative entry");
        }
    }

    #[test]
    fn constant_dataset_projects_to_zero() {
        let x = DataMatrix::from_rows(&vec![vec![1.0, 1.0]; 4]).unwrap();
        let m = fit(&x, KernelSpec::gaussian(1.0).unwrap(), 2).unwrap();
        assert!(m.eigenvalues().iter().all(|&l| l == 0.0));
        let p = m.project(&[1.0, 1.0]).unwrap();
        assert_eq!(p.coords, vec![0.0, 0.0]);
    }

    #[test]
    fn project_dimension_mismatch() {
        let x = DataMatrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let m = fit(&x, KernelSpec::gaussian(1.0).unwrap(), 1).unwrap();
        assert!(m.project(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn hidden_unit_norms_sum_to_d() {
        let x = DataMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.5], vec![2.0, -1.0], vec![0.4, 0.4]])
            .unwrap();
        let m = fit(&x, KernelSpec::laplace(1.0).unwrap(), 3).unwrap();
        let total: f64 = (0..4)
            .map(|i| m.hidden_unit(i).unwrap().coords.iter().map(|v| v * v).sum::<f64>())
            .sum();
        assert_abs_diff_eq!(total, 3.0, epsilon = 1e-12);
    }
}
