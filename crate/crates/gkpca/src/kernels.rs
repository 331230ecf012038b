//! Kernel evaluation, Gram matrices and double centering.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{DataMatrix, Error, Result};

/// A positive-definite kernel `k(x, y)`.
///
/// The Gaussian variant stores the squared bandwidth `σ²` and evaluates
/// `exp(-‖x-y‖² / (2σ²))`. The Laplace variant stores `σ` itself and evaluates
/// `exp(-‖x-y‖ / σ)`. The polynomial kernel `(x·y + c)^p` has a finite
/// explicit feature map, which makes it useful for checking feature-space
/// identities by brute force.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelSpec {
    Gaussian { sigma2: f64 },
    Laplace { sigma: f64 },
    Polynomial { degree: u32, offset: f64 },
}

impl KernelSpec {
    pub fn gaussian(sigma2: f64) -> Result<Self> {
        let k = KernelSpec::Gaussian { sigma2 };
        k.validate()?;
        Ok(k)
    }

    pub fn laplace(sigma: f64) -> Result<Self> {
        let k = KernelSpec::Laplace { sigma };
        k.validate()?;
        Ok(k)
    }

    pub fn polynomial(degree: u32, offset: f64) -> Result<Self> {
        let k = KernelSpec::Polynomial { degree, offset };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            KernelSpec::Gaussian { sigma2 } => sigma2.is_finite() && sigma2 > 0.0,
            KernelSpec::Laplace { sigma } => sigma.is_finite() && sigma > 0.0,
            KernelSpec::Polynomial { degree, offset } => {
                degree >= 1 && offset.is_finite() && offset >= 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::input(format!("invalid kernel parameters: {self:?}")))
        }
    }

    /// True for kernels with `k(x, x) = 1` for every `x`.
    pub fn is_normalized(&self) -> bool {
        !matches!(self, KernelSpec::Polynomial { .. })
    }

    /// Evaluates the kernel without checking dimensions.
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelSpec::Gaussian { sigma2 } => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2 / (2.0 * sigma2)).exp()
            }
            KernelSpec::Laplace { sigma } => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2.sqrt() / sigma).exp()
            }
            KernelSpec::Polynomial { degree, offset } => {
                let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
                (dot + offset).powi(degree as i32)
            }
        }
    }

    /// Kernel values `k(z, x_i)` against every row of `x`.
    pub(crate) fn eval_row(&self, z: &[f64], x: &DataMatrix) -> Vec<f64> {
        x.iter_rows().map(|r| self.eval_unchecked(z, r)).collect()
    }
}

pub fn eval_kernel(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::input(format!(
            "dimension mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    Ok(spec.eval_unchecked(x, y))
}

/// A symmetric `N × N` kernel matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub values: DMatrix<f64>,
    pub centered: bool,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.values.nrows()
    }
}

/// Row means of the uncentered Gram matrix and their mean, kept so that
/// out-of-sample kernel vectors can be centered consistently.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteringStats {
    pub row_means: Vec<f64>,
    pub grand_mean: f64,
}

/// Uncentered Gram matrix. Only the upper triangle is evaluated; the lower
/// triangle is a mirror, so the result is exactly symmetric.
pub fn gram(spec: &KernelSpec, x: &DataMatrix) -> Result<GramMatrix> {
    spec.validate()?;
    let n = x.rows();
    if n < 2 {
        return Err(Error::input(format!("need at least 2 points, got {n}")));
    }
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let xj = x.row(j);
            (0..=j).map(|i| spec.eval_unchecked(x.row(i), xj)).collect()
        })
        .collect();
    let mut values = DMatrix::zeros(n, n);
    for (j, col) in upper.into_iter().enumerate() {
        for (i, v) in col.into_iter().enumerate() {
            values[(i, j)] = v;
            values[(j, i)] = v;
        }
    }
    Ok(GramMatrix {
        values,
        centered: false,
    })
}

/// Double centering `K̃ = K − 1K − K1 + 1K1` where `1` is the matrix of `1/N`.
/// The result is exactly symmetric, like the input.
pub fn center(k: &GramMatrix) -> (GramMatrix, CenteringStats) {
    let n = k.n();
    let nf = n as f64;
    let row_means: Vec<f64> = (0..n)
        .map(|i| k.values.row(i).iter().sum::<f64>() / nf)
        .collect();
    let grand_mean = row_means.iter().sum::<f64>() / nf;
    let mut values = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            let v = k.values[(i, j)] - row_means[i] - row_means[j] + grand_mean;
            values[(i, j)] = v;
            values[(j, i)] = v;
        }
    }
    (
        GramMatrix {
            values,
            centered: true,
        },
        CenteringStats {
            row_means,
            grand_mean,
        },
    )
}

/// Centers a kernel vector `k(z, x_i)` of an out-of-sample point `z`.
///
/// Returns the centered vector `⟨φ̃(z), φ̃(x_i)⟩` and the centered self
/// similarity `‖φ̃(z)‖²`.
pub fn center_vector(stats: &CenteringStats, k_vec: &[f64], self_k: f64) -> Result<(Vec<f64>, f64)> {
    let n = stats.row_means.len();
    if k_vec.len() != n {
        return Err(Error::input(format!(
            "kernel vector has length {}, expected {n}",
            k_vec.len()
        )));
    }
    let mean = k_vec.iter().sum::<f64>() / n as f64;
    let centered = k_vec
        .iter()
        .zip(&stats.row_means)
        .map(|(k, r)| k - mean - r + stats.grand_mean)
        .collect();
    Ok((centered, self_k - 2.0 * mean + stats.grand_mean))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pts(rows: &[&[f64]]) -> DataMatrix {
        DataMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn gaussian_values() {
        let k = KernelSpec::gaussian(2.0).unwrap();
        assert_eq!(eval_kernel(&k, &[0.0, 0.0], &[0.0, 0.0]).unwrap(), 1.0);
        // ‖x−y‖² = 4, 2σ² = 4
        assert_abs_diff_eq!(
            eval_kernel(&k, &[0.0, 0.0], &[0.0, 2.0]).unwrap(),
            (-1.0f64).exp(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            eval_kernel(&k, &[0.0, 0.0], &[0.0, 2.0]).unwrap(),
            0.367879,
            epsilon = 1e-6
        );
    }

    #[test]
    fn laplace_value() {
        let k = KernelSpec::laplace(1.0).unwrap();
        assert_abs_diff_eq!(eval_kernel(&k, &[0.0], &[3.0]).unwrap(), 0.049787, epsilon = 1e-6);
    }

    #[test]
    fn dimension_mismatch() {
        let k = KernelSpec::gaussian(1.0).unwrap();
        assert!(matches!(eval_kernel(&k, &[0.0], &[0.0, 1.0]), Err(Error::Input(_))));
    }

    #[test]
    fn bad_bandwidth() {
        assert!(KernelSpec::gaussian(0.0).is_err());
        assert!(KernelSpec::gaussian(f64::NAN).is_err());
        assert!(KernelSpec::laplace(-1.0).is_err());
        assert!(KernelSpec::polynomial(0, 1.0).is_err());
    }

    #[test]
    fn gram_small_cases() {
        let k = KernelSpec::gaussian(2.0).unwrap();
        let g = gram(&k, &pts(&[&[1.0, 1.0], &[1.0, 1.0]])).unwrap();
        assert_eq!(g.values, DMatrix::from_element(2, 2, 1.0));

        let g = gram(&k, &pts(&[&[0.0, 0.0], &[0.0, 2.0]])).unwrap();
        let e = (-1.0f64).exp();
        assert_eq!(g.values[(0, 0)], 1.0);
        assert_abs_diff_eq!(g.values[(0, 1)], e, epsilon = 1e-15);
        assert_eq!(g.values, g.values.transpose());

        assert!(gram(&k, &pts(&[&[0.0]])).is_err());
    }

    #[test]
    fn center_hand_example() {
        let k = GramMatrix {
            values: DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]),
            centered: false,
        };
        let (kc, stats) = center(&k);
        let want = DMatrix::from_row_slice(2, 2, &[0.25, -0.25, -0.25, 0.25]);
        assert_abs_diff_eq!(kc.values, want, epsilon = 1e-15);
        assert_eq!(stats.row_means, vec![0.75, 0.75]);
        assert_eq!(stats.grand_mean, 0.75);
    }

    #[test]
    fn constant_matrix_centers_to_zero() {
        let k = GramMatrix {
            values: DMatrix::from_element(4, 4, 0.3),
            centered: false,
        };
        let (kc, _) = center(&k);
        assert!(kc.values.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn constant_training_set_centers_vector_to_zero() {
        let k = KernelSpec::gaussian(1.0).unwrap();
        let x = pts(&[&[2.0], &[2.0], &[2.0]]);
        let (_, stats) = center(&gram(&k, &x).unwrap());
        let kv = k.eval_row(&[2.0], &x);
        let (c, s) = center_vector(&stats, &kv, 1.0).unwrap();
        assert!(c.iter().all(|v| v.abs() < 1e-15));
        assert_abs_diff_eq!(s, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn center_vector_length_mismatch() {
        let stats = CenteringStats {
            row_means: vec![0.5; 3],
            grand_mean: 0.5,
        };
        assert!(center_vector(&stats, &[1.0, 2.0], 1.0).is_err());
    }

    /// Explicit feature map of `(x·y + 1)²` for two-dimensional inputs.
    fn quad_features(x: &[f64]) -> [f64; 6] {
        let s = std::f64::consts::SQRT_2;
        [
            x[0] * x[0],
            x[1] * x[1],
            s * x[0] * x[1],
            s * x[0],
            s * x[1],
            1.0,
        ]
    }

    #[test]
    fn center_vector_matches_feature_space() {
        let k = KernelSpec::polynomial(2, 1.0).unwrap();
        let x = pts(&[&[0.5, -1.0], &[1.5, 0.25], &[-0.75, 2.0]]);
        let z = [0.3, 0.9];
        let (_, stats) = center(&gram(&k, &x).unwrap());
        let (c, s) = center_vector(&stats, &k.eval_row(&z, &x), k.eval_unchecked(&z, &z)).unwrap();

        let feats: Vec<[f64; 6]> = x.iter_rows().map(quad_features).collect();
        let mut mean = [0.0; 6];
        for f in &feats {
            for (m, v) in mean.iter_mut().zip(f) {
                *m += v / 3.0;
            }
        }
        let fz: Vec<f64> = quad_features(&z).iter().zip(&mean).map(|(a, m)| a - m).collect();
        for (i, f) in feats.iter().enumerate() {
            let fi: Vec<f64> = f.iter().zip(&mean).map(|(a, m)| a - m).collect();
            let dot: f64 = fz.iter().zip(&fi).map(|(a, b)| a * b).sum();
            assert_abs_diff_eq!(c[i], dot, epsilon = 1e-12);
        }
        let self_dot: f64 = fz.iter().map(|a| a * a).sum();
        assert_abs_diff_eq!(s, self_dot, epsilon = 1e-12);
    }
}
