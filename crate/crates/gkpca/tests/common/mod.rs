//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use gkpca::DataMatrix;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Explicit feature map of `(x·y + c)²` on two-dimensional inputs.
pub fn quad_features(x: &[f64], c: f64) -> DVector<f64> {
    let s = std::f64::consts::SQRT_2;
    DVector::from_vec(vec![
        x[0] * x[0],
        x[1] * x[1],
        s * x[0] * x[1],
        (2.0 * c).sqrt() * x[0],
        (2.0 * c).sqrt() * x[1],
        c,
    ])
}

/// Plain PCA on explicitly mapped, mean-centred features.
pub struct FeatureSpacePca {
    pub mean: DVector<f64>,
    /// Unit principal axes, descending variance, as columns.
    pub axes: Vec<DVector<f64>>,
    pub lambdas: Vec<f64>,
}

impl FeatureSpacePca {
    pub fn fit(x: &DataMatrix, c: f64) -> Self {
        let feats: Vec<DVector<f64>> = x.iter_rows().map(|r| quad_features(r, c)).collect();
        let n = feats.len() as f64;
        let mean = feats.iter().fold(DVector::zeros(6), |a, f| a + f) / n;
        let mut scatter = DMatrix::zeros(6, 6);
        for f in &feats {
            let d = f - &mean;
            scatter += &d * d.transpose();
        }
        let eig = SymmetricEigen::new(scatter);
        let mut order: Vec<usize> = (0..6).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let axes = order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
        let lambdas = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        Self { mean, axes, lambdas }
    }

    pub fn centred(&self, z: &[f64], c: f64) -> DVector<f64> {
        quad_features(z, c) - &self.mean
    }

    /// `‖φ̃(z) − P_d φ̃(z)‖²` with `P_d` the projector on the leading `d` axes.
    pub fn residual(&self, z: &[f64], c: f64, d: usize) -> f64 {
        let f = self.centred(z, c);
        let mut proj = DVector::zeros(6);
        for u in &self.axes[..d] {
            proj += u * u.dot(&f);
        }
        (f - proj).norm_squared()
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_data(rng: &mut ChaCha8Rng, n: usize, dim: usize, spread: f64) -> DataMatrix {
    let values = (0..n * dim).map(|_| rng.gen_range(-spread..spread)).collect();
    DataMatrix::new(n, dim, values).unwrap()
}

/// Points on a coarse jittered grid, far apart relative to a unit bandwidth.
pub fn separated_data(rng: &mut ChaCha8Rng, n: usize) -> DataMatrix {
    let side = (n as f64).sqrt().ceil() as usize;
    let values = (0..n)
        .flat_map(|i| {
            let (gx, gy) = ((i % side) as f64, (i / side) as f64);
            [4.0 * gx + rng.gen_range(-0.5..0.5), 4.0 * gy + rng.gen_range(-0.5..0.5)]
        })
        .collect();
    DataMatrix::new(n, 2, values).unwrap()
}
