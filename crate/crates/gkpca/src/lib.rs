//! Generative kernel PCA.
//!
//! Fits a kernel PCA latent space over a dataset, decodes arbitrary latent
//! points back to input space with a kernel-smoother pre-image, and scores
//! novelty as the reconstruction error in feature space.
//!
//! ```no_run
//! use gkpca::{fit, preimage, KernelSpec, DataMatrix};
//!
//! let x = DataMatrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 2.0], vec![3.0, 1.0]]).unwrap();
//! let model = fit(&x, KernelSpec::gaussian(2.0).unwrap(), 2).unwrap();
//! let h = model.hidden_unit(0).unwrap();
//! let sample = preimage(&model, &h, 1).unwrap();
//! assert_eq!(sample.x_hat, x.row(0));
//! ```

pub mod archive;
pub mod config;
pub mod data;
pub mod eigen;
mod error;
pub mod generator;
pub mod ingest;
pub mod kernels;
pub mod kpca;
pub mod manifest;
pub mod novelty;

pub use config::{DataSource, RunConfig};
pub use data::{DataKind, DataMatrix, Dataset};
pub use error::{Error, Result};
pub use generator::{
    preimage, similarity, traverse, GeneratedSample, LatentRef, Neighbor, PathMode, PathSpec,
    SimilarityVector, TraversalPath,
};
pub use kernels::{center, center_vector, gram, CenteringStats, GramMatrix, KernelSpec};
pub use kpca::{fit, KpcaModel, LatentPoint};
pub use novelty::{novelty_report, novelty_report_training, novelty_score, NoveltyReport};
