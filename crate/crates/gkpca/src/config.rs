//! Run configuration shared by the command line and the HTTP service: where
//! the data lives, which kernel to use and how many components to keep.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ingest::{ecg, idx, tabular};
use crate::kpca::fit_dataset;
use crate::{Dataset, Error, KernelSpec, KpcaModel, Result};

/// Environment variable naming the directory relative data paths resolve against.
pub const DATA_DIR_ENV: &str = "GKPCA_DATA_DIR";

/// File names tried, in order, when an MNIST source names no files.
const MNIST_IMAGES: [&str; 2] = ["train-images-idx3-ubyte", "images-idx3-ubyte"];
const MNIST_LABELS: [&str; 2] = ["train-labels-idx1-ubyte", "labels-idx1-ubyte"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Mnist {
        #[serde(default)]
        images: Option<PathBuf>,
        #[serde(default)]
        labels: Option<PathBuf>,
        #[serde(default)]
        digits: Option<Vec<u8>>,
        #[serde(default)]
        per_class: Option<usize>,
    },
    Csv {
        path: PathBuf,
        #[serde(default)]
        has_labels: bool,
        #[serde(default)]
        has_header: bool,
    },
    /// Plain-text sample streams at 360 Hz, one record per file.
    Ecg { records: Vec<EcgSource> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EcgSource {
    pub path: PathBuf,
    #[serde(default)]
    pub label: Option<i64>,
    /// Column holding the samples in comma-separated input.
    #[serde(default)]
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataSource,
    pub kernel: KernelSpec,
    pub d: usize,
}

fn resolve(root: Option<&Path>, p: &Path) -> PathBuf {
    match root {
        Some(r) if p.is_relative() => r.join(p),
        _ => p.to_path_buf(),
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn find_default(root: Option<&Path>, names: &[&str]) -> Result<PathBuf> {
    let base = root.unwrap_or(Path::new("."));
    names
        .iter()
        .map(|n| base.join(n))
        .find(|p| p.is_file())
        .ok_or_else(|| {
            Error::input(format!(
                "no {} found in {} (set {DATA_DIR_ENV} or name the file)",
                names[0],
                base.display()
            ))
        })
}

impl DataSource {
    /// Loads the dataset. Relative paths resolve against `root` when given.
    pub fn load(&self, root: Option<&Path>) -> Result<Dataset> {
        match self {
            DataSource::Mnist {
                images,
                labels,
                digits,
                per_class,
            } => {
                let images = match images {
                    Some(p) => resolve(root, p),
                    None => find_default(root, &MNIST_IMAGES)?,
                };
                let labels = match labels {
                    Some(p) => resolve(root, p),
                    None => find_default(root, &MNIST_LABELS)?,
                };
                let imgs = idx::parse_idx_images(&read(&images)?)?;
                let labs = idx::parse_idx_labels(&read(&labels)?)?;
                idx::select_idx(&imgs, &labs, digits.as_deref(), *per_class)
            }
            DataSource::Csv {
                path,
                has_labels,
                has_header,
            } => {
                let bytes = read(&resolve(root, path))?;
                tabular::parse_csv(
                    bytes.as_slice(),
                    tabular::CsvOptions {
                        has_labels: *has_labels,
                        has_header: *has_header,
                    },
                )
            }
            DataSource::Ecg { records } => {
                if records.is_empty() {
                    return Err(Error::input("ECG source lists no records"));
                }
                let recs = records
                    .iter()
                    .map(|r| {
                        let path = resolve(root, &r.path);
                        let text = String::from_utf8(read(&path)?).map_err(|_| {
                            Error::format(format!("{}: not UTF-8 text", path.display()))
                        })?;
                        Ok(ecg::EcgRecord {
                            samples: ecg::parse_samples(&text, r.column)?,
                            label: r.label,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                ecg::ecg_dataset(&recs, &ecg::EcgConfig::default())
            }
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if self.d == 0 {
            return Err(Error::input("d must be at least 1"));
        }
        Ok(())
    }

    /// Loads the data and fits a model.
    pub fn run(&self, root: Option<&Path>) -> Result<KpcaModel> {
        self.validate()?;
        let ds = self.data.load(root)?;
        fit_dataset(&ds, self.kernel, self.d)
    }
}
