//! `fit` settings from flags and an optional `key = value` config file.
//! Flags win over the file.

use std::path::{Path, PathBuf};

use gkpca::config::EcgSource;
use gkpca::{DataSource, KernelSpec, RunConfig};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSettings {
    pub data: Option<String>,
    pub images: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    /// CSV file, or ECG sample files as `path` or `path=label`.
    pub inputs: Option<Vec<String>>,
    pub digits: Option<Vec<u8>>,
    pub per_class: Option<usize>,
    pub has_labels: Option<bool>,
    pub has_header: Option<bool>,
    pub column: Option<usize>,
    pub kernel: Option<String>,
    pub sigma2: Option<f64>,
    pub sigma: Option<f64>,
    pub degree: Option<u32>,
    pub offset: Option<f64>,
    pub d: Option<usize>,
    pub out: Option<PathBuf>,
}

pub fn parse_file(text: &str) -> Result<FitSettings, CliError> {
    toml::from_str(text).map_err(|e| CliError::Usage(format!("config file: {}", e.message())))
}

pub fn read_file(path: &Path) -> Result<FitSettings, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("config file {}: {e}", path.display())))?;
    parse_file(&text)
}

impl FitSettings {
    /// Fills every unset field from `base`.
    pub fn or(self, base: FitSettings) -> FitSettings {
        FitSettings {
            data: self.data.or(base.data),
            images: self.images.or(base.images),
            labels: self.labels.or(base.labels),
            inputs: self.inputs.or(base.inputs),
            digits: self.digits.or(base.digits),
            per_class: self.per_class.or(base.per_class),
            has_labels: self.has_labels.or(base.has_labels),
            has_header: self.has_header.or(base.has_header),
            column: self.column.or(base.column),
            kernel: self.kernel.or(base.kernel),
            sigma2: self.sigma2.or(base.sigma2),
            sigma: self.sigma.or(base.sigma),
            degree: self.degree.or(base.degree),
            offset: self.offset.or(base.offset),
            d: self.d.or(base.d),
            out: self.out.or(base.out),
        }
    }

    pub fn out_path(&self) -> Result<&Path, CliError> {
        self.out.as_deref().ok_or_else(|| CliError::Usage("--out is required".into()))
    }

    pub fn run_config(&self) -> Result<RunConfig, CliError> {
        let usage = |m: &str| CliError::Usage(m.to_string());
        let d = self.d.ok_or_else(|| usage("--d is required"))?;
        if d == 0 {
            return Err(usage("--d must be at least 1"));
        }
        let inputs = self.inputs.clone().unwrap_or_default();
        let data = match self.data.as_deref() {
            Some("mnist") => DataSource::Mnist {
                images: self.images.clone(),
                labels: self.labels.clone(),
                digits: self.digits.clone(),
                per_class: self.per_class,
            },
            Some("csv") => {
                let [path] = inputs.as_slice() else {
                    return Err(usage("--data csv takes exactly one --input"));
                };
                DataSource::Csv {
                    path: path.into(),
                    has_labels: self.has_labels.unwrap_or(false),
                    has_header: self.has_header.unwrap_or(false),
                }
            }
            Some("ecg") => {
                if inputs.is_empty() {
                    return Err(usage("--data ecg needs at least one --input"));
                }
                let records = inputs
                    .iter()
                    .map(|s| ecg_input(s, self.column.unwrap_or(0)))
                    .collect();
                DataSource::Ecg { records }
            }
            Some(other) => return Err(CliError::Usage(format!("unknown data source {other:?}"))),
            None => return Err(usage("--data is required (mnist, csv or ecg)")),
        };
        let kernel = self.kernel_spec()?;
        Ok(RunConfig { data, kernel, d })
    }

    fn kernel_spec(&self) -> Result<KernelSpec, CliError> {
        let need = |v: Option<f64>, flag: &str| {
            v.ok_or_else(|| CliError::Usage(format!("{flag} is required for this kernel")))
        };
        let spec = match self.kernel.as_deref().unwrap_or("gaussian") {
            "gaussian" => KernelSpec::Gaussian {
                sigma2: need(self.sigma2, "--sigma2")?,
            },
            "laplace" => KernelSpec::Laplace {
                sigma: need(self.sigma, "--sigma")?,
            },
            "polynomial" => KernelSpec::Polynomial {
                degree: self.degree.unwrap_or(2),
                offset: self.offset.unwrap_or(1.0),
            },
            other => return Err(CliError::Usage(format!("unknown kernel {other:?}"))),
        };
        spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(spec)
    }
}

fn ecg_input(s: &str, column: usize) -> EcgSource {
    // a trailing `=<integer>` is a label; any other `=` belongs to the path
    let (path, label) = match s.rsplit_once('=').and_then(|(p, l)| Some((p, l.parse().ok()?))) {
        Some((p, l)) => (p, Some(l)),
        None => (s, None),
    };
    EcgSource {
        path: path.into(),
        label,
        column,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let file = parse_file(
            "data = \"mnist\"\ndigits = [0, 1]\nper_class = 200\nkernel = \"gaussian\"\nsigma2 = 50\nd = 10\nout = \"m.gkpca\"\n",
        )
        .unwrap();
        let flags = FitSettings {
            d: Some(4),
            ..FitSettings::default()
        };
        let s = flags.or(file);
        let cfg = s.run_config().unwrap();
        assert_eq!(cfg.d, 4);
        assert_eq!(cfg.kernel, KernelSpec::Gaussian { sigma2: 50.0 });
        assert!(matches!(cfg.data, DataSource::Mnist { per_class: Some(200), .. }));
        assert_eq!(s.out_path().unwrap(), Path::new("m.gkpca"));
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(matches!(parse_file("sigma3 = 1\n"), Err(CliError::Usage(_))));
    }

    #[test]
    fn ecg_labels() {
        let s = FitSettings {
            data: Some("ecg".into()),
            inputs: Some(vec!["a.txt=0".into(), "b.txt".into(), "dir=x/c.txt=1".into(), "e=f.txt".into()]),
            sigma2: Some(10.0),
            d: Some(10),
            ..FitSettings::default()
        };
        let DataSource::Ecg { records } = s.run_config().unwrap().data else { panic!() };
        assert_eq!(records[0].label, Some(0));
        assert_eq!(records[1].label, None);
        assert_eq!(records[2].path, PathBuf::from("dir=x/c.txt"));
        assert_eq!(records[3].path, PathBuf::from("e=f.txt"));
    }

    #[test]
    fn missing_pieces() {
        let base = FitSettings {
            data: Some("csv".into()),
            inputs: Some(vec!["x.csv".into()]),
            d: Some(2),
            ..FitSettings::default()
        };
        assert!(base.run_config().is_err(), "gaussian needs sigma2");
        let lap = FitSettings {
            kernel: Some("laplace".into()),
            sigma: Some(2.0),
            ..base.clone()
        };
        assert_eq!(lap.run_config().unwrap().kernel, KernelSpec::Laplace { sigma: 2.0 });
        let zero = FitSettings {
            d: Some(0),
            sigma2: Some(1.0),
            ..base
        };
        assert!(zero.run_config().is_err());
    }
}
