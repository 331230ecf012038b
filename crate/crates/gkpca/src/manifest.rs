//! Traversal manifests: the JSON record of which latent points a traversal
//! visited. Written by the CLI next to every traversal, exported by the
//! explorer UI, and replayable through the CLI.

use serde::{Deserialize, Serialize};

use crate::{DataKind, Error, LatentPoint, Result};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraversalManifest {
    pub version: u32,
    /// Number of training points of the model the path was recorded on.
    pub n: usize,
    pub d: usize,
    #[serde(rename = "S")]
    pub s: usize,
    pub kind: DataKind,
    pub steps: Vec<ManifestStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestStep {
    pub step: usize,
    pub h_star: LatentPoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
}

impl TraversalManifest {
    pub fn parse(text: &str) -> Result<Self> {
        let m: TraversalManifest =
            serde_json::from_str(text).map_err(|e| Error::format(format!("manifest: {e}")))?;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != MANIFEST_VERSION {
            return Err(Error::format(format!(
                "unsupported manifest version {}",
                self.version
            )));
        }
        if self.steps.len() < 2 {
            return Err(Error::format("manifest needs at least 2 steps"));
        }
        for (i, st) in self.steps.iter().enumerate() {
            if st.step != i {
                return Err(Error::format(format!("step {i} is numbered {}", st.step)));
            }
            if st.h_star.dim() != self.d {
                return Err(Error::format(format!(
                    "step {i} has {} coordinates, expected {}",
                    st.h_star.dim(),
                    self.d
                )));
            }
            if st.h_star.coords.iter().any(|v| !v.is_finite()) {
                return Err(Error::format(format!("step {i} has non-finite coordinates")));
            }
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<LatentPoint> {
        self.steps.iter().map(|s| s.h_star.clone()).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}
