//! The MNIST fixture against eigenvalues from an independent kernel PCA run.

use std::path::PathBuf;

use gkpca::ingest::load_idx;
use gkpca::kpca::fit_dataset;
use gkpca::KernelSpec;
use serde_json::Value;

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../testdata/mnist")
}

#[test]
fn eigenvalues_match_reference_run() {
    let dir = fixture();
    let reference: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("reference.json")).unwrap()).unwrap();
    let ds = load_idx(
        dir.join("images-idx3-ubyte"),
        dir.join("labels-idx1-ubyte"),
        Some(&[0, 1]),
        Some(200),
    )
    .unwrap();
    assert_eq!(ds.len(), 400);
    let model = fit_dataset(&ds, KernelSpec::gaussian(50.0).unwrap(), 10).unwrap();
    let want: Vec<f64> = reference["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    for (l, (g, w)) in model.eigenvalues().iter().zip(&want).enumerate() {
        assert!((g - w).abs() <= 1e-8 * want[0], "component {}: {g} vs {w}", l + 1);
    }
    assert_eq!(model.labels().unwrap().iter().filter(|&&l| l == 1).count(), 200);
}
