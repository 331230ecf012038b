//! Loading datasets into matrix form.

pub mod ecg;
pub mod idx;
pub mod tabular;

pub use ecg::{
    butterworth_bandpass, design_bandpass, detect_r_peaks, ecg_dataset, extract_epochs,
    parse_samples, Biquad, EcgConfig, EcgRecord,
};
pub use idx::{load_idx, parse_idx_images, parse_idx_labels, IdxImages};
pub use tabular::{load_csv, parse_csv, CsvOptions};
