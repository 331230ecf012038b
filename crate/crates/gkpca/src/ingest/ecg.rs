//! ECG beat extraction: Butterworth bandpass, R-peak detection and fixed
//! windows around each beat.

use std::f64::consts::PI;

use nalgebra::Complex;
use rayon::prelude::*;

use crate::{DataKind, DataMatrix, Dataset, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcgConfig {
    pub sample_rate_hz: f64,
    pub band_low_hz: f64,
    pub band_high_hz: f64,
    pub filter_order: usize,
    pub window_seconds: f64,
    pub epoch_samples: usize,
    /// Minimum spacing between detected beats.
    pub refractory_seconds: f64,
}

impl Default for EcgConfig {
    fn default() -> Self {
        Self {
            sample_rate_hz: 360.0,
            band_low_hz: 1.0,
            band_high_hz: 60.0,
            filter_order: 5,
            window_seconds: 0.5,
            epoch_samples: 180,
            refractory_seconds: 0.2,
        }
    }
}

impl EcgConfig {
    pub fn validate(&self) -> Result<()> {
        let fs = self.sample_rate_hz;
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::input(format!("bad sample rate {fs}")));
        }
        if !(self.band_low_hz > 0.0
            && self.band_low_hz < self.band_high_hz
            && self.band_high_hz < fs / 2.0)
        {
            return Err(Error::input(format!(
                "band {}..{} Hz must satisfy 0 < low < high < {}",
                self.band_low_hz,
                self.band_high_hz,
                fs / 2.0
            )));
        }
        if self.filter_order == 0 {
            return Err(Error::input("filter order must be positive"));
        }
        if self.epoch_samples == 0
            || self.epoch_samples as f64 != (fs * self.window_seconds).round()
        {
            return Err(Error::input(format!(
                "epoch of {} samples does not match {} s at {fs} Hz",
                self.epoch_samples, self.window_seconds
            )));
        }
        if !(self.refractory_seconds >= 0.0) {
            return Err(Error::input("refractory period must be nonnegative"));
        }
        Ok(())
    }

    pub fn refractory_samples(&self) -> usize {
        (self.refractory_seconds * self.sample_rate_hz).round() as usize
    }
}

/// One second-order section `(b0 + b1 z⁻¹ + b2 z⁻²) / (1 + a1 z⁻¹ + a2 z⁻²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    /// `[a1, a2]`; the leading coefficient is 1.
    pub a: [f64; 2],
}

impl Biquad {
    pub fn response(&self, z: Complex<f64>) -> Complex<f64> {
        let zi = z.inv();
        let num = self.b[0] + zi * (self.b[1] + zi * self.b[2]);
        let den = 1.0 + zi * (self.a[0] + zi * self.a[1]);
        num / den
    }

    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1])
    }
}

/// Butterworth bandpass as cascaded second-order sections.
///
/// The analog low-pass prototype is shifted to the band edges (prewarped for
/// the bilinear transform), mapped to the z-plane, and each conjugate pole
/// pair becomes one section with zeros at `z = ±1`. The overall gain is set to
/// unity at the digital image of the geometric band centre.
pub fn design_bandpass(cfg: &EcgConfig) -> Result<Vec<Biquad>> {
    cfg.validate()?;
    let fs = cfg.sample_rate_hz;
    let order = cfg.filter_order;
    let fs2 = 2.0 * fs;
    let wl = fs2 * (PI * cfg.band_low_hz / fs).tan();
    let wh = fs2 * (PI * cfg.band_high_hz / fs).tan();
    let bw = wh - wl;
    let w0sq = wl * wh;

    let mut poles = Vec::with_capacity(2 * order);
    for k in 0..order {
        let theta = PI * (2 * k + order + 1) as f64 / (2 * order) as f64;
        let p = Complex::from_polar(1.0, theta) * (bw / 2.0);
        let disc = (p * p - w0sq).sqrt();
        for s in [p + disc, p - disc] {
            poles.push((fs2 + s) / (fs2 - s));
        }
    }

    let scale = poles.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let tol = 1e-9 * scale.max(1.0);
    let mut complex: Vec<Complex<f64>> = poles.iter().copied().filter(|p| p.im > tol).collect();
    let mut real: Vec<f64> = poles.iter().filter(|p| p.im.abs() <= tol).map(|p| p.re).collect();
    if real.len() % 2 != 0 || complex.len() * 2 + real.len() != poles.len() {
        return Err(Error::numeric("could not pair filter poles into sections"));
    }
    real.sort_by(f64::total_cmp);
    complex.sort_by(|a, b| a.norm().total_cmp(&b.norm()));

    let mut sections: Vec<(f64, Biquad)> = Vec::with_capacity(order);
    for p in &complex {
        sections.push((
            p.norm(),
            Biquad {
                b: [1.0, 0.0, -1.0],
                a: [-2.0 * p.re, p.norm_sqr()],
            },
        ));
    }
    for pair in real.chunks_exact(2) {
        sections.push((
            pair[0].abs().max(pair[1].abs()),
            Biquad {
                b: [1.0, 0.0, -1.0],
                a: [-(pair[0] + pair[1]), pair[0] * pair[1]],
            },
        ));
    }
    sections.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some((r, _)) = sections.iter().find(|(r, _)| *r >= 1.0) {
        return Err(Error::numeric(format!("unstable section, pole radius {r}")));
    }
    let mut sections: Vec<Biquad> = sections.into_iter().map(|(_, s)| s).collect();

    let centre = 2.0 * (w0sq.sqrt() / fs2).atan();
    let z = Complex::from_polar(1.0, centre);
    let gain = sections.iter().map(|s| s.response(z)).product::<Complex<f64>>().norm();
    if !(gain.is_finite() && gain > 0.0) {
        return Err(Error::numeric("filter has no gain at band centre"));
    }
    let g = gain.powf(-1.0 / sections.len() as f64);
    for s in &mut sections {
        for b in &mut s.b {
            *b *= g;
        }
    }
    Ok(sections)
}

/// Runs the cascade in transposed direct form II, starting from `state`.
fn run_cascade(sections: &[Biquad], x: &mut [f64], mut state: Vec<[f64; 2]>) {
    for (s, z) in sections.iter().zip(state.iter_mut()) {
        for v in x.iter_mut() {
            let input = *v;
            let y = s.b[0] * input + z[0];
            z[0] = s.b[1] * input - s.a[0] * y + z[1];
            z[1] = s.b[2] * input - s.a[1] * y;
            *v = y;
        }
    }
}

/// Steady-state section states for a constant unit input.
fn step_state(sections: &[Biquad]) -> Vec<[f64; 2]> {
    let mut level = 1.0;
    sections
        .iter()
        .map(|s| {
            let g = s.dc_gain();
            let z = [(g - s.b[0]) * level, (s.b[2] - s.a[1] * g) * level];
            level *= g;
            z
        })
        .collect()
}

/// Forward-backward (zero-phase) application of a section cascade, with odd
/// extension at both ends and steady-state initial conditions.
pub fn filtfilt(sections: &[Biquad], signal: &[f64]) -> Vec<f64> {
    let n = signal.len();
    if n < 2 {
        return signal.to_vec();
    }
    let edge = (3 * (2 * sections.len() + 1)).min(n - 1);
    let mut ext = Vec::with_capacity(n + 2 * edge);
    let (first, last) = (signal[0], signal[n - 1]);
    ext.extend((1..=edge).rev().map(|i| 2.0 * first - signal[i]));
    ext.extend_from_slice(signal);
    ext.extend((1..=edge).map(|i| 2.0 * last - signal[n - 1 - i]));

    let zi = step_state(sections);
    let scaled = |x0: f64| zi.iter().map(|z| [z[0] * x0, z[1] * x0]).collect();

    let x0 = ext[0];
    run_cascade(sections, &mut ext, scaled(x0));
    ext.reverse();
    let x0 = ext[0];
    run_cascade(sections, &mut ext, scaled(x0));
    ext.reverse();
    ext[edge..edge + n].to_vec()
}

pub fn butterworth_bandpass(signal: &[f64], cfg: &EcgConfig) -> Result<Vec<f64>> {
    let min_len = 6 * cfg.filter_order;
    if signal.len() <= min_len {
        return Err(Error::input(format!(
            "signal of {} samples is too short to filter (need more than {min_len})",
            signal.len()
        )));
    }
    if signal.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("signal contains non-finite samples"));
    }
    let sections = design_bandpass(cfg)?;
    Ok(filtfilt(&sections, signal))
}

/// Pan–Tompkins style R-peak detector.
///
/// Central derivative, squaring, a 150 ms centred moving-window integral, and
/// a global threshold at mean + 0.6·std of the integral. Each supra-threshold
/// run yields one candidate at the largest absolute amplitude of `filtered`
/// within the run (widened by half a window). Candidates closer than the
/// refractory period keep only the larger one.
pub fn detect_r_peaks(filtered: &[f64], cfg: &EcgConfig) -> Vec<usize> {
    let n = filtered.len();
    if n < 3 {
        return Vec::new();
    }
    let mut energy = vec![0.0; n];
    for i in 1..n - 1 {
        let d = (filtered[i + 1] - filtered[i - 1]) / 2.0;
        energy[i] = d * d;
    }

    let half = ((0.150 * cfg.sample_rate_hz).round() as usize / 2).max(1);
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + energy[i];
    }
    let integ: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect();

    let mean = integ.iter().sum::<f64>() / n as f64;
    let var = integ.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    let std = var.sqrt();
    if !(std > 0.0) {
        return Vec::new();
    }
    let thr = mean + 0.6 * std;

    let mut candidates = Vec::new();
    let mut i = 0;
    while i < n {
        if integ[i] > thr {
            let start = i;
            while i < n && integ[i] > thr {
                i += 1;
            }
            let lo = start.saturating_sub(half);
            let hi = (i + half).min(n);
            let best = (lo..hi).fold(lo, |b, k| {
                if filtered[k].abs() > filtered[b].abs() {
                    k
                } else {
                    b
                }
            });
            candidates.push(best);
        } else {
            i += 1;
        }
    }

    let refractory = cfg.refractory_samples();
    let mut peaks: Vec<usize> = Vec::new();
    for c in candidates {
        match peaks.last_mut() {
            Some(last) if c <= *last => {}
            Some(last) if c - *last < refractory => {
                if filtered[c].abs() > filtered[*last].abs() {
                    *last = c;
                }
            }
            _ => peaks.push(c),
        }
    }
    peaks
}

/// Windows of `epoch_samples` centred on each peak; peaks without a full
/// window inside the signal are dropped.
pub fn extract_epochs(filtered: &[f64], peaks: &[usize], cfg: &EcgConfig) -> Result<Dataset> {
    let len = cfg.epoch_samples;
    let before = len / 2;
    let after = len - before;
    let mut values = Vec::new();
    let mut rows = 0;
    for &p in peaks {
        if p < before || p + after > filtered.len() {
            continue;
        }
        values.extend_from_slice(&filtered[p - before..p + after]);
        rows += 1;
    }
    Dataset::new(
        DataMatrix::new(rows, len, values)?,
        None,
        DataKind::Signal {
            sample_rate_hz: cfg.sample_rate_hz,
        },
    )
}

/// Parses a plain-text sample stream: one sample per line, or comma-separated
/// lines from which `column` is taken. Blank lines and `#` comments are
/// skipped, as is a non-numeric first line (a header).
pub fn parse_samples(text: &str, column: usize) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let field = line.split(',').nth(column).map(str::trim).ok_or_else(|| {
            Error::format(format!("line {}: no column {column}", i + 1))
        })?;
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            Ok(_) => return Err(Error::format(format!("line {}: non-finite sample", i + 1))),
            Err(_) if out.is_empty() && i == 0 => {}
            Err(_) => {
                return Err(Error::format(format!(
                    "line {}: not a number: {field:?}",
                    i + 1
                )))
            }
        }
    }
    Ok(out)
}

/// One recording and the class label that applies to all of its beats.
#[derive(Debug, Clone)]
pub struct EcgRecord {
    pub samples: Vec<f64>,
    pub label: Option<i64>,
}

/// Filters each record, detects its beats and stacks all epochs.
pub fn ecg_dataset(records: &[EcgRecord], cfg: &EcgConfig) -> Result<Dataset> {
    cfg.validate()?;
    let per_record = records
        .par_iter()
        .map(|rec| {
            let filtered = butterworth_bandpass(&rec.samples, cfg)?;
            let peaks = detect_r_peaks(&filtered, cfg);
            extract_epochs(&filtered, &peaks, cfg).map(|ds| (ds, rec.label))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut rows = 0;
    for (ds, label) in &per_record {
        values.extend_from_slice(ds.x.as_slice());
        labels.extend(std::iter::repeat(label.unwrap_or(0)).take(ds.len()));
        rows += ds.len();
    }
    let any_label = records.iter().any(|r| r.label.is_some());
    Dataset::new(
        DataMatrix::new(rows, cfg.epoch_samples, values)?,
        any_label.then_some(labels),
        DataKind::Signal {
            sample_rate_hz: cfg.sample_rate_hz,
        },
    )
}
