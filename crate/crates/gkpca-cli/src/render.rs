//! Sample files written by `traverse`.

use std::fmt::Write;

use gkpca::DataKind;

/// Returns the file extension and contents for one decoded sample.
/// Images become binary PGM, everything else CSV with round-trip floats.
pub fn render(kind: DataKind, x: &[f64]) -> (&'static str, Vec<u8>) {
    match kind {
        DataKind::ImageGrid { width, height } => ("pgm", pgm(width, height, x)),
        DataKind::Signal { sample_rate_hz } => {
            let mut s = String::from("t,value\n");
            for (i, v) in x.iter().enumerate() {
                let _ = writeln!(s, "{},{v}", i as f64 / sample_rate_hz);
            }
            ("csv", s.into_bytes())
        }
        DataKind::Tabular => {
            let row: Vec<String> = x.iter().map(f64::to_string).collect();
            ("csv", format!("{}\n", row.join(",")).into_bytes())
        }
    }
}

/// Pixels are intensities in [0, 1]; values outside are clipped.
pub fn pgm(width: usize, height: usize, x: &[f64]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(x.iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_header_and_clipping() {
        let b = pgm(2, 1, &[-0.5, 1.5]);
        assert_eq!(b, b"P5\n2 1\n255\n\x00\xff");
        assert_eq!(pgm(1, 1, &[0.5])[11], 128);
    }

    #[test]
    fn csv_forms() {
        let (ext, b) = render(DataKind::Tabular, &[0.1, -2.0]);
        assert_eq!((ext, b.as_slice()), ("csv", &b"0.1,-2\n"[..]));
        let (_, b) = render(DataKind::Signal { sample_rate_hz: 2.0 }, &[1.0, 3.0]);
        assert_eq!(b, b"t,value\n0,1\n0.5,3\n");
    }
}
