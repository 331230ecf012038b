//! Binary model archive.
//!
//! Little-endian layout, in order:
//!
//! ```text
//! magic      b"GKPCA1"
//! kernel     u8 tag (0 gaussian, 1 laplace, 2 polynomial), u32 degree, f64 a, f64 b
//! kind       u8 tag (0 image, 1 signal, 2 tabular), u64 width, u64 height, f64 rate
//! shape      u64 N, u64 d_in, u64 d
//! data       N·d_in f64, row-major
//! labels     u8 present, then N i64 if present
//! lambdas    d f64
//! hidden     d·N f64, one component per row
//! centering  N f64 row means, f64 grand mean
//! ```
//!
//! The centered Gram matrix is rebuilt from the data on load; the stored
//! centering statistics must match the rebuilt ones bit for bit.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::kernels::{center, gram};
use crate::{DataKind, DataMatrix, Error, KernelSpec, KpcaModel, Result};

pub const MAGIC: &[u8; 6] = b"GKPCA1";

pub fn to_bytes(model: &KpcaModel) -> Vec<u8> {
    let n = model.n();
    let d = model.d();
    let mut out = Vec::with_capacity(64 + 8 * (n * model.input_dim() + d * n + n + d + 1));
    out.extend_from_slice(MAGIC);

    let (tag, degree, a, b) = match model.spec {
        KernelSpec::Gaussian { sigma2 } => (0u8, 0u32, sigma2, 0.0),
        KernelSpec::Laplace { sigma } => (1, 0, sigma, 0.0),
        KernelSpec::Polynomial { degree, offset } => (2, degree, 0.0, offset),
    };
    out.push(tag);
    out.extend_from_slice(&degree.to_le_bytes());
    put_f64(&mut out, a);
    put_f64(&mut out, b);

    let (tag, w, h, rate) = match model.kind {
        DataKind::ImageGrid { width, height } => (0u8, width as u64, height as u64, 0.0),
        DataKind::Signal { sample_rate_hz } => (1, 0, 0, sample_rate_hz),
        DataKind::Tabular => (2, 0, 0, 0.0),
    };
    out.push(tag);
    put_u64(&mut out, w);
    put_u64(&mut out, h);
    put_f64(&mut out, rate);

    put_u64(&mut out, n as u64);
    put_u64(&mut out, model.input_dim() as u64);
    put_u64(&mut out, d as u64);
    model.x.as_slice().iter().for_each(|&v| put_f64(&mut out, v));

    match &model.labels {
        Some(labels) => {
            out.push(1);
            labels.iter().for_each(|l| out.extend_from_slice(&l.to_le_bytes()));
        }
        None => out.push(0),
    }
    model.lambdas.iter().for_each(|&v| put_f64(&mut out, v));
    for l in 0..d {
        model.h.row(l).iter().for_each(|&v| put_f64(&mut out, v));
    }
    model.stats.row_means.iter().for_each(|&v| put_f64(&mut out, v));
    put_f64(&mut out, model.stats.grand_mean);
    out
}

fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() < len {
            return Err(Error::format(format!("archive truncated in {what}")));
        }
        let (head, tail) = self.buf.split_at(len);
        self.buf = tail;
        Ok(head)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn usize(&mut self, what: &str) -> Result<usize> {
        usize::try_from(self.u64(what)?).map_err(|_| Error::format(format!("{what} too large")))
    }

    /// Reads `count` f64 values, checking the length before allocating.
    fn f64s(&mut self, count: usize, what: &str) -> Result<Vec<f64>> {
        let bytes = count
            .checked_mul(8)
            .ok_or_else(|| Error::format(format!("{what} too large")))?;
        let raw = self.take(bytes, what)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<KpcaModel> {
    let mut r = Reader { buf: bytes };
    if r.take(MAGIC.len(), "magic")? != MAGIC {
        return Err(Error::format("not a GKPCA1 model archive"));
    }

    let tag = r.u8("kernel")?;
    let degree = r.u32("kernel")?;
    let a = r.f64("kernel")?;
    let b = r.f64("kernel")?;
    let spec = match tag {
        0 => KernelSpec::Gaussian { sigma2: a },
        1 => KernelSpec::Laplace { sigma: a },
        2 => KernelSpec::Polynomial { degree, offset: b },
        t => return Err(Error::format(format!("unknown kernel tag {t}"))),
    };
    spec.validate().map_err(|e| Error::format(e.to_string()))?;

    let tag = r.u8("data kind")?;
    let w = r.usize("data kind")?;
    let h = r.usize("data kind")?;
    let rate = r.f64("data kind")?;
    let kind = match tag {
        0 => DataKind::ImageGrid { width: w, height: h },
        1 if rate.is_finite() && rate > 0.0 => DataKind::Signal { sample_rate_hz: rate },
        2 => DataKind::Tabular,
        t => return Err(Error::format(format!("bad data kind tag {t}"))),
    };

    let n = r.usize("shape")?;
    let dim = r.usize("shape")?;
    let d = r.usize("shape")?;
    if n < 2 || dim == 0 || d < 1 || d > n {
        return Err(Error::format(format!("inconsistent shape N={n}, d={d}")));
    }
    if let DataKind::ImageGrid { width, height } = kind {
        if width.checked_mul(height) != Some(dim) {
            return Err(Error::format("image grid does not match row width"));
        }
    }
    let count = n
        .checked_mul(dim)
        .ok_or_else(|| Error::format("data too large"))?;
    let values = r.f64s(count, "data")?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::format("data contains non-finite values"));
    }
    let x = DataMatrix::new(n, dim, values)?;

    let labels = match r.u8("labels")? {
        0 => None,
        1 => {
            let raw = r.take(n.checked_mul(8).ok_or_else(|| Error::format("labels too large"))?, "labels")?;
            Some(
                raw.chunks_exact(8)
                    .map(|c| i64::from_le_bytes(c.try_into().unwrap()))
                    .collect(),
            )
        }
        f => return Err(Error::format(format!("bad label flag {f}"))),
    };

    let lambdas = r.f64s(d, "eigenvalues")?;
    if lambdas.iter().any(|v| !v.is_finite() || *v < 0.0) || lambdas.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::format("eigenvalues must be finite, nonnegative and nonincreasing"));
    }
    let hidden = r.f64s(
        d.checked_mul(n).ok_or_else(|| Error::format("hidden units too large"))?,
        "hidden units",
    )?;
    if hidden.iter().any(|v| !v.is_finite()) {
        return Err(Error::format("hidden units contain non-finite values"));
    }
    let row_means = r.f64s(n, "centering")?;
    let grand_mean = r.f64("centering")?;
    if !r.buf.is_empty() {
        return Err(Error::format(format!("{} trailing bytes", r.buf.len())));
    }

    let (k_centered, stats) = center(&gram(&spec, &x)?);
    let same = |a: f64, b: f64| a.to_bits() == b.to_bits();
    if !same(stats.grand_mean, grand_mean)
        || !stats.row_means.iter().zip(&row_means).all(|(a, b)| same(*a, *b))
    {
        return Err(Error::format("centering statistics do not match the stored data"));
    }

    Ok(KpcaModel {
        x,
        spec,
        k_centered,
        stats,
        h: DMatrix::from_row_slice(d, n, &hidden),
        lambdas,
        kind,
        labels,
    })
}

pub fn save(model: &KpcaModel, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_bytes(model))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<KpcaModel> {
    from_bytes(&fs::read(path)?)
}
