//! Dense symmetric eigensolver.
//!
//! Householder reduction to tridiagonal form followed by the implicit QL
//! algorithm with accumulated rotations (the EISPACK `tred2`/`tql2` pair).
//! Storage is a flat column-major buffer so the inner loops walk contiguous
//! memory.

use nalgebra::DMatrix;

use crate::{Error, Result};

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Eigenpairs of a symmetric matrix, sorted by descending eigenvalue.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// Column `l` is the unit eigenvector for `values[l]`.
    pub vectors: DMatrix<f64>,
}

struct ColMajor {
    n: usize,
    a: Vec<f64>,
}

impl ColMajor {
    #[inline(always)]
    fn get(&self, row: usize, col: usize) -> f64 {
        self.a[col * self.n + row]
    }

    #[inline(always)]
    fn set(&mut self, row: usize, col: usize, v: f64) {
        self.a[col * self.n + row] = v;
    }

    #[inline(always)]
    fn col(&self, col: usize) -> &[f64] {
        &self.a[col * self.n..(col + 1) * self.n]
    }
}

/// Computes all eigenpairs of the symmetric matrix `m`. Only the lower
/// triangle is read.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<SymmetricEigen> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::input(format!(
            "expected a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("matrix has non-finite entries"));
    }
    let mut v = ColMajor {
        n,
        a: m.as_slice().to_vec(),
    };
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e);
    ql_implicit(&mut v, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].total_cmp(&d[i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v.get(r, order[c]));
    Ok(SymmetricEigen { values, vectors })
}

fn tridiagonalize(v: &mut ColMajor, d: &mut [f64], e: &mut [f64]) {
    let n = v.n;
    for j in 0..n {
        d[j] = v.get(n - 1, j);
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in &d[..i] {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v.get(i - 1, j);
                v.set(i, j, 0.0);
                v.set(j, i, 0.0);
            }
        } else {
            for dk in &mut d[..i] {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in &mut e[..i] {
                *ej = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v.set(j, i, f);
                g = e[j] + v.get(j, j) * f;
                for k in j + 1..i {
                    let vkj = v.get(k, j);
                    g += vkj * d[k];
                    e[k] += vkj * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                let col = &mut v.a[j * n..(j + 1) * n];
                for k in j..i {
                    col[k] -= f * e[k] + g * d[k];
                }
                d[j] = v.get(i - 1, j);
                v.set(i, j, 0.0);
            }
        }
        d[i] = h;
    }

    // accumulate the Householder reflections
    for i in 0..n - 1 {
        let vii = v.get(i, i);
        v.set(n - 1, i, vii);
        v.set(i, i, 1.0);
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v.get(k, i + 1) / h;
            }
            for j in 0..=i {
                let g: f64 = v.col(i + 1)[..=i]
                    .iter()
                    .zip(&v.col(j)[..=i])
                    .map(|(a, b)| a * b)
                    .sum();
                let col = &mut v.a[j * n..j * n + i + 1];
                for (k, c) in col.iter_mut().enumerate() {
                    *c -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v.set(k, i + 1, 0.0);
        }
    }
    for j in 0..n {
        d[j] = v.get(n - 1, j);
        v.set(n - 1, j, 0.0);
    }
    v.set(n - 1, n - 1, 1.0);
    e[0] = 0.0;
}

fn ql_implicit(v: &mut ColMajor, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = v.n;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        // e[n-1] == 0 terminates the scan
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_SWEEPS_PER_EIGENVALUE {
                    return Err(Error::numeric(format!(
                        "QL iteration did not converge for eigenvalue {l}"
                    )));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in &mut d[l + 2..n] {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    let (lo, hi) = v.a.split_at_mut((i + 1) * n);
                    let col_i = &mut lo[i * n..];
                    let col_i1 = &mut hi[..n];
                    for (a, b) in col_i.iter_mut().zip(col_i1.iter_mut()) {
                        let t = *b;
                        *b = s * *a + c * t;
                        *a = c * *a - s * t;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn one_by_one() {
        let m = DMatrix::from_element(1, 1, 3.5);
        let eig = symmetric_eigen(&m).unwrap();
        assert_eq!(eig.values, vec![3.5]);
        assert_eq!(eig.vectors[(0, 0)].abs(), 1.0);
    }

    #[test]
    fn two_by_two_hand() {
        let m = DMatrix::from_row_slice(2, 2, &[0.25, -0.25, -0.25, 0.25]);
        let eig = symmetric_eigen(&m).unwrap();
        assert_abs_diff_eq!(eig.values[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(eig.values[1], 0.0, epsilon = 1e-15);
        let h = 1.0 / 2f64.sqrt();
        assert_abs_diff_eq!(eig.vectors[(0, 0)].abs(), h, epsilon = 1e-15);
        assert_abs_diff_eq!(eig.vectors[(0, 0)], -eig.vectors[(1, 0)], epsilon = 1e-15);
    }

    #[test]
    fn diagonal_sorted_descending() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 5.0, -2.0, 3.0]));
        let eig = symmetric_eigen(&m).unwrap();
        assert_eq!(eig.values, vec![5.0, 3.0, 1.0, -2.0]);
    }

    #[test]
    fn zero_matrix() {
        let eig = symmetric_eigen(&DMatrix::zeros(4, 4)).unwrap();
        assert!(eig.values.iter().all(|&v| v == 0.0));
        let vtv = eig.vectors.transpose() * &eig.vectors;
        assert_abs_diff_eq!(vtv, DMatrix::identity(4, 4), epsilon = 1e-15);
    }

    #[test]
    fn rejects_non_finite() {
        let mut m = DMatrix::identity(3, 3);
        m[(1, 1)] = f64::NAN;
        assert!(symmetric_eigen(&m).is_err());
    }

    #[test]
    fn residual_on_tridiagonal_laplacian() {
        // path-graph Laplacian has eigenvalues 2 - 2cos(kπ/n)
        let n = 12;
        let m = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                if i == 0 || i == n - 1 { 1.0 } else { 2.0 }
            } else if i.abs_diff(j) == 1 {
                -1.0
            } else {
                0.0
            }
        });
        let eig = symmetric_eigen(&m).unwrap();
        let mut want: Vec<f64> = (0..n)
            .map(|k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / n as f64).cos())
            .collect();
        want.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in eig.values.iter().zip(&want) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        let resid = &m * &eig.vectors - &eig.vectors * DMatrix::from_diagonal(&eig.values.clone().into());
        assert!(resid.amax() < 1e-12);
    }
}
