//! Column-major dense matrices with BLAS products and LAPACK-backed
//! factorizations.

use cblas_sys::{cblas_dgemm, cblas_dgemv, CBLAS_LAYOUT, CBLAS_TRANSPOSE};
use ndarray::{Array2, ShapeBuilder};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ColMat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

fn trans_flag(t: bool) -> CBLAS_TRANSPOSE {
    if t {
        CBLAS_TRANSPOSE::CblasTrans
    } else {
        CBLAS_TRANSPOSE::CblasNoTrans
    }
}

fn blas_int(n: usize) -> i32 {
    i32::try_from(n).expect("matrix dimension exceeds BLAS integer range")
}

impl ColMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length");
        Self { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.data[j * rows + i] = f(i, j);
            }
        }
        m
    }

    /// Columns are the given vectors, all of length `rows`.
    pub fn from_columns(rows: usize, columns: &[&[f64]]) -> Self {
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            assert_eq!(c.len(), rows, "column length");
            data.extend_from_slice(c);
        }
        Self {
            rows,
            cols: columns.len(),
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] = v;
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn transpose(&self) -> ColMat {
        ColMat::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn to_ndarray(&self) -> Array2<f64> {
        Array2::from_shape_vec((self.rows, self.cols).f(), self.data.clone())
            .expect("shape matches data")
    }

    pub fn into_ndarray(self) -> Array2<f64> {
        Array2::from_shape_vec((self.rows, self.cols).f(), self.data).expect("shape matches data")
    }

    pub fn from_ndarray(a: Array2<f64>) -> Self {
        let (rows, cols) = a.dim();
        if a.t().is_standard_layout() {
            let (data, offset) = a.into_raw_vec_and_offset();
            if offset.unwrap_or(0) == 0 && data.len() == rows * cols {
                return Self { rows, cols, data };
            }
            let a = Array2::from_shape_vec((rows, cols).f(), data).expect("owned F-order data");
            return Self::from_fn(rows, cols, |i, j| a[[i, j]]);
        }
        Self::from_fn(rows, cols, |i, j| a[[i, j]])
    }

    /// `y = alpha * op(A) x + beta * y`.
    pub fn gemv(&self, trans: bool, alpha: f64, x: &[f64], beta: f64, y: &mut [f64]) {
        let (xr, yr) = if trans {
            (self.rows, self.cols)
        } else {
            (self.cols, self.rows)
        };
        assert_eq!(x.len(), xr, "gemv input length");
        assert_eq!(y.len(), yr, "gemv output length");
        if self.rows == 0 || self.cols == 0 {
            y.iter_mut().for_each(|v| *v *= beta);
            return;
        }
        // SAFETY: dimensions and leading dimension match the buffers checked above.
        unsafe {
            cblas_dgemv(
                CBLAS_LAYOUT::CblasColMajor,
                trans_flag(trans),
                blas_int(self.rows),
                blas_int(self.cols),
                alpha,
                self.data.as_ptr(),
                blas_int(self.rows.max(1)),
                x.as_ptr(),
                1,
                beta,
                y.as_mut_ptr(),
                1,
            );
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.gemv(false, 1.0, x, 0.0, &mut y);
        y
    }

    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.cols];
        self.gemv(true, 1.0, x, 0.0, &mut y);
        y
    }

    /// `op(A) op(B)`.
    pub fn matmul(&self, trans_a: bool, b: &ColMat, trans_b: bool) -> ColMat {
        let (m, k) = if trans_a {
            (self.cols, self.rows)
        } else {
            (self.rows, self.cols)
        };
        let (kb, n) = if trans_b {
            (b.cols, b.rows)
        } else {
            (b.rows, b.cols)
        };
        assert_eq!(k, kb, "inner dimensions");
        let mut c = ColMat::zeros(m, n);
        if m == 0 || n == 0 || k == 0 {
            return c;
        }
        // SAFETY: shapes were checked; all buffers are contiguous column-major.
        unsafe {
            cblas_dgemm(
                CBLAS_LAYOUT::CblasColMajor,
                trans_flag(trans_a),
                trans_flag(trans_b),
                blas_int(m),
                blas_int(n),
                blas_int(k),
                1.0,
                self.data.as_ptr(),
                blas_int(self.rows.max(1)),
                b.data.as_ptr(),
                blas_int(b.rows.max(1)),
                0.0,
                c.data.as_mut_ptr(),
                blas_int(m.max(1)),
            );
        }
        c
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Scales row `i` by `s[i]`.
    pub fn scale_rows(&mut self, s: &[f64]) {
        assert_eq!(s.len(), self.rows, "row scale length");
        for j in 0..self.cols {
            for (v, w) in self.col_mut(j).iter_mut().zip(s) {
                *v *= w;
            }
        }
    }
}

/// Thin SVD `A = U diag(s) V^T` with singular values in decreasing order.
pub struct Svd {
    pub u: ColMat,
    pub s: Vec<f64>,
    pub v: ColMat,
}

pub fn thin_svd(a: ColMat) -> Result<Svd> {
    use ndarray_linalg::{JobSvd, SVDDCInto};
    let (rows, cols) = (a.rows, a.cols);
    let (u, s, vt) = a
        .into_ndarray()
        .svddc_into(JobSvd::Some)
        .map_err(|e| Error::Numerical(format!("SVD of {rows}x{cols} block failed: {e}")))?;
    let u = ColMat::from_ndarray(u.expect("U requested"));
    let v = ColMat::from_ndarray(vt.expect("V^T requested").reversed_axes());
    Ok(Svd {
        u,
        s: s.to_vec(),
        v,
    })
}

/// Thin QR `A = Q R` of a matrix with at least as many rows as columns.
pub fn thin_qr(a: ColMat) -> Result<(ColMat, ColMat)> {
    use ndarray_linalg::QRInto;
    let (rows, cols) = (a.rows, a.cols);
    let (q, r) = a
        .into_ndarray()
        .qr_into()
        .map_err(|e| Error::Numerical(format!("QR of {rows}x{cols} block failed: {e}")))?;
    Ok((ColMat::from_ndarray(q), ColMat::from_ndarray(r)))
}

/// Singular values only, in decreasing order.
pub fn singular_values(a: ColMat) -> Result<Vec<f64>> {
    use ndarray_linalg::{JobSvd, SVDDCInto};
    let (rows, cols) = (a.rows, a.cols);
    let (_, s, _) = a
        .into_ndarray()
        .svddc_into(JobSvd::None)
        .map_err(|e| Error::Numerical(format!("SVD of {rows}x{cols} block failed: {e}")))?;
    Ok(s.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(rows: usize, cols: usize) -> ColMat {
        ColMat::from_fn(rows, cols, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0 + 0.1 * i as f64)
    }

    #[test]
    fn products_match_loops() {
        let a = sample(7, 4);
        let x = [1.0, -2.0, 0.5, 3.0];
        let y = a.matvec(&x);
        for i in 0..7 {
            let expect: f64 = (0..4).map(|j| a.get(i, j) * x[j]).sum();
            assert!((y[i] - expect).abs() < 1e-12);
        }
        let z = [1.0, 0.0, -1.0, 2.0, 0.5, 0.0, 1.0];
        let yt = a.matvec_t(&z);
        for j in 0..4 {
            let expect: f64 = (0..7).map(|i| a.get(i, j) * z[i]).sum();
            assert!((yt[j] - expect).abs() < 1e-12);
        }
        let b = sample(4, 3);
        let c = a.matmul(false, &b, false);
        let ct = b.matmul(true, &a, true);
        for i in 0..7 {
            for j in 0..3 {
                let expect: f64 = (0..4).map(|k| a.get(i, k) * b.get(k, j)).sum();
                assert!((c.get(i, j) - expect).abs() < 1e-12);
                assert!((ct.get(j, i) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ndarray_roundtrip() {
        let a = sample(5, 3);
        assert_eq!(ColMat::from_ndarray(a.to_ndarray()), a);
        let c_order = Array2::from_shape_fn((5, 3), |(i, j)| a.get(i, j));
        assert_eq!(ColMat::from_ndarray(c_order), a);
    }

    #[test]
    fn qr_and_svd_reconstruct() {
        let a = sample(9, 4);
        let (q, r) = thin_qr(a.clone()).unwrap();
        assert_eq!((q.rows(), q.cols(), r.rows(), r.cols()), (9, 4, 4, 4));
        let qr = q.matmul(false, &r, false);
        for i in 0..9 {
            for j in 0..4 {
                assert!((qr.get(i, j) - a.get(i, j)).abs() < 1e-12);
            }
        }
        let svd = thin_svd(a.clone()).unwrap();
        assert!(svd.s.windows(2).all(|w| w[0] >= w[1]));
        let mut us = svd.u.clone();
        for j in 0..us.cols() {
            let s = svd.s[j];
            us.col_mut(j).iter_mut().for_each(|v| *v *= s);
        }
        let rec = us.matmul(false, &svd.v, true);
        for i in 0..9 {
            for j in 0..4 {
                assert!((rec.get(i, j) - a.get(i, j)).abs() < 1e-11);
            }
        }
        let s = singular_values(a).unwrap();
        for (x, y) in s.iter().zip(&svd.s) {
            assert!((x - y).abs() < 1e-12 * svd.s[0]);
        }
    }
}
