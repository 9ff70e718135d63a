//! Truncated-SVD pseudo-inverse of a one-body block, kept in factored form.

use crate::error::{Error, Result};
use crate::system::linalg::{thin_qr, thin_svd, ColMat};

/// `B^+ = V diag(1/σ) U^T` restricted to `σ >= eps * σ_max`.
///
/// For tall blocks the SVD is taken of the triangular factor of a thin QR,
/// so `U = Q U_r` is applied as two products and never formed.
#[derive(Clone, Debug)]
pub struct PinvFactors {
    q: Option<ColMat>,
    u: ColMat,
    sigma_inv: Vec<f64>,
    v: ColMat,
    /// All singular values of the block, decreasing.
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub rows: usize,
    pub cols: usize,
}

impl PinvFactors {
    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Smallest retained singular value.
    pub fn sigma_min_retained(&self) -> f64 {
        if self.rank == 0 {
            0.0
        } else {
            self.singular_values[self.rank - 1]
        }
    }

    pub fn sigma_min(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }

    pub fn truncated(&self) -> usize {
        self.singular_values.len() - self.rank
    }

    /// Bytes held by the factors.
    pub fn memory_bytes(&self) -> usize {
        let q = self.q.as_ref().map_or(0, |q| q.rows() * q.cols());
        8 * (q + self.u.rows() * self.u.cols() + self.v.rows() * self.v.cols())
    }
}

/// Factorizes the (row-weighted) self-interaction block `b`.
pub fn one_body_factorization(b: ColMat, eps_trunc: f64) -> Result<PinvFactors> {
    if !(eps_trunc >= 0.0 && eps_trunc < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "truncation level must lie in [0, 1), got {eps_trunc}"
        )));
    }
    let (rows, cols) = (b.rows(), b.cols());
    if b.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("block has non-finite entries".into()));
    }
    let (q, core) = if rows > cols {
        let (q, r) = thin_qr(b)?;
        (Some(q), r)
    } else {
        (None, b)
    };
    let svd = thin_svd(core)?;
    let smax = svd.s.first().copied().unwrap_or(0.0);
    let rank = svd
        .s
        .iter()
        .take_while(|&&s| s > 0.0 && s >= eps_trunc * smax)
        .count();
    let keep_cols = |m: &ColMat| {
        ColMat::from_col_major(m.rows(), rank, m.as_slice()[..m.rows() * rank].to_vec())
    };
    Ok(PinvFactors {
        u: keep_cols(&svd.u),
        v: keep_cols(&svd.v),
        sigma_inv: svd.s[..rank].iter().map(|s| 1.0 / s).collect(),
        q,
        singular_values: svd.s,
        rank,
        rows,
        cols,
    })
}

/// `λ = V Σ^+ (U^T μ)`.
pub fn apply_pinv(f: &PinvFactors, mu: &[f64]) -> Vec<f64> {
    assert_eq!(mu.len(), f.rows, "pseudo-inverse input length");
    let t = match &f.q {
        Some(q) => q.matvec_t(mu),
        None => mu.to_vec(),
    };
    let mut y = f.u.matvec_t(&t);
    for (v, s) in y.iter_mut().zip(&f.sigma_inv) {
        *v *= s;
    }
    f.v.matvec(&y)
}

/// Applies the pseudo-inverse to every column of `mu`.
pub fn apply_pinv_many(f: &PinvFactors, mu: &ColMat) -> ColMat {
    assert_eq!(mu.rows(), f.rows, "pseudo-inverse input rows");
    let t = match &f.q {
        Some(q) => q.matmul(true, mu, false),
        None => mu.clone(),
    };
    let mut y = f.u.matmul(true, &t, false);
    for j in 0..y.cols() {
        for (v, s) in y.col_mut(j).iter_mut().zip(&f.sigma_inv) {
            *v *= s;
        }
    }
    f.v.matmul(false, &y, false)
}
