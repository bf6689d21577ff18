//! Small dense helpers shared by the designs and metrics.

use crate::{CMat, C64};

/// Relative threshold below which a singular value or eigenvalue counts as zero.
pub const RANK_TOL: f64 = 1e-12;

pub fn trace(a: &CMat) -> C64 {
    a.diagonal().iter().sum()
}

/// `||A||_F^2`, i.e. `tr(A A^H)`.
pub fn frobenius_sq(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Squared Euclidean norm of row `k`.
pub fn row_norm_sq(a: &CMat, k: usize) -> f64 {
    a.row(k).iter().map(|z| z.norm_sqr()).sum()
}

pub fn is_finite(a: &CMat) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// `Q diag(d) Q^H` for a square unitary `Q`.
pub fn conjugate_diag(q: &CMat, d: &[f64]) -> CMat {
    let mut scaled = q.clone();
    for (j, &dj) in d.iter().enumerate() {
        scaled.column_mut(j).scale_mut(dj);
    }
    &scaled * q.adjoint()
}

/// Moore-Penrose pseudo-inverse; singular values below `RANK_TOL * s_max` are dropped.
pub fn pinv(a: &CMat) -> CMat {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let s_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = RANK_TOL * s_max;
    let mut out = CMat::zeros(a.ncols(), a.nrows());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff {
            let vi = v_t.row(i).adjoint();
            let ui = u.column(i).adjoint();
            out += (vi * ui).scale(1.0 / s);
        }
    }
    out
}

/// Largest spectral-norm deviation of `A^H A` from the identity.
pub fn unitarity_defect(a: &CMat) -> f64 {
    let g = a.adjoint() * a - CMat::identity(a.ncols(), a.ncols());
    g.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}
