//! Spectral decompositions and Haar-moment identities.
//!
//! For `A = Q diag(v) Q^H` with `Q` Haar distributed on the K×K unitary group:
//!
//! * `E{(A)_{k,k}^2} = ((Σv)^2 + Σv^2) / (K(K+1))`            ([`mu`])
//! * `E{|(A)_{k,j}|^2} = Σv^2/((K-1)(K+1)) - (Σv)^2/((K-1)K(K+1))`, `k != j` ([`nu`])
//!
//! Eigenvalues and squared singular values are always returned in descending order.

use nalgebra::SymmetricEigen;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{is_finite, RANK_TOL};
use crate::model::complex_gaussian;
use crate::{CMat, C64};

/// `Ĥ = U [diag(sqrt θ) | 0] V^H` for an N×M backward channel, `N <= M`.
#[derive(Debug, Clone)]
pub struct BackwardSvd {
    /// N×N unitary.
    pub u: CMat,
    /// Squared singular values, descending, length N.
    pub theta: Vec<f64>,
    /// M×M unitary.
    pub v: CMat,
}

/// `X X^H = Q diag(λ) Q^H`.
#[derive(Debug, Clone)]
pub struct GramEig {
    pub q: CMat,
    /// Descending, non-negative.
    pub lambda: Vec<f64>,
}

fn descending_order(vals: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    idx
}

/// Extends the orthonormal columns of `basis` (rows×c) to a rows×rows unitary.
fn complete_unitary(basis: CMat) -> CMat {
    let rows = basis.nrows();
    let mut cols: Vec<nalgebra::DVector<C64>> = basis.column_iter().map(|c| c.into_owned()).collect();
    let mut e = 0;
    while cols.len() < rows && e < rows {
        let mut cand = nalgebra::DVector::<C64>::zeros(rows);
        cand[e] = C64::new(1.0, 0.0);
        // two passes of Gram-Schmidt
        for _ in 0..2 {
            for c in &cols {
                let proj = c.dotc(&cand);
                cand -= c * proj;
            }
        }
        let norm = cand.norm();
        if norm > 1e-6 {
            cols.push(cand / C64::new(norm, 0.0));
        }
        e += 1;
    }
    CMat::from_columns(&cols)
}

/// SVD of the estimated backward channel.
pub fn svd_backward(h_hat: &CMat) -> Result<BackwardSvd> {
    let (n, m) = h_hat.shape();
    if n > m {
        return Err(Error::Dimension(format!(
            "backward channel must satisfy N <= M, got {n}x{m}"
        )));
    }
    if !is_finite(h_hat) {
        return Err(Error::Numeric("backward channel has non-finite entries".into()));
    }
    let svd = h_hat.clone().svd(true, true);
    let u_thin = svd.u.ok_or_else(|| Error::Numeric("SVD did not return U".into()))?;
    let v_t = svd.v_t.ok_or_else(|| Error::Numeric("SVD did not return V".into()))?;
    let s: Vec<f64> = svd.singular_values.iter().copied().collect();
    let order = descending_order(&s);
    let u = CMat::from_columns(&order.iter().map(|&i| u_thin.column(i)).collect::<Vec<_>>());
    let v_thin = CMat::from_columns(&order.iter().map(|&i| v_t.row(i).adjoint()).collect::<Vec<_>>());
    let theta = order.iter().map(|&i| s[i] * s[i]).collect();
    Ok(BackwardSvd {
        u,
        theta,
        v: complete_unitary(v_thin),
    })
}

/// Hermitian eigendecomposition of `X X^H`.
pub fn eig_gram(x: &CMat) -> Result<GramEig> {
    if !is_finite(x) {
        return Err(Error::Numeric("matrix has non-finite entries".into()));
    }
    let gram = x * x.adjoint();
    let eig = SymmetricEigen::new(gram);
    let raw: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let scale = raw.iter().cloned().fold(1.0, f64::max);
    let order = descending_order(&raw);
    let mut lambda = Vec::with_capacity(raw.len());
    for &i in &order {
        let l = raw[i];
        if l < -1e-10 * scale {
            return Err(Error::Numeric(format!("Gram matrix has negative eigenvalue {l}")));
        }
        lambda.push(l.max(0.0));
    }
    let q = CMat::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>());
    Ok(GramEig { q, lambda })
}

impl GramEig {
    /// `Q diag(1/(λ+α)) Q^H`, failing when `λ+α` is numerically zero.
    pub fn regularized_inverse(&self, alpha: f64) -> Result<CMat> {
        let top = self.lambda.first().copied().unwrap_or(0.0) + alpha;
        let mut d = Vec::with_capacity(self.lambda.len());
        for &l in &self.lambda {
            let x = l + alpha;
            if x.is_nan() || x <= RANK_TOL * top || top <= 0.0 {
                return Err(Error::Design(format!(
                    "regularized Gram matrix is rank deficient (eigenvalue {l}, alpha {alpha})"
                )));
            }
            d.push(1.0 / x);
        }
        Ok(crate::linalg::conjugate_diag(&self.q, &d))
    }
}

/// Expected squared diagonal entry of `Q diag(v) Q^H` over Haar `Q`.
pub fn mu(vals: &[f64]) -> Result<f64> {
    if vals.is_empty() {
        return Err(Error::Domain("mu needs at least one value".into()));
    }
    let k = vals.len() as f64;
    let s: f64 = vals.iter().sum();
    let s2: f64 = vals.iter().map(|v| v * v).sum();
    Ok((s * s + s2) / (k * (k + 1.0)))
}

/// Expected squared off-diagonal magnitude of `Q diag(v) Q^H` over Haar `Q`.
pub fn nu(vals: &[f64]) -> Result<f64> {
    if vals.len() < 2 {
        return Err(Error::Domain("nu needs at least two values".into()));
    }
    let k = vals.len() as f64;
    let s: f64 = vals.iter().sum();
    let s2: f64 = vals.iter().map(|v| v * v).sum();
    Ok(s2 / ((k - 1.0) * (k + 1.0)) - s * s / ((k - 1.0) * k * (k + 1.0)))
}

/// Large-K maximiser `α = C/D` of [`RationalSinr::eval`].
pub fn rational_sinr_maximizer(c: f64, d: f64) -> Result<f64> {
    if d.is_nan() || d <= 0.0 {
        return Err(Error::Domain(format!("D must be > 0, got {d}")));
    }
    if c.is_nan() || c < 0.0 {
        return Err(Error::Domain(format!("C must be >= 0, got {c}")));
    }
    Ok(c / d)
}

/// Rational SINR shape shared by the RZF designs:
///
/// `(A S1^2 + B S3) / (C S2 + D S3 + E S1^2)` with `S1 = Σ λ/(λ+α)`,
/// `S2 = Σ λ/(λ+α)^2`, `S3 = Σ λ^2/(λ+α)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RationalSinr {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

impl RationalSinr {
    pub fn eval(&self, lambda: &[f64], alpha: f64) -> f64 {
        let (mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0);
        for &l in lambda {
            let den = l + alpha;
            s1 += l / den;
            s2 += l / (den * den);
            s3 += l * l / (den * den);
        }
        (self.a * s1 * s1 + self.b * s3) / (self.c * s2 + self.d * s3 + self.e * s1 * s1)
    }

    pub fn maximizer(&self) -> Result<f64> {
        rational_sinr_maximizer(self.c, self.d)
    }
}

/// Haar-distributed K×K unitary: QR of a complex Ginibre matrix with the
/// diagonal phases of R moved into Q.
pub fn haar_unitary<R: Rng + ?Sized>(k: usize, rng: &mut R) -> CMat {
    let z = complex_gaussian(k, k, rng);
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..k {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..k {
            q[(i, j)] *= phase;
        }
    }
    q
}
