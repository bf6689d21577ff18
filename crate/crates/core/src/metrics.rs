//! Effective channels, noise powers, SINRs and sum rate.
//!
//! The received vector splits as `y = H_eff s + n`, with
//! `H_eff = Σ_r ρ_s ρ_r Ĝ_r W_r Ĥ_r F`. The noise `n` collects the
//! estimation-error leakage of both hops and the two thermal noises; its
//! power is evaluated in expectation over the symbols, noises and error
//! directions (the `e1 e2` cross term is neglected).

use serde::Serialize;

use crate::beamformers::{BeamformerDesign, Scheme};
use crate::error::{Error, Result};
use crate::linalg::{frobenius_sq, row_norm_sq};
use crate::model::{ChannelRealization, SystemConfig};
use crate::spectra::{mu, nu};
use crate::CMat;

/// Denominators below this are treated as zero and the SINR reported as +inf.
pub const DIVERGENCE_FLOOR: f64 = 1e-300;

fn check_design(design: &BeamformerDesign, realization: &ChannelRealization, config: &SystemConfig) -> Result<()> {
    realization.check_dims(config)?;
    if design.w.len() != config.r || design.rho_r.len() != config.r {
        return Err(Error::Dimension("design relay count does not match config".into()));
    }
    if design.f.shape() != (config.m, config.k) {
        return Err(Error::Dimension(format!(
            "source precoder is {:?}, expected ({}, {})",
            design.f.shape(),
            config.m,
            config.k
        )));
    }
    if design.w.iter().any(|w| w.shape() != (config.n, config.n)) {
        return Err(Error::Dimension("relay processor must be N×N".into()));
    }
    Ok(())
}

/// `Σ_r ρ_s ρ_r Ĝ_r W_r Ĥ_r F`, K×K.
pub fn effective_channel(
    design: &BeamformerDesign,
    realization: &ChannelRealization,
    config: &SystemConfig,
) -> Result<CMat> {
    check_design(design, realization, config)?;
    let mut h_eff = CMat::zeros(config.k, config.k);
    for ((ch, w), &rho_r) in realization.relays.iter().zip(&design.w).zip(&design.rho_r) {
        h_eff += (&ch.g_hat * w * &ch.h_hat * &design.f).scale(design.rho_s * rho_r);
    }
    Ok(h_eff)
}

/// Per-user effective noise power. The expression does not depend on the
/// user index, so all entries are equal.
pub fn noise_power(
    design: &BeamformerDesign,
    realization: &ChannelRealization,
    config: &SystemConfig,
) -> Result<Vec<f64>> {
    check_design(design, realization, config)?;
    let k = config.k as f64;
    let rs2 = design.rho_s.powi(2);
    let ff = frobenius_sq(&design.f);
    let mut total = config.sigma2_sq;
    for ((ch, w), &rho_r) in realization.relays.iter().zip(&design.w).zip(&design.rho_r) {
        let rr2 = rho_r.powi(2);
        let gw = frobenius_sq(&(&ch.g_hat * w));
        let whf = frobenius_sq(&(w * &ch.h_hat * &design.f));
        let ww = frobenius_sq(w);
        total += config.e1_sq * rs2 * rr2 / k * ff * gw
            + config.e2_sq * rs2 * rr2 * whf
            + rr2 * config.sigma1_sq / k * gw
            + rr2 * config.e2_sq * config.sigma1_sq * ww;
    }
    Ok(vec![total; config.k])
}

/// `|H_kk|² / (Σ_{j≠k} |H_kj|² + noise_k)`, +inf when the denominator vanishes.
pub fn sinr_exact(h_eff: &CMat, noise: &[f64]) -> Vec<f64> {
    (0..h_eff.nrows())
        .map(|k| {
            let signal = h_eff[(k, k)].norm_sqr();
            let interference: f64 = (0..h_eff.ncols())
                .filter(|&j| j != k)
                .map(|j| h_eff[(k, j)].norm_sqr())
                .sum();
            let den = interference + noise[k];
            if den < DIVERGENCE_FLOOR {
                f64::INFINITY
            } else {
                signal / den
            }
        })
        .collect()
}

/// Single-relay SVD-RZF noise power in terms of `(θ, λ)`, averaged over the
/// forward eigenbasis.
pub fn noise_power_single_relay_closed(
    theta: &[f64],
    lambda: &[f64],
    alpha: f64,
    config: &SystemConfig,
    rho_s: f64,
    rho_r: f64,
) -> f64 {
    let k = config.k as f64;
    let (rs2, rr2) = (rho_s * rho_s, rho_r * rho_r);
    let sum_theta: f64 = theta.iter().sum();
    let s3: f64 = lambda.iter().map(|l| (l / (l + alpha)).powi(2)).sum();
    let s2: f64 = lambda.iter().map(|l| l / (l + alpha).powi(2)).sum();
    (rs2 * rr2 * config.e1_sq + rr2 * config.sigma1_sq / k) * s3
        + (rs2 * rr2 * config.e2_sq * sum_theta / k + rr2 * config.e2_sq * config.sigma1_sq) * s2
        + config.sigma2_sq
}

/// Per-user SINR of single-relay SVD-RZF predicted from `(θ, λ)` alone.
pub fn sinr_analytic_single(
    theta: &[f64],
    lambda: &[f64],
    alpha: f64,
    config: &SystemConfig,
    rho_s: f64,
    rho_r: f64,
) -> Result<Vec<f64>> {
    let a: Vec<f64> = lambda.iter().map(|l| l / (l + alpha)).collect();
    let gain = (rho_s * rho_r).powi(2);
    let desired = mu(&a)?;
    let cross = if a.len() >= 2 { nu(&a)? } else { 0.0 };
    let noise = noise_power_single_relay_closed(theta, lambda, alpha, config, rho_s, rho_r);
    let total: f64 = theta.iter().sum();
    Ok(theta
        .iter()
        .map(|&t| {
            let den = gain * (total - t) * cross + noise;
            if den < DIVERGENCE_FLOOR {
                f64::INFINITY
            } else {
                gain * t * desired / den
            }
        })
        .collect())
}

fn theta_sums(theta: &[f64], alpha: f64) -> (Vec<f64>, f64) {
    let ratio: Vec<f64> = theta.iter().map(|t| t / (t + alpha)).collect();
    let s2 = theta.iter().map(|t| t / (t + alpha).powi(2)).sum();
    (ratio, s2)
}

/// SINR of a stream after the MMSE receiver at one relay.
pub fn sinr_relay_mmse(theta: &[f64], alpha_mmse: f64, config: &SystemConfig) -> Result<f64> {
    let m = config.m as f64;
    let (ratio, s2) = theta_sums(theta, alpha_mmse);
    let num = config.ps / m * mu(&ratio)?;
    let den = config.ps * (m - 1.0) / m * nu(&ratio)? + (config.e1_sq * config.ps + config.sigma1_sq) / m * s2;
    Ok(num / den)
}

/// Destination SINR with the forward channels idealised to identities.
pub fn sinr_dest_idealized(theta: &[f64], alpha_mmse: f64, config: &SystemConfig, rho_r: f64) -> Result<f64> {
    if rho_r.is_nan() || rho_r <= 0.0 {
        return Err(Error::Domain(format!("rho_r must be > 0, got {rho_r}")));
    }
    let (m, r) = (config.m as f64, config.r as f64);
    let (ratio, s2) = theta_sums(theta, alpha_mmse);
    let num = config.ps * r * r / m * mu(&ratio)?;
    let den = r * config.ps * (m - 1.0) / m * nu(&ratio)?
        + r * (config.e1_sq * config.ps + config.sigma1_sq) / m * s2
        + config.sigma2_sq / (rho_r * rho_r);
    Ok(num / den)
}

/// Relay factor under idealised identity forward channels:
/// `ρ_r^{-2} = ((Ps/M) Σ θ²/(θ+α)² + (e1²Ps + σ1²) Σ θ/(θ+α)²) / Pr`.
pub fn rho_r_idealized(theta: &[f64], alpha_mmse: f64, config: &SystemConfig) -> f64 {
    let m = config.m as f64;
    let s3: f64 = theta.iter().map(|t| (t / (t + alpha_mmse)).powi(2)).sum();
    let s2: f64 = theta.iter().map(|t| t / (t + alpha_mmse).powi(2)).sum();
    let load = config.ps / m * s3 + (config.e1_sq * config.ps + config.sigma1_sq) * s2;
    (config.pr / load).sqrt()
}

/// Means of `x/(x+α)`, `x/(x+α)²`, `x²/(x+α)²` over backward (`θ`, `α_bc`)
/// and forward (`λ`, `α_fc`) eigenvalue samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigExpectations {
    pub e1_theta: f64,
    pub e2_theta: f64,
    pub e3_theta: f64,
    pub e1_lambda: f64,
    pub e2_lambda: f64,
    pub e3_lambda: f64,
}

fn means(samples: &[f64], alpha: f64) -> (f64, f64, f64) {
    let n = samples.len() as f64;
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for &x in samples {
        let d = x + alpha;
        a += x / d;
        b += x / (d * d);
        c += x * x / (d * d);
    }
    (a / n, b / n, c / n)
}

pub fn expectations(theta: &[f64], lambda: &[f64], alpha_mmse: f64, alpha_rzf: f64) -> Result<EigExpectations> {
    if theta.is_empty() || lambda.is_empty() {
        return Err(Error::Domain("eigenvalue samples must be non-empty".into()));
    }
    let (e1_theta, e2_theta, e3_theta) = means(theta, alpha_mmse);
    let (e1_lambda, e2_lambda, e3_lambda) = means(lambda, alpha_rzf);
    Ok(EigExpectations {
        e1_theta,
        e2_theta,
        e3_theta,
        e1_lambda,
        e2_lambda,
        e3_lambda,
    })
}

/// Common relay factor `ρ_r^{-2}` of the multi-relay design.
pub fn rho_r_inv_sq(config: &SystemConfig, exp: &EigExpectations) -> f64 {
    let m = config.m as f64;
    (config.ps * exp.e3_theta * exp.e2_lambda
        + (config.e1_sq * config.ps + config.sigma1_sq) * m * exp.e2_theta * exp.e2_lambda)
        / config.pr
}

/// Large-R limit of the per-user SINR of the MMSE-RZF design.
pub fn sinr_asymptotic(config: &SystemConfig, exp: &EigExpectations) -> f64 {
    let SystemConfig {
        ps,
        sigma1_sq: s1,
        sigma2_sq: s2,
        e1_sq,
        e2_sq,
        ..
    } = *config;
    let (m, r) = (config.m as f64, config.r as f64);
    let num = ps / m * (r * exp.e1_theta * exp.e1_lambda).powi(2);
    let den = ps * r * (m - 1.0) / (m * m) * exp.e3_theta * exp.e3_lambda
        + (e1_sq * ps + s1) * r * exp.e2_theta * exp.e3_lambda
        + ps * r * e2_sq * exp.e3_theta * exp.e2_lambda
        + e2_sq * s1 * r * m * exp.e2_theta * exp.e2_lambda
        + s2 * rho_r_inv_sq(config, exp);
    if den < DIVERGENCE_FLOOR {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Multi-relay noise power of user `k`, using that user's own row of `Ĝ_r W_r`.
pub fn noise_power_multirelay(
    design: &BeamformerDesign,
    realization: &ChannelRealization,
    config: &SystemConfig,
    k: usize,
) -> Result<f64> {
    check_design(design, realization, config)?;
    if k >= config.k {
        return Err(Error::Dimension(format!("user {k} out of range")));
    }
    let m = config.m as f64;
    let backward = config.e1_sq * config.ps + config.sigma1_sq;
    let mut total = config.sigma2_sq;
    for ((ch, w), &rho_r) in realization.relays.iter().zip(&design.w).zip(&design.rho_r) {
        let rr2 = rho_r * rho_r;
        total += backward * rr2 * row_norm_sq(&(&ch.g_hat * w), k)
            + config.ps * config.e2_sq / m * rr2 * frobenius_sq(&(w * &ch.h_hat))
            + config.e2_sq * config.sigma1_sq * rr2 * frobenius_sq(w);
    }
    Ok(total)
}

/// `0.5 Σ log2(1 + SINR_k)`; the half accounts for the two transmission slots.
pub fn sum_rate(per_user_sinr: &[f64]) -> f64 {
    0.5 * per_user_sinr.iter().map(|s| (1.0 + s).log2()).sum::<f64>()
}

#[derive(Debug, Clone, Serialize)]
pub struct SinrReport {
    pub per_user_sinr: Vec<f64>,
    pub sum_rate: f64,
    pub scheme: Scheme,
    pub config_echo: SystemConfig,
}

/// Effective channel, noise and per-user SINR of a design on one realization.
pub fn evaluate(
    design: &BeamformerDesign,
    realization: &ChannelRealization,
    config: &SystemConfig,
) -> Result<SinrReport> {
    let h_eff = effective_channel(design, realization, config)?;
    let noise = noise_power(design, realization, config)?;
    let per_user_sinr = sinr_exact(&h_eff, &noise);
    Ok(SinrReport {
        sum_rate: sum_rate(&per_user_sinr),
        per_user_sinr,
        scheme: design.scheme,
        config_echo: *config,
    })
}
