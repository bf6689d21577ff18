//! Source precoders, relay processors and their power-control factors.
//!
//! Every relay processor factors as `W_r = Z_r T_r`, a receive stage `T_r`
//! (N×N, applied to the backward signal) followed by a transmit stage `Z_r`
//! (N×K). The SVD family uses `T = U^H`; the MMSE family uses the MMSE
//! receiver `(Ĥ^HĤ + α_bc I)^{-1} Ĥ^H`, or the pseudo-inverse for ZF-ZF.
//! The transmit stage is the RZF precoder `Ĝ^H(ĜĜ^H + α_fc I)^{-1}`, or `Ĝ^H`
//! for the matched filter.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{frobenius_sq, identity, pinv};
use crate::metrics::{expectations, rho_r_inv_sq, EigExpectations};
use crate::model::{ChannelRealization, SystemConfig};
use crate::spectra::{eig_gram, svd_backward, GramEig};
use crate::CMat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Scheme {
    /// SVD backward stage, RZF forward stage with the optimised factor.
    RobustSvdRzf,
    /// SVD backward stage, RZF with the conventional factor `Kσ2²/Pr`.
    SvdRzf,
    SvdZf,
    SvdMf,
    ZfZf,
    /// MMSE receiver and RZF precoder with `Kσ1²/Ps` and `Kσ2²/Pr`.
    MmseRzfConventional,
    /// MMSE receiver and RZF precoder with both factors optimised.
    RobustMmseRzf,
}

impl Scheme {
    pub const ALL: [Scheme; 7] = [
        Scheme::RobustSvdRzf,
        Scheme::SvdRzf,
        Scheme::SvdZf,
        Scheme::SvdMf,
        Scheme::ZfZf,
        Scheme::MmseRzfConventional,
        Scheme::RobustMmseRzf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::RobustSvdRzf => "robust-svd-rzf",
            Scheme::SvdRzf => "svd-rzf",
            Scheme::SvdZf => "svd-zf",
            Scheme::SvdMf => "svd-mf",
            Scheme::ZfZf => "zf-zf",
            Scheme::MmseRzfConventional => "mmse-rzf",
            Scheme::RobustMmseRzf => "robust-mmse-rzf",
        }
    }

    /// SVD-based schemes only exist for a single relay.
    pub fn single_relay_only(self) -> bool {
        matches!(
            self,
            Scheme::RobustSvdRzf | Scheme::SvdRzf | Scheme::SvdZf | Scheme::SvdMf
        )
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme '{s}'")))
    }
}

impl From<Scheme> for String {
    fn from(s: Scheme) -> String {
        s.name().to_string()
    }
}

impl TryFrom<String> for Scheme {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// How the robust SVD-RZF forward factor is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaMode {
    /// Closed form using the instantaneous backward eigenvalues.
    Exact,
    /// Large-K approximation, independent of the realization.
    LargeK,
    Fixed(f64),
}

/// How the relay power-control factor `ρ_r` is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerControl {
    /// Relay load averaged over the forward-channel eigenbasis. For the SVD
    /// family this is the per-relay closed form in `(θ, λ)`; for the MMSE
    /// family one common `ρ_r` built from eigenvalue means pooled across relays.
    Averaged,
    /// Per-relay load from the instantaneous estimates, with the backward
    /// error contribution replaced by its mean `e1² ρ_s² tr(FF^H) WW^H`.
    Instantaneous,
}

impl FromStr for PowerControl {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "averaged" => Ok(PowerControl::Averaged),
            "instantaneous" => Ok(PowerControl::Instantaneous),
            _ => Err(Error::Config(format!("unknown power control '{s}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BeamformerDesign {
    pub scheme: Scheme,
    /// Source precoder, M×K.
    pub f: CMat,
    /// Relay processors `W_r`, N×N each.
    pub w: Vec<CMat>,
    pub rho_s: f64,
    pub rho_r: Vec<f64>,
    pub alpha_bc: f64,
    pub alpha_fc: f64,
    pub power_control: PowerControl,
}

impl BeamformerDesign {
    /// `tr(ρ_r²(ρ_s² W H F F^H H^H W^H + σ1² W W^H))` for relay `r` with the
    /// supplied backward channel (estimated or true).
    pub fn relay_transmit_power(&self, r: usize, h: &CMat, config: &SystemConfig) -> f64 {
        let w = &self.w[r];
        let whf = w * h * &self.f;
        self.rho_r[r].powi(2) * (self.rho_s.powi(2) * frobenius_sq(&whf) + config.sigma1_sq * frobenius_sq(w))
    }

    /// Transmit power with `H = Ĥ + e1 Ω1` and `Ω1 Ω1`-terms replaced by
    /// their expectation.
    pub fn relay_transmit_power_estimated(&self, r: usize, h_hat: &CMat, config: &SystemConfig) -> f64 {
        let error = config.e1_sq * self.rho_s.powi(2) * frobenius_sq(&self.f) * frobenius_sq(&self.w[r]);
        self.relay_transmit_power(r, h_hat, config) + self.rho_r[r].powi(2) * error
    }
}

/// Optimised forward factor of robust SVD-RZF from the instantaneous `θ`.
pub fn alpha_svd_rzf(theta: &[f64], config: &SystemConfig) -> Result<f64> {
    let k = config.k as f64;
    if config.k < 2 {
        return Err(Error::Domain("robust SVD-RZF factor needs K >= 2".into()));
    }
    let sum_theta: f64 = theta.iter().sum();
    let SystemConfig {
        ps,
        pr,
        sigma1_sq: s1,
        sigma2_sq: s2,
        e1_sq,
        e2_sq,
        ..
    } = *config;
    let num = e2_sq * sum_theta / k + e2_sq * s1 * k / ps + (s2 / pr) * (sum_theta / k + k * e1_sq + s1 * k / ps);
    let den = sum_theta / ((k - 1.0) * (k + 1.0)) + e1_sq + s1 / ps;
    Ok(num / den)
}

/// Large-K form of [`alpha_svd_rzf`].
pub fn alpha_svd_rzf_large_k(config: &SystemConfig) -> f64 {
    let SystemConfig {
        ps,
        pr,
        sigma1_sq: s1,
        sigma2_sq: s2,
        e1_sq,
        e2_sq,
        ..
    } = *config;
    config.k as f64 * ((e2_sq + e2_sq * s1 / ps) / (1.0 + e1_sq + s1 / ps) + s2 / pr)
}

/// Conventional `(α_MMSE, α_RZF) = (Kσ1²/Ps, Kσ2²/Pr)`.
pub fn conventional_alphas(config: &SystemConfig) -> (f64, f64) {
    let k = config.k as f64;
    (k * (config.sigma1_sq / config.ps), k * (config.sigma2_sq / config.pr))
}

/// Optimised MMSE receiver factor for the multi-relay design.
pub fn alpha_mmse_opt(config: &SystemConfig) -> f64 {
    let m = config.m as f64;
    let load = config.pr * config.r as f64 / config.sigma2_sq;
    (config.e1_sq + config.sigma1_sq / config.ps) * (m + load) / (1.0 + load / (m + 1.0))
}

/// Optimised RZF factor for the multi-relay design, from the backward
/// eigenvalue means `E2θ = E{θ/(θ+α)²}` and `E3θ = E{θ²/(θ+α)²}`.
pub fn alpha_rzf_opt(config: &SystemConfig, e2_theta: f64, e3_theta: f64) -> Result<f64> {
    let SystemConfig {
        ps,
        pr,
        sigma1_sq: s1,
        sigma2_sq: s2,
        e1_sq,
        e2_sq,
        ..
    } = *config;
    let (m, r) = (config.m as f64, config.r as f64);
    let backward = e1_sq * ps + s1;
    let num = (ps * r * e2_sq + s2 * ps / pr) * e3_theta + (e2_sq * s1 * r * m + backward * m / pr) * e2_theta;
    let den = backward * r * e2_theta + ps * r / m * e3_theta;
    if den.is_nan() || den <= 0.0 {
        return Err(Error::Domain(format!("RZF factor denominator must be > 0, got {den}")));
    }
    Ok(num / den)
}

/// Closed-form relay factor of SVD-RZF: the relay load averaged over the
/// forward eigenbasis, `(Ps Σθ/K² + e1²Ps + σ1²) Σ λ/(λ+α)²`.
pub fn rho_r_svd_rzf(theta: &[f64], lambda: &[f64], alpha: f64, config: &SystemConfig) -> f64 {
    let k = config.k as f64;
    let sum_theta: f64 = theta.iter().sum();
    let s: f64 = lambda.iter().map(|l| l / (l + alpha).powi(2)).sum();
    let load = (config.ps / (k * k) * sum_theta + config.e1_sq * config.ps + config.sigma1_sq) * s;
    (config.pr / load).sqrt()
}

enum Forward {
    Rzf(f64),
    MatchedFilter,
}

fn transmit_stage(g_hat: &CMat, eig: &GramEig, forward: &Forward) -> Result<CMat> {
    match *forward {
        Forward::Rzf(alpha) => Ok(g_hat.adjoint() * eig.regularized_inverse(alpha)?),
        Forward::MatchedFilter => Ok(g_hat.adjoint()),
    }
}

fn instantaneous_load(h_hat: &CMat, f: &CMat, rho_s: f64, w: &CMat, config: &SystemConfig) -> f64 {
    let whf = w * h_hat * f;
    rho_s.powi(2) * frobenius_sq(&whf)
        + (config.e1_sq * rho_s.powi(2) * frobenius_sq(f) + config.sigma1_sq) * frobenius_sq(w)
}

/// Relay load with `tr(Z^H Z X)` replaced by its Haar mean `tr(Z^H Z) tr(X)/N`.
fn averaged_load(h_hat: &CMat, f: &CMat, rho_s: f64, receive: &CMat, transmit: &CMat, config: &SystemConfig) -> f64 {
    let n = transmit.nrows() as f64;
    let thf = receive * h_hat * f;
    let inner = rho_s.powi(2) * frobenius_sq(&thf)
        + (config.e1_sq * rho_s.powi(2) * frobenius_sq(f) + config.sigma1_sq) * frobenius_sq(receive);
    frobenius_sq(transmit) / n * inner
}

fn design_svd_family(
    scheme: Scheme,
    realization: &ChannelRealization,
    config: &SystemConfig,
    alpha_mode: AlphaMode,
    power: PowerControl,
) -> Result<BeamformerDesign> {
    config.validate_single_relay()?;
    realization.check_dims(config)?;
    let ch = &realization.relays[0];
    let svd = svd_backward(&ch.h_hat)?;
    let eig = eig_gram(&ch.g_hat)?;
    let k = config.k;

    let forward = match scheme {
        Scheme::RobustSvdRzf => Forward::Rzf(match alpha_mode {
            AlphaMode::Exact => alpha_svd_rzf(&svd.theta, config)?,
            AlphaMode::LargeK => alpha_svd_rzf_large_k(config),
            AlphaMode::Fixed(a) => {
                if !(a >= 0.0 && a.is_finite()) {
                    return Err(Error::Domain(format!("regularization factor must be >= 0, got {a}")));
                }
                a
            }
        }),
        Scheme::SvdRzf => Forward::Rzf(conventional_alphas(config).1),
        Scheme::SvdZf => Forward::Rzf(0.0),
        Scheme::SvdMf => Forward::MatchedFilter,
        other => return Err(Error::Design(format!("{other} is not an SVD scheme"))),
    };
    let alpha_fc = match forward {
        Forward::Rzf(a) => a,
        Forward::MatchedFilter => 0.0,
    };

    let f = svd.v.columns(0, k).into_owned();
    let rho_s = (config.ps / k as f64).sqrt();
    let receive = svd.u.adjoint();
    let transmit = transmit_stage(&ch.g_hat, &eig, &forward)?;
    let w = &transmit * &receive;
    let load = match power {
        PowerControl::Averaged => averaged_load(&ch.h_hat, &f, rho_s, &receive, &transmit, config),
        PowerControl::Instantaneous => instantaneous_load(&ch.h_hat, &f, rho_s, &w, config),
    };
    Ok(BeamformerDesign {
        scheme,
        f,
        w: vec![w],
        rho_s,
        rho_r: vec![(config.pr / load).sqrt()],
        alpha_bc: 0.0,
        alpha_fc,
        power_control: power,
    })
}

fn design_mmse_family(
    scheme: Scheme,
    realization: &ChannelRealization,
    config: &SystemConfig,
    power: PowerControl,
) -> Result<BeamformerDesign> {
    config.validate_square()?;
    realization.check_dims(config)?;
    let backward: Vec<GramEig> = realization
        .relays
        .iter()
        .map(|ch| eig_gram(&ch.h_hat.adjoint()))
        .collect::<Result<_>>()?;
    let forward: Vec<GramEig> = realization
        .relays
        .iter()
        .map(|ch| eig_gram(&ch.g_hat))
        .collect::<Result<_>>()?;
    let theta: Vec<f64> = backward.iter().flat_map(|e| e.lambda.iter().copied()).collect();
    let lambda: Vec<f64> = forward.iter().flat_map(|e| e.lambda.iter().copied()).collect();

    let (alpha_bc, alpha_fc) = match scheme {
        Scheme::RobustMmseRzf => {
            let a_bc = alpha_mmse_opt(config);
            let partial = expectations(&theta, &lambda, a_bc, 0.0)?;
            (a_bc, alpha_rzf_opt(config, partial.e2_theta, partial.e3_theta)?)
        }
        Scheme::MmseRzfConventional => conventional_alphas(config),
        Scheme::ZfZf => (0.0, 0.0),
        other => return Err(Error::Design(format!("{other} is not an MMSE-family scheme"))),
    };

    let m = config.m;
    let f = identity(m);
    let rho_s = (config.ps / m as f64).sqrt();
    let mut receives = Vec::with_capacity(config.r);
    let mut ws = Vec::with_capacity(config.r);
    let mut transmits = Vec::with_capacity(config.r);
    for ((ch, b), fw) in realization.relays.iter().zip(&backward).zip(&forward) {
        let receive = if scheme == Scheme::ZfZf {
            // rank check on Ĥ^HĤ before taking the pseudo-inverse
            b.regularized_inverse(0.0)?;
            pinv(&ch.h_hat)
        } else {
            b.regularized_inverse(alpha_bc)? * ch.h_hat.adjoint()
        };
        let transmit = transmit_stage(&ch.g_hat, fw, &Forward::Rzf(alpha_fc))?;
        ws.push(&transmit * &receive);
        receives.push(receive);
        transmits.push(transmit);
    }

    let rho_r = match power {
        PowerControl::Averaged => {
            let exp: EigExpectations = expectations(&theta, &lambda, alpha_bc, alpha_fc)?;
            let inv = rho_r_inv_sq(config, &exp);
            vec![inv.recip().sqrt(); config.r]
        }
        PowerControl::Instantaneous => realization
            .relays
            .iter()
            .zip(&ws)
            .map(|(ch, w)| (config.pr / instantaneous_load(&ch.h_hat, &f, rho_s, w, config)).sqrt())
            .collect(),
    };
    Ok(BeamformerDesign {
        scheme,
        f,
        w: ws,
        rho_s,
        rho_r,
        alpha_bc,
        alpha_fc,
        power_control: power,
    })
}

/// Builds any scheme with the requested power control.
pub fn design(
    scheme: Scheme,
    realization: &ChannelRealization,
    config: &SystemConfig,
    power: PowerControl,
) -> Result<BeamformerDesign> {
    if scheme.single_relay_only() {
        design_svd_family(scheme, realization, config, AlphaMode::Exact, power)
    } else {
        design_mmse_family(scheme, realization, config, power)
    }
}

/// Robust SVD-RZF with the closed-form relay factor.
pub fn design_svd_rzf(
    realization: &ChannelRealization,
    config: &SystemConfig,
    alpha_mode: AlphaMode,
) -> Result<BeamformerDesign> {
    design_svd_family(
        Scheme::RobustSvdRzf,
        realization,
        config,
        alpha_mode,
        PowerControl::Averaged,
    )
}

pub fn design_svd_rzf_with(
    realization: &ChannelRealization,
    config: &SystemConfig,
    alpha_mode: AlphaMode,
    power: PowerControl,
) -> Result<BeamformerDesign> {
    design_svd_family(Scheme::RobustSvdRzf, realization, config, alpha_mode, power)
}

/// Robust MMSE-RZF with one common relay factor.
pub fn design_mmse_rzf_robust(realization: &ChannelRealization, config: &SystemConfig) -> Result<BeamformerDesign> {
    design_mmse_family(Scheme::RobustMmseRzf, realization, config, PowerControl::Averaged)
}

/// Baseline schemes: `svd-rzf`, `svd-zf`, `svd-mf`, `zf-zf`, `mmse-rzf`.
pub fn design_baseline(
    scheme: Scheme,
    realization: &ChannelRealization,
    config: &SystemConfig,
) -> Result<BeamformerDesign> {
    match scheme {
        Scheme::RobustSvdRzf | Scheme::RobustMmseRzf => {
            Err(Error::Design(format!("{scheme} is not a baseline scheme")))
        }
        _ => design(scheme, realization, config, PowerControl::Averaged),
    }
}
