//! WebAssembly bindings for the browser demo in `www/`.
//!
//! The plain functions in this module do the work and are testable on the
//! host; the `#[wasm_bindgen]` wrappers only adapt argument and error types.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

use relay_bf::beamformers::{alpha_mmse_opt, alpha_rzf_opt, alpha_svd_rzf_large_k, conventional_alphas};
use relay_bf::harness::{run_experiment, AverageDomain, ExperimentSpec, SweepAxis};
use relay_bf::metrics::expectations;
use relay_bf::model::complex_gaussian;
use relay_bf::spectra::{eig_gram, haar_unitary, mu, nu};
use relay_bf::{CMat, Result, Scheme, SystemConfig, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HaarCheck {
    pub mu: f64,
    pub nu: f64,
    pub mc_diag: f64,
    pub mc_off: f64,
    pub se_diag: f64,
    pub se_off: f64,
}

/// Closed-form `E{A_kk²}`, `E{|A_kj|²}` next to Monte Carlo estimates for
/// `A = U diag(vals) U^H` with Haar `U`.
pub fn haar_check(vals: &[f64], draws: usize, seed: u64) -> Result<HaarCheck> {
    let (m, n) = (mu(vals)?, nu(vals)?);
    let k = vals.len();
    let a = CMat::from_fn(k, k, |i, j| C64::new(if i == j { vals[i] } else { 0.0 }, 0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut s1, mut s2, mut o1, mut o2) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..draws {
        let u = haar_unitary(k, &mut rng);
        let x = &u * &a * u.adjoint();
        let (d, o) = (x[(0, 0)].norm_sqr(), x[(0, 1)].norm_sqr());
        s1 += d;
        s2 += d * d;
        o1 += o;
        o2 += o * o;
    }
    let nf = draws as f64;
    let se = |s: f64, q: f64| ((q / nf - (s / nf).powi(2)).max(0.0) / nf).sqrt();
    Ok(HaarCheck {
        mu: m,
        nu: n,
        mc_diag: s1 / nf,
        mc_off: o1 / nf,
        se_diag: se(s1, s2),
        se_off: se(o1, o2),
    })
}

/// Regularisation factors against the error power `e1² = e2²`: rows of
/// `[e², α_MMSE, α_RZF (multi-relay), α_SVD-RZF (large K), Kσ2²/Pr]`.
pub fn alpha_table(
    k: usize,
    r: usize,
    snr_bc_db: f64,
    snr_fc_db: f64,
    e_max: f64,
    points: usize,
    seed: u64,
) -> Result<Vec<[f64; 5]>> {
    let base = SystemConfig::square(k, r, snr_bc_db, snr_fc_db, 0.0);
    base.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut theta = Vec::with_capacity(200 * k);
    for _ in 0..200 {
        theta.extend(eig_gram(&complex_gaussian(k, k, &mut rng))?.lambda);
    }
    (0..points.max(2))
        .map(|i| {
            let e = e_max * i as f64 / (points.max(2) - 1) as f64;
            let cfg = SystemConfig {
                e1_sq: e,
                e2_sq: e,
                ..base
            };
            let a_m = alpha_mmse_opt(&cfg);
            let ex = expectations(&theta, &theta, a_m, 1.0)?;
            let a_z = alpha_rzf_opt(&cfg, ex.e2_theta, ex.e3_theta)?;
            Ok([e, a_m, a_z, alpha_svd_rzf_large_k(&cfg), conventional_alphas(&cfg).1])
        })
        .collect()
}

/// Mean SINR (dB) of every applicable scheme over a sweep, as CSV.
#[allow(clippy::too_many_arguments)]
pub fn sweep_csv(
    axis: &str,
    values: &[f64],
    k: usize,
    r: usize,
    snr_bc_db: f64,
    snr_fc_db: f64,
    e_sq: f64,
    trials: usize,
    seed: u64,
) -> Result<String> {
    let sweep_axis: SweepAxis = axis.parse()?;
    let multi = r > 1 || sweep_axis == SweepAxis::R;
    let spec = ExperimentSpec {
        base_config: SystemConfig::square(k, r, snr_bc_db, snr_fc_db, e_sq),
        sweep_axis,
        sweep_values: values.to_vec(),
        schemes: Scheme::ALL
            .into_iter()
            .filter(|s| !(multi && s.single_relay_only()))
            .collect(),
        trials,
        master_seed: seed,
        average_domain: AverageDomain::LinearSinr,
        power_control: None,
        branches: Vec::new(),
    };
    Ok(run_experiment(&spec)?.to_csv())
}

fn js(e: relay_bf::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// `[mu, nu, mc_diag, mc_off, se_diag, se_off]`.
#[wasm_bindgen]
pub fn haar_moments(vals: Vec<f64>, draws: u32, seed: u32) -> std::result::Result<Vec<f64>, JsError> {
    let h = haar_check(&vals, draws as usize, seed.into()).map_err(js)?;
    Ok(vec![h.mu, h.nu, h.mc_diag, h.mc_off, h.se_diag, h.se_off])
}

/// Flattened [`alpha_table`], five numbers per point.
#[wasm_bindgen]
pub fn alpha_curves(
    k: u32,
    r: u32,
    snr_bc_db: f64,
    snr_fc_db: f64,
    e_max: f64,
    points: u32,
    seed: u32,
) -> std::result::Result<Vec<f64>, JsError> {
    let rows = alpha_table(
        k as usize,
        r as usize,
        snr_bc_db,
        snr_fc_db,
        e_max,
        points as usize,
        seed.into(),
    )
    .map_err(js)?;
    Ok(rows.into_iter().flatten().collect())
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn sinr_sweep(
    axis: &str,
    values: Vec<f64>,
    k: u32,
    r: u32,
    snr_bc_db: f64,
    snr_fc_db: f64,
    e_sq: f64,
    trials: u32,
    seed: u32,
) -> std::result::Result<String, JsError> {
    sweep_csv(
        axis,
        &values,
        k as usize,
        r as usize,
        snr_bc_db,
        snr_fc_db,
        e_sq,
        trials as usize,
        seed.into(),
    )
    .map_err(js)
}
