//! Network configuration and random channel realizations.
//!
//! The true channels are modelled as an estimate plus a scaled Gaussian error
//! direction, `H_r = Ĥ_r + e1 Ω1_r` and `G_r = Ĝ_r + e2 Ω2_r`, with every entry
//! of the four families drawn i.i.d. CN(0, 1).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{CMat, C64};

/// Scalar parameters of the relaying network. Powers and variances are linear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Base-station antennas.
    pub m: usize,
    /// Antennas per relay.
    pub n: usize,
    /// Single-antenna users.
    pub k: usize,
    /// Relays.
    pub r: usize,
    pub ps: f64,
    pub pr: f64,
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
    pub e1_sq: f64,
    pub e2_sq: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            m: 4,
            n: 4,
            k: 4,
            r: 1,
            ps: 100.0,
            pr: 100.0,
            sigma1_sq: 1.0,
            sigma2_sq: 1.0,
            e1_sq: 0.0,
            e2_sq: 0.0,
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

impl SystemConfig {
    /// Square network `M = N = K` with unit noise variances and SNRs given in dB.
    pub fn square(k: usize, r: usize, snr_bc_db: f64, snr_fc_db: f64, e_sq: f64) -> Self {
        Self {
            m: k,
            n: k,
            k,
            r,
            ps: db_to_linear(snr_bc_db),
            pr: db_to_linear(snr_fc_db),
            sigma1_sq: 1.0,
            sigma2_sq: 1.0,
            e1_sq: e_sq,
            e2_sq: e_sq,
        }
    }

    pub fn snr_bc_db(&self) -> f64 {
        linear_to_db(self.ps / self.sigma1_sq)
    }

    pub fn snr_fc_db(&self) -> f64 {
        linear_to_db(self.pr / self.sigma2_sq)
    }

    /// Sets `Ps` from a backward SNR, normalising `σ1² = 1`.
    pub fn set_snr_bc_db(&mut self, db: f64) {
        self.sigma1_sq = 1.0;
        self.ps = db_to_linear(db);
    }

    /// Sets `Pr` from a forward SNR, normalising `σ2² = 1`.
    pub fn set_snr_fc_db(&mut self, db: f64) {
        self.sigma2_sq = 1.0;
        self.pr = db_to_linear(db);
    }

    pub fn e1(&self) -> f64 {
        self.e1_sq.sqrt()
    }

    pub fn e2(&self) -> f64 {
        self.e2_sq.sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 || self.k == 0 || self.r == 0 {
            return Err(Error::Config("antenna, user and relay counts must be positive".into()));
        }
        if self.m < self.k || self.n < self.k {
            return Err(Error::Config(format!(
                "M,N >= K violated: M={}, N={}, K={}",
                self.m, self.n, self.k
            )));
        }
        for (name, v) in [
            ("ps", self.ps),
            ("pr", self.pr),
            ("sigma1_sq", self.sigma1_sq),
            ("sigma2_sq", self.sigma2_sq),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        for (name, v) in [("e1_sq", self.e1_sq), ("e2_sq", self.e2_sq)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Constraints of the single-relay SVD designs: `R = 1`, `N = K`.
    pub fn validate_single_relay(&self) -> Result<()> {
        self.validate()?;
        if self.r != 1 {
            return Err(Error::Config(format!(
                "SVD designs need a single relay, got R={}",
                self.r
            )));
        }
        if self.n != self.k {
            return Err(Error::Config(format!(
                "SVD designs need N = K, got N={}, K={}",
                self.n, self.k
            )));
        }
        Ok(())
    }

    /// Constraints of the MMSE-RZF family: `M = N = K`.
    pub fn validate_square(&self) -> Result<()> {
        self.validate()?;
        if self.m != self.k || self.n != self.k {
            return Err(Error::Config(format!(
                "MMSE-RZF designs need M = N = K, got M={}, N={}, K={}",
                self.m, self.n, self.k
            )));
        }
        Ok(())
    }
}

/// Channels of one relay: estimates and unit-variance error directions.
#[derive(Debug, Clone, PartialEq)]
pub struct RelayChannels {
    /// Estimated backward channel, N×M.
    pub h_hat: CMat,
    /// Backward error direction Ω1, N×M.
    pub omega1: CMat,
    /// Estimated forward channel, K×N (row k is the k-th user's channel).
    pub g_hat: CMat,
    /// Forward error direction Ω2, K×N.
    pub omega2: CMat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub relays: Vec<RelayChannels>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy)]
#[repr(u64)]
enum Role {
    HHat = 0,
    Omega1 = 1,
    GHat = 2,
    Omega2 = 3,
}

/// Independent stream for `(seed, relay, role)`, independent of draw order.
fn role_rng(seed: u64, relay: usize, role: Role) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((relay as u64) << 2) | role as u64);
    rng
}

/// Matrix with i.i.d. CN(0, 1) entries (real and imaginary parts N(0, 1/2)).
pub fn complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(s * re, s * im)
    })
}

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a realization seed from a master seed and a path of indices
/// (e.g. grid point, trial).
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(master), |acc, &i| mix(acc ^ mix(i)))
}

pub fn generate_realization(config: &SystemConfig, seed: u64) -> Result<ChannelRealization> {
    config.validate()?;
    let relays = (0..config.r)
        .map(|r| RelayChannels {
            h_hat: complex_gaussian(config.n, config.m, &mut role_rng(seed, r, Role::HHat)),
            omega1: complex_gaussian(config.n, config.m, &mut role_rng(seed, r, Role::Omega1)),
            g_hat: complex_gaussian(config.k, config.n, &mut role_rng(seed, r, Role::GHat)),
            omega2: complex_gaussian(config.k, config.n, &mut role_rng(seed, r, Role::Omega2)),
        })
        .collect();
    Ok(ChannelRealization { relays, seed })
}

/// True channels `(H_r, G_r)` per relay.
pub fn true_channels(realization: &ChannelRealization, config: &SystemConfig) -> Vec<(CMat, CMat)> {
    let (e1, e2) = (config.e1(), config.e2());
    realization
        .relays
        .iter()
        .map(|ch| (&ch.h_hat + ch.omega1.scale(e1), &ch.g_hat + ch.omega2.scale(e2)))
        .collect()
}

impl ChannelRealization {
    /// Checks that the matrix shapes agree with `config`.
    pub fn check_dims(&self, config: &SystemConfig) -> Result<()> {
        if self.relays.len() != config.r {
            return Err(Error::Dimension(format!(
                "realization has {} relays, config expects {}",
                self.relays.len(),
                config.r
            )));
        }
        for (r, ch) in self.relays.iter().enumerate() {
            let ok = ch.h_hat.shape() == (config.n, config.m)
                && ch.omega1.shape() == (config.n, config.m)
                && ch.g_hat.shape() == (config.k, config.n)
                && ch.omega2.shape() == (config.k, config.n);
            if !ok {
                return Err(Error::Dimension(format!(
                    "relay {r} channel shapes do not match config"
                )));
            }
        }
        Ok(())
    }
}
