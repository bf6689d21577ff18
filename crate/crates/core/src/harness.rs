//! Monte Carlo sweeps over one configuration axis.
//!
//! Each `(grid point, trial)` pair gets its own seed derived from the master
//! seed, and every scheme is evaluated on the same realization. Per-trial
//! results are reduced in trial order, so a run is bit-reproducible for any
//! thread count.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::beamformers::{design, PowerControl, Scheme};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, sum_rate};
use crate::model::{derive_seed, generate_realization, SystemConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    SnrBcDb,
    SnrFcDb,
    /// Sets `M = N = K`.
    K,
    /// Sets `e1² = e2²`.
    ErrorPower,
    R,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::SnrBcDb => "snr_bc_db",
            SweepAxis::SnrFcDb => "snr_fc_db",
            SweepAxis::K => "K",
            SweepAxis::ErrorPower => "error_power",
            SweepAxis::R => "R",
        }
    }

    fn is_integer(self) -> bool {
        matches!(self, SweepAxis::K | SweepAxis::R)
    }

    pub fn apply(self, base: &SystemConfig, value: f64) -> SystemConfig {
        let mut c = *base;
        match self {
            SweepAxis::SnrBcDb => c.set_snr_bc_db(value),
            SweepAxis::SnrFcDb => c.set_snr_fc_db(value),
            SweepAxis::K => {
                let k = value as usize;
                c.m = k;
                c.n = k;
                c.k = k;
            }
            SweepAxis::ErrorPower => {
                c.e1_sq = value;
                c.e2_sq = value;
            }
            SweepAxis::R => c.r = value as usize,
        }
        c
    }
}

impl FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "snr_bc_db" => Ok(SweepAxis::SnrBcDb),
            "snr_fc_db" => Ok(SweepAxis::SnrFcDb),
            "K" | "k" => Ok(SweepAxis::K),
            "error_power" => Ok(SweepAxis::ErrorPower),
            "R" | "r" => Ok(SweepAxis::R),
            _ => Err(Error::Config(format!("unknown sweep axis '{s}'"))),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AverageDomain {
    /// Mean of the user-averaged linear SINR, reported in dB.
    LinearSinr,
    /// Mean of per-user SINR in dB.
    DbSinr,
    /// Mean sum rate in bits/s/Hz.
    SumRate,
}

impl FromStr for AverageDomain {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear_sinr" => Ok(AverageDomain::LinearSinr),
            "db_sinr" => Ok(AverageDomain::DbSinr),
            "sum_rate" => Ok(AverageDomain::SumRate),
            _ => Err(Error::Config(format!("unknown averaging domain '{s}'"))),
        }
    }
}

/// Extra series run over the same sweep with a fixed error-power pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub label: String,
    pub e1_sq: f64,
    pub e2_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub base_config: SystemConfig,
    pub sweep_axis: SweepAxis,
    pub sweep_values: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub trials: usize,
    pub master_seed: u64,
    pub average_domain: AverageDomain,
    /// `None` keeps each scheme's default (averaged) relay power control.
    pub power_control: Option<PowerControl>,
    /// When non-empty, the sweep is repeated once per branch and scheme
    /// labels carry the branch label as `scheme@label`.
    pub branches: Vec<Branch>,
}

impl ExperimentSpec {
    pub fn grid_configs(&self) -> Vec<SystemConfig> {
        self.sweep_values
            .iter()
            .map(|&v| self.sweep_axis.apply(&self.base_config, v))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweep_values.is_empty() {
            return Err(Error::Config("sweep values must be non-empty".into()));
        }
        let up = self.sweep_values.windows(2).all(|w| w[1] > w[0]);
        let down = self.sweep_values.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(Error::Config("sweep values must be strictly monotone".into()));
        }
        if self.sweep_axis.is_integer() && self.sweep_values.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
            return Err(Error::Config(format!(
                "{} sweep values must be positive integers",
                self.sweep_axis
            )));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("at least one scheme is required".into()));
        }
        for cfg in self.grid_configs() {
            cfg.validate()?;
            for b in &self.branches {
                SystemConfig {
                    e1_sq: b.e1_sq,
                    e2_sq: b.e2_sq,
                    ..cfg
                }
                .validate()?;
            }
            for s in &self.schemes {
                if s.single_relay_only() && cfg.r > 1 {
                    return Err(Error::Config(format!("{s} requires a single relay, got R={}", cfg.r)));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub sweep_value: f64,
    pub scheme: String,
    pub mean_metric: f64,
    pub stderr_metric: f64,
    /// Trials that entered the mean.
    pub trials: usize,
    pub alpha_bc_mean: f64,
    pub alpha_fc_mean: f64,
    /// Trials dropped because the design or the metric failed.
    pub excluded: usize,
    /// First failure reason, if any trial was dropped.
    pub failure: Option<String>,
}

pub const CSV_HEADER: &str = "sweep_value,scheme,mean_metric,stderr_metric,trials,alpha_bc_mean,alpha_fc_mean";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultTable {
    pub sweep_axis: SweepAxis,
    pub average_domain: AverageDomain,
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn row(&self, sweep_value: f64, scheme: &str) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.sweep_value == sweep_value && r.scheme == scheme)
    }

    pub fn series(&self, scheme: &str) -> Vec<&ResultRow> {
        self.rows.iter().filter(|r| r.scheme == scheme).collect()
    }

    /// CSV with one line per row; floats use the shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.sweep_value, r.scheme, r.mean_metric, r.stderr_metric, r.trials, r.alpha_bc_mean, r.alpha_fc_mean
            ));
        }
        out
    }
}

type TrialOutcome = std::result::Result<(f64, f64, f64), String>;

fn trial_metric(sinr: &[f64], domain: AverageDomain) -> f64 {
    match domain {
        AverageDomain::LinearSinr => sinr.iter().sum::<f64>() / sinr.len() as f64,
        AverageDomain::DbSinr => sinr.iter().map(|s| 10.0 * s.log10()).sum::<f64>() / sinr.len() as f64,
        AverageDomain::SumRate => sum_rate(sinr),
    }
}

fn run_trial(cfg: &SystemConfig, seed: u64, spec: &ExperimentSpec) -> Vec<TrialOutcome> {
    let realization = match generate_realization(cfg, seed) {
        Ok(r) => r,
        Err(e) => return vec![Err(e.to_string()); spec.schemes.len()],
    };
    let power = spec.power_control.unwrap_or(PowerControl::Averaged);
    spec.schemes
        .iter()
        .map(|&scheme| {
            let d = design(scheme, &realization, cfg, power).map_err(|e| e.to_string())?;
            let report = evaluate(&d, &realization, cfg).map_err(|e| e.to_string())?;
            let metric = trial_metric(&report.per_user_sinr, spec.average_domain);
            if !metric.is_finite() {
                return Err(format!("non-finite metric {metric}"));
            }
            Ok((metric, d.alpha_bc, d.alpha_fc))
        })
        .collect()
}

#[cfg(feature = "parallel")]
fn run_trials(cfg: &SystemConfig, grid: usize, spec: &ExperimentSpec) -> Vec<Vec<TrialOutcome>> {
    use rayon::prelude::*;
    (0..spec.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, derive_seed(spec.master_seed, &[grid as u64, t as u64]), spec))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn run_trials(cfg: &SystemConfig, grid: usize, spec: &ExperimentSpec) -> Vec<Vec<TrialOutcome>> {
    (0..spec.trials)
        .map(|t| run_trial(cfg, derive_seed(spec.master_seed, &[grid as u64, t as u64]), spec))
        .collect()
}

fn reduce(
    sweep_value: f64,
    scheme: String,
    outcomes: impl Iterator<Item = TrialOutcome>,
    domain: AverageDomain,
) -> ResultRow {
    let (mut n, mut sum, mut sum_sq, mut a_bc, mut a_fc) = (0usize, 0.0, 0.0, 0.0, 0.0);
    let (mut excluded, mut failure) = (0usize, None);
    for o in outcomes {
        match o {
            Ok((x, bc, fc)) => {
                n += 1;
                sum += x;
                sum_sq += x * x;
                a_bc += bc;
                a_fc += fc;
            }
            Err(e) => {
                excluded += 1;
                failure.get_or_insert(e);
            }
        }
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = if n > 1 {
        ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0)
    } else {
        0.0
    };
    let se = (var / nf).sqrt();
    let (mean_metric, stderr_metric) = match domain {
        AverageDomain::LinearSinr => (10.0 * mean.log10(), 10.0 / std::f64::consts::LN_10 * se / mean),
        _ => (mean, se),
    };
    ResultRow {
        sweep_value,
        scheme,
        mean_metric: if n == 0 { f64::NAN } else { mean_metric },
        stderr_metric: if n == 0 { f64::NAN } else { stderr_metric },
        trials: n,
        alpha_bc_mean: a_bc / nf,
        alpha_fc_mean: a_fc / nf,
        excluded,
        failure,
    }
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let branches: Vec<Option<&Branch>> = if spec.branches.is_empty() {
        vec![None]
    } else {
        spec.branches.iter().map(Some).collect()
    };
    let mut rows = Vec::new();
    for (g, (&value, cfg)) in spec.sweep_values.iter().zip(spec.grid_configs()).enumerate() {
        for branch in &branches {
            let cfg = match branch {
                Some(b) => SystemConfig {
                    e1_sq: b.e1_sq,
                    e2_sq: b.e2_sq,
                    ..cfg
                },
                None => cfg,
            };
            let outcomes = run_trials(&cfg, g, spec);
            for (s, scheme) in spec.schemes.iter().enumerate() {
                let label = match branch {
                    Some(b) => format!("{scheme}@{}", b.label),
                    None => scheme.to_string(),
                };
                rows.push(reduce(
                    value,
                    label,
                    outcomes.iter().map(|t| t[s].clone()),
                    spec.average_domain,
                ));
            }
        }
    }
    Ok(ResultTable {
        sweep_axis: spec.sweep_axis,
        average_domain: spec.average_domain,
        rows,
    })
}

pub const PRESETS: [&str; 6] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7"];

/// Number of channel realizations per grid point used by the presets.
pub const PRESET_TRIALS: usize = 10_000;

fn steps(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step).round() as usize;
    (0..=n).map(|i| start + step * i as f64).collect()
}

/// Figure presets. Antenna and user counts default to `M = N = K = 4`.
pub fn preset(name: &str) -> Result<ExperimentSpec> {
    use Scheme::*;
    let single = vec![RobustSvdRzf, SvdZf, SvdMf, ZfZf, MmseRzfConventional, RobustMmseRzf];
    let single_all = vec![
        RobustSvdRzf,
        SvdRzf,
        SvdZf,
        SvdMf,
        ZfZf,
        MmseRzfConventional,
        RobustMmseRzf,
    ];
    let multi = vec![RobustMmseRzf, MmseRzfConventional, ZfZf];
    let spec = |base, axis, values, schemes, domain| ExperimentSpec {
        base_config: base,
        sweep_axis: axis,
        sweep_values: values,
        schemes,
        trials: PRESET_TRIALS,
        master_seed: 2012,
        average_domain: domain,
        power_control: None,
        branches: Vec::new(),
    };
    let lin = AverageDomain::LinearSinr;
    Ok(match name {
        "fig2" => spec(
            SystemConfig::square(4, 1, 20.0, 20.0, 0.2),
            SweepAxis::SnrBcDb,
            steps(0.0, 30.0, 5.0),
            single,
            lin,
        ),
        "fig3" => spec(
            SystemConfig::square(4, 1, 20.0, 20.0, 0.1),
            SweepAxis::SnrFcDb,
            steps(0.0, 40.0, 5.0),
            single_all,
            lin,
        ),
        "fig4" => spec(
            SystemConfig::square(4, 1, 20.0, 20.0, 0.1),
            SweepAxis::K,
            steps(2.0, 8.0, 1.0),
            single_all,
            lin,
        ),
        "fig5" => spec(
            SystemConfig::square(4, 10, 20.0, 20.0, 0.0),
            SweepAxis::ErrorPower,
            steps(0.0, 0.3, 0.05),
            multi,
            lin,
        ),
        "fig6" => spec(
            SystemConfig::square(4, 10, 10.0, 20.0, 0.0),
            SweepAxis::ErrorPower,
            steps(0.0, 0.3, 0.05),
            vec![RobustMmseRzf, MmseRzfConventional],
            lin,
        ),
        "fig7" => {
            let mut s = spec(
                SystemConfig::square(4, 1, 20.0, 20.0, 0.0),
                SweepAxis::R,
                steps(1.0, 10.0, 1.0),
                multi,
                AverageDomain::SumRate,
            );
            s.branches = vec![
                Branch {
                    label: "e0".into(),
                    e1_sq: 0.0,
                    e2_sq: 0.0,
                },
                Branch {
                    label: "e0.2".into(),
                    e1_sq: 0.2,
                    e2_sq: 0.2,
                },
            ];
            s
        }
        other => {
            return Err(Error::Config(format!(
                "unknown preset '{other}' (expected one of {})",
                PRESETS.join(", ")
            )))
        }
    })
}
