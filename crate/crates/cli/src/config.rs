//! Flat `key = value` configuration files and `--set` overrides.

use std::fmt;
use std::path::Path;

use relay_bf::harness::{AverageDomain, ExperimentSpec, SweepAxis};
use relay_bf::{PowerControl, Scheme, SystemConfig};

#[derive(Debug)]
pub enum ConfigError {
    /// Unreadable file, unknown key or malformed value.
    Parse(String),
    UnknownScheme(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse(m) | ConfigError::UnknownScheme(m) => f.write_str(m),
        }
    }
}

pub const KEYS: [&str; 20] = [
    "m",
    "n",
    "k",
    "r",
    "ps",
    "pr",
    "sigma1_sq",
    "sigma2_sq",
    "e1_sq",
    "e2_sq",
    "snr_bc_db",
    "snr_fc_db",
    "error_power",
    "sweep",
    "values",
    "schemes",
    "trials",
    "seed",
    "average_domain",
    "power_control",
];

/// An experiment under construction. Sweep values and schemes left unset
/// are filled in by [`Draft::finish`].
#[derive(Debug, Clone)]
pub struct Draft {
    pub spec: ExperimentSpec,
    values_set: bool,
    schemes_set: bool,
}

impl Draft {
    pub fn from_preset(spec: ExperimentSpec) -> Self {
        Draft {
            spec,
            values_set: true,
            schemes_set: true,
        }
    }

    /// Single-point run at the default configuration.
    pub fn blank() -> Self {
        let spec = ExperimentSpec {
            base_config: SystemConfig::default(),
            sweep_axis: SweepAxis::SnrBcDb,
            sweep_values: Vec::new(),
            schemes: Vec::new(),
            trials: 1000,
            master_seed: 2012,
            average_domain: AverageDomain::LinearSinr,
            power_control: None,
            branches: Vec::new(),
        };
        Draft {
            spec,
            values_set: false,
            schemes_set: false,
        }
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Parse(format!("cannot read config {}: {e}", path.display())))?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = split_pair(line)
                .ok_or_else(|| ConfigError::Parse(format!("{}:{}: expected key = value", path.display(), i + 1)))?;
            self.set(key, value).map_err(|e| match e {
                ConfigError::Parse(m) => ConfigError::Parse(format!("{}:{}: {m}", path.display(), i + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    /// Applies one `key=value` override.
    pub fn apply_override(&mut self, pair: &str) -> Result<(), ConfigError> {
        let (key, value) =
            split_pair(pair).ok_or_else(|| ConfigError::Parse(format!("--set expects key=value, got '{pair}'")))?;
        self.set(key, value)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let c = &mut self.spec.base_config;
        match key {
            "m" => c.m = num(key, value)?,
            "n" => c.n = num(key, value)?,
            "k" => c.k = num(key, value)?,
            "r" => c.r = num(key, value)?,
            "ps" => c.ps = num(key, value)?,
            "pr" => c.pr = num(key, value)?,
            "sigma1_sq" => c.sigma1_sq = num(key, value)?,
            "sigma2_sq" => c.sigma2_sq = num(key, value)?,
            "e1_sq" => c.e1_sq = num(key, value)?,
            "e2_sq" => c.e2_sq = num(key, value)?,
            "snr_bc_db" => c.set_snr_bc_db(num(key, value)?),
            "snr_fc_db" => c.set_snr_fc_db(num(key, value)?),
            "error_power" => {
                let e: f64 = num(key, value)?;
                c.e1_sq = e;
                c.e2_sq = e;
            }
            "sweep" => self.spec.sweep_axis = value.parse().map_err(|e| ConfigError::Parse(format!("{e}")))?,
            "values" => {
                self.spec.sweep_values = parse_values(value)?;
                self.values_set = true;
            }
            "schemes" => self.set_schemes(value)?,
            "trials" => self.spec.trials = num(key, value)?,
            "seed" => self.spec.master_seed = num(key, value)?,
            "average_domain" => {
                self.spec.average_domain = value.parse().map_err(|e| ConfigError::Parse(format!("{e}")))?
            }
            "power_control" => {
                self.spec.power_control = Some(
                    value
                        .parse::<PowerControl>()
                        .map_err(|e| ConfigError::Parse(format!("{e}")))?,
                )
            }
            _ => {
                return Err(ConfigError::Parse(format!(
                    "unknown key '{key}' (known: {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn set_schemes(&mut self, list: &str) -> Result<(), ConfigError> {
        self.spec.schemes = list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<Scheme>()
                    .map_err(|e| ConfigError::UnknownScheme(e.to_string()))
            })
            .collect::<Result<_, _>>()?;
        self.schemes_set = true;
        Ok(())
    }

    pub fn finish(mut self) -> ExperimentSpec {
        let c = self.spec.base_config;
        if !self.values_set {
            let current = match self.spec.sweep_axis {
                SweepAxis::SnrBcDb => c.snr_bc_db(),
                SweepAxis::SnrFcDb => c.snr_fc_db(),
                SweepAxis::K => c.k as f64,
                SweepAxis::ErrorPower => c.e1_sq,
                SweepAxis::R => c.r as f64,
            };
            self.spec.sweep_values = vec![current];
        }
        if !self.schemes_set {
            let multi = self.spec.sweep_axis == SweepAxis::R || c.r > 1;
            self.spec.schemes = Scheme::ALL
                .into_iter()
                .filter(|s| !(multi && s.single_relay_only()))
                .collect();
        }
        self.spec
    }
}

fn split_pair(s: &str) -> Option<(&str, &str)> {
    let (k, v) = s.split_once('=').or_else(|| s.split_once(':'))?;
    let (k, v) = (k.trim(), v.trim());
    (!k.is_empty() && !v.is_empty()).then_some((k, v))
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError::Parse(format!("invalid value '{value}' for {key}")))
}

/// `a,b,c` or an inclusive range `start:step:stop`.
fn parse_values(s: &str) -> Result<Vec<f64>, ConfigError> {
    let bad = || ConfigError::Parse(format!("invalid sweep values '{s}'"));
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    if parts.len() == 3 {
        let p: Vec<f64> = parts
            .iter()
            .map(|x| x.parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        let (start, step, stop) = (p[0], p[1], p[2]);
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(bad());
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| start + step * i as f64).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}
