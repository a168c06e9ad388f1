//! Scenario configuration: a JSON document in logarithmic units, overridable
//! field by field from the command line.

use fblrelay_core::{CodingSpec, PowerBudget, Propagation, SystemParams};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

/// dB to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimalTag {
    Optimal,
}

/// Relay transmit power: a fixed level, or the per-mode optimum with the
/// source power acting as the peak budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RelayPower {
    Dbm(f64),
    Optimal(OptimalTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisVariable {
    PsDbm,
    PrDbm,
    OmegaRrDb,
    Blocklength,
    PayloadBits,
    Log10Eps,
}

impl AxisVariable {
    pub fn name(self) -> &'static str {
        match self {
            AxisVariable::PsDbm => "ps_dbm",
            AxisVariable::PrDbm => "pr_dbm",
            AxisVariable::OmegaRrDb => "omega_rr_db",
            AxisVariable::Blocklength => "blocklength",
            AxisVariable::PayloadBits => "payload_bits",
            AxisVariable::Log10Eps => "log10_eps",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub variable: AxisVariable,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepAxis {
    /// Grid points `start, start + step, ...` up to `stop`, stepping
    /// linearly in the axis unit.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.start + i as f64 * self.step).collect()
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(CliError::config("sweep", "start and stop must be finite"));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(CliError::config("sweep.step", "must be positive"));
        }
        if self.stop < self.start {
            return Err(CliError::config("sweep.stop", "must not be below sweep.start"));
        }
        if (self.stop - self.start) / self.step > 1e6 {
            return Err(CliError::config("sweep.step", "more than 10^6 grid points"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloSettings {
    /// Draws per operating point; zero skips the simulation.
    pub samples: usize,
    pub seed: u64,
}

pub const DEFAULT_SEED: u64 = 20_170_101;

impl Default for MonteCarloSettings {
    fn default() -> Self {
        Self {
            samples: 1_000_000,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub omega_sr_db: f64,
    pub omega_rd_db: f64,
    /// `null` models perfect loop-interference cancellation.
    pub omega_rr_db: Option<f64>,
    pub noise_r_dbm: f64,
    pub noise_d_dbm: f64,
    pub ps_dbm: f64,
    pub pr_dbm: RelayPower,
    /// Per-node peak power used by `select` and `delay-sweep`.
    pub pc_dbm: f64,
    pub payload_bits: u32,
    /// Frame length in channel uses; half-duplex hops get half each.
    pub blocklength: u32,
    pub target_bler: f64,
    pub sweep: Option<SweepAxis>,
    pub monte_carlo: MonteCarloSettings,
    pub format: OutputFormat,
    pub quad_tol: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            omega_sr_db: -80.0,
            omega_rd_db: -85.0,
            omega_rr_db: Some(-110.0),
            noise_r_dbm: -90.0,
            noise_d_dbm: -90.0,
            ps_dbm: 30.0,
            pr_dbm: RelayPower::Dbm(20.0),
            pc_dbm: 30.0,
            payload_bits: 256,
            blocklength: 512,
            target_bler: 1e-3,
            sweep: None,
            monte_carlo: MonteCarloSettings::default(),
            format: OutputFormat::Csv,
            quad_tol: 1e-9,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let finite = [
            ("omega_sr_db", self.omega_sr_db),
            ("omega_rd_db", self.omega_rd_db),
            ("noise_r_dbm", self.noise_r_dbm),
            ("noise_d_dbm", self.noise_d_dbm),
            ("ps_dbm", self.ps_dbm),
            ("pc_dbm", self.pc_dbm),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(CliError::config(name, "must be finite"));
            }
        }
        if let Some(rr) = self.omega_rr_db {
            if !rr.is_finite() {
                return Err(CliError::config("omega_rr_db", "must be finite or null"));
            }
        }
        if let RelayPower::Dbm(pr) = self.pr_dbm {
            if !pr.is_finite() {
                return Err(CliError::config("pr_dbm", "must be finite or \"optimal\""));
            }
        }
        if self.payload_bits == 0 {
            return Err(CliError::config("payload_bits", "must be positive"));
        }
        if self.blocklength < 2 || self.blocklength % 2 != 0 {
            return Err(CliError::config("blocklength", "must be a positive even number"));
        }
        if !(self.target_bler > 0.0 && self.target_bler < 1.0) {
            return Err(CliError::config("target_bler", "must lie in (0, 1)"));
        }
        if self.monte_carlo.samples != 0 && self.monte_carlo.samples < fblrelay_core::bler::MIN_MC_SAMPLES {
            return Err(CliError::config(
                "monte_carlo.samples",
                "must be zero or at least 10000",
            ));
        }
        if !(self.quad_tol > 0.0 && self.quad_tol < 1.0) {
            return Err(CliError::config("quad_tol", "must lie in (0, 1)"));
        }
        if let Some(axis) = &self.sweep {
            axis.validate()?;
        }
        Ok(())
    }

    pub fn propagation(&self) -> Propagation {
        Propagation {
            omega_sr: db_to_linear(self.omega_sr_db),
            omega_rd: db_to_linear(self.omega_rd_db),
            omega_rr: self.omega_rr_db.map_or(0.0, db_to_linear),
            noise_r: dbm_to_watts(self.noise_r_dbm),
            noise_d: dbm_to_watts(self.noise_d_dbm),
        }
    }

    pub fn budget(&self) -> Result<PowerBudget, CliError> {
        PowerBudget::new(dbm_to_watts(self.pc_dbm)).map_err(|_| CliError::config("pc_dbm", "out of range"))
    }

    /// Transmit powers of the full- and half-duplex systems.
    pub fn systems(&self) -> Result<(SystemParams, SystemParams), CliError> {
        let propagation = self.propagation();
        let ps = dbm_to_watts(self.ps_dbm);
        let (pr_f, pr_h) = match self.pr_dbm {
            RelayPower::Dbm(dbm) => (dbm_to_watts(dbm), dbm_to_watts(dbm)),
            RelayPower::Optimal(_) => {
                let budget = PowerBudget::new(ps).map_err(|_| CliError::config("ps_dbm", "out of range"))?;
                let fdr = fblrelay_core::optimal_powers_fdr(&propagation, &budget)?;
                let hdr = fblrelay_core::optimal_powers_hdr(&budget);
                (fdr.relay, hdr.relay)
            }
        };
        let sys = |relay_power| SystemParams {
            propagation,
            source_power: ps,
            relay_power,
        };
        Ok((sys(pr_f), sys(pr_h)))
    }

    pub fn coding(&self) -> Result<(CodingSpec, CodingSpec), CliError> {
        Ok((
            CodingSpec::full_duplex(self.payload_bits, self.blocklength)?,
            CodingSpec::half_duplex(self.payload_bits, self.blocklength)?,
        ))
    }

    /// Copy of `self` with the sweep variable set to `value`.
    pub fn at(&self, variable: AxisVariable, value: f64) -> Result<Self, CliError> {
        let mut c = self.clone();
        match variable {
            AxisVariable::PsDbm => c.ps_dbm = value,
            AxisVariable::PrDbm => c.pr_dbm = RelayPower::Dbm(value),
            AxisVariable::OmegaRrDb => c.omega_rr_db = Some(value),
            AxisVariable::Blocklength => c.blocklength = integral_axis_value("blocklength", value)?,
            AxisVariable::PayloadBits => c.payload_bits = integral_axis_value("payload_bits", value)?,
            AxisVariable::Log10Eps => c.target_bler = 10f64.powf(value),
        }
        c.validate()?;
        Ok(c)
    }
}

fn integral_axis_value(name: &str, v: f64) -> Result<u32, CliError> {
    let r = v.round();
    if (v - r).abs() > 1e-9 || !(1.0..=u32::MAX as f64).contains(&r) {
        return Err(CliError::config(
            &format!("sweep ({name})"),
            "grid point is not a positive integer",
        ));
    }
    Ok(r as u32)
}

/// Parses and validates a JSON scenario; errors name the offending field.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::config(&path, &e.into_inner().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn emit_config(cfg: &ScenarioConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("config serializes")
}

/// Applies `key=value` overrides with dotted keys. Values are read as JSON
/// when they parse, otherwise as bare strings.
pub fn apply_overrides(cfg: &ScenarioConfig, overrides: &[String]) -> Result<ScenarioConfig, CliError> {
    if overrides.is_empty() {
        return Ok(cfg.clone());
    }
    let mut doc = serde_json::to_value(cfg).expect("config serializes");
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| CliError::config(item, "override must look like key=value"))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        let mut node = &mut doc;
        let mut parts = key.split('.').peekable();
        while let Some(part) = parts.next() {
            if part.is_empty() {
                return Err(CliError::config(key, "empty path segment"));
            }
            if node.is_null() {
                *node = Value::Object(Default::default());
            }
            let obj = node
                .as_object_mut()
                .ok_or_else(|| CliError::config(key, "cannot descend into a non-object field"))?;
            if parts.peek().is_none() {
                obj.insert(part.to_string(), value.clone());
                break;
            }
            node = obj.entry(part).or_insert(Value::Null);
        }
    }
    parse_config(&doc.to_string())
}
