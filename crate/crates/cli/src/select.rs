//! Duplex-mode decision for a single BLER target.

use fblrelay_core::{avg_snrs, bler_fdr_closed, bler_hdr_closed, CodingSpec, DuplexComparison, SystemParams};

use crate::config::ScenarioConfig;
use crate::error::CliError;
use crate::output::{Cell, Record};

/// Closed-form BLERs of each mode at its own asymptotic minimum frame length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verification {
    pub frame_f: u32,
    pub frame_h: u32,
    pub eps_f: f64,
    pub eps_h: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectReport {
    pub target: f64,
    pub comparison: DuplexComparison,
    pub verification: Option<Verification>,
}

impl SelectReport {
    pub fn record(&self) -> Record {
        let c = &self.comparison;
        let mut cells = vec![
            ("target", Cell::Float(self.target)),
            ("a", Cell::Float(c.a)),
            ("b", Cell::Float(c.b)),
            ("eps_star", Cell::MaybeFloat(c.eps_star)),
            ("mode", Cell::Text(c.verdict.to_string())),
            ("delta_f", Cell::Float(c.delta_f)),
            ("delta_h", Cell::Float(c.delta_h)),
            ("delta_gap", Cell::Float(c.delta_gap)),
            ("ps_fdr", Cell::Float(c.fdr_powers.source)),
            ("pr_fdr", Cell::Float(c.fdr_powers.relay)),
            ("ps_hdr", Cell::Float(c.hdr_powers.source)),
            ("pr_hdr", Cell::Float(c.hdr_powers.relay)),
        ];
        if let Some(v) = &self.verification {
            cells.extend([
                ("frame_f", Cell::Float(v.frame_f as f64)),
                ("frame_h", Cell::Float(v.frame_h as f64)),
                ("eps_f_cf", Cell::Float(v.eps_f)),
                ("eps_h_cf", Cell::Float(v.eps_h)),
            ]);
        }
        Record(cells)
    }
}

fn frame_len(delta: f64, even: bool) -> Result<u32, CliError> {
    let mut m = delta.ceil().max(1.0);
    if even && m % 2.0 != 0.0 {
        m += 1.0;
    }
    if m > u32::MAX as f64 {
        return Err(CliError::Validation(format!(
            "implied frame of {delta:e} channel uses is too long to evaluate"
        )));
    }
    Ok(m as u32)
}

pub fn run_select(cfg: &ScenarioConfig, target: f64, verify: bool) -> Result<SelectReport, CliError> {
    if !(target > 0.0 && target < 1.0) {
        return Err(CliError::config("target", "must lie in (0, 1)"));
    }
    let propagation = cfg.propagation();
    let comparison = DuplexComparison::evaluate(target, cfg.payload_bits as f64, &propagation, &cfg.budget()?)?;
    let verification = if verify {
        let frame_f = frame_len(comparison.delta_f, false)?;
        let frame_h = frame_len(comparison.delta_h, true)?;
        let snrs = |p: fblrelay_core::PowerPair| {
            avg_snrs(&SystemParams {
                propagation,
                source_power: p.source,
                relay_power: p.relay,
            })
        };
        let eps_f = bler_fdr_closed(
            &snrs(comparison.fdr_powers)?,
            &CodingSpec::full_duplex(cfg.payload_bits, frame_f)?,
        )?;
        let eps_h = bler_hdr_closed(
            &snrs(comparison.hdr_powers)?,
            &CodingSpec::half_duplex(cfg.payload_bits, frame_h)?,
        )?;
        Some(Verification {
            frame_f,
            frame_h,
            eps_f: eps_f.value,
            eps_h: eps_h.value,
        })
    } else {
        None
    };
    Ok(SelectReport {
        target,
        comparison,
        verification,
    })
}
