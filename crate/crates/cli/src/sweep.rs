//! BLER and minimum-delay sweeps over one configuration axis.

use fblrelay_core::{
    avg_snrs, bler_fdr_asymptotic, bler_fdr_closed, bler_hdr_asymptotic, bler_hdr_closed, bler_monte_carlo,
    BlerEstimate, DuplexComparison, DuplexMode,
};
use rayon::prelude::*;

use crate::config::{AxisVariable, ScenarioConfig, SweepAxis};
use crate::error::CliError;
use crate::output::{Cell, Record};

pub const BLER_HEADER: [&str; 10] = [
    "axis",
    "eps_f_cf",
    "eps_h_cf",
    "eps_f_asym",
    "eps_h_asym",
    "eps_f_mc",
    "eps_f_ci",
    "eps_h_mc",
    "eps_h_ci",
    "clamped",
];

pub const DELAY_HEADER: [&str; 5] = ["eps", "delta_f", "delta_h", "delta_gap", "winner"];

pub fn default_bler_axis() -> SweepAxis {
    SweepAxis {
        variable: AxisVariable::PsDbm,
        start: 0.0,
        stop: 40.0,
        step: 1.0,
    }
}

pub fn default_delay_axis() -> SweepAxis {
    SweepAxis {
        variable: AxisVariable::Log10Eps,
        start: -7.0,
        stop: -1.0,
        step: 0.1,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlerRow {
    pub axis: f64,
    pub fdr_closed: BlerEstimate,
    pub hdr_closed: BlerEstimate,
    pub fdr_asymptotic: BlerEstimate,
    pub hdr_asymptotic: BlerEstimate,
    pub fdr_mc: Option<BlerEstimate>,
    pub hdr_mc: Option<BlerEstimate>,
}

impl BlerRow {
    pub fn clamped(&self) -> bool {
        [
            self.fdr_closed,
            self.hdr_closed,
            self.fdr_asymptotic,
            self.hdr_asymptotic,
        ]
        .iter()
        .any(|e| e.clamped)
    }

    pub fn record(&self) -> Record {
        let mc = |e: &Option<BlerEstimate>| (e.map(|e| e.value), e.map(|e| e.ci_halfwidth));
        let (f_mc, f_ci) = mc(&self.fdr_mc);
        let (h_mc, h_ci) = mc(&self.hdr_mc);
        let cells = [
            Cell::Float(self.axis),
            Cell::Float(self.fdr_closed.value),
            Cell::Float(self.hdr_closed.value),
            Cell::Float(self.fdr_asymptotic.value),
            Cell::Float(self.hdr_asymptotic.value),
            Cell::MaybeFloat(f_mc),
            Cell::MaybeFloat(f_ci),
            Cell::MaybeFloat(h_mc),
            Cell::MaybeFloat(h_ci),
            Cell::Bool(self.clamped()),
        ];
        Record(BLER_HEADER.into_iter().zip(cells).collect())
    }
}

/// All BLER evaluators at the single operating point described by `cfg`.
pub fn bler_point(cfg: &ScenarioConfig, axis: f64) -> Result<BlerRow, CliError> {
    let (sys_f, sys_h) = cfg.systems()?;
    let (spec_f, spec_h) = cfg.coding()?;
    let s_f = avg_snrs(&sys_f)?;
    let s_h = avg_snrs(&sys_h)?;
    let mc = &cfg.monte_carlo;
    let (fdr_mc, hdr_mc) = if mc.samples == 0 {
        (None, None)
    } else {
        (
            Some(bler_monte_carlo(&s_f, DuplexMode::Full, &spec_f, mc.samples, mc.seed)?),
            Some(bler_monte_carlo(&s_h, DuplexMode::Half, &spec_h, mc.samples, mc.seed)?),
        )
    };
    Ok(BlerRow {
        axis,
        fdr_closed: bler_fdr_closed(&s_f, &spec_f)?,
        hdr_closed: bler_hdr_closed(&s_h, &spec_h)?,
        fdr_asymptotic: bler_fdr_asymptotic(&s_f, cfg.payload_bits, cfg.blocklength)?,
        hdr_asymptotic: bler_hdr_asymptotic(&sys_h, cfg.payload_bits, cfg.blocklength)?,
        fdr_mc,
        hdr_mc,
    })
}

pub fn run_bler_sweep(cfg: &ScenarioConfig) -> Result<Vec<BlerRow>, CliError> {
    let axis = cfg.sweep.unwrap_or_else(default_bler_axis);
    if axis.variable == AxisVariable::Log10Eps {
        return Err(CliError::config(
            "sweep.variable",
            "bler-sweep cannot sweep the BLER target",
        ));
    }
    let points = axis
        .points()
        .into_iter()
        .map(|v| cfg.at(axis.variable, v).map(|c| (v, c)))
        .collect::<Result<Vec<_>, _>>()?;
    points.par_iter().map(|(v, c)| bler_point(c, *v)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelayRow {
    pub eps: f64,
    pub comparison: DuplexComparison,
}

impl DelayRow {
    pub fn record(&self) -> Record {
        let c = &self.comparison;
        let cells = [
            Cell::Float(self.eps),
            Cell::Float(c.delta_f),
            Cell::Float(c.delta_h),
            Cell::Float(c.delta_gap),
            Cell::Text(c.verdict.to_string()),
        ];
        Record(DELAY_HEADER.into_iter().zip(cells).collect())
    }
}

pub fn run_delay_sweep(cfg: &ScenarioConfig) -> Result<Vec<DelayRow>, CliError> {
    let axis = cfg.sweep.unwrap_or_else(default_delay_axis);
    if axis.variable != AxisVariable::Log10Eps {
        return Err(CliError::config("sweep.variable", "delay-sweep runs over log10_eps"));
    }
    let propagation = cfg.propagation();
    let budget = cfg.budget()?;
    axis.points()
        .into_iter()
        .map(|v| {
            let c = cfg.at(axis.variable, v)?;
            let comparison = DuplexComparison::evaluate(c.target_bler, c.payload_bits as f64, &propagation, &budget)?;
            Ok(DelayRow {
                eps: c.target_bler,
                comparison,
            })
        })
        .collect()
}
