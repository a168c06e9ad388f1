//! Cross-checks of the closed forms against quadrature, simulation, their
//! asymptotes and the mode-selection threshold at a configured scenario.

use fblrelay_core::{
    avg_snrs, coeff_a, coeff_b, critical_bler, delay_gap, hop_bler_fdr_sr_closed, hop_bler_quadrature,
    hop_bler_rayleigh_closed, linear_approx_params, select_mode, AvgSnrs, Rayleigh, RelaySinr, SnrDistribution,
    Verdict,
};

use crate::config::{OptimalTag, RelayPower, ScenarioConfig};
use crate::error::CliError;
use crate::output::{fmt_float, Cell, Record};
use crate::sweep::bler_point;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// The check could not be evaluated.
    pub numerical_error: bool,
    pub detail: String,
}

impl Check {
    fn from_result(name: &'static str, r: Result<(bool, String), CliError>) -> Self {
        match r {
            Ok((passed, detail)) => Check {
                name,
                passed,
                numerical_error: false,
                detail,
            },
            Err(e) => Check {
                name,
                passed: false,
                numerical_error: true,
                detail: e.to_string(),
            },
        }
    }

    pub fn record(&self) -> Record {
        Record(vec![
            ("check", Cell::Text(self.name.to_string())),
            ("passed", Cell::Bool(self.passed)),
            ("detail", Cell::Text(self.detail.clone())),
        ])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// The error to exit with, if any check failed.
    pub fn failure(&self) -> Option<CliError> {
        let failed: Vec<_> = self.checks.iter().filter(|c| !c.passed).collect();
        if failed.is_empty() {
            return None;
        }
        let names = failed.iter().map(|c| c.name).collect::<Vec<_>>().join(", ");
        if let Some(c) = failed.iter().find(|c| c.numerical_error) {
            Some(CliError::Numerical(fblrelay_core::Error::Convergence {
                what: c.name,
                detail: c.detail.clone(),
            }))
        } else {
            Some(CliError::Validation(names))
        }
    }
}

/// Relative agreement required between the closed forms and quadrature.
pub const QUADRATURE_RTOL: f64 = 1e-6;
/// Absolute floor of the Monte Carlo acceptance band.
pub const MC_FLOOR: f64 = 0.005;
/// Monte Carlo estimates below this are not compared.
pub const MC_MIN_BLER: f64 = 1e-3;
pub const ASYMPTOTE_RTOL: f64 = 0.10;

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn quadrature_vs_closed_form(cfg: &ScenarioConfig) -> Result<(bool, String), CliError> {
    let (sys_f, sys_h) = cfg.systems()?;
    let (spec_f, spec_h) = cfg.coding()?;
    let s_f = avg_snrs(&sys_f)?;
    let s_h = avg_snrs(&sys_h)?;
    let mut worst: f64 = 0.0;
    for (spec, s, full) in [(spec_f, s_f, true), (spec_h, s_h, false)] {
        let p = linear_approx_params(&spec)?;
        let m = spec.blocklength();
        let mut pairs = Vec::new();
        if full {
            let cdf = RelaySinr { sr: s.sr, rr: s.rr };
            pairs.push((
                hop_bler_fdr_sr_closed(&s, &p, m)?,
                hop_bler_quadrature(|x| cdf.cdf(x), &p, m, cfg.quad_tol)?,
            ));
        } else {
            let cdf = Rayleigh { mean: s.sr };
            pairs.push((
                hop_bler_rayleigh_closed(s.sr, &p, m)?,
                hop_bler_quadrature(|x| cdf.cdf(x), &p, m, cfg.quad_tol)?,
            ));
        }
        let cdf = Rayleigh { mean: s.rd };
        pairs.push((
            hop_bler_rayleigh_closed(s.rd, &p, m)?,
            hop_bler_quadrature(|x| cdf.cdf(x), &p, m, cfg.quad_tol)?,
        ));
        for (cf, q) in pairs {
            if !cf.clamped && !q.clamped {
                worst = worst.max(rel_err(cf.value, q.value));
            }
        }
    }
    Ok((
        worst <= QUADRATURE_RTOL,
        format!(
            "max relative error {} (limit {})",
            fmt_float(worst),
            fmt_float(QUADRATURE_RTOL)
        ),
    ))
}

fn monte_carlo_vs_closed_form(cfg: &ScenarioConfig) -> Result<(bool, String), CliError> {
    if cfg.monte_carlo.samples == 0 {
        return Ok((true, "skipped: no Monte Carlo samples configured".into()));
    }
    let row = bler_point(cfg, cfg.ps_dbm)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for (label, cf, mc) in [("fdr", row.fdr_closed, row.fdr_mc), ("hdr", row.hdr_closed, row.hdr_mc)] {
        let mc = mc.expect("samples configured");
        let band = (3.0 * mc.ci_halfwidth).max(MC_FLOOR);
        let within = mc.value < MC_MIN_BLER || (cf.value - mc.value).abs() <= band;
        ok &= within;
        parts.push(format!(
            "{label}: closed {} vs simulated {} +/- {}",
            fmt_float(cf.value),
            fmt_float(mc.value),
            fmt_float(band)
        ));
    }
    Ok((ok, parts.join("; ")))
}

/// Asymptote-to-closed-form deviation at source power `ps_dbm` with the
/// per-mode optimal relay power.
pub fn asymptote_deviation(cfg: &ScenarioConfig, ps_dbm: f64) -> Result<(f64, f64), CliError> {
    let mut c = cfg.clone();
    c.ps_dbm = ps_dbm;
    c.pr_dbm = RelayPower::Optimal(OptimalTag::Optimal);
    c.monte_carlo.samples = 0;
    let row = bler_point(&c, ps_dbm)?;
    Ok((
        (row.fdr_asymptotic.value / row.fdr_closed.value - 1.0).abs(),
        (row.hdr_asymptotic.value / row.hdr_closed.value - 1.0).abs(),
    ))
}

fn asymptote_convergence(cfg: &ScenarioConfig) -> Result<(bool, String), CliError> {
    let devs = (25..=40)
        .map(|p| asymptote_deviation(cfg, p as f64))
        .collect::<Result<Vec<_>, _>>()?;
    let monotone_h = devs.windows(2).all(|w| w[1].1 <= w[0].1);
    let (end_f, end_h) = devs[devs.len() - 1];
    let hdr_ok = monotone_h && end_h <= ASYMPTOTE_RTOL;
    // The FDR asymptote keeps only the loop-interference term of the first hop.
    if cfg.omega_rr_db.is_none() {
        return Ok((
            hdr_ok,
            format!(
                "deviation at 40 dBm: hdr {}; non-increasing from 25 dBm: hdr {monotone_h}; fdr not applicable without loop interference",
                fmt_float(end_h)
            ),
        ));
    }
    let monotone_f = devs.windows(2).all(|w| w[1].0 <= w[0].0);
    let ok = hdr_ok && monotone_f && end_f <= ASYMPTOTE_RTOL;
    Ok((
        ok,
        format!(
            "deviation at 40 dBm: fdr {} hdr {}; non-increasing from 25 dBm: fdr {monotone_f} hdr {monotone_h}",
            fmt_float(end_f),
            fmt_float(end_h)
        ),
    ))
}

fn interference_free_reduction(cfg: &ScenarioConfig) -> Result<(bool, String), CliError> {
    let (sys_f, _) = cfg.systems()?;
    let (spec_f, _) = cfg.coding()?;
    let s = avg_snrs(&sys_f)?;
    let clean = AvgSnrs::new(s.sr, s.rd, 0.0)?;
    let p = linear_approx_params(&spec_f)?;
    let m = spec_f.blocklength();
    let fdr = hop_bler_fdr_sr_closed(&clean, &p, m)?;
    let ray = hop_bler_rayleigh_closed(s.sr, &p, m)?;
    let cdf = RelaySinr { sr: s.sr, rr: 0.0 };
    let q = hop_bler_quadrature(|x| cdf.cdf(x), &p, m, cfg.quad_tol)?;
    let err = rel_err(fdr.value, q.value);
    Ok((
        fdr == ray && err <= QUADRATURE_RTOL,
        format!(
            "closed {} rayleigh {} quadrature {}",
            fmt_float(fdr.value),
            fmt_float(ray.value),
            fmt_float(q.value)
        ),
    ))
}

/// Root of `delay_gap` in `(0, 1)` by bisection on a log scale, if it changes sign.
pub fn bisect_gap_root(sigma: f64, a: f64, b: f64) -> Result<Option<f64>, CliError> {
    let gap = |log_eps: f64| delay_gap(log_eps.exp(), sigma, a, b);
    let (mut lo, mut hi) = ((1e-300f64).ln(), (1.0 - 1e-12f64).ln());
    if gap(lo)? <= 0.0 || gap(hi)? >= 0.0 {
        return Ok(None);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some((0.5 * (lo + hi)).exp()))
}

fn critical_bler_root(cfg: &ScenarioConfig) -> Result<(bool, String), CliError> {
    let p = cfg.propagation();
    let budget = cfg.budget()?;
    let (a, b) = (coeff_a(&p, &budget)?, coeff_b(&p, &budget)?);
    let sigma = cfg.payload_bits as f64;
    let star = critical_bler(a, b)?;
    let root = bisect_gap_root(sigma, a, b)?;
    match (star, root) {
        (Some(s), Some(r)) => {
            let err = rel_err(s, r);
            let flips = select_mode((s * (1.0 - 1e-6)).min(1.0 - 1e-12), a, b)? == Verdict::Hdr
                && (s * (1.0 + 1e-6) >= 1.0 || select_mode(s * (1.0 + 1e-6), a, b)? == Verdict::Fdr);
            Ok((
                err <= 1e-9 && flips,
                format!(
                    "critical {} root {} relative error {}",
                    fmt_float(s),
                    fmt_float(r),
                    fmt_float(err)
                ),
            ))
        }
        (None, None) => {
            let always_fdr = (0..=60)
                .map(|k| 10f64.powf(-7.0 + 0.1 * k as f64))
                .map(|e| Ok(delay_gap(e, sigma, a, b)? < 0.0 && select_mode(e, a, b)? == Verdict::Fdr))
                .collect::<Result<Vec<bool>, CliError>>()?
                .into_iter()
                .all(|x| x);
            Ok((
                always_fdr,
                format!("no critical BLER (a {} < 2b {})", fmt_float(a), fmt_float(2.0 * b)),
            ))
        }
        (Some(s), None) if s >= 1.0 => Ok((true, format!("critical {} lies outside (0, 1)", fmt_float(s)))),
        (s, r) => Ok((false, format!("critical {s:?} but gap root {r:?}"))),
    }
}

pub fn run_validate(cfg: &ScenarioConfig) -> ValidationReport {
    let checks = vec![
        Check::from_result("quadrature_vs_closed_form", quadrature_vs_closed_form(cfg)),
        Check::from_result("monte_carlo_vs_closed_form", monte_carlo_vs_closed_form(cfg)),
        Check::from_result("asymptote_convergence", asymptote_convergence(cfg)),
        Check::from_result("interference_free_reduction", interference_free_reduction(cfg)),
        Check::from_result("critical_bler_root", critical_bler_root(cfg)),
    ];
    ValidationReport { checks }
}
