//! Power allocation and the latency-driven choice between full- and
//! half-duplex relaying, all on the high-SNR asymptotes.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::channel::{DuplexMode, Propagation};
use crate::error::{domain, Error, Result};

/// Relative distance from the critical BLER treated as a tie.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Per-node peak transmit power in watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerBudget {
    peak: f64,
}

impl PowerBudget {
    pub fn new(peak: f64) -> Result<Self> {
        if peak > 0.0 && peak.is_finite() {
            Ok(Self { peak })
        } else {
            Err(domain("peak_power", peak, "must be positive and finite"))
        }
    }

    pub fn peak(&self) -> f64 {
        self.peak
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerPair {
    pub source: f64,
    pub relay: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Fdr,
    Hdr,
    Tie,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Fdr => "FDR",
            Verdict::Hdr => "HDR",
            Verdict::Tie => "tie",
        })
    }
}

/// Powers minimizing the full-duplex asymptote. The source always transmits
/// at full power; the relay trades its own link SNR against the loop
/// interference it causes.
pub fn optimal_powers_fdr(p: &Propagation, budget: &PowerBudget) -> Result<PowerPair> {
    p.validate()?;
    let pc = budget.peak();
    let relay = if p.omega_rr == 0.0 {
        pc
    } else {
        pc.min((pc * p.omega_sr * p.noise_d / (p.omega_rr * p.omega_rd)).sqrt())
    };
    Ok(PowerPair { source: pc, relay })
}

/// The half-duplex asymptote decreases in both powers, so both nodes use the peak.
pub fn optimal_powers_hdr(budget: &PowerBudget) -> PowerPair {
    PowerPair {
        source: budget.peak(),
        relay: budget.peak(),
    }
}

/// Full-duplex asymptote divided by `2^{σ/m} - 1`, at the optimal powers.
pub fn coeff_a(p: &Propagation, budget: &PowerBudget) -> Result<f64> {
    let pw = optimal_powers_fdr(p, budget)?;
    Ok(pw.relay * p.omega_rr / (pw.source * p.omega_sr) + p.noise_d / (pw.relay * p.omega_rd))
}

/// Half-duplex asymptote divided by `2^{2σ/m} - 1`, at the optimal powers.
pub fn coeff_b(p: &Propagation, budget: &PowerBudget) -> Result<f64> {
    p.validate()?;
    Ok((p.noise_r / p.omega_sr + p.noise_d / p.omega_rd) / budget.peak())
}

fn check_target(eps: f64) -> Result<()> {
    if eps == 0.0 {
        return Err(Error::Unbounded("minimum blocklength for a zero error target"));
    }
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(domain("eps", eps, "target BLER must lie in (0, 1)"))
    }
}

fn check_coeff(name: &'static str, c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(domain(name, c, "must be positive and finite"))
    }
}

/// Shortest frame, in channel uses, whose asymptotic BLER meets `eps`.
pub fn min_blocklength(eps: f64, payload_bits: f64, coeff: f64, mode: DuplexMode) -> Result<f64> {
    check_target(eps)?;
    check_coeff("coeff", coeff)?;
    if !(payload_bits >= 1.0 && payload_bits.is_finite()) {
        return Err(domain("payload_bits", payload_bits, "must be at least one bit"));
    }
    let bits = match mode {
        DuplexMode::Full => payload_bits,
        DuplexMode::Half => 2.0 * payload_bits,
    };
    Ok(bits * LN_2 / (eps / coeff).ln_1p())
}

/// Full-duplex minus half-duplex minimum frame length; negative when
/// full-duplex is faster.
pub fn delay_gap(eps: f64, payload_bits: f64, a: f64, b: f64) -> Result<f64> {
    let f = min_blocklength(eps, payload_bits, a, DuplexMode::Full)?;
    let h = min_blocklength(eps, payload_bits, b, DuplexMode::Half)?;
    Ok(f - h)
}

/// [`delay_gap`] rearranged over a common denominator, so that its sign is
/// carried by a single logarithm.
pub fn delay_gap_rearranged(eps: f64, payload_bits: f64, a: f64, b: f64) -> Result<f64> {
    check_target(eps)?;
    check_coeff("a", a)?;
    check_coeff("b", b)?;
    let x = eps / a;
    let y = eps / b;
    let lf = x.ln_1p();
    let lh = y.ln_1p();
    // ln[(1+y)/(1+x)²] = ln[1 + x(A/B - x - 2)/(1+x)²]
    let t = x * (a / b - x - 2.0) / ((1.0 + x) * (1.0 + x));
    let num = if t.abs() < 0.5 { t.ln_1p() } else { lh - 2.0 * lf };
    Ok(payload_bits * LN_2 * num / (lf * lh))
}

/// BLER target at which both modes need the same frame length; `None` when
/// full-duplex is faster for every target.
pub fn critical_bler(a: f64, b: f64) -> Result<Option<f64>> {
    check_coeff("a", a)?;
    check_coeff("b", b)?;
    Ok((a >= 2.0 * b).then(|| a / b * (a - 2.0 * b)))
}

/// Mode with the shorter minimum frame for `eps`.
pub fn select_mode(eps: f64, a: f64, b: f64) -> Result<Verdict> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(domain("eps", eps, "target BLER must lie in (0, 1)"));
    }
    Ok(match critical_bler(a, b)? {
        None => Verdict::Fdr,
        Some(star) if (eps - star).abs() <= TIE_TOLERANCE * star => Verdict::Tie,
        Some(star) if eps > star => Verdict::Fdr,
        Some(_) => Verdict::Hdr,
    })
}

/// Everything needed to compare the two modes at one BLER target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuplexComparison {
    pub a: f64,
    pub b: f64,
    pub delta_f: f64,
    pub delta_h: f64,
    pub delta_gap: f64,
    pub eps_star: Option<f64>,
    pub verdict: Verdict,
    pub fdr_powers: PowerPair,
    pub hdr_powers: PowerPair,
}

impl DuplexComparison {
    pub fn evaluate(eps: f64, payload_bits: f64, p: &Propagation, budget: &PowerBudget) -> Result<Self> {
        let a = coeff_a(p, budget)?;
        let b = coeff_b(p, budget)?;
        let delta_f = min_blocklength(eps, payload_bits, a, DuplexMode::Full)?;
        let delta_h = min_blocklength(eps, payload_bits, b, DuplexMode::Half)?;
        Ok(Self {
            a,
            b,
            delta_f,
            delta_h,
            delta_gap: delta_f - delta_h,
            eps_star: critical_bler(a, b)?,
            verdict: select_mode(eps, a, b)?,
            fdr_powers: optimal_powers_fdr(p, budget)?,
            hdr_powers: optimal_powers_hdr(budget),
        })
    }
}
