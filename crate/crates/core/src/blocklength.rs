//! Normal-approximation block error probability and its piecewise-linear
//! surrogate in the received SNR.

use std::f64::consts::{LN_2, LOG2_E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::special::q_unchecked;

/// Below this many channel uses the normal approximation is questionable.
pub const MIN_RECOMMENDED_BLOCKLENGTH: u32 = 100;

/// Payload and blocklength of one coded packet on one hop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodingSpec {
    payload_bits: u32,
    blocklength: u32,
}

impl CodingSpec {
    pub fn new(payload_bits: u32, blocklength: u32) -> Result<Self> {
        if payload_bits == 0 {
            return Err(domain("payload_bits", 0.0, "must be positive"));
        }
        if blocklength == 0 {
            return Err(domain("blocklength", 0.0, "must be positive"));
        }
        if blocklength < MIN_RECOMMENDED_BLOCKLENGTH {
            log::warn!(
                "blocklength {blocklength} is below {MIN_RECOMMENDED_BLOCKLENGTH} channel uses; \
                 the normal approximation may be inaccurate"
            );
        }
        Ok(Self {
            payload_bits,
            blocklength,
        })
    }

    /// Full-duplex relaying: each hop spans the whole frame of `frame_len` channel uses.
    pub fn full_duplex(payload_bits: u32, frame_len: u32) -> Result<Self> {
        Self::new(payload_bits, frame_len)
    }

    /// Half-duplex relaying: each hop gets half of an (even) frame.
    pub fn half_duplex(payload_bits: u32, frame_len: u32) -> Result<Self> {
        if frame_len % 2 != 0 {
            return Err(domain(
                "frame_len",
                frame_len as f64,
                "half-duplex frames must split into two equal slots",
            ));
        }
        Self::new(payload_bits, frame_len / 2)
    }

    pub fn payload_bits(&self) -> u32 {
        self.payload_bits
    }

    pub fn blocklength(&self) -> u32 {
        self.blocklength
    }

    /// Coding rate in bits per channel use.
    pub fn rate(&self) -> f64 {
        self.payload_bits as f64 / self.blocklength as f64
    }
}

/// Constants of the piecewise-linear error surrogate: it is 1 below `lower`,
/// 0 above `upper`, and falls linearly through 1/2 at `threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearApproxParams {
    /// Slope coefficient; the surrogate drops by `slope·√m` per unit SNR.
    pub slope: f64,
    /// SNR at which the capacity equals the rate.
    pub threshold: f64,
    pub lower: f64,
    pub upper: f64,
}

impl LinearApproxParams {
    /// `slope·√m`, the reciprocal of the transition width `upper - lower`.
    pub fn gradient(&self, blocklength: u32) -> f64 {
        self.slope * (blocklength as f64).sqrt()
    }
}

/// Shannon capacity `log2(1 + γ)`.
pub fn capacity(snr: f64) -> Result<f64> {
    check_snr(snr)?;
    Ok(snr.ln_1p() / LN_2)
}

/// Channel dispersion `(1 - (1+γ)^-2)·log2(e)²`.
pub fn dispersion(snr: f64) -> Result<f64> {
    check_snr(snr)?;
    Ok(dispersion_unchecked(snr))
}

fn check_snr(snr: f64) -> Result<()> {
    if snr.is_nan() || snr < 0.0 {
        return Err(domain("snr", snr, "must be non-negative"));
    }
    Ok(())
}

#[inline]
fn dispersion_unchecked(snr: f64) -> f64 {
    let shifted = 1.0 + snr;
    // 1 - 1/(1+γ)² written without cancellation for small γ
    snr * (2.0 + snr) / (shifted * shifted) * LOG2_E * LOG2_E
}

/// Normal-approximation block error probability at a fixed SNR.
///
/// At zero SNR the dispersion vanishes while the rate is positive, so the
/// packet is lost with certainty.
pub fn block_error_exact(snr: f64, spec: &CodingSpec) -> Result<f64> {
    check_snr(snr)?;
    Ok(block_error_unchecked(snr, spec))
}

#[inline]
pub(crate) fn block_error_unchecked(snr: f64, spec: &CodingSpec) -> f64 {
    if snr == 0.0 {
        return 1.0;
    }
    if snr == f64::INFINITY {
        return 0.0;
    }
    let gap = snr.ln_1p() / LN_2 - spec.rate();
    let spread = (dispersion_unchecked(snr) / spec.blocklength as f64).sqrt();
    q_unchecked(gap / spread)
}

pub fn linear_approx_params(spec: &CodingSpec) -> Result<LinearApproxParams> {
    let rate = spec.rate();
    if rate.is_nan() || rate <= 0.0 {
        return Err(domain("rate", rate, "must be positive"));
    }
    // 2^{2r} - 1 and 2^r - 1
    let root = (2.0 * rate * LN_2).exp_m1().sqrt();
    let threshold = (rate * LN_2).exp_m1();
    let slope = 1.0 / (2.0 * PI * root);
    let half_width = 1.0 / (2.0 * slope * (spec.blocklength as f64).sqrt());
    Ok(LinearApproxParams {
        slope,
        threshold,
        lower: threshold - half_width,
        upper: threshold + half_width,
    })
}

/// Piecewise-linear surrogate of [`block_error_exact`].
pub fn xi_approx(snr: f64, p: &LinearApproxParams, blocklength: u32) -> f64 {
    if snr <= p.lower {
        1.0
    } else if snr >= p.upper {
        0.0
    } else {
        (0.5 - p.gradient(blocklength) * (snr - p.threshold)).clamp(0.0, 1.0)
    }
}
