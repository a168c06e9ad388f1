//! Link SNRs of the three-node relay network under quasi-static Rayleigh
//! fading, their distributions, and reproducible sampling.
//!
//! All quantities here are linear (watts, power ratios). The relay input of a
//! full-duplex relay sees `γ̄_SR·X / (γ̄_RR·Y + 1)` with `X, Y` unit
//! exponentials; every other link SNR is `γ̄·X`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Draws per independently seeded chunk. Part of the reproducibility
/// contract: changing it changes every Monte Carlo result.
pub const CHUNK_LEN: usize = 8192;

/// Average channel power gains and receiver noise powers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Propagation {
    pub omega_sr: f64,
    pub omega_rd: f64,
    /// Residual loop-interference gain at the relay; zero means perfect cancellation.
    pub omega_rr: f64,
    pub noise_r: f64,
    pub noise_d: f64,
}

impl Propagation {
    pub fn validate(&self) -> Result<()> {
        positive("omega_sr", self.omega_sr)?;
        positive("omega_rd", self.omega_rd)?;
        non_negative("omega_rr", self.omega_rr)?;
        positive("noise_r", self.noise_r)?;
        positive("noise_d", self.noise_d)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub propagation: Propagation,
    pub source_power: f64,
    pub relay_power: f64,
}

/// Average link SNRs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AvgSnrs {
    pub sr: f64,
    pub rd: f64,
    pub rr: f64,
}

impl AvgSnrs {
    pub fn new(sr: f64, rd: f64, rr: f64) -> Result<Self> {
        let s = Self { sr, rd, rr };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        positive("avg_snr_sr", self.sr)?;
        positive("avg_snr_rd", self.rd)?;
        non_negative("avg_snr_rr", self.rr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DuplexMode {
    #[serde(rename = "fdr")]
    Full,
    #[serde(rename = "hdr")]
    Half,
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(domain(name, v, "must be positive and finite"))
    }
}

fn non_negative(name: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(domain(name, v, "must be non-negative and finite"))
    }
}

/// Average SNRs of the S–R, R–D and R–R links.
///
/// Zero transmit powers are passed through; evaluators reject the resulting
/// zero average SNRs.
pub fn avg_snrs(sys: &SystemParams) -> Result<AvgSnrs> {
    let p = &sys.propagation;
    p.validate()?;
    non_negative("source_power", sys.source_power)?;
    non_negative("relay_power", sys.relay_power)?;
    Ok(AvgSnrs {
        sr: sys.source_power * p.omega_sr / p.noise_r,
        rd: sys.relay_power * p.omega_rd / p.noise_d,
        rr: sys.relay_power * p.omega_rr / p.noise_r,
    })
}

/// Distribution of an instantaneous link SNR.
pub trait SnrDistribution {
    /// CDF at `x >= 0`.
    fn cdf(&self, x: f64) -> f64;
}

/// `γ̄·X` with `X` a unit exponential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rayleigh {
    pub mean: f64,
}

impl SnrDistribution for Rayleigh {
    fn cdf(&self, x: f64) -> f64 {
        -(-x / self.mean).exp_m1()
    }
}

/// SINR at a full-duplex relay, `γ̄_SR·X / (γ̄_RR·Y + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaySinr {
    pub sr: f64,
    pub rr: f64,
}

impl SnrDistribution for RelaySinr {
    fn cdf(&self, x: f64) -> f64 {
        // P(X <= x(γ̄_RR·Y + 1)/γ̄_SR) averaged over Y:
        // 1 - e^{-x/γ̄_SR} / (1 + ρx), ρ = γ̄_RR/γ̄_SR
        let rho_x = self.rr / self.sr * x;
        let num = rho_x - (-x / self.sr).exp_m1();
        (num / (1.0 + rho_x)).min(1.0)
    }
}

/// Interference-limited approximation of [`RelaySinr`], linear in `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaySinrHighSnr {
    pub sr: f64,
    pub rr: f64,
}

impl SnrDistribution for RelaySinrHighSnr {
    fn cdf(&self, x: f64) -> f64 {
        (self.rr / self.sr * x).clamp(0.0, 1.0)
    }
}

fn check_x(x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        Err(domain("x", x, "SNR argument must be non-negative"))
    } else {
        Ok(())
    }
}

pub fn cdf_fdr_relay_sinr(x: f64, s: &AvgSnrs) -> Result<f64> {
    check_x(x)?;
    positive("avg_snr_sr", s.sr)?;
    non_negative("avg_snr_rr", s.rr)?;
    Ok(RelaySinr { sr: s.sr, rr: s.rr }.cdf(x))
}

pub fn cdf_exponential(x: f64, mean: f64) -> Result<f64> {
    check_x(x)?;
    positive("mean", mean)?;
    Ok(Rayleigh { mean }.cdf(x))
}

pub fn cdf_fdr_relay_sinr_highsnr(x: f64, s: &AvgSnrs) -> Result<f64> {
    check_x(x)?;
    positive("avg_snr_sr", s.sr)?;
    non_negative("avg_snr_rr", s.rr)?;
    Ok(RelaySinrHighSnr { sr: s.sr, rr: s.rr }.cdf(x))
}

/// Instantaneous SNRs at the relay and the destination for one block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkSnrs {
    pub relay: f64,
    pub destination: f64,
}

/// Generator for chunk `chunk` of the stream identified by `seed`.
pub(crate) fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

#[inline]
fn unit_exponential(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.gen();
    -(-u).ln_1p()
}

#[inline]
pub(crate) fn draw(rng: &mut ChaCha8Rng, s: &AvgSnrs, mode: DuplexMode) -> LinkSnrs {
    match mode {
        DuplexMode::Full => {
            let x = unit_exponential(rng);
            let y = unit_exponential(rng);
            let z = unit_exponential(rng);
            LinkSnrs {
                relay: s.sr * x / (s.rr * y + 1.0),
                destination: s.rd * z,
            }
        }
        DuplexMode::Half => {
            let x = unit_exponential(rng);
            let y = unit_exponential(rng);
            LinkSnrs {
                relay: s.sr * x,
                destination: s.rd * y,
            }
        }
    }
}

/// Runs `f` on every chunk of an `n`-draw stream and returns the per-chunk
/// results in chunk order. Chunks may run on any number of threads; the
/// output depends only on `(seed, n)`.
pub(crate) fn map_chunks<T, F>(n: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK_LEN);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK_LEN.min(n - c * CHUNK_LEN);
            let mut rng = chunk_rng(seed, c as u64);
            f(&mut rng, len)
        })
        .collect()
}

/// `n` independent block-fading realizations for the given duplex mode.
pub fn sample_link_snrs(s: &AvgSnrs, mode: DuplexMode, n: usize, seed: u64) -> Result<Vec<LinkSnrs>> {
    if n == 0 {
        return Err(domain("n", 0.0, "need at least one draw"));
    }
    s.validate()?;
    let chunks = map_chunks(n, seed, |rng, len| {
        (0..len).map(|_| draw(rng, s, mode)).collect::<Vec<_>>()
    });
    Ok(chunks.into_iter().flatten().collect())
}
