//! Block error rates of a decode-and-forward relay link: closed forms built on
//! the piecewise-linear error surrogate, their high-SNR asymptotes, a generic
//! quadrature evaluator, and a Monte Carlo reference.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::blocklength::{block_error_unchecked, linear_approx_params, CodingSpec, LinearApproxParams};
use crate::channel::{avg_snrs, draw, map_chunks, AvgSnrs, DuplexMode, SystemParams};
use crate::error::{domain, Result};
use crate::quadrature::{integrate, DEFAULT_MAX_EVALS};
use crate::special::{centered_e1_integral, Accuracy};

/// Smallest Monte Carlo sample size accepted by [`bler_monte_carlo`].
pub const MIN_MC_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Asymptotic,
    Quadrature,
    MonteCarlo,
}

/// A block error rate together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlerEstimate {
    pub value: f64,
    pub method: Method,
    /// 95% confidence half-width; zero for deterministic methods.
    pub ci_halfwidth: f64,
    /// Set when the unclamped formula left `[0, 1]`.
    pub clamped: bool,
}

impl BlerEstimate {
    fn from_raw(raw: f64, method: Method) -> Self {
        debug_assert!(!raw.is_nan());
        let value = raw.clamp(0.0, 1.0);
        Self {
            value,
            method,
            ci_halfwidth: 0.0,
            clamped: value != raw,
        }
    }
}

fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(domain(name, p, "must lie in [0, 1]"))
    }
}

fn check_mean(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 {
        Ok(())
    } else {
        Err(domain(name, v, "must be positive"))
    }
}

/// End-to-end error of two decode-and-forward hops: the packet is lost if
/// the relay fails, or if the relay succeeds and the destination fails.
pub fn combine_df(first: f64, second: f64) -> Result<f64> {
    check_probability("first", first)?;
    check_probability("second", second)?;
    Ok(first + (1.0 - first) * second)
}

/// `∫ F(x) dx` under the linear surrogate, scaled by its gradient, for an
/// arbitrary SNR distribution. The lower limit is clipped at zero since SNRs
/// are non-negative.
pub fn hop_bler_quadrature<F>(cdf: F, p: &LinearApproxParams, blocklength: u32, tol: f64) -> Result<BlerEstimate>
where
    F: Fn(f64) -> f64,
{
    if p.upper.is_nan() || p.upper <= 0.0 {
        return Err(domain("upper", p.upper, "surrogate support lies below zero SNR"));
    }
    let lo = p.lower.max(0.0);
    let integral = integrate(cdf, lo, p.upper, tol, DEFAULT_MAX_EVALS)?;
    let raw = p.gradient(blocklength) * integral.value;
    Ok(BlerEstimate::from_raw(raw, Method::Quadrature))
}

/// Width of the integration interval and the surrogate mass over it.
fn support(p: &LinearApproxParams, blocklength: u32) -> (f64, f64, f64) {
    let lo = p.lower.max(0.0);
    let width = p.upper - lo;
    let mass = if p.lower >= 0.0 {
        1.0
    } else {
        p.gradient(blocklength) * width
    };
    (lo, width, mass)
}

/// `1 - (1 - e^{-x})/x`.
fn psi(x: f64) -> f64 {
    if x < 1.0 {
        // x/2! - x²/3! + x³/4! - ...
        let mut term = x / 2.0;
        let mut sum = term;
        let mut n = 2.0;
        while term.abs() > 1e-17 * sum.abs() {
            n += 1.0;
            term *= -x / n;
            sum += term;
        }
        sum
    } else {
        (x + (-x).exp_m1()) / x
    }
}

/// Hop error over a Rayleigh link with mean SNR `mean`.
pub fn hop_bler_rayleigh_closed(mean: f64, p: &LinearApproxParams, blocklength: u32) -> Result<BlerEstimate> {
    check_mean("mean", mean)?;
    let (lo, width, mass) = support(p, blocklength);
    let a = lo / mean;
    let raw = mass * (-(-a).exp_m1() + (-a).exp() * psi(width / mean));
    Ok(BlerEstimate::from_raw(raw, Method::ClosedForm))
}

/// Hop error into a full-duplex relay limited by residual loop interference.
/// Without loop interference this is the Rayleigh hop.
pub fn hop_bler_fdr_sr_closed(s: &AvgSnrs, p: &LinearApproxParams, blocklength: u32) -> Result<BlerEstimate> {
    check_mean("avg_snr_sr", s.sr)?;
    if s.rr.is_nan() || s.rr < 0.0 {
        return Err(domain("avg_snr_rr", s.rr, "must be non-negative"));
    }
    if s.rr == 0.0 {
        return hop_bler_rayleigh_closed(s.sr, p, blocklength);
    }
    let (lo, width, mass) = support(p, blocklength);
    // e^{w} ∫_u^v e^{-t}/t dt with u, v = x/γ̄_SR + w at the two ends and
    // w = 1/γ̄_RR, written about the centre of [u, v]
    let offset = 0.5 * (lo + p.upper) / s.sr;
    let tail = centered_e1_integral(-offset, 1.0 / s.rr + offset, 0.5 * width / s.sr, &Accuracy::precise())?;
    let raw = mass - p.gradient(blocklength) * (s.sr / s.rr) * tail;
    Ok(BlerEstimate::from_raw(raw, Method::ClosedForm))
}

fn combine_estimates(first: BlerEstimate, second: BlerEstimate, method: Method) -> Result<BlerEstimate> {
    let value = combine_df(first.value, second.value)?;
    Ok(BlerEstimate {
        value,
        method,
        ci_halfwidth: 0.0,
        clamped: first.clamped || second.clamped,
    })
}

/// End-to-end error of full-duplex relaying; `spec` spans the whole frame.
pub fn bler_fdr_closed(s: &AvgSnrs, spec: &CodingSpec) -> Result<BlerEstimate> {
    s.validate()?;
    let p = linear_approx_params(spec)?;
    let m = spec.blocklength();
    let sr = hop_bler_fdr_sr_closed(s, &p, m)?;
    let rd = hop_bler_rayleigh_closed(s.rd, &p, m)?;
    combine_estimates(sr, rd, Method::ClosedForm)
}

/// End-to-end error of half-duplex relaying; `spec` is the per-hop slot.
pub fn bler_hdr_closed(s: &AvgSnrs, spec: &CodingSpec) -> Result<BlerEstimate> {
    s.validate()?;
    let p = linear_approx_params(spec)?;
    let m = spec.blocklength();
    let sr = hop_bler_rayleigh_closed(s.sr, &p, m)?;
    let rd = hop_bler_rayleigh_closed(s.rd, &p, m)?;
    combine_estimates(sr, rd, Method::ClosedForm)
}

/// `2^{bits/uses} - 1`.
fn rate_threshold(bits: f64, uses: f64) -> f64 {
    (bits / uses * LN_2).exp_m1()
}

fn check_code(payload_bits: u32, frame_len: u32) -> Result<()> {
    if payload_bits == 0 {
        return Err(domain("payload_bits", 0.0, "must be positive"));
    }
    if frame_len == 0 {
        return Err(domain("frame_len", 0.0, "must be positive"));
    }
    Ok(())
}

/// High-SNR asymptote of [`bler_fdr_closed`] for a frame of `frame_len` uses.
pub fn bler_fdr_asymptotic(s: &AvgSnrs, payload_bits: u32, frame_len: u32) -> Result<BlerEstimate> {
    s.validate()?;
    check_code(payload_bits, frame_len)?;
    let raw = (s.rr / s.sr + 1.0 / s.rd) * rate_threshold(payload_bits as f64, frame_len as f64);
    Ok(BlerEstimate::from_raw(raw, Method::Asymptotic))
}

/// High-SNR asymptote of [`bler_hdr_closed`] for a frame of `frame_len` uses.
pub fn bler_hdr_asymptotic(sys: &SystemParams, payload_bits: u32, frame_len: u32) -> Result<BlerEstimate> {
    let s = avg_snrs(sys)?;
    s.validate()?;
    check_code(payload_bits, frame_len)?;
    let p = &sys.propagation;
    let inv = p.noise_r / (sys.source_power * p.omega_sr) + p.noise_d / (sys.relay_power * p.omega_rd);
    let raw = inv * rate_threshold(2.0 * payload_bits as f64, frame_len as f64);
    Ok(BlerEstimate::from_raw(raw, Method::Asymptotic))
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.n == 0.0 {
            return other;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Self {
            n,
            mean: self.mean + d * other.n / n,
            m2: self.m2 + other.m2 + d * d * self.n * other.n / n,
        }
    }

    fn estimate(&self) -> BlerEstimate {
        let var = if self.n > 1.0 { self.m2 / (self.n - 1.0) } else { 0.0 };
        BlerEstimate {
            value: self.mean.clamp(0.0, 1.0),
            method: Method::MonteCarlo,
            ci_halfwidth: 1.96 * (var / self.n).sqrt(),
            clamped: false,
        }
    }
}

/// Monte Carlo estimates of each hop and of the end-to-end error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloBreakdown {
    pub source_relay: BlerEstimate,
    pub relay_destination: BlerEstimate,
    pub end_to_end: BlerEstimate,
}

/// Averages the normal-approximation error over `n` fading draws.
///
/// `spec` is the per-hop code: the full frame for [`DuplexMode::Full`], one
/// slot for [`DuplexMode::Half`]. The result depends only on the inputs,
/// `n` and `seed`, never on the thread count.
pub fn monte_carlo_breakdown(
    s: &AvgSnrs,
    mode: DuplexMode,
    spec: &CodingSpec,
    n: usize,
    seed: u64,
) -> Result<MonteCarloBreakdown> {
    if n < MIN_MC_SAMPLES {
        return Err(domain("n", n as f64, "need at least 10^4 Monte Carlo draws"));
    }
    s.validate()?;
    let chunks = map_chunks(n, seed, |rng, len| {
        let mut acc = [Moments::default(); 3];
        for _ in 0..len {
            let snr = draw(rng, s, mode);
            let e1 = block_error_unchecked(snr.relay, spec);
            let e2 = block_error_unchecked(snr.destination, spec);
            acc[0].push(e1);
            acc[1].push(e2);
            acc[2].push(e1 + (1.0 - e1) * e2);
        }
        acc
    });
    let total = chunks.into_iter().fold([Moments::default(); 3], |t, c| {
        [t[0].merge(c[0]), t[1].merge(c[1]), t[2].merge(c[2])]
    });
    Ok(MonteCarloBreakdown {
        source_relay: total[0].estimate(),
        relay_destination: total[1].estimate(),
        end_to_end: total[2].estimate(),
    })
}

/// End-to-end Monte Carlo error; see [`monte_carlo_breakdown`].
pub fn bler_monte_carlo(s: &AvgSnrs, mode: DuplexMode, spec: &CodingSpec, n: usize, seed: u64) -> Result<BlerEstimate> {
    Ok(monte_carlo_breakdown(s, mode, spec, n, seed)?.end_to_end)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{Rayleigh, RelaySinr, SnrDistribution};
    use crate::quadrature::DEFAULT_TOL;
    use crate::special::exp_integral_ei;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params(sigma: u32, m: u32) -> LinearApproxParams {
        linear_approx_params(&CodingSpec::new(sigma, m).unwrap()).unwrap()
    }

    #[test]
    fn combiner() {
        assert_eq!(combine_df(0.0, 0.3).unwrap(), 0.3);
        assert_eq!(combine_df(1.0, 0.3).unwrap(), 1.0);
        assert_relative_eq!(combine_df(0.1, 0.2).unwrap(), 0.28, max_relative = 1e-15);
        assert!(combine_df(-0.1, 0.2).is_err());
        assert!(combine_df(0.1, 1.2).is_err());
    }

    #[test]
    fn quadrature_trivial_cdfs() {
        let p = params(256, 512);
        assert_eq!(hop_bler_quadrature(|_| 0.0, &p, 512, 1e-9).unwrap().value, 0.0);
        let one = hop_bler_quadrature(|_| 1.0, &p, 512, 1e-9).unwrap();
        assert_relative_eq!(one.value, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn quadrature_rejects_support_below_zero() {
        let p = LinearApproxParams {
            slope: 1.0,
            threshold: -1.0,
            lower: -2.0,
            upper: -0.5,
        };
        assert!(hop_bler_quadrature(|_| 1.0, &p, 1, 1e-9).is_err());
    }

    #[test]
    fn rayleigh_hop_matches_quadrature() {
        let p = params(256, 256);
        let cf = hop_bler_rayleigh_closed(1e4, &p, 256).unwrap();
        let q = hop_bler_quadrature(|x| Rayleigh { mean: 1e4 }.cdf(x), &p, 256, DEFAULT_TOL).unwrap();
        assert_relative_eq!(cf.value, q.value, max_relative = 1e-8);
        assert!(!cf.clamped);
    }

    #[test]
    fn rayleigh_hop_limits() {
        let p = params(256, 512);
        assert_eq!(hop_bler_rayleigh_closed(f64::INFINITY, &p, 512).unwrap().value, 0.0);
        assert!(hop_bler_rayleigh_closed(1e300, &p, 512).unwrap().value < 1e-299);
        assert_relative_eq!(hop_bler_rayleigh_closed(1e-300, &p, 512).unwrap().value, 1.0);
        assert!(hop_bler_rayleigh_closed(0.0, &p, 512).is_err());
    }

    #[test]
    fn fdr_hop_matches_quadrature() {
        let s = AvgSnrs::new(1e4, 1e3, 10.0).unwrap();
        let p = params(256, 512);
        let cf = hop_bler_fdr_sr_closed(&s, &p, 512).unwrap();
        let cdf = RelaySinr { sr: s.sr, rr: s.rr };
        let q = hop_bler_quadrature(|x| cdf.cdf(x), &p, 512, DEFAULT_TOL).unwrap();
        assert_relative_eq!(cf.value, q.value, max_relative = 1e-8);
    }

    #[test]
    fn fdr_hop_interference_free_limit() {
        // The interference excess relative to the Rayleigh hop is about γ̄_RR,
        // so the limit is only visible while γ̄_RR itself is small.
        let p = params(256, 512);
        for &sr in &[10.0, 100.0, 1e3] {
            let s = AvgSnrs::new(sr, 1e3, 1e-9 * sr).unwrap();
            let fdr = hop_bler_fdr_sr_closed(&s, &p, 512).unwrap().value;
            let ray = hop_bler_rayleigh_closed(sr, &p, 512).unwrap().value;
            assert_relative_eq!(fdr, ray, max_relative = 1e-6);
            assert!(fdr >= ray);
        }
        let s = AvgSnrs::new(1e4, 1e3, 1e-5).unwrap();
        let fdr = hop_bler_fdr_sr_closed(&s, &p, 512).unwrap().value;
        let ray = hop_bler_rayleigh_closed(1e4, &p, 512).unwrap().value;
        assert_relative_eq!((fdr - ray) / ray, 1e-5, max_relative = 0.05);

        let s0 = AvgSnrs::new(1e4, 1e3, 0.0).unwrap();
        assert_eq!(hop_bler_fdr_sr_closed(&s0, &p, 512).unwrap().value, ray);
    }

    #[test]
    fn fdr_hop_within_monte_carlo_band() {
        let s = AvgSnrs::new(1e4, 1e3, 10.0).unwrap();
        let spec = CodingSpec::new(256, 512).unwrap();
        let p = linear_approx_params(&spec).unwrap();
        let cf = hop_bler_fdr_sr_closed(&s, &p, 512).unwrap().value;
        let mc = monte_carlo_breakdown(&s, DuplexMode::Full, &spec, 1_000_000, 7)
            .unwrap()
            .source_relay;
        assert!((cf - mc.value).abs() <= 3.0 * mc.ci_halfwidth, "cf {cf} mc {mc:?}");
    }

    /// Product form with explicit exponential integrals, evaluated literally.
    fn fdr_product_form(s: &AvgSnrs, p: &LinearApproxParams, m: u32) -> f64 {
        let k = p.gradient(m);
        let acc = Accuracy::precise();
        let w = 1.0 / s.rr;
        let ei_hi = exp_integral_ei(-p.upper / s.sr - w, &acc).unwrap();
        let ei_lo = exp_integral_ei(-p.lower / s.sr - w, &acc).unwrap();
        let first = k * s.sr / s.rr * w.exp() * (ei_hi - ei_lo);
        let second = k * s.rd * ((-p.lower / s.rd).exp() - (-p.upper / s.rd).exp());
        1.0 - first * second
    }

    #[test]
    fn fdr_closed_equals_product_form() {
        let spec = CodingSpec::new(256, 512).unwrap();
        let p = linear_approx_params(&spec).unwrap();
        for &(sr, rd, rr) in &[(1e4, 10f64.powf(3.5), 10.0), (50.0, 80.0, 0.5), (1e3, 1e2, 3.0)] {
            let s = AvgSnrs::new(sr, rd, rr).unwrap();
            let ours = bler_fdr_closed(&s, &spec).unwrap().value;
            assert!((ours - fdr_product_form(&s, &p, 512)).abs() <= 1e-12, "{sr} {rd} {rr}");
        }
    }

    #[test]
    fn hdr_closed_symmetry_and_product() {
        let spec = CodingSpec::half_duplex(256, 512).unwrap();
        let p = linear_approx_params(&spec).unwrap();
        let s = AvgSnrs::new(500.0, 500.0, 0.0).unwrap();
        let hop = hop_bler_rayleigh_closed(500.0, &p, 256).unwrap().value;
        let e = bler_hdr_closed(&s, &spec).unwrap().value;
        assert_relative_eq!(e, 1.0 - (1.0 - hop) * (1.0 - hop), max_relative = 1e-14);
    }

    #[test]
    fn asymptote_identities() {
        let sys = SystemParams {
            propagation: crate::channel::Propagation {
                omega_sr: 1e-8,
                omega_rd: 10f64.powf(-8.5),
                omega_rr: 1e-11,
                noise_r: 1e-12,
                noise_d: 1e-12,
            },
            source_power: 2.0,
            relay_power: 0.5,
        };
        let s = avg_snrs(&sys).unwrap();
        let h = bler_hdr_asymptotic(&sys, 256, 512).unwrap().value;
        assert_relative_eq!(h, 1.0 / s.sr + 1.0 / s.rd, max_relative = 1e-13);
        let f1 = bler_fdr_asymptotic(&s, 256, 512).unwrap().value;
        let f2 = bler_fdr_asymptotic(&s, 512, 512).unwrap().value;
        assert_relative_eq!(f2 / f1, 1.0 / (2f64.sqrt() - 1.0), max_relative = 1e-13);
        let clean = AvgSnrs::new(1e4, 1e300, 0.0).unwrap();
        assert!(bler_fdr_asymptotic(&clean, 256, 512).unwrap().value < 1e-299);
    }

    #[test]
    fn monte_carlo_contract() {
        let s = AvgSnrs::new(1e4, 1e3, 10.0).unwrap();
        let spec = CodingSpec::new(256, 512).unwrap();
        assert!(bler_monte_carlo(&s, DuplexMode::Full, &spec, 9_999, 1).is_err());
        let a = bler_monte_carlo(&s, DuplexMode::Full, &spec, 50_000, 3).unwrap();
        let b = bler_monte_carlo(&s, DuplexMode::Full, &spec, 50_000, 3).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| bler_monte_carlo(&s, DuplexMode::Full, &spec, 50_000, 3).unwrap());
        assert_eq!(a, c);

        let huge = AvgSnrs::new(1e12, 1e12, 0.0).unwrap();
        let e = bler_monte_carlo(
            &huge,
            DuplexMode::Half,
            &CodingSpec::half_duplex(256, 512).unwrap(),
            20_000,
            1,
        )
        .unwrap();
        assert!(e.value < 1e-6);
    }

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut parts = Moments::default();
        for c in xs.chunks(333) {
            let mut m = Moments::default();
            c.iter().for_each(|&x| m.push(x));
            parts = parts.merge(m);
        }
        assert_relative_eq!(whole.mean, parts.mean, max_relative = 1e-13);
        assert_relative_eq!(whole.m2, parts.m2, max_relative = 1e-12);
    }

    #[test]
    fn psi_branches_agree() {
        for &x in &[1e-12f64, 1e-6, 0.1, 0.5, 0.999_999] {
            let direct = 1.0 - (-(-x).exp_m1()) / x;
            assert!((psi(x) - direct).abs() <= 1e-15 + 1e-10 * direct, "{x}");
        }
        assert_relative_eq!(psi(1.0), (-1f64).exp(), max_relative = 1e-15);
    }

    proptest! {
        #[test]
        fn closed_forms_are_probabilities_and_monotone(
            sr in 1.0f64..1e6, rd in 1.0f64..1e6, rr in 0.0f64..100.0,
            sigma in 16u32..1024, half in 64u32..1024, bump in 1.01f64..4.0,
        ) {
            let m = 2 * half;
            let f_spec = CodingSpec::new(sigma, m).unwrap();
            let h_spec = CodingSpec::half_duplex(sigma, m).unwrap();
            let s = AvgSnrs::new(sr, rd, rr).unwrap();
            let f = bler_fdr_closed(&s, &f_spec).unwrap();
            let h = bler_hdr_closed(&s, &h_spec).unwrap();
            prop_assert!((0.0..=1.0).contains(&f.value) && (0.0..=1.0).contains(&h.value));

            let slack = 1e-12;
            let better_sr = AvgSnrs::new(sr * bump, rd, rr).unwrap();
            let better_rd = AvgSnrs::new(sr, rd * bump, rr).unwrap();
            let worse_rr = AvgSnrs::new(sr, rd, rr * bump + 0.01).unwrap();
            prop_assert!(bler_fdr_closed(&better_sr, &f_spec).unwrap().value <= f.value + slack);
            prop_assert!(bler_fdr_closed(&better_rd, &f_spec).unwrap().value <= f.value + slack);
            prop_assert!(bler_fdr_closed(&worse_rr, &f_spec).unwrap().value >= f.value - slack);
            prop_assert!(bler_hdr_closed(&better_sr, &h_spec).unwrap().value <= h.value + slack);
            prop_assert!(bler_hdr_closed(&better_rd, &h_spec).unwrap().value <= h.value + slack);
        }

        #[test]
        fn combined_error_dominates_each_hop(sr in 1.0f64..1e5, rd in 1.0f64..1e5, rr in 0.0f64..50.0) {
            let spec = CodingSpec::new(256, 512).unwrap();
            let p = linear_approx_params(&spec).unwrap();
            let s = AvgSnrs::new(sr, rd, rr).unwrap();
            let e = bler_fdr_closed(&s, &spec).unwrap().value;
            let h1 = hop_bler_fdr_sr_closed(&s, &p, 512).unwrap().value;
            let h2 = hop_bler_rayleigh_closed(rd, &p, 512).unwrap().value;
            prop_assert!(e >= h1.max(h2));
            prop_assert!(e <= (h1 + h2).min(1.0) + 1e-15);
        }
    }
}
