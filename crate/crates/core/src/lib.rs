//! Finite-blocklength block error rates of full- and half-duplex
//! decode-and-forward relaying over Rayleigh fading, and the choice between
//! the two duplex modes under a latency target.
//!
//! ```
//! use fblrelay_core::{bler_fdr_closed, AvgSnrs, CodingSpec};
//!
//! let snrs = AvgSnrs::new(1e4, 10f64.powf(3.5), 10.0)?;
//! let spec = CodingSpec::full_duplex(256, 512)?;
//! let e = bler_fdr_closed(&snrs, &spec)?;
//! assert!(e.value > 0.0 && e.value < 1e-2);
//! # Ok::<(), fblrelay_core::Error>(())
//! ```

pub mod bler;
pub mod blocklength;
pub mod channel;
pub mod duplex;
pub mod error;
pub mod quadrature;
pub mod special;

pub use bler::{
    bler_fdr_asymptotic, bler_fdr_closed, bler_hdr_asymptotic, bler_hdr_closed, bler_monte_carlo, combine_df,
    hop_bler_fdr_sr_closed, hop_bler_quadrature, hop_bler_rayleigh_closed, monte_carlo_breakdown, BlerEstimate, Method,
    MonteCarloBreakdown,
};
pub use blocklength::{
    block_error_exact, capacity, dispersion, linear_approx_params, xi_approx, CodingSpec, LinearApproxParams,
};
pub use channel::{
    avg_snrs, cdf_exponential, cdf_fdr_relay_sinr, cdf_fdr_relay_sinr_highsnr, sample_link_snrs, AvgSnrs, DuplexMode,
    LinkSnrs, Propagation, Rayleigh, RelaySinr, RelaySinrHighSnr, SnrDistribution, SystemParams,
};
pub use duplex::{
    coeff_a, coeff_b, critical_bler, delay_gap, delay_gap_rearranged, min_blocklength, optimal_powers_fdr,
    optimal_powers_hdr, select_mode, DuplexComparison, PowerBudget, PowerPair, Verdict,
};
pub use error::{Error, Result};
pub use special::{exp_integral_ei, exp_scaled_ei_diff, q_function, Accuracy};
