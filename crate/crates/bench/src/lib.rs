//! Shared operating points for the benchmarks.

use fblrelay_core::{avg_snrs, AvgSnrs, CodingSpec, Propagation, SystemParams};

/// Reference link gains with a -110 dB loop.
pub fn propagation() -> Propagation {
    Propagation {
        omega_sr: 1e-8,
        omega_rd: 10f64.powf(-8.5),
        omega_rr: 1e-11,
        noise_r: 1e-12,
        noise_d: 1e-12,
    }
}

/// Average SNRs with both nodes at `power` watts.
pub fn snrs(power: f64) -> AvgSnrs {
    avg_snrs(&SystemParams {
        propagation: propagation(),
        source_power: power,
        relay_power: power,
    })
    .expect("reference gains are valid")
}

/// 256 bits over 512 channel uses, split per mode.
pub fn codes() -> (CodingSpec, CodingSpec) {
    (
        CodingSpec::full_duplex(256, 512).expect("valid code"),
        CodingSpec::half_duplex(256, 512).expect("valid code"),
    )
}
