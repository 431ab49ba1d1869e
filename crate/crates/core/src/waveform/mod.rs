//! Modems and receivers for the two air-ground links: OFDM and AFDM
//! transforms, AF-domain pilot channel estimation with TF-domain one-tap
//! equalization, full AF-domain MMSE equalization, symbol-level precoding
//! for the downlink, and the Monte-Carlo BER harness comparing them.

mod afmatrix;
mod ber;
mod daft;
mod equalize;
mod estimate;
mod linalg;
mod precode;

pub use afmatrix::{build_af_channel_matrix, AfChannelMatrix, AfTap};
pub use ber::{ber_experiment, BerConfig, BerPoint, CsiMode, Scheme};
pub use daft::{
    afdm_demodulate, afdm_modulate, daft_forward, daft_inverse, ofdm_demodulate, ofdm_modulate,
};
pub use equalize::{afdm_mmse_equalize, equalize_onetap};
pub use estimate::{af_pilot_estimate, estimate_to_tf, make_pilot_symbol, refine_doppler};
pub use linalg::{CholeskyFactor, CMat, LuFactor};
pub use precode::{slp_precode, SlpOutput};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

/// Supported constellations. QPSK is the reference mapping everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Constellation {
    Qpsk,
}

/// Subcarrier numerology of one modem.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ModemConfig {
    pub n_subcarriers: usize,
    pub subcarrier_spacing_hz: f64,
    /// Prefix length in samples; must cover the largest channel delay.
    pub cp_len: usize,
    pub constellation: Constellation,
}

impl ModemConfig {
    pub fn sample_rate(&self) -> f64 {
        self.n_subcarriers as f64 * self.subcarrier_spacing_hz
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.sample_rate()
    }

    /// Samples per transmitted symbol including the prefix.
    pub fn symbol_len(&self) -> usize {
        self.n_subcarriers + self.cp_len
    }
}

/// Chirp parameters of the affine transform.
///
/// `c1 = (2 alpha + 1) / (2 n)` separates delay and Doppler into disjoint
/// output offsets for Doppler up to `alpha` bins; `c2` is a small fixed
/// constant that completes the transform.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AfdmParams {
    pub c1: f64,
    pub c2: f64,
    pub n: usize,
}

impl AfdmParams {
    /// Parameters accommodating Doppler up to `alpha_max` bins at size `n`.
    pub fn for_doppler(n: usize, alpha_max: i64) -> Self {
        let nf = n as f64;
        AfdmParams {
            c1: (2.0 * alpha_max as f64 + 1.0) / (2.0 * nf),
            c2: 1.0 / (2.0 * nf * nf),
            n,
        }
    }

    /// Degenerate chirps: the transform reduces to the plain DFT pair.
    pub fn ofdm_equivalent(n: usize) -> Self {
        AfdmParams { c1: 0.0, c2: 0.0, n }
    }

    /// `2 N c1`, the per-delay-sample output offset. Integer by
    /// construction for parameters from [`AfdmParams::for_doppler`].
    pub fn delay_stride(&self) -> f64 {
        2.0 * self.n as f64 * self.c1
    }
}

/// Placement of the boosted AF-domain impulse pilot.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PilotLayout {
    /// AF-domain index carrying the impulse.
    pub pilot_index: usize,
    /// Half-width of the zero guard region searched for channel peaks.
    pub guard_width: usize,
    /// Pilot power relative to one full data symbol (dB).
    pub pilot_power_boost_db: f64,
}

impl Default for PilotLayout {
    fn default() -> Self {
        PilotLayout { pilot_index: 64, guard_width: 40, pilot_power_boost_db: 0.0 }
    }
}

/// One estimated propagation path in AF coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatedPath {
    /// Delay in samples.
    pub delay_idx: usize,
    /// Doppler in AF bins; integer from a single pilot grid, fractional
    /// after two-pilot refinement.
    pub doppler_bins: f64,
    /// Complex gain referenced to the pilot symbol's body start.
    pub gain: Complex<f64>,
}

/// Parametric channel estimate recovered from AF-domain pilots.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChannelEstimate {
    pub paths: Vec<EstimatedPath>,
}

impl ChannelEstimate {
    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

/// Gray-mapped QPSK symbol for a bit pair.
pub fn qpsk_modulate(b0: bool, b1: bool) -> Complex<f64> {
    let re = if b0 { -1.0 } else { 1.0 };
    let im = if b1 { -1.0 } else { 1.0 };
    Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Nearest-point QPSK detection.
pub fn qpsk_demodulate(s: Complex<f64>) -> (bool, bool) {
    (s.re < 0.0, s.im < 0.0)
}

/// Bits -> symbols, two bits per symbol, zero-padded to `n` symbols.
pub fn qpsk_map_bits(bits: &[bool], n: usize) -> Vec<Complex<f64>> {
    assert!(bits.len() <= 2 * n);
    (0..n)
        .map(|i| {
            let b0 = bits.get(2 * i).copied().unwrap_or(false);
            let b1 = bits.get(2 * i + 1).copied().unwrap_or(false);
            qpsk_modulate(b0, b1)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qpsk_round_trip() {
        for (b0, b1) in [(false, false), (false, true), (true, false), (true, true)] {
            let s = qpsk_modulate(b0, b1);
            assert!((s.norm() - 1.0).abs() < 1e-12);
            assert_eq!(qpsk_demodulate(s), (b0, b1));
        }
    }

    #[test]
    fn afdm_params_reference_law() {
        let p = AfdmParams::for_doppler(128, 1);
        assert!((p.c1 - 3.0 / 256.0).abs() < 1e-15);
        assert!((p.delay_stride() - 3.0).abs() < 1e-12);
        let q = AfdmParams::ofdm_equivalent(64);
        assert_eq!(q.c1, 0.0);
        assert_eq!(q.c2, 0.0);
    }

    #[test]
    fn modem_sample_rate() {
        let m = ModemConfig {
            n_subcarriers: 128,
            subcarrier_spacing_hz: 120e3,
            cp_len: 16,
            constellation: Constellation::Qpsk,
        };
        assert_eq!(m.sample_rate(), 15.36e6);
        assert_eq!(m.symbol_len(), 144);
    }
}
