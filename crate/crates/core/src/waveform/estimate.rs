//! Parametric channel estimation from AF-domain impulse pilots, and the
//! reconstruction of a TF-domain one-tap response from the estimate.

use super::{AfdmParams, ChannelEstimate, EstimatedPath, PilotLayout};
use num_complex::Complex;
use std::f64::consts::PI;

type C = Complex<f64>;

/// Amplitude of the boosted impulse: the whole pilot symbol carries
/// `N * 10^(boost/10)` power, matching a data symbol at 0 dB boost.
pub fn pilot_amplitude(layout: &PilotLayout, n: usize) -> f64 {
    (n as f64 * 10f64.powf(layout.pilot_power_boost_db / 10.0)).sqrt()
}

/// AF-domain pilot symbol: a single boosted impulse, zeros elsewhere.
pub fn make_pilot_symbol(layout: &PilotLayout, p: &AfdmParams) -> Vec<C> {
    assert!(layout.pilot_index < p.n);
    let mut sym = vec![C::new(0.0, 0.0); p.n];
    sym[layout.pilot_index] = C::new(pilot_amplitude(layout, p.n), 0.0);
    sym
}

/// Recovers `(delay, Doppler, gain)` paths from the received AF grid of a
/// pilot symbol.
///
/// Every candidate `(l, nu)` with `l <= max_delay`, `|nu| <= max_doppler`
/// maps to a unique grid offset `nu - 2 N c1 l`; bins above
/// `threshold * pilot amplitude` become paths, with the deterministic
/// transform phase divided out so the gain is referenced to the pilot
/// body start. An empty estimate means no peak cleared the threshold
/// (link outage for the caller).
pub fn af_pilot_estimate(
    rx_af: &[C],
    layout: &PilotLayout,
    p: &AfdmParams,
    max_delay: usize,
    max_doppler_bins: i64,
    threshold: f64,
) -> ChannelEstimate {
    let n = p.n;
    assert_eq!(rx_af.len(), n);
    let stride = p.delay_stride().round() as i64;
    debug_assert!(
        stride >= 2 * max_doppler_bins + 1,
        "delay stride too small to separate delay from Doppler"
    );
    let amp = pilot_amplitude(layout, n);
    let i0 = layout.pilot_index;
    let mut paths = Vec::new();
    for l in 0..=max_delay {
        for nu in -max_doppler_bins..=max_doppler_bins {
            let offset = nu - stride * l as i64;
            if offset.unsigned_abs() as usize > layout.guard_width {
                continue;
            }
            let q = (i0 as i64 + offset).rem_euclid(n as i64) as usize;
            if rx_af[q].norm() < threshold * amp {
                continue;
            }
            let lf = l as f64;
            let psi = 2.0 * PI
                * (p.c1 * lf * lf - lf * i0 as f64 / n as f64
                    + p.c2 * ((i0 * i0) as f64 - (q * q) as f64));
            let gain = rx_af[q] * C::from_polar(1.0 / amp, -psi);
            paths.push(EstimatedPath { delay_idx: l, doppler_bins: nu as f64, gain });
        }
    }
    ChannelEstimate { paths }
}

/// Sharpens integer-bin Doppler estimates using a second pilot symbol
/// transmitted `dt_samples` after the first.
///
/// The per-path phase advance between the two pilots resolves Doppler well
/// below one AF bin, which a single grid cannot represent. The fractional
/// part is clamped to `max_fractional_bins` — the receiver knows the
/// platform speed cap, and an unclamped estimate would extrapolate pure
/// phase noise on weak paths across the whole frame. Paths are matched by
/// their `(delay, bin)` cell; unmatched paths keep their integer estimate.
pub fn refine_doppler(
    first: &ChannelEstimate,
    second: &ChannelEstimate,
    dt_samples: f64,
    n: usize,
    max_fractional_bins: f64,
) -> ChannelEstimate {
    let paths = first
        .paths
        .iter()
        .map(|a| {
            let partner = second
                .paths
                .iter()
                .find(|b| b.delay_idx == a.delay_idx && b.doppler_bins == a.doppler_bins);
            match partner {
                Some(b) => {
                    // phase expected from the integer-bin part alone
                    let expected = 2.0 * PI * a.doppler_bins * dt_samples / n as f64;
                    let residual = (b.gain * a.gain.conj()
                        * C::from_polar(1.0, -expected))
                    .arg();
                    let frac = (residual * n as f64 / (2.0 * PI * dt_samples))
                        .clamp(-max_fractional_bins, max_fractional_bins);
                    EstimatedPath {
                        delay_idx: a.delay_idx,
                        doppler_bins: a.doppler_bins + frac,
                        gain: a.gain,
                    }
                }
                None => *a,
            }
        })
        .collect();
    ChannelEstimate { paths }
}

/// Rebuilds the `N`-point frequency response used for one-tap
/// equalization, freezing each path's Doppler phase at the midpoint of the
/// symbol being equalized.
///
/// `midpoint_offset_samples` is the distance from the estimate's phase
/// reference (the pilot body start) to that midpoint.
pub fn estimate_to_tf(
    est: &ChannelEstimate,
    n: usize,
    midpoint_offset_samples: f64,
) -> Vec<C> {
    let mut h = vec![C::new(0.0, 0.0); n];
    for path in &est.paths {
        let advanced = path.gain
            * C::from_polar(
                1.0,
                2.0 * PI * path.doppler_bins * midpoint_offset_samples / n as f64,
            );
        for (k, slot) in h.iter_mut().enumerate() {
            let rot = -2.0 * PI * (k * path.delay_idx) as f64 / n as f64;
            *slot += advanced * C::from_polar(1.0, rot);
        }
    }
    h
}
