//! Doubly-dispersive air-ground channel: delay/Doppler path taps, free-space
//! path loss with an NLoS excess, thermal noise, and the Shannon-rate
//! abstraction consumed by the computation and control layers.
//!
//! A realization is a small set of taps `(gain, delay, doppler)` held
//! quasi-static for one transmission frame; the tap set's total power is
//! normalized to exactly 1 before path loss is applied.

use crate::geom::Vec3;
use crate::scene::{is_los, Scene};
use crate::{Error, Result, SPEED_OF_LIGHT};
use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// One propagation path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathTap {
    pub gain: Complex<f64>,
    pub delay_s: f64,
    pub doppler_hz: f64,
}

/// A quasi-static multipath realization at a given sampling rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Taps sorted by ascending delay; `sum |gain|^2 == 1`.
    pub taps: Vec<PathTap>,
    pub sample_rate: f64,
    /// One-sided noise power spectral density (W/Hz).
    pub noise_psd: f64,
}

/// Radio parameters of one link.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LinkBudget {
    pub carrier_hz: f64,
    pub tx_power_w: f64,
    pub noise_figure_db: f64,
    pub antenna_gain_dbi: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        LinkBudget {
            carrier_hz: 5.8e9,
            tx_power_w: 1.0, // 30 dBm
            noise_figure_db: 7.0,
            antenna_gain_dbi: 0.0,
        }
    }
}

/// Statistical shape of the multipath profile, read from the experiment
/// config.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ChannelProfile {
    /// Rician K-factor of the line-of-sight tap (dB).
    pub k_factor_db: f64,
    /// Number of scattered taps beside the dominant one.
    pub n_nlos_taps: usize,
    /// Power decay from one scattered tap to the next (dB).
    pub nlos_decay_db: f64,
    /// Path-loss excess applied when the link is NLoS (dB).
    pub nlos_excess_db: f64,
    /// Largest excess delay of a scattered tap (s).
    pub max_excess_delay_s: f64,
    /// Platform speed cap (m/s); bounds every tap's Doppler.
    pub v_max_mps: f64,
}

impl Default for ChannelProfile {
    fn default() -> Self {
        ChannelProfile {
            k_factor_db: 18.0,
            n_nlos_taps: 3,
            nlos_decay_db: 3.0,
            nlos_excess_db: 20.0,
            max_excess_delay_s: 0.5e-6,
            v_max_mps: 40.0,
        }
    }
}

impl LinkBudget {
    /// Thermal noise PSD including the receiver noise figure (W/Hz).
    pub fn noise_psd(&self) -> f64 {
        let dbm_per_hz = -174.0 + self.noise_figure_db;
        10f64.powf(dbm_per_hz / 10.0) * 1e-3
    }
}

/// Standard normal via Box-Muller.
pub(crate) fn randn(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.random_range(1e-300..1.0f64);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Unit-variance circular complex Gaussian.
pub(crate) fn randcn(rng: &mut impl Rng) -> Complex<f64> {
    Complex::new(randn(rng), randn(rng)) * std::f64::consts::FRAC_1_SQRT_2
}

fn random_unit_vector(rng: &mut impl Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v * (1.0 / n);
        }
    }
}

/// Draws Rician gains for `1 + n_nlos` taps and normalizes total power to 1.
fn draw_gains(profile: &ChannelProfile, dominant: bool, rng: &mut impl Rng) -> Vec<Complex<f64>> {
    let k = 10f64.powf(profile.k_factor_db / 10.0);
    let n = profile.n_nlos_taps;
    let mut gains = Vec::with_capacity(n + 1);
    if dominant {
        // deterministic-amplitude LoS tap with random phase
        let amp = (k / (k + 1.0)).sqrt();
        let phase = rng.random_range(0.0..2.0 * PI);
        gains.push(Complex::from_polar(amp, phase));
    }
    let scattered_total = if dominant { 1.0 / (k + 1.0) } else { 1.0 };
    let decay = 10f64.powf(-profile.nlos_decay_db / 10.0);
    let count = n.max(if dominant { 0 } else { 1 });
    let weights: Vec<f64> = (0..count).map(|i| decay.powi(i as i32)).collect();
    let wsum: f64 = weights.iter().sum();
    for w in &weights {
        let p = scattered_total * w / wsum;
        gains.push(randcn(rng) * p.sqrt());
    }
    // exact unit total power
    let total: f64 = gains.iter().map(|g| g.norm_sqr()).sum();
    let scale = 1.0 / total.sqrt();
    for g in &mut gains {
        *g *= scale;
    }
    gains
}

/// Samples the link between a moving UAV and a ground target.
///
/// If the segment is line-of-sight the realization has one dominant tap at
/// the geometric delay plus scattered taps; otherwise all taps are
/// scattered. Each tap's Doppler is `(v . u) f_c / c` for its departure
/// direction `u`.
#[allow(clippy::too_many_arguments)]
pub fn sample_channel(
    uav_pos: Vec3,
    uav_vel: Vec3,
    target: Vec3,
    scene: &Scene,
    budget: &LinkBudget,
    profile: &ChannelProfile,
    sample_rate: f64,
    rng: &mut impl Rng,
) -> ChannelRealization {
    debug_assert!(uav_vel.norm() <= profile.v_max_mps + 1e-9);
    let d = uav_pos.distance(target).max(1.0);
    let los = is_los(uav_pos, target, scene);
    let base_delay = d / SPEED_OF_LIGHT;
    let doppler_scale = budget.carrier_hz / SPEED_OF_LIGHT;

    let gains = draw_gains(profile, los, rng);
    let mut taps = Vec::with_capacity(gains.len());
    for (i, g) in gains.into_iter().enumerate() {
        let (delay, dir) = if los && i == 0 {
            (base_delay, (target - uav_pos).unit().unwrap_or(Vec3::new(0.0, 0.0, -1.0)))
        } else {
            (
                base_delay + rng.random_range(0.0..=profile.max_excess_delay_s),
                random_unit_vector(rng),
            )
        };
        taps.push(PathTap { gain: g, delay_s: delay, doppler_hz: uav_vel.dot(dir) * doppler_scale });
    }
    taps.sort_by(|a, b| a.delay_s.partial_cmp(&b.delay_s).unwrap());
    ChannelRealization { taps, sample_rate, noise_psd: budget.noise_psd() }
}

/// Draws a waveform-level test channel: first tap at delay 0, scattered
/// excess delays on the sample grid, Doppler from random departure
/// directions at the given speed. Used by the BER harness, which sets the
/// noise level per SNR point itself.
pub fn profile_channel(
    profile: &ChannelProfile,
    speed_mps: f64,
    carrier_hz: f64,
    sample_rate: f64,
    noise_psd: f64,
    rng: &mut impl Rng,
) -> ChannelRealization {
    debug_assert!(speed_mps <= profile.v_max_mps + 1e-9);
    let doppler_max = speed_mps * carrier_hz / SPEED_OF_LIGHT;
    let max_excess = (profile.max_excess_delay_s * sample_rate).round() as i64;
    let gains = draw_gains(profile, true, rng);
    let mut taps = Vec::with_capacity(gains.len());
    for (i, g) in gains.into_iter().enumerate() {
        let delay_samples = if i == 0 { 0 } else { rng.random_range(1..=max_excess.max(1)) };
        // cos of the angle between velocity and departure direction
        let cosine = rng.random_range(-1.0..=1.0f64);
        taps.push(PathTap {
            gain: g,
            delay_s: delay_samples as f64 / sample_rate,
            doppler_hz: doppler_max * cosine,
        });
    }
    taps.sort_by(|a, b| a.delay_s.partial_cmp(&b.delay_s).unwrap());
    ChannelRealization { taps, sample_rate, noise_psd }
}

/// Passes a sample stream through the tapped delay line
/// `y[n] = sum_p g_p e^(j 2 pi f_p n T_s) x[n - l_p] (+ w[n])`.
///
/// Delays are quantized to integer samples here. The output is longer than
/// the input by the largest delay. `include_noise` switches the additive
/// complex Gaussian term (variance `noise_psd * sample_rate`) for tests.
pub fn apply_channel(
    x: &[Complex<f64>],
    h: &ChannelRealization,
    max_delay_samples: usize,
    include_noise: bool,
    rng: &mut impl Rng,
) -> Result<Vec<Complex<f64>>> {
    let ts = 1.0 / h.sample_rate;
    let delays: Vec<usize> =
        h.taps.iter().map(|t| (t.delay_s * h.sample_rate).round() as usize).collect();
    if let Some(&worst) = delays.iter().max() {
        if worst > max_delay_samples {
            return Err(Error::DelayTooLarge {
                delay_s: worst as f64 * ts,
                max_s: max_delay_samples as f64 * ts,
            });
        }
    }
    let max_delay = delays.iter().copied().max().unwrap_or(0);
    let mut y = vec![Complex::new(0.0, 0.0); x.len() + max_delay];
    for (tap, &l) in h.taps.iter().zip(&delays) {
        let rot = Complex::from_polar(1.0, 2.0 * PI * tap.doppler_hz * ts);
        // phasor at output index l, advanced by `rot` per sample
        let mut phasor = Complex::from_polar(1.0, 2.0 * PI * tap.doppler_hz * ts * l as f64);
        for (n, &xn) in x.iter().enumerate() {
            y[n + l] += tap.gain * phasor * xn;
            phasor *= rot;
        }
    }
    if include_noise {
        let sigma = (h.noise_psd * h.sample_rate).sqrt();
        for yn in &mut y {
            *yn += randcn(rng) * sigma;
        }
    }
    Ok(y)
}

/// Free-space path loss plus a fixed NLoS excess (dB).
pub fn pathloss_db(distance_m: f64, los: bool, carrier_hz: f64, nlos_excess_db: f64) -> f64 {
    assert!(distance_m > 0.0);
    let fs = 20.0 * (4.0 * PI * distance_m * carrier_hz / SPEED_OF_LIGHT).log10();
    if los {
        fs
    } else {
        fs + nlos_excess_db
    }
}

/// Shannon capacity `B log2(1 + snr)` in bits/s.
pub fn achievable_rate(snr_linear: f64, bandwidth_hz: f64) -> f64 {
    assert!(snr_linear >= 0.0 && bandwidth_hz > 0.0);
    bandwidth_hz * (1.0 + snr_linear).log2()
}

/// Linear SNR of a link over `bandwidth_hz` at the given geometry.
pub fn link_snr(
    budget: &LinkBudget,
    distance_m: f64,
    los: bool,
    bandwidth_hz: f64,
    nlos_excess_db: f64,
) -> f64 {
    let pl = pathloss_db(distance_m.max(1.0), los, budget.carrier_hz, nlos_excess_db);
    let tx_dbm = 10.0 * (budget.tx_power_w * 1e3).log10();
    let rx_dbm = tx_dbm + 2.0 * budget.antenna_gain_dbi - pl;
    let noise_dbm = -174.0 + budget.noise_figure_db + 10.0 * bandwidth_hz.log10();
    10f64.powf((rx_dbm - noise_dbm) / 10.0)
}
