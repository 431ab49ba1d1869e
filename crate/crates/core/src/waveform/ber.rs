//! Monte-Carlo BER measurement for the four link designs compared in the
//! case study: conventional OFDM with TF-domain pilots, OFDM with
//! AF-domain pilots, AFDM with full MMSE equalization, and the precoded
//! AFDM downlink with channel-oblivious detection.
//!
//! Frames share channel, data, and noise substreams across schemes, so
//! scheme comparisons are paired. Each frame carries a pilot symbol at
//! the start and at the end (none for the precoded downlink, whose burden
//! sits at the transmitter) around the data symbols; the long baseline
//! between the two pilots is what resolves sub-bin Doppler accurately.
//! Channel taps are quasi-static per frame while their Doppler phases
//! evolve continuously across it.

use super::afmatrix::{AfChannelMatrix, AfTap};
use super::daft::{afdm_demodulate, afdm_modulate, ofdm_demodulate, ofdm_modulate};
use super::equalize::{afdm_mmse_equalize_sparse, equalize_onetap};
use super::estimate::{
    af_pilot_estimate, estimate_to_tf, make_pilot_symbol, pilot_amplitude, refine_doppler,
};
use super::precode::slp_precode;
use super::{
    qpsk_demodulate, qpsk_map_bits, AfdmParams, ChannelEstimate, EstimatedPath, ModemConfig,
    PilotLayout,
};
use crate::channel::{apply_channel, profile_channel, ChannelProfile, ChannelRealization};
use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

type C = Complex<f64>;

/// The compared transmission schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// OFDM data, per-subcarrier least-squares estimation on TF pilots.
    OfdmTfPilot,
    /// OFDM data, parametric estimation from AF-domain pilots.
    OfdmAfPilot,
    /// AFDM data, AF-pilot estimation, full MMSE equalization.
    AfdmMmse,
    /// AFDM data precoded at the transmitter, direct detection.
    AfdmSlp,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Scheme::OfdmTfPilot => "ofdm-tf-pilot",
            Scheme::OfdmAfPilot => "ofdm-af-pilot",
            Scheme::AfdmMmse => "afdm-mmse",
            Scheme::AfdmSlp => "afdm-slp",
        }
    }
}

/// Whether receivers estimate the channel or are handed the true one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CsiMode {
    Estimated,
    Perfect,
}

/// Static configuration of a BER run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BerConfig {
    pub modem: ModemConfig,
    /// Doppler bins the AFDM chirp accommodates.
    pub alpha_max: i64,
    pub pilot: PilotLayout,
    pub data_symbols_per_frame: usize,
    pub profile: ChannelProfile,
    pub carrier_hz: f64,
    pub csi: CsiMode,
    /// Relative peak threshold of the pilot-domain path search.
    pub detection_threshold: f64,
    /// Constructive-interference iterations of the precoder.
    pub slp_iterations: usize,
    /// Give the pilotless downlink the frame energy the uplink schemes
    /// spend on pilots.
    pub slp_frame_energy_matched: bool,
}

impl Default for BerConfig {
    fn default() -> Self {
        BerConfig {
            modem: ModemConfig {
                n_subcarriers: 128,
                subcarrier_spacing_hz: 120e3,
                cp_len: 16,
                constellation: super::Constellation::Qpsk,
            },
            alpha_max: 1,
            pilot: PilotLayout { pilot_index: 64, guard_width: 32, pilot_power_boost_db: 10.0 },
            data_symbols_per_frame: 30,
            profile: ChannelProfile::default(),
            carrier_hz: 5.8e9,
            csi: CsiMode::Estimated,
            detection_threshold: 0.02,
            slp_iterations: 40,
            slp_frame_energy_matched: true,
        }
    }
}

/// One measured point of a BER sweep.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
}

/// Runs the Monte-Carlo sweep for one scheme; deterministic per seed, and
/// parallel frames fold into order-independent error counts.
pub fn ber_experiment(
    scheme: Scheme,
    snr_db_list: &[f64],
    speed_mps: f64,
    n_frames: usize,
    seed: u64,
    cfg: &BerConfig,
) -> Vec<BerPoint> {
    snr_db_list
        .iter()
        .enumerate()
        .map(|(snr_idx, &snr_db)| {
            let (bits, errors) = (0..n_frames as u64)
                .into_par_iter()
                .map(|frame| run_frame(scheme, snr_db, snr_idx as u64, frame, speed_mps, seed, cfg))
                .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
            BerPoint { snr_db, bits, errors, ber: errors as f64 / bits.max(1) as f64 }
        })
        .collect()
}

/// Per-symbol on-grid taps for the matrix-based receivers, with gains
/// advanced to the given body-start offset from the estimate reference.
fn taps_at_symbol(est: &ChannelEstimate, n: usize, body_offset_samples: f64) -> Vec<AfTap> {
    est.paths
        .iter()
        .map(|p| {
            let phase = 2.0 * PI * p.doppler_bins * body_offset_samples / n as f64;
            AfTap {
                delay: p.delay_idx,
                doppler_bins: p.doppler_bins.round() as i64,
                gain: p.gain * C::from_polar(1.0, phase),
            }
        })
        .collect()
}

/// The true channel expressed as an estimate referenced to the body start
/// of the first symbol in the stream.
fn true_estimate(h: &ChannelRealization, cp: usize, n: usize) -> ChannelEstimate {
    let fs = h.sample_rate;
    let paths = h
        .taps
        .iter()
        .map(|t| EstimatedPath {
            delay_idx: (t.delay_s * fs).round() as usize,
            doppler_bins: t.doppler_hz * n as f64 / fs,
            gain: t.gain * C::from_polar(1.0, 2.0 * PI * t.doppler_hz * cp as f64 / fs),
        })
        .collect();
    ChannelEstimate { paths }
}

#[allow(clippy::too_many_arguments)]
fn run_frame(
    scheme: Scheme,
    snr_db: f64,
    snr_idx: u64,
    frame: u64,
    speed_mps: f64,
    seed: u64,
    cfg: &BerConfig,
) -> (u64, u64) {
    let n = cfg.modem.n_subcarriers;
    let cp = cfg.modem.cp_len;
    let sym_len = n + cp;
    let d = cfg.data_symbols_per_frame;
    let fs = cfg.modem.sample_rate();
    let params = AfdmParams::for_doppler(n, cfg.alpha_max);
    let sigma2 = 10f64.powf(-snr_db / 10.0);

    let mut ch_rng = crate::substream(seed, "ber-channel", &[snr_idx, frame]);
    let mut data_rng = crate::substream(seed, "ber-data", &[snr_idx, frame]);
    let mut noise_rng = crate::substream(seed, "ber-noise", &[snr_idx, frame]);

    let h = profile_channel(&cfg.profile, speed_mps, cfg.carrier_hz, fs, sigma2 / fs, &mut ch_rng);
    let max_delay =
        h.taps.iter().map(|t| (t.delay_s * fs).round() as usize).max().unwrap_or(0).max(1);
    debug_assert!(max_delay <= cp);

    let data_bits: Vec<bool> = (0..2 * n * d).map(|_| data_rng.random()).collect();
    let data_syms: Vec<Vec<C>> =
        (0..d).map(|s| qpsk_map_bits(&data_bits[2 * n * s..2 * n * (s + 1)], n)).collect();
    // TF pilot symbols are QPSK known to the receiver, boosted by the same
    // power as the AF-domain impulse so pilot energy is matched across
    // schemes
    let boost_amp = 10f64.powf(cfg.pilot.pilot_power_boost_db / 20.0);
    let tf_pilots: Vec<Vec<C>> = (0..2)
        .map(|_| {
            (0..n)
                .map(|_| super::qpsk_modulate(data_rng.random(), data_rng.random()) * boost_amp)
                .collect()
        })
        .collect();

    // pilots bracket the data: symbol 0 and symbol d+1 (the downlink
    // precoded scheme carries no pilots at all)
    let first_data_sym = match scheme {
        Scheme::AfdmSlp => 0,
        _ => 1,
    };
    let truth = true_estimate(&h, cp, n);

    let mut stream: Vec<C> = Vec::with_capacity((2 + d) * sym_len);
    match scheme {
        Scheme::OfdmTfPilot => {
            stream.extend(ofdm_modulate(&tf_pilots[0], &cfg.modem));
            for s in &data_syms {
                stream.extend(ofdm_modulate(s, &cfg.modem));
            }
            stream.extend(ofdm_modulate(&tf_pilots[1], &cfg.modem));
        }
        Scheme::OfdmAfPilot => {
            let pilot = make_pilot_symbol(&cfg.pilot, &params);
            stream.extend(afdm_modulate(&pilot, &params, cp));
            for s in &data_syms {
                stream.extend(ofdm_modulate(s, &cfg.modem));
            }
            stream.extend(afdm_modulate(&pilot, &params, cp));
        }
        Scheme::AfdmMmse => {
            let pilot = make_pilot_symbol(&cfg.pilot, &params);
            stream.extend(afdm_modulate(&pilot, &params, cp));
            for s in &data_syms {
                stream.extend(afdm_modulate(s, &params, cp));
            }
            stream.extend(afdm_modulate(&pilot, &params, cp));
        }
        Scheme::AfdmSlp => {
            // transmitter-side precoding from true CSI (reciprocity); with
            // frame energies matched, the budget the uplink schemes spend
            // on two boosted pilots goes into the data symbols instead
            let boost_lin = 10f64.powf(cfg.pilot.pilot_power_boost_db / 10.0);
            let budget = if cfg.slp_frame_energy_matched {
                n as f64 * (1.0 + 2.0 * boost_lin / d as f64)
            } else {
                n as f64
            };
            for (s, x) in data_syms.iter().enumerate() {
                let body_offset = (s * sym_len) as f64;
                let taps = taps_at_symbol(&truth, n, body_offset);
                let h_s = AfChannelMatrix::from_taps(&taps, &params).to_dense();
                match slp_precode(x, &h_s, budget, cfg.slp_iterations) {
                    Ok(out) => stream.extend(afdm_modulate(&out.tx, &params, cp)),
                    // ill-conditioned frame: transmit nothing, drop below
                    Err(_) => return (0, 0),
                }
            }
        }
    }

    let rx = match apply_channel(&stream, &h, cp, true, &mut noise_rng) {
        Ok(rx) => rx,
        Err(_) => return (0, 0),
    };
    let window = |s: usize| &rx[s * sym_len..(s + 1) * sym_len];

    // receiver-side channel knowledge
    let max_delay_search = (cfg.profile.max_excess_delay_s * fs).round() as usize;
    let est = match (scheme, cfg.csi) {
        (Scheme::AfdmSlp, _) => ChannelEstimate::default(),
        (_, CsiMode::Perfect) => truth,
        (Scheme::OfdmTfPilot, CsiMode::Estimated) => ChannelEstimate::default(),
        (_, CsiMode::Estimated) => {
            let g1 = afdm_demodulate(window(0), &params, cp);
            let g2 = afdm_demodulate(window(d + 1), &params, cp);
            // path search floor adapts to the known noise level so weak
            // taps are kept at high SNR without admitting noise at low SNR
            let threshold = cfg
                .detection_threshold
                .max(4.0 * sigma2.sqrt() / pilot_amplitude(&cfg.pilot, n));
            let e1 = af_pilot_estimate(
                &g1,
                &cfg.pilot,
                &params,
                max_delay_search,
                cfg.alpha_max,
                threshold,
            );
            let e2 = af_pilot_estimate(
                &g2,
                &cfg.pilot,
                &params,
                max_delay_search,
                cfg.alpha_max,
                threshold,
            );
            if e1.is_empty() || e2.is_empty() {
                // link outage: the frame's data is as good as guessed
                return ((2 * n * d) as u64, (n * d) as u64);
            }
            // the platform speed cap bounds how far off-grid Doppler can be
            let max_frac = cfg.profile.v_max_mps * cfg.carrier_hz
                / crate::SPEED_OF_LIGHT
                * n as f64
                / fs;
            refine_doppler(&e1, &e2, ((d + 1) * sym_len) as f64, n, max_frac)
        }
    };

    // conventional least-squares TF estimate averaged over the two pilot
    // symbols, no Doppler model
    let tf_ls: Vec<C> = if scheme == Scheme::OfdmTfPilot && cfg.csi == CsiMode::Estimated {
        let g1 = ofdm_demodulate(window(0), &cfg.modem);
        let g2 = ofdm_demodulate(window(d + 1), &cfg.modem);
        (0..n)
            .map(|k| (g1[k] / tf_pilots[0][k] + g2[k] / tf_pilots[1][k]) * 0.5)
            .collect()
    } else {
        Vec::new()
    };

    let mut errors = 0u64;
    let mut bits = 0u64;
    for (s, sent) in data_syms.iter().enumerate() {
        let sym_index = first_data_sym + s;
        let grid = window(sym_index);
        let detected: Vec<C> = match scheme {
            Scheme::OfdmTfPilot => {
                let rx_grid = ofdm_demodulate(grid, &cfg.modem);
                let coeffs = if cfg.csi == CsiMode::Perfect {
                    let mid = (sym_index * sym_len) as f64 + n as f64 / 2.0;
                    estimate_to_tf(&est, n, mid)
                } else {
                    tf_ls.clone()
                };
                equalize_onetap(&rx_grid, &coeffs, sigma2)
            }
            Scheme::OfdmAfPilot => {
                let rx_grid = ofdm_demodulate(grid, &cfg.modem);
                let mid = (sym_index * sym_len) as f64 + n as f64 / 2.0;
                let coeffs = estimate_to_tf(&est, n, mid);
                equalize_onetap(&rx_grid, &coeffs, sigma2)
            }
            Scheme::AfdmMmse => {
                let rx_grid = afdm_demodulate(grid, &params, cp);
                let body_offset = (sym_index * sym_len) as f64;
                let taps = taps_at_symbol(&est, n, body_offset);
                let h_s = AfChannelMatrix::from_taps(&taps, &params);
                match afdm_mmse_equalize_sparse(&rx_grid, &h_s, sigma2) {
                    Ok(x) => x,
                    Err(_) => continue, // frame dropped
                }
            }
            Scheme::AfdmSlp => afdm_demodulate(grid, &params, cp),
        };
        for (k, det) in detected.iter().enumerate() {
            let (b0, b1) = qpsk_demodulate(*det);
            let (t0, t1) = super::qpsk_demodulate(sent[k]);
            errors += u64::from(b0 != t0) + u64::from(b1 != t1);
            bits += 2;
        }
    }
    (bits, errors)
}
