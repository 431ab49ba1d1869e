//! Effective AF-domain input-output matrix of an on-grid doubly-dispersive
//! channel.
//!
//! For a tap with integer delay `l` (samples) and integer Doppler `nu`
//! (AF bins), the chirp-periodic prefix makes the end-to-end map
//! `demod . channel . mod` a generalized permutation: input bin `m` lands
//! on `q = (m + nu - 2 N c1 l) mod N` with coefficient
//! `g exp(j 2 pi (c1 l^2 - l m / N + c2 (m^2 - q^2)))`. The sum of those
//! per-tap permutations is the channel matrix; column-probing the real
//! signal path is the independent oracle the tests check it against.

use super::linalg::CMat;
use super::AfdmParams;
use crate::channel::ChannelRealization;
use num_complex::Complex;
use std::f64::consts::PI;

type C = Complex<f64>;

/// One on-grid path in AF coordinates, gain referenced to the symbol body
/// start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AfTap {
    pub delay: usize,
    pub doppler_bins: i64,
    pub gain: C,
}

/// Sparse channel matrix: one coefficient vector per distinct output
/// offset. Keeps the MMSE path at `O(P^2 N)` instead of `O(N^3)`.
#[derive(Debug, Clone)]
pub struct AfChannelMatrix {
    n: usize,
    /// `(offset, coeffs)`: input `m` contributes `coeffs[m]` to output
    /// `(m + offset) mod N`.
    terms: Vec<(usize, Vec<C>)>,
}

impl AfChannelMatrix {
    pub fn from_taps(taps: &[AfTap], p: &AfdmParams) -> Self {
        let n = p.n;
        let stride = p.delay_stride();
        debug_assert!(
            (stride - stride.round()).abs() < 1e-9,
            "2 N c1 must be an integer for the on-grid channel structure"
        );
        let stride = stride.round() as i64;
        let nf = n as f64;
        let mut terms: Vec<(usize, Vec<C>)> = Vec::new();
        for tap in taps {
            let offset =
                (tap.doppler_bins - stride * tap.delay as i64).rem_euclid(n as i64) as usize;
            let coeffs = match terms.iter_mut().find(|(o, _)| *o == offset) {
                Some((_, c)) => c,
                None => {
                    terms.push((offset, vec![C::new(0.0, 0.0); n]));
                    &mut terms.last_mut().unwrap().1
                }
            };
            let l = tap.delay as f64;
            for (m, slot) in coeffs.iter_mut().enumerate() {
                let q = (m + offset) % n;
                let phase = 2.0 * PI
                    * (p.c1 * l * l - l * m as f64 / nf
                        + p.c2 * ((m * m) as f64 - (q * q) as f64));
                *slot += tap.gain * C::from_polar(1.0, phase);
            }
        }
        AfChannelMatrix { n, terms }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.n, self.n);
        for (offset, coeffs) in &self.terms {
            for (col, c) in coeffs.iter().enumerate() {
                let row = (col + offset) % self.n;
                m[(row, col)] += *c;
            }
        }
        m
    }

    /// `H x`.
    pub fn mul_vec(&self, x: &[C]) -> Vec<C> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![C::new(0.0, 0.0); self.n];
        for (offset, coeffs) in &self.terms {
            for (col, c) in coeffs.iter().enumerate() {
                y[(col + offset) % self.n] += c * x[col];
            }
        }
        y
    }

    /// `H^H y`.
    pub fn herm_mul_vec(&self, y: &[C]) -> Vec<C> {
        assert_eq!(y.len(), self.n);
        let mut x = vec![C::new(0.0, 0.0); self.n];
        for (offset, coeffs) in &self.terms {
            for (col, c) in coeffs.iter().enumerate() {
                x[col] += c.conj() * y[(col + offset) % self.n];
            }
        }
        x
    }

    /// `H^H H + sigma2 I` assembled from the offset structure in
    /// `O(P^2 N)`.
    pub fn gram_regularized(&self, sigma2: f64) -> CMat {
        let n = self.n;
        let mut g = CMat::zeros(n, n);
        for (o1, c1) in &self.terms {
            for (o2, c2) in &self.terms {
                // rows of H where both terms overlap: m1 + o1 = m2 + o2
                let shift = (*o2 as i64 - *o1 as i64).rem_euclid(n as i64) as usize;
                for m2 in 0..n {
                    let m1 = (m2 + shift) % n;
                    g[(m1, m2)] += c1[m1].conj() * c2[m2];
                }
            }
        }
        for i in 0..n {
            g[(i, i)] += C::new(sigma2, 0.0);
        }
        g
    }
}

/// Builds the dense AF-domain matrix of a channel realization whose taps
/// sit on the delay/Doppler grid.
///
/// Tap gains in a [`ChannelRealization`] are referenced to the start of the
/// transmitted stream (the prefix); the matrix applies the `cp_len`-sample
/// phase advance so that `demod(apply_channel(mod(x))) = H x` holds
/// exactly in noiseless mode.
pub fn build_af_channel_matrix(
    h: &ChannelRealization,
    p: &AfdmParams,
    cp_len: usize,
) -> CMat {
    let n = p.n as f64;
    let taps: Vec<AfTap> = h
        .taps
        .iter()
        .map(|t| {
            let delay = (t.delay_s * h.sample_rate).round();
            let bins = t.doppler_hz * n / h.sample_rate;
            debug_assert!(
                (bins - bins.round()).abs() < 1e-6,
                "Doppler {bins} bins is off-grid"
            );
            let body_phase = 2.0 * PI * t.doppler_hz * cp_len as f64 / h.sample_rate;
            AfTap {
                delay: delay as usize,
                doppler_bins: bins.round() as i64,
                gain: t.gain * C::from_polar(1.0, body_phase),
            }
        })
        .collect();
    AfChannelMatrix::from_taps(&taps, p).to_dense()
}
