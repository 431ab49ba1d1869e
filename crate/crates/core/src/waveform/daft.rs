//! The discrete affine Fourier transform pair and the OFDM/AFDM modems
//! built on it.
//!
//! The forward (receive-side) transform is
//! `X[m] = (1/sqrt(N)) sum_n s[n] exp(-j 2 pi (c1 n^2 + n m / N + c2 m^2))`,
//! i.e. a unitary DFT sandwiched between two chirp multiplications; with
//! `c1 = c2 = 0` it degenerates to the plain DFT, so the OFDM path is the
//! same code with trivial chirps. AFDM symbols carry a chirp-periodic
//! prefix instead of a cyclic one.

use super::{AfdmParams, ModemConfig};
use num_complex::Complex;
use rustfft::FftPlanner;
use std::f64::consts::PI;

type C = Complex<f64>;

fn unitary_fft(x: &mut [C], inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(x.len())
    } else {
        planner.plan_fft_forward(x.len())
    };
    fft.process(x);
    let scale = 1.0 / (x.len() as f64).sqrt();
    for v in x.iter_mut() {
        *v *= scale;
    }
}

fn chirp(c: f64, n: usize) -> Vec<C> {
    (0..n).map(|i| C::from_polar(1.0, 2.0 * PI * c * (i * i) as f64)).collect()
}

/// Receive-side transform, time domain to AF domain (body only, no prefix).
pub fn daft_forward(body: &[C], p: &AfdmParams) -> Vec<C> {
    assert_eq!(body.len(), p.n);
    let c1 = chirp(p.c1, p.n);
    let c2 = chirp(p.c2, p.n);
    let mut buf: Vec<C> = body.iter().zip(&c1).map(|(s, ch)| s * ch.conj()).collect();
    unitary_fft(&mut buf, false);
    for (v, ch) in buf.iter_mut().zip(&c2) {
        *v *= ch.conj();
    }
    buf
}

/// Transmit-side transform, AF domain to time domain (body only).
pub fn daft_inverse(symbols: &[C], p: &AfdmParams) -> Vec<C> {
    assert_eq!(symbols.len(), p.n);
    let c1 = chirp(p.c1, p.n);
    let c2 = chirp(p.c2, p.n);
    let mut buf: Vec<C> = symbols.iter().zip(&c2).map(|(x, ch)| x * ch).collect();
    unitary_fft(&mut buf, true);
    for (v, ch) in buf.iter_mut().zip(&c1) {
        *v *= ch;
    }
    buf
}

/// AFDM modulation: inverse transform plus a chirp-periodic prefix of
/// `cp_len` samples (`s[-k] = s[N-k] exp(-j 2 pi c1 (N^2 - 2 N k))`).
pub fn afdm_modulate(symbols: &[C], p: &AfdmParams, cp_len: usize) -> Vec<C> {
    let body = daft_inverse(symbols, p);
    let n = p.n;
    assert!(cp_len <= n);
    let mut out = Vec::with_capacity(cp_len + n);
    for i in 0..cp_len {
        // prefix index relative to the body start: i - cp_len (negative)
        let neg = i as f64 - cp_len as f64;
        let phase = -2.0 * PI * p.c1 * ((n * n) as f64 + 2.0 * n as f64 * neg);
        out.push(body[n - cp_len + i] * C::from_polar(1.0, phase));
    }
    out.extend_from_slice(&body);
    out
}

/// AFDM demodulation: drop the prefix and apply the forward transform.
pub fn afdm_demodulate(samples: &[C], p: &AfdmParams, cp_len: usize) -> Vec<C> {
    assert_eq!(samples.len(), p.n + cp_len, "symbol length mismatch");
    daft_forward(&samples[cp_len..], p)
}

/// OFDM modulation: unitary IDFT plus cyclic prefix.
pub fn ofdm_modulate(symbols: &[C], cfg: &ModemConfig) -> Vec<C> {
    assert_eq!(symbols.len(), cfg.n_subcarriers, "symbol count mismatch");
    afdm_modulate(symbols, &AfdmParams::ofdm_equivalent(cfg.n_subcarriers), cfg.cp_len)
}

/// OFDM demodulation back to the subcarrier grid.
pub fn ofdm_demodulate(samples: &[C], cfg: &ModemConfig) -> Vec<C> {
    assert_eq!(samples.len(), cfg.symbol_len(), "symbol length mismatch");
    afdm_demodulate(samples, &AfdmParams::ofdm_equivalent(cfg.n_subcarriers), cfg.cp_len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::randcn;
    use crate::waveform::Constellation;

    fn cfg(n: usize, cp: usize) -> ModemConfig {
        ModemConfig {
            n_subcarriers: n,
            subcarrier_spacing_hz: 120e3,
            cp_len: cp,
            constellation: Constellation::Qpsk,
        }
    }

    fn random_symbols(n: usize, seed: u64) -> Vec<C> {
        let mut rng = crate::substream(seed, "daft", &[]);
        (0..n).map(|_| randcn(&mut rng)).collect()
    }

    #[test]
    fn zero_symbols_give_zero_body() {
        let c = cfg(64, 8);
        let out = ofdm_modulate(&vec![C::new(0.0, 0.0); 64], &c);
        assert!(out.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn subcarrier_impulse_is_complex_exponential() {
        let n = 64;
        let c = cfg(n, 0);
        let k = 5;
        let mut sym = vec![C::new(0.0, 0.0); n];
        sym[k] = C::new(1.0, 0.0);
        let out = ofdm_modulate(&sym, &c);
        for (i, v) in out.iter().enumerate() {
            let oracle = C::from_polar(1.0 / (n as f64).sqrt(), 2.0 * PI * (k * i) as f64 / n as f64);
            assert!((v - oracle).norm() < 1e-12, "sample {i}");
        }
    }

    #[test]
    fn ofdm_round_trip_is_exact() {
        let c = cfg(128, 16);
        let sym = random_symbols(128, 1);
        let back = ofdm_demodulate(&ofdm_modulate(&sym, &c), &c);
        for (a, b) in sym.iter().zip(&back) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn afdm_round_trip_is_exact() {
        for n in [16usize, 64, 128] {
            let p = AfdmParams::for_doppler(n, 2);
            let sym = random_symbols(n, n as u64);
            let back = afdm_demodulate(&afdm_modulate(&sym, &p, n / 8), &p, n / 8);
            for (a, b) in sym.iter().zip(&back) {
                assert!((a - b).norm() < 1e-10, "n = {n}");
            }
        }
    }

    #[test]
    fn afdm_with_zero_chirps_is_ofdm_bit_exact() {
        let n = 128;
        let cp = 16;
        let c = cfg(n, cp);
        let p = AfdmParams::ofdm_equivalent(n);
        let sym = random_symbols(n, 9);
        let a = ofdm_modulate(&sym, &c);
        let b = afdm_modulate(&sym, &p, cp);
        assert_eq!(a, b);
    }

    #[test]
    fn daft_matrix_is_unitary() {
        for n in [16usize, 64, 128] {
            let p = AfdmParams::for_doppler(n, 1);
            // build the transform matrix column by column
            let mut cols = Vec::with_capacity(n);
            for j in 0..n {
                let mut e = vec![C::new(0.0, 0.0); n];
                e[j] = C::new(1.0, 0.0);
                cols.push(daft_forward(&e, &p));
            }
            // max |(A^H A - I)[i][j]|
            let mut worst = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    let dot: C = (0..n).map(|k| cols[i][k].conj() * cols[j][k]).sum();
                    let target = if i == j { C::new(1.0, 0.0) } else { C::new(0.0, 0.0) };
                    worst = worst.max((dot - target).norm());
                }
            }
            assert!(worst < 1e-9, "n = {n}, worst {worst:.3e}");
        }
    }

    #[test]
    fn chirp_periodic_prefix_reduces_to_cyclic_for_even_n() {
        // with c1 = (2a+1)/(2N) and N even the prefix phase factor is 1
        let n = 64;
        let p = AfdmParams::for_doppler(n, 2);
        let sym = random_symbols(n, 17);
        let tx = afdm_modulate(&sym, &p, 8);
        for i in 0..8 {
            assert!((tx[i] - tx[n + i]).norm() < 1e-12);
        }
    }
}
