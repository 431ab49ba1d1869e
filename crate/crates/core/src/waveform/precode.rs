//! Symbol-level precoding for the downlink: the transmitter pre-inverts
//! the known AF-domain channel so the receiver detects symbols directly,
//! with a constructive-interference relaxation that only pushes received
//! points deeper into their QPSK decision regions.

use super::linalg::{CMat, LuFactor};
use crate::Result;
use num_complex::Complex;

type C = Complex<f64>;

/// Result of precoding one symbol block.
#[derive(Debug, Clone)]
pub struct SlpOutput {
    /// Time-multiplexed AF-domain transmit vector (feed to the modulator).
    pub tx: Vec<C>,
    /// Amplitude of the noiseless received constellation relative to the
    /// intended one. Below 1 the power budget forced a scale-down.
    pub rx_gain: f64,
    /// SNR penalty from scaling to the budget (dB, 0 when none).
    pub penalty_db: f64,
}

/// Projects `u` onto the QPSK constructive-interference region of `x`:
/// each real/imaginary component must be at least as deep in the decision
/// region as the intended point.
fn project_ci(u: &mut [C], x: &[C]) {
    for (ui, xi) in u.iter_mut().zip(x) {
        let re = if xi.re >= 0.0 { ui.re.max(xi.re) } else { ui.re.min(xi.re) };
        let im = if xi.im >= 0.0 { ui.im.max(xi.im) } else { ui.im.min(xi.im) };
        *ui = C::new(re, im);
    }
}

/// Precodes `intended` through the known channel `h` under a total power
/// budget (`||t||^2 <= power_budget`).
///
/// The relaxed target `u` minimizes transmit power over the
/// constructive-interference region via projected gradient descent (plain
/// inversion `u = x` is the feasible starting point, so the relaxation
/// never does worse), then the transmit vector is scaled to use the whole
/// budget.
pub fn slp_precode(
    intended: &[C],
    h: &CMat,
    power_budget: f64,
    iterations: usize,
) -> Result<SlpOutput> {
    let n = intended.len();
    assert_eq!(h.rows, n);
    let lu = LuFactor::new(h)?;

    // largest eigenvalue of (H^-1)^H H^-1 by power iteration, for the step
    let mut v = vec![C::new(1.0, 0.0); n];
    let mut lambda = 1.0f64;
    for _ in 0..10 {
        let w = lu.solve_adjoint(&lu.solve(&v));
        lambda = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if lambda < 1e-300 {
            break;
        }
        v = w.iter().map(|c| c / lambda).collect();
    }
    // monotone descent needs step <= 1/L with L = 2 lambda_max
    let step = 0.45 / lambda.max(1e-12);

    let mut u = intended.to_vec();
    for _ in 0..iterations {
        let grad = lu.solve_adjoint(&lu.solve(&u));
        for (ui, gi) in u.iter_mut().zip(&grad) {
            *ui -= gi * step;
        }
        project_ci(&mut u, intended);
    }

    let t = lu.solve(&u);
    let norm2: f64 = t.iter().map(|c| c.norm_sqr()).sum();
    let scale = (power_budget / norm2.max(1e-300)).sqrt();
    let tx: Vec<C> = t.iter().map(|c| c * scale).collect();
    // nominal inversion would need ||H^-1 x||^2; report the shortfall when
    // the budget cannot reach unit receive gain
    let penalty_db = if scale < 1.0 - 1e-12 { -20.0 * scale.log10() } else { 0.0 };
    Ok(SlpOutput { tx, rx_gain: scale, penalty_db })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::randcn;
    use crate::waveform::{qpsk_modulate, AfChannelMatrix, AfTap, AfdmParams};

    fn qpsk_block(n: usize, seed: u64) -> Vec<C> {
        let mut rng = crate::substream(seed, "slp", &[]);
        use rand::Rng;
        (0..n).map(|_| qpsk_modulate(rng.random(), rng.random())).collect()
    }

    #[test]
    fn identity_channel_transmits_the_symbols() {
        let n = 16;
        let x = qpsk_block(n, 1);
        let h = CMat::identity(n);
        let out = slp_precode(&x, &h, n as f64, 30).unwrap();
        assert!((out.rx_gain - 1.0).abs() < 1e-9);
        assert!(out.penalty_db.abs() < 1e-9);
        for (t, xi) in out.tx.iter().zip(&x) {
            assert!((t - xi).norm() < 1e-9);
        }
    }

    #[test]
    fn diagonal_channel_is_pre_inverted() {
        let n = 8;
        let x = qpsk_block(n, 2);
        let mut h = CMat::zeros(n, n);
        let mut rng = crate::substream(3, "slp", &[]);
        let mut d = Vec::new();
        for i in 0..n {
            let di = randcn(&mut rng) + C::new(2.0, 0.0);
            h[(i, i)] = di;
            d.push(di);
        }
        let out = slp_precode(&x, &h, n as f64, 30).unwrap();
        // received noiseless samples are proportional to the intent
        let rx = h.mul_vec(&out.tx);
        for (r, xi) in rx.iter().zip(&x) {
            let ratio = r / xi;
            assert!((ratio.im).abs() < 1e-9);
            assert!((ratio.re - out.rx_gain).abs() < 1e-9);
        }
        // and the transmit vector is the scaled inverse
        for i in 0..n {
            let expect = x[i] / d[i] * out.rx_gain;
            assert!((out.tx[i] - expect).norm() < 1e-9);
        }
    }

    #[test]
    fn received_points_stay_in_their_ci_region() {
        let n = 32;
        let p = AfdmParams::for_doppler(n, 2);
        let mut rng = crate::substream(5, "slp", &[]);
        let taps = vec![
            AfTap { delay: 0, doppler_bins: 0, gain: randcn(&mut rng) + C::new(1.2, 0.0) },
            AfTap { delay: 2, doppler_bins: 1, gain: randcn(&mut rng) * 0.5 },
        ];
        let h = AfChannelMatrix::from_taps(&taps, &p).to_dense();
        let x = qpsk_block(n, 6);
        let out = slp_precode(&x, &h, n as f64, 40).unwrap();
        let power: f64 = out.tx.iter().map(|c| c.norm_sqr()).sum();
        assert!(power <= n as f64 * (1.0 + 1e-9));
        let rx = h.mul_vec(&out.tx);
        for (r, xi) in rx.iter().zip(&x) {
            // componentwise at least as deep as the scaled intended point
            let margin = out.rx_gain * std::f64::consts::FRAC_1_SQRT_2 - 1e-9;
            assert!(r.re * xi.re.signum() >= margin);
            assert!(r.im * xi.im.signum() >= margin);
        }
    }

    #[test]
    fn relaxation_does_not_lose_to_plain_inversion() {
        // the CI solution must need no more power than plain inversion for
        // the same receive gain, i.e. rx_gain >= the plain-inversion gain
        let n = 24;
        let p = AfdmParams::for_doppler(n, 2);
        for seed in 0..5 {
            let mut rng = crate::substream(seed, "slp-cmp", &[]);
            let taps = vec![
                AfTap { delay: 0, doppler_bins: 0, gain: randcn(&mut rng) + C::new(1.0, 0.0) },
                AfTap { delay: 1, doppler_bins: -1, gain: randcn(&mut rng) * 0.6 },
                AfTap { delay: 4, doppler_bins: 2, gain: randcn(&mut rng) * 0.3 },
            ];
            let h = AfChannelMatrix::from_taps(&taps, &p).to_dense();
            let x = qpsk_block(n, 100 + seed);
            let relaxed = slp_precode(&x, &h, n as f64, 40).unwrap();
            let plain = slp_precode(&x, &h, n as f64, 0).unwrap();
            assert!(
                relaxed.rx_gain >= plain.rx_gain - 1e-9,
                "seed {seed}: {} < {}",
                relaxed.rx_gain,
                plain.rx_gain
            );
        }
    }
}
