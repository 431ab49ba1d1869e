//! Receive-side equalizers: per-subcarrier MMSE scalars for the OFDM
//! grid, and the full AF-domain MMSE solve for AFDM.

use super::afmatrix::AfChannelMatrix;
use super::linalg::{CholeskyFactor, CMat};
use crate::Result;
use num_complex::Complex;

type C = Complex<f64>;

/// Per-subcarrier MMSE scalar equalizer `h* y / (|h|^2 + sigma2)`;
/// zero-forcing when `sigma2 = 0`.
pub fn equalize_onetap(rx_grid: &[C], tf_coeffs: &[C], noise_var: f64) -> Vec<C> {
    assert_eq!(rx_grid.len(), tf_coeffs.len());
    rx_grid
        .iter()
        .zip(tf_coeffs)
        .map(|(y, h)| {
            let denom = h.norm_sqr() + noise_var;
            if denom < 1e-300 {
                C::new(0.0, 0.0)
            } else {
                h.conj() * y / denom
            }
        })
        .collect()
}

/// AF-domain MMSE equalization `(H^H H + sigma2 I)^-1 H^H y` through a
/// Cholesky solve of the Gram system. Ill-conditioned channels surface as
/// a solver error and the caller drops the frame.
pub fn afdm_mmse_equalize(rx_af: &[C], h_af: &CMat, noise_var: f64) -> Result<Vec<C>> {
    assert_eq!(rx_af.len(), h_af.rows);
    let gram = h_af.gram_regularized(noise_var);
    let rhs = h_af.herm_mul_vec(rx_af);
    Ok(CholeskyFactor::new(&gram)?.solve(&rhs))
}

/// Same solve on the sparse channel representation; used by the BER
/// harness where the Gram assembly dominates.
pub fn afdm_mmse_equalize_sparse(
    rx_af: &[C],
    h_af: &AfChannelMatrix,
    noise_var: f64,
) -> Result<Vec<C>> {
    assert_eq!(rx_af.len(), h_af.n());
    let gram = h_af.gram_regularized(noise_var);
    let rhs = h_af.herm_mul_vec(rx_af);
    Ok(CholeskyFactor::new(&gram)?.solve(&rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::randcn;
    use crate::waveform::{AfChannelMatrix, AfTap, AfdmParams};

    #[test]
    fn all_ones_zero_noise_is_identity() {
        let y = vec![C::new(0.3, -0.7), C::new(-1.0, 0.2)];
        let h = vec![C::new(1.0, 0.0); 2];
        let out = equalize_onetap(&y, &h, 0.0);
        for (a, b) in y.iter().zip(&out) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn scalar_channel_is_inverted_exactly() {
        let h = vec![C::from_polar(2.0, 0.9); 4];
        let x = vec![C::new(1.0, -1.0); 4];
        let y: Vec<C> = x.iter().map(|v| v * h[0]).collect();
        let out = equalize_onetap(&y, &h, 0.0);
        for (a, b) in x.iter().zip(&out) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_coefficient_does_not_blow_up() {
        let out = equalize_onetap(&[C::new(1.0, 1.0)], &[C::new(0.0, 0.0)], 0.0);
        assert_eq!(out[0], C::new(0.0, 0.0));
    }

    fn random_af_matrix(n: usize, seed: u64) -> AfChannelMatrix {
        let p = AfdmParams::for_doppler(n, 2);
        let mut rng = crate::substream(seed, "eq", &[]);
        let taps = vec![
            AfTap { delay: 0, doppler_bins: 0, gain: randcn(&mut rng) + C::new(1.5, 0.0) },
            AfTap { delay: 1, doppler_bins: 1, gain: randcn(&mut rng) * 0.4 },
            AfTap { delay: 3, doppler_bins: -2, gain: randcn(&mut rng) * 0.2 },
        ];
        AfChannelMatrix::from_taps(&taps, &p)
    }

    #[test]
    fn identity_channel_zero_noise_returns_input() {
        let n = 16;
        let p = AfdmParams::for_doppler(n, 1);
        let h = AfChannelMatrix::from_taps(
            &[AfTap { delay: 0, doppler_bins: 0, gain: C::new(1.0, 0.0) }],
            &p,
        )
        .to_dense();
        let mut rng = crate::substream(41, "eq", &[]);
        let y: Vec<C> = (0..n).map(|_| randcn(&mut rng)).collect();
        let out = afdm_mmse_equalize(&y, &h, 0.0).unwrap();
        for (a, b) in y.iter().zip(&out) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn matches_dense_inverse_oracle() {
        // oracle: explicit inverse of the regularized Gram matrix via
        // nalgebra, applied to H^H y
        let n = 16;
        for seed in 0..4 {
            let h = random_af_matrix(n, seed).to_dense();
            let mut rng = crate::substream(seed, "eq-rhs", &[]);
            let y: Vec<C> = (0..n).map(|_| randcn(&mut rng)).collect();
            let sigma2 = 0.05;
            let ours = afdm_mmse_equalize(&y, &h, sigma2).unwrap();

            let na = nalgebra::DMatrix::from_fn(n, n, |i, j| h[(i, j)]);
            let gram = na.adjoint() * &na
                + nalgebra::DMatrix::from_diagonal_element(n, n, C::new(sigma2, 0.0));
            let inv = gram.try_inverse().unwrap();
            let rhs = na.adjoint() * nalgebra::DVector::from_vec(y.clone());
            let oracle = inv * rhs;
            for i in 0..n {
                assert!((ours[i] - oracle[i]).norm() < 1e-8, "seed {seed} index {i}");
            }
        }
    }

    #[test]
    fn sparse_and_dense_solves_agree() {
        let n = 24;
        let sparse = random_af_matrix(n, 9);
        let dense = sparse.to_dense();
        let mut rng = crate::substream(10, "eq-rhs", &[]);
        let y: Vec<C> = (0..n).map(|_| randcn(&mut rng)).collect();
        let a = afdm_mmse_equalize(&y, &dense, 0.02).unwrap();
        let b = afdm_mmse_equalize_sparse(&y, &sparse, 0.02).unwrap();
        for i in 0..n {
            assert!((a[i] - b[i]).norm() < 1e-10);
        }
    }

    #[test]
    fn high_noise_approaches_matched_filter() {
        let n = 16;
        let h = random_af_matrix(n, 2).to_dense();
        let mut rng = crate::substream(3, "eq-rhs", &[]);
        let y: Vec<C> = (0..n).map(|_| randcn(&mut rng)).collect();
        let sigma2 = 1e9;
        let out = afdm_mmse_equalize(&y, &h, sigma2).unwrap();
        let mf: Vec<C> = h.herm_mul_vec(&y).iter().map(|v| v / sigma2).collect();
        // cosine similarity between the two directions
        let dot: C = out.iter().zip(&mf).map(|(a, b)| a.conj() * b).sum();
        let na: f64 = out.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let nb: f64 = mf.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let cosine = dot.norm() / (na * nb);
        assert!(cosine > 0.999, "cosine {cosine}");
    }

    #[test]
    fn singular_channel_reports_failure() {
        // zero channel matrix with zero noise has a singular Gram system
        let h = CMat::zeros(8, 8);
        let y = vec![C::new(1.0, 0.0); 8];
        assert!(afdm_mmse_equalize(&y, &h, 0.0).is_err());
    }
}
