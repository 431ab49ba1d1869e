//! Quick look at the BER sweep used while calibrating the default config.

use sc3_core::waveform::{ber_experiment, BerConfig, Scheme};

fn main() {
    let cfg = BerConfig::default();
    let snrs = [5.0, 10.0, 15.0];
    let speed: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(40.0);
    let frames: usize = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(40);
    println!("speed {speed} m/s, {frames} frames/point, N={}", cfg.modem.n_subcarriers);
    for scheme in [Scheme::OfdmTfPilot, Scheme::OfdmAfPilot, Scheme::AfdmMmse, Scheme::AfdmSlp] {
        let t0 = std::time::Instant::now();
        let pts = ber_experiment(scheme, &snrs, speed, frames, 7, &cfg);
        print!("{:15}", scheme.label());
        for p in &pts {
            print!("  {:6.1} dB: {:.3e} ({}/{})", p.snr_db, p.ber, p.errors, p.bits);
        }
        println!("   [{:.1?}]", t0.elapsed());
    }
}
