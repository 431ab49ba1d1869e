//! Desk-scale simulator of a UAV mission that closes the loop between
//! sensing, communication, computation, and control.
//!
//! The crate is organized around the stages of that loop:
//!
//! * [`scene`] — synthetic urban world: buildings, ground users, line of
//!   sight, collision queries, and surface scatterers for imaging.
//! * [`channel`] — doubly-dispersive air-ground link model: delay/Doppler
//!   path taps, path loss, and a Shannon-rate abstraction.
//! * [`waveform`] — OFDM and AFDM modems, AF-domain pilot channel
//!   estimation, MMSE/one-tap equalizers, symbol-level precoding, and the
//!   BER measurement harness.
//! * [`sar`] — imaging by reuse of the wideband downlink waveform: echo
//!   synthesis, range compression, back-projection, and occupancy
//!   extraction.
//! * [`compute`] — UAV/edge/cloud latency and energy models for local
//!   execution, whole-task offloading, and pipelined split execution.
//! * [`control`] — trajectory generation: a tabular RL agent with RRT and
//!   ACO baselines, all evaluated by mission completion time.
//! * [`harness`] — experiment runners and the per-tick closed loop, plus
//!   the file formats (CSV, PGM, manifests) they emit.

pub mod channel;
pub mod compute;
pub mod config;
pub mod control;
pub mod geom;
pub mod harness;
pub mod sar;
pub mod scene;
pub mod waveform;

mod rng;


pub use rng::substream;

/// Errors surfaced by simulator operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("scene generation failed: {0}")]
    SceneGeneration(String),
    #[error("configuration invalid: {0}")]
    Config(String),
    #[error("channel tap delay {delay_s} s exceeds maximum {max_s} s")]
    DelayTooLarge { delay_s: f64, max_s: f64 },
    #[error("linear solve failed: {0}")]
    Solver(String),
    #[error("planner failed: {0}")]
    Planner(String),
    #[error("training diverged: {0}")]
    Divergence(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Propagation speed used throughout the simulator (m/s).
///
/// The rounded value keeps closed-form reference numbers (Doppler shifts,
/// range resolution) exact in the tests.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;
