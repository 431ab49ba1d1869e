//! Imaging by reuse of the wideband downlink waveform: frequency-domain
//! echo synthesis over the flight path, range compression, back-projection
//! onto a ground grid, and extraction of an occupancy map for the
//! controller.
//!
//! The transmitted data symbols are divided out at the receiver (the radar
//! knows its own waveform), so echoes are modeled directly in the
//! frequency domain: scatterer `s` at range `R` contributes
//! `refl * R^-2 * exp(-j 4 pi f_k R / c)` on subcarrier `k`.

use crate::geom::Vec3;
use crate::scene::{Scene, ScattererSet};
use crate::{Error, Result, SPEED_OF_LIGHT};
use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write as _;

type C = Complex<f64>;

/// Ground-plane image raster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SarGrid {
    /// World coordinates of pixel (0, 0) (m).
    pub origin: (f64, f64),
    /// Pixel pitch (m); pixel `(i, j)` sits at `origin + (i, j) * pixel`.
    pub pixel_m: f64,
    pub width: usize,
    pub height: usize,
}

impl SarGrid {
    pub fn centered(center: (f64, f64), extent_m: f64, pixels: usize) -> Self {
        let pixel_m = extent_m / pixels as f64;
        SarGrid {
            origin: (center.0 - extent_m / 2.0, center.1 - extent_m / 2.0),
            pixel_m,
            width: pixels,
            height: pixels,
        }
    }

    pub fn pixel_xy(&self, i: usize, j: usize) -> (f64, f64) {
        (self.origin.0 + i as f64 * self.pixel_m, self.origin.1 + j as f64 * self.pixel_m)
    }
}

/// Radar numerology: the wideband downlink allocation reused as the probe.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SarConfig {
    pub n_subcarriers: usize,
    pub subcarrier_spacing_hz: f64,
    pub carrier_hz: f64,
    /// Pulse (frame) repetition interval (s).
    pub pri_s: f64,
    /// Zero-padding factor of the range transform.
    pub oversample: usize,
    pub grid: SarGrid,
}

impl SarConfig {
    pub fn bandwidth_hz(&self) -> f64 {
        self.n_subcarriers as f64 * self.subcarrier_spacing_hz
    }

    /// Nominal slant-range resolution `c / 2B` (m).
    pub fn range_resolution_m(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.bandwidth_hz())
    }

    /// Absolute frequency of subcarrier `k`, band centered on the carrier.
    fn subcarrier_hz(&self, k: usize) -> f64 {
        self.carrier_hz
            + (k as f64 - self.n_subcarriers as f64 / 2.0) * self.subcarrier_spacing_hz
    }
}

impl Default for SarConfig {
    fn default() -> Self {
        SarConfig {
            n_subcarriers: 1200,
            subcarrier_spacing_hz: 120e3,
            carrier_hz: 5.8e9,
            pri_s: 0.05,
            oversample: 8,
            grid: SarGrid::centered((500.0, 500.0), 1000.0, 256),
        }
    }
}

/// Slow-time by fast-time echo record: one frequency-domain row per
/// platform position.
#[derive(Debug, Clone, Default)]
pub struct EchoBuffer {
    pub positions: Vec<Vec3>,
    pub rows: Vec<Vec<C>>,
}

impl EchoBuffer {
    pub fn append(&mut self, other: &mut EchoBuffer) {
        self.positions.append(&mut other.positions);
        self.rows.append(&mut other.rows);
    }
}

/// Reconstructed intensity raster.
#[derive(Debug, Clone)]
pub struct SarImage {
    pub grid: SarGrid,
    /// Row-major `height x width`, entry `j * width + i`.
    pub intensity: Vec<f64>,
    pub peak_normalized: bool,
}

impl SarImage {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.intensity[j * self.grid.width + i]
    }

    pub fn peak(&self) -> (usize, usize, f64) {
        let mut best = (0, 0, f64::MIN);
        for j in 0..self.grid.height {
            for i in 0..self.grid.width {
                let v = self.at(i, j);
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        best
    }

    /// Writes the image as a binary PGM with a plain-text header plus a
    /// sidecar text file carrying the world placement.
    pub fn write_pgm(&self, path: &std::path::Path) -> Result<()> {
        let maxv = self.intensity.iter().copied().fold(0.0, f64::max).max(1e-300);
        let mut data = Vec::with_capacity(self.intensity.len());
        for j in (0..self.grid.height).rev() {
            for i in 0..self.grid.width {
                data.push((self.at(i, j) / maxv * 255.0).round().clamp(0.0, 255.0) as u8);
            }
        }
        let mut f = std::fs::File::create(path)?;
        writeln!(f, "P5")?;
        writeln!(f, "{} {}", self.grid.width, self.grid.height)?;
        writeln!(f, "255")?;
        f.write_all(&data)?;

        let meta = path.with_extension("meta.txt");
        let mut m = std::fs::File::create(meta)?;
        writeln!(m, "origin_x_m {}", self.grid.origin.0)?;
        writeln!(m, "origin_y_m {}", self.grid.origin.1)?;
        writeln!(m, "pixel_m {}", self.grid.pixel_m)?;
        writeln!(m, "width {}", self.grid.width)?;
        writeln!(m, "height {}", self.grid.height)?;
        writeln!(m, "peak_normalized {}", self.peak_normalized)?;
        Ok(())
    }
}

/// Synthesizes frequency-domain echoes of the known waveform along the
/// trajectory: two-way amplitude `R^-2`, linear phase across subcarriers.
/// `noise_psd > 0` adds receiver noise per subcarrier sample.
pub fn synthesize_echoes(
    trajectory: &[Vec3],
    scat: &ScattererSet,
    cfg: &SarConfig,
    noise_psd: f64,
    seed: u64,
) -> EchoBuffer {
    let n = cfg.n_subcarriers;
    let f0 = cfg.subcarrier_hz(0);
    let rows: Vec<Vec<C>> = trajectory
        .par_iter()
        .enumerate()
        .map(|(idx, &pos)| {
            let mut row = vec![C::new(0.0, 0.0); n];
            for s in &scat.points {
                let r = pos.distance(s.position).max(1.0);
                let amp = s.reflectivity / (r * r);
                // phase advances linearly with subcarrier index
                let dphi = -4.0 * PI * cfg.subcarrier_spacing_hz * r / SPEED_OF_LIGHT;
                let step = C::from_polar(1.0, dphi);
                let mut phasor = C::from_polar(amp, -4.0 * PI * f0 * r / SPEED_OF_LIGHT);
                for slot in row.iter_mut() {
                    *slot += phasor;
                    phasor *= step;
                }
            }
            if noise_psd > 0.0 {
                let mut rng = crate::substream(seed, "sar-noise", &[idx as u64]);
                let sigma = (noise_psd * cfg.bandwidth_hz()).sqrt();
                for slot in row.iter_mut() {
                    *slot += crate::channel::randcn(&mut rng) * sigma;
                }
            }
            row
        })
        .collect();
    EchoBuffer { positions: trajectory.to_vec(), rows }
}

/// Matched-filtered range profile of one echo row: an oversampled inverse
/// transform of the band-centered spectrum. Index `n` corresponds to
/// round-trip delay `n / (oversample * B)` seconds, wrapping at `1 / spacing`.
pub fn range_compress(row: &[C], cfg: &SarConfig) -> Vec<C> {
    let n = cfg.n_subcarriers;
    assert_eq!(row.len(), n);
    let len = n * cfg.oversample;
    let mut buf = vec![C::new(0.0, 0.0); len];
    buf[..n].copy_from_slice(row);
    let mut planner = rustfft::FftPlanner::new();
    planner.plan_fft_inverse(len).process(&mut buf);
    // re-center the band: multiply by exp(-j pi n' / oversample)
    for (i, v) in buf.iter_mut().enumerate() {
        *v *= C::from_polar(1.0, -PI * i as f64 / cfg.oversample as f64);
    }
    buf
}

/// Delay-domain bin of a given range (meters) in the compressed profile.
fn range_to_bin(r: f64, cfg: &SarConfig) -> usize {
    let len = cfg.n_subcarriers * cfg.oversample;
    let delay = 2.0 * r / SPEED_OF_LIGHT;
    let bin = (delay * cfg.subcarrier_spacing_hz * len as f64).round() as i64;
    bin.rem_euclid(len as i64) as usize
}

/// Coherent back-projection of the whole buffer onto the ground grid.
///
/// Every pixel accumulates the nearest range-profile sample of every pulse
/// with the carrier phase at that range compensated; intensity is the
/// squared magnitude, normalized to a unit peak.
pub fn back_project(buf: &EchoBuffer, cfg: &SarConfig) -> SarImage {
    assert!(buf.positions.len() >= 2, "need at least 2 slow-time positions");
    let profiles: Vec<Vec<C>> =
        buf.rows.par_iter().map(|row| range_compress(row, cfg)).collect();
    let acc = project_accumulate(&buf.positions, &profiles, cfg);
    let mut intensity: Vec<f64> = acc.iter().map(|c| c.norm_sqr()).collect();
    let peak = intensity.iter().copied().fold(0.0, f64::max);
    if peak > 0.0 {
        for v in &mut intensity {
            *v /= peak;
        }
    }
    SarImage { grid: cfg.grid, intensity, peak_normalized: true }
}

/// Complex accumulation used by both the batch and the incremental
/// (closed-loop) imaging paths.
pub fn project_accumulate(positions: &[Vec3], profiles: &[Vec<C>], cfg: &SarConfig) -> Vec<C> {
    let grid = cfg.grid;
    let k_carrier = 4.0 * PI * cfg.carrier_hz / SPEED_OF_LIGHT;
    (0..grid.width * grid.height)
        .into_par_iter()
        .map(|cell| {
            let i = cell % grid.width;
            let j = cell / grid.width;
            let (x, y) = grid.pixel_xy(i, j);
            let q = Vec3::new(x, y, 0.0);
            let mut acc = C::new(0.0, 0.0);
            for (pos, profile) in positions.iter().zip(profiles) {
                let r = pos.distance(q);
                let bin = range_to_bin(r, cfg);
                acc += profile[bin] * C::from_polar(1.0, k_carrier * r);
            }
            acc
        })
        .collect()
}

/// Point-response widths measured on a single-scatterer image.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ResolutionReport {
    /// -3 dB width along the range direction (grid y), meters.
    pub range_width_m: f64,
    /// -3 dB width along the azimuth direction (grid x), meters.
    pub azimuth_width_m: f64,
    pub peak_xy: (f64, f64),
}

/// Measures -3 dB widths of the point response around the image peak.
///
/// Assumes the reference side-looking geometry: platform track along x
/// (azimuth), range along y. Fails when the peak is not unique or a cut
/// never falls below half power.
pub fn resolution_report(img: &SarImage, true_point: Vec3) -> Result<ResolutionReport> {
    let (pi, pj, peak) = img.peak();
    if peak <= 0.0 {
        return Err(Error::Planner("image has no peak".into()));
    }
    let near_duplicate = (0..img.grid.height)
        .flat_map(|j| (0..img.grid.width).map(move |i| (i, j)))
        .any(|(i, j)| {
            (i != pi || j != pj)
                && img.at(i, j) >= peak * (1.0 - 1e-9)
                && (i.abs_diff(pi) > 2 || j.abs_diff(pj) > 2)
        });
    if near_duplicate {
        return Err(Error::Planner("no unique image peak".into()));
    }
    let (px, py) = img.grid.pixel_xy(pi, pj);
    let err = img.grid.pixel_m.hypot(img.grid.pixel_m);
    if Vec3::new(px, py, 0.0).horizontal_distance(true_point) > 4.0 * err + 2.0 {
        return Err(Error::Planner(format!(
            "peak ({px:.1}, {py:.1}) far from target ({}, {})",
            true_point.x, true_point.y
        )));
    }

    let row: Vec<f64> = (0..img.grid.width).map(|i| img.at(i, pj)).collect();
    let col: Vec<f64> = (0..img.grid.height).map(|j| img.at(pi, j)).collect();
    let azimuth = width_at_half(&row, pi, img.grid.pixel_m)?;
    let range = width_at_half(&col, pj, img.grid.pixel_m)?;
    Ok(ResolutionReport { range_width_m: range, azimuth_width_m: azimuth, peak_xy: (px, py) })
}

fn width_at_half(cut: &[f64], peak_idx: usize, pixel_m: f64) -> Result<f64> {
    let half = cut[peak_idx] / 2.0;
    let mut right = None;
    for i in peak_idx..cut.len() - 1 {
        if cut[i] >= half && cut[i + 1] < half {
            let t = (cut[i] - half) / (cut[i] - cut[i + 1]);
            right = Some(i as f64 + t);
            break;
        }
    }
    let mut left = None;
    for i in (1..=peak_idx).rev() {
        if cut[i] >= half && cut[i - 1] < half {
            let t = (cut[i] - half) / (cut[i] - cut[i - 1]);
            left = Some(i as f64 - t);
            break;
        }
    }
    match (left, right) {
        (Some(l), Some(r)) => Ok((r - l) * pixel_m),
        _ => Err(Error::Planner("half-power crossing not found in cut".into())),
    }
}

/// Map of blocked heights on a ground raster: a cell blocks flight below
/// `blocked_height_m`. Produced either from sensed imagery or from the
/// true scene, and consumed by the controller.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    pub origin: (f64, f64),
    pub pixel_m: f64,
    pub width: usize,
    pub height: usize,
    pub blocked_height_m: Vec<f64>,
}

impl OccupancyGrid {
    pub fn blocked_at(&self, i: usize, j: usize) -> f64 {
        self.blocked_height_m[j * self.width + i]
    }

    fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let i = ((x - self.origin.0) / self.pixel_m).floor();
        let j = ((y - self.origin.1) / self.pixel_m).floor();
        if i < 0.0 || j < 0.0 || i >= self.width as f64 || j >= self.height as f64 {
            return None;
        }
        Some((i as usize, j as usize))
    }

    /// True if flying at `p` would be inside a blocked cell volume.
    pub fn is_blocked(&self, p: Vec3) -> bool {
        match self.cell_of(p.x, p.y) {
            Some((i, j)) => p.z <= self.blocked_at(i, j),
            None => false,
        }
    }

    /// Conservative check along the segment by stepping at half-pixel
    /// resolution.
    pub fn segment_blocked(&self, a: Vec3, b: Vec3) -> bool {
        let steps = (a.distance(b) / (self.pixel_m * 0.5)).ceil().max(1.0) as usize;
        (0..=steps).any(|s| self.is_blocked(a + (b - a) * (s as f64 / steps as f64)))
    }

    /// Ground-truth map: per-cell tallest building height (with margin).
    pub fn from_scene(scene: &Scene, pixel_m: f64, margin_m: f64) -> Self {
        let width = (scene.bounds.0 / pixel_m).ceil() as usize;
        let height = (scene.bounds.1 / pixel_m).ceil() as usize;
        let mut blocked = vec![0.0f64; width * height];
        for b in &scene.buildings {
            let bb = b.aabb().inflate(margin_m);
            let i0 = ((bb.lo.x / pixel_m).floor().max(0.0)) as usize;
            let j0 = ((bb.lo.y / pixel_m).floor().max(0.0)) as usize;
            let i1 = ((bb.hi.x / pixel_m).ceil() as usize).min(width);
            let j1 = ((bb.hi.y / pixel_m).ceil() as usize).min(height);
            for j in j0..j1 {
                for i in i0..i1 {
                    let cell = &mut blocked[j * width + i];
                    *cell = cell.max(b.height + margin_m);
                }
            }
        }
        OccupancyGrid { origin: (0.0, 0.0), pixel_m, width, height, blocked_height_m: blocked }
    }

    /// Fraction of cells both blocked here and in `other` over cells
    /// blocked in either (intersection over union of footprints).
    pub fn footprint_iou(&self, other: &OccupancyGrid) -> f64 {
        assert_eq!((self.width, self.height), (other.width, other.height));
        let mut inter = 0usize;
        let mut union = 0usize;
        for (a, b) in self.blocked_height_m.iter().zip(&other.blocked_height_m) {
            let (a, b) = (*a > 0.0, *b > 0.0);
            if a && b {
                inter += 1;
            }
            if a || b {
                union += 1;
            }
        }
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }
}

/// Thresholds a peak-normalized image into an occupancy map, dilated by a
/// safety margin in cells; blocked cells get the given conservative
/// height.
pub fn image_to_occupancy(
    img: &SarImage,
    threshold: f64,
    dilate_cells: usize,
    assumed_height_m: f64,
) -> OccupancyGrid {
    assert!(img.peak_normalized, "threshold is relative to a unit peak");
    let (w, h) = (img.grid.width, img.grid.height);
    let mut raw = vec![false; w * h];
    for j in 0..h {
        for i in 0..w {
            raw[j * w + i] = img.at(i, j) >= threshold;
        }
    }
    let mut blocked = vec![0.0f64; w * h];
    for j in 0..h {
        for i in 0..w {
            let j0 = j.saturating_sub(dilate_cells);
            let i0 = i.saturating_sub(dilate_cells);
            let j1 = (j + dilate_cells + 1).min(h);
            let i1 = (i + dilate_cells + 1).min(w);
            let any = (j0..j1).any(|jj| (i0..i1).any(|ii| raw[jj * w + ii]));
            if any {
                blocked[j * w + i] = assumed_height_m;
            }
        }
    }
    OccupancyGrid {
        origin: img.grid.origin,
        pixel_m: img.grid.pixel_m,
        width: w,
        height: h,
        blocked_height_m: blocked,
    }
}
