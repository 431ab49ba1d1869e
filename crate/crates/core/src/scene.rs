//! Synthetic urban world: buildings, ground users, visibility and collision
//! queries, and surface scatterers for echo synthesis.
//!
//! A [`Scene`] is immutable after generation and safe to share read-only
//! across workers. Buildings are axis-aligned boxes standing on the ground
//! plane, which keeps every geometric query exact.

use crate::geom::{Aabb, Vec3};
use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Axis-aligned building box standing on z = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Building {
    /// Footprint center (m).
    pub center_xy: (f64, f64),
    /// Extent along x (m).
    pub width: f64,
    /// Extent along y (m).
    pub depth: f64,
    /// Extent along z (m).
    pub height: f64,
}

impl Building {
    pub fn aabb(&self) -> Aabb {
        let (cx, cy) = self.center_xy;
        Aabb::new(
            Vec3::new(cx - self.width / 2.0, cy - self.depth / 2.0, 0.0),
            Vec3::new(cx + self.width / 2.0, cy + self.depth / 2.0, self.height),
        )
    }
}

/// User on the ground demanding a downlink payload.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundUser {
    /// Position with z = 0 (m).
    pub position: Vec3,
    /// Total payload requested (bits).
    pub demanded_bits: f64,
    /// Payload still outstanding (bits).
    pub remaining_bits: f64,
}

/// The static world a mission runs in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    /// Scene extent: x in `[0, bounds.0]`, y in `[0, bounds.1]` (m).
    pub bounds: (f64, f64),
    pub buildings: Vec<Building>,
    pub users: Vec<GroundUser>,
    /// Seed the scene was generated from.
    pub rng_seed: u64,
}

/// A reflecting point on a building surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    pub position: Vec3,
    /// Dimensionless echo amplitude.
    pub reflectivity: f64,
}

/// Point cloud sampled over building facades and rooftops.
#[derive(Debug, Clone, Default)]
pub struct ScattererSet {
    pub points: Vec<Scatterer>,
}

/// Knobs for [`generate_scene_with`]. Defaults give the reference scenario:
/// ten users each demanding 10 Mbits, building heights 20–100 m.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneParams {
    pub n_users: usize,
    pub demanded_bits: f64,
    pub building_side_m: (f64, f64),
    pub building_height_m: (f64, f64),
    /// Buildings keep this distance from the scene border (m).
    pub edge_margin_m: f64,
    /// Minimum street gap between building footprints (m).
    pub street_gap_m: f64,
    /// Users keep this clearance from building footprints (m).
    pub user_clearance_m: f64,
}

impl Default for SceneParams {
    fn default() -> Self {
        SceneParams {
            n_users: 10,
            demanded_bits: 10.0e6,
            building_side_m: (20.0, 60.0),
            building_height_m: (20.0, 100.0),
            edge_margin_m: 120.0,
            street_gap_m: 25.0,
            user_clearance_m: 8.0,
        }
    }
}

const PLACEMENT_RETRIES: usize = 400;

/// Generates the reference-scenario scene: a pure function of
/// `(seed, n_buildings, bounds)`.
pub fn generate_scene(seed: u64, n_buildings: usize, bounds: (f64, f64)) -> Result<Scene> {
    generate_scene_with(&SceneParams::default(), seed, n_buildings, bounds)
}

/// Generates a scene by rejection sampling: buildings are redrawn until
/// their footprints are disjoint (with a street gap) and inside the bounds,
/// then users are placed in free space.
pub fn generate_scene_with(
    params: &SceneParams,
    seed: u64,
    n_buildings: usize,
    bounds: (f64, f64),
) -> Result<Scene> {
    if bounds.0 <= 0.0 || bounds.1 <= 0.0 {
        return Err(Error::SceneGeneration(format!("bounds must be positive, got {bounds:?}")));
    }
    let mut rng = crate::substream(seed, "scene", &[n_buildings as u64]);
    let mut buildings: Vec<Building> = Vec::with_capacity(n_buildings);
    for i in 0..n_buildings {
        let mut placed = false;
        for _ in 0..PLACEMENT_RETRIES {
            let width = rng.random_range(params.building_side_m.0..=params.building_side_m.1);
            let depth = rng.random_range(params.building_side_m.0..=params.building_side_m.1);
            let height =
                rng.random_range(params.building_height_m.0..=params.building_height_m.1);
            let margin = params.edge_margin_m;
            let cx = rng.random_range(margin + width / 2.0..=bounds.0 - margin - width / 2.0);
            let cy = rng.random_range(margin + depth / 2.0..=bounds.1 - margin - depth / 2.0);
            let candidate = Building { center_xy: (cx, cy), width, depth, height };
            let gap_box = candidate.aabb().inflate(params.street_gap_m);
            if buildings.iter().all(|b| !gap_box.footprint_overlaps(b.aabb())) {
                buildings.push(candidate);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::SceneGeneration(format!(
                "could not place building {i} of {n_buildings} within {PLACEMENT_RETRIES} tries"
            )));
        }
    }

    let mut users = Vec::with_capacity(params.n_users);
    for i in 0..params.n_users {
        let mut placed = false;
        for _ in 0..PLACEMENT_RETRIES {
            let x = rng.random_range(0.0..=bounds.0);
            let y = rng.random_range(0.0..=bounds.1);
            let p = Vec3::new(x, y, 0.0);
            let clear = buildings
                .iter()
                .all(|b| !b.aabb().inflate(params.user_clearance_m).contains(p));
            if clear {
                users.push(GroundUser {
                    position: p,
                    demanded_bits: params.demanded_bits,
                    remaining_bits: params.demanded_bits,
                });
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::SceneGeneration(format!("could not place user {i} in free space")));
        }
    }

    Ok(Scene { bounds, buildings, users, rng_seed: seed })
}

/// True iff the segment `a`..`b` is unobstructed by every building.
///
/// Grazing contact with a face counts as blocked, matching the
/// conservative collision tie-break.
pub fn is_los(a: Vec3, b: Vec3, scene: &Scene) -> bool {
    scene.buildings.iter().all(|bld| !bld.aabb().intersects_segment(a, b))
}

/// True iff `p` is within `margin` of a building (faces included) or
/// outside the scene bounds.
pub fn collides(p: Vec3, scene: &Scene, margin: f64) -> bool {
    if p.x < 0.0 || p.x > scene.bounds.0 || p.y < 0.0 || p.y > scene.bounds.1 || p.z < 0.0 {
        return true;
    }
    scene.buildings.iter().any(|b| b.aabb().inflate(margin).contains(p))
}

/// True iff the swept segment `a`..`b` stays collision-free at `margin`.
pub fn segment_clear(a: Vec3, b: Vec3, scene: &Scene, margin: f64) -> bool {
    if collides(a, scene, margin) || collides(b, scene, margin) {
        return false;
    }
    scene
        .buildings
        .iter()
        .all(|bld| !bld.aabb().inflate(margin).intersects_segment(a, b))
}

impl Scene {
    /// Height of the tallest building, 0 for an empty scene.
    pub fn tallest(&self) -> f64 {
        self.buildings.iter().map(|b| b.height).fold(0.0, f64::max)
    }

    /// Median building height, 0 for an empty scene.
    pub fn median_height(&self) -> f64 {
        if self.buildings.is_empty() {
            return 0.0;
        }
        let mut hs: Vec<f64> = self.buildings.iter().map(|b| b.height).collect();
        hs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        hs[hs.len() / 2]
    }

    /// Serializes to the documented structured-text schema.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scene serializes")
    }

    /// Parses a scene previously written by [`Scene::to_toml`].
    pub fn from_toml(text: &str) -> Result<Scene> {
        toml::from_str(text).map_err(|e| Error::Config(format!("scene parse: {e}")))
    }
}

/// Samples reflecting points over every facade and rooftop at roughly the
/// given spacing. Each face gets `ceil(extent / spacing)` grid cells per
/// axis with one point at each cell center; reflectivity is uniform 1.
pub fn scatterers(scene: &Scene, spacing: f64) -> ScattererSet {
    assert!(spacing > 0.0, "spacing must be positive");
    let mut points = Vec::new();
    for b in &scene.buildings {
        let bb = b.aabb();
        // four facades: two x-normal, two y-normal
        face_grid(&mut points, bb.lo, Vec3::new(0.0, b.depth, 0.0), Vec3::new(0.0, 0.0, b.height), spacing);
        face_grid(
            &mut points,
            Vec3::new(bb.hi.x, bb.lo.y, 0.0),
            Vec3::new(0.0, b.depth, 0.0),
            Vec3::new(0.0, 0.0, b.height),
            spacing,
        );
        face_grid(&mut points, bb.lo, Vec3::new(b.width, 0.0, 0.0), Vec3::new(0.0, 0.0, b.height), spacing);
        face_grid(
            &mut points,
            Vec3::new(bb.lo.x, bb.hi.y, 0.0),
            Vec3::new(b.width, 0.0, 0.0),
            Vec3::new(0.0, 0.0, b.height),
            spacing,
        );
        // rooftop
        face_grid(
            &mut points,
            Vec3::new(bb.lo.x, bb.lo.y, b.height),
            Vec3::new(b.width, 0.0, 0.0),
            Vec3::new(0.0, b.depth, 0.0),
            spacing,
        );
    }
    ScattererSet { points }
}

fn face_grid(out: &mut Vec<Scatterer>, origin: Vec3, u: Vec3, v: Vec3, spacing: f64) {
    let lu = u.norm();
    let lv = v.norm();
    let nu = (lu / spacing).ceil().max(1.0) as usize;
    let nv = (lv / spacing).ceil().max(1.0) as usize;
    for i in 0..nu {
        for j in 0..nv {
            let fu = (i as f64 + 0.5) / nu as f64;
            let fv = (j as f64 + 0.5) / nv as f64;
            out.push(Scatterer { position: origin + u * fu + v * fv, reflectivity: 1.0 });
        }
    }
}
