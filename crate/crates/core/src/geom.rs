//! Small 3-D vector and axis-aligned-box primitives shared by the scene,
//! channel, imaging, and control modules.

use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// A point or direction in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    /// Unit vector in this direction; `None` for the zero vector.
    pub fn unit(self) -> Option<Vec3> {
        let n = self.norm();
        if n > 0.0 {
            Some(self * (1.0 / n))
        } else {
            None
        }
    }

    /// Horizontal (x, y) distance, ignoring altitude.
    pub fn horizontal_distance(self, other: Vec3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        self * -1.0
    }
}

/// Axis-aligned box given by two opposite corners (`lo` componentwise ≤ `hi`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub lo: Vec3,
    pub hi: Vec3,
}

impl Aabb {
    pub fn new(lo: Vec3, hi: Vec3) -> Self {
        debug_assert!(lo.x <= hi.x && lo.y <= hi.y && lo.z <= hi.z);
        Aabb { lo, hi }
    }

    /// Grows the box by `margin` on every face.
    pub fn inflate(self, margin: f64) -> Aabb {
        let m = Vec3::new(margin, margin, margin);
        Aabb { lo: self.lo - m, hi: self.hi + m }
    }

    /// Closed-interval containment: points on a face count as inside.
    pub fn contains(self, p: Vec3) -> bool {
        p.x >= self.lo.x
            && p.x <= self.hi.x
            && p.y >= self.lo.y
            && p.y <= self.hi.y
            && p.z >= self.lo.z
            && p.z <= self.hi.z
    }

    /// True if the closed segment `a`..`b` intersects the closed box.
    ///
    /// Standard slab test: intersect the segment's parameter interval with
    /// the three axis slabs.
    pub fn intersects_segment(self, a: Vec3, b: Vec3) -> bool {
        let d = b - a;
        let mut t0 = 0.0f64;
        let mut t1 = 1.0f64;
        for (da, pa, lo, hi) in [
            (d.x, a.x, self.lo.x, self.hi.x),
            (d.y, a.y, self.lo.y, self.hi.y),
            (d.z, a.z, self.lo.z, self.hi.z),
        ] {
            if da.abs() < 1e-15 {
                if pa < lo || pa > hi {
                    return false;
                }
            } else {
                let inv = 1.0 / da;
                let mut ta = (lo - pa) * inv;
                let mut tb = (hi - pa) * inv;
                if ta > tb {
                    std::mem::swap(&mut ta, &mut tb);
                }
                t0 = t0.max(ta);
                t1 = t1.min(tb);
                if t0 > t1 {
                    return false;
                }
            }
        }
        true
    }

    /// True if the 2-D footprints (x, y) of the boxes overlap, boundary
    /// contact included.
    pub fn footprint_overlaps(self, other: Aabb) -> bool {
        self.lo.x <= other.hi.x
            && other.lo.x <= self.hi.x
            && self.lo.y <= other.hi.y
            && other.lo.y <= self.hi.y
    }
}
