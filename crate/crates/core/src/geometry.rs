//! Vectors, beam frames and ray/plane intersections.
//!
//! World frame: `x` runs along the road, `y` across it, `z` up. Beam angles
//! follow the scanner convention: elevation `theta` is measured from the
//! downward vertical, azimuth `phi` from the `+x` axis.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Unit vector in the same direction. Zero vectors come back unchanged.
    pub fn normalize(self) -> Vec3 {
        let n = self.norm();
        if n == 0.0 {
            self
        } else {
            self * (1.0 / n)
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
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
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Which of the two scanning fans a beam belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Fan {
    /// Longitudinal fan: fixed elevation, sweeps azimuth.
    #[serde(rename = "L")]
    Longitudinal,
    /// Transverse fan: fixed azimuth, sweeps elevation.
    #[serde(rename = "T")]
    Transverse,
}

impl Fan {
    pub fn label(self) -> &'static str {
        match self {
            Fan::Longitudinal => "L",
            Fan::Transverse => "T",
        }
    }
}

/// Beam-fixed orthonormal basis: `u` is the fan (line) axis, `v` the
/// thickness axis and `d` the propagation axis, with `u x v = d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamFrame {
    pub u: Vec3,
    pub v: Vec3,
    pub d: Vec3,
}

impl BeamFrame {
    /// Determinant of the matrix with columns `[u v d]`.
    pub fn determinant(&self) -> f64 {
        self.u.dot(self.v.cross(self.d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaneKind {
    /// The plane `x = offset`.
    VerticalX,
    /// The plane `z = offset`.
    HorizontalZ,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneSpec {
    pub kind: PlaneKind,
    pub offset: f64,
    pub normal: Vec3,
}

impl PlaneSpec {
    pub fn vertical_x(x: f64) -> Self {
        PlaneSpec {
            kind: PlaneKind::VerticalX,
            offset: x,
            normal: Vec3::X,
        }
    }

    pub fn horizontal_z(z: f64) -> Self {
        PlaneSpec {
            kind: PlaneKind::HorizontalZ,
            offset: z,
            normal: Vec3::Z,
        }
    }

    /// Signed distance of `p` from the plane along its normal.
    pub fn signed_distance(&self, p: Vec3) -> f64 {
        p.dot(self.normal) - self.offset
    }
}

fn check_angles(theta: f64, phi: f64) -> Result<()> {
    if !theta.is_finite() || !phi.is_finite() {
        return Err(Error::Domain(format!(
            "beam angles must be finite (theta = {theta}, phi = {phi})"
        )));
    }
    if !(0.0..std::f64::consts::FRAC_PI_2).contains(&theta) {
        return Err(Error::Domain(format!(
            "elevation {theta} rad is outside [0, pi/2)"
        )));
    }
    Ok(())
}

/// Unit propagation vector `[sin t cos p, sin t sin p, -cos t]`.
pub fn direction_vector(theta: f64, phi: f64) -> Result<Vec3> {
    check_angles(theta, phi)?;
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Ok(Vec3::new(st * cp, st * sp, -ct))
}

/// Beam frame for a fan at the given angles.
///
/// The fan axis is the horizontal unit vector `[-sin p, cos p, 0]`, which is
/// `[0, 1, 0]` at zero azimuth and rotates rigidly with the azimuth. For the
/// transverse fan that is the road-width direction; for the longitudinal fan
/// it is the azimuthal sweep direction. Both fans therefore share the same
/// construction and `fan` is kept for call-site clarity.
pub fn beam_frame(theta: f64, phi: f64, _fan: Fan) -> Result<BeamFrame> {
    let d = direction_vector(theta, phi)?;
    let (sp, cp) = phi.sin_cos();
    let u = Vec3::new(-sp, cp, 0.0);
    let v = d.cross(u).normalize();
    Ok(BeamFrame { u, v, d })
}

/// Intersects the ray `origin + t dir` with `plane`, returning `(t, point)`.
pub fn intersect_plane(origin: Vec3, dir: Vec3, plane: &PlaneSpec) -> Result<(f64, Vec3)> {
    let along = dir.dot(plane.normal);
    if along.abs() < 1e-12 {
        return Err(Error::NoIntersection);
    }
    let t = (plane.offset - origin.dot(plane.normal)) / along;
    if t <= 0.0 {
        return Err(Error::BehindOrigin(t));
    }
    Ok((t, origin + dir * t))
}

/// `|dir . normal|`, clamped into `[0, 1]`.
pub fn incidence_cosine(dir: Vec3, normal: Vec3) -> f64 {
    dir.dot(normal).abs().min(1.0)
}

/// Beam-local coordinates `(x', y', z')` of `point`.
pub fn to_beam_local(point: Vec3, origin: Vec3, frame: &BeamFrame) -> (f64, f64, f64) {
    let r = point - origin;
    (r.dot(frame.u), r.dot(frame.v), r.dot(frame.d))
}

/// Inverse of [`to_beam_local`].
pub fn from_beam_local(local: (f64, f64, f64), origin: Vec3, frame: &BeamFrame) -> Vec3 {
    origin + frame.u * local.0 + frame.v * local.1 + frame.d * local.2
}
