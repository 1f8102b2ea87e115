//! Anisotropic super-Gaussian line-beam model.
//!
//! Beam-local axes: `x'` is the fan (line) axis, `y'` the thickness axis and
//! `z'` the propagation distance. Each axis has its own waist, divergence and
//! super-Gaussian order. The on-axis intensity is normalised so that the
//! cross-section integrates to the transmit power at every `z'`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent arguments are capped here before `exp`.
pub const EXPONENT_CAP: f64 = 700.0;
/// Intensities below this (W/m^2) are flushed to zero.
pub const INTENSITY_FLOOR: f64 = 1e-300;

/// Optical description of one fan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamParams {
    /// Transmit power (W).
    pub power_tx: f64,
    /// Wavelength (m).
    pub wavelength: f64,
    /// Waist along the line axis `x'` (m).
    pub waist_x: f64,
    /// Waist along the thickness axis `y'` (m).
    pub waist_y: f64,
    pub order_x: u32,
    pub order_y: u32,
    /// Largest admissible line-axis divergence (rad).
    pub div_x_max: f64,
    /// Largest admissible thickness divergence (rad).
    pub div_y_max: f64,
}

impl BeamParams {
    /// Builds parameters whose waists reproduce the given far-field divergences.
    #[allow(clippy::too_many_arguments)]
    pub fn from_divergences(
        power_tx: f64,
        wavelength: f64,
        div_x: f64,
        div_y: f64,
        order_x: u32,
        order_y: u32,
        div_x_max: f64,
        div_y_max: f64,
    ) -> Result<Self> {
        let p = BeamParams {
            power_tx,
            wavelength,
            waist_x: waist_from_divergence(wavelength, div_x)?,
            waist_y: waist_from_divergence(wavelength, div_y)?,
            order_x,
            order_y,
            div_x_max,
            div_y_max,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("power_tx", self.power_tx),
            ("wavelength", self.wavelength),
            ("waist_x", self.waist_x),
            ("waist_y", self.waist_y),
            ("div_x_max", self.div_x_max),
            ("div_y_max", self.div_y_max),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!(
                    "beam {name} must be positive, got {v}"
                )));
            }
        }
        if self.order_x == 0 || self.order_y == 0 {
            return Err(Error::Domain("super-Gaussian orders must be >= 1".into()));
        }
        Ok(())
    }

    pub fn div_x(&self) -> f64 {
        divergence_from_waist(self.wavelength, self.waist_x)
    }

    pub fn div_y(&self) -> f64 {
        divergence_from_waist(self.wavelength, self.waist_y)
    }

    /// Same beam re-shaped to new divergences (waists follow).
    pub fn with_divergences(&self, div_x: f64, div_y: f64) -> Result<Self> {
        Ok(BeamParams {
            waist_x: waist_from_divergence(self.wavelength, div_x)?,
            waist_y: waist_from_divergence(self.wavelength, div_y)?,
            ..*self
        })
    }

    /// Peak intensity at the waist plane, `P / (w0x w0y C(nx) C(ny))`.
    pub fn peak_intensity(&self) -> f64 {
        self.power_tx
            / (self.waist_x
                * self.waist_y
                * normalization_constant(self.order_x)
                * normalization_constant(self.order_y))
    }

    pub fn profile_at(&self, z: f64) -> BeamProfileAt {
        SuperGaussian::new(self).profile_at(z)
    }

    /// Intensity (W/m^2) at beam-local coordinates.
    pub fn intensity_at(&self, x: f64, y: f64, z: f64) -> Result<f64> {
        if !(z > 0.0) {
            return Err(Error::Domain(format!("z' must be positive, got {z}")));
        }
        Ok(SuperGaussian::new(self).intensity(x, y, z))
    }
}

/// Beam radii and on-axis intensity at one propagation distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamProfileAt {
    pub radius_x: f64,
    pub radius_y: f64,
    pub peak: f64,
}

/// `lambda / (pi * div)`.
pub fn waist_from_divergence(wavelength: f64, div: f64) -> Result<f64> {
    if !(div > 0.0) || !div.is_finite() {
        return Err(Error::Domain(format!(
            "divergence must be positive, got {div}"
        )));
    }
    Ok(wavelength / (std::f64::consts::PI * div))
}

/// `lambda / (pi * waist)`.
pub fn divergence_from_waist(wavelength: f64, waist: f64) -> f64 {
    wavelength / (std::f64::consts::PI * waist)
}

/// Hyperbolic radius growth `w0 sqrt(1 + (z / z_R)^2)`, `z_R = pi w0^2 / lambda`.
pub fn beam_radius(waist: f64, wavelength: f64, z: f64) -> f64 {
    let zr = rayleigh_range(waist, wavelength);
    waist * (z / zr).hypot(1.0)
}

pub fn rayleigh_range(waist: f64, wavelength: f64) -> f64 {
    std::f64::consts::PI * waist * waist / wavelength
}

/// `C(n) = integral of exp(-2|u|^(2n)) du = 2^(-1/(2n)) Gamma(1/(2n)) / n`.
pub fn normalization_constant(order: u32) -> f64 {
    let n = f64::from(order.max(1));
    let a = 1.0 / (2.0 * n);
    2f64.powf(-a) * libm::tgamma(a) / n
}

/// Evaluation-ready form of [`BeamParams`], with the normalisation folded in.
#[derive(Debug, Clone, Copy)]
pub struct SuperGaussian {
    i0: f64,
    w0x: f64,
    w0y: f64,
    zrx: f64,
    zry: f64,
    px: i32,
    py: i32,
}

impl SuperGaussian {
    pub fn new(p: &BeamParams) -> Self {
        SuperGaussian {
            i0: p.peak_intensity(),
            w0x: p.waist_x,
            w0y: p.waist_y,
            zrx: rayleigh_range(p.waist_x, p.wavelength),
            zry: rayleigh_range(p.waist_y, p.wavelength),
            px: 2 * p.order_x as i32,
            py: 2 * p.order_y as i32,
        }
    }

    #[inline]
    pub fn radii(&self, z: f64) -> (f64, f64) {
        (
            self.w0x * (z / self.zrx).hypot(1.0),
            self.w0y * (z / self.zry).hypot(1.0),
        )
    }

    pub fn profile_at(&self, z: f64) -> BeamProfileAt {
        let (wx, wy) = self.radii(z);
        BeamProfileAt {
            radius_x: wx,
            radius_y: wy,
            peak: self.i0 * (self.w0x / wx) * (self.w0y / wy),
        }
    }

    /// Intensity at `(x, y, z)`; the caller guarantees `z > 0`.
    #[inline]
    pub fn intensity(&self, x: f64, y: f64, z: f64) -> f64 {
        let (wx, wy) = self.radii(z);
        let mut arg = 2.0 * (x / wx).abs().powi(self.px);
        if arg < EXPONENT_CAP {
            arg += 2.0 * (y / wy).abs().powi(self.py);
        }
        let v = self.i0 * (self.w0x / wx) * (self.w0y / wy) * (-arg.min(EXPONENT_CAP)).exp();
        if v < INTENSITY_FLOOR {
            0.0
        } else {
            v
        }
    }
}

/// One-dimensional line-axis cut through a beam, normalised to its on-axis value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileCut {
    pub order: u32,
    /// Line-axis radius `w_x(z)` at the cut distance (m).
    pub radius: f64,
    pub offsets: Vec<f64>,
    pub values: Vec<f64>,
}

impl ProfileCut {
    pub fn half_width(&self) -> f64 {
        self.offsets.last().copied().unwrap_or(0.0)
    }

    /// Normalised intensity at `offset`, linearly interpolated.
    pub fn value_at(&self, offset: f64) -> f64 {
        let xs = &self.offsets;
        if xs.is_empty() {
            return 0.0;
        }
        if offset <= xs[0] {
            return self.values[0];
        }
        let i = xs.partition_point(|&x| x < offset);
        if i >= xs.len() {
            return *self.values.last().unwrap();
        }
        let (x0, x1) = (xs[i - 1], xs[i]);
        let t = (offset - x0) / (x1 - x0);
        self.values[i - 1] + t * (self.values[i] - self.values[i - 1])
    }

    /// Full width at half maximum, found by interpolating the positive flank.
    pub fn fwhm(&self) -> f64 {
        let start = self.offsets.partition_point(|&x| x < 0.0);
        for i in start.max(1)..self.offsets.len() {
            if self.values[i] < 0.5 && self.values[i - 1] >= 0.5 {
                let (x0, x1) = (self.offsets[i - 1], self.offsets[i]);
                let (v0, v1) = (self.values[i - 1], self.values[i]);
                return 2.0 * (x0 + (0.5 - v0) / (v1 - v0) * (x1 - x0));
            }
        }
        f64::NAN
    }
}

/// Cut of `beam` along its line axis at distance `z`, spanning
/// `+-half_width_factor * w_x(z)` with `samples` points (odd counts include 0).
pub fn line_axis_cut(
    beam: &BeamParams,
    z: f64,
    samples: usize,
    half_width_factor: f64,
) -> Result<ProfileCut> {
    if !(z > 0.0) {
        return Err(Error::Domain(format!(
            "cut distance must be positive, got {z}"
        )));
    }
    if samples < 2 {
        return Err(Error::Domain(
            "a profile cut needs at least two samples".into(),
        ));
    }
    let sg = SuperGaussian::new(beam);
    let radius = sg.radii(z).0;
    let half = half_width_factor * radius;
    let on_axis = sg.intensity(0.0, 0.0, z);
    let offsets: Vec<f64> = (0..samples)
        .map(|i| -half + 2.0 * half * i as f64 / (samples - 1) as f64)
        .collect();
    let values = offsets
        .iter()
        .map(|&x| sg.intensity(x, 0.0, z) / on_axis)
        .collect();
    Ok(ProfileCut {
        order: beam.order_x,
        radius,
        offsets,
        values,
    })
}

/// Default cut used for the order comparison: 1550 nm, thickness order 1,
/// +-1.5 radii, 401 samples.
pub fn profile_flatness(order: u32, div_x: f64, div_y: f64, z: f64) -> Result<ProfileCut> {
    let beam = BeamParams::from_divergences(1.0, 1550e-9, div_x, div_y, order, 1, div_x, div_y)?;
    line_axis_cut(&beam, z, 401, 1.5)
}
