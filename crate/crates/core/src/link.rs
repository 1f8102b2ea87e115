//! Incident and received power at a small retroreflector.

use serde::{Deserialize, Serialize};

use crate::beam::{BeamParams, SuperGaussian};
use crate::error::{Error, Result};
use crate::geometry::{beam_frame, incidence_cosine, to_beam_local, BeamFrame, Fan, Vec3};

/// Retroreflector array and co-located receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MrrConfig {
    /// Physical array area (m^2).
    pub array_area: f64,
    /// Overall retro-modulation efficiency in (0, 1].
    pub efficiency: f64,
    /// Receive aperture area at the transmitter (m^2).
    pub rx_area: f64,
    /// Retro-lobe half-angle (rad).
    pub retro_half_angle: f64,
    /// Array plane normal.
    pub plane_normal: Vec3,
}

impl Default for MrrConfig {
    fn default() -> Self {
        MrrConfig {
            array_area: 1e-3,
            efficiency: 0.5,
            rx_area: 0.01,
            retro_half_angle: 1e-3,
            plane_normal: Vec3::X,
        }
    }
}

impl MrrConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.array_area > 0.0 && self.array_area.is_finite()) {
            return Err(Error::Domain("MRR array area must be positive".into()));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::Domain("MRR efficiency must lie in (0, 1]".into()));
        }
        if !(self.rx_area > 0.0 && self.rx_area.is_finite()) {
            return Err(Error::Domain("receiver area must be positive".into()));
        }
        if !(self.retro_half_angle > 0.0 && self.retro_half_angle.is_finite()) {
            return Err(Error::Domain("retro half-angle must be positive".into()));
        }
        let n = self.plane_normal.norm();
        if !((n - 1.0).abs() < 1e-9) {
            return Err(Error::Domain(
                "MRR plane normal must be a unit vector".into(),
            ));
        }
        Ok(())
    }
}

/// Link quantities for one beam state at one MRR location.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkSample {
    /// Transmitter-to-MRR distance (m).
    pub range: f64,
    pub incidence_cos: f64,
    /// Power on the array (W).
    pub incident_power: f64,
    /// Power back at the transmitter-side receiver (W).
    pub received_power: f64,
}

/// `min(1, A_rx / (pi (R delta)^2))`.
pub fn capture_factor(range: f64, mrr: &MrrConfig) -> Result<f64> {
    if !(range > 0.0) {
        return Err(Error::Domain(format!(
            "range must be positive, got {range}"
        )));
    }
    let lobe = std::f64::consts::PI * (range * mrr.retro_half_angle).powi(2);
    Ok((mrr.rx_area / lobe).min(1.0))
}

/// `eta * kappa(R) * P_inc`.
pub fn received_power(incident: f64, range: f64, mrr: &MrrConfig) -> Result<f64> {
    if incident < 0.0 {
        return Err(Error::Domain(format!(
            "incident power must be >= 0, got {incident}"
        )));
    }
    Ok(mrr.efficiency * capture_factor(range, mrr)? * incident)
}

/// Small-aperture incident power `I(x', y', z') A_arr cos(gamma)`.
///
/// The incidence cosine uses the central beam direction against the array
/// normal; beam-local coordinates come from the actual MRR location.
pub fn incident_power(
    beam: &BeamParams,
    theta: f64,
    phi: f64,
    fan: Fan,
    tx_origin: Vec3,
    point: Vec3,
    mrr: &MrrConfig,
) -> Result<f64> {
    let link = LinkEvaluator::new(beam, theta, phi, fan, tx_origin, mrr)?;
    link.incident(point).map(|(_, p)| p)
}

pub fn evaluate_link(
    beam: &BeamParams,
    theta: f64,
    phi: f64,
    fan: Fan,
    tx_origin: Vec3,
    point: Vec3,
    mrr: &MrrConfig,
) -> Result<LinkSample> {
    LinkEvaluator::new(beam, theta, phi, fan, tx_origin, mrr)?.sample(point)
}

/// A beam state with its frame, profile and incidence factor resolved, ready
/// for repeated evaluation at many MRR locations.
#[derive(Debug, Clone, Copy)]
pub struct LinkEvaluator {
    origin: Vec3,
    frame: BeamFrame,
    profile: SuperGaussian,
    cos_incidence: f64,
    mrr: MrrConfig,
}

impl LinkEvaluator {
    pub fn new(
        beam: &BeamParams,
        theta: f64,
        phi: f64,
        fan: Fan,
        tx_origin: Vec3,
        mrr: &MrrConfig,
    ) -> Result<Self> {
        beam.validate()?;
        let frame = beam_frame(theta, phi, fan)?;
        Ok(LinkEvaluator {
            origin: tx_origin,
            frame,
            profile: SuperGaussian::new(beam),
            cos_incidence: incidence_cosine(frame.d, mrr.plane_normal),
            mrr: *mrr,
        })
    }

    pub fn frame(&self) -> &BeamFrame {
        &self.frame
    }

    /// `(range, incident power)` at `point`.
    #[inline]
    pub fn incident(&self, point: Vec3) -> Result<(f64, f64)> {
        let (x, y, z) = to_beam_local(point, self.origin, &self.frame);
        if !(z > 0.0) {
            return Err(Error::Unreachable(z));
        }
        let range = (point - self.origin).norm();
        if self.cos_incidence == 0.0 {
            return Ok((range, 0.0));
        }
        let i = self.profile.intensity(x, y, z);
        Ok((range, i * self.mrr.array_area * self.cos_incidence))
    }

    pub fn sample(&self, point: Vec3) -> Result<LinkSample> {
        let (range, incident) = self.incident(point)?;
        Ok(LinkSample {
            range,
            incidence_cos: self.cos_incidence,
            incident_power: incident,
            received_power: received_power(incident, range, &self.mrr)?,
        })
    }

    /// Received power, with unreachable points reported as zero.
    #[inline]
    pub fn received_or_zero(&self, point: Vec3) -> f64 {
        match self.incident(point) {
            Ok((range, inc)) if inc > 0.0 => received_power(inc, range, &self.mrr).unwrap_or(0.0),
            _ => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::direction_vector;
    use proptest::prelude::*;

    fn beam() -> BeamParams {
        BeamParams::from_divergences(
            0.5,
            1550e-9,
            1f64.to_radians(),
            60f64.to_radians(),
            1,
            1,
            1f64.to_radians(),
            60f64.to_radians(),
        )
        .unwrap()
    }

    #[test]
    fn capture_examples() {
        let mut m = MrrConfig::default();
        assert_eq!(capture_factor(1e-9, &m).unwrap(), 1.0);
        let r = 7.0;
        m.rx_area = std::f64::consts::PI * (r * m.retro_half_angle).powi(2);
        assert!((capture_factor(r, &m).unwrap() - 1.0).abs() < 1e-12);
        let m = MrrConfig::default();
        let k = capture_factor(100.0, &m).unwrap();
        assert!((k - std::f64::consts::FRAC_1_PI).abs() < 1e-12);
        assert!(capture_factor(0.0, &m).is_err());
    }

    #[test]
    fn received_examples() {
        let m = MrrConfig::default();
        assert_eq!(received_power(0.0, 50.0, &m).unwrap(), 0.0);
        let lossless = MrrConfig {
            efficiency: 1.0,
            ..m
        };
        assert_eq!(received_power(2e-3, 1.0, &lossless).unwrap(), 2e-3);
        let p = received_power(1e-3, 100.0, &m).unwrap();
        assert!((p - 0.159_154_943_091_895_3e-3).abs() < 1e-15);
    }

    #[test]
    fn on_axis_normal_incidence() {
        // Beam pointing nearly along +x hits a y-z plane almost head-on; use an
        // MRR normal aligned with the beam so cos(gamma) = 1 exactly.
        let b = beam();
        let (theta, phi) = (1.2, 0.1);
        let d = direction_vector(theta, phi).unwrap();
        let mrr = MrrConfig {
            plane_normal: d,
            ..MrrConfig::default()
        };
        let o = Vec3::new(0.0, 0.0, 6.5);
        let p = o + d * 12.0;
        let inc = incident_power(&b, theta, phi, Fan::Longitudinal, o, p, &mrr).unwrap();
        let on_axis = b.intensity_at(0.0, 0.0, 12.0).unwrap();
        assert!((inc / (on_axis * mrr.array_area) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_radii_off_axis() {
        let b = beam();
        let (theta, phi) = (1.0, 0.0);
        let o = Vec3::new(0.0, 0.0, 6.5);
        let m = MrrConfig::default();
        let f = beam_frame(theta, phi, Fan::Longitudinal).unwrap();
        let z = 9.0;
        let wx = b.profile_at(z).radius_x;
        let centre = o + f.d * z;
        let a = incident_power(&b, theta, phi, Fan::Longitudinal, o, centre, &m).unwrap();
        let off = incident_power(
            &b,
            theta,
            phi,
            Fan::Longitudinal,
            o,
            centre + f.u * (3.0 * wx),
            &m,
        )
        .unwrap();
        assert!((off / (a * (-18f64).exp()) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn grazing_is_zero_not_error() {
        let b = beam();
        let m = MrrConfig {
            plane_normal: Vec3::Y,
            ..MrrConfig::default()
        };
        let o = Vec3::new(0.0, 0.0, 6.5);
        let d = direction_vector(0.9, 0.0).unwrap();
        let s = evaluate_link(&b, 0.9, 0.0, Fan::Transverse, o, o + d * 5.0, &m).unwrap();
        assert_eq!(s.incident_power, 0.0);
        assert_eq!(s.received_power, 0.0);
    }

    #[test]
    fn behind_transmitter_is_unreachable() {
        let b = beam();
        let o = Vec3::new(0.0, 0.0, 6.5);
        let m = MrrConfig::default();
        let r = incident_power(
            &b,
            1.0,
            0.0,
            Fan::Longitudinal,
            o,
            Vec3::new(-20.0, 0.0, 8.0),
            &m,
        );
        assert!(matches!(r, Err(Error::Unreachable(_))));
    }

    #[test]
    fn lossless_on_axis_composition() {
        let b = beam();
        let (theta, phi) = (0.3, 0.0);
        let d = direction_vector(theta, phi).unwrap();
        let m = MrrConfig {
            efficiency: 1.0,
            rx_area: 1.0,
            ..MrrConfig::default()
        };
        let o = Vec3::new(0.0, 0.0, 6.5);
        let s = evaluate_link(&b, theta, phi, Fan::Longitudinal, o, o + d * 5.0, &m).unwrap();
        let expect = b.intensity_at(0.0, 0.0, 5.0).unwrap() * m.array_area * d.x.abs();
        assert!((s.received_power / expect - 1.0).abs() < 1e-12);
        assert_eq!(s.received_power, s.incident_power);
    }

    #[test]
    fn far_field_inverse_square() {
        let b = beam();
        let m = MrrConfig {
            rx_area: 1e6,
            ..MrrConfig::default()
        };
        let (theta, phi) = (1.0, 0.0);
        let d = direction_vector(theta, phi).unwrap();
        let o = Vec3::new(0.0, 0.0, 6.5);
        let zr = crate::beam::rayleigh_range(b.waist_x, b.wavelength)
            .max(crate::beam::rayleigh_range(b.waist_y, b.wavelength));
        let r1 = 20.0 * zr.max(1.0);
        let p1 = incident_power(&b, theta, phi, Fan::Longitudinal, o, o + d * r1, &m).unwrap();
        let p2 =
            incident_power(&b, theta, phi, Fan::Longitudinal, o, o + d * (2.0 * r1), &m).unwrap();
        assert!((p1 / p2 / 4.0 - 1.0).abs() < 0.01);
    }

    proptest! {
        #[test]
        fn sample_matches_recomputed_chain(
            theta in 0.2..1.3f64, phi in -0.4..0.4f64,
            px in 1.0..100.0f64, py in -5.0..5.0f64,
        ) {
            let b = beam();
            let m = MrrConfig::default();
            let o = Vec3::new(0.0, 0.0, 6.5);
            let p = Vec3::new(px, py, 1.5);
            let f = beam_frame(theta, phi, Fan::Longitudinal).unwrap();
            let (x, y, z) = to_beam_local(p, o, &f);
            prop_assume!(z > 0.0);
            let s = evaluate_link(&b, theta, phi, Fan::Longitudinal, o, p, &m).unwrap();
            let r = ((p.x - o.x).powi(2) + (p.y - o.y).powi(2) + (p.z - o.z).powi(2)).sqrt();
            let cos_g = f.d.x.abs();
            let inc = b.intensity_at(x, y, z).unwrap() * m.array_area * cos_g;
            let kappa = (m.rx_area / (std::f64::consts::PI * (r * m.retro_half_angle).powi(2))).min(1.0);
            let rx = m.efficiency * kappa * inc;
            let close = |a: f64, b: f64| a == b || ((a - b) / b).abs() < 1e-12;
            prop_assert!(close(s.range, r));
            prop_assert!(close(s.incidence_cos, cos_g));
            prop_assert!(close(s.incident_power, inc));
            prop_assert!(close(s.received_power, rx));
            prop_assert!(s.received_power <= m.efficiency * s.incident_power);
        }

        #[test]
        fn capture_nonincreasing(r in 0.1..500.0f64, dr in 0.0..100.0f64) {
            let m = MrrConfig::default();
            prop_assert!(capture_factor(r + dr, &m).unwrap() <= capture_factor(r, &m).unwrap());
        }

        #[test]
        fn linear_in_power(theta in 0.3..1.2f64, px in 2.0..60.0f64, py in -4.0..4.0f64) {
            let b = beam();
            let b2 = BeamParams { power_tx: 2.0 * b.power_tx, ..b };
            let m = MrrConfig::default();
            let o = Vec3::new(0.0, 0.0, 6.5);
            let p = Vec3::new(px, py, 1.5);
            let s1 = evaluate_link(&b, theta, 0.0, Fan::Longitudinal, o, p, &m);
            let s2 = evaluate_link(&b2, theta, 0.0, Fan::Longitudinal, o, p, &m);
            if let (Ok(s1), Ok(s2)) = (s1, s2) {
                prop_assert_eq!(2.0 * s1.incident_power, s2.incident_power);
                prop_assert_eq!(2.0 * s1.received_power, s2.received_power);
            }
        }
    }
}
