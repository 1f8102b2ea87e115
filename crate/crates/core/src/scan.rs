//! Scan geometry and schedules for the two fans.
//!
//! The transverse fan holds zero azimuth and steps its elevation so that its
//! line crosses the road width at a moving longitudinal position. The
//! longitudinal fan holds its elevation and steps azimuth over a symmetric
//! geometric grid; each node dwells in proportion to the angular span it owns.

use serde::{Deserialize, Serialize};

use crate::beam::BeamParams;
use crate::error::{Error, Result};
use crate::geometry::{Fan, Vec3};

/// Relative slack when deciding whether a grid node still lies inside `phi_max`.
pub const NODE_TOLERANCE: f64 = 1e-12;
/// Default hard cap on the number of longitudinal states.
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoadTopology {
    /// Road length along `x` (m); the road spans `0 <= x <= length`.
    pub length: f64,
    /// Road width along `y` (m); the road spans `|y| <= width / 2`.
    pub width: f64,
    pub tx_height: f64,
    pub mrr_height: f64,
    /// Transmitter ground position `(x, y)` (m).
    pub tx_xy: (f64, f64),
}

impl RoadTopology {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("length", self.length), ("width", self.width)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!(
                    "road {name} must be positive, got {v}"
                )));
            }
        }
        if !(self.mrr_height > 0.0 && self.mrr_height < self.tx_height) {
            return Err(Error::Domain(format!(
                "need 0 < mrr_height < tx_height, got {} and {}",
                self.mrr_height, self.tx_height
            )));
        }
        Ok(())
    }

    /// Height of the transmitter above the MRR plane.
    pub fn gap(&self) -> f64 {
        self.tx_height - self.mrr_height
    }

    pub fn tx_origin(&self) -> Vec3 {
        Vec3::new(self.tx_xy.0, self.tx_xy.1, self.tx_height)
    }
}

/// Illuminated span across the road at the MRR plane.
pub fn transverse_span(theta_t: f64, topo: &RoadTopology, div_y: f64) -> Result<f64> {
    let c = theta_t.cos();
    if !(c >= 1e-9) {
        return Err(Error::Domain(format!(
            "elevation {theta_t} rad is too close to horizontal"
        )));
    }
    if !(div_y > 0.0 && div_y < std::f64::consts::PI) {
        return Err(Error::Domain(format!(
            "fan divergence {div_y} rad outside (0, pi)"
        )));
    }
    Ok(2.0 * topo.gap() * (div_y / 2.0).tan() / c)
}

/// Lateral coordinates `(y-, y+)` of the two fan edge rays at the MRR plane.
pub fn transverse_edge_offsets(
    theta_t: f64,
    topo: &RoadTopology,
    div_y: f64,
) -> Result<(f64, f64)> {
    let half = transverse_span(theta_t, topo, div_y)? / 2.0;
    Ok((-half, half))
}

/// Fan divergence that makes the transverse span equal the road width.
pub fn required_fan_divergence(theta_t: f64, topo: &RoadTopology) -> f64 {
    2.0 * (topo.width * theta_t.cos() / (2.0 * topo.gap())).atan()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FootprintMode {
    Exact,
    SmallAngle,
}

/// Longitudinal footprint width of the transverse fan's thickness at the MRR plane.
pub fn transverse_thickness_footprint(
    theta_t: f64,
    topo: &RoadTopology,
    div_x: f64,
    mode: FootprintMode,
) -> Result<f64> {
    let h = (div_x / 2.0).tan();
    let t = theta_t.tan();
    let sec2 = 1.0 + t * t;
    let small = 2.0 * topo.gap() * h * sec2;
    match mode {
        FootprintMode::SmallAngle => Ok(small),
        FootprintMode::Exact => {
            let denom = 1.0 - h * h * t * t;
            if !(denom > 0.0) {
                return Err(Error::SingularGeometry(format!(
                    "thickness edge ray is parallel to the MRR plane (denominator {denom})"
                )));
            }
            Ok(small / denom)
        }
    }
}

/// Horizontal radius at which the longitudinal fan meets the MRR plane.
pub fn longitudinal_radius(theta_l: f64, topo: &RoadTopology) -> Result<f64> {
    if !(theta_l > 0.0 && theta_l < std::f64::consts::FRAC_PI_2) {
        return Err(Error::Domain(format!(
            "elevation {theta_l} rad outside (0, pi/2)"
        )));
    }
    Ok(topo.gap() * theta_l.tan())
}

/// Largest azimuth whose footprint centre stays within the road half-width.
pub fn phi_limit(r_l: f64, topo: &RoadTopology) -> Result<f64> {
    if !(r_l > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {r_l}")));
    }
    Ok((topo.width / (2.0 * r_l)).min(1.0).asin())
}

/// `2 max(0, phi_lim - |phi|)`.
pub fn required_line_divergence(phi_l: f64, r_l: f64, topo: &RoadTopology) -> Result<f64> {
    Ok(2.0 * (phi_limit(r_l, topo)? - phi_l.abs()).max(0.0))
}

/// Rate of change of the footprint's longitudinal position with azimuth.
pub fn spatial_rate(phi_l: f64, r_l: f64) -> f64 {
    -r_l * phi_l.sin()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AzimuthGridParams {
    /// Initial step next to the centre (rad).
    pub dphi0: f64,
    /// Geometric growth ratio of the steps, `>= 1`.
    pub alpha: f64,
    /// Largest admissible node (rad).
    pub phi_max: f64,
}

impl AzimuthGridParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.dphi0 > 0.0 && self.dphi0.is_finite()) {
            return Err(Error::Domain(format!(
                "initial step must be positive, got {}",
                self.dphi0
            )));
        }
        if !(self.alpha >= 1.0 && self.alpha.is_finite()) {
            return Err(Error::Domain(format!(
                "expansion ratio must be >= 1, got {}",
                self.alpha
            )));
        }
        if !(self.phi_max > 0.0 && self.phi_max < std::f64::consts::FRAC_PI_2) {
            return Err(Error::Domain(format!(
                "phi_max {} outside (0, pi/2)",
                self.phi_max
            )));
        }
        Ok(())
    }

    /// Position of the `m`-th positive node.
    pub fn node(&self, m: usize) -> f64 {
        if self.alpha == 1.0 {
            m as f64 * self.dphi0
        } else {
            let g = self.alpha - 1.0;
            self.dphi0 * ((m as f64) * g.ln_1p()).exp_m1() / g
        }
    }

    /// Number of positive nodes, `M`, from the closed-form floor expression.
    pub fn positive_count(&self) -> usize {
        let limit = self.phi_max * (1.0 + NODE_TOLERANCE);
        let estimate = if self.alpha == 1.0 {
            (limit / self.dphi0).floor()
        } else {
            let g = self.alpha - 1.0;
            ((g * limit / self.dphi0).ln_1p() / g.ln_1p()).floor()
        };
        if !(estimate < 1e15) {
            return usize::MAX / 4;
        }
        let mut m = estimate.max(0.0) as usize;
        // the floor can land one off when a node sits on phi_max
        while self.node(m + 1) <= limit {
            m += 1;
        }
        while m > 0 && self.node(m) > limit {
            m -= 1;
        }
        m
    }
}

/// Symmetric azimuth grid `{-phi_M, .., 0, .., phi_M}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AzimuthGrid {
    pub params: AzimuthGridParams,
    /// Positive nodes `phi_1 .. phi_M`.
    pub positive: Vec<f64>,
}

impl AzimuthGrid {
    pub fn m(&self) -> usize {
        self.positive.len()
    }

    /// Total number of states, `2M + 1`.
    pub fn len(&self) -> usize {
        2 * self.positive.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// All nodes in ascending order.
    pub fn nodes(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        out.extend(self.positive.iter().rev().map(|p| -p));
        out.push(0.0);
        out.extend(self.positive.iter().copied());
        out
    }
}

pub fn azimuth_grid(params: &AzimuthGridParams, cap: usize) -> Result<AzimuthGrid> {
    params.validate()?;
    let m = params.positive_count();
    let requested = m.saturating_mul(2).saturating_add(1);
    if requested > cap {
        return Err(Error::Resource { requested, cap });
    }
    Ok(AzimuthGrid {
        params: *params,
        positive: (1..=m).map(|k| params.node(k)).collect(),
    })
}

/// Dwell per node, proportional to the angular span each node owns.
///
/// A node owns half the gap to each neighbour; the two edge nodes mirror
/// their inner half-gap outward. The last dwell absorbs rounding so that the
/// list sums to `period`.
pub fn dwell_allocation(grid: &[f64], period: f64) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(Error::Schedule("empty angle grid".into()));
    }
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::Schedule(format!(
            "scan period must be positive, got {period}"
        )));
    }
    if grid.len() == 1 {
        return Ok(vec![period]);
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Schedule(
            "angle grid must be strictly increasing".into(),
        ));
    }
    let n = grid.len();
    let spans: Vec<f64> = (0..n)
        .map(|k| match k {
            0 => grid[1] - grid[0],
            k if k == n - 1 => grid[n - 1] - grid[n - 2],
            k => 0.5 * (grid[k + 1] - grid[k - 1]),
        })
        .collect();
    let total: f64 = spans.iter().sum();
    let mut dwell: Vec<f64> = spans.iter().map(|s| s / total * period).collect();
    let head: f64 = dwell[..n - 1].iter().sum();
    dwell[n - 1] = period - head;
    Ok(dwell)
}

/// Uniform dwell, again with the last entry absorbing rounding.
fn uniform_dwell(count: usize, period: f64) -> Vec<f64> {
    let mut dwell = vec![period / count as f64; count];
    let head: f64 = dwell[..count - 1].iter().sum();
    dwell[count - 1] = period - head;
    dwell
}

/// One quasi-static scan state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanState {
    pub fan: Fan,
    pub theta: f64,
    pub phi: f64,
    /// Line-axis divergence after clamping (rad). Zero means no admissible spread.
    pub div_line: f64,
    pub div_thick: f64,
    /// Dwell time (s).
    pub dwell: f64,
}

impl ScanState {
    /// A state with no admissible line spread illuminates nothing.
    pub fn is_blanked(&self) -> bool {
        self.div_line <= 0.0
    }

    /// The fan's beam re-shaped to this state's divergences.
    pub fn beam(&self, base: &BeamParams) -> Result<BeamParams> {
        base.with_divergences(self.div_line, self.div_thick)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSchedule {
    pub fan: Fan,
    pub states: Vec<ScanState>,
    /// Scan period (s).
    pub period: f64,
}

impl ScanSchedule {
    pub fn total_dwell(&self) -> f64 {
        self.states.iter().map(|s| s.dwell).sum()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// A schedule with no states and a nominal period, for a disabled fan.
    pub fn idle(fan: Fan, period: f64) -> Self {
        ScanSchedule {
            fan,
            states: Vec::new(),
            period,
        }
    }
}

/// Elevation sweep of the transverse fan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransverseSweep {
    pub theta_min: f64,
    pub theta_max: f64,
    pub count: usize,
    pub period: f64,
}

impl Default for TransverseSweep {
    fn default() -> Self {
        TransverseSweep {
            theta_min: 0.0,
            theta_max: 85f64.to_radians(),
            count: 200,
            period: 10e-3,
        }
    }
}

/// Azimuth sweep of the longitudinal fan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LongitudinalSweep {
    pub theta: f64,
    pub grid: AzimuthGridParams,
    pub period: f64,
    pub state_cap: usize,
}

pub fn longitudinal_schedule(
    topo: &RoadTopology,
    beam: &BeamParams,
    sweep: &LongitudinalSweep,
) -> Result<ScanSchedule> {
    topo.validate()?;
    beam.validate()?;
    let r_l = longitudinal_radius(sweep.theta, topo)?;
    let grid = azimuth_grid(&sweep.grid, sweep.state_cap)?;
    let nodes: Vec<f64> = grid
        .nodes()
        .into_iter()
        .filter(|phi| topo.tx_xy.0 + r_l * phi.cos() <= topo.length)
        .collect();
    if nodes.is_empty() {
        return Err(Error::Schedule(
            "every longitudinal state falls beyond the road end".into(),
        ));
    }
    let dwell = dwell_allocation(&nodes, sweep.period)?;
    let div_thick = beam.div_y();
    nodes
        .iter()
        .zip(dwell)
        .map(|(&phi, dwell)| {
            let needed = required_line_divergence(phi, r_l, topo)?;
            Ok(ScanState {
                fan: Fan::Longitudinal,
                theta: sweep.theta,
                phi,
                div_line: beam.div_x_max.min(needed),
                div_thick,
                dwell,
            })
        })
        .collect::<Result<Vec<_>>>()
        .map(|states| ScanSchedule {
            fan: Fan::Longitudinal,
            states,
            period: sweep.period,
        })
}

pub fn transverse_schedule(
    topo: &RoadTopology,
    beam: &BeamParams,
    sweep: &TransverseSweep,
) -> Result<ScanSchedule> {
    topo.validate()?;
    beam.validate()?;
    if sweep.count == 0 {
        return Err(Error::Schedule(
            "transverse sweep needs at least one state".into(),
        ));
    }
    if !(sweep.theta_min >= 0.0
        && sweep.theta_min <= sweep.theta_max
        && sweep.theta_max < std::f64::consts::FRAC_PI_2)
    {
        return Err(Error::Schedule(format!(
            "elevation range [{}, {}] rad is inverted or outside [0, pi/2)",
            sweep.theta_min, sweep.theta_max
        )));
    }
    if !(sweep.period > 0.0) {
        return Err(Error::Schedule("scan period must be positive".into()));
    }
    let n = sweep.count;
    let step = if n > 1 {
        (sweep.theta_max - sweep.theta_min) / (n - 1) as f64
    } else {
        0.0
    };
    let div_thick = beam.div_y();
    let states = uniform_dwell(n, sweep.period)
        .into_iter()
        .enumerate()
        .map(|(k, dwell)| {
            let theta = if k == n - 1 && n > 1 {
                sweep.theta_max
            } else {
                sweep.theta_min + step * k as f64
            };
            ScanState {
                fan: Fan::Transverse,
                theta,
                phi: 0.0,
                div_line: beam.div_x_max.min(required_fan_divergence(theta, topo)),
                div_thick,
                dwell,
            }
        })
        .collect();
    Ok(ScanSchedule {
        fan: Fan::Transverse,
        states,
        period: sweep.period,
    })
}

/// Both fans' schedules.
pub fn build_schedule(
    topo: &RoadTopology,
    beam_l: &BeamParams,
    beam_t: &BeamParams,
    longitudinal: &LongitudinalSweep,
    transverse: &TransverseSweep,
) -> Result<(ScanSchedule, ScanSchedule)> {
    Ok((
        longitudinal_schedule(topo, beam_l, longitudinal)?,
        transverse_schedule(topo, beam_t, transverse)?,
    ))
}
