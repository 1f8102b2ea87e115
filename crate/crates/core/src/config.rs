//! Run configuration as stored on disk, and its validated internal form.
//!
//! File values carry their unit in the key name and use degrees for angles.
//! Validation converts them to SI units and radians.

use serde::{Deserialize, Serialize};

use crate::beam::BeamParams;
use crate::coverage::{CalibrationQuantiles, ThresholdLevel, Thresholds};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::link::MrrConfig;
use crate::optimizer::{Objective, SearchSpace};
use crate::scan::{
    AzimuthGridParams, LongitudinalSweep, RoadTopology, TransverseSweep, DEFAULT_STATE_CAP,
};

/// The shipped highway configuration.
pub const HIGHWAY_JSON: &str = include_str!("../configs/highway.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoadConfig {
    pub length_m: f64,
    pub width_m: f64,
    pub tx_height_m: f64,
    pub mrr_height_m: f64,
    #[serde(default)]
    pub tx_x_m: f64,
    #[serde(default)]
    pub tx_y_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpticsConfig {
    pub power_w: f64,
    pub wavelength_nm: f64,
    pub line_order: u32,
    pub thickness_order: u32,
    /// Upper limit on the line-axis divergence.
    pub line_divergence_max_deg: f64,
    pub thickness_divergence_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LongitudinalConfig {
    pub beam: OpticsConfig,
    pub theta_deg: f64,
    pub dphi0_deg: f64,
    pub alpha: f64,
    pub phi_max_deg: f64,
    pub scan_period_ms: f64,
    #[serde(default = "default_cap")]
    pub state_cap: usize,
}

fn default_cap() -> usize {
    DEFAULT_STATE_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransverseConfig {
    pub enabled: bool,
    pub beam: OpticsConfig,
    pub theta_min_deg: f64,
    pub theta_max_deg: f64,
    pub count: usize,
    pub scan_period_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MrrFileConfig {
    pub array_area_m2: f64,
    pub efficiency: f64,
    pub rx_area_m2: f64,
    pub retro_half_angle_mrad: f64,
    pub plane_normal: [f64; 3],
}

impl Default for MrrFileConfig {
    fn default() -> Self {
        let m = MrrConfig::default();
        MrrFileConfig {
            array_area_m2: m.array_area,
            efficiency: m.efficiency,
            rx_area_m2: m.rx_area,
            retro_half_angle_mrad: m.retro_half_angle * 1e3,
            plane_normal: [m.plane_normal.x, m.plane_normal.y, m.plane_normal.z],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub resolution_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitThresholds {
    pub pos_j: f64,
    pub sen_j: f64,
    pub com_low_j: f64,
    pub com_high_j: f64,
}

/// Either fixed thresholds or quantiles of the `alpha = 1` reference map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ThresholdConfig {
    Calibrate(CalibrationQuantiles),
    Explicit(ExplicitThresholds),
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig::Calibrate(CalibrationQuantiles::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    pub dphi0_deg: Vec<f64>,
    pub alpha: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line_divergence_max_deg: Option<Vec<f64>>,
    #[serde(default = "default_objective")]
    pub objective: Objective,
    #[serde(default = "default_level")]
    pub level: ThresholdLevel,
}

fn default_objective() -> Objective {
    Objective::MinimizeHoleRatio
}

fn default_level() -> ThresholdLevel {
    ThresholdLevel::Pos
}

/// Settings of the `profile` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileConfig {
    pub z_m: f64,
    pub orders: Vec<u32>,
    pub line_divergence_deg: f64,
    pub thickness_divergence_deg: f64,
    pub samples: usize,
    /// Cut half-width in units of the line-axis radius.
    pub half_width_factor: f64,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig {
            z_m: 10.0,
            orders: vec![1, 2, 4, 8, 12],
            line_divergence_deg: 1.0,
            thickness_divergence_deg: 60.0,
            samples: 401,
            half_width_factor: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub road: RoadConfig,
    pub longitudinal: LongitudinalConfig,
    pub transverse: TransverseConfig,
    #[serde(default)]
    pub mrr: MrrFileConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub thresholds: ThresholdConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerConfig>,
    #[serde(default)]
    pub profile: ProfileConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

/// Command-line overrides, applied on top of the file values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dphi0_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_resolution_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

impl Overrides {
    pub fn is_empty(&self) -> bool {
        *self == Overrides::default()
    }
}

/// Validated scenario in SI units and radians.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub topo: RoadTopology,
    pub beam_l: BeamParams,
    pub sweep_l: LongitudinalSweep,
    /// Transverse beam and sweep, absent when that fan is disabled.
    pub transverse: Option<(BeamParams, TransverseSweep)>,
    pub mrr: MrrConfig,
    pub grid_resolution: f64,
    pub thresholds: ThresholdSource,
    pub search: Option<SearchSpace>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdSource {
    Calibrate(CalibrationQuantiles),
    Fixed(Thresholds),
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::config(path, e.into_inner().to_string())
    })
}

pub fn load_config(path: &std::path::Path) -> Result<RunConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// The shipped highway configuration.
pub fn highway_config() -> RunConfig {
    parse_config(HIGHWAY_JSON).expect("shipped config parses")
}

fn positive(path: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(
            path,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

fn in_range(path: &str, v: f64, lo: f64, hi: f64) -> Result<f64> {
    if v >= lo && v <= hi {
        Ok(v)
    } else {
        Err(Error::config(
            path,
            format!("must lie in [{lo}, {hi}], got {v}"),
        ))
    }
}

fn optics(prefix: &str, o: &OpticsConfig) -> Result<BeamParams> {
    let p = |f: &str| format!("{prefix}.{f}");
    let power = positive(&p("power_w"), o.power_w)?;
    let lambda = positive(&p("wavelength_nm"), o.wavelength_nm)? * 1e-9;
    for (f, n) in [
        ("line_order", o.line_order),
        ("thickness_order", o.thickness_order),
    ] {
        if n == 0 {
            return Err(Error::config(p(f), "super-Gaussian order must be >= 1"));
        }
    }
    let line = in_range(
        &p("line_divergence_max_deg"),
        o.line_divergence_max_deg,
        1e-9,
        179.0,
    )?;
    let thick = in_range(
        &p("thickness_divergence_deg"),
        o.thickness_divergence_deg,
        1e-9,
        179.0,
    )?;
    BeamParams::from_divergences(
        power,
        lambda,
        line.to_radians(),
        thick.to_radians(),
        o.line_order,
        o.thickness_order,
        line.to_radians(),
        thick.to_radians(),
    )
    .map_err(|e| Error::config(prefix, e.to_string()))
}

impl RunConfig {
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(a) = o.alpha {
            self.longitudinal.alpha = a;
        }
        if let Some(d) = o.dphi0_deg {
            self.longitudinal.dphi0_deg = d;
        }
        if let Some(r) = o.grid_resolution_m {
            self.grid.resolution_m = r;
        }
        if let Some(dir) = &o.output_dir {
            self.output_dir = Some(dir.clone());
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises") + "\n"
    }

    pub fn validate(&self) -> Result<Scenario> {
        let r = &self.road;
        let topo = RoadTopology {
            length: positive("road.length_m", r.length_m)?,
            width: positive("road.width_m", r.width_m)?,
            tx_height: positive("road.tx_height_m", r.tx_height_m)?,
            mrr_height: positive("road.mrr_height_m", r.mrr_height_m)?,
            tx_xy: (r.tx_x_m, r.tx_y_m),
        };
        if topo.mrr_height >= topo.tx_height {
            return Err(Error::config(
                "road.mrr_height_m, road.tx_height_m",
                format!(
                    "MRR height {} m must be below transmitter height {} m",
                    topo.mrr_height, topo.tx_height
                ),
            ));
        }
        if !(r.tx_x_m.is_finite() && r.tx_y_m.is_finite()) {
            return Err(Error::config(
                "road.tx_x_m",
                "transmitter position must be finite",
            ));
        }

        let l = &self.longitudinal;
        let beam_l = optics("longitudinal.beam", &l.beam)?;
        let theta = in_range("longitudinal.theta_deg", l.theta_deg, 1e-9, 89.999)?;
        let phi_max = in_range("longitudinal.phi_max_deg", l.phi_max_deg, 1e-9, 89.999)?;
        let sweep_l = LongitudinalSweep {
            theta: theta.to_radians(),
            grid: AzimuthGridParams {
                dphi0: positive("longitudinal.dphi0_deg", l.dphi0_deg)?.to_radians(),
                alpha: in_range("longitudinal.alpha", l.alpha, 1.0, f64::MAX)?,
                phi_max: phi_max.to_radians(),
            },
            period: positive("longitudinal.scan_period_ms", l.scan_period_ms)? * 1e-3,
            state_cap: l.state_cap,
        };
        if l.state_cap == 0 {
            return Err(Error::config(
                "longitudinal.state_cap",
                "must be at least 1",
            ));
        }

        let t = &self.transverse;
        let transverse = if t.enabled {
            let beam = optics("transverse.beam", &t.beam)?;
            let lo = in_range("transverse.theta_min_deg", t.theta_min_deg, 0.0, 89.999)?;
            let hi = in_range("transverse.theta_max_deg", t.theta_max_deg, 0.0, 89.999)?;
            if lo > hi {
                return Err(Error::config(
                    "transverse.theta_min_deg, transverse.theta_max_deg",
                    format!("elevation range is inverted: {lo} > {hi}"),
                ));
            }
            if t.count == 0 {
                return Err(Error::config("transverse.count", "must be at least 1"));
            }
            let sweep = TransverseSweep {
                theta_min: lo.to_radians(),
                theta_max: hi.to_radians(),
                count: t.count,
                period: positive("transverse.scan_period_ms", t.scan_period_ms)? * 1e-3,
            };
            Some((beam, sweep))
        } else {
            None
        };

        let m = &self.mrr;
        let n = Vec3::new(m.plane_normal[0], m.plane_normal[1], m.plane_normal[2]);
        if !(n.is_finite() && n.norm() > 0.0) {
            return Err(Error::config(
                "mrr.plane_normal",
                "must be a nonzero finite vector",
            ));
        }
        let mrr = MrrConfig {
            array_area: positive("mrr.array_area_m2", m.array_area_m2)?,
            efficiency: in_range("mrr.efficiency", m.efficiency, 0.0, 1.0)?,
            rx_area: positive("mrr.rx_area_m2", m.rx_area_m2)?,
            retro_half_angle: positive("mrr.retro_half_angle_mrad", m.retro_half_angle_mrad)?
                * 1e-3,
            plane_normal: n.normalize(),
        };
        mrr.validate()
            .map_err(|e| Error::config("mrr", e.to_string()))?;

        let grid_resolution = positive("grid.resolution_m", self.grid.resolution_m)?;

        let thresholds = match self.thresholds {
            ThresholdConfig::Calibrate(q) => {
                q.validate()
                    .map_err(|e| Error::config("thresholds.calibrate", e.to_string()))?;
                ThresholdSource::Calibrate(q)
            }
            ThresholdConfig::Explicit(e) => {
                let t = Thresholds {
                    pos: e.pos_j,
                    sen: e.sen_j,
                    com_low: e.com_low_j,
                    com_high: e.com_high_j,
                };
                t.validate()
                    .map_err(|err| Error::config("thresholds.explicit", err.to_string()))?;
                ThresholdSource::Fixed(t)
            }
        };

        let search = match &self.optimizer {
            None => None,
            Some(o) => {
                let dphi0_values = o
                    .dphi0_deg
                    .iter()
                    .enumerate()
                    .map(|(i, &d)| {
                        positive(&format!("optimizer.dphi0_deg[{i}]"), d).map(f64::to_radians)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let alpha_values = o
                    .alpha
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| in_range(&format!("optimizer.alpha[{i}]"), a, 1.0, f64::MAX))
                    .collect::<Result<Vec<_>>>()?;
                let div_max_values = match &o.line_divergence_max_deg {
                    None => None,
                    Some(v) => Some(
                        v.iter()
                            .enumerate()
                            .map(|(i, &d)| {
                                in_range(
                                    &format!("optimizer.line_divergence_max_deg[{i}]"),
                                    d,
                                    1e-9,
                                    179.0,
                                )
                                .map(f64::to_radians)
                            })
                            .collect::<Result<Vec<_>>>()?,
                    ),
                };
                Some(SearchSpace {
                    dphi0_values,
                    alpha_values,
                    div_max_values,
                    objective: o.objective,
                    level: o.level,
                })
            }
        };

        let p = &self.profile;
        positive("profile.z_m", p.z_m)?;
        positive("profile.half_width_factor", p.half_width_factor)?;
        in_range(
            "profile.line_divergence_deg",
            p.line_divergence_deg,
            1e-9,
            179.0,
        )?;
        in_range(
            "profile.thickness_divergence_deg",
            p.thickness_divergence_deg,
            1e-9,
            179.0,
        )?;
        if p.samples < 2 {
            return Err(Error::config("profile.samples", "must be at least 2"));
        }
        if let Some(i) = p.orders.iter().position(|&n| n == 0) {
            return Err(Error::config(
                format!("profile.orders[{i}]"),
                "order must be >= 1",
            ));
        }

        Ok(Scenario {
            topo,
            beam_l,
            sweep_l,
            transverse,
            mrr,
            grid_resolution,
            thresholds,
            search,
        })
    }
}
