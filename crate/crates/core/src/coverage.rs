//! Energy maps over the MRR plane and the coverage metrics derived from them.
//!
//! A cell counts as covered by a fan when at least one scan state delivers
//! an energy at or above the threshold, so each map stores the per-cell
//! maximum single-state energy rather than a sum.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beam::BeamParams;
use crate::error::{Error, Result};
use crate::geometry::{Fan, Vec3};
use crate::link::{LinkEvaluator, MrrConfig};
use crate::scan::{RoadTopology, ScanSchedule, ScanState};

/// Cell-centred discretisation of the road at the MRR height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoadGrid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    /// Corner of the road rectangle, `(0, -W/2)` for the standard layout.
    pub origin: (f64, f64),
    pub z_eval: f64,
}

impl RoadGrid {
    /// Grid whose cells are as close to `resolution` as the road allows.
    pub fn from_resolution(topo: &RoadTopology, resolution: f64) -> Result<Self> {
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::Domain(format!(
                "grid resolution must be positive, got {resolution}"
            )));
        }
        let nx = (topo.length / resolution).round().max(1.0) as usize;
        let ny = (topo.width / resolution).round().max(1.0) as usize;
        Self::with_counts(topo, nx, ny)
    }

    pub fn with_counts(topo: &RoadTopology, nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::Domain(
                "grid needs at least one cell per axis".into(),
            ));
        }
        Ok(RoadGrid {
            nx,
            ny,
            dx: topo.length / nx as f64,
            dy: topo.width / ny as f64,
            origin: (0.0, -topo.width / 2.0),
            z_eval: topo.mrr_height,
        })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x_center(&self, i: usize) -> f64 {
        self.origin.0 + (i as f64 + 0.5) * self.dx
    }

    pub fn y_center(&self, j: usize) -> f64 {
        self.origin.1 + (j as f64 + 0.5) * self.dy
    }

    pub fn center(&self, i: usize, j: usize) -> Vec3 {
        Vec3::new(self.x_center(i), self.y_center(j), self.z_eval)
    }

    fn same_as(&self, other: &RoadGrid) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && self.dx == other.dx
            && self.dy == other.dy
            && self.origin == other.origin
            && self.z_eval == other.z_eval
    }
}

/// Per-cell maximum single-state energy (J), stored row-major with one row
/// per `y` index.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyMap {
    pub fan: Fan,
    pub grid: RoadGrid,
    pub values: Vec<f64>,
}

impl EnergyMap {
    pub fn zeros(fan: Fan, grid: RoadGrid) -> Self {
        EnergyMap {
            fan,
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx + i]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Boolean coverage mask at `threshold`.
    pub fn covered(&self, threshold: f64) -> Vec<bool> {
        self.values.iter().map(|&e| e >= threshold).collect()
    }
}

/// A scan state with its link evaluator resolved.
#[derive(Debug, Clone, Copy)]
pub struct PreparedState {
    link: Option<LinkEvaluator>,
    dwell: f64,
}

impl PreparedState {
    pub fn new(
        state: &ScanState,
        topo: &RoadTopology,
        beam: &BeamParams,
        mrr: &MrrConfig,
    ) -> Result<Self> {
        if !(state.dwell > 0.0) {
            return Err(Error::Schedule(format!(
                "dwell must be positive, got {}",
                state.dwell
            )));
        }
        let link = if state.is_blanked() {
            None
        } else {
            let b = state.beam(beam)?;
            Some(LinkEvaluator::new(
                &b,
                state.theta,
                state.phi,
                state.fan,
                topo.tx_origin(),
                mrr,
            )?)
        };
        Ok(PreparedState {
            link,
            dwell: state.dwell,
        })
    }

    #[inline]
    pub fn energy(&self, point: Vec3) -> f64 {
        match &self.link {
            Some(l) => l.received_or_zero(point) * self.dwell,
            None => 0.0,
        }
    }
}

/// Energy one state delivers to one cell centre, `P_rx * tau`.
pub fn state_energy(
    state: &ScanState,
    point: Vec3,
    topo: &RoadTopology,
    beam: &BeamParams,
    mrr: &MrrConfig,
) -> Result<f64> {
    Ok(PreparedState::new(state, topo, beam, mrr)?.energy(point))
}

fn prepare(
    states: &[ScanState],
    topo: &RoadTopology,
    beam: &BeamParams,
    mrr: &MrrConfig,
) -> Result<Vec<PreparedState>> {
    states
        .iter()
        .map(|s| PreparedState::new(s, topo, beam, mrr))
        .filter(|p| !matches!(p, Ok(PreparedState { link: None, .. })))
        .collect()
}

fn fill_rows<F>(values: &mut [f64], nx: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    values
        .par_chunks_mut(nx)
        .enumerate()
        .for_each(|(j, row)| f(j, row));
    #[cfg(not(feature = "parallel"))]
    values
        .chunks_mut(nx)
        .enumerate()
        .for_each(|(j, row)| f(j, row));
}

/// Per-cell maximum over all states of the single-state energy.
///
/// Rows are filled in parallel when the `parallel` feature is on. The max
/// reduction makes the result independent of state order and thread count.
pub fn accumulate_energy_map(
    schedule: &ScanSchedule,
    grid: &RoadGrid,
    topo: &RoadTopology,
    beam: &BeamParams,
    mrr: &MrrConfig,
) -> Result<EnergyMap> {
    let states = prepare(&schedule.states, topo, beam, mrr)?;
    let mut map = EnergyMap::zeros(schedule.fan, *grid);
    let g = *grid;
    fill_rows(&mut map.values, g.nx, |j, row| {
        let y = g.y_center(j);
        for s in &states {
            for (i, cell) in row.iter_mut().enumerate() {
                let e = s.energy(Vec3::new(g.x_center(i), y, g.z_eval));
                if e > *cell {
                    *cell = e;
                }
            }
        }
    });
    Ok(map)
}

/// Fraction of cells that a single state covers at `threshold`.
pub fn coverage_ratio_instant(
    state: &ScanState,
    grid: &RoadGrid,
    threshold: f64,
    topo: &RoadTopology,
    beam: &BeamParams,
    mrr: &MrrConfig,
) -> Result<f64> {
    check_threshold(threshold)?;
    let s = PreparedState::new(state, topo, beam, mrr)?;
    let mut hits = 0usize;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if s.energy(grid.center(i, j)) >= threshold {
                hits += 1;
            }
        }
    }
    Ok(hits as f64 / grid.len() as f64)
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "threshold must be positive, got {threshold}"
        )))
    }
}

/// Fraction of cells covered at least once during the cycle.
pub fn effective_coverage(map: &EnergyMap, threshold: f64) -> f64 {
    let hits = map.values.iter().filter(|&&e| e >= threshold).count();
    hits as f64 / map.values.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompositeMode {
    /// Covered by both fans.
    And,
    /// Covered by either fan.
    Or,
}

pub fn composite_coverage(
    map_l: &EnergyMap,
    map_t: &EnergyMap,
    threshold: f64,
    mode: CompositeMode,
) -> Result<f64> {
    if !map_l.grid.same_as(&map_t.grid) {
        return Err(Error::GridMismatch(format!(
            "{}x{} vs {}x{}",
            map_l.grid.nx, map_l.grid.ny, map_t.grid.nx, map_t.grid.ny
        )));
    }
    let hits = map_l
        .values
        .iter()
        .zip(&map_t.values)
        .filter(|(&l, &t)| match mode {
            CompositeMode::And => l >= threshold && t >= threshold,
            CompositeMode::Or => l >= threshold || t >= threshold,
        })
        .count();
    Ok(hits as f64 / map_l.values.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdLevel {
    Pos,
    Sen,
    ComLow,
    ComHigh,
}

impl ThresholdLevel {
    pub const ALL: [ThresholdLevel; 4] = [
        ThresholdLevel::Pos,
        ThresholdLevel::Sen,
        ThresholdLevel::ComLow,
        ThresholdLevel::ComHigh,
    ];
}

/// Application thresholds (J).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub pos: f64,
    pub sen: f64,
    pub com_low: f64,
    pub com_high: f64,
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.pos > 0.0 && self.pos <= self.com_low && self.com_low <= self.com_high) {
            return Err(Error::Domain(format!(
                "thresholds must satisfy 0 < pos <= com_low <= com_high, got {} {} {}",
                self.pos, self.com_low, self.com_high
            )));
        }
        if !(self.sen > 0.0 && self.com_high.is_finite()) {
            return Err(Error::Domain(
                "sensitivity threshold must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn get(&self, level: ThresholdLevel) -> f64 {
        match level {
            ThresholdLevel::Pos => self.pos,
            ThresholdLevel::Sen => self.sen,
            ThresholdLevel::ComLow => self.com_low,
            ThresholdLevel::ComHigh => self.com_high,
        }
    }
}

/// Quantiles of the reference map used to place each threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationQuantiles {
    pub pos: f64,
    pub com_low: f64,
    pub com_high: f64,
}

impl Default for CalibrationQuantiles {
    fn default() -> Self {
        CalibrationQuantiles {
            pos: 0.186,
            com_low: 0.5,
            com_high: 0.8,
        }
    }
}

impl CalibrationQuantiles {
    pub fn validate(&self) -> Result<()> {
        let ok = |q: f64| (0.0..1.0).contains(&q);
        if !(ok(self.pos) && ok(self.com_low) && ok(self.com_high))
            || !(self.pos <= self.com_low && self.com_low <= self.com_high)
        {
            return Err(Error::Calibration(format!(
                "quantiles must be ordered within [0, 1): {:?}",
                self
            )));
        }
        Ok(())
    }
}

/// Best energy over the fans, `E* = max(E_L, E_T)`.
pub fn best_energy(map_l: &EnergyMap, map_t: Option<&EnergyMap>) -> Result<Vec<f64>> {
    match map_t {
        None => Ok(map_l.values.clone()),
        Some(t) => {
            if !map_l.grid.same_as(&t.grid) {
                return Err(Error::GridMismatch("fan maps use different grids".into()));
            }
            Ok(map_l
                .values
                .iter()
                .zip(&t.values)
                .map(|(a, b)| a.max(*b))
                .collect())
        }
    }
}

/// Places each threshold at a quantile of the reference best-energy map.
///
/// The positioning threshold is the energy of the cell ranked
/// `round(q N)` in ascending order, so exactly that many cells fall below
/// it when energies are distinct. The sensitivity threshold follows the
/// positioning one.
pub fn calibrate_thresholds(
    map_l: &EnergyMap,
    map_t: Option<&EnergyMap>,
    q: &CalibrationQuantiles,
) -> Result<Thresholds> {
    q.validate()?;
    let mut e = best_energy(map_l, map_t)?;
    e.sort_by(f64::total_cmp);
    let pick = |q: f64, name: &str| -> Result<f64> {
        let k = ((q * e.len() as f64).round() as usize).min(e.len() - 1);
        let v = e[k];
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::Calibration(format!(
                "{name} quantile {q} falls on unlit cells; the reference map is too sparse"
            )))
        }
    };
    let pos = pick(q.pos, "pos")?;
    let t = Thresholds {
        pos,
        sen: pos,
        com_low: pick(q.com_low, "com_low")?,
        com_high: pick(q.com_high, "com_high")?,
    };
    t.validate()?;
    Ok(t)
}

/// Area classes: 1 = hole, 2 = positioning, 3 = low-rate communication,
/// 4 = high-rate communication.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaClassMap {
    pub grid: RoadGrid,
    pub classes: Vec<u8>,
    /// Fractions of classes 1 to 4.
    pub fractions: [f64; 4],
}

impl AreaClassMap {
    pub fn hole_ratio(&self) -> f64 {
        self.fractions[0]
    }
}

pub fn classify_energy(e: f64, t: &Thresholds) -> u8 {
    if e < t.pos {
        1
    } else if e < t.com_low {
        2
    } else if e < t.com_high {
        3
    } else {
        4
    }
}

pub fn classify_areas(
    map_l: &EnergyMap,
    map_t: Option<&EnergyMap>,
    thresholds: &Thresholds,
) -> Result<AreaClassMap> {
    thresholds.validate()?;
    let classes: Vec<u8> = best_energy(map_l, map_t)?
        .into_iter()
        .map(|e| classify_energy(e, thresholds))
        .collect();
    let mut counts = [0usize; 4];
    for &c in &classes {
        counts[usize::from(c - 1)] += 1;
    }
    let n = classes.len() as f64;
    Ok(AreaClassMap {
        grid: map_l.grid,
        classes,
        fractions: counts.map(|c| c as f64 / n),
    })
}

/// Coverage ratios at one threshold level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCoverage {
    pub level: ThresholdLevel,
    pub threshold: f64,
    pub rho_l: f64,
    /// Absent when the transverse fan is disabled.
    pub rho_t: Option<f64>,
    pub rho_and: Option<f64>,
    pub rho_or: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub levels: Vec<LevelCoverage>,
    pub hole_ratio: f64,
    /// Fractions of area classes 1 to 4.
    pub area_fractions: [f64; 4],
}

pub fn coverage_report(
    map_l: &EnergyMap,
    map_t: Option<&EnergyMap>,
    thresholds: &Thresholds,
) -> Result<(CoverageReport, AreaClassMap)> {
    let areas = classify_areas(map_l, map_t, thresholds)?;
    let levels = ThresholdLevel::ALL
        .iter()
        .map(|&level| {
            let g = thresholds.get(level);
            let (rho_t, rho_and, rho_or) = match map_t {
                Some(t) => (
                    Some(effective_coverage(t, g)),
                    Some(composite_coverage(map_l, t, g, CompositeMode::And)?),
                    Some(composite_coverage(map_l, t, g, CompositeMode::Or)?),
                ),
                None => (None, None, None),
            };
            Ok(LevelCoverage {
                level,
                threshold: g,
                rho_l: effective_coverage(map_l, g),
                rho_t,
                rho_and,
                rho_or,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((
        CoverageReport {
            levels,
            hole_ratio: areas.hole_ratio(),
            area_fractions: areas.fractions,
        },
        areas,
    ))
}
