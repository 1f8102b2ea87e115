//! End-to-end runs: schedules, maps, thresholds, metrics and artifacts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::beam::{line_axis_cut, BeamParams, ProfileCut};
use crate::config::{Overrides, RunConfig, Scenario, ThresholdSource};
use crate::coverage::{
    accumulate_energy_map, calibrate_thresholds, classify_areas, coverage_report, AreaClassMap,
    CoverageReport, EnergyMap, RoadGrid, Thresholds,
};
use crate::error::{Error, Result};
use crate::export::{class_pgm, energy_csv, optimizer_csv, profile_csv, write_text};
use crate::optimizer::{grid_search, SearchContext, SearchResult};
use crate::scan::{
    longitudinal_schedule, transverse_schedule, AzimuthGridParams, LongitudinalSweep,
};

pub const DEFAULT_OUTPUT_DIR: &str = "out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Software {
    pub name: String,
    pub version: String,
}

impl Software {
    pub fn current() -> Self {
        Software {
            name: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSummary {
    /// Longitudinal states kept after dropping those past the road end.
    pub k_l: usize,
    pub k_t: usize,
    pub dwell_min_s: f64,
    pub dwell_max_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdOrigin {
    /// Quantiles of the `alpha = 1` reference map.
    Calibrated,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRecord {
    pub origin: ThresholdOrigin,
    pub values_j: Thresholds,
    /// Hole ratio of the reference map at the calibrated thresholds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_hole_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_s: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates_s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub software: Software,
    pub command: String,
    /// Effective configuration, after overrides.
    pub config: RunConfig,
    pub overrides: Overrides,
    pub thresholds: ThresholdRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coverage: Option<CoverageReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchResult>,
    /// Kept last so that reports differ only in their final block.
    pub timing: Timing,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises") + "\n"
    }
}

pub struct CoverageRun {
    pub report: RunReport,
    pub map_l: EnergyMap,
    pub map_t: Option<EnergyMap>,
    pub areas: AreaClassMap,
}

pub struct OptimizeRun {
    pub report: RunReport,
    pub result: SearchResult,
}

fn effective(config: &RunConfig, overrides: &Overrides) -> Result<(RunConfig, Scenario)> {
    let mut cfg = config.clone();
    cfg.apply(overrides);
    let scenario = cfg.validate()?;
    Ok((cfg, scenario))
}

fn transverse_map(s: &Scenario, grid: &RoadGrid) -> Result<Option<EnergyMap>> {
    match &s.transverse {
        None => Ok(None),
        Some((beam, sweep)) => {
            let sched = transverse_schedule(&s.topo, beam, sweep)?;
            accumulate_energy_map(&sched, grid, &s.topo, beam, &s.mrr).map(Some)
        }
    }
}

fn longitudinal_map(s: &Scenario, sweep: &LongitudinalSweep, grid: &RoadGrid) -> Result<EnergyMap> {
    let sched = longitudinal_schedule(&s.topo, &s.beam_l, sweep)?;
    accumulate_energy_map(&sched, grid, &s.topo, &s.beam_l, &s.mrr)
}

/// The `alpha = 1` sweep used as the calibration reference.
pub fn reference_sweep(sweep: &LongitudinalSweep) -> LongitudinalSweep {
    LongitudinalSweep {
        grid: AzimuthGridParams {
            alpha: 1.0,
            ..sweep.grid
        },
        ..*sweep
    }
}

/// Resolves thresholds, computing the reference map only when needed.
/// `current` is reused when it already is the reference.
fn resolve_thresholds(
    s: &Scenario,
    grid: &RoadGrid,
    map_t: Option<&EnergyMap>,
    current: Option<&EnergyMap>,
) -> Result<ThresholdRecord> {
    match s.thresholds {
        ThresholdSource::Fixed(t) => Ok(ThresholdRecord {
            origin: ThresholdOrigin::Explicit,
            values_j: t,
            reference_hole_ratio: None,
        }),
        ThresholdSource::Calibrate(q) => {
            let owned;
            let reference = match current {
                Some(m) if s.sweep_l.grid.alpha == 1.0 => m,
                _ => {
                    owned = longitudinal_map(s, &reference_sweep(&s.sweep_l), grid)?;
                    &owned
                }
            };
            let t = calibrate_thresholds(reference, map_t, &q)?;
            let hole = classify_areas(reference, map_t, &t)?.hole_ratio();
            Ok(ThresholdRecord {
                origin: ThresholdOrigin::Calibrated,
                values_j: t,
                reference_hole_ratio: Some(hole),
            })
        }
    }
}

pub fn run_coverage(config: &RunConfig, overrides: &Overrides) -> Result<CoverageRun> {
    let start = Instant::now();
    let (cfg, s) = effective(config, overrides)?;
    let grid = RoadGrid::from_resolution(&s.topo, s.grid_resolution)?;
    let sched_l = longitudinal_schedule(&s.topo, &s.beam_l, &s.sweep_l)?;
    let map_l = accumulate_energy_map(&sched_l, &grid, &s.topo, &s.beam_l, &s.mrr)?;
    let map_t = transverse_map(&s, &grid)?;
    let thresholds = resolve_thresholds(&s, &grid, map_t.as_ref(), Some(&map_l))?;
    let (coverage, areas) = coverage_report(&map_l, map_t.as_ref(), &thresholds.values_j)?;
    let k_t = match &s.transverse {
        Some((_, sw)) => sw.count,
        None => 0,
    };
    let dwell = sched_l.states.iter().map(|st| st.dwell);
    let report = RunReport {
        software: Software::current(),
        command: "coverage".into(),
        config: cfg,
        overrides: overrides.clone(),
        thresholds,
        schedule: Some(ScheduleSummary {
            k_l: sched_l.len(),
            k_t,
            dwell_min_s: dwell.clone().fold(f64::INFINITY, f64::min),
            dwell_max_s: dwell.fold(0.0, f64::max),
        }),
        coverage: Some(coverage),
        search: None,
        timing: Timing {
            total_s: start.elapsed().as_secs_f64(),
            candidates_s: Vec::new(),
        },
    };
    Ok(CoverageRun {
        report,
        map_l,
        map_t,
        areas,
    })
}

pub fn run_optimize(config: &RunConfig, overrides: &Overrides) -> Result<OptimizeRun> {
    let start = Instant::now();
    let (cfg, s) = effective(config, overrides)?;
    let space = s
        .search
        .clone()
        .ok_or_else(|| Error::config("optimizer", "the config has no optimizer section"))?;
    let grid = RoadGrid::from_resolution(&s.topo, s.grid_resolution)?;
    let map_t = transverse_map(&s, &grid)?;
    let thresholds = resolve_thresholds(&s, &grid, map_t.as_ref(), None)?;
    let ctx = SearchContext {
        topo: s.topo,
        beam_l: s.beam_l,
        mrr: s.mrr,
        grid,
        sweep: s.sweep_l,
        map_t,
        thresholds: thresholds.values_j,
    };
    let result = grid_search(&space, &ctx)?;
    let report = RunReport {
        software: Software::current(),
        command: "optimize".into(),
        config: cfg,
        overrides: overrides.clone(),
        thresholds,
        schedule: None,
        coverage: None,
        search: Some(result.clone()),
        timing: Timing {
            total_s: start.elapsed().as_secs_f64(),
            candidates_s: result.table.iter().map(|r| r.runtime_s).collect(),
        },
    };
    Ok(OptimizeRun { report, result })
}

/// Line-axis cuts for each configured order, using the longitudinal fan's
/// power and wavelength.
pub fn run_profile(config: &RunConfig) -> Result<Vec<ProfileCut>> {
    let s = config.validate()?;
    let p = &config.profile;
    let (dx, dy) = (
        p.line_divergence_deg.to_radians(),
        p.thickness_divergence_deg.to_radians(),
    );
    p.orders
        .iter()
        .map(|&n| {
            let beam = BeamParams::from_divergences(
                s.beam_l.power_tx,
                s.beam_l.wavelength,
                dx,
                dy,
                n,
                1,
                dx,
                dy,
            )?;
            line_axis_cut(&beam, p.z_m, p.samples, p.half_width_factor)
        })
        .collect()
}

/// Output directory: the override, else the config value, else `out`.
pub fn output_dir(config: &RunConfig, overrides: &Overrides) -> PathBuf {
    overrides
        .output_dir
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| DEFAULT_OUTPUT_DIR.into())
        .into()
}

pub fn write_coverage(run: &CoverageRun, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = vec![
        write_text(dir, "energy_L.csv", &energy_csv(&run.map_l))?,
        write_text(dir, "classes.pgm", &class_pgm(&run.areas))?,
    ];
    if let Some(t) = &run.map_t {
        written.push(write_text(dir, "energy_T.csv", &energy_csv(t))?);
    }
    written.push(write_text(dir, "report.json", &run.report.to_json())?);
    Ok(written)
}

pub fn write_optimize(run: &OptimizeRun, dir: &Path) -> Result<Vec<PathBuf>> {
    Ok(vec![
        write_text(dir, "optimizer_table.csv", &optimizer_csv(&run.result))?,
        write_text(dir, "report.json", &run.report.to_json())?,
    ])
}

pub fn profile_table(config: &RunConfig) -> Result<String> {
    profile_csv(&run_profile(config)?)
}
