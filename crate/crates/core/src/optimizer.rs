//! Exhaustive search over the longitudinal azimuth schedule.
//!
//! The objective is a cell count, hence piecewise constant in the schedule
//! parameters, so the search simply evaluates every combination.

use std::cmp::Ordering;
use std::time::Instant;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beam::BeamParams;
use crate::coverage::{
    accumulate_energy_map, classify_areas, composite_coverage, effective_coverage, CompositeMode,
    EnergyMap, RoadGrid, ThresholdLevel, Thresholds,
};
use crate::error::{Error, Result};
use crate::link::MrrConfig;
use crate::scan::{longitudinal_schedule, AzimuthGridParams, LongitudinalSweep, RoadTopology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    MinimizeHoleRatio,
    MaximizeCoverage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    /// Initial azimuth steps (rad).
    pub dphi0_values: Vec<f64>,
    pub alpha_values: Vec<f64>,
    /// Optional line-divergence limits to co-tune (rad).
    pub div_max_values: Option<Vec<f64>>,
    pub objective: Objective,
    /// Threshold used by the coverage objective.
    pub level: ThresholdLevel,
}

impl SearchSpace {
    /// Candidates in canonical order: `dphi0` outermost, then `alpha`, then
    /// the divergence limit.
    pub fn candidates(&self) -> Vec<Candidate> {
        let divs: Vec<Option<f64>> = match &self.div_max_values {
            Some(v) => v.iter().copied().map(Some).collect(),
            None => vec![None],
        };
        let mut out = Vec::new();
        for &dphi0 in &self.dphi0_values {
            for &alpha in &self.alpha_values {
                for &div_max in &divs {
                    out.push(Candidate {
                        dphi0,
                        alpha,
                        div_max,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub dphi0: f64,
    pub alpha: f64,
    pub div_max: Option<f64>,
}

/// Everything that stays fixed across candidates.
#[derive(Debug, Clone)]
pub struct SearchContext {
    pub topo: RoadTopology,
    pub beam_l: BeamParams,
    pub mrr: MrrConfig,
    pub grid: RoadGrid,
    /// Elevation, `phi_max`, period and state cap; the grid step and ratio
    /// are replaced per candidate.
    pub sweep: LongitudinalSweep,
    /// Transverse map, computed once, or `None` when that fan is off.
    pub map_t: Option<EnergyMap>,
    pub thresholds: Thresholds,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateRow {
    pub candidate: Candidate,
    /// False when the azimuth grid would exceed the state cap.
    pub feasible: bool,
    /// Number of longitudinal states, including any dropped past the road end.
    pub k_l: usize,
    /// Largest positive azimuth node (rad).
    pub phi_m: f64,
    pub hole_ratio: Option<f64>,
    pub rho_eff: Option<f64>,
    pub rho_and: Option<f64>,
    pub rho_or: Option<f64>,
    pub objective: Option<f64>,
    /// Wall-clock seconds; ignored by equality and left out of JSON so that
    /// reports stay reproducible.
    #[serde(skip)]
    pub runtime_s: f64,
}

impl PartialEq for CandidateRow {
    fn eq(&self, o: &Self) -> bool {
        self.candidate == o.candidate
            && self.feasible == o.feasible
            && self.k_l == o.k_l
            && self.phi_m == o.phi_m
            && self.hole_ratio == o.hole_ratio
            && self.rho_eff == o.rho_eff
            && self.rho_and == o.rho_and
            && self.rho_or == o.rho_or
            && self.objective == o.objective
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best: CandidateRow,
    /// Feasible rows best first, infeasible rows last.
    pub table: Vec<CandidateRow>,
}

pub fn evaluate_candidate(
    candidate: &Candidate,
    ctx: &SearchContext,
    space: &SearchSpace,
) -> Result<CandidateRow> {
    let start = Instant::now();
    let params = AzimuthGridParams {
        dphi0: candidate.dphi0,
        alpha: candidate.alpha,
        phi_max: ctx.sweep.grid.phi_max,
    };
    params.validate()?;
    let infeasible = |k_l| CandidateRow {
        candidate: *candidate,
        feasible: false,
        k_l,
        phi_m: f64::NAN,
        hole_ratio: None,
        rho_eff: None,
        rho_and: None,
        rho_or: None,
        objective: None,
        runtime_s: start.elapsed().as_secs_f64(),
    };
    let m = params.positive_count();
    let k_l = m.saturating_mul(2).saturating_add(1);
    if k_l > ctx.sweep.state_cap {
        return Ok(infeasible(k_l));
    }
    let beam = match candidate.div_max {
        Some(d) => BeamParams {
            div_x_max: d,
            ..ctx.beam_l
        },
        None => ctx.beam_l,
    };
    let sweep = LongitudinalSweep {
        grid: params,
        ..ctx.sweep
    };
    let schedule = longitudinal_schedule(&ctx.topo, &beam, &sweep)?;
    let map_l = accumulate_energy_map(&schedule, &ctx.grid, &ctx.topo, &beam, &ctx.mrr)?;
    let gamma = ctx.thresholds.get(space.level);
    let areas = classify_areas(&map_l, ctx.map_t.as_ref(), &ctx.thresholds)?;
    let rho_eff = effective_coverage(&map_l, gamma);
    let (rho_and, rho_or) = match &ctx.map_t {
        Some(t) => (
            Some(composite_coverage(&map_l, t, gamma, CompositeMode::And)?),
            Some(composite_coverage(&map_l, t, gamma, CompositeMode::Or)?),
        ),
        None => (None, None),
    };
    let objective = match space.objective {
        Objective::MinimizeHoleRatio => areas.hole_ratio(),
        Objective::MaximizeCoverage => rho_eff,
    };
    Ok(CandidateRow {
        candidate: *candidate,
        feasible: true,
        k_l,
        phi_m: if m == 0 { 0.0 } else { params.node(m) },
        hole_ratio: Some(areas.hole_ratio()),
        rho_eff: Some(rho_eff),
        rho_and,
        rho_or,
        objective: Some(objective),
        runtime_s: start.elapsed().as_secs_f64(),
    })
}

/// Orders rows best first; ties go to the smaller `alpha`, then the smaller
/// `dphi0`, then the smaller divergence limit.
fn rank(a: &CandidateRow, b: &CandidateRow, objective: Objective) -> Ordering {
    let by_value = match (a.objective, b.objective) {
        (Some(x), Some(y)) => match objective {
            Objective::MinimizeHoleRatio => x.total_cmp(&y),
            Objective::MaximizeCoverage => y.total_cmp(&x),
        },
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    };
    by_value
        .then(a.candidate.alpha.total_cmp(&b.candidate.alpha))
        .then(a.candidate.dphi0.total_cmp(&b.candidate.dphi0))
        .then(
            a.candidate
                .div_max
                .unwrap_or(0.0)
                .total_cmp(&b.candidate.div_max.unwrap_or(0.0)),
        )
}

pub fn grid_search(space: &SearchSpace, ctx: &SearchContext) -> Result<SearchResult> {
    let candidates = space.candidates();
    if candidates.is_empty() {
        return Err(Error::NoFeasibleCandidate);
    }
    #[cfg(feature = "parallel")]
    let rows = candidates.par_iter();
    #[cfg(not(feature = "parallel"))]
    let rows = candidates.iter();
    let mut table = rows
        .map(|c| evaluate_candidate(c, ctx, space))
        .collect::<Result<Vec<_>>>()?;
    table.sort_by(|a, b| rank(a, b, space.objective));
    match table.first() {
        Some(best) if best.feasible => Ok(SearchResult {
            best: best.clone(),
            table,
        }),
        _ => Err(Error::NoFeasibleCandidate),
    }
}
