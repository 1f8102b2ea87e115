//! Browser demo: beam cuts, azimuth schedules and a small coverage explorer.
//!
//! The computations live in [`demo`] as plain Rust so they can be tested
//! natively; the `wasm_bindgen` wrappers only translate errors.

use wasm_bindgen::prelude::*;

pub mod demo {
    use linescan::beam::{line_axis_cut, BeamParams, ProfileCut};
    use linescan::config::{highway_config, Scenario, ThresholdSource};
    use linescan::coverage::{
        accumulate_energy_map, calibrate_thresholds, classify_areas, RoadGrid, Thresholds,
    };
    use linescan::scan::{
        azimuth_grid, dwell_allocation, longitudinal_schedule, AzimuthGridParams, LongitudinalSweep,
    };
    use linescan::Result;

    /// Line-axis cut at `z_m`, normalised to the on-axis value.
    pub fn profile(
        order: u32,
        div_line_deg: f64,
        div_thick_deg: f64,
        z_m: f64,
        samples: usize,
    ) -> Result<ProfileCut> {
        let (dx, dy) = (div_line_deg.to_radians(), div_thick_deg.to_radians());
        let beam = BeamParams::from_divergences(1.0, 1550e-9, dx, dy, order, 1, dx, dy)?;
        line_axis_cut(&beam, z_m, samples, 1.5)
    }

    /// Azimuth nodes (deg) and their dwell times (us).
    pub fn schedule(
        dphi0_deg: f64,
        alpha: f64,
        phi_max_deg: f64,
        period_ms: f64,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let p = AzimuthGridParams {
            dphi0: dphi0_deg.to_radians(),
            alpha,
            phi_max: phi_max_deg.to_radians(),
        };
        // a browser tab should not try to build a million states
        let nodes = azimuth_grid(&p, 20_001)?.nodes();
        let dwell = dwell_allocation(&nodes, period_ms * 1e-3)?;
        Ok((
            nodes.iter().map(|n| n.to_degrees()).collect(),
            dwell.iter().map(|t| t * 1e6).collect(),
        ))
    }

    /// The highway scenario on a coarse grid, calibrated once at `alpha = 1`.
    pub struct Explorer {
        pub scenario: Scenario,
        pub grid: RoadGrid,
        pub thresholds: Thresholds,
    }

    pub struct ClassView {
        pub nx: usize,
        pub ny: usize,
        pub classes: Vec<u8>,
        pub fractions: [f64; 4],
        pub states: usize,
    }

    impl Explorer {
        pub fn new(grid_res_m: f64, dphi0_deg: f64) -> Result<Self> {
            let mut cfg = highway_config();
            cfg.grid.resolution_m = grid_res_m;
            cfg.longitudinal.dphi0_deg = dphi0_deg;
            let scenario = cfg.validate()?;
            let grid = RoadGrid::from_resolution(&scenario.topo, grid_res_m)?;
            let q = match scenario.thresholds {
                ThresholdSource::Calibrate(q) => q,
                ThresholdSource::Fixed(_) => unreachable!("shipped config calibrates"),
            };
            let mut e = Explorer {
                scenario,
                grid,
                thresholds: Thresholds {
                    pos: 1.0,
                    sen: 1.0,
                    com_low: 1.0,
                    com_high: 1.0,
                },
            };
            let (reference, _) = e.map(1.0)?;
            e.thresholds = calibrate_thresholds(&reference, None, &q)?;
            Ok(e)
        }

        fn map(&self, alpha: f64) -> Result<(linescan::coverage::EnergyMap, usize)> {
            let s = &self.scenario;
            let sweep = LongitudinalSweep {
                grid: AzimuthGridParams {
                    alpha,
                    ..s.sweep_l.grid
                },
                ..s.sweep_l
            };
            let sched = longitudinal_schedule(&s.topo, &s.beam_l, &sweep)?;
            let m = accumulate_energy_map(&sched, &self.grid, &s.topo, &s.beam_l, &s.mrr)?;
            Ok((m, sched.len()))
        }

        pub fn classes(&self, alpha: f64) -> Result<ClassView> {
            let (m, states) = self.map(alpha)?;
            let a = classify_areas(&m, None, &self.thresholds)?;
            Ok(ClassView {
                nx: self.grid.nx,
                ny: self.grid.ny,
                classes: a.classes,
                fractions: a.fractions,
                states,
            })
        }
    }
}

fn js(e: linescan::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Normalised line-axis cut; offsets run linearly over +-1.5 beam radii.
#[wasm_bindgen]
pub fn profile_cut(
    order: u32,
    div_line_deg: f64,
    div_thick_deg: f64,
    z_m: f64,
    samples: usize,
) -> Result<Vec<f64>, JsError> {
    demo::profile(order, div_line_deg, div_thick_deg, z_m, samples)
        .map(|c| c.values)
        .map_err(js)
}

#[wasm_bindgen]
pub struct Schedule {
    nodes_deg: Vec<f64>,
    dwell_us: Vec<f64>,
}

#[wasm_bindgen]
impl Schedule {
    #[wasm_bindgen(getter)]
    pub fn nodes_deg(&self) -> Vec<f64> {
        self.nodes_deg.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn dwell_us(&self) -> Vec<f64> {
        self.dwell_us.clone()
    }
}

#[wasm_bindgen]
pub fn azimuth_schedule(
    dphi0_deg: f64,
    alpha: f64,
    phi_max_deg: f64,
    period_ms: f64,
) -> Result<Schedule, JsError> {
    let (nodes_deg, dwell_us) =
        demo::schedule(dphi0_deg, alpha, phi_max_deg, period_ms).map_err(js)?;
    Ok(Schedule {
        nodes_deg,
        dwell_us,
    })
}

#[wasm_bindgen]
pub struct ClassMap {
    nx: usize,
    ny: usize,
    classes: Vec<u8>,
    fractions: Vec<f64>,
    states: usize,
}

#[wasm_bindgen]
impl ClassMap {
    #[wasm_bindgen(getter)]
    pub fn nx(&self) -> usize {
        self.nx
    }

    #[wasm_bindgen(getter)]
    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Row-major classes 1-4, one row per lateral cell.
    #[wasm_bindgen(getter)]
    pub fn classes(&self) -> Vec<u8> {
        self.classes.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn fractions(&self) -> Vec<f64> {
        self.fractions.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn states(&self) -> usize {
        self.states
    }
}

#[wasm_bindgen]
pub struct CoverageExplorer {
    inner: demo::Explorer,
}

#[wasm_bindgen]
impl CoverageExplorer {
    #[wasm_bindgen(constructor)]
    pub fn new(grid_res_m: f64, dphi0_deg: f64) -> Result<CoverageExplorer, JsError> {
        Ok(CoverageExplorer {
            inner: demo::Explorer::new(grid_res_m, dphi0_deg).map_err(js)?,
        })
    }

    pub fn classify(&self, alpha: f64) -> Result<ClassMap, JsError> {
        let v = self.inner.classes(alpha).map_err(js)?;
        Ok(ClassMap {
            nx: v.nx,
            ny: v.ny,
            classes: v.classes,
            fractions: v.fractions.to_vec(),
            states: v.states,
        })
    }

    #[wasm_bindgen(getter)]
    pub fn gamma_pos(&self) -> f64 {
        self.inner.thresholds.pos
    }
}
