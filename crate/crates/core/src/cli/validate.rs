//! Cross-checks the closed forms against quadrature and Monte Carlo on a grid
//! of ground-air links, and reports the planner's peaks and crossover.

use crate::error::Result;
use crate::geometry::{ForestModel, LinkGeometry};
use crate::link::LinkBudget;
use crate::los;
use crate::mc::{self, McConfig, McEstimate};
use crate::plan;

/// Closed form vs quadrature, relative.
pub const QUAD_REL_TOL: f64 = 1e-9;
/// Closed form vs Monte Carlo, in standard errors.
pub const MC_SIGMAS: f64 = 3.9;

pub const DEFAULT_GRID_XA: [f64; 4] = [20.0, 60.0, 100.0, 200.0];
pub const DEFAULT_GRID_HA: [f64; 3] = [50.0, 100.0, 200.0];

/// Reference peak throughputs for the reference scenario: `(x_g, h_a*, Mbps)`.
pub const REFERENCE_PEAKS: [(f64, f64, f64); 3] = [
    (50.0, 77.0, 100.6),
    (100.0, 134.0, 82.7),
    (200.0, 230.0, 65.5),
];
/// Reference crossover for the reference scenario: `(x_g*, Mbps)`.
pub const REFERENCE_CROSSOVER: (f64, f64) = (52.9, 99.0);

pub type ClosedForm<'a> = &'a dyn Fn(&ForestModel, &LinkGeometry) -> Result<f64>;
pub type PlanOutcome = Result<plan::PlanResult>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationPoint {
    pub x_a: f64,
    pub h_a: f64,
    pub closed_form: f64,
    pub quadrature: f64,
    pub rel_err: f64,
    pub mc: McEstimate,
    pub quad_pass: bool,
    pub mc_pass: bool,
}

impl ValidationPoint {
    pub fn passed(&self) -> bool {
        self.quad_pass && self.mc_pass
    }

    /// Closed-form deviation from the Monte Carlo estimate in standard errors.
    pub fn z(&self) -> f64 {
        let d = (self.closed_form - self.mc.p_hat).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.mc.std_err
        }
    }
}

/// Validates `closed_form` at every `(x_a, h_a)` of the grid. Point `i` uses
/// Monte Carlo seed `seed + i`.
pub fn validate_with(
    forest: &ForestModel,
    h_g: f64,
    grid_xa: &[f64],
    grid_ha: &[f64],
    mc_cfg: &McConfig,
    closed_form: ClosedForm<'_>,
) -> Result<Vec<ValidationPoint>> {
    let mut points = Vec::with_capacity(grid_xa.len() * grid_ha.len());
    for &x_a in grid_xa {
        for &h_a in grid_ha {
            let geom = LinkGeometry::new(h_g, h_a, x_a)?;
            let cf = closed_form(forest, &geom)?;
            let quad =
                los::p_los_ground_air_quadrature(forest, &geom, los::DEFAULT_QUAD_TOL)?.p_los;
            let rel_err = (cf - quad).abs() / quad.abs().max(f64::MIN_POSITIVE);
            let cfg = McConfig::new(
                mc_cfg.trials,
                mc_cfg.seed.wrapping_add(points.len() as u64),
                mc_cfg.workers,
            )?;
            let est = mc::simulate_los(forest, &geom, &cfg)?;
            points.push(ValidationPoint {
                x_a,
                h_a,
                closed_form: cf,
                quadrature: quad,
                rel_err,
                mc: est,
                quad_pass: rel_err <= QUAD_REL_TOL,
                mc_pass: est.agrees_with(cf, MC_SIGMAS),
            });
        }
    }
    Ok(points)
}

/// [`validate_with`] using the library closed forms.
pub fn validate(
    forest: &ForestModel,
    h_g: f64,
    grid_xa: &[f64],
    grid_ha: &[f64],
    mc_cfg: &McConfig,
) -> Result<Vec<ValidationPoint>> {
    validate_with(forest, h_g, grid_xa, grid_ha, mc_cfg, &|f, g| {
        Ok(los::p_los(f, g)?.p_los)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakReport {
    pub x_g: f64,
    pub result: PlanOutcome,
    pub reference_h_a: f64,
    pub reference_mbps: f64,
}

/// Throughput-optimal altitudes at the reference separations and the
/// direct/relayed crossover, each paired with its reference value.
pub fn planner_report(
    forest: &ForestModel,
    budget: &LinkBudget,
    h_g: f64,
) -> (Vec<PeakReport>, PlanOutcome) {
    let h_range = plan::default_h_range(h_g);
    let peaks = REFERENCE_PEAKS
        .iter()
        .map(|&(x_g, reference_h_a, reference_mbps)| PeakReport {
            x_g,
            result: plan::optimize_altitude(forest, budget, x_g, h_g, h_range, plan::DEFAULT_TOL),
            reference_h_a,
            reference_mbps,
        })
        .collect();
    let crossover = plan::crossover_distance(
        forest,
        budget,
        h_g,
        h_range,
        plan::DEFAULT_X_RANGE,
        plan::DEFAULT_TOL,
    );
    (peaks, crossover)
}
