//! Parameter sweeps written as CSV.

use std::io::Write;

use crate::error::{Error, Result};
use crate::geometry::LinkGeometry;
use crate::link::{throughput_direct, throughput_relayed};
use crate::los;
use crate::mc::{self, McConfig, McEstimate};
use crate::plan;

use super::config::{RelayPosition, ScenarioConfig, SweepSpec, SweepVar};

pub const COLUMNS: [&str; 7] = [
    "value",
    "p_los_direct",
    "p_los_relayed",
    "capacity",
    "throughput_direct",
    "throughput_relayed",
    "p_los_ga",
];
pub const MC_COLUMNS: [&str; 2] = ["mc_p_hat", "mc_std_err"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    /// Ground-ground LoS over `x_g`.
    pub p_los_direct: f64,
    /// Product of both relay hops' LoS probabilities.
    pub p_los_relayed: f64,
    /// Direct-link capacity at `x_g`, bit/s.
    pub capacity: f64,
    pub throughput_direct: f64,
    pub throughput_relayed: f64,
    /// LoS of the ground-to-air hop alone.
    pub p_los_ga: f64,
    /// Monte Carlo estimate of `p_los_ga`.
    pub mc: Option<McEstimate>,
}

/// Per-row Monte Carlo seed, so a row can be recomputed in isolation.
fn row_seed(seed: u64, value: f64) -> u64 {
    let mut z = seed ^ value.to_bits().wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Evaluates one sweep row at `value` of the sweep variable.
pub fn evaluate_row(cfg: &ScenarioConfig, spec: &SweepSpec, value: f64) -> Result<SweepRow> {
    let forest = cfg.forest()?;
    let (x_g, mut h_a) = match spec.variable {
        SweepVar::XG => (value, cfg.h_a),
        SweepVar::XA => (cfg.x_g, cfg.h_a),
        SweepVar::HA => (cfg.x_g, value),
    };
    let x_a = match spec.variable {
        SweepVar::XA => value,
        _ => cfg.x_a.resolve(x_g),
    };
    if spec.optimize_altitude {
        if spec.variable == SweepVar::HA {
            return Err(Error::invalid(
                "sweep.optimize_altitude",
                "cannot optimize the swept altitude",
            ));
        }
        if spec.variable == SweepVar::XA || cfg.x_a != RelayPosition::Midpoint {
            return Err(Error::invalid(
                "sweep.optimize_altitude",
                "requires the relay at the midpoint",
            ));
        }
        h_a = plan::optimize_altitude(
            &forest,
            &cfg.budget,
            x_g,
            cfg.h_g,
            plan::default_h_range(cfg.h_g),
            plan::DEFAULT_TOL,
        )?
        .optimum;
    }

    let direct = throughput_direct(&forest, &cfg.budget, x_g, cfg.h_g)?;
    let relayed = throughput_relayed(&forest, &cfg.budget, x_g, cfg.h_g, h_a, x_a)?;
    let ga = LinkGeometry::new(cfg.h_g, h_a, x_a)?;
    let p_los_ga = los::p_los(&forest, &ga)?.p_los;
    let mc = if spec.mc {
        let mc_cfg = McConfig::new(cfg.mc.trials, row_seed(cfg.mc.seed, value), cfg.mc.workers)?;
        Some(mc::simulate_los(&forest, &ga, &mc_cfg)?)
    } else {
        None
    };
    Ok(SweepRow {
        value,
        p_los_direct: direct.p_los_end_to_end,
        p_los_relayed: relayed.p_los_end_to_end,
        capacity: direct.capacity_bps,
        throughput_direct: direct.throughput_bps,
        throughput_relayed: relayed.throughput_bps,
        p_los_ga,
        mc,
    })
}

pub fn run_sweep(cfg: &ScenarioConfig) -> Result<Vec<SweepRow>> {
    let spec = cfg
        .sweep
        .ok_or_else(|| Error::invalid("sweep", "no sweep configured"))?;
    spec.values()
        .into_iter()
        .map(|v| evaluate_row(cfg, &spec, v))
        .collect()
}

/// Writes rows as CSV preceded by a `#` units line. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_csv<W: Write>(out: W, var: SweepVar, rows: &[SweepRow], with_mc: bool) -> Result<()> {
    let mut out = out;
    writeln!(
        out,
        "# value: {} in m; probabilities dimensionless; capacity and throughput in bit/s",
        var.name()
    )?;
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    let mut header: Vec<&str> = COLUMNS.to_vec();
    if with_mc {
        header.extend(MC_COLUMNS);
    }
    w.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let mut rec: Vec<String> = [
            r.value,
            r.p_los_direct,
            r.p_los_relayed,
            r.capacity,
            r.throughput_direct,
            r.throughput_relayed,
            r.p_los_ga,
        ]
        .iter()
        .map(|x| x.to_string())
        .collect();
        if with_mc {
            let m =
                r.mc.ok_or_else(|| Error::invalid("sweep.mc", "row lacks a Monte Carlo estimate"))?;
            rec.push(m.p_hat.to_string());
            rec.push(m.std_err.to_string());
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
