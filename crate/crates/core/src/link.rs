//! Link budget, Shannon capacity and expected throughput.
//!
//! Expected throughput is LoS probability times capacity for a single hop. A
//! two-hop relay runs time-division duplex, so it delivers half the smaller hop
//! capacity, gated by both hops' LoS probabilities.

use crate::error::{Error, Result};
use crate::geometry::{ForestModel, LinkGeometry};
use crate::los::{self, LosResult};

/// Log-distance link budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    snr0_db: f64,
    alpha: f64,
    bandwidth_hz: f64,
    d0: f64,
}

impl Default for LinkBudget {
    /// 38 GHz budget: 51.98 dB at 1 m, path-loss exponent 2.3, 20 MHz.
    fn default() -> Self {
        Self {
            snr0_db: 51.98,
            alpha: 2.3,
            bandwidth_hz: 20e6,
            d0: 1.0,
        }
    }
}

impl LinkBudget {
    pub fn new(snr0_db: f64, alpha: f64, bandwidth_hz: f64, d0: f64) -> Result<Self> {
        if !snr0_db.is_finite() {
            return Err(Error::invalid(
                "snr0_db",
                format!("must be finite, got {snr0_db}"),
            ));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid("alpha", format!("must be > 0, got {alpha}")));
        }
        if !(bandwidth_hz > 0.0 && bandwidth_hz.is_finite()) {
            return Err(Error::invalid(
                "bandwidth_hz",
                format!("must be > 0, got {bandwidth_hz}"),
            ));
        }
        if !(d0 > 0.0 && d0.is_finite()) {
            return Err(Error::invalid("d0", format!("must be > 0, got {d0}")));
        }
        Ok(Self {
            snr0_db,
            alpha,
            bandwidth_hz,
            d0,
        })
    }

    pub fn snr0_db(&self) -> f64 {
        self.snr0_db
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.bandwidth_hz
    }

    pub fn d0(&self) -> f64 {
        self.d0
    }

    /// SNR in dB at distance `d`.
    pub fn snr_db(&self, d: f64) -> Result<f64> {
        if !(d > 0.0) {
            return Err(Error::Domain {
                field: "d",
                value: d,
                domain: "(0, inf)".into(),
            });
        }
        Ok(self.snr0_db - 10.0 * self.alpha * (d / self.d0).log10())
    }

    /// Shannon capacity in bit/s at distance `d`. The only place dB becomes linear.
    pub fn capacity_bps(&self, d: f64) -> Result<f64> {
        let snr = 10f64.powf(self.snr_db(d)? / 10.0);
        Ok(self.bandwidth_hz * snr.ln_1p() / std::f64::consts::LN_2)
    }
}

/// One hop of a link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hop {
    pub distance: f64,
    pub capacity_bps: f64,
    pub p_los: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputResult {
    pub throughput_bps: f64,
    /// Capacity of the direct link, or the smaller hop capacity for a relay.
    pub capacity_bps: f64,
    pub p_los_end_to_end: f64,
    /// Ground-to-air and air-to-ground hops of a relayed link.
    pub per_hop: Option<[Hop; 2]>,
}

/// Direct ground-ground link over `x_g`.
pub fn throughput_direct(
    forest: &ForestModel,
    budget: &LinkBudget,
    x_g: f64,
    h_g: f64,
) -> Result<ThroughputResult> {
    let p = los::p_los_ground_ground(forest, x_g, h_g)?.p_los;
    let c = budget.capacity_bps(x_g)?;
    Ok(ThroughputResult {
        throughput_bps: p * c,
        capacity_bps: c,
        p_los_end_to_end: p,
        per_hop: None,
    })
}

fn hop(forest: &ForestModel, budget: &LinkBudget, geom: &LinkGeometry) -> Result<Hop> {
    let LosResult { p_los, .. } = los::p_los(forest, geom)?;
    let distance = geom.slant_range();
    Ok(Hop {
        distance,
        capacity_bps: budget.capacity_bps(distance)?,
        p_los,
    })
}

/// Ground-air-ground relay with the air asset at horizontal position `x_a` and height `h_a`.
///
/// The two hops are treated as blocked independently.
pub fn throughput_relayed(
    forest: &ForestModel,
    budget: &LinkBudget,
    x_g: f64,
    h_g: f64,
    h_a: f64,
    x_a: f64,
) -> Result<ThroughputResult> {
    if !(x_a > 0.0 && x_a < x_g) {
        return Err(Error::Domain {
            field: "x_a",
            value: x_a,
            domain: format!("(0, {x_g})"),
        });
    }
    if h_a == h_g {
        return Err(Error::DegenerateGeometry { h: h_g });
    }
    let up = hop(forest, budget, &LinkGeometry::new(h_g, h_a, x_a)?)?;
    let down = hop(forest, budget, &LinkGeometry::new(h_g, h_a, x_g - x_a)?)?;
    let p = up.p_los * down.p_los;
    let c = up.capacity_bps.min(down.capacity_bps);
    Ok(ThroughputResult {
        throughput_bps: 0.5 * p * c,
        capacity_bps: c,
        p_los_end_to_end: p,
        per_hop: Some([up, down]),
    })
}
