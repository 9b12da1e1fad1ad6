//! Relay planning: the throughput-maximizing relay altitude and the ground
//! separation beyond which relaying beats the direct link.

use crate::error::{Error, Result};
use crate::geometry::ForestModel;
use crate::link::{throughput_direct, throughput_relayed, LinkBudget};

/// Points in the coarse altitude scan that precedes golden-section refinement.
pub const COARSE_POINTS: usize = 32;
pub const DEFAULT_TOL: f64 = 0.1;
pub const DEFAULT_H_MAX: f64 = 1000.0;
pub const DEFAULT_X_RANGE: (f64, f64) = (5.0, 500.0);

/// `(h_g + 1, 1000)` meters.
pub fn default_h_range(h_g: f64) -> (f64, f64) {
    (h_g + 1.0, DEFAULT_H_MAX)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanResult {
    /// Optimal altitude `h_a*` or crossover separation `x_g*`, in meters.
    pub optimum: f64,
    /// Throughput at the optimum, bit/s.
    pub objective_at_optimum: f64,
    /// Final bracket around the optimum.
    pub bracket: (f64, f64),
    pub iterations: usize,
}

fn check_range(field: &'static str, (lo, hi): (f64, f64)) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::invalid(
            field,
            format!("need lo < hi, got ({lo}, {hi})"),
        ));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::invalid("tol", format!("must be > 0, got {tol}")));
    }
    Ok(())
}

/// Maximizes a unimodal `f` on `[a, b]` by golden-section search until the
/// bracket is narrower than `tol`. Returns `(x, f(x), bracket, iterations)`.
fn golden_section_max<F>(
    f: F,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<(f64, f64, (f64, f64), usize)>
where
    F: Fn(f64) -> Result<f64>,
{
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut iterations = 0;
    while b - a > tol {
        iterations += 1;
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?, (a, b), iterations))
}

/// Relay altitude maximizing the two-hop throughput with the relay above the midpoint.
///
/// A 32-point scan of `h_range` picks the bracket; golden-section search
/// refines it to `tol`. A maximum on the upper end of the range is an error,
/// a maximum at the lower end is returned as a boundary optimum.
pub fn optimize_altitude(
    forest: &ForestModel,
    budget: &LinkBudget,
    x_g: f64,
    h_g: f64,
    h_range: (f64, f64),
    tol: f64,
) -> Result<PlanResult> {
    check_range("h_range", h_range)?;
    check_tol(tol)?;
    let (lo, hi) = h_range;
    if !(lo > h_g) {
        return Err(Error::invalid(
            "h_range",
            format!("lower end {lo} must exceed h_g = {h_g}"),
        ));
    }
    if !(x_g > 0.0) {
        return Err(Error::invalid("x_g", format!("must be > 0, got {x_g}")));
    }
    let x_a = 0.5 * x_g;
    let objective =
        |h: f64| throughput_relayed(forest, budget, x_g, h_g, h, x_a).map(|t| t.throughput_bps);

    let step = (hi - lo) / (COARSE_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..COARSE_POINTS).map(|i| lo + step * i as f64).collect();
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, &h) in grid.iter().enumerate() {
        let v = objective(h)?;
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    if best == COARSE_POINTS - 1 {
        return Err(Error::Bracket { lo, hi });
    }
    let a = grid[best.saturating_sub(1)];
    let b = grid[best + 1];
    let (x, fx, bracket, iterations) = golden_section_max(objective, a, b, tol)?;
    if best == 0 {
        let f_lo = objective(lo)?;
        if f_lo >= fx {
            return Ok(PlanResult {
                optimum: lo,
                objective_at_optimum: f_lo,
                bracket: (lo, bracket.1),
                iterations,
            });
        }
    }
    Ok(PlanResult {
        optimum: x,
        objective_at_optimum: fx,
        bracket,
        iterations,
    })
}

/// Altitude-optimized relayed throughput minus direct throughput at separation `x_g`.
pub fn relay_advantage(
    forest: &ForestModel,
    budget: &LinkBudget,
    x_g: f64,
    h_g: f64,
    h_range: (f64, f64),
    tol: f64,
) -> Result<f64> {
    let relayed = optimize_altitude(forest, budget, x_g, h_g, h_range, tol)?.objective_at_optimum;
    let direct = throughput_direct(forest, budget, x_g, h_g)?.throughput_bps;
    Ok(relayed - direct)
}

/// Separation where the altitude-optimized relay starts to beat the direct link.
///
/// Bisects [`relay_advantage`] on `x_range` down to `tol`, then takes a secant
/// step inside the last bracket and keeps whichever point has the smallest
/// residual. `objective_at_optimum` is the direct throughput there.
pub fn crossover_distance(
    forest: &ForestModel,
    budget: &LinkBudget,
    h_g: f64,
    h_range: (f64, f64),
    x_range: (f64, f64),
    tol: f64,
) -> Result<PlanResult> {
    check_range("x_range", x_range)?;
    check_tol(tol)?;
    if !(x_range.0 > 0.0) {
        return Err(Error::invalid("x_range", "lower end must be > 0"));
    }
    let f = |x: f64| relay_advantage(forest, budget, x, h_g, h_range, tol);
    let (mut lo, mut hi) = x_range;
    let mut f_lo = f(lo)?;
    let mut f_hi = f(hi)?;
    if f_lo.signum() == f_hi.signum() && f_lo != 0.0 && f_hi != 0.0 {
        return Err(Error::NoSignChange { lo, hi, f_lo, f_hi });
    }

    let mut iterations = 0;
    while hi - lo > tol && f_lo != 0.0 && f_hi != 0.0 {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }

    let mut best = if f_lo.abs() <= f_hi.abs() {
        (lo, f_lo)
    } else {
        (hi, f_hi)
    };
    if f_hi != f_lo {
        let secant = lo - f_lo * (hi - lo) / (f_hi - f_lo);
        if secant > lo && secant < hi {
            let f_secant = f(secant)?;
            if f_secant.abs() < best.1.abs() {
                best = (secant, f_secant);
            }
        }
    }
    let optimum = best.0;
    Ok(PlanResult {
        optimum,
        objective_at_optimum: throughput_direct(forest, budget, optimum, h_g)?.throughput_bps,
        bracket: (lo, hi),
        iterations,
    })
}
