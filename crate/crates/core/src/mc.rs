//! Monte Carlo LoS estimation by drawing random forests along the sightline.
//!
//! Each trial draws `N ~ Poisson(lambda0 * span)` obstacles, places them
//! uniformly on the span, draws their heights, and declares the link blocked
//! if any obstacle is strictly taller than the sightline at its position.
//!
//! Trial `i` owns ChaCha8 stream `i` under a key derived from the seed, so the
//! blocked count depends only on `(seed, trials)` and not on how trials are
//! spread over worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{ForestModel, LinkGeometry};

pub const DEFAULT_TRIALS: u64 = 500_000;

/// Trials per parallel work item.
const CHUNK: u64 = 8192;
/// Below this mean Poisson variates are drawn by sequential inversion.
const INVERSION_LIMIT: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    /// Worker threads; 0 uses the global rayon pool.
    pub workers: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            trials: DEFAULT_TRIALS,
            seed: 1,
            workers: 0,
        }
    }
}

impl McConfig {
    pub fn new(trials: u64, seed: u64, workers: usize) -> Result<Self> {
        if trials == 0 {
            return Err(Error::invalid("trials", "must be >= 1"));
        }
        Ok(Self {
            trials,
            seed,
            workers,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub p_hat: f64,
    pub std_err: f64,
    pub trials: u64,
    pub blocked_count: u64,
}

impl McEstimate {
    pub fn from_counts(blocked_count: u64, trials: u64) -> Self {
        let p_hat = 1.0 - blocked_count as f64 / trials as f64;
        Self {
            p_hat,
            std_err: (p_hat * (1.0 - p_hat) / trials as f64).sqrt(),
            trials,
            blocked_count,
        }
    }

    /// True when `|p_hat - p| <= k * std_err`.
    pub fn agrees_with(&self, p: f64, k: f64) -> bool {
        (self.p_hat - p).abs() <= k * self.std_err
    }
}

/// RNG for one trial: stream `trial` of the ChaCha8 key derived from `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn ln_factorial(k: u64) -> f64 {
    if k < 16 {
        return (2..=k).map(|i| (i as f64).ln()).sum();
    }
    let n = k as f64;
    let inv = 1.0 / n;
    let inv2 = inv * inv;
    n * n.ln() - n
        + 0.5 * (2.0 * std::f64::consts::PI * n).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}

/// Draws a Poisson variate. Sequential-search inversion below a mean of 30,
/// Hörmann's transformed rejection with squeeze (PTRS) above.
pub fn poisson_draw<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if !(mean > 0.0) {
        return 0;
    }
    if mean < INVERSION_LIMIT {
        let u: f64 = rng.random();
        let mut k = 0u64;
        let mut p = (-mean).exp();
        let mut cdf = p;
        while u > cdf {
            k += 1;
            p *= mean / k as f64;
            let next = cdf + p;
            if next == cdf {
                // The remaining tail is below double precision.
                break;
            }
            cdf = next;
        }
        return k;
    }

    let smu = mean.sqrt();
    let b = 0.931 + 2.53 * smu;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    let log_mean = mean.ln();
    loop {
        let u = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        if lhs <= -mean + k * log_mean - ln_factorial(k as u64) {
            return k as u64;
        }
    }
}

/// Draws one forest on the link's span and reports whether it blocks the sightline.
fn forest_blocks<R: Rng + ?Sized>(forest: &ForestModel, geom: &LinkGeometry, rng: &mut R) -> bool {
    let span = geom.x_span();
    let n = poisson_draw(forest.lambda0() * span, rng);
    (0..n).any(|_| {
        let x = rng.random::<f64>() * span;
        let h = forest.heights().sample(rng);
        h > geom.critical_height_unchecked(x)
    })
}

fn count_blocked<F>(cfg: &McConfig, trial_blocks: F) -> Result<u64>
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    let chunks = cfg.trials.div_ceil(CHUNK);
    let run = || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let start = c * CHUNK;
                let end = (start + CHUNK).min(cfg.trials);
                let mut blocked = 0u64;
                for trial in start..end {
                    let mut rng = base.clone();
                    rng.set_stream(trial);
                    rng.set_word_pos(0);
                    blocked += u64::from(trial_blocks(&mut rng));
                }
                blocked
            })
            .sum::<u64>()
    };
    if cfg.workers == 0 {
        Ok(run())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::invalid("workers", e.to_string()))?;
        Ok(pool.install(run))
    }
}

/// Estimates the LoS probability of one link (ground-ground when `h_a == h_g`).
pub fn simulate_los(
    forest: &ForestModel,
    geom: &LinkGeometry,
    cfg: &McConfig,
) -> Result<McEstimate> {
    if cfg.trials == 0 {
        return Err(Error::invalid("trials", "must be >= 1"));
    }
    let blocked = count_blocked(cfg, |rng| forest_blocks(forest, geom, rng))?;
    Ok(McEstimate::from_counts(blocked, cfg.trials))
}

/// Estimates the end-to-end LoS probability of a two-hop link, drawing an
/// independent forest for each hop. A trial succeeds only if both hops are clear.
pub fn simulate_relayed_los(
    forest: &ForestModel,
    up: &LinkGeometry,
    down: &LinkGeometry,
    cfg: &McConfig,
) -> Result<McEstimate> {
    if cfg.trials == 0 {
        return Err(Error::invalid("trials", "must be >= 1"));
    }
    let blocked = count_blocked(cfg, |rng| {
        let first = forest_blocks(forest, up, rng);
        let second = forest_blocks(forest, down, rng);
        first | second
    })?;
    Ok(McEstimate::from_counts(blocked, cfg.trials))
}
