//! Line-of-sight probability and expected throughput between ground and air
//! assets in a Poisson forest, with planners for the best relay altitude and
//! the direct-versus-relayed crossover distance.
//!
//! ```
//! use forestlos::{dist::HeightDistribution, geometry::{ForestModel, LinkGeometry}, los};
//!
//! let forest = ForestModel::new(0.02, HeightDistribution::uniform(29.0)?)?;
//! let link = LinkGeometry::new(2.0, 100.0, 60.0)?;
//! let r = los::p_los(&forest, &link)?;
//! assert!((r.p_los - 0.8574).abs() < 1e-4);
//! # Ok::<(), forestlos::Error>(())
//! ```

pub mod cli;
pub mod dist;
pub mod error;
pub mod geometry;
pub mod link;
pub mod los;
pub mod mc;
pub mod plan;

pub use error::{Error, Result};
