//! Forest and link geometry.

use crate::dist::HeightDistribution;
use crate::error::{Error, Result};

/// Obstacles along a sightline: a 1-D Poisson process of `lambda0` obstacles
/// per meter, each with an independent height drawn from `heights`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    lambda0: f64,
    heights: HeightDistribution,
}

impl ForestModel {
    pub fn new(lambda0: f64, heights: HeightDistribution) -> Result<Self> {
        if !(lambda0 >= 0.0 && lambda0.is_finite()) {
            return Err(Error::invalid(
                "lambda0",
                format!("must be >= 0, got {lambda0}"),
            ));
        }
        Ok(Self { lambda0, heights })
    }

    /// Line density from the areal density and the mean obstacle width.
    pub fn from_areal(lambda_f: f64, mean_width: f64, heights: HeightDistribution) -> Result<Self> {
        Self::new(derive_line_density(lambda_f, mean_width)?, heights)
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn heights(&self) -> &HeightDistribution {
        &self.heights
    }
}

/// `lambda0 = E(w) * lambda_f`: obstacles per meter of sightline.
pub fn derive_line_density(lambda_f: f64, mean_width: f64) -> Result<f64> {
    if !(lambda_f >= 0.0 && lambda_f.is_finite()) {
        return Err(Error::invalid(
            "lambda_f",
            format!("must be >= 0, got {lambda_f}"),
        ));
    }
    if !(mean_width >= 0.0 && mean_width.is_finite()) {
        return Err(Error::invalid(
            "mean_width",
            format!("must be >= 0, got {mean_width}"),
        ));
    }
    Ok(lambda_f * mean_width)
}

/// One link: a ground device at horizontal position 0 and height `h_g`, and a
/// second device at `x_span` and height `h_a`. Ground-ground links have `h_a == h_g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    h_g: f64,
    h_a: f64,
    x_span: f64,
}

impl LinkGeometry {
    pub fn new(h_g: f64, h_a: f64, x_span: f64) -> Result<Self> {
        if !(h_g >= 0.0 && h_g.is_finite()) {
            return Err(Error::invalid("h_g", format!("must be >= 0, got {h_g}")));
        }
        if !(h_a >= h_g && h_a.is_finite()) {
            return Err(Error::invalid(
                "h_a",
                format!("must be >= h_g = {h_g}, got {h_a}"),
            ));
        }
        if !(x_span > 0.0 && x_span.is_finite()) {
            return Err(Error::invalid(
                "x_span",
                format!("must be > 0, got {x_span}"),
            ));
        }
        Ok(Self { h_g, h_a, x_span })
    }

    pub fn ground_ground(h_g: f64, x_g: f64) -> Result<Self> {
        Self::new(h_g, h_g, x_g)
    }

    pub fn h_g(&self) -> f64 {
        self.h_g
    }

    pub fn h_a(&self) -> f64 {
        self.h_a
    }

    pub fn x_span(&self) -> f64 {
        self.x_span
    }

    pub fn is_ground_ground(&self) -> bool {
        self.h_a == self.h_g
    }

    /// Straight-line distance between the two devices.
    pub fn slant_range(&self) -> f64 {
        self.x_span.hypot(self.h_a - self.h_g)
    }

    /// Height of the sightline above position `x`, for `0 <= x <= x_span`.
    pub fn critical_height(&self, x: f64) -> Result<f64> {
        if !(0.0..=self.x_span).contains(&x) {
            return Err(Error::Domain {
                field: "x",
                value: x,
                domain: format!("[0, {}]", self.x_span),
            });
        }
        Ok(self.critical_height_unchecked(x))
    }

    pub(crate) fn critical_height_unchecked(&self, x: f64) -> f64 {
        (self.h_a - self.h_g) / self.x_span * x + self.h_g
    }

    /// Position where the sightline clears `h_max`; obstacles further out cannot block.
    ///
    /// Returns 0 when `h_max <= h_g`. The result exceeds `x_span` when `h_max > h_a`.
    pub fn critical_distance(&self, h_max: f64) -> Result<f64> {
        if self.is_ground_ground() {
            return Err(Error::DegenerateGeometry { h: self.h_g });
        }
        Ok(((h_max - self.h_g) / (self.h_a - self.h_g) * self.x_span).max(0.0))
    }

    /// Position where the sightline reaches height `h`, or `None` if outside `(0, x_span)`.
    pub(crate) fn position_of_height(&self, h: f64) -> Option<f64> {
        if self.is_ground_ground() {
            return None;
        }
        let x = (h - self.h_g) / (self.h_a - self.h_g) * self.x_span;
        (x > 0.0 && x < self.x_span).then_some(x)
    }
}
