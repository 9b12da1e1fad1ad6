//! Line-of-sight probabilities.
//!
//! Obstacles taller than the sightline at their position form a thinned
//! Poisson process with density `lambda(x) = lambda0 * (1 - F_H(h_c(x)))`.
//! The LoS probability is its void probability on the span,
//! `exp(-integral of lambda)`. The integral is evaluated either in closed form
//! (truncated Gaussian, uniform) or by adaptive quadrature, which also serves
//! as the cross-check for both closed forms.

pub mod quadrature;

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use crate::dist::{erf, erfc, HeightDistribution};
use crate::error::{Error, Result};
use crate::geometry::{ForestModel, LinkGeometry};

/// Default relative tolerance of the quadrature path.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LosMethod {
    Homogeneous,
    ClosedFormGaussian,
    ClosedFormUniform,
    Quadrature,
}

impl fmt::Display for LosMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LosMethod::Homogeneous => "homogeneous",
            LosMethod::ClosedFormGaussian => "closed_form_gaussian",
            LosMethod::ClosedFormUniform => "closed_form_uniform",
            LosMethod::Quadrature => "quadrature",
        })
    }
}

/// LoS probability together with its exponent, the expected number of blockers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosResult {
    pub p_los: f64,
    pub exponent: f64,
    pub method: LosMethod,
}

impl LosResult {
    fn from_exponent(exponent: f64, method: LosMethod) -> Self {
        // Cancellation in the closed forms can leave -1e-17 when nothing blocks.
        let exponent = exponent.max(0.0);
        Self {
            p_los: (-exponent).exp(),
            exponent,
            method,
        }
    }
}

/// Density of blocking obstacles at position `x` along the link.
pub fn density_at(forest: &ForestModel, geom: &LinkGeometry, x: f64) -> Result<f64> {
    let h = geom.critical_height(x)?;
    Ok(forest.lambda0() * forest.heights().survival(h))
}

/// Ground-ground LoS over a separation `x_g` with both devices at height `h_g`.
pub fn p_los_ground_ground(forest: &ForestModel, x_g: f64, h_g: f64) -> Result<LosResult> {
    let geom = LinkGeometry::ground_ground(h_g, x_g)?;
    Ok(homogeneous(forest, &geom))
}

fn homogeneous(forest: &ForestModel, geom: &LinkGeometry) -> LosResult {
    let exponent = forest.lambda0() * forest.heights().survival(geom.h_g()) * geom.x_span();
    LosResult::from_exponent(exponent, LosMethod::Homogeneous)
}

/// `integral_0^{x_a} erfc(b x - a) dx` times `c`, i.e. `c (x_a + integral erf(a - b x) dx)`.
///
/// Uses the antiderivative `t erfc(t) - e^{-t^2}/sqrt(pi)` of `erfc`, which is the
/// handbook expression for `integral erf(a - b x)` with `x_a` folded in, arranged so
/// that no term cancels against `x_a` when `b x_a - a` is large.
pub fn gaussian_ramp_exponent(a: f64, b: f64, c: f64, x_a: f64) -> f64 {
    let u = b * x_a - a;
    let bracket = (-a * a).exp() - (-u * u).exp() + PI.sqrt() * (u * erfc(u) + a * erfc(-a));
    c * bracket / (PI.sqrt() * b)
}

/// The handbook form `(e^{-a^2} + sqrt(pi)[(b x_a - a) erf(a - b x_a) + a erf(a)] - e^{-(a - b x_a)^2}) / (sqrt(pi) b)`
/// of `integral_0^{x_a} erf(a - b x) dx`.
pub fn erf_ramp_integral(a: f64, b: f64, x_a: f64) -> f64 {
    let r = a - b * x_a;
    ((-a * a).exp() + PI.sqrt() * ((b * x_a - a) * erf(r) + a * erf(a)) - (-r * r).exp())
        / (PI.sqrt() * b)
}

/// Coefficients `(a, b, c)` of the Gaussian closed form.
pub fn gaussian_coefficients(forest: &ForestModel, geom: &LinkGeometry) -> Result<(f64, f64, f64)> {
    let HeightDistribution::TruncatedGaussian(g) = forest.heights() else {
        return Err(Error::WrongDistribution {
            method: "closed_form_gaussian",
            expected: "truncated Gaussian",
        });
    };
    if geom.is_ground_ground() {
        return Err(Error::DegenerateGeometry { h: geom.h_g() });
    }
    let scale = SQRT_2 * g.sigma();
    let a = (g.mu() - geom.h_g()) / scale;
    let b = (geom.h_a() - geom.h_g()) / (scale * geom.x_span());
    let c = forest.lambda0() / (2.0 * g.retained_mass());
    Ok((a, b, c))
}

/// Ground-air LoS for truncated-Gaussian obstacle heights, in closed form.
pub fn p_los_ground_air_gaussian(forest: &ForestModel, geom: &LinkGeometry) -> Result<LosResult> {
    let (a, b, c) = gaussian_coefficients(forest, geom)?;
    let exponent = gaussian_ramp_exponent(a, b, c, geom.x_span());
    Ok(LosResult::from_exponent(
        exponent,
        LosMethod::ClosedFormGaussian,
    ))
}

/// Ground-air LoS for uniform obstacle heights, in closed form.
pub fn p_los_ground_air_uniform(forest: &ForestModel, geom: &LinkGeometry) -> Result<LosResult> {
    let HeightDistribution::Uniform { h_max } = *forest.heights() else {
        return Err(Error::WrongDistribution {
            method: "closed_form_uniform",
            expected: "uniform",
        });
    };
    let x_c = geom.critical_distance(h_max)?;
    let (h_g, h_a, x_a) = (geom.h_g(), geom.h_a(), geom.x_span());
    let m = x_a.min(x_c);
    let lambda_u =
        forest.lambda0() * m * (1.0 - h_g / h_max - (h_a - h_g) / (2.0 * x_a * h_max) * m);
    Ok(LosResult::from_exponent(
        lambda_u,
        LosMethod::ClosedFormUniform,
    ))
}

/// Ground-air LoS by adaptive quadrature of the blocker density; works for any
/// height law. Falls back to the homogeneous formula when `h_a == h_g`.
pub fn p_los_ground_air_quadrature(
    forest: &ForestModel,
    geom: &LinkGeometry,
    rel_tol: f64,
) -> Result<LosResult> {
    if !(rel_tol > 0.0) {
        return Err(Error::invalid("tol", format!("must be > 0, got {rel_tol}")));
    }
    if geom.is_ground_ground() {
        return Ok(homogeneous(forest, geom));
    }
    let exponent = if forest.lambda0() == 0.0 {
        0.0
    } else {
        let mut points = vec![0.0, geom.x_span()];
        points.extend(
            forest
                .heights()
                .landmarks()
                .into_iter()
                .filter_map(|h| geom.position_of_height(h)),
        );
        points.sort_by(f64::total_cmp);
        points.dedup();
        let lambda0 = forest.lambda0();
        let heights = forest.heights();
        let density = |x: f64| lambda0 * heights.survival(geom.critical_height_unchecked(x));
        quadrature::integrate(density, &points, rel_tol, 1e-300, MAX_INTERVALS)?.value
    };
    Ok(LosResult::from_exponent(exponent, LosMethod::Quadrature))
}

/// LoS for any link, picking the homogeneous formula, the matching closed
/// form, or quadrature for tabulated heights.
pub fn p_los(forest: &ForestModel, geom: &LinkGeometry) -> Result<LosResult> {
    if geom.is_ground_ground() {
        return Ok(homogeneous(forest, geom));
    }
    match forest.heights() {
        HeightDistribution::TruncatedGaussian(_) => p_los_ground_air_gaussian(forest, geom),
        HeightDistribution::Uniform { .. } => p_los_ground_air_uniform(forest, geom),
        HeightDistribution::Tabulated(_) => {
            p_los_ground_air_quadrature(forest, geom, DEFAULT_QUAD_TOL)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn forest(lambda0: f64, heights: HeightDistribution) -> ForestModel {
        ForestModel::new(lambda0, heights).unwrap()
    }

    fn gauss() -> HeightDistribution {
        HeightDistribution::truncated_gaussian(19.0, 10.0).unwrap()
    }

    fn unif() -> HeightDistribution {
        HeightDistribution::uniform(29.0).unwrap()
    }

    fn geom(h_a: f64, x_a: f64) -> LinkGeometry {
        LinkGeometry::new(2.0, h_a, x_a).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        if a == b {
            0.0
        } else {
            ((a - b) / b).abs()
        }
    }

    /// Composite Simpson rule on a uniform grid, split at the given interior
    /// points. Independent of the adaptive Gauss–Kronrod path.
    fn simpson(f: impl Fn(f64) -> f64, edges: &[f64], panels: usize) -> f64 {
        edges
            .windows(2)
            .map(|w| {
                let h = (w[1] - w[0]) / panels as f64;
                let mut s = f(w[0]) + f(w[1]);
                for i in 1..panels {
                    let x = w[0] + h * i as f64;
                    s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
                }
                s * h / 3.0
            })
            .sum()
    }

    #[test]
    fn density_examples() {
        let f = forest(0.02, unif());
        let g = geom(100.0, 60.0);
        assert!((density_at(&f, &g, 0.0).unwrap() - 0.02 * 27.0 / 29.0).abs() < 1e-17);
        assert_eq!(density_at(&f, &g, 16.6).unwrap(), 0.0);
        assert_eq!(density_at(&f, &g, 60.0).unwrap(), 0.0);
        assert!(density_at(&f, &g, 61.0).is_err());
        let empty = forest(0.0, gauss());
        assert_eq!(density_at(&empty, &g, 5.0).unwrap(), 0.0);
    }

    #[test]
    fn ground_ground_examples() {
        // Reference values: mpmath evaluation of exp(-lambda0 (1 - F(h_g)) x_g).
        let r = p_los_ground_ground(&forest(0.02, unif()), 120.0, 2.0).unwrap();
        assert_eq!(r.method, LosMethod::Homogeneous);
        assert!(rel(r.p_los, 0.10704748492466768982) < 1e-13);
        assert!(rel(r.exponent, 0.02 * 27.0 / 29.0 * 120.0) < 1e-14);
        let r = p_los_ground_ground(&forest(0.02, gauss()), 120.0, 2.0).unwrap();
        assert!(rel(r.p_los, 0.094341128791284878843) < 1e-13);
        let r = p_los_ground_ground(&forest(0.02, unif()), 120.0, 29.0).unwrap();
        assert_eq!(r.p_los, 1.0);
        assert!(p_los_ground_ground(&forest(0.02, unif()), 0.0, 2.0).is_err());
    }

    #[test]
    fn gaussian_closed_form_scenario() {
        // mpmath quadrature of the blocker density: 0.21662326146003368603.
        let r = p_los_ground_air_gaussian(&forest(0.02, gauss()), &geom(100.0, 60.0)).unwrap();
        assert_eq!(r.method, LosMethod::ClosedFormGaussian);
        assert!(rel(r.exponent, 0.21662326146003368603) < 1e-12);
        assert!(rel(r.p_los, 0.80523327457621769269) < 1e-12);
    }

    #[test]
    fn gaussian_grid_matches_reference() {
        // mpmath values on the ground-air validation grid.
        let table = [
            (50.0, 20.0, 0.86294766327382816),
            (50.0, 60.0, 0.6426187177778289),
            (50.0, 100.0, 0.47854445178256652),
            (50.0, 200.0, 0.22900479233187714),
            (100.0, 20.0, 0.93033759454319617),
            (100.0, 100.0, 0.69695197774213212),
            (100.0, 200.0, 0.48574205927866943),
            (200.0, 20.0, 0.96489191288968006),
            (200.0, 60.0, 0.89833019856258798),
            (200.0, 100.0, 0.83636015067499684),
            (200.0, 200.0, 0.69949830163710342),
        ];
        let f = forest(0.02, gauss());
        for (h_a, x_a, want) in table {
            let got = p_los_ground_air_gaussian(&f, &geom(h_a, x_a))
                .unwrap()
                .p_los;
            assert!(
                rel(got, want) < 1e-12,
                "h_a={h_a} x_a={x_a}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn stable_form_equals_handbook_form() {
        for &(a, b, x_a) in &[
            (1.2, 0.115, 60.0),
            (0.3, 2.0, 1.0),
            (-0.5, 0.01, 300.0),
            (2.0, 0.5, 5.0),
        ] {
            let c = 0.7;
            let stable = gaussian_ramp_exponent(a, b, c, x_a);
            let literal = c * (x_a + erf_ramp_integral(a, b, x_a));
            assert!(rel(stable, literal) < 1e-11, "{stable} vs {literal}");
        }
    }

    #[test]
    fn gaussian_closed_form_matches_simpson_oracle() {
        let f = forest(0.05, gauss());
        for &(h_a, x_a) in &[(10.0, 3.0), (37.0, 250.0), (500.0, 1.0), (120.0, 80.0)] {
            let g = geom(h_a, x_a);
            let oracle = simpson(|x| density_at(&f, &g, x).unwrap(), &[0.0, x_a], 20_000);
            let cf = p_los_ground_air_gaussian(&f, &g).unwrap().exponent;
            assert!(
                rel(cf, oracle) < 1e-11,
                "h_a={h_a} x_a={x_a}: {cf} vs {oracle}"
            );
        }
    }

    #[test]
    fn uniform_closed_form_scenario() {
        let r = p_los_ground_air_uniform(&forest(0.02, unif()), &geom(100.0, 60.0)).unwrap();
        assert_eq!(r.method, LosMethod::ClosedFormUniform);
        assert!(rel(r.exponent, 0.15390570021111893033) < 1e-13);
        assert!(rel(r.p_los, 0.8573528653937966529) < 1e-13);
    }

    #[test]
    fn uniform_closed_form_edge_cases() {
        let f = forest(0.02, unif());
        let r =
            p_los_ground_air_uniform(&f, &LinkGeometry::new(29.0, 100.0, 60.0).unwrap()).unwrap();
        assert_eq!((r.exponent, r.p_los), (0.0, 1.0));
        // x_c = 27 x_a >= x_a, so the whole span contributes.
        let g = geom(3.0, 40.0);
        let r = p_los_ground_air_uniform(&f, &g).unwrap();
        let m = 40.0;
        let expected = 0.02 * m * (1.0 - 2.0 / 29.0 - 1.0 / (2.0 * 40.0 * 29.0) * m);
        assert!(rel(r.exponent, expected) < 1e-14);
        let oracle = simpson(|x| density_at(&f, &g, x).unwrap(), &[0.0, 40.0], 100);
        assert!(rel(r.exponent, oracle) < 1e-12);
    }

    #[test]
    fn closed_forms_reject_wrong_inputs() {
        let gg = LinkGeometry::ground_ground(2.0, 60.0).unwrap();
        assert!(matches!(
            p_los_ground_air_gaussian(&forest(0.02, gauss()), &gg),
            Err(Error::DegenerateGeometry { .. })
        ));
        assert!(matches!(
            p_los_ground_air_uniform(&forest(0.02, unif()), &gg),
            Err(Error::DegenerateGeometry { .. })
        ));
        assert!(matches!(
            p_los_ground_air_gaussian(&forest(0.02, unif()), &geom(100.0, 60.0)),
            Err(Error::WrongDistribution { .. })
        ));
        assert!(matches!(
            p_los_ground_air_uniform(&forest(0.02, gauss()), &geom(100.0, 60.0)),
            Err(Error::WrongDistribution { .. })
        ));
    }

    #[test]
    fn zero_density_gives_certain_los() {
        for d in [gauss(), unif()] {
            let f = forest(0.0, d);
            assert_eq!(p_los(&f, &geom(100.0, 60.0)).unwrap().p_los, 1.0);
            assert_eq!(
                p_los_ground_air_quadrature(&f, &geom(100.0, 60.0), 1e-10)
                    .unwrap()
                    .p_los,
                1.0
            );
        }
    }

    #[test]
    fn quadrature_matches_closed_forms_on_scenario() {
        for d in [gauss(), unif()] {
            let f = forest(0.02, d);
            let g = geom(100.0, 60.0);
            let q = p_los_ground_air_quadrature(&f, &g, DEFAULT_QUAD_TOL).unwrap();
            let cf = p_los(&f, &g).unwrap();
            assert_eq!(q.method, LosMethod::Quadrature);
            assert!(rel(q.p_los, cf.p_los) < 1e-9);
        }
    }

    #[test]
    fn tabulated_uniform_matches_closed_form() {
        let points: Vec<(f64, f64)> = (0..=290)
            .map(|i| (i as f64 * 0.1, i as f64 / 290.0))
            .collect();
        let mut points = points;
        points.last_mut().unwrap().1 = 1.0;
        let table = forest(0.02, HeightDistribution::tabulated(&points).unwrap());
        let g = geom(100.0, 60.0);
        let q = p_los(&table, &g).unwrap();
        assert_eq!(q.method, LosMethod::Quadrature);
        let cf = p_los_ground_air_uniform(&forest(0.02, unif()), &g).unwrap();
        assert!(rel(q.p_los, cf.p_los) < 1e-6);
    }

    #[test]
    fn very_high_air_asset() {
        let f = forest(0.02, gauss());
        let low = p_los(&f, &geom(100.0, 60.0)).unwrap().p_los;
        let high = p_los(&f, &geom(1e6, 60.0)).unwrap();
        let q = p_los_ground_air_quadrature(&f, &geom(1e6, 60.0), 1e-10).unwrap();
        assert!(high.p_los >= low && high.p_los <= 1.0);
        assert!(
            rel(high.exponent, q.exponent) < 1e-9,
            "{} vs {}",
            high.exponent,
            q.exponent
        );
    }

    #[test]
    fn nearly_flat_link_approaches_homogeneous() {
        for d in [gauss(), unif()] {
            let f = forest(0.02, d);
            let flat = p_los_ground_ground(&f, 120.0, 2.0).unwrap();
            let near = p_los_ground_air_quadrature(
                &f,
                &LinkGeometry::new(2.0, 2.0 + 1e-9, 120.0).unwrap(),
                1e-10,
            )
            .unwrap();
            assert!(rel(near.p_los, flat.p_los) < 1e-8);
        }
    }

    #[test]
    fn quadrature_falls_back_for_flat_link() {
        let f = forest(0.02, gauss());
        let r = p_los_ground_air_quadrature(
            &f,
            &LinkGeometry::ground_ground(2.0, 120.0).unwrap(),
            1e-10,
        )
        .unwrap();
        assert_eq!(r.method, LosMethod::Homogeneous);
        assert!(p_los_ground_air_quadrature(&f, &geom(100.0, 60.0), 0.0).is_err());
    }

    proptest! {
        #[test]
        fn closed_forms_agree_with_quadrature(l0 in 0.001f64..0.1, hg in 0.0f64..5.0, ha in 10.0f64..500.0, xa in 1.0f64..500.0) {
            let g = LinkGeometry::new(hg, ha, xa).unwrap();
            for d in [gauss(), unif()] {
                let f = forest(l0, d);
                let cf = p_los(&f, &g).unwrap();
                let q = p_los_ground_air_quadrature(&f, &g, DEFAULT_QUAD_TOL).unwrap();
                prop_assert!(rel(cf.p_los, q.p_los) <= 1e-9);
                prop_assert!(cf.exponent >= 0.0);
                prop_assert_eq!(cf.p_los, (-cf.exponent).exp());
            }
        }

        #[test]
        fn los_decreases_with_distance(hg in 0.0f64..5.0, ha in 10.0f64..500.0, x1 in 1.0f64..500.0, x2 in 1.0f64..500.0) {
            let (lo, hi) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
            for d in [gauss(), unif()] {
                let f = forest(0.02, d);
                let near = p_los(&f, &LinkGeometry::new(hg, ha, lo).unwrap()).unwrap().p_los;
                let far = p_los(&f, &LinkGeometry::new(hg, ha, hi).unwrap()).unwrap().p_los;
                prop_assert!(far <= near * (1.0 + 1e-14));
            }
        }

        #[test]
        fn los_increases_with_altitude(hg in 0.0f64..5.0, a1 in 10.0f64..500.0, a2 in 10.0f64..500.0, xa in 1.0f64..500.0) {
            let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
            for d in [gauss(), unif()] {
                let f = forest(0.02, d);
                let low = p_los(&f, &LinkGeometry::new(hg, lo, xa).unwrap()).unwrap().p_los;
                let high = p_los(&f, &LinkGeometry::new(hg, hi, xa).unwrap()).unwrap().p_los;
                prop_assert!(high >= low * (1.0 - 1e-14));
            }
        }
    }
}
