//! Scenario configuration: a sectioned TOML file merged with command-line
//! overrides and resolved against the reference scenario defaults.

use serde::{Deserialize, Serialize};

use crate::dist::HeightDistribution;
use crate::error::{Error, Result};
use crate::geometry::ForestModel;
use crate::link::LinkBudget;
use crate::mc::McConfig;

/// Height law as written in a config file.
#[derive(Debug, Clone, PartialEq)]
pub enum DistSpec {
    Gaussian { mu: f64, sigma: f64 },
    Uniform { h_max: f64 },
    Tabulated(Vec<(f64, f64)>),
}

impl DistSpec {
    pub fn build(&self) -> Result<HeightDistribution> {
        match self {
            DistSpec::Gaussian { mu, sigma } => HeightDistribution::truncated_gaussian(*mu, *sigma),
            DistSpec::Uniform { h_max } => HeightDistribution::uniform(*h_max),
            DistSpec::Tabulated(points) => HeightDistribution::tabulated(points),
        }
    }
}

/// Horizontal relay position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelayPosition {
    Midpoint,
    At(f64),
}

impl RelayPosition {
    pub fn resolve(self, x_g: f64) -> f64 {
        match self {
            RelayPosition::Midpoint => 0.5 * x_g,
            RelayPosition::At(x) => x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    XG,
    XA,
    HA,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::XG => "x_g",
            SweepVar::XA => "x_a",
            SweepVar::HA => "h_a",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "x_g" => Ok(SweepVar::XG),
            "x_a" => Ok(SweepVar::XA),
            "h_a" => Ok(SweepVar::HA),
            other => Err(Error::invalid(
                "sweep.variable",
                format!("expected x_g, x_a or h_a, got {other:?}"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVar,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    /// Replace the configured relay altitude by the throughput-optimal one at every row.
    pub optimize_altitude: bool,
    /// Add Monte Carlo columns.
    pub mc: bool,
}

impl SweepSpec {
    /// Sweep values `start + i * step` up to `stop`.
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step * (1.0 + 1e-12)).floor() as usize;
        (0..=n).map(|i| self.start + self.step * i as f64).collect()
    }
}

/// A fully resolved scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub lambda0: f64,
    pub dist: DistSpec,
    pub h_g: f64,
    pub h_a: f64,
    pub x_g: f64,
    pub x_a: RelayPosition,
    pub budget: LinkBudget,
    pub mc: McConfig,
    pub sweep: Option<SweepSpec>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ConfigFile::default().resolve().expect("defaults are valid")
    }
}

impl ScenarioConfig {
    pub fn forest(&self) -> Result<ForestModel> {
        ForestModel::new(self.lambda0, self.dist.build()?)
    }

    pub fn relay_x(&self) -> f64 {
        self.x_a.resolve(self.x_g)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        ConfigFile::from_toml(text)?.resolve()
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(&ConfigFile::from(self)).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// On-disk layout. Every key is optional; missing keys take scenario defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub forest: ForestSection,
    #[serde(default)]
    pub geometry: GeometrySection,
    #[serde(default)]
    pub budget: BudgetSection,
    #[serde(default)]
    pub mc: McSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestSection {
    pub lambda0: Option<f64>,
    pub dist: Option<String>,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub h_max: Option<f64>,
    pub table_h: Option<Vec<f64>>,
    pub table_f: Option<Vec<f64>>,
}

/// `x_a` is either a number of meters or the word `midpoint`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RelayValue {
    Meters(f64),
    Word(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub h_g: Option<f64>,
    pub h_a: Option<f64>,
    pub x_g: Option<f64>,
    pub x_a: Option<RelayValue>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSection {
    pub snr0_db: Option<f64>,
    pub alpha: Option<f64>,
    pub bandwidth_hz: Option<f64>,
    pub d0: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: Option<String>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub step: Option<f64>,
    pub optimize_altitude: Option<bool>,
    pub mc: Option<bool>,
}

fn positive(field: &'static str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::invalid(field, format!("must be > 0, got {v}")))
    }
}

fn finite(field: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::invalid(field, format!("must be finite, got {v}")))
    }
}

impl ConfigFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let Some(span) = e.span() else {
                return Error::Parse(format!("malformed config: {}", e.message()));
            };
            let line_no = text[..span.start].matches('\n').count() + 1;
            let line = text.lines().nth(line_no - 1).unwrap_or("").trim();
            Error::Parse(format!(
                "malformed config at line {line_no} `{line}`: {}",
                e.message()
            ))
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn resolve(&self) -> Result<ScenarioConfig> {
        let f = &self.forest;
        let lambda0 = f.lambda0.unwrap_or(0.02);
        if !(lambda0 >= 0.0 && lambda0.is_finite()) {
            return Err(Error::invalid(
                "forest.lambda0",
                format!("must be >= 0, got {lambda0}"),
            ));
        }
        let dist = match f.dist.as_deref().unwrap_or("gaussian") {
            "gaussian" => DistSpec::Gaussian {
                mu: finite("forest.mu", f.mu.unwrap_or(19.0))?,
                sigma: positive("forest.sigma", f.sigma.unwrap_or(10.0))?,
            },
            "uniform" => DistSpec::Uniform {
                h_max: positive("forest.h_max", f.h_max.unwrap_or(29.0))?,
            },
            "tabulated" => {
                let (Some(h), Some(p)) = (&f.table_h, &f.table_f) else {
                    return Err(Error::invalid(
                        "forest.table_h",
                        "tabulated heights need table_h and table_f",
                    ));
                };
                if h.len() != p.len() {
                    return Err(Error::invalid(
                        "forest.table_f",
                        format!("has {} entries but table_h has {}", p.len(), h.len()),
                    ));
                }
                DistSpec::Tabulated(h.iter().copied().zip(p.iter().copied()).collect())
            }
            other => {
                return Err(Error::invalid(
                    "forest.dist",
                    format!("expected gaussian, uniform or tabulated, got {other:?}"),
                ))
            }
        };
        // Surface height-law errors here rather than at first use.
        dist.build()?;

        let g = &self.geometry;
        let h_g = g.h_g.unwrap_or(2.0);
        if !(h_g >= 0.0 && h_g.is_finite()) {
            return Err(Error::invalid(
                "geometry.h_g",
                format!("must be >= 0, got {h_g}"),
            ));
        }
        let h_a = finite("geometry.h_a", g.h_a.unwrap_or(100.0))?;
        if h_a < h_g {
            return Err(Error::invalid(
                "geometry.h_a",
                format!("must be >= h_g = {h_g}, got {h_a}"),
            ));
        }
        let x_g = positive("geometry.x_g", g.x_g.unwrap_or(120.0))?;
        let x_a = match &g.x_a {
            None => RelayPosition::Midpoint,
            Some(RelayValue::Word(w)) if w == "midpoint" => RelayPosition::Midpoint,
            Some(RelayValue::Word(w)) => {
                return Err(Error::invalid(
                    "geometry.x_a",
                    format!("expected meters or \"midpoint\", got {w:?}"),
                ))
            }
            Some(RelayValue::Meters(x)) => RelayPosition::At(positive("geometry.x_a", *x)?),
        };

        let b = &self.budget;
        let defaults = LinkBudget::default();
        let budget = LinkBudget::new(
            b.snr0_db.unwrap_or(defaults.snr0_db()),
            b.alpha.unwrap_or(defaults.alpha()),
            b.bandwidth_hz.unwrap_or(defaults.bandwidth_hz()),
            b.d0.unwrap_or(defaults.d0()),
        )?;

        let m = &self.mc;
        let mc_defaults = McConfig::default();
        let mc = McConfig::new(
            m.trials.unwrap_or(mc_defaults.trials),
            m.seed.unwrap_or(mc_defaults.seed),
            m.workers.unwrap_or(mc_defaults.workers),
        )
        .map_err(|_| Error::invalid("mc.trials", "must be >= 1"))?;

        let sweep = self.sweep.as_ref().map(resolve_sweep).transpose()?;

        Ok(ScenarioConfig {
            lambda0,
            dist,
            h_g,
            h_a,
            x_g,
            x_a,
            budget,
            mc,
            sweep,
        })
    }
}

fn resolve_sweep(s: &SweepSection) -> Result<SweepSpec> {
    let variable = SweepVar::parse(
        s.variable
            .as_deref()
            .ok_or_else(|| Error::invalid("sweep.variable", "missing"))?,
    )?;
    let start = finite(
        "sweep.start",
        s.start
            .ok_or_else(|| Error::invalid("sweep.start", "missing"))?,
    )?;
    let stop = finite(
        "sweep.stop",
        s.stop
            .ok_or_else(|| Error::invalid("sweep.stop", "missing"))?,
    )?;
    let step = positive(
        "sweep.step",
        s.step
            .ok_or_else(|| Error::invalid("sweep.step", "missing"))?,
    )?;
    if !(start < stop) {
        return Err(Error::invalid(
            "sweep.stop",
            format!("must exceed start = {start}, got {stop}"),
        ));
    }
    Ok(SweepSpec {
        variable,
        start,
        stop,
        step,
        optimize_altitude: s.optimize_altitude.unwrap_or(false),
        mc: s.mc.unwrap_or(false),
    })
}

impl From<&ScenarioConfig> for ConfigFile {
    fn from(c: &ScenarioConfig) -> Self {
        let mut forest = ForestSection {
            lambda0: Some(c.lambda0),
            ..Default::default()
        };
        match &c.dist {
            DistSpec::Gaussian { mu, sigma } => {
                forest.dist = Some("gaussian".into());
                forest.mu = Some(*mu);
                forest.sigma = Some(*sigma);
            }
            DistSpec::Uniform { h_max } => {
                forest.dist = Some("uniform".into());
                forest.h_max = Some(*h_max);
            }
            DistSpec::Tabulated(points) => {
                forest.dist = Some("tabulated".into());
                forest.table_h = Some(points.iter().map(|p| p.0).collect());
                forest.table_f = Some(points.iter().map(|p| p.1).collect());
            }
        }
        ConfigFile {
            forest,
            geometry: GeometrySection {
                h_g: Some(c.h_g),
                h_a: Some(c.h_a),
                x_g: Some(c.x_g),
                x_a: Some(match c.x_a {
                    RelayPosition::Midpoint => RelayValue::Word("midpoint".into()),
                    RelayPosition::At(x) => RelayValue::Meters(x),
                }),
            },
            budget: BudgetSection {
                snr0_db: Some(c.budget.snr0_db()),
                alpha: Some(c.budget.alpha()),
                bandwidth_hz: Some(c.budget.bandwidth_hz()),
                d0: Some(c.budget.d0()),
            },
            mc: McSection {
                trials: Some(c.mc.trials),
                seed: Some(c.mc.seed),
                workers: Some(c.mc.workers),
            },
            sweep: c.sweep.map(|s| SweepSection {
                variable: Some(s.variable.name().into()),
                start: Some(s.start),
                stop: Some(s.stop),
                step: Some(s.step),
                optimize_altitude: Some(s.optimize_altitude),
                mc: Some(s.mc),
            }),
        }
    }
}
