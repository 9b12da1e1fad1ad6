//! Command-line front end. Every subcommand prints one `key=value` line,
//! except `sweep` (CSV) and `validate` (one line per check plus a summary).

pub mod config;
pub mod format;
pub mod sweep;
pub mod validate;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::geometry::LinkGeometry;
use crate::link::{throughput_direct, throughput_relayed};
use crate::los;
use crate::mc;
use crate::plan;

use config::{ConfigFile, RelayValue, ScenarioConfig, SweepSection};
use format::Precision;

#[derive(Debug, Parser)]
#[command(
    name = "forestlos",
    version,
    about = "Line-of-sight, throughput and relay planning in a Poisson forest"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// LoS probability between two ground assets `x_g` apart.
    LosGg(ScenarioArgs),
    /// LoS probability from a ground asset to an air asset `x_a` away.
    LosGa(ScenarioArgs),
    /// Direct and relayed expected throughput.
    Throughput(ScenarioArgs),
    /// Relay altitude maximizing relayed throughput (relay at the midpoint).
    OptimizeHeight {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Separation where the altitude-optimized relay overtakes the direct link.
    Crossover {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Lower end of the separation bracket, m.
        #[arg(long, default_value_t = plan::DEFAULT_X_RANGE.0)]
        xlo: f64,
        /// Upper end of the separation bracket, m.
        #[arg(long, default_value_t = plan::DEFAULT_X_RANGE.1)]
        xhi: f64,
    },
    /// Monte Carlo LoS estimate next to the analytic value.
    Montecarlo {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_enum, default_value_t = McLink::Ga)]
        link: McLink,
    },
    /// Tabulate LoS and throughput over one variable as CSV.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_parser = ["x_g", "x_a", "h_a"])]
        var: Option<String>,
        #[arg(long)]
        start: Option<f64>,
        #[arg(long)]
        stop: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        /// Add Monte Carlo estimates of the ground-air LoS.
        #[arg(long)]
        mc: bool,
        /// Use the throughput-optimal altitude at every row.
        #[arg(long)]
        optimize: bool,
        /// CSV destination; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check closed forms against quadrature and Monte Carlo, and report planner results.
    Validate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_delimiter = ',', default_values_t = validate::DEFAULT_GRID_XA)]
        grid_xa: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = validate::DEFAULT_GRID_HA)]
        grid_ha: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum McLink {
    /// Ground to air over `x_a`.
    Ga,
    /// Ground to ground over `x_g`.
    Gg,
    /// Both relay hops.
    Relayed,
}

#[derive(Debug, Args)]
struct SearchArgs {
    /// Lowest relay altitude searched, m [default: h_g + 1].
    #[arg(long)]
    hlo: Option<f64>,
    /// Highest relay altitude searched, m.
    #[arg(long, default_value_t = plan::DEFAULT_H_MAX)]
    hhi: f64,
    /// Solver tolerance, m.
    #[arg(long, default_value_t = plan::DEFAULT_TOL)]
    tol: f64,
}

impl SearchArgs {
    fn h_range(&self, h_g: f64) -> (f64, f64) {
        (self.hlo.unwrap_or(plan::default_h_range(h_g).0), self.hhi)
    }
}

/// Scenario flags shared by every subcommand. Flags override `--config`.
#[derive(Debug, Args)]
struct ScenarioArgs {
    /// Scenario file with [forest], [geometry], [budget], [mc] and [sweep] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Obstacles per meter along the link.
    #[arg(long, allow_negative_numbers = true)]
    lambda0: Option<f64>,
    #[arg(long, value_parser = ["gaussian", "uniform", "tabulated"])]
    dist: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    sigma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    hmax: Option<f64>,
    /// Ground asset height, m.
    #[arg(long, allow_negative_numbers = true)]
    hg: Option<f64>,
    /// Air asset height, m.
    #[arg(long, allow_negative_numbers = true)]
    ha: Option<f64>,
    /// Ground separation, m.
    #[arg(long, allow_negative_numbers = true)]
    xg: Option<f64>,
    /// Horizontal ground-to-relay distance in m, or `midpoint`.
    #[arg(long)]
    xa: Option<String>,
    /// SNR at the reference distance, dB.
    #[arg(long, allow_negative_numbers = true)]
    snr0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Hz.
    #[arg(long, allow_negative_numbers = true)]
    bandwidth: Option<f64>,
    /// Reference distance, m.
    #[arg(long, allow_negative_numbers = true)]
    d0: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo threads; 0 uses all cores. Results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum, default_value_t)]
    precision: Precision,
}

fn set<T>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}

impl ScenarioArgs {
    fn file(&self) -> Result<ConfigFile> {
        let mut f = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        set(&mut f.forest.lambda0, self.lambda0);
        set(&mut f.forest.dist, self.dist.clone());
        set(&mut f.forest.mu, self.mu);
        set(&mut f.forest.sigma, self.sigma);
        set(&mut f.forest.h_max, self.hmax);
        set(&mut f.geometry.h_g, self.hg);
        set(&mut f.geometry.h_a, self.ha);
        set(&mut f.geometry.x_g, self.xg);
        if let Some(xa) = &self.xa {
            f.geometry.x_a = Some(match xa.parse::<f64>() {
                Ok(x) => RelayValue::Meters(x),
                Err(_) => RelayValue::Word(xa.clone()),
            });
        }
        set(&mut f.budget.snr0_db, self.snr0);
        set(&mut f.budget.alpha, self.alpha);
        set(&mut f.budget.bandwidth_hz, self.bandwidth);
        set(&mut f.budget.d0, self.d0);
        set(&mut f.mc.trials, self.trials);
        set(&mut f.mc.seed, self.seed);
        set(&mut f.mc.workers, self.workers);
        Ok(f)
    }

    fn resolve(&self) -> Result<ScenarioConfig> {
        self.file()?.resolve()
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(
        argv,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}

/// [`run`] with explicit output and diagnostic streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(rendered.as_bytes())
            } else {
                out.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

/// Returns `Ok(false)` when a validation check failed.
fn execute(command: Command, out: &mut dyn Write) -> Result<bool> {
    match command {
        Command::LosGg(s) => {
            let c = s.resolve()?;
            let r = los::p_los_ground_ground(&c.forest()?, c.x_g, c.h_g)?;
            let p = s.precision;
            writeln!(
                out,
                "p_los={} exponent={} method={}",
                p.prob(r.p_los),
                p.num(r.exponent),
                r.method
            )?;
        }
        Command::LosGa(s) => {
            let c = s.resolve()?;
            let geom = LinkGeometry::new(c.h_g, c.h_a, c.relay_x())?;
            let r = los::p_los(&c.forest()?, &geom)?;
            let p = s.precision;
            writeln!(
                out,
                "p_los={} exponent={} method={}",
                p.prob(r.p_los),
                p.num(r.exponent),
                r.method
            )?;
        }
        Command::Throughput(s) => {
            let c = s.resolve()?;
            let forest = c.forest()?;
            let d = throughput_direct(&forest, &c.budget, c.x_g, c.h_g)?;
            let r = throughput_relayed(&forest, &c.budget, c.x_g, c.h_g, c.h_a, c.relay_x())?;
            let p = s.precision;
            writeln!(
                out,
                "p_los_direct={} p_los_relayed={} capacity_mbps={} throughput_direct_mbps={} throughput_relayed_mbps={}",
                p.prob(d.p_los_end_to_end),
                p.prob(r.p_los_end_to_end),
                p.mbps(d.capacity_bps),
                p.mbps(d.throughput_bps),
                p.mbps(r.throughput_bps),
            )?;
        }
        Command::OptimizeHeight {
            scenario: s,
            search,
        } => {
            let c = s.resolve()?;
            let r = plan::optimize_altitude(
                &c.forest()?,
                &c.budget,
                c.x_g,
                c.h_g,
                search.h_range(c.h_g),
                search.tol,
            )?;
            let p = s.precision;
            writeln!(
                out,
                "h_a_opt={} throughput_mbps={} bracket_lo={} bracket_hi={} iterations={}",
                p.num(r.optimum),
                p.mbps(r.objective_at_optimum),
                p.num(r.bracket.0),
                p.num(r.bracket.1),
                r.iterations,
            )?;
        }
        Command::Crossover {
            scenario: s,
            search,
            xlo,
            xhi,
        } => {
            let c = s.resolve()?;
            let r = plan::crossover_distance(
                &c.forest()?,
                &c.budget,
                c.h_g,
                search.h_range(c.h_g),
                (xlo, xhi),
                search.tol,
            )?;
            let p = s.precision;
            writeln!(
                out,
                "x_g_cross={} throughput_mbps={} bracket_lo={} bracket_hi={} iterations={}",
                p.num(r.optimum),
                p.mbps(r.objective_at_optimum),
                p.num(r.bracket.0),
                p.num(r.bracket.1),
                r.iterations,
            )?;
        }
        Command::Montecarlo { scenario: s, link } => {
            let c = s.resolve()?;
            let forest = c.forest()?;
            let (est, analytic, name) = match link {
                McLink::Ga => {
                    let g = LinkGeometry::new(c.h_g, c.h_a, c.relay_x())?;
                    (
                        mc::simulate_los(&forest, &g, &c.mc)?,
                        los::p_los(&forest, &g)?.p_los,
                        "ga",
                    )
                }
                McLink::Gg => {
                    let g = LinkGeometry::ground_ground(c.h_g, c.x_g)?;
                    (
                        mc::simulate_los(&forest, &g, &c.mc)?,
                        los::p_los(&forest, &g)?.p_los,
                        "gg",
                    )
                }
                McLink::Relayed => {
                    let x_a = c.relay_x();
                    if !(x_a < c.x_g) {
                        return Err(Error::invalid(
                            "geometry.x_a",
                            format!("must be < x_g = {}", c.x_g),
                        ));
                    }
                    let up = LinkGeometry::new(c.h_g, c.h_a, x_a)?;
                    let down = LinkGeometry::new(c.h_g, c.h_a, c.x_g - x_a)?;
                    let p = los::p_los(&forest, &up)?.p_los * los::p_los(&forest, &down)?.p_los;
                    (
                        mc::simulate_relayed_los(&forest, &up, &down, &c.mc)?,
                        p,
                        "relayed",
                    )
                }
            };
            let p = s.precision;
            let z = if est.std_err > 0.0 {
                (est.p_hat - analytic) / est.std_err
            } else {
                0.0
            };
            writeln!(
                out,
                "link={name} p_hat={} std_err={} trials={} blocked={} p_los={} z={}",
                p.prob(est.p_hat),
                p.prob(est.std_err),
                est.trials,
                est.blocked_count,
                p.prob(analytic),
                p.num(z),
            )?;
        }
        Command::Sweep {
            scenario: s,
            var,
            start,
            stop,
            step,
            mc,
            optimize,
            out: path,
        } => {
            let mut file = s.file()?;
            let flags_given = var.is_some()
                || start.is_some()
                || stop.is_some()
                || step.is_some()
                || mc
                || optimize;
            if flags_given || file.sweep.is_none() {
                let sec = file.sweep.get_or_insert_with(SweepSection::default);
                set(&mut sec.variable, var);
                set(&mut sec.start, start);
                set(&mut sec.stop, stop);
                set(&mut sec.step, step);
                if mc {
                    sec.mc = Some(true);
                }
                if optimize {
                    sec.optimize_altitude = Some(true);
                }
            }
            let c = file.resolve()?;
            let spec = c
                .sweep
                .ok_or_else(|| Error::invalid("sweep", "no sweep configured"))?;
            let rows = sweep::run_sweep(&c)?;
            match path {
                Some(path) => {
                    let f = std::fs::File::create(&path)
                        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                    sweep::write_csv(std::io::BufWriter::new(f), spec.variable, &rows, spec.mc)?;
                    writeln!(out, "rows={} out={}", rows.len(), path.display())?;
                }
                None => sweep::write_csv(&mut *out, spec.variable, &rows, spec.mc)?,
            }
        }
        Command::Validate {
            scenario: s,
            grid_xa,
            grid_ha,
        } => return run_validate(&s, &grid_xa, &grid_ha, out),
    }
    Ok(true)
}

fn run_validate(
    s: &ScenarioArgs,
    grid_xa: &[f64],
    grid_ha: &[f64],
    out: &mut dyn Write,
) -> Result<bool> {
    let c = s.resolve()?;
    let forest = c.forest()?;
    let p = s.precision;
    let points = validate::validate(&forest, c.h_g, grid_xa, grid_ha, &c.mc)?;
    for pt in &points {
        writeln!(
            out,
            "check x_a={} h_a={} closed_form={} quadrature={} rel_err={:.2e} mc_p_hat={} mc_std_err={} z={:.2} status={}",
            p.num(pt.x_a),
            p.num(pt.h_a),
            p.prob(pt.closed_form),
            p.prob(pt.quadrature),
            pt.rel_err,
            p.prob(pt.mc.p_hat),
            p.prob(pt.mc.std_err),
            pt.z(),
            if pt.passed() { "PASS" } else { "FAIL" },
        )?;
    }

    let (peaks, crossover) = validate::planner_report(&forest, &c.budget, c.h_g);
    for pk in &peaks {
        match &pk.result {
            Ok(r) => writeln!(
                out,
                "peak x_g={} h_a_opt={} throughput_mbps={} reference_h_a={} reference_mbps={}",
                p.num(pk.x_g),
                p.num(r.optimum),
                p.mbps(r.objective_at_optimum),
                pk.reference_h_a,
                pk.reference_mbps,
            )?,
            Err(e) => writeln!(out, "peak x_g={} error=\"{e}\"", p.num(pk.x_g))?,
        }
    }
    let (ref_x, ref_mbps) = validate::REFERENCE_CROSSOVER;
    match crossover {
        Ok(r) => writeln!(
            out,
            "crossover x_g={} throughput_mbps={} reference_x_g={ref_x} reference_mbps={ref_mbps}",
            p.num(r.optimum),
            p.mbps(r.objective_at_optimum),
        )?,
        Err(e) => writeln!(out, "crossover error=\"{e}\"")?,
    }

    let passed = points.iter().filter(|pt| pt.passed()).count();
    let ok = passed == points.len();
    writeln!(
        out,
        "summary checks={} passed={passed} status={}",
        points.len(),
        if ok { "PASS" } else { "FAIL" }
    )?;
    Ok(ok)
}
