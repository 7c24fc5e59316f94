use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use fraclangevin::analysis::{check_conditions, spot_check_growth, spot_check_lipschitz};
use fraclangevin::kernels::{HVolterraForm, OrderParams};
use fraclangevin::oracle::{
    closed_form_constant_forcing, dense_reference, manufactured_poly, merged_order_forcing,
};
use fraclangevin::solver::{
    picard_solve, Discretization, Grid, ProblemSpec, SolutionField, SolveReport,
};

use crate::config::{ConfigError, RunConfig};
use crate::expr::{Expr, ExprForcing};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    InputError = 1,
    ConditionFails = 2,
    NotConverged = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Numerics(#[from] fraclangevin::Error),
}

impl CliError {
    pub fn exit_status(&self) -> ExitStatus {
        match self {
            CliError::Numerics(fraclangevin::Error::Divergence { .. })
            | CliError::Numerics(fraclangevin::Error::NotConverged { .. }) => {
                ExitStatus::NotConverged
            }
            _ => ExitStatus::InputError,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Command-line values that replace the config's solver settings.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub n_panels: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<(), CliError> {
        if let Some(n) = self.n_panels {
            Grid::new(n)?;
            cfg.n_panels = n;
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(CliError::Usage(format!(
                    "--tol must be positive, got {tol}"
                )));
            }
            cfg.tol = tol;
        }
        if let Some(m) = self.max_iter {
            if m == 0 {
                return Err(CliError::Usage("--max-iter must be at least 1".into()));
            }
            cfg.max_iter = m;
        }
        Ok(())
    }
}

/// Which hypothesis `check` must confirm for a zero exit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Requirement {
    /// Every condition the config supplies data for.
    #[default]
    All,
    Any,
    Existence,
    Uniqueness,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| v.to_string())
}

fn flag(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "true",
        Some(false) => "false",
        None => "n/a",
    }
}

const SPOT_SAMPLES: usize = 2000;
const SPOT_STATE_BOUND: f64 = 10.0;

pub fn check(
    cfg: &RunConfig,
    require: Requirement,
    out: &mut dyn Write,
) -> Result<ExitStatus, CliError> {
    let report = check_conditions(&cfg.orders, cfg.growth.as_ref(), cfg.lipschitz.as_ref());
    let o = &cfg.orders;
    let c = &report.constants;
    let mut lines = vec![
        format!("alpha = {}", o.alpha()),
        format!("beta = {}", o.beta()),
        format!("gamma = {}", o.gamma()),
        format!("forcing = {}", cfg.forcing_source),
    ];
    let f = |t: f64, x: f64, dx: f64| cfg.forcing.eval(t, x, dx);
    if let Some(g) = &cfg.growth {
        lines.push(format!("sigma_bound = {}", g.sigma_bound));
        lines.push(format!("a1 = {}", g.a1));
        lines.push(format!("a2 = {}", g.a2));
        lines.push(format!("tau1 = {}", g.tau1));
        lines.push(format!("tau2 = {}", g.tau2));
        let spot = spot_check_growth(f, g, SPOT_STATE_BOUND, SPOT_SAMPLES, 0);
        lines.push(format!(
            "growth_spot_check = {} (worst ratio {})",
            if spot.violated { "violated" } else { "ok" },
            spot.worst_ratio
        ));
    }
    if let Some(l) = &cfg.lipschitz {
        lines.push(format!("lipschitz_w = {}", l.w));
        let spot = spot_check_lipschitz(f, l, SPOT_STATE_BOUND, SPOT_SAMPLES, 0);
        lines.push(format!(
            "lipschitz_spot_check = {} (worst ratio {})",
            if spot.violated { "violated" } else { "ok" },
            spot.worst_ratio
        ));
    }
    lines.extend([
        format!("k1 = {}", c.k1),
        format!("k2 = {}", c.k2),
        format!("k = {}", c.k),
        format!("l1 = {}", c.l1),
        format!("l2 = {}", c.l2),
        format!("l = {}", c.l),
        format!("psi1 = {}", opt(report.psi.map(|p| p.psi1))),
        format!("psi2 = {}", opt(report.psi.map(|p| p.psi2))),
        format!("psi = {}", opt(report.psi.map(|p| p.psi))),
        format!("radius = {}", opt(report.radius)),
        format!("existence_ok = {}", flag(report.existence_ok)),
        format!("uniqueness_ok = {}", flag(report.uniqueness_ok)),
    ]);
    for note in &report.notes {
        lines.push(format!("note = {note}"));
    }
    for line in lines {
        writeln!(out, "{line}").map_err(io_err(Path::new("<stdout>")))?;
    }

    let flags = [report.existence_ok, report.uniqueness_ok];
    let holds = match require {
        Requirement::All | Requirement::Any if flags.iter().all(Option::is_none) => {
            return Err(CliError::Usage(
                "config has neither a growth bound nor a Lipschitz constant to check".into(),
            ))
        }
        Requirement::All => flags.iter().flatten().all(|&b| b),
        Requirement::Any => flags.iter().flatten().any(|&b| b),
        Requirement::Existence => report.existence_ok.ok_or_else(|| {
            CliError::Usage("existence check needs sigma_bound, a1, a2, tau1 and tau2".into())
        })?,
        Requirement::Uniqueness => report
            .uniqueness_ok
            .ok_or_else(|| CliError::Usage("uniqueness check needs lipschitz_w".into()))?,
    };
    Ok(if holds {
        ExitStatus::Success
    } else {
        ExitStatus::ConditionFails
    })
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_solution_csv(path: &Path, grid: &Grid, z: &SolutionField) -> Result<(), CliError> {
    let mut s = String::from("t,x,dx\n");
    for (i, t) in grid.nodes().enumerate() {
        s.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(t),
            fmt_f64(z.x[i]),
            fmt_f64(z.dx[i])
        ));
    }
    write_file(path, &s)
}

pub fn write_convergence_csv(path: &Path, report: &SolveReport) -> Result<(), CliError> {
    let mut s = String::from("iteration,update_norm,contraction_factor\n");
    for (k, u) in report.update_norms.iter().enumerate() {
        let factor = k
            .checked_sub(1)
            .and_then(|i| report.contraction_factors.get(i))
            .map(|f| fmt_f64(*f))
            .unwrap_or_default();
        s.push_str(&format!("{},{},{}\n", k + 1, fmt_f64(*u), factor));
    }
    write_file(path, &s)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, contents).map_err(io_err(path))
}

pub fn solve(cfg: &RunConfig, out: &mut dyn Write) -> Result<ExitStatus, CliError> {
    let grid = Grid::new(cfg.n_panels)?;
    let p = cfg.problem();
    let (z, report) = picard_solve(&p, &grid, cfg.tol, cfg.max_iter)?;
    write_solution_csv(&cfg.solution_csv, &grid, &z)?;
    write_convergence_csv(&cfg.convergence_csv, &report)?;
    let text = format!(
        "converged = {}\niterations = {}\nfinal_update = {}\nresidual = {}\nc1_norm = {}\n\
         n_panels = {}\ntol = {:e}\nmax_iter = {}\n",
        report.converged,
        report.iterations,
        fmt_f64(report.final_update),
        fmt_f64(report.residual),
        fmt_f64(z.c1_norm()),
        cfg.n_panels,
        cfg.tol,
        cfg.max_iter,
    );
    write_file(&cfg.report, &text)?;
    out.write_all(text.as_bytes())
        .map_err(io_err(Path::new("<stdout>")))?;
    Ok(if report.converged {
        ExitStatus::Success
    } else {
        ExitStatus::NotConverged
    })
}

/// Settings for the built-in verification suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub h_volterra_form: HVolterraForm,
    pub closed_form_panels: usize,
    pub closed_form_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            h_volterra_form: HVolterraForm::Derived,
            closed_form_panels: 256,
            closed_form_tol: 1e-3,
        }
    }
}

/// Outcome of one verification check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub value: f64,
    pub limit: f64,
    /// The value must reach the limit rather than stay below it.
    pub at_least: bool,
    pub passed: bool,
    pub seconds: f64,
}

/// Orders used by the manufactured-solution checks; `α + β < 3` keeps the
/// manufactured forcing integrable.
pub const MANUFACTURED_ORDERS: (f64, f64, f64) = (0.5, 2.25, 0.2);

pub const EXAMPLE_FORCING: &str = "arctan(t) + (t - 1/3)^2 * pow(x, 1/2) + (t/e) * pow(dx, 1/2)";

pub fn example_problem() -> ProblemSpec {
    let expr = Expr::parse(EXAMPLE_FORCING).expect("built-in forcing parses");
    ProblemSpec::new(
        OrderParams::new(0.5, 2.5, 0.2).expect("valid orders"),
        ExprForcing(expr),
    )
}

fn timed(
    name: &'static str,
    limit: f64,
    at_least: bool,
    f: impl FnOnce() -> Result<f64, fraclangevin::Error>,
) -> CheckResult {
    let start = Instant::now();
    let value = f().unwrap_or(f64::NAN);
    let passed = if at_least {
        value >= limit
    } else {
        value <= limit
    };
    CheckResult {
        name,
        value,
        limit,
        at_least,
        passed,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_verification(opts: &VerifyOptions) -> Vec<CheckResult> {
    let (a, b, g) = MANUFACTURED_ORDERS;
    let form = opts.h_volterra_form;
    let mut results = Vec::new();

    results.push(timed(
        "manufactured round trip (n=256)",
        5e-3,
        false,
        || {
            let case = manufactured_poly(OrderParams::new(a, b, g)?)?;
            let grid = Grid::new(256)?;
            let exact = case.exact_field(&grid);
            let image = Discretization::new(&case.problem(), grid, form)?.apply(&exact)?;
            Ok(image.c1_distance(&exact))
        },
    ));

    results.push(timed(
        "manufactured solve error (n=256)",
        5e-3,
        false,
        || {
            let case = manufactured_poly(OrderParams::new(a, b, g)?)?;
            let grid = Grid::new(256)?;
            let (z, _) = Discretization::new(&case.problem(), grid, form)?.solve(1e-10, 200)?;
            Ok(z.c1_distance(&case.exact_field(&grid)))
        },
    ));

    results.push(timed(
        "constant forcing vs closed form",
        opts.closed_form_tol,
        false,
        || {
            let orders = OrderParams::new(0.5, 2.5, 0.0)?;
            let cf = closed_form_constant_forcing(orders)?;
            let d = cf.derivative();
            let grid = Grid::new(opts.closed_form_panels)?;
            let p = ProblemSpec::new(orders, |_t, _x, _dx| 1.0);
            let (z, _) = Discretization::new(&p, grid, form)?.solve(1e-12, 10)?;
            Ok(z.c1_distance(&SolutionField::from_fn(
                &grid,
                |t| cf.eval(t),
                |t| d.eval(t),
            )))
        },
    ));

    results.push(timed(
        "composed vs merged orders gap at t=1/2",
        1e-2,
        true,
        || {
            let orders = OrderParams::new(a, b, 0.0)?;
            let composed = manufactured_poly(orders)?.f_of_t;
            let merged = merged_order_forcing(orders)?;
            Ok((composed.eval(0.5) - merged.eval(0.5)).abs())
        },
    ));

    results.push(timed(
        "worked example self-convergence (512 vs 1024)",
        1e-3,
        false,
        || {
            let p = example_problem();
            let fine = dense_reference(&p, 1024)?;
            let mid = dense_reference(&p, 512)?;
            Ok(mid.c1_distance(&fine.interpolate_to(&Grid::new(512)?)))
        },
    ));

    results
}

pub fn verify(opts: &VerifyOptions, out: &mut dyn Write) -> Result<ExitStatus, CliError> {
    let results = run_verification(opts);
    let stdout = |e| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    };
    writeln!(
        out,
        "{:<50} {:>12} {:>13} {:>8}  result",
        "check", "value", "limit", "secs"
    )
    .map_err(stdout)?;
    for r in &results {
        writeln!(
            out,
            "{:<50} {:>12.3e} {}{:>12.3e} {:>8.3}  {}",
            r.name,
            r.value,
            if r.at_least { ">=" } else { "<=" },
            r.limit,
            r.seconds,
            if r.passed { "PASS" } else { "FAIL" }
        )
        .map_err(stdout)?;
    }
    Ok(if results.iter().all(|r| r.passed) {
        ExitStatus::Success
    } else {
        ExitStatus::ConditionFails
    })
}
