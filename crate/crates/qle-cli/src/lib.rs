//! Command-line front end: argument parsing, command dispatch and exit codes.

pub mod input;
pub mod report;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qle_core::curvature::{decompose, identity_suite, validate, CurvatureJet, Mode};
use qle_core::embedding::{
    isometric_residual, optimal_embedding_residual, solve_yi3, EmbeddingJet, Y0Path, KERNEL_TOL,
};
use qle_core::energy::{assemble_e5, ASSEMBLY_TOL};
use qle_core::expansion::{integral_lemmas, physical_expansion, CALIBRATION_TOL, LEMMA_TOL};
use qle_core::observer::{minimize_matter, minimize_vacuum, Observer};
use qle_core::sphere::{Field, SphereGrid};
use qle_core::transport::{available_order, compare, run_transport, ORACLE_TOL};
use qle_core::QleError;
use serde_json::json;
use thiserror::Error;

use report::{Report, Row};

pub const DEFAULT_LMAX: usize = 15;
/// Tolerance of the isometric embedding residual.
pub const EMBED_TOL: f64 = 1e-9;
/// Gradient bound certifying an optimal observer.
pub const GRADIENT_TOL: f64 = 1e-10;
/// Multi-start agreement of the optimizer.
pub const MULTISTART_TOL: f64 = 1e-8;
/// Distance between the Newton and brute-force minimizers.
pub const BRUTE_FORCE_TOL: f64 = 1e-6;
/// Agreement of the dual matter paths.
pub const MATTER_TOL: f64 = 1e-9;
/// Relative slack when checking `A = √(κ² + |C|²)` for `--observer`.
pub const OBSERVER_INPUT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] QleError),
}

impl CliError {
    /// 2 for malformed input, 3 for structural obstructions, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io(_) | Self::Json(_) | Self::Input(_) => 2,
            Self::Core(e) => match e {
                QleError::MalformedInput(_)
                | QleError::ConstraintViolation { .. }
                | QleError::MissingJetOrder(_)
                | QleError::ModeMismatch(_)
                | QleError::NotObserver(_)
                | QleError::Unsupported(_) => 2,
                QleError::KernelObstruction { .. }
                | QleError::NotTimelike { .. }
                | QleError::InfimumNotAttained { .. } => 3,
                QleError::BandLimitOverflow { .. }
                | QleError::RecursionBreakdown { .. }
                | QleError::SignCalibrationFailure { .. } => 1,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qle", version, about = "Small-sphere limits of quasi-local energy in anti-de Sitter space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Check the algebraic and differential constraints of a jet.
    Validate,
    /// Check the null decomposition identities on the sphere.
    Identities,
    /// Closed-form expansions and the integral lemmas.
    Expand,
    /// Compare the closed forms with the transport recursion.
    Oracle,
    /// Solve the leading isometric and optimal embedding equations.
    Embed,
    /// Assemble the limiting energy for an observer.
    Energy,
    /// Minimize the limiting energy over observers.
    Optimize,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Validate => "validate",
            Self::Identities => "identities",
            Self::Expand => "expand",
            Self::Oracle => "oracle",
            Self::Embed => "embed",
            Self::Energy => "energy",
            Self::Optimize => "optimize",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// JSON jet file, or `builtin:NAME` (pure-electric, zero, dust, random-vacuum, random-matter).
    #[arg(long, global = true)]
    pub input: Option<String>,
    /// Band limit of the sphere grid.
    #[arg(long, global = true, env = "QLE_LMAX", default_value_t = DEFAULT_LMAX)]
    pub lmax: usize,
    /// Expansion order for `expand` and `oracle`.
    #[arg(long, global = true)]
    pub order: Option<usize>,
    /// Override of the command's main tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Observer as `A,Cx,Cy,Cz` with `A = sqrt(1 + |C|^2)` for unit radius.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub observer: Option<Vec<f64>>,
    /// Use the energy-minimizing observer.
    #[arg(long, global = true)]
    pub optimize: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<String>,
}

/// A finished report and the exit code it implies.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub exit_code: i32,
}

impl Outcome {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.report.to_json(),
            Format::Table => self.report.to_table(),
        }
    }
}

fn parse_observer(values: &[f64], kappa: f64) -> Result<Observer<f64>, CliError> {
    let [a, cx, cy, cz] = values else {
        return Err(CliError::Input("--observer takes four numbers A,Cx,Cy,Cz".into()));
    };
    if !values.iter().all(|v| v.is_finite()) {
        return Err(CliError::Input("--observer values must be finite".into()));
    }
    let obs = Observer::from_c(kappa, [*cx, *cy, *cz]);
    if (obs.a() - a).abs() > OBSERVER_INPUT_TOL * obs.a() {
        return Err(QleError::NotObserver(format!(
            "A = {a} but sqrt(kappa^2 + |C|^2) = {}",
            obs.a()
        ))
        .into());
    }
    Observer::new(obs.killing).map_err(Into::into)
}

fn optimal_observer(jet: &CurvatureJet<f64>, seed: u64) -> Result<Observer<f64>, CliError> {
    Ok(match jet.mode {
        Mode::Vacuum => minimize_vacuum(jet, seed)?.observer,
        Mode::Matter => minimize_matter(jet)?.observer,
    })
}

fn choose_observer(jet: &CurvatureJet<f64>, opts: &Options) -> Result<Observer<f64>, CliError> {
    match (&opts.observer, opts.optimize) {
        (Some(_), true) => Err(CliError::Input("--observer and --optimize are exclusive".into())),
        (Some(v), false) => parse_observer(v, jet.kappa),
        (None, true) => optimal_observer(jet, opts.seed),
        (None, false) => Ok(Observer::static_observer(jet.kappa)),
    }
}

fn to_value<S: serde::Serialize>(s: &S) -> serde_json::Value {
    serde_json::to_value(s).expect("details serialize")
}

/// Runs one command and builds its report.
pub fn run(command: Command, opts: &Options) -> Result<Outcome, CliError> {
    let source = opts
        .input
        .as_deref()
        .ok_or_else(|| CliError::Input("--input is required".into()))?;
    if let Some(t) = opts.tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::Input("--tol must be a positive number".into()));
        }
    }
    let grid = SphereGrid::<f64>::new(opts.lmax)?;
    let (rows, details) = match command {
        Command::Validate => {
            let jet = input::load_jet(source, opts.seed)?;
            let r = validate(&jet)?;
            (
                r.rows.into_iter().map(Row::from).collect(),
                json!({ "mode": jet.mode, "kappa": jet.kappa }),
            )
        }
        Command::Identities => {
            let jet = input::load_valid_jet(source, opts.seed)?;
            let fields = decompose(&jet, &grid)?;
            let rows = identity_suite(&jet, &fields, &grid)?;
            (
                rows.into_iter().map(Row::from).collect(),
                json!({ "mode": jet.mode, "derived_route_gap": fields.derived_route_gap() }),
            )
        }
        Command::Expand => expand(source, opts, &grid)?,
        Command::Oracle => oracle(source, opts, &grid)?,
        Command::Embed => embed(source, opts, &grid)?,
        Command::Energy => energy(source, opts, &grid)?,
        Command::Optimize => optimize(source, opts)?,
    };
    let report = Report::new(command.name(), source, opts.lmax, opts.seed, rows, details);
    let exit_code = if report.pass { 0 } else { 1 };
    Ok(Outcome { report, exit_code })
}

type Body = (Vec<Row>, serde_json::Value);

fn expand(source: &str, opts: &Options, grid: &SphereGrid<f64>) -> Result<Body, CliError> {
    let jet = input::load_valid_jet(source, opts.seed)?;
    let fields = decompose(&jet, grid)?;
    let table = physical_expansion(&fields, grid)?;
    let mut rows = vec![Row::at_most(
        "connection-calibration",
        "sign of alpha_H against the divergence formula",
        table.calibration_residual,
        CALIBRATION_TOL,
    )];
    let lemmas = match (jet.mode, fields.d2()) {
        (Mode::Vacuum, Ok(_)) => {
            rows.extend(
                integral_lemmas(&fields, &table, grid, opts.tol.unwrap_or(LEMMA_TOL))?
                    .into_iter()
                    .map(Row::from),
            );
            "checked"
        }
        (Mode::Vacuum, Err(_)) => "skipped: needs second derivatives of the Weyl tensor",
        (Mode::Matter, _) => "skipped: vacuum only",
    };
    let limit = opts.order.unwrap_or(usize::MAX);
    let mut coefficients = Vec::new();
    let null = &table.null;
    let mut push = |name: String, anchor: String, integral: Option<f64>, sup: f64| {
        coefficients.push(json!({ "name": name, "anchor": anchor, "integral": integral, "sup": sup }));
    };
    for (k, c) in null.trl.iter().enumerate().take(limit.saturating_add(2)) {
        push(format!("trl-{k}"), format!("tr l expansion: r^{} coefficient", k as i32 - 1), Some(grid.integrate(c)), c.max_abs());
    }
    for (k, c) in null.trn.iter().enumerate().take(limit.saturating_add(2)) {
        push(format!("trn-{k}"), format!("tr n expansion: r^{} coefficient", k as i32 - 1), Some(grid.integrate(c)), c.max_abs());
    }
    for (k, c) in null.eta.iter().enumerate().take(limit.saturating_add(1)) {
        push(format!("eta-{}", k + 2), format!("torsion eta: r^{} coefficient", k + 2), None, c.max_abs());
    }
    for (k, c) in null.div_eta.iter().enumerate().take(limit) {
        push(format!("div-eta-{k}"), format!("divergence of eta: r^{k} coefficient"), Some(grid.integrate(c)), c.max_abs());
    }
    let details = json!({
        "mode": jet.mode,
        "connection_sign": table.connection_sign,
        "lemmas": lemmas,
        "coefficients": coefficients,
    });
    Ok((rows, details))
}

fn oracle(source: &str, opts: &Options, grid: &SphereGrid<f64>) -> Result<Body, CliError> {
    let jet = input::load_valid_jet(source, opts.seed)?;
    let fields = decompose(&jet, grid)?;
    let table = physical_expansion(&fields, grid)?;
    let available = available_order(&fields, grid);
    let order = opts.order.unwrap_or(available);
    let sol = run_transport(&fields, grid, order)?;
    let rows = compare(&table.null, &sol.null, opts.tol.unwrap_or(ORACLE_TOL));
    let details = json!({ "mode": jet.mode, "order": order, "available_order": available });
    Ok((rows.into_iter().map(Row::from).collect(), details))
}

fn embed(source: &str, opts: &Options, grid: &SphereGrid<f64>) -> Result<Body, CliError> {
    let jet = input::load_valid_jet(source, opts.seed)?;
    let obs = choose_observer(&jet, opts)?;
    let fields = decompose(&jet, grid)?;
    let table = physical_expansion(&fields, grid)?;
    let tol = opts.tol.unwrap_or(EMBED_TOL);
    let yi3 = solve_yi3(&fields, grid);
    let mut rows = vec![Row::at_most(
        "isometric",
        "linearized isometric embedding equation for Y_i^(3)",
        isometric_residual(&fields, grid, &yi3),
        tol,
    )];
    let spectral = EmbeddingJet::build(&fields, &table, grid, &obs, Y0Path::Spectral)?;
    rows.push(Row::at_most(
        "optimal-spectral",
        "optimal embedding equation for Y_0^(3), spectral solve",
        optimal_embedding_residual(&spectral, &table, grid, &obs),
        tol,
    ));
    let mut policies = vec![spectral.kernel_policy];
    if jet.mode == Mode::Vacuum {
        let closed = EmbeddingJet::build(&fields, &table, grid, &obs, Y0Path::ClosedForm)?;
        rows.push(Row::at_most(
            "optimal-closed-form",
            "optimal embedding equation for Y_0^(3), closed form",
            optimal_embedding_residual(&closed, &table, grid, &obs),
            tol,
        ));
        rows.push(Row::at_most(
            "y0-paths",
            "spectral and closed-form Y_0^(3) agree",
            (&closed.y03 - &spectral.y03).max_abs(),
            tol,
        ));
        policies.push(closed.kernel_policy);
    }
    let details = json!({
        "mode": jet.mode,
        "observer": obs,
        "kernel_tolerance": KERNEL_TOL,
        "kernel_policies": policies,
        "y03_sup": spectral.y03.max_abs(),
    });
    Ok((rows, details))
}

fn energy(source: &str, opts: &Options, grid: &SphereGrid<f64>) -> Result<Body, CliError> {
    let jet = input::load_valid_jet(source, opts.seed)?;
    let obs = choose_observer(&jet, opts)?;
    let r = assemble_e5(&jet, grid, &obs)?;
    let mut rows = Vec::new();
    if let (Some(rel), Some(_)) = (r.relative_discrepancy, &r.vacuum) {
        rows.push(Row::at_most(
            "e5-assembly",
            "r^5 energy coefficient: assembled terms against the Bel-Robinson closed form",
            rel,
            opts.tol.unwrap_or(ASSEMBLY_TOL),
        ));
    }
    if let Some(m) = &r.matter {
        let tol = opts.tol.unwrap_or(MATTER_TOL);
        rows.push(Row::relative("e-integral", "energy density from the mean curvature integral", m.e_integral, m.e_stress, tol));
        rows.push(Row::relative("e-einstein", "energy density from the Ricci tensor", m.e_einstein, m.e_stress, tol));
        let gap = |a: &[f64; 3]| (0..3).map(|i| (a[i] - m.p_stress[i]).abs()).fold(0.0, f64::max);
        rows.push(Row::at_most("p-connection", "momentum from the connection one-form", gap(&m.p_integral), tol));
        rows.push(Row::at_most("p-curvature", "momentum from the curvature components", gap(&m.p_curvature), tol));
        rows.push(Row::relative("e3", "r^3 energy coefficient against the stress-energy tensor", m.e3, m.e3_stress, tol));
    }
    Ok((rows, to_value(&r)))
}

fn optimize(source: &str, opts: &Options) -> Result<Body, CliError> {
    let jet = input::load_valid_jet(source, opts.seed)?;
    match jet.mode {
        Mode::Vacuum => {
            let m = minimize_vacuum(&jet, opts.seed)?;
            let c = &m.certificate;
            let rows = vec![
                Row::at_most("gradient", "gradient of the energy on the observer hyperboloid", c.gradient_norm, opts.tol.unwrap_or(GRADIENT_TOL)),
                Row::above("hessian", "smallest Hessian eigenvalue at the minimizer", c.hessian_min_eigenvalue, 0.0),
                Row::at_most("multistart", "spread of minimizers from random starts", c.multistart_spread, MULTISTART_TOL),
                Row::at_most("brute-force", "distance to the grid-search minimizer", c.brute_force_distance, BRUTE_FORCE_TOL),
                Row::at_most(
                    "below-static",
                    "minimum does not exceed the static observer value",
                    m.min_value - c.value_at_static,
                    0.0,
                ),
            ];
            Ok((rows, to_value(&m)))
        }
        Mode::Matter => {
            let m = minimize_matter(&jet)?;
            let rows = vec![
                Row::at_most("gradient", "gradient of the energy on the observer hyperboloid", m.gradient_norm, opts.tol.unwrap_or(GRADIENT_TOL)),
                Row::relative(
                    "closed-form",
                    "minimum against the invariant mass of the stress-energy tensor",
                    m.min_value,
                    m.closed_form,
                    1e-8,
                ),
            ];
            Ok((rows, to_value(&m)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(input: &str) -> Options {
        Options {
            input: Some(input.into()),
            lmax: DEFAULT_LMAX,
            order: None,
            tol: None,
            observer: None,
            optimize: false,
            format: Format::Json,
            seed: 3,
            out: None,
        }
    }

    #[test]
    fn every_command_passes_on_random_vacuum() {
        for cmd in [
            Command::Validate,
            Command::Identities,
            Command::Expand,
            Command::Oracle,
            Command::Embed,
            Command::Energy,
            Command::Optimize,
        ] {
            let out = run(cmd, &opts("builtin:random-vacuum")).unwrap();
            assert_eq!(out.exit_code, 0, "{cmd:?}: {:?}", out.report.rows);
            assert!(!out.report.rows.is_empty());
        }
    }

    #[test]
    fn observer_argument() {
        let o = parse_observer(&[2f64.sqrt(), 1.0, 0.0, 0.0], 1.0).unwrap();
        assert_eq!(o.c(), [1.0, 0.0, 0.0]);
        let e = parse_observer(&[1.0, 1.0, 0.0, 0.0], 1.0).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn exit_codes() {
        let e = run(Command::Optimize, &opts("builtin:zero")).unwrap_err();
        assert_eq!(e.exit_code(), 3);
        let mut o = opts("builtin:random-matter");
        o.observer = Some(vec![2f64.sqrt(), 0.0, 1.0, 0.0]);
        assert_eq!(run(Command::Embed, &o).unwrap_err().exit_code(), 3);
        assert_eq!(run(Command::Expand, &opts("missing.json")).unwrap_err().exit_code(), 2);
        let mut o = opts("builtin:pure-electric");
        o.order = Some(7);
        assert_eq!(run(Command::Oracle, &o).unwrap_err().exit_code(), 2);
        let mut o = opts("builtin:pure-electric");
        o.tol = Some(1e-300);
        o.observer = Some(vec![2f64.sqrt(), 1.0, 0.0, 0.0]);
        assert_eq!(run(Command::Energy, &o).unwrap().exit_code, 1);
    }
}
