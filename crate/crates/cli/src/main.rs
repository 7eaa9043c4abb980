mod args;
mod manifest;

use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use painleve::asymptotics::{expected_constant, growth_exponent};
use painleve::{
    closed_form_constants, eigen_table, extract_constant, integrate, Branch, ConstantEstimate, Direction,
    EigenProblem, EigenvalueRecord, Equation, InitialData, IntegrationConfig, SearchKind, SearchMode, Termination,
    Trajectory, WkbConstants,
};
use serde::{Deserialize, Serialize};

use args::{Cli, Command, ConstantsArgs, EigenArgs, EqArg, Format, TrajectoryArgs};
use manifest::RunManifest;

const TABLE_SCHEMA: &str = "painleve/eigen-table/v1";

const EXIT_OK: u8 = 0;
const EXIT_FAILURE: u8 = 1;
const EXIT_PARTIAL: u8 = 2;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] painleve::Error),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// The reader of stdout went away, as with `painleve ... | head`.
    fn is_broken_pipe(&self) -> bool {
        let kind = match self {
            CliError::Io(e) => Some(e.kind()),
            CliError::Json(e) => e.io_error_kind(),
            CliError::Csv(e) => match e.kind() {
                csv::ErrorKind::Io(e) => Some(e.kind()),
                _ => None,
            },
            _ => None,
        };
        kind == Some(io::ErrorKind::BrokenPipe)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_FAILURE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Trajectory(a) => cmd_trajectory(a),
        Command::Eigen(a) => cmd_eigen(a),
        Command::Constants(a) => cmd_constants(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) if e.is_broken_pipe() => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("painleve: {e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}

fn command_echo() -> Vec<String> {
    std::env::args().skip(1).collect()
}

fn open_output(out: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(io::BufWriter::new(fs::File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json<S: Serialize>(out: Option<&Path>, value: &S) -> Result<(), CliError> {
    let mut w = open_output(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// CSV preceded by a `# manifest: {...}` comment line.
fn csv_writer(out: Option<&Path>, manifest: &RunManifest) -> Result<csv::Writer<Box<dyn Write>>, CliError> {
    let mut w = open_output(out)?;
    writeln!(w, "# manifest: {}", serde_json::to_string(manifest)?)?;
    Ok(csv::Writer::from_writer(w))
}

fn optional(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn branch_at(eq: Equation, t: f64, sign: Branch) -> Option<f64> {
    eq.asymptotic_branch(t, sign).ok()
}

#[derive(Serialize)]
struct TrajectoryConfig {
    equation: EqArg,
    y0: f64,
    slope: f64,
    direction: Direction,
    horizon: f64,
    integration: IntegrationConfig<f64>,
}

#[derive(Serialize)]
struct TrajectoryFile<'a> {
    manifest: &'a RunManifest,
    termination: Termination,
    terminal_t: f64,
    samples: Vec<[f64; 3]>,
    poles: &'a [painleve::PoleEvent<f64>],
}

fn cmd_trajectory(a: &TrajectoryArgs) -> Result<u8, CliError> {
    let eq: Equation = a.eq.into();
    let direction = a.direction.map(Direction::from).unwrap_or(match eq {
        Equation::ToyModel => Direction::PositiveT,
        _ => Direction::NegativeT,
    });
    let mut cfg = IntegrationConfig::default().with_rel_tol(a.tol);
    cfg.abs_tol = a.tol * 1e-2;
    if let Some(h) = a.horizon {
        cfg = cfg.with_horizon(h);
    }
    let slope = if eq == Equation::ToyModel { 0.0 } else { a.slope };
    let start = Instant::now();
    let traj = integrate(&eq, InitialData::new(a.y0, slope), direction, &cfg)?;
    let config = TrajectoryConfig {
        equation: a.eq,
        y0: a.y0,
        slope,
        direction,
        horizon: traj.horizon,
        integration: cfg,
    };
    let manifest = RunManifest::new(command_echo(), serde_json::to_value(&config)?, None).finish(start.elapsed());

    match a.format {
        Format::Json => write_json(
            a.out.as_deref(),
            &TrajectoryFile {
                manifest: &manifest,
                termination: traj.termination,
                terminal_t: traj.terminal_t,
                samples: traj.real_samples().map(|s| [s.t.re, s.y.re, s.yp.re]).collect(),
                poles: &traj.poles,
            },
        )?,
        Format::Csv => write_trajectory_csv(a.out.as_deref(), &manifest, eq, &traj)?,
    }

    if traj.termination == Termination::StepUnderflow {
        eprintln!(
            "painleve: integration stalled at t = {} before reaching the horizon {}",
            traj.terminal_t, traj.horizon
        );
        return Ok(EXIT_FAILURE);
    }
    Ok(EXIT_OK)
}

/// Rows are real-axis samples in path order; each detour contributes one
/// row at the pole with `pole_marker = 1` and an empty `y`.
fn write_trajectory_csv(
    out: Option<&Path>,
    manifest: &RunManifest,
    eq: Equation,
    traj: &Trajectory<f64>,
) -> Result<(), CliError> {
    let mut w = csv_writer(out, manifest)?;
    w.write_record(["t", "y", "branch_plus", "branch_minus", "pole_marker"])?;
    let mut poles = traj.poles.iter();
    let mut on_axis = true;
    for s in &traj.samples {
        if !s.on_axis() {
            if on_axis {
                if let Some(p) = poles.next() {
                    let t = p.location;
                    w.write_record([
                        t.to_string(),
                        String::new(),
                        optional(branch_at(eq, t, Branch::Plus)),
                        optional(branch_at(eq, t, Branch::Minus)),
                        "1".into(),
                    ])?;
                }
            }
            on_axis = false;
            continue;
        }
        on_axis = true;
        let t = s.t.re;
        w.write_record([
            t.to_string(),
            s.y.re.to_string(),
            optional(branch_at(eq, t, Branch::Plus)),
            optional(branch_at(eq, t, Branch::Minus)),
            "0".into(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct FailureInfo {
    index: usize,
    reason: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EigenTableFile {
    schema: String,
    manifest: RunManifest,
    equation: Equation,
    mode: SearchMode<f64>,
    direction: Direction,
    complete: bool,
    failure: Option<FailureInfo>,
    warnings: Vec<String>,
    records: Vec<EigenvalueRecord<f64>>,
}

#[derive(Serialize)]
struct EigenConfig {
    equation: EqArg,
    mode: SearchKind,
    fixed_value: f64,
    direction: Direction,
    n: usize,
    tol: f64,
    integration: IntegrationConfig<f64>,
    classifier: painleve::ClassifierConfig<f64>,
}

fn cmd_eigen(a: &EigenArgs) -> Result<u8, CliError> {
    let eq: Equation = a.eq.into();
    let kind = match eq {
        Equation::ToyModel => SearchKind::ToyEigen,
        _ => a
            .mode
            .ok_or_else(|| CliError::Usage("--mode is required for p1 and p2".into()))?
            .into(),
    };
    let mut problem = EigenProblem::<f64>::new(eq, kind)?;
    match kind {
        SearchKind::SlopeEigen if a.slope.is_some() => {
            return Err(CliError::Usage("--slope is the search variable in slope mode".into()))
        }
        SearchKind::ValueEigen if a.y0.is_some() => {
            return Err(CliError::Usage("--y0 is the search variable in value mode".into()))
        }
        SearchKind::ToyEigen if a.y0.is_some() || a.slope.is_some() => {
            return Err(CliError::Usage("the toy search takes no fixed datum".into()))
        }
        SearchKind::SlopeEigen => problem = problem.with_fixed(a.y0.unwrap_or(0.0)),
        SearchKind::ValueEigen => problem = problem.with_fixed(a.slope.unwrap_or(0.0)),
        SearchKind::ToyEigen => {}
    }
    if let Some(d) = a.direction {
        problem.direction = d.into();
    }
    if let Some(h) = a.horizon {
        problem.integration = problem.integration.with_horizon(h);
    }
    let cap = if kind == SearchKind::ToyEigen { 60 } else { 30 };
    if a.n == 0 || a.n > cap {
        return Err(CliError::Usage(format!("--n must lie in 1..={cap}")));
    }
    if kind != SearchKind::ToyEigen && a.tol < 10.0 * problem.integration.rel_tol * 0.999 {
        return Err(CliError::Usage(format!(
            "--tol must be at least 10 x the integration tolerance ({})",
            problem.integration.rel_tol
        )));
    }

    let start = Instant::now();
    let table = eigen_table(&problem, a.n, a.tol);
    let config = EigenConfig {
        equation: a.eq,
        mode: kind,
        fixed_value: problem.mode.fixed_value,
        direction: problem.direction,
        n: a.n,
        tol: a.tol,
        integration: problem.integration,
        classifier: problem.classifier,
    };
    let manifest = RunManifest::new(command_echo(), serde_json::to_value(&config)?, None).finish(start.elapsed());
    let failure = table.failure.as_ref().map(|(index, e)| FailureInfo {
        index: *index,
        reason: e.to_string(),
    });
    for w in &table.warnings {
        eprintln!("painleve: warning: {w}");
    }

    match a.format {
        Format::Json => write_json(
            a.out.as_deref(),
            &EigenTableFile {
                schema: TABLE_SCHEMA.into(),
                manifest,
                equation: eq,
                mode: problem.mode,
                direction: problem.direction,
                complete: failure.is_none(),
                failure: failure.clone(),
                warnings: table.warnings.clone(),
                records: table.records.clone(),
            },
        )?,
        Format::Csv => {
            let mut w = csv_writer(a.out.as_deref(), &manifest)?;
            w.write_record(["index", "value", "bracket_width", "pole_count"])?;
            for r in &table.records {
                w.write_record([
                    r.index.to_string(),
                    r.value.to_string(),
                    r.bracket_width.to_string(),
                    r.pole_count.to_string(),
                ])?;
            }
            w.flush()?;
        }
    }

    match failure {
        None => Ok(EXIT_OK),
        Some(f) => {
            eprintln!(
                "painleve: partial table, {} of {} records; index {} failed: {}",
                table.records.len(),
                a.n,
                f.index,
                f.reason
            );
            Ok(EXIT_PARTIAL)
        }
    }
}

#[derive(Serialize)]
struct Extrapolation {
    constant: &'static str,
    exponent: f64,
    order: usize,
    records: usize,
    closed_form: f64,
    estimate: ConstantEstimate<f64>,
    deviation: f64,
}

#[derive(Serialize)]
struct ConstantsFile {
    manifest: RunManifest,
    closed_form: WkbConstants<f64>,
    extrapolation: Option<Extrapolation>,
}

fn constant_name(eq: Equation, kind: SearchKind) -> &'static str {
    match (eq, kind) {
        (Equation::PainleveI, SearchKind::SlopeEigen) => "B_I",
        (Equation::PainleveI, SearchKind::ValueEigen) => "C_I",
        (Equation::PainleveII, SearchKind::SlopeEigen) => "B_II",
        (Equation::PainleveII, SearchKind::ValueEigen) => "C_II",
        _ => "toy",
    }
}

fn read_table(path: &Path) -> Result<(EigenTableFile, Vec<u8>), CliError> {
    let bytes = fs::read(path)?;
    let table: EigenTableFile = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Usage(format!("{} is not an eigen table: {e}", path.display())))?;
    if table.schema != TABLE_SCHEMA {
        return Err(CliError::Usage(format!(
            "{}: schema {:?}, expected {TABLE_SCHEMA:?}",
            path.display(),
            table.schema
        )));
    }
    if table.records.is_empty() {
        return Err(CliError::Usage(format!("{}: the table has no records", path.display())));
    }
    if let Some(r) = table
        .records
        .iter()
        .find(|r| r.equation != table.equation || r.mode.kind != table.mode.kind)
    {
        return Err(CliError::Usage(format!(
            "{}: record {} does not belong to a {} {:?} table",
            path.display(),
            r.index,
            table.equation,
            table.mode.kind
        )));
    }
    Ok((table, bytes))
}

fn extrapolate(table: &EigenTableFile, order: Option<usize>) -> Result<Extrapolation, CliError> {
    let (eq, kind) = (table.equation, table.mode.kind);
    let split = eq == Equation::PainleveII && kind == SearchKind::SlopeEigen;
    let n = table.records.len();
    let usable = if split { (n - 1) / 2 } else { n };
    if usable < 2 {
        return Err(CliError::Usage(format!("{n} records are too few to extrapolate")));
    }
    let default = if (eq, kind) == (Equation::PainleveI, SearchKind::SlopeEigen) { 5 } else { 4 };
    let order = order.unwrap_or(default.min(usable - 1));
    let exponent = growth_exponent::<f64>(eq, kind)?;
    let closed_form = expected_constant::<f64>(eq, kind)?;
    let estimate = extract_constant(&table.records, exponent, order)?;
    Ok(Extrapolation {
        constant: constant_name(eq, kind),
        exponent,
        order,
        records: n,
        closed_form,
        deviation: estimate.combined.estimate - closed_form,
        estimate,
    })
}

fn cmd_constants(a: &ConstantsArgs) -> Result<u8, CliError> {
    let start = Instant::now();
    let loaded = a.table.as_deref().map(read_table).transpose()?;
    let extrapolation = loaded.as_ref().map(|(t, _)| extrapolate(t, a.order)).transpose()?;
    let closed_form = closed_form_constants::<f64>();
    let config = serde_json::json!({ "table": a.table, "order": a.order });
    let manifest = RunManifest::new(command_echo(), config, loaded.as_ref().map(|(_, b)| b.as_slice()))
        .finish(start.elapsed());

    match a.format {
        Format::Json => write_json(
            a.out.as_deref(),
            &ConstantsFile {
                manifest,
                closed_form,
                extrapolation,
            },
        )?,
        Format::Csv => {
            let mut w = csv_writer(a.out.as_deref(), &manifest)?;
            w.write_record(["quantity", "closed_form", "extrapolated", "deviation", "stability", "order"])?;
            for (name, value) in [
                ("B_I", closed_form.B_I),
                ("C_I", closed_form.C_I),
                ("B_II", closed_form.B_II),
                ("C_II", closed_form.C_II),
            ] {
                w.write_record([name, &value.to_string(), "", "", "", ""])?;
            }
            if let Some(x) = &extrapolation {
                let mut rows = vec![(x.constant.to_string(), x.estimate.combined)];
                if let (Some(e), Some(o)) = (x.estimate.even, x.estimate.odd) {
                    rows.push((format!("{}_even", x.constant), e));
                    rows.push((format!("{}_odd", x.constant), o));
                }
                for (name, r) in rows {
                    w.write_record([
                        name,
                        x.closed_form.to_string(),
                        r.estimate.to_string(),
                        (r.estimate - x.closed_form).to_string(),
                        r.stability.to_string(),
                        r.order.to_string(),
                    ])?;
                }
            }
            w.flush()?;
        }
    }
    Ok(EXIT_OK)
}
