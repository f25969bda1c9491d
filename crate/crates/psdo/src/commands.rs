//! The four subcommands. Each returns an [`Outcome`]; [`execute`] writes the
//! files and maps failures to exit codes.

use std::path::{Path, PathBuf};

use psdo_core::calculus::{extract_symbol, kn_symbol, EXTRACT_TOL};
use psdo_core::dsl::Var;
use psdo_core::fredholm::{
    check_elliptic, finite_section, tangent_grid, winding_oracle, EllipticConfig, FredholmConfig, WindingReport,
};
use psdo_core::geometry::{Axis, BoundaryMode, Kind};
use psdo_core::quantize::{op_circle, op_edge, op_mellin, DiscretizedOperator, MellinContext};
use psdo_core::symbols::{compat_check, conormal};
use psdo_core::{linalg, stock};
use serde_json::json;

use crate::config::{GeometryKind, OperatorKind, RunConfig};
use crate::report::{Report, Table};
use crate::{container, exit, verify, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Quantize,
    Index,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Quantize => "quantize",
            Command::Index => "index",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Report,
    Csv,
}

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub only: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub table: Option<Table>,
    /// Per-suite wall-clock seconds, kept out of the report.
    pub timings: Option<serde_json::Value>,
    pub out_dir: PathBuf,
}

fn load(opts: &Options, required: bool) -> Result<RunConfig, CliError> {
    let mut cfg = match &opts.config {
        Some(p) => RunConfig::load(p)?,
        None if required => return Err(CliError::Config("--config is required".into())),
        None => RunConfig::default(),
    };
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    if let Some(o) = &opts.out {
        cfg.output.dir = o.clone();
    }
    Ok(cfg)
}

fn new_report(cmd: Command, cfg: &RunConfig) -> Report {
    Report::new(cmd.name(), cfg.hash(), cfg.seed)
}

fn outcome(report: Report, table: Option<Table>, cfg: &RunConfig) -> Outcome {
    Outcome { report, table, timings: None, out_dir: cfg.output.dir.clone() }
}

pub fn cmd_check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut report = new_report(Command::Check, cfg);
    let floor = cfg.tolerances.elliptic_floor;
    if cfg.geometry.kind == GeometryKind::Circle {
        let mut t = Table::new(&[("x", "rad"), ("s_min", "singular value")]);
        let interior_min = if cfg.operator == OperatorKind::Toeplitz {
            1.0
        } else {
            let a = cfg.interior()?;
            let g = cfg.geometry()?;
            let dirs = a.sphere(32, a.r0.max(1.0));
            let mut worst = f64::INFINITY;
            for x in g.x_nodes() {
                let mut at_x = f64::INFINITY;
                for cov in &dirs {
                    at_x = at_x.min(linalg::smin(&a.eval(x, 0.0, cov)?));
                }
                t.push(vec![json!(x), json!(at_x)]);
                worst = worst.min(at_x);
            }
            worst
        };
        let elliptic = interior_min >= floor;
        report.section("ellipticity", json!({ "interior_min": interior_min, "floor": floor, "elliptic": elliptic }));
        report.section("interior_profile", &t);
        let (code, verdict) = if elliptic { (exit::OK, "elliptic") } else { (exit::ELLIPTICITY, "interior symbol degenerates") };
        report.finish(code, verdict);
        return Ok(outcome(report, Some(t), cfg));
    }
    let tuple = cfg.tuple()?;
    let compat = compat_check(&tuple)?;
    report.section("compatibility", json!({ "max_mismatch": compat.max_mismatch, "tol": compat.tol, "pass": compat.pass }));
    if !compat.pass {
        report.finish(exit::COMPAT, "symbol tuple is incompatible");
        return Ok(outcome(report, None, cfg));
    }
    let ecfg = EllipticConfig { floor, p_max: cfg.scan.p_max, n_p: cfg.scan.n_p, ..EllipticConfig::default() };
    let r = check_elliptic(&tuple, &ecfg)?;
    let mut t = Table::new(&[("p", "Mellin covariable"), ("s_min", "singular value")]);
    for (p, s) in &r.conormal_profile {
        t.push(vec![json!(p), json!(s)]);
    }
    report.section(
        "ellipticity",
        json!({
            "floor": floor,
            "interior_min": r.interior_min,
            "interior_pass": r.interior_pass,
            "conormal_min": r.conormal_min,
            "conormal_argmin": r.conormal_argmin,
            "conormal_pass": r.conormal_pass,
            "large_p_mismatch": r.large_p_mismatch,
            "large_p_pass": r.large_p_pass,
            "elliptic": r.elliptic,
        }),
    );
    report.section("conormal_profile", &t);
    let (code, verdict) = match (r.interior_pass, r.conormal_pass) {
        (true, true) => (exit::OK, "elliptic"),
        (false, _) => (exit::ELLIPTICITY, "interior symbol degenerates"),
        (true, false) => (exit::ELLIPTICITY, "conormal symbol degenerates"),
    };
    report.finish(code, verdict);
    Ok(outcome(report, Some(t), cfg))
}

fn build_operator(cfg: &RunConfig, n: Option<usize>) -> Result<DiscretizedOperator, CliError> {
    let v = cfg.parameter;
    if cfg.operator == OperatorKind::Toeplitz {
        return Ok(stock::toeplitz(n.unwrap_or(cfg.geometry.n_x))?);
    }
    let g = cfg.geometry_sized(n)?;
    Ok(match cfg.geometry.kind {
        GeometryKind::Circle => op_circle(&cfg.interior()?, &g, v)?,
        GeometryKind::Cone => op_mellin(&cfg.family()?, &g, v, MellinContext::default())?,
        GeometryKind::Edge => op_edge(&cfg.family()?, &g, v)?,
    })
}

/// Largest deviation between the symbol recovered from `op` and the configured symbol.
fn roundtrip_error(cfg: &RunConfig, op: &DiscretizedOperator) -> Result<Option<f64>, CliError> {
    if cfg.operator == OperatorKind::Toeplitz {
        return Ok(None);
    }
    let g = &op.geometry;
    match (&g.kind, cfg.geometry.kind) {
        (Kind::Circle { n }, _) => {
            let a = cfg.interior()?;
            let blocks = kn_symbol(op)?;
            let (xs, ks) = (g.x_nodes(), g.frequencies(Axis::X)?);
            let mut worst: f64 = 0.0;
            for (j, x) in xs.iter().enumerate() {
                for (i, k) in ks.iter().enumerate() {
                    let d = &blocks[j * n + i] - a.eval_circle(*x, *k, op.v)?;
                    worst = worst.max(linalg::max_abs(&d));
                }
            }
            Ok(Some(worst))
        }
        (Kind::Cone(spec), _) if spec.mode == BoundaryMode::Periodic => {
            let fam = cfg.family()?;
            let e = &fam.expr.expr;
            if [Var::R, Var::T, Var::W, Var::Eta, Var::X].iter().any(|v| e.depends_on(*v)) {
                return Ok(None);
            }
            let ex = extract_symbol(op, Axis::T, EXTRACT_TOL)?;
            let cn = conormal(&fam);
            let mut worst: f64 = 0.0;
            for (b, p) in ex.blocks.iter().zip(&ex.frequencies) {
                worst = worst.max(linalg::max_abs(&(b - cn.at(*p)?)));
            }
            Ok(Some(worst))
        }
        _ => Ok(None),
    }
}

pub fn cmd_quantize(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut report = new_report(Command::Quantize, cfg);
    let op = build_operator(cfg, None)?;
    std::fs::create_dir_all(&cfg.output.dir).map_err(|e| CliError::Io(format!("{}: {e}", cfg.output.dir.display())))?;
    let path = cfg.output.dir.join("operator.psdo");
    container::write(&path, &op)?;
    let back = container::read(&path)?;
    let exact = back.geometry == op.geometry
        && back.v.to_bits() == op.v.to_bits()
        && back.matrix.iter().zip(op.matrix.iter()).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits());
    if !exact {
        return Err(CliError::Io(format!("{} does not reproduce the operator", path.display())));
    }
    let sv = linalg::singular_values(&op.matrix);
    report.section(
        "operator",
        json!({
            "dimension": op.matrix.nrows(),
            "parameter": op.v,
            "norm": sv.first().copied().unwrap_or(0.0),
            "s_min": sv.last().copied().unwrap_or(0.0),
            "native_norm": linalg::opnorm(&op.native_matrix()),
        }),
    );
    report.section("container", json!({ "file": "operator.psdo", "format_version": container::VERSION, "bit_exact": exact }));
    let tol = cfg.tolerances.roundtrip;
    let rt = roundtrip_error(cfg, &op)?;
    report.section(
        "roundtrip",
        json!({ "applicable": rt.is_some(), "max_error": rt, "tol": tol, "pass": rt.map(|e| e <= tol) }),
    );
    report.finish(exit::OK, "quantized");
    Ok(outcome(report, None, cfg))
}

pub fn cmd_index(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut report = new_report(Command::Index, cfg);
    let toeplitz = cfg.operator == OperatorKind::Toeplitz;
    if !toeplitz && !(cfg.geometry.kind == GeometryKind::Cone && cfg.geometry.mode == crate::config::Mode::Interval) {
        return Err(CliError::Config("index needs an interval-mode cone or the toeplitz operator".into()));
    }
    let fcfg = FredholmConfig { rank_tol: cfg.tolerances.rank, gap_ratio: cfg.tolerances.gap_ratio, ..FredholmConfig::default() };
    if !toeplitz {
        cfg.family()?;
    }
    let build = |n: usize| build_operator(cfg, Some(n)).map_err(|e| psdo_core::Error::Precondition(e.to_string()));
    let fr = finite_section(&build, &cfg.scan.sizes, &fcfg)?;
    let mut t = Table::new(&[
        ("N", "nodes"),
        ("kernel", "dimension"),
        ("cokernel", "dimension"),
        ("index", ""),
        ("s_floor", "singular value"),
        ("s_min", "singular value"),
    ]);
    for s in &fr.sections {
        t.push(vec![json!(s.n), json!(s.kernel), json!(s.cokernel), json!(s.index()), json!(s.s_floor), json!(s.s_min())]);
    }
    let winding: Result<WindingReport, psdo_core::Error> = if toeplitz {
        winding_oracle(&stock::toeplitz_symbol, &stock::toeplitz_contour(512))
    } else {
        let fam = cfg.family()?;
        let cn = conormal(&fam);
        winding_oracle(&|p| cn.at(p), &tangent_grid(4001, 1e5))
    };
    report.section(
        "fredholm",
        json!({ "determinate": fr.determinate, "reason": fr.reason, "index": fr.index, "sections": &t }),
    );
    report.section(
        "winding",
        match &winding {
            Ok(w) => json!({ "winding": w.winding, "raw": w.raw, "min_modulus": w.min_modulus, "orientation": w.orientation }),
            Err(e) => json!({ "error": e.to_string() }),
        },
    );
    let (code, verdict) = match (fr.index, &winding) {
        (None, _) => (exit::INDETERMINATE, "finite sections do not stabilize"),
        (Some(_), Err(_)) => (exit::INCONSISTENT, "winding oracle failed"),
        (Some(i), Ok(w)) if i != w.winding => (exit::INCONSISTENT, "index and winding disagree"),
        _ => (exit::OK, "index determined and consistent"),
    };
    report.finish(code, verdict);
    Ok(outcome(report, Some(t), cfg))
}

pub fn cmd_verify(cfg: &RunConfig, only: Option<&str>) -> Result<Outcome, CliError> {
    let mut report = new_report(Command::Verify, cfg);
    let runs = verify::run(only, cfg.seed)?;
    let mut t = Table::new(&[("suite", ""), ("check", ""), ("value", ""), ("relation", ""), ("bound", ""), ("pass", "")]);
    for r in &runs {
        for c in &r.result.checks {
            t.push(vec![json!(r.result.name), json!(c.name), json!(c.value), json!(c.relation), json!(c.bound), json!(c.pass)]);
        }
    }
    let passed = runs.iter().filter(|r| r.result.pass).count();
    let results: Vec<_> = runs.iter().map(|r| &r.result).collect();
    report.section("verify", json!({ "suites": results, "passed": passed, "total": runs.len() }));
    let timings = json!(runs
        .iter()
        .map(|r| (r.result.name.clone(), json!(r.elapsed.as_secs_f64())))
        .collect::<serde_json::Map<_, _>>());
    if passed == runs.len() {
        report.finish(exit::OK, "all suites pass");
    } else {
        report.finish(exit::INCONSISTENT, format!("{} of {} suites fail", runs.len() - passed, runs.len()));
    }
    let mut o = outcome(report, Some(t), cfg);
    o.timings = Some(timings);
    Ok(o)
}

pub fn run_command(cmd: Command, opts: &Options) -> Result<Outcome, CliError> {
    let cfg = load(opts, cmd != Command::Verify)?;
    match cmd {
        Command::Check => cmd_check(&cfg),
        Command::Quantize => cmd_quantize(&cfg),
        Command::Index => cmd_index(&cfg),
        Command::Verify => cmd_verify(&cfg, opts.only.as_deref()),
    }
}

/// Writes `report.json`, `<command>.csv` and, for `verify`, `timings.json`
/// into the output directory.
pub fn write_outputs(cmd: Command, o: &Outcome) -> Result<(), CliError> {
    let dir: &Path = &o.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    o.report.write(&dir.join("report.json"))?;
    if let Some(t) = &o.table {
        container::write_atomic(&dir.join(format!("{}.csv", cmd.name())), t.to_csv()?.as_bytes())?;
    }
    if let Some(tm) = &o.timings {
        let s = serde_json::to_string_pretty(tm).expect("timings serialize");
        container::write_atomic(&dir.join("timings.json"), s.as_bytes())?;
    }
    Ok(())
}

/// Runs a command end to end and returns the process exit code.
pub fn execute(cmd: Command, opts: &Options) -> i32 {
    let res = run_command(cmd, opts).and_then(|o| {
        write_outputs(cmd, &o)?;
        Ok(o)
    });
    match res {
        Ok(o) => {
            match opts.format {
                Format::Report => print!("{}", o.report.to_json()),
                Format::Csv => match o.table.as_ref().map(|t| t.to_csv()) {
                    Some(Ok(s)) => print!("{s}"),
                    Some(Err(e)) => {
                        eprintln!("psdo: {e}");
                        return e.exit_code();
                    }
                    None => {}
                },
            }
            eprintln!("psdo {}: {} (exit {})", cmd.name(), o.report.verdict, o.report.exit_code);
            o.report.exit_code
        }
        Err(e) => {
            eprintln!("psdo {}: {e}", cmd.name());
            e.exit_code()
        }
    }
}
