//! The invariant battery behind `psdo verify`.
//!
//! Every suite is a pure function of the seed. Suites run in parallel and are
//! reported in the fixed order of [`SUITES`].

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use psdo_core::calculus::{coherent_symbol, compose_symbols, extract_symbol, infinitesimal, ProbeConfig, EXTRACT_TOL};
use psdo_core::dsl::SymbolExpr;
use psdo_core::fredholm::{
    finite_section, large_parameter_scan, tangent_grid, winding_oracle, FredholmConfig, FredholmReport,
};
use psdo_core::geometry::{Axis, Geometry};
use psdo_core::localization::{continuity_check, glue, local_norm, partition_bound_check, PartitionOfUnity};
use psdo_core::quantize::{dyadic_ladder, negligible_test, op_circle, op_mellin, DiscretizedOperator, MellinContext, OperatorFamily};
use psdo_core::symbols::{conormal, twisted_violation, InteriorSymbol};
use psdo_core::{linalg, stock, CMat, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::report::Table;
use crate::CliError;

pub const SUITES: [&str; 11] = [
    "twisted-homogeneity",
    "composition",
    "roundtrip",
    "finiteness",
    "toeplitz",
    "cone-index",
    "partition-bound",
    "gluing",
    "large-parameter",
    "infinitesimal",
    "negligible",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `<=`, `>=`, `==` or `holds`.
    pub relation: &'static str,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub tables: BTreeMap<String, Table>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Timed {
    pub result: SuiteResult,
    pub elapsed: Duration,
}

#[derive(Default)]
struct Acc {
    checks: Vec<Check>,
    tables: BTreeMap<String, Table>,
}

impl Acc {
    fn push(&mut self, name: String, value: f64, relation: &'static str, bound: f64, pass: bool) {
        self.checks.push(Check { name, value, relation, bound, pass });
    }
    fn le(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        self.push(name.into(), value, "<=", bound, value <= bound);
    }
    fn ge(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        self.push(name.into(), value, ">=", bound, value >= bound);
    }
    fn eq(&mut self, name: impl Into<String>, value: i64, want: i64) {
        self.push(name.into(), value as f64, "==", want as f64, value == want);
    }
    fn holds(&mut self, name: impl Into<String>, ok: bool) {
        self.push(name.into(), ok as u8 as f64, "holds", 1.0, ok);
    }
    fn table(&mut self, name: &str, t: Table) {
        self.tables.insert(name.to_string(), t);
    }
}

type SuiteFn = fn(u64, &mut Acc) -> psdo_core::Result<()>;

fn suite_fn(name: &str) -> Option<SuiteFn> {
    Some(match name {
        "twisted-homogeneity" => twisted_homogeneity,
        "composition" => composition,
        "roundtrip" => roundtrip,
        "finiteness" => finiteness,
        "toeplitz" => toeplitz,
        "cone-index" => cone_index,
        "partition-bound" => partition_bound,
        "gluing" => gluing,
        "large-parameter" => large_parameter,
        "infinitesimal" => infinitesimal_suite,
        "negligible" => negligible,
        _ => return None,
    })
}

/// Runs one suite; core errors are recorded as a failed suite.
pub fn run_suite(name: &str, seed: u64) -> Result<SuiteResult, CliError> {
    let f = suite_fn(name).ok_or_else(|| CliError::Config(format!("unknown suite `{name}`; known: {}", SUITES.join(", "))))?;
    let mut acc = Acc::default();
    let error = f(seed, &mut acc).err().map(|e| e.to_string());
    let pass = error.is_none() && !acc.checks.is_empty() && acc.checks.iter().all(|c| c.pass);
    Ok(SuiteResult { name: name.to_string(), pass, checks: acc.checks, tables: acc.tables, error })
}

/// Runs the selected suites (all when `only` is `None`) in parallel.
pub fn run(only: Option<&str>, seed: u64) -> Result<Vec<Timed>, CliError> {
    let names: Vec<&str> = match only {
        Some(s) => {
            suite_fn(s).ok_or_else(|| CliError::Config(format!("unknown suite `{s}`; known: {}", SUITES.join(", "))))?;
            vec![s]
        }
        None => SUITES.to_vec(),
    };
    names
        .par_iter()
        .map(|n| {
            let t0 = Instant::now();
            run_suite(n, seed).map(|result| Timed { result, elapsed: t0.elapsed() })
        })
        .collect()
}

fn cone_ctx() -> MellinContext {
    MellinContext::default()
}

fn section_table(t: &mut Table, name: &str, r: &FredholmReport) {
    for s in &r.sections {
        t.push(vec![
            json!(name),
            json!(s.n),
            json!(s.kernel),
            json!(s.cokernel),
            json!(s.index()),
            json!(s.s_floor),
            json!(s.s_min()),
        ]);
    }
}

fn section_columns() -> Table {
    Table::new(&[
        ("instance", ""),
        ("N", "nodes"),
        ("kernel", "dimension"),
        ("cokernel", "dimension"),
        ("index", ""),
        ("s_floor", "singular value"),
        ("s_min", "singular value"),
    ])
}

const HOMOGENEITY_POINTS: [(f64, f64, f64); 3] = [(0.0, 0.7, -0.4), (1.3, -2.1, 0.9), (2.5, 0.3, 1.5)];

fn twisted_homogeneity(_: u64, acc: &mut Acc) -> psdo_core::Result<()> {
    let ks: Vec<i64> = (1..=8).collect();
    let mut t = Table::new(&[("symbol", ""), ("max relative violation", "")]);
    for (name, p) in stock::edge_symbols()? {
        let g = stock::periodic_cone(64, p.q())?;
        let mut worst: f64 = 0.0;
        for (x, xi, v) in HOMOGENEITY_POINTS {
            worst = worst.max(twisted_violation(&p, x, xi, v, &g, &ks)?);
        }
        t.push(vec![json!(name), json!(worst)]);
        acc.le(name, worst, 1e-10);
    }
    acc.table("violations", t);
    Ok(())
}

fn composition(_: u64, acc: &mut Acc) -> psdo_core::Result<()> {
    let h1 = SymbolExpr::parse("exp((0,1)*x)", 1)?;
    let h2 = SymbolExpr::parse("chi(xi)", 1)?;
    let probe = ProbeConfig::default();
    let mut t = Table::new(&[("order", ""), ("xi", "frequency"), ("literal", "remainder norm"), ("swapped", "remainder norm")]);
    for order in 1..=3usize {
        let lit = compose_symbols(&h1, &h2, order, &probe)?;
        let sw = compose_symbols(&h2, &h1, order, &probe)?;
        for i in 0..probe.xis.len() {
            t.push(vec![json!(order), json!(probe.xis[i]), json!(lit.remainders[i]), json!(sw.remainders[i])]);
        }
        let worst = lit.remainders.iter().copied().fold(0.0, f64::max);
        acc.le(format!("literal order {order}: max remainder"), worst, 1e-13);
        let bound = -(order as f64 - 0.5);
        acc.le(format!("swapped order {order}: slope"), sw.exponent.unwrap_or(f64::NAN), bound);
    }
    acc.table("remainders", t);
    Ok(())
}

/// Sup over `x in {0,...,5}` and `k in (N/8){1,2,3}` of the coherent-state
/// estimate error at width `sqrt(2 pi / N)`.
pub fn coherent_error(src: &str, n: usize) -> psdo_core::Result<f64> {
    let g = Geometry::circle(n, 1)?;
    let a = InteriorSymbol::circle(src, 1, 1.0)?;
    let op = op_circle(&a, &g, 0.0)?;
    let sigma = (2.0 * std::f64::consts::PI / n as f64).sqrt();
    let mut worst: f64 = 0.0;
    for x in 0..6 {
        for m in 1..=3 {
            let k = (n / 8 * m) as f64;
            let est = coherent_symbol(&op, x as f64, k, sigma)?[(0, 0)];
            worst = worst.max((est - a.eval_circle(x as f64, k, 0.0)?[(0, 0)]).norm());
        }
    }
    Ok(worst)
}

pub const ROUNDTRIP_FLAT: &str = "exp((0,1)*chi(xi))*(1 + 0.5*chi(xi)^2)";
pub const ROUNDTRIP_VARYING: [&str; 2] = ["(2+cos(x))*chi(xi)", "(1+0.5*sin(x))/(2+chi(xi))"];

fn roundtrip(_: u64, acc: &mut Acc) -> psdo_core::Result<()> {
    let g = Geometry::circle(64, 1)?;
    let a = InteriorSymbol::circle(ROUNDTRIP_FLAT, 1, 1.0)?;
    let e = extract_symbol(&op_circle(&a, &g, 0.0)?, Axis::X, EXTRACT_TOL)?;
    let mut worst: f64 = 0.0;
    for (b, k) in e.blocks.iter().zip(&e.frequencies) {
        worst = worst.max((b[(0, 0)] - a.eval_circle(0.0, *k, 0.0)?[(0, 0)]).norm());
    }
    acc.le("x-independent extraction error at N = 64", worst, 1e-12);
    let mut t = Table::new(&[("symbol", ""), ("N", "nodes"), ("error", "sup over modes")]);
    for src in ROUNDTRIP_VARYING {
        let (e64, e128) = (coherent_error(src, 64)?, coherent_error(src, 128)?);
        t.push(vec![json!(src), json!(64), json!(e64)]);
        t.push(vec![json!(src), json!(128), json!(e128)]);
        acc.le(format!("{src}: error ratio 128/64"), e128 / e64, 0.5);
    }
    acc.table("coherent", t);
    Ok(())
}

fn mellin_section(fam: &psdo_core::symbols::ConeSymbolFamily, sizes: &[usize], cfg: &FredholmConfig) -> psdo_core::Result<FredholmReport> {
    let build = |n: usize| op_mellin(fam, &stock::interval_cone(n, fam.q())?, 0.0, cone_ctx());
    finite_section(&build, sizes, cfg)
}

fn finiteness(_: u64, acc: &mut Acc) -> psdo_core::Result<()> {
    let cfg = FredholmConfig::default();
    let mut t = section_columns();
    for st in stock::elliptic_tuples()? {
        let r = mellin_section(st.family(), &stock::CONE_SIZES, &cfg)?;
        section_table(&mut t, st.name, &r);
        acc.holds(format!("{}: determinate", st.name), r.determinate);
    }
    acc.table("elliptic", t);
    let mut t = Table::new(&[("instance", ""), ("N", "nodes"), ("s_min", "singular value")]);
    for st in stock::degenerate_tuples()? {
        let fam = st.family();
        let s: Vec<f64> = stock::CONE_SIZES
            .iter()
            .map(|&n| op_mellin(fam, &stock::interval_cone(n, fam.q())?, 0.0, cone_ctx()).map(|o| linalg::smin(&o.matrix)))
            .collect::<psdo_core::Result<_>>()?;
        for (n, v) in stock::CONE_SIZES.iter().zip(&s) {
            t.push(vec![json!(st.name), json!(n), json!(v)]);
        }
        acc.holds(format!("{}: s_min decreasing", st.name), s.windows(2).all(|w| w[1] < w[0]));
        acc.le(format!("{}: s_min at N = 256", st.name), s[s.len() - 1], 1e-3);
    }
    acc.table("degenerate", t);
    Ok(())
}

fn toeplitz(_: u64, acc: &mut Acc) -> psdo_core::Result<()> {
    let r = finite_section(&|n| stock::toeplitz(n), &[64, 128, 256], &FredholmConfig::default())?;
    let mut t = section_columns();
    section_table(&mut t, "toeplitz", &r);
    acc.holds("determinate", r.determinate);
    for s in &r.sections {
        acc.eq(format!("index at N = {}", s.n), s.index(), -1);
    }
    let w = winding_oracle(&stock::toeplitz_symbol, &stock::toeplitz_contour(512))?;
    acc.eq("winding", w.winding, -1);
    acc.table("sections", t);
    Ok(())
}

fn cone_index(_: u64, acc: &mut Acc) -> psdo_core::Result<()> {
    let cfg = FredholmConfig::default();
    let mut t = Table::new(&[("instance", ""), ("index", ""), ("winding", "")]);
    for st in stock::index_instances()? {
        let fam = st.family();
        let r = mellin_section(fam, &stock::CONE_SIZES, &cfg)?;
        let cn = conormal(fam);
        let w = winding_oracle(&|p| cn.at(p), &tangent_grid(4001, 1e5))?;
        t.push(vec![json!(st.name), json!(r.index), json!(w.winding)]);
        acc.holds(format!("{}: determinate", st.name), r.determinate);
        acc.eq(format!("{}: index - winding", st.name), r.index.unwrap_or(i64::MIN / 2) - w.winding, 0);
    }
    acc.table("instances", t);
    Ok(())
}

fn partition_bound(seed: u64, acc: &mut Acc) -> psdo_core::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0i64;
    let mut min_rel_slack = f64::INFINITY;
    for _ in 0..100 {
        let n = 2 * rng.gen_range(4..=8);
        let m = rng.gen_range(1..=4);
        let g = Geometry::circle(n, 1)?;
        let f: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..n).map(|_| if rng.gen::<f64>() < 0.3 { 0.0 } else { rng.gen::<f64>() }).collect())
            .collect();
        let ops: Vec<CMat> = (0..m)
            .map(|_| CMat::from_fn(n, n, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)))
            .collect();
        let b = partition_bound_check(&g, &f, &ops)?;
        if b.violated {
            violations += 1;
        }
        if b.rhs > 0.0 {
            min_rel_slack = min_rel_slack.min(b.slack / b.rhs);
        }
    }
    acc.eq("violations beyond 1e-12", violations, 0);
    acc.ge("min relative slack", min_rel_slack, -1e-12);
    Ok(())
}

fn gluing(_: u64, acc: &mut Acc) -> psdo_core::Result<()> {
    let f = stock::gluing_family(128, 16)?;
    let g = f.geometry.clone();
    let eps = [0.5, 0.25, 0.125];
    let rep = continuity_check(&f, &eps, None);
    let mut glued = Vec::new();
    let mut t = Table::new(&[("epsilon", ""), ("radius", "rad"), ("max reproduction", "local norm")]);
    for v in &rep.verdicts {
        acc.holds(format!("continuity at eps = {}", v.eps), v.pass);
        let Some(radius) = v.radius else { continue };
        let p = PartitionOfUnity::around(&g, &f.centers, radius)?;
        let b = glue(&f, &p)?;
        let mut worst: f64 = 0.0;
        for (i, c) in f.centers.iter().enumerate() {
            let ladder = g.cutoff_family(*c, &[1.0, 0.5, 0.25])?;
            let d = DiscretizedOperator::new(g.clone(), 0.0, &b.matrix - &f.ops[i]);
            worst = worst.max(local_norm(&d, &ladder, 1.0).limit);
        }
        t.push(vec![json!(v.eps), json!(radius), json!(worst)]);
        acc.le(format!("reproduction at eps = {}", v.eps), worst, 2.0 * v.eps);
        glued.push((v.eps, b));
    }
    let mut cauchy: f64 = f64::NEG_INFINITY;
    for (e, x) in &glued {
        for (d, y) in &glued {
            cauchy = cauchy.max(linalg::opnorm(&(&x.matrix - &y.matrix)) - (2.0 * e).max(2.0 * d));
        }
    }
    acc.le("Cauchy excess", cauchy, 0.0);
    acc.table("gluing", t);
    Ok(())
}

fn large_parameter(_: u64, acc: &mut Acc) -> psdo_core::Result<()> {
    let r = large_parameter_scan(&stock::large_parameter_family(64)?, 0.5);
    let mut t = Table::new(&[("v", "parameter"), ("s_min", "singular value")]);
    for (v, s) in r.samples.iter().zip(&r.s_min) {
        t.push(vec![json!(v), json!(s)]);
    }
    acc.ge("min s_min", r.s_min.iter().copied().fold(f64::INFINITY, f64::min), 0.5);
    acc.holds("non-decreasing within 10%", r.non_decreasing);
    acc.table("scan", t);
    Ok(())
}

fn infinitesimal_suite(_: u64, acc: &mut Acc) -> psdo_core::Result<()> {
    let mut t = Table::new(&[("instance", ""), ("scale", ""), ("diagnostic", "operator norm")]);
    for c in stock::infinitesimal_cases()? {
        let inf = infinitesimal(&c.spec, c.center, &c.scales, 0.0, c.tol)?;
        for (s, d) in inf.scales.iter().zip(&inf.diagnostics) {
            t.push(vec![json!(c.name), json!(s), json!(d)]);
        }
        acc.holds(format!("{}: non-increasing", c.name), inf.monotone);
        acc.le(format!("{}: final diagnostic", c.name), *inf.diagnostics.last().unwrap_or(&f64::INFINITY), 1e-3);
        acc.le(format!("{}: translation defect", c.name), inf.translation_defect()?, 1e-10);
        acc.le(format!("{}: norm excess", c.name), inf.norm - inf.source_norm, 1e-12);
    }
    acc.table("diagnostics", t);
    Ok(())
}

/// `e^{-|v|} u u^*` for a seeded unit vector `u` on an 8-point circle.
pub fn smoothing_family(seed: u64) -> psdo_core::Result<OperatorFamily> {
    let g = Geometry::circle(8, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = psdo_core::CVec::from_fn(8, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
    u /= C64::from(u.norm());
    let p = &u * u.adjoint();
    OperatorFamily::build(&dyadic_ladder(6), |v| Ok(DiscretizedOperator::new(g.clone(), v, &p * C64::from((-v.abs()).exp()))))
}

fn negligible(seed: u64, acc: &mut Acc) -> psdo_core::Result<()> {
    let g = Geometry::circle(8, 1)?;
    let smooth = smoothing_family(seed)?;
    let ident = OperatorFamily::build(&dyadic_ladder(6), |v| Ok(DiscretizedOperator::new(g.clone(), v, linalg::eye(8))))?;
    let mut t = Table::new(&[("family", ""), ("order", ""), ("constant", ""), ("negligible", "")]);
    for order in [1u32, 2, 4] {
        let a = negligible_test(&smooth, order, 1e3)?;
        let b = negligible_test(&ident, order, 1e3)?;
        t.push(vec![json!("smoothing"), json!(order), json!(a.constant), json!(a.negligible)]);
        t.push(vec![json!("identity"), json!(order), json!(b.constant), json!(b.negligible)]);
        acc.holds(format!("smoothing accepted at N = {order}"), a.negligible);
        acc.holds(format!("identity rejected at N = {order}"), !b.negligible);
    }
    acc.table("verdicts", t);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_a_config_error() {
        assert!(matches!(run(Some("nope"), 0), Err(CliError::Config(_))));
    }

    #[test]
    fn fast_suites_pass() {
        for name in ["partition-bound", "negligible", "large-parameter", "toeplitz"] {
            let r = run_suite(name, 0).unwrap();
            assert!(r.pass, "{name}: {:?}", r);
        }
    }

    #[test]
    fn seed_changes_draws_not_verdicts() {
        let a = run_suite("partition-bound", 0).unwrap();
        let b = run_suite("partition-bound", 7).unwrap();
        assert_eq!(a.pass, b.pass);
        assert_ne!(a.checks[1].value, b.checks[1].value);
    }
}
