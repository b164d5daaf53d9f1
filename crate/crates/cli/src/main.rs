mod cache;
mod render;

use clap::{Parser, Subcommand};
use hyperpoints::descent::{
    check_hypothesis, run_descent_local, run_descent_with, DescentCertificate, DescentError, DescentOptions,
    HypothesisRecord,
};
use hyperpoints::dmsearch::{solve_curve, SearchError, SearchOptions};
use hyperpoints::family::{
    build_family, cassels_matrix, estimate_map_degree, fiber_primes, sample_a_values, verify_construction_identities,
    verify_param_identities, FamilyError, MapChoice,
};
use hyperpoints::numth::{rat_string, Primality};
use hyperpoints::rootnum::{global_root_number, parity_rank_odd, root_hypothesis, RootError};
use hyperpoints::Int;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "hyperpoints", version, about = "Rational points on the curves C_a by the Dem'yanenko-Manin method")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Print the JSON report instead of the text summary.
    #[arg(long, global = true)]
    json: bool,
    /// Tolerance for the numerical heights, in (0, 0.1].
    #[arg(long, global = true, default_value_t = 1e-3)]
    tol: f64,
    /// Height bound on z1 in the descent witness search (default 4a^2).
    #[arg(long, global = true)]
    witness_bound: Option<Int>,
    /// Seed for the randomized identity checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory for cached JSON reports.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// On a cache hit, recompute anyway and fail if the results differ.
    #[arg(long, global = true)]
    verify_cache: bool,
    /// Render the descent grid (rank, points).
    #[arg(long, global = true)]
    table: bool,
    /// Allow a outside the descent hypothesis, using local images at every bad place.
    #[arg(long, global = true)]
    generic: bool,
}

#[derive(Subcommand, Debug, Clone)]
enum Cmd {
    /// Build C_a, E_a, E', verify the construction identities, estimate degrees.
    Analyze { a: Int },
    /// Complete 2-descent on E_a.
    Rank { a: Int },
    /// Local and global root numbers of E'.
    Rootnumber { a: Int },
    /// The full pipeline: descent, root numbers, search; prints C_a(Q).
    Points { a: Int },
    /// Eligibility, descent rank and root number for lo <= a <= hi.
    Survey { lo: u64, hi: u64 },
    /// Identity tests in Q(a)[x] at seeded sample values, plus the construction checks.
    VerifyIdentities {
        /// Values of a for the construction checks.
        #[arg(long = "a", value_delimiter = ',', default_values_t = default_identity_as())]
        a: Vec<Int>,
        /// Minimum number of sample values.
        #[arg(long, default_value_t = 10)]
        samples: usize,
    },
}

fn default_identity_as() -> Vec<Int> {
    [2, 3, 5, 21, 237].into_iter().map(Int::from).collect()
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub msg: String,
}

impl CliError {
    fn new(code: u8, msg: impl Into<String>) -> Self {
        CliError { code, msg: msg.into() }
    }
}

pub const EXIT_HYPOTHESIS: u8 = 2;
pub const EXIT_UNRESOLVED: u8 = 3;
pub const EXIT_INCONSISTENT: u8 = 4;

fn family_code(e: &FamilyError) -> u8 {
    match e {
        FamilyError::BadParameter(_) => EXIT_HYPOTHESIS,
        _ => EXIT_INCONSISTENT,
    }
}

fn descent_code(e: &DescentError) -> u8 {
    match e {
        DescentError::Hypothesis { .. } | DescentError::OutsideBasis(_) => EXIT_HYPOTHESIS,
        DescentError::Factor(_) | DescentError::Unresolved(_) => EXIT_UNRESOLVED,
        DescentError::Inconsistent(_) | DescentError::Ec(_) => EXIT_INCONSISTENT,
    }
}

fn root_code(e: &RootError) -> u8 {
    match e {
        RootError::Hypothesis { .. } => EXIT_HYPOTHESIS,
        RootError::Unclassifiable(..) | RootError::EvenParity => EXIT_UNRESOLVED,
        _ => EXIT_INCONSISTENT,
    }
}

fn search_code(e: &SearchError) -> u8 {
    match e {
        SearchError::Family(e) => family_code(e),
        SearchError::Descent(e) => descent_code(e),
        SearchError::RankNotOne(_) | SearchError::Unresolved(_) => EXIT_UNRESOLVED,
        _ => EXIT_INCONSISTENT,
    }
}

macro_rules! impl_from {
    ($t:ty, $f:ident) => {
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::new($f(&e), e.to_string())
            }
        }
    };
}
impl_from!(FamilyError, family_code);
impl_from!(DescentError, descent_code);
impl_from!(RootError, root_code);
impl_from!(SearchError, search_code);

fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::new(EXIT_INCONSISTENT, e.to_string()))
}

/// Every JSON number becomes its decimal string, so all numeric output is exact text.
fn stringify_numbers(v: Value) -> Value {
    match v {
        Value::Number(n) => Value::String(n.to_string()),
        Value::Array(xs) => Value::Array(xs.into_iter().map(stringify_numbers).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, stringify_numbers(v))).collect()),
        v => v,
    }
}

struct Ctx {
    tol: f64,
    descent: DescentOptions,
    seed: u64,
    table: bool,
    generic: bool,
}

impl Ctx {
    fn descent(&self, a: &Int) -> Result<DescentCertificate, DescentError> {
        if self.generic && !HypothesisRecord::of(a).holds() {
            run_descent_local(a, &self.descent)
        } else {
            run_descent_with(a, &self.descent)
        }
    }

    fn require_hypothesis(&self, a: &Int) -> Result<(), CliError> {
        if !self.generic {
            check_hypothesis(a)?;
        }
        Ok(())
    }
}

fn cmd_analyze(a: &Int) -> Result<Value, CliError> {
    let b = build_family(a)?;
    let identities = verify_construction_identities(&b);
    let primes = fiber_primes(a, 6);
    let degrees: Vec<Value> = [("phi1", MapChoice::Phi1), ("phi2", MapChoice::Phi2), ("phi1+phi2", MapChoice::Sum)]
        .into_iter()
        .map(|(name, m)| {
            let d = estimate_map_degree(&b, m, &primes);
            json!({ "map": name, "degree": d.degree, "degenerate": d.degenerate, "fibers": d.primes })
        })
        .collect();
    let deg = |i: usize| degrees[i]["degree"].as_u64().unwrap_or(0) as u32;
    let cassels = cassels_matrix(deg(0), deg(1), deg(2));
    let all_passed = identities.all_passed() && cassels.independent;
    Ok(json!({
        "command": "analyze",
        "a": a.to_string(),
        "c_a": format!("y^2 = {}", b.c.f),
        "e_a": { "equation": b.e_a.to_string(), "model": b.e_a },
        "e_prime": { "equation": b.e_prime.to_string(), "model": b.e_prime },
        "identities": identities,
        "degrees": degrees,
        "cassels": cassels,
        "all_passed": all_passed,
    }))
}

fn cmd_rank(ctx: &Ctx, a: &Int) -> Result<Value, CliError> {
    let cert = ctx.descent(a)?;
    let mut v = to_value(&cert)?;
    v["command"] = json!("rank");
    if ctx.table {
        v["table"] = json!(cert.render_table().lines().collect::<Vec<_>>());
    }
    Ok(v)
}

fn cmd_rootnumber(a: &Int) -> Result<Value, CliError> {
    let report = global_root_number(a)?;
    let parity = parity_rank_odd(a).ok();
    Ok(json!({ "command": "rootnumber", "report": report, "parity": parity }))
}

fn cmd_points(ctx: &Ctx, a: &Int) -> Result<Value, CliError> {
    ctx.require_hypothesis(a)?;
    let opts = SearchOptions { tol: ctx.tol, descent: ctx.descent.clone(), ..SearchOptions::default() };
    let report = solve_curve(a, &opts)?;
    let mut v = to_value(&report)?;
    v["command"] = json!("points");
    if ctx.table {
        let cert = ctx.descent(a)?;
        v["table"] = json!(cert.render_table().lines().collect::<Vec<_>>());
    }
    Ok(v)
}

#[derive(Serialize)]
struct SurveyRow {
    a: u64,
    divisible_by_3: bool,
    q_3_mod_4: bool,
    minus_prime: bool,
    plus_prime: bool,
    descent_hypothesis: bool,
    eligible: bool,
    descent_rank: Option<u32>,
    w_global: Option<i8>,
    error: Option<String>,
    exit_code: Option<u8>,
}

fn survey_row(ctx: &Ctx, a: u64) -> SurveyRow {
    let ai = Int::from(a);
    let divisible_by_3 = a.is_multiple_of(3);
    let q_3_mod_4 = divisible_by_3 && (a / 3) % 4 == 3;
    let h = HypothesisRecord::of(&ai);
    let minus_prime = h.minus_prime != Primality::Composite;
    let plus_prime = h.plus_prime != Primality::Composite;
    let descent_hypothesis = h.holds();
    let eligible = descent_hypothesis && q_3_mod_4;
    let mut row = SurveyRow {
        a,
        divisible_by_3,
        q_3_mod_4,
        minus_prime,
        plus_prime,
        descent_hypothesis,
        eligible,
        descent_rank: None,
        w_global: None,
        error: None,
        exit_code: None,
    };
    let fail = |e: CliError, row: &mut SurveyRow| {
        row.error = Some(e.msg);
        row.exit_code = Some(e.code);
    };
    if descent_hypothesis {
        match run_descent_with(&ai, &ctx.descent) {
            Ok(c) => row.descent_rank = Some(c.rank),
            Err(e) => fail(e.into(), &mut row),
        }
    }
    if eligible {
        match root_hypothesis(&ai).and_then(|_| global_root_number(&ai)) {
            Ok(r) => row.w_global = Some(r.w_global),
            Err(e) => fail(e.into(), &mut row),
        }
    }
    row
}

fn cmd_survey(ctx: &Ctx, lo: u64, hi: u64) -> Result<Value, CliError> {
    if lo < 1 || hi > 10_000 {
        return Err(CliError::new(
            EXIT_HYPOTHESIS,
            format!("survey range must satisfy 1 <= lo, hi <= 10000; got [{lo}, {hi}]"),
        ));
    }
    let rows: Vec<SurveyRow> = (lo..=hi).into_par_iter().map(|a| survey_row(ctx, a)).collect();
    let eligible = rows.iter().filter(|r| r.eligible).count();
    let rank_one = rows.iter().filter(|r| r.descent_rank == Some(1)).count();
    Ok(json!({
        "command": "survey",
        "lo": lo,
        "hi": hi,
        "rows": rows,
        "eligible": eligible,
        "descent_rank_one": rank_one,
    }))
}

fn cmd_verify_identities(ctx: &Ctx, a_values: &[Int], samples: usize) -> Result<Value, CliError> {
    let points = sample_a_values(ctx.seed, samples);
    let checks = verify_param_identities(&points).map_err(|e| CliError::new(EXIT_INCONSISTENT, e.to_string()))?;
    let construction = a_values
        .iter()
        .map(|a| Ok(verify_construction_identities(&build_family(a)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let all_passed = checks.iter().all(|c| c.passed) && construction.iter().all(|r| r.all_passed());
    Ok(json!({
        "command": "verify-identities",
        "seed": ctx.seed,
        "samples": points.iter().map(rat_string).collect::<Vec<_>>(),
        "param_identities": checks,
        "construction": construction,
        "all_passed": all_passed,
    }))
}

fn execute(ctx: &Ctx, cmd: &Cmd) -> Result<Value, CliError> {
    let v = match cmd {
        Cmd::Analyze { a } => cmd_analyze(a)?,
        Cmd::Rank { a } => cmd_rank(ctx, a)?,
        Cmd::Rootnumber { a } => cmd_rootnumber(a)?,
        Cmd::Points { a } => cmd_points(ctx, a)?,
        Cmd::Survey { lo, hi } => cmd_survey(ctx, *lo, *hi)?,
        Cmd::VerifyIdentities { a, samples } => cmd_verify_identities(ctx, a, *samples)?,
    };
    Ok(stringify_numbers(v))
}

/// Exit status a finished report still implies: failed identities are inconsistencies.
fn report_code(v: &Value) -> u8 {
    match v.get("all_passed") {
        Some(Value::Bool(false)) => EXIT_INCONSISTENT,
        _ => 0,
    }
}

fn run(cli: &Cli) -> Result<Value, CliError> {
    if !(cli.tol > 0.0 && cli.tol <= 0.1) {
        return Err(CliError::new(EXIT_HYPOTHESIS, format!("--tol must lie in (0, 0.1], got {}", cli.tol)));
    }
    let ctx = Ctx {
        tol: cli.tol,
        descent: DescentOptions { witness_bound: cli.witness_bound.clone(), ..DescentOptions::default() },
        seed: cli.seed,
        table: cli.table,
        generic: cli.generic,
    };
    let config = json!({
        "tol": format!("{:e}", cli.tol),
        "witness_bound": cli.witness_bound.as_ref().map(|w| w.to_string()),
        "seed": cli.seed.to_string(),
        "table": cli.table,
        "generic": cli.generic,
    });
    let Some(dir) = &cli.cache_dir else {
        return execute(&ctx, &cli.cmd);
    };
    let key = cache::key(env!("CARGO_PKG_VERSION"), &format!("{:?}", cli.cmd), &config);
    let store = cache::Cache::new(dir.clone());
    if let Some(hit) = store.get(&key) {
        if !cli.verify_cache {
            return Ok(hit);
        }
        let fresh = execute(&ctx, &cli.cmd)?;
        if fresh != hit {
            return Err(CliError::new(EXIT_INCONSISTENT, format!("cached result {key} differs from a fresh run")));
        }
        return Ok(fresh);
    }
    let fresh = execute(&ctx, &cli.cmd)?;
    store.put(&key, &fresh).map_err(|e| CliError::new(EXIT_INCONSISTENT, format!("cache write failed: {e}")))?;
    Ok(fresh)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(v) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&v).expect("json"));
            } else {
                print!("{}", render::text(&v));
            }
            ExitCode::from(report_code(&v))
        }
        Err(e) => {
            if cli.json {
                println!("{}", json!({ "error": e.msg, "exit_code": e.code.to_string() }));
            }
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}
