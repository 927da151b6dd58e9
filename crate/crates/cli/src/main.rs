//! `hquot`: recognize, compare and count quotients of generalized Heisenberg
//! groups.
//!
//! Exit codes: 0 decided (quotient, isomorphic, all checks passed), 1 decided
//! negative (not a quotient, nonisomorphic, a check failed), 2 input error or
//! budget exceeded.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use hquot::bimap::BimapKind;
use hquot::census::{run_census, CensusOptions};
use hquot::config::Config;
use hquot::ff::{FieldCtx, FieldDescriptor};
use hquot::group::{dot_product_bimap, Class2Group};
use hquot::invariants::profile;
use hquot::io::{read_json, to_json, write_json, BimapFile, GroupFile, IoError, IsoTestReport, KernelFile, OracleReport, RecognizeReport};
use hquot::isotest::{iso_test_descriptors, oracle_orbit_test, oracle_pseudo_isometry, Verdict};
use hquot::linalg::SubspaceEnumerator;
use hquot::recognize::{recognize, Stage};
use hquot::selftest::{run_all, CheckResult, Status};

#[derive(Parser)]
#[command(name = "hquot", version, about = "Quotients of generalized Heisenberg groups")]
struct Cli {
    /// JSON config with budgets, seed and worker count.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for census and batch checks.
    #[arg(long, global = true, env = "HQUOT_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a group file.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Decide whether a group is a quotient of a generalized Heisenberg group.
    Recognize {
        group: PathBuf,
        /// Include centroid, adjoint and tensor data.
        #[arg(long)]
        verbose: bool,
    },
    /// Decide whether two groups are isomorphic.
    Isotest {
        first: PathBuf,
        second: PathBuf,
        /// Cross-check with a brute-force oracle.
        #[arg(long, value_enum)]
        oracle: Option<OracleKind>,
    },
    /// Count isomorphism classes of quotients of H_1(GF(p^d)) with center of dimension s.
    Census {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        s: usize,
        /// Pairs pushed through isomorphism testing.
        #[arg(long, default_value_t = 0)]
        validate_pairs: usize,
        #[arg(long)]
        with_invariants: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Invariant profile of a group.
    Invariants { group: PathBuf },
    /// Run the acceptance checks.
    Selftest {
        /// Subspace budget for the census checks; 0 skips them.
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct HeisenbergParams {
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long)]
    p: u32,
    #[arg(long)]
    d: usize,
}

#[derive(Subcommand)]
enum GenKind {
    /// H_m(GF(p^d)).
    Heisenberg {
        #[command(flatten)]
        params: HeisenbergParams,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// A quotient of a group file by a kernel inside its center.
    Quotient {
        #[arg(long)]
        of: PathBuf,
        #[arg(long)]
        kernel_file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The Brahana group of a bimap.
    Brahana {
        /// Use the dot product on K^m.
        #[arg(long, conflicts_with = "bimap")]
        dot: bool,
        /// A bimap file instead.
        #[arg(long)]
        bimap: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long)]
        p: Option<u32>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// H_m(GF(p^d)) modulo a seeded uniform kernel with quotient of dimension s.
    RandomKernel {
        #[command(flatten)]
        params: HeisenbergParams,
        #[arg(long)]
        s: usize,
        /// Also write the kernel.
        #[arg(long)]
        kernel_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleKind {
    Orbit,
    Pseudo,
}

/// Something to print and an exit code.
struct Outcome {
    json: String,
    code: u8,
}

impl Outcome {
    fn new<T: Serialize>(value: &T, code: u8) -> Self {
        Outcome { json: to_json(value), code }
    }

    fn error(msg: impl std::fmt::Display) -> Self {
        Outcome::new(&json!({ "error": msg.to_string() }), 2)
    }
}

type CmdResult = Result<Outcome, Outcome>;

fn input<T>(r: Result<T, IoError>) -> Result<T, Outcome> {
    r.map_err(Outcome::error)
}

fn emit<T: Serialize>(value: &T, out: &Option<PathBuf>, code: u8) -> CmdResult {
    match out {
        Some(path) => {
            input(write_json(path, value))?;
            Ok(Outcome::new(&json!({ "written": path.display().to_string() }), code))
        }
        None => Ok(Outcome::new(value, code)),
    }
}

fn field(p: u32, d: usize) -> Result<FieldCtx, Outcome> {
    FieldCtx::new(p, d).map_err(Outcome::error)
}

fn load_group(path: &PathBuf) -> Result<(GroupFile, Class2Group), Outcome> {
    let file: GroupFile = input(read_json(path))?;
    let g = input(file.to_group())?;
    Ok((file, g))
}

fn gen(kind: GenKind, cfg: &Config) -> CmdResult {
    match kind {
        GenKind::Heisenberg { params, out } => {
            let k = field(params.p, params.d)?;
            let g = Class2Group::heisenberg(params.m, &k);
            emit(&GroupFile::from_group(&g, Some(&k)), &out, 0)
        }
        GenKind::Quotient { of, kernel_file, out } => {
            let (file, g) = load_group(&of)?;
            let kernel: KernelFile = input(read_json(&kernel_file))?;
            let n = input(kernel.subspace_for(&file))?;
            let q = g.quotient_group(&n).map_err(Outcome::error)?;
            emit(&GroupFile::from_group(&q, None), &out, 0)
        }
        GenKind::Brahana { dot, bimap, m, p, d, out } => {
            let c = match (dot, bimap) {
                (true, _) => {
                    let (p, d) = p.zip(d).ok_or_else(|| Outcome::error("--dot needs --p and --d"))?;
                    dot_product_bimap(m, &field(p, d)?)
                }
                (false, Some(path)) => {
                    let file: BimapFile = input(read_json(&path))?;
                    input(file.to_bimap())?
                }
                (false, None) => return Err(Outcome::error("give --dot or --bimap")),
            };
            if c.kind() == BimapKind::Alternating && c.dim_u() != c.dim_v() {
                return Err(Outcome::error("bimap is inconsistent"));
            }
            emit(&GroupFile::from_group(&Class2Group::brahana(&c), None), &out, 0)
        }
        GenKind::RandomKernel { params, s, kernel_out, out } => {
            let k = field(params.p, params.d)?;
            if s == 0 || s > params.d {
                return Err(Outcome::error(format!("s must lie in 1..={}", params.d)));
            }
            let en = SubspaceEnumerator::new(k.prime_field(), params.d, params.d - s, cfg.max_subspaces)
                .map_err(Outcome::error)?;
            let idx = ChaCha8Rng::seed_from_u64(cfg.seed).gen_range(0..en.total());
            let n = en.nth(idx).expect("index in range");
            if let Some(path) = kernel_out {
                input(write_json(&path, &KernelFile { field: Some(k.descriptor()), basis: n.basis_vecs() }))?;
            }
            let q = Class2Group::heisenberg(params.m, &k).quotient_group(&n).map_err(Outcome::error)?;
            emit(&GroupFile::from_group(&q, None), &out, 0)
        }
    }
}

fn recognize_cmd(path: &PathBuf, verbose: bool, cfg: &Config) -> CmdResult {
    let (_, g) = load_group(path)?;
    let result = recognize(&g);
    let report = RecognizeReport::new(&g, &result, verbose, cfg.seed);
    Ok(Outcome::new(&report, if result.is_ok() { 0 } else { 1 }))
}

fn isotest_cmd(a: &PathBuf, b: &PathBuf, oracle: Option<OracleKind>, cfg: &Config) -> CmdResult {
    let (_, g1) = load_group(a)?;
    let (_, g2) = load_group(b)?;
    let fail = |which: &str, e: hquot::recognize::NotAQuotient| {
        Outcome::new(&json!({ "error": format!("{which} group: {}", e.reason), "stage": e.stage }), 1)
    };
    let d1 = recognize(&g1).map_err(|e| fail("first", e))?;
    let d2 = recognize(&g2).map_err(|e| fail("second", e))?;
    let verdict = iso_test_descriptors(&g1, &d1, &g2, &d2).map_err(Outcome::error)?;
    let mut report = IsoTestReport::new(&verdict);
    if let Some(kind) = oracle {
        let (name, truth) = match kind {
            OracleKind::Orbit => {
                let same_floor = g1.log_order() == g2.log_order() && d1.is_floor(d2.m, d2.p(), d2.d());
                let t = same_floor
                    && oracle_orbit_test(&d1.field, &d1.kernel, &d2.kernel, cfg.max_field_order as u128 * d1.d() as u128)
                        .map_err(Outcome::error)?;
                ("orbit", t)
            }
            OracleKind::Pseudo => {
                ("pseudo", oracle_pseudo_isometry(g1.bimap(), g2.bimap(), cfg.gl_guard as u128).map_err(Outcome::error)?)
            }
        };
        let agrees = truth == verdict.is_isomorphic();
        report.oracle = Some(OracleReport { kind: name.into(), isomorphic: truth, agrees });
        if !agrees {
            return Err(Outcome::new(&report, 2));
        }
    }
    let code = if matches!(verdict, Verdict::Isomorphic(_)) { 0 } else { 1 };
    Ok(Outcome::new(&report, code))
}

fn census_cmd(p: u32, d: usize, s: usize, validate_pairs: usize, with_invariants: bool, out: &Option<PathBuf>, cfg: &Config) -> CmdResult {
    let opts = CensusOptions { config: cfg.clone(), validate_pairs, with_invariants };
    let report = run_census(p, d, s, &opts).map_err(Outcome::error)?;
    let ok = report.checks.all() && report.validation.as_ref().is_none_or(|v| v.passed());
    emit(&report, out, if ok { 0 } else { 1 })
}

fn invariants_cmd(path: &PathBuf, cfg: &Config) -> CmdResult {
    let (_, g) = load_group(path)?;
    match profile(&g, cfg.seed) {
        Ok(p) => Ok(Outcome::new(&p, 0)),
        Err(e) => Ok(Outcome::new(&json!({ "error": e.to_string(), "stage": Stage::ShapeCertification }), 1)),
    }
}

/// Fixtures with a corrupted and a foreign modulus must be refused.
fn fixture_check() -> CheckResult {
    let k = FieldCtx::new(3, 2).expect("GF(9)");
    let group = GroupFile::from_group(&Class2Group::heisenberg(1, &k), Some(&k));
    let corrupted = KernelFile { field: Some(FieldDescriptor { p: 3, d: 2, modulus: vec![1, 1, 1] }), basis: vec![vec![1, 0]] };
    let foreign = KernelFile { field: Some(FieldDescriptor { p: 3, d: 2, modulus: vec![2, 2, 1] }), basis: vec![vec![1, 0]] };
    let (status, detail) = match (corrupted.subspace_for(&group), foreign.subspace_for(&group)) {
        (Err(IoError::Field(a)), Err(IoError::ContextMismatch { .. })) => {
            (Status::Pass, format!("corrupted modulus refused ({a}); foreign modulus reported as a field-context mismatch"))
        }
        (a, b) => (Status::Fail, format!("fixtures accepted: {:?} / {:?}", a.is_ok(), b.is_ok())),
    };
    CheckResult { id: 11, name: "Fixture validation", status, detail, elapsed_ms: 0, limit_ms: 0 }
}

fn selftest_cmd(budget: Option<u64>, as_json: bool, cfg: &Config) -> CmdResult {
    let mut cfg = cfg.clone();
    if let Some(b) = budget {
        cfg.max_subspaces = b;
    }
    let mut results = run_all(&cfg);
    results.push(fixture_check());
    let failed = results.iter().any(|r| r.status == Status::Fail);
    let code = if failed { 1 } else { 0 };
    if as_json {
        return Ok(Outcome::new(&results, code));
    }
    let mut text: String = results.iter().map(|r| format!("{r}\n")).collect();
    let passed = results.iter().filter(|r| r.status == Status::Pass).count();
    let skipped = results.iter().filter(|r| r.status == Status::Skipped).count();
    text.push_str(&format!("selftest: {passed} passed, {skipped} skipped, {} failed\n", results.len() - passed - skipped));
    Ok(Outcome { json: text, code })
}

fn load_config(cli: &Cli) -> Result<Config, Outcome> {
    let mut cfg: Config = match &cli.config {
        Some(path) => input(read_json(path))?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.workers.is_some() {
        cfg.workers = cli.workers;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> CmdResult {
    let cfg = load_config(&cli)?;
    let is_selftest = matches!(cli.command, Command::Selftest { .. });
    if !is_selftest {
        cfg.validate().map_err(Outcome::error)?;
    }
    if let Some(n) = cfg.workers.filter(|&n| n > 0) {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(Outcome::error)?;
    }
    match cli.command {
        Command::Gen { kind } => gen(kind, &cfg),
        Command::Recognize { group, verbose } => recognize_cmd(&group, verbose, &cfg),
        Command::Isotest { first, second, oracle } => isotest_cmd(&first, &second, oracle, &cfg),
        Command::Census { p, d, s, validate_pairs, with_invariants, out } => {
            census_cmd(p, d, s, validate_pairs, with_invariants, &out, &cfg)
        }
        Command::Invariants { group } => invariants_cmd(&group, &cfg),
        Command::Selftest { budget, json } => selftest_cmd(budget, json, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { 2 } else { 0 };
            return ExitCode::from(code);
        }
    };
    let outcome = run(cli).unwrap_or_else(|e| e);
    print!("{}", outcome.json);
    ExitCode::from(outcome.code)
}
