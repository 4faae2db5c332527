use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use tanglescan_core::cutorder::{self, AnnealOptions, CutError, Cutting, GreedyOptions};
use tanglescan_core::engine::{self, BracketResult, Checks, EngineError, EngineOptions, Order};
use tanglescan_core::matchings::catalan;
use tanglescan_core::oracle::{self, OracleError};
use tanglescan_core::planar::{parse_pd, strands, Diagram, PlanarError, PlanarMap};
use tanglescan_core::skein::{Mode, Mutation};
use tanglescan_core::verify::{self, VerifyOptions};

mod bench;

#[derive(Parser)]
#[command(name = "tanglescan", version, about = "Kauffman bracket and Jones polynomial by tangle scanning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Deliberate defect for checking that verification notices it.
    #[arg(long, global = true, hide = true, value_enum)]
    mutate: Option<MutationArg>,
}

#[derive(Subcommand)]
enum Command {
    /// Bracket, pKBP or Jones polynomial of a diagram; expansion of a tangle.
    Compute(ComputeArgs),
    /// Girth of a cutting, with the square-root bound and state size.
    Girth(GirthArgs),
    /// Run the verification suites over a corpus.
    Verify(VerifyArgs),
    /// Time the engine on torus links and twist chains.
    Bench(bench::BenchArgs),
    /// Brute-force state sum.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MutationArg {
    DeltaSign,
    SmoothingSwap,
    CatalanIndex,
}

impl From<MutationArg> for Mutation {
    fn from(m: MutationArg) -> Self {
        match m {
            MutationArg::DeltaSign => Mutation::DeltaSign,
            MutationArg::SmoothingSwap => Mutation::SmoothingSwap,
            MutationArg::CatalanIndex => Mutation::CatalanIndex,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Bracket,
    Pkbp,
    Jones,
}

#[derive(Args)]
struct OrderArgs {
    /// greedy, anneal, exact, or @file with a cutting in JSON.
    #[arg(long, default_value = "greedy")]
    order: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Annealing iterations.
    #[arg(long, default_value_t = 2000)]
    iterations: usize,
    /// Greedy lookahead depth.
    #[arg(long, default_value_t = 1)]
    lookahead: usize,
}

#[derive(Args)]
struct ComputeArgs {
    /// PD code, or @path to a file holding one.
    #[arg(long)]
    pd: String,
    #[command(flatten)]
    order: OrderArgs,
    #[arg(long, value_enum, default_value = "bracket")]
    mode: ModeArg,
    /// One sign per component, `+` keeps and `-` reverses its traced direction.
    #[arg(long)]
    oriented: Option<String>,
    /// Exit 2 if a check fails.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    json: bool,
    /// Print frontier size and state size after every step.
    #[arg(long)]
    trace: bool,
    /// Also grade every intermediate tangle against its checkerboarding.
    #[arg(long)]
    deep: bool,
}

#[derive(Args)]
struct GirthArgs {
    #[arg(long)]
    pd: String,
    #[command(flatten)]
    order: OrderArgs,
    /// Write the cutting as JSON.
    #[arg(long)]
    export: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Corpus directory.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Skip diagrams with more crossings.
    #[arg(long)]
    max_n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Annealing iterations per diagram.
    #[arg(long, default_value_t = 200)]
    iterations: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    pd: String,
    #[arg(long, value_enum, default_value = "bracket")]
    mode: ModeArg,
    #[arg(long)]
    json: bool,
}

pub(crate) enum Failure {
    Input(String),
    Strict(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Strict(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Strict(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<PlanarError> for Failure {
    fn from(e: PlanarError) -> Self {
        Failure::Input(format!("{}: {e}", planar_kind(&e)))
    }
}

impl From<CutError> for Failure {
    fn from(e: CutError) -> Self {
        match e {
            CutError::Planar(p) => p.into(),
            e => Failure::Input(e.to_string()),
        }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Planar(p) => p.into(),
            EngineError::Cut(c) => c.into(),
            EngineError::WrongShape(_) => Failure::Input(e.to_string()),
            EngineError::Skein(_) | EngineError::NotDivisible(_) => Failure::Internal(e.to_string()),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        Failure::Input(e.to_string())
    }
}

fn planar_kind(e: &PlanarError) -> &'static str {
    match e {
        PlanarError::Parse { .. } => "ParseError",
        PlanarError::ArcMultiplicity { .. } => "ArcMultiplicityError",
        PlanarError::NonPlanar(_) => "NonPlanarError",
        PlanarError::Coloring(_) => "ColoringError",
        PlanarError::MissingOrientation(_) => "MissingOrientation",
    }
}

pub(crate) fn read_arg(s: &str) -> Result<String, Failure> {
    match s.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(|e| Failure::Input(format!("{path}: {e}"))),
        None => Ok(s.to_string()),
    }
}

fn diagram(pd: &str) -> Result<Diagram, Failure> {
    let d = parse_pd(&read_arg(pd)?)?;
    PlanarMap::build(&d)?;
    Ok(d)
}

fn order(a: &OrderArgs) -> Result<Order, Failure> {
    Ok(match a.order.as_str() {
        "greedy" => Order::Greedy(GreedyOptions { lookahead: a.lookahead }),
        "exact" => Order::Exact,
        "anneal" => Order::Anneal(AnnealOptions {
            seed: a.seed,
            iterations: a.iterations,
            ..Default::default()
        }),
        s if s.starts_with('@') => Order::Explicit(Cutting::from_json(&read_arg(s)?)?),
        s => return Err(Failure::Input(format!("unknown order {s:?}"))),
    })
}

fn flips(d: &Diagram, signs: &str) -> Result<Vec<bool>, Failure> {
    let map = PlanarMap::build(d)?;
    let want = strands(d, &map).len();
    let out: Vec<bool> = signs
        .chars()
        .filter(|c| !matches!(c, ',' | ' '))
        .map(|c| match c {
            '+' | '0' => Ok(false),
            '-' | '1' => Ok(true),
            c => Err(Failure::Input(format!("orientation sign {c:?} is not + or -"))),
        })
        .collect::<Result<_, _>>()?;
    if out.len() != want {
        return Err(Failure::Input(format!(
            "MissingOrientation: {} signs given for {want} components",
            out.len()
        )));
    }
    Ok(out)
}

fn checks_json(c: &Checks) -> Value {
    serde_json::to_value(c).expect("checks serialize")
}

fn checks_line(c: &Checks) -> String {
    let mark = |ok: bool| if ok { "ok" } else { "FAILED" };
    format!(
        "mod4 {}, span {}, storage {}, sqrt_bound {}, literal term bound {}",
        mark(c.mod4.passed),
        mark(c.span.passed),
        mark(c.storage.passed),
        mark(c.sqrt_bound.passed),
        if c.terms_literal.passed { "held" } else { "exceeded" }
    )
}

fn strict_gate(strict: bool, c: &Checks) -> Result<(), Failure> {
    let failed = c.failed();
    if strict && !failed.is_empty() {
        return Err(Failure::Strict(format!("checks failed: {}", failed.join(", "))));
    }
    Ok(())
}

fn print_trace(rows: &[engine::TraceRow]) {
    for (i, r) in rows.iter().enumerate() {
        eprintln!(
            "step {i}: {} g={} entries={} max_terms={}",
            serde_json::to_string(&r.step).unwrap(),
            r.g,
            r.entries,
            r.max_terms
        );
    }
}

fn bracket_json(r: &BracketResult) -> Value {
    json!({
        "polynomial": r.polynomial.to_string(),
        "coefficients": r.polynomial,
        "mode": r.mode,
        "n": r.n,
        "girth": r.girth,
        "peak_state_size": r.peak_state_size,
        "checks": checks_json(&r.checks),
        "timings": r.timings,
    })
}

fn compute(a: &ComputeArgs, mutation: Option<Mutation>) -> Result<(), Failure> {
    let d = diagram(&a.pd)?;
    let mode = match a.mode {
        ModeArg::Pkbp => Mode::Pkbp,
        _ => Mode::Bracket,
    };
    let mut opts = EngineOptions::new(mode).with_order(order(&a.order)?).with_mutation(mutation);
    opts.trace = a.trace;
    opts.deep_checks = a.deep;
    if !d.is_closed() {
        if a.mode == ModeArg::Jones {
            return Err(Failure::Input("Jones mode needs a closed diagram".into()));
        }
        let r = engine::expand(&d, &opts)?;
        print_trace(&r.trace);
        if a.json {
            let mut v = serde_json::to_value(&r).expect("result serializes");
            v.as_object_mut().unwrap().remove("trace");
            println!("{}", serde_json::to_string_pretty(&v).unwrap());
        } else {
            for (m, p) in &r.expansion {
                println!("{m} : {p}");
            }
            eprintln!("girth {}, peak state {}, {}", r.girth, r.peak_state_size, checks_line(&r.checks));
        }
        return strict_gate(a.strict, &r.checks);
    }
    if a.mode == ModeArg::Jones {
        let f = a.oriented.as_deref().map(|s| flips(&d, s)).transpose()?;
        let j = engine::jones(&d, f.as_deref(), &opts)?;
        print_trace(&j.bracket.trace);
        if a.json {
            let mut v = bracket_json(&j.bracket);
            let o = v.as_object_mut().unwrap();
            o.insert("mode".into(), json!("jones"));
            o.insert("polynomial".into(), json!(j.polynomial.to_string()));
            o.insert("coefficients".into(), serde_json::to_value(&j.polynomial).unwrap());
            o.insert("bracket".into(), json!(j.bracket.polynomial.to_string()));
            o.insert("writhe".into(), json!(j.writhe));
            o.insert("in_t".into(), json!(j.in_t));
            println!("{}", serde_json::to_string_pretty(&v).unwrap());
        } else {
            println!("{}", j.polynomial);
            if let Some(t) = &j.in_t {
                eprintln!("V(t) = {t}  (t = A^-4)");
            }
            eprintln!(
                "writhe {}, girth {}, peak state {}, {}",
                j.writhe,
                j.bracket.girth,
                j.bracket.peak_state_size,
                checks_line(&j.bracket.checks)
            );
        }
        return strict_gate(a.strict, &j.bracket.checks);
    }
    let r = engine::compute(&d, &opts)?;
    print_trace(&r.trace);
    if a.json {
        println!("{}", serde_json::to_string_pretty(&bracket_json(&r)).unwrap());
    } else {
        println!("{}", r.polynomial);
        eprintln!("girth {}, peak state {}, {}", r.girth, r.peak_state_size, checks_line(&r.checks));
    }
    strict_gate(a.strict, &r.checks)
}

fn girth(a: &GirthArgs) -> Result<(), Failure> {
    let d = diagram(&a.pd)?;
    let map = PlanarMap::build(&d)?;
    let c = engine::cutting_for(&map, &order(&a.order)?)?;
    let bound = cutorder::sqrt_bound(d.n());
    let states = catalan((c.girth / 2) as u64);
    if let Some(path) = &a.export {
        let text = serde_json::to_string_pretty(&c.to_json()).unwrap();
        fs::write(path, text + "\n").map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    }
    if a.json {
        let v = json!({
            "n": d.n(),
            "girth": c.girth,
            "bound": bound,
            "within_bound": cutorder::within_sqrt_bound(d.n(), c.girth),
            "catalan": states.to_string(),
            "steps": c.steps.len(),
        });
        println!("{}", serde_json::to_string_pretty(&v).unwrap());
    } else {
        println!("girth {}", c.girth);
        println!("bound {bound:.3} for n = {}", d.n());
        println!("catalan C_{} = {states}", c.girth / 2);
    }
    Ok(())
}

fn default_corpus() -> PathBuf {
    let here = PathBuf::from("corpus");
    if here.is_dir() {
        return here;
    }
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus"))
}

fn verify_cmd(a: &VerifyArgs, mutation: Option<Mutation>) -> Result<(), Failure> {
    let dir = a.corpus.clone().unwrap_or_else(default_corpus);
    let corpus = verify::load_corpus(&dir).map_err(|e| Failure::Input(e.to_string()))?;
    let v = VerifyOptions {
        max_n: a.max_n.unwrap_or(usize::MAX),
        seed: a.seed,
        anneal_iterations: a.iterations,
        mutation,
        ..Default::default()
    };
    let r = verify::run(&corpus, &v);
    if a.json {
        println!("{}", serde_json::to_string_pretty(&r).unwrap());
    } else {
        println!("{} diagrams", r.diagrams);
        for s in &r.suites {
            println!(
                "{:<11} {}  {} checked, {} failed",
                s.name,
                if s.passed { "pass" } else { "FAIL" },
                s.checked,
                s.failed
            );
            for f in &s.failures {
                println!("    {f}");
            }
        }
    }
    if r.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = r.suites.iter().filter(|s| !s.passed).map(|s| s.name.as_str()).collect();
        Err(Failure::Strict(format!("suites failed: {}", failed.join(", "))))
    }
}

fn oracle_cmd(a: &OracleArgs) -> Result<(), Failure> {
    let d = diagram(&a.pd)?;
    let mode = match a.mode {
        ModeArg::Bracket => Mode::Bracket,
        ModeArg::Pkbp => Mode::Pkbp,
        ModeArg::Jones => return Err(Failure::Input("the oracle computes bracket or pkbp".into())),
    };
    if d.is_closed() {
        let p = oracle::brute_force(&d, mode)?;
        if a.json {
            let v = json!({"polynomial": p.to_string(), "mode": mode, "n": d.n(), "states": 1u64 << d.n()});
            println!("{}", serde_json::to_string_pretty(&v).unwrap());
        } else {
            println!("{p}");
        }
    } else {
        let e = oracle::brute_force_tangle_expansion(&d, mode)?;
        if a.json {
            let m: serde_json::Map<String, Value> =
                e.iter().map(|(k, p)| (k.to_string(), json!(p.to_string()))).collect();
            println!("{}", serde_json::to_string_pretty(&json!({"expansion": m, "mode": mode})).unwrap());
        } else {
            for (m, p) in &e {
                println!("{m} : {p}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mutation = cli.mutate.map(Mutation::from);
    let result = match &cli.command {
        Command::Compute(a) => compute(a, mutation),
        Command::Girth(a) => girth(a),
        Command::Verify(a) => verify_cmd(a, mutation),
        Command::Bench(a) => bench::run(a, mutation),
        Command::Oracle(a) => oracle_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
