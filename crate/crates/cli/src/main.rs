//! `treecore`: cores of pairs of splittings of a free group from the command line.
//!
//! Exit codes: 0 success, 1 failed validation or bad reference, 2 malformed
//! input, 3 orbit cap exceeded, 4 crosscheck violation.

use std::fs;
use std::io::Write as _;
use std::path::{Component, Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use treecore::bass_serre::CheckStatus;
use treecore::corecomplex::{
    compute_core, counts, intersection_numbers, scott_crossing, Certifier, CoreComplex, Pair, Tri,
};
use treecore::lineactions::{abelian_core_covolume, LatticeHom};
use treecore::oracle::crosscheck;
use treecore::session::SessionFile;
use treecore::{Error, Word};

#[derive(Parser)]
#[command(name = "treecore", version, about = "Cores of products of Bass-Serre trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PairArgs {
    /// Session file.
    file: PathBuf,
    /// Label of the first splitting.
    label1: String,
    /// Label of the second splitting.
    label2: String,
}

#[derive(Subcommand)]
enum Command {
    /// Check every splitting of a session.
    Validate { file: PathBuf },
    /// Compute the core and its invariants.
    Core {
        #[command(flatten)]
        pair: PairArgs,
        /// Certificate search radius; 0 disables the search.
        #[arg(long)]
        budget: Option<usize>,
        /// Write the core as JSON to this path inside the output directory.
        #[arg(long)]
        emit_json: Option<PathBuf>,
        /// Write the quotient as Graphviz DOT to this path inside the output directory.
        #[arg(long)]
        emit_dot: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Strong intersection numbers in both orders.
    Si {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Whether the edges `e1 = g1 C1` and `e2 = g2 C2` cross, by their representatives.
    Crossing {
        #[command(flatten)]
        pair: PairArgs,
        e1: String,
        e2: String,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Core of two actions on lines given by a 2 x n integer matrix (JSON).
    Linecore { file: PathBuf },
    /// Compare a core against the brute-force oracle.
    Crosscheck {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        radius: Option<usize>,
        /// Check this core artifact instead of recomputing.
        #[arg(long)]
        core: Option<PathBuf>,
        #[arg(long)]
        budget: Option<usize>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::InvalidGenerator { .. } => 2,
            Error::BudgetExceeded { .. } => 3,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

type CliResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("treecore: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cmd: Command) -> CliResult {
    match cmd {
        Command::Validate { file } => validate(&file),
        Command::Core { pair, budget, emit_json, emit_dot, out_dir } => {
            core(&pair, budget, emit_json.as_deref(), emit_dot.as_deref(), &out_dir)
        }
        Command::Si { pair } => si(&pair),
        Command::Crossing { pair, e1, e2, budget } => crossing(&pair, &e1, &e2, budget),
        Command::Linecore { file } => linecore(&file),
        Command::Crosscheck { pair, radius, core, budget } => check(&pair, radius, core.as_deref(), budget),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail(2, format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<SessionFile, Failure> {
    Ok(SessionFile::parse(&read(path)?)?)
}

/// Budget precedence: flag, then `TREECORE_BUDGET`, then the session file.
fn budget_override(flag: Option<usize>) -> Result<Option<usize>, Failure> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("TREECORE_BUDGET") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| fail(2, format!("TREECORE_BUDGET={v:?} is not a number"))),
        Err(_) => Ok(None),
    }
}

fn validate(file: &Path) -> CliResult {
    let session = load(file)?;
    let mut ok = true;
    for report in session.validate_all() {
        print!("{report}");
        for c in report.checks.iter().filter(|c| c.status == CheckStatus::Fail) {
            eprintln!("{}: {} failed: {}", report.label, c.name, c.detail);
        }
        ok &= report.passed();
    }
    Ok(if ok { 0 } else { 1 })
}

fn tri(t: Tri) -> &'static str {
    match t {
        Tri::True => "TRUE",
        Tri::False => "FALSE",
        Tri::Unknown => "UNKNOWN",
    }
}

/// Resolve an output path inside `dir`, refusing anything that escapes it.
fn output_path(dir: &Path, rel: &Path) -> Result<PathBuf, Failure> {
    let escapes = rel.components().any(|c| !matches!(c, Component::Normal(_) | Component::CurDir));
    if escapes {
        return Err(fail(2, format!("{} leaves the output directory", rel.display())));
    }
    Ok(dir.join(rel))
}

/// Write via a temporary sibling and rename, so readers never see a partial file.
fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let io = |e: std::io::Error| fail(1, format!("{}: {e}", path.display()));
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io)?;
    }
    let tmp = path.with_extension("tmp~");
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(contents.as_bytes()).map_err(io)?;
    f.sync_all().map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

fn core(args: &PairArgs, budget: Option<usize>, json: Option<&Path>, dot: Option<&Path>, out: &Path) -> CliResult {
    let session = load(&args.file)?;
    let (t1, t2) = (session.splitting(&args.label1)?, session.splitting(&args.label2)?);
    let pair = Pair::new(&t1, &t2);
    let opts = session.core_options(budget_override(budget)?);
    let core = compute_core(pair, &opts)?;
    let (i, si1, si2) = intersection_numbers(pair, &core);

    println!("status {}", format!("{:?}", core.status).to_uppercase());
    match i {
        Some(i) => println!("i {i}"),
        None => println!("i [{}, {}]", counts(&core.lower)[2], counts(&core.upper)[2]),
    }
    println!("si1 {si1}");
    println!("si2 {si2}");
    let connected = core.connected.map_or("UNKNOWN".to_string(), |c| c.to_string());
    println!("connected {connected}");
    println!("compatible {}", tri(core.is_compatible()));
    println!("twice_light {}", core.twice_light.len());
    let [lv, le, ls] = counts(&core.lower);
    let [uv, ue, us] = counts(&core.upper);
    println!("lower {lv} {le} {ls}");
    println!("upper {uv} {ue} {us}");
    if core.jsj_fast_path {
        println!("fast_path asserted");
    }

    if let Some(p) = json {
        let text = serde_json::to_string_pretty(&core.to_json()).expect("json");
        write_atomic(&output_path(out, p)?, &text)?;
    }
    if let Some(p) = dot {
        write_atomic(&output_path(out, p)?, &core.to_dot(pair))?;
    }
    Ok(0)
}

fn si(args: &PairArgs) -> CliResult {
    let session = load(&args.file)?;
    let (t1, t2) = (session.splitting(&args.label1)?, session.splitting(&args.label2)?);
    println!("si1 {}", treecore::minsubtree::strong_intersection(&t1, &t2));
    println!("si2 {}", treecore::minsubtree::strong_intersection(&t2, &t1));
    Ok(0)
}

fn crossing(args: &PairArgs, e1: &str, e2: &str, budget: Option<usize>) -> CliResult {
    let session = load(&args.file)?;
    let (t1, t2) = (session.splitting(&args.label1)?, session.splitting(&args.label2)?);
    let word = |s: &str| Word::parse(s, session.rank).map_err(|e| fail(1, format!("bad edge reference {s:?}: {e}")));
    let (g1, g2) = (word(e1)?, word(e2)?);
    let (e1, e2) = (t1.edge(&g1), t2.edge(&g2));
    let pair = Pair::new(&t1, &t2);
    let opts = session.core_options(budget_override(budget)?);
    let certifier = Certifier::new(pair, opts.budget);
    if let Some(certs) = certifier.square_certificates(&e1, &e2) {
        println!("TRUE");
        for c in certs {
            println!("certificate {} l1 {} l2 {}", c.h, c.l1, c.l2);
        }
        return Ok(0);
    }
    let core = compute_core(pair, &opts)?;
    println!("{}", tri(scott_crossing(&certifier, &e1, &e2, Some(&core))));
    println!("core {}", format!("{:?}", core.status).to_uppercase());
    Ok(0)
}

fn linecore(file: &Path) -> CliResult {
    let m: LatticeHom = serde_json::from_str(&read(file)?).map_err(|e| fail(2, e.to_string()))?;
    let cov = abelian_core_covolume(&m)?;
    println!("{}", serde_json::to_string(&cov).expect("json"));
    Ok(0)
}

fn check(args: &PairArgs, radius: Option<usize>, core_file: Option<&Path>, budget: Option<usize>) -> CliResult {
    let session = load(&args.file)?;
    let (t1, t2) = (session.splitting(&args.label1)?, session.splitting(&args.label2)?);
    let pair = Pair::new(&t1, &t2);
    let core = match core_file {
        Some(p) => {
            let v: serde_json::Value = serde_json::from_str(&read(p)?).map_err(|e| fail(2, e.to_string()))?;
            let c = CoreComplex::from_json(&v)?;
            if c.labels != (args.label1.clone(), args.label2.clone()) {
                return Err(fail(1, format!("core artifact is for {:?}", c.labels)));
            }
            c
        }
        None => compute_core(pair, &session.core_options(budget_override(budget)?))?,
    };
    let report = crosscheck(&core, pair, radius.unwrap_or_else(|| session.crosscheck_radius()));
    println!("{}", serde_json::to_string_pretty(&report).expect("json"));
    Ok(if report.clean() { 0 } else { 4 })
}
