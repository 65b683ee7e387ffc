//! The `buchi` command line: gen, solve, verify, bench.
//!
//! Exit codes: 0 success, 1 a requested check failed, 2 unreadable or
//! malformed input, 3 internal invariant violation, 64 bad flags, 65 oracle
//! strategy space above the cap.

pub mod report;

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use buchi_core::generators::{gen_planted_trap, generate, Family, GenSpec};
use buchi_core::oracle::{oracle_solve, OracleError, DEFAULT_CAP};
use buchi_core::strategy::{parse_strategies, write_strategy};
use buchi_core::{
    extract_strategies, parse_game, serialize_game, solve, verify_player1, verify_player2,
    Algorithm, GameGraph, Player, SolveResult, StateSet,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use report::{BenchRow, RunReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_ORACLE_CAP: i32 = 65;

#[derive(Parser, Debug)]
#[command(
    name = "buchi",
    version,
    about = "Büchi game solver and benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a generated game to stdout or a file.
    Gen(GenArgs),
    /// Solve a game: prints w2 then w1 as sorted id lists.
    Solve(SolveArgs),
    /// Check a game with the oracle, across solvers, or against strategies.
    Verify(VerifyArgs),
    /// Solve generated families at several sizes and emit CSV.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct FamilyArgs {
    /// Out-degree bound for random and planted families.
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    #[arg(long = "trap-size", default_value_t = 1)]
    trap_size: usize,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_parser = parse_family)]
    family: Family,
    /// Gadget count for the chains, state count otherwise.
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    params: FamilyArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MetricsFormat {
    Json,
    None,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long, value_parser = parse_algorithm, default_value = "classical")]
    algorithm: Algorithm,
    /// Game file, or `-` for stdin.
    #[arg(long)]
    input: String,
    #[arg(long, value_enum, default_value_t = MetricsFormat::None)]
    metrics: MetricsFormat,
    /// Write the metrics report here instead of stderr.
    #[arg(long = "metrics-out")]
    metrics_out: Option<PathBuf>,
    /// Write both extracted strategies to this file.
    #[arg(long = "emit-strategies")]
    emit_strategies: Option<PathBuf>,
    #[arg(long = "verify-strategies")]
    verify_strategies: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    input: String,
    /// Compare against brute-force enumeration (tiny graphs only).
    #[arg(long)]
    oracle: bool,
    #[arg(long = "oracle-cap", default_value_t = DEFAULT_CAP)]
    oracle_cap: u128,
    /// Run every solver, compare partitions and verify extracted strategies.
    #[arg(long)]
    cross: bool,
    /// Strategy file to check against the solved winning regions.
    #[arg(long)]
    strategies: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_parser = parse_family)]
    family: Family,
    /// Comma-separated sizes.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', value_parser = parse_algorithm,
          default_value = "classical,alternative,improved,dovetail")]
    algorithms: Vec<Algorithm>,
    #[command(flatten)]
    params: FamilyArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse()
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse()
}

/// A failed command: exit code plus message for stderr.
struct Failure(i32, String);

type CmdResult = Result<i32, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure(EXIT_USAGE, msg.into())
}

/// Runs the CLI with `args` (including the program name).
pub fn run<I, T>(
    args: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let res = match cli.command {
        Command::Gen(a) => cmd_gen(a, stdout),
        Command::Solve(a) => cmd_solve(a, stdin, stdout, stderr),
        Command::Verify(a) => cmd_verify(a, stdin, stdout),
        Command::Bench(a) => cmd_bench(a, stdout),
    };
    match res {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            code
        }
    }
}

fn spec(family: Family, n: usize, p: &FamilyArgs) -> GenSpec {
    GenSpec {
        family,
        n,
        d: p.d,
        seed: p.seed,
        buchi_density: p.density,
        trap_size: p.trap_size,
    }
}

fn write_output(out: Option<&Path>, stdout: &mut dyn Write, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| {
            Failure(
                EXIT_CHECK_FAILED,
                format!("cannot write {}: {e}", path.display()),
            )
        }),
        None => stdout
            .write_all(bytes)
            .map_err(|e| Failure(EXIT_CHECK_FAILED, format!("cannot write output: {e}"))),
    }
}

fn cmd_gen(a: GenArgs, stdout: &mut dyn Write) -> CmdResult {
    let mut bytes = Vec::new();
    let g = if a.family == Family::PlantedTrap {
        let p = gen_planted_trap(a.n, a.params.trap_size, a.params.seed)
            .map_err(|e| usage(e.to_string()))?;
        let ids: Vec<String> = p.planted.iter().map(|s| s.to_string()).collect();
        bytes.extend(format!("# planted {}\n", ids.join(" ")).into_bytes());
        p.graph
    } else {
        generate(&spec(a.family, a.n, &a.params)).map_err(|e| usage(e.to_string()))?
    };
    bytes.extend(serialize_game(&g));
    write_output(a.out.as_deref(), stdout, &bytes)?;
    Ok(EXIT_OK)
}

fn read_game(input: &str, stdin: &mut dyn Read) -> Result<GameGraph, Failure> {
    let bytes = if input == "-" {
        let mut buf = Vec::new();
        stdin
            .read_to_end(&mut buf)
            .map_err(|e| Failure(EXIT_PARSE, format!("cannot read stdin: {e}")))?;
        buf
    } else {
        fs::read(input).map_err(|e| Failure(EXIT_PARSE, format!("cannot read {input}: {e}")))?
    };
    parse_game(&bytes).map_err(|e| Failure(EXIT_PARSE, format!("{input}: {e}")))
}

/// Solves, turning a panic (a failed internal assertion) into exit code 3.
fn guarded_solve(
    g: &GameGraph,
    a: Algorithm,
) -> Result<(SolveResult, std::time::Duration), Failure> {
    let start = Instant::now();
    catch_unwind(AssertUnwindSafe(|| solve(g, a)))
        .map(|r| (r, start.elapsed()))
        .map_err(|_| {
            Failure(
                EXIT_INVARIANT,
                format!("internal invariant violated while solving with {a}"),
            )
        })
}

fn id_line(s: &StateSet) -> String {
    s.to_sorted_vec()
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_solve(
    a: SolveArgs,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CmdResult {
    let g = read_game(&a.input, stdin)?;
    let (r, wall) = guarded_solve(&g, a.algorithm)?;
    let out = format!("{}\n{}\n", id_line(&r.w2), id_line(&r.w1));
    write_output(None, stdout, out.as_bytes())?;

    if a.emit_strategies.is_some() || a.verify_strategies {
        let (sigma1, pi2) = extract_strategies(&g, &r)
            .map_err(|e| Failure(EXIT_INVARIANT, format!("strategy extraction failed: {e}")))?;
        if a.verify_strategies {
            verify_player1(&g, &r.w1, &sigma1)
                .map_err(|e| Failure(EXIT_INVARIANT, format!("player-1 strategy rejected: {e}")))?;
            verify_player2(&g, &r.w2, &pi2)
                .map_err(|e| Failure(EXIT_INVARIANT, format!("player-2 strategy rejected: {e}")))?;
        }
        if let Some(path) = &a.emit_strategies {
            let text = write_strategy(&sigma1) + &write_strategy(&pi2);
            write_output(Some(path), stdout, text.as_bytes())?;
        }
    }

    if a.metrics == MetricsFormat::Json {
        let report = RunReport::new(&g, &r, wall);
        let json = serde_json::to_string(&report).expect("report serializes") + "\n";
        match &a.metrics_out {
            Some(path) => write_output(Some(path), stdout, json.as_bytes())?,
            None => stderr
                .write_all(json.as_bytes())
                .map_err(|e| Failure(EXIT_CHECK_FAILED, format!("cannot write metrics: {e}")))?,
        }
    }
    Ok(EXIT_OK)
}

fn cmd_verify(a: VerifyArgs, stdin: &mut dyn Read, stdout: &mut dyn Write) -> CmdResult {
    let g = read_game(&a.input, stdin)?;
    let cross = a.cross || (!a.oracle && a.strategies.is_none());
    let mut problems: Vec<String> = Vec::new();
    let (reference, _) = guarded_solve(&g, Algorithm::Classical)?;

    if a.oracle {
        let v = oracle_solve(&g, a.oracle_cap).map_err(|e| match e {
            OracleError::TooLarge { product, cap } => Failure(
                EXIT_ORACLE_CAP,
                format!("strategy space has {product} pairs, above the oracle cap of {cap}"),
            ),
        })?;
        if v.w1 != v.w1_forall_exists {
            problems.push(format!(
                "oracle: quantifier orders disagree on {}",
                id_line(
                    &v.w1
                        .difference(&v.w1_forall_exists)
                        .union(&v.w1_forall_exists.difference(&v.w1))
                )
            ));
        }
        for alg in Algorithm::ALL {
            let (r, _) = guarded_solve(&g, alg)?;
            if r.w1 != v.w1 {
                let diff = r.w1.difference(&v.w1).union(&v.w1.difference(&r.w1));
                problems.push(format!(
                    "oracle: {alg} disagrees at states {}",
                    id_line(&diff)
                ));
            }
        }
        let _ = writeln!(
            stdout,
            "oracle: {} strategy pairs examined",
            v.strategy_pairs_examined
        );
    }

    if cross {
        for alg in Algorithm::ALL {
            let (r, _) = guarded_solve(&g, alg)?;
            if r.w1 != reference.w1 {
                let diff =
                    r.w1.difference(&reference.w1)
                        .union(&reference.w1.difference(&r.w1));
                problems.push(format!(
                    "cross: {alg} disagrees with classical at states {}",
                    id_line(&diff)
                ));
                continue;
            }
            match extract_strategies(&g, &r) {
                Ok((s1, p2)) => {
                    if let Err(e) = verify_player1(&g, &r.w1, &s1) {
                        problems.push(format!("cross: {alg} player-1 strategy: {e}"));
                    }
                    if let Err(e) = verify_player2(&g, &r.w2, &p2) {
                        problems.push(format!("cross: {alg} player-2 strategy: {e}"));
                    }
                }
                Err(e) => problems.push(format!("cross: {alg} extraction: {e}")),
            }
        }
    }

    if let Some(path) = &a.strategies {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure(EXIT_PARSE, format!("cannot read {}: {e}", path.display())))?;
        let strategies = parse_strategies(&text, g.n())
            .map_err(|e| Failure(EXIT_PARSE, format!("{}: {e}", path.display())))?;
        if strategies.is_empty() {
            problems.push("strategies: file holds no strategy block".into());
        }
        for (i, s) in strategies.iter().enumerate() {
            let res = s.check_legal(&g).and_then(|()| match s.player {
                Player::One => verify_player1(&g, &reference.w1, s),
                Player::Two => verify_player2(&g, &reference.w2, s),
            });
            if let Err(e) = res {
                problems.push(format!(
                    "strategies: block {} (player {}): {e}",
                    i + 1,
                    s.player
                ));
            }
        }
    }

    if problems.is_empty() {
        let _ = writeln!(stdout, "ok");
        Ok(EXIT_OK)
    } else {
        for p in &problems {
            let _ = writeln!(stdout, "FAILED {p}");
        }
        Ok(EXIT_CHECK_FAILED)
    }
}

fn cmd_bench(a: BenchArgs, stdout: &mut dyn Write) -> CmdResult {
    if a.sizes.is_empty() {
        return Err(usage("--sizes needs at least one size"));
    }
    if a.algorithms.is_empty() {
        return Err(usage("--algorithms needs at least one algorithm"));
    }
    let graphs: Vec<(usize, GameGraph)> = a
        .sizes
        .iter()
        .map(|&n| {
            generate(&spec(a.family, n, &a.params))
                .map(|g| (n, g))
                .map_err(|e| usage(e.to_string()))
        })
        .collect::<Result<_, _>>()?;
    let cells: Vec<(usize, usize)> = (0..graphs.len())
        .flat_map(|gi| (0..a.algorithms.len()).map(move |ai| (gi, ai)))
        .collect();
    // Cells run in parallel; collect() keeps the input order.
    let rows: Vec<Result<BenchRow, Failure>> = cells
        .par_iter()
        .map(|&(gi, ai)| {
            let (size, g) = &graphs[gi];
            let (r, wall) = guarded_solve(g, a.algorithms[ai])?;
            let report = RunReport::new(g, &r, wall);
            Ok(BenchRow::new(
                a.family.name(),
                *size,
                a.params.seed,
                &report,
            ))
        })
        .collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row?).expect("csv rows serialize");
    }
    let bytes = w.into_inner().expect("in-memory csv");
    write_output(a.out.as_deref(), stdout, &bytes)?;
    Ok(EXIT_OK)
}
