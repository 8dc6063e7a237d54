//! Command-line front end. [`run`] is the whole program; `main` only wires
//! it to the process streams and exit code.
//!
//! Exit codes: 0 success (valid system, witness found, all rows pass),
//! 1 negative answer (conflicts, nothing found, failing rows), 2 usage or
//! input error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use pbforge::blocks::{stats, verify, BlockSystem};
use pbforge::bounds::{bound_for_uniform, theorem1_bound, BoundResult};
use pbforge::codec::{
    bound_csv, emit_int_blocks, emit_letters, parse_int_blocks, parse_letters, read_json,
    write_json, BoundRow, LetterAlphabet,
};
use pbforge::fixtures::{check_table, load_dir, Fixture};
use pbforge::search::{
    kappa_lower_bound, node_cap_from_env, search, KappaConfig, Mode, SearchConfig, SearchResult,
    Status,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "pbforge",
    version,
    about = "Verify, search for and catalogue product blocks over GF(q)"
)]
struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Letters,
    Ints,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum AlphabetArg {
    T5x,
    T6c,
}

impl AlphabetArg {
    fn alphabet(self) -> LetterAlphabet {
        match self {
            AlphabetArg::T5x => LetterAlphabet::t5x(),
            AlphabetArg::T6c => LetterAlphabet::t6c(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Local,
}

#[derive(Debug, clap::Args)]
struct InputArgs {
    /// Input file; `#` metadata lines are honoured and stripped.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Input format (inferred when omitted).
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, value_enum)]
    alphabet: Option<AlphabetArg>,
    /// Field order; defaults to the metadata or the number of blocks.
    #[arg(long)]
    q: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count and list conflicting quadruples.
    Verify(InputArgs),
    /// Convert letter or integer text to canonical JSON.
    Parse(InputArgs),
    /// Convert a JSON document to letter (or integer) text.
    Emit {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "t5x")]
        alphabet: AlphabetArg,
        /// Output format: letters or ints.
        #[arg(long, value_enum, default_value = "letters")]
        format: Format,
    },
    /// Search for a uniform (q,k) or (q,k,t) system.
    Search {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        t: Option<usize>,
        /// Fixed symbol universe, comma separated.
        #[arg(long, value_delimiter = ',')]
        symbols: Option<Vec<u32>>,
        #[arg(long, value_enum, default_value = "local")]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Seconds.
        #[arg(long)]
        time_budget: Option<f64>,
        #[arg(long)]
        max_restarts: Option<u64>,
        #[arg(long)]
        max_steps: Option<u64>,
        #[arg(long)]
        node_cap: Option<u64>,
        /// Run all workers to completion for scheduling-independent output.
        #[arg(long)]
        deterministic: bool,
    },
    /// Lower bound for κ(q) by searching k = 1, 2, ...
    Kappa {
        #[arg(long)]
        q: u64,
        /// Seconds.
        #[arg(long)]
        time_budget: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Directory for witness documents (default `kappa_q<Q>`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lower bound (q-1)(v+q) on M(q, q-3).
    Bound {
        #[arg(long)]
        q: u64,
        #[arg(long, conflicts_with = "k", required_unless_present = "k")]
        v: Option<u64>,
        #[arg(long)]
        k: Option<u64>,
    },
    /// Re-verify a bundled table of results.
    Tables {
        #[arg(long, value_parser = clap::value_parser!(u32).range(0..=4))]
        which: u32,
        #[arg(long)]
        fixtures: PathBuf,
        /// For table 4, print the recomputed bound column as CSV.
        #[arg(long)]
        csv: bool,
    },
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

type CmdResult = Result<i32, String>;

/// Runs the program on `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let mut io = Io { out, err };
    let json = cli.json;
    let result = match cli.command {
        Command::Verify(input) => cmd_verify(&mut io, &input, json),
        Command::Parse(input) => cmd_parse(&mut io, &input),
        Command::Emit {
            input,
            alphabet,
            format,
        } => cmd_emit(&mut io, &input, alphabet, format, json),
        Command::Search {
            q,
            k,
            t,
            symbols,
            mode,
            seed,
            workers,
            time_budget,
            max_restarts,
            max_steps,
            node_cap,
            deterministic,
        } => {
            let mut cfg = SearchConfig::new(q, k)
                .with_seed(seed)
                .with_workers(workers)
                .with_deterministic(deterministic)
                .with_node_cap(node_cap.unwrap_or_else(node_cap_from_env));
            cfg.t = t;
            if let Some(s) = symbols {
                cfg = cfg.with_symbols(s);
                if t.is_some_and(|t| Some(t) != cfg.t) {
                    return usage(&mut io, "--t disagrees with --symbols");
                }
            }
            cfg.mode = match mode {
                ModeArg::Exhaustive => Mode::Exhaustive,
                ModeArg::Local => Mode::Local,
            };
            if let Some(r) = max_restarts {
                cfg.max_restarts = r;
            }
            if let Some(s) = max_steps {
                cfg.max_steps_per_restart = s;
            }
            match time_budget.map(seconds) {
                Some(Ok(d)) => cfg.time_budget = Some(d),
                Some(Err(e)) => return usage(&mut io, &e),
                None => {}
            }
            cmd_search(&mut io, &cfg, json)
        }
        Command::Kappa {
            q,
            time_budget,
            seed,
            workers,
            out,
        } => match seconds(time_budget) {
            Ok(budget) => {
                let cfg = KappaConfig::new(q, budget)
                    .with_seed(seed)
                    .with_workers(workers);
                let dir = out.unwrap_or_else(|| PathBuf::from(format!("kappa_q{q}")));
                cmd_kappa(&mut io, &cfg, &dir, json)
            }
            Err(e) => return usage(&mut io, &e),
        },
        Command::Bound { q, v, k } => cmd_bound(&mut io, q, v, k, json),
        Command::Tables {
            which,
            fixtures,
            csv,
        } => cmd_tables(&mut io, which, &fixtures, csv, json),
    };
    match result {
        Ok(code) => code,
        Err(message) => usage(&mut io, &message),
    }
}

fn usage(io: &mut Io<'_>, message: &str) -> i32 {
    let _ = writeln!(io.err, "error: {message}");
    EXIT_USAGE
}

fn seconds(s: f64) -> Result<Duration, String> {
    if s.is_finite() && s > 0.0 {
        Ok(Duration::from_secs_f64(s))
    } else {
        Err(format!(
            "time budget must be a positive number of seconds, got {s}"
        ))
    }
}

fn io_err(e: std::io::Error) -> String {
    e.to_string()
}

fn load_system(input: &InputArgs) -> Result<BlockSystem, String> {
    let text =
        fs::read_to_string(&input.input).map_err(|e| format!("{}: {e}", input.input.display()))?;
    let fixture = Fixture::parse(&input.input.to_string_lossy(), &text);
    let format = input.format.unwrap_or_else(|| {
        if fixture.body.starts_with('{') {
            Format::Json
        } else if fixture.meta.get("table").map(String::as_str) == Some("3")
            || fixture.body.contains(',')
        {
            Format::Ints
        } else {
            Format::Letters
        }
    });
    let meta_q = fixture.meta.get("q").and_then(|q| q.parse::<u64>().ok());
    let system = match format {
        Format::Json => read_json(&fixture.body).map_err(|e| e.to_string())?,
        Format::Letters => {
            let alphabet = match input.alphabet {
                Some(a) => a.alphabet(),
                None => fixture.alphabet().map_err(|e| e.to_string())?,
            };
            let q = input
                .q
                .or(meta_q)
                .unwrap_or(fixture.body.split_whitespace().count() as u64);
            parse_letters(&fixture.body, &alphabet, q).map_err(|e| e.to_string())?
        }
        Format::Ints => {
            let counted = fixture
                .body
                .trim_end()
                .trim_end_matches(',')
                .split(',')
                .count() as u64;
            let q = input.q.or(meta_q).unwrap_or(counted);
            parse_int_blocks(&fixture.body, q).map_err(|e| e.to_string())?
        }
    };
    if let Some(q) = input.q {
        if system.q() as u64 != q {
            return Err(format!("document has q = {} but --q {q}", system.q()));
        }
    }
    Ok(system)
}

fn cmd_verify(io: &mut Io<'_>, input: &InputArgs, json: bool) -> CmdResult {
    let system = load_system(input)?;
    let report = verify(&system);
    let st = stats(&system);
    if json {
        let quads: Vec<[u32; 4]> = report
            .conflicts
            .iter()
            .map(|c| [c.r.code(), c.a.code(), c.s.code(), c.b.code()])
            .collect();
        let doc = json!({
            "q": system.q(),
            "valid": report.is_empty(),
            "conflicts": report.count(),
            "quadruples": quads,
            "k_min": st.k_min,
            "k_max": st.k_max,
            "t": st.t,
            "v": st.v,
        });
        writeln!(io.out, "{doc}").map_err(io_err)?;
    } else {
        writeln!(io.out, "{} conflicts", report.count()).map_err(io_err)?;
        for c in &report.conflicts {
            writeln!(io.out, "{c}").map_err(io_err)?;
        }
    }
    Ok(if report.is_empty() {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    })
}

fn cmd_parse(io: &mut Io<'_>, input: &InputArgs) -> CmdResult {
    let system = load_system(input)?;
    writeln!(io.out, "{}", write_json(&system)).map_err(io_err)?;
    Ok(EXIT_OK)
}

fn cmd_emit(
    io: &mut Io<'_>,
    input: &Path,
    alphabet: AlphabetArg,
    format: Format,
    json: bool,
) -> CmdResult {
    let text = fs::read_to_string(input).map_err(|e| format!("{}: {e}", input.display()))?;
    let system = read_json(&text).map_err(|e| e.to_string())?;
    let rendered = match format {
        Format::Letters => {
            emit_letters(&system, &alphabet.alphabet()).map_err(|e| e.to_string())?
        }
        Format::Ints => emit_int_blocks(&system),
        Format::Json => write_json(&system),
    };
    if json {
        writeln!(io.out, "{}", json!({ "q": system.q(), "text": rendered })).map_err(io_err)?;
    } else {
        writeln!(io.out, "{rendered}").map_err(io_err)?;
    }
    Ok(EXIT_OK)
}

fn witness_value(system: &BlockSystem) -> Value {
    serde_json::from_str(&write_json(system)).expect("canonical document is JSON")
}

fn result_value(result: &SearchResult) -> Value {
    json!({
        "status": result.status.as_str(),
        "proof_of_exhaustion": result.proof_of_exhaustion,
        "counters": {
            "restarts": result.counters.restarts,
            "steps": result.counters.steps,
            "evaluations": result.counters.evaluations,
            "nodes": result.counters.nodes,
        },
        "witness": result.witness.as_ref().map(witness_value),
    })
}

fn cmd_search(io: &mut Io<'_>, cfg: &SearchConfig, json: bool) -> CmdResult {
    let result = search(cfg).map_err(|e| e.to_string())?;
    if json {
        writeln!(io.out, "{}", result_value(&result)).map_err(io_err)?;
    } else {
        match (&result.status, &result.witness) {
            (Status::Found, Some(w)) => {
                writeln!(io.out, "{}", write_json(w)).map_err(io_err)?;
                let c = result.counters;
                writeln!(
                    io.err,
                    "found: restarts {} steps {} nodes {}",
                    c.restarts, c.steps, c.nodes
                )
                .map_err(io_err)?;
            }
            (Status::Exhausted, _) => writeln!(io.out, "exhausted: none exists").map_err(io_err)?,
            _ => writeln!(io.out, "budget_spent: no witness found").map_err(io_err)?,
        }
    }
    Ok(if result.found() {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    })
}

fn cmd_kappa(io: &mut Io<'_>, cfg: &KappaConfig, dir: &Path, json: bool) -> CmdResult {
    let result = kappa_lower_bound(cfg).map_err(|e| e.to_string())?;
    fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let mut files = Vec::new();
    for (i, w) in result.witnesses.iter().enumerate() {
        let path = dir.join(format!("q{}_k{}.json", result.q, i + 1));
        fs::write(&path, write_json(w) + "\n").map_err(|e| format!("{}: {e}", path.display()))?;
        files.push(path.to_string_lossy().into_owned());
    }
    if json {
        let doc = json!({
            "q": result.q,
            "best_k": result.best_k,
            "exact": result.exact,
            "witnesses": files,
        });
        writeln!(io.out, "{doc}").map_err(io_err)?;
    } else {
        let qualifier = if result.exact {
            "= κ(q)"
        } else {
            "(lower bound)"
        };
        writeln!(io.out, "best_k = {} {qualifier}", result.best_k).map_err(io_err)?;
        for f in &files {
            writeln!(io.out, "wrote {f}").map_err(io_err)?;
        }
    }
    Ok(if result.best_k > 0 {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    })
}

fn bound_value(r: &BoundResult) -> Value {
    json!({ "q": r.q, "v": r.v, "d": r.d, "lower_bound": r.lower_bound.to_string() })
}

fn cmd_bound(io: &mut Io<'_>, q: u64, v: Option<u64>, k: Option<u64>, json: bool) -> CmdResult {
    let computed = match (v, k) {
        (Some(v), _) => theorem1_bound(q, v),
        (None, Some(k)) => bound_for_uniform(q, k),
        (None, None) => return Err("one of --v or --k is required".into()),
    };
    let r = computed.map_err(|e| e.to_string())?;
    if json {
        writeln!(io.out, "{}", bound_value(&r)).map_err(io_err)?;
    } else {
        writeln!(io.out, "{}", r.lower_bound).map_err(io_err)?;
    }
    Ok(EXIT_OK)
}

fn cmd_tables(io: &mut Io<'_>, which: u32, dir: &Path, csv: bool, json: bool) -> CmdResult {
    let rows = check_table(which, dir).map_err(|e| e.to_string())?;
    let all_pass = rows.iter().all(|r| r.passed);
    if csv && which == 4 {
        let fixtures = load_dir(dir).map_err(|e| e.to_string())?;
        let bound_rows: Vec<BoundRow> = fixtures
            .iter()
            .filter(|f| f.table().ok() == Some(4))
            .filter_map(|f| {
                let q = f.q().ok()?;
                let k: u64 = f.meta.get("k")?.parse().ok()?;
                Some(BoundRow {
                    q,
                    k: Some(k),
                    v: q * k,
                    bound: bound_for_uniform(q, k).ok().map(|b| b.lower_bound),
                })
            })
            .collect();
        write!(io.out, "{}", bound_csv(&bound_rows)).map_err(io_err)?;
    } else if json {
        let doc: Vec<Value> = rows
            .iter()
            .map(|r| json!({ "file": r.file, "q": r.q, "passed": r.passed, "detail": r.detail }))
            .collect();
        writeln!(
            io.out,
            "{}",
            json!({ "table": which, "all_passed": all_pass, "rows": doc })
        )
        .map_err(io_err)?;
    } else {
        for r in &rows {
            let tag = if r.passed { "PASS" } else { "FAIL" };
            writeln!(io.out, "{tag} {} q={}: {}", r.file, r.q, r.detail).map_err(io_err)?;
        }
        let passed = rows.iter().filter(|r| r.passed).count();
        writeln!(io.out, "{passed}/{} rows pass", rows.len()).map_err(io_err)?;
    }
    Ok(if all_pass { EXIT_OK } else { EXIT_NEGATIVE })
}
