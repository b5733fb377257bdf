//! The `mlrf` command line. `run` takes the arguments and two sinks and
//! returns the process exit code:
//! 0 MLRF found or verification passed, 1 nonterminating, 2 unknown,
//! 3 input error, 4 a witness failed re-verification.

use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::rngs::StdRng;
use rand::SeedableRng;
use rayon::prelude::*;
use serde_json::json;

use crate::analysis::{analyze, random_loop, Analysis, Engine, Options};
use crate::displacement::{depth_profile, nilpotency_certificate};
use crate::engine::{dellrf_membership, Limits, Outcome};
use crate::linalg::{fmt_rational, parse_rational, Vector};
use crate::loops::TransitionPoly;
use crate::parse::{parse_loop, LoopFile, Mode};
use crate::report::VerdictDocument;
use crate::verify::{check_mlrf, check_monotonic_recurrent, check_recurrent, simulate};

pub const EXIT_MLRF: i32 = 0;
pub const EXIT_NONTERMINATING: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "mlrf", version, about = "Multiphase ranking functions and recurrent sets for linear-constraint loops")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct LimitArgs {
    /// Largest MLRF depth to look for [default: 10]
    #[arg(long, value_name = "N")]
    depth_bound: Option<usize>,
    /// Cap on applications of F [default: 50]
    #[arg(long, value_name = "M")]
    max_iters: Option<usize>,
    /// rational or integer [default: rational]
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    #[arg(long, value_parser = parse_engine, default_value = "both")]
    engine: Engine,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Look for an MLRF or a recurrent set.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        limits: LimitArgs,
        #[arg(long)]
        json: bool,
    },
    /// Depth profile from the displacement engine.
    Depth {
        file: PathBuf,
        /// Largest depth to decide
        #[arg(long, default_value_t = 10)]
        max: usize,
        #[arg(long)]
        json: bool,
    },
    /// Whether the loop restricted to states with runs of length b has an LRF.
    Dellrf {
        file: PathBuf,
        #[arg(long)]
        b: usize,
        #[arg(long)]
        json: bool,
    },
    /// Re-check a verdict document against a loop.
    Verify {
        file: PathBuf,
        #[arg(long, value_name = "DOC")]
        witness: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run a deterministic loop from a start state.
    Simulate {
        file: PathBuf,
        /// Comma-separated start state, e.g. `1,-2,3/2`
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, default_value_t = 20)]
        steps: usize,
    },
    /// Analyze every `.slc` file in a directory; prints JSON lines.
    Batch {
        dir: PathBuf,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Analyze random loops and re-check every witness.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        cases: usize,
        /// Number of variables
        #[arg(long, default_value_t = 2)]
        vars: usize,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|_| format!("unknown mode `{s}` (expected rational or integer)"))
}

fn parse_engine(s: &str) -> Result<Engine, String> {
    s.parse()
        .map_err(|_| format!("unknown engine `{s}` (expected f-step, displacement or both)"))
}

/// Flag, then file directive, then default.
fn options(file: &LoopFile, args: &LimitArgs) -> Result<Options, String> {
    let defaults = Limits::default();
    let depth_bound = args.depth_bound.or(file.depth_bound).or(defaults.depth_bound);
    let max_iters = args.max_iters.or(file.max_iters).unwrap_or(defaults.max_iterations);
    let limits = Limits::new(depth_bound, max_iters).map_err(|e| e.to_string())?;
    Ok(Options {
        limits,
        mode: args.mode.or(file.mode).unwrap_or_default(),
        engine: args.engine,
    })
}

fn load(path: &Path) -> Result<LoopFile, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_loop(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn verdict_code(a: &Analysis) -> i32 {
    if !a.checks.all_passed() || a.engines_agree == Some(false) {
        return EXIT_CHECK_FAILED;
    }
    match a.verdict.outcome {
        Outcome::Mlrf(_) => EXIT_MLRF,
        Outcome::Nonterminating { .. } => EXIT_NONTERMINATING,
        Outcome::Unknown(_) => EXIT_UNKNOWN,
    }
}

fn fmt_vec(v: &[crate::linalg::Rational]) -> String {
    let parts: Vec<String> = v.iter().map(fmt_rational).collect();
    format!("({})", parts.join(", "))
}

fn yes_no(b: Option<bool>) -> &'static str {
    match b {
        Some(true) => "ok",
        Some(false) => "FAILED",
        None => "n/a",
    }
}

fn print_analysis(out: &mut dyn Write, q: &TransitionPoly, a: &Analysis) -> std::io::Result<()> {
    let names = q.names();
    let v = &a.verdict;
    match &v.outcome {
        Outcome::Mlrf(m) => {
            writeln!(out, "MLRF of depth {}", m.depth())?;
            for (i, f) in m.components.iter().enumerate() {
                writeln!(out, "  rho{} = {}", i + 1, f.display_with(names))?;
            }
        }
        Outcome::Nonterminating {
            set,
            stabilized_at,
            witness,
        } => {
            writeln!(out, "NONTERMINATING (F stabilized at index {stabilized_at})")?;
            writeln!(out, "  states:      {}", set.states.display_with(names))?;
            writeln!(out, "  transitions: {}", set.transitions.poly().display_with(&q.all_names()))?;
            if let Some(w) = witness {
                writeln!(out, "  integer start: {}", fmt_vec(w))?;
            }
        }
        Outcome::Unknown(r) => writeln!(out, "UNKNOWN: {r}")?,
    }
    writeln!(out, "route: {}, F applications: {}", a.route, v.iterations)?;
    let c = &a.checks;
    writeln!(
        out,
        "checks: mlrf {}, recurrent {}, monotonic {}, witness {}",
        yes_no(c.mlrf),
        yes_no(c.recurrent),
        yes_no(c.monotonic),
        yes_no(c.witness)
    )?;
    if let Some(agree) = a.engines_agree {
        writeln!(out, "engines agree: {}", if agree { "yes" } else { "NO" })?;
    }
    Ok(())
}

/// Parses and runs a command line. `args` includes the program name.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

struct Failure(i32, String);

fn input<E: Display>(e: E) -> Failure {
    Failure(EXIT_INPUT, e.to_string())
}

fn io(e: std::io::Error) -> Failure {
    Failure(EXIT_INPUT, format!("output: {e}"))
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Command::Analyze { file, limits, json } => {
            let lf = load(&file).map_err(input)?;
            let opts = options(&lf, &limits).map_err(input)?;
            let q = lf.slc.transition();
            let a = analyze(&q, &opts).map_err(|e| Failure(EXIT_CHECK_FAILED, e.to_string()))?;
            if json {
                let doc = VerdictDocument::from_analysis(&q, &a, &opts, Some(file.display().to_string()));
                writeln!(out, "{}", doc.to_json()).map_err(io)?;
            } else {
                print_analysis(out, &q, &a).map_err(io)?;
            }
            Ok(verdict_code(&a))
        }
        Command::Depth { file, max, json } => {
            let q = load(&file).map_err(input)?.slc.transition();
            let profile = depth_profile(&q, max);
            let min = profile.iter().position(|&b| b);
            let nil = nilpotency_certificate(&q);
            if json {
                let doc = json!({ "profile": profile, "min_depth": min, "nilpotency_index": nil });
                writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap()).map_err(io)?;
            } else {
                for (d, exists) in profile.iter().enumerate() {
                    writeln!(out, "depth {d}: {}", if *exists { "MLRF exists" } else { "none" }).map_err(io)?;
                }
                match min {
                    Some(d) => writeln!(out, "minimal depth: {d}"),
                    None => writeln!(out, "no MLRF of depth <= {max}"),
                }
                .map_err(io)?;
                if let Some(k) = nil {
                    writeln!(out, "(U - I)^{k} = 0: F iteration stabilizes within {k} steps").map_err(io)?;
                }
            }
            Ok(if min.is_some() { EXIT_MLRF } else { EXIT_UNKNOWN })
        }
        Command::Dellrf { file, b, json } => {
            if b == 0 {
                return Err(input("--b must be at least 1"));
            }
            let q = load(&file).map_err(input)?.slc.transition();
            let rho = dellrf_membership(&q, b);
            if json {
                let doc = json!({
                    "b": b,
                    "member": rho.is_some(),
                    "rho": rho.as_ref().map(|f| json!({
                        "coeffs": f.coeffs.iter().map(fmt_rational).collect::<Vec<_>>(),
                        "constant": fmt_rational(&f.constant),
                        "text": f.display_with(q.names()).to_string(),
                    })),
                });
                writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap()).map_err(io)?;
            } else {
                match &rho {
                    Some(f) => writeln!(out, "LRF after {b} steps: {}", f.display_with(q.names())),
                    None => writeln!(out, "no LRF on states with runs of length {b}"),
                }
                .map_err(io)?;
            }
            Ok(if rho.is_some() { EXIT_MLRF } else { EXIT_UNKNOWN })
        }
        Command::Verify { file, witness, json } => {
            let q = load(&file).map_err(input)?.slc.transition();
            let text = std::fs::read_to_string(&witness).map_err(|e| input(format!("{}: {e}", witness.display())))?;
            let doc = VerdictDocument::from_json(&text).map_err(input)?;
            if doc.vars != q.names() {
                return Err(input(format!(
                    "document variables {:?} do not match the loop's {:?}",
                    doc.vars,
                    q.names()
                )));
            }
            let results = verify_document(&q, &doc).map_err(input)?;
            let passed = results.iter().all(|(_, ok)| *ok);
            if json {
                let checks: serde_json::Map<_, _> = results.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
                writeln!(out, "{}", json!({ "kind": doc.kind, "passed": passed, "checks": checks })).map_err(io)?;
            } else {
                if results.is_empty() {
                    writeln!(out, "{}: no witness to check", doc.kind).map_err(io)?;
                }
                for (name, ok) in &results {
                    writeln!(out, "{name}: {}", if *ok { "ok" } else { "FAILED" }).map_err(io)?;
                }
                writeln!(out, "{}", if passed { "verified" } else { "verification failed" }).map_err(io)?;
            }
            Ok(if passed { 0 } else { EXIT_CHECK_FAILED })
        }
        Command::Simulate { file, from, steps } => {
            let q = load(&file).map_err(input)?.slc.transition();
            let x0: Vector = from
                .split(',')
                .map(|s| parse_rational(s).ok_or_else(|| input(format!("malformed rational `{}`", s.trim()))))
                .collect::<Result<_, _>>()?;
            let trace = simulate(&q, &x0, steps).map_err(input)?;
            for (i, x) in trace.states.iter().enumerate() {
                writeln!(out, "{i}: {}", fmt_vec(x)).map_err(io)?;
            }
            let last = trace.states.len() - 1;
            let msg = if trace.exited {
                format!("guard false after {last} steps")
            } else {
                format!("still running after {last} steps")
            };
            writeln!(out, "{msg}").map_err(io)?;
            Ok(0)
        }
        Command::Batch { dir, limits } => batch(&dir, &limits, out),
        Command::Selftest { seed, cases, vars } => {
            if vars == 0 {
                return Err(input("--vars must be at least 1"));
            }
            let mut rng = StdRng::seed_from_u64(seed);
            let mut tally = [0usize; 3];
            let mut failures = 0;
            for i in 0..cases {
                let l = random_loop(&mut rng, vars, vars + 1, i % 2 == 0);
                let q = l.transition();
                let a = analyze(&q, &Options::default()).map_err(|e| Failure(EXIT_CHECK_FAILED, e.to_string()))?;
                match verdict_code(&a) {
                    EXIT_CHECK_FAILED => {
                        failures += 1;
                        writeln!(out, "case {i}: witness rejected\n{:?}", q).map_err(io)?;
                    }
                    c => tally[c as usize] += 1,
                }
            }
            writeln!(
                out,
                "{cases} loops: {} MLRF, {} nonterminating, {} unknown, {failures} rejected",
                tally[0], tally[1], tally[2]
            )
            .map_err(io)?;
            Ok(if failures == 0 { 0 } else { EXIT_CHECK_FAILED })
        }
    }
}

/// Named checks for whatever witness the document carries.
pub fn verify_document(q: &TransitionPoly, doc: &VerdictDocument) -> Result<Vec<(&'static str, bool)>, String> {
    let mut results = Vec::new();
    if let Some(m) = doc.mlrf_witness().map_err(|e| e.to_string())? {
        let ok = check_mlrf(q, &m).map_err(|e| e.to_string())?.accepted();
        results.push(("mlrf", ok));
    }
    if let Some(s) = doc.recurrent_witness().map_err(|e| e.to_string())? {
        let s = q.with_poly(s);
        results.push(("nonempty", !s.is_empty()));
        results.push(("inside loop", q.poly().includes(s.poly())));
        results.push(("recurrent", check_recurrent(&s)));
        results.push(("monotonic", check_monotonic_recurrent(&s)));
        if let Some(x) = doc.integer_witness().map_err(|e| e.to_string())? {
            let states = s.states();
            let ok = x.len() == q.n()
                && x.iter().all(|c| c.is_integer())
                && simulate(q, &x, q.n() + 3).is_ok_and(|t| !t.exited && t.stays_within(&states));
            results.push(("integer start", ok));
        }
    }
    Ok(results)
}

fn batch(dir: &Path, limits: &LimitArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| input(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "slc"))
        .collect();
    files.sort();
    let lines: Vec<(String, bool)> = files
        .par_iter()
        .map(|path| {
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            let result = load(path).and_then(|lf| {
                let opts = options(&lf, limits)?;
                let q = lf.slc.transition();
                let a = analyze(&q, &opts).map_err(|e| e.to_string())?;
                Ok(VerdictDocument::from_analysis(&q, &a, &opts, Some(name.clone())).to_json_line())
            });
            match result {
                Ok(line) => (line, true),
                Err(e) => (json!({ "file": name, "error": e }).to_string(), false),
            }
        })
        .collect();
    let mut all_ok = true;
    for (line, ok) in &lines {
        all_ok &= ok;
        writeln!(out, "{line}").map_err(io)?;
    }
    Ok(if all_ok { 0 } else { EXIT_INPUT })
}
