//! Command-line front end. Exit codes: 0 clean, 1 loop found or check
//! mismatch, 2 input error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use crate::atoms::{compute_uc, Algorithm, AtomsError};
use crate::generators::{
    gen_fig2, gen_hsa_hard, gen_random_network, gen_veriflow_hard, RandomFamily, VeriflowParams,
};
use crate::instance::{parse_instance, write_instance};
use crate::metrics::metrics;
use crate::network::{build_rule_index, detect_loops, LoopOptions, NetworkInstance};
use crate::oracle::{cross_check, ORACLE_MAX_BITS};
use crate::par::{configure_threads, Exec};
use crate::report::ReportFile;

pub const EXIT_CLEAN: i32 = 0;
pub const EXIT_FOUND: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "atomloop",
    version,
    about = "Header classes and forwarding-loop detection"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AlgoArg {
    Add,
    Basic,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Add => Algorithm::Add,
            AlgoArg::Basic => Algorithm::Basic,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the header classes of all rule sets in an instance.
    Atoms {
        /// Instance file, or `-` for stdin.
        file: String,
        #[arg(long, value_enum, default_value = "add")]
        algo: AlgoArg,
    },
    /// Detect forwarding loops and print a JSON report.
    Loops {
        file: String,
        /// Stop at the first looping class.
        #[arg(long)]
        first: bool,
        /// Include a concrete header for each looping class.
        #[arg(long)]
        witness: bool,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, value_enum, default_value = "add")]
        algo: AlgoArg,
    },
    /// Compare classes and loops against brute-force enumeration.
    Check {
        file: String,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, value_enum, default_value = "add")]
        algo: AlgoArg,
        #[arg(long, hide = true)]
        corrupt_engine: bool,
    },
    /// Write a generated instance.
    Gen {
        #[command(subcommand)]
        family: GenFamily,
        /// Output path; stdout if omitted.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum GenFamily {
    /// Four intervals over a 3-bit field.
    Fig2,
    /// Prefix chain 0…, 10…, …, 1…1 plus a catch-all forward to itself.
    Hsa {
        #[arg(long)]
        ell: usize,
        /// Drop every rule whose match equals this pattern.
        #[arg(long)]
        without: Option<String>,
    },
    /// Point rules across `d` fields plus a catch-all forward to itself.
    Veriflow {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        width: u32,
        /// Comma-separated breakpoints; defaults to 1..=p.
        #[arg(long, value_delimiter = ',')]
        breakpoints: Option<Vec<u128>>,
        /// Defaults to the last breakpoint plus one.
        #[arg(long)]
        b: Option<u128>,
    },
    /// Random wildcard network.
    Random {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        ell: usize,
        /// Probability of `*` per letter.
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long, default_value_t = 1)]
        nodes: usize,
    },
    /// Random multi-range network.
    RandomRanges {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        widths: Vec<u32>,
        /// Probability that a field spans its whole domain.
        #[arg(long, default_value_t = 0.25)]
        full_field: f64,
        #[arg(long, default_value_t = 1)]
        nodes: usize,
    },
}

/// Logging controlled by `ATOMLOOP_LOG` (e.g. `ATOMLOOP_LOG=debug`).
pub fn init_logging() {
    let env = env_logger::Env::new().filter("ATOMLOOP_LOG");
    let _ = env_logger::Builder::from_env(env).try_init();
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

struct Failure(i32, String);

fn input(msg: impl std::fmt::Display) -> Failure {
    Failure(EXIT_INPUT, msg.to_string())
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
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
            let code = if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                EXIT_INPUT
            } else {
                let _ = write!(stdout, "{}", e.render());
                EXIT_CLEAN
            };
            return code;
        }
    };
    let mut io = Io {
        stdin,
        stdout,
        stderr,
    };
    match dispatch(cli.command, &mut io) {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(io.stderr, "error: {msg}");
            code
        }
    }
}

fn load(file: &str, io: &mut Io) -> Result<NetworkInstance, Failure> {
    let mut text = String::new();
    if file == "-" {
        io.stdin
            .read_to_string(&mut text)
            .map_err(|e| input(format!("stdin: {e}")))?;
    } else {
        text = std::fs::read_to_string(file).map_err(|e| input(format!("{file}: {e}")))?;
    }
    parse_instance(&text).map_err(|e| input(format!("{file}: {e}")))
}

fn emit(io: &mut Io, text: &str) -> Result<(), Failure> {
    io.stdout
        .write_all(text.as_bytes())
        .map_err(|e| Failure(EXIT_INPUT, format!("writing output: {e}")))
}

fn dispatch(command: Command, io: &mut Io) -> Result<i32, Failure> {
    match command {
        Command::Atoms { file, algo } => {
            let net = load(&file, io)?;
            let text = atoms_listing(&net, algo.into()).map_err(input)?;
            emit(io, &text)?;
            Ok(EXIT_CLEAN)
        }
        Command::Loops {
            file,
            first,
            witness,
            jobs,
            algo,
        } => {
            let net = load(&file, io)?;
            configure_threads(jobs);
            let exec = Exec::from_jobs(jobs);
            let start = Instant::now();
            let opts = LoopOptions {
                algorithm: algo.into(),
                first,
                witness,
                exec,
            };
            let report = detect_loops(&net, &opts).map_err(input)?;
            let m = metrics(&report.engine, exec);
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            let file = ReportFile::new(&net, &report, &m, elapsed);
            emit(io, &file.to_json())?;
            Ok(if report.loops.is_empty() {
                EXIT_CLEAN
            } else {
                EXIT_FOUND
            })
        }
        Command::Check {
            file,
            jobs,
            algo,
            corrupt_engine,
        } => {
            let net = load(&file, io)?;
            let bits = net.geometry().header_bits();
            if bits > ORACLE_MAX_BITS {
                return Err(input(format!(
                    "header space of {bits} bits exceeds the oracle cap of {ORACLE_MAX_BITS} bits"
                )));
            }
            configure_threads(jobs);
            let exec = Exec::from_jobs(jobs);
            let opts = LoopOptions {
                algorithm: algo.into(),
                exec,
                ..LoopOptions::default()
            };
            let mut report = detect_loops(&net, &opts).map_err(input)?;
            if corrupt_engine {
                report.engine.corrupt();
            }
            let diff = cross_check(&net, &report.engine, &report.looping_classes(), exec)
                .map_err(input)?;
            let mut out = String::new();
            for line in diff.class_mismatches.iter().chain(&diff.loop_mismatches) {
                let _ = writeln!(out, "mismatch: {line}");
            }
            let verdict = if diff.is_clean() { "ok" } else { "FAILED" };
            let _ = writeln!(
                out,
                "{verdict}: {} classes, {} looping headers, {} mismatches",
                diff.classes_compared,
                diff.looping_headers,
                diff.class_mismatches.len() + diff.loop_mismatches.len()
            );
            emit(io, &out)?;
            Ok(if diff.is_clean() {
                EXIT_CLEAN
            } else {
                EXIT_FOUND
            })
        }
        Command::Gen { family, out } => {
            let net = generate(family)?;
            let text = write_instance(&net);
            match out {
                Some(path) => std::fs::write(&path, text)
                    .map_err(|e| input(format!("{}: {e}", path.display())))?,
                None => emit(io, &text)?,
            }
            Ok(EXIT_CLEAN)
        }
    }
}

/// `atoms: m`, then one `set<TAB>atom size<TAB>[rule ids]` line per class in
/// canonical order. Rule ids index the distinct match sets in canonical order.
pub fn atoms_listing(net: &NetworkInstance, algorithm: Algorithm) -> Result<String, AtomsError> {
    let (sets, _) = build_rule_index(net);
    let engine = compute_uc(net.geometry(), &sets, algorithm)?;
    log::debug!("{} distinct rule sets, {} atoms", sets.len(), engine.atom_count());
    let mut out = format!("atoms: {}\n", engine.atom_count());
    for (_, c) in engine.store().iter() {
        let ids: Vec<String> = c.cont.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "{}\t{}\t[{}]", c.set, c.atsize, ids.join(","));
    }
    Ok(out)
}

fn generate(family: GenFamily) -> Result<NetworkInstance, Failure> {
    match family {
        GenFamily::Fig2 => Ok(gen_fig2()),
        GenFamily::Hsa { ell, without } => {
            if ell == 0 {
                return Err(input("--ell must be at least 1"));
            }
            let mut net = gen_hsa_hard(ell);
            if let Some(pattern) = without {
                let set = net
                    .geometry()
                    .parse(&pattern)
                    .map_err(|e| input(format!("--without: {e}")))?;
                if net.remove_rules(0, &set) == 0 {
                    return Err(input(format!("--without: no rule matches {pattern}")));
                }
            }
            Ok(net)
        }
        GenFamily::Veriflow {
            d,
            p,
            width,
            breakpoints,
            b,
        } => {
            let mut params = VeriflowParams::standard(d, p, width);
            if let Some(bp) = breakpoints {
                params.breakpoints = bp;
            }
            params.b = match b {
                Some(b) => b,
                None => params.breakpoints.last().map_or(1, |a| a.saturating_add(1)),
            };
            gen_veriflow_hard(&params).map_err(input)
        }
        GenFamily::Random {
            seed,
            n,
            ell,
            density,
            nodes,
        } => {
            let family = RandomFamily::Wildcard {
                bits: ell,
                star_density: density,
            };
            gen_random_network(seed, n, nodes, &family).map_err(input)
        }
        GenFamily::RandomRanges {
            seed,
            n,
            widths,
            full_field,
            nodes,
        } => {
            let family = RandomFamily::MultiRange { widths, full_field };
            gen_random_network(seed, n, nodes, &family).map_err(input)
        }
    }
}
