//! Command-line front end. Exit codes: 0 success, 1 usage or runtime error,
//! 2 verification failure.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::circuit::Circuit;
use crate::digits::{format_digits, parse_digits};
use crate::error::{Error, Result};
use crate::gates::build_diffusion;
use crate::grover::{build_diffusion_circuit, run_grover, run_grover_sampled, GroverProblem};
use crate::leakage::{self, LeakModel, LeakSites, LeakageConfig};
use crate::state::{computational_unitary, StateVector};
use crate::table3;
use crate::toffoli::{decompose, optimize_cancel, stats, verify_equivalence};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "quditkit", version, about = "Qudit Toffoli decomposition, Grover search and leakage models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decompose the n-qudit Toffoli and print its stats as JSON.
    Decompose {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        /// Cancel adjacent inverse gate pairs.
        #[arg(long)]
        optimize: bool,
        /// Write the circuit here as .qdc.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a .qdc circuit on a basis input.
    Simulate {
        circuit: PathBuf,
        #[arg(long)]
        input: String,
        /// Print the state after every time cycle.
        #[arg(long)]
        trace: bool,
    },
    /// Noiseless Grover search for one marked element.
    Grover {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        marked: String,
        /// Defaults to floor(pi/4 * sqrt(d^n)).
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        json: bool,
        /// Also sample one measurement outcome with this seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Leakage sweep over n as CSV.
    Leakage {
        #[arg(long, value_enum, default_value_t = ModelArg::Erasure)]
        model: ModelArg,
        #[arg(long)]
        d: usize,
        /// Inclusive range `a..b`, or a single n.
        #[arg(long, default_value = "2..14")]
        n_range: String,
        #[arg(long)]
        p_l: f64,
        /// Coupling duration for the unitary model, radians.
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Level erased wires end in (d or d+1); defaults to d.
        #[arg(long)]
        leak_level: Option<usize>,
        /// Largest n that gets a Monte Carlo column.
        #[arg(long, default_value_t = 5)]
        mc_max_n: usize,
        #[arg(long, value_enum, default_value_t = SitesArg::Diffusion)]
        sites: SitesArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the simulator against reference data.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Reference table CSV for `toffoli-table` (defaults to the bundled tables).
        #[arg(long)]
        fixture: Option<PathBuf>,
        /// Known-misprint list for `toffoli-table`.
        #[arg(long)]
        errata: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModelArg {
    Unitary,
    Erasure,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SitesArg {
    Diffusion,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    ToffoliTable,
    Equivalence,
    Diffusion,
    All,
}

/// Parses `argv` (including the program name) and runs the command.
pub fn main_with(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn json_line<T: Serialize>(out: &mut dyn Write, v: &T) -> Result<()> {
    let s = serde_json::to_string(v).map_err(|e| Error::domain(e.to_string()))?;
    writeln!(out, "{s}")?;
    Ok(())
}

fn read(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Decompose {
            n,
            d,
            optimize,
            out: path,
        } => {
            let mut c = decompose(n, d)?;
            if optimize {
                c = optimize_cancel(&c);
            }
            let s = stats(&c, d)?;
            if let Some(p) = path {
                fs::write(&p, c.emit()?)?;
            }
            json_line(out, &s)?;
            Ok(EXIT_OK)
        }
        Command::Simulate {
            circuit,
            input,
            trace,
        } => {
            let c = Circuit::parse(&read(&circuit)?)?;
            let dims = c.dims();
            let digits = parse_digits(&input, &dims)?;
            let mut sv = StateVector::prepare_basis(&dims, &digits)?;
            let records = sv.run(&c, trace)?;
            if trace {
                writeln!(out, "cycle=0 state={}", format_digits(&digits, &dims))?;
                for r in &records {
                    writeln!(out, "{r}")?;
                }
            } else {
                let label = sv
                    .as_basis()
                    .map_or_else(|| "superposed".to_string(), |b| format_digits(&b, &dims));
                writeln!(out, "state={label}")?;
            }
            Ok(EXIT_OK)
        }
        Command::Grover {
            n,
            d,
            marked,
            iterations,
            json,
            seed,
        } => {
            let logical = vec![d; n];
            let s = parse_digits(&marked, &logical)?;
            let p = GroverProblem::new(n, d, s, iterations)?;
            let r = match seed {
                Some(seed) => run_grover_sampled(&p, true, seed)?,
                None => run_grover(&p, true)?,
            };
            let sample = r.measured_sample.as_ref().map(|x| format_digits(x, &logical));
            if json {
                #[derive(Serialize)]
                struct Report<'a> {
                    n: usize,
                    d: usize,
                    marked: &'a str,
                    iterations: usize,
                    success_probability: f64,
                    trajectory: &'a [f64],
                    #[serde(skip_serializing_if = "Option::is_none")]
                    measured_sample: Option<String>,
                }
                json_line(
                    out,
                    &Report {
                        n,
                        d,
                        marked: &format_digits(&p.marked, &logical),
                        iterations: p.iterations,
                        success_probability: r.success_probability,
                        trajectory: &r.trajectory,
                        measured_sample: sample,
                    },
                )?;
            } else {
                writeln!(out, "iterations={}", p.iterations)?;
                writeln!(out, "success_probability={}", r.success_probability)?;
                if let Some(s) = sample {
                    writeln!(out, "measured_sample={s}")?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Leakage {
            model,
            d,
            n_range,
            p_l,
            t,
            trials,
            seed,
            leak_level,
            mc_max_n,
            sites,
            out: path,
        } => {
            let cfg = LeakageConfig {
                model: match model {
                    ModelArg::Unitary => LeakModel::Unitary,
                    ModelArg::Erasure => LeakModel::Erasure,
                },
                p_l,
                t,
                seed,
                trials,
                leak_level,
                sites: match sites {
                    SitesArg::Diffusion => LeakSites::Diffusion,
                    SitesArg::All => LeakSites::All,
                },
            };
            let (lo, hi) = parse_range(&n_range)?;
            let rows = leakage::sweep(d, lo..=hi, &cfg, mc_max_n)?;
            let csv = leakage::to_csv(&rows);
            match path {
                Some(p) => fs::write(p, csv)?,
                None => write!(out, "{csv}")?,
            }
            Ok(EXIT_OK)
        }
        Command::Verify {
            suite,
            fixture,
            errata,
        } => {
            let mut ok = true;
            if matches!(suite, Suite::ToffoliTable | Suite::All) {
                ok &= verify_table(out, fixture.as_ref(), errata.as_ref())?;
            }
            if matches!(suite, Suite::Equivalence | Suite::All) {
                ok &= verify_equivalence_grid(out)?;
            }
            if matches!(suite, Suite::Diffusion | Suite::All) {
                ok &= verify_diffusion(out)?;
            }
            Ok(if ok { EXIT_OK } else { EXIT_VERIFY })
        }
    }
}

fn parse_range(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::domain(format!("malformed --n-range `{s}`; expected `a..b` or `n`"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let n = s.trim().parse().map_err(|_| bad())?;
            (n, n)
        }
    };
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn verify_table(out: &mut dyn Write, fixture: Option<&PathBuf>, errata: Option<&PathBuf>) -> Result<bool> {
    let tables: Vec<(String, String)> = match fixture {
        Some(p) => vec![(p.display().to_string(), read(p)?)],
        None => vec![
            ("bundled target-0 table".into(), table3::FIXTURE.to_string()),
            ("bundled target-1 table".into(), table3::FIXTURE_TARGET1.to_string()),
        ],
    };
    let errata = match errata {
        Some(p) => table3::parse_errata(&read(p)?)?,
        None => table3::parse_errata(table3::ERRATA)?,
    };
    let mut ok = true;
    for (name, text) in tables {
        let reference = table3::parse_csv(&text)?;
        let mut targets: Vec<usize> = reference
            .iter()
            .filter_map(|r| r.input.chars().last()?.to_digit(10))
            .map(|t| t as usize)
            .collect();
        targets.sort_unstable();
        targets.dedup();
        let mut simulated = Vec::new();
        for t in targets {
            simulated.extend(table3::generate(t)?);
        }
        simulated.retain(|s| reference.iter().any(|r| r.input == s.input));
        let report = table3::compare(&reference, &simulated, &errata);
        for d in report.diffs.iter().filter(|d| d.known) {
            writeln!(
                out,
                "toffoli-table: known misprint input={} column={} printed={} simulated={}",
                d.input, d.column, d.printed, d.simulated
            )?;
        }
        let known_rows = {
            let mut rows: Vec<&str> = report.diffs.iter().filter(|d| d.known).map(|d| d.input.as_str()).collect();
            rows.dedup();
            rows.len()
        };
        writeln!(
            out,
            "toffoli-table: {name}: {} rows, {} exact, {known_rows} with known misprints",
            report.rows, report.exact_rows
        )?;
        if let Some(d) = report.diffs.iter().find(|d| !d.known) {
            writeln!(
                out,
                "toffoli-table: MISMATCH row {} column {}: table {} simulated {}",
                d.input, d.column, d.printed, d.simulated
            )?;
            ok = false;
        }
        if let Some(m) = report.missing.first() {
            writeln!(out, "toffoli-table: MISMATCH row {m} missing from one side")?;
            ok = false;
        }
    }
    Ok(ok)
}

fn verify_equivalence_grid(out: &mut dyn Write) -> Result<bool> {
    let mut ok = true;
    for d in 2..=4usize {
        for n in 3..=8usize {
            if d.pow(n as u32) > crate::toffoli::MAX_EQUIV_DIM {
                continue;
            }
            let r = verify_equivalence(n, d)?;
            writeln!(
                out,
                "equivalence: n={n} d={d} {}/{} match, {} off-subspace{}",
                r.matched,
                r.total,
                r.off_subspace,
                if r.ok() { "" } else { " MISMATCH" }
            )?;
            ok &= r.ok();
        }
    }
    Ok(ok)
}

fn verify_diffusion(out: &mut dyn Write) -> Result<bool> {
    let mut ok = true;
    for (n, d) in [(1, 2), (2, 2), (3, 2), (2, 3), (3, 3), (2, 4)] {
        let (u, leak) = computational_unitary(&build_diffusion_circuit(n, d)?)?;
        let target = build_diffusion(n, d)?;
        let pass = u.eq_up_to_global_phase(&target, 1e-9) && leak <= 1e-10;
        writeln!(
            out,
            "diffusion: n={n} d={d} {}",
            if pass { "matches D up to global phase" } else { "MISMATCH" }
        )?;
        ok &= pass;
    }
    Ok(ok)
}
