//! Command-line surface: poset construction and export, component
//! tables, counting sequences, bounds, and the verification suites.
//!
//! Exit codes: 0 on success, 1 when a property or verification check
//! fails, 2 on usage errors. All output is deterministic for fixed
//! arguments and seeds.

use std::fs;
use std::io::Write;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::combinatorics::{
    binomial, brute_force_hertzsprung, brute_force_t_count, hertzsprung, t_count,
    t_count_closed_form, Count,
};
use crate::error::{Error, Result};
use crate::matrixlab::verify::run_numeric_suite;
use crate::matrixlab::Tolerance;
use crate::poset::{
    build_poset, compatibility_check_with, component_report, hasse_dot, is_maximal_by_criterion,
    Poset, PosetCache, Regime,
};

#[derive(Parser, Debug)]
#[command(
    name = "sepvar",
    version,
    about = "Separating-variety toolkit for simultaneous matrix conjugation",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug)]
struct SizeArgs {
    /// Matrix size (2..=7)
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..=7))]
    p: u32,
    /// Number of matrices in a tuple (>= 2)
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    n: u32,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the poset for (p, n); optionally export DOT and/or the JSON
    /// component report ("-" writes to stdout).
    Poset {
        #[command(flatten)]
        size: SizeArgs,
        #[arg(long)]
        dot: Option<String>,
        #[arg(long)]
        json: Option<String>,
    },
    /// Print the component table and all derived bounds.
    Components {
        #[command(flatten)]
        size: SizeArgs,
    },
    /// Print a counting sequence with its cross-validation status.
    #[command(group = clap::ArgGroup::new("which").required(true))]
    Counts {
        /// Print |T_1|..|T_K| (permutations avoiding descending successions)
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=20), group = "which")]
        tk: Option<u32>,
        /// Print u_1..u_P (permutations avoiding successions in both directions)
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=20), group = "which")]
        hertzsprung: Option<u32>,
    },
    /// Print the dimension and separating-set bounds for (p, n).
    Bounds {
        #[command(flatten)]
        size: SizeArgs,
    },
    /// Run verification suites.
    Verify {
        #[command(subcommand)]
        what: VerifyCmd,
    },
}

#[derive(Subcommand, Debug)]
enum VerifyCmd {
    /// Exhaustive structural checks on the posets up to a given size.
    Poset {
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..=6))]
        max_p: u32,
    },
    /// Seeded numerical certificate suites, reported as JSON records.
    Numeric {
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..=5))]
        p: u32,
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
        n: u32,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 6)]
        max_word_len: usize,
    },
}

/// Parse and execute; returns the process exit code.
pub fn run<W: Write>(argv: &[String], out: &mut W) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    0
                }
                _ => {
                    eprint!("{}", e.render());
                    2
                }
            };
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(Error::InvalidParameter(msg)) => {
            eprintln!("error: invalid parameter: {msg}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute<W: Write>(cli: Cli, out: &mut W) -> Result<i32> {
    match cli.cmd {
        Command::Poset { size, dot, json } => cmd_poset(size, dot, json, out),
        Command::Components { size } => cmd_components(size, out),
        Command::Counts { tk, hertzsprung } => cmd_counts(tk, hertzsprung, out),
        Command::Bounds { size } => cmd_bounds(size, out),
        Command::Verify { what } => match what {
            VerifyCmd::Poset { max_p } => cmd_verify_poset(max_p, out),
            VerifyCmd::Numeric {
                p,
                n,
                trials,
                seed,
                tol,
                max_word_len,
            } => cmd_verify_numeric(p, n, trials, seed, tol, max_word_len, out),
        },
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::InvalidParameter(format!("io error: {e}"))
}

fn write_output<W: Write>(path: &str, content: &str, out: &mut W) -> Result<()> {
    if path == "-" {
        out.write_all(content.as_bytes()).map_err(io_err)
    } else {
        fs::write(path, content).map_err(io_err)
    }
}

fn cmd_poset<W: Write>(
    size: SizeArgs,
    dot: Option<String>,
    json: Option<String>,
    out: &mut W,
) -> Result<i32> {
    let regime = Regime::from_n(size.n)?;
    let poset = build_poset(size.p, regime)?;
    if let Some(path) = &dot {
        write_output(path, &hasse_dot(&poset, Some(size.n)), out)?;
    }
    if let Some(path) = &json {
        let report = component_report(size.p, size.n)?;
        let mut text = serde_json::to_string_pretty(&report)
            .map_err(|e| Error::InvalidParameter(format!("json encoding failed: {e}")))?;
        text.push('\n');
        write_output(path, &text, out)?;
    }
    if dot.is_none() && json.is_none() {
        writeln!(
            out,
            "p={} n={}: {} elements, {} edges, {} maximal",
            size.p,
            size.n,
            poset.len(),
            poset.edge_count(),
            poset.maximal_elements().len()
        )
        .map_err(io_err)?;
    }
    Ok(0)
}

fn opt_str(v: Option<u64>) -> String {
    match v {
        Some(x) => x.to_string(),
        None => "n/a".to_string(),
    }
}

fn cmd_components<W: Write>(size: SizeArgs, out: &mut W) -> Result<i32> {
    let report = component_report(size.p, size.n)?;
    writeln!(out, "p={} n={}", report.p, report.n).map_err(io_err)?;
    writeln!(out, "codim count dim").map_err(io_err)?;
    let psq = (report.p as u64) * (report.p as u64);
    for (codim, count) in &report.counts_by_codim {
        let dim = (report.n as u64 + 1) * psq - 1 - *codim as u64;
        writeln!(out, "{codim} {count} {dim}").map_err(io_err)?;
    }
    writeln!(out, "components (codim pi sigma):").map_err(io_err)?;
    for c in &report.components {
        let pi = crate::combinatorics::Composition::new(c.pi.clone())?;
        let sigma = crate::combinatorics::Permutation::new(c.sigma.clone())?;
        writeln!(out, "{} {} {}", c.codim, pi.label(), sigma.cycle_notation()).map_err(io_err)?;
    }
    writeln!(out, "total dim={}", report.total_dim).map_err(io_err)?;
    writeln!(out, "invariant ring dim={}", report.invariant_ring_dim).map_err(io_err)?;
    writeln!(
        out,
        "semi-invariant dim={}",
        opt_str(report.semi_invariant_dim)
    )
    .map_err(io_err)?;
    writeln!(
        out,
        "semi-invariant lower bound={}",
        opt_str(report.semi_invariant_lower_bound)
    )
    .map_err(io_err)?;
    writeln!(
        out,
        "sdim={}, separating lower bound={}",
        report.sdim, report.separating_lower_bound
    )
    .map_err(io_err)?;
    Ok(0)
}

fn cmd_counts<W: Write>(tk: Option<u32>, hz: Option<u32>, out: &mut W) -> Result<i32> {
    let (values, ok): (Vec<Count>, bool) = if let Some(k) = tk {
        let values: Vec<Count> = (1..=k).map(t_count).collect::<Result<_>>()?;
        let mut ok = true;
        for (idx, &v) in values.iter().enumerate() {
            let i = idx as u32 + 1;
            ok &= t_count_closed_form(i)? == v;
            if i <= 9 {
                ok &= brute_force_t_count(i)? == v;
            }
        }
        (values, ok)
    } else if let Some(p) = hz {
        let values: Vec<Count> = (1..=p).map(hertzsprung).collect::<Result<_>>()?;
        let mut ok = true;
        for (idx, &v) in values.iter().enumerate() {
            let i = idx as u32 + 1;
            if i <= 8 {
                ok &= brute_force_hertzsprung(i)? == v;
            }
        }
        (values, ok)
    } else {
        return Err(Error::param("one of --tk or --hertzsprung is required"));
    };
    let body = values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    writeln!(out, "{body} {}", if ok { "OK" } else { "MISMATCH" }).map_err(io_err)?;
    Ok(if ok { 0 } else { 1 })
}

fn cmd_bounds<W: Write>(size: SizeArgs, out: &mut W) -> Result<i32> {
    let report = component_report(size.p, size.n)?;
    writeln!(out, "p={} n={}", report.p, report.n).map_err(io_err)?;
    writeln!(out, "dim={}", report.total_dim).map_err(io_err)?;
    writeln!(out, "sdim={}", report.sdim).map_err(io_err)?;
    writeln!(
        out,
        "separating_lower_bound={}",
        report.separating_lower_bound
    )
    .map_err(io_err)?;
    writeln!(out, "invariant_ring_dim={}", report.invariant_ring_dim).map_err(io_err)?;
    writeln!(
        out,
        "semi_invariant_dim={}",
        opt_str(report.semi_invariant_dim)
    )
    .map_err(io_err)?;
    writeln!(
        out,
        "semi_invariant_lower_bound={}",
        opt_str(report.semi_invariant_lower_bound)
    )
    .map_err(io_err)?;
    Ok(0)
}

struct PropertyLog<'a, W: Write> {
    out: &'a mut W,
    all_ok: bool,
}

impl<'a, W: Write> PropertyLog<'a, W> {
    fn record(&mut self, name: &str, context: &str, ok: bool) -> Result<()> {
        writeln!(
            self.out,
            "{name} {context} {}",
            if ok { "OK" } else { "FAIL" }
        )
        .map_err(io_err)?;
        self.all_ok &= ok;
        Ok(())
    }
}

/// Expected node/edge/maximal counts for the small fixed diagrams.
fn figure_counts(p: u32, regime: Regime) -> Option<(usize, usize, usize)> {
    match (p, regime) {
        (2, Regime::ThreeOrMore) => Some((3, 1, 2)),
        (2, Regime::TwoMatrices) => Some((3, 2, 1)),
        (3, Regime::ThreeOrMore) => Some((11, 6, 6)),
        (3, Regime::TwoMatrices) => Some((11, 10, 3)),
        _ => None,
    }
}

fn check_figures(poset: &Poset) -> bool {
    match figure_counts(poset.p(), poset.regime()) {
        Some((nodes, edges, maximal)) => {
            poset.len() == nodes
                && poset.edge_count() == edges
                && poset.maximal_elements().len() == maximal
        }
        None => true,
    }
}

fn check_gradedness(poset: &Poset) -> Result<bool> {
    for e in poset.elements() {
        for parent in poset.parents_of(e)? {
            if parent.rank() + 1 != e.rank() {
                return Ok(false);
            }
        }
    }
    for a in poset.elements() {
        for b in poset.elements() {
            if poset.leq(a, b)? && a.rank() < b.rank() && a != b {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn check_criterion_equivalence(poset: &Poset) -> Result<bool> {
    for e in poset.elements() {
        let by_parents = poset.parents_of(e)?.is_empty();
        if by_parents != is_maximal_by_criterion(e, poset.regime()) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn check_count_formulas(poset: &Poset) -> Result<bool> {
    let p = poset.p();
    match poset.regime() {
        Regime::ThreeOrMore => {
            for k in 1..=p {
                let got = poset
                    .maximal_elements()
                    .iter()
                    .filter(|e| e.rank() == k as usize)
                    .count() as Count;
                if got != binomial(p as u64 - 1, k as u64 - 1)? * t_count(k)? {
                    return Ok(false);
                }
            }
        }
        Regime::TwoMatrices => {
            let got = poset
                .maximal_elements()
                .iter()
                .filter(|e| e.rank() == p as usize)
                .count() as Count;
            if got != hertzsprung(p)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn check_order_axioms(poset: &Poset, exhaustive: bool) -> Result<bool> {
    let elems = poset.elements();
    for a in elems {
        if !poset.leq(a, a)? {
            return Ok(false);
        }
        for b in elems {
            if poset.leq(a, b)? && poset.leq(b, a)? && a != b {
                return Ok(false);
            }
        }
    }
    let stride = if exhaustive { 1 } else { 7 };
    for (i, a) in elems.iter().enumerate().step_by(stride) {
        for b in elems {
            if !poset.leq(a, b)? {
                continue;
            }
            for (j, c) in elems.iter().enumerate() {
                if (i + j) % stride != 0 && !exhaustive {
                    continue;
                }
                if poset.leq(b, c)? && !poset.leq(a, c)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn check_compatibility(poset: &Poset, cache: &mut PosetCache) -> Result<bool> {
    for a in poset.elements() {
        for b in poset.elements() {
            if a.rank() < b.rank() {
                continue;
            }
            let via_compat = compatibility_check_with(a, b, poset.regime(), cache)?;
            if via_compat != poset.leq(a, b)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn cmd_verify_poset<W: Write>(max_p: u32, out: &mut W) -> Result<i32> {
    let mut log = PropertyLog { out, all_ok: true };
    let mut cache = PosetCache::new();
    for p in 2..=max_p {
        for regime in [Regime::ThreeOrMore, Regime::TwoMatrices] {
            let poset = build_poset(p, regime)?;
            let ctx = format!("p={p} {}", regime.label());
            if figure_counts(p, regime).is_some() {
                log.record("figures", &ctx, check_figures(&poset))?;
            }
            log.record("gradedness", &ctx, check_gradedness(&poset)?)?;
            log.record(
                "maximality-criterion",
                &ctx,
                check_criterion_equivalence(&poset)?,
            )?;
            log.record("count-formulas", &ctx, check_count_formulas(&poset)?)?;
            log.record("order-axioms", &ctx, check_order_axioms(&poset, p <= 4)?)?;
            if p <= 4 {
                log.record(
                    "compatibility",
                    &ctx,
                    check_compatibility(&poset, &mut cache)?,
                )?;
            }
        }
    }
    let ok = log.all_ok;
    writeln!(out, "RESULT {}", if ok { "OK" } else { "FAIL" }).map_err(io_err)?;
    Ok(if ok { 0 } else { 1 })
}

fn cmd_verify_numeric<W: Write>(
    p: u32,
    n: u32,
    trials: u64,
    seed: u64,
    tol: f64,
    max_word_len: usize,
    out: &mut W,
) -> Result<i32> {
    let tol = Tolerance::new(tol)?;
    let records = run_numeric_suite(p, n as usize, trials, seed, tol, max_word_len)?;
    let mut all_ok = true;
    for r in &records {
        let line = serde_json::to_string(r)
            .map_err(|e| Error::InvalidParameter(format!("json encoding failed: {e}")))?;
        writeln!(out, "{line}").map_err(io_err)?;
        all_ok &= r.passed();
    }
    writeln!(out, "RESULT {}", if all_ok { "OK" } else { "FAIL" }).map_err(io_err)?;
    Ok(if all_ok { 0 } else { 1 })
}

/// Writer-free convenience used by tests: captures stdout into a string.
pub fn run_to_string(argv: &[&str]) -> (i32, String) {
    let args: Vec<String> = argv.iter().map(|s| s.to_string()).collect();
    let mut buf = Vec::new();
    let code = run(&args, &mut buf);
    (code, String::from_utf8(buf).expect("utf-8 output"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_output_matches_the_sequences() {
        let (code, out) = run_to_string(&["sepvar", "counts", "--tk", "6"]);
        assert_eq!(code, 0);
        assert_eq!(out, "1 1 3 11 53 309 OK\n");

        let (code, out) = run_to_string(&["sepvar", "counts", "--hertzsprung", "6"]);
        assert_eq!(code, 0);
        assert_eq!(out, "1 0 0 2 14 90 OK\n");
    }

    #[test]
    fn components_table_ends_with_sdim_line() {
        let (code, out) = run_to_string(&["sepvar", "components", "--p", "4", "--n", "2"]);
        assert_eq!(code, 0);
        assert!(
            out.ends_with("sdim=44, separating lower bound=20\n"),
            "{out}"
        );
        assert!(out.contains("0 1 47\n"));
        assert!(out.contains("3 2 44\n"));
    }

    #[test]
    fn poset_dot_to_stdout() {
        let (code, out) = run_to_string(&["sepvar", "poset", "--p", "2", "--n", "2", "--dot", "-"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().filter(|l| l.contains("[label=")).count(), 3);
        assert_eq!(out.lines().filter(|l| l.contains(" -> ")).count(), 2);
    }

    #[test]
    fn usage_errors_exit_2() {
        let (code, _) = run_to_string(&["sepvar", "counts"]);
        assert_eq!(code, 2);
        let (code, _) = run_to_string(&["sepvar", "components", "--p", "4", "--n", "1"]);
        assert_eq!(code, 2);
        let (code, _) = run_to_string(&["sepvar", "components", "--p", "9", "--n", "3"]);
        assert_eq!(code, 2);
        let (code, _) = run_to_string(&["sepvar", "nonsense"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn verify_poset_small() {
        let (code, out) = run_to_string(&["sepvar", "verify", "poset", "--max-p", "3"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.ends_with("RESULT OK\n"));
        assert!(out.contains("figures p=3 n=2 OK"));
    }
}
