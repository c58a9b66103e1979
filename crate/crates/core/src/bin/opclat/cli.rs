//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 domain error (the input is
//! not a lattice, not invariant, not interpolable, a check failed), 3 budget
//! exceeded.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use opclat::antichain::{build_certificate, check_step, parse_certificate};
use opclat::interpolation::{
    find_same_type_pair, has_1ip, interpolating_polynomial, same_qf_type, OneIpVerdict,
};
use opclat::lattice::{make_standard_with_limit, parse_lattice_text, LatticeError, DEFAULT_MAX_SIZE};
use opclat::opc::{count_monotone, counting_report, is_n_opc, OpcBudget, OpcError};
use opclat::synthesis::corpus::random_invariant_monotone;
use opclat::synthesis::{
    growth_report, growth_tsv, synthesize, synthesize_stages, verify_polynomial, SynthesisError, SynthesisProblem,
    SynthesizedPolynomial, Trials,
};
use opclat::table::{parse_table, TableError};
use opclat::term::parse_term;
use opclat::{Assignment, FiniteLattice, MonotoneTable};

#[derive(Parser, Debug)]
#[command(name = "opclat", version, about = "Finite lattice polynomial workbench")]
struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for random function generation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,
    /// Largest lattice accepted.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_SIZE as u64, value_parser = clap::value_parser!(u64).range(1..))]
    max_size: u64,
    /// Largest input space |L|^n for enumeration and clone generation.
    #[arg(long, global = true, default_value_t = 4096, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Tsv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check or print a lattice.
    Lattice {
        #[command(subcommand)]
        action: LatticeAction,
    },
    /// Evaluate a term under an assignment.
    Eval {
        #[arg(long)]
        lattice: String,
        #[arg(long)]
        term: String,
        #[arg(long, default_value = "")]
        assign: String,
    },
    /// Synthesize a polynomial for an invariant monotone function.
    Synth {
        #[arg(long)]
        lattice: String,
        #[arg(long = "fn")]
        function: PathBuf,
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// `all`, a number of sampled fresh tuples, or `none`.
        #[arg(long, default_value = "none")]
        verify: String,
        /// Print node counts per stage.
        #[arg(long)]
        metrics: bool,
    },
    /// Check a polynomial against a function table.
    Verify {
        #[arg(long)]
        lattice: String,
        #[arg(long = "fn")]
        function: PathBuf,
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long)]
        poly: PathBuf,
        #[arg(long, default_value = "all")]
        verify: String,
    },
    /// Decide the unary interpolation property.
    IpCheck {
        #[arg(long)]
        lattice: String,
    },
    /// Find a unary polynomial with p(a) = c and p(b) = d.
    Interp {
        #[arg(long)]
        lattice: String,
        /// `a,b`
        #[arg(long)]
        at: String,
        /// `c,d`
        #[arg(long)]
        to: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare quantifier-free types of two elements.
    TypeEq {
        #[arg(long)]
        lattice: String,
        /// `a,b`; omit to search for the first same-type pair.
        #[arg(long)]
        pair: Option<String>,
        #[arg(long, default_value = "")]
        over: String,
    },
    /// Run the antichain construction and write its certificate.
    Antichain {
        #[arg(long)]
        lattice: String,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare monotone maps with polynomial functions.
    Opc {
        #[arg(long)]
        lattice: String,
        #[arg(long)]
        arity: usize,
        #[arg(long)]
        count_only: bool,
        #[arg(long)]
        witness_out: Option<PathBuf>,
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Node counts of synthesized terms by arity.
    Growth {
        #[arg(long)]
        lattice: String,
        #[arg(long, default_value_t = 3)]
        max_arity: usize,
    },
    /// Write a random invariant monotone function table.
    Gen {
        #[arg(long)]
        lattice: String,
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long)]
        arity: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum LatticeAction {
    /// Check the lattice axioms exhaustively.
    Validate {
        #[arg(long)]
        lattice: String,
    },
    /// Print the lattice in its text format.
    Show {
        #[arg(long)]
        lattice: String,
    },
}

/// Usage problems found after argument parsing.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

/// A check ran and failed.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct CheckFailed(String);

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() || cause.is::<std::io::Error>() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<SynthesisError>() {
            if matches!(
                e,
                SynthesisError::AtomBudgetExceeded { .. } | SynthesisError::TooManyTrials(_)
            ) {
                return 3;
            }
        }
        if let Some(OpcError::BudgetExceeded { .. }) = cause.downcast_ref::<OpcError>() {
            return 3;
        }
        if let Some(LatticeError::TooLarge { .. }) = cause.downcast_ref::<LatticeError>() {
            return 3;
        }
        if let Some(TableError::TooLarge { .. }) = cause.downcast_ref::<TableError>() {
            return 3;
        }
    }
    2
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit code. Errors go to stderr.
pub fn run(argv: &[OsString], out: &mut dyn Write) -> u8 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

struct Ctx {
    format: Format,
    seed: u64,
    max_size: usize,
    budget: OpcBudget,
}

impl Ctx {
    fn lattice(&self, spec: &str) -> Result<FiniteLattice> {
        let path = Path::new(spec);
        if path.is_file() {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {spec}"))?;
            return parse_lattice_text(&text, self.max_size).with_context(|| format!("lattice file {spec}"));
        }
        Ok(make_standard_with_limit(spec, self.max_size)?)
    }

    fn table(&self, lattice: &FiniteLattice, path: &Path) -> Result<MonotoneTable> {
        let text = read(path)?;
        let (_, table) = parse_table(&text, Some(lattice), self.max_size)
            .with_context(|| format!("function table {}", path.display()))?;
        Ok(table)
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn distinct_paths(a: &Path, b: &Path) -> Result<()> {
    if a == b {
        bail!(UsageError(format!("input and output paths are both {}", a.display())));
    }
    Ok(())
}

fn pair(lattice: &FiniteLattice, text: &str, flag: &str) -> Result<(opclat::Elem, opclat::Elem)> {
    let els = lattice.parse_element_list(text)?;
    match els[..] {
        [a, b] => Ok((a, b)),
        _ => Err(anyhow!(UsageError(format!("--{flag} expects two elements, got `{text}`")))),
    }
}

fn trials(spec: &str) -> Result<Option<Trials>> {
    match spec {
        "none" => Ok(None),
        "all" => Ok(Some(Trials::All)),
        n => match n.parse::<usize>() {
            Ok(c) if c > 0 => Ok(Some(Trials::Sample(c))),
            _ => Err(anyhow!(UsageError(format!(
                "--verify expects `all`, `none` or a positive count, got `{n}`"
            )))),
        },
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<u8> {
    if let Some(j) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j as usize).build_global();
    }
    let ctx = Ctx {
        format: cli.format,
        seed: cli.seed,
        max_size: cli.max_size as usize,
        budget: OpcBudget {
            max_inputs: cli.budget as usize,
            ..OpcBudget::default()
        },
    };
    let mut text = String::new();
    let code = match &cli.command {
        Command::Lattice { action } => lattice_cmd(&ctx, action, &mut text)?,
        Command::Eval { lattice, term, assign } => {
            let l = ctx.lattice(lattice)?;
            let t = parse_term(term).context("term")?;
            let asg = Assignment::parse(&l, assign).context("assignment")?;
            let v = t.evaluate(&l, &asg)?;
            writeln!(text, "{}", l.element_name(v))?;
            0
        }
        Command::Synth {
            lattice,
            function,
            params,
            out: dest,
            verify,
            metrics,
        } => {
            if let Some(d) = dest {
                distinct_paths(function, d)?;
            }
            let trials = trials(verify)?;
            let l = ctx.lattice(lattice)?;
            let f = ctx.table(&l, function)?;
            let params = l.parse_element_list(params)?;
            let problem = SynthesisProblem::new(&l, f, &params)?;
            let poly = synthesize(&problem)?;
            match dest {
                Some(d) => write_file(d, &format!("{}\n", poly.term))?,
                None => writeln!(text, "{}", poly.term)?,
            }
            writeln!(
                text,
                "synthesized k={} n={} t={} nodes={}",
                poly.k,
                poly.n,
                poly.t_budget,
                poly.term.size()
            )?;
            if *metrics && problem.arity() >= 1 {
                let m = synthesize_stages(&problem, None)?.metrics();
                match ctx.format {
                    Format::Text => writeln!(
                        text,
                        "nodes tau_constant={} tau_raw={} tau_clean={} tau_bounded={} total={}",
                        m.tau_constant, m.tau_raw, m.tau_clean, m.tau_bounded, m.total
                    )?,
                    Format::Tsv => write!(
                        text,
                        "tau_constant\ttau_raw\ttau_clean\ttau_bounded\ttotal\n{}\t{}\t{}\t{}\t{}\n",
                        m.tau_constant, m.tau_raw, m.tau_clean, m.tau_bounded, m.total
                    )?,
                }
            }
            match trials {
                Some(t) => verify_and_report(&problem, &poly, &t, &mut text)?,
                None => 0,
            }
        }
        Command::Verify {
            lattice,
            function,
            params,
            poly,
            verify,
        } => {
            let trials = trials(verify)?.unwrap_or(Trials::All);
            let l = ctx.lattice(lattice)?;
            let f = ctx.table(&l, function)?;
            let params = l.parse_element_list(params)?;
            let term = parse_term(read(poly)?.trim()).context("polynomial")?;
            let problem = SynthesisProblem::new(&l, f, &params)?;
            let sp = SynthesizedPolynomial {
                term,
                k: params.len(),
                n: problem.arity(),
                t_budget: problem.fresh_budget(),
            };
            verify_and_report(&problem, &sp, &trials, &mut text)?
        }
        Command::IpCheck { lattice } => {
            let l = ctx.lattice(lattice)?;
            match has_1ip(&l) {
                OneIpVerdict::Holds => writeln!(text, "1-IP: true")?,
                OneIpVerdict::Fails { a, b, c, d } => {
                    let n = |e| l.element_name(e);
                    writeln!(text, "1-IP: false")?;
                    writeln!(
                        text,
                        "no unary polynomial maps {} to {} and {} to {}",
                        n(a),
                        n(c),
                        n(b),
                        n(d)
                    )?;
                    writeln!(text, "quadruple {},{},{},{}", n(a), n(b), n(c), n(d))?;
                }
            }
            0
        }
        Command::Interp {
            lattice,
            at,
            to,
            out: dest,
        } => {
            let l = ctx.lattice(lattice)?;
            let (a, b) = pair(&l, at, "at")?;
            let (c, d) = pair(&l, to, "to")?;
            let p = interpolating_polynomial(&l, a, b, c, d)?;
            let coeffs: Vec<String> = p
                .coefficients
                .iter()
                .enumerate()
                .map(|(j, &e)| format!("s{}={}", j + 1, l.element_name(e)))
                .collect();
            match dest {
                Some(path) => write_file(path, &format!("{}\n", p.term))?,
                None => writeln!(text, "{}", p.term)?,
            }
            writeln!(text, "coefficients {}", coeffs.join(","))?;
            writeln!(
                text,
                "p({}) = {}, p({}) = {}",
                l.element_name(a),
                l.element_name(p.eval(&l, a)),
                l.element_name(b),
                l.element_name(p.eval(&l, b))
            )?;
            0
        }
        Command::TypeEq { lattice, pair: p, over } => {
            let l = ctx.lattice(lattice)?;
            let over = l.parse_element_list(over)?;
            match p {
                Some(p) => {
                    let (a, b) = pair(&l, p, "pair")?;
                    writeln!(text, "same type: {}", same_qf_type(&l, a, b, &over))?;
                }
                None => match find_same_type_pair(&l, &over) {
                    Some((a, b)) => writeln!(text, "pair {},{}", l.element_name(a), l.element_name(b))?,
                    None => writeln!(text, "pair none")?,
                },
            }
            0
        }
        Command::Antichain {
            lattice,
            steps,
            out: dest,
        } => {
            let l = ctx.lattice(lattice)?;
            let cert = build_certificate(&l, *steps)?;
            if let Some(bad) = cert.steps.iter().find(|s| !check_step(&l, s).ok()) {
                return Err(anyhow!(CheckFailed(format!("step {} fails its re-check", bad.index))));
            }
            let body = cert.to_text(&l);
            match dest {
                Some(path) => {
                    write_file(path, &body)?;
                    match cert.exhausted_at {
                        Some(i) => writeln!(text, "exhausted at step {i}")?,
                        None => writeln!(text, "completed {} steps", cert.steps.len())?,
                    }
                    writeln!(text, "tuples {}", cert.tuples.len())?;
                    writeln!(text, "verified {}", cert.verified())?;
                }
                None => text.push_str(&body),
            }
            if cert.verified() {
                0
            } else {
                2
            }
        }
        Command::Opc {
            lattice,
            arity,
            count_only,
            witness_out,
            certificate,
        } => {
            if let (Some(w), Some(c)) = (witness_out, certificate) {
                distinct_paths(c, w)?;
            }
            let l = ctx.lattice(lattice)?;
            if *count_only {
                let count = count_monotone(&l, *arity, &ctx.budget)?;
                match ctx.format {
                    Format::Text => writeln!(text, "monotone {count}")?,
                    Format::Tsv => write!(text, "lattice\tarity\tmonotone\n{}\t{arity}\t{count}\n", l.name())?,
                }
                return emit(out, &text).map(|_| 0);
            }
            let report = is_n_opc(&l, *arity, &ctx.budget)?;
            match certificate {
                Some(path) => {
                    let cert = parse_certificate(&l, &read(path)?)?;
                    let counting = counting_report(&l, *arity, Some(&cert.tuples), &ctx.budget)?;
                    match ctx.format {
                        Format::Text => {
                            text.push_str(&counting.to_text());
                            writeln!(text, "{}-opc: {}", arity, report.is_opc)?;
                        }
                        Format::Tsv => text.push_str(&counting.to_tsv()),
                    }
                }
                None => match ctx.format {
                    Format::Text => text.push_str(&report.to_text()),
                    Format::Tsv => text.push_str(&report.to_tsv()),
                },
            }
            if let Some(path) = witness_out {
                match &report.witness {
                    Some(w) => write_file(path, &w.to_text(&l))?,
                    None => writeln!(text, "no witness: every monotone map is polynomial")?,
                }
            }
            0
        }
        Command::Growth { lattice, max_arity } => {
            let l = ctx.lattice(lattice)?;
            text.push_str(&growth_tsv(&growth_report(&l, *max_arity)?));
            0
        }
        Command::Gen {
            lattice,
            params,
            arity,
            out: dest,
        } => {
            let l = ctx.lattice(lattice)?;
            let params = l.parse_element_list(params)?;
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            let f = random_invariant_monotone(&l, &params, *arity, &mut rng)?;
            match dest {
                Some(path) => write_file(path, &f.to_text(&l))?,
                None => text.push_str(&f.to_text(&l)),
            }
            0
        }
    };
    emit(out, &text)?;
    Ok(code)
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).context("writing output")?;
    Ok(())
}

fn lattice_cmd(ctx: &Ctx, action: &LatticeAction, text: &mut String) -> Result<u8> {
    match action {
        LatticeAction::Validate { lattice } => {
            let l = ctx.lattice(lattice)?;
            l.validate().map_err(CheckFailed)?;
            match ctx.format {
                Format::Text => writeln!(
                    text,
                    "lattice {}: {} elements, {} atoms, axioms hold",
                    l.name(),
                    l.size(),
                    l.atoms().len()
                )?,
                Format::Tsv => write!(
                    text,
                    "lattice\telements\tatoms\tvalid\n{}\t{}\t{}\ttrue\n",
                    l.name(),
                    l.size(),
                    l.atoms().len()
                )?,
            }
        }
        LatticeAction::Show { lattice } => {
            let l = ctx.lattice(lattice)?;
            text.push_str(&l.to_text());
        }
    }
    Ok(0)
}

fn verify_and_report(
    problem: &SynthesisProblem<'_>,
    poly: &SynthesizedPolynomial,
    trials: &Trials,
    text: &mut String,
) -> Result<u8> {
    let report = verify_polynomial(problem, poly, trials)?;
    writeln!(text, "{}", report.describe(problem.lattice()))?;
    Ok(if report.is_success() { 0 } else { 2 })
}
