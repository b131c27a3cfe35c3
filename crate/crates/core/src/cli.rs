//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 bad flags or inputs, 3 infeasible
//! basis pair, 4 verification below [`VERIFY_THRESHOLD`].

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::catalog::named_restorations;
use crate::decomposer::{GateSequence, MAX_LEN};
use crate::error::TeleportError;
use crate::protocol::{run_teleportation, BasisChoice, OutcomeSelection, TeleportRun};
use crate::qmath::{fmt_complex, parse_complex, BasisId, Complex, ComplexMatrix2};
use crate::security::{basis_keyspace_report, mismatch_fidelity, AttackReport, KeyspaceReport};
use crate::simulator::{Outcome, StateVector};
use crate::solver::{branch_matrices, check_relation, solve_restoration, verify_table, RestorationTable, SolveResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_BELOW_THRESHOLD: i32 = 4;

pub const VERIFY_THRESHOLD: f64 = 1.0 - 1e-6;

#[derive(Debug, Parser)]
#[command(
    name = "multiaxis-teleport",
    version,
    about = "Teleportation with arbitrary measurement bases: solve, verify and attack restoration tables"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Seed for every random draw; falls back to $TELEPORT_SEED, then 0.
    #[arg(long, global = true, env = "TELEPORT_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct BasisArgs {
    /// Message-qubit basis: Z, X, Y, -Y or arb:[x11,x12,x21,x22].
    #[arg(long = "msg-basis", default_value = "Z", allow_hyphen_values = true, value_parser = parse_basis)]
    pub msg_basis: BasisId,

    /// Basis for Alice's half of the pair.
    #[arg(long = "a-basis", default_value = "Z", allow_hyphen_values = true, value_parser = parse_basis)]
    pub a_basis: BasisId,
}

impl BasisArgs {
    fn choice(&self) -> BasisChoice {
        BasisChoice::new(self.msg_basis, self.a_basis)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Teleport one message and report Bob's state before and after restoration.
    Run {
        #[command(flatten)]
        bases: BasisArgs,
        #[arg(long, default_value = "1", allow_hyphen_values = true, value_parser = parse_amplitude)]
        alpha: Complex,
        #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = parse_amplitude)]
        beta: Complex,
        /// Force Alice's outcome (00, 01, 10, 11); sampled from the seed otherwise.
        #[arg(long, value_parser = parse_outcome)]
        outcome: Option<Outcome>,
        /// Restoration set to use instead of the solved one, e.g. I,X,Z,ZX.
        #[arg(long, value_parser = parse_table)]
        table: Option<RestorationTable>,
    },
    /// Solve the restoration table for a basis pair.
    Solve {
        #[command(flatten)]
        bases: BasisArgs,
        /// Longest gate sequence tried when naming each restoration.
        #[arg(long, default_value_t = MAX_LEN)]
        max_len: usize,
    },
    /// Render solved tables; --all covers every pair over {Z, X, Y, -Y}.
    Table {
        #[command(flatten)]
        bases: BasisArgs,
        #[arg(long)]
        all: bool,
    },
    /// Monte-Carlo check that a table restores random messages.
    Verify {
        #[command(flatten)]
        bases: BasisArgs,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, value_parser = parse_table)]
        table: Option<RestorationTable>,
    },
    /// Fidelity an eavesdropper gets by restoring with guessed bases.
    Attack {
        /// True basis pair, e.g. Y,Y.
        #[arg(long = "true", default_value = "Z,Z", allow_hyphen_values = true, value_parser = parse_choice)]
        true_bases: BasisChoice,
        /// Guessed basis pair.
        #[arg(long, default_value = "Z,Z", allow_hyphen_values = true, value_parser = parse_choice)]
        guess: BasisChoice,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Comma-separated key alphabet (e.g. Z,Y,-Y): report the full
        /// true-vs-guessed grid instead of a single pair.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_alphabet)]
        keyspace: Option<Alphabet>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alphabet(pub Vec<BasisId>);

fn parse_basis(s: &str) -> Result<BasisId, String> {
    s.parse().map_err(|e: TeleportError| e.to_string())
}

fn parse_choice(s: &str) -> Result<BasisChoice, String> {
    s.parse().map_err(|e: TeleportError| e.to_string())
}

fn parse_amplitude(s: &str) -> Result<Complex, String> {
    parse_complex(s).map_err(|e| e.to_string())
}

fn parse_outcome(s: &str) -> Result<Outcome, String> {
    s.parse().map_err(|e: TeleportError| e.to_string())
}

fn parse_table(s: &str) -> Result<RestorationTable, String> {
    let seqs = s
        .split(',')
        .map(|p| p.parse::<GateSequence>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let seqs: [GateSequence; 4] = seqs
        .try_into()
        .map_err(|v: Vec<_>| format!("expected 4 comma-separated entries, got {}", v.len()))?;
    Ok(RestorationTable::from_sequences(seqs))
}

fn parse_alphabet(s: &str) -> Result<Alphabet, String> {
    s.split(',')
        .map(parse_basis)
        .collect::<Result<Vec<_>, _>>()
        .map(Alphabet)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub bases: BasisChoice,
    pub message: StateVector,
    pub table: RestorationTable,
    pub run: TeleportRun,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub bases: BasisChoice,
    /// Columns: Bob's branch vector for the messages |0⟩ and |1⟩.
    pub branch_matrices: [ComplexMatrix2; 4],
    pub result: SolveResult,
    /// Conventional names for catalogued pairs.
    pub named: Option<[GateSequence; 4]>,
    pub relation_holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub tables: Vec<SolveReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub bases: BasisChoice,
    pub table: RestorationTable,
    pub trials: usize,
    pub seed: u64,
    pub min_fidelity: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// Everything the CLI can emit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Report {
    Run(RunReport),
    Solve(SolveReport),
    Table(TableReport),
    Verify(VerifyReport),
    Attack(AttackReport),
    Keyspace(KeyspaceReport),
}

/// Parses `args` (including the program name), executes the command and
/// returns the process exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let (report, code) = match execute(&cli) {
        Ok(pair) => pair,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            let code = match e {
                TeleportError::InfeasibleGuess(_) => EXIT_INFEASIBLE,
                _ => EXIT_USAGE,
            };
            return code;
        }
    };
    let json = serde_json::to_string_pretty(&report).expect("reports serialize");
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, format!("{json}\n")) {
            let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
            return EXIT_IO;
        }
    }
    let rendered = match cli.format {
        Format::Json => format!("{json}\n"),
        Format::Text => render_text(&report),
    };
    if out.write_all(rendered.as_bytes()).is_err() {
        return EXIT_IO;
    }
    code
}

fn solved_or_given(
    bases: &BasisChoice,
    given: &Option<RestorationTable>,
) -> crate::Result<Result<RestorationTable, SolveResult>> {
    if let Some(t) = given {
        return Ok(Ok(t.clone()));
    }
    Ok(match solve_restoration(bases)? {
        SolveResult::Table(t) => Ok(t.with_decompositions(MAX_LEN)),
        infeasible => Err(infeasible),
    })
}

fn solve_report(bases: &BasisChoice, max_len: usize) -> crate::Result<SolveReport> {
    let result = match solve_restoration(bases)? {
        SolveResult::Table(t) => SolveResult::Table(t.with_decompositions(max_len)),
        other => other,
    };
    let relation_holds = result.table().map(check_relation);
    Ok(SolveReport {
        bases: *bases,
        branch_matrices: branch_matrices(bases)?,
        result,
        named: named_restorations(bases),
        relation_holds,
    })
}

fn infeasible_solve_report(bases: &BasisChoice, result: SolveResult) -> crate::Result<SolveReport> {
    Ok(SolveReport {
        bases: *bases,
        branch_matrices: branch_matrices(bases)?,
        result,
        named: None,
        relation_holds: None,
    })
}

fn execute(cli: &Cli) -> crate::Result<(Report, i32)> {
    match &cli.command {
        Command::Run {
            bases,
            alpha,
            beta,
            outcome,
            table,
        } => {
            let bases = bases.choice();
            let message = StateVector::message(*alpha, *beta)?;
            let table = match solved_or_given(&bases, table)? {
                Ok(t) => t,
                Err(infeasible) => {
                    return Ok((
                        Report::Solve(infeasible_solve_report(&bases, infeasible)?),
                        EXIT_INFEASIBLE,
                    ))
                }
            };
            let selection = match outcome {
                Some(o) => OutcomeSelection::Forced(*o),
                None => OutcomeSelection::Random(cli.seed),
            };
            let run = run_teleportation(&message, &bases, &table, selection)?;
            Ok((
                Report::Run(RunReport {
                    bases,
                    message,
                    table,
                    run,
                }),
                EXIT_OK,
            ))
        }
        Command::Solve { bases, max_len } => {
            let report = solve_report(&bases.choice(), *max_len)?;
            let code = if report.result.table().is_some() {
                EXIT_OK
            } else {
                EXIT_INFEASIBLE
            };
            Ok((Report::Solve(report), code))
        }
        Command::Table { bases, all } => {
            let pairs = if *all {
                BasisChoice::named_pairs()
            } else {
                vec![bases.choice()]
            };
            let tables = pairs
                .iter()
                .map(|p| solve_report(p, MAX_LEN))
                .collect::<crate::Result<Vec<_>>>()?;
            Ok((Report::Table(TableReport { tables }), EXIT_OK))
        }
        Command::Verify {
            bases,
            trials,
            table,
        } => {
            let bases = bases.choice();
            let table = match solved_or_given(&bases, table)? {
                Ok(t) => t,
                Err(infeasible) => {
                    return Ok((
                        Report::Solve(infeasible_solve_report(&bases, infeasible)?),
                        EXIT_INFEASIBLE,
                    ))
                }
            };
            let min_fidelity = verify_table(&bases, &table, *trials, cli.seed)?;
            let passed = min_fidelity >= VERIFY_THRESHOLD;
            let report = VerifyReport {
                bases,
                table,
                trials: *trials,
                seed: cli.seed,
                min_fidelity,
                threshold: VERIFY_THRESHOLD,
                passed,
            };
            let code = if passed { EXIT_OK } else { EXIT_BELOW_THRESHOLD };
            Ok((Report::Verify(report), code))
        }
        Command::Attack {
            true_bases,
            guess,
            trials,
            keyspace,
        } => match keyspace {
            Some(Alphabet(alphabet)) => Ok((
                Report::Keyspace(basis_keyspace_report(alphabet, *trials, cli.seed)?),
                EXIT_OK,
            )),
            None => Ok((
                Report::Attack(mismatch_fidelity(true_bases, guess, *trials, cli.seed)?),
                EXIT_OK,
            )),
        },
    }
}

fn braces<'a>(items: impl Iterator<Item = &'a GateSequence>) -> String {
    let names: Vec<String> = items.map(GateSequence::symbols).collect();
    format!("{{{}}}", names.join(", "))
}

fn render_solve(s: &mut String, r: &SolveReport) {
    let _ = writeln!(s, "bases: msg={} A={}", r.bases.msg, r.bases.alice);
    match &r.result {
        SolveResult::Infeasible { reason, witness } => {
            let _ = writeln!(s, "INFEASIBLE ({reason:?} at outcome {witness})");
        }
        SolveResult::Table(table) => {
            for o in Outcome::ALL {
                let k = o.index();
                let _ = writeln!(s, "outcome {o}");
                let _ = writeln!(s, "  branch map   {}", r.branch_matrices[k]);
                let _ = writeln!(s, "  restoration  {}", table.unitary(o));
                let gates = table
                    .decomposition(o)
                    .map(GateSequence::symbols)
                    .unwrap_or_else(|| "(no short gate sequence)".into());
                match &r.named {
                    Some(named) if named[k].gates() != table.decomposition(o).map(|g| g.gates()).unwrap_or(&[]) => {
                        let _ = writeln!(s, "  gates        {gates}  (alias {})", named[k].symbols());
                    }
                    _ => {
                        let _ = writeln!(s, "  gates        {gates}");
                    }
                }
            }
            if let Some(holds) = r.relation_holds {
                let verdict = if holds { "holds" } else { "violated" };
                let _ = writeln!(s, "relation U01·U00⁻¹·U10 ≡ U11: {verdict}");
            }
            let canonical: Vec<GateSequence> = Outcome::ALL
                .iter()
                .filter_map(|&o| table.decomposition(o).cloned())
                .collect();
            if canonical.len() == 4 {
                let _ = writeln!(s, "canonical: {}", braces(canonical.iter()));
            }
            if let Some(named) = &r.named {
                let _ = writeln!(s, "restoration: {}", braces(named.iter()));
            }
        }
    }
}

fn render_table_row(s: &mut String, r: &SolveReport) {
    let label = format!("{:>3} ⊗ {:<3}", r.bases.msg.to_string(), r.bases.alice.to_string());
    match &r.result {
        SolveResult::Infeasible { reason, witness } => {
            let _ = writeln!(s, "{label}  INFEASIBLE ({reason:?} at outcome {witness})");
        }
        SolveResult::Table(table) => {
            let canonical: Vec<String> = Outcome::ALL
                .iter()
                .map(|&o| {
                    table
                        .decomposition(o)
                        .map(GateSequence::symbols)
                        .unwrap_or_else(|| "?".into())
                })
                .collect();
            let _ = write!(s, "{label}  {{{}}}", canonical.join(", "));
            if let Some(named) = &r.named {
                let _ = write!(s, "  restoration: {}", braces(named.iter()));
            }
            let _ = writeln!(s);
        }
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_else(|| "n/a".into())
}

fn render_text(report: &Report) -> String {
    let mut s = String::new();
    match report {
        Report::Solve(r) => render_solve(&mut s, r),
        Report::Table(t) => {
            for r in &t.tables {
                render_table_row(&mut s, r);
            }
        }
        Report::Run(r) => {
            let [a, b] = [r.message.amplitude(0), r.message.amplitude(1)];
            let _ = writeln!(s, "bases: msg={} A={}", r.bases.msg, r.bases.alice);
            let _ = writeln!(s, "message: ({})|0⟩ + ({})|1⟩", fmt_complex(a), fmt_complex(b));
            let _ = writeln!(s, "outcome: {}  probability: {:.6}", r.run.outcome, r.run.probability);
            let _ = writeln!(s, "bob before: {}", r.run.bob_before);
            let restoration = r
                .table
                .decomposition(r.run.outcome)
                .map(GateSequence::symbols)
                .unwrap_or_else(|| r.table.unitary(r.run.outcome).to_string());
            let _ = writeln!(s, "restoration: {restoration}");
            let _ = writeln!(s, "bob after: {}", r.run.bob_after);
            let _ = writeln!(s, "fidelity: {:.12}", r.run.fidelity);
        }
        Report::Verify(r) => {
            let _ = writeln!(s, "bases: msg={} A={}", r.bases.msg, r.bases.alice);
            let _ = writeln!(
                s,
                "min fidelity over {} messages x 4 outcomes (seed {}): {:.12}",
                r.trials, r.seed, r.min_fidelity
            );
            let verdict = if r.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "{verdict} (threshold {:.6})", r.threshold);
        }
        Report::Attack(r) => {
            let _ = writeln!(s, "true bases: {}  guessed bases: {}", r.true_bases, r.guessed_bases);
            let _ = writeln!(s, "trials: {}", r.trials);
            let _ = writeln!(
                s,
                "fidelity mean {:.6}  min {:.6}  max {:.6}",
                r.mean_fidelity, r.min_fidelity, r.max_fidelity
            );
            let per: Vec<String> = Outcome::ALL
                .iter()
                .map(|o| format!("{o}: {}", fmt_opt(r.per_outcome_mean[o.index()])))
                .collect();
            let _ = writeln!(s, "per outcome: {}", per.join("  "));
        }
        Report::Keyspace(r) => {
            let names: Vec<String> = r.alphabet.iter().map(|b| format!("{:>9}", b.to_string())).collect();
            let _ = writeln!(s, "true \\ guess {}", names.join(""));
            for (t, row) in r.alphabet.iter().zip(&r.grid) {
                let cells: Vec<String> = row.iter().map(|c| format!("{:>9}", fmt_opt(*c))).collect();
                let _ = writeln!(s, "{:>12} {}", t.to_string(), cells.join(""));
            }
            let uniform: Vec<String> = r
                .alphabet
                .iter()
                .zip(&r.uniform_guess_fidelity)
                .map(|(b, f)| format!("{b}: {}", fmt_opt(*f)))
                .collect();
            let _ = writeln!(s, "uniform guess: {}", uniform.join("  "));
        }
    }
    s
}
