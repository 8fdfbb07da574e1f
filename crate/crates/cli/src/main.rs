use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use colp::coalgebra::{self, Mode, SweepBounds};
use colp::cotree::{build_cotree, export, ExportFormat};
use colp::exec::Exec;
use colp::intfunctor::{check_dist_naturality, check_monad_laws};
use colp::resolution::{sld_solve, tm_prove, verify_bridge, verify_bridge_all, TmOutcome};
use colp::saturation::{check_coherence_with, sample_roots, saturate_with, Bounds};
use colp::syntax::{
    classify, enumerate_atoms, parse_goals, parse_program, parse_query, Atom, Program,
};

/// Term-matching and SLD resolution, coinductive trees and their
/// coalgebraic semantics for Horn-clause programs.
///
/// A PROGRAM argument is a path to a `.lp` file. When no such file exists
/// it is looked up in $COLP_FIXTURE_DIR, then among the built-in fixtures
/// (listnat, listnat_plus, gc, bad, ground_abcd).
///
/// Exit status: 0 on success or when a check holds, 1 when a goal is not
/// proved, has no answers, or a check finds violations, 2 on usage errors
/// and unreadable input.
// Writes to stdout, ignoring a closed pipe.
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout().lock(), $($t)*);
    }};
}

macro_rules! outln {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($t)*);
    }};
}

#[derive(Parser)]
#[command(name = "colp", version)]
struct Cli {
    /// Evaluate sweeps on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a program and print it back.
    Parse {
        program: String,
        #[arg(long)]
        json: bool,
    },
    /// Report whether a program has existential variables.
    Classify { program: String },
    /// Term-matching proof search.
    Prove {
        program: String,
        goal: String,
        #[arg(long, default_value_t = 8)]
        fuel: usize,
        /// Print the proof tree.
        #[arg(long)]
        trace: bool,
    },
    /// SLD resolution; prints answers shortest first.
    Solve {
        program: String,
        /// Comma-separated goals.
        goals: String,
        #[arg(long, default_value_t = 8)]
        fuel: usize,
        #[arg(long, default_value_t = 10)]
        max_answers: usize,
    },
    /// Build the coinductive tree of an atom.
    Tree {
        program: String,
        atom: String,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = Format::Ascii)]
        format: Format,
    },
    /// The level-k approximant of an atom, as JSON.
    Approx {
        program: String,
        atom: String,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = ApproxMode::Ext)]
        mode: ApproxMode,
    },
    /// The saturated table of an atom, as JSON.
    Saturate {
        program: String,
        atom: String,
        #[command(flatten)]
        bounds: SatBounds,
    },
    /// Law and property checks; each prints a JSON report.
    Check {
        #[command(subcommand)]
        check: Check,
    },
    /// Compare step iteration with trees over an atom slice.
    Oracle {
        program: String,
        #[arg(long, default_value_t = 2)]
        max_context: usize,
        #[arg(long, default_value_t = 1)]
        max_depth: usize,
        #[arg(long, default_value_t = 4)]
        max_level: usize,
    },
}

#[derive(Subcommand)]
enum Check {
    /// Reindexing then stepping is below stepping the instance.
    Lax {
        program: String,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Along injections the comparison is an equality.
    Inj {
        program: String,
        #[arg(long, default_value_t = 2)]
        atom_context: usize,
        #[arg(long, default_value_t = 1)]
        atom_depth: usize,
        #[arg(long, default_value_t = 4)]
        max_target: usize,
        #[arg(long, default_value_t = 3)]
        tree_depth: usize,
    },
    /// Coherence of saturated tables; a fixed root sample unless ATOM is given.
    Saturation {
        program: String,
        atom: Option<String>,
        #[command(flatten)]
        bounds: SatBounds,
    },
    /// Unit and associativity laws of flattening.
    Monad {
        program: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Naturality of the distributive law and agreement with one-step values.
    Dist {
        program: String,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// SLD answers are provable by term matching.
    Bridge {
        program: String,
        goal: Option<String>,
        #[arg(long, default_value_t = 8)]
        fuel: usize,
    },
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 2)]
    atom_context: usize,
    #[arg(long, default_value_t = 1)]
    atom_depth: usize,
    #[arg(long, default_value_t = 2)]
    sub_context: usize,
    #[arg(long, default_value_t = 1)]
    sub_depth: usize,
    #[arg(long, default_value_t = 3)]
    tree_depth: usize,
}

#[derive(Args)]
struct SatBounds {
    /// Largest source context of a substitution; defaults to n + 2.
    #[arg(long)]
    max_context: Option<usize>,
    #[arg(long, default_value_t = 2)]
    max_depth: usize,
}

impl SatBounds {
    fn resolve(&self, n: usize) -> Bounds {
        Bounds {
            max_context: self.max_context.unwrap_or(n + 2),
            max_depth: self.max_depth,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Ascii,
    Dot,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ApproxMode {
    Plain,
    Ext,
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential {
        Exec::Sequential
    } else {
        Exec::default()
    };
    match run(cli.command, exec) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure(msg)) => {
            eprintln!("colp: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load(name: &str) -> Result<Program, Failure> {
    let direct = Path::new(name);
    let from_dir = std::env::var_os("COLP_FIXTURE_DIR").and_then(|d| {
        let d = PathBuf::from(d);
        [d.join(name), d.join(format!("{name}.lp"))]
            .into_iter()
            .find(|p| p.is_file())
    });
    let text = if direct.is_file() {
        std::fs::read_to_string(direct)?
    } else if let Some(p) = from_dir {
        std::fs::read_to_string(p)?
    } else if let Some(text) = colp::fixtures::by_name(name) {
        text.to_string()
    } else {
        return Err(Failure(format!("no program `{name}`")));
    };
    parse_program(&text).map_err(|e| Failure(format!("{name}: {e}")))
}

fn atom(program: &Program, text: &str) -> Result<Atom, Failure> {
    Ok(parse_query(text, &program.signature)?.goals.remove(0))
}

fn print_json(value: &serde_json::Value) {
    outln!(
        "{}",
        serde_json::to_string_pretty(value).expect("serializable")
    );
}

fn slice(program: &Program, max_n: usize, max_d: usize) -> Vec<Atom> {
    (0..=max_n)
        .flat_map(|n| enumerate_atoms(&program.signature, n, max_d))
        .collect()
}

fn run(command: Command, exec: Exec) -> Result<bool, Failure> {
    match command {
        Command::Parse { program, json } => {
            let p = load(&program)?;
            if json {
                let clauses: Vec<String> = p.clauses.iter().map(ToString::to_string).collect();
                print_json(&json!({
                    "clauses": clauses,
                    "functions": p.signature.functions.iter().map(|(k, v)| (k.clone(), json!(v))).collect::<serde_json::Map<_, _>>(),
                    "predicates": p.signature.predicates.iter().map(|(k, v)| (k.clone(), json!(v))).collect::<serde_json::Map<_, _>>(),
                }));
            } else {
                out!("{p}");
            }
            Ok(true)
        }
        Command::Classify { program } => {
            let p = load(&program)?;
            print_json(&serde_json::to_value(classify(&p))?);
            Ok(true)
        }
        Command::Prove {
            program,
            goal,
            fuel,
            trace,
        } => {
            let p = load(&program)?;
            let g = atom(&p, &goal)?;
            let outcome = tm_prove(&p, &g, fuel);
            match &outcome {
                TmOutcome::Proved(proof) => {
                    outln!("Proved");
                    if trace {
                        outln!("{proof}");
                    }
                }
                TmOutcome::FailedFinite => outln!("FailedFinite"),
                TmOutcome::FuelExhausted => outln!("FuelExhausted"),
            }
            Ok(outcome.is_proved())
        }
        Command::Solve {
            program,
            goals,
            fuel,
            max_answers,
        } => {
            let p = load(&program)?;
            let q = parse_goals(&goals, &p.signature)?;
            let mut any = false;
            for ans in sld_solve(&p, &q.goals, fuel).take(max_answers) {
                any = true;
                outln!("{}  ({} steps)", ans.render(&|i| q.name(i)), ans.steps);
            }
            if !any {
                outln!("no answers within {fuel} steps");
            }
            Ok(any)
        }
        Command::Tree {
            program,
            atom: text,
            depth,
            format,
        } => {
            let p = load(&program)?;
            let t = build_cotree(&p, &atom(&p, &text)?, depth);
            let format = match format {
                Format::Ascii => ExportFormat::Ascii,
                Format::Dot => ExportFormat::Dot,
                Format::Json => ExportFormat::Json,
            };
            let out = export(&t, &p, format);
            out!("{out}");
            if !out.ends_with('\n') {
                outln!("");
            }
            Ok(true)
        }
        Command::Approx {
            program,
            atom: text,
            depth,
            mode,
        } => {
            let p = load(&program)?;
            let a = atom(&p, &text)?;
            let mode = match mode {
                ApproxMode::Plain => Mode::Plain,
                ApproxMode::Ext => Mode::Ext,
            };
            let value = coalgebra::approximant(&p, &a, depth, mode)?;
            print_json(&json!({ "atom": a.to_string(), "level": depth, "approximant": value }));
            Ok(true)
        }
        Command::Saturate {
            program,
            atom: text,
            bounds,
        } => {
            let p = load(&program)?;
            let a = atom(&p, &text)?;
            let sat = saturate_with(&p, &a, bounds.resolve(a.context), exec);
            print_json(&sat.to_json());
            Ok(true)
        }
        Command::Oracle {
            program,
            max_context,
            max_depth,
            max_level,
        } => {
            let p = load(&program)?;
            let r = coalgebra::oracle_sweep(&p, max_context, max_depth, max_level, exec);
            print_json(&serde_json::to_value(&r)?);
            Ok(r.holds())
        }
        Command::Check { check } => run_check(check, exec),
    }
}

fn run_check(check: Check, exec: Exec) -> Result<bool, Failure> {
    match check {
        Check::Lax { program, sweep } => {
            let p = load(&program)?;
            let bounds = SweepBounds {
                max_atom_context: sweep.atom_context,
                max_atom_depth: sweep.atom_depth,
                max_sub_context: sweep.sub_context,
                max_sub_depth: sweep.sub_depth,
                tree_depth: sweep.tree_depth,
            };
            let r = coalgebra::lax_sweep(&p, bounds, exec);
            print_json(&serde_json::to_value(&r)?);
            Ok(r.holds())
        }
        Check::Inj {
            program,
            atom_context,
            atom_depth,
            max_target,
            tree_depth,
        } => {
            let p = load(&program)?;
            let r =
                coalgebra::inj_sweep(&p, atom_context, atom_depth, max_target, tree_depth, exec);
            print_json(&serde_json::to_value(&r)?);
            Ok(r.holds())
        }
        Check::Saturation {
            program,
            atom: text,
            bounds,
        } => {
            let p = load(&program)?;
            let roots = match text {
                Some(t) => vec![atom(&p, &t)?],
                None => sample_roots(&p),
            };
            let mut checked = 0;
            let mut violations = Vec::new();
            for root in &roots {
                let b = bounds.resolve(root.context);
                let sat = saturate_with(&p, root, b, exec);
                let r = check_coherence_with(&sat, b, exec);
                checked += r.checked;
                violations.extend(
                    r.violations
                        .into_iter()
                        .map(|v| json!({ "root": root.to_string(), "violation": v })),
                );
            }
            let holds = violations.is_empty();
            print_json(
                &json!({ "roots": roots.len(), "checked": checked, "violations": violations }),
            );
            Ok(holds)
        }
        Check::Monad {
            program,
            samples,
            seed,
        } => {
            let p = load(&program)?;
            let r = check_monad_laws(&p.signature, samples, seed);
            print_json(&serde_json::to_value(&r)?);
            Ok(r.holds())
        }
        Check::Dist {
            program,
            samples,
            seed,
        } => {
            let p = load(&program)?;
            let naturality = check_dist_naturality(&p.signature, samples, seed);
            let atoms = slice(&p, 2, 1);
            let mismatches: Vec<String> = atoms
                .iter()
                .filter(|a| {
                    !coalgebra::factorization_agrees(&p, a)
                        || !coalgebra::joint_factorization_agrees(&p, a)
                })
                .map(ToString::to_string)
                .collect();
            let holds = naturality.holds() && mismatches.is_empty();
            print_json(&json!({
                "naturality": naturality,
                "factorization": { "checked": atoms.len(), "mismatches": mismatches },
            }));
            Ok(holds)
        }
        Check::Bridge {
            program,
            goal,
            fuel,
        } => {
            let p = load(&program)?;
            let r = match goal {
                Some(g) => verify_bridge(&p, &atom(&p, &g)?, fuel),
                None => verify_bridge_all(&p, &slice(&p, 2, 1), fuel, exec),
            };
            let violations: Vec<_> = r.violations().cloned().collect();
            print_json(&json!({ "checked": r.cases.len(), "violations": violations }));
            Ok(r.holds())
        }
    }
}
