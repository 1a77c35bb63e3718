//! The `treehom` command line.
//!
//! Exit codes: 0 on success (for either verdict), 1 on I/O and internal
//! errors, 2 on usage errors, 3 on parse and validation errors, 4 when a
//! blowup guard trips.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand};

use crate::decide::{decide_hom, has_ldp, DecideOptions, DependencyGraph, LdpWitness, Verdict};
use crate::error::Error;
use crate::formats::{
    export_dot, parse_hom, parse_tree, parse_wtg, render_tree, render_witness, render_wtg,
    verdict_json,
};
use crate::grammar::{semantics, Wtg};
use crate::homomorphism::TreeHomomorphism;
use crate::oracle::{brute_image, compare_semantics, Comparison, EnumerationBudget};
use crate::substitution::pump;
use crate::terms::{Position, Tree};
use crate::transform::{
    decompose, decompose_at, hom_image, linearize, trim, Decomposition, DEFAULT_CAP,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_BLOWUP: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "treehom",
    version,
    about = "Decide whether homomorphic images of weighted regular tree languages are regular"
)]
pub struct Cli {
    /// More log output on stderr (repeatable).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CapArg {
    /// Upper bound on generated trees and productions during linearization.
    #[arg(long, env = "TREEHOM_CAP", default_value_t = DEFAULT_CAP)]
    pub cap: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print REGULAR or NONREGULAR for the image of a WTA under a homomorphism.
    Decide {
        #[arg(short = 'a', long = "wta")]
        wta: PathBuf,
        #[arg(short = 'm', long = "hom")]
        hom: PathBuf,
        /// Write an equivalent constraint-free grammar here if regular.
        #[arg(long, value_name = "FILE")]
        emit_grammar: Option<PathBuf>,
        /// Write the image and a decomposition here if nonregular.
        #[arg(long, value_name = "DIR")]
        emit_witness: Option<PathBuf>,
        /// Print a JSON object instead of the bare verdict.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        cap: CapArg,
    },
    /// Build the trimmed WTGh for the image.
    Image {
        #[arg(short = 'a', long = "wta")]
        wta: PathBuf,
        #[arg(short = 'm', long = "hom")]
        hom: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Remove unproductive and useless states.
    Trim {
        #[arg(short, long)]
        grammar: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Remove the constraints of a WTGh without the duplication property.
    Linearize {
        #[arg(short, long)]
        grammar: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        cap: CapArg,
    },
    /// Split a WTGh with the duplication property; writes g1.wtg, g2.wtg
    /// and witness.txt.
    Decompose {
        #[arg(short, long)]
        grammar: PathBuf,
        #[arg(short, long, value_name = "DIR")]
        output: PathBuf,
        /// Join the derivation of this tree instead of a minimal one.
        #[arg(long, requires = "position")]
        tree: Option<String>,
        /// Where the qualifying production applies in `--tree`.
        #[arg(long, requires = "tree")]
        position: Option<String>,
    },
    /// Weight of a tree.
    Eval {
        #[arg(short, long)]
        grammar: PathBuf,
        #[arg(short, long)]
        tree: String,
    },
    /// Image of a single tree under a homomorphism.
    ApplyHom {
        #[arg(short = 'm', long = "hom")]
        hom: PathBuf,
        #[arg(short, long)]
        tree: String,
    },
    /// Dependency graph of the states.
    Graph {
        #[arg(short, long)]
        grammar: PathBuf,
        #[arg(long)]
        dot: bool,
    },
    /// Print pumped versions of a tree taller than he(G).
    Pump {
        #[arg(short, long)]
        grammar: PathBuf,
        #[arg(short = 'q', long)]
        state: String,
        #[arg(short, long)]
        tree: String,
        #[arg(short = 'n', long, default_value_t = 5)]
        count: usize,
    },
    /// Brute-force cross-checks.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Compare two grammars on every tree up to a size.
    #[command(disable_help_flag = true)]
    Compare {
        #[arg(short = 'g', long)]
        left: PathBuf,
        #[arg(short = 'h', long)]
        right: PathBuf,
        #[arg(long, default_value_t = 7)]
        max_size: usize,
        #[arg(long, action = ArgAction::Help)]
        help: Option<bool>,
    },
    /// Weight of a tree in the image, by enumerating preimages.
    Image {
        #[arg(short = 'a', long = "wta")]
        wta: PathBuf,
        #[arg(short = 'm', long = "hom")]
        hom: PathBuf,
        #[arg(short, long)]
        tree: String,
    },
}

/// An error already rendered for the user.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn exit_code(e: &Error) -> i32 {
    match e.kind() {
        Error::Blowup { .. } => EXIT_BLOWUP,
        Error::Io(_) | Error::Internal(_) => EXIT_FAILURE,
        _ => EXIT_INPUT,
    }
}

fn fail(e: Error) -> Failure {
    Failure {
        code: exit_code(&e),
        message: e.to_string(),
    }
}

/// Like [`fail`], quoting the offending line of `text`.
fn fail_in(e: Error, name: &str, text: &str) -> Failure {
    let Some(span) = e.span() else {
        return Failure {
            code: exit_code(&e),
            message: format!("{name}: {e}"),
        };
    };
    let message = match &e {
        Error::Syntax { message, .. } => message.clone(),
        other => other.kind().to_string(),
    };
    let start = span.start.min(text.len());
    let line_start = text[..start].rfind('\n').map_or(0, |i| i + 1);
    let line_end = text[start..].find('\n').map_or(text.len(), |i| start + i);
    let line_no = text[..start].matches('\n').count() + 1;
    let col = text[line_start..start].chars().count() + 1;
    let width = span.end.min(line_end).saturating_sub(start).max(1);
    Failure {
        code: exit_code(&e),
        message: format!(
            "{name}:{line_no}:{col}: {message}\n  | {}\n  | {}{}",
            &text[line_start..line_end],
            " ".repeat(col - 1),
            "^".repeat(width)
        ),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_FAILURE,
        message: format!("{}: {e}", path.display()),
    })
}

fn load_wtg(path: &Path) -> Result<Wtg, Failure> {
    let text = read(path)?;
    parse_wtg(&text).map_err(|e| fail_in(e, &path.display().to_string(), &text))
}

fn load_hom(path: &Path) -> Result<TreeHomomorphism, Failure> {
    let text = read(path)?;
    parse_hom(&text).map_err(|e| fail_in(e, &path.display().to_string(), &text))
}

fn tree_arg(text: &str, alphabet: &crate::terms::RankedAlphabet) -> Result<Tree, Failure> {
    parse_tree(text, alphabet).map_err(|e| fail_in(e, "<tree>", text))
}

fn io(e: std::io::Error) -> Failure {
    fail(Error::Io(e))
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure {
            code: EXIT_FAILURE,
            message: format!("{}: {e}", p.display()),
        }),
        None => out.write_all(text.as_bytes()).map_err(io),
    }
}

fn decomposition_report(d: &Decomposition) -> String {
    format!(
        "final_state: {}\nfresh_state: {}\ntree: {}\nposition: {}\njoined: {}\nwitness_pair: {} {}\n",
        d.final_state, d.fresh_state, d.tree, d.position, d.joined, d.witness_pair.0, d.witness_pair.1
    )
}

fn write_decomposition(
    dir: &Path,
    d: &Decomposition,
    extra: Option<(&Wtg, &LdpWitness)>,
) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(io)?;
    let mut witness = decomposition_report(d);
    if let Some((g, w)) = extra {
        witness.push_str(&render_witness(g, w));
        fs::write(dir.join("image.wtg"), render_wtg(g)).map_err(io)?;
    }
    fs::write(dir.join("g1.wtg"), render_wtg(&d.g1)).map_err(io)?;
    fs::write(dir.join("g2.wtg"), render_wtg(&d.g2)).map_err(io)?;
    fs::write(dir.join("witness.txt"), witness).map_err(io)?;
    Ok(())
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Decide {
            wta,
            hom,
            emit_grammar,
            emit_witness,
            json,
            cap,
        } => {
            let a = load_wtg(&wta)?;
            let h = load_hom(&hom)?;
            let options = DecideOptions {
                emit_grammar: emit_grammar.is_some(),
                emit_witness: emit_witness.is_some(),
                cap: cap.cap,
            };
            let decision = decide_hom(&a, &h, options).map_err(fail)?;
            if json {
                let value = verdict_json(&decision.image, &decision.verdict);
                writeln!(out, "{value:#}").map_err(io)?;
            } else {
                writeln!(out, "{}", decision.verdict.token()).map_err(io)?;
            }
            match &decision.verdict {
                Verdict::Regular { grammar } => {
                    if let (Some(path), Some(g)) = (&emit_grammar, grammar) {
                        emit(Some(path), &render_wtg(g), out)?;
                    }
                    if emit_witness.is_some() {
                        log::warn!("the image is regular, no witness written");
                    }
                }
                Verdict::Nonregular {
                    witness,
                    decomposition,
                } => {
                    if let (Some(dir), Some(d)) = (&emit_witness, decomposition) {
                        write_decomposition(dir, d, Some((&decision.image, witness)))?;
                    }
                    if emit_grammar.is_some() {
                        log::warn!("the image is not regular, no grammar written");
                    }
                }
            }
            Ok(())
        }
        Command::Image { wta, hom, output } => {
            let a = load_wtg(&wta)?;
            let h = load_hom(&hom)?;
            let g = hom_image(&trim(&a), &h).map_err(fail)?;
            emit(output.as_deref(), &render_wtg(&g), out)
        }
        Command::Trim { grammar, output } => {
            let g = load_wtg(&grammar)?;
            emit(output.as_deref(), &render_wtg(&trim(&g)), out)
        }
        Command::Linearize {
            grammar,
            output,
            cap,
        } => {
            let g = load_wtg(&grammar)?;
            let lin = linearize(&g, cap.cap).map_err(fail)?;
            emit(output.as_deref(), &render_wtg(&lin), out)
        }
        Command::Decompose {
            grammar,
            output,
            tree,
            position,
        } => {
            let g = load_wtg(&grammar)?;
            let d = match (tree, position) {
                (Some(t), Some(w)) => {
                    let t = tree_arg(&t, g.alphabet())?;
                    let w: Position = w.parse().map_err(fail)?;
                    decompose_at(&g, &t, &w)
                }
                _ => decompose(&g),
            }
            .map_err(fail)?;
            write_decomposition(&output, &d, None)?;
            out.write_all(decomposition_report(&d).as_bytes())
                .map_err(io)
        }
        Command::Eval { grammar, tree } => {
            let g = load_wtg(&grammar)?;
            let t = tree_arg(&tree, g.alphabet())?;
            writeln!(out, "{}", semantics(&g, &t)).map_err(io)
        }
        Command::ApplyHom { hom, tree } => {
            let h = load_hom(&hom)?;
            let t = tree_arg(&tree, h.source())?;
            let u = h.apply(&t).map_err(fail)?;
            writeln!(out, "{}", render_tree(&u)).map_err(io)
        }
        Command::Graph { grammar, dot } => {
            let g = load_wtg(&grammar)?;
            let graph = DependencyGraph::new(&g);
            if dot {
                return out.write_all(export_dot(&graph).as_bytes()).map_err(io);
            }
            for (a, b) in graph.edges() {
                writeln!(out, "{a} -> {b}").map_err(io)?;
            }
            match has_ldp(&g) {
                Some(w) => {
                    writeln!(out, "duplication property: yes").map_err(io)?;
                    out.write_all(render_witness(&g, &w).as_bytes()).map_err(io)
                }
                None => writeln!(out, "duplication property: no").map_err(io),
            }
        }
        Command::Pump {
            grammar,
            state,
            tree,
            count,
        } => {
            let g = load_wtg(&grammar)?;
            let t = tree_arg(&tree, g.alphabet())?;
            for next in pump(&g, &state, &t).map_err(fail)?.skip(1).take(count) {
                writeln!(out, "{}", render_tree(&next.map_err(fail)?)).map_err(io)?;
            }
            Ok(())
        }
        Command::Oracle(OracleCommand::Compare {
            left,
            right,
            max_size,
            ..
        }) => {
            let g1 = load_wtg(&left)?;
            let g2 = load_wtg(&right)?;
            match compare_semantics(&g1, &g2, &EnumerationBudget::size(max_size)).map_err(fail)? {
                Comparison::Equal { checked } => writeln!(out, "EQUAL {checked}").map_err(io),
                Comparison::Mismatch { tree, left, right } => {
                    writeln!(out, "MISMATCH {tree} {left} {right}").map_err(io)
                }
            }
        }
        Command::Oracle(OracleCommand::Image { wta, hom, tree }) => {
            let a = load_wtg(&wta)?;
            let h = load_hom(&hom)?;
            let u = tree_arg(&tree, h.target())?;
            let w = brute_image(&a, &h, &u).map_err(fail)?;
            writeln!(out, "{w}").map_err(io)
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

/// Runs the command line on `args` (program name first) and returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
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
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    init_logging(cli.verbose);
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
