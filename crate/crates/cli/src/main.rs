use std::collections::HashSet;
use std::fs;
use std::io::{self, BufRead, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use emuc_core::codegen::{generate, CodegenConfig};
use emuc_core::diag::has_errors;
use emuc_core::harness::{build_and_difftest, gen_sequences, resolve_compiler};
use emuc_core::parser::{parse_diagram_bytes, parse_diagram_json, print_diagram};
use emuc_core::{accept, interp, lint, CheckedDiagram, Diagnostic, Diagram};
use emuc_server::ServerConfig;

/// Emucharts models to MISRA-C: parse, check, simulate, generate, lint and
/// differential testing.
#[derive(Debug, Parser)]
#[command(name = "emuc", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the model in normalized form.
    Parse { model: PathBuf },
    /// Type-check the model and report structural warnings.
    Check { model: PathBuf },
    /// Print the interpreter trace for a list of events, one per line.
    Simulate {
        model: PathBuf,
        /// Event file, or `-` for stdin. Blank lines are skipped.
        #[arg(long, default_value = "-")]
        events: String,
    },
    /// Write the C bundle for the model.
    Gen {
        model: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// File name stem; defaults to the diagram name.
        #[arg(long)]
        name: Option<String>,
        /// Leave out the redundant node and guard asserts.
        #[arg(long)]
        no_asserts: bool,
    },
    /// Check C files against the coding rules; headers also against the
    /// header grammar.
    Lint {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Skip the header grammar check.
        #[arg(long)]
        rules_only: bool,
    },
    /// Compare the compiled driver with the interpreter on random event
    /// sequences.
    Difftest {
        model: PathBuf,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        len: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// C compiler command; otherwise EMUC_CC, then cc, gcc, clang.
        #[arg(long)]
        cc: Option<String>,
        /// Accept reals that differ by at most this much.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Build in this directory and keep it, instead of a temporary one.
        #[arg(long)]
        workdir: Option<PathBuf>,
    },
    /// Serve interactive sessions for the model over HTTP.
    Serve {
        model: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Directory of static UI assets.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
        /// Seconds before an unused session is dropped.
        #[arg(long, default_value_t = 1800)]
        idle_timeout: u64,
    },
}

/// Outcome that maps to exit status 1 after its message has been printed.
struct Reported;

type Outcome = Result<(), Reported>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    match run(cli.command) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Reported)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("emuc: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> anyhow::Result<Outcome> {
    match command {
        Command::Parse { model } => {
            let Some(d) = load(&model)? else {
                return Ok(Err(Reported));
            };
            print!("{}", print_diagram(&d));
            Ok(Ok(()))
        }
        Command::Check { model } => {
            let Some(d) = load(&model)? else {
                return Ok(Err(Reported));
            };
            match accept(&d) {
                Ok(accepted) => {
                    report(&model, &accepted.warnings);
                    println!(
                        "{}: ok ({} nodes, {} variables, {} arcs, {} triggers)",
                        model.display(),
                        d.nodes.len(),
                        d.variables.len(),
                        d.arcs.len(),
                        d.trigger_set().len()
                    );
                    Ok(Ok(()))
                }
                Err(diags) => {
                    report(&model, &diags);
                    Ok(Err(Reported))
                }
            }
        }
        Command::Simulate { model, events } => {
            let Some(d) = load_checked(&model)? else {
                return Ok(Err(Reported));
            };
            let events = read_events(&events)?;
            simulate(&d, &events)
        }
        Command::Gen {
            model,
            out,
            name,
            no_asserts,
        } => {
            let Some(d) = load_checked(&model)? else {
                return Ok(Err(Reported));
            };
            let mut cfg = CodegenConfig::new(name.as_deref().unwrap_or(&d.name));
            cfg.emit_asserts = !no_asserts;
            let bundle = generate(&d, &cfg)?;
            for path in bundle.write_to_dir(&out)? {
                println!("{}", path.display());
            }
            Ok(Ok(()))
        }
        Command::Lint { files, rules_only } => lint_files(&files, rules_only),
        Command::Difftest {
            model,
            n,
            len,
            seed,
            cc,
            tolerance,
            report: report_path,
            workdir,
        } => {
            let Some(d) = load_checked(&model)? else {
                return Ok(Err(Reported));
            };
            let compiler = resolve_compiler(cc.as_deref())?;
            let sequences = gen_sequences(&d, n, len, seed)?;
            let bundle = generate(&d, &CodegenConfig::new(&d.name))?;
            let temp;
            let dir = match &workdir {
                Some(dir) => dir.as_path(),
                None => {
                    temp = tempfile::tempdir().context("cannot create a build directory")?;
                    temp.path()
                }
            };
            let result = build_and_difftest(&d, &bundle, dir, &compiler, &sequences, tolerance)?;
            if let Some(path) = &report_path {
                fs::write(path, result.to_json())
                    .with_context(|| format!("cannot write {}", path.display()))?;
            }
            for div in &result.divergences {
                println!(
                    "sequence {} step {}:\n  interpreter: {}\n  driver:      {}",
                    div.sequence, div.step, div.interpreter, div.driver
                );
            }
            let c = result.cases;
            println!(
                "{}: {} sequences of {} events, seed {}: {} divergences; not permitted {}, guard unsatisfied {}, fired {}",
                model.display(),
                result.sequences_run,
                len,
                seed,
                result.divergences.len(),
                c.not_permitted,
                c.guard_unsatisfied,
                c.fired
            );
            Ok(if result.is_clean() {
                Ok(())
            } else {
                Err(Reported)
            })
        }
        Command::Serve {
            model,
            port,
            host,
            static_dir,
            idle_timeout,
        } => {
            let Some(d) = load_checked(&model)? else {
                return Ok(Err(Reported));
            };
            tracing_subscriber::fmt()
                .with_env_filter(
                    tracing_subscriber::EnvFilter::try_from_default_env()
                        .unwrap_or_else(|_| "info".into()),
                )
                .with_writer(io::stderr)
                .init();
            let config = ServerConfig {
                default_model: Some(Arc::new(d)),
                idle_timeout: std::time::Duration::from_secs(idle_timeout),
                static_dir,
            };
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(emuc_server::serve(SocketAddr::new(host, port), config))?;
            Ok(Ok(()))
        }
    }
}

fn report(file: &Path, diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{}", d.render(&file.display().to_string()));
    }
}

/// Parses a model file, `.json` as the interchange form and anything else
/// as model text. `None` means diagnostics were printed.
fn load(path: &Path) -> anyhow::Result<Option<Diagram>> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        match String::from_utf8(bytes) {
            Ok(text) => parse_diagram_json(&text),
            Err(_) => bail!("{} is not valid UTF-8", path.display()),
        }
    } else {
        parse_diagram_bytes(&bytes)
    };
    match parsed {
        Ok(d) => Ok(Some(d)),
        Err(diags) => {
            report(path, &diags);
            Ok(None)
        }
    }
}

/// [`load`] plus the analyzer. Warnings are only shown by `check`.
fn load_checked(path: &Path) -> anyhow::Result<Option<CheckedDiagram>> {
    let Some(d) = load(path)? else {
        return Ok(None);
    };
    match accept(&d) {
        Ok(accepted) => Ok(Some(accepted.diagram)),
        Err(diags) => {
            report(path, &diags);
            Ok(None)
        }
    }
}

fn read_events(source: &str) -> anyhow::Result<Vec<String>> {
    let lines: Vec<String> = if source == "-" {
        io::stdin()
            .lock()
            .lines()
            .collect::<Result<_, _>>()
            .context("cannot read events from stdin")?
    } else {
        fs::read_to_string(source)
            .with_context(|| format!("cannot read {source}"))?
            .lines()
            .map(str::to_string)
            .collect()
    };
    Ok(lines
        .into_iter()
        .map(|l| l.trim().to_string())
        .filter(|l| !l.is_empty())
        .collect())
}

fn simulate(d: &CheckedDiagram, events: &[String]) -> anyhow::Result<Outcome> {
    let trace = interp::run_traced(d, events);
    let mut out = io::BufWriter::new(io::stdout().lock());
    for s in &trace.states {
        writeln!(out, "{}", s.trace_line())?;
    }
    out.flush()?;
    match trace.error {
        Some((i, err)) => {
            eprintln!("event {} ({}): {err}", i + 1, events[i]);
            Ok(Err(Reported))
        }
        None => Ok(Ok(())),
    }
}

/// Local headers named by `#include "..."` lines, resolved next to `file`.
fn included_headers(file: &Path, text: &str) -> Vec<PathBuf> {
    let dir = file.parent().unwrap_or(Path::new("."));
    text.lines()
        .filter_map(|l| {
            let rest = l.trim_start().strip_prefix('#')?.trim_start();
            let rest = rest.strip_prefix("include")?.trim();
            let name = rest.strip_prefix('"')?.split('"').next()?;
            Some(dir.join(name))
        })
        .filter(|p| p.is_file())
        .collect()
}

fn lint_files(files: &[PathBuf], rules_only: bool) -> anyhow::Result<Outcome> {
    let mut sources = Vec::with_capacity(files.len());
    for f in files {
        let text = fs::read_to_string(f).with_context(|| format!("cannot read {}", f.display()))?;
        sources.push(text);
    }
    let mut known: HashSet<String> = HashSet::new();
    for (f, text) in files.iter().zip(&sources) {
        if f.extension().is_some_and(|e| e == "h") {
            known.extend(lint::unsigned_typedefs(text));
        }
        for h in included_headers(f, text) {
            if let Ok(header) = fs::read_to_string(&h) {
                known.extend(lint::unsigned_typedefs(&header));
            }
        }
    }
    let mut failed = false;
    for (f, text) in files.iter().zip(&sources) {
        let mut diags = Vec::new();
        if !rules_only && f.extension().is_some_and(|e| e == "h") {
            diags.extend(lint::check_header_grammar(text));
        }
        diags.extend(lint::check_rules_with(text, &known));
        diags.sort_by_key(|d| (d.line, d.col));
        report(f, &diags);
        failed |= has_errors(&diags);
    }
    Ok(if failed { Err(Reported) } else { Ok(()) })
}
