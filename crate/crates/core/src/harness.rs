//! Differential testing of generated C against the interpreter.
//!
//! The generated test driver is compiled with [`STRICT_CFLAGS`], fed event
//! sequences on stdin, and its trace is compared line by line, byte for
//! byte, with [`interp::run_traced`] on the same events. A step that traps
//! in the interpreter must make the driver stop with a failure status
//! after printing the states before it.

use std::env;
use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitStatus, Stdio};
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analyzer::CheckedDiagram;
use crate::codegen::{CodegenError, GeneratedBundle, STRICT_CFLAGS};
use crate::interp::{self, CaseCounts, InterpError};

/// Compiler names tried on `PATH` when nothing is configured.
pub const DEFAULT_COMPILERS: &[&str] = &["cc", "gcc", "clang"];

/// Environment variable naming the C compiler command.
pub const CC_ENV: &str = "EMUC_CC";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("no C compiler found (tried {tried}); set {CC_ENV} or pass --cc")]
    CompilerNotFound { tried: String },
    #[error("C compilation failed:\n{log}")]
    CompileFailed { log: String },
    #[error(transparent)]
    Codegen(#[from] CodegenError),
    #[error("the diagram has no triggers to build event sequences from")]
    NoTriggers,
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
}

fn io_err(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let context = context.into();
    move |source| HarnessError::Io { context, source }
}

/// A compiler command: program plus leading arguments, e.g. `gcc -m64`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Compiler {
    pub program: PathBuf,
    pub args: Vec<String>,
}

fn find_on_path(program: &str, path: Option<&OsString>) -> Option<PathBuf> {
    if program.contains('/') {
        let p = PathBuf::from(program);
        return p.is_file().then_some(p);
    }
    env::split_paths(path?)
        .map(|dir| dir.join(program))
        .find(|p| p.is_file())
}

/// Resolves the compiler from, in order, an explicit command, the
/// `EMUC_CC` value, and the first of [`DEFAULT_COMPILERS`] on `path`.
pub fn resolve_compiler_from(
    explicit: Option<&str>,
    env_cc: Option<&str>,
    path: Option<&OsString>,
) -> Result<Compiler, HarnessError> {
    let configured = explicit.or(env_cc).map(str::trim).filter(|s| !s.is_empty());
    if let Some(cmd) = configured {
        let mut words = cmd.split_whitespace();
        let program = words.next().unwrap_or_default();
        return match find_on_path(program, path) {
            Some(p) => Ok(Compiler {
                program: p,
                args: words.map(str::to_string).collect(),
            }),
            None => Err(HarnessError::CompilerNotFound {
                tried: format!("`{program}`"),
            }),
        };
    }
    DEFAULT_COMPILERS
        .iter()
        .find_map(|c| find_on_path(c, path))
        .map(|program| Compiler {
            program,
            args: Vec::new(),
        })
        .ok_or_else(|| HarnessError::CompilerNotFound {
            tried: DEFAULT_COMPILERS
                .iter()
                .map(|c| format!("`{c}`"))
                .collect::<Vec<_>>()
                .join(", "),
        })
}

/// [`resolve_compiler_from`] with the process environment.
pub fn resolve_compiler(explicit: Option<&str>) -> Result<Compiler, HarnessError> {
    let env_cc = env::var(CC_ENV).ok();
    let path = env::var_os("PATH");
    resolve_compiler_from(explicit, env_cc.as_deref(), path.as_ref())
}

#[derive(Clone, Debug)]
pub struct Build {
    pub driver: PathBuf,
    pub compiler_log: String,
}

/// Writes the bundle into `workdir` and compiles the driver with warnings
/// as errors.
pub fn build(
    bundle: &GeneratedBundle,
    workdir: &Path,
    cc: &Compiler,
) -> Result<Build, HarnessError> {
    bundle.write_to_dir(workdir)?;
    let driver = workdir.join(bundle.driver_binary());
    let output = Command::new(&cc.program)
        .args(&cc.args)
        .args(STRICT_CFLAGS)
        .arg("-o")
        .arg(&driver)
        .arg(bundle.impl_file())
        .arg(bundle.driver_file())
        .current_dir(workdir)
        .output()
        .map_err(io_err(format!("cannot run {}", cc.program.display())))?;
    let mut log = String::from_utf8_lossy(&output.stdout).into_owned();
    log.push_str(&String::from_utf8_lossy(&output.stderr));
    if !output.status.success() {
        return Err(HarnessError::CompileFailed { log });
    }
    Ok(Build {
        driver,
        compiler_log: log,
    })
}

/// `n` sequences of `len` triggers drawn uniformly from the trigger set.
/// Triggers that are not permitted where they land are kept on purpose.
pub fn gen_sequences(
    d: &CheckedDiagram,
    n: usize,
    len: usize,
    seed: u64,
) -> Result<Vec<Vec<String>>, HarnessError> {
    let triggers = d.trigger_set();
    if triggers.is_empty() {
        return Err(HarnessError::NoTriggers);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            (0..len)
                .map(|_| triggers[rng.gen_range(0..triggers.len())].to_string())
                .collect()
        })
        .collect())
}

/// Output of one driver run.
#[derive(Clone, Debug)]
pub struct DriverRun {
    pub lines: Vec<String>,
    pub status: ExitStatus,
    pub stderr: String,
}

/// Runs the driver with one trigger per input line.
pub fn run_driver<S: AsRef<str>>(driver: &Path, events: &[S]) -> Result<DriverRun, HarnessError> {
    let mut child = Command::new(driver)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(io_err(format!("cannot run {}", driver.display())))?;
    let mut input = String::new();
    for e in events {
        input.push_str(e.as_ref());
        input.push('\n');
    }
    let mut stdin = child.stdin.take().expect("piped stdin");
    // The driver may stop reading early (trap); a broken pipe is expected then.
    let writer = thread::spawn(move || {
        let _ = stdin.write_all(input.as_bytes());
    });
    let output = child
        .wait_with_output()
        .map_err(io_err(format!("cannot run {}", driver.display())))?;
    let _ = writer.join();
    let stdout = String::from_utf8_lossy(&output.stdout);
    Ok(DriverRun {
        lines: stdout.lines().map(str::to_string).collect(),
        status: output.status,
        stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
    })
}

/// First point where the two traces of one sequence disagree. `step` 0 is
/// the initial state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub sequence: usize,
    pub step: usize,
    pub interpreter: String,
    pub driver: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiffReport {
    pub sequences_run: usize,
    pub divergences: Vec<Divergence>,
    pub compiler_log: String,
    /// How often each step rule applied in the interpreter runs.
    pub cases: CaseCounts,
}

impl DiffReport {
    pub fn is_clean(&self) -> bool {
        self.divergences.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Field-wise comparison allowing reals to differ by at most `tol`.
fn lines_match(a: &str, b: &str, tolerance: Option<f64>) -> bool {
    if a == b {
        return true;
    }
    let Some(tol) = tolerance else { return false };
    let fa: Vec<&str> = a.split(';').collect();
    let fb: Vec<&str> = b.split(';').collect();
    fa.len() == fb.len()
        && fa.iter().zip(&fb).all(|(x, y)| {
            if x == y {
                return true;
            }
            let (Some((nx, vx)), Some((ny, vy))) = (x.split_once('='), y.split_once('=')) else {
                return false;
            };
            match (vx.parse::<f64>(), vy.parse::<f64>()) {
                (Ok(p), Ok(q)) => {
                    nx == ny && vx.contains('.') && vy.contains('.') && (p - q).abs() <= tol
                }
                _ => false,
            }
        })
}

fn describe_exit(run: &DriverRun) -> String {
    let stderr = run.stderr.trim();
    if stderr.is_empty() {
        format!("<driver exited: {}>", run.status)
    } else {
        format!("<driver exited: {}: {stderr}>", run.status)
    }
}

fn compare_one<S: AsRef<str> + Sync>(
    d: &CheckedDiagram,
    driver: &Path,
    index: usize,
    events: &[S],
    tolerance: Option<f64>,
) -> (Option<Divergence>, CaseCounts) {
    let trace = interp::run_traced(d, events);
    let counts = trace.counts();
    let expected: Vec<String> = trace.states.iter().map(|s| s.trace_line()).collect();
    let diverge = |step: usize, interpreter: String, driver: String| {
        Some(Divergence {
            sequence: index,
            step,
            interpreter,
            driver,
        })
    };
    let run = match run_driver(driver, events) {
        Ok(run) => run,
        Err(e) => return (diverge(0, expected[0].clone(), format!("<{e}>")), counts),
    };
    for (step, want) in expected.iter().enumerate() {
        match run.lines.get(step) {
            Some(got) if lines_match(want, got, tolerance) => {}
            Some(got) => return (diverge(step, want.clone(), got.clone()), counts),
            None => return (diverge(step, want.clone(), describe_exit(&run)), counts),
        }
    }
    let step = expected.len();
    match &trace.error {
        Some((_, err)) => {
            let want = match err {
                InterpError::Trap { .. } => format!("<trap: {err}>"),
                other => format!("<error: {other}>"),
            };
            if let Some(extra) = run.lines.get(step) {
                (diverge(step, want, extra.clone()), counts)
            } else if run.status.success() {
                (
                    diverge(step, want, "<driver exited: success>".to_string()),
                    counts,
                )
            } else {
                (None, counts)
            }
        }
        None => {
            if let Some(extra) = run.lines.get(step) {
                (
                    diverge(step, "<end of trace>".to_string(), extra.clone()),
                    counts,
                )
            } else if !run.status.success() {
                (
                    diverge(step, "<end of trace>".to_string(), describe_exit(&run)),
                    counts,
                )
            } else {
                (None, counts)
            }
        }
    }
}

/// Runs every sequence through the interpreter and the compiled driver and
/// records the first divergence of each. Sequences run in parallel; the
/// report is ordered by sequence index.
pub fn difftest<S: AsRef<str> + Sync>(
    d: &CheckedDiagram,
    driver: &Path,
    sequences: &[Vec<S>],
    tolerance: Option<f64>,
) -> DiffReport {
    let results: Vec<(Option<Divergence>, CaseCounts)> = sequences
        .par_iter()
        .enumerate()
        .map(|(i, seq)| compare_one(d, driver, i, seq, tolerance))
        .collect();
    let mut report = DiffReport {
        sequences_run: sequences.len(),
        ..DiffReport::default()
    };
    for (div, counts) in results {
        report.cases.merge(&counts);
        report.divergences.extend(div);
    }
    report
}

/// Generates, builds and difftests in a fresh directory under `workdir`.
pub fn build_and_difftest(
    d: &CheckedDiagram,
    bundle: &GeneratedBundle,
    workdir: &Path,
    cc: &Compiler,
    sequences: &[Vec<String>],
    tolerance: Option<f64>,
) -> Result<DiffReport, HarnessError> {
    fs::create_dir_all(workdir).map_err(io_err(format!("cannot create {}", workdir.display())))?;
    let built = build(bundle, workdir, cc)?;
    let mut report = difftest(d, &built.driver, sequences, tolerance);
    report.compiler_log = built.compiler_log;
    Ok(report)
}
