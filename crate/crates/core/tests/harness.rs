//! Compiled drivers against the interpreter.

mod common;

use std::path::Path;

use common::{alaris, checked, corpus_checked, minimed};
use emuc_core::codegen::{self, CodegenConfig, Mutation};
use emuc_core::harness::{
    self, build, build_and_difftest, difftest, gen_sequences, resolve_compiler,
    resolve_compiler_from, run_driver, Compiler, DiffReport, HarnessError,
};
use emuc_core::interp::{self, StepOutcome};
use emuc_core::random::{random_checked, random_events};
use emuc_core::{lint, CheckedDiagram};

fn cc() -> Compiler {
    resolve_compiler(None).expect("a C compiler is needed for these tests")
}

fn built(
    d: &CheckedDiagram,
    base: &str,
    mutation: Option<Mutation>,
    dir: &Path,
) -> std::path::PathBuf {
    let mut cfg = CodegenConfig::new(base);
    cfg.mutation = mutation;
    let bundle = codegen::generate(d, &cfg).unwrap();
    build(&bundle, dir, &cc())
        .unwrap_or_else(|e| panic!("{base}: {e}"))
        .driver
}

fn run_diff(
    d: &CheckedDiagram,
    base: &str,
    mutation: Option<Mutation>,
    n: usize,
    len: usize,
    seed: u64,
) -> DiffReport {
    let dir = tempfile::tempdir().unwrap();
    let driver = built(d, base, mutation, dir.path());
    let seqs = gen_sequences(d, n, len, seed).unwrap();
    difftest(d, &driver, &seqs, None)
}

#[test]
fn corpus_agrees_with_the_interpreter() {
    for (name, d) in corpus_checked() {
        if d.trigger_set().is_empty() {
            continue;
        }
        let r = run_diff(&d, &name, None, 200, 80, 1);
        assert!(
            r.is_clean(),
            "{name}: {:#?}",
            &r.divergences[..r.divergences.len().min(3)]
        );
        assert_eq!(r.sequences_run, 200);
        assert_eq!(
            r.cases.total(),
            200 * 80 - traps_before_end(&d, 200, 80, 1),
            "{name}"
        );
    }
}

/// Steps not taken because a sequence trapped earlier.
fn traps_before_end(d: &CheckedDiagram, n: usize, len: usize, seed: u64) -> u64 {
    gen_sequences(d, n, len, seed)
        .unwrap()
        .iter()
        .map(|s| (len - interp::run_traced(d, s).outcomes.len()) as u64)
        .sum()
}

#[test]
fn zero_trigger_driver_prints_the_initial_state() {
    let d = checked(include_str!("corpus/single.emuc"));
    let dir = tempfile::tempdir().unwrap();
    let driver = built(&d, "single", None, dir.path());
    let run = run_driver::<&str>(&driver, &[]).unwrap();
    assert_eq!(run.lines, ["only;only"]);
    assert!(run.status.success());
    assert!(matches!(
        gen_sequences(&d, 1, 1, 0),
        Err(HarnessError::NoTriggers)
    ));
}

#[test]
fn traps_stop_both_sides_at_the_same_step() {
    let d = checked(include_str!("corpus/traps_int.emuc"));
    let events = vec!["triple"; 25];
    let trace = interp::run_traced(&d, &events);
    let (at, err) = trace.error.clone().expect("3^20 overflows int32");
    assert_eq!(at, 19);
    assert!(err.to_string().contains("integer overflow"), "{err}");

    let dir = tempfile::tempdir().unwrap();
    let driver = built(&d, "traps_int", None, dir.path());
    let run = run_driver(&driver, &events).unwrap();
    assert!(!run.status.success());
    assert_eq!(run.lines.len(), trace.states.len());
    let expected: Vec<String> = trace.states.iter().map(|s| s.trace_line()).collect();
    assert_eq!(run.lines, expected);
    assert!(difftest(&d, &driver, &[events], None).is_clean());
}

#[test]
fn trapping_guards_only_evaluate_at_their_source() {
    let d = checked(include_str!("corpus/divguard.emuc"));
    // In `safe`, n is 0 and the risky arc's guard would divide by zero.
    let events = ["bump", "probe", "probe", "probe", "bump", "probe"];
    let trace = interp::run_traced(&d, &events);
    assert!(trace.error.is_none());
    let dir = tempfile::tempdir().unwrap();
    let driver = built(&d, "divguard", None, dir.path());
    assert!(difftest(&d, &driver, &[events.to_vec()], None).is_clean());
}

#[test]
fn swapped_overlapping_arcs_are_caught() {
    let d = checked(include_str!("corpus/counter_overlap.emuc"));
    let r = run_diff(
        &d,
        "counter_overlap",
        Some(Mutation::SwapArcOrder),
        50,
        20,
        3,
    );
    assert!(!r.divergences.is_empty());
    let first = &r.divergences[0];
    assert_ne!(first.interpreter, first.driver);
}

#[test]
fn swapped_exclusive_arcs_are_harmless() {
    let r = run_diff(
        &minimed(),
        "minimed",
        Some(Mutation::SwapArcOrder),
        200,
        100,
        3,
    );
    assert!(r.is_clean(), "{:?}", r.divergences.first());
}

#[test]
fn dropped_leave_is_caught() {
    let r = run_diff(&minimed(), "minimed", Some(Mutation::DropLeave), 50, 20, 3);
    assert!(!r.divergences.is_empty());
    let first = &r.divergences[0];
    // Only the previous-node field differs.
    let (i, dr) = (
        first.interpreter.split(';').collect::<Vec<_>>(),
        first.driver.split(';').collect::<Vec<_>>(),
    );
    assert_eq!(i[0], dr[0]);
    assert_ne!(i[1], dr[1]);
}

#[test]
fn off_by_one_guard_literal_is_caught() {
    for (name, d) in [
        (
            "counter_overlap",
            checked(include_str!("corpus/counter_overlap.emuc")),
        ),
        ("alaris", alaris()),
    ] {
        let r = run_diff(&d, name, Some(Mutation::GuardLiteralOffByOne), 200, 200, 5);
        assert!(!r.divergences.is_empty(), "{name}");
    }
}

#[test]
fn divergences_reproduce_alone() {
    let d = checked(include_str!("corpus/counter_overlap.emuc"));
    let dir = tempfile::tempdir().unwrap();
    let driver = built(
        &d,
        "counter_overlap",
        Some(Mutation::SwapArcOrder),
        dir.path(),
    );
    let seqs = gen_sequences(&d, 30, 20, 9).unwrap();
    let r = difftest(&d, &driver, &seqs, None);
    assert!(!r.divergences.is_empty());
    for div in &r.divergences {
        let again = difftest(&d, &driver, &[seqs[div.sequence].clone()], None);
        assert_eq!(again.divergences.len(), 1);
        let one = &again.divergences[0];
        assert_eq!(
            (one.step, &one.interpreter, &one.driver),
            (div.step, &div.interpreter, &div.driver)
        );
    }
}

#[test]
fn sequences_are_deterministic() {
    let d = minimed();
    assert_eq!(
        gen_sequences(&d, 10, 100, 42).unwrap(),
        gen_sequences(&d, 10, 100, 42).unwrap()
    );
    assert_ne!(
        gen_sequences(&d, 10, 100, 42).unwrap(),
        gen_sequences(&d, 10, 100, 43).unwrap()
    );
    assert!(gen_sequences(&d, 0, 100, 42).unwrap().is_empty());
    let seqs = gen_sequences(&d, 3, 7, 1).unwrap();
    assert!(seqs
        .iter()
        .all(|s| s.len() == 7 && s.iter().all(|t| d.has_trigger(t))));
}

#[test]
fn alaris_sequences_fire_every_range_rule() {
    let d = alaris();
    let count = |seqs: &[Vec<String>]| {
        let mut fired = vec![0u64; d.arcs.len()];
        for s in seqs {
            for o in interp::run_traced(&d, s).outcomes {
                if let StepOutcome::Fired(i) = o {
                    fired[i] += 1;
                }
            }
        }
        fired
    };
    let hits = |fired: &[u64], t: &str| -> Vec<u64> {
        d.arc_indices_for("on", t)
            .iter()
            .map(|&i| fired[i])
            .collect()
    };

    // Uniform walks reach the two lower display ranges in both directions.
    let fired = count(&gen_sequences(&d, 1000, 200, 7).unwrap());
    let up = hits(&fired, "click_alaris_up");
    let dn = hits(&fired, "click_alaris_dn");
    assert!(up[0] > 0 && up[1] > 0, "up: {up:?}");
    assert!(dn[1] > 0 && dn[2] > 0, "dn: {dn:?}");
    assert!(hits(&fired, "click_alaris_UP").iter().sum::<u64>() > 0);

    // The top range needs a sustained climb, which a uniform walk almost never makes.
    let plan = [
        ("click_alaris_on_off", 1),
        ("click_alaris_up", 5),
        ("click_alaris_UP", 10),
        ("click_alaris_up", 5),
        ("click_alaris_UP", 10),
        ("click_alaris_up", 30),
        ("click_alaris_dn", 30),
        ("click_alaris_DN", 12),
        ("click_alaris_dn", 5),
        ("click_alaris_DN", 12),
        ("click_alaris_dn", 5),
    ];
    let climb: Vec<String> = plan
        .iter()
        .flat_map(|&(t, n)| std::iter::repeat_n(t.to_string(), n))
        .collect();
    let fired = count(&[climb]);
    let up = hits(&fired, "click_alaris_up");
    let dn = hits(&fired, "click_alaris_dn");
    assert!(up[..3].iter().all(|&n| n > 0), "up: {up:?}");
    assert!(dn[1..].iter().all(|&n| n > 0), "dn: {dn:?}");
}

#[test]
fn driver_protocol() {
    let d = minimed();
    let dir = tempfile::tempdir().unwrap();
    let driver = built(&d, "minimed", None, dir.path());

    let run = run_driver(&driver, &["click_on_off", "click_UP"]).unwrap();
    assert_eq!(
        run.lines,
        [
            "off;off;display=0.0",
            "on;off;display=0.0",
            "on;on;display=0.1"
        ]
    );

    let run = run_driver::<&str>(&driver, &[]).unwrap();
    assert_eq!(run.lines, ["off;off;display=0.0"]);
    assert!(run.status.success());

    let run = run_driver(&driver, &["bogus"]).unwrap();
    assert!(!run.status.success());
    assert!(run.stderr.contains("bogus"), "{}", run.stderr);

    // Blank lines are not events.
    let run = run_driver(&driver, &["click_on_off", "", "click_UP"]).unwrap();
    assert_eq!(run.lines.len(), 3);
}

#[test]
fn empty_sequence_list() {
    let d = minimed();
    let dir = tempfile::tempdir().unwrap();
    let driver = built(&d, "minimed", None, dir.path());
    let r = difftest::<String>(&d, &driver, &[], None);
    assert_eq!(r.sequences_run, 0);
    assert!(r.is_clean());
}

#[test]
fn missing_compiler_is_an_environment_error() {
    let empty = tempfile::tempdir().unwrap();
    let path = std::ffi::OsString::from(empty.path());
    let err = resolve_compiler_from(None, None, Some(&path)).unwrap_err();
    assert!(matches!(err, HarnessError::CompilerNotFound { .. }));
    assert!(err.to_string().contains(harness::CC_ENV));
}

#[test]
fn compile_errors_carry_the_log() {
    let mut bundle = codegen::generate(&minimed(), &CodegenConfig::new("minimed")).unwrap();
    bundle.impl_.push_str("this is not C;\n");
    let dir = tempfile::tempdir().unwrap();
    match build(&bundle, dir.path(), &cc()) {
        Err(HarnessError::CompileFailed { log }) => assert!(log.contains("minimed.c"), "{log}"),
        other => panic!("expected a compile failure, got {other:?}"),
    }
}

#[test]
fn build_and_lint_are_independent() {
    let mut bundle = codegen::generate(&minimed(), &CodegenConfig::new("minimed")).unwrap();
    bundle.impl_ = bundle.impl_.replacen(
        "    return false;\n}",
        "    goto done;\ndone:\n    return false;\n}",
        1,
    );
    let dir = tempfile::tempdir().unwrap();
    assert!(build(&bundle, dir.path(), &cc()).is_ok());
    let diags = lint::check_bundle(&bundle);
    assert_eq!(diags.len(), 1);
    assert!(diags[0].1.message.starts_with("R1:"));
}

#[test]
fn report_serializes() {
    let d = minimed();
    let dir = tempfile::tempdir().unwrap();
    let bundle = codegen::generate(&d, &CodegenConfig::new("minimed")).unwrap();
    let seqs = gen_sequences(&d, 5, 10, 1).unwrap();
    let r = build_and_difftest(&d, &bundle, dir.path(), &cc(), &seqs, None).unwrap();
    let back: DiffReport = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(back, r);
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    for key in ["sequences_run", "divergences", "compiler_log", "cases"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

/// Random models, compiled and compared over random events.
#[test]
fn random_models_agree() {
    for seed in 0..40u64 {
        let d = random_checked(seed);
        if d.trigger_set().is_empty() {
            continue;
        }
        let seqs: Vec<Vec<String>> = (0..40)
            .map(|k| random_events(&d, seed * 1000 + k, 40))
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let driver = built(&d, "rnd", None, dir.path());
        let r = difftest(&d, &driver, &seqs, None);
        assert!(
            r.is_clean(),
            "seed {seed}: {:?}\n{}",
            r.divergences.first(),
            emuc_core::parser::print_diagram(&d)
        );
    }
}
