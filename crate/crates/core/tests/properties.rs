//! Semantic and syntactic invariants over randomly generated diagrams.

mod common;

use std::collections::HashSet;

use emuc_core::analyzer::check_guard_exclusivity;
use emuc_core::interp::{self, StepOutcome};
use emuc_core::model::Value;
use emuc_core::parser::{
    self, parse_diagram, parse_diagram_bytes, parse_diagram_json, parse_expr, print_diagram,
    print_expr,
};
use emuc_core::random::{random_checked, random_diagram, random_events};
use emuc_core::{accept, CheckedDiagram, MachineState};
use proptest::prelude::*;

const CASES: u32 = 10_000;
const RUN_LEN: usize = 30;

/// States reached by a random run, the initial state included.
fn reached(d: &CheckedDiagram, seed: u64) -> Vec<MachineState> {
    interp::run_traced(d, &random_events(d, seed, RUN_LEN)).states
}

fn keys(s: &MachineState) -> Vec<&str> {
    s.valuation.keys().map(String::as_str).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: CASES, ..ProptestConfig::default() })]

    #[test]
    fn idle_soundness(seed in any::<u64>()) {
        let d = random_checked(seed);
        for s in reached(&d, seed) {
            for t in d.trigger_set() {
                if !interp::permitted(&d, &s, t).unwrap() {
                    let (next, outcome) = interp::step_traced(&d, &s, t).unwrap();
                    prop_assert_eq!(&next, &s);
                    prop_assert_eq!(outcome, StepOutcome::NotPermitted);
                }
            }
        }
    }

    #[test]
    fn frame_property(seed in any::<u64>()) {
        let d = random_checked(seed);
        for s in reached(&d, seed) {
            for t in d.trigger_set() {
                let Ok((next, outcome)) = interp::step_traced(&d, &s, t) else { continue };
                match outcome {
                    StepOutcome::Fired(i) => {
                        let arc = &d.arcs[i];
                        prop_assert_eq!(&next.curr, &arc.target);
                        prop_assert_eq!(&next.prev, &s.curr);
                        let assigned: HashSet<&str> = arc.action.iter().map(|a| a.target.as_str()).collect();
                        for (name, v) in &s.valuation {
                            if !assigned.contains(name.as_str()) {
                                prop_assert_eq!(next.valuation[name], *v);
                            }
                        }
                        // Every right-hand side reads the pre-state.
                        for asg in &arc.action {
                            let expected = interp::eval(&asg.rhs, &s.valuation).unwrap();
                            prop_assert_eq!(next.valuation[&asg.target], expected);
                        }
                    }
                    _ => prop_assert_eq!(&next, &s),
                }
            }
        }
    }

    #[test]
    fn first_satisfied_arc_fires(seed in any::<u64>()) {
        let d = random_checked(seed);
        for s in reached(&d, seed) {
            for t in d.trigger_set() {
                let Ok((_, outcome)) = interp::step_traced(&d, &s, t) else { continue };
                let first = d
                    .arc_indices_for(&s.curr, t)
                    .into_iter()
                    .find(|&i| interp::eval(&d.arcs[i].guard, &s.valuation) == Ok(Value::Bool8(true)));
                match first {
                    Some(i) => prop_assert_eq!(outcome, StepOutcome::Fired(i)),
                    None => prop_assert!(matches!(
                        outcome,
                        StepOutcome::NotPermitted | StepOutcome::GuardUnsatisfied
                    )),
                }
            }
        }
    }

    #[test]
    fn swap_reads_pre_state(x in any::<i32>(), y in any::<i32>(), r in any::<f64>(), q in any::<f64>()) {
        let src = format!(
            "diagram swap;\nnodes a;\ninitial a;\nvariables {{ x: int32 = {x}; y: int32 = {y}; r: real64 = 0; q: real64 = 0; }}\narcs {{ a -> a : go {{ x := y; y := x; r := q; q := r; }}; }}\n"
        );
        let d = accept(&parse_diagram(&src).unwrap()).unwrap().diagram;
        let mut s = interp::init(&d);
        s.valuation.insert("r".into(), Value::Real64(r));
        s.valuation.insert("q".into(), Value::Real64(q));
        let next = interp::step(&d, &s, "go").unwrap();
        prop_assert_eq!(next.get("x"), Some(Value::Int32(y)));
        prop_assert_eq!(next.get("y"), Some(Value::Int32(x)));
        prop_assert_eq!(next.get("r"), Some(Value::Real64(q)));
        prop_assert_eq!(next.get("q"), Some(Value::Real64(r)));
    }

    #[test]
    fn run_is_deterministic(seed in any::<u64>()) {
        let d = random_checked(seed);
        let events = random_events(&d, seed ^ 0x9e37, RUN_LEN);
        let a = interp::run_traced(&d, &events);
        let b = interp::run_traced(&d, &events);
        prop_assert_eq!(a.states, b.states);
        prop_assert_eq!(a.outcomes, b.outcomes);
        prop_assert_eq!(a.error, b.error);
    }

    #[test]
    fn valuation_keys_are_the_declared_variables(seed in any::<u64>()) {
        let d = random_checked(seed);
        let declared: Vec<&str> = d.variables.iter().map(|v| v.name.as_str()).collect();
        for s in reached(&d, seed) {
            prop_assert_eq!(keys(&s), declared.clone());
        }
    }

    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>()) {
        let d = random_diagram(seed);
        let text = print_diagram(&d);
        let back = parse_diagram(&text).map_err(|e| TestCaseError::fail(format!("{e:?}\n{text}")))?;
        prop_assert_eq!(back.without_spans(), d.without_spans(), "{}", text);
        for arc in &d.arcs {
            let g = print_expr(&arc.guard);
            prop_assert_eq!(parse_expr(&g).unwrap(), arc.guard.clone(), "{}", g);
        }
    }

    #[test]
    fn arcs_for_is_an_ordered_sublist(seed in any::<u64>()) {
        let d = random_diagram(seed);
        for n in &d.nodes {
            for t in d.trigger_set() {
                let sub = d.arcs_for(n, t).unwrap();
                let mut rest = d.arcs.iter();
                for a in &sub {
                    prop_assert!(rest.any(|b| std::ptr::eq(*a, b)));
                    prop_assert!(a.source == *n && a.trigger == t);
                }
                prop_assert_eq!(sub.len(), d.arcs.iter().filter(|a| &a.source == n && a.trigger == t).count());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 2_000, ..ProptestConfig::default() })]

    #[test]
    fn exclusivity_check_is_deterministic(seed in any::<u64>(), samples in 0usize..16) {
        let d = random_checked(seed);
        prop_assert_eq!(check_guard_exclusivity(&d, samples, seed), check_guard_exclusivity(&d, samples, seed));
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..400)) {
        let lines = bytes.split(|b| *b == b'\n').count() as u32;
        if let Err(diags) = parse_diagram_bytes(&bytes) {
            prop_assert!(!diags.is_empty());
            for d in diags {
                prop_assert!(d.line <= lines + 1, "{:?}", d);
            }
        }
        let text = String::from_utf8_lossy(&bytes);
        let _ = parse_diagram_json(&text);
        let _ = parse_expr(&text);
    }

    #[test]
    fn model_shaped_noise_never_panics(
        pieces in proptest::collection::vec(
            prop::sample::select(vec![
                "diagram", "d", ";", "nodes", "a", ",", "b", "initial", "variables", "{", "}", "x", ":",
                "int32", "real64", "=", "1", "0.5", "arcs", "->", "go", "[", "]", "(", ")", ":=", "<", "&&",
                "||", "!", "-", "+", "*", "/", "true", "\n", " ", "//", "1e", "0x", "\"",
            ]),
            0..80,
        )
    ) {
        let src = pieces.join(" ");
        if let Ok(d) = parse_diagram(&src) {
            let _ = accept(&d);
        }
    }
}

#[test]
fn deep_nesting_is_an_error_not_a_crash() {
    for open in ["(", "!", "-"] {
        let deep = format!(
            "{}x{}",
            open.repeat(100_000),
            if open == "(" {
                ")".repeat(100_000)
            } else {
                String::new()
            }
        );
        let err = parse_expr(&deep).unwrap_err();
        assert!(err.message.contains("nested deeper"), "{}", err.message);
    }
    let ok = format!(
        "{}x{}",
        "(".repeat(parser::MAX_NESTING - 1),
        ")".repeat(parser::MAX_NESTING - 1)
    );
    assert!(parse_expr(&ok).is_ok());
}

#[test]
fn very_long_expressions_are_rejected() {
    let long = vec!["x"; parser::MAX_OPERATORS + 2].join(" + ");
    let err = parse_expr(&long).unwrap_err();
    assert!(err.message.contains("operators"), "{}", err.message);
    let fine = vec!["x"; 200].join(" + ");
    assert!(parse_expr(&fine).is_ok());
}

#[test]
fn deep_json_is_an_error_not_a_crash() {
    let mut e = String::from("{\"var\":\"x\"}");
    for _ in 0..10_000 {
        e = format!("{{\"unary\":[\"not\",{e}]}}");
    }
    let json = format!(
        "{{\"name\":\"d\",\"nodes\":[\"a\"],\"initial\":\"a\",\"arcs\":[{{\"source\":\"a\",\"target\":\"a\",\"trigger\":\"t\",\"guard\":{e}}}]}}"
    );
    assert!(parse_diagram_json(&json).is_err());
}
