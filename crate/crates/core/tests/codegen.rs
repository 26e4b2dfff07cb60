//! Generated bundles: golden listings, header grammar, lint closure and
//! structural properties over the corpus.

mod common;

use std::time::{Duration, Instant};

use common::{checked, corpus_checked, minimed};
use emuc_core::codegen::{self, render_literal, CodegenConfig, CodegenError};
use emuc_core::lint::{self, CTok};
use emuc_core::model::{NumericType, Value};
use emuc_core::random::random_checked;
use emuc_core::{assets, CheckedDiagram};
use proptest::prelude::*;

const GOLDEN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden");

fn golden(name: &str) -> String {
    std::fs::read_to_string(format!("{GOLDEN}/{name}")).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn bundle(d: &CheckedDiagram, base: &str) -> codegen::GeneratedBundle {
    codegen::generate(d, &CodegenConfig::new(base)).expect("generation")
}

/// The text of the function whose definition starts with `signature`, up
/// to its closing brace in column one.
fn function<'a>(src: &'a str, signature: &str) -> &'a str {
    let start = src
        .find(&format!("\n{signature}"))
        .unwrap_or_else(|| panic!("no `{signature}`"))
        + 1;
    let end = src[start..].find("\n}\n").expect("closing brace") + start + 3;
    &src[start..end]
}

fn squash(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Token texts with whitespace and comments gone.
fn tokens(src: &str) -> Vec<String> {
    lint::tokenize(src)
        .into_iter()
        .map(|t| match t.tok {
            CTok::Ident(s) | CTok::Number(s) | CTok::Punct(s) => s,
            CTok::Directive(s) => format!("#{s}"),
            CTok::Str => "\"\"".to_string(),
            CTok::Char => "''".to_string(),
        })
        .collect()
}

/// Applies the two documented deviations to the published listing: the
/// state field is `curr_node` throughout, and real64 literals carry no
/// float suffix and always a fractional part.
fn normalize_reference(src: &str) -> Vec<String> {
    let mut toks = tokens(src);
    for i in 0..toks.len() {
        if toks[i] == "current_state" {
            toks[i] = "curr_node".to_string();
        }
        let t = toks[i].clone();
        if t.contains('.') && t.ends_with('f') && t.starts_with(|c: char| c.is_ascii_digit()) {
            toks[i] = t.trim_end_matches('f').to_string();
        } else if t.bytes().all(|b| b.is_ascii_digit()) {
            let real_context =
                |k: Option<usize>| k.and_then(|k| toks.get(k)).is_some_and(|x| x == "display");
            let compared = |k: Option<usize>| {
                k.and_then(|k| toks.get(k))
                    .is_some_and(|x| ["<", "<=", ">", ">=", "==", "!=", "="].contains(&x.as_str()))
            };
            if (compared(i.checked_sub(1)) && real_context(i.checked_sub(2)))
                || (compared(Some(i + 1)) && real_context(Some(i + 2)))
            {
                toks[i] = format!("{t}.0");
            }
        }
    }
    toks
}

#[test]
fn minimed_matches_golden_listings() {
    let started = Instant::now();
    let b = bundle(&minimed(), "minimed");
    assert_eq!(
        function(&b.impl_, "UC_8 per_click_UP("),
        golden("minimed_per_click_UP.c")
    );
    assert_eq!(
        function(&b.impl_, "state click_UP("),
        golden("minimed_click_UP.c")
    );
    assert!(started.elapsed() < Duration::from_secs(1));
}

#[test]
fn golden_listings_match_the_reference_modulo_deviations() {
    for (ours, reference) in [
        ("minimed_per_click_UP.c", "reference_per_click_UP.c"),
        ("minimed_click_UP.c", "reference_click_UP.c"),
    ] {
        assert_eq!(
            tokens(&golden(ours)),
            normalize_reference(&golden(reference)),
            "{ours}"
        );
    }
}

#[test]
fn reference_normalization_is_not_vacuous() {
    let raw = tokens(&golden("reference_click_UP.c"));
    assert!(raw.iter().any(|t| t == "current_state"));
    assert!(raw.iter().any(|t| t == "0.1f"));
    assert_ne!(raw, tokens(&golden("minimed_click_UP.c")));
}

#[test]
fn minimed_header_shape() {
    let b = bundle(&minimed(), "minimed");
    let h = squash(&b.header);
    assert!(
        h.contains("typedef enum { off, on } node_label;"),
        "{}",
        b.header
    );
    assert!(h.contains(
        "typedef struct { D_64 display; node_label curr_node; node_label prev_node; } state;"
    ));
    assert!(h.contains("typedef double D_64;"));
    assert!(h.contains("typedef unsigned char UC_8;"));
    for proto in [
        "void enter(node_label n, state* st);",
        "void leave(node_label n, state* st);",
        "void init(state* st);",
        "UC_8 per_click_UP(const state* st);",
        "state click_UP(state* st);",
    ] {
        assert!(h.contains(proto), "missing {proto}");
    }
    assert!(b.impl_.contains("#include \"minimed.h\""));
}

#[test]
fn zero_variable_state_has_only_node_fields() {
    let b = bundle(&checked(include_str!("corpus/toggle.emuc")), "toggle");
    assert!(squash(&b.header)
        .contains("typedef struct { node_label curr_node; node_label prev_node; } state;"));
}

#[test]
fn alaris_has_one_prototype_pair_per_trigger() {
    let d = common::alaris();
    let b = bundle(&d, "alaris");
    for t in d.trigger_set() {
        assert_eq!(
            b.header
                .matches(&format!("UC_8 per_{t}(const state* st);"))
                .count(),
            1,
            "{t}"
        );
        assert_eq!(
            b.header.matches(&format!("state {t}(state* st);")).count(),
            1,
            "{t}"
        );
    }
    assert_eq!(b.header.matches("UC_8 per_").count(), d.trigger_set().len());
}

#[test]
fn true_guard_self_loop_emits_a_true_test() {
    let d = checked("diagram d;\nnodes a;\ninitial a;\narcs { a -> a : go; }\n");
    let b = bundle(&d, "d");
    let go = function(&b.impl_, "state go(");
    assert_eq!(go.matches("if (").count(), 1);
    assert!(go.contains("if (true && st->curr_node == a) {"), "{go}");
}

/// Emitted `if` blocks of each transition function follow the arc list:
/// same count, same source, same target, same order.
#[test]
fn if_blocks_follow_arc_declaration_order() {
    for (name, d) in corpus_checked() {
        let b = bundle(&d, &name);
        for t in d.trigger_set() {
            let body = function(&b.impl_, &format!("state {t}("));
            let blocks: Vec<(String, String)> = body
                .split("\n    if (")
                .skip(1)
                .map(|blk| {
                    let arg = |call: &str| {
                        let at = blk
                            .find(call)
                            .unwrap_or_else(|| panic!("{name}/{t}: no {call}"))
                            + call.len();
                        blk[at..blk[at..].find(',').unwrap() + at].to_string()
                    };
                    (arg("leave("), arg("enter("))
                })
                .collect();
            let arcs: Vec<(String, String)> = d
                .arcs
                .iter()
                .filter(|a| a.trigger == t)
                .map(|a| (a.source.clone(), a.target.clone()))
                .collect();
            assert_eq!(blocks, arcs, "{name}/{t}");
        }
    }
}

#[test]
fn alaris_double_up_blocks_start_with_the_decade_rules() {
    let b = bundle(&common::alaris(), "alaris");
    let body = function(&b.impl_, "state click_alaris_UP(");
    let first = body
        .find("st->display >= 0.0 && st->display < 10.0")
        .unwrap();
    let middle = body
        .find("st->display >= 310.0 && st->display < 320.0")
        .unwrap();
    let last = body
        .find("st->display >= 1100.0 && st->display < 1200.0")
        .unwrap();
    assert!(first < middle && middle < last);
}

#[test]
fn header_grammar_holds_for_the_corpus() {
    let started = Instant::now();
    let corpus = corpus_checked();
    assert!(corpus.len() >= 12, "corpus has {} models", corpus.len());
    for (name, d) in &corpus {
        let header = codegen::emit_header(d, &CodegenConfig::new(name)).unwrap();
        assert_eq!(lint::check_header_grammar(&header), vec![], "{name}");
    }
    assert!(started.elapsed() < Duration::from_secs(5));
}

#[test]
fn lint_closure_for_the_corpus() {
    let started = Instant::now();
    for (name, d) in corpus_checked() {
        let b = bundle(&d, &name);
        assert_eq!(lint::check_bundle(&b), vec![], "{name}");
    }
    assert!(started.elapsed() < Duration::from_secs(5));
}

#[test]
fn injected_violations_are_reported_exactly() {
    let b = bundle(&minimed(), "minimed");
    let known = lint::unsigned_typedefs(&b.header);

    let with_goto = b.impl_.replace(
        "    return false;\n}",
        "    goto fail;\nfail:\n    return false;\n}",
    );
    let diags = lint::check_rules_with(&with_goto, &known);
    assert!(
        !diags.is_empty() && diags.iter().all(|d| d.message.starts_with("R1:")),
        "{diags:?}"
    );
    assert_eq!(diags.len(), with_goto.matches("goto fail;").count());

    let with_double = format!("{}double leak;\n", b.impl_);
    let diags = lint::check_rules_with(&with_double, &known);
    assert_eq!(diags.len(), 1, "{diags:?}");
    assert!(diags[0].message.starts_with("R3:"));
    assert_eq!(diags[0].line as usize, with_double.lines().count());
}

#[test]
fn generation_is_idempotent() {
    for (name, d) in corpus_checked() {
        assert_eq!(bundle(&d, &name), bundle(&d, &name), "{name}");
    }
}

#[test]
fn bundle_writes_five_files() {
    let dir = tempfile::tempdir().unwrap();
    let written = bundle(&minimed(), "minimed")
        .write_to_dir(dir.path())
        .unwrap();
    let mut names: Vec<String> = written
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "Makefile",
            "minimed.c",
            "minimed.h",
            "minimed.md",
            "minimed_driver.c"
        ]
    );
}

#[test]
fn makefile_targets() {
    let m = bundle(&minimed(), "minimed").makefile;
    for target in ["all:", "clean:", "minimed_driver:"] {
        assert!(m.lines().any(|l| l.starts_with(target)), "{target}");
    }
    let clean = m
        .lines()
        .skip_while(|l| !l.starts_with("clean:"))
        .nth(1)
        .unwrap();
    assert_eq!(clean.trim(), "rm -f $(OBJS) minimed_driver");
    assert!(m.contains("OBJS = minimed.o minimed_driver.o"));

    let m = bundle(&minimed(), "infusion_pump_v2").makefile;
    assert!(m
        .lines()
        .any(|l| l.starts_with("infusion_pump_v2_driver: $(OBJS)")));
}

#[test]
fn docs_content() {
    let doc = bundle(&minimed(), "minimed").doc;
    assert!(doc.contains("- `off` (initial)") && doc.contains("- `on`"));
    assert!(doc.contains("| `display` | real64 | `D_64` | `0.0` |"));
    assert!(doc.contains("### `click_UP`"));
    assert!(doc.contains("| 1 | `on` | `on` | `display < 10.0` | `display := display + 0.1` |"));

    let single = bundle(&checked(include_str!("corpus/single.emuc")), "single").doc;
    assert!(single.contains("no triggers"));

    let alaris = bundle(&common::alaris(), "alaris").doc;
    assert!(alaris.contains("`display >= 100.0 && display < 1000.0` | `display := display + 1.0`"));
    assert!(alaris.contains("`display >= 310.0 && display < 320.0` | `display := 410.0`"));
}

#[test]
fn literal_rendering() {
    assert_eq!(render_literal(Value::Real64(10.0)), "10.0");
    assert_eq!(render_literal(Value::Uint32(1)), "1U");
    assert_eq!(render_literal(Value::Bool8(true)), "true");
    assert_eq!(render_literal(Value::Bool8(false)), "false");
    let h = bundle(&minimed(), "minimed").header;
    assert!(h.contains("#define true 1U") && h.contains("#define false 0U"));
}

#[test]
fn unmapped_type_is_a_config_error() {
    let mut cfg = CodegenConfig::new("minimed");
    cfg.word_size_map.remove(&NumericType::Real64);
    let err = codegen::generate(&minimed(), &cfg).unwrap_err();
    assert!(
        matches!(err, CodegenError::UnmappedType(NumericType::Real64)),
        "{err}"
    );
    // Types the diagram does not use need no mapping.
    let mut cfg = CodegenConfig::new("toggle");
    cfg.word_size_map.remove(&NumericType::Int32);
    assert!(codegen::generate(&checked(include_str!("corpus/toggle.emuc")), &cfg).is_ok());
}

#[test]
fn shipped_assets_listed() {
    assert_eq!(
        assets::ALL.iter().map(|(n, _)| *n).collect::<Vec<_>>(),
        ["minimed.emuc", "alaris.emuc"]
    );
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 500, ..ProptestConfig::default() })]

    #[test]
    fn random_diagrams_generate_clean_code(seed in any::<u64>()) {
        let d = random_checked(seed);
        let b = bundle(&d, "rnd");
        prop_assert_eq!(lint::check_header_grammar(&b.header), vec![]);
        prop_assert_eq!(lint::check_bundle(&b), vec![]);
        prop_assert_eq!(&b, &bundle(&d, "rnd"));
    }
}
