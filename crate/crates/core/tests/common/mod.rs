//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use emuc_core::model::Value;
use emuc_core::{accept, assets, parser, CheckedDiagram, Diagram};

pub fn checked(src: &str) -> CheckedDiagram {
    let d = parser::parse_diagram(src).unwrap_or_else(|e| panic!("parse failed: {e:?}"));
    accept(&d)
        .unwrap_or_else(|e| panic!("rejected: {e:?}"))
        .diagram
}

pub fn minimed() -> CheckedDiagram {
    checked(assets::MINIMED)
}

pub fn alaris() -> CheckedDiagram {
    checked(assets::ALARIS)
}

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus")
}

/// Shipped models followed by the synthetic corpus, as (base name, source).
pub fn corpus() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = assets::ALL
        .iter()
        .map(|(file, src)| (file.trim_end_matches(".emuc").to_string(), src.to_string()))
        .collect();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.expect("corpus entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "emuc"))
        .collect();
    paths.sort();
    for p in paths {
        let name = p.file_stem().unwrap().to_string_lossy().into_owned();
        out.push((name, std::fs::read_to_string(&p).expect("corpus file")));
    }
    out
}

pub fn corpus_checked() -> Vec<(String, CheckedDiagram)> {
    corpus()
        .into_iter()
        .map(|(name, src)| (name.clone(), checked(&src)))
        .collect()
}

/// Copy of `d` with the initial value of `var` replaced.
pub fn with_initial(d: &Diagram, var: &str, value: Value) -> CheckedDiagram {
    let mut d = d.clone();
    d.variables
        .iter_mut()
        .find(|v| v.name == var)
        .expect("declared variable")
        .initial = value;
    accept(&d).expect("still accepted").diagram
}

pub fn real(s: &emuc_core::MachineState, var: &str) -> f64 {
    match s.get(var) {
        Some(Value::Real64(x)) => x,
        other => panic!("{var} is {other:?}"),
    }
}
