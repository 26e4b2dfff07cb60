//! Reference executor for diagrams.
//!
//! A step on trigger `t` scans the arcs leaving the current node labelled
//! `t` in declaration order and fires the first one whose guard holds. All
//! right-hand sides of the fired action read the pre-step valuation. If the
//! trigger has no arc from the current node, or no guard holds, the state
//! is returned unchanged.
//!
//! Reals are IEEE-754 binary64 with the host's round-to-nearest-even
//! arithmetic. Integer overflow and division by zero trap.

use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analyzer::CheckedDiagram;
use crate::model::{BinaryOp, Expr, MachineState, UnaryOp, Value};
use crate::parser::print_expr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrapKind {
    DivisionByZero,
    Overflow,
}

impl fmt::Display for TrapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrapKind::DivisionByZero => "division by zero",
            TrapKind::Overflow => "integer overflow",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InterpError {
    #[error("unknown trigger `{0}`")]
    UnknownTrigger(String),
    #[error("{kind} evaluating `{expr}` on arc #{} ({label})", .arc + 1)]
    Trap {
        arc: usize,
        label: String,
        expr: String,
        kind: TrapKind,
    },
}

/// Which rule a step applied. `NotPermitted` and `GuardUnsatisfied` both
/// leave the state unchanged; `Fired` carries the arc index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StepOutcome {
    NotPermitted,
    GuardUnsatisfied,
    Fired(usize),
}

/// Tally of step outcomes over one or more runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseCounts {
    pub not_permitted: u64,
    pub guard_unsatisfied: u64,
    pub fired: u64,
}

impl CaseCounts {
    pub fn record(&mut self, outcome: StepOutcome) {
        match outcome {
            StepOutcome::NotPermitted => self.not_permitted += 1,
            StepOutcome::GuardUnsatisfied => self.guard_unsatisfied += 1,
            StepOutcome::Fired(_) => self.fired += 1,
        }
    }

    pub fn merge(&mut self, other: &CaseCounts) {
        self.not_permitted += other.not_permitted;
        self.guard_unsatisfied += other.guard_unsatisfied;
        self.fired += other.fired;
    }

    pub fn total(&self) -> u64 {
        self.not_permitted + self.guard_unsatisfied + self.fired
    }
}

pub fn init(d: &CheckedDiagram) -> MachineState {
    MachineState {
        curr: d.initial.clone(),
        prev: d.initial.clone(),
        valuation: d
            .variables
            .iter()
            .map(|v| (v.name.clone(), v.initial))
            .collect(),
    }
}

fn check_trigger(d: &CheckedDiagram, trigger: &str) -> Result<(), InterpError> {
    if d.has_trigger(trigger) {
        Ok(())
    } else {
        Err(InterpError::UnknownTrigger(trigger.to_string()))
    }
}

/// True iff the current node has an arc labelled `trigger`. Guards are not
/// consulted.
pub fn permitted(d: &CheckedDiagram, s: &MachineState, trigger: &str) -> Result<bool, InterpError> {
    check_trigger(d, trigger)?;
    Ok(d.arcs
        .iter()
        .any(|a| a.source == s.curr && a.trigger == trigger))
}

pub fn step(
    d: &CheckedDiagram,
    s: &MachineState,
    trigger: &str,
) -> Result<MachineState, InterpError> {
    step_traced(d, s, trigger).map(|(next, _)| next)
}

/// [`step`] that also reports which rule applied.
pub fn step_traced(
    d: &CheckedDiagram,
    s: &MachineState,
    trigger: &str,
) -> Result<(MachineState, StepOutcome), InterpError> {
    check_trigger(d, trigger)?;
    let mut any = false;
    for (i, arc) in d.arcs.iter().enumerate() {
        if arc.source != s.curr || arc.trigger != trigger {
            continue;
        }
        any = true;
        let trap = |e: &Expr, kind| InterpError::Trap {
            arc: i,
            label: format!("{} -> {} : {}", arc.source, arc.target, arc.trigger),
            expr: print_expr(e),
            kind,
        };
        let holds = eval(&arc.guard, &s.valuation).map_err(|k| trap(&arc.guard, k))?;
        if holds != Value::Bool8(true) {
            continue;
        }
        let mut updates = Vec::with_capacity(arc.action.len());
        for asg in &arc.action {
            let v = eval(&asg.rhs, &s.valuation).map_err(|k| trap(&asg.rhs, k))?;
            updates.push((asg.target.as_str(), v));
        }
        let mut valuation = s.valuation.clone();
        for (name, v) in updates {
            *valuation
                .get_mut(name)
                .expect("checked diagram assigns declared variables") = v;
        }
        let next = MachineState {
            curr: arc.target.clone(),
            prev: arc.source.clone(),
            valuation,
        };
        return Ok((next, StepOutcome::Fired(i)));
    }
    let outcome = if any {
        StepOutcome::GuardUnsatisfied
    } else {
        StepOutcome::NotPermitted
    };
    Ok((s.clone(), outcome))
}

/// States `[q0, q1, .., qk]` for events `e1..ek`.
pub fn run<S: AsRef<str>>(
    d: &CheckedDiagram,
    events: &[S],
) -> Result<Vec<MachineState>, InterpError> {
    let mut states = vec![init(d)];
    for e in events {
        let next = step(d, states.last().expect("non-empty"), e.as_ref())?;
        states.push(next);
    }
    Ok(states)
}

/// A run that keeps the states reached before an error.
#[derive(Clone, Debug)]
pub struct RunTrace {
    pub states: Vec<MachineState>,
    pub outcomes: Vec<StepOutcome>,
    /// Index of the event that failed, with the error.
    pub error: Option<(usize, InterpError)>,
}

impl RunTrace {
    pub fn counts(&self) -> CaseCounts {
        let mut c = CaseCounts::default();
        for o in &self.outcomes {
            c.record(*o);
        }
        c
    }
}

pub fn run_traced<S: AsRef<str>>(d: &CheckedDiagram, events: &[S]) -> RunTrace {
    let mut trace = RunTrace {
        states: vec![init(d)],
        outcomes: Vec::new(),
        error: None,
    };
    for (i, e) in events.iter().enumerate() {
        match step_traced(d, trace.states.last().expect("non-empty"), e.as_ref()) {
            Ok((next, outcome)) => {
                trace.states.push(next);
                trace.outcomes.push(outcome);
            }
            Err(err) => {
                trace.error = Some((i, err));
                break;
            }
        }
    }
    trace
}

/// Evaluates a typed expression. `&&` and `||` short-circuit.
pub fn eval(e: &Expr, valuation: &IndexMap<String, Value>) -> Result<Value, TrapKind> {
    match e {
        Expr::Lit(v) => Ok(*v),
        Expr::Var(name) => Ok(*valuation
            .get(name)
            .expect("checked diagram reads declared variables")),
        Expr::Num(text) => unreachable!("untyped literal `{text}` in a checked diagram"),
        Expr::Unary(UnaryOp::Not, inner) => match eval(inner, valuation)? {
            Value::Bool8(b) => Ok(Value::Bool8(!b)),
            v => unreachable!("`!` applied to {v:?}"),
        },
        Expr::Unary(UnaryOp::Neg, inner) => match eval(inner, valuation)? {
            Value::Real64(x) => Ok(Value::Real64(-x)),
            Value::Int32(x) => x.checked_neg().map(Value::Int32).ok_or(TrapKind::Overflow),
            v => unreachable!("negation applied to {v:?}"),
        },
        Expr::Binary(BinaryOp::And, l, r) => {
            if eval(l, valuation)? == Value::Bool8(false) {
                Ok(Value::Bool8(false))
            } else {
                eval(r, valuation)
            }
        }
        Expr::Binary(BinaryOp::Or, l, r) => {
            if eval(l, valuation)? == Value::Bool8(true) {
                Ok(Value::Bool8(true))
            } else {
                eval(r, valuation)
            }
        }
        Expr::Binary(op, l, r) => {
            let a = eval(l, valuation)?;
            let b = eval(r, valuation)?;
            binary(*op, a, b)
        }
    }
}

fn binary(op: BinaryOp, a: Value, b: Value) -> Result<Value, TrapKind> {
    use BinaryOp::*;
    use Value::*;
    let cmp = |ord: Option<std::cmp::Ordering>| -> bool {
        use std::cmp::Ordering::*;
        match (op, ord) {
            (_, None) => op == Ne,
            (Lt, Some(o)) => o == Less,
            (Le, Some(o)) => o != Greater,
            (Gt, Some(o)) => o == Greater,
            (Ge, Some(o)) => o != Less,
            (Eq, Some(o)) => o == Equal,
            (Ne, Some(o)) => o != Equal,
            _ => unreachable!(),
        }
    };
    if op.is_comparison() {
        let ord = match (a, b) {
            (Real64(x), Real64(y)) => x.partial_cmp(&y),
            (Int32(x), Int32(y)) => Some(x.cmp(&y)),
            (Uint32(x), Uint32(y)) => Some(x.cmp(&y)),
            (Bool8(x), Bool8(y)) => Some(x.cmp(&y)),
            _ => unreachable!("comparison of {a:?} and {b:?}"),
        };
        return Ok(Bool8(cmp(ord)));
    }
    match (a, b) {
        (Real64(x), Real64(y)) => Ok(Real64(match op {
            Add => x + y,
            Sub => x - y,
            Mul => x * y,
            Div if y == 0.0 => return Err(TrapKind::DivisionByZero),
            Div => x / y,
            _ => unreachable!(),
        })),
        (Int32(x), Int32(y)) => match op {
            Add => x.checked_add(y),
            Sub => x.checked_sub(y),
            Mul => x.checked_mul(y),
            Div if y == 0 => return Err(TrapKind::DivisionByZero),
            Div => x.checked_div(y),
            _ => unreachable!(),
        }
        .map(Int32)
        .ok_or(TrapKind::Overflow),
        (Uint32(x), Uint32(y)) => match op {
            Add => x.checked_add(y),
            Sub => x.checked_sub(y),
            Mul => x.checked_mul(y),
            Div if y == 0 => return Err(TrapKind::DivisionByZero),
            Div => x.checked_div(y),
            _ => unreachable!(),
        }
        .map(Uint32)
        .ok_or(TrapKind::Overflow),
        _ => unreachable!("arithmetic on {a:?} and {b:?}"),
    }
}
