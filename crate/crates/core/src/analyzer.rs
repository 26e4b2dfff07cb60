//! Static validation of diagrams.
//!
//! [`accept`] is the gate in front of the interpreter and the C generator:
//! it type-checks every guard and action, assigns types to numeric
//! literals, checks structure and naming, and wraps the result in a
//! [`CheckedDiagram`].
//!
//! Guard exclusivity is checked by sampling ([`check_guard_exclusivity`]).
//! It can find overlaps but never proves their absence.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::ops::Deref;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diag::Diagnostic;
use crate::interp::{self, StepOutcome};
use crate::model::{BinaryOp, Diagram, Expr, MachineState, NumericType, Span, UnaryOp, Value};

/// A diagram that passed [`accept`]: well typed, structurally sound, and
/// with every numeric literal carrying its type.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckedDiagram {
    diagram: Diagram,
}

impl CheckedDiagram {
    pub fn diagram(&self) -> &Diagram {
        &self.diagram
    }

    pub fn into_inner(self) -> Diagram {
        self.diagram
    }
}

impl Deref for CheckedDiagram {
    type Target = Diagram;

    fn deref(&self) -> &Diagram {
        &self.diagram
    }
}

#[derive(Clone, Debug)]
pub struct Accepted {
    pub diagram: CheckedDiagram,
    pub warnings: Vec<Diagnostic>,
}

/// Runs [`type_check`] and [`check_structure`]. Any error rejects the
/// diagram; warnings travel with the accepted result.
pub fn accept(d: &Diagram) -> Result<Accepted, Vec<Diagnostic>> {
    let (elaborated, mut diags) = elaborate(d);
    diags.extend(check_structure(d));
    if diags.iter().any(Diagnostic::is_error) {
        return Err(diags);
    }
    Ok(Accepted {
        diagram: CheckedDiagram {
            diagram: elaborated,
        },
        warnings: diags,
    })
}

// ---- typing ---------------------------------------------------------------

/// Type of an expression. `Int` and `Real` are literal-only subtrees whose
/// type is still open and is fixed by the surrounding context.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ty {
    Known(NumericType),
    Int,
    Real,
}

impl Ty {
    fn describe(self) -> String {
        match self {
            Ty::Known(t) => t.name().to_string(),
            Ty::Int => "integer literal".to_string(),
            Ty::Real => "real literal".to_string(),
        }
    }

    fn default_type(self) -> NumericType {
        match self {
            Ty::Known(t) => t,
            Ty::Int => NumericType::Int32,
            Ty::Real => NumericType::Real64,
        }
    }
}

struct Typer<'a> {
    vars: HashMap<&'a str, NumericType>,
}

impl Typer<'_> {
    fn infer(&self, e: &Expr) -> Result<(Expr, Ty), String> {
        match e {
            Expr::Num(text) => {
                let ty = if text.contains('.') {
                    Ty::Real
                } else {
                    Ty::Int
                };
                Ok((e.clone(), ty))
            }
            Expr::Lit(v) => Ok((e.clone(), Ty::Known(v.ty()))),
            Expr::Var(name) => match self.vars.get(name.as_str()) {
                Some(t) => Ok((e.clone(), Ty::Known(*t))),
                None => Err(format!("undeclared variable `{name}`")),
            },
            Expr::Unary(UnaryOp::Neg, inner) => {
                let (inner, ty) = self.infer(inner)?;
                match ty {
                    Ty::Known(t @ (NumericType::Bool8 | NumericType::Uint32)) => {
                        Err(format!("cannot negate a {t} value"))
                    }
                    _ => Ok((Expr::unary(UnaryOp::Neg, inner), ty)),
                }
            }
            Expr::Unary(UnaryOp::Not, inner) => {
                let (inner, ty) = self.infer(inner)?;
                if ty != Ty::Known(NumericType::Bool8) {
                    return Err(format!("`!` expects bool8, found {}", ty.describe()));
                }
                Ok((Expr::unary(UnaryOp::Not, inner), ty))
            }
            Expr::Binary(op, l, r) => {
                let (l, lt) = self.infer(l)?;
                let (r, rt) = self.infer(r)?;
                let op = *op;
                if op.is_logical() {
                    for t in [lt, rt] {
                        if t != Ty::Known(NumericType::Bool8) {
                            return Err(format!(
                                "`{}` expects bool8 operands, found {}",
                                op.symbol(),
                                t.describe()
                            ));
                        }
                    }
                    return Ok((Expr::binary(op, l, r), Ty::Known(NumericType::Bool8)));
                }
                let bool_eq = matches!(op, BinaryOp::Eq | BinaryOp::Ne)
                    && lt == Ty::Known(NumericType::Bool8)
                    && rt == Ty::Known(NumericType::Bool8);
                if bool_eq {
                    return Ok((Expr::binary(op, l, r), Ty::Known(NumericType::Bool8)));
                }
                let unified = unify_numeric(op, lt, rt)?;
                if op.is_arithmetic() {
                    match unified {
                        Ty::Known(t) => Ok((Expr::binary(op, fix(l, t)?, fix(r, t)?), unified)),
                        _ => Ok((Expr::binary(op, l, r), unified)),
                    }
                } else {
                    let t = unified.default_type();
                    Ok((
                        Expr::binary(op, fix(l, t)?, fix(r, t)?),
                        Ty::Known(NumericType::Bool8),
                    ))
                }
            }
        }
    }
}

fn unify_numeric(op: BinaryOp, lt: Ty, rt: Ty) -> Result<Ty, String> {
    let mismatch = || {
        format!(
            "`{}` operands have different types: {} and {}",
            op.symbol(),
            lt.describe(),
            rt.describe()
        )
    };
    for t in [lt, rt] {
        if t == Ty::Known(NumericType::Bool8) {
            return Err(format!(
                "`{}` expects numeric operands, found bool8",
                op.symbol()
            ));
        }
    }
    match (lt, rt) {
        (Ty::Known(a), Ty::Known(b)) if a == b => Ok(lt),
        (Ty::Known(_), Ty::Known(_)) => Err(mismatch()),
        (Ty::Known(t), Ty::Real) | (Ty::Real, Ty::Known(t)) if t != NumericType::Real64 => {
            Err(format!("fractional literal used where {t} is expected"))
        }
        (Ty::Known(t), _) | (_, Ty::Known(t)) => Ok(Ty::Known(t)),
        (Ty::Real, _) | (_, Ty::Real) => Ok(Ty::Real),
        _ => Ok(Ty::Int),
    }
}

/// Gives the open literals of `e` the concrete type `t`.
fn fix(e: Expr, t: NumericType) -> Result<Expr, String> {
    match e {
        Expr::Num(text) => Value::from_literal(t, &text).map(Expr::Lit),
        Expr::Unary(UnaryOp::Neg, inner) => {
            if t == NumericType::Uint32 {
                return Err("cannot negate a uint32 value".to_string());
            }
            Ok(Expr::unary(UnaryOp::Neg, fix(*inner, t)?))
        }
        Expr::Binary(op, l, r) if op.is_arithmetic() => {
            Ok(Expr::binary(op, fix(*l, t)?, fix(*r, t)?))
        }
        other => Ok(other),
    }
}

fn elaborate(d: &Diagram) -> (Diagram, Vec<Diagnostic>) {
    let typer = Typer {
        vars: d
            .variables
            .iter()
            .map(|v| (v.name.as_str(), v.ty))
            .collect(),
    };
    let mut diags = Vec::new();
    let mut out = d.clone();
    for v in &d.variables {
        if v.initial.ty() != v.ty {
            diags.push(Diagnostic::error(
                v.span,
                format!(
                    "initial value of `{}` is {}, declared {}",
                    v.name,
                    v.initial.ty(),
                    v.ty
                ),
            ));
        }
    }
    for arc in &mut out.arcs {
        let span = arc.span;
        let label = format!("{} -> {} : {}", arc.source, arc.target, arc.trigger);
        match typer.infer(&arc.guard) {
            Ok((g, Ty::Known(NumericType::Bool8))) => arc.guard = g,
            Ok((_, ty)) => diags.push(Diagnostic::error(
                span,
                format!("guard of `{label}` must be bool8, found {}", ty.describe()),
            )),
            Err(m) => diags.push(Diagnostic::error(
                span,
                format!("in guard of `{label}`: {m}"),
            )),
        }
        let mut assigned = HashSet::new();
        for asg in &mut arc.action {
            if !assigned.insert(asg.target.clone()) {
                diags.push(Diagnostic::error(
                    span,
                    format!("`{}` is assigned twice in one action", asg.target),
                ));
            }
            let Some(&target_ty) = typer.vars.get(asg.target.as_str()) else {
                diags.push(Diagnostic::error(
                    span,
                    format!("assignment to undeclared variable `{}`", asg.target),
                ));
                continue;
            };
            let result = typer.infer(&asg.rhs).and_then(|(rhs, ty)| match ty {
                Ty::Known(t) if t == target_ty => Ok(rhs),
                Ty::Known(t) => Err(format!(
                    "cannot assign {t} to `{}` of type {target_ty}",
                    asg.target
                )),
                _ => fix(rhs, target_ty)
                    .map_err(|m| format!("in assignment to `{}`: {m}", asg.target)),
            });
            match result {
                Ok(rhs) => asg.rhs = rhs,
                Err(m) => diags.push(Diagnostic::error(span, m)),
            }
        }
    }
    (out, diags)
}

/// Type errors: non-bool8 guards, ill-typed assignments and references to
/// undeclared variables. Empty iff the diagram is well typed.
pub fn type_check(d: &Diagram) -> Vec<Diagnostic> {
    elaborate(d).1
}

// ---- structure ------------------------------------------------------------

const C_KEYWORDS: &[&str] = &[
    "auto",
    "break",
    "case",
    "char",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extern",
    "float",
    "for",
    "goto",
    "if",
    "inline",
    "int",
    "long",
    "register",
    "restrict",
    "return",
    "short",
    "signed",
    "sizeof",
    "static",
    "struct",
    "switch",
    "typedef",
    "union",
    "unsigned",
    "void",
    "volatile",
    "while",
    "_Bool",
    "_Complex",
    "_Imaginary",
];

/// Names the generated C module and its driver define or use.
const GENERATED_NAMES: &[&str] = &[
    "state",
    "node_label",
    "enter",
    "leave",
    "init",
    "st",
    "true",
    "false",
    "main",
    "assert",
    "UC_8",
    "C_8",
    "I_32",
    "UI_32",
    "D_64",
    "I_64",
    "UI_64",
    "curr_node",
    "prev_node",
    "printf",
    "fprintf",
    "fflush",
    "fgets",
    "strcmp",
    "strlen",
    "strtod",
    "snprintf",
    "stdin",
    "stdout",
    "stderr",
    "signbit",
    "isnan",
    "isinf",
    "NULL",
    "size_t",
    "exit",
    "FILE",
    "EOF",
];

pub fn is_reserved(name: &str) -> bool {
    C_KEYWORDS.contains(&name)
        || GENERATED_NAMES.contains(&name)
        || name.starts_with("emuc_")
        || name.starts_with("__")
        || (name.starts_with('_') && name[1..].starts_with(|c: char| c.is_ascii_uppercase()))
}

/// Reachability from the initial node, duplicate arcs, and names that
/// would not survive C generation (errors); triggers that some reachable
/// node never handles (warnings).
pub fn check_structure(d: &Diagram) -> Vec<Diagnostic> {
    let mut diags = Vec::new();

    if d.nodes.is_empty() {
        diags.push(Diagnostic::error(Span::default(), "diagram has no nodes"));
    }

    let mut reserved = |name: &str, what: &str, span: Span| {
        if is_reserved(name) {
            diags.push(Diagnostic::error(
                span,
                format!("{what} `{name}` is a reserved identifier"),
            ));
        }
    };
    for n in &d.nodes {
        reserved(n, "node label", Span::default());
    }
    for v in &d.variables {
        reserved(&v.name, "variable", v.span);
    }
    let triggers = d.trigger_set();
    for t in &triggers {
        let span = d
            .arcs
            .iter()
            .find(|a| &a.trigger == t)
            .map(|a| a.span)
            .unwrap_or_default();
        reserved(t, "trigger", span);
    }

    // Nodes, triggers and permission functions share the C global namespace.
    let mut globals: HashMap<String, String> = HashMap::new();
    let mut claim = |name: String, owner: String, diags: &mut Vec<Diagnostic>| {
        if let Some(prev) = globals.get(&name) {
            diags.push(Diagnostic::error(
                Span::default(),
                format!("generated name `{name}` of {owner} clashes with {prev}"),
            ));
        } else {
            globals.insert(name, owner);
        }
    };
    for n in &d.nodes {
        claim(n.clone(), format!("node `{n}`"), &mut diags);
    }
    for t in &triggers {
        claim(t.to_string(), format!("trigger `{t}`"), &mut diags);
        claim(
            format!("per_{t}"),
            format!("the permission function of `{t}`"),
            &mut diags,
        );
    }

    // Reachability, ignoring guards.
    let mut reached: HashSet<&str> = HashSet::new();
    if d.has_node(&d.initial) {
        let mut queue = VecDeque::from([d.initial.as_str()]);
        reached.insert(&d.initial);
        while let Some(n) = queue.pop_front() {
            for a in d.arcs.iter().filter(|a| a.source == n) {
                if reached.insert(&a.target) {
                    queue.push_back(&a.target);
                }
            }
        }
    }
    for n in &d.nodes {
        if !reached.contains(n.as_str()) {
            diags.push(Diagnostic::error(
                Span::default(),
                format!("unreachable node `{n}`"),
            ));
        }
    }

    for (i, a) in d.arcs.iter().enumerate() {
        if let Some(j) = d.arcs[..i]
            .iter()
            .position(|b| b.source == a.source && b.trigger == a.trigger && b.guard == a.guard)
        {
            diags.push(Diagnostic::error(
                a.span,
                format!(
                    "duplicate arc: `{} : {}` from `{}` has the same guard as arc #{}",
                    a.source,
                    a.trigger,
                    a.source,
                    j + 1
                ),
            ));
        }
    }

    for t in &triggers {
        let idle: Vec<&str> = d
            .nodes
            .iter()
            .filter(|n| reached.contains(n.as_str()))
            .filter(|n| !d.arcs.iter().any(|a| &a.trigger == t && &a.source == *n))
            .map(String::as_str)
            .collect();
        if !idle.is_empty() {
            diags.push(Diagnostic::warning(
                Span::default(),
                format!("trigger `{t}` has no arcs from {}", quoted_list(&idle)),
            ));
        }
    }
    diags
}

fn quoted_list(items: &[&str]) -> String {
    items
        .iter()
        .map(|s| format!("`{s}`"))
        .collect::<Vec<_>>()
        .join(", ")
}

// ---- guard exclusivity ------------------------------------------------------

const MAX_VALUATIONS: usize = 200_000;

/// Searches for valuations satisfying two guards of the same (node,
/// trigger) pair. Samples per variable: its initial value, every guard
/// literal of its type with the neighbours one ulp (reals) or one unit
/// (integers) either side, then `samples_per_var` seeded random values.
/// Emits one warning per overlapping pair, with the first witness found.
pub fn check_guard_exclusivity(
    d: &CheckedDiagram,
    samples_per_var: usize,
    seed: u64,
) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let base = interp::init(d).valuation;
    let mut group = 0u64;
    for node in &d.nodes {
        for trigger in d.trigger_set() {
            let arcs = d.arc_indices_for(node, trigger);
            if arcs.len() < 2 {
                continue;
            }
            group += 1;
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(group));
            let mut vars: Vec<&str> = Vec::new();
            for &i in &arcs {
                for v in d.arcs[i].guard.variables() {
                    if !vars.contains(&v) {
                        vars.push(v);
                    }
                }
            }
            let candidates: Vec<Vec<Value>> = vars
                .iter()
                .map(|v| {
                    let var = d.variable(v).expect("checked diagram");
                    let literals: Vec<Value> = arcs
                        .iter()
                        .flat_map(|&i| literals_of(&d.arcs[i].guard))
                        .filter(|l| l.ty() == var.ty)
                        .collect();
                    sample_values(var.initial, &literals, samples_per_var, &mut rng)
                })
                .collect();

            let total: usize = candidates
                .iter()
                .map(Vec::len)
                .try_fold(1usize, |acc, n| acc.checked_mul(n))
                .unwrap_or(usize::MAX);
            let mut witnesses: BTreeMap<(usize, usize), Vec<(String, Value)>> = BTreeMap::new();
            let mut valuation = base.clone();
            let mut probe =
                |choice: &[usize], valuation: &mut indexmap::IndexMap<String, Value>| {
                    for (k, v) in vars.iter().enumerate() {
                        valuation.insert(v.to_string(), candidates[k][choice[k]]);
                    }
                    let holds: Vec<usize> = arcs
                        .iter()
                        .copied()
                        .filter(|&i| {
                            matches!(
                                interp::eval(&d.arcs[i].guard, valuation),
                                Ok(Value::Bool8(true))
                            )
                        })
                        .collect();
                    for (x, &a) in holds.iter().enumerate() {
                        for &b in &holds[x + 1..] {
                            witnesses.entry((a, b)).or_insert_with(|| {
                                vars.iter()
                                    .map(|v| (v.to_string(), valuation[*v]))
                                    .collect()
                            });
                        }
                    }
                };
            if total <= MAX_VALUATIONS {
                let mut choice = vec![0usize; vars.len()];
                'outer: loop {
                    probe(&choice, &mut valuation);
                    // odometer, last variable fastest
                    for k in (0..choice.len()).rev() {
                        choice[k] += 1;
                        if choice[k] < candidates[k].len() {
                            continue 'outer;
                        }
                        choice[k] = 0;
                    }
                    break;
                }
            } else {
                for _ in 0..MAX_VALUATIONS {
                    let choice: Vec<usize> = candidates
                        .iter()
                        .map(|c| rng.gen_range(0..c.len()))
                        .collect();
                    probe(&choice, &mut valuation);
                }
            }
            for ((a, b), witness) in witnesses {
                let w = witness
                    .iter()
                    .map(|(n, v)| format!("{n} = {v}"))
                    .collect::<Vec<_>>()
                    .join(", ");
                diags.push(Diagnostic::warning(
                    d.arcs[b].span,
                    format!(
                        "guards of arcs #{} and #{} (node `{}`, trigger `{}`) overlap, e.g. at {}",
                        a + 1,
                        b + 1,
                        node,
                        trigger,
                        if w.is_empty() {
                            "every valuation".to_string()
                        } else {
                            w
                        }
                    ),
                ));
            }
        }
    }
    diags
}

fn literals_of(e: &Expr) -> Vec<Value> {
    let mut out = Vec::new();
    e.walk(&mut |x| {
        if let Expr::Lit(v) = x {
            out.push(*v);
        }
    });
    out
}

fn sample_values(
    initial: Value,
    literals: &[Value],
    random: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Value> {
    let mut out: Vec<Value> = Vec::new();
    let push = |v: Value, out: &mut Vec<Value>| {
        if !out.contains(&v) {
            out.push(v);
        }
    };
    push(initial, &mut out);
    if let Value::Bool8(_) = initial {
        push(Value::Bool8(false), &mut out);
        push(Value::Bool8(true), &mut out);
        return out;
    }
    for &lit in literals {
        push(lit, &mut out);
        for n in neighbours(lit) {
            push(n, &mut out);
        }
    }
    let as_f64 = |v: &Value| match *v {
        Value::Real64(x) => x,
        Value::Int32(x) => x as f64,
        Value::Uint32(x) => x as f64,
        Value::Bool8(x) => x as u8 as f64,
    };
    let lo = out.iter().map(as_f64).fold(f64::INFINITY, f64::min);
    let hi = out.iter().map(as_f64).fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo).max(1.0);
    let (lo, hi) = (lo - width, hi + width);
    for _ in 0..random {
        let x = rng.gen_range(lo..=hi);
        let v = match initial {
            Value::Real64(_) => Value::Real64(x),
            Value::Int32(_) => {
                Value::Int32(x.round().clamp(i32::MIN as f64, i32::MAX as f64) as i32)
            }
            Value::Uint32(_) => Value::Uint32(x.round().clamp(0.0, u32::MAX as f64) as u32),
            Value::Bool8(_) => unreachable!(),
        };
        push(v, &mut out);
    }
    out
}

fn neighbours(v: Value) -> Vec<Value> {
    match v {
        Value::Real64(x) => vec![Value::Real64(x.next_down()), Value::Real64(x.next_up())],
        Value::Int32(x) => [x.checked_sub(1), x.checked_add(1)]
            .into_iter()
            .flatten()
            .map(Value::Int32)
            .collect(),
        Value::Uint32(x) => [x.checked_sub(1), x.checked_add(1)]
            .into_iter()
            .flatten()
            .map(Value::Uint32)
            .collect(),
        Value::Bool8(_) => vec![],
    }
}

// ---- bounded exploration --------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExploreLimits {
    /// Longest event sequence explored from the initial state.
    pub max_depth: usize,
    /// Distinct states (node plus valuation) visited before giving up.
    pub max_states: usize,
}

impl Default for ExploreLimits {
    fn default() -> Self {
        ExploreLimits {
            max_depth: 64,
            max_states: 200_000,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Exploration {
    /// (node, trigger) pairs where a reachable state has the trigger
    /// permitted but every guard false, with the first such state found.
    pub idle_witnesses: BTreeMap<(String, String), MachineState>,
    pub states_visited: usize,
    /// True when the reachable state space was exhausted within limits.
    pub complete: bool,
}

impl Exploration {
    pub fn idles(&self, node: &str, trigger: &str) -> bool {
        self.idle_witnesses
            .contains_key(&(node.to_string(), trigger.to_string()))
    }
}

/// Breadth-first exploration of the reachable states. States are
/// identified by node and valuation; steps that trap are not followed.
pub fn explore(d: &CheckedDiagram, limits: ExploreLimits) -> Exploration {
    explore_inner(d, limits, false)
}

/// [`explore`] that stops as soon as every (node, trigger) pair with arcs
/// has an idle witness. `complete` is false when it stops that way.
pub fn explore_until_decided(d: &CheckedDiagram, limits: ExploreLimits) -> Exploration {
    explore_inner(d, limits, true)
}

fn explore_inner(
    d: &CheckedDiagram,
    limits: ExploreLimits,
    stop_when_decided: bool,
) -> Exploration {
    let triggers: Vec<&str> = d.trigger_set();
    let key = |s: &MachineState| -> (usize, Vec<Value>) {
        (
            d.node_index(&s.curr).unwrap_or(usize::MAX),
            s.valuation.values().copied().collect(),
        )
    };
    // Pairs with a literal `true` guard can never idle.
    let always_fire: HashSet<(&str, &str)> = d
        .arcs
        .iter()
        .filter(|a| a.guard.is_true_literal())
        .map(|a| (a.source.as_str(), a.trigger.as_str()))
        .collect();
    let pairs: HashSet<(&str, &str)> = d
        .arcs
        .iter()
        .map(|a| (a.source.as_str(), a.trigger.as_str()))
        .filter(|p| !always_fire.contains(p))
        .collect();
    let mut result = Exploration::default();
    let start = interp::init(d);
    let mut seen = HashSet::from([key(&start)]);
    let mut frontier = vec![start];
    let mut truncated = false;
    let mut decided = stop_when_decided && pairs.is_empty();
    let depth = if decided { 0 } else { limits.max_depth };
    'depth: for _ in 0..depth {
        let mut next = Vec::new();
        for s in &frontier {
            for &t in &triggers {
                let Ok((after, outcome)) = interp::step_traced(d, s, t) else {
                    continue;
                };
                if outcome == StepOutcome::GuardUnsatisfied {
                    result
                        .idle_witnesses
                        .entry((s.curr.clone(), t.to_string()))
                        .or_insert_with(|| s.clone());
                    if stop_when_decided && result.idle_witnesses.len() == pairs.len() {
                        decided = true;
                        break 'depth;
                    }
                }
                if seen.insert(key(&after)) {
                    if seen.len() > limits.max_states {
                        truncated = true;
                        break 'depth;
                    }
                    next.push(after);
                }
            }
        }
        if next.is_empty() {
            result.complete = true;
            break;
        }
        frontier = next;
    }
    result.complete &= !truncated && !decided;
    result.states_visited = seen.len();
    result
}
