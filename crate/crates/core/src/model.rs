//! Domain types for Emucharts diagrams: nodes, typed context variables,
//! guarded arcs, and the machine state the interpreter steps over.
//!
//! Everything here is plain data. Construction-time invariants that depend
//! on typing (guard is boolean, assignment types agree) are established by
//! [`crate::analyzer`], which wraps an accepted diagram in
//! [`crate::analyzer::CheckedDiagram`].

use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::format_real;

/// Fixed-width numeric kinds a context variable may have.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NumericType {
    Real64,
    Int32,
    Uint32,
    Bool8,
}

impl NumericType {
    pub const ALL: [NumericType; 4] = [
        NumericType::Real64,
        NumericType::Int32,
        NumericType::Uint32,
        NumericType::Bool8,
    ];

    pub fn bits(self) -> u32 {
        match self {
            NumericType::Real64 => 64,
            NumericType::Int32 | NumericType::Uint32 => 32,
            NumericType::Bool8 => 8,
        }
    }

    pub fn is_signed(self) -> bool {
        matches!(self, NumericType::Real64 | NumericType::Int32)
    }

    pub fn is_arithmetic(self) -> bool {
        !matches!(self, NumericType::Bool8)
    }

    pub fn name(self) -> &'static str {
        match self {
            NumericType::Real64 => "real64",
            NumericType::Int32 => "int32",
            NumericType::Uint32 => "uint32",
            NumericType::Bool8 => "bool8",
        }
    }

    pub fn from_name(name: &str) -> Option<NumericType> {
        NumericType::ALL.into_iter().find(|t| t.name() == name)
    }
}

impl fmt::Display for NumericType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A typed scalar. The payload always fits its type.
///
/// Equality on `Real64` is bitwise, so `0.0 != -0.0` and a NaN equals
/// itself. State comparisons need "identical", not IEEE equality.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "lowercase")]
pub enum Value {
    Real64(f64),
    Int32(i32),
    Uint32(u32),
    Bool8(bool),
}

impl Value {
    pub fn ty(&self) -> NumericType {
        match self {
            Value::Real64(_) => NumericType::Real64,
            Value::Int32(_) => NumericType::Int32,
            Value::Uint32(_) => NumericType::Uint32,
            Value::Bool8(_) => NumericType::Bool8,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match *self {
            Value::Bool8(b) => Some(b),
            _ => None,
        }
    }

    /// Default value of a type: zero or false.
    pub fn zero(ty: NumericType) -> Value {
        match ty {
            NumericType::Real64 => Value::Real64(0.0),
            NumericType::Int32 => Value::Int32(0),
            NumericType::Uint32 => Value::Uint32(0),
            NumericType::Bool8 => Value::Bool8(false),
        }
    }

    /// Builds a value of `ty` from literal text as written in a model
    /// (digits with an optional fractional part, optionally negated).
    pub fn from_literal(ty: NumericType, text: &str) -> Result<Value, String> {
        let fractional = text.contains('.');
        match ty {
            NumericType::Real64 => text
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(Value::Real64)
                .ok_or_else(|| format!("`{text}` is not a finite real64 literal")),
            NumericType::Int32 if !fractional => text
                .parse::<i32>()
                .map(Value::Int32)
                .map_err(|_| format!("literal `{text}` is out of range for int32")),
            NumericType::Uint32 if !fractional => text
                .parse::<u32>()
                .map(Value::Uint32)
                .map_err(|_| format!("literal `{text}` is out of range for uint32")),
            NumericType::Bool8 => match text {
                "true" => Ok(Value::Bool8(true)),
                "false" => Ok(Value::Bool8(false)),
                _ => Err(format!("`{text}` is not a bool8 literal")),
            },
            _ => Err(format!("fractional literal `{text}` used as {ty}")),
        }
    }

    fn bits(&self) -> (u8, u64) {
        match *self {
            Value::Real64(x) => (0, x.to_bits()),
            Value::Int32(x) => (1, x as u32 as u64),
            Value::Uint32(x) => (2, x as u64),
            Value::Bool8(x) => (3, x as u64),
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.bits() == other.bits()
    }
}

impl Eq for Value {}

impl std::hash::Hash for Value {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.bits().hash(state)
    }
}

/// Renders the value in trace notation: reals as shortest round-trip
/// positional decimals, integers in decimal, booleans as `true`/`false`.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Value::Real64(x) => f.write_str(&format_real(x)),
            Value::Int32(x) => write!(f, "{x}"),
            Value::Uint32(x) => write!(f, "{x}"),
            Value::Bool8(x) => write!(f, "{x}"),
        }
    }
}

/// One-based source position; `line == 0` means the item was not parsed
/// from text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Span {
        Span { line, col }
    }

    pub fn is_known(&self) -> bool {
        self.line > 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContextVariable {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: NumericType,
    pub initial: Value,
    #[serde(skip)]
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::And => "&&",
            BinaryOp::Or => "||",
        }
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(
            self,
            BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul | BinaryOp::Div
        )
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge | BinaryOp::Eq | BinaryOp::Ne
        )
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinaryOp::And | BinaryOp::Or)
    }
}

/// Expression tree shared by guards and assignment right-hand sides.
///
/// `Num` keeps a numeric literal exactly as written; the analyzer decides
/// its type from context and replaces it with a typed `Lit`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expr {
    Lit(Value),
    Num(String),
    Var(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn truth() -> Expr {
        Expr::Lit(Value::Bool8(true))
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn num(text: &str) -> Expr {
        Expr::Num(text.to_string())
    }

    pub fn unary(op: UnaryOp, e: Expr) -> Expr {
        Expr::Unary(op, Box::new(e))
    }

    pub fn binary(op: BinaryOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn is_true_literal(&self) -> bool {
        matches!(self, Expr::Lit(Value::Bool8(true)))
    }

    /// Names of variables read by the expression, in first-use order.
    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Var(name) = e {
                if !out.contains(&name.as_str()) {
                    out.push(name.as_str());
                }
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Unary(_, e) => e.walk(f),
            Expr::Binary(_, l, r) => {
                l.walk(f);
                r.walk(f);
            }
            _ => {}
        }
    }

    pub fn walk_mut(&mut self, f: &mut impl FnMut(&mut Expr)) {
        f(self);
        match self {
            Expr::Unary(_, e) => e.walk_mut(f),
            Expr::Binary(_, l, r) => {
                l.walk_mut(f);
                r.walk_mut(f);
            }
            _ => {}
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub target: String,
    pub rhs: Expr,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub source: String,
    pub target: String,
    pub trigger: String,
    #[serde(default = "Expr::truth")]
    pub guard: Expr,
    #[serde(default)]
    pub action: Vec<Assignment>,
    #[serde(skip)]
    pub span: Span,
}

impl Arc {
    pub fn new(source: &str, target: &str, trigger: &str) -> Arc {
        Arc {
            source: source.to_string(),
            target: target.to_string(),
            trigger: trigger.to_string(),
            guard: Expr::truth(),
            action: Vec::new(),
            span: Span::default(),
        }
    }

    pub fn with_guard(mut self, guard: Expr) -> Arc {
        self.guard = guard;
        self
    }

    pub fn assign(mut self, target: &str, rhs: Expr) -> Arc {
        self.action.push(Assignment {
            target: target.to_string(),
            rhs,
        });
        self
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("unknown trigger `{0}`")]
    UnknownTrigger(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagram {
    pub name: String,
    pub nodes: Vec<String>,
    pub initial: String,
    #[serde(default)]
    pub variables: Vec<ContextVariable>,
    #[serde(default)]
    pub arcs: Vec<Arc>,
}

impl Diagram {
    /// Distinct triggers in order of first appearance over the arcs.
    pub fn trigger_set(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for arc in &self.arcs {
            if !out.contains(&arc.trigger.as_str()) {
                out.push(&arc.trigger);
            }
        }
        out
    }

    pub fn has_node(&self, node: &str) -> bool {
        self.nodes.iter().any(|n| n == node)
    }

    pub fn has_trigger(&self, trigger: &str) -> bool {
        self.arcs.iter().any(|a| a.trigger == trigger)
    }

    pub fn node_index(&self, node: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == node)
    }

    pub fn variable(&self, name: &str) -> Option<&ContextVariable> {
        self.variables.iter().find(|v| v.name == name)
    }

    /// Arcs leaving `node` labelled with `trigger`, in declaration order.
    pub fn arcs_for(&self, node: &str, trigger: &str) -> Result<Vec<&Arc>, ModelError> {
        if !self.has_node(node) {
            return Err(ModelError::UnknownNode(node.to_string()));
        }
        Ok(self
            .arcs
            .iter()
            .filter(|a| a.source == node && a.trigger == trigger)
            .collect())
    }

    /// Same as [`Diagram::arcs_for`] but yields arc indices.
    pub fn arc_indices_for(&self, node: &str, trigger: &str) -> Vec<usize> {
        self.arcs
            .iter()
            .enumerate()
            .filter(|(_, a)| a.source == node && a.trigger == trigger)
            .map(|(i, _)| i)
            .collect()
    }

    /// Source nodes of `trigger`-labelled arcs, in node declaration order.
    pub fn sources_of(&self, trigger: &str) -> Vec<&str> {
        self.nodes
            .iter()
            .filter(|n| {
                self.arcs
                    .iter()
                    .any(|a| a.trigger == trigger && &a.source == *n)
            })
            .map(String::as_str)
            .collect()
    }

    /// Copy with every source position cleared, for structural comparison.
    pub fn without_spans(&self) -> Diagram {
        let mut d = self.clone();
        for v in &mut d.variables {
            v.span = Span::default();
        }
        for a in &mut d.arcs {
            a.span = Span::default();
        }
        d
    }
}

/// Current node, previous node and a valuation of the context variables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineState {
    pub curr: String,
    pub prev: String,
    pub valuation: IndexMap<String, Value>,
}

impl MachineState {
    pub fn get(&self, var: &str) -> Option<Value> {
        self.valuation.get(var).copied()
    }

    /// Trace line: `curr;prev;var1=value1;var2=value2`, variables in
    /// declaration order.
    pub fn trace_line(&self) -> String {
        let mut line = format!("{};{}", self.curr, self.prev);
        for (name, value) in &self.valuation {
            line.push(';');
            line.push_str(name);
            line.push('=');
            line.push_str(&value.to_string());
        }
        line
    }
}

impl fmt::Display for MachineState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.trace_line())
    }
}
