//! MISRA-C style code generation.
//!
//! [`generate`] turns a checked diagram into five text artifacts: a header
//! laid out in the fixed section order checked by
//! [`crate::lint::check_header_grammar`], the implementation, a makefile,
//! a stdin/stdout test driver and a markdown manual.
//!
//! Per trigger `t` the module exports `per_t`, which answers whether the
//! current node has any `t` arc, and `t`, which fires the first arc (in
//! declaration order) whose guard holds or leaves the state unchanged.
//! Integer arithmetic and real division go through checked helpers that
//! `assert` on overflow and division by zero, mirroring the interpreter's
//! traps.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::analyzer::{explore_until_decided, CheckedDiagram, ExploreLimits};
use crate::model::{Arc, BinaryOp, Diagram, Expr, NumericType, UnaryOp, Value};
use crate::num::format_real;
use crate::parser::print_expr;

/// Compiler flags for the generated code. The makefile and the
/// differential harness both use them.
pub const STRICT_CFLAGS: &[&str] = &[
    "-std=c99",
    "-pedantic",
    "-Wall",
    "-Wextra",
    "-Werror",
    "-ffp-contract=off",
];

/// Support typedefs emitted next to the mapped ones.
const CHAR_TYPE: &str = "C_8";
const I64_TYPE: &str = "I_64";
const U64_TYPE: &str = "UI_64";

/// Deliberate generator faults, used to show that the differential tests
/// notice a broken generator.
#[doc(hidden)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    /// Emit the first two arcs of the first (node, trigger) pair that has
    /// several arcs in reverse order.
    SwapArcOrder,
    /// Never call `leave`, so `prev_node` keeps its initial value.
    DropLeave,
    /// Add one to the first numeric literal found in a guard.
    GuardLiteralOffByOne,
}

#[derive(Clone, Debug)]
pub struct CodegenConfig {
    /// Stem of the generated file names.
    pub base_name: String,
    /// Emit the redundant node and guard asserts in transition functions.
    pub emit_asserts: bool,
    /// C typedef name for each model type.
    pub word_size_map: BTreeMap<NumericType, String>,
    /// Bounds of the search that decides which guard-disjunction asserts
    /// are dropped because the trigger can idle.
    pub explore: ExploreLimits,
    #[doc(hidden)]
    pub mutation: Option<Mutation>,
}

impl CodegenConfig {
    pub fn new(base_name: &str) -> CodegenConfig {
        CodegenConfig {
            base_name: base_name.to_string(),
            emit_asserts: true,
            word_size_map: default_word_sizes(),
            explore: ExploreLimits::default(),
            mutation: None,
        }
    }
}

/// `D_64`, `I_32`, `UI_32` and `UC_8`.
pub fn default_word_sizes() -> BTreeMap<NumericType, String> {
    NumericType::ALL
        .into_iter()
        .map(|t| (t, default_type_name(t).to_string()))
        .collect()
}

fn default_type_name(t: NumericType) -> &'static str {
    match t {
        NumericType::Real64 => "D_64",
        NumericType::Int32 => "I_32",
        NumericType::Uint32 => "UI_32",
        NumericType::Bool8 => "UC_8",
    }
}

fn c_base_type(t: NumericType) -> &'static str {
    match t {
        NumericType::Real64 => "double",
        NumericType::Int32 => "int",
        NumericType::Uint32 => "unsigned int",
        NumericType::Bool8 => "unsigned char",
    }
}

#[derive(Debug, Error)]
pub enum CodegenError {
    #[error("the word size map has no C type name for {0}")]
    UnmappedType(NumericType),
    #[error("`{0}` is not a valid C identifier")]
    InvalidName(String),
    #[error("C type name `{0}` is used twice")]
    DuplicateTypeName(String),
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// The five generated files.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratedBundle {
    pub base_name: String,
    pub header: String,
    pub impl_: String,
    pub makefile: String,
    pub test_driver: String,
    pub doc: String,
}

impl GeneratedBundle {
    pub fn header_file(&self) -> String {
        format!("{}.h", self.base_name)
    }

    pub fn impl_file(&self) -> String {
        format!("{}.c", self.base_name)
    }

    pub fn driver_file(&self) -> String {
        format!("{}_driver.c", self.base_name)
    }

    pub fn driver_binary(&self) -> String {
        format!("{}_driver", self.base_name)
    }

    /// File name and contents, in a fixed order.
    pub fn files(&self) -> Vec<(String, &str)> {
        vec![
            (self.header_file(), self.header.as_str()),
            (self.impl_file(), self.impl_.as_str()),
            ("Makefile".to_string(), self.makefile.as_str()),
            (self.driver_file(), self.test_driver.as_str()),
            (format!("{}.md", self.base_name), self.doc.as_str()),
        ]
    }

    /// Writes all five files into `dir`, creating it if needed.
    pub fn write_to_dir(&self, dir: &Path) -> Result<Vec<PathBuf>, CodegenError> {
        fs::create_dir_all(dir).map_err(|source| CodegenError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut written = Vec::new();
        for (name, text) in self.files() {
            let path = dir.join(name);
            fs::write(&path, text).map_err(|source| CodegenError::Io {
                path: path.clone(),
                source,
            })?;
            written.push(path);
        }
        Ok(written)
    }
}

/// C spelling of a literal: `10.0` for reals (no float suffix, the target
/// is 64-bit), `1U` for unsigned, plain decimal for signed integers, and
/// the `true`/`false` macros for booleans.
pub fn render_literal(v: Value) -> String {
    match v {
        Value::Real64(x) if x.is_nan() => "(0.0 / 0.0)".to_string(),
        Value::Real64(x) if x.is_infinite() => if x > 0.0 {
            "(1.0 / 0.0)"
        } else {
            "(-1.0 / 0.0)"
        }
        .to_string(),
        Value::Real64(x) => format_real(x),
        Value::Int32(i32::MIN) => "(-2147483647 - 1)".to_string(),
        Value::Int32(x) => x.to_string(),
        Value::Uint32(x) => format!("{x}U"),
        Value::Bool8(b) => if b { "true" } else { "false" }.to_string(),
    }
}

fn is_c_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn emit_header(d: &CheckedDiagram, cfg: &CodegenConfig) -> Result<String, CodegenError> {
    Ok(Generator::new(d, cfg)?.header())
}

pub fn emit_impl(d: &CheckedDiagram, cfg: &CodegenConfig) -> Result<String, CodegenError> {
    Ok(Generator::new(d, cfg)?.implementation())
}

pub fn emit_makefile(d: &CheckedDiagram, cfg: &CodegenConfig) -> Result<String, CodegenError> {
    Ok(Generator::new(d, cfg)?.makefile())
}

pub fn emit_test_driver(d: &CheckedDiagram, cfg: &CodegenConfig) -> Result<String, CodegenError> {
    Ok(Generator::new(d, cfg)?.driver())
}

pub fn emit_docs(d: &CheckedDiagram, cfg: &CodegenConfig) -> Result<String, CodegenError> {
    Ok(Generator::new(d, cfg)?.docs())
}

/// All five artifacts from one analysis pass.
pub fn generate(d: &CheckedDiagram, cfg: &CodegenConfig) -> Result<GeneratedBundle, CodegenError> {
    let g = Generator::new(d, cfg)?;
    Ok(GeneratedBundle {
        base_name: cfg.base_name.clone(),
        header: g.header(),
        impl_: g.implementation(),
        makefile: g.makefile(),
        test_driver: g.driver(),
        doc: g.docs(),
    })
}

// ---- generator --------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Helper {
    AddI32,
    SubI32,
    MulI32,
    DivI32,
    NegI32,
    AddU32,
    SubU32,
    MulU32,
    DivU32,
    DivD64,
}

impl Helper {
    fn name(self) -> &'static str {
        match self {
            Helper::AddI32 => "emuc_add_i32",
            Helper::SubI32 => "emuc_sub_i32",
            Helper::MulI32 => "emuc_mul_i32",
            Helper::DivI32 => "emuc_div_i32",
            Helper::NegI32 => "emuc_neg_i32",
            Helper::AddU32 => "emuc_add_u32",
            Helper::SubU32 => "emuc_sub_u32",
            Helper::MulU32 => "emuc_mul_u32",
            Helper::DivU32 => "emuc_div_u32",
            Helper::DivD64 => "emuc_div_d64",
        }
    }

    fn for_binary(op: BinaryOp, ty: NumericType) -> Option<Helper> {
        use BinaryOp::*;
        match (ty, op) {
            (NumericType::Int32, Add) => Some(Helper::AddI32),
            (NumericType::Int32, Sub) => Some(Helper::SubI32),
            (NumericType::Int32, Mul) => Some(Helper::MulI32),
            (NumericType::Int32, Div) => Some(Helper::DivI32),
            (NumericType::Uint32, Add) => Some(Helper::AddU32),
            (NumericType::Uint32, Sub) => Some(Helper::SubU32),
            (NumericType::Uint32, Mul) => Some(Helper::MulU32),
            (NumericType::Uint32, Div) => Some(Helper::DivU32),
            (NumericType::Real64, Div) => Some(Helper::DivD64),
            _ => None,
        }
    }

    fn definition(self, t: &TypeNames) -> String {
        let i = &t.int32;
        let u = &t.uint32;
        let r = &t.real64;
        const MIN: &str = "(-2147483647 - 1)";
        match self {
            Helper::AddI32 => format!(
                "static {i} emuc_add_i32({i} a, {i} b) {{\n    assert(!((b > 0) && (a > (2147483647 - b))));\n    assert(!((b < 0) && (a < ({MIN} - b))));\n    return a + b;\n}}\n"
            ),
            Helper::SubI32 => format!(
                "static {i} emuc_sub_i32({i} a, {i} b) {{\n    assert(!((b < 0) && (a > (2147483647 + b))));\n    assert(!((b > 0) && (a < ({MIN} + b))));\n    return a - b;\n}}\n"
            ),
            Helper::MulI32 => format!(
                "static {i} emuc_mul_i32({i} a, {i} b) {{\n    const {I64_TYPE} p = ({I64_TYPE}) a * ({I64_TYPE}) b;\n    assert((p >= {MIN}) && (p <= 2147483647));\n    return ({i}) p;\n}}\n"
            ),
            Helper::DivI32 => format!(
                "static {i} emuc_div_i32({i} a, {i} b) {{\n    assert(b != 0);\n    assert(!((a == {MIN}) && (b == -1)));\n    return a / b;\n}}\n"
            ),
            Helper::NegI32 => format!(
                "static {i} emuc_neg_i32({i} a) {{\n    assert(a != {MIN});\n    return -a;\n}}\n"
            ),
            Helper::AddU32 => format!(
                "static {u} emuc_add_u32({u} a, {u} b) {{\n    assert(a <= (4294967295U - b));\n    return a + b;\n}}\n"
            ),
            Helper::SubU32 => format!(
                "static {u} emuc_sub_u32({u} a, {u} b) {{\n    assert(a >= b);\n    return a - b;\n}}\n"
            ),
            Helper::MulU32 => format!(
                "static {u} emuc_mul_u32({u} a, {u} b) {{\n    const {U64_TYPE} p = ({U64_TYPE}) a * ({U64_TYPE}) b;\n    assert(p <= 4294967295U);\n    return ({u}) p;\n}}\n"
            ),
            Helper::DivU32 => format!(
                "static {u} emuc_div_u32({u} a, {u} b) {{\n    assert(b != 0U);\n    return a / b;\n}}\n"
            ),
            Helper::DivD64 => format!(
                "static {r} emuc_div_d64({r} a, {r} b) {{\n    assert(b != 0.0);\n    return a / b;\n}}\n"
            ),
        }
    }
}

struct TypeNames {
    real64: String,
    int32: String,
    uint32: String,
    bool8: String,
}

impl TypeNames {
    fn get(&self, t: NumericType) -> &str {
        match t {
            NumericType::Real64 => &self.real64,
            NumericType::Int32 => &self.int32,
            NumericType::Uint32 => &self.uint32,
            NumericType::Bool8 => &self.bool8,
        }
    }

    fn from_config(
        d: &Diagram,
        map: &BTreeMap<NumericType, String>,
    ) -> Result<TypeNames, CodegenError> {
        let mut used: BTreeSet<NumericType> = d.variables.iter().map(|v| v.ty).collect();
        used.insert(NumericType::Bool8);
        let mut seen: HashSet<&str> = [CHAR_TYPE, I64_TYPE, U64_TYPE].into_iter().collect();
        for name in map.values() {
            if !is_c_identifier(name) {
                return Err(CodegenError::InvalidName(name.clone()));
            }
            if !seen.insert(name) {
                return Err(CodegenError::DuplicateTypeName(name.clone()));
            }
        }
        for t in used {
            if !map.contains_key(&t) {
                return Err(CodegenError::UnmappedType(t));
            }
        }
        let pick = |t| {
            map.get(&t)
                .cloned()
                .unwrap_or_else(|| default_type_name(t).to_string())
        };
        Ok(TypeNames {
            real64: pick(NumericType::Real64),
            int32: pick(NumericType::Int32),
            uint32: pick(NumericType::Uint32),
            bool8: pick(NumericType::Bool8),
        })
    }
}

// C operator binding strength; higher binds tighter.
const C_OR: u8 = 1;
const C_AND: u8 = 2;
const C_EQ: u8 = 3;
const C_REL: u8 = 4;
const C_ADD: u8 = 5;
const C_MUL: u8 = 6;
const C_UNARY: u8 = 7;
const C_ATOM: u8 = 8;

fn c_prec(op: BinaryOp) -> u8 {
    use BinaryOp::*;
    match op {
        Or => C_OR,
        And => C_AND,
        Eq | Ne => C_EQ,
        Lt | Le | Gt | Ge => C_REL,
        Add | Sub => C_ADD,
        Mul | Div => C_MUL,
    }
}

/// Operand shapes that are legal C at any precedence but draw
/// `-Wparentheses` or `-Wlogical-not-parentheses`.
fn needs_clarifying_parens(parent: BinaryOp, child: &Expr) -> bool {
    match child {
        Expr::Binary(op, ..) if parent == BinaryOp::Or => *op == BinaryOp::And,
        Expr::Binary(op, ..) if parent.is_comparison() => op.is_comparison() || op.is_logical(),
        Expr::Unary(UnaryOp::Not, _) => parent.is_comparison(),
        _ => false,
    }
}

fn type_of(d: &Diagram, e: &Expr) -> NumericType {
    match e {
        Expr::Lit(v) => v.ty(),
        Expr::Var(name) => d
            .variable(name)
            .map(|v| v.ty)
            .expect("checked diagram reads declared variables"),
        Expr::Num(text) => unreachable!("untyped literal `{text}` in a checked diagram"),
        Expr::Unary(UnaryOp::Not, _) => NumericType::Bool8,
        Expr::Unary(UnaryOp::Neg, inner) => type_of(d, inner),
        Expr::Binary(op, l, _) if op.is_arithmetic() => type_of(d, l),
        Expr::Binary(..) => NumericType::Bool8,
    }
}

/// True if evaluating `e` can trap.
fn may_trap(d: &Diagram, e: &Expr) -> bool {
    let mut trap = false;
    e.walk(&mut |sub| match sub {
        Expr::Binary(op, l, _) => trap |= Helper::for_binary(*op, type_of(d, l)).is_some(),
        Expr::Unary(UnaryOp::Neg, inner) => trap |= type_of(d, inner) == NumericType::Int32,
        _ => {}
    });
    trap
}

fn helpers_in(d: &Diagram, e: &Expr, out: &mut BTreeSet<Helper>) {
    e.walk(&mut |sub| match sub {
        Expr::Binary(op, l, _) => out.extend(Helper::for_binary(*op, type_of(d, l))),
        Expr::Unary(UnaryOp::Neg, inner) if type_of(d, inner) == NumericType::Int32 => {
            out.insert(Helper::NegI32);
        }
        _ => {}
    });
}

/// Renders an expression as C over `st->` fields, with its binding strength.
fn c_expr(d: &Diagram, e: &Expr) -> (u8, String) {
    match e {
        Expr::Lit(v) => {
            let text = render_literal(*v);
            let p = if text.starts_with('-') {
                C_UNARY
            } else {
                C_ATOM
            };
            (p, text)
        }
        Expr::Var(name) => (C_ATOM, format!("st->{name}")),
        Expr::Num(text) => unreachable!("untyped literal `{text}` in a checked diagram"),
        Expr::Unary(UnaryOp::Not, inner) => {
            (C_UNARY, format!("!{}", c_operand(d, inner, C_UNARY, false)))
        }
        Expr::Unary(UnaryOp::Neg, inner) => {
            if type_of(d, inner) == NumericType::Int32 {
                return (
                    C_ATOM,
                    format!("{}({})", Helper::NegI32.name(), c_expr(d, inner).1),
                );
            }
            let (p, text) = c_expr(d, inner);
            // `--x` would be a decrement.
            let text = if p < C_UNARY || text.starts_with('-') {
                format!("({text})")
            } else {
                text
            };
            (C_UNARY, format!("-{text}"))
        }
        Expr::Binary(op, l, r) => {
            if let Some(h) = Helper::for_binary(*op, type_of(d, l)) {
                return (
                    C_ATOM,
                    format!("{}({}, {})", h.name(), c_expr(d, l).1, c_expr(d, r).1),
                );
            }
            if let Some(folded) = fold_self_comparison(d, *op, l, r) {
                return (C_ATOM, folded.to_string());
            }
            if let Some(folded) = fold_unsigned_zero(d, *op, l, r) {
                return (C_ATOM, folded);
            }
            let p = c_prec(*op);
            let lt = c_operand(d, l, p, needs_clarifying_parens(*op, l));
            let rt = c_operand(d, r, p + 1, needs_clarifying_parens(*op, r));
            (p, format!("{lt} {} {rt}", op.symbol()))
        }
    }
}

/// Compilers reject `st->n < st->n` under `-Werror`. For identical integer
/// or boolean operands without helper calls the result is fixed (no NaN,
/// nothing to trap), so the comparison is emitted as its value.
fn fold_self_comparison(d: &Diagram, op: BinaryOp, l: &Expr, r: &Expr) -> Option<&'static str> {
    if !op.is_comparison() || l != r || type_of(d, l) == NumericType::Real64 {
        return None;
    }
    if c_expr(d, l).1.contains("emuc_") {
        return None;
    }
    Some(match op {
        BinaryOp::Le | BinaryOp::Ge | BinaryOp::Eq => "true",
        _ => "false",
    })
}

/// `u >= 0U` and `u < 0U` on unsigned operands trip `-Wtype-limits`. The
/// value is fixed; an operand with helper calls is still evaluated so that
/// its traps fire.
fn fold_unsigned_zero(d: &Diagram, op: BinaryOp, l: &Expr, r: &Expr) -> Option<String> {
    let ty = type_of(d, l);
    if !matches!(ty, NumericType::Uint32 | NumericType::Bool8) {
        return None;
    }
    let zero = |e: &Expr| {
        matches!(
            e,
            Expr::Lit(Value::Uint32(0)) | Expr::Lit(Value::Bool8(false))
        )
    };
    let (operand, value) = match op {
        BinaryOp::Ge if zero(r) => (l, true),
        BinaryOp::Lt if zero(r) => (l, false),
        BinaryOp::Le if zero(l) => (r, true),
        BinaryOp::Gt if zero(l) => (r, false),
        _ => return None,
    };
    let (p, text) = c_expr(d, operand);
    if !text.contains("emuc_") {
        return Some(value.to_string());
    }
    let text = if p < C_ATOM {
        format!("({text})")
    } else {
        text
    };
    let z = render_literal(Value::zero(ty));
    Some(if value {
        format!("({text} != {z} || true)")
    } else {
        format!("({text} != {z} && false)")
    })
}

fn c_operand(d: &Diagram, e: &Expr, min: u8, force: bool) -> String {
    let (p, text) = c_expr(d, e);
    if force || p < min {
        format!("({text})")
    } else {
        text
    }
}

/// Guard and node test of an arc's `if`. Guards that can trap go after the
/// node test so they are only evaluated where the interpreter evaluates
/// them.
fn arc_condition(d: &Diagram, a: &Arc) -> String {
    let node = format!("st->curr_node == {}", a.source);
    let guard = c_operand(d, &a.guard, C_AND, false);
    if may_trap(d, &a.guard) {
        format!("{node} && {guard}")
    } else {
        format!("{guard} && {node}")
    }
}

fn guard_disjunction(d: &Diagram, arcs: &[&Arc]) -> String {
    arcs.iter()
        .map(|a| {
            c_operand(
                d,
                &a.guard,
                C_OR,
                matches!(a.guard, Expr::Binary(BinaryOp::And, ..)),
            )
        })
        .collect::<Vec<_>>()
        .join(" || ")
}

fn apply_mutation(d: &Diagram, m: Option<Mutation>) -> Diagram {
    let mut d = d.clone();
    match m {
        Some(Mutation::SwapArcOrder) => {
            let pair = (0..d.arcs.len()).find_map(|i| {
                let a = &d.arcs[i];
                (i + 1..d.arcs.len())
                    .find(|&j| d.arcs[j].source == a.source && d.arcs[j].trigger == a.trigger)
                    .map(|j| (i, j))
            });
            if let Some((i, j)) = pair {
                d.arcs.swap(i, j);
            }
        }
        Some(Mutation::GuardLiteralOffByOne) => {
            let mut done = false;
            for a in &mut d.arcs {
                a.guard.walk_mut(&mut |e| {
                    if done {
                        return;
                    }
                    if let Expr::Lit(v) = e {
                        let bumped = match *v {
                            Value::Real64(x) => Some(Value::Real64(x + 1.0)),
                            Value::Int32(x) => x.checked_add(1).map(Value::Int32),
                            Value::Uint32(x) => x.checked_add(1).map(Value::Uint32),
                            Value::Bool8(_) => None,
                        };
                        if let Some(b) = bumped {
                            *v = b;
                            done = true;
                        }
                    }
                });
                if done {
                    break;
                }
            }
        }
        Some(Mutation::DropLeave) | None => {}
    }
    d
}

struct Generator<'a> {
    d: Diagram,
    cfg: &'a CodegenConfig,
    types: TypeNames,
    /// (node, trigger) pairs seen to idle in a reachable state; their
    /// guard-disjunction assert is replaced by a comment.
    idles: HashSet<(String, String)>,
}

impl<'a> Generator<'a> {
    fn new(
        checked: &CheckedDiagram,
        cfg: &'a CodegenConfig,
    ) -> Result<Generator<'a>, CodegenError> {
        if !is_c_identifier(&cfg.base_name) {
            return Err(CodegenError::InvalidName(cfg.base_name.clone()));
        }
        let types = TypeNames::from_config(checked, &cfg.word_size_map)?;
        let idles = if cfg.emit_asserts {
            explore_until_decided(checked, cfg.explore)
                .idle_witnesses
                .into_keys()
                .collect()
        } else {
            HashSet::new()
        };
        Ok(Generator {
            d: apply_mutation(checked, cfg.mutation),
            cfg,
            types,
            idles,
        })
    }

    fn base(&self) -> &str {
        &self.cfg.base_name
    }

    fn guard_macro(&self) -> String {
        format!("EMUC_{}_H", self.base().to_ascii_uppercase())
    }

    fn triggers(&self) -> Vec<String> {
        self.d
            .trigger_set()
            .into_iter()
            .map(str::to_string)
            .collect()
    }

    fn arcs_of(&self, trigger: &str) -> Vec<&Arc> {
        self.d
            .arcs
            .iter()
            .filter(|a| a.trigger == trigger)
            .collect()
    }

    fn sources_of(&self, trigger: &str) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for a in self.arcs_of(trigger) {
            if !out.contains(&a.source.as_str()) {
                out.push(&a.source);
            }
        }
        out
    }

    fn header(&self) -> String {
        let t = &self.types;
        let mut h = String::new();
        let guard = self.guard_macro();
        let _ = writeln!(h, "/* Generated from diagram `{}`. */", self.d.name);
        let _ = writeln!(h, "#ifndef {guard}");
        let _ = writeln!(h, "#define {guard}");
        h.push('\n');
        h.push_str("#define true 1U\n#define false 0U\n\n");
        for ty in NumericType::ALL {
            let _ = writeln!(h, "typedef {} {};", c_base_type(ty), t.get(ty));
        }
        let _ = writeln!(h, "typedef char {CHAR_TYPE};");
        let _ = writeln!(h, "typedef long long {I64_TYPE};");
        let _ = writeln!(h, "typedef unsigned long long {U64_TYPE};");
        h.push('\n');
        let _ = writeln!(
            h,
            "typedef enum {{ {} }} node_label;",
            self.d.nodes.join(", ")
        );
        h.push_str("typedef struct {\n");
        for v in &self.d.variables {
            let _ = writeln!(h, "    {} {};", t.get(v.ty), v.name);
        }
        h.push_str("    node_label curr_node;\n    node_label prev_node;\n} state;\n\n");
        h.push_str("void enter(node_label n, state* st);\n");
        h.push_str("void leave(node_label n, state* st);\n");
        h.push_str("void init(state* st);\n");
        let triggers = self.triggers();
        for tr in &triggers {
            let _ = writeln!(h, "{} per_{tr}(const state* st);", t.bool8);
        }
        for tr in &triggers {
            let _ = writeln!(h, "state {tr}(state* st);");
        }
        h.push('\n');
        let _ = writeln!(h, "#endif");
        h
    }

    fn implementation(&self) -> String {
        let d = &self.d;
        let mut c = String::new();
        let _ = writeln!(
            c,
            "/* Generated from diagram `{}`. Not thread-safe per state object. */",
            d.name
        );
        c.push_str("#include <assert.h>\n");
        let _ = writeln!(c, "#include \"{}.h\"\n", self.base());

        let mut helpers = BTreeSet::new();
        for a in &d.arcs {
            helpers_in(d, &a.guard, &mut helpers);
            for asg in &a.action {
                helpers_in(d, &asg.rhs, &mut helpers);
            }
        }
        for h in &helpers {
            c.push_str(&h.definition(&self.types));
            c.push('\n');
        }

        c.push_str("void enter(node_label n, state* st) {\n    st->curr_node = n;\n}\n\n");
        c.push_str("void leave(node_label n, state* st) {\n    st->prev_node = n;\n}\n\n");
        c.push_str("void init(state* st) {\n");
        for v in &d.variables {
            let _ = writeln!(c, "    st->{} = {};", v.name, render_literal(v.initial));
        }
        let _ = writeln!(c, "    st->prev_node = {};", d.initial);
        let _ = writeln!(c, "    enter({}, st);", d.initial);
        c.push_str("}\n");

        let triggers = self.triggers();
        for t in &triggers {
            c.push('\n');
            self.permission_function(&mut c, t);
        }
        for t in &triggers {
            c.push('\n');
            self.transition_function(&mut c, t);
        }
        c
    }

    fn permission_function(&self, c: &mut String, trigger: &str) {
        let _ = writeln!(c, "{} per_{trigger}(const state* st) {{", self.types.bool8);
        for n in self.sources_of(trigger) {
            let _ = writeln!(
                c,
                "    if (st->curr_node == {n}) {{\n        return true;\n    }}"
            );
        }
        c.push_str("    return false;\n}\n");
    }

    fn transition_function(&self, c: &mut String, trigger: &str) {
        let d = &self.d;
        let arcs = self.arcs_of(trigger);
        let sources = self.sources_of(trigger);
        let _ = writeln!(c, "state {trigger}(state* st) {{");
        if self.cfg.emit_asserts {
            let nodes: Vec<String> = sources
                .iter()
                .map(|n| format!("st->curr_node == {n}"))
                .collect();
            let _ = writeln!(c, "    assert({});", nodes.join(" || "));
            for n in &sources {
                let from_n: Vec<&Arc> = arcs.iter().copied().filter(|a| a.source == *n).collect();
                if from_n.iter().any(|a| a.guard.is_true_literal()) {
                    continue;
                }
                if self.idles.contains(&(n.to_string(), trigger.to_string())) {
                    let _ = writeln!(c, "    /* guards of {trigger} at {n} are not exhaustive: it may idle there */");
                } else if sources.len() == 1 {
                    let _ = writeln!(c, "    assert({});", guard_disjunction(d, &from_n));
                } else {
                    let _ = writeln!(
                        c,
                        "    assert(st->curr_node != {n} || {});",
                        guard_disjunction(d, &from_n)
                    );
                }
            }
        }
        for a in &arcs {
            let _ = writeln!(c, "    if ({}) {{", arc_condition(d, a));
            let targets: Vec<&str> = a.action.iter().map(|x| x.target.as_str()).collect();
            let hazard = a.action.iter().enumerate().any(|(j, asg)| {
                let reads = asg.rhs.variables();
                targets[..j].iter().any(|t| reads.contains(t))
            });
            if hazard {
                for asg in &a.action {
                    let ty = d
                        .variable(&asg.target)
                        .map(|v| v.ty)
                        .expect("declared target");
                    let _ = writeln!(
                        c,
                        "        const {} emuc_next_{} = {};",
                        self.types.get(ty),
                        asg.target,
                        c_expr(d, &asg.rhs).1
                    );
                }
            }
            if self.cfg.mutation != Some(Mutation::DropLeave) {
                let _ = writeln!(c, "        leave({}, st);", a.source);
            }
            for asg in &a.action {
                if hazard {
                    let _ = writeln!(c, "        st->{0} = emuc_next_{0};", asg.target);
                } else {
                    let _ = writeln!(c, "        st->{} = {};", asg.target, c_expr(d, &asg.rhs).1);
                }
            }
            let _ = writeln!(c, "        enter({}, st);", a.target);
            if self.cfg.emit_asserts {
                let _ = writeln!(c, "        assert(st->curr_node == {});", a.target);
            }
            c.push_str("        return *st;\n    }\n");
        }
        c.push_str("    return *st;\n}\n");
    }

    fn makefile(&self) -> String {
        let b = self.base();
        let mut m = String::new();
        let _ = writeln!(m, "# Generated from diagram `{}`.", self.d.name);
        m.push_str("CC ?= cc\n");
        let _ = writeln!(m, "CFLAGS ?= {}", STRICT_CFLAGS.join(" "));
        let _ = writeln!(m, "OBJS = {b}.o {b}_driver.o\n");
        let _ = writeln!(m, "all: {b}_driver\n");
        let _ = writeln!(m, "{b}_driver: $(OBJS)\n\t$(CC) $(CFLAGS) -o $@ $(OBJS)\n");
        let _ = writeln!(m, "{b}.o: {b}.c {b}.h\n\t$(CC) $(CFLAGS) -c {b}.c\n");
        let _ = writeln!(
            m,
            "{b}_driver.o: {b}_driver.c {b}.h\n\t$(CC) $(CFLAGS) -c {b}_driver.c\n"
        );
        let _ = writeln!(m, "clean:\n\trm -f $(OBJS) {b}_driver\n");
        m.push_str(".PHONY: all clean\n");
        m
    }

    fn driver(&self) -> String {
        let d = &self.d;
        let t = &self.types;
        let triggers = self.triggers();
        let longest = triggers.iter().map(String::len).max().unwrap_or(0);
        let buf_len = (longest + 3).max(256);
        let mut c = String::new();
        let _ = writeln!(c, "/* Test driver for diagram `{}`.", d.name);
        c.push_str(" * Reads one trigger name per line from stdin; blank lines are skipped.\n");
        c.push_str(" * Prints the initial state, then the state after every trigger:\n");
        c.push_str(" * curr;prev;var=value;... with reals in shortest round-trip form. */\n");
        c.push_str("#include <stdio.h>\n#include <stdlib.h>\n#include <string.h>\n");
        let _ = writeln!(c, "#include \"{}.h\"\n", self.base());
        let names: Vec<String> = d.nodes.iter().map(|n| format!("\"{n}\"")).collect();
        let _ = writeln!(
            c,
            "static const {CHAR_TYPE}* const emuc_node_names[{}] = {{ {} }};\n",
            d.nodes.len(),
            names.join(", ")
        );
        if d.variables.iter().any(|v| v.ty == NumericType::Real64) {
            c.push_str(&real_printer(&t.real64, &t.int32));
            c.push('\n');
        }
        c.push_str("static void emuc_print(const state* st) {\n");
        c.push_str("    (void) fputs(emuc_node_names[st->curr_node], stdout);\n");
        c.push_str("    (void) fputc(';', stdout);\n");
        c.push_str("    (void) fputs(emuc_node_names[st->prev_node], stdout);\n");
        for v in &d.variables {
            let _ = writeln!(c, "    (void) fputs(\";{}=\", stdout);", v.name);
            match v.ty {
                NumericType::Real64 => {
                    let _ = writeln!(c, "    emuc_put_real(st->{});", v.name);
                }
                NumericType::Int32 => {
                    let _ = writeln!(c, "    (void) printf(\"%d\", st->{});", v.name);
                }
                NumericType::Uint32 => {
                    let _ = writeln!(c, "    (void) printf(\"%u\", st->{});", v.name);
                }
                NumericType::Bool8 => {
                    let _ = writeln!(
                        c,
                        "    (void) fputs((st->{} != 0U) ? \"true\" : \"false\", stdout);",
                        v.name
                    );
                }
            }
        }
        c.push_str("    (void) fputc('\\n', stdout);\n    (void) fflush(stdout);\n}\n\n");

        c.push_str("int main(void) {\n    state st;\n");
        let _ = writeln!(c, "    {CHAR_TYPE} line[{buf_len}];");
        c.push_str("    init(&st);\n    emuc_print(&st);\n");
        c.push_str("    while (fgets(line, (int) sizeof line, stdin) != NULL) {\n");
        c.push_str("        size_t len = strlen(line);\n");
        c.push_str("        if ((len > 0U) && (line[len - 1U] == '\\n')) {\n");
        c.push_str("            len = len - 1U;\n        } else if (feof(stdin) == 0) {\n");
        c.push_str("            (void) fputs(\"input line too long\\n\", stderr);\n            return 2;\n        } else {\n        }\n");
        c.push_str("        if ((len > 0U) && (line[len - 1U] == '\\r')) {\n            len = len - 1U;\n        }\n");
        c.push_str("        line[len] = '\\0';\n");
        c.push_str("        if (len == 0U) {\n            continue;\n        }\n");
        let mut first = true;
        for tr in &triggers {
            let kw = if first { "        if" } else { " else if" };
            first = false;
            let _ = write!(
                c,
                "{kw} (strcmp(line, \"{tr}\") == 0) {{\n            if (per_{tr}(&st)) {{\n                (void) {tr}(&st);\n            }}\n        }}"
            );
        }
        let unknown = "(void) fprintf(stderr, \"unknown trigger `%s`\\n\", line);";
        if triggers.is_empty() {
            let _ = writeln!(c, "        {unknown}\n        return 2;");
        } else {
            let _ = writeln!(
                c,
                " else {{\n            {unknown}\n            return 2;\n        }}"
            );
        }
        c.push_str("        emuc_print(&st);\n    }\n    return 0;\n}\n");
        c
    }

    fn docs(&self) -> String {
        let d = &self.d;
        let mut m = String::new();
        let _ = writeln!(m, "# `{}`\n", d.name);
        let _ = writeln!(
            m,
            "Generated module `{0}.h` / `{0}.c`. Call `init` once, then for each event call `per_<trigger>` and, only if it returns `true`, `<trigger>`.\n",
            self.base()
        );
        let _ = writeln!(m, "## Nodes\n");
        for n in &d.nodes {
            let mark = if *n == d.initial { " (initial)" } else { "" };
            let _ = writeln!(m, "- `{n}`{mark}");
        }
        let _ = writeln!(m, "\n## Variables\n");
        if d.variables.is_empty() {
            m.push_str("No context variables.\n");
        } else {
            m.push_str("| name | type | C type | initial |\n|---|---|---|---|\n");
            for v in &d.variables {
                let _ = writeln!(
                    m,
                    "| `{}` | {} | `{}` | `{}` |",
                    v.name,
                    v.ty,
                    self.types.get(v.ty),
                    v.initial
                );
            }
        }
        let _ = writeln!(m, "\n## Triggers\n");
        let triggers = self.triggers();
        if triggers.is_empty() {
            m.push_str("This diagram has no triggers.\n");
        }
        for t in &triggers {
            let _ = writeln!(m, "### `{t}`\n");
            let sources = self.sources_of(t);
            let _ = writeln!(
                m,
                "Permitted at: {}.\n",
                sources
                    .iter()
                    .map(|s| format!("`{s}`"))
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            m.push_str("| # | from | to | guard | action |\n|---|---|---|---|---|\n");
            for (i, a) in self.arcs_of(t).iter().enumerate() {
                let action = if a.action.is_empty() {
                    "-".to_string()
                } else {
                    a.action
                        .iter()
                        .map(|x| format!("{} := {}", x.target, print_expr(&x.rhs)))
                        .collect::<Vec<_>>()
                        .join("; ")
                };
                let _ = writeln!(
                    m,
                    "| {} | `{}` | `{}` | `{}` | `{}` |",
                    i + 1,
                    a.source,
                    a.target,
                    print_expr(&a.guard).replace('|', "\\|"),
                    action.replace('|', "\\|")
                );
            }
            let idle: Vec<&&str> = sources
                .iter()
                .filter(|n| self.idles.contains(&(n.to_string(), t.to_string())))
                .collect();
            if !idle.is_empty() {
                let _ = writeln!(
                    m,
                    "\nGuards are not exhaustive at {}: the trigger can leave the state unchanged there.",
                    idle.iter().map(|s| format!("`{s}`")).collect::<Vec<_>>().join(", ")
                );
            }
            m.push('\n');
        }
        m
    }
}

/// C function printing a real in the same form as [`format_real`]: the
/// shortest `%.*e` rendering that reads back to the same value, laid out
/// positionally. `real` and `int` name the C types for binary64 and a
/// 32-bit signed integer; a `C_8` typedef for `char` must be in scope.
#[doc(hidden)]
pub fn real_printer(real: &str, int: &str) -> String {
    format!(
        r#"static void emuc_put_real({real} x) {{
    {ch} buf[40];
    {ch} digits[24];
    {int} p;
    {int} n = 0;
    {int} i = 0;
    {int} j;
    {int} e;
    {int} point;
    if (x != x) {{
        (void) fputs("nan", stdout);
        return;
    }}
    if ((x > 1.7976931348623157e308) || (x < -1.7976931348623157e308)) {{
        (void) fputs((x > 0.0) ? "inf" : "-inf", stdout);
        return;
    }}
    for (p = 1; p <= 17; p++) {{
        (void) snprintf(buf, sizeof buf, "%.*e", p - 1, x);
        if (strtod(buf, NULL) == x) {{
            break;
        }}
    }}
    if (buf[0] == '-') {{
        (void) fputc('-', stdout);
        i = 1;
    }}
    while (buf[i] != 'e') {{
        if (buf[i] != '.') {{
            digits[n] = buf[i];
            n++;
        }}
        i++;
    }}
    e = ({int}) strtol(&buf[i + 1], NULL, 10);
    while ((n > 1) && (digits[n - 1] == '0')) {{
        n--;
    }}
    if ((n == 1) && (digits[0] == '0')) {{
        e = 0;
    }}
    point = e + 1;
    if (point <= 0) {{
        (void) fputs("0.", stdout);
        for (j = 0; j < -point; j++) {{
            (void) fputc('0', stdout);
        }}
        for (j = 0; j < n; j++) {{
            (void) fputc(digits[j], stdout);
        }}
    }} else if (point >= n) {{
        for (j = 0; j < n; j++) {{
            (void) fputc(digits[j], stdout);
        }}
        for (j = n; j < point; j++) {{
            (void) fputc('0', stdout);
        }}
        (void) fputs(".0", stdout);
    }} else {{
        for (j = 0; j < n; j++) {{
            if (j == point) {{
                (void) fputc('.', stdout);
            }}
            (void) fputc(digits[j], stdout);
        }}
    }}
}}
"#,
        real = real,
        int = int,
        ch = CHAR_TYPE
    )
}
