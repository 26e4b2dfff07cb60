use std::fmt::Write;

use crate::model::{BinaryOp, Diagram, Expr, UnaryOp};

// Binding strength in the model grammar; higher binds tighter.
const OR: u8 = 1;
const AND: u8 = 2;
const NOT: u8 = 3;
const CMP: u8 = 4;
const ADD: u8 = 5;
const MUL: u8 = 6;
const NEG: u8 = 7;
const ATOM: u8 = 8;

fn binary_prec(op: BinaryOp) -> u8 {
    match op {
        BinaryOp::Or => OR,
        BinaryOp::And => AND,
        BinaryOp::Add | BinaryOp::Sub => ADD,
        BinaryOp::Mul | BinaryOp::Div => MUL,
        _ => CMP,
    }
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Binary(op, ..) => binary_prec(*op),
        Expr::Unary(UnaryOp::Not, _) => NOT,
        Expr::Unary(UnaryOp::Neg, _) => NEG,
        _ => ATOM,
    }
}

fn write_expr(out: &mut String, e: &Expr, min: u8) {
    let p = prec(e);
    let paren = p < min;
    if paren {
        out.push('(');
    }
    match e {
        Expr::Lit(v) => {
            let _ = write!(out, "{v}");
        }
        Expr::Num(text) => out.push_str(text),
        Expr::Var(name) => out.push_str(name),
        Expr::Unary(UnaryOp::Not, inner) => {
            out.push('!');
            write_expr(out, inner, NOT);
        }
        Expr::Unary(UnaryOp::Neg, inner) => {
            out.push('-');
            write_expr(out, inner, NEG);
        }
        Expr::Binary(op, l, r) => {
            write_expr(out, l, p);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, r, p + 1);
        }
    }
    if paren {
        out.push(')');
    }
}

/// Prints an expression in model syntax with the fewest parentheses that
/// reparse to the same tree.
pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, OR);
    out
}

/// Canonical text form of a diagram.
pub fn print_diagram(d: &Diagram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "diagram {};", d.name);
    out.push('\n');
    let _ = writeln!(out, "nodes {};", d.nodes.join(", "));
    let _ = writeln!(out, "initial {};", d.initial);
    if !d.variables.is_empty() {
        out.push_str("\nvariables {\n");
        for v in &d.variables {
            let _ = writeln!(out, "    {}: {} = {};", v.name, v.ty, v.initial);
        }
        out.push_str("}\n");
    }
    if !d.arcs.is_empty() {
        out.push_str("\narcs {\n");
        for a in &d.arcs {
            let _ = write!(out, "    {} -> {} : {}", a.source, a.target, a.trigger);
            if !a.guard.is_true_literal() {
                let _ = write!(out, " [{}]", print_expr(&a.guard));
            }
            if !a.action.is_empty() {
                out.push_str(" {");
                for asg in &a.action {
                    let _ = write!(out, " {} := {};", asg.target, print_expr(&asg.rhs));
                }
                out.push_str(" }");
            }
            out.push_str(";\n");
        }
        out.push_str("}\n");
    }
    out
}
