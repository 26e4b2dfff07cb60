//! Seeded random diagrams and event sequences, for property tests and
//! differential testing beyond hand-written models.
//!
//! Diagrams use node labels `n0..`, variables `v0..` and triggers `t0..`.
//! A chain of arcs `n0 -> n1 -> ..` keeps every node reachable.

use crate::analyzer::{accept, CheckedDiagram};
use crate::model::{
    Arc, BinaryOp, ContextVariable, Diagram, Expr, NumericType, Span, UnaryOp, Value,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TYPES: [NumericType; 4] = [
    NumericType::Real64,
    NumericType::Int32,
    NumericType::Uint32,
    NumericType::Bool8,
];
const REAL_LITERALS: [&str; 8] = ["0", "1", "0.1", "0.5", "2.5", "10", "100", "0.001"];
const INT_LITERALS: [&str; 7] = ["0", "1", "2", "3", "7", "10", "1000"];

struct Gen {
    rng: ChaCha8Rng,
    vars: Vec<(String, NumericType)>,
}

impl Gen {
    fn vars_of(&self, ty: NumericType) -> Vec<String> {
        self.vars
            .iter()
            .filter(|(_, t)| *t == ty)
            .map(|(n, _)| n.clone())
            .collect()
    }

    fn literal(&mut self, ty: NumericType) -> Expr {
        match ty {
            NumericType::Real64 => Expr::num(REAL_LITERALS.choose(&mut self.rng).unwrap()),
            NumericType::Int32 | NumericType::Uint32 => {
                Expr::num(INT_LITERALS.choose(&mut self.rng).unwrap())
            }
            NumericType::Bool8 => Expr::Lit(Value::Bool8(self.rng.gen())),
        }
    }

    fn leaf(&mut self, ty: NumericType) -> Expr {
        let vars = self.vars_of(ty);
        if !vars.is_empty() && self.rng.gen_bool(0.7) {
            Expr::Var(vars.choose(&mut self.rng).unwrap().clone())
        } else {
            self.literal(ty)
        }
    }

    /// Expression of type `ty`. Every subtree contains a variable of its
    /// type when one exists, so literal-only subtrees stay small.
    fn expr(&mut self, ty: NumericType, depth: u32) -> Expr {
        if depth == 0 || self.rng.gen_bool(0.35) {
            return self.leaf(ty);
        }
        match ty {
            NumericType::Bool8 => match self.rng.gen_range(0..4) {
                0 => Expr::unary(UnaryOp::Not, self.expr(ty, depth - 1)),
                1 => {
                    let op = *[BinaryOp::And, BinaryOp::Or].choose(&mut self.rng).unwrap();
                    Expr::binary(op, self.expr(ty, depth - 1), self.expr(ty, depth - 1))
                }
                _ => self.comparison(depth),
            },
            _ => {
                if ty != NumericType::Uint32 && self.rng.gen_bool(0.15) {
                    return Expr::unary(UnaryOp::Neg, self.expr(ty, depth - 1));
                }
                let op = *[BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div]
                    .choose(&mut self.rng)
                    .unwrap();
                let l = self.expr(ty, depth - 1);
                let r = self.expr(ty, depth - 1);
                Expr::binary(op, l, r)
            }
        }
    }

    fn comparison(&mut self, depth: u32) -> Expr {
        let numeric: Vec<NumericType> = TYPES[..3]
            .iter()
            .copied()
            .filter(|t| !self.vars_of(*t).is_empty())
            .collect();
        let Some(&ty) = numeric.choose(&mut self.rng) else {
            return self.leaf(NumericType::Bool8);
        };
        let op = *[
            BinaryOp::Lt,
            BinaryOp::Le,
            BinaryOp::Gt,
            BinaryOp::Ge,
            BinaryOp::Eq,
            BinaryOp::Ne,
        ]
        .choose(&mut self.rng)
        .unwrap();
        let v = self.vars_of(ty).choose(&mut self.rng).unwrap().clone();
        let r = self.expr(ty, depth.saturating_sub(1).min(2));
        Expr::binary(op, Expr::Var(v), r)
    }
}

/// A random diagram that may or may not pass the analyzer.
pub fn random_diagram(seed: u64) -> Diagram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let node_count = rng.gen_range(1..=4);
    let nodes: Vec<String> = (0..node_count).map(|i| format!("n{i}")).collect();
    let var_count = rng.gen_range(0..=3);
    let mut variables = Vec::new();
    for i in 0..var_count {
        let ty = *TYPES.choose(&mut rng).unwrap();
        let initial = match ty {
            NumericType::Real64 => Value::Real64(rng.gen_range(-4..20) as f64 * 0.5),
            NumericType::Int32 => Value::Int32(rng.gen_range(-5..20)),
            NumericType::Uint32 => Value::Uint32(rng.gen_range(0..20)),
            NumericType::Bool8 => Value::Bool8(rng.gen()),
        };
        variables.push(ContextVariable {
            name: format!("v{i}"),
            ty,
            initial,
            span: Span::default(),
        });
    }
    let mut g = Gen {
        rng,
        vars: variables.iter().map(|v| (v.name.clone(), v.ty)).collect(),
    };
    let triggers: Vec<String> = (0..g.rng.gen_range(1..=3))
        .map(|i| format!("t{i}"))
        .collect();

    let mut arcs = Vec::new();
    // A chain keeps every node reachable.
    for i in 1..node_count {
        let t = triggers.choose(&mut g.rng).unwrap().clone();
        arcs.push(Arc::new(&nodes[i - 1], &nodes[i], &t));
    }
    for _ in 0..g.rng.gen_range(0..=8) {
        let source = nodes.choose(&mut g.rng).unwrap().clone();
        let target = nodes.choose(&mut g.rng).unwrap().clone();
        let trigger = triggers.choose(&mut g.rng).unwrap().clone();
        let mut arc = Arc::new(&source, &target, &trigger);
        if g.rng.gen_bool(0.7) {
            arc = arc.with_guard(g.expr(NumericType::Bool8, 3));
        }
        let mut targets: Vec<(String, NumericType)> = g.vars.clone();
        targets.shuffle(&mut g.rng);
        let keep = g.rng.gen_range(0..=targets.len());
        for (name, ty) in targets.into_iter().take(keep) {
            let rhs = g.expr(ty, 3);
            arc = arc.assign(&name, rhs);
        }
        arcs.push(arc);
    }
    arcs.shuffle(&mut g.rng);
    Diagram {
        name: format!("random{}", seed % 1000),
        nodes: nodes.clone(),
        initial: nodes[0].clone(),
        variables,
        arcs,
    }
}

/// A random diagram the analyzer accepts, retrying with derived seeds.
pub fn random_checked(seed: u64) -> CheckedDiagram {
    for k in 0..64u64 {
        if let Ok(a) = accept(&random_diagram(seed.wrapping_mul(64).wrapping_add(k))) {
            return a.diagram;
        }
    }
    panic!("no accepted diagram near seed {seed}");
}

/// Random event sequence over the diagram's triggers.
pub fn random_events(d: &Diagram, seed: u64, len: usize) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let triggers = d.trigger_set();
    if triggers.is_empty() {
        return Vec::new();
    }
    (0..len)
        .map(|_| triggers.choose(&mut rng).unwrap().to_string())
        .collect()
}
