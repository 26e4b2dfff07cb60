//! Reader for the `.emuc` model format and the guard/action expression
//! grammar.
//!
//! ```text
//! diagram minimed;
//! nodes off, on;
//! initial off;
//! variables { display: real64 = 0.0; }
//! arcs {
//!     off -> on : click_on_off;
//!     on -> on : click_UP [display < 10] { display := display + 0.1; };
//! }
//! ```
//!
//! Expression precedence, tightest first: unary minus, `* /`, `+ -`,
//! comparisons, `!`, `&&`, `||`. The full grammar is in
//! `docs/model-format.md`.

mod lexer;
mod print;

use std::collections::HashSet;

use crate::diag::Diagnostic;
use crate::model::{
    Arc, Assignment, BinaryOp, ContextVariable, Diagram, Expr, NumericType, Span, UnaryOp, Value,
};

pub use lexer::{tokenize, Tok, Token};
pub use print::{print_diagram, print_expr};

/// Identifiers that may not appear as expression atoms. Guards over the
/// current node are expressed by an arc's source, never inside a guard.
pub const NODE_REFERENCE_WORDS: [&str; 4] = ["curr", "prev", "curr_node", "prev_node"];

const SECTION_WORDS: [&str; 5] = ["diagram", "nodes", "initial", "variables", "arcs"];

/// Deepest parenthesis, `!` and unary minus nesting accepted.
pub const MAX_NESTING: usize = 128;
/// Most binary operators accepted in one expression.
pub const MAX_OPERATORS: usize = 1000;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    nesting: usize,
    operators: usize,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn new(toks: Vec<Token>) -> Parser {
        Parser {
            toks,
            pos: 0,
            nesting: 0,
            operators: 0,
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> PResult<Span> {
        if self.peek() == tok {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(what))
        }
    }

    fn unexpected(&self, what: &str) -> Diagnostic {
        Diagnostic::error(
            self.span(),
            format!("expected {what}, found {}", self.peek().describe()),
        )
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let span = self.bump().span;
                Ok((name, span))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn keyword(&mut self, word: &str) -> bool {
        if matches!(self.peek(), Tok::Ident(w) if w == word) {
            self.bump();
            true
        } else {
            false
        }
    }

    // ---- expressions -------------------------------------------------

    /// A complete guard or right-hand side.
    fn expr(&mut self) -> PResult<Expr> {
        self.operators = 0;
        self.or_expr()
    }

    fn nested<T>(&mut self, f: impl FnOnce(&mut Self) -> PResult<T>) -> PResult<T> {
        if self.nesting >= MAX_NESTING {
            return Err(Diagnostic::error(
                self.span(),
                format!("expression nested deeper than {MAX_NESTING} levels"),
            ));
        }
        self.nesting += 1;
        let out = f(self);
        self.nesting -= 1;
        out
    }

    fn count_operator(&mut self) -> PResult<()> {
        self.operators += 1;
        if self.operators > MAX_OPERATORS {
            return Err(Diagnostic::error(
                self.span(),
                format!("expression has more than {MAX_OPERATORS} operators"),
            ));
        }
        Ok(())
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.and_expr()?;
        while self.eat(&Tok::OrOr) {
            self.count_operator()?;
            let rhs = self.and_expr()?;
            lhs = Expr::binary(BinaryOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.not_expr()?;
        while self.eat(&Tok::AndAnd) {
            self.count_operator()?;
            let rhs = self.not_expr()?;
            lhs = Expr::binary(BinaryOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        if self.eat(&Tok::Bang) {
            let operand = self.nested(Self::not_expr)?;
            return Ok(Expr::unary(UnaryOp::Not, operand));
        }
        self.cmp_expr()
    }

    fn cmp_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.add_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Lt => BinaryOp::Lt,
                Tok::Le => BinaryOp::Le,
                Tok::Gt => BinaryOp::Gt,
                Tok::Ge => BinaryOp::Ge,
                Tok::EqEq => BinaryOp::Eq,
                Tok::Ne => BinaryOp::Ne,
                Tok::Equals => {
                    return Err(Diagnostic::error(
                        self.span(),
                        "`=` is not an operator: use `==` to compare or `:=` in actions",
                    ))
                }
                _ => return Ok(lhs),
            };
            self.bump();
            self.count_operator()?;
            let rhs = self.add_expr()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn add_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            self.count_operator()?;
            let rhs = self.mul_expr()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn mul_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            self.count_operator()?;
            let rhs = self.unary_expr()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary_expr(&mut self) -> PResult<Expr> {
        if self.eat(&Tok::Minus) {
            let operand = self.nested(Self::unary_expr)?;
            return Ok(Expr::unary(UnaryOp::Neg, operand));
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Expr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Number(text) => {
                self.bump();
                Ok(Expr::Num(text))
            }
            Tok::Ident(word) => {
                self.bump();
                match word.as_str() {
                    "true" => Ok(Expr::Lit(Value::Bool8(true))),
                    "false" => Ok(Expr::Lit(Value::Bool8(false))),
                    w if NODE_REFERENCE_WORDS.contains(&w) => Err(Diagnostic::error(
                        span,
                        format!(
                            "`{w}` cannot appear in an expression: node conditions are expressed by the arc source"
                        ),
                    )),
                    _ => Ok(Expr::Var(word)),
                }
            }
            Tok::LParen => {
                self.bump();
                let inner = self.nested(Self::or_expr)?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(inner)
            }
            _ => Err(self.unexpected("an expression")),
        }
    }

    // ---- diagram -------------------------------------------------------

    fn diagram(&mut self) -> Result<(Diagram, Vec<Diagnostic>), Diagnostic> {
        if !self.keyword("diagram") {
            return Err(Diagnostic::error(self.span(), "expected diagram header"));
        }
        let (name, _) = self.ident("diagram name")?;
        self.expect(&Tok::Semi, "`;`")?;

        let mut nodes: Option<Vec<(String, Span)>> = None;
        let mut initial: Option<(String, Span)> = None;
        let mut variables: Option<Vec<ContextVariable>> = None;
        let mut arcs: Option<Vec<Arc>> = None;
        let mut diags = Vec::new();

        loop {
            let span = self.span();
            let word = match self.peek() {
                Tok::Eof => break,
                Tok::Ident(w) if SECTION_WORDS[1..].contains(&w.as_str()) => w.clone(),
                _ => {
                    return Err(
                        self.unexpected("a section (`nodes`, `initial`, `variables` or `arcs`)")
                    )
                }
            };
            self.bump();
            let duplicate = match word.as_str() {
                "nodes" => {
                    let list = self.node_list()?;
                    nodes.replace(list).is_some()
                }
                "initial" => {
                    let init = self.ident("initial node")?;
                    self.expect(&Tok::Semi, "`;`")?;
                    initial.replace(init).is_some()
                }
                "variables" => {
                    let vars = self.variables()?;
                    variables.replace(vars).is_some()
                }
                _ => {
                    let list = self.arcs()?;
                    arcs.replace(list).is_some()
                }
            };
            if duplicate {
                diags.push(Diagnostic::error(
                    span,
                    format!("duplicate `{word}` section"),
                ));
            }
        }

        let end = self.span();
        let nodes = nodes.unwrap_or_else(|| {
            diags.push(Diagnostic::error(end, "missing `nodes` section"));
            Vec::new()
        });
        let (initial, initial_span) = initial.unwrap_or_else(|| {
            diags.push(Diagnostic::error(end, "missing `initial` section"));
            (String::new(), end)
        });

        let mut seen = HashSet::new();
        for (n, span) in &nodes {
            if !seen.insert(n.as_str()) {
                diags.push(Diagnostic::error(*span, format!("duplicate node `{n}`")));
            }
        }
        if !initial.is_empty() && !seen.contains(initial.as_str()) {
            diags.push(Diagnostic::error(
                initial_span,
                format!("unknown initial node `{initial}`"),
            ));
        }

        let diagram = Diagram {
            name,
            nodes: nodes.into_iter().map(|(n, _)| n).collect(),
            initial,
            variables: variables.unwrap_or_default(),
            arcs: arcs.unwrap_or_default(),
        };
        Ok((diagram, diags))
    }

    fn node_list(&mut self) -> PResult<Vec<(String, Span)>> {
        let mut list = vec![self.ident("node label")?];
        while self.eat(&Tok::Comma) {
            list.push(self.ident("node label")?);
        }
        self.expect(&Tok::Semi, "`,` or `;`")?;
        Ok(list)
    }

    fn variables(&mut self) -> PResult<Vec<ContextVariable>> {
        self.expect(&Tok::LBrace, "`{`")?;
        let mut vars = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let (name, span) = self.ident("variable name or `}`")?;
            self.expect(&Tok::Colon, "`:`")?;
            let (ty_name, ty_span) = self.ident("type name")?;
            let ty = NumericType::from_name(&ty_name).ok_or_else(|| {
                Diagnostic::error(
                    ty_span,
                    format!("unknown type `{ty_name}` (expected real64, int32, uint32 or bool8)"),
                )
            })?;
            self.expect(&Tok::Equals, "`=`")?;
            let lit_span = self.span();
            let negative = self.eat(&Tok::Minus);
            let text = match self.bump().tok {
                Tok::Number(t) => t,
                Tok::Ident(w) if (w == "true" || w == "false") && !negative => w,
                other => {
                    return Err(Diagnostic::error(
                        lit_span,
                        format!(
                            "expected a literal initial value, found {}",
                            other.describe()
                        ),
                    ))
                }
            };
            let text = if negative { format!("-{text}") } else { text };
            let initial =
                Value::from_literal(ty, &text).map_err(|m| Diagnostic::error(lit_span, m))?;
            self.expect(&Tok::Semi, "`;`")?;
            vars.push(ContextVariable {
                name,
                ty,
                initial,
                span,
            });
        }
        Ok(vars)
    }

    fn arcs(&mut self) -> PResult<Vec<Arc>> {
        self.expect(&Tok::LBrace, "`{`")?;
        let mut arcs = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let (source, span) = self.ident("arc source node or `}`")?;
            self.expect(&Tok::Arrow, "`->`")?;
            let (target, _) = self.ident("arc target node")?;
            self.expect(&Tok::Colon, "`:`")?;
            let (trigger, _) = self.ident("trigger name")?;
            let guard = if self.eat(&Tok::LBrack) {
                let g = self.expr()?;
                self.expect(&Tok::RBrack, "`]`")?;
                g
            } else {
                Expr::truth()
            };
            let mut action = Vec::new();
            if self.eat(&Tok::LBrace) {
                while !self.eat(&Tok::RBrace) {
                    let (target, _) = self.ident("assignment target or `}`")?;
                    self.expect(&Tok::Assign, "`:=`")?;
                    let rhs = self.expr()?;
                    action.push(Assignment { target, rhs });
                    if !self.eat(&Tok::Semi) && self.peek() != &Tok::RBrace {
                        return Err(self.unexpected("`;` or `}`"));
                    }
                }
            }
            self.expect(&Tok::Semi, "`;` after arc")?;
            arcs.push(Arc {
                source,
                target,
                trigger,
                guard,
                action,
                span,
            });
        }
        Ok(arcs)
    }
}

/// Parses a single expression; the whole input must be consumed.
pub fn parse_expr(source: &str) -> Result<Expr, Diagnostic> {
    let mut p = Parser::new(tokenize(source)?);
    let e = p.expr()?;
    if p.peek() != &Tok::Eof {
        return Err(p.unexpected("end of expression"));
    }
    Ok(e)
}

/// Parses a model. On failure at least one error diagnostic is returned.
pub fn parse_diagram(source: &str) -> Result<Diagram, Vec<Diagnostic>> {
    let toks = tokenize(source).map_err(|d| vec![d])?;
    let mut p = Parser::new(toks);
    let (diagram, mut diags) = p.diagram().map_err(|d| vec![d])?;
    diags.extend(check_names(&diagram, &arc_spans(&diagram)));
    if diags.iter().any(Diagnostic::is_error) {
        Err(diags)
    } else {
        Ok(diagram)
    }
}

/// Raw bytes entry point: rejects non-UTF-8 input with a diagnostic.
pub fn parse_diagram_bytes(source: &[u8]) -> Result<Diagram, Vec<Diagnostic>> {
    match std::str::from_utf8(source) {
        Ok(text) => parse_diagram(text),
        Err(e) => {
            let prefix = &source[..e.valid_up_to()];
            let line = 1 + prefix.iter().filter(|b| **b == b'\n').count() as u32;
            let col = 1 + prefix.iter().rev().take_while(|b| **b != b'\n').count() as u32;
            Err(vec![Diagnostic::error(
                Span::new(line, col),
                "model is not valid UTF-8",
            )])
        }
    }
}

/// Reads the JSON interchange form of a diagram and applies the same
/// structural checks as the text parser.
pub fn parse_diagram_json(source: &str) -> Result<Diagram, Vec<Diagnostic>> {
    let diagram: Diagram = serde_json::from_str(source).map_err(|e| {
        vec![Diagnostic::error(
            Span::new(e.line() as u32, e.column().max(1) as u32),
            format!("invalid diagram JSON: {e}"),
        )]
    })?;
    let mut diags = Vec::new();
    if diagram.nodes.is_empty() {
        diags.push(Diagnostic::error(Span::default(), "diagram has no nodes"));
    }
    let mut seen = HashSet::new();
    for n in &diagram.nodes {
        if !seen.insert(n.as_str()) {
            diags.push(Diagnostic::error(
                Span::default(),
                format!("duplicate node `{n}`"),
            ));
        }
    }
    if !diagram.has_node(&diagram.initial) {
        diags.push(Diagnostic::error(
            Span::default(),
            format!("unknown initial node `{}`", diagram.initial),
        ));
    }
    for v in &diagram.variables {
        if v.initial.ty() != v.ty {
            diags.push(Diagnostic::error(
                Span::default(),
                format!(
                    "initial value of `{}` is {}, declared {}",
                    v.name,
                    v.initial.ty(),
                    v.ty
                ),
            ));
        }
    }
    diags.extend(check_names(&diagram, &arc_spans(&diagram)));
    if diags.iter().any(Diagnostic::is_error) {
        Err(diags)
    } else {
        Ok(diagram)
    }
}

fn arc_spans(d: &Diagram) -> Vec<Span> {
    d.arcs.iter().map(|a| a.span).collect()
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Name-level invariants shared by both input formats: identifiers are
/// C identifiers, variables are unique, arcs connect declared nodes, no
/// action assigns a variable twice, and no guard mentions a node.
fn check_names(d: &Diagram, spans: &[Span]) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let bad_ident = |name: &str, what: &str, span: Span, diags: &mut Vec<Diagnostic>| {
        if !is_identifier(name) {
            diags.push(Diagnostic::error(
                span,
                format!("{what} `{name}` is not a valid identifier"),
            ));
        }
    };
    bad_ident(&d.name, "diagram name", Span::default(), &mut diags);
    for n in &d.nodes {
        bad_ident(n, "node label", Span::default(), &mut diags);
    }
    let mut seen = HashSet::new();
    for v in &d.variables {
        bad_ident(&v.name, "variable", v.span, &mut diags);
        if !seen.insert(v.name.as_str()) {
            diags.push(Diagnostic::error(
                v.span,
                format!("duplicate variable `{}`", v.name),
            ));
        }
        if d.has_node(&v.name) {
            diags.push(Diagnostic::error(
                v.span,
                format!("variable `{}` has the same name as a node", v.name),
            ));
        }
    }
    for (arc, span) in d.arcs.iter().zip(spans) {
        let span = *span;
        bad_ident(&arc.trigger, "trigger", span, &mut diags);
        for end in [&arc.source, &arc.target] {
            if !d.has_node(end) {
                diags.push(Diagnostic::error(
                    span,
                    format!("arc refers to unknown node `{end}`"),
                ));
            }
        }
        let mut targets = HashSet::new();
        for asg in &arc.action {
            if !targets.insert(asg.target.as_str()) {
                diags.push(Diagnostic::error(
                    span,
                    format!("`{}` is assigned twice in one action", asg.target),
                ));
            }
        }
        let mut exprs = vec![&arc.guard];
        exprs.extend(arc.action.iter().map(|a| &a.rhs));
        for e in exprs {
            for name in e.variables() {
                if d.has_node(name) && d.variable(name).is_none() {
                    diags.push(Diagnostic::error(
                        span,
                        format!("node label `{name}` cannot appear in an expression"),
                    ));
                }
            }
        }
    }
    diags
}
