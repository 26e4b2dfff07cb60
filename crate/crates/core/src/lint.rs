//! Lexical checks on C text.
//!
//! [`check_header_grammar`] verifies that a header declares its sections
//! in the fixed order
//!
//! ```text
//! preprocessor_directives [constant_definitions] typedef_definitions
//! state_labels_enum state_structure utility_functions init_function
//! permission_functions transition_functions
//! ```
//!
//! [`check_rules`] applies three coding rules:
//!
//! * R1: no `goto`.
//! * R2: an integer literal next to an unsigned operand carries a `U`
//!   suffix. Unsigned operands are `U`-suffixed literals and identifiers
//!   declared with an unsigned typedef (or `size_t`).
//! * R3: the basic type keywords (`char`, `int`, `double`, ...) appear only
//!   inside `typedef` declarations, casts, `sizeof`, and `int main`.
//!
//! Both work on a token stream, not a C parse tree: they are exact on
//! generated code and best effort on anything else.

use std::collections::HashSet;

use crate::codegen::GeneratedBundle;
use crate::diag::Diagnostic;
use crate::model::Span;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CTok {
    Ident(String),
    /// Numeric literal, verbatim.
    Number(String),
    Str,
    Char,
    Punct(String),
    /// A whole preprocessor line, without the leading `#`.
    Directive(String),
}

#[derive(Clone, Debug)]
pub struct CToken {
    pub tok: CTok,
    pub span: Span,
}

impl CToken {
    fn is_punct(&self, p: &str) -> bool {
        matches!(&self.tok, CTok::Punct(q) if q == p)
    }

    fn ident(&self) -> Option<&str> {
        match &self.tok {
            CTok::Ident(s) => Some(s),
            _ => None,
        }
    }
}

const PUNCT3: &[&str] = &["<<=", ">>=", "..."];
const PUNCT2: &[&str] = &[
    "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "+=", "-=", "*=", "/=", "%=",
    "&=", "|=", "^=", "##",
];

/// Splits C source into tokens. Comments vanish; string and character
/// literals become opaque tokens; unknown bytes become one-character
/// punctuation so that lexing never fails.
pub fn tokenize(src: &str) -> Vec<CToken> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let mut at_line_start = true;

    let advance = |i: &mut usize, line: &mut u32, col: &mut u32, n: usize| {
        for _ in 0..n {
            if *i < chars.len() {
                if chars[*i] == '\n' {
                    *line += 1;
                    *col = 1;
                } else {
                    *col += 1;
                }
                *i += 1;
            }
        }
    };

    while i < chars.len() {
        let c = chars[i];
        let span = Span::new(line, col);
        if c == '\n' {
            at_line_start = true;
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            advance(&mut i, &mut line, &mut col, 2);
            while i < chars.len() && !(chars[i] == '*' && chars.get(i + 1) == Some(&'/')) {
                advance(&mut i, &mut line, &mut col, 1);
            }
            advance(&mut i, &mut line, &mut col, 2);
            continue;
        }
        if c == '#' && at_line_start {
            let mut text = String::new();
            advance(&mut i, &mut line, &mut col, 1);
            while i < chars.len() && chars[i] != '\n' {
                if chars[i] == '\\' && chars.get(i + 1) == Some(&'\n') {
                    advance(&mut i, &mut line, &mut col, 2);
                    text.push(' ');
                    continue;
                }
                text.push(chars[i]);
                advance(&mut i, &mut line, &mut col, 1);
            }
            let text = strip_comments(&text);
            out.push(CToken {
                tok: CTok::Directive(text.trim().to_string()),
                span,
            });
            continue;
        }
        at_line_start = false;
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                advance(&mut i, &mut line, &mut col, 1);
            }
            out.push(CToken {
                tok: CTok::Ident(chars[start..i].iter().collect()),
                span,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let start = i;
            while i < chars.len() {
                let ch = chars[i];
                let hex = i > start + 1 && matches!(chars[start + 1], 'x' | 'X');
                let exp_marker = if hex { ['p', 'P'] } else { ['e', 'E'] };
                let exp_sign = (ch == '+' || ch == '-') && exp_marker.contains(&chars[i - 1]);
                if ch.is_ascii_alphanumeric() || ch == '.' || ch == '_' || exp_sign {
                    advance(&mut i, &mut line, &mut col, 1);
                } else {
                    break;
                }
            }
            out.push(CToken {
                tok: CTok::Number(chars[start..i].iter().collect()),
                span,
            });
            continue;
        }
        if c == '"' || c == '\'' {
            advance(&mut i, &mut line, &mut col, 1);
            while i < chars.len() && chars[i] != c && chars[i] != '\n' {
                let step = if chars[i] == '\\' { 2 } else { 1 };
                advance(&mut i, &mut line, &mut col, step);
            }
            advance(&mut i, &mut line, &mut col, 1);
            out.push(CToken {
                tok: if c == '"' { CTok::Str } else { CTok::Char },
                span,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        let p = PUNCT3
            .iter()
            .chain(PUNCT2)
            .find(|p| rest.starts_with(*p))
            .map(|p| p.to_string())
            .unwrap_or_else(|| c.to_string());
        advance(&mut i, &mut line, &mut col, p.chars().count());
        out.push(CToken {
            tok: CTok::Punct(p),
            span,
        });
    }
    out
}

fn strip_comments(text: &str) -> String {
    let mut out = String::new();
    let mut rest = text;
    loop {
        let block = rest.find("/*");
        let line = rest.find("//");
        match (block, line) {
            (Some(b), l) if l.is_none_or(|l| b < l) => {
                out.push_str(&rest[..b]);
                match rest[b + 2..].find("*/") {
                    Some(e) => rest = &rest[b + 2 + e + 2..],
                    None => return out,
                }
            }
            (_, Some(l)) => {
                out.push_str(&rest[..l]);
                return out;
            }
            _ => {
                out.push_str(rest);
                return out;
            }
        }
    }
}

// ---- header grammar ---------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Preprocessor,
    Constants,
    Typedefs,
    LabelsEnum,
    StateStruct,
    Utility,
    Init,
    Permission,
    Transition,
}

impl Section {
    fn name(self) -> &'static str {
        match self {
            Section::Preprocessor => "preprocessor_directives",
            Section::Constants => "constant_definitions",
            Section::Typedefs => "typedef_definitions",
            Section::LabelsEnum => "state_labels_enum",
            Section::StateStruct => "state_structure",
            Section::Utility => "utility_functions",
            Section::Init => "init_function",
            Section::Permission => "permission_functions",
            Section::Transition => "transition_functions",
        }
    }
}

/// Top-level items: a directive, or the tokens of one declaration up to
/// its `;` (or closing `}` for a function body).
fn top_level_items(tokens: &[CToken]) -> Vec<&[CToken]> {
    let mut items = Vec::new();
    let mut start = 0;
    let mut depth = 0i32;
    let mut i = 0;
    while i < tokens.len() {
        let t = &tokens[i];
        if matches!(t.tok, CTok::Directive(_)) && depth == 0 && start == i {
            items.push(&tokens[i..=i]);
            start = i + 1;
        } else if t.is_punct("{") || t.is_punct("(") || t.is_punct("[") {
            depth += 1;
        } else if t.is_punct("}") || t.is_punct(")") || t.is_punct("]") {
            depth -= 1;
            let body_end = depth == 0
                && t.is_punct("}")
                && !tokens[start..i]
                    .iter()
                    .any(|x| x.ident() == Some("typedef") || x.is_punct("="))
                && !tokens.get(i + 1).is_some_and(|n| n.is_punct(";"));
            if body_end {
                items.push(&tokens[start..=i]);
                start = i + 1;
            }
        } else if t.is_punct(";") && depth == 0 {
            items.push(&tokens[start..=i]);
            start = i + 1;
        }
        i += 1;
    }
    if start < tokens.len() {
        items.push(&tokens[start..]);
    }
    items
}

fn classify(item: &[CToken]) -> Result<(Section, Option<String>), String> {
    let first = &item[0];
    if let CTok::Directive(text) = &first.tok {
        let mut words = text.split_whitespace();
        let kw = words.next().unwrap_or("");
        if kw == "define" {
            let name = words.next().unwrap_or("");
            let has_value = words.next().is_some() && !name.contains('(');
            return Ok((
                if has_value {
                    Section::Constants
                } else {
                    Section::Preprocessor
                },
                None,
            ));
        }
        return Ok((Section::Preprocessor, None));
    }
    let idents: Vec<&str> = item.iter().filter_map(CToken::ident).collect();
    if idents.first() == Some(&"typedef") {
        if idents.contains(&"enum") {
            return Ok((Section::LabelsEnum, None));
        }
        if idents.contains(&"struct") {
            let fields = idents.to_vec();
            return Ok((Section::StateStruct, Some(fields.join(" "))));
        }
        return Ok((Section::Typedefs, None));
    }
    if item.iter().any(|t| t.is_punct("{")) {
        return Err("function body in header".to_string());
    }
    let paren = item.iter().position(|t| t.is_punct("("));
    let name = paren
        .and_then(|p| p.checked_sub(1))
        .and_then(|p| item[p].ident());
    let Some(name) = name else {
        return Err("unrecognised declaration".to_string());
    };
    let section = match name {
        "enter" | "leave" => Section::Utility,
        "init" => Section::Init,
        // A trigger may itself be named `per_x`: the return type decides.
        _ if item[0].ident() == Some("state") => Section::Transition,
        n if n.starts_with("per_") => Section::Permission,
        _ => return Err(format!("unrecognised prototype `{name}`")),
    };
    Ok((section, Some(name.to_string())))
}

/// One diagnostic per missing or out-of-order section.
pub fn check_header_grammar(header: &str) -> Vec<Diagnostic> {
    let tokens = tokenize(header);
    let mut items = top_level_items(&tokens);
    let mut diags = Vec::new();

    // A trailing include-guard `#endif` closes the file, it is not a section.
    if let Some(last) = items.last() {
        if matches!(&last[0].tok, CTok::Directive(d) if d.starts_with("endif")) {
            items.pop();
        }
    }

    let mut seen: Vec<Section> = Vec::new();
    let mut latest: Option<(Section, Span)> = None;
    let mut utility: HashSet<String> = HashSet::new();
    let mut permissions: Vec<(String, Span)> = Vec::new();
    let mut transitions: Vec<(String, Span)> = Vec::new();

    for item in items {
        let span = item[0].span;
        let (section, name) = match classify(item) {
            Ok(c) => c,
            Err(msg) => {
                diags.push(Diagnostic::error(span, msg));
                continue;
            }
        };
        if let Some((prev, _)) = latest {
            if section < prev {
                diags.push(Diagnostic::error(
                    span,
                    format!(
                        "{} after {}: sections are out of order",
                        section.name(),
                        prev.name()
                    ),
                ));
            }
        }
        if latest.is_none_or(|(prev, _)| section >= prev) {
            latest = Some((section, span));
        }
        seen.push(section);
        match section {
            Section::Utility => {
                utility.insert(name.unwrap_or_default());
            }
            Section::Permission => permissions.push((name.unwrap_or_default(), span)),
            Section::Transition => transitions.push((name.unwrap_or_default(), span)),
            Section::StateStruct => {
                let fields = name.unwrap_or_default();
                for f in ["curr_node", "prev_node"] {
                    if !fields.split(' ').any(|w| w == f) {
                        diags.push(Diagnostic::error(
                            span,
                            format!("state_structure lacks the `{f}` field"),
                        ));
                    }
                }
            }
            _ => {}
        }
    }

    for required in [
        Section::Preprocessor,
        Section::Typedefs,
        Section::LabelsEnum,
        Section::StateStruct,
        Section::Utility,
        Section::Init,
    ] {
        if !seen.contains(&required) {
            diags.push(Diagnostic::error(
                Span::default(),
                format!("missing {}", required.name()),
            ));
        }
    }
    if seen.contains(&Section::Utility) {
        for f in ["enter", "leave"] {
            if !utility.contains(f) {
                diags.push(Diagnostic::error(
                    Span::default(),
                    format!("missing utility function `{f}`"),
                ));
            }
        }
    }
    for (p, span) in &permissions {
        let t = &p["per_".len()..];
        if !transitions.iter().any(|(n, _)| n == t) {
            diags.push(Diagnostic::error(
                *span,
                format!("permission function `{p}` has no transition function `{t}`"),
            ));
        }
    }
    for (t, span) in &transitions {
        if !permissions.iter().any(|(p, _)| &p["per_".len()..] == t) {
            diags.push(Diagnostic::error(
                *span,
                format!("transition function `{t}` has no permission function `per_{t}`"),
            ));
        }
    }
    diags
}

// ---- coding rules -----------------------------------------------------------

const BASIC_TYPES: &[&str] = &[
    "char", "short", "int", "long", "float", "double", "signed", "unsigned",
];
const TYPE_WORDS: &[&str] = &[
    "char", "short", "int", "long", "float", "double", "signed", "unsigned", "const", "volatile",
    "void",
];
const R2_OPS: &[&str] = &[
    "+", "-", "*", "/", "%", "<", "<=", ">", ">=", "==", "!=", "=", "+=", "-=", "*=", "/=", "%=",
    "&", "|", "^",
];

fn is_integer_literal(text: &str) -> bool {
    let hex = text.starts_with("0x") || text.starts_with("0X");
    text.starts_with(|c: char| c.is_ascii_digit())
        && !(text.contains('.') || (!hex && (text.contains('e') || text.contains('E'))))
        && !(hex && (text.contains('p') || text.contains('P')))
}

fn has_unsigned_suffix(text: &str) -> bool {
    text.trim_end_matches(['l', 'L']).ends_with(['u', 'U'])
        || text.to_ascii_lowercase().starts_with("0x") && text.contains(['u', 'U'])
}

/// Index ranges `[start, end]` of `typedef` declarations.
fn typedef_ranges(tokens: &[CToken]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        if tokens[i].ident() == Some("typedef") {
            let mut depth = 0;
            let mut j = i;
            while j < tokens.len() {
                if tokens[j].is_punct("{") {
                    depth += 1;
                } else if tokens[j].is_punct("}") {
                    depth -= 1;
                } else if tokens[j].is_punct(";") && depth == 0 {
                    break;
                }
                j += 1;
            }
            out.push((i, j.min(tokens.len() - 1)));
            i = j;
        }
        i += 1;
    }
    out
}

/// True when the type keyword at `i` sits in `( type-name )`, a cast or a
/// `sizeof` operand.
fn in_type_name_parens(tokens: &[CToken], i: usize) -> bool {
    let mut a = i;
    while a > 0
        && (tokens[a - 1]
            .ident()
            .is_some_and(|w| TYPE_WORDS.contains(&w))
            || tokens[a - 1].is_punct("*"))
    {
        a -= 1;
    }
    let mut b = i;
    while b + 1 < tokens.len()
        && (tokens[b + 1]
            .ident()
            .is_some_and(|w| TYPE_WORDS.contains(&w))
            || tokens[b + 1].is_punct("*"))
    {
        b += 1;
    }
    a > 0 && tokens[a - 1].is_punct("(") && tokens.get(b + 1).is_some_and(|t| t.is_punct(")"))
}

fn code_tokens(source: &str) -> Vec<CToken> {
    tokenize(source)
        .into_iter()
        .filter(|t| !matches!(t.tok, CTok::Directive(_)))
        .collect()
}

fn unsigned_typedefs_in(tokens: &[CToken], ranges: &[(usize, usize)]) -> HashSet<String> {
    let mut out = HashSet::new();
    for &(a, b) in ranges {
        let words: Vec<&str> = tokens[a..=b].iter().filter_map(CToken::ident).collect();
        let braces = tokens[a..=b].iter().any(|t| t.is_punct("{"));
        if !braces && words.contains(&"unsigned") {
            if let Some(name) = words.last() {
                out.insert(name.to_string());
            }
        }
    }
    out
}

/// Names that `source` defines as unsigned types with `typedef`.
pub fn unsigned_typedefs(source: &str) -> HashSet<String> {
    let tokens = code_tokens(source);
    unsigned_typedefs_in(&tokens, &typedef_ranges(&tokens))
}

/// R1 `goto`, R2 unsuffixed literals in unsigned context, R3 bare type
/// keywords outside typedefs. Preprocessor lines are not checked.
pub fn check_rules(source: &str) -> Vec<Diagnostic> {
    check_rules_with(source, &HashSet::new())
}

/// [`check_rules`] where `known_unsigned` names unsigned typedefs declared
/// elsewhere, typically in an included header.
pub fn check_rules_with(source: &str, known_unsigned: &HashSet<String>) -> Vec<Diagnostic> {
    let tokens = code_tokens(source);
    let mut diags = Vec::new();
    let typedefs = typedef_ranges(&tokens);
    let in_typedef = |i: usize| typedefs.iter().any(|&(a, b)| a <= i && i <= b);

    // Unsigned typedef names, then identifiers declared with them.
    let mut unsigned_types = unsigned_typedefs_in(&tokens, &typedefs);
    unsigned_types.insert("size_t".to_string());
    unsigned_types.extend(known_unsigned.iter().cloned());
    // Declarations at file level or inside typedefs are global; parameters
    // and locals belong to their top-level definition.
    let regions = top_level_regions(&tokens);
    let mut global_names: HashSet<String> = HashSet::new();
    let mut local_names: HashSet<(usize, String)> = HashSet::new();
    let mut depth = 0usize;
    for (i, t) in tokens.iter().enumerate() {
        if t.is_punct("{") || t.is_punct("(") {
            depth += 1;
        } else if (t.is_punct("}") || t.is_punct(")")) && depth > 0 {
            depth -= 1;
        }
        let Some(w) = t.ident() else { continue };
        if !unsigned_types.contains(w) {
            continue;
        }
        let mut j = i + 1;
        while j < tokens.len() && (tokens[j].is_punct("*") || tokens[j].ident() == Some("const")) {
            j += 1;
        }
        if let Some(name) = tokens.get(j).and_then(CToken::ident) {
            let declares = tokens.get(j + 1).is_some_and(|n| {
                n.is_punct(";")
                    || n.is_punct("=")
                    || n.is_punct(",")
                    || n.is_punct(")")
                    || n.is_punct("[")
            });
            if declares {
                if depth == 0 || in_typedef(i) {
                    global_names.insert(name.to_string());
                } else {
                    local_names.insert((regions[i], name.to_string()));
                }
            }
        }
    }
    let is_unsigned_name = |i: usize, w: &str| {
        global_names.contains(w) || local_names.contains(&(regions[i], w.to_string()))
    };
    let unsigned_operand = |i: usize, t: &CToken| match &t.tok {
        CTok::Ident(w) => is_unsigned_name(i, w),
        CTok::Number(n) => is_integer_literal(n) && has_unsigned_suffix(n),
        _ => false,
    };

    for (i, t) in tokens.iter().enumerate() {
        match &t.tok {
            CTok::Ident(w) if w == "goto" => {
                diags.push(Diagnostic::error(t.span, "R1: `goto` is not allowed"));
            }
            CTok::Ident(w) if BASIC_TYPES.contains(&w.as_str()) => {
                let main = w == "int" && tokens.get(i + 1).and_then(CToken::ident) == Some("main");
                if !in_typedef(i) && !main && !in_type_name_parens(&tokens, i) {
                    diags.push(Diagnostic::error(
                        t.span,
                        format!("R3: basic type `{w}` used outside a typedef; use a sized typedef"),
                    ));
                }
            }
            CTok::Number(n) if is_integer_literal(n) && !has_unsigned_suffix(n) => {
                let before = i.checked_sub(2).map(|k| (&tokens[k], &tokens[k + 1]));
                let after = tokens.get(i + 1).zip(tokens.get(i + 2));
                let op =
                    |o: &CToken| matches!(&o.tok, CTok::Punct(p) if R2_OPS.contains(&p.as_str()));
                let partner = before
                    .filter(|(x, o)| op(o) && unsigned_operand(i, x))
                    .map(|(x, _)| x)
                    .or_else(|| {
                        after
                            .filter(|(o, x)| op(o) && unsigned_operand(i, x))
                            .map(|(_, x)| x)
                    });
                if let Some(x) = partner {
                    let what = match &x.tok {
                        CTok::Ident(w) => format!("`{w}`"),
                        CTok::Number(n) => format!("`{n}`"),
                        _ => String::new(),
                    };
                    diags.push(Diagnostic::error(
                        t.span,
                        format!(
                            "R2: integer literal `{n}` next to unsigned {what} lacks a `U` suffix"
                        ),
                    ));
                }
            }
            _ => {}
        }
    }
    diags
}

/// Index of the top-level declaration or definition each token belongs to.
/// A region ends at a `;` outside all brackets or at the `}` closing a body.
fn top_level_regions(tokens: &[CToken]) -> Vec<usize> {
    let mut out = Vec::with_capacity(tokens.len());
    let (mut region, mut depth) = (0usize, 0usize);
    for t in tokens {
        out.push(region);
        if t.is_punct("{") || t.is_punct("(") || t.is_punct("[") {
            depth += 1;
        } else if t.is_punct("}") || t.is_punct(")") || t.is_punct("]") {
            depth = depth.saturating_sub(1);
            if depth == 0 && t.is_punct("}") {
                region += 1;
            }
        } else if depth == 0 && t.is_punct(";") {
            region += 1;
        }
    }
    out
}

/// Rule diagnostics for each C file of a generated bundle, with the
/// header's typedefs known to every file.
pub fn check_bundle(bundle: &GeneratedBundle) -> Vec<(String, Diagnostic)> {
    let known = unsigned_typedefs(&bundle.header);
    let mut out = Vec::new();
    for (name, text) in [
        (bundle.header_file(), &bundle.header),
        (bundle.impl_file(), &bundle.impl_),
        (bundle.driver_file(), &bundle.test_driver),
    ] {
        out.extend(
            check_rules_with(text, &known)
                .into_iter()
                .map(|d| (name.clone(), d)),
        );
    }
    out
}
