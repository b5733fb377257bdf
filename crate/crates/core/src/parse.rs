//! The `.slc` loop format.
//!
//! ```text
//! # loop with a three-phase ranking function
//! vars: x1 x2 x3
//! guard:
//!   x1 >= -x3
//! update:
//!   x1' = x1 + x2
//!   x2' = x2 + x3
//!   x3' = x3 - 1
//! ```
//!
//! One constraint per line; relations are `<=`, `>=`, `=` (or `==`).
//! Coefficients are integers or `p/q`, optionally followed by `*`. Optional
//! directives `mode: rational|integer`, `depth-bound: N` and `max-iters: N`
//! may appear anywhere outside the blocks' constraint lines.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::linalg::{fmt_rational, Rational, Vector};
use crate::loops::{LoopError, LoopRow, RowRel, SlcLoop};
use crate::polyhedron::write_linear;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Rational,
    Integer,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Rational => "rational",
            Mode::Integer => "integer",
        }
    }
}

impl FromStr for Mode {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "rational" => Ok(Mode::Rational),
            "integer" => Ok(Mode::Integer),
            _ => Err(()),
        }
    }
}

/// A parsed file: the loop plus any directives it carried.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopFile {
    pub slc: SlcLoop,
    pub mode: Option<Mode>,
    pub depth_bound: Option<usize>,
    pub max_iters: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("undeclared variable `{0}`")]
    UndeclaredVariable(String),
    #[error("primed variable in guard: `{0}'`")]
    PrimedInGuard(String),
    #[error("non-linear term")]
    NonLinear,
    #[error("malformed rational `{0}`")]
    MalformedRational(String),
    #[error("strict relation `{0}` is not supported")]
    StrictRelation(String),
    #[error("expected exactly one of <=, >=, =")]
    Relation,
    #[error("unexpected `{0}`")]
    Unexpected(String),
    #[error("unexpected end of constraint")]
    UnexpectedEnd,
    #[error("missing `vars:` declaration")]
    MissingVars,
    #[error("`vars:` declared twice")]
    DuplicateVars,
    #[error("bad variable name `{0}`")]
    BadName(String),
    #[error("unknown directive `{0}`")]
    UnknownDirective(String),
    #[error("invalid value `{1}` for `{0}`")]
    BadDirective(String, String),
    #[error("constraint outside a `guard:` or `update:` block")]
    OutsideBlock,
    #[error(transparent)]
    Loop(#[from] LoopError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

fn err<T>(line: usize, column: usize, kind: ParseErrorKind) -> Result<T, ParseError> {
    Err(ParseError { line, column, kind })
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String, bool),
    Plus,
    Minus,
    Star,
    Rel(String),
    Other(String),
}

/// Tokens paired with their 1-based columns.
fn lex(text: &str, line: usize, offset: usize) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = offset + i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '/' || chars[i] == '.') {
                i += 1;
            }
            out.push((Tok::Num(chars[start..i].iter().collect()), col));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let name: String = chars[start..i].iter().collect();
            let primed = i < chars.len() && chars[i] == '\'';
            if primed {
                i += 1;
            }
            out.push((Tok::Ident(name, primed), col));
        } else if c == '<' || c == '>' || c == '=' || c == '!' {
            let two = i + 1 < chars.len() && chars[i + 1] == '=';
            let op: String = chars[i..i + 1 + two as usize].iter().collect();
            i += 1 + two as usize;
            match op.as_str() {
                "<=" | ">=" | "=" | "==" => out.push((Tok::Rel(op), col)),
                "<" | ">" => return err(line, col, ParseErrorKind::StrictRelation(op)),
                _ => return err(line, col, ParseErrorKind::Unexpected(op)),
            }
        } else {
            let tok = match c {
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                _ => Tok::Other(c.to_string()),
            };
            out.push((tok, col));
            i += 1;
        }
    }
    Ok(out)
}

fn parse_number(s: &str, line: usize, col: usize) -> Result<Rational, ParseError> {
    let bad = || err(line, col, ParseErrorKind::MalformedRational(s.to_string()));
    let mut parts = s.split('/');
    let num = parts.next().unwrap_or("");
    let den = parts.next();
    if parts.next().is_some() || num.is_empty() || !num.bytes().all(|b| b.is_ascii_digit()) {
        return bad();
    }
    let n: BigInt = num.parse().unwrap();
    match den {
        None => Ok(Rational::from_integer(n)),
        Some(d) if !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()) => {
            let d: BigInt = d.parse().unwrap();
            if d.is_zero() {
                bad()
            } else {
                Ok(Rational::new(n, d))
            }
        }
        Some(_) => bad(),
    }
}

/// `Σ terms + constant` over `(x, x')`.
struct Linear {
    coeffs: Vector,
    constant: Rational,
}

struct ExprParser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    names: &'a [String],
    line: usize,
    in_guard: bool,
    end_col: usize,
}

impl ExprParser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.1)
    }

    fn fail<T>(&self, kind: ParseErrorKind) -> Result<T, ParseError> {
        err(self.line, self.col(), kind)
    }

    fn unexpected<T>(&self) -> Result<T, ParseError> {
        match self.toks.get(self.pos) {
            None => self.fail(ParseErrorKind::UnexpectedEnd),
            Some((t, _)) => self.fail(ParseErrorKind::Unexpected(tok_text(t))),
        }
    }

    fn variable(&self, name: &str, primed: bool) -> Result<usize, ParseError> {
        let Some(idx) = self.names.iter().position(|n| n == name) else {
            return self.fail(ParseErrorKind::UndeclaredVariable(name.to_string()));
        };
        if primed && self.in_guard {
            return self.fail(ParseErrorKind::PrimedInGuard(name.to_string()));
        }
        Ok(if primed { self.names.len() + idx } else { idx })
    }

    /// Parses terms until a relation or the end of the line.
    fn expr(&mut self) -> Result<Linear, ParseError> {
        let n = self.names.len();
        let mut out = Linear {
            coeffs: vec![Rational::zero(); 2 * n],
            constant: Rational::zero(),
        };
        let mut first = true;
        loop {
            let mut sign = Rational::one();
            let mut saw_sign = false;
            while let Some(t @ (Tok::Plus | Tok::Minus)) = self.peek() {
                if *t == Tok::Minus {
                    sign = -sign;
                }
                saw_sign = true;
                self.pos += 1;
            }
            if !first && !saw_sign {
                return match self.peek() {
                    None | Some(Tok::Rel(_)) => Ok(out),
                    Some(Tok::Ident(..)) | Some(Tok::Star) => self.fail(ParseErrorKind::NonLinear),
                    _ => self.unexpected(),
                };
            }
            first = false;
            let (coef, var) = self.term()?;
            let value = sign * coef;
            match var {
                Some(v) => out.coeffs[v] += value,
                None => out.constant += value,
            }
        }
    }

    /// `coef`, `coef var`, `coef * var`, `var`, or `var * coef`.
    fn term(&mut self) -> Result<(Rational, Option<usize>), ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(s)) => {
                let coef = parse_number(&s, self.line, self.col())?;
                self.pos += 1;
                let starred = self.peek() == Some(&Tok::Star);
                if starred {
                    self.pos += 1;
                }
                match self.peek().cloned() {
                    Some(Tok::Ident(name, primed)) => {
                        let v = self.variable(&name, primed)?;
                        self.pos += 1;
                        self.reject_product()?;
                        Ok((coef, Some(v)))
                    }
                    Some(Tok::Num(_)) if starred => self.fail(ParseErrorKind::NonLinear),
                    _ if starred => self.unexpected(),
                    _ => Ok((coef, None)),
                }
            }
            Some(Tok::Ident(name, primed)) => {
                let v = self.variable(&name, primed)?;
                self.pos += 1;
                if self.peek() == Some(&Tok::Star) {
                    self.pos += 1;
                    return match self.peek().cloned() {
                        Some(Tok::Num(s)) => {
                            let coef = parse_number(&s, self.line, self.col())?;
                            self.pos += 1;
                            self.reject_product()?;
                            Ok((coef, Some(v)))
                        }
                        Some(Tok::Ident(..)) => self.fail(ParseErrorKind::NonLinear),
                        _ => self.unexpected(),
                    };
                }
                self.reject_product()?;
                Ok((Rational::one(), Some(v)))
            }
            _ => self.unexpected(),
        }
    }

    fn reject_product(&self) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Star) | Some(Tok::Ident(..)) => self.fail(ParseErrorKind::NonLinear),
            Some(Tok::Other(s)) if s == "^" || s == "(" => self.fail(ParseErrorKind::NonLinear),
            _ => Ok(()),
        }
    }
}

fn tok_text(t: &Tok) -> String {
    match t {
        Tok::Num(s) | Tok::Rel(s) | Tok::Other(s) => s.clone(),
        Tok::Ident(s, p) => format!("{s}{}", if *p { "'" } else { "" }),
        Tok::Plus => "+".into(),
        Tok::Minus => "-".into(),
        Tok::Star => "*".into(),
    }
}

fn parse_constraint(
    text: &str,
    offset: usize,
    line: usize,
    names: &[String],
    in_guard: bool,
) -> Result<LoopRow, ParseError> {
    let toks = lex(text, line, offset)?;
    let rels: Vec<usize> = (0..toks.len()).filter(|&i| matches!(toks[i].0, Tok::Rel(_))).collect();
    if rels.len() != 1 {
        let col = rels.get(1).map_or(offset + 1, |&i| toks[i].1);
        return err(line, col, ParseErrorKind::Relation);
    }
    let r = rels[0];
    let end_col = offset + text.chars().count() + 1;
    let mut lhs_p = ExprParser {
        toks: &toks[..r],
        pos: 0,
        names,
        line,
        in_guard,
        end_col: toks[r].1,
    };
    let lhs = lhs_p.expr()?;
    if lhs_p.pos != r {
        return lhs_p.unexpected();
    }
    let mut rhs_p = ExprParser {
        toks: &toks[r + 1..],
        pos: 0,
        names,
        line,
        in_guard,
        end_col,
    };
    let rhs = rhs_p.expr()?;
    if rhs_p.pos != toks.len() - r - 1 {
        return rhs_p.unexpected();
    }
    let Tok::Rel(op) = &toks[r].0 else { unreachable!() };
    // lhs - rhs (op) 0, stored as coeffs (op) -constant
    let mut coeffs: Vector = lhs.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect();
    let mut constant = lhs.constant - rhs.constant;
    let rel = match op.as_str() {
        ">=" => {
            coeffs.iter_mut().for_each(|c| *c = -c.clone());
            constant = -constant;
            RowRel::Le
        }
        "<=" => RowRel::Le,
        _ => RowRel::Eq,
    };
    let n = names.len();
    let xp = coeffs.split_off(n);
    Ok(LoopRow::update(coeffs, xp, rel, -constant))
}

#[derive(Clone, Copy, PartialEq)]
enum Block {
    None,
    Guard,
    Update,
}

fn valid_name(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_alphabetic() || c == '_') && cs.all(|c| c.is_alphanumeric() || c == '_')
}

pub fn parse_loop(text: &str) -> Result<LoopFile, ParseError> {
    let mut names: Option<Vec<String>> = None;
    let mut guard = Vec::new();
    let mut update = Vec::new();
    let mut block = Block::None;
    let (mut mode, mut depth_bound, mut max_iters) = (None, None, None);

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap();
        let trimmed = content.trim_start();
        if trimmed.trim().is_empty() {
            continue;
        }
        let indent = content.chars().count() - trimmed.chars().count();

        let head = trimmed.split(':').next().unwrap().trim();
        let is_header = trimmed.contains(':') && head.chars().all(|c| c.is_ascii_lowercase() || c == '-') && !head.is_empty();
        if is_header {
            let colon = trimmed.find(':').unwrap();
            let rest = &trimmed[colon + 1..];
            let rest_offset = indent + trimmed[..colon + 1].chars().count();
            let value = rest.trim();
            let value_col = rest_offset + (rest.chars().count() - rest.trim_start().chars().count()) + 1;
            match head {
                "vars" => {
                    if names.is_some() {
                        return err(line, indent + 1, ParseErrorKind::DuplicateVars);
                    }
                    let list: Vec<String> = value
                        .split(|c: char| c.is_whitespace() || c == ',')
                        .filter(|s| !s.is_empty())
                        .map(str::to_string)
                        .collect();
                    if let Some(bad) = list.iter().find(|s| !valid_name(s)) {
                        return err(line, value_col, ParseErrorKind::BadName(bad.clone()));
                    }
                    names = Some(list);
                    block = Block::None;
                }
                "guard" | "update" => {
                    block = if head == "guard" { Block::Guard } else { Block::Update };
                    if !value.is_empty() {
                        let Some(ns) = names.as_deref() else {
                            return err(line, indent + 1, ParseErrorKind::MissingVars);
                        };
                        let row = parse_constraint(rest, rest_offset, line, ns, block == Block::Guard)?;
                        push_row(row, block, &mut guard, &mut update);
                    }
                }
                "mode" => {
                    let m = value
                        .parse::<Mode>()
                        .or_else(|_| err(line, value_col, ParseErrorKind::BadDirective(head.into(), value.into())))?;
                    mode = Some(m);
                    block = Block::None;
                }
                "depth-bound" | "max-iters" => {
                    let v = value
                        .parse::<usize>()
                        .or_else(|_| err(line, value_col, ParseErrorKind::BadDirective(head.into(), value.into())))?;
                    if head == "depth-bound" {
                        depth_bound = Some(v);
                    } else {
                        max_iters = Some(v);
                    }
                    block = Block::None;
                }
                _ => return err(line, indent + 1, ParseErrorKind::UnknownDirective(head.into())),
            }
            continue;
        }

        if block == Block::None {
            return err(line, indent + 1, ParseErrorKind::OutsideBlock);
        }
        let Some(ns) = names.as_deref() else {
            return err(line, indent + 1, ParseErrorKind::MissingVars);
        };
        let row = parse_constraint(trimmed, indent, line, ns, block == Block::Guard)?;
        push_row(row, block, &mut guard, &mut update);
    }

    let names = names.ok_or(ParseError {
        line: 1,
        column: 1,
        kind: ParseErrorKind::MissingVars,
    })?;
    let slc = SlcLoop::new(names, guard, update).map_err(|e| ParseError {
        line: 1,
        column: 1,
        kind: e.into(),
    })?;
    Ok(LoopFile {
        slc,
        mode,
        depth_bound,
        max_iters,
    })
}

fn push_row(row: LoopRow, block: Block, guard: &mut Vec<LoopRow>, update: &mut Vec<LoopRow>) {
    match block {
        Block::Guard => guard.push(LoopRow::guard(row.x, row.rel, row.rhs)),
        _ => update.push(row),
    }
}

fn write_row(out: &mut String, row: &LoopRow, names: &[String]) -> fmt::Result {
    let all: Vec<String> = names
        .iter()
        .cloned()
        .chain(names.iter().map(|s| format!("{s}'")))
        .collect();
    let coeffs: Vector = row.x.iter().chain(&row.xp).cloned().collect();
    write_linear(out, &coeffs, &all, None)?;
    write!(out, " {} {}", row.rel.symbol(), fmt_rational(&row.rhs))
}

/// Serializes in the format accepted by [`parse_loop`].
pub fn to_slc_string(file: &LoopFile) -> String {
    let l = &file.slc;
    let mut out = String::new();
    let _ = writeln!(out, "vars: {}", l.names().join(" "));
    if let Some(m) = file.mode {
        let _ = writeln!(out, "mode: {}", m.as_str());
    }
    if let Some(d) = file.depth_bound {
        let _ = writeln!(out, "depth-bound: {d}");
    }
    if let Some(m) = file.max_iters {
        let _ = writeln!(out, "max-iters: {m}");
    }
    for (title, rows) in [("guard", l.guard()), ("update", l.update())] {
        let _ = writeln!(out, "{title}:");
        for r in rows {
            out.push_str("  ");
            let _ = write_row(&mut out, r, l.names());
            out.push('\n');
        }
    }
    out
}

/// Human-readable constraint, e.g. `x1 + x3 >= 0` printed as `-x1 - x3 <= 0`.
pub fn format_row(row: &LoopRow, names: &[String]) -> String {
    let mut s = String::new();
    let _ = write_row(&mut s, row, names);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rat, ratio, rvec};

    const LOOP1: &str = "\
# three phases
vars: x1 x2 x3
guard:
  x1 >= -x3
update:
  x1' = x1 + x2
  x2' = x2 + x3
  x3' = x3 - 1
";

    #[test]
    fn parses_a_loop() {
        let f = parse_loop(LOOP1).unwrap();
        let l = &f.slc;
        assert_eq!(l.n(), 3);
        assert_eq!(l.guard()[0].x, rvec(&[-1, 0, -1]));
        assert_eq!(l.guard()[0].rhs, rat(0));
        assert_eq!(l.update()[2], LoopRow::update(rvec(&[0, 0, -1]), rvec(&[0, 0, 1]), RowRel::Eq, rat(-1)));
        assert_eq!(f.mode, None);
    }

    #[test]
    fn rational_coefficients() {
        let f = parse_loop("vars: x\nguard: x >= 2\nupdate: x' = 3/2*x\n").unwrap();
        assert_eq!(f.slc.update()[0].x, vec![ratio(-3, 2)]);
        let g = parse_loop("vars: x\nupdate:\n  2x' = 3 x\n").unwrap();
        assert_eq!(g.slc.update()[0].xp, rvec(&[2]));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_loop("vars: x\nguard:\n  x' >= 0\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 3));
        assert!(matches!(e.kind, ParseErrorKind::PrimedInGuard(_)));
        assert_eq!(e.to_string(), "line 3, column 3: primed variable in guard: `x'`");

        let e = parse_loop("vars: x\nguard:\n  x + y >= 0\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 7));
        assert_eq!(e.kind, ParseErrorKind::UndeclaredVariable("y".into()));

        let e = parse_loop("vars: x y\nupdate:\n  x' = x*y\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::NonLinear);

        let e = parse_loop("vars: x\nupdate:\n  x' = 1/0*x\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::MalformedRational("1/0".into()));
        assert_eq!(e.column, 8);

        let e = parse_loop("vars: x\nguard:\n  x > 0\n").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::StrictRelation(_)));

        assert!(parse_loop("guard:\n  x >= 0\n").is_err());
        assert!(parse_loop("vars: x\n  x >= 0\n").is_err());
    }

    #[test]
    fn directives() {
        let f = parse_loop("vars: x\nmode: integer\ndepth-bound: 25\nmax-iters: 30\nguard: x >= 0\n").unwrap();
        assert_eq!(f.mode, Some(Mode::Integer));
        assert_eq!(f.depth_bound, Some(25));
        assert_eq!(f.max_iters, Some(30));
        assert!(parse_loop("vars: x\nmode: real\n").is_err());
    }

    #[test]
    fn round_trip() {
        let f = parse_loop(LOOP1).unwrap();
        let text = to_slc_string(&f);
        assert_eq!(parse_loop(&text).unwrap(), f);
        assert!(text.contains("-x1 - x3 <= 0"));
    }
}
