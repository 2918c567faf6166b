//! Text forms of expressions, equations, and literals.
//!
//! One tokenizer feeds three expression dialects that differ only in their
//! leaf calls: concrete measures (`LengthOfLine(AB)`), pattern measures
//! over theorem variables (`LengthOfLine(?d?e)`), and coordinate templates
//! over slot letters (`x(A)`). Operator grammar is shared: `+ - * /`,
//! parentheses, `sqrt(..)`, unary minus, decimal and integer numerals
//! (read exactly, `0.5` is one half).

use num::BigRational;
use num::bigint::BigInt;

use super::entity::PointRef;
use super::expr::{Axis, Equation, Expr, PatMeasure, TplCoord};
use super::literal::Literal;
use super::measure::{MeasureKind, MeasureSymbol};
use super::registry::Registry;
use super::FormalError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Var(char),
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
    Equals,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(_) => "number".into(),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Var(c) => format!("`?{c}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Equals => "`=`".into(),
        }
    }
}

fn syntax(msg: impl Into<String>) -> FormalError {
    FormalError::Syntax {
        line: 0,
        msg: msg.into(),
    }
}

fn lex(input: &str) -> Result<Vec<Tok>, FormalError> {
    let mut toks = Vec::new();
    let bytes: Vec<char> = input.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            ' ' | '\t' => i += 1,
            '(' => {
                toks.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                toks.push(Tok::RParen);
                i += 1;
            }
            ',' => {
                toks.push(Tok::Comma);
                i += 1;
            }
            '+' => {
                toks.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                toks.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                toks.push(Tok::Star);
                i += 1;
            }
            '/' => {
                toks.push(Tok::Slash);
                i += 1;
            }
            '=' => {
                toks.push(Tok::Equals);
                i += 1;
            }
            '?' => {
                let v = bytes.get(i + 1).copied().ok_or_else(|| {
                    syntax("`?` must be followed by a variable letter")
                })?;
                if !v.is_ascii_lowercase() {
                    return Err(syntax(format!(
                        "variable `?{v}` must use a lowercase letter"
                    )));
                }
                toks.push(Tok::Var(v));
                i += 2;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let whole: String = bytes[start..i].iter().collect();
                let mut num = BigInt::parse_bytes(whole.as_bytes(), 10).unwrap();
                let mut den = BigInt::from(1);
                if i < bytes.len() && bytes[i] == '.' {
                    i += 1;
                    let fstart = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if i == fstart {
                        return Err(syntax("digits expected after decimal point"));
                    }
                    for d in &bytes[fstart..i] {
                        num = num * 10 + d.to_digit(10).unwrap();
                        den *= 10;
                    }
                }
                toks.push(Tok::Num(BigRational::new(num, den)));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                toks.push(Tok::Ident(bytes[start..i].iter().collect()));
            }
            other => {
                return Err(syntax(format!("unexpected character `{other}`")));
            }
        }
    }
    Ok(toks)
}

struct Cursor<'a> {
    toks: &'a [Tok],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(toks: &'a [Tok]) -> Self {
        Cursor { toks, pos: 0 }
    }
    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos)
    }
    fn next(&mut self) -> Option<&'a Tok> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }
    fn expect(&mut self, want: &Tok) -> Result<(), FormalError> {
        match self.next() {
            Some(t) if t == want => Ok(()),
            Some(t) => Err(syntax(format!(
                "expected {}, found {}",
                want.describe(),
                t.describe()
            ))),
            None => Err(syntax(format!(
                "expected {}, found end of input",
                want.describe()
            ))),
        }
    }
}

/// Parses a leaf call once the parser has consumed `name` and `(`; the
/// handler must consume through the closing `)`.
type LeafFn<'h, S> = dyn FnMut(&str, &mut Cursor) -> Result<Expr<S>, FormalError> + 'h;

fn parse_expr<S>(cur: &mut Cursor, leaf: &mut LeafFn<S>) -> Result<Expr<S>, FormalError> {
    let mut acc = parse_term(cur, leaf)?;
    loop {
        match cur.peek() {
            Some(Tok::Plus) => {
                cur.next();
                acc = Expr::add(acc, parse_term(cur, leaf)?);
            }
            Some(Tok::Minus) => {
                cur.next();
                acc = Expr::sub(acc, parse_term(cur, leaf)?);
            }
            _ => return Ok(acc),
        }
    }
}

fn parse_term<S>(cur: &mut Cursor, leaf: &mut LeafFn<S>) -> Result<Expr<S>, FormalError> {
    let mut acc = parse_factor(cur, leaf)?;
    loop {
        match cur.peek() {
            Some(Tok::Star) => {
                cur.next();
                acc = Expr::mul(acc, parse_factor(cur, leaf)?);
            }
            Some(Tok::Slash) => {
                cur.next();
                acc = Expr::div(acc, parse_factor(cur, leaf)?);
            }
            _ => return Ok(acc),
        }
    }
}

fn parse_factor<S>(cur: &mut Cursor, leaf: &mut LeafFn<S>) -> Result<Expr<S>, FormalError> {
    match cur.peek() {
        Some(Tok::Minus) => {
            cur.next();
            // A negated number literal must stay a number, or printing and
            // reparsing "-1" would not land on the same expression.
            match parse_factor(cur, leaf)? {
                Expr::Num(n) => Ok(Expr::Num(-n)),
                inner => Ok(Expr::sub(Expr::num_int(0), inner)),
            }
        }
        _ => parse_primary(cur, leaf),
    }
}

fn parse_primary<S>(cur: &mut Cursor, leaf: &mut LeafFn<S>) -> Result<Expr<S>, FormalError> {
    match cur.next() {
        Some(Tok::Num(n)) => Ok(Expr::Num(n.clone())),
        Some(Tok::LParen) => {
            let inner = parse_expr(cur, leaf)?;
            cur.expect(&Tok::RParen)?;
            Ok(inner)
        }
        Some(Tok::Ident(name)) => {
            cur.expect(&Tok::LParen)?;
            if name == "sqrt" {
                let inner = parse_expr(cur, leaf)?;
                cur.expect(&Tok::RParen)?;
                Ok(Expr::sqrt(inner))
            } else {
                leaf(name, cur)
            }
        }
        Some(t) => Err(syntax(format!("expected an operand, found {}", t.describe()))),
        None => Err(syntax("expected an operand, found end of input")),
    }
}

fn parse_all<S>(toks: &[Tok], leaf: &mut LeafFn<S>) -> Result<Expr<S>, FormalError> {
    let mut cur = Cursor::new(toks);
    let expr = parse_expr(&mut cur, leaf)?;
    if let Some(t) = cur.peek() {
        return Err(syntax(format!("unexpected trailing {}", t.describe())));
    }
    Ok(expr)
}

fn split_equation(toks: &[Tok]) -> Result<(&[Tok], &[Tok]), FormalError> {
    let mut at = None;
    for (i, t) in toks.iter().enumerate() {
        if *t == Tok::Equals {
            if at.is_some() {
                return Err(syntax("more than one `=` in equation"));
            }
            at = Some(i);
        }
    }
    let i = at.ok_or_else(|| syntax("equation must contain `=`"))?;
    Ok((&toks[..i], &toks[i + 1..]))
}

fn measure_leaf(name: &str, cur: &mut Cursor) -> Result<Expr<MeasureSymbol>, FormalError> {
    let kind = MeasureKind::from_name(name)
        .ok_or_else(|| FormalError::UnknownPredicate(name.to_owned()))?;
    let pts = match cur.next() {
        Some(Tok::Ident(run)) => PointRef::tokenize(run)?,
        other => {
            return Err(syntax(format!(
                "`{name}` expects point names, found {}",
                other.map_or("end of input".into(), |t| t.describe())
            )))
        }
    };
    cur.expect(&Tok::RParen)?;
    Ok(Expr::Sym(MeasureSymbol::new(kind, &pts)?))
}

fn pattern_leaf(name: &str, cur: &mut Cursor) -> Result<Expr<PatMeasure>, FormalError> {
    let kind = MeasureKind::from_name(name)
        .ok_or_else(|| FormalError::UnknownPredicate(name.to_owned()))?;
    let mut vars = Vec::new();
    while let Some(Tok::Var(v)) = cur.peek() {
        vars.push(*v);
        cur.next();
    }
    if vars.is_empty() {
        return Err(syntax(format!("`{name}` expects `?x` variables here")));
    }
    cur.expect(&Tok::RParen)?;
    let kind_arity = kind.entity_kind().arity();
    if let Some(n) = kind_arity {
        if vars.len() != n {
            return Err(FormalError::ArityMismatch {
                pred: name.to_owned(),
                expected: n,
                got: vars.len(),
            });
        }
    } else if vars.len() < 3 {
        return Err(syntax(format!("`{name}` needs at least three vertices")));
    }
    Ok(Expr::Sym(PatMeasure { kind, vars }))
}

fn coord_leaf(name: &str, cur: &mut Cursor) -> Result<Expr<TplCoord>, FormalError> {
    let axis = match name {
        "x" => Axis::X,
        "y" => Axis::Y,
        _ => return Err(FormalError::UnknownPredicate(name.to_owned())),
    };
    let letter = match cur.next() {
        Some(Tok::Ident(s)) if s.len() == 1 => s.chars().next().unwrap(),
        other => {
            return Err(syntax(format!(
                "`{name}(..)` expects a single slot letter, found {}",
                other.map_or("end of input".into(), |t| t.describe())
            )))
        }
    };
    cur.expect(&Tok::RParen)?;
    Ok(Expr::Sym(TplCoord { letter, axis }))
}

/// Parses an arithmetic expression over concrete measures,
/// e.g. `LengthOfLine(BC)/2 + 1`.
pub fn parse_expression(text: &str) -> Result<Expr<MeasureSymbol>, FormalError> {
    let toks = lex(text)?;
    parse_all(&toks, &mut measure_leaf)
}

/// Parses `lhs = rhs` over concrete measures.
pub fn parse_equation(text: &str) -> Result<Equation<MeasureSymbol>, FormalError> {
    let toks = lex(text)?;
    let (l, r) = split_equation(&toks)?;
    Ok(Equation::new(
        parse_all(l, &mut measure_leaf)?,
        parse_all(r, &mut measure_leaf)?,
    ))
}

/// Parses `lhs = rhs` over pattern measures with `?x` variables,
/// e.g. `LengthOfLine(?d?e) = LengthOfLine(?b?c)/2`.
pub fn parse_pattern_equation(text: &str) -> Result<Equation<PatMeasure>, FormalError> {
    let toks = lex(text)?;
    let (l, r) = split_equation(&toks)?;
    Ok(Equation::new(
        parse_all(l, &mut pattern_leaf)?,
        parse_all(r, &mut pattern_leaf)?,
    ))
}

/// Parses `lhs = rhs` over slot-letter coordinates,
/// e.g. `2*x(M) = x(A) + x(B)`.
pub fn parse_coord_equation(text: &str) -> Result<Equation<TplCoord>, FormalError> {
    let toks = lex(text)?;
    let (l, r) = split_equation(&toks)?;
    Ok(Equation::new(
        parse_all(l, &mut coord_leaf)?,
        parse_all(r, &mut coord_leaf)?,
    ))
}

/// Parses a concrete literal such as `IsMidpointOfLine(M,AB)`. One
/// comma-separated chunk per slot, each a run of point names.
pub fn parse_literal(registry: &Registry, text: &str) -> Result<Literal, FormalError> {
    let (name, groups) = call_groups(text)?;
    let mut args = Vec::with_capacity(groups.len());
    for g in groups {
        match g.as_slice() {
            [Tok::Ident(run)] => args.push(PointRef::tokenize(run)?),
            _ => {
                return Err(syntax(format!(
                    "`{name}` arguments must be runs of point names"
                )))
            }
        }
    }
    Literal::new(registry, &name, args)
}

/// Parses a literal pattern over `?x` variables, e.g.
/// `IsMidpointOfLine(?d,?a?b)`. Returns the predicate name and one
/// variable group per slot; the caller validates against the registry.
pub fn parse_var_literal(text: &str) -> Result<(String, Vec<Vec<char>>), FormalError> {
    let (name, groups) = call_groups(text)?;
    let mut args = Vec::with_capacity(groups.len());
    for g in groups {
        let mut vars = Vec::new();
        for t in &g {
            match t {
                Tok::Var(v) => vars.push(*v),
                other => {
                    return Err(syntax(format!(
                        "`{name}` pattern arguments must be `?x` variables, found {}",
                        other.describe()
                    )))
                }
            }
        }
        if vars.is_empty() {
            return Err(syntax(format!("empty argument in `{name}` pattern")));
        }
        args.push(vars);
    }
    Ok((name, args))
}

/// Parses a template literal over declaration letters, e.g. `Line(AB)` or
/// `IsMidpointOfLine(D,BC)`. Returns the predicate name and one letter
/// group per slot.
pub(super) fn parse_letter_literal(text: &str) -> Result<(String, Vec<Vec<char>>), FormalError> {
    let (name, groups) = call_groups(text)?;
    let mut args = Vec::with_capacity(groups.len());
    for g in groups {
        match g.as_slice() {
            [Tok::Ident(run)] if run.chars().all(|c| c.is_ascii_uppercase()) => {
                args.push(run.chars().collect());
            }
            _ => {
                return Err(syntax(format!(
                    "`{name}` template arguments must be runs of uppercase letters"
                )))
            }
        }
    }
    Ok((name, args))
}

/// Splits `Name(a,b,c)` into the name and comma-separated token groups.
fn call_groups(text: &str) -> Result<(String, Vec<Vec<Tok>>), FormalError> {
    let toks = lex(text)?;
    let mut cur = Cursor::new(&toks);
    let name = match cur.next() {
        Some(Tok::Ident(s)) => s.clone(),
        other => {
            return Err(syntax(format!(
                "expected a predicate name, found {}",
                other.map_or("end of input".into(), |t| t.describe())
            )))
        }
    };
    cur.expect(&Tok::LParen)?;
    let mut groups = vec![Vec::new()];
    loop {
        match cur.next() {
            Some(Tok::RParen) => break,
            Some(Tok::Comma) => groups.push(Vec::new()),
            Some(t) => groups.last_mut().unwrap().push(t.clone()),
            None => return Err(syntax("unterminated argument list")),
        }
    }
    if let Some(t) = cur.peek() {
        return Err(syntax(format!("unexpected trailing {}", t.describe())));
    }
    if groups.len() == 1 && groups[0].is_empty() {
        groups.clear();
    }
    Ok((name, groups))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_decimals_exactly() {
        let toks = lex("0.25 + 3").unwrap();
        assert_eq!(
            toks[0],
            Tok::Num(BigRational::new(BigInt::from(25), BigInt::from(100)))
        );
    }

    #[test]
    fn parses_measure_expression() {
        let e = parse_expression("LengthOfLine(BC)/2").unwrap();
        assert_eq!(e.to_string(), "LengthOfLine(BC)/2");
        let e = parse_expression("MeasureOfAngle(ABC) + 2*MeasureOfAngle(CBA)").unwrap();
        // Angle symbols canonicalize endpoint order.
        assert_eq!(
            e.to_string(),
            "MeasureOfAngle(ABC) + 2*MeasureOfAngle(ABC)"
        );
    }

    #[test]
    fn parses_equation_and_precedence() {
        let eq = parse_equation("LengthOfLine(AB) = 1 + 2*3").unwrap();
        assert_eq!(eq.rhs.eval_f64(&|_| None).unwrap(), 7.0);
        let eq = parse_equation("LengthOfLine(AB) = (1 + 2)*3").unwrap();
        assert_eq!(eq.rhs.eval_f64(&|_| None).unwrap(), 9.0);
    }

    #[test]
    fn parses_unary_minus_and_sqrt() {
        let eq = parse_equation("LengthOfLine(AB) = -2 + sqrt(9)").unwrap();
        assert_eq!(eq.rhs.eval_f64(&|_| None).unwrap(), 1.0);
    }

    #[test]
    fn rejects_double_equals_and_trailing() {
        assert!(parse_equation("LengthOfLine(AB) = 1 = 2").is_err());
        assert!(parse_expression("1 + 2)").is_err());
        assert!(parse_expression("LengthOfLine(AB").is_err());
    }

    #[test]
    fn parses_pattern_equation() {
        let eq = parse_pattern_equation("LengthOfLine(?d?e) = LengthOfLine(?b?c)/2").unwrap();
        assert_eq!(eq.to_string(), "LengthOfLine(?d?e) = LengthOfLine(?b?c)/2");
        assert!(parse_pattern_equation("LengthOfLine(?a) = 1").is_err());
    }

    #[test]
    fn parses_coord_equation() {
        let eq = parse_coord_equation("2*x(M) = x(A) + x(B)").unwrap();
        assert_eq!(eq.to_string(), "2*x(M) = x(A) + x(B)");
        assert!(parse_coord_equation("z(M) = 0").is_err());
    }

    #[test]
    fn parses_var_literal() {
        let (name, args) = parse_var_literal("IsMidpointOfLine(?d,?a?b)").unwrap();
        assert_eq!(name, "IsMidpointOfLine");
        assert_eq!(args, vec![vec!['d'], vec!['a', 'b']]);
    }

    #[test]
    fn measure_polygon_needs_three_vertices() {
        assert!(parse_expression("AreaOfPolygon(AB)").is_err());
        assert!(parse_expression("AreaOfPolygon(ABC)").is_ok());
    }
}
