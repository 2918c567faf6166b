//! Compact measure notation for question and solution text.
//!
//! Formal facts print as `LengthOfLine(DE) = LengthOfLine(BC)/2`; readers
//! expect `DE = BC/2`. This module renders measures, expressions, and
//! equations in that short form and parses the short form back, so every
//! sentence built from it can be checked by reversing it. Lengths are bare
//! point pairs (`AB`), angles are `angle ABC`, polygon measures spell
//! themselves out (`area of ABCD`). Point names are one uppercase letter
//! plus an optional digit, which keeps concatenated runs unambiguous.

use std::fmt;

use num::BigRational;

use crate::formal::{
    Equation, Expr, FormalError, MeasureKind, MeasureSymbol, PointRef,
};

#[derive(Debug, thiserror::Error)]
pub enum NotationError {
    #[error("unexpected character `{0}`")]
    BadChar(char),
    #[error("unexpected `{0}`")]
    Unexpected(String),
    #[error("text ended mid-expression")]
    Eof,
    #[error("`{0}` does not name a measure")]
    BadMeasure(String),
    #[error("expected `{expected}`, found `{found}`")]
    Expected { expected: String, found: String },
    #[error(transparent)]
    Formal(#[from] FormalError),
}

/// Raw pre-rendered symbol text; exists so `Expr`'s precedence-aware
/// printer can be reused for short forms.
struct Shown(String);

impl fmt::Display for Shown {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn run(points: &[PointRef]) -> String {
    points.iter().map(|p| p.name()).collect()
}

pub fn measure_text(sym: &MeasureSymbol) -> String {
    let points = sym.points();
    match sym.kind() {
        MeasureKind::Length => run(&points),
        MeasureKind::Angle => format!("angle {}", run(&points)),
        MeasureKind::Area => format!("area of {}", run(&points)),
        MeasureKind::Perimeter => format!("perimeter of {}", run(&points)),
    }
}

pub fn expr_text(expr: &Expr<MeasureSymbol>) -> String {
    expr.map_sym(&mut |s| Expr::Sym(Shown(measure_text(s))))
        .to_string()
}

pub fn equation_text(eq: &Equation<MeasureSymbol>) -> String {
    format!("{} = {}", expr_text(&eq.lhs), expr_text(&eq.rhs))
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(BigRational),
    Points(Vec<PointRef>),
    Word(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Equals,
}

fn lex(text: &str) -> Result<Vec<Token>, NotationError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '/' => {
                out.push(Token::Slash);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            '=' => {
                out.push(Token::Equals);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let digits = &text[start..i];
                let n: num::BigInt = digits.parse().expect("ascii digits");
                out.push(Token::Num(BigRational::from_integer(n)));
            }
            'A'..='Z' => {
                // A run of point names: uppercase letter, optional digit.
                let start = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_uppercase() {
                    i += 1;
                    if i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                out.push(Token::Points(PointRef::tokenize(&text[start..i])?));
            }
            'a'..='z' => {
                let start = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_lowercase() {
                    i += 1;
                }
                out.push(Token::Word(text[start..i].to_string()));
            }
            other => return Err(NotationError::BadChar(other)),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Result<Token, NotationError> {
        let tok = self.tokens.get(self.pos).cloned().ok_or(NotationError::Eof)?;
        self.pos += 1;
        Ok(tok)
    }

    fn expect(&mut self, want: &Token, desc: &str) -> Result<(), NotationError> {
        let tok = self.next()?;
        if &tok == want {
            Ok(())
        } else {
            Err(NotationError::Expected {
                expected: desc.to_string(),
                found: format!("{tok:?}"),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr<MeasureSymbol>, NotationError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    acc = Expr::add(acc, self.term()?);
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    acc = Expr::sub(acc, self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr<MeasureSymbol>, NotationError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    acc = Expr::mul(acc, self.factor()?);
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    acc = Expr::div(acc, self.factor()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr<MeasureSymbol>, NotationError> {
        match self.next()? {
            Token::Num(n) => Ok(Expr::Num(n)),
            Token::Minus => match self.factor()? {
                Expr::Num(n) => Ok(Expr::Num(-n)),
                other => Ok(Expr::sub(Expr::num_int(0), other)),
            },
            Token::LParen => {
                let inner = self.expr()?;
                self.expect(&Token::RParen, ")")?;
                Ok(inner)
            }
            Token::Word(word) => self.keyword(&word),
            Token::Points(points) => {
                if points.len() == 2 {
                    Ok(Expr::Sym(MeasureSymbol::new(MeasureKind::Length, &points)?))
                } else {
                    Err(NotationError::BadMeasure(run(&points)))
                }
            }
            other => Err(NotationError::Unexpected(format!("{other:?}"))),
        }
    }

    fn keyword(&mut self, word: &str) -> Result<Expr<MeasureSymbol>, NotationError> {
        match word {
            "sqrt" => {
                self.expect(&Token::LParen, "(")?;
                let inner = self.expr()?;
                self.expect(&Token::RParen, ")")?;
                Ok(Expr::sqrt(inner))
            }
            "angle" => {
                let points = self.points()?;
                Ok(Expr::Sym(MeasureSymbol::new(MeasureKind::Angle, &points)?))
            }
            "area" => {
                self.word("of")?;
                let points = self.points()?;
                Ok(Expr::Sym(MeasureSymbol::new(MeasureKind::Area, &points)?))
            }
            "perimeter" => {
                self.word("of")?;
                let points = self.points()?;
                Ok(Expr::Sym(MeasureSymbol::new(
                    MeasureKind::Perimeter,
                    &points,
                )?))
            }
            other => Err(NotationError::BadMeasure(other.to_string())),
        }
    }

    fn word(&mut self, want: &str) -> Result<(), NotationError> {
        match self.next()? {
            Token::Word(w) if w == want => Ok(()),
            other => Err(NotationError::Expected {
                expected: want.to_string(),
                found: format!("{other:?}"),
            }),
        }
    }

    fn points(&mut self) -> Result<Vec<PointRef>, NotationError> {
        match self.next()? {
            Token::Points(points) => Ok(points),
            other => Err(NotationError::Expected {
                expected: "point names".to_string(),
                found: format!("{other:?}"),
            }),
        }
    }
}

pub fn parse_expr_text(text: &str) -> Result<Expr<MeasureSymbol>, NotationError> {
    let mut parser = Parser {
        tokens: lex(text)?,
        pos: 0,
    };
    let expr = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(NotationError::Unexpected(format!(
            "{:?}",
            parser.tokens[parser.pos]
        )));
    }
    Ok(expr)
}

pub fn parse_equation_text(text: &str) -> Result<Equation<MeasureSymbol>, NotationError> {
    let mut parser = Parser {
        tokens: lex(text)?,
        pos: 0,
    };
    let lhs = parser.expr()?;
    parser.expect(&Token::Equals, "=")?;
    let rhs = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(NotationError::Unexpected(format!(
            "{:?}",
            parser.tokens[parser.pos]
        )));
    }
    Ok(Equation::new(lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal::parse_equation;

    fn roundtrip(formal: &str) {
        let eq = parse_equation(formal).unwrap().canonical();
        let short = equation_text(&eq);
        let back = parse_equation_text(&short).unwrap().canonical();
        assert_eq!(back, eq, "short form `{short}` did not round-trip");
    }

    #[test]
    fn every_measure_kind_renders_and_parses() {
        roundtrip("LengthOfLine(DE) = LengthOfLine(BC)/2");
        roundtrip("MeasureOfAngle(ABC) + MeasureOfAngle(BCA) + MeasureOfAngle(CAB) = 180");
        roundtrip("AreaOfPolygon(ABCD) = LengthOfLine(AB)*LengthOfLine(BC)");
        roundtrip("PerimeterOfPolygon(ABC) = LengthOfLine(AB) + LengthOfLine(BC) + LengthOfLine(CA)");
        roundtrip(
            "LengthOfLine(AB)*LengthOfLine(AB) + LengthOfLine(BC)*LengthOfLine(BC) = \
             LengthOfLine(AC)*LengthOfLine(AC)",
        );
    }

    #[test]
    fn short_forms_read_naturally() {
        let eq = parse_equation("LengthOfLine(DE) = LengthOfLine(BC)/2")
            .unwrap()
            .canonical();
        assert_eq!(equation_text(&eq), "DE = BC/2");
        let eq = parse_equation("MeasureOfAngle(ABC) = 90").unwrap();
        assert_eq!(equation_text(&eq.canonical()), "angle ABC = 90");
    }

    #[test]
    fn digit_suffixed_points_stay_whole() {
        let eq = parse_equation_text("A1B = 4").unwrap();
        assert_eq!(eq.to_string(), "LengthOfLine(A1B) = 4");
    }

    #[test]
    fn sqrt_and_rationals_survive() {
        roundtrip("LengthOfLine(AC) = sqrt(2)");
        let eq = parse_equation_text("AB = 3*sqrt(2) + 1/2").unwrap().canonical();
        let again = parse_equation_text(&equation_text(&eq)).unwrap().canonical();
        assert_eq!(eq, again);
    }

    #[test]
    fn garbage_is_rejected_not_guessed() {
        assert!(parse_equation_text("AB = ").is_err());
        assert!(parse_equation_text("ABC = 4").is_err());
        assert!(parse_equation_text("angle AB = 30").is_err());
        assert!(parse_equation_text("AB = 4 extra").is_err());
        assert!(parse_equation_text("hello world").is_err());
    }
}
