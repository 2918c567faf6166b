//! Parser for the rule-file syntax.
//!
//! The file is line oriented. `#` starts a comment, a trailing `\`
//! continues the logical line, and every logical line is one directive:
//!
//! ```text
//! predicate IsMidpointOfLine(M:point, AB:segment) kind=relation \
//!     sym=[(M,BA)] \
//!     requires=[Line(AB)] \
//!     constraints=[2*x(M) = x(A) + x(B); 2*y(M) = y(A) + y(B)] \
//!     constructs=[Collinear(A,M,B)]
//!
//! theorem 9 triangle_property_angle_sum: \
//!     premises=[Triangle(?a?b?c)] \
//!     conclusions=[MeasureOfAngle(?a?b?c) + MeasureOfAngle(?b?c?a) \
//!                  + MeasureOfAngle(?c?a?b) = 180]
//! ```
//!
//! Slot declarations are `LETTERS:kind` with an optional `:anchor` bind
//! mode; kinds are `point`, `segment`, `angle`, `polygon`, `circle`. List
//! attributes are bracketed and `;`-separated. Names must be declared
//! before they are referenced, so construct chains cannot form cycles.

use super::entity::EntityKind;
use super::parse;
use super::registry::{
    BindMode, PredicateKind, RawPredicate, RawTheorem, Registry, SlotDef, TplFact, TplLiteral,
    TplMeasure,
};
use super::FormalError;

pub(super) fn parse_registry(source: &str) -> Result<Registry, FormalError> {
    let mut registry = Registry::new();
    for (line, text) in logical_lines(source) {
        if let Some(rest) = text.strip_prefix("predicate ") {
            registry.add_predicate(parse_predicate(line, rest)?)?;
        } else if let Some(rest) = text.strip_prefix("theorem ") {
            registry.add_theorem(parse_theorem(line, rest)?)?;
        } else {
            return Err(FormalError::Syntax {
                line,
                msg: format!(
                    "expected `predicate` or `theorem`, found `{}`",
                    text.split_whitespace().next().unwrap_or("")
                ),
            });
        }
    }
    Ok(registry)
}

/// Joins continuation lines and strips comments; yields each logical line
/// with the physical line number it starts on.
fn logical_lines(source: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut acc = String::new();
    let mut start = 0;
    for (i, raw) in source.lines().enumerate() {
        let no_comment = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let trimmed = no_comment.trim();
        if trimmed.is_empty() && acc.is_empty() {
            continue;
        }
        if acc.is_empty() {
            start = i + 1;
        }
        if let Some(cont) = trimmed.strip_suffix('\\') {
            acc.push_str(cont.trim_end());
            acc.push(' ');
        } else {
            acc.push_str(trimmed);
            out.push((start, std::mem::take(&mut acc)));
        }
    }
    if !acc.is_empty() {
        out.push((start, acc));
    }
    out
}

/// Rewrites position-less parse errors onto the directive's line.
fn at(line: usize, e: FormalError) -> FormalError {
    match e {
        FormalError::Syntax { msg, .. } => FormalError::Syntax { line, msg },
        FormalError::DanglingReference { name, .. } => {
            FormalError::DanglingReference { line, name }
        }
        other => other,
    }
}

fn fail(line: usize, msg: impl Into<String>) -> FormalError {
    FormalError::Syntax {
        line,
        msg: msg.into(),
    }
}

fn parse_predicate(line: usize, rest: &str) -> Result<RawPredicate, FormalError> {
    let open = rest
        .find('(')
        .ok_or_else(|| fail(line, "predicate declaration needs a slot list"))?;
    let close = rest
        .find(')')
        .ok_or_else(|| fail(line, "unterminated slot list"))?;
    if close < open {
        return Err(fail(line, "malformed slot list"));
    }
    let name = rest[..open].trim().to_owned();
    if name.is_empty()
        || !name.chars().next().unwrap().is_ascii_uppercase()
        || !name.chars().all(|c| c.is_ascii_alphanumeric())
    {
        return Err(fail(line, format!("`{name}` is not a valid predicate name")));
    }
    let slots = parse_slots(line, &rest[open + 1..close])?;
    let attrs = scan_attrs(line, &rest[close + 1..])?;

    let mut kind = None;
    let mut samplable = true;
    let mut cross_distinct = true;
    let mut sym_entries = Vec::new();
    let mut constraints = Vec::new();
    let mut constructs = Vec::new();
    let mut companions = Vec::new();
    let mut requires = Vec::new();
    let mut givens = Vec::new();

    for (key, value) in attrs {
        match key.as_str() {
            "kind" => {
                kind = Some(match value.as_str() {
                    "entity" => PredicateKind::Entity,
                    "relation" => PredicateKind::Relation,
                    "measure" => PredicateKind::Measure,
                    other => return Err(fail(line, format!("unknown kind `{other}`"))),
                });
            }
            "sample" => match value.as_str() {
                "no" => samplable = false,
                "yes" => samplable = true,
                other => return Err(fail(line, format!("sample must be yes or no, got `{other}`"))),
            },
            "distinct" => match value.as_str() {
                "slots" => cross_distinct = false,
                "all" => cross_distinct = true,
                other => {
                    return Err(fail(line, format!("distinct must be all or slots, got `{other}`")))
                }
            },
            "sym" => {
                for entry in list_entries(line, &value)? {
                    sym_entries.push(parse_sym_entry(line, entry)?);
                }
            }
            "constraints" => {
                for entry in list_entries(line, &value)? {
                    constraints.push(parse::parse_coord_equation(entry).map_err(|e| at(line, e))?);
                }
            }
            "constructs" => {
                for entry in list_entries(line, &value)? {
                    constructs.push(letter_literal(line, entry)?);
                }
            }
            "companions" => {
                for entry in list_entries(line, &value)? {
                    companions.push(letter_literal(line, entry)?);
                }
            }
            "requires" => {
                for entry in list_entries(line, &value)? {
                    requires.push(letter_literal(line, entry)?);
                }
            }
            "givens" => {
                for entry in list_entries(line, &value)? {
                    givens.push(letter_measure(line, entry)?);
                }
            }
            other => return Err(fail(line, format!("unknown attribute `{other}`"))),
        }
    }

    let kind = kind.ok_or_else(|| fail(line, format!("`{name}` is missing kind=")))?;
    if kind == PredicateKind::Measure {
        samplable = false;
    }
    Ok(RawPredicate {
        name,
        kind,
        slots,
        samplable,
        cross_distinct,
        sym_entries,
        constraints,
        constructs,
        companions,
        requires,
        givens,
        line,
    })
}

fn parse_slots(line: usize, text: &str) -> Result<Vec<SlotDef>, FormalError> {
    let mut slots = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        let mut fields = part.split(':');
        let letters_text = fields.next().unwrap_or("").trim();
        let kind_word = fields
            .next()
            .ok_or_else(|| fail(line, format!("slot `{part}` is missing its kind")))?
            .trim();
        let bind = match fields.next().map(str::trim) {
            None => BindMode::Fresh,
            Some("anchor") => BindMode::Anchor,
            Some("fresh") => BindMode::Fresh,
            Some(other) => return Err(fail(line, format!("unknown bind mode `{other}`"))),
        };
        if fields.next().is_some() {
            return Err(fail(line, format!("slot `{part}` has too many fields")));
        }
        let letters: Vec<char> = letters_text.chars().collect();
        if letters.is_empty() {
            return Err(fail(line, "slot declares no letters"));
        }
        let kind = match kind_word {
            "point" => EntityKind::Point,
            "segment" => EntityKind::Segment,
            "angle" => EntityKind::Angle,
            "polygon" => EntityKind::Polygon(letters.len()),
            "circle" => EntityKind::Circle,
            other => return Err(fail(line, format!("unknown slot kind `{other}`"))),
        };
        slots.push(SlotDef {
            letters,
            kind,
            bind,
        });
    }
    Ok(slots)
}

/// Scans `key=value` pairs where a value is either a bare word or a
/// bracketed list that may contain spaces.
fn scan_attrs(line: usize, text: &str) -> Result<Vec<(String, String)>, FormalError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let key_start = i;
        while i < chars.len() && chars[i] != '=' && !chars[i].is_whitespace() {
            i += 1;
        }
        let key: String = chars[key_start..i].iter().collect();
        if i >= chars.len() || chars[i] != '=' {
            return Err(fail(line, format!("attribute `{key}` is missing `=`")));
        }
        i += 1;
        if i < chars.len() && chars[i] == '[' {
            let start = i;
            let mut depth = 0;
            loop {
                if i >= chars.len() {
                    return Err(fail(line, format!("unterminated list for `{key}`")));
                }
                match chars[i] {
                    '[' => depth += 1,
                    ']' => {
                        depth -= 1;
                        if depth == 0 {
                            i += 1;
                            break;
                        }
                    }
                    _ => {}
                }
                i += 1;
            }
            out.push((key, chars[start..i].iter().collect()));
        } else {
            let start = i;
            while i < chars.len() && !chars[i].is_whitespace() {
                i += 1;
            }
            if start == i {
                return Err(fail(line, format!("attribute `{key}` has no value")));
            }
            out.push((key, chars[start..i].iter().collect()));
        }
    }
    Ok(out)
}

/// Splits a bracketed `[a; b; c]` value into trimmed entries.
fn list_entries(line: usize, value: &str) -> Result<Vec<&str>, FormalError> {
    let inner = value
        .strip_prefix('[')
        .and_then(|v| v.strip_suffix(']'))
        .ok_or_else(|| fail(line, "expected a bracketed list"))?;
    Ok(inner
        .split(';')
        .map(str::trim)
        .filter(|e| !e.is_empty())
        .collect())
}

/// Parses a symmetry entry such as `(A,CB)` into slot-shaped letter groups.
fn parse_sym_entry(line: usize, entry: &str) -> Result<Vec<Vec<char>>, FormalError> {
    let inner = entry
        .strip_prefix('(')
        .and_then(|e| e.strip_suffix(')'))
        .ok_or_else(|| fail(line, format!("symmetry entry `{entry}` must be parenthesized")))?;
    let mut groups = Vec::new();
    for part in inner.split(',') {
        let letters: Vec<char> = part.trim().chars().collect();
        if letters.is_empty() || letters.iter().any(|c| !c.is_ascii_uppercase()) {
            return Err(fail(line, format!("bad symmetry entry `{entry}`")));
        }
        groups.push(letters);
    }
    Ok(groups)
}

fn letter_literal(line: usize, entry: &str) -> Result<TplLiteral, FormalError> {
    let (pred, args) = parse::parse_letter_literal(entry).map_err(|e| at(line, e))?;
    Ok(TplLiteral { pred, args })
}

fn letter_measure(line: usize, entry: &str) -> Result<TplMeasure, FormalError> {
    let (name, args) = parse::parse_letter_literal(entry).map_err(|e| at(line, e))?;
    let kind = super::measure::MeasureKind::from_name(&name)
        .ok_or_else(|| fail(line, format!("`{name}` is not a measure")))?;
    match args.as_slice() {
        [letters] => Ok(TplMeasure {
            kind,
            letters: letters.clone(),
        }),
        _ => Err(fail(line, format!("`{entry}` must have a single argument"))),
    }
}

fn parse_theorem(line: usize, rest: &str) -> Result<RawTheorem, FormalError> {
    let colon = rest
        .find(':')
        .ok_or_else(|| fail(line, "theorem header needs `id name:`"))?;
    let mut head = rest[..colon].split_whitespace();
    let id: u32 = head
        .next()
        .ok_or_else(|| fail(line, "theorem is missing its id"))?
        .parse()
        .map_err(|_| fail(line, "theorem id must be a positive integer"))?;
    let name = head
        .next()
        .ok_or_else(|| fail(line, "theorem is missing its name"))?
        .to_owned();
    if head.next().is_some() {
        return Err(fail(line, "unexpected text in theorem header"));
    }
    if !name
        .chars()
        .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
    {
        return Err(fail(line, format!("`{name}` is not a valid theorem name")));
    }

    let mut premises = None;
    let mut conclusions = None;
    for (key, value) in scan_attrs(line, &rest[colon + 1..])? {
        let facts = list_entries(line, &value)?
            .into_iter()
            .map(|entry| parse_fact(line, entry))
            .collect::<Result<Vec<_>, _>>()?;
        match key.as_str() {
            "premises" => premises = Some(facts),
            "conclusions" => conclusions = Some(facts),
            other => return Err(fail(line, format!("unknown attribute `{other}`"))),
        }
    }
    Ok(RawTheorem {
        id,
        name,
        premises: premises.ok_or_else(|| fail(line, "theorem is missing premises="))?,
        conclusions: conclusions.ok_or_else(|| fail(line, "theorem is missing conclusions="))?,
        line,
    })
}

/// A fact entry is an equation when it contains `=`, a literal pattern
/// otherwise.
fn parse_fact(line: usize, entry: &str) -> Result<TplFact, FormalError> {
    if entry.contains('=') {
        Ok(TplFact::Eq(
            parse::parse_pattern_equation(entry).map_err(|e| at(line, e))?,
        ))
    } else {
        let (pred, args) = parse::parse_var_literal(entry).map_err(|e| at(line, e))?;
        Ok(TplFact::Lit(TplLiteral { pred, args }))
    }
}
