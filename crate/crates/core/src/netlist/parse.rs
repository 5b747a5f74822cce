use std::collections::HashMap;

use super::error::{ErrorCode, NetlistError, Position};
use super::lexer::{parse_number, tokenize, Token, TokenKind};
use super::{Directive, DirectiveEntry, Element, ElementKind, ElementValue, NetlistDocument};
use crate::waveform::Waveform;

/// Parses netlist text. Stops at the first error.
pub fn parse_netlist(text: &str) -> Result<NetlistDocument, NetlistError> {
    let mut doc = NetlistDocument::default();
    let mut seen: HashMap<String, Position> = HashMap::new();
    let mut line_count = 0;

    for (idx, raw) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        line_count = line_no;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let tokens = tokenize(line, line_no)?;
        let Some(first) = tokens.first() else {
            continue;
        };
        if first.kind == TokenKind::Word && first.text.starts_with('.') {
            if let Some(d) = parse_directive(&tokens)? {
                doc.directives.push(d);
            }
            continue;
        }
        let element = parse_element(&tokens)?;
        let key = element.name.to_ascii_lowercase();
        if let Some(prev) = seen.get(&key) {
            return Err(NetlistError::new(
                ErrorCode::DuplicateName,
                element.position,
                format!(
                    "element name `{}` already used on line {}",
                    element.name, prev.line
                ),
            ));
        }
        seen.insert(key, element.position);
        doc.elements.push(element);
    }
    doc.end = Position::new(line_count.max(1), 1);
    Ok(doc)
}

fn malformed(pos: Position, msg: impl Into<String>) -> NetlistError {
    NetlistError::new(ErrorCode::MalformedParameters, pos, msg)
}

fn number(tok: &Token<'_>) -> Result<f64, NetlistError> {
    if tok.kind != TokenKind::Word {
        return Err(malformed(
            tok.pos,
            format!("expected a number, found `{}`", tok.text),
        ));
    }
    parse_number(tok.text)
        .ok_or_else(|| malformed(tok.pos, format!("`{}` is not a finite number", tok.text)))
}

fn parse_directive(tokens: &[Token<'_>]) -> Result<Option<DirectiveEntry>, NetlistError> {
    let head = &tokens[0];
    let args = &tokens[1..];
    let directive = match head.text.to_ascii_lowercase().as_str() {
        ".tran" => {
            if args.len() != 2 {
                return Err(malformed(head.pos, ".tran takes exactly `step stop`"));
            }
            Directive::Tran {
                step: number(&args[0])?,
                stop: number(&args[1])?,
            }
        }
        ".print" => {
            let mut names = Vec::new();
            for t in args {
                match t.kind {
                    TokenKind::Word => names.push(t.text.to_ascii_lowercase()),
                    TokenKind::Comma => {}
                    _ => {
                        return Err(malformed(
                            t.pos,
                            format!("unexpected `{}` in .print", t.text),
                        ))
                    }
                }
            }
            if names.is_empty() {
                return Err(malformed(head.pos, ".print needs at least one signal"));
            }
            Directive::Print(names)
        }
        ".end" => return Ok(None),
        _ => {
            return Err(NetlistError::new(
                ErrorCode::UnknownDirective,
                head.pos,
                format!("unknown directive `{}`", head.text),
            ))
        }
    };
    Ok(Some(DirectiveEntry {
        directive,
        position: head.pos,
    }))
}

/// One argument inside a model call.
enum Arg<'a> {
    Positional(Token<'a>),
    Keyword(Token<'a>, Token<'a>),
}

fn parse_element(tokens: &[Token<'_>]) -> Result<Element, NetlistError> {
    let name_tok = tokens[0];
    let pos = name_tok.pos;
    if name_tok.kind != TokenKind::Word
        || !name_tok.text.starts_with(|c: char| c.is_ascii_alphabetic())
    {
        return Err(malformed(
            pos,
            format!("expected an element name, found `{}`", name_tok.text),
        ));
    }
    let name = name_tok.text.to_string();
    let prefix = name.as_bytes()[0].to_ascii_uppercase();
    if !matches!(prefix, b'V' | b'R' | b'L' | b'C' | b'M') {
        return Err(NetlistError::new(
            ErrorCode::UnknownElementKind,
            pos,
            format!("unknown element kind for `{name}`"),
        ));
    }
    if tokens.len() < 4 {
        return Err(malformed(
            pos,
            format!("`{name}` needs two nodes and a value"),
        ));
    }
    for node in &tokens[1..3] {
        if node.kind != TokenKind::Word {
            return Err(malformed(
                node.pos,
                format!("expected a node name, found `{}`", node.text),
            ));
        }
    }
    let node_a = tokens[1].text.to_string();
    let node_b = tokens[2].text.to_string();
    let value_tok = tokens[3];
    let rest = &tokens[4..];

    let call = match rest.first() {
        Some(t) if t.kind == TokenKind::LParen => Some(parse_call(value_tok, rest)?),
        Some(t) => {
            return Err(malformed(
                t.pos,
                format!("unexpected `{}` after value", t.text),
            ))
        }
        None => None,
    };

    let (kind, value) = match (prefix, call) {
        (b'V', None) => (
            ElementKind::V,
            ElementValue::Source(Waveform::Dc(number(&value_tok)?)),
        ),
        (b'V', Some(args)) => (
            ElementKind::V,
            ElementValue::Source(parse_source(value_tok, &args)?),
        ),
        (b'R' | b'C' | b'L', None) => {
            let kind = match prefix {
                b'R' => ElementKind::R,
                b'C' => ElementKind::C,
                _ => ElementKind::L,
            };
            (kind, ElementValue::Number(number(&value_tok)?))
        }
        (b'L' | b'M', Some(args)) => parse_model(value_tok, &args)?,
        (b'M', None) => {
            return Err(NetlistError::new(
                ErrorCode::UnknownElementKind,
                pos,
                format!("`{name}` needs an MLCORE(...) or MLSTAIR(...) model"),
            ))
        }
        (_, Some(_)) => {
            return Err(malformed(
                value_tok.pos,
                format!(
                    "`{name}` takes a plain value, not `{}(...)`",
                    value_tok.text
                ),
            ))
        }
        _ => unreachable!("prefix checked above"),
    };

    Ok(Element {
        name,
        kind,
        node_a,
        node_b,
        value,
        position: pos,
    })
}

/// Splits `( ... )` into arguments; `rest` starts at the opening paren.
fn parse_call<'a>(head: Token<'a>, rest: &[Token<'a>]) -> Result<Vec<Arg<'a>>, NetlistError> {
    if head.kind != TokenKind::Word {
        return Err(malformed(head.pos, "expected a function name before `(`"));
    }
    let Some(close) = rest.iter().position(|t| t.kind == TokenKind::RParen) else {
        return Err(malformed(
            rest[0].pos,
            format!("unclosed `(` after `{}`", head.text),
        ));
    };
    if let Some(extra) = rest.get(close + 1) {
        return Err(malformed(
            extra.pos,
            format!("unexpected `{}` after `)`", extra.text),
        ));
    }
    let inner = &rest[1..close];
    let mut args = Vec::new();
    let mut k = 0;
    while k < inner.len() {
        let t = inner[k];
        match t.kind {
            TokenKind::Comma => k += 1,
            TokenKind::Word => {
                if inner.get(k + 1).map(|n| n.kind) == Some(TokenKind::Equals) {
                    match inner.get(k + 2) {
                        Some(v) if v.kind == TokenKind::Word => {
                            args.push(Arg::Keyword(t, *v));
                            k += 3;
                        }
                        _ => {
                            return Err(malformed(
                                inner[k + 1].pos,
                                format!("missing value for `{}`", t.text),
                            ))
                        }
                    }
                } else {
                    args.push(Arg::Positional(t));
                    k += 1;
                }
            }
            _ => {
                return Err(malformed(
                    t.pos,
                    format!("unexpected `{}` in parameter list", t.text),
                ))
            }
        }
    }
    Ok(args)
}

fn positional(
    head: Token<'_>,
    args: &[Arg<'_>],
    arity: Option<usize>,
) -> Result<Vec<f64>, NetlistError> {
    let mut out = Vec::with_capacity(args.len());
    for a in args {
        match a {
            Arg::Positional(t) => out.push(number(t)?),
            Arg::Keyword(k, _) => {
                return Err(malformed(
                    k.pos,
                    format!("{} takes positional arguments", head.text),
                ))
            }
        }
    }
    if let Some(n) = arity {
        if out.len() != n {
            return Err(malformed(
                head.pos,
                format!(
                    "{} takes {n} arguments, got {}",
                    head.text.to_ascii_uppercase(),
                    out.len()
                ),
            ));
        }
    }
    Ok(out)
}

fn parse_source(head: Token<'_>, args: &[Arg<'_>]) -> Result<Waveform, NetlistError> {
    let w = match head.text.to_ascii_uppercase().as_str() {
        "SIN" => {
            let v = positional(head, args, Some(3))?;
            Waveform::Sine {
                offset: v[0],
                amplitude: v[1],
                freq: v[2],
            }
        }
        "PULSE" => {
            let v = positional(head, args, Some(6))?;
            if v[5] < 0.0 || v[5].fract() != 0.0 || v[5] > u32::MAX as f64 {
                return Err(malformed(
                    head.pos,
                    "PULSE count must be a non-negative integer",
                ));
            }
            Waveform::Pulse {
                v0: v[0],
                v1: v[1],
                delay: v[2],
                width: v[3],
                period: v[4],
                count: v[5] as u32,
            }
        }
        "STEP" => {
            let v = positional(head, args, Some(3))?;
            Waveform::Step {
                v0: v[0],
                v1: v[1],
                at: v[2],
            }
        }
        "PWL" => {
            let v = positional(head, args, None)?;
            if v.is_empty() || v.len() % 2 != 0 {
                return Err(malformed(head.pos, "PWL takes time/value pairs"));
            }
            Waveform::Pwl(v.chunks(2).map(|c| (c[0], c[1])).collect())
        }
        _ => {
            return Err(malformed(
                head.pos,
                format!("unknown source function `{}`", head.text),
            ))
        }
    };
    Ok(w)
}

fn keywords<const N: usize>(
    head: Token<'_>,
    args: &[Arg<'_>],
    keys: [&str; N],
) -> Result<[f64; N], NetlistError> {
    let mut out = [None; N];
    for a in args {
        let Arg::Keyword(k, v) = a else {
            let Arg::Positional(t) = a else {
                unreachable!()
            };
            return Err(malformed(
                t.pos,
                format!("{} takes key=value arguments", head.text),
            ));
        };
        let key = k.text.to_ascii_lowercase();
        let Some(slot) = keys.iter().position(|&name| name == key) else {
            return Err(malformed(
                k.pos,
                format!("unknown parameter `{}` for {}", k.text, head.text),
            ));
        };
        if out[slot].is_some() {
            return Err(malformed(
                k.pos,
                format!("parameter `{}` given twice", k.text),
            ));
        }
        out[slot] = Some(number(v)?);
    }
    let mut values = [0.0; N];
    for (n, v) in out.iter().enumerate() {
        values[n] = v.ok_or_else(|| {
            malformed(head.pos, format!("{} is missing `{}`", head.text, keys[n]))
        })?;
    }
    Ok(values)
}

fn parse_model(
    head: Token<'_>,
    args: &[Arg<'_>],
) -> Result<(ElementKind, ElementValue), NetlistError> {
    match head.text.to_ascii_uppercase().as_str() {
        "MLSTAIR" => {
            let [l0, delta] = keywords(head, args, ["l0", "delta"])?;
            Ok((ElementKind::MlStair, ElementValue::Staircase { l0, delta }))
        }
        "MLCORE" => {
            let [flux_scale, sw, m0] = keywords(head, args, ["flux_scale", "sw", "m0"])?;
            Ok((
                ElementKind::MlCore,
                ElementValue::CoilCore { flux_scale, sw, m0 },
            ))
        }
        _ => Err(NetlistError::new(
            ErrorCode::UnknownElementKind,
            head.pos,
            format!("unknown inductive model `{}`", head.text),
        )),
    }
}
