//! Line tokenizer and engineering-notation numbers.

use super::error::{ErrorCode, NetlistError, Position};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TokenKind {
    Word,
    LParen,
    RParen,
    Equals,
    Comma,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Token<'a> {
    pub kind: TokenKind,
    pub text: &'a str,
    pub pos: Position,
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '+' | '-')
}

/// Splits one physical line into tokens. `#` and `;` start a comment that
/// runs to the end of the line.
pub(crate) fn tokenize(line: &str, line_no: usize) -> Result<Vec<Token<'_>>, NetlistError> {
    let mut tokens = Vec::new();
    let mut chars = line.char_indices().enumerate().peekable();
    while let Some((col0, (start, c))) = chars.next() {
        let pos = Position::new(line_no, col0 + 1);
        let single = |kind| Token {
            kind,
            text: &line[start..start + c.len_utf8()],
            pos,
        };
        match c {
            '#' | ';' => break,
            c if c.is_whitespace() => {}
            '(' => tokens.push(single(TokenKind::LParen)),
            ')' => tokens.push(single(TokenKind::RParen)),
            '=' => tokens.push(single(TokenKind::Equals)),
            ',' => tokens.push(single(TokenKind::Comma)),
            c if is_word_char(c) => {
                let mut end = start + c.len_utf8();
                while let Some(&(_, (i, n))) = chars.peek() {
                    if !is_word_char(n) {
                        break;
                    }
                    end = i + n.len_utf8();
                    chars.next();
                }
                tokens.push(Token {
                    kind: TokenKind::Word,
                    text: &line[start..end],
                    pos,
                });
            }
            other => {
                return Err(NetlistError::new(
                    ErrorCode::Lexical,
                    pos,
                    format!("unexpected character {other:?}"),
                ))
            }
        }
    }
    Ok(tokens)
}

/// Parses a SPICE-style number: `2.5`, `1e-3`, `0.2u`, `4.7k`, `1meg`.
///
/// Recognized scale suffixes (case-insensitive): `t g meg k m u n p f`.
/// Returns `None` for anything else, including non-finite results.
pub fn parse_number(text: &str) -> Option<f64> {
    let bytes = text.as_bytes();
    let mut end = 0;
    if matches!(bytes.first(), Some(b'+' | b'-')) {
        end = 1;
    }
    let digits_start = end;
    while end < bytes.len() && bytes[end].is_ascii_digit() {
        end += 1;
    }
    let mut mantissa_digits = end - digits_start;
    if end < bytes.len() && bytes[end] == b'.' {
        end += 1;
        let frac_start = end;
        while end < bytes.len() && bytes[end].is_ascii_digit() {
            end += 1;
        }
        mantissa_digits += end - frac_start;
    }
    if mantissa_digits == 0 {
        return None;
    }
    // exponent only when followed by digits, so `1meg` stays a suffix
    if end < bytes.len() && matches!(bytes[end], b'e' | b'E') {
        let mut probe = end + 1;
        if probe < bytes.len() && matches!(bytes[probe], b'+' | b'-') {
            probe += 1;
        }
        let exp_digits = probe;
        while probe < bytes.len() && bytes[probe].is_ascii_digit() {
            probe += 1;
        }
        if probe > exp_digits {
            end = probe;
        }
    }
    let base: f64 = text[..end].parse().ok()?;
    let scale = match text[end..].to_ascii_lowercase().as_str() {
        "" => 1.0,
        "t" => 1e12,
        "g" => 1e9,
        "meg" => 1e6,
        "k" => 1e3,
        "m" => 1e-3,
        "u" => 1e-6,
        "n" => 1e-9,
        "p" => 1e-12,
        "f" => 1e-15,
        _ => return None,
    };
    let value = base * scale;
    value.is_finite().then_some(value)
}
