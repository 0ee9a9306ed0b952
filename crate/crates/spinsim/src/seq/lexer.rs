//! Tokenizer for the pulse-sequence notation.
//!
//! Whitespace-insensitive; `#` starts a line comment; `-` between elements
//! is a separator. Inside `^{...}` every alphanumeric run is a spin label.
//! Outside, identifiers are classified: `pi` fractions, the axes `x`/`y`,
//! the keywords `refocus`/`decouple`/`on`/`off`, and free symbols. Coupling
//! delays of the form `1/(4Jab)` are recognized as single tokens.

use std::fmt;
use thiserror::Error;

use crate::operators::Axis;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("syntax error at {pos}: {message}")]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
}

impl SyntaxError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        Self {
            pos,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitSuffix {
    Deg,
    Ms,
    S,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Caret,
    Comma,
    Dash,
    /// `pi`, `pi/2`, `3pi/2`, ...
    Pi { num: u32, den: u32 },
    Number { value: f64, unit: Option<UnitSuffix> },
    /// `1/(4Jab)` with its two spin labels.
    CouplingDelay { a: String, b: String },
    AxisTok(Axis),
    /// Identifier outside target braces: a free symbol or a spin label.
    Ident(String),
    /// Spin label inside target braces.
    Label(String),
    Refocus,
    Decouple,
    On,
    Off,
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: Pos,
}

struct Scanner<'a> {
    src: &'a [u8],
    at: usize,
    line: u32,
    col: u32,
}

impl<'a> Scanner<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src: src.as_bytes(),
            at: 0,
            line: 1,
            col: 1,
        }
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.at).copied()
    }

    fn peek_at(&self, ahead: usize) -> Option<u8> {
        self.src.get(self.at + ahead).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.at += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'#') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn take_while(&mut self, pred: impl Fn(u8) -> bool) -> String {
        let start = self.at;
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            self.bump();
        }
        String::from_utf8_lossy(&self.src[start..self.at]).into_owned()
    }

    /// One spin label inside a `1/(4J..)` delay: a letter followed by
    /// digits, or a single digit.
    fn coupling_label(&mut self) -> Result<String, SyntaxError> {
        let pos = self.pos();
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() => {
                self.bump();
                let digits = self.take_while(|c| c.is_ascii_digit());
                Ok(format!("{}{digits}", c as char))
            }
            Some(c) if c.is_ascii_digit() => {
                self.bump();
                Ok((c as char).to_string())
            }
            _ => Err(SyntaxError::new(pos, "expected a spin label in coupling delay")),
        }
    }
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut sc = Scanner::new(text);
    let mut tokens = Vec::new();
    let mut brace_depth = 0u32;

    loop {
        sc.skip_trivia();
        let pos = sc.pos();
        let Some(c) = sc.peek() else {
            tokens.push(Token {
                kind: TokenKind::Eof,
                pos,
            });
            return Ok(tokens);
        };

        let kind = match c {
            b'[' => {
                sc.bump();
                TokenKind::LBracket
            }
            b']' => {
                sc.bump();
                TokenKind::RBracket
            }
            b'{' => {
                sc.bump();
                brace_depth += 1;
                TokenKind::LBrace
            }
            b'}' => {
                sc.bump();
                brace_depth = brace_depth.saturating_sub(1);
                TokenKind::RBrace
            }
            b'(' => {
                sc.bump();
                TokenKind::LParen
            }
            b')' => {
                sc.bump();
                TokenKind::RParen
            }
            b'^' => {
                sc.bump();
                TokenKind::Caret
            }
            b',' => {
                sc.bump();
                TokenKind::Comma
            }
            b'-' => {
                sc.bump();
                TokenKind::Dash
            }
            _ if brace_depth > 0 && c.is_ascii_alphanumeric() => {
                TokenKind::Label(sc.take_while(|c| c.is_ascii_alphanumeric()))
            }
            _ if c.is_ascii_digit() => lex_numeric(&mut sc, pos)?,
            _ if c.is_ascii_alphabetic() => lex_word(&mut sc)?,
            _ => {
                return Err(SyntaxError::new(
                    pos,
                    format!("illegal character {:?}", c as char),
                ))
            }
        };
        tokens.push(Token { kind, pos });
    }
}

/// Numbers (`50.3`, `3.5ms`, `90deg`), integer pi fractions (`3pi/2`), and
/// coupling delays (`1/(4J12)`).
fn lex_numeric(sc: &mut Scanner, pos: Pos) -> Result<TokenKind, SyntaxError> {
    let int_part = sc.take_while(|c| c.is_ascii_digit());

    // `1/(4J` introduces a coupling delay.
    if int_part == "1"
        && sc.peek() == Some(b'/')
        && sc.peek_at(1) == Some(b'(')
        && sc.peek_at(2) == Some(b'4')
        && sc.peek_at(3) == Some(b'J')
    {
        for _ in 0..4 {
            sc.bump();
        }
        let a = sc.coupling_label()?;
        let b = sc.coupling_label()?;
        if sc.peek() == Some(b')') {
            sc.bump();
            return Ok(TokenKind::CouplingDelay { a, b });
        }
        return Err(SyntaxError::new(
            sc.pos(),
            "expected ')' to close coupling delay",
        ));
    }

    let mut text = int_part;
    let mut is_integer = true;
    if sc.peek() == Some(b'.') {
        sc.bump();
        let frac = sc.take_while(|c| c.is_ascii_digit());
        if frac.is_empty() {
            return Err(SyntaxError::new(sc.pos(), "expected digits after '.'"));
        }
        text = format!("{text}.{frac}");
        is_integer = false;
    }

    let suffix = sc.take_while(|c| c.is_ascii_alphabetic());
    match suffix.as_str() {
        "pi" if is_integer => {
            let num: u32 = text
                .parse()
                .map_err(|_| SyntaxError::new(pos, "pi multiple out of range"))?;
            let den = lex_pi_denominator(sc)?;
            Ok(TokenKind::Pi { num, den })
        }
        "pi" => Err(SyntaxError::new(
            pos,
            "pi multiples must be integers (e.g. 3pi/2)",
        )),
        "" | "deg" | "ms" | "s" => {
            let value: f64 = text
                .parse()
                .map_err(|_| SyntaxError::new(pos, "malformed number"))?;
            let unit = match suffix.as_str() {
                "deg" => Some(UnitSuffix::Deg),
                "ms" => Some(UnitSuffix::Ms),
                "s" => Some(UnitSuffix::S),
                _ => None,
            };
            Ok(TokenKind::Number { value, unit })
        }
        other => Err(SyntaxError::new(
            pos,
            format!("unknown unit suffix {other:?}"),
        )),
    }
}

/// Words outside braces: pi fractions, axes, keywords, identifiers.
fn lex_word(sc: &mut Scanner) -> Result<TokenKind, SyntaxError> {
    let word = sc.take_while(|c| c.is_ascii_alphanumeric());
    Ok(match word.as_str() {
        "pi" => TokenKind::Pi {
            num: 1,
            den: lex_pi_denominator(sc)?,
        },
        "x" => TokenKind::AxisTok(Axis::X),
        "y" => TokenKind::AxisTok(Axis::Y),
        "refocus" => TokenKind::Refocus,
        "decouple" => TokenKind::Decouple,
        "on" => TokenKind::On,
        "off" => TokenKind::Off,
        _ => TokenKind::Ident(word),
    })
}

/// Optional `/n` after a pi literal.
fn lex_pi_denominator(sc: &mut Scanner) -> Result<u32, SyntaxError> {
    if sc.peek() != Some(b'/') {
        return Ok(1);
    }
    sc.bump();
    let pos = sc.pos();
    let digits = sc.take_while(|c| c.is_ascii_digit());
    if digits.is_empty() {
        return Err(SyntaxError::new(pos, "expected digits after 'pi/'"));
    }
    let den: u32 = digits
        .parse()
        .map_err(|_| SyntaxError::new(pos, "pi denominator out of range"))?;
    if den == 0 {
        return Err(SyntaxError::new(pos, "pi denominator must be nonzero"));
    }
    Ok(den)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<TokenKind> {
        tokenize(text)
            .unwrap()
            .into_iter()
            .map(|t| t.kind)
            .filter(|k| *k != TokenKind::Eof)
            .collect()
    }

    #[test]
    fn lexes_pulse_with_pi_fraction_and_labels() {
        assert_eq!(
            kinds("[pi/2]x^{1,2}"),
            vec![
                TokenKind::LBracket,
                TokenKind::Pi { num: 1, den: 2 },
                TokenKind::RBracket,
                TokenKind::AxisTok(Axis::X),
                TokenKind::Caret,
                TokenKind::LBrace,
                TokenKind::Label("1".into()),
                TokenKind::Comma,
                TokenKind::Label("2".into()),
                TokenKind::RBrace,
            ]
        );
    }

    #[test]
    fn lexes_coupling_delay_as_one_token() {
        assert_eq!(
            kinds("1/(4J12)"),
            vec![TokenKind::CouplingDelay {
                a: "1".into(),
                b: "2".into()
            }]
        );
        assert_eq!(
            kinds("1/(4JC1C2)"),
            vec![TokenKind::CouplingDelay {
                a: "C1".into(),
                b: "C2".into()
            }]
        );
    }

    #[test]
    fn lexes_theta_as_identifier() {
        assert_eq!(
            kinds("[theta]x^{2}"),
            vec![
                TokenKind::LBracket,
                TokenKind::Ident("theta".into()),
                TokenKind::RBracket,
                TokenKind::AxisTok(Axis::X),
                TokenKind::Caret,
                TokenKind::LBrace,
                TokenKind::Label("2".into()),
                TokenKind::RBrace,
            ]
        );
    }

    #[test]
    fn lexes_numbers_with_units() {
        assert_eq!(
            kinds("3.5ms 50.3deg 2s 1.25"),
            vec![
                TokenKind::Number {
                    value: 3.5,
                    unit: Some(UnitSuffix::Ms)
                },
                TokenKind::Number {
                    value: 50.3,
                    unit: Some(UnitSuffix::Deg)
                },
                TokenKind::Number {
                    value: 2.0,
                    unit: Some(UnitSuffix::S)
                },
                TokenKind::Number {
                    value: 1.25,
                    unit: None
                },
            ]
        );
    }

    #[test]
    fn lexes_multiples_of_pi() {
        assert_eq!(kinds("3pi/2"), vec![TokenKind::Pi { num: 3, den: 2 }]);
        assert_eq!(kinds("2pi"), vec![TokenKind::Pi { num: 2, den: 1 }]);
        assert_eq!(kinds("pi"), vec![TokenKind::Pi { num: 1, den: 1 }]);
    }

    #[test]
    fn skips_comments_and_whitespace() {
        assert_eq!(
            kinds("# a comment\n  pi # trailing\n"),
            vec![TokenKind::Pi { num: 1, den: 1 }]
        );
    }

    #[test]
    fn reports_illegal_character_with_position() {
        let err = tokenize("[pi]x^{1}\n  @").unwrap_err();
        assert_eq!(err.pos, Pos { line: 2, col: 3 });
        assert!(err.message.contains('@'));
    }

    #[test]
    fn rejects_unknown_unit_suffix() {
        let err = tokenize("3.5sec").unwrap_err();
        assert!(err.message.contains("sec"));
    }
}
