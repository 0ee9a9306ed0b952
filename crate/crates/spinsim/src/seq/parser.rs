//! Recursive-descent parser for the pulse-sequence grammar:
//!
//! ```text
//! sequence := element ( "-" element )* ;
//! element  := pulse | delay | refocus | decouple ;
//! pulse    := "[" angle "]" axis "^" "{" label ( "," label )* "}" ;
//! axis     := "x" | "y" ;
//! angle    := PIEXPR | NUMBER "deg" | NUMBER | SYMBOL ;
//! delay    := "1/(4J" label label ")" | NUMBER "ms" | SYMBOL ;
//! refocus  := "refocus" "(" delay ")" ;
//! decouple := "decouple" "(" label ("on"|"off") ")" ;
//! ```

use super::ast::{AngleExpr, DelaySpec, PulseSequence, SequenceElement};
use super::lexer::{tokenize, Pos, SyntaxError, Token, TokenKind, UnitSuffix};

pub fn parse(text: &str) -> Result<PulseSequence, SyntaxError> {
    let tokens = tokenize(text)?;
    Parser { tokens, at: 0 }.sequence()
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &TokenKind {
        &self.tokens[self.at].kind
    }

    fn pos(&self) -> Pos {
        self.tokens[self.at].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, kind: &TokenKind, what: &str) -> Result<Token, SyntaxError> {
        if self.peek() == kind {
            Ok(self.bump())
        } else {
            Err(SyntaxError::new(self.pos(), format!("expected {what}")))
        }
    }

    fn sequence(&mut self) -> Result<PulseSequence, SyntaxError> {
        let mut elements = Vec::new();
        let mut positions = Vec::new();
        loop {
            positions.push(self.pos());
            elements.push(self.element()?);
            match self.peek() {
                TokenKind::Dash => {
                    self.bump();
                }
                TokenKind::Eof => break,
                _ => {
                    return Err(SyntaxError::new(
                        self.pos(),
                        "expected '-' between sequence elements",
                    ))
                }
            }
        }
        // Balance of decoupling directives, reported at the offender.
        let mut open: Vec<&str> = Vec::new();
        for (el, &pos) in elements.iter().zip(&positions) {
            if let SequenceElement::Decouple { spin, on } = el {
                if *on {
                    if open.contains(&spin.as_str()) {
                        return Err(SyntaxError::new(
                            pos,
                            format!("decouple({spin} on) is already active"),
                        ));
                    }
                    open.push(spin);
                } else if let Some(i) = open.iter().position(|s| s == spin) {
                    open.remove(i);
                } else {
                    return Err(SyntaxError::new(
                        pos,
                        format!("decouple({spin} off) without a matching on"),
                    ));
                }
            }
        }
        if let Some(spin) = open.first() {
            let pos = self.pos();
            return Err(SyntaxError::new(
                pos,
                format!("decouple({spin} on) is never switched off"),
            ));
        }
        PulseSequence::new(elements).map_err(|e| SyntaxError::new(self.pos(), e.to_string()))
    }

    fn element(&mut self) -> Result<SequenceElement, SyntaxError> {
        match self.peek().clone() {
            TokenKind::LBracket => self.pulse(),
            TokenKind::CouplingDelay { a, b } => {
                self.bump();
                Ok(SequenceElement::Delay(DelaySpec::CouplingQuarter { a, b }))
            }
            TokenKind::Number { value, unit } => {
                let pos = self.pos();
                self.bump();
                match unit {
                    Some(UnitSuffix::Ms) => Ok(SequenceElement::Delay(DelaySpec::FixedMs(value))),
                    _ => Err(SyntaxError::new(
                        pos,
                        "a fixed delay needs an 'ms' suffix (e.g. 3.5ms)",
                    )),
                }
            }
            TokenKind::Ident(name) => {
                self.bump();
                Ok(SequenceElement::Delay(DelaySpec::Sym(name)))
            }
            TokenKind::Refocus => self.refocus(),
            TokenKind::Decouple => self.decouple(),
            TokenKind::Eof => Err(SyntaxError::new(self.pos(), "expected a sequence element")),
            _ => Err(SyntaxError::new(
                self.pos(),
                "expected a pulse, delay, refocus(...) or decouple(...)",
            )),
        }
    }

    fn pulse(&mut self) -> Result<SequenceElement, SyntaxError> {
        self.expect(&TokenKind::LBracket, "'['")?;
        let angle = self.angle()?;
        self.expect(&TokenKind::RBracket, "']'")?;
        let axis = match self.peek() {
            TokenKind::AxisTok(a) => {
                let a = *a;
                self.bump();
                a
            }
            _ => return Err(SyntaxError::new(self.pos(), "unknown axis (expected x or y)")),
        };
        self.expect(&TokenKind::Caret, "'^'")?;
        self.expect(&TokenKind::LBrace, "'{'")?;
        let mut targets = Vec::new();
        if *self.peek() == TokenKind::RBrace {
            return Err(SyntaxError::new(self.pos(), "pulse target set is empty"));
        }
        loop {
            match self.peek().clone() {
                TokenKind::Label(l) => {
                    self.bump();
                    targets.push(l);
                }
                _ => return Err(SyntaxError::new(self.pos(), "expected a spin label")),
            }
            match self.peek() {
                TokenKind::Comma => {
                    self.bump();
                }
                TokenKind::RBrace => {
                    self.bump();
                    break;
                }
                _ => {
                    return Err(SyntaxError::new(
                        self.pos(),
                        "expected ',' or '}' in target set",
                    ))
                }
            }
        }
        Ok(SequenceElement::Pulse { angle, axis, targets })
    }

    fn angle(&mut self) -> Result<AngleExpr, SyntaxError> {
        match self.peek().clone() {
            TokenKind::Pi { num, den } => {
                self.bump();
                Ok(AngleExpr::Pi { num, den })
            }
            TokenKind::Number { value, unit } => {
                let pos = self.pos();
                self.bump();
                match unit {
                    None => Ok(AngleExpr::Rad(value)),
                    Some(UnitSuffix::Deg) => Ok(AngleExpr::Deg(value)),
                    Some(_) => Err(SyntaxError::new(pos, "time unit in a pulse angle")),
                }
            }
            TokenKind::Ident(name) => {
                self.bump();
                Ok(AngleExpr::Sym(name))
            }
            _ => Err(SyntaxError::new(self.pos(), "expected an angle")),
        }
    }

    fn refocus(&mut self) -> Result<SequenceElement, SyntaxError> {
        self.expect(&TokenKind::Refocus, "'refocus'")?;
        self.expect(&TokenKind::LParen, "'('")?;
        let delay = match self.peek().clone() {
            TokenKind::CouplingDelay { a, b } => {
                self.bump();
                DelaySpec::CouplingQuarter { a, b }
            }
            TokenKind::Number { value, unit } => {
                let pos = self.pos();
                self.bump();
                match unit {
                    Some(UnitSuffix::Ms) => DelaySpec::FixedMs(value),
                    _ => {
                        return Err(SyntaxError::new(
                            pos,
                            "a fixed delay needs an 'ms' suffix (e.g. 3.5ms)",
                        ))
                    }
                }
            }
            TokenKind::Ident(name) => {
                self.bump();
                DelaySpec::Sym(name)
            }
            _ => return Err(SyntaxError::new(self.pos(), "expected a delay")),
        };
        self.expect(&TokenKind::RParen, "')'")?;
        Ok(SequenceElement::Refocus(delay))
    }

    fn decouple(&mut self) -> Result<SequenceElement, SyntaxError> {
        self.expect(&TokenKind::Decouple, "'decouple'")?;
        self.expect(&TokenKind::LParen, "'('")?;
        let spin = match self.peek().clone() {
            TokenKind::Ident(name) => {
                self.bump();
                name
            }
            TokenKind::Label(l) => {
                self.bump();
                l
            }
            // Positional labels lex as numbers outside braces.
            TokenKind::Number { value, unit: None }
                if value >= 0.0 && value.fract() == 0.0 =>
            {
                self.bump();
                format!("{value}")
            }
            _ => return Err(SyntaxError::new(self.pos(), "expected a spin label")),
        };
        let on = match self.peek() {
            TokenKind::On => {
                self.bump();
                true
            }
            TokenKind::Off => {
                self.bump();
                false
            }
            _ => return Err(SyntaxError::new(self.pos(), "expected 'on' or 'off'")),
        };
        self.expect(&TokenKind::RParen, "')'")?;
        Ok(SequenceElement::Decouple { spin, on })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::Axis;

    #[test]
    fn parses_the_entangling_sequence() {
        let seq = parse(
            "[theta]x^{2} - [pi/2]x^{1,2} - 1/(4J12) - [pi]x^{1,2} - 1/(4J12) - [pi/2]y^{2}",
        )
        .unwrap();
        assert_eq!(seq.elements().len(), 6);
        let params: Vec<&str> = seq.parameters().iter().map(|s| s.as_str()).collect();
        assert_eq!(params, vec!["theta"]);
        assert!(matches!(
            &seq.elements()[5],
            SequenceElement::Pulse {
                axis: Axis::Y,
                targets,
                ..
            } if targets == &["2".to_string()]
        ));
    }

    #[test]
    fn parses_refocus_with_fixed_delay() {
        let seq = parse("refocus(3.5ms)").unwrap();
        assert_eq!(
            seq.elements(),
            &[SequenceElement::Refocus(DelaySpec::FixedMs(3.5))]
        );
    }

    #[test]
    fn parses_balanced_decoupling() {
        let seq = parse("decouple(H on) - [pi/2]x^{1,2} - decouple(H off)").unwrap();
        assert_eq!(seq.elements().len(), 3);
    }

    #[test]
    fn rejects_unbalanced_decoupling_with_position() {
        let err = parse("decouple(H off)").unwrap_err();
        assert_eq!(err.pos.line, 1);
        assert_eq!(err.pos.col, 1);
        assert!(err.message.contains("without a matching on"));
        assert!(parse("decouple(H on) - [pi]x^{1}").is_err());
    }

    #[test]
    fn rejects_unknown_axis() {
        let err = parse("[pi/2]z^{1}").unwrap_err();
        assert!(err.message.contains("axis"));
        assert_eq!(err.pos.col, 7);
    }

    #[test]
    fn rejects_empty_target_set() {
        let err = parse("[pi/2]x^{}").unwrap_err();
        assert!(err.message.contains("empty"));
    }

    #[test]
    fn rejects_bare_number_delay() {
        assert!(parse("[pi]x^{1} - 3.5").is_err());
    }

    #[test]
    fn degree_angles_parse() {
        let seq = parse("[50.3deg]x^{2}").unwrap();
        assert!(matches!(
            &seq.elements()[0],
            SequenceElement::Pulse {
                angle: AngleExpr::Deg(v),
                ..
            } if *v == 50.3
        ));
    }
}
