//! Pulse-sequence AST and its canonical text form.
//!
//! `parse(format(ast))` returns a structurally identical AST, and
//! `format(parse(text))` is a canonicalization (idempotent).

use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

use crate::operators::Axis;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SequenceError {
    #[error("pulse target set is empty")]
    EmptyTargets,
    #[error("duplicate pulse target {0:?}")]
    DuplicateTarget(String),
    #[error("fixed delay must be non-negative, got {0}ms")]
    NegativeDelay(f64),
    #[error("angle literal must be finite and non-negative")]
    BadAngleLiteral,
    #[error("pi fraction must have positive numerator and denominator")]
    BadPiFraction,
    #[error("decouple({0} off) without a matching on")]
    DecoupleOffWithoutOn(String),
    #[error("decouple({0} on) is already active")]
    DecoupleAlreadyOn(String),
    #[error("decouple({0} on) is never switched off")]
    DecoupleNeverClosed(String),
}

/// Pulse angle: a pi fraction, a degree or radian literal, or a free symbol.
#[derive(Debug, Clone, PartialEq)]
pub enum AngleExpr {
    /// num * pi / den, both positive.
    Pi { num: u32, den: u32 },
    Deg(f64),
    Rad(f64),
    Sym(String),
}

impl fmt::Display for AngleExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AngleExpr::Pi { num: 1, den: 1 } => write!(f, "pi"),
            AngleExpr::Pi { num, den: 1 } => write!(f, "{num}pi"),
            AngleExpr::Pi { num: 1, den } => write!(f, "pi/{den}"),
            AngleExpr::Pi { num, den } => write!(f, "{num}pi/{den}"),
            AngleExpr::Deg(v) => write!(f, "{v}deg"),
            AngleExpr::Rad(v) => write!(f, "{v}"),
            AngleExpr::Sym(s) => write!(f, "{s}"),
        }
    }
}

/// Free evolution interval: a quarter-period of a declared coupling,
/// a fixed time in milliseconds, or a free symbol (bound in seconds).
#[derive(Debug, Clone, PartialEq)]
pub enum DelaySpec {
    CouplingQuarter { a: String, b: String },
    FixedMs(f64),
    Sym(String),
}

impl fmt::Display for DelaySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DelaySpec::CouplingQuarter { a, b } => write!(f, "1/(4J{a}{b})"),
            DelaySpec::FixedMs(v) => write!(f, "{v}ms"),
            DelaySpec::Sym(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SequenceElement {
    Pulse {
        angle: AngleExpr,
        axis: Axis,
        targets: Vec<String>,
    },
    Delay(DelaySpec),
    /// The delay with a hard pi pulse at its midpoint, cancelling offset
    /// evolution while keeping the couplings.
    Refocus(DelaySpec),
    Decouple {
        spin: String,
        on: bool,
    },
}

impl fmt::Display for SequenceElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceElement::Pulse { angle, axis, targets } => {
                write!(f, "[{angle}]{axis}^{{{}}}", targets.join(","))
            }
            SequenceElement::Delay(d) => write!(f, "{d}"),
            SequenceElement::Refocus(d) => write!(f, "refocus({d})"),
            SequenceElement::Decouple { spin, on } => {
                write!(f, "decouple({spin} {})", if *on { "on" } else { "off" })
            }
        }
    }
}

/// An ordered pulse sequence plus the set of free symbols it mentions.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    elements: Vec<SequenceElement>,
    parameters: BTreeSet<String>,
}

impl PulseSequence {
    /// Validate structural invariants and collect free symbols.
    pub fn new(elements: Vec<SequenceElement>) -> Result<Self, SequenceError> {
        let mut parameters = BTreeSet::new();
        let mut open: BTreeSet<&str> = BTreeSet::new();
        for el in &elements {
            match el {
                SequenceElement::Pulse { angle, targets, .. } => {
                    if targets.is_empty() {
                        return Err(SequenceError::EmptyTargets);
                    }
                    for (i, t) in targets.iter().enumerate() {
                        if targets[..i].contains(t) {
                            return Err(SequenceError::DuplicateTarget(t.clone()));
                        }
                    }
                    match angle {
                        AngleExpr::Sym(s) => {
                            parameters.insert(s.clone());
                        }
                        AngleExpr::Pi { num, den } => {
                            if *num == 0 || *den == 0 {
                                return Err(SequenceError::BadPiFraction);
                            }
                        }
                        AngleExpr::Deg(v) | AngleExpr::Rad(v) => {
                            if !v.is_finite() || *v < 0.0 {
                                return Err(SequenceError::BadAngleLiteral);
                            }
                        }
                    }
                }
                SequenceElement::Delay(d) | SequenceElement::Refocus(d) => match d {
                    DelaySpec::Sym(s) => {
                        parameters.insert(s.clone());
                    }
                    DelaySpec::FixedMs(v) => {
                        if !v.is_finite() || *v < 0.0 {
                            return Err(SequenceError::NegativeDelay(*v));
                        }
                    }
                    DelaySpec::CouplingQuarter { .. } => {}
                },
                SequenceElement::Decouple { spin, on } => {
                    if *on {
                        if !open.insert(spin) {
                            return Err(SequenceError::DecoupleAlreadyOn(spin.clone()));
                        }
                    } else if !open.remove(spin.as_str()) {
                        return Err(SequenceError::DecoupleOffWithoutOn(spin.clone()));
                    }
                }
            }
        }
        if let Some(spin) = open.into_iter().next() {
            return Err(SequenceError::DecoupleNeverClosed(spin.to_string()));
        }
        Ok(Self { elements, parameters })
    }

    pub fn elements(&self) -> &[SequenceElement] {
        &self.elements
    }

    pub fn parameters(&self) -> &BTreeSet<String> {
        &self.parameters
    }

    /// Canonical text form.
    pub fn format(&self) -> String {
        self.elements
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join(" - ")
    }
}

impl fmt::Display for PulseSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format())
    }
}
