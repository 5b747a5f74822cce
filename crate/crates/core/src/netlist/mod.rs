//! Circuit-description dialect.
//!
//! One statement per line:
//!
//! ```text
//! # series loop with a staircase meminductor
//! V1  in  0   PULSE(0 1 10m 1m 10m 3)
//! R1  in  n1  10
//! ML1 n1  n2  MLSTAIR(l0=2, delta=0.2)
//! C1  n2  0   2.474u
//! .tran 10u 70m
//! .print v_out l_eff
//! ```
//!
//! Sources accept `SIN(offset amp freq)`, `PULSE(v0 v1 delay width period
//! count)`, `STEP(v0 v1 t)`, `PWL(t1 v1 t2 v2 ...)` or a plain DC number.
//! Inductive elements are a plain `L` value, `MLSTAIR(l0=, delta=)` or
//! `MLCORE(flux_scale=, sw=, m0=)`. Names are unique without regard to case.

mod error;
mod lexer;
mod parse;
mod validate;

use std::fmt;

pub use error::{ErrorCode, NetlistError, Position};
pub use lexer::parse_number;
pub use parse::parse_netlist;
pub use validate::{validate_circuit, CompiledCircuit, InductiveElement, Signal, Tran};

use crate::waveform::Waveform;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    V,
    R,
    L,
    C,
    MlStair,
    MlCore,
}

impl ElementKind {
    pub fn is_inductive(&self) -> bool {
        matches!(
            self,
            ElementKind::L | ElementKind::MlStair | ElementKind::MlCore
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElementValue {
    /// Ohms, henries or farads depending on the kind.
    Number(f64),
    Source(Waveform),
    Staircase {
        l0: f64,
        delta: f64,
    },
    CoilCore {
        flux_scale: f64,
        sw: f64,
        m0: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub name: String,
    pub kind: ElementKind,
    pub node_a: String,
    pub node_b: String,
    pub value: ElementValue,
    pub position: Position,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Directive {
    Tran { step: f64, stop: f64 },
    Print(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectiveEntry {
    pub directive: Directive,
    pub position: Position,
}

/// Parsed but not yet validated netlist.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NetlistDocument {
    pub elements: Vec<Element>,
    pub directives: Vec<DirectiveEntry>,
    /// Position just past the last line, used for whole-file errors.
    pub end: Position,
}

impl NetlistDocument {
    /// Equality that ignores source positions.
    pub fn same_structure(&self, other: &NetlistDocument) -> bool {
        self.elements.len() == other.elements.len()
            && self.directives.len() == other.directives.len()
            && self.elements.iter().zip(&other.elements).all(|(a, b)| {
                a.name == b.name
                    && a.kind == b.kind
                    && a.node_a == b.node_a
                    && a.node_b == b.node_b
                    && a.value == b.value
            })
            && self
                .directives
                .iter()
                .zip(&other.directives)
                .all(|(a, b)| a.directive == b.directive)
    }
}

impl fmt::Display for ElementValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementValue::Number(v) => write!(f, "{v:?}"),
            ElementValue::Source(w) => write!(f, "{w}"),
            ElementValue::Staircase { l0, delta } => {
                write!(f, "MLSTAIR(l0={l0:?}, delta={delta:?})")
            }
            ElementValue::CoilCore { flux_scale, sw, m0 } => {
                write!(f, "MLCORE(flux_scale={flux_scale:?}, sw={sw:?}, m0={m0:?})")
            }
        }
    }
}

impl fmt::Display for Directive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Directive::Tran { step, stop } => write!(f, ".tran {step:?} {stop:?}"),
            Directive::Print(signals) => write!(f, ".print {}", signals.join(" ")),
        }
    }
}

/// Canonical pretty-printed form; parses back to the same structure.
impl fmt::Display for NetlistDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.elements {
            writeln!(f, "{} {} {} {}", e.name, e.node_a, e.node_b, e.value)?;
        }
        for d in &self.directives {
            writeln!(f, "{}", d.directive)?;
        }
        Ok(())
    }
}
