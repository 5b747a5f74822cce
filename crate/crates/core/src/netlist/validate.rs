//! Single-series-loop validation.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use super::error::{ErrorCode, NetlistError, Position};
use super::{Directive, Element, ElementKind, ElementValue, NetlistDocument};
use crate::device::CoilCoreParams;
use crate::waveform::Waveform;

/// The inductive member of the loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InductiveElement {
    Linear {
        henries: f64,
    },
    /// Starts at `l0` and is multiplied by `1 - delta` at every source pulse.
    Staircase {
        l0: f64,
        delta: f64,
    },
    CoilCore(CoilCoreParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tran {
    pub step: f64,
    pub stop: f64,
}

/// Columns a simulation can report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Signal {
    Time,
    VIn,
    I,
    VOut,
    Q,
    LEff,
}

impl Signal {
    pub const ALL: [Signal; 6] = [
        Signal::Time,
        Signal::VIn,
        Signal::I,
        Signal::VOut,
        Signal::Q,
        Signal::LEff,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Signal::Time => "time",
            Signal::VIn => "v_in",
            Signal::I => "i",
            Signal::VOut => "v_out",
            Signal::Q => "q",
            Signal::LEff => "l_eff",
        }
    }

    pub fn from_name(name: &str) -> Option<Signal> {
        Signal::ALL
            .into_iter()
            .find(|s| s.name().eq_ignore_ascii_case(name))
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A validated V - R - inductive - C ring.
///
/// The loop current is positive when it leaves the source's first node and
/// runs through the external elements. `v_out` is the capacitor voltage
/// measured from its first node to its second.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledCircuit {
    pub source: Waveform,
    pub resistance: f64,
    pub inductive: InductiveElement,
    pub capacitance: f64,
    pub tran: Tran,
    pub outputs: Vec<Signal>,
    /// Element names in loop order, starting with the source.
    pub loop_order: Vec<String>,
    /// +1 when the inductive element is traversed from its first node to its
    /// second by positive loop current, -1 otherwise.
    pub inductive_orientation: f64,
    /// Same convention for the capacitor.
    pub capacitor_orientation: f64,
}

impl CompiledCircuit {
    /// Programmatic construction with forward orientations.
    pub fn series(
        source: Waveform,
        resistance: f64,
        inductive: InductiveElement,
        capacitance: f64,
        tran: Tran,
    ) -> Self {
        Self {
            source,
            resistance,
            inductive,
            capacitance,
            tran,
            outputs: vec![Signal::VOut],
            loop_order: vec!["V".into(), "R".into(), "L".into(), "C".into()],
            inductive_orientation: 1.0,
            capacitor_orientation: 1.0,
        }
    }
}

fn err(code: ErrorCode, pos: Position, msg: impl Into<String>) -> NetlistError {
    NetlistError::new(code, pos, msg)
}

/// Checks the single-loop topology and normalizes the document.
pub fn validate_circuit(doc: &NetlistDocument) -> Result<CompiledCircuit, NetlistError> {
    // analysis directives
    let mut tran = None;
    let mut outputs = Vec::new();
    for d in &doc.directives {
        match &d.directive {
            Directive::Tran { step, stop } => {
                if tran.is_some() {
                    return Err(err(
                        ErrorCode::DuplicateTran,
                        d.position,
                        "more than one .tran",
                    ));
                }
                if !(*step > 0.0 && *stop > 0.0 && step < stop) {
                    return Err(err(
                        ErrorCode::InvalidTran,
                        d.position,
                        format!(".tran needs 0 < step < stop, got step {step} stop {stop}"),
                    ));
                }
                tran = Some(Tran {
                    step: *step,
                    stop: *stop,
                });
            }
            Directive::Print(names) => {
                for n in names {
                    let s = Signal::from_name(n).ok_or_else(|| {
                        err(
                            ErrorCode::UnknownSignal,
                            d.position,
                            format!("unknown signal `{n}`"),
                        )
                    })?;
                    if !outputs.contains(&s) {
                        outputs.push(s);
                    }
                }
            }
        }
    }
    let tran = tran.ok_or_else(|| err(ErrorCode::MissingTran, doc.end, "no .tran directive"))?;
    if outputs.is_empty() {
        outputs.push(Signal::VOut);
    }

    // element census
    let mut source = None;
    let mut resistor = None;
    let mut capacitor = None;
    let mut inductive = None;
    for e in &doc.elements {
        let slot = match e.kind {
            ElementKind::V => &mut source,
            ElementKind::R => &mut resistor,
            ElementKind::C => &mut capacitor,
            _ => &mut inductive,
        };
        if slot.is_some() {
            let (code, what) = match e.kind {
                ElementKind::V => (ErrorCode::SourceCount, "a second voltage source"),
                ElementKind::R => (ErrorCode::NonSeriesTopology, "a second resistor"),
                ElementKind::C => (ErrorCode::NonSeriesTopology, "a second capacitor"),
                _ => (ErrorCode::MultipleInductive, "a second inductive element"),
            };
            return Err(err(code, e.position, format!("`{}` is {what}", e.name)));
        }
        *slot = Some(e);
    }
    let source = source.ok_or_else(|| err(ErrorCode::SourceCount, doc.end, "no voltage source"))?;
    let inductive = inductive
        .ok_or_else(|| err(ErrorCode::MissingInductive, doc.end, "no inductive element"))?;
    let resistor = resistor.ok_or_else(|| {
        err(
            ErrorCode::NonSeriesTopology,
            doc.end,
            "the loop has no resistor",
        )
    })?;
    let capacitor = capacitor.ok_or_else(|| {
        err(
            ErrorCode::NonSeriesTopology,
            doc.end,
            "the loop has no capacitor",
        )
    })?;

    // values
    let waveform = match &source.value {
        ElementValue::Source(w) => w.clone(),
        _ => unreachable!("parser only builds sources for V elements"),
    };
    waveform
        .validate()
        .map_err(|e| err(ErrorCode::InvalidValue, source.position, e.to_string()))?;
    let resistance = plain(resistor);
    if resistance < 0.0 {
        return Err(err(
            ErrorCode::InvalidValue,
            resistor.position,
            format!("resistance must be >= 0, got {resistance}"),
        ));
    }
    let capacitance = plain(capacitor);
    if capacitance <= 0.0 {
        return Err(err(
            ErrorCode::NonPositiveCapacitance,
            capacitor.position,
            format!("capacitance must be > 0, got {capacitance}"),
        ));
    }
    let inductive_model = inductive_value(inductive)?;

    // topology
    let ring = [source, resistor, inductive, capacitor];
    if !doc
        .elements
        .iter()
        .any(|e| e.node_a == "0" || e.node_b == "0")
    {
        return Err(err(
            ErrorCode::MissingGround,
            source.position,
            "no element touches ground node `0`",
        ));
    }
    let order = walk_ring(&ring)?;

    let orientation = |name: &str| {
        order
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, o)| *o)
            .unwrap_or(1.0)
    };
    Ok(CompiledCircuit {
        source: waveform,
        resistance,
        inductive: inductive_model,
        capacitance,
        tran,
        outputs,
        inductive_orientation: orientation(&inductive.name),
        capacitor_orientation: orientation(&capacitor.name),
        loop_order: order.into_iter().map(|(n, _)| n).collect(),
    })
}

fn plain(e: &Element) -> f64 {
    match e.value {
        ElementValue::Number(v) => v,
        _ => unreachable!("parser only builds numbers for R and C"),
    }
}

fn inductive_value(e: &Element) -> Result<InductiveElement, NetlistError> {
    let bad = |msg: String| err(ErrorCode::InvalidValue, e.position, msg);
    match e.value {
        ElementValue::Number(l) if l > 0.0 => Ok(InductiveElement::Linear { henries: l }),
        ElementValue::Number(l) => Err(bad(format!("inductance must be > 0, got {l}"))),
        ElementValue::Staircase { l0, delta } => {
            if l0.is_nan() || l0 <= 0.0 {
                return Err(bad(format!("MLSTAIR l0 must be > 0, got {l0}")));
            }
            if !(0.0..1.0).contains(&delta) {
                return Err(bad(format!(
                    "MLSTAIR delta must lie in [0, 1), got {delta}"
                )));
            }
            Ok(InductiveElement::Staircase { l0, delta })
        }
        ElementValue::CoilCore { flux_scale, sw, m0 } => CoilCoreParams::new(flux_scale, sw, m0)
            .map(InductiveElement::CoilCore)
            .map_err(|e| bad(e.to_string())),
        ElementValue::Source(_) => unreachable!("sources are V elements"),
    }
}

/// Walks the ring from the source's first node and returns every element with
/// its orientation relative to the loop current.
fn walk_ring(ring: &[&Element; 4]) -> Result<Vec<(String, f64)>, NetlistError> {
    let non_series = |e: &Element, msg: String| err(ErrorCode::NonSeriesTopology, e.position, msg);

    let mut degree: HashMap<&str, usize> = HashMap::new();
    for e in ring {
        if e.node_a == e.node_b {
            return Err(non_series(
                e,
                format!("`{}` is shorted onto node `{}`", e.name, e.node_a),
            ));
        }
        *degree.entry(e.node_a.as_str()).or_default() += 1;
        *degree.entry(e.node_b.as_str()).or_default() += 1;
    }
    for e in ring {
        for node in [&e.node_a, &e.node_b] {
            if degree[node.as_str()] != 2 {
                return Err(non_series(
                    e,
                    format!(
                        "node `{node}` joins {} elements; a series loop needs exactly 2",
                        degree[node.as_str()]
                    ),
                ));
            }
        }
    }

    let source = ring[0];
    let mut order = vec![(source.name.clone(), 1.0)];
    let mut used = [true, false, false, false];
    let mut node = source.node_a.as_str();
    while order.len() < 4 {
        let next = (1..4).find(|&k| !used[k] && (ring[k].node_a == node || ring[k].node_b == node));
        let Some(k) = next else {
            return Err(non_series(
                source,
                "elements do not form a single closed loop".into(),
            ));
        };
        used[k] = true;
        let e = ring[k];
        if e.node_a == node {
            order.push((e.name.clone(), 1.0));
            node = e.node_b.as_str();
        } else {
            order.push((e.name.clone(), -1.0));
            node = e.node_a.as_str();
        }
    }
    if node != source.node_b {
        return Err(non_series(
            source,
            "elements do not close back on the source".into(),
        ));
    }
    Ok(order)
}
