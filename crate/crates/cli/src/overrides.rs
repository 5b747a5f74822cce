//! `--set key=value` handling.

use meminductor::amoeba::SpsConfig;
use meminductor::device::CoilCoreParams;
use meminductor::netlist::{parse_number, CompiledCircuit, InductiveElement};

use crate::CliError;

pub fn split(pairs: &[String]) -> Result<Vec<(String, f64)>, CliError> {
    pairs
        .iter()
        .map(|p| {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got `{p}`")))?;
            let value = parse_number(v.trim())
                .ok_or_else(|| CliError::Input(format!("--set {k}: `{v}` is not a number")))?;
            Ok((k.trim().to_ascii_lowercase(), value))
        })
        .collect()
}

pub const CIRCUIT_KEYS: &[&str] = &[
    "step",
    "stop",
    "resistance",
    "capacitance",
    "henries",
    "l0",
    "delta",
    "flux_scale",
    "sw",
    "m0",
];

/// Applies overrides to a validated circuit.
pub fn apply_circuit(
    circuit: &mut CompiledCircuit,
    pairs: &[(String, f64)],
) -> Result<(), CliError> {
    for (key, value) in pairs {
        let value = *value;
        let mismatch = || {
            CliError::Input(format!(
                "--set {key}: the circuit's inductive element has no such parameter"
            ))
        };
        match (key.as_str(), &mut circuit.inductive) {
            ("step", _) => circuit.tran.step = value,
            ("stop", _) => circuit.tran.stop = value,
            ("resistance", _) => circuit.resistance = value,
            ("capacitance", _) => circuit.capacitance = value,
            ("henries", InductiveElement::Linear { henries }) => *henries = value,
            ("l0", InductiveElement::Staircase { l0, .. }) => *l0 = value,
            ("delta", InductiveElement::Staircase { delta, .. }) => *delta = value,
            ("flux_scale" | "sw" | "m0", InductiveElement::CoilCore(p)) => {
                let (mut f, mut s, mut m) = (p.flux_scale(), p.sw_eff(), p.m0());
                match key.as_str() {
                    "flux_scale" => f = value,
                    "sw" => s = value,
                    _ => m = value,
                }
                *p = CoilCoreParams::new(f, s, m)
                    .map_err(|e| CliError::Input(format!("--set {key}: {e}")))?;
            }
            (k, _) if CIRCUIT_KEYS.contains(&k) => return Err(mismatch()),
            (k, _) => {
                return Err(CliError::Usage(format!(
                    "unknown override `{k}`; expected one of {}",
                    CIRCUIT_KEYS.join(", ")
                )))
            }
        }
    }
    Ok(())
}

pub const SPS_KEYS: &[&str] = &[
    "f_sti",
    "n_train",
    "n_probe",
    "pulse_width",
    "amplitude",
    "resistance",
    "capacitance",
    "l0",
    "delta",
    "steps_per_period",
    "window",
    "floor_fraction",
];

fn count(key: &str, value: f64) -> Result<u32, CliError> {
    if value.fract() == 0.0 && (0.0..=u32::MAX as f64).contains(&value) {
        Ok(value as u32)
    } else {
        Err(CliError::Input(format!(
            "--set {key}: expected a non-negative integer, got {value}"
        )))
    }
}

/// Applies overrides to an experiment configuration.
///
/// Unless given explicitly (or fixed by a template), `pulse_width` follows
/// `0.1 / f_sti` and `capacitance` is retuned to the final inductance.
pub fn apply_sps(
    cfg: &mut SpsConfig,
    pairs: &[(String, f64)],
    capacitance_fixed: bool,
) -> Result<(), CliError> {
    let mut explicit_c = capacitance_fixed;
    let mut explicit_width = false;
    for (key, value) in pairs {
        let value = *value;
        match key.as_str() {
            "f_sti" => cfg.f_sti = value,
            "n_train" => cfg.n_train = count(key, value)?,
            "n_probe" => cfg.n_probe = count(key, value)?,
            "pulse_width" => {
                cfg.pulse_width = value;
                explicit_width = true;
            }
            "amplitude" => cfg.amplitude = value,
            "resistance" => cfg.resistance = value,
            "capacitance" => {
                cfg.capacitance = value;
                explicit_c = true;
            }
            "l0" => cfg.l0 = value,
            "delta" => cfg.delta = value,
            "steps_per_period" => cfg.steps_per_period = count(key, value)?,
            "window" => cfg.window = value,
            "floor_fraction" => cfg.floor_fraction = value,
            k => {
                return Err(CliError::Usage(format!(
                    "unknown override `{k}`; expected one of {}",
                    SPS_KEYS.join(", ")
                )))
            }
        }
    }
    if !explicit_width {
        cfg.pulse_width = 0.1 / cfg.f_sti;
    }
    if !explicit_c {
        cfg.capacitance = cfg.tuned_capacitance();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_accepts_suffixes() {
        let p = split(&["Resistance=4k7".into()]);
        assert!(matches!(p, Err(CliError::Input(_))));
        let p = split(&["Resistance=4.7k".into()]).unwrap();
        assert_eq!(p, [("resistance".to_string(), 4700.0)]);
        assert!(matches!(split(&["r".into()]), Err(CliError::Usage(_))));
    }

    #[test]
    fn sps_retunes_capacitance() {
        let mut cfg = SpsConfig::default();
        apply_sps(&mut cfg, &[("f_sti".into(), 50.0)], false).unwrap();
        assert_eq!(cfg.pulse_width, 0.1 / 50.0);
        assert!((cfg.capacitance / (4.0 * SpsConfig::default().capacitance) - 1.0).abs() < 1e-12);
        assert!(matches!(
            apply_sps(&mut cfg, &[("bogus".into(), 1.0)], false),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(
            apply_sps(&mut cfg, &[("n_train".into(), 1.5)], false),
            Err(CliError::Input(_))
        ));
    }
}
