//! One function per subcommand, each returning its rendered outputs.

use std::fs;
use std::path::Path;

use serde::Serialize;

use meminductor::amoeba::{run_sps, SpsConfig, SpsReport};
use meminductor::device::{rho_and_l_constant_current, CoilCoreParams};
use meminductor::engine::{
    analyze_second_order, compile_circuit, measure_ringdown_after, simulate_transient,
    InitialState, Ringdown, SecondOrderMetrics, Trace,
};
use meminductor::hysteresis::{
    fit_tanh_branches, loop_csv, loop_metrics, matched_sine_amplitude, simulate_mh_loop,
    LoopMetrics, LoopSpec, TanhBranchFit,
};
use meminductor::netlist::{
    parse_netlist, validate_circuit, CompiledCircuit, InductiveElement, Signal, Tran,
};
use meminductor::waveform::Waveform;

use crate::output::{OutputSet, PlotSpec};
use crate::overrides;
use crate::{AmoebaArgs, CliError, DeviceArgs, Drive, HysteresisArgs, RhoQArgs, SimulateArgs};

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::Simulation(format!("cannot serialize report: {e}")))
}

/// Reads, parses and validates a netlist, reporting `path:line:column`.
fn load_circuit(path: &Path) -> Result<CompiledCircuit, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let located = |e: meminductor::netlist::NetlistError| {
        CliError::Input(format!(
            "{}:{}:{}: {} [{}]",
            path.display(),
            e.line(),
            e.column(),
            e.message,
            e.code
        ))
    };
    let doc = parse_netlist(&text).map_err(located)?;
    validate_circuit(&doc).map_err(located)
}

fn trace_plot(extra: &'static [(usize, usize, &'static str)]) -> PlotSpec<'static> {
    PlotSpec {
        title: "transient response",
        xlabel: "time (s)",
        ylabel: "value",
        series: extra,
    }
}

const TRACE_SERIES: &[(usize, usize, &str)] = &[(1, 2, "v_in"), (1, 4, "v_out")];

#[derive(Serialize)]
struct Stage {
    inductance: f64,
    #[serde(flatten)]
    metrics: SecondOrderMetrics,
}

#[derive(Serialize)]
struct SimulateMetrics<'a> {
    loop_order: &'a [String],
    source: String,
    resistance: f64,
    inductive: InductiveElement,
    capacitance: f64,
    tran: Tran,
    samples: usize,
    outputs: Vec<&'static str>,
    /// Series-RLC analytics per inductance stage (inertial elements only).
    stages: Vec<Stage>,
    /// Ring-down of the loop current after the source goes quiet.
    ringdown: Option<Ringdown>,
    ringdown_note: Option<String>,
    peak_abs_v_out: f64,
}

/// Time after which the source no longer changes.
fn quiet_time(source: &Waveform, stop: f64) -> f64 {
    match source {
        Waveform::Pulse { width, .. } => {
            source.pulse_starts(stop).last().map_or(0.0, |s| s + width)
        }
        Waveform::Step { at, .. } => *at,
        Waveform::Pwl(points) => points.last().map_or(0.0, |p| p.0),
        _ => 0.0,
    }
}

pub fn simulate(args: &SimulateArgs) -> Result<OutputSet, CliError> {
    let mut circuit = load_circuit(&args.netlist)?;
    let pairs = overrides::split(&args.set)?;
    overrides::apply_circuit(&mut circuit, &pairs)?;
    let system =
        compile_circuit(&circuit, args.floor).map_err(|e| CliError::Input(e.to_string()))?;
    let trace = simulate_transient(&system, circuit.tran, InitialState::default())
        .map_err(|e| CliError::Simulation(e.to_string()))?;

    let stages = system
        .inductance_sequence()
        .into_iter()
        .map(|l| {
            analyze_second_order(circuit.resistance, l, circuit.capacitance).map(|metrics| Stage {
                inductance: l,
                metrics,
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Input(e.to_string()))?;
    let (ringdown, ringdown_note) = match measure_ringdown_after(
        &trace,
        Signal::I,
        quiet_time(&circuit.source, circuit.tran.stop),
    ) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let metrics = SimulateMetrics {
        loop_order: &circuit.loop_order,
        source: circuit.source.to_string(),
        resistance: circuit.resistance,
        inductive: circuit.inductive,
        capacitance: circuit.capacitance,
        tran: circuit.tran,
        samples: trace.len(),
        outputs: circuit.outputs.iter().map(|s| s.name()).collect(),
        stages,
        ringdown,
        ringdown_note,
        peak_abs_v_out: peak_abs(&trace, Signal::VOut),
    };

    let mut out = OutputSet::default();
    out.add_csv("trace.csv", trace.to_csv(), trace_plot(TRACE_SERIES));
    out.add("metrics.json", to_json(&metrics)?);
    Ok(out)
}

fn peak_abs(trace: &Trace, signal: Signal) -> f64 {
    trace
        .signal(signal)
        .map_or(0.0, |v| v.iter().fold(0.0, |m: f64, x| m.max(x.abs())))
}

fn device(args: &DeviceArgs) -> Result<CoilCoreParams, CliError> {
    CoilCoreParams::new(args.flux_scale, args.sw, args.m0)
        .map_err(|e| CliError::Input(e.to_string()))
}

#[derive(Serialize)]
struct HysteresisReport {
    params: CoilCoreParams,
    drive: String,
    metrics: Option<LoopMetrics>,
    metrics_note: Option<String>,
    tanh_branch_fit: Option<TanhBranchFit>,
}

pub fn hysteresis(args: &HysteresisArgs) -> Result<OutputSet, CliError> {
    let params = device(&args.device)?;
    let (drive, spec) = match args.drive {
        Drive::Sine => {
            let amp = args
                .amplitude
                .unwrap_or_else(|| matched_sine_amplitude(&params, args.freq));
            let spec = LoopSpec {
                cycles: args.cycles,
                samples_per_cycle: args.samples,
                window: args.window,
            };
            (Waveform::sine(amp, args.freq), spec)
        }
        Drive::Step => {
            let amp = args.amplitude.unwrap_or(1.0);
            // enough charge to cross from m0 to within 1e-8 of saturation
            let window = args
                .window
                .unwrap_or_else(|| 20.0 * params.sw_eff() / amp.abs().max(f64::MIN_POSITIVE));
            let spec = LoopSpec {
                cycles: 1,
                samples_per_cycle: args.samples,
                window: Some(window),
            };
            (
                Waveform::Step {
                    v0: 0.0,
                    v1: amp,
                    at: 0.0,
                },
                spec,
            )
        }
    };
    let samples = simulate_mh_loop(&drive, &params, &spec).map_err(|e| match e {
        meminductor::hysteresis::HysteresisError::Config(m) => CliError::Input(m),
        other => CliError::Simulation(other.to_string()),
    })?;
    // a step response is not a closed loop; metrics only apply to periodic drives
    let (metrics, metrics_note, fit) = match loop_metrics(&samples) {
        Ok(m) => (Some(m), None, fit_tanh_branches(&samples).ok()),
        Err(e) => (None, Some(e.to_string()), None),
    };
    let report = HysteresisReport {
        params,
        drive: drive.to_string(),
        metrics,
        metrics_note,
        tanh_branch_fit: fit,
    };
    let mut out = OutputSet::default();
    out.add_csv(
        "loop.csv",
        loop_csv(&samples),
        PlotSpec {
            title: "m-H loop",
            xlabel: "h (A)",
            ylabel: "m",
            series: &[(1, 2, "m")],
        },
    );
    out.add("loop_metrics.json", to_json(&report)?);
    Ok(out)
}

pub fn rho_q(args: &RhoQArgs) -> Result<OutputSet, CliError> {
    let params = device(&args.device)?;
    if args.points < 2 {
        return Err(CliError::Input(format!(
            "--points must be >= 2, got {}",
            args.points
        )));
    }
    let q_max = args.q_max.unwrap_or(10.0 * params.sw_eff());
    if !(q_max.is_finite() && q_max > 0.0) {
        return Err(CliError::Input(format!("--q-max must be > 0, got {q_max}")));
    }
    let mut csv = String::from("q,rho,L\n");
    for k in 0..args.points {
        let q = q_max * k as f64 / (args.points - 1) as f64;
        let (rho, l) = rho_and_l_constant_current(q, args.i0, &params)
            .map_err(|e| CliError::Input(e.to_string()))?;
        csv.push_str(&format!("{q:.12e},{rho:.12e},{l:.12e}\n"));
    }
    let mut out = OutputSet::default();
    out.add_csv(
        "rho_q.csv",
        csv,
        PlotSpec {
            title: "constitutive curve",
            xlabel: "q (C)",
            ylabel: "rho (Wb s), L (H)",
            series: &[(1, 2, "rho"), (1, 3, "L")],
        },
    );
    Ok(out)
}

#[derive(Serialize)]
struct AmoebaOutput<'a> {
    #[serde(flatten)]
    report: &'a SpsReport,
    config: SpsConfig,
}

pub fn amoeba(args: &AmoebaArgs) -> Result<OutputSet, CliError> {
    let mut cfg = SpsConfig::default();
    let fixed = match &args.template {
        Some(path) => {
            let circuit = load_circuit(path)?;
            let InductiveElement::Staircase { l0, delta } = circuit.inductive else {
                return Err(CliError::Input(format!(
                    "{}: the experiment needs an MLSTAIR element",
                    path.display()
                )));
            };
            cfg.resistance = circuit.resistance;
            cfg.capacitance = circuit.capacitance;
            cfg.l0 = l0;
            cfg.delta = delta;
            true
        }
        None => false,
    };
    let pairs = overrides::split(&args.set)?;
    overrides::apply_sps(&mut cfg, &pairs, fixed)?;
    cfg.validate().map_err(|e| CliError::Input(e.to_string()))?;
    let run = run_sps(&cfg).map_err(|e| CliError::Simulation(e.to_string()))?;

    let mut out = OutputSet::default();
    out.add(
        "sps_report.json",
        to_json(&AmoebaOutput {
            report: &run.report,
            config: cfg,
        })?,
    );
    out.add_csv(
        "trace.csv",
        run.trace.to_csv(),
        trace_plot(&[(1, 2, "v_in"), (1, 4, "v_out"), (1, 6, "l_eff")]),
    );
    Ok(out)
}
