//! Coil-core meminductor toolkit: device laws, hysteresis loops, a netlist
//! dialect for a single series loop, a fixed-step transient engine, and the
//! stimulus-anticipation experiment built on top of it.

pub mod amoeba;
pub mod device;
pub mod engine;
pub mod hysteresis;
pub mod netlist;
pub mod ode;
pub mod waveform;
