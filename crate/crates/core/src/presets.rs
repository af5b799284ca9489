//! Builders for the reference setups: unit interval, interface at 0.5, constant diffusion kernel.

use crate::config::{CouplingConfig, KernelSpec, SolverParams};
use crate::grid::{BlendingShape, DecompositionMode, DecompositionSpec, Interval};
use crate::kernels::{HorizonKind, KernelFamily};
use crate::operators::{HorizonSpec, Method, MethodSpec};

pub fn spec(mode: DecompositionMode, lo: f64, hi: f64, delta: f64) -> DecompositionSpec {
    DecompositionSpec {
        mode,
        omega: Interval::new(lo, hi),
        delta,
        interface: None,
        blend: None,
        transition_width: None,
        overlap: None,
    }
}

pub fn config(decomposition: DecompositionSpec, h: f64, method: MethodSpec) -> CouplingConfig {
    CouplingConfig {
        decomposition,
        h,
        kernel: KernelSpec::diffusion(KernelFamily::Constant),
        method,
        solver: SolverParams::default(),
    }
}

pub fn whole(method: Method, delta: f64, h: f64) -> CouplingConfig {
    let mut s = spec(DecompositionMode::SharpInterface, 0.0, 1.0, delta);
    s.interface = Some(0.5);
    config(s, h, MethodSpec::new(method))
}

pub fn splice(delta: f64, h: f64) -> CouplingConfig {
    whole(Method::Splice, delta, h)
}

pub fn blended(method: Method, shape: BlendingShape, delta: f64, h: f64) -> CouplingConfig {
    let mut s = spec(DecompositionMode::BlendedTransition, 0.0, 1.0, delta);
    s.blend = Some(Interval::new(0.4, 0.6));
    config(s, h, MethodSpec::new(method).with_blending(shape))
}

pub fn qnl(delta: f64, h: f64) -> CouplingConfig {
    let mut s = spec(DecompositionMode::BlendedTransition, 0.0, 1.0, delta);
    s.interface = Some(0.5);
    config(s, h, MethodSpec::new(Method::Qnl))
}

pub fn variable(method: Method, kind: HorizonKind, delta: f64, h: f64, width: f64) -> CouplingConfig {
    let mut s = spec(DecompositionMode::VariableHorizon, 0.0, 1.0, delta);
    s.interface = Some(0.5);
    s.transition_width = Some(width);
    let hs = HorizonSpec { kind, ramp_width: None, floor: None };
    config(s, h, MethodSpec::new(method).with_horizon(hs))
}

pub fn overlap(method: Method, lo: f64, hi: f64, delta: f64, h: f64) -> CouplingConfig {
    let mut s = spec(DecompositionMode::Overlap, 0.0, 1.0, delta);
    s.overlap = Some(Interval::new(lo, hi));
    config(s, h, MethodSpec::new(method))
}

/// Shrinking-horizon setup on `(-1, 1)` with the interface at 0; `SmoothC2` ramps over width 1.
pub fn shrinking(kind: HorizonKind, delta: f64, h: f64) -> CouplingConfig {
    let mut s = spec(DecompositionMode::VariableHorizon, -1.0, 1.0, delta);
    s.interface = Some(0.0);
    let ramp_width = (kind == HorizonKind::SmoothC2).then_some(1.0);
    let hs = HorizonSpec { kind, ramp_width, floor: None };
    config(s, h, MethodSpec::new(Method::ShrinkingHorizon).with_horizon(hs))
}
