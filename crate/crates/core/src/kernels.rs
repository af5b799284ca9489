//! Scaled nonlocal kernels, micromoduli, horizon functions and discrete moment normalisation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelFamily {
    Constant,
    InverseDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    Diffusion,
    Peridynamic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub family: KernelFamily,
    pub delta: f64,
    pub model: Model,
    /// Young's modulus; only read for the peridynamic model.
    #[serde(default = "unit")]
    pub youngs_modulus: f64,
}

fn unit() -> f64 {
    1.0
}

impl Kernel {
    pub fn new(family: KernelFamily, model: Model, delta: f64) -> Self {
        Self { family, delta, model, youngs_modulus: 1.0 }
    }

    pub fn with_modulus(mut self, e: f64) -> Self {
        self.youngs_modulus = e;
        self
    }

    /// Coefficient `s` of the local limit `s u''`.
    pub fn stiffness(&self) -> f64 {
        match self.model {
            Model::Diffusion => 1.0,
            Model::Peridynamic => self.youngs_modulus,
        }
    }

    /// Value multiplying `u(x+xi) - u(x)` in the operator: gamma, or lambda * xi^2.
    pub fn bond(&self, xi: f64) -> Result<f64> {
        let k = eval_kernel(self, xi)?;
        Ok(match self.model {
            Model::Diffusion => k,
            Model::Peridynamic => k * xi * xi,
        })
    }

    /// Unnormalised bond shape with no support cut-off; used by per-point normalisation.
    pub fn bond_shape(&self, xi: f64) -> f64 {
        let a = xi.abs();
        let base = match self.family {
            KernelFamily::Constant => 1.0,
            KernelFamily::InverseDistance => 1.0 / a,
        };
        match self.model {
            Model::Diffusion => base,
            Model::Peridynamic => base * a * a,
        }
    }
}

/// gamma(xi) for diffusion, lambda(xi) for peridynamics, each scaled to the local limit.
pub fn eval_kernel(kernel: &Kernel, xi: f64) -> Result<f64> {
    let a = xi.abs();
    let d = kernel.delta;
    if kernel.family == KernelFamily::InverseDistance && a == 0.0 {
        return Err(Error::ZeroBond);
    }
    if a > d {
        return Ok(0.0);
    }
    let e = kernel.youngs_modulus;
    Ok(match (kernel.model, kernel.family) {
        (Model::Diffusion, KernelFamily::Constant) => 3.0 / (d * d * d),
        (Model::Diffusion, KernelFamily::InverseDistance) => 2.0 / (d * d) / a,
        (Model::Peridynamic, KernelFamily::Constant) => 5.0 * e / d.powi(5),
        (Model::Peridynamic, KernelFamily::InverseDistance) => 4.0 * e / d.powi(4) / a,
    })
}

/// Normalised one-sided stencil `{h, 2h, ..., m h}`; the mirror side is implied by symmetry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stencil {
    pub m: usize,
    pub h: f64,
    /// Rescaled quadrature weights `w_j`, `j = 1..=m`.
    pub weights: Vec<f64>,
    /// Bond coefficients `a_j = w_j * bond(xi_j)`.
    pub coef: Vec<f64>,
    pub scale: f64,
    /// `sum over j = +-1..+-m of w_j * kernel(xi_j) * xi_j^k`, k = 0..=4.
    pub moments: [f64; 5],
}

impl Stencil {
    pub fn xi(&self, j: usize) -> f64 {
        j as f64 * self.h
    }
}

pub fn discrete_moments(kernel: &Kernel, h: f64) -> Result<Stencil> {
    let m = crate::grid::horizon_ratio(kernel.delta, h)
        .map_err(|_| Error::NonIntegerRatio { delta: kernel.delta, h, ratio: kernel.delta / h })?;
    if m < 2 {
        return Err(Error::HorizonNotResolved { m });
    }
    let raw: Vec<f64> = (1..=m).map(|j| if j == m { 0.5 * h } else { h }).collect();
    let values: Vec<f64> = (1..=m)
        .map(|j| eval_kernel(kernel, j as f64 * h))
        .collect::<Result<_>>()?;
    let moments_of = |w: &[f64]| {
        let mut mo = [0.0; 5];
        for (k, slot) in mo.iter_mut().enumerate() {
            let mut s = 0.0;
            for j in 1..=m {
                let xi = j as f64 * h;
                s += w[j - 1] * values[j - 1] * (xi.powi(k as i32) + (-xi).powi(k as i32));
            }
            *slot = s;
        }
        mo
    };
    let raw_moments = moments_of(&raw);
    let scale = match kernel.model {
        Model::Diffusion => 2.0 / raw_moments[2],
        Model::Peridynamic => 2.0 * kernel.youngs_modulus / raw_moments[4],
    };
    let weights: Vec<f64> = raw.iter().map(|w| w * scale).collect();
    let moments = moments_of(&weights);
    let coef = (1..=m)
        .map(|j| {
            let xi = j as f64 * h;
            Ok(weights[j - 1] * kernel.bond(xi)?)
        })
        .collect::<Result<_>>()?;
    Ok(Stencil { m, h, weights, coef, scale, moments })
}

/// Smooth lower bound on a horizon: identity above `2h`, a C2 quartic down to `h` at zero.
pub fn smooth_floor(delta: f64, h: f64) -> f64 {
    let t = delta / h;
    if t >= 2.0 {
        delta
    } else {
        let t = t.max(0.0);
        h * (1.0 + 0.25 * t.powi(3) - 0.0625 * t.powi(4))
    }
}

/// Integral of the hat function at `j h` over `[0, r]`, with `t = r - j h`.
fn hat_volume(t: f64, h: f64) -> f64 {
    if t <= -h {
        0.0
    } else if t <= 0.0 {
        (t + h) * (t + h) / (2.0 * h)
    } else if t <= h {
        h - (h - t) * (h - t) / (2.0 * h)
    } else {
        h
    }
}

/// One-sided coefficients for a horizon `r` that need not be a multiple of `h`,
/// normalised so that `sum_j a_j xi_j^2 = s`.
pub fn variable_coefficients(kernel: &Kernel, r: f64, h: f64) -> Vec<f64> {
    let jmax = (r / h + 1.0).ceil() as usize;
    let mut a: Vec<f64> = (1..=jmax)
        .map(|j| {
            let xi = j as f64 * h;
            hat_volume(r - xi, h) * kernel.bond_shape(xi)
        })
        .collect();
    while a.last() == Some(&0.0) {
        a.pop();
    }
    let m2: f64 = a
        .iter()
        .enumerate()
        .map(|(k, v)| v * ((k + 1) as f64 * h).powi(2))
        .sum();
    let scale = kernel.stiffness() / m2;
    a.iter_mut().for_each(|v| *v *= scale);
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HorizonKind {
    Constant,
    PiecewiseLinear,
    SmoothC2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizonFunction {
    pub kind: HorizonKind,
    pub delta_max: f64,
    pub interface: f64,
    /// Ramp width for `SmoothC2`.
    pub ramp_width: f64,
    pub floor: f64,
}

impl HorizonFunction {
    pub fn eval(&self, x: f64) -> f64 {
        eval_horizon(self, x)
    }
}

fn quintic(t: f64) -> f64 {
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

pub fn eval_horizon(hf: &HorizonFunction, x: f64) -> f64 {
    let dist = (x - hf.interface).abs();
    let raw = match hf.kind {
        HorizonKind::Constant => hf.delta_max,
        HorizonKind::PiecewiseLinear => dist.min(hf.delta_max),
        HorizonKind::SmoothC2 => hf.delta_max * quintic((dist / hf.ramp_width).min(1.0)),
    };
    raw.max(hf.floor)
}
