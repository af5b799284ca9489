//! Registry of named analytic functions used for loads, boundary data and reference solutions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum AnalyticFunction {
    /// `sum_i c_i x^i`.
    Polynomial { coefficients: Vec<f64> },
    /// `amplitude * sin(wavenumber * pi * x)`.
    Sin {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        wavenumber: f64,
    },
    Const { value: f64 },
    /// Triangular bump of unit integral times `magnitude`, centred at `location`.
    Pointload { location: f64, magnitude: f64, width: f64 },
}

fn one() -> f64 {
    1.0
}

impl AnalyticFunction {
    /// `1 + x + ... + x^p`.
    pub fn patch_polynomial(degree: usize) -> Self {
        AnalyticFunction::Polynomial { coefficients: vec![1.0; degree + 1] }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AnalyticFunction::Polynomial { .. } => "polynomial",
            AnalyticFunction::Sin { .. } => "sin",
            AnalyticFunction::Const { .. } => "const",
            AnalyticFunction::Pointload { .. } => "pointload",
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.nth_derivative(x, 0)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.nth_derivative(x, 1)
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        self.nth_derivative(x, 2)
    }

    pub fn nth_derivative(&self, x: f64, order: usize) -> f64 {
        match self {
            AnalyticFunction::Polynomial { coefficients } => {
                let mut value = 0.0;
                for (i, c) in coefficients.iter().enumerate().skip(order) {
                    let falling: f64 = (i - order + 1..=i).map(|k| k as f64).product();
                    value += c * falling * x.powi((i - order) as i32);
                }
                value
            }
            AnalyticFunction::Sin { amplitude, wavenumber } => {
                let k = wavenumber * PI;
                let (s, c) = (k * x).sin_cos();
                amplitude
                    * k.powi(order as i32)
                    * match order % 4 {
                        0 => s,
                        1 => c,
                        2 => -s,
                        _ => -c,
                    }
            }
            AnalyticFunction::Const { value } => {
                if order == 0 {
                    *value
                } else {
                    0.0
                }
            }
            AnalyticFunction::Pointload { location, magnitude, width } => {
                let t = (x - location) / width;
                if t.abs() >= 1.0 {
                    return 0.0;
                }
                match order {
                    0 => magnitude * (1.0 - t.abs()) / width,
                    1 => -magnitude * t.signum() / (width * width),
                    _ => 0.0,
                }
            }
        }
    }
}
