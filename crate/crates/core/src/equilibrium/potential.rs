use serde::{Deserialize, Serialize};

/// Confining potential `V` with analytic derivatives up to third order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    /// `x² / 2`.
    Gaussian,
    /// `x⁴`.
    Quartic,
    /// `Σ_k coeffs[k-1] · x^{2k}`.
    EvenPolynomial { coeffs: Vec<f64> },
    /// `amplitude · cosh(rate · x)`.
    Cosh { amplitude: f64, rate: f64 },
    /// `|x|`; not C³ and with bounded derivative, kept as a negative control.
    AbsoluteValue,
}

impl Potential {
    pub fn name(&self) -> String {
        match self {
            Potential::Gaussian => "gaussian".into(),
            Potential::Quartic => "quartic".into(),
            Potential::EvenPolynomial { .. } => "even_polynomial".into(),
            Potential::Cosh { .. } => "cosh".into(),
            Potential::AbsoluteValue => "absolute_value".into(),
        }
    }

    /// `V^{(order)}(x)` for `order` in `0..=3`.
    pub fn derivative(&self, order: u32, x: f64) -> f64 {
        match self {
            Potential::Gaussian => match order {
                0 => 0.5 * x * x,
                1 => x,
                2 => 1.0,
                _ => 0.0,
            },
            Potential::Quartic => match order {
                0 => x.powi(4),
                1 => 4.0 * x.powi(3),
                2 => 12.0 * x * x,
                _ => 24.0 * x,
            },
            Potential::EvenPolynomial { coeffs } => {
                let mut s = 0.0;
                for (k, &c) in coeffs.iter().enumerate() {
                    let p = 2 * (k as i32 + 1);
                    if p < order as i32 {
                        continue;
                    }
                    let falling: f64 = (0..order as i32).map(|j| (p - j) as f64).product();
                    s += c * falling * x.powi(p - order as i32);
                }
                s
            }
            Potential::Cosh { amplitude, rate } => {
                let b = rate.powi(order as i32);
                if order % 2 == 0 {
                    amplitude * b * (rate * x).cosh()
                } else {
                    amplitude * b * (rate * x).sinh()
                }
            }
            Potential::AbsoluteValue => match order {
                0 => x.abs(),
                1 => {
                    if x > 0.0 {
                        1.0
                    } else if x < 0.0 {
                        -1.0
                    } else {
                        0.0
                    }
                }
                _ => 0.0,
            },
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(0, x)
    }
    pub fn d1(&self, x: f64) -> f64 {
        self.derivative(1, x)
    }
    pub fn d2(&self, x: f64) -> f64 {
        self.derivative(2, x)
    }
    pub fn d3(&self, x: f64) -> f64 {
        self.derivative(3, x)
    }

    /// Second derivative of the convex part in a convex-plus-bounded split of `V`.
    /// The built-ins are taken as their own convex part.
    pub fn convex_part_d2(&self, x: f64) -> f64 {
        self.d2(x)
    }
}
