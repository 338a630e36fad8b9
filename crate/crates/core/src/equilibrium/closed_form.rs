//! Closed form of the Gaussian-potential equilibrium density:
//! `ρ(x) = e^{-x²/2} / (√(2π) |f̂(x)|²)` with
//! `f̂(x) = √(P/Γ(P)) ∫_0^∞ t^{P-1} e^{-t²/2 + ixt} dt`.

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::grid_numerics::quadrature::integrate_complex;

/// Rotation of the integration ray into the upper half plane; the integrand then
/// decays without oscillating, so the quadrature does not suffer cancellation.
const RAY_ANGLE: f64 = std::f64::consts::PI / 8.0;

/// `|f̂(x)|²` for `P > 0`.
pub fn fourier_factor_sq(coupling: f64, x: f64) -> f64 {
    let p = coupling;
    let x = x.abs();
    let rot = Complex64::from_polar(1.0, RAY_ANGLE);
    let rot2 = rot * rot;
    let log_norm = 0.5 * (p.ln() - ln_gamma(p));
    let c = (2.0 * RAY_ANGLE).cos();
    let reach = ((2.0 * (p - 1.0).max(0.0) / c).sqrt() + (2.0 * 90.0 / c).sqrt()).max(4.0);
    let value = if p < 1.0 {
        // r = s^{1/P} removes the r^{P-1} endpoint singularity.
        let upper = reach.powf(p);
        let f = |s: f64| {
            if s == 0.0 {
                return Complex64::from_polar(1.0, 0.0) * (log_norm - p.ln()).exp();
            }
            let r = s.powf(1.0 / p);
            let e = -0.5 * r * r * rot2 + Complex64::i() * x * r * rot + (log_norm - p.ln());
            e.exp()
        };
        integrate_complex(f, 0.0, upper, 1e-15, 1e-13, 20000).0
    } else {
        let f = |r: f64| {
            if r == 0.0 {
                return if p == 1.0 {
                    log_norm.exp().into()
                } else {
                    Complex64::new(0.0, 0.0)
                };
            }
            let e = (p - 1.0) * r.ln() - 0.5 * r * r * rot2 + Complex64::i() * x * r * rot
                + log_norm;
            e.exp()
        };
        integrate_complex(f, 0.0, reach, 1e-15, 1e-13, 20000).0
    };
    (value * Complex64::from_polar(1.0, p * RAY_ANGLE)).norm_sqr()
}

/// Closed-form equilibrium density of `V = x²/2` at coupling `P >= 0`.
pub fn gaussian_closed_form_density(coupling: f64, x: f64) -> f64 {
    let gauss = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if coupling == 0.0 {
        gauss
    } else {
        gauss / fourier_factor_sq(coupling, x)
    }
}
