use std::f64::consts::PI;

use loggas::grid_numerics::quadrature::integrate_real;
use loggas::grid_numerics::*;
use proptest::prelude::*;

fn packet(center: f64, width: f64, freq: f64) -> impl Fn(f64) -> f64 {
    move |x| (-(x - center).powi(2) / (2.0 * width * width)).exp() * (freq * x).cos()
}

/// Principal value through the symmetric form `∫_0^∞ (f(x+t) - f(x-t)) / t dt`.
fn hilbert_oracle(f: impl Fn(f64) -> f64, x: f64, reach: f64) -> f64 {
    integrate_real(
        |t| if t == 0.0 { 0.0 } else { (f(x + t) - f(x - t)) / t },
        0.0,
        reach,
        1e-14,
        1e-13,
        4000,
    )
    .0
}

#[test]
fn grid_requires_power_of_two_resolution() {
    let err = build_grid(8.0, 1000).err().unwrap();
    assert!(matches!(err, loggas::Error::InvalidResolution(_)));
    assert!(err.to_string().contains("n_points must be a power of two"));
    assert!(build_grid(8.0, 128).is_err());
    assert!(build_grid(-1.0, 1024).is_err());
    assert!(build_uniform_grid(5.0, 4).is_err());
    let g = build_grid(8.0, 1024).unwrap();
    assert!((g.spacing() - 16.0 / 1023.0).abs() < 1e-15);
    let g = build_grid(12.0, 4096).unwrap();
    assert_eq!(g.x(0), -12.0);
    assert_eq!(g.x(4095), 12.0);
}

#[test]
fn grid_has_symmetric_nodes_and_trapezoid_weights() {
    let g = build_uniform_grid(3.0, 61).unwrap();
    assert_eq!(g.x(0), -3.0);
    assert!((g.x(60) - 3.0).abs() < 1e-14);
    assert!((g.spacing() - 0.1).abs() < 1e-15);
    let total: f64 = g.weights().iter().sum();
    assert!((total - 6.0).abs() < 1e-12);
}

#[test]
fn trapezoid_integrates_gaussian_spectrally() {
    let g = build_uniform_grid(10.0, 401).unwrap();
    let f = g.sample(|x| (-x * x / 2.0).exp());
    assert!((f.integral() - (2.0 * PI).sqrt()).abs() < 1e-13);
}

#[test]
fn hilbert_of_poisson_kernel() {
    // Tails of 1/(1+t²) beyond 200 perturb the result on [-4, 4] by about 1e-7.
    let g = build_uniform_grid(200.0, 8193).unwrap();
    let f = g.sample(|t| 1.0 / (PI * (1.0 + t * t)));
    let hf = hilbert_transform(&f);
    let mut worst: f64 = 0.0;
    for (i, &x) in g.nodes().iter().enumerate() {
        if x.abs() <= 4.0 {
            worst = worst.max((hf.values()[i] + x / (1.0 + x * x)).abs());
        }
    }
    assert!(worst <= 1e-6, "max error {worst:e}");
}

#[test]
fn hilbert_matches_quadrature_oracle_for_gaussian() {
    let g = build_uniform_grid(12.0, 1025).unwrap();
    let gauss = |t: f64| (-t * t).exp();
    let hf = hilbert_transform(&g.sample(gauss));
    for &x in &[-3.0, -0.75, 0.0, 0.5, 2.25] {
        let i = g.nearest(x);
        let expected = hilbert_oracle(gauss, g.x(i), 12.0);
        assert!((hf.values()[i] - expected).abs() < 1e-10, "x={x}");
    }
    // Far field of a unit-mass input is -mass/x.
    assert!((hf.values()[g.nearest(10.0)] * 10.0 + PI.sqrt()).abs() < 0.02);
}

#[test]
fn hilbert_involution_and_isometry_on_wave_packets() {
    let g = build_uniform_grid(16.0, 2049).unwrap();
    for &(c, w, k) in &[(0.0, 1.0, 8.0), (0.5, 1.5, 6.0), (-1.0, 0.8, 12.0)] {
        let f = g.sample(packet(c, w, k));
        let hf = hilbert_transform(&f);
        let hhf = hilbert_transform(&hf);
        let err = hhf.add(&f.scale(PI * PI)).l2_norm() / (PI * PI * f.l2_norm());
        assert!(err <= 1e-6, "involution {err:e}");
        let iso = (hf.l2_norm() - PI * f.l2_norm()).abs() / (PI * f.l2_norm());
        assert!(iso <= 1e-6, "isometry {iso:e}");
        let dh = derivative(&hf);
        let hd = hilbert_transform(&derivative(&f));
        let comm = dh.sub(&hd).l2_norm() / hd.l2_norm();
        assert!(comm <= 1e-5, "commutation {comm:e}");
    }
}

#[test]
fn hilbert_is_skew_adjoint() {
    let g = build_uniform_grid(10.0, 1001).unwrap();
    let f = g.sample(|x| (-(x - 0.3).powi(2)).exp());
    let h = g.sample(|x| x * (-x * x / 3.0).exp());
    let lhs = hilbert_transform(&f).mul(&h).integral();
    let rhs = f.mul(&hilbert_transform(&h)).integral();
    assert!((lhs + rhs).abs() <= 1e-8 * (1.0 + lhs.abs()));
}

#[test]
fn log_potential_of_uniform_density_is_exact() {
    let g = build_uniform_grid(1.0, 201).unwrap();
    let f = g.sample(|_| 0.5);
    let u = log_potential(&f);
    assert!((u.values()[100] - 1.0).abs() < 1e-8);
    for &i in &[13usize, 57, 150, 190] {
        let x = g.x(i);
        let exact = -0.5 * ((1.0 + x) * (1.0 + x).ln() + (1.0 - x) * (1.0 - x).ln() - 2.0);
        assert!((u.values()[i] - exact).abs() < 1e-9, "x={x}");
    }
}

#[test]
fn log_potential_matches_quadrature_oracle() {
    let g = build_uniform_grid(10.0, 2001).unwrap();
    let dens = |y: f64| (-y * y / 2.0).exp() / (2.0 * PI).sqrt();
    let f = g.sample(dens);
    let lin = log_potential(&f);
    let refined = log_potential_refined(&f);
    for &x in &[0.0, 0.7, -2.3, 4.1] {
        let i = g.nearest(x);
        let xi = g.x(i);
        let (left, _) = integrate_real(|y| -(xi - y).abs().ln() * dens(y), -10.0, xi, 1e-15, 1e-14, 4000);
        let (right, _) = integrate_real(|y| -(y - xi).abs().ln() * dens(y), xi, 10.0, 1e-15, 1e-14, 4000);
        let exact = left + right;
        assert!((lin.values()[i] - exact).abs() < 1e-5, "linear x={x}");
        assert!((refined.values()[i] - exact).abs() < 5e-8, "refined x={x}: {:e}", refined.values()[i] - exact);
    }
}

#[test]
fn log_potential_derivative_is_hilbert_transform() {
    let g = build_uniform_grid(10.0, 2001).unwrap();
    let f = g.sample(|y| (-y * y / 2.0).exp() / (2.0 * PI).sqrt());
    let du = derivative(&log_potential(&f));
    let hf = hilbert_transform(&f);
    let h = g.spacing();
    for i in (200..1800).step_by(50) {
        assert!((du.values()[i] - hf.values()[i]).abs() < 5.0 * h * h);
    }
}

#[test]
fn half_norm_of_gaussian_matches_frequency_quadrature() {
    let g = build_uniform_grid(10.0, 801).unwrap();
    let f = g.sample(|x| (-x * x / 2.0).exp() / (2.0 * PI).sqrt());
    // |F f(t)|² = exp(-t²), so the pairing is ∫ |t| exp(-t²) dt.
    let (oracle, _) = integrate_real(|t| 2.0 * t * (-t * t).exp(), 0.0, 40.0, 1e-15, 1e-14, 2000);
    assert!((half_norm(&f) - oracle).abs() < 1e-8);
}

#[test]
fn half_norm_scaling_covariance() {
    let g = build_uniform_grid(12.0, 1201).unwrap();
    let base = |x: f64| (-(x - 0.2).powi(2)).exp() * (1.0 + 0.3 * x);
    let f = g.sample(base);
    for &a in &[0.5, 1.7, 2.5] {
        // Mass-preserving dilation: F[a f(a·)](t) = F f(t/a), so the pairing scales by a².
        let fa = g.sample(|x| a * base(a * x));
        let ratio = half_norm(&fa) / (a * a * half_norm(&f));
        assert!((ratio - 1.0).abs() < 1e-6, "a={a} ratio={ratio}");
        // L²-preserving dilation scales it by a.
        let fb = g.sample(|x| a.sqrt() * base(a * x));
        let ratio = half_norm(&fb) / (a * half_norm(&f));
        assert!((ratio - 1.0).abs() < 1e-6, "a={a} ratio={ratio}");
    }
}

#[test]
fn log_energy_distance_of_shifted_gaussians() {
    let g = build_uniform_grid(10.0, 1001).unwrap();
    let gauss = |m: f64| move |x: f64| (-(x - m).powi(2) / 2.0).exp() / (2.0 * PI).sqrt();
    let d = fourier_distance_d(&g.sample(gauss(0.0)), &g.sample(gauss(0.1))).unwrap();
    // |F[f - g](t)|² = exp(-t²)·2(1 - cos(0.1 t)).
    let (oracle, _) = integrate_real(
        |t| if t == 0.0 { 0.0 } else { (-t * t).exp() * 2.0 * (1.0 - (0.1 * t).cos()) / t },
        0.0,
        40.0,
        1e-16,
        1e-14,
        2000,
    );
    assert!((d.distance.powi(2) / oracle - 1.0).abs() < 1e-6);
    assert!((d.lipschitz_half_bound - d.distance / (2f64.sqrt() * PI)).abs() < 1e-15);
}

#[test]
fn log_energy_distance_matches_log_energy_form() {
    // D² = -∬ ln|x - y| dν dν for ν = f - g.
    let g = build_uniform_grid(10.0, 2001).unwrap();
    let f = g.sample(|x| (-x * x / 2.0).exp() / (2.0 * PI).sqrt());
    let h = g.sample(|x| (-(x * x)).exp() / PI.sqrt());
    let nu = f.sub(&h);
    let energy = log_potential_refined(&nu).mul(&nu).integral();
    let d = fourier_distance_d(&f, &h).unwrap().distance;
    assert!((d * d - energy).abs() < 1e-7 * energy);
}

#[test]
fn log_energy_distance_rejects_mass_mismatch() {
    let g = build_uniform_grid(8.0, 401).unwrap();
    let f = g.sample(|x| (-x * x).exp());
    let h = f.scale(1.01);
    assert!(fourier_distance_d(&f, &h).is_err());
}

#[test]
fn derivative_stencils_are_eighth_order() {
    let g = build_uniform_grid(3.0, 301).unwrap();
    let f = g.sample(|x| (1.3 * x).sin());
    let d = derivative(&f);
    let dd = second_derivative(&f);
    for i in 0..g.len() {
        let x = g.x(i);
        assert!((d.values()[i] - 1.3 * (1.3 * x).cos()).abs() < 1e-10);
        assert!((dd.values()[i] + 1.69 * (1.3 * x).sin()).abs() < 1e-7);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn half_norm_is_nonnegative(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -1.5f64..1.5, w in 0.3f64..2.0) {
        let g = build_uniform_grid(10.0, 257).unwrap();
        let f = g.sample(|x| a * (-(x - c).powi(2) / (w * w)).exp() + b * x * (-x * x).exp());
        prop_assert!(half_norm(&f) >= 0.0);
    }

    #[test]
    fn hilbert_pairing_is_antisymmetric(c1 in -2.0f64..2.0, c2 in -2.0f64..2.0, w in 0.4f64..1.5) {
        let g = build_uniform_grid(10.0, 257).unwrap();
        let f = g.sample(|x| (-(x - c1).powi(2) / (w * w)).exp());
        let h = g.sample(|x| (-(x - c2).powi(2)).exp() * x);
        let lhs = hilbert_transform(&f).mul(&h).integral();
        let rhs = f.mul(&hilbert_transform(&h)).integral();
        prop_assert!((lhs + rhs).abs() <= 1e-8 * (1.0 + lhs.abs()));
    }

    #[test]
    fn half_inner_is_symmetric(c1 in -2.0f64..2.0, c2 in -2.0f64..2.0) {
        let g = build_uniform_grid(8.0, 200).unwrap();
        let f = g.sample(|x| (-(x - c1).powi(2)).exp());
        let h = g.sample(|x| (-(x - c2).powi(2)).exp() * (1.0 + x));
        let a = half_inner(&f, &h);
        let b = half_inner(&h, &f);
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
    }
}
