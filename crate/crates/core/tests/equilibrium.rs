use std::f64::consts::PI;

use loggas::equilibrium::*;
use loggas::grid_numerics::quadrature::integrate_real;
use loggas::grid_numerics::*;
use proptest::prelude::*;

fn solve(v: &Potential, p: f64, n: usize) -> EquilibriumMeasure {
    let l = tail_half_width(v, p);
    let g = build_grid(l, n).unwrap();
    solve_equilibrium(v, p, &g, &EquilibriumOptions::default()).unwrap()
}

#[test]
fn zero_coupling_gaussian_is_standard_normal() {
    let eq = solve(&Potential::Gaussian, 0.0, 2048);
    for (i, &x) in eq.grid.nodes().iter().enumerate() {
        let exact = (-x * x / 2.0).exp() / (2.0 * PI).sqrt();
        assert!((eq.density[i] - exact).abs() < 1e-10);
    }
    assert!((eq.lambda - (2.0 * PI).sqrt().ln()).abs() < 1e-10);
    assert_eq!(eq.report.iterations, 1);
    assert_eq!(eq.report.residual, 0.0);
}

#[test]
fn zero_coupling_quartic_normaliser() {
    let eq = solve(&Potential::Quartic, 0.0, 2048);
    // ∫ exp(-x⁴) dx = 2Γ(5/4) = Γ(1/4)/2.
    let z = statrs::function::gamma::gamma(0.25) / 2.0;
    assert!((eq.lambda - z.ln()).abs() < 1e-10);
}

#[test]
fn closed_form_matches_frozen_reference_values() {
    // Reference values from an independent scipy quadrature of the defining integral.
    for &(p, rho0) in &[(1.0, 0.2539745437369641), (0.5, 0.3042971194499093), (4.0, 0.14960335515053727)] {
        let v = gaussian_closed_form_density(p, 0.0);
        assert!((v - rho0).abs() < 1e-10, "P={p}: {v}");
    }
}

#[test]
fn closed_form_is_a_probability_density_with_variance_one_plus_coupling() {
    for &p in &[0.5, 1.0, 4.0] {
        let (mass, _) = integrate_real(|x| gaussian_closed_form_density(p, x), -14.0, 14.0, 1e-13, 1e-12, 400);
        let (var, _) = integrate_real(|x| x * x * gaussian_closed_form_density(p, x), -14.0, 14.0, 1e-13, 1e-12, 400);
        assert!((mass - 1.0).abs() < 1e-8, "P={p} mass {mass}");
        assert!((var - (1.0 + p)).abs() < 1e-7, "P={p} var {var}");
    }
}

#[test]
fn solver_reproduces_gaussian_closed_form() {
    for &p in &[0.5, 1.0, 4.0] {
        let eq = solve(&Potential::Gaussian, p, 2048);
        for (i, &x) in eq.grid.nodes().iter().enumerate() {
            if x.abs() <= 4.0 {
                let cf = gaussian_closed_form_density(p, x);
                assert!((eq.density[i] / cf - 1.0).abs() < 1e-4, "P={p} x={x}");
            }
        }
    }
}

#[test]
fn second_moment_is_one_plus_coupling() {
    // Integrating the equilibrium relation against x gives ∫x² dμ = 1 + P for V = x²/2.
    for &p in &[0.5, 2.0, 6.0] {
        let eq = solve(&Potential::Gaussian, p, 2048);
        assert!((eq.moment(2) - 1.0 - p).abs() < 1e-6);
    }
}

#[test]
fn residual_mass_symmetry_and_positivity() {
    for v in [Potential::Gaussian, Potential::Quartic] {
        for &p in &[0.5, 1.0, 4.0] {
            let eq = solve(&v, p, 2048);
            assert!(eq.equilibrium_residual() <= 1e-6);
            assert!((eq.mass() - 1.0).abs() < 1e-10);
            assert!(eq.density.iter().all(|&r| r > 0.0));
            let n = eq.len();
            for i in 0..n / 2 {
                let (a, b) = (eq.density[i], eq.density[n - 1 - i]);
                assert!((a - b).abs() <= 1e-9 * a.max(b) + 1e-300);
            }
        }
    }
}

#[test]
fn derivative_relations_match_finite_differences() {
    let eq = solve(&Potential::Gaussian, 1.0, 2048);
    let h = eq.grid.spacing();
    let fd1 = d1(h, &eq.density);
    let fd2 = d2(h, &eq.density);
    let (lo, hi) = eq.support;
    for i in lo.max(8)..hi.min(eq.len() - 8) {
        assert!((fd1[i] - eq.density_d1[i]).abs() < 1e-7);
        assert!((fd2[i] - eq.density_d2[i]).abs() < 1e-6);
    }
}

#[test]
fn density_obeys_tail_bound() {
    for &p in &[1.0, 3.0] {
        let eq = solve(&Potential::Gaussian, p, 2048);
        let worst = eq
            .grid
            .nodes()
            .iter()
            .zip(&eq.log_density)
            .map(|(&x, &l)| l + 0.5 * x * x - 2.0 * p * (1.0 + x.abs()).ln())
            .fold(f64::NEG_INFINITY, f64::max);
        // exp(-2P U) <= (1 + |x|)^{2P} up to a constant set by the support width.
        assert!(worst < 2.0 * p + 1.0, "P={p}: {worst}");
    }
}

#[test]
fn strong_coupling_converges() {
    let eq = solve(&Potential::Gaussian, 100.0, 2048);
    assert!(eq.equilibrium_residual() <= 1e-6);
    assert!((eq.moment(2) - 101.0).abs() < 1e-4);
}

#[test]
fn absolute_value_potential_is_rejected() {
    let g = build_grid(10.0, 1024).unwrap();
    let r = solve_equilibrium(&Potential::AbsoluteValue, 1.0, &g, &EquilibriumOptions::default());
    assert!(matches!(r, Err(loggas::Error::AssumptionViolation(_))));
    let report = validate_potential(&Potential::AbsoluteValue, 1.0, &g);
    let failed: Vec<_> = report.hard_failures().iter().map(|c| c.name.clone()).collect();
    assert!(failed.contains(&"c3_consistency".to_string()));
    assert!(failed.contains(&"derivative_growth".to_string()));
}

#[test]
fn admissible_potentials_pass_validation() {
    let g = build_grid(8.0, 1024).unwrap();
    for v in [
        Potential::Gaussian,
        Potential::Cosh { amplitude: 1.0, rate: 1.0 },
        Potential::EvenPolynomial { coeffs: vec![0.5, 0.1] },
    ] {
        let r = validate_potential(&v, 1.0, &g);
        assert!(r.passed(), "{v:?}: {:?}", r.failures());
    }
    let gq = build_grid(3.0, 1024).unwrap();
    let r = validate_potential(&Potential::Quartic, 1.0, &gq);
    assert!(r.passed() && r.poincare_epsilon.is_some());
}

#[test]
fn poincare_epsilon_for_gaussian() {
    // min_x (a - x²)/(a + x²)² = -1/(8a), so ε = 1/a works iff 1 - Pε/4 >= 0.
    let g = build_uniform_grid(12.0, 4001).unwrap();
    assert_eq!(poincare_epsilon(&Potential::Gaussian, 4.0, &g), Some(1.0));
    assert_eq!(poincare_epsilon(&Potential::Gaussian, 6.0, &g), Some(0.5));
}

#[test]
fn measure_json_round_trip() {
    let eq = solve(&Potential::Quartic, 1.0, 512);
    let text = measure_to_json(&eq);
    let back = measure_from_json(&text).unwrap();
    assert_eq!(back.grid.spec(), eq.grid.spec());
    assert_eq!(back.lambda, eq.lambda);
    for i in 0..eq.len() {
        assert_eq!(back.density[i], eq.density[i]);
        assert!((back.density_d2[i] - eq.density_d2[i]).abs() <= 1e-14 * (1.0 + eq.density_d2[i].abs()));
    }
    assert!(measure_from_json("{\"schema_version\": 99}").is_err());
}

#[test]
fn negative_coupling_is_rejected() {
    let g = build_grid(8.0, 256).unwrap();
    assert!(solve_equilibrium(&Potential::Gaussian, -1.0, &g, &EquilibriumOptions::default()).is_err());
}

#[test]
fn auto_grid_settles_normaliser() {
    let eq = solve_equilibrium_auto(&Potential::Gaussian, 1.0, &EquilibriumOptions::default()).unwrap();
    let finer = solve(&Potential::Gaussian, 1.0, 2 * eq.len());
    assert!((eq.lambda - finer.lambda).abs() < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn solutions_are_normalised_and_consistent(p in 0.1f64..6.0, quartic in any::<bool>()) {
        let v = if quartic { Potential::Quartic } else { Potential::Gaussian };
        let eq = solve(&v, p, 1024);
        prop_assert!((eq.mass() - 1.0).abs() < 1e-10);
        prop_assert!(eq.equilibrium_residual() < 1e-6);
        prop_assert!(eq.density.iter().all(|&r| r > 0.0));
    }
}
