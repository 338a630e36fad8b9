use std::sync::OnceLock;

use loggas::equilibrium::*;
use loggas::grid_numerics::*;
use loggas::master_operator::*;
use loggas::test_functions::{random_smooth_suite, TestFunction};

struct Fixture {
    eq: EquilibriumMeasure,
    asm: OperatorAssembly,
}

fn fixture(p: f64, modes: usize) -> Fixture {
    let opts = SpectralOptions { n_modes: modes, ..SpectralOptions::default() };
    let (eq, basis) = solve_for_operator(&Potential::Gaussian, p, &opts, &EquilibriumOptions::default()).unwrap();
    Fixture { eq, asm: assemble_operator(basis) }
}

fn free_gas() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| fixture(0.0, 64))
}

fn unit_coupling() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| fixture(1.0, 64))
}

fn unit_coupling_fine() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| fixture(1.0, 256))
}

fn plain(p: f64) -> EquilibriumMeasure {
    let g = build_grid(12.0, 2048).unwrap();
    solve_equilibrium(&Potential::Gaussian, p, &g, &EquilibriumOptions::default()).unwrap()
}

fn sample(eq: &EquilibriumMeasure, f: impl Fn(f64) -> f64) -> Vec<f64> {
    eq.grid.nodes().iter().map(|&x| f(x)).collect()
}

fn sup_on_support(eq: &EquilibriumMeasure, v: &[f64]) -> f64 {
    (eq.support.0..=eq.support.1).map(|i| v[i].abs()).fold(0.0, f64::max)
}

#[test]
fn schrodinger_potential_of_free_gas_is_harmonic() {
    let eq = plain(0.0);
    let w = schrodinger_potential(&eq);
    let err = eq.grid.nodes().iter().zip(&w).map(|(x, wv)| (wv - (x * x / 4.0 - 0.5)).abs()).fold(0.0, f64::max);
    assert!(err < 1e-8, "{err}");
}

#[test]
fn schrodinger_potential_grows_like_quarter_slope_squared() {
    let eq = &unit_coupling().eq;
    let w = schrodinger_potential(eq);
    let n = eq.len();
    for i in [0, n - 1] {
        let x = eq.grid.x(i);
        let ratio = w[i] / (Potential::Gaussian.d1(x).powi(2) / 4.0);
        assert!((ratio - 1.0).abs() < 0.05, "edge ratio {ratio}");
    }
    assert!(unit_coupling().asm.basis.potential_minimum.is_finite());
}

#[test]
fn free_gas_spectrum_is_the_integers() {
    let basis = &free_gas().asm.basis;
    for n in 1..=10 {
        assert!((basis.eigenvalues[n - 1] - n as f64).abs() < 1e-3, "λ_{n} = {}", basis.eigenvalues[n - 1]);
    }
    assert!(basis.ground_eigenvalue.abs() < 1e-3);
    let eq = &free_gas().eq;
    let x = sample(eq, |x| x);
    let phi1 = &basis.eigenfunctions[0];
    let cos = mu_inner(eq, phi1, &x) / (mu_norm(eq, phi1) * mu_norm(eq, &x));
    assert!(1.0 - cos.abs() < 1e-6, "angle to x: cos = {cos}");
}

#[test]
fn eigenfunctions_are_orthonormal_centred_and_accurate() {
    for fx in [free_gas(), unit_coupling()] {
        let (eq, basis) = (&fx.eq, &fx.asm.basis);
        assert!(basis.eigenvalues[0] > 0.0);
        assert!(basis.eigenvalues.windows(2).all(|w| w[0] < w[1]));
        for a in 0..basis.n_modes() {
            assert!(eq.mu_integral(&basis.eigenfunctions[a]).abs() < 1e-8);
            assert!(basis.residuals[a] < 1e-4, "mode {a} residual {}", basis.residuals[a]);
            for b in 0..=a {
                let g = mu_inner(eq, &basis.eigenfunctions[a], &basis.eigenfunctions[b]);
                let target = if a == b { 1.0 } else { 0.0 };
                assert!((g - target).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn diagonalisation_guards_resolution() {
    let eq = plain(1.0);
    let too_many = SpectralOptions { n_modes: eq.len() / 8 + 1, ..SpectralOptions::default() };
    assert!(matches!(diagonalize_a(&eq, &too_many), Err(loggas::Error::InvalidArgument(_))));
    // Mode 64 of the unit-coupling gas reaches |x| ≈ 16, well outside ±5.
    let g = build_grid(5.0, 1024).unwrap();
    let narrow = solve_equilibrium(&Potential::Gaussian, 1.0, &g, &EquilibriumOptions::default()).unwrap();
    assert!(matches!(diagonalize_a(&narrow, &SpectralOptions::default()), Err(loggas::Error::Resolution(_))));
    let coarse_grid = build_uniform_grid(24.0, 48).unwrap();
    let coarse = solve_equilibrium(&Potential::Gaussian, 1.0, &coarse_grid, &EquilibriumOptions::default()).unwrap();
    let few = SpectralOptions { n_modes: 4, ..SpectralOptions::default() };
    assert!(matches!(diagonalize_a(&coarse, &few), Err(loggas::Error::Resolution(_))));
}

#[test]
fn a_kills_constants_and_is_ornstein_uhlenbeck_at_zero_coupling() {
    let eq = &free_gas().eq;
    let ones = vec![1.0; eq.len()];
    // Rounding floor of the nine-point stencils: eps / h².
    assert!(sup_on_support(eq, &apply_a(eq, &ones)) < 1e-9);
    let x = sample(eq, |x| x);
    let ax = apply_a(eq, &x);
    let err: Vec<f64> = ax.iter().zip(&x).map(|(a, b)| a - b).collect();
    assert!(sup_on_support(eq, &err) < 1e-8);
}

#[test]
fn a_is_the_dirichlet_form_of_mu() {
    let eq = &unit_coupling().eq;
    let u = TestFunction::GaussianBump { center: 0.4, width: 0.9, amplitude: 1.0 }.on_grid(&eq.grid);
    let v = TestFunction::Tanh { scale: 1.3, shift: -0.2 }.on_grid(&eq.grid);
    let lhs = mu_inner(eq, &apply_a(eq, u.values()), v.values());
    let rhs = h_inner(eq, u.values(), v.values());
    assert!((lhs - rhs).abs() < 1e-8 * rhs.abs(), "{lhs} vs {rhs}");
}

#[test]
fn w_is_centred_and_matches_half_norm() {
    let eq = &unit_coupling().eq;
    let ones = vec![1.0; eq.len()];
    assert!(sup_on_support(eq, &apply_w(eq, &ones)) < 1e-10);
    let u = TestFunction::CosBump { freq: 0.8, width: 1.4 }.on_grid(&eq.grid);
    let wu = apply_w(eq, u.values());
    assert!(eq.mu_integral(&wu).abs() < 1e-10);
    let lhs = h_inner(eq, &wu, u.values());
    let flux: Vec<f64> = d1(eq.grid.spacing(), u.values()).iter().zip(&eq.density).map(|(a, r)| a * r).collect();
    let rhs = 0.5 * half_norm(&GridFunction::new(eq.grid.clone(), flux));
    assert!((lhs - rhs).abs() < 1e-6 * rhs, "{lhs} vs {rhs}");
}

#[test]
fn xi_reduces_to_product_rule_without_interaction() {
    let eq = plain(0.0);
    let u = TestFunction::GaussianBump { center: -0.3, width: 0.8, amplitude: 1.0 }.on_grid(&eq.grid);
    let xi = apply_xi(&eq, u.values());
    let h = eq.grid.spacing();
    let prod: Vec<f64> = u.values().iter().zip(&eq.density).map(|(a, r)| a * r).collect();
    let dprod = d1(h, &prod);
    let (lo, hi) = eq.support;
    let sup = (lo..=hi).map(|i| xi[i].abs()).fold(0.0, f64::max);
    let err = (lo..=hi).map(|i| (xi[i] - dprod[i] / eq.density[i]).abs()).fold(0.0, f64::max);
    assert!(err < 1e-8 * sup.max(1.0), "{err}");
}

#[test]
fn xi_has_zero_mean_and_l_decomposes() {
    let fx = unit_coupling();
    let eq = &fx.eq;
    let u = TestFunction::Tanh { scale: 0.9, shift: 0.3 }.on_grid(&eq.grid);
    let xi = apply_xi(eq, u.values());
    assert!(eq.mu_integral(&xi).abs() < 1e-8);
    let l = apply_l(eq, u.values());
    let a = apply_a(eq, u.values());
    let w = apply_w(eq, u.values());
    let diff: Vec<f64> = (0..eq.len()).map(|i| l[i] + a[i] + 2.0 * w[i]).collect();
    assert!(sup_on_support(eq, &diff) < 1e-6 * sup_on_support(eq, &l));
    let ones = vec![1.0; eq.len()];
    assert!(sup_on_support(eq, &apply_l(eq, &ones)) < 1e-9);
}

#[test]
fn l_of_identity_is_minus_identity_for_free_gas() {
    let eq = &free_gas().eq;
    let x = sample(eq, |x| x);
    let lx = apply_l(eq, &x);
    let err: Vec<f64> = lx.iter().zip(&x).map(|(a, b)| a + b).collect();
    assert!(sup_on_support(eq, &err) < 1e-8);
}

#[test]
fn inverse_of_a_inverts_eigenfunctions_and_random_functions() {
    let fx = unit_coupling();
    let eq = &fx.eq;
    let basis = &fx.asm.basis;
    for n in [0, 3, 9] {
        let u = invert_a(eq, &basis.eigenfunctions[n]).unwrap();
        let target: Vec<f64> = basis.eigenfunctions[n].iter().map(|v| v / basis.eigenvalues[n]).collect();
        let err: Vec<f64> = u.iter().zip(&target).map(|(a, b)| a - b).collect();
        assert!(mu_norm(eq, &err) < 1e-5 * mu_norm(eq, &target), "mode {n}");
    }
    for f in random_smooth_suite(7, 5) {
        let fc = eq.center(f.on_grid(&eq.grid).values());
        let back = apply_a(eq, &invert_a(eq, &fc).unwrap());
        let err: Vec<f64> = back.iter().zip(&fc).map(|(a, b)| a - b).collect();
        assert!(mu_norm(eq, &err) < 1e-6 * mu_norm(eq, &fc));
    }
    let free = &free_gas().eq;
    let x = sample(free, |x| x);
    let u = invert_a(free, &free.center(&x)).unwrap();
    let err: Vec<f64> = u.iter().zip(&free.center(&x)).map(|(a, b)| a - b).collect();
    assert!(mu_norm(free, &err) < 1e-8);
    let ones = vec![1.0; eq.len()];
    assert!(matches!(invert_a(eq, &ones), Err(loggas::Error::InvalidArgument(_))));
}

#[test]
fn fredholm_kernel_columns_are_centred_and_match_the_log_potential() {
    let eq = &unit_coupling().eq;
    let k = fredholm_kernel(eq, KERNEL_THRESHOLD);
    for j in [k.lo, (k.lo + k.hi) / 2, k.hi] {
        assert!(k.column_mean(eq, j).abs() < 1e-8);
    }
    // K g = -2P (U[gρ] - ∫U[gρ]dμ) with the solver's refined potential.
    let g = TestFunction::tanh().on_grid(&eq.grid);
    let kg = k.apply(&g.values()[k.lo..=k.hi]);
    let mut src = vec![0.0; eq.len()];
    for j in k.lo..=k.hi {
        src[j] = g.values()[j] * eq.density[j];
    }
    let u = log_potential_refined_slice(&eq.grid, &src);
    let reference: Vec<f64> = eq.center(&u).iter().map(|v| -2.0 * v).collect();
    let err: Vec<f64> = kg.iter().zip(&reference).map(|(a, b)| a - b).collect();
    assert!(sup_on_support(eq, &err) < 1e-10, "{}", sup_on_support(eq, &err));
    let free = &free_gas().eq;
    let k0 = fredholm_kernel(free, KERNEL_THRESHOLD);
    assert!(k0.matrix().iter().all(|v| *v == 0.0));
}

#[test]
fn fredholm_identity_holds() {
    let eq = &unit_coupling().eq;
    let k = fredholm_kernel(eq, KERNEL_THRESHOLD);
    for f in random_smooth_suite(11, 4) {
        let fc = eq.center(f.on_grid(&eq.grid).values());
        let w = apply_w(eq, &invert_a(eq, &fc).unwrap());
        let kf = k.apply(&fc[k.lo..=k.hi]);
        let r: Vec<f64> = w.iter().zip(&kf).map(|(a, b)| 2.0 * a + b).collect();
        assert!(mu_norm(eq, &r) <= 1e-5 * mu_norm(eq, &fc));
    }
}

#[test]
fn galerkin_matrices_are_symmetric_and_coercive() {
    for fx in [free_gas(), unit_coupling()] {
        let asm = &fx.asm;
        assert!(asm.symmetry_defect < 1e-8);
        assert!(asm.w_min_eigenvalue > -1e-10);
        assert!(asm.coercivity_margin >= -1e-6, "{}", asm.coercivity_margin);
        assert!(asm.energy_orthonormality_defect < 1e-6);
    }
}

#[test]
fn spectral_inverse_of_identity_for_free_gas() {
    let fx = free_gas();
    let x = sample(&fx.eq, |x| x);
    let sol = invert_l_spectral(&fx.asm, &x, None).unwrap();
    let err: Vec<f64> = sol.u.iter().zip(&fx.eq.center(&x)).map(|(a, b)| a + b).collect();
    assert!(h_norm(&fx.eq, &err) < 1e-8);
    assert!(sol.residual < 1e-6);
}

#[test]
fn spectral_inverse_recovers_manufactured_solution() {
    let fx = unit_coupling();
    let eq = &fx.eq;
    let v = TestFunction::GaussianBump { center: 0.2, width: 1.1, amplitude: 1.0 }.on_grid(&eq.grid);
    let f = apply_l(eq, v.values());
    let sol = invert_l_spectral(&fx.asm, &f, None).unwrap();
    let err: Vec<f64> = sol.u.iter().zip(v.values()).map(|(a, b)| a - b).collect();
    assert!(h_norm(eq, &err) < 1e-4 * h_norm(eq, v.values()));
}

#[test]
fn spectral_inverse_converges_in_mode_count() {
    // tanh has poles at ±iπ/2, so its coefficients decay like exp(-c√n): the change is
    // about 2e-5 from 32 to 64 modes and about 4e-7 from 64 to 128.
    let fx = unit_coupling_fine();
    let f = TestFunction::tanh().on_grid(&fx.eq.grid);
    let solve = |m| invert_l_spectral_unchecked(&fx.asm, f.values(), Some(m)).unwrap().u;
    let change = |a: &[f64], b: &[f64]| {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        h_norm(&fx.eq, &d)
    };
    let (u32, u64, u128) = (solve(32), solve(64), solve(128));
    assert!(change(&u32, &u64) < 1e-4);
    assert!(change(&u64, &u128) < 1e-5);
    assert!(change(&u64, &u128) < 0.1 * change(&u32, &u64));
}

#[test]
fn spectral_and_fredholm_routes_agree() {
    let fx = unit_coupling_fine();
    let eq = &fx.eq;
    let solver = FredholmSolver::new(eq).unwrap();
    assert!(solver.condition < 1e6);
    for f in random_smooth_suite(2024, 20) {
        let fv = f.on_grid(&eq.grid);
        let s = invert_l_spectral(&fx.asm, fv.values(), None).unwrap();
        let r = solver.solve(fv.values()).unwrap();
        let d: Vec<f64> = s.u.iter().zip(&r.u).map(|(a, b)| a - b).collect();
        assert!(h_norm(eq, &d) < 1e-4, "{}: {}", f.label(), h_norm(eq, &d));
        assert!(s.residual < 1e-4, "spectral residual {}", s.residual);
        assert!(r.residual < 1e-4, "fredholm residual {}", r.residual);
        assert!(s.u_h_norm <= s.h_norm_bound * (1.0 + 1e-9));
    }
}

#[test]
fn fredholm_route_without_interaction_is_minus_inverse_a() {
    let eq = &free_gas().eq;
    let f = TestFunction::tanh().on_grid(&eq.grid);
    let (sol, cond) = invert_l_fredholm(eq, f.values()).unwrap();
    assert_eq!(cond, 1.0);
    let direct = invert_a(eq, &eq.center(f.values())).unwrap();
    assert!(sol.u.iter().zip(&direct).all(|(a, b)| (a + b).abs() < 1e-15));
    assert!(sol.residual < 1e-4);
}

#[test]
fn free_gas_variance_is_the_iid_variance() {
    // Var under N(0, 1), by 30-digit adaptive quadrature.
    let cases = [
        (TestFunction::tanh(), 0.394294490397841174),
        (TestFunction::GaussianBump { center: 0.5, width: 1.0, amplitude: 1.0 }, 0.0899394391603537365),
        (TestFunction::CosBump { freq: 2.0, width: 1.5 }, 0.325654922118255262),
    ];
    let asm = &free_gas().asm;
    for (f, var) in cases {
        let res = limiting_variance(asm, f.on_grid(&free_gas().eq.grid).values()).unwrap();
        assert!((res.sigma2 - var).abs() < 1e-6 * var, "{}: {} vs {var}", f.label(), res.sigma2);
        assert!((res.compact_form - res.sigma2).abs() < 1e-5 * var);
    }
    let c = limiting_variance(asm, &vec![3.0; free_gas().eq.len()]).unwrap();
    assert_eq!(c.sigma2, 0.0);
}

#[test]
fn interacting_variance_is_positive_converged_and_sign_consistent() {
    let fx = unit_coupling();
    let res = limiting_variance(&fx.asm, TestFunction::tanh().on_grid(&fx.eq.grid).values()).unwrap();
    assert!(res.converged, "{:?}", res.history);
    assert!(res.sigma2 > 0.0);
    assert!((res.compact_form - res.sigma2).abs() < 1e-5 * res.sigma2);
    // Interaction suppresses fluctuations relative to the i.i.d. variance of μ.
    let fc = fx.eq.center(TestFunction::tanh().on_grid(&fx.eq.grid).values());
    assert!(res.sigma2 < mu_norm(&fx.eq, &fc).powi(2));
}

#[test]
fn forward_form_matches_variance_of_xi_without_interaction() {
    let eq = plain(0.0);
    let phi = TestFunction::GaussianBump { center: 0.3, width: 0.7, amplitude: 1.0 }.on_grid(&eq.grid);
    let q = forward_variance_q(&eq, phi.values());
    let xi = apply_xi(&eq, phi.values());
    let xc = eq.center(&xi);
    let var = mu_norm(&eq, &xc).powi(2);
    assert!((q - var).abs() < 1e-8 * var, "{q} vs {var}");
}

#[test]
fn forward_form_is_nonnegative_on_random_bumps() {
    let eq = plain(1.0);
    for (k, f) in random_smooth_suite(99, 50).into_iter().enumerate() {
        let q = forward_variance_q(&eq, f.on_grid(&eq.grid).values());
        assert!(q >= 0.0, "function {k}: q = {q}");
    }
}

#[test]
fn difference_quotient_identity_holds_for_several_couplings() {
    let bump = TestFunction::GaussianBump { center: 0.25, width: 0.9, amplitude: 1.0 };
    for p in [0.5, 1.0, 2.0] {
        let eq = plain(p);
        let check = variance_identity_check(&eq, bump.on_grid(&eq.grid).values());
        assert!(check.discrepancy < 1e-5, "P = {p}: {check:?}");
    }
    let eq = plain(1.0);
    let c = variance_identity_check(&eq, &vec![2.0; eq.len()]);
    assert!(c.double_integral.abs() < 1e-20 && c.single_integral.abs() < 1e-20);
}

#[test]
fn toda_currents() {
    let fx = unit_coupling();
    let one = toda_current(&fx.asm, 1, 6.0).unwrap();
    let h1 = TestFunction::TruncatedMonomial { power: 1, cutoff: 6.0 }.on_grid(&fx.eq.grid);
    let s1 = limiting_variance(&fx.asm, h1.values()).unwrap().sigma2;
    assert!((one.value - s1).abs() < 1e-9 * s1);
    // Even V: x and x² are uncorrelated by parity, so even orders vanish.
    let two = toda_current(&fx.asm, 2, 6.0).unwrap();
    assert!(two.value.abs() < 1e-9 * s1, "{two:?}");
    let three = toda_current(&fx.asm, 3, 6.0).unwrap();
    assert!(three.value > 0.0);
    assert!(three.relative_sensitivity < 0.01, "{three:?}");
    assert!(toda_current(&fx.asm, 2, fx.eq.grid.half_width()).is_err());
    let free = toda_current(&free_gas().asm, 3, 6.0).unwrap();
    assert_eq!(free.value, 0.0);
}

#[test]
fn inverse_has_bounded_tail_derivative() {
    let fx = unit_coupling();
    let f = TestFunction::tanh().on_grid(&fx.eq.grid);
    let solver = FredholmSolver::new(&fx.eq).unwrap();
    let u = solver.solve_unchecked(f.values()).unwrap().u;
    let tail = regularity_spot_check(&fx.eq, &u);
    assert!(tail.is_finite() && tail < 10.0, "{tail}");
}

#[test]
fn basis_round_trips_through_json() {
    let basis = &free_gas().asm.basis;
    let text = basis_to_json(basis);
    let back = basis_from_json(&text).unwrap();
    assert_eq!(back.eigenvalues, basis.eigenvalues);
    assert!(basis_from_json("{}").is_err());
}

#[test]
fn steep_potentials_diagonalise_and_recover_the_iid_variance() {
    // Var of tanh under exp(-x⁴)/Z, by 30-digit adaptive quadrature.
    let opts = SpectralOptions { n_modes: 64, ..SpectralOptions::default() };
    let (eq, basis) = solve_for_operator(&Potential::Quartic, 0.0, &opts, &EquilibriumOptions::default()).unwrap();
    assert!(eq.grid.spacing() < 0.02 && basis.residuals.iter().all(|&r| r < 1e-4));
    let asm = assemble_operator(basis);
    let res = limiting_variance(&asm, TestFunction::tanh().on_grid(&eq.grid).values()).unwrap();
    assert!((res.sigma2 - 0.230479969036645003).abs() < 1e-6 * 0.23, "{}", res.sigma2);
    let (eq, basis) = solve_for_operator(&Potential::Quartic, 1.0, &opts, &EquilibriumOptions::default()).unwrap();
    let res = limiting_variance(&assemble_operator(basis), TestFunction::tanh().on_grid(&eq.grid).values()).unwrap();
    assert!(res.converged && res.sigma2 > 0.0, "{res:?}");
}
