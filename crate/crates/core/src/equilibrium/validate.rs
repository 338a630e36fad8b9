//! Numerical probes of the standing assumptions on the potential.

use serde::{Deserialize, Serialize};

use super::Potential;
use crate::grid_numerics::{d1, Grid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Hard checks block the equilibrium solver; soft ones only warn.
    pub hard: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub potential: Potential,
    pub coupling: f64,
    pub checks: Vec<Check>,
    /// Largest `ε = 2^{-k}` for which the weighted Poincaré criterion holds.
    pub poincare_epsilon: Option<f64>,
}

impl ValidationReport {
    /// All hard checks passed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || !c.hard)
    }
    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
    pub fn hard_failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed && c.hard).collect()
    }
}

fn check(name: &str, passed: bool, hard: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        passed,
        hard,
        detail,
    }
}

/// Analytic derivatives must agree with finite differences of the next-lower one.
fn smoothness(v: &Potential, grid: &Grid) -> Check {
    let h = grid.spacing();
    let xs = grid.nodes();
    let mut worst: f64 = 0.0;
    let mut at = 0.0;
    for order in 1..=3u32 {
        let lower: Vec<f64> = xs.iter().map(|&x| v.derivative(order - 1, x)).collect();
        let fd = d1(h, &lower);
        for (i, &x) in xs.iter().enumerate().skip(4).take(xs.len() - 8) {
            let exact = v.derivative(order, x);
            let scale = 1.0 + exact.abs() + lower[i].abs() / grid.half_width();
            let err = (fd[i] - exact).abs() / scale;
            if err > worst {
                worst = err;
                at = x;
            }
        }
    }
    check(
        "c3_consistency",
        worst < 1e-4,
        true,
        format!("max relative mismatch {worst:.3e} between derivatives and finite differences (at x={at:.3})"),
    )
}

fn growth(v: &Potential, grid: &Grid) -> Check {
    let l = grid.half_width();
    let mut ok = v.d1(l) > 0.0 && v.d1(-l) < 0.0;
    for side in [1.0, -1.0] {
        let outer = v.d1(side * l).abs();
        let inner = v.d1(side * 0.5 * l).abs();
        ok &= outer >= 1.5 * inner && outer > 1.0;
        let mut prev = inner;
        for k in 1..=20 {
            let x = side * l * (0.5 + 0.5 * k as f64 / 20.0);
            let cur = v.d1(x).abs();
            ok &= cur >= prev;
            prev = cur;
        }
    }
    check(
        "derivative_growth",
        ok,
        true,
        format!(
            "|V'| at ±L: {:.3e}, {:.3e}; at ±L/2: {:.3e}, {:.3e}",
            v.d1(l).abs(),
            v.d1(-l).abs(),
            v.d1(0.5 * l).abs(),
            v.d1(-0.5 * l).abs()
        ),
    )
}

fn tail_decay(v: &Potential, grid: &Grid) -> Check {
    let l = grid.half_width();
    let mut worst: f64 = 0.0;
    for x in [l, -l] {
        let base = (-v.value(x)).exp() * x * x;
        for q in [1.0, x * x, v.d1(x).powi(2)] {
            worst = worst.max(q * base);
        }
    }
    check(
        "tail_decay",
        worst < 1e-6,
        false,
        format!("max of x²·Q·e^(-V) at ±L over Q in {{1, x², V'²}}: {worst:.3e}"),
    )
}

fn endpoint_ratio(v: &Potential, grid: &Grid) -> Check {
    let l = grid.half_width();
    let mut worst: f64 = 0.0;
    for x in [l, -l] {
        let denom = v.d1(x).powi(2);
        let sup = (0..=20)
            .map(|k| v.d2(x - 1.0 + 0.1 * k as f64).abs())
            .fold(0.0, f64::max);
        worst = worst.max(sup / denom);
    }
    check(
        "endpoint_curvature_ratio",
        worst < 0.25,
        false,
        format!("sup over unit window of |V''| / V'(±L)²: {worst:.3e}"),
    )
}

fn integrability(v: &Potential, grid: &Grid) -> Check {
    let l = grid.half_width();
    let mut ok = true;
    let mut detail = String::new();
    for side in [1.0, -1.0] {
        let tail = |x: f64| x.abs() / v.d1(x).powi(2);
        ok &= tail(side * l) < tail(side * 0.5 * l);
        let r2 = |x: f64| (v.d2(x) / v.d1(x)).abs();
        let r3 = |x: f64| (v.d3(x) / v.d1(x)).abs();
        ok &= r2(side * l) <= 1.5 * r2(side * 0.75 * l) + 1.0;
        ok &= r3(side * l) <= 1.5 * r3(side * 0.75 * l) + 1.0;
        detail.push_str(&format!(
            "side {side:+}: |V''/V'|={:.3e}, |V'''/V'|={:.3e}; ",
            r2(side * l),
            r3(side * l)
        ));
    }
    check("derivative_ratios", ok, false, detail)
}

/// Largest `ε = 2^{-k}` with `V''_conv + 2P (a - x²)/(a + x²)² >= 0` on the grid, `a = 1/ε`.
pub fn poincare_epsilon(v: &Potential, coupling: f64, grid: &Grid) -> Option<f64> {
    (0..=30).map(|k| 0.5f64.powi(k)).find(|&eps| {
        let a = 1.0 / eps;
        grid.nodes().iter().all(|&x| {
            let w = (a - x * x) / (a + x * x).powi(2);
            v.convex_part_d2(x) + 2.0 * coupling * w >= -1e-12
        })
    })
}

/// Run every probe on `grid`.
pub fn validate_potential(v: &Potential, coupling: f64, grid: &Grid) -> ValidationReport {
    let eps = poincare_epsilon(v, coupling, grid);
    let poincare = check(
        "weighted_poincare",
        eps.is_some(),
        false,
        match eps {
            Some(e) => format!("criterion holds for ε = {e:e}"),
            None => "no ε = 2^-k (k <= 30) satisfies the criterion".into(),
        },
    );
    ValidationReport {
        potential: v.clone(),
        coupling,
        checks: vec![
            smoothness(v, grid),
            growth(v, grid),
            tail_decay(v, grid),
            endpoint_ratio(v, grid),
            integrability(v, grid),
            poincare,
        ],
        poincare_epsilon: eps,
    }
}

/// `sup_{dist(x, [lo, hi]) <= 1} |V'''(x)| / √N` for each `(N, lo, hi)`.
pub fn finite_n_probe(v: &Potential, cases: &[(usize, f64, f64)]) -> Vec<(usize, f64)> {
    cases
        .iter()
        .map(|&(n, lo, hi)| {
            let steps = 400;
            let a = lo - 1.0;
            let b = hi + 1.0;
            let sup = (0..=steps)
                .map(|k| v.d3(a + (b - a) * k as f64 / steps as f64).abs())
                .fold(0.0, f64::max);
            (n, sup / (n as f64).sqrt())
        })
        .collect()
}
