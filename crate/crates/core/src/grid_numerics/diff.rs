//! Finite-difference derivatives on uniform grids. Interior nodes use the centred
//! nine-point stencil (eighth order); the four nodes nearest each end use the
//! one-sided nine-point stencil of the same order.

use super::grid::GridFunction;

const HALF: usize = 4;
const WIDTH: usize = 2 * HALF + 1;

/// Fornberg weights for derivatives `0..=order` at `z` from nodes `xs`.
/// Returns `w[k][j]`, the weight of node `j` in the `k`-th derivative.
pub fn fornberg_weights(z: f64, xs: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] *= c4 / c3;
        }
        c1 = c2;
    }
    c
}

/// Precomputed stencils for one derivative order on a grid of given spacing.
struct Stencils {
    interior: [f64; WIDTH],
    edge: Vec<[f64; WIDTH]>,
}

fn stencils(order: usize, h: f64) -> Stencils {
    let xs: Vec<f64> = (0..WIDTH).map(|j| j as f64 * h).collect();
    let to_arr = |w: &[f64]| {
        let mut a = [0.0; WIDTH];
        a.copy_from_slice(w);
        a
    };
    let interior = to_arr(&fornberg_weights(HALF as f64 * h, &xs, order)[order]);
    let edge = (0..HALF)
        .map(|i| to_arr(&fornberg_weights(i as f64 * h, &xs, order)[order]))
        .collect();
    Stencils { interior, edge }
}

fn apply(order: usize, h: f64, v: &[f64]) -> Vec<f64> {
    let n = v.len();
    assert!(n >= WIDTH, "derivative needs at least {WIDTH} nodes");
    let s = stencils(order, h);
    let mut out = vec![0.0; n];
    for i in HALF..n - HALF {
        let base = i - HALF;
        out[i] = (0..WIDTH).map(|j| s.interior[j] * v[base + j]).sum();
    }
    let sign = if order % 2 == 1 { -1.0 } else { 1.0 };
    for i in 0..HALF {
        out[i] = (0..WIDTH).map(|j| s.edge[i][j] * v[j]).sum();
        // Mirror the left stencil; odd derivatives flip sign under reflection.
        out[n - 1 - i] = sign * (0..WIDTH).map(|j| s.edge[i][j] * v[n - 1 - j]).sum::<f64>();
    }
    out
}

/// First derivative of a slice sampled with spacing `h`.
pub fn d1(h: f64, v: &[f64]) -> Vec<f64> {
    apply(1, h, v)
}

/// Second derivative of a slice sampled with spacing `h`.
pub fn d2(h: f64, v: &[f64]) -> Vec<f64> {
    apply(2, h, v)
}

pub fn derivative(f: &GridFunction) -> GridFunction {
    let h = f.grid().spacing();
    GridFunction::new(f.grid().clone(), d1(h, f.values()))
}

pub fn second_derivative(f: &GridFunction) -> GridFunction {
    let h = f.grid().spacing();
    GridFunction::new(f.grid().clone(), d2(h, f.values()))
}
