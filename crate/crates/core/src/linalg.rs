//! Symmetric tridiagonal eigenvalue routines and a 1-norm condition estimator.
//!
//! A tridiagonal matrix is given by its diagonal `d[0..n]` and off-diagonal
//! `e[0..n-1]`, with `e[i]` coupling rows `i` and `i + 1`.

use nalgebra::{DMatrix, DVector};

/// Number of eigenvalues strictly below `x` (Sturm sequence count).
pub fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let coupling = if i > 0 { e[i - 1] * e[i - 1] / q } else { 0.0 };
        q = d[i] - x - coupling;
        // A vanishing pivot is perturbed to the negative side and counted as such.
        if q.abs() < tiny {
            q = -tiny;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin interval containing the spectrum.
pub fn gershgorin(d: &[f64], e: &[f64]) -> (f64, f64) {
    let n = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    (lo, hi)
}

/// The `k`-th smallest eigenvalue (0-based) by bisection.
pub fn kth_eigenvalue(d: &[f64], e: &[f64], k: usize) -> f64 {
    let (mut lo, mut hi) = gershgorin(d, e);
    let scale = lo.abs().max(hi.abs()).max(1.0);
    while hi - lo > 4.0 * f64::EPSILON * scale {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(d, e, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Smallest and largest eigenvalue by bisection, `O(n)` per step.
pub fn extreme_eigenvalues(d: &[f64], e: &[f64]) -> (f64, f64) {
    let n = d.len();
    (kth_eigenvalue(d, e, 0), kth_eigenvalue(d, e, n - 1))
}

/// Solve `(T - shift) x = b` by tridiagonal LU with partial pivoting.
fn shifted_solve(d: &[f64], e: &[f64], shift: f64, b: &mut [f64]) {
    let n = d.len();
    let eps = f64::EPSILON * gershgorin(d, e).1.abs().max(1.0);
    let mut dg: Vec<f64> = d.iter().map(|v| v - shift).collect();
    let mut dl = e.to_vec();
    let mut du = e.to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut swapped = vec![false; n.saturating_sub(1)];
    for i in 0..n - 1 {
        if dg[i].abs() >= dl[i].abs() {
            if dg[i].abs() < eps {
                dg[i] = eps;
            }
            let fact = dl[i] / dg[i];
            dl[i] = fact;
            dg[i + 1] -= fact * du[i];
        } else {
            let fact = dg[i] / dl[i];
            dg[i] = dl[i];
            dl[i] = fact;
            let temp = du[i];
            du[i] = dg[i + 1];
            dg[i + 1] = temp - fact * dg[i + 1];
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] *= -fact;
            }
            swapped[i] = true;
        }
    }
    if dg[n - 1].abs() < eps {
        dg[n - 1] = eps;
    }
    for i in 0..n - 1 {
        if swapped[i] {
            let temp = b[i];
            b[i] = b[i + 1];
            b[i + 1] = temp - dl[i] * b[i];
        } else {
            b[i + 1] -= dl[i] * b[i];
        }
    }
    b[n - 1] /= dg[n - 1];
    if n > 1 {
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / dg[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / dg[i];
    }
}

/// Unit eigenvector for an (isolated) eigenvalue by inverse iteration, orthogonalised
/// against `previous` to separate close eigenvalues.
pub fn inverse_iteration(d: &[f64], e: &[f64], lambda: f64, previous: &[Vec<f64>]) -> Vec<f64> {
    let n = d.len();
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.1 * ((i as f64 * 0.618_033_988_7).fract() - 0.5))
        .collect();
    let scale = gershgorin(d, e).1.abs().max(1.0);
    let shift = lambda + 1e3 * f64::EPSILON * scale * (if lambda >= 0.0 { 1.0 } else { -1.0 });
    for _ in 0..4 {
        shifted_solve(d, e, shift, &mut v);
        for p in previous {
            let dot: f64 = v.iter().zip(p).map(|(a, b)| a * b).sum();
            for (vi, pi) in v.iter_mut().zip(p) {
                *vi -= dot * pi;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for vi in &mut v {
            *vi /= norm;
        }
    }
    v
}

/// Lowest `m` eigenpairs, eigenvalues ascending, eigenvectors of unit Euclidean norm.
pub fn lowest_eigenpairs(d: &[f64], e: &[f64], m: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let values: Vec<f64> = (0..m).map(|k| kth_eigenvalue(d, e, k)).collect();
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(m);
    for &lam in &values {
        // Only neighbours in the spectrum can leak into the iterate.
        let near: Vec<Vec<f64>> = vectors
            .iter()
            .zip(&values)
            .filter(|(_, &mu)| (mu - lam).abs() < 1e-3 * (1.0 + lam.abs()))
            .map(|(v, _)| v.clone())
            .collect();
        let mut v = inverse_iteration(d, e, lam, &near);
        let pivot = v.iter().cloned().fold(0.0, |a: f64, b| if b.abs() > a.abs() { b } else { a });
        if pivot < 0.0 {
            for x in &mut v {
                *x = -*x;
            }
        }
        vectors.push(v);
    }
    (values, vectors)
}

/// `√(a² + b²)`, falling back to `hypot` only when the squares overflow or underflow.
#[inline]
fn fast_hypot(a: f64, b: f64) -> f64 {
    let s = a * a + b * b;
    if s.is_finite() && s > f64::MIN_POSITIVE {
        s.sqrt()
    } else {
        a.hypot(b)
    }
}

/// All eigenvalues, ascending, by the implicit QL method with Wilkinson shifts.
pub fn tridiagonal_eigenvalues(d: &[f64], e: &[f64]) -> Vec<f64> {
    let n = d.len();
    let mut d = d.to_vec();
    let mut e: Vec<f64> = e.iter().cloned().chain(std::iter::once(0.0)).collect();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = fast_hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = fast_hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| a.total_cmp(b));
    d
}

/// Hager-Higham estimate of `‖A^{-1}‖_1` from an LU factorisation, returned together
/// with `‖A‖_1` so callers can form the condition number.
pub fn condition_estimate_1(a: &DMatrix<f64>, lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>) -> f64 {
    let n = a.nrows();
    let norm_a = (0..n)
        .map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut est = 0.0;
    let at = a.transpose();
    let lut = at.lu();
    for _ in 0..5 {
        let y = match lu.solve(&x) {
            Some(y) => y,
            None => return f64::INFINITY,
        };
        let new_est = y.iter().map(|v| v.abs()).sum::<f64>();
        let xi = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
        let z = match lut.solve(&xi) {
            Some(z) => z,
            None => return f64::INFINITY,
        };
        let (jmax, zmax) = z
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (j, v)| if v.abs() > acc.1 { (j, v.abs()) } else { acc });
        if new_est <= est || zmax <= z.dot(&x) {
            est = est.max(new_est);
            break;
        }
        est = new_est;
        x = DVector::zeros(n);
        x[jmax] = 1.0;
    }
    est * norm_a
}

/// LU factorisation with partial pivoting of a banded matrix with `kl` sub- and `ku`
/// super-diagonals. Pivoting widens the upper band to `kl + ku`.
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    /// Row `i` holds columns `i - kl ..= i + kl + ku` of the eliminated matrix.
    rows: Vec<Vec<f64>>,
    pivots: Vec<usize>,
    /// Gauss-transform multipliers of step `k`, for rows `k+1 ..= k+kl`.
    multipliers: Vec<Vec<f64>>,
}

impl BandLu {
    /// Factor the matrix with entries `entry(i, j)` for `|i - j|` within the band.
    /// Vanishing pivots are replaced by `tiny` so shifted solves near an eigenvalue
    /// still return a (large) finite vector.
    pub fn new(n: usize, kl: usize, ku: usize, entry: impl Fn(usize, usize) -> f64, tiny: f64) -> Self {
        let width = 2 * kl + ku + 1;
        let mut rows = vec![vec![0.0; width]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                row[j + kl - i] = entry(i, j);
            }
        }
        let mut lu = BandLu { n, kl, ku, rows, pivots: vec![0; n], multipliers: vec![Vec::new(); n] };
        lu.factor(tiny);
        lu
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.kl + self.ku {
            0.0
        } else {
            self.rows[i][j + self.kl - i]
        }
    }

    fn factor(&mut self, tiny: f64) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let p = (k..=last)
                .max_by(|&a, &b| self.get(a, k).abs().total_cmp(&self.get(b, k).abs()))
                .unwrap_or(k);
            self.pivots[k] = p;
            let right = (k + kl + ku).min(n - 1);
            if p != k {
                // Both rows are supported on columns k..=right at this stage.
                let row_k: Vec<f64> = (k..=right).map(|j| self.get(k, j)).collect();
                let row_p: Vec<f64> = (k..=right).map(|j| self.get(p, j)).collect();
                for (t, j) in (k..=right).enumerate() {
                    self.rows[k][j + kl - k] = row_p[t];
                    self.rows[p][j + kl - p] = row_k[t];
                }
            }
            if self.rows[k][kl].abs() < tiny {
                self.rows[k][kl] = if self.rows[k][kl] < 0.0 { -tiny } else { tiny };
            }
            let pivot = self.rows[k][kl];
            let mut mult = Vec::with_capacity(last - k);
            for i in k + 1..=last {
                let m = self.get(i, k) / pivot;
                mult.push(m);
                if m != 0.0 {
                    for j in k..=right {
                        let u = self.rows[k][j + kl - k];
                        self.rows[i][j + kl - i] -= m * u;
                    }
                }
            }
            self.multipliers[k] = mult;
        }
    }

    /// Solve in place.
    pub fn solve(&self, b: &mut [f64]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            b.swap(k, self.pivots[k]);
            let bk = b[k];
            for (t, m) in self.multipliers[k].iter().enumerate() {
                b[k + 1 + t] -= m * bk;
            }
        }
        for k in (0..n).rev() {
            let right = (k + kl + ku).min(n - 1);
            let mut acc = b[k];
            for j in k + 1..=right {
                acc -= self.rows[k][j + kl - k] * b[j];
            }
            b[k] = acc / self.rows[k][kl];
        }
    }
}

/// Symmetric banded matrix `a[i][s] = A(i, i + s)`, `s = 0..=k`, times a vector.
pub fn symmetric_band_apply(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        out[i] += a[i][0] * v[i];
        for s in 1..a[i].len() {
            if i + s < n {
                out[i] += a[i][s] * v[i + s];
                out[i + s] += a[i][s] * v[i];
            }
        }
    }
    out
}

/// Rayleigh quotient iteration for the symmetric banded matrix `a` (upper storage as in
/// [`symmetric_band_apply`]) from the initial pair `(lambda, v)`, deflating `previous`.
/// Returns the refined pair; `v` keeps unit Euclidean norm.
pub fn rayleigh_refine(
    a: &[Vec<f64>],
    lambda: f64,
    v: &[f64],
    previous: &[Vec<f64>],
    max_iter: usize,
) -> (f64, Vec<f64>) {
    let n = v.len();
    let k = a[0].len() - 1;
    let scale = a.iter().map(|r| r[0].abs()).fold(1.0, f64::max);
    let mut v = v.to_vec();
    let mut sigma = lambda;
    let deflate = |v: &mut Vec<f64>| {
        for p in previous {
            let dot: f64 = v.iter().zip(p).map(|(a, b)| a * b).sum();
            for (vi, pi) in v.iter_mut().zip(p) {
                *vi -= dot * pi;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for vi in v.iter_mut() {
            *vi /= norm;
        }
    };
    deflate(&mut v);
    for _ in 0..max_iter {
        let entry = |i: usize, j: usize| {
            let (r, s) = if i <= j { (i, j - i) } else { (j, i - j) };
            let base = if s <= k { a[r][s] } else { 0.0 };
            if i == j { base - sigma } else { base }
        };
        let lu = BandLu::new(n, k, k, entry, f64::EPSILON * scale);
        lu.solve(&mut v);
        deflate(&mut v);
        let av = symmetric_band_apply(a, &v);
        let next: f64 = v.iter().zip(&av).map(|(x, y)| x * y).sum();
        let done = (next - sigma).abs() <= 1e-14 * (1.0 + next.abs());
        sigma = next;
        if done {
            break;
        }
    }
    (sigma, v)
}
