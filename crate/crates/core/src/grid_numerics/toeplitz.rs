use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Aperiodic convolution `y_i = Σ_j k(i - j) x_j` on `n` nodes, evaluated with an FFT
/// of length `4n`. The padding is large enough that no wrap-around occurs.
pub struct ToeplitzOp {
    n: usize,
    len: usize,
    spectrum: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl ToeplitzOp {
    /// `kernel(m)` is queried for `m` in `-(n-1)..=(n-1)`.
    pub fn new(n: usize, kernel: impl Fn(i64) -> f64) -> Self {
        let len = 4 * n;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let mut spectrum = vec![Complex64::new(0.0, 0.0); len];
        for m in 0..n as i64 {
            spectrum[m as usize] = Complex64::new(kernel(m), 0.0);
            if m > 0 {
                spectrum[len - m as usize] = Complex64::new(kernel(-m), 0.0);
            }
        }
        forward.process(&mut spectrum);
        let scale = 1.0 / len as f64;
        for s in &mut spectrum {
            *s *= scale;
        }
        ToeplitzOp {
            n,
            len,
            spectrum,
            forward,
            inverse,
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Multiplier applied in frequency space, indexed like the FFT output.
    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.apply_pair(x, None).0
    }

    /// Convolve two real sequences with one complex transform.
    pub fn apply_pair(&self, a: &[f64], b: Option<&[f64]>) -> (Vec<f64>, Vec<f64>) {
        assert_eq!(a.len(), self.n);
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len];
        match b {
            Some(b) => {
                assert_eq!(b.len(), self.n);
                for i in 0..self.n {
                    buf[i] = Complex64::new(a[i], b[i]);
                }
            }
            None => {
                for i in 0..self.n {
                    buf[i] = Complex64::new(a[i], 0.0);
                }
            }
        }
        self.forward.process(&mut buf);
        for (z, s) in buf.iter_mut().zip(&self.spectrum) {
            *z *= s;
        }
        self.inverse.process(&mut buf);
        let re = buf[..self.n].iter().map(|z| z.re).collect();
        let im = if b.is_some() {
            buf[..self.n].iter().map(|z| z.im).collect()
        } else {
            Vec::new()
        };
        (re, im)
    }
}
