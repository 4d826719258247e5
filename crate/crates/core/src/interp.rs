//! Interpolation on uniform grids.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub x0: f64,
    pub x1: f64,
    pub n: usize,
}

impl UniformGrid {
    /// `n` points including both ends.
    pub fn new(x0: f64, x1: f64, n: usize) -> Self {
        assert!(n >= 2 && x1 > x0);
        Self { x0, x1, n }
    }

    pub fn h(&self) -> f64 {
        (self.x1 - self.x0) / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.x1
        } else {
            self.x0 + i as f64 * self.h()
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x0 && x <= self.x1
    }

    /// Index of the node nearest to `x`, clamped.
    pub fn nearest(&self, x: f64) -> usize {
        (((x - self.x0) / self.h()).round().max(0.0) as usize).min(self.n - 1)
    }
}

/// Four-point Lagrange interpolation; `x` must lie within the grid.
pub fn cubic(grid: &UniformGrid, y: &[f64], x: f64) -> f64 {
    debug_assert_eq!(y.len(), grid.n);
    let h = grid.h();
    let s = (x - grid.x0) / h;
    let i = (s.floor() as i64).clamp(1, grid.n as i64 - 3) as usize;
    let t = s - i as f64;
    let (y0, y1, y2, y3) = (y[i - 1], y[i], y[i + 1], y[i + 2]);
    let w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
    let w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    let w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    let w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
    w0 * y0 + w1 * y1 + w2 * y2 + w3 * y3
}

/// Quintic Hermite from values and first two derivatives; C² across nodes.
/// Returns `(f, f', f'')`.
pub fn hermite5(grid: &UniformGrid, f: &[f64], d1: &[f64], d2: &[f64], x: f64) -> (f64, f64, f64) {
    let h = grid.h();
    let s = (x - grid.x0) / h;
    let i = (s.floor() as i64).clamp(0, grid.n as i64 - 2) as usize;
    let t = s - i as f64;
    let (p0, p1) = (f[i], f[i + 1]);
    let (m0, m1) = (d1[i] * h, d1[i + 1] * h);
    let (a0, a1) = (d2[i] * h * h, d2[i + 1] * h * h);
    let (t2, t3, t4, t5) = (t * t, t * t * t, t.powi(4), t.powi(5));
    let h00 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h10 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h20 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
    let h01 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let h11 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h21 = 0.5 * t3 - t4 + 0.5 * t5;
    let d_h00 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
    let d_h10 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
    let d_h20 = t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4;
    let d_h01 = 30.0 * t2 - 60.0 * t3 + 30.0 * t4;
    let d_h11 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
    let d_h21 = 1.5 * t2 - 4.0 * t3 + 2.5 * t4;
    let dd_h00 = -60.0 * t + 180.0 * t2 - 120.0 * t3;
    let dd_h10 = -36.0 * t + 96.0 * t2 - 60.0 * t3;
    let dd_h20 = 1.0 - 9.0 * t + 18.0 * t2 - 10.0 * t3;
    let dd_h01 = 60.0 * t - 180.0 * t2 + 120.0 * t3;
    let dd_h11 = -24.0 * t + 84.0 * t2 - 60.0 * t3;
    let dd_h21 = 3.0 * t - 12.0 * t2 + 10.0 * t3;
    let v = h00 * p0 + h10 * m0 + h20 * a0 + h01 * p1 + h11 * m1 + h21 * a1;
    let dv = (d_h00 * p0 + d_h10 * m0 + d_h20 * a0 + d_h01 * p1 + d_h11 * m1 + d_h21 * a1) / h;
    let ddv = (dd_h00 * p0 + dd_h10 * m0 + dd_h20 * a0 + dd_h01 * p1 + dd_h11 * m1 + dd_h21 * a1) / (h * h);
    (v, dv, ddv)
}
