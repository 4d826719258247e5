//! Exponential weight ω, algebraic weight ρ_r and the smooth cutoffs built on
//! a polynomial smoothstep.

use serde::{Deserialize, Serialize};

fn binom(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Symmetric polynomial smoothstep on [0, 1] with `order` continuous derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Smoothstep {
    /// Ascending coefficients of the step itself.
    coeffs: Vec<f64>,
    /// Ascending coefficients of its antiderivative vanishing at 0.
    integral: Vec<f64>,
}

impl Smoothstep {
    pub fn new(order: usize) -> Self {
        let n = order as u64;
        let mut coeffs = vec![0.0; 2 * order + 2];
        for k in 0..=n {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            coeffs[(n + 1 + k) as usize] = sign * binom(n + k, k) * binom(2 * n + 1, n - k);
        }
        let mut integral = vec![0.0; coeffs.len() + 1];
        for (k, c) in coeffs.iter().enumerate() {
            integral[k + 1] = c / (k + 1) as f64;
        }
        Self { coeffs, integral }
    }

    /// Quintic C² step `6s⁵ − 15s⁴ + 10s³`.
    pub fn quintic() -> Self {
        Self::new(2)
    }

    fn horner(c: &[f64], s: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &v| acc * s + v)
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            0.0
        } else if s >= 1.0 {
            1.0
        } else {
            Self::horner(&self.coeffs, s)
        }
    }

    /// `∫_0^s step`, continued linearly past 1.
    pub fn antiderivative(&self, s: f64) -> f64 {
        if s <= 0.0 {
            0.0
        } else if s >= 1.0 {
            0.5 + (s - 1.0)
        } else {
            Self::horner(&self.integral, s)
        }
    }
}

/// `ω = exp(η h(x))` with `h = 0` for x ≤ −1, `h = x` for x ≥ 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub eta_star: f64,
    step: Smoothstep,
}

impl Weights {
    /// Blend smooth enough for operators of order 2m.
    pub fn new(eta_star: f64, order_half: usize) -> Self {
        Self { eta_star, step: Smoothstep::new(2 * order_half + 2) }
    }

    /// Profile `h` of the exponent.
    pub fn h(&self, x: f64) -> f64 {
        if x <= -1.0 {
            0.0
        } else if x >= 1.0 {
            x
        } else {
            2.0 * self.step.antiderivative((x + 1.0) / 2.0)
        }
    }

    pub fn log_omega(&self, x: f64) -> f64 {
        self.eta_star * self.h(x)
    }

    pub fn omega(&self, x: f64) -> f64 {
        self.log_omega(x).exp()
    }

    /// `ω(x) / ω(y)` without forming either factor.
    pub fn ratio(&self, x: f64, y: f64) -> f64 {
        (self.log_omega(x) - self.log_omega(y)).exp()
    }

    /// Cutoff equal to 0 for x ≤ −1 and 1 for x ≥ 1.
    pub fn chi_plus(&self, x: f64) -> f64 {
        self.step.eval((x + 1.0) / 2.0)
    }

    /// `ρ_r`: ⟨x⟩^r for x ≥ 1, 1 for x ≤ −1.
    pub fn rho(&self, r: f64, x: f64) -> f64 {
        (r * 0.5 * (1.0 + x * x).ln() * self.chi_plus(x)).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quintic_coefficients() {
        let s = Smoothstep::quintic();
        for &x in &[0.1f64, 0.4, 0.77] {
            let q: f64 = 6.0 * x.powi(5) - 15.0 * x.powi(4) + 10.0 * x.powi(3);
            assert!((s.eval(x) - q).abs() < 1e-14);
        }
    }

    #[test]
    fn smoothstep_symmetric_and_half_area() {
        for order in 1..8 {
            let s = Smoothstep::new(order);
            assert!((s.antiderivative(1.0 - 1e-15) - 0.5).abs() < 1e-10, "order {order}");
            for &x in &[0.13, 0.5, 0.81] {
                assert!((s.eval(x) + s.eval(1.0 - x) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn omega_limits_and_continuity() {
        let w = Weights::new(0.7, 2);
        assert_eq!(w.omega(-3.0), 1.0);
        assert!((w.omega(2.5) - (0.7f64 * 2.5).exp()).abs() < 1e-12);
        for &x in &[-1.0, 1.0] {
            let l = w.log_omega(x - 1e-9);
            let r = w.log_omega(x + 1e-9);
            assert!((l - r).abs() < 1e-8);
        }
        assert!(w.omega(0.3) > 0.0);
    }

    #[test]
    fn derivatives_continuous_at_blend_ends() {
        // h' must be C^{2m} at ±1; probe the first few by one-sided differences
        let w = Weights::new(1.0, 1);
        let hp = |x: f64| {
            let e = 1e-5;
            (w.h(x + e) - w.h(x - e)) / (2.0 * e)
        };
        assert!((hp(1.0 - 1e-3) - 1.0).abs() < 1e-6);
        assert!(hp(-1.0 + 1e-3).abs() < 1e-6);
    }

    #[test]
    fn rho_limits() {
        let w = Weights::new(1.0, 1);
        assert_eq!(w.rho(2.1, -5.0), 1.0);
        assert!((w.rho(2.1, 4.0) - 17f64.powf(1.05)).abs() < 1e-10);
        assert!((w.rho(-1.0, 9.0) - 1.0 / 82f64.sqrt()).abs() < 1e-14);
        let mut prev = 0.0;
        for i in 0..50 {
            let v = w.rho(2.1, 1.0 + i as f64 * 0.5);
            assert!(v > prev);
            prev = v;
        }
    }
}
