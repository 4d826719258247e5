//! The scalar equation `u_t = P(∂x) u + f(u)`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("order_half must be positive")]
    ZeroOrder,
    #[error("expected {expected} coefficients p1..p2m, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("ellipticity fails: (-1)^m p_2m = {0} must be negative")]
    NotElliptic(f64),
    #[error("nonlinearity is empty")]
    EmptyNonlinearity,
    #[error("f(u_minus) = {0} is not zero")]
    NotRestState(f64),
    #[error("f'(0) = {0} must be positive")]
    StableAtZero(f64),
    #[error("f'(u_minus) = {0} must be negative")]
    UnstableWake(f64),
    #[error("non-finite coefficient")]
    NonFinite,
}

/// `p[k-1]` multiplies `ν^k`; `f[k-1]` multiplies `u^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub order_half: usize,
    pub p: Vec<f64>,
    #[serde(rename = "f")]
    pub f_coeffs: Vec<f64>,
    pub u_minus: f64,
}

impl ModelSpec {
    pub fn new(order_half: usize, p: Vec<f64>, f_coeffs: Vec<f64>, u_minus: f64) -> Result<Self, ModelError> {
        let s = Self { order_half, p, f_coeffs, u_minus };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let m = self.order_half;
        if m == 0 {
            return Err(ModelError::ZeroOrder);
        }
        if self.p.len() != 2 * m {
            return Err(ModelError::WrongLength { expected: 2 * m, got: self.p.len() });
        }
        if self.f_coeffs.is_empty() {
            return Err(ModelError::EmptyNonlinearity);
        }
        if !self.p.iter().chain(&self.f_coeffs).chain(std::iter::once(&self.u_minus)).all(|v| v.is_finite()) {
            return Err(ModelError::NonFinite);
        }
        let top = if m.is_multiple_of(2) { 1.0 } else { -1.0 } * self.p[2 * m - 1];
        if top >= 0.0 {
            return Err(ModelError::NotElliptic(top));
        }
        let scale = 1.0 + self.f_coeffs.iter().map(|c| c.abs()).sum::<f64>() * (1.0 + self.u_minus.abs()).powi(self.f_coeffs.len() as i32);
        let fu = self.f(self.u_minus);
        if fu.abs() > 1e-12 * scale {
            return Err(ModelError::NotRestState(fu));
        }
        let d0 = self.df(0.0);
        if d0 <= 0.0 {
            return Err(ModelError::StableAtZero(d0));
        }
        let dm = self.df(self.u_minus);
        if dm >= 0.0 {
            return Err(ModelError::UnstableWake(dm));
        }
        Ok(())
    }

    /// Coefficient of `ν^k` in `P`, with `p_0 = 0`.
    pub fn p_coeff(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.p.get(k - 1).copied().unwrap_or(0.0)
        }
    }

    pub fn degree(&self) -> usize {
        2 * self.order_half
    }

    pub fn f(&self, u: f64) -> f64 {
        self.f_coeffs.iter().rev().fold(0.0, |acc, &c| (acc + c) * u)
    }

    pub fn df(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for (k, &c) in self.f_coeffs.iter().enumerate().rev() {
            acc = acc * u + c * (k + 1) as f64;
        }
        acc
    }

    pub fn d2f(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for (k, &c) in self.f_coeffs.iter().enumerate().rev().take(self.f_coeffs.len().saturating_sub(1)) {
            acc = acc * u + c * ((k + 1) * k) as f64;
        }
        acc
    }

    pub fn max_abs_p(&self) -> f64 {
        self.p.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Mirror image `x -> -x`: `p_k -> (-1)^k p_k`.
    pub fn reflected(&self) -> Self {
        let p = self.p.iter().enumerate().map(|(i, &v)| if (i + 1) % 2 == 1 { -v } else { v }).collect();
        Self { p, ..self.clone() }
    }

    pub fn fkpp() -> Self {
        Self { order_half: 1, p: vec![0.0, 1.0], f_coeffs: vec![1.0, -1.0], u_minus: 1.0 }
    }

    /// `P = ν² − δ²ν⁴`, `f = u − u²`; δ = 0 falls back to FKPP.
    pub fn efkpp(delta: f64) -> Self {
        if delta == 0.0 {
            return Self::fkpp();
        }
        Self { order_half: 2, p: vec![0.0, 1.0, 0.0, -delta * delta], f_coeffs: vec![1.0, -1.0], u_minus: 1.0 }
    }

    /// `f = u (u + δ)(1 − δ − u)`, `u_minus = 1 − δ`.
    pub fn cubic(delta: f64) -> Self {
        Self {
            order_half: 1,
            p: vec![0.0, 1.0],
            f_coeffs: vec![delta * (1.0 - delta), 1.0 - 2.0 * delta, -1.0],
            u_minus: 1.0 - delta,
        }
    }
}

/// One-parameter families used in sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Family {
    Constant { spec: ModelSpec },
    Efkpp,
    Cubic,
}

impl Family {
    pub fn at(&self, delta: f64) -> ModelSpec {
        match self {
            Family::Constant { spec } => spec.clone(),
            Family::Efkpp => ModelSpec::efkpp(delta),
            Family::Cubic => ModelSpec::cubic(delta),
        }
    }
}
