use serde::Serialize;

use crate::error::{Error, Result};
use crate::swap::function::SmoothFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LambdaKind {
    /// Closed-form value or certified upper bound.
    AnalyticBound,
    /// Supremum over a finite set of sampled points.
    EmpiricalSup,
}

/// Influence measures `λ₁, λ₂, λ₃` of a function or family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaEstimate {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub kind: LambdaKind,
    /// `sup |∂_i^p f|` for `p = 1, 2, 3`, when known.
    pub order_sups: Option<[f64; 3]>,
}

impl LambdaEstimate {
    pub fn analytic(lambda1: f64, lambda2: f64, lambda3: f64) -> Self {
        LambdaEstimate { lambda1, lambda2, lambda3, kind: LambdaKind::AnalyticBound, order_sups: None }
    }

    /// `λ_r = max_{p ≤ r} C_p^{r/p}` from per-order derivative suprema `C_p`.
    pub fn from_order_sups(sups: [f64; 3], kind: LambdaKind) -> Self {
        let lambda = |r: usize| (1..=r).map(|p| sups[p - 1].powf(r as f64 / p as f64)).fold(0.0, f64::max);
        LambdaEstimate { lambda1: lambda(1), lambda2: lambda(2), lambda3: lambda(3), kind, order_sups: Some(sups) }
    }

    pub fn get(&self, r: usize) -> f64 {
        match r {
            1 => self.lambda1,
            2 => self.lambda2,
            3 => self.lambda3,
            _ => panic!("lambda order must be 1, 2 or 3"),
        }
    }

    /// λ of `c·f` recomputed from the stored per-order suprema.
    pub fn scaled(&self, c: f64) -> Option<Self> {
        let s = self.order_sups?;
        Some(Self::from_order_sups(s.map(|v| v * c.abs()), self.kind))
    }

    /// Whether every λ_r is at most the corresponding value of `bound`.
    pub fn dominated_by(&self, bound: &LambdaEstimate, rel_slack: f64) -> bool {
        (1..=3).all(|r| self.get(r) <= bound.get(r) * (1.0 + rel_slack))
    }
}

/// Empirical `λ_r` as the supremum of `|∂_i^p f(x)|^{r/p}` over all
/// coordinates, orders `p ≤ r`, and the given points.
pub fn estimate_lambda<F: SmoothFunction + ?Sized>(f: &F, points: &[Vec<f64>]) -> Result<LambdaEstimate> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let n = f.dimension();
    let mut sups = [0.0f64; 3];
    for x in points {
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.len() });
        }
        let domain = f.domain();
        if let Some(&bad) = x.iter().find(|&&xi| !domain.contains(xi)) {
            return Err(Error::InvalidParameter(format!("point coordinate {bad} outside the domain")));
        }
        for i in 0..n {
            for p in 1..=3 {
                let d = f.partial(i, p, x).abs();
                if d > sups[p - 1] || d.is_nan() {
                    sups[p - 1] = d;
                }
            }
        }
    }
    Ok(LambdaEstimate::from_order_sups(sups, LambdaKind::EmpiricalSup))
}
