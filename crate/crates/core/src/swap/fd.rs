//! Central finite differences used to validate analytic partials.

use crate::error::{Error, Result};
use crate::swap::function::{check_order, Interval, SmoothFunction};

/// Default step for order `p` at coordinate value `xi`.
///
/// Chosen near the truncation/round-off balance of each stencil
/// (both stencils have O(h⁴) truncation error).
pub fn default_step(p: usize, xi: f64) -> f64 {
    let base = match p {
        1 => 1e-3,
        2 => 2e-3,
        _ => 6e-3,
    };
    base * xi.abs().max(1.0)
}

/// Estimate `∂_i^p f(x)` from values only.
///
/// Five-point stencil for `p ≤ 2`, seven-point for `p = 3`. Fails if a
/// stencil node leaves `domain`.
pub fn fd_partial<F>(f: F, domain: Interval, i: usize, p: usize, x: &[f64], step: Option<f64>) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    check_order(p)?;
    if i >= x.len() {
        return Err(Error::CoordinateOutOfRange { index: i, dimension: x.len() });
    }
    let xi = x[i];
    let h = step.unwrap_or_else(|| default_step(p, xi));
    let reach = if p == 3 { 3.0 } else { 2.0 };
    if !domain.contains(xi - reach * h) || !domain.contains(xi + reach * h) {
        return Err(Error::StencilOutsideDomain { x: xi, lo: domain.lo, hi: domain.hi });
    }
    let mut y = x.to_vec();
    let mut at = |k: f64| {
        y[i] = xi + k * h;
        f(&y)
    };
    let est = match p {
        1 => (-at(2.0) + 8.0 * at(1.0) - 8.0 * at(-1.0) + at(-2.0)) / (12.0 * h),
        2 => (-at(2.0) + 16.0 * at(1.0) - 30.0 * at(0.0) + 16.0 * at(-1.0) - at(-2.0)) / (12.0 * h * h),
        _ => (-at(3.0) + 8.0 * at(2.0) - 13.0 * at(1.0) + 13.0 * at(-1.0) - 8.0 * at(-2.0) + at(-3.0)) / (8.0 * h * h * h),
    };
    Ok(est)
}

/// Wraps a function so that `partial` is answered by finite differences of
/// `value` instead of the analytic formulas.
#[derive(Debug, Clone, Copy)]
pub struct FiniteDifferenced<F>(pub F);

impl<F: SmoothFunction> SmoothFunction for FiniteDifferenced<F> {
    fn dimension(&self) -> usize {
        self.0.dimension()
    }

    fn domain(&self) -> Interval {
        self.0.domain()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.0.value(x)
    }

    fn partial(&self, i: usize, p: usize, x: &[f64]) -> f64 {
        fd_partial(|y| self.0.value(y), self.0.domain(), i, p, x, None).unwrap_or(f64::NAN)
    }
}

/// Relative discrepancy `|a - b| / max(|a|, floor)`.
pub fn relative_error(analytic: f64, estimate: f64, floor: f64) -> f64 {
    (analytic - estimate).abs() / analytic.abs().max(floor)
}
