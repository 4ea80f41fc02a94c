//! Swap-bound calculators.

use crate::distributions::{DistributionSpec, MomentValue};
use crate::error::{finite, nonnegative, Error, Result};
use crate::swap::test_function::TestFunction;

/// `(C₁(g), C₂(g))` with `C₁ = ‖g′‖ + ‖g″‖` and `C₂ = ‖g′‖/6 + ‖g″‖/2 + ‖g‴‖/6`.
pub fn c_constants(g: &TestFunction) -> Result<(f64, f64)> {
    let [n1, n2, n3] = g.norms();
    for (name, v) in [("‖g′‖", n1), ("‖g″‖", n2), ("‖g‴‖", n3)] {
        finite(name, v)?;
        nonnegative(name, v)?;
    }
    Ok((n1 + n2, n1 / 6.0 + n2 / 2.0 + n3 / 6.0))
}

/// `K(g) = (19/3)‖g′‖ + 13‖g″‖ + (13/3)‖g‴‖`.
pub fn k_constant(g: &TestFunction) -> Result<f64> {
    let (_, c2) = c_constants(g)?;
    Ok(2.0 * g.norms()[0] + 26.0 * c2)
}

/// Truncated-moment sums over all coordinates of both input vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedSums {
    pub k: f64,
    /// `Σᵢ [E(Xᵢ²; |Xᵢ| > K) + E(Yᵢ²; |Yᵢ| > K)]`
    pub t1: f64,
    /// `Σᵢ [E(|Xᵢ|³; |Xᵢ| ≤ K) + E(|Yᵢ|³; |Yᵢ| ≤ K)]`
    pub t2: f64,
}

pub fn truncated_sums(specs_x: &[DistributionSpec], specs_y: &[DistributionSpec], k: f64) -> Result<TruncatedSums> {
    if specs_x.len() != specs_y.len() {
        return Err(Error::DimensionMismatch { expected: specs_x.len(), got: specs_y.len() });
    }
    let mut t1 = crate::numeric::CompensatedSum::new();
    let mut t2 = crate::numeric::CompensatedSum::new();
    for (x, y) in specs_x.iter().zip(specs_y) {
        t1.add(x.truncated_second_moment(k)? + y.truncated_second_moment(k)?);
        t2.add(x.truncated_third_moment(k)? + y.truncated_third_moment(k)?);
    }
    Ok(TruncatedSums { k, t1: t1.value(), t2: t2.value() })
}

/// Truncated sums for `n` i.i.d. coordinates on each side.
pub fn truncated_sums_iid(spec_x: &DistributionSpec, spec_y: &DistributionSpec, n: usize, k: f64) -> Result<TruncatedSums> {
    let nf = n as f64;
    Ok(TruncatedSums {
        k,
        t1: nf * (spec_x.truncated_second_moment(k)? + spec_y.truncated_second_moment(k)?),
        t2: nf * (spec_x.truncated_third_moment(k)? + spec_y.truncated_third_moment(k)?),
    })
}

/// `C₁·λ₂·T₁(K) + C₂·λ₃·T₂(K)`.
pub fn theorem1_bound(c1: f64, c2: f64, lambda2: f64, lambda3: f64, t1k: f64, t2k: f64) -> Result<f64> {
    nonnegative("C1", c1)?;
    nonnegative("C2", c2)?;
    nonnegative("lambda2", lambda2)?;
    nonnegative("lambda3", lambda3)?;
    nonnegative("T1(K)", t1k)?;
    nonnegative("T2(K)", t2k)?;
    // 0·∞ terms vanish: a zero λ or a zero truncated sum kills its channel
    let term = |a: f64, b: f64| if a == 0.0 || b == 0.0 { 0.0 } else { a * b };
    Ok(term(c1 * lambda2, t1k) + term(c2 * lambda3, t2k))
}

/// `2·C₂·γ·n·λ₃`; refuses an infinite γ.
pub fn corollary1_bound(c2: f64, gamma: MomentValue, n: usize, lambda3: f64) -> Result<f64> {
    let gamma = gamma.finite().ok_or(Error::InfiniteGamma)?;
    nonnegative("C2", c2)?;
    nonnegative("gamma", gamma)?;
    nonnegative("lambda3", lambda3)?;
    Ok(2.0 * c2 * gamma * n as f64 * lambda3)
}

/// γ = max over both input vectors of `E|·|³`.
pub fn gamma_of(specs: &[&DistributionSpec]) -> MomentValue {
    specs.iter().fold(MomentValue::Finite(0.0), |acc, s| acc.max(s.third_abs_moment()))
}

/// One row of a truncation-level sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KSweepPoint {
    pub sums: TruncatedSums,
    pub bound: f64,
}

/// Evaluates `theorem1_bound` for i.i.d. inputs over a grid of truncation levels.
pub fn k_sweep(
    g: &TestFunction,
    lambda2: f64,
    lambda3: f64,
    spec_x: &DistributionSpec,
    spec_y: &DistributionSpec,
    n: usize,
    levels: &[f64],
) -> Result<Vec<KSweepPoint>> {
    let (c1, c2) = c_constants(g)?;
    levels
        .iter()
        .map(|&k| {
            let sums = truncated_sums_iid(spec_x, spec_y, n, k)?;
            Ok(KSweepPoint { sums, bound: theorem1_bound(c1, c2, lambda2, lambda3, sums.t1, sums.t2)? })
        })
        .collect()
}

/// Smallest `theorem1_bound` over `levels`; `f64::INFINITY` is accepted as a
/// level (the untruncated limit).
pub fn best_theorem1_bound(
    g: &TestFunction,
    lambda2: f64,
    lambda3: f64,
    spec_x: &DistributionSpec,
    spec_y: &DistributionSpec,
    n: usize,
    levels: &[f64],
) -> Result<KSweepPoint> {
    let sweep = k_sweep(g, lambda2, lambda3, spec_x, spec_y, n, levels)?;
    sweep
        .into_iter()
        .min_by(|a, b| a.bound.total_cmp(&b.bound))
        .ok_or_else(|| Error::InvalidParameter("empty truncation grid".into()))
}
