//! Soft-max smoothing `F_α(x) = α⁻¹ log Σ_f e^{α f(x)}` of a finite family,
//! its derivative chain through the Gibbs weights, and the max bounds built on it.

use crate::distributions::MomentValue;
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::swap::bounds::{c_constants, k_constant, theorem1_bound};
use crate::swap::function::{check_order, Interval, SmoothFunction};
use crate::swap::lambda::{LambdaEstimate, LambdaKind};
use crate::swap::test_function::TestFunction;

/// Value and first three partials in one coordinate of a single family member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemberEval {
    pub value: f64,
    pub d: [f64; 3],
}

/// A finite family of smooth functions on a common domain `I^n`.
///
/// Members are visited through callbacks so that exponentially large families
/// never have to be materialized.
pub trait FunctionFamily: Send + Sync {
    fn dimension(&self) -> usize;

    /// Number of members, `m`.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `log m`.
    fn log_size(&self) -> f64 {
        (self.len() as f64).ln()
    }

    fn domain(&self) -> Interval {
        Interval::REAL_LINE
    }

    /// Family-wide bounds `C_p ≥ sup |∂_i^p f|` for `p = 1, 2, 3`.
    fn derivative_sups(&self) -> [f64; 3];

    /// Analytic `λ_r(𝓕)` from the derivative suprema.
    fn lambda(&self) -> LambdaEstimate {
        LambdaEstimate::from_order_sups(self.derivative_sups(), LambdaKind::AnalyticBound)
    }

    /// Calls `visit` with `f(x)` for every member, in a fixed order.
    fn for_each_value(&self, x: &[f64], visit: &mut dyn FnMut(f64));

    /// Calls `visit` with the value and coordinate-`i` partials of every
    /// member, in the same order as `for_each_value`.
    fn for_each_member(&self, x: &[f64], i: usize, visit: &mut dyn FnMut(MemberEval));
}

impl<T: FunctionFamily + ?Sized> FunctionFamily for &T {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn len(&self) -> usize {
        (**self).len()
    }
    fn log_size(&self) -> f64 {
        (**self).log_size()
    }
    fn domain(&self) -> Interval {
        (**self).domain()
    }
    fn derivative_sups(&self) -> [f64; 3] {
        (**self).derivative_sups()
    }
    fn for_each_value(&self, x: &[f64], visit: &mut dyn FnMut(f64)) {
        (**self).for_each_value(x, visit)
    }
    fn for_each_member(&self, x: &[f64], i: usize, visit: &mut dyn FnMut(MemberEval)) {
        (**self).for_each_member(x, i, visit)
    }
}

/// A family given as an explicit list of members with caller-certified
/// derivative suprema.
pub struct ExplicitFamily {
    members: Vec<Box<dyn SmoothFunction>>,
    sups: [f64; 3],
}

impl ExplicitFamily {
    pub fn new(members: Vec<Box<dyn SmoothFunction>>, sups: [f64; 3]) -> Result<Self> {
        let first = members.first().ok_or(Error::EmptyFamily)?;
        let n = first.dimension();
        let domain = first.domain();
        for m in &members {
            if m.dimension() != n {
                return Err(Error::DimensionMismatch { expected: n, got: m.dimension() });
            }
            if m.domain() != domain {
                return Err(Error::InvalidParameter("family members must share a domain".into()));
            }
        }
        for (p, &c) in sups.iter().enumerate() {
            crate::error::nonnegative(["C1", "C2", "C3"][p], c)?;
        }
        Ok(ExplicitFamily { members, sups })
    }

    pub fn members(&self) -> &[Box<dyn SmoothFunction>] {
        &self.members
    }

    /// Largest ratio `|∂_i^p f(x)| / C_p` seen over the points; at most 1 when
    /// the declared suprema are valid there.
    pub fn sup_violation(&self, points: &[Vec<f64>]) -> f64 {
        let mut worst = 0.0f64;
        for x in points {
            for i in 0..self.dimension() {
                self.for_each_member(x, i, &mut |e| {
                    for p in 0..3 {
                        let r = if self.sups[p] > 0.0 {
                            e.d[p].abs() / self.sups[p]
                        } else if e.d[p] == 0.0 {
                            0.0
                        } else {
                            f64::INFINITY
                        };
                        worst = worst.max(r);
                    }
                });
            }
        }
        worst
    }
}

impl FunctionFamily for ExplicitFamily {
    fn dimension(&self) -> usize {
        self.members[0].dimension()
    }
    fn len(&self) -> usize {
        self.members.len()
    }
    fn domain(&self) -> Interval {
        self.members[0].domain()
    }
    fn derivative_sups(&self) -> [f64; 3] {
        self.sups
    }
    fn for_each_value(&self, x: &[f64], visit: &mut dyn FnMut(f64)) {
        for m in &self.members {
            visit(m.value(x));
        }
    }
    fn for_each_member(&self, x: &[f64], i: usize, visit: &mut dyn FnMut(MemberEval)) {
        for m in &self.members {
            visit(MemberEval { value: m.value(x), d: [m.partial(i, 1, x), m.partial(i, 2, x), m.partial(i, 3, x)] });
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_nan() || alpha < 1.0 {
        return Err(Error::AlphaBelowOne(alpha));
    }
    if alpha.is_infinite() {
        return Err(Error::NonFinite { name: "alpha", value: alpha });
    }
    Ok(())
}

fn check_point<F: FunctionFamily + ?Sized>(family: &F, x: &[f64]) -> Result<()> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if x.len() != family.dimension() {
        return Err(Error::DimensionMismatch { expected: family.dimension(), got: x.len() });
    }
    Ok(())
}

fn max_value<F: FunctionFamily + ?Sized>(family: &F, x: &[f64]) -> f64 {
    let mut top = f64::NEG_INFINITY;
    family.for_each_value(x, &mut |v| top = top.max(v));
    top
}

/// `max_f f(x)`.
pub fn family_max<F: FunctionFamily + ?Sized>(family: &F, x: &[f64]) -> Result<f64> {
    check_point(family, x)?;
    Ok(max_value(family, x))
}

/// `F_α(x)`, evaluated in two passes: the maximum first, then the shifted sum
/// `Σ e^{α(f − max)}`, which lies in `[1, m]`.
pub fn softmax_value<F: FunctionFamily + ?Sized>(family: &F, alpha: f64, x: &[f64]) -> Result<f64> {
    check_alpha(alpha)?;
    check_point(family, x)?;
    let top = max_value(family, x);
    let mut z = CompensatedSum::new();
    family.for_each_value(x, &mut |v| z.add((alpha * (v - top)).exp()));
    Ok(top + z.value().ln() / alpha)
}

/// `∂_i p = (a_i − e_i) p`.
#[inline]
pub fn weight_d1(a: f64, e: f64, p: f64) -> f64 {
    (a - e) * p
}

/// `∂_i² p = (∂_i a_i − ∂_i e_i) p + (a_i − e_i)² p`.
#[inline]
pub fn weight_d2(a: f64, da: f64, e: f64, de: f64, p: f64) -> f64 {
    (da - de) * p + (a - e) * (a - e) * p
}

/// `∂_i e_i` summand: `p ∂_i a_i + a_i ∂_i p`.
#[inline]
fn score_d1_term(a: f64, da: f64, p: f64, dp: f64) -> f64 {
    p * da + a * dp
}

/// `∂_i² e_i` summand: `p ∂_i² a_i + 2 ∂_i a_i ∂_i p + a_i ∂_i² p`.
#[inline]
fn score_d2_term(a: f64, da: f64, d2a: f64, p: f64, dp: f64, d2p: f64) -> f64 {
    p * d2a + 2.0 * da * dp + a * d2p
}

/// `(∂_i F_α, ∂_i² F_α, ∂_i³ F_α)` at `x`.
///
/// The family is streamed four times: the maximum, then `Z` and `e_i`, then
/// `∂_i e_i`, then `∂_i² e_i`. Memory use does not grow with the family size.
pub fn softmax_partials<F: FunctionFamily + ?Sized>(family: &F, alpha: f64, x: &[f64], i: usize) -> Result<[f64; 3]> {
    check_alpha(alpha)?;
    check_point(family, x)?;
    if i >= family.dimension() {
        return Err(Error::CoordinateOutOfRange { index: i, dimension: family.dimension() });
    }
    let top = max_value(family, x);
    let weight = |v: f64| (alpha * (v - top)).exp();

    let mut z = CompensatedSum::new();
    let mut ez = CompensatedSum::new();
    family.for_each_member(x, i, &mut |m| {
        let w = weight(m.value);
        z.add(w);
        ez.add(alpha * m.d[0] * w);
    });
    let z = z.value();
    let e = ez.value() / z;

    let mut de = CompensatedSum::new();
    family.for_each_member(x, i, &mut |m| {
        let p = weight(m.value) / z;
        let a = alpha * m.d[0];
        de.add(score_d1_term(a, alpha * m.d[1], p, weight_d1(a, e, p)));
    });
    let de = de.value();

    let mut d2e = CompensatedSum::new();
    family.for_each_member(x, i, &mut |m| {
        let p = weight(m.value) / z;
        let (a, da, d2a) = (alpha * m.d[0], alpha * m.d[1], alpha * m.d[2]);
        let dp = weight_d1(a, e, p);
        d2e.add(score_d2_term(a, da, d2a, p, dp, weight_d2(a, da, e, de, p)));
    });

    Ok([e / alpha, de / alpha, d2e.value() / alpha])
}

/// Materialized Gibbs weights, scores, and their coordinate derivatives at one
/// point, for inspecting the derivative chain term by term.
#[derive(Debug, Clone)]
pub struct SoftMaxState {
    pub alpha: f64,
    pub coordinate: usize,
    /// `log Z(x)`.
    pub log_z: f64,
    pub p: Vec<f64>,
    pub a: Vec<f64>,
    pub da: Vec<f64>,
    pub d2a: Vec<f64>,
    pub dp: Vec<f64>,
    pub d2p: Vec<f64>,
    pub e: f64,
    pub de: f64,
    pub d2e: f64,
}

impl SoftMaxState {
    pub fn new<F: FunctionFamily + ?Sized>(family: &F, alpha: f64, x: &[f64], i: usize) -> Result<Self> {
        check_alpha(alpha)?;
        check_point(family, x)?;
        if i >= family.dimension() {
            return Err(Error::CoordinateOutOfRange { index: i, dimension: family.dimension() });
        }
        let mut members = Vec::with_capacity(family.len());
        family.for_each_member(x, i, &mut |m| members.push(m));
        let top = members.iter().map(|m| m.value).fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = members.iter().map(|m| (alpha * (m.value - top)).exp()).collect();
        let z: f64 = w.iter().copied().collect::<CompensatedSum>().value();
        let p: Vec<f64> = w.iter().map(|w| w / z).collect();
        let a: Vec<f64> = members.iter().map(|m| alpha * m.d[0]).collect();
        let da: Vec<f64> = members.iter().map(|m| alpha * m.d[1]).collect();
        let d2a: Vec<f64> = members.iter().map(|m| alpha * m.d[2]).collect();
        let e = (0..p.len()).map(|k| a[k] * p[k]).collect::<CompensatedSum>().value();
        let dp: Vec<f64> = (0..p.len()).map(|k| weight_d1(a[k], e, p[k])).collect();
        let de = (0..p.len()).map(|k| score_d1_term(a[k], da[k], p[k], dp[k])).collect::<CompensatedSum>().value();
        let d2p: Vec<f64> = (0..p.len()).map(|k| weight_d2(a[k], da[k], e, de, p[k])).collect();
        let d2e =
            (0..p.len()).map(|k| score_d2_term(a[k], da[k], d2a[k], p[k], dp[k], d2p[k])).collect::<CompensatedSum>().value();
        Ok(SoftMaxState { alpha, coordinate: i, log_z: alpha * top + z.ln(), p, a, da, d2a, dp, d2p, e, de, d2e })
    }

    /// `(∂_i F, ∂_i² F, ∂_i³ F) = α⁻¹ (e_i, ∂_i e_i, ∂_i² e_i)`.
    pub fn partials(&self) -> [f64; 3] {
        [self.e / self.alpha, self.de / self.alpha, self.d2e / self.alpha]
    }

    /// Checks the five chain inequalities against the family suprema
    /// `[C₁, C₂, C₃]`. Each check compares `lhs ≤ rhs·(1 + rel_slack)`.
    pub fn chain_check(&self, sups: [f64; 3], rel_slack: f64) -> ChainCheck {
        let [c1, c2, c3] = sups;
        let al = self.alpha;
        let ok = |lhs: f64, rhs: f64| lhs <= rhs * (1.0 + rel_slack);
        let componentwise = |d: &[f64], factor: f64| (0..self.p.len()).all(|k| ok(d[k].abs(), factor * self.p[k]));
        ChainCheck {
            score: ok(self.e.abs(), al * c1),
            weight_d1: componentwise(&self.dp, 2.0 * al * c1),
            score_d1: ok(self.de.abs(), al * al * (c2 + 2.0 * c1 * c1)),
            weight_d2: componentwise(&self.d2p, al * al * (2.0 * c2 + 6.0 * c1 * c1)),
            score_d2: ok(self.d2e.abs(), al.powi(3) * (c3 + 6.0 * c1 * c2 + 6.0 * c1.powi(3))),
        }
    }
}

/// Outcome of the five derivative-chain inequalities at one point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainCheck {
    /// `|e_i| ≤ α C₁`
    pub score: bool,
    /// `|∂_i p| ≤ 2α C₁ p`
    pub weight_d1: bool,
    /// `|∂_i e_i| ≤ α² (C₂ + 2C₁²)`
    pub score_d1: bool,
    /// `|∂_i² p| ≤ α² (2C₂ + 6C₁²) p`
    pub weight_d2: bool,
    /// `|∂_i² e_i| ≤ α³ (C₃ + 6C₁C₂ + 6C₁³)`
    pub score_d2: bool,
}

impl ChainCheck {
    pub fn all(&self) -> bool {
        self.score && self.weight_d1 && self.score_d1 && self.weight_d2 && self.score_d2
    }
}

/// `(3α λ₂(𝓕), 13α² λ₃(𝓕))`, upper bounds on `λ₂(F_α)` and `λ₃(F_α)`.
pub fn theorem2_lambda_bounds<F: FunctionFamily + ?Sized>(family: &F, alpha: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let l = family.lambda();
    Ok((3.0 * alpha * l.lambda2, 13.0 * alpha * alpha * l.lambda3))
}

/// `α⁻¹ log m`, the width of the band `max f ≤ F_α ≤ max f + α⁻¹ log m`.
pub fn uniform_gap_bound<F: FunctionFamily + ?Sized>(family: &F, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    Ok(family.log_size() / alpha)
}

/// `2‖g′‖ α⁻¹ log m + 3α C₁(g) λ₂(𝓕) T₁(K) + 13α² C₂(g) λ₃(𝓕) T₂(K)`.
pub fn theorem3_bound<F: FunctionFamily + ?Sized>(g: &TestFunction, alpha: f64, family: &F, t1k: f64, t2k: f64) -> Result<f64> {
    let (c1, c2) = c_constants(g)?;
    let (l2, l3) = theorem2_lambda_bounds(family, alpha)?;
    let smoothing = 2.0 * g.norms()[0] * uniform_gap_bound(family, alpha)?;
    Ok(smoothing + theorem1_bound(c1, c2, l2, l3, t1k, t2k)?)
}

/// `α* = [(γ n λ₃)^{-2/3} (log m)^{2/3} + 1]^{1/2}`; infinite when `γ n λ₃ = 0`
/// and `m > 1`.
pub fn optimal_alpha(gamma_n_lambda3: f64, log_m: f64) -> f64 {
    (gamma_n_lambda3.powf(-2.0 / 3.0) * log_m.powf(2.0 / 3.0) + 1.0).sqrt()
}

/// `K(g) [(γ n λ₃)^{1/3} (log m)^{2/3} + γ n λ₃]`; refuses an infinite γ.
pub fn corollary2_bound<F: FunctionFamily + ?Sized>(g: &TestFunction, gamma: MomentValue, n: usize, family: &F) -> Result<f64> {
    let gamma = gamma.finite().ok_or(Error::InfiniteGamma)?;
    crate::error::nonnegative("gamma", gamma)?;
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let q = gamma * n as f64 * family.lambda().lambda3;
    let log_m = family.log_size();
    Ok(k_constant(g)? * (q.cbrt() * log_m.powf(2.0 / 3.0) + q))
}

/// `F_α` of a family as a `SmoothFunction`.
pub struct SoftMax<F> {
    family: F,
    alpha: f64,
}

impl<F: FunctionFamily> SoftMax<F> {
    pub fn new(family: F, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if family.is_empty() {
            return Err(Error::EmptyFamily);
        }
        Ok(SoftMax { family, alpha })
    }

    pub fn family(&self) -> &F {
        &self.family
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl<F: FunctionFamily> SmoothFunction for SoftMax<F> {
    fn dimension(&self) -> usize {
        self.family.dimension()
    }

    fn domain(&self) -> Interval {
        self.family.domain()
    }

    fn value(&self, x: &[f64]) -> f64 {
        softmax_value(&self.family, self.alpha, x).expect("validated family and alpha")
    }

    fn partial(&self, i: usize, p: usize, x: &[f64]) -> f64 {
        check_order(p).expect("derivative order must be 1, 2 or 3");
        softmax_partials(&self.family, self.alpha, x, i).expect("validated family and alpha")[p - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;
    use crate::swap::fd::{fd_partial, relative_error};
    use crate::swap::function::{ConstantFunction, CoordinatePower, MeanFunction, Scaled};
    use rand::Rng;

    /// `f(x) = sin(x₀ + c)·s + t·x₁²`, smooth with explicit partials.
    struct Wave {
        shift: f64,
        amp: f64,
        quad: f64,
    }

    impl SmoothFunction for Wave {
        fn dimension(&self) -> usize {
            2
        }
        fn value(&self, x: &[f64]) -> f64 {
            self.amp * (x[0] + self.shift).sin() + self.quad * x[1] * x[1]
        }
        fn partial(&self, i: usize, p: usize, x: &[f64]) -> f64 {
            if i == 0 {
                let t = x[0] + self.shift;
                self.amp * [t.cos(), -t.sin(), -t.cos()][p - 1]
            } else {
                [2.0 * self.quad * x[1], 2.0 * self.quad, 0.0][p - 1]
            }
        }
    }

    fn waves() -> ExplicitFamily {
        let members: Vec<Box<dyn SmoothFunction>> = vec![
            Box::new(Wave { shift: 0.0, amp: 1.0, quad: 0.1 }),
            Box::new(Wave { shift: 1.3, amp: 0.8, quad: -0.2 }),
            Box::new(Wave { shift: -2.1, amp: 0.5, quad: 0.25 }),
        ];
        // |x₁| stays below 2 in the tests: |∂₁ f| ≤ max(1, 4·0.25) = 1
        ExplicitFamily::new(members, [1.0, 1.0, 1.0]).unwrap()
    }

    fn random_points(seed: u64, count: usize, dim: usize, half_width: f64) -> Vec<Vec<f64>> {
        let mut rng = RandomStream::new(seed, 0, 0, 0);
        (0..count).map(|_| (0..dim).map(|_| rng.random_range(-half_width..half_width)).collect()).collect()
    }

    #[test]
    fn single_member_is_identity() {
        let fam = ExplicitFamily::new(vec![Box::new(Wave { shift: 0.4, amp: 1.0, quad: 0.3 })], [1.0, 1.0, 1.0]).unwrap();
        let x = [0.7, -0.3];
        let w = Wave { shift: 0.4, amp: 1.0, quad: 0.3 };
        assert!((softmax_value(&fam, 3.0, &x).unwrap() - w.value(&x)).abs() < 1e-15);
        for i in 0..2 {
            let d = softmax_partials(&fam, 3.0, &x, i).unwrap();
            for p in 1..=3 {
                assert!((d[p - 1] - w.partial(i, p, &x)).abs() < 1e-13, "i={i} p={p}");
            }
        }
    }

    #[test]
    fn equal_members_shift_by_log_m() {
        let m = 5;
        let members: Vec<Box<dyn SmoothFunction>> =
            (0..m).map(|_| Box::new(MeanFunction::new(3)) as Box<dyn SmoothFunction>).collect();
        let fam = ExplicitFamily::new(members, [1.0 / 3f64.sqrt(), 0.0, 0.0]).unwrap();
        let x = [0.2, 1.0, -0.4];
        let alpha = 2.5;
        let expected = MeanFunction::new(3).value(&x) + (m as f64).ln() / alpha;
        assert!((softmax_value(&fam, alpha, &x).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn two_member_hand_value() {
        let members: Vec<Box<dyn SmoothFunction>> =
            vec![Box::new(ConstantFunction { n: 1, value: 0.0 }), Box::new(CoordinatePower::new(1, 0, 1, Interval::REAL_LINE))];
        let fam = ExplicitFamily::new(members, [1.0, 0.0, 0.0]).unwrap();
        assert!((softmax_value(&fam, 1.0, &[0.0]).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn large_alpha_does_not_overflow() {
        let fam = waves();
        let v = softmax_value(&fam, 1e6, &[0.3, 0.2]).unwrap();
        let top = family_max(&fam, &[0.3, 0.2]).unwrap();
        assert!(v.is_finite() && v >= top && v <= top + 3f64.ln() / 1e6);
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(ExplicitFamily::new(vec![], [0.0; 3]), Err(Error::EmptyFamily)));
        let fam = waves();
        assert!(matches!(softmax_value(&fam, 0.5, &[0.0, 0.0]), Err(Error::AlphaBelowOne(_))));
        assert!(matches!(theorem2_lambda_bounds(&fam, 0.99), Err(Error::AlphaBelowOne(_))));
        assert!(matches!(softmax_partials(&fam, 2.0, &[0.0, 0.0], 2), Err(Error::CoordinateOutOfRange { .. })));
        assert!(matches!(softmax_value(&fam, 2.0, &[0.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn declared_sups_hold_on_samples() {
        let pts = random_points(5, 200, 2, 2.0);
        assert!(waves().sup_violation(&pts) <= 1.0);
    }

    #[test]
    fn partials_match_finite_differences() {
        let fam = waves();
        let alpha = 2.0;
        for x in random_points(11, 50, 2, 1.5) {
            let value = |y: &[f64]| softmax_value(&fam, alpha, y).unwrap();
            for i in 0..2 {
                let d = softmax_partials(&fam, alpha, &x, i).unwrap();
                for p in 1..=3 {
                    let fd = fd_partial(value, Interval::REAL_LINE, i, p, &x, None).unwrap();
                    let tol = if p == 3 { 1e-4 } else { 1e-5 };
                    let err = relative_error(d[p - 1], fd, 1e-3);
                    assert!(err <= tol, "x={x:?} i={i} p={p}: {} vs {fd} ({err:e})", d[p - 1]);
                }
            }
        }
    }

    #[test]
    fn streamed_and_materialized_chains_agree() {
        let fam = waves();
        for x in random_points(3, 20, 2, 1.5) {
            for i in 0..2 {
                let s = SoftMaxState::new(&fam, 4.0, &x, i).unwrap();
                let d = softmax_partials(&fam, 4.0, &x, i).unwrap();
                for (a, b) in s.partials().into_iter().zip(d) {
                    assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
                }
                let total: f64 = s.p.iter().sum();
                assert!((total - 1.0).abs() <= 1e-12);
                assert!((s.log_z / 4.0 - softmax_value(&fam, 4.0, &x).unwrap()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn chain_inequalities_hold() {
        let fam = waves();
        for alpha in [1.0, 3.0, 10.0] {
            for x in random_points(8, 50, 2, 1.9) {
                for i in 0..2 {
                    let s = SoftMaxState::new(&fam, alpha, &x, i).unwrap();
                    assert!(
                        s.chain_check(fam.derivative_sups(), 1e-12).all(),
                        "{:?}",
                        s.chain_check(fam.derivative_sups(), 1e-12)
                    );
                }
            }
        }
    }

    #[test]
    fn sandwich_and_monotone_in_alpha() {
        let fam = waves();
        for x in random_points(21, 1000, 2, 3.0) {
            let top = family_max(&fam, &x).unwrap();
            let mut prev = f64::INFINITY;
            for alpha in [1.0, 1.5, 2.0, 4.0, 8.0, 32.0] {
                let v = softmax_value(&fam, alpha, &x).unwrap();
                assert!(v >= top && v - top <= uniform_gap_bound(&fam, alpha).unwrap() + 1e-15);
                assert!(v <= prev + 1e-15);
                prev = v;
            }
        }
    }

    #[test]
    fn single_member_theorem2_dominates() {
        let fam = ExplicitFamily::new(vec![Box::new(Wave { shift: 0.0, amp: 1.0, quad: 0.0 })], [1.0, 1.0, 1.0]).unwrap();
        let (l2, l3) = theorem2_lambda_bounds(&fam, 1.0).unwrap();
        assert_eq!((l2, l3), (3.0, 13.0));
        let f = SoftMax::new(&fam, 1.0).unwrap();
        let emp = crate::swap::lambda::estimate_lambda(&f, &random_points(1, 100, 2, 3.0)).unwrap();
        assert!(emp.lambda2 <= l2 && emp.lambda3 <= l3);
    }

    #[test]
    fn theorem3_reduces_to_zero() {
        let fam = ExplicitFamily::new(vec![Box::new(MeanFunction::new(2))], [0.5f64.sqrt(), 0.0, 0.0]).unwrap();
        assert_eq!(theorem3_bound(&TestFunction::sin(), 2.0, &fam, 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn corollary2_single_member_and_alpha_star() {
        let fam = ExplicitFamily::new(vec![Box::new(MeanFunction::new(4))], [0.5, 0.0, 0.0]).unwrap();
        let g = TestFunction::sin();
        let b = corollary2_bound(&g, MomentValue::Finite(1.0), 4, &fam).unwrap();
        assert!((b - k_constant(&g).unwrap() * 4.0 * 0.125).abs() < 1e-14);
        assert!(matches!(corollary2_bound(&g, MomentValue::Infinite, 4, &fam), Err(Error::InfiniteGamma)));
        for &q in &[1e-6, 1e-3, 0.1, 1.0, 10.0] {
            for &log_m in &[0.0, 0.5, 3.0, 20.0] {
                let a = optimal_alpha(q, log_m);
                assert!(a >= 1.0);
                if log_m > 0.0 {
                    assert!(1.0 / a <= q.cbrt() * log_m.powf(-1.0 / 3.0) * (1.0 + 1e-14));
                }
            }
        }
    }

    #[test]
    fn corollary2_dominates_theorem3_at_optimal_alpha() {
        // at K = ∞ the truncated third-moment sum is at most 2nγ
        let n = 50usize;
        let scale = (n as f64).powf(-0.5);
        let members: Vec<Box<dyn SmoothFunction>> = (0..n)
            .map(|c| {
                Box::new(Scaled { factor: scale, inner: CoordinatePower::new(n, c, 1, Interval::REAL_LINE) })
                    as Box<dyn SmoothFunction>
            })
            .collect();
        let fam = ExplicitFamily::new(members, [scale, 0.0, 0.0]).unwrap();
        let g = TestFunction::tanh();
        let gamma = 1.7;
        let q = gamma * n as f64 * fam.lambda().lambda3;
        let a = optimal_alpha(q, fam.log_size());
        let t3 = theorem3_bound(&g, a, &fam, 0.0, 2.0 * n as f64 * gamma).unwrap();
        let c2b = corollary2_bound(&g, MomentValue::Finite(gamma), n, &fam).unwrap();
        assert!(t3 <= c2b * (1.0 + 1e-12), "{t3} > {c2b}");
    }
}
