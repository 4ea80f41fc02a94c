//! Sherrington–Kirkpatrick model: free energy and ground state by exact
//! enumeration, the family of spin-configuration functions, and the
//! universality experiments built on them.
//!
//! Coordinates are the couplings `x_{ij}`, `i < j`, in row-major order.
//! Spin configurations are encoded as `N`-bit codes with spin 0 in the most
//! significant bit and a set bit meaning `σ = −1`.

use serde::Serialize;

use crate::distributions::{DistributionSpec, MomentValue};
use crate::error::{finite, Error, Result};
use crate::numeric::CompensatedSum;
use crate::smoothmax::{corollary2_bound, theorem2_lambda_bounds, theorem3_bound, FunctionFamily, MemberEval};
use crate::swap::bounds::{best_theorem1_bound, c_constants, corollary1_bound, gamma_of, truncated_sums_iid, TruncatedSums};
use crate::swap::function::{check_order, SmoothFunction};
use crate::swap::monte_carlo::{gap_from_pairs, GapReport, PairedDesign};
use crate::swap::test_function::TestFunction;

/// Largest spin count accepted by the exact enumerations.
pub const MAX_SPINS: usize = 24;

/// Flat index map between coordinates and pairs `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CouplingLayout {
    spins: usize,
}

impl CouplingLayout {
    pub fn new(spins: usize) -> Result<Self> {
        if spins < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 spins, got {spins}")));
        }
        Ok(CouplingLayout { spins })
    }

    /// Spin count `N`.
    pub fn spins(&self) -> usize {
        self.spins
    }

    /// Coordinate count `N(N−1)/2`.
    pub fn len(&self) -> usize {
        self.spins * (self.spins - 1) / 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat index of the pair `{i, j}`, `i ≠ j`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        debug_assert!(i < j && j < self.spins);
        // row i starts after Σ_{r<i} (N − 1 − r) entries
        i * (self.spins - 1) - i * i.saturating_sub(1) / 2 + (j - i - 1)
    }

    /// The pair `(i, j)`, `i < j`, at flat index `k`.
    pub fn pair(&self, k: usize) -> Result<(usize, usize)> {
        if k >= self.len() {
            return Err(Error::CoordinateOutOfRange { index: k, dimension: self.len() });
        }
        let mut start = 0;
        for i in 0..self.spins - 1 {
            let row = self.spins - 1 - i;
            if k < start + row {
                return Ok((i, i + 1 + (k - start)));
            }
            start += row;
        }
        unreachable!("index checked against len")
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: x.len() });
        }
        Ok(())
    }

    fn check_enumerable(&self) -> Result<()> {
        if self.spins > MAX_SPINS {
            return Err(Error::EnumerationTooLarge { n: self.spins, max: MAX_SPINS });
        }
        Ok(())
    }

    /// Dense symmetric coupling matrix `c·x_{ij}` with zero diagonal.
    fn dense(&self, x: &[f64], c: f64) -> Vec<f64> {
        let n = self.spins;
        let mut j = vec![0.0; n * n];
        let mut k = 0;
        for a in 0..n {
            for b in a + 1..n {
                j[a * n + b] = c * x[k];
                j[b * n + a] = c * x[k];
                k += 1;
            }
        }
        j
    }
}

/// Inverse temperature and external field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SkParams {
    beta: f64,
    h: f64,
}

impl SkParams {
    pub fn new(beta: f64, h: f64) -> Result<Self> {
        finite("beta", beta)?;
        finite("h", h)?;
        if beta <= 0.0 {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
        }
        Ok(SkParams { beta, h })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn h(&self) -> f64 {
        self.h
    }
}

/// `α = A·N` and `K = ε√N` for the ground-state bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroundStateBoundParams {
    a: f64,
    epsilon: f64,
}

impl GroundStateBoundParams {
    pub fn new(a: f64, epsilon: f64) -> Result<Self> {
        finite("A", a)?;
        finite("epsilon", epsilon)?;
        if a < 1.0 {
            return Err(Error::InvalidParameter(format!("A must be at least 1, got {a}")));
        }
        if epsilon <= 0.0 {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(GroundStateBoundParams { a, epsilon })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

fn spin(code: u32, spins: usize, i: usize) -> f64 {
    if code >> (spins - 1 - i) & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Spin vector of a configuration code.
pub fn spins_of(code: u32, spins: usize) -> Vec<i8> {
    (0..spins).map(|i| spin(code, spins, i) as i8).collect()
}

fn check_sigma(layout: &CouplingLayout, sigma: &[i8]) -> Result<()> {
    if sigma.len() != layout.spins {
        return Err(Error::DimensionMismatch { expected: layout.spins, got: sigma.len() });
    }
    if sigma.iter().any(|&s| s != 1 && s != -1) {
        return Err(Error::InvalidParameter("spins must be ±1".into()));
    }
    Ok(())
}

/// `Σ_{i<j} x_{ij} σ_i σ_j`, summed in coordinate order.
pub fn pair_energy(layout: &CouplingLayout, sigma: &[i8], x: &[f64]) -> Result<f64> {
    layout.check(x)?;
    check_sigma(layout, sigma)?;
    Ok(pair_energy_unchecked(layout, |i| f64::from(sigma[i]), x))
}

fn pair_energy_unchecked(layout: &CouplingLayout, s: impl Fn(usize) -> f64, x: &[f64]) -> f64 {
    let n = layout.spins;
    let mut total = CompensatedSum::new();
    let mut k = 0;
    for i in 0..n {
        let si = s(i);
        for j in i + 1..n {
            total.add(x[k] * si * s(j));
            k += 1;
        }
    }
    total.value()
}

/// `f_σ(x) = β N^{-3/2} Σ_{i<j} x_{ij} σ_i σ_j + β h N⁻¹ Σ_i σ_i`.
pub fn family_member(layout: &CouplingLayout, params: &SkParams, sigma: &[i8], x: &[f64]) -> Result<f64> {
    let pairs = pair_energy(layout, sigma, x)?;
    let n = layout.spins as f64;
    let field: f64 = sigma.iter().map(|&s| f64::from(s)).sum();
    Ok(params.beta * n.powf(-1.5) * pairs + params.beta * params.h * field / n)
}

/// Analytic `λ₂(𝓕)`, `λ₃(𝓕)` and `log |𝓕|` of the configuration family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyLambda {
    pub lambda2: f64,
    pub lambda3: f64,
    pub log_size: f64,
}

/// `λ₂ = β²N⁻³`, `λ₃ = β³N^{-9/2}`, `log |𝓕| = N log 2`.
pub fn family_lambda(params: &SkParams, spins: usize) -> Result<FamilyLambda> {
    let fam = SkFamily::new(CouplingLayout::new(spins)?, *params);
    let l = fam.lambda();
    Ok(FamilyLambda { lambda2: l.lambda2, lambda3: l.lambda3, log_size: fam.log_size() })
}

/// `(3β²N⁻², 13β³N^{-5/2})`: the soft-max bounds at `α = N`.
pub fn free_energy_lambda(params: &SkParams, spins: usize) -> Result<(f64, f64)> {
    let fam = SkFamily::new(CouplingLayout::new(spins)?, *params);
    theorem2_lambda_bounds(&fam, spins as f64)
}

/// The `2^N` functions `f_σ` as a family; members are visited in code order
/// and each is evaluated directly.
#[derive(Debug, Clone, Copy)]
pub struct SkFamily {
    layout: CouplingLayout,
    params: SkParams,
}

impl SkFamily {
    pub fn new(layout: CouplingLayout, params: SkParams) -> Self {
        SkFamily { layout, params }
    }

    fn member_value(&self, code: u32, x: &[f64]) -> f64 {
        let n = self.layout.spins;
        let nf = n as f64;
        let pairs = pair_energy_unchecked(&self.layout, |i| spin(code, n, i), x);
        let field: f64 = (0..n).map(|i| spin(code, n, i)).sum();
        self.params.beta * nf.powf(-1.5) * pairs + self.params.beta * self.params.h * field / nf
    }
}

impl FunctionFamily for SkFamily {
    fn dimension(&self) -> usize {
        self.layout.len()
    }

    /// `2^N`, saturating for spin counts beyond the word size.
    fn len(&self) -> usize {
        1usize.checked_shl(self.layout.spins as u32).unwrap_or(usize::MAX)
    }

    fn log_size(&self) -> f64 {
        self.layout.spins as f64 * std::f64::consts::LN_2
    }

    fn derivative_sups(&self) -> [f64; 3] {
        [self.params.beta * (self.layout.spins as f64).powf(-1.5), 0.0, 0.0]
    }

    fn for_each_value(&self, x: &[f64], visit: &mut dyn FnMut(f64)) {
        for code in 0..1u32 << self.layout.spins {
            visit(self.member_value(code, x));
        }
    }

    fn for_each_member(&self, x: &[f64], k: usize, visit: &mut dyn FnMut(MemberEval)) {
        let n = self.layout.spins;
        let (i, j) = self.layout.pair(k).expect("coordinate in range");
        let scale = self.params.beta * (n as f64).powf(-1.5);
        for code in 0..1u32 << n {
            let d1 = scale * spin(code, n, i) * spin(code, n, j);
            visit(MemberEval { value: self.member_value(code, x), d: [d1, 0.0, 0.0] });
        }
    }
}

/// One configuration function `f_σ` as a `SmoothFunction`.
#[derive(Debug, Clone)]
pub struct SkMember {
    layout: CouplingLayout,
    params: SkParams,
    sigma: Vec<i8>,
}

impl SkMember {
    pub fn new(layout: CouplingLayout, params: SkParams, sigma: Vec<i8>) -> Result<Self> {
        check_sigma(&layout, &sigma)?;
        Ok(SkMember { layout, params, sigma })
    }
}

impl SmoothFunction for SkMember {
    fn dimension(&self) -> usize {
        self.layout.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        family_member(&self.layout, &self.params, &self.sigma, x).expect("dimension checked by caller")
    }

    fn partial(&self, k: usize, p: usize, _x: &[f64]) -> f64 {
        check_order(p).expect("derivative order must be 1, 2 or 3");
        if p > 1 {
            return 0.0;
        }
        let (i, j) = self.layout.pair(k).expect("coordinate in range");
        self.params.beta * (self.layout.spins as f64).powf(-1.5) * f64::from(self.sigma[i] * self.sigma[j])
    }
}

/// Visits every configuration in Gray-code order with its exponent
/// `N f_σ(x) = β N^{-1/2} Σ x_{ij} σ_i σ_j + β h Σ σ_i`, updated in `O(N)` per flip.
fn gray_exponents(layout: &CouplingLayout, params: &SkParams, x: &[f64], mut visit: impl FnMut(f64)) {
    let n = layout.spins;
    let nf = n as f64;
    let coupling = params.beta / nf.sqrt();
    let field = params.beta * params.h;
    let j = layout.dense(x, coupling);
    let mut s = vec![1.0f64; n];
    let mut pairs = compensated_dense_energy(&j, n);
    let mut magnet = nf;
    visit(pairs + field * magnet);
    for step in 1u64..1u64 << n {
        let k = step.trailing_zeros() as usize;
        let row = &j[k * n..(k + 1) * n];
        let local: f64 = row.iter().zip(&s).map(|(a, b)| a * b).sum();
        pairs -= 2.0 * s[k] * local;
        magnet -= 2.0 * s[k];
        s[k] = -s[k];
        visit(pairs + field * magnet);
    }
}

fn compensated_dense_energy(j: &[f64], n: usize) -> f64 {
    let mut total = CompensatedSum::new();
    for a in 0..n {
        for b in a + 1..n {
            total.add(j[a * n + b]);
        }
    }
    total.value()
}

/// `F(x) = N⁻¹ log Σ_σ exp(N f_σ(x))`, by Gray-code enumeration with a
/// running log-sum-exp.
pub fn free_energy(layout: &CouplingLayout, params: &SkParams, x: &[f64]) -> Result<f64> {
    layout.check(x)?;
    layout.check_enumerable()?;
    let mut top = f64::NEG_INFINITY;
    let mut scaled = 0.0f64;
    gray_exponents(layout, params, x, |v| {
        if v > top {
            scaled = scaled * (top - v).exp() + 1.0;
            top = v;
        } else {
            scaled += (v - top).exp();
        }
    });
    Ok((top + scaled.ln()) / layout.spins as f64)
}

/// The free energy as a `SmoothFunction`; partials come from the soft-max
/// derivative chain at `α = N`.
#[derive(Debug, Clone, Copy)]
pub struct FreeEnergy {
    layout: CouplingLayout,
    params: SkParams,
}

impl FreeEnergy {
    pub fn new(layout: CouplingLayout, params: SkParams) -> Result<Self> {
        layout.check_enumerable()?;
        Ok(FreeEnergy { layout, params })
    }
}

impl SmoothFunction for FreeEnergy {
    fn dimension(&self) -> usize {
        self.layout.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        free_energy(&self.layout, &self.params, x).expect("dimension checked by caller")
    }

    fn partial(&self, i: usize, p: usize, x: &[f64]) -> f64 {
        check_order(p).expect("derivative order must be 1, 2 or 3");
        let fam = SkFamily::new(self.layout, self.params);
        crate::smoothmax::softmax_partials(&fam, self.layout.spins as f64, x, i).expect("validated family")[p - 1]
    }
}

/// A maximizing configuration and `S_N(x) = max_σ Σ_{i<j} x_{ij} σ_i σ_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub value: f64,
    pub sigma: Vec<i8>,
    pub code: u32,
}

/// Exact ground state over the `2^{N−1}` configurations with `σ_0 = +1`.
///
/// Among maximizers the smallest code wins (first spin `+1`, then
/// lexicographic with `+1 < −1`). The returned value is recomputed by direct
/// summation in coordinate order.
pub fn ground_state(layout: &CouplingLayout, x: &[f64]) -> Result<GroundState> {
    layout.check(x)?;
    layout.check_enumerable()?;
    let n = layout.spins;
    let j = layout.dense(x, 1.0);
    let scale: f64 = x.iter().map(|v| v.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    // incremental energies drift by a few ulps of `scale`; anything within
    // `slack` of the best is re-evaluated exactly
    let slack = 1e-9 * scale;

    let exact = |code: u32| pair_energy_unchecked(layout, |i| spin(code, n, i), x);
    let mut s = vec![1.0f64; n];
    let mut code = 0u32;
    let mut running = compensated_dense_energy(&j, n);
    let mut best_code = 0u32;
    let mut best = exact(0);
    for step in 1u64..1u64 << (n - 1) {
        // Gray bit b flips spin n−1−b, so spin 0 stays +1
        let b = step.trailing_zeros() as usize;
        let k = n - 1 - b;
        let row = &j[k * n..(k + 1) * n];
        let local: f64 = row.iter().zip(&s).map(|(a, b)| a * b).sum();
        running -= 2.0 * s[k] * local;
        s[k] = -s[k];
        code ^= 1 << b;
        if running >= best - slack {
            let e = exact(code);
            if e > best || (e == best && code < best_code) {
                best = e;
                best_code = code;
            }
        }
    }
    Ok(GroundState { value: best, sigma: spins_of(best_code, n), code: best_code })
}

/// Ground state by direct evaluation of all `2^N` configurations, with the
/// same tie-break as `ground_state`.
pub fn ground_state_brute_force(layout: &CouplingLayout, x: &[f64]) -> Result<GroundState> {
    layout.check(x)?;
    layout.check_enumerable()?;
    let n = layout.spins;
    let mut best = f64::NEG_INFINITY;
    let mut best_code = 0u32;
    for code in 0..1u32 << n {
        let e = pair_energy_unchecked(layout, |i| spin(code, n, i), x);
        if e > best {
            best = e;
            best_code = code;
        }
    }
    Ok(GroundState { value: best, sigma: spins_of(best_code, n), code: best_code })
}

/// `max_σ f_σ(x)`; uses the symmetric half-enumeration when `h = 0`.
pub fn max_member(layout: &CouplingLayout, params: &SkParams, x: &[f64]) -> Result<f64> {
    let nf = layout.spins as f64;
    if params.h == 0.0 {
        return Ok(params.beta * nf.powf(-1.5) * ground_state(layout, x)?.value);
    }
    layout.check(x)?;
    layout.check_enumerable()?;
    let mut top = f64::NEG_INFINITY;
    gray_exponents(layout, params, x, |v| top = top.max(v));
    Ok(top / nf)
}

/// Explicit ground-state bound at `α = AN`, `K = ε√N` (`β = 1`, `h = 0`).
///
/// With the body sum replaced by its ceiling `K·2n`, the soft-max max bound
/// becomes `c₁/A + c₂·A·N⁻²·T₁ + c₃·A²·ε` with
/// `c₁ = 2 log 2 ‖g′‖`, `c₂ = 3C₁(g)`, `c₃ = 13C₂(g)(N−1)/N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroundStateBound {
    pub smoothing: f64,
    pub tail: f64,
    pub body: f64,
    /// `smoothing + tail + body`.
    pub total: f64,
    /// `(A⁻¹, A N⁻² T₁, A² ε)`, the parameter-dependent factors of the three terms.
    pub structure: [f64; 3],
    /// The max bound evaluated with the actual body sum `T₂` instead of `K·2n`.
    pub with_body_sum: f64,
}

pub fn ground_state_bound(
    g: &TestFunction,
    spins: usize,
    bound_params: &GroundStateBoundParams,
    sums: &TruncatedSums,
) -> Result<GroundStateBound> {
    let layout = CouplingLayout::new(spins)?;
    let (a, eps) = (bound_params.a, bound_params.epsilon);
    let nf = spins as f64;
    let k = eps * nf.sqrt();
    if (sums.k - k).abs() > 1e-12 * k {
        return Err(Error::InvalidParameter(format!("truncated sums taken at K = {}, expected ε√N = {k}", sums.k)));
    }
    let (c1, c2) = c_constants(g)?;
    let smoothing = 2.0 * std::f64::consts::LN_2 * g.norms()[0] / a;
    let tail = if sums.t1 == 0.0 { 0.0 } else { 3.0 * c1 * a * sums.t1 / (nf * nf) };
    let body = 13.0 * c2 * a * a * eps * (nf - 1.0) / nf;
    let fam = SkFamily::new(layout, SkParams::new(1.0, 0.0)?);
    let with_body_sum = theorem3_bound(g, a * nf, &fam, sums.t1, sums.t2)?;
    Ok(GroundStateBound {
        smoothing,
        tail,
        body,
        total: smoothing + tail + body,
        structure: [1.0 / a, a * sums.t1 / (nf * nf), a * a * eps],
        with_body_sum,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SkKind {
    FreeEnergy,
    GroundState,
}

impl SkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SkKind::FreeEnergy => "free_energy",
            SkKind::GroundState => "ground_state",
        }
    }
}

/// Gap report of one S-K experiment plus the model parameters.
#[derive(Debug, Clone, Serialize)]
pub struct SkReport {
    pub kind: SkKind,
    pub spins: usize,
    pub beta: f64,
    pub h: f64,
    pub dist_x: String,
    pub dist_y: String,
    /// Which bound was applied.
    pub bound_kind: &'static str,
    pub gap: GapReport,
}

/// Paired comparison of the free energy or of `max_σ f_σ` between i.i.d.
/// coupling laws.
///
/// Free energy: `2C₂ γ n λ₃(F)` with `λ₃(F)` from the soft-max bound at
/// `α = N`, or the best main bound over a truncation grid when `γ = ∞`.
/// Ground state: the optimized max bound, or the max bound at `α = AN`,
/// `K = ε√N` when `γ = ∞`.
#[allow(clippy::too_many_arguments)]
pub fn sk_experiment(
    kind: SkKind,
    spec_x: &DistributionSpec,
    spec_y: &DistributionSpec,
    params: &SkParams,
    spins: usize,
    replicates: usize,
    g: &TestFunction,
    seed: u64,
    bound_params: &GroundStateBoundParams,
) -> Result<SkReport> {
    let layout = CouplingLayout::new(spins)?;
    layout.check_enumerable()?;
    let n = layout.len();
    let gamma = gamma_of(&[spec_x, spec_y]);
    let family = SkFamily::new(layout, *params);
    let (bound, bound_kind) = match (kind, gamma) {
        (SkKind::FreeEnergy, MomentValue::Finite(_)) => {
            let (_, l3) = free_energy_lambda(params, spins)?;
            (corollary1_bound(c_constants(g)?.1, gamma, n, l3)?, "corollary1")
        }
        (SkKind::FreeEnergy, MomentValue::Infinite) => {
            let (l2, l3) = free_energy_lambda(params, spins)?;
            let levels: Vec<f64> = (1..=200).map(|j| 0.05 * j as f64 * (spins as f64).sqrt()).collect();
            (best_theorem1_bound(g, l2, l3, spec_x, spec_y, n, &levels)?.bound, "theorem1_grid")
        }
        (SkKind::GroundState, MomentValue::Finite(_)) => (corollary2_bound(g, gamma, n, &family)?, "corollary2"),
        (SkKind::GroundState, MomentValue::Infinite) => {
            let nf = spins as f64;
            let sums = truncated_sums_iid(spec_x, spec_y, n, bound_params.epsilon * nf.sqrt())?;
            (theorem3_bound(g, bound_params.a * nf, &family, sums.t1, sums.t2)?, "theorem3")
        }
    };

    let xs = vec![spec_x.clone(); n];
    let ys = vec![spec_y.clone(); n];
    let label = format!("sk-{}", kind.as_str());
    let design = PairedDesign::new(&label, &xs, &ys, replicates, seed)?;
    let pairs = design.run(|x| match kind {
        SkKind::FreeEnergy => free_energy(&layout, params, x),
        SkKind::GroundState => max_member(&layout, params, x),
    });
    let pairs: Vec<(f64, f64)> = pairs.into_iter().map(|(u, v)| Ok((u?, v?))).collect::<Result<_>>()?;
    Ok(SkReport {
        kind,
        spins,
        beta: params.beta,
        h: params.h,
        dist_x: spec_x.to_string(),
        dist_y: spec_y.to_string(),
        bound_kind,
        gap: gap_from_pairs(&label, n, &pairs, g, seed, bound),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;
    use crate::smoothmax::{family_max, softmax_value};
    use crate::swap::lambda::estimate_lambda;
    use rand::seq::SliceRandom;

    fn random_x(layout: &CouplingLayout, seed: u64, spec: &DistributionSpec) -> Vec<f64> {
        (0..layout.len()).map(|c| spec.sample(&mut RandomStream::new(seed, 11, 0, c as u64))).collect()
    }

    fn unit() -> SkParams {
        SkParams::new(1.0, 0.0).unwrap()
    }

    #[test]
    fn layout_is_a_bijection() {
        for spins in 2..=9 {
            let l = CouplingLayout::new(spins).unwrap();
            let mut k = 0;
            for i in 0..spins {
                for j in i + 1..spins {
                    assert_eq!(l.index(i, j), k);
                    assert_eq!(l.index(j, i), k);
                    assert_eq!(l.pair(k).unwrap(), (i, j));
                    k += 1;
                }
            }
            assert_eq!(k, l.len());
        }
        assert!(CouplingLayout::new(1).is_err());
    }

    #[test]
    fn parameter_guards() {
        assert!(SkParams::new(0.0, 0.0).is_err());
        assert!(SkParams::new(-1.0, 0.0).is_err());
        assert!(GroundStateBoundParams::new(0.5, 1.0).is_err());
        assert!(GroundStateBoundParams::new(1.0, 0.0).is_err());
        let l = CouplingLayout::new(25).unwrap();
        assert!(matches!(free_energy(&l, &unit(), &vec![0.0; l.len()]), Err(Error::EnumerationTooLarge { .. })));
    }

    #[test]
    fn member_examples() {
        let l = CouplingLayout::new(2).unwrap();
        let p = SkParams::new(1.7, 0.0).unwrap();
        assert_eq!(family_member(&l, &p, &[1, 1], &[0.0]).unwrap(), 0.0);
        let v = family_member(&l, &p, &[1, 1], &[0.9]).unwrap();
        assert!((v - 1.7 * 2f64.powf(-1.5) * 0.9).abs() < 1e-15);
        let l = CouplingLayout::new(5).unwrap();
        let x = random_x(&l, 1, &DistributionSpec::gaussian());
        let sigma = vec![1, -1, -1, 1, -1];
        let flipped: Vec<i8> = sigma.iter().map(|s| -s).collect();
        assert_eq!(family_member(&l, &p, &sigma, &x).unwrap(), family_member(&l, &p, &flipped, &x).unwrap());
        assert!(family_member(&l, &p, &[1, 1], &x).is_err());
    }

    #[test]
    fn lambda_values() {
        let fl = family_lambda(&unit(), 10).unwrap();
        assert!((fl.lambda2 - 1e-3).abs() < 1e-18);
        assert!((fl.lambda3 - 10f64.powf(-4.5)).abs() < 1e-18);
        assert!((fl.log_size - 10.0 * 2f64.ln()).abs() < 1e-14);
        let doubled = family_lambda(&SkParams::new(2.0, 0.0).unwrap(), 10).unwrap();
        assert!((doubled.lambda2 / fl.lambda2 - 4.0).abs() < 1e-12);
        assert!((doubled.lambda3 / fl.lambda3 - 8.0).abs() < 1e-12);
        let (l2, l3) = free_energy_lambda(&unit(), 10).unwrap();
        assert!((l2 - 0.03).abs() < 1e-15);
        assert!((l3 - 13.0 * 10f64.powf(-2.5)).abs() < 1e-15);
    }

    #[test]
    fn empirical_member_lambda_equals_analytic() {
        let spins = 6;
        let l = CouplingLayout::new(spins).unwrap();
        let p = SkParams::new(1.3, 0.2).unwrap();
        let pts: Vec<Vec<f64>> = (0..5).map(|s| random_x(&l, s, &DistributionSpec::gaussian())).collect();
        let mut l2 = 0.0f64;
        let mut l3 = 0.0f64;
        for code in 0..1u32 << spins {
            let m = SkMember::new(l, p, spins_of(code, spins)).unwrap();
            let e = estimate_lambda(&m, &pts).unwrap();
            l2 = l2.max(e.lambda2);
            l3 = l3.max(e.lambda3);
        }
        let fl = family_lambda(&p, spins).unwrap();
        assert!((l2 - fl.lambda2).abs() <= 1e-15 * fl.lambda2);
        assert!((l3 - fl.lambda3).abs() <= 1e-15 * fl.lambda3);
    }

    #[test]
    fn free_energy_closed_forms() {
        let l = CouplingLayout::new(2).unwrap();
        for &(beta, x) in &[(1.0, 0.8), (2.5, -1.3)] {
            let p = SkParams::new(beta, 0.0).unwrap();
            let oracle = 0.5 * (4.0 * (x * beta / 2f64.sqrt()).cosh()).ln();
            assert!((free_energy(&l, &p, &[x]).unwrap() - oracle).abs() < 1e-15);
        }
        let l = CouplingLayout::new(7).unwrap();
        let p = SkParams::new(0.9, 0.6).unwrap();
        let oracle = (2.0 * (0.9f64 * 0.6).cosh()).ln();
        assert!((free_energy(&l, &p, &vec![0.0; l.len()]).unwrap() - oracle).abs() < 1e-14);
    }

    #[test]
    fn free_energy_matches_streaming_softmax_and_sandwich() {
        for spins in [3, 6, 9] {
            let l = CouplingLayout::new(spins).unwrap();
            let p = SkParams::new(1.1, 0.3).unwrap();
            let fam = SkFamily::new(l, p);
            for seed in 0..5 {
                let x = random_x(&l, seed, &DistributionSpec::gaussian());
                let f = free_energy(&l, &p, &x).unwrap();
                let s = softmax_value(&fam, spins as f64, &x).unwrap();
                assert!((f - s).abs() <= 1e-12 * (1.0 + f.abs()), "{f} vs {s}");
                let top = family_max(&fam, &x).unwrap();
                assert!((max_member(&l, &p, &x).unwrap() - top).abs() < 1e-12);
                assert!(f >= top && f <= top + 2f64.ln());
            }
        }
    }

    #[test]
    fn free_energy_invariant_under_spin_relabeling() {
        let spins = 5;
        let l = CouplingLayout::new(spins).unwrap();
        let p = SkParams::new(1.0, 0.4).unwrap();
        let mut rng = RandomStream::new(3, 0, 0, 0);
        for seed in 0..10 {
            let x = random_x(&l, seed, &DistributionSpec::gaussian());
            let mut perm: Vec<usize> = (0..spins).collect();
            perm.shuffle(&mut rng);
            let mut y = vec![0.0; l.len()];
            for i in 0..spins {
                for j in i + 1..spins {
                    y[l.index(perm[i], perm[j])] = x[l.index(i, j)];
                }
            }
            let (a, b) = (free_energy(&l, &p, &x).unwrap(), free_energy(&l, &p, &y).unwrap());
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn gauge_symmetry_at_zero_field() {
        // flipping σ_i for i ∈ S is a bijection of configurations that negates
        // exactly the couplings across the cut (S, Sᶜ)
        let p = unit();
        for spins in 2..=6 {
            let l = CouplingLayout::new(spins).unwrap();
            for seed in 0..4 {
                let x = random_x(&l, seed, &DistributionSpec::gaussian());
                for subset in 0..1u32 << spins {
                    let mut y = x.clone();
                    for (k, v) in y.iter_mut().enumerate() {
                        let (i, j) = l.pair(k).unwrap();
                        if (subset >> i & 1) != (subset >> j & 1) {
                            *v = -*v;
                        }
                    }
                    let (a, b) = (free_energy(&l, &p, &x).unwrap(), free_energy(&l, &p, &y).unwrap());
                    assert!((a - b).abs() < 1e-13);
                }
            }
        }
        // with two spins the only coupling is a cut edge, so F(−x) = F(x)
        let l = CouplingLayout::new(2).unwrap();
        assert!((free_energy(&l, &p, &[0.7]).unwrap() - free_energy(&l, &p, &[-0.7]).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn ground_state_examples() {
        for spins in [2, 5, 9] {
            let l = CouplingLayout::new(spins).unwrap();
            let gs = ground_state(&l, &vec![1.0; l.len()]).unwrap();
            assert_eq!(gs.value, l.len() as f64);
            assert!(gs.sigma.iter().all(|&s| s == 1));
        }
        let l = CouplingLayout::new(3).unwrap();
        let x = [1.0, -1.0, 1.0];
        let mut oracle = f64::NEG_INFINITY;
        for code in 0..8u32 {
            let s = spins_of(code, 3);
            let e = x[0] * f64::from(s[0] * s[1]) + x[1] * f64::from(s[0] * s[2]) + x[2] * f64::from(s[1] * s[2]);
            oracle = oracle.max(e);
        }
        let gs = ground_state(&l, &x).unwrap();
        assert_eq!(gs.value, oracle);
        let flipped: Vec<i8> = gs.sigma.iter().map(|s| -s).collect();
        assert_eq!(pair_energy(&l, &flipped, &x).unwrap(), gs.value);
        assert_eq!(gs.sigma[0], 1);
    }

    #[test]
    fn half_enumeration_matches_brute_force() {
        for spins in 2..=10 {
            let l = CouplingLayout::new(spins).unwrap();
            for (seed, spec) in [(1, DistributionSpec::gaussian()), (2, DistributionSpec::rademacher())] {
                let x = random_x(&l, seed + spins as u64 * 10, &spec);
                let half = ground_state(&l, &x).unwrap();
                let full = ground_state_brute_force(&l, &x).unwrap();
                assert_eq!(half, full, "N={spins}");
            }
        }
    }

    #[test]
    fn ground_state_bound_forms() {
        let g = TestFunction::tanh();
        let r = DistributionSpec::rademacher();
        let spins = 16;
        let bp = GroundStateBoundParams::new(2.0, 0.5).unwrap();
        let l = CouplingLayout::new(spins).unwrap();
        let k = 0.5 * 4.0;
        let sums = truncated_sums_iid(&r, &r, l.len(), k).unwrap();
        let b = ground_state_bound(&g, spins, &bp, &sums).unwrap();
        assert_eq!(b.tail, 0.0);
        let fam = SkFamily::new(l, unit());
        let direct = theorem3_bound(&g, 2.0 * spins as f64, &fam, sums.t1, k * 2.0 * l.len() as f64).unwrap();
        assert!((b.total - direct).abs() <= 1e-12 * direct);
        assert!(b.with_body_sum <= b.total);
        let tiny = GroundStateBoundParams::new(1.0, 1e-9).unwrap();
        let sums = truncated_sums_iid(&r, &r, l.len(), 1e-9 * 4.0).unwrap();
        let b = ground_state_bound(&g, spins, &tiny, &sums).unwrap();
        // below K = 1 every Rademacher draw is in the tail
        assert!(b.tail > 0.0);
        assert!((b.smoothing - 2.0 * 2f64.ln() * g.norms()[0]).abs() < 1e-15);
        assert!(b.body < 1e-7);
        assert!(ground_state_bound(&g, spins, &bp, &sums).is_err());
    }

    #[test]
    fn ground_state_bounds_decrease_in_n() {
        let g = TestFunction::tanh();
        let r = DistributionSpec::rademacher();
        let bp = GroundStateBoundParams::new(1.0, 1.0).unwrap();
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for spins in [8, 12, 16] {
            let l = CouplingLayout::new(spins).unwrap();
            let c2 = corollary2_bound(&g, MomentValue::Finite(1.0), l.len(), &SkFamily::new(l, unit())).unwrap();
            let sums = truncated_sums_iid(&r, &r, l.len(), (spins as f64).sqrt()).unwrap();
            let fixed = ground_state_bound(&g, spins, &bp, &sums).unwrap().with_body_sum;
            assert!(c2 < prev.0 && fixed < prev.1);
            prev = (c2, fixed);
        }
    }

    #[test]
    fn identical_laws_within_noise() {
        let g = TestFunction::tanh();
        let z = DistributionSpec::gaussian();
        let bp = GroundStateBoundParams::new(1.0, 1.0).unwrap();
        for kind in [SkKind::FreeEnergy, SkKind::GroundState] {
            let r = sk_experiment(kind, &z, &z, &unit(), 6, 400, &g, 5, &bp).unwrap();
            assert!(r.gap.mc_gap() <= 4.0 * r.gap.std_error());
            assert!(r.gap.passed());
        }
    }

    #[test]
    fn heavy_tails_use_fallback_bounds() {
        let g = TestFunction::tanh();
        let heavy = DistributionSpec::pareto(2.5).unwrap();
        let bp = GroundStateBoundParams::new(1.0, 1.0).unwrap();
        let r = sk_experiment(SkKind::FreeEnergy, &heavy, &DistributionSpec::gaussian(), &unit(), 5, 200, &g, 1, &bp).unwrap();
        assert_eq!(r.bound_kind, "theorem1_grid");
        let r = sk_experiment(SkKind::GroundState, &heavy, &DistributionSpec::gaussian(), &unit(), 5, 200, &g, 1, &bp).unwrap();
        assert_eq!(r.bound_kind, "theorem3");
        assert!(r.gap.theoretical_bound().is_finite());
    }
}
