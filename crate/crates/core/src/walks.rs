//! Maxima of normalized random-walk partial sums.

use serde::Serialize;

use crate::distributions::{DistributionSpec, MomentValue};
use crate::error::{Error, Result};
use crate::smoothmax::{corollary2_bound, FunctionFamily, MemberEval};
use crate::swap::bounds::gamma_of;
use crate::swap::monte_carlo::{gap_from_pairs, GapReport, PairedDesign};
use crate::swap::test_function::TestFunction;

/// The partial sums `f_i(x) = n^{-1/2} Σ_{j ≤ i} x_j`, `i = 1..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkFamily {
    steps: usize,
}

impl WalkFamily {
    pub fn new(steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidParameter("a walk needs at least one step".into()));
        }
        Ok(WalkFamily { steps })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }
}

impl FunctionFamily for WalkFamily {
    fn dimension(&self) -> usize {
        self.steps
    }

    fn len(&self) -> usize {
        self.steps
    }

    fn derivative_sups(&self) -> [f64; 3] {
        [(self.steps as f64).sqrt().recip(), 0.0, 0.0]
    }

    fn for_each_value(&self, x: &[f64], visit: &mut dyn FnMut(f64)) {
        let scale = (self.steps as f64).sqrt().recip();
        let mut s = 0.0;
        for &v in x {
            s += v;
            visit(s * scale);
        }
    }

    fn for_each_member(&self, x: &[f64], i: usize, visit: &mut dyn FnMut(MemberEval)) {
        let scale = (self.steps as f64).sqrt().recip();
        let mut s = 0.0;
        for (member, &v) in x.iter().enumerate() {
            s += v;
            let d1 = if i <= member { scale } else { 0.0 };
            visit(MemberEval { value: s * scale, d: [d1, 0.0, 0.0] });
        }
    }
}

/// `max_{1 ≤ j ≤ n} n^{-1/2} Σ_{i ≤ j} x_i` in one pass.
pub fn max_partial_sums(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::InvalidParameter("empty walk".into()));
    }
    let mut s = 0.0;
    let mut top = f64::NEG_INFINITY;
    for &v in x {
        s += v;
        top = top.max(s);
    }
    Ok(top / (x.len() as f64).sqrt())
}

/// `K(g) [γ^{1/3} n^{-1/6} (log n)^{2/3} + γ n^{-1/2}]`.
pub fn erdos_kac_bound(g: &TestFunction, gamma: MomentValue, steps: usize) -> Result<f64> {
    if steps < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 steps, got {steps}")));
    }
    corollary2_bound(g, gamma, steps, &WalkFamily::new(steps)?)
}

/// CDF of `|Z|`, `Z` standard normal: `2Φ(t) − 1` for `t ≥ 0`.
pub fn half_normal_reference(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        libm::erf(t / std::f64::consts::SQRT_2)
    }
}

/// Kolmogorov–Smirnov distance between the empirical law of `samples` and a
/// continuous CDF.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let r = sorted.len() as f64;
    let mut worst = 0.0f64;
    for (k, &v) in sorted.iter().enumerate() {
        let f = cdf(v);
        worst = worst.max(f - k as f64 / r).max((k + 1) as f64 / r - f);
    }
    Ok(worst)
}

/// Gap report for the walk maxima plus the distance of the `Y`-side maxima to
/// the half-normal law.
#[derive(Debug, Clone, Serialize)]
pub struct WalkReport {
    pub steps: usize,
    pub dist_x: String,
    pub dist_y: String,
    pub gap: GapReport,
    pub ks_distance: f64,
}

/// Paired comparison of `max_j n^{-1/2} S_j` between i.i.d. step laws,
/// checked against `erdos_kac_bound` with `γ` the larger third absolute moment.
pub fn erdos_kac_experiment(
    spec_x: &DistributionSpec,
    spec_y: &DistributionSpec,
    steps: usize,
    g: &TestFunction,
    replicates: usize,
    seed: u64,
) -> Result<WalkReport> {
    let bound = erdos_kac_bound(g, gamma_of(&[spec_x, spec_y]), steps)?;
    let xs = vec![spec_x.clone(); steps];
    let ys = vec![spec_y.clone(); steps];
    let design = PairedDesign::new("erdos-kac", &xs, &ys, replicates, seed)?;
    let pairs = design.run(|x| max_partial_sums(x).expect("nonempty walk"));
    let maxima: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    Ok(WalkReport {
        steps,
        dist_x: spec_x.to_string(),
        dist_y: spec_y.to_string(),
        gap: gap_from_pairs("erdos-kac", steps, &pairs, g, seed, bound),
        ks_distance: ks_distance(&maxima, half_normal_reference)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::integrate;
    use crate::smoothmax::softmax_value;
    use crate::swap::bounds::k_constant;
    use crate::swap::function::SmoothFunction;
    use crate::swap::lambda::estimate_lambda;

    #[test]
    fn max_partial_sum_examples() {
        let n = 9;
        assert!((max_partial_sums(&vec![1.0; n]).unwrap() - 3.0).abs() < 1e-15);
        assert!((max_partial_sums(&vec![-1.0; n]).unwrap() + 1.0 / 3.0).abs() < 1e-15);
        assert!((max_partial_sums(&[1.0, -2.0, 2.0]).unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!(max_partial_sums(&[]).is_err());
    }

    #[test]
    fn family_max_is_walk_max() {
        let fam = WalkFamily::new(5).unwrap();
        let x = [0.3, -1.2, 2.0, 0.1, -0.7];
        let mut top = f64::NEG_INFINITY;
        fam.for_each_value(&x, &mut |v| top = top.max(v));
        assert_eq!(top, max_partial_sums(&x).unwrap());
        let f = softmax_value(&fam, 50.0, &x).unwrap();
        assert!(f >= top && f <= top + 5f64.ln() / 50.0);
    }

    #[test]
    fn member_lambda_is_exact() {
        struct Member(usize, usize);
        impl SmoothFunction for Member {
            fn dimension(&self) -> usize {
                self.0
            }
            fn value(&self, x: &[f64]) -> f64 {
                x[..=self.1].iter().sum::<f64>() / (self.0 as f64).sqrt()
            }
            fn partial(&self, i: usize, p: usize, _x: &[f64]) -> f64 {
                if p == 1 && i <= self.1 {
                    (self.0 as f64).sqrt().recip()
                } else {
                    0.0
                }
            }
        }
        let n = 16;
        let pts = vec![vec![0.1; n], vec![-2.0; n]];
        let l3 = (0..n).map(|i| estimate_lambda(&Member(n, i), &pts).unwrap().lambda3).fold(0.0, f64::max);
        assert_eq!(l3, (n as f64).powf(-1.5));
        assert!((WalkFamily::new(n).unwrap().lambda().lambda3 - (n as f64).powf(-1.5)).abs() < 1e-18);
    }

    #[test]
    fn bound_values() {
        let g = TestFunction::sin();
        let n = 400usize;
        let nf = n as f64;
        let b = erdos_kac_bound(&g, MomentValue::Finite(1.0), n).unwrap();
        let expected = 71.0 / 3.0 * (nf.powf(-1.0 / 6.0) * nf.ln().powf(2.0 / 3.0) + nf.powf(-0.5));
        assert!((b - expected).abs() <= 1e-12 * expected);
        assert!((k_constant(&g).unwrap() - 71.0 / 3.0).abs() < 1e-13);
        let direct = corollary2_bound(&g, MomentValue::Finite(1.3), n, &WalkFamily::new(n).unwrap()).unwrap();
        assert!((erdos_kac_bound(&g, MomentValue::Finite(1.3), n).unwrap() - direct).abs() <= 1e-12 * direct);
        let mut prev = f64::INFINITY;
        for n in [10, 100, 1000, 10_000, 100_000] {
            let b = erdos_kac_bound(&g, MomentValue::Finite(1.6), n).unwrap();
            assert!(b < prev);
            prev = b;
        }
        assert!(matches!(erdos_kac_bound(&g, MomentValue::Infinite, n), Err(Error::InfiniteGamma)));
        assert!(erdos_kac_bound(&g, MomentValue::Finite(1.0), 1).is_err());
    }

    #[test]
    fn half_normal_values() {
        assert_eq!(half_normal_reference(0.0), 0.0);
        assert_eq!(half_normal_reference(-1.0), 0.0);
        assert!((half_normal_reference(40.0) - 1.0).abs() < 1e-15);
        let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let oracle = 2.0 * integrate(phi, 0.0, 1.0, 1e-14, 0.0).unwrap().value;
        assert!((half_normal_reference(1.0) - oracle).abs() < 1e-14);
        assert!((half_normal_reference(1.0) - 0.682_689_492_137_085_9).abs() < 1e-15);
    }

    #[test]
    fn ks_distance_examples() {
        let uniform = |t: f64| t.clamp(0.0, 1.0);
        let d = ks_distance(&[0.5], uniform).unwrap();
        assert_eq!(d, 0.5);
        let grid: Vec<f64> = (0..100).map(|k| (k as f64 + 0.5) / 100.0).collect();
        assert!((ks_distance(&grid, uniform).unwrap() - 0.005).abs() < 1e-12);
        assert!(ks_distance(&[], uniform).is_err());
    }

    #[test]
    fn identical_laws_within_noise() {
        let r = DistributionSpec::rademacher();
        let rep = erdos_kac_experiment(&r, &r, 50, &TestFunction::sin(), 2000, 3).unwrap();
        assert!(rep.gap.mc_gap() <= 4.0 * rep.gap.std_error());
        assert!(rep.gap.passed());
    }
}
