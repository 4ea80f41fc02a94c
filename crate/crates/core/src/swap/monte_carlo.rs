//! Paired Monte Carlo estimation of `|E g(f(X)) − E g(f(Y))|`.
//!
//! Replicate `r` draws `X` and `Y` from independent streams addressed by
//! `(seed, experiment, r, coordinate)`. Replicates are evaluated in parallel,
//! collected in index order, and reduced with compensated summation, so the
//! result does not depend on the thread count.

use rayon::prelude::*;
use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, mean_and_std};
use crate::rng::{experiment_id, mix64, RandomStream};
use crate::swap::bounds::{c_constants, theorem1_bound, truncated_sums};
use crate::swap::function::SmoothFunction;
use crate::swap::lambda::LambdaEstimate;
use crate::swap::test_function::TestFunction;

pub const MIN_REPLICATES: usize = 100;

/// Monte Carlo gap estimate against a theoretical bound.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    experiment_id: String,
    n: usize,
    replicates: usize,
    mc_gap: f64,
    std_error: f64,
    theoretical_bound: f64,
    seed: u64,
}

impl GapReport {
    pub fn new(experiment_id: &str, n: usize, replicates: usize, mc_gap: f64, std_error: f64, bound: f64, seed: u64) -> Self {
        GapReport { experiment_id: experiment_id.to_string(), n, replicates, mc_gap, std_error, theoretical_bound: bound, seed }
    }

    pub fn experiment_id(&self) -> &str {
        &self.experiment_id
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn replicates(&self) -> usize {
        self.replicates
    }
    pub fn mc_gap(&self) -> f64 {
        self.mc_gap
    }
    pub fn std_error(&self) -> f64 {
        self.std_error
    }
    pub fn theoretical_bound(&self) -> f64 {
        self.theoretical_bound
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `mc_gap ≤ bound + 3·std_error`.
    pub fn passed(&self) -> bool {
        self.mc_gap <= self.theoretical_bound + 3.0 * self.std_error
    }

    pub fn with_bound(mut self, bound: f64) -> Self {
        self.theoretical_bound = bound;
        self
    }
}

impl Serialize for GapReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("GapReport", 8)?;
        st.serialize_field("experiment_id", &self.experiment_id)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("replicates", &self.replicates)?;
        st.serialize_field("mc_gap", &self.mc_gap)?;
        st.serialize_field("std_error", &self.std_error)?;
        st.serialize_field("bound", &self.theoretical_bound)?;
        st.serialize_field("passed", &self.passed())?;
        st.serialize_field("seed", &self.seed)?;
        st.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    X,
    Y,
}

fn side_stream_id(experiment: u64, side: Side) -> u64 {
    let tag = match side {
        Side::X => 0x5851_f42d_4c95_7f2d,
        Side::Y => 0x1405_7b7e_f767_814f,
    };
    mix64(experiment ^ tag)
}

/// Fill `out` with one draw per coordinate.
pub fn draw_vector(specs: &[DistributionSpec], seed: u64, experiment: u64, side: Side, replicate: u64, out: &mut [f64]) {
    let id = side_stream_id(experiment, side);
    for (c, (slot, spec)) in out.iter_mut().zip(specs).enumerate() {
        *slot = spec.sample(&mut RandomStream::new(seed, id, replicate, c as u64));
    }
}

/// Paired sampling design shared by all experiments.
#[derive(Debug, Clone, Copy)]
pub struct PairedDesign<'a> {
    pub specs_x: &'a [DistributionSpec],
    pub specs_y: &'a [DistributionSpec],
    pub replicates: usize,
    pub seed: u64,
    pub experiment: u64,
}

impl<'a> PairedDesign<'a> {
    pub fn new(
        label: &str,
        specs_x: &'a [DistributionSpec],
        specs_y: &'a [DistributionSpec],
        replicates: usize,
        seed: u64,
    ) -> Result<Self> {
        if specs_x.len() != specs_y.len() {
            return Err(Error::DimensionMismatch { expected: specs_x.len(), got: specs_y.len() });
        }
        if replicates < MIN_REPLICATES {
            return Err(Error::TooFewReplicates { min: MIN_REPLICATES, got: replicates });
        }
        Ok(PairedDesign { specs_x, specs_y, replicates, seed, experiment: experiment_id(label) })
    }

    pub fn dimension(&self) -> usize {
        self.specs_x.len()
    }

    /// Evaluate `observable` on `(X_r, Y_r)` for every replicate, in replicate order.
    pub fn run<T, E>(&self, observable: E) -> Vec<(T, T)>
    where
        T: Send,
        E: Fn(&[f64]) -> T + Sync,
    {
        let n = self.dimension();
        (0..self.replicates as u64)
            .into_par_iter()
            .map_init(
                || vec![0.0; n],
                |buf, r| {
                    draw_vector(self.specs_x, self.seed, self.experiment, Side::X, r, buf);
                    let u = observable(buf);
                    draw_vector(self.specs_y, self.seed, self.experiment, Side::Y, r, buf);
                    let v = observable(buf);
                    (u, v)
                },
            )
            .collect()
    }
}

/// Gap statistics from paired observable values `(U_r, V_r)`.
pub fn gap_from_pairs(label: &str, n: usize, pairs: &[(f64, f64)], g: &TestFunction, seed: u64, bound: f64) -> GapReport {
    let diffs: Vec<f64> = pairs.iter().map(|&(u, v)| g.value(u) - g.value(v)).collect();
    let (mean, sd) = mean_and_std(&diffs);
    let r = pairs.len();
    GapReport::new(label, n, r, mean.abs(), sd / (r as f64).sqrt(), bound, seed)
}

/// Mean of `g(U)` and `g(V)` separately.
pub fn side_means(pairs: &[(f64, f64)], g: &TestFunction) -> (f64, f64) {
    let r = pairs.len() as f64;
    (compensated_sum(pairs.iter().map(|p| g.value(p.0))) / r, compensated_sum(pairs.iter().map(|p| g.value(p.1))) / r)
}

/// Where the theoretical bound of a gap report comes from.
#[derive(Debug, Clone, Copy)]
pub enum GapBound {
    Supplied(f64),
    /// Main swap bound from the given λ values at truncation level `k`.
    Theorem1 {
        lambda: LambdaEstimate,
        k: f64,
    },
}

impl GapBound {
    pub fn resolve(&self, g: &TestFunction, specs_x: &[DistributionSpec], specs_y: &[DistributionSpec]) -> Result<f64> {
        match *self {
            GapBound::Supplied(b) => Ok(b),
            GapBound::Theorem1 { lambda, k } => {
                let (c1, c2) = c_constants(g)?;
                let sums = truncated_sums(specs_x, specs_y, k)?;
                theorem1_bound(c1, c2, lambda.lambda2, lambda.lambda3, sums.t1, sums.t2)
            }
        }
    }
}

/// Paired estimate of `|E g(f(X)) − E g(f(Y))|` for a smooth `f`.
#[allow(clippy::too_many_arguments)]
pub fn mc_gap<F: SmoothFunction + ?Sized>(
    label: &str,
    f: &F,
    g: &TestFunction,
    specs_x: &[DistributionSpec],
    specs_y: &[DistributionSpec],
    replicates: usize,
    seed: u64,
    bound: GapBound,
) -> Result<GapReport> {
    let n = f.dimension();
    if specs_x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: specs_x.len() });
    }
    let design = PairedDesign::new(label, specs_x, specs_y, replicates, seed)?;
    let bound = bound.resolve(g, specs_x, specs_y)?;
    let pairs = design.run(|x| f.value(x));
    Ok(gap_from_pairs(label, n, &pairs, g, seed, bound))
}

/// The `n` swap increments `h(Zᵢ) − h(Zᵢ₋₁)`, `h = g∘f`, where `Zᵢ` takes its
/// first `i` coordinates from `x` and the rest from `y`.
pub fn telescoping_decomposition<F: SmoothFunction + ?Sized>(f: &F, g: &TestFunction, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let n = f.dimension();
    for len in [x.len(), y.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, got: len });
        }
    }
    let h = |z: &[f64]| g.value(f.value(z));
    let mut z = y.to_vec();
    let mut prev = h(&z);
    let mut increments = Vec::with_capacity(n);
    for i in 0..n {
        z[i] = x[i];
        let next = h(&z);
        increments.push(next - prev);
        prev = next;
    }
    Ok(increments)
}
