//! Influence measures, swap bounds, and the paired Monte Carlo engine.

pub mod bounds;
pub mod fd;
pub mod function;
pub mod lambda;
pub mod monte_carlo;
pub mod test_function;

pub use bounds::{
    best_theorem1_bound, c_constants, corollary1_bound, gamma_of, k_constant, k_sweep, theorem1_bound, truncated_sums,
    truncated_sums_iid, KSweepPoint, TruncatedSums,
};
pub use fd::{fd_partial, FiniteDifferenced};
pub use function::{ConstantFunction, CoordinatePower, Interval, MeanFunction, Scaled, SmoothFunction};
pub use lambda::{estimate_lambda, LambdaEstimate, LambdaKind};
pub use monte_carlo::{gap_from_pairs, mc_gap, telescoping_decomposition, GapBound, GapReport, PairedDesign};
pub use test_function::TestFunction;
