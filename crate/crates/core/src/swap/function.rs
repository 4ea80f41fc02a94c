use crate::error::{Error, Result};

/// An open interval `(lo, hi)` containing 0; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < 0.0 && hi > 0.0) {
            return Err(Error::InvalidParameter(format!("interval ({lo}, {hi}) must contain 0")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }
}

/// A map `I^n → ℝ` that is three times differentiable in each coordinate.
pub trait SmoothFunction: Send + Sync {
    fn dimension(&self) -> usize;

    fn domain(&self) -> Interval {
        Interval::REAL_LINE
    }

    fn value(&self, x: &[f64]) -> f64;

    /// `∂_i^p f(x)` for `p ∈ {1, 2, 3}`.
    fn partial(&self, i: usize, p: usize, x: &[f64]) -> f64;
}

impl<F: SmoothFunction + ?Sized> SmoothFunction for &F {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn domain(&self) -> Interval {
        (**self).domain()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn partial(&self, i: usize, p: usize, x: &[f64]) -> f64 {
        (**self).partial(i, p, x)
    }
}

impl<F: SmoothFunction + ?Sized> SmoothFunction for Box<F> {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn domain(&self) -> Interval {
        (**self).domain()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn partial(&self, i: usize, p: usize, x: &[f64]) -> f64 {
        (**self).partial(i, p, x)
    }
}

pub(crate) fn check_order(p: usize) -> Result<()> {
    if (1..=3).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidOrder(p))
    }
}

/// Normalized sum `n^{-1/2} Σ x_i`.
#[derive(Debug, Clone, Copy)]
pub struct MeanFunction {
    n: usize,
}

impl MeanFunction {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "dimension must be positive");
        MeanFunction { n }
    }
}

impl SmoothFunction for MeanFunction {
    fn dimension(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        crate::numeric::compensated_sum(x.iter().copied()) / (self.n as f64).sqrt()
    }

    fn partial(&self, _i: usize, p: usize, _x: &[f64]) -> f64 {
        if p == 1 {
            1.0 / (self.n as f64).sqrt()
        } else {
            0.0
        }
    }
}

/// `x_c^k` on `I^n`, a single-coordinate monomial.
#[derive(Debug, Clone, Copy)]
pub struct CoordinatePower {
    n: usize,
    coordinate: usize,
    power: i32,
    domain: Interval,
}

impl CoordinatePower {
    pub fn new(n: usize, coordinate: usize, power: i32, domain: Interval) -> Self {
        assert!(coordinate < n, "coordinate out of range");
        assert!(power >= 0, "power must be nonnegative");
        CoordinatePower { n, coordinate, power, domain }
    }
}

impl SmoothFunction for CoordinatePower {
    fn dimension(&self) -> usize {
        self.n
    }

    fn domain(&self) -> Interval {
        self.domain
    }

    fn value(&self, x: &[f64]) -> f64 {
        x[self.coordinate].powi(self.power)
    }

    fn partial(&self, i: usize, p: usize, x: &[f64]) -> f64 {
        if i != self.coordinate {
            return 0.0;
        }
        let k = self.power;
        let p = p as i32;
        if p > k {
            return 0.0;
        }
        let falling: i32 = (0..p).map(|j| k - j).product();
        f64::from(falling) * x[i].powi(k - p)
    }
}

/// A constant map.
#[derive(Debug, Clone, Copy)]
pub struct ConstantFunction {
    pub n: usize,
    pub value: f64,
}

impl SmoothFunction for ConstantFunction {
    fn dimension(&self) -> usize {
        self.n
    }
    fn value(&self, _x: &[f64]) -> f64 {
        self.value
    }
    fn partial(&self, _i: usize, _p: usize, _x: &[f64]) -> f64 {
        0.0
    }
}

/// `c · f`.
#[derive(Debug, Clone, Copy)]
pub struct Scaled<F> {
    pub factor: f64,
    pub inner: F,
}

impl<F: SmoothFunction> SmoothFunction for Scaled<F> {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }
    fn domain(&self) -> Interval {
        self.inner.domain()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.factor * self.inner.value(x)
    }
    fn partial(&self, i: usize, p: usize, x: &[f64]) -> f64 {
        self.factor * self.inner.partial(i, p, x)
    }
}
