//! Standardized (mean 0, variance 1) input laws and their truncated moments.
//!
//! All families are stored pre-standardized. Truncated moments are closed form
//! except for the capped Pareto family, which goes through adaptive quadrature.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numeric::integrate;
use crate::rng::RandomStream;

const SQRT_3: f64 = 1.732_050_807_568_877_2;
const QUAD_REL_TOL: f64 = 1e-12;

/// A real number or +∞, used for third absolute moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentValue {
    Finite(f64),
    Infinite,
}

impl MomentValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            MomentValue::Finite(v) => Some(v),
            MomentValue::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, MomentValue::Infinite)
    }

    /// Largest of two extended values.
    pub fn max(self, other: MomentValue) -> MomentValue {
        match (self, other) {
            (MomentValue::Finite(a), MomentValue::Finite(b)) => MomentValue::Finite(a.max(b)),
            _ => MomentValue::Infinite,
        }
    }

    /// As an `f64`, mapping the infinite case to `f64::INFINITY`.
    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistributionFamily {
    Gaussian,
    Rademacher,
    /// Uniform on `[-√3, √3]`.
    UniformScaled,
    /// `E - 1` with `E ~ Exp(1)`.
    CenteredExponentialScaled,
    /// Symmetric Pareto tail `P(|X| > c t) = t^{-a}` for `t ≥ 1`, optionally
    /// conditioned on `t ≤ cap`, then rescaled to unit variance.
    TruncatedPareto,
}

/// A mean-zero, unit-variance sampling law.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSpec {
    family: DistributionFamily,
    params: Vec<f64>,
    /// Multiplier applied to the unstandardized Pareto magnitude.
    scale: f64,
    gamma: MomentValue,
}

/// Truncated moments of a spec at level `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentProfile {
    pub k: f64,
    /// `E(X²; |X| > k)`
    pub tail_second: f64,
    /// `E(|X|³; |X| ≤ k)`
    pub body_third: f64,
}

impl DistributionSpec {
    pub fn gaussian() -> Self {
        Self::simple(DistributionFamily::Gaussian, MomentValue::Finite(2.0 * (2.0 / PI).sqrt()))
    }

    pub fn rademacher() -> Self {
        Self::simple(DistributionFamily::Rademacher, MomentValue::Finite(1.0))
    }

    pub fn uniform() -> Self {
        Self::simple(DistributionFamily::UniformScaled, MomentValue::Finite(0.75 * SQRT_3))
    }

    pub fn centered_exponential() -> Self {
        Self::simple(DistributionFamily::CenteredExponentialScaled, MomentValue::Finite(12.0 / std::f64::consts::E - 2.0))
    }

    /// Symmetric Pareto law with tail index `tail_index`, uncapped.
    /// Requires `tail_index > 2` so that the variance exists.
    pub fn pareto(tail_index: f64) -> Result<Self> {
        Self::pareto_capped(tail_index, f64::INFINITY)
    }

    /// Symmetric Pareto law with magnitude conditioned on `[1, cap]` before
    /// standardization. An infinite cap gives the uncapped law.
    pub fn pareto_capped(tail_index: f64, cap: f64) -> Result<Self> {
        if !(tail_index.is_finite() && tail_index > 0.0) {
            return Err(Error::InvalidParameter(format!("tail index must be positive, got {tail_index}")));
        }
        if cap.is_nan() || cap <= 1.0 {
            return Err(Error::InvalidParameter(format!("pareto cap must exceed 1, got {cap}")));
        }
        if cap.is_infinite() && tail_index <= 2.0 {
            return Err(Error::InvalidParameter(format!(
                "uncapped pareto needs tail index > 2 for a finite variance, got {tail_index}"
            )));
        }
        let law = ParetoMagnitude { a: tail_index, cap };
        let second = law.partial_moment(2, 1.0, cap)?;
        let scale = 1.0 / second.sqrt();
        let gamma = if cap.is_infinite() && tail_index <= 3.0 {
            MomentValue::Infinite
        } else {
            MomentValue::Finite(scale.powi(3) * law.partial_moment(3, 1.0, cap)?)
        };
        let params = if cap.is_finite() { vec![tail_index, cap] } else { vec![tail_index] };
        Ok(DistributionSpec { family: DistributionFamily::TruncatedPareto, params, scale, gamma })
    }

    fn simple(family: DistributionFamily, gamma: MomentValue) -> Self {
        DistributionSpec { family, params: Vec::new(), scale: 1.0, gamma }
    }

    pub fn family(&self) -> DistributionFamily {
        self.family
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn mean(&self) -> f64 {
        0.0
    }

    pub fn variance(&self) -> f64 {
        1.0
    }

    /// `E|X|³`, or `Infinite` for heavy tails.
    pub fn third_abs_moment(&self) -> MomentValue {
        self.gamma
    }

    fn pareto_law(&self) -> ParetoMagnitude {
        ParetoMagnitude { a: self.params[0], cap: self.params.get(1).copied().unwrap_or(f64::INFINITY) }
    }

    /// Draw one value.
    pub fn sample(&self, stream: &mut RandomStream) -> f64 {
        match self.family {
            DistributionFamily::Gaussian => stream.sample(StandardNormal),
            DistributionFamily::Rademacher => {
                if stream.next_u64_bit() {
                    1.0
                } else {
                    -1.0
                }
            }
            DistributionFamily::UniformScaled => SQRT_3 * (2.0 * stream.random::<f64>() - 1.0),
            DistributionFamily::CenteredExponentialScaled => {
                // 1 - u lies in (0, 1]
                let u: f64 = stream.random();
                -(1.0 - u).ln() - 1.0
            }
            DistributionFamily::TruncatedPareto => {
                let law = self.pareto_law();
                let u: f64 = stream.random();
                let sign = if stream.next_u64_bit() { 1.0 } else { -1.0 };
                sign * self.scale * law.quantile(u)
            }
        }
    }

    /// `E(X²; |X| > k)`.
    pub fn truncated_second_moment(&self, k: f64) -> Result<f64> {
        check_level(k)?;
        Ok(match self.family {
            DistributionFamily::Gaussian => {
                if k.is_infinite() {
                    0.0
                } else {
                    2.0 * k * std_normal_pdf(k) + libm::erfc(k / SQRT_2)
                }
            }
            DistributionFamily::Rademacher => {
                if k < 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            DistributionFamily::UniformScaled => {
                if k >= SQRT_3 {
                    0.0
                } else {
                    1.0 - k.powi(3) / (3.0 * SQRT_3)
                }
            }
            DistributionFamily::CenteredExponentialScaled => {
                if k.is_infinite() {
                    return Ok(0.0);
                }
                // density e^{-(x+1)} on [-1, ∞); antiderivative of x²e^{-x-1} is -e^{-x-1}(x²+2x+2)
                let upper = (-k - 1.0).exp() * (k * k + 2.0 * k + 2.0);
                let lower = if k < 1.0 { 1.0 - (k - 1.0).exp() * (k * k - 2.0 * k + 2.0) } else { 0.0 };
                upper + lower
            }
            DistributionFamily::TruncatedPareto => {
                let law = self.pareto_law();
                let s2 = self.scale * self.scale;
                s2 * law.partial_moment(2, (k / self.scale).max(1.0), law.cap)?
            }
        })
    }

    /// `E(|X|³; |X| ≤ k)`.
    pub fn truncated_third_moment(&self, k: f64) -> Result<f64> {
        check_level(k)?;
        Ok(match self.family {
            DistributionFamily::Gaussian => {
                if k.is_infinite() {
                    self.gamma.as_f64()
                } else {
                    2.0 * (2.0 - (k * k + 2.0) * (-0.5 * k * k).exp()) / (2.0 * PI).sqrt()
                }
            }
            DistributionFamily::Rademacher => {
                if k >= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            DistributionFamily::UniformScaled => k.min(SQRT_3).powi(4) / (4.0 * SQRT_3),
            DistributionFamily::CenteredExponentialScaled => {
                let e1 = (-1.0f64).exp();
                let positive =
                    if k.is_infinite() { 6.0 * e1 } else { e1 * (6.0 - (-k).exp() * (k.powi(3) + 3.0 * k * k + 6.0 * k + 6.0)) };
                let l = k.min(1.0);
                let negative = 6.0 * e1 - (l - 1.0).exp() * (6.0 - 6.0 * l + 3.0 * l * l - l.powi(3));
                positive + negative
            }
            DistributionFamily::TruncatedPareto => {
                let law = self.pareto_law();
                let hi = (k / self.scale).min(law.cap);
                if hi <= 1.0 {
                    0.0
                } else {
                    self.scale.powi(3) * law.partial_moment(3, 1.0, hi)?
                }
            }
        })
    }

    /// Both truncated moments at level `k`.
    pub fn moment_profile(&self, k: f64) -> Result<MomentProfile> {
        Ok(MomentProfile { k, tail_second: self.truncated_second_moment(k)?, body_third: self.truncated_third_moment(k)? })
    }
}

fn check_level(k: f64) -> Result<()> {
    if k.is_nan() || k <= 0.0 {
        Err(Error::NonPositiveTruncation(k))
    } else {
        Ok(())
    }
}

pub(crate) fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

trait BitExt {
    fn next_u64_bit(&mut self) -> bool;
}

impl BitExt for RandomStream {
    #[inline]
    fn next_u64_bit(&mut self) -> bool {
        use rand::RngCore;
        self.next_u64() >> 63 == 1
    }
}

/// Pareto magnitude with density `a t^{-a-1} / (1 - cap^{-a})` on `[1, cap]`.
#[derive(Debug, Clone, Copy)]
struct ParetoMagnitude {
    a: f64,
    cap: f64,
}

impl ParetoMagnitude {
    fn normalizer(&self) -> f64 {
        if self.cap.is_infinite() {
            1.0
        } else {
            1.0 - self.cap.powf(-self.a)
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        (1.0 - u * self.normalizer()).powf(-1.0 / self.a)
    }

    /// `E(T^k; lo ≤ T ≤ hi)` for `1 ≤ lo ≤ hi ≤ cap`.
    ///
    /// Uncapped laws use the closed-form power integral; capped laws are
    /// integrated numerically in log coordinates, where the integrand
    /// `a e^{(k-a)s}` is smooth on a finite interval.
    fn partial_moment(&self, k: i32, lo: f64, hi: f64) -> Result<f64> {
        let hi = hi.min(self.cap);
        if hi <= lo {
            return Ok(0.0);
        }
        let a = self.a;
        let kf = f64::from(k);
        if self.cap.is_infinite() {
            if hi.is_infinite() {
                if kf >= a {
                    return Ok(f64::INFINITY);
                }
                return Ok(a * lo.powf(kf - a) / (a - kf));
            }
            if (kf - a).abs() < 1e-12 {
                return Ok(a * (hi / lo).ln());
            }
            return Ok(a * (hi.powf(kf - a) - lo.powf(kf - a)) / (kf - a));
        }
        let norm = self.normalizer();
        let r = integrate(|s: f64| a * ((kf - a) * s).exp(), lo.ln(), hi.ln(), QUAD_REL_TOL, 0.0)?;
        Ok(r.value / norm)
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            DistributionFamily::Gaussian => write!(f, "gaussian"),
            DistributionFamily::Rademacher => write!(f, "rademacher"),
            DistributionFamily::UniformScaled => write!(f, "uniform"),
            DistributionFamily::CenteredExponentialScaled => write!(f, "cexp"),
            DistributionFamily::TruncatedPareto => {
                write!(f, "pareto:{}", self.params[0])?;
                if let Some(cap) = self.params.get(1) {
                    write!(f, ":{cap}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for DistributionSpec {
    type Err = Error;

    /// Accepts `rademacher`, `gaussian`, `uniform`, `cexp`, `pareto:<a>` and
    /// `pareto:<a>:<cap>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ParseDistribution(s.to_string());
        let mut parts = s.trim().split(':');
        let head = parts.next().ok_or_else(bad)?.to_ascii_lowercase();
        let rest: Vec<&str> = parts.collect();
        let spec = match (head.as_str(), rest.len()) {
            ("gaussian" | "normal", 0) => Self::gaussian(),
            ("rademacher", 0) => Self::rademacher(),
            ("uniform", 0) => Self::uniform(),
            ("cexp", 0) => Self::centered_exponential(),
            ("pareto", 1) => Self::pareto(rest[0].parse().map_err(|_| bad())?)?,
            ("pareto", 2) => Self::pareto_capped(rest[0].parse().map_err(|_| bad())?, rest[1].parse().map_err(|_| bad())?)?,
            _ => return Err(bad()),
        };
        Ok(spec)
    }
}
