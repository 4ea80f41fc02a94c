use std::fmt;

use crate::error::{Error, Result};

/// Scalar observable `g` together with certified bounds on `‖g′‖∞, ‖g″‖∞, ‖g‴‖∞`.
#[derive(Clone)]
pub struct TestFunction {
    name: String,
    kind: Kind,
    norms: [f64; 3],
}

#[derive(Clone, Copy)]
enum Kind {
    Sin,
    Tanh,
    Identity,
    ClippedSquare(ClippedSquare),
    Custom(fn(f64) -> [f64; 4]),
}

impl TestFunction {
    pub fn sin() -> Self {
        TestFunction { name: "sin".into(), kind: Kind::Sin, norms: [1.0, 1.0, 1.0] }
    }

    pub fn tanh() -> Self {
        // tanh″ peaks at tanh = 1/√3, tanh‴ at the origin
        let d2 = 4.0 / (3.0 * 3f64.sqrt());
        TestFunction { name: "tanh".into(), kind: Kind::Tanh, norms: [1.0, d2, 2.0] }
    }

    pub fn identity() -> Self {
        TestFunction { name: "identity".into(), kind: Kind::Identity, norms: [1.0, 0.0, 0.0] }
    }

    /// `x²` on `[-limit, limit]`, flattened to a constant beyond it.
    ///
    /// Past `limit` the second derivative falls linearly with slope `-slope`
    /// to `-b`, then climbs back to 0 at the same rate; `b² = 2 + 2·limit·slope`
    /// makes `g′` vanish exactly at the end of the ramp. The result is C² with
    /// `‖g′‖ = 2·limit + 2/slope`, `‖g″‖ = max(2, b)` and `‖g‴‖ = slope`.
    pub fn clipped_square(limit: f64, slope: f64) -> Result<Self> {
        if !(limit > 0.0 && slope > 0.0 && limit.is_finite() && slope.is_finite()) {
            return Err(Error::InvalidParameter(format!("clipped square needs positive limit and slope, got {limit}, {slope}")));
        }
        let clip = ClippedSquare::new(limit, slope);
        let norms = [2.0 * limit + 2.0 / slope, clip.b.max(2.0), slope];
        Ok(TestFunction { name: format!("clipsq:{limit}"), kind: Kind::ClippedSquare(clip), norms })
    }

    /// A user-supplied function; `eval(x)` returns `[g, g′, g″, g‴]`.
    pub fn custom(name: &str, eval: fn(f64) -> [f64; 4], norms: [f64; 3]) -> Self {
        TestFunction { name: name.into(), kind: Kind::Custom(eval), norms }
    }

    /// Lookup by CLI name: `sin`, `tanh`, `identity`, `clipsq` (limit 10, slope 1) or `clipsq:<limit>`.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "sin" => Ok(Self::sin()),
            "tanh" => Ok(Self::tanh()),
            "identity" => Ok(Self::identity()),
            "clipsq" => Self::clipped_square(10.0, 1.0),
            other => {
                if let Some(limit) = other.strip_prefix("clipsq:") {
                    let limit = limit.parse().map_err(|_| Error::InvalidParameter(format!("bad clipsq limit in {other:?}")))?;
                    return Self::clipped_square(limit, 1.0);
                }
                Err(Error::InvalidParameter(format!("unknown test function {other:?}")))
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `[‖g′‖∞, ‖g″‖∞, ‖g‴‖∞]`.
    pub fn norms(&self) -> [f64; 3] {
        self.norms
    }

    /// `[g, g′, g″, g‴]` at `x`.
    pub fn eval(&self, x: f64) -> [f64; 4] {
        match self.kind {
            Kind::Sin => {
                let (s, c) = x.sin_cos();
                [s, c, -s, -c]
            }
            Kind::Tanh => {
                let t = x.tanh();
                let s = 1.0 - t * t;
                [t, s, -2.0 * t * s, -2.0 * s * (1.0 - 3.0 * t * t)]
            }
            Kind::Identity => [x, 1.0, 0.0, 0.0],
            Kind::ClippedSquare(c) => c.eval(x),
            Kind::Custom(f) => f(x),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self.kind {
            Kind::Sin => x.sin(),
            Kind::Tanh => x.tanh(),
            Kind::Identity => x,
            _ => self.eval(x)[0],
        }
    }

    pub fn d1(&self, x: f64) -> f64 {
        self.eval(x)[1]
    }

    pub fn d2(&self, x: f64) -> f64 {
        self.eval(x)[2]
    }

    pub fn d3(&self, x: f64) -> f64 {
        self.eval(x)[3]
    }
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction").field("name", &self.name).field("norms", &self.norms).finish()
    }
}

#[derive(Debug, Clone, Copy)]
struct ClippedSquare {
    limit: f64,
    slope: f64,
    b: f64,
    /// `g′` and `g` at the bottom of the ramp (`t = t1`).
    knee: (f64, f64),
    t1: f64,
    t2: f64,
    plateau: f64,
}

impl ClippedSquare {
    fn new(limit: f64, slope: f64) -> Self {
        let b = (2.0 + 2.0 * limit * slope).sqrt();
        let t1 = (2.0 + b) / slope;
        let t2 = t1 + b / slope;
        let mut c = ClippedSquare { limit, slope, b, knee: (0.0, 0.0), t1, t2, plateau: 0.0 };
        let down = c.descending(t1);
        c.knee = (down[1], down[0]);
        c.plateau = c.ascending(t2)[0];
        c
    }

    // t measured from `limit`; g″ = 2 - slope·t
    fn descending(&self, t: f64) -> [f64; 4] {
        let l = self.limit;
        let s = self.slope;
        let g = l * l + 2.0 * l * t + t * t - s * t.powi(3) / 6.0;
        let g1 = 2.0 * l + 2.0 * t - 0.5 * s * t * t;
        [g, g1, 2.0 - s * t, -s]
    }

    // u = t - t1; g″ = -b + slope·u
    fn ascending(&self, t: f64) -> [f64; 4] {
        let u = t - self.t1;
        let s = self.slope;
        let (g1k, gk) = self.knee;
        let g1 = g1k - self.b * u + 0.5 * s * u * u;
        let g = gk + g1k * u - 0.5 * self.b * u * u + s * u.powi(3) / 6.0;
        [g, g1, -self.b + s * u, s]
    }

    fn eval(&self, x: f64) -> [f64; 4] {
        let ax = x.abs();
        let sign = if x < 0.0 { -1.0 } else { 1.0 };
        let [g, g1, g2, g3] = if ax <= self.limit {
            [x * x, 2.0 * ax, 2.0, 0.0]
        } else {
            let t = ax - self.limit;
            if t <= self.t1 {
                self.descending(t)
            } else if t <= self.t2 {
                self.ascending(t)
            } else {
                [self.plateau, 0.0, 0.0, 0.0]
            }
        };
        // g is even: odd-order derivatives pick up the sign of x
        [g, sign * g1, g2, sign * g3]
    }
}
