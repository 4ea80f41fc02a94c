//! Wigner matrices, their Stieltjes transforms, and the semicircle experiment.
//!
//! Coordinates are the entries on and above the diagonal in row-major order;
//! the matrix is `A(x)_{ij} = N^{-1/2} x_{ij}`, mirrored below the diagonal.

use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use crate::distributions::DistributionSpec;
use crate::error::{finite, Error, Result};
use crate::numeric::{integrate, CompensatedSum};
use crate::swap::bounds::{c_constants, theorem1_bound, truncated_sums_iid};
use crate::swap::function::{check_order, SmoothFunction};
use crate::swap::monte_carlo::{gap_from_pairs, GapReport, PairedDesign};
use crate::swap::test_function::TestFunction;

pub type C64 = Complex<f64>;

/// Flat index map between coordinates and pairs `i ≤ j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WignerLayout {
    order: usize,
}

impl WignerLayout {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidParameter("matrix order must be positive".into()));
        }
        Ok(WignerLayout { order })
    }

    /// Matrix order `N`.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Coordinate count `N(N+1)/2`.
    pub fn len(&self) -> usize {
        self.order * (self.order + 1) / 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat index of the pair `(i, j)`, `i ≤ j`, zero-based.
    pub fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        debug_assert!(j < self.order);
        // row i starts after Σ_{r<i} (N − r) = iN − i(i−1)/2 entries
        i * self.order - i * i.saturating_sub(1) / 2 + (j - i)
    }

    /// The pair `(i, j)`, `i ≤ j`, at flat index `k`.
    pub fn pair(&self, k: usize) -> Result<(usize, usize)> {
        if k >= self.len() {
            return Err(Error::CoordinateOutOfRange { index: k, dimension: self.len() });
        }
        let mut start = 0;
        for i in 0..self.order {
            let row = self.order - i;
            if k < start + row {
                return Ok((i, i + (k - start)));
            }
            start += row;
        }
        unreachable!("index checked against len")
    }

    /// The symmetric matrix `A(x)`.
    pub fn build_matrix(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        if x.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: x.len() });
        }
        let n = self.order;
        let s = (n as f64).sqrt().recip();
        let mut a = DMatrix::zeros(n, n);
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                a[(i, j)] = s * x[k];
                a[(j, i)] = s * x[k];
                k += 1;
            }
        }
        Ok(a)
    }

    /// Reads the coordinates back from a symmetric matrix.
    pub fn coordinates(&self, a: &DMatrix<f64>) -> Vec<f64> {
        let n = self.order;
        let scale = (n as f64).sqrt();
        let mut x = Vec::with_capacity(self.len());
        for i in 0..n {
            for j in i..n {
                x.push(a[(i, j)] * scale);
            }
        }
        x
    }
}

fn check_spectral(z: C64) -> Result<()> {
    finite("Re z", z.re)?;
    finite("Im z", z.im)?;
    if z.im == 0.0 {
        return Err(Error::RealSpectralParameter);
    }
    Ok(())
}

/// `G = (A − zI)⁻¹` at one `(x, z)`.
#[derive(Debug, Clone)]
pub struct Resolvent {
    z: C64,
    g: DMatrix<C64>,
}

impl Resolvent {
    pub fn new(layout: &WignerLayout, x: &[f64], z: C64) -> Result<Self> {
        check_spectral(z)?;
        let a = layout.build_matrix(x)?;
        Self::from_matrix(&a, z)
    }

    pub fn from_matrix(a: &DMatrix<f64>, z: C64) -> Result<Self> {
        check_spectral(z)?;
        let n = a.nrows();
        let shifted = DMatrix::from_fn(n, n, |i, j| C64::new(a[(i, j)], 0.0) - if i == j { z } else { C64::new(0.0, 0.0) });
        let g = shifted.lu().try_inverse().ok_or(Error::SingularResolvent)?;
        Ok(Resolvent { z, g })
    }

    pub fn z(&self) -> C64 {
        self.z
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.g
    }

    /// `(1/N) tr G`.
    pub fn stieltjes(&self) -> C64 {
        let n = self.g.nrows();
        let mut re = CompensatedSum::new();
        let mut im = CompensatedSum::new();
        for i in 0..n {
            re.add(self.g[(i, i)].re);
            im.add(self.g[(i, i)].im);
        }
        C64::new(re.value(), im.value()) / n as f64
    }

    /// `max |((A − zI) G − I)_{ij}|`.
    pub fn residual(&self, a: &DMatrix<f64>) -> f64 {
        let n = a.nrows();
        let shifted = DMatrix::from_fn(n, n, |i, j| C64::new(a[(i, j)], 0.0) - if i == j { self.z } else { C64::new(0.0, 0.0) });
        let prod = shifted * &self.g;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                worst = worst.max((prod[(i, j)] - target).norm());
            }
        }
        worst
    }

    /// `max |G_{ij} − G_{ji}|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.g.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((self.g[(i, j)] - self.g[(j, i)]).norm());
            }
        }
        worst
    }
}

/// `f(x) = (1/N) tr (A(x) − zI)⁻¹`.
pub fn stieltjes(layout: &WignerLayout, x: &[f64], z: C64) -> Result<C64> {
    Ok(Resolvent::new(layout, x, z)?.stieltjes())
}

/// `G` and `G²` at one point, reused across all coordinates.
#[derive(Debug, Clone)]
pub struct StieltjesDerivatives {
    layout: WignerLayout,
    g: DMatrix<C64>,
    g2: DMatrix<C64>,
}

impl StieltjesDerivatives {
    pub fn new(layout: &WignerLayout, x: &[f64], z: C64) -> Result<Self> {
        let r = Resolvent::new(layout, x, z)?;
        let g2 = &r.g * &r.g;
        Ok(StieltjesDerivatives { layout: *layout, g: r.g, g2 })
    }

    pub fn resolvent(&self) -> &DMatrix<C64> {
        &self.g
    }

    pub fn resolvent_squared(&self) -> &DMatrix<C64> {
        &self.g2
    }

    /// `(∂f, ∂²f, ∂³f)` in coordinate `k`:
    /// `−(1/N) tr(E G²)`, `(2/N) tr(E G E G²)`, `−(6/N) tr(E G E G E G²)`
    /// with `E = ∂A/∂x_k`.
    ///
    /// `E` is a sum of unit matrices `s·e_a e_bᵀ`, and
    /// `tr(e_a e_bᵀ G e_c e_dᵀ G e_e e_fᵀ G²) = G_{bc} G_{de} (G²)_{fa}`, so each
    /// trace is a short sum of entry products.
    pub fn partials(&self, k: usize) -> Result<[C64; 3]> {
        let (i, j) = self.layout.pair(k)?;
        let nf = self.layout.order as f64;
        let s = nf.sqrt().recip();
        let units: &[(usize, usize)] = if i == j { &[(i, i)] } else { &[(i, j), (j, i)] };
        let g = &self.g;
        let g2 = &self.g2;
        let zero = C64::new(0.0, 0.0);

        let mut t1 = zero;
        let mut t2 = zero;
        let mut t3 = zero;
        for &(a, b) in units {
            t1 += g2[(b, a)];
            for &(c, d) in units {
                t2 += g[(b, c)] * g2[(d, a)];
                for &(e, f) in units {
                    t3 += g[(b, c)] * g[(d, e)] * g2[(f, a)];
                }
            }
        }
        Ok([-t1 * s / nf, t2 * (2.0 * s * s / nf), -t3 * (6.0 * s * s * s / nf)])
    }

    /// Same traces from explicit matrix products; `O(N³)` per call, kept as
    /// a cross-check of `partials`.
    pub fn partials_by_products(&self, k: usize) -> Result<[C64; 3]> {
        let (i, j) = self.layout.pair(k)?;
        let n = self.layout.order;
        let s = (n as f64).sqrt().recip();
        let mut e = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        e[(i, j)] = C64::new(s, 0.0);
        e[(j, i)] = C64::new(s, 0.0);
        let eg = &e * &self.g;
        let eg2 = &e * &self.g2;
        let egeg2 = &eg * &eg2;
        let egegeg2 = &eg * &egeg2;
        let nf = n as f64;
        Ok([-eg2.trace() / nf, egeg2.trace() * (2.0 / nf), -egegeg2.trace() * (6.0 / nf)])
    }
}

/// `(∂f, ∂²f, ∂³f)` at `x` in coordinate `k`.
pub fn stieltjes_partials(layout: &WignerLayout, x: &[f64], z: C64, k: usize) -> Result<[C64; 3]> {
    if k >= layout.len() {
        return Err(Error::CoordinateOutOfRange { index: k, dimension: layout.len() });
    }
    StieltjesDerivatives::new(layout, x, z)?.partials(k)
}

/// Pointwise derivative bounds and the resulting `λ` bounds at `Im z = v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeBounds {
    /// `2|v|⁻² N^{-3/2}`
    pub b1: f64,
    /// `4|v|⁻³ N⁻²`
    pub b2: f64,
    /// `12|v|⁻⁴ N^{-5/2}`
    pub b3: f64,
    /// `4 max(|v|⁻⁴, |v|⁻³) N⁻²`
    pub lambda2: f64,
    /// `12 max(|v|⁻⁶, |v|⁻⁴) N^{-5/2}`
    pub lambda3: f64,
}

pub fn derivative_bounds(order: usize, v: f64) -> Result<DerivativeBounds> {
    finite("v", v)?;
    if v == 0.0 {
        return Err(Error::RealSpectralParameter);
    }
    let n = order as f64;
    let w = v.abs().recip();
    Ok(DerivativeBounds {
        b1: 2.0 * w.powi(2) * n.powf(-1.5),
        b2: 4.0 * w.powi(3) * n.powi(-2),
        b3: 12.0 * w.powi(4) * n.powf(-2.5),
        lambda2: 4.0 * w.powi(4).max(w.powi(3)) * n.powi(-2),
        lambda3: 12.0 * w.powi(6).max(w.powi(4)) * n.powf(-2.5),
    })
}

/// Stieltjes transform of the semicircle law on `[−2, 2]`: the root of
/// `m² + z m + 1 = 0` whose imaginary part has the sign of `Im z`.
pub fn semicircle_stieltjes(z: C64) -> Result<C64> {
    check_spectral(z)?;
    let root = (z * z - 4.0).sqrt();
    let a = (-z + root) / 2.0;
    let b = (-z - root) / 2.0;
    Ok(if a.im.signum() == z.im.signum() { a } else { b })
}

/// The same transform by adaptive quadrature of `∫ (x − z)⁻¹ (2π)⁻¹ √(4 − x²) dx`,
/// substituting `x = 2 cos t`.
pub fn semicircle_stieltjes_quadrature(z: C64) -> Result<C64> {
    check_spectral(z)?;
    let kernel = |t: f64| {
        let w = 2.0 / std::f64::consts::PI * t.sin().powi(2);
        w / (C64::new(2.0 * t.cos(), 0.0) - z)
    };
    let re = integrate(|t| kernel(t).re, 0.0, std::f64::consts::PI, 1e-12, 1e-15)?;
    let im = integrate(|t| kernel(t).im, 0.0, std::f64::consts::PI, 1e-12, 1e-15)?;
    Ok(C64::new(re.value, im.value))
}

/// `N⁻² Σ_{i≤j} E(X_{ij}²; |X_{ij}| > ε√N)` for per-entry laws in layout order.
pub fn pastur_term(specs: &[DistributionSpec], order: usize, epsilon: f64) -> Result<f64> {
    let layout = WignerLayout::new(order)?;
    if specs.len() != layout.len() {
        return Err(Error::DimensionMismatch { expected: layout.len(), got: specs.len() });
    }
    check_epsilon(epsilon)?;
    let n = order as f64;
    let k = epsilon * n.sqrt();
    let mut total = CompensatedSum::new();
    for spec in specs {
        total.add(spec.truncated_second_moment(k)?);
    }
    Ok(total.value() / (n * n))
}

/// `pastur_term` with every entry drawn from `spec`.
pub fn pastur_term_iid(spec: &DistributionSpec, order: usize, epsilon: f64) -> Result<f64> {
    let layout = WignerLayout::new(order)?;
    check_epsilon(epsilon)?;
    let n = order as f64;
    Ok(layout.len() as f64 * spec.truncated_second_moment(epsilon * n.sqrt())? / (n * n))
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon.is_nan() || epsilon <= 0.0 || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!("epsilon must be positive and finite, got {epsilon}")));
    }
    Ok(())
}

/// Which part of the complex Stieltjes transform to expose as a real function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Part {
    Re,
    Im,
}

impl Part {
    pub fn of(self, w: C64) -> f64 {
        match self {
            Part::Re => w.re,
            Part::Im => w.im,
        }
    }
}

/// `Re f` or `Im f` as a real `SmoothFunction` of the matrix coordinates.
#[derive(Debug, Clone, Copy)]
pub struct StieltjesPart {
    pub layout: WignerLayout,
    pub z: C64,
    pub part: Part,
}

impl StieltjesPart {
    pub fn new(order: usize, z: C64, part: Part) -> Result<Self> {
        check_spectral(z)?;
        Ok(StieltjesPart { layout: WignerLayout::new(order)?, z, part })
    }
}

impl SmoothFunction for StieltjesPart {
    fn dimension(&self) -> usize {
        self.layout.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.part.of(stieltjes(&self.layout, x, self.z).expect("validated spectral parameter"))
    }

    fn partial(&self, i: usize, p: usize, x: &[f64]) -> f64 {
        check_order(p).expect("derivative order must be 1, 2 or 3");
        self.part.of(stieltjes_partials(&self.layout, x, self.z, i).expect("validated spectral parameter")[p - 1])
    }
}

/// Outcome of one semicircle experiment: gap reports for both parts and the
/// sample mean of the Stieltjes transform against the semicircle value.
#[derive(Debug, Clone, Serialize)]
pub struct SemicircleReport {
    pub order: usize,
    pub z: [f64; 2],
    pub dist_x: String,
    pub dist_y: String,
    pub replicates: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub bound: f64,
    pub re: GapReport,
    pub im: GapReport,
    /// Mean of `f` over both samples.
    pub mean_m: [f64; 2],
    pub m_sc: [f64; 2],
}

impl SemicircleReport {
    pub fn passed(&self) -> bool {
        self.re.passed() && self.im.passed()
    }
}

/// Paired Monte Carlo comparison of `Re f` and `Im f` between i.i.d. entry laws,
/// checked against the main swap bound with the `λ` bounds above and
/// truncation level `K = ε√N`.
#[allow(clippy::too_many_arguments)]
pub fn semicircle_experiment(
    spec_x: &DistributionSpec,
    spec_y: &DistributionSpec,
    order: usize,
    z: C64,
    g: &TestFunction,
    replicates: usize,
    seed: u64,
    epsilon: f64,
) -> Result<SemicircleReport> {
    check_spectral(z)?;
    check_epsilon(epsilon)?;
    let layout = WignerLayout::new(order)?;
    let n = layout.len();
    let db = derivative_bounds(order, z.im)?;
    let (c1, c2) = c_constants(g)?;
    let sums = truncated_sums_iid(spec_x, spec_y, n, epsilon * (order as f64).sqrt())?;
    // λ_r(Re f), λ_r(Im f) ≤ λ_r(f)
    let bound = theorem1_bound(c1, c2, db.lambda2, db.lambda3, sums.t1, sums.t2)?;

    let xs = vec![spec_x.clone(); n];
    let ys = vec![spec_y.clone(); n];
    let design = PairedDesign::new("wigner", &xs, &ys, replicates, seed)?;
    let pairs = design.run(|x| stieltjes(&layout, x, z));
    let pairs: Vec<(C64, C64)> = pairs.into_iter().map(|(u, v)| Ok((u?, v?))).collect::<Result<_>>()?;

    let part_pairs = |part: Part| pairs.iter().map(|&(u, v)| (part.of(u), part.of(v))).collect::<Vec<_>>();
    let re = gap_from_pairs("wigner-re", n, &part_pairs(Part::Re), g, seed, bound);
    let im = gap_from_pairs("wigner-im", n, &part_pairs(Part::Im), g, seed, bound);

    let mut mre = CompensatedSum::new();
    let mut mim = CompensatedSum::new();
    for &(u, v) in &pairs {
        mre.add(u.re);
        mre.add(v.re);
        mim.add(u.im);
        mim.add(v.im);
    }
    let count = 2.0 * pairs.len() as f64;
    let m_sc = semicircle_stieltjes(z)?;
    Ok(SemicircleReport {
        order,
        z: [z.re, z.im],
        dist_x: spec_x.to_string(),
        dist_y: spec_y.to_string(),
        replicates,
        seed,
        epsilon,
        bound,
        re,
        im,
        mean_m: [mre.value() / count, mim.value() / count],
        m_sc: [m_sc.re, m_sc.im],
    })
}
