//! Closed-form curvature of the four-parameter family of Sp(n+1)-invariant
//! metrics on S^{4n+3}.
//!
//! A metric is `x` on the fiber direction `i`, `y` on `j`, `z` on `k` and `s`
//! on the 4n-dimensional quaternionic base block. Every quantity here is a
//! rational (or algebraic) function of those four numbers.
//!
//! The Ricci eigenvalues are evaluated in the factored form
//! `2 (a - b + c)(a + b - c) / (xyz)` for the fiber terms, which equals the
//! textbook `2 (a^2 - b^2 - c^2) / (xyz) + 4/a` but does not lose every digit
//! when one fiber eigenvalue collapses (`x -> 0` with `y = z` large). Three-term
//! sums go through [`sum3`], which sorts its arguments first, so that every
//! formula is bitwise equivariant under permutations of `(x, y, z)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The quaternionic dimension `n`; the sphere is `S^{4n+3}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct ModelParams {
    n: u32,
}

impl ModelParams {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("model parameter n must be at least 1"));
        }
        Ok(ModelParams { n })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Manifold dimension `N = 4n + 3`.
    pub fn dim(&self) -> u32 {
        4 * self.n + 3
    }

    pub(crate) fn nf(&self) -> f64 {
        f64::from(self.n)
    }

    pub(crate) fn dim_f(&self) -> f64 {
        f64::from(self.dim())
    }

    /// Multiplicity `4n` of the base eigenvalue `s`.
    pub fn base_multiplicity(&self) -> f64 {
        4.0 * self.nf()
    }

    /// Common fiber value `(2n+3)^{-4n/(4n+3)}` of the volume-one Jensen metric.
    pub fn jensen_slice_value(&self) -> f64 {
        let n = self.nf();
        (2.0 * n + 3.0).powf(-4.0 * n / (4.0 * n + 3.0))
    }
}

impl TryFrom<u32> for ModelParams {
    type Error = Error;

    fn try_from(n: u32) -> Result<Self> {
        ModelParams::new(n)
    }
}

impl From<ModelParams> for u32 {
    fn from(p: ModelParams) -> u32 {
        p.n
    }
}

/// A point `(x, y, z, s)` of the metric family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricParams {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub s: f64,
}

impl MetricParams {
    pub fn new(x: f64, y: f64, z: f64, s: f64) -> Result<Self> {
        let m = MetricParams { x, y, z, s };
        m.validate()?;
        Ok(m)
    }

    /// Volume-one point over slice coordinates, `s = (xyz)^{-1/(4n)}`.
    pub fn from_slice(x: f64, y: f64, z: f64, p: &ModelParams) -> Result<Self> {
        check_slice(x, y, z)?;
        let s = prod3(x, y, z).powf(-1.0 / p.base_multiplicity());
        MetricParams::new(x, y, z, s)
    }

    /// The round metric `x = y = z = s = 1`.
    pub fn round() -> Self {
        MetricParams {
            x: 1.0,
            y: 1.0,
            z: 1.0,
            s: 1.0,
        }
    }

    /// Jensen's second Einstein metric `x = y = z = 1`, `s = 2n + 3`.
    pub fn jensen(p: &ModelParams) -> Self {
        MetricParams {
            x: 1.0,
            y: 1.0,
            z: 1.0,
            s: 2.0 * p.nf() + 3.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("x", self.x), ("y", self.y), ("z", self.z), ("s", self.s)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!(
                    "metric component {name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x, self.y, self.z, self.s]
    }

    pub fn from_array(g: [f64; 4]) -> Self {
        MetricParams {
            x: g[0],
            y: g[1],
            z: g[2],
            s: g[3],
        }
    }

    pub fn fiber(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        MetricParams {
            x: lambda * self.x,
            y: lambda * self.y,
            z: lambda * self.z,
            s: lambda * self.s,
        }
    }
}

/// Eigenvalues of the Ricci endomorphism; `r_h` has multiplicity `4n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RicciEigenvalues {
    pub r_i: f64,
    pub r_j: f64,
    pub r_k: f64,
    pub r_h: f64,
}

impl RicciEigenvalues {
    pub fn to_array(&self) -> [f64; 4] {
        [self.r_i, self.r_j, self.r_k, self.r_h]
    }

    fn from_array(r: [f64; 4]) -> Self {
        RicciEigenvalues {
            r_i: r[0],
            r_j: r[1],
            r_k: r[2],
            r_h: r[3],
        }
    }

    /// `r_i + r_j + r_k + 4n r_h`.
    pub fn trace(&self, p: &ModelParams) -> f64 {
        trace_raw(&self.to_array(), p.nf())
    }
}

/// A diagonal symmetric 2-tensor, i.e. a perturbation of the four eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TangentVector {
    pub h_x: f64,
    pub h_y: f64,
    pub h_z: f64,
    pub h_s: f64,
}

impl TangentVector {
    pub fn new(h_x: f64, h_y: f64, h_z: f64, h_s: f64) -> Self {
        TangentVector { h_x, h_y, h_z, h_s }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.h_x, self.h_y, self.h_z, self.h_s]
    }

    pub fn from_array(h: [f64; 4]) -> Self {
        TangentVector::new(h[0], h[1], h[2], h[3])
    }

    /// `h_x/x + h_y/y + h_z/z + 4n h_s/s`, the first variation of the volume.
    pub fn volume_variation(&self, m: &MetricParams, p: &ModelParams) -> f64 {
        self.h_x / m.x + self.h_y / m.y + self.h_z / m.z + p.base_multiplicity() * self.h_s / m.s
    }

    pub fn is_volume_preserving(&self, m: &MetricParams, p: &ModelParams, tol: f64) -> bool {
        let scale = (self.h_x / m.x).abs()
            + (self.h_y / m.y).abs()
            + (self.h_z / m.z).abs()
            + p.base_multiplicity() * (self.h_s / m.s).abs();
        self.volume_variation(m, p).abs() <= tol * scale.max(f64::MIN_POSITIVE)
    }
}

/// Permutation of the three fiber slots: position `k` of the canonical metric
/// holds input slot `self.0[k]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Permutation(pub [usize; 3]);

impl Permutation {
    pub const IDENTITY: Permutation = Permutation([0, 1, 2]);

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }

    pub fn apply<T: Copy>(&self, v: [T; 3]) -> [T; 3] {
        [v[self.0[0]], v[self.0[1]], v[self.0[2]]]
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = [0; 3];
        for (k, &src) in self.0.iter().enumerate() {
            inv[src] = k;
        }
        Permutation(inv)
    }

    pub fn apply_metric(&self, m: &MetricParams) -> MetricParams {
        let [x, y, z] = self.apply(m.fiber());
        MetricParams { x, y, z, s: m.s }
    }

    /// All six permutations, identity first.
    pub fn all() -> [Permutation; 6] {
        [
            Permutation([0, 1, 2]),
            Permutation([0, 2, 1]),
            Permutation([1, 0, 2]),
            Permutation([1, 2, 0]),
            Permutation([2, 0, 1]),
            Permutation([2, 1, 0]),
        ]
    }
}

/// Metric with sorted fiber eigenvalues and the permutation that sorted them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub metric: MetricParams,
    pub permutation: Permutation,
}

impl CanonicalForm {
    pub fn original(&self) -> MetricParams {
        self.permutation.inverse().apply_metric(&self.metric)
    }
}

// ---------------------------------------------------------------------------
// Arithmetic kernels shared with the flow and integrator.

fn sort3(mut v: [f64; 3]) -> [f64; 3] {
    if v[0] > v[1] {
        v.swap(0, 1);
    }
    if v[1] > v[2] {
        v.swap(1, 2);
    }
    if v[0] > v[1] {
        v.swap(0, 1);
    }
    v
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Order-independent, compensated sum of three values.
pub(crate) fn sum3(a: f64, b: f64, c: f64) -> f64 {
    let [a, b, c] = sort3([a, b, c]);
    let (s1, e1) = two_sum(a, b);
    let (s2, e2) = two_sum(s1, c);
    s2 + (e1 + e2)
}

/// Order-independent product of three values.
pub(crate) fn prod3(a: f64, b: f64, c: f64) -> f64 {
    let [a, b, c] = sort3([a, b, c]);
    a * b * c
}

#[inline]
fn fiber_ricci(a: f64, b: f64, c: f64, xyz: f64, base: f64) -> f64 {
    2.0 * sum3(a, -b, c) * sum3(a, b, -c) / xyz + base * a
}

/// Ricci eigenvalues of `g = [x, y, z, s]` with no domain check.
pub(crate) fn ricci_raw(g: &[f64; 4], n: f64) -> [f64; 4] {
    let [x, y, z, s] = *g;
    let xyz = prod3(x, y, z);
    let s2 = s * s;
    let base = 4.0 * n / s2;
    [
        fiber_ricci(x, y, z, xyz, base),
        fiber_ricci(y, x, z, xyz, base),
        fiber_ricci(z, x, y, xyz, base),
        -2.0 * sum3(x, y, z) / s2 + (4.0 * n + 8.0) / s,
    ]
}

pub(crate) fn trace_raw(r: &[f64; 4], n: f64) -> f64 {
    sum3(r[0], r[1], r[2]) + 4.0 * n * r[3]
}

/// Scalar curvature from the closed form, with the fiber part regrouped as
/// `(a(4(b+c) - 2a) - 2(c-b)^2) / (abc)` over the sorted fiber values.
pub(crate) fn scalar_raw(g: &[f64; 4], n: f64) -> f64 {
    let [a, b, c] = sort3([g[0], g[1], g[2]]);
    let s = g[3];
    let fiber = (a * (4.0 * (b + c) - 2.0 * a) - 2.0 * (c - b) * (c - b)) / (a * b * c);
    fiber + 16.0 * n * (n + 2.0) / s - 4.0 * n * sum3(a, b, c) / (s * s)
}

/// `|Ric^0|^2` as a sum of squares, which stays nonnegative and vanishes to
/// rounding at Einstein metrics.
pub(crate) fn traceless_norm_sq_raw(r: &[f64; 4], n: f64) -> f64 {
    let mean = trace_raw(r, n) / (4.0 * n + 3.0);
    let d = [r[0] - mean, r[1] - mean, r[2] - mean, r[3] - mean];
    sum3(d[0] * d[0], d[1] * d[1], d[2] * d[2]) + 4.0 * n * d[3] * d[3]
}

pub(crate) fn volume_raw(g: &[f64; 4], n: f64) -> f64 {
    prod3(g[0], g[1], g[2]) * g[3].powi(4 * n as i32)
}

fn check_slice(x: f64, y: f64, z: f64) -> Result<()> {
    for (name, v) in [("x", x), ("y", y), ("z", z)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::domain(format!(
                "slice coordinate {name} must be positive and finite, got {v}"
            )));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Public operations.

pub fn ricci_eigenvalues(m: &MetricParams, p: &ModelParams) -> Result<RicciEigenvalues> {
    m.validate()?;
    Ok(RicciEigenvalues::from_array(ricci_raw(&m.to_array(), p.nf())))
}

pub fn scalar_curvature(m: &MetricParams, p: &ModelParams) -> Result<f64> {
    m.validate()?;
    Ok(scalar_raw(&m.to_array(), p.nf()))
}

/// Scalar curvature over volume-one slice coordinates, where
/// `s = (xyz)^{-1/(4n)}` has been substituted.
pub fn scalar_curvature_slice(x: f64, y: f64, z: f64, p: &ModelParams) -> Result<f64> {
    check_slice(x, y, z)?;
    let n = p.nf();
    let xyz = prod3(x, y, z);
    let q = xyz.powf(1.0 / (4.0 * n));
    Ok(4.0 / x + 4.0 / y + 4.0 / z
        - 2.0 * z / (x * y)
        - 2.0 * y / (x * z)
        - 2.0 * x / (y * z)
        + 16.0 * n * (n + 2.0) * q
        - 4.0 * n * sum3(x, y, z) * q * q)
}

pub fn ricci_norm_sq(m: &MetricParams, p: &ModelParams) -> Result<f64> {
    let r = ricci_eigenvalues(m, p)?.to_array();
    Ok(sum3(r[0] * r[0], r[1] * r[1], r[2] * r[2]) + p.base_multiplicity() * r[3] * r[3])
}

pub fn traceless_ricci_norm_sq(m: &MetricParams, p: &ModelParams) -> Result<f64> {
    let r = ricci_eigenvalues(m, p)?.to_array();
    Ok(traceless_norm_sq_raw(&r, p.nf()))
}

/// `x y z s^{4n}`; the volume of the unit round sphere is dropped.
pub fn relative_volume(m: &MetricParams, p: &ModelParams) -> Result<f64> {
    m.validate()?;
    Ok(volume_raw(&m.to_array(), p.nf()))
}

/// Homothetic rescaling onto the volume-one slice.
pub fn normalize_volume(m: &MetricParams, p: &ModelParams) -> Result<MetricParams> {
    let vol = relative_volume(m, p)?;
    Ok(m.scaled(vol.powf(-1.0 / p.dim_f())))
}

/// Stable sort of the fiber eigenvalues into `x <= y <= z`.
pub fn canonicalize(m: &MetricParams) -> CanonicalForm {
    let fiber = m.fiber();
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| fiber[a].total_cmp(&fiber[b]));
    let permutation = Permutation(idx);
    CanonicalForm {
        metric: permutation.apply_metric(m),
        permutation,
    }
}

/// Sectional curvatures `K(i,T), K(j,T), K(k,T)` of fiber-base planes.
pub fn sectional_fiber_base(m: &MetricParams) -> Result<[f64; 3]> {
    m.validate()?;
    let s2 = m.s * m.s;
    Ok([m.x / s2, m.y / s2, m.z / s2])
}

/// Pointwise inner product `tr(g^{-1} h1 g^{-1} h2)` with multiplicities.
pub fn l2_pairing(
    m: &MetricParams,
    h1: &TangentVector,
    h2: &TangentVector,
    p: &ModelParams,
) -> Result<f64> {
    m.validate()?;
    Ok(h1.h_x * h2.h_x / (m.x * m.x)
        + h1.h_y * h2.h_y / (m.y * m.y)
        + h1.h_z * h2.h_z / (m.z * m.z)
        + p.base_multiplicity() * h1.h_s * h2.h_s / (m.s * m.s))
}

/// The gradient of `S` on the volume-one slice for [`l2_pairing`]:
/// the negative traceless Ricci tensor, `-(g_a r_a - (S/N) g_a)`.
pub fn scalar_curvature_gradient(m: &MetricParams, p: &ModelParams) -> Result<TangentVector> {
    let r = ricci_eigenvalues(m, p)?.to_array();
    let mean = trace_raw(&r, p.nf()) / p.dim_f();
    let g = m.to_array();
    Ok(TangentVector::from_array([
        -g[0] * (r[0] - mean),
        -g[1] * (r[1] - mean),
        -g[2] * (r[2] - mean),
        -g[3] * (r[3] - mean),
    ]))
}

/// Directional derivative `dS(h) = -<Ric, h>` for invariant metrics.
pub fn scalar_curvature_derivative(
    m: &MetricParams,
    h: &TangentVector,
    p: &ModelParams,
) -> Result<f64> {
    let r = ricci_eigenvalues(m, p)?.to_array();
    let g = m.to_array();
    let h = h.to_array();
    let fiber = sum3(r[0] * h[0] / g[0], r[1] * h[1] / g[1], r[2] * h[2] / g[2]);
    Ok(-(fiber + p.base_multiplicity() * r[3] * h[3] / g[3]))
}
