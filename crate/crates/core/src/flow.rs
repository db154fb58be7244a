//! Ricci flow vector fields, the Einstein fixed points of the normalized flow
//! and their linearization, and the time change between the two flows.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    ricci_raw, scalar_raw, trace_raw, MetricParams, ModelParams, TangentVector,
};
use crate::integrator::{Sample, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FlowKind {
    /// `dg/dt = -2 Ric(g)`.
    Unnormalized,
    /// `dg/dt = -2 Ric(g) + (2 S / N) g`, which preserves volume.
    Normalized,
}

impl std::fmt::Display for FlowKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FlowKind::Unnormalized => "unnormalized",
            FlowKind::Normalized => "normalized",
        })
    }
}

impl std::str::FromStr for FlowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "unnormalized" | "ricci" => Ok(FlowKind::Unnormalized),
            "normalized" => Ok(FlowKind::Normalized),
            _ => Err(Error::parse(s, "expected 'normalized' or 'unnormalized'")),
        }
    }
}

/// Logarithmic rates `d(ln g_a)/dt` with no domain check.
pub(crate) fn log_rates(flow: FlowKind, g: &[f64; 4], n: f64) -> [f64; 4] {
    let r = ricci_raw(g, n);
    match flow {
        FlowKind::Unnormalized => [-2.0 * r[0], -2.0 * r[1], -2.0 * r[2], -2.0 * r[3]],
        FlowKind::Normalized => {
            let mean = trace_raw(&r, n) / (4.0 * n + 3.0);
            [
                -2.0 * (r[0] - mean),
                -2.0 * (r[1] - mean),
                -2.0 * (r[2] - mean),
                -2.0 * (r[3] - mean),
            ]
        }
    }
}

fn field(flow: FlowKind, m: &MetricParams, p: &ModelParams) -> Result<TangentVector> {
    m.validate()?;
    let g = m.to_array();
    let w = log_rates(flow, &g, p.nf());
    Ok(TangentVector::from_array([g[0] * w[0], g[1] * w[1], g[2] * w[2], g[3] * w[3]]))
}

pub fn unnormalized_field(m: &MetricParams, p: &ModelParams) -> Result<TangentVector> {
    field(FlowKind::Unnormalized, m, p)
}

pub fn normalized_field(m: &MetricParams, p: &ModelParams) -> Result<TangentVector> {
    field(FlowKind::Normalized, m, p)
}

pub fn flow_field(flow: FlowKind, m: &MetricParams, p: &ModelParams) -> Result<TangentVector> {
    field(flow, m, p)
}

/// The normalized flow restricted to the volume-one slice, in `(x, y, z)`.
pub fn slice_field(x: f64, y: f64, z: f64, p: &ModelParams) -> Result<[f64; 3]> {
    let m = MetricParams::from_slice(x, y, z, p)?;
    let h = normalized_field(&m, p)?;
    Ok([h.h_x, h.h_y, h.h_z])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FixedPointKind {
    Round,
    Jensen,
}

impl FixedPointKind {
    /// The fixed point as a volume-one metric.
    pub fn metric(&self, p: &ModelParams) -> MetricParams {
        match self {
            FixedPointKind::Round => MetricParams::round(),
            FixedPointKind::Jensen => {
                let c = p.jensen_slice_value();
                MetricParams {
                    x: c,
                    y: c,
                    z: c,
                    s: c * (2.0 * p.nf() + 3.0),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenpair {
    pub value: f64,
    pub multiplicity: usize,
    /// One eigenvector; for the double eigenvalue its images under the
    /// fiber permutations span the eigenspace.
    pub eigenvector: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointInfo {
    pub name: FixedPointKind,
    pub slice_point: [f64; 3],
    /// Diagonal entry of the slice Jacobian.
    pub a: f64,
    /// Off-diagonal entry of the slice Jacobian.
    pub b: f64,
    pub eigenvalues: Vec<Eigenpair>,
}

fn fixed_point_info(name: FixedPointKind, c: f64, a: f64, b: f64) -> FixedPointInfo {
    FixedPointInfo {
        name,
        slice_point: [c, c, c],
        a,
        b,
        eigenvalues: vec![
            Eigenpair {
                value: a + 2.0 * b,
                multiplicity: 1,
                eigenvector: [1.0, 1.0, 1.0],
            },
            Eigenpair {
                value: a - b,
                multiplicity: 2,
                eigenvector: [2.0, -1.0, -1.0],
            },
        ],
    }
}

/// Round and Jensen fixed points of the slice flow, in that order.
pub fn fixed_points(p: &ModelParams) -> Vec<FixedPointInfo> {
    let n = p.nf();
    let q = 2.0 * n + 3.0;
    let w = q.powf(-(4.0 * n + 6.0) / (4.0 * n + 3.0));
    vec![
        fixed_point_info(FixedPointKind::Round, 1.0, -8.0 * (1.0 + n), 0.0),
        fixed_point_info(
            FixedPointKind::Jensen,
            p.jensen_slice_value(),
            -8.0 * (2.0 * n * n + 7.0 * n + 5.0) * w,
            16.0 * (n + 1.0) * (n + 2.0) * w,
        ),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Linearization {
    pub point: [f64; 3],
    pub jacobian: [[f64; 3]; 3],
    /// `(re, im)` pairs sorted by descending real part.
    pub eigenvalues: Vec<(f64, f64)>,
    /// Unit null vector of `J - lambda I` for real eigenvalues.
    pub eigenvectors: Vec<Option<[f64; 3]>>,
}

/// Central-difference Jacobian of [`slice_field`] and its spectrum.
///
/// `fd_step` is an absolute step; by default each column uses
/// `eps^{1/3} |point_k|`.
pub fn linearization(point: [f64; 3], p: &ModelParams, fd_step: Option<f64>) -> Result<Linearization> {
    let default_scale = f64::EPSILON.cbrt();
    let mut jac = Matrix3::<f64>::zeros();
    for k in 0..3 {
        let xk = point[k];
        if !(xk.is_finite() && xk > 0.0) {
            return Err(Error::domain(format!("linearization point component {xk} must be positive")));
        }
        let h = fd_step.unwrap_or(default_scale * xk);
        if !(h.is_finite() && h > 16.0 * f64::EPSILON * xk) {
            return Err(Error::FiniteDifferenceStep { step: h, component: xk });
        }
        if h >= xk {
            return Err(Error::domain(format!(
                "finite-difference step {h:e} leaves the positive octant at component {xk}"
            )));
        }
        let mut plus = point;
        let mut minus = point;
        plus[k] += h;
        minus[k] -= h;
        let fp = slice_field(plus[0], plus[1], plus[2], p)?;
        let fm = slice_field(minus[0], minus[1], minus[2], p)?;
        let width = plus[k] - minus[k];
        for i in 0..3 {
            jac[(i, k)] = (fp[i] - fm[i]) / width;
        }
    }

    let mut eig: Vec<(f64, f64)> = jac
        .complex_eigenvalues()
        .iter()
        .map(|c| (c.re, c.im))
        .collect();
    eig.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)));

    let scale = jac.amax().max(f64::MIN_POSITIVE);
    let eigenvectors = eig
        .iter()
        .map(|&(re, im)| {
            if im.abs() > 1e-8 * scale {
                return None;
            }
            let shifted = jac - Matrix3::identity() * re;
            let svd = shifted.svd(false, true);
            let v_t = svd.v_t?;
            let (imin, _) = svd
                .singular_values
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))?;
            let row = v_t.row(imin);
            Some([row[0], row[1], row[2]])
        })
        .collect();

    let mut jacobian = [[0.0; 3]; 3];
    for (i, row) in jacobian.iter_mut().enumerate() {
        for (k, v) in row.iter_mut().enumerate() {
            *v = jac[(i, k)];
        }
    }
    Ok(Linearization {
        point,
        jacobian,
        eigenvalues: eig,
        eigenvectors,
    })
}

/// Time change taking a Ricci flow to the normalized flow: the normalized
/// solution at time `f(t)` is `r(t) g(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReparamMap {
    pub times: Vec<f64>,
    /// `r(t) = exp((2/N) int_0^t S)`.
    pub r_values: Vec<f64>,
    /// `f(t) = int_0^t r`.
    pub f_values: Vec<f64>,
}

const QUAD_TOL: f64 = 1e-10;
const QUAD_DEPTH: u32 = 40;

// 5-point Gauss-Legendre nodes and weights on [-1, 1].
const GL_X: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_W: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
    0.236_926_885_056_189_08,
];

fn gauss5(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL_X.iter().zip(GL_W.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

fn adaptive(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, whole: f64, depth: u32) -> Result<f64> {
    let mid = 0.5 * (a + b);
    let left = gauss5(f, a, mid);
    let right = gauss5(f, mid, b);
    let refined = left + right;
    if (refined - whole).abs() <= QUAD_TOL * refined.abs().max(QUAD_TOL) {
        return Ok(refined);
    }
    if depth == 0 || mid <= a || mid >= b {
        return Err(Error::Quadrature(format!(
            "no convergence on [{a}, {b}] (estimate {refined}, previous {whole})"
        )));
    }
    Ok(adaptive(f, a, mid, left, depth - 1)? + adaptive(f, mid, b, right, depth - 1)?)
}

fn integrate_adaptive(mut f: impl FnMut(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let whole = gauss5(&mut f, a, b);
    adaptive(&mut f, a, b, whole, QUAD_DEPTH)
}

/// Maps a densely sampled Ricci flow trajectory onto the normalized flow.
pub fn reparametrize_to_normalized(traj: &Trajectory, p: &ModelParams) -> Result<(Trajectory, ReparamMap)> {
    if traj.flow != FlowKind::Unnormalized {
        return Err(Error::Precondition("reparametrization expects a Ricci flow trajectory".into()));
    }
    let n = p.nf();
    let dim = p.dim_f();
    let samples = &traj.samples;
    if samples.is_empty() {
        return Err(Error::Precondition("empty trajectory".into()));
    }
    if samples.len() > 1 && traj.segments.is_empty() {
        return Err(Error::Quadrature(
            "trajectory carries no dense output; integrate with dense_output enabled".into(),
        ));
    }

    let mut times = Vec::with_capacity(samples.len());
    let mut r_values = Vec::with_capacity(samples.len());
    let mut f_values = Vec::with_capacity(samples.len());
    let mut cum_s = 0.0;
    let mut f = 0.0;
    times.push(samples[0].t);
    r_values.push(1.0);
    f_values.push(0.0);

    let mut seg_idx = 0;
    for w in samples.windows(2) {
        let (t0, t1) = (w[0].t, w[1].t);
        while seg_idx < traj.segments.len() && !traj.segments[seg_idx].contains(t1) {
            seg_idx += 1;
        }
        let seg = traj.segments.get(seg_idx).ok_or_else(|| {
            Error::Quadrature(format!("no dense segment covers t = {t1}"))
        })?;
        let scalar = |t: f64| scalar_raw(&seg.eval(t), n);
        let d_int = integrate_adaptive(scalar, t0, t1)?;
        let r0 = (2.0 / dim * cum_s).exp();
        let mut inner_err = None;
        let growth = |tau: f64| match integrate_adaptive(scalar, t0, tau) {
            Ok(v) => (2.0 / dim * v).exp(),
            Err(e) => {
                inner_err.get_or_insert(e);
                f64::NAN
            }
        };
        let d_f = integrate_adaptive(growth, t0, t1);
        if let Some(e) = inner_err {
            return Err(e);
        }
        cum_s += d_int;
        f += r0 * d_f?;
        times.push(t1);
        r_values.push((2.0 / dim * cum_s).exp());
        f_values.push(f);
    }

    let mut out = Vec::with_capacity(samples.len());
    for ((s, &r), &fv) in samples.iter().zip(&r_values).zip(&f_values) {
        let metric = s.metric.scaled(r);
        out.push(Sample::new(fv, metric, p));
    }
    let mut terminal = traj.terminal.clone();
    terminal.t_end = *f_values.last().unwrap_or(&0.0);
    terminal.detail = format!("reparametrized from Ricci flow time {}; {}", traj.terminal.t_end, traj.terminal.detail);
    let mapped = Trajectory {
        flow: FlowKind::Normalized,
        direction: traj.direction,
        model: *p,
        samples: out,
        segments: Vec::new(),
        terminal,
    };
    Ok((
        mapped,
        ReparamMap {
            times,
            r_values,
            f_values,
        },
    ))
}
