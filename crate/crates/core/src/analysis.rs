//! Classification of ancient solutions, the separatrix between round
//! convergence and blow-up, and the rescaled profile at a forward singularity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{FixedPointKind, FlowKind};
use crate::geometry::{
    canonicalize, ricci_eigenvalues, CanonicalForm, MetricParams, ModelParams,
};
use crate::integrator::{
    fixed_point_distance, integrate, Direction, IntegratorConfig, TerminalBehavior, TerminalKind,
    Trajectory,
};

/// Default relative tolerance for the equalities in [`classify_ancient`].
pub const DEFAULT_ANCIENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AncientReason {
    YEqualsZAndZLeqS,
    YNotEqualZ,
    ZGreaterThanS,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AncientVerdict {
    pub ancient: bool,
    pub reason: AncientReason,
    pub canonical: CanonicalForm,
    pub tol_used: f64,
}

/// After sorting the fiber so that `x <= y <= z`: ancient iff `y = z <= s`,
/// with relative tolerance `tol` on both tests.
pub fn classify_ancient(m: &MetricParams, tol: f64) -> Result<AncientVerdict> {
    m.validate()?;
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::domain(format!("tolerance must be nonnegative, got {tol}")));
    }
    let canonical = canonicalize(m);
    let c = canonical.metric;
    let reason = if (c.y - c.z).abs() > tol * c.z {
        AncientReason::YNotEqualZ
    } else if c.z > c.s * (1.0 + tol) {
        AncientReason::ZGreaterThanS
    } else {
        AncientReason::YEqualsZAndZLeqS
    };
    Ok(AncientVerdict {
        ancient: reason == AncientReason::YEqualsZAndZLeqS,
        reason,
        canonical,
        tol_used: tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NumericalAncient {
    Ancient,
    NonAncient,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AncientReport {
    pub classifier: AncientVerdict,
    pub numerical: NumericalAncient,
    /// The run was conclusive and agrees with the classifier.
    pub verdict_match: bool,
    pub backward_terminal: TerminalBehavior,
    pub s_positive_throughout: bool,
    pub min_scalar: f64,
    pub samples: usize,
}

impl AncientReport {
    pub fn conclusive(&self) -> bool {
        self.numerical != NumericalAncient::Inconclusive
    }
}

/// Integrates the normalized flow backward and reads off whether the
/// solution extends to all negative times.
pub fn verify_ancient_numerically(
    m: &MetricParams,
    p: &ModelParams,
    cfg: &IntegratorConfig,
) -> Result<AncientReport> {
    let classifier = classify_ancient(m, DEFAULT_ANCIENT_TOL)?;
    let traj = match integrate(FlowKind::Normalized, m, Direction::Backward, p, cfg) {
        Ok(t) => t,
        Err(Error::StepUnderflow { trajectory, .. } | Error::MaxStepsExceeded { trajectory, .. }) => {
            *trajectory
        }
        Err(e) => return Err(e),
    };
    let min_scalar = traj
        .samples
        .iter()
        .map(|s| s.diagnostics.scalar)
        .fold(f64::INFINITY, f64::min);
    let s_positive_throughout = min_scalar > 0.0;
    let numerical = match traj.terminal.kind {
        TerminalKind::BackwardCollapse { .. }
        | TerminalKind::ConvergedJensen
        | TerminalKind::ConvergedRound
            if s_positive_throughout =>
        {
            NumericalAncient::Ancient
        }
        TerminalKind::BackwardSingularity => NumericalAncient::NonAncient,
        _ => NumericalAncient::Inconclusive,
    };
    let verdict_match = match numerical {
        NumericalAncient::Ancient => classifier.ancient,
        NumericalAncient::NonAncient => !classifier.ancient,
        NumericalAncient::Inconclusive => false,
    };
    Ok(AncientReport {
        classifier,
        numerical,
        verdict_match,
        backward_terminal: traj.terminal.clone(),
        s_positive_throughout,
        min_scalar,
        samples: traj.samples.len(),
    })
}

fn check_ys(y: f64, s: f64) -> Result<()> {
    if !(y.is_finite() && y > 0.0 && s.is_finite() && s > 0.0) {
        return Err(Error::domain(format!("y and s must be positive and finite, got y={y}, s={s}")));
    }
    Ok(())
}

/// The volume-one metric `(1/(y^2 s^{4n}), y, y, s)`.
pub fn ancient_form_metric(y: f64, s: f64, p: &ModelParams) -> Result<MetricParams> {
    check_ys(y, s)?;
    let x = 1.0 / (y * y * s.powi(4 * p.n() as i32));
    MetricParams::new(x, y, y, s)
}

/// Scalar curvature of [`ancient_form_metric`] written in `(y, s)`.
pub fn scalar_curvature_ancient_form(y: f64, s: f64, p: &ModelParams) -> Result<f64> {
    check_ys(y, s)?;
    let n = p.nf();
    let s4n = s.powi(4 * p.n() as i32);
    Ok(16.0 * n * n / s - 8.0 * n * y / (s * s) - (4.0 * n / (s * s) + 2.0 / (y * y)) / (s4n * y * y)
        + 32.0 * n / s
        + 8.0 / y)
}

/// `r_j - r_h` on [`ancient_form_metric`], in factored form.
pub fn rj_minus_rh(y: f64, s: f64, p: &ModelParams) -> Result<f64> {
    check_ys(y, s)?;
    let n = p.nf();
    let s4n = s.powi(4 * p.n() as i32);
    Ok(2.0 * (y - s) * (s + y + 2.0 * s4n * y * y * y * ((1.0 + n) * y - s))
        / (y.powi(4) * s * s * s4n))
}

/// The two possible backward limits of `y/s`: `1` and `1/(1+n)`.
///
/// Roots of `(1+n) C^2 - (2+n) C + 1 = 0`; the second one comes from the
/// product of the roots, which avoids cancellation.
pub fn ys_limit_candidates(p: &ModelParams) -> (f64, f64) {
    let n = p.nf();
    let a = 1.0 + n;
    let b = -(2.0 + n);
    let disc = (b * b - 4.0 * a).sqrt();
    let big = (-b + disc) / (2.0 * a);
    (big, 1.0 / (a * big))
}

/// Threshold on the volume-normalized distance to the Jensen metric for the
/// stable-manifold witness.
pub const JENSEN_WITNESS_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatrixResult {
    pub u_star: f64,
    pub point: [f64; 3],
    pub bracket_width: f64,
    /// Terminal behaviors at the lower and upper ends of the final bracket.
    pub side_witnesses: [TerminalBehavior; 2],
    /// Closest volume-normalized approach to the Jensen metric from `point`.
    pub witness_distance: f64,
    pub witness_ok: bool,
}

fn lerp(a: &[f64; 3], b: &[f64; 3], u: f64) -> [f64; 3] {
    [
        (1.0 - u) * a[0] + u * b[0],
        (1.0 - u) * a[1] + u * b[1],
        (1.0 - u) * a[2] + u * b[2],
    ]
}

fn forward_side(point: [f64; 3], u: f64, p: &ModelParams, cfg: &IntegratorConfig) -> Result<TerminalBehavior> {
    let m = MetricParams::from_slice(point[0], point[1], point[2], p)?;
    let traj = integrate(FlowKind::Normalized, &m, Direction::Forward, p, cfg)?;
    match traj.terminal.kind {
        TerminalKind::ConvergedRound | TerminalKind::ForwardBlowup => Ok(traj.terminal),
        TerminalKind::HorizonReached => Err(Error::ClassificationTimeout { u }),
        kind => Err(Error::UnclassifiedEndpoint { u, kind }),
    }
}

/// Closest approach of the forward normalized flow to the Jensen metric.
pub fn jensen_approach(m: &MetricParams, p: &ModelParams, cfg: &IntegratorConfig) -> Result<(f64, Trajectory)> {
    let mut cfg = cfg.clone();
    cfg.detect_jensen = false;
    let traj = integrate(FlowKind::Normalized, m, Direction::Forward, p, &cfg)?;
    let d = traj
        .samples
        .iter()
        .map(|s| fixed_point_distance(&s.metric, FixedPointKind::Jensen, p))
        .fold(f64::INFINITY, f64::min);
    Ok((d, traj))
}

/// Bisects the segment `a -> b` of slice points for the boundary between
/// round convergence and forward blow-up.
pub fn trace_separatrix(
    a: [f64; 3],
    b: [f64; 3],
    p: &ModelParams,
    cfg: &IntegratorConfig,
    bracket_tol: f64,
) -> Result<SeparatrixResult> {
    if !(bracket_tol.is_finite() && bracket_tol > 0.0) {
        return Err(Error::domain(format!("bracket_tol must be positive, got {bracket_tol}")));
    }
    let mut cfg = cfg.clone();
    cfg.detect_jensen = false;
    cfg.dense_output = false;
    cfg.samples_per_step = 1;

    let (side_a, side_b) = rayon::join(
        || forward_side(a, 0.0, p, &cfg),
        || forward_side(b, 1.0, p, &cfg),
    );
    let (mut lo_side, mut hi_side) = (side_a?, side_b?);
    if lo_side.kind == hi_side.kind {
        return Err(Error::SameSide(lo_side.kind));
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > bracket_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let side = forward_side(lerp(&a, &b, mid), mid, p, &cfg)?;
        if side.kind == lo_side.kind {
            lo = mid;
            lo_side = side;
        } else {
            hi = mid;
            hi_side = side;
        }
    }
    let u_star = 0.5 * (lo + hi);
    let point = lerp(&a, &b, u_star);
    let m = MetricParams::from_slice(point[0], point[1], point[2], p)?;
    let (witness_distance, _) = jensen_approach(&m, p, &cfg)?;
    Ok(SeparatrixResult {
        u_star,
        point,
        bracket_width: hi - lo,
        side_witnesses: [lo_side, hi_side],
        witness_distance,
        witness_ok: witness_distance <= JENSEN_WITNESS_TOL,
    })
}

/// Fewest samples in the blow-up window.
pub const PROFILE_MIN_SAMPLES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupProfile {
    /// `x S` at the final sample.
    pub xs_limit: f64,
    /// Ricci eigenvalues of `(S/6) g` at the final sample; the round
    /// `S^3 x R^{4n}` limit reads `(2, 2, 2, 0)`.
    pub rescaled_ricci: [f64; 4],
    /// `(x/z, y/z)` at the final sample.
    pub ratio_limits: (f64, f64),
    pub window_samples: usize,
}

/// Rescaled geometry at a forward singularity, read from samples with `S`
/// above 1% of its final value.
pub fn blowup_profile(traj: &Trajectory, p: &ModelParams) -> Result<BlowupProfile> {
    if traj.terminal.kind != TerminalKind::ForwardBlowup {
        return Err(Error::Precondition(format!(
            "blow-up profile needs a ForwardBlowup trajectory, got {}",
            traj.terminal.kind
        )));
    }
    let last = traj.last();
    let s_final = last.diagnostics.scalar;
    let window_samples = traj
        .samples
        .iter()
        .filter(|s| s.diagnostics.scalar > 0.01 * s_final)
        .count();
    if window_samples < PROFILE_MIN_SAMPLES {
        return Err(Error::ProfileWindowTooShort { samples: window_samples });
    }
    let r = ricci_eigenvalues(&last.metric, p)?.to_array();
    let scale = 6.0 / s_final;
    Ok(BlowupProfile {
        xs_limit: last.metric.x * s_final,
        rescaled_ricci: [r[0] * scale, r[1] * scale, r[2] * scale, r[3] * scale],
        ratio_limits: (last.diagnostics.x_over_z, last.diagnostics.y_over_z),
        window_samples,
    })
}
