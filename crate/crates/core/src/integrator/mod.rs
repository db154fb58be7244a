//! Adaptive integration of the Ricci flow and the normalized Ricci flow,
//! with terminal-event detection.
//!
//! The state is carried in logarithmic coordinates `u_a = ln g_a`, so every
//! emitted metric is strictly positive. Backward integration runs the negated
//! field forward in an internal clock and reports signed physical time.
//!
//! Initial data with exactly equal fiber eigenvalues (and `s` equal to at
//! least two of them) is integrated with the tied components sharing one
//! multiplicity-weighted rate, so invariant subsets such as `y = z` or
//! `y = z = s` are preserved bit for bit. These subsets are transversally
//! unstable for the backward flow and drift off them otherwise.

mod dopri;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{log_rates, FixedPointKind, FlowKind};
use crate::geometry::{
    ricci_raw, scalar_raw, sum3, traceless_norm_sq_raw, volume_raw, MetricParams, ModelParams,
    RicciEigenvalues,
};
use dopri::{Dense, Dopri5, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(&self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Largest `|t|` integrated.
    pub t_horizon: f64,
    /// Forward singularity threshold on `S`.
    pub blowup_s: f64,
    /// Backward singularity threshold on `S`.
    pub backward_s_floor: f64,
    /// Distance and `|Ric^0|^2` threshold for Einstein convergence; `0` disables.
    pub einstein_tol: f64,
    /// Whether convergence to the Jensen metric ends a run.
    pub detect_jensen: bool,
    pub min_step: f64,
    /// Keep the continuous extension of every step.
    pub dense_output: bool,
    /// Samples recorded per accepted step (interior ones from dense output).
    pub samples_per_step: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 1_000_000,
            t_horizon: 1000.0,
            blowup_s: 1e8,
            backward_s_floor: -1e6,
            einstein_tol: 1e-9,
            detect_jensen: true,
            min_step: 1e-14,
            dense_output: true,
            samples_per_step: 1,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("rel_tol", self.rel_tol)?;
        positive("abs_tol", self.abs_tol)?;
        positive("t_horizon", self.t_horizon)?;
        positive("blowup_s", self.blowup_s)?;
        positive("min_step", self.min_step)?;
        if !(self.backward_s_floor.is_finite() && self.backward_s_floor < 0.0) {
            return Err(Error::Config(format!(
                "backward_s_floor must be negative and finite, got {}",
                self.backward_s_floor
            )));
        }
        if !(self.einstein_tol.is_finite() && self.einstein_tol >= 0.0) {
            return Err(Error::Config("einstein_tol must be nonnegative".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be at least 1".into()));
        }
        if self.samples_per_step == 0 {
            return Err(Error::Config("samples_per_step must be at least 1".into()));
        }
        if self.samples_per_step > 1 && !self.dense_output {
            return Err(Error::Config("samples_per_step > 1 requires dense_output".into()));
        }
        Ok(())
    }
}

/// Per-sample curvature diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(rename = "S")]
    pub scalar: f64,
    #[serde(flatten)]
    pub ricci: RicciEigenvalues,
    pub ric0_sq: f64,
    #[serde(rename = "vol")]
    pub volume: f64,
    pub x_over_z: f64,
    pub y_over_z: f64,
    pub y_over_s: f64,
}

impl Diagnostics {
    pub fn of(m: &MetricParams, p: &ModelParams) -> Self {
        let g = m.to_array();
        let n = p.nf();
        let r = ricci_raw(&g, n);
        Diagnostics {
            scalar: scalar_raw(&g, n),
            ricci: RicciEigenvalues {
                r_i: r[0],
                r_j: r[1],
                r_k: r[2],
                r_h: r[3],
            },
            ric0_sq: traceless_norm_sq_raw(&r, n),
            volume: volume_raw(&g, n),
            x_over_z: m.x / m.z,
            y_over_z: m.y / m.z,
            y_over_s: m.y / m.s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    #[serde(flatten)]
    pub metric: MetricParams,
    #[serde(flatten)]
    pub diagnostics: Diagnostics,
}

impl Sample {
    pub fn new(t: f64, metric: MetricParams, p: &ModelParams) -> Self {
        Sample {
            t,
            metric,
            diagnostics: Diagnostics::of(&metric, p),
        }
    }
}

/// Continuous extension of one accepted step between physical times `t0`, `t1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub t0: f64,
    pub t1: f64,
    dense: Dense,
}

impl Segment {
    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = if self.t0 <= self.t1 { (self.t0, self.t1) } else { (self.t1, self.t0) };
        lo <= t && t <= hi
    }

    /// Metric components `[x, y, z, s]` at physical time `t`.
    pub fn eval(&self, t: f64) -> [f64; 4] {
        let theta = if self.t1 == self.t0 { 0.0 } else { (t - self.t0) / (self.t1 - self.t0) };
        exp4(&self.dense.eval(theta))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TerminalKind {
    ConvergedRound,
    ConvergedJensen,
    ForwardBlowup,
    BackwardCollapse { ratio_limit: f64 },
    BackwardSingularity,
    HorizonReached,
}

impl TerminalKind {
    /// Short label without payload.
    pub fn label(&self) -> &'static str {
        match self {
            TerminalKind::ConvergedRound => "ConvergedRound",
            TerminalKind::ConvergedJensen => "ConvergedJensen",
            TerminalKind::ForwardBlowup => "ForwardBlowup",
            TerminalKind::BackwardCollapse { .. } => "BackwardCollapse",
            TerminalKind::BackwardSingularity => "BackwardSingularity",
            TerminalKind::HorizonReached => "HorizonReached",
        }
    }
}

impl std::fmt::Display for TerminalKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TerminalKind::BackwardCollapse { ratio_limit } => {
                write!(f, "BackwardCollapse(ratio_limit={ratio_limit})")
            }
            other => f.write_str(other.label()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminalBehavior {
    pub kind: TerminalKind,
    pub t_end: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub flow: FlowKind,
    pub direction: Direction,
    #[serde(rename = "n")]
    pub model: ModelParams,
    pub samples: Vec<Sample>,
    #[serde(skip)]
    pub segments: Vec<Segment>,
    pub terminal: TerminalBehavior,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectories hold at least one sample")
    }

    /// State at physical time `t` from the dense output, if it covers `t`.
    pub fn state_at(&self, t: f64) -> Option<MetricParams> {
        if self.samples.len() == 1 && self.samples[0].t == t {
            return Some(self.samples[0].metric);
        }
        let forward = self.direction == Direction::Forward;
        // segments are ordered along the direction of integration
        let idx = self.segments.partition_point(|s| {
            let hi = if forward { s.t1 } else { -s.t1 };
            let key = if forward { t } else { -t };
            hi < key
        });
        let seg = self.segments.get(idx)?;
        if !seg.contains(t) {
            return None;
        }
        Some(MetricParams::from_array(seg.eval(t)))
    }
}

// ---------------------------------------------------------------------------

fn exp4(u: &State) -> [f64; 4] {
    [u[0].exp(), u[1].exp(), u[2].exp(), u[3].exp()]
}

fn ln4(g: &[f64; 4]) -> State {
    [g[0].ln(), g[1].ln(), g[2].ln(), g[3].ln()]
}

/// Groups of components that start exactly equal and stay equal.
#[derive(Debug, Clone, Copy)]
struct Ties {
    /// Group label per component; components sharing a label are tied.
    group: [usize; 4],
}

impl Ties {
    fn detect(g: &[f64; 4]) -> Self {
        let mut group = [0, 1, 2, 3];
        for i in 0..3 {
            for j in 0..i {
                if g[i] == g[j] {
                    group[i] = group[j];
                    break;
                }
            }
        }
        let equal_to_s = (0..3).filter(|&i| g[i] == g[3]).count();
        if equal_to_s >= 2 {
            let first = (0..3).find(|&i| g[i] == g[3]).expect("counted above");
            group[3] = group[first];
        }
        Ties { group }
    }

    fn is_trivial(&self) -> bool {
        self.group == [0, 1, 2, 3]
    }

    fn apply(&self, w: &mut State, base_mult: f64) {
        if self.is_trivial() {
            return;
        }
        for label in 0..4 {
            let members: Vec<usize> = (0..4).filter(|&i| self.group[i] == label).collect();
            if members.len() < 2 {
                continue;
            }
            let mut fiber = [0.0; 3];
            let mut weight = 0.0;
            let mut base = 0.0;
            for &i in &members {
                if i < 3 {
                    fiber[i] = w[i];
                    weight += 1.0;
                } else {
                    base = base_mult * w[3];
                    weight += base_mult;
                }
            }
            let mean = (sum3(fiber[0], fiber[1], fiber[2]) + base) / weight;
            for &i in &members {
                w[i] = mean;
            }
        }
    }
}

/// Relative distance of the volume-normalized metric to a fixed point.
pub fn fixed_point_distance(m: &MetricParams, kind: FixedPointKind, p: &ModelParams) -> f64 {
    let g = m.to_array();
    let lambda = volume_raw(&g, p.nf()).powf(-1.0 / p.dim_f());
    let target = kind.metric(p).to_array();
    let d: Vec<f64> = (0..4).map(|i| ((lambda * g[i] - target[i]) / target[i]).abs()).collect();
    d[0].max(d[1]).max(d[2]).max(d[3])
}

fn einstein_kind(m: &MetricParams, p: &ModelParams, cfg: &IntegratorConfig) -> Option<FixedPointKind> {
    if cfg.einstein_tol <= 0.0 {
        return None;
    }
    let g = m.to_array();
    let lambda = volume_raw(&g, p.nf()).powf(-1.0 / p.dim_f());
    let normalized = [lambda * g[0], lambda * g[1], lambda * g[2], lambda * g[3]];
    let ric0 = traceless_norm_sq_raw(&ricci_raw(&normalized, p.nf()), p.nf());
    if ric0 >= cfg.einstein_tol {
        return None;
    }
    let mut kinds = vec![FixedPointKind::Round];
    if cfg.detect_jensen {
        kinds.push(FixedPointKind::Jensen);
    }
    kinds
        .into_iter()
        .find(|&k| fixed_point_distance(m, k, p) < cfg.einstein_tol)
}

fn median3(a: f64, b: f64, c: f64) -> f64 {
    a.max(b).min(a.min(b).max(c))
}

/// Smallest number of tail samples used for the backward ratio fit.
const COLLAPSE_MIN_WINDOW: usize = 5;
const COLLAPSE_S_MIN: f64 = 100.0;
const COLLAPSE_SNAP_TOL: f64 = 1e-2;

/// Classifies a backward run that reached the horizon: collapse with a
/// snapped `y/s` limit, or a plain horizon stop.
fn backward_horizon_kind(traj: &Trajectory, p: &ModelParams) -> (TerminalKind, String) {
    let first = &traj.samples[0];
    let last = traj.last();
    let s_last = last.diagnostics.scalar;
    if !(s_last > 0.0 && s_last < first.diagnostics.scalar && last.metric.s > COLLAPSE_S_MIN) {
        return (
            TerminalKind::HorizonReached,
            format!("no collapse regime: S = {s_last:e}, s = {:e}", last.metric.s),
        );
    }
    let tail: Vec<&Sample> = traj
        .samples
        .iter()
        .filter(|s| s.metric.s > COLLAPSE_S_MIN)
        .collect();
    let take = (tail.len() as f64 * 0.2).ceil() as usize;
    if take < COLLAPSE_MIN_WINDOW {
        return (
            TerminalKind::HorizonReached,
            format!("collapse window has {take} samples with s > {COLLAPSE_S_MIN}, need {COLLAPSE_MIN_WINDOW}"),
        );
    }
    let window = &tail[tail.len() - take..];
    let mean = window
        .iter()
        .map(|s| median3(s.metric.x, s.metric.y, s.metric.z) / s.metric.s)
        .sum::<f64>()
        / take as f64;
    let (c1, c2) = (1.0, 1.0 / (1.0 + p.nf()));
    let detail = format!("late mean of y/s = {mean} over {take} samples; S = {s_last:e}, s = {:e}", last.metric.s);
    if (mean - c1).abs() <= COLLAPSE_SNAP_TOL {
        (TerminalKind::BackwardCollapse { ratio_limit: c1 }, detail)
    } else if (mean - c2).abs() <= COLLAPSE_SNAP_TOL {
        (TerminalKind::BackwardCollapse { ratio_limit: c2 }, detail)
    } else {
        (TerminalKind::HorizonReached, format!("unsnapped: {detail}"))
    }
}

fn finish(traj: &mut Trajectory, kind: TerminalKind, detail: impl Into<String>) {
    traj.terminal = TerminalBehavior {
        kind,
        t_end: traj.last().t,
        detail: detail.into(),
    };
}

/// Integrates `flow` from `m0` until a terminal event.
pub fn integrate(
    flow: FlowKind,
    m0: &MetricParams,
    direction: Direction,
    p: &ModelParams,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    m0.validate()?;
    cfg.validate()?;
    let n = p.nf();
    let base_mult = p.base_multiplicity();
    let sign = direction.sign();
    let g0 = m0.to_array();
    let ties = Ties::detect(&g0);

    let mut traj = Trajectory {
        flow,
        direction,
        model: *p,
        samples: vec![Sample::new(0.0, *m0, p)],
        segments: Vec::new(),
        terminal: TerminalBehavior {
            kind: TerminalKind::HorizonReached,
            t_end: 0.0,
            detail: String::new(),
        },
    };

    let s0 = traj.samples[0].diagnostics.scalar;
    if s0 >= cfg.blowup_s {
        finish(&mut traj, TerminalKind::ForwardBlowup, "initial S above blow-up threshold");
        return Ok(traj);
    }
    if s0 <= cfg.backward_s_floor {
        finish(&mut traj, TerminalKind::BackwardSingularity, "initial S below floor");
        return Ok(traj);
    }
    if let Some(kind) = einstein_kind(m0, p, cfg) {
        finish(&mut traj, converged(kind), "initial metric is Einstein");
        return Ok(traj);
    }

    let rhs = move |u: &State| -> State {
        let g = exp4(u);
        let mut w = log_rates(flow, &g, n);
        for v in w.iter_mut() {
            *v *= sign;
        }
        ties.apply(&mut w, base_mult);
        w
    };
    let mut solver = Dopri5::new(rhs, cfg.rel_tol, cfg.abs_tol);

    let mut u = ln4(&g0);
    let mut k1 = solver.rhs(&u);
    let mut tau = 0.0_f64;
    let mut h = solver.initial_step(&u, &k1, cfg.t_horizon);
    let mut last_rejected = false;
    let mut steps = 0usize;
    let sps = cfg.samples_per_step;

    loop {
        if steps >= cfg.max_steps {
            let t = sign * tau;
            finish(&mut traj, TerminalKind::HorizonReached, "truncated: step limit");
            return Err(Error::MaxStepsExceeded {
                steps,
                t,
                trajectory: Box::new(traj),
            });
        }
        let remaining = cfg.t_horizon - tau;
        let clipped = h >= remaining;
        if clipped {
            h = remaining;
        }
        if (!clipped && h < cfg.min_step) || tau + h == tau {
            let len = traj.samples.len();
            let decreasing = len >= 2
                && traj.samples[len - 1].diagnostics.scalar < traj.samples[len - 2].diagnostics.scalar;
            if direction == Direction::Backward && decreasing {
                finish(
                    &mut traj,
                    TerminalKind::BackwardSingularity,
                    format!("step size {h:e} below minimum while S decreases"),
                );
                return Ok(traj);
            }
            let t = sign * tau;
            finish(&mut traj, TerminalKind::HorizonReached, "truncated: step size underflow");
            return Err(Error::StepUnderflow {
                t,
                trajectory: Box::new(traj),
            });
        }

        let res = solver.step(&u, &k1, h);
        steps += 1;
        if res.err > 1.0 {
            h = solver.next_step(h, res.err, last_rejected);
            last_rejected = true;
            continue;
        }
        let tau_new = if clipped { cfg.t_horizon } else { tau + h };
        let segment = Segment {
            t0: sign * tau,
            t1: sign * tau_new,
            dense: res.dense,
        };
        let g_new = exp4(&res.y_new);
        let s_new = scalar_raw(&g_new, n);

        let threshold = if s_new >= cfg.blowup_s {
            Some((cfg.blowup_s, TerminalKind::ForwardBlowup))
        } else if s_new <= cfg.backward_s_floor {
            Some((cfg.backward_s_floor, TerminalKind::BackwardSingularity))
        } else {
            None
        };
        if let Some((level, kind)) = threshold {
            let above = |theta: f64| {
                let s = scalar_raw(&exp4(&res.dense.eval(theta)), n);
                if level > 0.0 { s >= level } else { s <= level }
            };
            let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
            while (hi - lo) * h > 1e-12 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if above(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            if !above(hi) {
                hi = 1.0;
            }
            push_interior(&mut traj, &res.dense, tau, h, sign, sps, hi, p);
            let g_event = if hi == 1.0 { g_new } else { exp4(&res.dense.eval(hi)) };
            traj.samples.push(Sample::new(
                sign * (tau + hi * h),
                MetricParams::from_array(g_event),
                p,
            ));
            if cfg.dense_output {
                traj.segments.push(segment);
            }
            let detail = format!("S crossed {level:e} after {steps} steps");
            finish(&mut traj, kind, detail);
            return Ok(traj);
        }

        push_interior(&mut traj, &res.dense, tau, h, sign, sps, 1.0, p);
        traj.samples.push(Sample::new(sign * tau_new, MetricParams::from_array(g_new), p));
        if cfg.dense_output {
            traj.segments.push(segment);
        }

        let m_new = MetricParams::from_array(g_new);
        if let Some(kind) = einstein_kind(&m_new, p, cfg) {
            let d = fixed_point_distance(&m_new, kind, p);
            finish(
                &mut traj,
                converged(kind),
                format!("normalized distance {d:e} after {steps} steps"),
            );
            return Ok(traj);
        }
        if tau_new >= cfg.t_horizon {
            let (kind, detail) = match direction {
                Direction::Backward => backward_horizon_kind(&traj, p),
                Direction::Forward => (TerminalKind::HorizonReached, String::new()),
            };
            finish(&mut traj, kind, detail);
            return Ok(traj);
        }

        tau = tau_new;
        u = res.y_new;
        k1 = res.k_new;
        h = solver.next_step(h, res.err, last_rejected);
        last_rejected = false;
    }
}

fn converged(kind: FixedPointKind) -> TerminalKind {
    match kind {
        FixedPointKind::Round => TerminalKind::ConvergedRound,
        FixedPointKind::Jensen => TerminalKind::ConvergedJensen,
    }
}

#[allow(clippy::too_many_arguments)]
fn push_interior(
    traj: &mut Trajectory,
    dense: &Dense,
    tau: f64,
    h: f64,
    sign: f64,
    sps: usize,
    theta_max: f64,
    p: &ModelParams,
) {
    for k in 1..sps {
        let theta = k as f64 / sps as f64;
        if theta >= theta_max {
            break;
        }
        let g = exp4(&dense.eval(theta));
        traj.samples.push(Sample::new(sign * (tau + theta * h), MetricParams::from_array(g), p));
    }
}

/// Re-derives the terminal event from the final sample and checks it against
/// the recorded one.
pub fn detect_terminal(traj: &Trajectory, p: &ModelParams, cfg: &IntegratorConfig) -> Result<TerminalBehavior> {
    let last = traj
        .samples
        .last()
        .ok_or_else(|| Error::InconsistentTrajectory("empty trajectory".into()))?;
    if last.t != traj.terminal.t_end {
        return Err(Error::InconsistentTrajectory(format!(
            "recorded t_end {} differs from last sample time {}",
            traj.terminal.t_end, last.t
        )));
    }
    let s = last.diagnostics.scalar;
    let recorded = traj.terminal.kind;
    let (kind, detail) = if s >= cfg.blowup_s {
        (TerminalKind::ForwardBlowup, format!("final S = {s:e}"))
    } else if s <= cfg.backward_s_floor {
        (TerminalKind::BackwardSingularity, format!("final S = {s:e}"))
    } else if let Some(k) = einstein_kind(&last.metric, p, cfg) {
        (converged(k), format!("normalized distance {:e}", fixed_point_distance(&last.metric, k, p)))
    } else if last.t.abs() >= cfg.t_horizon {
        match traj.direction {
            Direction::Backward => backward_horizon_kind(traj, p),
            Direction::Forward => (TerminalKind::HorizonReached, String::new()),
        }
    } else if recorded == TerminalKind::BackwardSingularity && traj.direction == Direction::Backward {
        let len = traj.samples.len();
        let decreasing = len >= 2 && traj.samples[len - 2].diagnostics.scalar > s;
        if !decreasing {
            return Err(Error::InconsistentTrajectory(
                "backward singularity recorded but S is not decreasing at the end".into(),
            ));
        }
        (TerminalKind::BackwardSingularity, "step size underflow while S decreases".into())
    } else {
        return Err(Error::InconsistentTrajectory(format!(
            "no terminal event holds at t = {} (S = {s:e})",
            last.t
        )));
    };
    if kind != recorded {
        return Err(Error::InconsistentTrajectory(format!(
            "diagnostics give {kind}, trajectory records {recorded}"
        )));
    }
    Ok(TerminalBehavior {
        kind,
        t_end: last.t,
        detail,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Monotonicity {
    /// Both nondecreasing and nonincreasing within slack.
    Constant,
    Nondecreasing,
    Nonincreasing,
    Nonmonotone,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorSeries {
    pub quantity: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub verdict: Monotonicity,
}

impl MonitorSeries {
    pub fn nondecreasing(&self) -> bool {
        matches!(self.verdict, Monotonicity::Constant | Monotonicity::Nondecreasing)
    }

    pub fn nonincreasing(&self) -> bool {
        matches!(self.verdict, Monotonicity::Constant | Monotonicity::Nonincreasing)
    }
}

/// Slack per step, relative to `max(1, |v|)`.
pub const MONOTONE_SLACK: f64 = 1e-10;

pub fn monotonicity(values: &[f64]) -> Monotonicity {
    let mut up = true;
    let mut down = true;
    for w in values.windows(2) {
        let slack = MONOTONE_SLACK * w[0].abs().max(1.0);
        if w[1] < w[0] - slack {
            up = false;
        }
        if w[1] > w[0] + slack {
            down = false;
        }
    }
    match (up, down) {
        (true, true) => Monotonicity::Constant,
        (true, false) => Monotonicity::Nondecreasing,
        (false, true) => Monotonicity::Nonincreasing,
        (false, false) => Monotonicity::Nonmonotone,
    }
}

/// Series of a named diagnostic (`x/z`, `y/z`, `y/s`, `S`, `x*S`) with a
/// monotonicity verdict.
pub fn monitor_series(traj: &Trajectory, quantity: &str) -> Result<MonitorSeries> {
    let pick: fn(&Sample) -> f64 = match quantity {
        "x/z" | "x_over_z" => |s| s.diagnostics.x_over_z,
        "y/z" | "y_over_z" => |s| s.diagnostics.y_over_z,
        "y/s" | "y_over_s" => |s| s.diagnostics.y_over_s,
        "S" => |s| s.diagnostics.scalar,
        "x*S" | "xS" | "x_S" => |s| s.metric.x * s.diagnostics.scalar,
        other => return Err(Error::UnknownQuantity(other.to_string())),
    };
    if traj.samples.is_empty() {
        return Err(Error::Precondition("empty trajectory".into()));
    }
    let values: Vec<f64> = traj.samples.iter().map(pick).collect();
    Ok(MonitorSeries {
        quantity: quantity.to_string(),
        times: traj.times(),
        verdict: monotonicity(&values),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1() -> ModelParams {
        ModelParams::new(1).unwrap()
    }

    #[test]
    fn ties_detection() {
        assert_eq!(Ties::detect(&[1.0, 2.0, 2.0, 3.0]).group, [0, 1, 1, 3]);
        assert_eq!(Ties::detect(&[0.1, 1.0, 1.0, 1.0]).group, [0, 1, 1, 1]);
        assert_eq!(Ties::detect(&[0.1, 1.0, 2.0, 1.0]).group, [0, 1, 2, 3]);
        assert_eq!(Ties::detect(&[2.0, 2.0, 2.0, 5.0]).group, [0, 0, 0, 3]);
    }

    #[test]
    fn tie_average_uses_multiplicities() {
        let t = Ties::detect(&[0.1, 1.0, 1.0, 1.0]);
        let mut w = [5.0, 1.0, 2.0, 3.0];
        t.apply(&mut w, 4.0);
        assert_eq!(w, [5.0, 2.5, 2.5, 2.5]);
    }

    #[test]
    fn round_start_terminates_immediately() {
        let tr = integrate(
            FlowKind::Normalized,
            &MetricParams::round(),
            Direction::Forward,
            &p1(),
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert_eq!(tr.samples.len(), 1);
        assert_eq!(tr.terminal.kind, TerminalKind::ConvergedRound);
        assert_eq!(tr.terminal.t_end, 0.0);
    }

    #[test]
    fn config_validation() {
        let d = IntegratorConfig::default;
        assert!(IntegratorConfig { rel_tol: 0.0, ..d() }.validate().is_err());
        assert!(IntegratorConfig { backward_s_floor: 1.0, ..d() }.validate().is_err());
        assert!(IntegratorConfig { dense_output: false, samples_per_step: 3, ..d() }.validate().is_err());
    }

    #[test]
    fn monotonicity_verdicts() {
        assert_eq!(monotonicity(&[1.0, 1.0, 1.0]), Monotonicity::Constant);
        assert_eq!(monotonicity(&[1.0, 2.0, 2.0]), Monotonicity::Nondecreasing);
        assert_eq!(monotonicity(&[3.0, 2.0, 2.0]), Monotonicity::Nonincreasing);
        assert_eq!(monotonicity(&[1.0, 2.0, 1.0]), Monotonicity::Nonmonotone);
        assert_eq!(monotonicity(&[1.0, 1.0 - 1e-12]), Monotonicity::Constant);
    }

    #[test]
    fn median_of_three() {
        assert_eq!(median3(3.0, 1.0, 2.0), 2.0);
        assert_eq!(median3(0.1, 1.0, 1.0), 1.0);
    }
}
