//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use rsf::analysis::{
    ancient_form_metric, blowup_profile, rj_minus_rh, scalar_curvature_ancient_form, trace_separatrix,
    verify_ancient_numerically, ys_limit_candidates, NumericalAncient,
};
use rsf::flow::{fixed_points, linearization, normalized_field, reparametrize_to_normalized, slice_field};
use rsf::geometry::{
    l2_pairing, normalize_volume, ricci_eigenvalues, ricci_norm_sq, scalar_curvature, scalar_curvature_derivative,
    scalar_curvature_gradient, scalar_curvature_slice,
};
use rsf::integrator::{fixed_point_distance, integrate, monitor_series};
use rsf::io::{read_portrait_csv, read_portrait_json, read_trajectory_csv, read_trajectory_json, write_portrait,
    write_portrait_rows_csv, write_rows_csv, write_trajectory_json, Format};
use rsf::{
    Direction, FixedPointKind, FlowKind, IntegratorConfig, MetricParams, ModelParams, TangentVector, TerminalKind,
    Trajectory,
};

const SEED: u64 = 20_240_601;

struct Outcome {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: &'static str, title: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome { id, title, pass, detail }
}

fn model(n: u32) -> ModelParams {
    ModelParams::new(n).unwrap()
}

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    r.set_stream(stream);
    r
}

fn log_uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    r.random_range(lo.ln()..hi.ln()).exp()
}

fn random_metric(r: &mut ChaCha8Rng) -> MetricParams {
    let mut v = || log_uniform(r, 0.2, 5.0);
    MetricParams::new(v(), v(), v(), v()).unwrap()
}

/// Size of the Ricci endomorphism, used as the scale for relative checks.
fn magnitude(m: &MetricParams, p: &ModelParams) -> f64 {
    let r = ricci_eigenvalues(m, p).unwrap().to_array();
    r[0].abs() + r[1].abs() + r[2].abs() + p.base_multiplicity() * r[3].abs()
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(a.abs()).max(b.abs()).max(f64::MIN_POSITIVE)
}

fn run(flow: FlowKind, m: &MetricParams, dir: Direction, p: &ModelParams, cfg: &IntegratorConfig) -> Trajectory {
    integrate(flow, m, dir, p, cfg).unwrap_or_else(|e| panic!("integration from {m:?} failed: {e}"))
}

fn c1_fixed_points() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 1..=4 {
        let p = model(n);
        let c = (2.0 * n as f64 + 3.0).powf(-4.0 * n as f64 / (4.0 * n as f64 + 3.0));
        for v in [1.0, c] {
            let f = slice_field(v, v, v, &p).unwrap();
            worst = worst.max((f[0] * f[0] + f[1] * f[1] + f[2] * f[2]).sqrt());
        }
    }
    outcome("1", "fixed points of the slice field", worst <= 1e-12, format!("max |field| = {worst:e}"))
}

fn c2_linearization() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for n in 1..=4 {
        let p = model(n);
        for info in fixed_points(&p) {
            let (a, b) = (info.a, info.b);
            let mut expected = vec![a + 2.0 * b, a - b, a - b];
            if info.name == FixedPointKind::Round {
                expected = vec![-8.0 * (1.0 + n as f64); 3];
            }
            expected.sort_by(|u, v| v.partial_cmp(u).unwrap());
            let lin = linearization(info.slice_point, &p, None).unwrap();
            for ((re, im), want) in lin.eigenvalues.iter().zip(&expected) {
                worst = worst.max(rel(*re, *want, 0.0)).max(im.abs() / want.abs());
            }
        }
    }
    ok &= worst <= 1e-6;
    let p = model(1);
    let w = 5f64.powf(-10.0 / 7.0);
    let jensen = &fixed_points(&p)[1];
    let lit = rel(jensen.a + 2.0 * jensen.b, 80.0 * w, 0.0).max(rel(jensen.a - jensen.b, -208.0 * w, 0.0));
    ok &= lit <= 1e-12;
    outcome(
        "2",
        "linearization spectra at Round and Jensen",
        ok,
        format!("max rel deviation of FD spectrum {worst:e}; n=1 closed-form check {lit:e}"),
    )
}

fn c3_formula_consistency() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut r = rng(3);
    for n in 1..=3 {
        let p = model(n);
        for _ in 0..1000 {
            let m = random_metric(&mut r);
            let s = scalar_curvature(&m, &p).unwrap();
            let tr = ricci_eigenvalues(&m, &p).unwrap().trace(&p);
            worst = worst.max(rel(s, tr, magnitude(&m, &p)));
        }
        for _ in 0..1000 {
            let (x, y, z) = (log_uniform(&mut r, 0.2, 5.0), log_uniform(&mut r, 0.2, 5.0), log_uniform(&mut r, 0.2, 5.0));
            let m = MetricParams::from_slice(x, y, z, &p).unwrap();
            let s = scalar_curvature_slice(x, y, z, &p).unwrap();
            worst = worst.max(rel(s, scalar_curvature(&m, &p).unwrap(), magnitude(&m, &p)));
        }
        for _ in 0..1000 {
            let (y, s) = (log_uniform(&mut r, 0.3, 3.0), log_uniform(&mut r, 0.3, 3.0));
            let m = ancient_form_metric(y, s, &p).unwrap();
            let sa = scalar_curvature_ancient_form(y, s, &p).unwrap();
            worst = worst.max(rel(sa, scalar_curvature(&m, &p).unwrap(), magnitude(&m, &p)));
        }
    }
    outcome(
        "3",
        "closed-form S = trace of Ricci = slice form = ancient form",
        worst <= 1e-12,
        format!("max rel deviation {worst:e} over 9000 samples, n=1..3"),
    )
}

fn volume_preserving(r: &mut ChaCha8Rng, m: &MetricParams, p: &ModelParams) -> TangentVector {
    let hx = r.random_range(-1.0..1.0) * m.x;
    let hy = r.random_range(-1.0..1.0) * m.y;
    let hz = r.random_range(-1.0..1.0) * m.z;
    let hs = -m.s / p.base_multiplicity() * (hx / m.x + hy / m.y + hz / m.z);
    TangentVector::new(hx, hy, hz, hs)
}

fn fd_scalar(m: &MetricParams, h: &TangentVector, p: &ModelParams, eps: f64) -> f64 {
    let at = |e: f64| {
        let (g, v) = (m.to_array(), h.to_array());
        scalar_curvature(&MetricParams::from_array([g[0] + e * v[0], g[1] + e * v[1], g[2] + e * v[2], g[3] + e * v[3]]), p)
            .unwrap()
    };
    (at(eps) - at(-eps)) / (2.0 * eps)
}

fn c4a_pairing() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut r = rng(4);
    for n in 1..=3 {
        let p = model(n);
        for _ in 0..1000 {
            let m = random_metric(&mut r);
            let h = volume_preserving(&mut r, &m, &p);
            let grad = scalar_curvature_gradient(&m, &p).unwrap();
            let pairing = l2_pairing(&m, &h, &grad, &p).unwrap();
            let fd = fd_scalar(&m, &h, &p, 1e-5);
            worst = worst.max(rel(fd, pairing, 1e-3 * magnitude(&m, &p)));
        }
    }
    outcome(
        "4a",
        "dS(h) equals the pairing with -Ric0 for volume-preserving h",
        worst <= 1e-5,
        format!("max rel deviation {worst:e} over 3000 samples"),
    )
}

fn c4b_scalar_evolution() -> Outcome {
    let mut r = rng(44);
    let mut worst_lit: f64 = 0.0;
    let mut worst_two: f64 = 0.0;
    let mut worst_analytic: f64 = 0.0;
    let cfg = IntegratorConfig { t_horizon: 0.5, ..IntegratorConfig::default() };
    for n in 1..=3 {
        let p = model(n);
        for _ in 0..5 {
            let m = MetricParams::from_slice(
                log_uniform(&mut r, 0.5, 2.0),
                log_uniform(&mut r, 0.5, 2.0),
                log_uniform(&mut r, 0.5, 2.0),
                &p,
            )
            .unwrap();
            let traj = run(FlowKind::Normalized, &m, Direction::Forward, &p, &cfg);
            let t_end = traj.terminal.t_end;
            // Five-point stencil with a step tied to the local integrator step.
            for w in traj.samples.windows(3).step_by(3) {
                let smp = &w[1];
                let dt = 0.2 * (w[2].t - w[1].t).min(w[1].t - w[0].t);
                if smp.t - 2.0 * dt <= 0.0 || smp.t + 2.0 * dt >= t_end {
                    continue;
                }
                let sc_at = |t: f64| scalar_curvature(&traj.state_at(t).unwrap(), &p).unwrap();
                let fd = (8.0 * (sc_at(smp.t + dt) - sc_at(smp.t - dt)) - (sc_at(smp.t + 2.0 * dt) - sc_at(smp.t - 2.0 * dt)))
                    / (12.0 * dt);
                let g = smp.metric;
                let sc = scalar_curvature(&g, &p).unwrap();
                let base = ricci_norm_sq(&g, &p).unwrap() - sc * sc / p.dim() as f64;
                let analytic = scalar_curvature_derivative(&g, &normalized_field(&g, &p).unwrap(), &p).unwrap();
                let scale = 1e-3 * magnitude(&g, &p).powi(2);
                worst_lit = worst_lit.max(rel(fd, 4.0 * base, scale));
                worst_two = worst_two.max(rel(fd, 2.0 * base, scale));
                worst_analytic = worst_analytic.max(rel(fd, analytic, scale));
            }
        }
    }
    outcome(
        "4b",
        "dS/dt along the normalized flow equals 4(|Ric|^2 - S^2/N)",
        worst_lit <= 1e-5,
        format!(
            "max rel deviation {worst_lit:e} from 4(...); with coefficient 2 it is {worst_two:e}; \
             FD vs analytic dS(field) {worst_analytic:e}"
        ),
    )
}

fn c5_reparametrization() -> Outcome {
    let p = model(1);
    let mut r = rng(5);
    let ucfg = IntegratorConfig { rel_tol: 1e-12, abs_tol: 1e-14, einstein_tol: 0.0, samples_per_step: 4, ..IntegratorConfig::default() };
    let ncfg = IntegratorConfig { einstein_tol: 0.0, t_horizon: 1.0, ..IntegratorConfig::default() };
    let mut worst: f64 = 0.0;
    let mut covered = true;
    for _ in 0..5 {
        let m = MetricParams::from_slice(
            log_uniform(&mut r, 0.7, 1.4),
            log_uniform(&mut r, 0.7, 1.4),
            log_uniform(&mut r, 0.7, 1.4),
            &p,
        )
        .unwrap();
        let u = run(FlowKind::Unnormalized, &m, Direction::Forward, &p, &ucfg);
        let direct = run(FlowKind::Normalized, &m, Direction::Forward, &p, &ncfg);
        let (mapped, _) = reparametrize_to_normalized(&u, &p).unwrap();
        covered &= mapped.last().t >= 1.0;
        for smp in mapped.samples.iter().filter(|s| s.t <= 1.0) {
            let d = direct.state_at(smp.t).unwrap().to_array();
            let a = smp.metric.to_array();
            for k in 0..4 {
                worst = worst.max((a[k] - d[k]).abs());
            }
        }
    }
    outcome(
        "5",
        "reparametrized Ricci flow matches the normalized flow on [0,1]",
        worst <= 1e-6 && covered,
        format!("sup deviation {worst:e} over 5 starts, n=1; mapped runs reach t=1: {covered}"),
    )
}

fn c6_blowup() -> Outcome {
    let p = model(1);
    let cfg = IntegratorConfig::default();
    let m = MetricParams::from_slice(0.3, 0.3, 0.3, &p).unwrap();
    let traj = run(FlowKind::Normalized, &m, Direction::Forward, &p, &cfg);
    let prof = blowup_profile(&traj, &p).unwrap();
    let target = [2.0, 2.0, 2.0, 0.0];
    let ric_dev = (0..4).map(|i| (prof.rescaled_ricci[i] - target[i]).abs()).fold(0.0, f64::max);
    let first = (5.7..=6.3).contains(&prof.xs_limit) && ric_dev <= 0.05;

    let m = MetricParams::from_slice(0.2, 0.25, 0.3, &p).unwrap();
    let traj = run(FlowKind::Normalized, &m, Direction::Forward, &p, &cfg);
    let xz = monitor_series(&traj, "x/z").unwrap();
    let yz = monitor_series(&traj, "y/z").unwrap();
    let (fx, fy) = (*xz.values.last().unwrap(), *yz.values.last().unwrap());
    let second = traj.terminal.kind == TerminalKind::ForwardBlowup
        && xz.nondecreasing()
        && yz.nondecreasing()
        && fx >= 0.99
        && fy >= 0.99;
    outcome(
        "6",
        "blow-up profile",
        first && second,
        format!(
            "xS = {:.6}, rescaled Ricci dev {ric_dev:e}; (0.2,0.25,0.3): {}, x/z {:?} -> {fx:.6}, y/z {:?} -> {fy:.6}",
            prof.xs_limit, traj.terminal.kind, xz.verdict, yz.verdict
        ),
    )
}

fn c7_separatrix() -> Outcome {
    let cfg = IntegratorConfig::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [1u32, 2] {
        let p = model(n);
        let c = p.jensen_slice_value();
        let res = trace_separatrix([0.75 * c; 3], [1.1; 3], &p, &cfg, 1e-10).unwrap();
        let dev = res.point.iter().map(|v| (v - c).abs()).fold(0.0, f64::max);
        ok &= dev <= 1e-8;
        parts.push(format!("n={n}: c={c:.12}, |point-c| = {dev:e}"));
    }
    let p = model(1);
    let res = trace_separatrix([0.25, 0.3, 0.35], [1.0, 1.05, 1.1], &p, &cfg, 1e-10).unwrap();
    ok &= res.witness_ok && res.witness_distance <= 1e-3;
    parts.push(format!("off-axis Jensen distance {:e}", res.witness_distance));
    outcome("7", "separatrix bisection", ok, parts.join("; "))
}

fn c8_ancient_classification() -> Outcome {
    let p = model(1);
    let mut r = rng(8);
    let mut points = Vec::new();
    for k in 0..100 {
        let m = match k % 4 {
            0 | 1 => {
                let s = log_uniform(&mut r, 0.5, 5.0);
                let y = s * r.random_range(0.2..1.0);
                MetricParams::new(y * r.random_range(0.05..1.0), y, y, s).unwrap()
            }
            2 => random_metric(&mut r),
            _ => {
                let s = log_uniform(&mut r, 0.5, 5.0);
                let y = s * r.random_range(1.05..3.0);
                MetricParams::new(y * r.random_range(0.05..1.0), y, y, s).unwrap()
            }
        };
        points.push(m);
    }
    let cfg = IntegratorConfig::default();
    let reports: Vec<_> = points
        .par_iter()
        .map(|m| verify_ancient_numerically(m, &p, &cfg).unwrap())
        .collect();
    let mut inconclusive = 0;
    let mut disagree = Vec::new();
    for (m, rep) in points.iter().zip(&reports) {
        if !rep.conclusive() {
            inconclusive += 1;
            continue;
        }
        let kind = rep.backward_terminal.kind;
        let good = if rep.classifier.ancient {
            rep.numerical == NumericalAncient::Ancient
                && rep.s_positive_throughout
                && matches!(kind, TerminalKind::BackwardCollapse { .. } | TerminalKind::ConvergedJensen)
        } else {
            kind == TerminalKind::BackwardSingularity && rep.min_scalar < 0.0
        };
        if !good {
            disagree.push(format!("{m:?} -> {kind}"));
        }
    }
    let ancient = reports.iter().filter(|r| r.classifier.ancient).count();
    outcome(
        "8",
        "ancient classifier agrees with backward integration",
        disagree.is_empty() && inconclusive <= 5,
        format!(
            "100 points ({ancient} ancient), {} disagreements, {inconclusive} inconclusive{}",
            disagree.len(),
            disagree.first().map(|d| format!("; first: {d}")).unwrap_or_default()
        ),
    )
}

fn c9_backward_limits() -> Outcome {
    let cfg = IntegratorConfig::default();
    let p = model(1);
    let traj = run(FlowKind::Normalized, &MetricParams::new(0.1, 1.0, 1.0, 3.0).unwrap(), Direction::Backward, &p, &cfg);
    let far: Vec<f64> = traj.samples.iter().filter(|s| s.metric.s > 1e3).map(|s| s.diagnostics.y_over_s).collect();
    let collapse_dev = far.iter().map(|v| (v - 0.5).abs()).fold(0.0, f64::max);
    let mut ok = !far.is_empty() && collapse_dev <= 1e-3;

    let mut berger: f64 = 0.0;
    for n in 1..=3 {
        let p = model(n);
        for m in [(0.2, 1.0), (0.5, 2.0), (1.0, 0.7), (3.0, 1.0)] {
            let start = MetricParams::new(m.0, m.1, m.1, m.1).unwrap();
            for dir in [Direction::Forward, Direction::Backward] {
                for s in &run(FlowKind::Normalized, &start, dir, &p, &cfg).samples {
                    berger = berger.max((s.diagnostics.y_over_s - 1.0).abs());
                }
            }
        }
    }
    ok &= berger <= 1e-8;

    let mut jensen: f64 = 0.0;
    for n in 1..=3 {
        let p = model(n);
        for s in [1.5, 3.0, 8.0, 40.0] {
            let m = normalize_volume(&MetricParams::new(1.0, 1.0, 1.0, s).unwrap(), &p).unwrap();
            let traj = run(FlowKind::Normalized, &m, Direction::Backward, &p, &cfg);
            let d = fixed_point_distance(&traj.last().metric, FixedPointKind::Jensen, &p);
            jensen = jensen.max(if traj.terminal.kind == TerminalKind::ConvergedJensen { d } else { f64::INFINITY });
        }
    }
    ok &= jensen <= 1e-6;

    let exact = (1..=4).all(|n| ys_limit_candidates(&model(n)) == (1.0, 1.0 / (1.0 + n as f64)));
    ok &= exact;
    outcome(
        "9",
        "backward limits",
        ok,
        format!(
            "{} samples with s>1e3, max |y/s-1/2| {collapse_dev:e}; Berger max |y/s-1| {berger:e}; \
             Jensen-line distance {jensen:e}; exact roots {exact}",
            far.len()
        ),
    )
}

fn c10_rj_minus_rh() -> Outcome {
    let p = model(1);
    let v = rj_minus_rh(2.0, 1.0, &p).unwrap();
    let ric = ricci_eigenvalues(&ancient_form_metric(2.0, 1.0, &p).unwrap(), &p).unwrap();
    let mut ok = (v - 6.375).abs() <= 1e-12
        && (ric.r_j - 9.875).abs() <= 1e-12
        && (ric.r_h - 3.5).abs() <= 1e-12
        && (v - (ric.r_j - ric.r_h)).abs() <= 1e-12;
    let mut r = rng(10);
    let mut worst: f64 = 0.0;
    let mut sign_ok = true;
    for n in 1..=3 {
        let p = model(n);
        for _ in 0..1000 {
            let (y, s) = (log_uniform(&mut r, 0.3, 3.0), log_uniform(&mut r, 0.3, 3.0));
            let m = ancient_form_metric(y, s, &p).unwrap();
            let ric = ricci_eigenvalues(&m, &p).unwrap();
            let f = rj_minus_rh(y, s, &p).unwrap();
            worst = worst.max(rel(f, ric.r_j - ric.r_h, magnitude(&m, &p)));
            sign_ok &= y <= s || f > 0.0;
            sign_ok &= rj_minus_rh(y, y, &p).unwrap() == 0.0;
        }
    }
    ok &= worst <= 1e-12 && sign_ok;
    outcome(
        "10",
        "factored r_j - r_h",
        ok,
        format!("value at (2,1) = {v}; max rel deviation on 3000 samples {worst:e}; signs ok {sign_ok}"),
    )
}

fn c11_invariant_sets() -> Outcome {
    let cfg = IntegratorConfig::default();
    let mut yz: f64 = 0.0;
    let mut xyz: f64 = 0.0;
    let mut yzs: f64 = 0.0;
    for n in 1..=3 {
        let p = model(n);
        let starts = [
            MetricParams::from_slice(0.5, 0.9, 0.9, &p).unwrap(),
            MetricParams::from_slice(1.6, 0.8, 0.8, &p).unwrap(),
            MetricParams::from_slice(0.3, 0.3, 0.3, &p).unwrap(),
            MetricParams::from_slice(0.6, 0.6, 0.6, &p).unwrap(),
            MetricParams::new(0.4, 1.3, 1.3, 1.3).unwrap(),
            MetricParams::new(2.0, 1.0, 1.0, 1.0).unwrap(),
        ];
        for m in &starts {
            for flow in [FlowKind::Normalized, FlowKind::Unnormalized] {
                for dir in [Direction::Forward, Direction::Backward] {
                    let traj = match integrate(flow, m, dir, &p, &cfg) {
                        Ok(t) => t,
                        Err(rsf::Error::StepUnderflow { trajectory, .. }) => *trajectory,
                        Err(e) => panic!("{m:?}: {e}"),
                    };
                    for s in &traj.samples {
                        let g = s.metric;
                        yz = yz.max((g.y - g.z).abs() / g.z);
                        if m.x == m.y {
                            xyz = xyz.max((g.x - g.y).abs() / g.y);
                        }
                        if m.y == m.s {
                            yzs = yzs.max((g.y - g.s).abs() / g.s);
                        }
                    }
                }
            }
        }
    }
    outcome(
        "11",
        "invariant sets are preserved",
        yz.max(xyz).max(yzs) <= 1e-8,
        format!("max rel drift y=z {yz:e}, x=y=z {xyz:e}, y=z=s {yzs:e}"),
    )
}

fn rsf_cmd(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rsf")).args(args).output().expect("spawn rsf")
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap()
}

fn c12_cli() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name);
    let mut problems = Vec::new();

    for n in ["1", "2", "3"] {
        let out = rsf_cmd(&["verify", "--n", n]);
        if out.status.code() != Some(0) {
            problems.push(format!("verify --n {n} exited {:?}", out.status.code()));
        }
    }

    let flow_csv = path("flow.csv");
    let flow_json = path("flow.json");
    for (file, fmt) in [(&flow_csv, "csv"), (&flow_json, "json")] {
        let out = rsf_cmd(&["flow", "0.1,1,1,3", "--backward", "--format", fmt, "--out", file.to_str().unwrap()]);
        if !out.status.success() {
            problems.push(format!("flow --format {fmt} failed"));
        }
    }
    let bytes = read(&flow_csv);
    let mut again = Vec::new();
    write_rows_csv(&read_trajectory_csv(bytes.as_slice()).unwrap(), &mut again).unwrap();
    if again != bytes {
        problems.push("flow csv does not round-trip".into());
    }
    let bytes = read(&flow_json);
    let mut again = Vec::new();
    write_trajectory_json(&read_trajectory_json(bytes.as_slice()).unwrap(), &mut again).unwrap();
    if again != bytes {
        problems.push("flow json does not round-trip".into());
    }

    let por_csv = path("portrait.csv");
    let por_json = path("portrait.json");
    for (file, fmt) in [(&por_csv, "csv"), (&por_json, "json")] {
        let out = rsf_cmd(&[
            "portrait", "--axis", "s:0.5:5:4:log", "--axis", "ys:0.4:1.6:4", "--format", fmt, "--out",
            file.to_str().unwrap(),
        ]);
        if !out.status.success() {
            problems.push(format!("portrait --format {fmt} failed"));
        }
    }
    let bytes = read(&por_csv);
    let (names, rows) = read_portrait_csv(bytes.as_slice()).unwrap();
    let mut again = Vec::new();
    write_portrait_rows_csv(&names, &rows, &mut again).unwrap();
    if again != bytes {
        problems.push("portrait csv does not round-trip".into());
    }
    let bytes = read(&por_json);
    let table = read_portrait_json(bytes.as_slice()).unwrap();
    let mut again = Vec::new();
    write_portrait(&table.grid, &table.rows, Format::Json, &mut again).unwrap();
    if again != bytes {
        problems.push("portrait json does not round-trip".into());
    }

    let a = rsf_cmd(&["verify", "--seed", "7"]);
    let b = rsf_cmd(&["verify", "--seed", "7"]);
    if a.stdout != b.stdout || a.stdout.is_empty() {
        problems.push("seeded verify output differs between runs".into());
    }
    let a = rsf_cmd(&["portrait", "--axis", "x:0.2:1.5:4", "--axis", "y:0.2:1.5:4", "--format", "json"]);
    let b = std::process::Command::new(env!("CARGO_BIN_EXE_rsf"))
        .args(["portrait", "--axis", "x:0.2:1.5:4", "--axis", "y:0.2:1.5:4", "--format", "json"])
        .env("RSF_THREADS", "1")
        .output()
        .unwrap();
    if a.stdout != b.stdout {
        problems.push("portrait output depends on the thread count".into());
    }

    outcome(
        "12",
        "CLI contract",
        problems.is_empty(),
        if problems.is_empty() {
            "verify n=1..3 exit 0; flow and portrait csv/json round-trip byte for byte; reruns identical".into()
        } else {
            problems.join("; ")
        },
    )
}

fn main() {
    let criteria: Vec<fn() -> Outcome> = vec![
        c1_fixed_points,
        c2_linearization,
        c3_formula_consistency,
        c4a_pairing,
        c4b_scalar_evolution,
        c5_reparametrization,
        c6_blowup,
        c7_separatrix,
        c8_ancient_classification,
        c9_backward_limits,
        c10_rj_minus_rh,
        c11_invariant_sets,
        c12_cli,
    ];
    let start = Instant::now();
    let mut failed = Vec::new();
    for criterion in criteria {
        let t = Instant::now();
        let o = criterion();
        println!(
            "{} {:>3}  {} ({:.2}s): {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.id,
            o.title,
            t.elapsed().as_secs_f64(),
            o.detail
        );
        if !o.pass {
            failed.push(o.id);
        }
    }
    println!(
        "acceptance: {} of 13 passed in {:.1}s{}",
        13 - failed.len(),
        start.elapsed().as_secs_f64(),
        if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(", ")) }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
