//! Seeded invariant suites behind `rsf verify`.
//!
//! Every suite draws from its own ChaCha8 stream, so a report depends only
//! on `(n, seed)` and reruns are byte-identical.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    ancient_form_metric, blowup_profile, rj_minus_rh, scalar_curvature_ancient_form,
    trace_separatrix, ys_limit_candidates,
};
use crate::flow::{
    fixed_points, linearization, normalized_field, reparametrize_to_normalized, slice_field,
    FlowKind,
};
use crate::geometry::{
    canonicalize, l2_pairing, normalize_volume, relative_volume, ricci_eigenvalues,
    ricci_norm_sq, scalar_curvature, scalar_curvature_derivative, scalar_curvature_gradient,
    scalar_curvature_slice, traceless_ricci_norm_sq, MetricParams, ModelParams, Permutation,
    TangentVector,
};
use crate::integrator::{
    detect_terminal, integrate, monitor_series, Direction, IntegratorConfig, TerminalKind,
    Trajectory,
};
use crate::io::{read_trajectory_csv, read_trajectory_json, write_rows_csv, write_trajectory_csv, write_trajectory_json};

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: String,
    pub checked: usize,
    pub failed: usize,
    pub first_failure: Option<String>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failed == 0 && self.checked > 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub n: u32,
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
    pub notes: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }

    pub fn render(&self) -> String {
        let mut out = format!("rsf verify: n = {}, seed = {}\n", self.n, self.seed);
        for s in &self.suites {
            let tag = if s.passed() { "PASS" } else { "FAIL" };
            out.push_str(&format!(
                "{tag}  {:<44} {}/{}\n",
                s.name,
                s.checked - s.failed,
                s.checked
            ));
            if let Some(f) = &s.first_failure {
                out.push_str(&format!("      first failure: {f}\n"));
            }
        }
        for note in &self.notes {
            out.push_str(&format!("note: {note}\n"));
        }
        let failed = self.suites.iter().filter(|s| !s.passed()).count();
        out.push_str(&format!("{} suites, {} failed\n", self.suites.len(), failed));
        out
    }
}

struct Suite {
    result: SuiteResult,
}

impl Suite {
    fn new(name: &str) -> Self {
        Suite {
            result: SuiteResult {
                name: name.to_string(),
                checked: 0,
                failed: 0,
                first_failure: None,
            },
        }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.result.checked += 1;
        if !ok {
            self.result.failed += 1;
            if self.result.first_failure.is_none() {
                self.result.first_failure = Some(msg());
            }
        }
    }

    fn fail(&mut self, msg: String) {
        self.check(false, || msg);
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(id);
    r
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln()).exp()
}

fn random_metric(rng: &mut ChaCha8Rng) -> MetricParams {
    MetricParams {
        x: log_uniform(rng, 0.2, 5.0),
        y: log_uniform(rng, 0.2, 5.0),
        z: log_uniform(rng, 0.2, 5.0),
        s: log_uniform(rng, 0.2, 5.0),
    }
}

fn magnitude(r: &[f64; 4], p: &ModelParams) -> f64 {
    r[0].abs() + r[1].abs() + r[2].abs() + p.base_multiplicity() * r[3].abs()
}

fn close(a: f64, b: f64, rel: f64, scale: f64) -> bool {
    (a - b).abs() <= rel * scale.max(a.abs()).max(b.abs())
}

/// Runs every suite for the model `p`.
pub fn run_verify(p: &ModelParams, seed: u64) -> VerifyReport {
    let suites = vec![
        trace_identity(p, seed),
        scaling_covariance(p, seed),
        permutation_equivariance(p, seed),
        slice_consistency(p, seed),
        gradient_pairing(p, seed),
        einstein_detector(p, seed),
        pairing_bilinear(p, seed),
        volume_normalization(p, seed),
        canonical_form(p, seed),
        tangency(p, seed),
        fixed_point_residual(),
        invariant_sets_field(p, seed),
        field_is_twice_gradient(p, seed),
        scalar_evolution(p, seed),
        linearization_spectrum(p),
        ancient_form_formulas(p, seed),
        ratio_candidates(p),
        integrator_invariants(p, seed),
        ratio_monotonicity(p, seed),
        isometry_equivariance(p, seed),
        invariant_sets_flow(p),
        step_halving(p, seed),
        terminal_kinds(p),
        backward_ratio_monotone(p),
        reparametrization(p, seed),
        separatrix_on_axis(p),
        blowup(p),
        serialization_round_trip(p),
    ];
    VerifyReport {
        n: p.n(),
        seed,
        suites,
        notes: vec![
            "z' = -2z(r_k - S/N); a variant using r_j in the z-equation breaks volume preservation and is not used"
                .into(),
            "along the normalized flow dS/dt = 2(|Ric|^2 - S^2/N) = 2|Ric^0|^2".into(),
        ],
    }
}

fn trace_identity(p: &ModelParams, seed: u64) -> SuiteResult {
    let mut s = Suite::new("trace identity S = tr Ric");
    let mut rng = stream(seed, 1);
    for _ in 0..1000 {
        let m = random_metric(&mut rng);
        let r = ricci_eigenvalues(&m, p).unwrap();
        let sc = scalar_curvature(&m, p).unwrap();
        let tr = r.trace(p);
        s.check(close(sc, tr, 1e-12, magnitude(&r.to_array(), p)), || format!("{m:?}: {sc} vs {tr}"));
    }
    s.result
}

fn scaling_covariance(p: &ModelParams, seed: u64) -> SuiteResult {
    let mut s = Suite::new("scaling covariance Ric(lg) = Ric(g)/l");
    let mut rng = stream(seed, 2);
    for _ in 0..300 {
        let m = random_metric(&mut rng);
        let r = ricci_eigenvalues(&m, p).unwrap().to_array();
        let sc = scalar_curvature(&m, p).unwrap();
        let mag = magnitude(&r, p);
        for lambda in [0.1, 2.0, 10.0] {
            let rl = ricci_eigenvalues(&m.scaled(lambda), p).unwrap().to_array();
            let sl = scalar_curvature(&m.scaled(lambda), p).unwrap();
            let ok = (0..4).all(|k| close(rl[k] * lambda, r[k], 1e-12, mag))
                && close(sl * lambda, sc, 1e-12, mag);
            s.check(ok, || format!("{m:?} lambda {lambda}"));
        }
    }
    s.result
}

fn permutation_equivariance(p: &ModelParams, seed: u64) -> SuiteResult {
    let mut s = Suite::new("permutation equivariance (bitwise)");
    let mut rng = stream(seed, 3);
    for _ in 0..300 {
        let m = random_metric(&mut rng);
        let r = ricci_eigenvalues(&m, p).unwrap();
        let sc = scalar_curvature(&m, p).unwrap();
        for perm in Permutation::all() {
            let pm = perm.apply_metric(&m);
            let rp = ricci_eigenvalues(&pm, p).unwrap();
            let expect = perm.apply([r.r_i, r.r_j, r.r_k]);
            let ok = [rp.r_i, rp.r_j, rp.r_k] == expect
                && rp.r_h == r.r_h
                && scalar_curvature(&pm, p).unwrap() == sc;
            s.check(ok, || format!("{m:?} under {perm:?}"));
        }
    }
    s.result
}

fn slice_consistency(p: &ModelParams, seed: u64) -> SuiteResult {
    let mut s = Suite::new("slice scalar curvature = S at volume one");
    let mut rng = stream(seed, 4);
    for _ in 0..1000 {
        let (x, y, z) = (
            log_uniform(&mut rng, 0.2, 5.0),
            log_uniform(&mut rng, 0.2, 5.0),
            log_uniform(&mut rng, 0.2, 5.0),
        );
        let m = MetricParams::from_slice(x, y, z, p).unwrap();
        let a = scalar_curvature_slice(x, y, z, p).unwrap();
        let b = scalar_curvature(&m, p).unwrap();
        let mag = magnitude(&ricci_eigenvalues(&m, p).unwrap().to_array(), p);
        s.check(close(a, b, 1e-12, mag), || format!("({x}, {y}, {z}): {a} vs {b}"));
    }
    s.result
}

/// Random tangent vector with `|h_a / g_a| <= 1`, projected to preserve volume.
fn volume_preserving(rng: &mut ChaCha8Rng, m: &MetricParams, p: &ModelParams) -> TangentVector {
    let hx = rng.random_range(-1.0..1.0) * m.x;
    let hy = rng.random_range(-1.0..1.0) * m.y;
    let hz = rng.random_range(-1.0..1.0) * m.z;
    let hs = -m.s / p.base_multiplicity() * (hx / m.x + hy / m.y + hz / m.z);
    TangentVector::new(hx, hy, hz, hs)
}

fn fd_directional(m: &MetricParams, h: &TangentVector, p: &ModelParams, eps: f64) -> f64 {
    let g = m.to_array();
    let hv = h.to_array();
    let shift = |e: f64| {
        MetricParams::from_array([
            g[0] + e * hv[0],
            g[1] + e * hv[1],
            g[2] + e * hv[2],
            g[3] + e * hv[3],
        ])
    };
    (scalar_curvature(&shift(eps), p).unwrap() - scalar_curvature(&shift(-eps), p).unwrap()) / (2.0 * eps)
}

fn gradient_pairing(p: &ModelParams, seed: u64) -> SuiteResult {
    let mut s = Suite::new("dS(h) = <h, -Ric^0> for volume-preserving h");
    let mut rng = stream(seed, 5);
    for _ in 0..300 {
        let m = random_metric(&mut rng);
        let h = volume_preserving(&mut rng, &m, p);
        let grad = scalar_curvature_gradient(&m, p).unwrap();
        let pairing = l2_pairing(&m, &h, &grad, p).unwrap();
        let fd = fd_directional(&m, &h, p, 1e-5);
        let mag = magnitude(&ricci_eigenvalues(&m, p).unwrap().to_array(), p);
        s.check(close(fd, pairing, 1e-5, 1e-3 * mag), || format!("{m:?}: fd {fd} vs pairing {pairing}"));
    }
    s.result
}

fn einstein_detector(p: &ModelParams, seed: u64) -> SuiteResult {
    let mut s = Suite::new("|Ric^0|^2 = 0 exactly at Einstein scalings");
    let mut rng = stream(seed, 6);
    let q = 2.0 * p.nf() + 3.0;
    for _ in 0..100_000 {
        let lambda = log_uniform(&mut rng, 0.1, 10.0);
        let pick: u32 = rng.random_range(0..100);
        let (ratio, einstein) = match pick {
            0 => (1.0, true),
            1 => (q, true),
            _ => (log_uniform(&mut rng, 0.1, 20.0), false),
        };
        let m = MetricParams {
            x: lambda,
            y: lambda,
            z: lambda,
            s: lambda * ratio,
        };
        let v = traceless_ricci_norm_sq(&normalize_volume(&m, p).unwrap(), p).unwrap();
        s.check((v <= 1e-20) == einstein, || format!("{m:?}: |Ric0|^2 = {v:e}"));
    }
    s.result
}

fn pairing_bilinear(p: &ModelParams, seed: u64) -> SuiteResult {
    let mut s = Suite::new("L2 pairing symmetric and bilinear");
    let mut rng = stream(seed, 7);
    let vec4 = |rng: &mut ChaCha8Rng| {
        TangentVector::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        )
    };
    for _ in 0..300 {
        let m = random_metric(&mut rng);
        let (a, b, c) = (vec4(&mut rng), vec4(&mut rng), vec4(&mut rng));
        let k: f64 = rng.random_range(-3.0..3.0);
        let ab = l2_pairing(&m, &a, &b, p).unwrap();
        let ba = l2_pairing(&m, &b, &a, p).unwrap();
        let lin = TangentVector::from_array({
            let (av, bv) = (a.to_array(), b.to_array());
            [av[0] * k + bv[0], av[1] * k + bv[1], av[2] * k + bv[2], av[3] * k + bv[3]]
        });
        let lhs = l2_pairing(&m, &lin, &c, p).unwrap();
        let rhs = k * l2_pairing(&m, &a, &c, p).unwrap() + l2_pairing(&m, &b, &c, p).unwrap();
        let scale = 100.0;
        s.check(ab == ba && close(lhs, rhs, 1e-12, scale), || format!("{m:?}"));
    }
    s.result
}

fn volume_normalization(p: &ModelParams, seed: u64) -> SuiteResult {
    let mut s = Suite::new("volume normalization");
    let mut rng = stream(seed, 8);
    for _ in 0..300 {
        let m = random_metric(&mut rng);
        let u = normalize_volume(&m, p).unwrap();
        let vol = relative_volume(&u, p).unwrap();
        let lambda = u.s / m.s;
        let same_ratios = [u.x / m.x, u.y / m.y, u.z / m.z]
            .iter()
            .all(|v| close(*v, lambda, 1e-14, 1.0));
        s.check((vol - 1.0).abs() <= 1e-14 && same_ratios, || format!("{m:?}: vol {vol}"));
    }
    s.result
}

fn canonical_form(p: &ModelParams, seed: u64) -> SuiteResult {
    let mut s = Suite::new("canonical form and Ricci commute");
    let mut rng = stream(seed, 9);
    for _ in 0..300 {
        let m = random_metric(&mut rng);
        let c = canonicalize(&m);
        let sorted = c.metric.x <= c.metric.y && c.metric.y <= c.metric.z;
        let r = ricci_eigenvalues(&m, p).unwrap();
        let rc = ricci_eigenvalues(&c.metric, p).unwrap();
        let commutes = c.permutation.apply([r.r_i, r.r_j, r.r_k]) == [rc.r_i, rc.r_j, rc.r_k];
        s.check(sorted && c.original() == m && commutes, || format!("{m:?}"));
    }
    s.result
}

fn tangency(p: &ModelParams, seed: u64) -> SuiteResult {
    let mut s = Suite::new("normalized field preserves volume");
    let mut rng = stream(seed, 10);
    for _ in 0..1000 {
        let m = random_metric(&mut rng);
        let h = normalized_field(&m, p).unwrap();
        s.check(h.is_volume_preserving(&m, p, 1e-12), || {
            format!("{m:?}: variation {:e}", h.volume_variation(&m, p))
        });
    }
    s.result
}

fn fixed_point_residual() -> SuiteResult {
    let mut s = Suite::new("fixed-point residual, n = 1..4");
    for k in 1..=4 {
        let p = ModelParams::new(k).unwrap();
        for fp in fixed_points(&p) {
            let [x, y, z] = fp.slice_point;
            let v = slice_field(x, y, z, &p).unwrap();
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            s.check(norm <= 1e-12, || format!("n = {k}, {:?}: {norm:e}", fp.name));
        }
    }
    s.result
}

fn invariant_sets_field(p: &ModelParams, seed: u64) -> SuiteResult {
    let mut s = Suite::new("invariant subsets of the field");
    let mut rng = stream(seed, 11);
    for _ in 0..200 {
        let m = random_metric(&mut rng);
        let sets: [(MetricParams, &[(usize, usize)]); 5] = [
            (MetricParams { y: m.x, ..m }, &[(0, 1)]),
            (MetricParams { z: m.y, ..m }, &[(1, 2)]),
            (MetricParams { z: m.x, ..m }, &[(0, 2)]),
            (MetricParams { y: m.x, z: m.x, ..m }, &[(0, 1), (1, 2)]),
            (MetricParams { z: m.y, s: m.y, ..m }, &[(1, 2), (2, 3)]),
        ];
        for (q, pairs) in sets {
            for flow in [FlowKind::Normalized, FlowKind::Unnormalized] {
                let h = crate::flow::flow_field(flow, &q, p).unwrap().to_array();
                let scale = h.iter().map(|v| v.abs()).fold(0.0, f64::max);
                let ok = pairs.iter().all(|&(a, b)| (h[a] - h[b]).abs() <= 1e-12 * scale);
                s.check(ok, || format!("{q:?} {flow}: {h:?}"));
            }
        }
    }
    s.result
}

fn field_is_twice_gradient(p: &ModelParams, seed: u64) -> SuiteResult {
    let mut s = Suite::new("normalized field = 2 grad S");
    let mut rng = stream(seed, 12);
    for _ in 0..1000 {
        let m = random_metric(&mut rng);
        let f = normalized_field(&m, p).unwrap().to_array();
        let g = scalar_curvature_gradient(&m, p).unwrap().to_array();
        let scale = f.iter().map(|v| v.abs()).fold(0.0, f64::max);
        s.check((0..4).all(|k| close(f[k], 2.0 * g[k], 1e-10, 1e-6 * scale)), || format!("{m:?}"));
    }
    s.result
}

fn scalar_evolution(p: &ModelParams, seed: u64) -> SuiteResult {
    let mut s = Suite::new("dS/dt = 2(|Ric|^2 - S^2/N) along the field");
    let mut rng = stream(seed, 13);
    for _ in 0..1000 {
        let m = random_metric(&mut rng);
        let h = normalized_field(&m, p).unwrap();
        let ds = scalar_curvature_derivative(&m, &h, p).unwrap();
        let sc = scalar_curvature(&m, p).unwrap();
        let rn = ricci_norm_sq(&m, p).unwrap();
        let rhs = 2.0 * (rn - sc * sc / p.dim_f());
        s.check(close(ds, rhs, 1e-10, rn), || format!("{m:?}: {ds} vs {rhs}"));
    }
    s.result
}

fn linearization_spectrum(p: &ModelParams) -> SuiteResult {
    let mut s = Suite::new("Jacobian spectrum at the fixed points");
    for fp in fixed_points(p) {
        let lin = match linearization(fp.slice_point, p, None) {
            Ok(l) => l,
            Err(e) => {
                s.fail(e.to_string());
                continue;
            }
        };
        let mut expect = vec![fp.a + 2.0 * fp.b, fp.a - fp.b, fp.a - fp.b];
        expect.sort_by(|a, b| b.total_cmp(a));
        for (&(re, im), e) in lin.eigenvalues.iter().zip(&expect) {
            s.check(close(re, *e, 1e-6, 0.0) && im.abs() <= 1e-6 * e.abs(), || {
                format!("{:?}: {re}+{im}i vs {e}", fp.name)
            });
        }
    }
    s.result
}

fn ancient_form_formulas(p: &ModelParams, seed: u64) -> SuiteResult {
    let mut s = Suite::new("ancient-form S and r_j - r_h");
    let mut rng = stream(seed, 14);
    for _ in 0..1000 {
        let y = log_uniform(&mut rng, 0.3, 3.0);
        let sv = log_uniform(&mut rng, 0.3, 3.0);
        let m = ancient_form_metric(y, sv, p).unwrap();
        let r = ricci_eigenvalues(&m, p).unwrap();
        let mag = magnitude(&r.to_array(), p);
        let direct = scalar_curvature(&m, p).unwrap();
        let form = scalar_curvature_ancient_form(y, sv, p).unwrap();
        let diff = rj_minus_rh(y, sv, p).unwrap();
        let sign_ok = y <= sv || diff > 0.0;
        s.check(
            close(direct, form, 1e-12, mag) && close(diff, r.r_j - r.r_h, 1e-10, r.r_j.abs() + r.r_h.abs()) && sign_ok,
            || format!("y = {y}, s = {sv}: S {direct} vs {form}, diff {diff} vs {}", r.r_j - r.r_h),
        );
    }
    let at_equal = rj_minus_rh(1.3, 1.3, p).unwrap();
    s.check(at_equal == 0.0, || format!("y = s gives {at_equal}"));
    s.result
}

fn ratio_candidates(p: &ModelParams) -> SuiteResult {
    let mut s = Suite::new("backward y/s limit candidates");
    let n = p.nf();
    let (c1, c2) = ys_limit_candidates(p);
    s.check(c1 == 1.0 && c2 == 1.0 / (1.0 + n), || format!("({c1}, {c2})"));
    for c in [c1, c2] {
        let rhs = (4.0 + 4.0 * n * c * c) / (8.0 + 4.0 * n - 4.0 * c);
        s.check((rhs - c).abs() <= 1e-14, || format!("C = {c}: {rhs}"));
    }
    s.result
}

fn run(flow: FlowKind, m: &MetricParams, dir: Direction, p: &ModelParams, cfg: &IntegratorConfig, s: &mut Suite) -> Option<Trajectory> {
    match integrate(flow, m, dir, p, cfg) {
        Ok(t) => Some(t),
        Err(e) => {
            s.fail(format!("{m:?} {dir:?}: {e}"));
            None
        }
    }
}

fn random_slice(rng: &mut ChaCha8Rng, p: &ModelParams, lo: f64, hi: f64) -> MetricParams {
    MetricParams::from_slice(
        log_uniform(rng, lo, hi),
        log_uniform(rng, lo, hi),
        log_uniform(rng, lo, hi),
        p,
    )
    .unwrap()
}

fn integrator_invariants(p: &ModelParams, seed: u64) -> SuiteResult {
    let mut s = Suite::new("positivity, volume, S monotone (forward)");
    let mut rng = stream(seed, 15);
    let cfg = IntegratorConfig::default();
    for _ in 0..8 {
        let m = random_slice(&mut rng, p, 0.2, 2.0);
        let Some(tr) = run(FlowKind::Normalized, &m, Direction::Forward, p, &cfg, &mut s) else { continue };
        let v0 = tr.samples[0].diagnostics.volume;
        let positive = tr.samples.iter().all(|x| x.metric.to_array().iter().all(|v| *v > 0.0));
        let vol = tr.samples.iter().all(|x| (x.diagnostics.volume - v0).abs() <= 1e-8 * v0);
        let mono = monitor_series(&tr, "S").map(|m| m.nondecreasing()).unwrap_or(false);
        s.check(positive && vol && mono, || format!("{m:?}: positive {positive}, volume {vol}, S monotone {mono}"));
    }
    s.result
}

fn ratio_monotonicity(p: &ModelParams, seed: u64) -> SuiteResult {
    let mut s = Suite::new("x/z and y/z nondecreasing when x <= y <= z");
    let mut rng = stream(seed, 16);
    let cfg = IntegratorConfig::default();
    for _ in 0..8 {
        let m = canonicalize(&random_slice(&mut rng, p, 0.2, 2.0)).metric;
        let Some(tr) = run(FlowKind::Normalized, &m, Direction::Forward, p, &cfg, &mut s) else { continue };
        let ok = ["x/z", "y/z"]
            .iter()
            .all(|q| monitor_series(&tr, q).map(|m| m.nondecreasing()).unwrap_or(false));
        s.check(ok, || format!("{m:?}"));
    }
    s.result
}

fn isometry_equivariance(p: &ModelParams, seed: u64) -> SuiteResult {
    let mut s = Suite::new("permuted start gives permuted trajectory");
    let mut rng = stream(seed, 17);
    let cfg = IntegratorConfig {
        t_horizon: 0.5,
        ..IntegratorConfig::default()
    };
    for _ in 0..3 {
        let m = random_slice(&mut rng, p, 0.3, 2.0);
        let Some(base) = run(FlowKind::Normalized, &m, Direction::Forward, p, &cfg, &mut s) else { continue };
        for perm in Permutation::all() {
            let Some(tr) = run(FlowKind::Normalized, &perm.apply_metric(&m), Direction::Forward, p, &cfg, &mut s)
            else {
                continue;
            };
            let ok = tr.samples.len() == base.samples.len()
                && tr.samples.iter().zip(&base.samples).all(|(a, b)| {
                    a.t == b.t && a.metric == perm.apply_metric(&b.metric)
                });
            s.check(ok, || format!("{m:?} under {perm:?}"));
        }
    }
    s.result
}

fn invariant_sets_flow(p: &ModelParams) -> SuiteResult {
    let mut s = Suite::new("invariant subsets along trajectories");
    let cfg = IntegratorConfig::default();
    let c = p.jensen_slice_value();
    let starts = [
        (MetricParams::from_slice(0.4, 0.9, 0.9, p).unwrap(), Direction::Forward),
        (MetricParams::new(0.1, 1.0, 1.0, 3.0).unwrap(), Direction::Backward),
        (MetricParams::from_slice(0.7 * c, 0.7 * c, 0.7 * c, p).unwrap(), Direction::Forward),
        (MetricParams::from_slice(0.7 * c, 0.7 * c, 0.7 * c, p).unwrap(), Direction::Backward),
        (MetricParams::new(0.1, 1.0, 1.0, 1.0).unwrap(), Direction::Backward),
        (MetricParams::new(0.3, 1.0, 1.0, 1.0).unwrap(), Direction::Forward),
    ];
    for (m, dir) in starts {
        let Some(tr) = run(FlowKind::Normalized, &m, dir, p, &cfg, &mut s) else { continue };
        let rel = |a: f64, b: f64| (a - b).abs() / b;
        let ok = tr.samples.iter().all(|x| {
            let g = x.metric;
            let yz = rel(g.y, g.z) <= 1e-8;
            let xy = m.x != m.y || rel(g.x, g.y) <= 1e-8;
            let ys = m.y != m.s || rel(g.y, g.s) <= 1e-8;
            yz && xy && ys
        });
        s.check(ok, || format!("{m:?} {dir:?}"));
    }
    s.result
}

fn step_halving(p: &ModelParams, seed: u64) -> SuiteResult {
    let mut s = Suite::new("halving rel_tol moves the end state < 10 tol");
    let mut rng = stream(seed, 18);
    for _ in 0..4 {
        let m = random_slice(&mut rng, p, 0.4, 2.0);
        let coarse = IntegratorConfig {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            t_horizon: 0.3,
            einstein_tol: 0.0,
            ..IntegratorConfig::default()
        };
        let fine = IntegratorConfig {
            rel_tol: 5e-9,
            abs_tol: 5e-11,
            ..coarse.clone()
        };
        let a = run(FlowKind::Normalized, &m, Direction::Forward, p, &coarse, &mut s);
        let b = run(FlowKind::Normalized, &m, Direction::Forward, p, &fine, &mut s);
        let (Some(a), Some(b)) = (a, b) else { continue };
        if a.terminal.kind != TerminalKind::HorizonReached || b.terminal.kind != TerminalKind::HorizonReached {
            continue;
        }
        let ga = a.last().metric.to_array();
        let gb = b.last().metric.to_array();
        let dev = (0..4).map(|k| ((ga[k] - gb[k]) / gb[k]).abs()).fold(0.0, f64::max);
        s.check(dev < 10.0 * coarse.rel_tol, || format!("{m:?}: {dev:e}"));
    }
    s.result
}

fn terminal_kinds(p: &ModelParams) -> SuiteResult {
    let mut s = Suite::new("terminal classification and re-derivation");
    let cfg = IntegratorConfig::default();
    let (_, c2) = ys_limit_candidates(p);
    let c = p.jensen_slice_value();
    let cases: Vec<(MetricParams, Direction, TerminalKind)> = vec![
        (MetricParams::round(), Direction::Forward, TerminalKind::ConvergedRound),
        (MetricParams::from_slice(0.75 * c, 0.75 * c, 0.75 * c, p).unwrap(), Direction::Forward, TerminalKind::ForwardBlowup),
        (MetricParams::from_slice(1.2, 1.2, 1.2, p).unwrap(), Direction::Forward, TerminalKind::ConvergedRound),
        (MetricParams::from_slice(0.75 * c, 0.75 * c, 0.75 * c, p).unwrap(), Direction::Backward, TerminalKind::ConvergedJensen),
        (MetricParams::new(0.1, 1.0, 1.0, 3.0).unwrap(), Direction::Backward, TerminalKind::BackwardCollapse { ratio_limit: c2 }),
        (MetricParams::new(0.1, 1.0, 1.0, 1.0).unwrap(), Direction::Backward, TerminalKind::BackwardCollapse { ratio_limit: 1.0 }),
        (MetricParams::new(0.5, 0.8, 1.2, 1.0).unwrap(), Direction::Backward, TerminalKind::BackwardSingularity),
    ];
    for (m, dir, expect) in cases {
        let Some(tr) = run(FlowKind::Normalized, &m, dir, p, &cfg, &mut s) else { continue };
        let redetect = detect_terminal(&tr, p, &cfg).map(|t| t.kind);
        s.check(tr.terminal.kind == expect && redetect.as_ref().ok() == Some(&expect), || {
            format!("{m:?} {dir:?}: got {} / {redetect:?}, expected {expect}", tr.terminal.kind)
        });
    }
    s.result
}

fn backward_ratio_monotone(p: &ModelParams) -> SuiteResult {
    let mut s = Suite::new("y/s nondecreasing backward when y = z > s");
    let cfg = IntegratorConfig::default();
    for m in [
        MetricParams::new(0.5, 2.0, 2.0, 1.0).unwrap(),
        MetricParams::new(0.2, 1.5, 1.5, 1.2).unwrap(),
        MetricParams::new(1.0, 1.1, 1.1, 1.0).unwrap(),
    ] {
        let Some(tr) = run(FlowKind::Normalized, &m, Direction::Backward, p, &cfg, &mut s) else { continue };
        let ok = monitor_series(&tr, "y/s").map(|m| m.nondecreasing()).unwrap_or(false);
        s.check(ok, || format!("{m:?}"));
    }
    s.result
}

fn reparametrization(p: &ModelParams, seed: u64) -> SuiteResult {
    let mut s = Suite::new("Ricci flow reparametrized = normalized flow");
    let mut rng = stream(seed, 19);
    let ucfg = IntegratorConfig {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        einstein_tol: 0.0,
        samples_per_step: 4,
        ..IntegratorConfig::default()
    };
    let ncfg = IntegratorConfig {
        einstein_tol: 0.0,
        t_horizon: 1.0,
        ..IntegratorConfig::default()
    };
    for _ in 0..2 {
        let m = random_slice(&mut rng, p, 0.8, 1.25);
        let Some(u) = run(FlowKind::Unnormalized, &m, Direction::Forward, p, &ucfg, &mut s) else { continue };
        let Some(direct) = run(FlowKind::Normalized, &m, Direction::Forward, p, &ncfg, &mut s) else { continue };
        let (mapped, map) = match reparametrize_to_normalized(&u, p) {
            Ok(v) => v,
            Err(e) => {
                s.fail(e.to_string());
                continue;
            }
        };
        let v0 = relative_volume(&m, p).unwrap();
        let mut dev: f64 = 0.0;
        let mut vol_dev: f64 = 0.0;
        for smp in mapped.samples.iter().filter(|x| x.t <= 1.0) {
            if let Some(d) = direct.state_at(smp.t) {
                let (a, b) = (smp.metric.to_array(), d.to_array());
                for k in 0..4 {
                    dev = dev.max((a[k] - b[k]).abs());
                }
            }
            vol_dev = vol_dev.max((smp.diagnostics.volume - v0).abs() / v0);
        }
        let starts_ok = map.r_values[0] == 1.0 && map.f_values[0] == 0.0;
        s.check(dev <= 1e-6 && vol_dev <= 1e-8 && starts_ok, || {
            format!("{m:?}: sup deviation {dev:e}, volume drift {vol_dev:e}")
        });
    }
    s.result
}

fn separatrix_on_axis(p: &ModelParams) -> SuiteResult {
    let mut s = Suite::new("separatrix on the x = y = z axis");
    let c = p.jensen_slice_value();
    let cfg = IntegratorConfig::default();
    match trace_separatrix([0.75 * c; 3], [1.05 * c.max(1.0); 3], p, &cfg, 1e-10) {
        Ok(r) => {
            let err = (0..3).map(|k| (r.point[k] - c).abs()).fold(0.0, f64::max);
            s.check(err <= 1e-8 && r.bracket_width <= 1e-10 && r.witness_ok, || {
                format!("point {:?}, error {err:e}, witness {:e}", r.point, r.witness_distance)
            });
        }
        Err(e) => s.fail(e.to_string()),
    }
    s.result
}

fn blowup(p: &ModelParams) -> SuiteResult {
    let mut s = Suite::new("blow-up profile x S -> 6, Ric -> (2,2,2,0)");
    let cfg = IntegratorConfig::default();
    let c = p.jensen_slice_value();
    let m = MetricParams::from_slice(0.75 * c, 0.75 * c, 0.75 * c, p).unwrap();
    let Some(tr) = run(FlowKind::Normalized, &m, Direction::Forward, p, &cfg, &mut s) else { return s.result };
    match blowup_profile(&tr, p) {
        Ok(prof) => {
            let target = [2.0, 2.0, 2.0, 0.0];
            let ok = (prof.xs_limit - 6.0).abs() <= 0.3
                && (0..4).all(|k| (prof.rescaled_ricci[k] - target[k]).abs() <= 0.05);
            s.check(ok, || format!("{prof:?}"));
        }
        Err(e) => s.fail(e.to_string()),
    }
    s.result
}

fn serialization_round_trip(p: &ModelParams) -> SuiteResult {
    let mut s = Suite::new("CSV and JSON round trip byte-identical");
    let cfg = IntegratorConfig::default();
    let m = MetricParams::new(0.1, 1.0, 1.0, 3.0).unwrap();
    let Some(tr) = run(FlowKind::Normalized, &m, Direction::Backward, p, &cfg, &mut s) else { return s.result };
    let mut csv1 = Vec::new();
    write_trajectory_csv(&tr, &mut csv1).unwrap();
    let rows = read_trajectory_csv(csv1.as_slice()).unwrap();
    let mut csv2 = Vec::new();
    write_rows_csv(&rows, &mut csv2).unwrap();
    let bitwise = rows
        .iter()
        .zip(crate::io::trajectory_rows(&tr))
        .all(|(a, b)| a.iter().zip(b.iter()).all(|(u, v)| u.to_bits() == v.to_bits()));
    s.check(csv1 == csv2 && bitwise && rows.len() == tr.samples.len(), || "CSV".into());
    let mut j1 = Vec::new();
    write_trajectory_json(&tr, &mut j1).unwrap();
    let back = read_trajectory_json(j1.as_slice()).unwrap();
    let mut j2 = Vec::new();
    write_trajectory_json(&back, &mut j2).unwrap();
    s.check(j1 == j2 && back.samples == tr.samples && back.terminal == tr.terminal, || "JSON".into());
    s.result
}
