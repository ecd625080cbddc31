//! Acceptance criteria, one test per criterion. Each prints a single
//! `[PASS]`/`[FAIL]` line; run with `-- --nocapture` to see them.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use aet_iipm::certify::{certify_parameters, iteration_bound, LemmaId};
use aet_iipm::driver::{solve_with_xi, solve_with_xi_observed, Param, SolveReport, SolveStatus, SolverConfig};
use aet_iipm::linalg::{Matrix, Vector};
use aet_iipm::lp::{initial_residuals, LinearProgram};
use aet_iipm::newton::{domain_floor, p_vector};
use aet_iipm::oracle::{binomial, generate_instance, vertex_solve, GeneratedInstance, Lcg};

const EPSILON: f64 = 1e-6;
const TAU: f64 = 1.0 / 12.0;
const BATTERY_SIZE: usize = 50;
const LEMMA_AUDIT_INSTANCES: usize = 10;
/// Instances with more candidate bases than this are compared against the
/// constructed optimum only.
const ENUMERATION_BUDGET: u64 = 200_000;

fn report_line(id: u32, name: &str, pass: bool, detail: &str) {
    println!("[{}] criterion {id}: {name} -- {detail}", if pass { "PASS" } else { "FAIL" });
}

/// Shapes cover m in 2..=10 and n in 4..=24 with m < n.
fn battery_shape(i: usize) -> (usize, usize) {
    let m = 2 + (i * 4) % 9;
    let n = 4 + (i * 11) % 21;
    (m, n.max(m + 2).min(24))
}

struct BatteryRun {
    instance: GeneratedInstance,
    report: SolveReport,
    /// Worst relative deviation from ‖q_v‖²/4 = ‖p_v‖²/4 − d_xᵀd_s.
    q_norm_identity: f64,
    /// Worst relative deviation from d_x = (p_v + q_v)/2, d_s = (p_v − q_v)/2.
    split_identity: f64,
}

struct Battery {
    runs: Vec<BatteryRun>,
    elapsed: Duration,
}

fn battery() -> &'static Battery {
    static BATTERY: OnceLock<Battery> = OnceLock::new();
    BATTERY.get_or_init(|| {
        let start = Instant::now();
        let runs = (0..BATTERY_SIZE)
            .map(|i| {
                let (m, n) = battery_shape(i);
                let instance = generate_instance(m, n, 1000 + i as u64, m).expect("instance");
                let config = SolverConfig {
                    epsilon: EPSILON,
                    xi: Param::Fixed(instance.xi_true),
                    certify_lemmas: i < LEMMA_AUDIT_INSTANCES,
                    ..SolverConfig::default()
                };
                let (mut q_norm_identity, mut split_identity) = (0.0f64, 0.0f64);
                let report = solve_with_xi_observed(
                    &instance.problem,
                    &config,
                    instance.xi_true,
                    &mut |_, b, _| {
                        let q2 = b.q_v.dot(&b.q_v) / 4.0;
                        let p2 = b.p_v.dot(&b.p_v) / 4.0;
                        let cross = b.d_x.dot(&b.d_s);
                        let scale = (q2 + p2 + cross.abs()).max(f64::MIN_POSITIVE);
                        q_norm_identity = q_norm_identity.max((q2 - (p2 - cross)).abs() / scale);
                        let scale = b.p_v.norm2() + b.q_v.norm2() + b.d_x.norm2() + b.d_s.norm2();
                        for i in 0..b.v.len() {
                            let ex = ((b.p_v[i] + b.q_v[i]) / 2.0 - b.d_x[i]).abs();
                            let es = ((b.p_v[i] - b.q_v[i]) / 2.0 - b.d_s[i]).abs();
                            split_identity = split_identity.max(ex.max(es) / scale.max(f64::MIN_POSITIVE));
                        }
                    },
                )
                .expect("solve");
                BatteryRun { instance, report, q_norm_identity, split_identity }
            })
            .collect();
        Battery { runs, elapsed: start.elapsed() }
    })
}

#[test]
fn battery_covers_requested_shapes() {
    let shapes: Vec<_> = (0..BATTERY_SIZE).map(battery_shape).collect();
    assert!(shapes.iter().all(|&(m, n)| (2..=10).contains(&m) && (4..=24).contains(&n) && m < n));
    for m in 2..=10 {
        assert!(shapes.iter().any(|s| s.0 == m));
    }
    assert!(shapes.iter().any(|s| s.1 == 4) && shapes.iter().any(|s| s.1 == 24));
}

#[test]
fn criterion_1_proximity_maintenance() {
    let b = battery();
    let floor = std::f64::consts::FRAC_1_SQRT_2;
    let mut records = 0;
    let mut worst_delta = 0.0f64;
    let mut worst_min_v = f64::INFINITY;
    let mut bad = 0;
    for run in &b.runs {
        if run.report.status != SolveStatus::EpsilonOptimal {
            bad += 1;
        }
        for r in &run.report.trace {
            records += 1;
            worst_delta = worst_delta.max(r.delta);
            worst_min_v = worst_min_v.min(r.min_v);
        }
    }
    let pass = bad == 0 && worst_delta <= TAU + 1e-10 && worst_min_v > floor && b.elapsed.as_secs_f64() < 30.0;
    report_line(
        1,
        "proximity maintenance",
        pass,
        &format!(
            "{records} records, max delta {worst_delta:.3e}, min v {worst_min_v:.6}, {bad} failed solves, {:.2}s",
            b.elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_2_geometric_residual_decay() {
    let mut worst = 0.0f64;
    for run in &battery().runs {
        let r0 = initial_residuals(&run.instance.problem, run.report.xi_used);
        let (b0, c0) = (r0.rb0.norm2(), r0.rc0.norm2());
        let theta = run.report.theta;
        for r in &run.report.trace {
            let factor = (1.0 - theta).powi(r.k as i32);
            for (observed, start) in [(r.norm_rb, b0), (r.norm_rc, c0)] {
                let expected = factor * start;
                if start > 0.0 {
                    worst = worst.max((observed - expected).abs() / expected);
                }
            }
        }
    }
    let pass = worst <= 1e-8;
    report_line(2, "geometric residual decay", pass, &format!("max relative deviation {worst:.3e}"));
    assert!(pass);
}

#[test]
fn criterion_3_theorem_iteration_bound() {
    let mut worst_ratio = 0.0f64;
    let mut failures = Vec::new();
    for (i, run) in battery().runs.iter().enumerate() {
        assert_eq!(run.report.restarts, 0);
        let r0 = initial_residuals(&run.instance.problem, run.report.xi_used);
        let bound = iteration_bound(
            run.instance.problem.n(),
            run.report.xi_used,
            r0.rb0.norm2(),
            r0.rc0.norm2(),
            EPSILON,
        );
        worst_ratio = worst_ratio.max(run.report.iterations as f64 / bound as f64);
        if run.report.status != SolveStatus::EpsilonOptimal || run.report.iterations > bound {
            failures.push(i);
        }
    }
    let pass = failures.is_empty();
    report_line(
        3,
        "theorem iteration bound",
        pass,
        &format!("max iterations/bound {worst_ratio:.4}, violations at {failures:?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_4_oracle_equivalence() {
    let mut worst = 0.0f64;
    let mut enumerated = 0;
    let mut failures = Vec::new();
    for (i, run) in battery().runs.iter().enumerate() {
        let p = &run.instance.problem;
        let constructed = run.instance.optimal_value();
        let optimum = if binomial(p.n(), p.m()) <= ENUMERATION_BUDGET {
            enumerated += 1;
            let sol = vertex_solve(p).expect("enumeration");
            assert!((sol.value - constructed).abs() <= 1e-8 * (1.0 + constructed.abs()));
            sol.value
        } else {
            constructed
        };
        let Some(cert) = &run.report.certificate else {
            failures.push(i);
            continue;
        };
        let err = (p.objective(&cert.x) - optimum).abs();
        let tol = EPSILON + 1e-6 * optimum.abs();
        worst = worst.max(err / tol);
        if err > tol {
            failures.push(i);
        }
    }
    let pass = failures.is_empty();
    report_line(
        4,
        "oracle equivalence",
        pass,
        &format!("{enumerated} enumerated, worst error/tolerance {worst:.3e}, failures {failures:?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_5_lemma_audits() {
    let b = battery();
    let mut checked = std::collections::BTreeMap::<LemmaId, (usize, usize, usize)>::new();
    for run in b.runs.iter().take(LEMMA_AUDIT_INSTANCES) {
        assert!(!run.report.trace.is_empty());
        for rec in &run.report.trace {
            assert_eq!(rec.lemma_flags.len(), 8);
            for o in &rec.lemma_flags {
                let e = checked.entry(o.lemma_id).or_default();
                e.0 += 1;
                e.1 += usize::from(o.precondition_held);
                e.2 += usize::from(o.is_violation());
            }
        }
    }
    let violations: usize = checked.values().map(|c| c.2).sum();
    let all_present = checked.len() == 8;
    let pass = violations == 0 && all_present;
    let detail = checked
        .iter()
        .map(|(id, (n, pre, bad))| format!("{id:?} {bad}/{pre}/{n}"))
        .collect::<Vec<_>>()
        .join(", ");
    report_line(5, "lemma audits (violations/preconditions/checked)", pass, &detail);
    assert!(pass);
}

#[test]
fn criterion_6_algebraic_identities() {
    let b = battery();
    let worst_q_norm = b.runs.iter().map(|r| r.q_norm_identity).fold(0.0, f64::max);
    let worst_split = b.runs.iter().map(|r| r.split_identity).fold(0.0, f64::max);

    let mut rng = Lcg::new(2024);
    let lo = domain_floor() - aet_iipm::newton::DOMAIN_GUARD + 0.01;
    let mut worst_slack = 0.0f64;
    let mut negative = 0;
    for _ in 0..100_000 {
        let n = 1 + rng.index(8);
        let v: Vec<f64> = (0..n).map(|_| rng.uniform(lo, 3.0)).collect();
        let p = p_vector(&v).expect("in domain");
        for (vi, pi) in v.iter().zip(p.iter()) {
            let lhs = vi * vi + vi * pi - 1.0;
            let closed = (vi * vi - 1.0).powi(2) / (2.0 * vi * vi - 1.0);
            if lhs < -1e-12 {
                negative += 1;
            }
            worst_slack = worst_slack.max((lhs - closed).abs() / (1.0 + closed));
        }
    }
    let pass = worst_q_norm <= 1e-12 && worst_split <= 1e-12 && negative == 0 && worst_slack <= 1e-12;
    report_line(
        6,
        "algebraic identities",
        pass,
        &format!("q/p identity {worst_q_norm:.2e}, reconstruction {worst_split:.2e}, slack identity {worst_slack:.2e}, {negative} negative"),
    );
    assert!(pass);
}

#[test]
fn criterion_7_parameter_certification() {
    let mut all_cond1 = true;
    let mut lines = Vec::new();
    for n in [4usize, 8, 16, 1_000, 1_000_000] {
        let cert = certify_parameters(n).expect("n >= 4");
        all_cond1 &= cert.cond1;
        lines.push(format!(
            "n={n}: t*={:.5} half={:.5} y={:.5} cond1={} cond2={}",
            cert.t_star, cert.half_bound, cert.y_tau, cert.cond1, cert.cond2
        ));
        let json = serde_json::to_value(&cert).unwrap();
        for key in ["n", "tau", "theta", "f_tau", "t_star", "half_bound", "y_tau", "cond1", "cond2"] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
    }
    report_line(7, "parameter certification", all_cond1, &lines.join("; "));
    assert!(all_cond1);
}

/// `b = A(ξe)`, `c = ξe`: the start is the exact `μ⁰`-center of a feasible pair.
fn centered_instance(xi: f64) -> LinearProgram {
    let mut rng = Lcg::new(31);
    let (m, n) = (3, 8);
    let a = Matrix::new(m, n, (0..m * n).map(|_| rng.uniform(-1.0, 1.0)).collect()).unwrap();
    let b = a.mul_vec(&vec![xi; n]);
    LinearProgram::new(a, b, Vector::filled(n, xi)).unwrap()
}

#[test]
fn criterion_8_centered_special_case() {
    let xi = 2.0;
    let p = centered_instance(xi);
    let config = SolverConfig { epsilon: EPSILON, xi: Param::Fixed(xi), ..SolverConfig::default() };
    let report = solve_with_xi(&p, &config, xi).expect("solve");
    assert_eq!(report.status, SolveStatus::EpsilonOptimal);
    let theta = report.theta;

    let max_delta = report.trace.iter().map(|r| r.delta).fold(0.0, f64::max);
    let mut prev_gap = p.n() as f64 * xi * xi;
    let mut worst_ratio = 0.0f64;
    for r in &report.trace {
        let ratio = r.gap / prev_gap;
        worst_ratio = worst_ratio.max((ratio - (1.0 - theta)).abs() / (1.0 - theta));
        prev_gap = r.gap;
    }
    let pass = max_delta <= 1e-8 && worst_ratio <= 1e-10;
    report_line(
        8,
        "centered special case",
        pass,
        &format!(
            "{} iterations, max delta {max_delta:.3e}, worst gap-ratio deviation {worst_ratio:.3e}",
            report.iterations
        ),
    );
    assert!(pass);
}
