use aet_iipm::driver::{solve, xi_restart_policy, Param, SolveStatus, SolverConfig};
use aet_iipm::oracle::generate_instance;
use aet_iipm::{LinearProgram, Matrix, Vector};

fn program(a: &[&[f64]], b: &[f64], c: &[f64]) -> LinearProgram {
    let rows: Vec<Vec<f64>> = a.iter().map(|r| r.to_vec()).collect();
    LinearProgram::new(Matrix::from_rows(&rows).unwrap(), Vector::new(b.to_vec()).unwrap(), Vector::new(c.to_vec()).unwrap())
        .unwrap()
}

#[test]
fn easy_instance_needs_no_restart() {
    let inst = generate_instance(3, 7, 5, 3).unwrap();
    let report = solve(&inst.problem, &SolverConfig::default()).unwrap();
    assert_eq!(report.status, SolveStatus::EpsilonOptimal);
    assert_eq!(report.restarts, 0);
    assert!(report.certificate.unwrap().is_epsilon_valid(1e-6));
}

#[test]
fn too_small_xi_is_doubled() {
    // The optimum has x₁ = 1000, far outside the box the initial ξ = 1.5 implies.
    let p = program(&[&[0.001, 1.0, 1.0, 1.0]], &[1.0], &[0.001, 1.5, 1.5, 1.5]);
    let report = solve(&p, &SolverConfig::default()).unwrap();
    assert_eq!(report.status, SolveStatus::EpsilonOptimal);
    assert!((1..=3).contains(&report.restarts), "{} restarts", report.restarts);
    assert_eq!(report.xi_used, 1.5 * 2f64.powi(report.restarts as i32));
    let cert = report.certificate.unwrap();
    assert!((p.objective(&cert.x) - 1.0).abs() < 1e-5);
}

#[test]
fn fixed_xi_disables_restarts() {
    let p = program(&[&[0.001, 1.0, 1.0, 1.0]], &[1.0], &[0.001, 1.5, 1.5, 1.5]);
    let config = SolverConfig { xi: Param::Fixed(1.0), ..SolverConfig::default() };
    let report = solve(&p, &config).unwrap();
    assert_eq!(report.restarts, 0);
    assert_ne!(report.status, SolveStatus::EpsilonOptimal);
}

#[test]
fn infeasible_problem_exhausts_xi_search() {
    let p = program(&[&[1.0, 1.0]], &[-1.0], &[1.0, 1.0]);
    let report = solve(&p, &SolverConfig::default()).unwrap();
    assert_eq!(report.status, SolveStatus::XiSearchExhausted);
    assert!(report.certificate.is_none());
    assert!(report.message.is_some());
}

#[test]
fn restart_policy_starts_from_data_scale() {
    let p = program(&[&[0.001, 1.0, 1.0, 1.0]], &[1.0], &[0.001, 1.5, 1.5, 1.5]);
    let config = SolverConfig { xi: Param::Fixed(1.0), ..SolverConfig::default() };
    let report = xi_restart_policy(&p, &config).unwrap();
    assert_eq!(report.status, SolveStatus::EpsilonOptimal);
    assert!(report.xi_used > 1.5);
}
