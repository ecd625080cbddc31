use std::collections::BTreeMap;

use aet_iipm::certify::{audit_step, certify_parameters, delta_plus_bound, LemmaId, StepAudit};
use aet_iipm::driver::{default_theta, solve_with_xi_observed, Param, SolverConfig};
use aet_iipm::oracle::generate_instance;

#[derive(Default, Debug)]
struct Tally {
    checked: usize,
    precondition_held: usize,
    violations: usize,
}

/// Audits every step of several runs, including runs with θ well above the
/// default, so preconditions are exercised near their limits.
fn audit(theta_scale: f64, seeds: std::ops::Range<u64>) -> BTreeMap<LemmaId, Tally> {
    let mut tallies: BTreeMap<LemmaId, Tally> = BTreeMap::new();
    for seed in seeds {
        let (m, n) = (2 + (seed as usize) % 4, 6 + (seed as usize) % 5);
        let inst = generate_instance(m, n, seed, m).unwrap();
        let theta = (theta_scale * default_theta(n)).min(0.5);
        let config = SolverConfig {
            xi: Param::Fixed(inst.xi_true),
            theta: Param::Fixed(theta),
            max_iterations: Param::Fixed(3000),
            ..SolverConfig::default()
        };
        let p = &inst.problem;
        solve_with_xi_observed(p, &config, inst.xi_true, &mut |state, bundle, next| {
            let outcomes = audit_step(&StepAudit { problem: p, state, bundle, theta, next }).unwrap();
            for o in outcomes {
                let t = tallies.entry(o.lemma_id).or_default();
                t.checked += 1;
                t.precondition_held += usize::from(o.precondition_held);
                t.violations += usize::from(o.is_violation());
            }
        })
        .unwrap();
    }
    tallies
}

#[test]
fn default_parameters_never_violate_a_bound() {
    let tallies = audit(1.0, 1..6);
    for (id, t) in &tallies {
        assert_eq!(t.violations, 0, "{id:?}: {t:?}");
        assert!(t.checked >= 1000, "{id:?}: {t:?}");
    }
    assert_eq!(tallies.len(), 8);
}

#[test]
fn aggressive_theta_never_violates_a_bound() {
    for scale in [4.0, 16.0, 64.0] {
        let tallies = audit(scale, 10..14);
        for (id, t) in &tallies {
            assert_eq!(t.violations, 0, "scale {scale} {id:?}: {t:?}");
        }
        let feasibility = &tallies[&LemmaId::StrictFeasibility];
        assert!(feasibility.precondition_held > 0);
    }
}

#[test]
fn delta_plus_bound_is_monotone_in_its_inputs() {
    let n = 10;
    let theta = default_theta(n);
    let mut prev = 0.0;
    for i in 0..40 {
        let delta = i as f64 * 0.002;
        let b = delta_plus_bound(delta, 0.01, theta, n).unwrap();
        assert!(b >= prev);
        prev = b;
    }
    assert!(delta_plus_bound(0.05, 0.02, theta, n).unwrap() >= delta_plus_bound(0.05, 0.01, theta, n).unwrap());
}

#[test]
fn parameter_conditions_scan() {
    for n in 4..=200 {
        let cert = certify_parameters(n).unwrap();
        assert!(cert.cond1, "n = {n}");
        assert!(cert.f_tau < cert.tau, "n = {n}");
        if n >= 8 {
            assert!(cert.cond2, "n = {n}");
        }
    }
}
