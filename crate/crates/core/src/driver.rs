//! The main iteration loop, its termination test and the ξ restart policy.

use serde::{Deserialize, Serialize};

use crate::certify::{audit_step, iteration_bound_for_theta, LemmaCheckOutcome, StepAudit, DEFAULT_TAU};
use crate::error::{Error, Result};
use crate::lp::{
    current_residuals, initial_residuals, initial_state, IterateState, LinearProgram, SolutionCertificate,
};
use crate::newton::{full_step, newton_directions, proximity, scaled_v, StepBundle};

/// Number of ξ doublings tried before giving up.
pub const MAX_XI_DOUBLINGS: u32 = 20;
/// Extra iterations allowed on top of the guaranteed bound.
pub const ITERATION_SLACK: u64 = 10;

/// A parameter that is either fixed or derived from the problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param<T> {
    Auto,
    Fixed(T),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub epsilon: f64,
    pub xi: Param<f64>,
    /// `Auto` is `1/(22·max(n, 4))`.
    pub theta: Param<f64>,
    pub tau: f64,
    /// `Auto` is the guaranteed bound for the chosen θ plus [`ITERATION_SLACK`].
    pub max_iterations: Param<u64>,
    /// Allowed drift of `b − Ax` and `c − Aᵀy − s` from `ν` times the starting
    /// residuals, relative to `1 + ‖r⁰‖`. Exceeding it is reported, not fatal.
    pub residual_tol: f64,
    /// Run the per-iteration lemma audits and attach them to the trace.
    pub certify_lemmas: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            epsilon: 1e-6,
            xi: Param::Auto,
            theta: Param::Auto,
            tau: DEFAULT_TAU,
            max_iterations: Param::Auto,
            residual_tol: 1e-9,
            certify_lemmas: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if let Param::Fixed(theta) = self.theta {
            if !(theta > 0.0 && theta < 1.0) {
                return Err(Error::InvalidParameter(format!("theta must lie in (0, 1), got {theta}")));
            }
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::InvalidParameter(format!("tau must lie in (0, 1), got {}", self.tau)));
        }
        if let Param::Fixed(xi) = self.xi {
            if !(xi > 0.0 && xi.is_finite()) {
                return Err(Error::InvalidParameter(format!("xi must be positive, got {xi}")));
            }
        }
        Ok(())
    }

    pub fn theta_for(&self, n: usize) -> f64 {
        match self.theta {
            Param::Fixed(t) => t,
            Param::Auto => default_theta(n),
        }
    }
}

/// `1/(22·max(n, 4))`.
pub fn default_theta(n: usize) -> f64 {
    1.0 / (22.0 * n.max(4) as f64)
}

/// One row of the trace, describing the iterate produced by step `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: u64,
    pub mu: f64,
    pub nu: f64,
    /// Proximity of the new iterate.
    pub delta: f64,
    /// `ω` of the step that produced it.
    pub omega: f64,
    pub gap: f64,
    pub norm_rb: f64,
    pub norm_rc: f64,
    pub min_v: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lemma_flags: Vec<LemmaCheckOutcome>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    EpsilonOptimal,
    StepInfeasible,
    IterationCapExceeded,
    DomainViolation,
    RankDeficient,
    /// Every ξ in the restart schedule failed; presumed infeasible or unbounded.
    XiSearchExhausted,
}

impl SolveStatus {
    /// Failures the ξ restart policy reacts to.
    fn is_restartable(self) -> bool {
        matches!(
            self,
            SolveStatus::StepInfeasible | SolveStatus::DomainViolation | SolveStatus::IterationCapExceeded
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Present iff the status is `EpsilonOptimal`.
    pub certificate: Option<SolutionCertificate>,
    pub trace: Vec<IterationRecord>,
    pub xi_used: f64,
    pub restarts: u32,
    pub theta: f64,
    pub iterations: u64,
    pub iteration_cap: u64,
    /// Largest observed relative drift from the perturbed-feasibility invariant.
    pub residual_drift: f64,
    /// Why the last attempt stopped, when it did not succeed.
    pub message: Option<String>,
}

impl SolveReport {
    pub fn lemma_outcomes(&self) -> impl Iterator<Item = &LemmaCheckOutcome> {
        self.trace.iter().flat_map(|r| r.lemma_flags.iter())
    }
}

/// `max(xᵀs, ‖b − Ax‖, ‖c − Aᵀy − s‖) ≤ ε`.
pub fn termination_check(state: &IterateState, problem: &LinearProgram, epsilon: f64) -> bool {
    let (rb, rc) = current_residuals(problem, state);
    state.gap().max(rb.norm2()).max(rc.norm2()) <= epsilon
}

/// Starting scale of the ξ search, `max(1, ‖b‖∞, ‖c‖∞)`.
pub fn initial_xi(problem: &LinearProgram) -> f64 {
    1f64.max(problem.b().norm_inf()).max(problem.c().norm_inf())
}

/// Solves with the configured ξ, or searches over doublings of
/// [`initial_xi`] when ξ is `Auto`.
pub fn solve(problem: &LinearProgram, config: &SolverConfig) -> Result<SolveReport> {
    config.validate()?;
    match config.xi {
        Param::Fixed(xi) => solve_with_xi(problem, config, xi),
        Param::Auto => xi_restart_policy(problem, config),
    }
}

/// Doubles ξ after every restartable failure, at most [`MAX_XI_DOUBLINGS`] times.
pub fn xi_restart_policy(problem: &LinearProgram, config: &SolverConfig) -> Result<SolveReport> {
    let mut xi = initial_xi(problem);
    let mut restarts = 0;
    loop {
        let mut report = solve_with_xi(problem, config, xi)?;
        report.restarts = restarts;
        if !report.status.is_restartable() {
            return Ok(report);
        }
        if restarts == MAX_XI_DOUBLINGS {
            report.message = Some(format!(
                "no xi up to {xi} succeeded (last failure: {:?}); problem presumed infeasible or unbounded",
                report.status
            ));
            report.status = SolveStatus::XiSearchExhausted;
            return Ok(report);
        }
        xi *= 2.0;
        restarts += 1;
    }
}

/// Called once per attempted step with the iterate, its direction bundle and
/// the resulting iterate (`None` when the step lost positivity).
pub type StepObserver<'a> = dyn FnMut(&IterateState, &StepBundle, Option<&IterateState>) + 'a;

/// One run of the method from `ξ(e, 0, e)`.
pub fn solve_with_xi(problem: &LinearProgram, config: &SolverConfig, xi: f64) -> Result<SolveReport> {
    solve_with_xi_observed(problem, config, xi, &mut |_, _, _| {})
}

/// [`solve_with_xi`] with a per-step callback.
pub fn solve_with_xi_observed(
    problem: &LinearProgram,
    config: &SolverConfig,
    xi: f64,
    observer: &mut StepObserver<'_>,
) -> Result<SolveReport> {
    config.validate()?;
    let n = problem.n();
    let theta = config.theta_for(n);
    let residuals = initial_residuals(problem, xi);
    let cap = match config.max_iterations {
        Param::Fixed(cap) => cap,
        Param::Auto => {
            iteration_bound_for_theta(
                theta,
                n,
                xi,
                residuals.rb0.norm2(),
                residuals.rc0.norm2(),
                config.epsilon,
            ) + ITERATION_SLACK
        }
    };
    let mut state = initial_state(problem, xi)?;
    let mut trace = Vec::new();
    let mut k = 0u64;
    let mut drift = 0.0f64;
    let scale_b = 1.0 + residuals.rb0.norm2();
    let scale_c = 1.0 + residuals.rc0.norm2();

    let finish = |status: SolveStatus, state: &IterateState, trace, k, drift: f64, message: Option<String>| SolveReport {
        status,
        certificate: (status == SolveStatus::EpsilonOptimal)
            .then(|| SolutionCertificate::from_state(problem, state)),
        trace,
        xi_used: xi,
        restarts: 0,
        theta,
        iterations: k,
        iteration_cap: cap,
        residual_drift: drift,
        message: message.or_else(|| {
            (drift > config.residual_tol).then(|| format!("residual drift {drift:e} exceeds tolerance"))
        }),
    };

    loop {
        if termination_check(&state, problem, config.epsilon) {
            return Ok(finish(SolveStatus::EpsilonOptimal, &state, trace, k, drift, None));
        }
        if k >= cap {
            return Ok(finish(SolveStatus::IterationCapExceeded, &state, trace, k, drift, None));
        }
        let bundle = match newton_directions(problem, &state, &residuals, theta) {
            Ok(b) => b,
            Err(e) => {
                let status = failure_status(&e)?;
                return Ok(finish(status, &state, trace, k, drift, Some(e.to_string())));
            }
        };
        let step = full_step(&state, &bundle, theta);
        observer(&state, &bundle, step.as_ref().ok());
        let lemma_flags = if config.certify_lemmas {
            audit_step(&StepAudit {
                problem,
                state: &state,
                bundle: &bundle,
                theta,
                next: step.as_ref().ok(),
            })?
        } else {
            Vec::new()
        };
        let next = match step {
            Ok(next) => next,
            Err(e) => {
                if !lemma_flags.is_empty() {
                    // Keep the audit of the failed step.
                    trace.push(IterationRecord {
                        k: k + 1,
                        mu: f64::NAN,
                        nu: f64::NAN,
                        delta: f64::NAN,
                        omega: bundle.omega,
                        gap: f64::NAN,
                        norm_rb: f64::NAN,
                        norm_rc: f64::NAN,
                        min_v: f64::NAN,
                        lemma_flags,
                    });
                }
                return Ok(finish(SolveStatus::StepInfeasible, &state, trace, k, drift, Some(e.to_string())));
            }
        };
        k += 1;
        let v = scaled_v(&next.x, &next.s, next.mu)?;
        let (rb, rc) = current_residuals(problem, &next);
        let delta = match proximity(&v) {
            Ok(d) => d,
            Err(e) => {
                let status = failure_status(&e)?;
                return Ok(finish(status, &next, trace, k, drift, Some(e.to_string())));
            }
        };
        drift = drift
            .max(rb.axpy(-next.nu, &residuals.rb0).norm2() / scale_b)
            .max(rc.axpy(-next.nu, &residuals.rc0).norm2() / scale_c);
        trace.push(IterationRecord {
            k,
            mu: next.mu,
            nu: next.nu,
            delta,
            omega: bundle.omega,
            gap: next.gap(),
            norm_rb: rb.norm2(),
            norm_rc: rc.norm2(),
            min_v: v.min(),
            lemma_flags,
        });
        state = next;
    }
}

fn failure_status(err: &Error) -> Result<SolveStatus> {
    match err {
        Error::DomainViolation { .. } | Error::NonFinite(_) => Ok(SolveStatus::DomainViolation),
        Error::StepInfeasible { .. } => Ok(SolveStatus::StepInfeasible),
        Error::NotPositiveDefinite { .. } | Error::RankDeficient => Ok(SolveStatus::RankDeficient),
        other => Err(other.clone()),
    }
}

/// Trace rows as the public JSON layout.
pub fn trace_to_json(trace: &[IterationRecord]) -> String {
    serde_json::to_string_pretty(trace).expect("trace serializes")
}
