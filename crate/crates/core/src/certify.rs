//! Numerical checks of the per-iteration inequalities behind the method's
//! convergence proof, and evaluation of the parameter conditions that make
//! `τ = 1/12`, `θ = 1/(22n)` work.
//!
//! Nothing here gates the solver. Outcomes are recorded so traces can be
//! audited after the fact.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{NullSpaceProjector, Vector};
use crate::lp::{IterateState, LinearProgram};
use crate::newton::{proximity, scaled_v, StepBundle};

/// Absolute slack granted to every bound comparison.
pub const BOUND_SLACK: f64 = 1e-9;

/// Default proximity threshold.
pub const DEFAULT_TAU: f64 = 1.0 / 12.0;

/// Which inequality an outcome refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LemmaId {
    /// `δ² + ω < 1` ⇒ the full step stays strictly positive.
    StrictFeasibility,
    /// `δ(v⁺)` is below the closed-form bound in `δ`, `ω`, `θ`, `n`.
    DeltaPlusBound,
    /// `min(v⁺) ≥ √((1 − δ² − ω)/(1 − θ))`.
    MinVPlusBound,
    /// `2ω ≤ ‖q‖² + (‖q‖ + 2δ)²`.
    QNormBound19,
    /// `‖q‖ ≤ θ(n + ‖v‖²)/min(v)`.
    QNormBound20,
    /// `‖q‖ ≤ θ(n + (√n + 4δ)²)/(1 − 4δ)`.
    QNormBound21,
    /// `‖v‖ ≤ √n + 4δ`.
    VNormBound,
    /// `min(v) ≥ 1 − 4δ`.
    MinVBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheckOutcome {
    pub lemma_id: LemmaId,
    pub precondition_held: bool,
    /// Only meaningful when `precondition_held`; vacuously `true` otherwise.
    pub claim_held: bool,
    pub lhs: f64,
    pub rhs: f64,
}

impl LemmaCheckOutcome {
    fn compare(lemma_id: LemmaId, precondition_held: bool, lhs: f64, rhs: f64) -> Self {
        LemmaCheckOutcome {
            lemma_id,
            precondition_held,
            claim_held: !precondition_held || lhs <= rhs + BOUND_SLACK,
            lhs,
            rhs,
        }
    }

    pub fn is_violation(&self) -> bool {
        self.precondition_held && !self.claim_held
    }
}

/// Strict feasibility precondition `δ² + ω < 1`. The claim (a positive next
/// iterate) is filled in once the step outcome is known.
pub fn check_strict_feasibility(delta: f64, omega: f64) -> LemmaCheckOutcome {
    let lhs = delta * delta + omega;
    LemmaCheckOutcome {
        lemma_id: LemmaId::StrictFeasibility,
        precondition_held: lhs < 1.0,
        claim_held: true,
        lhs,
        rhs: 1.0,
    }
}

/// Upper bound on the proximity after a full step, valid when
/// `δ² + ω < (1 − θ)/2`.
pub fn delta_plus_bound(delta: f64, omega: f64, theta: f64, n: usize) -> Result<f64> {
    let t = delta * delta + omega;
    if !(t < 0.5 * (1.0 - theta)) {
        return Err(Error::PreconditionViolated(format!(
            "delta^2 + omega = {t} must be below (1 - theta)/2 = {}",
            0.5 * (1.0 - theta)
        )));
    }
    let num = (1.0 - t).sqrt() * (theta * (n as f64).sqrt() + 10.0 * delta * delta + omega);
    let den = 2.0 * (1.0 - theta).sqrt() * (2.0 * (1.0 - t) - (1.0 - theta));
    Ok(num / den)
}

/// Lower bound on `min(v⁺)` under the same precondition.
pub fn min_v_plus_bound(delta: f64, omega: f64, theta: f64) -> f64 {
    ((1.0 - delta * delta - omega) / (1.0 - theta)).sqrt()
}

/// The unique point `q` of `(N + d_x) ∩ (N⊥ + d_s)`, with `N` the null space of
/// `Ā = A diag(x/v)`: `q = (d_x − P_N d_x) + P_N d_s`.
pub fn compute_q(problem: &LinearProgram, state: &IterateState, bundle: &StepBundle) -> Result<Vector> {
    let abar = problem.a().scale_columns(&state.x.zip_map(&bundle.v, |x, v| x / v));
    let proj = NullSpaceProjector::new(abar)?;
    let px = proj.project(&bundle.d_x);
    let ps = proj.project(&bundle.d_s);
    Ok(bundle.d_x.axpy(-1.0, &px).axpy(1.0, &ps))
}

/// `θ(n + (√n + 4δ)²)/(1 − 4δ)`, for `δ < 1/4`.
pub fn q_norm_bound_21(theta: f64, n: usize, delta: f64) -> Result<f64> {
    if !(delta < 0.25) {
        return Err(Error::PreconditionViolated(format!("delta = {delta} must be below 1/4")));
    }
    let n = n as f64;
    Ok(theta * (n + (n.sqrt() + 4.0 * delta).powi(2)) / (1.0 - 4.0 * delta))
}

/// Upper bound on `ω` once `δ ≤ τ`: `½[Q² + (Q + 2τ)²]` with `Q` the bound on `‖q‖`.
pub fn f_tau(tau: f64, theta: f64, n: usize) -> Result<f64> {
    let q = q_norm_bound_21(theta, n, tau)?;
    Ok(0.5 * (q * q + (q + 2.0 * tau).powi(2)))
}

/// `χ(t) = √(1 − t) / (2(1 − t) − (1 − θ))` on `0 ≤ t ≤ (1 − θ)/2`.
pub fn chi(t: f64, theta: f64) -> Result<f64> {
    if !(0.0..=0.5 * (1.0 - theta)).contains(&t) {
        return Err(Error::PreconditionViolated(format!(
            "t = {t} outside [0, (1 - theta)/2 = {}]",
            0.5 * (1.0 - theta)
        )));
    }
    Ok((1.0 - t).sqrt() / (2.0 * (1.0 - t) - (1.0 - theta)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterCertificate {
    pub n: usize,
    pub tau: f64,
    pub theta: f64,
    pub f_tau: f64,
    /// `τ² + f(τ)`
    pub t_star: f64,
    /// `(1 − θ)/2`
    pub half_bound: f64,
    pub y_tau: f64,
    /// `t_star < half_bound`
    pub cond1: bool,
    /// `y_tau ≤ tau`
    pub cond2: bool,
}

/// Evaluates the parameter conditions for `τ = 1/12`, `θ = 1/(22n)`.
pub fn certify_parameters(n: usize) -> Result<ParameterCertificate> {
    if n < 4 {
        return Err(Error::PreconditionViolated(format!("parameter certificate needs n >= 4, got {n}")));
    }
    certify_parameters_with(n, DEFAULT_TAU, 1.0 / (22.0 * n as f64))
}

/// Same as [`certify_parameters`] for arbitrary `(τ, θ)`.
pub fn certify_parameters_with(n: usize, tau: f64, theta: f64) -> Result<ParameterCertificate> {
    let f = f_tau(tau, theta, n)?;
    let t_star = tau * tau + f;
    let half_bound = 0.5 * (1.0 - theta);
    let cond1 = t_star < half_bound;
    // Outside χ's domain the sufficient condition cannot be evaluated.
    let y_tau = match chi(t_star, theta) {
        Ok(chi) => chi * (theta * (n as f64).sqrt() + 10.0 * tau * tau + f) / (2.0 * (1.0 - theta).sqrt()),
        Err(_) => f64::INFINITY,
    };
    Ok(ParameterCertificate {
        n,
        tau,
        theta,
        f_tau: f,
        t_star,
        half_bound,
        y_tau,
        cond1,
        cond2: y_tau <= tau,
    })
}

/// Guaranteed iteration count `⌈22n · ln(max{nξ², ‖r_b⁰‖, ‖r_c⁰‖}/ε)⌉`.
pub fn iteration_bound(n: usize, xi: f64, norm_rb0: f64, norm_rc0: f64, epsilon: f64) -> u64 {
    iteration_bound_for_theta(1.0 / (22.0 * n as f64), n, xi, norm_rb0, norm_rc0, epsilon)
}

/// `⌈ln(max{nξ², ‖r_b⁰‖, ‖r_c⁰‖}/ε) / θ⌉` for an arbitrary reduction factor.
pub fn iteration_bound_for_theta(
    theta: f64,
    n: usize,
    xi: f64,
    norm_rb0: f64,
    norm_rc0: f64,
    epsilon: f64,
) -> u64 {
    let ratio = (n as f64 * xi * xi).max(norm_rb0).max(norm_rc0) / epsilon;
    if ratio <= 1.0 {
        return 0;
    }
    (ratio.ln() / theta).ceil() as u64
}

/// Everything needed to audit one completed step.
pub struct StepAudit<'a> {
    pub problem: &'a LinearProgram,
    pub state: &'a IterateState,
    pub bundle: &'a StepBundle,
    pub theta: f64,
    /// The iterate after the step, or `None` when the step lost positivity.
    pub next: Option<&'a IterateState>,
}

/// Runs every per-iteration check on one step.
pub fn audit_step(audit: &StepAudit<'_>) -> Result<Vec<LemmaCheckOutcome>> {
    let StepAudit { problem, state, bundle, theta, next } = *audit;
    let n = state.x.len();
    let (delta, omega) = (bundle.delta, bundle.omega);
    let t = delta * delta + omega;
    let mut out = Vec::with_capacity(8);

    let mut feasibility = check_strict_feasibility(delta, omega);
    feasibility.claim_held = !feasibility.precondition_held || next.is_some();
    out.push(feasibility);

    let v_plus = match next {
        Some(nx) => Some(scaled_v(&nx.x, &nx.s, nx.mu)?),
        None => None,
    };
    let lemma4_pre = t < 0.5 * (1.0 - theta);
    match (&v_plus, lemma4_pre) {
        (Some(vp), true) => {
            let bound = delta_plus_bound(delta, omega, theta, n)?;
            // A v⁺ outside the transformation domain already violates the claim.
            let observed = proximity(vp).unwrap_or(f64::INFINITY);
            out.push(LemmaCheckOutcome::compare(LemmaId::DeltaPlusBound, true, observed, bound));
            let floor = min_v_plus_bound(delta, omega, theta);
            out.push(LemmaCheckOutcome::compare(LemmaId::MinVPlusBound, true, -vp.min(), -floor));
        }
        (None, true) => {
            for id in [LemmaId::DeltaPlusBound, LemmaId::MinVPlusBound] {
                out.push(LemmaCheckOutcome {
                    lemma_id: id,
                    precondition_held: true,
                    claim_held: false,
                    lhs: f64::INFINITY,
                    rhs: 0.0,
                });
            }
        }
        (_, false) => {
            for id in [LemmaId::DeltaPlusBound, LemmaId::MinVPlusBound] {
                out.push(LemmaCheckOutcome { lemma_id: id, precondition_held: false, claim_held: true, lhs: t, rhs: 0.5 * (1.0 - theta) });
            }
        }
    }

    let q = compute_q(problem, state, bundle)?;
    let q_norm = q.norm2();
    out.push(LemmaCheckOutcome::compare(
        LemmaId::QNormBound19,
        true,
        2.0 * omega,
        q_norm * q_norm + (q_norm + 2.0 * delta).powi(2),
    ));
    let v = &bundle.v;
    let v_sq = v.dot(v);
    let bound20 = theta * (n as f64 + v_sq) / v.min();
    out.push(LemmaCheckOutcome::compare(LemmaId::QNormBound20, true, q_norm, bound20));
    match q_norm_bound_21(theta, n, delta) {
        Ok(bound21) => {
            // Both the observed norm and the intermediate bound must sit below.
            out.push(LemmaCheckOutcome::compare(LemmaId::QNormBound21, true, q_norm.max(bound20), bound21));
        }
        Err(_) => out.push(LemmaCheckOutcome {
            lemma_id: LemmaId::QNormBound21,
            precondition_held: false,
            claim_held: true,
            lhs: q_norm,
            rhs: f64::INFINITY,
        }),
    }
    out.push(LemmaCheckOutcome::compare(
        LemmaId::VNormBound,
        true,
        v_sq.sqrt(),
        (n as f64).sqrt() + 4.0 * delta,
    ));
    out.push(LemmaCheckOutcome::compare(LemmaId::MinVBound, true, -v.min(), -(1.0 - 4.0 * delta)));
    Ok(out)
}

/// Parameter certificate plus per-iteration outcomes grouped by lemma.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    #[serde(flatten)]
    pub parameters: ParameterCertificate,
    pub lemmas: BTreeMap<LemmaId, Vec<LemmaCheckOutcome>>,
}

impl CertificationReport {
    pub fn new<'a>(
        parameters: ParameterCertificate,
        outcomes: impl IntoIterator<Item = &'a LemmaCheckOutcome>,
    ) -> Self {
        let mut lemmas: BTreeMap<LemmaId, Vec<LemmaCheckOutcome>> = BTreeMap::new();
        for o in outcomes {
            lemmas.entry(o.lemma_id).or_default().push(o.clone());
        }
        CertificationReport { parameters, lemmas }
    }

    pub fn violations(&self) -> impl Iterator<Item = &LemmaCheckOutcome> {
        self.lemmas.values().flatten().filter(|o| o.is_violation())
    }
}
