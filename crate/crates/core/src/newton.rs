//! Search directions from the transformed centering equation `ψ(xs/μ) = ψ(√(xs/μ))`
//! with `ψ(t) = t²`.
//!
//! With `v = √(xs/μ)` the Newton system reads
//!
//! ```text
//! A Δx         = θ ν r_b⁰
//! Aᵀ Δy + Δs   = θ ν r_c⁰
//! s Δx + x Δs  = μ v p_v,      p_v = (v − v³) / (2v² − e)
//! ```
//!
//! and is reduced to the `m × m` normal equations `A diag(x/s) Aᵀ Δy = …`.

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Vector};
use crate::lp::{current_residuals, IterateState, LinearProgram, ResidualPair};

/// The transformation is only defined for `v > 1/√2`; anything within this
/// margin of the boundary is rejected.
pub const DOMAIN_GUARD: f64 = 1e-9;

/// Iterative-refinement passes on the normal equations.
const REFINEMENT_STEPS: usize = 2;

pub fn domain_floor() -> f64 {
    std::f64::consts::FRAC_1_SQRT_2 + DOMAIN_GUARD
}

/// `v = √(xs/μ)`.
pub fn scaled_v(x: &[f64], s: &[f64], mu: f64) -> Result<Vector> {
    if !(mu > 0.0) {
        return Err(Error::InvalidParameter(format!("mu must be positive, got {mu}")));
    }
    let mut v = Vec::with_capacity(x.len());
    for (i, (&xi, &si)) in x.iter().zip(s).enumerate() {
        if !(xi > 0.0) {
            return Err(Error::DomainViolation { index: i, value: xi });
        }
        if !(si > 0.0) {
            return Err(Error::DomainViolation { index: i, value: si });
        }
        v.push((xi * si / mu).sqrt());
    }
    Ok(Vector::from_raw(v))
}

fn check_domain(v: &[f64]) -> Result<()> {
    let floor = domain_floor();
    match v.iter().position(|&vi| !(vi > floor)) {
        Some(index) => Err(Error::DomainViolation { index, value: v[index] }),
        None => Ok(()),
    }
}

/// `p_v = (v − v³) / (2v² − e)`, componentwise.
pub fn p_vector(v: &[f64]) -> Result<Vector> {
    check_domain(v)?;
    Ok(Vector::from_raw(
        v.iter().map(|&t| (t - t * t * t) / (2.0 * t * t - 1.0)).collect(),
    ))
}

/// `δ(v) = ‖p_v‖ / 2`.
pub fn proximity(v: &[f64]) -> Result<f64> {
    Ok(p_vector(v)?.norm2() / 2.0)
}

/// Everything one iteration computes before taking the step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepBundle {
    pub dx_raw: Vector,
    pub dy_raw: Vector,
    pub ds_raw: Vector,
    pub v: Vector,
    pub p_v: Vector,
    /// `vΔx/x`
    pub d_x: Vector,
    /// `vΔs/s`
    pub d_s: Vector,
    /// `d_x − d_s`
    pub q_v: Vector,
    pub delta: f64,
    /// `(‖d_x‖² + ‖d_s‖²) / 2`
    pub omega: f64,
}

/// Computes the full Newton direction at `state` for barrier reduction `theta`.
pub fn newton_directions(
    problem: &LinearProgram,
    state: &IterateState,
    residuals: &ResidualPair,
    theta: f64,
) -> Result<StepBundle> {
    let a = problem.a();
    let (x, s) = (&state.x, &state.s);
    let v = scaled_v(x, s, state.mu)?;
    let p_v = p_vector(&v)?;

    // Right-hand side of the centering row, formed in scaled space.
    let center = v.zip_map(&p_v, |vi, pi| state.mu * vi * pi);
    let ratio = x.zip_map(s, |xi, si| xi / si);
    // θν·r0 written as (current residual) − (1−θ)ν·r0 so rounding drift is corrected each step.
    let (rb, rc) = current_residuals(problem, state);
    let target = (1.0 - theta) * state.nu;
    let tb = rb.axpy(-target, &residuals.rb0);
    let tc = rc.axpy(-target, &residuals.rc0);

    let normal = Cholesky::factor(&a.weighted_gram(&ratio))?;
    let rhs = tb
        .axpy(-1.0, &a.mul_vec(&center.zip_map(s, |r, si| r / si)))
        .axpy(1.0, &a.mul_vec(&ratio.zip_map(&tc, |d, c| d * c)));
    let mut dy = normal.solve(&rhs);

    let back_substitute = |dy: &Vector| {
        let ds = tc.axpy(-1.0, &a.tr_mul_vec(dy));
        let dx = Vector::from_raw(
            (0..x.len()).map(|i| (center[i] - x[i] * ds[i]) / s[i]).collect(),
        );
        (dx, ds)
    };
    let (mut dx, mut ds) = back_substitute(&dy);
    // The primal row error is exactly the normal-equation residual, so refine on it.
    for _ in 0..REFINEMENT_STEPS {
        let r = tb.axpy(-1.0, &a.mul_vec(&dx));
        if r.norm_inf() == 0.0 {
            break;
        }
        dy = dy.axpy(1.0, &normal.solve(&r));
        (dx, ds) = back_substitute(&dy);
    }

    if !(dx.is_finite() && dy.is_finite() && ds.is_finite()) {
        return Err(Error::NonFinite("Newton direction".into()));
    }

    let d_x = Vector::from_raw((0..x.len()).map(|i| v[i] * dx[i] / x[i]).collect());
    let d_s = Vector::from_raw((0..x.len()).map(|i| v[i] * ds[i] / s[i]).collect());
    let q_v = d_x.axpy(-1.0, &d_s);
    let delta = p_v.norm2() / 2.0;
    let omega = (d_x.dot(&d_x) + d_s.dot(&d_s)) / 2.0;
    Ok(StepBundle { dx_raw: dx, dy_raw: dy, ds_raw: ds, v, p_v, d_x, d_s, q_v, delta, omega })
}

/// Takes the full step and shrinks `μ` and `ν` by `1 − θ`.
pub fn full_step(state: &IterateState, bundle: &StepBundle, theta: f64) -> Result<IterateState> {
    let x = state.x.axpy(1.0, &bundle.dx_raw);
    let s = state.s.axpy(1.0, &bundle.ds_raw);
    if let Some(index) = x.iter().zip(s.iter()).position(|(&xi, &si)| !(xi > 0.0 && si > 0.0)) {
        return Err(Error::StepInfeasible { index });
    }
    Ok(IterateState {
        x,
        y: state.y.axpy(1.0, &bundle.dy_raw),
        s,
        mu: (1.0 - theta) * state.mu,
        nu: (1.0 - theta) * state.nu,
        xi: state.xi,
    })
}
