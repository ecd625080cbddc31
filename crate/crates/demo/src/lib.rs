//! WebAssembly bindings for the browser demo. Each export returns a JSON
//! string; the plain functions behind them are usable natively as well.

use aet_iipm::certify::{certify_parameters, chi, f_tau, iteration_bound_for_theta, ParameterCertificate};
use aet_iipm::driver::{default_theta, solve_with_xi, Param, SolverConfig};
use aet_iipm::lp::initial_residuals;
use aet_iipm::oracle::generate_instance;
use aet_iipm::SolveStatus;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Upper limit on points returned per series.
pub const MAX_POINTS: usize = 400;

#[derive(Debug, Serialize)]
pub struct TracePoint {
    pub k: u64,
    pub delta: f64,
    pub omega: f64,
    pub gap: f64,
    pub norm_rb: f64,
    pub norm_rc: f64,
    pub min_v: f64,
}

#[derive(Debug, Serialize)]
pub struct SolveDemo {
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub theta: f64,
    pub status: SolveStatus,
    pub iterations: u64,
    pub iteration_bound: u64,
    pub objective: Option<f64>,
    pub optimal_value: f64,
    pub points: Vec<TracePoint>,
}

#[derive(Debug, Serialize)]
pub struct CurveDemo {
    pub n: usize,
    pub theta: f64,
    pub tau: Vec<f64>,
    pub f_tau: Vec<f64>,
    pub y_tau: Vec<f64>,
    pub t: Vec<f64>,
    pub chi: Vec<f64>,
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("demo output serializes")
}

fn thin<T>(items: Vec<T>, max: usize) -> Vec<T> {
    let len = items.len();
    if len <= max {
        return items;
    }
    let stride = len.div_ceil(max);
    items.into_iter().enumerate().filter(|(i, _)| i % stride == 0 || *i == len - 1).map(|(_, x)| x).collect()
}

/// Generates an instance, solves it with `θ = theta_scale / (22 n)` and
/// returns the thinned trace.
pub fn solve_demo(m: usize, n: usize, seed: u64, theta_scale: f64) -> Result<SolveDemo, String> {
    if theta_scale.is_nan() || theta_scale <= 0.0 {
        return Err(format!("theta scale must be positive, got {theta_scale}"));
    }
    let inst = generate_instance(m, n, seed, m).map_err(|e| e.to_string())?;
    let theta = (theta_scale * default_theta(n)).min(0.9);
    let config = SolverConfig { xi: Param::Fixed(inst.xi_true), theta: Param::Fixed(theta), ..SolverConfig::default() };
    let report = solve_with_xi(&inst.problem, &config, inst.xi_true).map_err(|e| e.to_string())?;
    let r0 = initial_residuals(&inst.problem, inst.xi_true);
    let bound = iteration_bound_for_theta(theta, n, inst.xi_true, r0.rb0.norm2(), r0.rc0.norm2(), config.epsilon);
    let points = report
        .trace
        .iter()
        .map(|r| TracePoint {
            k: r.k,
            delta: r.delta,
            omega: r.omega,
            gap: r.gap,
            norm_rb: r.norm_rb,
            norm_rc: r.norm_rc,
            min_v: r.min_v,
        })
        .collect();
    Ok(SolveDemo {
        m,
        n,
        seed,
        theta,
        status: report.status,
        iterations: report.iterations,
        iteration_bound: bound,
        objective: report.certificate.as_ref().map(|c| inst.problem.objective(&c.x)),
        optimal_value: inst.optimal_value(),
        points: thin(points, MAX_POINTS),
    })
}

/// Parameter certificates for `n = 4..=n_max`.
pub fn certify_scan(n_max: usize) -> Result<Vec<ParameterCertificate>, String> {
    if !(4..=10_000).contains(&n_max) {
        return Err(format!("n_max must lie in 4..=10000, got {n_max}"));
    }
    (4..=n_max).map(|n| certify_parameters(n).map_err(|e| e.to_string())).collect()
}

/// `f(τ)` and the sufficient-condition value over `τ ∈ (0, 1/4)`, and `χ(t)`
/// over its domain, for `θ = 1/(22n)`.
pub fn curves(n: usize, samples: usize) -> Result<CurveDemo, String> {
    if n < 1 || !(2..=MAX_POINTS).contains(&samples) {
        return Err(format!("need n >= 1 and 2 <= samples <= {MAX_POINTS}"));
    }
    let theta = default_theta(n);
    let mut out = CurveDemo { n, theta, tau: vec![], f_tau: vec![], y_tau: vec![], t: vec![], chi: vec![] };
    for i in 1..samples {
        let tau = 0.25 * i as f64 / samples as f64;
        let f = f_tau(tau, theta, n).map_err(|e| e.to_string())?;
        let cert = aet_iipm::certify::certify_parameters_with(n, tau, theta).map_err(|e| e.to_string())?;
        out.tau.push(tau);
        out.f_tau.push(f);
        out.y_tau.push(if cert.y_tau.is_finite() { cert.y_tau } else { f64::NAN });
    }
    let t_max = 0.5 * (1.0 - theta);
    for i in 0..samples {
        // Stop short of the pole at the right end of the domain.
        let t = 0.98 * t_max * i as f64 / (samples - 1) as f64;
        out.t.push(t);
        out.chi.push(chi(t, theta).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

#[wasm_bindgen(js_name = solveDemo)]
pub fn solve_demo_js(m: usize, n: usize, seed: u32, theta_scale: f64) -> Result<String, JsValue> {
    solve_demo(m, n, u64::from(seed), theta_scale).map(|d| to_json(&d)).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = certifyScan)]
pub fn certify_scan_js(n_max: usize) -> Result<String, JsValue> {
    certify_scan(n_max).map(|d| to_json(&d)).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = curves)]
pub fn curves_js(n: usize, samples: usize) -> Result<String, JsValue> {
    curves(n, samples).map(|d| to_json(&d)).map_err(|e| JsValue::from_str(&e))
}
