//! Desk-scale ground truth: reproducible instances with a known optimal triple,
//! and a brute-force vertex enumeration solver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::lp::LinearProgram;

const LCG_MULTIPLIER: u64 = 6364136223846793005;
const LCG_INCREMENT: u64 = 1442695040888963407;

/// 64-bit linear congruential generator, `state ← a·state + c mod 2⁶⁴`.
///
/// The state starts at the seed and is advanced before every draw. Uniform
/// doubles take the top 53 bits of the new state.
#[derive(Clone, Debug)]
pub struct Lcg {
    state: u64,
}

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Lcg { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(LCG_MULTIPLIER).wrapping_add(LCG_INCREMENT);
        self.state
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform index in `0..len`.
    pub fn index(&mut self, len: usize) -> usize {
        ((self.next_f64() * len as f64) as usize).min(len - 1)
    }
}

/// A feasible instance whose optimal triple is known by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedInstance {
    pub problem: LinearProgram,
    pub x_star: Vector,
    pub y_star: Vector,
    pub s_star: Vector,
    /// `‖(x*; s*)‖∞`
    pub xi_true: f64,
    pub seed: u64,
}

/// Sidecar written next to a generated problem file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSidecar {
    pub x_star: Vector,
    pub y_star: Vector,
    pub s_star: Vector,
    pub xi_true: f64,
    pub seed: u64,
}

impl GeneratedInstance {
    pub fn sidecar(&self) -> InstanceSidecar {
        InstanceSidecar {
            x_star: self.x_star.clone(),
            y_star: self.y_star.clone(),
            s_star: self.s_star.clone(),
            xi_true: self.xi_true,
            seed: self.seed,
        }
    }

    pub fn optimal_value(&self) -> f64 {
        self.problem.objective(&self.x_star)
    }
}

const MAX_RANK_ATTEMPTS: usize = 100;

/// Draws a feasible standard-form instance with a strictly complementary
/// optimal pair.
///
/// Draw order: `A` row-major from `U[−1, 1]` (redrawn until full row rank), the
/// support by partial Fisher–Yates, `x*` on the support in index order from
/// `U[0.5, 2]`, `y*` from `U[−1, 1]`, then `s*` off the support from `U[0.5, 2]`.
/// Finally `b = Ax*` and `c = Aᵀy* + s*`.
pub fn generate_instance(m: usize, n: usize, seed: u64, support: usize) -> Result<GeneratedInstance> {
    if m == 0 || m >= n {
        return Err(Error::InvalidParameter(format!("generator needs 1 <= m < n, got m={m}, n={n}")));
    }
    if support > m {
        return Err(Error::InvalidParameter(format!("support {support} exceeds m = {m}")));
    }
    let mut rng = Lcg::new(seed);

    let mut a = None;
    for _ in 0..MAX_RANK_ATTEMPTS {
        let candidate = Matrix::new(m, n, (0..m * n).map(|_| rng.uniform(-1.0, 1.0)).collect())?;
        if crate::linalg::Cholesky::factor(&candidate.gram()).is_ok() {
            a = Some(candidate);
            break;
        }
    }
    let a = a.ok_or(Error::RankDeficient)?;

    let mut order: Vec<usize> = (0..n).collect();
    for i in 0..support {
        let j = i + rng.index(n - i);
        order.swap(i, j);
    }
    let mut in_support = vec![false; n];
    for &i in &order[..support] {
        in_support[i] = true;
    }

    let mut x_star = Vector::zeros(n);
    for i in 0..n {
        if in_support[i] {
            x_star[i] = rng.uniform(0.5, 2.0);
        }
    }
    let y_star = Vector::from_raw((0..m).map(|_| rng.uniform(-1.0, 1.0)).collect());
    let mut s_star = Vector::zeros(n);
    for i in 0..n {
        if !in_support[i] {
            s_star[i] = rng.uniform(0.5, 2.0);
        }
    }

    let b = a.mul_vec(&x_star);
    let c = a.tr_mul_vec(&y_star).axpy(1.0, &s_star);
    let xi_true = x_star.norm_inf().max(s_star.norm_inf());
    Ok(GeneratedInstance {
        problem: LinearProgram::new(a, b, c)?,
        x_star,
        y_star,
        s_star,
        xi_true,
        seed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    pub status: OracleStatus,
    pub x_star: Option<Vector>,
    /// Optimal value; `+∞` when infeasible and `−∞` when unbounded
    /// (both serialize as `null`).
    pub value: f64,
    pub basis: Vec<usize>,
}

pub const MAX_ENUMERATION_N: usize = 24;
pub const MAX_ENUMERATION_BASES: u64 = 1_000_000;

pub fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n.saturating_sub(k));
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i as u64 + 1))
}

/// Advances `combo` to the next k-subset of `0..n` in lexicographic order.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    for i in (0..k).rev() {
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Solves the LP by enumerating every basis of `m` columns.
///
/// Unboundedness is detected on recession directions `d = (−B⁻¹A_j, e_j)`
/// with `d ≥ 0` and `cᵀd < 0`; every extreme ray of `{Ad = 0, d ≥ 0}` has this
/// form for some basis, so the test is complete once a feasible basis exists.
pub fn vertex_solve(problem: &LinearProgram) -> Result<OracleSolution> {
    let (m, n) = (problem.m(), problem.n());
    let bases = binomial(n, m);
    if n > MAX_ENUMERATION_N || bases > MAX_ENUMERATION_BASES {
        return Err(Error::TooLarge(format!("n = {n}, {bases} candidate bases")));
    }
    let a = problem.a();
    let (b, c) = (problem.b(), problem.c());
    let c_scale = 1.0 + c.norm_inf();

    let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
    let mut ray_found = false;
    let mut combo: Vec<usize> = (0..m).collect();
    loop {
        let basis = a.select_columns(&combo);
        let mut rhs = vec![b.to_vec()];
        let nonbasic: Vec<usize> = (0..n).filter(|j| !combo.contains(j)).collect();
        rhs.extend(nonbasic.iter().map(|&j| a.column(j)));
        if let Some(sol) = solve_square_many(&basis, &rhs) {
            let xb = &sol[0];
            let size = 1.0 + xb.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            if xb.iter().all(|&v| v >= -1e-12 * size) {
                let value: f64 = combo.iter().zip(xb).map(|(&j, v)| c[j] * v).sum();
                if best.as_ref().is_none_or(|(bv, _, _)| value < *bv - 1e-12 * (1.0 + bv.abs())) {
                    let mut x = vec![0.0; n];
                    for (&j, &v) in combo.iter().zip(xb) {
                        x[j] = v.max(0.0);
                    }
                    best = Some((value, combo.clone(), x));
                }
            }
            if !ray_found {
                for (col, &j) in sol[1..].iter().zip(&nonbasic) {
                    let w_scale = 1.0 + col.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
                    if col.iter().all(|&w| w <= 1e-12 * w_scale) {
                        let reduced: f64 =
                            c[j] - combo.iter().zip(col).map(|(&i, w)| c[i] * w).sum::<f64>();
                        if reduced < -1e-9 * c_scale * w_scale {
                            ray_found = true;
                            break;
                        }
                    }
                }
            }
        }
        if !next_combination(&mut combo, n) {
            break;
        }
    }

    Ok(match best {
        None => OracleSolution {
            status: OracleStatus::Infeasible,
            x_star: None,
            value: f64::INFINITY,
            basis: Vec::new(),
        },
        Some(_) if ray_found => OracleSolution {
            status: OracleStatus::Unbounded,
            x_star: None,
            value: f64::NEG_INFINITY,
            basis: Vec::new(),
        },
        Some((value, basis, x)) => OracleSolution {
            status: OracleStatus::Optimal,
            x_star: Some(Vector::from_raw(x)),
            value,
            basis,
        },
    })
}

/// Gaussian elimination with partial pivoting against several right-hand
/// sides at once. `None` when the matrix is numerically singular.
fn solve_square_many(m: &Matrix, rhs: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.rows();
    let mut a: Vec<Vec<f64>> = m.to_rows();
    let mut cols: Vec<Vec<f64>> = rhs.to_vec();
    let scale = a.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-11 * scale {
            return None;
        }
        a.swap(col, piv);
        for r in &mut cols {
            r.swap(col, piv);
        }
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            let (upper, lower) = a.split_at_mut(row);
            for (x, &p) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *x -= f * p;
            }
            for r in &mut cols {
                r[row] -= f * r[col];
            }
        }
    }
    for r in &mut cols {
        for i in (0..n).rev() {
            let mut v = r[i];
            for k in i + 1..n {
                v -= a[i][k] * r[k];
            }
            r[i] = v / a[i][i];
        }
    }
    Some(cols)
}
