//! Standard-form LP data, the scaled all-ones starting point and the residuals
//! of the perturbed problem pair.
//!
//! The primal is `min cᵀx s.t. Ax = b, x ≥ 0`; the dual is
//! `max bᵀy s.t. Aᵀy + s = c, s ≥ 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{accurate_affine, Cholesky, Matrix, Vector};

/// A validated standard-form linear program.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemFile", into = "ProblemFile")]
pub struct LinearProgram {
    a: Matrix,
    b: Vector,
    c: Vector,
}

impl LinearProgram {
    /// Builds and validates a problem: `m ≤ n`, consistent shapes and
    /// `rank(A) = m` (Cholesky of `AAᵀ` must succeed).
    pub fn new(a: Matrix, b: Vector, c: Vector) -> Result<Self> {
        Self { a, b, c }.validate()
    }

    pub fn validate(self) -> Result<Self> {
        let (m, n) = (self.a.rows(), self.a.cols());
        if m == 0 || n == 0 {
            return Err(Error::ShapeMismatch(format!("empty constraint matrix {m}x{n}")));
        }
        if self.b.len() != m {
            return Err(Error::ShapeMismatch(format!("b has length {}, expected {m}", self.b.len())));
        }
        if self.c.len() != n {
            return Err(Error::ShapeMismatch(format!("c has length {}, expected {n}", self.c.len())));
        }
        if m > n {
            return Err(Error::RankDeficient);
        }
        Cholesky::factor(&self.a.gram()).map_err(|_| Error::RankDeficient)?;
        Ok(self)
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Vector {
        &self.b
    }

    pub fn c(&self) -> &Vector {
        &self.c
    }

    /// Number of equality constraints.
    pub fn m(&self) -> usize {
        self.a.rows()
    }

    /// Number of variables.
    pub fn n(&self) -> usize {
        self.a.cols()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.c.dot(x)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ShapeMismatch(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem serializes")
    }
}

/// On-disk problem layout: `{"m", "n", "A", "b", "c"}`, unknown fields rejected.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl TryFrom<ProblemFile> for LinearProgram {
    type Error = Error;

    fn try_from(file: ProblemFile) -> Result<Self> {
        if file.a.len() != file.m || file.a.iter().any(|row| row.len() != file.n) {
            return Err(Error::ShapeMismatch(format!(
                "\"A\" must be {} rows of {} numbers",
                file.m, file.n
            )));
        }
        let a = Matrix::new(file.m, file.n, file.a.concat())?;
        LinearProgram::new(a, Vector::new(file.b)?, Vector::new(file.c)?)
    }
}

impl From<LinearProgram> for ProblemFile {
    fn from(p: LinearProgram) -> Self {
        ProblemFile {
            m: p.m(),
            n: p.n(),
            a: p.a.to_rows(),
            b: p.b.into_vec(),
            c: p.c.into_vec(),
        }
    }
}

/// Residuals of the starting point, fixed once per problem and `ξ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualPair {
    /// `b − A(ξe)`
    pub rb0: Vector,
    /// `c − ξe`
    pub rc0: Vector,
}

pub fn initial_residuals(problem: &LinearProgram, xi: f64) -> ResidualPair {
    let x0 = Vector::filled(problem.n(), xi);
    ResidualPair {
        rb0: problem.b.axpy(-1.0, &problem.a.mul_vec(&x0)),
        rc0: problem.c.map(|c| c - xi),
    }
}

/// One iterate of the method together with its path parameters.
///
/// `x` and `s` stay strictly positive, `mu = nu·xi²` and the residuals equal
/// `nu` times the starting residuals.
#[derive(Clone, Debug, PartialEq)]
pub struct IterateState {
    pub x: Vector,
    pub y: Vector,
    pub s: Vector,
    pub mu: f64,
    pub nu: f64,
    pub xi: f64,
}

impl IterateState {
    pub fn gap(&self) -> f64 {
        self.x.dot(&self.s)
    }
}

/// `(x, y, s) = ξ(e, 0, e)` with `ν = 1` and `μ = ξ²`.
pub fn initial_state(problem: &LinearProgram, xi: f64) -> Result<IterateState> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::InvalidParameter(format!("xi must be positive, got {xi}")));
    }
    Ok(IterateState {
        x: Vector::filled(problem.n(), xi),
        y: Vector::zeros(problem.m()),
        s: Vector::filled(problem.n(), xi),
        mu: xi * xi,
        nu: 1.0,
        xi,
    })
}

/// `(b − Ax, c − Aᵀy − s)` evaluated at the iterate.
pub fn current_residuals(problem: &LinearProgram, state: &IterateState) -> (Vector, Vector) {
    let a = &problem.a;
    let rb = (0..a.rows())
        .map(|i| accurate_affine(problem.b[i], a.row(i).iter().zip(state.x.iter()).map(|(&aij, &xj)| (-aij, xj))))
        .collect();
    let rc = (0..a.cols())
        .map(|j| {
            let terms = (0..a.rows()).map(|i| (-a.get(i, j), state.y[i])).chain([(-1.0, state.s[j])]);
            accurate_affine(problem.c[j], terms)
        })
        .collect();
    (Vector::from_raw(rb), Vector::from_raw(rc))
}

/// A candidate solution with its duality gap and 2-norm residuals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionCertificate {
    pub x: Vector,
    pub y: Vector,
    pub s: Vector,
    pub gap: f64,
    pub primal_res_norm: f64,
    pub dual_res_norm: f64,
}

impl SolutionCertificate {
    pub fn from_state(problem: &LinearProgram, state: &IterateState) -> Self {
        let (rb, rc) = current_residuals(problem, state);
        SolutionCertificate {
            x: state.x.clone(),
            y: state.y.clone(),
            s: state.s.clone(),
            gap: state.gap(),
            primal_res_norm: rb.norm2(),
            dual_res_norm: rc.norm2(),
        }
    }

    pub fn max_violation(&self) -> f64 {
        self.gap.max(self.primal_res_norm).max(self.dual_res_norm)
    }

    pub fn is_epsilon_valid(&self, epsilon: f64) -> bool {
        self.max_violation() <= epsilon
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tiny() -> LinearProgram {
        LinearProgram::new(
            Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap(),
            Vector::new(vec![1.0]).unwrap(),
            Vector::new(vec![1.0, 0.0]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn duplicated_row_is_rank_deficient() {
        let err = LinearProgram::new(
            Matrix::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap(),
            Vector::new(vec![1.0, 2.0]).unwrap(),
            Vector::new(vec![1.0, 0.0]).unwrap(),
        )
        .unwrap_err();
        assert_eq!(err, Error::RankDeficient);
    }

    #[test]
    fn shape_mismatch_detected() {
        let err = LinearProgram::new(
            Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap(),
            Vector::new(vec![1.0, 2.0]).unwrap(),
            Vector::new(vec![1.0, 0.0]).unwrap(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch(_)));
    }

    #[test]
    fn random_full_rank_is_valid() {
        let mut rng = crate::oracle::Lcg::new(3);
        let a = Matrix::new(2, 4, (0..8).map(|_| rng.uniform(-1.0, 1.0)).collect()).unwrap();
        let g = a.gram();
        // 2x2 determinant as the independent rank check.
        assert!(g.get(0, 0) * g.get(1, 1) - g.get(0, 1) * g.get(1, 0) > 0.0);
        assert!(LinearProgram::new(a, Vector::zeros(2), Vector::zeros(4)).is_ok());
    }

    #[test]
    fn starting_point() {
        let p = LinearProgram::new(
            Matrix::from_rows(&[vec![1.0, 2.0, 3.0]]).unwrap(),
            Vector::new(vec![1.0]).unwrap(),
            Vector::zeros(3),
        )
        .unwrap();
        let s = initial_state(&p, 1.0).unwrap();
        assert_eq!(s.x.as_slice(), &[1.0; 3]);
        assert_eq!(s.s.as_slice(), &[1.0; 3]);
        assert_eq!((s.mu, s.nu), (1.0, 1.0));

        let s = initial_state(&tiny(), 2.0).unwrap();
        assert_eq!(s.x.as_slice(), &[2.0, 2.0]);
        assert_eq!(s.mu, 4.0);
        assert!(initial_state(&tiny(), 0.0).is_err());
    }

    #[test]
    fn residuals_of_tiny_problem() {
        let r = initial_residuals(&tiny(), 1.0);
        assert_eq!(r.rb0.as_slice(), &[-1.0]);
        assert_eq!(r.rc0.as_slice(), &[0.0, -1.0]);
    }

    #[test]
    fn feasible_start_has_zero_residuals() {
        let xi = 1.5;
        let a = Matrix::from_rows(&[vec![1.0, -2.0, 0.5]]).unwrap();
        let b = a.mul_vec(&[xi; 3]);
        let p = LinearProgram::new(a, b, Vector::filled(3, xi)).unwrap();
        let r = initial_residuals(&p, xi);
        assert!(r.rb0.norm_inf() == 0.0);
        assert!(r.rc0.norm_inf() == 0.0);
    }

    #[test]
    fn current_matches_initial_at_start() {
        let p = tiny();
        let state = initial_state(&p, 3.0).unwrap();
        let (rb, rc) = current_residuals(&p, &state);
        let r0 = initial_residuals(&p, 3.0);
        assert_eq!(rb, r0.rb0);
        assert_eq!(rc, r0.rc0);
    }

    #[test]
    fn optimal_triple_has_zero_residuals() {
        let p = tiny();
        let state = IterateState {
            x: Vector::new(vec![0.0, 1.0]).unwrap(),
            y: Vector::new(vec![0.0]).unwrap(),
            s: Vector::new(vec![1.0, 0.0]).unwrap(),
            mu: 1.0,
            nu: 1.0,
            xi: 1.0,
        };
        let (rb, rc) = current_residuals(&p, &state);
        assert_eq!(rb.norm2(), 0.0);
        assert_eq!(rc.norm2(), 0.0);
        let cert = SolutionCertificate::from_state(&p, &state);
        assert!(cert.is_epsilon_valid(1e-12));
    }

    #[test]
    fn json_round_trip_and_unknown_fields() {
        let p = tiny();
        let text = p.to_json();
        assert_eq!(LinearProgram::from_json(&text).unwrap(), p);
        let bad = r#"{"m":1,"n":2,"A":[[1,1]],"b":[1],"c":[1,0],"extra":0}"#;
        assert!(LinearProgram::from_json(bad).is_err());
        let ragged = r#"{"m":1,"n":2,"A":[[1]],"b":[1],"c":[1,0]}"#;
        assert!(LinearProgram::from_json(ragged).is_err());
    }
}
