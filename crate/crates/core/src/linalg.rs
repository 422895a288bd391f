//! Small dense real matrices and the matrix functions the group code needs.
//!
//! `MatN` is a thin newtype over `nalgebra::DMatrix<f64>`; decompositions
//! (LU, SVD, Schur) come from nalgebra, while the exponential, the principal
//! logarithm and the square root are evaluated here so their convergence
//! criteria are explicit.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Relative factor of the singularity threshold `|det A| <= 1e-12 * ||A||^n`.
pub const SINGULARITY_FACTOR: f64 = 1e-12;

#[derive(Clone, PartialEq)]
pub struct MatN(pub DMatrix<f64>);

impl MatN {
    pub fn zeros(n: usize) -> Self {
        MatN(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        MatN(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        MatN(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    /// Builds a square matrix from row-major entries.
    pub fn from_row_slice(n: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), n * n, "row-major data must have n*n entries");
        MatN(DMatrix::from_row_slice(n, n, data))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::ShapeMismatch("empty matrix".into()));
        }
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::ShapeMismatch(format!(
                    "expected square {n}x{n} matrix, found row of length {}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        Ok(Self::from_row_slice(n, &data))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n())
            .map(|i| (0..self.n()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    pub fn row_major(&self) -> Vec<f64> {
        self.to_rows().into_iter().flatten().collect()
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.0[(i, j)] = v;
    }

    pub fn transpose(&self) -> Self {
        MatN(self.0.transpose())
    }

    pub fn scale(&self, s: f64) -> Self {
        MatN(&self.0 * s)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }

    /// Frobenius inner product `tr(A^t B)`.
    pub fn dot(&self, other: &MatN) -> f64 {
        self.0.dot(&other.0)
    }

    /// Induced 1-norm (max column sum).
    pub fn norm1(&self) -> f64 {
        (0..self.n())
            .map(|j| self.0.column(j).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn singularity_threshold(&self) -> f64 {
        SINGULARITY_FACTOR * self.max_abs().powi(self.n() as i32)
    }

    /// Errors with `SingularMatrix` when `|det| <= 1e-12 ||A||^n`.
    pub fn check_invertible(&self) -> Result<()> {
        let det = self.determinant();
        let threshold = self.singularity_threshold();
        if !(det.abs() > threshold) {
            return Err(Error::SingularMatrix { det, threshold });
        }
        Ok(())
    }

    pub fn inverse(&self) -> Result<MatN> {
        self.check_invertible()?;
        self.0
            .clone()
            .lu()
            .try_inverse()
            .map(MatN)
            .ok_or(Error::SingularMatrix {
                det: 0.0,
                threshold: self.singularity_threshold(),
            })
    }

    pub fn mul_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.0 * v
    }

    pub fn commutator(&self, other: &MatN) -> MatN {
        MatN(&self.0 * &other.0 - &other.0 * &self.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl fmt::Debug for MatN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MatN{:?}", self.to_rows())
    }
}

impl Serialize for MatN {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatN {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        MatN::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

impl Mul for &MatN {
    type Output = MatN;
    fn mul(self, rhs: &MatN) -> MatN {
        MatN(&self.0 * &rhs.0)
    }
}

impl Mul for MatN {
    type Output = MatN;
    fn mul(self, rhs: MatN) -> MatN {
        MatN(self.0 * rhs.0)
    }
}

impl Add for &MatN {
    type Output = MatN;
    fn add(self, rhs: &MatN) -> MatN {
        MatN(&self.0 + &rhs.0)
    }
}

impl Add for MatN {
    type Output = MatN;
    fn add(self, rhs: MatN) -> MatN {
        MatN(self.0 + rhs.0)
    }
}

impl Sub for &MatN {
    type Output = MatN;
    fn sub(self, rhs: &MatN) -> MatN {
        MatN(&self.0 - &rhs.0)
    }
}

impl Sub for MatN {
    type Output = MatN;
    fn sub(self, rhs: MatN) -> MatN {
        MatN(self.0 - rhs.0)
    }
}

impl Neg for MatN {
    type Output = MatN;
    fn neg(self) -> MatN {
        MatN(-self.0)
    }
}

/// Matrix exponential by scaling and squaring with a Taylor series summed
/// until the next term no longer changes the sum.
pub fn expm(x: &MatN) -> MatN {
    let n = x.n();
    let norm = x.norm1();
    let mut squarings = 0u32;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as u32;
    }
    let scaled = x.scale(0.5f64.powi(squarings as i32));
    let mut sum = MatN::identity(n);
    let mut term = MatN::identity(n);
    for k in 1..=40 {
        term = (&term * &scaled).scale(1.0 / k as f64);
        sum = &sum + &term;
        if term.max_abs() <= f64::EPSILON * 1e-2 * sum.max_abs() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Principal square root by the Denman-Beavers iteration.
pub fn sqrtm(a: &MatN) -> Result<MatN> {
    let n = a.n();
    let mut y = a.clone();
    let mut z = MatN::identity(n);
    for _ in 0..100 {
        let yi = y.inverse()?;
        let zi = z.inverse()?;
        let y_next = (&y + &zi).scale(0.5);
        let z_next = (&z + &yi).scale(0.5);
        let delta = (&y_next - &y).max_abs();
        y = y_next;
        z = z_next;
        if delta <= 1e-15 * y.max_abs().max(1.0) {
            return Ok(y);
        }
    }
    Err(Error::LogBranchFailure(
        "square-root iteration did not converge".into(),
    ))
}

/// Rejects matrices with an eigenvalue on (or numerically on) the closed
/// negative real axis, where the principal logarithm is undefined.
fn check_principal_branch(a: &MatN) -> Result<()> {
    let eig = a.0.complex_eigenvalues();
    for l in eig.iter() {
        let modulus = l.norm();
        if modulus <= 1e-14 {
            return Err(Error::LogBranchFailure("zero eigenvalue".into()));
        }
        if l.re < 0.0 && l.im.abs() <= 1e-8 * modulus {
            return Err(Error::LogBranchFailure(format!(
                "eigenvalue {:.6} on the negative real axis",
                l.re
            )));
        }
    }
    Ok(())
}

/// Principal matrix logarithm by inverse scaling and squaring: repeated
/// square roots bring `A` near `I`, then the Gregory series
/// `log X = 2 atanh((X - I)(X + I)^-1)` is summed and rescaled.
pub fn logm(a: &MatN) -> Result<MatN> {
    let n = a.n();
    if !a.is_finite() {
        return Err(Error::LogBranchFailure("non-finite input".into()));
    }
    check_principal_branch(a)?;
    let id = MatN::identity(n);
    let mut x = a.clone();
    let mut roots = 0u32;
    while (&x - &id).norm1() > 0.25 {
        if roots >= 60 {
            return Err(Error::LogBranchFailure(
                "square roots failed to approach the identity".into(),
            ));
        }
        x = sqrtm(&x)?;
        roots += 1;
    }
    let z = &(&x - &id) * &(&x + &id).inverse()?;
    let z2 = &z * &z;
    let mut power = z.clone();
    let mut sum = z.clone();
    for k in 1..60 {
        power = &power * &z2;
        let term = power.scale(1.0 / (2 * k + 1) as f64);
        sum = &sum + &term;
        if term.max_abs() <= f64::EPSILON * 1e-2 * sum.max_abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(sum.scale(2.0 * 2f64.powi(roots as i32)))
}

/// Orthonormal basis (rows of the returned matrix) of the kernel of `m`,
/// using singular values below `rel_tol * max(1, sigma_max)`.
pub fn nullspace(m: &DMatrix<f64>, rel_tol: f64) -> Vec<DVector<f64>> {
    let cols = m.ncols();
    if cols == 0 {
        return Vec::new();
    }
    // SVD exposes a full right basis only when rows >= cols.
    let padded = if m.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma_max = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let cutoff = rel_tol * sigma_max.max(1.0);
    let mut out = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff {
            out.push(v_t.row(i).transpose());
        }
    }
    out
}

/// Numerical rank of a set of vectors.
pub fn rank(vectors: &[DVector<f64>], rel_tol: f64) -> usize {
    orthonormalize(vectors, rel_tol).len()
}

/// Orthonormal basis of the span of `vectors` (via SVD of the stacked
/// matrix), in a deterministic order.
pub fn orthonormalize(vectors: &[DVector<f64>], rel_tol: f64) -> Vec<DVector<f64>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let dim = vectors[0].len();
    debug_assert!(vectors.iter().all(|v| v.len() == dim));
    let svd = DMatrix::from_columns(vectors).svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let sigma_max = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let cutoff = rel_tol * sigma_max.max(1.0);
    let mut out = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff {
            out.push(u.column(i).into_owned());
        }
    }
    out
}

/// Flattens a matrix row-major into a vector (for linear systems over matrix space).
pub fn vec_of(m: &MatN) -> DVector<f64> {
    DVector::from_vec(m.row_major())
}

pub fn mat_of(v: &DVector<f64>, n: usize) -> MatN {
    MatN::from_row_slice(n, v.as_slice())
}

/// `exp(sum c_i X_i)` together with its partial derivatives in each `c_i`,
/// read off the upper-right block of `exp([[C, X_i], [0, C]])`.
pub fn exp_with_derivatives(basis: &[MatN], c: &[f64]) -> (MatN, Vec<MatN>) {
    let n = basis.first().map(MatN::n).unwrap_or(0);
    let mut gen = MatN::zeros(n);
    for (x, &ci) in basis.iter().zip(c) {
        gen = &gen + &x.scale(ci);
    }
    let derivs = basis
        .iter()
        .map(|x| {
            let mut big = DMatrix::zeros(2 * n, 2 * n);
            big.view_mut((0, 0), (n, n)).copy_from(&gen.0);
            big.view_mut((n, n), (n, n)).copy_from(&gen.0);
            big.view_mut((0, n), (n, n)).copy_from(&x.0);
            MatN(expm(&MatN(big)).0.view((0, n), (n, n)).into_owned())
        })
        .collect();
    (expm(&gen), derivs)
}

/// Levenberg-Marquardt minimization of `|r(x)|^2`. `eval` returns the
/// residual and its Jacobian. Returns the minimizer and its residual norm.
pub fn levenberg_marquardt(
    x0: DVector<f64>,
    max_iter: usize,
    mut eval: impl FnMut(&DVector<f64>) -> (DVector<f64>, DMatrix<f64>),
) -> (DVector<f64>, f64) {
    let mut x = x0;
    let (mut r, mut j) = eval(&x);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    for _ in 0..max_iter {
        if cost < 1e-30 {
            break;
        }
        let jt = j.transpose();
        let jtj = &jt * &j;
        let g = &jt * &r;
        if g.amax() < 1e-18 {
            break;
        }
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for i in 0..a.nrows() {
                a[(i, i)] += lambda * (1.0 + jtj[(i, i)]);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = &x + &step;
            let (rt, jt_new) = eval(&trial);
            let ct = rt.norm_squared();
            if ct.is_finite() && ct < cost {
                let small = step.amax() <= 1e-15 * (1.0 + x.amax());
                x = trial;
                r = rt;
                j = jt_new;
                cost = ct;
                lambda = (lambda * 0.3).max(1e-12);
                improved = !small;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (x, cost.sqrt())
}
