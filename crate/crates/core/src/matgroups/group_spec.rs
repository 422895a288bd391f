use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{congruence_matrix, KValue};
use crate::error::{Error, Result};
use crate::linalg::{self, expm, logm, mat_of, vec_of, MatN};

/// Singular-value cutoff used for every algebra/nullspace computation.
const ALGEBRA_RTOL: f64 = 1e-9;

/// Which matrix the congruence datum is applied to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `A^t S A = S`
    Direct,
    /// `A^-1 S A^-t = S`
    Inverse,
}

/// A closed matrix group, described by an invariant datum or by generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", try_from = "GroupSpecDoc")]
pub enum GroupSpec {
    Congruence {
        s: MatN,
        side: Side,
        det_unit: bool,
    },
    /// Identity component generated by a Lie-algebra basis.
    Generators(Vec<MatN>),
    /// `q G q^-1`.
    Conjugated { base: Box<GroupSpec>, q: MatN },
    /// `{I}` in dimension `n`.
    Trivial { n: usize },
}

/// Accepted JSON forms, including the `{"ok": k}` shorthand for `O^k(4,R)`.
#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum GroupSpecDoc {
    Congruence {
        s: MatN,
        #[serde(default = "direct")]
        side: Side,
        #[serde(default)]
        det_unit: bool,
    },
    Generators(Vec<MatN>),
    Conjugated {
        base: Box<GroupSpec>,
        q: MatN,
    },
    Trivial {
        n: usize,
    },
    Ok(KValue),
}

fn direct() -> Side {
    Side::Direct
}

impl TryFrom<GroupSpecDoc> for GroupSpec {
    type Error = String;

    fn try_from(doc: GroupSpecDoc) -> std::result::Result<Self, String> {
        let spec = match doc {
            GroupSpecDoc::Congruence { s, side, det_unit } => GroupSpec::Congruence { s, side, det_unit },
            GroupSpecDoc::Generators(g) => GroupSpec::Generators(g),
            GroupSpecDoc::Conjugated { base, q } => GroupSpec::Conjugated { base, q },
            GroupSpecDoc::Trivial { n } => GroupSpec::Trivial { n },
            GroupSpecDoc::Ok(k) => GroupSpec::ok(k),
        };
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }
}

impl GroupSpec {
    /// `O^k(4,R)`.
    pub fn ok(k: KValue) -> Self {
        match k {
            KValue::Finite(x) => GroupSpec::Congruence {
                s: congruence_matrix(k),
                side: Side::Direct,
                det_unit: x == 0.0,
            },
            KValue::Omega => GroupSpec::Congruence {
                s: congruence_matrix(k),
                side: Side::Inverse,
                det_unit: true,
            },
        }
    }

    /// `{1} x SO(3)` inside `GL(4)`, given by the three spatial rotation generators.
    pub fn spatial_rotations() -> Self {
        let mut gens = Vec::new();
        for (i, j) in [(2, 3), (3, 1), (1, 2)] {
            let mut x = MatN::zeros(4);
            x.set(i, j, -1.0);
            x.set(j, i, 1.0);
            gens.push(x);
        }
        GroupSpec::Generators(gens)
    }

    /// `SO(2)` acting on `R^2`.
    pub fn so2() -> Self {
        GroupSpec::Generators(vec![MatN::from_row_slice(2, &[0.0, -1.0, 1.0, 0.0])])
    }

    /// Orthogonal group of a symmetric form, `det^2 = 1` implied.
    pub fn orthogonal(s: MatN) -> Self {
        GroupSpec::Congruence { s, side: Side::Direct, det_unit: false }
    }

    pub fn conjugated(self, q: MatN) -> Self {
        GroupSpec::Conjugated { base: Box::new(self), q }
    }

    /// Matrix size the group acts on.
    pub fn dim(&self) -> usize {
        match self {
            GroupSpec::Congruence { s, .. } => s.n(),
            GroupSpec::Generators(g) => g.first().map(MatN::n).unwrap_or(0),
            GroupSpec::Conjugated { q, .. } => q.n(),
            GroupSpec::Trivial { n } => *n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GroupSpec::Congruence { s, .. } => {
                if (s - &s.transpose()).max_abs() > 1e-12 * s.max_abs().max(1.0) {
                    return Err(Error::InvalidInput("congruence datum must be symmetric".into()));
                }
            }
            GroupSpec::Generators(g) => {
                if g.is_empty() {
                    return Err(Error::InvalidInput(
                        "generator list is empty; use a zero-dimensional congruence group instead".into(),
                    ));
                }
                let n = g[0].n();
                if g.iter().any(|x| x.n() != n) {
                    return Err(Error::ShapeMismatch("generators of different sizes".into()));
                }
                let vs: Vec<DVector<f64>> = g.iter().map(vec_of).collect();
                if linalg::rank(&vs, ALGEBRA_RTOL) != g.len() {
                    return Err(Error::InvalidInput("generators are linearly dependent".into()));
                }
            }
            GroupSpec::Conjugated { base, q } => {
                base.validate()?;
                if q.n() != base.dim() {
                    return Err(Error::ShapeMismatch("conjugator size differs from base group".into()));
                }
                q.check_invertible()?;
            }
            GroupSpec::Trivial { n } => {
                if *n == 0 {
                    return Err(Error::InvalidInput("trivial group needs a positive dimension".into()));
                }
            }
        }
        Ok(())
    }

    /// Membership test within `tol` (max-entry norm).
    ///
    /// For generator-described groups this tests the exponential image of
    /// the identity component through the principal logarithm; elements
    /// with eigenvalues on the negative real axis are reported as
    /// non-members.
    pub fn contains(&self, a: &MatN, tol: f64) -> Result<bool> {
        if a.n() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "matrix is {0}x{0}, group acts on dimension {1}",
                a.n(),
                self.dim()
            )));
        }
        a.check_invertible()?;
        match self {
            GroupSpec::Congruence { s, side, det_unit } => {
                let defect = match side {
                    Side::Direct => (&(&a.transpose() * s) * a - s.clone()).max_abs(),
                    Side::Inverse => {
                        let b = a.inverse()?;
                        (&(&b * s) * &b.transpose() - s.clone()).max_abs()
                    }
                };
                if defect > tol {
                    return Ok(false);
                }
                if *det_unit {
                    let det = a.determinant();
                    if (det * det - 1.0).abs() > tol {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            GroupSpec::Generators(_) => {
                let log = match logm(a) {
                    Ok(l) => l,
                    Err(_) => return Ok(false),
                };
                let basis = self.lie_algebra_basis();
                let mut proj = MatN::zeros(a.n());
                for x in &basis {
                    proj = &proj + &x.scale(x.dot(&log));
                }
                Ok((&log - &proj).max_abs() <= tol * (1.0 + log.max_abs()))
            }
            GroupSpec::Conjugated { base, q } => {
                let qi = q.inverse()?;
                base.contains(&(&(&qi * a) * q), tol)
            }
            GroupSpec::Trivial { n } => Ok((a - &MatN::identity(*n)).max_abs() <= tol),
        }
    }

    /// Frobenius-orthonormal basis of the Lie algebra.
    pub fn lie_algebra_basis(&self) -> Vec<MatN> {
        match self {
            GroupSpec::Congruence { s, side, det_unit } => congruence_algebra(s, *side, *det_unit),
            GroupSpec::Generators(g) => orthonormal_matrices(g),
            GroupSpec::Conjugated { base, q } => {
                let qi = match q.inverse() {
                    Ok(qi) => qi,
                    Err(_) => return Vec::new(),
                };
                let conj: Vec<MatN> = base
                    .lie_algebra_basis()
                    .iter()
                    .map(|x| &(q * x) * &qi)
                    .collect();
                orthonormal_matrices(&conj)
            }
            GroupSpec::Trivial { .. } => Vec::new(),
        }
    }

    pub fn algebra_dimension(&self) -> usize {
        self.lie_algebra_basis().len()
    }

    /// Row covectors `nu` with `nu X = 0` for every algebra element; `nu . c`
    /// is constant on identity-component orbits.
    pub fn invariant_covectors(&self) -> Vec<DVector<f64>> {
        let n = self.dim();
        let basis = self.lie_algebra_basis();
        if basis.is_empty() {
            return (0..n).map(|i| DVector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 })).collect();
        }
        let mut m = DMatrix::zeros(n * basis.len(), n);
        for (b, x) in basis.iter().enumerate() {
            let xt = x.transpose();
            m.view_mut((b * n, 0), (n, n)).copy_from(&xt.0);
        }
        linalg::nullspace(&m, ALGEBRA_RTOL)
    }

    /// Symmetric forms `S` with `X^t S + S X = 0` for every algebra element.
    pub fn invariant_forms(&self) -> Vec<MatN> {
        let n = self.dim();
        let sym_basis = symmetric_basis(n);
        let basis = self.lie_algebra_basis();
        if basis.is_empty() {
            return sym_basis;
        }
        let mut m = DMatrix::zeros(n * n * basis.len(), sym_basis.len());
        for (c, e) in sym_basis.iter().enumerate() {
            for (b, x) in basis.iter().enumerate() {
                let img = &(&x.transpose() * e) + &(e * x);
                for (r, v) in img.row_major().into_iter().enumerate() {
                    m[(b * n * n + r, c)] = v;
                }
            }
        }
        linalg::nullspace(&m, ALGEBRA_RTOL)
            .into_iter()
            .map(|coef| {
                let mut s = MatN::zeros(n);
                for (c, e) in sym_basis.iter().enumerate() {
                    s = &s + &e.scale(coef[c]);
                }
                s
            })
            .collect()
    }

    /// `exp(sum c_i X_i)` with `c_i` uniform in `[-scale, scale]` from `seed`.
    pub fn random_element(&self, seed: u64, scale: f64) -> MatN {
        let basis = self.lie_algebra_basis();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = MatN::zeros(self.dim());
        if scale > 0.0 {
            for b in &basis {
                let c: f64 = rng.gen_range(-scale..=scale);
                x = &x + &b.scale(c);
            }
        }
        expm(&x)
    }

    /// Least-squares coordinates of `x` in the orthonormal algebra basis.
    pub fn algebra_coordinates(basis: &[MatN], x: &MatN) -> Vec<f64> {
        basis.iter().map(|b| b.dot(x)).collect()
    }
}

fn symmetric_basis(n: usize) -> Vec<MatN> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            let mut e = MatN::zeros(n);
            e.set(i, j, 1.0);
            e.set(j, i, 1.0);
            out.push(e);
        }
    }
    out
}

fn orthonormal_matrices(ms: &[MatN]) -> Vec<MatN> {
    if ms.is_empty() {
        return Vec::new();
    }
    let n = ms[0].n();
    let vs: Vec<DVector<f64>> = ms.iter().map(vec_of).collect();
    linalg::orthonormalize(&vs, ALGEBRA_RTOL)
        .iter()
        .map(|v| mat_of(v, n))
        .collect()
}

/// Kernel of the linearized congruence condition (plus `tr X = 0` when
/// `det_unit`), as matrices.
fn congruence_algebra(s: &MatN, side: Side, det_unit: bool) -> Vec<MatN> {
    let n = s.n();
    let unknowns = n * n;
    let rows = unknowns + usize::from(det_unit);
    let mut m = DMatrix::zeros(rows, unknowns);
    for c in 0..unknowns {
        let mut e = MatN::zeros(n);
        e.set(c / n, c % n, 1.0);
        let img = match side {
            Side::Direct => &(&e.transpose() * s) + &(s * &e),
            Side::Inverse => &(&e * s) + &(s * &e.transpose()),
        };
        for (r, v) in img.row_major().into_iter().enumerate() {
            m[(r, c)] = v;
        }
        if det_unit && c / n == c % n {
            m[(unknowns, c)] = 1.0;
        }
    }
    linalg::nullspace(&m, ALGEBRA_RTOL)
        .iter()
        .map(|v| mat_of(v, n))
        .collect()
}
