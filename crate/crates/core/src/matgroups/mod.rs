//! The `O^k(4,R)` family of observer-transition groups and the recovery of
//! `k` from measured transition matrices.
//!
//! A transition matrix between two standard observers is split as
//!
//! ```text
//!     | a00 | a_h |            | a00 | ~a_h |
//! A = |-----+-----|    A^-1 =  |-----+------|
//!     | a_v |  Â  |            | ~a_v|  Â^t |
//! ```
//!
//! and the symmetry condition fixes only the diagonal blocks of the inverse.
//! For finite `k != 0` membership forces `~a_h = a_v / k` and `~a_v = k a_h`,
//! which is what [`extract_k_candidates`] inverts. The degenerate values use
//! `diag(0,1,1,1)`: congruence on `A` itself for `k = 0`, on `A^-1` for
//! `k = omega`, both with `det^2 A = 1`.

mod group_spec;

pub use group_spec::{GroupSpec, Side};

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::MatN;

/// A point of the circle `[-inf, inf] / {+-inf}`: a finite real or `omega`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KValue {
    Finite(f64),
    Omega,
}

impl KValue {
    pub fn is_omega(&self) -> bool {
        matches!(self, KValue::Omega)
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            KValue::Finite(k) => Some(*k),
            KValue::Omega => None,
        }
    }

    /// Two finite values match when `|k1-k2| <= tol (1 + max(|k1|,|k2|))`;
    /// omega matches only omega.
    pub fn approx_eq(&self, other: &KValue, tol: f64) -> bool {
        match (self, other) {
            (KValue::Omega, KValue::Omega) => true,
            (KValue::Finite(a), KValue::Finite(b)) => {
                (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
            }
            _ => false,
        }
    }
}

impl fmt::Display for KValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KValue::Finite(k) => write!(f, "{k}"),
            KValue::Omega => write!(f, "omega"),
        }
    }
}

impl Serialize for KValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            KValue::Finite(k) => s.serialize_f64(*k),
            KValue::Omega => s.serialize_str("omega"),
        }
    }
}

impl<'de> Deserialize<'de> for KValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(k) if k.is_finite() => Ok(KValue::Finite(k)),
            Raw::Num(_) => Err(serde::de::Error::custom("k must be finite or \"omega\"")),
            Raw::Str(s) if s == "omega" => Ok(KValue::Omega),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "unknown k symbol {s:?}, expected \"omega\""
            ))),
        }
    }
}

/// `diag(k,1,1,1)` for finite `k`, `diag(0,1,1,1)` for omega.
pub fn congruence_matrix(k: KValue) -> MatN {
    let k0 = k.finite().unwrap_or(0.0);
    MatN::from_diagonal(&[k0, 1.0, 1.0, 1.0])
}

/// Block split of a 4x4 matrix into time/time, time/space, space/time and
/// space/space parts.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockDecomp {
    pub a00: f64,
    /// Top-right row.
    pub a_h: [f64; 3],
    /// Bottom-left column.
    pub a_v: [f64; 3],
    pub ahat: MatN,
}

impl BlockDecomp {
    pub fn of(a: &MatN) -> Result<Self> {
        if a.n() != 4 {
            return Err(Error::ShapeMismatch(format!(
                "block decomposition needs a 4x4 matrix, got {0}x{0}",
                a.n()
            )));
        }
        let mut ahat = MatN::zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                ahat.set(i, j, a.get(i + 1, j + 1));
            }
        }
        Ok(BlockDecomp {
            a00: a.get(0, 0),
            a_h: [a.get(0, 1), a.get(0, 2), a.get(0, 3)],
            a_v: [a.get(1, 0), a.get(2, 0), a.get(3, 0)],
            ahat,
        })
    }

    pub fn assemble(&self) -> MatN {
        let mut a = MatN::zeros(4);
        a.set(0, 0, self.a00);
        for i in 0..3 {
            a.set(0, i + 1, self.a_h[i]);
            a.set(i + 1, 0, self.a_v[i]);
            for j in 0..3 {
                a.set(i + 1, j + 1, self.ahat.get(i, j));
            }
        }
        a
    }
}

fn require_4x4(a: &MatN) -> Result<()> {
    if a.n() != 4 {
        return Err(Error::ShapeMismatch(format!(
            "transition matrices are 4x4, got {0}x{0}",
            a.n()
        )));
    }
    Ok(())
}

/// Largest violation of `(A^-1)_00 = a00` and `(A^-1)^ = Â^t`.
pub fn symmetry_deviation(a: &MatN) -> Result<f64> {
    require_4x4(a)?;
    let inv = a.inverse()?;
    let mut dev = (inv.get(0, 0) - a.get(0, 0)).abs();
    for i in 1..4 {
        for j in 1..4 {
            dev = dev.max((inv.get(i, j) - a.get(j, i)).abs());
        }
    }
    Ok(dev)
}

pub fn satisfies_symmetry(a: &MatN, tol: f64) -> Result<bool> {
    Ok(symmetry_deviation(a)? <= tol)
}

/// Membership in `O^k(4,R)`; with `pto` additionally `a00 > 0`.
pub fn in_group(a: &MatN, k: KValue, tol: f64, pto: bool) -> Result<bool> {
    require_4x4(a)?;
    a.check_invertible()?;
    if pto && !(a.get(0, 0) > 0.0) {
        return Ok(false);
    }
    GroupSpec::ok(k).contains(a, tol)
}

/// Admissible values of `k` for one transition matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "tag", content = "values", rename_all = "snake_case")]
pub enum KConstraint {
    All,
    Single(KValue),
    FiniteSet(Vec<KValue>),
    Empty,
}

impl KConstraint {
    fn from_values(values: Vec<KValue>, tol: f64) -> Self {
        let mut uniq: Vec<KValue> = Vec::new();
        for v in values {
            if !uniq.iter().any(|u| u.approx_eq(&v, tol)) {
                uniq.push(v);
            }
        }
        match uniq.len() {
            0 => KConstraint::Empty,
            1 => KConstraint::Single(uniq[0]),
            _ => KConstraint::FiniteSet(uniq),
        }
    }

    fn values(&self) -> Option<Vec<KValue>> {
        match self {
            KConstraint::All => None,
            KConstraint::Single(k) => Some(vec![*k]),
            KConstraint::FiniteSet(v) => Some(v.clone()),
            KConstraint::Empty => Some(Vec::new()),
        }
    }

    pub fn intersect(&self, other: &KConstraint, tol: f64) -> KConstraint {
        match (self.values(), other.values()) {
            (None, _) => other.clone(),
            (_, None) => self.clone(),
            (Some(a), Some(b)) => KConstraint::from_values(
                a.into_iter()
                    .filter(|x| b.iter().any(|y| x.approx_eq(y, tol)))
                    .collect(),
                tol,
            ),
        }
    }
}

fn all_small(v: &[f64; 3], tol: f64) -> bool {
    v.iter().all(|x| x.abs() <= tol)
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Least-squares `k` for the relation `num = k * den` over components with
/// `|den| > tol`, together with whether every such component agrees.
fn ratio_estimate(num: &[f64; 3], den: &[f64; 3], tol: f64, scale: f64) -> Option<(f64, bool)> {
    let usable: Vec<usize> = (0..3).filter(|&i| den[i].abs() > tol).collect();
    if usable.is_empty() {
        return None;
    }
    let (mut nd, mut dd) = (0.0, 0.0);
    for &i in &usable {
        nd += num[i] * den[i];
        dd += den[i] * den[i];
    }
    let k = nd / dd;
    let slack = tol * (1.0 + k.abs()) * scale;
    let consistent = (0..3).all(|i| (num[i] - k * den[i]).abs() <= slack);
    Some((k, consistent))
}

/// Candidate values of `k` compatible with one transition matrix.
pub fn extract_k_candidates(a: &MatN, tol: f64) -> Result<KConstraint> {
    let deviation = symmetry_deviation(a)?;
    if deviation > tol {
        return Err(Error::SymmetryViolated { deviation });
    }
    let d = BlockDecomp::of(a)?;
    let di = BlockDecomp::of(&a.inverse()?)?;
    let horizontal_zero = all_small(&d.a_h, tol) && all_small(&di.a_h, tol);
    let vertical_zero = all_small(&d.a_v, tol) && all_small(&di.a_v, tol);

    let confirm = |ks: Vec<KValue>| -> Result<KConstraint> {
        let mut ok = Vec::new();
        for k in ks {
            if in_group(a, k, tol, false)? {
                ok.push(k);
            }
        }
        Ok(KConstraint::from_values(ok, tol))
    };

    if horizontal_zero && vertical_zero {
        return Ok(KConstraint::All);
    }
    if horizontal_zero {
        return confirm(vec![KValue::Omega]);
    }
    if vertical_zero {
        return confirm(vec![KValue::Finite(0.0)]);
    }

    let scale = a.max_abs().max(1.0);
    // ~a_v = k a_h and a_v = k ~a_h
    let first = ratio_estimate(&di.a_v, &d.a_h, tol, scale);
    let second = ratio_estimate(&d.a_v, &di.a_h, tol, scale);
    let candidates = match (first, second) {
        (Some((k1, c1)), Some((k2, c2))) => {
            if !(c1 && c2) {
                return Ok(KConstraint::Empty);
            }
            let joint = (dot3(&di.a_v, &d.a_h) + dot3(&d.a_v, &di.a_h))
                / (dot3(&d.a_h, &d.a_h) + dot3(&di.a_h, &di.a_h));
            if KValue::Finite(k1).approx_eq(&KValue::Finite(k2), tol * scale) {
                vec![KValue::Finite(joint)]
            } else {
                vec![KValue::Finite(k1), KValue::Finite(k2)]
            }
        }
        (Some((k, c)), None) | (None, Some((k, c))) => {
            if !c {
                return Ok(KConstraint::Empty);
            }
            vec![KValue::Finite(k)]
        }
        (None, None) => Vec::new(),
    };
    confirm(candidates)
}

/// Outcome of classifying a set of transition matrices at one event.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum ClassifyResult {
    Unique { k: KValue },
    Arbitrary,
    Inconsistent { diagnostic: String },
    Residual { candidates: Vec<KValue> },
}

impl ClassifyResult {
    pub fn group_name(&self) -> &'static str {
        match self {
            ClassifyResult::Unique { k } => group_name(*k),
            ClassifyResult::Arbitrary => "{1}xO(3)",
            ClassifyResult::Inconsistent { .. } => "none",
            ClassifyResult::Residual { .. } => "residual",
        }
    }
}

pub fn group_name(k: KValue) -> &'static str {
    match k {
        KValue::Omega => "Galilei",
        KValue::Finite(x) if x == 0.0 => "dual Galilei",
        KValue::Finite(x) if x < 0.0 => "Lorentz-conjugate",
        KValue::Finite(_) => "orthogonal-conjugate",
    }
}

pub fn classify(matrices: &[MatN], tol: f64) -> ClassifyResult {
    if matrices.is_empty() {
        return ClassifyResult::Inconsistent {
            diagnostic: "no transition matrices given".into(),
        };
    }
    let mut acc = KConstraint::All;
    for (i, a) in matrices.iter().enumerate() {
        match extract_k_candidates(a, tol) {
            Ok(c) => acc = acc.intersect(&c, tol),
            Err(e) => {
                return ClassifyResult::Inconsistent {
                    diagnostic: format!("matrix {i}: {e}"),
                }
            }
        }
        if acc == KConstraint::Empty {
            return ClassifyResult::Inconsistent {
                diagnostic: format!("no common k after matrix {i}"),
            };
        }
    }
    match acc {
        KConstraint::All => ClassifyResult::Arbitrary,
        KConstraint::Single(k) => {
            for (i, a) in matrices.iter().enumerate() {
                if !in_group(a, k, tol, false).unwrap_or(false) {
                    return ClassifyResult::Inconsistent {
                        diagnostic: format!("matrix {i} is not in O^{k}"),
                    };
                }
            }
            ClassifyResult::Unique { k }
        }
        KConstraint::FiniteSet(candidates) => ClassifyResult::Residual { candidates },
        KConstraint::Empty => ClassifyResult::Inconsistent {
            diagnostic: "no common k".into(),
        },
    }
}

/// Supremum of relative speeds between standard observers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "tag", content = "c", rename_all = "snake_case")]
pub enum Speed {
    Finite(f64),
    Infinite,
    Zero,
    Undefined,
}

impl fmt::Display for Speed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Speed::Finite(c) => write!(f, "c={c}"),
            Speed::Infinite => write!(f, "c=infinite"),
            Speed::Zero => write!(f, "c=0"),
            Speed::Undefined => write!(f, "c undefined"),
        }
    }
}

pub fn speed_of_interactions(k: KValue) -> Speed {
    match k {
        KValue::Omega => Speed::Infinite,
        KValue::Finite(x) if x == 0.0 => Speed::Zero,
        KValue::Finite(x) if x < 0.0 => Speed::Finite((-x).sqrt()),
        KValue::Finite(_) => Speed::Undefined,
    }
}

/// Boost in the t-x plane with speed `v` for interaction speed `c`
/// (a member of `O^(-c^2)`).
pub fn lorentz_boost(v: f64, c: f64) -> MatN {
    let gamma = 1.0 / (1.0 - (v / c).powi(2)).sqrt();
    let mut a = MatN::identity(4);
    a.set(0, 0, gamma);
    a.set(1, 1, gamma);
    a.set(0, 1, -gamma * v / (c * c));
    a.set(1, 0, -gamma * v);
    a
}

/// Galilei boost `t' = t, x' = x - v t`.
pub fn galilei_boost(v: f64) -> MatN {
    let mut a = MatN::identity(4);
    a.set(1, 0, -v);
    a
}

/// `diag(1, R)` with `R` a rotation about the z axis.
pub fn spatial_rotation_z(theta: f64) -> MatN {
    let mut a = MatN::identity(4);
    a.set(1, 1, theta.cos());
    a.set(1, 2, -theta.sin());
    a.set(2, 1, theta.sin());
    a.set(2, 2, theta.cos());
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-9;

    #[test]
    fn congruence_matrices() {
        assert_eq!(congruence_matrix(KValue::Finite(-1.0)), MatN::from_diagonal(&[-1.0, 1.0, 1.0, 1.0]));
        assert_eq!(congruence_matrix(KValue::Finite(0.0)), MatN::from_diagonal(&[0.0, 1.0, 1.0, 1.0]));
        assert_eq!(congruence_matrix(KValue::Omega), MatN::from_diagonal(&[0.0, 1.0, 1.0, 1.0]));
    }

    #[test]
    fn symmetry_examples() {
        assert!(satisfies_symmetry(&MatN::identity(4), TOL).unwrap());
        assert!(satisfies_symmetry(&spatial_rotation_z(0.7), TOL).unwrap());
        assert!(!satisfies_symmetry(&MatN::from_diagonal(&[2.0, 1.0, 1.0, 1.0]), TOL).unwrap());
    }

    #[test]
    fn symmetry_rejects_singular() {
        let a = MatN::from_diagonal(&[1.0, 1.0, 1.0, 0.0]);
        assert!(matches!(satisfies_symmetry(&a, TOL), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn membership_examples() {
        let boost = MatN::from_row_slice(
            4,
            &[1.25, -0.75, 0., 0., -0.75, 1.25, 0., 0., 0., 0., 1., 0., 0., 0., 0., 1.],
        );
        assert!(in_group(&boost, KValue::Finite(-1.0), TOL, false).unwrap());
        assert!(in_group(&galilei_boost(0.3), KValue::Omega, TOL, false).unwrap());

        let mut shear = MatN::identity(4);
        shear.set(0, 1, 0.5);
        assert!(in_group(&shear, KValue::Finite(0.0), TOL, false).unwrap());
        assert!(!in_group(&shear, KValue::Omega, TOL, false).unwrap());

        for k in [KValue::Finite(-3.0), KValue::Finite(0.0), KValue::Omega, KValue::Finite(5.0)] {
            assert!(in_group(&MatN::identity(4), k, TOL, false).unwrap());
        }
    }

    #[test]
    fn pto_rejects_time_reversal() {
        let t = MatN::from_diagonal(&[-1.0, 1.0, 1.0, 1.0]);
        assert!(in_group(&t, KValue::Finite(-1.0), TOL, false).unwrap());
        assert!(!in_group(&t, KValue::Finite(-1.0), TOL, true).unwrap());
    }

    #[test]
    fn extraction_examples() {
        assert_eq!(extract_k_candidates(&spatial_rotation_z(0.4), TOL).unwrap(), KConstraint::All);
        match extract_k_candidates(&lorentz_boost(0.6, 1.0), TOL).unwrap() {
            KConstraint::Single(KValue::Finite(k)) => assert!((k + 1.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            extract_k_candidates(&galilei_boost(0.3), TOL).unwrap(),
            KConstraint::Single(KValue::Omega)
        );
        let mut shear = MatN::identity(4);
        shear.set(0, 2, -0.4);
        assert_eq!(
            extract_k_candidates(&shear, TOL).unwrap(),
            KConstraint::Single(KValue::Finite(0.0))
        );
    }

    #[test]
    fn extraction_rejects_asymmetric_input() {
        let a = MatN::from_diagonal(&[2.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            extract_k_candidates(&a, TOL),
            Err(Error::SymmetryViolated { .. })
        ));
    }

    #[test]
    fn block_decomposition_reassembles() {
        let a = MatN::from_row_slice(4, &(0..16).map(|x| x as f64 * 0.3 - 1.0).collect::<Vec<_>>());
        assert_eq!(BlockDecomp::of(&a).unwrap().assemble(), a);
    }

    #[test]
    fn classification_examples() {
        let boosts = [lorentz_boost(0.6, 1.0), lorentz_boost(0.3, 1.0)];
        match classify(&boosts, TOL) {
            ClassifyResult::Unique { k: KValue::Finite(k) } => assert!((k + 1.0).abs() < 1e-9),
            other => panic!("unexpected {other:?}"),
        }
        let rotations = [MatN::identity(4), spatial_rotation_z(0.3), spatial_rotation_z(-1.2)];
        assert_eq!(classify(&rotations, TOL), ClassifyResult::Arbitrary);
        let mixed = [lorentz_boost(0.6, 1.0), galilei_boost(0.3)];
        assert!(matches!(classify(&mixed, TOL), ClassifyResult::Inconsistent { .. }));
        assert!(matches!(classify(&[], TOL), ClassifyResult::Inconsistent { .. }));
    }

    #[test]
    fn lorentz_boost_with_other_speed() {
        let r = classify(&[lorentz_boost(1.1, 2.0)], TOL);
        match r {
            ClassifyResult::Unique { k: KValue::Finite(k) } => assert!((k + 4.0).abs() < 1e-9),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn constraint_intersections() {
        let a = KConstraint::FiniteSet(vec![KValue::Finite(1.0), KValue::Finite(2.0), KValue::Finite(3.0)]);
        let b = KConstraint::FiniteSet(vec![KValue::Finite(2.0), KValue::Finite(3.0), KValue::Omega]);
        assert_eq!(
            a.intersect(&b, TOL),
            KConstraint::FiniteSet(vec![KValue::Finite(2.0), KValue::Finite(3.0)])
        );
        assert_eq!(a.intersect(&KConstraint::All, TOL), a);
        assert_eq!(
            KConstraint::Single(KValue::Omega).intersect(&b, TOL),
            KConstraint::Single(KValue::Omega)
        );
        assert_eq!(KConstraint::Single(KValue::Omega).intersect(&a, TOL), KConstraint::Empty);
    }

    #[test]
    fn speeds() {
        assert_eq!(speed_of_interactions(KValue::Finite(-9.0)), Speed::Finite(3.0));
        assert_eq!(speed_of_interactions(KValue::Omega), Speed::Infinite);
        assert_eq!(speed_of_interactions(KValue::Finite(0.0)), Speed::Zero);
        assert_eq!(speed_of_interactions(KValue::Finite(4.0)), Speed::Undefined);
    }

    #[test]
    fn kvalue_json() {
        let ks: Vec<KValue> = serde_json::from_str(r#"[-1.5, "omega", 0]"#).unwrap();
        assert_eq!(ks, vec![KValue::Finite(-1.5), KValue::Omega, KValue::Finite(0.0)]);
        assert_eq!(serde_json::to_string(&ks).unwrap(), r#"[-1.5,"omega",0.0]"#);
        assert!(serde_json::from_str::<KValue>(r#""infinity""#).is_err());
    }
}
