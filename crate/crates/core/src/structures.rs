//! The geometric structure preserved by each `O^k(4,R)` and its variation
//! over a lattice of `k` values.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::linalg::{self, MatN};
use crate::manifold::LatticeMap;
use crate::matgroups::{congruence_matrix, in_group, speed_of_interactions, GroupSpec, KValue, Speed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum StructureTag {
    Lorentz,
    Leibnizian,
    AntiLeibnizian,
    Riemannian,
}

impl StructureTag {
    pub fn of(k: KValue) -> Self {
        match k {
            KValue::Omega => StructureTag::Leibnizian,
            KValue::Finite(x) if x < 0.0 => StructureTag::Lorentz,
            KValue::Finite(x) if x == 0.0 => StructureTag::AntiLeibnizian,
            KValue::Finite(_) => StructureTag::Riemannian,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StructureTag::Lorentz => "lorentz",
            StructureTag::Leibnizian => "leibnizian",
            StructureTag::AntiLeibnizian => "antiLeibnizian",
            StructureTag::Riemannian => "riemannian",
        }
    }
}

/// Tensor data on `T_pM` left invariant by the group at a point.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "tag", rename_all = "camelCase")]
pub enum PointStructure {
    Lorentz { g: MatN },
    /// Time form `omega` and a metric `h` that is Euclidean on `ker omega`.
    Leibnizian { omega: Vec<f64>, h: MatN },
    /// Vector `z` and a dual metric `hstar` Euclidean on the annihilator of `z`.
    AntiLeibnizian { z: Vec<f64>, hstar: MatN },
    Riemannian { g: MatN },
}

impl PointStructure {
    pub fn tag(&self) -> StructureTag {
        match self {
            PointStructure::Lorentz { .. } => StructureTag::Lorentz,
            PointStructure::Leibnizian { .. } => StructureTag::Leibnizian,
            PointStructure::AntiLeibnizian { .. } => StructureTag::AntiLeibnizian,
            PointStructure::Riemannian { .. } => StructureTag::Riemannian,
        }
    }
}

pub fn structure_from_k(k: KValue) -> PointStructure {
    let e0 = vec![1.0, 0.0, 0.0, 0.0];
    let spatial = MatN::from_diagonal(&[0.0, 1.0, 1.0, 1.0]);
    match StructureTag::of(k) {
        StructureTag::Lorentz => PointStructure::Lorentz { g: congruence_matrix(k) },
        StructureTag::Riemannian => PointStructure::Riemannian { g: congruence_matrix(k) },
        StructureTag::Leibnizian => PointStructure::Leibnizian { omega: e0, h: spatial },
        StructureTag::AntiLeibnizian => PointStructure::AntiLeibnizian { z: e0, hstar: spatial },
    }
}

/// Orthonormal basis of the kernel of the row vector `w`, as columns.
fn kernel_basis(w: &[f64]) -> DMatrix<f64> {
    let row = DMatrix::from_row_slice(1, w.len(), w);
    let basis = linalg::nullspace(&row, 1e-12);
    DMatrix::from_columns(&basis)
}

/// `sign * w` equals `v` within `tol` for `sign = +1`, or for either sign
/// when `allow_reversal`.
fn matches_up_to_sign(v: &DVector<f64>, w: &DVector<f64>, tol: f64, allow_reversal: bool) -> bool {
    (v - w).amax() <= tol || (allow_reversal && (v + w).amax() <= tol)
}

/// Whether `a` preserves the structure `s`.
///
/// The degenerate metrics are compared only on the subspace where they
/// are meant to be Euclidean. With `pto`, `a00 > 0` is required as well.
pub fn preserves(a: &MatN, s: &PointStructure, tol: f64, pto: bool) -> Result<bool> {
    a.check_invertible()?;
    if pto && a.get(0, 0) <= 0.0 {
        return Ok(false);
    }
    match s {
        PointStructure::Lorentz { g } | PointStructure::Riemannian { g } => {
            Ok((&(&a.transpose() * g) * a - g.clone()).max_abs() <= tol)
        }
        PointStructure::Leibnizian { omega, h } => {
            let w = DVector::from_column_slice(omega);
            let pulled = a.0.transpose() * &w;
            if !matches_up_to_sign(&pulled, &w, tol, !pto) {
                return Ok(false);
            }
            let k = kernel_basis(omega);
            let defect = k.transpose() * (a.0.transpose() * &h.0 * &a.0 - &h.0) * &k;
            Ok(defect.amax() <= tol)
        }
        PointStructure::AntiLeibnizian { z, hstar } => {
            let v = DVector::from_column_slice(z);
            let pushed = &a.0 * &v;
            if !matches_up_to_sign(&pushed, &v, tol, !pto) {
                return Ok(false);
            }
            let k = kernel_basis(z);
            let defect = k.transpose() * (&a.0 * &hstar.0 * a.0.transpose() - &hstar.0) * &k;
            Ok(defect.amax() <= tol)
        }
    }
}

/// Discrete components of `O^k` not reached by the exponential map.
fn component_representatives(k: KValue) -> Vec<MatN> {
    let mut reps = vec![MatN::identity(4), MatN::from_diagonal(&[1.0, -1.0, 1.0, 1.0])];
    if !matches!(k, KValue::Finite(x) if x > 0.0) {
        reps.push(MatN::from_diagonal(&[-1.0, 1.0, 1.0, 1.0]));
        reps.push(MatN::from_diagonal(&[-1.0, -1.0, 1.0, 1.0]));
    }
    reps
}

/// Samples members of `O^k` (all components) and perturbed non-members and
/// checks that [`preserves`] agrees with [`in_group`] on every sample.
pub fn stabilizer_matches_group(k: KValue, trials: usize, seed: u64, tol: f64) -> Result<bool> {
    let structure = structure_from_k(k);
    let spec = GroupSpec::ok(k);
    let reps = component_representatives(k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..trials {
        let a = &spec.random_element(rng.gen(), 0.7) * &reps[i % reps.len()];
        if !in_group(&a, k, tol, false)? || !preserves(&a, &structure, tol, false)? {
            return Ok(false);
        }
        if in_group(&a, k, tol, true)? != preserves(&a, &structure, tol, true)? {
            return Ok(false);
        }
    }
    let mut rejected = 0;
    while rejected < trials {
        let base = spec.random_element(rng.gen(), 0.7);
        let mut b = base.clone();
        for r in 0..4 {
            for c in 0..4 {
                b.set(r, c, base.get(r, c) + rng.gen_range(-0.1..0.1));
            }
        }
        if b.check_invertible().is_err() || in_group(&b, k, tol, false)? {
            continue;
        }
        if preserves(&b, &structure, tol, false)? {
            return Ok(false);
        }
        rejected += 1;
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Region {
    pub label: usize,
    pub tag: StructureTag,
    pub sites: usize,
    /// Range of the interaction speed over the region.
    pub speed_min: Speed,
    pub speed_max: Speed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructureField {
    pub structures: LatticeMap<PointStructure>,
    pub labels: Vec<usize>,
    pub regions: Vec<Region>,
    /// Sites with a neighbour carrying a different tag.
    pub interfaces: Vec<usize>,
    /// Sites where `k = 0` or `k` changes sign towards a neighbour.
    pub zero_crossings: Vec<usize>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn speed_key(s: &Speed) -> f64 {
    match s {
        Speed::Zero => 0.0,
        Speed::Finite(c) => *c,
        Speed::Infinite => f64::INFINITY,
        Speed::Undefined => f64::NAN,
    }
}

pub fn structure_field(kfield: &LatticeMap<KValue>) -> StructureField {
    let chart = &kfield.chart;
    let n = chart.num_sites();
    let tags: Vec<StructureTag> = kfield.values.iter().map(|&k| StructureTag::of(k)).collect();

    let mut parent: Vec<usize> = (0..n).collect();
    for s in 0..n {
        for dir in 0..chart.d() {
            if let Some(t) = chart.step(s, dir, 1) {
                if tags[s] == tags[t] {
                    let (a, b) = (find(&mut parent, s), find(&mut parent, t));
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }

    // Regions are numbered by their smallest site.
    let mut label_of_root = BTreeMap::new();
    let mut labels = vec![0; n];
    for (s, slot) in labels.iter_mut().enumerate() {
        let root = find(&mut parent, s);
        let next = label_of_root.len();
        *slot = *label_of_root.entry(root).or_insert(next);
    }

    let mut regions: Vec<Region> = Vec::with_capacity(label_of_root.len());
    for s in 0..n {
        let speed = speed_of_interactions(kfield.values[s]);
        if labels[s] == regions.len() {
            regions.push(Region { label: labels[s], tag: tags[s], sites: 0, speed_min: speed, speed_max: speed });
        }
        let r = &mut regions[labels[s]];
        r.sites += 1;
        if speed_key(&speed) < speed_key(&r.speed_min) {
            r.speed_min = speed;
        }
        if speed_key(&speed) > speed_key(&r.speed_max) {
            r.speed_max = speed;
        }
    }

    let interfaces = (0..n)
        .filter(|&s| chart.neighbors(s).iter().any(|&t| tags[t] != tags[s]))
        .collect();

    let sign = |k: KValue| k.finite().map(f64::signum);
    let zero_crossings = (0..n)
        .filter(|&s| match kfield.values[s] {
            KValue::Finite(x) if x == 0.0 => true,
            k => chart.neighbors(s).iter().any(|&t| {
                matches!((sign(k), sign(kfield.values[t])), (Some(a), Some(b)) if a * b < 0.0)
            }),
        })
        .collect();

    StructureField {
        structures: kfield.map(|&k| structure_from_k(k)),
        labels,
        regions,
        interfaces,
        zero_crossings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::Chart;
    use crate::matgroups::{galilei_boost, lorentz_boost};

    const TOL: f64 = 1e-9;

    #[test]
    fn canonical_structures() {
        assert_eq!(
            structure_from_k(KValue::Finite(-1.0)),
            PointStructure::Lorentz { g: MatN::from_diagonal(&[-1.0, 1.0, 1.0, 1.0]) }
        );
        assert_eq!(
            structure_from_k(KValue::Finite(1.0)),
            PointStructure::Riemannian { g: MatN::identity(4) }
        );
        match structure_from_k(KValue::Omega) {
            PointStructure::Leibnizian { omega, h } => {
                assert_eq!(omega, vec![1.0, 0.0, 0.0, 0.0]);
                assert_eq!(h, MatN::from_diagonal(&[0.0, 1.0, 1.0, 1.0]));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn preservation_examples() {
        for k in [KValue::Finite(-1.0), KValue::Omega, KValue::Finite(0.0), KValue::Finite(1.0)] {
            assert!(preserves(&MatN::identity(4), &structure_from_k(k), TOL, true).unwrap());
        }
        assert!(preserves(&galilei_boost(0.3), &structure_from_k(KValue::Omega), TOL, true).unwrap());
        let boost = lorentz_boost(0.6, 1.0);
        assert!(!preserves(&boost, &structure_from_k(KValue::Finite(1.0)), TOL, false).unwrap());
        assert!(preserves(&boost, &structure_from_k(KValue::Finite(-1.0)), TOL, false).unwrap());
        let reversal = MatN::from_diagonal(&[-1.0, 1.0, 1.0, 1.0]);
        let gal = structure_from_k(KValue::Omega);
        assert!(preserves(&reversal, &gal, TOL, false).unwrap());
        assert!(!preserves(&reversal, &gal, TOL, true).unwrap());
    }

    #[test]
    fn stabilizers() {
        for k in [KValue::Finite(-1.0), KValue::Omega, KValue::Finite(0.0), KValue::Finite(2.0)] {
            assert!(stabilizer_matches_group(k, 100, 5, TOL).unwrap(), "k = {k}");
        }
    }

    #[test]
    fn lorentz_metric_has_one_negative_eigenvalue() {
        for k in [-0.5, -1.0, -9.0] {
            let PointStructure::Lorentz { g } = structure_from_k(KValue::Finite(k)) else { panic!() };
            let eig = g.0.symmetric_eigenvalues();
            assert_eq!(eig.iter().filter(|&&e| e < 0.0).count(), 1);
        }
    }

    #[test]
    fn sign_changing_field() {
        let chart = Chart::spanning("U", vec![16, 16], &[-1.0, -1.0], &[1.0, 1.0]).unwrap();
        let kfield = LatticeMap::from_fn(&chart, |_, x| KValue::Finite(x[0]));
        let sf = structure_field(&kfield);
        assert_eq!(sf.regions.len(), 2);
        assert_eq!(sf.regions[0].tag, StructureTag::Lorentz);
        assert_eq!(sf.regions[1].tag, StructureTag::Riemannian);
        assert_eq!(sf.regions[0].sites, 128);
        assert_eq!(sf.interfaces.len(), 32);
        for &s in &sf.interfaces {
            let i = chart.multi_index(s)[0];
            assert!(i == 7 || i == 8);
        }
        assert_eq!(sf.zero_crossings, sf.interfaces);

        let flat = structure_field(&LatticeMap::constant(&chart, KValue::Finite(-1.0)));
        assert_eq!(flat.regions.len(), 1);
        assert!(flat.interfaces.is_empty());
        let gal = structure_field(&LatticeMap::constant(&chart, KValue::Omega));
        assert_eq!(gal.regions[0].tag, StructureTag::Leibnizian);
        assert_eq!(gal.regions[0].speed_max, Speed::Infinite);
    }

    #[test]
    fn labels_do_not_depend_on_tag_order() {
        let chart = Chart::spanning("U", vec![9, 5], &[-1.0, -1.0], &[1.0, 1.0]).unwrap();
        let a = structure_field(&LatticeMap::from_fn(&chart, |_, x| KValue::Finite(x[0])));
        let b = structure_field(&LatticeMap::from_fn(&chart, |_, x| KValue::Finite(-x[0])));
        assert_eq!(a.labels, b.labels);
        // k = 0 on the middle column gives a third region.
        assert_eq!(a.regions.len(), 3);
    }
}
