//! Frame bundles whose structural group may change from point to point.

use std::collections::{BTreeMap, VecDeque};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{exp_with_derivatives, levenberg_marquardt, logm, MatN};
use crate::manifold::{smoothness_report, validate_atlas, Atlas, AtlasReport, Chart, LatticeMap, SmoothnessReport};
use crate::matgroups::{congruence_matrix, GroupSpec, KValue};

/// Atlas, fiber dimension and the group `G_p` at every site of every chart.
///
/// A frame at `p` is admissible when it lies in `G_p` itself, i.e. the
/// reference frame of every fiber is the identity of the chart trivialization.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralizedBundle {
    pub atlas: Atlas,
    pub fiber_dim: usize,
    pub groups: Vec<LatticeMap<GroupSpec>>,
}

impl GeneralizedBundle {
    pub fn new(atlas: Atlas, fiber_dim: usize, groups: Vec<LatticeMap<GroupSpec>>) -> Result<Self> {
        atlas.validate_shape()?;
        if groups.len() != atlas.charts.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} charts but {} group maps",
                atlas.charts.len(),
                groups.len()
            )));
        }
        for (chart, g) in atlas.charts.iter().zip(&groups) {
            if g.chart.dims != chart.dims {
                return Err(Error::ShapeMismatch(format!("group map does not fit chart {}", chart.id)));
            }
            for spec in &g.values {
                if spec.dim() != fiber_dim {
                    return Err(Error::ShapeMismatch(format!(
                        "group of dimension {} in a bundle with fiber dimension {fiber_dim}",
                        spec.dim()
                    )));
                }
            }
        }
        for o in &atlas.overlaps {
            if o.transitions.iter().any(|t| t.n() != fiber_dim) {
                return Err(Error::ShapeMismatch("transition size differs from fiber dimension".into()));
            }
        }
        Ok(GeneralizedBundle { atlas, fiber_dim, groups })
    }

    /// The same group at every site of every chart.
    pub fn uniform(atlas: Atlas, spec: GroupSpec) -> Result<Self> {
        let groups = atlas.charts.iter().map(|c| LatticeMap::constant(c, spec.clone())).collect();
        GeneralizedBundle::new(atlas, spec.dim(), groups)
    }

    pub fn group(&self, chart: usize, site: usize) -> &GroupSpec {
        &self.groups[chart].values[site]
    }

    pub fn chart(&self, chart: usize) -> &Chart {
        &self.atlas.charts[chart]
    }
}

/// The trivial bundle `U x SO(2)`.
pub fn trivial_so2_bundle(chart: Chart) -> GeneralizedBundle {
    GeneralizedBundle::uniform(Atlas::single(chart), GroupSpec::so2()).expect("uniform SO(2) bundle on a valid chart")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionReport {
    /// Lie-algebra dimension per chart and site.
    pub dims: Vec<Vec<usize>>,
    /// Most frequent dimension per chart.
    pub mode: Vec<usize>,
    /// `(chart, site)` pairs deviating from the mode of their chart.
    pub flagged: Vec<(usize, usize)>,
}

impl DimensionReport {
    pub fn constant(&self) -> bool {
        self.flagged.is_empty()
    }
}

pub fn check_constant_dimension(b: &GeneralizedBundle) -> DimensionReport {
    let mut dims = Vec::new();
    let mut mode = Vec::new();
    let mut flagged = Vec::new();
    for (ci, groups) in b.groups.iter().enumerate() {
        let d: Vec<usize> = groups.values.iter().map(GroupSpec::algebra_dimension).collect();
        let mut counts = BTreeMap::new();
        for &x in &d {
            *counts.entry(x).or_insert(0usize) += 1;
        }
        let m = counts.iter().max_by_key(|(&dim, &n)| (n, dim)).map(|(&dim, _)| dim).unwrap_or(0);
        flagged.extend(d.iter().enumerate().filter(|(_, &x)| x != m).map(|(s, _)| (ci, s)));
        mode.push(m);
        dims.push(d);
    }
    DimensionReport { dims, mode, flagged }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionReport {
    pub atlas: AtlasReport,
    /// Largest distance of `g^-1 X g` from the partner algebra over all
    /// overlap sites and basis elements.
    pub conjugation_defect: f64,
    /// Overlap site pairs of chart `a` with mismatched algebras.
    pub mismatched: Vec<(String, String, usize)>,
    pub passed: bool,
}

/// Checks the cocycle identity and `g_ab^-1 G_a g_ab = G_b` on the algebra
/// level at every overlap site.
pub fn check_transitions(b: &GeneralizedBundle, tol: f64) -> Result<TransitionReport> {
    let atlas = validate_atlas(&b.atlas, tol)?;
    let mut worst: f64 = 0.0;
    let mut mismatched = Vec::new();
    for o in &b.atlas.overlaps {
        let ia = b.atlas.chart_index(&o.a)?;
        let ib = b.atlas.chart_index(&o.b)?;
        for (&(sa, sb), g) in o.sites.iter().zip(&o.transitions) {
            let ga = b.group(ia, sa).lie_algebra_basis();
            let gb = b.group(ib, sb).lie_algebra_basis();
            let gi = g.inverse()?;
            let mut defect: f64 = if ga.len() == gb.len() { 0.0 } else { f64::INFINITY };
            for x in &ga {
                let y = &(&gi * x) * g;
                let mut rest = y.clone();
                for e in &gb {
                    rest = &rest - &e.scale(e.dot(&y));
                }
                defect = defect.max(rest.max_abs() / y.max_abs().max(1.0));
            }
            if defect > tol.max(1e-8) {
                mismatched.push((o.a.clone(), o.b.clone(), sa));
            }
            worst = worst.max(defect);
        }
    }
    Ok(TransitionReport { passed: atlas.passed && mismatched.is_empty(), atlas, conjugation_defect: worst, mismatched })
}

/// A choice of admissible frame at every site of one chart.
#[derive(Clone, Debug, PartialEq)]
pub struct ObserverSection {
    pub frames: LatticeMap<MatN>,
}

impl ObserverSection {
    pub fn identity(chart: &Chart, m: usize) -> Self {
        ObserverSection { frames: LatticeMap::constant(chart, MatN::identity(m)) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SectionResult {
    Found(ObserverSection),
    NoSection { site: usize, reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectionOptions {
    /// Largest admissible `|frame(s+e) - frame(s)| / h`.
    pub max_slope: f64,
    pub tol: f64,
}

impl Default for SectionOptions {
    fn default() -> Self {
        SectionOptions { max_slope: 100.0, tol: 1e-9 }
    }
}

/// Algebra coordinates of `a` when `a = exp(X)` with `X` in the algebra.
fn identity_component_coords(basis: &[MatN], a: &MatN, tol: f64) -> Option<Vec<f64>> {
    if basis.is_empty() {
        return ((a - &MatN::identity(a.n())).max_abs() <= tol).then(Vec::new);
    }
    let log = logm(a).ok()?;
    let coords: Vec<f64> = basis.iter().map(|x| x.dot(&log)).collect();
    let (e, _) = exp_with_derivatives(basis, &coords);
    ((&e - a).max_abs() <= tol * (1.0 + a.max_abs())).then_some(coords)
}

/// Element `exp(sum c_i X_i)` closest to `target` in Frobenius norm,
/// searched from `start`.
pub fn nearest_element(basis: &[MatN], target: &MatN, start: &[f64]) -> (MatN, Vec<f64>) {
    let n = target.n();
    if basis.is_empty() {
        return (MatN::identity(n), Vec::new());
    }
    let (c, _) = levenberg_marquardt(DVector::from_column_slice(start), 200, |c| {
        let (e, d) = exp_with_derivatives(basis, c.as_slice());
        let r = DVector::from_vec((&e - target).row_major());
        let j = DMatrix::from_fn(n * n, basis.len(), |row, col| d[col].get(row / n, row % n));
        (r, j)
    });
    let c: Vec<f64> = c.iter().copied().collect();
    (exp_with_derivatives(basis, &c).0, c)
}

/// Frames propagated breadth-first from `seed_site`, each the element of
/// the local group nearest to the frame it was reached from.
pub fn find_local_section(
    b: &GeneralizedBundle,
    chart: usize,
    seed_site: usize,
    seed_frame: &MatN,
    opts: SectionOptions,
) -> Result<SectionResult> {
    let ch = b.chart(chart).clone();
    if seed_site >= ch.num_sites() {
        return Err(Error::InvalidInput(format!("seed site {seed_site} outside chart {}", ch.id)));
    }
    let seed_group = b.group(chart, seed_site);
    if !seed_group.contains(seed_frame, opts.tol)? {
        return Err(Error::NotInFiberGroup { sites: vec![seed_site] });
    }
    let seed_basis = seed_group.lie_algebra_basis();
    if identity_component_coords(&seed_basis, seed_frame, opts.tol.max(1e-9)).is_none() {
        return Err(Error::InvalidInput("seed frame must lie in the identity component".into()));
    }

    let n = ch.num_sites();
    let mut frames: Vec<Option<MatN>> = vec![None; n];
    let mut coords: Vec<Vec<f64>> = vec![Vec::new(); n];
    frames[seed_site] = Some(seed_frame.clone());
    let mut queue = VecDeque::from([seed_site]);
    while let Some(s) = queue.pop_front() {
        let prev = frames[s].clone().expect("queued sites carry a frame");
        for t in ch.neighbors(s) {
            if frames[t].is_some() {
                continue;
            }
            let basis = b.group(chart, t).lie_algebra_basis();
            let start = if coords[s].len() == basis.len() {
                coords[s].clone()
            } else {
                identity_component_coords(&basis, &prev, 1e30).unwrap_or_else(|| vec![0.0; basis.len()])
            };
            let (frame, c) = nearest_element(&basis, &prev, &start);
            frames[t] = Some(frame);
            coords[t] = c;
            queue.push_back(t);
        }
    }
    let frames = LatticeMap::new(ch, frames.into_iter().map(|f| f.expect("grid is connected")).collect())?;
    let report = smoothness_report(&frames, opts.max_slope);
    if let Some(&site) = report.flagged.first() {
        return Ok(SectionResult::NoSection {
            site,
            reason: format!("frame jump {:.3e} per unit length exceeds {}", report.max_jump, opts.max_slope),
        });
    }
    Ok(SectionResult::Found(ObserverSection { frames }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompatibilityReport {
    /// `g_U(p) = sigma1(p)^-1 sigma2(p)`.
    pub g: LatticeMap<MatN>,
    pub smoothness: SmoothnessReport,
    pub passed: bool,
}

pub fn compatibility_check(
    b: &GeneralizedBundle,
    chart: usize,
    s1: &ObserverSection,
    s2: &ObserverSection,
    tol: f64,
    max_slope: f64,
) -> Result<CompatibilityReport> {
    s1.frames.same_grid(&s2.frames)?;
    s1.frames.same_grid(&b.groups[chart])?;
    let mut values = Vec::with_capacity(s1.frames.len());
    let mut outside = Vec::new();
    for (site, (f1, f2)) in s1.frames.values.iter().zip(&s2.frames.values).enumerate() {
        let inv = f1.inverse().map_err(|_| Error::SingularFrame { site })?;
        let g = &inv * f2;
        if !b.group(chart, site).contains(&g, tol)? {
            outside.push(site);
        }
        values.push(g);
    }
    if !outside.is_empty() {
        return Err(Error::NotInFiberGroup { sites: outside });
    }
    let g = LatticeMap::new(s1.frames.chart.clone(), values)?;
    let smoothness = smoothness_report(&g, max_slope);
    Ok(CompatibilityReport { passed: smoothness.passed(), g, smoothness })
}

/// Bundle of frames adapted to `diag(k(p),1,1,1)`; `det^2 = 1` is imposed
/// at every site.
pub fn example_congruence(kfield: &LatticeMap<KValue>) -> Result<GeneralizedBundle> {
    let mut groups = Vec::with_capacity(kfield.len());
    for (site, &k) in kfield.values.iter().enumerate() {
        if k.is_omega() {
            return Err(Error::InvalidInput(format!("k must be finite, got omega at site {site}")));
        }
        groups.push(GroupSpec::Congruence { s: congruence_matrix(k), side: crate::matgroups::Side::Direct, det_unit: true });
    }
    let chart = kfield.chart.clone();
    GeneralizedBundle::new(Atlas::single(chart.clone()), 4, vec![LatticeMap::new(chart, groups)?])
}

/// A circle of bases `B_v`, or the single base `B_center` when `radius = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Fiber {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Fiber {
    pub fn dimension(&self) -> usize {
        usize::from(self.radius > 0.0)
    }

    /// Point of the fiber closest to `v`; ties go to the `+x` direction.
    pub fn nearest(&self, v: [f64; 2]) -> [f64; 2] {
        let d = [v[0] - self.center[0], v[1] - self.center[1]];
        let len = d[0].hypot(d[1]);
        let u = if len > 0.0 { [d[0] / len, d[1] / len] } else { [1.0, 0.0] };
        [self.center[0] + self.radius * u[0], self.center[1] + self.radius * u[1]]
    }
}

/// The positively oriented base `(v, w)` with `w` orthogonal to `v` and of
/// the same length.
pub fn base_of(v: [f64; 2]) -> MatN {
    MatN::from_row_slice(2, &[v[0], -v[1], v[1], v[0]])
}

/// Bases of `R^2` over `M = (-inf, 1)` whose groups are circles except
/// for the trivial group at `p = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct DegenerateFamily {
    pub chart: Chart,
    pub v0: [f64; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub enum FamilySection {
    Found(Vec<[f64; 2]>),
    NoSection { site: usize, reason: String },
}

impl DegenerateFamily {
    pub fn new(chart: Chart, v0: [f64; 2]) -> Result<Self> {
        if chart.d() != 1 {
            return Err(Error::InvalidInput("the family lives on a one-dimensional chart".into()));
        }
        if chart.coords(chart.num_sites() - 1)[0] >= 1.0 {
            return Err(Error::InvalidInput("base points must satisfy p < 1".into()));
        }
        if v0[0].hypot(v0[1]) <= 1.0 {
            return Err(Error::InvalidInput("|v0| must exceed 1".into()));
        }
        Ok(DegenerateFamily { chart, v0 })
    }

    pub fn fiber(&self, p: f64) -> Fiber {
        if p >= 0.0 {
            Fiber { center: self.v0, radius: p.sqrt() }
        } else {
            Fiber { center: [0.0, 0.0], radius: 1.0 / p.abs().sqrt() }
        }
    }

    pub fn p(&self, site: usize) -> f64 {
        self.chart.coords(site)[0]
    }

    pub fn fiber_dimensions(&self) -> Vec<usize> {
        (0..self.chart.num_sites()).map(|s| self.fiber(self.p(s)).dimension()).collect()
    }

    /// The family as a bundle with `SO(2)` fibers and a trivial group where
    /// the fiber degenerates to a point.
    pub fn as_bundle(&self) -> GeneralizedBundle {
        let groups = LatticeMap::from_fn(&self.chart, |_, x| {
            if self.fiber(x[0]).dimension() == 1 {
                GroupSpec::so2()
            } else {
                GroupSpec::Trivial { n: 2 }
            }
        });
        GeneralizedBundle::new(Atlas::single(self.chart.clone()), 2, vec![groups]).expect("consistent by construction")
    }

    /// Largest step of the nearest-point path from `v` through `2^level`
    /// evenly spaced base points of `[p_a, p_b]`.
    fn path_jump(&self, v: [f64; 2], p_a: f64, p_b: f64, level: u32) -> f64 {
        let steps = 1usize << level;
        let mut cur = v;
        let mut worst: f64 = 0.0;
        for i in 1..=steps {
            let p = p_a + (p_b - p_a) * i as f64 / steps as f64;
            let next = self.fiber(p).nearest(cur);
            worst = worst.max((next[0] - cur[0]).hypot(next[1] - cur[1]));
            cur = next;
        }
        worst
    }

    /// Nearest-point section over sites `lo..=hi`, started at the point of
    /// the first fiber closest to `v0`.
    ///
    /// Each edge is certified continuous when refining it by a factor four
    /// shrinks the largest step by at least a factor `0.75`.
    pub fn find_section(&self, lo: usize, hi: usize) -> Result<FamilySection> {
        if lo > hi || hi >= self.chart.num_sites() {
            return Err(Error::InvalidInput("invalid site range".into()));
        }
        const LEVEL: u32 = 4;
        let mut v = self.fiber(self.p(lo)).nearest(self.v0);
        let mut out = vec![v];
        for s in lo..hi {
            let (pa, pb) = (self.p(s), self.p(s + 1));
            let coarse = self.path_jump(v, pa, pb, LEVEL);
            let fine = self.path_jump(v, pa, pb, LEVEL + 2);
            if fine > 0.75 * coarse {
                return Ok(FamilySection::NoSection {
                    site: s + 1,
                    reason: format!("steps do not shrink under refinement ({coarse:.3e} -> {fine:.3e})"),
                });
            }
            v = self.fiber(pb).nearest(v);
            out.push(v);
        }
        Ok(FamilySection::Found(out))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DegenerateReport {
    pub family: DegenerateFamily,
    pub fiber_dimensions: Vec<usize>,
    pub zero_site: usize,
    pub dimension: DimensionReport,
    pub across_zero: FamilySection,
    /// Section over the sites with `-0.9 <= p <= -0.1`.
    pub left_of_zero: FamilySection,
}

/// The family on `n` evenly spaced points of `[-0.9, 0.9]` with
/// `v0 = (2, 0)`. `n` must be odd so that `p = 0` is a site.
pub fn example_degenerate(n: usize) -> Result<DegenerateReport> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::InvalidInput("need an odd number of at least 3 sites".into()));
    }
    let chart = Chart::spanning("M", vec![n], &[-0.9], &[0.9])?;
    let family = DegenerateFamily::new(chart, [2.0, 0.0])?;
    let zero_site = n / 2;
    let across_zero = family.find_section(0, n - 1)?;
    let lo = 0;
    let hi = (0..n).rev().find(|&s| family.p(s) <= -0.1 + 1e-12).unwrap_or(0);
    let left_of_zero = family.find_section(lo, hi)?;
    Ok(DegenerateReport {
        fiber_dimensions: family.fiber_dimensions(),
        dimension: check_constant_dimension(&family.as_bundle()),
        family,
        zero_site,
        across_zero,
        left_of_zero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matgroups::in_group;

    fn line(n: usize) -> Chart {
        Chart::spanning("U", vec![n], &[-1.0], &[1.0]).unwrap()
    }

    fn rot(t: f64) -> MatN {
        MatN::from_row_slice(2, &[t.cos(), -t.sin(), t.sin(), t.cos()])
    }

    #[test]
    fn congruence_example_keeps_dimension_six() {
        let chart = line(33);
        let kfield = LatticeMap::from_fn(&chart, |_, x| KValue::Finite(x[0]));
        let b = example_congruence(&kfield).unwrap();
        let rep = check_constant_dimension(&b);
        assert!(rep.constant());
        assert!(rep.dims[0].iter().all(|&d| d == 6));
        assert_eq!(kfield.values[16], KValue::Finite(0.0));
        assert!(example_congruence(&LatticeMap::constant(&chart, KValue::Omega)).is_err());
    }

    #[test]
    fn so2_sections_and_compatibility() {
        let b = trivial_so2_bundle(Chart::spanning("U", vec![6, 5], &[0.0, 0.0], &[1.0, 1.0]).unwrap());
        assert!(check_constant_dimension(&b).constant());
        let SectionResult::Found(s1) = find_local_section(&b, 0, 0, &MatN::identity(2), Default::default()).unwrap()
        else {
            panic!()
        };
        assert!(s1.frames.values.iter().all(|f| (f - &MatN::identity(2)).max_abs() < 1e-12));

        let SectionResult::Found(s2) = find_local_section(&b, 0, 7, &rot(0.8), Default::default()).unwrap() else {
            panic!()
        };
        let rep = compatibility_check(&b, 0, &s1, &s2, 1e-9, 100.0).unwrap();
        assert!(rep.passed);
        assert!(rep.g.values.iter().all(|g| (g - &rot(0.8)).max_abs() < 1e-9));

        let bad = ObserverSection { frames: s1.frames.map(|f| f * &MatN::from_diagonal(&[2.0, 1.0])) };
        assert!(matches!(
            compatibility_check(&b, 0, &s1, &bad, 1e-9, 100.0),
            Err(Error::NotInFiberGroup { .. })
        ));
    }

    #[test]
    fn sections_of_the_congruence_example() {
        let chart = line(33);
        let kfield = LatticeMap::from_fn(&chart, |_, x| KValue::Finite(x[0]));
        let b = example_congruence(&kfield).unwrap();
        let SectionResult::Found(s1) = find_local_section(&b, 0, 0, &MatN::identity(4), Default::default()).unwrap()
        else {
            panic!()
        };
        let seed = GroupSpec::ok(KValue::Finite(-1.0)).random_element(3, 0.3);
        let SectionResult::Found(s2) = find_local_section(&b, 0, 0, &seed, Default::default()).unwrap() else {
            panic!()
        };
        for (s, f) in s2.frames.values.iter().enumerate() {
            let KValue::Finite(k) = kfield.values[s] else { unreachable!() };
            assert!(in_group(f, KValue::Finite(k), 1e-8, false).unwrap(), "site {s}");
        }
        assert!(compatibility_check(&b, 0, &s1, &s2, 1e-8, 100.0).unwrap().passed);
    }

    #[test]
    fn degenerate_family() {
        let rep = example_degenerate(33).unwrap();
        assert_eq!(rep.zero_site, 16);
        for (s, &d) in rep.fiber_dimensions.iter().enumerate() {
            assert_eq!(d, usize::from(s != 16));
        }
        assert_eq!(rep.dimension.flagged, vec![(0, 16)]);
        assert!(matches!(rep.across_zero, FamilySection::NoSection { .. }));
        assert!(matches!(rep.left_of_zero, FamilySection::Found(_)));

        let fam = &rep.family;
        let f = fam.fiber(0.25);
        assert_eq!(f.center, [2.0, 0.0]);
        assert!((f.radius - 0.5).abs() < 1e-15);
        assert!((fam.fiber(-1.0).radius - 1.0).abs() < 1e-15);
        assert_eq!(fam.fiber(0.0).radius, 0.0);
        assert!(example_degenerate(32).is_err());
    }

    #[test]
    fn transitions_conjugate_groups() {
        let atlas = crate::manifold::circle_atlas(24, 15, &rot(0.3)).unwrap();
        let b = GeneralizedBundle::uniform(atlas, GroupSpec::so2()).unwrap();
        assert!(check_transitions(&b, 1e-9).unwrap().passed);

        let mut atlas = crate::manifold::circle_atlas(24, 15, &MatN::from_diagonal(&[2.0, 1.0])).unwrap();
        atlas.overlaps[0].transitions[0] = MatN::from_diagonal(&[2.0, 1.0]);
        let b = GeneralizedBundle::uniform(atlas, GroupSpec::so2()).unwrap();
        assert!(!check_transitions(&b, 1e-9).unwrap().passed);
    }
}
