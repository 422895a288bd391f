//! Rectangular lattice charts, lattice-valued maps and multi-chart atlases.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::MatN;

fn default_chart_id() -> String {
    "U".to_string()
}

/// A regular grid. Sites are numbered row-major, the last axis fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    #[serde(default = "default_chart_id")]
    pub id: String,
    pub dims: Vec<usize>,
    pub origin: Vec<f64>,
    pub spacing: Vec<f64>,
}

impl Chart {
    pub fn new(id: &str, dims: Vec<usize>, origin: Vec<f64>, spacing: Vec<f64>) -> Result<Self> {
        let c = Chart { id: id.to_string(), dims, origin, spacing };
        c.validate()?;
        Ok(c)
    }

    /// `dims[i]` points spread evenly over `[lo[i], hi[i]]`.
    pub fn spanning(id: &str, dims: Vec<usize>, lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.len() != dims.len() || hi.len() != dims.len() {
            return Err(Error::ShapeMismatch("bounds do not match chart dimension".into()));
        }
        let spacing = dims
            .iter()
            .zip(lo.iter().zip(hi))
            .map(|(&n, (&a, &b))| if n > 1 { (b - a) / (n - 1) as f64 } else { 1.0 })
            .collect();
        Chart::new(id, dims, lo.to_vec(), spacing)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dims.len();
        if d == 0 {
            return Err(Error::InvalidInput("chart needs at least one axis".into()));
        }
        if self.origin.len() != d || self.spacing.len() != d {
            return Err(Error::ShapeMismatch(format!(
                "chart {}: dims, origin and spacing lengths differ",
                self.id
            )));
        }
        if self.dims.iter().any(|&n| n == 0) {
            return Err(Error::InvalidInput(format!("chart {}: empty axis", self.id)));
        }
        if self.spacing.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::InvalidInput(format!("chart {}: spacing must be positive", self.id)));
        }
        if self.origin.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("chart {}: origin must be finite", self.id)));
        }
        Ok(())
    }

    /// Base dimension.
    pub fn d(&self) -> usize {
        self.dims.len()
    }

    pub fn num_sites(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.dims).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn multi_index(&self, mut site: usize) -> Vec<usize> {
        let mut out = vec![0; self.d()];
        for (slot, &n) in out.iter_mut().zip(&self.dims).rev() {
            *slot = site % n;
            site /= n;
        }
        out
    }

    pub fn coords(&self, site: usize) -> Vec<f64> {
        self.multi_index(site)
            .iter()
            .enumerate()
            .map(|(i, &m)| self.origin[i] + m as f64 * self.spacing[i])
            .collect()
    }

    /// Neighbour `delta` steps along `dir`, if inside the grid.
    pub fn step(&self, site: usize, dir: usize, delta: isize) -> Option<usize> {
        let mut m = self.multi_index(site);
        let j = m[dir] as isize + delta;
        if j < 0 || j >= self.dims[dir] as isize {
            return None;
        }
        m[dir] = j as usize;
        Some(self.index(&m))
    }

    pub fn neighbors(&self, site: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(2 * self.d());
        for dir in 0..self.d() {
            for delta in [-1, 1] {
                if let Some(n) = self.step(site, dir, delta) {
                    out.push(n);
                }
            }
        }
        out
    }

    /// Sites that are at least one step away from every grid face along
    /// axes with more than two points.
    pub fn is_interior(&self, site: usize) -> bool {
        self.multi_index(site)
            .iter()
            .zip(&self.dims)
            .all(|(&i, &n)| n < 3 || (i > 0 && i + 1 < n))
    }
}

/// Values a lattice map can carry through finite differences.
pub trait FieldValue: Clone {
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn scale(&self, s: f64) -> Self;
    /// Max-entry norm.
    fn norm(&self) -> f64;
    fn zero_like(&self) -> Self {
        self.scale(0.0)
    }
}

impl FieldValue for f64 {
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn scale(&self, s: f64) -> Self {
        self * s
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
}

impl FieldValue for DVector<f64> {
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn scale(&self, s: f64) -> Self {
        self * s
    }
    fn norm(&self) -> f64 {
        self.amax()
    }
}

impl FieldValue for MatN {
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn scale(&self, s: f64) -> Self {
        MatN::scale(self, s)
    }
    fn norm(&self) -> f64 {
        self.max_abs()
    }
}

/// One value per site of a chart.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeMap<V> {
    pub chart: Chart,
    pub values: Vec<V>,
}

impl<V> LatticeMap<V> {
    pub fn new(chart: Chart, values: Vec<V>) -> Result<Self> {
        if values.len() != chart.num_sites() {
            return Err(Error::ShapeMismatch(format!(
                "chart {} has {} sites but {} values were given",
                chart.id,
                chart.num_sites(),
                values.len()
            )));
        }
        Ok(LatticeMap { chart, values })
    }

    pub fn from_fn(chart: &Chart, mut f: impl FnMut(usize, &[f64]) -> V) -> Self {
        let values = (0..chart.num_sites()).map(|s| f(s, &chart.coords(s))).collect();
        LatticeMap { chart: chart.clone(), values }
    }

    pub fn constant(chart: &Chart, v: V) -> Self
    where
        V: Clone,
    {
        LatticeMap { chart: chart.clone(), values: vec![v; chart.num_sites()] }
    }

    pub fn map<W>(&self, f: impl FnMut(&V) -> W) -> LatticeMap<W> {
        LatticeMap { chart: self.chart.clone(), values: self.values.iter().map(f).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_grid<W>(&self, other: &LatticeMap<W>) -> Result<()> {
        if self.chart.dims != other.chart.dims {
            return Err(Error::ShapeMismatch(format!(
                "grids differ: {:?} vs {:?}",
                self.chart.dims, other.chart.dims
            )));
        }
        Ok(())
    }
}

impl<V: FieldValue> LatticeMap<V> {
    /// Pointwise linear combination `a self + b other`.
    pub fn combine(&self, a: f64, other: &LatticeMap<V>, b: f64) -> Result<LatticeMap<V>> {
        self.same_grid(other)?;
        Ok(LatticeMap {
            chart: self.chart.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| x.scale(a).add(&y.scale(b)))
                .collect(),
        })
    }

    /// Max over sites of the pointwise norm of `self - other`.
    pub fn max_diff(&self, other: &LatticeMap<V>) -> Result<f64> {
        self.same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| x.sub(y).norm())
            .fold(0.0, f64::max))
    }
}

/// Central differences inside, first-order one-sided differences at the
/// two ends of each line. Axes with a single point differentiate to zero.
pub fn finite_diff<V: FieldValue>(f: &LatticeMap<V>, dir: usize) -> Result<LatticeMap<V>> {
    let chart = &f.chart;
    if dir >= chart.d() {
        return Err(Error::ShapeMismatch(format!(
            "direction {dir} out of range for a {}-dimensional chart",
            chart.d()
        )));
    }
    let h = chart.spacing[dir];
    let values = (0..chart.num_sites())
        .map(|s| {
            let fwd = chart.step(s, dir, 1);
            let bwd = chart.step(s, dir, -1);
            match (bwd, fwd) {
                (Some(b), Some(a)) => f.values[a].sub(&f.values[b]).scale(0.5 / h),
                (None, Some(a)) => f.values[a].sub(&f.values[s]).scale(1.0 / h),
                (Some(b), None) => f.values[s].sub(&f.values[b]).scale(1.0 / h),
                (None, None) => f.values[s].zero_like(),
            }
        })
        .collect();
    Ok(LatticeMap { chart: chart.clone(), values })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothnessReport {
    /// Largest `|f(s+e) - f(s)| / h` over all grid edges.
    pub max_jump: f64,
    /// Sites incident to an edge whose normalized jump exceeds `tol`.
    pub flagged: Vec<usize>,
    pub tol: f64,
}

impl SmoothnessReport {
    pub fn passed(&self) -> bool {
        self.flagged.is_empty()
    }
}

pub fn smoothness_report<V: FieldValue>(f: &LatticeMap<V>, tol: f64) -> SmoothnessReport {
    let chart = &f.chart;
    let mut max_jump: f64 = 0.0;
    let mut flagged = BTreeSet::new();
    for s in 0..chart.num_sites() {
        for dir in 0..chart.d() {
            if let Some(t) = chart.step(s, dir, 1) {
                let jump = f.values[t].sub(&f.values[s]).norm() / chart.spacing[dir];
                max_jump = max_jump.max(jump);
                if jump > tol {
                    flagged.insert(s);
                    flagged.insert(t);
                }
            }
        }
    }
    SmoothnessReport { max_jump, flagged: flagged.into_iter().collect(), tol }
}

/// Identification of sites of chart `a` with sites of chart `b`, with the
/// fiber transition `g_ab` at each pair: fiber coordinates satisfy
/// `psi_b = g_ab^-1 psi_a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Overlap {
    pub a: String,
    pub b: String,
    pub sites: Vec<(usize, usize)>,
    pub transitions: Vec<MatN>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atlas {
    pub charts: Vec<Chart>,
    #[serde(default)]
    pub overlaps: Vec<Overlap>,
}

impl Atlas {
    pub fn single(chart: Chart) -> Self {
        Atlas { charts: vec![chart], overlaps: Vec::new() }
    }

    pub fn chart_index(&self, id: &str) -> Result<usize> {
        self.charts
            .iter()
            .position(|c| c.id == id)
            .ok_or_else(|| Error::InvalidInput(format!("unknown chart id {id:?}")))
    }

    /// Checks the structural invariants that do not need a tolerance.
    pub fn validate_shape(&self) -> Result<()> {
        if self.charts.is_empty() {
            return Err(Error::InvalidInput("atlas has no charts".into()));
        }
        let mut ids = BTreeSet::new();
        for c in &self.charts {
            c.validate()?;
            if !ids.insert(c.id.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate chart id {:?}", c.id)));
            }
        }
        for o in &self.overlaps {
            let ia = self.chart_index(&o.a)?;
            let ib = self.chart_index(&o.b)?;
            if ia == ib {
                return Err(Error::InvalidInput(format!("overlap of chart {} with itself", o.a)));
            }
            if o.transitions.len() != o.sites.len() {
                return Err(Error::ShapeMismatch(format!(
                    "overlap {}-{}: {} site pairs but {} transitions",
                    o.a,
                    o.b,
                    o.sites.len(),
                    o.transitions.len()
                )));
            }
            let (na, nb) = (self.charts[ia].num_sites(), self.charts[ib].num_sites());
            if o.sites.iter().any(|&(x, y)| x >= na || y >= nb) {
                return Err(Error::InvalidInput(format!("overlap {}-{}: site out of range", o.a, o.b)));
            }
        }
        Ok(())
    }

    /// Sites of chart `chart` that appear in some overlap.
    pub fn glued_sites(&self, chart: usize) -> BTreeSet<usize> {
        let id = &self.charts[chart].id;
        let mut out = BTreeSet::new();
        for o in &self.overlaps {
            if &o.a == id {
                out.extend(o.sites.iter().map(|p| p.0));
            }
            if &o.b == id {
                out.extend(o.sites.iter().map(|p| p.1));
            }
        }
        out
    }

    /// For chart `chart`, every glued site mapped to its partners:
    /// `(other chart, other site, g)` with `psi_other = g^-1 psi_here`.
    pub fn partners(&self, chart: usize) -> Result<BTreeMap<usize, Vec<(usize, usize, MatN)>>> {
        let id = &self.charts[chart].id;
        let mut out: BTreeMap<usize, Vec<(usize, usize, MatN)>> = BTreeMap::new();
        for o in &self.overlaps {
            if &o.a == id {
                let other = self.chart_index(&o.b)?;
                for (&(x, y), g) in o.sites.iter().zip(&o.transitions) {
                    out.entry(x).or_default().push((other, y, g.clone()));
                }
            } else if &o.b == id {
                let other = self.chart_index(&o.a)?;
                for (&(x, y), g) in o.sites.iter().zip(&o.transitions) {
                    out.entry(y).or_default().push((other, x, g.inverse()?));
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtlasViolation {
    pub kind: String,
    pub charts: Vec<String>,
    pub sites: Vec<usize>,
    pub defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtlasReport {
    pub passed: bool,
    pub violations: Vec<AtlasViolation>,
}

/// Injectivity of site correspondences, inverse consistency where both
/// directions of an overlap are given, and `g_ac = g_ab g_bc` on triple
/// overlaps.
pub fn validate_atlas(atlas: &Atlas, tol: f64) -> Result<AtlasReport> {
    atlas.validate_shape()?;
    let mut violations = Vec::new();

    for o in &atlas.overlaps {
        for (side, pick) in [("a", 0usize), ("b", 1usize)] {
            let mut seen = HashMap::new();
            for &(x, y) in &o.sites {
                let key = if pick == 0 { x } else { y };
                if let Some(prev) = seen.insert(key, (x, y)) {
                    if prev != (x, y) {
                        violations.push(AtlasViolation {
                            kind: format!("non-injective correspondence on side {side}"),
                            charts: vec![o.a.clone(), o.b.clone()],
                            sites: vec![key],
                            defect: f64::NAN,
                        });
                    }
                }
            }
        }
    }

    // (i, j) -> site_i -> (site_j, g_ij), merging both orientations.
    let nc = atlas.charts.len();
    let mut maps: HashMap<(usize, usize), BTreeMap<usize, (usize, MatN)>> = HashMap::new();
    for o in &atlas.overlaps {
        let ia = atlas.chart_index(&o.a)?;
        let ib = atlas.chart_index(&o.b)?;
        for (&(x, y), g) in o.sites.iter().zip(&o.transitions) {
            let gi = match g.inverse() {
                Ok(gi) => gi,
                Err(_) => {
                    violations.push(AtlasViolation {
                        kind: "singular transition".into(),
                        charts: vec![o.a.clone(), o.b.clone()],
                        sites: vec![x, y],
                        defect: f64::INFINITY,
                    });
                    continue;
                }
            };
            for (explicit, (from, to, s, t, m)) in [(true, (ia, ib, x, y, g.clone())), (false, (ib, ia, y, x, gi))] {
                let entry = maps.entry((from, to)).or_default();
                match entry.get(&s) {
                    Some(_) if !explicit => {}
                    Some((t0, m0)) => {
                        let defect = if *t0 == t { (m0 - &m).max_abs() } else { f64::INFINITY };
                        if defect > tol {
                            violations.push(AtlasViolation {
                                kind: "inverse transitions disagree".into(),
                                charts: vec![atlas.charts[from].id.clone(), atlas.charts[to].id.clone()],
                                sites: vec![s],
                                defect,
                            });
                        }
                    }
                    None => {
                        entry.insert(s, (t, m));
                    }
                }
            }
        }
    }

    for i in 0..nc {
        for j in 0..nc {
            for k in 0..nc {
                if i >= j || j >= k {
                    continue;
                }
                let (Some(ij), Some(jk), Some(ik)) = (maps.get(&(i, j)), maps.get(&(j, k)), maps.get(&(i, k)))
                else {
                    continue;
                };
                for (&s, (t, g_ij)) in ij {
                    let (Some((u, g_jk)), Some((u2, g_ik))) = (jk.get(t), ik.get(&s)) else {
                        continue;
                    };
                    let defect = if u == u2 { (&(g_ij * g_jk) - g_ik).max_abs() } else { f64::INFINITY };
                    if defect > tol {
                        violations.push(AtlasViolation {
                            kind: "cocycle".into(),
                            charts: vec![
                                atlas.charts[i].id.clone(),
                                atlas.charts[j].id.clone(),
                                atlas.charts[k].id.clone(),
                            ],
                            sites: vec![s, *t, *u],
                            defect,
                        });
                    }
                }
            }
        }
    }

    Ok(AtlasReport { passed: violations.is_empty(), violations })
}

/// Two charts covering a circle of `n` points, each chart `len` points
/// long, with constant transition `g` on both overlap components.
pub fn circle_atlas(n: usize, len: usize, g: &MatN) -> Result<Atlas> {
    if len >= n || 2 * len <= n {
        return Err(Error::InvalidInput("charts must overlap without covering the circle alone".into()));
    }
    let h = std::f64::consts::TAU / n as f64;
    let a = Chart::new("A", vec![len], vec![0.0], vec![h])?;
    let ov = 2 * len - n;
    let start_b = len - (ov - ov / 2);
    let b = Chart::new("B", vec![len], vec![start_b as f64 * h], vec![h])?;
    let mut sites = Vec::new();
    for ia in 0..len {
        for ib in 0..len {
            if (start_b + ib) % n == ia {
                sites.push((ia, ib));
            }
        }
    }
    sites.sort_unstable();
    let transitions = vec![g.clone(); sites.len()];
    Ok(Atlas {
        charts: vec![a, b],
        overlaps: vec![Overlap { a: "A".into(), b: "B".into(), sites, transitions }],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize, h: f64) -> Chart {
        Chart::new("U", vec![n], vec![0.0], vec![h]).unwrap()
    }

    #[test]
    fn indexing_round_trips() {
        let c = Chart::new("U", vec![3, 4, 2], vec![0.0; 3], vec![1.0; 3]).unwrap();
        for s in 0..c.num_sites() {
            assert_eq!(c.index(&c.multi_index(s)), s);
        }
        assert_eq!(c.multi_index(1), vec![0, 0, 1]);
        assert_eq!(c.step(0, 0, -1), None);
        assert_eq!(c.step(0, 0, 1), Some(8));
    }

    #[test]
    fn chart_rejects_bad_spacing() {
        assert!(Chart::new("U", vec![3], vec![0.0], vec![0.0]).is_err());
        assert!(Chart::new("U", vec![3, 2], vec![0.0], vec![1.0]).is_err());
    }

    #[test]
    fn derivatives_of_polynomials() {
        let c = line(11, 0.1);
        let konst = LatticeMap::constant(&c, 3.0);
        assert!(finite_diff(&konst, 0).unwrap().values.iter().all(|&v| v == 0.0));

        let lin = LatticeMap::from_fn(&c, |_, x| 2.0 * x[0] + 1.0);
        for v in finite_diff(&lin, 0).unwrap().values {
            assert!((v - 2.0).abs() < 1e-12);
        }

        let quad = LatticeMap::from_fn(&c, |_, x| x[0] * x[0]);
        let d = finite_diff(&quad, 0).unwrap();
        for s in 1..10 {
            assert!((d.values[s] - 2.0 * c.coords(s)[0]).abs() < 1e-12);
        }
        // one-sided: (h^2 - 0)/h = h at the left end, error h.
        assert!((d.values[0] - 0.1).abs() < 1e-12);
        assert!(finite_diff(&quad, 1).is_err());
    }

    #[test]
    fn smoothness_flags_step_columns() {
        let c = Chart::new("U", vec![8, 8], vec![0.0; 2], vec![0.125; 2]).unwrap();
        let step = LatticeMap::from_fn(&c, |s, _| if c.multi_index(s)[0] >= 4 { 1.0 } else { 0.0 });
        let rep = smoothness_report(&step, 2.0);
        let cols: BTreeSet<usize> = rep.flagged.iter().map(|&s| c.multi_index(s)[0]).collect();
        assert_eq!(cols, BTreeSet::from([3, 4]));
        assert_eq!(rep.flagged.len(), 16);

        let ramp = LatticeMap::from_fn(&c, |_, x| 0.5 * x[1]);
        assert!(smoothness_report(&ramp, 0.6).passed());
        assert!(smoothness_report(&LatticeMap::constant(&c, 1.0), 1e-12).passed());
    }

    fn rot(t: f64) -> MatN {
        MatN::from_row_slice(2, &[t.cos(), -t.sin(), t.sin(), t.cos()])
    }

    #[test]
    fn atlases() {
        let single = Atlas::single(line(5, 1.0));
        assert!(validate_atlas(&single, 1e-9).unwrap().passed);

        let circle = circle_atlas(24, 15, &rot(0.4)).unwrap();
        let o = &circle.overlaps[0];
        assert!(!o.sites.is_empty());
        assert!(validate_atlas(&circle, 1e-9).unwrap().passed);

        // Second overlap listing the reverse direction with a transition
        // that is not the inverse.
        let mut bad = circle.clone();
        let rev: Vec<(usize, usize)> = o.sites.iter().map(|&(x, y)| (y, x)).collect();
        let mut trans = vec![rot(-0.4); rev.len()];
        trans[2] = rot(0.1);
        bad.overlaps.push(Overlap { a: "B".into(), b: "A".into(), sites: rev.clone(), transitions: trans });
        let rep = validate_atlas(&bad, 1e-9).unwrap();
        assert!(!rep.passed);
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].sites, vec![rev[2].0]);
    }

    #[test]
    fn cocycle_on_triple_overlap() {
        let c = |id: &str| Chart::new(id, vec![3], vec![0.0], vec![1.0]).unwrap();
        let ov = |a: &str, b: &str, g: MatN| Overlap { a: a.into(), b: b.into(), sites: vec![(1, 1)], transitions: vec![g] };
        let mut atlas = Atlas {
            charts: vec![c("A"), c("B"), c("C")],
            overlaps: vec![ov("A", "B", rot(0.2)), ov("B", "C", rot(0.3)), ov("A", "C", rot(0.5))],
        };
        assert!(validate_atlas(&atlas, 1e-9).unwrap().passed);
        atlas.overlaps[2].transitions[0] = rot(0.6);
        let rep = validate_atlas(&atlas, 1e-9).unwrap();
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].kind, "cocycle");
    }
}
