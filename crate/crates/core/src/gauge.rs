//! Particle fields, their coordinates relative to observers, gauge
//! transformations and gauge orbits.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bundle::{GeneralizedBundle, ObserverSection};
use crate::error::{Error, Result};
use crate::linalg::{exp_with_derivatives, expm, levenberg_marquardt, logm, MatN};
use crate::manifold::{Atlas, Chart, LatticeMap};
use crate::matgroups::GroupSpec;

/// A section of the associated vector bundle, one lattice map per chart.
/// On overlaps `psi_b = g_ab^-1 psi_a`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleField {
    pub charts: Vec<LatticeMap<DVector<f64>>>,
}

impl ParticleField {
    pub fn single(map: LatticeMap<DVector<f64>>) -> Self {
        ParticleField { charts: vec![map] }
    }

    pub fn max_diff(&self, other: &ParticleField) -> Result<f64> {
        if self.charts.len() != other.charts.len() {
            return Err(Error::ShapeMismatch("fields live on different numbers of charts".into()));
        }
        let mut worst: f64 = 0.0;
        for (a, b) in self.charts.iter().zip(&other.charts) {
            worst = worst.max(a.max_diff(b)?);
        }
        Ok(worst)
    }

    pub fn max_norm(&self) -> f64 {
        self.charts.iter().flat_map(|m| m.values.iter()).map(|v| v.amax()).fold(0.0, f64::max)
    }

    /// Largest violation of `psi_b = g_ab^-1 psi_a` over all overlaps.
    pub fn overlap_defect(&self, atlas: &Atlas) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for o in &atlas.overlaps {
            let ia = atlas.chart_index(&o.a)?;
            let ib = atlas.chart_index(&o.b)?;
            for (&(x, y), g) in o.sites.iter().zip(&o.transitions) {
                let expected = g.inverse()?.mul_vec(&self.charts[ia].values[x]);
                worst = worst.max((&expected - &self.charts[ib].values[y]).amax());
            }
        }
        Ok(worst)
    }
}

/// `c(p) = sigma(p)^-1 psi(p)`.
pub fn coordinates(sigma: &ObserverSection, psi: &LatticeMap<DVector<f64>>) -> Result<LatticeMap<DVector<f64>>> {
    sigma.frames.same_grid(psi)?;
    let mut out = Vec::with_capacity(psi.len());
    for (site, (f, v)) in sigma.frames.values.iter().zip(&psi.values).enumerate() {
        let inv = f.inverse().map_err(|_| Error::SingularFrame { site })?;
        out.push(inv.mul_vec(v));
    }
    LatticeMap::new(psi.chart.clone(), out)
}

fn check_membership(b: &GeneralizedBundle, chart: usize, g: &LatticeMap<MatN>, tol: f64) -> Result<()> {
    g.same_grid(&b.groups[chart])?;
    let mut outside = Vec::new();
    for (site, m) in g.values.iter().enumerate() {
        if !b.group(chart, site).contains(m, tol)? {
            outside.push(site);
        }
    }
    if outside.is_empty() {
        Ok(())
    } else {
        Err(Error::NotInFiberGroup { sites: outside })
    }
}

/// `sigma_bar(p) = sigma(p) g(p)`.
pub fn observer_transform(
    b: &GeneralizedBundle,
    chart: usize,
    sigma: &ObserverSection,
    g: &LatticeMap<MatN>,
    tol: f64,
) -> Result<ObserverSection> {
    check_membership(b, chart, g, tol)?;
    sigma.frames.same_grid(g)?;
    let frames = sigma.frames.values.iter().zip(&g.values).map(|(f, h)| f * h).collect();
    Ok(ObserverSection { frames: LatticeMap::new(sigma.frames.chart.clone(), frames)? })
}

/// How far each site is inside the collar-free part of a chart: values
/// `<= 0` are collar sites. Faces that are not glued to another chart
/// carry no collar.
pub fn collar_depth(atlas: &Atlas, chart: usize, width: usize) -> Vec<i64> {
    let ch = &atlas.charts[chart];
    let glued = atlas.glued_sites(chart);
    let d = ch.d();
    let mut low = vec![false; d];
    let mut high = vec![false; d];
    for &s in &glued {
        let m = ch.multi_index(s);
        for dir in 0..d {
            low[dir] |= m[dir] == 0;
            high[dir] |= m[dir] + 1 == ch.dims[dir];
        }
    }
    (0..ch.num_sites())
        .map(|s| {
            let m = ch.multi_index(s);
            let mut depth = i64::MAX;
            for dir in 0..d {
                if low[dir] {
                    depth = depth.min(m[dir] as i64 + 1 - width as i64);
                }
                if high[dir] {
                    depth = depth.min((ch.dims[dir] - m[dir]) as i64 - width as i64);
                }
            }
            depth
        })
        .collect()
}

pub fn collar_sites(atlas: &Atlas, chart: usize, width: usize) -> BTreeSet<usize> {
    collar_depth(atlas, chart, width)
        .into_iter()
        .enumerate()
        .filter(|&(_, d)| d <= 0)
        .map(|(s, _)| s)
        .collect()
}

/// A gauge map supported on one chart, equal to the identity on the
/// collar of the chart boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeMap {
    pub chart: usize,
    pub values: LatticeMap<MatN>,
    pub collar: usize,
}

impl GaugeMap {
    pub fn new(chart: usize, values: LatticeMap<MatN>) -> Self {
        GaugeMap { chart, values, collar: 1 }
    }

    pub fn check(&self, b: &GeneralizedBundle, tol: f64) -> Result<()> {
        if self.chart >= b.groups.len() {
            return Err(Error::InvalidInput(format!("gauge map on unknown chart {}", self.chart)));
        }
        check_membership(b, self.chart, &self.values, tol)?;
        let bad: Vec<usize> = collar_sites(&b.atlas, self.chart, self.collar)
            .into_iter()
            .filter(|&s| (&self.values.values[s] - &MatN::identity(b.fiber_dim)).max_abs() > tol)
            .collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::CollarViolation { sites: bad })
        }
    }

    /// Pointwise inverse.
    pub fn inverse(&self) -> Result<GaugeMap> {
        let mut values = Vec::with_capacity(self.values.len());
        for m in &self.values.values {
            values.push(m.inverse()?);
        }
        Ok(GaugeMap { chart: self.chart, values: LatticeMap::new(self.values.chart.clone(), values)?, collar: self.collar })
    }
}

/// `psi_bar(p) = sigma0(p) g(p)^-1 sigma0(p)^-1 psi(p)` on the support chart,
/// carried to the other charts through the overlap transitions. Sites
/// where `g` is exactly the identity are left untouched.
pub fn gauge_transform(
    b: &GeneralizedBundle,
    psi: &ParticleField,
    g: &GaugeMap,
    sigma0: &[ObserverSection],
    tol: f64,
) -> Result<ParticleField> {
    g.check(b, tol)?;
    if psi.charts.len() != b.atlas.charts.len() || sigma0.len() != b.atlas.charts.len() {
        return Err(Error::ShapeMismatch("field or observer does not cover the atlas".into()));
    }
    let c = g.chart;
    psi.charts[c].same_grid(&g.values)?;
    sigma0[c].frames.same_grid(&g.values)?;
    let mut out = psi.clone();
    let identity = MatN::identity(b.fiber_dim);
    let partners = b.atlas.partners(c)?;
    for (site, gm) in g.values.values.iter().enumerate() {
        if *gm == identity {
            continue;
        }
        let frame = &sigma0[c].frames.values[site];
        let fi = frame.inverse().map_err(|_| Error::SingularFrame { site })?;
        let act = &(frame * &gm.inverse()?) * &fi;
        let v = act.mul_vec(&psi.charts[c].values[site]);
        if let Some(list) = partners.get(&site) {
            for (other, t, trans) in list {
                out.charts[*other].values[*t] = trans.inverse()?.mul_vec(&v);
            }
        }
        out.charts[c].values[site] = v;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub chart: usize,
    pub site: usize,
    pub invariant: String,
    pub value: f64,
    pub value_bar: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GaugeSolution {
    /// One map per chart and the largest pointwise residual.
    Solved { maps: Vec<LatticeMap<MatN>>, residual: f64 },
    NoSolution(Witness),
    Undecided { chart: usize, site: usize, residual: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub seed: u64,
    /// Random restarts of the local search after the start at the identity.
    pub restarts: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-9, seed: 0, restarts: 8 }
    }
}

/// What the pointwise solver needs to know about a group.
struct GroupAnalysis {
    spec: GroupSpec,
    basis: Vec<MatN>,
    covectors: Vec<DVector<f64>>,
    forms: Vec<MatN>,
    /// Lower Cholesky factor of a definite invariant form when the group's
    /// identity component is the full rotation group of that form.
    definite: Option<DMatrix<f64>>,
}

impl GroupAnalysis {
    fn new(spec: &GroupSpec) -> Self {
        let basis = spec.lie_algebra_basis();
        let n = spec.dim();
        let forms = spec.invariant_forms();
        let mut definite = None;
        if basis.len() == n * (n - 1) / 2 {
            for f in &forms {
                for sign in [1.0, -1.0] {
                    let m = &f.0 * sign;
                    if let Some(ch) = m.clone().cholesky() {
                        definite = Some(ch.l());
                        break;
                    }
                }
                if definite.is_some() {
                    break;
                }
            }
        }
        GroupAnalysis { spec: spec.clone(), covectors: spec.invariant_covectors(), basis, forms, definite }
    }
}

#[derive(Default)]
struct AnalysisCache(Vec<GroupAnalysis>);

impl AnalysisCache {
    fn get(&mut self, spec: &GroupSpec) -> &GroupAnalysis {
        if let Some(i) = self.0.iter().position(|a| &a.spec == spec) {
            return &self.0[i];
        }
        self.0.push(GroupAnalysis::new(spec));
        self.0.last().expect("just pushed")
    }
}

enum SiteSolve {
    /// `h` with `h c = c_bar`.
    Found(MatN),
    Certified { invariant: String, value: f64, value_bar: f64 },
    Undecided(f64),
}

fn rotation_between(u: &DVector<f64>, w: &DVector<f64>) -> Option<DMatrix<f64>> {
    let n = u.len();
    let cos = u.dot(w);
    if cos > -1.0 + 1e-12 {
        let k = w * u.transpose() - u * w.transpose();
        return Some(DMatrix::identity(n, n) + &k + &k * &k / (1.0 + cos));
    }
    if n < 2 {
        return None;
    }
    // Antipodal: half turn in the plane of u and the axis least aligned with it.
    let axis = (0..n).min_by(|&i, &j| u[i].abs().total_cmp(&u[j].abs())).unwrap_or(0);
    let mut v = DVector::from_fn(n, |i, _| if i == axis { 1.0 } else { 0.0 });
    v -= u * u.dot(&v);
    v /= v.norm();
    Some(DMatrix::identity(n, n) - 2.0 * u * u.transpose() - 2.0 * &v * v.transpose())
}

fn solve_site(a: &GroupAnalysis, c: &DVector<f64>, cbar: &DVector<f64>, seed: u64, opts: &SolveOptions) -> SiteSolve {
    let n = c.len();
    let scale = 1.0 + c.amax().max(cbar.amax());
    if (c - cbar).amax() <= opts.tol * scale {
        return SiteSolve::Found(MatN::identity(n));
    }

    if let Some(l) = &a.definite {
        let y = l.transpose() * c;
        let ybar = l.transpose() * cbar;
        let (ny, nybar) = (y.norm_squared(), ybar.norm_squared());
        if (ny - nybar).abs() > opts.tol * (1.0 + ny.max(nybar)) {
            return SiteSolve::Certified { invariant: "definite invariant form".into(), value: ny, value_bar: nybar };
        }
        if ny == 0.0 {
            return SiteSolve::Found(MatN::identity(n));
        }
        let Some(q) = rotation_between(&(&y / ny.sqrt()), &(&ybar / nybar.sqrt())) else {
            return SiteSolve::Undecided((c - cbar).amax());
        };
        let lt_inv = match l.transpose().try_inverse() {
            Some(m) => m,
            None => return SiteSolve::Undecided(f64::INFINITY),
        };
        let h = MatN(&lt_inv * q * l.transpose());
        let residual = (h.mul_vec(c) - cbar).amax();
        return if residual <= opts.tol * scale { SiteSolve::Found(h) } else { SiteSolve::Undecided(residual) };
    }

    for nu in &a.covectors {
        let (x, xbar) = (nu.dot(c), nu.dot(cbar));
        if (x - xbar).abs() > opts.tol * scale {
            return SiteSolve::Certified { invariant: "invariant covector".into(), value: x, value_bar: xbar };
        }
    }
    for s in &a.forms {
        let (x, xbar) = (c.dot(&s.mul_vec(c)), cbar.dot(&s.mul_vec(cbar)));
        if (x - xbar).abs() > opts.tol * scale * scale {
            return SiteSolve::Certified { invariant: "invariant form".into(), value: x, value_bar: xbar };
        }
    }
    if a.basis.is_empty() {
        return SiteSolve::Undecided((c - cbar).amax());
    }

    let p = a.basis.len();
    let eval = |x: &DVector<f64>| {
        let (e, d) = exp_with_derivatives(&a.basis, x.as_slice());
        let r = e.mul_vec(c) - cbar;
        let mut j = DMatrix::zeros(n, p);
        for (col, di) in d.iter().enumerate() {
            j.set_column(col, &di.mul_vec(c));
        }
        (r, j)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for attempt in 0..=opts.restarts {
        let x0 = if attempt == 0 {
            DVector::zeros(p)
        } else {
            DVector::from_fn(p, |_, _| rng.gen_range(-2.0..2.0))
        };
        let (x, res) = levenberg_marquardt(x0, 200, eval);
        if res <= opts.tol * scale {
            return SiteSolve::Found(exp_with_derivatives(&a.basis, x.as_slice()).0);
        }
        best = best.min(res);
    }
    SiteSolve::Undecided(best)
}

fn site_seed(seed: u64, chart: usize, site: usize) -> u64 {
    seed ^ ((chart as u64) << 48) ^ (site as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Pointwise `g(p)` in `G_p` with `sigma0 g^-1 sigma0^-1 psi = psi_bar`.
///
/// Orbit invariants of the identity component certify `NoSolution`;
/// failures of the local search without such a certificate are `Undecided`.
pub fn solve_gauge_map(
    b: &GeneralizedBundle,
    psi: &ParticleField,
    psi_bar: &ParticleField,
    sigma0: &[ObserverSection],
    opts: SolveOptions,
) -> Result<GaugeSolution> {
    let nc = b.atlas.charts.len();
    if psi.charts.len() != nc || psi_bar.charts.len() != nc || sigma0.len() != nc {
        return Err(Error::ShapeMismatch("field or observer does not cover the atlas".into()));
    }
    let mut cache = AnalysisCache::default();
    let mut maps = Vec::with_capacity(nc);
    let mut residual: f64 = 0.0;
    for chart in 0..nc {
        let c = coordinates(&sigma0[chart], &psi.charts[chart])?;
        let cbar = coordinates(&sigma0[chart], &psi_bar.charts[chart])?;
        let mut values = Vec::with_capacity(c.len());
        for site in 0..c.len() {
            let a = cache.get(b.group(chart, site));
            match solve_site(a, &c.values[site], &cbar.values[site], site_seed(opts.seed, chart, site), &opts) {
                SiteSolve::Found(h) => {
                    residual = residual.max((h.mul_vec(&c.values[site]) - &cbar.values[site]).amax());
                    values.push(h.inverse()?);
                }
                SiteSolve::Certified { invariant, value, value_bar } => {
                    return Ok(GaugeSolution::NoSolution(Witness { chart, site, invariant, value, value_bar }));
                }
                SiteSolve::Undecided(r) => return Ok(GaugeSolution::Undecided { chart, site, residual: r }),
            }
        }
        maps.push(LatticeMap::new(c.chart.clone(), values)?);
    }
    Ok(GaugeSolution::Solved { maps, residual })
}

#[derive(Clone, Debug, PartialEq)]
pub enum OrbitResult {
    Yes { chain: Vec<GaugeMap> },
    No { witness: Witness },
    Undecided { reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitOptions {
    pub max_chain: usize,
    pub collar: usize,
    /// Number of sites over which a chart step is blended from the
    /// identity on the collar to the full pointwise solution.
    pub ramp: usize,
    pub solve: SolveOptions,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        OrbitOptions { max_chain: 4, collar: 1, ramp: 1, solve: SolveOptions::default() }
    }
}

fn mismatched_sites(a: &LatticeMap<DVector<f64>>, b: &LatticeMap<DVector<f64>>, tol: f64) -> Vec<usize> {
    a.values
        .iter()
        .zip(&b.values)
        .enumerate()
        .filter(|(_, (x, y))| (*x - *y).amax() > tol * (1.0 + x.amax().max(y.amax())))
        .map(|(s, _)| s)
        .collect()
}

/// Bounded search for a chain of chart-supported gauge maps carrying `psi`
/// to `psi_bar`.
pub fn same_orbit(
    b: &GeneralizedBundle,
    psi: &ParticleField,
    psi_bar: &ParticleField,
    sigma0: &[ObserverSection],
    opts: OrbitOptions,
) -> Result<OrbitResult> {
    if opts.max_chain == 0 {
        return Err(Error::InvalidInput("chain budget must be at least 1".into()));
    }
    let tol = opts.solve.tol;
    let close = |f: &ParticleField| -> Result<bool> {
        Ok(f.charts.iter().zip(&psi_bar.charts).all(|(x, y)| mismatched_sites(x, y, tol).is_empty()))
    };
    if psi.max_diff(psi_bar)? <= tol * (1.0 + psi.max_norm()) {
        return Ok(OrbitResult::Yes { chain: Vec::new() });
    }
    let global = match solve_gauge_map(b, psi, psi_bar, sigma0, opts.solve)? {
        GaugeSolution::NoSolution(witness) => return Ok(OrbitResult::No { witness }),
        GaugeSolution::Undecided { chart, site, residual } => {
            return Ok(OrbitResult::Undecided {
                reason: format!("no pointwise solution found at chart {chart} site {site} (residual {residual:.3e})"),
            })
        }
        GaugeSolution::Solved { maps, .. } => maps,
    };

    if b.atlas.charts.len() == 1 && b.atlas.overlaps.is_empty() {
        let g = GaugeMap { chart: 0, values: global.into_iter().next().expect("one chart"), collar: opts.collar };
        let out = gauge_transform(b, psi, &g, sigma0, tol.max(1e-9))?;
        return Ok(if close(&out)? {
            OrbitResult::Yes { chain: vec![g] }
        } else {
            OrbitResult::Undecided { reason: "pointwise solution does not reproduce the target".into() }
        });
    }

    let mut cache = AnalysisCache::default();
    let mut current = psi.clone();
    let mut chain = Vec::new();
    while chain.len() < opts.max_chain {
        let (chart, bad) = (0..b.atlas.charts.len())
            .map(|c| (c, mismatched_sites(&current.charts[c], &psi_bar.charts[c], tol).len()))
            .max_by_key(|&(c, n)| (n, std::cmp::Reverse(c)))
            .expect("atlas has charts");
        if bad == 0 {
            return Ok(OrbitResult::Yes { chain });
        }
        let depth = collar_depth(&b.atlas, chart, opts.collar);
        let c = coordinates(&sigma0[chart], &current.charts[chart])?;
        let cbar = coordinates(&sigma0[chart], &psi_bar.charts[chart])?;
        let mut values = Vec::with_capacity(c.len());
        for site in 0..c.len() {
            if depth[site] <= 0 {
                values.push(MatN::identity(b.fiber_dim));
                continue;
            }
            let a = cache.get(b.group(chart, site));
            let h = match solve_site(a, &c.values[site], &cbar.values[site], site_seed(opts.solve.seed, chart, site), &opts.solve) {
                SiteSolve::Found(h) => h,
                _ => {
                    return Ok(OrbitResult::Undecided { reason: format!("chart step failed at chart {chart} site {site}") })
                }
            };
            let g = h.inverse()?;
            let beta = (depth[site] as f64 / opts.ramp.max(1) as f64).min(1.0);
            if beta < 1.0 {
                match logm(&g) {
                    Ok(l) => values.push(expm(&l.scale(beta))),
                    Err(e) => return Ok(OrbitResult::Undecided { reason: e.to_string() }),
                }
            } else {
                values.push(g);
            }
        }
        let g = GaugeMap { chart, values: LatticeMap::new(c.chart.clone(), values)?, collar: opts.collar };
        current = match gauge_transform(b, &current, &g, sigma0, tol.max(1e-9)) {
            Ok(f) => f,
            Err(Error::NotInFiberGroup { .. }) | Err(Error::CollarViolation { .. }) => {
                return Ok(OrbitResult::Undecided { reason: "chart step left the fiber group".into() })
            }
            Err(e) => return Err(e),
        };
        chain.push(g);
    }
    Ok(if close(&current)? {
        OrbitResult::Yes { chain }
    } else {
        OrbitResult::Undecided { reason: format!("chain budget of {} exhausted", opts.max_chain) }
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Indistinguishable {
    True,
    False(Witness),
    Undecided { sample: usize },
}

/// Samples standard observers `sigma = sigma0 r` and, for each, looks for
/// `sigma_bar` giving `psi_bar` the same coordinates that `sigma` gives `psi`.
pub fn naturally_indistinguishable(
    b: &GeneralizedBundle,
    psi: &ParticleField,
    psi_bar: &ParticleField,
    sigma0: &[ObserverSection],
    samples: usize,
    seed: u64,
    opts: SolveOptions,
) -> Result<Indistinguishable> {
    if samples == 0 {
        return Err(Error::InvalidInput("need at least one observer sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut undecided = None;
    for sample in 0..samples {
        let mut sigma = Vec::with_capacity(sigma0.len());
        for (chart, s0) in sigma0.iter().enumerate() {
            let r = random_gauge_values(b, chart, rng.gen(), 0.5);
            sigma.push(observer_transform(b, chart, s0, &r, opts.tol.max(1e-8))?);
        }
        match solve_gauge_map(b, psi_bar, psi, &sigma, SolveOptions { seed: rng.gen(), ..opts })? {
            GaugeSolution::Solved { maps, .. } => {
                for (chart, k) in maps.iter().enumerate() {
                    let sbar = observer_transform(b, chart, &sigma[chart], k, opts.tol.max(1e-8))?;
                    let lhs = coordinates(&sigma[chart], &psi.charts[chart])?;
                    let rhs = coordinates(&sbar, &psi_bar.charts[chart])?;
                    if !mismatched_sites(&lhs, &rhs, opts.tol.max(1e-9) * 10.0).is_empty() {
                        undecided.get_or_insert(sample);
                    }
                }
            }
            GaugeSolution::NoSolution(w) => return Ok(Indistinguishable::False(w)),
            GaugeSolution::Undecided { .. } => {
                undecided.get_or_insert(sample);
            }
        }
    }
    Ok(match undecided {
        Some(sample) => Indistinguishable::Undecided { sample },
        None => Indistinguishable::True,
    })
}

/// Smooth seeded values in the identity component of each `G_p`:
/// `exp(sum c_i(x) X_i)` with `|c_i| <= scale`.
pub fn random_gauge_values(b: &GeneralizedBundle, chart: usize, seed: u64, scale: f64) -> LatticeMap<MatN> {
    let ch = b.chart(chart);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = ch.d();
    let max_basis = b.groups[chart].values.iter().map(GroupSpec::algebra_dimension).max().unwrap_or(0);
    let params: Vec<(f64, Vec<(f64, f64, f64)>)> = (0..max_basis)
        .map(|_| {
            let offset = rng.gen_range(-1.0..1.0);
            let waves = (0..d)
                .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.5..2.0), rng.gen_range(0.0..std::f64::consts::TAU)))
                .collect();
            (offset, waves)
        })
        .collect();
    let mut basis_cache: Vec<(GroupSpec, Vec<MatN>)> = Vec::new();
    LatticeMap::from_fn(ch, |site, x| {
        let spec = b.group(chart, site);
        let basis = match basis_cache.iter().find(|(s, _)| s == spec) {
            Some((_, basis)) => basis.clone(),
            None => {
                let basis = spec.lie_algebra_basis();
                basis_cache.push((spec.clone(), basis.clone()));
                basis
            }
        };
        let mut gen = MatN::zeros(b.fiber_dim);
        for (xi, (offset, waves)) in basis.iter().zip(&params) {
            let wave: f64 = waves.iter().zip(x).map(|(&(a, w, ph), &xd)| a * (w * xd + ph).sin()).sum();
            let coef = scale * (offset + wave) / (1.0 + d as f64);
            gen = &gen + &xi.scale(coef);
        }
        expm(&gen)
    })
}

/// A random gauge map equal to the identity on the collar of `chart`.
pub fn random_gauge_map(b: &GeneralizedBundle, chart: usize, seed: u64, scale: f64, collar: usize) -> GaugeMap {
    let mut values = random_gauge_values(b, chart, seed, scale);
    for s in collar_sites(&b.atlas, chart, collar) {
        values.values[s] = MatN::identity(b.fiber_dim);
    }
    GaugeMap { chart, values, collar }
}

/// Smooth bump `exp(1 - 1/(1 - r^2/R^2))` inside radius `R`, exactly zero outside.
pub fn bump(x: &[f64], center: &[f64], radius: f64) -> f64 {
    let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>() / (radius * radius);
    if r2 >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r2)).exp()
    }
}

/// `exp(amplitude * bump(x) * generator)`, the exact identity where the
/// bump vanishes.
pub fn bump_gauge_values(chart: &Chart, generator: &MatN, amplitude: f64, center: &[f64], radius: f64) -> LatticeMap<MatN> {
    LatticeMap::from_fn(chart, |_, x| {
        let w = bump(x, center, radius);
        if w == 0.0 {
            MatN::identity(generator.n())
        } else {
            expm(&generator.scale(amplitude * w))
        }
    })
}
