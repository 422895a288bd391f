//! Connections as local forms or link variables, covariant derivatives,
//! curvature and Lagrangian densities; Christoffel symbols and Galilean
//! parallelism checks for spacetime connections.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{expm, logm, MatN};
use crate::manifold::{finite_diff, Chart, LatticeMap};
use crate::matgroups::GroupSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// Algebra-valued `A_mu(p)`; `D_mu = d_mu + A_mu`.
    Differential,
    /// Group-valued `U_mu(p)` transporting fibers from `p` to `p + e_mu`;
    /// the value at the last site of each line is never read.
    Link,
}

/// A connection on one chart with a fixed fiber group.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionForm {
    pub representation: Representation,
    pub dirs: Vec<LatticeMap<MatN>>,
}

impl ConnectionForm {
    pub fn zero(chart: &Chart, m: usize, representation: Representation) -> Self {
        let v = match representation {
            Representation::Differential => MatN::zeros(m),
            Representation::Link => MatN::identity(m),
        };
        ConnectionForm { representation, dirs: (0..chart.d()).map(|_| LatticeMap::constant(chart, v.clone())).collect() }
    }

    pub fn chart(&self) -> &Chart {
        &self.dirs[0].chart
    }

    pub fn fiber_dim(&self) -> usize {
        self.dirs[0].values[0].n()
    }

    /// Link variables `U_mu(p) = exp(-h_mu A_mu(p))`.
    pub fn to_links(&self) -> ConnectionForm {
        match self.representation {
            Representation::Link => self.clone(),
            Representation::Differential => {
                let chart = self.chart().clone();
                ConnectionForm {
                    representation: Representation::Link,
                    dirs: self
                        .dirs
                        .iter()
                        .enumerate()
                        .map(|(mu, a)| a.map(|x| expm(&x.scale(-chart.spacing[mu]))))
                        .collect(),
                }
            }
        }
    }

    pub fn validate(&self, group: &GroupSpec, tol: f64) -> Result<()> {
        let chart = self.chart();
        if self.dirs.len() != chart.d() {
            return Err(Error::ShapeMismatch("one component per chart direction is required".into()));
        }
        let m = group.dim();
        for d in &self.dirs {
            d.same_grid(&self.dirs[0])?;
            if d.values.iter().any(|x| x.n() != m) {
                return Err(Error::ShapeMismatch("connection values do not match the fiber".into()));
            }
        }
        let mut bad = Vec::new();
        match self.representation {
            Representation::Differential => {
                let basis = group.lie_algebra_basis();
                for d in &self.dirs {
                    for (s, x) in d.values.iter().enumerate() {
                        let mut rest = x.clone();
                        for e in &basis {
                            rest = &rest - &e.scale(e.dot(x));
                        }
                        if rest.max_abs() > tol.max(1e-8) {
                            bad.push(s);
                        }
                    }
                }
            }
            Representation::Link => {
                for (mu, d) in self.dirs.iter().enumerate() {
                    for (s, u) in d.values.iter().enumerate() {
                        if chart.step(s, mu, 1).is_some() && !group.contains(u, tol.max(1e-8))? {
                            bad.push(s);
                        }
                    }
                }
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            bad.sort_unstable();
            bad.dedup();
            Err(Error::NotInFiberGroup { sites: bad })
        }
    }
}

fn check_shapes(psi: &LatticeMap<DVector<f64>>, a: &ConnectionForm, mu: usize) -> Result<()> {
    if mu >= a.dirs.len() {
        return Err(Error::ShapeMismatch(format!("direction {mu} out of range")));
    }
    psi.same_grid(&a.dirs[mu])?;
    if psi.values.first().map(|v| v.len()) != Some(a.fiber_dim()) {
        return Err(Error::ShapeMismatch("field and connection fiber dimensions differ".into()));
    }
    Ok(())
}

/// `D_mu psi`. Links use `(U(p)^-1 psi(p+e) - psi(p)) / h`, and
/// `(psi(p) - U(p-e) psi(p-e)) / h` at the last site of each line.
pub fn covariant_derivative(psi: &LatticeMap<DVector<f64>>, a: &ConnectionForm, mu: usize) -> Result<LatticeMap<DVector<f64>>> {
    check_shapes(psi, a, mu)?;
    let chart = &psi.chart;
    match a.representation {
        Representation::Differential => {
            let mut d = finite_diff(psi, mu)?;
            for (v, (x, p)) in d.values.iter_mut().zip(a.dirs[mu].values.iter().zip(&psi.values)) {
                *v += x.mul_vec(p);
            }
            Ok(d)
        }
        Representation::Link => {
            let h = chart.spacing[mu];
            let u = &a.dirs[mu].values;
            let mut out = Vec::with_capacity(psi.len());
            for s in 0..chart.num_sites() {
                let v = match (chart.step(s, mu, 1), chart.step(s, mu, -1)) {
                    (Some(t), _) => (u[s].inverse()?.mul_vec(&psi.values[t]) - &psi.values[s]) / h,
                    (None, Some(b)) => (&psi.values[s] - u[b].mul_vec(&psi.values[b])) / h,
                    (None, None) => DVector::zeros(psi.values[s].len()),
                };
                out.push(v);
            }
            LatticeMap::new(chart.clone(), out)
        }
    }
}

/// `psi'(p) = g(p)^-1 psi(p)`.
pub fn transform_field(psi: &LatticeMap<DVector<f64>>, g: &LatticeMap<MatN>) -> Result<LatticeMap<DVector<f64>>> {
    psi.same_grid(g)?;
    let mut out = Vec::with_capacity(psi.len());
    for (v, m) in psi.values.iter().zip(&g.values) {
        out.push(m.inverse()?.mul_vec(v));
    }
    LatticeMap::new(psi.chart.clone(), out)
}

fn check_in_group(g: &LatticeMap<MatN>, group: &GroupSpec, tol: f64) -> Result<()> {
    let mut bad = Vec::new();
    for (s, m) in g.values.iter().enumerate() {
        if !group.contains(m, tol)? {
            bad.push(s);
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::NotInFiberGroup { sites: bad })
    }
}

/// The connection seen after `psi -> g^-1 psi`:
/// `A' = g^-1 A g + g^-1 dg` or `U'(p) = g(p+e)^-1 U(p) g(p)`.
pub fn transform_connection(a: &ConnectionForm, g: &LatticeMap<MatN>, group: &GroupSpec, tol: f64) -> Result<ConnectionForm> {
    check_in_group(g, group, tol)?;
    let chart = a.chart().clone();
    a.dirs[0].same_grid(g)?;
    let ginv: Vec<MatN> = g.values.iter().map(MatN::inverse).collect::<Result<_>>()?;
    let mut dirs = Vec::with_capacity(a.dirs.len());
    for (mu, am) in a.dirs.iter().enumerate() {
        let values = match a.representation {
            Representation::Differential => {
                let dg = finite_diff(g, mu)?;
                (0..chart.num_sites())
                    .map(|s| &(&(&ginv[s] * &am.values[s]) * &g.values[s]) + &(&ginv[s] * &dg.values[s]))
                    .collect()
            }
            Representation::Link => (0..chart.num_sites())
                .map(|s| match chart.step(s, mu, 1) {
                    Some(t) => &(&ginv[t] * &am.values[s]) * &g.values[s],
                    None => am.values[s].clone(),
                })
                .collect(),
        };
        dirs.push(LatticeMap::new(chart.clone(), values)?);
    }
    Ok(ConnectionForm { representation: a.representation, dirs })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovarianceReport {
    pub representation: Representation,
    /// `max |d(g^-1 psi) - g^-1 d psi|` over all sites and directions.
    pub delta_naive: f64,
    /// `max |D'(g^-1 psi) - g^-1 D psi|`, over interior sites for the
    /// differential form and all sites for links.
    pub delta_cov: f64,
    pub passed: bool,
}

pub fn check_covariance(
    psi: &LatticeMap<DVector<f64>>,
    a: &ConnectionForm,
    g: &LatticeMap<MatN>,
    group: &GroupSpec,
    tol: f64,
) -> Result<CovarianceReport> {
    let psi2 = transform_field(psi, g)?;
    let a2 = transform_connection(a, g, group, tol.max(1e-9))?;
    let chart = &psi.chart;
    let ginv: Vec<MatN> = g.values.iter().map(MatN::inverse).collect::<Result<_>>()?;
    let mut delta_naive: f64 = 0.0;
    let mut delta_cov: f64 = 0.0;
    for mu in 0..chart.d() {
        let d = finite_diff(psi, mu)?;
        let d2 = finite_diff(&psi2, mu)?;
        let cd = covariant_derivative(psi, a, mu)?;
        let cd2 = covariant_derivative(&psi2, &a2, mu)?;
        for s in 0..chart.num_sites() {
            delta_naive = delta_naive.max((&d2.values[s] - ginv[s].mul_vec(&d.values[s])).amax());
            if a.representation == Representation::Link || chart.is_interior(s) {
                delta_cov = delta_cov.max((&cd2.values[s] - ginv[s].mul_vec(&cd.values[s])).amax());
            }
        }
    }
    Ok(CovarianceReport { representation: a.representation, delta_naive, delta_cov, passed: delta_cov <= tol })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Curvature {
    pub mu: usize,
    pub nu: usize,
    pub f: LatticeMap<MatN>,
}

/// `F_{mu nu}` for every `mu < nu`. Link curvature is `-log(W) / (h_mu h_nu)`
/// with `W` the plaquette transport around the cell at `p`; sites on the
/// far faces reuse the nearest cell.
pub fn curvature(a: &ConnectionForm) -> Result<Vec<Curvature>> {
    let chart = a.chart().clone();
    let d = chart.d();
    if d < 2 {
        return Err(Error::ShapeMismatch("curvature needs at least two directions".into()));
    }
    let mut out = Vec::new();
    for mu in 0..d {
        for nu in mu + 1..d {
            let values = match a.representation {
                Representation::Differential => {
                    let dmu = finite_diff(&a.dirs[nu], mu)?;
                    let dnu = finite_diff(&a.dirs[mu], nu)?;
                    (0..chart.num_sites())
                        .map(|s| {
                            &(&dmu.values[s] - &dnu.values[s]) + &a.dirs[mu].values[s].commutator(&a.dirs[nu].values[s])
                        })
                        .collect()
                }
                Representation::Link => {
                    if chart.dims[mu] < 2 || chart.dims[nu] < 2 {
                        return Err(Error::ShapeMismatch("plaquettes need two sites per direction".into()));
                    }
                    let area = chart.spacing[mu] * chart.spacing[nu];
                    let mut vals = Vec::with_capacity(chart.num_sites());
                    for s in 0..chart.num_sites() {
                        let mut m = chart.multi_index(s);
                        m[mu] = m[mu].min(chart.dims[mu] - 2);
                        m[nu] = m[nu].min(chart.dims[nu] - 2);
                        let p = chart.index(&m);
                        let pm = chart.step(p, mu, 1).expect("clamped");
                        let pn = chart.step(p, nu, 1).expect("clamped");
                        let umu = &a.dirs[mu].values;
                        let unu = &a.dirs[nu].values;
                        let w = &(&(&unu[p].inverse()? * &umu[pn].inverse()?) * &unu[pm]) * &umu[p];
                        vals.push(logm(&w)?.scale(-1.0 / area));
                    }
                    vals
                }
            };
            out.push(Curvature { mu, nu, f: LatticeMap::new(chart.clone(), values)? });
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum DensityKind {
    NaiveKinetic,
    CovariantKinetic,
    YangMills,
    /// Depends only on the last field component and its derivatives.
    FootnoteDegenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensitySpec {
    pub kind: DensityKind,
    /// Fiber bilinear form for the kinetic kinds; the identity if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<MatN>,
}

impl DensitySpec {
    pub fn new(kind: DensityKind) -> Self {
        DensitySpec { kind, form: None }
    }

    fn form_for(&self, m: usize, group: &GroupSpec) -> Result<MatN> {
        let b = self.form.clone().unwrap_or_else(|| MatN::identity(m));
        if b.n() != m {
            return Err(Error::ShapeMismatch("density form does not match the fiber".into()));
        }
        let defect = group
            .lie_algebra_basis()
            .iter()
            .map(|x| (&(&x.transpose() * &b) + &(&b * x)).max_abs())
            .fold(0.0, f64::max);
        if defect > 1e-10 {
            return Err(Error::NonInvariantForm { defect });
        }
        Ok(b)
    }
}

/// Whether the trace pairing `tr(XY)` is degenerate on the algebra.
pub fn trace_form_degenerate(group: &GroupSpec) -> bool {
    let basis = group.lie_algebra_basis();
    if basis.is_empty() {
        return false;
    }
    let gram = DMatrix::from_fn(basis.len(), basis.len(), |i, j| (&basis[i] * &basis[j]).trace());
    gram.rank(1e-10) < basis.len()
}

pub fn density(spec: &DensitySpec, psi: &LatticeMap<DVector<f64>>, a: &ConnectionForm, group: &GroupSpec) -> Result<LatticeMap<f64>> {
    let chart = psi.chart.clone();
    let m = psi.values.first().map(|v| v.len()).unwrap_or(0);
    let n = chart.num_sites();
    let mut out = vec![0.0; n];
    match spec.kind {
        DensityKind::NaiveKinetic | DensityKind::CovariantKinetic => {
            let b = spec.form_for(m, group)?;
            for mu in 0..chart.d() {
                let d = if spec.kind == DensityKind::NaiveKinetic {
                    finite_diff(psi, mu)?
                } else {
                    covariant_derivative(psi, a, mu)?
                };
                for (acc, v) in out.iter_mut().zip(&d.values) {
                    *acc += v.dot(&b.mul_vec(v));
                }
            }
        }
        DensityKind::YangMills => {
            for f in curvature(a)? {
                for (acc, x) in out.iter_mut().zip(&f.f.values) {
                    *acc -= (x * x).trace();
                }
            }
        }
        DensityKind::FootnoteDegenerate => {
            if m < 2 {
                return Err(Error::ShapeMismatch("the degenerate density needs two components".into()));
            }
            let last = psi.map(|v| v[m - 1]);
            for mu in 0..chart.d() {
                let d = finite_diff(&last, mu)?;
                for (acc, v) in out.iter_mut().zip(&d.values) {
                    *acc += v * v;
                }
            }
            for (acc, v) in out.iter_mut().zip(&last.values) {
                *acc += v * v;
            }
        }
    }
    LatticeMap::new(chart, out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub kind: DensityKind,
    /// Max site deviation of the density for each gauge sample.
    pub deltas: Vec<f64>,
    pub max_delta: f64,
    pub non_invariant: bool,
    /// Set for Yang-Mills densities over algebras with a degenerate trace form.
    pub degenerate_pairing: bool,
}

pub fn invariance_report(
    spec: &DensitySpec,
    psi: &LatticeMap<DVector<f64>>,
    a: &ConnectionForm,
    group: &GroupSpec,
    gauges: &[LatticeMap<MatN>],
    tol: f64,
) -> Result<InvarianceReport> {
    let base = density(spec, psi, a, group)?;
    let mut deltas = Vec::with_capacity(gauges.len());
    for g in gauges {
        let psi2 = transform_field(psi, g)?;
        let a2 = transform_connection(a, g, group, 1e-8)?;
        deltas.push(density(spec, &psi2, &a2, group)?.max_diff(&base)?);
    }
    let max_delta = deltas.iter().copied().fold(0.0, f64::max);
    Ok(InvarianceReport {
        kind: spec.kind,
        deltas,
        max_delta,
        non_invariant: max_delta > tol,
        degenerate_pairing: spec.kind == DensityKind::YangMills && trace_form_degenerate(group),
    })
}

/// Christoffel symbols `Gamma^a_{bc}` at every site, stored flat with
/// index `(a * n + b) * n + c`.
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffel {
    pub n: usize,
    pub gamma: LatticeMap<DVector<f64>>,
}

impl Christoffel {
    pub fn zeros(chart: &Chart, n: usize) -> Self {
        Christoffel { n, gamma: LatticeMap::constant(chart, DVector::zeros(n * n * n)) }
    }

    pub fn from_fn(chart: &Chart, n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        Christoffel {
            n,
            gamma: LatticeMap::from_fn(chart, |s, _| {
                DVector::from_fn(n * n * n, |i, _| f(s, i / (n * n), (i / n) % n, i % n))
            }),
        }
    }

    pub fn get(&self, site: usize, a: usize, b: usize, c: usize) -> f64 {
        self.gamma.values[site][(a * self.n + b) * self.n + c]
    }

    pub fn max_diff(&self, other: &Christoffel) -> Result<f64> {
        self.gamma.max_diff(&other.gamma)
    }

    fn combine(&self, a: f64, other: &Christoffel, b: f64) -> Result<Christoffel> {
        Ok(Christoffel { n: self.n, gamma: self.gamma.combine(a, &other.gamma, b)? })
    }

    /// `Gamma^a_{cb}`.
    pub fn swapped(&self) -> Christoffel {
        let n = self.n;
        Christoffel::from_fn(&self.gamma.chart, n, |s, a, b, c| self.get(s, a, c, b))
    }
}

/// `d_b` of each site value along every coordinate; coordinates beyond the
/// chart dimension have zero derivative.
fn coordinate_derivatives<V: crate::manifold::FieldValue>(f: &LatticeMap<V>, n: usize) -> Result<Vec<LatticeMap<V>>> {
    let d = f.chart.d();
    if d > n {
        return Err(Error::ShapeMismatch(format!("chart dimension {d} exceeds tensor dimension {n}")));
    }
    (0..n)
        .map(|b| if b < d { finite_diff(f, b) } else { Ok(f.map(|v| v.zero_like())) })
        .collect()
}

pub fn levi_civita(gfield: &LatticeMap<MatN>) -> Result<Christoffel> {
    let n = gfield.values.first().map(MatN::n).unwrap_or(0);
    let mut inv = Vec::with_capacity(gfield.len());
    for (site, g) in gfield.values.iter().enumerate() {
        inv.push(g.inverse().map_err(|_| Error::SingularMetric { site })?);
    }
    let dg = coordinate_derivatives(gfield, n)?;
    Ok(Christoffel::from_fn(&gfield.chart, n, |s, a, b, c| {
        let mut sum = 0.0;
        for d in 0..n {
            let t = dg[b].values[s].get(d, c) + dg[c].values[s].get(d, b) - dg[d].values[s].get(b, c);
            sum += inv[s].get(a, d) * t;
        }
        0.5 * sum
    }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub levi_civita: Christoffel,
    pub symmetric: Christoffel,
    pub antisymmetric: Christoffel,
}

impl Decomposition {
    pub fn reassemble(&self) -> Result<Christoffel> {
        self.levi_civita.combine(1.0, &self.symmetric, 1.0)?.combine(1.0, &self.antisymmetric, 1.0)
    }
}

/// `Gamma = Gamma^g + T_S + T_A` with `T_S` symmetric and `T_A`
/// antisymmetric in the lower indices. `T_A` is taken as the remainder so
/// that reassembly is exact.
pub fn decompose_connection(gamma: &Christoffel, gfield: &LatticeMap<MatN>) -> Result<Decomposition> {
    gamma.gamma.same_grid(gfield)?;
    let lc = levi_civita(gfield)?;
    if lc.n != gamma.n {
        return Err(Error::ShapeMismatch("connection and metric dimensions differ".into()));
    }
    let delta = gamma.combine(1.0, &lc, -1.0)?;
    let sym = delta.combine(0.5, &delta.swapped(), 0.5)?;
    let anti = delta.combine(1.0, &sym, -1.0)?;
    Ok(Decomposition { levi_civita: lc, symmetric: sym, antisymmetric: anti })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GalileanReport {
    pub nabla_omega: f64,
    /// Restricted to `ker omega`.
    pub nabla_h: f64,
    pub d_omega: f64,
    pub torsion: f64,
    pub galilean: bool,
    /// A torsion-free Galilean connection with `d omega != 0` (never expected).
    pub inconsistent: bool,
}

pub fn check_galilean(gamma: &Christoffel, omega: &LatticeMap<DVector<f64>>, h: &LatticeMap<MatN>, tol: f64) -> Result<GalileanReport> {
    let n = gamma.n;
    gamma.gamma.same_grid(omega)?;
    gamma.gamma.same_grid(h)?;
    let d_om = coordinate_derivatives(omega, n)?;
    let d_h = coordinate_derivatives(h, n)?;
    let (mut nabla_omega, mut nabla_h, mut d_omega): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for s in 0..omega.len() {
        let w = &omega.values[s];
        if w.amax() == 0.0 {
            return Err(Error::InvalidInput(format!("omega vanishes at site {s}")));
        }
        let kernel = DMatrix::from_columns(&crate::linalg::nullspace(&DMatrix::from_row_slice(1, n, w.as_slice()), 1e-12));
        for b in 0..n {
            for c in 0..n {
                let conn: f64 = (0..n).map(|a| gamma.get(s, a, b, c) * w[a]).sum();
                nabla_omega = nabla_omega.max((d_om[b].values[s][c] - conn).abs());
                d_omega = d_omega.max((d_om[b].values[s][c] - d_om[c].values[s][b]).abs());
            }
            let hs = &h.values[s];
            let nh = DMatrix::from_fn(n, n, |c, d| {
                let mut v = d_h[b].values[s].get(c, d);
                for a in 0..n {
                    v -= gamma.get(s, a, b, c) * hs.get(a, d) + gamma.get(s, a, b, d) * hs.get(c, a);
                }
                v
            });
            nabla_h = nabla_h.max((kernel.transpose() * nh * &kernel).amax());
        }
    }
    let torsion = gamma.max_diff(&gamma.swapped())?;
    let galilean = nabla_omega <= tol && nabla_h <= tol;
    Ok(GalileanReport {
        nabla_omega,
        nabla_h,
        d_omega,
        torsion,
        galilean,
        inconsistent: galilean && torsion <= tol && d_omega > tol,
    })
}

/// Connections to test a Leibnizian structure against: zero, the
/// Levi-Civita connection of `omega^t omega + h`, a random symmetric one,
/// the symmetric one closest to parallelizing `omega`, and a torsionful
/// one that parallelizes `omega` exactly.
pub fn galilean_candidates(omega: &LatticeMap<DVector<f64>>, h: &LatticeMap<MatN>, seed: u64) -> Result<Vec<(String, Christoffel)>> {
    let chart = omega.chart.clone();
    let n = omega.values.first().map(|v| v.len()).unwrap_or(0);
    let d_om = coordinate_derivatives(omega, n)?;
    let metric = LatticeMap::new(
        chart.clone(),
        omega
            .values
            .iter()
            .zip(&h.values)
            .map(|(w, hm)| &MatN(w * w.transpose()) + hm)
            .collect(),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..n * n * n).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let random = Christoffel::from_fn(&chart, n, |_, a, b, c| {
        let (lo, hi) = (b.min(c), b.max(c));
        noise[(a * n + lo) * n + hi]
    });
    // u = omega itself, so omega(u) = |omega|^2 > 0.
    let adapted = |s: usize, a: usize, t: f64| t * omega.values[s][a] / omega.values[s].norm_squared();
    let least_squares = Christoffel::from_fn(&chart, n, |s, a, b, c| {
        adapted(s, a, 0.5 * (d_om[b].values[s][c] + d_om[c].values[s][b]))
    });
    let torsionful = Christoffel::from_fn(&chart, n, |s, a, b, c| adapted(s, a, d_om[b].values[s][c]));
    Ok(vec![
        ("zero".into(), Christoffel::zeros(&chart, n)),
        ("levi_civita".into(), levi_civita(&metric)?),
        ("random_symmetric".into(), random),
        ("least_squares_symmetric".into(), least_squares),
        ("torsionful".into(), torsionful),
    ])
}
