//! Subcommand implementations behind the `kframe` binary. Every command
//! produces a JSON report and an exit code; text output is rendered from
//! the same report.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::bundle::{
    check_constant_dimension, check_transitions, compatibility_check, example_congruence, example_degenerate, find_local_section,
    trivial_so2_bundle, FamilySection, GeneralizedBundle, SectionOptions, SectionResult,
};
use crate::connection::{check_covariance, invariance_report, DensityKind};
use crate::error::{Error, Result};
use crate::gauge::{naturally_indistinguishable, same_orbit, Indistinguishable, OrbitOptions, OrbitResult, SolveOptions};
use crate::io::{merge, parse, read_json, to_value, BundleDoc, FieldDoc, GaugeCheckDoc, KFieldDoc, MatricesDoc, SeedDoc};
use crate::manifold::{Chart, LatticeMap};
use crate::matgroups::{classify, in_group, speed_of_interactions, ClassifyResult, KValue};
use crate::scenarios;
use crate::structures::{structure_field, structure_from_k};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_UNDECIDED: u8 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub tol: f64,
    pub seed: u64,
    pub pto: bool,
    pub format: Format,
    pub expect_violation: bool,
    pub max_chain: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { tol: 1e-9, seed: 0, pto: false, format: Format::Text, expect_violation: false, max_chain: 4 }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidInput(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.max_chain == 0 {
            return Err(Error::InvalidInput("max-chain must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub report: Value,
    pub code: u8,
}

impl Outcome {
    fn new(command: &str, summary: String, mut body: Map<String, Value>, code: u8) -> Self {
        body.insert("command".into(), json!(command));
        body.insert("summary".into(), json!(summary));
        body.insert("exit_code".into(), json!(code));
        Outcome { report: Value::Object(body), code }
    }

    pub fn input_error(command: &str, err: &Error) -> Self {
        let mut body = Map::new();
        body.insert("error".into(), json!(err.to_string()));
        Outcome::new(command, format!("input error: {err}"), body, EXIT_INPUT)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.report).expect("reports serialize");
                s.push('\n');
                s
            }
            Format::Text => render_text(&self.report),
        }
    }
}

fn body(pairs: Vec<(&str, Value)>) -> Map<String, Value> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn is_flat(v: &Value) -> bool {
    match v {
        Value::Object(_) => false,
        Value::Array(a) => a.iter().all(is_flat),
        _ => true,
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn write_text(out: &mut String, key: &str, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    if is_flat(v) {
        out.push_str(&format!("{pad}{key}: {}\n", scalar(v)));
        return;
    }
    out.push_str(&format!("{pad}{key}:\n"));
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                write_text(out, k, x, indent + 1);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                write_text(out, &format!("[{i}]"), x, indent + 1);
            }
        }
        _ => unreachable!("flat values handled above"),
    }
}

/// Summary line, then every other report entry as an indented tree.
/// Numbers are printed exactly as in the JSON form.
pub fn render_text(report: &Value) -> String {
    let mut out = String::new();
    if let Some(s) = report.get("summary").and_then(Value::as_str) {
        out.push_str(s);
        out.push('\n');
    }
    if let Value::Object(m) = report {
        for (k, v) in m {
            if k != "summary" {
                write_text(&mut out, k, v, 0);
            }
        }
    }
    out
}

fn guard(command: &str, cfg: &RunConfig, f: impl FnOnce() -> Result<Outcome>) -> Outcome {
    match cfg.validate().and_then(|_| f()) {
        Ok(o) => o,
        Err(e) => Outcome::input_error(command, &e),
    }
}

fn describe_k(k: KValue) -> String {
    format!("k={k}")
}

pub fn cmd_classify(path: &Path, cfg: &RunConfig) -> Outcome {
    guard("classify", cfg, || {
        let doc: MatricesDoc = parse(read_json(path)?)?;
        if doc.matrices.is_empty() {
            return Err(Error::InvalidInput("the matrix list is empty".into()));
        }
        if let Some(i) = doc.matrices.iter().position(|m| m.n() != 4) {
            return Err(Error::ShapeMismatch(format!("matrix {i} is not 4x4")));
        }
        let mut result = classify(&doc.matrices, cfg.tol);
        if let (ClassifyResult::Unique { k }, true) = (&result, cfg.pto) {
            if let Some(i) = doc.matrices.iter().position(|a| !in_group(a, *k, cfg.tol, true).unwrap_or(false)) {
                result = ClassifyResult::Inconsistent { diagnostic: format!("matrix {i} is not time-orthochronous") };
            }
        }
        let group = result.group_name();
        let mut b = body(vec![("count", json!(doc.matrices.len())), ("result", to_value(&result)), ("group", json!(group))]);
        let (summary, code) = match &result {
            ClassifyResult::Unique { k } => {
                let speed = speed_of_interactions(*k);
                b.insert("structure".into(), to_value(&structure_from_k(*k)));
                b.insert("speed".into(), to_value(&speed));
                (format!("unique {}, {group}, {speed}", describe_k(*k)), EXIT_PASS)
            }
            ClassifyResult::Arbitrary => (format!("arbitrary, {group}"), EXIT_PASS),
            ClassifyResult::Inconsistent { diagnostic } => (format!("inconsistent: {diagnostic}"), EXIT_FAIL),
            ClassifyResult::Residual { candidates } => {
                let ks: Vec<String> = candidates.iter().map(|k| describe_k(*k)).collect();
                (format!("residual candidates {}", ks.join(", ")), EXIT_FAIL)
            }
        };
        Ok(Outcome::new("classify", summary, b, code))
    })
}

pub fn cmd_structure(path: &Path, cfg: &RunConfig) -> Outcome {
    guard("structure", cfg, || {
        let doc: KFieldDoc = parse(read_json(path)?)?;
        let sf = structure_field(&doc.field()?);
        let parts: Vec<String> = sf.regions.iter().map(|r| format!("{} ({} sites)", r.tag.name(), r.sites)).collect();
        let summary = format!("{} region(s): {}; {} interface site(s)", sf.regions.len(), parts.join(", "), sf.interfaces.len());
        let b = body(vec![
            ("regions", to_value(&sf.regions)),
            ("interfaces", to_value(&sf.interfaces)),
            ("zero_crossings", to_value(&sf.zero_crossings)),
            ("labels", to_value(&sf.labels)),
        ]);
        Ok(Outcome::new("structure", summary, b, EXIT_PASS))
    })
}

#[derive(Serialize)]
struct SectionCheck {
    chart: String,
    first: Value,
    second: Value,
    compatible: Option<bool>,
    max_jump: Option<f64>,
}

fn section_value(r: &SectionResult) -> Value {
    match r {
        SectionResult::Found(_) => json!({"tag": "found"}),
        SectionResult::NoSection { site, reason } => json!({"tag": "no_section", "site": site, "reason": reason}),
    }
}

fn check_bundle(b: &GeneralizedBundle, pairs: &[(usize, SeedDoc, SeedDoc)], cfg: &RunConfig) -> Result<(Map<String, Value>, Vec<String>)> {
    let mut violations = Vec::new();
    let dims = check_constant_dimension(b);
    if !dims.constant() {
        violations.push(format!("algebra dimension changes at {} site(s)", dims.flagged.len()));
    }
    let transitions = check_transitions(b, cfg.tol)?;
    if !transitions.passed {
        violations.push("transition maps are inconsistent".into());
    }
    let opts = SectionOptions { tol: cfg.tol.max(1e-9), ..Default::default() };
    let mut sections = Vec::new();
    for (chart, first, second) in pairs {
        let s1 = find_local_section(b, *chart, first.site, &first.frame, opts)?;
        let s2 = find_local_section(b, *chart, second.site, &second.frame, opts)?;
        let mut check = SectionCheck {
            chart: b.chart(*chart).id.clone(),
            first: section_value(&s1),
            second: section_value(&s2),
            compatible: None,
            max_jump: None,
        };
        match (&s1, &s2) {
            (SectionResult::Found(a), SectionResult::Found(c)) => match compatibility_check(b, *chart, a, c, opts.tol.max(1e-8), opts.max_slope) {
                Ok(rep) => {
                    check.compatible = Some(rep.passed);
                    check.max_jump = Some(rep.smoothness.max_jump);
                    if !rep.passed {
                        violations.push(format!("sections on chart {} are not smoothly compatible", check.chart));
                    }
                }
                Err(Error::NotInFiberGroup { sites }) => {
                    check.compatible = Some(false);
                    violations.push(format!("section transition leaves the fiber group at {} site(s)", sites.len()));
                }
                Err(e) => return Err(e),
            },
            _ => violations.push(format!("no local section on chart {}", check.chart)),
        }
        sections.push(check);
    }
    let b = body(vec![
        ("fiber_dim", json!(b.fiber_dim)),
        ("dimension", to_value(&dims)),
        ("transitions", to_value(&transitions)),
        ("sections", to_value(&sections)),
        ("violations", to_value(&violations)),
    ]);
    Ok((b, violations))
}

fn default_pairs(b: &GeneralizedBundle) -> Vec<(usize, SeedDoc, SeedDoc)> {
    let id = crate::linalg::MatN::identity(b.fiber_dim);
    (0..b.atlas.charts.len())
        .map(|c| {
            let last = b.chart(c).num_sites() - 1;
            (c, SeedDoc { site: 0, frame: id.clone() }, SeedDoc { site: last, frame: id.clone() })
        })
        .collect()
}

fn bundle_outcome(b: &GeneralizedBundle, pairs: Vec<(usize, SeedDoc, SeedDoc)>, cfg: &RunConfig, label: &str) -> Result<Outcome> {
    let (mut body, violations) = check_bundle(b, &pairs, cfg)?;
    body.insert("bundle".into(), json!(label));
    let (summary, code) = if violations.is_empty() {
        (format!("pass: {label}, algebra dimension constant"), EXIT_PASS)
    } else {
        (format!("fail: {label}: {}", violations.join("; ")), EXIT_FAIL)
    };
    Ok(Outcome::new("bundle-check", summary, body, code))
}

/// `k(p)` for the built-in congruence example: `p` (or `p0`, the identity
/// profile through zero), `omega`, or a constant.
pub fn parse_k_profile(expr: &str) -> Result<Box<dyn Fn(f64) -> KValue>> {
    match expr.trim() {
        "p" | "p0" => Ok(Box::new(KValue::Finite)),
        "omega" => Ok(Box::new(|_| KValue::Omega)),
        s => {
            let k: f64 = s.parse().map_err(|_| Error::InvalidInput(format!("unknown k profile {s:?}")))?;
            if !k.is_finite() {
                return Err(Error::InvalidInput(format!("unknown k profile {s:?}")));
            }
            Ok(Box::new(move |_| KValue::Finite(k)))
        }
    }
}

pub fn cmd_bundle_check(input: Option<&Path>, example: Option<&str>, k: Option<&str>, cfg: &RunConfig) -> Outcome {
    guard("bundle-check", cfg, || match (input, example) {
        (Some(path), None) => {
            let doc: BundleDoc = parse(read_json(path)?)?;
            let b = doc.bundle()?;
            let pairs = if doc.sections.is_empty() {
                default_pairs(&b)
            } else {
                doc.sections
                    .iter()
                    .map(|p| Ok((b.atlas.chart_index(&p.chart)?, p.first.clone(), p.second.clone())))
                    .collect::<Result<_>>()?
            };
            bundle_outcome(&b, pairs, cfg, &path.display().to_string())
        }
        (None, Some("congruence")) => {
            let profile = parse_k_profile(k.unwrap_or("p"))?;
            let chart = Chart::spanning("U", vec![33], &[-1.0], &[1.0])?;
            let kfield = LatticeMap::from_fn(&chart, |_, x| profile(x[0]));
            let b = example_congruence(&kfield)?;
            let pairs = default_pairs(&b);
            bundle_outcome(&b, pairs, cfg, "congruence example")
        }
        (None, Some("so2")) => {
            let b = trivial_so2_bundle(Chart::spanning("U", vec![8, 8], &[0.0, 0.0], &[1.0, 1.0])?);
            let pairs = default_pairs(&b);
            bundle_outcome(&b, pairs, cfg, "trivial SO(2) bundle")
        }
        (None, Some("degenerate")) => {
            let rep = example_degenerate(33)?;
            let family = |s: &FamilySection| match s {
                FamilySection::Found(_) => json!({"tag": "found"}),
                FamilySection::NoSection { site, reason } => json!({"tag": "no_section", "site": site, "reason": reason}),
            };
            let z = rep.zero_site;
            let drop = (rep.fiber_dimensions[z.saturating_sub(1)], rep.fiber_dimensions[z]);
            let mut violations = Vec::new();
            if !rep.dimension.constant() {
                violations.push(format!("fiber dimension drops {}->{} at p={}", drop.0, drop.1, rep.family.p(z)));
            }
            if matches!(rep.across_zero, FamilySection::NoSection { .. }) {
                violations.push("no continuous section across p=0".into());
            }
            let b = body(vec![
                ("bundle", json!("degenerate example")),
                ("fiber_dimensions", to_value(&rep.fiber_dimensions)),
                ("zero_site", json!(z)),
                ("dimension", to_value(&rep.dimension)),
                ("across_zero", family(&rep.across_zero)),
                ("left_of_zero", family(&rep.left_of_zero)),
                ("violations", to_value(&violations)),
            ]);
            let code = if violations.is_empty() { EXIT_PASS } else { EXIT_FAIL };
            let summary = if violations.is_empty() { "pass: degenerate example".to_string() } else { format!("fail: {}", violations.join("; ")) };
            Ok(Outcome::new("bundle-check", summary, b, code))
        }
        (None, Some(other)) => Err(Error::InvalidInput(format!("unknown example {other:?}; expected congruence, degenerate or so2"))),
        (None, None) => Err(Error::InvalidInput("give a bundle file or --example".into())),
        (Some(_), Some(_)) => Err(Error::InvalidInput("give either a bundle file or --example, not both".into())),
    })
}

pub fn cmd_gauge_check(paths: &[PathBuf], cfg: &RunConfig) -> Outcome {
    guard("gauge-check", cfg, || {
        if paths.is_empty() {
            return Err(Error::InvalidInput("no input files".into()));
        }
        let docs = paths.iter().map(|p| read_json(p)).collect::<Result<Vec<_>>>()?;
        let doc: GaugeCheckDoc = parse(merge(docs)?)?;
        let b = doc.bundle()?;
        let psi = doc.psi()?;
        let conn = doc.connection.form(&doc.chart)?;
        conn.validate(&doc.group, 1e-8)?;
        let mut gauges = Vec::new();
        for (i, g) in doc.gauges.iter().enumerate() {
            gauges.extend(g.expand(&b, cfg.seed.wrapping_add(1000 * i as u64))?);
        }
        if gauges.is_empty() {
            return Err(Error::InvalidInput("no gauge samples".into()));
        }

        let mut problems = Vec::new();
        let mut delta_cov: f64 = 0.0;
        let mut delta_naive: f64 = 0.0;
        for g in &gauges {
            let rep = check_covariance(&psi, &conn, g, &doc.group, cfg.tol)?;
            delta_cov = delta_cov.max(rep.delta_cov);
            delta_naive = delta_naive.max(rep.delta_naive);
        }
        let exact = conn.representation == crate::connection::Representation::Link;
        if exact && delta_cov > cfg.tol {
            problems.push(format!("covariant derivative defect {delta_cov:e} exceeds tolerance"));
        }
        let mut densities = Vec::new();
        for spec in &doc.densities {
            let rep = invariance_report(spec, &psi, &conn, &doc.group, &gauges, cfg.tol)?;
            let name = to_value(&spec.kind);
            let name = name.as_str().unwrap_or("density");
            match (spec.kind, rep.non_invariant) {
                (DensityKind::NaiveKinetic, true) if !cfg.expect_violation => {
                    problems.push(format!("{name} is not invariant (max deviation {:e})", rep.max_delta))
                }
                (DensityKind::NaiveKinetic, false) if cfg.expect_violation => {
                    problems.push(format!("{name} violation expected but not detected"))
                }
                (DensityKind::NaiveKinetic, _) => {}
                (_, true) => problems.push(format!("{name} is not invariant (max deviation {:e})", rep.max_delta)),
                (_, false) => {}
            }
            densities.push(rep);
        }
        let b = body(vec![
            ("representation", to_value(&conn.representation)),
            ("samples", json!(gauges.len())),
            ("covariance", json!({"delta_cov": delta_cov, "delta_naive": delta_naive, "exact": exact})),
            ("densities", to_value(&densities)),
            ("expect_violation", json!(cfg.expect_violation)),
            ("problems", to_value(&problems)),
        ]);
        let (summary, code) = if problems.is_empty() {
            (format!("pass: {} gauge sample(s), covariance defect {delta_cov:e}", gauges.len()), EXIT_PASS)
        } else {
            (format!("fail: {}", problems.join("; ")), EXIT_FAIL)
        };
        Ok(Outcome::new("gauge-check", summary, b, code))
    })
}

pub fn cmd_orbit(psi: &Path, psi_bar: &Path, bundle: &Path, cfg: &RunConfig) -> Outcome {
    guard("orbit", cfg, || {
        let doc: BundleDoc = parse(read_json(bundle)?)?;
        let b = doc.bundle()?;
        let sigma0 = doc.observers(&b)?;
        let f: FieldDoc = parse(read_json(psi)?)?;
        let fb: FieldDoc = parse(read_json(psi_bar)?)?;
        let (f, fb) = (f.field(&b)?, fb.field(&b)?);
        let solve = SolveOptions { tol: cfg.tol, seed: cfg.seed, ..Default::default() };
        let opts = OrbitOptions { max_chain: cfg.max_chain, solve, ..Default::default() };
        let orbit = same_orbit(&b, &f, &fb, &sigma0, opts)?;
        let natural = naturally_indistinguishable(&b, &f, &fb, &sigma0, 8, cfg.seed, solve)?;
        let (orbit_value, summary, code) = match &orbit {
            OrbitResult::Yes { chain } => {
                let charts: Vec<&str> = chain.iter().map(|g| b.chart(g.chart).id.as_str()).collect();
                (
                    json!({"tag": "yes", "chain": charts}),
                    format!("yes: chain of {} chart step(s)", chain.len()),
                    EXIT_PASS,
                )
            }
            OrbitResult::No { witness } => (
                json!({"tag": "no", "witness": witness}),
                format!("no: {} differs at chart {} site {}", witness.invariant, b.chart(witness.chart).id, witness.site),
                EXIT_FAIL,
            ),
            OrbitResult::Undecided { reason } => (json!({"tag": "undecided", "reason": reason}), format!("undecided: {reason}"), EXIT_UNDECIDED),
        };
        let natural_value = match &natural {
            Indistinguishable::True => json!({"tag": "true"}),
            Indistinguishable::False(w) => json!({"tag": "false", "witness": w}),
            Indistinguishable::Undecided { sample } => json!({"tag": "undecided", "sample": sample}),
        };
        let body = body(vec![
            ("max_chain", json!(cfg.max_chain)),
            ("same_orbit", orbit_value),
            ("naturally_indistinguishable", natural_value),
        ]);
        Ok(Outcome::new("orbit", summary, body, code))
    })
}

pub fn cmd_examples(out: &Path, cfg: &RunConfig) -> Outcome {
    guard("examples", cfg, || {
        let mut written = Vec::new();
        for (rel, value) in scenarios::all() {
            let path = out.join(&rel);
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir).map_err(|e| Error::InvalidInput(format!("{}: {e}", dir.display())))?;
            }
            std::fs::write(&path, scenarios::render(&value)).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
            written.push(rel);
        }
        let summary = format!("wrote {} file(s) to {}", written.len(), out.display());
        Ok(Outcome::new("examples", summary, body(vec![("files", to_value(&written))]), EXIT_PASS))
    })
}
