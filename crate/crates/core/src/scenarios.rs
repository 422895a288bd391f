//! The shipped example inputs, generated deterministically.

use nalgebra::DVector;
use serde_json::{json, Value};

use crate::bundle::ObserverSection;
use crate::connection::{ConnectionForm, DensityKind, DensitySpec, Representation};
use crate::gauge::{gauge_transform, random_gauge_map, ParticleField};
use crate::io::{to_value, BundleDoc, ConnectionDoc, FieldDoc, GaugeSampleDoc, KFieldDoc, MatricesDoc, SeedDoc, SectionPairDoc};
use crate::linalg::MatN;
use crate::manifold::{circle_atlas, Chart, LatticeMap};
use crate::matgroups::{galilei_boost, lorentz_boost, spatial_rotation_z, GroupSpec, KValue};

fn rot(t: f64) -> MatN {
    MatN::from_row_slice(2, &[t.cos(), -t.sin(), t.sin(), t.cos()])
}

fn j() -> MatN {
    MatN::from_row_slice(2, &[0.0, -1.0, 1.0, 0.0])
}

/// Cyclic permutation of the spatial axes.
fn axis_cycle() -> MatN {
    MatN::from_row_slice(4, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0])
}

fn line(n: usize, lo: f64, hi: f64) -> Chart {
    Chart::spanning("U", vec![n], &[lo], &[hi]).expect("valid chart")
}

fn kfield(chart: Chart, k: impl Fn(f64) -> KValue) -> Value {
    let k = (0..chart.num_sites()).map(|s| k(chart.coords(s)[0])).collect();
    to_value(&KFieldDoc { chart, k })
}

/// The gauge-check base: a unit-scale field and a smooth SO(2) connection in link form.
pub fn gauge_chart() -> Chart {
    Chart::spanning("U", vec![9, 9], &[0.0, 0.0], &[1.0, 1.0]).expect("valid chart")
}

pub fn gauge_field(chart: &Chart) -> LatticeMap<DVector<f64>> {
    LatticeMap::from_fn(chart, |_, x| DVector::from_vec(vec![(x[0] + 0.3).cos() + x[1], 0.5 * (2.0 * x[1]).sin() - x[0]]))
}

pub fn gauge_connection(chart: &Chart) -> ConnectionForm {
    ConnectionForm {
        representation: Representation::Differential,
        dirs: vec![
            LatticeMap::from_fn(chart, |_, x| j().scale(x[1])),
            LatticeMap::from_fn(chart, |_, x| j().scale((3.0 * x[0]).cos())),
        ],
    }
    .to_links()
}

/// The bump gauge map of the naive-kinetic scenario.
pub fn shipped_bump() -> GaugeSampleDoc {
    GaugeSampleDoc::Bump { generator: j(), amplitude: 2.0, center: vec![0.5, 0.5], radius: 0.4 }
}

fn field_json(chart: &Chart, group: &GroupSpec, psi: &LatticeMap<DVector<f64>>) -> Value {
    let values: Vec<Vec<f64>> = psi.values.iter().map(|v| v.iter().copied().collect()).collect();
    json!({"chart": chart, "group": group, "psi": values})
}

fn gauge_scenario(name: &str, field: Value, conn: &ConnectionForm, gauges: Vec<GaugeSampleDoc>, densities: &[DensityKind]) -> Vec<(String, Value)> {
    let densities: Vec<DensitySpec> = densities.iter().map(|&k| DensitySpec::new(k)).collect();
    vec![
        (format!("gauge/{name}/field.json"), field),
        (format!("gauge/{name}/connection.json"), json!({"connection": ConnectionDoc::of(conn)})),
        (format!("gauge/{name}/gauge.json"), json!({"gauges": gauges, "densities": densities})),
    ]
}

fn smooth(chart: &Chart, m: usize) -> LatticeMap<DVector<f64>> {
    LatticeMap::from_fn(chart, |_, x| DVector::from_fn(m, |i, _| 1.0 + (i as f64 + 1.0) * x[0] - 0.5 * x[x.len() - 1]))
}

fn orbit_scenario(name: &str, doc: &BundleDoc, psi: &ParticleField, psi_bar: &ParticleField) -> Vec<(String, Value)> {
    vec![
        (format!("orbit/{name}/bundle.json"), to_value(doc)),
        (format!("orbit/{name}/psi.json"), to_value(&FieldDoc::of(psi))),
        (format!("orbit/{name}/psibar.json"), to_value(&FieldDoc::of(psi_bar))),
    ]
}

fn orbit_scenarios() -> Vec<(String, Value)> {
    let mut out = Vec::new();
    let square = Chart::spanning("U", vec![6, 6], &[-1.0, -1.0], &[1.0, 1.0]).expect("valid chart");
    let doc = BundleDoc { chart: Some(square.clone()), group: Some(GroupSpec::so2()), ..Default::default() };
    let b = doc.bundle().expect("valid bundle");
    let sigma0 = [ObserverSection::identity(&square, 2)];
    let psi = ParticleField::single(smooth(&square, 2));
    let g = random_gauge_map(&b, 0, 5, 1.0, 1);
    let moved = gauge_transform(&b, &psi, &g, &sigma0, 1e-9).expect("gauge map in SO(2)");
    out.extend(orbit_scenario("round_trip", &doc, &psi, &moved));

    let mut stretched = psi.clone();
    stretched.charts[0].values[14] *= 2.0;
    out.extend(orbit_scenario("norm_mismatch", &doc, &psi, &stretched));

    let trans = rot(0.3);
    let atlas = circle_atlas(24, 16, &trans).expect("valid atlas");
    let doc = BundleDoc { atlas: Some(atlas.clone()), group: Some(GroupSpec::so2()), ..Default::default() };
    let b = doc.bundle().expect("valid bundle");
    let gi = trans.inverse().expect("rotation");
    let f = |t: f64| DVector::from_vec(vec![1.0 + 0.3 * t.sin(), 0.5 * t.cos()]);
    let psi = ParticleField {
        charts: vec![
            LatticeMap::from_fn(&atlas.charts[0], |_, x| f(x[0])),
            LatticeMap::from_fn(&atlas.charts[1], |_, x| gi.mul_vec(&f(x[0]))),
        ],
    };
    let sigma0: Vec<_> = atlas.charts.iter().map(|c| ObserverSection::identity(c, 2)).collect();
    let mut target = psi.clone();
    for (chart, seed) in [(0usize, 11u64), (1, 12)] {
        target = gauge_transform(&b, &target, &random_gauge_map(&b, chart, seed, 1.0, 1), &sigma0, 1e-9).expect("gauge map in SO(2)");
    }
    out.extend(orbit_scenario("two_charts", &doc, &psi, &target));
    out
}

/// Relative paths and contents of every shipped data file.
pub fn all() -> Vec<(String, Value)> {
    let mut out = Vec::new();
    let boosts = vec![
        lorentz_boost(0.3, 1.0),
        lorentz_boost(-0.5, 1.0),
        &lorentz_boost(0.6, 1.0) * &spatial_rotation_z(0.7),
    ];
    out.push(("classify/boosts.json".into(), to_value(&MatricesDoc { matrices: boosts })));
    out.push(("classify/galilei.json".into(), to_value(&MatricesDoc { matrices: vec![galilei_boost(0.5), &galilei_boost(-1.5) * &spatial_rotation_z(0.2)] })));
    out.push(("classify/rotations.json".into(), to_value(&MatricesDoc { matrices: vec![spatial_rotation_z(0.4), axis_cycle()] })));
    out.push(("classify/mixed.json".into(), to_value(&MatricesDoc { matrices: vec![galilei_boost(0.5), lorentz_boost(0.5, 1.0)] })));

    out.push(("structure/lorentz.json".into(), kfield(line(9, 0.0, 1.0), |_| KValue::Finite(-1.0))));
    out.push(("structure/sign_crossing.json".into(), kfield(line(8, -1.0, 1.0), KValue::Finite)));
    out.push(("structure/galilean.json".into(), kfield(line(9, 0.0, 1.0), |_| KValue::Omega)));

    let c33 = line(33, -1.0, 1.0);
    let k = (0..33).map(|s| KValue::Finite(c33.coords(s)[0])).collect();
    out.push(("bundle/congruence.json".into(), to_value(&BundleDoc { chart: Some(c33), k: Some(k), ..Default::default() })));
    let plane = Chart::spanning("U", vec![6, 5], &[0.0, 0.0], &[1.0, 1.0]).expect("valid chart");
    let so2 = BundleDoc {
        chart: Some(plane),
        group: Some(GroupSpec::so2()),
        sections: vec![SectionPairDoc {
            chart: "U".into(),
            first: SeedDoc { site: 0, frame: MatN::identity(2) },
            second: SeedDoc { site: 7, frame: rot(0.8) },
        }],
        ..Default::default()
    };
    out.push(("bundle/so2.json".into(), to_value(&so2)));

    let chart = gauge_chart();
    let psi = gauge_field(&chart);
    let links = gauge_connection(&chart);
    let so2 = GroupSpec::so2();
    out.extend(gauge_scenario(
        "link_covariant",
        field_json(&chart, &so2, &psi),
        &links,
        vec![GaugeSampleDoc::Random { count: 20, scale: 1.0 }],
        &[DensityKind::CovariantKinetic, DensityKind::YangMills],
    ));
    out.extend(gauge_scenario(
        "naive_bump",
        field_json(&chart, &so2, &psi),
        &links,
        vec![GaugeSampleDoc::Constant { matrix: rot(0.7) }, shipped_bump()],
        &[DensityKind::NaiveKinetic, DensityKind::CovariantKinetic],
    ));
    let scaling = GroupSpec::Generators(vec![MatN::from_diagonal(&[1.0, 0.0])]);
    let profile = LatticeMap::from_fn(&chart, |_, x| MatN::from_diagonal(&[(3.0 * x[0] - x[1]).exp(), 1.0]));
    out.extend(gauge_scenario(
        "footnote",
        field_json(&chart, &scaling, &psi),
        &ConnectionForm::zero(&chart, 2, Representation::Differential),
        vec![GaugeSampleDoc::Values { values: profile.values }, GaugeSampleDoc::Random { count: 5, scale: 2.0 }],
        &[DensityKind::FootnoteDegenerate],
    ));

    out.extend(orbit_scenarios());
    out
}

/// The shipped data rendered as file text.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}
