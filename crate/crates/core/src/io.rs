//! JSON input documents and their conversion into library values.

use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bundle::{example_congruence, GeneralizedBundle, ObserverSection};
use crate::connection::{ConnectionForm, DensitySpec, Representation};
use crate::error::{Error, Result};
use crate::gauge::{bump_gauge_values, random_gauge_values, ParticleField};
use crate::linalg::MatN;
use crate::manifold::{Atlas, Chart, LatticeMap};
use crate::matgroups::{GroupSpec, KValue};

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

/// Top-level keys of later documents replace those of earlier ones.
pub fn merge(docs: Vec<Value>) -> Result<Value> {
    let mut out = serde_json::Map::new();
    for d in docs {
        match d {
            Value::Object(m) => out.extend(m),
            _ => return Err(Error::InvalidInput("every input document must be a JSON object".into())),
        }
    }
    Ok(Value::Object(out))
}

pub fn parse<T: for<'de> Deserialize<'de>>(v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::InvalidInput(e.to_string()))
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatricesDoc {
    pub matrices: Vec<MatN>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KFieldDoc {
    pub chart: Chart,
    pub k: Vec<KValue>,
}

impl KFieldDoc {
    pub fn field(&self) -> Result<LatticeMap<KValue>> {
        self.chart.validate()?;
        LatticeMap::new(self.chart.clone(), self.k.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedDoc {
    pub site: usize,
    pub frame: MatN,
}

/// Two sections to grow on one chart and compare.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionPairDoc {
    pub chart: String,
    pub first: SeedDoc,
    pub second: SeedDoc,
}

/// A bundle over a single chart or an atlas. The fiber group is given
/// once, per site, or through `k` values for the congruence family.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BundleDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<Chart>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atlas: Option<Atlas>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<Vec<GroupSpec>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<KValue>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sections: Vec<SectionPairDoc>,
    /// Reference observer frames per chart; identity frames when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observers: Option<Vec<Vec<MatN>>>,
}

impl BundleDoc {
    pub fn atlas(&self) -> Result<Atlas> {
        match (&self.chart, &self.atlas) {
            (Some(c), None) => Ok(Atlas::single(c.clone())),
            (None, Some(a)) => Ok(a.clone()),
            _ => Err(Error::InvalidInput("give exactly one of \"chart\" and \"atlas\"".into())),
        }
    }

    pub fn bundle(&self) -> Result<GeneralizedBundle> {
        let atlas = self.atlas()?;
        for c in &atlas.charts {
            c.validate()?;
        }
        match (&self.group, &self.groups, &self.k) {
            (Some(g), None, None) => GeneralizedBundle::uniform(atlas, g.clone()),
            (None, Some(gs), None) => {
                if gs.len() != atlas.charts.len() {
                    return Err(Error::ShapeMismatch("one group list per chart is required".into()));
                }
                let fiber = gs.first().and_then(|g| g.first()).map(GroupSpec::dim).unwrap_or(0);
                let groups = atlas
                    .charts
                    .iter()
                    .zip(gs)
                    .map(|(c, g)| LatticeMap::new(c.clone(), g.clone()))
                    .collect::<Result<_>>()?;
                GeneralizedBundle::new(atlas, fiber, groups)
            }
            (None, None, Some(k)) => {
                if atlas.charts.len() != 1 {
                    return Err(Error::InvalidInput("k-parameterized bundles live on one chart".into()));
                }
                example_congruence(&LatticeMap::new(atlas.charts[0].clone(), k.clone())?)
            }
            _ => Err(Error::InvalidInput("give exactly one of \"group\", \"groups\" and \"k\"".into())),
        }
    }

    pub fn observers(&self, b: &GeneralizedBundle) -> Result<Vec<ObserverSection>> {
        match &self.observers {
            None => Ok(b.atlas.charts.iter().map(|c| ObserverSection::identity(c, b.fiber_dim)).collect()),
            Some(frames) => {
                if frames.len() != b.atlas.charts.len() {
                    return Err(Error::ShapeMismatch("one observer per chart is required".into()));
                }
                b.atlas
                    .charts
                    .iter()
                    .zip(frames)
                    .map(|(c, f)| Ok(ObserverSection { frames: LatticeMap::new(c.clone(), f.clone())? }))
                    .collect()
            }
        }
    }
}

fn vectors(chart: &Chart, values: &[Vec<f64>], m: usize) -> Result<LatticeMap<DVector<f64>>> {
    if values.iter().any(|v| v.len() != m) {
        return Err(Error::ShapeMismatch(format!("field values must have {m} components")));
    }
    LatticeMap::new(chart.clone(), values.iter().map(|v| DVector::from_column_slice(v)).collect())
}

/// One list of fiber vectors per chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldDoc {
    pub charts: Vec<Vec<Vec<f64>>>,
}

impl FieldDoc {
    pub fn of(f: &ParticleField) -> Self {
        FieldDoc { charts: f.charts.iter().map(|m| m.values.iter().map(|v| v.iter().copied().collect()).collect()).collect() }
    }

    pub fn field(&self, b: &GeneralizedBundle) -> Result<ParticleField> {
        if self.charts.len() != b.atlas.charts.len() {
            return Err(Error::ShapeMismatch("one value list per chart is required".into()));
        }
        let charts = b
            .atlas
            .charts
            .iter()
            .zip(&self.charts)
            .map(|(c, v)| vectors(c, v, b.fiber_dim))
            .collect::<Result<_>>()?;
        Ok(ParticleField { charts })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectionDoc {
    pub representation: Representation,
    pub dirs: Vec<Vec<MatN>>,
}

impl ConnectionDoc {
    pub fn of(a: &ConnectionForm) -> Self {
        ConnectionDoc { representation: a.representation, dirs: a.dirs.iter().map(|d| d.values.clone()).collect() }
    }

    pub fn form(&self, chart: &Chart) -> Result<ConnectionForm> {
        if self.dirs.len() != chart.d() {
            return Err(Error::ShapeMismatch("one connection component per direction is required".into()));
        }
        let dirs = self.dirs.iter().map(|d| LatticeMap::new(chart.clone(), d.clone())).collect::<Result<_>>()?;
        Ok(ConnectionForm { representation: self.representation, dirs })
    }
}

/// Gauge maps to test densities against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GaugeSampleDoc {
    Values { values: Vec<MatN> },
    Constant { matrix: MatN },
    /// `count` smooth maps drawn from the run seed.
    Random { count: usize, scale: f64 },
    /// `exp(a * bump(x) * generator)`.
    Bump { generator: MatN, amplitude: f64, center: Vec<f64>, radius: f64 },
}

impl GaugeSampleDoc {
    pub fn expand(&self, b: &GeneralizedBundle, seed: u64) -> Result<Vec<LatticeMap<MatN>>> {
        let chart = b.chart(0);
        match self {
            GaugeSampleDoc::Values { values } => Ok(vec![LatticeMap::new(chart.clone(), values.clone())?]),
            GaugeSampleDoc::Constant { matrix } => Ok(vec![LatticeMap::constant(chart, matrix.clone())]),
            GaugeSampleDoc::Random { count, scale } => {
                Ok((0..*count).map(|i| random_gauge_values(b, 0, seed.wrapping_add(i as u64), *scale)).collect())
            }
            GaugeSampleDoc::Bump { generator, amplitude, center, radius } => {
                if center.len() != chart.d() {
                    return Err(Error::ShapeMismatch("bump center must have one coordinate per direction".into()));
                }
                Ok(vec![bump_gauge_values(chart, generator, *amplitude, center, *radius)])
            }
        }
    }
}

/// The merged gauge-check input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeCheckDoc {
    pub chart: Chart,
    pub group: GroupSpec,
    pub psi: Vec<Vec<f64>>,
    pub connection: ConnectionDoc,
    pub gauges: Vec<GaugeSampleDoc>,
    pub densities: Vec<DensitySpec>,
}

impl GaugeCheckDoc {
    pub fn bundle(&self) -> Result<GeneralizedBundle> {
        self.chart.validate()?;
        GeneralizedBundle::uniform(Atlas::single(self.chart.clone()), self.group.clone())
    }

    pub fn psi(&self) -> Result<LatticeMap<DVector<f64>>> {
        vectors(&self.chart, &self.psi, self.group.dim())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn merge_prefers_later_keys() {
        let m = merge(vec![json!({"a": 1, "b": 2}), json!({"b": 3})]).unwrap();
        assert_eq!(m, json!({"a": 1, "b": 3}));
        assert!(merge(vec![json!([1])]).is_err());
    }

    #[test]
    fn kfield_doc() {
        let d: KFieldDoc = parse(json!({"chart": {"dims": [3], "origin": [0.0], "spacing": [1.0]}, "k": [-1.0, 0.0, "omega"]})).unwrap();
        let f = d.field().unwrap();
        assert_eq!(f.values[2], KValue::Omega);
        let short: KFieldDoc = parse(json!({"chart": {"dims": [3], "origin": [0.0], "spacing": [1.0]}, "k": [1.0]})).unwrap();
        assert!(short.field().is_err());
    }

    #[test]
    fn bundle_doc_variants() {
        let chart = json!({"dims": [4], "origin": [0.0], "spacing": [0.5]});
        let d: BundleDoc = parse(json!({"chart": chart, "group": {"ok": -1.0}})).unwrap();
        assert_eq!(d.bundle().unwrap().fiber_dim, 4);
        let d: BundleDoc = parse(json!({"chart": chart, "k": [-1.0, 0.0, 1.0, 2.0]})).unwrap();
        assert_eq!(d.bundle().unwrap().groups[0].len(), 4);
        let d: BundleDoc = parse(json!({"chart": chart})).unwrap();
        assert!(d.bundle().is_err());
        let d = BundleDoc { chart: Some(Chart::spanning("U", vec![2], &[0.0], &[1.0]).unwrap()), group: Some(GroupSpec::so2()), ..Default::default() };
        let b = d.bundle().unwrap();
        assert!(FieldDoc { charts: vec![vec![vec![1.0, 0.0]; 2]] }.field(&b).is_ok());
        assert!(FieldDoc { charts: vec![vec![vec![1.0]; 2]] }.field(&b).is_err());
    }
}
