//! JSON chart documents.
//!
//! ```json
//! {
//!   "name": "sphere",
//!   "dim": 2,
//!   "coords": ["theta", "phi"],
//!   "domain": {"lower": [0.01, "-inf"], "upper": [3.1315926535897933, "inf"]},
//!   "metric": [["r^2", "0"], ["0", "r^2*sin(theta)^2"]],
//!   "params": {"r": 1.0}
//! }
//! ```
//!
//! `domain` defaults to all of `R^dim` and `params` to none.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Domain, MetricSpec};
use crate::error::{GeomError, Result};

/// A domain bound: a number or one of the strings `"inf"`, `"+inf"`, `"-inf"`
/// (the Unicode minus sign is accepted too).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Number(f64),
    Text(String),
}

impl Bound {
    pub fn value(&self) -> Result<f64> {
        match self {
            Bound::Number(v) => Ok(*v),
            Bound::Text(s) => match s.trim() {
                "inf" | "+inf" | "infinity" | "+infinity" => Ok(f64::INFINITY),
                "-inf" | "\u{2212}inf" | "-infinity" | "\u{2212}infinity" => Ok(f64::NEG_INFINITY),
                other => Err(GeomError::Schema(format!("invalid domain bound `{other}`"))),
            },
        }
    }

    pub fn from_value(v: f64) -> Self {
        if v == f64::INFINITY {
            Bound::Text("inf".into())
        } else if v == f64::NEG_INFINITY {
            Bound::Text("-inf".into())
        } else {
            Bound::Number(v)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainDocument {
    pub lower: Vec<Bound>,
    pub upper: Vec<Bound>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    #[serde(default = "default_name")]
    pub name: String,
    pub dim: usize,
    pub coords: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainDocument>,
    pub metric: Vec<Vec<String>>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

fn default_name() -> String {
    "custom".into()
}

impl SpecDocument {
    pub fn into_spec(self) -> Result<MetricSpec> {
        let m = self.dim;
        if m == 0 {
            return Err(GeomError::Schema("`dim` must be positive".into()));
        }
        if self.coords.len() != m {
            return Err(GeomError::Schema(format!(
                "`coords` has {} entries but `dim` is {m}",
                self.coords.len()
            )));
        }
        if self.metric.len() != m || self.metric.iter().any(|row| row.len() != m) {
            return Err(GeomError::Schema(format!("`metric` must be a {m} x {m} grid")));
        }
        let domain = match &self.domain {
            None => Domain::unbounded(m),
            Some(d) => {
                if d.lower.len() != m || d.upper.len() != m {
                    return Err(GeomError::Schema(format!(
                        "`domain` bounds must have {m} entries each"
                    )));
                }
                let lower = d.lower.iter().map(Bound::value).collect::<Result<_>>()?;
                let upper = d.upper.iter().map(Bound::value).collect::<Result<_>>()?;
                Domain::new(lower, upper)?
            }
        };
        let metric = self.metric.into_iter().flatten().collect();
        MetricSpec::new(self.name, self.coords, domain, metric, self.params)
    }
}

/// Parses and checks a chart document. Expressions are parsed against the
/// coordinates followed by the parameters.
pub fn load_spec(text: &str) -> Result<MetricSpec> {
    let doc: SpecDocument = serde_json::from_str(text).map_err(|e| {
        GeomError::Schema(format!("{e}"))
    })?;
    doc.into_spec()
}

impl MetricSpec {
    pub fn to_document(&self) -> SpecDocument {
        let m = self.dim();
        SpecDocument {
            name: self.name().to_string(),
            dim: m,
            coords: self.coords().to_vec(),
            domain: Some(DomainDocument {
                lower: self.domain().lower.iter().map(|v| Bound::from_value(*v)).collect(),
                upper: self.domain().upper.iter().map(|v| Bound::from_value(*v)).collect(),
            }),
            metric: (0..m)
                .map(|i| (0..m).map(|j| self.component_source(i, j).to_string()).collect())
                .collect(),
            params: self.params().iter().cloned().collect(),
        }
    }
}
