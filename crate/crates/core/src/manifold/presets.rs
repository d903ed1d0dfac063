//! Built-in charts.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::{Domain, MetricSpec};
use crate::error::{GeomError, Result};

/// Margin keeping the polar angle away from the coordinate singularities.
pub const POLAR_MARGIN: f64 = 0.01;
/// Lower bound of the half-plane chart in `y`.
pub const HALFPLANE_MARGIN: f64 = 0.01;
/// Radial cut-off of the Schwarzschild chart, in units of `2M`.
pub const HORIZON_FACTOR: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    /// `diag(-1 x index, +1 x (dim - index))` on all of `R^dim`.
    SemiEuclidean { dim: usize, index: usize },
    /// Round sphere of radius `r` in `(theta, phi)`.
    Sphere { r: f64 },
    /// Poincare half-plane `(dx^2 + dy^2) / y^2`.
    HyperbolicHalfplane,
    /// Exterior Schwarzschild in `(t, r, theta, phi)` with mass `M`.
    Schwarzschild { mass: f64 },
}

fn param(params: &BTreeMap<String, f64>, key: &str, default: Option<f64>) -> Result<f64> {
    match (params.get(key), default) {
        (Some(v), _) if v.is_finite() => Ok(*v),
        (Some(v), _) => Err(GeomError::InvalidArgument(format!("{key} = {v} is not finite"))),
        (None, Some(d)) => Ok(d),
        (None, None) => Err(GeomError::InvalidArgument(format!(
            "preset needs parameter `{key}`"
        ))),
    }
}

fn count(params: &BTreeMap<String, f64>, key: &str, default: Option<f64>) -> Result<usize> {
    let v = param(params, key, default)?;
    if v < 0.0 || v.fract() != 0.0 || v > 64.0 {
        return Err(GeomError::InvalidArgument(format!(
            "{key} must be a small non-negative integer, got {v}"
        )));
    }
    Ok(v as usize)
}

fn reject_unknown(params: &BTreeMap<String, f64>, known: &[&str]) -> Result<()> {
    match params.keys().find(|k| !known.contains(&k.as_str())) {
        Some(k) => Err(GeomError::InvalidArgument(format!("unknown preset parameter `{k}`"))),
        None => Ok(()),
    }
}

impl Preset {
    pub const NAMES: [&'static str; 4] = [
        "semi_euclidean",
        "sphere",
        "hyperbolic_halfplane",
        "schwarzschild",
    ];

    pub fn from_name(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        match name {
            "semi_euclidean" => {
                reject_unknown(params, &["dim", "index"])?;
                let dim = count(params, "dim", None)?;
                let index = count(params, "index", Some(0.0))?;
                if dim == 0 || index > dim {
                    return Err(GeomError::InvalidArgument(format!(
                        "semi_euclidean needs 0 <= index <= dim and dim > 0 (dim={dim}, index={index})"
                    )));
                }
                Ok(Preset::SemiEuclidean { dim, index })
            }
            "sphere" => {
                reject_unknown(params, &["r"])?;
                let r = param(params, "r", Some(1.0))?;
                if r <= 0.0 {
                    return Err(GeomError::InvalidArgument(format!("sphere radius {r} must be positive")));
                }
                Ok(Preset::Sphere { r })
            }
            "hyperbolic_halfplane" => {
                reject_unknown(params, &[])?;
                Ok(Preset::HyperbolicHalfplane)
            }
            "schwarzschild" => {
                reject_unknown(params, &["M"])?;
                let mass = param(params, "M", Some(1.0))?;
                if mass <= 0.0 {
                    return Err(GeomError::InvalidArgument(format!("mass {mass} must be positive")));
                }
                Ok(Preset::Schwarzschild { mass })
            }
            other => Err(GeomError::UnknownPreset(other.to_string())),
        }
    }

    /// Index (number of negative directions) of the preset metric.
    pub fn expected_index(&self) -> usize {
        match self {
            Preset::SemiEuclidean { index, .. } => *index,
            Preset::Sphere { .. } | Preset::HyperbolicHalfplane => 0,
            Preset::Schwarzschild { .. } => 1,
        }
    }

    pub fn build(&self) -> Result<MetricSpec> {
        let strings = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        match *self {
            Preset::SemiEuclidean { dim, index } => {
                let coords = (1..=dim).map(|k| format!("x{k}")).collect();
                let metric = (0..dim * dim)
                    .map(|k| {
                        let (i, j) = (k / dim, k % dim);
                        match (i == j, i < index) {
                            (false, _) => "0",
                            (true, true) => "-1",
                            (true, false) => "1",
                        }
                        .to_string()
                    })
                    .collect();
                MetricSpec::new(
                    "semi_euclidean",
                    coords,
                    Domain::unbounded(dim),
                    metric,
                    BTreeMap::new(),
                )
            }
            Preset::Sphere { r } => MetricSpec::new(
                "sphere",
                strings(&["theta", "phi"]),
                Domain::new(
                    vec![POLAR_MARGIN, f64::NEG_INFINITY],
                    vec![PI - POLAR_MARGIN, f64::INFINITY],
                )?,
                strings(&["r^2", "0", "0", "r^2*sin(theta)^2"]),
                BTreeMap::from([("r".to_string(), r)]),
            ),
            Preset::HyperbolicHalfplane => MetricSpec::new(
                "hyperbolic_halfplane",
                strings(&["x", "y"]),
                Domain::new(
                    vec![f64::NEG_INFINITY, HALFPLANE_MARGIN],
                    vec![f64::INFINITY, f64::INFINITY],
                )?,
                strings(&["1/y^2", "0", "0", "1/y^2"]),
                BTreeMap::new(),
            ),
            Preset::Schwarzschild { mass } => {
                let z = "0";
                MetricSpec::new(
                    "schwarzschild",
                    strings(&["t", "r", "theta", "phi"]),
                    Domain::new(
                        vec![
                            f64::NEG_INFINITY,
                            2.0 * mass * HORIZON_FACTOR,
                            POLAR_MARGIN,
                            f64::NEG_INFINITY,
                        ],
                        vec![f64::INFINITY, f64::INFINITY, PI - POLAR_MARGIN, f64::INFINITY],
                    )?,
                    strings(&[
                        "-(1-2*M/r)", z, z, z,
                        z, "1/(1-2*M/r)", z, z,
                        z, z, "r^2", z,
                        z, z, z, "r^2*sin(theta)^2",
                    ]),
                    BTreeMap::from([("M".to_string(), mass)]),
                )
            }
        }
    }
}

/// Looks up a built-in chart by name.
pub fn preset(name: &str, params: &BTreeMap<String, f64>) -> Result<MetricSpec> {
    Preset::from_name(name, params)?.build()
}
