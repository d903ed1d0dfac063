#![allow(dead_code)]

use std::collections::BTreeMap;

use geom_core::rng::SplitMix64;
use geom_core::verify::{inset_box, sample_point};
use geom_core::{preset, MetricSpec, Point};

pub fn params(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

pub fn sphere(r: f64) -> MetricSpec {
    preset("sphere", &params(&[("r", r)])).unwrap()
}

pub fn halfplane() -> MetricSpec {
    preset("hyperbolic_halfplane", &BTreeMap::new()).unwrap()
}

pub fn schwarzschild(m: f64) -> MetricSpec {
    preset("schwarzschild", &params(&[("M", m)])).unwrap()
}

pub fn flat(dim: usize, index: usize) -> MetricSpec {
    preset("semi_euclidean", &params(&[("dim", dim as f64), ("index", index as f64)])).unwrap()
}

/// The four presets with their known index.
pub fn presets() -> Vec<(MetricSpec, usize)> {
    vec![
        (flat(4, 1), 1),
        (sphere(1.0), 0),
        (halfplane(), 0),
        (schwarzschild(1.0), 1),
    ]
}

/// A non-diagonal chart: the plane in skewed coordinates with a warp.
pub fn skewed() -> MetricSpec {
    geom_core::manifold::load_spec(
        r#"{"name": "skewed", "dim": 2, "coords": ["u", "v"],
            "domain": {"lower": [-2, -2], "upper": [2, 2]},
            "metric": [["2 + sin(u*v)", "0.5*cos(u)"], ["0.5*cos(u)", "1 + u^2/4 + v^2"]]}"#,
    )
    .unwrap()
}

pub fn points(spec: &MetricSpec, n: usize, seed: u64) -> Vec<Point> {
    let (lo, hi) = inset_box(spec, 0.1);
    let mut rng = SplitMix64::new(seed);
    (0..n).map(|_| sample_point(&mut rng, &lo, &hi)).collect()
}

pub fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
