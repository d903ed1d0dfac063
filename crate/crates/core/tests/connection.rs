mod common;

use common::*;
use geom_core::connection::{
    central_partials, christoffel_at, christoffel_first_kind, covariant_differential_at,
    covderiv_vector_field_at, koszul_sides, torsion_residual, CovariantTensorField, ExprTensorField,
    MetricField, VectorField,
};
use geom_core::linalg::{invert_sym, DEFAULT_DEGENERACY_TOL};
use geom_core::rng::SplitMix64;
use geom_core::transport::{covderiv_along_curve, curve_state, Curve, ParamExprs};
use geom_core::verify::random_field;
use geom_core::{MetricSpec, Point, Tensor};

fn all_specs() -> Vec<MetricSpec> {
    let mut v: Vec<_> = presets().into_iter().map(|(s, _)| s).collect();
    v.push(skewed());
    v
}

/// Christoffel symbols from difference quotients of the metric alone.
fn christoffel_fd(spec: &MetricSpec, p: &Point, h: f64) -> Tensor {
    let m = spec.dim();
    let mut dg = Tensor::zeros(m, 3);
    for k in 0..m {
        let mut x = p.coords().to_vec();
        x[k] += h;
        let gp = spec.metric_at(&Point::new(x.clone())).unwrap();
        x[k] -= 2.0 * h;
        let gm = spec.metric_at(&Point::new(x)).unwrap();
        for i in 0..m {
            for j in 0..m {
                dg[[k, i, j]] = (gp.get(i, j) - gm.get(i, j)) / (2.0 * h);
            }
        }
    }
    let first = christoffel_first_kind(&dg);
    let gi = invert_sym(&spec.metric_at(p).unwrap(), DEFAULT_DEGENERACY_TOL).unwrap();
    Tensor::from_fn(m, 3, |ix| (0..m).map(|mu| gi.get(ix[0], mu) * first[[mu, ix[1], ix[2]]]).sum())
}

#[test]
fn christoffel_symbols_match_difference_oracle() {
    for spec in all_specs() {
        for p in points(&spec, 20, 1) {
            let exact = christoffel_at(&spec, &p).unwrap();
            let fd = christoffel_fd(&spec, &p, 1e-5);
            let scale = fd.max_abs().max(1.0);
            let dev = max_dev(exact.gamma.as_slice(), fd.as_slice());
            assert!(dev <= 1e-7 * scale, "{}: {dev}", spec.name());
        }
    }
}

#[test]
fn christoffel_closed_forms() {
    let s = sphere(2.0);
    for p in points(&s, 10, 2) {
        let th = p.coords()[0];
        let g = christoffel_at(&s, &p).unwrap();
        assert!((g.get(0, 1, 1) + th.sin() * th.cos()).abs() < 1e-14);
        assert!((g.get(1, 0, 1) - th.cos() / th.sin()).abs() < 1e-13);
        assert_eq!(g.get(0, 0, 0), 0.0);
    }
    let h = halfplane();
    for p in points(&h, 10, 3) {
        let y = p.coords()[1];
        let g = christoffel_at(&h, &p).unwrap();
        assert!((g.get(0, 0, 1) + 1.0 / y).abs() < 1e-14);
        assert!((g.get(1, 0, 0) - 1.0 / y).abs() < 1e-14);
        assert!((g.get(1, 1, 1) + 1.0 / y).abs() < 1e-14);
    }
    let bh = schwarzschild(1.0);
    for p in points(&bh, 10, 4) {
        let r = p.coords()[1];
        let f = 1.0 - 2.0 / r;
        let g = christoffel_at(&bh, &p).unwrap();
        assert!((g.get(1, 0, 0) - f / (r * r)).abs() < 1e-13);
        assert!((g.get(0, 0, 1) - 1.0 / (r * r * f)).abs() < 1e-12);
        assert!((g.get(2, 1, 2) - 1.0 / r).abs() < 1e-14);
    }
}

#[test]
fn torsion_vanishes_exactly() {
    for spec in all_specs() {
        for p in points(&spec, 30, 5) {
            assert_eq!(torsion_residual(&spec, &p).unwrap(), 0.0);
        }
    }
}

fn bracket_fd(spec: &MetricSpec, x: &VectorField, y: &VectorField, p: &Point) -> Vec<f64> {
    // [X,Y]^i = X(Y^i) − Y(X^i) with directional differences
    let m = spec.dim();
    let xv = x.at(spec, p).unwrap();
    let yv = y.at(spec, p).unwrap();
    let along = |f: &VectorField, dir: &[f64], h: f64| -> Vec<f64> {
        let shift = |s: f64| {
            let q = Point::new(p.coords().iter().zip(dir).map(|(a, b)| a + s * b).collect::<Vec<_>>());
            f.at(spec, &q).unwrap()
        };
        let (a, b) = (shift(h), shift(-h));
        (0..m).map(|i| (a[i] - b[i]) / (2.0 * h)).collect()
    };
    let xy = along(y, &xv, 1e-6);
    let yx = along(x, &yv, 1e-6);
    (0..m).map(|i| xy[i] - yx[i]).collect()
}

#[test]
fn torsion_free_against_difference_bracket() {
    let mut rng = SplitMix64::new(6);
    for spec in all_specs() {
        for p in points(&spec, 10, 7) {
            let x = random_field(&spec, &mut rng, 2).unwrap();
            let y = random_field(&spec, &mut rng, 2).unwrap();
            let a = covderiv_vector_field_at(&spec, &x, &y, &p).unwrap();
            let b = covderiv_vector_field_at(&spec, &y, &x, &p).unwrap();
            let lhs: Vec<f64> = a.comp.iter().zip(&b.comp).map(|(u, v)| u - v).collect();
            let rhs = bracket_fd(&spec, &x, &y, &p);
            let scale = rhs.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            assert!(max_dev(&lhs, &rhs) <= 1e-6 * scale, "{}", spec.name());
        }
    }
}

#[test]
fn koszul_formula_on_random_polynomial_fields() {
    let mut rng = SplitMix64::new(8);
    for spec in all_specs() {
        for p in points(&spec, 30, 9) {
            let x = random_field(&spec, &mut rng, 3).unwrap();
            let y = random_field(&spec, &mut rng, 3).unwrap();
            let z = random_field(&spec, &mut rng, 3).unwrap();
            let k = koszul_sides(&spec, &x, &y, &z, &p).unwrap();
            assert!(k.residual() <= 1e-9 * k.scale.max(1.0), "{}: {k:?}", spec.name());
        }
    }
}

#[test]
fn metric_compatibility_against_difference_of_inner_products() {
    let mut rng = SplitMix64::new(10);
    for spec in all_specs() {
        for p in points(&spec, 10, 11) {
            let x = random_field(&spec, &mut rng, 2).unwrap();
            let y = random_field(&spec, &mut rng, 2).unwrap();
            let z = random_field(&spec, &mut rng, 2).unwrap();
            let xv = x.at(&spec, &p).unwrap();
            let inner = |s: f64| {
                let q = Point::new(p.coords().iter().zip(&xv).map(|(a, b)| a + s * b).collect::<Vec<_>>());
                spec.metric_at(&q)
                    .unwrap()
                    .bilinear(&y.at(&spec, &q).unwrap(), &z.at(&spec, &q).unwrap())
            };
            let h = 1e-6;
            let lhs = (inner(h) - inner(-h)) / (2.0 * h);
            let g = spec.metric_at(&p).unwrap();
            let dy = covderiv_vector_field_at(&spec, &x, &y, &p).unwrap();
            let dz = covderiv_vector_field_at(&spec, &x, &z, &p).unwrap();
            let rhs = g.bilinear(&dy.comp, &z.at(&spec, &p).unwrap()) + g.bilinear(&y.at(&spec, &p).unwrap(), &dz.comp);
            assert!((lhs - rhs).abs() <= 1e-6 * (1.0 + rhs.abs()), "{}: {lhs} vs {rhs}", spec.name());
        }
    }
}

#[test]
fn covariant_differential_of_metric_vanishes() {
    for spec in all_specs() {
        for p in points(&spec, 30, 12) {
            let d = covariant_differential_at(&spec, &MetricField, &p, 1e-5).unwrap();
            assert!(d.max_abs() <= 1e-7, "{}: {}", spec.name(), d.max_abs());
        }
    }
}

/// Wraps a field and hides its exact partials.
struct DifferencedOnly<'a>(&'a ExprTensorField);

impl CovariantTensorField for DifferencedOnly<'_> {
    fn rank(&self) -> usize {
        self.0.rank()
    }
    fn at(&self, spec: &MetricSpec, p: &Point) -> geom_core::Result<Tensor> {
        self.0.at(spec, p)
    }
}

#[test]
fn exact_and_differenced_tensor_partials_agree() {
    let spec = skewed();
    let field = ExprTensorField::parse(
        &spec,
        2,
        &["u*v", "sin(u)", "exp(v/3)", "u^2 - v"],
    )
    .unwrap();
    for p in points(&spec, 10, 13) {
        let exact = field.partials_at(&spec, &p).unwrap().unwrap();
        let fd = central_partials(&DifferencedOnly(&field), &spec, &p, 1e-5).unwrap();
        assert!(max_dev(exact.as_slice(), fd.as_slice()) <= 1e-8);
        let a = covariant_differential_at(&spec, &field, &p, 1e-5).unwrap();
        let b = covariant_differential_at(&spec, &DifferencedOnly(&field), &p, 1e-5).unwrap();
        assert!(max_dev(a.as_slice(), b.as_slice()) <= 1e-8);
    }
}

#[test]
fn lowering_commutes_with_covariant_derivative() {
    // ∇_{∂k}(Y♭) = (∇_{∂k} Y)♭ for a metric connection
    let spec = skewed();
    let y = ["u*v + 1", "cos(u) - v^2"];
    let comps: Vec<String> = (0..2)
        .map(|j| {
            (0..2)
                .map(|i| format!("({}) * ({})", spec.component_source(i, j), y[i]))
                .collect::<Vec<_>>()
                .join(" + ")
        })
        .collect();
    let refs: Vec<&str> = comps.iter().map(String::as_str).collect();
    let flat_y = ExprTensorField::parse(&spec, 1, &refs).unwrap();
    let yf = VectorField::parse(&spec, &y).unwrap();
    for p in points(&spec, 10, 14) {
        let d = covariant_differential_at(&spec, &flat_y, &p, 1e-5).unwrap();
        let g = spec.metric_at(&p).unwrap();
        for k in 0..2 {
            let ek = VectorField::coordinate(&spec, k);
            let nabla = covderiv_vector_field_at(&spec, &ek, &yf, &p).unwrap();
            for j in 0..2 {
                let lowered: f64 = (0..2).map(|i| g.get(i, j) * nabla.comp[i]).sum();
                assert!((d[[j, k]] - lowered).abs() <= 1e-12 * (1.0 + lowered.abs()));
            }
        }
    }
}

fn sphere_curve(s: &MetricSpec) -> (Curve, [&'static str; 2]) {
    let texts = ["1.2 + 0.3*sin(t)", "t^2 - 0.5*t"];
    (Curve::analytic(s, &texts, -1.0, 1.0).unwrap(), texts)
}

#[test]
fn covariant_derivative_along_curve_is_linear_and_leibniz() {
    let s = sphere(1.0);
    let (c, _) = sphere_curve(&s);
    let v = ["cos(t)", "t^3"];
    let w = ["exp(t)", "1 - t"];
    let f = "sin(2*t) + 3";
    let vw: Vec<String> = (0..2).map(|i| format!("({}) + ({})", v[i], w[i])).collect();
    let fv: Vec<String> = (0..2).map(|i| format!("({f}) * ({})", v[i])).collect();
    let pv = ParamExprs::parse(&s, &v, &["t"]).unwrap();
    let pw = ParamExprs::parse(&s, &w, &["t"]).unwrap();
    let pvw = ParamExprs::parse(&s, &vw.iter().map(String::as_str).collect::<Vec<_>>(), &["t"]).unwrap();
    let pfv = ParamExprs::parse(&s, &fv.iter().map(String::as_str).collect::<Vec<_>>(), &["t"]).unwrap();
    let fe = s.parse_with_leading(f, &["t"]).unwrap();
    for t in [-0.9, -0.3, 0.0, 0.4, 0.95] {
        let dv = covderiv_along_curve(&s, &c, &pv, t).unwrap().comp;
        let dw = covderiv_along_curve(&s, &c, &pw, t).unwrap().comp;
        let dvw = covderiv_along_curve(&s, &c, &pvw, t).unwrap().comp;
        let sum: Vec<f64> = dv.iter().zip(&dw).map(|(a, b)| a + b).collect();
        assert!(max_dev(&dvw, &sum) <= 1e-13);

        let fj = fe.eval_slots_dual1(&s.leading_slot_values(&[t]), 1).unwrap();
        let vv = pv.value(&[t]).unwrap();
        let dfv = covderiv_along_curve(&s, &c, &pfv, t).unwrap().comp;
        let leibniz: Vec<f64> = (0..2).map(|i| fj.grad[0] * vv[i] + fj.value * dv[i]).collect();
        assert!(max_dev(&dfv, &leibniz) <= 1e-12);
    }
}

#[test]
fn covariant_derivative_along_curve_restricts_the_connection() {
    let s = sphere(1.0);
    let (c, texts) = sphere_curve(&s);
    let y = ["sin(theta) * phi", "cos(phi) + theta"];
    let restricted: Vec<String> = y
        .iter()
        .map(|e| e.replace("theta", &format!("({})", texts[0])).replace("phi", &format!("({})", texts[1])))
        .collect();
    let v = ParamExprs::parse(&s, &restricted.iter().map(String::as_str).collect::<Vec<_>>(), &["t"]).unwrap();
    let yf = VectorField::parse(&s, &y).unwrap();
    for t in [-0.8, 0.1, 0.7] {
        let (p, vel) = curve_state(&s, &c, t).unwrap();
        let lits: Vec<String> = vel.iter().map(|x| format!("({x:?})")).collect();
        let xf = VectorField::parse(&s, &lits.iter().map(String::as_str).collect::<Vec<_>>()).unwrap();
        let along = covderiv_along_curve(&s, &c, &v, t).unwrap();
        let field = covderiv_vector_field_at(&s, &xf, &yf, &p).unwrap();
        assert!(max_dev(&along.comp, &field.comp) <= 1e-12);
    }
}

#[test]
fn inner_product_along_curve_obeys_product_rule() {
    let s = schwarzschild(1.0);
    let texts = ["t", "6 + sin(t)", "1.2 + 0.1*t", "0.3*t^2"];
    let c = Curve::analytic(&s, &texts, -1.0, 1.0).unwrap();
    let pv = ParamExprs::parse(&s, &["1", "t", "cos(t)", "t^2"], &["t"]).unwrap();
    let pw = ParamExprs::parse(&s, &["exp(t)", "2", "t", "sin(t)"], &["t"]).unwrap();
    let inner = |t: f64| {
        let (p, _) = curve_state(&s, &c, t).unwrap();
        s.metric_at(&p).unwrap().bilinear(&pv.value(&[t]).unwrap(), &pw.value(&[t]).unwrap())
    };
    for t in [-0.5, 0.0, 0.6] {
        let h = 1e-6;
        let lhs = (inner(t + h) - inner(t - h)) / (2.0 * h);
        let (p, _) = curve_state(&s, &c, t).unwrap();
        let g = s.metric_at(&p).unwrap();
        let dv = covderiv_along_curve(&s, &c, &pv, t).unwrap().comp;
        let dw = covderiv_along_curve(&s, &c, &pw, t).unwrap().comp;
        let rhs = g.bilinear(&dv, &pw.value(&[t]).unwrap()) + g.bilinear(&pv.value(&[t]).unwrap(), &dw);
        assert!((lhs - rhs).abs() <= 1e-6 * (1.0 + rhs.abs()), "{lhs} vs {rhs}");
    }
}

#[test]
fn flat_coordinate_fields_are_parallel() {
    let spec = flat(3, 1);
    let x = VectorField::parse(&spec, &["1", "2", "-1"]).unwrap();
    let y = VectorField::parse(&spec, &["x1", "0", "0"]).unwrap();
    let p = Point::new(vec![0.5, -1.0, 2.0]);
    assert_eq!(covderiv_vector_field_at(&spec, &x, &x, &p).unwrap().comp, vec![0.0; 3]);
    assert_eq!(covderiv_vector_field_at(&spec, &x, &y, &p).unwrap().comp, vec![1.0, 0.0, 0.0]);
}
