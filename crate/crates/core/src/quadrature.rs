//! Gauss–Legendre rules on `[−1, 1]` and collapsed-square rules on triangles.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{check_finite, Result};
use crate::geometry::{Barycentric, Point2, Triangle};

/// Default Gauss–Legendre order for edge integrals (per half-interval).
pub const DEFAULT_EDGE_NODES: usize = 50;

/// Default per-direction order of the triangle rule.
pub const DEFAULT_TRIANGLE_NODES: usize = 20;

/// A one-dimensional quadrature rule on `[−1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule1D {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule1D {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// The `m`-point Gauss–Legendre rule applied separately on `[−1, 0]`
    /// and `[0, 1]` (`2m` nodes).
    ///
    /// The edge densities are only piecewise smooth at `t = 0` for
    /// non-integer shape parameters, so every edge integral in this crate is
    /// split there.
    pub fn split_at_origin(m: usize) -> Rule1D {
        Rule1D::split_at_origin_on(m, 1.0)
    }

    /// As [`Rule1D::split_at_origin`], on `[−w, w]` instead of `[−1, 1]`.
    ///
    /// Used for integrands that are negligible outside `[−w, w]`.
    pub fn split_at_origin_on(m: usize, w: f64) -> Rule1D {
        let base = gauss_legendre(m);
        let mut nodes = Vec::with_capacity(2 * m);
        let mut weights = Vec::with_capacity(2 * m);
        for (x, wt) in base.iter() {
            nodes.push(0.5 * w * (x - 1.0));
            weights.push(0.5 * w * wt);
        }
        for (x, wt) in base.iter() {
            nodes.push(0.5 * w * (x + 1.0));
            weights.push(0.5 * w * wt);
        }
        Rule1D { nodes, weights }
    }

    /// The default edge rule.
    pub fn edge_default() -> Rule1D {
        Rule1D::split_at_origin(DEFAULT_EDGE_NODES)
    }
}

/// `m`-node Gauss–Legendre rule on `[−1, 1]`, nodes ascending.
///
/// Nodes are roots of `P_m` found by Newton iteration from Chebyshev-like
/// initial guesses; results are cached per order.
///
/// # Panics
///
/// If `m == 0`.
pub fn gauss_legendre(m: usize) -> Arc<Rule1D> {
    assert!(m >= 1, "Gauss-Legendre rule needs at least one node");
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule1D>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(rule) = cache.lock().unwrap().get(&m) {
        return Arc::clone(rule);
    }
    let rule = Arc::new(compute_gauss_legendre(m));
    cache
        .lock()
        .unwrap()
        .entry(m)
        .or_insert_with(|| Arc::clone(&rule));
    rule
}

/// Legendre `P_m(x)` and its derivative.
fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let (pm, pm1) = if m == 0 { (1.0, 0.0) } else { (p1, p0) };
    let dp = m as f64 * (x * pm - pm1) / (x * x - 1.0);
    (pm, dp)
}

fn compute_gauss_legendre(m: usize) -> Rule1D {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let half = m.div_ceil(2);
    for i in 0..half {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        if m % 2 == 1 && i == half - 1 {
            x = 0.0;
        }
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, x);
        if d.is_finite() && d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[m - 1 - i] = x;
        nodes[i] = -x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    Rule1D { nodes, weights }
}

/// `Σ wᵢ f(tᵢ)`; fails on a non-finite integrand value.
pub fn integrate_edge(f: impl Fn(f64) -> f64, rule: &Rule1D) -> Result<f64> {
    let mut acc = 0.0;
    for (t, w) in rule.iter() {
        let v = check_finite(f(t), || format!("in edge integrand at t = {t}"))?;
        acc += w * v;
    }
    Ok(acc)
}

/// A quadrature rule on a triangle, in barycentric form with weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct TriRule {
    nodes: Vec<Barycentric>,
    weights: Vec<f64>,
    degree: usize,
}

impl TriRule {
    /// Collapsed-square (Duffy) rule built from `m × m` Gauss–Legendre nodes.
    /// Exact for polynomials of total degree `2m − 2`.
    pub fn duffy(m: usize) -> TriRule {
        let base = gauss_legendre(m);
        let mut nodes = Vec::with_capacity(m * m);
        let mut weights = Vec::with_capacity(m * m);
        for (xu, wu) in base.iter() {
            let u = 0.5 * (xu + 1.0);
            for (xv, wv) in base.iter() {
                let v = 0.5 * (xv + 1.0);
                let l2 = u;
                let l3 = v * (1.0 - u);
                nodes.push([1.0 - l2 - l3, l2, l3]);
                // two from the reference area 1/2, a quarter from the interval maps
                weights.push(2.0 * 0.25 * wu * wv * (1.0 - u));
            }
        }
        TriRule {
            nodes,
            weights,
            degree: 2 * m - 2,
        }
    }

    /// The default L¹ rule: 20 × 20 Duffy on each of the four midpoint children.
    pub fn l1_default() -> TriRule {
        TriRule::duffy(DEFAULT_TRIANGLE_NODES).subdivided()
    }

    /// Same rule applied on the four midpoint-subdivision children of the triangle.
    pub fn subdivided(&self) -> TriRule {
        let h = 0.5;
        let children: [[Barycentric; 3]; 4] = [
            [[1.0, 0.0, 0.0], [h, h, 0.0], [h, 0.0, h]],
            [[h, h, 0.0], [0.0, 1.0, 0.0], [0.0, h, h]],
            [[h, 0.0, h], [0.0, h, h], [0.0, 0.0, 1.0]],
            [[0.0, h, h], [h, 0.0, h], [h, h, 0.0]],
        ];
        let mut nodes = Vec::with_capacity(4 * self.nodes.len());
        let mut weights = Vec::with_capacity(4 * self.nodes.len());
        for child in &children {
            for (l, w) in self.nodes.iter().zip(&self.weights) {
                let mut p = [0.0; 3];
                for (k, corner) in child.iter().enumerate() {
                    for i in 0..3 {
                        p[i] += l[k] * corner[i];
                    }
                }
                nodes.push(p);
                weights.push(0.25 * w);
            }
        }
        TriRule {
            nodes,
            weights,
            degree: self.degree,
        }
    }

    pub fn nodes(&self) -> &[Barycentric] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Total polynomial degree integrated exactly.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `∫_T f`, area-weighted sum over the rule's nodes.
pub fn integrate_triangle(
    f: impl Fn(Point2) -> f64,
    tri: &Triangle,
    rule: &TriRule,
) -> Result<f64> {
    integrate_triangle_barycentric(|_, p| f(p), tri, rule)
}

/// Like [`integrate_triangle`] but hands the integrand both the barycentric
/// node and its Cartesian image.
pub fn integrate_triangle_barycentric(
    f: impl Fn(&Barycentric, Point2) -> f64,
    tri: &Triangle,
    rule: &TriRule,
) -> Result<f64> {
    let mut acc = 0.0;
    for (l, w) in rule.nodes.iter().zip(&rule.weights) {
        let p = tri.point_at(l);
        let v = check_finite(f(l, p), || {
            format!("in triangle integrand at ({}, {})", p.x, p.y)
        })?;
        acc += w * v;
    }
    Ok(acc * tri.area())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    /// `∫_T λ₁^a λ₂^b λ₃^c = 2|T| a! b! c! / (a+b+c+2)!`
    fn barycentric_monomial_integral(a: u32, b: u32, c: u32, area: f64) -> f64 {
        2.0 * area * factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 2)
    }

    #[test]
    fn small_rules() {
        let r = gauss_legendre(1);
        assert_eq!(r.nodes(), &[0.0]);
        assert!((r.weights()[0] - 2.0).abs() < 1e-15);
        let r = gauss_legendre(2);
        let x = 1.0 / 3f64.sqrt();
        assert!((r.nodes()[0] + x).abs() < 1e-15 && (r.nodes()[1] - x).abs() < 1e-15);
        assert!(r.weights().iter().all(|w| (w - 1.0).abs() < 1e-15));
    }

    #[test]
    fn weights_sum_and_symmetry() {
        for m in [1usize, 2, 3, 7, 20, 50, 64, 100] {
            let r = gauss_legendre(m);
            let s: f64 = r.weights().iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "m={m}");
            for i in 0..m {
                assert!((r.nodes()[i] + r.nodes()[m - 1 - i]).abs() < 1e-15);
                assert!(r.weights()[i] > 0.0);
                assert!(r.nodes()[i].abs() < 1.0);
            }
        }
    }

    #[test]
    fn polynomial_exactness() {
        for m in [1usize, 2, 5, 12, 50] {
            let r = gauss_legendre(m);
            for k in 0..(2 * m) {
                let exact = if k % 2 == 1 {
                    0.0
                } else {
                    2.0 / (k as f64 + 1.0)
                };
                let got = integrate_edge(|t| t.powi(k as i32), &r).unwrap();
                assert!((got - exact).abs() < 1e-12, "m={m} k={k}: {got} vs {exact}");
            }
        }
        let got = integrate_edge(|t| t.powi(98), &gauss_legendre(50)).unwrap();
        assert!((got - 2.0 / 99.0).abs() < 1e-12);
    }

    #[test]
    fn split_rule_is_exact_and_resolves_kinks() {
        let r = Rule1D::split_at_origin(10);
        assert_eq!(r.len(), 20);
        assert!((r.weights().iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert!((integrate_edge(|t| t * t, &r).unwrap() - 2.0 / 3.0).abs() < 1e-14);
        // |t|³ is smooth on each half
        assert!((integrate_edge(|t: f64| t.abs().powi(3), &r).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn edge_integration_examples() {
        let r = Rule1D::edge_default();
        assert!((integrate_edge(|_| 1.0, &r).unwrap() - 2.0).abs() < 1e-14);
        assert!((integrate_edge(|t| t * t, &gauss_legendre(2)).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(integrate_edge(|t| if t > 0.5 { f64::NAN } else { 1.0 }, &r).is_err());
    }

    #[test]
    fn triangle_rule_examples() {
        let unit = Triangle::new(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        )
        .unwrap();
        let other = Triangle::new(
            Point2::new(-0.4, 0.3),
            Point2::new(1.2, -0.2),
            Point2::new(0.5, 1.6),
        )
        .unwrap();
        let rule = TriRule::duffy(6);
        let w: f64 = rule.weights().iter().sum();
        assert!((w - 1.0).abs() < 1e-14);
        assert!((integrate_triangle(|_| 1.0, &unit, &rule).unwrap() - 0.5).abs() < 1e-15);
        let got = integrate_triangle_barycentric(|l, _| l[0], &other, &rule).unwrap();
        assert!((got - other.area() / 3.0).abs() < 1e-14);
        let got = integrate_triangle_barycentric(|l, _| l[0] * l[0] * l[1], &other, &rule).unwrap();
        assert!((got - other.area() / 30.0).abs() < 1e-14);
        assert!(
            (barycentric_monomial_integral(2, 1, 0, other.area()) - other.area() / 30.0).abs()
                < 1e-15
        );
    }

    #[test]
    fn monte_carlo_confirms_monomial_formula() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let n = 400_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let (mut u, mut v): (f64, f64) = (rng.gen(), rng.gen());
            if u + v > 1.0 {
                u = 1.0 - u;
                v = 1.0 - v;
            }
            let l = [1.0 - u - v, u, v];
            acc += l[0] * l[0] * l[1];
        }
        // unit reference triangle, area 1/2
        let mc = 0.5 * acc / n as f64;
        assert!((mc - barycentric_monomial_integral(2, 1, 0, 0.5)).abs() < 2e-4);
    }

    #[test]
    fn triangle_rules_exact_on_declared_degree() {
        let tri = Triangle::new(
            Point2::new(0.1, -0.7),
            Point2::new(0.9, 0.2),
            Point2::new(-0.5, 0.8),
        )
        .unwrap();
        for rule in [
            TriRule::duffy(3),
            TriRule::duffy(5),
            TriRule::duffy(5).subdivided(),
        ] {
            let d = rule.degree() as u32;
            for a in 0..=d {
                for b in 0..=(d - a) {
                    let c = d - a - b;
                    let got = integrate_triangle_barycentric(
                        |l, _| l[0].powi(a as i32) * l[1].powi(b as i32) * l[2].powi(c as i32),
                        &tri,
                        &rule,
                    )
                    .unwrap();
                    let exact = barycentric_monomial_integral(a, b, c, tri.area());
                    assert!(
                        (got - exact).abs() < 1e-12 * (1.0 + exact.abs()),
                        "{a},{b},{c}"
                    );
                }
            }
        }
    }

    #[test]
    fn default_l1_rule_shape() {
        let r = TriRule::l1_default();
        assert_eq!(r.len(), 4 * 400);
        assert!((r.weights().iter().sum::<f64>() - 1.0).abs() < 1e-13);
        for l in r.nodes() {
            assert!(l.iter().all(|&x| x >= -1e-15));
            assert!((l.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }
}
