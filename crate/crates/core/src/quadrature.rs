//! Adaptive Gauss-Legendre quadrature on finite intervals.
//!
//! Each panel is integrated with a 16-point and a 32-point rule; their
//! difference is the panel's error estimate. The panel with the largest
//! estimate is bisected until the global estimate meets the tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const LOW_ORDER: usize = 16;
const HIGH_ORDER: usize = 32;

/// Nodes and weights of an `order`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "rule needs at least one node");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut deriv = 0.0;
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                deriv = dp;
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            if dp != 0.0 {
                deriv = dp;
            }
            let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum();
        sum * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn rules() -> &'static (GaussLegendre, GaussLegendre) {
    static RULES: OnceLock<(GaussLegendre, GaussLegendre)> = OnceLock::new();
    RULES.get_or_init(|| (GaussLegendre::new(LOW_ORDER), GaussLegendre::new(HIGH_ORDER)))
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_err: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl Panel {
    fn eval<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Self {
        let (low, high) = rules();
        let coarse = low.integrate(f, a, b);
        let fine = high.integrate(f, a, b);
        Panel {
            a,
            b,
            value: fine,
            err: (fine - coarse).abs(),
        }
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Integrates `f` over `[breakpoints[0], breakpoints.last()]`, starting from
/// one panel per consecutive pair of breakpoints.
///
/// Stops when the summed error estimate is at most
/// `max(abs_tol, rel_tol * |value|)`. Exhausting `max_panels` yields a
/// numeric error carrying the best estimate.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_panels: usize,
) -> Result<Estimate> {
    if breakpoints.len() < 2 {
        return Err(Error::domain("need at least two breakpoints"));
    }
    if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("breakpoints must be strictly increasing"));
    }
    let mut heap: BinaryHeap<Panel> = breakpoints
        .windows(2)
        .map(|w| Panel::eval(&f, w[0], w[1]))
        .collect();

    let totals = |heap: &BinaryHeap<Panel>| {
        let mut panels: Vec<&Panel> = heap.iter().collect();
        panels.sort_by(|p, q| p.a.total_cmp(&q.a));
        panels
            .iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.err))
    };

    loop {
        let (value, err) = totals(&heap);
        if !value.is_finite() || !err.is_finite() {
            return Err(Error::numeric("non-finite integrand", None));
        }
        if err <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Estimate {
                value,
                abs_err: err,
                panels: heap.len(),
            });
        }
        if heap.len() >= max_panels {
            return Err(Error::numeric(
                format!("quadrature tolerance not met with {max_panels} panels (error {err:e})"),
                Some(value),
            ));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Panel cannot be split further in floating point.
            return Err(Error::numeric("quadrature panel underflow", Some(value)));
        }
        heap.push(Panel::eval(&f, worst.a, mid));
        heap.push(Panel::eval(&f, mid, worst.b));
    }
}
