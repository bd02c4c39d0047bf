//! Globally adaptive composite Gauss–Legendre quadrature.
//!
//! Each panel is integrated with an `n`-point Gauss–Legendre rule on the whole
//! panel and on its two halves; the difference of the two is the panel's error
//! estimate and the halves' sum is its value. The panel with the largest error
//! is bisected until the summed estimate meets `max(abs_tol, rel_tol·|I|)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PANEL_ORDER: usize = 10;

/// Values that can be integrated: real and complex scalars.
pub trait QuadValue:
    Copy + Send + Sync + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_intervals: 4000,
        }
    }
}

impl QuadOptions {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<V> {
    pub value: V,
    pub error: f64,
    pub intervals: usize,
    pub evals: usize,
}

/// Gauss–Legendre nodes and weights on [-1, 1], computed by Newton iteration on
/// the three-term Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

fn gauss<V: QuadValue, F: Fn(f64) -> V>(f: &F, a: f64, b: f64) -> V {
    let (nodes, weights) = panel_rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = V::default();
    for (x, w) in nodes.iter().zip(weights) {
        acc = acc + f(mid + half * x) * (w * half);
    }
    acc
}

struct Panel<V> {
    a: f64,
    b: f64,
    left: V,
    right: V,
    error: f64,
}

impl<V> PartialEq for Panel<V> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<V> Eq for Panel<V> {}
impl<V> PartialOrd for Panel<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Panel<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn make_panel<V: QuadValue, F: Fn(f64) -> V>(f: &F, a: f64, b: f64, whole: V) -> Panel<V> {
    let m = 0.5 * (a + b);
    let left = gauss(f, a, m);
    let right = gauss(f, m, b);
    let error = (left + right - whole).magnitude();
    Panel {
        a,
        b,
        left,
        right,
        error,
    }
}

/// Integrate `f` over `[a, b]`.
pub fn integrate<V: QuadValue, F: Fn(f64) -> V>(
    f: F,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<Quadrature<V>> {
    integrate_with_breaks(f, a, b, &[], opts)
}

/// Integrate `f` over `[a, b]` with extra panel boundaries at `breaks` (points
/// outside the interval are ignored). Use this to place kinks and peaks on
/// panel edges.
pub fn integrate_with_breaks<V: QuadValue, F: Fn(f64) -> V>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: &QuadOptions,
) -> Result<Quadrature<V>> {
    if a == b {
        return Ok(Quadrature {
            value: V::default(),
            error: 0.0,
            intervals: 0,
            evals: 0,
        });
    }
    if b < a {
        let q = integrate_with_breaks(f, b, a, breaks, opts)?;
        return Ok(Quadrature {
            value: q.value * -1.0,
            ..q
        });
    }

    let mut edges: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|&p| p > a && p < b))
        .chain(std::iter::once(b))
        .collect();
    edges.sort_by(f64::total_cmp);
    edges.dedup();

    let evals_per_panel = 2 * PANEL_ORDER;
    let mut evals = 0usize;
    let mut heap = BinaryHeap::new();
    for w in edges.windows(2) {
        let whole = gauss(&f, w[0], w[1]);
        heap.push(make_panel(&f, w[0], w[1], whole));
        evals += 3 * PANEL_ORDER;
    }

    loop {
        let (value, error) = heap.iter().fold((V::default(), 0.0), |(v, e), p| {
            (v + p.left + p.right, e + p.error)
        });
        let target = opts.target(value.magnitude());
        if !error.is_finite() {
            return Err(Error::QuadratureFailure {
                achieved: error,
                requested: target,
                intervals: heap.len(),
            });
        }
        if error <= target {
            return Ok(Quadrature {
                value,
                error,
                intervals: heap.len(),
                evals,
            });
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::QuadratureFailure {
                achieved: error,
                requested: target,
                intervals: heap.len(),
            });
        }

        // Bisect the worst panels in a batch before re-summing.
        let batch = (heap.len() / 8).max(1);
        for _ in 0..batch {
            let Some(worst) = heap.pop() else { break };
            let m = 0.5 * (worst.a + worst.b);
            if m <= worst.a || m >= worst.b {
                // Panel cannot be split further in floating point.
                return Err(Error::QuadratureFailure {
                    achieved: error,
                    requested: target,
                    intervals: heap.len() + 1,
                });
            }
            heap.push(make_panel(&f, worst.a, m, worst.left));
            heap.push(make_panel(&f, m, worst.b, worst.right));
            evals += 2 * evals_per_panel;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_integrate_polynomials_exactly() {
        let (x, w) = gauss_legendre(10);
        let sum_w: f64 = w.iter().sum();
        assert!((sum_w - 2.0).abs() < 1e-14);
        // degree 19 is exact for a 10-point rule
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((i - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn smooth_integrand() {
        let q = integrate(
            |x: f64| x.sin(),
            0.0,
            std::f64::consts::PI,
            &QuadOptions::default(),
        )
        .unwrap();
        assert!((q.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn peaked_integrand_with_break() {
        let eps = 1e-4;
        let q = integrate_with_breaks(
            |x: f64| eps / (x * x + eps * eps),
            -1.0,
            1.0,
            &[0.0],
            &QuadOptions::default(),
        )
        .unwrap();
        let exact = 2.0 * (1.0 / eps).atan();
        assert!((q.value - exact).abs() < 1e-9, "{}", q.value - exact);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let q = integrate(|x: f64| x, 1.0, 0.0, &QuadOptions::default()).unwrap();
        assert!((q.value + 0.5).abs() < 1e-15);
    }

    #[test]
    fn complex_integrand() {
        let q = integrate(
            |x: f64| Complex64::new(x.cos(), x.sin()),
            0.0,
            1.0,
            &QuadOptions::default(),
        )
        .unwrap();
        assert!((q.value.re - 1f64.sin()).abs() < 1e-13);
        assert!((q.value.im - (1.0 - 1f64.cos())).abs() < 1e-13);
    }

    #[test]
    fn non_integrable_reports_failure() {
        let opts = QuadOptions {
            max_intervals: 200,
            ..QuadOptions::default()
        };
        let r = integrate(|x: f64| 1.0 / x, 0.0, 1.0, &opts);
        assert!(matches!(r, Err(Error::QuadratureFailure { .. })));
    }
}
