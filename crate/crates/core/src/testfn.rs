//! Compactly supported test functions with derivative access.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::jet::Jet;
use crate::quad::{integrate, QuadOptions};

pub type JetFn = Arc<dyn Fn(&Jet) -> Jet + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    Infinite,
    /// `C^k`: derivatives up to order `k` are continuous.
    Finite(usize),
}

impl Smoothness {
    pub fn allows(self, order: usize) -> bool {
        match self {
            Smoothness::Infinite => true,
            Smoothness::Finite(k) => order <= k,
        }
    }

    pub fn max_order(self) -> usize {
        match self {
            Smoothness::Infinite => usize::MAX,
            Smoothness::Finite(k) => k,
        }
    }
}

/// `exp(-1/(1-x^2))` on (-1, 1), zero outside.
pub fn standard_bump(x: &Jet) -> Jet {
    let x0 = x.value();
    if x0.abs() >= 1.0 {
        return Jet::zero(x.order());
    }
    let s = (x * x) * -1.0 + 1.0;
    (s.recip() * -1.0).exp()
}

/// `∫ exp(-1/(1-x^2)) dx` over (-1, 1).
pub fn standard_bump_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| {
        let opts = QuadOptions {
            abs_tol: 1e-15,
            rel_tol: 1e-15,
            max_intervals: 4000,
        };
        integrate(
            |x: f64| standard_bump(&Jet::constant(x, 0)).value(),
            -1.0,
            1.0,
            &opts,
        )
        .map(|q| q.value)
        .expect("bump mass quadrature")
    })
}

/// A real test function on the line, vanishing outside `support`.
#[derive(Clone)]
pub struct TestFn {
    name: String,
    support: (f64, f64),
    smoothness: Smoothness,
    f: JetFn,
}

impl fmt::Debug for TestFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFn")
            .field("name", &self.name)
            .field("support", &self.support)
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

impl TestFn {
    pub fn new(
        name: impl Into<String>,
        support: (f64, f64),
        smoothness: Smoothness,
        f: impl Fn(&Jet) -> Jet + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            support,
            smoothness,
            f: Arc::new(f),
        }
    }

    /// `exp(-1/(1-x^2))`.
    pub fn bump() -> Self {
        Self::new("bump", (-1.0, 1.0), Smoothness::Infinite, standard_bump)
    }

    /// Bump normalized to unit mass.
    pub fn normalized_bump() -> Self {
        let m = standard_bump_mass();
        Self::new(
            "bump_normalized",
            (-1.0, 1.0),
            Smoothness::Infinite,
            move |x| standard_bump(x).scale(1.0 / m),
        )
    }

    /// Bump scaled so that `φ(0) = 1`.
    pub fn unit_bump() -> Self {
        Self::new("bump_unit", (-1.0, 1.0), Smoothness::Infinite, |x| {
            standard_bump(x).scale(std::f64::consts::E)
        })
    }

    /// `(1 - x^2)^m` on [-1, 1]; `C^(m-1)`.
    pub fn polynomial_cutoff(m: u32) -> Self {
        assert!(m >= 1);
        Self::new(
            format!("poly_cutoff_{m}"),
            (-1.0, 1.0),
            Smoothness::Finite(m as usize - 1),
            move |x| {
                if x.value().abs() >= 1.0 {
                    return Jet::zero(x.order());
                }
                ((x * x) * -1.0 + 1.0).powi(m)
            },
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// `x ↦ amplitude · φ((x - shift) / scale)`.
    pub fn affine(&self, scale: f64, shift: f64, amplitude: f64) -> Self {
        assert!(scale > 0.0);
        let inner = self.f.clone();
        let (a, b) = self.support;
        Self {
            name: format!("{}[scale={scale},shift={shift},amp={amplitude}]", self.name),
            support: (shift + scale * a, shift + scale * b),
            smoothness: self.smoothness,
            f: Arc::new(move |x: &Jet| {
                let y = (x - shift) * (1.0 / scale);
                inner(&y).scale(amplitude)
            }),
        }
    }

    /// Pointwise product with another closed-form factor (e.g. a polynomial).
    pub fn times(&self, name: &str, g: impl Fn(&Jet) -> Jet + Send + Sync + 'static) -> Self {
        let inner = self.f.clone();
        Self {
            name: format!("{}*{}", self.name, name),
            support: self.support,
            smoothness: self.smoothness,
            f: Arc::new(move |x: &Jet| inner(x) * g(x)),
        }
    }

    pub fn jet(&self, x: f64, order: usize) -> Jet {
        if x <= self.support.0 || x >= self.support.1 {
            return Jet::zero(order);
        }
        (self.f)(&Jet::variable(x, order))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.jet(x, 0).value()
    }

    pub fn derivative(&self, x: f64, k: usize) -> f64 {
        self.jet(x, k).derivative(k)
    }

    pub fn support_radius(&self) -> f64 {
        self.support.0.abs().max(self.support.1.abs())
    }
}

/// Radial profile `φ(r)` on `[0, R]`, `C^2`, vanishing for `r ≥ R`; it may be
/// nonzero at `r = 0`.
#[derive(Clone)]
pub struct RadialTestFn {
    name: String,
    radius: f64,
    f: JetFn,
}

impl fmt::Debug for RadialTestFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialTestFn")
            .field("name", &self.name)
            .field("radius", &self.radius)
            .finish()
    }
}

impl RadialTestFn {
    pub fn new(
        name: impl Into<String>,
        radius: f64,
        f: impl Fn(&Jet) -> Jet + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            radius,
            f: Arc::new(f),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `(φ(r), φ'(r), φ''(r))`.
    pub fn values(&self, r: f64) -> [f64; 3] {
        if r >= self.radius {
            return [0.0; 3];
        }
        let j = (self.f)(&Jet::variable(r, 2));
        [j.derivative(0), j.derivative(1), j.derivative(2)]
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.values(r)[0]
    }

    /// Radial Laplacian `φ'' + (n-1) φ'/r` in dimension `n`, for `r > 0`.
    pub fn laplacian(&self, r: f64, n: u32) -> f64 {
        let [_, d1, d2] = self.values(r);
        d2 + (n as f64 - 1.0) * d1 / r
    }

    /// A spread of profiles used to probe weak identities: smooth bumps of
    /// several radii, a polynomial `C^2` cutoff, and profiles with `φ'(0) ≠ 0`.
    pub fn standard_family() -> Vec<RadialTestFn> {
        vec![
            RadialTestFn::new("bump_r1", 1.0, |r| {
                standard_bump(r).scale(std::f64::consts::E)
            }),
            RadialTestFn::new("bump_r2", 2.0, |r| standard_bump(&r.scale(0.5))),
            RadialTestFn::new("bump_r0.6", 0.6, |r| standard_bump(&r.scale(1.0 / 0.6))),
            RadialTestFn::new("cutoff3_r1.5", 1.5, |r| {
                let s = r.scale(1.0 / 1.5);
                ((&s * &s) * -1.0 + 1.0).powi(3)
            }),
            RadialTestFn::new("bump_linear_r1", 1.0, |r| {
                standard_bump(r) * (r * 2.0 + 1.0)
            }),
            RadialTestFn::new("bump_offcenter_r1.2", 1.2, |r| {
                standard_bump(&(r - 0.3).scale(1.0 / 0.9)) * (r.scale(-1.0) + 1.5)
            }),
        ]
    }
}
