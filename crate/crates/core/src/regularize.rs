//! Regularizations of the boundary-value algebra: `x + iε` substitution,
//! Friedrichs mollification with principal-value kernels, Poisson smoothing,
//! the blow-up constant `C_φ`, and mollified model-product sweeps.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist_core::{decompose, AffineArg, ClassicalPart, DistExpr};
use crate::error::{Error, Result};
use crate::exact::{crational_to_c64, rational_to_f64};
use crate::fit::geometric_sequence;
use crate::jet::Jet;
use crate::quad::{integrate, integrate_with_breaks, QuadOptions};
use crate::testfn::{standard_bump, standard_bump_mass, Smoothness, TestFn};

/// Number of terms in the large-|s| moment expansion of `vp ∗ φ^(j)`.
const MOMENT_TERMS: usize = 64;
/// Beyond this scaled distance the moment expansion replaces quadrature.
const MOMENT_RADIUS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MollifierKind {
    /// `(15/16)(1 - x²)²`
    Poly4,
    /// `N exp(-1/(1 - x²))`
    Smooth,
}

struct MollifierInner {
    kind: MollifierKind,
    profile: TestFn,
    moments: OnceLock<Vec<f64>>,
}

/// Symmetric nonnegative unit-mass bump supported in (-1, 1).
#[derive(Clone)]
pub struct Mollifier(Arc<MollifierInner>);

impl fmt::Debug for Mollifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mollifier({})", self.name())
    }
}

impl Mollifier {
    pub fn new(kind: MollifierKind) -> Self {
        let profile = match kind {
            MollifierKind::Poly4 => TestFn::new("poly4", (-1.0, 1.0), Smoothness::Finite(1), |x| {
                if x.value().abs() >= 1.0 {
                    return Jet::zero(x.order());
                }
                ((x * x) * -1.0 + 1.0).powi(2).scale(15.0 / 16.0)
            }),
            MollifierKind::Smooth => {
                let n = 1.0 / standard_bump_mass();
                TestFn::new("smooth", (-1.0, 1.0), Smoothness::Infinite, move |x| {
                    standard_bump(x).scale(n)
                })
            }
        };
        Self(Arc::new(MollifierInner {
            kind,
            profile,
            moments: OnceLock::new(),
        }))
    }

    pub fn poly4() -> Self {
        Self::new(MollifierKind::Poly4)
    }

    pub fn smooth() -> Self {
        Self::new(MollifierKind::Smooth)
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "poly4" => Ok(Self::poly4()),
            "smooth" => Ok(Self::smooth()),
            other => Err(Error::InvalidInput(format!(
                "unknown mollifier '{other}' (expected poly4 or smooth)"
            ))),
        }
    }

    pub fn builtins() -> Vec<Self> {
        vec![Self::poly4(), Self::smooth()]
    }

    pub fn kind(&self) -> MollifierKind {
        self.0.kind
    }

    pub fn name(&self) -> &str {
        self.0.profile.name()
    }

    pub fn profile(&self) -> &TestFn {
        &self.0.profile
    }

    pub fn smoothness(&self) -> Smoothness {
        self.0.profile.smoothness()
    }

    /// `φ(x)` without derivative bookkeeping.
    pub fn value(&self, x: f64) -> f64 {
        if x.abs() >= 1.0 {
            return 0.0;
        }
        let s = 1.0 - x * x;
        match self.0.kind {
            MollifierKind::Poly4 => 15.0 / 16.0 * s * s,
            MollifierKind::Smooth => (-1.0 / s).exp() / standard_bump_mass(),
        }
    }

    /// `φ^(j)(x)`.
    pub fn derivative(&self, x: f64, j: usize) -> f64 {
        if j == 0 {
            self.value(x)
        } else {
            self.0.profile.derivative(x, j)
        }
    }

    fn check_order(&self, j: usize) -> Result<()> {
        if self.smoothness().allows(j) {
            Ok(())
        } else {
            Err(Error::InsufficientSmoothness {
                name: self.name().to_string(),
                available: self.smoothness().max_order(),
                required: j,
            })
        }
    }

    /// `∫ φ dx`.
    pub fn mass(&self) -> f64 {
        let opts = QuadOptions {
            abs_tol: 1e-15,
            rel_tol: 1e-15,
            max_intervals: 4000,
        };
        integrate(|x| self.value(x), -1.0, 1.0, &opts)
            .expect("mollifier mass quadrature")
            .value
    }

    /// `φ_ε(x) = φ(x/ε)/ε` as a test function.
    pub fn scaled(&self, eps: f64) -> TestFn {
        self.0.profile.affine(eps, 0.0, 1.0 / eps)
    }

    /// Even moments `∫ y^n φ(y) dy`, `n < MOMENT_TERMS` (odd ones vanish).
    fn moments(&self) -> &[f64] {
        self.0.moments.get_or_init(|| {
            let opts = QuadOptions {
                abs_tol: 1e-17,
                rel_tol: 1e-14,
                max_intervals: 4000,
            };
            (0..MOMENT_TERMS)
                .map(|n| {
                    if n % 2 == 1 {
                        0.0
                    } else {
                        2.0 * integrate(|y| y.powi(n as i32) * self.value(y), 0.0, 1.0, &opts)
                            .expect("mollifier moment quadrature")
                            .value
                    }
                })
                .collect()
        })
    }

    /// `W_j(s) = (vp(1/·) ∗ φ^(j))(s)` at unit scale.
    pub fn vp_kernel(&self, s: f64, j: usize, opts: &QuadOptions) -> Result<f64> {
        self.check_order(j)?;
        if s.abs() >= MOMENT_RADIUS {
            // ∫ φ^(j)(y)/(s-y) dy = Σ_n ∫ y^n φ^(j)(y) dy / s^(n+1), and
            // ∫ y^n φ^(j) = (-1)^j n!/(n-j)! ∫ y^(n-j) φ.
            let m = self.moments();
            let mut total = 0.0;
            let inv = 1.0 / s;
            let mut pw = inv.powi(j as i32 + 1);
            for r in 0..(MOMENT_TERMS) {
                let n = r + j;
                let falling: f64 = ((n - j + 1)..=n).map(|v| v as f64).product();
                total += m[r] * falling * pw;
                pw *= inv;
            }
            return Ok(if j % 2 == 0 { total } else { -total });
        }
        let reach = s.abs() + 1.0;
        let kink = (s.abs() - 1.0).abs();
        let q = integrate_with_breaks(
            |y| {
                if y == 0.0 {
                    return -2.0 * self.derivative(s, j + 1);
                }
                (self.derivative(s - y, j) - self.derivative(s + y, j)) / y
            },
            0.0,
            reach,
            &[kink],
            opts,
        )?;
        Ok(q.value)
    }
}

fn kernel_opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-13,
        max_intervals: 4000,
    }
}

/// `(vp(1/·) ∗ φ_ε)(x) = ∫_0^∞ (φ_ε(x-y) - φ_ε(x+y))/y dy`.
pub fn vp_convolve(m: &Mollifier, eps: f64, x: f64) -> Result<f64> {
    vp_convolve_derivative(m, eps, x, 0)
}

/// `(vp(1/·) ∗ φ_ε^(j))(x) = ε^(-1-j) W_j(x/ε)`.
pub fn vp_convolve_derivative(m: &Mollifier, eps: f64, x: f64, j: usize) -> Result<f64> {
    check_eps(eps)?;
    Ok(m.vp_kernel(x / eps, j, &kernel_opts())? / eps.powi(j as i32 + 1))
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "ε must be positive, got {eps}"
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupPrediction {
    pub mollifier: String,
    pub c_phi: f64,
    pub formula: String,
}

impl BlowupPrediction {
    /// Latest blow-up time `ε/(c C_φ)` of the Riccati flow from the
    /// mollified data.
    pub fn t_pred(&self, eps: f64, c: f64) -> f64 {
        eps / (c * self.c_phi)
    }
}

/// `C_φ = ∫ φ(y)/(1+y) dy = -ε (vp ∗ φ_ε)(-ε)`.
pub fn blowup_constant(m: &Mollifier) -> BlowupPrediction {
    let opts = QuadOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-13,
        max_intervals: 4000,
    };
    let c_phi = integrate(|y| m.value(y) / (1.0 + y), -1.0, 1.0, &opts)
        .expect("C_phi quadrature")
        .value;
    BlowupPrediction {
        mollifier: m.name().to_string(),
        c_phi,
        formula: "t_pred = eps/(c*C_phi), C_phi = int phi(y)/(1+y) dy".into(),
    }
}

/// `(x + iε)^(-k)`.
pub fn analytic_reg(k: u32, eps: f64, x: f64) -> Complex64 {
    Complex64::new(x, eps).powi(-(k as i32))
}

/// `∫ φ(x) (x + iε)^(-k) dx`, computed as `(1/(k-1)!) ∫ φ^(k-1)(x)/(x + iε) dx`
/// with the Lorentzian part integrated in the angle `x = ε tan θ`.
pub fn analytic_pairing(k: u32, phi: &TestFn, eps: f64, opts: &QuadOptions) -> Result<Complex64> {
    check_eps(eps)?;
    if k == 0 {
        return Err(Error::InvalidInput("pole order must be at least 1".into()));
    }
    let j = (k - 1) as usize;
    if !phi.smoothness().allows(j + 1) {
        return Err(Error::InsufficientSmoothness {
            name: phi.name().to_string(),
            available: phi.smoothness().max_order(),
            required: j + 1,
        });
    }
    let g = |x: f64| phi.derivative(x, j);
    let (a, b) = phi.support();
    let reach = a.abs().max(b.abs());
    let breaks: Vec<f64> = (0..12)
        .map(|i| eps * 10f64.powi(i))
        .filter(|&v| v < reach)
        .chain([a.abs(), b.abs()])
        .collect();
    let re = integrate_with_breaks(
        |x| x * (g(x) - g(-x)) / (x * x + eps * eps),
        0.0,
        reach,
        &breaks,
        opts,
    )?
    .value;
    let (ta, tb) = ((a / eps).atan(), (b / eps).atan());
    let im = -integrate_with_breaks(|t| g(eps * t.tan()), ta, tb, &[0.0], opts)?.value;
    let norm = rational_to_f64(&crate::exact::factorial(j as u32));
    Ok(Complex64::new(re, im) / norm)
}

/// First-order Richardson extrapolation from values at `ε` and `ε/2`.
pub fn richardson(at_eps: Complex64, at_half: Complex64) -> Complex64 {
    at_half * 2.0 - at_eps
}

/// Poisson-kernel regularization `û(x + iε) - û(x - iε)` of an element on a
/// t-independent argument.
pub fn poisson_reg(u: &DistExpr, eps: f64, x: f64) -> Result<Complex64> {
    check_eps(eps)?;
    if u.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if !u.arg().is_pure_x() {
        return Err(Error::UnsupportedArg(format!(
            "Poisson regularization needs a t-independent argument, got {}",
            u.arg()
        )));
    }
    // The upper part û(z) = Σ c_k (z+γ)^(-k) lives above the axis and the lower
    // part below; either way the difference is the ±iε substitution.
    let w = x + rational_to_f64(u.arg().gamma());
    Ok(u.eval_regularized(w, eps))
}

/// `(u ∗ φ_ε)^(d)(x)` for a classical decomposition, using
/// `Pf(1/w^k) ∗ φ_ε = (-1)^(k-1)/(k-1)! · vp ∗ φ_ε^(k-1)` and
/// `δ^(j) ∗ φ_ε = φ_ε^(j)`.
pub fn mollified_derivative(
    u: &ClassicalPart,
    m: &Mollifier,
    eps: f64,
    x: f64,
    d: usize,
    opts: &QuadOptions,
) -> Result<Complex64> {
    check_eps(eps)?;
    if !u.arg.is_pure_x() {
        return Err(Error::UnsupportedArg(format!(
            "mollification needs a t-independent argument, got {}",
            u.arg
        )));
    }
    let w = x + rational_to_f64(u.arg.gamma());
    let s = w / eps;
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, c) in &u.pf_terms {
        let j = (*k - 1) as usize;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let fact = rational_to_f64(&crate::exact::factorial(j as u32));
        let wv = m.vp_kernel(s, j + d, opts)? / eps.powi((j + d) as i32 + 1);
        acc += crational_to_c64(c) * (sign / fact * wv);
    }
    for (j, c) in &u.delta_terms {
        let order = *j as usize + d;
        m.check_order(order)?;
        let v = m.derivative(s, order) / eps.powi(order as i32 + 1);
        acc += c.to_c64() * v;
    }
    Ok(acc)
}

pub fn mollified(u: &ClassicalPart, m: &Mollifier, eps: f64, x: f64) -> Result<Complex64> {
    mollified_derivative(u, m, eps, x, 0, &kernel_opts())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub value: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// Grid points per ε; the spacing is `ε / points_per_eps`.
    pub points_per_eps: f64,
    pub quad: QuadOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            points_per_eps: 64.0,
            quad: kernel_opts(),
        }
    }
}

/// Geometric `ε` list from 1e-1 to 1e-4 with ratio 1/2.
pub fn default_eps_list() -> Vec<f64> {
    geometric_sequence(1e-1, 1e-4, 0.5)
}

pub(crate) fn check_eps_list(eps_list: &[f64]) -> Result<()> {
    if eps_list.is_empty() {
        return Err(Error::InvalidInput("empty ε list".into()));
    }
    for e in eps_list {
        check_eps(*e)?;
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput(
            "ε list must be strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// `⟨(u ∗ φ_ε)(v ∗ φ_ε), ψ⟩` for each `ε`, by the trapezoid rule on a uniform
/// grid through the origin covering `supp ψ` widened by `ε`.
pub fn model_product_sweep(
    u: &ClassicalPart,
    v: &ClassicalPart,
    m: &Mollifier,
    psi: &TestFn,
    eps_list: &[f64],
    opts: &SweepOptions,
) -> Result<Vec<SweepRow>> {
    check_eps_list(eps_list)?;
    if opts.points_per_eps < 8.0 {
        return Err(Error::GridUnderResolved {
            spacing: 1.0 / opts.points_per_eps,
            limit: 1.0 / 8.0,
        });
    }
    let same = u == v;
    let (a, b) = psi.support();
    eps_list
        .iter()
        .map(|&eps| {
            let h = eps / opts.points_per_eps;
            let lo = ((a - eps) / h).ceil() as i64;
            let hi = ((b + eps) / h).floor() as i64;
            let value = (lo..=hi)
                .into_par_iter()
                .map(|i| -> Result<Complex64> {
                    let x = i as f64 * h;
                    let w = psi.eval(x);
                    if w == 0.0 {
                        return Ok(Complex64::new(0.0, 0.0));
                    }
                    let uu = mollified_derivative(u, m, eps, x, 0, &opts.quad)?;
                    let vv = if same {
                        uu
                    } else {
                        mollified_derivative(v, m, eps, x, 0, &opts.quad)?
                    };
                    Ok(uu * vv * w)
                })
                .try_reduce(|| Complex64::new(0.0, 0.0), |p, q| Ok(p + q))?
                * h;
            Ok(SweepRow { eps, value })
        })
        .collect()
}

/// Convenience: sweep the model product of two algebra elements.
pub fn model_product_sweep_expr(
    u: &DistExpr,
    v: &DistExpr,
    m: &Mollifier,
    psi: &TestFn,
    eps_list: &[f64],
    opts: &SweepOptions,
) -> Result<Vec<SweepRow>> {
    model_product_sweep(&decompose(u), &decompose(v), m, psi, eps_list, opts)
}

/// Smooth ε-families with derivative access.
#[derive(Debug, Clone)]
pub enum RegFamily {
    /// `(x + iε)^(-k)`
    AnalyticPower { k: u32 },
    /// `u ∗ φ_ε`
    Friedrichs {
        u: ClassicalPart,
        mollifier: Mollifier,
    },
    /// `û(x + iε) - û(x - iε)`
    Poisson { u: DistExpr },
    /// `(r² + ε²)^q` in dimension `n`.
    RadialQ { n: u32, q: f64 },
}

impl RegFamily {
    /// Derivatives `0..=order` in `x` (or `r`) at fixed `ε`.
    pub fn derivatives(&self, x: f64, eps: f64, order: usize) -> Result<Vec<Complex64>> {
        check_eps(eps)?;
        match self {
            RegFamily::AnalyticPower { k } => Ok(analytic_derivatives(
                &[(*k, Complex64::new(1.0, 0.0))],
                Complex64::new(x, eps),
                order,
            )),
            RegFamily::Poisson { u } => {
                if u.is_zero() {
                    return Ok(vec![Complex64::new(0.0, 0.0); order + 1]);
                }
                if !u.arg().is_pure_x() {
                    return Err(Error::UnsupportedArg(format!(
                        "Poisson regularization needs a t-independent argument, got {}",
                        u.arg()
                    )));
                }
                let w = x + rational_to_f64(u.arg().gamma());
                let z = match u.arg().side() {
                    crate::dist_core::Side::Upper => Complex64::new(w, eps),
                    crate::dist_core::Side::Lower => Complex64::new(w, -eps),
                };
                let terms: Vec<(u32, Complex64)> = u
                    .terms()
                    .iter()
                    .map(|(k, c)| (*k, crational_to_c64(c)))
                    .collect();
                Ok(analytic_derivatives(&terms, z, order))
            }
            RegFamily::Friedrichs { u, mollifier } => (0..=order)
                .map(|d| mollified_derivative(u, mollifier, eps, x, d, &kernel_opts()))
                .collect(),
            RegFamily::RadialQ { q, .. } => {
                let r = Jet::variable(x, order);
                let base = (&r * &r) + eps * eps;
                Ok(base
                    .powf(*q)
                    .derivatives()
                    .into_iter()
                    .map(|v| Complex64::new(v, 0.0))
                    .collect())
            }
        }
    }

    pub fn eval(&self, x: f64, eps: f64) -> Result<Complex64> {
        Ok(self.derivatives(x, eps, 0)?[0])
    }

    /// The argument of the underlying algebra element, when there is one.
    pub fn arg(&self) -> Option<AffineArg> {
        match self {
            RegFamily::AnalyticPower { .. } => Some(AffineArg::x()),
            RegFamily::Friedrichs { u, .. } => Some(u.arg.clone()),
            RegFamily::Poisson { u } => Some(u.arg().clone()),
            RegFamily::RadialQ { .. } => None,
        }
    }
}

/// Derivatives of `Σ c_k z^(-k)` with respect to the real part of `z`.
fn analytic_derivatives(terms: &[(u32, Complex64)], z: Complex64, order: usize) -> Vec<Complex64> {
    (0..=order)
        .map(|d| {
            terms
                .iter()
                .map(|(k, c)| {
                    let k = *k as i32;
                    let falling: f64 = (0..d as i32).map(|i| -(k + i) as f64).product();
                    c * falling * z.powi(-(k + d as i32))
                })
                .sum()
        })
        .collect()
}

/// `(vp ∗ φ_ε)(x) - iπ φ_ε(x)`: the Friedrichs regularization of `1/(x + i0)`.
pub fn friedrichs_u0(m: &Mollifier, eps: f64, x: f64) -> Result<Complex64> {
    Ok(Complex64::new(
        vp_convolve(m, eps, x)?,
        -PI * m.value(x / eps) / eps,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_masses_and_symmetry() {
        for m in Mollifier::builtins() {
            assert!((m.mass() - 1.0).abs() < 1e-12, "{}", m.name());
            for &x in &[0.1, 0.5, 0.93] {
                assert_eq!(m.value(x), m.value(-x));
                assert!(m.value(x) >= 0.0);
            }
            assert_eq!(m.value(1.0), 0.0);
        }
    }

    #[test]
    fn fast_value_matches_profile() {
        for m in Mollifier::builtins() {
            for &x in &[-0.7, 0.0, 0.3, 0.99] {
                assert!((m.value(x) - m.profile().eval(x)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn vp_convolve_at_zero_and_minus_eps() {
        let m = Mollifier::poly4();
        for eps in [1.0, 0.1, 0.003] {
            assert!(vp_convolve(&m, eps, 0.0).unwrap().abs() < 1e-12);
            let v = vp_convolve(&m, eps, -eps).unwrap();
            assert!((v + 1.25 / eps).abs() < 1e-9 * (1.0 / eps).max(1.0));
        }
    }

    #[test]
    fn moment_expansion_matches_quadrature_at_switch() {
        for m in Mollifier::builtins() {
            for j in 0..=1 {
                let s = MOMENT_RADIUS;
                let series = m.vp_kernel(s, j, &kernel_opts()).unwrap();
                let direct = m.vp_kernel(s - 1e-12, j, &kernel_opts()).unwrap();
                assert!(
                    (series - direct).abs() < 1e-10,
                    "{} j={j}: {series} vs {direct}",
                    m.name()
                );
            }
        }
    }

    #[test]
    fn blowup_constants() {
        let p = blowup_constant(&Mollifier::poly4());
        assert!((p.c_phi - 1.25).abs() < 1e-12);
        assert!((p.t_pred(0.1, 2.0) - 0.04).abs() < 1e-14);
        let s = blowup_constant(&Mollifier::smooth());
        assert!((s.c_phi - 1.262_829_545_604_302_7).abs() < 1e-10);
    }

    #[test]
    fn analytic_reg_values() {
        assert_eq!(analytic_reg(1, 1.0, 0.0), Complex64::new(0.0, -1.0));
        let (x, e) = (0.3, 0.2);
        let z = analytic_reg(1, e, x);
        assert!((z.re - x / (x * x + e * e)).abs() < 1e-15);
        assert!((z.im + e / (x * x + e * e)).abs() < 1e-15);
    }

    #[test]
    fn poisson_matches_analytic() {
        let z = poisson_reg(&DistExpr::basis(2), 0.01, -0.4).unwrap();
        assert!((z - analytic_reg(2, 0.01, -0.4)).norm() < 1e-12);
        assert_eq!(
            poisson_reg(&DistExpr::zero(), 0.1, 0.2).unwrap(),
            Complex64::new(0.0, 0.0)
        );
    }

    #[test]
    fn friedrichs_derivatives_match_differences() {
        let fam = RegFamily::Friedrichs {
            u: decompose(&DistExpr::u0()),
            mollifier: Mollifier::smooth(),
        };
        let (eps, h) = (0.1, 1e-5);
        for &x in &[-0.25, -0.05, 0.02, 0.4] {
            let d = fam.derivatives(x, eps, 1).unwrap();
            let fd = (fam.eval(x + h, eps).unwrap() - fam.eval(x - h, eps).unwrap()) / (2.0 * h);
            assert!((d[1] - fd).norm() < 1e-4 * d[1].norm().max(1.0), "x={x}");
        }
    }

    #[test]
    fn sweep_rejects_coarse_grid_and_bad_eps() {
        let u = decompose(&DistExpr::u0());
        let m = Mollifier::poly4();
        let psi = TestFn::normalized_bump();
        let coarse = SweepOptions {
            points_per_eps: 4.0,
            ..SweepOptions::default()
        };
        assert!(matches!(
            model_product_sweep(&u, &u, &m, &psi, &[0.1], &coarse),
            Err(Error::GridUnderResolved { .. })
        ));
        assert!(
            model_product_sweep(&u, &u, &m, &psi, &[0.1, 0.2], &SweepOptions::default()).is_err()
        );
    }

    #[test]
    fn sweep_with_zero_factor_vanishes() {
        let u = decompose(&DistExpr::u0());
        let z = decompose(&DistExpr::zero());
        let rows = model_product_sweep(
            &u,
            &z,
            &Mollifier::poly4(),
            &TestFn::normalized_bump(),
            &[0.1, 0.05],
            &SweepOptions::default(),
        )
        .unwrap();
        assert!(rows.iter().all(|r| r.value == Complex64::new(0.0, 0.0)));
    }
}
