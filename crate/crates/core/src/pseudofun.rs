//! Radial pseudofunctions `R_λ = |x|^λ` on ℝⁿ and the stationary solutions of
//! semilinear wave equations built from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::testfn::RadialTestFn;

/// `|x|^λ` on ℝⁿ in the locally integrable range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudoFn {
    lambda: f64,
    n: u32,
}

impl PseudoFn {
    pub fn new(lambda: f64, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if !lambda.is_finite() || lambda <= -(n as f64) {
            return Err(Error::IntegrabilityViolation {
                lambda,
                n,
                reason: "λ ≤ -n is outside the locally integrable range".into(),
            });
        }
        Ok(Self { lambda, n })
    }

    /// Stationary profile `|x|^(-2/(p-1))` of `Δu + c u^p = 0`.
    pub fn stationary(p: u32, n: u32) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidInput("power must be at least 2".into()));
        }
        Self::new(-2.0 / (p as f64 - 1.0), n)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn eval(&self, r: f64) -> f64 {
        r.powf(self.lambda)
    }
}

/// `Δ R_λ = λ(λ+n-2) R_{λ-2}` away from the poles.
pub fn laplacian_coeff(lambda: f64, n: u32) -> f64 {
    lambda * (lambda + n as f64 - 2.0)
}

/// Area of the unit sphere `S^(n-1)` ⊂ ℝⁿ.
pub fn sphere_area(n: u32) -> f64 {
    assert!(n >= 1);
    // σ_0 = 2, σ_1 = 2π, σ_{d+2} = 2π σ_d / (d + 1)
    let d = n - 1;
    let mut k = d % 2;
    let mut sigma = if k == 0 {
        2.0
    } else {
        2.0 * std::f64::consts::PI
    };
    while k < d {
        sigma *= 2.0 * std::f64::consts::PI / (k as f64 + 1.0);
        k += 2;
    }
    sigma
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakValue {
    pub value: f64,
    pub quad_error: f64,
}

/// `σ_{n-1} ∫_0^R r^(a-1) g(r) dr` for `a > 0`, via `r = s^(2/a)`, which turns
/// the weight into `(2/a) s ds`.
fn radial_integral(
    a: f64,
    n: u32,
    radius: f64,
    g: impl Fn(f64) -> f64,
    opts: &QuadOptions,
) -> Result<WeakValue> {
    debug_assert!(a > 0.0);
    let e = 2.0 / a;
    let top = radius.powf(a / 2.0);
    let q = integrate(
        |s| if s == 0.0 { 0.0 } else { e * s * g(s.powf(e)) },
        0.0,
        top,
        opts,
    )?;
    let sigma = sphere_area(n);
    Ok(WeakValue {
        value: sigma * q.value,
        quad_error: sigma * q.error,
    })
}

/// `⟨R_μ, φ⟩` for `μ > -n`.
pub fn pair_radial(mu: f64, n: u32, phi: &RadialTestFn, opts: &QuadOptions) -> Result<WeakValue> {
    let a = mu + n as f64;
    if a <= 0.0 {
        return Err(Error::IntegrabilityViolation {
            lambda: mu,
            n,
            reason: "r^μ is not locally integrable".into(),
        });
    }
    radial_integral(a, n, phi.radius(), |r| phi.eval(r), opts)
}

/// `⟨R_λ, Δφ⟩`, with `r^(n-1) Δφ = r^(n-2) (r φ'' + (n-1) φ')` so that
/// profiles with `φ'(0) ≠ 0` are handled without a `1/r` in the integrand.
pub fn pair_with_laplacian(
    lambda: f64,
    n: u32,
    phi: &RadialTestFn,
    opts: &QuadOptions,
) -> Result<WeakValue> {
    let a = lambda + n as f64 - 1.0;
    if a <= 0.0 {
        return Err(Error::IntegrabilityViolation {
            lambda,
            n,
            reason: "r^λ Δφ is not integrable at the origin".into(),
        });
    }
    let nm1 = n as f64 - 1.0;
    radial_integral(
        a,
        n,
        phi.radius(),
        |r| {
            let [_, d1, d2] = phi.values(r);
            r * d2 + nm1 * d1
        },
        opts,
    )
}

fn residual_opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-12,
        rel_tol: 1e-13,
        max_intervals: 4000,
    }
}

/// `⟨R_λ, Δφ⟩ - λ(λ+n-2)⟨R_{λ-2}, φ⟩`.
pub fn weak_laplacian_residual(f: &PseudoFn, phi: &RadialTestFn) -> Result<WeakValue> {
    let n = f.n;
    if f.lambda <= 2.0 - n as f64 {
        return Err(Error::IntegrabilityViolation {
            lambda: f.lambda,
            n,
            reason: "λ ≤ 2-n: R_{λ-2} is not locally integrable".into(),
        });
    }
    let opts = residual_opts();
    let lhs = pair_with_laplacian(f.lambda, n, phi, &opts)?;
    let rhs = pair_radial(f.lambda - 2.0, n, phi, &opts)?;
    let k = laplacian_coeff(f.lambda, n);
    Ok(WeakValue {
        value: lhs.value - k * rhs.value,
        quad_error: lhs.quad_error + k.abs() * rhs.quad_error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NemytskiiReport {
    pub lambda: f64,
    pub n: u32,
    pub p: u32,
    /// Exponent of `(R_λ)^p = R_{λp}`.
    pub power_lambda: f64,
    /// `R_λ ∈ L^p_loc`, i.e. `R_{λp} ∈ L¹_loc`: `λp > -n`.
    pub in_lp_loc: bool,
}

impl NemytskiiReport {
    /// `R_{λp}` when it is still locally integrable.
    pub fn power(&self) -> Option<PseudoFn> {
        PseudoFn::new(self.power_lambda, self.n).ok()
    }
}

pub fn nemytskii_power(f: &PseudoFn, p: u32) -> NemytskiiReport {
    let power_lambda = f.lambda * p as f64;
    NemytskiiReport {
        lambda: f.lambda,
        n: f.n,
        p,
        power_lambda,
        in_lp_loc: power_lambda > -(f.n as f64),
    }
}

/// Stationary singular solutions of `Δu + coeff·u^p = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StationaryExample {
    /// `|x|^(-1/2)` in ℝ³ with `u⁵/4`.
    N3p5,
    /// `|x|^(-1)` in ℝ⁴ with `u³`.
    N4p3,
}

impl StationaryExample {
    pub fn all() -> [Self; 2] {
        [Self::N3p5, Self::N4p3]
    }

    pub fn id(&self) -> &'static str {
        match self {
            Self::N3p5 => "n3p5",
            Self::N4p3 => "n4p3",
        }
    }

    pub fn from_id(s: &str) -> Result<Self> {
        match s {
            "n3p5" => Ok(Self::N3p5),
            "n4p3" => Ok(Self::N4p3),
            other => Err(Error::InvalidInput(format!(
                "unknown example '{other}' (expected n3p5 or n4p3)"
            ))),
        }
    }

    pub fn n(&self) -> u32 {
        match self {
            Self::N3p5 => 3,
            Self::N4p3 => 4,
        }
    }

    pub fn p(&self) -> u32 {
        match self {
            Self::N3p5 => 5,
            Self::N4p3 => 3,
        }
    }

    pub fn coeff(&self) -> f64 {
        match self {
            Self::N3p5 => 0.25,
            Self::N4p3 => 1.0,
        }
    }

    pub fn lambda(&self) -> f64 {
        -2.0 / (self.p() as f64 - 1.0)
    }

    pub fn solution(&self) -> PseudoFn {
        PseudoFn::new(self.lambda(), self.n()).expect("stationary profile is integrable")
    }
}

/// `⟨u, Δφ⟩ + coeff·⟨u^p, φ⟩` for `u = R_λ`.
pub fn stationary_wave_residual_with_coeff(
    example: StationaryExample,
    phi: &RadialTestFn,
    coeff: f64,
) -> Result<WeakValue> {
    let opts = residual_opts();
    let (n, lambda) = (example.n(), example.lambda());
    let lap = pair_with_laplacian(lambda, n, phi, &opts)?;
    let pow = pair_radial(lambda * example.p() as f64, n, phi, &opts)?;
    Ok(WeakValue {
        value: lap.value + coeff * pow.value,
        quad_error: lap.quad_error + coeff.abs() * pow.quad_error,
    })
}

pub fn stationary_wave_residual(
    example: StationaryExample,
    phi: &RadialTestFn,
) -> Result<WeakValue> {
    stationary_wave_residual_with_coeff(example, phi, example.coeff())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub example: String,
    pub testfn_id: String,
    pub residual: f64,
    pub quad_error: f64,
}

/// Stationary and weak-Laplacian residuals of both examples over a family of
/// test profiles.
pub fn residual_table(profiles: &[RadialTestFn]) -> Result<Vec<ResidualRow>> {
    let mut rows = Vec::new();
    for ex in StationaryExample::all() {
        for phi in profiles {
            let lap = weak_laplacian_residual(&ex.solution(), phi)?;
            rows.push(ResidualRow {
                example: format!("{}:laplacian", ex.id()),
                testfn_id: phi.name().to_string(),
                residual: lap.value,
                quad_error: lap.quad_error,
            });
            let st = stationary_wave_residual(ex, phi)?;
            rows.push(ResidualRow {
                example: format!("{}:wave", ex.id()),
                testfn_id: phi.name().to_string(),
                residual: st.value,
                quad_error: st.quad_error,
            });
        }
    }
    Ok(rows)
}
