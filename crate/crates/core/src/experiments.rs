//! End-to-end studies composed from the other modules. The command-line
//! front end and the acceptance suite both drive these.

use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dist_core::{
    collect_fourier, conv_fourier_sums, decompose, diff, diff_n, fourier, mul, pair, pde_residual,
    DistExpr, PdeSpec, Var,
};
use crate::error::{Error, Result};
use crate::exact::{creal, int, rat, ratio_string, Rational};
use crate::fit::{fit_power_law, LineFit};
use crate::netlab::{g_singular_support, EpsNet, GrowthOptions};
use crate::quad::QuadOptions;
use crate::regularize::{
    blowup_constant, friedrichs_u0, model_product_sweep, Mollifier, SweepOptions,
};
use crate::singpred::{
    anomaly_score, build_forecast, AnomalyReport, CharacteristicFan, ForecastDomain, MeasuredSlice,
};
use crate::solvers::{
    max_deviation, solve_characteristics, solve_wave_leapfrog, CharConfig, Poly2, ReactionSpec,
    WaveConfig,
};
use crate::testfn::TestFn;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub id: String,
    pub statement: String,
    pub lhs: String,
    pub rhs: String,
    pub exact: bool,
}

impl IdentityCheck {
    pub fn line(&self) -> String {
        format!(
            "{} : EXACT {}",
            self.statement,
            if self.exact { "PASS" } else { "FAIL" }
        )
    }
}

fn expr_check(id: &str, statement: &str, lhs: &DistExpr, rhs: &DistExpr) -> IdentityCheck {
    IdentityCheck {
        id: id.into(),
        statement: statement.into(),
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
        exact: lhs == rhs,
    }
}

pub const IDENTITY_IDS: [&str; 4] = ["u0sq", "u0cube", "fourier-square", "fourier-hom"];

/// Exact identities of the boundary-value algebra: `u0² = -u0'`,
/// `2u0³ = u0''`, `F u0 ∗ F u0 = -4π² ξ H`, and `F(e_j e_k) = F e_j ∗ F e_k`
/// for `j + k ≤ k_max`.
pub fn identity_checks(id: &str, k_max: u32) -> Result<Vec<IdentityCheck>> {
    let e = DistExpr::basis;
    let u0 = DistExpr::u0();
    let mut out = Vec::new();
    let all = id == "all";
    if all || id == "u0sq" {
        out.push(expr_check(
            "u0sq",
            "u0^2 == -u0'",
            &mul(&u0, &u0)?,
            &diff(&u0, Var::X).neg(),
        ));
    }
    if all || id == "u0cube" {
        let cube = mul(&u0, &mul(&u0, &u0)?)?;
        out.push(expr_check(
            "u0cube",
            "2 u0^3 == u0''",
            &cube.scale(&creal(int(2))),
            &diff_n(&u0, Var::X, 2),
        ));
    }
    if all || id == "fourier-square" {
        let fu = fourier(&u0)?;
        let lhs = collect_fourier(&conv_fourier_sums(&fu, &fu));
        let rhs = collect_fourier(&fourier(&e(2))?);
        // (F e1 ∗ F e1) has the single term -4π² ξ H.
        let expected = crate::exact::PiPoly::monomial(creal(int(-4)), 2);
        let ok = lhs.len() == 1 && lhs.get(&1) == Some(&expected) && lhs == rhs;
        out.push(IdentityCheck {
            id: "fourier-square".into(),
            statement: "F(u0) * F(u0) == -4 pi^2 xi H(xi)".into(),
            lhs: format!("{lhs:?}"),
            rhs: format!("{rhs:?}"),
            exact: ok,
        });
    }
    if all || id == "fourier-hom" {
        for j in 1..k_max {
            for k in 1..=k_max - j {
                let lhs = collect_fourier(&fourier(&mul(&e(j), &e(k))?)?);
                let rhs = collect_fourier(&conv_fourier_sums(&fourier(&e(j))?, &fourier(&e(k))?));
                out.push(IdentityCheck {
                    id: format!("fourier-hom-{j}-{k}"),
                    statement: format!("F(e{j} e{k}) == F(e{j}) * F(e{k})"),
                    lhs: format!("{lhs:?}"),
                    rhs: format!("{rhs:?}"),
                    exact: lhs == rhs,
                });
            }
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidInput(format!(
            "unknown identity `{id}` (expected all, {})",
            IDENTITY_IDS.join(", ")
        )));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedRow {
    pub a: String,
    pub b: String,
    pub c: String,
    pub on_family: bool,
    pub residual: String,
    pub residual_zero: bool,
}

impl SpeedRow {
    /// Residual vanishes exactly when `a + b = 1`.
    pub fn consistent(&self) -> bool {
        self.on_family == self.residual_zero
    }
}

fn random_rational(rng: &mut ChaCha8Rng, nonzero: bool) -> Rational {
    loop {
        let n: i64 = rng.gen_range(-12..=12);
        let d: i64 = rng.gen_range(1..=9);
        if !nonzero || n != 0 {
            return rat(n, d);
        }
    }
}

/// `u = 1/(a x + b c t + i0)` in `(1/c)u_t + u_x + u² = 0`: `count` triples
/// with `a + b = 1` and `count` with `a + b ≠ 1`.
pub fn anomalous_speed_family(count: usize, seed: u64) -> Result<Vec<SpeedRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(2 * count);
    for on_family in [true, false] {
        for _ in 0..count {
            let a = random_rational(&mut rng, false);
            let b = if on_family {
                Rational::one() - &a
            } else {
                Rational::one() - &a + random_rational(&mut rng, true)
            };
            if a.is_zero() && b.is_zero() {
                continue;
            }
            let c = random_rational(&mut rng, true);
            let u = DistExpr::reciprocal_affine(a.clone(), &b * &c, Rational::zero())?;
            let res = pde_residual(&u, &PdeSpec::advection_reaction(c.clone())?)?;
            rows.push(SpeedRow {
                a: ratio_string(&a),
                b: ratio_string(&b),
                c: ratio_string(&c),
                on_family,
                residual: res.to_string(),
                residual_zero: res.is_zero(),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupRow {
    pub eps: f64,
    pub t_measured: Option<f64>,
    pub t_pred: f64,
    pub location: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupStudy {
    pub mollifier: String,
    pub c: f64,
    pub c_phi: f64,
    pub rows: Vec<BlowupRow>,
    /// Log-log slope of measured blow-up time against ε.
    pub slope: Option<LineFit>,
    /// `max t_measured / t_pred`.
    pub max_ratio: f64,
}

/// Riccati flow `u_t + c u_x = -c u²` from Friedrichs-mollified `1/(x + i0)`.
/// Feet are `i ε/16`, `|i| ≤ 32`, so `x = ±ε` are sampled exactly; the step is
/// `ε/1000`.
pub fn blowup_study(m: &Mollifier, c: f64, eps_list: &[f64], t_end: f64) -> Result<BlowupStudy> {
    let pred = blowup_constant(m);
    let spec = ReactionSpec::riccati(c)?;
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let feet: Vec<f64> = (-32..=32).map(|i| i as f64 * eps / 16.0).collect();
        let cfg = CharConfig {
            tau: eps / 1000.0,
            t_end,
            threshold: 1e6,
            record_every: usize::MAX,
        };
        let u0 = |x: f64| friedrichs_u0(m, eps, x).unwrap_or(Complex64::new(f64::NAN, 0.0));
        let field = solve_characteristics(&spec, u0, &feet, &cfg)?;
        rows.push(BlowupRow {
            eps,
            t_measured: field.blowup.map(|b| b.time),
            t_pred: pred.t_pred(eps, c),
            location: field.blowup.map(|b| b.location),
        });
    }
    let measured: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.t_measured.map(|t| (r.eps, t)))
        .collect();
    let slope = if measured.len() >= 2 && measured.len() == rows.len() {
        let (e, t): (Vec<f64>, Vec<f64>) = measured.iter().copied().unzip();
        Some(fit_power_law(&e, &t)?)
    } else {
        None
    };
    let max_ratio = rows
        .iter()
        .map(|r| r.t_measured.map_or(f64::INFINITY, |t| t / r.t_pred))
        .fold(0.0, f64::max);
    Ok(BlowupStudy {
        mollifier: m.name().to_string(),
        c,
        c_phi: pred.c_phi,
        rows,
        slope,
        max_ratio,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub eps: f64,
    pub c: f64,
    pub tau: f64,
    pub t_end: f64,
    pub sup_error: f64,
}

/// Characteristic run of `u_t + c u_x = -c u²` from `1/(x + iε)` compared with
/// the stationary solution `1/(x + iε)` at every recorded level.
pub fn analytic_stationarity(
    eps: f64,
    c: f64,
    tau: f64,
    t_end: f64,
    feet: &[f64],
) -> Result<StationarityReport> {
    let spec = ReactionSpec::riccati(c)?;
    let cfg = CharConfig {
        tau,
        t_end,
        threshold: 1e6,
        record_every: 1,
    };
    let field = solve_characteristics(&spec, |x| Complex64::new(x, eps).inv(), feet, &cfg)?;
    let mut err: f64 = 0.0;
    for (j, row) in field.u.iter().enumerate() {
        for (i, v) in row.iter().enumerate() {
            let x = field.position(i, j);
            err = err.max((v - Complex64::new(x, eps).inv()).norm());
        }
    }
    Ok(StationarityReport {
        eps,
        c,
        tau,
        t_end,
        sup_error: err,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveRun {
    pub h: f64,
    pub tau: f64,
    pub steps: usize,
    pub sup_deviation: f64,
    pub u0_sup: f64,
    pub relative_deviation: f64,
    pub energy_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveStudy {
    pub eps: f64,
    pub c: f64,
    pub half_width: f64,
    pub cfl: f64,
    pub t_end: f64,
    pub nonlinearity: String,
    pub runs: Vec<WaveRun>,
    /// Drift at `h` over drift at `h/2`.
    pub drift_ratio: f64,
}

/// `-u³ + 3x²u⁵`, the nonlinearity for which `(x² + ε²)^(-1/2)` with
/// `ε → 0` solves `u_xx = g` pointwise.
pub fn stationary_nonlinearity() -> Poly2 {
    Poly2::from_terms([(int(-1), 0, 3), (int(3), 2, 5)])
}

/// Leapfrog runs at `h` and `h/2` from the stationary profile
/// `(x² + ε²)^(-1/2)`, zero velocity.
pub fn wave_study(
    eps: f64,
    c: f64,
    half_width: f64,
    h: f64,
    cfl: f64,
    t_end: f64,
    g: Poly2,
) -> Result<WaveStudy> {
    let mut runs = Vec::new();
    for hh in [h, h / 2.0] {
        let mut cfg = WaveConfig::stationary_net(eps, c, half_width, hh, cfl, t_end);
        cfg.g = g.clone();
        cfg.record_every = 10;
        let (field, energy) = solve_wave_leapfrog(&cfg)?;
        let dev = max_deviation(&field);
        let u0_sup = field.u[0].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        runs.push(WaveRun {
            h: hh,
            tau: cfg.tau,
            steps: (t_end / cfg.tau).round() as usize,
            sup_deviation: dev,
            u0_sup,
            relative_deviation: dev / u0_sup,
            energy_drift: energy.max_relative_drift,
        });
    }
    let drift_ratio = runs[0].energy_drift / runs[1].energy_drift;
    Ok(WaveStudy {
        eps,
        c,
        half_width,
        cfl,
        t_end,
        nonlinearity: g.to_string(),
        runs,
        drift_ratio,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductRow {
    pub eps: f64,
    pub value: Complex64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductStudy {
    pub mollifier: String,
    pub exact: Complex64,
    pub full: Vec<ProductRow>,
    /// Square of the principal-value part alone.
    pub vp_only: Vec<ProductRow>,
    /// Divergence rate of the principal-value square.
    pub vp_rho: f64,
}

/// `⟨(u0 ∗ φ_ε)², ψ⟩` against `⟨e2, ψ⟩`, and the principal-value part alone.
pub fn model_product_study(m: &Mollifier, psi: &TestFn, eps_list: &[f64]) -> Result<ProductStudy> {
    let exact = pair(&DistExpr::basis(2), psi, &QuadOptions::default())?;
    let u = decompose(&DistExpr::u0());
    let vp = u.pf_part();
    let opts = SweepOptions::default();
    let rows = |rows: Vec<crate::regularize::SweepRow>| {
        rows.into_iter()
            .map(|r| ProductRow {
                eps: r.eps,
                value: r.value,
                relative_error: (r.value - exact).norm() / exact.norm(),
            })
            .collect::<Vec<_>>()
    };
    let full = rows(model_product_sweep(&u, &u, m, psi, eps_list, &opts)?);
    let vp_only = rows(model_product_sweep(&vp, &vp, m, psi, eps_list, &opts)?);
    let mags: Vec<f64> = vp_only.iter().map(|r| r.value.norm()).collect();
    let vp_rho = if eps_list.len() >= 2 {
        -fit_power_law(eps_list, &mags)?.slope
    } else {
        f64::NAN
    };
    Ok(ProductStudy {
        mollifier: m.name().to_string(),
        exact,
        full,
        vp_only,
        vp_rho,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyStudy {
    pub net: String,
    pub forecast_speed: f64,
    pub report: AnomalyReport,
}

/// Measure the G∞-singular support of `net` on `[x_min, x_max]` at each time,
/// forecast `x = speed·t` from a singularity at the origin, and score.
pub fn anomaly_study(
    net: &EpsNet,
    speed: f64,
    times: &[f64],
    window: (f64, f64),
    cell_width: f64,
    k_max: usize,
) -> Result<AnomalyStudy> {
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let fan = CharacteristicFan::from_f64(&[speed], &[0.0], crate::singpred::DEFAULT_DEPTH)?;
    let forecast = build_forecast(
        &fan,
        ForecastDomain::new(window.0, window.1, t_max.max(f64::MIN_POSITIVE))?,
    )?;
    let measured = times
        .iter()
        .map(|&t| {
            let opts = GrowthOptions {
                t,
                ..GrowthOptions::default()
            };
            let s = g_singular_support(net, window, cell_width, k_max, &opts)?;
            Ok(MeasuredSlice {
                t,
                intervals: s.intervals,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AnomalyStudy {
        net: net.name.clone(),
        forecast_speed: speed,
        report: anomaly_score(&forecast, &measured, cell_width)?,
    })
}
