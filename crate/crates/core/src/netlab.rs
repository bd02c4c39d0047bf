//! ε-net analysis: growth orders of derivatives, moderateness and G∞
//! classification, singular-support estimation, weak limits of pairings and
//! weak-asymptotic residual rates.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{int, rational_to_f64, Rational};
use crate::fit::{fit_line, LineFit};
use crate::jet::Jet;
use crate::pseudofun::{sphere_area, StationaryExample};
use crate::quad::{integrate_with_breaks, QuadOptions};
use crate::regularize::{check_eps_list, RegFamily};
use crate::testfn::{standard_bump, RadialTestFn, TestFn};

/// `P_0 = 1`, `P_{k+1} = (x² + 1) P_k' - (2k + 1) x P_k`, so that
/// `χ^(k)(x) = P_k(x) (x² + 1)^(-k-1/2)` for `χ = (x² + 1)^(-1/2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PkTable {
    /// Coefficients in increasing degree.
    polys: Vec<Vec<Rational>>,
}

impl PkTable {
    pub fn new(k_max: usize) -> Self {
        let mut polys: Vec<Vec<Rational>> = vec![vec![int(1)]];
        for k in 0..k_max {
            let p = &polys[k];
            let mut next = vec![Rational::zero(); p.len() + 1];
            // (x² + 1) P'
            for (i, c) in p.iter().enumerate().skip(1) {
                let d = c * int(i as i64);
                next[i - 1] += &d;
                next[i + 1] += &d;
            }
            // -(2k+1) x P
            for (i, c) in p.iter().enumerate() {
                next[i + 1] -= c * int(2 * k as i64 + 1);
            }
            while next.len() > 1 && next.last().is_some_and(|c| c.is_zero()) {
                next.pop();
            }
            polys.push(next);
        }
        Self { polys }
    }

    pub fn k_max(&self) -> usize {
        self.polys.len() - 1
    }

    pub fn poly(&self, k: usize) -> &[Rational] {
        &self.polys[k]
    }

    pub fn degree(&self, k: usize) -> usize {
        self.polys[k].len() - 1
    }

    pub fn eval_poly(&self, k: usize, x: f64) -> f64 {
        self.polys[k]
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + rational_to_f64(c))
    }

    /// `χ^(k)(0) = P_k(0)`, exactly.
    pub fn chi_derivative_at_zero(&self, k: usize) -> Rational {
        self.polys[k][0].clone()
    }

    /// `χ^(k)(x)`.
    pub fn chi_derivative(&self, k: usize, x: f64) -> f64 {
        self.eval_poly(k, x) * (x * x + 1.0).powf(-(k as f64) - 0.5)
    }

    /// `χ_ε^(k)(x) = ε^(-k-1) χ^(k)(x/ε)` for `χ_ε = (x² + ε²)^(-1/2)`.
    pub fn chi_eps_derivative(&self, k: usize, x: f64, eps: f64) -> f64 {
        self.chi_derivative(k, x / eps) / eps.powi(k as i32 + 1)
    }
}

pub type NetFn = Arc<dyn Fn(f64, f64, usize) -> Result<Vec<Complex64>> + Send + Sync>;

/// Closed-form ε-families.
#[derive(Clone)]
pub enum NetKind {
    /// `(x² + ε²)^(-1/p)`; `p = 2` uses the `P_k` recurrence.
    Chi {
        p: u32,
    },
    Reg(RegFamily),
    /// `ε^(-1) ψ(x/ε)` with `ψ = exp(-1/(1-x²))`.
    ScaledBump,
    /// `ε^power`, constant in `x`.
    EpsPower {
        power: f64,
    },
    Zero,
    /// `(x, ε, order) ↦ derivatives 0..=order`.
    Custom(NetFn),
}

impl fmt::Debug for NetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetKind::Chi { p } => write!(f, "Chi(p={p})"),
            NetKind::Reg(r) => write!(f, "Reg({r:?})"),
            NetKind::ScaledBump => write!(f, "ScaledBump"),
            NetKind::EpsPower { power } => write!(f, "EpsPower({power})"),
            NetKind::Zero => write!(f, "Zero"),
            NetKind::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// An ε-indexed family of smooth functions of `x`, optionally transported:
/// at time `t` the member is `u_ε(x - speed·t)`.
#[derive(Debug, Clone)]
pub struct EpsNet {
    pub name: String,
    pub kind: NetKind,
    pub eps_list: Vec<f64>,
    pub speed: f64,
    pk: Option<Arc<PkTable>>,
}

const PK_ORDER: usize = 16;

impl EpsNet {
    pub fn new(name: impl Into<String>, kind: NetKind, eps_list: Vec<f64>) -> Result<Self> {
        check_eps_list(&eps_list)?;
        let pk = matches!(kind, NetKind::Chi { p: 2 }).then(|| Arc::new(PkTable::new(PK_ORDER)));
        if let NetKind::Chi { p: 0 } = kind {
            return Err(Error::InvalidInput("chi_p needs p ≥ 1".into()));
        }
        Ok(Self {
            name: name.into(),
            kind,
            eps_list,
            speed: 0.0,
            pk,
        })
    }

    pub fn chi(p: u32, eps_list: Vec<f64>) -> Result<Self> {
        Self::new(format!("chi_{p}"), NetKind::Chi { p }, eps_list)
    }

    pub fn transported(mut self, speed: f64) -> Self {
        self.speed = speed;
        self.name = format!("{}@speed={speed}", self.name);
        self
    }

    pub fn with_eps_list(&self, eps_list: Vec<f64>) -> Result<Self> {
        check_eps_list(&eps_list)?;
        Ok(Self {
            eps_list,
            ..self.clone()
        })
    }

    /// `∂_x^d u_ε(x)` for `d = 0..=order` at time 0.
    pub fn derivatives(&self, x: f64, eps: f64, order: usize) -> Result<Vec<Complex64>> {
        let real = |v: Vec<f64>| v.into_iter().map(|r| Complex64::new(r, 0.0)).collect();
        match &self.kind {
            NetKind::Chi { p } => {
                if *p == 2 && order <= PK_ORDER {
                    let pk = self.pk.as_ref().expect("P_k table");
                    Ok(real(
                        (0..=order)
                            .map(|k| pk.chi_eps_derivative(k, x, eps))
                            .collect(),
                    ))
                } else {
                    let j = Jet::variable(x, order);
                    let base = (&j * &j) + eps * eps;
                    Ok(real(base.powf(-1.0 / *p as f64).derivatives()))
                }
            }
            NetKind::Reg(fam) => fam.derivatives(x, eps, order),
            NetKind::ScaledBump => {
                let j = Jet::variable(x / eps, order);
                let d = standard_bump(&j).derivatives();
                Ok(real(
                    d.into_iter()
                        .enumerate()
                        .map(|(k, v)| v / eps.powi(k as i32 + 1))
                        .collect(),
                ))
            }
            NetKind::EpsPower { power } => {
                let mut v = vec![Complex64::new(0.0, 0.0); order + 1];
                v[0] = Complex64::new(eps.powf(*power), 0.0);
                Ok(v)
            }
            NetKind::Zero => Ok(vec![Complex64::new(0.0, 0.0); order + 1]),
            NetKind::Custom(f) => f(x, eps, order),
        }
    }

    pub fn derivatives_at(&self, x: f64, t: f64, eps: f64, order: usize) -> Result<Vec<Complex64>> {
        self.derivatives(x - self.speed * t, eps, order)
    }

    pub fn eval(&self, x: f64, eps: f64) -> Result<Complex64> {
        Ok(self.derivatives(x, eps, 0)?[0])
    }
}

/// Closed intervals and single points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Region {
    Point { x: f64 },
    Interval { a: f64, b: f64 },
}

impl Region {
    pub fn point(x: f64) -> Self {
        Region::Point { x }
    }

    pub fn interval(a: f64, b: f64) -> Self {
        Region::Interval {
            a: a.min(b),
            b: a.max(b),
        }
    }

    /// Sample points: `samples` equispaced points plus the origin when it lies
    /// inside.
    pub fn sample_points(&self, samples: usize) -> Vec<f64> {
        match *self {
            Region::Point { x } => vec![x],
            Region::Interval { a, b } => {
                let n = samples.max(2);
                let mut pts: Vec<f64> = (0..n)
                    .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
                    .collect();
                if a < 0.0 && b > 0.0 {
                    pts.push(0.0);
                }
                pts
            }
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Point { x } => write!(f, "{{{x}}}"),
            Region::Interval { a, b } => write!(f, "[{a}, {b}]"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthOptions {
    pub samples: usize,
    /// Largest probed decay order for negligibility.
    pub a_max: f64,
    /// Fits with RMS residual above this are not trusted as power laws.
    pub max_residual: f64,
    /// G∞: `max_α b(α) - b(0)` must not exceed this.
    pub ginf_spread: f64,
    /// Time at which a transported net is probed.
    pub t: f64,
}

impl Default for GrowthOptions {
    fn default() -> Self {
        Self {
            samples: 201,
            a_max: 6.0,
            max_residual: 0.1,
            ginf_spread: 0.25,
            t: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub order: usize,
    /// Fitted `b` in `sup |∂^α u_ε| ~ ε^(-b)`; `None` when every sup vanishes.
    pub b: Option<f64>,
    pub stderr: f64,
    pub residual: f64,
    pub sups: Vec<f64>,
}

impl GrowthFit {
    pub fn is_zero(&self) -> bool {
        self.b.is_none()
    }
}

fn region_sups(
    net: &EpsNet,
    region: &Region,
    order: usize,
    opts: &GrowthOptions,
) -> Result<Vec<Vec<f64>>> {
    let pts = region.sample_points(opts.samples);
    let (lo, hi, spacing) = match *region {
        Region::Point { x } => (x, x, 0.0),
        Region::Interval { a, b } => (a, b, (b - a) / (opts.samples.max(2) - 1) as f64),
    };
    net.eps_list
        .iter()
        .map(|&eps| {
            let coarse: Vec<Vec<f64>> = pts
                .iter()
                .map(|&x| {
                    Ok(net
                        .derivatives_at(x, opts.t, eps, order)?
                        .iter()
                        .map(|v| v.norm())
                        .collect())
                })
                .collect::<Result<_>>()?;
            let mut sups: Vec<f64> = (0..=order)
                .map(|k| coarse.iter().map(|c| c[k]).fold(0.0, f64::max))
                .collect();
            if spacing == 0.0 {
                return Ok(sups);
            }
            // Features narrower than the sample spacing are resolved by
            // zooming in on the largest coarse local maxima of each order.
            for (k, sup) in sups.iter_mut().enumerate() {
                let m = pts.len();
                let mut starts: Vec<usize> = (0..m)
                    .filter(|&i| {
                        let v = coarse[i][k];
                        v > 0.0
                            && (i == 0 || coarse[i - 1][k] <= v)
                            && (i + 1 >= m || coarse[i + 1][k] <= v)
                    })
                    .collect();
                starts.sort_by(|&i, &j| coarse[j][k].total_cmp(&coarse[i][k]));
                starts.truncate(REFINE_STARTS);
                let mut zooms: Vec<(f64, f64)> =
                    starts.iter().map(|&i| (pts[i], 2.0 * spacing)).collect();
                // Odd derivatives of an ε-thin peak can vanish at every
                // sample point, so also scan an ε-scale window around the
                // largest values of the net itself.
                let mut centres: Vec<usize> = (0..m).filter(|&i| coarse[i][0] > 0.0).collect();
                centres.sort_by(|&i, &j| coarse[j][0].total_cmp(&coarse[i][0]));
                centres.truncate(REFINE_STARTS);
                zooms.extend(
                    centres
                        .into_iter()
                        .map(|i| (pts[i], 4.0 * eps.min(spacing))),
                );
                for (c0, d0) in zooms {
                    let mut c = c0;
                    let mut d = d0;
                    for _ in 0..REFINE_LEVELS {
                        let mut best = (f64::NEG_INFINITY, c);
                        for j in 0..=2 * REFINE_POINTS {
                            let x = c + d * (j as f64 / REFINE_POINTS as f64 - 1.0);
                            if (lo..=hi).contains(&x) {
                                let v = net.derivatives_at(x, opts.t, eps, order)?[k].norm();
                                if v > best.0 {
                                    best = (v, x);
                                }
                            }
                        }
                        *sup = sup.max(best.0);
                        c = best.1;
                        d /= REFINE_POINTS as f64;
                    }
                }
            }
            Ok(sups)
        })
        .collect()
}

const REFINE_LEVELS: usize = 4;
const REFINE_POINTS: usize = 20;
const REFINE_STARTS: usize = 4;

/// Indices of the asymptotic tail of an ε list: the smallest-ε half, at
/// least 4 points.
fn tail_start(n: usize) -> usize {
    n.saturating_sub((n / 2).max(MIN_FIT_POINTS))
}

const MIN_FIT_POINTS: usize = 4;

fn fit_growth(eps: &[f64], sups: Vec<f64>, order: usize) -> Result<GrowthFit> {
    if sups.iter().all(|s| *s == 0.0) {
        return Ok(GrowthFit {
            order,
            b: None,
            stderr: 0.0,
            residual: 0.0,
            sups,
        });
    }
    if eps.len() < MIN_FIT_POINTS {
        return Err(Error::FitDegenerate(format!(
            "growth fit needs at least {MIN_FIT_POINTS} ε values, got {}",
            eps.len()
        )));
    }
    // Vanishing samples only occur for compactly supported nets whose
    // support has left the region; they are floored at the smallest normal
    // float so that the fit reports a very steep decay.
    let from = tail_start(eps.len());
    let lx: Vec<f64> = eps[from..].iter().map(|e| (1.0 / e).ln()).collect();
    let ly: Vec<f64> = sups[from..]
        .iter()
        .map(|s| s.max(f64::MIN_POSITIVE).ln())
        .collect();
    let f = fit_line(&lx, &ly)?;
    Ok(GrowthFit {
        order,
        b: Some(f.slope),
        stderr: f.slope_stderr,
        residual: f.residual,
        sups,
    })
}

/// Least-squares exponent `b` in `sup_region |∂^α u_ε| = O(ε^(-b))`, fitted
/// on the smallest-ε half of the list (at least 4 points) so that the
/// pre-asymptotic regime `ε ≳ dist(region, singularity)` does not bias it.
pub fn growth_fit(
    net: &EpsNet,
    region: &Region,
    alpha: usize,
    opts: &GrowthOptions,
) -> Result<GrowthFit> {
    let sups: Vec<f64> = region_sups(net, region, alpha, opts)?
        .into_iter()
        .map(|s| s[alpha])
        .collect();
    let fit = fit_growth(&net.eps_list, sups, alpha)?;
    if fit.is_zero() {
        return Err(Error::FitDegenerate(format!(
            "sup of order-{alpha} derivative vanishes on {region} for every ε (negligible)"
        )));
    }
    Ok(fit)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Growth {
    Negligible,
    Moderate,
    NonModerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub region: Region,
    pub fits: Vec<GrowthFit>,
    pub class: Growth,
    pub g_infinity: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub net: String,
    pub k_max: usize,
    pub a_max: f64,
    pub regions: Vec<RegionReport>,
    /// Finite probes can only certify up to the probed orders.
    pub certified_up_to: String,
}

impl GrowthReport {
    pub fn overall(&self) -> Growth {
        if self.regions.iter().any(|r| r.class == Growth::NonModerate) {
            Growth::NonModerate
        } else if self.regions.iter().all(|r| r.class == Growth::Negligible) {
            Growth::Negligible
        } else {
            Growth::Moderate
        }
    }
}

fn classify_region(
    net: &EpsNet,
    region: &Region,
    k_max: usize,
    opts: &GrowthOptions,
) -> Result<RegionReport> {
    let per_eps = region_sups(net, region, k_max, opts)?;
    let fits: Vec<GrowthFit> = (0..=k_max)
        .map(|a| fit_growth(&net.eps_list, per_eps.iter().map(|s| s[a]).collect(), a))
        .collect::<Result<_>>()?;
    let nonzero: Vec<&GrowthFit> = fits.iter().filter(|f| !f.is_zero()).collect();
    let moderate = nonzero
        .iter()
        .all(|f| f.b.is_some_and(f64::is_finite) && f.residual < opts.max_residual);
    let negligible = nonzero.iter().all(|f| f.b.unwrap() <= -opts.a_max);
    let class = if negligible {
        Growth::Negligible
    } else if moderate {
        Growth::Moderate
    } else {
        Growth::NonModerate
    };
    let g_infinity = match nonzero.first() {
        None => true,
        Some(first) => {
            let base = fits[0].b.unwrap_or(first.b.unwrap());
            let top = nonzero
                .iter()
                .map(|f| f.b.unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            class == Growth::Negligible || top - base <= opts.ginf_spread
        }
    };
    Ok(RegionReport {
        region: *region,
        fits,
        class,
        g_infinity,
    })
}

/// Moderate / negligible / G∞ verdicts per region, probing derivative orders
/// up to `k_max`.
pub fn classify(
    net: &EpsNet,
    regions: &[Region],
    k_max: usize,
    opts: &GrowthOptions,
) -> Result<GrowthReport> {
    let reports = regions
        .par_iter()
        .map(|r| classify_region(net, r, k_max, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(GrowthReport {
        net: net.name.clone(),
        k_max,
        a_max: opts.a_max,
        regions: reports,
        certified_up_to: format!("K_max = {k_max}, a_max = {}", opts.a_max),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportEstimate {
    pub t: f64,
    pub cell_width: f64,
    /// Cells without the G∞ property.
    pub singular_cells: Vec<(f64, f64)>,
    /// Singular cells merged into maximal intervals.
    pub intervals: Vec<(f64, f64)>,
}

/// G∞-singular support on `[a, b]` at time `t`: union of cells of width `w`
/// (centred on multiples of `w`, so the origin is a cell centre) whose G∞
/// flag is false.
pub fn g_singular_support(
    net: &EpsNet,
    domain: (f64, f64),
    cell_width: f64,
    k_max: usize,
    opts: &GrowthOptions,
) -> Result<SupportEstimate> {
    if !(cell_width > 0.0) || domain.1 <= domain.0 {
        return Err(Error::InvalidInput(
            "need a nonempty domain and positive cell width".into(),
        ));
    }
    let k0 = (domain.0 / cell_width).ceil() as i64;
    let k1 = (domain.1 / cell_width).floor() as i64;
    let cell_opts = GrowthOptions {
        samples: opts.samples.min(21),
        ..*opts
    };
    let flags = (k0..=k1)
        .into_par_iter()
        .map(|k| {
            let c = k as f64 * cell_width;
            let cell = (c - 0.5 * cell_width, c + 0.5 * cell_width);
            let r = classify_region(net, &Region::interval(cell.0, cell.1), k_max, &cell_opts)?;
            Ok((cell, r.g_infinity))
        })
        .collect::<Result<Vec<_>>>()?;
    let singular_cells: Vec<(f64, f64)> = flags.iter().filter(|f| !f.1).map(|f| f.0).collect();
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    for &(a, b) in &singular_cells {
        match intervals.last_mut() {
            Some(last) if (a - last.1).abs() <= 1e-9 * cell_width => last.1 = b,
            _ => intervals.push((a, b)),
        }
    }
    Ok(SupportEstimate {
        t: opts.t,
        cell_width,
        singular_cells,
        intervals,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum SweepVerdict {
    Convergent { limit: Complex64, rate: f64 },
    LogDivergent { slope: f64, r_squared: f64 },
    PowerDivergent { rho: f64 },
    Inconclusive { increment_slope: f64 },
}

impl SweepVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            SweepVerdict::Convergent { .. } => "convergent",
            SweepVerdict::LogDivergent { .. } => "log-divergent",
            SweepVerdict::PowerDivergent { .. } => "power-divergent",
            SweepVerdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingSweep {
    pub eps: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Slope of `log |v_{j+1} - v_j|` against `log ε`.
    pub increment_fit: Option<LineFit>,
    pub verdict: SweepVerdict,
}

/// Threshold on the increment slope separating the three behaviours.
const SLOPE_BAND: f64 = 0.1;

/// Classify a sequence of pairings along a geometric ε list.
///
/// Increments `Δ_j = v_{j+1} - v_j` scale like `ε^σ`: `σ > 0` means a
/// convergent sequence (the limit is extrapolated by summing the geometric
/// tail), `σ ≈ 0` with values linear in `log(1/ε)` is logarithmic
/// divergence, and `σ < 0` is power divergence with `ρ = -σ`.
pub fn classify_sweep(eps: &[f64], values: &[Complex64]) -> Result<SweepVerdict> {
    if eps.len() != values.len() || eps.len() < 4 {
        return Err(Error::FitDegenerate(
            "sweep needs at least 4 (ε, value) pairs".into(),
        ));
    }
    let inc: Vec<Complex64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    if inc.iter().all(|d| d.norm() == 0.0) {
        return Ok(SweepVerdict::Convergent {
            limit: values[values.len() - 1],
            rate: f64::INFINITY,
        });
    }
    let mid: Vec<f64> = eps.windows(2).map(|w| (w[0] * w[1]).sqrt()).collect();
    let mags: Vec<f64> = inc
        .iter()
        .map(|d| d.norm().max(f64::MIN_POSITIVE))
        .collect();
    let f = fit_line(
        &mid.iter().map(|e| e.ln()).collect::<Vec<_>>(),
        &mags.iter().map(|m| m.ln()).collect::<Vec<_>>(),
    )?;
    let sigma = f.slope;
    if sigma > SLOPE_BAND {
        let n = values.len();
        let ratio = eps[n - 1] / eps[n - 2];
        let q = ratio.powf(sigma);
        let limit = values[n - 1] + inc[inc.len() - 1] * (q / (1.0 - q));
        return Ok(SweepVerdict::Convergent { limit, rate: sigma });
    }
    if sigma < -SLOPE_BAND {
        return Ok(SweepVerdict::PowerDivergent { rho: -sigma });
    }
    // Project on the direction of overall change to get a real sequence.
    let total = values[values.len() - 1] - values[0];
    let dir = if total.norm() > 0.0 {
        total / total.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let proj: Vec<f64> = values.iter().map(|v| (v * dir.conj()).re).collect();
    let lx: Vec<f64> = eps.iter().map(|e| (1.0 / e).ln()).collect();
    let g = fit_line(&lx, &proj)?;
    if g.r_squared >= 0.99 {
        Ok(SweepVerdict::LogDivergent {
            slope: g.slope,
            r_squared: g.r_squared,
        })
    } else {
        Ok(SweepVerdict::Inconclusive {
            increment_slope: sigma,
        })
    }
}

fn sweep_opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-12,
        max_intervals: 8000,
    }
}

/// Panel breaks resolving an ε-scale peak at the origin.
fn peak_breaks(eps: f64, reach: f64) -> Vec<f64> {
    let mut b: Vec<f64> = (0..16)
        .map(|i| eps * 4f64.powi(i))
        .filter(|v| *v < reach)
        .collect();
    b.extend(b.clone().into_iter().map(|v| -v));
    b.push(0.0);
    b
}

/// `∫ f(x) φ(x) dx` for an integrand with an ε-scale peak at the origin.
pub fn peaked_pairing(
    f: impl Fn(f64) -> Complex64,
    phi: &TestFn,
    eps: f64,
    opts: &QuadOptions,
) -> Result<Complex64> {
    let (a, b) = phi.support();
    let breaks = peak_breaks(eps, a.abs().max(b.abs()));
    Ok(integrate_with_breaks(|x| f(x) * phi.eval(x), a, b, &breaks, opts)?.value)
}

/// `⟨u_ε, φ⟩` along the net's ε list, with a convergence verdict.
pub fn pairing_sweep(net: &EpsNet, phi: &TestFn) -> Result<PairingSweep> {
    let opts = sweep_opts();
    let values = net
        .eps_list
        .par_iter()
        .map(|&eps| {
            peaked_pairing(
                |x| net.eval(x, eps).unwrap_or(Complex64::new(f64::NAN, 0.0)),
                phi,
                eps,
                &opts,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    sweep_from_values(net.eps_list.clone(), values)
}

fn sweep_from_values(eps: Vec<f64>, values: Vec<Complex64>) -> Result<PairingSweep> {
    let verdict = classify_sweep(&eps, &values)?;
    let inc: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let increment_fit = if inc.iter().all(|v| *v > 0.0) {
        let mid: Vec<f64> = eps.windows(2).map(|w| (w[0] * w[1]).sqrt().ln()).collect();
        fit_line(&mid, &inc.iter().map(|v| v.ln()).collect::<Vec<_>>()).ok()
    } else {
        None
    };
    Ok(PairingSweep {
        eps,
        values,
        increment_fit,
        verdict,
    })
}

/// `⟨|x|^(-2/p), φ⟩` via `x = ±s^p`, which removes the singularity for `p ≥ 3`.
pub fn chi_limit_pairing(p: u32, phi: &TestFn) -> Result<f64> {
    if p < 3 {
        return Err(Error::IntegrabilityViolation {
            lambda: -2.0 / p as f64,
            n: 1,
            reason: "|x|^(-2/p) is not locally integrable for p < 3".into(),
        });
    }
    let (a, b) = phi.support();
    let pf = p as f64;
    // ∫_0^R x^(-2/p) g(x) dx = p ∫_0^(R^(1/p)) s^(p-3) g(s^p) ds
    let side = |sign: f64, reach: f64| -> Result<f64> {
        if reach <= 0.0 {
            return Ok(0.0);
        }
        let top = reach.powf(1.0 / pf);
        Ok(integrate_with_breaks(
            |s| pf * s.powi(p as i32 - 3) * phi.eval(sign * s.powf(pf)),
            0.0,
            top,
            &[],
            &sweep_opts(),
        )?
        .value)
    };
    Ok(side(1.0, b)? + side(-1.0, -a)?)
}

/// Error term `coeff · ε^2 · u_ε^power` of a weak asymptotic solution built
/// from `u_ε = (r² + ε²)^q` in ℝⁿ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorTerm {
    pub n: u32,
    pub q: f64,
    pub coeff: f64,
    pub power: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeakAsymExample {
    /// ℝ³, `u_ε = (r² + ε²)^(-1/4)`, error `(5/4) ε² u_ε⁹`.
    N3p5e,
    /// ℝ⁴, `u_ε = (r² + ε²)^(-1/2)`, error `3 ε² u_ε⁵`.
    N4p3e,
}

impl WeakAsymExample {
    pub fn all() -> [Self; 2] {
        [Self::N3p5e, Self::N4p3e]
    }

    pub fn id(&self) -> &'static str {
        match self {
            Self::N3p5e => "n3p5e",
            Self::N4p3e => "n4p3e",
        }
    }

    pub fn from_id(s: &str) -> Result<Self> {
        match s {
            "n3p5e" => Ok(Self::N3p5e),
            "n4p3e" => Ok(Self::N4p3e),
            other => Err(Error::InvalidInput(format!(
                "unknown example '{other}' (expected n3p5e or n4p3e)"
            ))),
        }
    }

    pub fn stationary(&self) -> StationaryExample {
        match self {
            Self::N3p5e => StationaryExample::N3p5,
            Self::N4p3e => StationaryExample::N4p3,
        }
    }

    pub fn error_term(&self) -> ErrorTerm {
        match self {
            Self::N3p5e => ErrorTerm {
                n: 3,
                q: -0.25,
                coeff: 1.25,
                power: 9,
            },
            Self::N4p3e => ErrorTerm {
                n: 4,
                q: -0.5,
                coeff: 3.0,
                power: 5,
            },
        }
    }

    /// Predicted decay exponent `2 + q·power + n`.
    pub fn predicted_rate(&self) -> f64 {
        let e = self.error_term();
        2.0 + e.q * 2.0 * e.power as f64 + e.n as f64
    }
}

fn radial_breaks(eps: f64, radius: f64) -> Vec<f64> {
    (0..16)
        .map(|i| eps * 4f64.powi(i))
        .filter(|v| *v < radius)
        .collect()
}

/// `σ_{n-1} ∫ coeff ε² (r² + ε²)^(q·power) φ(r) r^(n-1) dr`.
pub fn pair_error_term(
    term: &ErrorTerm,
    phi: &RadialTestFn,
    eps: f64,
    opts: &QuadOptions,
) -> Result<f64> {
    if term.coeff == 0.0 {
        return Ok(0.0);
    }
    let e = term.q * term.power as f64;
    let nm1 = term.n as i32 - 1;
    let q = integrate_with_breaks(
        |r| (r * r + eps * eps).powf(e) * phi.eval(r) * r.powi(nm1),
        0.0,
        phi.radius(),
        &radial_breaks(eps, phi.radius()),
        opts,
    )?;
    Ok(sphere_area(term.n) * term.coeff * eps * eps * q.value)
}

/// `½ B((a+1)/2, b - (a+1)/2) = ∫_0^∞ s^a (1 + s²)^(-b) ds`.
pub fn scaled_integral(a: f64, b: f64) -> f64 {
    let x = (a + 1.0) / 2.0;
    let y = b - x;
    0.5 * (ln_gamma(x) + ln_gamma(y) - ln_gamma(x + y)).exp()
}

/// Lanczos approximation (g = 7, n = 9), relative error below 1e-14 for x > 0.
fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Leading small-ε behaviour `ε^rate · coeff · σ φ(0) · ∫ s^(n-1) (1+s²)^(q·power) ds`.
pub fn error_term_asymptote(term: &ErrorTerm, phi: &RadialTestFn, eps: f64) -> f64 {
    let rate = 2.0 + 2.0 * term.q * term.power as f64 + term.n as f64;
    let integral = scaled_integral(term.n as f64 - 1.0, -term.q * term.power as f64);
    eps.powf(rate) * term.coeff * sphere_area(term.n) * phi.eval(0.0) * integral
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub example: String,
    pub eps: Vec<f64>,
    pub values: Vec<f64>,
    /// Fitted decay exponent `s` in `|pairing| ~ ε^s`.
    pub exponent: Option<LineFit>,
    pub weak_asymptotic: bool,
}

pub fn weak_asymptotic_residual_term(
    label: &str,
    term: &ErrorTerm,
    phi: &RadialTestFn,
    eps_list: &[f64],
) -> Result<ResidualReport> {
    check_eps_list(eps_list)?;
    let opts = sweep_opts();
    let values = eps_list
        .par_iter()
        .map(|&e| pair_error_term(term, phi, e, &opts))
        .collect::<Result<Vec<_>>>()?;
    let (exponent, ok) = if values.iter().all(|v| *v == 0.0) {
        (None, true)
    } else {
        let f = crate::fit::fit_power_law(eps_list, &values)?;
        let ok = f.slope > 0.0 && values.last().unwrap().abs() < values[0].abs();
        (Some(f), ok)
    };
    Ok(ResidualReport {
        example: label.to_string(),
        eps: eps_list.to_vec(),
        values,
        exponent,
        weak_asymptotic: ok,
    })
}

pub fn weak_asymptotic_residual(
    example: WeakAsymExample,
    phi: &RadialTestFn,
    eps_list: &[f64],
) -> Result<ResidualReport> {
    weak_asymptotic_residual_term(example.id(), &example.error_term(), phi, eps_list)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpRow {
    pub eps: f64,
    pub m: u32,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpTable {
    pub example: String,
    pub rows: Vec<LpRow>,
    pub tolerance: f64,
    /// Per power `m`: strictly decreasing along ε and below tolerance at the
    /// smallest ε.
    pub verdicts: Vec<(u32, bool)>,
}

/// `σ_{n-1} ∫ |f_ε(r) - f(r)| φ(r) r^(n-1) dr` where `f(r) ~ r^μ` at the
/// origin, with the substitution `r = s^(2/a)`, `a = μ + n`.
pub fn radial_l1_distance(
    n: u32,
    mu: f64,
    approx: impl Fn(f64) -> f64,
    limit: impl Fn(f64) -> f64,
    phi: &RadialTestFn,
    eps: f64,
    opts: &QuadOptions,
) -> Result<f64> {
    let a = mu + n as f64;
    if a <= 0.0 {
        return Err(Error::IntegrabilityViolation {
            lambda: mu,
            n,
            reason: "limit is not locally integrable".into(),
        });
    }
    let e = 2.0 / a;
    let top = phi.radius().powf(a / 2.0);
    let breaks: Vec<f64> = radial_breaks(eps, phi.radius())
        .into_iter()
        .map(|r| r.powf(a / 2.0))
        .collect();
    let nm1 = n as i32 - 1;
    let q = integrate_with_breaks(
        |s| {
            if s == 0.0 {
                return 0.0;
            }
            let r = s.powf(e);
            let jac = e * s.powf(e - 1.0);
            (approx(r) - limit(r)).abs() * phi.eval(r) * r.powi(nm1) * jac
        },
        0.0,
        top,
        &breaks,
        opts,
    )?;
    Ok(sphere_area(n) * q.value)
}

/// `∫ |u_ε^m - u^m| φ` for `m ∈ {1, p}` with `u_ε = (r² + ε²)^(λ/2)`, `u = r^λ`.
pub fn lp_convergence(
    example: StationaryExample,
    phi: &RadialTestFn,
    eps_list: &[f64],
    tolerance: f64,
) -> Result<LpTable> {
    check_eps_list(eps_list)?;
    let (n, lambda, p) = (example.n(), example.lambda(), example.p());
    let opts = sweep_opts();
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    for m in [1, p] {
        let mf = m as f64;
        let ds = eps_list
            .par_iter()
            .map(|&eps| {
                radial_l1_distance(
                    n,
                    lambda * mf,
                    |r| (r * r + eps * eps).powf(0.5 * lambda * mf),
                    |r| r.powf(lambda * mf),
                    phi,
                    eps,
                    &opts,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let decreasing = ds.windows(2).all(|w| w[1] < w[0]);
        verdicts.push((m, decreasing && *ds.last().unwrap() < tolerance));
        rows.extend(
            eps_list
                .iter()
                .zip(ds)
                .map(|(&eps, distance)| LpRow { eps, m, distance }),
        );
    }
    Ok(LpTable {
        example: example.id().to_string(),
        rows,
        tolerance,
        verdicts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRow {
    pub term: String,
    pub eps: f64,
    pub value: f64,
    pub limit: f64,
}

/// Pairings of each term of the regularized equation against the matching
/// term of the limit equation: `⟨u_ε, Δφ⟩ → ⟨u, Δφ⟩`,
/// `⟨c u_ε^p, φ⟩ → ⟨c u^p, φ⟩`, error term → 0.
pub fn term_consistency(
    example: WeakAsymExample,
    phi: &RadialTestFn,
    eps_list: &[f64],
) -> Result<Vec<TermRow>> {
    check_eps_list(eps_list)?;
    let st = example.stationary();
    let (n, lambda, p, c) = (st.n(), st.lambda(), st.p() as f64, st.coeff());
    let opts = sweep_opts();
    let lap_limit = crate::pseudofun::pair_with_laplacian(lambda, n, phi, &opts)?.value;
    let pow_limit = c * crate::pseudofun::pair_radial(lambda * p, n, phi, &opts)?.value;
    let nm1 = n as f64 - 1.0;
    let mut rows = Vec::new();
    for &eps in eps_list {
        let breaks = radial_breaks(eps, phi.radius());
        let lap = integrate_with_breaks(
            |r| {
                let [_, d1, d2] = phi.values(r);
                (r * r + eps * eps).powf(0.5 * lambda) * (r * d2 + nm1 * d1) * r.powf(nm1 - 1.0)
            },
            0.0,
            phi.radius(),
            &breaks,
            &opts,
        )?
        .value
            * sphere_area(n);
        let pow = c
            * sphere_area(n)
            * integrate_with_breaks(
                |r| (r * r + eps * eps).powf(0.5 * lambda * p) * phi.eval(r) * r.powf(nm1),
                0.0,
                phi.radius(),
                &breaks,
                &opts,
            )?
            .value;
        let err = pair_error_term(&example.error_term(), phi, eps, &opts)?;
        rows.push(TermRow {
            term: "laplacian".into(),
            eps,
            value: lap,
            limit: lap_limit,
        });
        rows.push(TermRow {
            term: "power".into(),
            eps,
            value: pow,
            limit: pow_limit,
        });
        rows.push(TermRow {
            term: "error".into(),
            eps,
            value: err,
            limit: 0.0,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub v_squared: PairingSweep,
    pub w_squared: PairingSweep,
    pub cross: PairingSweep,
    /// `⟨-πδ', φ⟩ = π φ'(0)`.
    pub cross_target: f64,
}

/// Pairings of `v_ε²`, `w_ε²` and `-2 v_ε w_ε` where
/// `1/(x + iε) = v_ε + i w_ε`.
pub fn split_real_imag_limits(eps_list: &[f64], phi: &TestFn) -> Result<SplitReport> {
    check_eps_list(eps_list)?;
    let opts = sweep_opts();
    let run = |f: &(dyn Fn(f64, f64) -> f64 + Sync)| -> Result<PairingSweep> {
        let values = eps_list
            .par_iter()
            .map(|&e| peaked_pairing(|x| Complex64::new(f(x, e), 0.0), phi, e, &opts))
            .collect::<Result<Vec<_>>>()?;
        sweep_from_values(eps_list.to_vec(), values)
    };
    let v = |x: f64, e: f64| x / (x * x + e * e);
    let w = |x: f64, e: f64| -e / (x * x + e * e);
    Ok(SplitReport {
        v_squared: run(&|x, e| v(x, e).powi(2))?,
        w_squared: run(&|x, e| w(x, e).powi(2))?,
        cross: run(&|x, e| -2.0 * v(x, e) * w(x, e))?,
        cross_target: PI * phi.derivative(0.0, 1),
    })
}

/// Exact `χ^(k)(0)` as a float (for reports).
pub fn chi_derivative_at_zero_f64(table: &PkTable, k: usize) -> f64 {
    table.chi_derivative_at_zero(k).to_f64().unwrap_or(f64::NAN)
}
