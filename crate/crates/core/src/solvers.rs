//! Model evolutions: characteristics with blow-up detection for
//! `(1/c)u_t + u_x = f(x, u)`, and leapfrog for
//! `(1/c²)u_tt - u_xx + g(x, u) = 0` with an energy monitor.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{int, rat, rational_to_f64, Rational};

/// Polynomial `Σ a_ij x^i u^j` with rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly2 {
    terms: BTreeMap<(u32, u32), Rational>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(coeff: Rational, x_pow: u32, u_pow: u32) -> Self {
        let mut p = Self::zero();
        p.add_term(x_pow, u_pow, coeff);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Rational, u32, u32)>) -> Self {
        let mut p = Self::zero();
        for (c, i, j) in terms {
            p.add_term(i, j, c);
        }
        p
    }

    fn add_term(&mut self, i: u32, j: u32, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry((i, j)).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    pub fn terms(&self) -> &BTreeMap<(u32, u32), Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn u_degree(&self) -> u32 {
        self.terms.keys().map(|k| k.1).max().unwrap_or(0)
    }

    pub fn x_degree(&self) -> u32 {
        self.terms.keys().map(|k| k.0).max().unwrap_or(0)
    }

    pub fn eval(&self, x: f64, u: f64) -> f64 {
        self.terms
            .iter()
            .map(|((i, j), c)| rational_to_f64(c) * x.powi(*i as i32) * u.powi(*j as i32))
            .sum()
    }

    pub fn eval_complex(&self, x: f64, u: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|((i, j), c)| u.powu(*j) * (rational_to_f64(c) * x.powi(*i as i32)))
            .sum()
    }

    /// `∂/∂u`.
    pub fn d_du(&self) -> Self {
        let mut p = Self::zero();
        for ((i, j), c) in &self.terms {
            if *j > 0 {
                p.add_term(*i, j - 1, c * int(*j as i64));
            }
        }
        p
    }

    /// Antiderivative in `u` vanishing at `u = 0`.
    pub fn integrate_u(&self) -> Self {
        let mut p = Self::zero();
        for ((i, j), c) in &self.terms {
            p.add_term(*i, j + 1, c / int(*j as i64 + 1));
        }
        p
    }

    pub fn scale(&self, s: &Rational) -> Self {
        let mut p = Self::zero();
        for ((i, j), c) in &self.terms {
            p.add_term(*i, *j, c * s);
        }
        p
    }
}

impl fmt::Display for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((i, j), c)| {
                let mut s = format!("({c})");
                if *i > 0 {
                    s.push_str(&format!("*x^{i}"));
                }
                if *j > 0 {
                    s.push_str(&format!("*u^{j}"));
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReactionId {
    /// `f = -u²`
    Riccati,
    /// `f = -x u³`
    CubicX,
    /// `f = -(2/p) x u^(p+1)`
    PowerP(u32),
    Custom,
}

/// Right-hand side of `(1/c)u_t + u_x = f(x, u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionSpec {
    pub id: ReactionId,
    pub c: f64,
    pub f: Poly2,
}

impl ReactionSpec {
    fn checked(id: ReactionId, c: f64, f: Poly2) -> Result<Self> {
        if c == 0.0 || !c.is_finite() {
            return Err(Error::InvalidInput("speed c must be a nonzero real".into()));
        }
        Ok(Self { id, c, f })
    }

    pub fn riccati(c: f64) -> Result<Self> {
        Self::checked(ReactionId::Riccati, c, Poly2::monomial(int(-1), 0, 2))
    }

    pub fn cubic_x(c: f64) -> Result<Self> {
        Self::checked(ReactionId::CubicX, c, Poly2::monomial(int(-1), 1, 3))
    }

    pub fn power_p(p: u32, c: f64) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidInput("p must be a positive integer".into()));
        }
        Self::checked(
            ReactionId::PowerP(p),
            c,
            Poly2::monomial(rat(-2, p as i64), 1, p + 1),
        )
    }

    pub fn custom(f: Poly2, c: f64) -> Result<Self> {
        Self::checked(ReactionId::Custom, c, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Blowup {
    pub time: f64,
    /// Position `x0 + c t` of the first characteristic to cross the threshold.
    pub location: f64,
    pub foot: f64,
    /// Whether the time was refined by bisection inside the step.
    pub refined: bool,
}

/// Space-time samples. Sample `u[j][i]` sits at `x[i] + frame_speed · t[j]`:
/// Eulerian grids use `frame_speed = 0`, characteristic runs use `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field1D<T> {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    pub u: Vec<Vec<T>>,
    pub frame_speed: f64,
    pub blowup: Option<Blowup>,
    pub energy: Vec<f64>,
}

impl<T: Copy> Field1D<T> {
    pub fn position(&self, i: usize, j: usize) -> f64 {
        self.x[i] + self.frame_speed * self.t[j]
    }

    pub fn last(&self) -> &[T] {
        self.u.last().map(|v| v.as_slice()).unwrap_or(&[])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharConfig {
    pub tau: f64,
    pub t_end: f64,
    /// Blow-up threshold on `|u|`.
    pub threshold: f64,
    /// Keep every `record_every`-th time level (the final level is always kept).
    pub record_every: usize,
}

impl Default for CharConfig {
    fn default() -> Self {
        Self {
            tau: 1e-3,
            t_end: 1.0,
            threshold: 1e6,
            record_every: 1,
        }
    }
}

fn rk4_step(spec: &ReactionSpec, foot: f64, t: f64, u: Complex64, dt: f64) -> Complex64 {
    let c = spec.c;
    let rhs = |s: f64, v: Complex64| spec.f.eval_complex(foot + c * s, v) * c;
    let k1 = rhs(t, u);
    let k2 = rhs(t + 0.5 * dt, u + k1 * (0.5 * dt));
    let k3 = rhs(t + 0.5 * dt, u + k2 * (0.5 * dt));
    let k4 = rhs(t + dt, u + k3 * dt);
    u + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

fn crossed(v: Complex64, threshold: f64) -> bool {
    !v.is_finite() || v.norm() > threshold
}

/// First time in `(t, t + dt]` where `|u|` crosses `threshold`, by bisection
/// on the length of a single RK4 step from `(t, u)`.
fn bisect_crossing(
    spec: &ReactionSpec,
    foot: f64,
    t: f64,
    u: Complex64,
    dt: f64,
    threshold: f64,
) -> Result<f64> {
    let (mut lo, mut hi) = (0.0, dt);
    let target = 1e-12 * (t + dt).abs().max(dt);
    while hi - lo > target {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(Error::StepUnderflow { time: t + mid });
        }
        if crossed(rk4_step(spec, foot, t, u, mid), threshold) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(t + hi)
}

/// Integrate `du/dt = c f(x0 + ct, u)` along each characteristic from the
/// feet `x0 ∈ feet` with classical RK4. The run stops at the first
/// threshold crossing, which is located by in-step bisection.
pub fn solve_characteristics(
    spec: &ReactionSpec,
    u0: impl Fn(f64) -> Complex64 + Sync,
    feet: &[f64],
    cfg: &CharConfig,
) -> Result<Field1D<Complex64>> {
    if !(cfg.tau > 0.0 && cfg.t_end >= 0.0 && cfg.threshold > 0.0 && cfg.record_every > 0) {
        return Err(Error::InvalidInput(
            "need tau > 0, t_end ≥ 0, threshold > 0, record_every ≥ 1".into(),
        ));
    }
    let mut state: Vec<Complex64> = feet.iter().map(|&x| u0(x)).collect();
    if let Some(i) = state.iter().position(|v| crossed(*v, cfg.threshold)) {
        return Err(Error::InvalidInput(format!(
            "initial data exceeds the threshold at x = {}",
            feet[i]
        )));
    }
    let mut field = Field1D {
        x: feet.to_vec(),
        t: vec![0.0],
        u: vec![state.clone()],
        frame_speed: spec.c,
        blowup: None,
        energy: Vec::new(),
    };
    let steps = (cfg.t_end / cfg.tau).ceil() as usize;
    let mut t = 0.0;
    for n in 0..steps {
        let dt = (cfg.t_end - t).min(cfg.tau);
        if dt <= 0.0 {
            break;
        }
        let next: Vec<Complex64> = feet
            .par_iter()
            .zip(state.par_iter())
            .map(|(&x0, &v)| rk4_step(spec, x0, t, v, dt))
            .collect();
        let hits: Vec<usize> = (0..feet.len())
            .filter(|&i| crossed(next[i], cfg.threshold))
            .collect();
        if !hits.is_empty() {
            let mut best: Option<Blowup> = None;
            for i in hits {
                let tb = bisect_crossing(spec, feet[i], t, state[i], dt, cfg.threshold)?;
                if best.map_or(true, |b| tb < b.time) {
                    best = Some(Blowup {
                        time: tb,
                        location: feet[i] + spec.c * tb,
                        foot: feet[i],
                        refined: true,
                    });
                }
            }
            if *field.t.last().unwrap() != t {
                field.t.push(t);
                field.u.push(state.clone());
            }
            field.blowup = best;
            return Ok(field);
        }
        state = next;
        t = if n + 1 == steps {
            cfg.t_end
        } else {
            (n + 1) as f64 * cfg.tau
        };
        if (n + 1) % cfg.record_every == 0 || n + 1 == steps {
            field.t.push(t);
            field.u.push(state.clone());
        }
    }
    Ok(field)
}

/// `u_0(x - ct) / (1 + ct u_0(x - ct))`: the exact Riccati solution from
/// arbitrary data.
pub fn closed_form_riccati_with(
    u0: impl Fn(f64) -> Complex64,
    c: f64,
    x: f64,
    t: f64,
) -> Complex64 {
    let v = u0(x - c * t);
    v / (v * (c * t) + 1.0)
}

/// Riccati solution from `u_0ε = 1/(x + iε)`.
pub fn closed_form_riccati(eps: f64, c: f64, x: f64, t: f64) -> Complex64 {
    closed_form_riccati_with(|y| Complex64::new(y, eps).inv(), c, x, t)
}

/// `v_0(x - ct) / √((x² - (x - ct)²) v_0(x - ct)² + 1)`.
pub fn closed_form_cubic(v0: impl Fn(f64) -> f64, c: f64, x: f64, t: f64) -> Result<f64> {
    let y = x - c * t;
    let v = v0(y);
    let radicand = (x * x - y * y) * v * v + 1.0;
    if !(radicand > 0.0) {
        return Err(Error::DomainError(format!(
            "radicand {radicand} ≤ 0 at x = {x}, t = {t}"
        )));
    }
    Ok(v / radicand.sqrt())
}

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `(1/c²)u_tt - u_xx + g(x, u) = 0` on `[-L, L]`.
#[derive(Clone)]
pub struct WaveConfig {
    pub c: f64,
    pub g: Poly2,
    pub u0: RealFn,
    pub u1: RealFn,
    pub half_width: f64,
    pub h: f64,
    pub tau: f64,
    pub t_end: f64,
    pub record_every: usize,
}

impl fmt::Debug for WaveConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WaveConfig")
            .field("c", &self.c)
            .field("g", &self.g.to_string())
            .field("half_width", &self.half_width)
            .field("h", &self.h)
            .field("tau", &self.tau)
            .field("t_end", &self.t_end)
            .finish()
    }
}

/// Cubic-quintic nonlinearity `u³ + 3x²u⁵`.
pub fn cubic_quintic() -> Poly2 {
    Poly2::from_terms([(int(1), 0, 3), (int(3), 2, 5)])
}

impl WaveConfig {
    /// Stationary run from `(x² + ε²)^(-1/2)` with `g = u³ + 3x²u⁵`.
    pub fn stationary_net(eps: f64, c: f64, half_width: f64, h: f64, cfl: f64, t_end: f64) -> Self {
        Self {
            c,
            g: cubic_quintic(),
            u0: Arc::new(move |x| (x * x + eps * eps).powf(-0.5)),
            u1: Arc::new(|_| 0.0),
            half_width,
            h,
            tau: cfl * h / c,
            t_end,
            record_every: 1,
        }
    }

    pub fn cfl(&self) -> f64 {
        self.c * self.tau / self.h
    }
}

/// Energy weights `∫ a_t u_t²/2 + a_x u_x²/2 + a_V V(x, u)` with `∂V/∂u = g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnergyForm {
    pub kinetic: Rational,
    pub gradient: Rational,
    pub potential: Rational,
}

impl EnergyForm {
    /// `½u_t² + ½c²u_x² + c²V`.
    pub fn derived(c: &Rational) -> Self {
        let c2 = c * c;
        Self {
            kinetic: Rational::one(),
            gradient: c2.clone(),
            potential: c2,
        }
    }

    /// `½u_t² + ½u_x² + V`, without speed weights.
    pub fn unweighted() -> Self {
        Self {
            kinetic: Rational::one(),
            gradient: Rational::one(),
            potential: Rational::one(),
        }
    }

    /// Symbolic `dE/dt` for solutions of `u_tt = c²(u_xx - g)` with `V = ∫g du`.
    ///
    /// Up to a flux, the density derivative is
    /// `u_t (a_t u_tt - a_x u_xx + a_V g)`; substituting the equation leaves
    /// `u_t ((a_t c² - a_x) u_xx + (a_V - a_t c²) g)`, and the form is conserved
    /// iff both coefficients vanish. Returns them.
    pub fn time_derivative_coeffs(&self, c: &Rational) -> (Rational, Rational) {
        let c2 = c * c;
        (
            &self.kinetic * &c2 - &self.gradient,
            &self.potential - &self.kinetic * &c2,
        )
    }

    pub fn is_conserved(&self, c: &Rational, g: &Poly2) -> bool {
        let v = g.integrate_u();
        if v.d_du() != *g {
            return false;
        }
        let (a, b) = self.time_derivative_coeffs(c);
        a.is_zero() && (b.is_zero() || g.is_zero())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// Times `t_{n+1/2}` of the staggered energy samples.
    pub t: Vec<f64>,
    pub energy: Vec<f64>,
    pub max_relative_drift: f64,
}

fn discrete_energy(cfg: &WaveConfig, x: &[f64], v: &Poly2, prev: &[f64], next: &[f64]) -> f64 {
    let (h, tau, c2) = (cfg.h, cfg.tau, cfg.c * cfg.c);
    let n = x.len();
    let mut kin = 0.0;
    let mut pot = 0.0;
    for i in 0..n {
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let ut = (next[i] - prev[i]) / tau;
        kin += w * 0.5 * ut * ut;
        pot += w * 0.5 * (v.eval(x[i], next[i]) + v.eval(x[i], prev[i]));
    }
    let mut grad = 0.0;
    for i in 0..n - 1 {
        grad += 0.5 * (next[i + 1] - next[i]) * (prev[i + 1] - prev[i]) / (h * h);
    }
    h * (kin + c2 * grad + c2 * pot)
}

/// Three-level leapfrog `u^{n+1} = 2u^n - u^{n-1} + τ²c²(D²u^n - g(x, u^n))`
/// with a Taylor first step and Dirichlet data pinned to `u0(±L)`.
pub fn solve_wave_leapfrog(cfg: &WaveConfig) -> Result<(Field1D<f64>, EnergyReport)> {
    if !(cfg.c > 0.0
        && cfg.h > 0.0
        && cfg.tau > 0.0
        && cfg.half_width > 0.0
        && cfg.record_every > 0)
    {
        return Err(Error::InvalidInput("c, h, tau, L must be positive".into()));
    }
    if cfg.cfl() > 0.9 + 1e-12 {
        return Err(Error::InvalidInput(format!(
            "CFL number {} exceeds 0.9",
            cfg.cfl()
        )));
    }
    let cells = (2.0 * cfg.half_width / cfg.h).round() as usize;
    if cells < 2 {
        return Err(Error::InvalidInput("grid has fewer than two cells".into()));
    }
    let x: Vec<f64> = (0..=cells)
        .map(|i| -cfg.half_width + i as f64 * cfg.h)
        .collect();
    let n = x.len();
    let (c2, tau, h) = (cfg.c * cfg.c, cfg.tau, cfg.h);
    let lam = c2 * tau * tau;
    let v = cfg.g.integrate_u();

    let u0: Vec<f64> = x.iter().map(|&p| (cfg.u0)(p)).collect();
    let u1: Vec<f64> = x.iter().map(|&p| (cfg.u1)(p)).collect();
    if let Some(bad) = u0.iter().chain(&u1).find(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "initial data not finite: {bad}"
        )));
    }
    let accel =
        |u: &[f64], i: usize| (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h) - cfg.g.eval(x[i], u[i]);

    let mut prev = u0.clone();
    let mut cur = u0.clone();
    for i in 1..n - 1 {
        cur[i] = u0[i] + tau * u1[i] + 0.5 * lam * accel(&u0, i);
    }

    let mut field = Field1D {
        x: x.clone(),
        t: vec![0.0],
        u: vec![u0.clone()],
        frame_speed: 0.0,
        blowup: None,
        energy: Vec::new(),
    };
    let mut report = EnergyReport {
        t: vec![0.5 * tau],
        energy: vec![discrete_energy(cfg, &x, &v, &prev, &cur)],
        max_relative_drift: 0.0,
    };
    let steps = (cfg.t_end / tau).round() as usize;
    if steps >= 1 && (1 % cfg.record_every == 0 || steps == 1) {
        field.t.push(tau);
        field.u.push(cur.clone());
    }
    let mut next = cur.clone();
    for step in 2..=steps {
        for i in 1..n - 1 {
            next[i] = 2.0 * cur[i] - prev[i] + lam * accel(&cur, i);
        }
        next[0] = u0[0];
        next[n - 1] = u0[n - 1];
        let t = step as f64 * tau;
        if let Some(i) = next.iter().position(|v| !v.is_finite() || v.abs() > 1e12) {
            return Err(Error::Instability {
                magnitude: next[i].abs(),
                time: t,
                x: x[i],
            });
        }
        report.t.push(t - 0.5 * tau);
        report
            .energy
            .push(discrete_energy(cfg, &x, &v, &cur, &next));
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
        if step % cfg.record_every == 0 || step == steps {
            field.t.push(t);
            field.u.push(cur.clone());
        }
    }
    let e0 = report.energy[0];
    report.max_relative_drift = if e0 != 0.0 {
        report
            .energy
            .iter()
            .map(|e| (e - e0).abs() / e0.abs())
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    field.energy = report.energy.clone();
    Ok((field, report))
}

/// Sup-norm distance of the last level from the first.
pub fn max_deviation(field: &Field1D<f64>) -> f64 {
    let first = &field.u[0];
    field
        .u
        .iter()
        .flat_map(|row| row.iter().zip(first).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}
