//! One function per subcommand. Each returns its JSON result, an optional
//! CSV table and plot, human-readable lines, and the checks evaluated in
//! assertion mode.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use anomalab_core::dist_core::{collect_fourier, conv_fourier_sums, fourier, mul, pair, DistExpr};
use anomalab_core::exact::{parse_ratio, PiPoly, Rational};
use anomalab_core::experiments::{
    anomalous_speed_family, anomaly_study, blowup_study, identity_checks, model_product_study,
    stationary_nonlinearity,
};
use anomalab_core::netlab::{
    classify, g_singular_support, lp_convergence, pairing_sweep, weak_asymptotic_residual, EpsNet,
    GrowthOptions, NetKind, Region, SweepVerdict, WeakAsymExample,
};
use anomalab_core::pseudofun::{
    nemytskii_power, stationary_wave_residual_with_coeff, weak_laplacian_residual, StationaryExample,
};
use anomalab_core::quad::QuadOptions;
use anomalab_core::regularize::{analytic_pairing, friedrichs_u0, richardson, Mollifier};
use anomalab_core::singpred::{build_forecast, hausdorff_points_intervals, CharacteristicFan, ForecastDomain};
use anomalab_core::solvers::{
    cubic_quintic, max_deviation, solve_characteristics, solve_wave_leapfrog, CharConfig, Poly2,
    ReactionSpec, WaveConfig,
};
use anomalab_core::testfn::{RadialTestFn, TestFn};

use crate::config::*;
use crate::error::CliError;
use crate::output::{Cell, Table};
use crate::plot::{Plot, Series};

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub result: Value,
    pub table: Option<Table>,
    pub plot: Option<Plot>,
    pub text: Vec<String>,
    pub checks: Vec<Check>,
}

/// Settings read from the environment.
#[derive(Debug, Clone, Copy)]
pub struct Context {
    pub quad: QuadOptions,
}

impl Context {
    /// `ANOMALAB_QUAD_TOL` replaces both quadrature tolerances.
    pub fn from_env() -> Result<Self> {
        let mut quad = QuadOptions::default();
        if let Ok(v) = std::env::var("ANOMALAB_QUAD_TOL") {
            let tol: f64 = v
                .trim()
                .parse()
                .ok()
                .filter(|t: &f64| *t > 0.0 && t.is_finite())
                .ok_or_else(|| CliError::Validation(format!("ANOMALAB_QUAD_TOL=`{v}` is not a positive number")))?;
            quad.abs_tol = tol;
            quad.rel_tol = tol;
        }
        Ok(Self { quad })
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serializes")
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

pub fn test_function(name: &str) -> Result<TestFn> {
    match name {
        "bump" => Ok(TestFn::bump()),
        "bump_normalized" => Ok(TestFn::normalized_bump()),
        "bump_unit" => Ok(TestFn::unit_bump()),
        _ => match name.strip_prefix("poly_cutoff_").and_then(|m| m.parse::<u32>().ok()) {
            Some(m) if m >= 1 => Ok(TestFn::polynomial_cutoff(m)),
            _ => Err(invalid(format!(
                "unknown test function `{name}` (bump, bump_normalized, bump_unit, poly_cutoff_<m>)"
            ))),
        },
    }
}

pub fn run(task: &Task, ctx: &Context) -> Result<Outcome> {
    match task {
        Task::Identities(p) => identities(p),
        Task::Fourier(p) => fourier_cmd(p),
        Task::Pair(p) => pair_cmd(p, ctx),
        Task::Blowup(p) => blowup(p),
        Task::Evolve(p) => evolve(p),
        Task::Wave(p) => wave(p),
        Task::Pseudofun(p) => pseudofun(p),
        Task::Weakasym(p) => weakasym(p),
        Task::Growth(p) => growth(p),
        Task::Forecast(p) => forecast(p),
        Task::Report(p) => crate::report::report(p, ctx),
    }
}

fn identities(p: &IdentitiesParams) -> Result<Outcome> {
    let mut out = Outcome::default();
    if p.check == "speed-family" {
        let rows = anomalous_speed_family(p.count, p.seed)?;
        let mut table = Table::new(&["a", "b", "c", "on_family", "residual_zero", "residual"]);
        for r in &rows {
            table.push(vec![
                r.a.clone().into(),
                r.b.clone().into(),
                r.c.clone().into(),
                r.on_family.into(),
                r.residual_zero.into(),
                r.residual.clone().into(),
            ]);
            out.text.push(format!(
                "a={} b={} c={}: residual {} ({}) {}",
                r.a,
                r.b,
                r.c,
                if r.residual_zero { "0".to_string() } else { r.residual.clone() },
                if r.on_family { "a+b=1" } else { "a+b!=1" },
                if r.consistent() { "PASS" } else { "FAIL" }
            ));
        }
        let on = rows.iter().filter(|r| r.on_family).count();
        let off = rows.len() - on;
        out.checks.push(Check::new(
            "residual vanishes exactly iff a + b = 1",
            rows.iter().all(|r| r.consistent()) && on == p.count && off > 0,
            format!("{on} triples on the family, {off} off"),
        ));
        out.result = json!({ "rows": to_value(&rows) });
        out.table = Some(table);
        return Ok(out);
    }
    let checks = identity_checks(&p.check, p.k_max)?;
    let mut table = Table::new(&["id", "statement", "exact"]);
    for c in &checks {
        table.push(vec![c.id.clone().into(), c.statement.clone().into(), c.exact.into()]);
        out.text.push(c.line());
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.exact).map(|c| c.id.as_str()).collect();
    out.checks.push(Check::new(
        "identities hold with exact coefficients",
        failed.is_empty(),
        format!("{} checks, failed: {failed:?}", checks.len()),
    ));
    out.result = json!({ "checks": to_value(&checks) });
    out.table = Some(table);
    Ok(out)
}

fn fmt_collected(m: &std::collections::BTreeMap<u32, PiPoly>) -> String {
    if m.is_empty() {
        return "0".into();
    }
    m.iter()
        .map(|(k, c)| format!("({c})·ξ^{k}·H(ξ)"))
        .collect::<Vec<_>>()
        .join(" + ")
}

fn fourier_cmd(p: &FourierParams) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut table = Table::new(&["k", "transform"]);
    let mut transforms = Vec::new();
    for &k in &p.k {
        if k == 0 {
            return Err(invalid("orders k start at 1"));
        }
        let f = collect_fourier(&fourier(&DistExpr::basis(k))?);
        let s = fmt_collected(&f);
        out.text.push(format!("F[e{k}](ξ) = {s}"));
        table.push(vec![k.into(), s.clone().into()]);
        transforms.push(json!({ "k": k, "transform": s }));
    }
    let mut conv = Value::Null;
    if let Some(jk) = &p.conv {
        let [j, k] = jk[..] else {
            return Err(invalid("--conv takes exactly two orders j,k"));
        };
        if j == 0 || k == 0 {
            return Err(invalid("orders start at 1"));
        }
        let e = DistExpr::basis;
        let lhs = collect_fourier(&fourier(&mul(&e(j), &e(k))?)?);
        let rhs = collect_fourier(&conv_fourier_sums(&fourier(&e(j))?, &fourier(&e(k))?));
        let ok = lhs == rhs;
        out.text.push(format!(
            "F(e{j} e{k}) == F(e{j}) * F(e{k}) : EXACT {}",
            if ok { "PASS" } else { "FAIL" }
        ));
        out.checks.push(Check::new(
            format!("F(e{j} e{k}) == F(e{j}) * F(e{k})"),
            ok,
            format!("{} vs {}", fmt_collected(&lhs), fmt_collected(&rhs)),
        ));
        conv = json!({ "j": j, "k": k, "product": fmt_collected(&lhs), "convolution": fmt_collected(&rhs), "equal": ok });
    }
    out.result = json!({ "transforms": transforms, "convolution": conv });
    out.table = Some(table);
    Ok(out)
}

fn c64(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn pair_cmd(p: &PairParams, ctx: &Context) -> Result<Outcome> {
    let phi = test_function(&p.test)?;
    match p.mode.as_str() {
        "exact" => pair_exact(p, &phi, ctx),
        "trichotomy" => pair_trichotomy(p, &phi),
        "model-product" => pair_model_product(p, &phi),
        other => Err(invalid(format!("unknown pair mode `{other}` (exact, trichotomy, model-product)"))),
    }
}

fn pair_exact(p: &PairParams, phi: &TestFn, ctx: &Context) -> Result<Outcome> {
    if p.k == 0 {
        return Err(invalid("k starts at 1"));
    }
    let mut out = Outcome::default();
    let exact = pair(&DistExpr::basis(p.k), phi, &ctx.quad)?;
    out.text.push(format!("<e{}, {}> = {:.16e} + {:.16e} i", p.k, phi.name(), exact.re, exact.im));
    let mut table = Table::new(&["eps", "re", "im", "richardson_re", "richardson_im", "abs_error"]);
    table.push(vec![0.0.into(), exact.re.into(), exact.im.into(), Cell::Empty, Cell::Empty, 0.0.into()]);
    let mut rows = Vec::new();
    for &eps in &p.analytic_eps {
        let a = analytic_pairing(p.k, phi, eps, &ctx.quad)?;
        let r = richardson(a, analytic_pairing(p.k, phi, eps / 2.0, &ctx.quad)?);
        table.push(vec![
            eps.into(),
            a.re.into(),
            a.im.into(),
            r.re.into(),
            r.im.into(),
            (r - exact).norm().into(),
        ]);
        rows.push(json!({ "eps": eps, "value": c64(a), "richardson": c64(r), "abs_error": (r - exact).norm() }));
    }
    out.result = json!({ "k": p.k, "test": phi.name(), "exact": c64(exact), "analytic": rows });
    out.table = Some(table);
    Ok(out)
}

fn pair_trichotomy(p: &PairParams, phi: &TestFn) -> Result<Outcome> {
    let eps = parse_eps_list(&p.eps_sweep)?;
    let mut out = Outcome::default();
    let mut table = Table::new(&["p", "eps", "re", "im"]);
    let mut series = Vec::new();
    let mut sweeps = Vec::new();
    for pp in 1..=3u32 {
        let s = pairing_sweep(&EpsNet::chi(pp, eps.clone())?, phi)?;
        for (e, v) in s.eps.iter().zip(&s.values) {
            table.push(vec![pp.into(), (*e).into(), v.re.into(), v.im.into()]);
        }
        series.push(Series::new(
            format!("p={pp}"),
            s.eps.iter().zip(&s.values).map(|(e, v)| (*e, v.norm())).collect(),
        ));
        out.text.push(format!("p={pp}: {} {:?}", s.verdict.label(), s.verdict));
        sweeps.push(json!({ "p": pp, "sweep": to_value(&s) }));
        let (name, ok) = match (pp, s.verdict) {
            (1, SweepVerdict::PowerDivergent { rho }) => ("p=1 power-divergent with rho = 1 ± 0.05", (rho - 1.0).abs() <= 0.05),
            (2, SweepVerdict::LogDivergent { r_squared, .. }) => ("p=2 log-divergent with R^2 >= 0.99", r_squared >= 0.99),
            (3, SweepVerdict::Convergent { .. }) => ("p=3 convergent", true),
            (1, _) => ("p=1 power-divergent with rho = 1 ± 0.05", false),
            (2, _) => ("p=2 log-divergent with R^2 >= 0.99", false),
            _ => ("p=3 convergent", false),
        };
        out.checks.push(Check::new(name, ok, s.verdict.label()));
    }
    out.result = json!({ "test": phi.name(), "sweeps": sweeps });
    out.table = Some(table);
    out.plot = Some(Plot {
        title: format!("|<chi_p,ε, {}>|", phi.name()),
        x_label: "ε".into(),
        y_label: "|pairing|".into(),
        log_x: true,
        log_y: true,
        series,
    });
    Ok(out)
}

fn pair_model_product(p: &PairParams, phi: &TestFn) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut table = Table::new(&["mollifier", "part", "eps", "re", "im", "relative_error"]);
    let mut series = Vec::new();
    let mut studies = Vec::new();
    for name in &p.mollifiers {
        let m = Mollifier::by_name(name)?;
        let st = model_product_study(&m, phi, &p.product_eps)?;
        for (part, rows) in [("full", &st.full), ("vp_only", &st.vp_only)] {
            for r in rows {
                table.push(vec![
                    name.clone().into(),
                    part.into(),
                    r.eps.into(),
                    r.value.re.into(),
                    r.value.im.into(),
                    r.relative_error.into(),
                ]);
            }
            series.push(Series::new(
                format!("{name} {part}"),
                rows.iter().map(|r| (r.eps, r.value.norm())).collect(),
            ));
        }
        let rel = st.full.last().map_or(f64::NAN, |r| r.relative_error);
        out.text.push(format!(
            "{name}: relative error at ε={:e}: {rel:.3e}; vp-only divergence rate {:.4}",
            p.product_eps.last().copied().unwrap_or(f64::NAN),
            st.vp_rho
        ));
        out.checks.push(Check::new(
            format!("{name}: full square within 2% of pair(e2, φ)"),
            rel <= 0.02,
            format!("{rel:.3e}"),
        ));
        out.checks.push(Check::new(
            format!("{name}: vp-only square diverges with rho = 1 ± 0.1"),
            (st.vp_rho - 1.0).abs() <= 0.1,
            format!("{:.4}", st.vp_rho),
        ));
        studies.push(to_value(&st));
    }
    out.result = json!({ "test": phi.name(), "studies": studies });
    out.table = Some(table);
    out.plot = Some(Plot {
        title: "mollified squares of 1/(x + i0)".into(),
        x_label: "ε".into(),
        y_label: "|pairing|".into(),
        log_x: true,
        log_y: true,
        series,
    });
    Ok(out)
}

fn blowup(p: &BlowupParams) -> Result<Outcome> {
    let m = Mollifier::by_name(&p.mollifier)?;
    let eps = parse_eps_list(&p.eps_sweep)?;
    let st = blowup_study(&m, p.c, &eps, p.t_end)?;
    let slope = st.slope.map(|f| f.slope);
    let mut out = Outcome::default();
    let mut table = Table::new(&["eps", "t_measured", "t_pred", "ratio", "location", "fitted_slope"]);
    for r in &st.rows {
        table.push(vec![
            r.eps.into(),
            r.t_measured.into(),
            r.t_pred.into(),
            r.t_measured.map(|t| t / r.t_pred).into(),
            r.location.into(),
            slope.into(),
        ]);
    }
    out.text.push(format!(
        "C_phi = {:.16e}; fitted slope {}; max t/t_pred = {:.6}",
        st.c_phi,
        slope.map_or("n/a".into(), |s| format!("{s:.6}")),
        st.max_ratio
    ));
    out.checks.push(Check::new(
        "blow-up time slope 1 ± 0.05 in ε",
        slope.is_some_and(|s| (s - 1.0).abs() <= 0.05),
        format!("{slope:?}"),
    ));
    out.checks.push(Check::new(
        "t_measured <= 1.05 t_pred",
        st.max_ratio <= 1.05,
        format!("{:.6}", st.max_ratio),
    ));
    out.plot = Some(Plot {
        title: format!("blow-up time, {} mollifier, c = {}", p.mollifier, p.c),
        x_label: "ε".into(),
        y_label: "t".into(),
        log_x: true,
        log_y: true,
        series: vec![
            Series::new("measured", st.rows.iter().filter_map(|r| r.t_measured.map(|t| (r.eps, t))).collect()),
            Series::new("ε/(c C_phi)", st.rows.iter().map(|r| (r.eps, r.t_pred)).collect()),
        ],
    });
    out.result = to_value(&st);
    out.table = Some(table);
    Ok(out)
}

fn reaction(name: &str, c: f64) -> Result<ReactionSpec> {
    Ok(match name {
        "riccati" => ReactionSpec::riccati(c)?,
        "cubic_x" => ReactionSpec::cubic_x(c)?,
        _ => match name.strip_prefix("power_").and_then(|p| p.parse::<u32>().ok()) {
            Some(p) => ReactionSpec::power_p(p, c)?,
            None => return Err(invalid(format!("unknown reaction `{name}` (riccati, cubic_x, power_<p>)"))),
        },
    })
}

fn evolve(p: &EvolveParams) -> Result<Outcome> {
    let spec = reaction(&p.reaction, p.c)?;
    if !(p.eps > 0.0) || p.nx < 2 || !(p.x_min < p.x_max) {
        return Err(invalid("need eps > 0, nx >= 2 and x_min < x_max"));
    }
    let feet: Vec<f64> = (0..p.nx)
        .map(|i| p.x_min + (p.x_max - p.x_min) * i as f64 / (p.nx - 1) as f64)
        .collect();
    let cfg = CharConfig {
        tau: p.tau,
        t_end: p.t_end,
        threshold: 1e6,
        record_every: 1,
    };
    let eps = p.eps;
    let field = match p.data.as_str() {
        "analytic" => solve_characteristics(&spec, |x| Complex64::new(x, eps).inv(), &feet, &cfg)?,
        "friedrichs" => {
            let m = Mollifier::by_name(&p.mollifier)?;
            solve_characteristics(
                &spec,
                |x| friedrichs_u0(&m, eps, x).unwrap_or(Complex64::new(f64::NAN, 0.0)),
                &feet,
                &cfg,
            )?
        }
        other => return Err(invalid(format!("unknown data `{other}` (analytic, friedrichs)"))),
    };
    let mut out = Outcome::default();
    // u = 1/(x + iε) is stationary for the Riccati flow.
    let stationary = p.reaction == "riccati" && p.data == "analytic";
    let sup_error = stationary.then(|| {
        let mut err: f64 = 0.0;
        for (j, row) in field.u.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                err = err.max((v - Complex64::new(field.position(i, j), eps).inv()).norm());
            }
        }
        err
    });
    let j = field.t.len() - 1;
    let t_final = field.t[j];
    let mut table = Table::new(&["x", "re", "im"]);
    let last = field.last();
    for (i, v) in last.iter().enumerate() {
        table.push(vec![field.position(i, j).into(), v.re.into(), v.im.into()]);
    }
    match field.blowup {
        Some(b) => out.text.push(format!("blow-up at t = {:.16e}, x = {:.16e}", b.time, b.location)),
        None => out.text.push(format!("reached t = {t_final:.16e} without blow-up")),
    }
    if let Some(e) = sup_error {
        out.text.push(format!("sup |u - 1/(x + iε)| over all levels = {e:.3e}"));
        out.checks.push(Check::new(
            "stationary solution reproduced to 1e-8",
            e <= 1e-8 && field.blowup.is_none() && (t_final - p.t_end).abs() < 1e-9,
            format!("{e:.3e}"),
        ));
    }
    out.plot = Some(Plot {
        title: format!("|u| at t = {t_final:.4}"),
        x_label: "x".into(),
        y_label: "|u|".into(),
        log_x: false,
        log_y: true,
        series: vec![Series::new(
            "|u|",
            last.iter().enumerate().map(|(i, v)| (field.position(i, j), v.norm())).collect(),
        )],
    });
    out.result = json!({
        "t_final": t_final,
        "levels": field.t.len(),
        "blowup": to_value(&field.blowup),
        "stationary_sup_error": sup_error,
        "final": {
            "x": (0..last.len()).map(|i| field.position(i, j)).collect::<Vec<_>>(),
            "re": last.iter().map(|v| v.re).collect::<Vec<_>>(),
            "im": last.iter().map(|v| v.im).collect::<Vec<_>>(),
        },
    });
    out.table = Some(table);
    Ok(out)
}

pub fn parse_nonlinearity(s: &str) -> Result<Poly2> {
    match s {
        "given" => return Ok(cubic_quintic()),
        "balanced" => return Ok(stationary_nonlinearity()),
        _ => {}
    }
    let mut terms = Vec::new();
    for term in s.split(',') {
        let parts: Vec<&str> = term.split(':').collect();
        let [c, i, j] = parts[..] else {
            return Err(invalid(format!("nonlinearity term `{term}`: expected coef:xpow:upow")));
        };
        let c: Rational = parse_ratio(c)?;
        let i: u32 = i.trim().parse().map_err(|_| invalid(format!("x power in `{term}`")))?;
        let j: u32 = j.trim().parse().map_err(|_| invalid(format!("u power in `{term}`")))?;
        terms.push((c, i, j));
    }
    Ok(Poly2::from_terms(terms))
}

fn wave(p: &WaveParams) -> Result<Outcome> {
    let g = parse_nonlinearity(&p.g)?;
    let mut out = Outcome::default();
    let mut runs = Vec::new();
    let mut series = Vec::new();
    let mut table = Table::new(&["h", "tau", "steps", "sup_deviation", "u0_sup", "relative_deviation", "energy_drift"]);
    for h in [p.h, p.h / 2.0] {
        let mut cfg = WaveConfig::stationary_net(p.eps, p.c, p.half_width, h, p.cfl, p.t_end);
        cfg.g = g.clone();
        cfg.record_every = 10;
        let (eps, a) = (p.eps, p.amplitude);
        cfg.u0 = Arc::new(move |x| a * (x * x + eps * eps).powf(-0.5));
        let (field, energy) = solve_wave_leapfrog(&cfg)?;
        let dev = max_deviation(&field);
        let u0_sup = field.u[0].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let steps = (p.t_end / cfg.tau).round() as usize;
        table.push(vec![
            h.into(),
            cfg.tau.into(),
            steps.into(),
            dev.into(),
            u0_sup.into(),
            (dev / u0_sup).into(),
            energy.max_relative_drift.into(),
        ]);
        let e0 = energy.energy.first().copied().unwrap_or(0.0);
        series.push(Series::new(
            format!("h = {h:e}"),
            energy
                .t
                .iter()
                .zip(&energy.energy)
                .map(|(t, e)| (*t, if e0 != 0.0 { (e - e0) / e0.abs() } else { e - e0 }))
                .collect(),
        ));
        runs.push(json!({
            "h": h,
            "tau": cfg.tau,
            "steps": steps,
            "sup_deviation": dev,
            "u0_sup": u0_sup,
            "relative_deviation": dev / u0_sup,
            "energy_initial": e0,
            "energy_drift": energy.max_relative_drift,
        }));
    }
    let rel = runs[0]["relative_deviation"].as_f64().unwrap_or(f64::NAN);
    let drift = runs[0]["energy_drift"].as_f64().unwrap_or(f64::NAN);
    let ratio = drift / runs[1]["energy_drift"].as_f64().unwrap_or(f64::NAN);
    out.text.push(format!(
        "g = {g}: sup deviation / |u0| = {rel:.3e}, energy drift = {drift:.3e}, drift ratio h/(h/2) = {ratio:.3}"
    ));
    out.checks.push(Check::new("sup deviation <= 1e-3 |u0|", rel <= 1e-3, format!("{rel:.3e}")));
    out.checks.push(Check::new("energy drift <= 1e-3", drift <= 1e-3, format!("{drift:.3e}")));
    out.checks.push(Check::new("halving h reduces drift by >= 3", ratio >= 3.0, format!("{ratio:.3}")));
    out.result = json!({ "nonlinearity": g.to_string(), "eps": p.eps, "runs": runs, "drift_ratio": ratio });
    out.table = Some(table);
    out.plot = Some(Plot {
        title: format!("relative energy change, g = {g}"),
        x_label: "t".into(),
        y_label: "(E - E0)/|E0|".into(),
        log_x: false,
        log_y: false,
        series,
    });
    Ok(out)
}

fn stationary_examples(id: &str) -> Result<Vec<StationaryExample>> {
    if id == "all" {
        Ok(StationaryExample::all().to_vec())
    } else {
        Ok(vec![StationaryExample::from_id(id)?])
    }
}

fn pseudofun(p: &PseudofunParams) -> Result<Outcome> {
    let profiles = RadialTestFn::standard_family();
    let mut out = Outcome::default();
    let mut table = Table::new(&["example", "residual", "testfn", "value", "quad_error"]);
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    let mut nemytskii = Vec::new();
    for ex in stationary_examples(&p.example)? {
        let coeff = p.coeff.unwrap_or(ex.coeff());
        for phi in &profiles {
            let lap = weak_laplacian_residual(&ex.solution(), phi)?;
            let wave = stationary_wave_residual_with_coeff(ex, phi, coeff)?;
            for (kind, v) in [("laplacian", lap), ("wave", wave)] {
                worst = worst.max(v.value.abs());
                table.push(vec![
                    ex.id().into(),
                    kind.into(),
                    phi.name().into(),
                    v.value.into(),
                    v.quad_error.into(),
                ]);
                rows.push(json!({ "example": ex.id(), "residual": kind, "testfn": phi.name(), "value": v.value, "quad_error": v.quad_error }));
            }
        }
        let nm = nemytskii_power(&ex.solution(), ex.p());
        out.text.push(format!(
            "{}: λ = {}, coefficient {coeff}, u^p ~ r^{} ({})",
            ex.id(),
            ex.lambda(),
            nm.power_lambda,
            if nm.in_lp_loc { "locally integrable" } else { "not locally integrable" }
        ));
        nemytskii.push(json!({ "example": ex.id(), "lambda": ex.lambda(), "coeff": coeff, "power_lambda": nm.power_lambda, "in_lp_loc": nm.in_lp_loc }));
    }
    out.text.push(format!("max |residual| over {} profiles = {worst:.3e}", profiles.len()));
    out.checks.push(Check::new(
        "weak residuals vanish within 1e-7 on >= 5 profiles",
        worst <= 1e-7 && profiles.len() >= 5,
        format!("{worst:.3e}"),
    ));
    out.result = json!({ "rows": rows, "examples": nemytskii, "max_abs_residual": worst });
    out.table = Some(table);
    Ok(out)
}

fn weakasym(p: &WeakasymParams) -> Result<Outcome> {
    let examples = if p.example == "all" {
        WeakAsymExample::all().to_vec()
    } else {
        vec![WeakAsymExample::from_id(&p.example)?]
    };
    let eps = parse_eps_list(&p.eps_sweep)?;
    let l1_eps = parse_eps_list(&p.l1_eps)?;
    let profiles = RadialTestFn::standard_family();
    let mut out = Outcome::default();
    let mut table = Table::new(&["kind", "example", "testfn", "m", "eps", "value"]);
    let mut series = Vec::new();
    let mut reports = Vec::new();
    let mut tables = Vec::new();
    for ex in examples {
        let target = ex.predicted_rate();
        let mut worst: f64 = 0.0;
        let mut all_weak = true;
        for phi in &profiles {
            let rep = weak_asymptotic_residual(ex, phi, &eps)?;
            for (e, v) in rep.eps.iter().zip(&rep.values) {
                table.push(vec!["residual".into(), ex.id().into(), phi.name().into(), Cell::Empty, (*e).into(), (*v).into()]);
            }
            let s = rep.exponent.as_ref().map_or(f64::NAN, |f| f.slope);
            worst = worst.max((s - target).abs());
            all_weak &= rep.weak_asymptotic;
            if phi.name() == profiles[0].name() {
                series.push(Series::new(
                    format!("{} residual", ex.id()),
                    rep.eps.iter().zip(&rep.values).map(|(e, v)| (*e, v.abs())).collect(),
                ));
            }
            reports.push(to_value(&rep));
        }
        if worst.is_nan() {
            worst = f64::INFINITY;
        }
        out.text.push(format!("{}: decay exponents within {worst:.4} of {target}", ex.id()));
        out.checks.push(Check::new(
            format!("{}: error term decays like ε^{target} (± 0.05)", ex.id()),
            worst <= 0.05 && all_weak,
            format!("max |exponent - {target}| = {worst:.4}"),
        ));

        let st = ex.stationary();
        let lp = lp_convergence(st, &profiles[0], &l1_eps, p.l1_tol)?;
        for r in &lp.rows {
            table.push(vec!["l1".into(), st.id().into(), profiles[0].name().into(), r.m.into(), r.eps.into(), r.distance.into()]);
        }
        for (m, ok) in &lp.verdicts {
            let rows: Vec<_> = lp.rows.iter().filter(|r| r.m == *m).collect();
            let last = rows.last().map_or(f64::NAN, |r| r.distance);
            series.push(Series::new(format!("{} L1 m={m}", st.id()), rows.iter().map(|r| (r.eps, r.distance)).collect()));
            out.text.push(format!("{} m={m}: L1 distance {last:.3e} at smallest ε", st.id()));
            out.checks.push(Check::new(
                format!("{}: L1 distance of u_ε^{m} below {:e}", st.id(), p.l1_tol),
                *ok,
                format!("{last:.3e}"),
            ));
        }
        tables.push(to_value(&lp));
    }
    out.result = json!({ "residuals": reports, "l1": tables });
    out.table = Some(table);
    out.plot = Some(Plot {
        title: "weak-asymptotic error terms and L1 distances".into(),
        x_label: "ε".into(),
        y_label: "magnitude".into(),
        log_x: true,
        log_y: true,
        series,
    });
    Ok(out)
}

fn make_net(name: &str, eps: Vec<f64>, speed: f64) -> Result<EpsNet> {
    let net = if name == "scaled_bump" {
        EpsNet::new("scaled_bump", NetKind::ScaledBump, eps)?
    } else {
        match name.strip_prefix("chi_").and_then(|p| p.parse::<u32>().ok()) {
            Some(pp) => EpsNet::chi(pp, eps)?,
            None => return Err(invalid(format!("unknown net `{name}` (chi_<p>, scaled_bump)"))),
        }
    };
    Ok(if speed != 0.0 { net.transported(speed) } else { net })
}

fn parse_interval(s: &str) -> Result<Region> {
    let (a, b) = s.split_once(':').ok_or_else(|| invalid(format!("interval `{s}`: expected a:b")))?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| invalid(format!("interval `{s}`")));
    let (a, b) = (num(a)?, num(b)?);
    if !(a < b) {
        return Err(invalid(format!("interval `{s}` is empty")));
    }
    Ok(Region::interval(a, b))
}

fn growth(p: &GrowthParams) -> Result<Outcome> {
    let eps = parse_eps_list(&p.eps_sweep)?;
    let net = make_net(&p.net, eps.clone(), p.speed)?;
    let mut regions: Vec<Region> = p.points.iter().map(|&x| Region::point(x)).collect();
    for s in &p.intervals {
        regions.push(parse_interval(s)?);
    }
    if regions.is_empty() {
        return Err(invalid("no points or intervals to probe"));
    }
    let opts = GrowthOptions::default();
    let report = classify(&net, &regions, p.k_max, &opts)?;
    let mut out = Outcome::default();
    let mut table = Table::new(&["region", "order", "b", "stderr", "residual"]);
    for r in &report.regions {
        for f in &r.fits {
            table.push(vec![r.region.to_string().into(), f.order.into(), f.b.into(), f.stderr.into(), f.residual.into()]);
        }
        out.text.push(format!(
            "{}: {:?}, G∞ {}, b = [{}]",
            r.region,
            r.class,
            r.g_infinity,
            r.fits
                .iter()
                .map(|f| f.b.map_or("-".to_string(), |b| format!("{b:.4}")))
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }
    let support_net = net.with_eps_list(parse_eps_list(&p.support_eps)?)?;
    let mut supports = Vec::new();
    for &t in &p.support_times {
        let s = g_singular_support(&support_net, (p.x_min, p.x_max), p.cell, p.support_k_max, &GrowthOptions { t, ..opts })?;
        out.text.push(format!("t = {t}: G∞-singular support {:?}", s.intervals));
        supports.push(s);
    }
    // Expected pattern for chi_2 at rest: b(k) = k + 1 at the origin for
    // even k, bounded away from it, and support {0}.
    if p.net == "chi_2" && p.speed == 0.0 {
        for r in &report.regions {
            match r.region {
                Region::Point { x } if x == 0.0 => {
                    let bad: Vec<usize> = r
                        .fits
                        .iter()
                        .filter(|f| f.order % 2 == 0)
                        .filter(|f| !f.b.is_some_and(|b| (b - (f.order as f64 + 1.0)).abs() <= 0.05))
                        .map(|f| f.order)
                        .collect();
                    out.checks.push(Check::new("b = k + 1 ± 0.05 at x = 0 for even k", bad.is_empty(), format!("failing orders {bad:?}")));
                }
                Region::Interval { a, b } if a > 0.0 || b < 0.0 => {
                    let top = r.fits.iter().filter_map(|f| f.b).fold(f64::NEG_INFINITY, f64::max);
                    out.checks.push(Check::new(format!("b <= 0.05 on {}", r.region), top <= 0.05, format!("max b = {top:.4}")));
                }
                _ => {}
            }
        }
        let dists: Vec<f64> = supports.iter().map(|s| hausdorff_points_intervals(&[0.0], &s.intervals)).collect();
        out.checks.push(Check::new(
            "G∞-singular support = {0} within one cell",
            dists.iter().all(|d| *d <= p.cell),
            format!("distances {dists:?}"),
        ));
    }
    if let Some(first) = report.regions.first() {
        out.plot = Some(Plot {
            title: format!("sup |∂^k u_ε| on {} for {}", first.region, net.name),
            x_label: "ε".into(),
            y_label: "sup".into(),
            log_x: true,
            log_y: true,
            series: first
                .fits
                .iter()
                .map(|f| Series::new(format!("k={}", f.order), eps.iter().copied().zip(f.sups.iter().copied()).collect()))
                .collect(),
        });
    }
    out.result = json!({ "growth": to_value(&report), "overall": to_value(&report.overall()), "support": to_value(&supports) });
    out.table = Some(table);
    Ok(out)
}

fn forecast(p: &ForecastParams) -> Result<Outcome> {
    match p.mode.as_str() {
        "lines" => forecast_lines(p),
        "anomaly" => forecast_anomaly(p),
        other => Err(invalid(format!("unknown forecast mode `{other}` (lines, anomaly)"))),
    }
}

fn forecast_lines(p: &ForecastParams) -> Result<Outcome> {
    let parse = |v: &[String]| v.iter().map(|s| parse_ratio(s)).collect::<anomalab_core::Result<Vec<_>>>();
    let fan = CharacteristicFan::new(parse(&p.speeds)?, parse(&p.seeds)?, p.depth)?;
    let f = build_forecast(&fan, ForecastDomain::new(p.x_min, p.x_max, p.t_max)?)?;
    let mut out = Outcome::default();
    let mut table = Table::new(&["generation", "x0", "t0", "speed"]);
    let mut series = Vec::new();
    for l in f.lines() {
        table.push(vec![
            l.generation.into(),
            l.x0.to_string().into(),
            l.t0.to_string().into(),
            l.speed.to_string().into(),
        ]);
        out.text.push(format!("S{}: {l}", l.generation));
        let t0 = anomalab_core::exact::rational_to_f64(&l.t0);
        series.push(Series::new(
            format!("S{}", l.generation),
            vec![(l.position_f64(t0), t0), (l.position_f64(p.t_max), p.t_max)],
        ));
    }
    out.text.push(format!(
        "lines per generation: {:?}",
        f.generations.iter().map(Vec::len).collect::<Vec<_>>()
    ));
    out.plot = Some(Plot {
        title: "forecast singular lines".into(),
        x_label: "x".into(),
        y_label: "t".into(),
        log_x: false,
        log_y: false,
        series,
    });
    out.result = to_value(&f);
    out.table = Some(table);
    Ok(out)
}

fn forecast_anomaly(p: &ForecastParams) -> Result<Outcome> {
    let eps = parse_eps_list(&p.eps_sweep)?;
    let window = (p.x_min, p.x_max);
    let chi = anomaly_study(&EpsNet::chi(2, eps.clone())?, p.speed, &p.times, window, p.cell, p.k_max)?;
    let bump_net = EpsNet::new("scaled_bump", NetKind::ScaledBump, eps)?.transported(p.speed);
    let bump = anomaly_study(&bump_net, p.speed, &p.times, window, p.cell, p.k_max)?;
    let mut out = Outcome::default();
    let mut table = Table::new(&["net", "t", "forecast", "measured", "distance"]);
    for st in [&chi, &bump] {
        for s in &st.report.slices {
            table.push(vec![
                st.net.clone().into(),
                s.t.into(),
                format!("{:?}", s.forecast).into(),
                format!("{:?}", s.measured).into(),
                s.distance.into(),
            ]);
        }
        out.text.push(format!(
            "{}: {} (max distance {:.4}, anomalous fraction {:.2})",
            st.net, st.report.verdict, st.report.max_distance, st.report.anomalous_fraction
        ));
    }
    out.checks.push(Check::new(
        "stationary chi_2 under advection is anomalous",
        chi.report.verdict.to_string() == "anomalous",
        chi.report.verdict.to_string(),
    ));
    out.checks.push(Check::new(
        "advected mollified bump is classical",
        bump.report.verdict.to_string() == "classical",
        bump.report.verdict.to_string(),
    ));
    out.result = json!({ "stationary": to_value(&chi), "advected": to_value(&bump) });
    out.table = Some(table);
    Ok(out)
}
