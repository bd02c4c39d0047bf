//! Subcommand parameters, shared by the flag parser and JSON run configs.

use std::path::PathBuf;

use clap::{Args, Command, FromArgMatches, Subcommand};
use serde::{Deserialize, Serialize};

use anomalab_core::fit::geometric_sequence;

use crate::error::CliError;

/// Parameters with every flag at its default.
pub fn defaults<T: Args + FromArgMatches>() -> T {
    let m = T::augment_args(Command::new("defaults")).get_matches_from(["defaults"]);
    T::from_arg_matches(&m).expect("all flags have defaults")
}

macro_rules! default_via_clap {
    ($($t:ty),*) => {$(
        impl Default for $t {
            fn default() -> Self {
                defaults()
            }
        }
    )*};
}

default_via_clap!(
    IdentitiesParams,
    FourierParams,
    PairParams,
    BlowupParams,
    EvolveParams,
    WaveParams,
    PseudofunParams,
    WeakasymParams,
    GrowthParams,
    ForecastParams,
    ReportParams
);

/// `identities`: exact checks in the boundary-value algebra.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdentitiesParams {
    /// all, u0sq, u0cube, fourier-square, fourier-hom, or speed-family
    #[arg(long, default_value = "all")]
    pub check: String,
    /// Fourier homomorphism checked for j + k <= k_max
    #[arg(long, default_value_t = 8)]
    pub k_max: u32,
    /// speed-family: triples drawn on and off the line a + b = 1
    #[arg(long, default_value_t = 20)]
    pub count: usize,
    #[arg(long, default_value_t = 20_240_917)]
    pub seed: u64,
}

/// `fourier`: transforms of e_k and convolution checks.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FourierParams {
    /// Orders k of e_k = (x + i0)^-k to transform
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub k: Vec<u32>,
    /// Pair j,k: compare F(e_j e_k) with F(e_j) * F(e_k)
    #[arg(long, value_delimiter = ',')]
    pub conv: Option<Vec<u32>>,
}

/// `pair`: exact pairings, the chi_p trichotomy, and model products.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PairParams {
    /// exact, trichotomy, or model-product
    #[arg(long, default_value = "exact")]
    pub mode: String,
    /// exact: order k of e_k
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    /// bump, bump_normalized, bump_unit, or poly_cutoff_<m>
    #[arg(long, default_value = "bump_normalized")]
    pub test: String,
    /// exact: ε values at which the analytic regularization is also paired
    #[arg(long, value_delimiter = ',')]
    pub analytic_eps: Vec<f64>,
    /// trichotomy: ε sweep, `start:end:geometric[:ratio]`, `start:end:logspace:n` or a list
    #[arg(long, default_value = "0.1:1e-4:geometric")]
    pub eps_sweep: String,
    /// model-product: mollifiers to compare
    #[arg(long, value_delimiter = ',', default_value = "poly4,smooth")]
    pub mollifiers: Vec<String>,
    /// model-product: ε values
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.01,0.001")]
    pub product_eps: Vec<f64>,
}

/// `blowup`: Friedrichs-regularized Riccati blow-up times.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlowupParams {
    /// poly4 or smooth
    #[arg(long, default_value = "poly4")]
    pub mollifier: String,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value = "0.1:0.0125:geometric")]
    pub eps_sweep: String,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
}

/// `evolve`: characteristic solver for u_t + c u_x = c f(x, u).
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveParams {
    /// riccati (f = -u^2), cubic_x (f = x u^3), or power_<p> (f = -u^p)
    #[arg(long, default_value = "riccati")]
    pub reaction: String,
    /// analytic (1/(x + iε)) or friedrichs (mollified 1/(x + i0))
    #[arg(long, default_value = "analytic")]
    pub data: String,
    #[arg(long, default_value = "poly4")]
    pub mollifier: String,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub tau: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub x_max: f64,
    #[arg(long, default_value_t = 401)]
    pub nx: usize,
}

/// `wave`: leapfrog run from the stationary profile (x^2 + ε^2)^(-1/2).
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaveParams {
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 5.0)]
    pub half_width: f64,
    #[arg(long, default_value_t = 2.5e-3)]
    pub h: f64,
    #[arg(long, default_value_t = 0.9)]
    pub cfl: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    /// given (u^3 + 3x^2u^5), balanced (-u^3 + 3x^2u^5), or terms `coef:xpow:upow,...`
    #[arg(long, default_value = "given", allow_hyphen_values = true)]
    pub g: String,
    /// Multiplier on the initial profile
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
}

/// `pseudofun`: weak residuals of the radial stationary examples.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PseudofunParams {
    /// all, n3p5, or n4p3
    #[arg(long, default_value = "all")]
    pub example: String,
    /// Replace the power-term coefficient in the wave residual
    #[arg(long, allow_hyphen_values = true)]
    pub coeff: Option<f64>,
}

/// `weakasym`: decay of the weak-asymptotic error terms and L1 convergence.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeakasymParams {
    /// all, n3p5e, or n4p3e
    #[arg(long, default_value = "all")]
    pub example: String,
    #[arg(long, default_value = "1e-2:1e-5:geometric")]
    pub eps_sweep: String,
    /// ε values for the L1 distances of u_ε and u_ε^p
    #[arg(long, default_value = "1e-1:1e-4:logspace:13")]
    pub l1_eps: String,
    #[arg(long, default_value_t = 1e-4)]
    pub l1_tol: f64,
}

/// `growth`: growth orders, G∞ verdicts and the G∞-singular support of a net.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GrowthParams {
    /// chi_<p> ((x^2 + ε^2)^(-1/p)) or scaled_bump
    #[arg(long, default_value = "chi_2")]
    pub net: String,
    /// Transport speed: the net at time t is u_ε(x - speed t)
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub speed: f64,
    #[arg(long, default_value = "0.1:1e-4:geometric")]
    pub eps_sweep: String,
    /// Highest derivative order probed
    #[arg(long, default_value_t = 6)]
    pub k_max: usize,
    /// Points at which growth orders are fitted
    #[arg(long, value_delimiter = ',', default_value = "0", allow_hyphen_values = true)]
    pub points: Vec<f64>,
    /// Intervals `a:b` on which growth orders are fitted
    #[arg(long, value_delimiter = ',', default_value = "0.5:1", allow_hyphen_values = true)]
    pub intervals: Vec<String>,
    /// Times at which the singular support is estimated
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
    pub support_times: Vec<f64>,
    #[arg(long, default_value = "1e-3:1e-6:geometric:0.1")]
    pub support_eps: String,
    #[arg(long, default_value_t = 4)]
    pub support_k_max: usize,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub x_max: f64,
    #[arg(long, default_value_t = 0.02)]
    pub cell: f64,
}

/// `forecast`: characteristic-line forecasts and anomaly scoring.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForecastParams {
    /// lines or anomaly
    #[arg(long, default_value = "lines")]
    pub mode: String,
    /// Characteristic speeds (rationals such as 1/2 are read exactly)
    #[arg(long, value_delimiter = ',', default_value = "0,1,-1", allow_hyphen_values = true)]
    pub speeds: Vec<String>,
    /// Initial singular points
    #[arg(long, value_delimiter = ',', default_value = "-1,1", allow_hyphen_values = true)]
    pub seeds: Vec<String>,
    #[arg(long, default_value_t = anomalab_core::singpred::DEFAULT_DEPTH)]
    pub depth: usize,
    #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    pub x_max: f64,
    #[arg(long, default_value_t = 3.0)]
    pub t_max: f64,
    /// anomaly: advection speed c of the forecast x = c t
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub speed: f64,
    /// anomaly: measurement times
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1")]
    pub times: Vec<f64>,
    #[arg(long, default_value = "1e-3:1e-6:geometric:0.1")]
    pub eps_sweep: String,
    #[arg(long, default_value_t = 0.02)]
    pub cell: f64,
    #[arg(long, default_value_t = 4)]
    pub k_max: usize,
}

/// `report`: every acceptance experiment in one summary.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportParams {
    /// Comma-separated criterion numbers (default: all)
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u32>,
}

/// Output handling shared by all subcommands.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputOptions {
    /// Directory for <command>.json, <command>.csv and <command>.svg
    #[arg(long = "out", global = true)]
    pub dir: Option<PathBuf>,
    /// Also write an SVG plot (needs --out)
    #[arg(long, global = true)]
    pub plot: bool,
    /// Assertion mode: exit 4 when the experiment misses its tolerances
    #[arg(long = "assert", global = true)]
    pub assert: bool,
    /// Compare the JSON result against this golden file (exit 4 on mismatch)
    #[arg(long, global = true)]
    pub golden: Option<PathBuf>,
    /// Write the JSON result to this golden file
    #[arg(long, global = true)]
    pub write_golden: Option<PathBuf>,
    /// Relative tolerance of the golden comparison
    #[arg(long, global = true)]
    pub golden_rtol: Option<f64>,
    /// Standard output format: json, csv, or text
    #[arg(long, global = true)]
    pub format: Option<String>,
}

/// A subcommand with its parameters.
#[derive(Debug, Clone, Subcommand)]
pub enum Task {
    /// Exact identities of the boundary-value algebra
    Identities(IdentitiesParams),
    /// Fourier transforms of e_k and the convolution theorem
    Fourier(FourierParams),
    /// Pairings with test functions: exact, ε-trichotomy, mollified products
    Pair(PairParams),
    /// Blow-up time of the mollified Riccati flow against ε
    Blowup(BlowupParams),
    /// Characteristic solver for u_t + c u_x = f(x, u)
    Evolve(EvolveParams),
    /// Leapfrog wave runs from the stationary net and energy drift
    Wave(WaveParams),
    /// Weak residuals of the radial pseudofunction examples
    Pseudofun(PseudofunParams),
    /// Weak-asymptotic decay rates and L1 convergence
    Weakasym(WeakasymParams),
    /// Derivative growth exponents and G∞-singular support of an ε-net
    Growth(GrowthParams),
    /// Forecast singular lines or score a measured net against them
    Forecast(ForecastParams),
    /// Run every acceptance experiment
    Report(ReportParams),
}

pub const SUBCOMMANDS: [&str; 11] = [
    "identities",
    "fourier",
    "pair",
    "blowup",
    "evolve",
    "wave",
    "pseudofun",
    "weakasym",
    "growth",
    "forecast",
    "report",
];

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Identities(_) => "identities",
            Task::Fourier(_) => "fourier",
            Task::Pair(_) => "pair",
            Task::Blowup(_) => "blowup",
            Task::Evolve(_) => "evolve",
            Task::Wave(_) => "wave",
            Task::Pseudofun(_) => "pseudofun",
            Task::Weakasym(_) => "weakasym",
            Task::Growth(_) => "growth",
            Task::Forecast(_) => "forecast",
            Task::Report(_) => "report",
        }
    }

    pub fn params_json(&self) -> serde_json::Value {
        let v = match self {
            Task::Identities(p) => serde_json::to_value(p),
            Task::Fourier(p) => serde_json::to_value(p),
            Task::Pair(p) => serde_json::to_value(p),
            Task::Blowup(p) => serde_json::to_value(p),
            Task::Evolve(p) => serde_json::to_value(p),
            Task::Wave(p) => serde_json::to_value(p),
            Task::Pseudofun(p) => serde_json::to_value(p),
            Task::Weakasym(p) => serde_json::to_value(p),
            Task::Growth(p) => serde_json::to_value(p),
            Task::Forecast(p) => serde_json::to_value(p),
            Task::Report(p) => serde_json::to_value(p),
        };
        v.expect("parameters serialize")
    }

    pub fn from_json(subcommand: &str, params: serde_json::Value) -> Result<Self, CliError> {
        fn de<T: serde::de::DeserializeOwned>(sub: &str, v: serde_json::Value) -> Result<T, CliError> {
            serde_json::from_value(v).map_err(|e| CliError::Validation(format!("params of `{sub}`: {e}")))
        }
        Ok(match subcommand {
            "identities" => Task::Identities(de(subcommand, params)?),
            "fourier" => Task::Fourier(de(subcommand, params)?),
            "pair" => Task::Pair(de(subcommand, params)?),
            "blowup" => Task::Blowup(de(subcommand, params)?),
            "evolve" => Task::Evolve(de(subcommand, params)?),
            "wave" => Task::Wave(de(subcommand, params)?),
            "pseudofun" => Task::Pseudofun(de(subcommand, params)?),
            "weakasym" => Task::Weakasym(de(subcommand, params)?),
            "growth" => Task::Growth(de(subcommand, params)?),
            "forecast" => Task::Forecast(de(subcommand, params)?),
            "report" => Task::Report(de(subcommand, params)?),
            other => {
                return Err(CliError::Validation(format!(
                    "unknown subcommand `{other}` (expected one of {})",
                    SUBCOMMANDS.join(", ")
                )))
            }
        })
    }
}

/// JSON run configuration, the file form of one command-line invocation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: String,
    #[serde(default = "empty_object")]
    pub params: serde_json::Value,
    #[serde(default)]
    pub output: OutputOptions,
}

fn empty_object() -> serde_json::Value {
    serde_json::Value::Object(Default::default())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<(Task, OutputOptions), CliError> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Validation(format!("run config: {e}")))?;
        if !cfg.params.is_object() {
            return Err(CliError::Validation("run config: `params` must be an object".into()));
        }
        Ok((Task::from_json(&cfg.subcommand, cfg.params)?, cfg.output))
    }
}

/// ε lists: `start:end:geometric[:ratio]` (ratio 1/2 by default),
/// `start:end:logspace:n`, or a comma-separated list.
pub fn parse_eps_list(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::Validation(format!("ε list `{spec}`: {why}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("`{s}` is not a number")));
    let parts: Vec<&str> = spec.split(':').collect();
    let list = match parts.as_slice() {
        [a, b, "geometric", rest @ ..] if rest.len() <= 1 => {
            let (a, b) = (num(a)?, num(b)?);
            let ratio = rest.first().map(|r| num(r)).transpose()?.unwrap_or(0.5);
            if !(ratio > 0.0 && ratio < 1.0 && a > b && b > 0.0) {
                return Err(bad("need start > end > 0 and ratio in (0, 1)"));
            }
            geometric_sequence(a, b, ratio)
        }
        [a, b, "logspace", n] => {
            let (a, b) = (num(a)?, num(b)?);
            let n: usize = n.trim().parse().map_err(|_| bad("point count"))?;
            if !(a > b && b > 0.0 && n >= 2) {
                return Err(bad("need start > end > 0 and at least 2 points"));
            }
            let (la, lb) = (a.log10(), b.log10());
            (0..n).map(|i| 10f64.powf(la + (lb - la) * i as f64 / (n - 1) as f64)).collect()
        }
        [single] => single.split(',').map(num).collect::<Result<_, _>>()?,
        _ => return Err(bad("expected start:end:geometric[:ratio], start:end:logspace:n, or a list")),
    };
    if list.is_empty() || list.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(bad("values must be positive"));
    }
    Ok(list)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_lists() {
        assert_eq!(parse_eps_list("0.1:0.0125:geometric").unwrap(), vec![0.1, 0.05, 0.025, 0.0125]);
        assert_eq!(parse_eps_list("1:0.01:geometric:0.1").unwrap().len(), 3);
        let l = parse_eps_list("1e-1:1e-4:logspace:13").unwrap();
        assert_eq!(l.len(), 13);
        assert!((l[12] - 1e-4).abs() < 1e-18);
        assert_eq!(parse_eps_list("0.3,0.2").unwrap(), vec![0.3, 0.2]);
        assert!(parse_eps_list("0.1:0.2:geometric").is_err());
        assert!(parse_eps_list("0.1:0.01:linear").is_err());
        assert!(parse_eps_list("-1").is_err());
    }

    #[test]
    fn defaults_match_flags() {
        let p = BlowupParams::default();
        assert_eq!(p.mollifier, "poly4");
        assert_eq!(p.eps_sweep, "0.1:0.0125:geometric");
        assert_eq!(ForecastParams::default().speeds, vec!["0", "1", "-1"]);
    }

    #[test]
    fn schema_lists_every_param() {
        let schema: serde_json::Value =
            serde_json::from_str(include_str!("../schema/run_config.schema.json")).unwrap();
        let keys = |v: &serde_json::Value| {
            let mut k: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
            k.sort();
            k
        };
        let branches = schema["allOf"].as_array().unwrap();
        assert_eq!(branches.len(), SUBCOMMANDS.len());
        for sub in SUBCOMMANDS {
            let task = Task::from_json(sub, serde_json::json!({})).unwrap();
            let branch = branches
                .iter()
                .find(|b| b["if"]["properties"]["subcommand"]["const"] == sub)
                .unwrap_or_else(|| panic!("schema misses {sub}"));
            assert_eq!(
                keys(&branch["then"]["properties"]["params"]["properties"]),
                keys(&task.params_json()),
                "{sub}"
            );
        }
        assert_eq!(
            keys(&schema["properties"]["output"]["properties"]),
            keys(&serde_json::to_value(OutputOptions::default()).unwrap())
        );
    }

    #[test]
    fn run_config_rejects_unknown_keys() {
        assert!(RunConfig::parse(r#"{"subcommand": "wave", "params": {"eps": 0.5}}"#).is_ok());
        assert!(RunConfig::parse(r#"{"subcommand": "wave", "params": {"epsilon": 0.5}}"#).is_err());
        assert!(RunConfig::parse(r#"{"subcommand": "wave", "extra": 1}"#).is_err());
        assert!(RunConfig::parse(r#"{"subcommand": "wave", "output": {"dir": "x", "colour": true}}"#).is_err());
        assert!(RunConfig::parse(r#"{"subcommand": "plot"}"#).is_err());
    }
}
