//! Classical forecast of where singularities can travel in a diagonal
//! hyperbolic system with constant speeds, and comparison with measured
//! singular supports.

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{ratio_serde, rational_from_f64, rational_to_f64, Rational};

/// Tolerance for deduplicating lines whose data came from floats.
pub const FLOAT_DEDUP_TOL: f64 = 1e-12;

pub const DEFAULT_DEPTH: usize = 4;

/// Upper bound on the number of lines in one forecast.
pub const MAX_LINES: usize = 50_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicFan {
    speeds: Vec<Rational>,
    seeds: Vec<Rational>,
    depth: usize,
    /// Inputs are exact rationals; otherwise they are binary images of
    /// floats and comparisons use [`FLOAT_DEDUP_TOL`].
    exact: bool,
}

impl CharacteristicFan {
    pub fn new(speeds: Vec<Rational>, seeds: Vec<Rational>, depth: usize) -> Result<Self> {
        Self::build(speeds, seeds, depth, true)
    }

    pub fn from_f64(speeds: &[f64], seeds: &[f64], depth: usize) -> Result<Self> {
        let conv = |v: &[f64]| {
            v.iter()
                .map(|&x| rational_from_f64(x))
                .collect::<Result<Vec<_>>>()
        };
        Self::build(conv(speeds)?, conv(seeds)?, depth, false)
    }

    fn build(
        speeds: Vec<Rational>,
        mut seeds: Vec<Rational>,
        depth: usize,
        exact: bool,
    ) -> Result<Self> {
        if speeds.is_empty() || seeds.is_empty() {
            return Err(Error::InvalidInput(
                "need at least one speed and one seed".into(),
            ));
        }
        for (i, a) in speeds.iter().enumerate() {
            if speeds[..i].contains(a) {
                return Err(Error::InvalidInput(format!("speed {a} listed twice")));
            }
        }
        seeds.sort();
        seeds.dedup();
        Ok(Self {
            speeds,
            seeds,
            depth,
            exact,
        })
    }

    pub fn speeds(&self) -> &[Rational] {
        &self.speeds
    }

    pub fn seeds(&self) -> &[Rational] {
        &self.seeds
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn min_speed(&self) -> &Rational {
        self.speeds.iter().min().unwrap()
    }

    pub fn max_speed(&self) -> &Rational {
        self.speeds.iter().max().unwrap()
    }
}

/// `x = x0 + speed·(t - t0)` for `t ≥ t0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Line {
    #[serde(with = "ratio_serde")]
    pub x0: Rational,
    #[serde(with = "ratio_serde")]
    pub t0: Rational,
    #[serde(with = "ratio_serde")]
    pub speed: Rational,
    pub generation: usize,
}

impl Line {
    pub fn position(&self, t: &Rational) -> Rational {
        &self.x0 + &self.speed * (t - &self.t0)
    }

    pub fn position_f64(&self, t: f64) -> f64 {
        rational_to_f64(&self.x0) + rational_to_f64(&self.speed) * (t - rational_to_f64(&self.t0))
    }

    pub fn alive_at(&self, t: f64) -> bool {
        t >= rational_to_f64(&self.t0) - FLOAT_DEDUP_TOL
    }

    /// Crossing with another line, if both are alive there.
    pub fn intersect(&self, other: &Line) -> Option<(Rational, Rational)> {
        let dv = &self.speed - &other.speed;
        if dv.is_zero() {
            return None;
        }
        // x0a + va (t - t0a) = x0b + vb (t - t0b)
        let rhs = &other.x0 - &other.speed * &other.t0 - (&self.x0 - &self.speed * &self.t0);
        let t = rhs / dv;
        if t < self.t0 || t < other.t0 {
            return None;
        }
        let x = self.position(&t);
        Some((x, t))
    }
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "x = {} + {}·(t - {}), t ≥ {}",
            self.x0, self.speed, self.t0, self.t0
        )
    }
}

/// Space-time window in which lines are generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastDomain {
    pub x_min: f64,
    pub x_max: f64,
    pub t_max: f64,
}

impl ForecastDomain {
    pub fn new(x_min: f64, x_max: f64, t_max: f64) -> Result<Self> {
        if !(x_min < x_max) || !(t_max > 0.0) {
            return Err(Error::InvalidInput(
                "forecast domain needs x_min < x_max and t_max > 0".into(),
            ));
        }
        Ok(Self {
            x_min,
            x_max,
            t_max,
        })
    }

    fn contains(&self, x: f64, t: f64) -> bool {
        (0.0..=self.t_max).contains(&t) && (self.x_min..=self.x_max).contains(&x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularityForecast {
    pub domain: ForecastDomain,
    pub depth: usize,
    /// `S_0, S_1, …`; generation `j + 1` holds the lines born at crossings of
    /// earlier lines.
    pub generations: Vec<Vec<Line>>,
    /// Forecasts use the principal part only; reaction terms do not enter.
    pub note: String,
}

impl SingularityForecast {
    pub fn lines(&self) -> impl Iterator<Item = &Line> {
        self.generations.iter().flatten()
    }

    pub fn line_count(&self) -> usize {
        self.generations.iter().map(Vec::len).sum()
    }

    /// Sorted positions of the lines alive at `t` inside the spatial window.
    pub fn trace(&self, t: f64) -> Vec<f64> {
        let mut xs: Vec<f64> = self
            .lines()
            .filter(|l| l.alive_at(t))
            .map(|l| l.position_f64(t))
            .filter(|x| (self.domain.x_min..=self.domain.x_max).contains(x))
            .collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() <= FLOAT_DEDUP_TOL);
        xs
    }
}

fn same(a: &Rational, b: &Rational, exact: bool) -> bool {
    if exact {
        a == b
    } else {
        (rational_to_f64(a) - rational_to_f64(b)).abs() <= FLOAT_DEDUP_TOL
    }
}

/// Whether a line with this speed already passes through `(x, t)`.
fn covered(lines: &[Line], x: &Rational, t: &Rational, speed: &Rational, exact: bool) -> bool {
    lines.iter().any(|l| {
        same(&l.speed, speed, exact)
            && (l.t0 <= *t || same(&l.t0, t, exact))
            && same(&l.position(t), x, exact)
    })
}

/// Lines `x = x_i + λ_j t`, then, generation by generation, forward lines of
/// every speed from each crossing of two existing lines with distinct
/// speeds. Crossings outside the domain or outside the forward region of
/// influence of the seed interval are dropped.
pub fn build_forecast(
    fan: &CharacteristicFan,
    domain: ForecastDomain,
) -> Result<SingularityForecast> {
    let exact = fan.exact;
    let mut all: Vec<Line> = Vec::new();
    let mut s0 = Vec::new();
    for x in &fan.seeds {
        for v in &fan.speeds {
            if !covered(&s0, x, &Rational::zero(), v, exact) {
                s0.push(Line {
                    x0: x.clone(),
                    t0: Rational::zero(),
                    speed: v.clone(),
                    generation: 0,
                });
            }
        }
    }
    all.extend(s0.iter().cloned());
    let mut generations = vec![s0];
    let (a, b) = (fan.seeds[0].clone(), fan.seeds[fan.seeds.len() - 1].clone());
    let influence = |x: &Rational, t: &Rational| -> bool {
        let lo = &a + fan.min_speed() * t;
        let hi = &b + fan.max_speed() * t;
        *x >= lo && *x <= hi
    };
    let mut new_from = 0usize;
    for g in 1..=fan.depth {
        let mut born: Vec<Line> = Vec::new();
        for i in 0..all.len() {
            for j in (i + 1).max(new_from)..all.len() {
                let Some((x, t)) = all[i].intersect(&all[j]) else {
                    continue;
                };
                if t.is_zero() || !influence(&x, &t) {
                    continue;
                }
                if !domain.contains(rational_to_f64(&x), rational_to_f64(&t)) {
                    continue;
                }
                for v in &fan.speeds {
                    if covered(&all, &x, &t, v, exact) || covered(&born, &x, &t, v, exact) {
                        continue;
                    }
                    // an earlier start on the same track subsumes a later one
                    born.retain(|l| {
                        !(same(&l.speed, v, exact)
                            && same(&(&x - v * &t), &(&l.x0 - &l.speed * &l.t0), exact))
                    });
                    born.push(Line {
                        x0: x.clone(),
                        t0: t.clone(),
                        speed: v.clone(),
                        generation: g,
                    });
                }
            }
            if all.len() + born.len() > MAX_LINES {
                return Err(Error::InvalidInput(format!(
                    "forecast exceeds {MAX_LINES} lines at generation {g}; reduce depth or domain"
                )));
            }
        }
        new_from = all.len();
        all.extend(born.iter().cloned());
        generations.push(born);
    }
    Ok(SingularityForecast {
        domain,
        depth: fan.depth,
        generations,
        note: "principal part only: lower-order and reaction terms do not enter the forecast"
            .into(),
    })
}

/// Measured singular support at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasuredSlice {
    pub t: f64,
    pub intervals: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceScore {
    pub t: f64,
    pub forecast: Vec<f64>,
    pub measured: Vec<(f64, f64)>,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnomalyVerdict {
    Anomalous,
    Classical,
}

impl fmt::Display for AnomalyVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnomalyVerdict::Anomalous => "anomalous",
            AnomalyVerdict::Classical => "classical",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyReport {
    pub cell_width: f64,
    pub slices: Vec<SliceScore>,
    pub max_distance: f64,
    pub mean_distance: f64,
    /// Fraction of slices farther than 3 cells from the forecast.
    pub anomalous_fraction: f64,
    pub verdict: AnomalyVerdict,
}

/// Cells of separation beyond which a slice counts as anomalous.
pub const ANOMALY_CELLS: f64 = 3.0;
/// Fraction of anomalous slices needed for an anomalous verdict.
pub const ANOMALY_FRACTION: f64 = 0.8;

fn dist_to_points(x: f64, pts: &[f64]) -> f64 {
    pts.iter()
        .map(|p| (x - p).abs())
        .fold(f64::INFINITY, f64::min)
}

fn dist_to_intervals(x: f64, ivs: &[(f64, f64)]) -> f64 {
    ivs.iter()
        .map(|&(a, b)| {
            if x < a {
                a - x
            } else if x > b {
                x - b
            } else {
                0.0
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Hausdorff distance between a finite point set and a finite union of
/// closed intervals.
pub fn hausdorff_points_intervals(points: &[f64], intervals: &[(f64, f64)]) -> f64 {
    if points.is_empty() || intervals.is_empty() {
        return f64::INFINITY;
    }
    let from_points = points
        .iter()
        .map(|&p| dist_to_intervals(p, intervals))
        .fold(0.0, f64::max);
    // On an interval, the distance to a point set peaks at an endpoint or at
    // a midpoint between consecutive points.
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mids: Vec<f64> = sorted.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let from_intervals = intervals
        .iter()
        .flat_map(|&(a, b)| {
            [a, b]
                .into_iter()
                .chain(mids.iter().copied().filter(move |m| *m > a && *m < b))
        })
        .map(|x| dist_to_points(x, &sorted))
        .fold(0.0, f64::max);
    from_points.max(from_intervals)
}

pub fn anomaly_score(
    forecast: &SingularityForecast,
    measured: &[MeasuredSlice],
    cell_width: f64,
) -> Result<AnomalyReport> {
    if measured.is_empty() {
        return Err(Error::EmptyMeasurement(f64::NAN));
    }
    if !(cell_width > 0.0) {
        return Err(Error::InvalidInput("cell width must be positive".into()));
    }
    let mut slices = Vec::with_capacity(measured.len());
    for m in measured {
        if m.intervals.is_empty() {
            return Err(Error::EmptyMeasurement(m.t));
        }
        let trace = forecast.trace(m.t);
        if trace.is_empty() {
            return Err(Error::EmptyForecast(m.t));
        }
        let distance = hausdorff_points_intervals(&trace, &m.intervals);
        slices.push(SliceScore {
            t: m.t,
            forecast: trace,
            measured: m.intervals.clone(),
            distance,
        });
    }
    let n = slices.len() as f64;
    let max_distance = slices.iter().map(|s| s.distance).fold(0.0, f64::max);
    let mean_distance = slices.iter().map(|s| s.distance).sum::<f64>() / n;
    let far = slices
        .iter()
        .filter(|s| s.distance > ANOMALY_CELLS * cell_width)
        .count() as f64;
    let anomalous_fraction = far / n;
    let verdict = if anomalous_fraction >= ANOMALY_FRACTION {
        AnomalyVerdict::Anomalous
    } else {
        AnomalyVerdict::Classical
    };
    Ok(AnomalyReport {
        cell_width,
        slices,
        max_distance,
        mean_distance,
        anomalous_fraction,
        verdict,
    })
}

/// Whether every line lies in the forward region of influence
/// `a + λ_min t ≤ x ≤ b + λ_max t` of the seed interval `[a, b]`.
pub fn within_influence(fan: &CharacteristicFan, forecast: &SingularityForecast) -> bool {
    let a = &fan.seeds[0];
    let b = &fan.seeds[fan.seeds.len() - 1];
    forecast.lines().all(|l| {
        // Affine in t, so checking the birth point and the slope suffices.
        let x = &l.x0;
        let t = &l.t0;
        let lo_ok = *x >= a + fan.min_speed() * t && l.speed >= *fan.min_speed();
        let hi_ok = *x <= b + fan.max_speed() * t && l.speed <= *fan.max_speed();
        lo_ok && hi_ok
    })
}
