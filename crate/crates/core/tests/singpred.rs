use std::collections::{BTreeMap, BTreeSet};

use anomalab_core::exact::{int, rat, rational_to_f64, Rational};
use anomalab_core::singpred::{
    anomaly_score, build_forecast, hausdorff_points_intervals, within_influence, AnomalyVerdict,
    CharacteristicFan, ForecastDomain, MeasuredSlice, SingularityForecast, DEFAULT_DEPTH,
};
use anomalab_core::Error;
use proptest::prelude::*;

fn fan(speeds: &[i64], seeds: &[i64], depth: usize) -> CharacteristicFan {
    CharacteristicFan::new(
        speeds.iter().map(|&v| int(v)).collect(),
        seeds.iter().map(|&v| int(v)).collect(),
        depth,
    )
    .unwrap()
}

fn dom() -> ForecastDomain {
    ForecastDomain::new(-5.0, 5.0, 3.0).unwrap()
}

fn counts(f: &SingularityForecast) -> Vec<usize> {
    f.generations.iter().map(Vec::len).collect()
}

/// Track of a line: its t = 0 intercept and its speed.
type Track = (Rational, Rational);

/// Brute-force forecast: every generation recomputes all pairwise crossings
/// and starts a line on every track not yet alive at the crossing. Returns
/// the tracks started in each generation.
fn oracle_tracks(
    speeds: &[i64],
    seeds: &[i64],
    depth: usize,
    d: &ForecastDomain,
) -> Vec<BTreeSet<Track>> {
    let speeds: Vec<Rational> = speeds.iter().map(|&v| int(v)).collect();
    let lo_seed = int(*seeds.iter().min().unwrap());
    let hi_seed = int(*seeds.iter().max().unwrap());
    let vmin = speeds.iter().min().unwrap().clone();
    let vmax = speeds.iter().max().unwrap().clone();
    // (intercept, speed, birth time)
    let mut lines: Vec<(Rational, Rational, Rational)> = Vec::new();
    // earliest birth time on each track
    let mut seen: BTreeMap<Track, Rational> = BTreeMap::new();
    let mut gen0 = BTreeSet::new();
    for &x in seeds {
        for v in &speeds {
            let key = (int(x), v.clone());
            if seen.insert(key.clone(), int(0)).is_none() {
                gen0.insert(key);
                lines.push((int(x), v.clone(), int(0)));
            }
        }
    }
    let mut out = vec![gen0];
    for _ in 0..depth {
        let mut fresh = BTreeSet::new();
        let mut born = Vec::new();
        for (i, a) in lines.iter().enumerate() {
            for b in &lines[i + 1..] {
                if a.1 == b.1 {
                    continue;
                }
                let t = (&b.0 - &a.0) / (&a.1 - &b.1);
                if t <= int(0) || t < a.2 || t < b.2 {
                    continue;
                }
                let x = &a.0 + &a.1 * &t;
                if x < &lo_seed + &vmin * &t || x > &hi_seed + &vmax * &t {
                    continue;
                }
                let (xf, tf) = (rational_to_f64(&x), rational_to_f64(&t));
                if tf > d.t_max || xf < d.x_min || xf > d.x_max {
                    continue;
                }
                for v in &speeds {
                    let key = (&x - v * &t, v.clone());
                    // a track is covered at t only if it was already born by t
                    if seen.get(&key).map_or(true, |t0| *t0 > t) {
                        seen.insert(key.clone(), t.clone());
                        fresh.insert(key.clone());
                        born.push((key.0, key.1, t.clone()));
                    }
                }
            }
        }
        lines.extend(born);
        out.push(fresh);
    }
    out
}

fn tracks(f: &SingularityForecast) -> Vec<BTreeSet<Track>> {
    f.generations
        .iter()
        .map(|g| {
            g.iter()
                .map(|l| (&l.x0 - &l.speed * &l.t0, l.speed.clone()))
                .collect()
        })
        .collect()
}

#[test]
fn three_speed_example_generation_counts() {
    let f = build_forecast(&fan(&[0, 1, -1], &[-1, 1], DEFAULT_DEPTH), dom()).unwrap();
    assert_eq!(counts(&f), vec![6, 3, 0, 0, 0]);
    assert!(f.note.contains("principal part"));
}

#[test]
fn forecast_matches_brute_force_oracle() {
    let cases: [(&[i64], &[i64], usize); 5] = [
        (&[0, 1, -1], &[-1, 1], 4),
        (&[2, 0, -1], &[0, 1], 3),
        (&[1, -1, 3], &[-2, 0, 2], 3),
        (&[-2, -1, 1, 2], &[0, 1], 2),
        (&[0, 1, -1], &[-2, 0, 1], 3),
    ];
    for (speeds, seeds, depth) in cases {
        let d = dom();
        let f = build_forecast(&fan(speeds, seeds, depth), d).unwrap();
        let got = tracks(&f);
        let want = oracle_tracks(speeds, seeds, depth, &d);
        assert_eq!(got, want, "speeds {speeds:?} seeds {seeds:?}");
        // no duplicate tracks inside a generation
        assert_eq!(
            counts(&f),
            want.iter().map(BTreeSet::len).collect::<Vec<_>>()
        );
    }
}

#[test]
fn at_most_two_speeds_never_grow() {
    for speeds in [&[1i64][..], &[1, -1], &[3, 0], &[-2, 5]] {
        for seeds in [&[0i64][..], &[-1, 1], &[-3, 0, 2]] {
            let f = build_forecast(&fan(speeds, seeds, 5), dom()).unwrap();
            assert!(
                f.generations[1..].iter().all(Vec::is_empty),
                "{speeds:?} {seeds:?}"
            );
            assert_eq!(f.generations[0].len(), speeds.len() * seeds.len());
        }
    }
}

#[test]
fn born_lines_start_at_crossings() {
    let f = build_forecast(&fan(&[0, 1, -1], &[-1, 1], 2), dom()).unwrap();
    // new speeds only: (0, 1) adds the vertical, (±1, 2) add the reflected rays
    let mut g1: Vec<(Rational, Rational, Rational)> = f.generations[1]
        .iter()
        .map(|l| (l.x0.clone(), l.t0.clone(), l.speed.clone()))
        .collect();
    g1.sort();
    assert_eq!(
        g1,
        vec![
            (int(-1), int(2), int(1)),
            (int(0), int(1), int(0)),
            (int(1), int(2), int(-1))
        ]
    );
    assert!(f.generations[1].iter().all(|l| l.generation == 1));
}

#[test]
fn domain_bounds_crossings() {
    // the crossing at (0, 1) is outside a window ending at t = 1/2
    let d = ForecastDomain::new(-5.0, 5.0, 0.5).unwrap();
    let f = build_forecast(&fan(&[0, 1, -1], &[-1, 1], 3), d).unwrap();
    assert_eq!(counts(&f), vec![6, 0, 0, 0]);
}

#[test]
fn trace_lists_live_lines_in_window() {
    let f = build_forecast(&fan(&[0, 1, -1], &[-1, 1], 2), dom()).unwrap();
    assert_eq!(f.trace(0.0), vec![-1.0, 1.0]);
    assert_eq!(f.trace(0.5), vec![-1.5, -1.0, -0.5, 0.5, 1.0, 1.5]);
    // at t = 2 the line x = 0 (born at t = 1) is alive as well
    assert_eq!(f.trace(2.0), vec![-3.0, -1.0, -0.0, 1.0, 3.0]);
}

#[test]
fn invalid_inputs() {
    assert!(matches!(
        CharacteristicFan::new(vec![], vec![int(0)], 1),
        Err(Error::InvalidInput(_))
    ));
    assert!(CharacteristicFan::new(vec![int(1)], vec![], 1).is_err());
    assert!(CharacteristicFan::new(vec![int(1), int(1)], vec![int(0)], 1).is_err());
    assert!(ForecastDomain::new(1.0, 1.0, 1.0).is_err());
    assert!(ForecastDomain::new(0.0, 1.0, 0.0).is_err());
    assert!(CharacteristicFan::from_f64(&[f64::NAN], &[0.0], 1).is_err());
}

#[test]
fn seeds_are_sorted_and_deduplicated() {
    let f = fan(&[1, -1], &[3, -2, 3, 0], 1);
    assert_eq!(f.seeds(), &[int(-2), int(0), int(3)]);
    assert!(f.is_exact());
}

#[test]
fn float_fan_matches_exact_fan_on_dyadics() {
    let exact = CharacteristicFan::new(
        vec![rat(1, 2), int(0), rat(-3, 4)],
        vec![rat(-1, 4), int(1)],
        3,
    )
    .unwrap();
    let float = CharacteristicFan::from_f64(&[0.5, 0.0, -0.75], &[-0.25, 1.0], 3).unwrap();
    assert!(!float.is_exact());
    let a = build_forecast(&exact, dom()).unwrap();
    let b = build_forecast(&float, dom()).unwrap();
    assert_eq!(counts(&a), counts(&b));
    assert_eq!(tracks(&a), tracks(&b));
}

#[test]
fn hausdorff_examples() {
    assert_eq!(hausdorff_points_intervals(&[0.0], &[(0.0, 0.0)]), 0.0);
    assert!((hausdorff_points_intervals(&[0.0], &[(1.0, 2.0)]) - 2.0).abs() < 1e-15);
    assert!((hausdorff_points_intervals(&[-1.0, 1.0], &[(-1.0, 1.0)]) - 1.0).abs() < 1e-15);
    assert!((hausdorff_points_intervals(&[0.0, 4.0], &[(-0.1, 0.1)]) - 3.9).abs() < 1e-15);
    assert!(hausdorff_points_intervals(&[], &[(0.0, 1.0)]).is_infinite());
}

fn measured_from(
    f: &SingularityForecast,
    times: &[f64],
    shift: f64,
    half_width: f64,
) -> Vec<MeasuredSlice> {
    times
        .iter()
        .map(|&t| MeasuredSlice {
            t,
            intervals: f
                .trace(t)
                .iter()
                .map(|x| (x + shift - half_width, x + shift + half_width))
                .collect(),
        })
        .collect()
}

#[test]
fn anomaly_verdicts() {
    let f = build_forecast(&fan(&[0, 1, -1], &[-1, 1], 2), dom()).unwrap();
    let times: Vec<f64> = (1..=10).map(|i| 0.25 * i as f64).collect();
    let cell = 0.02;

    let on = anomaly_score(&f, &measured_from(&f, &times, 0.0, cell), cell).unwrap();
    assert_eq!(on.verdict, AnomalyVerdict::Classical);
    assert!(on.max_distance <= cell + 1e-12);
    assert_eq!(on.anomalous_fraction, 0.0);

    let off = anomaly_score(&f, &measured_from(&f, &times, 10.0 * cell, cell), cell).unwrap();
    assert_eq!(off.verdict, AnomalyVerdict::Anomalous);
    assert_eq!(off.anomalous_fraction, 1.0);
    assert!((off.max_distance - 11.0 * cell).abs() < 1e-12);

    // anomalous on 7 of 10 slices stays below the 80% threshold
    let mut mixed = measured_from(&f, &times[..3], 0.0, cell);
    mixed.extend(measured_from(&f, &times[3..], 10.0 * cell, cell));
    let r = anomaly_score(&f, &mixed, cell).unwrap();
    assert!((r.anomalous_fraction - 0.7).abs() < 1e-12);
    assert_eq!(r.verdict, AnomalyVerdict::Classical);
    assert_eq!(AnomalyVerdict::Anomalous.to_string(), "anomalous");
}

#[test]
fn anomaly_errors() {
    let d = ForecastDomain::new(-1.0, 1.0, 3.0).unwrap();
    let f = build_forecast(&fan(&[1], &[0], 0), d).unwrap();
    assert!(matches!(
        anomaly_score(&f, &[], 0.02),
        Err(Error::EmptyMeasurement(_))
    ));
    let empty = [MeasuredSlice {
        t: 0.5,
        intervals: vec![],
    }];
    assert_eq!(
        anomaly_score(&f, &empty, 0.02),
        Err(Error::EmptyMeasurement(0.5))
    );
    // the only line has left the window by t = 2.5
    let late = [MeasuredSlice {
        t: 2.5,
        intervals: vec![(0.0, 0.1)],
    }];
    assert_eq!(
        anomaly_score(&f, &late, 0.02),
        Err(Error::EmptyForecast(2.5))
    );
    let ok = [MeasuredSlice {
        t: 0.5,
        intervals: vec![(0.5, 0.5)],
    }];
    assert!(anomaly_score(&f, &ok, 0.0).is_err());
}

#[test]
fn forecast_serde_roundtrip() {
    let f = build_forecast(&fan(&[0, 1, -1], &[-1, 1], 2), dom()).unwrap();
    let s = serde_json::to_string(&f).unwrap();
    let back: SingularityForecast = serde_json::from_str(&s).unwrap();
    assert_eq!(back, f);
}

/// Dense-grid Hausdorff distance used as a check on the exact formula.
fn hausdorff_sampled(points: &[f64], intervals: &[(f64, f64)], n: usize) -> f64 {
    let d_pi = |x: f64| {
        intervals
            .iter()
            .map(|&(a, b)| (a - x).max(x - b).max(0.0))
            .fold(f64::INFINITY, f64::min)
    };
    let d_pp = |x: f64| {
        points
            .iter()
            .map(|p| (p - x).abs())
            .fold(f64::INFINITY, f64::min)
    };
    let a = points.iter().map(|&p| d_pi(p)).fold(0.0, f64::max);
    let b = intervals
        .iter()
        .flat_map(|&(lo, hi)| (0..=n).map(move |i| lo + (hi - lo) * i as f64 / n as f64))
        .map(d_pp)
        .fold(0.0, f64::max);
    a.max(b)
}

fn small_fan() -> impl Strategy<Value = (Vec<i64>, Vec<i64>)> {
    (
        proptest::collection::btree_set(-3i64..=3, 1..=4),
        proptest::collection::btree_set(-3i64..=3, 1..=3),
    )
        .prop_map(|(s, x)| (s.into_iter().collect(), x.into_iter().collect()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generations_are_prefix_stable((speeds, seeds) in small_fan(), depth in 0usize..3) {
        let a = build_forecast(&fan(&speeds, &seeds, depth), dom()).unwrap();
        let b = build_forecast(&fan(&speeds, &seeds, depth + 1), dom()).unwrap();
        prop_assert_eq!(&a.generations[..], &b.generations[..=depth]);
        prop_assert!(a.line_count() <= b.line_count());
    }

    #[test]
    fn forecasts_stay_in_region_of_influence((speeds, seeds) in small_fan(), depth in 0usize..4) {
        let fan = fan(&speeds, &seeds, depth);
        let f = build_forecast(&fan, dom()).unwrap();
        prop_assert!(within_influence(&fan, &f));
        prop_assert!(f.lines().all(|l| l.t0 >= int(0)));
    }

    #[test]
    fn forecast_agrees_with_oracle((speeds, seeds) in small_fan(), depth in 0usize..3) {
        let f = build_forecast(&fan(&speeds, &seeds, depth), dom()).unwrap();
        prop_assert_eq!(tracks(&f), oracle_tracks(&speeds, &seeds, depth, &dom()));
    }

    #[test]
    fn hausdorff_matches_sampling(
        points in proptest::collection::vec(-2.0f64..2.0, 1..5),
        ivs in proptest::collection::vec((-2.0f64..2.0, 0.0f64..1.0), 1..4),
    ) {
        let intervals: Vec<(f64, f64)> = ivs.iter().map(|&(a, w)| (a, a + w)).collect();
        let exact = hausdorff_points_intervals(&points, &intervals);
        let n = 4000;
        let sampled = hausdorff_sampled(&points, &intervals, n);
        prop_assert!(exact >= sampled - 1e-12);
        prop_assert!(exact <= sampled + 1.0 / n as f64);
    }
}
