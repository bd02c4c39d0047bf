use anomalab_core::pseudofun::{
    laplacian_coeff, nemytskii_power, pair_radial, pair_with_laplacian, residual_table,
    sphere_area, stationary_wave_residual, stationary_wave_residual_with_coeff,
    weak_laplacian_residual, PseudoFn, StationaryExample,
};
use anomalab_core::quad::QuadOptions;
use anomalab_core::testfn::RadialTestFn;
use anomalab_core::Error;
use proptest::prelude::*;
use std::f64::consts::PI;

/// `(1 - r²)³` on [0, 1] as increasing-degree coefficients.
const CUTOFF3: [f64; 7] = [1.0, 0.0, -3.0, 0.0, 3.0, 0.0, -1.0];

fn cutoff3() -> RadialTestFn {
    RadialTestFn::new("cutoff3", 1.0, |r| ((r * r) * -1.0 + 1.0).powi(3))
}

fn derive(p: &[f64]) -> Vec<f64> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| i as f64 * c)
        .collect()
}

/// `∫₀¹ r^a P(r) dr` for a polynomial `P`.
fn moment(a: f64, p: &[f64]) -> f64 {
    p.iter()
        .enumerate()
        .map(|(i, c)| c / (a + i as f64 + 1.0))
        .sum()
}

/// `⟨R_μ, P⟩` in ℝⁿ for a radial polynomial profile on the unit ball.
fn pair_poly(mu: f64, n: u32, p: &[f64]) -> f64 {
    sphere_area(n) * moment(mu + n as f64 - 1.0, p)
}

/// `⟨R_λ, ΔP⟩` with `r^(n-1) ΔP = r^(n-2)(r P'' + (n-1) P')`.
fn pair_poly_laplacian(lambda: f64, n: u32, p: &[f64]) -> f64 {
    let d1 = derive(p);
    let d2 = derive(&d1);
    let mut q = vec![0.0; p.len()];
    for (i, c) in d2.iter().enumerate() {
        q[i + 1] += c;
    }
    for (i, c) in d1.iter().enumerate() {
        q[i] += (n as f64 - 1.0) * c;
    }
    sphere_area(n) * moment(lambda + n as f64 - 2.0, &q)
}

#[test]
fn sphere_areas() {
    let expected = [2.0, 2.0 * PI, 4.0 * PI, 2.0 * PI * PI, 8.0 * PI * PI / 3.0];
    for (n, e) in (1..=5).zip(expected) {
        assert!((sphere_area(n) - e).abs() < 1e-13 * e, "n={n}");
    }
}

#[test]
fn laplacian_coeff_examples() {
    assert_eq!(laplacian_coeff(-0.5, 3), -0.25);
    assert_eq!(laplacian_coeff(-1.0, 4), -1.0);
    assert_eq!(laplacian_coeff(0.0, 7), 0.0);
    assert_eq!(laplacian_coeff(2.0, 3), 6.0);
}

#[test]
fn pseudofn_rejects_non_integrable_exponents() {
    assert!(matches!(
        PseudoFn::new(-3.0, 3),
        Err(Error::IntegrabilityViolation { .. })
    ));
    assert!(PseudoFn::new(-2.9, 3).is_ok());
    assert!(PseudoFn::new(0.5, 0).is_err());
    assert_eq!(PseudoFn::stationary(5, 3).unwrap().lambda(), -0.5);
    assert_eq!(PseudoFn::stationary(3, 4).unwrap().lambda(), -1.0);
}

#[test]
fn pair_radial_matches_polynomial_moments() {
    let phi = cutoff3();
    let opts = QuadOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-13,
        max_intervals: 4000,
    };
    for (mu, n) in [
        (-0.5, 3),
        (-2.5, 3),
        (-2.0, 4),
        (-3.0, 4),
        (1.5, 2),
        (0.0, 3),
    ] {
        let v = pair_radial(mu, n, &phi, &opts).unwrap();
        let oracle = pair_poly(mu, n, &CUTOFF3);
        assert!(
            (v.value - oracle).abs() < 1e-9 * oracle.abs().max(1.0),
            "μ={mu} n={n}: {} vs {oracle}",
            v.value
        );
        let w = pair_with_laplacian(mu, n, &phi, &opts);
        if mu + n as f64 - 1.0 > 0.0 {
            let lo = pair_poly_laplacian(mu, n, &CUTOFF3);
            assert!((w.unwrap().value - lo).abs() < 1e-9 * lo.abs().max(1.0));
        } else {
            assert!(w.is_err());
        }
    }
    assert!(pair_radial(-3.0, 3, &phi, &opts).is_err());
}

#[test]
fn weak_laplacian_residual_examples() {
    let family = RadialTestFn::standard_family();
    assert!(family.len() >= 5);
    for phi in &family {
        for (lambda, n) in [(-0.5, 3), (-1.0, 4)] {
            let f = PseudoFn::new(lambda, n).unwrap();
            let r = weak_laplacian_residual(&f, phi).unwrap();
            assert!(
                r.value.abs() < 1e-7,
                "λ={lambda} n={n} {}: {}",
                phi.name(),
                r.value
            );
        }
        let sq = PseudoFn::new(2.0, 3).unwrap();
        assert!(weak_laplacian_residual(&sq, phi).unwrap().value.abs() < 1e-9);
    }
}

#[test]
fn weak_laplacian_residual_requires_integrability() {
    let f = PseudoFn::new(-1.0, 3).unwrap();
    assert!(matches!(
        weak_laplacian_residual(&f, &cutoff3()),
        Err(Error::IntegrabilityViolation { .. })
    ));
}

#[test]
fn nemytskii_examples() {
    let a = nemytskii_power(&PseudoFn::new(-0.5, 3).unwrap(), 5);
    assert_eq!(a.power_lambda, -2.5);
    assert!(a.in_lp_loc);
    assert_eq!(a.power().unwrap().lambda(), -2.5);

    let b = nemytskii_power(&PseudoFn::new(-1.0, 4).unwrap(), 3);
    assert_eq!(b.power_lambda, -3.0);
    assert!(b.in_lp_loc);

    let c = nemytskii_power(&PseudoFn::new(-0.5, 3).unwrap(), 7);
    assert_eq!(c.power_lambda, -3.5);
    assert!(!c.in_lp_loc);
    assert!(c.power().is_none());
}

#[test]
fn stationary_examples_are_weak_solutions() {
    for ex in StationaryExample::all() {
        assert_eq!(StationaryExample::from_id(ex.id()).unwrap(), ex);
        for phi in RadialTestFn::standard_family() {
            let r = stationary_wave_residual(ex, &phi).unwrap();
            assert!(
                r.value.abs() < 1e-7,
                "{} {}: {}",
                ex.id(),
                phi.name(),
                r.value
            );
        }
        // closed form on the polynomial cutoff
        let oracle = pair_poly_laplacian(ex.lambda(), ex.n(), &CUTOFF3)
            + ex.coeff() * pair_poly(ex.lambda() * ex.p() as f64, ex.n(), &CUTOFF3);
        assert!(oracle.abs() < 1e-12);
    }
    assert!(StationaryExample::from_id("n5p2").is_err());
}

#[test]
fn perturbed_coefficient_leaves_residual() {
    let phi = cutoff3();
    let ex = StationaryExample::from_id("n3p5").unwrap();
    let r = stationary_wave_residual_with_coeff(ex, &phi, 0.5).unwrap();
    let expected = 0.25 * pair_poly(-2.5, 3, &CUTOFF3);
    assert!(
        (r.value - expected).abs() < 1e-9,
        "{} vs {expected}",
        r.value
    );
    assert!(r.value.abs() > 0.1);
}

#[test]
fn residual_table_covers_both_examples() {
    let family = RadialTestFn::standard_family();
    let rows = residual_table(&family).unwrap();
    assert!(rows.len() >= 2 * family.len());
    assert!(rows.iter().all(|r| r.residual.abs() < 1e-7));
}

fn scaled_profile(a: f64, b: f64) -> RadialTestFn {
    RadialTestFn::new(format!("{a}*bump+{b}*cutoff"), 1.0, move |r| {
        let bump = anomalab_core::testfn::standard_bump(r) * a;
        let cut = ((r * r) * -1.0 + 1.0).powi(3) * b;
        &bump + &cut
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn homogeneity(lambda in -2.9f64..3.0, r in 1e-3f64..10.0, s in 1e-3f64..10.0) {
        let f = PseudoFn::new(lambda, 3).unwrap();
        let lhs = f.eval(s * r);
        let rhs = s.powf(lambda) * f.eval(r);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
    }

    #[test]
    fn stationary_self_similarity(p in 2u32..8, mu in 0.01f64..100.0, r in 1e-3f64..10.0) {
        let f = PseudoFn::stationary(p, 3).unwrap();
        let k = 2.0 / (p as f64 - 1.0);
        let scaled = mu.powf(k) * f.eval(mu * r);
        prop_assert!((scaled - f.eval(r)).abs() <= 1e-12 * f.eval(r));
    }

    #[test]
    fn residual_is_linear_in_phi(a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let f = PseudoFn::new(-0.5, 3).unwrap();
        let mixed = weak_laplacian_residual(&f, &scaled_profile(a, b)).unwrap().value;
        let perturbed = stationary_wave_residual_with_coeff(
            StationaryExample::from_id("n3p5").unwrap(), &scaled_profile(a, b), 0.5,
        ).unwrap().value;
        let base = stationary_wave_residual_with_coeff(
            StationaryExample::from_id("n3p5").unwrap(), &cutoff3(), 0.5,
        ).unwrap().value;
        let bump_part = stationary_wave_residual_with_coeff(
            StationaryExample::from_id("n3p5").unwrap(), &scaled_profile(1.0, 0.0), 0.5,
        ).unwrap().value;
        prop_assert!(mixed.abs() < 1e-7);
        prop_assert!((perturbed - (a * bump_part + b * base)).abs() < 1e-8 * (1.0 + perturbed.abs()));
    }
}
