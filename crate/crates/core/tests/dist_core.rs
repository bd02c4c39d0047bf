use anomalab_core::dist_core::{
    collect_fourier, conv_fourier, conv_fourier_sums, decompose, diff, diff_n, fourier,
    hormander_compatible, mul, pair, pde_residual, AffineArg, DistExpr, FourierMonomial, PdeSpec,
    Side, Var,
};
use anomalab_core::exact::{cimag, creal, int, rat, CRational, PiPoly, Rational};
use anomalab_core::quad::{gauss_legendre, QuadOptions};
use anomalab_core::testfn::TestFn;
use anomalab_core::Error;
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn e(k: u32) -> DistExpr {
    DistExpr::basis(k)
}

fn cr(re: i64, im: i64, d: i64) -> CRational {
    CRational::new(rat(re, d), rat(im, d))
}

fn expr_on_x() -> impl Strategy<Value = DistExpr> {
    prop::collection::vec((1u32..=4, -6i64..=6, -6i64..=6, 1i64..=4), 0..4).prop_map(|terms| {
        terms
            .into_iter()
            .fold(DistExpr::zero_on(AffineArg::x()), |acc, (k, re, im, d)| {
                acc.add(&DistExpr::monomial(AffineArg::x(), k, cr(re, im, d)))
                    .unwrap()
            })
    })
}

fn scalar() -> impl Strategy<Value = CRational> {
    (-5i64..=5, -5i64..=5, 1i64..=3).prop_map(|(a, b, d)| cr(a, b, d))
}

#[test]
fn mul_examples() {
    assert_eq!(mul(&e(1), &e(1)).unwrap(), e(2));
    let cube = mul(&mul(&e(1), &e(1)).unwrap(), &e(1)).unwrap();
    assert_eq!(cube, e(3));
    assert_eq!(
        cube.scale(&creal(int(2))),
        diff(&diff(&e(1), Var::X), Var::X)
    );
    assert!(mul(&DistExpr::zero(), &e(5)).unwrap().is_zero());
}

#[test]
fn mul_rejects_mismatched_arguments() {
    let shifted = DistExpr::reciprocal_affine(int(1), int(0), int(1)).unwrap();
    assert!(matches!(
        mul(&e(1), &shifted),
        Err(Error::ArgMismatch { .. })
    ));
}

#[test]
fn diff_examples() {
    assert_eq!(diff(&e(1), Var::X), e(2).neg());
    assert_eq!(diff_n(&e(1), Var::X, 2), e(3).scale(&creal(int(2))));
    assert!(diff(&DistExpr::zero(), Var::T).is_zero());
    // pure-x argument has no t dependence
    assert!(diff(&e(4), Var::T).is_zero());
}

#[test]
fn diff_follows_chain_rule_on_affine_arguments() {
    // w = 3x - 2t: ∂_t = -2 d/dw after normalization by the lead 3
    let u = DistExpr::reciprocal_affine(int(3), int(-2), int(0)).unwrap();
    let ux = diff(&u, Var::X);
    let ut = diff(&u, Var::T);
    assert_eq!(ux.scale(&creal(rat(-2, 3))), ut);
}

#[test]
fn normalization_folds_scale_and_orientation() {
    let u = DistExpr::from_raw(int(2), int(0), int(0), Side::Upper, [(1, creal(int(1)))]).unwrap();
    assert_eq!(u.arg(), &AffineArg::x());
    assert_eq!(u.coeff(1), creal(rat(1, 2)));

    let v = DistExpr::from_raw(int(-1), int(0), int(0), Side::Upper, [(2, creal(int(1)))]).unwrap();
    assert_eq!(v.arg().side(), Side::Lower);
    assert_eq!(v.coeff(2), creal(int(1)));

    assert!(matches!(
        DistExpr::from_raw(int(0), int(0), int(1), Side::Upper, [(1, creal(int(1)))]),
        Err(Error::DegenerateArg)
    ));
}

#[test]
fn decompose_examples() {
    let d1 = decompose(&e(1));
    assert_eq!(d1.pf_terms.get(&1), Some(&creal(int(1))));
    assert_eq!(
        d1.delta_terms.get(&0),
        Some(&PiPoly::monomial(cimag(int(-1)), 1))
    );

    let d2 = decompose(&e(2));
    assert_eq!(d2.pf_terms.get(&2), Some(&creal(int(1))));
    assert_eq!(
        d2.delta_terms.get(&1),
        Some(&PiPoly::monomial(cimag(int(1)), 1))
    );

    let d3 = decompose(&e(3));
    assert_eq!(d3.pf_terms.get(&3), Some(&creal(int(1))));
    assert_eq!(
        d3.delta_terms.get(&2),
        Some(&PiPoly::monomial(cimag(rat(-1, 2)), 1))
    );
}

#[test]
fn decompose_lower_side_flips_delta_sign() {
    let lower = DistExpr::monomial(
        AffineArg::normalize(int(1), int(0), int(0), Side::Lower)
            .unwrap()
            .0,
        1,
        creal(int(1)),
    );
    let d = decompose(&lower);
    assert_eq!(
        d.delta_terms.get(&0),
        Some(&PiPoly::monomial(cimag(int(1)), 1))
    );
}

#[test]
fn fourier_examples() {
    let f1 = fourier(&e(1)).unwrap();
    assert_eq!(
        f1,
        vec![FourierMonomial {
            m: 0,
            coeff: PiPoly::monomial(cimag(int(-2)), 1)
        }]
    );
    let f2 = fourier(&e(2)).unwrap();
    assert_eq!(
        f2,
        vec![FourierMonomial {
            m: 1,
            coeff: PiPoly::monomial(creal(int(-4)), 2)
        }]
    );
    // F[e3] = (2πi)ξ F[e2] / (-2) ... = (-2πi)^3 ξ²/2 = 4π³ i ξ²
    let f3 = fourier(&e(3)).unwrap();
    assert_eq!(
        f3,
        vec![FourierMonomial {
            m: 2,
            coeff: PiPoly::monomial(cimag(int(4)), 3)
        }]
    );
}

#[test]
fn fourier_rejects_shifted_arguments() {
    let shifted = DistExpr::reciprocal_affine(int(1), int(0), int(1)).unwrap();
    assert!(matches!(fourier(&shifted), Err(Error::UnsupportedArg(_))));
    let moving = DistExpr::reciprocal_affine(int(1), int(1), int(0)).unwrap();
    assert!(fourier(&moving).is_err());
}

#[test]
fn conv_fourier_examples() {
    let h = |c: CRational, pi: i32, m: u32| FourierMonomial {
        m,
        coeff: PiPoly::monomial(c, pi),
    };
    let a = h(cimag(int(-2)), 1, 0);
    assert_eq!(conv_fourier(&a, &a), h(creal(int(-4)), 2, 1));
    let one = h(creal(int(1)), 0, 0);
    assert_eq!(conv_fourier(&one, &one), h(creal(int(1)), 0, 1));
    let xi = h(creal(int(1)), 0, 1);
    assert_eq!(conv_fourier(&xi, &xi), h(creal(rat(1, 6)), 0, 3));
}

#[test]
fn hormander_examples() {
    let conj =
        DistExpr::from_raw(int(-1), int(0), int(0), Side::Upper, [(1, creal(int(1)))]).unwrap();
    assert!(hormander_compatible(&e(1), &e(1)));
    assert!(!hormander_compatible(&e(1), &conj));
    assert!(hormander_compatible(&e(1), &DistExpr::zero()));
    assert!(mul(&e(1), &conj).is_err());
}

#[test]
fn pair_e1_even_test_function() {
    let phi = TestFn::unit_bump();
    let v = pair(&e(1), &phi, &QuadOptions::default()).unwrap();
    assert!(v.re.abs() < 1e-12);
    assert!((v.im + PI).abs() < 1e-12);
}

/// `lim_{ε→0} ∫ φ(x) (x+iε)^{-2} dx` by Gauss–Legendre on graded panels and
/// Richardson extrapolation in ε.
fn e2_limit_oracle(phi: &TestFn) -> Complex64 {
    let (nodes, weights) = gauss_legendre(20);
    let at = |eps: f64| -> Complex64 {
        let mut edges = vec![0.0];
        let mut w = eps / 8.0;
        while w < 1.0 {
            edges.push(w);
            w *= 1.5;
        }
        edges.push(1.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for pair in edges.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            for (x, wt) in nodes.iter().zip(&weights) {
                let s = 0.5 * (b - a) * x + 0.5 * (a + b);
                for y in [s, -s] {
                    let z = Complex64::new(y, eps);
                    sum += 0.5 * (b - a) * wt * phi.eval(y) / (z * z);
                }
            }
        }
        sum
    };
    // the boundary value is smooth in ε: eliminate the ε and ε² terms
    let (a, b, c) = (at(1e-3), at(5e-4), at(2.5e-4));
    let r1 = 2.0 * b - a;
    let r2 = 2.0 * c - b;
    (4.0 * r2 - r1) / 3.0
}

#[test]
fn pair_e2_matches_eps_limit() {
    let phi = TestFn::normalized_bump();
    let exact = pair(&e(2), &phi, &QuadOptions::default()).unwrap();
    let oracle = e2_limit_oracle(&phi);
    assert!((exact - oracle).norm() < 1e-8, "{exact} vs {oracle}");
    assert!((exact.re - -3.525659091209).abs() < 1e-9);
}

#[test]
fn pair_scaling_fold() {
    let phi = TestFn::unit_bump();
    let opts = QuadOptions::default();
    let u = DistExpr::from_raw(int(2), int(0), int(0), Side::Upper, [(1, creal(int(1)))]).unwrap();
    let lhs = pair(&u, &phi, &opts).unwrap();
    let rescaled = phi.affine(2.0, 0.0, 1.0);
    let rhs = pair(&e(1), &rescaled, &opts).unwrap() * 0.5;
    assert!((lhs - rhs).norm() < 1e-10);
}

#[test]
fn pair_needs_smoothness() {
    let phi = TestFn::polynomial_cutoff(2);
    assert!(matches!(
        pair(&e(4), &phi, &QuadOptions::default()),
        Err(Error::InsufficientSmoothness { .. })
    ));
}

#[test]
fn pde_residual_examples() {
    for c in [int(1), rat(3, 2), int(-2)] {
        let pde = PdeSpec::advection_reaction(c.clone()).unwrap();
        assert!(pde_residual(&e(1), &pde).unwrap().is_zero());

        let u = DistExpr::reciprocal_affine(int(2), &int(-1) * &c, int(0)).unwrap();
        assert!(pde_residual(&u, &pde).unwrap().is_zero());

        // a + b = 2: residual (a+b-1)·(-e2) in the normalized variable
        let (a, b) = (int(3), int(-1));
        let u = DistExpr::reciprocal_affine(a.clone(), &b * &c, int(0)).unwrap();
        let res = pde_residual(&u, &pde).unwrap();
        let scale: Rational = Rational::from_integer(1.into()) / (&a * &a);
        let expected = DistExpr::monomial(u.arg().clone(), 2, creal(-(&a + &b - int(1)) * scale));
        assert_eq!(res, expected);
    }
}

/// `⟨Pf(1/x^k), φ⟩` by symmetrized Taylor subtraction on [0, 1]: the
/// Taylor polynomial's finite-part integrals are taken in closed form and the
/// remainder near 0 is summed from the series.
fn pf_oracle(k: u32, phi: &TestFn) -> f64 {
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let taylor_order = k as usize + 12;
    let d0 = phi.jet(0.0, taylor_order).derivatives();
    let fact = |j: usize| (1..=j).map(|i| i as f64).product::<f64>();
    // numerator φ(x) + (-1)^k φ(-x) = Σ_{j ≡ k mod 2} 2 φ^(j)(0) x^j / j!
    let sub = |x: f64| -> f64 {
        (0..k as usize)
            .filter(|j| (j % 2) == (k as usize % 2))
            .map(|j| 2.0 * d0[j] * x.powi(j as i32) / fact(j))
            .sum()
    };
    let delta: f64 = 0.05;
    let mut total = 0.0;
    for j in (k as usize..=taylor_order).filter(|j| (j % 2) == (k as usize % 2)) {
        let m = (j - k as usize + 1) as i32;
        total += 2.0 * d0[j] / fact(j) * delta.powi(m) / m as f64;
    }
    let (nodes, weights) = gauss_legendre(24);
    let panels = 64;
    let h = (1.0 - delta) / panels as f64;
    for p in 0..panels {
        let a = delta + p as f64 * h;
        for (x, w) in nodes.iter().zip(&weights) {
            let s = a + 0.5 * h * (x + 1.0);
            let num = phi.eval(s) + sign * phi.eval(-s) - sub(s);
            total += 0.5 * h * w * num / s.powi(k as i32);
        }
    }
    for j in (0..k as usize).filter(|j| (j % 2) == (k as usize % 2)) {
        let m = j as f64 - k as f64 + 1.0;
        total += 2.0 * d0[j] / fact(j) / m;
    }
    total
}

#[test]
fn decomposition_consistency() {
    let phis = [
        TestFn::normalized_bump(),
        TestFn::bump().affine(0.7, 0.2, 1.0),
        TestFn::unit_bump().times("1+x", |x| x.offset(1.0)),
    ];
    let opts = QuadOptions::default();
    for phi in &phis {
        for k in 1..=4u32 {
            let c = cr(3, -2, 5);
            let a = DistExpr::monomial(AffineArg::x(), k, c.clone());
            let direct = pair(&a, phi, &opts).unwrap();
            let parts = decompose(&a);
            let mut via = Complex64::new(0.0, 0.0);
            for (k, c) in &parts.pf_terms {
                via += anomalab_core::exact::crational_to_c64(c) * pf_oracle(*k, phi);
            }
            for (j, d) in &parts.delta_terms {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                via += d.to_c64() * s * phi.derivative(0.0, *j as usize);
            }
            assert!(
                (direct - via).norm() < 1e-8,
                "k={k} {}: {direct} vs {via}",
                phi.name()
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mul_is_commutative(a in expr_on_x(), b in expr_on_x()) {
        prop_assert_eq!(mul(&a, &b).unwrap(), mul(&b, &a).unwrap());
    }

    #[test]
    fn mul_is_associative(a in expr_on_x(), b in expr_on_x(), c in expr_on_x()) {
        let l = mul(&mul(&a, &b).unwrap(), &c).unwrap();
        let r = mul(&a, &mul(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn mul_is_bilinear(a in expr_on_x(), b in expr_on_x(), c in expr_on_x(), s in scalar()) {
        let l = mul(&a.add(&b.scale(&s)).unwrap(), &c).unwrap();
        let r = mul(&a, &c).unwrap().add(&mul(&b, &c).unwrap().scale(&s)).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn diff_is_a_derivation(a in expr_on_x(), b in expr_on_x()) {
        let l = diff(&mul(&a, &b).unwrap(), Var::X);
        let r = mul(&diff(&a, Var::X), &b).unwrap().add(&mul(&a, &diff(&b, Var::X)).unwrap()).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn diff_is_a_derivation_on_moving_arguments(
        alpha in 1i64..5, beta in -4i64..5, j in 1u32..4, k in 1u32..4,
    ) {
        let arg = AffineArg::normalize(int(alpha), int(beta), int(0), Side::Upper).unwrap().0;
        let a = DistExpr::monomial(arg.clone(), j, creal(int(2)));
        let b = DistExpr::monomial(arg, k, cimag(int(1)));
        for var in [Var::X, Var::T] {
            let l = diff(&mul(&a, &b).unwrap(), var);
            let r = mul(&diff(&a, var), &b).unwrap().add(&mul(&a, &diff(&b, var)).unwrap()).unwrap();
            prop_assert_eq!(l, r);
        }
    }

    #[test]
    fn fourier_is_a_homomorphism(a in expr_on_x(), b in expr_on_x()) {
        let lhs = collect_fourier(&fourier(&mul(&a, &b).unwrap()).unwrap());
        let rhs = collect_fourier(&conv_fourier_sums(&fourier(&a).unwrap(), &fourier(&b).unwrap()));
        prop_assert_eq!(lhs, rhs);
    }
}

#[test]
fn fourier_homomorphism_on_basis_up_to_eight() {
    for j in 1..=8u32 {
        for k in 1..=8u32 {
            let lhs = collect_fourier(&fourier(&mul(&e(j), &e(k)).unwrap()).unwrap());
            let rhs = collect_fourier(&conv_fourier_sums(
                &fourier(&e(j)).unwrap(),
                &fourier(&e(k)).unwrap(),
            ));
            assert_eq!(lhs, rhs, "j={j} k={k}");
        }
    }
}

#[test]
fn identity_chain() {
    let sq = mul(&e(1), &e(1)).unwrap();
    assert_eq!(sq, diff(&e(1), Var::X).neg());
    let cube2 = mul(&e(1), &sq).unwrap().scale(&creal(int(2)));
    assert_eq!(cube2, diff(&diff(&e(1), Var::X), Var::X));
}

#[test]
fn serde_round_trip() {
    let a = DistExpr::reciprocal_affine(int(2), rat(-3, 4), rat(1, 3)).unwrap();
    let json = serde_json::to_string(&a).unwrap();
    let back: DistExpr = serde_json::from_str(&json).unwrap();
    assert_eq!(a, back);
}
