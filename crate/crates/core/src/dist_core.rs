//! Exact arithmetic in the differential algebra of boundary values generated by
//! `e_k = (w + i0)^(-k)` on an affine argument `w = αx + βt + γ`.
//!
//! The algebra multiplies by `e_j · e_k = e_{j+k}` and differentiates by
//! `d/dw e_k = -k e_{k+1}`. Boundary values from the lower half plane,
//! `(w - i0)^(-k)`, form a second copy of the same algebra; they arise when a
//! negatively oriented argument is normalized. The two copies never multiply
//! with each other.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{
    cimag, coeff_map_serde, creal, factorial, fmt_crational, int, ratio_serde, CRational, PiPoly,
    Rational,
};
use crate::quad::{integrate_with_breaks, QuadOptions};
use crate::testfn::TestFn;

/// Which half plane the boundary value is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `(w + i0)^(-k)`
    Upper,
    /// `(w - i0)^(-k)`
    Lower,
}

impl Side {
    fn flipped(self) -> Self {
        match self {
            Side::Upper => Side::Lower,
            Side::Lower => Side::Upper,
        }
    }

    /// Sign of the `iπδ` term in `(w ± i0)^(-1) = vp(1/w) ∓ iπδ(w)`.
    fn delta_sign(self) -> i64 {
        match self {
            Side::Upper => -1,
            Side::Lower => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Var {
    X,
    T,
}

/// Normalized affine argument `w = αx + βt + γ`: the first nonzero of
/// `(α, β)` equals 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineArg {
    #[serde(with = "ratio_serde")]
    alpha: Rational,
    #[serde(with = "ratio_serde")]
    beta: Rational,
    #[serde(with = "ratio_serde")]
    gamma: Rational,
    side: Side,
}

impl AffineArg {
    /// `w = x`, upper side.
    pub fn x() -> Self {
        Self {
            alpha: Rational::one(),
            beta: Rational::zero(),
            gamma: Rational::zero(),
            side: Side::Upper,
        }
    }

    /// Normalize a raw argument. Returns the normalized argument and the
    /// leading coefficient `ℓ`; the raw `(w ± i0)^(-k)` equals
    /// `ℓ^(-k) · (w/ℓ ± sgn(ℓ) i0)^(-k)`.
    pub fn normalize(
        alpha: Rational,
        beta: Rational,
        gamma: Rational,
        side: Side,
    ) -> Result<(Self, Rational)> {
        let lead = if !alpha.is_zero() {
            alpha.clone()
        } else if !beta.is_zero() {
            beta.clone()
        } else {
            return Err(Error::DegenerateArg);
        };
        let side = if lead.is_negative() {
            side.flipped()
        } else {
            side
        };
        Ok((
            Self {
                alpha: &alpha / &lead,
                beta: &beta / &lead,
                gamma: &gamma / &lead,
                side,
            },
            lead,
        ))
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    pub fn beta(&self) -> &Rational {
        &self.beta
    }

    pub fn gamma(&self) -> &Rational {
        &self.gamma
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn is_pure_x(&self) -> bool {
        self.beta.is_zero()
    }

    fn coefficient(&self, var: Var) -> &Rational {
        match var {
            Var::X => &self.alpha,
            Var::T => &self.beta,
        }
    }
}

impl fmt::Display for AffineArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (c, v) in [(&self.alpha, "x"), (&self.beta, "t"), (&self.gamma, "")] {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let body = match (mag.is_one(), v.is_empty()) {
                (true, false) => v.to_string(),
                (_, true) => mag.to_string(),
                _ => format!("{mag}{v}"),
            };
            let sign = if c.is_negative() { "-" } else { "+" };
            parts.push((sign, body));
        }
        let mut s = String::new();
        for (i, (sign, body)) in parts.iter().enumerate() {
            if i == 0 {
                if *sign == "-" {
                    s.push('-');
                }
            } else {
                s.push_str(&format!(" {sign} "));
            }
            s.push_str(body);
        }
        let tail = match self.side {
            Side::Upper => "+ i0",
            Side::Lower => "- i0",
        };
        write!(f, "{s} {tail}")
    }
}

/// Finite combination `Σ c_k (w ± i0)^(-k)` in canonical form (no zero
/// coefficients, normalized argument).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "DistExprRepr")]
pub struct DistExpr {
    arg: AffineArg,
    #[serde(with = "coeff_map_serde")]
    terms: BTreeMap<u32, CRational>,
}

#[derive(Deserialize)]
struct DistExprRepr {
    arg: AffineArg,
    #[serde(with = "coeff_map_serde")]
    terms: BTreeMap<u32, CRational>,
}

impl TryFrom<DistExprRepr> for DistExpr {
    type Error = Error;
    fn try_from(r: DistExprRepr) -> Result<Self> {
        DistExpr::from_raw(r.arg.alpha, r.arg.beta, r.arg.gamma, r.arg.side, r.terms)
    }
}

impl PartialEq for DistExpr {
    fn eq(&self, other: &Self) -> bool {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => true,
            (false, false) => self.arg == other.arg && self.terms == other.terms,
            _ => false,
        }
    }
}

impl Eq for DistExpr {}

impl DistExpr {
    /// Build from a raw (unnormalized) argument and coefficients of
    /// `(w ± i0)^(-k)`. Positive and negative rescalings of `w` are folded
    /// into the coefficients.
    pub fn from_raw(
        alpha: Rational,
        beta: Rational,
        gamma: Rational,
        side: Side,
        terms: impl IntoIterator<Item = (u32, CRational)>,
    ) -> Result<Self> {
        let (arg, lead) = AffineArg::normalize(alpha, beta, gamma, side)?;
        let inv = Rational::one() / lead;
        let mut out = Self::zero_on(arg);
        for (k, c) in terms {
            if k == 0 {
                return Err(Error::InvalidInput("pole order must be at least 1".into()));
            }
            let factor = creal(num_traits::pow(inv.clone(), k as usize));
            out.add_term(k, c * factor);
        }
        Ok(out)
    }

    /// `c · (w ± i0)^(-k)` on an already normalized argument.
    pub fn monomial(arg: AffineArg, k: u32, c: CRational) -> Self {
        assert!(k >= 1, "pole order must be at least 1");
        let mut out = Self::zero_on(arg);
        out.add_term(k, c);
        out
    }

    /// `e_k = (x + i0)^(-k)`.
    pub fn basis(k: u32) -> Self {
        Self::monomial(AffineArg::x(), k, creal(int(1)))
    }

    /// `u0 = 1/(x + i0)`.
    pub fn u0() -> Self {
        Self::basis(1)
    }

    /// `1/(a x + b t + γ + i0)`.
    pub fn reciprocal_affine(alpha: Rational, beta: Rational, gamma: Rational) -> Result<Self> {
        Self::from_raw(alpha, beta, gamma, Side::Upper, [(1, creal(int(1)))])
    }

    pub fn zero() -> Self {
        Self::zero_on(AffineArg::x())
    }

    pub fn zero_on(arg: AffineArg) -> Self {
        Self {
            arg,
            terms: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn arg(&self) -> &AffineArg {
        &self.arg
    }

    pub fn terms(&self) -> &BTreeMap<u32, CRational> {
        &self.terms
    }

    pub fn coeff(&self, k: u32) -> CRational {
        self.terms.get(&k).cloned().unwrap_or_else(CRational::zero)
    }

    pub fn max_order(&self) -> u32 {
        self.terms.keys().next_back().copied().unwrap_or(0)
    }

    fn add_term(&mut self, k: u32, c: CRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(k).or_insert_with(CRational::zero);
        *slot = &*slot + c;
        if slot.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn scale(&self, c: &CRational) -> Self {
        let mut out = Self::zero_on(self.arg.clone());
        for (k, v) in &self.terms {
            out.add_term(*k, v * c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&creal(int(-1)))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(other.clone());
        }
        self.check_arg(other)?;
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(*k, v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    fn check_arg(&self, other: &Self) -> Result<()> {
        if self.arg != other.arg {
            return Err(Error::ArgMismatch {
                left: self.arg.to_string(),
                right: other.arg.to_string(),
            });
        }
        Ok(())
    }

    pub fn pow(&self, p: u32) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidInput(
                "the unit is not an element of the boundary-value span".into(),
            ));
        }
        let mut acc = self.clone();
        for _ in 1..p {
            acc = mul(&acc, self)?;
        }
        Ok(acc)
    }

    /// Value of the regularization `Σ c_k (w ± iε)^(-k)` at a real point `w`.
    pub fn eval_regularized(&self, w: f64, eps: f64) -> Complex64 {
        let z = match self.arg.side {
            Side::Upper => Complex64::new(w, eps),
            Side::Lower => Complex64::new(w, -eps),
        };
        self.terms
            .iter()
            .map(|(k, c)| crate::exact::crational_to_c64(c) * z.powi(-(*k as i32)))
            .sum()
    }
}

impl fmt::Display for DistExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, c)| format!("{}·({})^-{}", fmt_crational(c), self.arg, k))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Product in the algebra: bilinear with `e_j · e_k = e_{j+k}`.
pub fn mul(a: &DistExpr, b: &DistExpr) -> Result<DistExpr> {
    if a.is_zero() || b.is_zero() {
        let arg = if a.is_zero() { &b.arg } else { &a.arg };
        return Ok(DistExpr::zero_on(arg.clone()));
    }
    a.check_arg(b)?;
    let mut out = DistExpr::zero_on(a.arg.clone());
    for (j, cj) in &a.terms {
        for (k, ck) in &b.terms {
            out.add_term(j + k, cj * ck);
        }
    }
    Ok(out)
}

/// Partial derivative in `x` or `t`: `∂ = (∂w/∂var) d/dw`, `d/dw e_k = -k e_{k+1}`.
pub fn diff(a: &DistExpr, var: Var) -> DistExpr {
    let factor = a.arg.coefficient(var).clone();
    let mut out = DistExpr::zero_on(a.arg.clone());
    if factor.is_zero() {
        return out;
    }
    for (k, c) in &a.terms {
        let scale = creal(&factor * int(-(*k as i64)));
        out.add_term(k + 1, c * scale);
    }
    out
}

pub fn diff_n(a: &DistExpr, var: Var, n: u32) -> DistExpr {
    (0..n).fold(a.clone(), |acc, _| diff(&acc, var))
}

/// Classical decomposition into finite parts and δ-derivatives in the
/// variable `w`: `Σ p_k Pf(1/w^k) + Σ d_j δ^(j)(w)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalPart {
    pub arg: AffineArg,
    /// Coefficients of `Pf(1/w^k)`; `k = 1` is `vp(1/w)`.
    #[serde(with = "coeff_map_serde")]
    pub pf_terms: BTreeMap<u32, CRational>,
    /// Coefficients of `δ^(j)(w)`.
    pub delta_terms: BTreeMap<u32, PiPoly>,
}

impl ClassicalPart {
    pub fn new(arg: AffineArg) -> Self {
        Self {
            arg,
            pf_terms: BTreeMap::new(),
            delta_terms: BTreeMap::new(),
        }
    }

    /// `vp(1/x)` alone.
    pub fn principal_value() -> Self {
        let mut out = Self::new(AffineArg::x());
        out.pf_terms.insert(1, creal(int(1)));
        out
    }

    /// The finite-part terms with all δ terms dropped.
    pub fn pf_part(&self) -> Self {
        Self {
            arg: self.arg.clone(),
            pf_terms: self.pf_terms.clone(),
            delta_terms: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.pf_terms.is_empty() && self.delta_terms.is_empty()
    }

    pub fn max_pf_order(&self) -> u32 {
        self.pf_terms.keys().next_back().copied().unwrap_or(0)
    }

    pub fn max_delta_order(&self) -> Option<u32> {
        self.delta_terms.keys().next_back().copied()
    }
}

/// `(w ± i0)^(-k) = Pf(1/w^k) ∓ iπ (-1)^(k-1)/(k-1)! δ^(k-1)(w)`.
pub fn decompose(a: &DistExpr) -> ClassicalPart {
    let mut out = ClassicalPart::new(a.arg.clone());
    let sign = a.arg.side.delta_sign();
    for (k, c) in &a.terms {
        out.pf_terms.insert(*k, c.clone());
        let j = k - 1;
        let parity = if j % 2 == 0 { 1 } else { -1 };
        let scalar = cimag(int(sign * parity) / factorial(j));
        let d = PiPoly::monomial(c * scalar, 1);
        if !d.is_zero() {
            out.delta_terms.insert(j, d);
        }
    }
    out
}

/// Term `c · ξ^m · H(ξ)` of a Fourier transform.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FourierMonomial {
    pub m: u32,
    pub coeff: PiPoly,
}

impl fmt::Display for FourierMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})·ξ^{}·H(ξ)", self.coeff, self.m)
    }
}

/// Fourier transform (`Fφ(ξ) = ∫ e^{-2πixξ} φ(x) dx`) of an element on `w = x`:
/// `F e_k = (-2πi)^k ξ^(k-1)/(k-1)! · H(ξ)`.
pub fn fourier(a: &DistExpr) -> Result<Vec<FourierMonomial>> {
    if !a.is_zero() && a.arg != AffineArg::x() {
        return Err(Error::UnsupportedArg(format!(
            "Fourier transform needs w = x + i0, got {}",
            a.arg
        )));
    }
    Ok(a.terms
        .iter()
        .map(|(k, c)| {
            let minus_two_i = cimag(int(-2));
            let mut base = creal(int(1));
            for _ in 0..*k {
                base = base * &minus_two_i;
            }
            let base = base * creal(Rational::one() / factorial(k - 1));
            FourierMonomial {
                m: k - 1,
                coeff: PiPoly::monomial(c * base, *k as i32),
            }
        })
        .collect())
}

/// `(c₁ξ^m H) ∗ (c₂ξ^n H) = c₁c₂ · m!n!/(m+n+1)! · ξ^(m+n+1) H`.
pub fn conv_fourier(f: &FourierMonomial, g: &FourierMonomial) -> FourierMonomial {
    let beta = factorial(f.m) * factorial(g.m) / factorial(f.m + g.m + 1);
    FourierMonomial {
        m: f.m + g.m + 1,
        coeff: (&f.coeff * &g.coeff).scale(&creal(beta)),
    }
}

/// Collect a list of monomials by power of ξ, dropping zero sums.
pub fn collect_fourier(terms: &[FourierMonomial]) -> BTreeMap<u32, PiPoly> {
    let mut out: BTreeMap<u32, PiPoly> = BTreeMap::new();
    for t in terms {
        let e = out.entry(t.m).or_default();
        *e = &*e + &t.coeff;
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// Convolution of two finite sums of Fourier monomials.
pub fn conv_fourier_sums(f: &[FourierMonomial], g: &[FourierMonomial]) -> Vec<FourierMonomial> {
    f.iter()
        .flat_map(|a| g.iter().map(move |b| conv_fourier(a, b)))
        .collect()
}

/// Whether the product `a·b` exists in this algebra: the singular rays
/// (normalized arguments with orientation) must coincide. The zero element is
/// compatible with everything.
pub fn hormander_compatible(a: &DistExpr, b: &DistExpr) -> bool {
    a.is_zero() || b.is_zero() || a.arg == b.arg
}

/// `⟨a, φ⟩` for an element on `w = x + γ`.
///
/// Higher poles are reduced to `e_1` against derivatives of `φ`:
/// `⟨e_k, φ⟩ = (1/(k-1)!) ⟨e_1, φ^(k-1)⟩`, with
/// `⟨e_1^±, g⟩ = ∫_0^∞ (g(w) - g(-w))/w dw ∓ iπ g(0)`.
pub fn pair(a: &DistExpr, phi: &TestFn, opts: &QuadOptions) -> Result<Complex64> {
    if a.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if !a.arg.is_pure_x() {
        return Err(Error::UnsupportedArg(format!(
            "pairing against a function of x needs a t-independent argument, got {}",
            a.arg
        )));
    }
    let order = (a.max_order() - 1) as usize;
    if !phi.smoothness().allows(order + 1) {
        return Err(Error::InsufficientSmoothness {
            name: phi.name().to_string(),
            available: phi.smoothness().max_order(),
            required: order + 1,
        });
    }
    let gamma = crate::exact::rational_to_f64(&a.arg.gamma);
    let weights: Vec<(usize, Complex64)> = a
        .terms
        .iter()
        .map(|(k, c)| {
            let j = (*k - 1) as usize;
            let w = crate::exact::crational_to_c64(c)
                / crate::exact::rational_to_f64(&factorial(j as u32));
            (j, w)
        })
        .collect();
    // g(w) = Σ c_k/(k-1)! · φ^(k-1)(w - γ)
    let g = |w: f64| -> Complex64 {
        let jet = phi.jet(w - gamma, order);
        weights.iter().map(|(j, c)| c * jet.derivative(*j)).sum()
    };
    let (s0, s1) = phi.support();
    let (a0, a1) = (s0 + gamma, s1 + gamma);
    let reach = a0.abs().max(a1.abs());
    let breaks = [a0.abs(), a1.abs()];
    let pv = integrate_with_breaks(|w: f64| (g(w) - g(-w)) / w, 0.0, reach, &breaks, opts)?;
    let delta = Complex64::new(0.0, std::f64::consts::PI * a.arg.side.delta_sign() as f64) * g(0.0);
    Ok(pv.value + delta)
}

/// One term `coeff · ∂_x^dx ∂_t^dt (u^power)` of a polynomial differential
/// operator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PdeTerm {
    #[serde(with = "ratio_serde")]
    pub coeff: Rational,
    pub dx: u32,
    pub dt: u32,
    pub power: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PdeSpec {
    pub name: String,
    pub terms: Vec<PdeTerm>,
}

impl PdeSpec {
    /// `(1/c) ∂_t u + ∂_x u + u²`.
    pub fn advection_reaction(c: Rational) -> Result<Self> {
        if c.is_zero() {
            return Err(Error::InvalidInput(
                "advection speed must be nonzero".into(),
            ));
        }
        Ok(Self {
            name: format!("(1/c)u_t + u_x + u^2, c = {c}"),
            terms: vec![
                PdeTerm {
                    coeff: Rational::one() / &c,
                    dx: 0,
                    dt: 1,
                    power: 1,
                },
                PdeTerm {
                    coeff: int(1),
                    dx: 1,
                    dt: 0,
                    power: 1,
                },
                PdeTerm {
                    coeff: int(1),
                    dx: 0,
                    dt: 0,
                    power: 2,
                },
            ],
        })
    }

    /// `(1/c²) ∂_t² u − ∂_x² u + 2u³`.
    pub fn wave_cubic(c: Rational) -> Result<Self> {
        if c.is_zero() {
            return Err(Error::InvalidInput("wave speed must be nonzero".into()));
        }
        Ok(Self {
            name: format!("(1/c^2)u_tt - u_xx + 2u^3, c = {c}"),
            terms: vec![
                PdeTerm {
                    coeff: Rational::one() / (&c * &c),
                    dx: 0,
                    dt: 2,
                    power: 1,
                },
                PdeTerm {
                    coeff: int(-1),
                    dx: 2,
                    dt: 0,
                    power: 1,
                },
                PdeTerm {
                    coeff: int(2),
                    dx: 0,
                    dt: 0,
                    power: 3,
                },
            ],
        })
    }
}

/// Symbolic residual of `pde` applied to `u`; the zero element certifies a
/// solution in the sense of the algebra product.
pub fn pde_residual(u: &DistExpr, pde: &PdeSpec) -> Result<DistExpr> {
    let mut acc = DistExpr::zero_on(u.arg.clone());
    for term in &pde.terms {
        let p = u.pow(term.power)?;
        let d = diff_n(&diff_n(&p, Var::X, term.dx), Var::T, term.dt);
        acc = acc.add(&d.scale(&creal(term.coeff.clone())))?;
    }
    Ok(acc)
}
