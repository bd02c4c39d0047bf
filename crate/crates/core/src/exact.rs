//! Exact scalars: complex rationals, and finite sums of complex rationals
//! times integer powers of π.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;
pub type CRational = Complex<BigRational>;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn creal(r: Rational) -> CRational {
    Complex::new(r, Rational::zero())
}

pub fn cimag(r: Rational) -> CRational {
    Complex::new(Rational::zero(), r)
}

pub fn factorial(n: u32) -> Rational {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    BigRational::from_integer(acc)
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn crational_to_c64(c: &CRational) -> Complex64 {
    Complex64::new(rational_to_f64(&c.re), rational_to_f64(&c.im))
}

/// Exact conversion of a finite `f64` to a rational.
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    BigRational::from_float(x).ok_or_else(|| Error::InvalidInput(format!("non-finite value {x}")))
}

/// Always "p/q", including integers ("3/1").
pub fn ratio_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Accepts "p/q", "p", or a decimal literal such as "-0.25" (read exactly).
pub fn parse_ratio(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("not a rational number: `{s}`"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Ok(BigRational::from_integer(n));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let negative = mantissa.starts_with('-');
    let digits = mantissa.trim_start_matches(['-', '+']);
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part
            .chars()
            .chain(frac_part.chars())
            .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all: BigInt = format!("0{int_part}{frac_part}")
        .parse()
        .map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(all);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -r } else { r })
}

pub fn fmt_crational(c: &CRational) -> String {
    match (c.re.is_zero(), c.im.is_zero()) {
        (true, true) => "0".into(),
        (false, true) => c.re.to_string(),
        (true, false) => format!("{}i", c.im),
        (false, false) => {
            let sign = if c.im.is_negative() { '-' } else { '+' };
            format!("({}{}{}i)", c.re, sign, c.im.abs())
        }
    }
}

/// Serde representation of a complex rational: `{"re": "p/q", "im": "p/q"}`.
#[derive(Serialize, Deserialize)]
struct CRationalRepr {
    re: String,
    im: String,
}

pub mod crational_serde {
    use super::*;

    pub fn serialize<S: Serializer>(c: &CRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        CRationalRepr {
            re: ratio_string(&c.re),
            im: ratio_string(&c.im),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<CRational, D::Error> {
        let r = CRationalRepr::deserialize(d)?;
        let re = parse_ratio(&r.re).map_err(serde::de::Error::custom)?;
        let im = parse_ratio(&r.im).map_err(serde::de::Error::custom)?;
        Ok(Complex::new(re, im))
    }
}

pub mod ratio_serde {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&ratio_string(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_ratio(&s).map_err(serde::de::Error::custom)
    }
}

/// Map of integer keys to complex rationals, serialized with string keys.
pub mod coeff_map_serde {
    use super::*;

    pub fn serialize<K: Copy + fmt::Display, S: Serializer>(
        m: &BTreeMap<K, CRational>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let repr: BTreeMap<String, CRationalRepr> = m
            .iter()
            .map(|(k, c)| {
                (
                    k.to_string(),
                    CRationalRepr {
                        re: ratio_string(&c.re),
                        im: ratio_string(&c.im),
                    },
                )
            })
            .collect();
        repr.serialize(s)
    }

    pub fn deserialize<'de, K, D>(d: D) -> std::result::Result<BTreeMap<K, CRational>, D::Error>
    where
        K: Ord + std::str::FromStr,
        D: Deserializer<'de>,
    {
        let repr = BTreeMap::<String, CRationalRepr>::deserialize(d)?;
        let mut out = BTreeMap::new();
        for (k, v) in repr {
            let key = k
                .parse::<K>()
                .map_err(|_| serde::de::Error::custom(format!("bad key `{k}`")))?;
            let re = parse_ratio(&v.re).map_err(serde::de::Error::custom)?;
            let im = parse_ratio(&v.im).map_err(serde::de::Error::custom)?;
            out.insert(key, Complex::new(re, im));
        }
        Ok(out)
    }
}

/// Exact number `Σ_p c_p π^p` with complex-rational `c_p`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PiPoly {
    terms: BTreeMap<i32, CRational>,
}

impl PiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(coeff: CRational, pi_power: i32) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(pi_power, coeff);
        }
        Self { terms }
    }

    pub fn rational(c: CRational) -> Self {
        Self::monomial(c, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &BTreeMap<i32, CRational> {
        &self.terms
    }

    /// The single `(coefficient, π-power)` pair, if this is a monomial.
    pub fn as_monomial(&self) -> Option<(&CRational, i32)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(p, c)| (c, *p))
        } else {
            None
        }
    }

    pub fn scale(&self, c: &CRational) -> Self {
        let mut out = Self::zero();
        for (p, v) in &self.terms {
            out.add_term(*p, v * c);
        }
        out
    }

    fn add_term(&mut self, p: i32, c: CRational) {
        let slot = self.terms.entry(p).or_insert_with(CRational::zero);
        *slot = &*slot + c;
        if slot.is_zero() {
            self.terms.remove(&p);
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        self.terms
            .iter()
            .map(|(p, c)| crational_to_c64(c) * std::f64::consts::PI.powi(*p))
            .sum()
    }
}

impl Add for &PiPoly {
    type Output = PiPoly;
    fn add(self, rhs: &PiPoly) -> PiPoly {
        let mut out = self.clone();
        for (p, c) in &rhs.terms {
            out.add_term(*p, c.clone());
        }
        out
    }
}

impl Sub for &PiPoly {
    type Output = PiPoly;
    fn sub(self, rhs: &PiPoly) -> PiPoly {
        self + &(-rhs)
    }
}

impl Neg for &PiPoly {
    type Output = PiPoly;
    fn neg(self) -> PiPoly {
        PiPoly {
            terms: self.terms.iter().map(|(p, c)| (*p, -c.clone())).collect(),
        }
    }
}

impl Mul for &PiPoly {
    type Output = PiPoly;
    fn mul(self, rhs: &PiPoly) -> PiPoly {
        let mut out = PiPoly::zero();
        for (p, a) in &self.terms {
            for (q, b) in &rhs.terms {
                out.add_term(p + q, a * b);
            }
        }
        out
    }
}

impl fmt::Display for PiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(p, c)| match p {
                0 => fmt_crational(c),
                1 => format!("{}·π", fmt_crational(c)),
                _ => format!("{}·π^{}", fmt_crational(c), p),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Serialized as a list of `{"pi_power": p, "re": "a/b", "im": "c/d"}`.
impl Serialize for PiPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term {
            pi_power: i32,
            re: String,
            im: String,
        }
        let v: Vec<Term> = self
            .terms
            .iter()
            .map(|(p, c)| Term {
                pi_power: *p,
                re: ratio_string(&c.re),
                im: ratio_string(&c.im),
            })
            .collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PiPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Term {
            pi_power: i32,
            re: String,
            im: String,
        }
        let v = Vec::<Term>::deserialize(d)?;
        let mut out = PiPoly::zero();
        for t in v {
            let re = parse_ratio(&t.re).map_err(serde::de::Error::custom)?;
            let im = parse_ratio(&t.im).map_err(serde::de::Error::custom)?;
            out.add_term(t.pi_power, Complex::new(re, im));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_ratio("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_ratio("-7").unwrap(), int(-7));
        assert_eq!(parse_ratio("0.1").unwrap(), rat(1, 10));
        assert_eq!(parse_ratio("-1.25e-2").unwrap(), rat(-1, 80));
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("abc").is_err());
        assert!(parse_ratio(".").is_err());
    }

    #[test]
    fn ratio_string_always_has_denominator() {
        assert_eq!(ratio_string(&int(3)), "3/1");
        assert_eq!(ratio_string(&rat(-2, 6)), "-1/3");
    }

    #[test]
    fn pipoly_arithmetic_cancels() {
        let a = PiPoly::monomial(cimag(int(-2)), 1);
        let sq = &a * &a;
        assert_eq!(sq, PiPoly::monomial(creal(int(-4)), 2));
        assert!((&sq - &sq).is_zero());
        assert!((sq.to_c64().re + 4.0 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
    }

    #[test]
    fn pipoly_json_roundtrip() {
        let a = &PiPoly::monomial(cimag(rat(1, 3)), 2) + &PiPoly::rational(creal(int(5)));
        let s = serde_json::to_string(&a).unwrap();
        let b: PiPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
    }
}
