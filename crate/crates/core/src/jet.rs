//! Truncated Taylor series ("jets") for exact-to-roundoff derivatives of
//! closed-form functions.
//!
//! A `Jet` of order `K` stores `c_k = f^(k)(x0) / k!` for `k = 0..=K`.
//! Arithmetic follows the usual Cauchy-product recurrences, so composing
//! elementary functions on `Jet::variable(x0, K)` yields all derivatives up to
//! order `K` at `x0` without differencing.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    c: Vec<f64>,
}

impl Jet {
    pub fn constant(value: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = value;
        Self { c }
    }

    /// The identity function expanded at `x`.
    pub fn variable(x: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = x;
        if order > 0 {
            c[1] = 1.0;
        }
        Self { c }
    }

    pub fn zero(order: usize) -> Self {
        Self::constant(0.0, order)
    }

    pub fn from_coeffs(c: Vec<f64>) -> Self {
        assert!(!c.is_empty(), "a jet needs at least the value coefficient");
        Self { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    /// `k`-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        let mut fact = 1.0;
        for j in 2..=k {
            fact *= j as f64;
        }
        self.c.get(k).copied().unwrap_or(0.0) * fact
    }

    /// All derivatives `f, f', ..., f^(K)`.
    pub fn derivatives(&self) -> Vec<f64> {
        (0..=self.order()).map(|k| self.derivative(k)).collect()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            c: self.c.iter().map(|v| v * s).collect(),
        }
    }

    pub fn offset(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.c[0] += s;
        out
    }

    pub fn recip(&self) -> Self {
        let n = self.c.len();
        let a0 = self.c[0];
        let mut b = vec![0.0; n];
        b[0] = 1.0 / a0;
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| self.c[j] * b[k - j]).sum();
            b[k] = -s / a0;
        }
        Self { c: b }
    }

    pub fn exp(&self) -> Self {
        let n = self.c.len();
        let mut b = vec![0.0; n];
        b[0] = self.c[0].exp();
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| j as f64 * self.c[j] * b[k - j]).sum();
            b[k] = s / k as f64;
        }
        Self { c: b }
    }

    pub fn ln(&self) -> Self {
        let n = self.c.len();
        let a0 = self.c[0];
        let mut b = vec![0.0; n];
        b[0] = a0.ln();
        for k in 1..n {
            let s: f64 = (1..k).map(|j| j as f64 * b[j] * self.c[k - j]).sum();
            b[k] = (self.c[k] - s / k as f64) / a0;
        }
        Self { c: b }
    }

    /// `self^r` for real `r`; needs a nonzero value coefficient (positive
    /// unless `r` is an integer).
    pub fn powf(&self, r: f64) -> Self {
        let n = self.c.len();
        let a0 = self.c[0];
        let mut b = vec![0.0; n];
        b[0] = a0.powf(r);
        for k in 1..n {
            let s: f64 = (1..=k)
                .map(|j| (r * j as f64 - (k - j) as f64) * self.c[j] * b[k - j])
                .sum();
            b[k] = s / (k as f64 * a0);
        }
        Self { c: b }
    }

    pub fn powi(&self, p: u32) -> Self {
        let mut out = Self::constant(1.0, self.order());
        for _ in 0..p {
            out = &out * self;
        }
        out
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        Jet {
            c: self.c.iter().zip(&rhs.c).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        Jet {
            c: self.c.iter().zip(&rhs.c).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let n = self.c.len().min(rhs.c.len());
        let c = (0..n)
            .map(|k| (0..=k).map(|j| self.c[j] * rhs.c[k - j]).sum())
            .collect();
        Jet { c }
    }
}

impl Div for &Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        self * &rhs.recip()
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        self.offset(rhs)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        self.offset(rhs)
    }
}

impl Sub<f64> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self.offset(-rhs)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self.offset(-rhs)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}
