//! Exact arithmetic in the biquadratic field ℚ(√2, √3).
//!
//! An element is `a + b√2 + c√3 + d√6` with rational coordinates. This is
//! enough to resolve isometric automorphisms whose scale factors are square
//! roots of small rationals (√3, 1/√3, √2/2) without any rounding.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{format_rational, parse_rational, rational_sqrt, rational_to_f64, Field, Rational, Scalar};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Surd {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Rational,
}

impl Surd {
    pub fn new(a: Rational, b: Rational, c: Rational, d: Rational) -> Self {
        Surd { a, b, c, d }
    }

    pub fn rational(q: Rational) -> Self {
        Surd { a: q, b: Rational::zero(), c: Rational::zero(), d: Rational::zero() }
    }

    pub fn sqrt2() -> Self {
        Surd { b: Rational::one(), ..Surd::zero() }
    }

    pub fn sqrt3() -> Self {
        Surd { c: Rational::one(), ..Surd::zero() }
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero() && self.c.is_zero() && self.d.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.a)
            + rational_to_f64(&self.b) * std::f64::consts::SQRT_2
            + rational_to_f64(&self.c) * 3f64.sqrt()
            + rational_to_f64(&self.d) * 6f64.sqrt()
    }

    /// Square root inside the field, for rational radicands of the form
    /// `k·s²` with `k ∈ {1, 2, 3, 6}`.
    pub fn sqrt(&self) -> Option<Surd> {
        if !self.is_rational() || self.a.is_negative() {
            return None;
        }
        for (k, unit) in [(1, Surd::one()), (2, Surd::sqrt2()), (3, Surd::sqrt3()), (6, Surd::sqrt2() * Surd::sqrt3())] {
            let kk = Rational::from_integer(k.into());
            if let Some(s) = rational_sqrt(&(&self.a * &kk)) {
                // sqrt(x) = s / sqrt(k) = s sqrt(k) / k
                return Some(unit * Surd::rational(s / kk));
            }
        }
        None
    }

    /// Conjugation √3 ↦ −√3 (fixes ℚ(√2)).
    fn conj3(&self) -> Surd {
        Surd { a: self.a.clone(), b: self.b.clone(), c: -self.c.clone(), d: -self.d.clone() }
    }

    /// Conjugation √2 ↦ −√2 (fixes ℚ(√3)).
    fn conj2(&self) -> Surd {
        Surd { a: self.a.clone(), b: -self.b.clone(), c: self.c.clone(), d: -self.d.clone() }
    }

    pub fn inverse(&self) -> Option<Surd> {
        if self.is_zero() {
            return None;
        }
        // x·conj3(x) lies in ℚ(√2); multiplying by its √2-conjugate lands in ℚ.
        let p = self.clone() * self.conj3();
        let q = p.clone() * p.conj2();
        debug_assert!(q.is_rational());
        let num = self.conj3() * p.conj2();
        Some(num * Surd::rational(q.a.recip()))
    }

    pub fn parse(s: &SurdRepr) -> Result<Self> {
        Ok(Surd {
            a: parse_rational(&s.a)?,
            b: parse_rational(&s.b)?,
            c: parse_rational(&s.c)?,
            d: parse_rational(&s.d)?,
        })
    }

    pub fn repr(&self) -> SurdRepr {
        SurdRepr {
            a: format_rational(&self.a),
            b: format_rational(&self.b),
            c: format_rational(&self.c),
            d: format_rational(&self.d),
        }
    }
}

/// JSON encoding: coefficients of 1, √2, √3, √6 as rational strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurdRepr {
    #[serde(default = "zero_str")]
    pub a: String,
    #[serde(default = "zero_str")]
    pub b: String,
    #[serde(default = "zero_str")]
    pub c: String,
    #[serde(default = "zero_str")]
    pub d: String,
}

fn zero_str() -> String {
    "0".to_string()
}

impl Zero for Surd {
    fn zero() -> Self {
        Surd::rational(Rational::zero())
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.is_rational()
    }
}

impl One for Surd {
    fn one() -> Self {
        Surd::rational(Rational::one())
    }
}

impl Add for Surd {
    type Output = Surd;
    fn add(self, o: Surd) -> Surd {
        Surd { a: self.a + o.a, b: self.b + o.b, c: self.c + o.c, d: self.d + o.d }
    }
}

impl Sub for Surd {
    type Output = Surd;
    fn sub(self, o: Surd) -> Surd {
        Surd { a: self.a - o.a, b: self.b - o.b, c: self.c - o.c, d: self.d - o.d }
    }
}

impl Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
    }
}

impl Mul for Surd {
    type Output = Surd;
    fn mul(self, o: Surd) -> Surd {
        let two = Rational::from_integer(2.into());
        let three = Rational::from_integer(3.into());
        let six = Rational::from_integer(6.into());
        let (a1, b1, c1, d1) = (&self.a, &self.b, &self.c, &self.d);
        let (a2, b2, c2, d2) = (&o.a, &o.b, &o.c, &o.d);
        Surd {
            a: a1 * a2 + &two * b1 * b2 + &three * c1 * c2 + &six * d1 * d2,
            b: a1 * b2 + b1 * a2 + &three * (c1 * d2 + d1 * c2),
            c: a1 * c2 + c1 * a2 + &two * (b1 * d2 + d1 * b2),
            d: a1 * d2 + d1 * a2 + b1 * c2 + c1 * b2,
        }
    }
}

impl Div for Surd {
    type Output = Surd;
    fn div(self, o: Surd) -> Surd {
        self * o.inverse().expect("division by zero in Q(sqrt2, sqrt3)")
    }
}

impl Scalar for Surd {
    fn from_rational(q: &Rational) -> Self {
        Surd::rational(q.clone())
    }
}

impl Field for Surd {}

impl fmt::Debug for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (coef, unit) in [(&self.a, ""), (&self.b, "√2"), (&self.c, "√3"), (&self.d, "√6")] {
            if !coef.is_zero() {
                parts.push(format!("{}{}", format_rational(coef), unit));
            }
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

pub fn parse_surd_matrix(rows: &[Vec<SurdRepr>]) -> Result<Vec<Vec<Surd>>> {
    let n = rows.len();
    rows.iter()
        .map(|r| {
            if r.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: r.len() });
            }
            r.iter().map(Surd::parse).collect()
        })
        .collect()
}
