//! Laurent polynomials in `A` over the integers.
//!
//! Terms are stored sparsely as `(exponent, coefficient)` pairs sorted by
//! ascending exponent, with no zero coefficients. The empty term list is the
//! zero polynomial.

use std::fmt;
use std::str::FromStr;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::int::Int;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LaurentError {
    #[error("polynomial is not exactly divisible by the given divisor")]
    NotDivisible,
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("span and grade are undefined for the zero polynomial")]
    EmptyPolynomial,
    #[error("cannot parse polynomial: {0}")]
    Parse(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    terms: Vec<(i64, Int)>,
}

/// Residue of all exponents mod 4, when they agree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grade {
    Residue(u8),
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanGrade {
    pub span: u64,
    pub grade: Grade,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::monomial(1, 0)
    }

    /// `c * A^e`.
    pub fn monomial(c: impl Into<Int>, e: i64) -> Self {
        let c = c.into();
        if c.is_zero() {
            return Self::zero();
        }
        LaurentPoly { terms: vec![(e, c)] }
    }

    /// Builds a polynomial from arbitrary `(exponent, coefficient)` pairs,
    /// summing duplicates.
    pub fn from_terms<I, C>(it: I) -> Self
    where
        I: IntoIterator<Item = (i64, C)>,
        C: Into<Int>,
    {
        let mut v: Vec<(i64, Int)> = it.into_iter().map(|(e, c)| (e, c.into())).collect();
        v.sort_by_key(|t| t.0);
        let mut out: Vec<(i64, Int)> = Vec::with_capacity(v.len());
        for (e, c) in v {
            match out.last_mut() {
                Some((le, lc)) if *le == e => lc.add_assign(&c),
                _ => out.push((e, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        LaurentPoly { terms: out }
    }

    /// `-A^2 - A^-2`, the value of a closed loop.
    pub fn delta() -> Self {
        Self::from_terms([(-2, -1i64), (2, -1)])
    }

    /// `A^2 + A^-2`, the loop value of the positive bracket.
    pub fn delta_plus() -> Self {
        Self::from_terms([(-2, 1i64), (2, 1)])
    }

    pub fn a() -> Self {
        Self::monomial(1, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(i64, Int)] {
        &self.terms
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, e: i64) -> Int {
        match self.terms.binary_search_by_key(&e, |t| t.0) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => Int::ZERO,
        }
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.first().map(|t| t.0)
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.last().map(|t| t.0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    /// In-place sum with a linear merge of the two sorted term lists.
    pub fn add_assign(&mut self, other: &Self) {
        if other.terms.is_empty() {
            return;
        }
        if self.terms.is_empty() {
            self.terms = other.terms.clone();
            return;
        }
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let mut a = std::mem::take(&mut self.terms).into_iter().peekable();
        let mut b = other.terms.iter().peekable();
        loop {
            match (a.peek(), b.peek()) {
                (Some(x), Some(y)) => {
                    if x.0 < y.0 {
                        out.push(a.next().unwrap());
                    } else if x.0 > y.0 {
                        out.push(b.next().unwrap().clone());
                    } else {
                        let (e, mut c) = a.next().unwrap();
                        c.add_assign(&b.next().unwrap().1);
                        if !c.is_zero() {
                            out.push((e, c));
                        }
                    }
                }
                (Some(_), None) => out.push(a.next().unwrap()),
                (None, Some(_)) => out.push(b.next().unwrap().clone()),
                (None, None) => break,
            }
        }
        self.terms = out;
    }

    pub fn neg(&self) -> Self {
        LaurentPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, c.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        if other.terms.len() == 1 {
            return self.scale_monomial(&other.terms[0].1, other.terms[0].0);
        }
        if self.terms.len() == 1 {
            return other.scale_monomial(&self.terms[0].1, self.terms[0].0);
        }
        let (short, long) = if self.terms.len() <= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        if short.terms.len() <= 4 {
            let mut out = Self::zero();
            for (e, c) in &short.terms {
                out.add_assign(&long.scale_monomial(c, *e));
            }
            return out;
        }
        let mut acc = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                acc.push((e1 + e2, c1.mul(c2)));
            }
        }
        Self::from_terms(acc)
    }

    fn scale_monomial(&self, c: &Int, e: i64) -> Self {
        if c.is_one() {
            return self.shift(e);
        }
        LaurentPoly {
            terms: self.terms.iter().map(|(x, y)| (x + e, y.mul(c))).collect(),
        }
    }

    /// Multiplication by `A^k`.
    pub fn shift(&self, k: i64) -> Self {
        LaurentPoly {
            terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect(),
        }
    }

    pub fn shift_in_place(&mut self, k: i64) {
        for t in &mut self.terms {
            t.0 += k;
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Substitutes `A -> A^-1`.
    pub fn mirror(&self) -> Self {
        let mut terms: Vec<_> = self.terms.iter().map(|(e, c)| (-e, c.clone())).collect();
        terms.reverse();
        LaurentPoly { terms }
    }

    /// Quotient `q` with `q * d == self`, found by long division from the top
    /// exponent down.
    pub fn exact_div(&self, d: &Self) -> Result<Self, LaurentError> {
        if d.is_zero() {
            return Err(LaurentError::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(Self::zero());
        }
        let (d_lo, d_hi) = (d.min_exp().unwrap(), d.max_exp().unwrap());
        let d_lead = &d.terms.last().unwrap().1;
        let q_lo = self.min_exp().unwrap() - d_lo;
        let mut rem = self.clone();
        let mut quotient = Vec::new();
        while let Some(r_hi) = rem.max_exp() {
            let qe = r_hi - d_hi;
            if qe < q_lo {
                return Err(LaurentError::NotDivisible);
            }
            let qc = rem
                .terms
                .last()
                .unwrap()
                .1
                .div_exact(d_lead)
                .ok_or(LaurentError::NotDivisible)?;
            rem = rem.sub(&d.scale_monomial(&qc, qe));
            quotient.push((qe, qc));
        }
        Ok(Self::from_terms(quotient))
    }

    pub fn span_and_grade(&self) -> Result<SpanGrade, LaurentError> {
        let (lo, hi) = match (self.min_exp(), self.max_exp()) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => return Err(LaurentError::EmptyPolynomial),
        };
        let r0 = lo.rem_euclid(4);
        let grade = if self.terms.iter().all(|(e, _)| e.rem_euclid(4) == r0) {
            Grade::Residue(r0 as u8)
        } else {
            Grade::Mixed
        };
        Ok(SpanGrade {
            span: (hi - lo) as u64,
            grade,
        })
    }

    pub fn span(&self) -> u64 {
        self.span_and_grade().map(|s| s.span).unwrap_or(0)
    }

    /// True when every integer coefficient is strictly positive.
    pub fn all_positive(&self) -> bool {
        self.terms.iter().all(|(_, c)| c.is_positive())
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            let negative = !c.is_positive();
            let mag = c.abs();
            if i == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            match *e {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag}*")?;
                    }
                    if *e == 1 {
                        write!(f, "A")?;
                    } else {
                        write!(f, "A^{e}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl FromStr for LaurentPoly {
    type Err = LaurentError;

    /// Parses the text rendering, e.g. `-A^5 - A^-3 + A^-7` or `2*A^4 + 3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || LaurentError::Parse(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact == "0" {
            return Ok(Self::zero());
        }
        if compact.is_empty() {
            return Err(bad());
        }
        // split into signed terms; a '-' directly after '^' belongs to the exponent
        let mut pieces = Vec::new();
        let mut cur = String::new();
        let chars: Vec<char> = compact.chars().collect();
        for (i, &ch) in chars.iter().enumerate() {
            if (ch == '+' || ch == '-') && i > 0 && chars[i - 1] != '^' {
                pieces.push(std::mem::take(&mut cur));
            }
            cur.push(ch);
        }
        pieces.push(cur);
        let mut terms = Vec::new();
        for p in pieces {
            let (neg, body) = match p.strip_prefix('-') {
                Some(b) => (true, b),
                None => (false, p.strip_prefix('+').unwrap_or(&p)),
            };
            if body.is_empty() {
                return Err(bad());
            }
            let (coef, exp) = match body.find('A') {
                None => (body.parse::<Int>().map_err(|_| bad())?, 0i64),
                Some(pos) => {
                    let cpart = body[..pos].trim_end_matches('*');
                    let c = if cpart.is_empty() {
                        Int::ONE
                    } else {
                        cpart.parse::<Int>().map_err(|_| bad())?
                    };
                    let rest = &body[pos + 1..];
                    let e = if rest.is_empty() {
                        1
                    } else {
                        let r = rest.strip_prefix('^').ok_or_else(bad)?;
                        let r = r.trim_start_matches('(').trim_end_matches(')');
                        r.parse::<i64>().map_err(|_| bad())?
                    };
                    (c, e)
                }
            };
            terms.push((exp, if neg { coef.neg() } else { coef }));
        }
        Ok(Self::from_terms(terms))
    }
}

impl Serialize for LaurentPoly {
    /// `{"exponent": "coefficient"}` in decreasing exponent order.
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut m = serializer.serialize_map(Some(self.terms.len()))?;
        for (e, c) in self.terms.iter().rev() {
            m.serialize_entry(&e.to_string(), &c.to_string())?;
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = LaurentPoly;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a map from exponent strings to coefficient strings")
            }
            fn visit_map<M: MapAccess<'de>>(self, mut map: M) -> Result<LaurentPoly, M::Error> {
                let mut terms = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, String>()? {
                    let e: i64 = k.parse().map_err(serde::de::Error::custom)?;
                    let c: Int = v.parse().map_err(serde::de::Error::custom)?;
                    terms.push((e, c));
                }
                Ok(LaurentPoly::from_terms(terms))
            }
        }
        deserializer.deserialize_map(V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> LaurentPoly {
        s.parse().unwrap()
    }

    #[test]
    fn difference_of_squares() {
        assert_eq!(p("A + A^-1").mul(&p("A - A^-1")), p("A^2 - A^-2"));
    }

    #[test]
    fn additive_inverse_is_empty() {
        let x = p("3*A^4 - 2 + A^-9");
        assert!(x.add(&x.neg()).is_zero());
        assert!(x.add(&x.neg()).terms().is_empty());
    }

    #[test]
    fn delta_squared() {
        let d = LaurentPoly::delta();
        assert_eq!(d.mul(&d), p("A^4 + 2 + A^-4"));
    }

    #[test]
    fn exact_division_examples() {
        let d = LaurentPoly::delta();
        assert_eq!(p("A^4 + 2 + A^-4").exact_div(&d).unwrap(), d);
        let x = p("-A^5 - A^-3 + A^-7");
        assert_eq!(x.exact_div(&LaurentPoly::one()).unwrap(), x);
        assert_eq!(p("A").exact_div(&p("A^2")).unwrap(), p("A^-1"));
        assert_eq!(p("A^2 + 1").exact_div(&d), Err(LaurentError::NotDivisible));
        assert_eq!(p("3*A").exact_div(&p("2")), Err(LaurentError::NotDivisible));
        assert_eq!(x.exact_div(&LaurentPoly::zero()), Err(LaurentError::DivisionByZero));
    }

    #[test]
    fn span_grade_examples() {
        assert_eq!(
            p("-A^4 - A^-4").span_and_grade().unwrap(),
            SpanGrade { span: 8, grade: Grade::Residue(0) }
        );
        assert_eq!(
            p("-A^5 - A^-3 + A^-7").span_and_grade().unwrap(),
            SpanGrade { span: 12, grade: Grade::Residue(1) }
        );
        assert_eq!(p("A + A^2").span_and_grade().unwrap().grade, Grade::Mixed);
        assert_eq!(
            LaurentPoly::zero().span_and_grade(),
            Err(LaurentError::EmptyPolynomial)
        );
        // negative exponents use the nonnegative residue
        assert_eq!(p("A^-1").span_and_grade().unwrap().grade, Grade::Residue(3));
    }

    #[test]
    fn text_rendering() {
        assert_eq!(p("-A^5 - A^-3 + A^-7").to_string(), "-A^5 - A^-3 + A^-7");
        assert_eq!(p("A^-4 + 2 + A^4").to_string(), "A^4 + 2 + A^-4");
        assert_eq!(p("-3*A + 1").to_string(), "-3*A + 1");
        assert_eq!(LaurentPoly::zero().to_string(), "0");
        assert_eq!(LaurentPoly::one().to_string(), "1");
    }

    #[test]
    fn json_rendering() {
        let x = p("-A^5 - A^-3 + A^-7");
        let j = serde_json::to_string(&x).unwrap();
        assert_eq!(j, r#"{"5":"-1","-3":"-1","-7":"1"}"#);
        let back: LaurentPoly = serde_json::from_str(&j).unwrap();
        assert_eq!(back, x);
        let big = p("123456789012345678901234567890*A^2");
        let back: LaurentPoly = serde_json::from_str(&serde_json::to_string(&big).unwrap()).unwrap();
        assert_eq!(back, big);
    }

    fn arb_poly() -> impl Strategy<Value = LaurentPoly> {
        prop::collection::vec((-12i64..12, -5i64..6), 0..7).prop_map(LaurentPoly::from_terms)
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        }

        #[test]
        fn division_inverts_multiplication(a in arb_poly(), d in arb_poly()) {
            prop_assume!(!d.is_zero());
            prop_assert_eq!(a.mul(&d).exact_div(&d).unwrap(), a);
        }

        #[test]
        fn text_round_trip(a in arb_poly()) {
            prop_assert_eq!(a.to_string().parse::<LaurentPoly>().unwrap(), a);
        }
    }
}
