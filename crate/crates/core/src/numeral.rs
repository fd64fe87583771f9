//! Extended numerals: finite sums `sum_p c_p * G^p` over integer grades,
//! where `G` is an infinite unit. Positive grades are infinite, grade 0 is
//! the finite part, negative grades are infinitesimal.
//!
//! Only what affine scaling needs is supported: ring operations, division
//! by a single term, a total order and a textual form such as
//! `3*G^2 + 1.5 - 2*G^-1`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Sums whose magnitude falls to this fraction of the larger operand are
/// treated as cancelled and dropped.
pub const CANCELLATION_REL: f64 = 1e-15;

#[derive(Clone, Debug, Default)]
pub struct ExtendedNumeral {
    terms: BTreeMap<i32, f64>,
    cancelled: bool,
}

impl PartialEq for ExtendedNumeral {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl ExtendedNumeral {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::finite(1.0)
    }

    /// The unit `G`.
    pub fn grossone() -> Self {
        Self::monomial(1.0, 1)
    }

    pub fn finite(c: f64) -> Self {
        Self::monomial(c, 0)
    }

    /// `c * G^grade`. Panics on a non-finite coefficient.
    pub fn monomial(c: f64, grade: i32) -> Self {
        assert!(c.is_finite(), "numeral coefficient must be finite, got {c}");
        let mut terms = BTreeMap::new();
        if c != 0.0 {
            terms.insert(grade, c);
        }
        ExtendedNumeral {
            terms,
            cancelled: false,
        }
    }

    pub fn from_terms<I: IntoIterator<Item = (i32, f64)>>(terms: I) -> Result<Self> {
        let mut out = Self::zero();
        for (g, c) in terms {
            if !c.is_finite() {
                return Err(Error::Parse(format!("non-finite coefficient {c}")));
            }
            out = out + Self::monomial(c, g);
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in increasing grade order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i32, f64)> + '_ {
        self.terms.iter().map(|(g, c)| (*g, *c))
    }

    pub fn coefficient(&self, grade: i32) -> f64 {
        self.terms.get(&grade).copied().unwrap_or(0.0)
    }

    pub fn leading(&self) -> Option<(i32, f64)> {
        self.terms.iter().next_back().map(|(g, c)| (*g, *c))
    }

    pub fn as_monomial(&self) -> Option<(f64, i32)> {
        (self.terms.len() == 1).then(|| {
            let (g, c) = self.terms.iter().next().expect("one term");
            (*c, *g)
        })
    }

    /// The finite value if the numeral has no grade other than 0.
    pub fn as_finite(&self) -> Option<f64> {
        match self.terms.len() {
            0 => Some(0.0),
            1 => self.terms.get(&0).copied(),
            _ => None,
        }
    }

    /// Whether any operation in this value's history dropped a cancelled
    /// coefficient.
    pub fn cancelled(&self) -> bool {
        self.cancelled
    }

    pub fn scale(&self, k: f64) -> Self {
        assert!(k.is_finite(), "scale factor must be finite");
        if k == 0.0 {
            return ExtendedNumeral {
                terms: BTreeMap::new(),
                cancelled: self.cancelled,
            };
        }
        ExtendedNumeral {
            terms: self.terms.iter().map(|(g, c)| (*g, c * k)).collect(),
            cancelled: self.cancelled,
        }
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        let mut terms = self.terms.clone();
        let mut cancelled = self.cancelled || other.cancelled;
        for (g, c) in &other.terms {
            let c = sign * c;
            match terms.get(g).copied() {
                None => {
                    terms.insert(*g, c);
                }
                Some(prev) => {
                    let sum = prev + c;
                    if sum.abs() <= CANCELLATION_REL * prev.abs().max(c.abs()) {
                        if sum != 0.0 {
                            cancelled = true;
                        }
                        terms.remove(g);
                    } else {
                        terms.insert(*g, sum);
                    }
                }
            }
        }
        ExtendedNumeral { terms, cancelled }
    }

    fn product(&self, other: &Self) -> Self {
        let mut out = ExtendedNumeral {
            terms: BTreeMap::new(),
            cancelled: self.cancelled || other.cancelled,
        };
        for (ga, ca) in &self.terms {
            for (gb, cb) in &other.terms {
                out = out.combine(&Self::monomial(ca * cb, ga + gb), 1.0);
            }
        }
        out
    }

    /// Division by a single nonzero term `c * G^p`.
    pub fn div_monomial(&self, divisor: &ExtendedNumeral) -> Result<Self> {
        let (c, p) = divisor.as_monomial().ok_or_else(|| {
            Error::UnsupportedDivision(format!("divisor {divisor} is not a single nonzero term"))
        })?;
        Ok(ExtendedNumeral {
            terms: self.terms.iter().map(|(g, v)| (g - p, v / c)).collect(),
            cancelled: self.cancelled || divisor.cancelled,
        })
    }

    /// Sign of the leading coefficient; 0 for zero.
    pub fn signum(&self) -> i32 {
        match self.leading() {
            None => 0,
            Some((_, c)) if c > 0.0 => 1,
            Some(_) => -1,
        }
    }

    /// Total order: the highest grade of `self - other` decides.
    pub fn compare(&self, other: &Self) -> Ordering {
        let mut grades: Vec<i32> = self
            .terms
            .keys()
            .chain(other.terms.keys())
            .copied()
            .collect();
        grades.sort_unstable();
        grades.dedup();
        for g in grades.into_iter().rev() {
            match self.coefficient(g).partial_cmp(&other.coefficient(g)) {
                Some(Ordering::Equal) => continue,
                Some(o) => return o,
                None => unreachable!("coefficients are finite"),
            }
        }
        Ordering::Equal
    }
}

impl Eq for ExtendedNumeral {}

impl PartialOrd for ExtendedNumeral {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtendedNumeral {
    fn cmp(&self, other: &Self) -> Ordering {
        self.compare(other)
    }
}

impl From<f64> for ExtendedNumeral {
    fn from(c: f64) -> Self {
        Self::finite(c)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl $tr<&ExtendedNumeral> for &ExtendedNumeral {
            type Output = ExtendedNumeral;
            fn $method(self, rhs: &ExtendedNumeral) -> ExtendedNumeral {
                let f: fn(&ExtendedNumeral, &ExtendedNumeral) -> ExtendedNumeral = $body;
                f(self, rhs)
            }
        }
        impl $tr<ExtendedNumeral> for ExtendedNumeral {
            type Output = ExtendedNumeral;
            fn $method(self, rhs: ExtendedNumeral) -> ExtendedNumeral {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&ExtendedNumeral> for ExtendedNumeral {
            type Output = ExtendedNumeral;
            fn $method(self, rhs: &ExtendedNumeral) -> ExtendedNumeral {
                (&self).$method(rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| a.combine(b, 1.0));
binop!(Sub, sub, |a, b| a.combine(b, -1.0));
binop!(Mul, mul, |a, b| a.product(b));

impl Neg for ExtendedNumeral {
    type Output = ExtendedNumeral;
    fn neg(self) -> ExtendedNumeral {
        self.scale(-1.0)
    }
}

impl Neg for &ExtendedNumeral {
    type Output = ExtendedNumeral;
    fn neg(self) -> ExtendedNumeral {
        self.scale(-1.0)
    }
}

fn fmt_term(f: &mut fmt::Formatter<'_>, c: f64, g: i32) -> fmt::Result {
    match (g, c == 1.0) {
        (0, _) => write!(f, "{c}"),
        (1, true) => write!(f, "G"),
        (1, false) => write!(f, "{c}*G"),
        (_, true) => write!(f, "G^{g}"),
        (_, false) => write!(f, "{c}*G^{g}"),
    }
}

/// Highest grade first, e.g. `3*G^2 + 1.5 - 2*G^-1`.
impl fmt::Display for ExtendedNumeral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (g, c)) in self.terms.iter().rev().enumerate() {
            let (g, c) = (*g, *c);
            if k == 0 {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else if c < 0.0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            fmt_term(f, c.abs(), g)?;
        }
        Ok(())
    }
}

impl FromStr for ExtendedNumeral {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Parser::new(s).parse()
    }
}

impl serde::Serialize for ExtendedNumeral {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for ExtendedNumeral {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        }
    }

    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} at offset {} in '{}'", self.pos, self.src))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while let Some(b) = self.peek() {
            let exp_sign = (b == b'+' || b == b'-')
                && self.pos > start
                && matches!(self.bytes[self.pos - 1], b'e' | b'E');
            if b.is_ascii_digit() || b == b'.' || b == b'e' || b == b'E' || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = &self.src[start..self.pos];
        let v: f64 = text
            .parse()
            .map_err(|_| self.err(&format!("invalid number '{text}'")))?;
        if !v.is_finite() {
            return Err(self.err("coefficient overflows"));
        }
        Ok(v)
    }

    fn integer(&mut self) -> Result<i32> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.peek(), Some(b'+') | Some(b'-')) {
            self.pos += 1;
        }
        while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
        }
        let text = &self.src[start..self.pos];
        text.parse()
            .map_err(|_| self.err(&format!("invalid grade '{text}'")))
    }

    fn unit_power(&mut self) -> Result<i32> {
        if self.eat(b'^') {
            self.integer()
        } else {
            Ok(1)
        }
    }

    /// term := number ['*' 'G' ['^' int]] | 'G' ['^' int]
    fn term(&mut self) -> Result<(f64, i32)> {
        self.skip_ws();
        if self.eat(b'G') {
            return Ok((1.0, self.unit_power()?));
        }
        let c = self.number()?;
        if self.eat(b'*') {
            if !self.eat(b'G') {
                return Err(self.err("expected 'G' after '*'"));
            }
            return Ok((c, self.unit_power()?));
        }
        Ok((c, 0))
    }

    fn parse(mut self) -> Result<ExtendedNumeral> {
        let mut terms = Vec::new();
        let mut sign = if self.eat(b'-') {
            -1.0
        } else {
            self.eat(b'+');
            1.0
        };
        loop {
            let (c, g) = self.term()?;
            terms.push((g, sign * c));
            self.skip_ws();
            if self.pos == self.bytes.len() {
                break;
            }
            sign = if self.eat(b'+') {
                1.0
            } else if self.eat(b'-') {
                -1.0
            } else {
                return Err(self.err("expected '+' or '-'"));
            };
        }
        ExtendedNumeral::from_terms(terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> ExtendedNumeral {
        s.parse().unwrap()
    }

    #[test]
    fn gradewise_addition() {
        assert_eq!(n("3*G + 2") + n("G - 5"), n("4*G - 3"));
    }

    #[test]
    fn grade_cancellation() {
        let g = ExtendedNumeral::grossone();
        let inv = ExtendedNumeral::monomial(1.0, -1);
        assert_eq!(&g * &inv, ExtendedNumeral::one());
    }

    #[test]
    fn distributivity_example() {
        assert_eq!(n("2*G^2 + G") * n("3*G^-1"), n("6*G + 3"));
    }

    #[test]
    fn monomial_division() {
        assert_eq!(
            n("4*G^2 + 2*G").div_monomial(&n("2*G")).unwrap(),
            n("2*G + 1")
        );
        let x = n("3*G^2 + 1.5 - 2*G^-1");
        assert_eq!(x.div_monomial(&ExtendedNumeral::one()).unwrap(), x);
        assert_eq!(n("5").div_monomial(&n("G")).unwrap(), n("5*G^-1"));
        assert!(matches!(
            x.div_monomial(&n("G + 1")),
            Err(Error::UnsupportedDivision(_))
        ));
        assert!(x.div_monomial(&ExtendedNumeral::zero()).is_err());
    }

    #[test]
    fn ordering_examples() {
        assert!(n("G") > ExtendedNumeral::finite(1e300));
        let eps = n("G^-1");
        assert!(eps > ExtendedNumeral::zero());
        assert!(eps < ExtendedNumeral::finite(1e-300));
        assert_eq!(n("2*G - 3").compare(&n("2*G + 1")), Ordering::Less);
        assert!(n("-G") < ExtendedNumeral::finite(-1e300));
    }

    #[test]
    fn display_and_parse() {
        let x = n("3*G^2 + 1.5 - 2*G^-1");
        assert_eq!(x.to_string(), "3*G^2 + 1.5 - 2*G^-1");
        assert_eq!(n("-G").to_string(), "-G");
        assert_eq!(n("G^2 - G").to_string(), "G^2 - G");
        assert_eq!(ExtendedNumeral::zero().to_string(), "0");
        assert_eq!(n("1e-3*G^-4").to_string(), "0.001*G^-4");
        assert_eq!(n("2.5e+2"), ExtendedNumeral::finite(250.0));
        assert_eq!(n("  G + G"), n("2*G"));
        assert_eq!(n("G - G"), ExtendedNumeral::zero());
        for bad in ["", "G^", "3*", "3*X", "1 2", "G^1.5", "++1", "1e999"] {
            assert!(bad.parse::<ExtendedNumeral>().is_err(), "{bad}");
        }
    }

    #[test]
    fn cancellation_is_flagged() {
        let a = ExtendedNumeral::finite(1.0);
        let b = ExtendedNumeral::finite(-(1.0 - 1e-16));
        let s = &a + &b;
        assert!(s.is_zero());
        assert!(s.cancelled());
        let exact = &a - &a;
        assert!(exact.is_zero());
        assert!(!exact.cancelled());
    }
}
