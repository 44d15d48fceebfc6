//! Extended-precision real arithmetic.
//!
//! [`Real`] wraps an `astro_float::BigFloat` and gives it ordinary operator
//! syntax. Every value carries its own mantissa length; binary operations
//! round to the larger of the two operand precisions. New values are created
//! at the process-wide working precision, which defaults to 50 significant
//! decimal digits plus 64 guard bits and can be changed with
//! [`set_working_digits`].

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

/// Default number of significant decimal digits.
pub const DEFAULT_DIGITS: usize = 50;

const GUARD_BITS: usize = 64;
const WORD_BITS: usize = 64;
const RM: RoundingMode = RoundingMode::ToEven;

static WORKING_DIGITS: AtomicUsize = AtomicUsize::new(DEFAULT_DIGITS);
static WORKING_BITS: AtomicUsize = AtomicUsize::new(bits_for_digits(DEFAULT_DIGITS));

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache allocation"));
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

/// Mantissa length (bits) used for `digits` significant decimal digits.
pub const fn bits_for_digits(digits: usize) -> usize {
    // 33220 / 10000 ~ log2(10)
    let bits = (digits * 33_220).div_ceil(10_000) + GUARD_BITS;
    bits.div_ceil(WORD_BITS) * WORD_BITS
}

/// Sets the working precision for newly created values.
pub fn set_working_digits(digits: usize) {
    let digits = digits.max(1);
    WORKING_DIGITS.store(digits, AtomicOrdering::Relaxed);
    WORKING_BITS.store(bits_for_digits(digits), AtomicOrdering::Relaxed);
}

/// Significant decimal digits requested for the working precision.
pub fn working_digits() -> usize {
    WORKING_DIGITS.load(AtomicOrdering::Relaxed)
}

/// Mantissa length in bits of newly created values.
pub fn working_bits() -> usize {
    WORKING_BITS.load(AtomicOrdering::Relaxed)
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("cannot parse {0:?} as a real number")]
pub struct ParseRealError(pub String);

/// An extended-precision real number.
#[derive(Clone)]
pub struct Real(BigFloat);

impl Real {
    fn wrap(x: BigFloat) -> Self {
        Real(x)
    }

    fn prec(&self) -> usize {
        self.0.mantissa_max_bit_len().unwrap_or_else(working_bits)
    }

    fn prec2(&self, other: &Real) -> usize {
        self.prec().max(other.prec())
    }

    pub fn zero() -> Self {
        Real(BigFloat::from_i32(0, working_bits()))
    }

    pub fn one() -> Self {
        Real::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Real(BigFloat::from_i64(n, working_bits()))
    }

    /// Exact rational `num / den` rounded once to working precision.
    pub fn ratio(num: i64, den: i64) -> Self {
        Real::from_int(num) / Real::from_int(den)
    }

    /// Exact binary value of `x`.
    pub fn from_f64(x: f64) -> Self {
        Real(BigFloat::from_f64(x, working_bits()))
    }

    pub fn pi() -> Self {
        let p = working_bits();
        Real(with_consts(|cc| cc.pi(p, RM)))
    }

    pub fn parse(s: &str) -> Result<Self, ParseRealError> {
        let trimmed = s.trim();
        if trimmed.is_empty() {
            return Err(ParseRealError(s.to_string()));
        }
        let p = working_bits();
        let x = with_consts(|cc| BigFloat::parse(trimmed, Radix::Dec, p, RM, cc));
        if x.is_nan() || x.is_inf() {
            return Err(ParseRealError(s.to_string()));
        }
        Ok(Real(x))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !(self.0.is_nan() || self.0.is_inf())
    }

    pub fn is_negative(&self) -> bool {
        !self.is_zero() && self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        !self.is_zero() && self.0.is_positive()
    }

    pub fn abs(&self) -> Self {
        Real(self.0.abs())
    }

    pub fn recip(&self) -> Self {
        Real::one() / self
    }

    pub fn square(&self) -> Self {
        self * self
    }

    /// Integer power; negative exponents take the reciprocal.
    pub fn powi(&self, n: i32) -> Self {
        let p = self.prec();
        let pos = Real(self.0.powi(n.unsigned_abs() as usize, p, RM));
        if n < 0 {
            pos.recip()
        } else {
            pos
        }
    }

    pub fn sqrt(&self) -> Self {
        Real(self.0.sqrt(self.prec(), RM))
    }

    pub fn exp(&self) -> Self {
        let p = self.prec();
        Real(with_consts(|cc| self.0.exp(p, RM, cc)))
    }

    pub fn ln(&self) -> Self {
        let p = self.prec();
        Real(with_consts(|cc| self.0.ln(p, RM, cc)))
    }

    pub fn sin(&self) -> Self {
        let p = self.prec();
        Real(with_consts(|cc| self.0.sin(p, RM, cc)))
    }

    pub fn cos(&self) -> Self {
        let p = self.prec();
        Real(with_consts(|cc| self.0.cos(p, RM, cc)))
    }

    pub fn sinh(&self) -> Self {
        let p = self.prec();
        Real(with_consts(|cc| self.0.sinh(p, RM, cc)))
    }

    pub fn cosh(&self) -> Self {
        let p = self.prec();
        Real(with_consts(|cc| self.0.cosh(p, RM, cc)))
    }

    pub fn coth(&self) -> Self {
        self.cosh() / self.sinh()
    }

    pub fn max(self, other: Real) -> Real {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Real) -> Real {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Nearest `f64`.
    pub fn to_f64(&self) -> f64 {
        if !self.is_finite() {
            return f64::NAN;
        }
        self.to_sci_string(20).parse().unwrap_or(f64::NAN)
    }

    /// Scientific notation rounded (half-up) to `digits` significant digits,
    /// e.g. `-4.11233507e-2`. Zero prints as `0`.
    pub fn to_sci_string(&self, digits: usize) -> String {
        let digits = digits.max(1);
        if self.is_zero() {
            return "0".to_string();
        }
        if !self.is_finite() {
            return "NaN".to_string();
        }
        let full = with_consts(|cc| self.0.format(Radix::Dec, RM, cc)).unwrap_or_default();
        let (negative, body) = match full.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, full.trim_start_matches('+')),
        };
        let (mantissa, exponent) = match body.split_once(['e', 'E']) {
            Some((m, e)) => (m, e.parse::<i64>().unwrap_or(0)),
            None => (body, 0),
        };
        let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
        let mut all: Vec<u8> = int_part.bytes().chain(frac_part.bytes()).map(|b| b - b'0').collect();
        // value = 0.d1 d2 d3 ... * 10^(point)
        let mut point = int_part.len() as i64 + exponent;
        let lead = all.iter().position(|&d| d != 0).unwrap_or(all.len());
        all.drain(..lead);
        point -= lead as i64;
        if all.is_empty() {
            return "0".to_string();
        }
        let round_up = all.get(digits).is_some_and(|&d| d >= 5);
        all.truncate(digits);
        all.resize(digits, 0);
        if round_up {
            let mut i = digits;
            loop {
                if i == 0 {
                    all.insert(0, 1);
                    all.truncate(digits);
                    point += 1;
                    break;
                }
                i -= 1;
                if all[i] == 9 {
                    all[i] = 0;
                } else {
                    all[i] += 1;
                    break;
                }
            }
        }
        let mut out = String::with_capacity(digits + 8);
        if negative {
            out.push('-');
        }
        out.push((b'0' + all[0]) as char);
        if digits > 1 {
            out.push('.');
            out.extend(all[1..].iter().map(|&d| (b'0' + d) as char));
        }
        out.push_str(&format!("e{}", point - 1));
        out
    }
}

impl Default for Real {
    fn default() -> Self {
        Real::zero()
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci_string(working_digits()))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or_else(working_digits);
        f.pad(&self.to_sci_string(digits))
    }
}

impl FromStr for Real {
    type Err = ParseRealError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Real::parse(s)
    }
}

impl From<i32> for Real {
    fn from(n: i32) -> Self {
        Real::from_int(n as i64)
    }
}

impl From<i64> for Real {
    fn from(n: i64) -> Self {
        Real::from_int(n)
    }
}

impl From<u32> for Real {
    fn from(n: u32) -> Self {
        Real::from_int(n as i64)
    }
}

impl From<f64> for Real {
    fn from(x: f64) -> Self {
        Real::from_f64(x)
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(self.0.neg())
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(self.0.clone().neg())
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $assign_trait:ident, $assign:ident) => {
        impl $trait<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                let p = self.prec2(rhs);
                Real::wrap(self.0.$method(&rhs.0, p, RM))
            }
        }
        impl $trait<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                (&self).$method(rhs)
            }
        }
        impl $trait<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                self.$method(&rhs)
            }
        }
        impl $assign_trait<&Real> for Real {
            fn $assign(&mut self, rhs: &Real) {
                *self = (&*self).$method(rhs);
            }
        }
        impl $assign_trait<Real> for Real {
            fn $assign(&mut self, rhs: Real) {
                *self = (&*self).$method(&rhs);
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign);
binop!(Sub, sub, SubAssign, sub_assign);
binop!(Mul, mul, MulAssign, mul_assign);
binop!(Div, div, DivAssign, div_assign);

impl Sum for Real {
    fn sum<I: Iterator<Item = Real>>(iter: I) -> Real {
        iter.fold(Real::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Real> for Real {
    fn sum<I: Iterator<Item = &'a Real>>(iter: I) -> Real {
        iter.fold(Real::zero(), |acc, x| acc + x)
    }
}

/// A complex number with [`Real`] parts. Only what the eigenmodes need.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Complex {
    pub re: Real,
    pub im: Real,
}

impl Complex {
    pub fn new(re: Real, im: Real) -> Self {
        Complex { re, im }
    }

    pub fn real(re: Real) -> Self {
        Complex { re, im: Real::zero() }
    }

    pub fn imag(im: Real) -> Self {
        Complex { re: Real::zero(), im }
    }

    pub fn conj(&self) -> Self {
        Complex {
            re: self.re.clone(),
            im: -&self.im,
        }
    }

    pub fn norm_sqr(&self) -> Real {
        self.re.square() + self.im.square()
    }

    pub fn abs(&self) -> Real {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, k: &Real) -> Self {
        Complex {
            re: &self.re * k,
            im: &self.im * k,
        }
    }
}

impl Add<&Complex> for &Complex {
    type Output = Complex;
    fn add(self, rhs: &Complex) -> Complex {
        Complex {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Sub<&Complex> for &Complex {
    type Output = Complex;
    fn sub(self, rhs: &Complex) -> Complex {
        Complex {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl Mul<&Complex> for &Complex {
    type Output = Complex;
    fn mul(self, rhs: &Complex) -> Complex {
        Complex {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_precision_exceeds_fifty_digits() {
        assert!(bits_for_digits(50) >= 167 + GUARD_BITS);
        assert_eq!(bits_for_digits(50) % 64, 0);
    }

    #[test]
    fn pi_digits() {
        let pi = Real::pi();
        assert_eq!(pi.to_sci_string(40), "3.141592653589793238462643383279502884197e0");
    }

    #[test]
    fn sci_string_rounds_and_carries() {
        let x = Real::parse("9.9996").unwrap();
        assert_eq!(x.to_sci_string(4), "1.000e1");
        let y = Real::parse("-0.0012345").unwrap();
        assert_eq!(y.to_sci_string(3), "-1.23e-3");
        assert_eq!(Real::zero().to_sci_string(5), "0");
    }

    #[test]
    fn parse_roundtrip_at_emitted_digits() {
        let x = Real::pi() / Real::from_int(7) - Real::ratio(1, 3);
        let s = x.to_sci_string(50);
        let y = Real::parse(&s).unwrap();
        assert_eq!(y.to_sci_string(50), s);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(Real::parse("abc").is_err());
        assert!(Real::parse("").is_err());
    }

    #[test]
    fn hyperbolic_identity() {
        let x = Real::parse("0.37").unwrap();
        let d = x.cosh().square() - x.sinh().square() - Real::one();
        assert!(d.abs() < Real::parse("1e-70").unwrap());
        let c = x.coth() * x.sinh() - x.cosh();
        assert!(c.abs() < Real::parse("1e-70").unwrap());
    }

    #[test]
    fn powi_negative() {
        let x = Real::from_int(2);
        assert_eq!(x.powi(-3), Real::ratio(1, 8));
        assert_eq!(x.powi(0), Real::one());
    }

    #[test]
    fn to_f64_close() {
        assert_eq!(Real::ratio(1, 4).to_f64(), 0.25);
        assert!((Real::pi().to_f64() - std::f64::consts::PI).abs() < 1e-15);
    }
}
