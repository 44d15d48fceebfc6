//! Truncated Laurent series in one variable (the cutoff ε).
//!
//! A series stores the coefficients of ε^k for
//! `min_degree <= k < truncation_order`. Powers below `min_degree` are known
//! to vanish; powers at or above `truncation_order` are unknown. Every
//! operation returns the largest truncation order that its inputs actually
//! determine, computed from the valuations (first nonzero coefficient) of the
//! operands, so no result ever contains a coefficient polluted by truncated
//! terms.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error("division by a series whose retained coefficients all vanish")]
    DivisionByZeroSeries,
    #[error("argument scale factor must be nonzero")]
    ZeroScale,
    #[error("exp is only defined here for series without negative powers and with a known constant term")]
    SingularComposition,
    #[error("power {power} outside the retained range [{min_degree}, {truncation_order})")]
    OutOfRange {
        power: i32,
        min_degree: i32,
        truncation_order: i32,
    },
    #[error("a series needs at least one coefficient")]
    Empty,
    #[error("expansion order must be at least 1")]
    InvalidOrder,
}

#[derive(Clone, PartialEq)]
pub struct LaurentSeries {
    min_degree: i32,
    coeffs: Vec<Real>,
}

impl LaurentSeries {
    pub fn new(min_degree: i32, coeffs: Vec<Real>) -> Result<Self, SeriesError> {
        if coeffs.is_empty() {
            return Err(SeriesError::Empty);
        }
        Ok(LaurentSeries { min_degree, coeffs })
    }

    pub fn from_f64s(min_degree: i32, coeffs: &[f64]) -> Result<Self, SeriesError> {
        Self::new(min_degree, coeffs.iter().copied().map(Real::from_f64).collect())
    }

    fn zeros(min_degree: i32, truncation_order: i32) -> Self {
        assert!(truncation_order > min_degree, "empty series range");
        LaurentSeries {
            min_degree,
            coeffs: vec![Real::zero(); (truncation_order - min_degree) as usize],
        }
    }

    /// `coeff * ε^power + O(ε^truncation_order)`.
    pub fn monomial(power: i32, coeff: Real, truncation_order: i32) -> Self {
        let mut s = Self::zeros(power, truncation_order);
        s.coeffs[0] = coeff;
        s
    }

    pub fn constant(c: Real, truncation_order: i32) -> Self {
        Self::monomial(0, c, truncation_order)
    }

    /// The expansion variable itself.
    pub fn variable(truncation_order: i32) -> Self {
        Self::monomial(1, Real::one(), truncation_order)
    }

    pub fn min_degree(&self) -> i32 {
        self.min_degree
    }

    /// First power not represented.
    pub fn truncation_order(&self) -> i32 {
        self.min_degree + self.coeffs.len() as i32
    }

    pub fn coeffs(&self) -> &[Real] {
        &self.coeffs
    }

    /// Stored coefficient of ε^power.
    pub fn extract_coefficient(&self, power: i32) -> Result<Real, SeriesError> {
        if power < self.min_degree || power >= self.truncation_order() {
            return Err(SeriesError::OutOfRange {
                power,
                min_degree: self.min_degree,
                truncation_order: self.truncation_order(),
            });
        }
        Ok(self.coeffs[(power - self.min_degree) as usize].clone())
    }

    /// Coefficient of ε^power for any power below the truncation order
    /// (zero below `min_degree`).
    fn known(&self, power: i32) -> Real {
        debug_assert!(power < self.truncation_order());
        if power < self.min_degree {
            Real::zero()
        } else {
            self.coeffs[(power - self.min_degree) as usize].clone()
        }
    }

    /// Power of the first nonzero retained coefficient.
    pub fn valuation(&self) -> Option<i32> {
        self.coeffs
            .iter()
            .position(|c| !c.is_zero())
            .map(|i| self.min_degree + i as i32)
    }

    fn valuation_or_trunc(&self) -> i32 {
        self.valuation().unwrap_or_else(|| self.truncation_order())
    }

    /// Drops every coefficient at or above `order`.
    pub fn truncate(&self, order: i32) -> Self {
        let order = order.min(self.truncation_order());
        assert!(order > self.min_degree, "truncation would leave no coefficients");
        LaurentSeries {
            min_degree: self.min_degree,
            coeffs: self.coeffs[..(order - self.min_degree) as usize].to_vec(),
        }
    }

    pub fn scale(&self, k: &Real) -> Self {
        LaurentSeries {
            min_degree: self.min_degree,
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    /// Multiplication by ε^power.
    pub fn shift(&self, power: i32) -> Self {
        LaurentSeries {
            min_degree: self.min_degree + power,
            coeffs: self.coeffs.clone(),
        }
    }

    pub fn series_add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn series_sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b)
    }

    fn combine(&self, other: &Self, op: impl Fn(Real, Real) -> Real) -> Self {
        let min = self.min_degree.min(other.min_degree);
        let trunc = self.truncation_order().min(other.truncation_order());
        LaurentSeries {
            min_degree: min,
            coeffs: (min..trunc).map(|k| op(self.known(k), other.known(k))).collect(),
        }
    }

    /// Cauchy product.
    pub fn series_mul(&self, other: &Self) -> Self {
        let min = self.min_degree + other.min_degree;
        let trunc = (self.truncation_order() + other.valuation_or_trunc())
            .min(other.truncation_order() + self.valuation_or_trunc());
        let mut out = Self::zeros(min, trunc);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let pa = self.min_degree + i as i32;
            for (j, b) in other.coeffs.iter().enumerate() {
                let p = pa + other.min_degree + j as i32;
                if p >= trunc {
                    break;
                }
                out.coeffs[(p - min) as usize] += a * b;
            }
        }
        out
    }

    /// Long division after factoring the leading power out of the divisor.
    pub fn series_div(&self, divisor: &Self) -> Result<Self, SeriesError> {
        let vy = divisor.valuation().ok_or(SeriesError::DivisionByZeroSeries)?;
        let unit: Vec<Real> = divisor.coeffs[(vy - divisor.min_degree) as usize..].to_vec();
        let vx = self.valuation_or_trunc();
        let min = self.min_degree - vy;
        let trunc = self.truncation_order().min(divisor.truncation_order() + vx - vy) - vy;
        if trunc <= min {
            // Only possible when the dividend has no determined coefficient
            // left after the shift; report as a zero series of one term.
            return Ok(Self::zeros(min, min + 1));
        }
        let lead_inv = unit[0].recip();
        let mut r: Vec<Real> = Vec::with_capacity((trunc - min) as usize);
        for p in min..trunc {
            let mut acc = self.known(p + vy);
            for (j, u) in unit.iter().enumerate().skip(1) {
                let idx = p - j as i32 - min;
                if idx < 0 {
                    break;
                }
                acc -= u * &r[idx as usize];
            }
            r.push(acc * &lead_inv);
        }
        Ok(LaurentSeries {
            min_degree: min,
            coeffs: r,
        })
    }

    /// Term-wise d/dε.
    pub fn series_differentiate(&self) -> Self {
        LaurentSeries {
            min_degree: self.min_degree - 1,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c * &Real::from_int((self.min_degree + i as i32) as i64))
                .collect(),
        }
    }

    /// Substitutes ε -> c ε.
    pub fn series_scale_arg(&self, c: &Real) -> Result<Self, SeriesError> {
        if c.is_zero() {
            return Err(SeriesError::ZeroScale);
        }
        Ok(LaurentSeries {
            min_degree: self.min_degree,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, a)| a * &c.powi(self.min_degree + i as i32))
                .collect(),
        })
    }

    /// exp of a series with no negative powers. A constant part c is
    /// factored out as the scalar e^c.
    pub fn series_exp(&self) -> Result<Self, SeriesError> {
        let trunc = self.truncation_order();
        if trunc <= 0 || (self.min_degree..0).any(|k| !self.known(k).is_zero()) {
            return Err(SeriesError::SingularComposition);
        }
        let n = trunc as usize;
        let y: Vec<Real> = (0..trunc).map(|k| self.known(k)).collect();
        // E' = y' E  =>  n E_n = sum_{k=1..n} k y_k E_{n-k}
        let mut e: Vec<Real> = Vec::with_capacity(n);
        e.push(Real::one());
        for m in 1..n {
            let mut acc = Real::zero();
            for k in 1..=m {
                if !y[k].is_zero() {
                    acc += Real::from_int(k as i64) * &y[k] * &e[m - k];
                }
            }
            e.push(acc / Real::from_int(m as i64));
        }
        let out = LaurentSeries {
            min_degree: 0,
            coeffs: e,
        };
        Ok(if y[0].is_zero() { out } else { out.scale(&y[0].exp()) })
    }

    /// coth(x) = cosh(x)/sinh(x) through x^order inclusive (odd `order`
    /// gives the last nonzero term; even orders carry a trailing zero).
    pub fn series_coth(order: i32) -> Result<Self, SeriesError> {
        if order < 1 {
            return Err(SeriesError::InvalidOrder);
        }
        let t = order + 3;
        let x = Self::variable(t);
        let ep = x.series_exp()?;
        let em = x.neg_series().series_exp()?;
        let half = Real::ratio(1, 2);
        let cosh = ep.series_add(&em).scale(&half);
        let sinh = ep.series_sub(&em).scale(&half);
        Ok(cosh.series_div(&sinh)?.truncate(order + 1))
    }

    fn neg_series(&self) -> Self {
        self.scale(&Real::from_int(-1))
    }

    /// Σ c_k x^k over the retained range.
    pub fn evaluate(&self, x: &Real) -> Real {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| c * &x.powi(self.min_degree + i as i32))
            .sum()
    }

    /// Largest |difference| over the powers both series determine.
    pub fn max_abs_diff(&self, other: &Self) -> Real {
        self.series_sub(other)
            .coeffs
            .iter()
            .map(Real::abs)
            .fold(Real::zero(), Real::max)
    }
}

impl fmt::Debug for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.coeffs.iter().enumerate() {
            write!(f, "({:.12})*e^{} + ", c, self.min_degree + i as i32)?;
        }
        write!(f, "O(e^{})", self.truncation_order())
    }
}

impl Add for &LaurentSeries {
    type Output = LaurentSeries;
    fn add(self, rhs: &LaurentSeries) -> LaurentSeries {
        self.series_add(rhs)
    }
}

impl Sub for &LaurentSeries {
    type Output = LaurentSeries;
    fn sub(self, rhs: &LaurentSeries) -> LaurentSeries {
        self.series_sub(rhs)
    }
}

impl Mul for &LaurentSeries {
    type Output = LaurentSeries;
    fn mul(self, rhs: &LaurentSeries) -> LaurentSeries {
        self.series_mul(rhs)
    }
}

impl Neg for &LaurentSeries {
    type Output = LaurentSeries;
    fn neg(self) -> LaurentSeries {
        self.neg_series()
    }
}
