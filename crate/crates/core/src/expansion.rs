//! Small-ε Laurent expansion of the regularized energy, removal of the
//! outer-region terms, and the Casimir pressure.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::laurent::{LaurentSeries, SeriesError};
use crate::mode_sum::{FieldKind, ShapeParameter};
use crate::real::Real;

/// Highest power of ε kept by default (ε⁻⁴ through ε⁴).
pub const DEFAULT_ORDER: i32 = 4;

/// a-dependence of one Laurent coefficient, c(a) = Σ p_i a^{e_i}.
#[derive(Clone, Debug)]
pub struct PowerFit {
    pub power: i32,
    pub exponents: Vec<i32>,
    pub params: Vec<Real>,
}

impl PowerFit {
    /// The part that survives the subtraction: inverse powers of a only.
    pub fn kept_value(&self, a: &Real) -> Real {
        self.kept().map(|(e, p)| p * a.powi(e)).sum()
    }

    pub fn kept_derivative(&self, a: &Real) -> Real {
        self.kept()
            .map(|(e, p)| p * Real::from_int(e as i64) * a.powi(e - 1))
            .sum()
    }

    fn kept(&self) -> impl Iterator<Item = (i32, &Real)> {
        self.exponents.iter().copied().zip(&self.params).filter(|(e, _)| *e < 0)
    }
}

#[derive(Clone, Debug)]
pub struct EnergyExpansion {
    pub series: LaurentSeries,
    pub a: Real,
    pub shape: ShapeParameter,
    pub field: FieldKind,
    pub order: i32,
    pub subtracted: bool,
    /// One fit per retained power; empty before subtraction.
    pub fits: Vec<PowerFit>,
}

impl EnergyExpansion {
    pub fn coefficient(&self, power: i32) -> Result<Real> {
        Ok(self.series.extract_coefficient(power)?)
    }

    pub fn fit(&self, power: i32) -> Option<&PowerFit> {
        self.fits.iter().find(|f| f.power == power)
    }
}

/// EM expansion through ε^order.
pub fn energy_laurent(a: &Real, shape: &ShapeParameter, order: i32) -> Result<EnergyExpansion> {
    energy_laurent_field(a, shape, FieldKind::Electromagnetic, order)
}

/// Expands ∂²/∂ε² [G(ε − λε′)/ε] at ε′ = ε, with G from the coth form of the
/// mode sum: f″ = 2G/ε³ − 2G′/ε² + G″/ε, G^{(k)} taken at u = (1 − λ)ε.
pub fn energy_laurent_field(a: &Real, shape: &ShapeParameter, field: FieldKind, order: i32) -> Result<EnergyExpansion> {
    if !a.is_positive() {
        return Err(Error::InvalidGeometry("plate separation must be positive".into()));
    }
    if order < 0 {
        return Err(SeriesError::InvalidOrder.into());
    }
    let four_pi = Real::from_int(4) * Real::pi();
    let c = Real::pi() / (Real::from_int(2) * a);
    let coth_u = LaurentSeries::series_coth(order + 3)?.series_scale_arg(&c)?;
    let g = match field {
        FieldKind::Electromagnetic => coth_u.scale(&four_pi.recip()),
        FieldKind::Scalar => {
            let one = LaurentSeries::constant(Real::one(), coth_u.truncation_order());
            (&coth_u - &one).scale(&(Real::from_int(2) * &four_pi).recip())
        }
    };
    let g1 = g.series_differentiate();
    let g2 = g1.series_differentiate();
    let mu = shape.complement();
    let at = |s: &LaurentSeries| s.series_scale_arg(&mu);
    let two = Real::from_int(2);
    let series = &(&at(&g)?.shift(-3).scale(&two) - &at(&g1)?.shift(-2).scale(&two)) + &at(&g2)?.shift(-1);
    Ok(EnergyExpansion {
        series: series.truncate(order + 1),
        a: a.clone(),
        shape: shape.clone(),
        field,
        order,
        subtracted: false,
        fits: Vec::new(),
    })
}

/// Exponents of the a-ansatz: the constant and linear terms that the outer
/// region absorbs, plus odd inverse powers down to the one carried by ε^order
/// (the coefficient of ε^k has dimension length^{-3-k}).
fn ansatz_exponents(order: i32) -> Vec<i32> {
    let mut e = vec![0, 1];
    let mut p = -1;
    while p >= -(3 + order) {
        e.push(p);
        p -= 2;
    }
    e
}

/// Solves V x = b for several right-hand sides by Gaussian elimination with
/// partial pivoting.
fn solve(mut v: Vec<Vec<Real>>, mut rhs: Vec<Vec<Real>>) -> Result<Vec<Vec<Real>>> {
    let n = v.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                v[i][col]
                    .abs()
                    .partial_cmp(&v[j][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .ok_or(Error::FitSingular)?;
        if v[pivot][col].is_zero() {
            return Err(Error::FitSingular);
        }
        v.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let f = &v[row][col] / &v[col][col];
            if f.is_zero() {
                continue;
            }
            for k in col..n {
                let d = &f * &v[col][k];
                v[row][k] -= d;
            }
            for k in 0..rhs[row].len() {
                let d = &f * &rhs[col][k];
                rhs[row][k] -= d;
            }
        }
    }
    let m = rhs[0].len();
    let mut x = vec![vec![Real::zero(); m]; n];
    for row in (0..n).rev() {
        for k in 0..m {
            let mut acc = rhs[row][k].clone();
            for j in row + 1..n {
                acc -= &v[row][j] * &x[j][k];
            }
            x[row][k] = acc / &v[row][row];
        }
    }
    Ok(x)
}

pub fn subtract_outer(e: &EnergyExpansion) -> Result<EnergyExpansion> {
    subtract_outer_with(e, Execution::default())
}

/// Adds the outer region (a → L − a, L → ∞) and drops a-independent terms.
/// Every Laurent coefficient is re-evaluated on the grid a·2^j and fitted
/// exactly to the ansatz; the constant and linear parts are discarded and the
/// inverse powers kept.
pub fn subtract_outer_with(e: &EnergyExpansion, exec: Execution) -> Result<EnergyExpansion> {
    if e.subtracted {
        return Ok(e.clone());
    }
    let exps = ansatz_exponents(e.order);
    let grid: Vec<Real> = (0..exps.len()).map(|j| &e.a * Real::from_int(1 << j)).collect();
    let samples = exec
        .map_slice(&grid, |a| energy_laurent_field(a, &e.shape, e.field, e.order))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let lo = e.series.min_degree();
    let hi = e.series.truncation_order();
    let powers: Vec<i32> = (lo..hi).collect();
    let v: Vec<Vec<Real>> = grid.iter().map(|a| exps.iter().map(|&p| a.powi(p)).collect()).collect();
    let rhs = samples
        .iter()
        .map(|s| powers.iter().map(|&k| s.coefficient(k)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let params = solve(v, rhs)?;
    let fits: Vec<PowerFit> = powers
        .iter()
        .enumerate()
        .map(|(col, &power)| PowerFit {
            power,
            exponents: exps.clone(),
            params: params.iter().map(|row| row[col].clone()).collect(),
        })
        .collect();
    let coeffs = fits.iter().map(|f| f.kept_value(&e.a)).collect();
    Ok(EnergyExpansion {
        series: LaurentSeries::new(lo, coeffs)?,
        subtracted: true,
        fits,
        ..e.clone()
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceCoefficients {
    pub c_minus2: Real,
    pub c_0: Real,
}

/// Closed-form ε⁻² and ε⁰ coefficients of the subtracted EM energy:
/// −λ/12a and −(1 − λ)π²/720a³ + λ(λ² − 1)π²/720a³.
pub fn reference_coefficients(a: &Real, shape: &ShapeParameter) -> ReferenceCoefficients {
    let l = shape.value();
    let k = Real::pi().square() / (Real::from_int(720) * a.powi(3));
    ReferenceCoefficients {
        c_minus2: -(l / (Real::from_int(12) * a)),
        c_0: -(shape.complement() * &k) + l * (l.square() - Real::one()) * &k,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CasimirPressure {
    /// −∂c₀/∂a; negative means attraction.
    pub finite_part: Real,
    /// −∂c₋₂/∂a, the coefficient of 1/ε². Never folded into the finite part.
    pub divergent_coeff: Real,
}

pub fn casimir_pressure(a: &Real, shape: &ShapeParameter, field: FieldKind) -> Result<CasimirPressure> {
    let e = subtract_outer(&energy_laurent_field(a, shape, field, DEFAULT_ORDER)?)?;
    let slope = |k: i32| e.fit(k).map(|f| -f.kept_derivative(a)).ok_or(Error::FitSingular);
    Ok(CasimirPressure {
        finite_part: slope(0)?,
        divergent_coeff: slope(-2)?,
    })
}
