//! Regularized vacuum energy per unit plate area by direct mode summation,
//! its closed coth form, and the cavity eigenmodes.
//!
//! Mode n between plates at z = 0 and z = a has mass m = nπ/a. Each mode is
//! damped by e^{-εω} and weighted by the shape factor e^{λεm}; the transverse
//! momentum integral is done analytically.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::real::{Complex, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Electromagnetic,
    /// Scalar field with Dirichlet conditions on both plates.
    Scalar,
}

impl FieldKind {
    /// Weight of mode n in the energy sum relative to one full EM mode.
    /// EM has a single polarization at n = 0; the Dirichlet scalar has no
    /// n = 0 mode and one polarization elsewhere.
    pub fn mode_weight(self, n: u64) -> Real {
        match (self, n) {
            (FieldKind::Electromagnetic, 0) => Real::ratio(1, 2),
            (FieldKind::Electromagnetic, _) => Real::one(),
            (FieldKind::Scalar, 0) => Real::zero(),
            (FieldKind::Scalar, _) => Real::ratio(1, 2),
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldKind::Electromagnetic => "em",
            FieldKind::Scalar => "scalar",
        })
    }
}

impl FromStr for FieldKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "em" => Ok(FieldKind::Electromagnetic),
            "scalar" => Ok(FieldKind::Scalar),
            other => Err(format!("unknown field {other:?} (expected em or scalar)")),
        }
    }
}

/// The shape parameter λ of the regulator e^{λεnπ/a}, restricted to [0, 1).
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeParameter(Real);

impl ShapeParameter {
    pub fn new(lambda: Real) -> Result<Self> {
        if !lambda.is_finite() || lambda.is_negative() || lambda >= Real::one() {
            return Err(Error::CutoffDomain(format!(
                "lambda = {} is outside [0, 1)",
                lambda.to_sci_string(12)
            )));
        }
        Ok(ShapeParameter(lambda))
    }

    pub fn from_f64(lambda: f64) -> Result<Self> {
        Self::new(Real::from_f64(lambda))
    }

    pub fn zero() -> Self {
        ShapeParameter(Real::zero())
    }

    pub fn value(&self) -> &Real {
        &self.0
    }

    /// 1 − λ, strictly positive.
    pub fn complement(&self) -> Real {
        Real::one() - &self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CutoffParams {
    epsilon: Real,
    shape: ShapeParameter,
}

impl CutoffParams {
    pub fn new(epsilon: Real, shape: ShapeParameter) -> Result<Self> {
        if !epsilon.is_positive() || !epsilon.is_finite() {
            return Err(Error::CutoffDomain("epsilon must be positive".into()));
        }
        Ok(CutoffParams { epsilon, shape })
    }

    pub fn from_f64(epsilon: f64, lambda: f64) -> Result<Self> {
        Self::new(Real::from_f64(epsilon), ShapeParameter::from_f64(lambda)?)
    }

    pub fn epsilon(&self) -> &Real {
        &self.epsilon
    }

    pub fn shape(&self) -> &ShapeParameter {
        &self.shape
    }

    pub fn lambda(&self) -> &Real {
        self.shape.value()
    }
}

/// Plates at z = 0 and z = a, optionally inside an outer box of size L.
#[derive(Clone, Debug, PartialEq)]
pub struct PlateGeometry {
    a: Real,
    outer: Option<Real>,
}

impl PlateGeometry {
    pub fn new(a: Real) -> Result<Self> {
        if !a.is_positive() || !a.is_finite() {
            return Err(Error::InvalidGeometry("plate separation must be positive".into()));
        }
        Ok(PlateGeometry { a, outer: None })
    }

    pub fn from_f64(a: f64) -> Result<Self> {
        Self::new(Real::from_f64(a))
    }

    pub fn with_outer(self, l: Real) -> Result<Self> {
        if l <= self.a {
            return Err(Error::InvalidGeometry(
                "outer box must be larger than the plate separation".into(),
            ));
        }
        Ok(PlateGeometry { outer: Some(l), ..self })
    }

    pub fn a(&self) -> &Real {
        &self.a
    }

    pub fn outer(&self) -> Option<&Real> {
        self.outer.as_ref()
    }

    /// The geometry of the outer region, of width L − a.
    pub fn outer_region(&self) -> Option<Result<PlateGeometry>> {
        self.outer.as_ref().map(|l| PlateGeometry::new(l - &self.a))
    }

    /// Mass nπ/a of mode n.
    pub fn mode_mass(&self, n: u64) -> Real {
        Real::from_int(n as i64) * Real::pi() / &self.a
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polarization {
    /// A ∝ k̄ sin(nπz/a), no z component.
    TransverseElectric,
    /// Built from ẑω² + ẑ·∇∇ acting on cos(nπz/a); no normal magnetic field.
    TransverseMagnetic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeIndex {
    n: u64,
    polarization: Polarization,
    k: [Real; 2],
}

impl ModeIndex {
    pub fn new(n: u64, polarization: Polarization, kx: Real, ky: Real) -> Result<Self> {
        if n == 0 && polarization == Polarization::TransverseElectric {
            return Err(Error::InvalidMode(
                "n = 0 has only the transverse magnetic polarization".into(),
            ));
        }
        if (kx.square() + ky.square()).is_zero() {
            return Err(Error::InvalidMode("transverse wave vector must be nonzero".into()));
        }
        Ok(ModeIndex {
            n,
            polarization,
            k: [kx, ky],
        })
    }

    pub fn from_f64(n: u64, polarization: Polarization, kx: f64, ky: f64) -> Result<Self> {
        Self::new(n, polarization, Real::from_f64(kx), Real::from_f64(ky))
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn polarization(&self) -> Polarization {
        self.polarization
    }

    pub fn k(&self) -> &[Real; 2] {
        &self.k
    }
}

/// ∫ d²k/(2π)² ω e^{-εω} with ω² = k² + m²:
/// e^{-εm}(m²/ε + 2m/ε² + 2/ε³)/(2π).
pub fn transverse_integral(m: &Real, epsilon: &Real) -> Result<Real> {
    if !epsilon.is_positive() {
        return Err(Error::NonPositiveEpsilon);
    }
    if m.is_negative() {
        return Err(Error::InvalidMode("mode mass must be non-negative".into()));
    }
    let inv = epsilon.recip();
    let poly = (m.square() + Real::from_int(2) * m * &inv + Real::from_int(2) * inv.square()) * &inv;
    Ok((-(m * epsilon)).exp() * poly / (Real::from_int(2) * Real::pi()))
}

/// Unweighted contribution of mode n: e^{λεm} times the transverse integral.
fn mode_term(geom: &PlateGeometry, cutoff: &CutoffParams, n: u64) -> Result<Real> {
    let m = geom.mode_mass(n);
    let shape = (cutoff.lambda() * cutoff.epsilon() * &m).exp();
    Ok(shape * transverse_integral(&m, cutoff.epsilon())?)
}

/// A truncated mode sum and a certified bound on the omitted tail.
#[derive(Clone, Debug)]
pub struct ModeSum {
    pub energy: Real,
    /// None while the terms are still growing at the cut (no bound yet).
    pub remainder_bound: Option<Real>,
    pub n_max: u64,
}

impl ModeSum {
    pub fn relative_bound(&self) -> Option<Real> {
        self.remainder_bound.as_ref().map(|b| b / self.energy.abs())
    }

    /// Fails with NotConverged unless the tail bound is below `rel_tol`
    /// relative to the partial sum.
    pub fn check(&self, rel_tol: &Real) -> Result<&Self> {
        match self.relative_bound() {
            Some(b) if &b <= rel_tol => Ok(self),
            other => Err(Error::NotConverged {
                n_max: self.n_max,
                bound: other.map_or_else(|| "unbounded".into(), |b| b.to_sci_string(6)),
                tolerance: rel_tol.to_sci_string(6),
            }),
        }
    }
}

/// Tail bound w·t_{N+1}/(1 − ρ), ρ = t_{N+2}/t_{N+1}. The term ratio is
/// non-increasing in n (log-concave prefactor times a geometric factor), so
/// ρ bounds every later ratio.
fn tail_bound(weight: &Real, t1: &Real, t2: &Real) -> Option<Real> {
    if t1.is_zero() {
        return Some(Real::zero());
    }
    let rho = t2 / t1;
    if rho >= Real::one() {
        return None;
    }
    Some(weight * t1 / (Real::one() - rho))
}

pub fn energy_mode_sum(geom: &PlateGeometry, cutoff: &CutoffParams, field: FieldKind, n_max: u64) -> Result<ModeSum> {
    energy_mode_sum_with(geom, cutoff, field, n_max, Execution::default())
}

/// Σ'_{n=0}^{n_max} w_n e^{λεnπ/a} ∫ d²k/(2π)² ω e^{-εω}.
pub fn energy_mode_sum_with(
    geom: &PlateGeometry,
    cutoff: &CutoffParams,
    field: FieldKind,
    n_max: u64,
    exec: Execution,
) -> Result<ModeSum> {
    let count = usize::try_from(n_max).map_err(|_| Error::InvalidMode("n_max too large".into()))? + 3;
    let terms = exec.map_range(count, |n| mode_term(geom, cutoff, n as u64));
    let terms = terms.into_iter().collect::<Result<Vec<_>>>()?;
    let energy: Real = terms[..count - 2]
        .iter()
        .enumerate()
        .map(|(n, t)| field.mode_weight(n as u64) * t)
        .sum();
    let weight = field.mode_weight(1);
    let remainder_bound = tail_bound(&weight, &terms[count - 2], &terms[count - 1]);
    Ok(ModeSum {
        energy,
        remainder_bound,
        n_max,
    })
}

/// Smallest n_max (up to `n_limit`) whose certified tail bound is below
/// `rel_tol` relative to the closed-form energy.
pub fn n_max_for_tolerance(
    geom: &PlateGeometry,
    cutoff: &CutoffParams,
    field: FieldKind,
    rel_tol: &Real,
    n_limit: u64,
) -> Result<u64> {
    let target = energy_closed_form(geom, cutoff, field)?.abs() * rel_tol;
    let weight = field.mode_weight(1);
    let ok = |n: u64| -> Result<bool> {
        let t1 = mode_term(geom, cutoff, n + 1)?;
        let t2 = mode_term(geom, cutoff, n + 2)?;
        Ok(matches!(tail_bound(&weight, &t1, &t2), Some(b) if b < target))
    };
    let mut hi = 1u64;
    while !ok(hi)? {
        if hi >= n_limit {
            let t1 = mode_term(geom, cutoff, n_limit + 1)?;
            let t2 = mode_term(geom, cutoff, n_limit + 2)?;
            let bound = tail_bound(&weight, &t1, &t2)
                .map_or_else(|| "unbounded".into(), |b| (b / (&target / rel_tol)).to_sci_string(6));
            return Err(Error::NotConverged {
                n_max: n_limit,
                bound,
                tolerance: rel_tol.to_sci_string(6),
            });
        }
        hi = (hi * 2).min(n_limit);
    }
    let mut lo = hi / 2;
    // invariant: ok(hi), and lo == 0 or !ok(lo)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(if lo == 0 && ok(0)? { 0 } else { hi })
}

/// Mode sum carried far enough that its tail bound is below `rel_tol`.
pub fn energy_mode_sum_converged(
    geom: &PlateGeometry,
    cutoff: &CutoffParams,
    field: FieldKind,
    rel_tol: &Real,
    n_limit: u64,
    exec: Execution,
) -> Result<ModeSum> {
    let n = n_max_for_tolerance(geom, cutoff, field, rel_tol, n_limit)?;
    let sum = energy_mode_sum_with(geom, cutoff, field, n, exec)?;
    sum.check(rel_tol)?;
    Ok(sum)
}

/// ∂²/∂ε² [G(ε − λε′)/ε] at ε′ = ε, where G(u) = coth(πu/2a)/4π for EM and
/// (coth(πu/2a) − 1)/8π for the scalar field. The λε′ occurrence is held
/// fixed while differentiating.
pub fn energy_closed_form(geom: &PlateGeometry, cutoff: &CutoffParams, field: FieldKind) -> Result<Real> {
    let eps = cutoff.epsilon();
    let c = Real::pi() / (Real::from_int(2) * geom.a());
    let x = &c * cutoff.shape().complement() * eps;
    let coth = x.coth();
    let csch2 = coth.square() - Real::one();
    let four_pi = Real::from_int(4) * Real::pi();
    let (g, kappa) = match field {
        FieldKind::Electromagnetic => (coth.clone() / &four_pi, four_pi.recip()),
        FieldKind::Scalar => {
            let k = (Real::from_int(2) * &four_pi).recip();
            ((&coth - Real::one()) * &k, k)
        }
    };
    let g1 = -(&kappa * &c * &csch2);
    let g2 = Real::from_int(2) * &kappa * c.square() * &coth * &csch2;
    let two = Real::from_int(2);
    Ok(&two * g / eps.powi(3) - &two * g1 / eps.square() + g2 / eps)
}

/// Spatial components (x, y, z) of the normalized eigenmode at height z,
/// with the transverse plane wave e^{ik·x} factored out.
pub fn eigenmode(idx: &ModeIndex, geom: &PlateGeometry, z: &Real) -> Result<[Complex; 3]> {
    let a = geom.a();
    if z.is_negative() || z > a {
        return Err(Error::InvalidGeometry("z must lie in [0, a]".into()));
    }
    let [kx, ky] = &idx.k;
    let k2 = kx.square() + ky.square();
    let kabs = k2.sqrt();
    let m = geom.mode_mass(idx.n);
    let norm = (Real::from_int(2) / a).sqrt();
    let phase = &m * z;
    match idx.polarization {
        Polarization::TransverseElectric => {
            let f = norm * phase.sin() / &kabs;
            // k̄_i = ε^{ij} k_j
            Ok([Complex::real(ky * &f), Complex::real(-(kx * &f)), Complex::default()])
        }
        Polarization::TransverseMagnetic => {
            let omega = (&k2 + m.square()).sqrt();
            let mut pre = norm / (&kabs * &omega);
            if idx.n == 0 {
                pre /= Real::from_int(2).sqrt();
            }
            // ẑ·∇ ∇^i on cos(mz) e^{ik·x}: -i m k_i sin(mz) transverse, -m² cos(mz) along z
            let s = -(&pre * &m * phase.sin());
            Ok([
                Complex::imag(kx * &s),
                Complex::imag(ky * &s),
                Complex::real(&pre * &k2 * phase.cos()),
            ])
        }
    }
}

/// Largest of |A_x|, |A_y| (tangential E ∝ A in radiation gauge) and
/// |ẑ·(∇×A)| = |k_x A_y − k_y A_x| over both plates.
pub fn check_boundary_conditions(idx: &ModeIndex, geom: &PlateGeometry) -> Result<Real> {
    let mut worst = Real::zero();
    for z in [Real::zero(), geom.a().clone()] {
        let [ax, ay, _] = eigenmode(idx, geom, &z)?;
        let [kx, ky] = &idx.k;
        let bz = &ay.scale(kx) - &ax.scale(ky);
        for r in [ax.abs(), ay.abs(), bz.abs()] {
            worst = worst.max(r);
        }
    }
    Ok(worst)
}
