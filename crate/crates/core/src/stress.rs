//! Point-split vacuum stress tensors between the plates.
//!
//! Every tensor here is built from radial functions f(s) of the invariant
//! separation length. For the EM field the summed kernel is
//! f(s) = H(u)/s with u = s - λ s' (s' frozen, then set equal to s), and
//!
//!   T = -∂∂f + ẑẑ □f = α S1 + β S2,   α = -4/3 (P + 2Q),   β = (P - Q)/3,
//!
//! where P = f'' and Q = f'/s. The decomposition coefficients are read off
//! the Laurent expansion of α and β in s. The scalar field uses two radial
//! functions: a z-independent one for the S1 part and a z-dependent one for
//! the S2 part.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::expansion::{energy_laurent, subtract_outer};
use crate::laurent::LaurentSeries;
use crate::minkowski::{transform_tensor, BoostPlane, FourVector, LorentzTransform, SeparationVector, SymTensor4, T};
use crate::mode_sum::{FieldKind, PlateGeometry, ShapeParameter};
use crate::real::{working_digits, Real};

/// Highest power of u kept in the kernel expansions; enough to fix the s^0
/// coefficient of α and β with one order to spare.
const KERNEL_ORDER: i32 = 5;

/// A radial function and its first two derivatives at one separation.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialKernel {
    pub s: Real,
    pub value: Real,
    pub first: Real,
    pub second: Real,
}

impl RadialKernel {
    /// f(s) = H(u)/s, given H and its u-derivatives at u.
    pub fn from_profile(s: &Real, h: &[Real; 3]) -> Self {
        let inv = s.recip();
        let inv2 = inv.square();
        let inv3 = &inv2 * &inv;
        let two = Real::from_int(2);
        RadialKernel {
            s: s.clone(),
            value: &h[0] * &inv,
            first: &h[1] * &inv - &h[0] * &inv2,
            second: &two * &h[0] * &inv3 - &two * &h[1] * &inv2 + &h[2] * &inv,
        }
    }

    /// Radial Laplacian of the (2+1)-dimensional subspace: f'' + 2f'/s.
    pub fn laplacian(&self) -> Real {
        &self.second + &(Real::from_int(2) * &self.first / &self.s)
    }
}

/// Reduced massive kernel D_m(s) = e^{-ms}/(4πs).
pub fn propagator_kernel(m: &Real, s: &Real) -> Result<RadialKernel> {
    if !s.is_positive() {
        return Err(Error::NonPositiveSeparation);
    }
    if m.is_negative() {
        return Err(Error::InvalidMode("negative mass".into()));
    }
    let e = (-(m * s)).exp() / (Real::from_int(4) * Real::pi());
    let ms = m * s;
    let inv = s.recip();
    Ok(RadialKernel {
        s: s.clone(),
        value: &e * &inv,
        first: -(&e * &(&ms + &Real::one()) * &inv.square()),
        second: &e * &(ms.square() + Real::from_int(2) * &ms + Real::from_int(2)) * &inv.powi(3),
    })
}

/// Which summed mode kernel H(u) is meant.
#[derive(Clone, Debug)]
enum Profile {
    /// Σ' e^{-unπ/a}/(2πa) with the EM weights: coth(cu)/(4πa).
    Electromagnetic,
    /// Σ_{n>=1} e^{-unπ/a}/(2πa) = (coth(cu) - 1)/(4πa).
    ScalarBulk,
    /// Σ_{n>=1} sin²(nπz/a) e^{-unπ/a}/(2πa); carries C = cos(2πz/a).
    ScalarWall(Real),
}

impl Profile {
    /// Strength of the free-space 1/u pole.
    fn pole(&self) -> Real {
        let pi2 = Real::pi().square();
        match self {
            Profile::Electromagnetic | Profile::ScalarBulk => (Real::from_int(2) * pi2).recip(),
            Profile::ScalarWall(_) => (Real::from_int(4) * pi2).recip(),
        }
    }

    /// H, H', H'' at u > 0.
    fn exact(&self, a: &Real, u: &Real, subtracted: bool) -> [Real; 3] {
        let pi = Real::pi();
        let two = Real::from_int(2);
        let c = &pi / &(&two * a);
        let mut h = match self {
            Profile::Electromagnetic | Profile::ScalarBulk => {
                let k = (Real::from_int(4) * &pi * a).recip();
                let x = &c * u;
                let (sh, ch) = (x.sinh(), x.cosh());
                let coth = &ch / &sh;
                let csch2 = sh.square().recip();
                let shift = if matches!(self, Profile::ScalarBulk) {
                    Real::one()
                } else {
                    Real::zero()
                };
                [
                    &k * &(&coth - &shift),
                    -(&k * &c * &csch2),
                    &two * &k * &c.square() * &coth * &csch2,
                ]
            }
            Profile::ScalarWall(cc) => {
                let k = (Real::from_int(8) * &pi * a).recip();
                let kappa = &pi / a;
                let y = &kappa * u;
                let half = &y / &two;
                let (shh, chh) = (half.sinh(), half.cosh());
                let coth = &chh / &shh;
                let csch2 = shh.square().recip();
                let (sh, ch) = (y.sinh(), y.cosh());
                let d = &ch - cc;
                let r0 = &sh / &d;
                let r1 = (Real::one() - cc * &ch) / d.square();
                let r2 = &sh * &(cc * &ch + cc.square() - &two) / d.powi(3);
                let halfr = Real::ratio(1, 2);
                [
                    &k * &(&coth - &r0),
                    &k * &kappa * &(-(&halfr * &csch2) - r1),
                    &k * &kappa.square() * &(&halfr * &coth * &csch2 - r2),
                ]
            }
        };
        if subtracted {
            let p = self.pole();
            let inv = u.recip();
            h[0] -= &p * &inv;
            h[1] += &p * &inv.square();
            h[2] -= &two * &p * &inv.powi(3);
        }
        h
    }

    /// Laurent expansion of H(u), coefficients through u^KERNEL_ORDER.
    fn series(&self, a: &Real, subtracted: bool) -> Result<LaurentSeries> {
        let pi = Real::pi();
        let trunc = KERNEL_ORDER + 1;
        let c = &pi / &(Real::from_int(2) * a);
        let coth = LaurentSeries::series_coth(KERNEL_ORDER)?.series_scale_arg(&c)?;
        let h = match self {
            Profile::Electromagnetic => coth.scale(&(Real::from_int(4) * &pi * a).recip()),
            Profile::ScalarBulk => coth
                .series_sub(&LaurentSeries::constant(Real::one(), trunc))
                .scale(&(Real::from_int(4) * &pi * a).recip()),
            Profile::ScalarWall(cc) => {
                let y = LaurentSeries::variable(trunc);
                let ep = y.series_exp()?;
                let em = y.scale(&Real::from_int(-1)).series_exp()?;
                let half = Real::ratio(1, 2);
                let sinh = ep.series_sub(&em).scale(&half);
                let cosh = ep.series_add(&em).scale(&half);
                let denom = cosh.series_sub(&LaurentSeries::constant(cc.clone(), trunc));
                let r = sinh.series_div(&denom)?.series_scale_arg(&(&pi / a))?;
                coth.series_sub(&r).scale(&(Real::from_int(8) * &pi * a).recip())
            }
        };
        Ok(if subtracted {
            h.series_sub(&LaurentSeries::monomial(-1, self.pole(), trunc))
        } else {
            h
        })
    }
}

fn check_separation(s: &Real, s_frozen: &Real, shape: &ShapeParameter) -> Result<Real> {
    if !s.is_positive() {
        return Err(Error::NonPositiveSeparation);
    }
    let u = s - &(shape.value() * s_frozen);
    if !u.is_positive() {
        return Err(Error::CothPole);
    }
    Ok(u)
}

/// F = coth((s - λ s')π/2a)/(4πas), differentiated in s with s' held fixed.
pub fn generating_function(
    s: &Real,
    s_frozen: &Real,
    shape: &ShapeParameter,
    geom: &PlateGeometry,
) -> Result<RadialKernel> {
    let u = check_separation(s, s_frozen, shape)?;
    Ok(RadialKernel::from_profile(
        s,
        &Profile::Electromagnetic.exact(geom.a(), &u, false),
    ))
}

/// F with its a -> ∞ limit 1/(2π² s (s - λ s')) removed.
pub fn subtracted_generating_function(
    s: &Real,
    s_frozen: &Real,
    shape: &ShapeParameter,
    geom: &PlateGeometry,
) -> Result<RadialKernel> {
    let u = check_separation(s, s_frozen, shape)?;
    Ok(RadialKernel::from_profile(
        s,
        &Profile::Electromagnetic.exact(geom.a(), &u, true),
    ))
}

/// h^{mu nu}: the metric of the (t, x, y) subspace.
fn subspace_metric() -> SymTensor4 {
    SymTensor4::metric().sub(&SymTensor4::outer(&FourVector::z_hat()))
}

/// ∂²f/∂ε_mu ∂ε_nu for a radial f, all indices up.
pub fn radial_hessian(kernel: &RadialKernel, eps: &SeparationVector) -> SymTensor4 {
    let s = eps.length();
    let ee = SymTensor4::outer(eps.vector());
    let along = &kernel.second / &s.square() - &kernel.first / &s.powi(3);
    ee.scale(&along).add(&subspace_metric().scale(&(&kernel.first / s)))
}

/// -∂^mu ∂^nu f + ẑ^mu ẑ^nu □f.
pub fn second_derivative_tensor(kernel: &RadialKernel, eps: &SeparationVector) -> SymTensor4 {
    let zz = SymTensor4::outer(&FourVector::z_hat());
    zz.scale(&kernel.laplacian()).sub(&radial_hessian(kernel, eps))
}

/// g/4 - ẑẑ.
pub fn structure_s1() -> SymTensor4 {
    SymTensor4::metric()
        .scale(&Real::ratio(1, 4))
        .sub(&SymTensor4::outer(&FourVector::z_hat()))
}

/// g - 3 ε̂ε̂ - ẑẑ.
pub fn structure_s2(eps: &SeparationVector) -> SymTensor4 {
    let unit = eps.unit();
    subspace_metric().sub(&SymTensor4::outer(unit.vector()).scale(&Real::from_int(3)))
}

/// Stress tensor stored as A S1 + (B_finite + B_div/ε²) S2.
#[derive(Clone, Debug, PartialEq)]
pub struct StressDecomposition {
    pub a_coeff: Real,
    pub b_finite: Real,
    pub b_divergent_eps2: Real,
    pub separation: SeparationVector,
    pub field: FieldKind,
    pub z: Option<Real>,
}

impl StressDecomposition {
    pub fn direction(&self) -> SeparationVector {
        self.separation.unit()
    }

    /// Full S2 coefficient at the stored separation length.
    pub fn b_total(&self) -> Real {
        &self.b_finite + &(&self.b_divergent_eps2 / &self.separation.length().square())
    }

    pub fn assemble(&self) -> SymTensor4 {
        structure_s1()
            .scale(&self.a_coeff)
            .add(&structure_s2(&self.separation).scale(&self.b_total()))
    }
}

/// Laurent expansions in s of the S1 and S2 coefficients.
#[derive(Clone, Debug)]
pub struct StressSeries {
    pub alpha: LaurentSeries,
    pub beta: LaurentSeries,
}

/// P = f'' and Q = f'/s as series in s, with u = (1 - λ)s.
fn radial_series(h: &LaurentSeries, shape: &ShapeParameter) -> Result<(LaurentSeries, LaurentSeries)> {
    let scale = shape.complement();
    let h1 = h.series_differentiate();
    let h2 = h1.series_differentiate();
    let h0 = h.series_scale_arg(&scale)?;
    let h1 = h1.series_scale_arg(&scale)?;
    let h2 = h2.series_scale_arg(&scale)?;
    let two = Real::from_int(2);
    let p = h0
        .shift(-3)
        .scale(&two)
        .series_sub(&h1.shift(-2).scale(&two))
        .series_add(&h2.shift(-1));
    let q = h1.shift(-2).series_sub(&h0.shift(-3));
    Ok((p, q))
}

fn alpha_of(p: &LaurentSeries, q: &LaurentSeries, k: Real) -> LaurentSeries {
    p.series_add(&q.scale(&Real::from_int(2))).scale(&k)
}

fn beta_of(p: &LaurentSeries, q: &LaurentSeries) -> LaurentSeries {
    p.series_sub(q).scale(&Real::ratio(1, 3))
}

/// Subtracted EM stress as Laurent series in s.
pub fn em_stress_series(geom: &PlateGeometry, shape: &ShapeParameter) -> Result<StressSeries> {
    let h = Profile::Electromagnetic.series(geom.a(), true)?;
    let (p, q) = radial_series(&h, shape)?;
    Ok(StressSeries {
        alpha: alpha_of(&p, &q, Real::ratio(-4, 3)),
        beta: beta_of(&p, &q),
    })
}

fn decompose(
    series: &StressSeries,
    eps: &SeparationVector,
    field: FieldKind,
    z: Option<Real>,
) -> Result<StressDecomposition> {
    Ok(StressDecomposition {
        a_coeff: series.alpha.extract_coefficient(0)?,
        b_finite: series.beta.extract_coefficient(0)?,
        b_divergent_eps2: series.beta.extract_coefficient(-2)?,
        separation: eps.clone(),
        field,
        z,
    })
}

/// Subtracted EM stress decomposition.
pub fn em_stress(geom: &PlateGeometry, shape: &ShapeParameter, eps: &SeparationVector) -> Result<StressDecomposition> {
    decompose(&em_stress_series(geom, shape)?, eps, FieldKind::Electromagnetic, None)
}

/// sin²(πz/a), rejecting points on or outside the plates.
fn wall_factor(geom: &PlateGeometry, z: &Real) -> Result<Real> {
    let a = geom.a();
    if z.is_zero() || z == a {
        return Err(Error::WallContact(z.to_sci_string(12)));
    }
    if z.is_negative() || z > a {
        return Err(Error::InvalidGeometry(format!("z = {z} is outside 0 < z < {a}")));
    }
    let s2 = (Real::pi() * z / a).sin().square();
    if s2.is_zero() {
        return Err(Error::WallContact(z.to_sci_string(12)));
    }
    Ok(s2)
}

/// Subtracted scalar stress at height z, from the closed-form coefficients.
pub fn scalar_stress(
    geom: &PlateGeometry,
    shape: &ShapeParameter,
    eps: &SeparationVector,
    z: &Real,
) -> Result<StressDecomposition> {
    let sigma = wall_factor(geom, z)?;
    let a = geom.a();
    let l = shape.value();
    let pi2 = Real::pi().square();
    let pre = l / &Real::from_int(48);
    let three = Real::from_int(3);
    let b_div = &pre * &(&three / &sigma - Real::one()) / a.square();
    let bracket = (&three - Real::from_int(2) * &sigma) / sigma.square() - Real::ratio(1, 15);
    let b_fin = &pre * &pi2 / &(Real::from_int(4) * a.powi(4)) * &(Real::one() - l.square()) * &bracket;
    Ok(StressDecomposition {
        a_coeff: shape.complement() * &pi2 / &(Real::from_int(360) * a.powi(4)),
        b_finite: b_fin,
        b_divergent_eps2: b_div,
        separation: eps.clone(),
        field: FieldKind::Scalar,
        z: Some(z.clone()),
    })
}

fn wall_profile(geom: &PlateGeometry, z: &Real) -> Result<Profile> {
    wall_factor(geom, z)?;
    Ok(Profile::ScalarWall(
        (Real::from_int(2) * Real::pi() * z / geom.a()).cos(),
    ))
}

/// Subtracted scalar stress as Laurent series in s, summed from the modes.
pub fn scalar_stress_series(geom: &PlateGeometry, shape: &ShapeParameter, z: &Real) -> Result<StressSeries> {
    let (p0, q0) = radial_series(&Profile::ScalarBulk.series(geom.a(), true)?, shape)?;
    let (pz, qz) = radial_series(&wall_profile(geom, z)?.series(geom.a(), true)?, shape)?;
    Ok(StressSeries {
        alpha: alpha_of(&p0, &q0, Real::ratio(-2, 3)),
        beta: beta_of(&pz, &qz),
    })
}

/// Same decomposition as [`scalar_stress`], derived from the mode sum.
pub fn scalar_stress_from_modes(
    geom: &PlateGeometry,
    shape: &ShapeParameter,
    eps: &SeparationVector,
    z: &Real,
) -> Result<StressDecomposition> {
    decompose(
        &scalar_stress_series(geom, shape, z)?,
        eps,
        FieldKind::Scalar,
        Some(z.clone()),
    )
}

fn point_u(shape: &ShapeParameter, eps: &SeparationVector) -> Real {
    shape.complement() * eps.length()
}

/// Exact EM stress at finite separation.
pub fn em_stress_tensor(
    geom: &PlateGeometry,
    shape: &ShapeParameter,
    eps: &SeparationVector,
    subtracted: bool,
) -> SymTensor4 {
    let h = Profile::Electromagnetic.exact(geom.a(), &point_u(shape, eps), subtracted);
    second_derivative_tensor(&RadialKernel::from_profile(eps.length(), &h), eps)
}

/// Scalar tensor from the bulk and wall radial functions.
fn scalar_tensor_from_kernels(bulk: &RadialKernel, wall: &RadialKernel, eps: &SeparationVector) -> SymTensor4 {
    let third = Real::ratio(1, 3);
    let box_z = wall.laplacian();
    let zz = SymTensor4::outer(&FourVector::z_hat());
    let traceless = SymTensor4::metric()
        .sub(&zz)
        .scale(&(&third * &box_z))
        .sub(&radial_hessian(wall, eps));
    structure_s1()
        .scale(&(Real::ratio(-2, 3) * &bulk.laplacian()))
        .add(&traceless)
}

/// Exact scalar stress at finite separation and height z.
pub fn scalar_stress_tensor(
    geom: &PlateGeometry,
    shape: &ShapeParameter,
    eps: &SeparationVector,
    z: &Real,
    subtracted: bool,
) -> Result<SymTensor4> {
    let u = point_u(shape, eps);
    let s = eps.length();
    let bulk = RadialKernel::from_profile(s, &Profile::ScalarBulk.exact(geom.a(), &u, subtracted));
    let wall = RadialKernel::from_profile(s, &wall_profile(geom, z)?.exact(geom.a(), &u, subtracted));
    Ok(scalar_tensor_from_kernels(&bulk, &wall, eps))
}

/// Unsubtracted scalar stress summed mode by mode, each mode contributing
/// e^{-u nπ/a}/(2πa) to the bulk kernel and sin²(nπz/a) times that to the
/// wall kernel. Terms are added until they fall below the working precision.
pub fn scalar_stress_mode_sum(
    geom: &PlateGeometry,
    shape: &ShapeParameter,
    eps: &SeparationVector,
    z: &Real,
    exec: Execution,
) -> Result<SymTensor4> {
    wall_factor(geom, z)?;
    let a = geom.a();
    let u = point_u(shape, eps);
    let s = eps.length();
    // e^{-u m_N} m_N^2 below 10^-(digits + 10) relative to the O(u^-3) sums
    let target = (working_digits() as f64 + 10.0) * std::f64::consts::LN_10;
    let (uf, af) = (u.to_f64(), a.to_f64());
    let mut n = 1.0f64;
    for _ in 0..50 {
        let m = std::f64::consts::PI * n / af;
        n = ((target + 2.0 * m.ln().max(0.0) + 3.0 * (1.0 / uf).ln().max(0.0)) * af / (std::f64::consts::PI * uf))
            .ceil()
            .max(1.0);
    }
    let n_max = n as usize;
    let norm = (Real::from_int(2) * Real::pi() * a).recip();
    let theta = Real::pi() * z / a;
    let terms = exec.map_range(n_max, |i| {
        let k = (i + 1) as u64;
        let m = geom.mode_mass(k);
        let h = &norm * &(-(&u * &m)).exp();
        let triple = [h.clone(), -(&m * &h), m.square() * &h];
        let w = (Real::from_int(k as i64) * &theta).sin().square();
        let wall = [&triple[0] * &w, &triple[1] * &w, &triple[2] * &w];
        (triple, wall)
    });
    let mut bulk = [Real::zero(), Real::zero(), Real::zero()];
    let mut wall = [Real::zero(), Real::zero(), Real::zero()];
    for (b, w) in &terms {
        for j in 0..3 {
            bulk[j] += &b[j];
            wall[j] += &w[j];
        }
    }
    Ok(scalar_tensor_from_kernels(
        &RadialKernel::from_profile(s, &bulk),
        &RadialKernel::from_profile(s, &wall),
        eps,
    ))
}

/// Subtracted stress tensor of either field at finite separation.
pub fn stress_tensor(
    field: FieldKind,
    geom: &PlateGeometry,
    shape: &ShapeParameter,
    eps: &SeparationVector,
    z: Option<&Real>,
) -> Result<SymTensor4> {
    match field {
        FieldKind::Electromagnetic => Ok(em_stress_tensor(geom, shape, eps, true)),
        FieldKind::Scalar => {
            let z = z.ok_or_else(|| Error::InvalidGeometry("the scalar stress needs a height z".into()))?;
            scalar_stress_tensor(geom, shape, eps, z, true)
        }
    }
}

/// max |ℓ T(ℓ⁻¹ε) ℓᵀ - T(ε)| over components.
pub fn covariance_check(
    field: FieldKind,
    geom: &PlateGeometry,
    shape: &ShapeParameter,
    eps: &SeparationVector,
    l: &LorentzTransform,
    z: Option<&Real>,
) -> Result<Real> {
    let direct = stress_tensor(field, geom, shape, eps, z)?;
    let pulled = eps.transformed(&l.inverse())?;
    let moved = transform_tensor(l, &stress_tensor(field, geom, shape, &pulled, z)?);
    Ok(moved.max_abs_diff(&direct))
}

/// One random Lorentz transform and separation for a covariance test.
#[derive(Clone, Debug)]
pub struct CovarianceTrial {
    pub rapidity: Real,
    pub second_rapidity: Real,
    pub angle: Real,
    pub transform: LorentzTransform,
    pub separation: SeparationVector,
}

/// `count` trials from a seeded stream: ℓ = boost_tx(η)·rot(θ)·boost_ty(η₂)
/// with |η|, |η₂| <= `max_rapidity`, and a separation of invariant length
/// `length` whose time component is at most 0.8 of its spatial size.
pub fn random_covariance_trials(seed: u64, count: usize, max_rapidity: f64, length: &Real) -> Vec<CovarianceTrial> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let eta: f64 = rng.gen_range(-max_rapidity..=max_rapidity);
            let eta2: f64 = rng.gen_range(-max_rapidity..=max_rapidity);
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let tau: f64 = rng.gen_range(-0.8..0.8);
            let (rapidity, second_rapidity, angle) = (Real::from_f64(eta), Real::from_f64(eta2), Real::from_f64(theta));
            let transform = LorentzTransform::boost(BoostPlane::Tx, &rapidity)
                .compose(&LorentzTransform::rotation_xy(&angle))
                .compose(&LorentzTransform::boost(BoostPlane::Ty, &second_rapidity));
            let separation = SeparationVector::from_f64(tau, phi.cos(), phi.sin())
                .expect("|tau| < 1 keeps the separation spacelike")
                .with_length(length);
            CovarianceTrial {
                rapidity,
                second_rapidity,
                angle,
                transform,
                separation,
            }
        })
        .collect()
}

/// Covariance residual for every trial, in order.
pub fn run_covariance_trials(
    field: FieldKind,
    geom: &PlateGeometry,
    shape: &ShapeParameter,
    z: Option<&Real>,
    trials: &[CovarianceTrial],
    exec: Execution,
) -> Vec<Result<Real>> {
    exec.map_slice(trials, |t| {
        covariance_check(field, geom, shape, &t.separation, &t.transform, z)
    })
}

/// Average over directions under ε^mu ε^nu/ε² -> h^{mu nu}/3, which
/// annihilates S2 and leaves A S1.
pub fn angular_average(d: &StressDecomposition) -> SymTensor4 {
    structure_s1().scale(&d.a_coeff)
}

/// Average over purely spatial directions in the (x, y) plane at the stored
/// separation length. S2 does not average to zero here.
pub fn spatial_circle_average(d: &StressDecomposition) -> SymTensor4 {
    let xx = SymTensor4::outer(&FourVector::from_f64([0.0, 1.0, 0.0, 0.0]));
    let yy = SymTensor4::outer(&FourVector::from_f64([0.0, 0.0, 1.0, 0.0]));
    let s2_avg = subspace_metric().sub(&xx.add(&yy).scale(&Real::ratio(3, 2)));
    angular_average(d).add(&s2_avg.scale(&d.b_total()))
}

/// Size of the S2 remnant left by the circle average (largest component).
pub fn circle_average_s2_weight(d: &StressDecomposition) -> Real {
    spatial_circle_average(d).max_abs_diff(&angular_average(d))
}

/// The finite Casimir energy per unit area from the energy expansion against
/// the one implied by the averaged EM stress, a·T^{tt}.
#[derive(Clone, Debug)]
pub struct EnergyStressComparison {
    pub energy_finite: Real,
    pub stress_energy: Real,
}

impl EnergyStressComparison {
    pub fn difference(&self) -> Real {
        &self.energy_finite - &self.stress_energy
    }
}

pub fn energy_stress_discrepancy(geom: &PlateGeometry, shape: &ShapeParameter) -> Result<EnergyStressComparison> {
    let a = geom.a();
    let energy = subtract_outer(&energy_laurent(a, shape, crate::expansion::DEFAULT_ORDER)?)?;
    let eps = SeparationVector::from_f64(0.0, 0.0, 0.1)?;
    let avg = angular_average(&em_stress(geom, shape, &eps)?);
    Ok(EnergyStressComparison {
        energy_finite: energy.coefficient(0)?,
        stress_energy: avg.get(T, T) * a,
    })
}

/// (1/2π²a⁴) ζ(4), the parallel-plate coefficient in closed form.
pub fn plate_coefficient(geom: &PlateGeometry) -> Real {
    let pi = Real::pi();
    pi.powi(2) / (Real::from_int(180) * geom.a().powi(4))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minkowski::{X, Y, Z};
    use crate::mode_sum::FieldKind::{Electromagnetic, Scalar};
    use proptest::prelude::*;
    use rand::Rng;

    fn r(x: f64) -> Real {
        Real::from_f64(x)
    }

    fn tol(s: &str) -> Real {
        Real::parse(s).unwrap()
    }

    fn close(x: &Real, y: &Real, t: &str) -> bool {
        (x - y).abs() <= tol(t)
    }

    fn pi2() -> Real {
        Real::pi().square()
    }

    fn geom(a: f64) -> PlateGeometry {
        PlateGeometry::from_f64(a).unwrap()
    }

    fn shape(l: f64) -> ShapeParameter {
        ShapeParameter::from_f64(l).unwrap()
    }

    fn sep(t: f64, x: f64, y: f64) -> SeparationVector {
        SeparationVector::from_f64(t, x, y).unwrap()
    }

    #[test]
    fn massless_kernel_and_scaling() {
        let k = propagator_kernel(&Real::zero(), &Real::one()).unwrap();
        assert!(close(&k.value, &(Real::from_int(4) * Real::pi()).recip(), "1e-70"));
        assert!((k.value.to_f64() - 0.0795775).abs() < 1e-7);
        let s = r(0.37);
        let d1 = propagator_kernel(&Real::zero(), &s).unwrap().value;
        let d2 = propagator_kernel(&Real::zero(), &(Real::from_int(2) * &s))
            .unwrap()
            .value;
        assert!(close(&d2, &(d1 / Real::from_int(2)), "1e-70"));
    }

    #[test]
    fn propagator_solves_klein_gordon() {
        let m = Real::pi();
        let k = propagator_kernel(&m, &r(0.3)).unwrap();
        let residual = m.square() * &k.value - k.laplacian();
        assert!(residual.abs() <= tol("1e-18"));
    }

    #[test]
    fn kernels_reject_bad_separations() {
        assert_eq!(
            propagator_kernel(&Real::one(), &Real::zero()),
            Err(Error::NonPositiveSeparation)
        );
        let g = geom(1.0);
        assert_eq!(
            generating_function(&r(0.1), &r(0.2), &shape(0.5), &g),
            Err(Error::CothPole)
        );
        assert_eq!(
            generating_function(&r(-0.1), &r(0.1), &shape(0.0), &g),
            Err(Error::NonPositiveSeparation)
        );
    }

    fn check_derivatives(f: impl Fn(&Real) -> RadialKernel) {
        let h = tol("1e-15");
        let two = Real::from_int(2);
        for s in [0.05, 0.13, 0.27, 0.5] {
            let s = r(s);
            let k = f(&s);
            let (kp, km) = (f(&(&s + &h)), f(&(&s - &h)));
            let d1 = (&kp.value - &km.value) / (&two * &h);
            let d2 = (&kp.first - &km.first) / (&two * &h);
            assert!((&d1 - &k.first).abs() <= tol("1e-20") * k.first.abs(), "first at {s}");
            assert!(
                (&d2 - &k.second).abs() <= tol("1e-20") * k.second.abs(),
                "second at {s}"
            );
        }
    }

    #[test]
    fn kernel_derivatives_match_finite_differences() {
        let g = geom(1.3);
        let sh = shape(0.4);
        let frozen = r(0.1);
        check_derivatives(|s| generating_function(s, &frozen, &sh, &g).unwrap());
        check_derivatives(|s| subtracted_generating_function(s, &frozen, &sh, &g).unwrap());
        check_derivatives(|s| propagator_kernel(&Real::pi(), s).unwrap());
        let wall = Profile::ScalarWall(r(0.3));
        check_derivatives(|s| RadialKernel::from_profile(s, &wall.exact(g.a(), s, true)));
    }

    #[test]
    fn generating_function_is_the_summed_mode_series() {
        let g = geom(1.0);
        for (s, sf, l) in [(0.2, 0.2, 0.0), (0.15, 0.1, 0.5), (0.4, 0.3, 0.9)] {
            let (s, sf, sh) = (r(s), r(sf), shape(l));
            let f = generating_function(&s, &sf, &sh, &g).unwrap();
            let c = (&s - &(sh.value() * &sf)) * Real::pi() / g.a();
            let q = (-c).exp();
            // Σ' q^n with the n = 0 term halved
            let mut sum = Real::ratio(1, 2);
            let mut term = Real::one();
            for _ in 0..20000 {
                term = &term * &q;
                sum += &term;
                if term < tol("1e-60") {
                    break;
                }
            }
            let lhs = Real::from_int(4) * Real::pi() * g.a() * &s * &f.value;
            assert!(close(&lhs, &(Real::from_int(2) * sum), "1e-12"));
        }
    }

    #[test]
    fn generating_function_small_separation_limit() {
        // The displayed limit drops the s-independent constant 1/(24a²),
        // which no derivative sees; the remainder after it is O(s⁴).
        let g = geom(1.0);
        let sh = shape(0.4);
        let remainder = |e: f64| {
            let s = r(e);
            let l = sh.value();
            let u = &s - &(l * &s);
            let a = g.a();
            let limit = (Real::from_int(2) * pi2() * &s * &u).recip()
                - l * &s / (Real::from_int(24) * a.square() * &s)
                - u.powi(3) * pi2() / (Real::from_int(1440) * &s * a.powi(4));
            let f = generating_function(&s, &s, &sh, &g).unwrap().value;
            f - limit - (Real::from_int(24) * a.square()).recip()
        };
        let ratio = (remainder(1e-2) / remainder(1e-3)).to_f64();
        assert!((ratio / 1e4 - 1.0).abs() < 0.01, "ratio {ratio}");
    }

    #[test]
    fn generating_function_large_plate_limit() {
        let g = geom(1e3);
        let s = r(0.1);
        for l in [0.0, 0.5] {
            let sh = shape(l);
            let f = generating_function(&s, &s, &sh, &g).unwrap().value;
            let free = (Real::from_int(2) * pi2() * &s * (&s - &(sh.value() * &s))).recip();
            assert!(((&f - &free) / &free).abs() <= tol("1e-8"));
        }
    }

    #[test]
    fn hessian_of_simple_radial_functions() {
        let e = sep(0.05, 0.2, 0.1);
        let s = e.length().clone();
        let h = subspace_metric();
        let quad = RadialKernel {
            s: s.clone(),
            value: s.square(),
            first: Real::from_int(2) * &s,
            second: Real::from_int(2),
        };
        assert!(radial_hessian(&quad, &e).max_abs_diff(&h.scale(&Real::from_int(2))) <= tol("1e-70"));
        let lin = RadialKernel {
            s: s.clone(),
            value: s.clone(),
            first: Real::one(),
            second: Real::zero(),
        };
        let expect = h
            .scale(&s.recip())
            .sub(&SymTensor4::outer(e.vector()).scale(&s.powi(3).recip()));
        assert!(radial_hessian(&lin, &e).max_abs_diff(&expect) <= tol("1e-70"));
    }

    #[test]
    fn second_derivative_tensor_matches_finite_differences() {
        let e = sep(0.05, 0.2, 0.1);
        let f = |v: &[Real; 3]| {
            let s2 = -v[0].square() + v[1].square() + v[2].square();
            propagator_kernel(&Real::pi(), &s2.sqrt()).unwrap().value
        };
        let comps: [Real; 3] = [r(0.05), r(0.2), r(0.1)];
        let h = tol("1e-15");
        let sign = [-1i64, 1, 1];
        let mut fd = [
            [Real::zero(), Real::zero(), Real::zero()],
            [Real::zero(), Real::zero(), Real::zero()],
            [Real::zero(), Real::zero(), Real::zero()],
        ];
        for i in 0..3 {
            for j in 0..3 {
                let at = |di: i32, dj: i32| {
                    let mut v = comps.clone();
                    v[i] += &h * &Real::from_int(di as i64);
                    v[j] += &h * &Real::from_int(dj as i64);
                    f(&v)
                };
                let mixed = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (Real::from_int(4) * h.square());
                // derivatives with respect to lower components
                fd[i][j] = mixed * Real::from_int(sign[i] * sign[j]);
            }
        }
        let k = propagator_kernel(&Real::pi(), e.length()).unwrap();
        let hess = radial_hessian(&k, &e);
        let scale = hess.max_abs();
        for i in 0..3 {
            for j in 0..3 {
                assert!((hess.get(i, j) - &fd[i][j]).abs() <= tol("1e-12") * &scale, "({i},{j})");
            }
        }
        let t = second_derivative_tensor(&k, &e);
        let zz = k.laplacian();
        assert!(close(t.get(Z, Z), &zz, "1e-60"));
        assert!(close(t.get(X, Y), &(-&fd[1][2]), "1e-12"));
    }

    #[test]
    fn em_stress_at_zero_lambda_reproduces_plate_result() {
        let g = geom(1.0);
        let d = em_stress(&g, &ShapeParameter::zero(), &sep(0.0, 0.1, 0.0)).unwrap();
        let a_exact = pi2() / Real::from_int(180);
        assert!(close(&d.a_coeff, &a_exact, "1e-28"));
        assert!(close(&d.a_coeff, &plate_coefficient(&g), "1e-28"));
        assert!(d.b_finite.abs() <= tol("1e-28") && d.b_divergent_eps2.abs() <= tol("1e-28"));
        let t = d.assemble();
        assert!(close(t.get(Z, Z), &(-(pi2() / Real::from_int(240))), "1e-28"));
        assert!(close(&d.a_coeff, &r(0.0548311343), "1e-8"));
        assert!(close(t.get(Z, Z), &r(-0.0411233507), "1e-8"));
    }

    #[test]
    fn plate_coefficient_matches_zeta_four() {
        // ζ(4) by direct summation plus an Euler–Maclaurin tail at N = 1000.
        let n = 1000i64;
        let mut zeta: Real = (1..=n).map(|k| Real::from_int(k).powi(-4)).sum();
        let nn = Real::from_int(n);
        let tail = nn.powi(-3) / Real::from_int(3) - nn.powi(-4) / Real::from_int(2) + nn.powi(-5) / Real::from_int(3)
            - nn.powi(-7) / Real::from_int(6)
            + Real::from_int(2) * nn.powi(-9) / Real::from_int(9);
        zeta += tail;
        let g = geom(1.7);
        let expect = zeta / (Real::from_int(2) * pi2() * g.a().powi(4));
        assert!(close(&plate_coefficient(&g), &expect, "1e-28"));
    }

    #[test]
    fn em_divergence_structure_on_the_grid() {
        for a in [0.5, 1.0, 2.0] {
            let g = geom(a);
            let ar = g.a().clone();
            for k in 0..10 {
                let l = k as f64 / 10.0;
                let sh = shape(l);
                let d = em_stress(&g, &sh, &sep(0.01, 0.03, -0.02)).unwrap();
                let lr = sh.value();
                let a_exp = sh.complement() * pi2() / (Real::from_int(180) * ar.powi(4));
                let bdiv = -(lr / &(Real::from_int(24) * ar.square()));
                let bfin = lr * &(lr.square() - Real::one()) * pi2() / (Real::from_int(1440) * ar.powi(4));
                assert!(close(&d.a_coeff, &a_exp, "1e-28"), "A a={a} l={l}");
                assert!(close(&d.b_divergent_eps2, &bdiv, "1e-28"), "Bdiv a={a} l={l}");
                assert!(close(&d.b_finite, &bfin, "1e-28"), "Bfin a={a} l={l}");
            }
        }
    }

    #[test]
    fn em_series_has_only_the_two_structures() {
        let s = em_stress_series(&geom(1.0), &shape(0.6)).unwrap();
        for p in [-2, -1] {
            assert!(s.alpha.extract_coefficient(p).unwrap().abs() <= tol("1e-40"));
        }
        assert!(s.beta.extract_coefficient(-1).unwrap().abs() <= tol("1e-40"));
        assert!(!s.beta.extract_coefficient(-2).unwrap().is_zero());
    }

    #[test]
    fn em_b_total_example() {
        let d = em_stress(&geom(1.0), &shape(0.5), &sep(0.0, 0.1, 0.0)).unwrap();
        assert!((d.b_total().to_f64() + 2.0859035).abs() < 1e-6);
    }

    #[test]
    fn em_coefficients_do_not_depend_on_direction() {
        let g = geom(1.0);
        let sh = shape(0.35);
        let reference = em_stress(&g, &sh, &sep(0.0, 0.05, 0.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let tau: f64 = rng.gen_range(-0.9..0.9);
            let e = sep(tau, phi.cos(), phi.sin()).with_length(&r(0.05));
            let d = em_stress(&g, &sh, &e).unwrap();
            assert!(close(&d.a_coeff, &reference.a_coeff, "1e-26"));
            assert!(close(&d.b_finite, &reference.b_finite, "1e-26"));
            assert!(close(&d.b_divergent_eps2, &reference.b_divergent_eps2, "1e-26"));
        }
    }

    #[test]
    fn structures_are_traceless_and_orthogonal() {
        let e = sep(0.3, 0.5, -0.7);
        assert!(structure_s1().trace().abs() <= tol("1e-70"));
        assert!(structure_s2(&e).trace().abs() <= tol("1e-70"));
        assert!(structure_s1().contract(&structure_s2(&e)).abs() <= tol("1e-70"));
    }

    #[test]
    fn exact_tensor_approaches_decomposition() {
        // O(s²) corrections separate the exact tensor from A S1 + B S2.
        let g = geom(1.0);
        let sh = shape(0.5);
        let mut last = None;
        for s in [0.02, 0.01] {
            let e = sep(0.2, 0.9, 0.4).with_length(&r(s));
            let exact = em_stress_tensor(&g, &sh, &e, true);
            let diff = exact.max_abs_diff(&em_stress(&g, &sh, &e).unwrap().assemble()).to_f64();
            if let Some(prev) = last {
                let ratio: f64 = prev / diff;
                assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
            }
            last = Some(diff);
        }
    }

    #[test]
    fn scalar_braces_at_midplane() {
        let g = geom(1.0);
        let sh = shape(0.5);
        let d = scalar_stress(&g, &sh, &sep(0.0, 0.1, 0.0), &r(0.5)).unwrap();
        let braces = d.b_total() * Real::from_int(48) / sh.value();
        let direct = Real::from_int(200) + pi2() / Real::from_int(4) * r(0.75) * (Real::one() - Real::ratio(1, 15));
        assert!(((&braces - &direct) / &direct).abs() <= tol("1e-6"));
        assert!((braces.to_f64() - 201.7272).abs() < 1e-4);
        assert!((d.b_total().to_f64() - 2.1013).abs() < 1e-4);
    }

    #[test]
    fn scalar_at_zero_lambda_is_height_independent() {
        let g = geom(1.0);
        let e = sep(0.0, 0.1, 0.0);
        let expect = structure_s1().scale(&(pi2() / Real::from_int(360)));
        for z in [0.1, 0.37, 0.5, 0.9] {
            let d = scalar_stress(&g, &ShapeParameter::zero(), &e, &r(z)).unwrap();
            assert!(d.assemble().max_abs_diff(&expect) <= tol("1e-28"));
        }
    }

    #[test]
    fn scalar_divergence_grows_towards_a_wall() {
        let g = geom(1.0);
        let sh = shape(0.5);
        let z = r(0.01);
        let d = scalar_stress(&g, &sh, &sep(0.0, 0.1, 0.0), &z).unwrap();
        let sigma = (Real::pi() * &z).sin().square();
        let leading = Real::from_int(3) * sh.value() / (Real::from_int(48) * sigma);
        let ratio = (&d.b_divergent_eps2 / &leading).to_f64();
        assert!((ratio - 1.0).abs() < 0.01, "ratio {ratio}");
    }

    #[test]
    fn scalar_rejects_walls() {
        let g = geom(1.0);
        let e = sep(0.0, 0.1, 0.0);
        let sh = shape(0.5);
        for z in [0.0, 1.0] {
            assert!(matches!(scalar_stress(&g, &sh, &e, &r(z)), Err(Error::WallContact(_))));
            assert!(matches!(
                scalar_stress_tensor(&g, &sh, &e, &r(z), true),
                Err(Error::WallContact(_))
            ));
        }
        assert!(matches!(
            scalar_stress(&g, &sh, &e, &r(1.5)),
            Err(Error::InvalidGeometry(_))
        ));
        assert!(stress_tensor(Scalar, &g, &sh, &e, None).is_err());
    }

    #[test]
    fn scalar_mode_derivation_matches_closed_form() {
        let spots = [
            (1.0, 0.5, 0.5),
            (1.0, 0.3, 1.0 / 3.0),
            (2.0, 0.7, 0.2),
            (0.5, 0.1, 0.4),
            (1.5, 0.9, 1.1),
        ];
        for (a, l, z) in spots {
            let g = geom(a);
            let sh = shape(l);
            let e = sep(0.0, 0.05, 0.0);
            let readoff = scalar_stress(&g, &sh, &e, &r(z)).unwrap();
            let derived = scalar_stress_from_modes(&g, &sh, &e, &r(z)).unwrap();
            assert!(close(&readoff.a_coeff, &derived.a_coeff, "1e-30"), "A at {a},{l},{z}");
            assert!(
                close(&readoff.b_finite, &derived.b_finite, "1e-30"),
                "Bfin at {a},{l},{z}"
            );
            assert!(
                close(&readoff.b_divergent_eps2, &derived.b_divergent_eps2, "1e-30"),
                "Bdiv at {a},{l},{z}"
            );
        }
    }

    #[test]
    fn scalar_tensor_matches_direct_mode_sum() {
        let g = geom(1.0);
        for (l, z) in [(0.3, 0.25), (0.0, 0.5), (0.8, 0.9)] {
            let sh = shape(l);
            let e = sep(0.02, 0.06, 0.03);
            let closed = scalar_stress_tensor(&g, &sh, &e, &r(z), false).unwrap();
            let summed = scalar_stress_mode_sum(&g, &sh, &e, &r(z), Execution::default()).unwrap();
            assert!(closed.max_abs_diff(&summed) <= tol("1e-30") * closed.max_abs());
        }
    }

    #[test]
    fn scalar_average_is_half_of_em() {
        let g = geom(1.3);
        let e = sep(0.0, 0.05, 0.02);
        for l in [0.0, 0.25, 0.5, 0.75] {
            let sh = shape(l);
            let em = angular_average(&em_stress(&g, &sh, &e).unwrap());
            for z in [0.2, 0.65] {
                let sc = angular_average(&scalar_stress_from_modes(&g, &sh, &e, &r(z)).unwrap());
                assert!(sc.scale(&Real::from_int(2)).max_abs_diff(&em) <= tol("1e-28"));
            }
        }
    }

    #[test]
    fn angular_average_values() {
        let g = geom(1.0);
        let e = sep(0.0, 0.05, 0.0);
        let t = angular_average(&em_stress(&g, &ShapeParameter::zero(), &e).unwrap());
        assert!(close(t.get(T, T), &(-(pi2() / Real::from_int(720))), "1e-28"));
        assert!(close(t.get(Z, Z), &(-(pi2() / Real::from_int(240))), "1e-28"));
        for l in [0.25, 0.5, 0.75] {
            let sh = shape(l);
            let t = angular_average(&em_stress(&g, &sh, &e).unwrap());
            let expect = structure_s1().scale(&(sh.complement() * pi2() / Real::from_int(180)));
            assert!(t.max_abs_diff(&expect) <= tol("1e-28"));
            // no S2 component along any direction
            assert!(t.contract(&structure_s2(&sep(0.4, -0.3, 0.8))).abs() <= tol("1e-28"));
        }
        // the (1 - λ) factor vanishes as λ -> 1
        let near = ShapeParameter::new(Real::one() - tol("1e-40")).unwrap();
        assert!(angular_average(&em_stress(&g, &near, &e).unwrap()).max_abs() <= tol("1e-38"));
    }

    #[test]
    fn circle_average_keeps_an_s2_part() {
        let g = geom(1.0);
        let d = em_stress(&g, &shape(0.5), &sep(0.0, 0.1, 0.0)).unwrap();
        let w = circle_average_s2_weight(&d);
        // the remnant is B·diag(-1, -1/2, -1/2, 0)
        assert!(close(&w, &d.b_total().abs(), "1e-40"));
        assert!(spatial_circle_average(&d).trace().abs() <= tol("1e-40"));
        let d0 = em_stress(&g, &ShapeParameter::zero(), &sep(0.0, 0.1, 0.0)).unwrap();
        assert!(circle_average_s2_weight(&d0) <= tol("1e-40"));
    }

    #[test]
    fn energy_and_stress_routes() {
        let g = geom(1.0);
        let zero = energy_stress_discrepancy(&g, &ShapeParameter::zero()).unwrap();
        assert!(close(&zero.energy_finite.abs(), &zero.stress_energy.abs(), "1e-28"));
        assert!(close(&zero.stress_energy, &(-(pi2() / Real::from_int(720))), "1e-28"));
        let half = energy_stress_discrepancy(&g, &shape(0.5)).unwrap();
        let e_exp = -(Real::one() - Real::ratio(1, 8)) * pi2() / Real::from_int(720);
        let s_exp = -(Real::ratio(1, 2)) * pi2() / Real::from_int(720);
        assert!(close(&half.energy_finite, &e_exp, "1e-28"));
        assert!(close(&half.stress_energy, &s_exp, "1e-28"));
        assert!(half.difference().abs() > tol("1e-3"));
    }

    #[test]
    fn covariance_examples() {
        let g = geom(1.0);
        let e = sep(0.02, 0.08, 0.03);
        let sh = shape(0.5);
        let id = LorentzTransform::identity();
        assert!(covariance_check(Electromagnetic, &g, &sh, &e, &id, None)
            .unwrap()
            .is_zero());
        let rot = LorentzTransform::rotation_xy(&r(1.1));
        assert!(covariance_check(Electromagnetic, &g, &sh, &e, &rot, None).unwrap() <= tol("1e-25"));
        let boost = LorentzTransform::boost(BoostPlane::Tx, &r(1.5));
        let z = Real::one() / Real::from_int(3);
        let res = covariance_check(Scalar, &g, &shape(0.3), &e, &boost, Some(&z)).unwrap();
        assert!(res <= tol("1e-25"));
    }

    #[test]
    fn covariance_trials_are_reproducible_across_execution() {
        let g = geom(1.0);
        let sh = shape(0.4);
        let trials = random_covariance_trials(3, 6, 2.0, &r(0.05));
        let z = r(0.3);
        let seq = run_covariance_trials(Scalar, &g, &sh, Some(&z), &trials, Execution::Sequential);
        let par = run_covariance_trials(Scalar, &g, &sh, Some(&z), &trials, Execution::Parallel);
        assert_eq!(seq, par);
        for res in seq {
            assert!(res.unwrap() <= tol("1e-25"));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn covariance_holds_for_random_transforms(
            seed in any::<u64>(),
            a in 0.5f64..2.0,
            l in 0.0f64..0.95,
            zf in 0.05f64..0.95,
            em in any::<bool>(),
        ) {
            let g = geom(a);
            let sh = shape(l);
            let trial = &random_covariance_trials(seed, 1, 2.0, &r(0.05 * a))[0];
            let z = g.a() * r(zf);
            let field = if em { Electromagnetic } else { Scalar };
            let res = covariance_check(field, &g, &sh, &trial.separation, &trial.transform, Some(&z)).unwrap();
            prop_assert!(res <= tol("1e-25"));
        }

        #[test]
        fn assembled_tensors_are_traceless(
            a in 0.5f64..2.0,
            l in 0.0f64..0.95,
            zf in 0.05f64..0.95,
            tau in -0.9f64..0.9,
            phi in 0.0f64..std::f64::consts::TAU,
            s in 0.01f64..0.2,
        ) {
            let g = geom(a);
            let sh = shape(l);
            let e = sep(tau, phi.cos(), phi.sin()).with_length(&r(s));
            let em = em_stress(&g, &sh, &e).unwrap().assemble();
            let sc = scalar_stress(&g, &sh, &e, &(g.a() * r(zf))).unwrap().assemble();
            prop_assert!(em.trace().abs() <= tol("1e-28"));
            prop_assert!(sc.trace().abs() <= tol("1e-28"));
            for mu in 0..4 {
                for nu in 0..4 {
                    prop_assert_eq!(em.get(mu, nu), em.get(nu, mu));
                }
            }
            let exact = em_stress_tensor(&g, &sh, &e, true);
            prop_assert!(exact.trace().abs() <= tol("1e-28") * exact.max_abs());
        }
    }
}
