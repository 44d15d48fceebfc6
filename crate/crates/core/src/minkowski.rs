//! Minkowski vectors and tensors in 3+1 dimensions, signature (-, +, +, +),
//! coordinates ordered (t, x, y, z).
//!
//! The plates are normal to z, so the symmetry group left over by the
//! geometry is O(2,1) acting on (t, x, y). Every [`LorentzTransform`] built
//! here has that block form and leaves z untouched.

use std::ops::Mul;

use crate::error::{Error, Result};
use crate::real::Real;

pub const T: usize = 0;
pub const X: usize = 1;
pub const Y: usize = 2;
pub const Z: usize = 3;

const SIGNATURE: [i32; 4] = [-1, 1, 1, 1];

/// Diagonal metric entry g_{mu mu} (= g^{mu mu}).
pub fn metric_sign(mu: usize) -> i32 {
    SIGNATURE[mu]
}

fn metric_real(mu: usize) -> Real {
    Real::from_int(SIGNATURE[mu] as i64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FourVector {
    pub components: [Real; 4],
}

impl FourVector {
    pub fn new(t: Real, x: Real, y: Real, z: Real) -> Self {
        FourVector {
            components: [t, x, y, z],
        }
    }

    pub fn from_f64(c: [f64; 4]) -> Self {
        FourVector {
            components: c.map(Real::from_f64),
        }
    }

    pub fn zero() -> Self {
        FourVector {
            components: std::array::from_fn(|_| Real::zero()),
        }
    }

    /// Unit normal to the plates, (0, 0, 0, 1).
    pub fn z_hat() -> Self {
        let mut v = FourVector::zero();
        v.components[Z] = Real::one();
        v
    }

    pub fn component(&self, mu: usize) -> &Real {
        &self.components[mu]
    }

    /// Covariant components v_mu = g_{mu nu} v^nu.
    pub fn lower(&self) -> FourVector {
        FourVector {
            components: std::array::from_fn(|mu| &self.components[mu] * &metric_real(mu)),
        }
    }

    pub fn scale(&self, k: &Real) -> FourVector {
        FourVector {
            components: std::array::from_fn(|mu| &self.components[mu] * k),
        }
    }

    pub fn add(&self, other: &FourVector) -> FourVector {
        FourVector {
            components: std::array::from_fn(|mu| &self.components[mu] + &other.components[mu]),
        }
    }

    pub fn sub(&self, other: &FourVector) -> FourVector {
        FourVector {
            components: std::array::from_fn(|mu| &self.components[mu] - &other.components[mu]),
        }
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> Real {
        self.components.iter().map(Real::abs).fold(Real::zero(), Real::max)
    }
}

/// u^mu g_{mu nu} v^nu.
pub fn mink_dot(u: &FourVector, v: &FourVector) -> Real {
    (0..4)
        .map(|mu| &u.components[mu] * &v.components[mu] * metric_real(mu))
        .sum()
}

/// The point-splitting vector: spacelike, lying in the (t, x, y) subspace.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparationVector {
    vector: FourVector,
    length: Real,
}

impl SeparationVector {
    pub fn new(t: Real, x: Real, y: Real) -> Result<Self> {
        Self::from_four_vector(FourVector::new(t, x, y, Real::zero()))
    }

    pub fn from_f64(t: f64, x: f64, y: f64) -> Result<Self> {
        Self::new(Real::from_f64(t), Real::from_f64(x), Real::from_f64(y))
    }

    pub fn from_four_vector(vector: FourVector) -> Result<Self> {
        if !vector.components[Z].is_zero() {
            return Err(Error::NonZeroZComponent);
        }
        let norm2 = mink_dot(&vector, &vector);
        let euclid2: Real = vector.components.iter().map(Real::square).sum();
        if !norm2.is_positive() || norm2 <= euclid2 * Real::parse("1e-30").expect("literal") {
            return Err(Error::LightlikeSeparation);
        }
        Ok(SeparationVector {
            length: norm2.sqrt(),
            vector,
        })
    }

    pub fn vector(&self) -> &FourVector {
        &self.vector
    }

    /// Invariant length s = sqrt(eps^mu eps_mu) > 0.
    pub fn length(&self) -> &Real {
        &self.length
    }

    pub fn unit(&self) -> SeparationVector {
        SeparationVector {
            vector: self.vector.scale(&self.length.recip()),
            length: Real::one(),
        }
    }

    /// Same direction, invariant length `s`.
    pub fn with_length(&self, s: &Real) -> SeparationVector {
        SeparationVector {
            vector: self.vector.scale(&(s / &self.length)),
            length: s.clone(),
        }
    }

    pub fn transformed(&self, l: &LorentzTransform) -> Result<SeparationVector> {
        SeparationVector::from_four_vector(l.apply(&self.vector))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoostPlane {
    /// Mixes t with x.
    Tx,
    /// Mixes t with y.
    Ty,
}

/// A 2+1 Lorentz transformation l^mu_nu, embedded as identity on z.
#[derive(Clone, Debug, PartialEq)]
pub struct LorentzTransform {
    m: [[Real; 4]; 4],
}

impl LorentzTransform {
    pub fn identity() -> Self {
        LorentzTransform {
            m: std::array::from_fn(|i| std::array::from_fn(|j| if i == j { Real::one() } else { Real::zero() })),
        }
    }

    pub fn entry(&self, mu: usize, nu: usize) -> &Real {
        &self.m[mu][nu]
    }

    /// Hyperbolic boost with the given rapidity.
    pub fn boost(plane: BoostPlane, rapidity: &Real) -> Self {
        let space = match plane {
            BoostPlane::Tx => X,
            BoostPlane::Ty => Y,
        };
        let (ch, sh) = (rapidity.cosh(), rapidity.sinh());
        let mut l = LorentzTransform::identity();
        l.m[T][T] = ch.clone();
        l.m[space][space] = ch;
        l.m[T][space] = sh.clone();
        l.m[space][T] = sh;
        l
    }

    /// Rotation by `angle` in the (x, y) plane.
    pub fn rotation_xy(angle: &Real) -> Self {
        let (c, s) = (angle.cos(), angle.sin());
        let mut l = LorentzTransform::identity();
        l.m[X][X] = c.clone();
        l.m[Y][Y] = c;
        l.m[X][Y] = -&s;
        l.m[Y][X] = s;
        l
    }

    pub fn compose(&self, rhs: &LorentzTransform) -> LorentzTransform {
        LorentzTransform {
            m: std::array::from_fn(|i| std::array::from_fn(|j| (0..4).map(|k| &self.m[i][k] * &rhs.m[k][j]).sum())),
        }
    }

    pub fn apply(&self, v: &FourVector) -> FourVector {
        FourVector {
            components: std::array::from_fn(|i| (0..4).map(|k| &self.m[i][k] * &v.components[k]).sum()),
        }
    }

    /// l^-1 = g l^T g.
    pub fn inverse(&self) -> LorentzTransform {
        LorentzTransform {
            m: std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    let sign = SIGNATURE[i] * SIGNATURE[j];
                    &self.m[j][i] * &Real::from_int(sign as i64)
                })
            }),
        }
    }

    /// max |(l^T g l - g)_{mu nu}|.
    pub fn metric_defect(&self) -> Real {
        let mut worst = Real::zero();
        for a in 0..4 {
            for b in 0..4 {
                let mut acc: Real = (0..4).map(|mu| &self.m[mu][a] * &self.m[mu][b] * metric_real(mu)).sum();
                if a == b {
                    acc -= metric_real(a);
                }
                worst = worst.max(acc.abs());
            }
        }
        worst
    }

    /// Whether the z row and column are those of the identity.
    pub fn fixes_z(&self) -> bool {
        (0..4).all(|i| {
            let expect = if i == Z { Real::one() } else { Real::zero() };
            self.m[Z][i] == expect && self.m[i][Z] == expect
        })
    }
}

impl Mul for &LorentzTransform {
    type Output = LorentzTransform;
    fn mul(self, rhs: &LorentzTransform) -> LorentzTransform {
        self.compose(rhs)
    }
}

impl Mul for LorentzTransform {
    type Output = LorentzTransform;
    fn mul(self, rhs: LorentzTransform) -> LorentzTransform {
        self.compose(&rhs)
    }
}

const SYM_INDEX: [[usize; 4]; 4] = [[0, 1, 2, 3], [1, 4, 5, 6], [2, 5, 7, 8], [3, 6, 8, 9]];

fn sym_index(mu: usize, nu: usize) -> usize {
    SYM_INDEX[mu][nu]
}

/// Symmetric rank-2 contravariant tensor T^{mu nu}; symmetric by storage.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTensor4 {
    c: [Real; 10],
}

impl SymTensor4 {
    pub fn zero() -> Self {
        SymTensor4 {
            c: std::array::from_fn(|_| Real::zero()),
        }
    }

    /// Builds from `f(mu, nu)` evaluated on mu <= nu.
    pub fn from_fn(mut f: impl FnMut(usize, usize) -> Real) -> Self {
        let mut t = SymTensor4::zero();
        for mu in 0..4 {
            for nu in mu..4 {
                t.c[sym_index(mu, nu)] = f(mu, nu);
            }
        }
        t
    }

    /// g^{mu nu}.
    pub fn metric() -> Self {
        SymTensor4::from_fn(|mu, nu| if mu == nu { metric_real(mu) } else { Real::zero() })
    }

    /// v^mu v^nu.
    pub fn outer(v: &FourVector) -> Self {
        SymTensor4::from_fn(|mu, nu| &v.components[mu] * &v.components[nu])
    }

    pub fn get(&self, mu: usize, nu: usize) -> &Real {
        &self.c[sym_index(mu, nu)]
    }

    pub fn add(&self, other: &SymTensor4) -> SymTensor4 {
        SymTensor4 {
            c: std::array::from_fn(|i| &self.c[i] + &other.c[i]),
        }
    }

    pub fn sub(&self, other: &SymTensor4) -> SymTensor4 {
        SymTensor4 {
            c: std::array::from_fn(|i| &self.c[i] - &other.c[i]),
        }
    }

    pub fn scale(&self, k: &Real) -> SymTensor4 {
        SymTensor4 {
            c: std::array::from_fn(|i| &self.c[i] * k),
        }
    }

    /// g_{mu nu} T^{mu nu}.
    pub fn trace(&self) -> Real {
        (0..4).map(|mu| self.get(mu, mu) * metric_real(mu)).sum()
    }

    /// T^{mu nu} S_{mu nu}.
    pub fn contract(&self, other: &SymTensor4) -> Real {
        let mut acc = Real::zero();
        for mu in 0..4 {
            for nu in 0..4 {
                let sign = SIGNATURE[mu] * SIGNATURE[nu];
                acc += self.get(mu, nu) * other.get(mu, nu) * Real::from_int(sign as i64);
            }
        }
        acc
    }

    pub fn max_abs(&self) -> Real {
        self.c.iter().map(Real::abs).fold(Real::zero(), Real::max)
    }

    pub fn max_abs_diff(&self, other: &SymTensor4) -> Real {
        self.sub(other).max_abs()
    }
}

/// l^mu_alpha l^nu_beta T^{alpha beta}.
pub fn transform_tensor(l: &LorentzTransform, t: &SymTensor4) -> SymTensor4 {
    SymTensor4::from_fn(|mu, nu| {
        let mut acc = Real::zero();
        for a in 0..4 {
            if l.entry(mu, a).is_zero() {
                continue;
            }
            let row: Real = (0..4).map(|b| l.entry(nu, b) * t.get(a, b)).sum();
            acc += l.entry(mu, a) * &row;
        }
        acc
    })
}
