//! Geometric algebra of Euclidean 3-space.
//!
//! Elements are stored densely over the fixed basis
//! `⟨1, e_x, e_y, e_z, e_y∧e_z, e_z∧e_x, e_x∧e_y, I⟩`. Bivectors are kept in
//! the dual order `(yz, zx, xy)` so that `I·v` is a componentwise copy of `v`.
//!
//! The even subalgebra `{1, e_y∧e_z, e_z∧e_x, e_x∧e_y}` is exposed separately
//! as [`EvenElement`]. Its product comes in two flavours: [`even_product`] is the
//! restriction of the fixed right-handed [`geometric_product`], while
//! [`oriented_product`] multiplies in the subalgebra whose basis bivectors are
//! fixed by a [`Handedness`], i.e. `(μ·e_j)(μ·e_k) = −δ_jk − ε_jkl (μ·e_l)` for
//! either sign of `μ`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Number of basis blades.
pub const DIM: usize = 8;

/// Grade of each basis blade, in storage order.
pub const BLADE_GRADES: [usize; DIM] = [0, 1, 1, 1, 2, 2, 2, 3];

/// Human readable blade names, in storage order.
pub const BLADE_NAMES: [&str; DIM] = ["1", "e_x", "e_y", "e_z", "e_yz", "e_zx", "e_xy", "I"];

/// `PRODUCT_TABLE[i][j] = (k, s)` means `blade_i * blade_j = s * blade_k`.
///
/// Generated from `e_j e_k = δ_jk + e_j∧e_k` with `I = e_x e_y e_z`.
const PRODUCT_TABLE: [[(usize, f64); DIM]; DIM] = [
    [
        (0, 1.0),
        (1, 1.0),
        (2, 1.0),
        (3, 1.0),
        (4, 1.0),
        (5, 1.0),
        (6, 1.0),
        (7, 1.0),
    ],
    [
        (1, 1.0),
        (0, 1.0),
        (6, 1.0),
        (5, -1.0),
        (7, 1.0),
        (3, -1.0),
        (2, 1.0),
        (4, 1.0),
    ],
    [
        (2, 1.0),
        (6, -1.0),
        (0, 1.0),
        (4, 1.0),
        (3, 1.0),
        (7, 1.0),
        (1, -1.0),
        (5, 1.0),
    ],
    [
        (3, 1.0),
        (5, 1.0),
        (4, -1.0),
        (0, 1.0),
        (2, -1.0),
        (1, 1.0),
        (7, 1.0),
        (6, 1.0),
    ],
    [
        (4, 1.0),
        (7, 1.0),
        (3, -1.0),
        (2, 1.0),
        (0, -1.0),
        (6, -1.0),
        (5, 1.0),
        (1, -1.0),
    ],
    [
        (5, 1.0),
        (3, 1.0),
        (7, 1.0),
        (1, -1.0),
        (6, 1.0),
        (0, -1.0),
        (4, -1.0),
        (2, -1.0),
    ],
    [
        (6, 1.0),
        (2, -1.0),
        (1, 1.0),
        (7, 1.0),
        (5, -1.0),
        (4, 1.0),
        (0, -1.0),
        (3, -1.0),
    ],
    [
        (7, 1.0),
        (4, 1.0),
        (5, 1.0),
        (6, 1.0),
        (1, -1.0),
        (2, -1.0),
        (3, -1.0),
        (0, -1.0),
    ],
];

/// Look up the product of two basis blades.
pub fn blade_product(i: usize, j: usize) -> (usize, f64) {
    PRODUCT_TABLE[i][j]
}

/// Dense multivector of the 8-dimensional algebra.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Multivector {
    pub coefficients: [f64; DIM],
}

impl Multivector {
    pub const ZERO: Multivector = Multivector {
        coefficients: [0.0; DIM],
    };

    pub const fn new(coefficients: [f64; DIM]) -> Self {
        Multivector { coefficients }
    }

    /// The unit basis blade at storage index `index`.
    pub fn basis(index: usize) -> Self {
        let mut coefficients = [0.0; DIM];
        coefficients[index] = 1.0;
        Multivector { coefficients }
    }

    pub fn scalar(value: f64) -> Self {
        let mut m = Self::ZERO;
        m.coefficients[0] = value;
        m
    }

    pub fn e_x() -> Self {
        Self::basis(1)
    }

    pub fn e_y() -> Self {
        Self::basis(2)
    }

    pub fn e_z() -> Self {
        Self::basis(3)
    }

    pub fn e_yz() -> Self {
        Self::basis(4)
    }

    pub fn e_zx() -> Self {
        Self::basis(5)
    }

    pub fn e_xy() -> Self {
        Self::basis(6)
    }

    /// The unit trivector `I = e_x∧e_y∧e_z`.
    pub fn pseudoscalar() -> Self {
        Self::basis(7)
    }

    pub fn from_vector(v: Vector3) -> Self {
        Multivector::new([0.0, v.x, v.y, v.z, 0.0, 0.0, 0.0, 0.0])
    }

    pub fn is_finite(&self) -> bool {
        self.coefficients.iter().all(|c| c.is_finite())
    }

    /// Largest absolute coefficient difference.
    pub fn max_abs_diff(&self, other: &Multivector) -> f64 {
        self.coefficients
            .iter()
            .zip(other.coefficients.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.coefficients
            .iter()
            .map(|c| c.abs())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = *self;
        out.coefficients.iter_mut().for_each(|c| *c *= factor);
        out
    }

    /// Grades {0, 2} as an [`EvenElement`], dropping odd grades.
    pub fn even_part(&self) -> EvenElement {
        let c = &self.coefficients;
        EvenElement::new(c[0], c[4], c[5], c[6])
    }

    /// Largest absolute coefficient among the odd grades {1, 3}.
    pub fn odd_magnitude(&self) -> f64 {
        let c = &self.coefficients;
        [c[1], c[2], c[3], c[7]]
            .iter()
            .map(|x| x.abs())
            .fold(0.0, f64::max)
    }
}

impl Add for Multivector {
    type Output = Multivector;

    fn add(self, rhs: Multivector) -> Multivector {
        let mut out = self;
        for (o, r) in out.coefficients.iter_mut().zip(rhs.coefficients.iter()) {
            *o += r;
        }
        out
    }
}

impl Sub for Multivector {
    type Output = Multivector;

    fn sub(self, rhs: Multivector) -> Multivector {
        self + (-rhs)
    }
}

impl Neg for Multivector {
    type Output = Multivector;

    fn neg(self) -> Multivector {
        self.scale(-1.0)
    }
}

impl Mul for Multivector {
    type Output = Multivector;

    fn mul(self, rhs: Multivector) -> Multivector {
        geometric_product(&self, &rhs)
    }
}

impl fmt::Display for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, name) in self.coefficients.iter().zip(BLADE_NAMES.iter()) {
            if *c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if *name == "1" {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c} {name}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Full geometric product over the fixed right-handed product table.
pub fn geometric_product(lhs: &Multivector, rhs: &Multivector) -> Multivector {
    let mut out = [0.0; DIM];
    for (i, &a) in lhs.coefficients.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        for (j, &b) in rhs.coefficients.iter().enumerate() {
            if b == 0.0 {
                continue;
            }
            let (k, sign) = PRODUCT_TABLE[i][j];
            out[k] += sign * a * b;
        }
    }
    Multivector::new(out)
}

/// Outer (Grassmann) product: the grade-raising part of the geometric product
/// taken blade by blade.
pub fn wedge(lhs: &Multivector, rhs: &Multivector) -> Multivector {
    let mut out = [0.0; DIM];
    for (i, &a) in lhs.coefficients.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        for (j, &b) in rhs.coefficients.iter().enumerate() {
            if b == 0.0 {
                continue;
            }
            let (k, sign) = PRODUCT_TABLE[i][j];
            if BLADE_GRADES[k] == BLADE_GRADES[i] + BLADE_GRADES[j] {
                out[k] += sign * a * b;
            }
        }
    }
    Multivector::new(out)
}

/// Grade-`k` component of `m`. Only grades 0 through 3 exist.
pub fn grade_projection(m: &Multivector, k: usize) -> Result<Multivector> {
    if k > 3 {
        return Err(Error::InvalidGrade(k));
    }
    let mut out = Multivector::ZERO;
    for (i, c) in m.coefficients.iter().enumerate() {
        if BLADE_GRADES[i] == k {
            out.coefficients[i] = *c;
        }
    }
    Ok(out)
}

/// Real 3-vector, used for directions `a`, `b`, `n`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vector3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vector3 {
    pub const E_X: Vector3 = Vector3 {
        x: 1.0,
        y: 0.0,
        z: 0.0,
    };
    pub const E_Y: Vector3 = Vector3 {
        x: 0.0,
        y: 1.0,
        z: 0.0,
    };
    pub const E_Z: Vector3 = Vector3 {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vector3 { x, y, z }
    }

    pub fn dot(&self, other: &Vector3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &Vector3) -> Vector3 {
        Vector3 {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// `None` for the zero vector.
    pub fn normalized(&self) -> Option<Vector3> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self.scale(1.0 / n))
    }

    pub fn scale(&self, factor: f64) -> Vector3 {
        Vector3::new(self.x * factor, self.y * factor, self.z * factor)
    }

    pub fn is_unit(&self, tol: f64) -> bool {
        (self.norm_squared() - 1.0).abs() <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vector3 {
    type Output = Vector3;

    fn add(self, rhs: Vector3) -> Vector3 {
        Vector3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Neg for Vector3 {
    type Output = Vector3;

    fn neg(self) -> Vector3 {
        self.scale(-1.0)
    }
}

/// Orientation of the bivector basis: `μ = sign · I`.
///
/// This is the hidden variable shared by both measurement stations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Handedness {
    /// `μ = +I`
    Right,
    /// `μ = −I`
    Left,
}

impl Handedness {
    pub fn sign(self) -> f64 {
        match self {
            Handedness::Right => 1.0,
            Handedness::Left => -1.0,
        }
    }

    pub fn from_sign(sign: f64) -> Self {
        if sign.is_sign_negative() {
            Handedness::Left
        } else {
            Handedness::Right
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Handedness::Right => Handedness::Left,
            Handedness::Left => Handedness::Right,
        }
    }

    /// `μ` as a trivector.
    pub fn trivector(self) -> Multivector {
        Multivector::pseudoscalar().scale(self.sign())
    }
}

impl Neg for Handedness {
    type Output = Handedness;

    fn neg(self) -> Handedness {
        self.flip()
    }
}

/// Element of the even subalgebra: a scalar plus a bivector.
///
/// Unit elements are points of S³; unit elements with zero scalar part lie on
/// its equatorial S².
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EvenElement {
    pub s: f64,
    pub b_yz: f64,
    pub b_zx: f64,
    pub b_xy: f64,
}

impl EvenElement {
    pub const ZERO: EvenElement = EvenElement {
        s: 0.0,
        b_yz: 0.0,
        b_zx: 0.0,
        b_xy: 0.0,
    };
    pub const ONE: EvenElement = EvenElement {
        s: 1.0,
        b_yz: 0.0,
        b_zx: 0.0,
        b_xy: 0.0,
    };

    pub const fn new(s: f64, b_yz: f64, b_zx: f64, b_xy: f64) -> Self {
        EvenElement {
            s,
            b_yz,
            b_zx,
            b_xy,
        }
    }

    pub const fn scalar(s: f64) -> Self {
        EvenElement::new(s, 0.0, 0.0, 0.0)
    }

    pub fn e_yz() -> Self {
        EvenElement::new(0.0, 1.0, 0.0, 0.0)
    }

    pub fn e_zx() -> Self {
        EvenElement::new(0.0, 0.0, 1.0, 0.0)
    }

    pub fn e_xy() -> Self {
        EvenElement::new(0.0, 0.0, 0.0, 1.0)
    }

    /// Bivector coefficients in `(yz, zx, xy)` order, i.e. the dual vector.
    pub fn bivector(&self) -> Vector3 {
        Vector3::new(self.b_yz, self.b_zx, self.b_xy)
    }

    pub fn from_parts(s: f64, bivector: Vector3) -> Self {
        EvenElement::new(s, bivector.x, bivector.y, bivector.z)
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.s, self.b_yz, self.b_zx, self.b_xy]
    }

    pub fn from_array(c: [f64; 4]) -> Self {
        EvenElement::new(c[0], c[1], c[2], c[3])
    }

    pub fn embed(&self) -> Multivector {
        Multivector::new([self.s, 0.0, 0.0, 0.0, self.b_yz, self.b_zx, self.b_xy, 0.0])
    }

    pub fn norm_squared(&self) -> f64 {
        self.s * self.s + self.b_yz * self.b_yz + self.b_zx * self.b_zx + self.b_xy * self.b_xy
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Quaternionic conjugate; the inverse of a unit element.
    pub fn conjugate(&self) -> Self {
        EvenElement::new(self.s, -self.b_yz, -self.b_zx, -self.b_xy)
    }

    pub fn scale(&self, factor: f64) -> Self {
        EvenElement::new(
            self.s * factor,
            self.b_yz * factor,
            self.b_zx * factor,
            self.b_xy * factor,
        )
    }

    /// `None` for the zero element.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self.scale(1.0 / n))
    }

    pub fn max_abs_diff(&self, other: &EvenElement) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().map(|c| c.abs()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|c| c.is_finite())
    }
}

impl Add for EvenElement {
    type Output = EvenElement;

    fn add(self, rhs: EvenElement) -> EvenElement {
        EvenElement::new(
            self.s + rhs.s,
            self.b_yz + rhs.b_yz,
            self.b_zx + rhs.b_zx,
            self.b_xy + rhs.b_xy,
        )
    }
}

impl Sub for EvenElement {
    type Output = EvenElement;

    fn sub(self, rhs: EvenElement) -> EvenElement {
        self + (-rhs)
    }
}

impl Neg for EvenElement {
    type Output = EvenElement;

    fn neg(self) -> EvenElement {
        self.scale(-1.0)
    }
}

impl Mul for EvenElement {
    type Output = EvenElement;

    fn mul(self, rhs: EvenElement) -> EvenElement {
        even_product(&self, &rhs)
    }
}

impl fmt::Display for EvenElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} + {} e_yz + {} e_zx + {} e_xy",
            self.s, self.b_yz, self.b_zx, self.b_xy
        )
    }
}

/// The pure bivector `μ·v = sign · (v_x e_y∧e_z + v_y e_z∧e_x + v_z e_x∧e_y)`.
pub fn mu_dot(mu: Handedness, v: Vector3) -> EvenElement {
    let s = mu.sign();
    EvenElement::new(0.0, s * v.x, s * v.y, s * v.z)
}

/// Product in the even subalgebra, equal to the geometric product of the
/// embedded elements.
pub fn even_product(lhs: &EvenElement, rhs: &EvenElement) -> EvenElement {
    oriented_product(Handedness::Right, lhs, rhs)
}

/// Product in the even subalgebra whose basis bivectors are `μ·e_x, μ·e_y, μ·e_z`.
///
/// With `(s, B)` the scalar and dual-vector parts:
/// `(s₁ + B₁)(s₂ + B₂) = s₁s₂ − B₁·B₂ + s₁B₂ + s₂B₁ − sign(μ) B₁×B₂`.
/// For `μ = +I` this is [`even_product`]; for `μ = −I` it is the opposite
/// algebra, `p ∘ q = q p`.
pub fn oriented_product(mu: Handedness, lhs: &EvenElement, rhs: &EvenElement) -> EvenElement {
    let sign = mu.sign();
    let (a0, a) = (lhs.s, lhs.bivector());
    let (b0, b) = (rhs.s, rhs.bivector());
    let cross = a.cross(&b);
    EvenElement::new(
        a0 * b0 - a.dot(&b),
        a0 * b.x + b0 * a.x - sign * cross.x,
        a0 * b.y + b0 * a.y - sign * cross.y,
        a0 * b.z + b0 * a.z - sign * cross.z,
    )
}

/// `(μ·a)(μ·b) + a·b + μ·(a×b)`, which vanishes identically in the
/// μ-oriented subalgebra.
pub fn bivector_identity_residual(mu: Handedness, a: Vector3, b: Vector3) -> EvenElement {
    oriented_product(mu, &mu_dot(mu, a), &mu_dot(mu, b))
        + EvenElement::scalar(a.dot(&b))
        + mu_dot(mu, a.cross(&b))
}
