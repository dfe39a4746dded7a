//! S³ and its equatorial S²: membership tests, factorization of S³ points,
//! the non-closure of S² under multiplication, and stereographic projection.

use crate::error::{Error, Result};
use crate::ga::{even_product, mu_dot, EvenElement, Handedness, Vector3};
use crate::sample;

/// Tolerance for [`S2Point`] membership.
pub const SPHERE_TOL: f64 = 1e-12;

/// Points with `|1 − z|` at or below this are treated as the north pole.
pub const NORTH_POLE_TOL: f64 = 1e-12;

/// Tolerance on the target of [`factorize_s3_point`].
pub const FACTOR_TARGET_TOL: f64 = 1e-9;

/// A point on the unit 2-sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct S2Point {
    x: f64,
    y: f64,
    z: f64,
}

impl S2Point {
    pub const NORTH: S2Point = S2Point {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };
    pub const SOUTH: S2Point = S2Point {
        x: 0.0,
        y: 0.0,
        z: -1.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::NonFinite("sphere point"));
        }
        if ((x * x + y * y + z * z) - 1.0).abs() > SPHERE_TOL {
            return Err(Error::NotOnSphere { x, y, z });
        }
        Ok(S2Point { x, y, z })
    }

    /// Radially project a nonzero vector onto the sphere.
    pub fn from_direction(v: Vector3) -> Result<Self> {
        let u = v.normalized().ok_or(Error::NonFinite("zero direction"))?;
        S2Point::new(u.x, u.y, u.z)
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn to_vector(&self) -> Vector3 {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn max_abs_diff(&self, other: &S2Point) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.z - other.z).abs())
    }
}

/// A point of the projection plane `z = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanePoint {
    pub u: f64,
    pub v: f64,
}

impl PlanePoint {
    pub const fn new(u: f64, v: f64) -> Self {
        PlanePoint { u, v }
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveTolerance(tol))
    }
}

/// `|norm²(q) − 1| ≤ tol`.
pub fn is_unit_s3(q: &EvenElement, tol: f64) -> Result<bool> {
    check_tol(tol)?;
    Ok((q.norm_squared() - 1.0).abs() <= tol)
}

/// Unit element with vanishing scalar part.
pub fn is_equatorial(q: &EvenElement, tol: f64) -> Result<bool> {
    Ok(is_unit_s3(q, tol)? && q.s.abs() <= tol)
}

/// Split a unit `target` into `n` unit factors whose ordered product is `target`.
///
/// The first `n − 1` factors are uniform random points of S³ drawn from `seed`;
/// the last one is `q_{n−1}⁻¹ ⋯ q_1⁻¹ · target`, renormalized.
pub fn factorize_s3_point(target: &EvenElement, n: usize, seed: u64) -> Result<Vec<EvenElement>> {
    if n == 0 {
        return Err(Error::ZeroFactorCount);
    }
    if !target.is_finite() || !is_unit_s3(target, FACTOR_TARGET_TOL)? {
        return Err(Error::NonUnitTarget(target.norm_squared()));
    }
    let mut rng = sample::seeded(seed);
    let mut factors: Vec<EvenElement> = (1..n).map(|_| sample::unit_even(&mut rng)).collect();
    let last = factors
        .iter()
        .fold(*target, |acc, f| even_product(&f.conjugate(), &acc));
    factors.push(
        last.normalized()
            .ok_or(Error::NonUnitTarget(last.norm_squared()))?,
    );
    Ok(factors)
}

/// Ordered product of a list of even elements; the empty product is 1.
pub fn ordered_product(factors: &[EvenElement]) -> EvenElement {
    factors
        .iter()
        .fold(EvenElement::ONE, |acc, f| even_product(&acc, f))
}

/// Product of two equatorial points `(I·a)(I·b)`. Its scalar part is `−a·b`,
/// so it leaves the equator unless `a ⊥ b`.
pub fn s2_nonclosure_witness(a: Vector3, b: Vector3) -> EvenElement {
    even_product(&mu_dot(Handedness::Right, a), &mu_dot(Handedness::Right, b))
}

/// Projection from the north pole onto the plane `z = 0`:
/// `(x, y, z) ↦ (x/(1−z), y/(1−z))`.
pub fn stereographic_project(p: &S2Point) -> Result<PlanePoint> {
    let (x, y, z) = (p.x, p.y, p.z);
    let gap = 1.0 - z;
    if gap.abs() <= NORTH_POLE_TOL {
        return Err(Error::NorthPole);
    }
    // In the northern hemisphere 1 − z cancels; use 1 − z = (x² + y²)/(1 + z).
    let scale = if z > 0.0 {
        (1.0 + z) / (x * x + y * y)
    } else {
        1.0 / gap
    };
    Ok(PlanePoint::new(x * scale, y * scale))
}

/// Inverse projection: `(u, v) ↦ (2u, 2v, r² − 1)/(1 + r²)`.
pub fn stereographic_unproject(q: &PlanePoint) -> Result<S2Point> {
    if !(q.u.is_finite() && q.v.is_finite()) {
        return Err(Error::NonFinite("plane point"));
    }
    let r2 = q.u * q.u + q.v * q.v;
    let denom = 1.0 + r2;
    Ok(S2Point {
        x: 2.0 * q.u / denom,
        y: 2.0 * q.v / denom,
        z: (r2 - 1.0) / denom,
    })
}
