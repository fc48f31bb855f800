//! Upper half-plane model of the hyperbolic plane.
//!
//! Points are complex numbers with positive imaginary part, isometries are
//! unimodular real matrices acting by fractional linear transformations. The
//! tangent bundle is trivialised by the global unit frame `e(z) = Im(z) ∂x`,
//! so a tangent vector `X` at `z` has the complex frame coordinate
//! `X / Im(z)` and the derivative of an isometry acts on frame coordinates by
//! multiplication with a unit complex number (see [`frame_cocycle`]).
//!
//! The disk model only shows up through the Cayley transform
//! `w = (z - i) / (z + i)`, used by the Poincaré-series evaluator.

use core::ops::Mul;
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const I: Complex64 = Complex64::new(0.0, 1.0);

const UNIMODULAR_TOL: f64 = 1e-12;
const HYPERBOLIC_TOL: f64 = 1e-10;

/// A point of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point(Complex64);

impl Point {
    pub fn new(z: Complex64) -> Result<Self> {
        if z.im > 0.0 && z.re.is_finite() && z.im.is_finite() {
            Ok(Point(z))
        } else {
            Err(Error::NotInHalfPlane { re: z.re, im: z.im })
        }
    }

    pub fn from_xy(x: f64, y: f64) -> Result<Self> {
        Self::new(Complex64::new(x, y))
    }

    /// The point `i`, the centre of the disk model.
    pub fn i() -> Self {
        Point(I)
    }

    pub fn z(self) -> Complex64 {
        self.0
    }

    pub fn x(self) -> f64 {
        self.0.re
    }

    pub fn y(self) -> f64 {
        self.0.im
    }
}

/// An element of SL(2,R), acting on the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moebius {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl Moebius {
    /// Builds `[[a, b], [c, d]]`, rejecting matrices whose determinant is not 1.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs()).max(1.0);
        if (det - 1.0).abs() <= UNIMODULAR_TOL * scale * scale {
            Ok(Moebius { a, b, c, d })
        } else {
            Err(Error::NotUnimodular { det })
        }
    }

    /// Rescales a matrix with positive determinant into SL(2,R).
    pub fn normalized(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::NotUnimodular { det });
        }
        let s = det.sqrt().recip();
        Ok(Moebius {
            a: a * s,
            b: b * s,
            c: c * s,
            d: d * s,
        })
    }

    pub const fn identity() -> Self {
        Moebius {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 1.0,
        }
    }

    /// `diag(k, 1/k)`, the map `z ↦ k² z`.
    pub fn dilation(k: f64) -> Self {
        Moebius {
            a: k,
            b: 0.0,
            c: 0.0,
            d: k.recip(),
        }
    }

    /// Hyperbolic translation of length `len` along the imaginary axis, towards `∞`.
    pub fn boost(len: f64) -> Self {
        Self::dilation((0.5 * len).exp())
    }

    /// The parabolic map `z ↦ z + t`.
    pub fn translation(t: f64) -> Self {
        Moebius {
            a: 1.0,
            b: t,
            c: 0.0,
            d: 1.0,
        }
    }

    /// Rotation by angle `theta` about `i`: in the disk model this is `w ↦ e^{iθ} w`,
    /// and its frame cocycle at `i` is `e^{iθ}`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = (0.5 * theta).sin_cos();
        Moebius {
            a: c,
            b: s,
            c: -s,
            d: c,
        }
    }

    /// The affine map `z ↦ y z + x` carrying `i` to `p = x + iy`.
    pub fn carrying_i_to(p: Point) -> Self {
        let r = p.y().sqrt();
        Moebius {
            a: r,
            b: p.x() / r,
            c: 0.0,
            d: r.recip(),
        }
    }

    /// Rotation by `theta` about an arbitrary point.
    pub fn rotation_about(p: Point, theta: f64) -> Self {
        let h = Self::carrying_i_to(p);
        h * Self::rotation(theta) * h.inverse()
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn inverse(&self) -> Self {
        Moebius {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn conjugate_by(&self, h: &Moebius) -> Self {
        *h * *self * h.inverse()
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.trace().abs() > 2.0 + HYPERBOLIC_TOL
    }

    /// Frobenius distance to the identity transformation, up to the sign ambiguity
    /// of SL(2,R) → PSL(2,R).
    pub fn distance_to_identity(&self) -> f64 {
        let plus =
            ((self.a - 1.0).powi(2) + self.b.powi(2) + self.c.powi(2) + (self.d - 1.0).powi(2))
                .sqrt();
        let minus =
            ((self.a + 1.0).powi(2) + self.b.powi(2) + self.c.powi(2) + (self.d + 1.0).powi(2))
                .sqrt();
        plus.min(minus)
    }

    /// Frobenius distance between two elements, up to sign.
    pub fn distance_to(&self, other: &Moebius) -> f64 {
        (self.inverse() * *other).distance_to_identity().min({
            let [a, b, c, d] = self.entries();
            let [e, f, g, h] = other.entries();
            let p = ((a - e).powi(2) + (b - f).powi(2) + (c - g).powi(2) + (d - h).powi(2)).sqrt();
            let m = ((a + e).powi(2) + (b + f).powi(2) + (c + g).powi(2) + (d + h).powi(2)).sqrt();
            p.min(m)
        })
    }

    /// Fractional linear action on an arbitrary complex number (including real
    /// boundary points); returns a non-finite value at the pole.
    pub fn act_complex(&self, z: Complex64) -> Complex64 {
        (z * self.a + self.b) / (z * self.c + self.d)
    }

    /// Action on the projective real line, with `None` standing for `∞`.
    pub fn act_boundary(&self, x: BoundaryPoint) -> BoundaryPoint {
        match x {
            BoundaryPoint::Infinity => {
                if self.c == 0.0 {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::Finite(self.a / self.c)
                }
            }
            BoundaryPoint::Finite(x) => {
                let den = self.c * x + self.d;
                if den == 0.0 {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::Finite((self.a * x + self.b) / den)
                }
            }
        }
    }

    /// Complex derivative `1 / (cz + d)²`.
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let den = z * self.c + self.d;
        (den * den).inv()
    }

    /// The conjugate of this element by the Cayley transform, as an element of SU(1,1).
    pub fn to_disk(&self) -> DiskMoebius {
        let Moebius { a, b, c, d } = *self;
        DiskMoebius {
            alpha: Complex64::new(0.5 * (a + d), 0.5 * (b - c)),
            beta: Complex64::new(0.5 * (a - d), -0.5 * (b + c)),
        }
    }
}

impl Mul for Moebius {
    type Output = Moebius;

    fn mul(self, rhs: Moebius) -> Moebius {
        let a = self.a * rhs.a + self.b * rhs.c;
        let b = self.a * rhs.b + self.b * rhs.d;
        let c = self.c * rhs.a + self.d * rhs.c;
        let d = self.c * rhs.b + self.d * rhs.d;
        // Keep products exactly unimodular so long words do not drift.
        let det = a * d - b * c;
        let s = if det > 0.0 { det.sqrt().recip() } else { 1.0 };
        Moebius {
            a: a * s,
            b: b * s,
            c: c * s,
            d: d * s,
        }
    }
}

/// An element of SU(1,1), `w ↦ (αw + β) / (β̄w + ᾱ)`, acting on the unit disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskMoebius {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl DiskMoebius {
    pub fn act(&self, w: Complex64) -> Complex64 {
        (self.alpha * w + self.beta) / (self.beta.conj() * w + self.alpha.conj())
    }

    pub fn derivative(&self, w: Complex64) -> Complex64 {
        let den = self.beta.conj() * w + self.alpha.conj();
        (den * den).inv()
    }

    pub fn compose(&self, rhs: &DiskMoebius) -> DiskMoebius {
        DiskMoebius {
            alpha: self.alpha * rhs.alpha + self.beta * rhs.beta.conj(),
            beta: self.alpha * rhs.beta + self.beta * rhs.alpha.conj(),
        }
    }
}

/// Cayley transform from the half-plane to the disk.
pub fn to_disk_point(z: Complex64) -> Complex64 {
    (z - I) / (z + I)
}

/// Inverse Cayley transform.
pub fn from_disk_point(w: Complex64) -> Complex64 {
    I * (Complex64::new(1.0, 0.0) + w) / (Complex64::new(1.0, 0.0) - w)
}

/// Derivative of the Cayley transform, `2i / (z + i)²`.
pub fn cayley_derivative(z: Complex64) -> Complex64 {
    let den = z + I;
    Complex64::new(0.0, 2.0) / (den * den)
}

/// `(az + b) / (cz + d)`, with the imaginary part computed as `Im z / |cz + d|²`
/// so the result stays in the half-plane.
pub fn moebius_act(g: &Moebius, z: Point) -> Point {
    let z = z.z();
    let den = z * g.c + g.d;
    let w = (z * g.a + g.b) / den;
    Point(Complex64::new(w.re, z.im / den.norm_sqr()))
}

/// The unit complex number `g'(z) Im(z) / Im(gz)` by which the differential of
/// `g` acts on frame coordinates. On `L_k` the action is multiplication by its
/// `k`-th power.
pub fn frame_cocycle(g: &Moebius, z: Point) -> Complex64 {
    let den = z.z() * g.c + g.d;
    let u = den.conj() / den;
    u / u.norm()
}

/// Hyperbolic distance.
pub fn distance(z0: Point, z1: Point) -> f64 {
    let chord = (z0.z() - z1.z()).norm();
    2.0 * (chord / (2.0 * (z0.y() * z1.y()).sqrt())).asinh()
}

/// A unit-speed curve in the half-plane, parametrised on `[0, length]`.
pub trait Curve {
    fn length(&self) -> f64;
    fn point(&self, t: f64) -> Complex64;
    fn velocity(&self, t: f64) -> Complex64;
}

/// A unit-speed geodesic `t ↦ M(i e^t)` for a fixed isometry `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geodesic {
    map: Moebius,
    length: f64,
}

impl Geodesic {
    /// The geodesic through `M(i)` in direction `M'(i)·i`, restricted to `[0, length]`.
    pub fn from_map(map: Moebius, length: f64) -> Self {
        Geodesic { map, length }
    }

    /// The geodesic leaving `base` in the unit frame direction `dir`.
    pub fn from_unit_tangent(u: &UnitTangent, length: f64) -> Self {
        // At i the imaginary axis leaves with frame direction i; rotate by dir / i.
        let theta = (u.dir() / I).arg();
        let map = Moebius::carrying_i_to(u.base()) * Moebius::rotation(theta);
        Geodesic { map, length }
    }

    pub fn map(&self) -> &Moebius {
        &self.map
    }

    pub fn start(&self) -> Point {
        self.point_at(0.0)
    }

    pub fn end(&self) -> Point {
        self.point_at(self.length)
    }

    pub fn point_at(&self, t: f64) -> Point {
        moebius_act(&self.map, Point(Complex64::new(0.0, t.exp())))
    }

    /// Unit frame coordinate of the velocity.
    pub fn frame_velocity(&self, t: f64) -> Complex64 {
        let v = self.velocity(t) / self.point_at(t).y();
        v / v.norm()
    }

    pub fn unit_tangent(&self, t: f64) -> UnitTangent {
        UnitTangent {
            base: self.point_at(t),
            dir: self.frame_velocity(t),
        }
    }

    /// The same geodesic traversed backwards.
    pub fn reversed(&self) -> Geodesic {
        let flip = Moebius {
            a: 0.0,
            b: -1.0,
            c: 1.0,
            d: 0.0,
        };
        Geodesic {
            map: self.map * Moebius::boost(self.length) * flip,
            length: self.length,
        }
    }

    /// Reparametrised to start at parameter `s0` of this geodesic.
    pub fn shifted(&self, s0: f64, length: f64) -> Geodesic {
        Geodesic {
            map: self.map * Moebius::boost(s0),
            length,
        }
    }
}

impl Curve for Geodesic {
    fn length(&self) -> f64 {
        self.length
    }

    fn point(&self, t: f64) -> Complex64 {
        self.point_at(t).z()
    }

    fn velocity(&self, t: f64) -> Complex64 {
        let w = Complex64::new(0.0, t.exp());
        self.map.derivative(w) * w
    }
}

/// The unit-speed geodesic from `z0` to `z1`.
pub fn geodesic(z0: Point, z1: Point) -> Result<Geodesic> {
    let d = distance(z0, z1);
    if !(d > 0.0) {
        return Err(Error::CoincidentPoints);
    }
    let a = Moebius::carrying_i_to(z0);
    let w1 = moebius_act(&a.inverse(), z1).z();
    let zeta = to_disk_point(w1);
    let map = a * Moebius::rotation(zeta.arg());
    Ok(Geodesic { map, length: d })
}

/// A horocyclic segment `Im z = const` traversed at unit hyperbolic speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorocycleSegment {
    start: Point,
    length: f64,
    direction: f64,
}

impl HorocycleSegment {
    /// Moves right for positive `length`, left for negative.
    pub fn new(start: Point, length: f64) -> Self {
        HorocycleSegment {
            start,
            length: length.abs(),
            direction: if length < 0.0 { -1.0 } else { 1.0 },
        }
    }

    pub fn end(&self) -> Point {
        Point(self.point(self.length))
    }

    pub fn reversed(&self) -> Self {
        HorocycleSegment {
            start: self.end(),
            length: self.length,
            direction: -self.direction,
        }
    }
}

impl Curve for HorocycleSegment {
    fn length(&self) -> f64 {
        self.length
    }

    fn point(&self, t: f64) -> Complex64 {
        let y = self.start.y();
        Complex64::new(self.start.x() + self.direction * t * y, y)
    }

    fn velocity(&self, _t: f64) -> Complex64 {
        Complex64::new(self.direction * self.start.y(), 0.0)
    }
}

/// An element of the unit tangent bundle: base point and unit frame coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitTangent {
    base: Point,
    dir: Complex64,
}

impl UnitTangent {
    pub fn new(base: Point, dir: Complex64) -> Result<Self> {
        let modulus = dir.norm();
        if (modulus - 1.0).abs() > UNIMODULAR_TOL {
            return Err(Error::NotUnitDirection { modulus });
        }
        Ok(UnitTangent { base, dir })
    }

    pub fn from_angle(base: Point, angle: f64) -> Self {
        UnitTangent {
            base,
            dir: Complex64::from_polar(1.0, angle),
        }
    }

    pub fn base(&self) -> Point {
        self.base
    }

    pub fn dir(&self) -> Complex64 {
        self.dir
    }

    /// The tangent vector in half-plane coordinates, `dir · Im(z)`.
    pub fn vector(&self) -> Complex64 {
        self.dir * self.base.y()
    }

    /// Rotates the direction by the unit complex number `beta` (fibrewise action).
    pub fn rotated(&self, beta: Complex64) -> Self {
        let d = self.dir * beta;
        UnitTangent {
            base: self.base,
            dir: d / d.norm(),
        }
    }

    /// Pushes forward by an isometry.
    pub fn pushed(&self, g: &Moebius) -> Self {
        let u = frame_cocycle(g, self.base);
        UnitTangent {
            base: moebius_act(g, self.base),
            dir: self.dir * u,
        }
    }
}

/// A point of `R ∪ {∞}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryPoint {
    Finite(f64),
    Infinity,
}

impl BoundaryPoint {
    fn from_projective(v0: f64, v1: f64) -> Self {
        if v1 == 0.0 || (v1.abs() <= 1e-300) {
            BoundaryPoint::Infinity
        } else {
            BoundaryPoint::Finite(v0 / v1)
        }
    }

    /// Image on the unit circle under the Cayley transform.
    pub fn to_circle(self) -> Complex64 {
        match self {
            BoundaryPoint::Infinity => Complex64::new(1.0, 0.0),
            BoundaryPoint::Finite(x) => to_disk_point(Complex64::new(x, 0.0)),
        }
    }
}

/// Fixed points, translation length and oriented axis of a hyperbolic element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisData {
    pub repelling: BoundaryPoint,
    pub attracting: BoundaryPoint,
    pub translation_length: f64,
    /// Unit-speed parametrisation of the axis with `g·c(t) = c(t + ℓ)`, one
    /// period long, starting at the foot of the perpendicular dropped from `i`.
    pub axis: Geodesic,
}

pub fn axis_data(g: &Moebius) -> Result<AxisData> {
    let tr = g.trace();
    if tr.abs() <= 2.0 + HYPERBOLIC_TOL {
        return Err(Error::NotHyperbolic { trace: tr });
    }
    let disc = (tr * tr - 4.0).sqrt();
    let lambda_att = 0.5 * (tr + tr.signum() * disc);
    let lambda_rep = lambda_att.recip();
    let eigvec = |lambda: f64| -> (f64, f64) {
        let v = (g.b, lambda - g.a);
        let w = (lambda - g.d, g.c);
        if v.0.hypot(v.1) >= w.0.hypot(w.1) {
            v
        } else {
            w
        }
    };
    let va = eigvec(lambda_att);
    let mut vr = eigvec(lambda_rep);
    let mut det = va.0 * vr.1 - vr.0 * va.1;
    if det < 0.0 {
        vr = (-vr.0, -vr.1);
        det = -det;
    }
    // Columns are the eigenvectors, so `M⁻¹ g M` is diagonal with ∞ attracting.
    let m = Moebius::normalized(va.0, vr.0, va.1, vr.1)
        .map_err(|_| Error::NotHyperbolic { trace: tr })?;
    debug_assert!(det > 0.0);
    let w = moebius_act(&m.inverse(), Point::i()).z();
    let m = m * Moebius::dilation(w.norm().sqrt());
    let translation_length = 2.0 * (0.5 * tr.abs()).acosh();
    Ok(AxisData {
        repelling: BoundaryPoint::from_projective(vr.0, vr.1),
        attracting: BoundaryPoint::from_projective(va.0, va.1),
        translation_length,
        axis: Geodesic::from_map(m, translation_length),
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_moebius(rng: &mut impl Rng) -> Moebius {
        let a: f64 = rng.gen_range(-2.0..2.0);
        let b: f64 = rng.gen_range(-2.0..2.0);
        let c: f64 = rng.gen_range(-2.0..2.0);
        let d: f64 = rng.gen_range(-2.0..2.0);
        let det = a * d - b * c;
        if det > 0.1 {
            Moebius::normalized(a, b, c, d).unwrap()
        } else {
            Moebius::normalized(b, a, d, c).unwrap_or(Moebius::rotation(a))
        }
    }

    fn random_point(rng: &mut impl Rng) -> Point {
        Point::from_xy(rng.gen_range(-3.0..3.0), rng.gen_range(0.2..3.0)).unwrap()
    }

    #[test]
    fn action_examples() {
        let i = Point::i();
        assert_eq!(moebius_act(&Moebius::identity(), i).z(), I);
        let g = Moebius::dilation(2.0);
        assert_relative_eq!(moebius_act(&g, i).y(), 4.0);
        let t = Moebius::translation(1.0);
        let w = moebius_act(&t, i).z();
        assert_relative_eq!(w.re, 1.0);
        assert_relative_eq!(w.im, 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Point::from_xy(0.0, -1.0).is_err());
        assert!(Moebius::new(1.0, 1.0, 1.0, 1.0).is_err());
        assert!(Moebius::normalized(0.0, 1.0, 1.0, 0.0).is_err());
        assert!(UnitTangent::new(Point::i(), Complex64::new(2.0, 0.0)).is_err());
        assert_eq!(
            geodesic(Point::i(), Point::i()),
            Err(Error::CoincidentPoints)
        );
        assert!(axis_data(&Moebius::rotation(0.4)).is_err());
        assert!(axis_data(&Moebius::translation(3.0)).is_err());
    }

    #[test]
    fn frame_cocycle_examples_and_law() {
        let i = Point::i();
        assert_eq!(
            frame_cocycle(&Moebius::identity(), i),
            Complex64::new(1.0, 0.0)
        );
        let u = frame_cocycle(&Moebius::dilation(2.0), i);
        assert!((u - 1.0).norm() < 1e-15);
        // Rotation about i acts on the frame by e^{iθ}.
        let u = frame_cocycle(&Moebius::rotation(0.7), i);
        assert!((u - Complex64::from_polar(1.0, 0.7)).norm() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let g = random_moebius(&mut rng);
            let h = random_moebius(&mut rng);
            let z = random_point(&mut rng);
            let lhs = frame_cocycle(&(g * h), z);
            let rhs = frame_cocycle(&g, moebius_act(&h, z)) * frame_cocycle(&h, z);
            assert!((lhs - rhs).norm() <= 1e-12);
            assert!((lhs.norm() - 1.0).abs() <= 1e-15);
        }
    }

    #[test]
    fn distance_properties() {
        let d = distance(Point::i(), Point::from_xy(0.0, 4.0).unwrap());
        assert_relative_eq!(d, 4f64.ln(), epsilon = 1e-15);
        let eps = 1e-4;
        let d = distance(Point::i(), Point::from_xy(eps, 1.0).unwrap());
        assert!(((d - eps) / eps).abs() <= 1e-6);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let g = random_moebius(&mut rng);
            let (z0, z1, z2) = (
                random_point(&mut rng),
                random_point(&mut rng),
                random_point(&mut rng),
            );
            let before = distance(z0, z1);
            let after = distance(moebius_act(&g, z0), moebius_act(&g, z1));
            assert!((before - after).abs() <= 1e-10 * before.max(1.0));
            // triangle inequality, for good measure
            assert!(distance(z0, z2) <= distance(z0, z1) + distance(z1, z2) + 1e-12);
        }
    }

    #[test]
    fn geodesic_is_unit_speed_and_hits_endpoints() {
        let g = geodesic(Point::i(), Point::from_xy(0.0, 4.0).unwrap()).unwrap();
        assert_relative_eq!(g.length(), 4f64.ln(), epsilon = 1e-14);
        assert!(g.point(0.3).re.abs() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let z0 = random_point(&mut rng);
            let z1 = random_point(&mut rng);
            let c = geodesic(z0, z1).unwrap();
            assert!((c.start().z() - z0.z()).norm() <= 1e-10);
            assert!((c.end().z() - z1.z()).norm() <= 1e-10);
            for k in 0..=10 {
                let t = c.length() * k as f64 / 10.0;
                let speed = c.velocity(t).norm() / c.point(t).im;
                assert!((speed - 1.0).abs() <= 1e-8);
                // finite-difference velocity agrees with the analytic one
                let h = 1e-6;
                let fd = (c.point(t + h) - c.point(t - h)) / (2.0 * h);
                assert!((fd - c.velocity(t)).norm() <= 1e-6 * c.velocity(t).norm().max(1.0));
            }
            let r = c.reversed();
            assert!((r.start().z() - z1.z()).norm() <= 1e-9);
            assert!((r.end().z() - z0.z()).norm() <= 1e-9);
        }
    }

    #[test]
    fn axis_of_dilation() {
        let data = axis_data(&Moebius::dilation(2.0)).unwrap();
        assert_eq!(data.attracting, BoundaryPoint::Infinity);
        assert_eq!(data.repelling, BoundaryPoint::Finite(0.0));
        assert_relative_eq!(data.translation_length, 4f64.ln(), epsilon = 1e-14);
        assert_relative_eq!(
            data.translation_length,
            2.0 * 1.25f64.acosh(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn axis_minimises_displacement() {
        // trace 3: brute-force minimum of d(z, gz) over a grid along and off the axis
        let g = Moebius::normalized(2.0, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(g.trace(), 3.0, epsilon = 1e-15);
        let data = axis_data(&g).unwrap();
        assert_relative_eq!(data.translation_length, 1.924847300238413, epsilon = 1e-12);
        let mut best = f64::INFINITY;
        for i in 0..400 {
            for j in 1..400 {
                let z =
                    Point::from_xy(-2.0 + 4.0 * i as f64 / 400.0, 3.0 * j as f64 / 400.0).unwrap();
                best = best.min(distance(z, moebius_act(&g, z)));
            }
        }
        assert!(best >= data.translation_length - 1e-12);
        assert!(best - data.translation_length < 1e-3);

        let c = data.axis;
        for k in 0..5 {
            let t = k as f64 * 0.37;
            let gz = moebius_act(&g, c.point_at(t));
            assert!((gz.z() - c.point_at(t + data.translation_length).z()).norm() <= 1e-10);
            let disp = distance(c.point_at(t), gz);
            assert!((disp - data.translation_length).abs() <= 1e-10);
        }
        let fixed = |p: BoundaryPoint| match p {
            BoundaryPoint::Finite(x) => {
                let gx = g.act_complex(Complex64::new(x, 0.0));
                (gx.re - x).abs() < 1e-12
            }
            BoundaryPoint::Infinity => g.c() == 0.0,
        };
        assert!(fixed(data.attracting) && fixed(data.repelling));
    }

    #[test]
    fn translation_length_is_conjugation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = Moebius::boost(1.3);
        let l = axis_data(&g).unwrap().translation_length;
        for _ in 0..50 {
            let h = random_moebius(&mut rng);
            let lc = axis_data(&g.conjugate_by(&h)).unwrap().translation_length;
            assert!((l - lc).abs() <= 1e-10);
        }
    }

    #[test]
    fn axis_starts_at_foot_of_perpendicular_from_i() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let h = random_moebius(&mut rng);
            let g = Moebius::boost(2.0).conjugate_by(&h);
            let c = axis_data(&g).unwrap().axis;
            let d0 = distance(Point::i(), c.point_at(0.0));
            for s in [-0.01, 0.01] {
                assert!(distance(Point::i(), c.point_at(s)) >= d0);
            }
        }
    }

    #[test]
    fn disk_conjugation_matches_cayley() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let g = random_moebius(&mut rng);
            let z = random_point(&mut rng).z();
            let lhs = g.to_disk().act(to_disk_point(z));
            let rhs = to_disk_point(g.act_complex(z));
            assert!((lhs - rhs).norm() <= 1e-12);
            let h = random_moebius(&mut rng);
            let composed = g.to_disk().compose(&h.to_disk());
            let direct = (g * h).to_disk();
            assert!((composed.alpha - direct.alpha).norm() <= 1e-10 * direct.alpha.norm());
        }
        let w = Complex64::new(0.3, -0.2);
        assert!((to_disk_point(from_disk_point(w)) - w).norm() < 1e-15);
    }

    #[test]
    fn unit_tangent_geodesic_starts_in_direction() {
        let u = UnitTangent::from_angle(Point::from_xy(0.5, 2.0).unwrap(), 1.1);
        let c = Geodesic::from_unit_tangent(&u, 1.0);
        assert!((c.start().z() - u.base().z()).norm() < 1e-14);
        assert!((c.frame_velocity(0.0) - u.dir()).norm() < 1e-14);
    }
}
