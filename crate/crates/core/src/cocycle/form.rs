//! Bundle-valued 1-forms and their covariant exterior derivative.

use nalgebra::DVector;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::qdiff::QDifferential;
use crate::error::{Error, Result};
use crate::flatbundle::{connection_matrix, SectionCoords};
use crate::halfplane::{distance, Point};

/// A 1-form on the half-plane with values in the bundle of rank `2n+1`.
pub trait BundleForm {
    fn n(&self) -> usize;
    /// Real coordinates of the value on the tangent vector `v` at `z`.
    fn value(&self, z: Complex64, v: Complex64) -> DVector<f64>;

    fn value_coords(&self, z: Complex64, v: Complex64) -> SectionCoords {
        SectionCoords::from_real(&self.value(z, v))
    }
}

impl<T: BundleForm + ?Sized> BundleForm for &T {
    fn n(&self) -> usize {
        (**self).n()
    }

    fn value(&self, z: Complex64, v: Complex64) -> DVector<f64> {
        (**self).value(z, v)
    }
}

/// The zero form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZeroForm {
    pub n: usize,
}

impl BundleForm for ZeroForm {
    fn n(&self) -> usize {
        self.n
    }

    fn value(&self, _z: Complex64, _v: Complex64) -> DVector<f64> {
        DVector::zeros(2 * self.n + 1)
    }
}

/// Pointwise sum of two forms of the same rank.
#[derive(Debug, Clone, PartialEq)]
pub struct FormSum<A, B>(pub A, pub B);

impl<A: BundleForm, B: BundleForm> BundleForm for FormSum<A, B> {
    fn n(&self) -> usize {
        self.0.n()
    }

    fn value(&self, z: Complex64, v: Complex64) -> DVector<f64> {
        self.0.value(z, v) + self.1.value(z, v)
    }
}

/// A real multiple of a form.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaled<A>(pub f64, pub A);

impl<A: BundleForm> BundleForm for Scaled<A> {
    fn n(&self) -> usize {
        self.1.n()
    }

    fn value(&self, z: Complex64, v: Complex64) -> DVector<f64> {
        self.1.value(z, v) * self.0
    }
}

/// How the `L_n` value is read off from `ω(X, y, …, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Duality {
    /// `⟨ω̌, Z⟩ = Re ω(Z)`, giving `x̄ · conj(φ yⁿ⁺¹)`.
    RealPart,
    /// `x · φ yⁿ⁺¹` with no conjugation. Not closed; kept as a control.
    Plain,
}

/// `Φ(ω)`: the `L_n`-valued form `X ↦ i_X ω̌`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiForm {
    omega: QDifferential,
    n: usize,
    duality: Duality,
}

impl PhiForm {
    pub fn omega(&self) -> &QDifferential {
        &self.omega
    }

    pub fn with_duality(mut self, duality: Duality) -> Self {
        self.duality = duality;
        self
    }
}

/// `Φ(ω)` for a q-differential of weight `n + 1`.
pub fn phi_map(omega: &QDifferential, n: usize) -> Result<PhiForm> {
    if n == 0 || omega.q() as usize != n + 1 {
        return Err(Error::WeightMismatch { q: omega.q(), n });
    }
    Ok(PhiForm {
        omega: omega.clone(),
        n,
        duality: Duality::RealPart,
    })
}

impl BundleForm for PhiForm {
    fn n(&self) -> usize {
        self.n
    }

    fn value(&self, z: Complex64, v: Complex64) -> DVector<f64> {
        let mut out = DVector::zeros(2 * self.n + 1);
        if self.omega.is_zero() {
            return out;
        }
        let y = z.im;
        let x = v / y;
        let w = self.omega.eval(z) * y.powi(self.n as i32 + 1);
        let slot = match self.duality {
            Duality::RealPart => (x * w).conj(),
            Duality::Plain => x * w,
        };
        out[2 * self.n - 1] = slot.re;
        out[2 * self.n] = slot.im;
        out
    }
}

/// `d^∇u = du + Ω u` for a section `u` given in real coordinates, with the
/// derivative taken by central differences.
#[derive(Debug, Clone)]
pub struct ExactForm<F> {
    pub n: usize,
    pub section: F,
    /// Difference step relative to `Im z`.
    pub rel_step: f64,
}

impl<F> ExactForm<F>
where
    F: Fn(Complex64) -> DVector<f64>,
{
    pub fn new(n: usize, section: F) -> Self {
        ExactForm {
            n,
            section,
            rel_step: 1e-5,
        }
    }
}

impl<F> BundleForm for ExactForm<F>
where
    F: Fn(Complex64) -> DVector<f64>,
{
    fn n(&self) -> usize {
        self.n
    }

    fn value(&self, z: Complex64, v: Complex64) -> DVector<f64> {
        let u = (self.section)(z);
        let speed = v.norm();
        if speed == 0.0 {
            return DVector::zeros(u.len());
        }
        let h = self.rel_step * z.im;
        let d = v / speed * h;
        let du = ((self.section)(z + d) - (self.section)(z - d)) * (speed / (2.0 * h));
        du + connection_matrix(self.n, v / z.im) * u
    }
}

/// A smooth section supported in the hyperbolic disk of `radius` about
/// `centre`: the constant coordinates `value` times `exp(1 − 1/(1 − s²))`,
/// `s = d(z, centre) / radius`.
pub fn bump_section(
    centre: Point,
    radius: f64,
    value: SectionCoords,
) -> impl Fn(Complex64) -> DVector<f64> {
    let v = value.to_real();
    move |z: Complex64| {
        let s = match Point::new(z) {
            Ok(p) => distance(p, centre) / radius,
            Err(_) => f64::INFINITY,
        };
        if s >= 1.0 {
            DVector::zeros(v.len())
        } else {
            &v * (1.0 - 1.0 / (1.0 - s * s)).exp()
        }
    }
}

/// `‖d^∇α(∂x, ∂y)‖` at `z`, by central differences of step `h`:
/// `∂x α(∂y) − ∂y α(∂x) + Ω(∂x) α(∂y) − Ω(∂y) α(∂x)`.
pub fn closedness_residual<A: BundleForm + ?Sized>(alpha: &A, z: Point, h: f64) -> f64 {
    let n = alpha.n();
    let z = z.z();
    let ex = Complex64::new(1.0, 0.0);
    let ey = Complex64::new(0.0, 1.0);
    let ax = |p: Complex64| alpha.value(p, ex);
    let ay = |p: Complex64| alpha.value(p, ey);
    let dx_ay = (ay(z + ex * h) - ay(z - ex * h)) / (2.0 * h);
    let dy_ax = (ax(z + ey * h) - ax(z - ey * h)) / (2.0 * h);
    let om_x = connection_matrix(n, ex / z.im);
    let om_y = connection_matrix(n, ey / z.im);
    (dx_ay - dy_ax + om_x * ay(z) - om_y * ax(z)).norm()
}
