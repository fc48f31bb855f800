//! The bundle `E = R ⊕ L₁ ⊕ … ⊕ Lₙ` over the half-plane, its flat connection
//! and invariant metric, parallel transport by RK4, and the holonomy
//! representation of SL(2,R) it carries.
//!
//! Sections are written in the unit frame `e = Im(z) ∂x`: the `L_k` slot holds
//! the complex coordinate against `e^{⊗k}`. For a velocity `ż` with frame
//! coordinate `x = ż / Im z` the connection reads
//!
//! ```text
//! ∇_ż Y₀  = Y₀' + ½(n+1) Re(x ȳ₁)
//! ∇_ż y_k = y_k' + (n−k+1) x y_{k−1} + i k Re(x) y_k + ¼(n+k+1) x̄ y_{k+1}
//! ```
//!
//! with `y₀ = Y₀` and `y_{n+1} = 0`. Matrices act on the real coordinates
//! `(Y₀, Re y₁, Im y₁, …, Re yₙ, Im yₙ)`.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::halfplane::{
    distance, frame_cocycle, geodesic, moebius_act, Curve, Geodesic, HorocycleSegment, Moebius,
    Point,
};
use crate::symrep::RepMatrix;

pub const DEFAULT_STEP: f64 = 1e-3;
/// Every segment is integrated with at least this many steps.
pub const MIN_STEPS_PER_SEGMENT: usize = 100;

/// Fibre coordinates: one real and `n` complex numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionCoords {
    pub c0: f64,
    pub ck: Vec<Complex64>,
}

impl SectionCoords {
    pub fn zeros(n: usize) -> Self {
        SectionCoords {
            c0: 0.0,
            ck: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn new(c0: f64, ck: Vec<Complex64>) -> Self {
        SectionCoords { c0, ck }
    }

    pub fn n(&self) -> usize {
        self.ck.len()
    }

    pub fn to_real(&self) -> DVector<f64> {
        let mut v = DVector::zeros(2 * self.n() + 1);
        v[0] = self.c0;
        for (k, y) in self.ck.iter().enumerate() {
            v[2 * k + 1] = y.re;
            v[2 * k + 2] = y.im;
        }
        v
    }

    pub fn from_real(v: &DVector<f64>) -> Self {
        let n = (v.len() - 1) / 2;
        SectionCoords {
            c0: v[0],
            ck: (0..n)
                .map(|k| Complex64::new(v[2 * k + 1], v[2 * k + 2]))
                .collect(),
        }
    }

    /// Slot `k` of the section, with slot 0 the real line.
    pub fn slot(&self, k: usize) -> Complex64 {
        if k == 0 {
            Complex64::new(self.c0, 0.0)
        } else {
            self.ck[k - 1]
        }
    }
}

/// Coefficients `a_k` of the bundle metric.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricWeights {
    pub n: usize,
    pub a: Vec<f64>,
}

/// `a₀ = 1`, `a_{k+1} = 2^{−(2k+1)} Π_{j=0}^{k} (n+j+1)/(n−j)`.
pub fn metric_weights(n: usize) -> MetricWeights {
    let mut a = Vec::with_capacity(n + 1);
    a.push(1.0);
    let mut acc = 1.0;
    for k in 0..n {
        acc *= (n + k + 1) as f64 / (n - k) as f64;
        a.push(acc * 0.5f64.powi(2 * k as i32 + 1));
    }
    MetricWeights { n, a }
}

/// `⌊Y, Z⌋ = −Y₀Z₀ + Σ_{k≥1} (−1)^{k+1} a_k Re(y_k z̄_k)`.
pub fn bundle_metric(y: &SectionCoords, z: &SectionCoords) -> Result<f64> {
    if y.n() != z.n() {
        return Err(Error::DimensionMismatch {
            expected: y.n(),
            found: z.n(),
        });
    }
    let w = metric_weights(y.n());
    let mut s = -y.c0 * z.c0;
    for k in 1..=y.n() {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        s += sign * w.a[k] * (y.ck[k - 1] * z.ck[k - 1].conj()).re;
    }
    Ok(s)
}

/// Connection term `Ω(X) Y` on complex slots (slot 0 real), for the frame
/// coordinate `x` of `X`.
pub fn connection_apply(n: usize, x: Complex64, y: &[Complex64]) -> Vec<Complex64> {
    let nf = n as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
    if n >= 1 {
        out[0] = Complex64::new(0.5 * (nf + 1.0) * (x * y[1].conj()).re, 0.0);
    }
    let rho = x.re;
    for k in 1..=n {
        let kf = k as f64;
        let mut t = x * y[k - 1] * (nf - kf + 1.0) + Complex64::new(0.0, kf * rho) * y[k];
        if k < n {
            t += x.conj() * y[k + 1] * (0.25 * (nf + kf + 1.0));
        }
        out[k] = t;
    }
    out
}

/// The real `(2n+1)`-square matrix `Ω(X)` with `∇_X Y = dY(X) + Ω(X) Y`.
pub fn connection_matrix(n: usize, x: Complex64) -> DMatrix<f64> {
    let dim = 2 * n + 1;
    let mut m = DMatrix::zeros(dim, dim);
    let mut basis = vec![Complex64::new(0.0, 0.0); n + 1];
    for col in 0..dim {
        basis.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
        if col == 0 {
            basis[0] = Complex64::new(1.0, 0.0);
        } else {
            let k = col.div_ceil(2);
            basis[k] = if col % 2 == 1 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 1.0)
            };
        }
        let out = connection_apply(n, x, &basis);
        m[(0, col)] = out[0].re;
        for k in 1..=n {
            m[(2 * k - 1, col)] = out[k].re;
            m[(2 * k, col)] = out[k].im;
        }
    }
    m
}

/// Block-diagonal action of a unit complex number `u` on the fibre: `L_k` is
/// multiplied by `u^k`, the real line is fixed.
pub fn fibre_action(n: usize, u: Complex64) -> DMatrix<f64> {
    let dim = 2 * n + 1;
    let mut m = DMatrix::zeros(dim, dim);
    m[(0, 0)] = 1.0;
    let mut p = Complex64::new(1.0, 0.0);
    for k in 1..=n {
        p *= u;
        m[(2 * k - 1, 2 * k - 1)] = p.re;
        m[(2 * k - 1, 2 * k)] = -p.im;
        m[(2 * k, 2 * k - 1)] = p.im;
        m[(2 * k, 2 * k)] = p.re;
    }
    m
}

/// One piece of a piecewise-smooth path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Geodesic(Geodesic),
    Horocycle(HorocycleSegment),
}

impl Segment {
    pub fn reversed(&self) -> Segment {
        match self {
            Segment::Geodesic(g) => Segment::Geodesic(g.reversed()),
            Segment::Horocycle(h) => Segment::Horocycle(h.reversed()),
        }
    }
}

impl Curve for Segment {
    fn length(&self) -> f64 {
        match self {
            Segment::Geodesic(g) => g.length(),
            Segment::Horocycle(h) => h.length(),
        }
    }

    fn point(&self, t: f64) -> Complex64 {
        match self {
            Segment::Geodesic(g) => g.point(t),
            Segment::Horocycle(h) => h.point(t),
        }
    }

    fn velocity(&self, t: f64) -> Complex64 {
        match self {
            Segment::Geodesic(g) => g.velocity(t),
            Segment::Horocycle(h) => h.velocity(t),
        }
    }
}

/// A concatenation of unit-speed segments.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Path {
    pub segments: Vec<Segment>,
}

impl Path {
    pub fn new(segments: Vec<Segment>) -> Self {
        Path { segments }
    }

    /// Geodesic polygon through the given vertices; repeated vertices are skipped.
    pub fn polygon(vertices: &[Point]) -> Result<Self> {
        let mut segments = Vec::new();
        for w in vertices.windows(2) {
            if w[0] != w[1] {
                segments.push(Segment::Geodesic(geodesic(w[0], w[1])?));
            }
        }
        Ok(Path { segments })
    }

    /// Square loop centred at `z0`: vertical geodesic sides of length `side`
    /// between heights `y₀e^{∓side/2}`, joined by horocyclic arcs of Euclidean
    /// width `side·y₀`. It encloses hyperbolic area `2·side·sinh(side/2)`.
    pub fn square_loop(z0: Point, side: f64) -> Result<Self> {
        let (x0, y0) = (z0.x(), z0.y());
        let w = side * y0;
        let yb = y0 * (-0.5 * side).exp();
        let yt = y0 * (0.5 * side).exp();
        let bl = Point::from_xy(x0 - 0.5 * w, yb)?;
        let br = Point::from_xy(x0 + 0.5 * w, yb)?;
        let tr = Point::from_xy(x0 + 0.5 * w, yt)?;
        let tl = Point::from_xy(x0 - 0.5 * w, yt)?;
        Ok(Path {
            segments: vec![
                Segment::Horocycle(HorocycleSegment::new(bl, w / yb)),
                Segment::Geodesic(geodesic(br, tr)?),
                Segment::Horocycle(HorocycleSegment::new(tr, -w / yt)),
                Segment::Geodesic(geodesic(tl, bl)?),
            ],
        })
    }

    pub fn square_area(side: f64) -> f64 {
        2.0 * side * (0.5 * side).sinh()
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(|s| s.length()).sum()
    }

    pub fn start(&self) -> Option<Complex64> {
        self.segments.first().map(|s| s.point(0.0))
    }

    pub fn end(&self) -> Option<Complex64> {
        self.segments.last().map(|s| s.point(s.length()))
    }

    pub fn reversed(&self) -> Path {
        Path {
            segments: self.segments.iter().rev().map(|s| s.reversed()).collect(),
        }
    }

    pub fn then(mut self, other: &Path) -> Path {
        self.segments.extend_from_slice(&other.segments);
        self
    }

    /// Euclidean distance between the end and the start, zero for an empty path.
    pub fn closure_gap(&self) -> f64 {
        match (self.start(), self.end()) {
            (Some(a), Some(b)) => (a - b).norm(),
            _ => 0.0,
        }
    }
}

/// A path together with its RK4 step length.
#[derive(Debug, Clone, PartialEq)]
pub struct PathTransport {
    pub path: Path,
    pub step: f64,
    /// Lower bound on steps per segment; the default keeps the step below
    /// a hundredth of each segment's length.
    pub min_steps: usize,
}

impl PathTransport {
    pub fn new(path: Path, step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!(
                "step must be positive, got {step}"
            )));
        }
        Ok(PathTransport {
            path,
            step,
            min_steps: MIN_STEPS_PER_SEGMENT,
        })
    }

    /// Uses exactly `ceil(length / step)` steps per segment.
    pub fn with_fixed_step(mut self) -> Self {
        self.min_steps = 1;
        self
    }

    fn steps_for(&self, len: f64) -> usize {
        ((len / self.step).ceil() as usize).max(self.min_steps)
    }

    /// Integrates `Φ' = F(z, ż) Φ` along the path with classical RK4, starting
    /// from `state`. `F` is evaluated at the path point and velocity.
    pub fn integrate<F>(&self, mut state: DMatrix<f64>, field: F) -> Result<DMatrix<f64>>
    where
        F: Fn(Complex64, Complex64) -> DMatrix<f64>,
    {
        for seg in &self.path.segments {
            let len = seg.length();
            if len == 0.0 {
                continue;
            }
            let steps = self.steps_for(len);
            let h = len / steps as f64;
            let eval = |t: f64| -> Result<DMatrix<f64>> {
                let z = seg.point(t);
                if !(z.im > 0.0) {
                    return Err(Error::PathLeavesHalfPlane { t });
                }
                Ok(field(z, seg.velocity(t)))
            };
            let mut f0 = eval(0.0)?;
            for i in 0..steps {
                let t = i as f64 * h;
                let fm = eval(t + 0.5 * h)?;
                let f1 = eval(t + h)?;
                let k1 = &f0 * &state;
                let k2 = &fm * (&state + &k1 * (0.5 * h));
                let k3 = &fm * (&state + &k2 * (0.5 * h));
                let k4 = &f1 * (&state + &k3 * h);
                state += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
                f0 = f1;
            }
        }
        Ok(state)
    }
}

/// Transport matrix of the flat connection along the path, on real coordinates.
pub fn transport_matrix(n: usize, pt: &PathTransport) -> Result<DMatrix<f64>> {
    let dim = 2 * n + 1;
    pt.integrate(DMatrix::identity(dim, dim), |z, zdot| {
        -connection_matrix(n, zdot / z.im)
    })
}

/// Parallel transport of a single section.
pub fn parallel_transport(
    n: usize,
    pt: &PathTransport,
    y: &SectionCoords,
) -> Result<SectionCoords> {
    if y.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: y.n(),
        });
    }
    let v = y.to_real();
    let out = pt.integrate(
        DMatrix::from_column_slice(v.len(), 1, v.as_slice()),
        |z, zdot| -connection_matrix(n, zdot / z.im),
    )?;
    Ok(SectionCoords::from_real(&DVector::from_column_slice(
        out.as_slice(),
    )))
}

fn operator_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

/// `‖Hol(loop) − I‖` in the operator norm.
pub fn flatness_residual(n: usize, lp: &PathTransport) -> Result<f64> {
    let gap = lp.path.closure_gap();
    if gap > 1e-12 {
        return Err(Error::OpenLoop { gap });
    }
    let h = transport_matrix(n, lp)?;
    let dim = 2 * n + 1;
    Ok(operator_norm(&(h - DMatrix::identity(dim, dim))))
}

/// Holonomy on `L_k` of the Levi-Civita connection alone: the unit complex
/// number picked up by transporting along the loop.
pub fn levi_civita_holonomy(k: usize, lp: &PathTransport) -> Result<Complex64> {
    let kf = k as f64;
    let out = lp.integrate(DMatrix::from_row_slice(2, 1, &[1.0, 0.0]), |z, zdot| {
        let r = kf * zdot.re / z.im;
        DMatrix::from_row_slice(2, 2, &[0.0, r, -r, 0.0])
    })?;
    Ok(Complex64::new(out[0], out[1]))
}

/// The flat-bundle image of `g`: act on the fibre over `x₀` by `g`, then
/// transport back from `g·x₀` to `x₀` along the geodesic.
pub fn holonomy_rep(g: &Moebius, n: usize, basepoint: Point, step: f64) -> Result<RepMatrix> {
    let u = frame_cocycle(g, basepoint);
    let act = fibre_action(n, u);
    let gx = moebius_act(g, basepoint);
    let matrix = if distance(gx, basepoint) > 0.0 {
        let pt = PathTransport::new(Path::polygon(&[gx, basepoint])?, step)?;
        transport_matrix(n, &pt)? * act
    } else {
        act
    };
    Ok(RepMatrix { n, matrix })
}

/// Complexified spectrum of the holonomy of the rotation by `θ` about `x₀`,
/// sorted by argument.
pub fn circle_weights(theta: f64, n: usize, x0: Point) -> Result<Vec<Complex64>> {
    let g = Moebius::rotation_about(x0, theta);
    let h = holonomy_rep(&g, n, x0, DEFAULT_STEP)?;
    let mut eig: Vec<Complex64> = h
        .matrix
        .schur()
        .complex_eigenvalues()
        .iter()
        .copied()
        .collect();
    eig.sort_by(|a, b| {
        a.arg()
            .partial_cmp(&b.arg())
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    Ok(eig)
}
