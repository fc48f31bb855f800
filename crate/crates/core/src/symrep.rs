//! Symmetric powers of the standard representation of SL(2,R).
//!
//! The degree-`d` power acts on homogeneous polynomials `P(x, y)` of degree
//! `d` by `P ↦ P ∘ g⁻¹`, in the monomial basis `x^{d−j} y^j`, `j = 0..=d`.
//! For `d = 2n` this is the irreducible representation of dimension `2n+1`,
//! which preserves the symmetric form [`invariant_form`].

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::halfplane::Moebius;

/// A `(2n+1)`-square matrix image of an element of SL(2,R).
#[derive(Debug, Clone, PartialEq)]
pub struct RepMatrix {
    pub n: usize,
    pub matrix: DMatrix<f64>,
}

impl RepMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }
}

/// Coefficients in `y` of `(p x + q y)^k`, highest power of `x` first.
fn linear_power(p: f64, q: f64, k: usize) -> Vec<f64> {
    let mut out = vec![1.0];
    for _ in 0..k {
        let mut next = vec![0.0; out.len() + 1];
        for (i, c) in out.iter().enumerate() {
            next[i] += c * p;
            next[i + 1] += c * q;
        }
        out = next;
    }
    out
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Matrix of `P ↦ P ∘ g⁻¹` on polynomials of any degree (odd degrees give the
/// even-dimensional representations).
pub fn sym_power_matrix(g: &Moebius, degree: usize) -> DMatrix<f64> {
    let [a, b, c, d] = g.entries();
    let mut m = DMatrix::zeros(degree + 1, degree + 1);
    for j in 0..=degree {
        // x^{d−j} y^j ∘ g⁻¹ = (d x − b y)^{d−j} (−c x + a y)^j
        let col = convolve(&linear_power(d, -b, degree - j), &linear_power(-c, a, j));
        for (i, v) in col.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    m
}

/// The `(2n+1)`-dimensional irreducible representation.
pub fn sym_power_rep(g: &Moebius, n: usize) -> RepMatrix {
    RepMatrix {
        n,
        matrix: sym_power_matrix(g, 2 * n),
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// A nondegenerate symmetric bilinear form on `R^{2n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantForm {
    pub n: usize,
    pub gram: DMatrix<f64>,
}

impl InvariantForm {
    /// Form on polynomials of degree `2n` induced by the symplectic form of `R²`.
    pub fn symmetric_power(n: usize) -> Self {
        let dim = 2 * n + 1;
        let mut gram = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            gram[(i, dim - 1 - i)] = sign / binomial(2 * n, i);
        }
        InvariantForm { n, gram }
    }

    /// Bundle metric `−Y₀Z₀ + Σ (−1)^{k+1} a_k Re(y_k z̄_k)` in the real
    /// coordinates `(c₀, Re y₁, Im y₁, …, Re yₙ, Im yₙ)`.
    pub fn bundle(n: usize) -> Self {
        let a = crate::flatbundle::metric_weights(n);
        let dim = 2 * n + 1;
        let mut gram = DMatrix::zeros(dim, dim);
        gram[(0, 0)] = -1.0;
        for k in 1..=n {
            let w = if k % 2 == 1 { a.a[k] } else { -a.a[k] };
            gram[(2 * k - 1, 2 * k - 1)] = w;
            gram[(2 * k, 2 * k)] = w;
        }
        InvariantForm { n, gram }
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn pair(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        u.dot(&(&self.gram * v))
    }

    /// `(positive, negative)` eigenvalue counts of the Gram matrix.
    pub fn sign_counts(&self) -> (usize, usize) {
        let eig = self.gram.clone().symmetric_eigen().eigenvalues;
        let pos = eig.iter().filter(|&&x| x > 0.0).count();
        let neg = eig.iter().filter(|&&x| x < 0.0).count();
        (pos, neg)
    }

    /// Relative residual `‖AᵀGA − G‖ / (‖G‖ max(1, ‖A‖²/dim))`, Frobenius norms.
    pub fn preservation_residual(&self, a: &DMatrix<f64>) -> f64 {
        let scale = (a.norm_squared() / a.nrows() as f64).max(1.0);
        (a.transpose() * &self.gram * a - &self.gram).norm() / (self.gram.norm() * scale)
    }

    /// `A⁻¹ = G⁻¹ AᵀG` for a form-preserving `A`, avoiding a general inverse.
    pub fn isometry_inverse(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        let gi = self
            .gram
            .clone()
            .try_inverse()
            .expect("form is nondegenerate");
        gi * a.transpose() * &self.gram
    }
}

/// The invariant form of [`sym_power_rep`].
pub fn invariant_form(n: usize) -> InvariantForm {
    InvariantForm::symmetric_power(n)
}

/// Eigenvalue `a > 1` with `|tr g| = a + 1/a`.
pub fn dominant_eigenvalue(g: &Moebius) -> Result<f64> {
    let tr = g.trace().abs();
    if tr <= 2.0 + 1e-10 {
        return Err(Error::NotHyperbolic { trace: g.trace() });
    }
    Ok(0.5 * (tr + (tr * tr - 4.0).sqrt()))
}

/// `Σ_{j=−n}^{n} a^{2j}`, the trace of [`sym_power_rep`].
pub fn character(g: &Moebius, n: usize) -> Result<f64> {
    let a = dominant_eigenvalue(g)?;
    let a2 = a * a;
    let n = n as i32;
    Ok((-n..=n).map(|j| a2.powi(j)).sum())
}

/// Eigenvectors `(u₊, u₋)` of `g` in `R²` for the eigenvalues of modulus
/// `> 1` and `< 1`, scaled so that `det[u₊, u₋] = 1`.
pub fn eigenbasis(g: &Moebius) -> Result<([f64; 2], [f64; 2])> {
    let tr = g.trace();
    if tr.abs() <= 2.0 + 1e-10 {
        return Err(Error::NotHyperbolic { trace: tr });
    }
    let [a, b, c, d] = g.entries();
    let disc = (tr * tr - 4.0).sqrt();
    let lp = 0.5 * (tr + tr.signum() * disc);
    let lm = lp.recip();
    let vec_for = |l: f64| {
        let v = [b, l - a];
        let w = [l - d, c];
        if v[0].hypot(v[1]) >= w[0].hypot(w[1]) {
            v
        } else {
            w
        }
    };
    let up = vec_for(lp);
    let mut um = vec_for(lm);
    let mut det = up[0] * um[1] - up[1] * um[0];
    if det < 0.0 {
        um = [-um[0], -um[1]];
        det = -det;
    }
    let s = det.sqrt().recip();
    Ok(([up[0] * s, up[1] * s], [um[0] * s, um[1] * s]))
}

/// The fixed vector `(ℓ₊ ℓ₋)^n` of `sym_power_rep(g, n)`, where
/// `ℓ_u(v) = det[u, v]` and `(u₊, u₋)` is [`eigenbasis`]. It depends only on
/// the oriented axis of `g` and changes by `(−1)^n` under `g ↦ g⁻¹`.
pub fn geodesic_reference(g: &Moebius, n: usize) -> Result<DVector<f64>> {
    let (up, um) = eigenbasis(g)?;
    // det[u, (x, y)] = u₀ y − u₁ x
    let lp = [-up[1], up[0]];
    let lm = [-um[1], um[0]];
    let quad = convolve(&lp, &lm);
    let mut poly = vec![1.0];
    for _ in 0..n {
        poly = convolve(&poly, &quad);
    }
    Ok(DVector::from_vec(poly))
}
