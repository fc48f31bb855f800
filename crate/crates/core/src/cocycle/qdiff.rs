//! Holomorphic q-differentials as truncated Poincaré series.
//!
//! Everything is summed in the disk model, `φ_D(w) = Σ_γ (γw)^m γ'(w)^q` over
//! group elements of word length at most `L`, and pulled back to the half-plane
//! through the Cayley transform. For the octagon group the truncated sum is
//! also expanded in a Taylor series at the origin; evaluation then reduces the
//! point into the octagon first, so the evaluator is exactly automorphic.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fuchsian::{GroupKind, GroupPresentation};
use crate::halfplane::{
    cayley_derivative, moebius_act, to_disk_point, DiskMoebius, Moebius, Point, UnitTangent,
};

/// Degree of the Taylor model around the disk origin.
pub const TAYLOR_DEGREE: usize = 320;
const DEDUP_TOL: f64 = 1e-10;
const MAX_REDUCTION_STEPS: usize = 10_000;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
struct Term {
    g: DiskMoebius,
    len: usize,
}

#[derive(Debug, Clone, PartialEq)]
struct Reduced {
    pairings: Vec<DiskMoebius>,
    coeffs: Vec<Complex64>,
}

impl Reduced {
    /// Moves `w` into the Dirichlet domain at 0 and returns the image with the
    /// derivative of the accumulated map.
    fn reduce(&self, mut w: Complex64) -> (Complex64, Complex64) {
        let mut deriv = ONE;
        for _ in 0..MAX_REDUCTION_STEPS {
            let r = w.norm_sqr();
            let mut best: Option<(f64, &DiskMoebius)> = None;
            for h in &self.pairings {
                let hw = h.act(w).norm_sqr();
                if hw < r * (1.0 - 1e-14) && best.is_none_or(|(b, _)| hw < b) {
                    best = Some((hw, h));
                }
            }
            match best {
                Some((_, h)) => {
                    deriv *= h.derivative(w);
                    w = h.act(w);
                }
                None => break,
            }
        }
        (w, deriv)
    }

    fn horner(&self, w: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * w + c)
    }
}

/// `ω = φ(z) dz^q` on the half-plane, invariant under a Fuchsian group.
#[derive(Debug, Clone, PartialEq)]
pub struct QDifferential {
    q: u32,
    seed_degree: u32,
    depth: usize,
    scale: Complex64,
    terms: Vec<Term>,
    reduced: Option<Reduced>,
}

fn term_value(g: &DiskMoebius, w: Complex64, m: u32, q: u32) -> Complex64 {
    let den = (g.beta.conj() * w + g.alpha.conj()).inv();
    let mut v = den.powu(2 * q);
    if m > 0 {
        v *= ((g.alpha * w + g.beta) * den).powu(m);
    }
    v
}

/// Taylor coefficients at 0 of `(αw + β)^m (β̄w + ᾱ)^{−(m+2q)}`, accumulated into `out`.
fn add_taylor(g: &DiskMoebius, m: u32, q: u32, out: &mut [Complex64]) {
    let s = (m + 2 * q) as f64;
    let abar = g.alpha.conj();
    let r = g.beta.conj() / abar;
    let lead = abar.powi(-((m + 2 * q) as i32));
    let mut poly = vec![ZERO; m as usize + 1];
    let mut binom = 1.0;
    for (j, p) in poly.iter_mut().enumerate() {
        *p = g.alpha.powu(j as u32) * g.beta.powu(m - j as u32) * binom;
        binom *= (m as f64 - j as f64) / (j as f64 + 1.0);
    }
    let mut c = lead;
    for k in 0..out.len() {
        for (j, p) in poly.iter().enumerate() {
            if k + j < out.len() {
                out[k + j] += c * p;
            }
        }
        c *= r * (-(s + k as f64) / (k as f64 + 1.0));
    }
}

fn canonical(g: DiskMoebius) -> DiskMoebius {
    if g.alpha.re < 0.0 || (g.alpha.re == 0.0 && g.alpha.im < 0.0) {
        DiskMoebius {
            alpha: -g.alpha,
            beta: -g.beta,
        }
    } else {
        g
    }
}

fn enumerate_terms(grp: &GroupPresentation, depth: usize) -> Vec<Term> {
    let rank = grp.rank() as i32;
    let letters: Vec<(i32, DiskMoebius)> = (1..=rank)
        .flat_map(|k| [k, -k])
        .map(|l| (l, grp.letter(l).expect("letter in range").to_disk()))
        .collect();
    let mut out = vec![Term {
        g: Moebius::identity().to_disk(),
        len: 0,
    }];
    let mut stack: Vec<(DiskMoebius, i32, usize)> = vec![(Moebius::identity().to_disk(), 0, 0)];
    while let Some((g, last, len)) = stack.pop() {
        if len == depth {
            continue;
        }
        for &(l, h) in &letters {
            if l == -last {
                continue;
            }
            let gh = g.compose(&h);
            out.push(Term {
                g: canonical(gh),
                len: len + 1,
            });
            stack.push((gh, l, len + 1));
        }
    }
    out
}

/// Drops repeated group elements, keeping the shortest word for each.
fn dedup_terms(mut terms: Vec<Term>) -> Vec<Term> {
    terms.sort_by(|a, b| {
        a.g.alpha
            .re
            .partial_cmp(&b.g.alpha.re)
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut keep = vec![true; terms.len()];
    for i in 0..terms.len() {
        if !keep[i] {
            continue;
        }
        let gi = terms[i].g;
        let tol = DEDUP_TOL * gi.alpha.norm();
        for j in (i + 1)..terms.len() {
            let gj = terms[j].g;
            if gj.alpha.re - gi.alpha.re > tol {
                break;
            }
            if keep[j] && (gj.alpha - gi.alpha).norm() <= tol && (gj.beta - gi.beta).norm() <= tol {
                if terms[j].len < terms[i].len {
                    terms[i].len = terms[j].len;
                }
                keep[j] = false;
            }
        }
    }
    let mut out: Vec<Term> = terms
        .into_iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(t, _)| t)
        .collect();
    out.sort_by_key(|t| t.len);
    out
}

/// The Poincaré series of `w^m` in weight `q` over elements of word length at most `depth`.
pub fn poincare_qdiff(
    grp: &GroupPresentation,
    q: u32,
    seed_degree: u32,
    depth: usize,
) -> Result<QDifferential> {
    if q < 2 {
        return Err(Error::InvalidParameter(alloc::format!(
            "weight q must be at least 2, got {q}"
        )));
    }
    let cocompact = grp.kind() == GroupKind::Genus2Cocompact;
    let mut terms = enumerate_terms(grp, depth);
    if cocompact {
        terms = dedup_terms(terms);
    }
    let reduced = if cocompact {
        let mut coeffs = vec![ZERO; TAYLOR_DEGREE + 1];
        for t in &terms {
            add_taylor(&t.g, seed_degree, q, &mut coeffs);
        }
        let pairings = (1..=grp.rank() as i32)
            .flat_map(|k| [k, -k])
            .map(|l| grp.letter(l).expect("letter in range").to_disk())
            .collect();
        Some(Reduced { pairings, coeffs })
    } else {
        None
    };
    let omega = QDifferential {
        q,
        seed_degree,
        depth,
        scale: ONE,
        terms,
        reduced,
    };
    if depth >= 2 {
        let z = Point::i();
        let worst = |d: usize| {
            grp.generators()
                .iter()
                .map(|g| omega.equivariance_residual_at_depth(g, z, d))
                .fold(0.0, f64::max)
        };
        // Odd and even depths interleave around the surface relation, so
        // compare two levels apart.
        let previous = worst(depth - 2);
        let current = worst(depth);
        if current > previous * (1.0 + 1e-9) && current > 1e-14 {
            return Err(Error::Divergence { previous, current });
        }
    }
    Ok(omega)
}

impl QDifferential {
    /// The zero differential of weight `q`.
    pub fn zero(q: u32) -> Self {
        QDifferential {
            q,
            seed_degree: 0,
            depth: 0,
            scale: ZERO,
            terms: Vec::new(),
            reduced: None,
        }
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn seed_degree(&self) -> u32 {
        self.seed_degree
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Number of distinct group elements in the sum.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.scale == ZERO
    }

    /// True when evaluation goes through the reduced Taylor model.
    pub fn is_automorphic(&self) -> bool {
        self.reduced.is_some()
    }

    /// `c · ω`.
    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.scale *= c;
        out
    }

    fn direct_disk_at_depth(&self, w: Complex64, depth: usize) -> Complex64 {
        if self.is_zero() {
            return ZERO;
        }
        let s: Complex64 = self
            .terms
            .iter()
            .take_while(|t| t.len <= depth)
            .map(|t| term_value(&t.g, w, self.seed_degree, self.q))
            .sum();
        s * self.scale
    }

    /// Disk coefficient by summing the series term by term.
    pub fn eval_disk_direct(&self, w: Complex64) -> Complex64 {
        self.direct_disk_at_depth(w, self.depth)
    }

    /// Disk coefficient; automorphic when a reduced model is present.
    pub fn eval_disk(&self, w: Complex64) -> Complex64 {
        if self.is_zero() {
            return ZERO;
        }
        match &self.reduced {
            Some(red) => {
                let (w0, d) = red.reduce(w);
                red.horner(w0) * d.powu(self.q) * self.scale
            }
            None => self.eval_disk_direct(w),
        }
    }

    /// Half-plane coefficient `φ(z)` of `ω = φ(z) dz^q`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.eval_disk(to_disk_point(z)) * cayley_derivative(z).powu(self.q)
    }

    /// Half-plane coefficient of the truncated sum itself.
    pub fn eval_direct(&self, z: Complex64) -> Complex64 {
        self.eval_disk_direct(to_disk_point(z)) * cayley_derivative(z).powu(self.q)
    }

    fn eval_direct_at_depth(&self, z: Complex64, depth: usize) -> Complex64 {
        self.direct_disk_at_depth(to_disk_point(z), depth) * cayley_derivative(z).powu(self.q)
    }

    /// `|φ(gz) g'(z)^q − φ(z)|` for the truncated sum.
    pub fn equivariance_residual(&self, g: &Moebius, z: Point) -> f64 {
        self.equivariance_residual_at_depth(g, z, self.depth)
    }

    /// [`QDifferential::equivariance_residual`] for the sum cut at a smaller depth.
    pub fn equivariance_residual_at_depth(&self, g: &Moebius, z: Point, depth: usize) -> f64 {
        let gz = moebius_act(g, z).z();
        let lhs = self.eval_direct_at_depth(gz, depth) * g.derivative(z.z()).powu(self.q);
        (lhs - self.eval_direct_at_depth(z.z(), depth)).norm()
    }

    /// `|∂φ/∂z̄|` by central differences of step `h`.
    pub fn cauchy_riemann_residual(&self, z: Point, h: f64) -> f64 {
        let z = z.z();
        let dx = (self.eval(z + h) - self.eval(z - h)) / (2.0 * h);
        let dy = (self.eval(z + Complex64::new(0.0, h)) - self.eval(z - Complex64::new(0.0, h)))
            / (2.0 * h);
        (0.5 * (dx + Complex64::new(0.0, 1.0) * dy)).norm()
    }

    /// `ω(u ⊗ … ⊗ u) = φ(z) (dir · Im z)^q`.
    pub fn pairing(&self, u: &UnitTangent) -> Complex64 {
        self.eval(u.base().z()) * u.vector().powu(self.q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuchsian::{genus2_group, schottky_group};
    use crate::halfplane::from_disk_point;

    #[test]
    fn trivial_group_gives_seed_monomial() {
        let grp = schottky_group(4.0, 1.0).unwrap();
        let one = poincare_qdiff(&grp, 2, 0, 0).unwrap();
        let cube = poincare_qdiff(&grp, 3, 3, 0).unwrap();
        for w in [Complex64::new(0.1, 0.2), Complex64::new(-0.5, 0.3)] {
            assert!((one.eval_disk(w) - 1.0).norm() < 1e-15);
            assert!((cube.eval_disk(w) - w.powu(3)).norm() < 1e-15);
        }
    }

    #[test]
    fn genus2_residual_shrinks_from_depth_four_to_six() {
        let grp = genus2_group();
        let om = poincare_qdiff(&grp, 2, 0, 6).unwrap();
        for g in grp.generators() {
            let r4 = om.equivariance_residual_at_depth(g, Point::i(), 4);
            let r6 = om.equivariance_residual(g, Point::i());
            assert!(r6 * 2.0 <= r4, "{r4} {r6}");
        }
    }

    #[test]
    fn schottky_residual_at_depth_eight() {
        let grp = schottky_group(4.0, 1.0).unwrap();
        let om = poincare_qdiff(&grp, 2, 0, 8).unwrap();
        for z in [
            Point::i(),
            Point::from_xy(0.4, 1.3).unwrap(),
            Point::from_xy(-0.3, 0.8).unwrap(),
        ] {
            for g in grp.generators() {
                assert!(om.equivariance_residual(g, z) <= 1e-3);
            }
        }
    }

    #[test]
    fn holomorphic_at_sample_points() {
        let om = poincare_qdiff(&genus2_group(), 2, 0, 4).unwrap();
        for z in [
            Point::i(),
            Point::from_xy(0.2, 0.7).unwrap(),
            Point::from_xy(-1.5, 2.0).unwrap(),
        ] {
            assert!(om.cauchy_riemann_residual(z, 1e-4) <= 1e-5);
        }
    }

    #[test]
    fn weight_below_two_is_rejected() {
        let grp = genus2_group();
        assert!(poincare_qdiff(&grp, 1, 0, 2).is_err());
    }

    #[test]
    fn genus2_dedup_and_taylor_model() {
        let grp = genus2_group();
        let om = poincare_qdiff(&grp, 2, 2, 4).unwrap();
        assert!(om.term_count() < 1 + 8 * (7usize.pow(4) - 1) / 6);
        for w in [
            Complex64::new(0.0, 0.0),
            Complex64::new(0.3, -0.2),
            Complex64::new(-0.45, 0.4),
        ] {
            let a = om.eval_disk(w);
            let b = om.eval_disk_direct(w);
            assert!((a - b).norm() <= 1e-10 * b.norm().max(1.0), "{a} {b}");
        }
    }

    #[test]
    fn reduced_evaluator_is_automorphic() {
        let grp = genus2_group();
        let om = poincare_qdiff(&grp, 2, 2, 3).unwrap();
        let z = from_disk_point(Complex64::new(0.2, 0.1));
        for g in grp.generators() {
            let gz = g.act_complex(z);
            let lhs = om.eval(gz) * g.derivative(z).powu(2);
            assert!((lhs - om.eval(z)).norm() < 1e-10 * om.eval(z).norm());
        }
    }
}
