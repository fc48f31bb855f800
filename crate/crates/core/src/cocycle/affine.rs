//! The affine connection `∇^α`, its holonomy, parallel sections along
//! geodesics and the integral formula for the Margulis invariant.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::form::{closedness_residual, BundleForm};
use crate::error::{Error, Result};
use crate::flatbundle::{
    connection_matrix, fibre_action, holonomy_rep, parallel_transport, Path, PathTransport,
    SectionCoords,
};
use crate::fuchsian::{evaluate, GroupPresentation, Word};
use crate::halfplane::{
    axis_data, distance, frame_cocycle, moebius_act, Curve, Geodesic, Moebius, Point,
};
use crate::margulis::{AffineIsometry, LinearModel};
use crate::symrep::InvariantForm;

/// Closedness threshold checked at the base point before computing holonomy.
pub const CLOSEDNESS_TOL: f64 = 1e-4;
/// Difference step of that check.
pub const CLOSEDNESS_STEP: f64 = 1e-3;
/// Simpson nodes per unit length on closed geodesics.
pub const NODES_PER_UNIT: usize = 1000;

/// Transport of the affine bundle: the `(2n+2)`-square matrix acting on
/// `(λ, V)` along the path, solving `λ' = 0`, `V' = −Ω(ż)V − λ α(ż)`.
pub fn affine_transport_matrix<A: BundleForm + ?Sized>(
    alpha: &A,
    pt: &PathTransport,
) -> Result<DMatrix<f64>> {
    let n = alpha.n();
    let dim = 2 * n + 2;
    pt.integrate(DMatrix::identity(dim, dim), |z, zdot| {
        affine_field(alpha, n, z, zdot)
    })
}

fn affine_field<A: BundleForm + ?Sized>(
    alpha: &A,
    n: usize,
    z: Complex64,
    zdot: Complex64,
) -> DMatrix<f64> {
    let dim = 2 * n + 2;
    let mut m = DMatrix::zeros(dim, dim);
    let a = alpha.value(z, zdot);
    let om = connection_matrix(n, zdot / z.im);
    for i in 0..dim - 1 {
        m[(i + 1, 0)] = -a[i];
        for j in 0..dim - 1 {
            m[(i + 1, j + 1)] = -om[(i, j)];
        }
    }
    m
}

/// Transports `(λ, V)` along the path with `∇^α`.
pub fn affine_transport<A: BundleForm + ?Sized>(
    alpha: &A,
    pt: &PathTransport,
    lambda: f64,
    v: &SectionCoords,
) -> Result<(f64, SectionCoords)> {
    let n = alpha.n();
    if v.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: v.n(),
        });
    }
    let dim = 2 * n + 2;
    let mut init = DMatrix::zeros(dim, 1);
    init[0] = lambda;
    for (i, x) in v.to_real().iter().enumerate() {
        init[i + 1] = *x;
    }
    let out = pt.integrate(init, |z, zdot| affine_field(alpha, n, z, zdot))?;
    let rest = DVector::from_iterator(dim - 1, out.iter().skip(1).copied());
    Ok((out[0], SectionCoords::from_real(&rest)))
}

/// Affine holonomy of `γ`: act by `γ` on the fibre over `x₀`, then transport
/// back from `γx₀` with `∇^α`. The linear part matches [`holonomy_rep`].
pub fn affine_holonomy<A: BundleForm + ?Sized>(
    word: &Word,
    grp: &GroupPresentation,
    alpha: &A,
    basepoint: Point,
    step: f64,
) -> Result<AffineIsometry> {
    let residual = closedness_residual(alpha, basepoint, CLOSEDNESS_STEP);
    if !(residual <= CLOSEDNESS_TOL) {
        return Err(Error::NotClosed { residual });
    }
    let n = alpha.n();
    let g = evaluate(word, grp)?;
    affine_holonomy_of(&g, n, alpha, basepoint, step)
}

fn affine_holonomy_of<A: BundleForm + ?Sized>(
    g: &Moebius,
    n: usize,
    alpha: &A,
    basepoint: Point,
    step: f64,
) -> Result<AffineIsometry> {
    let dim = 2 * n + 1;
    let act = fibre_action(n, frame_cocycle(g, basepoint));
    let gx = moebius_act(g, basepoint);
    if distance(gx, basepoint) == 0.0 {
        return Ok(AffineIsometry::from_parts(act, DVector::zeros(dim)));
    }
    let pt = PathTransport::new(Path::polygon(&[gx, basepoint])?, step)?;
    let t = affine_transport_matrix(alpha, &pt)?;
    let p = t.view((1, 1), (dim, dim)).into_owned();
    let tau = DVector::from_iterator(dim, t.view((1, 0), (dim, 1)).iter().copied());
    Ok(AffineIsometry::from_parts(p * act, tau))
}

/// Coefficients `b_k`, `k = 0..=p`, of the parallel section along a geodesic
/// for `n = 2p + 1`: `b₀ = 1`, `b_k = −4 (n−2k+1)/(n+2k+1) b_{k−1}`.
pub fn neutral_coefficients(n: usize) -> Result<Vec<f64>> {
    if n.is_multiple_of(2) {
        return Err(Error::EvenRank { n });
    }
    let p = (n - 1) / 2;
    let nf = n as f64;
    let mut b = vec![1.0];
    for k in 1..=p {
        let kf = k as f64;
        b.push(-4.0 * (nf - 2.0 * kf + 1.0) / (nf + 2.0 * kf + 1.0) * b[k - 1]);
    }
    Ok(b)
}

/// The alternative product `(−4)^k Π_{l=1}^{k} (p−l)/(p+l+1)`, which vanishes
/// at `k = p`. Kept so the transport check can reject it.
pub fn product_coefficients(n: usize) -> Result<Vec<f64>> {
    if n.is_multiple_of(2) {
        return Err(Error::EvenRank { n });
    }
    let p = (n - 1) / 2;
    let pf = p as f64;
    let mut b = vec![1.0];
    for k in 1..=p {
        let l = k as f64;
        b.push(-4.0 * (pf - l) / (pf + l + 1.0) * b[k - 1]);
    }
    Ok(b)
}

/// A section along a geodesic with constant coordinates in the frame that
/// follows `ċ`: slot `j` in the standard frame is `w_j ẋ^j`, `ẋ` the unit frame
/// coordinate of `ċ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicSection {
    pub curve: Geodesic,
    /// Slots `0..=n` in the `ċ`-frame; slot 0 is real.
    pub w: Vec<Complex64>,
    norm_sq: f64,
}

impl GeodesicSection {
    pub fn new(curve: Geodesic, w: Vec<Complex64>) -> Self {
        let s = SectionCoords::new(w[0].re, w[1..].to_vec());
        let norm_sq = crate::flatbundle::bundle_metric(&s, &s).expect("same rank");
        GeodesicSection { curve, w, norm_sq }
    }

    pub fn n(&self) -> usize {
        self.w.len() - 1
    }

    /// `⌊w, w⌋`, constant along the curve.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// The section at parameter `t`, in the standard frame.
    pub fn raw_at(&self, t: f64) -> SectionCoords {
        let x = self.curve.frame_velocity(t);
        let mut p = Complex64::new(1.0, 0.0);
        let mut ck = Vec::with_capacity(self.n());
        for wj in &self.w[1..] {
            p *= x;
            ck.push(wj * p);
        }
        SectionCoords::new(self.w[0].re, ck)
    }

    /// `w / √|⌊w, w⌋|` at parameter `t`.
    pub fn at(&self, t: f64) -> SectionCoords {
        let s = self.norm_sq.abs().sqrt().recip();
        let r = self.raw_at(t);
        SectionCoords::new(r.c0 * s, r.ck.iter().map(|c| c * s).collect())
    }
}

/// `w_c` for odd `n`: odd slots `i b_k` in the `ċ`-frame, even slots zero.
pub fn neutral_section(c: &Geodesic, n: usize) -> Result<GeodesicSection> {
    let b = neutral_coefficients(n)?;
    Ok(odd_section(c, n, &b))
}

/// The same shape of section with arbitrary coefficients `b_k`.
pub fn odd_section(c: &Geodesic, n: usize, b: &[f64]) -> GeodesicSection {
    let mut w = vec![Complex64::new(0.0, 0.0); n + 1];
    for (k, bk) in b.iter().enumerate() {
        if 2 * k < n {
            w[2 * k + 1] = Complex64::new(0.0, *bk);
        }
    }
    GeodesicSection::new(*c, w)
}

/// For even `n` the parallel section along a geodesic lives on the even slots:
/// real `c_j` with `c₀ = 1`, `c_j = −4 (n−2j+2)/(n+2j) c_{j−1}`. It is timelike.
pub fn even_section(c: &Geodesic, n: usize) -> Result<GeodesicSection> {
    if n % 2 == 1 {
        return Err(Error::InvalidParameter(alloc::format!(
            "even section needs even n, got {n}"
        )));
    }
    let nf = n as f64;
    let mut w = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut cj = 1.0;
    w[0] = Complex64::new(1.0, 0.0);
    for j in 1..=n / 2 {
        let jf = j as f64;
        cj *= -4.0 * (nf - 2.0 * jf + 2.0) / (nf + 2.0 * jf);
        w[2 * j] = Complex64::new(cj, 0.0);
    }
    Ok(GeodesicSection::new(*c, w))
}

/// The parallel section along `c` for any `n`.
pub fn parallel_section(c: &Geodesic, n: usize) -> Result<GeodesicSection> {
    if n % 2 == 1 {
        neutral_section(c, n)
    } else {
        even_section(c, n)
    }
}

/// Largest coordinate drift between the section transported from `t = 0` to
/// `t = length` and its formula value there.
pub fn section_drift(s: &GeodesicSection, length: f64, step: f64) -> Result<f64> {
    let c = s.curve.shifted(0.0, length);
    let pt = PathTransport::new(
        Path::new(vec![crate::flatbundle::Segment::Geodesic(c)]),
        step,
    )?;
    let moved = parallel_transport(s.n(), &pt, &s.raw_at(0.0))?;
    Ok((moved.to_real() - s.raw_at(length).to_real()).amax())
}

/// The flat bundle as a linear model: holonomy over a base point, with the
/// geodesic reference given by the parallel section along the axis carried
/// to the base point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BundleModel {
    pub n: usize,
    pub basepoint: Point,
    pub step: f64,
}

impl LinearModel for BundleModel {
    fn form(&self) -> InvariantForm {
        InvariantForm::bundle(self.n)
    }

    fn linear(&self, g: &Moebius) -> Result<DMatrix<f64>> {
        Ok(holonomy_rep(g, self.n, self.basepoint, self.step)?.matrix)
    }

    fn geodesic_reference(&self, g: &Moebius) -> Result<DVector<f64>> {
        let axis = axis_data(g)?.axis;
        let s = parallel_section(&axis, self.n)?;
        let start = axis.start();
        let v = s.at(0.0);
        if distance(start, self.basepoint) == 0.0 {
            return Ok(v.to_real());
        }
        let pt = PathTransport::new(Path::polygon(&[start, self.basepoint])?, self.step)?;
        Ok(parallel_transport(self.n, &pt, &v)?.to_real())
    }
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, nodes: usize) -> f64 {
    let m = (nodes.max(2) + 1) & !1;
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Composite Simpson rule over one period of the oriented axis of `γ`,
/// starting `s0` along it, with `nodes_per_unit` nodes per unit length.
pub fn integrate_over_axis<F: Fn(&Geodesic, f64) -> f64>(
    word: &Word,
    grp: &GroupPresentation,
    s0: f64,
    nodes_per_unit: usize,
    f: F,
) -> Result<(Geodesic, f64)> {
    let g = evaluate(word, grp)?;
    let data = axis_data(&g)?;
    let len = data.translation_length;
    let c = data.axis.shifted(s0, len);
    let nodes = ((len * nodes_per_unit as f64).ceil() as usize).max(2);
    let value = simpson(|t| f(&c, t), 0.0, len, nodes);
    Ok((c, value))
}

/// `∫_c ⌊α(ċ), v_c⌋` over one period of the axis of `γ`, starting `s0` along it.
pub fn margulis_via_integral<A: BundleForm + ?Sized>(
    word: &Word,
    grp: &GroupPresentation,
    alpha: &A,
    s0: f64,
    nodes_per_unit: usize,
) -> Result<f64> {
    let n = alpha.n();
    let form = InvariantForm::bundle(n);
    let g = evaluate(word, grp)?;
    let axis = axis_data(&g)?.axis.shifted(s0, 0.0);
    let section = parallel_section(&axis, n)?;
    let (_, value) = integrate_over_axis(word, grp, s0, nodes_per_unit, |c, t| {
        let a = alpha.value(c.point(t), c.velocity(t));
        form.pair(&a, &section.at(t).to_real())
    })?;
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{phi_map, poincare_qdiff, ZeroForm};
    use crate::fuchsian::{genus2_group, random_reduced_word};
    use crate::halfplane::UnitTangent;
    use crate::margulis::{margulis_invariant, AffineGenerators, Convention};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn some_geodesic() -> Geodesic {
        let u = UnitTangent::from_angle(Point::from_xy(0.3, 1.7).unwrap(), 0.8);
        Geodesic::from_unit_tangent(&u, 1.0)
    }

    #[test]
    fn dimension_three_section_is_i() {
        let s = neutral_section(&some_geodesic(), 1).unwrap();
        assert_eq!(s.w[1], Complex64::new(0.0, 1.0));
        assert!((s.norm_sq() - 1.0).abs() < 1e-15);
        assert_eq!(s.at(0.3), s.raw_at(0.3));
    }

    #[test]
    fn dimension_seven_coefficient() {
        let b = neutral_coefficients(3).unwrap();
        assert!((b[1] + 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(product_coefficients(3).unwrap()[1], 0.0);
        assert!(matches!(
            neutral_coefficients(2),
            Err(Error::EvenRank { n: 2 })
        ));
    }

    #[test]
    fn sections_are_parallel_and_spacelike() {
        let c = some_geodesic();
        for n in [1, 3, 5] {
            let s = neutral_section(&c, n).unwrap();
            assert!(s.norm_sq() > 0.0);
            assert!(section_drift(&s, 1.0, 1e-3).unwrap() <= 1e-8);
        }
        for n in [3, 5] {
            let b = product_coefficients(n).unwrap();
            let s = odd_section(&c, n, &b);
            assert!(section_drift(&s, 1.0, 1e-3).unwrap() > 1e-3);
        }
        for n in [2, 4] {
            let s = even_section(&c, n).unwrap();
            assert!(s.norm_sq() < 0.0);
            assert!(section_drift(&s, 1.0, 1e-3).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn zero_form_gives_linear_holonomy() {
        let grp = genus2_group();
        let w = Word::new([1, 2]);
        let h = affine_holonomy(&w, &grp, &ZeroForm { n: 2 }, Point::i(), 1e-3).unwrap();
        let lin = holonomy_rep(&evaluate(&w, &grp).unwrap(), 2, Point::i(), 1e-3).unwrap();
        assert!(h.translation.norm() == 0.0);
        assert!((&h.linear - &lin.matrix).norm() < 1e-14 * lin.matrix.norm());
        let s = SectionCoords::new(
            0.3,
            vec![Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.1)],
        );
        let pt = PathTransport::new(
            Path::polygon(&[Point::i(), Point::from_xy(1.0, 2.0).unwrap()]).unwrap(),
            1e-3,
        )
        .unwrap();
        let (lam, v) = affine_transport(&ZeroForm { n: 2 }, &pt, 2.5, &s).unwrap();
        assert_eq!(lam, 2.5);
        let p = parallel_transport(2, &pt, &s).unwrap();
        assert!((v.to_real() - p.to_real()).norm() < 1e-12);
        assert_eq!(
            margulis_via_integral(&w, &grp, &ZeroForm { n: 1 }, 0.0, 100).unwrap(),
            0.0
        );
    }

    #[test]
    fn holonomy_is_affine_homomorphism() {
        let grp = genus2_group();
        let om = poincare_qdiff(&grp, 2, 0, 4).unwrap();
        let a = phi_map(&om, 1).unwrap();
        let x0 = Point::i();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let gens: Vec<DVector<f64>> = (1..=4)
            .map(|k| {
                affine_holonomy(&Word::generator(k), &grp, &a, x0, 1e-3)
                    .unwrap()
                    .translation
            })
            .collect();
        let model = BundleModel {
            n: 1,
            basepoint: x0,
            step: 1e-3,
        };
        let ext = AffineGenerators::new(&grp, &model, &gens).unwrap();
        for _ in 0..3 {
            let u = random_reduced_word(&mut rng, 4, 2);
            let v = random_reduced_word(&mut rng, 4, 2);
            let hu = affine_holonomy(&u, &grp, &a, x0, 1e-3).unwrap();
            let hv = affine_holonomy(&v, &grp, &a, x0, 1e-3).unwrap();
            let huv = affine_holonomy(&u.concat(&v), &grp, &a, x0, 1e-3).unwrap();
            let prod = hu.compose(&hv);
            let scale = huv.translation.norm().max(1.0);
            assert!((prod.translation - &huv.translation).norm() <= 1e-5 * scale);
            let e = ext.extend(&u.concat(&v)).unwrap();
            assert!((e.translation - &huv.translation).norm() <= 1e-5 * scale);
        }
    }

    #[test]
    fn integral_formula_matches_holonomy() {
        let grp = genus2_group();
        let om = poincare_qdiff(&grp, 2, 0, 4).unwrap();
        let a = phi_map(&om, 1).unwrap();
        let x0 = Point::i();
        let model = BundleModel {
            n: 1,
            basepoint: x0,
            step: 1e-3,
        };
        let form = model.form();
        for w in [Word::new([1]), Word::new([2, 3])] {
            let g = evaluate(&w, &grp).unwrap();
            let h = affine_holonomy(&w, &grp, &a, x0, 1e-3).unwrap();
            let conv = Convention::FuchsianGeodesic(model.geodesic_reference(&g).unwrap());
            let direct = margulis_invariant(&h, &form, &conv).unwrap();
            let integral = margulis_via_integral(&w, &grp, &a, 0.0, NODES_PER_UNIT).unwrap();
            let shifted = margulis_via_integral(&w, &grp, &a, 0.7, NODES_PER_UNIT).unwrap();
            assert!((direct - integral).abs() <= 1e-3, "{direct} {integral}");
            assert!((shifted - integral).abs() <= 1e-6, "{shifted} {integral}");
        }
    }
}
