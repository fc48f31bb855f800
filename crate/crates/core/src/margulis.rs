//! Loxodromic spectra in the isometry group of an indefinite form, neutral
//! vectors, Margulis invariants of affine isometries, general position of
//! eigenspace decompositions, and the opposite-sign obstruction scan.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fuchsian::{evaluate, GroupPresentation, Word};
use crate::halfplane::Moebius;
use crate::symrep::{geodesic_reference, sym_power_matrix, InvariantForm};

/// Relative tolerance for detecting the eigenvalue 1.
pub const NEUTRAL_TOL: f64 = 1e-8;
/// Relative gap below which two eigenvalues count as repeated.
pub const SIMPLICITY_GAP: f64 = 1e-6;
/// Relative imaginary part above which an eigenvalue counts as complex.
pub const REALITY_TOL: f64 = 1e-8;
/// Singular-value threshold for the general-position rank test.
pub const GENERAL_POSITION_TOL: f64 = 1e-8;

/// `x ↦ Ax + t` with `A` preserving a fixed form.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineIsometry {
    pub linear: DMatrix<f64>,
    pub translation: DVector<f64>,
}

impl AffineIsometry {
    /// Checks dimensions and form preservation (relative residual ≤ 1e−8).
    pub fn new(
        linear: DMatrix<f64>,
        translation: DVector<f64>,
        form: &InvariantForm,
    ) -> Result<Self> {
        let dim = form.dim();
        for found in [linear.nrows(), linear.ncols(), translation.len()] {
            if found != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found,
                });
            }
        }
        let residual = form.preservation_residual(&linear);
        if residual > 1e-8 {
            return Err(Error::FormNotPreserved { residual });
        }
        Ok(AffineIsometry {
            linear,
            translation,
        })
    }

    /// Builds without validation.
    pub fn from_parts(linear: DMatrix<f64>, translation: DVector<f64>) -> Self {
        AffineIsometry {
            linear,
            translation,
        }
    }

    pub fn identity(dim: usize) -> Self {
        AffineIsometry {
            linear: DMatrix::identity(dim, dim),
            translation: DVector::zeros(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.linear * x + &self.translation
    }

    /// `(A₁, t₁)∘(A₂, t₂) = (A₁A₂, t₁ + A₁t₂)`.
    pub fn compose(&self, rhs: &AffineIsometry) -> AffineIsometry {
        AffineIsometry {
            linear: &self.linear * &rhs.linear,
            translation: &self.translation + &self.linear * &rhs.translation,
        }
    }

    /// Inverse using the form to invert the linear part.
    pub fn inverse(&self, form: &InvariantForm) -> AffineIsometry {
        let inv = form.isometry_inverse(&self.linear);
        let t = -(&inv * &self.translation);
        AffineIsometry {
            linear: inv,
            translation: t,
        }
    }

    pub fn pow(&self, k: u32) -> AffineIsometry {
        let mut out = AffineIsometry::identity(self.dim());
        for _ in 0..k {
            out = out.compose(self);
        }
        out
    }
}

/// Real simple spectrum of a loxodromic isometry.
#[derive(Debug, Clone, PartialEq)]
pub struct LoxodromicData {
    /// Strictly increasing.
    pub eigenvalues: Vec<f64>,
    /// Unit Euclidean norm, one per eigenvalue.
    pub eigenvectors: Vec<DVector<f64>>,
    pub neutral_index: usize,
    /// `max |⌊e, e⌋| / ‖e‖²` over the non-neutral eigenvectors.
    pub null_residual: f64,
}

impl LoxodromicData {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn neutral(&self) -> &DVector<f64> {
        &self.eigenvectors[self.neutral_index]
    }

    /// Eigenvectors for eigenvalues of modulus `> 1`.
    pub fn expanding(&self) -> Vec<&DVector<f64>> {
        self.select(|l| l.abs() > 1.0)
    }

    /// Eigenvectors for eigenvalues of modulus `< 1`.
    pub fn contracting(&self) -> Vec<&DVector<f64>> {
        self.select(|l| l.abs() < 1.0)
    }

    fn select(&self, keep: impl Fn(f64) -> bool) -> Vec<&DVector<f64>> {
        self.eigenvalues
            .iter()
            .zip(&self.eigenvectors)
            .enumerate()
            .filter(|(i, (l, _))| *i != self.neutral_index && keep(**l))
            .map(|(_, (_, v))| v)
            .collect()
    }
}

fn moduli_desc(m: &DMatrix<f64>) -> Result<(Vec<f64>, f64)> {
    let eig = m.clone().schur().complex_eigenvalues();
    let rho = eig.iter().fold(0.0f64, |r, z| r.max(z.norm()));
    let mut out = Vec::with_capacity(eig.len());
    for z in eig.iter() {
        if z.im.abs() > REALITY_TOL * rho.max(1.0) {
            return Err(Error::NotLoxodromic(format!(
                "complex eigenvalue {} + {}i",
                z.re, z.im
            )));
        }
        out.push(z.re);
    }
    out.sort_by(|a, b| {
        b.abs()
            .partial_cmp(&a.abs())
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    Ok((out, rho))
}

/// Unit vector spanning the (approximate) kernel of `m`.
fn null_vector(m: &DMatrix<f64>) -> DVector<f64> {
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("requested");
    let (idx, _) =
        svd.singular_values
            .iter()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) },
            );
    vt.row(idx).transpose().normalize()
}

/// Spectrum and eigenvectors of a form-preserving matrix with simple real
/// spectrum and one eigenvalue equal to 1.
///
/// Eigenvalues of modulus `> 1` come from `A`, those of modulus `< 1` as
/// reciprocals of the expanding eigenvalues of `A⁻¹ = G⁻¹AᵀG`, so both ends of
/// a wide spectrum keep relative accuracy. Eigenvectors are kernel vectors of
/// `A − λ` or `A⁻¹ − λ⁻¹`, whichever is expanding.
pub fn loxodromic_data(a: &DMatrix<f64>, form: &InvariantForm) -> Result<LoxodromicData> {
    let dim = form.dim();
    if a.nrows() != dim || a.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: a.nrows(),
        });
    }
    let residual = form.preservation_residual(a);
    if residual > 1e-6 {
        return Err(Error::FormNotPreserved { residual });
    }
    if dim.is_multiple_of(2) {
        return Err(Error::NotLoxodromic(String::from(
            "even dimension has no neutral eigenvalue",
        )));
    }
    let half = dim / 2;
    let inv = form.isometry_inverse(a);
    let (top, rho) = moduli_desc(a)?;
    let (bottom, _) = moduli_desc(&inv)?;
    let mut eigenvalues: Vec<f64> = top[..half].to_vec();
    let middle = top[half];
    if (middle - 1.0).abs() > NEUTRAL_TOL * rho.max(1.0) {
        return Err(Error::NotLoxodromic(format!(
            "no eigenvalue near 1 (closest {middle})"
        )));
    }
    eigenvalues.push(1.0);
    eigenvalues.extend(bottom[..half].iter().map(|l| l.recip()));
    eigenvalues.sort_by(|x, y| x.partial_cmp(y).unwrap_or(core::cmp::Ordering::Equal));
    for w in eigenvalues.windows(2) {
        let scale = w[0].abs().max(w[1].abs());
        if (w[1] - w[0]).abs() <= SIMPLICITY_GAP * scale {
            return Err(Error::NotLoxodromic(format!(
                "repeated eigenvalue near {}",
                w[0]
            )));
        }
    }
    let id = DMatrix::<f64>::identity(dim, dim);
    let mut neutral_index = 0;
    let mut eigenvectors = Vec::with_capacity(dim);
    let mut null_residual: f64 = 0.0;
    for (i, &l) in eigenvalues.iter().enumerate() {
        let v = if l == 1.0 {
            neutral_index = i;
            null_vector(&(a - &id))
        } else if l.abs() > 1.0 {
            null_vector(&(a - &id * l))
        } else {
            null_vector(&(&inv - &id * l.recip()))
        };
        if l != 1.0 {
            null_residual = null_residual.max(form.pair(&v, &v).abs());
        }
        eigenvectors.push(v);
    }
    Ok(LoxodromicData {
        eigenvalues,
        eigenvectors,
        neutral_index,
        null_residual,
    })
}

/// How the sign of the neutral vector is fixed.
#[derive(Debug, Clone, PartialEq)]
pub enum Convention {
    /// Dimension 3 only: null eigenvectors are taken in the light-cone
    /// component of the timelike gram eigenvector, and `(v, e₁, e₂)` is
    /// positively oriented with eigenvalues increasing.
    LightCone3d,
    /// `v` is the normalised geodesic reference vector of the underlying
    /// element of SL(2,R), supplied by a [`LinearModel`].
    FuchsianGeodesic(DVector<f64>),
}

/// Selector for [`Convention`] in scans where the reference is computed per word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConventionKind {
    LightCone3d,
    FuchsianGeodesic,
}

/// The timelike direction of a form with a unique minority sign.
fn minority_axis(form: &InvariantForm) -> Result<DVector<f64>> {
    let (pos, neg) = form.sign_counts();
    let eig = form.gram.clone().symmetric_eigen();
    let want_positive = pos < neg;
    if pos.min(neg) != 1 {
        return Err(Error::ConventionInapplicable(format!(
            "light cone has a connected complement for sign counts ({pos}, {neg})"
        )));
    }
    let idx = eig
        .eigenvalues
        .iter()
        .position(|&x| (x > 0.0) == want_positive)
        .expect("minority sign present");
    let mut t: DVector<f64> = eig.eigenvectors.column(idx).into_owned();
    let big = t
        .iter()
        .enumerate()
        .fold(0, |b, (i, x)| if x.abs() > t[b].abs() { i } else { b });
    if t[big] < 0.0 {
        t = -t;
    }
    Ok(t)
}

fn normalise(v: &DVector<f64>, form: &InvariantForm) -> Result<DVector<f64>> {
    let q = form.pair(v, v);
    if q == 0.0 || !q.is_finite() {
        return Err(Error::NotLoxodromic(String::from("neutral vector is null")));
    }
    Ok(v / q.abs().sqrt())
}

/// Fixed vector of `A`, normalised to `|⌊v, v⌋| = 1`, sign fixed by the convention.
pub fn neutral_vector(
    a: &DMatrix<f64>,
    form: &InvariantForm,
    convention: &Convention,
) -> Result<DVector<f64>> {
    match convention {
        Convention::LightCone3d => {
            if form.dim() != 3 {
                return Err(Error::ConventionInapplicable(format!(
                    "light-cone convention needs dimension 3, found {}",
                    form.dim()
                )));
            }
            let t = minority_axis(form)?;
            let tt = form.pair(&t, &t);
            let data = loxodromic_data(a, form)?;
            let mut cols: Vec<DVector<f64>> = Vec::with_capacity(3);
            cols.push(normalise(data.neutral(), form)?);
            for (i, e) in data.eigenvectors.iter().enumerate() {
                if i == data.neutral_index {
                    continue;
                }
                let side = form.pair(e, &t) / tt;
                cols.push(if side < 0.0 { -e } else { e.clone() });
            }
            let m = DMatrix::from_columns(&cols);
            let v = cols[0].clone();
            Ok(if m.determinant() < 0.0 { -v } else { v })
        }
        Convention::FuchsianGeodesic(reference) => {
            if reference.len() != form.dim() {
                return Err(Error::DimensionMismatch {
                    expected: form.dim(),
                    found: reference.len(),
                });
            }
            let drift = (a * reference - reference).norm();
            let scale = a.norm().max(1.0) * reference.norm();
            if drift > 1e-7 * scale {
                return Err(Error::ConventionInapplicable(format!(
                    "reference vector is not fixed (relative drift {:.3e})",
                    drift / scale
                )));
            }
            normalise(reference, form)
        }
    }
}

/// `μ = ⌊t, v⌋`, the Margulis invariant evaluated at the origin.
pub fn margulis_invariant(
    phi: &AffineIsometry,
    form: &InvariantForm,
    convention: &Convention,
) -> Result<f64> {
    let v = neutral_vector(&phi.linear, form, convention)?;
    Ok(form.pair(&phi.translation, &v))
}

/// `⌊φ(x) − x, v⌋` at an arbitrary base point.
pub fn margulis_invariant_at(
    phi: &AffineIsometry,
    form: &InvariantForm,
    convention: &Convention,
    x: &DVector<f64>,
) -> Result<f64> {
    let v = neutral_vector(&phi.linear, form, convention)?;
    Ok(form.pair(&(phi.apply(x) - x), &v))
}

fn orthonormal_basis(vectors: &[&DVector<f64>]) -> DMatrix<f64> {
    let m = DMatrix::from_columns(&vectors.iter().map(|v| (*v).clone()).collect::<Vec<_>>());
    m.qr().q()
}

fn subspaces(d: &LoxodromicData) -> Vec<DMatrix<f64>> {
    let parts = [alloc::vec![d.neutral()], d.expanding(), d.contracting()];
    let mut out = Vec::new();
    for mask in 1u8..7 {
        let vs: Vec<&DVector<f64>> = (0..3)
            .filter(|b| mask & (1 << b) != 0)
            .flat_map(|b| parts[b].iter().copied())
            .collect();
        out.push(orthonormal_basis(&vs));
    }
    out
}

/// Smallest singular value that must be nonzero for every pair of subspace
/// sums to meet transversally. Positive and large means generic position.
pub fn general_position_margin(d1: &LoxodromicData, d2: &LoxodromicData) -> Result<f64> {
    if d1.dim() != d2.dim() {
        return Err(Error::DimensionMismatch {
            expected: d1.dim(),
            found: d2.dim(),
        });
    }
    let n = d1.dim();
    let mut margin = f64::INFINITY;
    for u in subspaces(d1) {
        for v in subspaces(d2) {
            let expect = (u.ncols() + v.ncols()).min(n);
            let joined = DMatrix::from_fn(n, u.ncols() + v.ncols(), |i, j| {
                if j < u.ncols() {
                    u[(i, j)]
                } else {
                    v[(i, j - u.ncols())]
                }
            });
            let mut sv: Vec<f64> = joined
                .svd(false, false)
                .singular_values
                .iter()
                .copied()
                .collect();
            sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
            margin = margin.min(sv[expect - 1]);
        }
    }
    Ok(margin)
}

/// True iff every intersection `U ∩ V` of subspace sums from the two
/// decompositions has the generic dimension `max(0, dim U + dim V − N)`.
pub fn general_position(d1: &LoxodromicData, d2: &LoxodromicData) -> Result<bool> {
    Ok(general_position_margin(d1, d2)? > GENERAL_POSITION_TOL)
}

/// A linear representation of SL(2,R) preserving a form, together with a way
/// to produce the geodesic reference vector of a hyperbolic element.
pub trait LinearModel {
    fn form(&self) -> InvariantForm;
    fn linear(&self, g: &Moebius) -> Result<DMatrix<f64>>;
    /// Fixed vector of `linear(g)` determined by the oriented axis of `g`.
    fn geodesic_reference(&self, g: &Moebius) -> Result<DVector<f64>>;

    fn dim(&self) -> usize {
        self.form().dim()
    }
}

/// The symmetric power model `Sym^{2n}` with [`InvariantForm::symmetric_power`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymPowerModel {
    pub n: usize,
}

impl LinearModel for SymPowerModel {
    fn form(&self) -> InvariantForm {
        InvariantForm::symmetric_power(self.n)
    }

    fn linear(&self, g: &Moebius) -> Result<DMatrix<f64>> {
        Ok(sym_power_matrix(g, 2 * self.n))
    }

    fn geodesic_reference(&self, g: &Moebius) -> Result<DVector<f64>> {
        geodesic_reference(g, self.n)
    }
}

/// Linear images of the generators and their inverses, with translations.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineGenerators {
    plus: Vec<AffineIsometry>,
    minus: Vec<AffineIsometry>,
}

impl AffineGenerators {
    pub fn new<M: LinearModel + ?Sized>(
        grp: &GroupPresentation,
        model: &M,
        translations: &[DVector<f64>],
    ) -> Result<Self> {
        if translations.len() != grp.rank() {
            return Err(Error::DimensionMismatch {
                expected: grp.rank(),
                found: translations.len(),
            });
        }
        let form = model.form();
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for (g, t) in grp.generators().iter().zip(translations) {
            let a = AffineIsometry::new(model.linear(g)?, t.clone(), &form)?;
            minus.push(a.inverse(&form));
            plus.push(a);
        }
        Ok(AffineGenerators { plus, minus })
    }

    pub fn dim(&self) -> usize {
        self.plus.first().map(|a| a.dim()).unwrap_or(0)
    }

    pub fn letter(&self, l: i32) -> Result<&AffineIsometry> {
        let k = l.unsigned_abs() as usize;
        if l == 0 || k > self.plus.len() {
            return Err(Error::IndexOutOfRange {
                index: l,
                count: self.plus.len(),
            });
        }
        Ok(if l > 0 {
            &self.plus[k - 1]
        } else {
            &self.minus[k - 1]
        })
    }

    /// Affine image of a word, composing letters left to right.
    pub fn extend(&self, w: &Word) -> Result<AffineIsometry> {
        let mut out = AffineIsometry::identity(self.dim());
        for &l in w.letters() {
            out = out.compose(self.letter(l)?);
        }
        Ok(out)
    }
}

/// The affine image of `w` under the unique extension with the given
/// generator translations.
pub fn cocycle_extend<M: LinearModel + ?Sized>(
    grp: &GroupPresentation,
    model: &M,
    generator_translations: &[DVector<f64>],
    w: &Word,
) -> Result<AffineIsometry> {
    AffineGenerators::new(grp, model, generator_translations)?.extend(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Obstructed,
    Inconclusive,
}

/// A pair of words with their invariants and the general-position verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstructionCertificate {
    pub word1: Word,
    pub word2: Word,
    pub mu1: f64,
    pub mu2: f64,
    pub general_position: bool,
    pub margin: f64,
    pub verdict: Verdict,
}

impl ObstructionCertificate {
    pub fn assess(word1: Word, word2: Word, mu1: f64, mu2: f64, margin: f64) -> Self {
        let general_position = margin > GENERAL_POSITION_TOL;
        let verdict = if general_position && mu1 * mu2 <= 0.0 {
            Verdict::Obstructed
        } else {
            Verdict::Inconclusive
        };
        ObstructionCertificate {
            word1,
            word2,
            mu1,
            mu2,
            general_position,
            margin,
            verdict,
        }
    }
}

/// Per-word data gathered by [`analyse_words`].
#[derive(Debug, Clone, PartialEq)]
pub struct WordInvariant {
    pub word: Word,
    pub mu: f64,
    pub data: LoxodromicData,
}

/// `μ(w) = Σᵢ ⌊τ(lᵢ), v(wᵢ)⌋` under the geodesic convention, where `wᵢ` is the
/// cyclic rotation of `w` starting at its `i`-th letter `lᵢ`. Equal to
/// `⌊τ(w), v(w)⌋`, but every term is bounded by a letter translation, so long
/// words do not lose digits to cancellation.
pub fn word_margulis_invariant<M: LinearModel + ?Sized>(
    grp: &GroupPresentation,
    model: &M,
    gens: &AffineGenerators,
    w: &Word,
) -> Result<f64> {
    let form = model.form();
    let mut mu = 0.0;
    for i in 0..w.len() {
        let rotated = w.rotate(i);
        let v = normalise(&model.geodesic_reference(&evaluate(&rotated, grp)?)?, &form)?;
        mu += form.pair(&gens.letter(w.letters()[i])?.translation, &v);
    }
    Ok(mu)
}

/// Margulis invariant and spectrum of each word, with all neutral vectors
/// multiplied by `epsilon`.
pub fn analyse_words<M: LinearModel + ?Sized>(
    grp: &GroupPresentation,
    model: &M,
    translations: &[DVector<f64>],
    words: &[Word],
    kind: ConventionKind,
    epsilon: f64,
) -> Result<Vec<WordInvariant>> {
    let gens = AffineGenerators::new(grp, model, translations)?;
    let form = model.form();
    let mut out = Vec::with_capacity(words.len());
    for w in words {
        let phi = gens.extend(w)?;
        let data = loxodromic_data(&phi.linear, &form)?;
        let mu = epsilon
            * match kind {
                ConventionKind::LightCone3d => {
                    margulis_invariant(&phi, &form, &Convention::LightCone3d)?
                }
                ConventionKind::FuchsianGeodesic => {
                    let reference = model.geodesic_reference(&evaluate(w, grp)?)?;
                    neutral_vector(&phi.linear, &form, &Convention::FuchsianGeodesic(reference))?;
                    word_margulis_invariant(grp, model, &gens, w)?
                }
            };
        out.push(WordInvariant {
            word: w.clone(),
            mu,
            data,
        });
    }
    Ok(out)
}

/// Scans pairs `(i, j)`, `i < j`, in order and returns the first pair in
/// general position whose invariants do not share a strict sign. `None` is
/// inconclusive, not a proof of properness.
pub fn properness_obstruction<M: LinearModel + ?Sized>(
    grp: &GroupPresentation,
    model: &M,
    translations: &[DVector<f64>],
    words: &[Word],
    kind: ConventionKind,
    epsilon: f64,
) -> Result<Option<ObstructionCertificate>> {
    let inv = analyse_words(grp, model, translations, words, kind, epsilon)?;
    scan_pairs(&inv)
}

/// The pair scan of [`properness_obstruction`] on precomputed invariants.
pub fn scan_pairs(inv: &[WordInvariant]) -> Result<Option<ObstructionCertificate>> {
    for i in 0..inv.len() {
        for j in (i + 1)..inv.len() {
            if inv[i].mu * inv[j].mu > 0.0 {
                continue;
            }
            let margin = general_position_margin(&inv[i].data, &inv[j].data)?;
            let cert = ObstructionCertificate::assess(
                inv[i].word.clone(),
                inv[j].word.clone(),
                inv[i].mu,
                inv[j].mu,
                margin,
            );
            if cert.verdict == Verdict::Obstructed {
                return Ok(Some(cert));
            }
        }
    }
    Ok(None)
}

/// Unique fixed point `(I − A)⁻¹ t` of an affine map whose linear part does
/// not have 1 as an eigenvalue.
pub fn affine_fixed_point(phi: &AffineIsometry) -> Result<DVector<f64>> {
    let dim = phi.dim();
    let m = DMatrix::<f64>::identity(dim, dim) - &phi.linear;
    m.lu()
        .solve(&phi.translation)
        .ok_or_else(|| Error::InvalidParameter(String::from("linear part has eigenvalue 1")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuchsian::schottky_group;
    use crate::halfplane::tests::random_moebius;
    use crate::symrep::sym_power_rep;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lorentz() -> InvariantForm {
        InvariantForm {
            n: 1,
            gram: DMatrix::from_diagonal(&DVector::from_vec(alloc::vec![-1.0, 1.0, 1.0])),
        }
    }

    fn boost(s: f64) -> DMatrix<f64> {
        let (c, h) = (s.cosh(), s.sinh());
        DMatrix::from_row_slice(3, 3, &[c, h, 0.0, h, c, 0.0, 0.0, 0.0, 1.0])
    }

    #[test]
    fn identity_is_not_loxodromic() {
        assert!(matches!(
            loxodromic_data(&DMatrix::identity(5, 5), &InvariantForm::symmetric_power(2)),
            Err(Error::NotLoxodromic(_))
        ));
    }

    #[test]
    fn diagonal_spectrum() {
        let a = sym_power_rep(&Moebius::dilation(2.0), 2).matrix;
        let d = loxodromic_data(&a, &InvariantForm::symmetric_power(2)).unwrap();
        for (x, y) in d.eigenvalues.iter().zip([1.0 / 16.0, 0.25, 1.0, 4.0, 16.0]) {
            assert!((x - y).abs() <= 1e-12 * y);
        }
        assert_eq!(d.neutral_index, 2);
    }

    #[test]
    fn conjugate_spectrum_and_null_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let form = InvariantForm::symmetric_power(2);
        for _ in 0..10 {
            let h = random_moebius(&mut rng);
            let a = sym_power_rep(&Moebius::dilation(2.0).conjugate_by(&h), 2).matrix;
            let d = loxodromic_data(&a, &form).unwrap();
            for (x, y) in d.eigenvalues.iter().zip([1.0 / 16.0, 0.25, 1.0, 4.0, 16.0]) {
                assert!((x - y).abs() <= 1e-8 * y);
            }
            assert!(d.null_residual <= 1e-8);
            for (l, e) in d.eigenvalues.iter().zip(&d.eigenvectors) {
                assert!((&a * e - e * *l).norm() <= 1e-8 * l.max(1.0));
            }
        }
    }

    #[test]
    fn lightcone_boost_example() {
        let form = lorentz();
        let a = boost(0.8);
        let v = neutral_vector(&a, &form, &Convention::LightCone3d).unwrap();
        assert!((v[2].abs() - 1.0).abs() < 1e-12 && v[0].abs() < 1e-12 && v[1].abs() < 1e-12);
        assert!((form.pair(&v, &v) - 1.0).abs() < 1e-12);
        assert!((&a * &v - &v).norm() <= 1e-8);
        // e₁ = (1, −1, 0) for e^{−s}, e₂ = (1, 1, 0) for e^{s}, both future
        // pointing; det[v, e₁, e₂] = 2 v₂ forces v = +e₃.
        assert!(v[2] > 0.0);
        let phi = AffineIsometry::new(
            a.clone(),
            DVector::from_vec(alloc::vec![0.0, 0.0, 0.7]),
            &form,
        )
        .unwrap();
        assert!(
            (margulis_invariant(&phi, &form, &Convention::LightCone3d).unwrap() - 0.7).abs()
                < 1e-12
        );
        assert!(matches!(
            neutral_vector(
                &DMatrix::identity(5, 5),
                &InvariantForm::symmetric_power(2),
                &Convention::LightCone3d
            ),
            Err(Error::ConventionInapplicable(_))
        ));
    }

    #[test]
    fn conventions_agree_in_dimension_three() {
        let grp = schottky_group(2.5, 1.0).unwrap();
        let model = SymPowerModel { n: 1 };
        let form = model.form();
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let mut signs = Vec::new();
        for _ in 0..20 {
            let len = rng.gen_range(1..=4);
            let w = crate::fuchsian::random_reduced_word(&mut rng, 2, len).min_rotation();
            let g = evaluate(&w, &grp).unwrap();
            let a = model.linear(&g).unwrap();
            let v1 = neutral_vector(&a, &form, &Convention::LightCone3d).unwrap();
            let v2 = neutral_vector(
                &a,
                &form,
                &Convention::FuchsianGeodesic(model.geodesic_reference(&g).unwrap()),
            )
            .unwrap();
            let s = form.pair(&v1, &v2) * form.pair(&v1, &v1);
            assert!((s.abs() - 1.0).abs() < 1e-6);
            signs.push(s.signum());
        }
        assert!(signs.iter().all(|&s| s == signs[0]));
    }

    #[test]
    fn invariant_is_base_point_free_and_additive_on_powers() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let form = InvariantForm::symmetric_power(1);
        let g = Moebius::boost(1.1).conjugate_by(&random_moebius(&mut rng));
        let a = sym_power_rep(&g, 1).matrix;
        let t = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0));
        let phi = AffineIsometry::new(a, t, &form).unwrap();
        let conv = Convention::FuchsianGeodesic(geodesic_reference(&g, 1).unwrap());
        let mu = margulis_invariant(&phi, &form, &conv).unwrap();
        for _ in 0..20 {
            let x = DVector::from_fn(3, |_, _| rng.gen_range(-5.0..5.0));
            assert!((margulis_invariant_at(&phi, &form, &conv, &x).unwrap() - mu).abs() <= 1e-10);
        }
        for k in 1..=4 {
            let mk = margulis_invariant(&phi.pow(k), &form, &conv).unwrap();
            assert!((mk - k as f64 * mu).abs() <= 1e-8);
        }
    }

    #[test]
    fn cocycle_identities() {
        let grp = schottky_group(2.5, 1.0).unwrap();
        let model = SymPowerModel { n: 2 };
        let form = model.form();
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let ts: Vec<DVector<f64>> = (0..2)
            .map(|_| DVector::from_fn(5, |_, _| rng.gen_range(-1.0..1.0)))
            .collect();
        let gens = AffineGenerators::new(&grp, &model, &ts).unwrap();
        let zero =
            AffineGenerators::new(&grp, &model, &[DVector::zeros(5), DVector::zeros(5)]).unwrap();
        for _ in 0..100 {
            let (l1, l2) = (rng.gen_range(0..=3), rng.gen_range(0..=3));
            let w1 = crate::fuchsian::random_reduced_word(&mut rng, 2, l1);
            let w2 = crate::fuchsian::random_reduced_word(&mut rng, 2, l2);
            let p1 = gens.extend(&w1).unwrap();
            let p2 = gens.extend(&w2).unwrap();
            let p12 = gens.extend(&w1.concat(&w2)).unwrap();
            // rounding grows like ‖A‖·‖t‖ for products of this size
            let tol =
                |a: &DMatrix<f64>, t: &DVector<f64>| 1e-12 * a.norm().max(1.0) * t.norm().max(1.0);
            let lhs = &p1.translation + &p1.linear * &p2.translation;
            assert!(
                (&p12.translation - &lhs).norm()
                    <= tol(&p1.linear, &p2.translation) + tol(&p12.linear, &p12.translation)
            );
            let inv = gens.extend(&w1.inverse()).unwrap();
            let a_inv = form.isometry_inverse(&p1.linear);
            let expect = -(&a_inv * &p1.translation);
            assert!((&inv.translation - &expect).norm() <= tol(&a_inv, &p1.translation));
            assert_eq!(zero.extend(&w1).unwrap().translation.norm(), 0.0);
        }
        assert!(matches!(
            AffineGenerators::new(&grp, &model, &ts[..1]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rotation_sum_matches_direct_invariant() {
        let grp = schottky_group(2.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for n in 1..=3 {
            let model = SymPowerModel { n };
            let form = model.form();
            let ts: Vec<DVector<f64>> = (0..2)
                .map(|_| DVector::from_fn(2 * n + 1, |_, _| rng.gen_range(-1.0..1.0)))
                .collect();
            let gens = AffineGenerators::new(&grp, &model, &ts).unwrap();
            for w in ["a", "ab", "aB", "abb", "aBA"] {
                let w: Word = w.parse().unwrap();
                let conv = Convention::FuchsianGeodesic(
                    model
                        .geodesic_reference(&evaluate(&w, &grp).unwrap())
                        .unwrap(),
                );
                let direct = margulis_invariant(&gens.extend(&w).unwrap(), &form, &conv).unwrap();
                let summed = word_margulis_invariant(&grp, &model, &gens, &w).unwrap();
                assert!(
                    (direct - summed).abs() <= 1e-9,
                    "n={n} {w}: {direct} {summed}"
                );
            }
        }
    }

    #[test]
    fn general_position_basics() {
        let form = InvariantForm::symmetric_power(2);
        let grp = schottky_group(2.5, 1.0).unwrap();
        let a = sym_power_rep(&grp.generators()[0], 2).matrix;
        let b = sym_power_rep(&grp.generators()[1], 2).matrix;
        let da = loxodromic_data(&a, &form).unwrap();
        let db = loxodromic_data(&b, &form).unwrap();
        assert!(!general_position(&da, &da).unwrap());
        assert!(general_position(&da, &db).unwrap());
        // in dimension 3 orthogonally crossing axes put each neutral vector
        // in the other's orthogonal complement
        let form1 = InvariantForm::symmetric_power(1);
        let d1 = loxodromic_data(&sym_power_rep(&grp.generators()[0], 1).matrix, &form1).unwrap();
        let d2 = loxodromic_data(&sym_power_rep(&grp.generators()[1], 1).matrix, &form1).unwrap();
        assert!(!general_position(&d1, &d2).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for _ in 0..10 {
            let centre =
                crate::halfplane::Point::from_xy(rng.gen_range(-1.0..1.0), rng.gen_range(0.3..3.0))
                    .unwrap();
            let r = Moebius::rotation_about(centre, rng.gen_range(0.0..core::f64::consts::TAU));
            let h = Moebius::boost(1.0).conjugate_by(&r);
            let c = sym_power_rep(&grp.generators()[0].conjugate_by(&h), 2).matrix;
            let dc = loxodromic_data(&c, &form).unwrap();
            assert!(general_position(&da, &dc).unwrap());
        }
    }

    #[test]
    fn zero_translations_are_obstructed() {
        let grp = schottky_group(2.5, 1.0).unwrap();
        let model = SymPowerModel { n: 1 };
        let words = [Word::new([1]), Word::new([2]), Word::new([1, 2])];
        let cert = properness_obstruction(
            &grp,
            &model,
            &[DVector::zeros(3), DVector::zeros(3)],
            &words,
            ConventionKind::FuchsianGeodesic,
            1.0,
        )
        .unwrap()
        .unwrap();
        assert_eq!(cert.verdict, Verdict::Obstructed);
        assert_eq!((cert.mu1, cert.mu2), (0.0, 0.0));
    }

    #[test]
    fn odd_powers_have_affine_fixed_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        for _ in 0..20 {
            let g = Moebius::boost(rng.gen_range(0.3..2.0)).conjugate_by(&random_moebius(&mut rng));
            let a = sym_power_matrix(&g, 3);
            let t = DVector::from_fn(4, |_, _| rng.gen_range(-1.0..1.0));
            let phi = AffineIsometry::from_parts(a, t);
            let x = affine_fixed_point(&phi).unwrap();
            assert!((phi.apply(&x) - &x).norm() <= 1e-8 * x.norm().max(1.0));
        }
    }
}
