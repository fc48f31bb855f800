//! Words, Schottky groups with ping-pong certificates, the genus-2 octagon
//! group, and enumeration of conjugacy classes by cyclic word reduction.
//!
//! Letters are signed 1-based generator indices: `k` is `g_k`, `-k` is its
//! inverse. Words print with `a, b, c, …` for generators and capitals for
//! inverses, so `[1, -2]` is `aB`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::{FRAC_PI_4, PI, SQRT_2};
use core::fmt;
use core::str::FromStr;
#[allow(unused_imports)]
use num_traits::Float;

use rand::Rng;

use crate::error::{Error, Result};
use crate::halfplane::{axis_data, BoundaryPoint, Moebius};

/// A freely reduced word in the generators.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<i32>);

impl Word {
    /// Builds a word, cancelling adjacent inverse pairs.
    pub fn new(letters: impl IntoIterator<Item = i32>) -> Self {
        let mut out: Vec<i32> = Vec::new();
        for l in letters {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn generator(k: i32) -> Self {
        Word(vec![k])
    }

    pub fn letters(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| -l).collect())
    }

    /// Reduced concatenation.
    pub fn concat(&self, other: &Word) -> Word {
        Word::new(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn pow(&self, k: i32) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::empty();
        for _ in 0..k.unsigned_abs() {
            out = out.concat(&base);
        }
        out
    }

    /// Strips cancelling letters from the two ends.
    pub fn cyclically_reduced(&self) -> Word {
        let s = &self.0;
        let (mut i, mut j) = (0, s.len());
        while j - i >= 2 && s[i] == -s[j - 1] {
            i += 1;
            j -= 1;
        }
        Word(s[i..j].to_vec())
    }

    pub fn rotate(&self, k: usize) -> Word {
        let mut v = self.0.clone();
        if !v.is_empty() {
            let k = k % v.len();
            v.rotate_left(k);
        }
        Word(v)
    }

    /// Canonical representative of the cyclic class: the least rotation in
    /// shortlex order (see [`letter_cmp`]).
    pub fn min_rotation(&self) -> Word {
        let w = self.cyclically_reduced();
        (0..w.len().max(1))
            .map(|k| w.rotate(k))
            .min_by(|a, b| shortlex(a.letters(), b.letters()))
            .unwrap_or_default()
    }

    /// Smallest `d` such that the word is the `len/d`-th power of its prefix of length `d`.
    pub fn primitive_period(&self) -> usize {
        let n = self.0.len();
        (1..=n)
            .find(|&d| n.is_multiple_of(d) && (d..n).all(|i| self.0[i] == self.0[i - d]))
            .unwrap_or(0)
    }

    pub fn is_proper_power(&self) -> bool {
        let p = self.primitive_period();
        p > 0 && p < self.0.len()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &l in &self.0 {
            let k = l.unsigned_abs();
            if (1..=26).contains(&k) {
                let base = if l > 0 { b'a' } else { b'A' };
                write!(f, "{}", (base + (k - 1) as u8) as char)?;
            } else {
                write!(f, "({})", l)?;
            }
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Accepts letter form (`aBc`) or comma/space separated signed indices (`1,-2,3`).
    fn from_str(s: &str) -> Result<Word> {
        let s = s.trim();
        if s.chars().any(|c| c.is_ascii_digit()) {
            let mut letters = Vec::new();
            for tok in s
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
            {
                let l: i32 = tok
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad word token {tok:?}")))?;
                if l == 0 {
                    return Err(Error::InvalidParameter(String::from("generator index 0")));
                }
                letters.push(l);
            }
            Ok(Word::new(letters))
        } else {
            let mut letters = Vec::new();
            for c in s.chars() {
                let l = match c {
                    'a'..='z' => (c as u8 - b'a') as i32 + 1,
                    'A'..='Z' => -((c as u8 - b'A') as i32 + 1),
                    _ => return Err(Error::InvalidParameter(format!("bad word letter {c:?}"))),
                };
                letters.push(l);
            }
            Ok(Word::new(letters))
        }
    }
}

/// Letter order: by generator index, a generator before its inverse.
pub fn letter_cmp(a: i32, b: i32) -> Ordering {
    (a.unsigned_abs(), a < 0).cmp(&(b.unsigned_abs(), b < 0))
}

/// Shortlex order on letter sequences: shorter first, then lexicographic by [`letter_cmp`].
pub fn shortlex(a: &[i32], b: &[i32]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| letter_cmp(x, y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    FreeSchottky,
    Genus2Cocompact,
}

/// Ideal arc on the unit circle, from `start` counterclockwise through `len` radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub start: f64,
    pub len: f64,
}

fn ccw(from: f64, to: f64) -> f64 {
    let r = (to - from) % (2.0 * PI);
    if r < 0.0 {
        r + 2.0 * PI
    } else {
        r
    }
}

impl Arc {
    fn through(p: f64, q: f64, mid: f64) -> Arc {
        if ccw(p, mid) <= ccw(p, q) {
            Arc {
                start: p,
                len: ccw(p, q),
            }
        } else {
            Arc {
                start: q,
                len: ccw(q, p),
            }
        }
    }

    /// Angular gap between two arcs; negative when they overlap.
    pub fn gap(&self, other: &Arc) -> f64 {
        let off = ccw(self.start, other.start);
        let g1 = off - self.len;
        let g2 = 2.0 * PI - off - other.len;
        g1.min(g2)
    }
}

/// The two half-disks of one generator: boundary arcs of the attracting and
/// repelling regions, cut out by geodesics perpendicular to the axis at
/// distance `ℓ/2` on either side of its foot point.
#[derive(Debug, Clone, PartialEq)]
pub struct PingPongCertificate {
    pub arcs: Vec<(Arc, Arc)>,
    pub min_gap: f64,
    pub boundary_residual: f64,
}

const PING_PONG_MARGIN: f64 = 1e-9;

fn circle_angle(p: BoundaryPoint) -> f64 {
    p.to_circle().arg()
}

/// Checks the ping-pong condition for a list of hyperbolic generators.
pub fn ping_pong_certificate(generators: &[Moebius]) -> Result<PingPongCertificate> {
    let mut arcs = Vec::new();
    let mut boundary_residual: f64 = 0.0;
    for g in generators {
        let data = axis_data(g)?;
        let half = 0.5 * data.translation_length;
        let perp_ends = |s: f64| {
            let m = *data.axis.map() * Moebius::boost(s);
            (
                m.act_boundary(BoundaryPoint::Finite(-1.0)),
                m.act_boundary(BoundaryPoint::Finite(1.0)),
            )
        };
        let (p_att, q_att) = perp_ends(half);
        let (p_rep, q_rep) = perp_ends(-half);
        let att = Arc::through(
            circle_angle(p_att),
            circle_angle(q_att),
            circle_angle(data.attracting),
        );
        let rep = Arc::through(
            circle_angle(p_rep),
            circle_angle(q_rep),
            circle_angle(data.repelling),
        );
        for (src, dst) in [(p_rep, p_att), (q_rep, q_att)] {
            let img = g.act_boundary(src).to_circle();
            boundary_residual = boundary_residual.max((img - dst.to_circle()).norm());
        }
        arcs.push((att, rep));
    }
    let flat: Vec<Arc> = arcs.iter().flat_map(|&(a, r)| [a, r]).collect();
    let mut min_gap = f64::INFINITY;
    for i in 0..flat.len() {
        for j in (i + 1)..flat.len() {
            min_gap = min_gap.min(flat[i].gap(&flat[j]));
        }
    }
    if !(min_gap > PING_PONG_MARGIN) {
        return Err(Error::PingPongFailure(format!(
            "half-disks overlap (gap {min_gap:.3e})"
        )));
    }
    if boundary_residual > 1e-8 {
        return Err(Error::PingPongFailure(format!(
            "generator does not map its repelling boundary onto its attracting one (residual {boundary_residual:.3e})"
        )));
    }
    Ok(PingPongCertificate {
        arcs,
        min_gap,
        boundary_residual,
    })
}

/// Generators plus enough structure to validate them.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPresentation {
    generators: Vec<Moebius>,
    kind: GroupKind,
    relator: Option<Word>,
    certificate: Option<PingPongCertificate>,
}

impl GroupPresentation {
    /// A free group given by generators that pass the ping-pong certificate.
    pub fn free(generators: Vec<Moebius>) -> Result<Self> {
        let certificate = ping_pong_certificate(&generators)?;
        Ok(GroupPresentation {
            generators,
            kind: GroupKind::FreeSchottky,
            relator: None,
            certificate: Some(certificate),
        })
    }

    pub fn generators(&self) -> &[Moebius] {
        &self.generators
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn relator(&self) -> Option<&Word> {
        self.relator.as_ref()
    }

    pub fn certificate(&self) -> Option<&PingPongCertificate> {
        self.certificate.as_ref()
    }

    /// `min ‖r ∓ I‖` for the stored relator, or zero for free groups.
    pub fn relation_residual(&self) -> f64 {
        match &self.relator {
            Some(r) => evaluate(r, self)
                .map(|m| m.distance_to_identity())
                .unwrap_or(f64::INFINITY),
            None => 0.0,
        }
    }

    pub fn letter(&self, l: i32) -> Result<Moebius> {
        let k = l.unsigned_abs() as usize;
        if l == 0 || k > self.generators.len() {
            return Err(Error::IndexOutOfRange {
                index: l,
                count: self.generators.len(),
            });
        }
        let g = self.generators[k - 1];
        Ok(if l > 0 { g } else { g.inverse() })
    }
}

/// Ordered product of the letters, left to right; the empty word is the identity.
pub fn evaluate(word: &Word, grp: &GroupPresentation) -> Result<Moebius> {
    let mut m = Moebius::identity();
    for &l in word.letters() {
        m = m * grp.letter(l)?;
    }
    Ok(m)
}

/// Two-generator Schottky group: `g₁` translates by `t` along `{0, ∞}`, `g₂` by
/// `t` along `{−s, s}`.
pub fn schottky_group(t: f64, separation: f64) -> Result<GroupPresentation> {
    if !(t > 0.0) || !(separation > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "schottky parameters must be positive (t = {t}, separation = {separation})"
        )));
    }
    let g1 = Moebius::boost(t);
    let h = Moebius::dilation(separation.sqrt()) * Moebius::rotation(0.5 * PI);
    let g2 = g1.conjugate_by(&h);
    GroupPresentation::free(vec![g1, g2])
}

/// Translation length of the octagon side pairings, `2 arccosh(1 + √2)`.
pub fn genus2_translation_length() -> f64 {
    2.0 * (1.0 + SQRT_2).acosh()
}

/// Surface group of the regular octagon with all interior angles `π/4`, centred at the disk origin. Generator `k` (1-based)
/// is the translation of length [`genus2_translation_length`] rotated by
/// `(k−1)π/4`; the boundary relator is `a B c D A b C d`.
pub fn genus2_group() -> GroupPresentation {
    let t = Moebius::boost(genus2_translation_length());
    let generators = (0..4)
        .map(|k| t.conjugate_by(&Moebius::rotation(k as f64 * FRAC_PI_4)))
        .collect();
    GroupPresentation {
        generators,
        kind: GroupKind::Genus2Cocompact,
        relator: Some(Word::new([1, -2, 3, -4, -1, 2, -3, 4])),
        certificate: None,
    }
}

/// Words `(x₁, x₂, x₃, x₄)` in the octagon generators with `[x₁,x₂][x₃,x₄] = ±I`;
/// they generate the same group.
pub fn genus2_commutator_basis() -> [Word; 4] {
    [
        Word::new([1]),
        Word::new([2]),
        Word::new([2, -4, -1]),
        Word::new([1, 3, -2]),
    ]
}

/// `[x, y] = x y x⁻¹ y⁻¹`.
pub fn commutator(x: &Word, y: &Word) -> Word {
    x.concat(y).concat(&x.inverse()).concat(&y.inverse())
}

/// A conjugacy class representative with its primitivity flag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConjugacyClass {
    pub word: Word,
    pub primitive: bool,
}

/// One cyclically reduced representative per cyclic class of words of length
/// `1..=maxlen` in the free group on the generators.
///
/// The representative is the least rotation in shortlex order, and the output
/// is sorted the same way. `γ` and `γ⁻¹` are separate classes. Proper powers
/// are kept and flagged. For the genus-2 group two listed words may still be
/// conjugate through the surface relation once `maxlen ≥ 4`.
pub fn enumerate_conjugacy_classes(grp: &GroupPresentation, maxlen: usize) -> Vec<ConjugacyClass> {
    let r = grp.rank() as i32;
    let alphabet: Vec<i32> = {
        let mut v: Vec<i32> = (1..=r).flat_map(|k| [k, -k]).collect();
        v.sort_by(|&a, &b| letter_cmp(a, b));
        v
    };
    let mut out = Vec::new();
    let mut stack: Vec<i32> = Vec::new();
    for len in 1..=maxlen {
        collect_canonical(&alphabet, len, &mut stack, &mut out);
    }
    out
}

fn collect_canonical(
    alphabet: &[i32],
    len: usize,
    stack: &mut Vec<i32>,
    out: &mut Vec<ConjugacyClass>,
) {
    if stack.len() == len {
        if len > 1 && stack[0] == -stack[len - 1] {
            return;
        }
        let w = Word(stack.clone());
        if w.min_rotation() == w {
            let primitive = !w.is_proper_power();
            out.push(ConjugacyClass { word: w, primitive });
        }
        return;
    }
    for &l in alphabet {
        if stack.last() == Some(&-l) {
            continue;
        }
        // A canonical word starts with its least letter.
        if let Some(&first) = stack.first() {
            if letter_cmp(l, first) == Ordering::Less {
                continue;
            }
        }
        stack.push(l);
        collect_canonical(alphabet, len, stack, out);
        stack.pop();
    }
}

/// Uniformly random reduced word of exact length `len`.
pub fn random_reduced_word<R: Rng + ?Sized>(rng: &mut R, rank: usize, len: usize) -> Word {
    let mut letters: Vec<i32> = Vec::with_capacity(len);
    while letters.len() < len {
        let k = rng.gen_range(1..=rank as i32);
        let l = if rng.gen::<bool>() { k } else { -k };
        if letters.last() != Some(&-l) {
            letters.push(l);
        }
    }
    Word(letters)
}

/// Searches for `h` of length `≤ maxlen` with `h u h⁻¹ = ±v` numerically.
pub fn find_conjugator(
    grp: &GroupPresentation,
    u: &Word,
    v: &Word,
    maxlen: usize,
    tol: f64,
) -> Result<Option<Word>> {
    let mu = evaluate(u, grp)?;
    let mv = evaluate(v, grp)?;
    let scale = 1.0 + mv.entries().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut frontier = vec![Word::empty()];
    for len in 0..=maxlen {
        for h in &frontier {
            let mh = evaluate(h, grp)?;
            if mu.conjugate_by(&mh).distance_to(&mv) <= tol * scale {
                return Ok(Some(h.clone()));
            }
        }
        if len == maxlen {
            break;
        }
        let mut next = Vec::new();
        for h in &frontier {
            for k in 1..=grp.rank() as i32 {
                for l in [k, -k] {
                    if h.letters().last() != Some(&-l) {
                        let mut v = h.letters().to_vec();
                        v.push(l);
                        next.push(Word(v));
                    }
                }
            }
        }
        frontier = next;
    }
    Ok(None)
}
