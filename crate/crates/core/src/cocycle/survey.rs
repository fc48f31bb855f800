//! The observable `f(u) = Im ω(u ⊗ … ⊗ u)` on the unit tangent bundle, its
//! symmetry and mean, and the survey of its integrals over closed geodesics.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;
use rand::Rng;

use super::affine::{affine_holonomy, integrate_over_axis, margulis_via_integral, BundleModel};
use super::form::phi_map;
use super::qdiff::QDifferential;
use crate::error::{Error, Result};
use crate::fuchsian::{enumerate_conjugacy_classes, evaluate, GroupKind, GroupPresentation, Word};
use crate::halfplane::{from_disk_point, Curve, Point, UnitTangent};
use crate::margulis::{margulis_invariant, Convention, LinearModel};

/// `f(u) = Im ω(u^{⊗q})` for even `q`.
pub fn f_observable(omega: &QDifferential, u: &UnitTangent) -> Result<f64> {
    if omega.q() % 2 == 1 {
        return Err(Error::WeightMismatch {
            q: omega.q(),
            n: omega.q() as usize - 1,
        });
    }
    Ok(omega.pairing(u).im)
}

/// `e^{iπ/q}`: rotating every direction by it changes the sign of `f`.
pub fn beta_rotation(q: u32) -> Complex64 {
    Complex64::from_polar(1.0, PI / q as f64)
}

/// True when no side pairing brings the disk point `w` closer to the origin.
pub fn dirichlet_contains(grp: &GroupPresentation, w: Complex64) -> bool {
    let r = w.norm_sqr();
    (1..=grp.rank() as i32).flat_map(|k| [k, -k]).all(|l| {
        let h = grp.letter(l).expect("letter in range").to_disk();
        h.act(w).norm_sqr() >= r
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloSummary {
    pub samples: usize,
    pub mean: f64,
    pub stderr: f64,
    /// Proposals drawn to get `samples` accepted points.
    pub proposals: usize,
}

fn require_compact(grp: &GroupPresentation) -> Result<()> {
    if grp.kind() != GroupKind::Genus2Cocompact {
        return Err(Error::InvalidParameter(alloc::string::String::from(
            "sampling needs a compact fundamental domain",
        )));
    }
    Ok(())
}

fn draw_unit_tangent<R: Rng + ?Sized>(
    grp: &GroupPresentation,
    rng: &mut R,
    proposals: &mut usize,
) -> Result<UnitTangent> {
    // Circumradius of the regular octagon with angles π/4: cosh R = cot²(π/8).
    let cot = 1.0 / (PI / 8.0).tan();
    let cosh_r = cot * cot;
    loop {
        *proposals += 1;
        let rho = (1.0 + rng.gen::<f64>() * (cosh_r - 1.0)).acosh();
        let w = Complex64::from_polar((0.5 * rho).tanh(), rng.gen_range(0.0..2.0 * PI));
        if !dirichlet_contains(grp, w) {
            continue;
        }
        let base = Point::new(from_disk_point(w))?;
        return Ok(UnitTangent::from_angle(base, rng.gen_range(0.0..2.0 * PI)));
    }
}

/// A unit tangent vector drawn from the Liouville measure on the octagon:
/// base point uniform for hyperbolic area, direction uniform.
pub fn sample_unit_tangent<R: Rng + ?Sized>(
    grp: &GroupPresentation,
    rng: &mut R,
) -> Result<UnitTangent> {
    require_compact(grp)?;
    draw_unit_tangent(grp, rng, &mut 0)
}

/// Mean of `f` over the unit tangent bundle of the octagon surface under the
/// Liouville measure.
pub fn monte_carlo_mean<R: Rng + ?Sized>(
    omega: &QDifferential,
    grp: &GroupPresentation,
    samples: usize,
    rng: &mut R,
) -> Result<MonteCarloSummary> {
    require_compact(grp)?;
    if samples < 2 {
        return Err(Error::InvalidParameter(alloc::format!(
            "need at least two samples, got {samples}"
        )));
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut proposals = 0;
    for _ in 0..samples {
        let u = draw_unit_tangent(grp, rng, &mut proposals)?;
        let f = f_observable(omega, &u)?;
        sum += f;
        sum_sq += f * f;
    }
    let m = samples as f64;
    let mean = sum / m;
    let var = (sum_sq - m * mean * mean) / (m - 1.0);
    Ok(MonteCarloSummary {
        samples,
        mean,
        stderr: (var.max(0.0) / m).sqrt(),
        proposals,
    })
}

/// One closed geodesic of the survey.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicLoopReport {
    pub word: Word,
    pub length: f64,
    pub integral_f: f64,
    pub mu_direct: f64,
    pub mu_integral: f64,
}

impl GeodesicLoopReport {
    /// `μ / ∫_c f` with `μ` from the affine holonomy. The quadrature value
    /// would make the ratio constant by construction.
    pub fn ratio(&self) -> f64 {
        self.mu_direct / self.integral_f
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurveyOptions {
    pub maxlen: usize,
    /// Hard cap on the number of classes examined.
    pub max_classes: usize,
    /// Stop after the first word length at which both signs have appeared.
    pub stop_when_both_signs: bool,
    /// Keep going at least this far even once both signs are seen.
    pub min_classes: usize,
    /// Integrals of absolute value at most this count as zero.
    pub zero_tol: f64,
    pub basepoint: Point,
    pub step: f64,
    pub nodes_per_unit: usize,
}

impl Default for SurveyOptions {
    fn default() -> Self {
        SurveyOptions {
            maxlen: 8,
            max_classes: 200,
            stop_when_both_signs: true,
            min_classes: 10,
            zero_tol: 1e-8,
            basepoint: Point::i(),
            step: 1e-3,
            nodes_per_unit: super::affine::NODES_PER_UNIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurveySummary {
    pub reports: Vec<GeodesicLoopReport>,
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
    /// Longest word length examined.
    pub reached_length: usize,
}

impl SurveySummary {
    pub fn both_signs(&self) -> bool {
        self.positive > 0 && self.negative > 0
    }

    /// `μ / ∫f` over reports whose integral exceeds `min_abs` in absolute value.
    pub fn ratios(&self, min_abs: f64) -> Vec<f64> {
        self.reports
            .iter()
            .filter(|r| r.integral_f.abs() > min_abs)
            .map(|r| r.ratio())
            .collect()
    }
}

/// `(max − min) / |mean|`.
pub fn relative_spread(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    (hi - lo) / mean.abs()
}

/// `∫_c f` over one period of the axis of `γ`.
pub fn geodesic_integral_f(
    word: &Word,
    grp: &GroupPresentation,
    omega: &QDifferential,
    nodes_per_unit: usize,
) -> Result<(f64, f64)> {
    f_observable(omega, &UnitTangent::from_angle(Point::i(), 0.0))?;
    let (c, value) = integrate_over_axis(word, grp, 0.0, nodes_per_unit, |c, t| {
        (omega.eval(c.point(t)) * c.velocity(t).powu(omega.q())).im
    })?;
    Ok((c.length(), value))
}

/// Report for a single word: `∫_c f` and `μ` by transport and by quadrature.
pub fn loop_report(
    word: &Word,
    grp: &GroupPresentation,
    omega: &QDifferential,
    n: usize,
    opts: &SurveyOptions,
) -> Result<GeodesicLoopReport> {
    let alpha = phi_map(omega, n)?;
    let model = BundleModel {
        n,
        basepoint: opts.basepoint,
        step: opts.step,
    };
    let (length, integral_f) = geodesic_integral_f(word, grp, omega, opts.nodes_per_unit)?;
    let mu_integral = margulis_via_integral(word, grp, &alpha, 0.0, opts.nodes_per_unit)?;
    let hol = affine_holonomy(word, grp, &alpha, opts.basepoint, opts.step)?;
    let reference = model.geodesic_reference(&evaluate(word, grp)?)?;
    let mu_direct = margulis_invariant(
        &hol,
        &model.form(),
        &Convention::FuchsianGeodesic(reference),
    )?;
    Ok(GeodesicLoopReport {
        word: word.clone(),
        length,
        integral_f,
        mu_direct,
        mu_integral,
    })
}

/// Walks primitive conjugacy classes by increasing word length and records
/// each closed geodesic. Word lengths are processed whole, so the output for a
/// given length does not depend on where the walk stops.
pub fn geodesic_sign_survey(
    grp: &GroupPresentation,
    omega: &QDifferential,
    n: usize,
    opts: &SurveyOptions,
) -> Result<SurveySummary> {
    phi_map(omega, n)?;
    let mut out = SurveySummary {
        reports: Vec::new(),
        positive: 0,
        negative: 0,
        zero: 0,
        reached_length: 0,
    };
    let mut classes = enumerate_conjugacy_classes(grp, opts.maxlen)
        .into_iter()
        .filter(|c| c.primitive)
        .peekable();
    while let Some(first) = classes.peek() {
        let len = first.word.len();
        let done =
            opts.stop_when_both_signs && out.both_signs() && out.reports.len() >= opts.min_classes;
        if done || out.reports.len() >= opts.max_classes {
            break;
        }
        while let Some(c) = classes.next_if(|c| c.word.len() == len) {
            if out.reports.len() >= opts.max_classes {
                break;
            }
            let r = loop_report(&c.word, grp, omega, n, opts)?;
            if r.integral_f > opts.zero_tol {
                out.positive += 1;
            } else if r.integral_f < -opts.zero_tol {
                out.negative += 1;
            } else {
                out.zero += 1;
            }
            out.reports.push(r);
        }
        out.reached_length = len;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::poincare_qdiff;
    use crate::fuchsian::genus2_group;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn beta_flips_the_sign() {
        let om = poincare_qdiff(&genus2_group(), 4, 1, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let p = Point::from_xy(rng.gen_range(-2.0..2.0), rng.gen_range(0.2..3.0)).unwrap();
            let u = UnitTangent::from_angle(p, rng.gen_range(0.0..6.3));
            let f = f_observable(&om, &u).unwrap();
            let g = f_observable(&om, &u.rotated(beta_rotation(4))).unwrap();
            assert!((f + g).abs() <= 1e-12 * f.abs().max(1.0));
        }
    }

    #[test]
    fn zero_and_odd_weight() {
        let u = UnitTangent::from_angle(Point::i(), 0.4);
        assert_eq!(f_observable(&QDifferential::zero(2), &u).unwrap(), 0.0);
        assert!(f_observable(&QDifferential::zero(3), &u).is_err());
    }

    #[test]
    fn monte_carlo_mean_is_small() {
        let grp = genus2_group();
        let om = poincare_qdiff(&grp, 2, 0, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mc = monte_carlo_mean(&om, &grp, 4000, &mut rng).unwrap();
        assert!(mc.mean.abs() <= 3.0 * mc.stderr, "{mc:?}");
        assert!(mc.proposals > mc.samples);
    }

    #[test]
    fn zero_differential_survey() {
        let grp = genus2_group();
        let opts = SurveyOptions {
            maxlen: 1,
            step: 1e-2,
            nodes_per_unit: 50,
            ..SurveyOptions::default()
        };
        let s = geodesic_sign_survey(&grp, &QDifferential::zero(2), 1, &opts).unwrap();
        assert_eq!(s.reports.len(), 8);
        assert_eq!(s.zero, 8);
        assert!(s
            .reports
            .iter()
            .all(|r| r.integral_f == 0.0 && r.mu_integral == 0.0 && r.mu_direct == 0.0));
    }
}
