use std::f64::consts::PI;

use anyhow::{bail, Result};
use margulis_core::cocycle::{
    affine_holonomy, beta_rotation, closedness_residual, f_observable, geodesic_sign_survey,
    monte_carlo_mean, neutral_section, odd_section, phi_map, poincare_qdiff, product_coefficients,
    relative_spread, sample_unit_tangent, section_drift, BundleModel, Duality, QDifferential,
    SurveyOptions, CLOSEDNESS_STEP, CLOSEDNESS_TOL,
};
use margulis_core::flatbundle::{
    bundle_metric, circle_weights, flatness_residual, holonomy_rep, levi_civita_holonomy,
    parallel_transport, Path, PathTransport, SectionCoords,
};
use margulis_core::fuchsian::{
    enumerate_conjugacy_classes, evaluate, genus2_group, GroupPresentation, Word,
};
use margulis_core::halfplane::{distance, Geodesic, Moebius, Point};
use margulis_core::margulis::{
    affine_fixed_point, analyse_words, margulis_invariant, margulis_invariant_at, neutral_vector,
    scan_pairs, AffineGenerators, AffineIsometry, Convention, ConventionKind, LinearModel,
    ObstructionCertificate, SymPowerModel, Verdict, WordInvariant, GENERAL_POSITION_TOL,
};
use margulis_core::symrep::{character, dominant_eigenvalue, sym_power_matrix, InvariantForm};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{Command, ExperimentConfig, TranslationMode};
use crate::report::{Assertion, Cell, Outcome, Table};

pub const FLATNESS_TOL: f64 = 1e-6;
pub const ORDER_FACTOR: f64 = 8.0;
/// Below this the residual is roundoff and its halving ratio means nothing.
pub const ROUNDOFF_FLOOR: f64 = 1e-12;
/// Fixed steps used for the order ratio when the stated step is at roundoff.
pub const COARSE_STEPS: (f64, f64) = (0.1, 0.05);
pub const CONTROL_REL: f64 = 0.1;
pub const METRIC_TOL: f64 = 1e-8;
/// Geodesic transports in the metric check are at most this long.
pub const METRIC_MAX_LENGTH: f64 = 1.0;
pub const TRACE_TOL: f64 = 1e-6;
pub const WEIGHT_TOL: f64 = 1e-6;
pub const FIXED_POINT_TOL: f64 = 1e-8;
pub const EVEN_DEGREES: [usize; 3] = [1, 3, 5];
pub const BASEPOINT_TOL: f64 = 1e-10;
pub const POWER_TOL: f64 = 1e-8;
pub const MAX_POWER: u32 = 4;
pub const ELEMENT_SAMPLES: usize = 100;
pub const PARITY_TOL: f64 = 1e-8;
pub const SECTION_TOL: f64 = 1e-8;
/// Drift above which a coefficient choice counts as not parallel.
pub const SECTION_FAIL: f64 = 1e-3;
pub const SECTION_P: [usize; 3] = [0, 1, 2];
pub const ORDER_TOL: f64 = 1.95;
pub const CONTROL_NOT_CLOSED: f64 = 1e-2;
pub const INTEGRAL_TOL: f64 = 1e-3;
/// Words with `|∫f|` at most this are left out of the constant ratio.
pub const RATIO_MIN_INTEGRAL: f64 = 1e-3;
pub const RATIO_MIN_WORDS: usize = 10;
pub const RATIO_SPREAD: f64 = 1e-2;
pub const BETA_SAMPLES: usize = 10_000;
pub const BETA_TOL: f64 = 1e-12;
pub const MC_SIGMAS: f64 = 3.0;

pub fn basepoints() -> [Point; 3] {
    [
        Point::i(),
        Point::from_xy(0.7, 1.3).expect("upper half-plane"),
        Point::from_xy(-1.1, 0.6).expect("upper half-plane"),
    ]
}

/// A separate deterministic stream per purpose.
fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Hyperbolic element with translation length in `[0.5, 2.5]` and a random axis.
pub fn random_hyperbolic<R: Rng + ?Sized>(rng: &mut R) -> Moebius {
    let len = rng.gen_range(0.5..2.5);
    let p = Point::from_xy(rng.gen_range(-1.0..1.0), rng.gen_range(0.3..3.0)).expect("y > 0");
    let h = Moebius::carrying_i_to(p) * Moebius::rotation(rng.gen_range(0.0..2.0 * PI));
    Moebius::boost(len).conjugate_by(&h)
}

fn random_section<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SectionCoords {
    SectionCoords::new(
        rng.gen_range(-1.0..1.0),
        (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect(),
    )
}

fn random_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0))
}

fn max(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    match cfg.command {
        Command::Flatness => flatness(cfg),
        Command::RepCheck => rep_check(cfg),
        Command::Margulis => margulis(cfg),
        Command::Obstruct => obstruct(cfg),
        Command::Survey => survey(cfg),
        Command::Symmetry => symmetry(cfg),
    }
}

/// Order ratio `r(h)/r(h/2)`, taken at the stated step unless the residual
/// there is at roundoff, in which case at [`COARSE_STEPS`].
fn order_ratio(n: usize, lp: &Path, step: f64, r: f64) -> Result<(f64, f64, &'static str)> {
    if r >= ROUNDOFF_FLOOR {
        let half = flatness_residual(n, &PathTransport::new(lp.clone(), 0.5 * step)?)?;
        return Ok((half, r / half, "stated"));
    }
    let (h0, h1) = COARSE_STEPS;
    let r0 = flatness_residual(n, &PathTransport::new(lp.clone(), h0)?.with_fixed_step())?;
    let r1 = flatness_residual(n, &PathTransport::new(lp.clone(), h1)?.with_fixed_step())?;
    Ok((f64::NAN, r0 / r1, "coarse"))
}

pub fn flatness(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut loops = Table::new(
        "loops",
        &[
            "n",
            "x",
            "y",
            "step",
            "residual",
            "residual_half_step",
            "order_ratio",
            "order_source",
        ],
    );
    for &n in &cfg.n {
        let mut worst = 0.0f64;
        let mut worst_ratio = f64::INFINITY;
        for z in basepoints() {
            let lp = Path::square_loop(z, cfg.side)?;
            let r = flatness_residual(n, &PathTransport::new(lp.clone(), cfg.step)?)?;
            let (half, ratio, source) = order_ratio(n, &lp, cfg.step, r)?;
            worst = worst.max(r);
            worst_ratio = worst_ratio.min(ratio);
            loops.push(vec![
                n.into(),
                z.x().into(),
                z.y().into(),
                cfg.step.into(),
                r.into(),
                half.into(),
                ratio.into(),
                source.into(),
            ]);
        }
        out.assertions.push(Assertion::at_most(
            format!("flatness residual n={n}"),
            worst,
            FLATNESS_TOL,
        ));
        out.assertions.push(Assertion::at_least(
            format!("step halving ratio n={n}"),
            worst_ratio,
            ORDER_FACTOR,
        ));
    }

    let mut control = Table::new("control", &["x", "y", "area", "levi_civita_defect"]);
    let area = Path::square_area(cfg.side);
    let mut worst_rel = 0.0f64;
    for z in basepoints() {
        let lp = PathTransport::new(Path::square_loop(z, cfg.side)?, cfg.step)?;
        let defect = (levi_civita_holonomy(1, &lp)? - 1.0).norm();
        worst_rel = worst_rel.max((defect - area).abs() / area);
        control.push(vec![z.x().into(), z.y().into(), area.into(), defect.into()]);
    }
    out.assertions.push(Assertion::at_most(
        "levi-civita control within area",
        worst_rel,
        CONTROL_REL,
    ));

    let (metric, table) = metric_preservation(cfg)?;
    out.merge(metric);
    out.tables = vec![loops, control, table];
    out.note("loop_area", area);
    Ok(out)
}

/// Random geodesic transports of random pairs of sections, one per sample.
fn metric_preservation(cfg: &ExperimentConfig) -> Result<(Outcome, Table)> {
    let mut out = Outcome::default();
    let mut table = Table::new("metric", &["n", "sample", "length", "defect_per_length"]);
    let mut rng = rng(cfg.seed, 1);
    let mut worst = 0.0f64;
    for k in 0..cfg.samples {
        let n = cfg.n[k % cfg.n.len()];
        let z0 = Point::from_xy(rng.gen_range(-2.0..2.0), rng.gen_range(0.2..3.0))?;
        let (z1, len) = loop {
            let z1 = Point::from_xy(rng.gen_range(-2.0..2.0), rng.gen_range(0.2..3.0))?;
            let d = distance(z0, z1);
            if d > 0.05 && d < METRIC_MAX_LENGTH {
                break (z1, d);
            }
        };
        let pt = PathTransport::new(Path::polygon(&[z0, z1])?, cfg.step)?;
        let y = random_section(&mut rng, n);
        let z = random_section(&mut rng, n);
        let before = bundle_metric(&y, &z)?;
        let after = bundle_metric(
            &parallel_transport(n, &pt, &y)?,
            &parallel_transport(n, &pt, &z)?,
        )?;
        let defect = (after - before).abs() / len;
        worst = worst.max(defect);
        table.push(vec![n.into(), k.into(), len.into(), defect.into()]);
    }
    out.assertions.push(Assertion::at_most(
        "metric defect per unit length",
        worst,
        METRIC_TOL,
    ));
    out.note("metric_transports", cfg.samples);
    Ok((out, table))
}

pub fn rep_check(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut traces = Table::new(
        "traces",
        &[
            "n",
            "sample",
            "translation_length",
            "trace",
            "character",
            "relative_error",
        ],
    );
    let mut rng_g = rng(cfg.seed, 2);
    for &n in &cfg.n {
        let mut worst = 0.0f64;
        for k in 0..cfg.samples {
            let g = random_hyperbolic(&mut rng_g);
            let h = holonomy_rep(&g, n, Point::i(), cfg.step)?;
            let chi = character(&g, n)?;
            let rel = (h.trace() - chi).abs() / chi.abs().max(1.0);
            worst = worst.max(rel);
            let len = 2.0 * dominant_eigenvalue(&g)?.ln();
            traces.push(vec![
                n.into(),
                k.into(),
                len.into(),
                h.trace().into(),
                chi.into(),
                rel.into(),
            ]);
        }
        out.assertions.push(Assertion::at_most(
            format!("trace vs character n={n}"),
            worst,
            TRACE_TOL,
        ));
    }

    let mut weights = Table::new(
        "weights",
        &["n", "theta", "k", "re", "im", "expected_re", "expected_im"],
    );
    let mut rng_w = rng(cfg.seed, 3);
    for &n in &cfg.n {
        let theta = rng_w.gen_range(0.1..0.9 * PI / n as f64);
        let x0 = Point::from_xy(rng_w.gen_range(-1.0..1.0), rng_w.gen_range(0.5..2.0))?;
        let w = circle_weights(theta, n, x0)?;
        let mut worst = 0.0f64;
        for (i, z) in w.iter().enumerate() {
            let k = i as i64 - n as i64;
            let e = Complex64::from_polar(1.0, k as f64 * theta);
            worst = worst.max((z - e).norm());
            weights.push(vec![
                n.into(),
                theta.into(),
                k.into(),
                z.re.into(),
                z.im.into(),
                e.re.into(),
                e.im.into(),
            ]);
        }
        out.assertions.push(Assertion::at_most(
            format!("circle weights n={n}"),
            worst,
            WEIGHT_TOL,
        ));
    }

    let (even, table) = even_dimensions(cfg.seed, cfg.samples.max(100))?;
    out.merge(even);
    out.tables = vec![traces, weights, table];
    Ok(out)
}

/// Odd symmetric powers have no eigenvalue 1, so every affine lift has a
/// unique fixed point.
pub fn even_dimensions(seed: u64, samples: usize) -> Result<(Outcome, Table)> {
    let mut out = Outcome::default();
    let mut table = Table::new(
        "even",
        &[
            "degree",
            "sample",
            "a",
            "min_gap",
            "gap_bound",
            "fixed_point_residual",
        ],
    );
    let mut rng = rng(seed, 4);
    for degree in EVEN_DEGREES {
        let mut worst_gap = f64::INFINITY;
        let mut worst_fix = 0.0f64;
        for k in 0..samples {
            let g = random_hyperbolic(&mut rng);
            let a = dominant_eigenvalue(&g)?;
            let m = sym_power_matrix(&g, degree);
            let gap = m
                .clone()
                .schur()
                .complex_eigenvalues()
                .iter()
                .map(|z| (z - 1.0).norm())
                .fold(f64::INFINITY, f64::min);
            let bound = (a - 1.0) / (2.0 * a);
            let phi = AffineIsometry::from_parts(m, random_vector(&mut rng, degree + 1));
            let x = affine_fixed_point(&phi)?;
            let fix = (phi.apply(&x) - &x).norm();
            worst_gap = worst_gap.min(gap / bound);
            worst_fix = worst_fix.max(fix);
            table.push(vec![
                degree.into(),
                k.into(),
                a.into(),
                gap.into(),
                bound.into(),
                fix.into(),
            ]);
        }
        out.assertions.push(Assertion::at_least(
            format!("spectral gap over bound, degree {degree}"),
            worst_gap,
            1.0,
        ));
        out.assertions.push(Assertion::at_most(
            format!("affine fixed point residual, degree {degree}"),
            worst_fix,
            FIXED_POINT_TOL,
        ));
    }
    Ok((out, table))
}

/// Symmetric power model unless the translations come from the flat bundle.
#[derive(Debug, Clone, Copy)]
pub enum Model {
    Sym(SymPowerModel),
    Bundle(BundleModel),
}

impl Model {
    pub fn for_config(cfg: &ExperimentConfig, n: usize) -> Model {
        match cfg.translations {
            TranslationMode::Holomorphic => Model::Bundle(BundleModel {
                n,
                basepoint: Point::i(),
                step: cfg.step,
            }),
            _ => Model::Sym(SymPowerModel { n }),
        }
    }
}

impl LinearModel for Model {
    fn form(&self) -> InvariantForm {
        match self {
            Model::Sym(m) => m.form(),
            Model::Bundle(m) => m.form(),
        }
    }

    fn linear(&self, g: &Moebius) -> margulis_core::Result<DMatrix<f64>> {
        match self {
            Model::Sym(m) => m.linear(g),
            Model::Bundle(m) => m.linear(g),
        }
    }

    fn geodesic_reference(&self, g: &Moebius) -> margulis_core::Result<DVector<f64>> {
        match self {
            Model::Sym(m) => m.geodesic_reference(g),
            Model::Bundle(m) => m.geodesic_reference(g),
        }
    }
}

/// Explicit words, or the first `limit` primitive classes up to `maxlen`.
fn word_list(
    cfg: &ExperimentConfig,
    grp: &GroupPresentation,
    limit: Option<usize>,
) -> Result<Vec<Word>> {
    let explicit = cfg.parsed_words(grp.rank())?;
    if !explicit.is_empty() {
        return Ok(explicit);
    }
    let words = enumerate_conjugacy_classes(grp, cfg.maxlen)
        .into_iter()
        .filter(|c| c.primitive)
        .map(|c| c.word)
        .take(limit.unwrap_or(usize::MAX))
        .collect();
    Ok(words)
}

/// The Poincaré series of weight `n + 1` on the genus-2 group.
pub fn series(cfg: &ExperimentConfig, n: usize) -> Result<QDifferential> {
    Ok(poincare_qdiff(
        &genus2_group(),
        n as u32 + 1,
        cfg.seed_degree,
        cfg.depth,
    )?)
}

/// Translation parts of the generators' affine holonomy for the form built
/// from `omega`.
pub fn holomorphic_translations(
    grp: &GroupPresentation,
    omega: &QDifferential,
    n: usize,
    step: f64,
) -> Result<Vec<DVector<f64>>> {
    let alpha = phi_map(omega, n)?;
    (1..=grp.rank() as i32)
        .map(|k| {
            Ok(affine_holonomy(&Word::generator(k), grp, &alpha, Point::i(), step)?.translation)
        })
        .collect()
}

fn translations(
    cfg: &ExperimentConfig,
    grp: &GroupPresentation,
    n: usize,
) -> Result<Vec<DVector<f64>>> {
    let dim = 2 * n + 1;
    Ok(match cfg.translations {
        TranslationMode::Zero => vec![DVector::zeros(dim); grp.rank()],
        TranslationMode::Random => {
            let mut r = rng(cfg.seed, 100 + n as u64);
            (0..grp.rank())
                .map(|_| random_vector(&mut r, dim))
                .collect()
        }
        TranslationMode::Holomorphic => {
            holomorphic_translations(grp, &series(cfg, n)?, n, cfg.step)?
        }
    })
}

pub fn margulis(cfg: &ExperimentConfig) -> Result<Outcome> {
    let grp = cfg.group()?;
    let words = word_list(cfg, &grp, Some(cfg.samples))?;
    let mut out = Outcome::default();
    let mut table = Table::new(
        "invariants",
        &[
            "n",
            "word",
            "mu",
            "mu_inverse",
            "parity_residual",
            "basepoint_residual",
            "power_residual",
        ],
    );
    let mut rng_x = rng(cfg.seed, 5);
    for &n in &cfg.n {
        let model = Model::for_config(cfg, n);
        let form = model.form();
        let tau = translations(cfg, &grp, n)?;
        let gens = AffineGenerators::new(&grp, &model, &tau)?;
        let mut all = words.clone();
        all.extend(words.iter().map(Word::inverse));
        let inv = analyse_words(
            &grp,
            &model,
            &tau,
            &all,
            ConventionKind::FuchsianGeodesic,
            cfg.epsilon,
        )?;
        let (fwd, back) = inv.split_at(words.len());
        // dim 4p+3: μ(γ⁻¹) = μ(γ); dim 4p+1: μ(γ⁻¹) = −μ(γ)
        let sign = if n % 2 == 1 { -1.0 } else { 1.0 };
        let (mut worst_parity, mut worst_base, mut worst_power) = (0.0f64, 0.0f64, 0.0f64);
        for (w, (a, b)) in words.iter().zip(fwd.iter().zip(back)) {
            let parity = (b.mu + sign * a.mu).abs();
            let phi = gens.extend(w)?;
            let reference = model.geodesic_reference(&evaluate(w, &grp)?)?;
            let (base, power) = well_definedness(&phi, &form, reference, &mut rng_x, true)?;
            worst_parity = worst_parity.max(parity);
            worst_base = worst_base.max(base);
            worst_power = worst_power.max(power);
            table.push(vec![
                n.into(),
                w.to_string().into(),
                a.mu.into(),
                b.mu.into(),
                parity.into(),
                base.into(),
                power.into(),
            ]);
        }
        let dim = 2 * n + 1;
        let law = if n % 2 == 1 {
            "mu(inv) - mu"
        } else {
            "mu(inv) + mu"
        };
        out.assertions.push(Assertion::at_most(
            format!("parity {law}, dim {dim}"),
            worst_parity,
            PARITY_TOL,
        ));
        out.assertions.push(Assertion::at_most(
            format!("base-point independence relative to |A||x||v|, dim {dim}"),
            worst_base,
            BASEPOINT_TOL,
        ));
        out.assertions.push(Assertion::at_most(
            format!("power law relative to |t(phi^k)||v|, dim {dim}"),
            worst_power,
            POWER_TOL,
        ));
    }
    let (elements, element_table) = random_elements(cfg.seed, ELEMENT_SAMPLES)?;
    out.merge(elements);
    out.note(
        "words",
        words.iter().map(Word::to_string).collect::<Vec<_>>(),
    );
    out.tables = vec![table, element_table];
    Ok(out)
}

/// Largest `|μ_x − μ₀|` over three random base points and largest
/// `|μ(φᵏ) − kμ(φ)|` for `k ≤ 4`, computed from the explicit matrices. With
/// `relative` each is divided by its roundoff scale, `max(1, ‖A‖‖x‖‖v‖)` and
/// `max(1, ‖τ(φᵏ)‖‖v‖)`.
pub fn well_definedness<R: Rng + ?Sized>(
    phi: &AffineIsometry,
    form: &InvariantForm,
    reference: DVector<f64>,
    rng: &mut R,
    relative: bool,
) -> Result<(f64, f64)> {
    let conv = Convention::FuchsianGeodesic(reference);
    let v = neutral_vector(&phi.linear, form, &conv)?;
    let mu0 = margulis_invariant(phi, form, &conv)?;
    let scale = |s: f64| if relative { s.max(1.0) } else { 1.0 };
    let mut base = 0.0f64;
    for _ in 0..3 {
        let x = random_vector(rng, form.dim());
        let d = (margulis_invariant_at(phi, form, &conv, &x)? - mu0).abs();
        base = base.max(d / scale(phi.linear.norm() * x.norm() * v.norm()));
    }
    let mut power = 0.0f64;
    for k in 2..=MAX_POWER {
        let pk = phi.pow(k);
        let d = (margulis_invariant(&pk, form, &conv)? - k as f64 * mu0).abs();
        power = power.max(d / scale(pk.translation.norm() * v.norm()));
    }
    Ok((base, power))
}

/// Base-point independence and the power law with absolute tolerances, for
/// random hyperbolic elements of `Sym²` (dimension 3) with random translations.
pub fn random_elements(seed: u64, samples: usize) -> Result<(Outcome, Table)> {
    let mut out = Outcome::default();
    let mut table = Table::new(
        "elements",
        &[
            "sample",
            "translation_length",
            "mu",
            "basepoint_residual",
            "power_residual",
        ],
    );
    let mut rng = rng(seed, 6);
    let model = SymPowerModel { n: 1 };
    let form = model.form();
    let (mut worst_base, mut worst_power) = (0.0f64, 0.0f64);
    for k in 0..samples {
        let g = random_hyperbolic(&mut rng);
        let t = random_vector(&mut rng, form.dim());
        let phi = AffineIsometry::new(model.linear(&g)?, t, &form)?;
        let reference = model.geodesic_reference(&g)?;
        let mu = margulis_invariant(
            &phi,
            &form,
            &Convention::FuchsianGeodesic(reference.clone()),
        )?;
        let (base, power) = well_definedness(&phi, &form, reference, &mut rng, false)?;
        worst_base = worst_base.max(base);
        worst_power = worst_power.max(power);
        let len = 2.0 * dominant_eigenvalue(&g)?.ln();
        table.push(vec![
            k.into(),
            len.into(),
            mu.into(),
            base.into(),
            power.into(),
        ]);
    }
    out.assertions.push(Assertion::at_most(
        "base-point independence, random elements, dim 3",
        worst_base,
        BASEPOINT_TOL,
    ));
    out.assertions.push(Assertion::at_most(
        "mu(phi^k) - k mu(phi), k <= 4, random elements, dim 3",
        worst_power,
        POWER_TOL,
    ));
    Ok((out, table))
}

fn certificate_json(n: usize, c: &ObstructionCertificate) -> serde_json::Value {
    json!({
        "n": n,
        "word1": c.word1.to_string(),
        "word2": c.word2.to_string(),
        "mu1": c.mu1,
        "mu2": c.mu2,
        "margin": c.margin,
        "general_position": c.general_position,
        "verdict": format!("{:?}", c.verdict).to_lowercase(),
        "general_position_tolerance": GENERAL_POSITION_TOL,
    })
}

fn negated(inv: &[WordInvariant]) -> Vec<WordInvariant> {
    inv.iter()
        .map(|w| WordInvariant {
            mu: -w.mu,
            ..w.clone()
        })
        .collect()
}

fn certificate_row(n: usize, c: &ObstructionCertificate) -> Vec<Cell> {
    vec![
        n.into(),
        c.word1.to_string().into(),
        c.word2.to_string().into(),
        c.mu1.into(),
        c.mu2.into(),
        c.margin.into(),
        (c.general_position as usize).into(),
        format!("{:?}", c.verdict).to_lowercase().into(),
    ]
}

const CERTIFICATE_HEADER: [&str; 8] = [
    "n",
    "word1",
    "word2",
    "mu1",
    "mu2",
    "margin",
    "general_position",
    "verdict",
];

pub fn obstruct(cfg: &ExperimentConfig) -> Result<Outcome> {
    let grp = cfg.group()?;
    let words = word_list(cfg, &grp, None)?;
    let mut out = Outcome::default();
    let mut table = Table::new("invariants", &["n", "word", "mu"]);
    let mut certs = Table::new("certificates", &CERTIFICATE_HEADER);
    let mut found = Vec::new();
    for &n in &cfg.n {
        let model = Model::for_config(cfg, n);
        let tau = translations(cfg, &grp, n)?;
        let inv = analyse_words(
            &grp,
            &model,
            &tau,
            &words,
            ConventionKind::FuchsianGeodesic,
            cfg.epsilon,
        )?;
        for w in &inv {
            table.push(vec![n.into(), w.word.to_string().into(), w.mu.into()]);
        }
        let cert = scan_pairs(&inv)?;
        let flipped = scan_pairs(&negated(&inv))?;
        out.assertions.push(Assertion::holds(
            format!("verdict unchanged under global sign flip, n={n}"),
            cert.as_ref().map(|c| (&c.word1, &c.word2, c.verdict))
                == flipped.as_ref().map(|c| (&c.word1, &c.word2, c.verdict)),
        ));
        if cfg.translations == TranslationMode::Zero {
            let zero_pair = cert
                .as_ref()
                .is_some_and(|c| c.mu1 == 0.0 && c.mu2 == 0.0 && c.verdict == Verdict::Obstructed);
            out.assertions.push(Assertion::holds(
                format!("zero translations give a mu = 0 certificate, n={n}"),
                zero_pair,
            ));
        }
        if let Some(c) = &cert {
            certs.push(certificate_row(n, c));
            found.push(certificate_json(n, c));
        }
    }
    out.note("words", words.len());
    out.note("certificates", found);
    out.tables = vec![table, certs];
    Ok(out)
}

pub fn survey(cfg: &ExperimentConfig) -> Result<Outcome> {
    let grp = genus2_group();
    let mut out = Outcome::default();
    let mut tables = Vec::new();
    let mut certs = Table::new("certificates", &CERTIFICATE_HEADER);
    let mut found = Vec::new();
    for (i, &n) in cfg.n.iter().enumerate() {
        let omega = series(cfg, n)?;
        out.merge(closedness(&omega, n)?);

        let opts = SurveyOptions {
            maxlen: cfg.maxlen,
            max_classes: cfg.samples,
            step: cfg.step,
            ..SurveyOptions::default()
        };
        let s = geodesic_sign_survey(&grp, &omega, n, &opts)?;
        let name = if i == 0 {
            String::from("survey")
        } else {
            format!("n{n}")
        };
        let mut t = Table::new(
            name,
            &["word", "length", "integral_f", "mu_direct", "mu_integral"],
        );
        for r in &s.reports {
            t.push(vec![
                r.word.to_string().into(),
                r.length.into(),
                r.integral_f.into(),
                r.mu_direct.into(),
                r.mu_integral.into(),
            ]);
        }
        tables.push(t);
        let gap = max(s
            .reports
            .iter()
            .map(|r| (r.mu_direct - r.mu_integral).abs()));
        out.assertions.push(Assertion::at_most(
            format!("mu transport vs integral, n={n}"),
            gap,
            INTEGRAL_TOL,
        ));
        out.assertions.push(Assertion::holds(
            format!("both signs of the geodesic integral, n={n}"),
            s.both_signs(),
        ));
        let ratios = s.ratios(RATIO_MIN_INTEGRAL);
        out.assertions.push(Assertion::at_least(
            format!("words in the ratio, n={n}"),
            ratios.len() as f64,
            RATIO_MIN_WORDS as f64,
        ));
        let spread = relative_spread(&ratios);
        out.assertions.push(Assertion::at_most(
            format!("relative spread of mu / integral, n={n}"),
            spread,
            RATIO_SPREAD,
        ));
        let mean = ratios.iter().sum::<f64>() / ratios.len().max(1) as f64;
        out.note(
            &format!("n{n}"),
            json!({
                "classes": s.reports.len(),
                "positive": s.positive,
                "negative": s.negative,
                "zero": s.zero,
                "reached_length": s.reached_length,
                "ratio_mean": mean,
                "ratio_words": ratios.len(),
                "equivariance_depth": omega.depth(),
                "series_terms": omega.term_count(),
            }),
        );

        // Only words whose integral has a definite sign enter the scan.
        let signed: Vec<Word> = s
            .reports
            .iter()
            .filter(|r| r.integral_f.abs() > opts.zero_tol)
            .map(|r| r.word.clone())
            .collect();
        let model = BundleModel {
            n,
            basepoint: Point::i(),
            step: cfg.step,
        };
        let tau = holomorphic_translations(&grp, &omega, n, cfg.step)?;
        let inv = analyse_words(
            &grp,
            &model,
            &tau,
            &signed,
            ConventionKind::FuchsianGeodesic,
            cfg.epsilon,
        )?;
        let cert = scan_pairs(&inv)?;
        let flipped = scan_pairs(&negated(&inv))?;
        out.assertions.push(Assertion::holds(
            format!("certificate in general position, n={n}"),
            cert.as_ref()
                .is_some_and(|c| c.general_position && c.verdict == Verdict::Obstructed),
        ));
        out.assertions.push(Assertion::holds(
            format!("verdict unchanged under global sign flip, n={n}"),
            cert.as_ref().map(|c| c.verdict) == flipped.as_ref().map(|c| c.verdict),
        ));
        if let Some(c) = &cert {
            certs.push(certificate_row(n, c));
            found.push(certificate_json(n, c));
        }
    }
    let (sections, section_table) = neutral_sections(cfg.step)?;
    out.merge(sections);
    out.note("certificates", found);
    tables.push(certs);
    tables.push(section_table);
    out.tables = tables;
    Ok(out)
}

/// Closedness of `Φ(ω)` at three base points, its order under halving of the
/// mesh, and the same check failing for the plain complex pairing.
pub fn closedness(omega: &QDifferential, n: usize) -> Result<Outcome> {
    let mut out = Outcome::default();
    let alpha = phi_map(omega, n)?;
    let plain = alpha.clone().with_duality(Duality::Plain);
    let h = CLOSEDNESS_STEP;
    let (mut worst, mut order, mut control) = (0.0f64, f64::INFINITY, f64::INFINITY);
    for z in basepoints() {
        let r = closedness_residual(&alpha, z, h);
        let r_half = closedness_residual(&alpha, z, 0.5 * h);
        worst = worst.max(r);
        order = order.min((r / r_half).log2());
        control = control.min(closedness_residual(&plain, z, h));
    }
    out.assertions.push(Assertion::at_most(
        format!("closedness residual at h={h}, n={n}"),
        worst,
        CLOSEDNESS_TOL,
    ));
    out.assertions.push(Assertion::at_least(
        format!("closedness order, n={n}"),
        order,
        ORDER_TOL,
    ));
    out.assertions.push(Assertion::at_least(
        format!("plain pairing is not closed, n={n}"),
        control,
        CONTROL_NOT_CLOSED,
    ));
    Ok(out)
}

/// Parallelism of the neutral section for `n = 2p + 1`, and the expected
/// failure of the product coefficients for `p ≥ 1`.
pub fn neutral_sections(step: f64) -> Result<(Outcome, Table)> {
    let mut out = Outcome::default();
    let mut table = Table::new(
        "sections",
        &["p", "n", "norm_sq", "drift_recurrence", "drift_product"],
    );
    let c = Geodesic::from_map(
        Moebius::carrying_i_to(Point::from_xy(0.3, 0.8)?) * Moebius::rotation(0.7),
        1.0,
    );
    for p in SECTION_P {
        let n = 2 * p + 1;
        let s = neutral_section(&c, n)?;
        let drift = section_drift(&s, 1.0, step)?;
        let product = odd_section(&c, n, &product_coefficients(n)?);
        let drift_product = section_drift(&product, 1.0, step)?;
        out.assertions.push(Assertion::at_most(
            format!("neutral section drift, p={p}"),
            drift,
            SECTION_TOL,
        ));
        out.assertions.push(Assertion::at_least(
            format!("neutral section norm, p={p}"),
            s.norm_sq(),
            f64::MIN_POSITIVE,
        ));
        if p >= 1 {
            out.assertions.push(Assertion::at_least(
                format!("product coefficients are not parallel, p={p}"),
                drift_product,
                SECTION_FAIL,
            ));
        }
        table.push(vec![
            p.into(),
            n.into(),
            s.norm_sq().into(),
            drift.into(),
            drift_product.into(),
        ]);
    }
    Ok((out, table))
}

pub fn symmetry(cfg: &ExperimentConfig) -> Result<Outcome> {
    let grp = genus2_group();
    let mut out = Outcome::default();
    let mut table = Table::new(
        "symmetry",
        &[
            "n",
            "q",
            "beta_samples",
            "beta_max_residual",
            "max_abs_f",
            "mc_samples",
            "mc_mean",
            "mc_stderr",
            "mc_proposals",
        ],
    );
    for &n in &cfg.n {
        let omega = series(cfg, n)?;
        let q = omega.q();
        let beta = beta_rotation(q);
        let mut r = rng(cfg.seed, 200 + n as u64);
        let (mut worst, mut biggest) = (0.0f64, 0.0f64);
        for _ in 0..BETA_SAMPLES {
            let u = sample_unit_tangent(&grp, &mut r)?;
            let f = f_observable(&omega, &u)?;
            let fb = f_observable(&omega, &u.rotated(beta))?;
            worst = worst.max((fb + f).abs());
            biggest = biggest.max(f.abs());
        }
        let mc = monte_carlo_mean(&omega, &grp, cfg.samples, &mut r)?;
        if mc.stderr.is_nan() || mc.stderr <= 0.0 {
            bail!("Monte Carlo standard error is zero; f vanishes identically");
        }
        out.assertions.push(Assertion::at_most(
            format!("f(beta u) + f(u), q={q}"),
            worst,
            BETA_TOL,
        ));
        out.assertions.push(Assertion::at_most(
            format!("|mean f| in standard errors, q={q}"),
            mc.mean.abs() / mc.stderr,
            MC_SIGMAS,
        ));
        table.push(vec![
            n.into(),
            (q as usize).into(),
            BETA_SAMPLES.into(),
            worst.into(),
            biggest.into(),
            mc.samples.into(),
            mc.mean.into(),
            mc.stderr.into(),
            mc.proposals.into(),
        ]);
    }
    out.tables.push(table);
    Ok(out)
}
