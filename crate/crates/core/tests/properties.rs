use margulis_core::cocycle::{
    beta_rotation, f_observable, phi_map, poincare_qdiff, BundleForm, QDifferential,
};
use margulis_core::flatbundle::{
    bundle_metric, parallel_transport, Path, PathTransport, SectionCoords,
};
use margulis_core::fuchsian::{evaluate, genus2_group, schottky_group, Word};
use margulis_core::halfplane::{
    distance, frame_cocycle, moebius_act, Curve, Geodesic, Moebius, Point, UnitTangent,
};
use margulis_core::margulis::{
    analyse_words, margulis_invariant, AffineGenerators, Convention, ConventionKind, LinearModel,
    SymPowerModel,
};
use margulis_core::symrep::{sym_power_rep, InvariantForm};
use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::OnceLock;

fn moebius() -> impl Strategy<Value = Moebius> {
    (0.0..6.3f64, 0.0..3.0f64, 0.0..6.3f64)
        .prop_map(|(a, t, b)| Moebius::rotation(a) * Moebius::boost(t) * Moebius::rotation(b))
}

fn hyperbolic() -> impl Strategy<Value = Moebius> {
    (
        0.0..6.3f64,
        0.3..2.5f64,
        0.0..6.3f64,
        -1.0..1.0f64,
        0.3..3.0f64,
    )
        .prop_map(|(a, t, b, x, y)| {
            let h = Moebius::rotation(a)
                * Moebius::carrying_i_to(Point::from_xy(x, y).unwrap())
                * Moebius::rotation(b);
            Moebius::boost(t).conjugate_by(&h)
        })
}

fn point() -> impl Strategy<Value = Point> {
    (-3.0..3.0f64, 0.1..5.0f64).prop_map(|(x, y)| Point::from_xy(x, y).unwrap())
}

fn word(rank: i32, max: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec((1..=rank, any::<bool>()), 1..=max)
        .prop_map(|v| Word::new(v.into_iter().map(|(k, s)| if s { k } else { -k })))
        .prop_filter("non-empty after reduction", |w| !w.is_empty())
}

fn section(n: usize) -> impl Strategy<Value = SectionCoords> {
    (
        -1.0..1.0f64,
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n),
    )
        .prop_map(|(c0, v)| {
            SectionCoords::new(
                c0,
                v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect(),
            )
        })
}

fn genus2_series() -> &'static QDifferential {
    static OMEGA: OnceLock<QDifferential> = OnceLock::new();
    OMEGA.get_or_init(|| poincare_qdiff(&genus2_group(), 2, 0, 3).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn moebius_preserves_distance(g in moebius(), p in point(), q in point()) {
        let d0 = distance(p, q);
        let d1 = distance(moebius_act(&g, p), moebius_act(&g, q));
        prop_assert!((d0 - d1).abs() <= 1e-10 * d0.max(1.0));
    }

    #[test]
    fn frame_cocycle_is_unimodular_and_multiplicative(g in moebius(), h in moebius(), p in point()) {
        let u = frame_cocycle(&(g * h), p);
        let v = frame_cocycle(&g, moebius_act(&h, p)) * frame_cocycle(&h, p);
        prop_assert!((u.norm() - 1.0).abs() <= 1e-14);
        prop_assert!((u - v).norm() <= 1e-12);
    }

    #[test]
    fn geodesics_have_unit_speed(p in point(), angle in 0.0..6.3f64, t in 0.0..4.0f64) {
        let c = Geodesic::from_unit_tangent(&UnitTangent::from_angle(p, angle), 4.0);
        let speed = c.velocity(t).norm() / c.point(t).im;
        prop_assert!((speed - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn evaluate_is_a_homomorphism(u in word(4, 6), v in word(4, 6)) {
        let grp = genus2_group();
        let lhs = evaluate(&u.concat(&v), &grp).unwrap();
        let rhs = evaluate(&u, &grp).unwrap() * evaluate(&v, &grp).unwrap();
        let scale = lhs.entries().iter().fold(1.0f64, |m, x| m.max(x.abs()));
        prop_assert!(lhs.distance_to(&rhs) <= 1e-10 * scale * scale);
    }

    #[test]
    fn word_inverse_and_rotation(w in word(3, 10), k in 0usize..10) {
        prop_assert_eq!(w.inverse().inverse(), w.clone());
        prop_assert!(w.concat(&w.inverse()).is_empty());
        let c = w.cyclically_reduced();
        if !c.is_empty() {
            prop_assert_eq!(c.rotate(k % c.len()).min_rotation(), c.min_rotation());
        }
    }

    #[test]
    fn symmetric_powers_are_form_preserving_homomorphisms(g in moebius(), h in moebius(), n in 1usize..=5) {
        let gh = sym_power_rep(&(g * h), n).matrix;
        let prod = sym_power_rep(&g, n).matrix * sym_power_rep(&h, n).matrix;
        prop_assert!((&gh - &prod).norm() <= 1e-8 * gh.norm().max(1.0));
        prop_assert!(InvariantForm::symmetric_power(n).preservation_residual(&gh) <= 1e-12);
    }

    #[test]
    fn loxodromic_images_have_one_fixed_line(g in hyperbolic(), n in 1usize..=4) {
        let m = sym_power_rep(&g, n).matrix;
        let eig = m.clone().schur().complex_eigenvalues();
        let mut re: Vec<f64> = eig.iter().map(|z| z.re).collect();
        prop_assert!(eig.iter().all(|z| z.im.abs() <= 1e-8 * z.re.abs().max(1.0)));
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let ones = re.iter().filter(|x| (*x - 1.0).abs() <= 1e-6).count();
        prop_assert_eq!(ones, 1);
        prop_assert!(re.windows(2).all(|w| w[1] - w[0] > 1e-9 * w[1].abs().max(1.0)));
    }

    #[test]
    fn phi_is_real_linear(p in point(), a in -2.0..2.0f64, b in -2.0..2.0f64,
                          x in (-1.0..1.0f64, -1.0..1.0f64), y in (-1.0..1.0f64, -1.0..1.0f64)) {
        let alpha = phi_map(genus2_series(), 1).unwrap();
        let (x, y) = (Complex64::new(x.0, x.1), Complex64::new(y.0, y.1));
        let lhs = alpha.value(p.z(), x * a + y * b);
        let rhs = alpha.value(p.z(), x) * a + alpha.value(p.z(), y) * b;
        prop_assert!((&lhs - &rhs).norm() <= 1e-12 * lhs.norm().max(1.0));
    }

    #[test]
    fn beta_rotation_negates_f(p in point(), angle in 0.0..6.3f64) {
        let om = genus2_series();
        let u = UnitTangent::from_angle(p, angle);
        let f = f_observable(om, &u).unwrap();
        let g = f_observable(om, &u.rotated(beta_rotation(om.q()))).unwrap();
        prop_assert!((f + g).abs() <= 1e-12 * f.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn transport_preserves_the_metric(p in point(), q in point(), n in 1usize..=4,
                                      y in section(4), z in section(4)) {
        prop_assume!(distance(p, q) > 1e-3 && distance(p, q) < 2.0);
        let y = SectionCoords::new(y.c0, y.ck[..n].to_vec());
        let z = SectionCoords::new(z.c0, z.ck[..n].to_vec());
        let pt = PathTransport::new(Path::polygon(&[p, q]).unwrap(), 1e-3).unwrap();
        let py = parallel_transport(n, &pt, &y).unwrap();
        let pz = parallel_transport(n, &pt, &z).unwrap();
        let before = bundle_metric(&y, &z).unwrap();
        let after = bundle_metric(&py, &pz).unwrap();
        prop_assert!((before - after).abs() <= 1e-8 * distance(p, q));
    }

    #[test]
    fn invariant_is_conjugation_covariant(w in word(2, 3), u in word(2, 3), n in 1usize..=3,
                                          seed in prop::collection::vec(-1.0..1.0f64, 14)) {
        let grp = schottky_group(2.0, 1.0).unwrap();
        let model = SymPowerModel { n };
        let dim = 2 * n + 1;
        let tr: Vec<DVector<f64>> = (0..2).map(|k| DVector::from_column_slice(&seed[k * 7..k * 7 + dim])).collect();
        let gens = AffineGenerators::new(&grp, &model, &tr).unwrap();
        let form = model.form();
        let w = w.cyclically_reduced();
        prop_assume!(!w.is_empty());
        let conj = u.concat(&w).concat(&u.inverse());
        let mu = |x: &Word| {
            let conv = Convention::FuchsianGeodesic(model.geodesic_reference(&evaluate(x, &grp).unwrap()).unwrap());
            margulis_invariant(&gens.extend(x).unwrap(), &form, &conv).unwrap()
        };
        let (a, b) = (mu(&w), mu(&conj));
        let scale = gens.extend(&conj).unwrap().linear.norm() * tr.iter().map(|t| t.norm()).sum::<f64>();
        prop_assert!((a - b).abs() <= 1e-10 * scale.max(1.0), "{} {}", a, b);
    }

    #[test]
    fn global_sign_flip_keeps_verdicts(seed in prop::collection::vec(-1.0..1.0f64, 6)) {
        let grp = schottky_group(2.0, 1.0).unwrap();
        let model = SymPowerModel { n: 1 };
        let tr = vec![DVector::from_column_slice(&seed[..3]), DVector::from_column_slice(&seed[3..])];
        let words: Vec<Word> = ["a", "b", "ab", "aB", "aab", "abb"].iter().map(|s| s.parse().unwrap()).collect();
        let plus = analyse_words(&grp, &model, &tr, &words, ConventionKind::FuchsianGeodesic, 1.0).unwrap();
        let minus = analyse_words(&grp, &model, &tr, &words, ConventionKind::FuchsianGeodesic, -1.0).unwrap();
        for (p, m) in plus.iter().zip(&minus) {
            prop_assert_eq!(p.mu, -m.mu);
        }
        let vp = margulis_core::margulis::scan_pairs(&plus).unwrap().map(|c| (c.word1, c.word2, c.verdict));
        let vm = margulis_core::margulis::scan_pairs(&minus).unwrap().map(|c| (c.word1, c.word2, c.verdict));
        prop_assert_eq!(vp, vm);
    }
}
