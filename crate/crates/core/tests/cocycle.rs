use margulis_core::cocycle::{
    bump_section, closedness_residual, margulis_via_integral, neutral_section, phi_map,
    poincare_qdiff, ExactForm, FormSum, QDifferential,
};
use margulis_core::flatbundle::{
    holonomy_rep, parallel_transport, Path, PathTransport, SectionCoords,
};
use margulis_core::fuchsian::{evaluate, genus2_group, Word};
use margulis_core::halfplane::{axis_data, Point};
use num_complex::Complex64;
use std::sync::OnceLock;

fn series(q: u32) -> &'static QDifferential {
    static TWO: OnceLock<QDifferential> = OnceLock::new();
    static FOUR: OnceLock<QDifferential> = OnceLock::new();
    let cell = if q == 2 { &TWO } else { &FOUR };
    cell.get_or_init(|| poincare_qdiff(&genus2_group(), q, 0, 4).unwrap())
}

#[test]
fn neutral_section_is_fixed_by_its_holonomy() {
    let grp = genus2_group();
    let x0 = Point::i();
    for n in [1usize, 3] {
        for w in ["a", "bc", "aD"] {
            let g = evaluate(&w.parse().unwrap(), &grp).unwrap();
            let axis = axis_data(&g).unwrap().axis;
            let s = neutral_section(&axis, n).unwrap();
            let pt = PathTransport::new(Path::polygon(&[axis.start(), x0]).unwrap(), 1e-3).unwrap();
            let v = parallel_transport(n, &pt, &s.at(0.0)).unwrap().to_real();
            let h = holonomy_rep(&g, n, x0, 1e-3).unwrap().matrix;
            let drift = (&h * &v - &v).norm();
            let scale = h.norm() * v.norm();
            assert!(
                drift <= 1e-6 * scale.max(1.0),
                "n={n} {w}: {drift} (scale {scale})"
            );
        }
    }
}

#[test]
fn integral_is_independent_of_the_start_on_the_axis() {
    let grp = genus2_group();
    let alpha = phi_map(series(2), 1).unwrap();
    for w in ["b", "ab", "aaB"] {
        let w: Word = w.parse().unwrap();
        let a = margulis_via_integral(&w, &grp, &alpha, 0.0, 1000).unwrap();
        for s0 in [0.37, 1.9, -2.2] {
            let b = margulis_via_integral(&w, &grp, &alpha, s0, 1000).unwrap();
            assert!((a - b).abs() <= 1e-6, "{w} {s0}: {a} {b}");
        }
    }
}

#[test]
fn exact_forms_do_not_change_the_integral() {
    let grp = genus2_group();
    for (q, n) in [(2u32, 1usize), (4, 3)] {
        let alpha = phi_map(series(q), n).unwrap();
        let w: Word = "ab".parse().unwrap();
        let g = evaluate(&w, &grp).unwrap();
        let data = axis_data(&g).unwrap();
        let centre = data.axis.point_at(0.5 * data.translation_length);
        let value = SectionCoords::new(
            0.7,
            (0..n)
                .map(|k| Complex64::new(1.0 - 0.3 * k as f64, 0.5))
                .collect(),
        );
        let u = ExactForm::new(n, bump_section(centre, 0.8, value));
        let base = margulis_via_integral(&w, &grp, &alpha, 0.0, 1000).unwrap();
        let moved = margulis_via_integral(&w, &grp, &FormSum(&alpha, &u), 0.0, 1000).unwrap();
        let alone = margulis_via_integral(&w, &grp, &u, 0.0, 1000).unwrap();
        assert!((base - moved).abs() <= 1e-6, "n={n}: {base} {moved}");
        assert!(alone.abs() <= 1e-6, "n={n}: {alone}");
    }
}

#[test]
fn closedness_converges_at_second_order() {
    let z = Point::from_xy(-0.2, 0.9).unwrap();
    for (q, n) in [(2u32, 1usize), (4, 3)] {
        let alpha = phi_map(series(q), n).unwrap();
        let r: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&h| closedness_residual(&alpha, z, h))
            .collect();
        let order = (r[1] / r[2]).log2();
        assert!(order >= 1.95, "n={n}: {r:?}");
        assert!(closedness_residual(&alpha, z, 1e-3) <= 1e-4);
    }
}

#[test]
fn integral_is_linear_in_the_form() {
    let grp = genus2_group();
    let a1 = phi_map(series(2), 1).unwrap();
    let a2 = phi_map(&series(2).scaled(Complex64::new(0.3, -1.2)), 1).unwrap();
    let w: Word = "aC".parse().unwrap();
    let sum = margulis_via_integral(&w, &grp, &FormSum(&a1, &a2), 0.0, 1000).unwrap();
    let parts = margulis_via_integral(&w, &grp, &a1, 0.0, 1000).unwrap()
        + margulis_via_integral(&w, &grp, &a2, 0.0, 1000).unwrap();
    assert!((sum - parts).abs() <= 1e-8);
}
