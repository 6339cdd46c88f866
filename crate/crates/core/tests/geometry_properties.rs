use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;
use rotodiff_core::localization::*;
use rotodiff_core::rotor::*;

fn angles() -> impl Strategy<Value = EulerAngles> {
    (0.0..2.0 * PI, 0.0..PI, 0.0..2.0 * PI).prop_map(|(a, b, g)| EulerAngles::new(a, b, g))
}

fn unit() -> impl Strategy<Value = UnitVector> {
    (-1.0..1.0f64, 0.0..2.0 * PI).prop_map(|(z, phi)| {
        let s = (1.0 - z * z).sqrt();
        UnitVector::new(Vector3::new(s * phi.cos(), s * phi.sin(), z)).unwrap()
    })
}

fn spec() -> impl Strategy<Value = AnisotropySpec> {
    (0.0..3.0f64, unit(), prop::array::uniform3(-2.0..2.0f64), angles()).prop_map(|(a, dir, b, frame)| {
        let r = frame.to_rotation();
        let axes = [UnitVector::x(), UnitVector::y(), UnitVector::z()].map(|e| e.rotated(&r));
        AnisotropySpec::new(a, dir, b, axes).unwrap()
    })
}

fn sorted_eigenvalues(m: &Matrix3<f64>) -> [f64; 3] {
    let mut e: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    [e[0], e[1], e[2]]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn rotations_are_proper_orthogonal(e in angles()) {
        let r = e.to_rotation();
        prop_assert!(orthogonality_defect(r.matrix()) < 1e-12);
        prop_assert!((r.matrix().determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn euler_angles_round_trip(e in angles()) {
        let r = e.to_rotation();
        let back = r.to_euler().to_rotation();
        prop_assert!((r.matrix() - back.matrix()).amax() < 1e-10);
    }

    #[test]
    fn body_axes_form_a_right_handed_triad(e in angles()) {
        let (n1, n2, n3) = body_axes(e);
        prop_assert!(n1.dot(&n2).abs() < 1e-12 && n2.dot(&n3).abs() < 1e-12 && n1.dot(&n3).abs() < 1e-12);
        prop_assert!((n1.as_vector().cross(n2.as_vector()) - n3.as_vector()).norm() < 1e-12);
        prop_assert!((n3.as_vector() - e.to_rotation().apply(&Vector3::z())).norm() < 1e-15);
    }

    #[test]
    fn nodal_line_is_horizontal(alpha in -10.0..10.0f64) {
        prop_assert_eq!(nodal_line(alpha).as_vector().z, 0.0);
    }

    #[test]
    fn rates_are_nonnegative_and_vanish_on_the_diagonal(s in spec(), e in angles(), ep in angles()) {
        prop_assert!(localization_rate_f1(&s, e, ep, 1.0) >= 0.0);
        prop_assert!(localization_rate_f2(&s, e, ep, 1.0) >= -1e-12);
        prop_assert_eq!(localization_rate_f1(&s, e, e, 1.0), 0.0);
        prop_assert!(localization_rate_f2(&s, e, e, 1.0).abs() < 1e-15);
    }

    #[test]
    fn rates_depend_on_relative_orientation_only(s in spec(), e in angles(), ep in angles(), g in angles()) {
        let shift = g.to_rotation();
        let (r, rp) = (e.to_rotation(), ep.to_rotation());
        let (sr, srp) = (shift.compose(&r), shift.compose(&rp));
        let f1 = localization_rate_f1(&s, r, rp, 1.0);
        let f2 = localization_rate_f2(&s, r, rp, 1.0);
        prop_assert!((f1 - localization_rate_f1(&s, sr, srp, 1.0)).abs() < 1e-12 * (1.0 + f1));
        prop_assert!((f2 - localization_rate_f2(&s, sr, srp, 1.0)).abs() < 1e-12 * (1.0 + f2));
    }

    #[test]
    fn pi_rotation_about_b3_is_invisible_to_f2(s in spec(), e in angles()) {
        let r = e.to_rotation();
        let b3 = s.b_axes_at(&r)[2];
        let rp = axis_angle_rotation(&b3, PI).compose(&r);
        // the rotated axes are ±bᵢ, so every cross product vanishes
        prop_assert!(localization_rate_f2(&s, r, rp, 1.0).abs() < 1e-12);
    }

    #[test]
    fn at_most_one_quadratic_weight_is_negative(b in prop::array::uniform3(-5.0..5.0f64)) {
        let s = AnisotropySpec::principal(0.0, UnitVector::z(), b);
        let f = diffusion_constants(&s, 1.0).f_coefficients();
        prop_assert!(f.iter().filter(|&&x| x < 0.0).count() <= 1);
    }

    #[test]
    fn orthonormal_set_identity(e in angles(), c in unit()) {
        let (n1, n2, n3) = body_axes(e);
        let sum: f64 = [n1, n2, n3].iter().map(|n| n.as_vector().cross(c.as_vector()).norm_squared()).sum();
        prop_assert!((sum - 2.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_spectra_are_orientation_independent(s in spec(), e in angles(), hbar in 0.1..3.0f64) {
        let d = diffusion_constants(&s, hbar);
        let t1 = diffusion_tensor_d1(&s, e, hbar);
        let t2 = diffusion_tensor_d2(&s, e, hbar);
        let scale = 1.0 + d.d1 + d.d2.iter().sum::<f64>();
        let ev1 = sorted_eigenvalues(t1.matrix());
        for (a, b) in ev1.iter().zip([0.0, d.d1, d.d1]) {
            prop_assert!((a - b).abs() < 1e-12 * scale);
        }
        let mut want = d.d2;
        want.sort_by(f64::total_cmp);
        for (a, b) in sorted_eigenvalues(t2.matrix()).iter().zip(want) {
            prop_assert!((a - b).abs() < 1e-12 * scale);
        }
        prop_assert!((t1.matrix() * s.a_at(&e.to_rotation()).as_vector()).norm() < 1e-12 * scale);
        let total = (t1 + t2).trace();
        prop_assert!((total - (2.0 * d.d1 + d.d2.iter().sum::<f64>())).abs() < 1e-12 * scale);
    }

    #[test]
    fn planar_rates_are_periodic(d1 in 0.0..5.0f64, d2 in 0.0..5.0f64, a in -7.0..7.0f64, ap in -7.0..7.0f64) {
        let (f1, f2) = localization_rate_planar(d1, d2, a, ap, 1.0);
        let (g1, g2) = localization_rate_planar(d1, d2, a + 2.0 * PI, ap, 1.0);
        let (_, h2) = localization_rate_planar(d1, d2, a + PI, ap, 1.0);
        prop_assert!(f1 >= 0.0 && f2 >= 0.0);
        prop_assert!((f1 - g1).abs() < 1e-12 && (f2 - g2).abs() < 1e-12 && (f2 - h2).abs() < 1e-12);
    }
}
