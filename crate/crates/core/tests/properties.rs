//! Property tests for the measure, Herglotz, and parameter-chain invariants.

use num_complex::Complex64;
use proptest::prelude::*;
use rankone_core::herglotz::{
    boundary_value, g_n, inverse_square_moment, inverse_square_moment_exact, transform,
    EnergyClass,
};
use rankone_core::measure::{validate, weighted_integral, AcPiece, Atom, Kernel, Measure};
use rankone_core::params::{
    angle_distance_mod_pi, coupling_from_theta, gamma_from_coupling, theta_from_coupling,
    theta_from_v, v_from_gamma, Coupling, CouplingStrength, GammaParam,
};

/// Strict positivity of `Im F` on the upper half-plane, at the sample count
/// the invariant is stated for.
#[test]
fn herglotz_property_bulk() {
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..10_000 {
        let n_atoms = rng.gen_range(1..=4);
        let atoms: Vec<Atom> = (0..n_atoms)
            .map(|_| Atom {
                x: rng.gen_range(-5.0..5.0),
                w: rng.gen_range(0.01..3.0),
            })
            .collect();
        let m = Measure::from_atoms(atoms);
        let z = num_complex::Complex64::new(rng.gen_range(-6.0..6.0), rng.gen_range(1e-3..4.0));
        let f = transform(&m, z).unwrap();
        assert!(f.value.im > 0.0, "Im F = {} at z = {z}", f.value.im);
    }
}

fn atom_strategy() -> impl Strategy<Value = Atom> {
    (-3.0f64..3.0, 0.01f64..2.0).prop_map(|(x, w)| Atom { x, w })
}

/// Nonnegative cubic density on `[a, a+len]`: `(x-a) * ((qx+r)^2 + s)`.
fn piece_strategy() -> impl Strategy<Value = AcPiece> {
    (
        -2.0f64..2.0,
        0.2f64..1.5,
        -1.0f64..1.0,
        -1.0f64..1.0,
        0.0f64..0.5,
    )
        .prop_map(|(a, len, q, r, s)| {
            let b = a + len;
            // (x-a)((qx+r)^2 + s) = (x-a)(q^2 x^2 + 2qr x + r^2 + s)
            let c2 = q * q;
            let c1 = 2.0 * q * r;
            let c0 = r * r + s;
            AcPiece {
                a,
                b,
                coeffs: [-a * c0, c0 - a * c1, c1 - a * c2, c2],
            }
        })
}

fn measure_strategy() -> impl Strategy<Value = Measure> {
    (
        proptest::collection::vec(atom_strategy(), 1..6),
        proptest::collection::vec(piece_strategy(), 0..3),
    )
        .prop_map(|(atoms, pieces)| Measure::new(atoms, pieces))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn generated_measures_validate(m in measure_strategy()) {
        let report = validate(&m);
        prop_assert!(report.is_valid(), "{:?}", report.violations);
        // mass positivity
        prop_assert!(report.integral_inv_one_plus_sq > 0.0);
    }

    #[test]
    fn herglotz_property(m in measure_strategy(), re in -5.0f64..5.0, im in 0.05f64..5.0) {
        let f = transform(&m, Complex64::new(re, im)).unwrap();
        prop_assert!(f.value.im > 0.0, "Im F = {}", f.value.im);
    }

    #[test]
    fn gn_is_the_scaled_imaginary_part(m in measure_strategy(), lambda in -4.0f64..4.0, k in 0u32..24) {
        let n = 2.0f64.powi(k as i32);
        let g = g_n(&m, lambda, n);
        let f = transform(&m, Complex64::new(lambda, 1.0 / n)).unwrap();
        let rel = (g - n * f.value.im).abs() / g.abs().max(1.0);
        prop_assert!(rel < 1e-12, "relative mismatch {rel}");
    }

    #[test]
    fn gn_monotone_in_n(m in measure_strategy(), lambda in -4.0f64..4.0) {
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=30 {
            let g = g_n(&m, lambda, 2.0f64.powi(k));
            prop_assert!(g >= prev - 1e-13 * prev.abs().max(1.0), "k={k}: {prev} -> {g}");
            prev = g;
        }
    }

    #[test]
    fn convergent_moment_dominates_all_samples(m in measure_strategy(), lambda in -4.0f64..4.0) {
        if let EnergyClass::Convergent { moment, witness } = inverse_square_moment(&m, lambda) {
            prop_assert!(moment >= 0.0);
            // the moment bounds every n the classifier itself sampled
            for k in 0..witness.samples {
                let g = g_n(&m, lambda, 2.0f64.powi(k as i32));
                prop_assert!(g <= moment * (1.0 + 1e-12) + 1e-300);
            }
        }
    }

    #[test]
    fn classifier_moment_matches_closed_form(m in measure_strategy(), lambda in -4.0f64..4.0) {
        // two routes to I(y): the G_n limit the classifier reports and the
        // direct antiderivative evaluation
        if let EnergyClass::Convergent { moment, .. } = inverse_square_moment(&m, lambda) {
            let exact = inverse_square_moment_exact(&m, lambda);
            let rel = (moment - exact).abs() / exact.abs().max(1.0);
            prop_assert!(rel < 1e-8, "moment {moment} vs exact {exact}");
        }
    }

    #[test]
    fn imaginary_part_vanishes_linearly(m in measure_strategy(), lambda in -4.0f64..4.0) {
        if let EnergyClass::Convergent { moment, .. } = inverse_square_moment(&m, lambda) {
            for eps in [1e-3, 1e-6] {
                let f = transform(&m, Complex64::new(lambda, eps)).unwrap();
                prop_assert!(f.value.im.abs() <= eps * moment * (1.0 + 1e-9));
            }
            // the boundary value exists and is real by construction
            prop_assert!(boundary_value(&m, lambda).unwrap().is_finite());
        }
    }

    #[test]
    fn integral_additivity_under_split(
        piece in piece_strategy(),
        frac in 0.1f64..0.9,
        kernel in prop_oneof![Just(Kernel::InvOnePlusSq), Just(Kernel::IdentityOverOnePlusSq)],
    ) {
        let mid = piece.a + frac * (piece.b - piece.a);
        let whole = Measure::new(vec![], vec![piece]);
        let split = Measure::new(
            vec![],
            vec![
                AcPiece { a: piece.a, b: mid, coeffs: piece.coeffs },
                AcPiece { a: mid, b: piece.b, coeffs: piece.coeffs },
            ],
        );
        let lhs = weighted_integral(&whole, kernel);
        let rhs = weighted_integral(&split, kernel);
        prop_assert!((lhs - rhs).abs() < 1e-13, "{lhs} vs {rhs}");
    }

    #[test]
    fn measure_json_round_trip(m in measure_strategy()) {
        let back = Measure::from_json(&m.to_json()).unwrap();
        prop_assert_eq!(m, back);
    }

    #[test]
    fn v_stays_unimodular(gamma in -1e6f64..1e6) {
        let v = v_from_gamma(&GammaParam::Finite(gamma)).v;
        prop_assert!((v.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn chain_equals_direct_map(alpha in -1e3f64..1e3, c in -1e3f64..1e3) {
        prop_assume!(alpha.abs() > 1e-9);
        let k = Coupling::new(alpha, c);
        let direct = theta_from_coupling(&k).theta;
        let chained = theta_from_v(&v_from_gamma(&gamma_from_coupling(&k))).unwrap().theta;
        prop_assert!(angle_distance_mod_pi(direct, chained) < 1e-12);
    }

    #[test]
    fn coupling_round_trip(alpha in -1e3f64..1e3, c in -10.0f64..10.0) {
        prop_assume!(alpha.abs() > 1e-3);
        prop_assume!((alpha * c + 1.0).abs() > 1e-6); // stay away from the excluded angle
        let theta = theta_from_coupling(&Coupling::new(alpha, c));
        let back = coupling_from_theta(&theta, c).unwrap();
        match back.alpha {
            CouplingStrength::Finite(a) => {
                let rel = (a - alpha).abs() / alpha.abs();
                prop_assert!(rel < 1e-10, "alpha {alpha} -> {a}, rel {rel}");
            }
            CouplingStrength::Infinite => prop_assert!(false, "unexpected infinite alpha"),
        }
    }

    #[test]
    fn theta_derivative_matches_formula(alpha in -3.0f64..3.0, c in -2.0f64..2.0) {
        prop_assume!(alpha.abs() > 1e-2);
        let h = 1e-6;
        let t_plus = theta_from_coupling(&Coupling::new(alpha + h, c)).theta;
        let t_minus = theta_from_coupling(&Coupling::new(alpha - h, c)).theta;
        // unwrap the mod-pi jump before differencing
        let mut d = t_plus - t_minus;
        if d > std::f64::consts::FRAC_PI_2 {
            d -= std::f64::consts::PI;
        } else if d < -std::f64::consts::FRAC_PI_2 {
            d += std::f64::consts::PI;
        }
        let sampled = d / (2.0 * h);
        let exact = -1.0 / (alpha * alpha + (1.0 + alpha * c).powi(2));
        prop_assert!(
            (sampled - exact).abs() <= 0.1 * exact.abs(),
            "sampled {sampled} vs exact {exact}"
        );
    }
}
