mod common;

use proptest::prelude::*;

use common::{arr, born, brute_force, partner, theta_max_oracle, weighted_projector};
use jointmeas::bloch::BlochVector;
use jointmeas::povm::{
    assemble_joint_povm, construct_directions, max_theta, solve_optimal_sharpness, synthesize, tradeoff_lhs,
    unsharpness_product, validate_effect, DegenerateConvention, DichotomicEffectPair,
};
use jointmeas::Error;

fn unit() -> impl Strategy<Value = BlochVector<f64>> {
    (-1.0f64..=1.0, 0.0..std::f64::consts::TAU).prop_map(|(z, phi)| {
        let s = (1.0 - z * z).sqrt();
        BlochVector::new(s * phi.cos(), s * phi.sin(), z)
    })
}

/// `(p, θ)` with `p ∈ (0.5, 0.95]` and `θ ≤ 0.95 θ_max(p)`.
fn feasible() -> impl Strategy<Value = (f64, f64)> {
    (0.501f64..=0.95, 0.0f64..=0.95).prop_map(|(p, f)| (p, f * theta_max_oracle(p)))
}

proptest! {
    #[test]
    fn optimum_saturates_both_forms_of_the_bound((p, theta) in feasible(), a in unit(), phi in 0.0f64..6.3) {
        let s = solve_optimal_sharpness(p, theta).unwrap();
        let b = partner(&a, theta, phi);
        let lhs = tradeoff_lhs(s.alpha, &a, s.beta, &b).unwrap();
        prop_assert!((lhs - 2.0).abs() < 1e-9);
        let prod = unsharpness_product(s.alpha, s.beta).unwrap();
        prop_assert!((prod - (2.0 * theta).sin().powi(2)).abs() < 1e-9);
        prop_assert!(s.alpha <= s.beta + 1e-12);
    }

    #[test]
    fn closed_form_matches_brute_force((p, theta) in feasible()) {
        let s = solve_optimal_sharpness(p, theta).unwrap();
        let (alpha, beta) = brute_force(p, theta);
        prop_assert!((s.alpha - alpha).abs() < 1e-8, "alpha {} vs {}", s.alpha, alpha);
        prop_assert!((s.beta - beta).abs() < 1e-8, "beta {} vs {}", s.beta, beta);
    }

    #[test]
    fn design_round_trips_to_the_marginal_axes((p, theta) in feasible(), a in unit(), phi in 0.0f64..6.3) {
        let b = partner(&a, theta, phi);
        let d = synthesize(p, &a, &b, DegenerateConvention::Reject).unwrap();
        prop_assert!((d.p() - p).abs() < 1e-9);
        let (c_dir, d_dir) = (d.c(), d.d());
        prop_assert!((c_dir.norm() - 1.0).abs() < 1e-12 && (d_dir.norm() - 1.0).abs() < 1e-12);
        let alpha_a = c_dir.scale(d.p()) + d_dir.scale(1.0 - d.p());
        let beta_b = c_dir.scale(d.p()) - d_dir.scale(1.0 - d.p());
        prop_assert!((alpha_a - a.scale(d.alpha())).norm() < 1e-12);
        prop_assert!((beta_b - b.scale(d.beta())).norm() < 1e-12);
    }

    #[test]
    fn branch_directions_lie_in_the_ab_plane((p, theta) in feasible(), a in unit(), phi in 0.0f64..6.3) {
        prop_assume!(theta > 1e-3);
        let b = partner(&a, theta, phi);
        let d = synthesize(p, &a, &b, DegenerateConvention::Reject).unwrap();
        let normal = a.cross(&b).normalized().unwrap();
        prop_assert!(normal.dot(&d.c()).abs() < 1e-12);
        prop_assert!(normal.dot(&d.d()).abs() < 1e-12);
    }

    #[test]
    fn marginal_probabilities_follow_the_unsharp_born_rule(
        (p, theta) in feasible(), a in unit(), phi in 0.0f64..6.3, r in unit(), len in 0.0f64..=1.0,
    ) {
        let b = partner(&a, theta, phi);
        let design = synthesize(p, &a, &b, DegenerateConvention::Reject).unwrap();
        let povm = assemble_joint_povm(&design).unwrap();
        let state = r.scale(len);
        let probs = povm.probabilities(&state).unwrap();
        for sign in [1i8, -1] {
            let s = sign as f64;
            let pa: f64 = povm.effects.iter().zip(probs).filter(|(e, _)| e.a_label == sign).map(|(_, q)| q).sum();
            let pb: f64 = povm.effects.iter().zip(probs).filter(|(e, _)| e.b_label == sign).map(|(_, q)| q).sum();
            let want_a = born(arr(&state), &weighted_projector(1.0, arr(&a), s * design.alpha()));
            let want_b = born(arr(&state), &weighted_projector(1.0, arr(&b), s * design.beta()));
            prop_assert!((pa - want_a).abs() < 1e-12);
            prop_assert!((pb - want_b).abs() < 1e-12);
            prop_assert!((want_a - 0.5 * (1.0 + s * design.alpha() * a.dot(&state))).abs() < 1e-12);
        }
    }

    #[test]
    fn flipping_b_relabels_without_moving_the_branches((p, theta) in feasible(), a in unit(), phi in 0.0f64..6.3) {
        prop_assume!(theta > 1e-3);
        let b = partner(&a, theta, phi);
        let s = solve_optimal_sharpness(p, theta).unwrap();
        let plain = construct_directions(s.alpha, s.beta, &a, &b, DegenerateConvention::Reject).unwrap();
        let flipped = construct_directions(s.alpha, s.beta, &a, &-b, DegenerateConvention::Reject).unwrap();
        prop_assert!(!plain.b_relabeled() && flipped.b_relabeled());
        prop_assert_eq!(flipped.b_sign(), -1);
        prop_assert!((plain.c() - flipped.c()).norm() < 1e-12);
        prop_assert!((plain.d() - flipped.d()).norm() < 1e-12);
        prop_assert!((plain.p() - flipped.p()).abs() < 1e-12);
        let povm = assemble_joint_povm(&flipped).unwrap();
        let want = weighted_projector(1.0, arr(&-b), s.beta);
        let got = povm.b_marginal(1);
        for (i, row) in want.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                prop_assert!((got.m[i][j] - w).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn effect_validator_agrees_with_its_matrix_check(
        gp in -0.2f64..1.2, gm in -0.2f64..1.2, gk in -0.7f64..0.7, k in unit()
    ) {
        let v = validate_effect(&DichotomicEffectPair { gamma_plus: gp, gamma_minus: gm, gamma_k: gk, k });
        prop_assert!(v.consistent());
        prop_assert_eq!(v.complete, (gp + gm - 1.0).abs() <= 1e-12);
        prop_assert_eq!(v.oracle_positive(), gp >= gk.abs() - 1e-12 && gm >= gk.abs() - 1e-12);
    }

    #[test]
    fn max_theta_matches_the_discriminant(p in 0.5f64..0.999) {
        prop_assert!((max_theta(p).unwrap() - theta_max_oracle(p)).abs() < 1e-12);
    }
}

#[test]
fn infeasible_angle_is_reported() {
    let err = solve_optimal_sharpness(0.67, 30f64.to_radians()).unwrap_err();
    assert!(matches!(err, Error::Infeasible { .. }), "{err}");
}

#[test]
fn sub_optimal_sharpness_is_not_saturating() {
    let a = BlochVector::unit_z();
    let b = partner(&a, 0.3, 0.0);
    let err = construct_directions(0.3, 0.3, &a, &b, DegenerateConvention::Reject).unwrap_err();
    assert!(matches!(err, Error::NotSaturating { .. }), "{err}");
}

#[test]
fn half_probability_below_right_angle_has_zero_sharpness() {
    let err = solve_optimal_sharpness(0.5, 20f64.to_radians()).unwrap_err();
    assert!(matches!(err, Error::ZeroSharpness { .. }), "{err}");
}

#[test]
fn half_probability_at_right_angle_is_symmetric() {
    let s = solve_optimal_sharpness(0.5, std::f64::consts::FRAC_PI_4).unwrap();
    assert!((s.alpha - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    assert!((s.beta - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
}

#[test]
fn compatible_axes_give_projective_b() {
    let s = solve_optimal_sharpness(0.67f64, 0.0).unwrap();
    assert!((s.alpha - 0.34).abs() < 1e-12);
    assert!((s.beta - 1.0).abs() < 1e-12);
}

#[test]
fn collapsed_design_follows_the_convention() {
    let a = BlochVector::unit_z();
    assert!(matches!(
        construct_directions(1.0, 1.0, &a, &a, DegenerateConvention::Reject),
        Err(Error::DegenerateDirection)
    ));
    let d = construct_directions(1.0, 1.0, &a, &a, DegenerateConvention::SingleProjective).unwrap();
    assert!(d.is_degenerate());
    assert_eq!(d.p(), 1.0);
}

#[test]
fn f32_design_tracks_f64() {
    let (p, theta) = (0.67f32, 13f32.to_radians());
    let a = BlochVector::<f32>::unit_z();
    let b = BlochVector::new((2.0 * theta).sin(), 0.0, (2.0 * theta).cos());
    let narrow = synthesize(p, &a, &b, DegenerateConvention::Reject).unwrap();
    let wide = solve_optimal_sharpness(0.67f64, 13f64.to_radians()).unwrap();
    assert!((f64::from(narrow.alpha()) - wide.alpha).abs() < 1e-4);
    assert!((f64::from(narrow.beta()) - wide.beta).abs() < 1e-4);
}
