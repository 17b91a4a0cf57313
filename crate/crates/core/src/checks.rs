//! Runtime self-checks behind `jointmeas validate`.

use rand::Rng;

use crate::bloch::BlochVector;
use crate::experiment::{b_axis, build_paper_experiments, run_experiment, RunMode};
use crate::montecarlo::RngSeed;
use crate::povm::{
    assemble_joint_povm, construct_directions, max_theta, solve_optimal_sharpness, solve_optimal_sharpness_numeric,
    tradeoff_lhs, unsharpness_product, DegenerateConvention, MarginalPair,
};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// `(p, θ)` grid: `p_steps` values of `p` in `(0.5, 0.95]`, `theta_steps`
/// values of θ in `[0, 0.95 θ_max(p)]`, plus the `p = ½`, `2θ = 90°` point.
pub fn feasible_lattice(p_steps: usize, theta_steps: usize) -> Vec<(f64, f64)> {
    let mut out = vec![(0.5, std::f64::consts::FRAC_PI_4)];
    for i in 1..=p_steps {
        let p = 0.5 + 0.45 * i as f64 / p_steps as f64;
        let tmax = max_theta(p).expect("p in range");
        for j in 0..theta_steps {
            out.push((p, 0.95 * tmax * j as f64 / (theta_steps - 1).max(1) as f64));
        }
    }
    out
}

pub fn saturation(lattice: &[(f64, f64)]) -> CheckReport {
    let (a, mut worst_product, mut worst_lhs) = (BlochVector::unit_z(), 0.0f64, 0.0f64);
    let mut failure = None;
    for &(p, theta) in lattice {
        let res = solve_optimal_sharpness(p, theta).and_then(|s| {
            let b = b_axis(&a, theta, 0.0)?;
            let prod = unsharpness_product(s.alpha, s.beta)?;
            let lhs = tradeoff_lhs(s.alpha, &a, s.beta, &b)?;
            Ok(((prod - (2.0 * theta).sin().powi(2)).abs(), (lhs - 2.0).abs()))
        });
        match res {
            Ok((dp, dl)) => {
                worst_product = worst_product.max(dp);
                worst_lhs = worst_lhs.max(dl);
            }
            Err(e) => {
                failure.get_or_insert(format!("p = {p}, theta = {theta}: {e}"));
            }
        }
    }
    CheckReport {
        name: "bound saturation",
        passed: failure.is_none() && worst_product < 1e-9 && worst_lhs < 1e-9,
        detail: failure.unwrap_or_else(|| {
            format!(
                "{} points; max |product - sin^2 2theta| = {worst_product:.3e}, max |lhs - 2| = {worst_lhs:.3e}",
                lattice.len()
            )
        }),
    }
}

pub fn closed_form_vs_numeric(lattice: &[(f64, f64)]) -> CheckReport {
    let mut worst = 0.0f64;
    let mut failure = None;
    for &(p, theta) in lattice.iter().filter(|(p, _)| *p > 0.5) {
        match (
            solve_optimal_sharpness(p, theta),
            solve_optimal_sharpness_numeric(p, theta),
        ) {
            (Ok(c), Ok(n)) => worst = worst.max((c.alpha - n.alpha).abs()).max((c.beta - n.beta).abs()),
            (Err(e), _) | (_, Err(e)) => {
                failure.get_or_insert(format!("p = {p}, theta = {theta}: {e}"));
            }
        }
    }
    CheckReport {
        name: "closed form vs numeric solver",
        passed: failure.is_none() && worst < 1e-8,
        detail: failure.unwrap_or_else(|| format!("max deviation {worst:.3e}")),
    }
}

fn random_unit<R: Rng>(rng: &mut R) -> BlochVector<f64> {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    BlochVector::from_spherical(z.acos(), phi)
}

pub fn povm_structure(designs: usize, seed: u64) -> CheckReport {
    let mut rng = RngSeed::new(seed).rng();
    let (mut completeness, mut min_eig, mut marginal) = (0.0f64, f64::INFINITY, 0.0f64);
    let mut failure = None;
    for _ in 0..designs {
        let p = rng.random_range(0.5..0.95);
        let theta = rng.random_range(0.0..=max_theta(p).unwrap_or(0.0));
        let a = random_unit(&mut rng);
        let res = b_axis(&a, theta, rng.random_range(0.0..std::f64::consts::TAU)).and_then(|b| {
            let s = solve_optimal_sharpness(p, theta)?;
            let design = construct_directions(s.alpha, s.beta, &a, &b, DegenerateConvention::Reject)?;
            let povm = assemble_joint_povm(&design)?;
            let ma = MarginalPair::new(s.alpha, a)?;
            let mb = MarginalPair::new(s.beta, b)?;
            let dev = [1i8, -1]
                .iter()
                .map(|&sg| {
                    povm.a_marginal(sg)
                        .max_abs_diff(&ma.effect(sg))
                        .max(povm.b_marginal(sg).max_abs_diff(&mb.effect(sg)))
                })
                .fold(0.0, f64::max);
            Ok((povm.completeness_defect(), povm.min_eigenvalue(), dev))
        });
        match res {
            Ok((c, e, m)) => {
                completeness = completeness.max(c);
                min_eig = min_eig.min(e);
                marginal = marginal.max(m);
            }
            Err(e) => {
                failure.get_or_insert(format!("p = {p}, theta = {theta}: {e}"));
            }
        }
    }
    CheckReport {
        name: "joint POVM structure",
        passed: failure.is_none() && completeness < 1e-12 && min_eig >= -1e-12 && marginal < 1e-12,
        detail: failure.unwrap_or_else(|| {
            format!(
                "{designs} designs; completeness {completeness:.3e}, min eigenvalue {min_eig:.3e}, marginal deviation {marginal:.3e}"
            )
        }),
    }
}

pub fn feasibility_boundary() -> CheckReport {
    let two_theta_067 = 2.0 * max_theta(0.67).unwrap_or(f64::NAN).to_degrees();
    let two_theta_05 = 2.0 * max_theta(0.5).unwrap_or(f64::NAN).to_degrees();
    CheckReport {
        name: "feasibility boundary",
        passed: (two_theta_067 - 52.4).abs() <= 0.1 && (two_theta_05 - 90.0).abs() < 1e-12,
        detail: format!("2theta_max(0.67) = {two_theta_067:.4} deg, 2theta_max(0.5) = {two_theta_05:.4} deg"),
    }
}

pub fn exact_mode_consistency() -> CheckReport {
    let mut worst = 0.0f64;
    let mut failure = None;
    for cfg in build_paper_experiments() {
        match run_experiment(&cfg, RunMode::Exact) {
            Ok(rows) => {
                for row in rows {
                    let Some(v) = row.values else {
                        failure.get_or_insert(format!("{}: theta {} flagged", cfg.name, row.theta_deg));
                        continue;
                    };
                    let cos2 = (2.0 * row.theta_deg.to_radians()).cos();
                    let devs = [
                        v.delta_product.value - v.sin_sq_2theta.value,
                        v.sharp_a.value - 1.0,
                        v.sharp_b.value - cos2,
                        v.a_j_bar.value - v.alpha_theory.value,
                        v.b_j_bar.value - v.beta_theory.value * cos2,
                        v.var_product_sharp.value,
                        v.var_product_joint.value - v.var_product_joint_theory.value,
                    ];
                    worst = devs.iter().fold(worst, |w, d| w.max(d.abs()));
                }
            }
            Err(e) => {
                failure.get_or_insert(format!("{}: {e}", cfg.name));
            }
        }
    }
    CheckReport {
        name: "exact-probability consistency",
        passed: failure.is_none() && worst < 1e-9,
        detail: failure.unwrap_or_else(|| format!("max deviation {worst:.3e}")),
    }
}

/// All checks with their default sizes.
pub fn run_all(seed: u64) -> Vec<CheckReport> {
    let lattice = feasible_lattice(25, 24);
    vec![
        saturation(&lattice),
        closed_form_vs_numeric(&lattice),
        povm_structure(100, seed),
        feasibility_boundary(),
        exact_mode_consistency(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_size_and_feasibility() {
        let l = feasible_lattice(25, 24);
        assert_eq!(l.len(), 601);
        for (p, t) in l {
            assert!(t <= max_theta(p).unwrap() + 1e-15);
        }
    }

    #[test]
    fn all_checks_pass() {
        for r in run_all(7) {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }
}
