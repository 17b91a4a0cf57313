//! Two-outcome qubit effects, the sharpness tradeoff relation, and synthesis
//! of the optimal four-outcome joint measurement.
//!
//! The joint measurement of `A = a·σ` and `B = b·σ` is realised by measuring
//! `c·σ` with probability `p` or `d·σ` with probability `1 − p`, with outcome
//! mapping
//!
//! | branch | outcome | (A, B)   |
//! |--------|---------|----------|
//! | C      | +1      | (+1, +1) |
//! | C      | −1      | (−1, −1) |
//! | D      | +1      | (+1, −1) |
//! | D      | −1      | (−1, +1) |
//!
//! Its marginals are `½(1 ± α a·σ)` and `½(1 ± β b·σ)` exactly when
//! `c = (αa + βb)/2p` and `d = (αa − βb)/2(1−p)` are unit vectors, i.e. when
//! `|αa + βb| + |αa − βb| = 2`.

use serde::{Deserialize, Serialize};

use crate::bloch::{born_probabilities, BlochVector};
use crate::error::{Error, Result};
use crate::matrix::Matrix2;
use crate::scalar::Scalar;

/// General dichotomic qubit observable `Π± = γ±·1 ± γ_k k·σ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DichotomicEffectPair<T> {
    pub gamma_plus: T,
    pub gamma_minus: T,
    pub gamma_k: T,
    pub k: BlochVector<T>,
}

impl<T: Scalar> DichotomicEffectPair<T> {
    /// `(Π₊, Π₋)` as explicit matrices.
    pub fn effects(&self) -> (Matrix2<T>, Matrix2<T>) {
        let spin = self.k.scale(self.gamma_k);
        (
            Matrix2::from_pauli(self.gamma_plus, &spin),
            Matrix2::from_pauli(self.gamma_minus, &-spin),
        )
    }
}

/// Outcome of [`validate_effect`]: the algebraic constraints on the weights,
/// and the same questions answered from the explicit operators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectValidity<T> {
    /// `γ₊ + γ₋ = 1`.
    pub complete: bool,
    /// `γ₊ ≥ γ_k` and `γ₋ ≥ γ_k`.
    pub positive: bool,
    /// `γ_k ≥ 0`.
    pub nonnegative_sharpness: bool,
    pub unit_direction: bool,
    /// `Π₊ + Π₋ = 1` entrywise.
    pub oracle_complete: bool,
    /// Smallest eigenvalue over both operators.
    pub oracle_min_eigenvalue: T,
}

impl<T: Scalar> EffectValidity<T> {
    pub fn oracle_positive(&self) -> bool {
        self.oracle_min_eigenvalue >= -T::matrix_tol()
    }

    pub fn is_valid(&self) -> bool {
        self.complete && self.positive && self.nonnegative_sharpness && self.unit_direction
    }

    /// Whether the weight constraints and the operator checks tell the same story.
    pub fn consistent(&self) -> bool {
        !self.unit_direction || (self.complete == self.oracle_complete && self.positive == self.oracle_positive())
    }
}

pub fn validate_effect<T: Scalar>(e: &DichotomicEffectPair<T>) -> EffectValidity<T> {
    let tol = T::matrix_tol();
    let (plus, minus) = e.effects();
    let oracle_min = plus.hermitian_eigenvalues().0.min(minus.hermitian_eigenvalues().0);
    EffectValidity {
        complete: (e.gamma_plus + e.gamma_minus - T::one()).abs() <= tol,
        // γ_k < 0 flips the roles of the two bounds; positivity needs γ± ≥ |γ_k|.
        positive: e.gamma_plus >= e.gamma_k.abs() - tol && e.gamma_minus >= e.gamma_k.abs() - tol,
        nonnegative_sharpness: e.gamma_k >= T::zero(),
        unit_direction: e.k.is_unit(),
        oracle_complete: (plus + minus).approx_eq(&Matrix2::identity(), tol),
        oracle_min_eigenvalue: oracle_min,
    }
}

/// Unsharp spin observable `Π^a_± = ½(1 ± α a·σ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalPair<T> {
    sharpness: T,
    axis: BlochVector<T>,
}

impl<T: Scalar> MarginalPair<T> {
    pub fn new(sharpness: T, axis: BlochVector<T>) -> Result<Self> {
        check_sharpness(sharpness, "sharpness")?;
        Ok(Self {
            sharpness,
            axis: axis.require_unit()?,
        })
    }

    pub fn sharpness(&self) -> T {
        self.sharpness
    }

    pub fn axis(&self) -> BlochVector<T> {
        self.axis
    }

    pub fn as_effect_pair(&self) -> DichotomicEffectPair<T> {
        DichotomicEffectPair {
            gamma_plus: T::half(),
            gamma_minus: T::half(),
            gamma_k: self.sharpness * T::half(),
            k: self.axis,
        }
    }

    /// `(Π₊, Π₋)`; `sign = ±1` picks one.
    pub fn effect(&self, sign: i8) -> Matrix2<T> {
        let s = if sign >= 0 { T::one() } else { -T::one() };
        Matrix2::from_pauli(T::half(), &self.axis.scale(s * self.sharpness * T::half()))
    }
}

fn check_sharpness<T: Scalar>(x: T, name: &str) -> Result<()> {
    if x.is_nan() || x < T::zero() || x > T::one() {
        return Err(Error::Domain(format!("{name} = {x} outside [0, 1]")));
    }
    Ok(())
}

fn check_probability<T: Scalar>(p: T, allow_one: bool) -> Result<()> {
    let ok = p >= T::half() && (p < T::one() || (allow_one && p == T::one()));
    if ok {
        Ok(())
    } else {
        let upper = if allow_one { "1]" } else { "1)" };
        Err(Error::Domain(format!(
            "selection probability p = {p} outside [1/2, {upper}"
        )))
    }
}

/// `|αa + βb| + |αa − βb|`. A joint measurement with these marginals exists
/// iff the value is at most 2.
pub fn tradeoff_lhs<T: Scalar>(alpha: T, a: &BlochVector<T>, beta: T, b: &BlochVector<T>) -> Result<T> {
    check_sharpness(alpha, "alpha")?;
    check_sharpness(beta, "beta")?;
    a.require_unit()?;
    b.require_unit()?;
    let (sa, sb) = (a.scale(alpha), b.scale(beta));
    Ok((sa + sb).norm() + (sa - sb).norm())
}

/// Unsharpness `Δ²_α = (1 − α²)/α²`.
pub fn unsharpness<T: Scalar>(alpha: T) -> Result<T> {
    check_sharpness(alpha, "sharpness")?;
    if alpha == T::zero() {
        return Err(Error::InfiniteUnsharpness);
    }
    let a2 = alpha * alpha;
    Ok((T::one() - a2) / a2)
}

/// `Δ²_α Δ²_β = (1 − α²)(1 − β²)/(α²β²)`, bounded below by `sin²2θ`.
pub fn unsharpness_product<T: Scalar>(alpha: T, beta: T) -> Result<T> {
    Ok(unsharpness(alpha)? * unsharpness(beta)?)
}

/// Largest state-space angle θ (radians) reachable by an optimal joint
/// measurement with selection probability `p`:
/// `cos 2θ_max = |1 − 2p| / (p² + (1 − p)²)`.
pub fn max_theta<T: Scalar>(p: T) -> Result<T> {
    check_probability(p, true)?;
    let m = p * p + (T::one() - p) * (T::one() - p);
    let ratio = ((T::one() - T::two() * p).abs() / m).min(T::one());
    Ok(ratio.acos() * T::half())
}

/// Which route produced an [`OptimalSharpness`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveMethod {
    ClosedForm,
    /// `p = ½` at `2θ = 90°`, where the closed form reads 0/0.
    SymmetricLimit,
    Numeric,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalSharpness<T> {
    pub alpha: T,
    pub beta: T,
    pub method: SolveMethod,
}

/// Candidate `(α, β)` from each of the four sign choices of the closed form
/// `β = ±(√(±m² − (1−2p)² sec²2θ) + m)^½`, `α = (2p − 1)/(β cos 2θ)`
/// with `m = 2p(p − 1) + 1`. Only the real candidates in `(0, 1]` are kept.
fn closed_form_candidates<T: Scalar>(p: T, theta: T) -> Vec<(T, T)> {
    let tol = T::matrix_tol();
    let one = T::one();
    let m = T::two() * (p - one) * p + one;
    let cos2 = (T::two() * theta).cos();
    let q = (one - T::two() * p) / cos2;
    let shift = q * q;
    let mut out = Vec::with_capacity(1);
    for outer in [one, -one] {
        for inner in [one, -one] {
            let mut radicand = inner * m * m - shift;
            if radicand < T::zero() {
                if radicand < -tol {
                    continue;
                }
                radicand = T::zero();
            }
            let beta_sq = radicand.sqrt() + m;
            if beta_sq <= T::zero() {
                continue;
            }
            let beta = outer * beta_sq.sqrt();
            let alpha = (T::two() * p - one) / (beta * cos2);
            let in_range = |x: T| x.is_finite() && x > T::zero() && x <= one + tol;
            if in_range(alpha) && in_range(beta) {
                out.push((alpha.min(one), beta.min(one)));
            }
        }
    }
    out
}

/// Optimal sharpnesses `(α, β)` for selection probability `p` and angle θ
/// (radians, half the angle between `a` and `b`).
///
/// The returned pair saturates both `|αa + βb| = 2p`, `|αa − βb| = 2(1 − p)`
/// and `Δ²_α Δ²_β = sin²2θ`, with `β ≥ α`.
pub fn solve_optimal_sharpness<T: Scalar>(p: T, theta: T) -> Result<OptimalSharpness<T>> {
    check_probability(p, false)?;
    if theta.is_nan() || theta < T::zero() {
        return Err(Error::Domain(format!("theta = {theta} must be non-negative")));
    }
    let theta_max = max_theta(p)?;
    if theta > theta_max + T::unit_tol() {
        return Err(Error::Infeasible {
            p: p.as_f64(),
            theta_deg: theta.to_degrees().as_f64(),
            theta_max_deg: theta_max.to_degrees().as_f64(),
        });
    }
    let theta = theta.min(theta_max);

    if (p - T::half()).abs() <= T::matrix_tol() {
        let sin2 = (T::two() * theta).sin();
        if (T::one() - sin2).abs() <= T::unit_tol() {
            // (1 − α²)/α² = sin 2θ with α = β
            let alpha = (T::one() + sin2).recip().sqrt();
            return Ok(OptimalSharpness {
                alpha,
                beta: alpha,
                method: SolveMethod::SymmetricLimit,
            });
        }
        return Err(Error::ZeroSharpness {
            p: p.as_f64(),
            theta_deg: theta.to_degrees().as_f64(),
        });
    }

    let candidates = closed_form_candidates(p, theta);
    if let [(alpha, beta)] = candidates[..] {
        return Ok(OptimalSharpness {
            alpha,
            beta,
            method: SolveMethod::ClosedForm,
        });
    }
    log::warn!(
        "closed form gave {} admissible branches at p = {p}, theta = {theta}; using numeric solver",
        candidates.len()
    );
    solve_optimal_sharpness_numeric(p, theta)
}

/// Residuals of the two norm conditions for axes at `cos 2θ = k`.
fn norm_residuals<T: Scalar>(alpha: T, beta: T, k: T, p: T) -> (T, T, T, T) {
    let base = alpha * alpha + beta * beta;
    let cross = T::two() * alpha * beta * k;
    let plus = (base + cross).max(T::zero()).sqrt();
    let minus = (base - cross).max(T::zero()).sqrt();
    (plus - T::two() * p, minus - T::two() * (T::one() - p), plus, minus)
}

/// Solves `|αa + βb| = 2p`, `|αa − βb| = 2(1 − p)` by Newton iteration from
/// the best point of a coarse grid over `0 < α ≤ β ≤ 1`.
pub fn solve_optimal_sharpness_numeric<T: Scalar>(p: T, theta: T) -> Result<OptimalSharpness<T>> {
    check_probability(p, false)?;
    let k = (T::two() * theta).cos();
    let one = T::one();
    let steps = 64;
    let mut best = (T::infinity(), one, one);
    for i in 1..=steps {
        for j in i..=steps {
            let alpha = T::lit(i as f64 / steps as f64);
            let beta = T::lit(j as f64 / steps as f64);
            let (r1, r2, _, _) = norm_residuals(alpha, beta, k, p);
            let r = r1 * r1 + r2 * r2;
            if r < best.0 {
                best = (r, alpha, beta);
            }
        }
    }
    let (_, mut alpha, mut beta) = best;
    let eps = T::epsilon().sqrt();
    for _ in 0..200 {
        let (r1, r2, plus, minus) = norm_residuals(alpha, beta, k, p);
        if r1.abs().max(r2.abs()) <= T::epsilon() * T::lit(8.0) {
            break;
        }
        let plus = plus.max(eps);
        let minus = minus.max(eps);
        let j11 = (alpha + beta * k) / plus;
        let j12 = (beta + alpha * k) / plus;
        let j21 = (alpha - beta * k) / minus;
        let j22 = (beta - alpha * k) / minus;
        let det = j11 * j22 - j12 * j21;
        if det.abs() <= T::epsilon() {
            break;
        }
        let da = (j22 * r1 - j12 * r2) / det;
        let db = (j11 * r2 - j21 * r1) / det;
        alpha = (alpha - da).max(eps).min(one);
        beta = (beta - db).max(eps).min(one);
    }
    let (r1, r2, _, _) = norm_residuals(alpha, beta, k, p);
    let tol = T::unit_tol();
    if r1.abs() > tol || r2.abs() > tol {
        return Err(Error::Solver(format!(
            "Newton iteration did not converge at p = {p}, theta = {theta} (residuals {r1}, {r2})"
        )));
    }
    if alpha > beta {
        std::mem::swap(&mut alpha, &mut beta);
    }
    Ok(OptimalSharpness {
        alpha,
        beta,
        method: SolveMethod::Numeric,
    })
}

/// What [`construct_directions`] does when `αa = βb` leaves `d` undefined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum DegenerateConvention {
    #[default]
    Reject,
    /// Collapse to a single projective measurement: `p = 1`, `d = −a`.
    SingleProjective,
}

/// A complete joint-measurement design.
///
/// `p ≥ ½` is always the probability of the C branch. When `|αa + βb| <
/// |αa − βb|` the roles of `c` and `d` are swapped, which is the same as
/// designing for `−b` and negating every B outcome; `b_relabeled` records it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointDesign<T> {
    a: BlochVector<T>,
    b: BlochVector<T>,
    alpha: T,
    beta: T,
    c: BlochVector<T>,
    d: BlochVector<T>,
    p: T,
    b_relabeled: bool,
    degenerate: bool,
}

impl<T: Scalar> JointDesign<T> {
    pub fn a(&self) -> BlochVector<T> {
        self.a
    }
    pub fn b(&self) -> BlochVector<T> {
        self.b
    }
    pub fn alpha(&self) -> T {
        self.alpha
    }
    pub fn beta(&self) -> T {
        self.beta
    }
    pub fn c(&self) -> BlochVector<T> {
        self.c
    }
    pub fn d(&self) -> BlochVector<T> {
        self.d
    }
    pub fn p(&self) -> T {
        self.p
    }
    pub fn b_relabeled(&self) -> bool {
        self.b_relabeled
    }
    /// True for the `p = 1` single-projective collapse.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// `±1`: the sign B outcomes carry relative to the unswapped mapping.
    pub fn b_sign(&self) -> i8 {
        if self.b_relabeled {
            -1
        } else {
            1
        }
    }

    fn b_effective(&self) -> BlochVector<T> {
        if self.b_relabeled {
            -self.b
        } else {
            self.b
        }
    }

    /// `(A, B)` labels for a branch outcome.
    pub fn outcome_labels(&self, branch: Branch, outcome: i8) -> (i8, i8) {
        let s = if outcome >= 0 { 1 } else { -1 };
        match branch {
            Branch::C => (s, s * self.b_sign()),
            Branch::D => (s, -s * self.b_sign()),
        }
    }

    /// Checks every structural invariant of the design.
    pub fn validate(&self) -> Result<()> {
        let tol = T::unit_tol();
        let bad = |msg: String| Err(Error::InvalidDesign(msg));
        self.a.require_unit()?;
        self.b.require_unit()?;
        check_sharpness(self.alpha, "alpha")?;
        check_sharpness(self.beta, "beta")?;
        if !self.c.is_unit() || !self.d.is_unit() {
            return bad("c and d must be unit vectors".into());
        }
        let lhs = tradeoff_lhs(self.alpha, &self.a, self.beta, &self.b)?;
        if lhs > T::two() + tol {
            return bad(format!("tradeoff relation violated: lhs = {lhs}"));
        }
        let plus = self.a.scale(self.alpha) + self.b_effective().scale(self.beta);
        let minus = self.a.scale(self.alpha) - self.b_effective().scale(self.beta);
        if self.degenerate {
            if self.p != T::one() || minus.norm() > tol || (self.d + self.a).norm() > tol {
                return bad("degenerate design must have p = 1, alpha*a = beta*b and d = -a".into());
            }
            if (plus - self.c.scale(T::two())).norm() > tol {
                return bad("c inconsistent with (alpha a + beta b)/2".into());
            }
            return Ok(());
        }
        if !(self.p >= T::half() && self.p < T::one()) {
            return bad(format!("selection probability p = {} outside [1/2, 1)", self.p));
        }
        if (plus.norm() * T::half() - self.p).abs() > tol
            || (minus.norm() * T::half() - (T::one() - self.p)).abs() > tol
        {
            return bad("p inconsistent with |alpha a +- beta b|/2".into());
        }
        if (plus - self.c.scale(T::two() * self.p)).norm() > tol
            || (minus - self.d.scale(T::two() * (T::one() - self.p))).norm() > tol
        {
            return bad("c, d inconsistent with (alpha a +- beta b)/2p".into());
        }
        Ok(())
    }
}

/// Builds `c = (αa + βb)/2p`, `d = (αa − βb)/2(1 − p)` and `p = |αa + βb|/2`
/// for sharpnesses that saturate the tradeoff relation.
pub fn construct_directions<T: Scalar>(
    alpha: T,
    beta: T,
    a: &BlochVector<T>,
    b: &BlochVector<T>,
    convention: DegenerateConvention,
) -> Result<JointDesign<T>> {
    let lhs = tradeoff_lhs(alpha, a, beta, b)?;
    let tol = T::unit_tol();
    let defect = lhs - T::two();
    if defect.abs() > tol {
        return Err(Error::NotSaturating {
            defect: defect.as_f64(),
        });
    }
    let plus = a.scale(alpha) + b.scale(beta);
    let minus = a.scale(alpha) - b.scale(beta);
    let (first, second, b_relabeled) = if plus.norm() >= minus.norm() {
        (plus, minus, false)
    } else {
        (minus, plus, true)
    };

    if second.norm() <= tol {
        return match convention {
            DegenerateConvention::Reject => Err(Error::DegenerateDirection),
            DegenerateConvention::SingleProjective => {
                let design = JointDesign {
                    a: *a,
                    b: *b,
                    alpha,
                    beta,
                    c: first.scale(first.norm().recip()),
                    d: -*a,
                    p: T::one(),
                    b_relabeled,
                    degenerate: true,
                };
                design.validate()?;
                Ok(design)
            }
        };
    }

    let p = first.norm() * T::half();
    let c = first.scale((T::two() * p).recip());
    let d = second.scale((T::two() * (T::one() - p)).recip());
    if !d.is_unit() {
        return Err(Error::NotSaturating {
            defect: (d.norm() - T::one()).as_f64(),
        });
    }
    let design = JointDesign {
        a: *a,
        b: *b,
        alpha,
        beta,
        c,
        d,
        p,
        b_relabeled,
        degenerate: false,
    };
    design.validate()?;
    Ok(design)
}

/// Solves for the optimal sharpnesses at the angle between `a` and `b` and
/// builds the corresponding design.
pub fn synthesize<T: Scalar>(
    p: T,
    a: &BlochVector<T>,
    b: &BlochVector<T>,
    convention: DegenerateConvention,
) -> Result<JointDesign<T>> {
    let theta = crate::bloch::angle_between(a, b)? * T::half();
    let opt = solve_optimal_sharpness(p, theta)?;
    construct_directions(opt.alpha, opt.beta, a, b, convention)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    C,
    D,
}

/// One weighted projector of the joint measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointEffect<T> {
    pub branch: Branch,
    /// Outcome of the projective branch measurement, ±1.
    pub outcome: i8,
    pub a_label: i8,
    pub b_label: i8,
    /// `p` or `1 − p`.
    pub weight: T,
    pub direction: BlochVector<T>,
    pub operator: Matrix2<T>,
}

/// The four effects `p·Π^c_±`, `(1−p)·Π^d_±` with their `(A, B)` labels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourOutcomeJointPovm<T> {
    pub effects: [JointEffect<T>; 4],
}

impl<T: Scalar> FourOutcomeJointPovm<T> {
    pub fn sum(&self) -> Matrix2<T> {
        self.effects.iter().fold(Matrix2::zero(), |acc, e| acc + e.operator)
    }

    /// Sum of the effects labeled `A = sign`.
    pub fn a_marginal(&self, sign: i8) -> Matrix2<T> {
        self.effects
            .iter()
            .filter(|e| e.a_label == sign)
            .fold(Matrix2::zero(), |acc, e| acc + e.operator)
    }

    /// Sum of the effects labeled `B = sign`.
    pub fn b_marginal(&self, sign: i8) -> Matrix2<T> {
        self.effects
            .iter()
            .filter(|e| e.b_label == sign)
            .fold(Matrix2::zero(), |acc, e| acc + e.operator)
    }

    pub fn completeness_defect(&self) -> T {
        self.sum().max_abs_diff(&Matrix2::identity())
    }

    pub fn min_eigenvalue(&self) -> T {
        self.effects
            .iter()
            .map(|e| e.operator.hermitian_eigenvalues().0)
            .fold(T::infinity(), T::min)
    }

    /// Born probabilities of the four outcomes computed with the density matrix.
    pub fn probabilities(&self, state: &BlochVector<T>) -> Result<[T; 4]> {
        let rho = crate::bloch::to_density_matrix(state)?;
        Ok(self.effects.map(|e| rho.probability(&e.operator)))
    }
}

pub fn assemble_joint_povm<T: Scalar>(design: &JointDesign<T>) -> Result<FourOutcomeJointPovm<T>> {
    design.validate()?;
    let projector = |dir: &BlochVector<T>, sign: T, weight: T| {
        Matrix2::from_pauli(T::half(), &dir.scale(sign * T::half())).scale(weight)
    };
    let one = T::one();
    let q = one - design.p;
    let make = |branch: Branch, outcome: i8, weight: T, dir: BlochVector<T>| {
        let (a_label, b_label) = design.outcome_labels(branch, outcome);
        let sign = if outcome > 0 { one } else { -one };
        JointEffect {
            branch,
            outcome,
            a_label,
            b_label,
            weight,
            direction: dir,
            operator: projector(&dir, sign, weight),
        }
    };
    Ok(FourOutcomeJointPovm {
        effects: [
            make(Branch::C, 1, design.p, design.c),
            make(Branch::C, -1, design.p, design.c),
            make(Branch::D, 1, q, design.d),
            make(Branch::D, -1, q, design.d),
        ],
    })
}

/// Branch-level Born probabilities `(q_c, q_d)` of a `+1` outcome.
pub fn branch_probabilities<T: Scalar>(state: &BlochVector<T>, design: &JointDesign<T>) -> Result<(T, T)> {
    let (qc, _) = born_probabilities(state, &design.c)?;
    let (qd, _) = born_probabilities(state, &design.d)?;
    Ok((qc, qd))
}
