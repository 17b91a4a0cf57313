//! Estimates from detector counts, with first-order (delta-method) standard
//! errors built on binomial counting statistics.
//!
//! Counts are taken as scalars so that exact Born probabilities can be fed
//! through the same chain as real-valued pseudo-counts.

use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montecarlo::{CountRecord, RngSeed, SharpCountRecord};
use crate::povm::unsharpness;
use crate::scalar::Scalar;

/// Sharp expectations with modulus below this are not used as denominators.
pub const RATIO_GUARD: f64 = 0.05;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult<T> {
    pub value: T,
    pub std_err: T,
}

impl<T: Scalar> EstimateResult<T> {
    pub fn new(value: T, std_err: T) -> Self {
        Self { value, std_err }
    }

    pub fn exact(value: T) -> Self {
        Self::new(value, T::zero())
    }

    /// `|value − target|` in units of `std_err` (infinite for a zero error
    /// and a nonzero deviation).
    pub fn z_score(&self, target: T) -> T {
        let dev = (self.value - target).abs();
        if dev == T::zero() {
            T::zero()
        } else {
            dev / self.std_err
        }
    }
}

/// `⟨X⟩ = (n₊ − n₋)/(n₊ + n₋)` with standard error `2√(q̂(1 − q̂)/N)`.
pub fn expval_from_counts<T: Scalar>(n_plus: T, n_minus: T) -> Result<EstimateResult<T>> {
    if n_plus < T::zero() || n_minus < T::zero() {
        return Err(Error::Domain("counts must be non-negative".into()));
    }
    let total = n_plus + n_minus;
    if total <= T::zero() {
        return Err(Error::UndefinedEstimate);
    }
    let q = n_plus / total;
    let var = (q * (T::one() - q)).max(T::zero()) / total;
    Ok(EstimateResult::new((n_plus - n_minus) / total, T::two() * var.sqrt()))
}

fn count<T: Scalar>(n: u64) -> T {
    T::from_u64(n).expect("count representable")
}

/// Integer counts → scalar pseudo-counts.
pub fn record_as<T: Scalar>(r: &CountRecord) -> CountRecord<T> {
    CountRecord {
        c_plus: count(r.c_plus),
        c_minus: count(r.c_minus),
        d_plus: count(r.d_plus),
        d_minus: count(r.d_minus),
    }
}

pub fn sharp_record_as<T: Scalar>(r: &SharpCountRecord) -> SharpCountRecord<T> {
    SharpCountRecord {
        n_plus: count(r.n_plus),
        n_minus: count(r.n_minus),
    }
}

/// `Ā_j = p⟨C⟩ + (1 − p)⟨D⟩`, `B̄_j = p⟨C⟩ − (1 − p)⟨D⟩`; errors add in
/// quadrature with weights `p`, `1 − p`.
pub fn joint_expectations<T: Scalar>(
    c_est: &EstimateResult<T>,
    d_est: &EstimateResult<T>,
    p: T,
) -> Result<(EstimateResult<T>, EstimateResult<T>)> {
    let bound = T::one() + T::unit_tol();
    if c_est.value.abs() > bound || d_est.value.abs() > bound {
        return Err(Error::Domain("expectation values must lie in [-1, 1]".into()));
    }
    if !(p > T::zero() && p <= T::one()) {
        return Err(Error::Domain(format!("selection probability p = {p} outside (0, 1]")));
    }
    let q = T::one() - p;
    let err = (p * c_est.std_err).hypot(q * d_est.std_err);
    Ok((
        EstimateResult::new(p * c_est.value + q * d_est.value, err),
        EstimateResult::new(p * c_est.value - q * d_est.value, err),
    ))
}

/// `num / den` with first-order error propagation; refuses denominators
/// below [`RATIO_GUARD`].
pub fn ratio_estimate<T: Scalar>(num: &EstimateResult<T>, den: &EstimateResult<T>) -> Result<EstimateResult<T>> {
    let guard = T::lit(RATIO_GUARD);
    if den.value.is_nan() || den.value.abs() < guard {
        return Err(Error::IllConditionedRatio {
            value: den.value.as_f64(),
            threshold: RATIO_GUARD,
        });
    }
    let value = num.value / den.value;
    // σ² = σ_n²/d² + n²σ_d²/d⁴, safe for num = 0
    let err = (num.std_err / den.value).hypot(num.value * den.std_err / (den.value * den.value));
    Ok(EstimateResult::new(value, err.abs()))
}

/// `α_exp = Ā_j/⟨a·σ⟩`, `β_exp = B̄_j/⟨b·σ⟩`.
pub fn sharpness_estimates<T: Scalar>(
    a_j_bar: &EstimateResult<T>,
    b_j_bar: &EstimateResult<T>,
    sharp_a: &EstimateResult<T>,
    sharp_b: &EstimateResult<T>,
) -> Result<(EstimateResult<T>, EstimateResult<T>)> {
    Ok((ratio_estimate(a_j_bar, sharp_a)?, ratio_estimate(b_j_bar, sharp_b)?))
}

fn check_expectation<T: Scalar>(e: T) -> Result<()> {
    if e.abs() > T::one() + T::unit_tol() {
        return Err(Error::Domain(format!("expectation {e} outside [-1, 1]")));
    }
    Ok(())
}

/// Joint-measurement variance scaled by `α⁻²`:
/// `Δ²A_j/α² = (1 − α²)/α² + 1 − ⟨A⟩²`.
pub fn joint_variance<T: Scalar>(alpha: T, sharp_expectation: T) -> Result<T> {
    check_expectation(sharp_expectation)?;
    Ok(unsharpness(alpha)? + T::one() - sharp_expectation * sharp_expectation)
}

/// Unscaled joint variance `Δ²A_j = 1 − α²⟨A⟩²`.
pub fn raw_joint_variance<T: Scalar>(alpha: T, sharp_expectation: T) -> Result<T> {
    check_expectation(sharp_expectation)?;
    if alpha.is_nan() || alpha < T::zero() || alpha > T::one() {
        return Err(Error::Domain(format!("alpha = {alpha} outside [0, 1]")));
    }
    Ok(T::one() - alpha * alpha * sharp_expectation * sharp_expectation)
}

fn check_positive_sharpness<T: Scalar>(x: T) -> Result<()> {
    if x.is_nan() {
        return Err(Error::Domain("sharpness estimate is NaN".into()));
    }
    if x <= T::zero() {
        return Err(Error::InfiniteUnsharpness);
    }
    Ok(())
}

/// `(1 − x²)/x²` and its derivative `−2/x³`, evaluated for any positive
/// estimate (noise can push an estimate above 1).
fn unsharpness_and_slope<T: Scalar>(x: T) -> (T, T) {
    let x2 = x * x;
    ((T::one() - x2) / x2, -T::two() / (x2 * x))
}

/// Estimate of `Δ²A_j/α²` from a sharpness estimate and a sharp expectation,
/// treating the two inputs as independent.
pub fn joint_variance_estimate<T: Scalar>(
    alpha: &EstimateResult<T>,
    sharp_expectation: &EstimateResult<T>,
) -> Result<EstimateResult<T>> {
    check_positive_sharpness(alpha.value)?;
    let (u, du) = unsharpness_and_slope(alpha.value);
    let e = sharp_expectation.value;
    let value = u + T::one() - e * e;
    let err = (du * alpha.std_err).hypot(T::two() * e * sharp_expectation.std_err);
    Ok(EstimateResult::new(value, err))
}

/// Intrinsic variance `1 − ⟨A⟩²` of a sharp measurement.
pub fn intrinsic_variance<T: Scalar>(e: &EstimateResult<T>) -> EstimateResult<T> {
    EstimateResult::new(T::one() - e.value * e.value, (T::two() * e.value * e.std_err).abs())
}

/// Product of two independent estimates.
pub fn product<T: Scalar>(x: &EstimateResult<T>, y: &EstimateResult<T>) -> EstimateResult<T> {
    EstimateResult::new(x.value * y.value, (x.std_err * y.value).hypot(x.value * y.std_err))
}

/// `Δ²_α Δ²_β = (1 − α²)(1 − β²)/(α²β²)` for estimated sharpnesses, with the
/// error propagated through both partial derivatives.
pub fn delta_product<T: Scalar>(
    alpha_exp: &EstimateResult<T>,
    beta_exp: &EstimateResult<T>,
) -> Result<EstimateResult<T>> {
    check_positive_sharpness(alpha_exp.value)?;
    check_positive_sharpness(beta_exp.value)?;
    let (ua, dua) = unsharpness_and_slope(alpha_exp.value);
    let (ub, dub) = unsharpness_and_slope(beta_exp.value);
    let err = (dua * ub * alpha_exp.std_err).hypot(ua * dub * beta_exp.std_err);
    Ok(EstimateResult::new(ua * ub, err))
}

/// Everything estimated from one joint record and the two sharp records.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointEstimate<T> {
    pub p_hat: T,
    pub sharp_a: EstimateResult<T>,
    pub sharp_b: EstimateResult<T>,
    pub sharp_c: EstimateResult<T>,
    pub sharp_d: EstimateResult<T>,
    pub a_j_bar: EstimateResult<T>,
    pub b_j_bar: EstimateResult<T>,
    pub alpha_exp: EstimateResult<T>,
    pub beta_exp: EstimateResult<T>,
    pub delta_product: EstimateResult<T>,
    pub var_a_joint: EstimateResult<T>,
    pub var_b_joint: EstimateResult<T>,
    pub var_product_sharp: EstimateResult<T>,
    pub var_product_joint: EstimateResult<T>,
}

/// Runs the full estimation chain.
///
/// `p` is the C-branch probability used in the joint expectations (the
/// empirical `N_C/N` or the design value); `b_sign` is `−1` for designs whose
/// B outcomes were relabeled.
pub fn estimate_joint<T: Scalar>(
    counts: &CountRecord<T>,
    sharp_a: &SharpCountRecord<T>,
    sharp_b: &SharpCountRecord<T>,
    p: T,
    b_sign: i8,
) -> Result<JointEstimate<T>> {
    let sharp_c = expval_from_counts(counts.c_plus, counts.c_minus)?;
    let sharp_d = match expval_from_counts(counts.d_plus, counts.d_minus) {
        Ok(e) => e,
        // p = 1 designs never select D; its weight is zero below.
        Err(Error::UndefinedEstimate) if p == T::one() => EstimateResult::exact(T::zero()),
        Err(e) => return Err(e),
    };
    let sa = expval_from_counts(sharp_a.n_plus, sharp_a.n_minus)?;
    let sb = expval_from_counts(sharp_b.n_plus, sharp_b.n_minus)?;
    let (a_j_bar, mut b_j_bar) = joint_expectations(&sharp_c, &sharp_d, p)?;
    if b_sign < 0 {
        b_j_bar.value = -b_j_bar.value;
    }
    let (alpha_exp, beta_exp) = sharpness_estimates(&a_j_bar, &b_j_bar, &sa, &sb)?;
    let delta = delta_product(&alpha_exp, &beta_exp)?;
    let var_a_joint = joint_variance_estimate(&alpha_exp, &sa)?;
    let var_b_joint = joint_variance_estimate(&beta_exp, &sb)?;
    Ok(JointEstimate {
        p_hat: p,
        sharp_a: sa,
        sharp_b: sb,
        sharp_c,
        sharp_d,
        a_j_bar,
        b_j_bar,
        alpha_exp,
        beta_exp,
        delta_product: delta,
        var_a_joint,
        var_b_joint,
        var_product_sharp: product(&intrinsic_variance(&sa), &intrinsic_variance(&sb)),
        var_product_joint: product(&var_a_joint, &var_b_joint),
    })
}

/// Empirical C-branch fraction `N_C/N`.
pub fn empirical_p<T: Scalar>(counts: &CountRecord<T>) -> Result<T> {
    let total = counts.total();
    if total <= T::zero() {
        return Err(Error::UndefinedEstimate);
    }
    Ok(counts.c_total() / total)
}

/// Parametric bootstrap of `Δ²_αΔ²_β`: every channel's `+1` count is redrawn
/// binomially at its observed frequency, channel totals held fixed. Returns the
/// mean and standard deviation over the resamples that produced an estimate.
pub fn bootstrap_delta_product(
    counts: &CountRecord,
    sharp_a: &SharpCountRecord,
    sharp_b: &SharpCountRecord,
    b_sign: i8,
    resamples: usize,
    seed: RngSeed,
) -> Result<EstimateResult<f64>> {
    let p = empirical_p(&record_as::<f64>(counts))?;
    let mut rng = seed.rng();
    let mut redraw = |plus: u64, total: u64| -> u64 {
        if total == 0 || plus == 0 || plus == total {
            return plus;
        }
        Binomial::new(total, plus as f64 / total as f64)
            .expect("frequency in (0, 1)")
            .sample(&mut rng)
    };
    let mut values = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let c_plus = redraw(counts.c_plus, counts.c_total());
        let d_plus = redraw(counts.d_plus, counts.d_total());
        let a_plus = redraw(sharp_a.n_plus, sharp_a.total());
        let b_plus = redraw(sharp_b.n_plus, sharp_b.total());
        let c = CountRecord {
            c_plus,
            c_minus: counts.c_total() - c_plus,
            d_plus,
            d_minus: counts.d_total() - d_plus,
        };
        let sa = SharpCountRecord {
            n_plus: a_plus,
            n_minus: sharp_a.total() - a_plus,
        };
        let sb = SharpCountRecord {
            n_plus: b_plus,
            n_minus: sharp_b.total() - b_plus,
        };
        if let Ok(e) = estimate_joint(
            &record_as::<f64>(&c),
            &sharp_record_as(&sa),
            &sharp_record_as(&sb),
            p,
            b_sign,
        ) {
            values.push(e.delta_product.value);
        }
    }
    if values.len() < 2 {
        return Err(Error::UndefinedEstimate);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(EstimateResult::new(mean, var.sqrt()))
}
