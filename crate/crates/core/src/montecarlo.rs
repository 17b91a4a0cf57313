//! Seeded simulation of the heralded single-photon joint measurement.
//!
//! Generator: `ChaCha8Rng`, keyed with `seed_from_u64(seed)` and positioned on
//! ChaCha stream `stream`. Child streams are derived with a SplitMix64 mix of
//! the parent stream and a child index, so every run, θ point and measurement
//! setting owns its own stream and results do not depend on scheduling.
//!
//! A run of `N` heralded shots is sampled as a binomial composition: the
//! number of C-branch shots is `Bin(N, p)`, and within each branch the number
//! of `+1` outcomes is binomial in the Born probability. This has exactly the
//! distribution of `N` independent per-shot draws
//! ([`run_joint_shotwise`] draws them one by one for cross-checking).

use std::ops::{Add, AddAssign};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::{born_probabilities, BlochVector};
use crate::error::{Error, Result};
use crate::povm::JointDesign;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngSeed {
    pub const fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    /// Sub-stream `index` of this stream.
    pub fn child(&self, index: u64) -> Self {
        Self {
            seed: self.seed,
            stream: splitmix64(self.stream ^ splitmix64(index.wrapping_add(1))),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Shot-count model for one run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShotModel {
    /// Exactly the requested number of heralded shots.
    #[default]
    Fixed,
    /// Poisson-distributed total with the requested mean.
    Poisson,
}

/// Counts of the four joint-measurement detectors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CountRecord<N = u64> {
    pub c_plus: N,
    pub c_minus: N,
    pub d_plus: N,
    pub d_minus: N,
}

impl<N: Copy + Add<Output = N>> CountRecord<N> {
    pub fn c_total(&self) -> N {
        self.c_plus + self.c_minus
    }

    pub fn d_total(&self) -> N {
        self.d_plus + self.d_minus
    }

    pub fn total(&self) -> N {
        self.c_total() + self.d_total()
    }
}

impl<N: Add<Output = N>> Add for CountRecord<N> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            c_plus: self.c_plus + o.c_plus,
            c_minus: self.c_minus + o.c_minus,
            d_plus: self.d_plus + o.d_plus,
            d_minus: self.d_minus + o.d_minus,
        }
    }
}

impl<N: Copy + Add<Output = N>> AddAssign for CountRecord<N> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

/// Counts for a single sharp (projective) measurement.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SharpCountRecord<N = u64> {
    pub n_plus: N,
    pub n_minus: N,
}

impl<N: Copy + Add<Output = N>> SharpCountRecord<N> {
    pub fn total(&self) -> N {
        self.n_plus + self.n_minus
    }
}

impl<N: Add<Output = N>> Add for SharpCountRecord<N> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            n_plus: self.n_plus + o.n_plus,
            n_minus: self.n_minus + o.n_minus,
        }
    }
}

impl<N: Copy + Add<Output = N>> AddAssign for SharpCountRecord<N> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

/// One run of a multi-run measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStream {
    pub index: u64,
    pub shots: u64,
    pub seed: RngSeed,
}

/// Derives `runs` independent sub-streams of `seed`, one per run.
pub fn split_runs(shots_per_run: u64, runs: u64, seed: RngSeed) -> Vec<RunStream> {
    (0..runs)
        .map(|index| RunStream {
            index,
            shots: shots_per_run,
            seed: seed.child(index),
        })
        .collect()
}

fn binomial<R: Rng + ?Sized>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p)
        .expect("binomial parameters checked above")
        .sample(rng)
}

fn draw_total<R: Rng + ?Sized>(rng: &mut R, shots: u64, model: ShotModel) -> u64 {
    match model {
        ShotModel::Fixed => shots,
        ShotModel::Poisson if shots == 0 => 0,
        ShotModel::Poisson => {
            let mean = shots as f64;
            Poisson::new(mean).expect("positive Poisson mean").sample(rng) as u64
        }
    }
}

fn check_inputs<T: Scalar>(state: &BlochVector<T>, shots: u64) -> Result<()> {
    state.require_pure()?;
    if shots == 0 {
        return Err(Error::Domain("shots must be at least 1".into()));
    }
    Ok(())
}

/// Simulates `shots` heralded photons through the joint measurement.
pub fn run_joint<T: Scalar>(
    state: &BlochVector<T>,
    design: &JointDesign<T>,
    shots: u64,
    seed: RngSeed,
) -> Result<CountRecord> {
    run_joint_with(state, design, shots, seed, ShotModel::Fixed)
}

pub fn run_joint_with<T: Scalar>(
    state: &BlochVector<T>,
    design: &JointDesign<T>,
    shots: u64,
    seed: RngSeed,
    model: ShotModel,
) -> Result<CountRecord> {
    check_inputs(state, shots)?;
    design.validate()?;
    let (qc, _) = born_probabilities(state, &design.c())?;
    let (qd, _) = born_probabilities(state, &design.d())?;
    let (p, qc, qd) = (design.p().as_f64(), qc.as_f64(), qd.as_f64());

    let mut rng = seed.rng();
    let total = draw_total(&mut rng, shots, model);
    let n_c = binomial(&mut rng, total, p);
    let n_d = total - n_c;
    let c_plus = binomial(&mut rng, n_c, qc);
    let d_plus = binomial(&mut rng, n_d, qd);
    Ok(CountRecord {
        c_plus,
        c_minus: n_c - c_plus,
        d_plus,
        d_minus: n_d - d_plus,
    })
}

/// Per-shot reference sampler: one branch draw and one outcome draw per photon.
pub fn run_joint_shotwise<T: Scalar>(
    state: &BlochVector<T>,
    design: &JointDesign<T>,
    shots: u64,
    seed: RngSeed,
) -> Result<CountRecord> {
    check_inputs(state, shots)?;
    design.validate()?;
    let (qc, _) = born_probabilities(state, &design.c())?;
    let (qd, _) = born_probabilities(state, &design.d())?;
    let (p, qc, qd) = (design.p().as_f64(), qc.as_f64(), qd.as_f64());
    let mut rng = seed.rng();
    let mut counts = CountRecord::default();
    for _ in 0..shots {
        let c_branch = rng.random::<f64>() < p;
        let q = if c_branch { qc } else { qd };
        let plus = rng.random::<f64>() < q;
        match (c_branch, plus) {
            (true, true) => counts.c_plus += 1,
            (true, false) => counts.c_minus += 1,
            (false, true) => counts.d_plus += 1,
            (false, false) => counts.d_minus += 1,
        }
    }
    Ok(counts)
}

/// Simulates a separate sharp measurement of `axis·σ`.
pub fn run_sharp<T: Scalar>(
    state: &BlochVector<T>,
    axis: &BlochVector<T>,
    shots: u64,
    seed: RngSeed,
) -> Result<SharpCountRecord> {
    run_sharp_with(state, axis, shots, seed, ShotModel::Fixed)
}

pub fn run_sharp_with<T: Scalar>(
    state: &BlochVector<T>,
    axis: &BlochVector<T>,
    shots: u64,
    seed: RngSeed,
    model: ShotModel,
) -> Result<SharpCountRecord> {
    check_inputs(state, shots)?;
    let (q, _) = born_probabilities(state, axis)?;
    let mut rng = seed.rng();
    let total = draw_total(&mut rng, shots, model);
    let n_plus = binomial(&mut rng, total, q.as_f64());
    Ok(SharpCountRecord {
        n_plus,
        n_minus: total - n_plus,
    })
}

/// Runs the joint measurement once per stream, in parallel; output is in
/// stream order.
pub fn run_joint_runs<T: Scalar>(
    state: &BlochVector<T>,
    design: &JointDesign<T>,
    runs: &[RunStream],
    model: ShotModel,
) -> Result<Vec<CountRecord>> {
    runs.par_iter()
        .map(|r| run_joint_with(state, design, r.shots, r.seed, model))
        .collect()
}

pub fn run_sharp_runs<T: Scalar>(
    state: &BlochVector<T>,
    axis: &BlochVector<T>,
    runs: &[RunStream],
    model: ShotModel,
) -> Result<Vec<SharpCountRecord>> {
    runs.par_iter()
        .map(|r| run_sharp_with(state, axis, r.shots, r.seed, model))
        .collect()
}

/// Sums records in index order.
pub fn pool<R: Copy + Default + AddAssign>(records: &[R]) -> R {
    let mut acc = R::default();
    for r in records {
        acc += *r;
    }
    acc
}

/// Expected (real-valued) joint counts for `shots` photons: exact Born
/// probabilities scaled to pseudo-counts.
pub fn expected_joint_counts<T: Scalar>(
    state: &BlochVector<T>,
    design: &JointDesign<T>,
    shots: T,
) -> Result<CountRecord<T>> {
    design.validate()?;
    let (qc, qc_minus) = born_probabilities(state, &design.c())?;
    let (qd, qd_minus) = born_probabilities(state, &design.d())?;
    let n_c = shots * design.p();
    let n_d = shots * (T::one() - design.p());
    Ok(CountRecord {
        c_plus: n_c * qc,
        c_minus: n_c * qc_minus,
        d_plus: n_d * qd,
        d_minus: n_d * qd_minus,
    })
}

pub fn expected_sharp_counts<T: Scalar>(
    state: &BlochVector<T>,
    axis: &BlochVector<T>,
    shots: T,
) -> Result<SharpCountRecord<T>> {
    let (q_plus, q_minus) = born_probabilities(state, axis)?;
    Ok(SharpCountRecord {
        n_plus: shots * q_plus,
        n_minus: shots * q_minus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povm::{construct_directions, DegenerateConvention};

    type V = BlochVector<f64>;

    fn eigen_design() -> JointDesign<f64> {
        let z = V::unit_z();
        construct_directions(0.4, 1.0, &z, &z, DegenerateConvention::Reject).unwrap()
    }

    #[test]
    fn eigenstate_branches_never_fire_wrong_outcome() {
        let design = eigen_design();
        assert!((design.p() - 0.7).abs() < 1e-12);
        for s in 0..20 {
            let r = run_joint(&V::unit_z(), &design, 5000, RngSeed::new(s)).unwrap();
            assert_eq!(r.c_minus, 0);
            assert_eq!(r.d_plus, 0);
            assert_eq!(r.total(), 5000);
        }
    }

    #[test]
    fn degenerate_design_only_uses_c_branch() {
        let z = V::unit_z();
        let design = construct_directions(1.0, 1.0, &z, &z, DegenerateConvention::SingleProjective).unwrap();
        let r = run_joint(&V::unit_x(), &design, 10_000, RngSeed::new(3)).unwrap();
        assert_eq!(r.d_plus + r.d_minus, 0);
        assert_eq!(r.c_total(), 10_000);
    }

    #[test]
    fn sharp_examples() {
        let z = V::unit_z();
        let r = run_sharp(&z, &z, 1000, RngSeed::new(1)).unwrap();
        assert_eq!(r.n_minus, 0);
        let r = run_sharp(&z, &V::unit_x(), 1_000_000, RngSeed::new(2)).unwrap();
        let f = r.n_plus as f64 / 1e6;
        assert!((f - 0.5).abs() <= 5.0 * 0.0005, "{f}");
        let again = run_sharp(&z, &V::unit_x(), 1_000_000, RngSeed::new(2)).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn rejects_bad_inputs() {
        let design = eigen_design();
        assert!(run_joint(&V::new(0.0, 0.0, 0.5), &design, 10, RngSeed::new(0)).is_err());
        assert!(run_joint(&V::unit_z(), &design, 0, RngSeed::new(0)).is_err());
        assert!(run_sharp(&V::unit_z(), &V::new(0.0, 0.0, 2.0), 10, RngSeed::new(0)).is_err());
    }

    #[test]
    fn split_runs_is_deterministic_and_distinct() {
        let s = RngSeed::new(42);
        let a = split_runs(15_000, 100, s);
        let b = split_runs(15_000, 100, s);
        assert_eq!(a, b);
        let mut streams: Vec<_> = a.iter().map(|r| r.seed.stream).collect();
        streams.sort_unstable();
        streams.dedup();
        assert_eq!(streams.len(), 100);
        assert!(a.iter().all(|r| r.shots == 15_000));
        // A run's stream does not depend on how many runs were requested.
        assert_eq!(split_runs(15_000, 3, s)[2], a[2]);
    }

    #[test]
    fn poisson_totals_fluctuate_around_mean() {
        let design = eigen_design();
        let totals: Vec<u64> = (0..50)
            .map(|i| {
                run_joint_with(&V::unit_x(), &design, 10_000, RngSeed::new(i), ShotModel::Poisson)
                    .unwrap()
                    .total()
            })
            .collect();
        assert!(totals.iter().any(|&t| t != 10_000));
        let mean = totals.iter().sum::<u64>() as f64 / 50.0;
        assert!((mean - 10_000.0).abs() < 5.0 * 100.0 / 50f64.sqrt());
    }

    #[test]
    fn parallel_runs_match_serial() {
        let design = eigen_design();
        let runs = split_runs(1000, 16, RngSeed::new(9));
        let par = run_joint_runs(&V::unit_x(), &design, &runs, ShotModel::Fixed).unwrap();
        let ser: Vec<_> = runs
            .iter()
            .map(|r| run_joint(&V::unit_x(), &design, r.shots, r.seed).unwrap())
            .collect();
        assert_eq!(par, ser);
        assert_eq!(pool(&par).total(), 16_000);
    }

    #[test]
    fn expected_counts_sum_to_shots() {
        let design = eigen_design();
        let e = expected_joint_counts(&V::unit_x(), &design, 100.0).unwrap();
        assert!((e.total() - 100.0).abs() < 1e-12);
        assert!((e.c_total() - 70.0).abs() < 1e-12);
    }
}
