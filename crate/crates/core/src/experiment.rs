//! Experiment configurations, the θ-sweep runner and result files.
//!
//! Angles are degrees in configs and outputs and radians everywhere else.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::BlochVector;
use crate::error::{Error, Result};
use crate::estimator::{
    empirical_p, estimate_joint, joint_variance, record_as, sharp_record_as, EstimateResult, JointEstimate,
};
use crate::montecarlo::{
    expected_joint_counts, expected_sharp_counts, pool, run_joint_runs, run_sharp_runs, split_runs, CountRecord,
    RngSeed, SharpCountRecord, ShotModel,
};
use crate::povm::{construct_directions, max_theta, solve_optimal_sharpness, DegenerateConvention, JointDesign};
use crate::scalar::Scalar;

/// Version of the CSV/JSON result layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Selection probability measured for the beam splitter.
pub const REFERENCE_P: f64 = 0.670;
pub const REFERENCE_AZIMUTHS_DEG: [f64; 3] = [-160.7, -51.6, 83.7];
pub const REFERENCE_SHOTS_PER_RUN: u64 = 15_000;
pub const REFERENCE_RUNS: u64 = 100;
pub const DEFAULT_SEED: u64 = 2019;

/// θ = 1, 4, …, 25 degrees.
pub fn reference_theta_list() -> Vec<f64> {
    (0..9).map(|i| 1.0 + 3.0 * i as f64).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub a_axis: BlochVector<f64>,
    /// Azimuth of the (a, b) plane, degrees.
    pub azimuth_phi_deg: f64,
    /// Half-angles θ between a and b, degrees.
    pub theta_list_deg: Vec<f64>,
    pub p: f64,
    pub shots_per_run: u64,
    pub runs: u64,
    pub master_seed: u64,
    pub input_state: BlochVector<f64>,
    #[serde(default)]
    pub shot_model: ShotModel,
    /// Shots per run for each sharp reference measurement; defaults to
    /// `shots_per_run`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sharp_shots_per_run: Option<u64>,
}

impl ExperimentConfig {
    /// Structural checks. Per-θ feasibility is reported row by row instead.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.a_axis.require_unit()?;
        self.input_state.require_pure()?;
        if !(self.p >= 0.5 && self.p < 1.0) {
            return bad(format!("p = {} outside [0.5, 1)", self.p));
        }
        if self.theta_list_deg.is_empty() {
            return bad("theta_list_deg is empty".into());
        }
        if let Some(t) = self.theta_list_deg.iter().find(|t| !t.is_finite() || **t < 0.0) {
            return bad(format!("theta {t} must be finite and non-negative"));
        }
        if self.shots_per_run == 0 || self.runs == 0 || self.sharp_shots_per_run == Some(0) {
            return bad("shots_per_run, sharp_shots_per_run and runs must be positive".into());
        }
        if !self.azimuth_phi_deg.is_finite() {
            return bad("azimuth must be finite".into());
        }
        Ok(())
    }

    pub fn theta_max_deg(&self) -> Result<f64> {
        Ok(max_theta(self.p)?.to_degrees())
    }

    /// θ values beyond the feasibility limit for `p`.
    pub fn infeasible_thetas(&self) -> Result<Vec<f64>> {
        let limit = self.theta_max_deg()?;
        Ok(self
            .theta_list_deg
            .iter()
            .copied()
            .filter(|t| *t > limit + 1e-9)
            .collect())
    }

    pub fn sharp_shots(&self) -> u64 {
        self.sharp_shots_per_run.unwrap_or(self.shots_per_run)
    }

    /// `b` at half-angle θ from `a` in this config's azimuthal plane.
    pub fn b_axis(&self, theta_deg: f64) -> Result<BlochVector<f64>> {
        b_axis(&self.a_axis, theta_deg.to_radians(), self.azimuth_phi_deg.to_radians())
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

/// `b = cos 2θ a + sin 2θ (cos φ e₁ + sin φ e₂)`, with `(e₁, e₂, a)` a
/// right-handed frame; for `a = ẑ`, `e₁ = x̂`, `e₂ = ŷ`.
pub fn b_axis(a: &BlochVector<f64>, theta: f64, phi: f64) -> Result<BlochVector<f64>> {
    let a = a.require_unit()?;
    let seed = if a.x.abs() < 0.9 {
        BlochVector::unit_x()
    } else {
        BlochVector::unit_y()
    };
    let e1 = (seed - a.scale(a.dot(&seed)))
        .normalized()
        .expect("seed axis not parallel to a");
    let e2 = a.cross(&e1);
    let (s2, c2) = (2.0 * theta).sin_cos();
    let (sp, cp) = phi.sin_cos();
    Ok(a.scale(c2) + (e1.scale(cp) + e2.scale(sp)).scale(s2))
}

/// The three experiment sets: `a = ẑ`, input `|a⟩`, θ = 1…25°, one azimuthal
/// plane each.
pub fn build_paper_experiments() -> [ExperimentConfig; 3] {
    let make = |k: usize| ExperimentConfig {
        name: format!("experiment_{}", k + 1),
        a_axis: BlochVector::unit_z(),
        azimuth_phi_deg: REFERENCE_AZIMUTHS_DEG[k],
        theta_list_deg: reference_theta_list(),
        p: REFERENCE_P,
        shots_per_run: REFERENCE_SHOTS_PER_RUN,
        runs: REFERENCE_RUNS,
        master_seed: DEFAULT_SEED + k as u64,
        input_state: BlochVector::unit_z(),
        shot_model: ShotModel::Fixed,
        sharp_shots_per_run: None,
    };
    [make(0), make(1), make(2)]
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    /// Monte Carlo photon counting.
    #[default]
    Simulated,
    /// Exact Born probabilities as real-valued pseudo-counts.
    Exact,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "reason", rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    /// Values are computed but the point does not test incompatibility
    /// (θ = 0) or the design collapsed.
    Degenerate(String),
    Infeasible(String),
    /// Synthesis succeeded but the counts did not yield an estimate.
    Failed(String),
}

impl RowStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, RowStatus::Ok)
    }

    pub fn label(&self) -> String {
        match self {
            RowStatus::Ok => "ok".into(),
            RowStatus::Degenerate(r) => format!("degenerate: {r}"),
            RowStatus::Infeasible(r) => format!("infeasible: {r}"),
            RowStatus::Failed(r) => format!("failed: {r}"),
        }
    }
}

/// Every plotted quantity for one θ point. Theory entries carry a zero error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowValues {
    pub alpha_theory: EstimateResult<f64>,
    pub beta_theory: EstimateResult<f64>,
    pub sin_sq_2theta: EstimateResult<f64>,
    pub var_product_joint_theory: EstimateResult<f64>,
    pub p_hat: EstimateResult<f64>,
    pub alpha_exp: EstimateResult<f64>,
    pub beta_exp: EstimateResult<f64>,
    /// From counts pooled over all runs, delta-method error.
    pub delta_product: EstimateResult<f64>,
    /// Mean of per-run values with the standard error of the mean.
    pub delta_product_runs: Option<EstimateResult<f64>>,
    pub var_product_sharp: EstimateResult<f64>,
    pub var_product_joint: EstimateResult<f64>,
    pub a_j_bar: EstimateResult<f64>,
    pub b_j_bar: EstimateResult<f64>,
    pub sharp_a: EstimateResult<f64>,
    pub sharp_b: EstimateResult<f64>,
    pub sharp_c: EstimateResult<f64>,
    pub sharp_d: EstimateResult<f64>,
}

/// Column stems of [`RowValues`], in output order.
pub const QUANTITY_COLUMNS: [&str; 17] = [
    "alpha_theory",
    "beta_theory",
    "sin_sq_2theta",
    "var_product_joint_theory",
    "p_hat",
    "alpha_exp",
    "beta_exp",
    "delta_product",
    "delta_product_runs",
    "var_product_sharp",
    "var_product_joint",
    "a_j_bar",
    "b_j_bar",
    "sharp_a",
    "sharp_b",
    "sharp_c",
    "sharp_d",
];

impl RowValues {
    pub fn columns(&self) -> [Option<EstimateResult<f64>>; 17] {
        [
            Some(self.alpha_theory),
            Some(self.beta_theory),
            Some(self.sin_sq_2theta),
            Some(self.var_product_joint_theory),
            Some(self.p_hat),
            Some(self.alpha_exp),
            Some(self.beta_exp),
            Some(self.delta_product),
            self.delta_product_runs,
            Some(self.var_product_sharp),
            Some(self.var_product_joint),
            Some(self.a_j_bar),
            Some(self.b_j_bar),
            Some(self.sharp_a),
            Some(self.sharp_b),
            Some(self.sharp_c),
            Some(self.sharp_d),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub theta_deg: f64,
    pub status: RowStatus,
    pub values: Option<RowValues>,
}

impl ResultRow {
    fn flagged(theta_deg: f64, status: RowStatus) -> Self {
        Self {
            theta_deg,
            status,
            values: None,
        }
    }
}

struct PointCounts {
    joint: CountRecord<f64>,
    sharp_a: SharpCountRecord<f64>,
    sharp_b: SharpCountRecord<f64>,
    per_run: Vec<(CountRecord, SharpCountRecord, SharpCountRecord)>,
}

fn simulate_point(
    cfg: &ExperimentConfig,
    design: &JointDesign<f64>,
    b: &BlochVector<f64>,
    seed: RngSeed,
) -> Result<PointCounts> {
    let state = cfg.input_state;
    let joint_runs = split_runs(cfg.shots_per_run, cfg.runs, seed.child(0));
    let a_runs = split_runs(cfg.sharp_shots(), cfg.runs, seed.child(1));
    let b_runs = split_runs(cfg.sharp_shots(), cfg.runs, seed.child(2));
    let joint = run_joint_runs(&state, design, &joint_runs, cfg.shot_model)?;
    let sharp_a = run_sharp_runs(&state, &cfg.a_axis, &a_runs, cfg.shot_model)?;
    let sharp_b = run_sharp_runs(&state, b, &b_runs, cfg.shot_model)?;
    Ok(PointCounts {
        joint: record_as(&pool(&joint)),
        sharp_a: sharp_record_as(&pool(&sharp_a)),
        sharp_b: sharp_record_as(&pool(&sharp_b)),
        per_run: joint
            .into_iter()
            .zip(sharp_a)
            .zip(sharp_b)
            .map(|((j, a), b)| (j, a, b))
            .collect(),
    })
}

fn exact_point(cfg: &ExperimentConfig, design: &JointDesign<f64>, b: &BlochVector<f64>) -> Result<PointCounts> {
    let state = cfg.input_state;
    let joint_shots = (cfg.shots_per_run * cfg.runs) as f64;
    let sharp_shots = (cfg.sharp_shots() * cfg.runs) as f64;
    Ok(PointCounts {
        joint: expected_joint_counts(&state, design, joint_shots)?,
        sharp_a: expected_sharp_counts(&state, &cfg.a_axis, sharp_shots)?,
        sharp_b: expected_sharp_counts(&state, b, sharp_shots)?,
        per_run: Vec::new(),
    })
}

/// Mean ± standard error of the per-run `Δ²_αΔ²_β` values; runs whose counts
/// give no estimate are skipped.
fn run_scatter(
    per_run: &[(CountRecord, SharpCountRecord, SharpCountRecord)],
    b_sign: i8,
) -> Option<EstimateResult<f64>> {
    let values: Vec<f64> = per_run
        .iter()
        .filter_map(|(j, a, b)| {
            let joint = record_as::<f64>(j);
            let p = empirical_p(&joint).ok()?;
            estimate_joint(&joint, &sharp_record_as(a), &sharp_record_as(b), p, b_sign)
                .ok()
                .map(|e| e.delta_product.value)
        })
        .collect();
    if values.len() < 2 {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some(EstimateResult::new(mean, (var / n).sqrt()))
}

fn run_point(cfg: &ExperimentConfig, index: usize, theta_deg: f64, mode: RunMode) -> Result<ResultRow> {
    let theta = theta_deg.to_radians();
    let b = cfg.b_axis(theta_deg)?;
    let opt = match solve_optimal_sharpness(cfg.p, theta) {
        Ok(o) => o,
        Err(Error::Infeasible { theta_max_deg, .. }) => {
            let reason = format!(
                "theta = {theta_deg} deg exceeds theta_max = {theta_max_deg:.6} deg for p = {}",
                cfg.p
            );
            return Ok(ResultRow::flagged(theta_deg, RowStatus::Infeasible(reason)));
        }
        Err(e @ Error::ZeroSharpness { .. }) => {
            return Ok(ResultRow::flagged(theta_deg, RowStatus::Infeasible(e.to_string())));
        }
        Err(e) => return Err(e),
    };
    let design = match construct_directions(opt.alpha, opt.beta, &cfg.a_axis, &b, DegenerateConvention::Reject) {
        Ok(d) => d,
        Err(e @ Error::DegenerateDirection) => {
            return Ok(ResultRow::flagged(theta_deg, RowStatus::Degenerate(e.to_string())));
        }
        Err(e) => return Err(e),
    };

    let counts = match mode {
        RunMode::Simulated => simulate_point(cfg, &design, &b, RngSeed::new(cfg.master_seed).child(index as u64))?,
        RunMode::Exact => exact_point(cfg, &design, &b)?,
    };
    let p_hat = empirical_p(&counts.joint)?;
    let est: JointEstimate<f64> =
        match estimate_joint(&counts.joint, &counts.sharp_a, &counts.sharp_b, p_hat, design.b_sign()) {
            Ok(e) => e,
            Err(e) => return Ok(ResultRow::flagged(theta_deg, RowStatus::Failed(e.to_string()))),
        };
    let total_joint = counts.joint.total();
    let p_err = (p_hat * (1.0 - p_hat) / total_joint).sqrt();

    let a_expect = cfg.a_axis.dot(&cfg.input_state);
    let b_expect = b.dot(&cfg.input_state);
    let var_theory = joint_variance(opt.alpha, a_expect)? * joint_variance(opt.beta, b_expect)?;
    let sin2 = (2.0 * theta).sin();

    let values = RowValues {
        alpha_theory: EstimateResult::exact(opt.alpha),
        beta_theory: EstimateResult::exact(opt.beta),
        sin_sq_2theta: EstimateResult::exact(sin2 * sin2),
        var_product_joint_theory: EstimateResult::exact(var_theory),
        p_hat: EstimateResult::new(p_hat, p_err),
        alpha_exp: est.alpha_exp,
        beta_exp: est.beta_exp,
        delta_product: est.delta_product,
        delta_product_runs: run_scatter(&counts.per_run, design.b_sign()),
        var_product_sharp: est.var_product_sharp,
        var_product_joint: est.var_product_joint,
        a_j_bar: est.a_j_bar,
        b_j_bar: est.b_j_bar,
        sharp_a: est.sharp_a,
        sharp_b: est.sharp_b,
        sharp_c: est.sharp_c,
        sharp_d: est.sharp_d,
    };
    let status = if theta_deg == 0.0 {
        RowStatus::Degenerate("theta = 0: a and b are compatible".into())
    } else {
        RowStatus::Ok
    };
    Ok(ResultRow {
        theta_deg,
        status,
        values: Some(values),
    })
}

/// Synthesises, measures and estimates every θ point of `cfg`. Points run in
/// parallel on their own RNG streams; rows come back in θ-list order.
pub fn run_experiment(cfg: &ExperimentConfig, mode: RunMode) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    cfg.theta_list_deg
        .par_iter()
        .enumerate()
        .map(|(i, &t)| run_point(cfg, i, t, mode))
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundSummary {
    /// Rows with a delta-product estimate.
    pub points: usize,
    /// `|Δ²_αΔ²_β − sin²2θ| ≤ 3σ`.
    pub within_3_sigma: usize,
    /// `Δ²_αΔ²_β < sin²2θ − 3σ`.
    pub below_bound_3_sigma: usize,
}

pub fn bound_summary(rows: &[ResultRow]) -> BoundSummary {
    let mut s = BoundSummary::default();
    for v in rows.iter().filter_map(|r| r.values.as_ref()) {
        let (d, bound) = (v.delta_product, v.sin_sq_2theta.value);
        s.points += 1;
        if (d.value - bound).abs() <= 3.0 * d.std_err {
            s.within_3_sigma += 1;
        }
        if d.value < bound - 3.0 * d.std_err {
            s.below_bound_3_sigma += 1;
        }
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Decimal rendering with 12 significant digits; scientific notation outside
/// `[1e-6, 1e15)`.
pub fn format_sig12(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..]
        .parse()
        .expect("integer exponent");
    if !(-6..15).contains(&exp) {
        return sci;
    }
    let decimals = (11 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn csv_header() -> Vec<String> {
    let mut h = vec!["theta_deg".to_string()];
    for q in QUANTITY_COLUMNS {
        h.push(format!("{q}_value"));
        h.push(format!("{q}_std_err"));
    }
    h.push("status".into());
    h
}

fn render_csv(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(csv_header())?;
    for row in rows {
        let mut rec = vec![format_sig12(row.theta_deg)];
        match &row.values {
            Some(v) => {
                for col in v.columns() {
                    match col {
                        Some(e) => {
                            rec.push(format_sig12(e.value));
                            rec.push(format_sig12(e.std_err));
                        }
                        None => rec.extend([String::new(), String::new()]),
                    }
                }
            }
            None => rec.extend(std::iter::repeat_n(String::new(), 2 * QUANTITY_COLUMNS.len())),
        }
        rec.push(row.status.label());
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    schema_version: u32,
    rows: &'a [ResultRow],
}

/// Renders rows in the requested format.
pub fn render(rows: &[ResultRow], format: OutputFormat) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::EmptyResults);
    }
    match format {
        OutputFormat::Csv => render_csv(rows),
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&JsonDocument {
                schema_version: SCHEMA_VERSION,
                rows,
            })?;
            s.push('\n');
            Ok(s)
        }
    }
}

/// Writes rows to `destination`.
pub fn emit(rows: &[ResultRow], format: OutputFormat, destination: &Path) -> Result<()> {
    let text = render(rows, format)?;
    std::fs::write(destination, text)?;
    Ok(())
}

/// Human-readable synthesis report for one (p, θ, φ) point.
pub fn describe_design<T: Scalar>(design: &JointDesign<T>) -> String {
    let v = |b: BlochVector<T>| format!("({:.9}, {:.9}, {:.9})", b.x.as_f64(), b.y.as_f64(), b.z.as_f64());
    let mut s = String::new();
    let _ = writeln!(s, "alpha = {:.12}", design.alpha().as_f64());
    let _ = writeln!(s, "beta  = {:.12}", design.beta().as_f64());
    let _ = writeln!(s, "p     = {:.12}", design.p().as_f64());
    let _ = writeln!(s, "a     = {}", v(design.a()));
    let _ = writeln!(s, "b     = {}", v(design.b()));
    let _ = writeln!(s, "c     = {}", v(design.c()));
    let _ = writeln!(s, "d     = {}", v(design.d()));
    if design.b_relabeled() {
        let _ = writeln!(s, "note: c and d swapped so that p >= 1/2; B outcomes relabeled");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_configs() {
        let cfgs = build_paper_experiments();
        assert_eq!(cfgs[0].azimuth_phi_deg, -160.7);
        assert_eq!(cfgs[1].azimuth_phi_deg, -51.6);
        assert_eq!(cfgs[2].azimuth_phi_deg, 83.7);
        for c in &cfgs {
            assert_eq!(
                c.theta_list_deg,
                vec![1.0, 4.0, 7.0, 10.0, 13.0, 16.0, 19.0, 22.0, 25.0]
            );
            assert_eq!(c.p, 0.670);
            assert_eq!((c.shots_per_run, c.runs), (15_000, 100));
            assert_eq!(c.a_axis, BlochVector::unit_z());
            assert_eq!(c.input_state, BlochVector::unit_z());
            c.validate().unwrap();
            assert!(c.infeasible_thetas().unwrap().is_empty());
        }
    }

    #[test]
    fn b_axis_geometry() {
        let z = BlochVector::unit_z();
        let (t, phi) = (13f64.to_radians(), -51.6f64.to_radians());
        let b = b_axis(&z, t, phi).unwrap();
        let expect = BlochVector::new(
            (2.0 * t).sin() * phi.cos(),
            (2.0 * t).sin() * phi.sin(),
            (2.0 * t).cos(),
        );
        assert!((b - expect).norm() < 1e-15);
        // General axis: angle is 2θ regardless of frame.
        let a = BlochVector::new(1.0, 1.0, 0.0).normalized().unwrap();
        let b = b_axis(&a, t, 0.7).unwrap();
        assert!((a.dot(&b) - (2.0 * t).cos()).abs() < 1e-14);
        assert!(b.is_unit());
    }

    #[test]
    fn sig12_rendering() {
        assert_eq!(format_sig12(0.0), "0");
        assert_eq!(format_sig12(1.0), "1.00000000000");
        assert_eq!(format_sig12(0.5), "0.500000000000");
        assert_eq!(format_sig12(-160.7), "-160.700000000");
        assert_eq!(format_sig12(9.999999999999999), "10.0000000000");
        assert_eq!(format_sig12(1.234e-9), "1.23400000000e-9");
        assert_eq!(format_sig12(f64::NAN), "NaN");
    }

    #[test]
    fn empty_rows_rejected() {
        assert!(matches!(render(&[], OutputFormat::Csv), Err(Error::EmptyResults)));
        let dir = tempfile::tempdir().unwrap();
        assert!(emit(&[], OutputFormat::Json, &dir.path().join("x.json")).is_err());
    }

    #[test]
    fn unwritable_destination_is_io_error() {
        let rows = vec![ResultRow::flagged(1.0, RowStatus::Ok)];
        let err = emit(&rows, OutputFormat::Csv, Path::new("/nonexistent-dir/out.csv")).unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }

    #[test]
    fn infeasible_and_zero_theta_rows_are_flagged() {
        let mut cfg = build_paper_experiments()[0].clone();
        cfg.theta_list_deg = vec![0.0, 13.0, 30.0];
        cfg.runs = 2;
        cfg.shots_per_run = 1000;
        assert_eq!(cfg.infeasible_thetas().unwrap(), vec![30.0]);
        let rows = run_experiment(&cfg, RunMode::Simulated).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(matches!(rows[0].status, RowStatus::Degenerate(_)));
        assert!(rows[0].values.is_some());
        assert!(rows[1].status.is_ok());
        assert!(matches!(rows[2].status, RowStatus::Infeasible(_)));
        assert!(rows[2].values.is_none());
        let csv = render(&rows, OutputFormat::Csv).unwrap();
        assert_eq!(csv.lines().count(), 4);
        let last = csv.lines().nth(3).unwrap();
        assert!(last.contains("infeasible: theta = 30"), "{last}");
    }

    #[test]
    fn config_toml_round_trip() {
        let cfg = build_paper_experiments()[1].clone();
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
        let bad = text.replace("p = 0.67", "p = 0.2");
        assert!(matches!(ExperimentConfig::from_toml_str(&bad), Err(Error::Config(_))));
    }
}
