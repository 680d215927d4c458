//! Desk-scale training harness: plain low-rank pretraining, offline
//! partition, then constrained fine-tuning where only redundant ranks move
//! and sampled group pairs pay the orthogonality penalty.
//!
//! Everything is driven by `ChaCha8` streams split per purpose (parameter
//! init, data sampling, pair sampling), so two runs differing only in
//! `lambda` still see identical batches and the comparison isolates the
//! regularizer's effect.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adapter::AdapterPair;
use crate::error::{Error, Result};
use crate::orth::{all_pairs_orth_loss, orth_loss, orth_loss_grad, sample_pair};
use crate::partition::{partition, GroupedAdapter};

/// Number of held-out samples used for the report's final task loss.
const EVAL_BATCH: usize = 256;

/// Harness configuration. `lambda`, `k`, `n`, `tau`, and `pairs_per_step`
/// default to the published operating point; the optimizer settings
/// (`lr`, `steps`, `batch`, `momentum`) are this harness's own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Weight of the orthogonality penalty in the total objective.
    pub lambda: f64,
    /// SGD learning rate; zero freezes everything while still reporting losses.
    pub lr: f64,
    /// Constrained-phase step count; pretraining adds `steps / 2` on top.
    pub steps: usize,
    /// Samples per batch.
    pub batch: usize,
    /// Adapter rank of the harness model.
    pub rank: usize,
    /// Crucial ranks frozen after the partition.
    pub k: usize,
    /// Redundant group count.
    pub n: usize,
    /// Master seed; split into independent init/data/pair streams.
    pub seed: u64,
    /// Group pairs sampled per step for the penalty.
    pub pairs_per_step: usize,
    /// Confidence threshold for the template-update gate.
    pub tau: f64,
    /// SGD momentum; zero is plain SGD.
    pub momentum: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda: 1.4e-3,
            lr: 0.05,
            steps: 200,
            batch: 32,
            rank: 64,
            k: 16,
            n: 8,
            seed: 0,
            pairs_per_step: 1,
            tau: 0.84,
            momentum: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lambda < 0.0 || !self.lambda.is_finite() {
            return Err(Error::Validation(format!(
                "lambda must be finite and non-negative, got {}",
                self.lambda
            )));
        }
        if self.lr < 0.0 || !self.lr.is_finite() {
            return Err(Error::Validation(format!(
                "learning rate must be finite and non-negative, got {}",
                self.lr
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Validation(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        if self.batch == 0 {
            return Err(Error::Validation("batch size must be at least 1".into()));
        }
        if self.rank == 0 {
            return Err(Error::Validation("rank must be at least 1".into()));
        }
        if self.pairs_per_step == 0 {
            return Err(Error::Validation(
                "pairs_per_step must be at least 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::Validation(format!(
                "tau must lie in [0, 1], got {}",
                self.tau
            )));
        }
        Ok(())
    }
}

/// A regression task with one low-rank "challenge mode" per input region.
///
/// The base map is `W0` with i.i.d. `N(0, 1/c)` entries; mode `j` adds a
/// rank-2 perturbation built from unit-norm Gaussian vectors and is active
/// exactly when the first input feature carries the value `j + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTask {
    w0: DMatrix<f64>,
    deltas: Vec<DMatrix<f64>>,
    seed: u64,
}

/// Inputs (`c x m`) and regression targets (`c x m`) drawn from a task.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskBatch {
    x: DMatrix<f64>,
    y: DMatrix<f64>,
}

impl TaskBatch {
    pub fn new(x: DMatrix<f64>, y: DMatrix<f64>) -> Result<Self> {
        if x.ncols() != y.ncols() {
            return Err(Error::Shape {
                axis: "columns(y)",
                expected: x.ncols(),
                actual: y.ncols(),
            });
        }
        if x.ncols() == 0 {
            return Err(Error::Parameter("batch needs at least one sample".into()));
        }
        if !x.iter().all(|v| v.is_finite()) || !y.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("batch"));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.x.ncols() == 0
    }
}

fn unit_gaussian_vector<R: Rng + ?Sized>(c: usize, rng: &mut R) -> nalgebra::DVector<f64> {
    let normal = Normal::new(0.0, 1.0).expect("valid normal parameters");
    loop {
        let v = nalgebra::DVector::from_fn(c, |_, _| normal.sample(rng));
        let norm = v.norm();
        if norm > 0.0 {
            return v / norm;
        }
    }
}

/// Builds a deterministic multi-mode regression task.
pub fn make_synthetic_task(c: usize, modes: usize, seed: u64) -> Result<SyntheticTask> {
    if c < 8 {
        return Err(Error::Parameter(format!(
            "feature dimension must be at least 8, got {c}"
        )));
    }
    if !(1..=8).contains(&modes) {
        return Err(Error::Parameter(format!(
            "mode count must lie in 1..=8, got {modes}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, (1.0 / c as f64).sqrt()).expect("valid normal parameters");
    let w0 = DMatrix::from_fn(c, c, |_, _| normal.sample(&mut rng));
    let deltas = (0..modes)
        .map(|_| {
            let mut delta = DMatrix::zeros(c, c);
            for _ in 0..2 {
                let u = unit_gaussian_vector(c, &mut rng);
                let v = unit_gaussian_vector(c, &mut rng);
                delta += u * v.transpose();
            }
            delta
        })
        .collect();
    Ok(SyntheticTask { w0, deltas, seed })
}

impl SyntheticTask {
    /// Feature dimension `c` (inputs and targets are both `c`-vectors).
    pub fn dim(&self) -> usize {
        self.w0.nrows()
    }

    pub fn modes(&self) -> usize {
        self.deltas.len()
    }

    pub fn w0(&self) -> &DMatrix<f64> {
        &self.w0
    }

    /// The rank-2 perturbation of mode `j`.
    pub fn delta(&self, mode: usize) -> &DMatrix<f64> {
        &self.deltas[mode]
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Draws `m` samples with modes chosen uniformly. The first feature is
    /// the region indicator `mode + 1`; the rest are standard normal. Each
    /// target is `(W0 + ΔW_mode) x`.
    pub fn sample_batch<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Result<TaskBatch> {
        if m == 0 {
            return Err(Error::Parameter("batch needs at least one sample".into()));
        }
        let c = self.dim();
        let normal = Normal::new(0.0, 1.0).expect("valid normal parameters");
        let effective: Vec<DMatrix<f64>> =
            self.deltas.iter().map(|d| &self.w0 + d).collect();
        let mut x = DMatrix::zeros(c, m);
        let mut y = DMatrix::zeros(c, m);
        for col in 0..m {
            let mode = rng.gen_range(0..self.modes());
            x[(0, col)] = (mode + 1) as f64;
            for row in 1..c {
                x[(row, col)] = normal.sample(rng);
            }
            y.set_column(col, &(&effective[mode] * x.column(col)));
        }
        Ok(TaskBatch { x, y })
    }
}

/// Loss components of one step; `total` composes them as
/// `task + lambda * orth`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub task: f64,
    pub orth: f64,
    pub total: f64,
}

/// Mutable training state for the constrained phase: the partitioned
/// adapter plus SGD velocity slots and a step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    grouped: GroupedAdapter,
    vel_a: DMatrix<f64>,
    vel_b: DMatrix<f64>,
    step: usize,
}

impl TrainState {
    pub fn new(grouped: GroupedAdapter) -> Self {
        let (r, c_in) = (grouped.adapter().rank(), grouped.adapter().in_dim());
        let c_out = grouped.adapter().out_dim();
        Self {
            grouped,
            vel_a: DMatrix::zeros(r, c_in),
            vel_b: DMatrix::zeros(c_out, r),
            step: 0,
        }
    }

    pub fn grouped(&self) -> &GroupedAdapter {
        &self.grouped
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn into_grouped(self) -> GroupedAdapter {
        self.grouped
    }
}

/// Final losses, per-step traces, and the frozen-slice checksums proving
/// the crucial ranks never moved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub final_task_loss: f64,
    pub final_orth_loss: f64,
    pub task_trace: Vec<f64>,
    pub orth_trace: Vec<f64>,
    pub total_trace: Vec<f64>,
    pub gram_mass_trace: Vec<f64>,
    pub frozen_checksum_before: String,
    pub frozen_checksum_after: String,
    pub degenerate: bool,
}

fn mse_and_residual(adapter: &AdapterPair<f64>, batch: &TaskBatch) -> (f64, DMatrix<f64>) {
    let residual = adapter.w() * batch.x()
        + adapter.b() * (adapter.a() * batch.x()) * adapter.scale()
        - batch.y();
    let denom = (residual.nrows() * residual.ncols()) as f64;
    (residual.norm_squared() / denom, residual)
}

/// Mean squared error of the adapted map on a batch.
pub fn task_loss(adapter: &AdapterPair<f64>, batch: &TaskBatch) -> Result<f64> {
    if batch.x().nrows() != adapter.in_dim() {
        return Err(Error::Shape {
            axis: "rows(x)",
            expected: adapter.in_dim(),
            actual: batch.x().nrows(),
        });
    }
    Ok(mse_and_residual(adapter, batch).0)
}

/// Gradients of the batch MSE with respect to the low-rank factors.
fn task_gradients(
    adapter: &AdapterPair<f64>,
    batch: &TaskBatch,
    residual: &DMatrix<f64>,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let denom = (residual.nrows() * residual.ncols()) as f64;
    let coeff = 2.0 * adapter.scale() / denom;
    let rx = residual * batch.x().transpose();
    let grad_a = adapter.b().transpose() * &rx * coeff;
    let grad_b = rx * adapter.a().transpose() * coeff;
    (grad_a, grad_b)
}

/// One SGD step over every rank (the pretraining phase has no frozen
/// slices and no penalty). Returns the batch MSE.
fn plain_step(
    adapter: &mut AdapterPair<f64>,
    batch: &TaskBatch,
    lr: f64,
    momentum: f64,
    vel_a: &mut DMatrix<f64>,
    vel_b: &mut DMatrix<f64>,
) -> f64 {
    let (loss, residual) = mse_and_residual(adapter, batch);
    if lr == 0.0 {
        return loss;
    }
    let (grad_a, grad_b) = task_gradients(adapter, batch, &residual);
    *vel_a = &*vel_a * momentum + grad_a;
    *vel_b = &*vel_b * momentum + grad_b;
    *adapter.a_mut() -= &*vel_a * lr;
    *adapter.b_mut() -= &*vel_b * lr;
    loss
}

/// One constrained step: batch MSE plus `lambda` times the penalty on
/// `pairs_per_step` sampled group pairs, applied only to redundant slices.
/// Frozen crucial slices and the base weight receive no update; `lr = 0`
/// leaves the state bitwise untouched.
pub fn train_step<R: Rng + ?Sized>(
    state: &mut TrainState,
    batch: &TaskBatch,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<LossBreakdown> {
    let adapter = state.grouped.adapter();
    if batch.x().nrows() != adapter.in_dim() {
        return Err(Error::Shape {
            axis: "rows(x)",
            expected: adapter.in_dim(),
            actual: batch.x().nrows(),
        });
    }
    let (task, residual) = mse_and_residual(adapter, batch);
    let (mut grad_a, mut grad_b) = task_gradients(adapter, batch, &residual);

    let mut orth = 0.0;
    if cfg.lambda > 0.0 {
        let n_groups = state.grouped.num_groups();
        for _ in 0..cfg.pairs_per_step {
            let pair = sample_pair(n_groups, rng)?;
            orth += orth_loss(&state.grouped, &pair)?;
            let grads = orth_loss_grad(&state.grouped, &pair)?;
            let slots_i = state.grouped.group_slots(pair.i()).to_vec();
            let slots_j = state.grouped.group_slots(pair.j()).to_vec();
            for (idx, &slot) in slots_i.iter().enumerate() {
                let row = grad_a.row(slot) + grads.a_i.row(idx) * cfg.lambda;
                grad_a.set_row(slot, &row);
                let col = grad_b.column(slot) + grads.b_i.column(idx) * cfg.lambda;
                grad_b.set_column(slot, &col);
            }
            for (idx, &slot) in slots_j.iter().enumerate() {
                let row = grad_a.row(slot) + grads.a_j.row(idx) * cfg.lambda;
                grad_a.set_row(slot, &row);
                let col = grad_b.column(slot) + grads.b_j.column(idx) * cfg.lambda;
                grad_b.set_column(slot, &col);
            }
        }
    }

    let total = task + cfg.lambda * orth;
    if !total.is_finite() {
        return Err(Error::Numeric(format!(
            "non-finite loss at step {} (task {task}, orth {orth})",
            state.step
        )));
    }

    if cfg.lr != 0.0 {
        let k = state.grouped.partition().k;
        let r = state.grouped.adapter().rank();
        for slot in k..r {
            let va = state.vel_a.row(slot) * cfg.momentum + grad_a.row(slot);
            state.vel_a.set_row(slot, &va);
            let vb = state.vel_b.column(slot) * cfg.momentum + grad_b.column(slot);
            state.vel_b.set_column(slot, &vb);
            let a_row = state.grouped.adapter().a().row(slot) - state.vel_a.row(slot) * cfg.lr;
            state.grouped.adapter_mut().a_mut().set_row(slot, &a_row);
            let b_col =
                state.grouped.adapter().b().column(slot) - state.vel_b.column(slot) * cfg.lr;
            state.grouped.adapter_mut().b_mut().set_column(slot, &b_col);
        }
    }
    state.step += 1;
    Ok(LossBreakdown { task, orth, total })
}

/// SHA-256 over the parts that must never move during constrained
/// training: the base weight plus the crucial rows of `A` and columns of
/// `B`, as little-endian 64-bit floats.
pub fn frozen_checksum(grouped: &GroupedAdapter) -> String {
    let mut hasher = Sha256::new();
    for &v in grouped.adapter().w().iter() {
        hasher.update(v.to_le_bytes());
    }
    let k = grouped.partition().k;
    for slot in 0..k {
        for &v in grouped.adapter().a().row(slot).iter() {
            hasher.update(v.to_le_bytes());
        }
        for &v in grouped.adapter().b().column(slot).iter() {
            hasher.update(v.to_le_bytes());
        }
    }
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Full harness: pretrain a fresh adapter for `steps / 2` plain steps,
/// partition it, then run `steps` constrained steps. Returns the report
/// and the final partitioned adapter.
///
/// Velocity slots reset at the partition boundary because the permutation
/// invalidates their slot alignment.
pub fn train(task: &SyntheticTask, cfg: &TrainConfig) -> Result<(TrainReport, GroupedAdapter)> {
    cfg.validate()?;
    let c = task.dim();
    let r = cfg.rank;
    let mut init_rng = stream_rng(cfg.seed, 0);
    let mut data_rng = stream_rng(cfg.seed, 1);
    let mut pair_rng = stream_rng(cfg.seed, 2);

    let init = Normal::new(0.0, (1.0 / r as f64).sqrt()).expect("valid normal parameters");
    let a0 = DMatrix::from_fn(r, c, |_, _| init.sample(&mut init_rng));
    let mut adapter = AdapterPair::with_unit_scale(task.w0().clone(), a0, DMatrix::zeros(c, r))?;

    let eval_batch = task.sample_batch(EVAL_BATCH, &mut data_rng)?;

    let mut vel_a = DMatrix::zeros(r, c);
    let mut vel_b = DMatrix::zeros(c, r);
    for warm in 0..cfg.steps / 2 {
        let batch = task.sample_batch(cfg.batch, &mut data_rng)?;
        let loss = plain_step(
            &mut adapter,
            &batch,
            cfg.lr,
            cfg.momentum,
            &mut vel_a,
            &mut vel_b,
        );
        if !loss.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite loss at pretraining step {warm}"
            )));
        }
    }

    let grouped = partition(&adapter, cfg.k, cfg.n, cfg.seed)?;
    let degenerate = grouped.partition().degenerate;
    let frozen_checksum_before = frozen_checksum(&grouped);

    let mut state = TrainState::new(grouped);
    let mut task_trace = Vec::with_capacity(cfg.steps);
    let mut orth_trace = Vec::with_capacity(cfg.steps);
    let mut total_trace = Vec::with_capacity(cfg.steps);
    let mut gram_mass_trace = Vec::with_capacity(cfg.steps);
    for _ in 0..cfg.steps {
        let batch = task.sample_batch(cfg.batch, &mut data_rng)?;
        let breakdown = train_step(&mut state, &batch, cfg, &mut pair_rng)?;
        task_trace.push(breakdown.task);
        orth_trace.push(breakdown.orth);
        total_trace.push(breakdown.total);
        gram_mass_trace.push(all_pairs_orth_loss(state.grouped())?);
    }

    let frozen_checksum_after = frozen_checksum(state.grouped());
    let final_task_loss = task_loss(state.grouped().adapter(), &eval_batch)?;
    let final_orth_loss = all_pairs_orth_loss(state.grouped())?;
    let report = TrainReport {
        final_task_loss,
        final_orth_loss,
        task_trace,
        orth_trace,
        total_trace,
        gram_mass_trace,
        frozen_checksum_before,
        frozen_checksum_after,
        degenerate,
    };
    Ok((report, state.into_grouped()))
}

/// Template-update gate: update when the tracker's confidence reaches the
/// threshold (inclusive).
pub fn confidence_gate(conf: f64, tau: f64) -> Result<bool> {
    if !(0.0..=1.0).contains(&conf) {
        return Err(Error::Validation(format!(
            "confidence {conf} outside [0, 1]"
        )));
    }
    Ok(conf >= tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orth::{orth_heatmap, MatrixChoice};

    #[test]
    fn defaults_match_published_operating_point() {
        let cfg = TrainConfig::default();
        assert_eq!(cfg.lambda, 1.4e-3);
        assert_eq!(cfg.k, 16);
        assert_eq!(cfg.n, 8);
        assert_eq!(cfg.tau, 0.84);
        assert_eq!(cfg.rank, 64);
        assert_eq!(cfg.pairs_per_step, 1);
        cfg.validate().unwrap();
    }

    #[test]
    fn config_rejects_bad_values() {
        for mutate in [
            (|c: &mut TrainConfig| c.lambda = -1.0) as fn(&mut TrainConfig),
            |c| c.lr = f64::NAN,
            |c| c.batch = 0,
            |c| c.tau = 1.5,
            |c| c.momentum = 1.0,
            |c| c.pairs_per_step = 0,
        ] {
            let mut cfg = TrainConfig::default();
            mutate(&mut cfg);
            assert!(cfg.validate().is_err());
        }
    }

    #[test]
    fn single_mode_task_is_shifted_regression() {
        let task = make_synthetic_task(8, 1, 3).unwrap();
        assert_eq!(task.modes(), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let batch = task.sample_batch(16, &mut rng).unwrap();
        let w = task.w0() + task.delta(0);
        for col in 0..16 {
            assert_eq!(batch.x()[(0, col)], 1.0);
            let expected = &w * batch.x().column(col);
            assert!((batch.y().column(col) - expected).abs().max() <= 1e-12);
        }
    }

    #[test]
    fn same_seed_gives_bitwise_identical_task() {
        let t1 = make_synthetic_task(16, 4, 77).unwrap();
        let t2 = make_synthetic_task(16, 4, 77).unwrap();
        assert_eq!(t1, t2);
    }

    #[test]
    fn batch_labels_match_generator_oracle() {
        let task = make_synthetic_task(32, 4, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let batch = task.sample_batch(64, &mut rng).unwrap();
        for col in 0..64 {
            let mode = batch.x()[(0, col)] as usize - 1;
            assert!(mode < 4);
            let mut expected = nalgebra::DVector::zeros(32);
            for row in 0..32 {
                let mut acc = 0.0;
                for p in 0..32 {
                    acc += (task.w0()[(row, p)] + task.delta(mode)[(row, p)])
                        * batch.x()[(p, col)];
                }
                expected[row] = acc;
            }
            assert!((batch.y().column(col) - expected).abs().max() <= 1e-10);
        }
    }

    #[test]
    fn task_rejects_bad_parameters() {
        assert!(make_synthetic_task(4, 1, 0).is_err());
        assert!(make_synthetic_task(8, 0, 0).is_err());
        assert!(make_synthetic_task(8, 9, 0).is_err());
    }

    #[test]
    fn perturbations_have_rank_two() {
        let task = make_synthetic_task(16, 3, 11).unwrap();
        for mode in 0..3 {
            let spectrum = task.delta(mode).clone().svd(false, false);
            let significant = spectrum
                .singular_values
                .iter()
                .filter(|&&s| s > 1e-10)
                .count();
            assert!(significant <= 2);
        }
    }

    fn small_cfg() -> TrainConfig {
        TrainConfig {
            steps: 20,
            batch: 8,
            rank: 12,
            k: 2,
            n: 2,
            lr: 0.05,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn zero_lr_leaves_state_bitwise_unchanged() {
        let task = make_synthetic_task(16, 2, 1).unwrap();
        let cfg = TrainConfig {
            lr: 0.0,
            ..small_cfg()
        };
        let (report, _) = train(&task, &cfg).unwrap();
        assert_eq!(
            report.frozen_checksum_before,
            report.frozen_checksum_after
        );
        assert!(report.task_trace.iter().all(|&l| l > 0.0));

        let mut data_rng = ChaCha8Rng::seed_from_u64(3);
        let batch = task.sample_batch(8, &mut data_rng).unwrap();
        let grouped = {
            let mut warm_rng = stream_rng(1, 0);
            let init = Normal::new(0.0, (1.0 / 12.0f64).sqrt()).unwrap();
            let a0 = DMatrix::from_fn(12, 16, |_, _| init.sample(&mut warm_rng));
            let adapter = AdapterPair::with_unit_scale(
                task.w0().clone(),
                a0,
                DMatrix::from_fn(16, 12, |i, j| ((i * 13 + j) % 7) as f64 * 0.1 - 0.3),
            )
            .unwrap();
            partition(&adapter, 2, 2, 5).unwrap()
        };
        let mut state = TrainState::new(grouped);
        let snapshot = state.clone();
        let mut pair_rng = ChaCha8Rng::seed_from_u64(0);
        let breakdown = train_step(&mut state, &batch, &cfg, &mut pair_rng).unwrap();
        assert_eq!(state.grouped, snapshot.grouped);
        assert_eq!(state.vel_a, snapshot.vel_a);
        assert_eq!(state.vel_b, snapshot.vel_b);
        assert_eq!(state.step, 1);
        assert!(breakdown.task.is_finite() && breakdown.total.is_finite());
    }

    #[test]
    fn lambda_zero_matches_plain_masked_sgd() {
        let task = make_synthetic_task(16, 2, 8).unwrap();
        let cfg = TrainConfig {
            lambda: 0.0,
            ..small_cfg()
        };
        let grouped = {
            let mut rng = ChaCha8Rng::seed_from_u64(2);
            let adapter = AdapterPair::with_unit_scale(
                task.w0().clone(),
                DMatrix::from_fn(12, 16, |_, _| rng.gen_range(-0.5..0.5)),
                DMatrix::from_fn(16, 12, |_, _| rng.gen_range(-0.5..0.5)),
            )
            .unwrap();
            partition(&adapter, 2, 2, 0).unwrap()
        };
        let mut data_rng = ChaCha8Rng::seed_from_u64(4);
        let batch = task.sample_batch(8, &mut data_rng).unwrap();

        let expected = {
            let adapter = grouped.adapter();
            let residual = adapter.w() * batch.x()
                + adapter.b() * (adapter.a() * batch.x()) - batch.y();
            let denom = (16 * 8) as f64;
            let rx = &residual * batch.x().transpose();
            let grad_a = adapter.b().transpose() * &rx * (2.0 / denom);
            let grad_b = &rx * adapter.a().transpose() * (2.0 / denom);
            let mut a = adapter.a().clone();
            let mut b = adapter.b().clone();
            for slot in 2..12 {
                let row = a.row(slot) - grad_a.row(slot) * cfg.lr;
                a.set_row(slot, &row);
                let col = b.column(slot) - grad_b.column(slot) * cfg.lr;
                b.set_column(slot, &col);
            }
            (a, b)
        };

        let mut state = TrainState::new(grouped);
        let mut pair_rng = ChaCha8Rng::seed_from_u64(0);
        let before_pair_state = pair_rng.clone();
        train_step(&mut state, &batch, &cfg, &mut pair_rng).unwrap();
        assert_eq!(pair_rng, before_pair_state, "disabled penalty must not draw pairs");
        assert_eq!(state.grouped().adapter().a(), &expected.0);
        assert_eq!(state.grouped().adapter().b(), &expected.1);
        for slot in 0..2 {
            assert_eq!(
                state.grouped().adapter().a().row(slot),
                state.grouped().adapter().a().row(slot)
            );
        }
    }

    #[test]
    fn one_parameter_toy_matches_closed_form() {
        // Rank 2 at c = 2 keeps everything hand-computable: with W = 0,
        // B = 0, only A's update matters and dMSE/dB = (2/(c m)) E Xᵀ Aᵀ,
        // dMSE/dA = (2/(c m)) Bᵀ E Xᵀ = 0, so a single step moves B alone.
        let x = DMatrix::from_row_slice(2, 1, &[1.0, 0.0]);
        let y = DMatrix::from_row_slice(2, 1, &[1.0, 0.0]);
        let batch = TaskBatch::new(x, y).unwrap();
        let adapter = AdapterPair::with_unit_scale(
            DMatrix::zeros(2, 2),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
            DMatrix::zeros(2, 2),
        )
        .unwrap();
        let grouped = crate::partition::split_crucial(
            &adapter,
            &crate::adapter::Permutation::identity(2),
            1,
        )
        .unwrap();
        // One redundant slot (slot 1); groups are not needed for the
        // gradient path when lambda = 0.
        let cfg = TrainConfig {
            lambda: 0.0,
            lr: 0.25,
            rank: 2,
            k: 1,
            ..TrainConfig::default()
        };
        let mut state = TrainState::new(grouped);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let breakdown = train_step(&mut state, &batch, &cfg, &mut rng).unwrap();
        // E = -y, so MSE = (1² + 0²)/(2·1) = 0.5 and
        // dL/dB = (2/2)·(-y)·xᵀ·Aᵀ = -[[1,0],[0,0]]; only column 1 of B is
        // trainable and its gradient is zero, so B stays zero.
        assert!((breakdown.task - 0.5).abs() <= 1e-15);
        assert!(state.grouped().adapter().b().iter().all(|&v| v == 0.0));

        // Move the signal to the redundant slot: x = e2 with A = I makes
        // (A x) = e2, so dL/dB column 1 = (2/(c m))·E·1 = -e1 and the new
        // B[(0,1)] = 0 − lr·(−1) = 0.25.
        let x = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let y = DMatrix::from_row_slice(2, 1, &[1.0, 0.0]);
        let batch = TaskBatch::new(x, y).unwrap();
        let breakdown = train_step(&mut state, &batch, &cfg, &mut rng).unwrap();
        assert!((breakdown.task - 0.5).abs() <= 1e-15);
        assert!((state.grouped().adapter().b()[(0, 1)] - 0.25).abs() <= 1e-15);
    }

    #[test]
    fn steps_zero_gives_empty_traces_and_equal_checksums() {
        let task = make_synthetic_task(16, 2, 6).unwrap();
        let cfg = TrainConfig {
            steps: 0,
            ..small_cfg()
        };
        let (report, _) = train(&task, &cfg).unwrap();
        assert!(report.task_trace.is_empty());
        assert!(report.orth_trace.is_empty());
        assert!(report.gram_mass_trace.is_empty());
        assert_eq!(
            report.frozen_checksum_before,
            report.frozen_checksum_after
        );
        // A fresh adapter has B = 0, so the importance scores are degenerate.
        assert!(report.degenerate);
    }

    #[test]
    fn frozen_slices_never_move() {
        let task = make_synthetic_task(24, 3, 2).unwrap();
        let cfg = TrainConfig {
            steps: 30,
            batch: 8,
            rank: 16,
            k: 4,
            n: 3,
            ..TrainConfig::default()
        };
        let (report, grouped) = train(&task, &cfg).unwrap();
        assert_eq!(report.frozen_checksum_before, report.frozen_checksum_after);
        assert_eq!(frozen_checksum(&grouped), report.frozen_checksum_after);
        assert_eq!(report.task_trace.len(), 30);
        assert_eq!(report.gram_mass_trace.len(), 30);
    }

    #[test]
    fn report_total_decomposes_exactly() {
        let task = make_synthetic_task(16, 2, 12).unwrap();
        let cfg = small_cfg();
        let (report, _) = train(&task, &cfg).unwrap();
        for ((&task_l, &orth_l), &total_l) in report
            .task_trace
            .iter()
            .zip(&report.orth_trace)
            .zip(&report.total_trace)
        {
            let expected = task_l + cfg.lambda * orth_l;
            let denom = expected.abs().max(1e-300);
            assert!((total_l - expected).abs() / denom <= 1e-7);
        }
    }

    #[test]
    fn training_is_deterministic() {
        let task = make_synthetic_task(16, 2, 9).unwrap();
        let cfg = small_cfg();
        let (r1, g1) = train(&task, &cfg).unwrap();
        let (r2, g2) = train(&task, &cfg).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(g1.adapter(), g2.adapter());
    }

    #[test]
    fn paired_runs_see_identical_batches() {
        // The lambda stream separation means a regularized and an
        // unregularized run draw the same data; their first-step task
        // losses coincide exactly.
        let task = make_synthetic_task(16, 2, 21).unwrap();
        let base = small_cfg();
        let with = TrainConfig {
            lambda: 1.4e-3,
            ..base.clone()
        };
        let without = TrainConfig {
            lambda: 0.0,
            ..base
        };
        let (r1, _) = train(&task, &with).unwrap();
        let (r0, _) = train(&task, &without).unwrap();
        assert_eq!(r1.task_trace[0], r0.task_trace[0]);
    }

    #[test]
    fn penalty_reduces_group_overlap() {
        let task = make_synthetic_task(32, 4, 30).unwrap();
        let cfg = TrainConfig {
            steps: 120,
            batch: 16,
            rank: 24,
            k: 4,
            n: 4,
            ..TrainConfig::default()
        };
        let off = |lambda: f64, seed: u64| -> (f64, f64) {
            let cfg = TrainConfig {
                lambda,
                seed,
                ..cfg.clone()
            };
            let (report, grouped) = train(&task, &cfg).unwrap();
            let map = orth_heatmap(&grouped, MatrixChoice::B).unwrap();
            (map.off_diagonal_mean(), report.final_task_loss)
        };
        let (mass_on, mse_on) = off(1.4e-3, 5);
        let (mass_off, mse_off) = off(0.0, 5);
        assert!(
            mass_on < mass_off,
            "penalty should lower overlap: {mass_on} vs {mass_off}"
        );
        assert!(mse_on <= 2.0 * mse_off, "fit destroyed: {mse_on} vs {mse_off}");
    }

    #[test]
    fn gate_boundary_is_inclusive() {
        assert!(confidence_gate(0.84, 0.84).unwrap());
        assert!(!confidence_gate(0.0, 0.84).unwrap());
        assert!(confidence_gate(1.0, 0.84).unwrap());
        assert!(confidence_gate(1.0, 1.0).unwrap());
        assert!(!confidence_gate(0.5, 0.84).unwrap());
        assert!(confidence_gate(1.2, 0.5).is_err());
        assert!(confidence_gate(-0.1, 0.5).is_err());
        assert!(confidence_gate(f64::NAN, 0.5).is_err());
    }
}
