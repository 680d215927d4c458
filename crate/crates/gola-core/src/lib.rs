//! Group-orthogonal low-rank adaptation toolkit.
//!
//! The crate covers the full life cycle of a low-rank adapter whose ranks
//! are split into a frozen "crucial" head and grouped "redundant" tail:
//!
//! - [`adapter`]: the core algebra (forward pass, merging, permutation);
//! - [`partition`]: importance scoring, rank sorting, and balanced grouping;
//! - [`orth`]: the inter-group orthogonality penalty, its gradients, and
//!   redundancy diagnostics (heatmaps, singular spectra);
//! - [`train`]: a small deterministic SGD harness that trains only the
//!   redundant ranks under the penalty;
//! - [`metrics`]: center-error / overlap tracking metrics (PR, SR, MPR, MSR);
//! - [`io`]: the `GOLA1` tensor container plus report and CSV formats.

pub mod adapter;
pub mod error;
pub mod io;
pub mod metrics;
pub mod orth;
pub mod partition;
pub mod train;

pub use nalgebra;

pub use adapter::{AdapterPair, FeatureBatch, Permutation};
pub use error::{Error, Result};
pub use io::{
    read_adapter, read_container, read_partition_json, read_sequence_csv, write_adapter,
    write_container, write_partition_json, Container, ContainerMetadata, EvalSummary,
    NamedTensor, PartitionFile, RunManifest,
};
pub use metrics::{
    center_error, iou, mpr, msr, msr_auc, precision_rate, success_auc, success_rate, BBox,
    BBoxSequence, ModalPair,
};
pub use orth::{
    all_pairs_orth_loss, orth_heatmap, orth_loss, orth_loss_grad, orth_loss_slices, sample_pair,
    singular_spectrum, GroupPair, MatrixChoice, OrthGradients, OrthHeatmap,
};
pub use partition::{
    center_columns, cluster_groups, partition, rank_importance, sort_ranks, split_crucial,
    GroupedAdapter, ImportanceScores, RankPartition,
};
pub use train::{
    confidence_gate, frozen_checksum, make_synthetic_task, task_loss, train, train_step,
    LossBreakdown, SyntheticTask, TaskBatch, TrainConfig, TrainReport, TrainState,
};
