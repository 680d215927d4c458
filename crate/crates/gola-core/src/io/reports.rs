//! Report artifacts: partition JSON, evaluation summaries, run manifests,
//! and the CSV schemas (loss trace, spectrum, heatmap, histogram, tracked
//! sequences).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::io::{atomic_write, read_bytes, read_text};
use crate::metrics::{BBox, BBoxSequence};
use crate::orth::OrthHeatmap;
use crate::partition::RankPartition;

/// Fixed 9-significant-digit form used for every CSV float, keeping
/// artifacts byte-stable across runs and platforms.
pub fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

/// Path plus content digest of an emitted or consumed file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

pub fn file_digest(path: &Path) -> Result<FileDigest> {
    let bytes = read_bytes(path)?;
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    })
}

/// Everything needed to reproduce a run: tool identity, config echo,
/// seeds, and digests of all files read and written. No timestamps, so
/// identical runs produce identical manifests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

/// Serialize any report as pretty JSON with a trailing newline.
pub fn write_json_pretty<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    atomic_write(path, &bytes)
}

/// On-disk form of a rank partition; the group count is implicit in the
/// group list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionFile {
    pub sigma: Vec<usize>,
    pub k: usize,
    pub groups: Vec<Vec<usize>>,
    pub seed: u64,
    pub degenerate: bool,
}

impl From<&RankPartition> for PartitionFile {
    fn from(p: &RankPartition) -> Self {
        Self {
            sigma: p.sigma.clone(),
            k: p.k,
            groups: p.groups.clone(),
            seed: p.seed,
            degenerate: p.degenerate,
        }
    }
}

impl PartitionFile {
    pub fn into_partition(self) -> Result<RankPartition> {
        let partition = RankPartition {
            sigma: self.sigma,
            k: self.k,
            n: self.groups.len(),
            groups: self.groups,
            seed: self.seed,
            degenerate: self.degenerate,
        };
        partition.validate()?;
        Ok(partition)
    }
}

pub fn write_partition_json(path: &Path, partition: &RankPartition) -> Result<()> {
    write_json_pretty(path, &PartitionFile::from(partition))
}

pub fn read_partition_json(path: &Path) -> Result<RankPartition> {
    let bytes = read_bytes(path)?;
    let file: PartitionFile = serde_json::from_slice(&bytes)?;
    file.into_partition()
}

/// Threshold settings echoed into an evaluation summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalThresholds {
    pub xi_pr: f64,
    pub xi_sr_grid: Vec<f64>,
}

/// Tracking scores for one visible/thermal sequence pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    #[serde(rename = "PR")]
    pub pr: f64,
    #[serde(rename = "SR_auc")]
    pub sr_auc: f64,
    #[serde(rename = "MPR")]
    pub mpr: f64,
    #[serde(rename = "MSR_auc")]
    pub msr_auc: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub thresholds: EvalThresholds,
}

/// `step,task_loss,orth_loss` rows, one per constrained training step.
pub fn write_loss_trace_csv(path: &Path, task: &[f64], orth: &[f64]) -> Result<()> {
    if task.len() != orth.len() {
        return Err(Error::Validation(format!(
            "loss traces disagree on length: {} task vs {} orth",
            task.len(),
            orth.len()
        )));
    }
    let mut out = String::from("step,task_loss,orth_loss\n");
    for (step, (t, o)) in task.iter().zip(orth).enumerate() {
        out.push_str(&format!("{step},{},{}\n", sig9(*t), sig9(*o)));
    }
    atomic_write(path, out.as_bytes())
}

/// `index,sigma` rows, descending singular values of the effective update.
pub fn write_spectrum_csv(path: &Path, sigmas: &[f64]) -> Result<()> {
    let mut out = String::from("index,sigma\n");
    for (i, s) in sigmas.iter().enumerate() {
        out.push_str(&format!("{i},{}\n", sig9(*s)));
    }
    atomic_write(path, out.as_bytes())
}

/// n×n row-major grid with a `g0..g{n-1}` header line.
pub fn write_heatmap_csv(path: &Path, heatmap: &OrthHeatmap) -> Result<()> {
    let n = heatmap.num_groups();
    let header: Vec<String> = (0..n).map(|j| format!("g{j}")).collect();
    let mut out = header.join(",");
    out.push('\n');
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| sig9(heatmap.values()[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

/// Equal-width histogram over [0, max(values)] as
/// `bin_start,bin_end,count`; a flat all-zero input lands in bin 0.
pub fn write_histogram_csv(path: &Path, values: &[f64], bins: usize) -> Result<()> {
    if bins == 0 {
        return Err(Error::Parameter("histogram needs at least one bin".into()));
    }
    let max = values.iter().cloned().fold(0.0f64, f64::max);
    let width = max / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let idx = if width > 0.0 {
            ((v / width) as usize).min(bins - 1)
        } else {
            0
        };
        counts[idx] += 1;
    }
    let mut out = String::from("bin_start,bin_end,count\n");
    for (i, count) in counts.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{count}\n",
            sig9(width * i as f64),
            sig9(width * (i + 1) as f64)
        ));
    }
    atomic_write(path, out.as_bytes())
}

/// Header every tracked-sequence CSV must open with: frame index,
/// prediction box, ground-truth box.
pub const SEQUENCE_CSV_HEADER: &str = "frame,px,py,pw,ph,gx,gy,gw,gh";

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        file: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

/// Parse a tracked-sequence CSV into per-frame (prediction, ground truth)
/// pairs. Frames must be strictly increasing.
pub fn read_sequence_csv(path: &Path) -> Result<BBoxSequence> {
    let text = read_text(path)?;
    let mut frames = Vec::new();
    let mut last_frame: Option<u64> = None;
    let mut lineno = 0usize;
    for raw in text.lines() {
        lineno += 1;
        let line = raw.trim_end_matches('\r');
        if lineno == 1 {
            if line != SEQUENCE_CSV_HEADER {
                return Err(parse_err(
                    path,
                    1,
                    format!("expected header {SEQUENCE_CSV_HEADER:?}, found {line:?}"),
                ));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(parse_err(
                path,
                lineno,
                format!("expected 9 comma-separated fields, found {}", fields.len()),
            ));
        }
        let frame: u64 = fields[0]
            .parse()
            .map_err(|e| parse_err(path, lineno, format!("frame index: {e}")))?;
        if let Some(prev) = last_frame {
            if frame <= prev {
                return Err(parse_err(
                    path,
                    lineno,
                    format!("frame {frame} does not increase past {prev}"),
                ));
            }
        }
        last_frame = Some(frame);
        let mut nums = [0.0f64; 8];
        for (slot, (field, name)) in fields[1..]
            .iter()
            .zip(["px", "py", "pw", "ph", "gx", "gy", "gw", "gh"])
            .enumerate()
        {
            nums[slot] = field
                .parse()
                .map_err(|e| parse_err(path, lineno, format!("field {name}: {e}")))?;
        }
        let pred = BBox::new(nums[0], nums[1], nums[2], nums[3])
            .map_err(|e| parse_err(path, lineno, format!("prediction box: {e}")))?;
        let gt = BBox::new(nums[4], nums[5], nums[6], nums[7])
            .map_err(|e| parse_err(path, lineno, format!("ground-truth box: {e}")))?;
        frames.push((pred, gt));
    }
    if frames.is_empty() {
        return Err(parse_err(path, lineno.max(1), "sequence has no frames"));
    }
    BBoxSequence::new(frames)
}
