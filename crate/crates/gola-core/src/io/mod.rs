//! On-disk formats: the `GOLA1` tensor container, partition and report
//! JSON, and the CSV schemas for loss traces, spectra, heatmaps,
//! histograms, and tracked box sequences.
//!
//! Every writer goes through [`atomic_write`] (write to a temp file in
//! the same directory, then rename) so a crash never leaves a partially
//! written artifact, and every float destined for a CSV cell is formatted
//! by [`sig9`] so repeated runs are byte-identical.

mod container;
mod reports;

pub use container::{
    read_adapter, read_container, write_adapter, write_container, Container, ContainerMetadata,
    NamedTensor, CONTAINER_MAGIC, CONTAINER_VERSION,
};
pub use reports::{
    file_digest, read_partition_json, read_sequence_csv, sha256_hex, sig9, write_heatmap_csv,
    write_histogram_csv, write_json_pretty, write_loss_trace_csv, write_partition_json,
    write_spectrum_csv, EvalSummary, EvalThresholds, FileDigest, PartitionFile, RunManifest,
    SEQUENCE_CSV_HEADER,
};

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

fn with_path(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(
        e.kind(),
        format!("{}: {e}", path.display()),
    ))
}

/// `fs::read` with the path folded into the error message.
pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| with_path(path, e))
}

/// `fs::read_to_string` with the path folded into the error message.
pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| with_path(path, e))
}

/// Write `bytes` to `path` via a sibling temp file and a rename, so the
/// destination is never observable half-written.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = path.with_file_name(format!(".{file_name}.tmp"));
    fs::write(&tmp, bytes).map_err(|e| with_path(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| with_path(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_and_cleans_up() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.txt");
        atomic_write(&path, b"one").unwrap();
        atomic_write(&path, b"two").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"two");
        let leftovers: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .filter(|n| n != "out.txt")
            .collect();
        assert!(leftovers.is_empty(), "stray files: {leftovers:?}");
    }
}
