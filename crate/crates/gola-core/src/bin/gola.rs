//! Command-line front end for the adapter pipeline: `partition` an
//! adapter container, `train` the synthetic harness, `eval` tracked box
//! sequences, and `analyze` a trained adapter's redundancy structure.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gola_core::io::{
    file_digest, read_adapter, read_partition_json, read_sequence_csv, sig9, write_adapter,
    write_heatmap_csv, write_histogram_csv, write_json_pretty, write_loss_trace_csv,
    write_partition_json, write_spectrum_csv, EvalSummary, EvalThresholds, RunManifest,
};
use gola_core::metrics::{mpr, msr_auc, precision_rate, success_auc, ModalPair};
use gola_core::orth::{orth_heatmap, singular_spectrum, MatrixChoice};
use gola_core::partition::{partition, GroupedAdapter};
use gola_core::train::{make_synthetic_task, train, TrainConfig};
use gola_core::{Error, Result};

const HISTOGRAM_BINS: usize = 50;

#[derive(Parser)]
#[command(name = "gola", version, about = "Group-orthogonal low-rank adapter tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split an adapter's ranks into crucial and grouped redundant sets.
    Partition {
        /// Adapter container to read.
        #[arg(long = "in")]
        input: PathBuf,
        /// Number of crucial ranks to freeze.
        #[arg(long, default_value_t = 16)]
        k: usize,
        /// Number of redundant groups.
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Clustering seed (the GOLA_SEED environment variable wins).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Partition JSON destination; the permuted container lands at
        /// `<out>.gola`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the synthetic training harness with the orthogonality penalty.
    Train {
        /// Seed of the synthetic task generator.
        #[arg(long, default_value_t = 0)]
        task_seed: u64,
        /// Number of latent task modes.
        #[arg(long, default_value_t = 4)]
        modes: usize,
        /// Feature dimension of the synthetic task.
        #[arg(long, default_value_t = 64)]
        c: usize,
        /// Training config JSON; defaults apply when omitted.
        #[arg(long)]
        cfg: Option<PathBuf>,
        /// Directory receiving report, traces, adapter, and manifest.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Score tracked box sequences for both modalities.
    Eval {
        /// Visible-modality sequence CSV (predictions and ground truth).
        #[arg(long)]
        visible: PathBuf,
        /// Thermal-modality sequence CSV.
        #[arg(long)]
        thermal: PathBuf,
        /// Center-error threshold in pixels for PR and MPR.
        #[arg(long, default_value_t = 20.0)]
        xi_pr: f64,
        /// Summary JSON destination.
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit spectrum, heatmap, and histogram CSVs for a trained adapter.
    Analyze {
        /// Adapter container to read.
        #[arg(long = "in")]
        input: PathBuf,
        /// Partition JSON matching the container.
        #[arg(long)]
        partition: PathBuf,
        /// Singular-spectrum CSV destination.
        #[arg(long)]
        spectrum_out: PathBuf,
        /// Group-heatmap CSV destination.
        #[arg(long)]
        heatmap_out: PathBuf,
        /// Histogram CSV destination; defaults to `<spectrum-out
        /// stem>.hist.csv`.
        #[arg(long)]
        hist_out: Option<PathBuf>,
        /// Which factor's rank vectors feed the heatmap.
        #[arg(long, value_enum, default_value_t = CliMatrix::B)]
        matrix: CliMatrix,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CliMatrix {
    A,
    B,
}

impl From<CliMatrix> for MatrixChoice {
    fn from(m: CliMatrix) -> Self {
        match m {
            CliMatrix::A => MatrixChoice::A,
            CliMatrix::B => MatrixChoice::B,
        }
    }
}

/// `GOLA_SEED` beats the flag when present; a malformed value is a user
/// error, not a silent fallback.
fn effective_seed(flag: u64) -> Result<u64> {
    match std::env::var("GOLA_SEED") {
        Ok(raw) => raw.trim().parse().map_err(|e| {
            Error::Validation(format!("GOLA_SEED {raw:?} is not an unsigned integer: {e}"))
        }),
        Err(std::env::VarError::NotPresent) => Ok(flag),
        Err(e) => Err(Error::Validation(format!("GOLA_SEED: {e}"))),
    }
}

fn group_sizes(groups: &[Vec<usize>]) -> Vec<usize> {
    groups.iter().map(Vec::len).collect()
}

fn cmd_partition(input: &Path, k: usize, n: usize, seed: u64, out: &Path) -> Result<()> {
    let seed = effective_seed(seed)?;
    let (adapter, metadata) = read_adapter(input)?;
    let grouped = partition(&adapter.to_f64(), k, n, seed)?;
    let plan = grouped.partition();
    write_partition_json(out, plan)?;
    let permuted = PathBuf::from(format!("{}.gola", out.display()));
    write_adapter(&permuted, &grouped.adapter().to_f32(), &metadata.layer_name)?;
    println!(
        "partitioned rank {}: k={} n={} groups={:?} degenerate={}",
        plan.rank(),
        plan.k,
        plan.n,
        group_sizes(&plan.groups),
        plan.degenerate
    );
    Ok(())
}

fn cmd_train(
    task_seed: u64,
    modes: usize,
    c: usize,
    cfg_path: Option<&Path>,
    out_dir: &Path,
) -> Result<()> {
    let cfg: TrainConfig = match cfg_path {
        Some(p) => serde_json::from_slice(&fs::read(p)?)?,
        None => TrainConfig::default(),
    };
    let task = make_synthetic_task(c, modes, task_seed)?;
    let (report, grouped) = train(&task, &cfg)?;

    fs::create_dir_all(out_dir)?;
    let report_path = out_dir.join("report.json");
    let trace_path = out_dir.join("loss_trace.csv");
    let adapter_path = out_dir.join("adapter.gola");
    let partition_path = out_dir.join("partition.json");

    write_json_pretty(&report_path, &report)?;
    write_loss_trace_csv(&trace_path, &report.task_trace, &report.orth_trace)?;
    write_adapter(&adapter_path, &grouped.adapter().to_f32(), "synthetic")?;
    write_partition_json(&partition_path, grouped.partition())?;

    let named = |name: &str| -> gola_core::Result<gola_core::io::FileDigest> {
        let mut digest = file_digest(&out_dir.join(name))?;
        digest.path = name.into();
        Ok(digest)
    };
    let mut inputs = Vec::new();
    if let Some(p) = cfg_path {
        inputs.push(file_digest(p)?);
    }
    let manifest = RunManifest {
        tool: "gola".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: "train".into(),
        config: serde_json::to_value(&cfg)?,
        seeds: BTreeMap::from([
            ("task_seed".to_string(), task_seed),
            ("train_seed".to_string(), cfg.seed),
        ]),
        inputs,
        outputs: vec![
            named("report.json")?,
            named("loss_trace.csv")?,
            named("adapter.gola")?,
            named("partition.json")?,
        ],
    };
    write_json_pretty(&out_dir.join("manifest.json"), &manifest)?;

    println!(
        "trained {} steps: task {} orth {}",
        cfg.steps,
        sig9(report.final_task_loss),
        sig9(report.final_orth_loss)
    );
    Ok(())
}

fn cmd_eval(visible: &Path, thermal: &Path, xi_pr: f64, out: &Path) -> Result<()> {
    let vis = read_sequence_csv(visible)?;
    let th = read_sequence_csv(thermal)?;
    let pair = ModalPair::new(vis, th)?;
    let summary = EvalSummary {
        pr: precision_rate(pair.visible(), xi_pr),
        sr_auc: success_auc(pair.visible()),
        mpr: mpr(&pair, xi_pr),
        msr_auc: msr_auc(&pair),
        n: pair.len(),
        thresholds: EvalThresholds {
            xi_pr,
            xi_sr_grid: (0..=20).map(|i| i as f64 / 20.0).collect(),
        },
    };
    write_json_pretty(out, &summary)?;
    println!("PR {:.4}", summary.pr);
    println!("SR_auc {:.4}", summary.sr_auc);
    println!("MPR {:.4}", summary.mpr);
    println!("MSR_auc {:.4}", summary.msr_auc);
    Ok(())
}

fn cmd_analyze(
    input: &Path,
    partition_path: &Path,
    spectrum_out: &Path,
    heatmap_out: &Path,
    hist_out: Option<&Path>,
    matrix: CliMatrix,
) -> Result<()> {
    let (adapter, _) = read_adapter(input)?;
    let plan = read_partition_json(partition_path)?;
    let grouped = GroupedAdapter::new(adapter.to_f64(), plan)?;

    let spectrum = singular_spectrum(grouped.adapter());
    write_spectrum_csv(spectrum_out, &spectrum)?;

    let heatmap = orth_heatmap(&grouped, matrix.into())?;
    write_heatmap_csv(heatmap_out, &heatmap)?;

    let derived = spectrum_out.with_extension("hist.csv");
    let hist_path = hist_out.unwrap_or(&derived);
    write_histogram_csv(hist_path, &spectrum, HISTOGRAM_BINS)?;

    println!(
        "analyzed rank {}: {} groups, heatmap off-diagonal mean {}",
        grouped.adapter().rank(),
        grouped.num_groups(),
        sig9(heatmap.off_diagonal_mean())
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Partition { input, k, n, seed, out } => cmd_partition(&input, k, n, seed, &out),
        Command::Train { task_seed, modes, c, cfg, out_dir } => {
            cmd_train(task_seed, modes, c, cfg.as_deref(), &out_dir)
        }
        Command::Eval { visible, thermal, xi_pr, out } => cmd_eval(&visible, &thermal, xi_pr, &out),
        Command::Analyze {
            input,
            partition,
            spectrum_out,
            heatmap_out,
            hist_out,
            matrix,
        } => cmd_analyze(
            &input,
            &partition,
            &spectrum_out,
            &heatmap_out,
            hist_out.as_deref(),
            matrix,
        ),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
