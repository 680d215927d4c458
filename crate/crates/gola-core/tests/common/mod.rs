//! Helpers shared by the integration suites: random adapter builders and
//! a wrapper for driving the `gola` binary.

#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use gola_core::AdapterPair;

pub fn random_adapter_f64(
    rng: &mut ChaCha8Rng,
    c_out: usize,
    c_in: usize,
    r: usize,
) -> AdapterPair<f64> {
    let w = DMatrix::from_fn(c_out, c_in, |_, _| rng.gen_range(-1.0..1.0));
    let a = DMatrix::from_fn(r, c_in, |_, _| rng.gen_range(-1.0..1.0));
    let b = DMatrix::from_fn(c_out, r, |_, _| rng.gen_range(-1.0..1.0));
    let scale = rng.gen_range(0.1..2.0);
    AdapterPair::new(w, a, b, scale).expect("random adapter dimensions are valid")
}

pub fn random_adapter_f32(
    rng: &mut ChaCha8Rng,
    c_out: usize,
    c_in: usize,
    r: usize,
) -> AdapterPair<f32> {
    let w = DMatrix::from_fn(c_out, c_in, |_, _| rng.gen_range(-1.0f32..1.0));
    let a = DMatrix::from_fn(r, c_in, |_, _| rng.gen_range(-1.0f32..1.0));
    let b = DMatrix::from_fn(c_out, r, |_, _| rng.gen_range(-1.0f32..1.0));
    let scale = rng.gen_range(0.1f32..2.0);
    AdapterPair::new(w, a, b, scale).expect("random adapter dimensions are valid")
}

/// Run the CLI with a scrubbed environment (no `GOLA_SEED` leakage) and
/// return its output.
pub fn run_gola(args: &[&str]) -> Output {
    run_gola_env(args, &[])
}

pub fn run_gola_env(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gola"));
    cmd.args(args).env_remove("GOLA_SEED");
    for (key, value) in envs {
        cmd.env(key, value);
    }
    cmd.output().expect("gola binary runs")
}

pub fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("process exited normally")
}

pub fn stdout_text(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

pub fn stderr_text(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

/// Bit patterns of every f32 entry, for bitwise matrix comparison.
pub fn f32_bits(m: &DMatrix<f32>) -> Vec<u32> {
    m.iter().map(|v| v.to_bits()).collect()
}

pub fn write_adapter_fixture(path: &Path, rng: &mut ChaCha8Rng, c: usize, r: usize) {
    let adapter = random_adapter_f32(rng, c, c, r);
    gola_core::io::write_adapter(path, &adapter, "fixture").expect("fixture writes");
}
