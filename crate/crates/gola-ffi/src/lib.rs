//! C ABI for the group-orthogonal adapter toolkit.
//!
//! Conventions shared by every function here:
//!
//! - Handles ([`GolaAdapter`], [`GolaPartition`]) are opaque pointers
//!   produced by the `*_new`/`*_load` constructors and released by the
//!   matching `*_free`. Freeing null is a no-op; double-freeing is
//!   undefined behavior.
//! - Matrix buffers are dense row-major `double` arrays. The caller owns
//!   every buffer it passes and must size output buffers to the documented
//!   dimensions; the library never retains a pointer past the call.
//! - Every fallible call returns a [`GolaStatus`]. On failure the message
//!   is stored per thread and can be read back with
//!   [`gola_last_error_message`].
//! - Panics never unwind across the boundary; they surface as
//!   [`GolaStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use gola_core::nalgebra::DMatrix;
use gola_core::{
    center_error, iou, mpr, msr, msr_auc, orth_heatmap, orth_loss, partition, precision_rate,
    read_adapter, singular_spectrum, success_auc, success_rate, write_adapter, AdapterPair, BBox,
    BBoxSequence, FeatureBatch, GroupPair, GroupedAdapter, MatrixChoice, ModalPair,
};

/// Result of a C API call. `Ok` is zero; every other value signals a
/// failure whose message is readable via [`gola_last_error_message`].
/// `InvalidArgument`, `Io`, and `Numeric` use the same numbers as the
/// `gola` CLI exit codes for those failure classes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GolaStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Shapes, parameters, or input content were rejected.
    InvalidArgument = 2,
    /// Reading or writing a file failed.
    Io = 3,
    /// A computation produced or received non-finite values.
    Numeric = 4,
    /// An internal panic was caught at the boundary.
    Panic = 5,
}

/// Which factor's rank vectors a heatmap compares: rows of `A` (input
/// channel space) or columns of `B` (output space).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GolaMatrixChoice {
    /// Compare rows of the `A` factor.
    A = 0,
    /// Compare columns of the `B` factor.
    B = 1,
}

/// Opaque handle to a dense low-rank adapter (`W`, `A`, `B`, scale).
pub struct GolaAdapter {
    inner: AdapterPair<f64>,
}

/// Opaque handle to a partitioned adapter: the permuted factors plus the
/// crucial/redundant split and balanced group assignment.
pub struct GolaPartition {
    inner: GroupedAdapter,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg)
        .unwrap_or_else(|_| CString::new("error message contained a NUL byte").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
}

fn fail(status: GolaStatus, msg: impl Into<String>) -> GolaStatus {
    set_error(msg.into());
    status
}

fn core_fail(e: gola_core::Error) -> GolaStatus {
    let status = match e.exit_code() {
        3 => GolaStatus::Io,
        4 => GolaStatus::Numeric,
        _ => GolaStatus::InvalidArgument,
    };
    fail(status, e.to_string())
}

fn guard<F>(f: F) -> GolaStatus
where
    F: FnOnce() -> Result<(), GolaStatus>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GolaStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "non-string panic payload".into());
            fail(GolaStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

unsafe fn require<'a, T>(ptr: *const T, name: &str) -> Result<&'a T, GolaStatus> {
    ptr.as_ref()
        .ok_or_else(|| fail(GolaStatus::NullPointer, format!("{name} must not be null")))
}

fn require_out<T>(ptr: *mut T, name: &str) -> Result<*mut T, GolaStatus> {
    if ptr.is_null() {
        return Err(fail(GolaStatus::NullPointer, format!("{name} must not be null")));
    }
    Ok(ptr)
}

unsafe fn str_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, GolaStatus> {
    if ptr.is_null() {
        return Err(fail(GolaStatus::NullPointer, format!("{name} must not be null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(GolaStatus::InvalidArgument, format!("{name} is not valid UTF-8")))
}

unsafe fn read_matrix(
    ptr: *const f64,
    rows: usize,
    cols: usize,
    name: &str,
) -> Result<DMatrix<f64>, GolaStatus> {
    if ptr.is_null() {
        return Err(fail(GolaStatus::NullPointer, format!("{name} must not be null")));
    }
    let len = rows.checked_mul(cols).ok_or_else(|| {
        fail(
            GolaStatus::InvalidArgument,
            format!("{name} dimensions {rows} x {cols} overflow"),
        )
    })?;
    let slice = std::slice::from_raw_parts(ptr, len);
    Ok(DMatrix::from_row_slice(rows, cols, slice))
}

unsafe fn write_matrix(m: &DMatrix<f64>, ptr: *mut f64, name: &str) -> Result<(), GolaStatus> {
    let ptr = require_out(ptr, name)?;
    let out = std::slice::from_raw_parts_mut(ptr, m.nrows() * m.ncols());
    let mut idx = 0;
    for row in 0..m.nrows() {
        for col in 0..m.ncols() {
            out[idx] = m[(row, col)];
            idx += 1;
        }
    }
    Ok(())
}

unsafe fn write_f64s(values: &[f64], ptr: *mut f64, name: &str) -> Result<(), GolaStatus> {
    let ptr = require_out(ptr, name)?;
    std::slice::from_raw_parts_mut(ptr, values.len()).copy_from_slice(values);
    Ok(())
}

unsafe fn write_indices(values: &[usize], ptr: *mut u64, name: &str) -> Result<(), GolaStatus> {
    let ptr = require_out(ptr, name)?;
    let out = std::slice::from_raw_parts_mut(ptr, values.len());
    for (slot, &v) in out.iter_mut().zip(values) {
        *slot = v as u64;
    }
    Ok(())
}

unsafe fn write_value(value: f64, ptr: *mut f64, name: &str) -> Result<(), GolaStatus> {
    let ptr = require_out(ptr, name)?;
    *ptr = value;
    Ok(())
}

unsafe fn bbox_at(ptr: *const f64, frame: usize) -> gola_core::Result<BBox> {
    let base = ptr.add(frame * 4);
    BBox::new(*base, *base.add(1), *base.add(2), *base.add(3))
}

unsafe fn sequence_arg(
    pred: *const f64,
    gt: *const f64,
    frames: usize,
    name: &str,
) -> Result<BBoxSequence, GolaStatus> {
    if pred.is_null() || gt.is_null() {
        return Err(fail(
            GolaStatus::NullPointer,
            format!("{name} box buffers must not be null"),
        ));
    }
    frames.checked_mul(4).ok_or_else(|| {
        fail(
            GolaStatus::InvalidArgument,
            format!("{name} frame count {frames} overflows"),
        )
    })?;
    let mut rows = Vec::with_capacity(frames);
    for f in 0..frames {
        let p = bbox_at(pred, f).map_err(core_fail)?;
        let g = bbox_at(gt, f).map_err(core_fail)?;
        rows.push((p, g));
    }
    BBoxSequence::new(rows).map_err(core_fail)
}

unsafe fn modal_arg(
    pred_visible: *const f64,
    gt_visible: *const f64,
    pred_thermal: *const f64,
    gt_thermal: *const f64,
    frames: usize,
) -> Result<ModalPair, GolaStatus> {
    let visible = sequence_arg(pred_visible, gt_visible, frames, "visible")?;
    let thermal = sequence_arg(pred_thermal, gt_thermal, frames, "thermal")?;
    ModalPair::new(visible, thermal).map_err(core_fail)
}

/// Library version as a static NUL-terminated string. Never free it.
#[no_mangle]
pub extern "C" fn gola_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copy the most recent failure message on this thread into `buf`.
///
/// Returns the byte size of the full message including the trailing NUL,
/// or zero when no failure has been recorded yet. When `buf` is non-null
/// and `cap` is positive, up to `cap - 1` bytes are copied and always
/// NUL-terminated, so a too-small buffer yields a truncated message.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn gola_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let slot = slot.borrow();
        let Some(msg) = slot.as_ref() else {
            return 0;
        };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && cap > 0 {
            let content = &bytes[..bytes.len() - 1];
            let n = content.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(content.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Build an adapter from dense row-major buffers: `w` holds
/// `c_out * c_in` doubles, `a` holds `r * c_in`, `b` holds `c_out * r`.
/// The data is copied. On success `*out` receives a new handle that must
/// be released with [`gola_adapter_free`].
///
/// # Safety
/// The matrix pointers must be valid for the stated number of doubles and
/// `out` must point to a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn gola_adapter_new(
    w: *const f64,
    c_out: usize,
    c_in: usize,
    a: *const f64,
    r: usize,
    b: *const f64,
    scale: f64,
    out: *mut *mut GolaAdapter,
) -> GolaStatus {
    guard(|| {
        let out = require_out(out, "out")?;
        let w = read_matrix(w, c_out, c_in, "w")?;
        let a = read_matrix(a, r, c_in, "a")?;
        let b = read_matrix(b, c_out, r, "b")?;
        let inner = AdapterPair::new(w, a, b, scale).map_err(core_fail)?;
        *out = Box::into_raw(Box::new(GolaAdapter { inner }));
        Ok(())
    })
}

/// Load an adapter from a `GOLA1` container file. The stored 32-bit
/// tensors widen to doubles. On success `*out` receives a new handle.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable slot.
#[no_mangle]
pub unsafe extern "C" fn gola_adapter_load(
    path: *const c_char,
    out: *mut *mut GolaAdapter,
) -> GolaStatus {
    guard(|| {
        let out = require_out(out, "out")?;
        let path = str_arg(path, "path")?;
        let (adapter, _) = read_adapter(Path::new(path)).map_err(core_fail)?;
        *out = Box::into_raw(Box::new(GolaAdapter {
            inner: adapter.to_f64(),
        }));
        Ok(())
    })
}

/// Save an adapter to a `GOLA1` container file, narrowing to 32-bit
/// floats. The write is atomic: a temp file in the same directory is
/// renamed over the target.
///
/// # Safety
/// `adapter` must be a live handle; `path` and `layer_name` must be
/// NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn gola_adapter_save(
    adapter: *const GolaAdapter,
    path: *const c_char,
    layer_name: *const c_char,
) -> GolaStatus {
    guard(|| {
        let adapter = require(adapter, "adapter")?;
        let path = str_arg(path, "path")?;
        let layer = str_arg(layer_name, "layer_name")?;
        write_adapter(Path::new(path), &adapter.inner.to_f32(), layer).map_err(core_fail)
    })
}

/// Release a handle from [`gola_adapter_new`], [`gola_adapter_load`], or
/// [`gola_partition_adapter`]. Null is ignored.
///
/// # Safety
/// `adapter` must be null or a live handle from this library; it must not
/// be used after this call.
#[no_mangle]
pub unsafe extern "C" fn gola_adapter_free(adapter: *mut GolaAdapter) {
    if !adapter.is_null() {
        drop(Box::from_raw(adapter));
    }
}

/// Output dimension (rows of `W` and `B`). Zero for a null handle.
///
/// # Safety
/// `adapter` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gola_adapter_out_dim(adapter: *const GolaAdapter) -> usize {
    adapter.as_ref().map_or(0, |a| a.inner.out_dim())
}

/// Input dimension (columns of `W` and `A`). Zero for a null handle.
///
/// # Safety
/// `adapter` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gola_adapter_in_dim(adapter: *const GolaAdapter) -> usize {
    adapter.as_ref().map_or(0, |a| a.inner.in_dim())
}

/// Adapter rank (columns of `B`, rows of `A`). Zero for a null handle.
///
/// # Safety
/// `adapter` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gola_adapter_rank(adapter: *const GolaAdapter) -> usize {
    adapter.as_ref().map_or(0, |a| a.inner.rank())
}

/// Scale multiplier on the low-rank branch. NaN for a null handle.
///
/// # Safety
/// `adapter` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gola_adapter_scale(adapter: *const GolaAdapter) -> f64 {
    adapter.as_ref().map_or(f64::NAN, |a| a.inner.scale())
}

/// Run the branched forward pass `W x + scale * B (A x)` on a feature
/// batch. `x` holds `in_dim * cols` doubles (one feature vector per
/// column, row-major) and `out` receives `out_dim * cols`.
///
/// # Safety
/// `adapter` must be a live handle; `x` and `out` must be valid for the
/// stated number of doubles.
#[no_mangle]
pub unsafe extern "C" fn gola_adapter_forward(
    adapter: *const GolaAdapter,
    x: *const f64,
    cols: usize,
    out: *mut f64,
) -> GolaStatus {
    guard(|| {
        let adapter = require(adapter, "adapter")?;
        let x = read_matrix(x, adapter.inner.in_dim(), cols, "x")?;
        let batch = FeatureBatch::new(x).map_err(core_fail)?;
        let y = adapter.inner.forward(&batch).map_err(core_fail)?;
        write_matrix(y.values(), out, "out")
    })
}

/// Write the merged weight `W + scale * B A` into `out`
/// (`out_dim * in_dim` doubles, row-major).
///
/// # Safety
/// `adapter` must be a live handle; `out` must be valid for
/// `out_dim * in_dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn gola_adapter_merged(
    adapter: *const GolaAdapter,
    out: *mut f64,
) -> GolaStatus {
    guard(|| {
        let adapter = require(adapter, "adapter")?;
        write_matrix(&adapter.inner.merge(), out, "out")
    })
}

/// Write the effective update `scale * B A` into `out`
/// (`out_dim * in_dim` doubles, row-major).
///
/// # Safety
/// `adapter` must be a live handle; `out` must be valid for
/// `out_dim * in_dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn gola_adapter_effective_update(
    adapter: *const GolaAdapter,
    out: *mut f64,
) -> GolaStatus {
    guard(|| {
        let adapter = require(adapter, "adapter")?;
        write_matrix(&adapter.inner.effective_update(), out, "out")
    })
}

/// Write the `rank` singular values of the effective update into `out`,
/// descending.
///
/// # Safety
/// `adapter` must be a live handle; `out` must be valid for `rank`
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn gola_adapter_singular_spectrum(
    adapter: *const GolaAdapter,
    out: *mut f64,
) -> GolaStatus {
    guard(|| {
        let adapter = require(adapter, "adapter")?;
        write_f64s(&singular_spectrum(&adapter.inner), out, "out")
    })
}

/// Partition an adapter: score ranks by importance, freeze the top `k`,
/// and cluster the remaining `rank - k` into `n` balanced groups with the
/// given clustering seed. On success `*out` receives a handle that must
/// be released with [`gola_partition_free`].
///
/// # Safety
/// `adapter` must be a live handle and `out` a writable slot.
#[no_mangle]
pub unsafe extern "C" fn gola_partition_new(
    adapter: *const GolaAdapter,
    k: usize,
    n: usize,
    seed: u64,
    out: *mut *mut GolaPartition,
) -> GolaStatus {
    guard(|| {
        let adapter = require(adapter, "adapter")?;
        let out = require_out(out, "out")?;
        let grouped = partition(&adapter.inner, k, n, seed).map_err(core_fail)?;
        *out = Box::into_raw(Box::new(GolaPartition { inner: grouped }));
        Ok(())
    })
}

/// Release a handle from [`gola_partition_new`]. Null is ignored.
///
/// # Safety
/// `p` must be null or a live handle from this library; it must not be
/// used after this call.
#[no_mangle]
pub unsafe extern "C" fn gola_partition_free(p: *mut GolaPartition) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Total rank of the partitioned adapter. Zero for a null handle.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gola_partition_rank(p: *const GolaPartition) -> usize {
    p.as_ref().map_or(0, |p| p.inner.adapter().rank())
}

/// Number of frozen crucial ranks. Zero for a null handle.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gola_partition_crucial_count(p: *const GolaPartition) -> usize {
    p.as_ref().map_or(0, |p| p.inner.partition().k)
}

/// Number of redundant-rank groups. Zero for a null handle.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gola_partition_group_count(p: *const GolaPartition) -> usize {
    p.as_ref().map_or(0, |p| p.inner.num_groups())
}

/// Ranks per group, `(rank - k) / n`. Zero for a null handle.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gola_partition_group_size(p: *const GolaPartition) -> usize {
    p.as_ref().map_or(0, |p| p.inner.partition().group_size())
}

/// Whether importance scoring hit the degenerate near-constant-`B` case
/// and fell back to the identity ordering. False for a null handle.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gola_partition_is_degenerate(p: *const GolaPartition) -> bool {
    p.as_ref().is_some_and(|p| p.inner.partition().degenerate)
}

/// Write the sort permutation into `out` (`rank` entries): slot `s` of
/// the permuted adapter came from original rank `out[s]`.
///
/// # Safety
/// `p` must be a live handle; `out` must be valid for `rank` entries.
#[no_mangle]
pub unsafe extern "C" fn gola_partition_sigma(
    p: *const GolaPartition,
    out: *mut u64,
) -> GolaStatus {
    guard(|| {
        let p = require(p, "partition")?;
        write_indices(&p.inner.partition().sigma, out, "out")
    })
}

/// Write the permuted slot indices of one group into `out`
/// (`group_size` entries, ascending, all in `[k, rank)`).
///
/// # Safety
/// `p` must be a live handle; `out` must be valid for `group_size`
/// entries.
#[no_mangle]
pub unsafe extern "C" fn gola_partition_group(
    p: *const GolaPartition,
    group: usize,
    out: *mut u64,
) -> GolaStatus {
    guard(|| {
        let p = require(p, "partition")?;
        let groups = &p.inner.partition().groups;
        let slots = groups.get(group).ok_or_else(|| {
            fail(
                GolaStatus::InvalidArgument,
                format!(
                    "group index {group} out of range for {} groups",
                    groups.len()
                ),
            )
        })?;
        write_indices(slots, out, "out")
    })
}

/// Copy the permuted adapter (crucial ranks in the leading slots) out of
/// a partition as a fresh handle owned by the caller.
///
/// # Safety
/// `p` must be a live handle and `out` a writable slot.
#[no_mangle]
pub unsafe extern "C" fn gola_partition_adapter(
    p: *const GolaPartition,
    out: *mut *mut GolaAdapter,
) -> GolaStatus {
    guard(|| {
        let p = require(p, "partition")?;
        let out = require_out(out, "out")?;
        *out = Box::into_raw(Box::new(GolaAdapter {
            inner: p.inner.adapter().clone(),
        }));
        Ok(())
    })
}

/// Compute the inter-group orthogonality penalty between groups `i` and
/// `j`: the summed absolute cross-Gram entries of their `A` and `B`
/// slices.
///
/// # Safety
/// `p` must be a live handle; `out` must be a writable double.
#[no_mangle]
pub unsafe extern "C" fn gola_partition_orth_loss(
    p: *const GolaPartition,
    i: usize,
    j: usize,
    out: *mut f64,
) -> GolaStatus {
    guard(|| {
        let p = require(p, "partition")?;
        let n = p.inner.num_groups();
        if i >= n || j >= n {
            return Err(fail(
                GolaStatus::InvalidArgument,
                format!("group pair ({i}, {j}) out of range for {n} groups"),
            ));
        }
        let pair = GroupPair::new(i, j).map_err(core_fail)?;
        let loss = orth_loss(&p.inner, &pair).map_err(core_fail)?;
        write_value(loss, out, "out")
    })
}

/// Write the group-vs-group orthogonality heatmap into `out`
/// (`group_count * group_count` doubles, row-major, symmetric, scaled so
/// the largest entry is 1).
///
/// # Safety
/// `p` must be a live handle; `out` must be valid for
/// `group_count * group_count` doubles.
#[no_mangle]
pub unsafe extern "C" fn gola_partition_heatmap(
    p: *const GolaPartition,
    choice: GolaMatrixChoice,
    out: *mut f64,
) -> GolaStatus {
    guard(|| {
        let p = require(p, "partition")?;
        let choice = match choice {
            GolaMatrixChoice::A => MatrixChoice::A,
            GolaMatrixChoice::B => MatrixChoice::B,
        };
        let heat = orth_heatmap(&p.inner, choice).map_err(core_fail)?;
        write_matrix(heat.values(), out, "out")
    })
}

/// Intersection-over-union of two boxes given as `[x, y, w, h]`.
///
/// # Safety
/// `pred` and `gt` must each point to 4 doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gola_iou(pred: *const f64, gt: *const f64, out: *mut f64) -> GolaStatus {
    guard(|| {
        if pred.is_null() || gt.is_null() {
            return Err(fail(
                GolaStatus::NullPointer,
                "pred and gt must not be null",
            ));
        }
        let pred = bbox_at(pred, 0).map_err(core_fail)?;
        let gt = bbox_at(gt, 0).map_err(core_fail)?;
        write_value(iou(&pred, &gt), out, "out")
    })
}

/// Euclidean distance between the centers of two `[x, y, w, h]` boxes.
///
/// # Safety
/// `pred` and `gt` must each point to 4 doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gola_center_error(
    pred: *const f64,
    gt: *const f64,
    out: *mut f64,
) -> GolaStatus {
    guard(|| {
        if pred.is_null() || gt.is_null() {
            return Err(fail(
                GolaStatus::NullPointer,
                "pred and gt must not be null",
            ));
        }
        let pred = bbox_at(pred, 0).map_err(core_fail)?;
        let gt = bbox_at(gt, 0).map_err(core_fail)?;
        write_value(center_error(&pred, &gt), out, "out")
    })
}

/// Fraction of frames whose center error is below `xi_pr`. `pred` and
/// `gt` each hold `frames * 4` doubles, one `[x, y, w, h]` box per frame.
///
/// # Safety
/// Box buffers must be valid for `frames * 4` doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn gola_precision_rate(
    pred: *const f64,
    gt: *const f64,
    frames: usize,
    xi_pr: f64,
    out: *mut f64,
) -> GolaStatus {
    guard(|| {
        let seq = sequence_arg(pred, gt, frames, "sequence")?;
        write_value(precision_rate(&seq, xi_pr), out, "out")
    })
}

/// Fraction of frames whose IoU is at least `xi_sr`. Buffers as in
/// [`gola_precision_rate`].
///
/// # Safety
/// Box buffers must be valid for `frames * 4` doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn gola_success_rate(
    pred: *const f64,
    gt: *const f64,
    frames: usize,
    xi_sr: f64,
    out: *mut f64,
) -> GolaStatus {
    guard(|| {
        let seq = sequence_arg(pred, gt, frames, "sequence")?;
        write_value(success_rate(&seq, xi_sr), out, "out")
    })
}

/// Success rate averaged over the 21-point overlap threshold grid
/// `0, 0.05, ..., 1`. Buffers as in [`gola_precision_rate`].
///
/// # Safety
/// Box buffers must be valid for `frames * 4` doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn gola_success_auc(
    pred: *const f64,
    gt: *const f64,
    frames: usize,
    out: *mut f64,
) -> GolaStatus {
    guard(|| {
        let seq = sequence_arg(pred, gt, frames, "sequence")?;
        write_value(success_auc(&seq), out, "out")
    })
}

/// Multi-modal precision rate: per frame the smaller of the visible and
/// thermal center errors counts against `xi_pr`. Each buffer holds
/// `frames * 4` doubles.
///
/// # Safety
/// All four box buffers must be valid for `frames * 4` doubles; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn gola_mpr(
    pred_visible: *const f64,
    gt_visible: *const f64,
    pred_thermal: *const f64,
    gt_thermal: *const f64,
    frames: usize,
    xi_pr: f64,
    out: *mut f64,
) -> GolaStatus {
    guard(|| {
        let pair = modal_arg(pred_visible, gt_visible, pred_thermal, gt_thermal, frames)?;
        write_value(mpr(&pair, xi_pr), out, "out")
    })
}

/// Multi-modal success rate: per frame the larger of the visible and
/// thermal IoUs counts against `xi_sr`. Buffers as in [`gola_mpr`].
///
/// # Safety
/// All four box buffers must be valid for `frames * 4` doubles; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn gola_msr(
    pred_visible: *const f64,
    gt_visible: *const f64,
    pred_thermal: *const f64,
    gt_thermal: *const f64,
    frames: usize,
    xi_sr: f64,
    out: *mut f64,
) -> GolaStatus {
    guard(|| {
        let pair = modal_arg(pred_visible, gt_visible, pred_thermal, gt_thermal, frames)?;
        write_value(msr(&pair, xi_sr), out, "out")
    })
}

/// Multi-modal success rate averaged over the 21-point threshold grid.
/// Buffers as in [`gola_mpr`].
///
/// # Safety
/// All four box buffers must be valid for `frames * 4` doubles; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn gola_msr_auc(
    pred_visible: *const f64,
    gt_visible: *const f64,
    pred_thermal: *const f64,
    gt_thermal: *const f64,
    frames: usize,
    out: *mut f64,
) -> GolaStatus {
    guard(|| {
        let pair = modal_arg(pred_visible, gt_visible, pred_thermal, gt_thermal, frames)?;
        write_value(msr_auc(&pair), out, "out")
    })
}
