#ifndef GOLA_H
#define GOLA_H

/* Generated by cbindgen from gola-ffi; do not edit by hand. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Which factor's rank vectors a heatmap compares: rows of `A` (input
// channel space) or columns of `B` (output space).
typedef enum GolaMatrixChoice {
  // Compare rows of the `A` factor.
  GOLA_MATRIX_CHOICE_A = 0,
  // Compare columns of the `B` factor.
  GOLA_MATRIX_CHOICE_B = 1,
} GolaMatrixChoice;

// Result of a C API call. `Ok` is zero; every other value signals a
// failure whose message is readable via [`gola_last_error_message`].
// `InvalidArgument`, `Io`, and `Numeric` use the same numbers as the
// `gola` CLI exit codes for those failure classes.
typedef enum GolaStatus {
  // The call succeeded.
  GOLA_STATUS_OK = 0,
  // A required pointer argument was null.
  GOLA_STATUS_NULL_POINTER = 1,
  // Shapes, parameters, or input content were rejected.
  GOLA_STATUS_INVALID_ARGUMENT = 2,
  // Reading or writing a file failed.
  GOLA_STATUS_IO = 3,
  // A computation produced or received non-finite values.
  GOLA_STATUS_NUMERIC = 4,
  // An internal panic was caught at the boundary.
  GOLA_STATUS_PANIC = 5,
} GolaStatus;

// Opaque handle to a dense low-rank adapter (`W`, `A`, `B`, scale).
typedef struct GolaAdapter GolaAdapter;

// Opaque handle to a partitioned adapter: the permuted factors plus the
// crucial/redundant split and balanced group assignment.
typedef struct GolaPartition GolaPartition;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string. Never free it.
const char *gola_version(void);

// Copy the most recent failure message on this thread into `buf`.
//
// Returns the byte size of the full message including the trailing NUL,
// or zero when no failure has been recorded yet. When `buf` is non-null
// and `cap` is positive, up to `cap - 1` bytes are copied and always
// NUL-terminated, so a too-small buffer yields a truncated message.
//
// # Safety
// `buf` must be null or point to `cap` writable bytes.
size_t gola_last_error_message(char *buf, size_t cap);

// Build an adapter from dense row-major buffers: `w` holds
// `c_out * c_in` doubles, `a` holds `r * c_in`, `b` holds `c_out * r`.
// The data is copied. On success `*out` receives a new handle that must
// be released with [`gola_adapter_free`].
//
// # Safety
// The matrix pointers must be valid for the stated number of doubles and
// `out` must point to a writable pointer slot.
enum GolaStatus gola_adapter_new(const double *w,
                                 size_t c_out,
                                 size_t c_in,
                                 const double *a,
                                 size_t r,
                                 const double *b,
                                 double scale,
                                 struct GolaAdapter **out);

// Load an adapter from a `GOLA1` container file. The stored 32-bit
// tensors widen to doubles. On success `*out` receives a new handle.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a writable slot.
enum GolaStatus gola_adapter_load(const char *path, struct GolaAdapter **out);

// Save an adapter to a `GOLA1` container file, narrowing to 32-bit
// floats. The write is atomic: a temp file in the same directory is
// renamed over the target.
//
// # Safety
// `adapter` must be a live handle; `path` and `layer_name` must be
// NUL-terminated strings.
enum GolaStatus gola_adapter_save(const struct GolaAdapter *adapter,
                                  const char *path,
                                  const char *layer_name);

// Release a handle from [`gola_adapter_new`], [`gola_adapter_load`], or
// [`gola_partition_adapter`]. Null is ignored.
//
// # Safety
// `adapter` must be null or a live handle from this library; it must not
// be used after this call.
void gola_adapter_free(struct GolaAdapter *adapter);

// Output dimension (rows of `W` and `B`). Zero for a null handle.
//
// # Safety
// `adapter` must be null or a live handle.
size_t gola_adapter_out_dim(const struct GolaAdapter *adapter);

// Input dimension (columns of `W` and `A`). Zero for a null handle.
//
// # Safety
// `adapter` must be null or a live handle.
size_t gola_adapter_in_dim(const struct GolaAdapter *adapter);

// Adapter rank (columns of `B`, rows of `A`). Zero for a null handle.
//
// # Safety
// `adapter` must be null or a live handle.
size_t gola_adapter_rank(const struct GolaAdapter *adapter);

// Scale multiplier on the low-rank branch. NaN for a null handle.
//
// # Safety
// `adapter` must be null or a live handle.
double gola_adapter_scale(const struct GolaAdapter *adapter);

// Run the branched forward pass `W x + scale * B (A x)` on a feature
// batch. `x` holds `in_dim * cols` doubles (one feature vector per
// column, row-major) and `out` receives `out_dim * cols`.
//
// # Safety
// `adapter` must be a live handle; `x` and `out` must be valid for the
// stated number of doubles.
enum GolaStatus gola_adapter_forward(const struct GolaAdapter *adapter,
                                     const double *x,
                                     size_t cols,
                                     double *out);

// Write the merged weight `W + scale * B A` into `out`
// (`out_dim * in_dim` doubles, row-major).
//
// # Safety
// `adapter` must be a live handle; `out` must be valid for
// `out_dim * in_dim` doubles.
enum GolaStatus gola_adapter_merged(const struct GolaAdapter *adapter, double *out);

// Write the effective update `scale * B A` into `out`
// (`out_dim * in_dim` doubles, row-major).
//
// # Safety
// `adapter` must be a live handle; `out` must be valid for
// `out_dim * in_dim` doubles.
enum GolaStatus gola_adapter_effective_update(const struct GolaAdapter *adapter, double *out);

// Write the `rank` singular values of the effective update into `out`,
// descending.
//
// # Safety
// `adapter` must be a live handle; `out` must be valid for `rank`
// doubles.
enum GolaStatus gola_adapter_singular_spectrum(const struct GolaAdapter *adapter, double *out);

// Partition an adapter: score ranks by importance, freeze the top `k`,
// and cluster the remaining `rank - k` into `n` balanced groups with the
// given clustering seed. On success `*out` receives a handle that must
// be released with [`gola_partition_free`].
//
// # Safety
// `adapter` must be a live handle and `out` a writable slot.
enum GolaStatus gola_partition_new(const struct GolaAdapter *adapter,
                                   size_t k,
                                   size_t n,
                                   uint64_t seed,
                                   struct GolaPartition **out);

// Release a handle from [`gola_partition_new`]. Null is ignored.
//
// # Safety
// `p` must be null or a live handle from this library; it must not be
// used after this call.
void gola_partition_free(struct GolaPartition *p);

// Total rank of the partitioned adapter. Zero for a null handle.
//
// # Safety
// `p` must be null or a live handle.
size_t gola_partition_rank(const struct GolaPartition *p);

// Number of frozen crucial ranks. Zero for a null handle.
//
// # Safety
// `p` must be null or a live handle.
size_t gola_partition_crucial_count(const struct GolaPartition *p);

// Number of redundant-rank groups. Zero for a null handle.
//
// # Safety
// `p` must be null or a live handle.
size_t gola_partition_group_count(const struct GolaPartition *p);

// Ranks per group, `(rank - k) / n`. Zero for a null handle.
//
// # Safety
// `p` must be null or a live handle.
size_t gola_partition_group_size(const struct GolaPartition *p);

// Whether importance scoring hit the degenerate near-constant-`B` case
// and fell back to the identity ordering. False for a null handle.
//
// # Safety
// `p` must be null or a live handle.
bool gola_partition_is_degenerate(const struct GolaPartition *p);

// Write the sort permutation into `out` (`rank` entries): slot `s` of
// the permuted adapter came from original rank `out[s]`.
//
// # Safety
// `p` must be a live handle; `out` must be valid for `rank` entries.
enum GolaStatus gola_partition_sigma(const struct GolaPartition *p, uint64_t *out);

// Write the permuted slot indices of one group into `out`
// (`group_size` entries, ascending, all in `[k, rank)`).
//
// # Safety
// `p` must be a live handle; `out` must be valid for `group_size`
// entries.
enum GolaStatus gola_partition_group(const struct GolaPartition *p, size_t group, uint64_t *out);

// Copy the permuted adapter (crucial ranks in the leading slots) out of
// a partition as a fresh handle owned by the caller.
//
// # Safety
// `p` must be a live handle and `out` a writable slot.
enum GolaStatus gola_partition_adapter(const struct GolaPartition *p, struct GolaAdapter **out);

// Compute the inter-group orthogonality penalty between groups `i` and
// `j`: the summed absolute cross-Gram entries of their `A` and `B`
// slices.
//
// # Safety
// `p` must be a live handle; `out` must be a writable double.
enum GolaStatus gola_partition_orth_loss(const struct GolaPartition *p,
                                         size_t i,
                                         size_t j,
                                         double *out);

// Write the group-vs-group orthogonality heatmap into `out`
// (`group_count * group_count` doubles, row-major, symmetric, scaled so
// the largest entry is 1).
//
// # Safety
// `p` must be a live handle; `out` must be valid for
// `group_count * group_count` doubles.
enum GolaStatus gola_partition_heatmap(const struct GolaPartition *p,
                                       enum GolaMatrixChoice choice,
                                       double *out);

// Intersection-over-union of two boxes given as `[x, y, w, h]`.
//
// # Safety
// `pred` and `gt` must each point to 4 doubles; `out` must be writable.
enum GolaStatus gola_iou(const double *pred, const double *gt, double *out);

// Euclidean distance between the centers of two `[x, y, w, h]` boxes.
//
// # Safety
// `pred` and `gt` must each point to 4 doubles; `out` must be writable.
enum GolaStatus gola_center_error(const double *pred, const double *gt, double *out);

// Fraction of frames whose center error is below `xi_pr`. `pred` and
// `gt` each hold `frames * 4` doubles, one `[x, y, w, h]` box per frame.
//
// # Safety
// Box buffers must be valid for `frames * 4` doubles; `out` must be
// writable.
enum GolaStatus gola_precision_rate(const double *pred,
                                    const double *gt,
                                    size_t frames,
                                    double xi_pr,
                                    double *out);

// Fraction of frames whose IoU is at least `xi_sr`. Buffers as in
// [`gola_precision_rate`].
//
// # Safety
// Box buffers must be valid for `frames * 4` doubles; `out` must be
// writable.
enum GolaStatus gola_success_rate(const double *pred,
                                  const double *gt,
                                  size_t frames,
                                  double xi_sr,
                                  double *out);

// Success rate averaged over the 21-point overlap threshold grid
// `0, 0.05, ..., 1`. Buffers as in [`gola_precision_rate`].
//
// # Safety
// Box buffers must be valid for `frames * 4` doubles; `out` must be
// writable.
enum GolaStatus gola_success_auc(const double *pred, const double *gt, size_t frames, double *out);

// Multi-modal precision rate: per frame the smaller of the visible and
// thermal center errors counts against `xi_pr`. Each buffer holds
// `frames * 4` doubles.
//
// # Safety
// All four box buffers must be valid for `frames * 4` doubles; `out`
// must be writable.
enum GolaStatus gola_mpr(const double *pred_visible,
                         const double *gt_visible,
                         const double *pred_thermal,
                         const double *gt_thermal,
                         size_t frames,
                         double xi_pr,
                         double *out);

// Multi-modal success rate: per frame the larger of the visible and
// thermal IoUs counts against `xi_sr`. Buffers as in [`gola_mpr`].
//
// # Safety
// All four box buffers must be valid for `frames * 4` doubles; `out`
// must be writable.
enum GolaStatus gola_msr(const double *pred_visible,
                         const double *gt_visible,
                         const double *pred_thermal,
                         const double *gt_thermal,
                         size_t frames,
                         double xi_sr,
                         double *out);

// Multi-modal success rate averaged over the 21-point threshold grid.
// Buffers as in [`gola_mpr`].
//
// # Safety
// All four box buffers must be valid for `frames * 4` doubles; `out`
// must be writable.
enum GolaStatus gola_msr_auc(const double *pred_visible,
                             const double *gt_visible,
                             const double *pred_thermal,
                             const double *gt_thermal,
                             size_t frames,
                             double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GOLA_H */
