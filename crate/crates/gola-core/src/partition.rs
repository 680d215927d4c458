//! Offline rank-decomposition partitioning.
//!
//! The pipeline scores every rank of an adapter by projecting the
//! mean-centered `B` columns onto their own top principal directions,
//! sorts ranks by that score, freezes the top `k` ("crucial") ranks, and
//! clusters the remaining ("redundant") ranks into `n` equal-size groups
//! with a capacity-constrained k-means. All of it is pure and deterministic
//! under a fixed seed; nothing here touches training state.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adapter::{AdapterPair, Permutation};
use crate::error::{Error, Result};

/// Relative floor below which a centered matrix counts as all-zero.
const DEGENERACY_EPS: f64 = 1e-12;

/// Maximum alternation rounds for the balanced clustering loop.
const MAX_CLUSTER_ITERS: usize = 100;

/// Per-rank importance scores derived from the principal directions of the
/// centered `B` matrix.
#[derive(Debug, Clone)]
pub struct ImportanceScores {
    scores: Vec<f64>,
    topk: usize,
    degenerate: bool,
}

impl ImportanceScores {
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Number of principal directions used as the reference.
    pub fn topk(&self) -> usize {
        self.topk
    }

    /// True when the centered matrix was all-zero, so the scores carry no
    /// signal and callers may decline to freeze anything.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// The outcome of sorting and grouping the ranks of one adapter.
///
/// `sigma` maps sorted slots to original rank indices, `k` counts the
/// crucial (frozen) slots, and `groups` are index sets over the sorted
/// slots `k..r`. `groups` is empty for a split-only partition that has not
/// been clustered yet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankPartition {
    pub sigma: Vec<usize>,
    pub k: usize,
    pub groups: Vec<Vec<usize>>,
    pub n: usize,
    pub seed: u64,
    pub degenerate: bool,
}

impl RankPartition {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// Size of each redundant group, once grouping has run.
    pub fn group_size(&self) -> usize {
        (self.rank() - self.k).checked_div(self.n).unwrap_or(0)
    }

    /// Checks the partition bookkeeping: sigma is a permutation, groups are
    /// disjoint, equal-size, and cover exactly the redundant slots.
    pub fn validate(&self) -> Result<()> {
        let r = self.rank();
        Permutation::new(self.sigma.clone())?;
        if self.k == 0 || self.k >= r {
            return Err(Error::Parameter(format!(
                "crucial count k={} outside 1..{r}",
                self.k
            )));
        }
        if self.groups.is_empty() {
            return Ok(()); // split-only partition
        }
        if self.n != self.groups.len() || self.n < 2 {
            return Err(Error::Parameter(format!(
                "group count n={} does not match {} groups",
                self.n,
                self.groups.len()
            )));
        }
        let expected = (r - self.k) / self.n;
        let mut seen = vec![false; r];
        for group in &self.groups {
            if group.len() != expected {
                return Err(Error::Parameter(format!(
                    "group size {} != (r-k)/n = {expected}",
                    group.len()
                )));
            }
            for &slot in group {
                if slot < self.k || slot >= r || seen[slot] {
                    return Err(Error::Parameter(format!(
                        "slot {slot} repeated or outside redundant range {}..{r}",
                        self.k
                    )));
                }
                seen[slot] = true;
            }
        }
        if seen[self.k..].iter().any(|&s| !s) {
            return Err(Error::Parameter("groups do not cover all redundant slots".into()));
        }
        Ok(())
    }
}

/// An adapter with its partition applied: factors permuted into sorted
/// order, the first `k` slots frozen, the rest grouped for the orthogonal
/// constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedAdapter {
    adapter: AdapterPair<f64>,
    partition: RankPartition,
    frozen_mask: Vec<bool>,
}

impl GroupedAdapter {
    /// Pairs an adapter that is already in sorted slot order with its
    /// partition bookkeeping. The frozen mask is derived from `k`.
    pub fn new(adapter: AdapterPair<f64>, partition: RankPartition) -> Result<Self> {
        if partition.rank() != adapter.rank() {
            return Err(Error::Shape {
                axis: "len(sigma)",
                expected: adapter.rank(),
                actual: partition.rank(),
            });
        }
        partition.validate()?;
        let mut frozen_mask = vec![false; adapter.rank()];
        for flag in frozen_mask.iter_mut().take(partition.k) {
            *flag = true;
        }
        Ok(Self {
            adapter,
            partition,
            frozen_mask,
        })
    }

    pub fn adapter(&self) -> &AdapterPair<f64> {
        &self.adapter
    }

    pub fn partition(&self) -> &RankPartition {
        &self.partition
    }

    pub fn frozen_mask(&self) -> &[bool] {
        &self.frozen_mask
    }

    pub fn num_groups(&self) -> usize {
        self.partition.groups.len()
    }

    /// Sorted-slot indices of group `i`.
    pub fn group_slots(&self, i: usize) -> &[usize] {
        &self.partition.groups[i]
    }

    /// Rows of `A` belonging to group `i`, as a `g x c_in` matrix.
    pub fn group_a(&self, i: usize) -> DMatrix<f64> {
        let slots = self.group_slots(i);
        let mut out = DMatrix::zeros(slots.len(), self.adapter.in_dim());
        for (row, &slot) in slots.iter().enumerate() {
            out.set_row(row, &self.adapter.a().row(slot));
        }
        out
    }

    /// Columns of `B` belonging to group `i`, as a `c_out x g` matrix.
    pub fn group_b(&self, i: usize) -> DMatrix<f64> {
        let slots = self.group_slots(i);
        let mut out = DMatrix::zeros(self.adapter.out_dim(), slots.len());
        for (col, &slot) in slots.iter().enumerate() {
            out.set_column(col, &self.adapter.b().column(slot));
        }
        out
    }

    pub(crate) fn adapter_mut(&mut self) -> &mut AdapterPair<f64> {
        &mut self.adapter
    }
}

/// Subtracts the column mean from every column of `b`: each row of the
/// result sums to zero across the `r` columns.
pub fn center_columns(b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let r = b.ncols();
    if r < 2 {
        return Err(Error::Degenerate(format!(
            "centering needs at least 2 columns, got {r}"
        )));
    }
    let mean = b.column_mean();
    let mut centered = b.clone();
    for mut col in centered.column_iter_mut() {
        col -= &mean;
    }
    Ok(centered)
}

/// Scores each rank (column of `b`) by its weighted similarity to the top-k
/// principal directions of the centered matrix.
///
/// The centered matrix is decomposed as `UΣVᵀ`; the top-k left singular
/// vectors serve as reference directions and the top-k singular values as
/// weights. Rank `i` scores the L2 norm over the k weighted projections of
/// its centered column.
pub fn rank_importance(b: &DMatrix<f64>, k: usize) -> Result<ImportanceScores> {
    let (c, r) = (b.nrows(), b.ncols());
    if r < 2 {
        return Err(Error::Degenerate(format!(
            "importance scoring needs at least 2 ranks, got {r}"
        )));
    }
    if k == 0 || k > c.min(r) {
        return Err(Error::Parameter(format!(
            "top-k {k} outside 1..=min(c={c}, r={r})"
        )));
    }
    let centered = center_columns(b)?;
    let input_max = b.abs().max();
    if centered.abs().max() <= DEGENERACY_EPS * input_max.max(1.0) {
        return Ok(ImportanceScores {
            scores: vec![0.0; r],
            topk: k,
            degenerate: true,
        });
    }
    let svd = centered.clone().svd(true, false);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    // Projections of each centered rank column onto the top-k directions,
    // weighted by the matching singular values.
    let mut scores = vec![0.0; r];
    for (i, score) in scores.iter_mut().enumerate() {
        let mut acc = 0.0;
        for j in 0..k {
            let proj = centered.column(i).dot(&u.column(j)) * svd.singular_values[j];
            acc += proj * proj;
        }
        *score = acc.sqrt();
    }
    Ok(ImportanceScores {
        scores,
        topk: k,
        degenerate: false,
    })
}

/// Orders ranks by descending score; ties break toward the smaller original
/// index, so equal scores leave the order unchanged.
pub fn sort_ranks(scores: &ImportanceScores) -> Permutation {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| {
        scores.scores[j]
            .partial_cmp(&scores.scores[i])
            .expect("scores are finite")
            .then(i.cmp(&j))
    });
    Permutation::new(order).expect("sorted indices form a permutation")
}

/// Permutes the adapter into sorted order and freezes the first `k` slots.
/// The returned adapter has no groups yet; see [`partition`] for the full
/// pipeline.
pub fn split_crucial(
    adapter: &AdapterPair<f64>,
    sigma: &Permutation,
    k: usize,
) -> Result<GroupedAdapter> {
    let r = adapter.rank();
    if k == 0 {
        return Err(Error::Parameter("crucial count k must be at least 1".into()));
    }
    if k >= r {
        return Err(Error::Parameter(format!(
            "crucial count k={k} must be below rank r={r}"
        )));
    }
    let permuted = adapter.apply_permutation(sigma)?;
    let mut frozen_mask = vec![false; r];
    for flag in frozen_mask.iter_mut().take(k) {
        *flag = true;
    }
    Ok(GroupedAdapter {
        adapter: permuted,
        partition: RankPartition {
            sigma: sigma.as_slice().to_vec(),
            k,
            groups: Vec::new(),
            n: 0,
            seed: 0,
            degenerate: false,
        },
        frozen_mask,
    })
}

fn column_dist2(points: &DMatrix<f64>, p: usize, centroid: &nalgebra::DVector<f64>) -> f64 {
    let col = points.column(p);
    let mut acc = 0.0;
    for (idx, &v) in col.iter().enumerate() {
        let d = v - centroid[idx];
        acc += d * d;
    }
    acc
}

fn kmeans_pp_init(points: &DMatrix<f64>, n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let m = points.ncols();
    let mut chosen = Vec::with_capacity(n);
    chosen.push(rng.gen_range(0..m));
    let mut d2: Vec<f64> = (0..m)
        .map(|p| column_dist2(points, p, &points.column(chosen[0]).into_owned()))
        .collect();
    while chosen.len() < n {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (p, &w) in d2.iter().enumerate() {
                acc += w;
                if acc > target && w > 0.0 {
                    pick = Some(p);
                    break;
                }
            }
            // Rounding can push the target past the last positive weight.
            pick.unwrap_or_else(|| {
                d2.iter()
                    .rposition(|&w| w > 0.0)
                    .expect("total positive implies a positive weight")
            })
        } else {
            (0..m)
                .find(|p| !chosen.contains(p))
                .expect("fewer centroids than points")
        };
        chosen.push(next);
        let next_col = points.column(next).into_owned();
        for (p, d) in d2.iter_mut().enumerate() {
            *d = d.min(column_dist2(points, p, &next_col));
        }
    }
    chosen
}

/// Capacity-constrained k-means over the columns of `b_u`.
///
/// Starts from seeded k-means++ centroids, then alternates a balanced
/// assignment sweep with centroid recomputation until the assignment stops
/// changing (or 100 rounds). The sweep visits points in ascending order of
/// their margin between second-nearest and nearest centroid and gives each
/// the closest centroid that still has capacity `(r-k)/n`. Group order
/// follows centroid initialization order; indices within a group ascend.
pub fn cluster_groups(b_u: &DMatrix<f64>, n: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let m = b_u.ncols();
    if n < 2 {
        return Err(Error::Parameter(format!("group count n={n} must be at least 2")));
    }
    if m == 0 || !m.is_multiple_of(n) {
        return Err(Error::Parameter(format!(
            "n={n} does not divide the {m} redundant ranks; adjust k or n so the groups balance"
        )));
    }
    let cap = m / n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids: Vec<nalgebra::DVector<f64>> = kmeans_pp_init(b_u, n, &mut rng)
        .into_iter()
        .map(|p| b_u.column(p).into_owned())
        .collect();

    let mut assign: Vec<usize> = vec![usize::MAX; m];
    for _ in 0..MAX_CLUSTER_ITERS {
        let cost: Vec<Vec<f64>> = (0..m)
            .map(|p| centroids.iter().map(|c| column_dist2(b_u, p, c)).collect())
            .collect();
        let margin: Vec<f64> = cost
            .iter()
            .map(|row| {
                let mut best = f64::INFINITY;
                let mut second = f64::INFINITY;
                for &c in row {
                    if c < best {
                        second = best;
                        best = c;
                    } else if c < second {
                        second = c;
                    }
                }
                second - best
            })
            .collect();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&p, &q| {
            margin[p]
                .partial_cmp(&margin[q])
                .expect("finite costs")
                .then(p.cmp(&q))
        });

        let mut counts = vec![0usize; n];
        let mut next_assign = vec![usize::MAX; m];
        for &p in &order {
            let g = (0..n)
                .filter(|&g| counts[g] < cap)
                .min_by(|&g1, &g2| {
                    cost[p][g1]
                        .partial_cmp(&cost[p][g2])
                        .expect("finite costs")
                        .then(g1.cmp(&g2))
                })
                .expect("capacities sum to the point count");
            next_assign[p] = g;
            counts[g] += 1;
        }

        let converged = next_assign == assign;
        assign = next_assign;
        if converged {
            break;
        }
        for (g, centroid) in centroids.iter_mut().enumerate() {
            let mut sum = nalgebra::DVector::zeros(b_u.nrows());
            for p in (0..m).filter(|&p| assign[p] == g) {
                sum += b_u.column(p);
            }
            *centroid = sum / cap as f64;
        }
    }

    let mut groups = vec![Vec::with_capacity(cap); n];
    for (p, &g) in assign.iter().enumerate() {
        groups[g].push(p);
    }
    Ok(groups)
}

/// Full offline partition: score ranks against `B`, sort, freeze the top
/// `k`, and cluster the redundant ranks into `n` balanced groups.
pub fn partition(
    adapter: &AdapterPair<f64>,
    k: usize,
    n: usize,
    seed: u64,
) -> Result<GroupedAdapter> {
    let scores = rank_importance(adapter.b(), k)?;
    let sigma = sort_ranks(&scores);
    let mut grouped = split_crucial(adapter, &sigma, k)?;

    let r = adapter.rank();
    let b = grouped.adapter.b();
    let redundant = r - k;
    let mut b_u = DMatrix::zeros(adapter.out_dim(), redundant);
    for (col, slot) in (k..r).enumerate() {
        b_u.set_column(col, &b.column(slot));
    }
    let raw_groups = cluster_groups(&b_u, n, seed)?;
    grouped.partition.groups = raw_groups
        .into_iter()
        .map(|group| group.into_iter().map(|idx| idx + k).collect())
        .collect();
    grouped.partition.n = n;
    grouped.partition.seed = seed;
    grouped.partition.degenerate = scores.is_degenerate();
    grouped.partition.validate()?;
    Ok(grouped)
}
