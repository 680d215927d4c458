//! Inter-group orthogonality: the penalty that pushes redundant rank groups
//! toward non-overlapping feature spaces, its analytic subgradient, the
//! random pair sampler used during training, and offline diagnostics
//! (heatmaps, singular spectra).

use nalgebra::DMatrix;
use rand::Rng;

use crate::adapter::AdapterPair;
use crate::error::{Error, Result};
use crate::partition::GroupedAdapter;

/// An unordered pair of distinct group indices (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupPair {
    i: usize,
    j: usize,
}

impl GroupPair {
    pub fn new(i: usize, j: usize) -> Result<Self> {
        if i == j {
            return Err(Error::Parameter(format!(
                "group pair needs two distinct groups, got ({i}, {j})"
            )));
        }
        Ok(Self { i, j })
    }

    pub fn i(&self) -> usize {
        self.i
    }

    pub fn j(&self) -> usize {
        self.j
    }
}

/// Subgradients of the penalty with respect to the four group slices.
#[derive(Debug, Clone)]
pub struct OrthGradients {
    pub a_i: DMatrix<f64>,
    pub a_j: DMatrix<f64>,
    pub b_i: DMatrix<f64>,
    pub b_j: DMatrix<f64>,
}

/// Which factor a diagnostic looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixChoice {
    A,
    B,
}

/// Normalized group-vs-group orthogonality diagnostic.
#[derive(Debug, Clone)]
pub struct OrthHeatmap {
    values: DMatrix<f64>,
    normalization: String,
}

impl OrthHeatmap {
    /// Symmetric `n x n` matrix with entries in `[0, 1]`.
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Human-readable descriptor of the normalization scheme.
    pub fn normalization(&self) -> &str {
        &self.normalization
    }

    pub fn num_groups(&self) -> usize {
        self.values.nrows()
    }

    /// Mean of the off-diagonal entries; the scalar used to compare
    /// redundancy across runs.
    pub fn off_diagonal_mean(&self) -> f64 {
        let n = self.values.nrows();
        if n < 2 {
            return 0.0;
        }
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    acc += self.values[(i, j)];
                }
            }
        }
        acc / (n * (n - 1)) as f64
    }
}

fn check_pair(grouped: &GroupedAdapter, pair: &GroupPair) -> Result<()> {
    let n = grouped.num_groups();
    if n < 2 {
        return Err(Error::Parameter(format!(
            "adapter has {n} groups; pairwise constraints need at least 2"
        )));
    }
    if pair.i >= n || pair.j >= n {
        return Err(Error::Parameter(format!(
            "group pair ({}, {}) out of range for {n} groups",
            pair.i, pair.j
        )));
    }
    Ok(())
}

/// The subgradient convention for the absolute value: zero at zero, so
/// exactly-orthogonal configurations are stationary.
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Penalty between two raw group slices: the entrywise absolute sum of the
/// channel cross-Gram `A_iᵀA_j` plus that of the rank cross-Gram `B_iᵀB_j`.
///
/// `a_i`/`a_j` are `g x c_in` row blocks of `A`; `b_i`/`b_j` are `c_out x g`
/// column blocks of `B`.
pub fn orth_loss_slices(
    a_i: &DMatrix<f64>,
    a_j: &DMatrix<f64>,
    b_i: &DMatrix<f64>,
    b_j: &DMatrix<f64>,
) -> Result<f64> {
    if a_i.shape() != a_j.shape() {
        return Err(Error::Shape {
            axis: "rows(A_j)",
            expected: a_i.nrows(),
            actual: a_j.nrows(),
        });
    }
    if b_i.shape() != b_j.shape() {
        return Err(Error::Shape {
            axis: "rows(B_j)",
            expected: b_i.nrows(),
            actual: b_j.nrows(),
        });
    }
    let c_a = a_i.transpose() * a_j;
    let c_b = b_i.transpose() * b_j;
    Ok(c_a.abs().sum() + c_b.abs().sum())
}

/// Orthogonality penalty between two groups of a partitioned adapter.
pub fn orth_loss(grouped: &GroupedAdapter, pair: &GroupPair) -> Result<f64> {
    check_pair(grouped, pair)?;
    orth_loss_slices(
        &grouped.group_a(pair.i),
        &grouped.group_a(pair.j),
        &grouped.group_b(pair.i),
        &grouped.group_b(pair.j),
    )
}

/// Analytic subgradient of [`orth_loss`] with respect to the four slices.
///
/// With `C_A = A_iᵀA_j`: `∂L/∂A_i = A_j·sign(C_A)ᵀ` and
/// `∂L/∂A_j = A_i·sign(C_A)`; the `B` blocks follow the same pattern with
/// `C_B = B_iᵀB_j`.
pub fn orth_loss_grad(grouped: &GroupedAdapter, pair: &GroupPair) -> Result<OrthGradients> {
    check_pair(grouped, pair)?;
    let a_i = grouped.group_a(pair.i);
    let a_j = grouped.group_a(pair.j);
    let b_i = grouped.group_b(pair.i);
    let b_j = grouped.group_b(pair.j);
    let sign_a = (a_i.transpose() * &a_j).map(sign);
    let sign_b = (b_i.transpose() * &b_j).map(sign);
    Ok(OrthGradients {
        a_i: &a_j * sign_a.transpose(),
        a_j: &a_i * sign_a,
        b_i: &b_j * sign_b.transpose(),
        b_j: &b_i * sign_b,
    })
}

/// Draws one of the `n(n-1)/2` unordered group pairs uniformly. The result
/// always has `i < j`.
pub fn sample_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<GroupPair> {
    if n < 2 {
        return Err(Error::Parameter(format!(
            "pair sampling needs at least 2 groups, got {n}"
        )));
    }
    let total = n * (n - 1) / 2;
    let mut t = rng.gen_range(0..total);
    for i in 0..n - 1 {
        let fan = n - 1 - i;
        if t < fan {
            return GroupPair::new(i, i + 1 + t);
        }
        t -= fan;
    }
    unreachable!("pair index below n(n-1)/2 always unranks");
}

/// Total penalty over every unordered group pair. Too expensive for the
/// training loop; used for offline analysis and report traces.
pub fn all_pairs_orth_loss(grouped: &GroupedAdapter) -> Result<f64> {
    let n = grouped.num_groups();
    if n < 2 {
        return Err(Error::Parameter(format!(
            "adapter has {n} groups; pairwise constraints need at least 2"
        )));
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            total += orth_loss(grouped, &GroupPair::new(i, j)?)?;
        }
    }
    Ok(total)
}

fn normalize_rank_vectors(slice: &mut DMatrix<f64>, choice: MatrixChoice) {
    match choice {
        MatrixChoice::A => {
            for mut row in slice.row_iter_mut() {
                let norm = row.norm();
                if norm > 0.0 {
                    row /= norm;
                }
            }
        }
        MatrixChoice::B => {
            for mut col in slice.column_iter_mut() {
                let norm = col.norm();
                if norm > 0.0 {
                    col /= norm;
                }
            }
        }
    }
}

/// Group-vs-group orthogonality heatmap.
///
/// Each group slice gets its rank vectors normalized to unit L2 (rows of
/// `A`, columns of `B`; zero vectors stay zero), `H_ij` is the mean of
/// `|Ĝ_iᵀĜ_j|`, and the whole matrix is scaled by its maximum entry so the
/// strongest overlap reads as 1 (all-zero maps stay zero).
pub fn orth_heatmap(grouped: &GroupedAdapter, choice: MatrixChoice) -> Result<OrthHeatmap> {
    let n = grouped.num_groups();
    if n == 0 {
        return Err(Error::Parameter(
            "adapter has no groups; run the partition first".into(),
        ));
    }
    let slices: Vec<DMatrix<f64>> = (0..n)
        .map(|g| {
            let mut slice = match choice {
                MatrixChoice::A => grouped.group_a(g),
                MatrixChoice::B => grouped.group_b(g),
            };
            normalize_rank_vectors(&mut slice, choice);
            slice
        })
        .collect();
    let mut values = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let cross = slices[i].transpose() * &slices[j];
            let mean = cross.abs().sum() / cross.len() as f64;
            values[(i, j)] = mean;
            values[(j, i)] = mean;
        }
    }
    let max = values.max();
    if max > 0.0 {
        values /= max;
    }
    Ok(OrthHeatmap {
        values,
        normalization: "unit rank vectors, mean abs cross-Gram, scaled by max".into(),
    })
}

/// Singular values of the effective update `scale * B A`, descending, one
/// per rank.
///
/// Works through thin QR of both factors so only an `r x r` decomposition is
/// needed: with `B = Q₁R₁` and `Aᵀ = Q₂R₂`, the singular values of `B A`
/// equal those of `R₁R₂ᵀ`.
pub fn singular_spectrum(adapter: &AdapterPair<f64>) -> Vec<f64> {
    let r1 = adapter.b().clone().qr().r();
    let r2 = adapter.a().transpose().qr().r();
    let core = r1 * r2.transpose();
    let mut values: Vec<f64> = core
        .svd(false, false)
        .singular_values
        .iter()
        .map(|&s| s * adapter.scale().abs())
        .collect();
    values.sort_by(|x, y| y.partial_cmp(x).expect("singular values are finite"));
    values
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{partition, RankPartition};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mat(rows: usize, cols: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows, cols, v)
    }

    /// Adapter with two singleton redundant groups whose slices are given
    /// explicitly; slot 0 is the frozen filler.
    fn two_singleton_groups(
        a1: &[f64],
        a2: &[f64],
        b1: &[f64],
        b2: &[f64],
    ) -> GroupedAdapter {
        let c = a1.len();
        assert_eq!(b1.len(), c);
        let mut a = DMatrix::zeros(3, c);
        let mut b = DMatrix::zeros(c, 3);
        a[(0, c - 1)] = 1.0;
        b[(c - 1, 0)] = 1.0;
        for p in 0..c {
            a[(1, p)] = a1[p];
            a[(2, p)] = a2[p];
            b[(p, 1)] = b1[p];
            b[(p, 2)] = b2[p];
        }
        let adapter =
            AdapterPair::with_unit_scale(DMatrix::zeros(c, c), a, b).unwrap();
        GroupedAdapter::new(
            adapter,
            RankPartition {
                sigma: (0..3).collect(),
                k: 1,
                groups: vec![vec![1], vec![2]],
                n: 2,
                seed: 0,
                degenerate: false,
            },
        )
        .unwrap()
    }

    fn random_grouped(seed: u64, c: usize, r: usize, k: usize, n: usize) -> GroupedAdapter {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let adapter = AdapterPair::with_unit_scale(
            DMatrix::from_fn(c, c, |_, _| rng.gen_range(-1.0..1.0)),
            DMatrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0)),
            DMatrix::from_fn(c, r, |_, _| rng.gen_range(-1.0..1.0)),
        )
        .unwrap();
        partition(&adapter, k, n, seed).unwrap()
    }

    #[test]
    fn hand_case_loss_is_one() {
        let grouped = two_singleton_groups(
            &[1.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0],
        );
        let pair = GroupPair::new(0, 1).unwrap();
        let loss = orth_loss(&grouped, &pair).unwrap();
        assert_eq!(loss, 1.0);
    }

    #[test]
    fn exactly_orthogonal_groups_have_zero_loss_and_grad() {
        // The two A slices occupy disjoint within-slice rank positions, so
        // every channel column of one is orthogonal to every column of the
        // other; B columns are mutually orthogonal. Both cross-Grams vanish
        // identically.
        let mut a = DMatrix::zeros(5, 6);
        a[(0, 5)] = 1.0;
        a[(1, 0)] = 1.0;
        a[(1, 1)] = 2.0;
        a[(4, 2)] = 3.0;
        a[(4, 3)] = 1.0;
        a[(4, 4)] = -2.0;
        let mut b = DMatrix::zeros(6, 5);
        b[(5, 0)] = 1.0;
        b[(0, 1)] = 1.0;
        b[(1, 2)] = 5.0;
        b[(2, 3)] = 2.0;
        b[(3, 4)] = -1.0;
        let adapter = AdapterPair::with_unit_scale(DMatrix::zeros(6, 6), a, b).unwrap();
        let grouped = GroupedAdapter::new(
            adapter,
            RankPartition {
                sigma: (0..5).collect(),
                k: 1,
                groups: vec![vec![1, 2], vec![3, 4]],
                n: 2,
                seed: 0,
                degenerate: false,
            },
        )
        .unwrap();
        let pair = GroupPair::new(0, 1).unwrap();
        assert_eq!(orth_loss(&grouped, &pair).unwrap(), 0.0);
        let grads = orth_loss_grad(&grouped, &pair).unwrap();
        for g in [&grads.a_i, &grads.a_j, &grads.b_i, &grads.b_j] {
            assert!(g.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn loss_matches_entrywise_brute_force() {
        let grouped = random_grouped(14, 10, 8, 2, 3);
        let pair = GroupPair::new(0, 2).unwrap();
        let (a_i, a_j) = (grouped.group_a(0), grouped.group_a(2));
        let (b_i, b_j) = (grouped.group_b(0), grouped.group_b(2));
        let mut expected = 0.0;
        for p in 0..a_i.ncols() {
            for q in 0..a_j.ncols() {
                let mut dot = 0.0;
                for m in 0..a_i.nrows() {
                    dot += a_i[(m, p)] * a_j[(m, q)];
                }
                expected += dot.abs();
            }
        }
        for p in 0..b_i.ncols() {
            for q in 0..b_j.ncols() {
                let mut dot = 0.0;
                for m in 0..b_i.nrows() {
                    dot += b_i[(m, p)] * b_j[(m, q)];
                }
                expected += dot.abs();
            }
        }
        let loss = orth_loss(&grouped, &pair).unwrap();
        assert!((loss - expected).abs() <= 1e-10, "{loss} vs {expected}");
    }

    #[test]
    fn loss_is_symmetric_in_the_pair() {
        let grouped = random_grouped(3, 8, 6, 2, 2);
        let lij = orth_loss(&grouped, &GroupPair::new(0, 1).unwrap()).unwrap();
        let lji = orth_loss(&grouped, &GroupPair::new(1, 0).unwrap()).unwrap();
        assert!((lij - lji).abs() <= 1e-12);
    }

    #[test]
    fn equal_group_indices_are_rejected() {
        let grouped = random_grouped(5, 8, 6, 2, 2);
        assert!(GroupPair::new(1, 1).is_err());
        let pair = GroupPair::new(0, 5).unwrap();
        assert!(matches!(orth_loss(&grouped, &pair), Err(Error::Parameter(_))));
        assert!(matches!(
            orth_loss_grad(&grouped, &pair),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn hand_case_gradient() {
        let grouped = two_singleton_groups(
            &[1.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0],
        );
        let grads = orth_loss_grad(&grouped, &GroupPair::new(0, 1).unwrap()).unwrap();
        assert_eq!(grads.a_i, mat(1, 3, &[1.0, 0.0, 0.0]));
        assert_eq!(grads.a_j, mat(1, 3, &[1.0, 0.0, 0.0]));
    }

    #[test]
    fn gradient_matches_central_differences() {
        let grouped = random_grouped(27, 9, 8, 2, 3);
        let pair = GroupPair::new(1, 2).unwrap();
        let a_i = grouped.group_a(1);
        let a_j = grouped.group_a(2);
        let b_i = grouped.group_b(1);
        let b_j = grouped.group_b(2);
        let min_entry = (a_i.transpose() * &a_j)
            .abs()
            .min()
            .min((b_i.transpose() * &b_j).abs().min());
        assert!(min_entry > 1e-3, "instance too close to a kink: {min_entry}");

        let grads = orth_loss_grad(&grouped, &pair).unwrap();
        let step = 1e-5;
        let fd = |block: usize, row: usize, col: usize| -> f64 {
            let eval = |delta: f64| {
                let mut parts = [a_i.clone(), a_j.clone(), b_i.clone(), b_j.clone()];
                parts[block][(row, col)] += delta;
                orth_loss_slices(&parts[0], &parts[1], &parts[2], &parts[3]).unwrap()
            };
            (eval(step) - eval(-step)) / (2.0 * step)
        };
        for (block, analytic) in [&grads.a_i, &grads.a_j, &grads.b_i, &grads.b_j]
            .iter()
            .enumerate()
        {
            for row in 0..analytic.nrows() {
                for col in 0..analytic.ncols() {
                    let numeric = fd(block, row, col);
                    let denom = numeric.abs().max(1.0);
                    assert!(
                        (numeric - analytic[(row, col)]).abs() / denom <= 1e-4,
                        "block {block} entry ({row},{col}): fd {numeric} vs analytic {}",
                        analytic[(row, col)]
                    );
                }
            }
        }
    }

    #[test]
    fn two_groups_always_sample_the_only_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            let pair = sample_pair(2, &mut rng).unwrap();
            assert_eq!((pair.i(), pair.j()), (0, 1));
        }
        assert!(sample_pair(1, &mut rng).is_err());
    }

    #[test]
    fn pair_sampling_is_uniform() {
        let n = 8;
        let draws = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut counts = vec![0usize; n * n];
        for _ in 0..draws {
            let pair = sample_pair(n, &mut rng).unwrap();
            assert!(pair.i() < pair.j());
            counts[pair.i() * n + pair.j()] += 1;
        }
        let p = 1.0 / 28.0;
        let tol = 5.0 * (p * (1.0 - p) / draws as f64).sqrt();
        for i in 0..n {
            for j in i + 1..n {
                let freq = counts[i * n + j] as f64 / draws as f64;
                assert!((freq - p).abs() <= tol, "pair ({i},{j}) freq {freq}");
            }
        }
    }

    #[test]
    fn pair_sampling_is_deterministic() {
        let draw = |seed: u64| -> Vec<(usize, usize)> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..32)
                .map(|_| {
                    let p = sample_pair(6, &mut rng).unwrap();
                    (p.i(), p.j())
                })
                .collect()
        };
        assert_eq!(draw(7), draw(7));
    }

    #[test]
    fn all_pairs_sums_unordered_pairs() {
        let grouped = random_grouped(8, 8, 6, 2, 4);
        let mut expected = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                expected += orth_loss(&grouped, &GroupPair::new(i, j).unwrap()).unwrap();
            }
        }
        let total = all_pairs_orth_loss(&grouped).unwrap();
        assert!((total - expected).abs() <= 1e-12);
    }

    #[test]
    fn heatmap_orthogonal_groups_have_unit_diagonal() {
        let grouped = two_singleton_groups(
            &[1.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0],
            &[1.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0],
        );
        let map = orth_heatmap(&grouped, MatrixChoice::B).unwrap();
        let h = map.values();
        assert_eq!(h[(0, 1)], 0.0);
        assert_eq!(h[(1, 0)], 0.0);
        assert_eq!(h[(0, 0)], 1.0);
        assert_eq!(h[(1, 1)], 1.0);
    }

    #[test]
    fn heatmap_identical_groups_are_all_ones() {
        let grouped = two_singleton_groups(
            &[0.4, 0.3, 0.0],
            &[0.4, 0.3, 0.0],
            &[0.0, 2.0, 1.0],
            &[0.0, 2.0, 1.0],
        );
        for choice in [MatrixChoice::A, MatrixChoice::B] {
            let map = orth_heatmap(&grouped, choice).unwrap();
            assert!(map.values().iter().all(|&x| (x - 1.0).abs() <= 1e-12));
        }
    }

    #[test]
    fn heatmap_matches_brute_force() {
        let grouped = random_grouped(31, 10, 8, 2, 3);
        for choice in [MatrixChoice::A, MatrixChoice::B] {
            let map = orth_heatmap(&grouped, choice).unwrap();
            let mut raw = DMatrix::zeros(3, 3);
            for i in 0..3 {
                for j in 0..3 {
                    let mut gi = match choice {
                        MatrixChoice::A => grouped.group_a(i),
                        MatrixChoice::B => grouped.group_b(i),
                    };
                    let mut gj = match choice {
                        MatrixChoice::A => grouped.group_a(j),
                        MatrixChoice::B => grouped.group_b(j),
                    };
                    normalize_rank_vectors(&mut gi, choice);
                    normalize_rank_vectors(&mut gj, choice);
                    let cross = gi.transpose() * gj;
                    raw[(i, j)] = cross.abs().sum() / cross.len() as f64;
                }
            }
            raw /= raw.max();
            assert!((map.values() - raw).abs().max() <= 1e-10);
        }
    }

    #[test]
    fn heatmap_ignores_rank_vector_rescaling() {
        let seed = 17;
        let base = random_grouped(seed, 8, 6, 2, 2);
        let mut scaled_adapter = base.adapter().clone();
        {
            use rand::Rng;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let slot = 3;
            let factor = rng.gen_range(0.5..4.0);
            let row = scaled_adapter.a().row(slot) * factor;
            scaled_adapter.a_mut().set_row(slot, &row);
            let col = scaled_adapter.b().column(slot) * factor;
            scaled_adapter.b_mut().set_column(slot, &col);
        }
        let scaled =
            GroupedAdapter::new(scaled_adapter, base.partition().clone()).unwrap();
        for choice in [MatrixChoice::A, MatrixChoice::B] {
            let h1 = orth_heatmap(&base, choice).unwrap();
            let h2 = orth_heatmap(&scaled, choice).unwrap();
            assert!((h1.values() - h2.values()).abs().max() <= 1e-9);
        }
    }

    #[test]
    fn heatmap_symmetry_and_range() {
        let grouped = random_grouped(55, 12, 9, 3, 3);
        let map = orth_heatmap(&grouped, MatrixChoice::B).unwrap();
        let h = map.values();
        assert!((h - h.transpose()).abs().max() == 0.0);
        assert!(h.iter().all(|&x| (0.0..=1.0).contains(&x)));
        assert!((h.max() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn spectrum_of_zero_adapter_is_zero() {
        let adapter = AdapterPair::with_unit_scale(
            DMatrix::zeros(4, 4),
            DMatrix::zeros(3, 4),
            DMatrix::zeros(4, 3),
        )
        .unwrap();
        let spectrum = singular_spectrum(&adapter);
        assert_eq!(spectrum, vec![0.0; 3]);
    }

    #[test]
    fn spectrum_rank_one_hand_value() {
        let adapter = AdapterPair::with_unit_scale(
            DMatrix::zeros(2, 2),
            mat(1, 2, &[3.0, 1.0]),
            mat(2, 1, &[2.0, 0.0]),
        )
        .unwrap();
        let spectrum = singular_spectrum(&adapter);
        assert_eq!(spectrum.len(), 1);
        assert!((spectrum[0] - 2.0 * 10.0_f64.sqrt()).abs() <= 1e-12);
    }

    #[test]
    fn spectrum_matches_dense_svd_of_update() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let adapter = AdapterPair::new(
            DMatrix::from_fn(12, 10, |_, _| rng.gen_range(-1.0..1.0)),
            DMatrix::from_fn(8, 10, |_, _| rng.gen_range(-1.0..1.0)),
            DMatrix::from_fn(12, 8, |_, _| rng.gen_range(-1.0..1.0)),
            0.35,
        )
        .unwrap();
        let spectrum = singular_spectrum(&adapter);
        let dense = adapter.effective_update().svd(false, false);
        let mut expected: Vec<f64> = dense.singular_values.iter().copied().collect();
        expected.sort_by(|x, y| y.partial_cmp(x).unwrap());
        expected.truncate(8);
        assert_eq!(spectrum.len(), 8);
        for (s, e) in spectrum.iter().zip(&expected) {
            let denom = e.abs().max(1e-12);
            assert!((s - e).abs() / denom <= 1e-9, "{s} vs {e}");
        }
    }
}
