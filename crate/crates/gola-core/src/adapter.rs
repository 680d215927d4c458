//! Low-rank adapter algebra: forward application, parameter merging, rank
//! permutation, and effective-update extraction.
//!
//! An adapter keeps a frozen base weight `W` (`c_out x c_in`) together with
//! two trainable low-rank factors `A` (`r x c_in`) and `B` (`c_out x r`), so
//! the adapted layer computes `W h + scale * B (A h)`. Each "rank" is one
//! column of `B` paired with the same-index row of `A`.

use nalgebra::{DMatrix, RealField};

use crate::error::{Error, Result};

/// A permutation of `{0..n-1}`. `sigma[i]` is the original index placed at
/// slot `i` after reordering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    /// Validates that `indices` is a bijection on `{0..n-1}`.
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        let n = indices.len();
        let mut seen = vec![false; n];
        for &i in &indices {
            if i >= n || seen[i] {
                return Err(Error::Validation(format!(
                    "not a permutation of 0..{n}: index {i} out of range or repeated"
                )));
            }
            seen[i] = true;
        }
        Ok(Self(indices))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &s)| i == s)
    }
}

impl std::ops::Index<usize> for Permutation {
    type Output = usize;
    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

/// Frozen base weight plus trainable low-rank factors.
#[derive(Debug, Clone, PartialEq)]
pub struct AdapterPair<T: RealField + Copy> {
    w: DMatrix<T>,
    a: DMatrix<T>,
    b: DMatrix<T>,
    scale: T,
}

fn all_finite<T: RealField + Copy>(m: &DMatrix<T>) -> bool {
    m.iter().all(|x| x.is_finite())
}

impl<T: RealField + Copy> AdapterPair<T> {
    /// Builds an adapter, checking shape compatibility and finiteness.
    ///
    /// `w` is `c_out x c_in`, `a` is `r x c_in`, `b` is `c_out x r`. The rank
    /// must satisfy `r <= min(c_out, c_in)`; ranks above `c/2` are accepted
    /// with a warning since the factorization stops being low-rank in any
    /// meaningful sense.
    pub fn new(w: DMatrix<T>, a: DMatrix<T>, b: DMatrix<T>, scale: T) -> Result<Self> {
        let (c_out, c_in) = (w.nrows(), w.ncols());
        let r = a.nrows();
        if b.ncols() != r {
            return Err(Error::Shape {
                axis: "columns(B)",
                expected: r,
                actual: b.ncols(),
            });
        }
        if b.nrows() != c_out {
            return Err(Error::Shape {
                axis: "rows(B)",
                expected: c_out,
                actual: b.nrows(),
            });
        }
        if a.ncols() != c_in {
            return Err(Error::Shape {
                axis: "columns(A)",
                expected: c_in,
                actual: a.ncols(),
            });
        }
        if r == 0 || r > c_out.min(c_in) {
            return Err(Error::Parameter(format!(
                "rank {r} outside 1..=min(c_out={c_out}, c_in={c_in})"
            )));
        }
        if 2 * r > c_out.min(c_in) {
            log::warn!("rank {r} exceeds half of min(c_out={c_out}, c_in={c_in}); the update is barely low-rank");
        }
        if !all_finite(&w) {
            return Err(Error::NonFinite("W"));
        }
        if !all_finite(&a) {
            return Err(Error::NonFinite("A"));
        }
        if !all_finite(&b) {
            return Err(Error::NonFinite("B"));
        }
        if !scale.is_finite() {
            return Err(Error::NonFinite("scale"));
        }
        Ok(Self { w, a, b, scale })
    }

    /// Builds an adapter with the default branch multiplier of one.
    pub fn with_unit_scale(w: DMatrix<T>, a: DMatrix<T>, b: DMatrix<T>) -> Result<Self> {
        Self::new(w, a, b, T::one())
    }

    pub fn rank(&self) -> usize {
        self.a.nrows()
    }

    pub fn out_dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn in_dim(&self) -> usize {
        self.w.ncols()
    }

    pub fn w(&self) -> &DMatrix<T> {
        &self.w
    }

    pub fn a(&self) -> &DMatrix<T> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<T> {
        &self.b
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub(crate) fn a_mut(&mut self) -> &mut DMatrix<T> {
        &mut self.a
    }

    pub(crate) fn b_mut(&mut self) -> &mut DMatrix<T> {
        &mut self.b
    }

    /// Applies the adapted layer to a batch: `W h + scale * B (A h)` per
    /// column. Output is `c_out x m`.
    pub fn forward(&self, batch: &FeatureBatch<T>) -> Result<FeatureBatch<T>> {
        if batch.dim() != self.in_dim() {
            return Err(Error::Shape {
                axis: "rows(h)",
                expected: self.in_dim(),
                actual: batch.dim(),
            });
        }
        let h = batch.values();
        let out = &self.w * h + (&self.b * (&self.a * h)) * self.scale;
        Ok(FeatureBatch::new_unchecked(out))
    }

    /// Folds the low-rank branch into the base weight: `W + scale * B A`.
    /// The adapter itself is left untouched.
    pub fn merge(&self) -> DMatrix<T> {
        &self.w + &self.b * &self.a * self.scale
    }

    /// The update carried by the low-rank branch alone: `scale * B A`.
    pub fn effective_update(&self) -> DMatrix<T> {
        &self.b * &self.a * self.scale
    }

    /// Reorders the ranks: row `i` of the new `A` is row `sigma[i]` of the
    /// old one, and likewise for the columns of `B`. Because both factors
    /// move together, `B A` is unchanged.
    pub fn apply_permutation(&self, sigma: &Permutation) -> Result<Self> {
        let r = self.rank();
        if sigma.len() != r {
            return Err(Error::Validation(format!(
                "permutation length {} does not match rank {r}",
                sigma.len()
            )));
        }
        let mut a = DMatrix::zeros(r, self.in_dim());
        let mut b = DMatrix::zeros(self.out_dim(), r);
        for i in 0..r {
            a.set_row(i, &self.a.row(sigma[i]));
            b.set_column(i, &self.b.column(sigma[i]));
        }
        Ok(Self {
            w: self.w.clone(),
            a,
            b,
            scale: self.scale,
        })
    }
}

impl AdapterPair<f32> {
    pub fn to_f64(&self) -> AdapterPair<f64> {
        AdapterPair {
            w: self.w.map(f64::from),
            a: self.a.map(f64::from),
            b: self.b.map(f64::from),
            scale: f64::from(self.scale),
        }
    }
}

impl AdapterPair<f64> {
    /// Narrows to 32-bit storage (the container dtype).
    pub fn to_f32(&self) -> AdapterPair<f32> {
        AdapterPair {
            w: self.w.map(|x| x as f32),
            a: self.a.map(|x| x as f32),
            b: self.b.map(|x| x as f32),
            scale: self.scale as f32,
        }
    }
}

/// A batch of `m` feature columns, each of length `c_in`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBatch<T: RealField + Copy> {
    values: DMatrix<T>,
}

impl<T: RealField + Copy> FeatureBatch<T> {
    pub fn new(values: DMatrix<T>) -> Result<Self> {
        if values.ncols() == 0 {
            return Err(Error::Parameter("feature batch needs at least one column".into()));
        }
        if !all_finite(&values) {
            return Err(Error::NonFinite("feature batch"));
        }
        Ok(Self { values })
    }

    pub(crate) fn new_unchecked(values: DMatrix<T>) -> Self {
        Self { values }
    }

    /// Feature dimension (rows).
    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    /// Batch size (columns).
    pub fn len(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.values.ncols() == 0
    }

    pub fn values(&self) -> &DMatrix<T> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<T> {
        self.values
    }
}
