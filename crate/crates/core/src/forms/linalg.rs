//! Small dense matrices: symbolic determinants and inverses over [`Scalar`],
//! and numeric rank via the singular value decomposition.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::expr::{ExprError, Scalar};

/// Relative singular-value cutoff used for numeric rank.
pub const RANK_THRESHOLD: f64 = 1e-8;

/// Square matrix of scalars, row-major.
pub type SymMatrix = Vec<Vec<Scalar>>;

struct Minors<'a> {
    m: &'a SymMatrix,
    memo: HashMap<(u32, u32), Scalar>,
}

impl Minors<'_> {
    /// Determinant of the submatrix on the given row and column bitmasks
    /// (equal popcounts), by expansion along the lowest row.
    fn det(&mut self, rows: u32, cols: u32) -> Scalar {
        if rows == 0 {
            return Scalar::one();
        }
        if let Some(d) = self.memo.get(&(rows, cols)) {
            return d.clone();
        }
        let r = rows.trailing_zeros() as usize;
        let rest = rows & (rows - 1);
        let mut acc = Scalar::zero();
        let mut sign_neg = false;
        let mut c_mask = cols;
        while c_mask != 0 {
            let c = c_mask.trailing_zeros() as usize;
            c_mask &= c_mask - 1;
            let entry = &self.m[r][c];
            if !entry.is_exact_zero() {
                let minor = self.det(rest, cols & !(1 << c));
                let term = entry.mul(&minor);
                acc = if sign_neg { acc.sub(&term) } else { acc.add(&term) };
            }
            sign_neg = !sign_neg;
        }
        self.memo.insert((rows, cols), acc.clone());
        acc
    }
}

fn full_mask(n: usize) -> u32 {
    (1u32 << n) - 1
}

pub fn determinant(m: &SymMatrix) -> Scalar {
    let n = m.len();
    Minors { m, memo: HashMap::new() }.det(full_mask(n), full_mask(n))
}

/// Inverse by the adjugate formula, together with the determinant.
/// Fails only when the determinant is identically zero as a rational
/// function; numerically vanishing determinants must be caught by the caller.
pub fn inverse(m: &SymMatrix) -> Result<(SymMatrix, Scalar), ExprError> {
    let n = m.len();
    assert!(n <= 16, "matrix too large for the minor expansion");
    let mut minors = Minors { m, memo: HashMap::new() };
    let det = minors.det(full_mask(n), full_mask(n));
    let det_inv = det.recip()?;
    let mut inv = vec![vec![Scalar::zero(); n]; n];
    for (i, row) in inv.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            // inv[i][j] = (-1)^(i+j) det(M without row j, column i) / det
            let minor = minors.det(full_mask(n) & !(1 << j), full_mask(n) & !(1 << i));
            let c = minor.mul(&det_inv);
            *slot = if (i + j) % 2 == 1 { c.neg() } else { c };
        }
    }
    Ok((inv, det))
}

pub fn transpose<T: Clone>(m: &[Vec<T>]) -> Vec<Vec<T>> {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len()).map(|j| m.iter().map(|row| row[j].clone()).collect()).collect()
}

/// Singular values of a row-major numeric matrix, in descending order.
pub fn singular_values(rows: &[Vec<f64>]) -> Vec<f64> {
    if rows.is_empty() || rows[0].is_empty() {
        return Vec::new();
    }
    let m = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Rank with cutoff `RANK_THRESHOLD * sigma_max`, after scaling every row
/// to unit length. Rows below `RANK_THRESHOLD` times the longest row count
/// as zero. Equilibration keeps fields of very different sizes (typical
/// after a change of coordinates) from hiding a direction.
pub fn numeric_rank(rows: &[Vec<f64>]) -> usize {
    let norms: Vec<f64> = rows.iter().map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let longest = norms.iter().copied().fold(0.0, f64::max);
    if !(longest > 0.0 && longest.is_finite()) {
        return 0;
    }
    let scaled: Vec<Vec<f64>> = rows
        .iter()
        .zip(&norms)
        .filter(|(_, &n)| n > RANK_THRESHOLD * longest)
        .map(|(r, &n)| r.iter().map(|x| x / n).collect())
        .collect();
    let s = singular_values(&scaled);
    match s.first() {
        Some(&top) if top > 0.0 && top.is_finite() => s.iter().filter(|&&x| x > RANK_THRESHOLD * top).count(),
        _ => 0,
    }
}

/// Numeric determinant of a square matrix.
pub fn numeric_det(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| rows[i][j]).determinant()
}

/// Distance from `v` to the column span of `cols` (least squares residual norm).
pub fn residual_to_span(cols: &[Vec<f64>], v: &[f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if cols.is_empty() {
        return norm;
    }
    let a = DMatrix::from_fn(v.len(), cols.len(), |i, j| cols[j][i]);
    let b = DMatrix::from_column_slice(v.len(), 1, v);
    let svd = a.clone().svd(true, true);
    let top = svd.singular_values.max();
    let eps = if top > 0.0 { RANK_THRESHOLD * top } else { 0.0 };
    match svd.solve(&b, eps) {
        Ok(x) => (&a * x - b).norm(),
        Err(_) => norm,
    }
}
