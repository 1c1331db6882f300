//! Dense matrices over a [`FieldSpec`].
//!
//! Entries are packed field elements (see [`crate::gf`]). All fallible
//! operations report shape or field mismatches instead of panicking.

use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::gf::{Embedding, FieldError, FieldSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("{op}: incompatible shapes {left:?} and {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("{op}: expected a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("rows to complete are linearly dependent")]
    DependentRows,
    #[error("cannot place {given} rows at index {at} in a {size}x{size} matrix")]
    Placement { given: usize, at: usize, size: usize },
    #[error("ragged row {row}: expected {expected} entries, found {found}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
}

/// Row-major dense matrix of packed field elements.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix<{}>{}x{} {:?}", self.field, self.rows, self.cols, self.to_rows())
    }
}

impl Matrix {
    pub fn zeros(field: &FieldSpec, rows: usize, cols: usize) -> Self {
        Self {
            field: field.clone(),
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: &FieldSpec, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_vec(
        field: &FieldSpec,
        rows: usize,
        cols: usize,
        data: Vec<u64>,
    ) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                op: "from_vec",
                left: (rows, cols),
                right: (data.len(), 1),
            });
        }
        if let Some(&bad) = data.iter().find(|&&v| !field.contains(v)) {
            return Err(FieldError::InvalidElement {
                value: bad,
                order: field.order(),
            }
            .into());
        }
        Ok(Self {
            field: field.clone(),
            rows,
            cols,
            data,
        })
    }

    /// Builds a matrix from packed rows. An empty list gives a 0x0 matrix.
    pub fn from_rows(field: &FieldSpec, rows: &[Vec<u64>]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(LinalgError::Ragged {
                    row: i,
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::from_vec(field, rows.len(), cols, data)
    }

    pub fn row_vector(field: &FieldSpec, entries: &[u64]) -> Result<Self, LinalgError> {
        Self::from_vec(field, 1, entries.len(), entries.to_vec())
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[u64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        debug_assert!(self.field.contains(v));
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..self.cols).all(|j| self.get(i, j) == u64::from(i == j)))
    }

    fn same_field(&self, other: &Matrix) -> Result<(), LinalgError> {
        if self.field != other.field {
            return Err(FieldError::Mismatch {
                left: self.field.to_string(),
                right: other.field.to_string(),
            }
            .into());
        }
        Ok(())
    }

    fn same_shape(&self, other: &Matrix, op: &'static str) -> Result<(), LinalgError> {
        self.same_field(other)?;
        if self.shape() != other.shape() {
            return Err(LinalgError::DimensionMismatch {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        self.same_shape(other, "add")?;
        let f = &self.field;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.add(a, b)).collect();
        Ok(Matrix { data, ..self.clone() })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        self.same_shape(other, "sub")?;
        let f = &self.field;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.sub(a, b)).collect();
        Ok(Matrix { data, ..self.clone() })
    }

    pub fn neg(&self) -> Matrix {
        let f = &self.field;
        Matrix {
            data: self.data.iter().map(|&a| f.neg(a)).collect(),
            ..self.clone()
        }
    }

    pub fn scale(&self, c: u64) -> Matrix {
        let f = &self.field;
        Matrix {
            data: self.data.iter().map(|&a| f.mul(a, c)).collect(),
            ..self.clone()
        }
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        self.same_field(other)?;
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                op: "mul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let f = &self.field;
        let mut out = Matrix::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    if b != 0 {
                        *d = f.add(*d, f.mul(a, b));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(&self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j);
            }
        }
        out
    }

    /// Sub-matrix of rows `r0..r1` and columns `c0..c1`.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Matrix {
        assert!(r0 <= r1 && r1 <= self.rows && c0 <= c1 && c1 <= self.cols, "block out of range");
        let mut data = Vec::with_capacity((r1 - r0) * (c1 - c0));
        for i in r0..r1 {
            data.extend_from_slice(&self.row(i)[c0..c1]);
        }
        Matrix {
            field: self.field.clone(),
            rows: r1 - r0,
            cols: c1 - c0,
            data,
        }
    }

    /// Columns `c0..c1`.
    pub fn columns(&self, c0: usize, c1: usize) -> Matrix {
        self.block(0, self.rows, c0, c1)
    }

    /// Rows `r0..r1`.
    pub fn row_range(&self, r0: usize, r1: usize) -> Matrix {
        self.block(r0, r1, 0, self.cols)
    }

    /// Overwrites the block whose top-left corner is `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Matrix) {
        assert!(r0 + b.rows <= self.rows && c0 + b.cols <= self.cols, "block out of range");
        for i in 0..b.rows {
            let start = (r0 + i) * self.cols + c0;
            self.data[start..start + b.cols].copy_from_slice(b.row(i));
        }
    }

    pub fn hstack(parts: &[&Matrix]) -> Result<Matrix, LinalgError> {
        let first = parts.first().expect("hstack of nothing");
        let rows = first.rows;
        let mut cols = 0;
        for p in parts {
            first.same_field(p)?;
            if p.rows != rows {
                return Err(LinalgError::DimensionMismatch {
                    op: "hstack",
                    left: first.shape(),
                    right: p.shape(),
                });
            }
            cols += p.cols;
        }
        let mut out = Matrix::zeros(&first.field, rows, cols);
        let mut c0 = 0;
        for p in parts {
            out.set_block(0, c0, p);
            c0 += p.cols;
        }
        Ok(out)
    }

    pub fn vstack(parts: &[&Matrix]) -> Result<Matrix, LinalgError> {
        let first = parts.first().expect("vstack of nothing");
        let cols = first.cols;
        let mut data = Vec::new();
        let mut rows = 0;
        for p in parts {
            first.same_field(p)?;
            if p.cols != cols {
                return Err(LinalgError::DimensionMismatch {
                    op: "vstack",
                    left: first.shape(),
                    right: p.shape(),
                });
            }
            data.extend_from_slice(&p.data);
            rows += p.rows;
        }
        Ok(Matrix {
            field: first.field.clone(),
            rows,
            cols,
            data,
        })
    }

    /// Entry-wise image under a field embedding.
    pub fn embed(&self, e: &Embedding) -> Result<Matrix, LinalgError> {
        if e.source() != &self.field {
            return Err(FieldError::Mismatch {
                left: self.field.to_string(),
                right: e.source().to_string(),
            }
            .into());
        }
        Ok(Matrix {
            field: e.target().clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| e.apply(v)).collect(),
        })
    }

    /// Reduced row echelon form and its pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let f = &self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| m.get(i, c) != 0) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = f.inv(m.get(r, c)).expect("nonzero pivot");
            for j in c..m.cols {
                let v = m.get(r, j);
                m.set(r, j, f.mul(v, inv));
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let factor = m.get(i, c);
                if factor == 0 {
                    continue;
                }
                for j in c..m.cols {
                    let v = f.sub(m.get(i, j), f.mul(factor, m.get(r, j)));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    pub fn invert(&self) -> Result<Matrix, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NotSquare {
                op: "invert",
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let aug = Matrix::hstack(&[self, &Matrix::identity(&self.field, n)])?;
        let (red, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(LinalgError::SingularMatrix);
        }
        Ok(red.columns(n, 2 * n))
    }

    /// `[A]_p = (A^-1)^T`, the action induced on phase-basis labels.
    pub fn phase_transform(&self) -> Result<Matrix, LinalgError> {
        Ok(self.invert()?.transpose())
    }
}

/// Solves `d · O = r` for a row vector `d`.
///
/// Returns the reduced-echelon solution with every free variable set to
/// zero, or `None` when `r` is outside the row space of `O`.
pub fn solve_row(o: &Matrix, r: &[u64]) -> Result<Option<Vec<u64>>, LinalgError> {
    if r.len() != o.cols() {
        return Err(LinalgError::DimensionMismatch {
            op: "solve_row",
            left: o.shape(),
            right: (1, r.len()),
        });
    }
    let f = o.field();
    let rhs = Matrix::from_vec(f, r.len(), 1, r.to_vec())?;
    // d O = r  <=>  O^T d^T = r^T
    let aug = Matrix::hstack(&[&o.transpose(), &rhs])?;
    let (red, pivots) = aug.rref();
    let unknowns = o.rows();
    if pivots.last() == Some(&unknowns) {
        return Ok(None);
    }
    let mut d = vec![0u64; unknowns];
    for (i, &c) in pivots.iter().enumerate() {
        d[c] = red.get(i, unknowns);
    }
    Ok(Some(d))
}

/// Extends `given` (k independent rows of length m) to an invertible m×m
/// matrix with the given rows at indices `at..at+k`.
///
/// Remaining rows are standard basis vectors, taken greedily in index
/// order whenever they enlarge the span.
pub fn complete_to_invertible(
    field: &FieldSpec,
    given: &[Vec<u64>],
    m: usize,
    at: usize,
) -> Result<Matrix, LinalgError> {
    let k = given.len();
    if k > m || at + k > m {
        return Err(LinalgError::Placement { given: k, at, size: m });
    }
    let mut chosen: Vec<Vec<u64>> = given.to_vec();
    if k > 0 {
        let g = Matrix::from_rows(field, given)?;
        if g.cols() != m {
            return Err(LinalgError::DimensionMismatch {
                op: "complete_to_invertible",
                left: g.shape(),
                right: (m, m),
            });
        }
        if g.rank() < k {
            return Err(LinalgError::DependentRows);
        }
    }
    let mut fill = Vec::with_capacity(m - k);
    for i in 0..m {
        if fill.len() == m - k {
            break;
        }
        let mut e = vec![0u64; m];
        e[i] = 1;
        chosen.push(e.clone());
        if Matrix::from_rows(field, &chosen)?.rank() == chosen.len() {
            fill.push(e);
        } else {
            chosen.pop();
        }
    }
    debug_assert_eq!(fill.len(), m - k);
    let mut out = Vec::with_capacity(m);
    let mut fill = fill.into_iter();
    for i in 0..m {
        if (at..at + k).contains(&i) {
            out.push(given[i - at].clone());
        } else {
            out.push(fill.next().expect("enough completion rows"));
        }
    }
    Matrix::from_rows(field, &out)
}

/// Uniform matrix with independent entries.
pub fn sample_uniform<R: Rng + ?Sized>(field: &FieldSpec, rows: usize, cols: usize, rng: &mut R) -> Matrix {
    let data = (0..rows * cols).map(|_| field.random(rng)).collect();
    Matrix {
        field: field.clone(),
        rows,
        cols,
        data,
    }
}

/// Uniform element of GL(m, field), by rejection.
pub fn sample_invertible<R: Rng + ?Sized>(field: &FieldSpec, m: usize, rng: &mut R) -> Matrix {
    loop {
        let a = sample_uniform(field, m, m, rng);
        if a.rank() == m {
            return a;
        }
    }
}

/// Uniform matrix of rank `min(rows, cols)`, by rejection.
pub fn sample_full_rank<R: Rng + ?Sized>(field: &FieldSpec, rows: usize, cols: usize, rng: &mut R) -> Matrix {
    let target = rows.min(cols);
    loop {
        let a = sample_uniform(field, rows, cols, rng);
        if a.rank() == target {
            return a;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gf(p: u64, d: u32) -> FieldSpec {
        FieldSpec::new(p, d).unwrap()
    }

    fn m(f: &FieldSpec, rows: &[&[u64]]) -> Matrix {
        Matrix::from_rows(f, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    /// All row vectors of length n over a small prime field.
    fn all_vectors(p: u64, n: usize) -> Vec<Vec<u64>> {
        (0..p.pow(n as u32))
            .map(|mut v| {
                (0..n)
                    .map(|_| {
                        let d = v % p;
                        v /= p;
                        d
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn rank_examples() {
        let f7 = gf(7, 1);
        assert_eq!(Matrix::zeros(&f7, 3, 3).rank(), 0);
        assert_eq!(Matrix::identity(&f7, 4).rank(), 4);
        let a2 = m(&f7, &[&[1, 2, 3], &[0, 1, 5], &[5, 6, 0]]);
        assert_eq!(a2.rank(), 3);
        // Independent check: the determinant by cofactor expansion is nonzero.
        let det = |x: &Matrix| {
            let g = |i, j| x.get(i, j) as i64;
            let d = g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1))
                - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0))
                + g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0));
            d.rem_euclid(7)
        };
        assert_ne!(det(&a2), 0);
    }

    #[test]
    fn invert_examples() {
        let f7 = gf(7, 1);
        let i3 = Matrix::identity(&f7, 3);
        assert_eq!(i3.invert().unwrap(), i3);
        let a1 = m(&f7, &[&[1, 3], &[2, 3]]);
        let inv = a1.invert().unwrap();
        assert_eq!(inv, m(&f7, &[&[6, 1], &[3, 2]]));
        assert!(a1.mul(&inv).unwrap().is_identity());
        assert!(inv.mul(&a1).unwrap().is_identity());
        let f2 = gf(2, 1);
        let u = m(&f2, &[&[1, 1], &[0, 1]]);
        assert!(u.mul(&u).unwrap().is_identity());
        assert_eq!(u.invert().unwrap(), u);
        assert_eq!(
            m(&f7, &[&[1, 2], &[2, 4]]).invert().unwrap_err(),
            LinalgError::SingularMatrix
        );
        assert!(matches!(
            Matrix::zeros(&f7, 2, 3).invert(),
            Err(LinalgError::NotSquare { .. })
        ));
    }

    #[test]
    fn phase_transform_examples() {
        let f7 = gf(7, 1);
        assert!(Matrix::identity(&f7, 3).phase_transform().unwrap().is_identity());
        let a1 = m(&f7, &[&[1, 3], &[2, 3]]);
        let ap = a1.phase_transform().unwrap();
        assert_eq!(ap, m(&f7, &[&[6, 3], &[1, 2]]));
        assert!(a1.transpose().mul(&ap).unwrap().is_identity());

        let f16 = gf(2, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        for _ in 0..100 {
            let a = sample_invertible(&f16, 4, &mut rng);
            assert_eq!(a.phase_transform().unwrap().phase_transform().unwrap(), a);
        }
    }

    #[test]
    fn solve_row_examples() {
        let f7 = gf(7, 1);
        let r = vec![3, 1, 4];
        assert_eq!(solve_row(&Matrix::identity(&f7, 3), &r).unwrap(), Some(r.clone()));
        assert_eq!(solve_row(&Matrix::zeros(&f7, 3, 3), &r).unwrap(), None);

        let o = m(&f7, &[&[1, 2], &[2, 4]]);
        let d = solve_row(&o, &[2, 4]).unwrap().unwrap();
        assert_eq!(d, vec![2, 0]);
        // Every solution by enumeration; the canonical one has the free coordinate zero.
        let solutions: Vec<Vec<u64>> = all_vectors(7, 2)
            .into_iter()
            .filter(|d| Matrix::row_vector(&f7, d).unwrap().mul(&o).unwrap().row(0) == [2, 4])
            .collect();
        assert_eq!(solutions.len(), 7);
        assert!(solutions.contains(&d));
        assert_eq!(solutions.iter().filter(|s| s[1] == 0).count(), 1);

        assert!(matches!(
            solve_row(&o, &[1, 2, 3]),
            Err(LinalgError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn solve_row_matches_exhaustive_search() {
        for (p, n) in [(2u64, 2usize), (2, 3), (3, 2)] {
            let f = gf(p, 1);
            let vectors = all_vectors(p, n);
            let mut rng = ChaCha8Rng::seed_from_u64(p * 10 + n as u64);
            for _ in 0..60 {
                let o = sample_uniform(&f, n, n, &mut rng);
                for r in &vectors {
                    let reachable = vectors.iter().any(|d| {
                        Matrix::row_vector(&f, d).unwrap().mul(&o).unwrap().row(0) == r.as_slice()
                    });
                    let aug = Matrix::vstack(&[&o, &Matrix::row_vector(&f, r).unwrap()]).unwrap();
                    assert_eq!(reachable, aug.rank() == o.rank());
                    match solve_row(&o, r).unwrap() {
                        Some(d) => {
                            assert!(reachable);
                            let got = Matrix::row_vector(&f, &d).unwrap().mul(&o).unwrap();
                            assert_eq!(got.row(0), r.as_slice());
                        }
                        None => assert!(!reachable),
                    }
                }
            }
        }
    }

    #[test]
    fn complete_to_invertible_examples() {
        let f2 = gf(2, 1);
        assert!(complete_to_invertible(&f2, &[], 3, 0).unwrap().is_identity());
        let stack = vec![vec![0, 1, 1], vec![1, 0, 0], vec![1, 1, 0]];
        assert_eq!(
            complete_to_invertible(&f2, &stack, 3, 0).unwrap(),
            Matrix::from_rows(&f2, &stack).unwrap()
        );
        let c = complete_to_invertible(&f2, &[vec![1, 1, 0]], 3, 2).unwrap();
        assert_eq!(c, m(&f2, &[&[1, 0, 0], &[0, 0, 1], &[1, 1, 0]]));
        assert_eq!(c.rank(), 3);
        let top = complete_to_invertible(&f2, &[vec![1, 1, 0]], 3, 0).unwrap();
        assert_eq!(top.row(0), &[1, 1, 0]);
        assert!(top.is_invertible());
        assert_eq!(
            complete_to_invertible(&f2, &[vec![1, 1, 0], vec![1, 1, 0]], 3, 1).unwrap_err(),
            LinalgError::DependentRows
        );
        assert!(matches!(
            complete_to_invertible(&f2, &[vec![1, 1, 0]], 3, 3),
            Err(LinalgError::Placement { .. })
        ));
    }

    #[test]
    fn samplers() {
        let f2 = gf(2, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            assert_eq!(sample_invertible(&f2, 1, &mut rng), Matrix::identity(&f2, 1));
        }
        let trials = 10_000;
        let invertible = (0..trials)
            .filter(|_| sample_uniform(&f2, 2, 2, &mut rng).is_invertible())
            .count();
        let freq = invertible as f64 / trials as f64;
        assert!((freq - 0.375).abs() <= 0.02, "{freq}");

        let f3 = gf(3, 1);
        for _ in 0..1000 {
            assert!(!sample_full_rank(&f3, 1, 2, &mut rng).is_zero());
        }
        let a = sample_full_rank(&f3, 2, 5, &mut rng);
        assert_eq!((a.shape(), a.rank()), ((2, 5), 2));
    }

    #[test]
    fn samplers_are_deterministic() {
        let f = gf(2, 8);
        let a = sample_invertible(&f, 5, &mut ChaCha8Rng::seed_from_u64(9));
        let b = sample_invertible(&f, 5, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn full_rank_frequency_matches_product() {
        // Probability a uniform k×k matrix is invertible: prod_{i=1..k} (1 - q^-i).
        for (p, d, k) in [(2u64, 1u32, 2usize), (3, 1, 2), (2, 2, 3)] {
            let f = gf(p, d);
            let q = f.order() as f64;
            let exact: f64 = (1..=k).map(|i| 1.0 - q.powi(-(i as i32))).product();
            assert!(exact >= 1.0 - 2.0 / q);
            let trials = 10_000;
            let mut rng = ChaCha8Rng::seed_from_u64(p + k as u64);
            let hits = (0..trials)
                .filter(|_| sample_uniform(&f, k, k, &mut rng).is_invertible())
                .count();
            let freq = hits as f64 / trials as f64;
            let sigma = (exact * (1.0 - exact) / trials as f64).sqrt();
            assert!((freq - exact).abs() <= 3.0 * sigma, "q={q} k={k}: {freq} vs {exact}");
        }
    }

    #[test]
    fn shape_errors() {
        let f = gf(5, 1);
        let a = Matrix::zeros(&f, 2, 3);
        assert!(a.mul(&a).is_err());
        assert!(a.add(&Matrix::zeros(&f, 3, 2)).is_err());
        assert!(a.add(&Matrix::zeros(&gf(7, 1), 2, 3)).is_err());
        assert!(Matrix::from_rows(&f, &[vec![1, 2], vec![3]]).is_err());
        assert!(Matrix::from_rows(&f, &[vec![5]]).is_err());
    }

    #[test]
    fn embedding_commutes_with_products() {
        let small = gf(2, 2);
        let big = gf(2, 6);
        let e = Embedding::new(&small, &big).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let a = sample_uniform(&small, 3, 4, &mut rng);
            let b = sample_uniform(&small, 4, 2, &mut rng);
            let lhs = a.mul(&b).unwrap().embed(&e).unwrap();
            let rhs = a.embed(&e).unwrap().mul(&b.embed(&e).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    fn field_strategy() -> impl Strategy<Value = FieldSpec> {
        prop_oneof![Just((2u64, 1u32)), Just((3, 1)), Just((7, 1)), Just((2, 4)), Just((3, 2))]
            .prop_map(|(p, d)| gf(p, d))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn rank_inequalities(f in field_strategy(), seed in any::<u64>(), r in 1usize..5, k in 1usize..5, c in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = sample_uniform(&f, r, k, &mut rng);
            let b = sample_uniform(&f, k, c, &mut rng);
            let ab = a.mul(&b).unwrap();
            prop_assert!(ab.rank() <= a.rank().min(b.rank()));
            let a2 = sample_uniform(&f, r, k, &mut rng);
            prop_assert!(a.add(&a2).unwrap().rank() <= a.rank() + a2.rank());
        }

        #[test]
        fn inverse_identities(f in field_strategy(), seed in any::<u64>(), n in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = sample_invertible(&f, n, &mut rng);
            let inv = a.invert().unwrap();
            prop_assert!(a.mul(&inv).unwrap().is_identity());
            prop_assert_eq!(inv.invert().unwrap(), a.clone());
            prop_assert_eq!(a.transpose().invert().unwrap(), inv.transpose());
        }

        #[test]
        fn completion_is_invertible(f in field_strategy(), seed in any::<u64>(), n in 1usize..6, k in 0usize..6, at_frac in 0.0f64..1.0) {
            let k = k.min(n);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = sample_full_rank(&f, k.max(1), n, &mut rng);
            let rows: Vec<Vec<u64>> = if k == 0 { vec![] } else { g.to_rows() };
            let at = ((n - k) as f64 * at_frac) as usize;
            let c = complete_to_invertible(&f, &rows, n, at).unwrap();
            prop_assert!(c.is_invertible());
            for (i, r) in rows.iter().enumerate() {
                prop_assert_eq!(c.row(at + i), r.as_slice());
            }
        }
    }
}
