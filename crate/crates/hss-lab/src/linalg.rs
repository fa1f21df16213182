//! Dense row-major matrices over a prime field.
//!
//! Everything here is exact: inversion and solving run Gauss-Jordan
//! elimination with the first nonzero pivot in scan order, so results are
//! deterministic functions of the input. Matrices are small (scheme
//! dimensions, not data), so no effort goes into blocking or sparsity.

use std::ops::{Index, IndexMut, RangeInclusive};

use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<FieldElement>,
}

impl Matrix {
    /// Builds from row slices; all rows must have equal length and share one
    /// modulus, and the matrix must be nonempty.
    pub fn from_rows(rows: Vec<Vec<FieldElement>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::DimensionMismatch(
                "matrix needs at least one row and one column".into(),
            ));
        }
        let cols = rows[0].len();
        let modulus = rows[0][0].modulus();
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for row in &rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "ragged rows: {} vs {}",
                    row.len(),
                    cols
                )));
            }
            for &v in row {
                if v.modulus() != modulus {
                    return Err(Error::ModulusMismatch(modulus, v.modulus()));
                }
                entries.push(v);
            }
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            entries,
        })
    }

    /// Builds from raw residues in a given field.
    pub fn from_residues(field: Field, rows: &[Vec<u64>]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| field.element(v)).collect())
                .collect(),
        )
    }

    pub fn zeros(field: Field, rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(
                "matrix needs at least one row and one column".into(),
            ));
        }
        Ok(Matrix {
            rows,
            cols,
            entries: vec![field.zero(); rows * cols],
        })
    }

    pub fn identity(field: Field, n: usize) -> Result<Self> {
        let mut m = Self::zeros(field, n, n)?;
        for i in 0..n {
            m[(i, i)] = field.one();
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> u64 {
        self.entries[0].modulus()
    }

    pub fn field(&self) -> Field {
        self.entries[0].field()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Entries of one row, in column order.
    pub fn row(&self, r: usize) -> &[FieldElement] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    /// Raw residues row by row, for serialization.
    pub fn residues(&self) -> Vec<Vec<u64>> {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(|e| e.value()).collect())
            .collect()
    }

    pub fn mat_mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.modulus() != other.modulus() {
            return Err(Error::ModulusMismatch(self.modulus(), other.modulus()));
        }
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.field(), self.rows, other.cols)?;
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix: `x * M`, the convention used for all affine
    /// point maps in this crate.
    pub fn row_vec_mul(x: &[FieldElement], m: &Matrix) -> Result<Vec<FieldElement>> {
        if x.len() != m.rows {
            return Err(Error::DimensionMismatch(format!(
                "row vector of length {} times {}x{} matrix",
                x.len(),
                m.rows,
                m.cols
            )));
        }
        for v in x {
            if v.modulus() != m.modulus() {
                return Err(Error::ModulusMismatch(m.modulus(), v.modulus()));
            }
        }
        let mut out = vec![m.field().zero(); m.cols];
        for (k, &xk) in x.iter().enumerate() {
            if xk.is_zero() {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o += xk * m[(k, j)];
            }
        }
        Ok(out)
    }

    /// Gauss-Jordan inverse. `Err(Singular)` doubles as the invertibility
    /// test for random transform sampling.
    pub fn mat_inverse(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "cannot invert {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let field = self.field();
        let mut aug: Vec<Vec<FieldElement>> = (0..n)
            .map(|i| {
                let mut row = self.row(i).to_vec();
                row.extend((0..n).map(|j| if i == j { field.one() } else { field.zero() }));
                row
            })
            .collect();
        reduce_left_block(&mut aug, n)?;
        Matrix::from_rows(aug.into_iter().map(|row| row[n..].to_vec()).collect())
    }

    pub fn is_invertible(&self) -> bool {
        self.mat_inverse().is_ok()
    }

    /// Solves `A * y = b` for square invertible `A`.
    pub fn solve(&self, b: &[FieldElement]) -> Result<Vec<FieldElement>> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "cannot solve {}x{} system",
                self.rows, self.cols
            )));
        }
        if b.len() != self.rows {
            return Err(Error::LengthMismatch {
                expected: self.rows,
                got: b.len(),
            });
        }
        for v in b {
            if v.modulus() != self.modulus() {
                return Err(Error::ModulusMismatch(self.modulus(), v.modulus()));
            }
        }
        let n = self.rows;
        let mut aug: Vec<Vec<FieldElement>> = (0..n)
            .map(|i| {
                let mut row = self.row(i).to_vec();
                row.push(b[i]);
                row
            })
            .collect();
        reduce_left_block(&mut aug, n)?;
        Ok(aug.into_iter().map(|row| row[n]).collect())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = FieldElement;

    fn index(&self, (r, c): (usize, usize)) -> &FieldElement {
        assert!(
            r < self.rows && c < self.cols,
            "index ({r},{c}) out of bounds"
        );
        &self.entries[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut FieldElement {
        assert!(
            r < self.rows && c < self.cols,
            "index ({r},{c}) out of bounds"
        );
        &mut self.entries[r * self.cols + c]
    }
}

/// Reduces the first `n` columns of an augmented system to the identity,
/// picking the first nonzero pivot in each column. `Singular` if a column
/// has no pivot.
fn reduce_left_block(aug: &mut [Vec<FieldElement>], n: usize) -> Result<()> {
    for col in 0..n {
        let pivot_row = (col..n)
            .find(|&r| !aug[r][col].is_zero())
            .ok_or(Error::Singular)?;
        aug.swap(col, pivot_row);
        let inv = aug[col][col].inverse().expect("pivot is nonzero");
        for v in aug[col].iter_mut() {
            *v *= inv;
        }
        for r in 0..n {
            if r == col || aug[r][col].is_zero() {
                continue;
            }
            let factor = aug[r][col];
            for c in 0..aug[r].len() {
                let delta = factor * aug[col][c];
                aug[r][c] -= delta;
            }
        }
    }
    Ok(())
}

/// Matrix of point powers: rows run over the consecutive exponents
/// `lo..=hi`, columns over the points, entry = point^exponent. For distinct
/// nonzero points and as many points as exponents this is invertible
/// (a Vandermonde matrix scaled by a nonzero column factor).
pub fn power_matrix(points: &[FieldElement], exponents: RangeInclusive<u64>) -> Result<Matrix> {
    let (lo, hi) = (*exponents.start(), *exponents.end());
    if hi < lo {
        return Err(Error::DimensionMismatch(format!(
            "empty exponent range {lo}..={hi}"
        )));
    }
    let count = (hi - lo + 1) as usize;
    if points.len() != count {
        return Err(Error::DimensionMismatch(format!(
            "{} points for {} exponents",
            points.len(),
            count
        )));
    }
    for (i, a) in points.iter().enumerate() {
        if a.modulus() != points[0].modulus() {
            return Err(Error::ModulusMismatch(points[0].modulus(), a.modulus()));
        }
        if a.is_zero() {
            return Err(Error::DuplicatePoint(0));
        }
        if points[i + 1..].contains(a) {
            return Err(Error::DuplicatePoint(a.value()));
        }
    }
    Matrix::from_rows(
        (lo..=hi)
            .map(|v| points.iter().map(|a| a.power(v)).collect())
            .collect(),
    )
}
