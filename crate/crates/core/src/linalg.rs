//! Dense linear algebra over prime fields `F_p`.
//!
//! Everything downstream (cohomology rings, cocycle systems, rigidity scans)
//! goes through the elimination routines here, so pivot order is fixed:
//! columns are scanned left to right and the first row holding a nonzero
//! entry in the current column becomes the pivot. Kernel bases are read off
//! the reduced row echelon form, one vector per free column in increasing
//! column order.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinAlgError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Arithmetic helpers for residues mod a small prime (`p < 2^32`).
pub mod fp {
    #[inline]
    pub fn add(a: u64, b: u64, p: u64) -> u64 {
        (a + b) % p
    }

    #[inline]
    pub fn sub(a: u64, b: u64, p: u64) -> u64 {
        (a + p - b) % p
    }

    #[inline]
    pub fn neg(a: u64, p: u64) -> u64 {
        (p - a % p) % p
    }

    #[inline]
    pub fn mul(a: u64, b: u64, p: u64) -> u64 {
        (a * b) % p
    }

    pub fn pow(mut a: u64, mut e: u64, p: u64) -> u64 {
        let mut acc = 1 % p;
        a %= p;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(acc, a, p);
            }
            a = mul(a, a, p);
            e >>= 1;
        }
        acc
    }

    /// Inverse of a nonzero residue (Fermat).
    pub fn inv(a: u64, p: u64) -> u64 {
        debug_assert!(a % p != 0, "inverse of zero mod {p}");
        pow(a, p - 2, p)
    }

    /// Reduces a signed integer into `[0, p)`.
    #[inline]
    pub fn from_i64(a: i64, p: u64) -> u64 {
        a.rem_euclid(p as i64) as u64
    }
}

/// Dense matrix over `F_p`, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpMatrix {
    p: u64,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl FpMatrix {
    pub fn zeros(p: u64, rows: usize, cols: usize) -> Self {
        FpMatrix { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(p: u64, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from signed integer rows, reducing entries mod `p`.
    ///
    /// All rows must have the same length; `cols` is taken from the first row
    /// (zero when there are no rows).
    pub fn from_rows(p: u64, rows: &[Vec<i64>]) -> Result<Self, LinAlgError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(LinAlgError::DimensionMismatch { expected: cols, found: r.len() });
            }
            data.extend(r.iter().map(|&x| fp::from_i64(x, p)));
        }
        Ok(FpMatrix { p, rows: rows.len(), cols, data })
    }

    /// Builds a matrix whose columns are the given vectors (entries already in `[0, p)`).
    pub fn from_columns(p: u64, height: usize, columns: &[Vec<u64>]) -> Result<Self, LinAlgError> {
        let mut m = Self::zeros(p, height, columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != height {
                return Err(LinAlgError::DimensionMismatch { expected: height, found: c.len() });
            }
            for (i, &x) in c.iter().enumerate() {
                m.set(i, j, x % p);
            }
        }
        Ok(m)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v % self.p;
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[u64]) -> Result<Vec<u64>, LinAlgError> {
        if x.len() != self.cols {
            return Err(LinAlgError::DimensionMismatch { expected: self.cols, found: x.len() });
        }
        let p = self.p;
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .fold(0, |acc, (&a, &b)| fp::add(acc, fp::mul(a, b, p), p))
            })
            .collect())
    }

    /// Row rank over `F_p`.
    pub fn rank(&self) -> usize {
        self.echelon().rank()
    }

    /// Some `x` with `Mx = b`, or `None` when the system is inconsistent.
    ///
    /// Free variables are set to zero, so the returned solution is the one
    /// supported on pivot columns.
    pub fn solve(&self, b: &[u64]) -> Result<Option<Vec<u64>>, LinAlgError> {
        if b.len() != self.rows {
            return Err(LinAlgError::DimensionMismatch { expected: self.rows, found: b.len() });
        }
        let p = self.p;
        // Augmented system [M | b]; the extra column is never a pivot unless inconsistent.
        let mut ech = RowEchelon::new(p, self.cols + 1);
        for r in 0..self.rows {
            let mut row = self.row(r).to_vec();
            row.push(b[r] % p);
            ech.insert(row);
        }
        if ech.pivot_row_of(self.cols).is_some() {
            return Ok(None);
        }
        let mut x = vec![0; self.cols];
        for (row, &pc) in ech.rows.iter().zip(&ech.pivots) {
            x[pc] = row[self.cols];
        }
        Ok(Some(x))
    }

    /// Basis of the null space, one vector per free column (increasing order).
    pub fn kernel_basis(&self) -> Vec<Vec<u64>> {
        self.echelon().kernel_basis()
    }

    fn echelon(&self) -> RowEchelon {
        let mut ech = RowEchelon::new(self.p, self.cols);
        for r in 0..self.rows {
            ech.insert(self.row(r).to_vec());
        }
        ech
    }
}

/// Incrementally maintained reduced row echelon form.
///
/// Rows can be streamed in one at a time; the stored basis is kept fully
/// reduced, so reducing a new row costs one subtraction per pivot column
/// where the row is nonzero. The cocycle systems rely on this: their
/// equations are very sparse and vastly outnumber the unknowns.
#[derive(Debug, Clone)]
pub struct RowEchelon {
    p: u64,
    cols: usize,
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
    pivot_of_col: Vec<Option<usize>>,
}

impl RowEchelon {
    pub fn new(p: u64, cols: usize) -> Self {
        RowEchelon { p, cols, rows: Vec::new(), pivots: Vec::new(), pivot_of_col: vec![None; cols] }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivot_row_of(&self, col: usize) -> Option<usize> {
        self.pivot_of_col[col]
    }

    /// The reduced basis rows, in insertion order of their pivots.
    pub fn basis(&self) -> &[Vec<u64>] {
        &self.rows
    }

    /// Reduces `v` against the current basis, returning the remainder.
    pub fn reduce(&self, mut v: Vec<u64>) -> Vec<u64> {
        debug_assert_eq!(v.len(), self.cols);
        let p = self.p;
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            let c = v[pc];
            if c != 0 {
                for (x, &r) in v.iter_mut().zip(row) {
                    if r != 0 {
                        *x = fp::sub(*x, fp::mul(c, r, p), p);
                    }
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.reduce(v.to_vec()).iter().all(|&x| x == 0)
    }

    /// Adds a row; returns `true` when it was independent of the current basis.
    pub fn insert(&mut self, v: Vec<u64>) -> bool {
        let p = self.p;
        let mut v = self.reduce(v);
        let Some(pc) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = fp::inv(v[pc], p);
        for x in v.iter_mut() {
            *x = fp::mul(*x, inv, p);
        }
        // Clear the new pivot column from the existing rows to stay reduced.
        for row in self.rows.iter_mut() {
            let c = row[pc];
            if c != 0 {
                for (x, &r) in row.iter_mut().zip(&v) {
                    if r != 0 {
                        *x = fp::sub(*x, fp::mul(c, r, p), p);
                    }
                }
            }
        }
        self.pivot_of_col[pc] = Some(self.rows.len());
        self.pivots.push(pc);
        self.rows.push(v);
        true
    }

    /// Null space of the matrix whose rows were inserted.
    pub fn kernel_basis(&self) -> Vec<Vec<u64>> {
        let p = self.p;
        (0..self.cols)
            .filter(|&c| self.pivot_of_col[c].is_none())
            .map(|free| {
                let mut k = vec![0; self.cols];
                k[free] = 1;
                for (row, &pc) in self.rows.iter().zip(&self.pivots) {
                    k[pc] = fp::neg(row[free], p);
                }
                k
            })
            .collect()
    }
}

/// Span of a set of vectors, as an echelon basis.
pub fn span(p: u64, dim: usize, vectors: impl IntoIterator<Item = Vec<u64>>) -> RowEchelon {
    let mut ech = RowEchelon::new(p, dim);
    for v in vectors {
        ech.insert(v);
    }
    ech
}

/// All vectors of `F_p^d`, in lexicographic order (last coordinate fastest).
pub fn all_vectors(p: u64, d: usize) -> impl Iterator<Item = Vec<u64>> {
    let total = (p as u128).pow(d as u32);
    (0..total).map(move |mut idx| {
        let mut v = vec![0; d];
        for slot in v.iter_mut().rev() {
            *slot = (idx % p as u128) as u64;
            idx /= p as u128;
        }
        v
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_small_cases() {
        assert_eq!(FpMatrix::identity(2, 2).rank(), 2);
        assert_eq!(FpMatrix::zeros(3, 3, 3).rank(), 0);
        assert_eq!(FpMatrix::from_rows(2, &[vec![1, 1], vec![1, 1]]).unwrap().rank(), 1);
    }

    #[test]
    fn solve_small_cases() {
        let id = FpMatrix::identity(5, 3);
        assert_eq!(id.solve(&[1, 2, 3]).unwrap(), Some(vec![1, 2, 3]));

        let z = FpMatrix::zeros(3, 2, 2);
        assert_eq!(z.solve(&[1, 0]).unwrap(), None);

        let m = FpMatrix::from_rows(2, &[vec![1, 1]]).unwrap();
        let x = m.solve(&[1]).unwrap().unwrap();
        assert_eq!(m.mul_vec(&x).unwrap(), vec![1]);
        assert_eq!(x, vec![1, 0]);
    }

    #[test]
    fn solve_rejects_wrong_length() {
        let m = FpMatrix::identity(3, 2);
        assert!(matches!(m.solve(&[1]), Err(LinAlgError::DimensionMismatch { .. })));
    }

    #[test]
    fn kernel_small_cases() {
        assert!(FpMatrix::identity(7, 4).kernel_basis().is_empty());
        assert_eq!(FpMatrix::zeros(2, 2, 3).kernel_basis().len(), 3);
        let m = FpMatrix::from_rows(2, &[vec![1, 1, 0]]).unwrap();
        let k = m.kernel_basis();
        assert_eq!(k, vec![vec![1, 1, 0], vec![0, 0, 1]]);
    }

    #[test]
    fn solve_mod_three() {
        let m = FpMatrix::from_rows(3, &[vec![1, 2], vec![2, 2]]).unwrap();
        let x = m.solve(&[0, 1]).unwrap().unwrap();
        assert_eq!(m.mul_vec(&x).unwrap(), vec![0, 1]);
    }

    #[test]
    fn echelon_contains() {
        let e = span(3, 3, vec![vec![1, 2, 0], vec![0, 1, 1]]);
        assert!(e.contains(&[1, 0, 1]));
        assert!(!e.contains(&[0, 0, 1]));
    }

    #[test]
    fn all_vectors_counts() {
        assert_eq!(all_vectors(3, 2).count(), 9);
        assert_eq!(all_vectors(2, 0).collect::<Vec<_>>(), vec![Vec::<u64>::new()]);
    }
}
