use std::sync::Once;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};

use super::Scalar;
use crate::error::{Error, Result};

/// Relative residual `‖Ax − b‖₂ / ‖b‖₂` every solve must reach.
pub const SOLVE_TOLERANCE: f64 = 1e-8;

const MAX_REFINEMENT_STEPS: usize = 3;

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

/// Accumulates `(row, col, value)` entries; duplicates are summed in
/// insertion order so the finalized matrix does not depend on anything but
/// the push sequence.
#[derive(Debug, Clone)]
pub struct TripletBuilder<T> {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Scalar> TripletBuilder<T> {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(n_rows: usize, n_cols: usize, capacity: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            entries: Vec::with_capacity(capacity),
        }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, value: T) {
        debug_assert!(row < self.n_rows && col < self.n_cols);
        self.entries.push((row, col, value));
    }

    /// Sorts (stably), sums duplicates and drops entries that are exactly
    /// zero.
    pub fn finalize(mut self) -> SparseMatrix<T> {
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; self.n_rows + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len() / 4);
        let mut values = Vec::with_capacity(self.entries.len() / 4);
        let mut k = 0;
        while k < self.entries.len() {
            let (r, c, mut v) = self.entries[k];
            k += 1;
            while k < self.entries.len() && self.entries[k].0 == r && self.entries[k].1 == c {
                v += self.entries[k].2;
                k += 1;
            }
            if v != T::default() {
                row_ptr[r + 1] += 1;
                col_idx.push(c);
                values.push(v);
            }
        }
        for r in 0..self.n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }
}

impl<T: Scalar> SparseMatrix<T> {
    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![T::from_real(1.0); n],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => T::default(),
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n_cols, "matvec dimension mismatch");
        (0..self.n_rows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                let mut s = T::default();
                for (&c, &v) in cols.iter().zip(vals) {
                    s += v * x[c];
                }
                s
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut b = TripletBuilder::with_capacity(self.n_cols, self.n_rows, self.nnz());
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                b.push(c, i, v);
            }
        }
        b.finalize()
    }

    /// `self + s·other` for matrices of equal shape.
    pub fn add_scaled(&self, other: &Self, s: T) -> Self {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        let mut b =
            TripletBuilder::with_capacity(self.n_rows, self.n_cols, self.nnz() + other.nnz());
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                b.push(i, c, v);
            }
            let (cols, vals) = other.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                b.push(i, c, s * v);
            }
        }
        b.finalize()
    }

    /// Bilinear form `xᵀ A y` (no conjugation).
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        let ay = self.matvec(y);
        let mut s = T::default();
        for (a, b) in x.iter().zip(&ay) {
            s += *a * *b;
        }
        s
    }

    fn to_faer(&self) -> Result<SparseColMat<usize, T>> {
        let mut triplets = Vec::with_capacity(self.nnz());
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                triplets.push(Triplet::new(i, c, v));
            }
        }
        SparseColMat::try_new_from_triplets(self.n_rows, self.n_cols, &triplets)
            .map_err(|e| Error::InvalidInput(format!("sparse matrix conversion failed: {e:?}")))
    }
}

pub(crate) fn norm2<T: Scalar>(x: &[T]) -> f64 {
    x.iter().map(|v| v.abs2()).sum::<f64>().sqrt()
}

enum Factor<T: Scalar> {
    Cholesky(faer::sparse::linalg::solvers::Llt<usize, T>),
    Lu(faer::sparse::linalg::solvers::Lu<usize, T>),
}

/// Direct sparse factorization, reusable across right-hand sides. Every solve
/// checks its residual against [`SOLVE_TOLERANCE`] and applies a few steps
/// of iterative refinement if needed.
pub struct Factorization<T: Scalar> {
    matrix: SparseMatrix<T>,
    factor: Factor<T>,
}

impl<T: Scalar> std::fmt::Debug for Factorization<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.factor {
            Factor::Cholesky(_) => "cholesky",
            Factor::Lu(_) => "lu",
        };
        f.debug_struct("Factorization")
            .field("n", &self.matrix.n_rows)
            .field("kind", &kind)
            .finish()
    }
}

fn sequential_kernels() {
    // bitwise-reproducible factorizations regardless of thread count
    static INIT: Once = Once::new();
    INIT.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

fn check_factorizable<T: Scalar>(a: &SparseMatrix<T>) -> Result<()> {
    if a.n_rows != a.n_cols {
        return Err(Error::InvalidInput(format!(
            "matrix is {}×{}, expected square",
            a.n_rows, a.n_cols
        )));
    }
    if a.values.iter().any(|v| !v.is_finite_value()) {
        return Err(Error::SingularMatrix);
    }
    if (0..a.n_rows).any(|i| a.row_ptr[i] == a.row_ptr[i + 1]) {
        return Err(Error::SingularMatrix);
    }
    Ok(())
}

impl<T: Scalar> Factorization<T> {
    /// LU with partial pivoting; suitable for complex-symmetric indefinite
    /// systems.
    pub fn lu(matrix: SparseMatrix<T>) -> Result<Self> {
        check_factorizable(&matrix)?;
        sequential_kernels();
        let lu = matrix
            .to_faer()?
            .sp_lu()
            .map_err(|_| Error::SingularMatrix)?;
        Ok(Self {
            matrix,
            factor: Factor::Lu(lu),
        })
    }

    /// Cholesky for symmetric positive definite matrices (only the lower
    /// triangle is read).
    pub fn cholesky(matrix: SparseMatrix<T>) -> Result<Self> {
        check_factorizable(&matrix)?;
        sequential_kernels();
        let llt = matrix
            .to_faer()?
            .sp_cholesky(faer::Side::Lower)
            .map_err(|_| Error::SingularMatrix)?;
        Ok(Self {
            matrix,
            factor: Factor::Cholesky(llt),
        })
    }

    pub fn matrix(&self) -> &SparseMatrix<T> {
        &self.matrix
    }

    fn raw_solve(&self, b: &[T]) -> Vec<T> {
        let mut rhs = faer::Mat::<T>::from_fn(b.len(), 1, |i, _| b[i]);
        match &self.factor {
            Factor::Cholesky(f) => f.solve_in_place(rhs.as_mut()),
            Factor::Lu(f) => f.solve_in_place(rhs.as_mut()),
        }
        (0..b.len()).map(|i| rhs[(i, 0)]).collect()
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.matrix.n_rows;
        if b.len() != n {
            return Err(Error::InvalidInput(format!(
                "right-hand side has length {}, expected {n}",
                b.len()
            )));
        }
        let b_norm = norm2(b);
        if b_norm == 0.0 {
            return Ok(vec![T::default(); n]);
        }
        let mut x = self.raw_solve(b);
        let mut residual = f64::INFINITY;
        for step in 0..=MAX_REFINEMENT_STEPS {
            if x.iter().any(|v| !v.is_finite_value()) {
                return Err(Error::SingularMatrix);
            }
            let ax = self.matrix.matvec(&x);
            let r: Vec<T> = b.iter().zip(&ax).map(|(bi, ai)| *bi - *ai).collect();
            residual = norm2(&r) / b_norm;
            if residual <= SOLVE_TOLERANCE || step == MAX_REFINEMENT_STEPS {
                break;
            }
            let dx = self.raw_solve(&r);
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += *di;
            }
        }
        if residual <= SOLVE_TOLERANCE {
            Ok(x)
        } else {
            Err(Error::NonConvergence { residual })
        }
    }
}

/// One-shot LU solve of `A x = b`.
pub fn solve_linear<T: Scalar>(a: &SparseMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    Factorization::lu(a.clone())?.solve(b)
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;

    #[test]
    fn duplicates_are_summed_and_zeros_dropped() {
        let mut b = TripletBuilder::<f64>::new(2, 2);
        b.push(0, 0, 1.0);
        b.push(1, 1, 2.0);
        b.push(0, 0, 0.5);
        b.push(0, 1, 3.0);
        b.push(0, 1, -3.0);
        let m = b.finalize();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 0), 1.5);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.matvec(&[1.0, 1.0]), vec![1.5, 2.0]);
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let a = SparseMatrix::<Complex64>::identity(5);
        let b: Vec<Complex64> = (0..5).map(|i| Complex64::new(i as f64, -1.0)).collect();
        assert_eq!(solve_linear(&a, &b).unwrap(), b);
    }

    #[test]
    fn zero_row_is_singular() {
        let mut b = TripletBuilder::<f64>::new(3, 3);
        b.push(0, 0, 1.0);
        b.push(2, 2, 1.0);
        b.push(1, 1, 0.0);
        let a = b.finalize();
        assert!(matches!(
            solve_linear(&a, &[1.0, 1.0, 1.0]),
            Err(Error::SingularMatrix)
        ));
    }

    #[test]
    fn nonsymmetric_complex_system() {
        let mut b = TripletBuilder::<Complex64>::new(3, 3);
        let i = Complex64::new(0.0, 1.0);
        for (r, c, v) in [
            (0, 0, Complex64::new(4.0, 1.0)),
            (0, 1, i),
            (1, 0, Complex64::new(-1.0, 0.0)),
            (1, 1, Complex64::new(3.0, 0.0)),
            (1, 2, Complex64::new(0.5, 0.5)),
            (2, 2, Complex64::new(2.0, -1.0)),
        ] {
            b.push(r, c, v);
        }
        let a = b.finalize();
        let x_true = vec![
            Complex64::new(1.0, 2.0),
            Complex64::new(-0.5, 0.0),
            Complex64::new(0.0, 3.0),
        ];
        let rhs = a.matvec(&x_true);
        let x = solve_linear(&a, &rhs).unwrap();
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn cholesky_matches_lu() {
        let n = 6;
        let mut b = TripletBuilder::<f64>::new(n, n);
        for i in 0..n {
            b.push(i, i, 2.5);
            if i + 1 < n {
                b.push(i, i + 1, -1.0);
                b.push(i + 1, i, -1.0);
            }
        }
        let a = b.finalize();
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x1 = Factorization::cholesky(a.clone())
            .unwrap()
            .solve(&rhs)
            .unwrap();
        let x2 = Factorization::lu(a).unwrap().solve(&rhs).unwrap();
        for (u, v) in x1.iter().zip(&x2) {
            assert!((u - v).abs() < 1e-12);
        }
    }
}
