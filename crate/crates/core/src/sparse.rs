//! Thin wrapper around the sparse LU factorization used by the grid and
//! Lindblad solvers.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::traits::ComplexField;
use faer::Mat;

/// Factorized square sparse matrix.
pub(crate) struct SparseLu<T: ComplexField> {
    lu: faer::sparse::linalg::solvers::Lu<usize, T>,
    n: usize,
}

impl<T: ComplexField + Copy> SparseLu<T> {
    /// Factorizes the `n × n` matrix given as `(row, col, value)` triplets;
    /// duplicate entries are summed.
    pub(crate) fn new(n: usize, entries: &[(usize, usize, T)]) -> Result<Self, String> {
        let triplets: Vec<Triplet<usize, usize, T>> =
            entries.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
        let mat = SparseColMat::<usize, T>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| format!("{e:?}"))?;
        let lu = mat.sp_lu().map_err(|e| format!("{e:?}"))?;
        Ok(Self { lu, n })
    }

    /// Solves `A x = b` in place.
    pub(crate) fn solve(&self, rhs: &mut [T]) {
        let mut b = Mat::<T>::from_fn(self.n, 1, |i, _| rhs[i]);
        self.lu.solve_in_place(b.as_mut());
        for (i, v) in rhs.iter_mut().enumerate() {
            *v = b[(i, 0)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn solves_small_real_system() {
        let lu = SparseLu::new(2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)]).unwrap();
        let mut b = [3.0_f64, 5.0];
        lu.solve(&mut b);
        assert!((b[0] - 0.8).abs() < 1e-14 && (b[1] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn solves_small_complex_system() {
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let lu = SparseLu::new(2, &[(0, 0, i), (1, 1, one), (1, 0, one)]).unwrap();
        let mut b = [one, one];
        lu.solve(&mut b);
        assert!((b[0] + i).norm() < 1e-14 && (b[1] - one - i).norm() < 1e-14);
    }
}
