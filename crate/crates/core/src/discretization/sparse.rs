use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};

use super::dofmap::DofMap;
use crate::error::{Error, Result};

/// Relative residual accepted from [`solve_direct`].
pub const DIRECT_SOLVE_TOLERANCE: f64 = 1e-10;

const MAX_REFINEMENT_STEPS: usize = 3;

/// Compressed sparse row matrix with sorted, unique column indices per row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix with the given per-row column sets (need not be sorted).
    pub fn from_pattern(ncols: usize, mut rows: Vec<Vec<usize>>) -> Self {
        let nrows = rows.len();
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for cols in rows.iter_mut() {
            cols.sort_unstable();
            cols.dedup();
            col_idx.extend_from_slice(cols);
            row_ptr.push(col_idx.len());
        }
        let values = vec![0.0; col_idx.len()];
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Duplicates are summed in input order.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nrows];
        for &(i, j, v) in triplets {
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) out of bounds");
            rows[i].push((j, v));
        }
        Self::from_row_entries(ncols, rows)
    }

    fn from_row_entries(ncols: usize, mut rows: Vec<Vec<(usize, f64)>>) -> Self {
        let nrows = rows.len();
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for entries in rows.iter_mut() {
            // stable sort keeps the summation order of duplicates fixed
            entries.sort_by_key(|e| e.0);
            for &(j, v) in entries.iter() {
                if col_idx.len() > *row_ptr.last().unwrap() && *col_idx.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    /// Storage position of entry `(i, j)`, if it is in the pattern.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let start = self.row_ptr[i];
        let cols = &self.col_idx[start..self.row_ptr[i + 1]];
        cols.binary_search(&j).ok().map(|k| start + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&j, v)| v * x[j]).sum()
            })
            .collect()
    }

    /// `y^T A x`.
    pub fn bilinear(&self, y: &[f64], x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(y).map(|(a, b)| a * b).sum()
    }

    pub fn transpose(&self) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.ncols];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                rows[j].push((i, v));
            }
        }
        Self::from_row_entries(self.nrows, rows)
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.values.iter_mut().for_each(|v| *v *= factor);
        self
    }

    /// Entrywise `self + other`, patterns merged.
    pub fn add(&self, other: &CsrMatrix) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        Self::from_blocks(self.nrows, self.ncols, &[(0, 0, self), (0, 0, other)])
    }

    /// Place blocks at `(row_offset, col_offset)`; overlapping entries are summed.
    pub fn from_blocks(nrows: usize, ncols: usize, blocks: &[(usize, usize, &CsrMatrix)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nrows];
        for &(r0, c0, block) in blocks {
            assert!(r0 + block.nrows <= nrows && c0 + block.ncols <= ncols);
            for i in 0..block.nrows {
                let (cols, vals) = block.row(i);
                rows[r0 + i].extend(cols.iter().zip(vals).map(|(&j, &v)| (c0 + j, v)));
            }
        }
        Self::from_row_entries(ncols, rows)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in d.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                row[j] = v;
            }
        }
        d
    }

    fn to_faer(&self) -> Result<SparseColMat<usize, f64>> {
        let triplets: Vec<Triplet<usize, usize, f64>> = (0..self.nrows)
            .flat_map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter()
                    .zip(vals)
                    .map(move |(&j, &v)| Triplet::new(i, j, v))
            })
            .collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &triplets)
            .map_err(|e| Error::InvalidArgument(format!("sparse conversion failed: {e:?}")))
    }
}

/// Assembled linear system.
#[derive(Clone, Debug)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub solution: Vec<f64>,
}

impl SparseSystem {
    pub fn new(matrix: CsrMatrix, rhs: Vec<f64>) -> Result<Self> {
        if matrix.nrows != rhs.len() {
            return Err(Error::DimensionMismatch {
                context: "system rhs",
                expected: matrix.nrows,
                actual: rhs.len(),
            });
        }
        let n = matrix.ncols;
        Ok(Self {
            matrix,
            rhs,
            solution: vec![0.0; n],
        })
    }

    /// Replace row `row` by the identity row with right-hand side `value`.
    pub fn constrain_row(&mut self, row: usize, value: f64) -> Result<()> {
        let diag = self.matrix.position(row, row).ok_or_else(|| {
            Error::InvalidArgument(format!("row {row} has no diagonal entry to constrain"))
        })?;
        let range = self.matrix.row_ptr[row]..self.matrix.row_ptr[row + 1];
        self.matrix.values[range].iter_mut().for_each(|v| *v = 0.0);
        self.matrix.values[diag] = 1.0;
        self.rhs[row] = value;
        Ok(())
    }

    /// `||A x - b|| / ||b||` (absolute norm when `b = 0`).
    pub fn relative_residual(&self, x: &[f64]) -> f64 {
        let r = residual(&self.matrix, x, &self.rhs);
        let bn = norm2(&self.rhs);
        let rn = norm2(&r);
        if bn > 0.0 {
            rn / bn
        } else {
            rn
        }
    }
}

/// Row-replacement Dirichlet conditions on the dofs flagged in `dofmap`.
///
/// The dof map's dofs are taken to be the leading rows of the system, which
/// is how the saddle-point systems order velocity before pressure. Columns
/// are left untouched, so the constrained system is not symmetric.
/// `boundary_values` receives the node coordinates and the component.
pub fn apply_dirichlet(
    system: &mut SparseSystem,
    dofmap: &DofMap,
    boundary_values: impl Fn([f64; 2], usize) -> f64,
) -> Result<()> {
    if dofmap.dof_count > system.matrix.nrows {
        return Err(Error::DimensionMismatch {
            context: "dirichlet dof map",
            expected: system.matrix.nrows,
            actual: dofmap.dof_count,
        });
    }
    let n = dofmap.n_nodes();
    for (dof, &fixed) in dofmap.dirichlet_mask.iter().enumerate() {
        if fixed {
            let value = boundary_values(dofmap.dof_coordinates[dof % n], dof / n);
            system.constrain_row(dof, value)?;
        }
    }
    Ok(())
}

/// Sparse LU solve with a few steps of iterative refinement.
///
/// The solution is also stored in `system.solution`.
pub fn solve_direct(system: &mut SparseSystem) -> Result<Vec<f64>> {
    let a = &system.matrix;
    if a.nrows != a.ncols {
        return Err(Error::InvalidArgument(format!(
            "direct solve needs a square matrix, got {}x{}",
            a.nrows, a.ncols
        )));
    }
    let n = a.nrows;
    if system.rhs.iter().all(|&b| b == 0.0) {
        system.solution = vec![0.0; n];
        return Ok(system.solution.clone());
    }
    let lu = a
        .to_faer()?
        .sp_lu()
        .map_err(|e| match e {
            faer::sparse::linalg::LuError::SymbolicSingular { index } => {
                Error::Factorization { pivot: index }
            }
            other => Error::InvalidArgument(format!("sparse LU failed: {other:?}")),
        })?;
    let solve = |b: &[f64]| -> Vec<f64> {
        let col = Col::<f64>::from_fn(n, |i| b[i]);
        let x = lu.solve(&col);
        (0..n).map(|i| x[i]).collect()
    };
    let mut x = solve(&system.rhs);
    if let Some(pivot) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::Factorization { pivot });
    }
    let bn = norm2(&system.rhs);
    let mut rel = norm2(&residual(a, &x, &system.rhs)) / bn;
    for _ in 0..MAX_REFINEMENT_STEPS {
        if rel <= 0.01 * DIRECT_SOLVE_TOLERANCE {
            break;
        }
        let r = residual(a, &x, &system.rhs);
        let dx = solve(&r);
        let candidate: Vec<f64> = x.iter().zip(&dx).map(|(xi, di)| xi - di).collect();
        let cand_rel = norm2(&residual(a, &candidate, &system.rhs)) / bn;
        if cand_rel >= rel {
            break;
        }
        x = candidate;
        rel = cand_rel;
    }
    if !(rel <= DIRECT_SOLVE_TOLERANCE) {
        return Err(Error::InaccurateSolve {
            residual: rel,
            tolerance: DIRECT_SOLVE_TOLERANCE,
        });
    }
    system.solution.clone_from(&x);
    Ok(x)
}

/// `A x - b`.
fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    a.mul_vec(x).iter().zip(b).map(|(ax, bi)| ax - bi).collect()
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Dense Gaussian elimination with partial pivoting (test oracle).
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
                .unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for i in k + 1..n {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
            x[i] = (b[i] - s) / a[i][i];
        }
        x
    }

    #[test]
    fn identity_and_diagonal_systems() {
        let b = vec![3.0, -1.0, 0.5];
        let mut sys = SparseSystem::new(CsrMatrix::identity(3), b.clone()).unwrap();
        assert_eq!(solve_direct(&mut sys).unwrap(), b);

        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (1, 1, 4.0)]);
        let mut sys = SparseSystem::new(a, vec![2.0, 4.0]).unwrap();
        let x = solve_direct(&mut sys).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
        assert_eq!(sys.solution, x);
    }

    #[test]
    fn random_sparse_system_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 50;
        let mut triplets = Vec::new();
        for i in 0..n {
            triplets.push((i, i, 10.0 + rng.random::<f64>()));
            for _ in 0..4 {
                let j = rng.random_range(0..n);
                triplets.push((i, j, rng.random_range(-1.0..1.0)));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &triplets);
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let oracle = dense_solve(a.to_dense(), b.clone());
        let mut sys = SparseSystem::new(a, b).unwrap();
        let x = solve_direct(&mut sys).unwrap();
        assert!(sys.relative_residual(&x) <= DIRECT_SOLVE_TOLERANCE);
        for (xi, oi) in x.iter().zip(&oracle) {
            assert!((xi - oi).abs() < 1e-10);
        }
    }

    #[test]
    fn structurally_singular_matrix_reports_pivot() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0)]);
        let mut sys = SparseSystem::new(a, vec![1.0, 1.0]).unwrap();
        match solve_direct(&mut sys) {
            Err(Error::Factorization { pivot }) => assert_eq!(pivot, 1),
            other => panic!("expected factorization failure, got {other:?}"),
        }
    }

    #[test]
    fn numerically_singular_matrix_fails() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        let mut sys = SparseSystem::new(a, vec![1.0, 2.0]).unwrap();
        assert!(solve_direct(&mut sys).is_err());
    }

    #[test]
    fn duplicates_sum_and_blocks_compose() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (0, 1, 2.0), (1, 0, -1.0)]);
        assert_eq!(a.get(0, 1), 3.0);
        assert_eq!(a.nnz(), 2);
        let t = a.transpose();
        assert_eq!(t.get(1, 0), 3.0);
        let big = CsrMatrix::from_blocks(4, 4, &[(0, 0, &a), (2, 2, &t), (0, 2, &CsrMatrix::identity(2))]);
        assert_eq!(big.get(0, 1), 3.0);
        assert_eq!(big.get(3, 2), 3.0);
        assert_eq!(big.get(1, 3), 1.0);
        assert_eq!(big.get(2, 0), 0.0);
    }

    #[test]
    fn constrained_rows_become_identity() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)]);
        let mut sys = SparseSystem::new(a, vec![1.0, 2.0]).unwrap();
        sys.constrain_row(0, 5.0).unwrap();
        let x = solve_direct(&mut sys).unwrap();
        assert!((x[0] - 5.0).abs() < 1e-14);
        assert!((x[1] - (2.0 - 5.0) / 3.0).abs() < 1e-14);
        let no_diag = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.0)]);
        let mut sys = SparseSystem::new(no_diag, vec![0.0, 0.0]).unwrap();
        assert!(sys.constrain_row(0, 1.0).is_err());
        assert!(SparseSystem::new(CsrMatrix::identity(3), vec![0.0; 2]).is_err());
    }
}
