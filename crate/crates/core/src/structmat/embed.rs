//! Row-insertion embeddings of an arbitrary matrix into a taller Toeplitz or
//! Hankel matrix.
//!
//! Row p of B (0-based) is placed at row p·n of the output. For Toeplitz, that
//! row spans diagonals p·n − (n−1) … p·n; for Hankel it spans anti-diagonals
//! p·n … p·n + n − 1. Consecutive original rows therefore cover disjoint,
//! adjacent ranges of the parameter vector, so every parameter is fixed by
//! exactly one entry of B and the n − 1 rows inserted between neighbours are
//! fully determined (for n = 1 nothing is inserted).

use super::dense::DenseMatrix;
use super::hankel::HankelMatrix;
use super::toeplitz::ToeplitzMatrix;

/// Returns the Toeplitz matrix and the 0-based output rows that hold B's rows.
pub fn embed_rows_toeplitz(b: &DenseMatrix) -> (ToeplitzMatrix, Vec<usize>) {
    let (m, n) = b.shape();
    let out_rows = m + (m - 1) * (n - 1);
    let mut diagonals = vec![0.0; out_rows + n - 1];
    let mut map = Vec::with_capacity(m);
    for p in 0..m {
        let row = p * n;
        map.push(row);
        for j in 0..n {
            // entry (row, j) = a_{row−j}, stored at row + n − 1 − j
            diagonals[row + n - 1 - j] = b.get(p, j);
        }
    }
    let t = ToeplitzMatrix::new(out_rows, n, diagonals).expect("consistent shape");
    (t, map)
}

pub fn embed_rows_hankel(b: &DenseMatrix) -> (HankelMatrix, Vec<usize>) {
    let (m, n) = b.shape();
    let out_rows = m + (m - 1) * (n - 1);
    let mut antidiagonals = vec![0.0; out_rows + n - 1];
    let mut map = Vec::with_capacity(m);
    for p in 0..m {
        let row = p * n;
        map.push(row);
        antidiagonals[row..row + n].copy_from_slice(b.row(p));
    }
    let h = HankelMatrix::new(out_rows, n, antidiagonals).expect("consistent shape");
    (h, map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two() -> DenseMatrix {
        // a11 = 11, a12 = 12, a21 = 21, a22 = 22
        DenseMatrix::from_rows(&[vec![11.0, 12.0], vec![21.0, 22.0]]).unwrap()
    }

    #[test]
    fn toeplitz_two_by_two_pattern() {
        let (t, map) = embed_rows_toeplitz(&two_by_two());
        let want = DenseMatrix::from_rows(&[vec![11.0, 12.0], vec![22.0, 11.0], vec![21.0, 22.0]]).unwrap();
        assert_eq!(t.to_dense(), want);
        assert_eq!(map, vec![0, 2]);
    }

    #[test]
    fn hankel_two_by_two_pattern() {
        let (h, map) = embed_rows_hankel(&two_by_two());
        let want = DenseMatrix::from_rows(&[vec![11.0, 12.0], vec![12.0, 21.0], vec![21.0, 22.0]]).unwrap();
        assert_eq!(h.to_dense(), want);
        assert_eq!(map, vec![0, 2]);
    }

    #[test]
    fn single_row_is_unchanged() {
        let b = DenseMatrix::from_rows(&[vec![1.0, 2.0, 3.0, 4.0]]).unwrap();
        let (t, tm) = embed_rows_toeplitz(&b);
        assert_eq!(t.to_dense(), b);
        assert_eq!(tm, vec![0]);
        let (h, hm) = embed_rows_hankel(&b);
        assert_eq!(h.to_dense(), b);
        assert_eq!(hm, vec![0]);
    }

    #[test]
    fn single_column_needs_no_insertions() {
        let b = DenseMatrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        assert_eq!(embed_rows_toeplitz(&b).0.to_dense(), b);
        assert_eq!(embed_rows_hankel(&b).0.to_dense(), b);
    }

    #[test]
    fn rows_recovered_exactly() {
        let b = DenseMatrix::from_fn(3, 3, |i, j| (i * 3 + j) as f64 * 0.37 - 1.1);
        let (t, map) = embed_rows_toeplitz(&b);
        assert_eq!((t.rows(), t.cols()), (7, 3));
        assert_eq!(map, vec![0, 3, 6]);
        let dense = t.to_dense();
        for (p, &r) in map.iter().enumerate() {
            assert_eq!(dense.row(r), b.row(p));
        }

        let b = DenseMatrix::from_fn(2, 3, |i, j| (i as f64 + 1.0) * (j as f64 - 0.5));
        let (h, map) = embed_rows_hankel(&b);
        assert_eq!((h.rows(), h.cols()), (4, 3));
        assert_eq!(map, vec![0, 3]);
        let dense = h.to_dense();
        for (p, &r) in map.iter().enumerate() {
            assert_eq!(dense.row(r), b.row(p));
        }
    }
}
