use crate::structmat::{DenseMatrix, HankelMatrix, StructuredMatrix, ToeplitzMatrix};

/// Which side the selector multiplies the square matrix from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectorSide {
    /// Input was already square; the selector is the identity.
    None,
    /// m > n: B = S·P.
    Right,
    /// m < n: B = P·S.
    Left,
}

/// Structure of the selector matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectorKind {
    /// [I; 0] or [I | 0], banded Toeplitz.
    Toeplitz,
    /// [J; 0] or [J | 0] with J the exchange matrix, which is Hankel.
    Hankel,
}

#[derive(Debug, Clone)]
pub struct Padding {
    pub square: DenseMatrix,
    pub selector: StructuredMatrix,
    pub side: SelectorSide,
}

impl Padding {
    /// Recomposes the original matrix from the square block and selector.
    pub fn recompose(&self) -> DenseMatrix {
        let p = self.selector.to_dense();
        match self.side {
            SelectorSide::None => self.square.clone(),
            SelectorSide::Right => self.square.matmul(&p).expect("padding shapes"),
            SelectorSide::Left => p.matmul(&self.square).expect("padding shapes"),
        }
    }
}

/// Square padding with a Toeplitz selector: B = [B | 0]·[I_n; 0] when m > n,
/// B = [I_m | 0]·[B; 0] when m < n.
pub fn pad_to_square(b: &DenseMatrix) -> Padding {
    pad_to_square_with(b, SelectorKind::Toeplitz)
}

/// Square padding with a selector of the requested structure. The Hankel
/// selectors carry an exchange J, so the square block has B's columns (m > n)
/// or rows (m < n) reversed to compensate. Entries are copied, never computed,
/// so recomposition is exact.
pub fn pad_to_square_with(b: &DenseMatrix, kind: SelectorKind) -> Padding {
    let (m, n) = b.shape();
    if m == n {
        return Padding {
            square: b.clone(),
            selector: ToeplitzMatrix::identity(n).into(),
            side: SelectorSide::None,
        };
    }
    let reversed = kind == SelectorKind::Hankel;
    if m > n {
        let square = DenseMatrix::from_fn(m, m, |i, j| match j {
            j if j >= n => 0.0,
            j if reversed => b.get(i, n - 1 - j),
            j => b.get(i, j),
        });
        let selector = match kind {
            SelectorKind::Toeplitz => ToeplitzMatrix::band(m, n, 1.0).into(),
            SelectorKind::Hankel => HankelMatrix::exchange(m, n, n - 1).into(),
        };
        Padding { square, selector, side: SelectorSide::Right }
    } else {
        let square = DenseMatrix::from_fn(n, n, |i, j| match i {
            i if i >= m => 0.0,
            i if reversed => b.get(m - 1 - i, j),
            i => b.get(i, j),
        });
        let selector = match kind {
            SelectorKind::Toeplitz => ToeplitzMatrix::band(m, n, 1.0).into(),
            SelectorKind::Hankel => HankelMatrix::exchange(m, n, m - 1).into(),
        };
        Padding { square, selector, side: SelectorSide::Left }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structmat::MatrixKind;

    fn sample(m: usize, n: usize) -> DenseMatrix {
        DenseMatrix::from_fn(m, n, |i, j| 1.0 + i as f64 * 0.731 - j as f64 * 1.37)
    }

    #[test]
    fn square_is_untouched() {
        let b = sample(3, 3);
        let p = pad_to_square(&b);
        assert_eq!(p.side, SelectorSide::None);
        assert_eq!(p.square, b);
        assert_eq!(p.selector.to_dense(), DenseMatrix::identity(3));
    }

    #[test]
    fn tall_matrix_pads_columns() {
        let b = sample(3, 2);
        let p = pad_to_square(&b);
        assert_eq!(p.side, SelectorSide::Right);
        assert_eq!(p.square.shape(), (3, 3));
        assert!((0..3).all(|i| p.square.get(i, 2) == 0.0));
        assert_eq!(p.selector.shape(), (3, 2));
        assert_eq!(p.selector.kind(), MatrixKind::Toeplitz);
        assert_eq!(p.recompose(), b);
    }

    #[test]
    fn wide_matrix_pads_rows() {
        let b = sample(2, 3);
        let p = pad_to_square(&b);
        assert_eq!(p.side, SelectorSide::Left);
        assert_eq!(p.selector.to_dense(), DenseMatrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap());
        assert_eq!(p.recompose(), b);
    }

    #[test]
    fn hankel_selectors_recompose_exactly() {
        for (m, n) in [(5, 2), (2, 5), (4, 1), (1, 4)] {
            let b = sample(m, n);
            let p = pad_to_square_with(&b, SelectorKind::Hankel);
            assert_eq!(p.selector.kind(), MatrixKind::Hankel);
            assert_eq!(p.recompose(), b, "{m}x{n}");
        }
    }
}
