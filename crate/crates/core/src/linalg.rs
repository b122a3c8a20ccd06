//! Full singular value decomposition in ascending order.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::prelude::*;

/// `m = U Σ Vᵀ` with the left factor completed to a square orthogonal
/// matrix.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LeftSvd {
    /// One value per row of `m`, ascending, zero beyond the rank bound.
    pub singular_values: Vec<f64>,
    /// Column `i` belongs to `singular_values[i]`.
    pub left: DMatrix<f64>,
}

pub(crate) fn left_svd(m: &DMatrix<f64>) -> Result<LeftSvd> {
    let (rows, cols) = m.shape();
    if rows == 0 {
        return Ok(LeftSvd {
            singular_values: Vec::new(),
            left: DMatrix::zeros(0, 0),
        });
    }
    if cols == 0 {
        return Ok(LeftSvd {
            singular_values: vec![0.0; rows],
            left: DMatrix::identity(rows, rows),
        });
    }
    let f = faer::Mat::<f64>::from_fn(rows, cols, |i, j| m[(i, j)]);
    let svd = f
        .svd()
        .map_err(|e| Error::NumericFailure(format!("SVD failed: {e:?}")))?;
    let (u, s) = (svd.U(), svd.S().column_vector());
    let mut sigma = vec![0.0; rows];
    for (i, v) in sigma.iter_mut().enumerate().take(s.nrows()) {
        *v = s[i].max(0.0);
    }
    let mut order: Vec<usize> = (0..rows).collect();
    order.sort_by(|&a, &b| sigma[a].total_cmp(&sigma[b]));
    Ok(LeftSvd {
        singular_values: order.iter().map(|&i| sigma[i]).collect(),
        left: DMatrix::from_fn(rows, rows, |r, c| u[(r, order[c])]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{self, stream, Domain};

    fn random(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut r = stream(seed, Domain::Test, rows as u64, cols as u64);
        DMatrix::from_fn(rows, cols, |_, _| 2.0 * rng::unit_f64(&mut r) - 1.0)
    }

    #[test]
    fn reconstructs_wide_and_tall() {
        for (rows, cols) in [(6, 9), (9, 6), (5, 5)] {
            let m = random(rows, cols, 1);
            let d = left_svd(&m).unwrap();
            assert_eq!(d.singular_values.len(), rows);
            assert!(d.singular_values.windows(2).all(|w| w[0] <= w[1]));
            assert!((d.left.transpose() * &d.left - DMatrix::identity(rows, rows)).amax() < 1e-12);
            // ‖uᵢᵀ m‖ = σᵢ for every left direction
            for (i, s) in d.singular_values.iter().enumerate() {
                assert!(((d.left.column(i).transpose() * &m).norm() - s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rank_deficient_values_match_gram_spectrum() {
        // rows centered blockwise, as in the learning pipeline
        let mut m = random(27, 12, 2);
        for k in 0..3 {
            let mut block = m.columns_mut(4 * k, 4);
            for mut row in block.row_iter_mut() {
                let mean = row.sum() / 4.0;
                row.add_scalar_mut(-mean);
            }
        }
        let d = left_svd(&m).unwrap();
        let mut gram: Vec<f64> = (m.transpose() * &m).symmetric_eigenvalues().iter().map(|v| v.max(0.0).sqrt()).collect();
        gram.sort_by(f64::total_cmp);
        let top = &d.singular_values[27 - 12..];
        for (a, b) in top.iter().zip(&gram) {
            if *b > 1e-6 {
                assert!((a - b).abs() < 1e-10 * b, "{a} vs {b}");
            }
        }
        assert_eq!(d.singular_values.iter().filter(|&&s| s < 1e-12).count(), 27 - 9);
    }

    #[test]
    fn degenerate_shapes() {
        assert!(left_svd(&DMatrix::zeros(0, 3)).unwrap().singular_values.is_empty());
        let d = left_svd(&DMatrix::zeros(3, 0)).unwrap();
        assert_eq!(d.singular_values, vec![0.0; 3]);
    }
}
