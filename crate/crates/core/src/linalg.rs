//! Rank-revealing helpers: Gram–Schmidt basis extraction and minimum-norm
//! least squares.

use nalgebra::{DMatrix, DVector};

/// Singular values (or Gram–Schmidt residuals) below this fraction of the
/// largest one count as zero.
pub const RANK_CUTOFF: f64 = 1e-8;

/// Orthonormalizes a stream of candidate vectors, keeping those whose
/// residual after projection exceeds `cutoff` times the largest candidate
/// norm seen so far.
pub fn orthonormal_basis<I>(candidates: I, cutoff: f64) -> Vec<Vec<f64>>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut scale = 0.0f64;
    for mut v in candidates {
        let norm0 = dot(&v, &v).sqrt();
        if norm0 == 0.0 {
            continue;
        }
        scale = scale.max(norm0);
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let r = dot(&v, &v).sqrt();
        if r > cutoff * scale {
            v.iter_mut().for_each(|x| *x /= r);
            basis.push(v);
        }
    }
    basis
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Outcome of a least-squares solve.
#[derive(Clone, Debug)]
pub struct LstsqSolution {
    pub x: DVector<f64>,
    pub rank: usize,
    /// `|A x − b| / |b|`, zero for `b = 0`.
    pub rel_residual: f64,
}

/// Relative reconstruction error above which an SVD is rejected.
const SVD_RECON_TOL: f64 = 1e-11;

/// Truncated singular value decomposition `A ≈ U diag(s) Vᵀ` keeping the
/// singular values above a relative cutoff.
///
/// The iterative SVD can return inaccurate singular vectors on exactly
/// rank-deficient matrices, so the factorization is checked against `A`;
/// on failure it is recomputed from the symmetric eigendecomposition of
/// `[[0, A], [Aᵀ, 0]]`, whose eigenpairs are `±σ` with `(u, ±v)/√2`.
#[derive(Clone, Debug)]
pub struct PseudoInverse {
    a: DMatrix<f64>,
    u: DMatrix<f64>,
    s: DVector<f64>,
    v: DMatrix<f64>,
}

impl PseudoInverse {
    pub fn new(a: &DMatrix<f64>, cutoff: f64) -> Self {
        let (m, n) = a.shape();
        let empty = |a: &DMatrix<f64>| PseudoInverse {
            a: a.clone(),
            u: DMatrix::zeros(m, 0),
            s: DVector::zeros(0),
            v: DMatrix::zeros(n, 0),
        };
        if m == 0 || n == 0 {
            return empty(a);
        }
        let anorm = a.norm();
        if anorm == 0.0 {
            return empty(a);
        }
        let svd = a.clone().svd(true, true);
        let (u, vt) = (svd.u.expect("left factor"), svd.v_t.expect("right factor"));
        let recon = &u * DMatrix::from_diagonal(&svd.singular_values) * &vt;
        let (u, s, v) = if (&recon - a).norm() <= SVD_RECON_TOL * anorm {
            (u, svd.singular_values, vt.transpose())
        } else {
            jordan_wielandt(a)
        };
        let smax = s.max();
        let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] > cutoff * smax).collect();
        PseudoInverse {
            a: a.clone(),
            u: u.select_columns(&keep),
            s: s.select_rows(&keep),
            v: v.select_columns(&keep),
        }
    }

    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// Minimum-norm solution of `min |A x − b|`.
    pub fn solve(&self, b: &DVector<f64>) -> LstsqSolution {
        let mut c = self.u.tr_mul(b);
        c.component_div_assign(&self.s);
        let x = &self.v * c;
        let bn = b.norm();
        let r = (&self.a * &x - b).norm();
        let rel_residual = if bn == 0.0 {
            r
        } else {
            r / bn
        };
        LstsqSolution { x, rank: self.rank(), rel_residual }
    }
}

/// Singular triplets with `σ > 0` from the eigendecomposition of the
/// symmetric embedding of `a`.
fn jordan_wielandt(a: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let (m, n) = a.shape();
    let mut b = DMatrix::zeros(m + n, m + n);
    b.view_mut((0, m), (m, n)).copy_from(a);
    b.view_mut((m, 0), (n, m)).copy_from(&a.transpose());
    let eig = b.symmetric_eigen();
    let mut pos: Vec<usize> = (0..m + n).filter(|&i| eig.eigenvalues[i] > 0.0).collect();
    pos.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    pos.truncate(m.min(n));
    let w = eig.eigenvectors.select_columns(&pos);
    let root2 = std::f64::consts::SQRT_2;
    let u = w.rows(0, m) * root2;
    let v = w.rows(m, n) * root2;
    let s = DVector::from_iterator(pos.len(), pos.iter().map(|&i| eig.eigenvalues[i]));
    (u, s, v)
}

/// Minimum-norm solution of `min |A x − b|` with a relative singular value
/// cutoff.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, cutoff: f64) -> LstsqSolution {
    PseudoInverse::new(a, cutoff).solve(b)
}

/// Numerical rank with a relative cutoff.
pub fn rank(a: &DMatrix<f64>, cutoff: f64) -> usize {
    PseudoInverse::new(a, cutoff).rank()
}

/// Builds a matrix whose columns are the given vectors.
pub fn columns_to_matrix(rows: usize, cols: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_schmidt_detects_dependence() {
        let c = vec![vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 0.0], vec![2.0, 1.0, 0.0], vec![0.0, 0.0, 3.0]];
        let b = orthonormal_basis(c, RANK_CUTOFF);
        assert_eq!(b.len(), 3);
        for i in 0..3 {
            for j in 0..3 {
                let d = dot(&b[i], &b[j]);
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn lstsq_minimum_norm() {
        // x + y = 2 has minimum-norm solution (1, 1)
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let b = DVector::from_vec(vec![2.0]);
        let s = lstsq(&a, &b, RANK_CUTOFF);
        assert_eq!(s.rank, 1);
        assert!((s.x[0] - 1.0).abs() < 1e-14 && (s.x[1] - 1.0).abs() < 1e-14);
        assert!(s.rel_residual < 1e-14);
    }

    #[test]
    fn rank_of_outer_product() {
        let a = DMatrix::from_fn(4, 3, |i, j| (i + 1) as f64 * (j + 2) as f64);
        assert_eq!(rank(&a, RANK_CUTOFF), 1);
    }

    #[test]
    fn embedding_fallback_matches_svd() {
        // rank 3 product of random factors
        let l = DMatrix::from_fn(7, 3, |i, j| ((i * 5 + j * 3) % 7) as f64 - 3.0);
        let r = DMatrix::from_fn(3, 9, |i, j| ((i * 2 + j * 7) % 5) as f64 - 1.5);
        let a = &l * &r;
        let (u, s, v) = jordan_wielandt(&a);
        let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] > RANK_CUTOFF * s.max()).collect();
        assert_eq!(keep.len(), 3);
        let recon = u.select_columns(&keep) * DMatrix::from_diagonal(&s.select_rows(&keep)) * v.select_columns(&keep).transpose();
        assert!((recon - &a).norm() < 1e-12 * a.norm());
        let b = DVector::from_fn(7, |i, _| i as f64);
        let x = lstsq(&a, &b, RANK_CUTOFF).x;
        // normal equations hold and x lies in the row space
        assert!((a.tr_mul(&(&a * &x - &b))).norm() < 1e-9 * b.norm() * a.norm());
        let p = PseudoInverse::new(&a, RANK_CUTOFF);
        assert!((&p.v * p.v.tr_mul(&x) - &x).norm() < 1e-12 * x.norm());
    }
}
