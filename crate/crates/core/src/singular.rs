//! Dominant left singular vectors, dense or through matrix-vector products.

use nalgebra::SymmetricEigen;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{is_symmetric, symmetrize, Mat};
use crate::system::LowRankFactorization;

/// A linear map known only through products with blocks of vectors.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `Op · x`.
    fn apply(&self, x: &Mat) -> Mat;
    /// `Opᵀ · x`.
    fn apply_transpose(&self, x: &Mat) -> Mat;
}

impl LinearOperator for Mat {
    fn nrows(&self) -> usize {
        self.nrows()
    }
    fn ncols(&self) -> usize {
        self.ncols()
    }
    fn apply(&self, x: &Mat) -> Mat {
        self * x
    }
    fn apply_transpose(&self, x: &Mat) -> Mat {
        self.tr_mul(x)
    }
}

impl LinearOperator for LowRankFactorization {
    fn nrows(&self) -> usize {
        self.dim()
    }
    fn ncols(&self) -> usize {
        self.dim()
    }
    fn apply(&self, x: &Mat) -> Mat {
        LowRankFactorization::apply(self, x)
    }
    fn apply_transpose(&self, x: &Mat) -> Mat {
        LowRankFactorization::apply(self, x)
    }
}

const RANK_TOL: f64 = 1e-12;

/// Leading `count` left singular vectors of a dense matrix.
pub fn dominant_left_singular_vectors(r: &Mat, count: usize) -> Result<Mat> {
    let n = r.nrows();
    if count == 0 {
        return Ok(Mat::zeros(n, 0));
    }
    if r.is_square() && is_symmetric(r, 1e-13) {
        let eig = SymmetricEigen::new(symmetrize(r));
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| {
            eig.eigenvalues[b]
                .abs()
                .total_cmp(&eig.eigenvalues[a].abs())
        });
        let smax = idx.first().map_or(0.0, |&i| eig.eigenvalues[i].abs());
        let rank = idx
            .iter()
            .filter(|&&i| smax > 0.0 && eig.eigenvalues[i].abs() > RANK_TOL * smax)
            .count();
        if count > rank {
            return Err(Error::RankDeficient {
                requested: count,
                rank,
            });
        }
        return Ok(Mat::from_fn(n, count, |i, j| eig.eigenvectors[(i, idx[j])]));
    }
    let svd = crate::linalg::svd_thin(r);
    let s = &svd.s;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let rank = s
        .iter()
        .filter(|&&x| smax > 0.0 && x > RANK_TOL * smax)
        .count();
    if count > rank {
        return Err(Error::RankDeficient {
            requested: count,
            rank,
        });
    }
    Ok(svd.u.columns(0, count).into_owned())
}

/// Leading `count` left singular vectors by block subspace iteration,
/// stopped when every requested singular triplet has residual
/// `‖Op q − σ u‖ ≤ tol·σ₁`.
pub fn dominant_left_singular_vectors_iterative(
    op: &dyn LinearOperator,
    count: usize,
    tol: f64,
    seed: u64,
) -> Result<Mat> {
    let n = op.nrows();
    if count == 0 {
        return Ok(Mat::zeros(n, 0));
    }
    let p = (count + 4).min(n).min(op.ncols());
    if count > p {
        return Err(Error::RankDeficient {
            requested: count,
            rank: p,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = Mat::from_fn(n, p, |_, _| StandardNormal.sample(&mut rng));
    u = u.qr().q();
    for _ in 0..2000 {
        let g = op.apply_transpose(&u); // ncols × p, equals (Uᵀ Op)ᵀ
        let svd = crate::linalg::svd_thin(&g.transpose());
        let s = svd.s.clone();
        let smax = s.iter().cloned().fold(0.0, f64::max);
        if smax == 0.0 {
            return Err(Error::RankDeficient {
                requested: count,
                rank: 0,
            });
        }
        let pmat = svd.u;
        let qt = svd.vt;
        let left = &u * &pmat;
        let right = qt.rows(0, count).transpose();
        let img = op.apply(&right);
        let mut worst: f64 = 0.0;
        for j in 0..count {
            let r = img.column(j) - left.column(j) * s[j];
            worst = worst.max(r.norm());
        }
        if worst <= tol * smax {
            if s[count - 1] <= RANK_TOL * smax {
                let rank = s.iter().filter(|&&x| x > RANK_TOL * smax).count();
                return Err(Error::RankDeficient {
                    requested: count,
                    rank,
                });
            }
            return Ok(left.columns(0, count).into_owned());
        }
        let w = op.apply(&g);
        u = w.qr().q();
    }
    Err(Error::NotConverged(
        "subspace iteration for singular vectors".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::subspace_distance;

    #[test]
    fn unit_rank_one() {
        let mut r = Mat::zeros(4, 4);
        r[(0, 0)] = 1.0;
        let u = dominant_left_singular_vectors(&r, 1).unwrap();
        assert!((u[(0, 0)].abs() - 1.0).abs() < 1e-14);
        assert!(matches!(
            dominant_left_singular_vectors(&r, 2),
            Err(Error::RankDeficient { requested: 2, rank: 1 })
        ));
    }

    #[test]
    fn iterative_agrees_with_dense() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = crate::instances::gaussian(20, 3, &mut rng);
        let b = crate::instances::gaussian(3, 15, &mut rng);
        let r = &a * &b;
        let dense = dominant_left_singular_vectors(&r, 3).unwrap();
        let it = dominant_left_singular_vectors_iterative(&r, 3, 1e-8, 7).unwrap();
        assert!(subspace_distance(&dense, &it) < 1e-6);
    }
}
