//! Random test problems with a prescribed contraction factor.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::direct::check_contraction;
use crate::error::{Error, Result};
use crate::linalg::{max_real_eigenvalue, symmetrize, Mat};
use crate::system::BilinearSystem;

pub fn gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Mat {
    Mat::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Random `n × k` matrix with orthonormal columns.
pub fn random_orthonormal<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Mat {
    let g = gaussian(n, k.min(n), rng);
    g.qr().q()
}

/// Random symmetric positive semidefinite matrix of the given rank.
pub fn random_psd<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> Mat {
    let g = gaussian(n, rank, rng);
    symmetrize(&(&g * g.transpose()))
}

/// Scale the `Nᵢ` so that `ρ(L⁻¹Π)` equals `target`.
pub fn scale_to_contraction(sys: &mut BilinearSystem, target: f64) -> Result<()> {
    if sys.num_bilinear() == 0 {
        return Ok(());
    }
    let rho = check_contraction(sys)?;
    if rho <= 0.0 {
        return Err(Error::InvalidArgument(
            "bilinear part has zero contraction factor".into(),
        ));
    }
    sys.scale_bilinear((target / rho).sqrt());
    Ok(())
}

/// Symmetric system: `A = −Q diag(d) Qᵀ` with `d ∈ [1, 10]`, random symmetric
/// `Nᵢ` scaled to contraction `target`, Gaussian `B` with `r` columns.
pub fn random_symmetric_instance<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    r: usize,
    target: f64,
    rng: &mut R,
) -> Result<BilinearSystem> {
    let q = random_orthonormal(n, n, rng);
    let dist = Uniform::new(1.0, 10.0).expect("valid range");
    let d = nalgebra::DVector::from_fn(n, |_, _| dist.sample(rng));
    let a = -(&q * Mat::from_diagonal(&d) * q.transpose());
    let n_list: Vec<Mat> = (0..m).map(|_| symmetrize(&gaussian(n, n, rng))).collect();
    let b = gaussian(n, r, rng);
    let mut sys = BilinearSystem::new_symmetric(symmetrize(&a), n_list, b)?;
    scale_to_contraction(&mut sys, target)?;
    Ok(sys)
}

/// Non-symmetric stable system: `A = G − (α(G) + δ)I` with `δ ∈ [0.5, 2]`.
pub fn random_instance<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    r: usize,
    target: f64,
    rng: &mut R,
) -> Result<BilinearSystem> {
    let g = gaussian(n, n, rng) / (n as f64).sqrt();
    let alpha = max_real_eigenvalue(&g);
    let delta = Uniform::new(0.5, 2.0).expect("valid range").sample(rng);
    let a = g - Mat::identity(n, n) * (alpha + delta);
    let n_list: Vec<Mat> = (0..m).map(|_| gaussian(n, n, rng)).collect();
    let b = gaussian(n, r, rng);
    let mut sys = BilinearSystem::new(a, n_list, b)?;
    scale_to_contraction(&mut sys, target)?;
    Ok(sys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn contraction_hits_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = random_symmetric_instance(6, 2, 1, 0.5, &mut rng).unwrap();
        assert!((check_contraction(&s).unwrap() - 0.5).abs() < 1e-10);
        let t = random_instance(20, 1, 2, 0.3, &mut rng).unwrap();
        assert!((check_contraction(&t).unwrap() - 0.3).abs() < 1e-8);
    }
}
