//! Data model: bilinear systems, factored symmetric matrices, tolerances.

use std::borrow::Cow;

use crate::error::{dim_err, Error, Result};
use crate::linalg::{is_symmetric, max_real_eigenvalue, symmetrize, Mat};

/// Dense symmetric matrices (solutions, residuals) are plain dense matrices.
/// Functions that produce them symmetrize explicitly.
pub type DenseSymMatrix = Mat;

/// Default numerical thresholds, collected in one place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative asymmetry allowed for coefficients of a symmetric system.
    pub symmetry: f64,
    /// Relative asymmetry allowed for computed symmetric matrices.
    pub dense_symmetry: f64,
    /// Relative residual the direct solver must certify.
    pub oracle_residual: f64,
    /// Column rejection threshold in orthogonalization.
    pub drop: f64,
    /// Singular-value residual for the iterative singular-vector path.
    pub singular_vector: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            symmetry: 1e-12,
            dense_symmetry: 1e-10,
            oracle_residual: 1e-10,
            drop: 1e-10,
            singular_vector: 1e-8,
        }
    }
}

/// Coefficients of `AX + XAᵀ + Σ NᵢXNᵢᵀ + BBᵀ = 0` and of the bilinear
/// control system `ẋ = Ax + Σ Nᵢx wᵢ + Bu, y = Cx`.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearSystem {
    a: Mat,
    n: Vec<Mat>,
    b: Mat,
    c: Option<Mat>,
    symmetric: bool,
}

impl BilinearSystem {
    /// General (not necessarily symmetric) system.
    pub fn new(a: Mat, n: Vec<Mat>, b: Mat) -> Result<Self> {
        let dim = a.nrows();
        if !a.is_square() {
            return dim_err(format!("A is {}x{}, expected square", a.nrows(), a.ncols()));
        }
        for (i, ni) in n.iter().enumerate() {
            if ni.shape() != (dim, dim) {
                return dim_err(format!(
                    "N_{} is {}x{}, expected {dim}x{dim}",
                    i + 1,
                    ni.nrows(),
                    ni.ncols()
                ));
            }
        }
        if b.nrows() != dim {
            return dim_err(format!("B has {} rows, expected {dim}", b.nrows()));
        }
        Ok(Self {
            a,
            n,
            b,
            c: None,
            symmetric: false,
        })
    }

    /// System declared symmetric: `A = Aᵀ`, `Nᵢ = Nᵢᵀ`, and `C = Bᵀ`
    /// unless an output matrix is set later.
    pub fn new_symmetric(a: Mat, n: Vec<Mat>, b: Mat) -> Result<Self> {
        let mut s = Self::new(a, n, b)?;
        let tol = Tolerances::default().symmetry;
        if !rel_symmetric(&s.a, tol) {
            return Err(Error::NotSymmetric("A".into()));
        }
        for (i, ni) in s.n.iter().enumerate() {
            if !rel_symmetric(ni, tol) {
                return Err(Error::NotSymmetric(format!("N_{}", i + 1)));
            }
        }
        s.a = symmetrize(&s.a);
        s.n = s.n.iter().map(symmetrize).collect();
        s.symmetric = true;
        Ok(s)
    }

    /// Attach an output matrix `C` (r_c × n).
    pub fn with_output(mut self, c: Mat) -> Result<Self> {
        if c.ncols() != self.dim() {
            return dim_err(format!("C has {} columns, expected {}", c.ncols(), self.dim()));
        }
        self.c = Some(c);
        Ok(self)
    }

    /// Same coefficients with a different right-hand side factor.
    pub fn with_rhs(&self, b: Mat) -> Result<Self> {
        if b.nrows() != self.dim() {
            return dim_err(format!("B has {} rows, expected {}", b.nrows(), self.dim()));
        }
        let mut s = self.clone();
        s.b = b;
        Ok(s)
    }

    /// Same system without the bilinear terms.
    pub fn linear_part(&self) -> Self {
        let mut s = self.clone();
        s.n.clear();
        s
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
    pub fn num_bilinear(&self) -> usize {
        self.n.len()
    }
    pub fn num_inputs(&self) -> usize {
        self.b.ncols()
    }
    pub fn a(&self) -> &Mat {
        &self.a
    }
    pub fn n_list(&self) -> &[Mat] {
        &self.n
    }
    pub fn b(&self) -> &Mat {
        &self.b
    }
    /// Explicit output matrix, if one was set.
    pub fn c_explicit(&self) -> Option<&Mat> {
        self.c.as_ref()
    }
    /// Output matrix; defaults to `Bᵀ`.
    pub fn c(&self) -> Cow<'_, Mat> {
        match &self.c {
            Some(c) => Cow::Borrowed(c),
            None => Cow::Owned(self.b.transpose()),
        }
    }
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// `BBᵀ`.
    pub fn rhs(&self) -> Mat {
        symmetrize(&(&self.b * self.b.transpose()))
    }

    /// Observability counterpart `(Aᵀ, Nᵢᵀ, Cᵀ)` with output `Bᵀ`.
    pub fn dual(&self) -> Self {
        Self {
            a: self.a.transpose(),
            n: self.n.iter().map(|x| x.transpose()).collect(),
            b: self.c().transpose(),
            c: Some(self.b.transpose()),
            symmetric: self.symmetric,
        }
    }

    /// Largest real part of the spectrum of `A`; errors if it is not negative.
    pub fn check_stable(&self) -> Result<f64> {
        let m = max_real_eigenvalue(&self.a);
        if m < 0.0 {
            Ok(m)
        } else {
            Err(Error::Unstable(m))
        }
    }

    /// Scale all `Nᵢ` by `s`.
    pub fn scale_bilinear(&mut self, s: f64) {
        for ni in &mut self.n {
            *ni *= s;
        }
    }
}

fn rel_symmetric(m: &Mat, tol: f64) -> bool {
    let nrm = m.norm();
    (m - m.transpose()).norm() <= tol * nrm || nrm == 0.0
}

/// Symmetric matrix stored as `Z D Zᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankFactorization {
    pub z: Mat,
    pub d: Mat,
}

impl LowRankFactorization {
    pub fn new(z: Mat, d: Mat) -> Result<Self> {
        if d.nrows() != z.ncols() || !d.is_square() {
            return dim_err(format!(
                "D is {}x{} but Z has {} columns",
                d.nrows(),
                d.ncols(),
                z.ncols()
            ));
        }
        if !is_symmetric(&d, 1e-10) {
            return Err(Error::NotSymmetric("core matrix D".into()));
        }
        Ok(Self { z, d })
    }

    /// The zero matrix of order `n`.
    pub fn zero(n: usize) -> Self {
        Self {
            z: Mat::zeros(n, 0),
            d: Mat::zeros(0, 0),
        }
    }

    /// `Z Zᵀ`.
    pub fn from_factor(z: Mat) -> Self {
        let k = z.ncols();
        Self {
            z,
            d: Mat::identity(k, k),
        }
    }

    pub fn dim(&self) -> usize {
        self.z.nrows()
    }

    pub fn inner_dim(&self) -> usize {
        self.z.ncols()
    }

    pub fn to_dense(&self) -> Mat {
        if self.z.ncols() == 0 {
            return Mat::zeros(self.dim(), self.dim());
        }
        symmetrize(&(&self.z * &self.d * self.z.transpose()))
    }

    /// `Z D Zᵀ x`.
    pub fn apply(&self, x: &Mat) -> Mat {
        if self.z.ncols() == 0 {
            return Mat::zeros(self.dim(), x.ncols());
        }
        &self.z * (&self.d * (self.z.transpose() * x))
    }

    /// Frobenius norm from the thin QR of `Z`: `‖R D Rᵀ‖_F`.
    pub fn frobenius_norm(&self) -> f64 {
        if self.z.ncols() == 0 {
            return 0.0;
        }
        if self.z.ncols() >= self.z.nrows() {
            return self.to_dense().norm();
        }
        let r = self.z.clone().qr().r();
        (&r * &self.d * r.transpose()).norm()
    }

    /// Append `Z₂ D₂ Z₂ᵀ`.
    pub fn add(&self, other: &LowRankFactorization) -> Self {
        let z = crate::linalg::hcat(&[&self.z, &other.z]);
        let d = crate::linalg::block_diag(&[&self.d, &other.d]);
        Self { z, d }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_dimensions() {
        let a = Mat::identity(3, 3);
        assert!(BilinearSystem::new(a.clone(), vec![Mat::identity(2, 2)], Mat::zeros(3, 1)).is_err());
        assert!(BilinearSystem::new(a.clone(), vec![], Mat::zeros(2, 1)).is_err());
        assert!(BilinearSystem::new(Mat::zeros(3, 2), vec![], Mat::zeros(3, 1)).is_err());
    }

    #[test]
    fn symmetric_flag_checked() {
        let mut a = -Mat::identity(3, 3);
        a[(0, 1)] = 0.5;
        assert!(matches!(
            BilinearSystem::new_symmetric(a, vec![], Mat::zeros(3, 1)),
            Err(Error::NotSymmetric(_))
        ));
    }

    #[test]
    fn default_output_is_b_transpose() {
        let s = BilinearSystem::new_symmetric(
            -Mat::identity(2, 2),
            vec![],
            Mat::from_row_slice(2, 1, &[1.0, 2.0]),
        )
        .unwrap();
        assert_eq!(*s.c(), Mat::from_row_slice(1, 2, &[1.0, 2.0]));
    }

    #[test]
    fn low_rank_norm_matches_dense() {
        let z = Mat::from_fn(6, 2, |i, j| (i as f64 - 2.0 * j as f64).sin());
        let d = Mat::from_row_slice(2, 2, &[1.0, 0.3, 0.3, -2.0]);
        let f = LowRankFactorization::new(z, d).unwrap();
        assert!((f.frobenius_norm() - f.to_dense().norm()).abs() < 1e-12);
    }
}
