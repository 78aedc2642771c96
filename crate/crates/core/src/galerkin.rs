//! Orthonormal bases, projection, projected solves and Galerkin residuals.

use nalgebra::SymmetricEigen;

use crate::direct::{direct_solve_with, DirectOptions};
use crate::error::{dim_err, Result};
use crate::linalg::{block_diag, hcat, symmetrize, Mat};
use crate::operators::residual;
use crate::system::{BilinearSystem, LowRankFactorization, Tolerances};

/// Orthonormal basis `V` (n × k).
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    v: Mat,
    drop_tol: f64,
}

/// Result of [`extend_orthonormal`].
#[derive(Debug, Clone)]
pub struct Extension {
    pub basis: SubspaceBasis,
    pub kept: usize,
}

impl SubspaceBasis {
    pub fn empty(n: usize) -> Self {
        Self {
            v: Mat::zeros(n, 0),
            drop_tol: Tolerances::default().drop,
        }
    }

    pub fn with_drop_tol(mut self, drop_tol: f64) -> Self {
        self.drop_tol = drop_tol;
        self
    }

    /// Orthonormal basis of the span of `m` (dependent columns dropped).
    pub fn from_columns(m: &Mat) -> Self {
        extend_orthonormal(&Self::empty(m.nrows()), m).basis
    }

    pub fn v(&self) -> &Mat {
        &self.v
    }
    pub fn n(&self) -> usize {
        self.v.nrows()
    }
    pub fn k(&self) -> usize {
        self.v.ncols()
    }
    pub fn drop_tol(&self) -> f64 {
        self.drop_tol
    }

    /// `‖VᵀV − I‖_F`.
    pub fn orthonormality_defect(&self) -> f64 {
        (self.v.tr_mul(&self.v) - Mat::identity(self.k(), self.k())).norm()
    }
}

/// Append the candidate columns after two passes of Gram–Schmidt; a column
/// whose remaining norm is at most `drop_tol` times its original norm is
/// discarded.
pub fn extend_orthonormal(basis: &SubspaceBasis, candidates: &Mat) -> Extension {
    let n = basis.n();
    assert_eq!(candidates.nrows(), n, "candidate length must match basis");
    let mut cols: Vec<nalgebra::DVector<f64>> =
        basis.v.column_iter().map(|c| c.into_owned()).collect();
    let mut kept = 0;
    for cand in candidates.column_iter() {
        let mut c = cand.into_owned();
        let norm0 = c.norm();
        if norm0 == 0.0 || !norm0.is_finite() {
            continue;
        }
        for _ in 0..2 {
            for q in &cols {
                let h = q.dot(&c);
                c.axpy(-h, q, 1.0);
            }
        }
        let nrm = c.norm();
        if nrm <= basis.drop_tol * norm0 || cols.len() >= n {
            continue;
        }
        cols.push(c / nrm);
        kept += 1;
    }
    let v = if cols.is_empty() {
        Mat::zeros(n, 0)
    } else {
        Mat::from_columns(&cols)
    };
    Extension {
        basis: SubspaceBasis {
            v,
            drop_tol: basis.drop_tol,
        },
        kept,
    }
}

/// `(VᵀAV, VᵀNᵢV, VᵀB)` together with the basis.
#[derive(Debug, Clone)]
pub struct ProjectedSystem {
    pub a: Mat,
    pub n: Vec<Mat>,
    pub b: Mat,
    pub symmetric: bool,
    pub basis: SubspaceBasis,
}

impl ProjectedSystem {
    pub fn k(&self) -> usize {
        self.a.nrows()
    }

    pub fn to_system(&self) -> Result<BilinearSystem> {
        if self.symmetric {
            BilinearSystem::new_symmetric(self.a.clone(), self.n.clone(), self.b.clone())
        } else {
            BilinearSystem::new(self.a.clone(), self.n.clone(), self.b.clone())
        }
    }
}

pub fn project(sys: &BilinearSystem, basis: &SubspaceBasis) -> Result<ProjectedSystem> {
    if basis.n() != sys.dim() {
        return dim_err(format!("basis has {} rows, system has n = {}", basis.n(), sys.dim()));
    }
    let v = basis.v();
    let fix = |m: Mat| if sys.is_symmetric() { symmetrize(&m) } else { m };
    Ok(ProjectedSystem {
        a: fix(v.tr_mul(&(sys.a() * v))),
        n: sys.n_list().iter().map(|ni| fix(v.tr_mul(&(ni * v)))).collect(),
        b: v.tr_mul(sys.b()),
        symmetric: sys.is_symmetric(),
        basis: basis.clone(),
    })
}

/// `Y` and the basis it lives in; the approximation is `X̂ = V Y Vᵀ`.
#[derive(Debug, Clone)]
pub struct GalerkinSolution {
    pub basis: SubspaceBasis,
    pub y: Mat,
}

impl GalerkinSolution {
    pub fn approximation(&self) -> Mat {
        let v = self.basis.v();
        if v.ncols() == 0 {
            return Mat::zeros(v.nrows(), v.nrows());
        }
        symmetrize(&(v * &self.y * v.transpose()))
    }

    /// `X̂` as `V Y Vᵀ` without forming it.
    pub fn factored(&self) -> LowRankFactorization {
        LowRankFactorization {
            z: self.basis.v().clone(),
            d: self.y.clone(),
        }
    }
}

/// Solve the projected equation with the dense reference solver.
pub fn solve_projected(proj: &ProjectedSystem) -> Result<GalerkinSolution> {
    let k = proj.k();
    if k == 0 {
        return Ok(GalerkinSolution {
            basis: proj.basis.clone(),
            y: Mat::zeros(0, 0),
        });
    }
    let sys = proj.to_system()?;
    let opts = DirectOptions {
        cap: usize::MAX,
        ..Default::default()
    };
    let y = direct_solve_with(&sys, &opts)?;
    Ok(GalerkinSolution {
        basis: proj.basis.clone(),
        y,
    })
}

/// Galerkin residual `R = L(X̂) + Π(X̂) + BBᵀ` for `X̂ = VYVᵀ`.
#[derive(Debug, Clone)]
pub struct GalerkinResidual {
    /// Dense residual (only when `n` is at most the dense threshold).
    pub dense: Option<Mat>,
    /// `Z D Zᵀ` with `Z = [AV, V, N₁V, …, N_mV, B]`.
    pub factored: LowRankFactorization,
    /// `‖R‖_F`.
    pub norm: f64,
}

/// Dimension up to which residuals are formed densely.
pub const DENSE_RESIDUAL_MAX: usize = 500;

pub fn galerkin_residual(sys: &BilinearSystem, sol: &GalerkinSolution) -> Result<GalerkinResidual> {
    galerkin_residual_with(sys, sol, DENSE_RESIDUAL_MAX)
}

pub fn galerkin_residual_with(
    sys: &BilinearSystem,
    sol: &GalerkinSolution,
    dense_max: usize,
) -> Result<GalerkinResidual> {
    let factored = residual_factorization(sys, sol);
    if sys.dim() <= dense_max {
        let r = residual(sys, &sol.approximation())?;
        let norm = r.norm();
        Ok(GalerkinResidual {
            dense: Some(r),
            factored,
            norm,
        })
    } else {
        let norm = factored.frobenius_norm();
        Ok(GalerkinResidual {
            dense: None,
            factored,
            norm,
        })
    }
}

fn residual_factorization(sys: &BilinearSystem, sol: &GalerkinSolution) -> LowRankFactorization {
    let v = sol.basis.v();
    let y = &sol.y;
    let k = v.ncols();
    let av = sys.a() * v;
    let mut parts: Vec<Mat> = vec![av, v.clone()];
    let mut cores: Vec<Mat> = Vec::new();
    let mut lyap_core = Mat::zeros(2 * k, 2 * k);
    lyap_core.view_mut((0, k), (k, k)).copy_from(y);
    lyap_core.view_mut((k, 0), (k, k)).copy_from(&y.transpose());
    cores.push(lyap_core);
    for ni in sys.n_list() {
        parts.push(ni * v);
        cores.push(y.clone());
    }
    parts.push(sys.b().clone());
    cores.push(Mat::identity(sys.num_inputs(), sys.num_inputs()));
    let refs: Vec<&Mat> = parts.iter().collect();
    let crefs: Vec<&Mat> = cores.iter().collect();
    LowRankFactorization {
        z: hcat(&refs),
        d: symmetrize(&block_diag(&crefs)),
    }
}

/// Frobenius-optimal rank-`k` truncation of a symmetric matrix.
pub fn svd_best_rank(x: &Mat, k: usize) -> LowRankFactorization {
    let n = x.nrows();
    let k = k.min(n);
    if k == 0 {
        return LowRankFactorization::zero(n);
    }
    let eig = SymmetricEigen::new(symmetrize(x));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].abs().total_cmp(&eig.eigenvalues[a].abs()));
    let z = Mat::from_fn(n, k, |i, j| eig.eigenvectors[(i, idx[j])]);
    let d = Mat::from_diagonal(&nalgebra::DVector::from_fn(k, |j, _| eig.eigenvalues[idx[j]]));
    LowRankFactorization { z, d }
}

/// Singular values of a symmetric matrix in non-increasing order.
pub fn singular_values_sym(x: &Mat) -> Vec<f64> {
    let eig = SymmetricEigen::new(symmetrize(x));
    let mut s: Vec<f64> = eig.eigenvalues.iter().map(|l| l.abs()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}
