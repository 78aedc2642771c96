//! Finite-difference bilinear test systems: a 2D heat equation with a
//! bilinear Robin boundary, a 1D Fokker–Planck equation, and a Carleman
//! bilinearized viscous Burgers equation.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{kron, Mat};
use crate::system::BilinearSystem;

/// Which benchmark to build and at what resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BenchmarkSpec {
    /// `nx × nx` grid on the unit square.
    Heat2D { nx: usize },
    /// `n` cells on `(−6, 6)`, diffusion `nu`.
    FokkerPlanck1D { n: usize, nu: f64 },
    /// `n_grid` interior points, viscosity `nu`, control scaling `alpha`.
    BurgersCarleman { n_grid: usize, nu: f64, alpha: f64 },
}

impl BenchmarkSpec {
    pub fn heat2d(nx: usize) -> Self {
        Self::Heat2D { nx }
    }
    pub fn fokker_planck(n: usize) -> Self {
        Self::FokkerPlanck1D { n, nu: 1.0 }
    }
    pub fn burgers(n_grid: usize) -> Self {
        Self::BurgersCarleman {
            n_grid,
            nu: 0.1,
            alpha: 0.25,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        match *self {
            Self::Heat2D { nx } if nx < 3 => bad("heat2d needs nx >= 3"),
            Self::FokkerPlanck1D { n, .. } if n < 10 => bad("fokker-planck needs n >= 10"),
            Self::FokkerPlanck1D { nu, .. } if !(nu > 0.0 && nu.is_finite()) => {
                bad("fokker-planck needs nu > 0")
            }
            Self::BurgersCarleman { n_grid, .. } if n_grid < 5 => bad("burgers needs n_grid >= 5"),
            Self::BurgersCarleman { nu, alpha, .. }
                if !(nu > 0.0 && nu.is_finite() && alpha > 0.0 && alpha.is_finite()) =>
            {
                bad("burgers needs nu > 0 and alpha > 0")
            }
            _ => Ok(()),
        }
    }

    /// State dimension of the generated system, without assembling it.
    pub fn dimension(&self) -> usize {
        match *self {
            Self::Heat2D { nx } => nx * nx,
            Self::FokkerPlanck1D { n, .. } => n - 1,
            Self::BurgersCarleman { n_grid, .. } => n_grid + n_grid * n_grid,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Heat2D { .. } => "heat2d",
            Self::FokkerPlanck1D { .. } => "fokker-planck",
            Self::BurgersCarleman { .. } => "burgers",
        }
    }

    pub fn build(&self) -> Result<BilinearSystem> {
        self.validate()?;
        match *self {
            Self::Heat2D { nx } => heat2d(nx),
            Self::FokkerPlanck1D { n, nu } => fokker_planck_1d(n, nu),
            Self::BurgersCarleman { n_grid, nu, alpha } => burgers_carleman(n_grid, nu, alpha),
        }
    }
}

impl fmt::Display for BenchmarkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Heat2D { nx } => write!(f, "heat2d:nx={nx}"),
            Self::FokkerPlanck1D { n, nu } => write!(f, "fokker-planck:n={n},nu={nu}"),
            Self::BurgersCarleman { n_grid, nu, alpha } => {
                write!(f, "burgers:n={n_grid},nu={nu},alpha={alpha}")
            }
        }
    }
}

/// Parses `NAME[:key=value,...]`, e.g. `heat2d:nx=8`,
/// `fokker-planck:n=100,nu=1`, `burgers:n=10,nu=0.1,alpha=0.25`.
impl FromStr for BenchmarkSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: String| Error::InvalidArgument(m);
        let s = s.trim();
        let (name, params) = match s.split_once(':') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (s, ""),
        };
        let mut kv: Vec<(&str, &str)> = Vec::new();
        for part in params.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got '{part}'")))?;
            let k = k.trim();
            if kv.iter().any(|(q, _)| *q == k) {
                return Err(bad(format!("duplicate parameter '{k}'")));
            }
            kv.push((k, v.trim()));
        }
        let take_usize = |key: &str, default: Option<usize>| -> Result<usize> {
            match kv.iter().find(|(k, _)| *k == key) {
                Some((_, v)) => v
                    .parse()
                    .map_err(|_| bad(format!("parameter '{key}' must be a non-negative integer"))),
                None => default.ok_or_else(|| bad(format!("missing parameter '{key}'"))),
            }
        };
        let take_f64 = |key: &str, default: f64| -> Result<f64> {
            match kv.iter().find(|(k, _)| *k == key) {
                Some((_, v)) => v
                    .parse::<f64>()
                    .map_err(|_| bad(format!("parameter '{key}' must be a number"))),
                None => Ok(default),
            }
        };
        let allow = |keys: &[&str]| -> Result<()> {
            for (k, _) in &kv {
                if !keys.contains(k) {
                    return Err(bad(format!("unknown parameter '{k}' for '{name}'")));
                }
            }
            Ok(())
        };
        let spec = match name.to_ascii_lowercase().as_str() {
            "heat2d" | "heat" => {
                allow(&["nx"])?;
                Self::Heat2D {
                    nx: take_usize("nx", None)?,
                }
            }
            "fokker-planck" | "fokker_planck" | "fp" => {
                allow(&["n", "nu"])?;
                Self::FokkerPlanck1D {
                    n: take_usize("n", None)?,
                    nu: take_f64("nu", 1.0)?,
                }
            }
            "burgers" | "burgers_carleman" => {
                allow(&["n", "nu", "alpha"])?;
                Self::BurgersCarleman {
                    n_grid: take_usize("n", None)?,
                    nu: take_f64("nu", 0.1)?,
                    alpha: take_f64("alpha", 0.25)?,
                }
            }
            other => return Err(bad(format!("unknown benchmark '{other}'"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Heat equation on `(0,1)²` with homogeneous Dirichlet conditions on three
/// sides and `−∂ₓw = ½(w − 1)u` on `x = 0`.
///
/// The x-direction uses nodes `x = ih`, `h = 1/nx`, `i = 0..nx` (node `nx`
/// is Dirichlet), with a ghost node at `x = −h`; the y-direction uses
/// `nx` interior nodes with spacing `1/(nx+1)`. Halving the boundary rows'
/// weight makes the stencil symmetric; the resulting similarity transform
/// is applied so that `A = Aᵀ`.
pub fn heat2d(nx: usize) -> Result<BilinearSystem> {
    if nx < 3 {
        return Err(Error::InvalidArgument("heat2d needs nx >= 3".into()));
    }
    let h = 1.0 / nx as f64;
    let hy = 1.0 / (nx + 1) as f64;
    let n = nx * nx;
    let idx = |i: usize, j: usize| j * nx + i;
    let mut a = Mat::zeros(n, n);
    let mut nmat = Mat::zeros(n, n);
    let mut b = Mat::zeros(n, 1);
    let cx = 1.0 / (h * h);
    let cy = 1.0 / (hy * hy);
    let boundary_link = std::f64::consts::SQRT_2 * cx;
    for j in 0..nx {
        for i in 0..nx {
            let r = idx(i, j);
            a[(r, r)] = -2.0 * cx - 2.0 * cy;
            if i == 0 {
                a[(r, idx(1, j))] = boundary_link;
                nmat[(r, r)] = 1.0 / h;
                // the boundary row is scaled by 1/√2 in the symmetric form
                b[(r, 0)] = -std::f64::consts::FRAC_1_SQRT_2 / h;
            } else {
                a[(r, idx(i - 1, j))] = if i == 1 { boundary_link } else { cx };
                if i + 1 < nx {
                    a[(r, idx(i + 1, j))] = cx;
                }
            }
            if j > 0 {
                a[(r, idx(i, j - 1))] = cy;
            }
            if j + 1 < nx {
                a[(r, idx(i, j + 1))] = cy;
            }
        }
    }
    BilinearSystem::new_symmetric(a, vec![nmat], b)
}

/// Raw Fokker–Planck operators before decoupling.
#[derive(Debug, Clone)]
pub struct FokkerPlanckRaw {
    pub a: Mat,
    pub n: Mat,
    /// Stationary distribution (`A ρ = 0`, entries summing to one).
    pub rho: DVector<f64>,
    /// Cell centres.
    pub x: DVector<f64>,
}

/// Ground potential derivative `W'(x)` for
/// `W(x) = (((x²/2 − 15)x² + 199)x² + 28x + 50)/200`.
pub fn fp_potential_derivative(x: f64) -> f64 {
    ((3.0 * x * x - 60.0) * x * x + 398.0) * x / 200.0 + 28.0 / 200.0
}

fn upwind_flux(n: usize, h: f64, vel: impl Fn(usize) -> f64) -> Mat {
    let mut m = Mat::zeros(n, n);
    for f in 1..n {
        let c = vel(f);
        let cp = c.max(0.0) / h;
        let cm = c.min(0.0) / h;
        m[(f - 1, f - 1)] -= cp;
        m[(f - 1, f)] -= cm;
        m[(f, f - 1)] += cp;
        m[(f, f)] += cm;
    }
    m
}

/// Flux-form upwind discretization of
/// `ρₜ = ν ρₓₓ + ∂ₓ((W'(x) + α'(x)u) ρ)` on `(−6, 6)` with no-flux
/// boundaries and control shape `α(x) = x/6`. Every column sums to zero.
pub fn fokker_planck_raw(n: usize, nu: f64) -> Result<FokkerPlanckRaw> {
    if n < 10 || !(nu > 0.0) {
        return Err(Error::InvalidArgument("fokker-planck needs n >= 10 and nu > 0".into()));
    }
    let h = 12.0 / n as f64;
    let face = |f: usize| -6.0 + h * f as f64;
    let mut a = upwind_flux(n, h, |f| -fp_potential_derivative(face(f)));
    let d = nu / (h * h);
    for f in 1..n {
        a[(f - 1, f - 1)] -= d;
        a[(f - 1, f)] += d;
        a[(f, f)] -= d;
        a[(f, f - 1)] += d;
    }
    let nmat = upwind_flux(n, h, |_| -1.0 / 6.0);
    let rho = stationary_distribution(&a)?;
    let x = DVector::from_fn(n, |i, _| -6.0 + h * (i as f64 + 0.5));
    Ok(FokkerPlanckRaw { a, n: nmat, rho, x })
}

/// Null vector of a column-conservative generator, scaled to sum to one.
fn stationary_distribution(a: &Mat) -> Result<DVector<f64>> {
    let n = a.nrows();
    // Replace the last equation by the normalization Σρ = 1.
    let mut m = a.clone();
    for j in 0..n {
        m[(n - 1, j)] = 1.0;
    }
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let rho = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("zero eigenvalue of the Fokker-Planck operator is not simple".into()))?;
    Ok(rho)
}

/// Orthonormal basis of the complement of the constant vector, taken from
/// the Householder reflector that maps `1/√n` to `e₁`.
fn complement_of_ones(n: usize) -> Mat {
    let mut u = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    u[0] -= 1.0;
    let un = u.norm();
    u /= un;
    let hmat = Mat::identity(n, n) - &u * u.transpose() * 2.0;
    hmat.columns(1, n - 1).into_owned()
}

/// Fokker–Planck system decoupled from its stationary mode: with `Q` an
/// orthonormal basis of `1^⊥` (an invariant subspace of `A` and `N`),
/// returns `(QᵀAQ, QᵀNQ, QᵀNρ)` of dimension `n − 1`.
pub fn fokker_planck_1d(n: usize, nu: f64) -> Result<BilinearSystem> {
    let raw = fokker_planck_raw(n, nu)?;
    let q = complement_of_ones(n);
    let a = q.tr_mul(&(&raw.a * &q));
    let nr = q.tr_mul(&(&raw.n * &q));
    let b = q.tr_mul(&(&raw.n * &raw.rho));
    BilinearSystem::new(a, vec![nr], Mat::from_column_slice(n - 1, 1, b.as_slice()))
}

/// Second-order Carleman bilinearization of viscous Burgers
/// `wₜ = ν wₓₓ − w wₓ` on `(0,1)` with `n_grid` interior points, Dirichlet
/// control `u(t)` at `x = 0` and zero at `x = 1`. The state is `[w; w⊗w]`
/// and `N`, `B` are scaled by `alpha`.
pub fn burgers_carleman(n_grid: usize, nu: f64, alpha: f64) -> Result<BilinearSystem> {
    if n_grid < 5 || !(nu > 0.0) || !(alpha > 0.0) {
        return Err(Error::InvalidArgument(
            "burgers needs n_grid >= 5, nu > 0 and alpha > 0".into(),
        ));
    }
    let ng = n_grid;
    let h = 1.0 / (ng + 1) as f64;
    let mut a1 = Mat::zeros(ng, ng);
    let mut a2 = Mat::zeros(ng, ng * ng);
    let mut n1 = Mat::zeros(ng, ng);
    let mut bv = Mat::zeros(ng, 1);
    for i in 0..ng {
        a1[(i, i)] = -2.0 * nu / (h * h);
        if i > 0 {
            a1[(i, i - 1)] = nu / (h * h);
            a2[(i, i * ng + i - 1)] = 1.0 / (2.0 * h);
        }
        if i + 1 < ng {
            a1[(i, i + 1)] = nu / (h * h);
            a2[(i, i * ng + i + 1)] = -1.0 / (2.0 * h);
        }
    }
    bv[(0, 0)] = nu / (h * h);
    n1[(0, 0)] = 1.0 / (2.0 * h);
    let eye = Mat::identity(ng, ng);
    let n = ng + ng * ng;
    let mut a = Mat::zeros(n, n);
    a.view_mut((0, 0), (ng, ng)).copy_from(&a1);
    a.view_mut((0, ng), (ng, ng * ng)).copy_from(&a2);
    a.view_mut((ng, ng), (ng * ng, ng * ng))
        .copy_from(&(kron(&a1, &eye) + kron(&eye, &a1)));
    let mut nmat = Mat::zeros(n, n);
    nmat.view_mut((0, 0), (ng, ng)).copy_from(&n1);
    nmat.view_mut((ng, 0), (ng * ng, ng))
        .copy_from(&(kron(&bv, &eye) + kron(&eye, &bv)));
    nmat.view_mut((ng, ng), (ng * ng, ng * ng))
        .copy_from(&(kron(&n1, &eye) + kron(&eye, &n1)));
    let mut b = Mat::zeros(n, 1);
    b.view_mut((0, 0), (ng, 1)).copy_from(&bv);
    BilinearSystem::new(a, vec![nmat * alpha], b * alpha)
}
