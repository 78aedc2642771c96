//! Solvers for the generalized Lyapunov equation
//!
//! ```text
//! A X + X Aᵀ + Σᵢ Nᵢ X Nᵢᵀ + B Bᵀ = 0
//! ```
//!
//! arising from bilinear control systems. The crate provides a dense
//! reference solver, the greedy rank-one alternating linear scheme, the
//! bilinear iterative rational Krylov algorithm, the fixed-point iteration,
//! and a residual-driven rational Krylov Galerkin solver, together with
//! generators for three PDE benchmark systems.

pub mod als;
pub mod benchmarks;
pub mod birka;
pub mod direct;
pub mod fixed_point;
pub mod galerkin;
pub mod instances;
pub mod io;
pub mod error;
pub mod linalg;
pub mod lyapunov;
pub mod operators;
pub mod report;
pub mod rk;
pub mod singular;
pub mod system;

pub use direct::{check_contraction, direct_solve, direct_solve_with, h2_norm_squared, DirectOptions};
pub use error::{Error, Result};
pub use linalg::Mat;
pub use lyapunov::{lyap_solve, LyapunovSolver};
pub use operators::{apply_lyap, apply_m, apply_pi, m_inner, relative_residual, residual};
pub use singular::{dominant_left_singular_vectors, dominant_left_singular_vectors_iterative, LinearOperator};
pub use system::{BilinearSystem, DenseSymMatrix, LowRankFactorization, Tolerances};
pub use als::{als_greedy, als_rank1, AlsConfig, AlsMode, GreedyOptions};
pub use benchmarks::BenchmarkSpec;
pub use birka::{birka, BirkaConfig};
pub use fixed_point::{fixed_point_solve, FixedPointConfig, FixedPointMode};
pub use galerkin::{GalerkinSolution, SubspaceBasis};
pub use report::{IterationRecord, SolveReport, SolveStatus};
pub use rk::{rk_solve, variant, ShiftRule, ShiftStrategy};
