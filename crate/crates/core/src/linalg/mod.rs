//! Numerical kernels shared by the gauge solvers and the dynamics modules.

pub mod chebyshev;
pub mod eigen;
pub mod krylov;
pub mod normal;
pub mod tridiag;

pub use chebyshev::expm_apply;
pub use eigen::{eigh, eigh_real, eigvalsh, log_abs_det};
pub use krylov::{dot, krylov_expm, lanczos_ground, HermitianOperator, KrylovOptions, LanczosGround, norm};
pub use normal::{solve_spd, NormalSolution};
pub use tridiag::{solve_tridiagonal, TridiagHermitian};
