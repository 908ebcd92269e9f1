//! Dense small-matrix numerics.

mod charpoly;
mod eigen;
mod hurwitz;
mod linsolve;
mod markov;
mod matrix;
mod poly;
mod roots;

pub use charpoly::{char_poly, char_poly_faddeev_leverrier, hessenberg};
pub use eigen::{eig_residual, eigenvalues, eigvec_for_eigenvalue};
pub use hurwitz::{
    hurwitz_determinants, hurwitz_determinants_of, hurwitz_determinants_with_scales,
    hurwitz_matrix, hurwitz_matrix_of, is_hurwitz,
};
pub use linsolve::{complex_residual, solve_complex, solve_real};
pub use markov::{check_row_stochastic, is_irreducible, stationary_distribution};
pub use matrix::{cnorm2, norm2, ComplexMatrix, RealMatrix};
pub use poly::RealPolynomial;
pub use roots::{cluster, poly_roots, RootCluster, RootSet};
