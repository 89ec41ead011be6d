//! Toeplitz operators and operator words as truncated matrices, restriction
//! operators and their adjoints, Berezin transforms, and the classical
//! functions of the unit disc.

pub mod berezin;
pub mod classical;
pub mod matrix;
pub mod restriction;
pub mod symbol;

pub use berezin::{berezin_of_operator, berezin_of_radial_symbol, berezin_of_symbol, BerezinField};
pub use classical::{
    green, green_berezin_closed_form, mobius, poisson_kernel, poisson_kernel_real_part, poisson_square_mean,
    poisson_square_mean_closed_form, poisson_square_mean_with,
};
pub use matrix::{
    radial_eigenvalue, toeplitz_matrix, toeplitz_quadrature, toeplitz_radial, word_matrix, OperatorMatrix,
    DEFAULT_TRUNCATION, TRUNCATION_SLACK,
};
pub use restriction::{
    compressed_operator, expanded_operator, restriction_adjoint_apply, restriction_apply, restriction_matrix,
    RestrictedFunction,
};
pub use symbol::{OperatorWord, SymbolExpr};
