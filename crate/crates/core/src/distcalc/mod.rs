//! Formal calculus of delta-distributions for local brackets.

pub mod canon;
pub mod table;

pub use canon::{canonicalize_term, CanonKey, Coefficient, DistPoly, Edge, NumericDist, Point, RawTerm};
pub use table::{
    antisymmetry_residual, antisymmetry_symbolic, bracket_exprs, change_coordinates, generator_partials,
    jacobi_residual, jacobi_symbolic, leibniz_bracket, max_relative, BracketTable, Gen, GenExpr, Residual,
};
