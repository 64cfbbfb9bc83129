//! Differential-polynomial engine over field jets and elliptic leaves.

pub mod calculus;
pub mod expr;
pub mod jets;
pub mod poly;
pub mod series;
pub mod symbol;

pub use calculus::{
    d_dz_spectral, exact_divide, freeze_tau, polynomial_reduce, tau_deriv, total_x_derivative, total_x_derivative_n,
    weierstrass_cubic,
};
pub use expr::Expr;
pub use jets::{sample_jets, JetAssignment};
pub use poly::{rat, Monomial, Poly, Rational, SymbolValues};
pub use series::{Series, SeriesJets};
pub use symbol::{parse_symbol, Field, Spectral, Symbol};

/// Convenience constructor for a field jet.
pub fn jet(field: Field, order: u8) -> Poly {
    Poly::var(Symbol::Jet(field, order))
}

pub fn z(k: u16) -> Poly {
    jet(Field::Z(k), 0)
}

pub fn dz(k: u16) -> Poly {
    jet(Field::Z(k), 1)
}
