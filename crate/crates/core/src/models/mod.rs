//! Concrete brackets: extraction, closed forms, descents and realizations.

pub mod appendix;
pub mod cp2;
pub mod frac;
pub mod prop1;
pub mod prop2;
pub mod rmatrix;
pub mod structconsts;
pub mod thm3;

pub use appendix::{appendix_table, appendix_table_as_printed, appendix_table_with, Transcription};
pub use cp2::{cp2_check, cp2_descend, Cp2Case, Cp2Report, Cubic, FiniteBracket};
pub use prop1::{
    prop1_certificate, prop1_certificate_with, prop1_system, NoGoReport, NoGoSystem, SolverOptions, Source,
};
pub use prop2::{
    cp1_coefficients, identify_two_field_tables, lemma1_descend, prop2_quartic, prop2_table, IdentificationReport,
};
pub use rmatrix::{
    rmatrix_delta_coeff, rmatrix_delta_prime_coeff, thm2_check, EPoint, FlatPoint, Thm2Realization, Thm2Report,
};
pub use structconsts::{field_indices, match_structconsts, Discrepancy, MatchReport, StructConsts, StructDoc};
pub use thm3::{basis_poly, generating_poly, lambda_probe, thm3_extract, thm3_extract_with_lambda, LambdaProbe};
