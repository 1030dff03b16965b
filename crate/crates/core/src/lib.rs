//! Exact spectral engine for Perron-Frobenius operators of shift spaces.
//!
//! The crate computes, in exact rational / quadratic-field arithmetic:
//!
//! * representation matrices and generalized eigensystems of the transfer
//!   operator on polynomial test spaces, for full Bernoulli shifts and the
//!   golden-mean subshift;
//! * spectral decompositions, resolvents continued inside the unit circle,
//!   Riesz projections, and iteration asymptotics;
//! * the two-sided full 2-shift operator on a tensor basis, its Jordan
//!   structure at each generalized eigenvalue, and the perturbation-series
//!   coefficients with their pole orders;
//! * interval-map conjugacy checks (doubling map, golden-ratio map) and a
//!   floating-point histogram simulation as the lone inexact component.

pub mod interval;
pub mod json;
pub mod matrix;
pub mod observable;
pub mod poly;
pub mod ratfun;
pub mod scalar;
pub mod shift;
pub mod spectral;
pub mod twosided;

pub use interval::{
    histogram_simulation, invariant_density, matching_map, semiconjugacy_check, transfer_density,
    ConjugacyReport, DensitySpec, HistogramBin, HistogramReport, IntervalError, IntervalMap,
    IntervalMapKind,
};
pub use matrix::{Matrix, MatrixError};
pub use observable::{
    BlockObservable, CylFun, Observable, ObservableError, PolyObservable, WalshImage, WalshIndex,
};
pub use poly::Poly;
pub use ratfun::{PartialFractionTerm, RatFunError, RationalFunction};
pub use scalar::{ArithError, ComplexScalar, QuadExt, Rational, Scalar};
pub use shift::{CodingMap, Cylinder, MeasureSpec, ShiftError, ShiftSystem, Sidedness};
pub use spectral::{
    bernoulli_poly, rep_matrix, BasisTag, EigenSystem, IterateReport, ObservableResolvent,
    RepMatrix, SpectraError, SpectralDecomposition,
};
pub use twosided::{
    build_operator, coupling_element, perturbation_coefficient, pole_order_check, resolvent_q0,
    BracketTable, JordanReport, PoleOrderReport, TensorCoeffs, TensorIndex, TensorResolvent,
    TwoSidedCylFun, TwoSidedError, TwoSidedOperator,
};
