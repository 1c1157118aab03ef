//! Variable-exponent function spaces on a uniform grid over a box in `R^n`
//! (`n = 1, 2`): Lebesgue and Herz–Morrey norms, Riesz potentials and central
//! atoms, plus a harness that checks the inequalities relating them.
//!
//! Every routine is generic over the scalar type ([`Real`], implemented for
//! `f32` and `f64`); the aliases below fix it for common use.

pub mod atoms;
pub mod error;
pub mod exponents;
pub mod grid;
pub mod herz;
pub mod lebesgue;
pub mod linalg;
pub mod operators;
pub mod quadrature;
pub mod scalar;
pub mod verify;

pub use atoms::{
    coefficient_functional, coefficient_lambda, make_central_atom, make_limited_atom, synthesize, verify_atom,
    AtomReport, AtomSpec, CoefficientFunctional, Decomposition, Term,
};
pub use error::{Error, Result};
pub use exponents::{conjugate, log_holder_diagnostics, make_exponent, Descriptor, Exponent, ExponentMode};
pub use grid::{annulus_mask, ball_mask, integrate, nonneg_mask, Grid, GridFunction};
pub use herz::{herz_morrey_hardy_norm, herz_morrey_norm, herz_morrey_norm_split, HerzParams};
pub use lebesgue::{holder_pairing, luxemburg_norm, modular, norm_value, HolderPairing, NormResult};
pub use operators::{
    grand_maximal_proxy, maximal_function, riesz, riesz_direct, riesz_fft, RieszMethod, RieszOperator, RieszParams,
};
pub use scalar::Real;

pub type Grid64 = Grid<f64>;
pub type GridFunction64 = GridFunction<f64>;
pub type Exponent64 = Exponent<f64>;
pub type HerzParams64 = HerzParams<f64>;
pub type AtomSpec64 = AtomSpec<f64>;

pub type Grid32 = Grid<f32>;
pub type GridFunction32 = GridFunction<f32>;
pub type Exponent32 = Exponent<f32>;
pub type HerzParams32 = HerzParams<f32>;
pub type AtomSpec32 = AtomSpec<f32>;
