//! Inequality harness. Estimates with explicit constants are checked exactly;
//! the rest are fitted over seeded families, and the boundedness of `I^beta`
//! between Herz–Morrey spaces is probed by refinement stability.

mod decay;
mod estimates;
pub mod families;
mod izuki;
mod report;
mod suite;
mod theorem;

pub use decay::{check_atom_decay, operator_constant, AtomDecayReport, DecayOptions, DEFAULT_SLOPE_TOL};
pub use estimates::{
    ball_lower_constant, check_q_subadditivity, check_sobolev_exponent, holder_battery, operator_ratio,
    split_equivalence, subadditivity_battery, HolderBattery, SplitFit, Subadditivity,
};
pub use families::{FamilyKind, FamilySelection};
pub use izuki::{fit_izuki, IzukiFit, IzukiPair};
pub use report::{format_float, params_hash, CheckRecord, DriftRecord, VerificationReport, CSV_COLUMNS};
pub use suite::{run_suite, SuiteConfig, BALL_CONSTANT_SPREAD, DEFAULT_DUALITY_CAP, SPLIT_DRIFT_CAP};
pub use theorem::{
    check_main_theorem, run_ratio_experiment, validate_hypotheses, FamilyRun, HypothesisLog, MemberRatio,
    TheoremReport, TheoremSetup, DEFAULT_DRIFT_CAP, MIN_FAMILY_SIZE,
};

use crate::scalar::{from_usize, Real};

/// Ordinary least squares `y = intercept + slope * x`; a zero slope when the
/// abscissae do not vary.
pub(crate) fn linear_fit<T: Real>(xs: &[T], ys: &[T]) -> (T, T) {
    let n = from_usize::<T>(xs.len().max(1));
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    let sxy: T = xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > T::zero() { sxy / sxx } else { T::zero() };
    (slope, my - slope * mx)
}
