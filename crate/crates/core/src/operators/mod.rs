//! Integral operators on grid functions: the Riesz potential `I^beta` and
//! the Hardy–Littlewood maximal operator.

mod kernel;
mod maximal;
mod riesz;

pub use kernel::KernelTable;
pub use maximal::{grand_maximal_proxy, maximal_function};
pub use riesz::{riesz, riesz_direct, riesz_fft, RieszMethod, RieszOperator, RieszParams};
