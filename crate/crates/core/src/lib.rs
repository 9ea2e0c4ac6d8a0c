#![cfg_attr(not(test), no_std)]
// `!(x >= 0.0)` guards are meant to reject NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]
extern crate alloc;

pub mod characters;
mod error;
mod linalg;
pub mod estimation;
pub mod lp;
pub mod math;
pub mod oracle;
pub mod partitions;
pub mod postproc;
pub mod protocols;
mod perm;
pub mod rates;
pub mod schur;
pub mod spectrum;

pub use error::{Error, Result};
pub use partitions::{StaircaseDelta, YoungIndex};
pub use schur::{YieldDistribution, YieldEntry, YieldPoint};
pub use spectrum::SchmidtSpectrum;
