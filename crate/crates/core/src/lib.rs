//! `infoest`: small-sample estimation of information-theoretic quantities.
//!
//! The crate is organized bottom-up:
//!
//! - [`info`]: exact plug-in functionals (entropy, KL, Jensen-Shannon, mutual
//!   information) and coarse-graining operators on distributions and counts.
//! - [`boot`]: multinomial resampling and zeroth-order bootstrap bias
//!   correction, with an exact enumeration path for small samples.
//! - [`bayes`]: Dirichlet posterior (Wolpert-Wolf) and NSB mixture estimators.
//! - [`priors`]: samplers for the Dirichlet, NSB and coarse-grained NSB (`D'`)
//!   prior families, including uniform random set partitions.
//! - [`decision`]: Lin and Bhattacharyya error bounds and the subclass
//!   prediction experiment.
//! - [`series`]: four-state severity coding and time-lagged mutual information.
//!
//! All results are reported in bits. Randomized operations take an explicit
//! seed and derive one ChaCha stream per work item, so results do not depend on
//! how many worker threads run them.
//!
//! ```
//! use infoest::info::{entropy_naive, Simplex};
//!
//! let p = Simplex::new(vec![0.5, 0.25, 0.25]).unwrap();
//! assert!((entropy_naive(&p).unwrap() - 1.5).abs() < 1e-12);
//! ```

#![forbid(unsafe_code)]

pub mod bayes;
pub mod boot;
pub mod decision;
mod error;
pub mod info;
pub mod par;
pub mod priors;
pub mod rng;
pub mod series;
pub mod special;

pub use error::{InfoError, Result};
pub use par::Execution;
