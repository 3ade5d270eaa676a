//! Parametric channel covariance matrix (CCM) estimation for uplink
//! millimeter-wave massive MIMO.
//!
//! The crate simulates a uniform linear array receiving pilots from users
//! scattered over an angle-delay plane, estimates each user tap's
//! angle of arrival, angular spread and power from a handful of DFT beams,
//! and rebuilds the tap CCMs from those three numbers. MUSIC and MaxBeam
//! direction finders serve as baselines, and the estimated CCMs drive
//! Capon and generalized eigen-beamformers whose SINR is measured by the
//! Monte Carlo [`harness`].
//!
//! Module map:
//!
//! * [`scenario`]: system configuration and angle-delay plane sampling.
//! * [`array`]: steering vectors, DFT beams, sector plans, projection.
//! * [`ccm`]: CCM construction by quadrature plus discrete and rank-1 forms.
//! * [`airlink`]: pilots, received blocks and matched filtering.
//! * [`neural`]: a small multilayer perceptron trained with momentum.
//! * [`estimators`]: DNN, MUSIC and MaxBeam estimators and flop accounting.
//! * [`beamform`]: Capon, GEB and steering beamformers and SINR.
//! * [`harness`]: experiment sweeps, metrics and result files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod airlink;
pub mod array;
pub mod beamform;
pub mod ccm;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod linalg;
pub mod neural;
pub mod rng;
pub mod scenario;

pub use error::{Error, Result};
