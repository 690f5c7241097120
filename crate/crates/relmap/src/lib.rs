//! Dependability mapping between network-level packet loss behaviour and
//! application-level availability/reliability for cyclic traffic.
//!
//! The channel is modelled per traffic cycle as alternating up/down runs with
//! geometric lengths (a two-state bursty loss model). An application that
//! tolerates up to `N_sv` consecutive lost cycles — its survival time — sees
//! better availability than the raw channel. [`model`] carries the closed
//! forms in the forward direction, [`fsmc`] builds the underlying
//! finite-state chain explicitly and solves its steady state as an
//! independent numerical cross-check, [`translate`] inverts application
//! requirements into network parameter bounds, [`trace`] estimates every
//! metric from recorded packet logs, and [`chansim`] generates seeded
//! synthetic traces for Monte Carlo validation.
//!
//! ```
//! use relmap::{translate, NetworkParams};
//!
//! // A channel losing 1% of packets in bursts averaging two cycles,
//! // serving an application that tolerates one lost cycle.
//! let params = NetworkParams::from_per_and_mean_down_time(0.01, 2.0)?;
//! assert_eq!(params.app_availability(1), 0.995);
//! assert_eq!(params.app_reliability(1).finite(), Some(398.0));
//!
//! // And back: which parameters meet those targets exactly?
//! let solved = translate::joint_solve(0.995, 398.0, 1)?;
//! assert!((solved.per() - 0.01).abs() < 1e-12);
//! # Ok::<(), relmap::Error>(())
//! ```

pub mod chansim;
mod error;
pub mod fsmc;
pub mod model;
pub mod trace;
pub mod translate;

pub use error::{Error, Result};
pub use model::{
    independent_app_availability, survival_cycles, AppRequirements, CyclicTrafficSpec, MeanCycles,
    NetworkParams, ReliabilityReport,
};
