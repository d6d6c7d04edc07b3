//! Age of information under frame slotted ALOHA in Poisson networks.
//!
//! Analytic results for the Poisson bipolar and Poisson cellular uplink
//! models, together with a discrete-time Monte Carlo simulator that checks
//! them.

pub mod bipolar;
pub mod cellular;
pub mod error;
pub mod numerics;
pub mod renewal;
pub mod simulator;

pub use bipolar::BipolarConfig;
pub use cellular::{CellularConfig, GThetaArgs};
pub use error::{AoiValue, Divergence, Error, Result};
pub use numerics::{QuadratureSpec, SeriesSpec};
pub use renewal::{AoiStats, CondSuccessProb, ProtocolParams};
pub use simulator::{NetworkConfig, NetworkRealization, PowerModel, SimEstimate, SimSpec, SpatialAverage};
