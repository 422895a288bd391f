//! Observer transition groups, point-dependent structure groups, and gauge
//! covariance checks on discretized manifolds.

pub mod error;
pub mod linalg;
pub mod matgroups;
pub mod manifold;
pub mod structures;
pub mod bundle;
pub mod gauge;
pub mod connection;
pub mod io;
pub mod scenarios;
pub mod cli;

pub use error::{Error, Result};
