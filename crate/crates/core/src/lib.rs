//! Desk-scale CAT(0) model spaces with group actions, the geodesic flow
//! space with its exponentially weighted metric, foliated closeness
//! predicates, long thin covers with partitions of unity, join-space maps,
//! and a verifier that exercises the whole construction on concrete models.

pub mod cover;
pub mod error;
pub mod flow;
pub mod group;
pub mod join;
pub mod interval;
pub mod model;
pub mod padic;
pub mod pipeline;
pub mod rat;
pub mod scalar;

pub use error::{Error, Result};
pub use rat::Rat;
pub use scalar::{Scalar, Trilean};
