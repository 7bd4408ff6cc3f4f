//! Convex mixtures of quantum dynamical maps, their ancilla dilations and
//! microscopic representations, and trace-distance based measures of
//! non-Markovianity and system-ancilla information flow.

pub mod channels;
pub mod distinguish;
mod error;
pub mod infoflow;
pub mod nonmarkov;
pub mod qmath;

pub use error::{Error, Result};
