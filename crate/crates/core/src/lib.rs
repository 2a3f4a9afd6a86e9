//! Source estimation for SI cascades observed through noisy tests.

pub mod bounds;
pub mod cascade;
pub mod estimator;
pub mod experiment;
pub mod graph;
pub mod io;
pub mod observation;
pub mod rng;
