//! Construction kit and verifier for intermittent convex-integration fields on
//! the periodic 3-torus: exact-rational parameter planning, pseudospectral
//! operators, geometric matrix decompositions, intermittent building blocks,
//! perturbation and stress assembly, a mild-form MHD solver and temporal gluing.

pub mod amplitude;
pub mod blocks;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod gluing;
pub mod perturb;
pub mod planner;
pub mod profiles;
pub mod rat;
pub mod solver;
pub mod spectral;
pub mod stress;
pub mod synth;

pub use error::{Error, Result};
