//! Finite-dimensional operational probabilistic theories: states, effects
//! and transformations in coordinates, bipartite composition, norms and the
//! informational dimension, and the transposition, involution, adjoint and
//! GNS representation induced by a symmetric faithful state.

pub mod composite;
pub mod error;
pub mod faithful;
pub mod geometry;
pub mod gns;
pub mod linalg;
pub mod lp;
pub mod theories;
pub mod theory;

pub use composite::{CompositeTheory, Factor};
pub use error::{Error, Result};
pub use faithful::{BipartiteState, FaithfulCalculus};
pub use theory::{Experiment, GeneralizedEffect, Theory, TheorySpace, Tolerances, Transformation, Weight};
