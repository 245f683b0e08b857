//! Quartz dissolution in stochastic fracture networks.
//!
//! The crate is organised along the study's pipeline:
//!
//! * [`dfn`] generates disc-fracture networks, intersects and truncates them
//!   and prunes everything that cannot carry inlet-to-outlet flow.
//! * [`graph`] maps a network onto its intersection graph and computes the
//!   topological features (degree, betweenness, current flow, backbone).
//! * [`pipe`] solves steady flow on the pipe-network representation and
//!   derives Q, Péclet and Damköhler numbers per fracture.
//! * [`reactive`] evolves quartz dissolution on the pipe network until the
//!   outflow chemistry is quasi-steady.
//! * [`forest`] is a random-forest regressor with out-of-bag scoring,
//!   permutation importance and cross-validated grid search.
//! * [`pipeline`] ties everything together into an ensemble study.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled and plain iterators otherwise.

pub mod dfn;
pub mod forest;
pub mod geometry;
pub mod graph;
pub mod par;
pub mod pipe;
pub mod pipeline;
pub mod reactive;
pub mod seed;

pub use dfn::{FractureNetwork, GenerationParams};
pub use graph::NetworkGraph;
