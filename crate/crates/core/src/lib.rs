//! Certified bounds for physics-informed tanh networks.
//!
//! Bounds on the network output and on its first and second input
//! derivatives come from linear relaxations propagated through the layers;
//! polynomial PDE residuals are bounded on top of those, and greedy input
//! branching tightens everything toward Monte-Carlo estimates.

pub mod activation;
pub mod branching;
pub mod certify;
pub mod derivative;
pub mod linear;
pub mod network;
pub mod pde;
pub mod relax;
pub mod residual;
