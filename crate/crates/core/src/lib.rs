//! Compiler from gate-level circuits to fixed-width photonic cluster-state measurement
//! grids, with a component-variant dynamic program that minimizes grid depth.

pub mod bench;
pub mod circuit;
pub mod compiler;
pub mod component;
pub mod grid;
pub mod lower;
pub mod oracle;
pub mod pattern;
pub mod placement;
pub mod sim;
pub mod variants;
pub mod verify;
