//! Consistency checking of UML models through a description-logic encoding.

pub mod analysis;
pub mod corpus;
pub mod loader;
pub mod model;
pub mod ocl;
pub mod oracle;
pub mod owl;
pub mod reasoner;
