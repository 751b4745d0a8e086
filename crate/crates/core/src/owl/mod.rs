//! Description-logic axiom IR, the UML-to-DL compiler and the OWL 2
//! functional-syntax writer.

mod axioms;
mod emit;
mod functional;

pub use axioms::*;
pub use emit::{emit, translate_ocl, EmitError, EmitOptions, OclTranslation, OWNS, OWNS_CLOSURE};
pub use functional::serialize_functional;
