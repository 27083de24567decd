//! Hand and object equations of motion, the coupled contact-force solution
//! and the fixed-step grasp simulator.

pub mod chain;
pub mod grasp;
pub mod object;

pub use chain::{ChainKinematics, JointSpec, LinkBody, SerialChain};
pub use grasp::*;
pub use object::ObjectModel;
