//! Exact-arithmetic lattice primitives.

mod basis;
pub mod hnf;
pub mod minima;
mod planted;
mod sublattice;

pub use basis::{
    lattice_membership, max_column_norm, mod_parallelepiped, Basis, LatticeVector, MEMBERSHIP_TOL,
};
pub use planted::{
    generate_planted_instance, rational_rotation, verify_incgdd_solution, IncGddVerdict,
    InstanceJson, PlantedConfig, PlantedIncGddInstance, Profile,
};
pub use sublattice::SublatticePair;
