//! Finite lattice workbench: lattice tables, element-free lattice terms,
//! polynomial synthesis on flat lattices, unary interpolation and
//! quantifier-free types, antichain certificates, and order-polynomial
//! completeness checks.

pub mod antichain;
pub mod interpolation;
pub mod lattice;
pub mod opc;
pub mod synthesis;
pub mod table;
pub mod term;

pub use lattice::{Elem, ElementTuple, FiniteLattice, TupleOrder};
pub use table::MonotoneTable;
pub use term::{Assignment, Term, Var};
