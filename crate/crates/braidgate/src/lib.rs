//! Exact F-matrix solving and braid-group representations for
//! multiplicity-free anyon systems.

pub mod buchberger;
pub mod catalog;
pub mod cyclo;
pub mod matrix;
pub mod eqgen;
pub mod fsolve;
pub mod sparsepoly;
pub mod embed;
mod numutil;
pub mod tower;
