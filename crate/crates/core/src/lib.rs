//! Recognition, minimal covers and isomorphism testing for quotients of
//! generalized Heisenberg groups over finite fields of odd characteristic.

pub mod ff;
pub mod linalg;
pub mod bimap;
pub mod group;
pub mod centroid;
pub mod adjoint;
pub mod recognize;
pub mod isotest;
pub mod invariants;
pub mod config;
pub mod census;
pub mod io;
pub mod selftest;
