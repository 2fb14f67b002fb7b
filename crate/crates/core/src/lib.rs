//! A laboratory for dynamics with slow (polynomial) complexity growth.
//!
//! The crate has two halves that cross-validate each other:
//!
//! * an *exact* half ([`intpoly`], [`intmat`], [`cohomology`]) that analyses the
//!   linear action of a map on cohomology with arbitrary-precision integer
//!   arithmetic: Kronecker root-of-unity tests, unipotency orders, Jordan block
//!   structure, and the resulting polynomial-entropy upper bounds;
//! * a *statistical* half ([`zoo`], [`lab`], [`pgl`], [`slow`]) that evaluates
//!   concrete map families (affine torus maps, projective linear maps, rotation
//!   skew products), counts Bowen-metric separated sets, and fits log-log
//!   exponents to recover polynomial entropy numerically.
//!
//! [`catalog`] holds the serializable system descriptions used by the CLI, and
//! [`seed`] the deterministic RNG-splitting scheme that makes every experiment
//! reproducible independently of worker count.

pub mod catalog;
pub mod cohomology;
pub mod cover;
pub mod fit;
pub mod intmat;
pub mod intpoly;
pub mod lab;
pub mod pgl;
pub mod seed;
pub mod slow;
pub mod zoo;
