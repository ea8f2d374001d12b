//! Exact computations for the Gan-Gross-Prasad slice of SO(W) x SO(V) over local fields:
//! quadratic spaces, regular nilpotent orbits, the slice and its characteristic polynomial
//! identity, class triples, endoscopic sign invariants, regular germs and Kostant sections.

pub mod classes;
pub mod endoscopy;
pub mod error;
pub mod gen;
pub mod kostant;
pub mod localfield;
pub mod matrix;
pub mod poly;
pub mod quadalgebra;
pub mod quadspace;
pub mod rational;
pub mod slice;
pub mod soalg;

pub use classes::{ClassTriple, TripleEntry, XpmConfig};
pub use error::{Error, Result};
pub use localfield::{LocalField, SquareClass};
pub use matrix::{Mat, Vector};
pub use poly::Poly;
pub use quadalgebra::{AlgElem, QuadAlgebra};
pub use quadspace::{GgpTriple, QuadSpace, SpaceInvariants};
pub use rational::Q;
pub use slice::{GElem, LambdaElem, SigmaElem};
