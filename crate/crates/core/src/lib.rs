//! Exact computation of μ-ordinary Hasse invariants of Dieudonné modules
//! with unitary multiplication, together with the Hodge and Newton polygon
//! machinery used to cross-check them.

pub mod crystal;
pub mod datum;
pub mod error;
mod fp_poly;
pub mod hasse;
pub mod io;
pub mod matrix;
pub mod models;
pub mod poly;
pub mod polygon;
pub mod rng;
pub mod suite;
pub mod witt;

pub use crystal::{DieudonneModule, SlopeDecomposition, SlopePiece, ValidationReport};
pub use datum::{Embedding, OrbitDatum, PelDatum};
pub use error::{Error, Result};
pub use fp_poly::is_prime;
pub use hasse::{hasse_report, mu_hasse, tau_hasse, HasseReport, TauHasse};
pub use matrix::{Matrix, SmithForm};
pub use polygon::{Comparison, Exponent, Polygon, Rational};
pub use witt::{RingContext, RingElement};
