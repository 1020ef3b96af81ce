//! Exact-arithmetic computer algebra for one-dimensional formal group laws
//! and their surroundings: truncated multivariate power series over exact
//! coefficient rings, p-typical Witt vectors with the Frobenius fixed-point
//! groups, filtered/graded commutative algebras with the Rees degeneration,
//! and the divided-power Hopf algebras obtained by Cartier duality.
//!
//! Everything is computed at a fixed total-degree truncation `N` with exact
//! coefficients (big integers, big rationals, modular residues); there is no
//! floating point anywhere in the crate.
//!
//! Module map:
//! - [`ring`]: coefficient rings (`Z`, `Q`, `Z/m`, Galois fields, polynomial
//!   and nilpotent extensions) and ring maps.
//! - [`poly`]: sparse multivariate polynomials with graded-lex term order.
//! - [`series`]: truncated power series: arithmetic, composition, reversion.
//! - [`fgl`]: formal group laws, axiom checking, n-series, height, log/exp,
//!   and the one-parameter degeneration to the additive law.
//! - [`witt`]: p-typical Witt vectors, ghost components, structure
//!   polynomials, Frobenius/Verschiebung, fixed points and twisted kernels.
//! - [`filtration`]: finitely presented algebras, adic filtrations,
//!   associated graded, the unicity check and the Rees construction.
//! - [`cartier`]: divided-power coalgebras, the duality pairing and
//!   grouplike points.
//! - [`verify`]: the acceptance suite shared by the CLI and the test harness.

pub mod fgl;
pub mod poly;
pub mod series;
pub mod ring;

pub use fgl::FormalGroupLaw;
pub use ring::{Coeff, RingDescriptor, RingMap};
pub use series::TruncatedSeries;
