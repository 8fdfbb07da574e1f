//! Term-matching resolution, coinductive trees and the lax and saturated
//! coalgebraic semantics of Horn-clause logic programs.
//!
//! ```
//! use colp::syntax::{parse_program, parse_atom_indexed};
//! use colp::resolution::tm_prove;
//!
//! let p = parse_program(colp::fixtures::LISTNAT).unwrap();
//! let goal = parse_atom_indexed("list(cons(0,nil))", 0, 0).unwrap();
//! assert!(tm_prove(&p, &goal, 8).is_proved());
//! ```

pub mod coalgebra;
pub mod cotree;
pub mod error;
pub mod exec;
pub mod family;
pub mod fixtures;
pub mod intfunctor;
pub mod lawvere;
pub mod random;
pub mod resolution;
pub mod saturation;
pub mod syntax;

pub use error::{ContextMismatch, Position, SemanticsError, SyntaxError};
pub use exec::Exec;
pub use family::{family_leq, map_family, Family};
