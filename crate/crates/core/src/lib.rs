//! Kauffman bracket and Jones polynomial computation by tangle scanning.

pub mod int;
pub mod laurent;
pub mod cutorder;
pub mod engine;
pub mod families;
pub mod matchings;
pub mod oracle;
pub mod planar;
pub mod skein;
pub mod verify;

pub use int::Int;
pub use laurent::{Grade, LaurentError, LaurentPoly, SpanGrade};
pub use matchings::{catalan, enumerate, glue_loop_count, Matching, MatchingError};
