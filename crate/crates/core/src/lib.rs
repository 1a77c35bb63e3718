//! Deciding whether the image of an N-weighted regular tree language under
//! a nondeleting, nonerasing tree homomorphism is regular.
//!
//! The pipeline is [`transform::hom_image`] (a WTGh for the image),
//! [`decide::has_ldp`] (the large duplication property, polynomial), and
//! then either [`transform::linearize`] for an equivalent constraint-free
//! grammar or [`transform::decompose`] for a nonregularity witness.
//!
//! ```
//! use treehom::formats::{parse_hom, parse_wtg};
//! use treehom::decide::{decide_hom, DecideOptions};
//!
//! let a = parse_wtg("wtg { alphabet { a/0 g/1 s/2 } states { q } final { q: 1 }
//!     prod a -> q @ 1  prod g(q) -> q @ 2  prod s(q, q) -> q @ 1 }").unwrap();
//! let h = parse_hom("hom { source { a/0 g/1 s/2 } target { a/0 g/1 d/3 }
//!     rule s -> d(x2, g(x2), x1)  rule g -> g(x1)  rule a -> a }").unwrap();
//! let decision = decide_hom(&a, &h, DecideOptions::default()).unwrap();
//! assert_eq!(decision.verdict.token(), "NONREGULAR");
//! ```

pub mod cli;
pub mod decide;
pub mod error;
pub mod formats;
pub mod grammar;
pub mod homomorphism;
pub mod oracle;
pub mod substitution;
pub mod terms;
pub mod transform;
mod weight;

pub use error::{Error, Result, SourceSpan};
pub use grammar::{Constraints, Derivation, Production, Step, Weight, Wtg, SINK};
pub use homomorphism::TreeHomomorphism;
pub use terms::{Context, Label, Name, Position, RankedAlphabet, Tree};
