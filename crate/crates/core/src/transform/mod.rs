//! Grammar-to-grammar constructions: homomorphic image, trimming,
//! linearization and the decomposition used for nonregular witnesses.

mod decompose;
mod hom_image;
mod linearize;
mod trim;

pub use decompose::{decompose, decompose_at, Decomposition};
pub use hom_image::hom_image;
pub use linearize::{linearize, DEFAULT_CAP};
pub use trim::{producible_states, trim};

use crate::grammar::Wtg;
use crate::terms::Name;

/// The first of `base`, `base_1`, `base_2`, ... not used as a state
/// or symbol of `g`.
pub(crate) fn fresh_state(g: &Wtg, base: &str) -> Name {
    let taken = |s: &str| g.has_state(s) || g.alphabet().contains(s);
    if !taken(base) {
        return base.into();
    }
    (1..)
        .map(|i| format!("{base}_{i}"))
        .find(|s| !taken(s))
        .expect("unbounded search")
        .into()
}
