//! Combinatorics of dual complexes for a degenerating family of K3 surfaces
//! after base change, and of the induced configurations on the Hilbert
//! square.

pub mod charts;
pub mod cli;
pub mod delta;
pub mod exact;
pub mod expansion;
pub mod hilb;
pub mod projectivity;
pub mod surface;
