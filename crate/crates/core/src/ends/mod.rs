//! End spaces at finite resolution. Ends of a graph are read off from ray
//! fingerprints [D_n]_p; ends of a Bratteli diagram are ideal sets.

mod fingerprint;
mod ideals;
mod reach;
mod reduce;
mod undirected;

pub use fingerprint::{bonding_map, end_fingerprint, is_reduced_prefix, EndApprox};
pub use ideals::{
    bratteli_ends, bratteli_levels, minimal_end_test, minimal_ideal_test, BratteliEnds, EndSearch, IdealSet,
    MinimalReport, Minimality,
};
pub use reach::{reach_set_avoiding, reaches_avoiding};
pub use reduce::{graph_to_bratteli, BratteliReduction};
pub use undirected::{almost_undirected_test, AlmostUndirected, UndirectedReport};
