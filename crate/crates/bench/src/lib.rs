//! Fixed workloads shared by the criterion benchmarks.

use kmsgraph::{Digraph, Family};

/// Pascal truncation of the given depth with unit potentials.
pub fn pascal(depth: usize) -> Digraph {
    Family::pascal().truncate(depth).expect("pascal truncation")
}

/// Golden-mean graph with unit potentials.
pub fn golden() -> Digraph {
    Family::golden().truncate(0).expect("golden graph")
}

/// CAR phase-transition diagram materialized to `depth` levels.
pub fn car(depth: usize) -> Digraph {
    Family::car_phase(1.0).truncate(depth).expect("car truncation")
}
