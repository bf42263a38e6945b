//! Shortest-distance enumeration with bounded, instrumented delay.
//!
//! The [`enumerators`] stream `(u, v, d)` triples one pull at a time. Each
//! pull does a bounded number of instrumented steps, and the
//! [`metering`] harness measures those steps per pull.
//!
//! ```
//! use std::sync::Arc;
//! use distenum::{apsd_unconstrained, Graph};
//!
//! let g = Arc::new(Graph::from_edge_list(3, &[(0, 1), (1, 2)], false).unwrap());
//! let triples: Vec<_> = apsd_unconstrained(&g).collect::<Result<_, _>>().unwrap();
//! assert_eq!(triples.len(), 9);
//! ```

pub mod enumerators;
pub mod graph;
pub mod lazyarray;
pub mod metering;
pub mod oracle;
pub mod pq;

pub use enumerators::{
    apsd_noself, apsd_reachable, apsd_rowwise, apsd_sorted, apsd_sorted_noself, apsd_unconstrained,
    apsd_unconstrained_with_engine, enumerate, enumerate_with, sssd_constrained, sssd_unweighted,
    sssd_weighted, Distance, DistanceTriple, EnumError, EnumOptions, Enumerator, OutputMode,
};
pub use graph::{
    gen_bmm_graph, gen_clique_path, gen_isolated_plus_edge, gen_random, gen_star, DegreeStats,
    Graph, GraphError,
};
pub use lazyarray::{LazyArray, LazyArrayError};
pub use metering::{fit_bound, run_metered, run_metered_with, DelayReport, StepCounter};
pub use oracle::{
    bmm_multiply, bool_product, brute_force_matrix, validate, validate_single_source, BoolMatrix,
    DistanceMatrix,
};
pub use pq::{AddressablePQ, Handle, PqError};
