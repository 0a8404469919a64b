//! Best responses: the downward-lexicographic algorithm for any number of
//! agents, the two-agent expected-utility pipeline, and exhaustive search.

pub mod brute;
pub mod clones;
pub mod dl;
pub mod eu2;
pub mod kc;

pub use brute::{
    brute_force_best_response, find_improving_deviation, find_improving_report, BruteForceResult,
    Objective, DEFAULT_BOUND,
};
pub use clones::{
    alternation_policy, join_to_list, order_preserving_bisection, order_preserving_join,
    ClonedHouse, ClonedPreference, Half, JoinedItem, PickSequence,
};
pub use dl::{dl_best_response, insert_and_complete, stingy_ordering, DlBestResponse};
pub use eu2::{
    eu_best_response_2agents, eu_best_response_2agents_explained, repair_consecutivity,
    TwoAgentResponse,
};
pub use kc::{kc_best_response, kc_preference};
