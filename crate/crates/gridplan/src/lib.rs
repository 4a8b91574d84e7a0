//! gridplan: makespan-minimal planning of bulk data transfers.
//!
//! Networks are directed graphs of sites with slowdown-weighted links,
//! optional shared-capacity link groups and bounded site storage. A request
//! asks for a set of files, each replicated at one or more origin sites, to
//! reach a single destination. The planner builds a constraint model over
//! routing and start-time variables and minimizes the makespan by
//! branch and bound ([`solver`]), optionally accelerated by symmetry
//! breaking, chunked decomposition or linear time limits ([`strategies`]).
//! A peer-to-peer rarest-first simulator ([`p2p`]) serves as the baseline,
//! [`replay`] independently re-checks any schedule, and [`bench`] compares
//! the methods over generated scenarios.

pub mod bench;
pub mod gantt;
pub mod model;
pub mod p2p;
pub mod replay;
pub mod solver;
pub mod strategies;
