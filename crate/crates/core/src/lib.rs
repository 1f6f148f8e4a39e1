//! Sparse covers, padded partitions and low-distortion embeddings for
//! minor-free graphs, built on buffered cop decompositions.

// NaN-rejecting parameter checks and index loops over distance matrices.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bcd;
pub mod cli;
pub mod cover;
pub mod embed;
pub mod generators;
pub mod graph;
pub mod laminar;
pub mod partition;
pub mod prefix_code;
pub mod suite;
pub mod util;
