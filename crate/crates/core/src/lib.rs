//! Exact-arithmetic engine for homotopy transfer, topological quantum
//! mechanics on graphs, commutativity equations, tree-level BCOV and
//! flat structures (good sections) for A_n singularities.

pub mod error;
pub mod exactlin;
pub mod report;
pub mod complexes;
pub mod trees;
pub mod transfer;
pub mod tqm;
pub mod commutativity;
pub mod models;
pub mod bcov;
pub mod saito;
