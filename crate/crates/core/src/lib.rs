//! Shield/target degeneracy of graphs: the ShadeSave game, exact search,
//! certificate generators and a DP-coloring oracle.

pub mod acceptance;
pub mod certificates;
pub mod engine;
pub mod graph;
pub mod oracle;
pub mod search;
