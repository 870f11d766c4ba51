pub mod balance;
pub mod canon;
pub mod census;
pub mod coloring;
pub mod decompose;
pub mod fixtures;
pub mod graph;
pub mod graph6;
pub mod harness;
pub mod oracle;
pub mod reducers;
