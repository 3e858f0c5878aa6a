//! Rendezvous of two identical anonymous agents on anonymous port-labeled
//! graphs: feasibility (views and the Shrink metric), the universal
//! rendezvous algorithm, exploration sequences and a round-accurate
//! two-agent simulator.

pub mod graph;
pub mod uxs;
pub mod algos;
pub mod sim;
