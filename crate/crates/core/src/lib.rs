pub mod linalg;
pub mod polyhedron;
pub mod loops;
pub mod engine;
pub mod displacement;
pub mod verify;
pub mod parse;
pub mod analysis;
pub mod report;
pub mod cli;
