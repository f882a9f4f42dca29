pub mod ast;
pub mod csg;
pub mod dataset;
pub mod io;
pub mod metrics;
pub mod mutate;
pub mod render;
pub mod review;
pub mod segment;
