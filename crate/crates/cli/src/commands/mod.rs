pub mod dataset;
pub mod fit;
pub mod plan;
pub mod predict;
pub mod stress;
