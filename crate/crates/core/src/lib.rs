pub mod aep;
pub mod config;
pub mod dsl;
pub mod fixtures;
pub mod frame;
pub mod geometry;
pub mod llm;
pub mod metrics;
pub mod pipeline;
pub mod shape;
pub mod symbolic;
