pub mod bounds;
pub mod experiment;
pub mod persistence;
pub mod sample;
