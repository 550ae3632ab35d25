pub mod classes;
pub mod cli;
pub mod cyclotomic;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod oracle;
pub mod series;
