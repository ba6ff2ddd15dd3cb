pub mod bench;
pub mod bvp;
pub mod cheb;
pub mod config;
pub mod expr;
pub mod linalg;
pub mod newton;
pub mod report;
