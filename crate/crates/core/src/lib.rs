//! Planning toolkit for rural wireless access over TV white space.

pub mod capex;
pub mod exec;
pub mod geometry;
pub mod lp;
pub mod opex;
pub mod report;
pub mod scenario;
pub mod topology;
