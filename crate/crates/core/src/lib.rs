pub mod cli;
pub mod error;
pub mod exec;
pub mod expansion;
pub mod laurent;
pub mod minkowski;
pub mod mode_sum;
pub mod real;
pub mod stress;

#[cfg(test)]
mod quadrature;
