pub mod constants;
pub mod device;
pub mod diagnostics;
pub mod quadrature;
pub mod regularization;
pub mod solver;
pub mod statistics;
pub mod config;
pub mod io;
pub mod plot;
pub mod run;
pub mod verify;
