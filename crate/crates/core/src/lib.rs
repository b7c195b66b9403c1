pub mod central_upwind;
pub mod diagnostics;
pub mod error;
pub mod limiters;
pub mod mesh;
pub mod nt1d;
pub mod physics;
pub mod reconstruct;
pub mod time_integration;
pub mod incompressible;
pub mod bench_suite;
pub mod driver;
pub mod io;
