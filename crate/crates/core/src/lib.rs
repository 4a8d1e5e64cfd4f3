//! Formal and Borel-Laplace normal forms for saddle-node ODE systems
//! `x' = x^{k+1}/k`, `y' = A y + x f(x, y)`.

pub mod basis;
pub mod borel;
pub mod borel_solver;
pub mod conjugacy;
pub mod convolution;
pub mod error;
pub mod hopf;
pub mod jordan;
pub mod laplace;
pub mod norms;
pub mod problem;
pub mod pade;
pub mod pipeline;
pub mod quadrature;
pub mod sector;
pub mod series;
pub mod special;
pub mod spectrum;
pub(crate) mod table;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
