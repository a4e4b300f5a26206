//! Cyclotomic p-adic L-functions of weight-2 newforms on Gamma_0(N).
//!
//! The pipeline runs bottom-up: [`modsym`] builds the plus/minus eigensymbol
//! from Manin symbols, [`measure`] turns it into the distribution on the
//! discs `D(a, p^n)`, and [`lseries`] integrates `<x>^(s-1)` against it,
//! expands around any center and certifies the order of vanishing.
//! [`numoracle`] holds the floating-point side checks.

pub mod cli;
pub mod lseries;
pub mod measure;
pub mod modsym;
pub mod numoracle;
pub mod padics;
