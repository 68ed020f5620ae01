//! Brown–Gitler comodules, the θ_k isomorphisms, Margolis homology and Ext
//! over E(2) and P(2), computed exactly in bounded internal degree.

pub mod browngitler;
pub mod error;
pub mod ext;
pub mod fp;
pub mod margolis;
pub mod monomial;
pub mod qmodule;
pub mod report;

pub use error::{Error, Result};
