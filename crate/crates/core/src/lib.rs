//! Functional and cycle-level model of a systolic modular matrix-multiply
//! unit, the CKKS kernels it accelerates, and an instruction/cycle cost model
//! comparing it with INT8 tensor-core decomposition.
//!
//! Module map:
//!
//! * [`modarith`]: Barrett-reduced arithmetic over primes below 2^31.
//! * [`ntt`]: direct and 4-step (matrix) NTT, cyclic and negacyclic.
//! * [`baseconv`]: RNS base conversion, direct and as a mixed-moduli matmul.
//! * [`polyring`]: RNS polynomials, slot-wise arithmetic, automorphisms.
//! * [`systolic`]: the PE array simulator and tiled matmul driver.
//! * [`costmodel`]: FHEC vs tensor-core instruction and cycle accounting.
//! * [`cli`]: configuration parsing and report generation for `fhecore-sim`.

pub mod baseconv;
pub mod cli;
pub mod costmodel;
pub mod error;
pub mod matrix;
pub mod modarith;
pub mod ntt;
pub mod polyring;
pub mod systolic;

pub use error::{Error, Result};
pub use matrix::{Matrix, ModMatMul, ModulusAssignment, PlainMatMul};
pub use modarith::Modulus;
