//! Arithmetic over residue rings, prime fields and their extensions.

pub mod field;
pub mod matrix;
pub mod modular;
pub mod poly;
pub mod rational;

pub use field::{FieldExt, Fq, Mat2};
pub use matrix::ModMatrix;
pub use modular::{crt_lift, jacobi, legendre, ModInt, Modulus};
pub use poly::{factor_poly, Factorization, PolyFp};
pub use rational::{QMatrix, Q};
