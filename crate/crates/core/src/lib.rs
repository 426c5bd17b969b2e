//! Holomorphic self-maps of the complex unit ball and the mean ergodicity of
//! their composition operators on bounded holomorphic functions.
#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x < 1.0)` deliberately rejects NaN.

pub mod dynamics;
pub mod ergodicity;
pub mod geometry;
pub mod interpolation;
pub mod linalg;
pub mod maps;
