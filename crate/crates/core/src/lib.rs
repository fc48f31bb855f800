//! Numerical core for affine deformations of Fuchsian surface groups.
//!
//! The crate is `no_std` with `alloc`. Everything here is a pure function of
//! its inputs; IO, configuration and reporting live in the companion `lab`
//! crate.
//!
//! Layers, bottom up:
//!
//! - [`halfplane`]: Möbius action, geodesics, the unit frame and its cocycle.
//! - [`fuchsian`]: words, Schottky and genus-2 groups, conjugacy classes.
//! - [`symrep`]: symmetric powers of the standard representation and their form.
//! - [`flatbundle`]: the flat bundle `R ⊕ L₁ ⊕ … ⊕ Lₙ`, transport and holonomy.
//! - [`margulis`]: loxodromic spectra, neutral vectors, Margulis invariants.
//! - [`cocycle`]: q-differentials, bundle-valued 1-forms, affine holonomy and
//!   the sign survey along closed geodesics.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cocycle;
pub mod error;
pub mod flatbundle;
pub mod fuchsian;
pub mod halfplane;
pub mod margulis;
pub mod symrep;

pub use error::{Error, Result};
