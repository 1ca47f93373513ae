//! Exact symbolic algebra for loops, homotopies and obstruction certificates
//! in `SL2` over commutative rings.
//!
//! The library is organised in layers:
//!
//! * [`poly`] — sparse multivariate polynomials over arbitrary-precision
//!   rationals, with a canonical term order, parsing and printing.
//! * [`ring`] — ring contexts (polynomial rings, quotients by a single monic
//!   relation, direct sums and fibre products), ring homomorphisms with
//!   canonical sections, and elements in normal form.
//! * [`matrix`] — small square matrices over a ring context, `SL_n`
//!   membership, elementary factors and the Euclidean `SL2` factorisation.
//! * [`homotopy`] — polynomial loops, paths and homotopies; the pairing that
//!   sends a loop pair to a cohomotopy class, the Mayer–Vietoris style maps
//!   over a fibre product and their constructive exactness witnesses.
//! * [`cocycle`] — unimodular rows over a fibre product, the co-cycle of a
//!   pair of completions, splitting witnesses and Milnor patching.
//! * [`winding`] — the single numeric component: winding numbers of the
//!   first-column curve of an `SL2` matrix.
//! * [`smith`] — Smith normal form for small integer matrices, used to name
//!   the obstruction group.
//! * [`pipelines`] — the seeded, self-verifying demo pipelines that the CLI
//!   exposes.
//!
//! Everything outside [`winding`] is exact: equalities of ring elements and
//! matrices are decided on canonical normal forms, never numerically.

pub mod cocycle;
pub mod error;
pub mod gen;
pub mod homotopy;
pub mod matrix;
pub mod pipelines;
pub mod poly;
pub mod ring;
pub mod serial;
pub mod smith;
pub mod winding;

pub use error::{Error, Result};
pub use matrix::{ElemFactor, SqMatrix};
pub use poly::{Poly, Rat, VarSet};
pub use ring::{Element, MilnorSquare, RingCtx, RingHom};
