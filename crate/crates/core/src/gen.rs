//! Deterministic seeded generators for randomized suites: elements,
//! elementary products, loops, paths, homotopies and pullback classes.
//!
//! Everything is driven by an explicit `ChaCha8Rng` so that a seed fully
//! determines the generated data across platforms and runs.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::homotopy::{require_interval_square, GammaElem, HomotopyWitness, LoopWitness, PathWitness};
use crate::matrix::{assemble, ElemFactor, SqMatrix};
use crate::poly::{rat, Rat};
use crate::ring::{Element, MilnorSquare, RingCtx};

/// A reproducible generator from a seed.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Size bounds for generated data.
#[derive(Clone, Copy, Debug)]
pub struct GenCfg {
    /// Number of monomials per generated element.
    pub terms: usize,
    /// Total degree bound per monomial.
    pub degree: u32,
    /// Numerators are drawn from `-coeff_bound ..= coeff_bound`.
    pub coeff_bound: i64,
}

impl Default for GenCfg {
    fn default() -> GenCfg {
        GenCfg { terms: 2, degree: 2, coeff_bound: 3 }
    }
}

/// A small random rational with denominator 1 or 2.
pub fn random_rat(rng: &mut impl Rng, bound: i64) -> Rat {
    let num = rng.gen_range(-bound..=bound);
    let den = if rng.gen_bool(0.25) { 2 } else { 1 };
    rat(num, den)
}

/// A random element of a polynomial-like ring: a short sum of bounded
/// monomials with small rational coefficients.
pub fn random_element(rng: &mut impl Rng, ring: &RingCtx, cfg: &GenCfg) -> Result<Element> {
    let names: Vec<String> = match ring.vars() {
        Some(vs) => vs.names().to_vec(),
        None => Vec::new(),
    };
    let mut acc = Element::zero(ring);
    for _ in 0..cfg.terms.max(1) {
        let mut term = Element::constant(ring, random_rat(rng, cfg.coeff_bound));
        if !names.is_empty() {
            let mut budget = cfg.degree;
            for name in &names {
                if budget == 0 {
                    break;
                }
                let e = rng.gen_range(0..=budget);
                if e > 0 {
                    term = term.mul(&Element::var(ring, name)?.pow(e)?)?;
                    budget -= e;
                }
            }
        }
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// A list of random elementary factors for `n x n` matrices.
pub fn random_factors(
    rng: &mut impl Rng,
    ring: &RingCtx,
    n: usize,
    count: usize,
    cfg: &GenCfg,
) -> Result<Vec<ElemFactor>> {
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        out.push(ElemFactor::new(i, j, random_element(rng, ring, cfg)?)?);
    }
    Ok(out)
}

/// A random product of elementary matrices, returned with its factors.
pub fn random_product(
    rng: &mut impl Rng,
    ring: &RingCtx,
    n: usize,
    count: usize,
    cfg: &GenCfg,
) -> Result<(SqMatrix, Vec<ElemFactor>)> {
    let factors = random_factors(rng, ring, n, count, cfg)?;
    Ok((assemble(ring, n, &factors)?, factors))
}

/// A random 2 x 2 determinant-one matrix with constant entries.
pub fn random_constant_sl2(rng: &mut impl Rng, ring: &RingCtx, count: usize, bound: i64) -> Result<SqMatrix> {
    let mut factors = Vec::with_capacity(count);
    for _ in 0..count {
        let i = rng.gen_range(0..2);
        let j = 1 - i;
        factors.push(ElemFactor::new(i, j, Element::constant(ring, random_rat(rng, bound)))?);
    }
    assemble(ring, 2, &factors)
}

/// A random loop in `var` over `base`: a product of shears whose
/// off-diagonal entries carry the factor `var * (1 - var)`, so the
/// matrix is the identity at both endpoints.
pub fn random_loop(
    rng: &mut impl Rng,
    base: &RingCtx,
    var: &str,
    count: usize,
    cfg: &GenCfg,
) -> Result<LoopWitness> {
    let ext = base.extend(&[var])?;
    let t = Element::var(&ext, var)?;
    let pin = t.sub(&t.mul(&t)?)?;
    let mut factors = Vec::with_capacity(count);
    for _ in 0..count {
        let i = rng.gen_range(0..2);
        let j = 1 - i;
        let p = random_element(rng, &ext, cfg)?;
        factors.push(ElemFactor::new(i, j, p.mul(&pin)?)?);
    }
    LoopWitness::new(base.clone(), var, assemble(&ext, 2, &factors)?)
}

/// A random path in `var` over `base`, starting at the identity: a
/// product of shears whose off-diagonal entries carry the factor `var`.
pub fn random_path(
    rng: &mut impl Rng,
    base: &RingCtx,
    var: &str,
    count: usize,
    cfg: &GenCfg,
) -> Result<PathWitness> {
    let ext = base.extend(&[var])?;
    let t = Element::var(&ext, var)?;
    let mut factors = Vec::with_capacity(count);
    for _ in 0..count {
        let i = rng.gen_range(0..2);
        let j = 1 - i;
        let p = random_element(rng, &ext, cfg)?;
        factors.push(ElemFactor::new(i, j, p.mul(&t)?)?);
    }
    PathWitness::new(base.clone(), var, assemble(&ext, 2, &factors)?)
}

/// A random homotopy of loops starting at the constant identity loop:
/// entries carry `tvar * (1 - tvar) * svar`, pinning both loop
/// endpoints and the `svar = 0` slice.
pub fn random_homotopy(
    rng: &mut impl Rng,
    base: &RingCtx,
    tvar: &str,
    svar: &str,
    count: usize,
    cfg: &GenCfg,
) -> Result<HomotopyWitness> {
    let ext = base.extend(&[tvar, svar])?;
    let t = Element::var(&ext, tvar)?;
    let s = Element::var(&ext, svar)?;
    let pin = t.sub(&t.mul(&t)?)?.mul(&s)?;
    let mut factors = Vec::with_capacity(count);
    for _ in 0..count {
        let i = rng.gen_range(0..2);
        let j = 1 - i;
        let p = random_element(rng, &ext, cfg)?;
        factors.push(ElemFactor::new(i, j, p.mul(&pin)?)?);
    }
    HomotopyWitness::new(base.clone(), tvar, svar, assemble(&ext, 2, &factors)?)
}

/// A random class over the pullback of an interval square: the right
/// part is a loop in the interval variable times a constant matrix, the
/// left part is that constant, so the pair glues.
pub fn random_interval_class(
    rng: &mut impl Rng,
    square: &MilnorSquare,
    count: usize,
    cfg: &GenCfg,
) -> Result<GammaElem> {
    let x = require_interval_square(square)?;
    let xe = Element::var(&square.right, &x)?;
    let pin = xe.sub(&xe.mul(&xe)?)?;
    let mut factors = Vec::with_capacity(count);
    for _ in 0..count {
        let i = rng.gen_range(0..2);
        let j = 1 - i;
        let p = random_element(rng, &square.right, cfg)?;
        factors.push(ElemFactor::new(i, j, p.mul(&pin)?)?);
    }
    let looped = assemble(&square.right, 2, &factors)?;
    let constant = random_constant_sl2(rng, &square.left, count.max(1), cfg.coeff_bound)?;
    let alpha = looped.mul(&constant.extend_to(&square.right)?)?;
    let rep = SqMatrix::fibre(square.total(), &alpha, &constant)?;
    GammaElem::new(rep)
}

// ====================================================================
// Tests
// ====================================================================
