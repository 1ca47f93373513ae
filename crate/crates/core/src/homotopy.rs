//! Loops, paths and homotopies of special-linear matrices, the connecting
//! certificate between loop pairs and pullback classes, and the
//! Mayer-Vietoris maps with exactness witnesses.
//!
//! Conventions: a loop in `SL_n(A)` is a matrix over `A[t]` equal to the
//! identity at `t = 0` and `t = 1`; a path starts at the identity; a
//! homotopy of loops is pinned to the identity at both ends of the loop
//! variable.  Classes of `SL_2` elements modulo the elements connected to
//! the identity are represented by an explicit matrix representative.
//! Every construction in this module is exact: all claimed identities are
//! polynomial identities, re-checked on demand.

use crate::error::{Error, Result};
use crate::matrix::{assemble, ElemFactor, SqMatrix};
use crate::poly::Rat;
use crate::ring::{Element, HomKind, MilnorSquare, RingCtx, RingKind};
use num_traits::{One, Zero};

// ====================================================================
// Named checks
// ====================================================================

/// One named pass/fail fact about a witness.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub ok: bool,
}

impl Check {
    pub fn new(name: &str, ok: bool) -> Check {
        Check { name: name.to_string(), ok }
    }
}

pub fn all_ok(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.ok)
}

/// First failing check as a boundary error, if any.
pub fn first_failure(checks: &[Check]) -> Result<()> {
    match checks.iter().find(|c| !c.ok) {
        None => Ok(()),
        Some(c) => Err(Error::BoundaryMismatch {
            condition: c.name.clone(),
            detail: "exact identity failed".into(),
        }),
    }
}

// ====================================================================
// Loop witnesses
// ====================================================================

/// A loop in `SL_n(base)`: a matrix over `base[var]` that is the identity
/// at `var = 0` and `var = 1`.
#[derive(Clone, PartialEq, Debug)]
pub struct LoopWitness {
    pub base: RingCtx,
    pub var: String,
    pub matrix: SqMatrix,
}

impl LoopWitness {
    pub fn new(base: RingCtx, var: &str, matrix: SqMatrix) -> Result<LoopWitness> {
        let expected = base.extend(&[var])?;
        if matrix.ring() != &expected {
            return Err(Error::RingMismatch(format!(
                "loop matrix lives in {} but should live in {}",
                matrix.ring(),
                expected
            )));
        }
        Ok(LoopWitness { base, var: var.to_string(), matrix })
    }

    pub fn identity(base: &RingCtx, var: &str, n: usize) -> Result<LoopWitness> {
        let ring = base.extend(&[var])?;
        LoopWitness::new(base.clone(), var, SqMatrix::identity(&ring, n))
    }

    /// Evaluate the loop at a rational time, landing in the base ring.
    pub fn at(&self, t: &Rat) -> Result<SqMatrix> {
        self.matrix.subst_var_rat(&self.var, t)?.restrict_to(&self.base)
    }

    /// Check that the matrix really is a loop: determinant one, identity
    /// at both endpoints.
    pub fn verify(&self) -> Result<()> {
        if !self.matrix.det()?.is_one() {
            return Err(Error::NotSpecialLinear(format!("det = {}", self.matrix.det()?)));
        }
        for t in [Rat::zero(), Rat::one()] {
            let m = self.matrix.subst_var_rat(&self.var, &t)?;
            if !m.is_identity() {
                return Err(Error::NotALoop {
                    var: self.var.clone(),
                    at: t.to_string(),
                    value: m.to_string(),
                });
            }
        }
        Ok(())
    }

    /// Pointwise product of loops over the same base.
    pub fn product(&self, other: &LoopWitness) -> Result<LoopWitness> {
        if self.base != other.base || self.var != other.var {
            return Err(Error::RingMismatch("loops must share a base ring and loop variable".into()));
        }
        LoopWitness::new(self.base.clone(), &self.var, self.matrix.mul(&other.matrix)?)
    }

    /// Pointwise inverse loop.
    pub fn inverse(&self) -> Result<LoopWitness> {
        LoopWitness::new(self.base.clone(), &self.var, self.matrix.inverse()?)
    }

    /// Rename the loop variable.
    pub fn rename_var(&self, to: &str) -> Result<LoopWitness> {
        if to == self.var {
            return Ok(self.clone());
        }
        let target = self.base.extend(&[to])?;
        let scratch = self.base.extend(&[&self.var, to])?;
        let image = Element::parse(&scratch, to)?;
        let moved = self
            .matrix
            .extend_to(&scratch)?
            .subst_var(&self.var, &image)?
            .restrict_to(&target)?;
        LoopWitness::new(self.base.clone(), to, moved)
    }
}

/// Split a loop over a direct sum into one loop per component.
pub fn split_direct_loop(lw: &LoopWitness) -> Result<Vec<LoopWitness>> {
    let parts = lw
        .base
        .direct_parts()
        .ok_or_else(|| Error::UnsupportedRing(format!("{} is not a direct sum", lw.base)))?
        .to_vec();
    let mut out = Vec::new();
    for (i, part) in parts.iter().enumerate() {
        let ring = part.extend(&[&lw.var])?;
        let matrix = lw.matrix.map_entries(ring, &|e| e.part(i))?;
        out.push(LoopWitness::new(part.clone(), &lw.var, matrix)?);
    }
    Ok(out)
}

/// Join loops over the components of a direct sum into one loop.
pub fn join_direct_loop(base: &RingCtx, loops: &[LoopWitness]) -> Result<LoopWitness> {
    let parts = base
        .direct_parts()
        .ok_or_else(|| Error::UnsupportedRing(format!("{base} is not a direct sum")))?;
    if parts.len() != loops.len() {
        return Err(Error::ShapeError("one loop per direct summand required".into()));
    }
    let var = &loops[0].var;
    let ext = base.extend(&[var])?;
    let n = loops[0].matrix.n();
    let mut entries = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let comps: Vec<Element> =
                loops.iter().map(|l| l.matrix.get(i, j).clone()).collect();
            entries.push(Element::tuple(ext.clone(), comps)?);
        }
    }
    LoopWitness::new(base.clone(), var, SqMatrix::from_entries(ext, n, entries)?)
}

// ====================================================================
// Path witnesses
// ====================================================================

/// A path in `SL_n(base)` starting at the identity: a matrix over
/// `base[var]` equal to the identity at `var = 0`.
#[derive(Clone, PartialEq, Debug)]
pub struct PathWitness {
    pub base: RingCtx,
    pub var: String,
    pub matrix: SqMatrix,
}

impl PathWitness {
    pub fn new(base: RingCtx, var: &str, matrix: SqMatrix) -> Result<PathWitness> {
        let expected = base.extend(&[var])?;
        if matrix.ring() != &expected {
            return Err(Error::RingMismatch(format!(
                "path matrix lives in {} but should live in {}",
                matrix.ring(),
                expected
            )));
        }
        Ok(PathWitness { base, var: var.to_string(), matrix })
    }

    pub fn start(&self) -> Result<SqMatrix> {
        self.matrix.subst_var_rat(&self.var, &Rat::zero())?.restrict_to(&self.base)
    }

    pub fn end(&self) -> Result<SqMatrix> {
        self.matrix.subst_var_rat(&self.var, &Rat::one())?.restrict_to(&self.base)
    }

    pub fn verify(&self) -> Result<()> {
        if !self.matrix.det()?.is_one() {
            return Err(Error::NotSpecialLinear(format!("det = {}", self.matrix.det()?)));
        }
        if !self.start()?.is_identity() {
            return Err(Error::BoundaryMismatch {
                condition: "path starts at the identity".into(),
                detail: format!("value at {} = 0 is {}", self.var, self.start()?),
            });
        }
        Ok(())
    }

    /// Pointwise product of paths over the same base.
    pub fn product(&self, other: &PathWitness) -> Result<PathWitness> {
        if self.base != other.base || self.var != other.var {
            return Err(Error::RingMismatch("paths must share a base ring and variable".into()));
        }
        PathWitness::new(self.base.clone(), &self.var, self.matrix.mul(&other.matrix)?)
    }
}

/// The straight-line path `t -> E_1(t r_1) ... E_m(t r_m)` from the
/// identity to the assembled product of the factors.
pub fn path_from_factors(base: &RingCtx, var: &str, factors: &[ElemFactor]) -> Result<PathWitness> {
    let ext = base.extend(&[var])?;
    let t = Element::var(&ext, var)?;
    let mut scaled = Vec::new();
    for f in factors {
        let r = f.r.extend_to(&ext)?.mul(&t)?;
        scaled.push(ElemFactor::new(f.i, f.j, r)?);
    }
    let n = factors.iter().map(|f| f.i.max(f.j) + 1).max().unwrap_or(2).max(2);
    PathWitness::new(base.clone(), var, assemble(&ext, n, &scaled)?)
}

// ====================================================================
// Homotopy witnesses
// ====================================================================

/// A homotopy of loops rel endpoints: a matrix over `base[tvar, svar]`
/// that is the identity at `tvar = 0` and `tvar = 1`; the slices at
/// `svar = 0` and `svar = 1` are the two loops being connected.
#[derive(Clone, PartialEq, Debug)]
pub struct HomotopyWitness {
    pub base: RingCtx,
    pub tvar: String,
    pub svar: String,
    pub matrix: SqMatrix,
}

impl HomotopyWitness {
    pub fn new(base: RingCtx, tvar: &str, svar: &str, matrix: SqMatrix) -> Result<HomotopyWitness> {
        let expected = base.extend(&[tvar, svar])?;
        if matrix.ring() != &expected {
            return Err(Error::RingMismatch(format!(
                "homotopy matrix lives in {} but should live in {}",
                matrix.ring(),
                expected
            )));
        }
        Ok(HomotopyWitness { base, tvar: tvar.to_string(), svar: svar.to_string(), matrix })
    }

    pub fn constant_identity(base: &RingCtx, tvar: &str, svar: &str, n: usize) -> Result<HomotopyWitness> {
        let ring = base.extend(&[tvar, svar])?;
        HomotopyWitness::new(base.clone(), tvar, svar, SqMatrix::identity(&ring, n))
    }

    /// Loop at `svar = s`.
    pub fn slice(&self, s: &Rat) -> Result<LoopWitness> {
        let target = self.base.extend(&[&self.tvar])?;
        let m = self.matrix.subst_var_rat(&self.svar, s)?.restrict_to(&target)?;
        LoopWitness::new(self.base.clone(), &self.tvar, m)
    }

    pub fn from_loop(&self) -> Result<LoopWitness> {
        self.slice(&Rat::zero())
    }

    pub fn to_loop(&self) -> Result<LoopWitness> {
        self.slice(&Rat::one())
    }

    pub fn verify(&self) -> Result<()> {
        if !self.matrix.det()?.is_one() {
            return Err(Error::NotSpecialLinear(format!("det = {}", self.matrix.det()?)));
        }
        for t in [Rat::zero(), Rat::one()] {
            let m = self.matrix.subst_var_rat(&self.tvar, &t)?;
            if !m.is_identity() {
                return Err(Error::BoundaryMismatch {
                    condition: "homotopy is pinned at the loop endpoints".into(),
                    detail: format!("value at {} = {} is {}", self.tvar, t, m),
                });
            }
        }
        Ok(())
    }
}

// ====================================================================
// Classes: loops up to homotopy, matrices up to deformation
// ====================================================================

/// A loop-class representative in the fundamental group of `SL_n(base)`.
#[derive(Clone, Debug)]
pub struct PiElem {
    pub rep: LoopWitness,
}

impl PiElem {
    pub fn new(rep: LoopWitness) -> Result<PiElem> {
        rep.verify()?;
        Ok(PiElem { rep })
    }

    pub fn product(&self, other: &PiElem) -> Result<PiElem> {
        Ok(PiElem { rep: self.rep.product(&other.rep)? })
    }

    pub fn inverse(&self) -> Result<PiElem> {
        Ok(PiElem { rep: self.rep.inverse()? })
    }
}

/// A class representative in `SL_2(base)` modulo the subgroup of matrices
/// connected to the identity by a polynomial path.  The class of the
/// matrix is determined by its first column, a unimodular pair; the
/// matrix itself completes that column.
#[derive(Clone, PartialEq, Debug)]
pub struct GammaElem {
    pub rep: SqMatrix,
}

impl GammaElem {
    pub fn new(rep: SqMatrix) -> Result<GammaElem> {
        if rep.n() != 2 {
            return Err(Error::ShapeError("class representatives are 2 x 2".into()));
        }
        rep.assert_special_linear()?;
        Ok(GammaElem { rep })
    }

    pub fn ring(&self) -> &RingCtx {
        self.rep.ring()
    }

    /// First column `(a, b)` of the representative: the unimodular pair.
    pub fn row(&self) -> (Element, Element) {
        (self.rep.get(0, 0).clone(), self.rep.get(1, 0).clone())
    }

    /// Product of classes: multiply the completions; the first column of
    /// the product is `(ac + ed, bc + fd)` for columns `(a, b)`, `(c, d)`
    /// with completion entries `e, f`.
    pub fn product(&self, other: &GammaElem) -> Result<GammaElem> {
        GammaElem::new(self.rep.mul(&other.rep)?)
    }

    pub fn inverse(&self) -> Result<GammaElem> {
        GammaElem::new(self.rep.inverse()?)
    }

    pub fn identity(ring: &RingCtx) -> GammaElem {
        GammaElem { rep: SqMatrix::identity(ring, 2) }
    }
}

// ====================================================================
// The connecting certificate
// ====================================================================

/// Certificate tying a pair of loops `(alpha, beta)` over a base ring to
/// a class over the pullback of the base's interval square.
///
/// The data is a matrix `M(x, t)` over `base[x, t]` subject to five exact
/// boundary identities:
///   1. `M(0, t) = alpha(t)`
///   2. `M(1, t) = beta(t)`
///   3. `M(x, 0) = I`
///   4. `M` at `(0, 1)` is `I`
///   5. `M` at `(1, 1)` is `I`
/// The slice `M(x, 1)` then pairs with the identity to give a class
/// representative over the pullback.
#[derive(Clone, PartialEq, Debug)]
pub struct ChiCertificate {
    pub base: RingCtx,
    pub xvar: String,
    pub tvar: String,
    pub alpha: LoopWitness,
    pub beta: LoopWitness,
    pub matrix: SqMatrix,
}

impl ChiCertificate {
    pub fn new(
        alpha: &LoopWitness,
        beta: &LoopWitness,
        xvar: &str,
        matrix: SqMatrix,
    ) -> Result<ChiCertificate> {
        if alpha.base != beta.base || alpha.var != beta.var {
            return Err(Error::RingMismatch("both loops must share a base and loop variable".into()));
        }
        let base = alpha.base.clone();
        let tvar = alpha.var.clone();
        if xvar == tvar {
            return Err(Error::Invalid("interpolation variable must differ from the loop variable".into()));
        }
        let expected = base.extend(&[xvar, &tvar])?;
        if matrix.ring() != &expected {
            return Err(Error::RingMismatch(format!(
                "certificate matrix lives in {} but should live in {}",
                matrix.ring(),
                expected
            )));
        }
        Ok(ChiCertificate { base, xvar: xvar.to_string(), tvar, alpha: alpha.clone(), beta: beta.clone(), matrix })
    }

    /// The canonical certificate `M(x, t) = alpha((1 - x) t) * beta(x t)`.
    pub fn canonical(alpha: &LoopWitness, beta: &LoopWitness, xvar: &str) -> Result<ChiCertificate> {
        if alpha.base != beta.base || alpha.var != beta.var {
            return Err(Error::RingMismatch("both loops must share a base and loop variable".into()));
        }
        let tvar = alpha.var.clone();
        let ring = alpha.base.extend(&[xvar, &tvar])?;
        let x = Element::parse(&ring, xvar)?;
        let t = Element::parse(&ring, &tvar)?;
        let one = Element::one(&ring);
        let shrink = one.sub(&x)?.mul(&t)?;
        let grow = x.mul(&t)?;
        let a = alpha.matrix.extend_to(&ring)?.subst_var(&tvar, &shrink)?;
        let b = beta.matrix.extend_to(&ring)?.subst_var(&tvar, &grow)?;
        ChiCertificate::new(alpha, beta, xvar, a.mul(&b)?)
    }

    /// All five boundary identities plus special linearity, by name.
    pub fn checklist(&self) -> Result<Vec<Check>> {
        let mut checks = Vec::new();
        checks.push(Check::new("certificate matrix has determinant one", self.matrix.det()?.is_one()));
        let tring = self.base.extend(&[&self.tvar])?;
        let at_x0 = self
            .matrix
            .subst_var_rat(&self.xvar, &Rat::zero())?
            .restrict_to(&tring)?;
        checks.push(Check::new("slice at x = 0 equals the first loop", at_x0 == self.alpha.matrix));
        let at_x1 = self
            .matrix
            .subst_var_rat(&self.xvar, &Rat::one())?
            .restrict_to(&tring)?;
        checks.push(Check::new("slice at x = 1 equals the second loop", at_x1 == self.beta.matrix));
        let at_t0 = self.matrix.subst_var_rat(&self.tvar, &Rat::zero())?;
        checks.push(Check::new("slice at t = 0 is the identity", at_t0.is_identity()));
        let at_01 = self
            .matrix
            .subst_var_rat(&self.xvar, &Rat::zero())?
            .subst_var_rat(&self.tvar, &Rat::one())?;
        checks.push(Check::new("corner (0, 1) is the identity", at_01.is_identity()));
        let at_11 = self
            .matrix
            .subst_var_rat(&self.xvar, &Rat::one())?
            .subst_var_rat(&self.tvar, &Rat::one())?;
        checks.push(Check::new("corner (1, 1) is the identity", at_11.is_identity()));
        Ok(checks)
    }

    pub fn verify(&self) -> Result<()> {
        self.alpha.verify()?;
        self.beta.verify()?;
        first_failure(&self.checklist()?)
    }

    /// The slice `M(x, 1)` over `base[x]`.
    pub fn image_rep(&self) -> Result<SqMatrix> {
        let xring = self.base.extend(&[&self.xvar])?;
        self.matrix.subst_var_rat(&self.tvar, &Rat::one())?.restrict_to(&xring)
    }

    /// The pullback class `(M(x, 1), I)` over the given interval square.
    pub fn class_over(&self, square: &MilnorSquare) -> Result<GammaElem> {
        let expected_right = self.base.extend(&[&self.xvar])?;
        if square.right != expected_right || square.left != self.base {
            return Err(Error::RingMismatch(format!(
                "square `{}` does not match the certificate base {}",
                square.label, self.base
            )));
        }
        let rep = SqMatrix::fibre(
            square.total(),
            &self.image_rep()?,
            &SqMatrix::identity(&self.base, 2),
        )?;
        GammaElem::new(rep)
    }

    /// Certificate for the pointwise products of the two loop pairs: the
    /// matrix product of the certificates is again a certificate.
    pub fn product(&self, other: &ChiCertificate) -> Result<ChiCertificate> {
        if self.base != other.base || self.xvar != other.xvar || self.tvar != other.tvar {
            return Err(Error::RingMismatch("certificates must share base and variables".into()));
        }
        ChiCertificate::new(
            &self.alpha.product(&other.alpha)?,
            &self.beta.product(&other.beta)?,
            &self.xvar,
            self.matrix.mul(&other.matrix)?,
        )
    }
}

// ====================================================================
// Mayer-Vietoris maps
// ====================================================================

/// Project a loop over a pullback onto its two legs.
pub fn psi1(aloop: &LoopWitness) -> Result<(LoopWitness, LoopWitness)> {
    let square = aloop
        .base
        .square()
        .ok_or_else(|| Error::UnsupportedRing(format!("{} is not a fibre product", aloop.base)))?
        .clone();
    let right = LoopWitness::new(square.right.clone(), &aloop.var, aloop.matrix.fibre_right()?)?;
    let left = LoopWitness::new(square.left.clone(), &aloop.var, aloop.matrix.fibre_left()?)?;
    Ok((right, left))
}

/// Difference map on loops: `(b, c) -> f(b) * g(c)^(-1)` over the common
/// ring.
pub fn psi2(square: &MilnorSquare, b: &LoopWitness, c: &LoopWitness) -> Result<LoopWitness> {
    if b.base != square.right || c.base != square.left || b.var != c.var {
        return Err(Error::RingMismatch("loops must live on the two legs of the square".into()));
    }
    let f = square.f.extend(&[&b.var])?;
    let g = square.g.extend(&[&b.var])?;
    let fb = b.matrix.hom_apply(&f)?;
    let gc = c.matrix.hom_apply(&g)?;
    LoopWitness::new(square.common.clone(), &b.var, fb.mul(&gc.inverse()?)?)
}

/// Project a pullback class onto its two legs.
pub fn phi1(a: &GammaElem) -> Result<(GammaElem, GammaElem)> {
    if a.ring().square().is_none() {
        return Err(Error::UnsupportedRing(format!("{} is not a fibre product", a.ring())));
    }
    Ok((GammaElem::new(a.rep.fibre_right()?)?, GammaElem::new(a.rep.fibre_left()?)?))
}

/// Difference map on classes: `(b, c) -> f(b) * g(c)^(-1)` over the
/// common ring.
pub fn phi2(square: &MilnorSquare, b: &GammaElem, c: &GammaElem) -> Result<GammaElem> {
    if b.ring() != &square.right || c.ring() != &square.left {
        return Err(Error::RingMismatch("classes must live on the two legs of the square".into()));
    }
    let fb = b.rep.hom_apply(&square.f)?;
    let gc = c.rep.hom_apply(&square.g)?;
    GammaElem::new(fb.mul(&gc.inverse()?)?)
}

/// For a loop that genuinely comes from the pullback, the composite of
/// projection and difference is literally the identity loop.
pub fn psi_roundtrip(aloop: &LoopWitness) -> Result<(LoopWitness, HomotopyWitness, Vec<Check>)> {
    let square = aloop.base.square().unwrap().clone();
    let (b, c) = psi1(aloop)?;
    let d = psi2(&square, &b, &c)?;
    let mut checks = vec![Check::new(
        "difference of the two projections is literally the identity loop",
        d.matrix.is_identity(),
    )];
    let svar = fresh_var(&d.base, &[&d.var]);
    let witness = HomotopyWitness::constant_identity(&d.base, &d.var, &svar, d.matrix.n())?;
    checks.push(Check::new("constant homotopy certifies triviality", {
        witness.verify().is_ok() && witness.to_loop()?.matrix == d.matrix
    }));
    Ok((d, witness, checks))
}

/// For a class that genuinely comes from the pullback, the composite of
/// projection and difference is literally the identity.
pub fn phi_roundtrip(a: &GammaElem) -> Result<(GammaElem, PathWitness, Vec<Check>)> {
    let square = a
        .ring()
        .square()
        .ok_or_else(|| Error::UnsupportedRing(format!("{} is not a fibre product", a.ring())))?
        .clone();
    let (b, c) = phi1(a)?;
    let d = phi2(&square, &b, &c)?;
    let mut checks = vec![Check::new(
        "difference of the two projections is literally the identity",
        d.rep.is_identity(),
    )];
    let tvar = fresh_var(&square.common, &[]);
    let path = PathWitness::new(
        square.common.clone(),
        &tvar,
        SqMatrix::identity(&square.common.extend(&[&tvar])?, 2),
    )?;
    checks.push(Check::new("constant path certifies triviality", path.verify().is_ok()));
    Ok((d, path, checks))
}

/// A variable name not used by the ring or the reserved list.
fn fresh_var(ring: &RingCtx, reserved: &[&str]) -> String {
    let in_ring = |name: &str| match ring.kind() {
        RingKind::Poly { vars } | RingKind::Quotient { vars, .. } => vars.contains(name),
        RingKind::DirectSum { parts } => parts.iter().any(|p| match p.vars() {
            Some(v) => v.contains(name),
            None => false,
        }),
        RingKind::Fibre { square } => [&square.right, &square.left, &square.common]
            .iter()
            .any(|r| r.vars().map(|v| v.contains(name)).unwrap_or(false)),
    };
    for cand in ["S", "T", "U", "V", "W"] {
        if !in_ring(cand) && !reserved.contains(&cand) {
            return cand.to_string();
        }
    }
    let mut k = 0;
    loop {
        let cand = format!("S{k}");
        if !in_ring(&cand) && !reserved.iter().any(|r| **r == cand) {
            return cand;
        }
        k += 1;
    }
}

// ====================================================================
// Interval squares: structure recognition
// ====================================================================

/// For a square `base[x] -(eval 0,1)-> base (+) base <-(diag)- base`,
/// return the interval variable `x`.
pub fn require_interval_square(square: &MilnorSquare) -> Result<String> {
    let rv = square
        .right
        .vars()
        .ok_or_else(|| Error::UnsupportedRing("right leg must be polynomial-like".into()))?;
    let lv = square
        .left
        .vars()
        .ok_or_else(|| Error::UnsupportedRing("left leg must be polynomial-like".into()))?;
    let extra: Vec<&String> = rv.names().iter().filter(|n| !lv.contains(n)).collect();
    if extra.len() != 1 {
        return Err(Error::UnsupportedRing(
            "the right leg must add exactly one interval variable".into(),
        ));
    }
    let x = extra[0].clone();
    match &square.f.kind {
        HomKind::Evaluation { points } if points.len() == 2 => {
            let want0 = points[0].get(&x) == Some(&Rat::zero()) && points[0].len() == 1;
            let want1 = points[1].get(&x) == Some(&Rat::one()) && points[1].len() == 1;
            if !(want0 && want1) {
                return Err(Error::UnsupportedRing(
                    "the surjective leg must evaluate the interval variable at 0 and 1".into(),
                ));
            }
        }
        _ => {
            return Err(Error::UnsupportedRing(
                "the surjective leg must be a two-point evaluation".into(),
            ))
        }
    }
    match &square.g.kind {
        HomKind::Diagonal { copies: 2 } => {}
        _ => {
            return Err(Error::UnsupportedRing(
                "the other leg must be the diagonal embedding".into(),
            ))
        }
    }
    Ok(x)
}

// ====================================================================
// Exactness witness: kernel of the loop difference map
// ====================================================================

/// Output of [`ker_psi2_witness`]: a loop over the pullback hitting the
/// given pair, with an explicit deformation on the right leg.
#[derive(Clone, Debug)]
pub struct KerPsi2Result {
    /// Loop over the pullback ring.
    pub fibre_loop: LoopWitness,
    /// Homotopy over the right leg from the input loop to the right
    /// component of `fibre_loop`.
    pub deformation: HomotopyWitness,
    pub checks: Vec<Check>,
}

/// Exactness at the middle of the loop sequence, for interval squares:
/// given loops `b` (right leg) and `c` (left leg) whose difference is
/// null-homotopic on both evaluation components, produce a pullback loop
/// projecting to `c` exactly and to `b` up to an explicit homotopy.
///
/// `gamma` and `gamma_prime` must connect the identity to the two
/// components of the difference `psi2(b, c)`.
pub fn ker_psi2_witness(
    square: &MilnorSquare,
    b: &LoopWitness,
    c: &LoopWitness,
    gamma: &HomotopyWitness,
    gamma_prime: &HomotopyWitness,
) -> Result<KerPsi2Result> {
    let x = require_interval_square(square)?;
    let tvar = b.var.clone();
    let mut checks = Vec::new();

    b.verify()?;
    c.verify()?;
    gamma.verify()?;
    gamma_prime.verify()?;

    // The difference splits over the two evaluation components.
    let diff = psi2(square, b, c)?;
    let parts = split_direct_loop(&diff)?;
    checks.push(Check::new(
        "first homotopy starts at the identity loop",
        gamma.from_loop()?.matrix.is_identity(),
    ));
    checks.push(Check::new(
        "second homotopy starts at the identity loop",
        gamma_prime.from_loop()?.matrix.is_identity(),
    ));
    checks.push(Check::new(
        "first homotopy ends at the x = 0 component of the difference",
        gamma.to_loop()? == parts[0],
    ));
    checks.push(Check::new(
        "second homotopy ends at the x = 1 component of the difference",
        gamma_prime.to_loop()? == parts[1],
    ));

    // theta(x, t) = gamma(t, 1 - x)^(-1) * gamma'(t, x)^(-1) * b(x)(t).
    let r2 = square.right.extend(&[&tvar])?;
    let svar = gamma.svar.clone();
    let rall = r2.extend(&[&svar])?;
    let one = Element::one(&rall);
    let xe = Element::parse(&rall, &x)?;
    let gm = gamma
        .matrix
        .extend_to(&rall)?
        .subst_var(&svar, &one.sub(&xe)?)?
        .restrict_to(&r2)?;
    let gp = gamma_prime
        .matrix
        .extend_to(&rall)?
        .subst_var(&svar, &xe)?
        .restrict_to(&r2)?;
    let theta = gm.inverse()?.mul(&gp.inverse()?)?.mul(&b.matrix)?;

    // The pullback loop pairs theta with c; the glue re-checks that theta
    // restricts to c at both ends of the interval.
    let sq_t = square.extend(&[&tvar])?;
    let paired = SqMatrix::fibre(sq_t.total(), &theta, &c.matrix)?;
    let fibre_loop = LoopWitness::new(square.total(), &tvar, paired)?;
    checks.push(Check::new("pullback loop is a loop", fibre_loop.verify().is_ok()));
    checks.push(Check::new(
        "left projection reproduces the left input exactly",
        fibre_loop.matrix.fibre_left()? == c.matrix,
    ));

    // Deformation M(x, t, s) = gamma(t, (1-x)s)^(-1) gamma'(t, xs)^(-1) b.
    let se = Element::parse(&rall, &svar)?;
    let gm_s = gamma
        .matrix
        .extend_to(&rall)?
        .subst_var(&svar, &one.sub(&xe)?.mul(&se)?)?;
    let gp_s = gamma_prime.matrix.extend_to(&rall)?.subst_var(&svar, &xe.mul(&se)?)?;
    let deform = gm_s
        .inverse()?
        .mul(&gp_s.inverse()?)?
        .mul(&b.matrix.extend_to(&rall)?)?;
    let deformation = HomotopyWitness::new(square.right.clone(), &tvar, &svar, deform)?;
    checks.push(Check::new("deformation is pinned at the loop endpoints", deformation.verify().is_ok()));
    checks.push(Check::new(
        "deformation starts at the right input loop",
        deformation.from_loop()?.matrix == b.matrix,
    ));
    checks.push(Check::new(
        "deformation ends at the right projection of the pullback loop",
        deformation.to_loop()?.matrix == theta,
    ));

    Ok(KerPsi2Result { fibre_loop, deformation, checks })
}

// ====================================================================
// Exactness witness: kernel of the class projection
// ====================================================================

/// Output of [`ker_phi1_witness`]: a loop pair over the common ring whose
/// connecting certificate hits the input class, with the relating path.
#[derive(Clone, Debug)]
pub struct KerPhi1Result {
    /// Certificate for the constructed loop pair over the base ring.
    pub certificate: ChiCertificate,
    /// The same pair packaged as a loop over the common (direct-sum) ring.
    pub d_loop: LoopWitness,
    /// Class of `(M(x, 1), I)` over the pullback.
    pub image: GammaElem,
    /// Path in the pullback from the identity whose endpoint carries the
    /// input representative to the image representative.
    pub relating_path: PathWitness,
    pub checks: Vec<Check>,
}

/// Exactness at the pullback-class term, for interval squares: given a
/// class over the pullback that dies on both legs — witnessed by paths
/// `theta` (identity to the right part) and `sigma` (identity to the left
/// part) — produce a loop pair over the base whose connecting certificate
/// reproduces the class, up to the explicit relating path.
pub fn ker_phi1_witness(
    square: &MilnorSquare,
    input: &GammaElem,
    theta: &PathWitness,
    sigma: &PathWitness,
) -> Result<KerPhi1Result> {
    let x = require_interval_square(square)?;
    if input.ring() != &square.total() {
        return Err(Error::RingMismatch("class must live over the pullback of the square".into()));
    }
    let tvar = theta.var.clone();
    if sigma.var != tvar {
        return Err(Error::RingMismatch("both paths must use the same variable".into()));
    }
    let mut checks = Vec::new();

    theta.verify()?;
    sigma.verify()?;
    let alpha = input.rep.fibre_right()?;
    let beta = input.rep.fibre_left()?;
    checks.push(Check::new("right path ends at the right part of the class", theta.end()? == alpha));
    checks.push(Check::new("left path ends at the left part of the class", sigma.end()? == beta));

    // M(x, t) = sigma(t)^(-1) * theta(x, t) over the right leg.
    let r2 = square.right.extend(&[&tvar])?;
    let sigma_ext = sigma.matrix.extend_to(&r2)?;
    let m = sigma_ext.inverse()?.mul(&theta.matrix.extend_to(&r2)?)?;

    // The loop pair over the base: slices of M at x = 0 and x = 1.
    let tring = square.left.extend(&[&tvar])?;
    let m0 = m.subst_var_rat(&x, &Rat::zero())?.restrict_to(&tring)?;
    let m1 = m.subst_var_rat(&x, &Rat::one())?.restrict_to(&tring)?;
    let loop0 = LoopWitness::new(square.left.clone(), &tvar, m0)?;
    let loop1 = LoopWitness::new(square.left.clone(), &tvar, m1)?;
    checks.push(Check::new("slice at x = 0 is a loop", loop0.verify().is_ok()));
    checks.push(Check::new("slice at x = 1 is a loop", loop1.verify().is_ok()));

    // M itself certifies the pair (loop0, loop1).
    let certificate = ChiCertificate::new(&loop0, &loop1, &x, m)?;
    let cert_checks = certificate.checklist()?;
    checks.push(Check::new(
        "connecting certificate satisfies all boundary identities",
        cert_checks.iter().all(|c| c.ok),
    ));

    // The same pair as a loop over the common ring.
    let d_loop = join_direct_loop(&square.common, &[loop0, loop1])?;
    checks.push(Check::new("loop pair assembles over the common ring", d_loop.verify().is_ok()));

    // Image class and the relating path (sigma^(-1), sigma^(-1)).
    let image = certificate.class_over(square)?;
    let sq_t = square.extend(&[&tvar])?;
    let sinv = sigma.matrix.inverse()?;
    let sinv_right = sinv.extend_to(&sq_t.right)?;
    let path_matrix = SqMatrix::fibre(sq_t.total(), &sinv_right, &sinv)?;
    let relating_path = PathWitness::new(square.total(), &tvar, path_matrix)?;
    checks.push(Check::new("relating path starts at the identity", relating_path.verify().is_ok()));
    let moved = relating_path.end()?.mul(&input.rep)?;
    checks.push(Check::new(
        "relating endpoint carries the input representative to the image representative",
        moved == image.rep,
    ));

    Ok(KerPhi1Result { certificate, d_loop, image, relating_path, checks })
}

// ====================================================================
// Exactness witness: kernel of the class difference map
// ====================================================================

/// Output of [`ker_phi2_witness`]: a pullback class projecting to the two
/// inputs, with the explicit path deforming the right projection.
#[derive(Clone, Debug)]
pub struct KerPhi2Result {
    /// Class over the pullback ring.
    pub a_elem: GammaElem,
    /// Path over the right leg from the identity; its endpoint carries
    /// the right input representative to the right projection.
    pub b_path: PathWitness,
    pub checks: Vec<Check>,
}

/// Exactness at the two-leg class term, for interval squares: given
/// classes `b` (right leg, representative `alpha(x)`) and `c` (left leg,
/// representative `beta`) whose difference dies over the common ring —
/// witnessed by paths `sigma` from the identity to `beta * alpha(0)^(-1)`
/// and `sigma_prime` to `beta * alpha(1)^(-1)` — produce a pullback class
/// projecting to `c` exactly and to `b` up to an explicit path.
pub fn ker_phi2_witness(
    square: &MilnorSquare,
    b: &GammaElem,
    c: &GammaElem,
    sigma: &PathWitness,
    sigma_prime: &PathWitness,
) -> Result<KerPhi2Result> {
    let x = require_interval_square(square)?;
    if b.ring() != &square.right || c.ring() != &square.left {
        return Err(Error::RingMismatch("classes must live on the two legs of the square".into()));
    }
    let tvar = sigma.var.clone();
    if sigma_prime.var != tvar {
        return Err(Error::RingMismatch("both paths must use the same variable".into()));
    }
    let mut checks = Vec::new();

    sigma.verify()?;
    sigma_prime.verify()?;
    let alpha = &b.rep;
    let beta = &c.rep;
    let alpha0 = alpha.subst_var_rat(&x, &Rat::zero())?.restrict_to(&square.left)?;
    let alpha1 = alpha.subst_var_rat(&x, &Rat::one())?.restrict_to(&square.left)?;
    checks.push(Check::new(
        "first path endpoint times alpha(0) recovers beta",
        sigma.end()?.mul(&alpha0)? == *beta,
    ));
    checks.push(Check::new(
        "second path endpoint times alpha(1) recovers beta",
        sigma_prime.end()?.mul(&alpha1)? == *beta,
    ));

    // gamma(x) = sigma'(x) * sigma(1 - x) * alpha(x) over the right leg.
    let r2 = square.left.extend(&[&x, &tvar])?;
    let xe = Element::parse(&r2, &x)?;
    let te = Element::parse(&r2, &tvar)?;
    let one = Element::one(&r2);
    let subst = |path: &PathWitness, at: &Element| -> Result<SqMatrix> {
        path.matrix.extend_to(&r2)?.subst_var(&tvar, at)
    };
    let sp_x = subst(sigma_prime, &xe)?.restrict_to(&square.right)?;
    let s_1mx = subst(sigma, &one.sub(&xe)?)?.restrict_to(&square.right)?;
    let gamma = sp_x.mul(&s_1mx)?.mul(alpha)?;

    // theta(x, t) = sigma'(x t) * sigma((1 - x) t): a path over the right
    // leg whose endpoint carries alpha to gamma.
    let sp_xt = subst(sigma_prime, &xe.mul(&te)?)?;
    let s_1mxt = subst(sigma, &one.sub(&xe)?.mul(&te)?)?;
    let theta = sp_xt.mul(&s_1mxt)?;
    let b_path = PathWitness::new(square.right.clone(), &tvar, theta)?;
    checks.push(Check::new("deforming path starts at the identity", b_path.verify().is_ok()));
    checks.push(Check::new(
        "deforming path endpoint carries the right input to the right projection",
        b_path.end()?.mul(alpha)? == gamma,
    ));

    // The pullback class pairs gamma with beta; the glue re-checks the
    // matching endpoints gamma(0) = gamma(1) = beta.
    let rep = SqMatrix::fibre(square.total(), &gamma, beta)?;
    let a_elem = GammaElem::new(rep)?;
    checks.push(Check::new(
        "left projection reproduces the left input exactly",
        a_elem.rep.fibre_left()? == *beta,
    ));

    Ok(KerPhi2Result { a_elem, b_path, checks })
}

// ====================================================================
// Classifying classes over the interval square of the rationals
// ====================================================================

/// Classify a class over the pullback of the rationals' interval square
/// by factoring both parts into elementary matrices: returns the full
/// exactness witness relating the class to a connecting certificate.
///
/// Only the interval square over the rationals is supported here, because
/// the elementary factorization works over at most one variable; over
/// larger bases, supply explicit paths to [`ker_phi1_witness`] instead.
pub fn circle_class(input: &GammaElem) -> Result<KerPhi1Result> {
    let square = input
        .ring()
        .square()
        .ok_or_else(|| Error::UnsupportedRing(format!("{} is not a fibre product", input.ring())))?
        .clone();
    let x = require_interval_square(&square)?;
    let rv = square.right.vars().unwrap();
    if rv.len() != 1 {
        return Err(Error::UnsupportedRing(
            "automatic classification needs the rationals as base; supply explicit paths instead"
                .into(),
        ));
    }
    let tvar = fresh_var(&square.right, &[&x]);

    let alpha = input.rep.fibre_right()?;
    let beta = input.rep.fibre_left()?;

    // Path to beta from its elementary factorization.
    let beta_factors = crate::matrix::sl2_factor_euclidean(&beta)?;
    let sigma = path_from_factors(&square.left, &tvar, &beta_factors)?;

    // Path to beta^(-1) alpha(x), then shifted to end at alpha(x).
    let beta_inv = beta.inverse()?.extend_to(&square.right)?;
    let m = beta_inv.mul(&alpha)?;
    let m_factors = crate::matrix::sl2_factor_euclidean(&m)?;
    let to_m = path_from_factors(&square.right, &tvar, &m_factors)?;
    let r2 = square.right.extend(&[&tvar])?;
    let theta_matrix = sigma.matrix.extend_to(&r2)?.mul(&to_m.matrix)?;
    let theta = PathWitness::new(square.right.clone(), &tvar, theta_matrix)?;

    ker_phi1_witness(&square, input, &theta, &sigma)
}

// ====================================================================
// Triviality over quotient-glued squares
// ====================================================================

/// Output of [`sphere_trivial_witness`]: a path over the pullback from
/// the identity to the given pair.
#[derive(Clone, Debug)]
pub struct SphereTrivialResult {
    pub path: PathWitness,
    pub endpoint: SqMatrix,
    pub checks: Vec<Check>,
}

/// Glue a path on each leg into a path over the pullback, after
/// correcting by loops: the pair `(eta^(-1) theta, delta^(-1) gamma)`
/// must agree over the common ring, exactly.  Since the corrections are
/// loops, the endpoint is still `(theta(1), gamma(1))`.
///
/// Fails with `AssumptionUnmet` when the corrected paths do not glue.
pub fn sphere_trivial_witness(
    square: &MilnorSquare,
    theta: &PathWitness,
    gamma: &PathWitness,
    eta: &LoopWitness,
    delta: &LoopWitness,
) -> Result<SphereTrivialResult> {
    if theta.base != square.right || gamma.base != square.left {
        return Err(Error::RingMismatch("paths must live on the two legs of the square".into()));
    }
    if eta.base != square.right || delta.base != square.left {
        return Err(Error::RingMismatch("correction loops must live on the two legs".into()));
    }
    let tvar = theta.var.clone();
    if gamma.var != tvar || eta.var != tvar || delta.var != tvar {
        return Err(Error::RingMismatch("all inputs must share one path variable".into()));
    }
    let mut checks = Vec::new();
    theta.verify()?;
    gamma.verify()?;
    eta.verify()?;
    delta.verify()?;

    let right = eta.matrix.inverse()?.mul(&theta.matrix)?;
    let left = delta.matrix.inverse()?.mul(&gamma.matrix)?;
    let sq_t = square.extend(&[&tvar])?;
    let glued = SqMatrix::fibre(sq_t.total(), &right, &left).map_err(|e| match e {
        Error::GlueMismatch { f_value, g_value } => Error::AssumptionUnmet(format!(
            "corrected paths do not agree over the common ring: {f_value} vs {g_value}"
        )),
        other => other,
    })?;
    let path = PathWitness::new(square.total(), &tvar, glued)?;
    checks.push(Check::new("glued path starts at the identity", path.verify().is_ok()));

    let endpoint = path.end()?;
    checks.push(Check::new(
        "endpoint right part is the right path endpoint",
        endpoint.fibre_right()? == theta.end()?,
    ));
    checks.push(Check::new(
        "endpoint left part is the left path endpoint",
        endpoint.fibre_left()? == gamma.end()?,
    ));
    Ok(SphereTrivialResult { path, endpoint, checks })
}

// ====================================================================
// Tests
// ====================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::sl2_factor_euclidean;
    use crate::poly::rat_int;
    use crate::ring::builtin_square;

    fn q() -> RingCtx {
        RingCtx::rationals()
    }

    fn elem_loop(base: &RingCtx, var: &str, i: usize, j: usize, coeff: &str) -> LoopWitness {
        // E_ij(c * t * (1 - t)) is a loop for any coefficient c.
        let ext = base.extend(&[var]).unwrap();
        let c = Element::parse(&ext, coeff).unwrap();
        let t = Element::parse(&ext, var).unwrap();
        let pin = t.sub(&t.mul(&t).unwrap()).unwrap();
        let f = ElemFactor::new(i, j, c.mul(&pin).unwrap()).unwrap();
        LoopWitness::new(base.clone(), var, assemble(&ext, 2, &[f]).unwrap()).unwrap()
    }

    #[test]
    fn canonical_certificate_satisfies_all_boundaries() {
        let alpha = elem_loop(&q(), "T", 0, 1, "1");
        let beta = elem_loop(&q(), "T", 1, 0, "2");
        let cert = ChiCertificate::canonical(&alpha, &beta, "X").unwrap();
        cert.verify().unwrap();
        for c in cert.checklist().unwrap() {
            assert!(c.ok, "{}", c.name);
        }
        // The image representative pairs with the identity over the square.
        let square = builtin_square("circle", None).unwrap();
        let class = cert.class_over(&square).unwrap();
        assert!(class.rep.fibre_left().unwrap().is_identity());
    }

    #[test]
    fn certificate_product_is_again_a_certificate() {
        let a1 = elem_loop(&q(), "T", 0, 1, "1");
        let b1 = elem_loop(&q(), "T", 1, 0, "2");
        let a2 = elem_loop(&q(), "T", 1, 0, "-1");
        let b2 = elem_loop(&q(), "T", 0, 1, "3");
        let c1 = ChiCertificate::canonical(&a1, &b1, "X").unwrap();
        let c2 = ChiCertificate::canonical(&a2, &b2, "X").unwrap();
        let prod = c1.product(&c2).unwrap();
        prod.verify().unwrap();
        // The product certificate is generally not the canonical one for
        // the product loops, but it certifies exactly the same pair.
        assert_eq!(prod.alpha.matrix, a1.matrix.mul(&a2.matrix).unwrap());
        assert_eq!(prod.beta.matrix, b1.matrix.mul(&b2.matrix).unwrap());
    }

    #[test]
    fn class_product_follows_the_first_column_rule() {
        // Over an 8-variable ring, the product of two completions has
        // first column (ac + ed, bc + fd).
        let ring = RingCtx::poly(&["a", "b", "c", "d", "e", "f", "g", "h"]).unwrap();
        let sigma = SqMatrix::parse(&ring, &[vec!["a", "e"], vec!["b", "f"]]).unwrap();
        let tau = SqMatrix::parse(&ring, &[vec!["c", "g"], vec!["d", "h"]]).unwrap();
        let prod = sigma.mul(&tau).unwrap();
        assert_eq!(prod.get(0, 0), &Element::parse(&ring, "a*c + e*d").unwrap());
        assert_eq!(prod.get(1, 0), &Element::parse(&ring, "b*c + f*d").unwrap());
    }

    #[test]
    fn projections_of_a_pullback_loop_cancel_exactly() {
        // rho(x, t) = E12(x(1-x)t(1-t)) * beta(t) glues with beta.
        let square = builtin_square("circle", None).unwrap();
        let sq_t = square.extend(&["T"]).unwrap();
        let r2 = sq_t.right.clone();
        let mu = {
            let r = Element::parse(&r2, "X*(1 - X)*T*(1 - T)").unwrap();
            assemble(&r2, 2, &[ElemFactor::new(0, 1, r).unwrap()]).unwrap()
        };
        let beta = elem_loop(&square.left, "T", 1, 0, "3");
        let rho = mu.mul(&beta.matrix.extend_to(&r2).unwrap()).unwrap();
        let paired = SqMatrix::fibre(sq_t.total(), &rho, &beta.matrix).unwrap();
        let aloop = LoopWitness::new(square.total(), "T", paired).unwrap();
        aloop.verify().unwrap();

        let (d, witness, checks) = psi_roundtrip(&aloop).unwrap();
        assert!(d.matrix.is_identity());
        assert!(all_ok(&checks));
        witness.verify().unwrap();
    }

    #[test]
    fn projections_of_a_pullback_class_cancel_exactly() {
        let square = builtin_square("circle", None).unwrap();
        let total = square.total();
        // alpha(x) = E12(x - x^2) * C with constant C, paired with C.
        let c = SqMatrix::parse(&square.left, &[vec!["1", "0"], vec!["3", "1"]]).unwrap();
        let e = SqMatrix::parse(&square.right, &[vec!["1", "X - X^2"], vec!["0", "1"]]).unwrap();
        let alpha = e.mul(&c.extend_to(&square.right).unwrap()).unwrap();
        let rep = SqMatrix::fibre(total, &alpha, &c).unwrap();
        let a = GammaElem::new(rep).unwrap();
        let (d, path, checks) = phi_roundtrip(&a).unwrap();
        assert!(d.rep.is_identity());
        assert!(all_ok(&checks));
        path.verify().unwrap();
    }

    #[test]
    fn loop_difference_kernel_witness_reconstructs_the_pair() {
        let square = builtin_square("circle", None).unwrap();
        let base = square.left.clone();
        // Homotopies from the identity: entries vanish at s = 0.
        let h2 = base.extend(&["T", "S"]).unwrap();
        let gamma = {
            let r = Element::parse(&h2, "T*(1 - T)*S").unwrap();
            let m = assemble(&h2, 2, &[ElemFactor::new(0, 1, r).unwrap()]).unwrap();
            HomotopyWitness::new(base.clone(), "T", "S", m).unwrap()
        };
        let gamma_prime = {
            let r = Element::parse(&h2, "2*T*(1 - T)*S").unwrap();
            let m = assemble(&h2, 2, &[ElemFactor::new(1, 0, r).unwrap()]).unwrap();
            HomotopyWitness::new(base.clone(), "T", "S", m).unwrap()
        };
        let beta = elem_loop(&base, "T", 1, 0, "1");

        // b(x)(t) = gamma(t, 1-x) * gamma'(t, x) * mu(x, t) * beta(t).
        let r2 = square.right.extend(&["T"]).unwrap();
        let rall = r2.extend(&["S"]).unwrap();
        let one = Element::one(&rall);
        let xe = Element::parse(&rall, "X").unwrap();
        let gm = gamma
            .matrix
            .extend_to(&rall)
            .unwrap()
            .subst_var("S", &one.sub(&xe).unwrap())
            .unwrap()
            .restrict_to(&r2)
            .unwrap();
        let gp = gamma_prime
            .matrix
            .extend_to(&rall)
            .unwrap()
            .subst_var("S", &xe)
            .unwrap()
            .restrict_to(&r2)
            .unwrap();
        let mu = {
            let r = Element::parse(&r2, "X*(1 - X)*T*(1 - T)").unwrap();
            assemble(&r2, 2, &[ElemFactor::new(0, 1, r).unwrap()]).unwrap()
        };
        let bmat = gm
            .mul(&gp)
            .unwrap()
            .mul(&mu)
            .unwrap()
            .mul(&beta.matrix.extend_to(&r2).unwrap())
            .unwrap();
        let b = LoopWitness::new(square.right.clone(), "T", bmat).unwrap();

        let out = ker_psi2_witness(&square, &b, &beta, &gamma, &gamma_prime).unwrap();
        for c in &out.checks {
            assert!(c.ok, "{}", c.name);
        }
    }

    #[test]
    fn class_projection_kernel_witness_via_classification() {
        let square = builtin_square("circle", None).unwrap();
        // alpha(x) = E12(x - x^2) * beta with beta the quarter turn.
        let beta = SqMatrix::parse(&square.left, &[vec!["0", "1"], vec!["-1", "0"]]).unwrap();
        let e = SqMatrix::parse(&square.right, &[vec!["1", "X - X^2"], vec!["0", "1"]]).unwrap();
        let alpha = e.mul(&beta.extend_to(&square.right).unwrap()).unwrap();
        let rep = SqMatrix::fibre(square.total(), &alpha, &beta).unwrap();
        let input = GammaElem::new(rep).unwrap();

        let out = circle_class(&input).unwrap();
        for c in &out.checks {
            assert!(c.ok, "{}", c.name);
        }
        // The image representative is exactly (beta^(-1) alpha(x), I).
        let expected = beta
            .inverse()
            .unwrap()
            .extend_to(&square.right)
            .unwrap()
            .mul(&alpha)
            .unwrap();
        assert_eq!(out.image.rep.fibre_right().unwrap(), expected);
        assert!(out.image.rep.fibre_left().unwrap().is_identity());
    }

    #[test]
    fn class_difference_kernel_witness_reconstructs_the_classes() {
        let square = builtin_square("circle", None).unwrap();
        // Right class alpha(x), arbitrary elementary product.
        let av = square.right.clone();
        let fa = vec![
            ElemFactor::new(0, 1, Element::parse(&av, "X").unwrap()).unwrap(),
            ElemFactor::new(1, 0, Element::parse(&av, "-2").unwrap()).unwrap(),
        ];
        let alpha = assemble(&av, 2, &fa).unwrap();
        let b = GammaElem::new(alpha.clone()).unwrap();

        // sigma: arbitrary path; beta is forced to be sigma(1) * alpha(0).
        let sigma = path_from_factors(
            &square.left,
            "T",
            &[ElemFactor::new(0, 1, Element::one(&square.left)).unwrap()],
        )
        .unwrap();
        let alpha0 = alpha
            .subst_var_rat("X", &Rat::zero())
            .unwrap()
            .restrict_to(&square.left)
            .unwrap();
        let alpha1 = alpha
            .subst_var_rat("X", &Rat::one())
            .unwrap()
            .restrict_to(&square.left)
            .unwrap();
        let beta = sigma.end().unwrap().mul(&alpha0).unwrap();
        let c = GammaElem::new(beta.clone()).unwrap();

        // sigma' must end at beta * alpha(1)^(-1); factor that endpoint.
        let target = beta.mul(&alpha1.inverse().unwrap()).unwrap();
        let sigma_prime =
            path_from_factors(&square.left, "T", &sl2_factor_euclidean(&target).unwrap()).unwrap();

        let out = ker_phi2_witness(&square, &b, &c, &sigma, &sigma_prime).unwrap();
        for chk in &out.checks {
            assert!(chk.ok, "{}", chk.name);
        }
        assert_eq!(out.a_elem.rep.fibre_left().unwrap(), beta);
    }

    #[test]
    fn glued_paths_over_the_quotient_square() {
        let square = builtin_square("sphere", None).unwrap();
        let total = square.total();
        // A path over the pullback built from pullback-valued shears.
        let rel = Element::parse(&square.right, "X^2 + Y^2 - 1").unwrap();
        let f1 = ElemFactor::new(
            0,
            1,
            Element::fibre(total.clone(), rel, Element::zero(&square.left)).unwrap(),
        )
        .unwrap();
        let two = Element::constant(&total, rat_int(2));
        let f2 = ElemFactor::new(1, 0, two).unwrap();
        let path = path_from_factors(&total, "T", &[f1, f2]).unwrap();
        path.verify().unwrap();

        let theta = PathWitness::new(
            square.right.clone(),
            "T",
            path.matrix.fibre_right().unwrap(),
        )
        .unwrap();
        let gamma = PathWitness::new(
            square.left.clone(),
            "T",
            path.matrix.fibre_left().unwrap(),
        )
        .unwrap();
        let eta = LoopWitness::identity(&square.right, "T", 2).unwrap();
        let delta = LoopWitness::identity(&square.left, "T", 2).unwrap();
        let out = sphere_trivial_witness(&square, &theta, &gamma, &eta, &delta).unwrap();
        for c in &out.checks {
            assert!(c.ok, "{}", c.name);
        }
        assert_eq!(out.endpoint.fibre_right().unwrap(), theta.end().unwrap());

        // A right path that does not project to the left path must be
        // rejected with an unmet-assumption error.
        let bad = PathWitness::new(
            square.right.clone(),
            "T",
            path_from_factors(
                &square.right,
                "T",
                &[ElemFactor::new(0, 1, Element::parse(&square.right, "X").unwrap()).unwrap()],
            )
            .unwrap()
            .matrix,
        )
        .unwrap();
        assert!(matches!(
            sphere_trivial_witness(&square, &bad, &gamma, &eta, &delta).unwrap_err(),
            Error::AssumptionUnmet(_)
        ));
    }

    #[test]
    fn loop_verification_reports_the_failing_endpoint() {
        let base = q();
        let ext = base.extend(&["T"]).unwrap();
        let m = SqMatrix::parse(&ext, &[vec!["1", "T"], vec!["0", "1"]]).unwrap();
        let lw = LoopWitness::new(base, "T", m).unwrap();
        match lw.verify().unwrap_err() {
            Error::NotALoop { var, at, .. } => {
                assert_eq!(var, "T");
                assert_eq!(at, "1");
            }
            other => panic!("expected a loop failure, got {other:?}"),
        }
    }

    #[test]
    fn loop_variable_renaming_round_trips() {
        let lw = elem_loop(&q(), "T", 0, 1, "5");
        let renamed = lw.rename_var("U").unwrap();
        assert_eq!(renamed.var, "U");
        renamed.verify().unwrap();
        assert_eq!(renamed.rename_var("T").unwrap(), lw);
    }
}
