//! Ring contexts, ring homomorphisms and elements in normal form.
//!
//! A [`RingCtx`] is one of: a polynomial ring over the rationals, a quotient
//! of such a ring by a single relation monic in a distinguished variable, a
//! finite direct sum, or the pullback (fibre product) of a [`MilnorSquare`].
//! Elements of a quotient are stored as remainders after division by the
//! relation, so equality is plain structural equality everywhere.
//!
//! Design notes:
//! * Quotients carry exactly one relation; reduction is long division in the
//!   distinguished variable, which is all the catalog rings need.
//! * Fibre elements are pairs `(right, left)` whose images in the common
//!   ring agree; the glue condition is re-checked on every construction.
//! * Homomorphisms are data ([`HomKind`]), so they can be serialized,
//!   extended by fresh variables, and inverted along canonical sections
//!   where one exists.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::{rat_int, Poly, Rat, VarSet};

// ====================================================================
// Ring contexts
// ====================================================================

/// Shared, cheaply clonable description of a ring.
#[derive(Clone, PartialEq, Debug)]
pub struct RingCtx(Arc<RingKind>);

#[derive(Clone, PartialEq, Debug)]
pub enum RingKind {
    /// `Q[vars]`; the empty variable set gives the rationals themselves.
    Poly { vars: VarSet },
    /// `Q[vars] / (relation)`, `relation` monic in `distinguished`.
    Quotient { vars: VarSet, relation: Poly, distinguished: String },
    /// Componentwise arithmetic on a finite list of rings.
    DirectSum { parts: Vec<RingCtx> },
    /// Pullback `{(b, c) | f(b) = g(c)}` of a Milnor square.
    Fibre { square: MilnorSquare },
}

impl RingCtx {
    pub fn rationals() -> RingCtx {
        RingCtx(Arc::new(RingKind::Poly { vars: VarSet::empty() }))
    }

    pub fn poly<S: AsRef<str>>(vars: &[S]) -> Result<RingCtx> {
        Ok(RingCtx(Arc::new(RingKind::Poly { vars: VarSet::new(vars)? })))
    }

    pub fn poly_from(vars: VarSet) -> RingCtx {
        RingCtx(Arc::new(RingKind::Poly { vars }))
    }

    /// Quotient by one relation, which must be monic of positive degree in
    /// the distinguished variable.
    pub fn quotient(vars: VarSet, relation: Poly, distinguished: &str) -> Result<RingCtx> {
        if !vars.contains(distinguished) {
            return Err(Error::UnknownVariable(distinguished.to_string()));
        }
        let relation = relation.restrict_vars(&vars)?;
        let m = relation.degree_in(distinguished);
        if m == 0 {
            return Err(Error::NotMonic(distinguished.to_string()));
        }
        if !relation.coeff_of_power(distinguished, m)?.is_one() {
            return Err(Error::NotMonic(distinguished.to_string()));
        }
        Ok(RingCtx(Arc::new(RingKind::Quotient {
            vars,
            relation,
            distinguished: distinguished.to_string(),
        })))
    }

    pub fn direct_sum(parts: Vec<RingCtx>) -> Result<RingCtx> {
        if parts.is_empty() {
            return Err(Error::Invalid("direct sum needs at least one part".into()));
        }
        Ok(RingCtx(Arc::new(RingKind::DirectSum { parts })))
    }

    pub fn fibre(square: MilnorSquare) -> RingCtx {
        RingCtx(Arc::new(RingKind::Fibre { square }))
    }

    pub fn kind(&self) -> &RingKind {
        &self.0
    }

    /// Variable set for polynomial-like rings (polynomial or quotient).
    pub fn vars(&self) -> Option<&VarSet> {
        match self.kind() {
            RingKind::Poly { vars } | RingKind::Quotient { vars, .. } => Some(vars),
            _ => None,
        }
    }

    pub fn is_poly_like(&self) -> bool {
        self.vars().is_some()
    }

    pub fn square(&self) -> Option<&MilnorSquare> {
        match self.kind() {
            RingKind::Fibre { square } => Some(square),
            _ => None,
        }
    }

    pub fn direct_parts(&self) -> Option<&[RingCtx]> {
        match self.kind() {
            RingKind::DirectSum { parts } => Some(parts),
            _ => None,
        }
    }

    /// The same ring with fresh polynomial variables adjoined everywhere
    /// (components of sums and fibre products are extended in lockstep).
    pub fn extend<S: AsRef<str>>(&self, extra: &[S]) -> Result<RingCtx> {
        match self.kind() {
            RingKind::Poly { vars } => Ok(RingCtx::poly_from(vars.with(extra)?)),
            RingKind::Quotient { vars, relation, distinguished } => {
                let vars = vars.with(extra)?;
                let relation = relation.extend_vars(&vars)?;
                RingCtx::quotient(vars, relation, distinguished)
            }
            RingKind::DirectSum { parts } => {
                let parts = parts
                    .iter()
                    .map(|p| p.extend(extra))
                    .collect::<Result<Vec<_>>>()?;
                RingCtx::direct_sum(parts)
            }
            RingKind::Fibre { square } => Ok(RingCtx::fibre(square.extend(extra)?)),
        }
    }
}

impl fmt::Display for RingCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            RingKind::Poly { vars } => {
                if vars.is_empty() {
                    write!(f, "Q")
                } else {
                    write!(f, "Q[{}]", vars.names().join(", "))
                }
            }
            RingKind::Quotient { vars, relation, .. } => {
                write!(f, "Q[{}]/({})", vars.names().join(", "), relation)
            }
            RingKind::DirectSum { parts } => {
                let names: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "{}", names.join(" (+) "))
            }
            RingKind::Fibre { square } => {
                write!(f, "pullback[{}]", square.label)
            }
        }
    }
}

// ====================================================================
// Milnor squares
// ====================================================================

/// A commuting square of rings `B -f-> D <-g- C` together with its pullback.
///
/// `right` is the top ring `B`, `left` the bottom ring `C`, `common` the
/// corner `D`.  In the patching theorems `f` is the surjective leg.
#[derive(Clone, PartialEq, Debug)]
pub struct MilnorSquare {
    pub label: String,
    pub right: RingCtx,
    pub left: RingCtx,
    pub common: RingCtx,
    pub f: RingHom,
    pub g: RingHom,
}

impl MilnorSquare {
    pub fn new(
        label: &str,
        right: RingCtx,
        left: RingCtx,
        common: RingCtx,
        f: RingHom,
        g: RingHom,
    ) -> Result<MilnorSquare> {
        if f.source != right || f.target != common {
            return Err(Error::RingMismatch(format!(
                "f must map the right ring to the common ring in square `{label}`"
            )));
        }
        if g.source != left || g.target != common {
            return Err(Error::RingMismatch(format!(
                "g must map the left ring to the common ring in square `{label}`"
            )));
        }
        Ok(MilnorSquare { label: label.to_string(), right, left, common, f, g })
    }

    /// The pullback ring of the square.
    pub fn total(&self) -> RingCtx {
        RingCtx::fibre(self.clone())
    }

    pub fn extend<S: AsRef<str>>(&self, extra: &[S]) -> Result<MilnorSquare> {
        MilnorSquare::new(
            &self.label,
            self.right.extend(extra)?,
            self.left.extend(extra)?,
            self.common.extend(extra)?,
            self.f.extend(extra)?,
            self.g.extend(extra)?,
        )
    }

    /// Re-check the structural facts about the square: both legs land in
    /// the common ring and respect the source relations where defined.
    pub fn verify(&self) -> Result<Vec<(String, bool)>> {
        let mut checks = Vec::new();
        for (name, hom) in [("f", &self.f), ("g", &self.g)] {
            let ok = match hom.source.kind() {
                RingKind::Quotient { .. } | RingKind::Poly { .. } => hom.respects_relation()?,
                _ => true,
            };
            checks.push((format!("{name} respects the source relation"), ok));
        }
        Ok(checks)
    }
}

// ====================================================================
// Ring homomorphisms
// ====================================================================

/// A ring homomorphism described by data.
#[derive(Clone, PartialEq, Debug)]
pub struct RingHom {
    pub source: RingCtx,
    pub target: RingCtx,
    pub kind: HomKind,
    /// Set by constructors that know a section exists; gates `preimage`.
    pub surjective: bool,
}

#[derive(Clone, PartialEq, Debug)]
pub enum HomKind {
    /// Variable -> polynomial image (over the target variables).  Every
    /// source variable must be assigned.
    Substitution { images: BTreeMap<String, Poly> },
    /// Evaluate a subset of the source variables at rational points; one
    /// target component per point.
    Evaluation { points: Vec<BTreeMap<String, Rat>> },
    /// The natural map onto a quotient of the same polynomial ring.
    QuotientMap,
    /// `a -> (a, ..., a)` into a direct sum of copies of the source.
    Diagonal { copies: usize },
    /// `a -> (first(a), second(a))` into a two-part direct sum.
    Pairing { first: Box<RingHom>, second: Box<RingHom> },
    /// Composition, applied left to right.
    Composite { steps: Vec<RingHom> },
}

impl RingHom {
    pub fn substitution(
        source: RingCtx,
        target: RingCtx,
        images: BTreeMap<String, Poly>,
        surjective: bool,
    ) -> Result<RingHom> {
        let svars = source
            .vars()
            .ok_or_else(|| Error::UnsupportedRing("substitution source must be polynomial-like".into()))?;
        for name in svars.names() {
            if !images.contains_key(name) {
                return Err(Error::UnknownVariable(name.clone()));
            }
        }
        if !target.is_poly_like() {
            return Err(Error::UnsupportedRing("substitution target must be polynomial-like".into()));
        }
        Ok(RingHom { source, target, kind: HomKind::Substitution { images }, surjective })
    }

    pub fn identity(ring: RingCtx) -> Result<RingHom> {
        let vars = ring
            .vars()
            .ok_or_else(|| Error::UnsupportedRing("identity hom needs a polynomial-like ring".into()))?
            .clone();
        let mut images = BTreeMap::new();
        for name in vars.names() {
            images.insert(name.clone(), Poly::var(&vars, name)?);
        }
        RingHom::substitution(ring.clone(), ring, images, true)
    }

    pub fn evaluation(
        source: RingCtx,
        target: RingCtx,
        points: Vec<BTreeMap<String, Rat>>,
    ) -> Result<RingHom> {
        if points.is_empty() {
            return Err(Error::Invalid("evaluation needs at least one point".into()));
        }
        let svars = source
            .vars()
            .ok_or_else(|| Error::UnsupportedRing("evaluation source must be polynomial-like".into()))?;
        for point in &points {
            for name in point.keys() {
                if !svars.contains(name) {
                    return Err(Error::UnknownVariable(name.clone()));
                }
            }
        }
        if points.len() > 1 {
            match target.direct_parts() {
                Some(parts) if parts.len() == points.len() => {}
                _ => {
                    return Err(Error::RingMismatch(
                        "evaluation with several points needs a matching direct-sum target".into(),
                    ))
                }
            }
        }
        // Distinct single-variable points admit the linear interpolation
        // section, so those evaluations are marked surjective.
        let surjective = points.len() <= 2;
        Ok(RingHom { source, target, kind: HomKind::Evaluation { points }, surjective })
    }

    pub fn quotient_map(source: RingCtx, target: RingCtx) -> Result<RingHom> {
        match (source.kind(), target.kind()) {
            (RingKind::Poly { vars }, RingKind::Quotient { vars: qvars, .. }) if vars == qvars => {
                Ok(RingHom { source, target, kind: HomKind::QuotientMap, surjective: true })
            }
            _ => Err(Error::RingMismatch(
                "quotient map goes from a polynomial ring onto its quotient".into(),
            )),
        }
    }

    pub fn diagonal(source: RingCtx, copies: usize) -> Result<RingHom> {
        let target = RingCtx::direct_sum(vec![source.clone(); copies])?;
        Ok(RingHom { source, target, kind: HomKind::Diagonal { copies }, surjective: false })
    }

    pub fn pairing(first: RingHom, second: RingHom) -> Result<RingHom> {
        if first.source != second.source {
            return Err(Error::RingMismatch("pairing legs must share a source".into()));
        }
        let source = first.source.clone();
        let target = RingCtx::direct_sum(vec![first.target.clone(), second.target.clone()])?;
        Ok(RingHom {
            source,
            target,
            kind: HomKind::Pairing { first: Box::new(first), second: Box::new(second) },
            surjective: false,
        })
    }

    pub fn composite(steps: Vec<RingHom>) -> Result<RingHom> {
        if steps.is_empty() {
            return Err(Error::Invalid("composite needs at least one step".into()));
        }
        for pair in steps.windows(2) {
            if pair[0].target != pair[1].source {
                return Err(Error::RingMismatch("composite steps do not chain".into()));
            }
        }
        let source = steps.first().unwrap().source.clone();
        let target = steps.last().unwrap().target.clone();
        let surjective = steps.iter().all(|s| s.surjective);
        Ok(RingHom { source, target, kind: HomKind::Composite { steps }, surjective })
    }

    // ---- application -----------------------------------------------------

    pub fn apply(&self, a: &Element) -> Result<Element> {
        if a.ring() != &self.source {
            return Err(Error::RingMismatch(format!(
                "element lives in {} but the homomorphism expects {}",
                a.ring(),
                self.source
            )));
        }
        match &self.kind {
            HomKind::Substitution { .. } | HomKind::Evaluation { .. } | HomKind::QuotientMap => {
                let payload = a.as_poly().ok_or_else(|| {
                    Error::UnsupportedRing("expected a polynomial-like element".into())
                })?;
                self.apply_raw_poly(payload)
            }
            HomKind::Diagonal { copies } => {
                let parts = vec![a.clone(); *copies];
                let retargeted = parts
                    .into_iter()
                    .map(|p| Element { ring: self.source.clone(), value: p.value })
                    .collect();
                Element::tuple(self.target.clone(), retargeted)
            }
            HomKind::Pairing { first, second } => {
                let fa = first.apply(a)?;
                let sa = second.apply(a)?;
                Element::tuple(self.target.clone(), vec![fa, sa])
            }
            HomKind::Composite { steps } => {
                let mut acc = a.clone();
                for step in steps {
                    acc = step.apply(&acc)?;
                }
                Ok(acc)
            }
        }
    }

    /// Apply to a raw polynomial over the source variables, bypassing the
    /// source normal form.  Needed to test whether a relation maps to zero.
    fn apply_raw_poly(&self, p: &Poly) -> Result<Element> {
        match &self.kind {
            HomKind::Substitution { images } => {
                let image = p.substitute(images)?;
                Element::from_poly(self.target.clone(), image)
            }
            HomKind::Evaluation { points } => {
                let svars = self.source.vars().expect("validated at construction");
                let mut outs = Vec::with_capacity(points.len());
                for (i, point) in points.iter().enumerate() {
                    let part_ring = if points.len() == 1 {
                        self.target.clone()
                    } else {
                        self.target.direct_parts().expect("validated")[i].clone()
                    };
                    let pvars = part_ring.vars().ok_or_else(|| {
                        Error::UnsupportedRing("evaluation target component must be polynomial-like".into())
                    })?;
                    let mut images = BTreeMap::new();
                    for name in svars.names() {
                        match point.get(name) {
                            Some(c) => {
                                images.insert(name.clone(), Poly::constant(pvars, c.clone()));
                            }
                            None => {
                                images.insert(name.clone(), Poly::var(pvars, name)?);
                            }
                        }
                    }
                    let image = p.substitute(&images)?;
                    outs.push(Element::from_poly(part_ring, image)?);
                }
                if outs.len() == 1 {
                    Ok(outs.pop().unwrap())
                } else {
                    Element::tuple(self.target.clone(), outs)
                }
            }
            HomKind::QuotientMap => Element::from_poly(self.target.clone(), p.clone()),
            HomKind::Diagonal { copies } => {
                let part = Element::from_poly(self.source.clone(), p.clone())?;
                let parts = vec![part; *copies];
                Element::tuple(self.target.clone(), parts)
            }
            HomKind::Pairing { first, second } => {
                let fa = first.apply_raw_poly(p)?;
                let sa = second.apply_raw_poly(p)?;
                Element::tuple(self.target.clone(), vec![fa, sa])
            }
            HomKind::Composite { steps } => {
                let (head, tail) = steps.split_first().expect("validated");
                let mut acc = head.apply_raw_poly(p)?;
                for step in tail {
                    acc = step.apply(&acc)?;
                }
                Ok(acc)
            }
        }
    }

    /// True when the image of the source relation is zero in the target
    /// (vacuously true for a free polynomial source).
    pub fn respects_relation(&self) -> Result<bool> {
        match self.source.kind() {
            RingKind::Poly { .. } => Ok(true),
            RingKind::Quotient { relation, .. } => Ok(self.apply_raw_poly(relation)?.is_zero()),
            _ => Err(Error::UnsupportedRing(
                "relation check needs a polynomial-like source".into(),
            )),
        }
    }

    /// Canonical preimage along the section of a surjective homomorphism.
    ///
    /// * quotient map: lift the normal form verbatim;
    /// * one-point evaluation: constant (in the evaluated variable) lift;
    /// * two-point evaluation of one variable at `a != b`: the linear
    ///   interpolation `u + (v - u) * (x - a) / (b - a)`.
    pub fn preimage(&self, d: &Element) -> Result<Element> {
        if !self.surjective {
            return Err(Error::NotSurjective);
        }
        if d.ring() != &self.target {
            return Err(Error::RingMismatch(format!(
                "preimage argument lives in {} but the homomorphism lands in {}",
                d.ring(),
                self.target
            )));
        }
        match &self.kind {
            HomKind::QuotientMap => {
                let payload = d.as_poly().expect("quotient elements are polynomial");
                Element::from_poly(self.source.clone(), payload.clone())
            }
            HomKind::Evaluation { points } if points.len() == 1 => {
                let payload = d.as_poly().ok_or_else(|| {
                    Error::UnsupportedRing("expected a polynomial-like element".into())
                })?;
                Element::from_poly(self.source.clone(), payload.clone())
            }
            HomKind::Evaluation { points } if points.len() == 2 => {
                let var = {
                    let k0: Vec<&String> = points[0].keys().collect();
                    let k1: Vec<&String> = points[1].keys().collect();
                    if k0.len() != 1 || k1.len() != 1 || k0[0] != k1[0] {
                        return Err(Error::Invalid(
                            "two-point section needs both points to evaluate one shared variable".into(),
                        ));
                    }
                    k0[0].clone()
                };
                let a = points[0][&var].clone();
                let b = points[1][&var].clone();
                if a == b {
                    return Err(Error::Invalid("two-point section needs distinct points".into()));
                }
                let u = d.part(0)?;
                let v = d.part(1)?;
                let svars = self.source.vars().expect("validated").clone();
                let up = u
                    .as_poly()
                    .ok_or_else(|| Error::UnsupportedRing("expected polynomial components".into()))?
                    .restrict_vars(&svars)?;
                let vp = v
                    .as_poly()
                    .ok_or_else(|| Error::UnsupportedRing("expected polynomial components".into()))?
                    .restrict_vars(&svars)?;
                let x = Poly::var(&svars, &var)?;
                let scale = (b.clone() - a.clone()).recip();
                let ramp = x.sub(&Poly::constant(&svars, a)).scale(&scale);
                let section = up.add(&vp.sub(&up).mul(&ramp));
                Element::from_poly(self.source.clone(), section)
            }
            _ => Err(Error::Invalid(
                "no canonical preimage section for this homomorphism kind".into(),
            )),
        }
    }

    /// Extend source and target by fresh variables; the new variables map
    /// to themselves.
    pub fn extend<S: AsRef<str>>(&self, extra: &[S]) -> Result<RingHom> {
        let source = self.source.extend(extra)?;
        let target = self.target.extend(extra)?;
        let kind = match &self.kind {
            HomKind::Substitution { images } => {
                let tvars = target
                    .vars()
                    .ok_or_else(|| Error::UnsupportedRing("substitution target must stay polynomial-like".into()))?
                    .clone();
                let mut new_images = BTreeMap::new();
                for (k, v) in images {
                    new_images.insert(k.clone(), v.extend_vars(&tvars)?);
                }
                for e in extra {
                    let e = e.as_ref();
                    new_images.insert(e.to_string(), Poly::var(&tvars, e)?);
                }
                HomKind::Substitution { images: new_images }
            }
            HomKind::Evaluation { points } => HomKind::Evaluation { points: points.clone() },
            HomKind::QuotientMap => HomKind::QuotientMap,
            HomKind::Diagonal { copies } => HomKind::Diagonal { copies: *copies },
            HomKind::Pairing { first, second } => HomKind::Pairing {
                first: Box::new(first.extend(extra)?),
                second: Box::new(second.extend(extra)?),
            },
            HomKind::Composite { steps } => HomKind::Composite {
                steps: steps.iter().map(|s| s.extend(extra)).collect::<Result<Vec<_>>>()?,
            },
        };
        Ok(RingHom { source, target, kind, surjective: self.surjective })
    }
}

// ====================================================================
// Elements
// ====================================================================

/// An element of a ring context, stored in normal form.
#[derive(Clone, PartialEq, Debug)]
pub struct Element {
    ring: RingCtx,
    value: Value,
}

#[derive(Clone, PartialEq, Debug)]
enum Value {
    Poly(Poly),
    /// Direct-sum components, or `(right, left)` for a fibre element.
    Tuple(Vec<Value>),
}

impl Element {
    // ---- constructors ----------------------------------------------------

    /// Element of a polynomial-like ring; quotients reduce to normal form.
    pub fn from_poly(ring: RingCtx, p: Poly) -> Result<Element> {
        match ring.kind() {
            RingKind::Poly { vars } => {
                let p = p.restrict_vars(vars)?;
                Ok(Element { ring, value: Value::Poly(p) })
            }
            RingKind::Quotient { vars, relation, distinguished } => {
                let p = p.restrict_vars(vars)?;
                let (_, r) = p.divmod(relation, distinguished)?;
                Ok(Element { ring, value: Value::Poly(r) })
            }
            _ => Err(Error::UnsupportedRing(format!(
                "cannot build a polynomial element of {ring}"
            ))),
        }
    }

    /// Parse a polynomial-like element from text.
    pub fn parse(ring: &RingCtx, text: &str) -> Result<Element> {
        let vars = ring
            .vars()
            .ok_or_else(|| Error::UnsupportedRing(format!("{ring} has no textual element form")))?;
        let p = Poly::parse(text, vars)?;
        Element::from_poly(ring.clone(), p)
    }

    /// Fibre element `(right, left)`; the glue `f(right) = g(left)` is
    /// verified exactly.
    pub fn fibre(ring: RingCtx, right: Element, left: Element) -> Result<Element> {
        let square = ring
            .square()
            .ok_or_else(|| Error::UnsupportedRing(format!("{ring} is not a fibre product")))?
            .clone();
        if right.ring() != &square.right {
            return Err(Error::RingMismatch(format!(
                "right component lives in {} but the square expects {}",
                right.ring(),
                square.right
            )));
        }
        if left.ring() != &square.left {
            return Err(Error::RingMismatch(format!(
                "left component lives in {} but the square expects {}",
                left.ring(),
                square.left
            )));
        }
        let fr = square.f.apply(&right)?;
        let gl = square.g.apply(&left)?;
        if fr != gl {
            return Err(Error::GlueMismatch { f_value: fr.to_string(), g_value: gl.to_string() });
        }
        Ok(Element { ring, value: Value::Tuple(vec![right.value, left.value]) })
    }

    /// Direct-sum element from components.
    pub fn tuple(ring: RingCtx, parts: Vec<Element>) -> Result<Element> {
        match ring.kind() {
            RingKind::DirectSum { parts: part_rings } => {
                if part_rings.len() != parts.len() {
                    return Err(Error::RingMismatch(format!(
                        "expected {} components, got {}",
                        part_rings.len(),
                        parts.len()
                    )));
                }
                for (p, r) in parts.iter().zip(part_rings) {
                    if p.ring() != r {
                        return Err(Error::RingMismatch(format!(
                            "component lives in {} but the sum expects {}",
                            p.ring(),
                            r
                        )));
                    }
                }
                Ok(Element { ring, value: Value::Tuple(parts.into_iter().map(|p| p.value).collect()) })
            }
            _ => Err(Error::UnsupportedRing(format!("{ring} is not a direct sum"))),
        }
    }

    /// The variable `name` as an element; in sums and fibre products the
    /// variable must exist in every component (as after `extend`).
    pub fn var(ring: &RingCtx, name: &str) -> Result<Element> {
        match ring.kind() {
            RingKind::Poly { vars } | RingKind::Quotient { vars, .. } => {
                Element::from_poly(ring.clone(), Poly::var(vars, name)?)
            }
            RingKind::DirectSum { parts } => {
                let comps = parts
                    .iter()
                    .map(|p| Element::var(p, name))
                    .collect::<Result<Vec<_>>>()?;
                Element::tuple(ring.clone(), comps)
            }
            RingKind::Fibre { square } => {
                let right = Element::var(&square.right, name)?;
                let left = Element::var(&square.left, name)?;
                Element::fibre(ring.clone(), right, left)
            }
        }
    }

    pub fn constant(ring: &RingCtx, c: Rat) -> Element {
        match ring.kind() {
            RingKind::Poly { vars } => Element {
                ring: ring.clone(),
                value: Value::Poly(Poly::constant(vars, c)),
            },
            RingKind::Quotient { vars, .. } => {
                // Relations have positive degree, so constants are reduced.
                Element { ring: ring.clone(), value: Value::Poly(Poly::constant(vars, c)) }
            }
            RingKind::DirectSum { parts } => {
                let values = parts.iter().map(|p| Element::constant(p, c.clone()).value).collect();
                Element { ring: ring.clone(), value: Value::Tuple(values) }
            }
            RingKind::Fibre { square } => {
                let right = Element::constant(&square.right, c.clone());
                let left = Element::constant(&square.left, c);
                Element { ring: ring.clone(), value: Value::Tuple(vec![right.value, left.value]) }
            }
        }
    }

    pub fn zero(ring: &RingCtx) -> Element {
        Element::constant(ring, Rat::zero())
    }

    pub fn one(ring: &RingCtx) -> Element {
        Element::constant(ring, Rat::one())
    }

    pub fn int(ring: &RingCtx, n: i64) -> Element {
        Element::constant(ring, rat_int(n))
    }

    // ---- accessors -------------------------------------------------------

    pub fn ring(&self) -> &RingCtx {
        &self.ring
    }

    pub fn as_poly(&self) -> Option<&Poly> {
        match &self.value {
            Value::Poly(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.value {
            Value::Poly(p) => p.is_zero(),
            Value::Tuple(_) => self.components().unwrap().iter().all(|c| c.is_zero()),
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.value {
            Value::Poly(p) => p.is_one(),
            Value::Tuple(_) => self.components().unwrap().iter().all(|c| c.is_one()),
        }
    }

    /// `Some(c)` when the element is the scalar `c` in every component.
    pub fn as_constant(&self) -> Option<Rat> {
        match &self.value {
            Value::Poly(p) => p.as_constant(),
            Value::Tuple(_) => {
                let parts = self.components().unwrap();
                let first = parts.first()?.as_constant()?;
                for p in &parts[1..] {
                    if p.as_constant()? != first {
                        return None;
                    }
                }
                Some(first)
            }
        }
    }

    /// Components as standalone elements (direct sums and fibre products).
    pub fn components(&self) -> Result<Vec<Element>> {
        match (self.ring.kind(), &self.value) {
            (RingKind::DirectSum { parts }, Value::Tuple(vals)) => Ok(parts
                .iter()
                .zip(vals)
                .map(|(r, v)| Element { ring: r.clone(), value: v.clone() })
                .collect()),
            (RingKind::Fibre { square }, Value::Tuple(vals)) => Ok(vec![
                Element { ring: square.right.clone(), value: vals[0].clone() },
                Element { ring: square.left.clone(), value: vals[1].clone() },
            ]),
            _ => Err(Error::UnsupportedRing(format!("{} has no components", self.ring))),
        }
    }

    pub fn part(&self, i: usize) -> Result<Element> {
        let parts = self.components()?;
        parts
            .get(i)
            .cloned()
            .ok_or_else(|| Error::Invalid(format!("component index {i} out of range")))
    }

    /// Right (top) component of a fibre element.
    pub fn fibre_right(&self) -> Result<Element> {
        if self.ring.square().is_none() {
            return Err(Error::UnsupportedRing(format!("{} is not a fibre product", self.ring)));
        }
        self.part(0)
    }

    /// Left (bottom) component of a fibre element.
    pub fn fibre_left(&self) -> Result<Element> {
        if self.ring.square().is_none() {
            return Err(Error::UnsupportedRing(format!("{} is not a fibre product", self.ring)));
        }
        self.part(1)
    }

    // ---- arithmetic ------------------------------------------------------

    fn check_same_ring(&self, other: &Element) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch(format!(
                "cannot combine elements of {} and {}",
                self.ring, other.ring
            )));
        }
        Ok(())
    }

    fn zip_with(
        &self,
        other: &Element,
        op: &dyn Fn(&Poly, &Poly) -> Poly,
    ) -> Result<Element> {
        self.check_same_ring(other)?;
        self.zip_rec(other, op)
    }

    fn zip_rec(&self, other: &Element, op: &dyn Fn(&Poly, &Poly) -> Poly) -> Result<Element> {
        match self.ring.kind() {
            RingKind::Poly { .. } | RingKind::Quotient { .. } => {
                let a = self.as_poly().unwrap();
                let b = other.as_poly().unwrap();
                Element::from_poly(self.ring.clone(), op(a, b))
            }
            RingKind::DirectSum { .. } => {
                let parts = self
                    .components()?
                    .iter()
                    .zip(other.components()?.iter())
                    .map(|(x, y)| x.zip_rec(y, op))
                    .collect::<Result<Vec<_>>>()?;
                Element::tuple(self.ring.clone(), parts)
            }
            RingKind::Fibre { .. } => {
                let r = self.part(0)?.zip_rec(&other.part(0)?, op)?;
                let l = self.part(1)?.zip_rec(&other.part(1)?, op)?;
                Element::fibre(self.ring.clone(), r, l)
            }
        }
    }

    pub fn add(&self, other: &Element) -> Result<Element> {
        self.zip_with(other, &|a, b| a.add(b))
    }

    pub fn sub(&self, other: &Element) -> Result<Element> {
        self.zip_with(other, &|a, b| a.sub(b))
    }

    pub fn mul(&self, other: &Element) -> Result<Element> {
        self.zip_with(other, &|a, b| a.mul(b))
    }

    pub fn neg(&self) -> Element {
        self.zip_with(self, &|a, _| a.neg()).expect("same ring")
    }

    pub fn pow(&self, n: u32) -> Result<Element> {
        let mut acc = Element::one(&self.ring);
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Multiplicative inverse of a nonzero rational scalar.
    pub fn scalar_inverse(&self) -> Result<Element> {
        match self.as_constant() {
            Some(c) if !c.is_zero() => Ok(Element::constant(&self.ring, c.recip())),
            _ => Err(Error::NotAUnit(self.to_string())),
        }
    }

    // ---- structure maps --------------------------------------------------

    /// Substitute one polynomial variable by an element of the same ring
    /// (componentwise in sums and fibre products).
    pub fn subst_var(&self, var: &str, value: &Element) -> Result<Element> {
        self.check_same_ring(value)?;
        match self.ring.kind() {
            RingKind::Poly { .. } | RingKind::Quotient { .. } => {
                let payload = self.as_poly().unwrap();
                let image = value.as_poly().unwrap();
                let substituted = payload.substitute_one(var, image)?;
                Element::from_poly(self.ring.clone(), substituted)
            }
            RingKind::DirectSum { .. } => {
                let parts = self
                    .components()?
                    .iter()
                    .zip(value.components()?.iter())
                    .map(|(x, v)| x.subst_var(var, v))
                    .collect::<Result<Vec<_>>>()?;
                Element::tuple(self.ring.clone(), parts)
            }
            RingKind::Fibre { .. } => {
                let r = self.part(0)?.subst_var(var, &value.part(0)?)?;
                let l = self.part(1)?.subst_var(var, &value.part(1)?)?;
                Element::fibre(self.ring.clone(), r, l)
            }
        }
    }

    /// Substitute one variable by a rational constant.
    pub fn subst_var_rat(&self, var: &str, value: &Rat) -> Result<Element> {
        self.subst_var(var, &Element::constant(&self.ring, value.clone()))
    }

    /// Reinterpret in a structurally compatible ring with more variables.
    pub fn extend_to(&self, target: &RingCtx) -> Result<Element> {
        if &self.ring == target {
            return Ok(self.clone());
        }
        match (self.ring.kind(), target.kind()) {
            (RingKind::Poly { .. }, RingKind::Poly { .. })
            | (RingKind::Poly { .. }, RingKind::Quotient { .. })
            | (RingKind::Quotient { .. }, RingKind::Quotient { .. }) => {
                let payload = self.as_poly().unwrap();
                Element::from_poly(target.clone(), payload.clone())
            }
            (RingKind::DirectSum { .. }, RingKind::DirectSum { parts }) => {
                let comps = self
                    .components()?
                    .iter()
                    .zip(parts.iter())
                    .map(|(c, r)| c.extend_to(r))
                    .collect::<Result<Vec<_>>>()?;
                Element::tuple(target.clone(), comps)
            }
            (RingKind::Fibre { .. }, RingKind::Fibre { square }) => {
                let r = self.part(0)?.extend_to(&square.right)?;
                let l = self.part(1)?.extend_to(&square.left)?;
                Element::fibre(target.clone(), r, l)
            }
            _ => Err(Error::RingMismatch(format!(
                "cannot reinterpret an element of {} in {}",
                self.ring, target
            ))),
        }
    }

    /// Reinterpret in a smaller ring; fails if a dropped variable is used.
    pub fn restrict_to(&self, target: &RingCtx) -> Result<Element> {
        // `from_poly` restricts by name, so extension and restriction share
        // one implementation for polynomial-like payloads.
        self.extend_to(target)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            Value::Poly(p) => write!(f, "{p}"),
            Value::Tuple(_) => {
                let parts = self.components().map_err(|_| fmt::Error)?;
                let texts: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "({})", texts.join(", "))
            }
        }
    }
}

// ====================================================================
// Builtin squares
// ====================================================================

/// `Q[X, Y] / (X^2 + Y^2 - 1)` with distinguished variable `X`.
pub fn circle_ring() -> RingCtx {
    let vars = VarSet::new(&["X", "Y"]).unwrap();
    let relation = Poly::parse("X^2 + Y^2 - 1", &vars).unwrap();
    RingCtx::quotient(vars, relation, "X").unwrap()
}

/// The interval square of a base ring `A`: the pullback of
/// `A[x] -(eval at 0, 1)-> A (+) A <-(diagonal)- A`.
///
/// Its pullback ring is the loop-space model `{(p(x), a) | p(0) = p(1) = a}`.
pub fn interval_square(base: &RingCtx, x: &str, label: &str) -> Result<MilnorSquare> {
    let right = base.extend(&[x])?;
    let common = RingCtx::direct_sum(vec![base.clone(), base.clone()])?;
    let mut p0 = BTreeMap::new();
    p0.insert(x.to_string(), Rat::zero());
    let mut p1 = BTreeMap::new();
    p1.insert(x.to_string(), Rat::one());
    let f = RingHom::evaluation(right.clone(), common.clone(), vec![p0, p1])?;
    let g = RingHom::diagonal(base.clone(), 2)?;
    MilnorSquare::new(label, right, base.clone(), common, f, g)
}

/// Images of `X` and `Y` under the degree-`n` circle self-map, read off
/// from the real and imaginary parts of `(X + iY)^n`.
pub fn power_map_images(n: u32) -> (Poly, Poly) {
    let vars = VarSet::new(&["X", "Y"]).unwrap();
    let x = Poly::var(&vars, "X").unwrap();
    let y = Poly::var(&vars, "Y").unwrap();
    let mut re = Poly::one(&vars);
    let mut im = Poly::zero(&vars);
    for _ in 0..n {
        let new_re = re.mul(&x).sub(&im.mul(&y));
        let new_im = re.mul(&y).add(&im.mul(&x));
        re = new_re;
        im = new_im;
    }
    (re, im)
}

/// The degree-`n` self-map of the circle quotient ring as a substitution.
pub fn power_map(n: u32) -> Result<RingHom> {
    if n == 0 {
        return Err(Error::Invalid("the power map needs n >= 1".into()));
    }
    let circle = circle_ring();
    let (re, im) = power_map_images(n);
    let mut images = BTreeMap::new();
    images.insert("X".to_string(), re);
    images.insert("Y".to_string(), im);
    RingHom::substitution(circle.clone(), circle, images, n == 1)
}

/// Reflection `X -> X, Y -> -Y` of the circle quotient ring.
pub fn circle_reflection() -> RingHom {
    let circle = circle_ring();
    let vars = circle.vars().unwrap().clone();
    let mut images = BTreeMap::new();
    images.insert("X".to_string(), Poly::var(&vars, "X").unwrap());
    images.insert("Y".to_string(), Poly::var(&vars, "Y").unwrap().neg());
    RingHom::substitution(circle.clone(), circle, images, true).unwrap()
}

/// Builtin square by name.  `n` selects the twist degree and is only
/// meaningful for `swan`.
pub fn builtin_square(name: &str, n: Option<u32>) -> Result<MilnorSquare> {
    match name {
        "circle" => interval_square(&RingCtx::rationals(), "X", "circle"),
        "cylinder" => interval_square(&RingCtx::poly(&["Y"])?, "X", "cylinder"),
        "torus" => interval_square(&circle_ring(), "T", "torus"),
        "klein" => {
            let base = circle_ring();
            let square = interval_square(&base, "T", "klein")?;
            let id = RingHom::identity(base.clone())?;
            let g = RingHom::pairing(id, circle_reflection())?;
            MilnorSquare::new("klein", square.right, base, square.common, square.f, g)
        }
        "sphere" => {
            let plane = RingCtx::poly(&["X", "Y"])?;
            let circle = circle_ring();
            let rationals = RingCtx::rationals();
            let f = RingHom::quotient_map(plane.clone(), circle.clone())?;
            let g = RingHom::substitution(rationals.clone(), circle.clone(), BTreeMap::new(), false)?;
            MilnorSquare::new("sphere", plane, rationals, circle, f, g)
        }
        "projective" => builtin_square("swan", Some(2)).map(|mut s| {
            s.label = "projective".to_string();
            s
        }),
        "swan" => {
            let n = n.unwrap_or(2);
            if n == 0 {
                return Err(Error::Invalid("swan square needs n >= 1".into()));
            }
            let plane = RingCtx::poly(&["X", "Y"])?;
            let circle = circle_ring();
            let f = RingHom::quotient_map(plane.clone(), circle.clone())?;
            let g = power_map(n)?;
            MilnorSquare::new(&format!("swan({n})"), plane, circle.clone(), circle, f, g)
        }
        other => Err(Error::UnknownSquare(other.to_string())),
    }
}

/// Names of all builtin squares (with the default swan twist).
pub fn catalog_names() -> Vec<&'static str> {
    vec!["circle", "sphere", "cylinder", "torus", "klein", "projective", "swan"]
}

// ====================================================================
// Tests
// ====================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    #[test]
    fn quotient_normal_form_reduces_in_distinguished_variable() {
        // X^3 * Y reduces to X*Y - X*Y^3 modulo X^2 + Y^2 - 1.
        let circle = circle_ring();
        let e = Element::parse(&circle, "X^3 * Y").unwrap();
        let expected = Element::parse(&circle, "X*Y - X*Y^3").unwrap();
        assert_eq!(e, expected);
        assert_eq!(e.to_string(), "-X*Y^3 + X*Y");
    }

    #[test]
    fn quotient_constructor_rejects_non_monic_relation() {
        let vars = VarSet::new(&["X", "Y"]).unwrap();
        let rel = Poly::parse("Y*X^2 + 1", &vars).unwrap();
        assert!(matches!(
            RingCtx::quotient(vars, rel, "X").unwrap_err(),
            Error::NotMonic(_)
        ));
    }

    #[test]
    fn circle_square_glue_accepts_matching_pair() {
        // (X^2 - X + 5, 5): both evaluations give 5, the diagonal of 5.
        let square = builtin_square("circle", None).unwrap();
        let total = square.total();
        let right = Element::parse(&square.right, "X^2 - X + 5").unwrap();
        let left = Element::parse(&square.left, "5").unwrap();
        let e = Element::fibre(total, right, left).unwrap();
        assert_eq!(e.to_string(), "(X^2 - X + 5, 5)");
    }

    #[test]
    fn circle_square_glue_rejects_mismatch() {
        let square = builtin_square("circle", None).unwrap();
        let total = square.total();
        let right = Element::parse(&square.right, "X").unwrap();
        let left = Element::parse(&square.left, "0").unwrap();
        match Element::fibre(total, right, left).unwrap_err() {
            Error::GlueMismatch { f_value, g_value } => {
                assert_eq!(f_value, "(0, 1)");
                assert_eq!(g_value, "(0, 0)");
            }
            other => panic!("expected glue mismatch, got {other:?}"),
        }
    }

    #[test]
    fn power_map_degree_three_images() {
        // (X + iY)^3 = X^3 - 3XY^2 + i(3X^2 Y - Y^3).
        let (re, im) = power_map_images(3);
        let vars = VarSet::new(&["X", "Y"]).unwrap();
        assert_eq!(re, Poly::parse("X^3 - 3*X*Y^2", &vars).unwrap());
        assert_eq!(im, Poly::parse("3*X^2*Y - Y^3", &vars).unwrap());
    }

    #[test]
    fn power_map_respects_circle_relation() {
        for n in 1..=4 {
            assert!(power_map(n).unwrap().respects_relation().unwrap(), "degree {n}");
        }
    }

    #[test]
    fn collapsing_substitution_breaks_relation() {
        // X -> X, Y -> X does not respect X^2 + Y^2 - 1.
        let circle = circle_ring();
        let vars = circle.vars().unwrap().clone();
        let mut images = BTreeMap::new();
        images.insert("X".to_string(), Poly::var(&vars, "X").unwrap());
        images.insert("Y".to_string(), Poly::var(&vars, "X").unwrap());
        let h = RingHom::substitution(circle.clone(), circle, images, false).unwrap();
        assert!(!h.respects_relation().unwrap());
    }

    #[test]
    fn quotient_map_preimage_lifts_normal_form() {
        let square = builtin_square("sphere", None).unwrap();
        let d = Element::parse(&square.common, "X * Y").unwrap();
        let lift = square.f.preimage(&d).unwrap();
        assert_eq!(lift, Element::parse(&square.right, "X*Y").unwrap());
        assert_eq!(square.f.apply(&lift).unwrap(), d);
    }

    #[test]
    fn two_point_evaluation_section_is_linear_interpolation() {
        // Preimage of (0, 1) under evaluation at X = 0, 1 is X itself.
        let square = builtin_square("circle", None).unwrap();
        let zero = Element::zero(&square.left);
        let one = Element::one(&square.left);
        let d = Element::tuple(square.common.clone(), vec![zero, one]).unwrap();
        let lift = square.f.preimage(&d).unwrap();
        assert_eq!(lift, Element::parse(&square.right, "X").unwrap());
        assert_eq!(square.f.apply(&lift).unwrap(), d);
    }

    #[test]
    fn cylinder_evaluation_keeps_the_free_variable() {
        let square = builtin_square("cylinder", None).unwrap();
        let e = Element::parse(&square.right, "X*Y + Y^2").unwrap();
        let image = square.f.apply(&e).unwrap();
        let y2 = Element::parse(&square.left, "Y^2").unwrap();
        let y2_plus_y = Element::parse(&square.left, "Y^2 + Y").unwrap();
        assert_eq!(image, Element::tuple(square.common.clone(), vec![y2, y2_plus_y]).unwrap());
    }

    #[test]
    fn torus_pairs_require_matching_endpoints() {
        // The torus pullback consists of pairs (p(T), a) with p(0) = p(1) = a.
        let square = builtin_square("torus", None).unwrap();
        let total = square.total();
        let right = Element::parse(&square.right, "X*T^2 - X*T + Y").unwrap();
        let left = Element::parse(&square.left, "Y").unwrap();
        assert!(Element::fibre(total.clone(), right, left).is_ok());

        let bad_right = Element::parse(&square.right, "T").unwrap();
        let bad_left = Element::parse(&square.left, "0").unwrap();
        assert!(matches!(
            Element::fibre(total, bad_right, bad_left).unwrap_err(),
            Error::GlueMismatch { .. }
        ));
    }

    #[test]
    fn klein_pairs_twist_by_the_reflection() {
        // Klein pairs satisfy p(0) = a and p(1) = a with Y negated.
        let square = builtin_square("klein", None).unwrap();
        let total = square.total();
        // p(T) = Y - 2*Y*T has p(0) = Y, p(1) = -Y.
        let right = Element::parse(&square.right, "Y - 2*Y*T").unwrap();
        let left = Element::parse(&square.left, "Y").unwrap();
        assert!(Element::fibre(total.clone(), right, left).is_ok());

        let bad_right = Element::parse(&square.right, "Y").unwrap();
        let bad_left = Element::parse(&square.left, "Y").unwrap();
        assert!(matches!(
            Element::fibre(total, bad_right, bad_left).unwrap_err(),
            Error::GlueMismatch { .. }
        ));
    }

    #[test]
    fn builtin_squares_verify_and_commute_on_fibre_elements() {
        for name in catalog_names() {
            let square = builtin_square(name, Some(3)).unwrap();
            for (check, ok) in square.verify().unwrap() {
                assert!(ok, "square {name}: {check}");
            }
        }
    }

    #[test]
    fn element_arithmetic_in_fibre_ring_preserves_glue() {
        let square = builtin_square("circle", None).unwrap();
        let total = square.total();
        let a = Element::fibre(
            total.clone(),
            Element::parse(&square.right, "X^2 - X + 2").unwrap(),
            Element::parse(&square.left, "2").unwrap(),
        )
        .unwrap();
        let b = Element::fibre(
            total.clone(),
            Element::parse(&square.right, "3*X - 3*X^2").unwrap(),
            Element::parse(&square.left, "0").unwrap(),
        )
        .unwrap();
        let sum = a.add(&b).unwrap();
        let product = a.mul(&b).unwrap();
        assert_eq!(sum.fibre_left().unwrap(), Element::int(&square.left, 2));
        assert_eq!(product.fibre_left().unwrap(), Element::zero(&square.left));
    }

    #[test]
    fn extension_adds_variables_in_lockstep() {
        let square = builtin_square("circle", None).unwrap();
        let ext = square.extend(&["T"]).unwrap();
        assert!(ext.right.vars().unwrap().contains("T"));
        assert!(ext.left.vars().unwrap().contains("T"));
        // An element of B[T] must still glue after substituting T.
        let total = ext.total();
        let e = Element::fibre(
            total,
            Element::parse(&ext.right, "1 + X*T - X^2*T").unwrap(),
            Element::parse(&ext.left, "1").unwrap(),
        )
        .unwrap();
        let at_zero = e.subst_var_rat("T", &Rat::zero()).unwrap();
        assert!(at_zero.is_one());
    }

    #[test]
    fn evaluation_section_round_trip_on_random_targets() {
        let square = builtin_square("cylinder", None).unwrap();
        for text in ["Y", "Y^2 - 3", "2*Y + 1/2", "0"] {
            let u = Element::parse(&square.left, text).unwrap();
            let v = Element::parse(&square.left, "Y - 1").unwrap();
            let d = Element::tuple(square.common.clone(), vec![u, v]).unwrap();
            let lift = square.f.preimage(&d).unwrap();
            assert_eq!(square.f.apply(&lift).unwrap(), d);
        }
    }

    #[test]
    fn scalar_inverse_only_for_nonzero_constants() {
        let circle = circle_ring();
        let two = Element::int(&circle, 2);
        assert_eq!(two.scalar_inverse().unwrap(), Element::constant(&circle, rat(1, 2)));
        let x = Element::parse(&circle, "X").unwrap();
        assert!(matches!(x.scalar_inverse().unwrap_err(), Error::NotAUnit(_)));
    }
}
