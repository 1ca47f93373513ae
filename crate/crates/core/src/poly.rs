//! Sparse multivariate polynomials over arbitrary-precision rationals.
//!
//! A [`Poly`] is a map from monomials to nonzero rational coefficients,
//! kept in the canonical graded-lexicographic order of its [`VarSet`], so
//! two polynomials are equal exactly when their representations are equal
//! and every polynomial has a unique printed form.
//!
//! Key operations: ring arithmetic, substitution, exact and floating
//! evaluation, division with remainder by a divisor monic in a chosen
//! variable, and a small parser for the textual polynomial grammar.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar used throughout the crate.
///
/// `BigRational` keeps numerator and denominator coprime with a positive
/// denominator, which is exactly the normal form the rest of the library
/// relies on.
pub type Rat = BigRational;

/// Rational from an integer.
pub fn rat_int(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

/// Rational `n / d` (panics on `d == 0`, as in `BigRational::new`).
pub fn rat(n: i64, d: i64) -> Rat {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Canonical text form: `n` for integers, `n/d` otherwise.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse `-?digits(/digits)?` as an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let t = s.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let mut parts = body.splitn(2, '/');
    let numer = parts.next().unwrap_or("");
    let parse_int = |p: &str| -> Result<BigInt> {
        if p.is_empty() || !p.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Invalid(format!("`{s}` is not a rational literal")));
        }
        p.parse::<BigInt>()
            .map_err(|_| Error::Invalid(format!("`{s}` is not a rational literal")))
    };
    let n = parse_int(numer)?;
    let d = match parts.next() {
        Some(denom) => {
            let d = parse_int(denom)?;
            if d.is_zero() {
                return Err(Error::Invalid(format!("`{s}` has a zero denominator")));
            }
            d
        }
        None => BigInt::one(),
    };
    let r = BigRational::new(n, d);
    Ok(if neg { -r } else { r })
}

fn valid_var_name(name: &str) -> bool {
    let mut bytes = name.bytes();
    match bytes.next() {
        Some(b) if b.is_ascii_alphabetic() => {}
        _ => return false,
    }
    bytes.all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

// ====================================================================
// VarSet
// ====================================================================

/// An ordered set of distinct variable names.
///
/// The order is significant: it fixes the graded-lexicographic term order
/// and therefore the canonical printed form of every polynomial over the
/// set.  Cloning is cheap (shared storage).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VarSet(Arc<Vec<String>>);

impl VarSet {
    /// Build a variable set; names must be distinct identifiers.
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<VarSet> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(names.len());
        for n in names {
            let n = n.as_ref();
            if !valid_var_name(n) {
                return Err(Error::Invalid(format!("`{n}` is not a valid variable name")));
            }
            if !seen.insert(n.to_string()) {
                return Err(Error::Invalid(format!("duplicate variable `{n}`")));
            }
            out.push(n.to_string());
        }
        Ok(VarSet(Arc::new(out)))
    }

    /// The empty variable set (constants only).
    pub fn empty() -> VarSet {
        VarSet(Arc::new(Vec::new()))
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.iter().any(|n| n == name)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }

    /// This set extended by `extra` (appended in order); duplicates rejected.
    pub fn with<S: AsRef<str>>(&self, extra: &[S]) -> Result<VarSet> {
        let mut all: Vec<String> = self.0.as_ref().clone();
        for e in extra {
            all.push(e.as_ref().to_string());
        }
        VarSet::new(&all)
    }

    /// Union preserving the order of `self`, then new names of `other`.
    pub fn union(&self, other: &VarSet) -> VarSet {
        let mut all: Vec<String> = self.0.as_ref().clone();
        for n in other.names() {
            if !self.contains(n) {
                all.push(n.clone());
            }
        }
        VarSet(Arc::new(all))
    }

    /// True when every name of `self` occurs in `other`.
    pub fn subset_of(&self, other: &VarSet) -> bool {
        self.0.iter().all(|n| other.contains(n))
    }
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.0.join(", "))
    }
}

// ====================================================================
// Monomial
// ====================================================================

/// Exponent vector positionally aligned with a [`VarSet`].
///
/// A zero entry means the variable is absent.  Monomials are only
/// comparable within one variable set; [`Poly`] maintains that invariant.
/// The order is graded lexicographic: higher total degree first, ties
/// broken by the exponent of the earliest variable.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Monomial {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, index: usize) -> Monomial {
        let mut e = vec![0; nvars];
        e[index] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn exponent(&self, index: usize) -> u32 {
        self.0.get(index).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// ====================================================================
// Poly
// ====================================================================

/// Sparse polynomial: monomial -> nonzero coefficient, canonical order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly {
    vars: VarSet,
    terms: BTreeMap<Monomial, Rat>,
}

impl Poly {
    // ---- constructors ----------------------------------------------------

    pub fn zero(vars: &VarSet) -> Poly {
        Poly { vars: vars.clone(), terms: BTreeMap::new() }
    }

    pub fn one(vars: &VarSet) -> Poly {
        Poly::constant(vars, Rat::one())
    }

    pub fn constant(vars: &VarSet, c: Rat) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(vars.len()), c);
        }
        Poly { vars: vars.clone(), terms }
    }

    pub fn var(vars: &VarSet, name: &str) -> Result<Poly> {
        let idx = vars
            .index_of(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::var(vars.len(), idx), Rat::one());
        Ok(Poly { vars: vars.clone(), terms })
    }

    /// Build from raw terms, dropping zero coefficients and merging
    /// duplicate monomials.
    pub fn from_terms<I>(vars: &VarSet, items: I) -> Poly
    where
        I: IntoIterator<Item = (Monomial, Rat)>,
    {
        let mut terms: BTreeMap<Monomial, Rat> = BTreeMap::new();
        for (m, c) in items {
            debug_assert_eq!(m.exponents().len(), vars.len());
            let entry = terms.entry(m).or_insert_with(Rat::zero);
            *entry += c;
        }
        terms.retain(|_, c| !c.is_zero());
        Poly { vars: vars.clone(), terms }
    }

    // ---- accessors -------------------------------------------------------

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().map(|c| c.is_one()).unwrap_or(false)
    }

    /// `Some(c)` when the polynomial is the constant `c` (including zero).
    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                if m.is_one() {
                    Some(c.clone())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// Degree in one variable; 0 for the zero polynomial or an absent name.
    pub fn degree_in(&self, var: &str) -> u32 {
        match self.vars.index_of(var) {
            Some(i) => self.terms.keys().map(|m| m.exponent(i)).max().unwrap_or(0),
            None => 0,
        }
    }

    /// Names with a nonzero exponent somewhere in the polynomial.
    pub fn used_vars(&self) -> BTreeSet<String> {
        let mut used = BTreeSet::new();
        for m in self.terms.keys() {
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    used.insert(self.vars.names()[i].clone());
                }
            }
        }
        used
    }

    // ---- variable-set plumbing ------------------------------------------

    /// Reinterpret over a superset of variables (zero-extension).
    pub fn extend_vars(&self, target: &VarSet) -> Result<Poly> {
        if !self.vars.subset_of(target) {
            return Err(Error::RingMismatch(format!(
                "cannot extend polynomial over {} to {}",
                self.vars, target
            )));
        }
        let map: Vec<usize> = self
            .vars
            .names()
            .iter()
            .map(|n| target.index_of(n).unwrap())
            .collect();
        let terms = self.terms.iter().map(|(m, c)| {
            let mut e = vec![0u32; target.len()];
            for (i, &exp) in m.exponents().iter().enumerate() {
                e[map[i]] = exp;
            }
            (Monomial(e), c.clone())
        });
        Ok(Poly::from_terms(target, terms))
    }

    /// Reinterpret over `target`, which must contain every *used* variable.
    pub fn restrict_vars(&self, target: &VarSet) -> Result<Poly> {
        for name in self.used_vars() {
            if !target.contains(&name) {
                return Err(Error::RingMismatch(format!(
                    "polynomial uses `{name}` which is absent from {target}"
                )));
            }
        }
        let terms = self.terms.iter().map(|(m, c)| {
            let mut e = vec![0u32; target.len()];
            for (i, &exp) in m.exponents().iter().enumerate() {
                if exp > 0 {
                    e[target.index_of(&self.vars.names()[i]).unwrap()] = exp;
                }
            }
            (Monomial(e), c.clone())
        });
        Ok(Poly::from_terms(target, terms))
    }

    fn aligned(&self, other: &Poly) -> (Poly, Poly) {
        if self.vars == other.vars {
            (self.clone(), other.clone())
        } else {
            let u = self.vars.union(&other.vars);
            (
                self.extend_vars(&u).expect("union is a superset"),
                other.extend_vars(&u).expect("union is a superset"),
            )
        }
    }

    // ---- arithmetic ------------------------------------------------------

    pub fn add(&self, other: &Poly) -> Poly {
        let (a, b) = self.aligned(other);
        let mut terms = a.terms;
        for (m, c) in b.terms {
            let entry = terms.entry(m).or_insert_with(Rat::zero);
            *entry += c;
        }
        terms.retain(|_, c| !c.is_zero());
        Poly { vars: a.vars, terms }
    }

    pub fn neg(&self) -> Poly {
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let (a, b) = self.aligned(other);
        let mut terms: BTreeMap<Monomial, Rat> = BTreeMap::new();
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                let m = ma.mul(mb);
                let entry = terms.entry(m).or_insert_with(Rat::zero);
                *entry += ca * cb;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Poly { vars: a.vars, terms }
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.vars);
        }
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one(&self.vars);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    // ---- substitution and evaluation ------------------------------------

    /// Substitute every *used* variable by its image.  The result lives
    /// over the union of the image variable sets.
    pub fn substitute(&self, images: &BTreeMap<String, Poly>) -> Result<Poly> {
        let mut target = VarSet::empty();
        for img in images.values() {
            target = target.union(img.vars());
        }
        let mut by_index: Vec<Option<Poly>> = Vec::with_capacity(self.vars.len());
        for name in self.vars.names() {
            by_index.push(match images.get(name) {
                Some(img) => Some(img.extend_vars(&target)?),
                None => None,
            });
        }
        let mut acc = Poly::zero(&target);
        for (m, c) in &self.terms {
            let mut term = Poly::constant(&target, c.clone());
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    let img = by_index[i].as_ref().ok_or_else(|| {
                        Error::UnknownVariable(self.vars.names()[i].clone())
                    })?;
                    term = term.mul(&img.pow(e));
                }
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// Substitute one variable, all other variables mapping to themselves.
    /// The variable set is unchanged.
    pub fn substitute_one(&self, var: &str, image: &Poly) -> Result<Poly> {
        if !self.vars.contains(var) {
            return Err(Error::UnknownVariable(var.to_string()));
        }
        let mut images = BTreeMap::new();
        for name in self.vars.names() {
            if name == var {
                images.insert(name.clone(), image.extend_vars(&self.vars)?);
            } else {
                images.insert(name.clone(), Poly::var(&self.vars, name)?);
            }
        }
        self.substitute(&images)
    }

    /// Exact evaluation; every used variable must be assigned.
    pub fn evaluate(&self, point: &BTreeMap<String, Rat>) -> Result<Rat> {
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    let name = &self.vars.names()[i];
                    let v = point
                        .get(name)
                        .ok_or_else(|| Error::UnknownVariable(name.clone()))?;
                    for _ in 0..e {
                        term *= v;
                    }
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Floating evaluation.  Used only by the winding-number sampler; all
    /// symbolic decisions elsewhere stay exact.
    pub fn evaluate_f64(&self, point: &BTreeMap<String, f64>) -> Result<f64> {
        let mut acc = 0.0f64;
        for (m, c) in &self.terms {
            let mut term = c.to_f64().ok_or_else(|| {
                Error::Invalid("coefficient does not fit in f64".to_string())
            })?;
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    let name = &self.vars.names()[i];
                    let v = point
                        .get(name)
                        .ok_or_else(|| Error::UnknownVariable(name.clone()))?;
                    term *= v.powi(e as i32);
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    // ---- division --------------------------------------------------------

    /// Coefficient of `var^k` as a polynomial over the same variable set
    /// (the extracted variable has exponent 0 in the result).
    pub fn coeff_of_power(&self, var: &str, k: u32) -> Result<Poly> {
        let idx = self
            .vars
            .index_of(var)
            .ok_or_else(|| Error::UnknownVariable(var.to_string()))?;
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.exponent(idx) == k)
            .map(|(m, c)| {
                let mut e = m.exponents().to_vec();
                e[idx] = 0;
                (Monomial(e), c.clone())
            });
        Ok(Poly::from_terms(&self.vars, terms))
    }

    /// Division with remainder by a divisor monic in `var`: returns
    /// `(q, r)` with `self = q * d + r` and `deg_var(r) < deg_var(d)`.
    ///
    /// "Monic in `var`" means the coefficient of the highest power of
    /// `var` is the constant 1; lower coefficients may involve the other
    /// variables.  This is plain long division, no Gröbner machinery.
    pub fn divmod(&self, d: &Poly, var: &str) -> Result<(Poly, Poly)> {
        let (p, d) = self.aligned(d);
        if d.is_zero() {
            return Err(Error::Invalid("division by the zero polynomial".into()));
        }
        if !p.vars.contains(var) {
            return Err(Error::UnknownVariable(var.to_string()));
        }
        let m = d.degree_in(var);
        if !d.coeff_of_power(var, m)?.is_one() {
            return Err(Error::NotMonic(var.to_string()));
        }
        let var_poly = Poly::var(&p.vars, var)?;
        let mut q = Poly::zero(&p.vars);
        let mut r = p;
        while !r.is_zero() && r.degree_in(var) >= m && !(m == 0) {
            let k = r.degree_in(var);
            let c = r.coeff_of_power(var, k)?;
            let shift = c.mul(&var_poly.pow(k - m));
            q = q.add(&shift);
            r = r.sub(&shift.mul(&d));
        }
        if m == 0 {
            // Divisor is the constant 1: everything is quotient.
            return Ok((r, Poly::zero(&q.vars)));
        }
        Ok((q, r))
    }

    /// Univariate division with remainder over the rationals: `var` must be
    /// the only variable appearing in the divisor's leading coefficient.
    /// The divisor need not be monic (its leading coefficient must be a
    /// nonzero rational, which over `Q[var]` it always is).
    pub fn divmod_univariate(&self, d: &Poly, var: &str) -> Result<(Poly, Poly)> {
        if d.is_zero() {
            return Err(Error::Invalid("division by the zero polynomial".into()));
        }
        let m = d.degree_in(var);
        let lc = d
            .coeff_of_power(var, m)?
            .as_constant()
            .ok_or_else(|| Error::UnsupportedRing(
                "leading coefficient is not a rational constant".into(),
            ))?;
        if lc.is_zero() {
            return Err(Error::Invalid("zero leading coefficient".into()));
        }
        let monic = d.scale(&lc.recip());
        let (q, r) = self.divmod(&monic, var)?;
        Ok((q.scale(&lc.recip()), r))
    }

    // ---- parsing and printing -------------------------------------------

    /// Parse the polynomial grammar over a fixed variable set.
    ///
    /// Literals are integers or `a/b` rationals; operators are `+ - * ^`
    /// with `^` taking a non-negative integer exponent; parentheses group.
    /// Implicit multiplication is rejected.
    pub fn parse(text: &str, vars: &VarSet) -> Result<Poly> {
        let mut parser = Parser { src: text.as_bytes(), pos: 0, vars };
        parser.skip_ws();
        let p = parser.expr()?;
        parser.skip_ws();
        if parser.pos != parser.src.len() {
            return Err(parser.err("unexpected trailing input"));
        }
        Ok(p)
    }
}

// Operator sugar mirroring the method API.
impl std::ops::Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        Poly::add(self, rhs)
    }
}

impl std::ops::Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        Poly::sub(self, rhs)
    }
}

impl std::ops::Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        Poly::mul(self, rhs)
    }
}

impl std::ops::Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::neg(self)
    }
}

impl fmt::Display for Poly {
    /// Canonical form: terms in descending graded-lex order, the sign
    /// folded into the separator, unit coefficients elided.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let negative = c.is_negative();
            if i == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = c.abs();
            let mut wrote_factor = false;
            if m.is_one() {
                write!(f, "{}", format_rat(&mag))?;
                wrote_factor = true;
            } else if !mag.is_one() {
                write!(f, "{}", format_rat(&mag))?;
                wrote_factor = true;
            }
            for (idx, &e) in m.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if wrote_factor {
                    write!(f, "*")?;
                }
                wrote_factor = true;
                write!(f, "{}", self.vars.names()[idx])?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

// ---- parser ------------------------------------------------------------

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a VarSet,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Syntax { offset: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Poly> {
        self.skip_ws();
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                self.term()?.neg()
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.factor()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.factor()?);
                }
                Some(c) if c.is_ascii_alphanumeric() || c == b'(' => {
                    return Err(self.err("implicit multiplication is not allowed; insert `*`"));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Poly> {
        let base = self.atom()?;
        self.skip_ws();
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let n = self.natural()?;
            return Ok(base.pow(n));
        }
        Ok(base)
    }

    fn natural(&mut self) -> Result<u32> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::Syntax {
                offset: start,
                msg: "expected a non-negative integer exponent".to_string(),
            });
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<u32>().map_err(|_| Error::Syntax {
            offset: start,
            msg: "exponent too large".to_string(),
        })
    }

    fn atom(&mut self) -> Result<Poly> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.skip_ws();
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            Some(_) => Err(self.err("expected a literal, a variable or `(`")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Poly> {
        let numer = self.digits()?;
        self.skip_ws();
        if self.peek() == Some(b'/') {
            self.pos += 1;
            self.skip_ws();
            let denom_off = self.pos;
            let denom = self.digits()?;
            if denom.is_zero() {
                return Err(Error::Syntax {
                    offset: denom_off,
                    msg: "zero denominator".to_string(),
                });
            }
            return Ok(Poly::constant(self.vars, BigRational::new(numer, denom)));
        }
        Ok(Poly::constant(self.vars, BigRational::from_integer(numer)))
    }

    fn digits(&mut self) -> Result<BigInt> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::Syntax {
                offset: start,
                msg: "expected digits".to_string(),
            });
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(text.parse::<BigInt>().unwrap())
    }

    fn identifier(&mut self) -> Result<Poly> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Poly::var(self.vars, name)
    }
}

// ====================================================================
// Tests
// ====================================================================
