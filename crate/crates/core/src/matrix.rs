//! Square matrices over a ring context, elementary factors, and exact
//! factorization of special-linear matrices into elementary matrices.
//!
//! Matrices are plain `SqMatrix` values; special linearity is a checked
//! property (`assert_special_linear`), not a separate type.  Determinants
//! and adjugate inverses are implemented for sizes up to 3, which covers
//! everything the homotopy and patching layers need.

use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::poly::{rat_int, Poly, Rat};
use crate::ring::{Element, RingCtx, RingHom, RingKind};

// ====================================================================
// Square matrices
// ====================================================================

/// A square matrix with entries in one ring context, stored row-major.
#[derive(Clone, PartialEq, Debug)]
pub struct SqMatrix {
    ring: RingCtx,
    n: usize,
    entries: Vec<Element>,
}

impl SqMatrix {
    pub fn from_entries(ring: RingCtx, n: usize, entries: Vec<Element>) -> Result<SqMatrix> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::ShapeError(format!(
                "expected {} entries for a {n} x {n} matrix, got {}",
                n * n,
                entries.len()
            )));
        }
        for e in &entries {
            if e.ring() != &ring {
                return Err(Error::RingMismatch(format!(
                    "matrix entry lives in {} but the matrix is over {}",
                    e.ring(),
                    ring
                )));
            }
        }
        Ok(SqMatrix { ring, n, entries })
    }

    pub fn from_rows(ring: RingCtx, rows: Vec<Vec<Element>>) -> Result<SqMatrix> {
        let n = rows.len();
        for row in &rows {
            if row.len() != n {
                return Err(Error::ShapeError("matrix rows must all have the same length".into()));
            }
        }
        SqMatrix::from_entries(ring, n, rows.into_iter().flatten().collect())
    }

    /// Parse a matrix of polynomial-like entries from row-major text.
    pub fn parse(ring: &RingCtx, rows: &[Vec<&str>]) -> Result<SqMatrix> {
        let mut parsed = Vec::new();
        for row in rows {
            let mut out = Vec::new();
            for text in row {
                out.push(Element::parse(ring, text)?);
            }
            parsed.push(out);
        }
        SqMatrix::from_rows(ring.clone(), parsed)
    }

    pub fn identity(ring: &RingCtx, n: usize) -> SqMatrix {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(if i == j { Element::one(ring) } else { Element::zero(ring) });
            }
        }
        SqMatrix { ring: ring.clone(), n, entries }
    }

    pub fn ring(&self) -> &RingCtx {
        &self.ring
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Element {
        &self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> Vec<Element> {
        (0..self.n).map(|j| self.get(i, j).clone()).collect()
    }

    pub fn col(&self, j: usize) -> Vec<Element> {
        (0..self.n).map(|i| self.get(i, j).clone()).collect()
    }

    fn check_same_shape(&self, other: &SqMatrix) -> Result<()> {
        if self.ring != other.ring || self.n != other.n {
            return Err(Error::RingMismatch("matrix shapes or rings differ".into()));
        }
        Ok(())
    }

    // ---- arithmetic ------------------------------------------------------

    pub fn mul(&self, other: &SqMatrix) -> Result<SqMatrix> {
        self.check_same_shape(other)?;
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Element::zero(&self.ring);
                for k in 0..n {
                    acc = acc.add(&self.get(i, k).mul(other.get(k, j))?)?;
                }
                entries.push(acc);
            }
        }
        SqMatrix::from_entries(self.ring.clone(), n, entries)
    }

    pub fn add(&self, other: &SqMatrix) -> Result<SqMatrix> {
        self.check_same_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        SqMatrix::from_entries(self.ring.clone(), self.n, entries)
    }

    pub fn sub(&self, other: &SqMatrix) -> Result<SqMatrix> {
        self.check_same_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        SqMatrix::from_entries(self.ring.clone(), self.n, entries)
    }

    pub fn scalar_mul(&self, c: &Element) -> Result<SqMatrix> {
        let entries = self.entries.iter().map(|e| e.mul(c)).collect::<Result<Vec<_>>>()?;
        SqMatrix::from_entries(self.ring.clone(), self.n, entries)
    }

    /// Apply `v -> M v` to a column vector.
    pub fn apply_vec(&self, v: &[Element]) -> Result<Vec<Element>> {
        if v.len() != self.n {
            return Err(Error::ShapeError("vector length must match the matrix size".into()));
        }
        let mut out = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let mut acc = Element::zero(&self.ring);
            for k in 0..self.n {
                acc = acc.add(&self.get(i, k).mul(&v[k])?)?;
            }
            out.push(acc);
        }
        Ok(out)
    }

    // ---- determinants and inverses --------------------------------------

    fn det3(
        a: &Element, b: &Element, c: &Element,
        d: &Element, e: &Element, f: &Element,
        g: &Element, h: &Element, i: &Element,
    ) -> Result<Element> {
        let ei_fh = e.mul(i)?.sub(&f.mul(h)?)?;
        let di_fg = d.mul(i)?.sub(&f.mul(g)?)?;
        let dh_eg = d.mul(h)?.sub(&e.mul(g)?)?;
        a.mul(&ei_fh)?.sub(&b.mul(&di_fg)?)?.add(&c.mul(&dh_eg)?)
    }

    pub fn det(&self) -> Result<Element> {
        match self.n {
            1 => Ok(self.get(0, 0).clone()),
            2 => self
                .get(0, 0)
                .mul(self.get(1, 1))?
                .sub(&self.get(0, 1).mul(self.get(1, 0))?),
            3 => SqMatrix::det3(
                self.get(0, 0), self.get(0, 1), self.get(0, 2),
                self.get(1, 0), self.get(1, 1), self.get(1, 2),
                self.get(2, 0), self.get(2, 1), self.get(2, 2),
            ),
            n => Err(Error::UnsupportedRing(format!("determinant not implemented for size {n}"))),
        }
    }

    pub fn is_identity(&self) -> bool {
        for i in 0..self.n {
            for j in 0..self.n {
                let e = self.get(i, j);
                if i == j { if !e.is_one() { return false; } } else if !e.is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// Fails with `NotSpecialLinear` unless the determinant is exactly 1.
    pub fn assert_special_linear(&self) -> Result<()> {
        if self.det()?.is_one() {
            Ok(())
        } else {
            Err(Error::NotSpecialLinear(format!("det = {}", self.det()?)))
        }
    }

    /// Adjugate matrix: `M * adj(M) = det(M) * I`.
    pub fn adjugate(&self) -> Result<SqMatrix> {
        match self.n {
            1 => Ok(SqMatrix::from_entries(self.ring.clone(), 1, vec![Element::one(&self.ring)])?),
            2 => SqMatrix::from_rows(
                self.ring.clone(),
                vec![
                    vec![self.get(1, 1).clone(), self.get(0, 1).neg()],
                    vec![self.get(1, 0).neg(), self.get(0, 0).clone()],
                ],
            ),
            3 => {
                let n = 3;
                let mut entries = Vec::with_capacity(9);
                for i in 0..n {
                    for j in 0..n {
                        // adj[i][j] = (-1)^(i+j) * minor with row j, col i removed.
                        let rows: Vec<usize> = (0..n).filter(|&r| r != j).collect();
                        let cols: Vec<usize> = (0..n).filter(|&c| c != i).collect();
                        let m00 = self.get(rows[0], cols[0]);
                        let m01 = self.get(rows[0], cols[1]);
                        let m10 = self.get(rows[1], cols[0]);
                        let m11 = self.get(rows[1], cols[1]);
                        let minor = m00.mul(m11)?.sub(&m01.mul(m10)?)?;
                        entries.push(if (i + j) % 2 == 0 { minor } else { minor.neg() });
                    }
                }
                SqMatrix::from_entries(self.ring.clone(), 3, entries)
            }
            n => Err(Error::UnsupportedRing(format!("adjugate not implemented for size {n}"))),
        }
    }

    /// Exact inverse; the determinant must be 1 or a nonzero rational scalar.
    pub fn inverse(&self) -> Result<SqMatrix> {
        let d = self.det()?;
        let adj = self.adjugate()?;
        if d.is_one() {
            return Ok(adj);
        }
        let inv = d.scalar_inverse()?;
        adj.scalar_mul(&inv)
    }

    pub fn transpose(&self) -> SqMatrix {
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(self.get(j, i).clone());
            }
        }
        SqMatrix { ring: self.ring.clone(), n, entries }
    }

    // ---- structure maps --------------------------------------------------

    pub fn map_entries(
        &self,
        ring: RingCtx,
        f: &dyn Fn(&Element) -> Result<Element>,
    ) -> Result<SqMatrix> {
        let entries = self.entries.iter().map(f).collect::<Result<Vec<_>>>()?;
        SqMatrix::from_entries(ring, self.n, entries)
    }

    pub fn subst_var(&self, var: &str, value: &Element) -> Result<SqMatrix> {
        self.map_entries(self.ring.clone(), &|e| e.subst_var(var, value))
    }

    pub fn subst_var_rat(&self, var: &str, value: &Rat) -> Result<SqMatrix> {
        self.map_entries(self.ring.clone(), &|e| e.subst_var_rat(var, value))
    }

    pub fn extend_to(&self, target: &RingCtx) -> Result<SqMatrix> {
        self.map_entries(target.clone(), &|e| e.extend_to(target))
    }

    pub fn restrict_to(&self, target: &RingCtx) -> Result<SqMatrix> {
        self.map_entries(target.clone(), &|e| e.restrict_to(target))
    }

    pub fn hom_apply(&self, hom: &RingHom) -> Result<SqMatrix> {
        self.map_entries(hom.target.clone(), &|e| hom.apply(e))
    }

    /// Pair two matrices over the legs of a square into one matrix over the
    /// pullback; every entry pair must glue.
    pub fn fibre(ring: RingCtx, right: &SqMatrix, left: &SqMatrix) -> Result<SqMatrix> {
        if right.n != left.n {
            return Err(Error::ShapeError("fibre components must have equal size".into()));
        }
        let entries = right
            .entries
            .iter()
            .zip(&left.entries)
            .map(|(r, l)| Element::fibre(ring.clone(), r.clone(), l.clone()))
            .collect::<Result<Vec<_>>>()?;
        SqMatrix::from_entries(ring, right.n, entries)
    }

    /// Right (top) component of a matrix over a fibre product.
    pub fn fibre_right(&self) -> Result<SqMatrix> {
        let square = self
            .ring
            .square()
            .ok_or_else(|| Error::UnsupportedRing(format!("{} is not a fibre product", self.ring)))?;
        self.map_entries(square.right.clone(), &|e| e.fibre_right())
    }

    /// Left (bottom) component of a matrix over a fibre product.
    pub fn fibre_left(&self) -> Result<SqMatrix> {
        let square = self
            .ring
            .square()
            .ok_or_else(|| Error::UnsupportedRing(format!("{} is not a fibre product", self.ring)))?;
        self.map_entries(square.left.clone(), &|e| e.fibre_left())
    }
}

impl fmt::Display for SqMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.n)
            .map(|i| {
                let cells: Vec<String> = (0..self.n).map(|j| self.get(i, j).to_string()).collect();
                format!("[{}]", cells.join(", "))
            })
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

// ====================================================================
// Elementary factors
// ====================================================================

/// The elementary matrix `E_ij(r) = I + r * e_ij` (`i != j`), kept as data
/// so factor lists can be inverted, shifted and transported along maps.
#[derive(Clone, PartialEq, Debug)]
pub struct ElemFactor {
    pub i: usize,
    pub j: usize,
    pub r: Element,
}

impl ElemFactor {
    pub fn new(i: usize, j: usize, r: Element) -> Result<ElemFactor> {
        if i == j {
            return Err(Error::ShapeError("elementary factors live off the diagonal".into()));
        }
        Ok(ElemFactor { i, j, r })
    }

    pub fn inverse(&self) -> ElemFactor {
        ElemFactor { i: self.i, j: self.j, r: self.r.neg() }
    }

    /// Same off-diagonal entry shifted down the diagonal by `k`.
    pub fn shift(&self, k: usize) -> ElemFactor {
        ElemFactor { i: self.i + k, j: self.j + k, r: self.r.clone() }
    }

    pub fn to_matrix(&self, n: usize) -> Result<SqMatrix> {
        if self.i >= n || self.j >= n {
            return Err(Error::ShapeError(format!(
                "factor position ({}, {}) does not fit a {n} x {n} matrix",
                self.i, self.j
            )));
        }
        let mut m = SqMatrix::identity(self.r.ring(), n);
        m.entries[self.i * n + self.j] = self.r.clone();
        Ok(m)
    }

    pub fn map(&self, ring: RingCtx, f: &dyn Fn(&Element) -> Result<Element>) -> Result<ElemFactor> {
        let _ = ring;
        Ok(ElemFactor { i: self.i, j: self.j, r: f(&self.r)? })
    }

    pub fn hom_apply(&self, hom: &RingHom) -> Result<ElemFactor> {
        Ok(ElemFactor { i: self.i, j: self.j, r: hom.apply(&self.r)? })
    }

    pub fn subst_var(&self, var: &str, value: &Element) -> Result<ElemFactor> {
        Ok(ElemFactor { i: self.i, j: self.j, r: self.r.subst_var(var, value)? })
    }

    pub fn extend_to(&self, target: &RingCtx) -> Result<ElemFactor> {
        Ok(ElemFactor { i: self.i, j: self.j, r: self.r.extend_to(target)? })
    }
}

impl fmt::Display for ElemFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E[{},{}]({})", self.i + 1, self.j + 1, self.r)
    }
}

/// Multiply out a factor list, left to right, into an `n x n` matrix.
pub fn assemble(ring: &RingCtx, n: usize, factors: &[ElemFactor]) -> Result<SqMatrix> {
    let mut acc = SqMatrix::identity(ring, n);
    for fac in factors {
        acc = acc.mul(&fac.to_matrix(n)?)?;
    }
    Ok(acc)
}

/// Shift every factor down the diagonal by `k` (for block embeddings).
pub fn shift_factors(factors: &[ElemFactor], k: usize) -> Vec<ElemFactor> {
    factors.iter().map(|f| f.shift(k)).collect()
}

/// Embed a 2 x 2 matrix as the lower-right block of a 3 x 3 matrix.
pub fn embed_sl2_lower_right(m: &SqMatrix) -> Result<SqMatrix> {
    if m.n() != 2 {
        return Err(Error::ShapeError("block embedding expects a 2 x 2 matrix".into()));
    }
    let ring = m.ring().clone();
    let one = Element::one(&ring);
    let zero = Element::zero(&ring);
    SqMatrix::from_rows(
        ring,
        vec![
            vec![one, zero.clone(), zero.clone()],
            vec![zero.clone(), m.get(0, 0).clone(), m.get(0, 1).clone()],
            vec![zero, m.get(1, 0).clone(), m.get(1, 1).clone()],
        ],
    )
}

// ====================================================================
// Factoring special-linear matrices
// ====================================================================

/// Factors assembling to `diag(u, 1/u)` for a nonzero rational scalar `u`:
///
/// `diag(u, 1/u) = E21(1) * E12(1/u - 1) * E21(-u) * E12((u - 1)/u^2)`.
pub fn whitehead_diag(u: &Element) -> Result<Vec<ElemFactor>> {
    let c = match u.as_constant() {
        Some(c) if !c.is_zero() => c,
        _ => return Err(Error::NotAUnit(u.to_string())),
    };
    let ring = u.ring();
    let cinv = c.recip();
    let one = rat_int(1);
    let f1 = ElemFactor::new(1, 0, Element::one(ring))?;
    let f2 = ElemFactor::new(0, 1, Element::constant(ring, cinv.clone() - one.clone()))?;
    let f3 = ElemFactor::new(1, 0, Element::constant(ring, -c.clone()))?;
    let f4 = ElemFactor::new(0, 1, Element::constant(ring, (c - one) * cinv.clone() * cinv))?;
    Ok(vec![f1, f2, f3, f4])
}

/// Euclidean data for the factorization: quotient of `a` by `b` in the
/// single ring variable, or plain scalar division when there is none.
fn euclid_quo(a: &Poly, b: &Poly, var: Option<&str>) -> Result<Poly> {
    match var {
        Some(v) if b.degree_in(v) > 0 => Ok(a.divmod_univariate(b, v)?.0),
        _ => {
            // Constant divisor: b must be a nonzero scalar.
            let c = b.as_constant().ok_or_else(|| Error::NotAUnit(b.to_string()))?;
            if c.is_zero() {
                return Err(Error::NotAUnit(b.to_string()));
            }
            Ok(a.scale(&c.recip()))
        }
    }
}

fn euclid_deg(p: &Poly, var: Option<&str>) -> u32 {
    match var {
        Some(v) => p.degree_in(v),
        None => 0,
    }
}

/// Factor a 2 x 2 special-linear matrix over `Q` or `Q[t]` into elementary
/// matrices, by Euclidean reduction on the first column.
///
/// The returned list assembles (left to right) exactly to the input.
pub fn sl2_factor_euclidean(m: &SqMatrix) -> Result<Vec<ElemFactor>> {
    if m.n() != 2 {
        return Err(Error::ShapeError("factorization expects a 2 x 2 matrix".into()));
    }
    let ring = m.ring().clone();
    let var: Option<String> = match ring.kind() {
        RingKind::Poly { vars } if vars.len() <= 1 => vars.names().first().cloned(),
        _ => {
            return Err(Error::UnsupportedRing(format!(
                "factorization works over Q or Q[t], not {ring}"
            )))
        }
    };
    let var = var.as_deref();
    m.assert_special_linear()?;

    // Row-reduce to the identity, recording each applied operation; the
    // factor list is then the inverses of the operations in applied order.
    let mut cur = m.clone();
    let mut applied: Vec<ElemFactor> = Vec::new();
    let mut apply = |cur: &mut SqMatrix, op: ElemFactor| -> Result<()> {
        *cur = op.to_matrix(2)?.mul(cur)?;
        applied.push(op);
        Ok(())
    };

    loop {
        let p00 = cur.get(0, 0).as_poly().unwrap().clone();
        let p10 = cur.get(1, 0).as_poly().unwrap().clone();
        if p10.is_zero() {
            break;
        }
        if p00.is_zero() {
            // det = -p01 * p10 = 1, so p10 is a nonzero scalar; one step
            // makes the corner 1.
            let c = p10
                .as_constant()
                .ok_or_else(|| Error::NotAUnit(p10.to_string()))?;
            let r = Element::constant(&ring, c.recip());
            apply(&mut cur, ElemFactor::new(0, 1, r)?)?;
        } else if euclid_deg(&p10, var) >= euclid_deg(&p00, var) {
            let q = euclid_quo(&p10, &p00, var)?;
            let r = Element::from_poly(ring.clone(), q.neg())?;
            apply(&mut cur, ElemFactor::new(1, 0, r)?)?;
        } else {
            let q = euclid_quo(&p00, &p10, var)?;
            let r = Element::from_poly(ring.clone(), q.neg())?;
            apply(&mut cur, ElemFactor::new(0, 1, r)?)?;
        }
    }

    // Now cur = [[u, b], [0, 1/u]] with u a nonzero scalar.
    let u = cur.get(0, 0).clone();
    if !u.is_one() {
        // Left-multiplying by diag(1/u, u) clears the diagonal; as applied
        // operations the four factors act in reverse order.
        let uinv = u.scalar_inverse()?;
        for op in whitehead_diag(&uinv)?.into_iter().rev() {
            apply(&mut cur, op)?;
        }
    }
    let b = cur.get(0, 1).clone();
    if !b.is_zero() {
        apply(&mut cur, ElemFactor::new(0, 1, b.neg())?)?;
    }
    if !cur.is_identity() {
        return Err(Error::Invalid(format!("row reduction did not terminate at I: {cur}")));
    }
    Ok(applied.iter().map(|op| op.inverse()).collect())
}

// ====================================================================
// Tests
// ====================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;
    use crate::ring::circle_ring;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q() -> RingCtx {
        RingCtx::rationals()
    }

    #[test]
    fn rotation_matrix_over_circle_ring_is_special_linear() {
        let circle = circle_ring();
        let tau = SqMatrix::parse(&circle, &[vec!["X", "Y"], vec!["-Y", "X"]]).unwrap();
        tau.assert_special_linear().unwrap();
        let inv = tau.inverse().unwrap();
        let expected = SqMatrix::parse(&circle, &[vec!["X", "-Y"], vec!["Y", "X"]]).unwrap();
        assert_eq!(inv, expected);
        assert!(tau.mul(&inv).unwrap().is_identity());
    }

    #[test]
    fn three_by_three_adjugate_inverse() {
        let ring = RingCtx::poly(&["T"]).unwrap();
        // Unipotent upper-triangular with polynomial entries.
        let m = SqMatrix::parse(
            &ring,
            &[vec!["1", "T", "T^2"], vec!["0", "1", "2*T"], vec!["0", "0", "1"]],
        )
        .unwrap();
        assert!(m.det().unwrap().is_one());
        let inv = m.inverse().unwrap();
        assert!(m.mul(&inv).unwrap().is_identity());
        assert!(inv.mul(&m).unwrap().is_identity());
    }

    #[test]
    fn whitehead_factors_recover_scalar_diagonal() {
        let two = Element::int(&q(), 2);
        let factors = whitehead_diag(&two).unwrap();
        assert_eq!(factors.len(), 4);
        let m = assemble(&q(), 2, &factors).unwrap();
        assert_eq!(m.get(0, 0).as_constant().unwrap(), rat(2, 1));
        assert_eq!(m.get(1, 1).as_constant().unwrap(), rat(1, 2));
        assert!(m.get(0, 1).is_zero() && m.get(1, 0).is_zero());
    }

    #[test]
    fn whitehead_rejects_non_units() {
        let ring = RingCtx::poly(&["X"]).unwrap();
        let x = Element::parse(&ring, "X").unwrap();
        assert!(matches!(whitehead_diag(&x).unwrap_err(), Error::NotAUnit(_)));
        let zero = Element::zero(&q());
        assert!(matches!(whitehead_diag(&zero).unwrap_err(), Error::NotAUnit(_)));
    }

    #[test]
    fn factor_the_quarter_turn() {
        let m = SqMatrix::parse(&q(), &[vec!["0", "1"], vec!["-1", "0"]]).unwrap();
        let factors = sl2_factor_euclidean(&m).unwrap();
        // Reduction yields three shear factors for the quarter turn.
        assert_eq!(factors.len(), 3);
        assert_eq!(assemble(&q(), 2, &factors).unwrap(), m);
    }

    #[test]
    fn factor_matrix_with_scalar_diagonal_block() {
        // det = 1 but the Euclidean phase ends with u = 2 on the diagonal,
        // forcing the diagonal-clearing factors.
        let m = SqMatrix::parse(&q(), &[vec!["2", "1"], vec!["1", "1"]]).unwrap();
        let factors = sl2_factor_euclidean(&m).unwrap();
        assert_eq!(assemble(&q(), 2, &factors).unwrap(), m);
    }

    #[test]
    fn factor_polynomial_matrix() {
        let ring = RingCtx::poly(&["T"]).unwrap();
        // [[1 + T^2, T], [T, 1]] has determinant 1.
        let m = SqMatrix::parse(&ring, &[vec!["1 + T^2", "T"], vec!["T", "1"]]).unwrap();
        let factors = sl2_factor_euclidean(&m).unwrap();
        assert_eq!(assemble(&ring, 2, &factors).unwrap(), m);
    }

    #[test]
    fn factor_rejects_non_special_linear_input() {
        let m = SqMatrix::parse(&q(), &[vec!["2", "0"], vec!["0", "1"]]).unwrap();
        assert!(matches!(sl2_factor_euclidean(&m).unwrap_err(), Error::NotSpecialLinear(_)));
    }

    #[test]
    fn factor_rejects_unsupported_rings() {
        let circle = circle_ring();
        let m = SqMatrix::identity(&circle, 2);
        assert!(matches!(sl2_factor_euclidean(&m).unwrap_err(), Error::UnsupportedRing(_)));
    }

    #[test]
    fn seeded_elementary_products_refactor_exactly() {
        let ring = RingCtx::poly(&["Y"]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..8 {
            let count = rng.gen_range(1..=4);
            let mut factors = Vec::new();
            for _ in 0..count {
                let (i, j) = if rng.gen_bool(0.5) { (0, 1) } else { (1, 0) };
                let c0 = rng.gen_range(-2i64..=2);
                let c1 = rng.gen_range(-2i64..=2);
                let c2 = rng.gen_range(-1i64..=1);
                let text = format!("({c0}) + ({c1})*Y + ({c2})*Y^2");
                factors.push(ElemFactor::new(i, j, Element::parse(&ring, &text).unwrap()).unwrap());
            }
            let m = assemble(&ring, 2, &factors).unwrap();
            let refactored = sl2_factor_euclidean(&m).unwrap();
            assert_eq!(assemble(&ring, 2, &refactored).unwrap(), m);
        }
    }

    #[test]
    fn block_embedding_and_shifted_factors_agree() {
        let two = Element::int(&q(), 2);
        let factors = whitehead_diag(&two).unwrap();
        let small = assemble(&q(), 2, &factors).unwrap();
        let big = embed_sl2_lower_right(&small).unwrap();
        let shifted = shift_factors(&factors, 1);
        assert_eq!(assemble(&q(), 3, &shifted).unwrap(), big);
    }

    #[test]
    fn fibre_matrices_project_and_reassemble() {
        let square = crate::ring::builtin_square("circle", None).unwrap();
        let total = square.total();
        let right = SqMatrix::parse(
            &square.right,
            &[vec!["1", "X - X^2"], vec!["0", "1"]],
        )
        .unwrap();
        let left = SqMatrix::identity(&square.left, 2);
        let paired = SqMatrix::fibre(total, &right, &left).unwrap();
        assert_eq!(paired.fibre_right().unwrap(), right);
        assert_eq!(paired.fibre_left().unwrap(), left);
        paired.assert_special_linear().unwrap();
    }

    #[test]
    fn matrix_substitution_acts_entrywise() {
        let ring = RingCtx::poly(&["T"]).unwrap();
        let m = SqMatrix::parse(&ring, &[vec!["1", "T - T^2"], vec!["0", "1"]]).unwrap();
        assert!(m.subst_var_rat("T", &Rat::zero()).unwrap().is_identity());
        assert!(m.subst_var_rat("T", &rat(1, 1)).unwrap().is_identity());
        assert!(!m.subst_var_rat("T", &rat(1, 2)).unwrap().is_identity());
    }
}
