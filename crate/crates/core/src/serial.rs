//! JSON documents for rings, homomorphisms, matrices, and witnesses.
//!
//! Every value the command-line tool reads or writes round-trips through
//! this module: a document parsed from disk reconstructs the exact
//! object, and serialising that object again produces an equivalent
//! document.  Nothing in a document is trusted — [`verify_witness`]
//! re-runs every mathematical check from scratch, so a stale or edited
//! file fails loudly instead of passing silently.
//!
//! Document shapes, by `"kind"`:
//!
//! * `loop` / `path` — `{base, var, matrix}`
//! * `homotopy` — `{base, tvar, svar, matrix}`
//! * `class` — `{ring, rep}`
//! * `chi` — `{base, tvar, xvar, alpha, beta, matrix}`
//! * `certificate` — `{verdict, winding, n, residual, samples, ring, lambda}`
//! * `factorization` — `{ring, matrix, factors}`
//! * `winding` — `{ring, matrix, value}`
//! * `smith` — `{matrix, invariant_factors, group}`
//! * `obstruction` — `{square, coords, generators, invariant_factors, name}`
//! * `patch` — `{square, lambda, witness[, row]}`
//! * `cocycle` — `{square, row, theta, sigma[, lambda]}`
//! * `split` — `{square, row, theta, sigma, gamma, delta}`
//! * `recover-split` — `{square, row, theta, sigma, completion}`
//! * `mv-map` — `{map, ...}` for the four comparison maps
//! * `mv-witness` — `{construction, ...}` for the kernel constructions
//! * `report` — `{title, facts, checks}`
//!
//! Rings are written as tagged objects (`{"type": "poly" | "quotient" |
//! "direct_sum" | "fibre", ...}`); the strings `"Q"`, `"Q[X,Y]"`, and
//! `"circle"` are accepted as shorthand.  Squares accept a builtin name
//! (`"circle"`, `"torus"`, ... or `{"builtin": "swan", "n": 3}`) or a
//! full `{label, right, left, common, f, g}` object.  Elements of
//! polynomial-like rings are strings in the same syntax the parser
//! accepts; direct-sum and fibre elements are arrays of components.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::cocycle::{
    completion_to_split, milnor_patch, split_complete, swan_certificate, obstruction_group,
    Completion, ObstructionGroup, SplitWitness, SwanCertificate, UmRow,
};
use crate::error::{Error, Result};
use crate::homotopy::{
    circle_class, ker_phi1_witness, ker_phi2_witness, ker_psi2_witness, phi1, phi2, psi1, psi2,
    phi_roundtrip, psi_roundtrip, require_interval_square, sphere_trivial_witness, Check,
    ChiCertificate, GammaElem, HomotopyWitness, LoopWitness, PathWitness,
};
use crate::matrix::{assemble, ElemFactor, SqMatrix};
use crate::pipelines::Report;
use crate::poly::{Poly, Rat, VarSet};
use crate::ring::{builtin_square, circle_ring, Element, HomKind, MilnorSquare, RingCtx, RingHom, RingKind};
use crate::smith::{group_name, smith_normal_form};
use crate::winding::{winding_number, WindingReport};

// ====================================================================
// Low-level document access
// ====================================================================

fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

fn doc(v: &Value) -> Result<&Map<String, Value>> {
    v.as_object().ok_or_else(|| invalid("expected a JSON object"))
}

fn field<'a>(m: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    m.get(key).ok_or_else(|| invalid(format!("missing field `{key}`")))
}

fn str_field<'a>(m: &'a Map<String, Value>, key: &str) -> Result<&'a str> {
    field(m, key)?
        .as_str()
        .ok_or_else(|| invalid(format!("field `{key}` must be a string")))
}

fn u32_field(m: &Map<String, Value>, key: &str) -> Result<u32> {
    let n = field(m, key)?
        .as_u64()
        .ok_or_else(|| invalid(format!("field `{key}` must be a non-negative integer")))?;
    u32::try_from(n).map_err(|_| invalid(format!("field `{key}` is out of range")))
}

fn i64_field(m: &Map<String, Value>, key: &str) -> Result<i64> {
    field(m, key)?
        .as_i64()
        .ok_or_else(|| invalid(format!("field `{key}` must be an integer")))
}

fn usize_field(m: &Map<String, Value>, key: &str) -> Result<usize> {
    let n = field(m, key)?
        .as_u64()
        .ok_or_else(|| invalid(format!("field `{key}` must be a non-negative integer")))?;
    usize::try_from(n).map_err(|_| invalid(format!("field `{key}` is out of range")))
}

fn array_field<'a>(m: &'a Map<String, Value>, key: &str) -> Result<&'a Vec<Value>> {
    field(m, key)?
        .as_array()
        .ok_or_else(|| invalid(format!("field `{key}` must be an array")))
}

fn string_list(v: &Value) -> Result<Vec<String>> {
    let arr = v.as_array().ok_or_else(|| invalid("expected an array of strings"))?;
    arr.iter()
        .map(|x| {
            x.as_str()
                .map(str::to_string)
                .ok_or_else(|| invalid("expected an array of strings"))
        })
        .collect()
}

fn int_rows(v: &Value) -> Result<Vec<Vec<i64>>> {
    let rows = v.as_array().ok_or_else(|| invalid("expected an array of integer rows"))?;
    rows.iter()
        .map(|row| {
            let cells = row.as_array().ok_or_else(|| invalid("expected an array of integers"))?;
            cells
                .iter()
                .map(|c| c.as_i64().ok_or_else(|| invalid("matrix entries must be integers")))
                .collect()
        })
        .collect()
}

fn parse_rat(s: &str) -> Result<Rat> {
    Rat::from_str(s.trim()).map_err(|_| invalid(format!("`{s}` is not a rational number")))
}

// ====================================================================
// Rings
// ====================================================================

/// Serialise a ring as a tagged object.
pub fn ring_to_json(ring: &RingCtx) -> Value {
    match ring.kind() {
        RingKind::Poly { vars } => json!({"type": "poly", "vars": vars.names()}),
        RingKind::Quotient { vars, relation, distinguished } => json!({
            "type": "quotient",
            "vars": vars.names(),
            "relation": relation.to_string(),
            "distinguished": distinguished,
        }),
        RingKind::DirectSum { parts } => json!({
            "type": "direct_sum",
            "parts": parts.iter().map(ring_to_json).collect::<Vec<Value>>(),
        }),
        RingKind::Fibre { square } => json!({"type": "fibre", "square": square_to_json(square)}),
    }
}

fn ring_shorthand(name: &str) -> Result<RingCtx> {
    match name {
        "Q" | "rationals" => Ok(RingCtx::rationals()),
        "circle" => Ok(circle_ring()),
        other => {
            if let Some(inner) = other.strip_prefix("Q[").and_then(|r| r.strip_suffix(']')) {
                let vars: Vec<&str> = inner.split(',').map(str::trim).collect();
                return RingCtx::poly(&vars);
            }
            Err(invalid(format!("unknown ring shorthand `{other}`")))
        }
    }
}

/// Reconstruct a ring from its document (or a shorthand string).
pub fn ring_from_json(v: &Value) -> Result<RingCtx> {
    if let Some(name) = v.as_str() {
        return ring_shorthand(name);
    }
    let m = doc(v)?;
    match str_field(m, "type")? {
        "poly" => {
            let vars = string_list(field(m, "vars")?)?;
            if vars.is_empty() {
                Ok(RingCtx::rationals())
            } else {
                RingCtx::poly(&vars)
            }
        }
        "quotient" => {
            let vars = VarSet::new(&string_list(field(m, "vars")?)?)?;
            let relation = Poly::parse(str_field(m, "relation")?, &vars)?;
            RingCtx::quotient(vars, relation, str_field(m, "distinguished")?)
        }
        "direct_sum" => {
            let parts = array_field(m, "parts")?
                .iter()
                .map(ring_from_json)
                .collect::<Result<Vec<RingCtx>>>()?;
            RingCtx::direct_sum(parts)
        }
        "fibre" => Ok(RingCtx::fibre(square_from_json(field(m, "square")?)?)),
        other => Err(invalid(format!("unknown ring type `{other}`"))),
    }
}

// ====================================================================
// Squares and homomorphisms
// ====================================================================

/// Serialise a Milnor square with both structure maps.
pub fn square_to_json(square: &MilnorSquare) -> Value {
    json!({
        "label": square.label,
        "right": ring_to_json(&square.right),
        "left": ring_to_json(&square.left),
        "common": ring_to_json(&square.common),
        "f": hom_to_json(&square.f),
        "g": hom_to_json(&square.g),
    })
}

/// Reconstruct a square from a document, a builtin name, or a
/// `{"builtin": name, "n": k}` object.
pub fn square_from_json(v: &Value) -> Result<MilnorSquare> {
    if let Some(name) = v.as_str() {
        return builtin_square(name, None);
    }
    let m = doc(v)?;
    if m.contains_key("builtin") {
        let name = str_field(m, "builtin")?;
        let n = if m.contains_key("n") { Some(u32_field(m, "n")?) } else { None };
        return builtin_square(name, n);
    }
    let right = ring_from_json(field(m, "right")?)?;
    let left = ring_from_json(field(m, "left")?)?;
    let common = ring_from_json(field(m, "common")?)?;
    let f = hom_from_json(field(m, "f")?)?;
    let g = hom_from_json(field(m, "g")?)?;
    MilnorSquare::new(str_field(m, "label")?, right, left, common, f, g)
}

/// Serialise a ring homomorphism by its construction.
pub fn hom_to_json(h: &RingHom) -> Value {
    match &h.kind {
        HomKind::Substitution { images } => {
            let imgs: Map<String, Value> = images
                .iter()
                .map(|(k, p)| (k.clone(), Value::String(p.to_string())))
                .collect();
            json!({
                "kind": "substitution",
                "source": ring_to_json(&h.source),
                "target": ring_to_json(&h.target),
                "images": imgs,
                "surjective": h.surjective,
            })
        }
        HomKind::Evaluation { points } => {
            let pts: Vec<Value> = points
                .iter()
                .map(|p| {
                    Value::Object(
                        p.iter()
                            .map(|(k, r)| (k.clone(), Value::String(r.to_string())))
                            .collect(),
                    )
                })
                .collect();
            json!({
                "kind": "evaluation",
                "source": ring_to_json(&h.source),
                "target": ring_to_json(&h.target),
                "points": pts,
            })
        }
        HomKind::QuotientMap => json!({
            "kind": "quotient_map",
            "source": ring_to_json(&h.source),
            "target": ring_to_json(&h.target),
        }),
        HomKind::Diagonal { copies } => json!({
            "kind": "diagonal",
            "source": ring_to_json(&h.source),
            "copies": copies,
        }),
        HomKind::Pairing { first, second } => json!({
            "kind": "pairing",
            "first": hom_to_json(first),
            "second": hom_to_json(second),
        }),
        HomKind::Composite { steps } => json!({
            "kind": "composite",
            "steps": steps.iter().map(hom_to_json).collect::<Vec<Value>>(),
        }),
    }
}

/// Reconstruct a homomorphism through the checked constructors.
pub fn hom_from_json(v: &Value) -> Result<RingHom> {
    let m = doc(v)?;
    match str_field(m, "kind")? {
        "identity" => RingHom::identity(ring_from_json(field(m, "ring")?)?),
        "substitution" => {
            let source = ring_from_json(field(m, "source")?)?;
            let target = ring_from_json(field(m, "target")?)?;
            let tvars = target
                .vars()
                .ok_or_else(|| invalid("substitution target must be polynomial-like"))?
                .clone();
            let imgs = field(m, "images")?
                .as_object()
                .ok_or_else(|| invalid("field `images` must be an object"))?;
            let mut images = BTreeMap::new();
            for (name, val) in imgs {
                let text = val
                    .as_str()
                    .ok_or_else(|| invalid("substitution images must be strings"))?;
                images.insert(name.clone(), Poly::parse(text, &tvars)?);
            }
            let surjective = m.get("surjective").and_then(Value::as_bool).unwrap_or(false);
            RingHom::substitution(source, target, images, surjective)
        }
        "evaluation" => {
            let source = ring_from_json(field(m, "source")?)?;
            let target = ring_from_json(field(m, "target")?)?;
            let mut points = Vec::new();
            for p in array_field(m, "points")? {
                let obj = p
                    .as_object()
                    .ok_or_else(|| invalid("evaluation points must be objects"))?;
                let mut point = BTreeMap::new();
                for (name, val) in obj {
                    let text = val
                        .as_str()
                        .ok_or_else(|| invalid("evaluation values must be strings"))?;
                    point.insert(name.clone(), parse_rat(text)?);
                }
                points.push(point);
            }
            RingHom::evaluation(source, target, points)
        }
        "quotient_map" => RingHom::quotient_map(
            ring_from_json(field(m, "source")?)?,
            ring_from_json(field(m, "target")?)?,
        ),
        "diagonal" => {
            RingHom::diagonal(ring_from_json(field(m, "source")?)?, usize_field(m, "copies")?)
        }
        "pairing" => RingHom::pairing(
            hom_from_json(field(m, "first")?)?,
            hom_from_json(field(m, "second")?)?,
        ),
        "composite" => {
            let steps = array_field(m, "steps")?
                .iter()
                .map(hom_from_json)
                .collect::<Result<Vec<RingHom>>>()?;
            RingHom::composite(steps)
        }
        other => Err(invalid(format!("unknown homomorphism kind `{other}`"))),
    }
}

// ====================================================================
// Elements, matrices, factors
// ====================================================================

/// Serialise an element: a string for polynomial-like rings, an array
/// of components for direct sums and fibre products.
pub fn element_to_json(e: &Element) -> Value {
    let parts = match e.ring().kind() {
        RingKind::DirectSum { parts } => Some(parts.len()),
        RingKind::Fibre { .. } => Some(2),
        _ => None,
    };
    match parts {
        Some(k) => {
            let mut out = Vec::with_capacity(k);
            for i in 0..k {
                match e.part(i) {
                    Ok(p) => out.push(element_to_json(&p)),
                    Err(_) => return Value::String(e.to_string()),
                }
            }
            Value::Array(out)
        }
        None => Value::String(e.to_string()),
    }
}

/// Reconstruct an element of `ring`; component glue and shape are
/// re-verified by the element constructors.
pub fn element_from_json(ring: &RingCtx, v: &Value) -> Result<Element> {
    match (ring.kind(), v) {
        (RingKind::DirectSum { parts }, Value::Array(items)) => {
            if items.len() != parts.len() {
                return Err(invalid(format!(
                    "expected {} components, got {}",
                    parts.len(),
                    items.len()
                )));
            }
            let comps = parts
                .iter()
                .zip(items)
                .map(|(r, item)| element_from_json(r, item))
                .collect::<Result<Vec<Element>>>()?;
            Element::tuple(ring.clone(), comps)
        }
        (RingKind::Fibre { square }, Value::Array(items)) => {
            if items.len() != 2 {
                return Err(invalid("a fibre element has exactly two components"));
            }
            let right = element_from_json(&square.right, &items[0])?;
            let left = element_from_json(&square.left, &items[1])?;
            Element::fibre(ring.clone(), right, left)
        }
        (_, Value::String(s)) => Element::parse(ring, s),
        (_, Value::Number(n)) => Element::parse(ring, &n.to_string()),
        _ => Err(invalid(format!("cannot read an element of {ring} from this value"))),
    }
}

/// Serialise a square matrix as row-major nested arrays.
pub fn matrix_to_json(m: &SqMatrix) -> Value {
    Value::Array(
        (0..m.n())
            .map(|i| Value::Array(m.row(i).iter().map(element_to_json).collect()))
            .collect(),
    )
}

/// Reconstruct a square matrix over `ring` from nested arrays.
pub fn matrix_from_json(ring: &RingCtx, v: &Value) -> Result<SqMatrix> {
    let rows = v.as_array().ok_or_else(|| invalid("expected an array of matrix rows"))?;
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let cells = row.as_array().ok_or_else(|| invalid("matrix rows must be arrays"))?;
        out.push(
            cells
                .iter()
                .map(|c| element_from_json(ring, c))
                .collect::<Result<Vec<Element>>>()?,
        );
    }
    SqMatrix::from_rows(ring.clone(), out)
}

/// Serialise a list of elementary factors.
pub fn factors_to_json(factors: &[ElemFactor]) -> Value {
    Value::Array(
        factors
            .iter()
            .map(|f| json!({"i": f.i, "j": f.j, "r": element_to_json(&f.r)}))
            .collect(),
    )
}

/// Reconstruct a list of elementary factors over `ring`.
pub fn factors_from_json(ring: &RingCtx, v: &Value) -> Result<Vec<ElemFactor>> {
    let arr = v.as_array().ok_or_else(|| invalid("expected an array of factors"))?;
    arr.iter()
        .map(|f| {
            let m = doc(f)?;
            ElemFactor::new(
                usize_field(m, "i")?,
                usize_field(m, "j")?,
                element_from_json(ring, field(m, "r")?)?,
            )
        })
        .collect()
}

fn element_list(ring: &RingCtx, v: &Value) -> Result<Vec<Element>> {
    let arr = v.as_array().ok_or_else(|| invalid("expected an array of elements"))?;
    arr.iter().map(|item| element_from_json(ring, item)).collect()
}

// ====================================================================
// Witness documents
// ====================================================================

/// Serialise a based loop.
pub fn loop_to_json(w: &LoopWitness) -> Value {
    json!({
        "kind": "loop",
        "base": ring_to_json(&w.base),
        "var": w.var,
        "matrix": matrix_to_json(&w.matrix),
    })
}

/// Reconstruct a based loop; shape is re-checked by the constructor.
pub fn loop_from_json(v: &Value) -> Result<LoopWitness> {
    let m = doc(v)?;
    let base = ring_from_json(field(m, "base")?)?;
    let var = str_field(m, "var")?;
    let ring = base.extend(&[var])?;
    let matrix = matrix_from_json(&ring, field(m, "matrix")?)?;
    LoopWitness::new(base, var, matrix)
}

/// Serialise a path from the identity.
pub fn path_to_json(w: &PathWitness) -> Value {
    json!({
        "kind": "path",
        "base": ring_to_json(&w.base),
        "var": w.var,
        "matrix": matrix_to_json(&w.matrix),
    })
}

/// Reconstruct a path from the identity.
pub fn path_from_json(v: &Value) -> Result<PathWitness> {
    let m = doc(v)?;
    let base = ring_from_json(field(m, "base")?)?;
    let var = str_field(m, "var")?;
    let ring = base.extend(&[var])?;
    let matrix = matrix_from_json(&ring, field(m, "matrix")?)?;
    PathWitness::new(base, var, matrix)
}

/// Serialise a two-parameter homotopy.
pub fn homotopy_to_json(w: &HomotopyWitness) -> Value {
    json!({
        "kind": "homotopy",
        "base": ring_to_json(&w.base),
        "tvar": w.tvar,
        "svar": w.svar,
        "matrix": matrix_to_json(&w.matrix),
    })
}

/// Reconstruct a two-parameter homotopy.
pub fn homotopy_from_json(v: &Value) -> Result<HomotopyWitness> {
    let m = doc(v)?;
    let base = ring_from_json(field(m, "base")?)?;
    let tvar = str_field(m, "tvar")?;
    let svar = str_field(m, "svar")?;
    let ring = base.extend(&[tvar, svar])?;
    let matrix = matrix_from_json(&ring, field(m, "matrix")?)?;
    HomotopyWitness::new(base, tvar, svar, matrix)
}

/// Serialise a cohomotopy-class representative.
pub fn class_to_json(c: &GammaElem) -> Value {
    json!({
        "kind": "class",
        "ring": ring_to_json(c.rep.ring()),
        "rep": matrix_to_json(&c.rep),
    })
}

/// Reconstruct a class representative; the determinant is re-checked.
pub fn class_from_json(v: &Value) -> Result<GammaElem> {
    let m = doc(v)?;
    let ring = ring_from_json(field(m, "ring")?)?;
    GammaElem::new(matrix_from_json(&ring, field(m, "rep")?)?)
}

/// Serialise a connecting-map certificate.
pub fn chi_to_json(c: &ChiCertificate) -> Value {
    json!({
        "kind": "chi",
        "base": ring_to_json(&c.base),
        "tvar": c.tvar,
        "xvar": c.xvar,
        "alpha": matrix_to_json(&c.alpha.matrix),
        "beta": matrix_to_json(&c.beta.matrix),
        "matrix": matrix_to_json(&c.matrix),
    })
}

/// Reconstruct a connecting-map certificate; all boundary identities
/// are available again through `checklist`.
pub fn chi_from_json(v: &Value) -> Result<ChiCertificate> {
    let m = doc(v)?;
    let base = ring_from_json(field(m, "base")?)?;
    let tvar = str_field(m, "tvar")?;
    let xvar = str_field(m, "xvar")?;
    let loop_ring = base.extend(&[tvar])?;
    let alpha = LoopWitness::new(base.clone(), tvar, matrix_from_json(&loop_ring, field(m, "alpha")?)?)?;
    let beta = LoopWitness::new(base.clone(), tvar, matrix_from_json(&loop_ring, field(m, "beta")?)?)?;
    let cert_ring = base.extend(&[xvar, tvar])?;
    let matrix = matrix_from_json(&cert_ring, field(m, "matrix")?)?;
    ChiCertificate::new(&alpha, &beta, xvar, matrix)
}

/// Serialise a freeness certificate together with the matrix it was
/// computed from, so the verdict can be re-derived offline.
pub fn certificate_to_json(cert: &SwanCertificate, lambda: &SqMatrix) -> Value {
    json!({
        "kind": "certificate",
        "verdict": cert.verdict.as_str(),
        "winding": cert.winding,
        "n": cert.n,
        "residual": cert.residual,
        "samples": cert.samples,
        "justification": cert.justification,
        "ring": ring_to_json(lambda.ring()),
        "lambda": matrix_to_json(lambda),
    })
}

/// Serialise a unimodular row with its unimodularity witness.
pub fn row_to_json(row: &UmRow) -> Value {
    json!({
        "entries": row.entries().iter().map(element_to_json).collect::<Vec<Value>>(),
        "bezout": row.bezout().iter().map(element_to_json).collect::<Vec<Value>>(),
    })
}

/// Reconstruct a unimodular row; the pairing identity is re-verified.
pub fn row_from_json(ring: &RingCtx, v: &Value) -> Result<UmRow> {
    let m = doc(v)?;
    UmRow::new(
        ring.clone(),
        element_list(ring, field(m, "entries")?)?,
        element_list(ring, field(m, "bezout")?)?,
    )
}

/// Serialise a factorization of a matrix into elementary factors.
pub fn factorization_to_json(m: &SqMatrix, factors: &[ElemFactor]) -> Value {
    json!({
        "kind": "factorization",
        "ring": ring_to_json(m.ring()),
        "matrix": matrix_to_json(m),
        "factors": factors_to_json(factors),
    })
}

/// Serialise a winding-number computation with its input.
pub fn winding_to_json(m: &SqMatrix, report: &WindingReport) -> Value {
    json!({
        "kind": "winding",
        "ring": ring_to_json(m.ring()),
        "matrix": matrix_to_json(m),
        "value": report.value,
        "samples": report.samples,
        "residual": report.residual,
    })
}

/// Serialise a Smith normal form computation.
pub fn smith_to_json(matrix: &[Vec<i64>], factors: &[i64]) -> Value {
    json!({
        "kind": "smith",
        "matrix": matrix,
        "invariant_factors": factors,
        "group": group_name(factors),
    })
}

/// Serialise an obstruction-group computation over a square.
pub fn obstruction_to_json(square: &MilnorSquare, group: &ObstructionGroup) -> Value {
    json!({
        "kind": "obstruction",
        "square": square_to_json(square),
        "coords": group.coords,
        "generators": group.generators,
        "invariant_factors": group.invariant_factors,
        "name": group.name,
    })
}

/// Serialise a patching problem together with its computed row so the
/// whole construction can be re-run from the document.
pub fn patch_to_json(
    square: &MilnorSquare,
    lambda: &SqMatrix,
    witness: &[ElemFactor],
    row: &UmRow,
) -> Value {
    json!({
        "kind": "patch",
        "square": square_to_json(square),
        "lambda": matrix_to_json(lambda),
        "witness": factors_to_json(witness),
        "row": row_to_json(row),
    })
}

/// Serialise a list of named checks.
pub fn checks_to_json(checks: &[Check]) -> Value {
    Value::Array(checks.iter().map(|c| json!({"name": c.name, "ok": c.ok})).collect())
}

fn checks_from_json(v: &Value) -> Result<Vec<Check>> {
    let arr = v.as_array().ok_or_else(|| invalid("expected an array of checks"))?;
    arr.iter()
        .map(|c| {
            let m = doc(c)?;
            let ok = field(m, "ok")?
                .as_bool()
                .ok_or_else(|| invalid("check field `ok` must be a boolean"))?;
            Ok(Check::new(str_field(m, "name")?, ok))
        })
        .collect()
}

/// Serialise a demo report (title, facts, named checks).
pub fn report_to_json(r: &Report) -> Value {
    json!({
        "kind": "report",
        "title": r.title,
        "facts": r.facts
            .iter()
            .map(|(k, v)| json!({"name": k, "value": v}))
            .collect::<Vec<Value>>(),
        "checks": checks_to_json(&r.checks),
    })
}

// ====================================================================
// Verification dispatcher
// ====================================================================

fn parse_completion(square: &MilnorSquare, m: &Map<String, Value>) -> Result<Completion> {
    let total = square.total();
    let row = row_from_json(&total, field(m, "row")?)?;
    let theta = matrix_from_json(&square.right, field(m, "theta")?)?;
    let sigma = matrix_from_json(&square.left, field(m, "sigma")?)?;
    Completion::new(row, theta, sigma)
}

fn verify_mv_map(m: &Map<String, Value>) -> Result<Vec<Check>> {
    match str_field(m, "map")? {
        "psi1" => {
            let aloop = loop_from_json(field(m, "input")?)?;
            aloop.verify()?;
            let (b, c) = psi1(&aloop)?;
            b.verify()?;
            c.verify()?;
            let mut checks = vec![
                Check::new("input is a based loop over the pullback", true),
                Check::new("both leg projections are based loops", true),
            ];
            if aloop.base.square().map(require_interval_square).map_or(false, |r| r.is_ok()) {
                let (_, _, roundtrip) = psi_roundtrip(&aloop)?;
                checks.extend(roundtrip);
            }
            Ok(checks)
        }
        "psi2" => {
            let square = square_from_json(field(m, "square")?)?;
            let b = loop_from_json(field(m, "b")?)?;
            let c = loop_from_json(field(m, "c")?)?;
            b.verify()?;
            c.verify()?;
            let d = psi2(&square, &b, &c)?;
            d.verify()?;
            Ok(vec![
                Check::new("both inputs are based loops on the legs", true),
                Check::new("difference loop over the common ring is a based loop", true),
            ])
        }
        "phi1" => {
            let a = class_from_json(field(m, "input")?)?;
            let (_, _) = phi1(&a)?;
            let mut checks = vec![
                Check::new("input represents a class over the pullback", true),
                Check::new("both leg projections are class representatives", true),
            ];
            if a.rep.ring().square().map(require_interval_square).map_or(false, |r| r.is_ok()) {
                let (_, _, roundtrip) = phi_roundtrip(&a)?;
                checks.extend(roundtrip);
            }
            Ok(checks)
        }
        "phi2" => {
            let square = square_from_json(field(m, "square")?)?;
            let b = class_from_json(field(m, "b")?)?;
            let c = class_from_json(field(m, "c")?)?;
            phi2(&square, &b, &c)?;
            Ok(vec![Check::new("difference class over the common ring is well formed", true)])
        }
        other => Err(invalid(format!("unknown comparison map `{other}`"))),
    }
}

fn verify_mv_witness(m: &Map<String, Value>) -> Result<Vec<Check>> {
    match str_field(m, "construction")? {
        "ker-psi2" => {
            let square = square_from_json(field(m, "square")?)?;
            let b = loop_from_json(field(m, "b")?)?;
            let c = loop_from_json(field(m, "c")?)?;
            let gamma = homotopy_from_json(field(m, "gamma")?)?;
            let gamma_prime = homotopy_from_json(field(m, "gamma_prime")?)?;
            Ok(ker_psi2_witness(&square, &b, &c, &gamma, &gamma_prime)?.checks)
        }
        "ker-phi1" => {
            let square = square_from_json(field(m, "square")?)?;
            let input = class_from_json(field(m, "input")?)?;
            let theta = path_from_json(field(m, "theta")?)?;
            let sigma = path_from_json(field(m, "sigma")?)?;
            Ok(ker_phi1_witness(&square, &input, &theta, &sigma)?.checks)
        }
        "ker-phi2" => {
            let square = square_from_json(field(m, "square")?)?;
            let b = class_from_json(field(m, "b")?)?;
            let c = class_from_json(field(m, "c")?)?;
            let sigma = path_from_json(field(m, "sigma")?)?;
            let sigma_prime = path_from_json(field(m, "sigma_prime")?)?;
            Ok(ker_phi2_witness(&square, &b, &c, &sigma, &sigma_prime)?.checks)
        }
        "circle-class" => {
            let input = class_from_json(field(m, "input")?)?;
            Ok(circle_class(&input)?.checks)
        }
        "sphere-trivial" => {
            let square = square_from_json(field(m, "square")?)?;
            let theta = path_from_json(field(m, "theta")?)?;
            let gamma = path_from_json(field(m, "gamma")?)?;
            let eta = loop_from_json(field(m, "eta")?)?;
            let delta = loop_from_json(field(m, "delta")?)?;
            Ok(sphere_trivial_witness(&square, &theta, &gamma, &eta, &delta)?.checks)
        }
        other => Err(invalid(format!("unknown kernel construction `{other}`"))),
    }
}

/// Re-run every mathematical check recorded in (or implied by) a
/// witness document.  Returns the named checks; a hard failure during
/// reconstruction surfaces as an error instead.
pub fn verify_witness(v: &Value) -> Result<Vec<Check>> {
    let m = doc(v)?;
    match str_field(m, "kind")? {
        "loop" => {
            loop_from_json(v)?.verify()?;
            Ok(vec![
                Check::new("matrix has determinant one", true),
                Check::new("value at 0 is the identity", true),
                Check::new("value at 1 is the identity", true),
            ])
        }
        "path" => {
            path_from_json(v)?.verify()?;
            Ok(vec![
                Check::new("matrix has determinant one", true),
                Check::new("value at 0 is the identity", true),
            ])
        }
        "homotopy" => {
            homotopy_from_json(v)?.verify()?;
            Ok(vec![
                Check::new("matrix has determinant one", true),
                Check::new("both time boundaries are pinned", true),
            ])
        }
        "class" => {
            class_from_json(v)?;
            Ok(vec![Check::new("representative is 2 x 2 with determinant one", true)])
        }
        "chi" => chi_from_json(v)?.checklist(),
        "certificate" => {
            let ring = ring_from_json(field(m, "ring")?)?;
            let lambda = matrix_from_json(&ring, field(m, "lambda")?)?;
            let cert = swan_certificate(u32_field(m, "n")?, &lambda)?;
            Ok(vec![
                Check::new(
                    "winding number recomputes to the recorded value",
                    cert.winding == i64_field(m, "winding")?,
                ),
                Check::new(
                    "verdict recomputes to the recorded verdict",
                    cert.verdict.as_str() == str_field(m, "verdict")?,
                ),
            ])
        }
        "factorization" => {
            let ring = ring_from_json(field(m, "ring")?)?;
            let matrix = matrix_from_json(&ring, field(m, "matrix")?)?;
            let factors = factors_from_json(&ring, field(m, "factors")?)?;
            let rebuilt = assemble(&ring, matrix.n(), &factors)?;
            Ok(vec![Check::new(
                "factors assemble exactly to the recorded matrix",
                rebuilt == matrix,
            )])
        }
        "winding" => {
            let ring = ring_from_json(field(m, "ring")?)?;
            let matrix = matrix_from_json(&ring, field(m, "matrix")?)?;
            let report = winding_number(&matrix)?;
            Ok(vec![Check::new(
                "winding number recomputes to the recorded value",
                report.value == i64_field(m, "value")?,
            )])
        }
        "smith" => {
            let rows = int_rows(field(m, "matrix")?)?;
            let factors = smith_normal_form(&rows)?;
            let recorded = field(m, "invariant_factors")?
                .as_array()
                .ok_or_else(|| invalid("field `invariant_factors` must be an array"))?
                .iter()
                .map(|x| x.as_i64().ok_or_else(|| invalid("invariant factors must be integers")))
                .collect::<Result<Vec<i64>>>()?;
            let mut checks = vec![Check::new(
                "invariant factors recompute to the recorded values",
                factors == recorded,
            )];
            if let Some(g) = m.get("group").and_then(Value::as_str) {
                checks.push(Check::new(
                    "group name matches the invariant factors",
                    group_name(&factors) == g,
                ));
            }
            Ok(checks)
        }
        "obstruction" => {
            let square = square_from_json(field(m, "square")?)?;
            let group = obstruction_group(&square)?;
            let mut checks =
                vec![Check::new("coordinate count matches", group.coords == usize_field(m, "coords")?)];
            let gens = int_rows(field(m, "generators")?)?;
            checks.push(Check::new("generator vectors match", group.generators == gens));
            checks.push(Check::new(
                "group name recomputes to the recorded name",
                group.name == str_field(m, "name")?,
            ));
            Ok(checks)
        }
        "patch" => {
            let square = square_from_json(field(m, "square")?)?;
            let lambda = matrix_from_json(&square.common, field(m, "lambda")?)?;
            let witness = factors_from_json(&square.common, field(m, "witness")?)?;
            let result = milnor_patch(&square, &lambda, &witness)?;
            let mut checks = result.checks;
            if let Some(rv) = m.get("row") {
                let recorded = row_from_json(&square.total(), rv)?;
                checks.push(Check::new(
                    "recorded row matches the recomputed row",
                    recorded.entries() == result.row.entries(),
                ));
            }
            Ok(checks)
        }
        "cocycle" => {
            let square = square_from_json(field(m, "square")?)?;
            let completion = parse_completion(&square, m)?;
            let mut checks = completion.verify()?;
            let cocycle = crate::cocycle::cocycle_extract(&completion)?;
            checks.push(Check::new("boundary matrix fixes the first basis vector", true));
            if let Some(lv) = m.get("lambda") {
                let recorded = matrix_from_json(&square.common, lv)?;
                checks.push(Check::new(
                    "recorded lambda matches the extracted lower-right block",
                    cocycle.lambda()? == recorded,
                ));
            }
            Ok(checks)
        }
        "split" => {
            let square = square_from_json(field(m, "square")?)?;
            let completion = parse_completion(&square, m)?;
            let gamma = matrix_from_json(&square.right, field(m, "gamma")?)?;
            let delta = matrix_from_json(&square.left, field(m, "delta")?)?;
            let witness = SplitWitness::new(&square, gamma, delta)?;
            Ok(split_complete(&square, &completion, &witness)?.checks)
        }
        "recover-split" => {
            let square = square_from_json(field(m, "square")?)?;
            let completion = parse_completion(&square, m)?;
            let total = square.total();
            let a_completion = matrix_from_json(&total, field(m, "completion")?)?;
            let (_, checks) = completion_to_split(&square, &completion, &a_completion)?;
            Ok(checks)
        }
        "mv-map" => verify_mv_map(m),
        "mv-witness" => verify_mv_witness(m),
        "report" => checks_from_json(field(m, "checks")?),
        other => Err(invalid(format!("unknown witness kind `{other}`"))),
    }
}

// ====================================================================
// Tests
// ====================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homotopy::all_ok;
    use crate::matrix::shift_factors;

    fn assert_all_ok(checks: &[Check]) {
        for c in checks {
            assert!(c.ok, "failed check: {}", c.name);
        }
        assert!(all_ok(checks));
    }

    #[test]
    fn rings_round_trip() {
        let rings = vec![
            RingCtx::rationals(),
            RingCtx::poly(&["X", "Y"]).unwrap(),
            circle_ring(),
            RingCtx::direct_sum(vec![RingCtx::rationals(), RingCtx::poly(&["Y"]).unwrap()]).unwrap(),
            builtin_square("swan", Some(3)).unwrap().total(),
            builtin_square("klein", None).unwrap().total(),
        ];
        for r in rings {
            let doc = ring_to_json(&r);
            let back = ring_from_json(&doc).unwrap();
            assert_eq!(back, r, "ring failed to round-trip: {doc}");
        }
    }

    #[test]
    fn ring_shorthands_parse() {
        assert_eq!(ring_from_json(&json!("Q")).unwrap(), RingCtx::rationals());
        assert_eq!(ring_from_json(&json!("circle")).unwrap(), circle_ring());
        assert_eq!(
            ring_from_json(&json!("Q[X,Y]")).unwrap(),
            RingCtx::poly(&["X", "Y"]).unwrap()
        );
    }

    #[test]
    fn squares_round_trip() {
        for name in ["circle", "cylinder", "torus", "klein", "sphere", "projective"] {
            let square = builtin_square(name, None).unwrap();
            let back = square_from_json(&square_to_json(&square)).unwrap();
            assert_eq!(back, square, "square `{name}` failed to round-trip");
            let by_name = square_from_json(&json!(name)).unwrap();
            assert_eq!(by_name, square);
        }
        let swan = builtin_square("swan", Some(3)).unwrap();
        assert_eq!(square_from_json(&json!({"builtin": "swan", "n": 3})).unwrap(), swan);
        assert_eq!(square_from_json(&square_to_json(&swan)).unwrap(), swan);
    }

    #[test]
    fn elements_round_trip() {
        let circle = circle_ring();
        let e = Element::parse(&circle, "-3/2*X^2*Y + X - 1/2").unwrap();
        assert_eq!(element_from_json(&circle, &element_to_json(&e)).unwrap(), e);

        let sum = RingCtx::direct_sum(vec![RingCtx::rationals(), RingCtx::poly(&["Y"]).unwrap()])
            .unwrap();
        let t = Element::tuple(
            sum.clone(),
            vec![
                Element::parse(&RingCtx::rationals(), "2/3").unwrap(),
                Element::parse(&RingCtx::poly(&["Y"]).unwrap(), "Y^2 - 1").unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(element_from_json(&sum, &element_to_json(&t)).unwrap(), t);

        let square = builtin_square("swan", Some(2)).unwrap();
        let total = square.total();
        let glued = Element::fibre(
            total.clone(),
            Element::parse(&square.right, "1/2").unwrap(),
            Element::parse(&square.left, "1/2").unwrap(),
        )
        .unwrap();
        assert_eq!(element_from_json(&total, &element_to_json(&glued)).unwrap(), glued);
    }

    #[test]
    fn matrices_round_trip() {
        let circle = circle_ring();
        let rot = SqMatrix::parse(&circle, &[vec!["X", "Y"], vec!["-Y", "X"]]).unwrap();
        assert_eq!(matrix_from_json(&circle, &matrix_to_json(&rot)).unwrap(), rot);
    }

    #[test]
    fn loop_document_verifies_and_detects_tampering() {
        let base = RingCtx::rationals();
        let ring = base.extend(&["T"]).unwrap();
        let factor =
            ElemFactor::new(0, 1, Element::parse(&ring, "3*T - 3*T^2").unwrap()).unwrap();
        let matrix = assemble(&ring, 2, &[factor]).unwrap();
        let w = LoopWitness::new(base, "T", matrix).unwrap();

        let doc = loop_to_json(&w);
        assert_all_ok(&verify_witness(&doc).unwrap());

        // An endpoint that is not the identity must surface as a math
        // failure, not as an input error.
        let tampered = json!({
            "kind": "loop",
            "base": "Q",
            "var": "T",
            "matrix": [["1", "T"], ["0", "1"]],
        });
        let err = verify_witness(&tampered).unwrap_err();
        assert!(!err.is_input_error(), "unexpected error class: {err}");
    }

    #[test]
    fn chi_document_verifies() {
        let base = RingCtx::rationals();
        let ring = base.extend(&["T"]).unwrap();
        let mk = |text: &str| {
            let f = ElemFactor::new(0, 1, Element::parse(&ring, text).unwrap()).unwrap();
            LoopWitness::new(base.clone(), "T", assemble(&ring, 2, &[f]).unwrap()).unwrap()
        };
        let alpha = mk("T - T^2");
        let beta = mk("2*T^2 - 2*T");
        let cert = ChiCertificate::canonical(&alpha, &beta, "X").unwrap();
        let doc = chi_to_json(&cert);
        assert_all_ok(&verify_witness(&doc).unwrap());
    }

    #[test]
    fn certificate_document_verifies_and_detects_tampering() {
        let circle = circle_ring();
        let rot = SqMatrix::parse(&circle, &[vec!["X", "Y"], vec!["-Y", "X"]]).unwrap();
        let tau2 = rot.mul(&rot).unwrap();
        let cert = swan_certificate(3, &tau2).unwrap();
        let doc = certificate_to_json(&cert, &tau2);
        assert_all_ok(&verify_witness(&doc).unwrap());

        let mut tampered = doc.clone();
        tampered["winding"] = json!(5);
        let checks = verify_witness(&tampered).unwrap();
        assert!(checks.iter().any(|c| !c.ok), "tampered winding should fail a check");
    }

    #[test]
    fn factorization_and_smith_documents_verify() {
        let ring = RingCtx::poly(&["Y"]).unwrap();
        let factors = vec![
            ElemFactor::new(0, 1, Element::parse(&ring, "Y^2 + 1").unwrap()).unwrap(),
            ElemFactor::new(1, 0, Element::parse(&ring, "-2*Y").unwrap()).unwrap(),
        ];
        let matrix = assemble(&ring, 2, &factors).unwrap();
        let doc = factorization_to_json(&matrix, &factors);
        assert_all_ok(&verify_witness(&doc).unwrap());

        let rows = vec![vec![1, 1], vec![1, -1]];
        let factors = smith_normal_form(&rows).unwrap();
        let doc = smith_to_json(&rows, &factors);
        assert_all_ok(&verify_witness(&doc).unwrap());
    }

    #[test]
    fn winding_and_obstruction_documents_verify() {
        let circle = circle_ring();
        let rot = SqMatrix::parse(&circle, &[vec!["X", "Y"], vec!["-Y", "X"]]).unwrap();
        let report = winding_number(&rot).unwrap();
        let doc = winding_to_json(&rot, &report);
        assert_all_ok(&verify_witness(&doc).unwrap());

        let square = builtin_square("klein", None).unwrap();
        let group = obstruction_group(&square).unwrap();
        let doc = obstruction_to_json(&square, &group);
        assert_all_ok(&verify_witness(&doc).unwrap());
    }

    #[test]
    fn patch_and_split_documents_verify() {
        let square = builtin_square("swan", Some(3)).unwrap();
        let d = &square.common;
        let base_factors = vec![
            ElemFactor::new(0, 1, Element::parse(d, "X").unwrap()).unwrap(),
            ElemFactor::new(1, 0, Element::parse(d, "Y").unwrap()).unwrap(),
        ];
        let lambda = assemble(d, 2, &base_factors).unwrap();
        let witness = shift_factors(&base_factors, 1);
        let patched = milnor_patch(&square, &lambda, &witness).unwrap();

        let doc = patch_to_json(&square, &lambda, &witness, &patched.row);
        assert_all_ok(&verify_witness(&doc).unwrap());

        let cocycle_doc = json!({
            "kind": "cocycle",
            "square": square_to_json(&square),
            "row": row_to_json(&patched.completion.row),
            "theta": matrix_to_json(&patched.completion.theta),
            "sigma": matrix_to_json(&patched.completion.sigma),
            "lambda": matrix_to_json(&lambda),
        });
        assert_all_ok(&verify_witness(&cocycle_doc).unwrap());

        let lifted = vec![
            ElemFactor::new(
                0,
                1,
                square.f.preimage(&Element::parse(d, "X").unwrap()).unwrap(),
            )
            .unwrap(),
            ElemFactor::new(
                1,
                0,
                square.f.preimage(&Element::parse(d, "Y").unwrap()).unwrap(),
            )
            .unwrap(),
        ];
        let gamma = assemble(&square.right, 2, &lifted).unwrap();
        let delta = SqMatrix::identity(&square.left, 2);
        let split_doc = json!({
            "kind": "split",
            "square": square_to_json(&square),
            "row": row_to_json(&patched.completion.row),
            "theta": matrix_to_json(&patched.completion.theta),
            "sigma": matrix_to_json(&patched.completion.sigma),
            "gamma": matrix_to_json(&gamma),
            "delta": matrix_to_json(&delta),
        });
        assert_all_ok(&verify_witness(&split_doc).unwrap());

        let split = SplitWitness::new(&square, gamma, delta).unwrap();
        let completed = split_complete(&square, &patched.completion, &split).unwrap();
        let recover_doc = json!({
            "kind": "recover-split",
            "square": square_to_json(&square),
            "row": row_to_json(&patched.completion.row),
            "theta": matrix_to_json(&patched.completion.theta),
            "sigma": matrix_to_json(&patched.completion.sigma),
            "completion": matrix_to_json(&completed.matrix),
        });
        assert_all_ok(&verify_witness(&recover_doc).unwrap());
    }

    #[test]
    fn mv_map_documents_verify() {
        let square = builtin_square("circle", None).unwrap();
        let total = square.total();
        let ring = total.extend(&["T"]).unwrap();
        // A pullback loop: the right component vanishes at X = 0, 1 so it
        // glues against the zero left component.
        let right_part = Element::parse(
            &square.right.extend(&["T"]).unwrap(),
            "X*T - X*T^2 - X^2*T + X^2*T^2",
        )
        .unwrap();
        let left_part = Element::zero(&square.left.extend(&["T"]).unwrap());
        let pinned = Element::fibre(ring.clone(), right_part, left_part).unwrap();
        let factor = ElemFactor::new(0, 1, pinned).unwrap();
        let aloop =
            LoopWitness::new(total.clone(), "T", assemble(&ring, 2, &[factor]).unwrap()).unwrap();

        let doc = json!({"kind": "mv-map", "map": "psi1", "input": loop_to_json(&aloop)});
        assert_all_ok(&verify_witness(&doc).unwrap());

        let class = GammaElem::new(SqMatrix::identity(&total, 2)).unwrap();
        let doc = json!({"kind": "mv-map", "map": "phi1", "input": class_to_json(&class)});
        assert_all_ok(&verify_witness(&doc).unwrap());
    }

    #[test]
    fn report_documents_round_trip() {
        let report = Report {
            title: "example".into(),
            facts: vec![("n".into(), "3".into())],
            checks: vec![Check::new("sample check", true)],
        };
        let doc = report_to_json(&report);
        let checks = verify_witness(&doc).unwrap();
        assert_eq!(checks.len(), 1);
        assert_all_ok(&checks);
    }

    #[test]
    fn malformed_documents_are_input_errors() {
        for bad in [
            json!({"type": "nope"}),
            json!({"kind": "nope"}),
            json!({"kind": "loop", "base": "Q"}),
            json!(42),
        ] {
            let err = ring_from_json(&bad)
                .err()
                .or_else(|| verify_witness(&bad).err())
                .expect("malformed document should fail");
            assert!(err.is_input_error(), "wrong error class: {err}");
        }
    }
}
