//! Numerical winding numbers of unimodular columns around the origin.
//!
//! This is the only non-exact code in the crate.  A 2 x 2 matrix over the
//! circle quotient ring (or over an interval model of the circle) is
//! sampled along the circle; the accumulated angle of its first column
//! yields an integer winding number, together with convergence diagnostics
//! (sample count, largest angular step, residual distance to an integer).
//!
//! Sampling conventions: the parameter `t` runs through `[0, 1)`, the
//! circle point is `(cos 2 pi t, sin 2 pi t)` (counterclockwise), and the
//! sample list is closed cyclically.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::matrix::SqMatrix;
use crate::poly::{Poly, VarSet};
use crate::ring::RingKind;

/// Result of a winding computation.
#[derive(Clone, Debug, PartialEq)]
pub struct WindingReport {
    /// The integer winding number of the first column.
    pub value: i64,
    /// Number of circle samples used.
    pub samples: usize,
    /// Largest absolute angular step between consecutive samples.
    pub max_step: f64,
    /// Distance of the accumulated angle (in turns) from `value`.
    pub residual: f64,
}

const FIRST_SAMPLES: usize = 16;
const MAX_SAMPLES: usize = 1 << 20;
const RESIDUAL_TOL: f64 = 1e-6;
const NORM_TOL: f64 = 1e-9;

/// How the first column is evaluated at a circle parameter.
enum Sampler {
    /// Entries over `Q[c, s]/(c^2 + s^2 - 1)`: substitute the circle point.
    Quotient { cos_var: String, sin_var: String, col: [Poly; 2] },
    /// Entries over `Q[x]` for one variable `x`: substitute `x = t`.
    Interval { x_var: String, col: [Poly; 2] },
}

impl Sampler {
    fn eval(&self, t: f64) -> Result<(f64, f64)> {
        match self {
            Sampler::Quotient { cos_var, sin_var, col } => {
                let mut point = BTreeMap::new();
                point.insert(cos_var.clone(), (2.0 * PI * t).cos());
                point.insert(sin_var.clone(), (2.0 * PI * t).sin());
                Ok((col[0].evaluate_f64(&point)?, col[1].evaluate_f64(&point)?))
            }
            Sampler::Interval { x_var, col } => {
                let mut point = BTreeMap::new();
                point.insert(x_var.clone(), t);
                Ok((col[0].evaluate_f64(&point)?, col[1].evaluate_f64(&point)?))
            }
        }
    }
}

/// True when `relation` is `a^2 + b^2 - 1` for the two variables.
fn is_circle_relation(relation: &Poly, vars: &VarSet) -> bool {
    if vars.len() != 2 {
        return false;
    }
    let a = Poly::var(vars, &vars.names()[0]).unwrap();
    let b = Poly::var(vars, &vars.names()[1]).unwrap();
    let expected = a.mul(&a).add(&b.mul(&b)).sub(&Poly::one(vars));
    relation == &expected
}

fn first_column_polys(m: &SqMatrix) -> Result<[Poly; 2]> {
    let a = m
        .get(0, 0)
        .as_poly()
        .ok_or_else(|| Error::UnsupportedRing("matrix entries must be polynomial-like".into()))?
        .clone();
    let b = m
        .get(1, 0)
        .as_poly()
        .ok_or_else(|| Error::UnsupportedRing("matrix entries must be polynomial-like".into()))?
        .clone();
    Ok([a, b])
}

fn sampler_for(m: &SqMatrix) -> Result<Sampler> {
    if m.n() != 2 {
        return Err(Error::ShapeError("winding numbers are computed for 2 x 2 matrices".into()));
    }
    match m.ring().kind() {
        RingKind::Quotient { vars, relation, distinguished } => {
            if !is_circle_relation(relation, vars) {
                return Err(Error::UnsupportedRing(
                    "quotient sampling needs the circle relation c^2 + s^2 = 1".into(),
                ));
            }
            // The distinguished variable plays the cosine.
            let cos_var = distinguished.clone();
            let sin_var = vars
                .names()
                .iter()
                .find(|n| **n != cos_var)
                .expect("two variables")
                .clone();
            Ok(Sampler::Quotient { cos_var, sin_var, col: first_column_polys(m)? })
        }
        RingKind::Poly { vars } if vars.len() == 1 => Ok(Sampler::Interval {
            x_var: vars.names()[0].clone(),
            col: first_column_polys(m)?,
        }),
        RingKind::Fibre { .. } => {
            // Interval models of the circle: sample the right component.
            sampler_for(&m.fibre_right()?)
        }
        other => Err(Error::UnsupportedRing(format!(
            "no circle sampling convention for this ring kind: {other:?}"
        ))),
    }
}

/// Winding number of the first column of `m` around the origin.
///
/// The sample count doubles until every angular step is below `pi / 2`
/// and the accumulated angle is within `1e-6` turns of an integer; if
/// that never happens (for example because the column passes through the
/// origin), the computation fails as non-convergent.
pub fn winding_number(m: &SqMatrix) -> Result<WindingReport> {
    let sampler = sampler_for(m)?;
    let mut samples = FIRST_SAMPLES;
    loop {
        match try_winding(&sampler, samples)? {
            Some(report) => return Ok(report),
            None => {
                if samples >= MAX_SAMPLES {
                    return Err(Error::NonConvergent { samples });
                }
                samples *= 2;
            }
        }
    }
}

fn try_winding(sampler: &Sampler, samples: usize) -> Result<Option<WindingReport>> {
    let mut angles = Vec::with_capacity(samples);
    for k in 0..samples {
        let t = k as f64 / samples as f64;
        let (x, y) = sampler.eval(t)?;
        if (x * x + y * y).sqrt() < NORM_TOL {
            return Ok(None); // too close to the origin: resample
        }
        angles.push(y.atan2(x));
    }
    let mut total = 0.0f64;
    let mut max_step = 0.0f64;
    for k in 0..samples {
        let next = angles[(k + 1) % samples];
        let mut step = next - angles[k];
        while step > PI {
            step -= 2.0 * PI;
        }
        while step <= -PI {
            step += 2.0 * PI;
        }
        if step.abs() > max_step {
            max_step = step.abs();
        }
        total += step;
    }
    let turns = total / (2.0 * PI);
    let value = turns.round();
    let residual = (turns - value).abs();
    if max_step < PI / 2.0 && residual < RESIDUAL_TOL {
        Ok(Some(WindingReport { value: value as i64, samples, max_step, residual }))
    } else {
        Ok(None)
    }
}

// ====================================================================
// Tests
// ====================================================================
