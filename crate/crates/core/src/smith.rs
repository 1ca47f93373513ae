//! Smith normal form for small integer matrices.
//!
//! Used to name finitely generated abelian groups from a matrix whose rows
//! generate a subgroup of `Z^n`: the invariant factors of the generator
//! matrix determine the quotient group up to isomorphism.

use crate::error::{Error, Result};

/// Largest matrix dimension accepted; everything here is tiny.
const MAX_DIM: usize = 8;

/// Invariant factors `d_1 | d_2 | ... | d_k` (`k = min(rows, cols)`) of an
/// integer matrix, nonnegative, with the divisibility chain enforced and
/// zeros trailing.
pub fn smith_normal_form(rows: &[Vec<i64>]) -> Result<Vec<i64>> {
    let m = rows.len();
    if m == 0 {
        return Err(Error::ShapeError("matrix must have at least one row".into()));
    }
    let n = rows[0].len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::ShapeError("matrix rows must be nonempty and of equal length".into()));
    }
    if m > MAX_DIM || n > MAX_DIM {
        return Err(Error::ShapeError(format!("matrix dimensions must be at most {MAX_DIM}")));
    }
    let mut a: Vec<Vec<i64>> = rows.to_vec();

    let k = m.min(n);
    for t in 0..k {
        // Move the smallest nonzero entry of the trailing block to (t, t),
        // then alternately clear its row and column; restarting whenever a
        // remainder appears keeps every entry shrinking.
        'pivot: loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    if a[i][j] != 0 {
                        let better = match best {
                            None => true,
                            Some((bi, bj)) => a[i][j].abs() < a[bi][bj].abs(),
                        };
                        if better {
                            best = Some((i, j));
                        }
                    }
                }
            }
            let (pi, pj) = match best {
                None => break 'pivot, // trailing block is zero
                Some(p) => p,
            };
            a.swap(t, pi);
            for row in a.iter_mut() {
                row.swap(t, pj);
            }

            // Reduce the pivot column.
            for i in t + 1..m {
                if a[i][t] != 0 {
                    let q = a[i][t] / a[t][t];
                    for j in 0..n {
                        a[i][j] -= q * a[t][j];
                    }
                    if a[i][t] != 0 {
                        continue 'pivot; // smaller remainder: re-pivot
                    }
                }
            }
            // Reduce the pivot row.
            for j in t + 1..n {
                if a[t][j] != 0 {
                    let q = a[t][j] / a[t][t];
                    for i in 0..m {
                        a[i][j] -= q * a[i][t];
                    }
                    if a[t][j] != 0 {
                        continue 'pivot;
                    }
                }
            }
            // Enforce divisibility: fold any non-multiple into the pivot
            // row and restart.
            for i in t + 1..m {
                for j in t + 1..n {
                    if a[i][j] % a[t][t] != 0 {
                        for jj in 0..n {
                            a[t][jj] += a[i][jj];
                        }
                        continue 'pivot;
                    }
                }
            }
            break 'pivot;
        }
    }

    let mut factors: Vec<i64> = (0..k).map(|t| a[t][t].abs()).collect();
    // Zeros trail by construction (a zero pivot means the block was zero),
    // but sort defensively: nonzero factors first, then zeros.
    factors.sort_by_key(|&d| (d == 0, d));
    Ok(factors)
}

/// Human-readable name of `Z^n / (row span)` from the invariant factors:
/// units are dropped, zero factors contribute free summands.
pub fn group_name(factors: &[i64]) -> String {
    let mut parts: Vec<String> = Vec::new();
    for &d in factors {
        match d {
            0 => parts.push("Z".to_string()),
            1 => {}
            d => parts.push(format!("Z_{d}")),
        }
    }
    if parts.is_empty() {
        "trivial".to_string()
    } else {
        parts.join(" x ")
    }
}

// ====================================================================
// Tests
// ====================================================================
