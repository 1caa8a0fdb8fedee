//! The recursive packing matrix and its constant-time window-sum decoder.
//!
//! The matrix has `b` rows of width `n = m * reps[b]`. Row `j` is a
//! concatenation of profile copies with repetition parameter `reps[j]`,
//! arranged so that the `n` cyclic window sums (coordinatewise over `m`
//! consecutive columns) are pairwise distinct. Decoding a window-sum vector
//! back to its column index costs `O(b)` arithmetic operations.

use crate::error::{Error, Result};
use crate::params::{rep_schedule, DEFAULT_CELL_BUDGET};
use crate::profiles::{block_is_truncated, decode_reps, decode_zero, Profile};

/// Matrix whose columns form a vector sum packing over `[0, 2*s_p]^b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackingMatrix {
    pub s_p: u64,
    pub m: u64,
    pub b: u32,
    reps: Vec<u64>,
    rows: Vec<Vec<u16>>,
}

impl PackingMatrix {
    /// Builds the matrix for `(s_p, m, b)`.
    ///
    /// The single row of the base case is the base profile. Deeper matrices
    /// stack a repeating profile under `2*m*s_p + 1` horizontal copies of
    /// the previous matrix, visited in the dual-value order of the bottom
    /// row (evens ascending, then odds descending); copies whose label has
    /// a shortened dual run lose their first column.
    pub fn build(s_p: u64, m: u64, b: u32) -> Result<Self> {
        if b < 1 {
            return Err(Error::InvalidParameter("b must be >= 1".into()));
        }
        if s_p > u64::from(u16::MAX) / 2 {
            return Err(Error::InvalidParameter(format!(
                "packing entries up to 2*{s_p} exceed the 16-bit cell storage"
            )));
        }
        let reps = rep_schedule(s_p, m, b)?;
        let n = m
            .checked_mul(reps[b as usize])
            .filter(|n| n.checked_mul(u64::from(b)).is_some_and(|e| e <= DEFAULT_CELL_BUDGET))
            .ok_or(Error::InstanceTooLarge {
                cells: u128::from(m) * u128::from(reps[b as usize]) * u128::from(b),
                budget: DEFAULT_CELL_BUDGET,
            })?;

        let as_u16 = |p: &Profile| p.entries().iter().map(|&e| e as u16).collect::<Vec<u16>>();
        let mut rows = vec![as_u16(&Profile::zero(s_p, m)?)];
        for level in 2..=b {
            let child_width = (m * reps[level as usize - 1]) as usize;
            let width = (m * reps[level as usize]) as usize;
            let mut next: Vec<Vec<u16>> = rows
                .iter()
                .map(|row| {
                    let mut out = Vec::with_capacity(width);
                    for label in dual_value_order(2 * m * s_p) {
                        let skip = usize::from(block_is_truncated(label, s_p));
                        out.extend_from_slice(&row[skip..]);
                    }
                    out
                })
                .collect();
            next.push(as_u16(&Profile::with_reps(s_p, m, reps[level as usize - 1])?));
            for (j, row) in next.iter().enumerate() {
                assert_eq!(row.len(), width, "width bookkeeping failed at row {j}");
            }
            debug_assert_eq!(rows[0].len(), child_width);
            rows = next;
        }
        debug_assert_eq!(rows.len(), b as usize);
        debug_assert_eq!(rows[0].len() as u64, n);
        Ok(PackingMatrix { s_p, m, b, reps, rows })
    }

    /// Number of columns, `n = m * reps[b]`.
    pub fn width(&self) -> u64 {
        self.rows[0].len() as u64
    }

    pub fn rows(&self) -> &[Vec<u16>] {
        &self.rows
    }

    pub fn row(&self, j: usize) -> &[u16] {
        &self.rows[j]
    }

    /// Coordinatewise sum of the `m` columns starting at `i`, cyclic.
    pub fn window_sum(&self, i: u64) -> Vec<u64> {
        window_sum_rows(&self.rows, self.m, i)
    }

    /// Decodes a window-sum vector to its column index in `O(b)` arithmetic
    /// operations, without consulting the matrix. Unrealizable in-range
    /// vectors may decode to an arbitrary index; see
    /// [`PackingMatrix::decode_checked`].
    pub fn decode(&self, x: &[u64]) -> Result<u64> {
        decode_with_schedule(x, self.s_p, self.m, &self.reps, self.width())
    }

    /// Decodes and re-verifies the answer with one window-sum evaluation,
    /// rejecting vectors no window realizes.
    pub fn decode_checked(&self, x: &[u64]) -> Result<u64> {
        let i = self.decode(x)?;
        if self.window_sum(i) == x {
            Ok(i)
        } else {
            Err(Error::NoSuchWindow)
        }
    }

    /// All `n` window sums of one row, computed by a rolling window.
    pub fn dual_row(&self, j: usize) -> Vec<u64> {
        let row = &self.rows[j];
        let n = row.len();
        let m = self.m as usize;
        let mut sum: u64 = (0..m).map(|c| u64::from(row[c % n])).sum();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(sum);
            sum -= u64::from(row[i]);
            sum += u64::from(row[(i + m) % n]);
        }
        out
    }
}

/// Column labels in the dual-value order of the bottom row: evens
/// ascending to `top`, then odds descending from `top - 1`.
pub fn dual_value_order(top: u64) -> impl Iterator<Item = u64> {
    (0..=top)
        .step_by(2)
        .chain((1..=top.saturating_sub(1)).rev().step_by(2))
}

/// Window sum of arbitrary rows at column `i` (reduced cyclically).
pub fn window_sum_rows(rows: &[Vec<u16>], m: u64, i: u64) -> Vec<u64> {
    let n = rows[0].len() as u64;
    let i = i % n;
    rows.iter()
        .map(|row| (0..m).map(|c| u64::from(row[((i + c) % n) as usize])).sum())
        .collect()
}

/// Standalone decoder for a window-sum vector of the `(s_p, m, b)` packing.
pub fn decode_vector(x: &[u64], s_p: u64, m: u64, b: u32) -> Result<u64> {
    decode_vector_scheduled(x, s_p, m, &rep_schedule(s_p, m, b)?)
}

/// Decoder taking a precomputed repetition schedule, for allocation-free
/// hot paths.
pub fn decode_vector_scheduled(x: &[u64], s_p: u64, m: u64, reps: &[u64]) -> Result<u64> {
    let n = m
        .checked_mul(*reps.last().expect("non-empty schedule"))
        .ok_or(Error::InstanceTooLarge { cells: u128::MAX, budget: u64::MAX })?;
    decode_with_schedule(x, s_p, m, reps, n)
}

fn decode_with_schedule(x: &[u64], s_p: u64, m: u64, reps: &[u64], n: u64) -> Result<u64> {
    let b = reps.len() - 1;
    if x.len() != b {
        return Err(Error::InvalidParameter(format!(
            "expected a {b}-component vector, got {}",
            x.len()
        )));
    }
    // One profile decode per row; each row nested inside a shortened block
    // contributes one less. Intermediate sums may dip below zero on
    // unrealizable input, so accumulate signed.
    let mut total: i128 = 0;
    for j in (0..b).rev() {
        let c = if j == 0 {
            decode_zero(x[0], s_p, m)?
        } else {
            decode_reps(x[j], s_p, m, reps[j])?
        };
        let shortened = j + 1 < b && block_is_truncated(x[j + 1], s_p);
        total += i128::from(c) - i128::from(shortened);
    }
    if total < 0 || total >= i128::from(n) {
        return Err(Error::NoSuchWindow);
    }
    Ok(total as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn golden_base_matrix() {
        let m1 = PackingMatrix::build(1, 2, 1).unwrap();
        assert_eq!(m1.rows(), [[0, 0, 2, 1]]);
        let m1 = PackingMatrix::build(1, 4, 1).unwrap();
        assert_eq!(m1.rows(), [[0, 0, 0, 0, 2, 2, 2, 1]]);
    }

    #[test]
    fn golden_two_row_matrix() {
        let m2 = PackingMatrix::build(1, 2, 2).unwrap();
        assert_eq!(
            m2.rows(),
            [
                [0, 0, 2, 1, 0, 2, 1, 0, 2, 1, 0, 2, 1, 0, 2, 1],
                [0, 0, 0, 0, 0, 2, 0, 2, 2, 2, 2, 1, 2, 1, 0, 1],
            ]
        );
        assert_eq!(m2.width(), 16);
    }

    #[test]
    fn window_sum_examples() {
        let m2 = PackingMatrix::build(1, 2, 2).unwrap();
        assert_eq!(m2.window_sum(0), [0, 0]);
        assert_eq!(m2.window_sum(5), [3, 2]);
        let rows = vec![vec![0u16, 0, 0, 2, 2, 2, 1]];
        assert_eq!(window_sum_rows(&rows, 3, 3), [6]);
    }

    #[test]
    fn decode_examples() {
        let m2 = PackingMatrix::build(1, 2, 2).unwrap();
        assert_eq!(m2.decode(&[0, 0]).unwrap(), 0);
        assert_eq!(m2.decode(&[3, 2]).unwrap(), 5);
        assert_eq!(m2.decode(&[1, 1]).unwrap(), 15);
        assert_eq!(decode_vector(&[3, 2], 1, 2, 2).unwrap(), 5);
    }

    #[test]
    fn decode_checked_rejects_unrealizable_vectors() {
        let m2 = PackingMatrix::build(1, 2, 2).unwrap();
        // In range componentwise, but no window sums to it.
        assert!(matches!(m2.decode_checked(&[0, 2]), Err(Error::NoSuchWindow)));
        // Out of range outright.
        assert!(matches!(m2.decode(&[6, 0]), Err(Error::NoSuchWindow)));
        assert!(matches!(m2.decode(&[0, 6]), Err(Error::NoSuchWindow)));
        // Realizable vectors survive the check.
        assert_eq!(m2.decode_checked(&[3, 2]).unwrap(), 5);
    }

    #[test]
    fn wrong_arity_is_reported() {
        let m2 = PackingMatrix::build(1, 2, 2).unwrap();
        assert!(matches!(m2.decode(&[1]), Err(Error::InvalidParameter(_))));
    }

    fn exhaustive_cases() -> Vec<(u64, u64, u32)> {
        vec![
            (1, 2, 1),
            (1, 2, 2),
            (1, 2, 3),
            (1, 2, 4),
            (2, 2, 2),
            (3, 2, 2),
            (1, 3, 2),
            (2, 3, 1),
            (1, 4, 2),
            (2, 4, 3),
        ]
    }

    #[test]
    fn window_sums_are_distinct_and_decode_round_trips() {
        for (s, m, b) in exhaustive_cases() {
            let mat = PackingMatrix::build(s, m, b).unwrap();
            let n = mat.width();
            assert_eq!(n, m * mat.reps[b as usize], "width law for ({s},{m},{b})");
            let mut seen = HashSet::new();
            for i in 0..n {
                let ws = mat.window_sum(i);
                assert!(ws.iter().all(|&c| c <= 2 * m * s), "component range");
                assert!(seen.insert(ws.clone()), "duplicate window sum at {i}");
                assert_eq!(
                    mat.decode(&ws).unwrap(),
                    i,
                    "round trip failed at {i} for ({s},{m},{b})"
                );
            }
        }
    }

    #[test]
    fn dual_row_matches_window_sums() {
        let mat = PackingMatrix::build(2, 3, 2).unwrap();
        for j in 0..mat.b as usize {
            let d = mat.dual_row(j);
            for i in 0..mat.width() {
                assert_eq!(d[i as usize], mat.window_sum(i)[j]);
            }
        }
    }

    /// Start offsets of every profile copy inside row `j`, across all
    /// nesting levels, with a flag for copies that lost their first entry.
    fn piece_starts(s: u64, m: u64, b: u32, row: u32) -> Vec<(u64, bool)> {
        if b == 1 || row == b - 1 {
            return vec![(0, false)];
        }
        let reps = rep_schedule(s, m, b).unwrap();
        let child_width = m * reps[b as usize - 1];
        let child = piece_starts(s, m, b - 1, row);
        let mut out = Vec::new();
        let mut offset = 0;
        for label in dual_value_order(2 * m * s) {
            let trunc = block_is_truncated(label, s);
            for &(p, ptrunc) in &child {
                if p == 0 {
                    out.push((offset, ptrunc || trunc));
                } else {
                    out.push((offset + p - u64::from(trunc), ptrunc));
                }
            }
            offset += child_width - u64::from(trunc);
        }
        out
    }

    #[test]
    fn every_piece_leads_with_zeros() {
        // Each profile copy in the upper rows must begin with at least m-1
        // zeros even after truncation; this is what lets window sums of the
        // concatenation split at copy boundaries.
        for (s, m, b) in [(1, 2, 3), (2, 2, 2), (1, 3, 2), (2, 4, 2)] {
            let mat = PackingMatrix::build(s, m, b).unwrap();
            for row in 0..b - 1 {
                for (start, _) in piece_starts(s, m, b, row) {
                    let r = mat.row(row as usize);
                    for off in 0..m - 1 {
                        assert_eq!(
                            r[(start + off) as usize], 0,
                            "row {row} piece at {start} not zero-led for ({s},{m},{b})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn oversized_entries_are_rejected() {
        assert!(PackingMatrix::build(40_000, 2, 1).is_err());
    }
}
