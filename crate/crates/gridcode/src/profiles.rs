//! Profile sequences, their window-sum duals, and constant-time decoding.
//!
//! A profile is an integer sequence in `[0, 2*s_p]` whose m-dual (the
//! sequence of cyclic sums over windows of length `m`) has a
//! staircase-of-repeats shape: every value is taken on a contiguous run of
//! known length, so the smallest index of any value is a closed-form
//! expression in the value itself. Two families exist: the base family
//! (`reps = 0`) whose dual hits every value exactly once, and the repeating
//! family (`reps >= 1`) used for the lower rows of the packing matrix.

use crate::error::{Error, Result};

/// A profile sequence together with the parameters that generated it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    /// Profile parameter; entries stay in `[0, 2*s_p]`.
    pub s_p: u64,
    /// Window length of the intended dual.
    pub m: u64,
    /// Repetition parameter; `0` selects the base family.
    pub reps: u64,
    entries: Vec<u64>,
}

impl Profile {
    /// Base-family profile of length `2*m*s_p`.
    pub fn zero(s_p: u64, m: u64) -> Result<Self> {
        check_profile_args(s_p, m)?;
        let s = s_p;
        let len = check_profile_len(2 * u128::from(m) * u128::from(s))?;
        let mut entries = Vec::with_capacity(len);
        for c in 0..s {
            entries.extend(std::iter::repeat_n(2 * c, m as usize));
        }
        for c in 0..s {
            let v = 2 * s - 2 * c;
            entries.extend(std::iter::repeat_n(v, m as usize - 1));
            entries.push(v - 1);
        }
        debug_assert_eq!(entries.len(), len);
        Ok(Profile { s_p, m, reps: 0, entries })
    }

    /// Repeating-family profile of length `m*((2*m*s_p + 1)*reps - 2)`,
    /// for `reps >= 1`.
    pub fn with_reps(s_p: u64, m: u64, reps: u64) -> Result<Self> {
        check_profile_args(s_p, m)?;
        if reps < 1 {
            return Err(Error::InvalidParameter(
                "reps must be >= 1; use Profile::zero for the base family".into(),
            ));
        }
        let (s, t) = (s_p, reps);
        let len = check_profile_len(
            u128::from(m) * ((2 * u128::from(m) * u128::from(s) + 1) * u128::from(t) - 2),
        )?;
        let mut entries = Vec::with_capacity(len);

        // Upper band: one cell per (row r, column c), each a length-m block
        // of (m-1-r) zeros, the value 2c, then r copies of 2s, repeated t
        // times.
        for r in 0..m {
            for c in 0..s {
                for _ in 0..t {
                    entries.extend(std::iter::repeat_n(0, (m - 1 - r) as usize));
                    entries.push(2 * c);
                    entries.extend(std::iter::repeat_n(2 * s, r as usize));
                }
            }
        }
        // Pivot row: the first cell is a bare run of 2s, the rest lead with
        // the odd value 2s-2c+1.
        entries.extend(std::iter::repeat_n(2 * s, (m * t - 1) as usize));
        for c in 1..s {
            for _ in 0..t {
                entries.push(2 * s - 2 * c + 1);
                entries.extend(std::iter::repeat_n(2 * s, m as usize - 1));
            }
        }
        // Lower band: blocks lead with 1, then 2s filler, the value 2s-2c,
        // then q trailing zeros. The very first cell is repeated one time
        // less than the others.
        for q in 0..m - 1 {
            for c in 0..s {
                let cell_reps = if q == 0 && c == 0 { t - 1 } else { t };
                for _ in 0..cell_reps {
                    entries.push(1);
                    entries.extend(std::iter::repeat_n(2 * s, (m - 2 - q) as usize));
                    entries.push(2 * s - 2 * c);
                    entries.extend(std::iter::repeat_n(0, q as usize));
                }
            }
        }
        // Closing cell.
        for _ in 0..t - 1 {
            entries.push(1);
            entries.extend(std::iter::repeat_n(0, m as usize - 1));
        }
        entries.push(1);

        assert_eq!(entries.len(), len, "profile length bookkeeping");
        Ok(Profile { s_p, m, reps, entries })
    }

    /// Selects the family by `reps`: `0` yields the base profile.
    pub fn for_reps(s_p: u64, m: u64, reps: u64) -> Result<Self> {
        if reps == 0 {
            Self::zero(s_p, m)
        } else {
            Self::with_reps(s_p, m, reps)
        }
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The m-dual of this profile, using its own window length.
    pub fn dual(&self) -> Vec<u64> {
        dual(&self.entries, self.m)
    }
}

fn check_profile_args(s_p: u64, m: u64) -> Result<()> {
    if s_p < 1 {
        return Err(Error::InvalidParameter("s_p must be >= 1".into()));
    }
    if m < 2 {
        return Err(Error::InvalidParameter("m must be >= 2".into()));
    }
    Ok(())
}

fn check_profile_len(len: u128) -> Result<usize> {
    if len > u128::from(crate::params::DEFAULT_CELL_BUDGET) {
        return Err(Error::InstanceTooLarge {
            cells: len,
            budget: crate::params::DEFAULT_CELL_BUDGET,
        });
    }
    Ok(len as usize)
}

/// The m-dual of an arbitrary sequence: entry `i` is the sum of the `m`
/// consecutive entries starting at `i`, indices cyclic.
pub fn dual(seq: &[u64], m: u64) -> Vec<u64> {
    assert!(!seq.is_empty(), "dual of an empty sequence");
    assert!(m >= 1, "window length must be >= 1");
    let len = seq.len();
    // Rolling window: drop the leaving entry, add the entering one.
    let mut sum: u64 = (0..m as usize).map(|j| seq[j % len]).sum();
    let mut out = Vec::with_capacity(len);
    for i in 0..len {
        out.push(sum);
        sum -= seq[i];
        sum += seq[(i + m as usize) % len];
    }
    out
}

/// Smallest index of `v` in the dual of the base profile, in closed form.
pub fn decode_zero(v: u64, s_p: u64, m: u64) -> Result<u64> {
    check_profile_args(s_p, m)?;
    let ms = u128::from(m) * u128::from(s_p);
    if ms > u128::from(u64::MAX) / 2 {
        return Err(Error::InstanceTooLarge { cells: ms, budget: u64::MAX });
    }
    let top = 2 * ms;
    let v = u128::from(v);
    if v >= top {
        return Err(Error::NoSuchWindow);
    }
    Ok(if v.is_multiple_of(2) { v / 2 } else { top - 1 - (v - 1) / 2 } as u64)
}

/// Smallest index of `v` in the dual of the repeating profile, in closed
/// form.
pub fn decode_reps(v: u64, s_p: u64, m: u64, reps: u64) -> Result<u64> {
    check_profile_args(s_p, m)?;
    if reps < 1 {
        return Err(Error::InvalidParameter("reps must be >= 1".into()));
    }
    let (s, t) = (s_p as u128, reps as u128);
    let (v, m) = (v as u128, m as u128);
    // Indices of a profile longer than u64::MAX cannot be represented;
    // checked arithmetic keeps absurd arguments from wrapping silently.
    (2 * m)
        .checked_mul(s)
        .and_then(|ms2| ms2.checked_add(1))
        .and_then(|q| q.checked_mul(t))
        .and_then(|qt| qt.checked_mul(m))
        .filter(|&len| len <= u128::from(u64::MAX))
        .ok_or(Error::InstanceTooLarge { cells: u128::MAX, budget: u64::MAX })?;
    if v > 2 * m * s {
        return Err(Error::NoSuchWindow);
    }
    let idx = if v % 2 == 0 {
        let r = v / (2 * s);
        let c = (v / 2) % s;
        let mut idx = 0;
        if r > 0 {
            idx += r * m * t * s - r + 1;
        }
        if c > 0 {
            idx += c * m * t - 1 + u128::from(r == 0);
        }
        idx
    } else {
        let w = 2 * m * s - v + 1;
        let r = w / (2 * s);
        let c = (w / 2) % s;
        let mut idx = 1 + m * (m * t * s - 1);
        if r > 0 {
            idx += m * t * s * r - r;
        }
        if c > 0 {
            idx += c * m * t - 1;
        }
        idx
    };
    Ok(idx as u64)
}

/// Whether the dual value `v` labels a shortened run: runs of `v` in the
/// repeating profile's dual have length `m*reps - 1` exactly when `v != 0`
/// and `v mod 2*s_p` is `0` or `1`, and length `m*reps` otherwise. In the
/// packing matrix these shortened runs mark the blocks whose first column
/// is dropped.
pub fn block_is_truncated(v: u64, s_p: u64) -> bool {
    v != 0 && u128::from(v) % (2 * u128::from(s_p)) <= 1
}
