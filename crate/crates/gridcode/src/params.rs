//! Derivation and validation of all numeric parameters of a code instance.
//!
//! A code instance is fully determined by three free inputs: the grid
//! dimension `d`, the shades-per-pigment count `b`, and the scale `t`.
//! Everything else (window side, colour count, packing bounds, grid side)
//! follows from them.

use num_bigint::BigUint;

use crate::error::{Error, Result};

/// Default allocation guard: instances with more than this many cells are
/// rejected by [`derive_params`] so that builds fail fast instead of
/// exhausting memory.
pub const DEFAULT_CELL_BUDGET: u64 = 1 << 31;

/// All derived parameters of one code instance.
///
/// Nomenclature: the packing stores coordinates in `[0, s_max]` and the
/// profile generator uses the half value `s_p = s_max / 2`. Both appear
/// throughout the construction, so they are kept as separate named fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeParams {
    /// Grid dimension, at least 2.
    pub d: u32,
    /// Shades per pigment; also the packing vector dimension.
    pub b: u32,
    /// Scale parameter.
    pub t: u64,
    /// Window side, `m = 2*b*d*t`.
    pub m: u64,
    /// Colour count, `k = b*d + 1`; colour `k-1` is the blank.
    pub k: u32,
    /// Maximum packing coordinate, `s_max = m^(d-1) / (b*d)`.
    pub s_max: u64,
    /// Profile parameter, `s_p = s_max / 2`.
    pub s_p: u64,
    /// Row repetition schedule: `reps[0] = 0`, `reps[1] = 2*s_p`,
    /// `reps[j+1] = (2*m*s_p + 1)*reps[j] - 2`. Entry `b` fixes the
    /// packing width, `n = m * reps[b]`.
    pub reps: Vec<u64>,
    /// Grid/torus side.
    pub n: u64,
}

impl CodeParams {
    /// Number of cells of the full grid, `n^d`.
    pub fn cell_count(&self) -> u64 {
        (self.n as u128).pow(self.d) as u64
    }

    /// Window volume, `m^d`.
    pub fn window_volume(&self) -> u64 {
        (self.m as u128).pow(self.d) as u64
    }

    /// Largest value a window sum component can take, `2*m*s_p`.
    pub fn max_window_sum(&self) -> u64 {
        2 * self.m * self.s_p
    }
}

/// Derives a full parameter set from `(d, b, t)` under the default cell
/// budget. Deterministic; rejects out-of-range inputs and instances whose
/// grid would not fit the budget.
pub fn derive_params(d: u32, b: u32, t: u64) -> Result<CodeParams> {
    derive_params_with_budget(d, b, t, DEFAULT_CELL_BUDGET)
}

/// Same as [`derive_params`] with an explicit cell budget.
pub fn derive_params_with_budget(d: u32, b: u32, t: u64, budget: u64) -> Result<CodeParams> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("d must be >= 2, got {d}")));
    }
    if b < 1 {
        return Err(Error::InvalidParameter("b must be >= 1".into()));
    }
    if t < 1 {
        return Err(Error::InvalidParameter("t must be >= 1".into()));
    }
    let k = u64::from(b) * u64::from(d) + 1;
    if k > 255 {
        return Err(Error::ColourByteOverflow { k });
    }

    let bd = u64::from(b) * u64::from(d);
    let too_large = |cells: u128| Error::InstanceTooLarge { cells, budget };

    let m = 2u128 * bd as u128 * t as u128;
    // s_p = (2bd)^(d-2) * t^(d-1), computed checked: overflow means the
    // instance is far past any budget.
    let s_p = (2u128 * bd as u128)
        .checked_pow(d - 2)
        .and_then(|x| x.checked_mul((t as u128).checked_pow(d - 1)?))
        .ok_or_else(|| too_large(u128::MAX))?;
    let s_max = 2 * s_p;

    // 2*s_p must equal m^(d-1)/(bd) exactly.
    let m_pow = m.checked_pow(d - 1).ok_or_else(|| too_large(u128::MAX))?;
    assert_eq!(m_pow % bd as u128, 0);
    assert_eq!(m_pow / bd as u128, s_max, "profile parameter disagrees with window volume");

    let reps128 = rep_schedule_u128(s_p, m, b).ok_or_else(|| too_large(u128::MAX))?;
    let n = m
        .checked_mul(reps128[b as usize])
        .ok_or_else(|| too_large(u128::MAX))?;

    let cells = n.checked_pow(d).ok_or_else(|| too_large(u128::MAX))?;
    if cells > budget as u128 {
        return Err(too_large(cells));
    }

    // Closed-form identity for the packing width, as an exact integer:
    // s_p * n = (2*m*s_p + 1)^(b-1) * (2*m*s_p^2 - 1) + 1.
    let q = 2 * m * s_p + 1;
    let closed = q
        .checked_pow(b - 1)
        .and_then(|x| x.checked_mul(2 * m * s_p * s_p - 1))
        .and_then(|x| x.checked_add(1))
        .ok_or_else(|| too_large(u128::MAX))?;
    assert_eq!(s_p * n, closed, "packing width disagrees with closed form");
    assert_eq!(n % m, 0);
    assert_eq!(m % (2 * (k as u128 - 1)), 0);

    Ok(CodeParams {
        d,
        b,
        t,
        m: m as u64,
        k: k as u32,
        s_max: s_max as u64,
        s_p: s_p as u64,
        reps: reps128.iter().map(|&r| r as u64).collect(),
        n: n as u64,
    })
}

/// Repetition schedule `[reps_0, ..., reps_b]` for standalone packing
/// parameters: `reps_0 = 0`, `reps_1 = 2*s_p`, then
/// `reps_{j+1} = (2*m*s_p + 1)*reps_j - 2`.
pub fn rep_schedule(s_p: u64, m: u64, b: u32) -> Result<Vec<u64>> {
    rep_schedule_u128(u128::from(s_p), u128::from(m), b)
        .map(|v| v.iter().map(|&r| r as u64).collect())
        .ok_or(Error::InstanceTooLarge {
            cells: u128::MAX,
            budget: u64::MAX,
        })
}

fn rep_schedule_u128(s_p: u128, m: u128, b: u32) -> Option<Vec<u128>> {
    let q = 2u128.checked_mul(m)?.checked_mul(s_p)?.checked_add(1)?;
    let mut reps = Vec::with_capacity(b as usize + 1);
    reps.push(0u128);
    reps.push(2 * s_p);
    for _ in 1..b {
        let prev = *reps.last().unwrap();
        reps.push(q.checked_mul(prev)?.checked_sub(2)?);
    }
    if reps.iter().any(|&r| r > u64::MAX as u128) {
        return None;
    }
    Some(reps)
}

/// Exact counting-bound evaluation: `n^d` against the number of
/// distinguishable window multisets, `C(m^d + k - 1, k - 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundCheck {
    /// Whether `windows <= multisets`.
    pub holds: bool,
    /// `n^d`, the number of windows to distinguish.
    pub windows: BigUint,
    /// `C(m^d + k - 1, k - 1)`, the number of available multisets.
    pub multisets: BigUint,
}

impl BoundCheck {
    /// `multisets - windows` when the bound holds.
    pub fn margin(&self) -> Option<BigUint> {
        self.holds.then(|| &self.multisets - &self.windows)
    }
}

/// Checks the counting bound for a derived parameter set.
pub fn bound_check(p: &CodeParams) -> BoundCheck {
    bound_check_raw(p.n, p.d, p.m, u64::from(p.k))
}

/// Checks the counting bound `n^d <= C(m^d + k - 1, k - 1)` on raw values,
/// with exact big-integer arithmetic throughout.
pub fn bound_check_raw(n: u64, d: u32, m: u64, k: u64) -> BoundCheck {
    let windows = BigUint::from(n).pow(d);
    let volume = BigUint::from(m).pow(d);
    let multisets = binomial(volume + (k - 1), k - 1);
    BoundCheck {
        holds: windows <= multisets,
        windows,
        multisets,
    }
}

/// Exact binomial coefficient `C(n, r)` over big integers.
pub fn binomial(n: BigUint, r: u64) -> BigUint {
    let mut result = BigUint::from(1u32);
    let one = BigUint::from(1u32);
    if BigUint::from(r) > n {
        return BigUint::from(0u32);
    }
    let mut numerator = &n - r + &one;
    for i in 1..=r {
        // Exact at every step: a product of i consecutive integers is
        // divisible by i!.
        result = result * &numerator / BigUint::from(i);
        numerator += &one;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_instance() {
        let p = derive_params(2, 1, 1).unwrap();
        assert_eq!(p.m, 4);
        assert_eq!(p.k, 3);
        assert_eq!(p.s_p, 1);
        assert_eq!(p.s_max, 2);
        assert_eq!(p.reps, vec![0, 2]);
        assert_eq!(p.n, 8);
    }

    #[test]
    fn large_instance() {
        let p = derive_params(2, 2, 1).unwrap();
        assert_eq!(p.m, 8);
        assert_eq!(p.k, 5);
        assert_eq!(p.s_p, 1);
        assert_eq!(p.reps, vec![0, 2, 32]);
        assert_eq!(p.n, 256);
    }

    #[test]
    fn three_dimensional_instance() {
        let p = derive_params(3, 1, 1).unwrap();
        assert_eq!(p.m, 6);
        assert_eq!(p.k, 4);
        assert_eq!(p.s_p, 6);
        assert_eq!(p.s_max, 12);
        assert_eq!(p.n, 72);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(derive_params(1, 1, 1), Err(Error::InvalidParameter(_))));
        assert!(matches!(derive_params(2, 0, 1), Err(Error::InvalidParameter(_))));
        assert!(matches!(derive_params(2, 1, 0), Err(Error::InvalidParameter(_))));
        assert!(matches!(
            derive_params(2, 128, 1),
            Err(Error::ColourByteOverflow { k: 257 })
        ));
        assert!(matches!(
            derive_params(2, 1, 20_000),
            Err(Error::InstanceTooLarge { .. })
        ));
    }

    #[test]
    fn bound_check_examples() {
        let c = bound_check_raw(8, 2, 4, 3);
        assert!(c.holds);
        assert_eq!(c.windows, BigUint::from(64u32));
        assert_eq!(c.multisets, BigUint::from(153u32));

        let c = bound_check_raw(256, 2, 8, 5);
        assert!(c.holds);
        assert_eq!(c.windows, BigUint::from(65536u32));
        assert_eq!(c.multisets, BigUint::from(814_385u32));

        let c = bound_check_raw(1, 2, 1, 1);
        assert!(c.holds);
        assert_eq!(c.windows, c.multisets);
        assert_eq!(c.windows, BigUint::from(1u32));
    }

    #[test]
    fn bound_holds_on_derived_instances() {
        for (d, b, t) in [(2, 1, 1), (2, 1, 4), (2, 2, 1), (3, 1, 1), (2, 3, 1)] {
            let p = derive_params(d, b, t).unwrap();
            assert!(bound_check(&p).holds, "bound failed for ({d},{b},{t})");
        }
    }

    #[test]
    fn closed_form_width_on_sample_triples() {
        // n must satisfy s_p*n = (2*m*s_p+1)^(b-1) * (2*m*s_p^2-1) + 1.
        let triples = [(2, 1, 1), (2, 1, 5), (2, 2, 1), (3, 1, 1), (2, 3, 1), (4, 1, 1)];
        for (d, b, t) in triples {
            let p = derive_params_with_budget(d, b, t, u64::MAX).unwrap();
            let (m, s) = (p.m as u128, p.s_p as u128);
            let closed = (2 * m * s + 1).pow(b - 1) * (2 * m * s * s - 1) + 1;
            assert_eq!(s * p.n as u128, closed, "closed form failed for ({d},{b},{t})");
        }
    }

    #[test]
    fn derivation_is_pure() {
        assert_eq!(derive_params(2, 2, 3).unwrap(), derive_params(2, 2, 3).unwrap());
    }

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(BigUint::from(18u32), 2), BigUint::from(153u32));
        assert_eq!(binomial(BigUint::from(68u32), 4), BigUint::from(814_385u32));
        assert_eq!(binomial(BigUint::from(5u32), 0), BigUint::from(1u32));
        assert_eq!(binomial(BigUint::from(1u32), 2), BigUint::from(0u32));
    }
}
