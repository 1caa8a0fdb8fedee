//! Independent brute-force oracles for every claimed property.
//!
//! Everything here is exact: window multisets are enumerated by incremental
//! slab updates and compared as full count vectors, packings by their
//! complete window-sum tables. Counterexamples are canonical (the
//! lexicographically smallest failing pair), so reports are deterministic
//! regardless of how many workers scanned the grid.

use std::collections::HashMap;
use std::ops::Range;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::grid::{pigment_shade, ColourMultiset, GridColouring, Position};
use crate::packing::PackingMatrix;

/// Default cap on the number of windows or cells an oracle will examine.
pub const DEFAULT_VERIFY_CAP: u64 = 1_000_000;

/// Outcome of one verification scan.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub property: &'static str,
    pub passed: bool,
    /// Windows or cells examined.
    pub examined: u64,
    pub elapsed: Duration,
    pub counterexample: Option<Counterexample>,
}

/// The smallest failing pair, as positions (or single indices) plus the
/// offending values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub first: Vec<u64>,
    pub second: Vec<u64>,
    pub values: String,
}

impl std::fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "{status} {}: examined={} elapsed={:?}",
            self.property, self.examined, self.elapsed
        )?;
        if let Some(ce) = &self.counterexample {
            write!(f, " counterexample=({:?} vs {:?}: {})", ce.first, ce.second, ce.values)?;
        }
        Ok(())
    }
}

fn report(
    property: &'static str,
    examined: u64,
    started: Instant,
    counterexample: Option<Counterexample>,
) -> VerificationReport {
    VerificationReport {
        property,
        passed: counterexample.is_none(),
        examined,
        elapsed: started.elapsed(),
        counterexample,
    }
}

/// Checks that all cyclic window sums of the built packing are distinct.
pub fn verify_packing_injectivity(matrix: &PackingMatrix, cap: u64) -> Result<VerificationReport> {
    verify_rows_injectivity(matrix.rows(), matrix.m, cap)
}

/// Window-sum injectivity oracle over arbitrary rows.
pub fn verify_rows_injectivity(
    rows: &[Vec<u16>],
    m: u64,
    cap: u64,
) -> Result<VerificationReport> {
    let started = Instant::now();
    let n = rows[0].len() as u64;
    if n > cap {
        return Err(Error::CapExceeded { needed: u128::from(n), cap });
    }
    // Rolling duals, one pass per row.
    let duals: Vec<Vec<u64>> = rows
        .iter()
        .map(|row| {
            let len = row.len();
            let mut sum: u64 = (0..m as usize).map(|c| u64::from(row[c % len])).sum();
            let mut out = Vec::with_capacity(len);
            for i in 0..len {
                out.push(sum);
                sum -= u64::from(row[i]);
                sum += u64::from(row[(i + m as usize) % len]);
            }
            out
        })
        .collect();

    let mut seen: HashMap<Box<[u64]>, SmallestPair> = HashMap::new();
    for i in 0..n as usize {
        let key: Box<[u64]> = duals.iter().map(|d| d[i]).collect();
        seen.entry(key).or_default().insert(i as u64);
    }
    let ce = smallest_collision(&seen).map(|(key, a, b)| Counterexample {
        first: vec![a],
        second: vec![b],
        values: format!("window sum {key:?}"),
    });
    Ok(report("packing-injectivity", n, started, ce))
}

/// Two smallest occurrences of one key, merged associatively.
#[derive(Debug, Clone, Copy)]
struct SmallestPair {
    first: u64,
    second: u64,
}

impl Default for SmallestPair {
    fn default() -> Self {
        SmallestPair { first: u64::MAX, second: u64::MAX }
    }
}

impl SmallestPair {
    fn insert(&mut self, v: u64) {
        if v < self.first {
            self.second = self.first;
            self.first = v;
        } else if v < self.second {
            self.second = v;
        }
    }

    fn merge(&mut self, other: SmallestPair) {
        self.insert(other.first);
        if other.second != u64::MAX {
            self.insert(other.second);
        }
    }
}

fn smallest_collision<K: Clone>(seen: &HashMap<K, SmallestPair>) -> Option<(K, u64, u64)> {
    seen.iter()
        .filter(|(_, p)| p.second != u64::MAX)
        .min_by_key(|(_, p)| (p.first, p.second))
        .map(|(k, p)| (k.clone(), p.first, p.second))
}

fn unflatten(mut flat: u64, n: u64, d: usize) -> Vec<u64> {
    let mut out = vec![0u64; d];
    for l in (0..d).rev() {
        out[l] = flat % n;
        flat /= n;
    }
    out
}

/// Streams every window multiset of the given row-groups (the flattened
/// first `d-1` coordinates) in lexicographic corner order. One full count
/// per group, then slab add/remove per unit step along the last axis.
fn scan_windows<F>(g: &GridColouring, groups: Range<u64>, f: &mut F)
where
    F: FnMut(u64, &[u64], &[u64]),
{
    let p = g.params();
    let d = p.d as usize;
    let (n, m) = (p.n, p.m);
    let mut counts = vec![0u64; p.k as usize];
    let mut pos = vec![0u64; d];
    let mut cell = vec![0u64; d];
    let mut off = vec![0u64; d];

    for group in groups {
        let mut rem = group;
        for l in (0..d - 1).rev() {
            pos[l] = rem % n;
            rem /= n;
        }
        pos[d - 1] = 0;

        counts.iter_mut().for_each(|c| *c = 0);
        off.iter_mut().for_each(|o| *o = 0);
        loop {
            for l in 0..d {
                cell[l] = pos[l] + off[l];
            }
            counts[g.colour(&cell) as usize] += 1;
            if !bump(&mut off, m) {
                break;
            }
        }

        for last in 0..n {
            pos[d - 1] = last;
            f(group * n + last, &pos, &counts);
            if last + 1 == n {
                break;
            }
            // Slide: the slab at the old last coordinate leaves, the slab
            // just past the window enters.
            off[..d - 1].iter_mut().for_each(|o| *o = 0);
            loop {
                for l in 0..d - 1 {
                    cell[l] = pos[l] + off[l];
                }
                cell[d - 1] = last;
                counts[g.colour(&cell) as usize] -= 1;
                cell[d - 1] = last + m;
                counts[g.colour(&cell) as usize] += 1;
                if !bump(&mut off[..d - 1], m) {
                    break;
                }
            }
        }
    }
}

/// Odometer increment, last digit fastest; false once all digits wrapped.
fn bump(digits: &mut [u64], radix: u64) -> bool {
    for pos in (0..digits.len()).rev() {
        digits[pos] += 1;
        if digits[pos] == radix {
            digits[pos] = 0;
        } else {
            return true;
        }
    }
    false
}

fn window_cap_check(g: &GridColouring, cap: u64) -> Result<u64> {
    let windows = u128::from(g.params().n).pow(g.params().d);
    if windows > u128::from(cap) {
        return Err(Error::CapExceeded { needed: windows, cap });
    }
    Ok(windows as u64)
}

/// Enumerates all `n^d` window multisets and reports the first colliding
/// pair, scanning with `workers` parallel threads over contiguous ranges.
pub fn verify_grid_uniqueness(
    g: &GridColouring,
    cap: u64,
    workers: usize,
) -> Result<VerificationReport> {
    let started = Instant::now();
    let windows = window_cap_check(g, cap)?;
    let p = g.params();
    let groups = windows / p.n;
    let workers = workers.clamp(1, groups.max(1) as usize) as u64;

    let maps: Vec<HashMap<Box<[u32]>, SmallestPair>> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for w in 0..workers {
            let lo = groups * w / workers;
            let hi = groups * (w + 1) / workers;
            handles.push(scope.spawn(move || {
                let mut local: HashMap<Box<[u32]>, SmallestPair> = HashMap::new();
                scan_windows(g, lo..hi, &mut |flat, _pos, counts| {
                    let key: Box<[u32]> = counts.iter().map(|&c| c as u32).collect();
                    local.entry(key).or_default().insert(flat);
                });
                local
            }));
        }
        handles.into_iter().map(|h| h.join().expect("scan worker")).collect()
    });

    let mut merged: HashMap<Box<[u32]>, SmallestPair> = HashMap::new();
    for map in maps {
        for (key, pair) in map {
            merged.entry(key).or_default().merge(pair);
        }
    }
    let d = p.d as usize;
    let ce = smallest_collision(&merged).map(|(key, a, b)| Counterexample {
        first: unflatten(a, p.n, d),
        second: unflatten(b, p.n, d),
        values: format!("multiset {key:?}"),
    });
    Ok(report("grid-uniqueness", windows, started, ce))
}

/// Checks that every non-blank cell keeps its colour under translation by
/// `m` along every axis other than its own pigment's.
pub fn verify_quasi_periodicity(g: &GridColouring, cap: u64) -> Result<VerificationReport> {
    let started = Instant::now();
    let cells = window_cap_check(g, cap)?;
    let p = g.params();
    let d = p.d as usize;
    let mut pos = vec![0u64; d];
    let mut other = vec![0u64; d];
    for flat in 0..cells {
        let colour = g.cells()[flat as usize];
        if let Some((pigment, _)) = pigment_shade(colour, p.d, p.b) {
            let mut bad: Option<Vec<u64>> = None;
            for j in 0..d {
                if j == pigment as usize {
                    continue;
                }
                other.copy_from_slice(&pos);
                other[j] = (other[j] + p.m) % p.n;
                if g.colour(&other) != colour {
                    bad = match bad {
                        Some(prev) if prev <= other => Some(prev),
                        _ => Some(other.clone()),
                    };
                }
            }
            if let Some(second) = bad {
                let values =
                    format!("colour {} vs {}", colour, g.colour(&second));
                let ce = Counterexample { first: pos, second, values };
                return Ok(report("quasi-periodicity", flat + 1, started, Some(ce)));
            }
        }
        bump(&mut pos, p.n);
    }
    Ok(report("quasi-periodicity", cells, started, None))
}

/// Checks that the pigment-i part of a window multiset depends only on the
/// window's i-th coordinate, by comparing every window against the first
/// window sharing that coordinate.
pub fn verify_anti_dimensional_consistency(
    g: &GridColouring,
    cap: u64,
) -> Result<VerificationReport> {
    let started = Instant::now();
    let windows = window_cap_check(g, cap)?;
    let p = g.params();
    let d = p.d as usize;
    let b = p.b as usize;
    let mut refs: Vec<Vec<Option<Box<[u64]>>>> =
        vec![vec![None; p.n as usize]; d];
    // (reference flat, offending flat) of the best counterexample so far.
    let mut worst: Option<(u64, u64, usize)> = None;

    scan_windows(g, 0..windows / p.n, &mut |flat, pos, counts| {
        for i in 0..d {
            let vector: Box<[u64]> =
                (0..b).map(|shade| counts[shade * d + i]).collect();
            match &refs[i][pos[i] as usize] {
                Some(expected) if **expected != *vector => {
                    let ref_flat = pos[i] * p.n.pow((d - 1 - i) as u32);
                    let cand = (ref_flat, flat, i);
                    if worst.is_none_or(|w| (cand.0, cand.1) < (w.0, w.1)) {
                        worst = Some(cand);
                    }
                }
                Some(_) => {}
                None => refs[i][pos[i] as usize] = Some(vector),
            }
        }
    });

    let ce = worst.map(|(a, b_flat, i)| Counterexample {
        first: unflatten(a, p.n, d),
        second: unflatten(b_flat, p.n, d),
        values: format!("pigment {i} sub-multiset differs"),
    });
    Ok(report("anti-dimensional-consistency", windows, started, ce))
}

/// Checks that distinct values of each coordinate produce distinct
/// pigment sub-multisets, over the axis-aligned reference windows.
pub fn verify_dimensional_inconsistency(
    g: &GridColouring,
    cap: u64,
) -> Result<VerificationReport> {
    let started = Instant::now();
    let p = g.params();
    let d = p.d as usize;
    let b = p.b as usize;
    let examined = u128::from(p.n) * d as u128;
    if examined > u128::from(cap) {
        return Err(Error::CapExceeded { needed: examined, cap });
    }

    let mut best: Option<(u64, u64, usize, Box<[u64]>)> = None;
    let mut corner = vec![0u64; d];
    for i in 0..d {
        let mut seen: HashMap<Box<[u64]>, SmallestPair> = HashMap::new();
        for v in 0..p.n {
            corner.iter_mut().for_each(|c| *c = 0);
            corner[i] = v;
            let mult = g.colour_multiset(&corner);
            let vector: Box<[u64]> =
                (0..b).map(|shade| mult.counts[shade * d + i]).collect();
            seen.entry(vector).or_default().insert(v);
        }
        if let Some((key, a, bb)) = smallest_collision(&seen) {
            let ref_a = a * p.n.pow((d - 1 - i) as u32);
            let ref_b = bb * p.n.pow((d - 1 - i) as u32);
            if best.as_ref().is_none_or(|w| (ref_a, ref_b) < (w.0, w.1)) {
                best = Some((ref_a, ref_b, i, key));
            }
        }
    }
    let ce = best.map(|(a, bb, i, key)| Counterexample {
        first: unflatten(a, p.n, d),
        second: unflatten(bb, p.n, d),
        values: format!("pigment {i} sub-multiset {key:?} repeats"),
    });
    Ok(report("dimensional-inconsistency", examined as u64, started, ce))
}

/// Ground-truth localization: linear scan over every window.
pub fn oracle_localize(
    g: &GridColouring,
    mult: &ColourMultiset,
    cap: u64,
) -> Result<Option<Position>> {
    let windows = window_cap_check(g, cap)?;
    let p = g.params();
    if mult.counts.len() != p.k as usize {
        return Err(Error::InvalidParameter(format!(
            "expected {} counts, got {}",
            p.k,
            mult.counts.len()
        )));
    }
    let mut found: Option<u64> = None;
    scan_windows(g, 0..windows / p.n, &mut |flat, _pos, counts| {
        if found.is_none() && counts == mult.counts.as_slice() {
            found = Some(flat);
        }
    });
    Ok(found.map(|flat| Position(unflatten(flat, p.n, p.d as usize))))
}

/// Runs every grid-level check plus the packing oracle for the grid's own
/// parameters, in a fixed order.
pub fn verify_all(g: &GridColouring, cap: u64, workers: usize) -> Result<Vec<VerificationReport>> {
    let p = g.params();
    let matrix = PackingMatrix::build(p.s_p, p.m, p.b)?;
    Ok(vec![
        verify_packing_injectivity(&matrix, cap)?,
        verify_grid_uniqueness(g, cap, workers)?,
        verify_quasi_periodicity(g, cap)?,
        verify_anti_dimensional_consistency(g, cap)?,
        verify_dimensional_inconsistency(g, cap)?,
    ])
}
