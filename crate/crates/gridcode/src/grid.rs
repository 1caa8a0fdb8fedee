//! Grid colouring construction, window multiset sampling, and localization.
//!
//! Colours are (pigment, shade) pairs encoded as `pigment + shade*d`; the
//! extra colour `k-1 = b*d` is the blank. Each dimension owns one pigment,
//! and the packing matrix prescribes how many cells of each shade survive
//! in every slab, so that the multiset of colours in any `m^d` window pins
//! down every coordinate of its corner.

use crate::error::{Error, Result};
use crate::packing::PackingMatrix;
use crate::params::CodeParams;

/// A window corner, one coordinate per dimension, each in `[0, n-1]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Position(pub Vec<u64>);

impl Position {
    pub fn coords(&self) -> &[u64] {
        &self.0
    }
}

impl std::fmt::Display for Position {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let strs: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", strs.join(","))
    }
}

/// Counts per colour over one window; sums to `m^d` for a full window.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ColourMultiset {
    pub counts: Vec<u64>,
}

impl ColourMultiset {
    pub fn new(counts: Vec<u64>) -> Self {
        ColourMultiset { counts }
    }

    /// Builds a length-`k` count vector from sparse `colour:count` pairs.
    pub fn from_pairs(pairs: &[(u32, u64)], k: u32) -> Result<Self> {
        let mut counts = vec![0u64; k as usize];
        for &(colour, count) in pairs {
            if colour >= k {
                return Err(Error::InvalidParameter(format!(
                    "colour {colour} out of range for k = {k}"
                )));
            }
            counts[colour as usize] += count;
        }
        Ok(ColourMultiset { counts })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// How much of the construction to apply; used to inspect intermediate
/// results. [`GridColouring::build`] is the `Complete` stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuildStage {
    /// The residue colouring only, with no erasure.
    Initial,
    /// Erasure fully propagated for the first `full_dims` dimensions;
    /// with `base_block_next`, erasure for the following dimension is
    /// applied inside its base blocks only.
    Erased { full_dims: u32, base_block_next: bool },
    Complete,
}

/// A d-dimensional periodic colouring, one byte per cell, row-major with
/// the last coordinate fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridColouring {
    params: CodeParams,
    cells: Vec<u8>,
}

impl GridColouring {
    /// Runs the full construction for a derived parameter set.
    pub fn build(p: &CodeParams) -> Result<Self> {
        Self::build_stage(p, BuildStage::Complete)
    }

    /// Runs the construction up to the given stage.
    pub fn build_stage(p: &CodeParams, stage: BuildStage) -> Result<Self> {
        let d = p.d as usize;
        let (full_dims, base_next) = match stage {
            BuildStage::Initial => (0usize, false),
            BuildStage::Erased { full_dims, base_block_next } => {
                if full_dims as usize + usize::from(base_block_next) > d {
                    return Err(Error::InvalidParameter(format!(
                        "stage exceeds dimension {d}"
                    )));
                }
                (full_dims as usize, base_block_next)
            }
            BuildStage::Complete => (d, false),
        };
        let erase_dims = full_dims + usize::from(base_next);

        let n = p.n;
        let m = p.m;
        let bd = u64::from(p.b) * u64::from(p.d);
        let blank = bd as u8;
        let base_volume = (m as u128).pow(p.d - 1) as u64;

        // Per-dimension erasure masks over (slab index, base-block offset),
        // chosen keep-first in lexicographic coordinate order.
        let mut erased: Vec<Vec<bool>> = Vec::with_capacity(erase_dims);
        if erase_dims > 0 {
            let matrix = PackingMatrix::build(p.s_p, m, p.b)?;
            for i in 0..erase_dims {
                let mut mask = vec![false; (n * base_volume) as usize];
                for j in 0..n {
                    let mut keep: Vec<u64> = (0..p.b as usize)
                        .map(|shade| u64::from(matrix.row(shade)[j as usize]))
                        .collect();
                    let mut seen = vec![0u64; p.b as usize];
                    let mut digits = vec![0u64; d - 1];
                    let mut dsum = 0u64;
                    for idx in 0..base_volume {
                        let residue = (j + dsum) % bd;
                        if (residue % u64::from(p.d)) as usize == i {
                            let shade = (residue / u64::from(p.d)) as usize;
                            seen[shade] += 1;
                            if keep[shade] > 0 {
                                keep[shade] -= 1;
                            } else {
                                mask[(j * base_volume + idx) as usize] = true;
                            }
                        }
                        for pos in (0..digits.len()).rev() {
                            digits[pos] += 1;
                            dsum += 1;
                            if digits[pos] == m {
                                digits[pos] = 0;
                                dsum -= m;
                            } else {
                                break;
                            }
                        }
                    }
                    assert!(
                        seen.iter().all(|&c| c == p.s_max),
                        "slab ({i},{j}) does not hold s_max cells of every shade"
                    );
                }
                erased.push(mask);
            }
        }

        let cell_count = p.cell_count() as usize;
        let mut cells = vec![0u8; cell_count];
        let mut coords = vec![0u64; d];
        let mut csum = 0u64;
        for slot in cells.iter_mut() {
            let residue = csum % bd;
            let pigment = (residue % u64::from(p.d)) as usize;
            let eligible = pigment < full_dims
                || (base_next
                    && pigment == full_dims
                    && coords
                        .iter()
                        .enumerate()
                        .all(|(l, &x)| l == pigment || x < m));
            let erase = eligible && {
                let mut off = 0u64;
                for (l, &x) in coords.iter().enumerate() {
                    if l != pigment {
                        off = off * m + x % m;
                    }
                }
                erased[pigment][(coords[pigment] * base_volume + off) as usize]
            };
            *slot = if erase { blank } else { residue as u8 };

            for pos in (0..d).rev() {
                coords[pos] += 1;
                csum += 1;
                if coords[pos] == n {
                    coords[pos] = 0;
                    csum -= n;
                } else {
                    break;
                }
            }
        }

        Ok(GridColouring { params: p.clone(), cells })
    }

    /// Wraps raw cells, validating length and colour range. Used by file
    /// readers and by tests that need perturbed grids.
    pub fn from_parts(params: CodeParams, cells: Vec<u8>) -> Result<Self> {
        if cells.len() as u64 != params.cell_count() {
            return Err(Error::FormatViolation(format!(
                "expected {} cells, got {}",
                params.cell_count(),
                cells.len()
            )));
        }
        if let Some(bad) = cells.iter().find(|&&c| u32::from(c) >= params.k) {
            return Err(Error::FormatViolation(format!(
                "colour byte {bad} out of range for k = {}",
                params.k
            )));
        }
        Ok(GridColouring { params, cells })
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    /// Flat index of a (reduced) coordinate tuple, last coordinate fastest.
    pub fn flat_index(&self, x: &[u64]) -> usize {
        let n = self.params.n;
        let mut flat = 0u64;
        for &c in x {
            flat = flat * n + c % n;
        }
        flat as usize
    }

    /// Colour at a position, coordinates reduced cyclically.
    pub fn colour(&self, x: &[u64]) -> u8 {
        self.cells[self.flat_index(x)]
    }

    /// Counts each colour over the `m^d` window anchored at `x`.
    pub fn colour_multiset(&self, x: &[u64]) -> ColourMultiset {
        let p = &self.params;
        let d = p.d as usize;
        let mut counts = vec![0u64; p.k as usize];
        let mut offset = vec![0u64; d];
        let mut cell = vec![0u64; d];
        loop {
            for l in 0..d {
                cell[l] = x[l] % p.n + offset[l];
            }
            counts[self.colour(&cell) as usize] += 1;
            let mut pos = d;
            loop {
                if pos == 0 {
                    return ColourMultiset { counts };
                }
                pos -= 1;
                offset[pos] += 1;
                if offset[pos] == p.m {
                    offset[pos] = 0;
                } else {
                    break;
                }
            }
        }
    }

    /// Localizes and re-verifies the answer against this grid's own window,
    /// rejecting multisets no window realizes.
    pub fn localize_checked(&self, mult: &ColourMultiset) -> Result<Position> {
        let pos = localize(mult, &self.params)?;
        if &self.colour_multiset(&pos.0) == mult {
            Ok(pos)
        } else {
            Err(Error::NoSuchWindow)
        }
    }
}

/// Splits a colour index into (pigment, shade); `None` for the blank.
pub fn pigment_shade(colour: u8, d: u32, b: u32) -> Option<(u32, u32)> {
    let c = u32::from(colour);
    (c < b * d).then(|| (c % d, c / d))
}

/// Recovers the window corner from a colour multiset in `O(1)` arithmetic
/// operations (for fixed `d` and `b`): one profile decode per pigment class
/// per shade. The fast path does not consult any grid; unrealizable
/// multisets with in-range counts can yield an arbitrary position, which
/// the checked variants reject.
pub fn localize(mult: &ColourMultiset, p: &CodeParams) -> Result<Position> {
    if mult.counts.len() != p.k as usize {
        return Err(Error::InvalidParameter(format!(
            "expected {} counts, got {}",
            p.k,
            mult.counts.len()
        )));
    }
    let volume = p.window_volume();
    let total = mult.total();
    if total != volume {
        return Err(Error::InconsistentTotal { expected: volume, got: total });
    }
    let d = p.d as usize;
    let b = p.b as usize;
    let mut coords = Vec::with_capacity(d);
    let mut vector = vec![0u64; b];
    for i in 0..d {
        for (shade, slot) in vector.iter_mut().enumerate() {
            *slot = mult.counts[shade * d + i];
        }
        coords.push(crate::packing::decode_vector_scheduled(
            &vector, p.s_p, p.m, &p.reps,
        )?);
    }
    Ok(Position(coords))
}

/// Localizes and re-verifies each coordinate against the packing matrix,
/// without needing the grid itself.
pub fn localize_checked(
    mult: &ColourMultiset,
    p: &CodeParams,
    matrix: &PackingMatrix,
) -> Result<Position> {
    if matrix.s_p != p.s_p || matrix.m != p.m || matrix.b != p.b {
        return Err(Error::InvalidParameter(
            "packing matrix does not match the parameter set".into(),
        ));
    }
    let pos = localize(mult, p)?;
    let d = p.d as usize;
    let mut vector = vec![0u64; p.b as usize];
    for i in 0..d {
        for (shade, slot) in vector.iter_mut().enumerate() {
            *slot = mult.counts[shade * d + i];
        }
        if matrix.window_sum(pos.0[i]) != vector {
            return Err(Error::NoSuchWindow);
        }
    }
    Ok(pos)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_params;

    /// The 8x8 example grid, rows top to bottom.
    pub(crate) const EXAMPLE_GRID: [[u8; 8]; 8] = [
        [2, 2, 2, 2, 2, 1, 2, 1],
        [2, 2, 2, 2, 1, 2, 1, 2],
        [2, 2, 2, 2, 2, 1, 2, 2],
        [2, 2, 2, 2, 1, 2, 1, 2],
        [0, 2, 0, 2, 0, 1, 0, 1],
        [2, 0, 2, 0, 1, 0, 1, 0],
        [0, 2, 0, 2, 0, 1, 0, 2],
        [2, 0, 2, 2, 1, 0, 1, 2],
    ];

    fn example_grid() -> GridColouring {
        GridColouring::build(&derive_params(2, 1, 1).unwrap()).unwrap()
    }

    #[test]
    fn reproduces_worked_example_grid() {
        let g = example_grid();
        for (row, expected) in EXAMPLE_GRID.iter().enumerate() {
            for (col, &want) in expected.iter().enumerate() {
                assert_eq!(
                    g.colour(&[row as u64, col as u64]),
                    want,
                    "cell ({row},{col})"
                );
            }
        }
        assert_eq!(g.colour(&[0, 0]), 2);
        assert_eq!(g.colour(&[4, 0]), 0);
        assert_eq!(g.colour(&[7, 4]), 1);
    }

    #[test]
    fn base_block_stage_matches_hand_expansion() {
        let p = derive_params(2, 1, 1).unwrap();
        let g = GridColouring::build_stage(
            &p,
            BuildStage::Erased { full_dims: 0, base_block_next: true },
        )
        .unwrap();
        let row0: Vec<u8> = (0..8).map(|c| g.colour(&[0, c])).collect();
        assert_eq!(row0, [2, 1, 2, 1, 0, 1, 0, 1]);
        let row7: Vec<u8> = (0..8).map(|c| g.colour(&[7, c])).collect();
        assert_eq!(row7, [1, 0, 1, 2, 1, 0, 1, 0]);
    }

    #[test]
    fn initial_stage_is_residue_colouring() {
        let p = derive_params(2, 1, 1).unwrap();
        let g = GridColouring::build_stage(&p, BuildStage::Initial).unwrap();
        for r in 0..8u64 {
            for c in 0..8u64 {
                assert_eq!(g.colour(&[r, c]), ((r + c) % 2) as u8);
            }
        }
    }

    #[test]
    fn multiset_examples() {
        let g = example_grid();
        assert_eq!(g.colour_multiset(&[3, 1]).counts, [6, 2, 8]);
        assert_eq!(g.colour_multiset(&[6, 5]).counts, [3, 5, 8]);
        assert_eq!(g.colour_multiset(&[0, 0]).counts, [0, 0, 16]);
    }

    #[test]
    fn localize_examples() {
        let p = derive_params(2, 1, 1).unwrap();
        let pos = localize(&ColourMultiset::new(vec![5, 3, 8]), &p).unwrap();
        assert_eq!(pos.coords(), [5, 6]);
        let pos = localize(&ColourMultiset::new(vec![0, 0, 16]), &p).unwrap();
        assert_eq!(pos.coords(), [0, 0]);
        let pos = localize(&ColourMultiset::new(vec![6, 2, 8]), &p).unwrap();
        assert_eq!(pos.coords(), [3, 1]);
    }

    #[test]
    fn localize_rejects_bad_multisets() {
        let p = derive_params(2, 1, 1).unwrap();
        assert!(matches!(
            localize(&ColourMultiset::new(vec![16, 0, 0]), &p),
            Err(Error::NoSuchWindow)
        ));
        assert!(matches!(
            localize(&ColourMultiset::new(vec![5, 3, 9]), &p),
            Err(Error::InconsistentTotal { expected: 16, got: 17 })
        ));
        assert!(matches!(
            localize(&ColourMultiset::new(vec![5, 3]), &p),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn checked_localization_agrees_with_grid() {
        let p = derive_params(2, 1, 1).unwrap();
        let g = example_grid();
        let matrix = PackingMatrix::build(p.s_p, p.m, p.b).unwrap();
        for r in 0..8u64 {
            for c in 0..8u64 {
                let mult = g.colour_multiset(&[r, c]);
                assert_eq!(g.localize_checked(&mult).unwrap().coords(), [r, c]);
                assert_eq!(
                    localize_checked(&mult, &p, &matrix).unwrap().coords(),
                    [r, c]
                );
            }
        }
    }

    #[test]
    fn checked_localization_rejects_unrealizable_multiset() {
        // For b = 1 every in-range count pair is realizable, so a vector
        // that decodes but fails the window check needs b >= 2.
        let p = derive_params(2, 2, 1).unwrap();
        let g = GridColouring::build(&p).unwrap();
        let matrix = PackingMatrix::build(p.s_p, p.m, p.b).unwrap();
        let bogus = ColourMultiset::new(vec![0, 0, 2, 0, 62]);
        assert!(localize(&bogus, &p).is_ok());
        assert!(matches!(g.localize_checked(&bogus), Err(Error::NoSuchWindow)));
        assert!(matches!(
            localize_checked(&bogus, &p, &matrix),
            Err(Error::NoSuchWindow)
        ));
    }

    #[test]
    fn round_trip_exhaustive_small() {
        let p = derive_params(2, 1, 1).unwrap();
        let g = GridColouring::build(&p).unwrap();
        for r in 0..p.n {
            for c in 0..p.n {
                let mult = g.colour_multiset(&[r, c]);
                assert_eq!(mult.total(), p.window_volume());
                let pos = localize(&mult, &p).unwrap();
                assert_eq!(pos.coords(), [r, c]);
            }
        }
    }

    #[test]
    fn slab_counts_match_packing() {
        // In every base block, the final grid holds exactly the packing
        // entry's worth of cells of each owned shade.
        for (d, b, t) in [(2u32, 1u32, 1u64), (2, 2, 1), (3, 1, 1)] {
            let p = derive_params(d, b, t).unwrap();
            let g = GridColouring::build(&p).unwrap();
            let matrix = PackingMatrix::build(p.s_p, p.m, p.b).unwrap();
            for i in 0..d as usize {
                for j in [0u64, 1, p.n / 2, p.n - 1] {
                    let mut counts = vec![0u64; p.b as usize];
                    let mut offs = vec![0u64; d as usize - 1];
                    'block: loop {
                        let mut cell = Vec::with_capacity(d as usize);
                        let mut oi = 0;
                        for l in 0..d as usize {
                            if l == i {
                                cell.push(j);
                            } else {
                                cell.push(offs[oi]);
                                oi += 1;
                            }
                        }
                        if let Some((pig, shade)) =
                            pigment_shade(g.colour(&cell), p.d, p.b)
                        {
                            if pig as usize == i {
                                counts[shade as usize] += 1;
                            }
                        }
                        let mut pos = offs.len();
                        loop {
                            if pos == 0 {
                                break 'block;
                            }
                            pos -= 1;
                            offs[pos] += 1;
                            if offs[pos] == p.m {
                                offs[pos] = 0;
                            } else {
                                break;
                            }
                        }
                    }
                    for (shade, &count) in counts.iter().enumerate() {
                        assert_eq!(
                            count,
                            u64::from(matrix.row(shade)[j as usize]),
                            "slab ({i},{j}) shade {shade} for ({d},{b},{t})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn from_parts_validates() {
        let p = derive_params(2, 1, 1).unwrap();
        assert!(GridColouring::from_parts(p.clone(), vec![0u8; 63]).is_err());
        assert!(GridColouring::from_parts(p.clone(), vec![3u8; 64]).is_err());
        assert!(GridColouring::from_parts(p, vec![2u8; 64]).is_ok());
    }

    #[test]
    fn three_dimensional_sample_round_trip() {
        let p = derive_params(3, 1, 1).unwrap();
        let g = GridColouring::build(&p).unwrap();
        for x in [[0u64, 0, 0], [5, 9, 70], [71, 71, 71], [13, 0, 44]] {
            let mult = g.colour_multiset(&x);
            assert_eq!(localize(&mult, &p).unwrap().coords(), x);
        }
    }
}
