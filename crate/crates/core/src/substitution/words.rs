use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{QubitSubstitution, Supertile};
use crate::digits::DigitSystem;
use crate::error::{Error, Result};

const EMPTY: u32 = u32::MAX;

/// A supertile laid out on its spatial support, in a dense bounding box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpatialPatch {
    dim: usize,
    lo: Vec<i64>,
    shape: Vec<usize>,
    grid: Vec<u32>,
    count: usize,
}

impl SpatialPatch {
    pub fn from_supertile(digits: &DigitSystem, tile: &Supertile) -> Result<Self> {
        let domain = digits.digit_domain_capped(tile.level(), tile.len().max(1))?;
        let (lo, hi) = domain.bounds();
        let shape: Vec<usize> = lo.iter().zip(&hi).map(|(a, b)| (b - a + 1) as usize).collect();
        let volume = shape.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s));
        let cap = 64 * tile.len() + 1024;
        let volume = match volume {
            Some(v) if v <= cap => v,
            _ => {
                return Err(Error::DomainTooLarge {
                    requested: shape.iter().map(|&s| s as u128).product(),
                    cap,
                })
            }
        };
        let mut patch = Self { dim: digits.dim(), lo, shape, grid: vec![EMPTY; volume], count: tile.len() };
        for (p, &c) in domain.points().zip(tile.cells()) {
            let i = patch.offset(p).expect("domain point inside its bounding box");
            patch.grid[i] = c;
        }
        Ok(patch)
    }

    /// A one-dimensional patch from an explicit sequence placed at `0..len`.
    pub fn from_sequence(letters: &[u32]) -> Self {
        Self { dim: 1, lo: vec![0], shape: vec![letters.len()], grid: letters.to_vec(), count: letters.len() }
    }

    fn offset(&self, x: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for ((&c, &lo), &s) in x.iter().zip(&self.lo).zip(&self.shape) {
            let r = c - lo;
            if r < 0 || r as usize >= s {
                return None;
            }
            idx = idx * s + r as usize;
        }
        Some(idx)
    }

    fn coords(&self, mut offset: usize) -> Vec<i64> {
        let mut x = vec![0i64; self.dim];
        for a in (0..self.dim).rev() {
            x[a] = self.lo[a] + (offset % self.shape[a]) as i64;
            offset /= self.shape[a];
        }
        x
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn lower_corner(&self) -> &[i64] {
        &self.lo
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn get(&self, x: &[i64]) -> Option<u32> {
        self.offset(x).map(|i| self.grid[i]).filter(|&c| c != EMPTY)
    }

    /// Raw row-major grid over the bounding box, `None` off the support.
    pub fn grid(&self) -> impl Iterator<Item = Option<u32>> + '_ {
        self.grid.iter().map(|&c| (c != EMPTY).then_some(c))
    }

    /// Occupied positions with their letters.
    pub fn cells(&self) -> impl Iterator<Item = (Vec<i64>, u32)> + '_ {
        self.grid
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != EMPTY)
            .map(|(i, &c)| (self.coords(i), c))
    }
}

fn box_offsets(dims: &[usize]) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for &d in dims {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..d as i64).map(move |k| {
                    let mut q = p.clone();
                    q.push(k);
                    q
                })
            })
            .collect();
    }
    out
}

/// All distinct box-shaped words found inside `S^n(a)` over all letters `a`.
///
/// An empty result means no such word was seen at this level.
pub fn sample_rectangular_words(sub: &QubitSubstitution, dims: &[usize], level: usize) -> Result<BTreeSet<Vec<u32>>> {
    let m = sub.digit_system().dim();
    if dims.len() != m {
        return Err(Error::Dimension(format!("word shape has {} axes, lattice has {m}", dims.len())));
    }
    let offsets = box_offsets(dims);
    let mut words = BTreeSet::new();
    for seed in 0..sub.alphabet_size() as u32 {
        let tile = Supertile::generate(sub, seed, level)?;
        let patch = SpatialPatch::from_supertile(sub.digit_system(), &tile)?;
        'anchor: for (x, _) in patch.cells() {
            let mut word = Vec::with_capacity(offsets.len());
            for o in &offsets {
                let y: Vec<i64> = x.iter().zip(o).map(|(a, b)| a + b).collect();
                match patch.get(&y) {
                    Some(c) => word.push(c),
                    None => continue 'anchor,
                }
            }
            words.insert(word);
        }
    }
    Ok(words)
}

/// Outcome of the periodicity scan. This is evidence, never a proof.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Periodicity {
    PeriodicCandidate { period: Vec<i64> },
    NoPeriodFound { level: usize, radius: u32 },
}

impl Periodicity {
    pub fn is_periodic(&self) -> bool {
        matches!(self, Periodicity::PeriodicCandidate { .. })
    }
}

/// Candidate translations `0 < |v| <= r`, one from each `{v, -v}` pair,
/// shortest first.
fn candidate_vectors(m: usize, radius: u32) -> Vec<Vec<i64>> {
    let r = radius as i64;
    let mut out: Vec<Vec<i64>> = box_offsets(&vec![(2 * r + 1) as usize; m])
        .into_iter()
        .map(|v| v.into_iter().map(|c| c - r).collect::<Vec<i64>>())
        .filter(|v| {
            let first = v.iter().find(|&&c| c != 0);
            matches!(first, Some(&c) if c > 0) && v.iter().map(|c| c * c).sum::<i64>() <= r * r
        })
        .collect();
    out.sort_by_key(|v| (v.iter().map(|c| c * c).sum::<i64>(), v.clone()));
    out
}

/// Whether `patch` is invariant under translation by `v` on an overlap of at
/// least half its cells.
pub fn patch_has_period(patch: &SpatialPatch, v: &[i64]) -> bool {
    let mut overlap = 0usize;
    for (x, c) in patch.cells() {
        let y: Vec<i64> = x.iter().zip(v).map(|(a, b)| a + b).collect();
        if let Some(d) = patch.get(&y) {
            if c != d {
                return false;
            }
            overlap += 1;
        }
    }
    2 * overlap >= patch.len()
}

/// Search `S^n(a)` for a translation period shared by all seeds `a`.
pub fn periodicity_heuristic(sub: &QubitSubstitution, level: usize, radius: u32) -> Result<Periodicity> {
    let patches = (0..sub.alphabet_size() as u32)
        .map(|a| {
            let tile = Supertile::generate(sub, a, level)?;
            SpatialPatch::from_supertile(sub.digit_system(), &tile)
        })
        .collect::<Result<Vec<_>>>()?;
    for v in candidate_vectors(sub.digit_system().dim(), radius) {
        if patches.iter().all(|p| patch_has_period(p, &v)) {
            return Ok(Periodicity::PeriodicCandidate { period: v });
        }
    }
    Ok(Periodicity::NoPeriodFound { level, radius })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn gasket_has_square_words() {
        let g = fixtures::gasket();
        let words = sample_rectangular_words(&g, &[2, 2], 3).unwrap();
        assert!(!words.is_empty());
    }

    #[test]
    fn single_cells_give_alphabet() {
        let rs = fixtures::rudin_shapiro();
        let words = sample_rectangular_words(rs.as_qubit(), &[1], 3).unwrap();
        assert_eq!(words.len(), rs.alphabet_size());
    }

    #[test]
    fn rs_words_bounded() {
        let rs = fixtures::rudin_shapiro();
        let words = sample_rectangular_words(rs.as_qubit(), &[4], 4).unwrap();
        // exhaustive oracle: scan every supertile directly as a sequence
        let mut oracle = BTreeSet::new();
        for a in 0..4u32 {
            let t = Supertile::generate(rs.as_qubit(), a, 4).unwrap();
            for w in t.cells().windows(4) {
                oracle.insert(w.to_vec());
            }
        }
        assert_eq!(words, oracle);
        let spin_words: BTreeSet<Vec<u32>> = words.iter().map(|w| w.iter().map(|c| c / 2).collect()).collect();
        assert!(spin_words.len() <= 16);
    }

    #[test]
    fn periodic_factor_detected() {
        let f = fixtures::aba_bab();
        assert_eq!(
            periodicity_heuristic(&f, 6, 8).unwrap(),
            Periodicity::PeriodicCandidate { period: vec![2] }
        );
    }

    #[test]
    fn constant_substitution_period_one() {
        let d = DigitSystem::standard_1d(2).unwrap();
        let s = QubitSubstitution::new(d, vec![vec![0, 0]], None).unwrap();
        assert_eq!(
            periodicity_heuristic(&s, 5, 4).unwrap(),
            Periodicity::PeriodicCandidate { period: vec![1] }
        );
    }

    #[test]
    fn rs_aperiodic() {
        let rs = fixtures::rudin_shapiro();
        assert!(!periodicity_heuristic(rs.as_qubit(), 10, 64).unwrap().is_periodic());
    }

    #[test]
    fn candidates_are_half_space() {
        assert_eq!(candidate_vectors(2, 1), vec![vec![0, 1], vec![1, 0]]);
        let c = candidate_vectors(2, 2);
        assert_eq!(&c[..4], &[vec![0, 1], vec![1, 0], vec![1, -1], vec![1, 1]]);
        assert_eq!(c.len(), 6);
    }
}
