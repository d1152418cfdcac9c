use serde::{Deserialize, Serialize};

use super::QubitSubstitution;
use crate::digits::DEFAULT_CAP;
use crate::error::Result;

/// The level-`n` supertile `S^n(a)`.
///
/// Cells are stored in digit-string order: cell `idx` sits at the point of
/// `D^(n)` with the same mixed-radix index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Supertile {
    level: usize,
    seed: u32,
    cells: Vec<u32>,
}

impl Supertile {
    pub fn generate(sub: &QubitSubstitution, seed: u32, level: usize) -> Result<Self> {
        Self::generate_capped(sub, seed, level, DEFAULT_CAP)
    }

    /// Build `S^n(a)` by substituting every cell of `S^(n-1)(a)`:
    /// `cells_n[j + L i] = S(cells_(n-1)[i], j)`.
    pub fn generate_capped(sub: &QubitSubstitution, seed: u32, level: usize, cap: usize) -> Result<Self> {
        let size = sub.digit_system().check_cap(level, cap)?;
        let l = sub.digit_system().len();
        let mut cells = Vec::with_capacity(size);
        cells.push(seed);
        for _ in 0..level {
            let prev = std::mem::take(&mut cells);
            cells = Vec::with_capacity(prev.len() * l);
            for &c in &prev {
                cells.extend_from_slice(sub.image(c));
            }
        }
        Ok(Self { level, seed, cells })
    }

    /// Build `S^n(a)` by fusing the `(n-1)`-supertiles of the letters of `S(a)`,
    /// placing `S^(n-1)(S(a, d))` on the block of indices with top digit `d`.
    pub fn generate_by_fusion(sub: &QubitSubstitution, seed: u32, level: usize) -> Result<Self> {
        sub.digit_system().check_cap(level, DEFAULT_CAP)?;
        let mut cells = vec![seed];
        if level > 0 {
            cells.clear();
            for &b in sub.image(seed) {
                cells.extend(Self::generate_by_fusion(sub, b, level - 1)?.cells);
            }
        }
        Ok(Self { level, seed, cells })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn seed(&self) -> u32 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell(&self, index: usize) -> u32 {
        self.cells[index]
    }

    pub fn cells(&self) -> &[u32] {
        &self.cells
    }

    pub fn map_letters(&self, f: impl Fn(u32) -> u32) -> Supertile {
        Supertile { level: self.level, seed: f(self.seed), cells: self.cells.iter().map(|&c| f(c)).collect() }
    }

    /// Number of cells carrying each letter.
    pub fn letter_counts(&self, alphabet: usize) -> Vec<usize> {
        let mut counts = vec![0; alphabet];
        for &c in &self.cells {
            counts[c as usize] += 1;
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digits::DigitString;
    use crate::fixtures;

    #[test]
    fn rs_level_two() {
        let rs = fixtures::rudin_shapiro();
        let t = rs.supertile(&rs.plain(0), 2).unwrap();
        let spins: Vec<u32> = t.cells().iter().map(|&c| rs.letter(c).spin.0[0]).collect();
        assert_eq!(spins, vec![0, 0, 0, 1]);
    }

    #[test]
    fn level_zero_is_seed() {
        let v = fixtures::vierdrachen();
        let a = v.letter(5);
        let t = v.supertile(&a, 0).unwrap();
        assert_eq!(t.cells(), &[5]);
    }

    #[test]
    fn digit_tracking_and_fusion() {
        for sys in fixtures::spin_fixtures() {
            let l = sys.digit_system().len();
            for code in 0..sys.alphabet_size() as u32 {
                for n in 0..=4 {
                    let t = Supertile::generate(sys.as_qubit(), code, n).unwrap();
                    let f = Supertile::generate_by_fusion(sys.as_qubit(), code, n).unwrap();
                    assert_eq!(t, f);
                    if n > 0 {
                        for (i, &c) in t.cells().iter().enumerate() {
                            assert_eq!(sys.letter(c).digit, i % l);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn group_action_commutes() {
        for sys in fixtures::spin_fixtures() {
            let g = sys.group();
            for a in 0..sys.alphabet_size() as u32 {
                let t = sys.supertile(&sys.letter(a), 4).unwrap();
                for h in g.elements() {
                    let mut ha = sys.letter(a);
                    ha.spin = g.mul(&h, &ha.spin);
                    assert_eq!(sys.supertile(&ha, 4).unwrap(), sys.act(&h, &t));
                }
            }
        }
    }

    #[test]
    fn vierdrachen_spin_at() {
        let v = fixtures::vierdrachen();
        let t = v.supertile(&v.plain(0), 2).unwrap();
        let pos = DigitString(vec![1, 0]);
        let idx = pos.to_index(2);
        assert_eq!(v.letter(t.cell(idx)).spin, v.supertile_spin_at(&v.plain(0), &pos));
    }
}
