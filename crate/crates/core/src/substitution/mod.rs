//! Qubit and spin substitutions.
//!
//! A [`QubitSubstitution`] is any rule `S: A x D -> A`; a [`SpinSystem`] is the
//! special case with alphabet `G x D` and `S(g d, e) = g W(d, e) e`. Letters of
//! a spin system are encoded as `spin_index * L + digit`, matching the
//! Kronecker ordering `C[G] (x) C[D]` used by the Fourier matrices.

mod matrix;
mod supertile;
mod words;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::digits::{DigitString, DigitSystem};
use crate::error::{Error, Result};
use crate::group::{AbelianGroup, Character, GroupElement, RationalAngle};

pub use matrix::{letter_frequencies, primitivity, substitution_matrix, Primitivity, SubstitutionMatrix};
pub use supertile::Supertile;
pub use words::{periodicity_heuristic, sample_rectangular_words, Periodicity, SpatialPatch};

/// `W(d_i, d_j)` for all pairs of digits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinMatrix {
    rows: Vec<Vec<GroupElement>>,
}

impl SpinMatrix {
    pub fn new(group: &AbelianGroup, rows: Vec<Vec<GroupElement>>) -> Result<Self> {
        let l = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != l {
                return Err(Error::InvalidSpinMatrix(format!("row {i} has {} entries, expected {l}", row.len())));
            }
            if let Some(g) = row.iter().find(|g| !group.contains(g)) {
                return Err(Error::InvalidSpinMatrix(format!("entry {g} of row {i} is not in the group")));
            }
        }
        Ok(Self { rows })
    }

    /// Build from raw residue tuples, reducing each modulo the factor orders.
    pub fn from_residues(group: &AbelianGroup, rows: &[Vec<Vec<i64>>]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|g| group.element(g)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(group, rows)
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &GroupElement {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<GroupElement>] {
        &self.rows
    }
}

/// `chi(W)` with exact entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChiMatrix {
    angles: Vec<Vec<RationalAngle>>,
}

impl ChiMatrix {
    pub fn size(&self) -> usize {
        self.angles.len()
    }

    pub fn angle(&self, i: usize, j: usize) -> RationalAngle {
        self.angles[i][j]
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        let l = self.size();
        DMatrix::from_fn(l, l, |i, j| self.angles[i][j].to_complex())
    }
}

/// Entrywise character evaluation `chi(W)_{ij} = chi(W_{ij})`.
pub fn chi_of_matrix(chi: &Character, w: &SpinMatrix) -> ChiMatrix {
    ChiMatrix {
        angles: w.rows.iter().map(|r| r.iter().map(|g| chi.angle(g)).collect()).collect(),
    }
}

/// A letter `g d` of a spin system.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub spin: GroupElement,
    pub digit: usize,
}

impl Letter {
    pub fn new(spin: GroupElement, digit: usize) -> Self {
        Self { spin, digit }
    }
}

/// A general constant-shape substitution `S: A x D -> A` on letter codes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitSubstitution {
    digits: DigitSystem,
    alphabet: usize,
    table: Vec<u32>,
    labels: Vec<String>,
}

impl QubitSubstitution {
    /// `rules[a][d]` is the letter placed at digit `d` of `S(a)`.
    pub fn new(digits: DigitSystem, rules: Vec<Vec<u32>>, labels: Option<Vec<String>>) -> Result<Self> {
        let alphabet = rules.len();
        let l = digits.len();
        if alphabet == 0 {
            return Err(Error::InvalidLetter("empty alphabet".into()));
        }
        for (a, r) in rules.iter().enumerate() {
            if r.len() != l {
                return Err(Error::Dimension(format!("rule for letter {a} has {} entries, expected {l}", r.len())));
            }
            if let Some(b) = r.iter().find(|&&b| b as usize >= alphabet) {
                return Err(Error::InvalidLetter(format!("rule for letter {a} uses unknown letter {b}")));
            }
        }
        let labels = labels.unwrap_or_else(|| (0..alphabet).map(default_label).collect());
        if labels.len() != alphabet {
            return Err(Error::Dimension(format!("{} labels for {alphabet} letters", labels.len())));
        }
        Ok(Self { digits, alphabet, table: rules.concat(), labels })
    }

    pub fn digit_system(&self) -> &DigitSystem {
        &self.digits
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn substitute(&self, letter: u32, digit: usize) -> u32 {
        self.table[letter as usize * self.digits.len() + digit]
    }

    /// `S(a)` as a list indexed by digit.
    pub fn image(&self, letter: u32) -> &[u32] {
        let l = self.digits.len();
        &self.table[letter as usize * l..(letter as usize + 1) * l]
    }

    pub fn rules(&self) -> Vec<Vec<u32>> {
        self.table.chunks(self.digits.len()).map(<[u32]>::to_vec).collect()
    }

    /// Rules in the `a -> aba` form, for one-dimensional display.
    pub fn describe(&self) -> Vec<String> {
        (0..self.alphabet as u32)
            .map(|a| {
                let img: Vec<&str> = self.image(a).iter().map(|&b| self.labels[b as usize].as_str()).collect();
                format!("{}->{}", self.labels[a as usize], img.join(""))
            })
            .collect()
    }
}

fn default_label(i: usize) -> String {
    if i < 26 {
        char::from(b'a' + i as u8).to_string()
    } else {
        format!("x{i}")
    }
}

/// A spin substitution given by `(Q, D, G, W)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinSystem {
    digits: DigitSystem,
    group: AbelianGroup,
    w: SpinMatrix,
    qubit: QubitSubstitution,
}

impl SpinSystem {
    pub fn new(digits: DigitSystem, group: AbelianGroup, w: SpinMatrix) -> Result<Self> {
        let l = digits.len();
        if w.size() != l {
            return Err(Error::InvalidSpinMatrix(format!("W is {0}x{0} but |D| = {l}", w.size())));
        }
        let elements = group.elements();
        let rules: Vec<Vec<u32>> = elements
            .iter()
            .flat_map(|g| {
                let group = &group;
                let w = &w;
                (0..l).map(move |d| {
                    (0..l)
                        .map(|e| (group.index_of(&group.mul(g, w.get(d, e))) * l + e) as u32)
                        .collect()
                })
            })
            .collect();
        let labels = elements
            .iter()
            .flat_map(|g| (0..l).map(move |d| format!("{g}d{d}")))
            .collect();
        let qubit = QubitSubstitution::new(digits.clone(), rules, Some(labels))?;
        Ok(Self { digits, group, w, qubit })
    }

    pub fn digit_system(&self) -> &DigitSystem {
        &self.digits
    }

    pub fn group(&self) -> &AbelianGroup {
        &self.group
    }

    pub fn spin_matrix(&self) -> &SpinMatrix {
        &self.w
    }

    pub fn as_qubit(&self) -> &QubitSubstitution {
        &self.qubit
    }

    pub fn alphabet_size(&self) -> usize {
        self.group.order() * self.digits.len()
    }

    pub fn code(&self, letter: &Letter) -> u32 {
        (self.group.index_of(&letter.spin) * self.digits.len() + letter.digit) as u32
    }

    pub fn letter(&self, code: u32) -> Letter {
        let l = self.digits.len();
        Letter { spin: self.group.element_at(code as usize / l), digit: code as usize % l }
    }

    /// The spin-free letter `[d]`.
    pub fn plain(&self, digit: usize) -> Letter {
        Letter { spin: self.group.identity(), digit }
    }

    pub fn check_letter(&self, a: &Letter) -> Result<()> {
        if a.digit >= self.digits.len() || !self.group.contains(&a.spin) {
            return Err(Error::InvalidLetter(format!("{}d{} is not in the alphabet", a.spin, a.digit)));
        }
        Ok(())
    }

    /// `S(g d, e) = g W(d, e) e`.
    pub fn substitute_letter(&self, a: &Letter, e: usize) -> Letter {
        Letter { spin: self.group.mul(&a.spin, self.w.get(a.digit, e)), digit: e }
    }

    pub fn supertile(&self, a: &Letter, level: usize) -> Result<Supertile> {
        self.check_letter(a)?;
        Supertile::generate(&self.qubit, self.code(a), level)
    }

    pub fn supertile_capped(&self, a: &Letter, level: usize, cap: usize) -> Result<Supertile> {
        self.check_letter(a)?;
        Supertile::generate_capped(&self.qubit, self.code(a), level, cap)
    }

    /// Spin of the cell of `S^M(a)` addressed by a length-`M` digit string,
    /// via the product `spin(a) W(d, i_{M-1}) W(i_{M-1}, i_{M-2}) ... W(i_1, i_0)`.
    pub fn supertile_spin_at(&self, a: &Letter, position: &DigitString) -> GroupElement {
        let mut spin = a.spin.clone();
        let mut prev = a.digit;
        for &i in position.digits().iter().rev() {
            spin = self.group.mul(&spin, self.w.get(prev, i));
            prev = i;
        }
        spin
    }

    /// `g * S^n(a)`, multiplying every cell's spin by `g`.
    pub fn act(&self, g: &GroupElement, tile: &Supertile) -> Supertile {
        tile.map_letters(|c| {
            let mut a = self.letter(c);
            a.spin = self.group.mul(g, &a.spin);
            self.code(&a)
        })
    }
}

/// `S_1 (x) S_2` on a digit system with `|D| = |D_1| |D_2|`.
///
/// Digit `k` of the product pairs digit `k / L_2` of the first factor with
/// digit `k % L_2` of the second.
pub fn kronecker_compose(s1: &SpinSystem, s2: &SpinSystem, digits: DigitSystem) -> Result<SpinSystem> {
    let (l1, l2) = (s1.digits.len(), s2.digits.len());
    if digits.len() != l1 * l2 {
        return Err(Error::Dimension(format!("|D| = {} but |D_1| |D_2| = {}", digits.len(), l1 * l2)));
    }
    let group = s1.group.direct_product(&s2.group);
    let rows = (0..l1 * l2)
        .map(|i| {
            (0..l1 * l2)
                .map(|j| {
                    let a = s1.w.get(i / l2, j / l2);
                    let b = s2.w.get(i % l2, j % l2);
                    GroupElement([a.0.clone(), b.0.clone()].concat())
                })
                .collect()
        })
        .collect();
    let w = SpinMatrix::new(&group, rows)?;
    SpinSystem::new(digits, group, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digits::IntMatrix;
    use crate::fixtures;

    #[test]
    fn rudin_shapiro_substitution() {
        let rs = fixtures::rudin_shapiro();
        let a = rs.plain(0);
        assert_eq!(rs.substitute_letter(&a, 1), rs.plain(1));
    }

    #[test]
    fn triomino_second_digit() {
        let tri = fixtures::triomino();
        let g = tri.group();
        let img: Vec<Letter> = (0..3).map(|e| tri.substitute_letter(&tri.plain(1), e)).collect();
        assert_eq!(
            img,
            vec![
                tri.plain(0),
                Letter::new(g.element(&[1]).unwrap(), 1),
                Letter::new(g.element(&[2]).unwrap(), 2),
            ]
        );
    }

    #[test]
    fn equivariance() {
        for sys in fixtures::spin_fixtures() {
            let g = sys.group();
            for h in g.elements() {
                for code in 0..sys.alphabet_size() as u32 {
                    let a = sys.letter(code);
                    let ha = Letter::new(g.mul(&h, &a.spin), a.digit);
                    for e in 0..sys.digit_system().len() {
                        let lhs = sys.substitute_letter(&ha, e);
                        let mut rhs = sys.substitute_letter(&a, e);
                        rhs.spin = g.mul(&h, &rhs.spin);
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn code_roundtrip() {
        let v = fixtures::vierdrachen();
        for c in 0..v.alphabet_size() as u32 {
            assert_eq!(v.code(&v.letter(c)), c);
        }
    }

    #[test]
    fn vierdrachen_chi1_matrix() {
        let v = fixtures::vierdrachen();
        let chi = &v.group().characters()[1];
        let m = chi_of_matrix(chi, v.spin_matrix()).to_complex();
        let expected = [[1.0, 1.0], [1.0, -1.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((m[(i, j)] - Complex64::new(expected[i][j], 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn triomino_vandermonde() {
        let t = fixtures::triomino();
        let chi = &t.group().characters()[1];
        let m = chi_of_matrix(chi, t.spin_matrix());
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.angle(i, j), RationalAngle::new((i * j) as i64, 3));
            }
        }
        let trivial = chi_of_matrix(&t.group().characters()[0], t.spin_matrix());
        assert!((0..3).all(|i| (0..3).all(|j| trivial.angle(i, j).is_zero())));
    }

    #[test]
    fn spin_at_examples() {
        let rs = fixtures::rudin_shapiro();
        let s = rs.supertile_spin_at(&rs.plain(0), &DigitString(vec![1, 1]));
        assert_eq!(s, rs.group().element(&[1]).unwrap());
        assert_eq!(rs.supertile_spin_at(&rs.plain(1), &DigitString(vec![])), rs.group().identity());
    }

    #[test]
    fn kronecker_rs_squared() {
        let rs = fixtures::rudin_shapiro();
        let sys = kronecker_compose(&rs, &rs, DigitSystem::standard_1d(4).unwrap()).unwrap();
        assert_eq!(sys.group().orders(), &[2, 2]);
        assert!(primitivity(sys.as_qubit()).primitive);
        let bad = kronecker_compose(&rs, &rs, DigitSystem::standard_1d(3).unwrap());
        assert!(bad.is_err());
    }

    #[test]
    fn spin_matrix_shape_checked() {
        let g = AbelianGroup::cyclic(2);
        let w = SpinMatrix::from_residues(&g, &[vec![vec![0], vec![0]], vec![vec![0]]]);
        assert!(w.is_err());
        let w = SpinMatrix::from_residues(&g, &[vec![vec![0]]]).unwrap();
        let d = DigitSystem::new(IntMatrix::scalar(2), vec![vec![0], vec![1]]).unwrap();
        assert!(SpinSystem::new(d, g, w).is_err());
    }
}
