//! Finite abelian groups `C_{n_1} x ... x C_{n_k}` and their characters.
//!
//! Elements and characters are residue tuples. Both are enumerated in
//! mixed-radix order with the *last* component varying fastest, so for
//! `G = C2 x C2` the characters come out as `(0,0), (0,1), (1,0), (1,1)`.

use std::fmt;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An exact point of `R/Z`, stored as a reduced fraction in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalAngle {
    num: u64,
    den: u64,
}

impl RationalAngle {
    pub const ZERO: RationalAngle = RationalAngle { num: 0, den: 1 };

    pub fn new(num: i64, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        let r = num.rem_euclid(den as i64) as u64;
        let g = r.gcd(&den);
        Self { num: r / g, den: den / g }
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `e^{2 pi i theta}`.
    pub fn to_complex(&self) -> Complex64 {
        let t = std::f64::consts::TAU * self.to_f64();
        Complex64::new(t.cos(), t.sin())
    }
}

impl std::ops::Add for RationalAngle {
    type Output = RationalAngle;
    fn add(self, rhs: RationalAngle) -> RationalAngle {
        let den = self.den.lcm(&rhs.den);
        let num = self.num * (den / self.den) + rhs.num * (den / rhs.den);
        RationalAngle::new(num as i64, den)
    }
}

impl std::ops::Neg for RationalAngle {
    type Output = RationalAngle;
    fn neg(self) -> RationalAngle {
        RationalAngle::new(-(self.num as i64), self.den)
    }
}

impl std::ops::Sub for RationalAngle {
    type Output = RationalAngle;
    fn sub(self, rhs: RationalAngle) -> RationalAngle {
        self + (-rhs)
    }
}

impl fmt::Display for RationalAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// A residue tuple `(g_1, ..., g_k)` with `0 <= g_i < n_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement(pub Vec<u32>);

impl GroupElement {
    pub fn residues(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// `C_{n_1} x ... x C_{n_k}`; the empty product is the trivial group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct AbelianGroup {
    orders: Vec<u32>,
}

impl TryFrom<Vec<u32>> for AbelianGroup {
    type Error = Error;
    fn try_from(orders: Vec<u32>) -> Result<Self> {
        AbelianGroup::new(orders)
    }
}

impl From<AbelianGroup> for Vec<u32> {
    fn from(g: AbelianGroup) -> Vec<u32> {
        g.orders
    }
}

impl AbelianGroup {
    pub fn new(orders: Vec<u32>) -> Result<Self> {
        if let Some(n) = orders.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidGroup(format!("cyclic factor order {n} must be at least 2")));
        }
        Ok(Self { orders })
    }

    pub fn cyclic(n: u32) -> Self {
        Self::new(vec![n]).expect("cyclic order must be at least 2")
    }

    pub fn trivial() -> Self {
        Self { orders: Vec::new() }
    }

    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    /// `|G|`.
    pub fn order(&self) -> usize {
        self.orders.iter().map(|&n| n as usize).product()
    }

    /// Least common multiple of the factor orders.
    pub fn exponent(&self) -> u64 {
        self.orders.iter().fold(1u64, |acc, &n| acc.lcm(&(n as u64)))
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(vec![0; self.orders.len()])
    }

    pub fn element(&self, residues: &[i64]) -> Result<GroupElement> {
        if residues.len() != self.orders.len() {
            return Err(Error::InvalidGroup(format!(
                "element {residues:?} has {} components, group has {}",
                residues.len(),
                self.orders.len()
            )));
        }
        Ok(GroupElement(
            residues
                .iter()
                .zip(&self.orders)
                .map(|(&r, &n)| r.rem_euclid(n as i64) as u32)
                .collect(),
        ))
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        g.0.len() == self.orders.len() && g.0.iter().zip(&self.orders).all(|(a, n)| a < n)
    }

    pub fn mul(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        GroupElement(
            g.0.iter()
                .zip(&h.0)
                .zip(&self.orders)
                .map(|((a, b), n)| (a + b) % n)
                .collect(),
        )
    }

    pub fn inv(&self, g: &GroupElement) -> GroupElement {
        GroupElement(g.0.iter().zip(&self.orders).map(|(a, n)| (n - a) % n).collect())
    }

    /// Position of `g` in the canonical enumeration.
    pub fn index_of(&self, g: &GroupElement) -> usize {
        g.0.iter()
            .zip(&self.orders)
            .fold(0usize, |acc, (&a, &n)| acc * n as usize + a as usize)
    }

    pub fn element_at(&self, mut index: usize) -> GroupElement {
        let mut res = vec![0u32; self.orders.len()];
        for (slot, &n) in res.iter_mut().zip(&self.orders).rev() {
            *slot = (index % n as usize) as u32;
            index /= n as usize;
        }
        GroupElement(res)
    }

    pub fn elements(&self) -> Vec<GroupElement> {
        (0..self.order()).map(|i| self.element_at(i)).collect()
    }

    pub fn character(&self, exponents: &[i64]) -> Result<Character> {
        let e = self.element(exponents)?;
        Ok(Character { exponents: e.0, orders: self.orders.clone() })
    }

    /// All of `G^`, trivial character first.
    pub fn characters(&self) -> Vec<Character> {
        enumerate_characters(self)
    }

    pub fn direct_product(&self, other: &AbelianGroup) -> AbelianGroup {
        AbelianGroup { orders: [self.orders.clone(), other.orders.clone()].concat() }
    }
}

/// All `|G|` characters in canonical order, trivial character first.
pub fn enumerate_characters(group: &AbelianGroup) -> Vec<Character> {
    group
        .elements()
        .into_iter()
        .map(|e| Character { exponents: e.0, orders: group.orders.clone() })
        .collect()
}

/// A character `chi(g) = exp(2 pi i sum_i a_i g_i / n_i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Character {
    exponents: Vec<u32>,
    orders: Vec<u32>,
}

/// `ker chi` together with the order of the cyclic quotient `G / ker chi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Kernel {
    pub elements: Vec<GroupElement>,
    pub quotient_order: usize,
}

impl Character {
    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.iter().all(|&a| a == 0)
    }

    pub fn angle(&self, g: &GroupElement) -> RationalAngle {
        let den = self.orders.iter().fold(1u64, |acc, &n| acc.lcm(&(n as u64)));
        let num: u64 = self
            .exponents
            .iter()
            .zip(&g.0)
            .zip(&self.orders)
            .map(|((&a, &x), &n)| a as u64 * x as u64 * (den / n as u64))
            .sum();
        RationalAngle::new((num % den) as i64, den)
    }

    pub fn value(&self, g: &GroupElement) -> Complex64 {
        self.angle(g).to_complex()
    }

    /// Order of `chi` in `G^`, equal to `|G / ker chi|`.
    pub fn order(&self) -> usize {
        self.exponents
            .iter()
            .zip(&self.orders)
            .fold(1usize, |acc, (&a, &n)| acc.lcm(&((n / (a.gcd(&n))) as usize)))
    }

    pub fn kernel(&self, group: &AbelianGroup) -> Kernel {
        kernel(self, group)
    }

    /// `chi(g)` as a power of the primitive root of unity of order `self.order()`.
    pub fn class_of(&self, g: &GroupElement) -> usize {
        let a = self.angle(g);
        let q = self.order() as u64;
        (a.numerator() * (q / a.denominator())) as usize
    }

    pub fn label(&self) -> String {
        let parts: Vec<String> = self.exponents.iter().map(u32::to_string).collect();
        parts.join(",")
    }
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chi({})", self.label())
    }
}

/// All `g` with `chi(g) = 1`.
pub fn kernel(chi: &Character, group: &AbelianGroup) -> Kernel {
    let elements: Vec<GroupElement> = group
        .elements()
        .into_iter()
        .filter(|g| chi.angle(g).is_zero())
        .collect();
    let quotient_order = group.order() / elements.len();
    Kernel { elements, quotient_order }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclotomic::sum_vanishes;

    #[test]
    fn character_counts() {
        assert_eq!(AbelianGroup::cyclic(2).characters().len(), 2);
        let v4 = AbelianGroup::new(vec![2, 2]).unwrap();
        let chars = v4.characters();
        assert_eq!(chars.len(), 4);
        assert!(chars[0].is_trivial());
        assert_eq!(chars[1].exponents(), &[0, 1]);
        assert_eq!(chars[2].exponents(), &[1, 0]);
        assert_eq!(AbelianGroup::trivial().characters().len(), 1);
    }

    #[test]
    fn c4_square_character() {
        let g = AbelianGroup::cyclic(4);
        let chi = g.character(&[2]).unwrap();
        let i = g.element(&[1]).unwrap();
        assert_eq!(chi.angle(&i), RationalAngle::new(1, 2));
        assert!((chi.value(&i) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        let k = chi.kernel(&g);
        assert_eq!(k.elements, vec![g.element(&[0]).unwrap(), g.element(&[2]).unwrap()]);
        assert_eq!(k.quotient_order, 2);
    }

    #[test]
    fn kernels() {
        let v4 = AbelianGroup::new(vec![2, 2]).unwrap();
        let chars = v4.characters();
        assert_eq!(chars[0].kernel(&v4).elements.len(), 4);
        // chi_1 kills a = (1,0)
        let k1 = chars[1].kernel(&v4);
        assert_eq!(k1.elements, vec![v4.identity(), v4.element(&[1, 0]).unwrap()]);
        assert_eq!(k1.quotient_order, 2);
        assert_eq!(chars[3].order(), 2);
    }

    #[test]
    fn orthogonality_exact() {
        for orders in [vec![2], vec![3], vec![4], vec![2, 2], vec![2, 3], vec![4, 2], vec![3, 3]] {
            let g = AbelianGroup::new(orders).unwrap();
            let chars = g.characters();
            for (i, a) in chars.iter().enumerate() {
                for b in &chars[i + 1..] {
                    let terms: Vec<(i64, RationalAngle)> =
                        g.elements().iter().map(|x| (1, a.angle(x) - b.angle(x))).collect();
                    assert!(sum_vanishes(&terms), "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn index_roundtrip() {
        let g = AbelianGroup::new(vec![3, 4, 2]).unwrap();
        for i in 0..g.order() {
            assert_eq!(g.index_of(&g.element_at(i)), i);
        }
    }

    #[test]
    fn class_of_uses_quotient_roots() {
        let g = AbelianGroup::cyclic(4);
        let chi = g.character(&[2]).unwrap();
        assert_eq!(chi.order(), 2);
        let classes: Vec<usize> = g.elements().iter().map(|x| chi.class_of(x)).collect();
        assert_eq!(classes, vec![0, 1, 0, 1]);
    }

    #[test]
    fn invalid_orders() {
        assert!(AbelianGroup::new(vec![2, 1]).is_err());
    }
}
