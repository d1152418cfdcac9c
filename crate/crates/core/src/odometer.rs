//! The digit odometer and the spin cocycle of the group extension.
//!
//! Odometer points are finite truncations: a point of precision `M` is a
//! residue class modulo `Q^M Z^m`, written as its digit string.

use serde::{Deserialize, Serialize};

use crate::digits::{DigitString, DigitSystem, IntMatrix};
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::substitution::{Letter, SpinSystem};

/// A point of the odometer known to `precision()` digits.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OdometerPoint {
    pub digits: DigitString,
}

impl OdometerPoint {
    pub fn new(digits: DigitString) -> Self {
        Self { digits }
    }

    pub fn of_point(system: &DigitSystem, x: &[i64], precision: usize) -> Self {
        Self { digits: system.expand_point(x, precision) }
    }

    pub fn precision(&self) -> usize {
        self.digits.len()
    }

    pub fn digit(&self, level: usize) -> usize {
        self.digits.digits()[level]
    }
}

/// `j + v` computed with carries, modulo `Q^M Z^m`.
pub fn odometer_add(system: &DigitSystem, j: &OdometerPoint, v: &[i64]) -> OdometerPoint {
    let q = system.expansion();
    let mut carry = v.to_vec();
    let mut out = Vec::with_capacity(j.precision());
    for &d in j.digits.digits() {
        let x: Vec<i64> = carry.iter().zip(system.digit(d)).map(|(c, a)| c + a).collect();
        let e = system.digit_of(&x);
        let rest: Vec<i64> = x.iter().zip(system.digit(e)).map(|(a, b)| a - b).collect();
        carry = q.divide(&rest).expect("digit residue lookup is exact");
        out.push(e);
    }
    OdometerPoint::new(DigitString(out))
}

/// `phi(v, j)` together with the carry depth `M`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CocycleValue {
    pub value: GroupElement,
    pub depth: usize,
}

/// Number of levels at which the expansions of `j` and `j + v` still differ
/// in their carries: the least `M` with the carry difference vanishing.
///
/// Returns `None` when the carry is not resolved within `j`'s precision.
pub fn carry_depth(system: &DigitSystem, v: &[i64], j: &OdometerPoint, jv: &OdometerPoint) -> Option<usize> {
    let q = system.expansion();
    let mut delta = v.to_vec();
    for level in 0..=j.precision() {
        if delta.iter().all(|&c| c == 0) {
            return Some(level);
        }
        if level == j.precision() {
            break;
        }
        let shifted: Vec<i64> = delta
            .iter()
            .zip(system.digit(j.digit(level)))
            .zip(system.digit(jv.digit(level)))
            .map(|((d, a), b)| d + a - b)
            .collect();
        delta = q.divide(&shifted).expect("digits of j and j+v are congruent");
    }
    None
}

/// The skew-product cocycle
/// `phi(v, j) = (prod_{l<M} W(j_{l+1}, j_l))^{-1} prod_{l<M} W((j+v)_{l+1}, (j+v)_l)`.
///
/// One digit beyond the carry depth is required; otherwise the caller must
/// retry with a longer expansion.
pub fn spin_cocycle(system: &SpinSystem, v: &[i64], j: &OdometerPoint) -> Result<CocycleValue> {
    let digits = system.digit_system();
    let group = system.group();
    let w = system.spin_matrix();
    let jv = odometer_add(digits, j, v);
    let depth = carry_depth(digits, v, j, &jv)
        .filter(|&m| m < j.precision())
        .ok_or_else(|| Error::InsufficientPrecision { vector: v.to_vec(), precision: j.precision() })?;
    let mut value = group.identity();
    for level in 0..depth {
        let lost = w.get(j.digit(level + 1), j.digit(level));
        let gained = w.get(jv.digit(level + 1), jv.digit(level));
        value = group.mul(&value, &group.mul(&group.inv(lost), gained));
    }
    Ok(CocycleValue { value, depth })
}

/// Summary of a cellwise check of `spin(p + v) = phi(v, p) spin(p)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkewReport {
    pub level: usize,
    pub seeds: usize,
    pub vectors: usize,
    pub pairs_checked: usize,
    pub violations: usize,
}

/// All nonzero `v` with `max |v_i| <= r`.
pub fn ball_vectors(m: usize, r: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|p: Vec<i64>| {
                (-r..=r).map(move |c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    out.retain(|v| v.iter().any(|&c| c != 0));
    out
}

/// `+-e_i` for every axis.
pub fn axis_neighbours(m: usize) -> Vec<Vec<i64>> {
    (0..m)
        .flat_map(|i| {
            [1, -1].into_iter().map(move |s| {
                let mut v = vec![0; m];
                v[i] = s;
                v
            })
        })
        .collect()
}

/// Compare spins of every pair `p, p + v` inside `S^n(a)`, over all letters
/// `a`, against the cocycle.
pub fn verify_skew_consistency(system: &SpinSystem, level: usize, vectors: &[Vec<i64>]) -> Result<SkewReport> {
    let digits = system.digit_system();
    let group = system.group();
    let domain = digits.digit_domain(level)?;
    let index = domain.index_map();
    let mut report = SkewReport { level, vectors: vectors.len(), ..Default::default() };
    for code in 0..system.alphabet_size() as u32 {
        let a: Letter = system.letter(code);
        let tile = system.supertile(&a, level)?;
        report.seeds += 1;
        for (p, x) in domain.points().enumerate() {
            let mut ds = DigitString::from_index(p, digits.len(), level);
            // the supertile sits inside the (n+1)-supertile at digit(a)
            ds.0.push(a.digit);
            let j = OdometerPoint::new(ds);
            for v in vectors {
                let y: Vec<i64> = x.iter().zip(v).map(|(s, t)| s + t).collect();
                let Some(&q) = index.get(&y) else { continue };
                report.pairs_checked += 1;
                let phi = spin_cocycle(system, v, &j)?;
                let predicted = group.mul(&phi.value, &system.letter(tile.cell(p)).spin);
                if predicted != system.letter(tile.cell(q)).spin {
                    report.violations += 1;
                }
            }
        }
    }
    Ok(report)
}

/// Generators of the level-`i` eigenvalue group `(Q^T)^{-i} Z^m`, kept
/// exact as an integer matrix over a common denominator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EigenvalueLattice {
    pub depth: usize,
    pub numerator: IntMatrix,
    pub denominator: i64,
    /// `(Q^T)^i`.
    pub power: IntMatrix,
}

impl EigenvalueLattice {
    /// Column `c` of `(Q^T)^{-i}`.
    pub fn generator(&self, c: usize) -> Vec<f64> {
        let n = self.numerator.dim();
        (0..n).map(|r| self.numerator.get(r, c) as f64 / self.denominator as f64).collect()
    }

    pub fn generators(&self) -> Vec<Vec<f64>> {
        (0..self.numerator.dim()).map(|c| self.generator(c)).collect()
    }

    /// Whether `k = num / den` (componentwise) lies in the lattice, i.e.
    /// whether `(Q^T)^i k` is integral.
    pub fn contains(&self, num: &[i64], den: i64) -> bool {
        self.power.apply(num).iter().all(|y| y % den == 0)
    }
}

/// `E_O` up to level `i`: the columns of `(Q^T)^{-i}`.
pub fn odometer_eigenvalues(system: &DigitSystem, depth: usize) -> EigenvalueLattice {
    let qt = system.expansion().matrix().transpose().pow(depth as u32);
    let det = qt.det();
    let adj = qt.adjugate();
    let (numerator, denominator) = if det < 0 {
        let neg: Vec<i64> = adj.entries().iter().map(|v| -v).collect();
        (IntMatrix::new(adj.dim(), neg).expect("square"), -det)
    } else {
        (adj, det)
    };
    EigenvalueLattice { depth, numerator, denominator, power: qt }
}
