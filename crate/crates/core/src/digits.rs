//! Digit systems `(Q, D)` on the integer lattice.
//!
//! A digit system pairs an expanding integer matrix `Q` with a digit set `D`
//! holding exactly one representative of every coset of `Z^m / Q Z^m`. Every
//! lattice point then has a unique `(Q, D)`-adic expansion, and the level-`n`
//! domains `D^(n) = Q D^(n-1) + D` enumerate complete residue systems modulo
//! `Q^n Z^m`.
//!
//! Points of `D^(n)` are always stored in *mixed-radix order*: the point at
//! index `j_0 + L j_1 + ... + L^(n-1) j_(n-1)` is `sum_l Q^l d[j_l]`, least
//! significant digit first.

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of points (or cells) materialised at once.
pub const DEFAULT_CAP: usize = 10_000_000;

/// Tolerance on eigenvalue moduli when deciding whether `Q` is expanding.
pub const EXPANDING_TOL: f64 = 1e-9;

/// A square integer matrix, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntMatrix {
    dim: usize,
    entries: Vec<i64>,
}

impl IntMatrix {
    pub fn new(dim: usize, entries: Vec<i64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "expected {dim}x{dim} = {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension("matrix rows must form a square".into()));
        }
        Self::new(dim, rows.concat())
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1;
        }
        Self { dim, entries }
    }

    pub fn scalar(value: i64) -> Self {
        Self { dim: 1, entries: vec![value] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn apply(&self, x: &[i64]) -> Vec<i64> {
        let n = self.dim;
        (0..n)
            .map(|r| (0..n).map(|c| self.entries[r * n + c] * x[c]).sum())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut entries = vec![0; n * n];
        for r in 0..n {
            for c in 0..n {
                entries[c * n + r] = self.entries[r * n + c];
            }
        }
        Self { dim: n, entries }
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        let n = self.dim;
        let mut entries = vec![0; n * n];
        for r in 0..n {
            for c in 0..n {
                entries[r * n + c] = (0..n)
                    .map(|k| self.entries[r * n + k] * other.entries[k * n + c])
                    .sum();
            }
        }
        IntMatrix { dim: n, entries }
    }

    pub fn pow(&self, exp: u32) -> IntMatrix {
        (0..exp).fold(IntMatrix::identity(self.dim), |acc, _| acc.mul(self))
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> i64 {
        det_bareiss(self.dim, self.entries.iter().map(|&v| v as i128).collect()) as i64
    }

    /// The adjugate `adj(Q)`, satisfying `Q adj(Q) = det(Q) I`.
    pub fn adjugate(&self) -> IntMatrix {
        let n = self.dim;
        if n == 1 {
            return IntMatrix::scalar(1);
        }
        let mut entries = vec![0; n * n];
        for r in 0..n {
            for c in 0..n {
                let minor: Vec<i128> = (0..n)
                    .filter(|&i| i != r)
                    .flat_map(|i| {
                        (0..n)
                            .filter(move |&j| j != c)
                            .map(move |j| self.entries[i * n + j] as i128)
                    })
                    .collect();
                let sign = if (r + c) % 2 == 0 { 1 } else { -1 };
                // adjugate is the transposed cofactor matrix
                entries[c * n + r] = (sign * det_bareiss(n - 1, minor)) as i64;
            }
        }
        IntMatrix { dim: n, entries }
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries.iter().map(|&v| v as f64).collect::<Vec<_>>())
    }

    /// Moduli of the (complex) eigenvalues, computed numerically.
    pub fn eigenvalue_moduli(&self) -> Vec<f64> {
        self.to_f64().complex_eigenvalues().iter().map(|z| z.norm()).collect()
    }
}

fn det_bareiss(n: usize, mut a: Vec<i128>) -> i128 {
    if n == 0 {
        return 1;
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k * n + k] == 0 {
            let Some(swap) = (k + 1..n).find(|&i| a[i * n + k] != 0) else {
                return 0;
            };
            for j in 0..n {
                a.swap(k * n + j, swap * n + j);
            }
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i * n + j] = (a[i * n + j] * a[k * n + k] - a[i * n + k] * a[k * n + j]) / prev;
            }
        }
        prev = a[k * n + k];
    }
    sign * a[n * n - 1]
}

/// A validated expanding endomorphism `Q` of `Z^m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "IntMatrix", into = "IntMatrix")]
pub struct ExpansionMap {
    matrix: IntMatrix,
    det: i64,
    adjugate: IntMatrix,
}

impl TryFrom<IntMatrix> for ExpansionMap {
    type Error = Error;
    fn try_from(matrix: IntMatrix) -> Result<Self> {
        ExpansionMap::new(matrix)
    }
}

impl From<ExpansionMap> for IntMatrix {
    fn from(q: ExpansionMap) -> IntMatrix {
        q.matrix
    }
}

impl ExpansionMap {
    pub fn new(matrix: IntMatrix) -> Result<Self> {
        let det = matrix.det();
        if det == 0 {
            return Err(Error::DegenerateExpansion);
        }
        if let Some(modulus) = matrix
            .eigenvalue_moduli()
            .into_iter()
            .find(|&r| r <= 1.0 + EXPANDING_TOL)
        {
            return Err(Error::NotExpansive { modulus });
        }
        let adjugate = matrix.adjugate();
        Ok(Self { matrix, det, adjugate })
    }

    pub fn scalar(value: i64) -> Result<Self> {
        Self::new(IntMatrix::scalar(value))
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn det(&self) -> i64 {
        self.det
    }

    pub fn apply(&self, x: &[i64]) -> Vec<i64> {
        self.matrix.apply(x)
    }

    /// `Q^T k` for a real wave vector.
    pub fn transpose_apply(&self, k: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|c| (0..n).map(|r| self.matrix.get(r, c) as f64 * k[r]).sum())
            .collect()
    }

    /// `Q^{-1} x` when `x` lies in `Q Z^m`.
    pub fn divide(&self, x: &[i64]) -> Option<Vec<i64>> {
        let y = self.adjugate.apply(x);
        if y.iter().all(|v| v % self.det == 0) {
            Some(y.into_iter().map(|v| v / self.det).collect())
        } else {
            None
        }
    }

    /// A canonical key for the coset `x + Q Z^m`.
    pub fn residue_key(&self, x: &[i64]) -> Vec<i64> {
        let m = self.det.abs();
        self.adjugate.apply(x).into_iter().map(|v| v.rem_euclid(m)).collect()
    }

    pub fn in_image(&self, x: &[i64]) -> bool {
        self.residue_key(x).iter().all(|&v| v == 0)
    }
}

/// A `(Q, D)`-adic digit string, least significant digit first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DigitString(pub Vec<usize>);

impl DigitString {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn digits(&self) -> &[usize] {
        &self.0
    }

    /// Decode a mixed-radix index into `len` base-`radix` digits.
    pub fn from_index(mut index: usize, radix: usize, len: usize) -> Self {
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            out.push(index % radix);
            index /= radix;
        }
        DigitString(out)
    }

    pub fn to_index(&self, radix: usize) -> usize {
        self.0.iter().rev().fold(0, |acc, &d| acc * radix + d)
    }
}

/// A validated digit system `(Q, D)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawDigitSystem", into = "RawDigitSystem")]
pub struct DigitSystem {
    q: ExpansionMap,
    digits: Vec<Vec<i64>>,
    #[serde(skip)]
    residues: HashMap<Vec<i64>, usize>,
}

#[derive(Serialize, Deserialize)]
struct RawDigitSystem {
    q: IntMatrix,
    digits: Vec<Vec<i64>>,
}

impl TryFrom<RawDigitSystem> for DigitSystem {
    type Error = Error;
    fn try_from(raw: RawDigitSystem) -> Result<Self> {
        DigitSystem::new(raw.q, raw.digits)
    }
}

impl From<DigitSystem> for RawDigitSystem {
    fn from(s: DigitSystem) -> Self {
        RawDigitSystem { q: s.q.matrix, digits: s.digits }
    }
}

impl PartialEq for DigitSystem {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q && self.digits == other.digits
    }
}

/// Check that `(Q, D)` is a digit system.
///
/// Singular or non-expanding `Q` is reported as a hard error; a digit set that
/// fails to be a complete residue system is reported with every violation.
pub fn validate_digit_system(q: &IntMatrix, digits: &[Vec<i64>]) -> Result<ExpansionMap> {
    let q = ExpansionMap::new(q.clone())?;
    let m = q.dim();
    let mut violations = Vec::new();
    if digits.is_empty() {
        violations.push("digit set is empty".to_string());
    }
    for (i, d) in digits.iter().enumerate() {
        if d.len() != m {
            violations.push(format!("digit {i} has dimension {} (expected {m})", d.len()));
        }
    }
    if !violations.is_empty() {
        return Err(Error::InvalidDigitSystem(violations));
    }
    let det = q.det().unsigned_abs() as usize;
    if digits.len() != det {
        violations.push(format!("|D| = {} but |det Q| = {det}", digits.len()));
    }
    for i in 0..digits.len() {
        for j in i + 1..digits.len() {
            let diff: Vec<i64> = digits[i].iter().zip(&digits[j]).map(|(a, b)| a - b).collect();
            if q.in_image(&diff) {
                violations.push(format!(
                    "digits {i} {:?} and {j} {:?} lie in the same coset: difference {:?} is in Q Z^m",
                    digits[i], digits[j], diff
                ));
            }
        }
    }
    if violations.is_empty() {
        Ok(q)
    } else {
        Err(Error::InvalidDigitSystem(violations))
    }
}

impl DigitSystem {
    pub fn new(q: IntMatrix, digits: Vec<Vec<i64>>) -> Result<Self> {
        let q = validate_digit_system(&q, &digits)?;
        let residues = digits
            .iter()
            .enumerate()
            .map(|(i, d)| (q.residue_key(d), i))
            .collect();
        Ok(Self { q, digits, residues })
    }

    /// One-dimensional system with `Q = q` and `D = {0, 1, ..., |q|-1}`.
    pub fn standard_1d(q: i64) -> Result<Self> {
        Self::new(IntMatrix::scalar(q), (0..q.abs()).map(|d| vec![d]).collect())
    }

    pub fn expansion(&self) -> &ExpansionMap {
        &self.q
    }

    pub fn dim(&self) -> usize {
        self.q.dim()
    }

    /// `L = |D| = |det Q|`.
    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn digit(&self, index: usize) -> &[i64] {
        &self.digits[index]
    }

    pub fn digits(&self) -> &[Vec<i64>] {
        &self.digits
    }

    /// Index of the digit congruent to `x` modulo `Q Z^m`.
    pub fn digit_of(&self, x: &[i64]) -> usize {
        self.residues[&self.q.residue_key(x)]
    }

    /// Truncated `(Q, D)`-adic expansion of `x` to `levels` digits.
    ///
    /// Truncation only depends on `x mod Q^levels Z^m`.
    pub fn expand_point(&self, x: &[i64], levels: usize) -> DigitString {
        let mut cur = x.to_vec();
        let mut out = Vec::with_capacity(levels);
        for _ in 0..levels {
            let j = self.digit_of(&cur);
            let shifted: Vec<i64> = cur.iter().zip(&self.digits[j]).map(|(a, b)| a - b).collect();
            cur = self.q.divide(&shifted).expect("digit residue lookup is exact");
            out.push(j);
        }
        DigitString(out)
    }

    /// `sum_l Q^l d[j_l]`.
    pub fn point_of(&self, digits: &DigitString) -> Vec<i64> {
        let m = self.dim();
        let mut acc = vec![0; m];
        for &j in digits.0.iter().rev() {
            acc = self.q.apply(&acc);
            for (a, d) in acc.iter_mut().zip(&self.digits[j]) {
                *a += d;
            }
        }
        acc
    }

    pub fn domain_size(&self, level: usize) -> u128 {
        (self.len() as u128).saturating_pow(level as u32)
    }

    pub fn check_cap(&self, level: usize, cap: usize) -> Result<usize> {
        let requested = self.domain_size(level);
        if requested > cap as u128 {
            return Err(Error::DomainTooLarge { requested, cap });
        }
        Ok(requested as usize)
    }

    /// `D^(n)` in mixed-radix order with the default cap.
    pub fn digit_domain(&self, level: usize) -> Result<DigitDomain> {
        self.digit_domain_capped(level, DEFAULT_CAP)
    }

    pub fn digit_domain_capped(&self, level: usize, cap: usize) -> Result<DigitDomain> {
        let size = self.check_cap(level, cap)?;
        let m = self.dim();
        let l = self.len();
        let mut coords = Vec::with_capacity(size * m);
        coords.extend(std::iter::repeat(0).take(m));
        for _ in 0..level {
            let prev = std::mem::take(&mut coords);
            let count = prev.len() / m;
            coords = Vec::with_capacity(count * l * m);
            // D^(n)[j0 + L i] = d[j0] + Q D^(n-1)[i]
            for i in 0..count {
                let qp = self.q.apply(&prev[i * m..(i + 1) * m]);
                for d in &self.digits {
                    coords.extend(qp.iter().zip(d).map(|(a, b)| a + b));
                }
            }
        }
        Ok(DigitDomain { level, dim: m, coords })
    }
}

/// The enumerated domain `D^(n)` of an `n`-supertile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitDomain {
    level: usize,
    dim: usize,
    coords: Vec<i64>,
}

impl DigitDomain {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, index: usize) -> &[i64] {
        &self.coords[index * self.dim..(index + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[i64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// Map from lattice point to its index in the enumeration.
    pub fn index_map(&self) -> HashMap<Vec<i64>, usize> {
        self.points().enumerate().map(|(i, p)| (p.to_vec(), i)).collect()
    }

    /// Componentwise `(min, max)` of the points.
    pub fn bounds(&self) -> (Vec<i64>, Vec<i64>) {
        let mut lo = vec![i64::MAX; self.dim];
        let mut hi = vec![i64::MIN; self.dim];
        for p in self.points() {
            for a in 0..self.dim {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        (lo, hi)
    }
}
