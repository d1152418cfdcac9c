use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::QubitSubstitution;

/// `M[i][j]` = number of letters `a_i` in `S(a_j)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubstitutionMatrix {
    size: usize,
    entries: Vec<u64>,
}

impl SubstitutionMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.size + j]
    }

    pub fn column_sums(&self) -> Vec<u64> {
        (0..self.size).map(|j| (0..self.size).map(|i| self.get(i, j)).sum()).collect()
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.size, self.size, |i, j| self.get(i, j) as f64)
    }

    /// Moduli of all eigenvalues, sorted descending.
    pub fn eigenvalue_moduli(&self) -> Vec<f64> {
        let mut m: Vec<f64> = self.to_f64().complex_eigenvalues().iter().map(|z| z.norm()).collect();
        m.sort_by(|a, b| b.total_cmp(a));
        m
    }
}

pub fn substitution_matrix(sub: &QubitSubstitution) -> SubstitutionMatrix {
    let n = sub.alphabet_size();
    let mut entries = vec![0u64; n * n];
    for j in 0..n {
        for &i in sub.image(j as u32) {
            entries[i as usize * n + j] += 1;
        }
    }
    SubstitutionMatrix { size: n, entries }
}

/// Whether some power `M^p` is strictly positive, and the least such `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Primitivity {
    pub primitive: bool,
    pub power: Option<usize>,
}

/// Checks `M^p > 0` for `p` up to `|A|^2`.
pub fn primitivity(sub: &QubitSubstitution) -> Primitivity {
    let m = substitution_matrix(sub);
    let n = m.size;
    let base: Vec<bool> = m.entries.iter().map(|&v| v > 0).collect();
    let mut cur = base.clone();
    for p in 1..=n * n {
        if cur.iter().all(|&b| b) {
            return Primitivity { primitive: true, power: Some(p) };
        }
        let mut next = vec![false; n * n];
        for i in 0..n {
            for k in 0..n {
                if cur[i * n + k] {
                    for j in 0..n {
                        next[i * n + j] |= base[k * n + j];
                    }
                }
            }
        }
        if next == cur {
            break;
        }
        cur = next;
    }
    Primitivity { primitive: false, power: None }
}

/// Normalised right Perron-Frobenius eigenvector of `M`, by power iteration.
///
/// Non-primitive matrices are iterated with the lazy matrix `(M + L I) / 2`,
/// which has the same eigenvector for the top eigenvalue `L`.
pub fn letter_frequencies(sub: &QubitSubstitution) -> Vec<f64> {
    let m = substitution_matrix(sub);
    let n = m.size;
    let l = sub.digit_system().len() as f64;
    let lazy = !primitivity(sub).primitive;
    let mut v = vec![1.0 / n as f64; n];
    for _ in 0..1_000_000 {
        let mut w = vec![0.0; n];
        for i in 0..n {
            for (j, vj) in v.iter().enumerate() {
                w[i] += m.get(i, j) as f64 * vj;
            }
            if lazy {
                w[i] = 0.5 * (w[i] + l * v[i]);
            }
        }
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        let diff = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = w;
        if diff < 1e-16 {
            break;
        }
    }
    v
}
