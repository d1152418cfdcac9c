//! Displacement and Fourier matrices, their block decomposition over `G^`,
//! and Lyapunov upper bounds for the Fourier cocycle.
//!
//! With letters `a_i` and `T_ij = { d : S(a_j, d) = a_i }`, the Fourier matrix
//! is `B(k)_ij = sum_{x in T_ij} e^{2 pi i <k|x>}`. For a spin system the basis
//! change `u_chi(g) (x) e_l` with `u_chi(g) = conj(chi(g)) / sqrt|G|` splits
//! `B(k)` into blocks `B_chi(k)[e][d] = e^{2 pi i <k|d_e>} chi(W(d, e))`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digits::ExpansionMap;
use crate::error::{Error, Result};
use crate::group::{Character, RationalAngle};
use crate::substitution::{chi_of_matrix, ChiMatrix, QubitSubstitution, SpinSystem};

pub type CMatrix = DMatrix<Complex64>;

/// `T_ij` as explicit lists of lattice vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisplacementMatrix {
    size: usize,
    sets: Vec<Vec<Vec<i64>>>,
}

impl DisplacementMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> &[Vec<i64>] {
        &self.sets[i * self.size + j]
    }

    pub fn cardinality(&self, i: usize, j: usize) -> usize {
        self.get(i, j).len()
    }

    /// Column `j` flattened: the positions of all tiles in `S(a_j)`.
    pub fn column_union(&self, j: usize) -> Vec<Vec<i64>> {
        (0..self.size).flat_map(|i| self.get(i, j).to_vec()).collect()
    }
}

pub fn displacement_matrix(sub: &QubitSubstitution) -> DisplacementMatrix {
    let n = sub.alphabet_size();
    let digits = sub.digit_system();
    let mut sets = vec![Vec::new(); n * n];
    for j in 0..n {
        for (e, &i) in sub.image(j as u32).iter().enumerate() {
            sets[i as usize * n + j].push(digits.digit(e).to_vec());
        }
    }
    DisplacementMatrix { size: n, sets }
}

fn phase(k: &[f64], x: &[i64]) -> Complex64 {
    let t: f64 = k.iter().zip(x).map(|(a, &b)| a * b as f64).sum();
    Complex64::from_polar(1.0, std::f64::consts::TAU * t)
}

/// `B(k)` for a general qubit substitution.
pub fn fourier_matrix(sub: &QubitSubstitution, k: &[f64]) -> CMatrix {
    let t = displacement_matrix(sub);
    let n = t.size;
    CMatrix::from_fn(n, n, |i, j| t.get(i, j).iter().map(|x| phase(k, x)).sum())
}

/// The block `k -> B_chi(k)` of a spin system.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierBlock {
    chi: Character,
    chi_w: ChiMatrix,
    digits: Vec<Vec<i64>>,
    q: ExpansionMap,
}

impl FourierBlock {
    pub fn new(system: &SpinSystem, chi: &Character) -> Self {
        Self {
            chi: chi.clone(),
            chi_w: chi_of_matrix(chi, system.spin_matrix()),
            digits: system.digit_system().digits().to_vec(),
            q: system.digit_system().expansion().clone(),
        }
    }

    pub fn character(&self) -> &Character {
        &self.chi
    }

    pub fn size(&self) -> usize {
        self.digits.len()
    }

    pub fn chi_matrix(&self) -> &ChiMatrix {
        &self.chi_w
    }

    pub fn expansion(&self) -> &ExpansionMap {
        &self.q
    }

    pub fn evaluate(&self, k: &[f64]) -> CMatrix {
        let l = self.size();
        let w = self.chi_w.to_complex();
        CMatrix::from_fn(l, l, |e, d| phase(k, &self.digits[e]) * w[(d, e)])
    }

    /// Numerical rank of `chi(W)` with relative threshold `rel_tol`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        numerical_rank(&self.chi_w.to_complex(), rel_tol)
    }
}

pub fn numerical_rank(m: &CMatrix, rel_tol: f64) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// The blocks of `B(k)` together with the unitary `S` achieving
/// `S^{-1} B(k) S = (+)_chi B_chi(k)`.
#[derive(Clone, Debug)]
pub struct BlockDiagonalization {
    pub blocks: Vec<FourierBlock>,
    pub basis: CMatrix,
    qubit: QubitSubstitution,
}

pub fn block_diagonalize(system: &SpinSystem) -> BlockDiagonalization {
    let group = system.group();
    let l = system.digit_system().len();
    let n = group.order();
    let chars = group.characters();
    let norm = 1.0 / (n as f64).sqrt();
    let elements = group.elements();
    let mut basis = CMatrix::zeros(n * l, n * l);
    for (c, chi) in chars.iter().enumerate() {
        for (gi, g) in elements.iter().enumerate() {
            let v = chi.value(g).conj() * norm;
            for d in 0..l {
                basis[(gi * l + d, c * l + d)] = v;
            }
        }
    }
    BlockDiagonalization {
        blocks: chars.iter().map(|chi| FourierBlock::new(system, chi)).collect(),
        basis,
        qubit: system.as_qubit().clone(),
    }
}

impl BlockDiagonalization {
    pub fn direct_sum(&self, k: &[f64]) -> CMatrix {
        let l = self.blocks.first().map_or(0, FourierBlock::size);
        let n = self.blocks.len() * l;
        let mut out = CMatrix::zeros(n, n);
        for (c, b) in self.blocks.iter().enumerate() {
            out.view_mut((c * l, c * l), (l, l)).copy_from(&b.evaluate(k));
        }
        out
    }

    /// `|| S^{-1} B(k) S - (+) B_chi(k) ||_F`.
    pub fn residual(&self, k: &[f64]) -> f64 {
        let b = fourier_matrix(&self.qubit, k);
        let s = &self.basis;
        (s.adjoint() * b * s - self.direct_sum(k)).norm()
    }

    /// `|| S^dagger S - I ||_F`.
    pub fn basis_defect(&self) -> f64 {
        let n = self.basis.nrows();
        (self.basis.adjoint() * &self.basis - CMatrix::identity(n, n)).norm()
    }
}

/// Block decomposition of a configured system; general qubit substitutions
/// have no spin group to decompose over.
pub fn block_diagonalize_system(system: &crate::config::System) -> Result<BlockDiagonalization> {
    Ok(block_diagonalize(system.as_spin()?))
}

/// Matrix norm used for growth rates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Norm {
    #[default]
    Frobenius,
    Spectral,
}

fn norm_sq(m: &CMatrix, norm: Norm) -> f64 {
    match norm {
        Norm::Frobenius => m.norm_squared(),
        Norm::Spectral => {
            let s = m.clone().svd(false, false).singular_values;
            let top = s.iter().cloned().fold(0.0, f64::max);
            top * top
        }
    }
}

/// `B^(N)(k)` stored as `exp(log_scale) * matrix` with `||matrix||_F = 1`.
#[derive(Clone, Debug)]
pub struct CocycleProduct {
    pub matrix: CMatrix,
    pub log_scale: f64,
}

impl CocycleProduct {
    pub fn to_matrix(&self) -> CMatrix {
        &self.matrix * Complex64::new(self.log_scale.exp(), 0.0)
    }

    /// `log ||B^(N)(k)||`.
    pub fn log_norm(&self, norm: Norm) -> f64 {
        self.log_scale + 0.5 * norm_sq(&self.matrix, norm).ln()
    }
}

fn frac(v: f64) -> f64 {
    v - v.floor()
}

/// `B(k) B(Q^T k) ... B((Q^T)^{N-1} k)`, renormalised after every factor.
pub fn cocycle_product(block: &FourierBlock, k: &[f64], n: usize) -> Result<CocycleProduct> {
    if n == 0 {
        return Err(Error::InvalidParameter("cocycle length N must be at least 1".into()));
    }
    let l = block.size();
    let mut acc = CMatrix::identity(l, l);
    let mut log_scale = 0.0;
    let mut kk = k.to_vec();
    for _ in 0..n {
        acc *= block.evaluate(&kk);
        let s = acc.norm();
        if s > 0.0 {
            acc /= Complex64::new(s, 0.0);
            log_scale += s.ln();
        }
        kk = block.q.transpose_apply(&kk).into_iter().map(frac).collect();
    }
    Ok(CocycleProduct { matrix: acc, log_scale })
}

/// Midpoint rule on `[0,1)^m` with `per_axis` points along each axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quadrature {
    pub per_axis: usize,
}

impl Quadrature {
    pub fn default_for(m: usize) -> Self {
        match m {
            1 => Self { per_axis: 1 << 16 },
            2 => Self { per_axis: 1 << 10 },
            _ => Self { per_axis: 1 << (20 / m as u32).max(2) },
        }
    }

    pub fn points(&self, m: usize) -> usize {
        self.per_axis.pow(m as u32)
    }
}

/// Verdict attached to one `f(N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LyapunovVerdict {
    /// `f(N) < log sqrt(L) - 3 SE`.
    Singular,
    Inconclusive,
}

/// `f(N) = (1/2N) mean_k log ||B_chi^(N)(k)||^2` with its quadrature error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovBound {
    pub character: Vec<u32>,
    pub n: usize,
    pub value: f64,
    pub threshold: f64,
    pub std_error: f64,
    pub margin: f64,
    pub points: usize,
    pub norm: Norm,
    pub verdict: LyapunovVerdict,
}

impl LyapunovBound {
    pub fn two_f(&self) -> f64 {
        2.0 * self.value
    }
}

/// Options for [`lyapunov_bounds`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovOptions {
    pub quadrature: Quadrature,
    pub norm: Norm,
    /// Evaluate even when `chi(W)` is singular (the factor-substitution path).
    pub allow_rank_deficient: bool,
    pub rank_tol: f64,
}

impl LyapunovOptions {
    pub fn for_dim(m: usize) -> Self {
        Self { quadrature: Quadrature::default_for(m), norm: Norm::Frobenius, allow_rank_deficient: false, rank_tol: 1e-9 }
    }
}

const CHUNK: usize = 1024;

/// `f(N)` for every `N` in `1..=n_max` in one pass over the grid; entries for
/// `N < n_min` are omitted from the result.
pub fn lyapunov_bounds(
    block: &FourierBlock,
    n_min: usize,
    n_max: usize,
    opts: &LyapunovOptions,
) -> Result<Vec<LyapunovBound>> {
    if n_min == 0 || n_max < n_min {
        return Err(Error::InvalidParameter(format!("invalid range of N: {n_min}..={n_max}")));
    }
    let l = block.size();
    let rank = block.rank(opts.rank_tol);
    if rank < l && !opts.allow_rank_deficient {
        return Err(Error::RankDeficientBlock { rank, size: l });
    }
    let m = block.q.dim();
    let per_axis = opts.quadrature.per_axis;
    if per_axis == 0 {
        return Err(Error::InvalidParameter("quadrature needs at least one point per axis".into()));
    }
    let total = opts.quadrature.points(m);
    // grid points are (2 i + 1) / (2 P): keep numerators exact and reduce
    // Q^T k modulo 1 in integers
    let den = 2 * per_axis as i64;
    let unit: Vec<Complex64> =
        (0..den).map(|t| Complex64::from_polar(1.0, std::f64::consts::TAU * t as f64 / den as f64)).collect();
    let qt = block.q.matrix().transpose();
    let w = block.chi_w.to_complex();
    let digits = &block.digits;

    let chunks: Vec<(Vec<f64>, Vec<f64>)> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut sum = vec![0.0; n_max];
            let mut sum_sq = vec![0.0; n_max];
            for idx in c * CHUNK..((c + 1) * CHUNK).min(total) {
                let mut num = vec![0i64; m];
                let mut r = idx;
                for a in (0..m).rev() {
                    num[a] = 2 * (r % per_axis) as i64 + 1;
                    r /= per_axis;
                }
                let mut acc = CMatrix::identity(l, l);
                let mut log_scale = 0.0;
                for step in 0..n_max {
                    let b = CMatrix::from_fn(l, l, |e, d| {
                        let t: i64 = num.iter().zip(&digits[e]).map(|(a, b)| a * b).sum();
                        unit[t.rem_euclid(den) as usize] * w[(d, e)]
                    });
                    acc *= b;
                    let s = acc.norm();
                    if s > 0.0 {
                        acc /= Complex64::new(s, 0.0);
                        log_scale += s.ln();
                    } else {
                        log_scale = -700.0 * (step + 1) as f64;
                    }
                    let g = 2.0 * log_scale
                        + match opts.norm {
                            Norm::Frobenius => 0.0,
                            Norm::Spectral => norm_sq(&acc, Norm::Spectral).max(1e-300).ln(),
                        };
                    sum[step] += g;
                    sum_sq[step] += g * g;
                    num = qt.apply(&num).into_iter().map(|v| v.rem_euclid(den)).collect();
                }
            }
            (sum, sum_sq)
        })
        .collect();

    let mut sum = vec![0.0; n_max];
    let mut sum_sq = vec![0.0; n_max];
    for (s, q) in &chunks {
        for i in 0..n_max {
            sum[i] += s[i];
            sum_sq[i] += q[i];
        }
    }
    let threshold = 0.5 * (l as f64).ln();
    let p = total as f64;
    Ok((n_min..=n_max)
        .map(|n| {
            let mean = sum[n - 1] / p;
            let var = (sum_sq[n - 1] / p - mean * mean).max(0.0);
            let value = mean / (2.0 * n as f64);
            let std_error = var.sqrt() / (2.0 * n as f64 * p.sqrt());
            let margin = threshold - value;
            let verdict =
                if margin > 3.0 * std_error { LyapunovVerdict::Singular } else { LyapunovVerdict::Inconclusive };
            LyapunovBound {
                character: block.chi.exponents().to_vec(),
                n,
                value,
                threshold,
                std_error,
                margin,
                points: total,
                norm: opts.norm,
                verdict,
            }
        })
        .collect())
}

/// `f(N)` for a single `N`.
pub fn lyapunov_bound(block: &FourierBlock, n: usize, opts: &LyapunovOptions) -> Result<LyapunovBound> {
    Ok(lyapunov_bounds(block, n, n, opts)?.remove(0))
}

/// CSV rows `N,f,2f,threshold,verdict`.
pub fn lyapunov_csv(rows: &[LyapunovBound]) -> String {
    let mut out = String::from("N,f,2f,threshold,verdict\n");
    for r in rows {
        let verdict = match r.verdict {
            LyapunovVerdict::Singular => "singular",
            LyapunovVerdict::Inconclusive => "inconclusive",
        };
        out.push_str(&format!("{},{:.6},{:.6},{:.6},{}\n", r.n, r.value, r.two_f(), r.threshold, verdict));
    }
    out
}

/// Exact test that `chi(W) / sqrt(L)` is unitary: distinct columns of
/// `chi(W)` must be orthogonal in `Z[zeta]`.
pub fn chi_unitary_exact(chi_w: &ChiMatrix) -> bool {
    let l = chi_w.size();
    (0..l).all(|i| {
        (i + 1..l).all(|j| {
            let terms: Vec<(i64, RationalAngle)> =
                (0..l).map(|d| (1, chi_w.angle(d, i) - chi_w.angle(d, j))).collect();
            crate::cyclotomic::sum_vanishes(&terms)
        })
    })
}
