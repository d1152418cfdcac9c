//! Empirical autocorrelation and diffraction of weighted Dirac combs on
//! finite supertiles.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::chi_unitary_exact;
use crate::group::{Character, RationalAngle};
use crate::substitution::{chi_of_matrix, SpatialPatch, SpinSystem, Supertile};

/// Complex weights on the cells of a patch, zero off its support.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedPatch {
    dim: usize,
    shape: Vec<usize>,
    support: Vec<bool>,
    weights: Vec<Complex64>,
    cells: usize,
}

impl WeightedPatch {
    /// Weights `chi(spin)` on `S^n(a)`, optionally only on the cells of one
    /// digit class.
    pub fn from_supertile(
        system: &SpinSystem,
        tile: &Supertile,
        chi: &Character,
        digit_class: Option<usize>,
    ) -> Result<Self> {
        let patch = SpatialPatch::from_supertile(system.digit_system(), tile)?;
        Ok(Self::from_patch(&patch, |c| {
            let a = system.letter(c);
            match digit_class {
                Some(d) if d != a.digit => Complex64::new(0.0, 0.0),
                _ => chi.value(&a.spin),
            }
        }))
    }

    pub fn from_patch(patch: &SpatialPatch, weight: impl Fn(u32) -> Complex64) -> Self {
        let mut support = Vec::new();
        let mut weights = Vec::new();
        for c in patch.grid() {
            support.push(c.is_some());
            weights.push(c.map_or(Complex64::new(0.0, 0.0), &weight));
        }
        Self { dim: patch.dim(), shape: patch.shape().to_vec(), support, weights, cells: patch.len() }
    }

    /// A one-dimensional patch on `0..len`.
    pub fn from_sequence(weights: Vec<Complex64>) -> Self {
        let n = weights.len();
        Self { dim: 1, shape: vec![n], support: vec![true; n], weights, cells: n }
    }

    pub fn len(&self) -> usize {
        self.cells
    }

    pub fn is_empty(&self) -> bool {
        self.cells == 0
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    fn offset(&self, x: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for (&c, &s) in x.iter().zip(&self.shape) {
            if c < 0 || c as usize >= s {
                return None;
            }
            idx = idx * s + c as usize;
        }
        Some(idx)
    }

    fn coords(&self, mut offset: usize) -> Vec<i64> {
        let mut x = vec![0i64; self.dim];
        for a in (0..self.dim).rev() {
            x[a] = (offset % self.shape[a]) as i64;
            offset /= self.shape[a];
        }
        x
    }
}

/// `eta(j)` for all `|j|_inf <= J`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutocorrelationTable {
    pub radius: usize,
    pub normalization: usize,
    pub entries: Vec<(Vec<i64>, Complex64)>,
    /// Pairs `(x, x - j)` with `x - j` outside the patch, summed over `j`.
    pub boundary_pairs: usize,
}

impl AutocorrelationTable {
    pub fn get(&self, j: &[i64]) -> Option<Complex64> {
        self.entries.iter().find(|(v, _)| v == j).map(|(_, e)| *e)
    }

    /// `max |eta(j)|` over `j != 0`.
    pub fn max_off_origin(&self) -> f64 {
        self.entries
            .iter()
            .filter(|(v, _)| v.iter().any(|&c| c != 0))
            .map(|(_, e)| e.norm())
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,re,im\n");
        for (v, e) in &self.entries {
            let j: Vec<String> = v.iter().map(i64::to_string).collect();
            out.push_str(&format!("\"{}\",{:.12e},{:.12e}\n", j.join(","), e.re, e.im));
        }
        out
    }
}

fn lattice_box(m: usize, r: i64) -> Vec<Vec<i64>> {
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
    out
}

fn is_canonical(v: &[i64]) -> bool {
    matches!(v.iter().find(|&&c| c != 0), Some(&c) if c > 0)
}

/// Finite-patch averages `eta(j) = (1/N) sum_x w(x) conj(w(x - j))`, dropping
/// pairs that leave the patch.
pub fn autocorrelation(patch: &WeightedPatch, radius: usize) -> Result<AutocorrelationTable> {
    if patch.is_empty() {
        return Err(Error::InvalidParameter("empty patch".into()));
    }
    let min_side = patch.shape.iter().copied().min().unwrap_or(0);
    if 2 * radius + 1 > min_side {
        return Err(Error::InvalidParameter(format!(
            "radius {radius} too large for a patch whose smallest side is {min_side}"
        )));
    }
    let vectors = lattice_box(patch.dim, radius as i64);
    let half: Vec<&Vec<i64>> = vectors.iter().filter(|v| is_canonical(v) || v.iter().all(|&c| c == 0)).collect();
    let n = patch.cells as f64;
    let computed: Vec<(Vec<i64>, Complex64, usize)> = half
        .par_iter()
        .map(|j| {
            let mut sum = Complex64::new(0.0, 0.0);
            let mut dropped = 0usize;
            for (i, w) in patch.weights.iter().enumerate() {
                if !patch.support[i] {
                    continue;
                }
                let x = patch.coords(i);
                let y: Vec<i64> = x.iter().zip(j.iter()).map(|(a, b)| a - b).collect();
                match patch.offset(&y).filter(|&k| patch.support[k]) {
                    Some(k) => sum += w * patch.weights[k].conj(),
                    None => dropped += 1,
                }
            }
            ((*j).clone(), sum / n, dropped)
        })
        .collect();
    let mut entries = Vec::with_capacity(vectors.len());
    let mut boundary_pairs = 0;
    for v in &vectors {
        let neg: Vec<i64> = v.iter().map(|c| -c).collect();
        let (value, dropped) = match computed.iter().find(|(j, _, _)| j == v) {
            Some((_, e, d)) => (*e, *d),
            None => {
                let (_, e, d) = computed.iter().find(|(j, _, _)| *j == neg).expect("mirror computed");
                (e.conj(), *d)
            }
        };
        boundary_pairs += dropped;
        entries.push((v.clone(), value));
    }
    Ok(AutocorrelationTable { radius, normalization: patch.cells, entries, boundary_pairs })
}

/// Normalised periodogram `|sum_x w(x) e^{2 pi i <k|x>}|^2 / N` on the grid
/// `k = i / grid` of `[0,1)^m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffractionEstimate {
    pub grid: usize,
    pub dim: usize,
    pub intensities: Vec<f64>,
}

impl DiffractionEstimate {
    pub fn mean(&self) -> f64 {
        self.intensities.iter().sum::<f64>() / self.intensities.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.intensities.iter().cloned().fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.intensities.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// `max / mean`, the flatness diagnostic.
    pub fn peak_to_mean(&self) -> f64 {
        self.max() / self.mean()
    }

    pub fn max_to_min(&self) -> f64 {
        self.max() / self.min()
    }

    pub fn wave_vector(&self, index: usize) -> Vec<f64> {
        let mut k = vec![0.0; self.dim];
        let mut r = index;
        for a in (0..self.dim).rev() {
            k[a] = (r % self.grid) as f64 / self.grid as f64;
            r /= self.grid;
        }
        k
    }

    /// Index of the brightest bin.
    pub fn peak(&self) -> usize {
        self.intensities
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map_or(0, |(i, _)| i)
    }

    /// Brightest intensity over the second brightest.
    pub fn dominance(&self) -> f64 {
        let mut v = self.intensities.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        if v.len() < 2 || v[1] == 0.0 {
            f64::INFINITY
        } else {
            v[0] / v[1]
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,intensity\n");
        for (i, v) in self.intensities.iter().enumerate() {
            let k: Vec<String> = self.wave_vector(i).iter().map(|c| format!("{c:.8}")).collect();
            out.push_str(&format!("\"{}\",{:.12e}\n", k.join(","), v));
        }
        out
    }
}

pub fn diffraction_estimate(patch: &WeightedPatch, grid: usize) -> Result<DiffractionEstimate> {
    if patch.is_empty() {
        return Err(Error::InvalidParameter("empty patch".into()));
    }
    if let Some(&side) = patch.shape.iter().find(|&&s| s > grid) {
        return Err(Error::InvalidParameter(format!("grid {grid} is smaller than the patch side {side}")));
    }
    let m = patch.dim;
    let total = grid.pow(m as u32);
    let mut data = vec![Complex64::new(0.0, 0.0); total];
    for (i, w) in patch.weights.iter().enumerate() {
        if patch.support[i] {
            let x = patch.coords(i);
            let idx = x.iter().fold(0usize, |acc, &c| acc * grid + c as usize);
            data[idx] = *w;
        }
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_inverse(grid);
    // transform along every axis in turn
    let mut stride = 1;
    for _ in 0..m {
        let mut line = vec![Complex64::new(0.0, 0.0); grid];
        for start in 0..total {
            if (start / stride) % grid != 0 {
                continue;
            }
            for (t, slot) in line.iter_mut().enumerate() {
                *slot = data[start + t * stride];
            }
            fft.process(&mut line);
            for (t, v) in line.iter().enumerate() {
                data[start + t * stride] = *v;
            }
        }
        stride *= grid;
    }
    let n = patch.cells as f64;
    Ok(DiffractionEstimate { grid, dim: m, intensities: data.iter().map(|z| z.norm_sqr() / n).collect() })
}

/// Result of checking the vanishing cross-sums behind the Lebesgue verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientCheck {
    /// Set when the character is not unitary for `W`.
    pub skipped: Option<String>,
    pub level: usize,
    pub pairs_checked: usize,
    pub nonzero_cross_sums: usize,
    pub max_eta: Option<f64>,
}

/// Exact test that `sum_d chi(spin S^M_i(d)) conj(chi(spin S^M_j(d))) = 0` for
/// all `i, j` in `D^(M)` with distinct top digits, plus `max |eta(j)|` of the
/// `f^chi_d` weighting on `S^n([d])`.
pub fn spectral_coefficient_check(
    system: &SpinSystem,
    chi: &Character,
    digit: usize,
    level: usize,
    radius: usize,
    patch_level: Option<usize>,
) -> Result<CoefficientCheck> {
    if !chi_unitary_exact(&chi_of_matrix(chi, system.spin_matrix())) {
        return Ok(CoefficientCheck {
            skipped: Some(format!("chi({}) is not unitary for W; check skipped", chi.label())),
            level,
            pairs_checked: 0,
            nonzero_cross_sums: 0,
            max_eta: None,
        });
    }
    let l = system.digit_system().len();
    let tiles = (0..l)
        .map(|d| system.supertile(&system.plain(d), level))
        .collect::<Result<Vec<_>>>()?;
    let angles: Vec<Vec<RationalAngle>> = tiles
        .iter()
        .map(|t| t.cells().iter().map(|&c| chi.angle(&system.letter(c).spin)).collect())
        .collect();
    let size = tiles[0].len();
    let top = |i: usize| if level == 0 { 0 } else { i / l.pow(level as u32 - 1) };
    let mut pairs = 0;
    let mut nonzero = 0;
    for i in 0..size {
        for j in 0..size {
            if level == 0 || top(i) == top(j) {
                continue;
            }
            pairs += 1;
            let terms: Vec<(i64, RationalAngle)> = (0..l).map(|d| (1, angles[d][i] - angles[d][j])).collect();
            if !crate::cyclotomic::sum_vanishes(&terms) {
                nonzero += 1;
            }
        }
    }
    let max_eta = match patch_level {
        Some(n) => {
            let tile = system.supertile(&system.plain(digit), n)?;
            let patch = WeightedPatch::from_supertile(system, &tile, chi, Some(digit))?;
            Some(autocorrelation(&patch, radius)?.max_off_origin())
        }
        None => None,
    };
    Ok(CoefficientCheck { skipped: None, level, pairs_checked: pairs, nonzero_cross_sums: nonzero, max_eta })
}
