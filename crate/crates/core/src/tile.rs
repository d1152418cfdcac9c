//! Raster approximation of the digit tile `lim Q^{-k} D^(k)`.
//!
//! The `L^k` points of `Q^{-k} D^(k)` are binned on a fixed grid with
//! `resolution` cells per unit. Each point stands for a piece of the tile of
//! volume `L^{-k}`, so the fill of a cell well inside the tile is
//! `count * L^{-k} * resolution^m`, which tends to `1 / mu(tile)`. The
//! measure estimate is the reciprocal of the median fill over interior cells
//! (occupied cells all of whose neighbours are occupied). Interior cells can
//! still meet a fractal boundary, which biases the mean but not the median.

use std::collections::HashSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::digits::{DigitSystem, DEFAULT_CAP};
use crate::error::{Error, Result};

/// Distance from 1 within which the measure estimate counts as a unit tile.
pub const UNIT_TOL: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TileRaster {
    pub level: usize,
    pub resolution: usize,
    pub dim: usize,
    /// Grid index of the first cell along each axis.
    pub origin: Vec<i64>,
    pub shape: Vec<usize>,
    /// Points per cell, row-major with the last axis fastest.
    pub counts: Vec<u32>,
    pub occupied_cells: usize,
    pub interior_cells: usize,
    /// Occupied cells times cell volume.
    pub support_measure: f64,
    pub measure_estimate: f64,
    /// Coincident points of `D^(k)`; zero for a digit system.
    pub overlaps: usize,
    pub unit: bool,
}

impl TileRaster {
    pub fn occupied(&self, index: usize) -> bool {
        self.counts[index] > 0
    }

    pub fn cell_index(&self, cell: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for ((&c, &lo), &s) in cell.iter().zip(&self.origin).zip(&self.shape) {
            let r = c - lo;
            if r < 0 || r as usize >= s {
                return None;
            }
            idx = idx * s + r as usize;
        }
        Some(idx)
    }

    pub fn cell_coords(&self, mut index: usize) -> Vec<i64> {
        let mut c = vec![0i64; self.dim];
        for a in (0..self.dim).rev() {
            c[a] = self.origin[a] + (index % self.shape[a]) as i64;
            index /= self.shape[a];
        }
        c
    }
}

fn neighbour_offsets(m: usize) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|p: Vec<i64>| {
                (-1..=1).map(move |c| {
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

/// Largest power of two `r` with `r^m <= L^level / 16`, at least 1.
pub fn default_resolution(system: &DigitSystem, level: usize) -> usize {
    let budget = (system.len() as f64).powi(level as i32) / 16.0;
    let mut r = 1usize;
    while ((2 * r) as f64).powi(system.dim() as i32) <= budget {
        r *= 2;
    }
    r
}

pub fn raster_digit_tile(system: &DigitSystem, level: usize, resolution: usize) -> Result<TileRaster> {
    raster_digit_tile_capped(system, level, resolution, DEFAULT_CAP)
}

pub fn raster_digit_tile_capped(system: &DigitSystem, level: usize, resolution: usize, cap: usize) -> Result<TileRaster> {
    if level == 0 || resolution == 0 {
        return Err(Error::InvalidParameter("level and resolution must be positive".into()));
    }
    let m = system.dim();
    let l = system.len() as f64;
    let npts = l.powi(level as i32);
    let cells_per_unit = (resolution as f64).powi(m as i32);
    if cells_per_unit > npts {
        return Err(Error::InvalidParameter(format!(
            "resolution {resolution} is finer than the level-{level} point lattice; raise the level"
        )));
    }
    let domain = system.digit_domain_capped(level, cap)?;
    let qk = system.expansion().matrix().pow(level as u32).to_f64();
    let inv: DMatrix<f64> = qk.try_inverse().ok_or(Error::DegenerateExpansion)?;
    let r = resolution as f64;
    let cells: Vec<Vec<i64>> = domain
        .points()
        .map(|p| {
            (0..m)
                .map(|i| {
                    let y: f64 = (0..m).map(|j| inv[(i, j)] * p[j] as f64).sum();
                    // grid-aligned points land in the upper cell
                    (y * r + 1e-9).floor() as i64
                })
                .collect()
        })
        .collect();
    let mut origin = vec![i64::MAX; m];
    let mut hi = vec![i64::MIN; m];
    for c in &cells {
        for a in 0..m {
            origin[a] = origin[a].min(c[a]);
            hi[a] = hi[a].max(c[a]);
        }
    }
    let shape: Vec<usize> = origin.iter().zip(&hi).map(|(a, b)| (b - a + 1) as usize).collect();
    let volume: usize = shape.iter().product();
    if volume > cap {
        return Err(Error::DomainTooLarge { requested: volume as u128, cap });
    }
    let mut raster = TileRaster {
        level,
        resolution,
        dim: m,
        origin,
        shape,
        counts: vec![0; volume],
        occupied_cells: 0,
        interior_cells: 0,
        support_measure: 0.0,
        measure_estimate: f64::NAN,
        overlaps: 0,
        unit: false,
    };
    for c in &cells {
        let i = raster.cell_index(c).expect("inside bounding box");
        raster.counts[i] += 1;
    }
    let mut seen = HashSet::with_capacity(domain.len());
    raster.overlaps = domain.points().filter(|p| !seen.insert(p.to_vec())).count();

    let offsets = neighbour_offsets(m);
    let scale = cells_per_unit / npts;
    let mut fills = Vec::new();
    for i in 0..volume {
        if raster.counts[i] == 0 {
            continue;
        }
        raster.occupied_cells += 1;
        let c = raster.cell_coords(i);
        let interior = offsets.iter().all(|o| {
            let n: Vec<i64> = c.iter().zip(o).map(|(a, b)| a + b).collect();
            raster.cell_index(&n).is_some_and(|j| raster.counts[j] > 0)
        });
        if interior {
            raster.interior_cells += 1;
            fills.push(raster.counts[i] as f64 * scale);
        }
    }
    raster.support_measure = raster.occupied_cells as f64 / cells_per_unit;
    if raster.interior_cells == 0 {
        return Err(Error::InvalidParameter(format!(
            "no interior cells at level {level} and resolution {resolution}; refine the level or coarsen the grid"
        )));
    }
    fills.sort_by(f64::total_cmp);
    let mid = fills.len() / 2;
    let median = if fills.len() % 2 == 1 { fills[mid] } else { 0.5 * (fills[mid - 1] + fills[mid]) };
    raster.measure_estimate = 1.0 / median;
    raster.unit = (raster.measure_estimate - 1.0).abs() < UNIT_TOL;
    Ok(raster)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digits::IntMatrix;
    use crate::fixtures;

    #[test]
    fn unit_interval() {
        let s = DigitSystem::standard_1d(2).unwrap();
        let r = raster_digit_tile(&s, 10, 32).unwrap();
        assert!((r.measure_estimate - 1.0).abs() < 1e-12);
        assert!((r.support_measure - 1.0).abs() < 1e-12);
        assert_eq!(r.overlaps, 0);
        assert!(r.unit);
    }

    #[test]
    fn twin_dragon() {
        let v = fixtures::vierdrachen();
        let r = raster_digit_tile(v.digit_system(), 14, 32).unwrap();
        assert!((r.measure_estimate - 1.0).abs() < UNIT_TOL, "{}", r.measure_estimate);
        assert!(r.unit);
    }

    #[test]
    fn stretched_digits_are_not_unit() {
        let s = DigitSystem::new(IntMatrix::scalar(2), vec![vec![0], vec![3]]).unwrap();
        let r = raster_digit_tile(&s, 12, 16).unwrap();
        assert!((r.measure_estimate - 3.0).abs() < 0.05, "{}", r.measure_estimate);
        assert!(!r.unit);
    }

    #[test]
    fn default_resolutions() {
        let v = fixtures::vierdrachen();
        assert_eq!(default_resolution(v.digit_system(), 14), 32);
        assert_eq!(default_resolution(&DigitSystem::standard_1d(2).unwrap(), 10), 64);
    }

    #[test]
    fn refuses_too_fine_grid() {
        let s = DigitSystem::standard_1d(2).unwrap();
        assert!(raster_digit_tile(&s, 4, 32).is_err());
    }
}
