//! Raster images of supertiles, digit tiles and diffraction estimates.
//!
//! Output is binary PPM (`P6`) or PGM (`P5`), plus a small SVG writer for
//! digit tiles. In the plane the first coordinate runs right and the second
//! runs up; one-dimensional patches are drawn as a strip.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diffraction::DiffractionEstimate;
use crate::digits::DigitSystem;
use crate::error::{Error, Result};
use crate::group::Character;
use crate::substitution::{QubitSubstitution, SpatialPatch, SpinSystem, Supertile};
use crate::tile::TileRaster;

pub type Rgb = [u8; 3];

pub const BACKGROUND: Rgb = [255, 255, 255];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<Rgb>,
}

impl Image {
    pub fn new(width: usize, height: usize, fill: Rgb) -> Self {
        Self { width, height, pixels: vec![fill; width * height] }
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, c: Rgb) {
        self.pixels[y * self.width + x] = c;
    }

    pub fn fill_rect(&mut self, x0: usize, y0: usize, w: usize, h: usize, c: Rgb) {
        for y in y0..(y0 + h).min(self.height) {
            for x in x0..(x0 + w).min(self.width) {
                self.set(x, y, c);
            }
        }
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.reserve(3 * self.pixels.len());
        for p in &self.pixels {
            out.extend_from_slice(p);
        }
        out
    }

    pub fn from_ppm(bytes: &[u8]) -> Result<Self> {
        let (header, body) = parse_header(bytes, b"P6")?;
        let (width, height) = header;
        if body.len() != 3 * width * height {
            return Err(Error::InvalidParameter("PPM body has the wrong length".into()));
        }
        let pixels = body.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Ok(Self { width, height, pixels })
    }

    pub fn write_ppm(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::write(path, self.to_ppm())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn from_pgm(bytes: &[u8]) -> Result<Self> {
        let ((width, height), body) = parse_header(bytes, b"P5")?;
        if body.len() != width * height {
            return Err(Error::InvalidParameter("PGM body has the wrong length".into()));
        }
        Ok(Self { width, height, pixels: body.to_vec() })
    }

    pub fn write_pgm(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::write(path, self.to_pgm())
    }
}

fn parse_header<'a>(bytes: &'a [u8], magic: &[u8]) -> Result<((usize, usize), &'a [u8])> {
    let bad = || Error::InvalidParameter("malformed netpbm header".into());
    if !bytes.starts_with(magic) {
        return Err(bad());
    }
    let mut fields = Vec::new();
    let mut pos = magic.len();
    while fields.len() < 3 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        let s = std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad())?;
        fields.push(s.parse::<usize>().map_err(|_| bad())?);
    }
    if fields[2] != 255 || pos >= bytes.len() {
        return Err(bad());
    }
    Ok(((fields[0], fields[1]), &bytes[pos + 1..]))
}

/// HSV with `h` in turns.
fn hsv(h: f64, s: f64, v: f64) -> Rgb {
    let h6 = (h.rem_euclid(1.0)) * 6.0;
    let c = v * s;
    let x = c * (1.0 - (h6 % 2.0 - 1.0).abs());
    let (r, g, b) = match h6 as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    let q = |t: f64| ((t + m) * 255.0).round() as u8;
    [q(r), q(g), q(b)]
}

fn scale(c: Rgb, f: f64) -> Rgb {
    c.map(|v| (v as f64 * f).round().clamp(0.0, 255.0) as u8)
}

/// One colour per letter code.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Palette {
    colors: Vec<Rgb>,
}

impl Palette {
    pub fn new(colors: Vec<Rgb>) -> Result<Self> {
        let p = Self { colors };
        if !p.is_injective() {
            return Err(Error::InvalidParameter("palette assigns one colour to two letters".into()));
        }
        Ok(p)
    }

    /// `n` evenly spaced hues.
    pub fn hues(n: usize) -> Self {
        Self { colors: (0..n).map(|i| hsv(i as f64 / n.max(1) as f64, 0.7, 0.9)).collect() }
    }

    /// Hue from the spin, brightness from the digit. `spins` overrides the
    /// base colour of each group element.
    pub fn for_spin_system(system: &SpinSystem, spins: Option<&[Rgb]>) -> Result<Self> {
        let order = system.group().order();
        let l = system.digit_system().len();
        if let Some(s) = spins {
            if s.len() != order {
                return Err(Error::InvalidParameter(format!(
                    "palette has {} spin colours for a group of order {order}",
                    s.len()
                )));
            }
        }
        let colors = (0..system.alphabet_size() as u32)
            .map(|code| {
                let a = system.letter(code);
                let g = system.group().index_of(&a.spin);
                let shade = 1.0 - 0.45 * a.digit as f64 / l as f64;
                match spins {
                    Some(s) => scale(s[g], shade),
                    None => hsv(g as f64 / order as f64, 0.75, 0.95 * shade),
                }
            })
            .collect();
        Self::new(colors)
    }

    pub fn for_qubit(sub: &QubitSubstitution) -> Self {
        Self::hues(sub.alphabet_size())
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn color(&self, code: u32) -> Rgb {
        self.colors[code as usize]
    }

    pub fn colors(&self) -> &[Rgb] {
        &self.colors
    }

    pub fn is_injective(&self) -> bool {
        let mut c = self.colors.clone();
        c.sort_unstable();
        c.windows(2).all(|w| w[0] != w[1])
    }
}

/// Draws the occupied cells of a patch, `cell_px` pixels per cell.
pub fn render_patch(patch: &SpatialPatch, cell_px: usize, color: impl Fn(u32) -> Rgb) -> Result<Image> {
    let px = cell_px.max(1);
    let shape = patch.shape();
    let lo = patch.lower_corner();
    match patch.dim() {
        1 => {
            let mut img = Image::new(shape[0] * px, px, BACKGROUND);
            for (x, c) in patch.cells() {
                img.fill_rect((x[0] - lo[0]) as usize * px, 0, px, px, color(c));
            }
            Ok(img)
        }
        2 => {
            let mut img = Image::new(shape[0] * px, shape[1] * px, BACKGROUND);
            for (x, c) in patch.cells() {
                let col = (x[0] - lo[0]) as usize;
                let row = shape[1] - 1 - (x[1] - lo[1]) as usize;
                img.fill_rect(col * px, row * px, px, px, color(c));
            }
            Ok(img)
        }
        m => Err(Error::UnsupportedDimension(m)),
    }
}

pub fn render_supertile(digits: &DigitSystem, tile: &Supertile, palette: &Palette, cell_px: usize) -> Result<Image> {
    if palette.len() <= tile.cells().iter().copied().max().unwrap_or(0) as usize {
        return Err(Error::InvalidParameter("palette is smaller than the alphabet".into()));
    }
    let patch = SpatialPatch::from_supertile(digits, tile)?;
    render_patch(&patch, cell_px, |c| palette.color(c))
}

/// Colours each cell by the class of `chi(spin)` among the `q`-th roots of
/// unity.
pub fn render_factor_image(system: &SpinSystem, tile: &Supertile, chi: &Character, cell_px: usize) -> Result<Image> {
    let q = chi.order();
    let classes = Palette::hues(q);
    let patch = SpatialPatch::from_supertile(system.digit_system(), tile)?;
    render_patch(&patch, cell_px, |c| classes.color(chi.class_of(&system.letter(c).spin) as u32))
}

/// Occupied raster cells, darker where the fill is higher.
pub fn render_digit_tile(raster: &TileRaster, cell_px: usize) -> Result<Image> {
    let px = cell_px.max(1);
    let (w, h) = match raster.dim {
        1 => (raster.shape[0], 1),
        2 => (raster.shape[0], raster.shape[1]),
        m => return Err(Error::UnsupportedDimension(m)),
    };
    let top = raster.counts.iter().copied().max().unwrap_or(1).max(1) as f64;
    let mut img = Image::new(w * px, h * px, BACKGROUND);
    for (i, &n) in raster.counts.iter().enumerate() {
        if n == 0 {
            continue;
        }
        let (col, row) = if raster.dim == 1 { (i, 0) } else { (i / h, h - 1 - i % h) };
        let v = (200.0 * (1.0 - n as f64 / top)).round() as u8;
        img.fill_rect(col * px, row * px, px, px, [v, v, v]);
    }
    Ok(img)
}

/// Occupied raster cells as SVG rectangles, one per horizontal run.
pub fn digit_tile_svg(raster: &TileRaster) -> Result<String> {
    let (w, h) = match raster.dim {
        1 => (raster.shape[0], 1),
        2 => (raster.shape[0], raster.shape[1]),
        m => return Err(Error::UnsupportedDimension(m)),
    };
    let occ = |col: usize, row: usize| {
        let i = if raster.dim == 1 { col } else { col * h + (h - 1 - row) };
        raster.counts[i] > 0
    };
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w} {h}" shape-rendering="crispEdges">"#);
    for row in 0..h {
        let mut col = 0;
        while col < w {
            if !occ(col, row) {
                col += 1;
                continue;
            }
            let start = col;
            while col < w && occ(col, row) {
                col += 1;
            }
            let _ = writeln!(out, r#"<rect x="{start}" y="{row}" width="{}" height="1"/>"#, col - start);
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Log-scaled intensity heatmap, brightest bin white. A one-dimensional
/// estimate becomes a strip `cell_px` pixels tall.
pub fn intensity_heatmap(est: &DiffractionEstimate, cell_px: usize) -> Result<GrayImage> {
    let px = cell_px.max(1);
    let g = est.grid;
    let (w, h) = match est.dim {
        1 => (g, 1),
        2 => (g, g),
        m => return Err(Error::UnsupportedDimension(m)),
    };
    let floor = est.max() * 1e-6;
    let logs: Vec<f64> = est.intensities.iter().map(|&v| (v.max(floor) + f64::MIN_POSITIVE).ln()).collect();
    let lo = logs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut pixels = vec![0u8; w * h * px * px];
    for (i, l) in logs.iter().enumerate() {
        let (col, row) = if est.dim == 1 { (i, 0) } else { (i / g, g - 1 - i % g) };
        let v = (255.0 * (l - lo) / span).round() as u8;
        for dy in 0..px {
            for dx in 0..px {
                pixels[(row * px + dy) * w * px + col * px + dx] = v;
            }
        }
    }
    Ok(GrayImage { width: w * px, height: h * px, pixels })
}
