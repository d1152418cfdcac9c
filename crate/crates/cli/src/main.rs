use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use spinsub::classify::{classify, factor_substitution, ClassifyOptions, HeuristicOptions, VerdictKind};
use spinsub::config::{System, SystemConfig};
use spinsub::diffraction::{autocorrelation, diffraction_estimate, WeightedPatch};
use spinsub::fourier::{lyapunov_bounds, lyapunov_csv, FourierBlock, LyapunovOptions, Norm, Quadrature};
use spinsub::group::Character;
use spinsub::render::{
    digit_tile_svg, intensity_heatmap, render_digit_tile, render_factor_image, render_supertile, Palette,
};
use spinsub::substitution::{primitivity, QubitSubstitution, SpinSystem, Supertile};
use spinsub::tile::{default_resolution, raster_digit_tile_capped};
use spinsub::Error;

#[derive(Parser)]
#[command(name = "spinsub", version, about = "Spin substitutions on Z^m and their spectral classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a configuration and summarise the system.
    Validate(Common),
    /// Generate a supertile and print or write it as JSON.
    Supertile {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        level: usize,
        /// Seed letter, by label or index.
        #[arg(long)]
        seed: Option<String>,
    },
    /// Write a PPM image of a supertile, a factor colouring or the digit tile.
    Render {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 6)]
        level: usize,
        #[arg(long)]
        seed: Option<String>,
        /// Colour by the class of chi(spin) instead of by letter.
        #[arg(long = "char")]
        character: Option<String>,
        /// Render the digit tile raster instead of a supertile.
        #[arg(long)]
        tile: bool,
        /// Raster cells per unit length for --tile.
        #[arg(long)]
        resolution: Option<usize>,
        /// Pixels per cell.
        #[arg(long, default_value_t = 4)]
        scale: usize,
    },
    /// Classify every character of a spin system.
    Classify {
        #[command(flatten)]
        common: Common,
        /// Quadrature points per axis for the Lyapunov bound.
        #[arg(long)]
        grid: Option<usize>,
        /// Largest cocycle length tried.
        #[arg(long = "N")]
        n_max: Option<usize>,
    },
    /// Tabulate the Lyapunov bound f(N) for one character.
    Lyapunov {
        #[command(flatten)]
        common: Common,
        #[arg(long = "char")]
        character: String,
        /// Range `a..b` (inclusive) or a single value.
        #[arg(long = "N", default_value = "1..8")]
        range: String,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, value_enum, default_value_t = NormArg::Frobenius)]
        norm: NormArg,
    },
    /// Autocorrelation and periodogram of the chi-weighted supertile.
    Diffract {
        #[command(flatten)]
        common: Common,
        #[arg(long = "char")]
        character: String,
        #[arg(long, default_value_t = 10)]
        level: usize,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long, default_value_t = 16)]
        radius: usize,
        /// Periodogram size per axis; defaults to the next power of two
        /// covering the patch.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// The factor substitution attached to a character.
    Factor {
        #[command(flatten)]
        common: Common,
        #[arg(long = "char")]
        character: String,
    },
    /// Run validation, classification and rendering into one directory.
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 6)]
        level: usize,
        #[arg(long)]
        grid: Option<usize>,
    },
}

#[derive(Args)]
struct Common {
    /// System configuration (JSON).
    config: PathBuf,
    /// Output file, or directory for `report`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Machine-readable output.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Frobenius,
    Spectral,
}

impl From<NormArg> for Norm {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Frobenius => Norm::Frobenius,
            NormArg::Spectral => Norm::Spectral,
        }
    }
}

/// Errors in the configuration itself; these exit with status 2.
#[derive(Debug)]
struct Invalid(Error);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid configuration: {}", self.0)
    }
}

impl std::error::Error for Invalid {}

struct Loaded {
    config: SystemConfig,
    system: System,
}

fn load(path: &Path) -> Result<Loaded> {
    let config = SystemConfig::from_path(path).map_err(Invalid)?;
    let system = config.build().map_err(Invalid)?;
    Ok(Loaded { config, system })
}

fn spin(l: &Loaded) -> Result<&SpinSystem> {
    Ok(l.system.as_spin()?)
}

fn parse_character(system: &SpinSystem, text: &str) -> Result<Character> {
    let exps = text
        .trim_matches(|c| c == '(' || c == ')' || c == '[' || c == ']')
        .split(',')
        .map(|s| s.trim().parse::<i64>().with_context(|| format!("bad character exponent `{s}`")))
        .collect::<Result<Vec<_>>>()?;
    Ok(system.group().character(&exps)?)
}

fn parse_range(text: &str) -> Result<(usize, usize)> {
    let parse = |s: &str| s.trim().parse::<usize>().with_context(|| format!("bad N `{s}`"));
    match text.split_once("..") {
        Some((a, b)) => Ok((parse(a)?, parse(b.trim_start_matches('='))?)),
        None => {
            let n = parse(text)?;
            Ok((n, n))
        }
    }
}

fn parse_seed(sub: &QubitSubstitution, seed: Option<&str>) -> Result<u32> {
    let Some(s) = seed else { return Ok(0) };
    if let Some(i) = sub.labels().iter().position(|l| l == s) {
        return Ok(i as u32);
    }
    let i: u32 = s.parse().map_err(|_| anyhow!("unknown seed letter `{s}`; use a label or an index"))?;
    if i as usize >= sub.alphabet_size() {
        bail!("seed index {i} out of range for an alphabet of {} letters", sub.alphabet_size());
    }
    Ok(i)
}

fn emit(common: &Common, text: &str) -> Result<()> {
    match &common.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &impl serde::Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn summary(l: &Loaded) -> Value {
    let sub = l.system.as_qubit();
    let d = sub.digit_system();
    let prim = primitivity(sub);
    let mut v = json!({
        "valid": true,
        "name": l.config.name,
        "m": d.dim(),
        "det_Q": d.expansion().det(),
        "digits": d.len(),
        "alphabet_size": sub.alphabet_size(),
        "primitive": prim.primitive,
        "primitivity_power": prim.power,
    });
    match &l.system {
        System::Spin(s) => {
            v["kind"] = json!("spin");
            v["group_orders"] = json!(s.group().orders());
        }
        System::Qubit(_) => {
            v["kind"] = json!("qubit");
            v["rules"] = json!(sub.describe());
        }
    }
    v
}

fn validate(common: &Common) -> Result<()> {
    let l = load(&common.config)?;
    let s = summary(&l);
    if common.json {
        return emit(common, &pretty(&s)?);
    }
    let mut text = format!(
        "ok: {} system, m = {}, |det Q| = {}, {} letters",
        s["kind"].as_str().unwrap_or("?"),
        s["m"],
        s["det_Q"].as_i64().unwrap_or(0).abs(),
        s["alphabet_size"]
    );
    match s["primitivity_power"].as_u64() {
        Some(p) => text.push_str(&format!(", primitive (M^{p} > 0)\n")),
        None => text.push_str(", not primitive\n"),
    }
    emit(common, &text)
}

fn cap(l: &Loaded) -> usize {
    l.config.caps.max_cells
}

fn supertile_cmd(common: &Common, level: usize, seed: Option<&str>) -> Result<()> {
    let l = load(&common.config)?;
    let sub = l.system.as_qubit();
    let seed = parse_seed(sub, seed)?;
    let tile = Supertile::generate_capped(sub, seed, level, cap(&l))?;
    let domain = sub.digit_system().digit_domain_capped(level, cap(&l))?;
    if common.json || common.out.is_some() {
        let cells: Vec<Value> = domain
            .points()
            .zip(tile.cells())
            .map(|(p, &c)| json!({ "position": p, "letter": sub.labels()[c as usize] }))
            .collect();
        let v = json!({ "level": level, "seed": sub.labels()[seed as usize], "cells": cells });
        return emit(common, &pretty(&v)?);
    }
    let counts = tile.letter_counts(sub.alphabet_size());
    let mut text = format!("S^{level}({}) has {} cells\n", sub.labels()[seed as usize], tile.len());
    for (label, n) in sub.labels().iter().zip(counts) {
        if n > 0 {
            text.push_str(&format!("  {label}: {n}\n"));
        }
    }
    if sub.digit_system().dim() == 1 && tile.len() <= 256 {
        let word: Vec<&str> = tile.cells().iter().map(|&c| sub.labels()[c as usize].as_str()).collect();
        text.push_str(&format!("  word: {}\n", word.join(" ")));
    }
    emit(common, &text)
}

#[allow(clippy::too_many_arguments)]
fn render_cmd(
    common: &Common,
    level: usize,
    seed: Option<&str>,
    character: Option<&str>,
    tile: bool,
    resolution: Option<usize>,
    scale: usize,
) -> Result<()> {
    let l = load(&common.config)?;
    let out = common.out.clone().ok_or_else(|| anyhow!("render needs --out"))?;
    let sub = l.system.as_qubit();
    if tile {
        let d = sub.digit_system();
        let r = resolution.unwrap_or_else(|| default_resolution(d, level));
        let raster = raster_digit_tile_capped(d, level, r, cap(&l))?;
        let is_svg = out.extension().is_some_and(|e| e == "svg");
        if is_svg {
            fs::write(&out, digit_tile_svg(&raster)?)?;
        } else {
            render_digit_tile(&raster, scale)?.write_ppm(&out)?;
        }
        let v = json!({
            "level": level,
            "resolution": r,
            "measure_estimate": raster.measure_estimate,
            "support_measure": raster.support_measure,
            "interior_cells": raster.interior_cells,
            "overlaps": raster.overlaps,
            "unit": raster.unit,
        });
        if common.json {
            print!("{}", pretty(&v)?);
        } else {
            println!(
                "digit tile: measure ~ {:.4} ({}), written to {}",
                raster.measure_estimate,
                if raster.unit { "unit" } else { "not unit" },
                out.display()
            );
        }
        return Ok(());
    }
    let seed = parse_seed(sub, seed)?;
    let st = Supertile::generate_capped(sub, seed, level, cap(&l))?;
    let img = match (&l.system, character) {
        (System::Spin(s), Some(c)) => render_factor_image(s, &st, &parse_character(s, c)?, scale)?,
        (System::Qubit(_), Some(_)) => bail!("--char needs a spin system"),
        (System::Spin(s), None) => {
            let pal = Palette::for_spin_system(s, l.config.palette.spins.as_deref())?;
            render_supertile(sub.digit_system(), &st, &pal, scale)?
        }
        (System::Qubit(q), None) => render_supertile(sub.digit_system(), &st, &Palette::for_qubit(q), scale)?,
    };
    img.write_ppm(&out)?;
    if common.json {
        print!("{}", pretty(&json!({ "width": img.width, "height": img.height, "out": out }))?);
    } else {
        println!("{}x{} image written to {}", img.width, img.height, out.display());
    }
    Ok(())
}

fn classify_options(l: &Loaded, grid: Option<usize>, n_max: Option<usize>) -> ClassifyOptions {
    let mut o = ClassifyOptions::from_config(&l.config);
    if let Some(g) = grid {
        o.lyapunov.quadrature = Quadrature { per_axis: g };
    }
    o.n_max = n_max;
    o
}

fn classify_cmd(common: &Common, grid: Option<usize>, n_max: Option<usize>) -> Result<()> {
    let l = load(&common.config)?;
    let report = classify(spin(&l)?, &classify_options(&l, grid, n_max))?;
    if common.json {
        return emit(common, &pretty(&report)?);
    }
    emit(common, &report.to_csv())
}

fn lyapunov_cmd(common: &Common, character: &str, range: &str, grid: Option<usize>, norm: NormArg) -> Result<()> {
    let l = load(&common.config)?;
    let s = spin(&l)?;
    let chi = parse_character(s, character)?;
    let (lo, hi) = parse_range(range)?;
    let mut opts = LyapunovOptions::for_dim(s.digit_system().dim());
    opts.norm = norm.into();
    opts.rank_tol = l.config.tolerances.rank;
    if let Some(g) = grid {
        opts.quadrature = Quadrature { per_axis: g };
    }
    let rows = lyapunov_bounds(&FourierBlock::new(s, &chi), lo, hi, &opts)?;
    if common.json {
        return emit(common, &pretty(&rows)?);
    }
    emit(common, &lyapunov_csv(&rows))
}

fn diffract_cmd(
    common: &Common,
    character: &str,
    level: usize,
    seed: Option<&str>,
    radius: usize,
    grid: Option<usize>,
) -> Result<()> {
    let l = load(&common.config)?;
    let s = spin(&l)?;
    let chi = parse_character(s, character)?;
    let seed = parse_seed(s.as_qubit(), seed)?;
    let tile = Supertile::generate_capped(s.as_qubit(), seed, level, cap(&l))?;
    let patch = WeightedPatch::from_supertile(s, &tile, &chi, None)?;
    let eta = autocorrelation(&patch, radius)?;
    let side = patch.shape().iter().copied().max().unwrap_or(1);
    let grid = grid.unwrap_or_else(|| side.next_power_of_two());
    let est = diffraction_estimate(&patch, grid)?;
    let v = json!({
        "character": chi.exponents(),
        "level": level,
        "cells": patch.len(),
        "radius": radius,
        "max_eta": eta.max_off_origin(),
        "grid": grid,
        "peak_to_mean": est.peak_to_mean(),
        "peak_wave_vector": est.wave_vector(est.peak()),
    });
    if let Some(dir) = &common.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("autocorrelation.csv"), eta.to_csv())?;
        fs::write(dir.join("diffraction.csv"), est.to_csv())?;
        if est.dim <= 2 {
            intensity_heatmap(&est, 1)?.write_pgm(dir.join("diffraction.pgm"))?;
        }
        fs::write(dir.join("diffraction.json"), pretty(&v)?)?;
    }
    if common.json {
        print!("{}", pretty(&v)?);
    } else {
        println!(
            "{chi}: max |eta(j)| for 0 < |j| <= {radius} is {:.3e}; periodogram max/mean {:.3} on a {grid}-point grid",
            eta.max_off_origin(),
            est.peak_to_mean()
        );
    }
    Ok(())
}

fn factor_json(s: &SpinSystem, chi: &Character) -> Result<Value> {
    let f = factor_substitution(s, chi, &HeuristicOptions::default())?;
    Ok(json!({
        "character": f.character,
        "kind": f.kind,
        "quotient_order": f.quotient_order,
        "rules": f.substitution.describe(),
        "bijective": f.bijective,
        "periodicity": f.periodicity,
    }))
}

fn factor_cmd(common: &Common, character: &str) -> Result<()> {
    let l = load(&common.config)?;
    let s = spin(&l)?;
    let chi = parse_character(s, character)?;
    let v = factor_json(s, &chi)?;
    if common.json {
        return emit(common, &pretty(&v)?);
    }
    let rules: Vec<String> = v["rules"].as_array().into_iter().flatten().filter_map(|r| r.as_str().map(String::from)).collect();
    let periodic = v["periodicity"]["verdict"].as_str().unwrap_or("?");
    emit(common, &format!("{}\n{}\n", rules.join("\n"), periodic))
}

fn report_cmd(common: &Common, level: usize, grid: Option<usize>) -> Result<()> {
    let l = load(&common.config)?;
    let dir = common.out.clone().ok_or_else(|| anyhow!("report needs --out DIR"))?;
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("system.json"), pretty(&summary(&l))?)?;
    let sub = l.system.as_qubit();
    let d = sub.digit_system();
    let mut written = vec!["system.json".to_string()];
    if d.dim() <= 2 {
        let st = Supertile::generate_capped(sub, 0, level, cap(&l))?;
        let pal = match &l.system {
            System::Spin(s) => Palette::for_spin_system(s, l.config.palette.spins.as_deref())?,
            System::Qubit(q) => Palette::for_qubit(q),
        };
        render_supertile(d, &st, &pal, 4)?.write_ppm(dir.join("supertile.ppm"))?;
        written.push("supertile.ppm".into());
        let tl = (1..=40usize).find(|&k| (d.len() as f64).powi(k as i32) >= 16384.0).unwrap_or(40);
        if let Ok(raster) = raster_digit_tile_capped(d, tl, default_resolution(d, tl), cap(&l)) {
            render_digit_tile(&raster, 4)?.write_ppm(dir.join("tile.ppm"))?;
            fs::write(dir.join("tile.svg"), digit_tile_svg(&raster)?)?;
            fs::write(
                dir.join("tile.json"),
                pretty(&json!({
                    "level": tl,
                    "measure_estimate": raster.measure_estimate,
                    "support_measure": raster.support_measure,
                    "unit": raster.unit,
                }))?,
            )?;
            written.extend(["tile.ppm".into(), "tile.svg".into(), "tile.json".into()]);
        }
    }
    if let System::Spin(s) = &l.system {
        let report = classify(s, &classify_options(&l, grid, None))?;
        fs::write(dir.join("classification.json"), pretty(&report)?)?;
        fs::write(dir.join("classification.csv"), report.to_csv())?;
        written.extend(["classification.json".into(), "classification.csv".into()]);
        let factors = report
            .verdicts
            .iter()
            .filter(|v| matches!(v.verdict, VerdictKind::Singular | VerdictKind::SingularContinuous))
            .map(|v| {
                let exps: Vec<i64> = v.character.iter().map(|&e| e as i64).collect();
                factor_json(s, &s.group().character(&exps)?)
            })
            .collect::<Result<Vec<_>>>()?;
        if !factors.is_empty() {
            fs::write(dir.join("factors.json"), pretty(&factors)?)?;
            written.push("factors.json".into());
        }
    }
    if common.json {
        print!("{}", pretty(&json!({ "out": dir, "files": written }))?);
    } else {
        println!("wrote {} files to {}", written.len(), dir.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Validate(c) => validate(c),
        Command::Supertile { common, level, seed } => supertile_cmd(common, *level, seed.as_deref()),
        Command::Render { common, level, seed, character, tile, resolution, scale } => {
            render_cmd(common, *level, seed.as_deref(), character.as_deref(), *tile, *resolution, *scale)
        }
        Command::Classify { common, grid, n_max } => classify_cmd(common, *grid, *n_max),
        Command::Lyapunov { common, character, range, grid, norm } => lyapunov_cmd(common, character, range, *grid, *norm),
        Command::Diffract { common, character, level, seed, radius, grid } => {
            diffract_cmd(common, character, *level, seed.as_deref(), *radius, *grid)
        }
        Command::Factor { common, character } => factor_cmd(common, character),
        Command::Report { common, level, grid } => report_cmd(common, *level, *grid),
    }
}

fn main() -> ExitCode {
    if let Ok(n) = std::env::var("SPINSUB_THREADS") {
        if let Ok(n) = n.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Invalid>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
