//! End-to-end checks on the shipped fixtures. Prints one line per criterion
//! and exits non-zero if any fails.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use spinsub::classify::{
    berlinkov_solomyak_check, classify, factor_substitution, ClassifyOptions, HeuristicOptions, Multiplicity,
    VerdictKind,
};
use spinsub::diffraction::{autocorrelation, diffraction_estimate, spectral_coefficient_check, WeightedPatch};
use spinsub::digits::{DigitString, DigitSystem};
use spinsub::fixtures;
use spinsub::fourier::{block_diagonalize, lyapunov_bounds, FourierBlock, LyapunovOptions, LyapunovVerdict};
use spinsub::odometer::{axis_neighbours, ball_vectors, verify_skew_consistency};
use spinsub::substitution::{letter_frequencies, substitution_matrix, Supertile};

const C4_TABLE: [(usize, f64); 4] = [(10, 0.703953), (11, 0.695342), (12, 0.688005), (13, 0.682035)];
const C4_TOL: f64 = 2e-3;
const C4_MIN_GRID: usize = 1 << 16;
const C4_TIME_LIMIT: Duration = Duration::from_secs(60);
const RESIDUAL_TOL: f64 = 1e-10;
const UNITARY_TOL: f64 = 1e-12;
const BS_GAP: f64 = 1e-6;
const ETA_TOL: f64 = 0.01;
const FLATNESS: f64 = 10.0;
const PEAK_DOMINANCE: f64 = 2.0;
const FREQ_TOL: f64 = 1e-12;
/// Relative to the expected share 1/3.
const SPIN_SHARE_TOL: f64 = 0.01;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c4_table() -> Outcome {
    let c4 = fixtures::c4();
    let chi = c4.group().character(&[1]).map_err(|e| e.to_string())?;
    let block = FourierBlock::new(&c4, &chi);
    let opts = LyapunovOptions::for_dim(1);
    let points = opts.quadrature.points(1);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let rows = pool.install(|| lyapunov_bounds(&block, 10, 13, &opts)).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let mut worst = 0.0f64;
    let mut cells = Vec::new();
    for ((n, want), row) in C4_TABLE.iter().zip(&rows) {
        if row.n != *n {
            return Err(format!("expected N={n}, got N={}", row.n));
        }
        worst = worst.max((row.two_f() - want).abs());
        cells.push(format!("{:.6}", row.two_f()));
    }
    let f12 = rows.iter().find(|r| r.n == 12).ok_or("no N=12 row")?;
    let singular = f12.verdict == LyapunovVerdict::Singular && f12.value < 2f64.sqrt().ln();
    let ok = worst <= C4_TOL && points >= C4_MIN_GRID && elapsed < C4_TIME_LIMIT && singular;
    ensure(
        ok,
        format!(
            "2f(10..13) = [{}], max deviation {worst:.2e}, {points} points, {:.2}s on one thread, f(12) {}",
            cells.join(", "),
            elapsed.as_secs_f64(),
            if singular { "singular-by-lyapunov" } else { "inconclusive" }
        ),
    )
}

fn vierdrachen_classification() -> Outcome {
    let cfg = fixtures::config(fixtures::VIERDRACHEN);
    let v = fixtures::vierdrachen();
    let report = classify(&v, &ClassifyOptions::from_config(&cfg)).map_err(|e| e.to_string())?;
    let want = [
        (VerdictKind::PurePointOdometer, None),
        (VerdictKind::Lebesgue, Some(Multiplicity::Exact(2))),
        (VerdictKind::SingularContinuous, None),
        (VerdictKind::Lebesgue, Some(Multiplicity::Exact(2))),
    ];
    let got: Vec<&str> = report.verdicts.iter().map(|v| v.verdict.short()).collect();
    let ok = report.verdicts.len() == 4
        && report.verdicts.iter().zip(&want).all(|(v, (k, m))| v.verdict == *k && m.map_or(true, |m| v.multiplicity == m));
    ensure(ok, format!("verdicts ({}) with Lebesgue multiplicity 2 on chi1, chi3", got.join(", ")))
}

fn exact_cross_sums() -> Outcome {
    let mut total = 0;
    for (name, sys) in [("RS", fixtures::rudin_shapiro()), ("Vierdrachen", fixtures::vierdrachen())] {
        let chi = sys.group().characters()[1].clone();
        for m in 1..=4 {
            let c = spectral_coefficient_check(&sys, &chi, 0, m, 0, None).map_err(|e| e.to_string())?;
            if let Some(why) = c.skipped {
                return Err(format!("{name}: {why}"));
            }
            if c.nonzero_cross_sums > 0 || c.pairs_checked == 0 {
                return Err(format!("{name} M={m}: {} of {} cross-sums nonzero", c.nonzero_cross_sums, c.pairs_checked));
            }
            total += c.pairs_checked;
        }
    }
    Ok(format!("{total} cross-sums over RS and Vierdrachen chi1, M=1..4, all exactly zero"))
}

fn spin_positions() -> Outcome {
    let mut checked = 0usize;
    let mut mismatches = 0usize;
    for sys in fixtures::spin_fixtures() {
        let l = sys.digit_system().len();
        for n in 0..=6 {
            for code in 0..sys.alphabet_size() as u32 {
                let a = sys.letter(code);
                let tile = sys.supertile(&a, n).map_err(|e| e.to_string())?;
                for (p, &c) in tile.cells().iter().enumerate() {
                    checked += 1;
                    if sys.supertile_spin_at(&a, &DigitString::from_index(p, l, n)) != sys.letter(c).spin {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    ensure(mismatches == 0, format!("{checked} cells on all spin fixtures at levels 0..=6, {mismatches} mismatches"))
}

fn skew_consistency() -> Outcome {
    let rs = verify_skew_consistency(&fixtures::rudin_shapiro(), 8, &ball_vectors(1, 8)).map_err(|e| e.to_string())?;
    let v = verify_skew_consistency(&fixtures::vierdrachen(), 6, &axis_neighbours(2)).map_err(|e| e.to_string())?;
    ensure(
        rs.violations == 0 && v.violations == 0 && rs.pairs_checked > 0 && v.pairs_checked > 0,
        format!(
            "RS n=8 |v|<=8: {} pairs, {} violations; Vierdrachen n=6 axis: {} pairs, {} violations",
            rs.pairs_checked, rs.violations, v.pairs_checked, v.violations
        ),
    )
}

fn block_diagonalisation() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut worst = 0.0f64;
    for sys in fixtures::spin_fixtures() {
        let bd = block_diagonalize(&sys);
        let m = sys.digit_system().dim();
        for _ in 0..100 {
            let k: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
            worst = worst.max(bd.residual(&k));
        }
    }
    let tri = fixtures::triomino();
    let mut unitary_dev = 0.0f64;
    for e in [1, 2] {
        let block = FourierBlock::new(&tri, &tri.group().character(&[e]).map_err(|e| e.to_string())?);
        for _ in 0..100 {
            let k = [rng.gen::<f64>(), rng.gen::<f64>()];
            let b = block.evaluate(&k);
            let d: DMatrix<Complex64> = &b * b.adjoint() - DMatrix::identity(3, 3) * Complex64::new(3.0, 0.0);
            unitary_dev = unitary_dev.max(d.norm());
        }
    }
    let cfg = fixtures::config(fixtures::TRIOMINO);
    let report = classify(&tri, &ClassifyOptions::from_config(&cfg)).map_err(|e| e.to_string())?;
    let mult = report.diagnostics.total_lebesgue_multiplicity;
    ensure(
        worst < RESIDUAL_TOL && unitary_dev < UNITARY_TOL && mult == 6,
        format!(
            "max residual {worst:.1e} over 100 k per fixture; Triomino |BB*-3I| {unitary_dev:.1e}; Lebesgue multiplicity {mult}"
        ),
    )
}

fn pp_factor() -> Outcome {
    let p = fixtures::pp_factor();
    let chi = p.group().character(&[2]).map_err(|e| e.to_string())?;
    let f = factor_substitution(&p, &chi, &HeuristicOptions::default()).map_err(|e| e.to_string())?;
    let rules = f.substitution.describe();
    let rules_ok = rules == ["a->aba", "b->bab"] && f.periodicity.is_periodic();
    let bs = berlinkov_solomyak_check(&substitution_matrix(p.as_qubit()), p.digit_system().len(), BS_GAP);
    let cfg = fixtures::config(fixtures::PP_FACTOR);
    let report = classify(&p, &ClassifyOptions::from_config(&cfg)).map_err(|e| e.to_string())?;
    let kinds: Vec<&str> = report.verdicts.iter().map(|v| v.verdict.short()).collect();
    let singular = report.verdicts.iter().skip(1).all(|v| v.verdict.is_singular());
    ensure(
        rules_ok && bs.passes && bs.min_gap > BS_GAP && singular,
        format!(
            "chi2 factor {} ({}); min ||lambda| - sqrt 3| = {:.3e}; verdicts ({})",
            rules.join(", "),
            if f.periodicity.is_periodic() { "periodic" } else { "no period found" },
            bs.min_gap,
            kinds.join(", ")
        ),
    )
}

fn digit_systems() -> Vec<(&'static str, DigitSystem)> {
    let mut out: Vec<(&'static str, DigitSystem)> = fixtures::ALL
        .iter()
        .filter_map(|(name, json)| fixtures::config(json).digit_system().ok().map(|d| (*name, d)))
        .collect();
    out.dedup_by(|a, b| a.1 == b.1);
    out
}

fn digit_properties() -> Outcome {
    let systems = digit_systems();
    let mut domains = 0;
    let mut strings = 0;
    for (name, d) in &systems {
        let l = d.len();
        let mut n = 0;
        while (l as u64).pow(n + 1) <= 1_000_000 {
            n += 1;
        }
        for level in 0..=n as usize {
            let dom = d.digit_domain(level).map_err(|e| e.to_string())?;
            let distinct: HashSet<&[i64]> = dom.points().collect();
            if dom.len() != l.pow(level as u32) || distinct.len() != dom.len() {
                return Err(format!("{name}: D^({level}) has {} points, {} distinct", dom.len(), distinct.len()));
            }
            domains += 1;
        }
        for level in 0..=6usize {
            for i in 0..l.pow(level as u32) {
                let s = DigitString::from_index(i, l, level);
                if d.expand_point(&d.point_of(&s), level) != s {
                    return Err(format!("{name}: round trip fails at level {level}, index {i}"));
                }
                strings += 1;
            }
        }
    }
    Ok(format!("{} digit systems, {domains} domains up to |D|^n <= 1e6, {strings} strings round-trip", systems.len()))
}

fn diffraction_flatness() -> Outcome {
    let rs = fixtures::rudin_shapiro();
    let chi = rs.group().character(&[1]).map_err(|e| e.to_string())?;
    let tile = rs.supertile(&rs.plain(0), 14).map_err(|e| e.to_string())?;
    let patch = WeightedPatch::from_supertile(&rs, &tile, &chi, None).map_err(|e| e.to_string())?;
    let eta = autocorrelation(&patch, 16).map_err(|e| e.to_string())?.max_off_origin();
    let est = diffraction_estimate(&patch, 1 << 14).map_err(|e| e.to_string())?;
    let ratio = est.peak_to_mean();

    let p = fixtures::pp_factor();
    let f = factor_substitution(&p, &p.group().character(&[2]).map_err(|e| e.to_string())?, &HeuristicOptions::default())
        .map_err(|e| e.to_string())?;
    let seq = Supertile::generate(&f.substitution, 0, 8).map_err(|e| e.to_string())?;
    let weights = seq.cells().iter().map(|&c| Complex64::new(if c == 0 { 1.0 } else { -1.0 }, 0.0)).collect();
    let periodic = diffraction_estimate(&WeightedPatch::from_sequence(weights), 1 << 13).map_err(|e| e.to_string())?;
    let peak = periodic.wave_vector(periodic.peak())[0];
    let dominance = periodic.dominance();
    ensure(
        eta < ETA_TOL && ratio < FLATNESS && peak == 0.5 && dominance >= PEAK_DOMINANCE,
        format!(
            "RS level 14: max|eta| = {eta:.2e}, max/mean = {ratio:.2}; +-1 factor sequence peaks at k = {peak} with dominance {dominance:.1}"
        ),
    )
}

fn uniform_frequencies() -> Outcome {
    let tri = fixtures::triomino();
    let freqs = letter_frequencies(tri.as_qubit());
    let dev = freqs.iter().map(|f| (f - 1.0 / 9.0).abs()).fold(0.0, f64::max);
    let tile = tri.supertile(&tri.plain(1), 10).map_err(|e| e.to_string())?;
    let mut counts = [0usize; 3];
    for &c in tile.cells() {
        counts[tri.group().index_of(&tri.letter(c).spin)] += 1;
    }
    let shares: Vec<f64> = counts.iter().map(|&c| c as f64 / tile.len() as f64).collect();
    let share_dev = shares.iter().map(|s| (3.0 * s - 1.0).abs()).fold(0.0, f64::max);
    ensure(
        freqs.len() == 9 && dev < FREQ_TOL && share_dev < SPIN_SHARE_TOL,
        format!(
            "max |freq - 1/9| = {dev:.1e}; spin shares in S^10(d1) = [{}], max relative deviation {share_dev:.2e}",
            shares.iter().map(|s| format!("{s:.5}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("C4 Lyapunov table", c4_table),
        ("Vierdrachen classification", vierdrachen_classification),
        ("exact level-M cross-sums", exact_cross_sums),
        ("spin at position", spin_positions),
        ("skew-product consistency", skew_consistency),
        ("block diagonalisation", block_diagonalisation),
        ("pp-factor example", pp_factor),
        ("digit-system properties", digit_properties),
        ("diffraction flatness", diffraction_flatness),
        ("uniform frequencies", uniform_frequencies),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (status, detail) = match run() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {status}: {name}: {detail}", i + 1);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
