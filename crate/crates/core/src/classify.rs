//! Per-character spectral classification.
//!
//! For each `chi` in `G^` the decision tree is:
//!
//! 1. trivial `chi`: pure point, eigenvalues of the odometer;
//! 2. `chi(W) / sqrt(L)` unitary: Lebesgue of multiplicity `L`;
//! 3. `chi(W)` of rank one: singular via the bijective factor on `G / ker chi`,
//!    singular continuous when the factor looks aperiodic and aperiodicity is
//!    asserted;
//! 4. full rank: Lyapunov bound `f(N) < log sqrt(L)`, then the
//!    Berlinkov-Solomyak test (one-dimensional systems only);
//! 5. intermediate rank: the same two tests on the factor over `G / ker chi`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digits::DigitSystem;
use crate::error::{Error, Result};
use crate::fourier::{
    lyapunov_bounds, numerical_rank, chi_unitary_exact, FourierBlock, LyapunovOptions, LyapunovVerdict,
};
use crate::group::{AbelianGroup, Character};
use crate::odometer::odometer_eigenvalues;
use crate::substitution::{
    chi_of_matrix, periodicity_heuristic, primitivity, substitution_matrix, Periodicity, QubitSubstitution,
    SpinMatrix, SpinSystem, SubstitutionMatrix,
};

/// Largest `|G|` for which unitarity and rank one are decided exactly.
pub const EXACT_GROUP_LIMIT: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Unitarity {
    pub unitary: bool,
    /// `|| U^dagger U - I ||_F` for `U = chi(W) / sqrt(L)`.
    pub residual: f64,
    pub exact: bool,
}

pub fn is_chi_unitary(system: &SpinSystem, chi: &Character, tol: f64) -> Unitarity {
    let cw = chi_of_matrix(chi, system.spin_matrix());
    let l = cw.size();
    let u = cw.to_complex() / num_complex::Complex64::new((l as f64).sqrt(), 0.0);
    let residual = (u.adjoint() * &u - crate::fourier::CMatrix::identity(l, l)).norm();
    if system.group().order() <= EXACT_GROUP_LIMIT {
        Unitarity { unitary: chi_unitary_exact(&cw), residual, exact: true }
    } else {
        Unitarity { unitary: residual < tol, residual, exact: false }
    }
}

/// Rank of `chi(W)`: exact for rank one on small groups, numerical otherwise.
pub fn chi_rank(system: &SpinSystem, chi: &Character, rel_tol: f64) -> usize {
    let cw = chi_of_matrix(chi, system.spin_matrix());
    if system.group().order() <= EXACT_GROUP_LIMIT {
        let l = cw.size();
        // unimodular entries: rank one iff every 2x2 minor vanishes
        let rank_one = (0..l).all(|i| {
            (0..l).all(|j| cw.angle(i, j) + cw.angle(0, 0) == cw.angle(i, 0) + cw.angle(0, j))
        });
        if rank_one {
            return 1;
        }
    }
    numerical_rank(&cw.to_complex(), rel_tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorKind {
    /// Alphabet `G / ker chi`.
    RankOne,
    /// Alphabet `(G / ker chi) x D`.
    General,
}

/// The substitutive factor associated with a character.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorSubstitution {
    pub character: Vec<u32>,
    pub kind: FactorKind,
    pub quotient_order: usize,
    pub substitution: QubitSubstitution,
    /// The general factor viewed as a spin system over `C_q`.
    pub spin_factor: Option<SpinSystem>,
    pub bijective: bool,
    pub periodicity: Periodicity,
}

/// Settings for the periodicity scan of factor substitutions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeuristicOptions {
    /// Largest supertile (in cells) scanned.
    pub max_cells: usize,
    pub radius_1d: u32,
    pub radius_2d: u32,
}

impl Default for HeuristicOptions {
    fn default() -> Self {
        Self { max_cells: 1 << 14, radius_1d: 64, radius_2d: 16 }
    }
}

fn heuristic_level(digits: &DigitSystem, max_cells: usize) -> usize {
    let l = digits.len();
    let mut n = 0;
    while (l as u128).pow(n as u32 + 1) <= max_cells as u128 {
        n += 1;
    }
    n
}

fn is_bijective(sub: &QubitSubstitution) -> bool {
    let n = sub.alphabet_size();
    (0..sub.digit_system().len()).all(|d| {
        let mut seen = vec![false; n];
        (0..n as u32).all(|a| !std::mem::replace(&mut seen[sub.substitute(a, d) as usize], true))
    })
}

/// Spin system over `C_q = G / ker chi` with `W'(i, j) = class of chi(W(i, j))`.
pub fn character_quotient(system: &SpinSystem, chi: &Character) -> Result<SpinSystem> {
    let q = chi.order();
    let l = system.digit_system().len();
    let w = system.spin_matrix();
    if q == 1 {
        // the trivial quotient: no spins left, a pure digit substitution
        let group = AbelianGroup::trivial();
        let rows = vec![vec![group.identity(); l]; l];
        return SpinSystem::new(system.digit_system().clone(), group.clone(), SpinMatrix::new(&group, rows)?);
    }
    let group = AbelianGroup::cyclic(q as u32);
    let rows: Vec<Vec<Vec<i64>>> =
        (0..l).map(|i| (0..l).map(|j| vec![chi.class_of(w.get(i, j)) as i64]).collect()).collect();
    let w = SpinMatrix::from_residues(&group, &rows)?;
    SpinSystem::new(system.digit_system().clone(), group, w)
}

pub fn factor_substitution(system: &SpinSystem, chi: &Character, opts: &HeuristicOptions) -> Result<FactorSubstitution> {
    let q = chi.order();
    let l = system.digit_system().len();
    let w = system.spin_matrix();
    let rank_one = !chi.is_trivial() && chi_rank(system, chi, 1e-9) == 1;
    let (kind, substitution, spin_factor) = if rank_one {
        let class = |i: usize, j: usize| chi.class_of(w.get(i, j));
        // v = u + s_i identifies (u, i) with a class of G / ker chi
        let shift: Vec<usize> = (0..l).map(|e| (class(e, 0) + q - class(0, 0)) % q).collect();
        let rules: Vec<Vec<u32>> = (0..q)
            .map(|v| (0..l).map(|e| ((v + class(0, e) + shift[e]) % q) as u32).collect())
            .collect();
        let sub = QubitSubstitution::new(system.digit_system().clone(), rules, None)?;
        (FactorKind::RankOne, sub, None)
    } else {
        let f = character_quotient(system, chi)?;
        (FactorKind::General, f.as_qubit().clone(), Some(f))
    };
    let digits = system.digit_system();
    let radius = if digits.dim() == 1 { opts.radius_1d } else { opts.radius_2d };
    let periodicity = periodicity_heuristic(&substitution, heuristic_level(digits, opts.max_cells), radius)?;
    Ok(FactorSubstitution {
        character: chi.exponents().to_vec(),
        kind,
        quotient_order: q,
        bijective: is_bijective(&substitution),
        substitution,
        spin_factor,
        periodicity,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerlinkovSolomyak {
    /// No eigenvalue of `M` has modulus `sqrt(L)`.
    pub passes: bool,
    pub min_gap: f64,
    pub moduli: Vec<f64>,
}

pub fn berlinkov_solomyak_check(m: &SubstitutionMatrix, l: usize, tol: f64) -> BerlinkovSolomyak {
    let target = (l as f64).sqrt();
    let moduli = m.eigenvalue_moduli();
    let min_gap = moduli.iter().map(|r| (r - target).abs()).fold(f64::INFINITY, f64::min);
    BerlinkovSolomyak { passes: min_gap > tol, min_gap, moduli }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictKind {
    PurePointOdometer,
    Lebesgue,
    /// Pure point or singular continuous.
    Singular,
    SingularContinuous,
    SingularByLyapunov,
    Undetermined,
}

impl VerdictKind {
    pub fn is_singular(&self) -> bool {
        matches!(self, VerdictKind::Singular | VerdictKind::SingularContinuous | VerdictKind::SingularByLyapunov)
    }

    pub fn short(&self) -> &'static str {
        match self {
            VerdictKind::PurePointOdometer => "pp",
            VerdictKind::Lebesgue => "ac",
            VerdictKind::Singular => "sing",
            VerdictKind::SingularContinuous => "sc",
            VerdictKind::SingularByLyapunov => "sing-lyap",
            VerdictKind::Undetermined => "?",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "kebab-case")]
pub enum Multiplicity {
    Exact(usize),
    /// Upper bound only.
    AtMost(usize),
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEvidence {
    pub n: usize,
    pub f: f64,
    pub threshold: f64,
    pub margin: f64,
    pub std_error: f64,
    pub points: usize,
    pub n_max: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "test", rename_all = "kebab-case")]
pub enum Evidence {
    Odometer { depth: usize, generators: Vec<Vec<f64>> },
    ChiUnitary { residual: f64, exact: bool },
    RankOneFactor {
        quotient_order: usize,
        rules: Vec<String>,
        bijective: bool,
        periodicity: Periodicity,
        aperiodic_asserted: bool,
    },
    Lyapunov { rank: usize, on_factor: bool, bound: LyapunovEvidence },
    BerlinkovSolomyak { rank: usize, on_factor: bool, min_gap: f64, lyapunov_best: Option<LyapunovEvidence> },
    Inconclusive { rank: usize, reason: String, lyapunov_best: Option<LyapunovEvidence> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralVerdict {
    pub character: Vec<u32>,
    pub verdict: VerdictKind,
    pub multiplicity: Multiplicity,
    pub evidence: Evidence,
}

/// Unitary characters set against eigenvalues of `M` of modulus `sqrt(L)`; reported, not interpreted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Number of `chi` with `chi`-unitary `W`.
    pub unitary_characters: usize,
    /// Eigenvalues of `M` of modulus `sqrt(L)`, with multiplicity.
    pub root_l_eigenvalues: usize,
    pub total_lebesgue_multiplicity: usize,
    pub lebesgue_multiplicity_parity: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub name: Option<String>,
    pub alphabet_size: usize,
    pub digits: usize,
    pub primitivity_power: Option<usize>,
    pub aperiodic_asserted: bool,
    pub verdicts: Vec<SpectralVerdict>,
    pub diagnostics: Diagnostics,
}

impl SpectralReport {
    pub fn kinds(&self) -> Vec<VerdictKind> {
        self.verdicts.iter().map(|v| v.verdict).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("character,verdict,multiplicity,test\n");
        for v in &self.verdicts {
            let chi: Vec<String> = v.character.iter().map(u32::to_string).collect();
            let mult = match v.multiplicity {
                Multiplicity::Exact(n) => n.to_string(),
                Multiplicity::AtMost(n) => format!("<={n}"),
                Multiplicity::Unknown => String::new(),
            };
            let test = serde_json::to_value(&v.evidence)
                .ok()
                .and_then(|e| e.get("test").and_then(|t| t.as_str().map(str::to_string)))
                .unwrap_or_default();
            let verdict = serde_json::to_value(v.verdict).ok().and_then(|s| s.as_str().map(str::to_string));
            out.push_str(&format!("\"{}\",{},{},{}\n", chi.join(","), verdict.unwrap_or_default(), mult, test));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub lyapunov: LyapunovOptions,
    /// Override of the largest `N` tried; by default chosen from the grid.
    pub n_max: Option<usize>,
    pub heuristic: HeuristicOptions,
    pub unitarity_tol: f64,
    pub bs_tol: f64,
    pub aperiodic: bool,
    pub name: Option<String>,
}

impl ClassifyOptions {
    pub fn for_dim(m: usize) -> Self {
        Self {
            lyapunov: LyapunovOptions::for_dim(m),
            n_max: None,
            heuristic: HeuristicOptions::default(),
            unitarity_tol: 1e-10,
            bs_tol: 1e-6,
            aperiodic: false,
            name: None,
        }
    }

    pub fn from_config(config: &crate::config::SystemConfig) -> Self {
        let mut o = Self::for_dim(config.m);
        o.aperiodic = config.aperiodic;
        o.name = config.name.clone();
        o.unitarity_tol = config.tolerances.unitarity;
        o.lyapunov.rank_tol = config.tolerances.rank;
        o.bs_tol = config.tolerances.berlinkov_solomyak;
        o
    }
}

/// Largest `N` whose cocycle is still resolved by the grid: roughly
/// `L^(N-1) <= (P / 4)^m`, capped at 16.
pub fn default_n_max(l: usize, m: usize, per_axis: usize) -> usize {
    let budget = ((per_axis / 4).max(1) as f64).powi(m as i32).ln();
    let n = 1 + (budget / (l as f64).ln()).floor() as usize;
    n.clamp(1, 16)
}

fn evidence_of(b: &crate::fourier::LyapunovBound, n_max: usize) -> LyapunovEvidence {
    LyapunovEvidence {
        n: b.n,
        f: b.value,
        threshold: b.threshold,
        margin: b.margin,
        std_error: b.std_error,
        points: b.points,
        n_max,
    }
}

fn lyapunov_or_bs(
    system: &SpinSystem,
    chi: &Character,
    rank: usize,
    opts: &ClassifyOptions,
) -> Result<(VerdictKind, Evidence)> {
    let on_factor = rank > 1 && rank < system.digit_system().len();
    let (sys, block_chi) = if on_factor {
        let f = character_quotient(system, chi)?;
        let gen = f.group().character(&[1])?;
        (f, gen)
    } else {
        (system.clone(), chi.clone())
    };
    let block = FourierBlock::new(&sys, &block_chi);
    let digits = sys.digit_system();
    let mut lopts = opts.lyapunov;
    lopts.allow_rank_deficient = on_factor;
    let n_max = opts.n_max.unwrap_or_else(|| default_n_max(digits.len(), digits.dim(), lopts.quadrature.per_axis));
    let bounds = lyapunov_bounds(&block, 1, n_max, &lopts)?;
    if let Some(b) = bounds.iter().find(|b| b.verdict == LyapunovVerdict::Singular) {
        return Ok((VerdictKind::SingularByLyapunov, Evidence::Lyapunov { rank, on_factor, bound: evidence_of(b, n_max) }));
    }
    let best = bounds.iter().max_by(|a, b| a.margin.total_cmp(&b.margin)).map(|b| evidence_of(b, n_max));
    if digits.dim() == 1 {
        let m = substitution_matrix(sys.as_qubit());
        let bs = berlinkov_solomyak_check(&m, digits.len(), opts.bs_tol);
        if bs.passes {
            return Ok((
                VerdictKind::Singular,
                Evidence::BerlinkovSolomyak { rank, on_factor, min_gap: bs.min_gap, lyapunov_best: best },
            ));
        }
        return Ok((
            VerdictKind::Undetermined,
            Evidence::Inconclusive {
                rank,
                reason: format!("no f(N) below log sqrt(L) for N <= {n_max}; M has an eigenvalue of modulus sqrt(L)"),
                lyapunov_best: best,
            },
        ));
    }
    Ok((
        VerdictKind::Undetermined,
        Evidence::Inconclusive {
            rank,
            reason: format!("no f(N) below log sqrt(L) for N <= {n_max}; Berlinkov-Solomyak needs m = 1"),
            lyapunov_best: best,
        },
    ))
}

fn classify_character(system: &SpinSystem, chi: &Character, opts: &ClassifyOptions) -> Result<SpectralVerdict> {
    let l = system.digit_system().len();
    let character = chi.exponents().to_vec();
    if chi.is_trivial() {
        let e = odometer_eigenvalues(system.digit_system(), 1);
        return Ok(SpectralVerdict {
            character,
            verdict: VerdictKind::PurePointOdometer,
            multiplicity: Multiplicity::Unknown,
            evidence: Evidence::Odometer { depth: 1, generators: e.generators() },
        });
    }
    let u = is_chi_unitary(system, chi, opts.unitarity_tol);
    if u.unitary {
        return Ok(SpectralVerdict {
            character,
            verdict: VerdictKind::Lebesgue,
            multiplicity: Multiplicity::Exact(l),
            evidence: Evidence::ChiUnitary { residual: u.residual, exact: u.exact },
        });
    }
    let rank = chi_rank(system, chi, opts.lyapunov.rank_tol);
    if rank == 1 {
        let f = factor_substitution(system, chi, &opts.heuristic)?;
        let verdict = if !f.periodicity.is_periodic() && opts.aperiodic {
            VerdictKind::SingularContinuous
        } else {
            VerdictKind::Singular
        };
        return Ok(SpectralVerdict {
            character,
            verdict,
            multiplicity: Multiplicity::AtMost(f.quotient_order),
            evidence: Evidence::RankOneFactor {
                quotient_order: f.quotient_order,
                rules: f.substitution.describe(),
                bijective: f.bijective,
                periodicity: f.periodicity,
                aperiodic_asserted: opts.aperiodic,
            },
        });
    }
    let (verdict, evidence) = lyapunov_or_bs(system, chi, rank, opts)?;
    Ok(SpectralVerdict { character, verdict, multiplicity: Multiplicity::Unknown, evidence })
}

/// Classify every `H^chi` of a primitive spin system.
pub fn classify(system: &SpinSystem, opts: &ClassifyOptions) -> Result<SpectralReport> {
    let prim = primitivity(system.as_qubit());
    if !prim.primitive {
        return Err(Error::NonPrimitive(format!(
            "no power M^p with p <= {} of the {}x{} substitution matrix is positive",
            system.alphabet_size().pow(2),
            system.alphabet_size(),
            system.alphabet_size()
        )));
    }
    let chars = system.group().characters();
    let verdicts = chars
        .par_iter()
        .map(|chi| classify_character(system, chi, opts))
        .collect::<Result<Vec<_>>>()?;
    let l = system.digit_system().len();
    let unitary = verdicts.iter().filter(|v| v.verdict == VerdictKind::Lebesgue).count();
    let target = (l as f64).sqrt();
    let root_l = substitution_matrix(system.as_qubit())
        .eigenvalue_moduli()
        .iter()
        .filter(|r| (*r - target).abs() <= opts.bs_tol)
        .count();
    let total = unitary * l;
    Ok(SpectralReport {
        name: opts.name.clone(),
        alphabet_size: system.alphabet_size(),
        digits: l,
        primitivity_power: prim.power,
        aperiodic_asserted: opts.aperiodic,
        verdicts,
        diagnostics: Diagnostics {
            unitary_characters: unitary,
            root_l_eigenvalues: root_l,
            total_lebesgue_multiplicity: total,
            lebesgue_multiplicity_parity: if total % 2 == 0 { "even" } else { "odd" }.into(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::fourier::Quadrature;

    fn quick(m: usize) -> ClassifyOptions {
        let mut o = ClassifyOptions::for_dim(m);
        o.lyapunov.quadrature = Quadrature { per_axis: if m == 1 { 1 << 12 } else { 64 } };
        o.aperiodic = true;
        o
    }

    #[test]
    fn unitarity_examples() {
        let v = fixtures::vierdrachen();
        let c = v.group().characters();
        assert!(is_chi_unitary(&v, &c[1], 1e-10).unitary);
        assert!(is_chi_unitary(&v, &c[3], 1e-10).unitary);
        assert!(!is_chi_unitary(&v, &c[0], 1e-10).unitary);
        let c4 = fixtures::c4();
        assert!(is_chi_unitary(&c4, &c4.group().character(&[2]).unwrap(), 1e-10).unitary);
    }

    #[test]
    fn rank_examples() {
        let v = fixtures::vierdrachen();
        assert_eq!(chi_rank(&v, &v.group().characters()[2], 1e-9), 1);
        let p = fixtures::pp_factor();
        assert_eq!(chi_rank(&p, &p.group().character(&[2]).unwrap(), 1e-9), 1);
        let rs = fixtures::rudin_shapiro();
        assert_eq!(chi_rank(&rs, &rs.group().characters()[1], 1e-9), 2);
    }

    #[test]
    fn pp_factor_rank_one_factor() {
        let p = fixtures::pp_factor();
        let f = factor_substitution(&p, &p.group().character(&[2]).unwrap(), &HeuristicOptions::default()).unwrap();
        assert_eq!(f.substitution.describe(), vec!["a->aba", "b->bab"]);
        assert!(f.bijective);
        assert!(f.periodicity.is_periodic());
    }

    #[test]
    fn vierdrachen_rank_one_factor() {
        let v = fixtures::vierdrachen();
        let f = factor_substitution(&v, &v.group().characters()[2], &HeuristicOptions::default()).unwrap();
        assert_eq!(f.kind, FactorKind::RankOne);
        assert_eq!(f.substitution.alphabet_size(), 2);
        assert!(f.bijective);
        assert!(!f.periodicity.is_periodic());
    }

    #[test]
    fn trivial_factor_is_pure_digit() {
        let v = fixtures::vierdrachen();
        let f = factor_substitution(&v, &v.group().characters()[0], &HeuristicOptions::default()).unwrap();
        assert_eq!(f.kind, FactorKind::General);
        assert_eq!(f.substitution.alphabet_size(), 2);
        assert_eq!(f.substitution.rules(), vec![vec![0, 1], vec![0, 1]]);
    }

    #[test]
    fn bs_examples() {
        let rs = fixtures::rudin_shapiro();
        assert!(!berlinkov_solomyak_check(&substitution_matrix(rs.as_qubit()), 2, 1e-6).passes);
        let p = fixtures::pp_factor();
        assert!(berlinkov_solomyak_check(&substitution_matrix(p.as_qubit()), 3, 1e-6).passes);
    }

    #[test]
    fn vierdrachen_report() {
        let v = fixtures::vierdrachen();
        let r = classify(&v, &quick(2)).unwrap();
        use VerdictKind::*;
        assert_eq!(r.kinds(), vec![PurePointOdometer, Lebesgue, SingularContinuous, Lebesgue]);
        assert_eq!(r.diagnostics.total_lebesgue_multiplicity, 4);
    }

    #[test]
    fn sc_needs_assertion() {
        let v = fixtures::vierdrachen();
        let mut o = quick(2);
        o.aperiodic = false;
        assert_eq!(classify(&v, &o).unwrap().verdicts[2].verdict, VerdictKind::Singular);
    }

    #[test]
    fn non_primitive_refused() {
        let g = AbelianGroup::cyclic(2);
        let w = SpinMatrix::from_residues(&g, &[vec![vec![0], vec![0]], vec![vec![0], vec![0]]]).unwrap();
        let s = SpinSystem::new(DigitSystem::standard_1d(2).unwrap(), g, w).unwrap();
        assert!(matches!(classify(&s, &quick(1)), Err(Error::NonPrimitive(_))));
    }

    #[test]
    fn n_max_rule() {
        assert_eq!(default_n_max(2, 1, 1 << 16), 15);
        assert_eq!(default_n_max(3, 1, 1 << 16), 9);
        assert_eq!(default_n_max(2, 2, 1 << 10), 16);
    }
}
