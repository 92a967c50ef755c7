//! Critical-orbit analysis: superattracting cycles, disjoint-type
//! classification and semiconjugacy witnesses.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forms::{BinaryFormPair, ProjectivePoint};
use crate::map::RationalMap;
use crate::poly::{ONE, ZERO};
use crate::spectrum::{self, DisjointType, SpectrumConfig, DEFAULT_COMPARE_TOL};

/// Cycle multipliers below this modulus count as superattracting.
pub const SUPERATTRACTING_TOL: f64 = 1e-8;
/// Chordal distance at which an orbit point is taken to have returned.
pub const CYCLE_TOL: f64 = 1e-9;
/// Chordal distance under which two detected cycles are the same.
pub const DEDUP_TOL: f64 = 1e-6;
/// A critical point this close to its cycle is taken to lie on it; critical
/// points of higher multiplicity are only located to about this accuracy.
pub const ON_CYCLE_TOL: f64 = 1e-6;
/// Orbit points this far from the cycle just before entering it mark an
/// exact landing rather than an asymptotic approach.
pub const LANDING_GAP: f64 = 1e-4;
pub const EXACT_WITNESS_TOL: f64 = 1e-9;
pub const SAMPLED_WITNESS_TOL: f64 = 1e-8;
pub const WITNESS_SAMPLES: usize = 50;
const WITNESS_SEED: u64 = 0x5eed_c0de;

pub fn default_budget(max_period: u32) -> usize {
    4 * max_period as usize + 50
}

#[derive(Clone, Debug, PartialEq)]
pub struct CycleRecord {
    pub representative: ProjectivePoint,
    pub points: Vec<ProjectivePoint>,
    pub exact_period: u32,
    pub multiplier: Complex64,
    pub contains_critical: bool,
}

impl CycleRecord {
    fn distance_to(&self, pt: &ProjectivePoint) -> f64 {
        self.points.iter().map(|q| q.chordal(pt)).fold(f64::INFINITY, f64::min)
    }

    fn same_as(&self, other: &CycleRecord) -> bool {
        self.exact_period == other.exact_period && self.distance_to(&other.representative) < DEDUP_TOL
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitFate {
    /// The critical point lies on cycle `cycle`.
    Periodic { cycle: usize },
    /// Lands exactly on the cycle after `steps` iterations.
    Preperiodic { cycle: usize, steps: usize },
    /// Converges to the cycle without landing on it.
    Attracted { cycle: usize, steps: usize },
    /// No cycle of period at most `max_period` within the budget.
    Unresolved,
}

impl OrbitFate {
    pub fn cycle(&self) -> Option<usize> {
        match *self {
            OrbitFate::Periodic { cycle }
            | OrbitFate::Preperiodic { cycle, .. }
            | OrbitFate::Attracted { cycle, .. } => Some(cycle),
            OrbitFate::Unresolved => None,
        }
    }

    pub fn is_finite_orbit(&self) -> bool {
        matches!(self, OrbitFate::Periodic { .. } | OrbitFate::Preperiodic { .. })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalOrbit {
    pub point: ProjectivePoint,
    pub multiplicity: usize,
    pub fate: OrbitFate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassificationStatus {
    DisjointType(Vec<u32>),
    PcfNotDisjoint,
    NotPcfWithinBudget,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationResult {
    pub status: ClassificationStatus,
    /// Every distinct cycle reached by a critical orbit.
    pub cycles: Vec<CycleRecord>,
    pub evidence: Vec<CriticalOrbit>,
}

impl ClassificationResult {
    pub fn periods(&self) -> Option<&[u32]> {
        match &self.status {
            ClassificationStatus::DisjointType(p) => Some(p),
            _ => None,
        }
    }
}

struct Tail {
    cycle: CycleRecord,
    entry: usize,
    gap: f64,
}

fn orbit_tail(f: &RationalMap, start: ProjectivePoint, max_period: u32, budget: usize, tol: f64) -> Option<Tail> {
    let forms = f.forms();
    let mut orbit = Vec::with_capacity(budget + 1);
    orbit.push(start);
    for _ in 0..budget {
        let next = forms.eval(orbit.last().unwrap());
        if !next.is_finite_value() {
            return None;
        }
        orbit.push(next);
    }
    let last = orbit[budget];
    let p = (1..=max_period as usize)
        .take_while(|&p| p <= budget)
        .find(|&p| orbit[budget - p].chordal(&last) < CYCLE_TOL)?;
    let points: Vec<ProjectivePoint> = orbit[budget - p..budget].to_vec();
    let mut multiplier = ONE;
    for pt in &points {
        multiplier *= forms.derivative_at(pt).ok()?;
    }
    let cycle = CycleRecord {
        representative: points[0],
        points,
        exact_period: p as u32,
        multiplier,
        contains_critical: multiplier.norm() < tol,
    };
    let entry = if cycle.distance_to(&start) < ON_CYCLE_TOL {
        0
    } else {
        orbit.iter().position(|x| cycle.distance_to(x) < CYCLE_TOL).unwrap_or(budget - p)
    };
    let gap = if entry == 0 { 0.0 } else { cycle.distance_to(&orbit[entry - 1]) };
    Some(Tail { cycle, entry, gap })
}

fn critical_orbits(
    f: &RationalMap,
    max_period: u32,
    tol: f64,
) -> Result<(Vec<CycleRecord>, Vec<CriticalOrbit>)> {
    let crit = f.critical_data()?;
    let budget = default_budget(max_period);
    let tails: Vec<Option<Tail>> = crit
        .points
        .par_iter()
        .map(|(pt, _)| orbit_tail(f, *pt, max_period, budget, tol))
        .collect();
    let mut cycles: Vec<CycleRecord> = Vec::new();
    let mut evidence = Vec::with_capacity(tails.len());
    for ((pt, mult), tail) in crit.points.iter().zip(tails) {
        let fate = match tail {
            None => OrbitFate::Unresolved,
            Some(t) => {
                let idx = match cycles.iter().position(|c| c.same_as(&t.cycle)) {
                    Some(i) => i,
                    None => {
                        cycles.push(t.cycle);
                        cycles.len() - 1
                    }
                };
                if t.entry == 0 {
                    OrbitFate::Periodic { cycle: idx }
                } else if t.gap >= LANDING_GAP {
                    OrbitFate::Preperiodic { cycle: idx, steps: t.entry }
                } else {
                    OrbitFate::Attracted { cycle: idx, steps: t.entry }
                }
            }
        };
        evidence.push(CriticalOrbit {
            point: *pt,
            multiplicity: *mult,
            fate,
        });
    }
    Ok((cycles, evidence))
}

/// Superattracting cycles of exact period at most `max_period` reached by
/// some critical orbit within the default budget.
pub fn detect_superattracting_cycles(f: &RationalMap, max_period: u32, tol: f64) -> Result<Vec<CycleRecord>> {
    let (cycles, _) = critical_orbits(f, max_period, tol)?;
    Ok(cycles.into_iter().filter(|c| c.contains_critical).collect())
}

pub fn classify_disjoint_type(f: &RationalMap, max_period: u32) -> Result<ClassificationResult> {
    let (cycles, evidence) = critical_orbits(f, max_period, SUPERATTRACTING_TOL)?;
    let status = if !evidence.iter().all(|o| o.fate.is_finite_orbit()) {
        ClassificationStatus::NotPcfWithinBudget
    } else {
        let wanted = 2 * f.degree() - 2;
        let superattracting: Vec<&CycleRecord> = cycles.iter().filter(|c| c.contains_critical).collect();
        let absorbed = evidence
            .iter()
            .all(|o| o.fate.cycle().is_some_and(|i| cycles[i].contains_critical));
        if superattracting.len() == wanted && absorbed {
            let mut periods: Vec<u32> = superattracting.iter().map(|c| c.exact_period).collect();
            periods.sort_unstable();
            ClassificationStatus::DisjointType(periods)
        } else {
            ClassificationStatus::PcfNotDisjoint
        }
    };
    Ok(ClassificationResult {
        status,
        cycles,
        evidence,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessMode {
    Exact,
    Sampled,
}

fn flat(f: &BinaryFormPair) -> Vec<Complex64> {
    f.p().iter().chain(f.q()).copied().collect()
}

fn projective_coefficient_distance(a: &BinaryFormPair, b: &BinaryFormPair) -> f64 {
    if a.degree() != b.degree() {
        return f64::INFINITY;
    }
    let a = flat(&a.normalized());
    let b = flat(b);
    // scale b by its coefficient at the pivot chosen for a
    let pivot = a.iter().rposition(|&c| c == ONE);
    let Some(i) = pivot.or_else(|| a.iter().rposition(|&c| c != ZERO)) else {
        return f64::INFINITY;
    };
    if b[i] == ZERO {
        return f64::INFINITY;
    }
    let s = a[i] / b[i];
    a.iter().zip(&b).map(|(x, y)| (x - y * s).norm()).fold(0.0, f64::max)
}

/// Tests `h ∘ f = g ∘ h`, which makes the graph of `h` invariant under
/// `f × g`.
pub fn semiconjugacy_check(f: &RationalMap, g: &RationalMap, h: &BinaryFormPair, mode: WitnessMode) -> Result<bool> {
    if f.degree() != g.degree() {
        return Ok(false);
    }
    match mode {
        WitnessMode::Exact => {
            let left = h.compose(f.forms());
            let right = g.forms().compose(h);
            Ok(projective_coefficient_distance(&left, &right) <= EXACT_WITNESS_TOL)
        }
        WitnessMode::Sampled => {
            let mut rng = ChaCha8Rng::seed_from_u64(WITNESS_SEED);
            for _ in 0..WITNESS_SAMPLES {
                let z = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                let pt = ProjectivePoint::finite(z);
                let left = h.eval(&f.eval(&pt));
                let right = g.eval(&h.eval(&pt));
                if !left.is_finite_value() || !right.is_finite_value() {
                    return Ok(false);
                }
                if left.chordal(&right) > SAMPLED_WITNESS_TOL {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyReport {
    pub spectrum_distance: f64,
    pub f: ClassificationResult,
    pub g: ClassificationResult,
    /// Periods read off the zero multipliers of the common spectrum.
    pub from_spectrum: Option<DisjointType>,
    /// False only if `f` is of disjoint type and `g` is classified otherwise.
    pub consistent: bool,
}

impl ConsistencyReport {
    pub fn applicable(&self) -> bool {
        self.f.periods().is_some()
    }
}

/// Checks that a map sharing the spectrum of a disjoint-type map is
/// classified with the same periods.
pub fn cross_spectrum_pcf_consistency(
    f: &RationalMap,
    g: &RationalMap,
    max_period: u32,
    cfg: &SpectrumConfig,
) -> Result<ConsistencyReport> {
    let sf = spectrum::spectrum(f, max_period, cfg)?;
    let sg = spectrum::spectrum(g, max_period, cfg)?;
    let (equal, distance) = spectrum::compare_spectra(&sf, &sg, DEFAULT_COMPARE_TOL)?;
    if !equal {
        return Err(Error::SpectraDiffer { distance });
    }
    let cf = classify_disjoint_type(f, max_period)?;
    let cg = classify_disjoint_type(g, max_period)?;
    let from_spectrum = spectrum::disjoint_type_from_spectrum(&sf, f.degree()).ok();
    let consistent = match cf.periods() {
        Some(p) => cg.periods() == Some(p),
        None => true,
    };
    Ok(ConsistencyReport {
        spectrum_distance: distance,
        f: cf,
        g: cg,
        from_spectrum,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(text: &str) -> RationalMap {
        RationalMap::parse(text).unwrap()
    }

    fn identity() -> BinaryFormPair {
        BinaryFormPair::identity()
    }

    #[test]
    fn cycles_of_squaring() {
        let cycles = detect_superattracting_cycles(&map("z^2"), 2, SUPERATTRACTING_TOL).unwrap();
        assert_eq!(cycles.len(), 2);
        assert!(cycles.iter().all(|c| c.exact_period == 1 && c.contains_critical));
        assert!(cycles.iter().any(|c| c.representative.is_infinity()));
        assert!(cycles.iter().any(|c| c.representative.affine() == Some(ZERO)));
    }

    #[test]
    fn basilica_cycles() {
        let cycles = detect_superattracting_cycles(&map("z^2-1"), 4, SUPERATTRACTING_TOL).unwrap();
        let mut periods: Vec<u32> = cycles.iter().map(|c| c.exact_period).collect();
        periods.sort();
        assert_eq!(periods, vec![1, 2]);
        let two = cycles.iter().find(|c| c.exact_period == 2).unwrap();
        for z in [ZERO, -ONE] {
            assert!(two.distance_to(&ProjectivePoint::finite(z)) < 1e-12);
        }
    }

    #[test]
    fn escaping_critical_orbit() {
        let r = classify_disjoint_type(&map("z^2+1"), 4).unwrap();
        assert_eq!(r.status, ClassificationStatus::NotPcfWithinBudget);
        // only the fixed point at infinity is superattracting
        let sup: Vec<_> = r.cycles.iter().filter(|c| c.contains_critical).collect();
        assert_eq!(sup.len(), 1);
        assert!(sup[0].representative.is_infinity());
        assert!(r
            .evidence
            .iter()
            .any(|o| matches!(o.fate, OrbitFate::Attracted { .. })));
    }

    #[test]
    fn classifications() {
        assert_eq!(
            classify_disjoint_type(&map("z^2"), 2).unwrap().status,
            ClassificationStatus::DisjointType(vec![1, 1])
        );
        assert_eq!(
            classify_disjoint_type(&map("z^2-1"), 4).unwrap().status,
            ClassificationStatus::DisjointType(vec![1, 2])
        );
        assert_eq!(
            classify_disjoint_type(&map("z^3"), 2).unwrap().status,
            ClassificationStatus::PcfNotDisjoint
        );
    }

    #[test]
    fn preperiodic_landing() {
        // 0 -> -2 -> 2 -> 2, a repelling fixed point
        let r = classify_disjoint_type(&map("z^2-2"), 2).unwrap();
        assert_eq!(r.status, ClassificationStatus::PcfNotDisjoint);
        assert!(r
            .evidence
            .iter()
            .any(|o| matches!(o.fate, OrbitFate::Preperiodic { steps: 2, .. })));
    }

    #[test]
    fn period_larger_than_allowed() {
        // the period-2 cycle is invisible at max_period 1
        let r = classify_disjoint_type(&map("z^2-1"), 1).unwrap();
        assert_eq!(r.status, ClassificationStatus::NotPcfWithinBudget);
    }

    #[test]
    fn witnesses() {
        let f = map("z^4+1");
        let g = map("(z^2+1)^2");
        let h = map("z^2");
        for mode in [WitnessMode::Exact, WitnessMode::Sampled] {
            assert!(semiconjugacy_check(&f, &g, h.forms(), mode).unwrap());
            assert!(semiconjugacy_check(&map("z^2"), &map("z^2"), &identity(), mode).unwrap());
            assert!(!semiconjugacy_check(&map("z^2"), &map("z^2+1"), &identity(), mode).unwrap());
            assert!(!semiconjugacy_check(&g, &f, h.forms(), mode).unwrap());
        }
    }

    #[test]
    fn consistency() {
        let cfg = SpectrumConfig::default();
        let r = cross_spectrum_pcf_consistency(&map("z^2"), &map("z^2"), 2, &cfg).unwrap();
        assert!(r.consistent && r.applicable());
        assert_eq!(r.f.periods(), Some(&[1, 1][..]));
        assert_eq!(r.from_spectrum.unwrap().periods, vec![1, 1]);
        let err = cross_spectrum_pcf_consistency(&map("z^2"), &map("z^2+1"), 2, &cfg).unwrap_err();
        assert!(matches!(err, Error::SpectraDiffer { .. }));
    }
}
