//! Table and record renderings. Record lines are tab-separated with the kind
//! in the first field and floats in `{:.16e}`.

use num_complex::Complex64;

use multispec::catalog::CatalogEntry;
use multispec::expr::format_complex;
use multispec::families::{FiberCell, FiberOutcome};
use multispec::forms::ProjectivePoint;
use multispec::map::RationalMap;
use multispec::pcf::{ClassificationResult, ClassificationStatus, OrbitFate};
use multispec::spectrum::{DisjointType, LengthSpectrum, MultiplierSpectrum};

pub struct Out {
    record: bool,
}

/// Rounds to 12 significant digits and clears parts negligible next to the
/// modulus, for display only.
fn tidy(x: f64, scale: f64) -> f64 {
    if x.abs() <= 1e-12 * scale.max(1.0) {
        return 0.0;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn pretty(c: Complex64) -> String {
    let s = c.norm();
    format_complex(Complex64::new(tidy(c.re, s), tidy(c.im, s)))
}

fn pretty_real(x: f64) -> String {
    format_complex(Complex64::new(tidy(x, x.abs()), 0.0))
}

/// Record rendering of a float; negative zero prints as zero.
fn num(x: f64) -> String {
    format!("{:.16e}", x + 0.0)
}

fn point_fields(p: &ProjectivePoint) -> String {
    match p.affine() {
        Some(z) => format!("{}\t{}", num(z.re), num(z.im)),
        None => "inf\tinf".to_string(),
    }
}

fn point_text(p: &ProjectivePoint) -> String {
    match p.affine() {
        Some(z) => pretty(z),
        None => "inf".to_string(),
    }
}

fn periods_text(p: &[u32]) -> String {
    p.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

fn status_fields(s: &ClassificationStatus) -> (&'static str, String) {
    match s {
        ClassificationStatus::DisjointType(p) => ("DisjointType", periods_text(p)),
        ClassificationStatus::PcfNotDisjoint => ("PcfNotDisjoint", "-".into()),
        ClassificationStatus::NotPcfWithinBudget => ("NotPcfWithinBudget", "-".into()),
    }
}

fn fate_fields(f: &OrbitFate) -> (&'static str, String, String) {
    let dash = || "-".to_string();
    match *f {
        OrbitFate::Periodic { cycle } => ("periodic", cycle.to_string(), "0".into()),
        OrbitFate::Preperiodic { cycle, steps } => ("preperiodic", cycle.to_string(), steps.to_string()),
        OrbitFate::Attracted { cycle, steps } => ("attracted", cycle.to_string(), steps.to_string()),
        OrbitFate::Unresolved => ("unresolved", dash(), dash()),
    }
}

impl Out {
    pub fn new(record: bool) -> Self {
        Out { record }
    }

    pub fn spectrum(&mut self, s: &MultiplierSpectrum) {
        for (i, level) in s.levels.iter().enumerate() {
            let n = i + 1;
            if self.record {
                for (k, e) in level.iter().enumerate() {
                    println!("S\t{n}\t{}\t{}\t{}", k + 1, num(e.re), num(e.im));
                }
            } else {
                let items: Vec<String> = level.iter().map(|&e| pretty(e)).collect();
                println!("S_{n} = ({})", items.join(", "));
            }
        }
    }

    pub fn length_spectrum(&mut self, s: &LengthSpectrum) {
        for (i, level) in s.levels.iter().enumerate() {
            let n = i + 1;
            if self.record {
                for (k, e) in level.iter().enumerate() {
                    println!("L\t{n}\t{}\t{}", k + 1, num(*e));
                }
            } else {
                let items: Vec<String> = level.iter().map(|&e| pretty_real(e)).collect();
                println!("L_{n} = ({})", items.join(", "));
            }
        }
    }

    pub fn comparison(&mut self, equal: bool, distance: f64) {
        let word = if equal { "equal" } else { "unequal" };
        if self.record {
            println!("compare\t{word}\t{}", num(distance));
        } else {
            println!("{word} (distance {distance:.3e})");
        }
    }

    pub fn map(&mut self, role: &str, f: &RationalMap) {
        if self.record {
            println!("map\t{role}\t{f}");
        } else if matches!(role, "f" | "g" | "witness") {
            println!("{role}: {f}");
        } else {
            println!("{f}");
        }
    }

    pub fn classification(&mut self, r: &ClassificationResult) {
        let (status, periods) = status_fields(&r.status);
        if self.record {
            println!("status\t{status}\t{periods}");
        } else if let ClassificationStatus::DisjointType(p) = &r.status {
            let items: Vec<String> = p.iter().map(u32::to_string).collect();
            println!("status: DisjointType {{{}}}", items.join(", "));
        } else {
            println!("status: {status}");
        }
        for (i, c) in r.cycles.iter().enumerate() {
            if self.record {
                println!(
                    "cycle\t{i}\t{}\t{}\t{}\t{}\t{}",
                    c.exact_period,
                    point_fields(&c.representative),
                    num(c.multiplier.re),
                    num(c.multiplier.im),
                    c.contains_critical
                );
            } else {
                println!(
                    "cycle {i}: period {} through {}, multiplier {}{}",
                    c.exact_period,
                    point_text(&c.representative),
                    pretty(c.multiplier),
                    if c.contains_critical { ", superattracting" } else { "" }
                );
            }
        }
        for (i, o) in r.evidence.iter().enumerate() {
            let (fate, cycle, steps) = fate_fields(&o.fate);
            if self.record {
                println!(
                    "critical\t{i}\t{}\t{}\t{fate}\t{cycle}\t{steps}",
                    point_fields(&o.point),
                    o.multiplicity
                );
            } else {
                let tail = match o.fate {
                    OrbitFate::Unresolved => String::new(),
                    _ => format!(" cycle {cycle} after {steps} steps"),
                };
                println!(
                    "critical {} (multiplicity {}): {fate}{tail}",
                    point_text(&o.point),
                    o.multiplicity
                );
            }
        }
    }

    pub fn spectrum_type(&mut self, t: &DisjointType) {
        if self.record {
            let p = if t.periods.is_empty() { "-".into() } else { periods_text(&t.periods) };
            println!("spectrum_type\t{p}\t{}", t.complete);
        } else {
            let items: Vec<String> = t.periods.iter().map(u32::to_string).collect();
            let note = if t.complete { "" } else { " (incomplete)" };
            println!("from spectrum: {{{}}}{note}", items.join(", "));
        }
    }

    pub fn added(&mut self, id: &str, digest: &str) {
        if self.record {
            println!("added\t{id}\t{digest}");
        } else {
            println!("added {id} (digest {digest})");
        }
    }

    pub fn hits(&mut self, digest: &str, entries: &[CatalogEntry]) {
        if !self.record {
            println!("digest {digest}: {} hit(s)", entries.len());
        }
        for e in entries {
            if self.record {
                println!("hit\t{}\t{}\t{}", e.id, e.digest, e.map_text);
            } else {
                println!("  {}  {}", e.id, e.map_text);
            }
        }
    }

    pub fn groups(&mut self, groups: &[Vec<CatalogEntry>]) {
        if !self.record {
            println!("{} collision group(s)", groups.len());
        }
        for (i, g) in groups.iter().enumerate() {
            if !self.record {
                println!("group {i}: digest {} degree {} max_period {}", g[0].digest, g[0].degree, g[0].max_period);
            }
            for e in g {
                if self.record {
                    println!("group\t{i}\t{}\t{}\t{}", e.id, e.digest, e.map_text);
                } else {
                    println!("  {}  {}", e.id, e.map_text);
                }
            }
        }
    }
}

/// Columns: row, col, sigma1, sigma2, sigma3 (real parts; the grid is real),
/// status (ok, degenerate, failed), round-trip error (empty unless ok).
pub fn fiber_csv(cells: &[FiberCell]) {
    println!("row,col,sigma1,sigma2,sigma3,status,error");
    for c in cells {
        let (status, err) = match c.outcome {
            FiberOutcome::RoundTrip(e) => ("ok", num(e)),
            FiberOutcome::Degenerate(_) => ("degenerate", String::new()),
            FiberOutcome::Failed(_) => ("failed", String::new()),
        };
        println!(
            "{},{},{},{},{},{status},{err}",
            c.row,
            c.col,
            num(c.sigma.sigma1.re),
            num(c.sigma.sigma2.re),
            num(c.sigma.sigma3.re)
        );
    }
}
