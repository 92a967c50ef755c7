mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use multispec::catalog::{self, CatalogEntry};
use multispec::error::Error;
use multispec::expr::parse_complex;
use multispec::families::{self, LattesParams};
use multispec::map::RationalMap;
use multispec::pcf;
use multispec::rootfind::RootConfig;
use multispec::spectrum::{self, SpectrumConfig};

use output::Out;

#[derive(Parser)]
#[command(name = "multispec", version, about = "Multiplier spectra of rational maps of the projective line")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Record,
}

#[derive(Args, Clone, Debug)]
struct Common {
    /// Largest period n; levels 1..=n are computed.
    #[arg(long, global = true, default_value_t = 2)]
    max_period: u32,
    /// Equality tolerance for spectrum comparison.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// Fingerprint quantum.
    #[arg(long, global = true, default_value_t = 1e-6)]
    quantum: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Cap on the number of periodic points d^n + 1.
    #[arg(long, global = true, default_value_t = 2000)]
    max_roots: usize,
    #[arg(long, global = true, default_value_t = 1e-10)]
    residual_tol: f64,
    #[arg(long, global = true, default_value_t = 1e-7)]
    cluster_radius: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Print S_1..S_n (and L_1..L_n with --length).
    Spectrum {
        map: String,
        #[arg(long)]
        length: bool,
    },
    /// Compare two spectra; exit 0 if equal within --tol, 1 otherwise.
    Compare {
        map1: String,
        map2: String,
    },
    /// Print maps from the named families.
    Generate {
        #[command(subcommand)]
        family: Family,
    },
    /// Critical-orbit classification.
    Classify {
        map: String,
        /// Also read the periods off the zero multipliers of the spectrum.
        #[arg(long)]
        from_spectrum: bool,
    },
    /// Round trip of the quadratic fixed-point multiplier coordinates over a
    /// grid; CSV on stdout, summary on stderr.
    FiberScan {
        #[arg(long, default_value_t = 2)]
        degree: usize,
        #[arg(long, default_value_t = 20)]
        grid: usize,
        #[arg(long = "box", default_value_t = 2.0)]
        radius: f64,
    },
    /// Fingerprint store.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Subcommand)]
enum Family {
    Lattes {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
    },
    Elemtrans {
        #[arg(long)]
        h1: String,
        #[arg(long)]
        h2: String,
    },
    Milnor {
        #[arg(long, allow_hyphen_values = true)]
        l1: String,
        #[arg(long, allow_hyphen_values = true)]
        l2: String,
    },
    Power {
        #[arg(long)]
        degree: usize,
    },
    Random {
        #[arg(long)]
        degree: usize,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    Add {
        map: String,
        #[arg(long)]
        store: PathBuf,
        #[arg(long = "tag")]
        tags: Vec<String>,
    },
    Query {
        map: String,
        #[arg(long)]
        store: PathBuf,
    },
    Scan {
        #[arg(long)]
        store: PathBuf,
    },
}

/// A failure carrying its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_numerical() { 3 } else { 2 },
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

impl Common {
    fn config(&self) -> Result<SpectrumConfig, Failure> {
        if self.max_period < 1 {
            return Err(usage("--max-period must be at least 1"));
        }
        for (name, v) in [
            ("--tol", self.tol),
            ("--quantum", self.quantum),
            ("--residual-tol", self.residual_tol),
            ("--cluster-radius", self.cluster_radius),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(usage(format!("{name} must be positive")));
            }
        }
        Ok(SpectrumConfig {
            roots: RootConfig {
                residual_tol: self.residual_tol,
                cluster_radius: self.cluster_radius,
                ..RootConfig::default()
            },
            max_roots: self.max_roots,
        })
    }

    fn out(&self) -> Out {
        Out::new(self.format == Format::Record)
    }
}

fn parse_map(text: &str) -> Result<RationalMap, Failure> {
    Ok(RationalMap::parse(text)?)
}

fn complex_arg(name: &str, text: &str) -> Result<Complex64, Failure> {
    parse_complex(text).map_err(|e| usage(format!("{name}: {e}")))
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let common = cli.common;
    match cli.command {
        Command::Spectrum { map, length } => {
            let cfg = common.config()?;
            let f = parse_map(&map)?;
            let (s, l) = spectrum::spectra(&f, common.max_period, &cfg)?;
            let mut out = common.out();
            out.spectrum(&s);
            if length {
                out.length_spectrum(&l);
            }
            Ok(0)
        }
        Command::Compare { map1, map2 } => {
            let cfg = common.config()?;
            let f = parse_map(&map1)?;
            let g = parse_map(&map2)?;
            if f.degree() != g.degree() {
                return Err(usage(format!("degrees differ: {} vs {}", f.degree(), g.degree())));
            }
            let a = spectrum::spectrum(&f, common.max_period, &cfg)?;
            let b = spectrum::spectrum(&g, common.max_period, &cfg)?;
            let (equal, distance) = spectrum::compare_spectra(&a, &b, common.tol)?;
            common.out().comparison(equal, distance);
            Ok(if equal { 0 } else { 1 })
        }
        Command::Generate { family } => {
            let mut out = common.out();
            match family {
                Family::Lattes { a, b } => {
                    let p = LattesParams::new(complex_arg("--a", &a)?, complex_arg("--b", &b)?);
                    out.map("lattes", &families::lattes_mult2(&p)?);
                }
                Family::Elemtrans { h1, h2 } => {
                    let pair = families::elementary_transform(&parse_map(&h1)?, &parse_map(&h2)?)?;
                    out.map("f", &pair.f);
                    out.map("g", &pair.g);
                    out.map("witness", &pair.witness);
                }
                Family::Milnor { l1, l2 } => {
                    let f = families::milnor_quadratic(complex_arg("--l1", &l1)?, complex_arg("--l2", &l2)?)?;
                    out.map("milnor", &f);
                }
                Family::Power { degree } => out.map("power", &families::power_map(degree)?),
                Family::Random { degree } => out.map("random", &families::random_map(degree, common.seed)?),
            }
            Ok(0)
        }
        Command::Classify { map, from_spectrum } => {
            let cfg = common.config()?;
            let f = parse_map(&map)?;
            let result = pcf::classify_disjoint_type(&f, common.max_period)?;
            let mut out = common.out();
            out.classification(&result);
            if from_spectrum {
                let s = spectrum::spectrum(&f, common.max_period, &cfg)?;
                let t = spectrum::disjoint_type_from_spectrum(&s, f.degree())?;
                out.spectrum_type(&t);
            }
            Ok(0)
        }
        Command::FiberScan { degree, grid, radius } => {
            let cfg = common.config()?;
            if degree != 2 {
                return Err(usage(format!("fiber scan supports degree 2 only, got {degree}")));
            }
            if grid == 0 || !(radius > 0.0 && radius.is_finite()) {
                return Err(usage("--grid and --box must be positive"));
            }
            let cells = families::fiber_scan(grid, radius, &cfg);
            let summary = families::summarize_fiber(&cells);
            output::fiber_csv(&cells);
            eprintln!(
                "cells={} realizable={} degenerate={} failed={} worst_error={:.16e}",
                summary.cells, summary.realizable, summary.degenerate, summary.failed, summary.worst_error
            );
            Ok(0)
        }
        Command::Catalog { action } => {
            let cfg = common.config()?;
            let mut out = common.out();
            match action {
                CatalogAction::Add { map, store, tags } => {
                    parse_map(&map)?;
                    let entry = CatalogEntry::compute(&map, common.max_period, common.quantum, &cfg, tags)?;
                    let id = catalog::catalog_add(&store, &entry)?;
                    out.added(&id, &entry.digest);
                }
                CatalogAction::Query { map, store } => {
                    let f = parse_map(&map)?;
                    let s = spectrum::spectrum(&f, common.max_period, &cfg)?;
                    let fp = spectrum::fingerprint(&s, common.quantum);
                    let listing = catalog::catalog_query(&store, &fp)?;
                    report_corrupt(&listing.corrupt);
                    out.hits(&fp.digest_hex(), &listing.entries);
                }
                CatalogAction::Scan { store } => {
                    let c = catalog::catalog_scan_collisions(&store)?;
                    report_corrupt(&c.corrupt);
                    out.groups(&c.groups);
                }
            }
            Ok(0)
        }
    }
}

fn report_corrupt(errors: &[Error]) {
    for e in errors {
        eprintln!("skipped: {e}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
