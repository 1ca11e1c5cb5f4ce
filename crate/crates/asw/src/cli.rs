//! Command-line front end: `h1`, `cover`, `sheaf`, `selftest`.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::cover::{compute_h1_from_hw, tower_from_basis, CoverTower, H1EtBasis};
use crate::error::{AswError, Result};
use crate::field::DEFAULT_SEED;
use crate::fixtures;
use crate::io::{load, CohomologyReport, CoverReport, SheafJson};
use crate::sheaf::{compute_cohomology_complex, cover_group, verify_crossed_law, CohomologyComplex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "asw", about = "Etale Z/p^n cohomology of curves via Artin-Schreier-Witt theory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Curve description (JSON).
    #[arg(long, global = true)]
    pub curve: Option<PathBuf>,
    /// Hasse-Witt matrix: inline `a,b;c,d`, a JSON array, or a file holding either.
    #[arg(long, global = true)]
    pub hw: Option<String>,
    /// Witt level n.
    #[arg(long, global = true, default_value_t = 1)]
    pub n: usize,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for the choice of extension-field moduli.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Cap on the degree of extension fields.
    #[arg(long, global = true)]
    pub max_degree: Option<usize>,
    #[arg(long, global = true)]
    pub verbose: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Basis of H^1_et(X, Z/p^n).
    H1,
    /// Maximal abelian etale p^n-cover as an Artin-Schreier-Witt tower.
    Cover,
    /// Cohomology of a locally constant sheaf trivialised by Y -> Y/Gamma.
    Sheaf {
        /// Automorphism generators and module (JSON); the trivial sheaf on X when absent.
        #[arg(long)]
        sheaf: Option<PathBuf>,
    },
    /// Invariant checks on the built-in examples.
    Selftest,
}

struct Job<'a> {
    cli: &'a Cli,
    seed: u64,
}

impl Job<'_> {
    fn log(&self, msg: impl AsRef<str>) {
        if self.cli.verbose {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn load(&self) -> Result<crate::io::Loaded> {
        let path = self
            .cli
            .curve
            .as_ref()
            .ok_or_else(|| AswError::Parse("--curve is required".into()))?;
        let text = std::fs::read_to_string(path)?;
        let loaded = load(&text, self.cli.hw.as_deref(), Some(self.seed))?;
        if let Some(cap) = self.cli.max_degree {
            loaded.curve.lattice().set_max_degree(cap);
        }
        self.log(format!("curve of genus {}", loaded.curve.genus()));
        Ok(loaded)
    }

    fn level(&self) -> Result<usize> {
        if self.cli.n == 0 {
            return Err(AswError::Parse("--n must be at least 1".into()));
        }
        Ok(self.cli.n)
    }

    fn h1(&self) -> Result<(H1EtBasis, CoverReport)> {
        let loaded = self.load()?;
        let et = compute_h1_from_hw(&loaded.basis, &loaded.hasse_witt, self.level()?)?;
        self.log(format!("rank {} at level {}", et.rank(), et.level));
        for r in &et.poles {
            self.log(format!(
                "branch {} level {}: pole order {} (bound {})",
                r.branch, r.level, r.order, r.bound
            ));
        }
        et.certify()?;
        let report = CoverReport::from_basis(&et, self.seed, true, None);
        Ok((et, report))
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.cli.out {
            Some(p) => std::fs::write(p, text)?,
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
            }
        }
        Ok(())
    }

    fn run(&self) -> Result<()> {
        match &self.cli.command {
            Command::H1 => {
                let (et, report) = self.h1()?;
                match self.cli.format {
                    Format::Json => self.emit(&json(&report)?),
                    Format::Text => self.emit(&h1_text(&et)),
                }
            }
            Command::Cover => {
                let (et, _) = self.h1()?;
                let tower = tower_from_basis(&et)?;
                let report = CoverReport::from_basis(&et, self.seed, true, Some(&tower));
                match self.cli.format {
                    Format::Json => self.emit(&json(&report)?),
                    Format::Text => self.emit(&tower_text(&et, &tower)),
                }
            }
            Command::Sheaf { sheaf } => {
                let loaded = self.load()?;
                let n = self.level()?;
                let spec: SheafJson = match sheaf {
                    Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
                    None => SheafJson {
                        automorphisms: Vec::new(),
                        module: None,
                    },
                };
                let gens = spec.automorphisms(&loaded.curve)?;
                let cg = cover_group(&loaded.basis, &loaded.hasse_witt, n, &gens)?;
                self.log(format!("group of order {}", cg.group.order()));
                let module = spec.module(n as u32);
                let complex = compute_cohomology_complex(&cg.group, &module)?;
                verify_crossed_law(&cg.group, &module, &complex)?;
                let report = CohomologyReport::new(&cg, &module, &complex, self.seed);
                match self.cli.format {
                    Format::Json => self.emit(&json(&report)?),
                    Format::Text => self.emit(&sheaf_text(&complex)),
                }
            }
            Command::Selftest => {
                let results = selftest(self.seed);
                let mut text = String::new();
                let mut ok = true;
                for (name, r) in &results {
                    match r {
                        Ok(()) => text.push_str(&format!("ok   {name}\n")),
                        Err(e) => {
                            ok = false;
                            text.push_str(&format!("FAIL {name}: {e}\n"));
                        }
                    }
                }
                self.emit(&text)?;
                if ok {
                    Ok(())
                } else {
                    Err(AswError::Inconsistent("selftest failed".into()))
                }
            }
        }
    }
}

fn json<T: serde::Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn h1_text(et: &H1EtBasis) -> String {
    let mut s = format!("rank {} at level {}\n", et.rank(), et.level);
    for (i, r) in et.reps.iter().enumerate() {
        s.push_str(&format!("r{i} = {r}\n"));
    }
    s
}

/// Tower equations with integer universal parts, one branch per block.
pub fn tower_text(et: &H1EtBasis, tower: &CoverTower) -> String {
    let p = et.curve().characteristic();
    let mut s = format!(
        "rank {}, level {}, degree {}\n",
        tower.rank,
        tower.level,
        tower.degree(p)
    );
    for i in 0..tower.rank {
        s.push_str(&format!("branch {i}:\n"));
        for e in tower.branch(i) {
            s.push_str(&format!("  {}\n", e.equation_integer()));
        }
    }
    s
}

fn orders(p: u64, e: &[u32]) -> String {
    if e.is_empty() {
        return "0".into();
    }
    e.iter()
        .map(|&k| format!("Z/{}", num_bigint::BigInt::from(p).pow(k)))
        .collect::<Vec<_>>()
        .join(" + ")
}

fn sheaf_text(c: &CohomologyComplex) -> String {
    format!(
        "group order {}\nH0 = {}\nH1 = {}\n",
        c.group_order,
        orders(c.p, &c.h0),
        orders(c.p, &c.h1)
    )
}

/// Named invariant checks on the two built-in examples.
pub fn selftest(seed: u64) -> Vec<(&'static str, Result<()>)> {
    fn check(cond: bool, msg: &str) -> Result<()> {
        if cond {
            Ok(())
        } else {
            Err(AswError::Inconsistent(msg.into()))
        }
    }
    let mut out: Vec<(&'static str, Result<()>)> = Vec::new();
    out.push(("genus-two level 3", (|| {
        let fx = fixtures::genus_two(seed)?;
        let et = compute_h1_from_hw(&fx.basis, &fx.hasse_witt, 3)?;
        check(et.rank() == 1, "rank is not 1")?;
        et.certify()?;
        let tower = tower_from_basis(&et)?;
        check(
            tower.equations[1].universal_integer_string() == "-t_0^7 + t_0^5",
            "second universal part",
        )
    })()));
    out.push(("fermat-quartic level 2", (|| {
        let fx = fixtures::fermat_quartic(seed)?;
        let et = compute_h1_from_hw(&fx.basis, &fx.hasse_witt, 2)?;
        check(et.rank() == 3, "rank is not 3")?;
        et.certify()
    })()));
    out.push(("genus-two trivial sheaf level 2", (|| {
        let fx = fixtures::genus_two(seed)?;
        let cg = cover_group(&fx.basis, &fx.hasse_witt, 2, &[])?;
        let module = crate::sheaf::SheafModule::trivial(2, 0);
        let c = compute_cohomology_complex(&cg.group, &module)?;
        verify_crossed_law(&cg.group, &module, &c)?;
        check(c.h1 == vec![2], "H^1 is not Z/9")
    })()));
    out
}

/// Run with parsed arguments; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let job = Job {
        cli,
        seed: cli.seed.unwrap_or(DEFAULT_SEED),
    };
    match job.run() {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Parse `args` (including the program name) and run.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            }
        }
    }
}
