use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use solquo_core::collector::Collector;
use solquo_core::covering::l_cover;
use solquo_core::driver::{soluble_quotient, Interrupted, LayerRecord, Limits, Progress, QuotientResult};
use solquo_core::module_solver::SolverLimits;
use solquo_core::presentations::{
    parse_fp_presentation, parse_lspec, parse_pc_presentation, parse_pc_word, Definition, NormalWord, PcPresentation,
    RelationId,
};
use solquo_core::Error;

#[derive(Parser)]
#[command(name = "solquo", version, about = "Soluble quotients of finitely presented groups")]
struct Cli {
    /// Worker threads for the parallel stages
    #[arg(long, global = true, env = "SOLQUO_THREADS")]
    threads: Option<usize>,

    /// Output format
    #[arg(long, global = true, value_enum, default_value = "text", env = "SOLQUO_FORMAT")]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(clap::Args)]
struct Ceilings {
    /// Largest group order the run may reach, or "none"
    #[arg(long, default_value = "1000000000", value_parser = parse_order_ceiling, env = "SOLQUO_MAX_ORDER")]
    max_order: OrderCeiling,

    /// Largest module dimension per step
    #[arg(long, default_value_t = 4096, env = "SOLQUO_MAX_DIM")]
    max_dim: usize,

    /// Largest number of solver columns
    #[arg(long, default_value_t = 1 << 24, env = "SOLQUO_MAX_COLUMNS")]
    max_columns: usize,

    /// Largest head quotient that is enumerated
    #[arg(long, default_value_t = 1_000_000, env = "SOLQUO_MAX_ENUMERATION")]
    max_enumeration: u64,
}

#[derive(Clone, Copy)]
struct OrderCeiling(Option<u128>);

fn parse_order_ceiling(s: &str) -> Result<OrderCeiling, String> {
    if s.eq_ignore_ascii_case("none") {
        return Ok(OrderCeiling(None));
    }
    s.parse().map(|n| OrderCeiling(Some(n))).map_err(|e| format!("{e}"))
}

impl Ceilings {
    fn limits(&self) -> Limits {
        Limits {
            max_order: self.max_order.0,
            enumeration: self.max_enumeration,
            solver: SolverLimits {
                max_dim: self.max_dim,
                max_columns: self.max_columns,
            },
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute the soluble quotient of a finite presentation
    Run {
        file: PathBuf,
        /// Series such as "[(2,1),(3,1),(2,1)]"
        #[arg(long, env = "SOLQUO_SERIES")]
        series: String,
        /// Report every step on stderr
        #[arg(long, env = "SOLQUO_PROGRESS")]
        progress: bool,
        #[command(flatten)]
        ceilings: Ceilings,
    },
    /// Test a power-conjugate presentation for consistency
    Check { file: PathBuf },
    /// Collect a word to normal form
    Collect { file: PathBuf, word: String },
    /// Compute the covering group for a prime
    Cover {
        file: PathBuf,
        #[arg(long)]
        prime: u32,
        #[command(flatten)]
        ceilings: Ceilings,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse(_) | Error::InvalidPresentation(_) | Error::InvalidSeries(_) => 1,
            Error::InvalidEpimorphism(_) | Error::MissingImage(_) => 2,
            Error::CeilingExceeded(..) => 3,
            Error::Inconsistent { .. } => 4,
            _ => 5,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: 1,
        message: format!("cannot read {}: {e}", path.display()),
    })
}

#[derive(Serialize)]
struct Relation {
    lhs: String,
    rhs: String,
    definition: bool,
}

#[derive(Serialize)]
struct Layer {
    prime: u32,
    pair: usize,
    class: usize,
    rank: usize,
    dimension: usize,
    order: String,
}

#[derive(Serialize)]
struct Document {
    order: String,
    factorization: Vec<(u32, u32)>,
    generators: Vec<String>,
    primes: Vec<u32>,
    relations: Vec<Relation>,
    weights: Vec<(usize, usize)>,
    definitions: Vec<Option<String>>,
    images: Vec<String>,
    layer_log: Vec<Layer>,
    #[serde(skip_serializing_if = "Option::is_none")]
    achieved: Option<Vec<(u32, usize)>>,
}

fn order_string(pc: &PcPresentation) -> String {
    solquo_core::collector::order_of(pc).to_string()
}

fn factorization_string(f: &[(u32, u32)]) -> String {
    if f.is_empty() {
        return "1".into();
    }
    f.iter()
        .map(|&(p, e)| if e == 1 { p.to_string() } else { format!("{p}^{e}") })
        .collect::<Vec<_>>()
        .join(" * ")
}

fn definition_string(pc: &PcPresentation, d: &Option<Definition>) -> Option<String> {
    d.map(|d| match d {
        Definition::Relation(rel) => rel.display(pc.names(), pc.primes()),
        Definition::Image(g) => format!("image of generator {}", g + 1),
    })
}

fn document(pc: &PcPresentation, images: &[NormalWord], log: &[LayerRecord]) -> Document {
    let relations = RelationId::all(pc.len())
        .map(|rel| Relation {
            lhs: rel.display(pc.names(), pc.primes()),
            rhs: pc.rhs(rel).display(pc.names()).to_string(),
            definition: pc.is_relation_definition(rel),
        })
        .collect();
    Document {
        order: order_string(pc),
        factorization: pc.order_factorization(),
        generators: pc.names().to_vec(),
        primes: pc.primes().to_vec(),
        relations,
        weights: pc.weights().iter().map(|w| (w.pair, w.class)).collect(),
        definitions: pc.definitions().iter().map(|d| definition_string(pc, d)).collect(),
        images: images.iter().map(|w| w.display(pc.names()).to_string()).collect(),
        layer_log: log
            .iter()
            .map(|r| Layer {
                prime: r.prime,
                pair: r.pair,
                class: r.class,
                rank: r.rank,
                dimension: r.dim,
                order: r.order.to_string(),
            })
            .collect(),
        achieved: None,
    }
}

fn series_string(pairs: &[(u32, usize)]) -> String {
    let inner: Vec<String> = pairs.iter().map(|(p, c)| format!("({p},{c})")).collect();
    format!("[{}]", inner.join(","))
}

fn render_result(result: &QuotientResult, generators: &[String], format: Format) -> String {
    let pc = &result.pc;
    match format {
        Format::Structured => {
            let mut doc = document(pc, result.tau.images(), &result.layer_log);
            doc.achieved = Some(result.achieved.clone());
            serde_json::to_string_pretty(&doc).expect("document serializes") + "\n"
        }
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "order {} = {}",
                order_string(pc),
                factorization_string(&pc.order_factorization())
            );
            let _ = writeln!(out, "achieved {}", series_string(&result.achieved));
            let _ = writeln!(out, "{pc}");
            out.push_str("epimorphism\n");
            for (g, w) in generators.iter().zip(result.tau.images()) {
                let _ = writeln!(out, "  {g} -> {}", w.display(pc.names()));
            }
            out.push_str("layers\n");
            for (i, r) in result.layer_log.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "  {}: prime {}, pair {}, class {}, rank {}, dimension {}, order {}",
                    i + 1,
                    r.prime,
                    r.pair,
                    r.class,
                    r.rank,
                    r.dim,
                    r.order
                );
            }
            out
        }
    }
}

fn run(cli: &Cli) -> Result<String, Failure> {
    match &cli.command {
        Command::Run {
            file,
            series,
            progress,
            ceilings,
        } => {
            let fp = parse_fp_presentation(&read(file)?)?;
            let series = parse_lspec(series)?;
            let mut report = |p: &Progress| {
                eprintln!(
                    "step {}: prime {}, rank {}, dimension {}, order {}, {:.3}s",
                    p.step,
                    p.prime,
                    p.rank,
                    p.dim,
                    p.order,
                    p.elapsed.as_secs_f64()
                );
            };
            let hook: Option<&mut dyn FnMut(&Progress)> = if *progress { Some(&mut report) } else { None };
            match soluble_quotient(&fp, &series, &ceilings.limits(), hook) {
                Ok(result) => Ok(render_result(&result, fp.generators(), cli.format)),
                Err(Interrupted { error, partial }) => {
                    print!("{}", render_result(&partial, fp.generators(), cli.format));
                    Err(error.into())
                }
            }
        }
        Command::Check { file } => {
            let pc = parse_pc_presentation(&read(file)?)?;
            let report = Collector::new(&pc).consistency_check()?;
            let text = report.display(&pc).to_string();
            if report.passed() {
                Ok(text + "\n")
            } else {
                println!("{text}");
                Err(Error::Inconsistent {
                    failures: report.failures.len(),
                }
                .into())
            }
        }
        Command::Collect { file, word } => {
            let pc = parse_pc_presentation(&read(file)?)?;
            let w = parse_pc_word(&pc, word)?;
            let normal = Collector::new(&pc).evaluate_in_generators(&w)?;
            Ok(format!("{}\n", normal.display(pc.names())))
        }
        Command::Cover { file, prime, ceilings } => {
            let pc = parse_pc_presentation(&read(file)?)?;
            let limits = ceilings.limits();
            let cover = l_cover(&pc, *prime, limits.solver, limits.enumeration)?;
            let report = Collector::new(&cover.pc).consistency_check()?;
            if !report.passed() {
                return Err(Error::Internal(format!(
                    "covering presentation is inconsistent: {}",
                    report.display(&cover.pc)
                ))
                .into());
            }
            Ok(match cli.format {
                Format::Structured => {
                    serde_json::to_string_pretty(&document(&cover.pc, &[], &[])).expect("document serializes") + "\n"
                }
                Format::Text => format!(
                    "order {} = {}\nmodule dimension {}\n{}\n",
                    order_string(&cover.pc),
                    factorization_string(&cover.pc.order_factorization()),
                    cover.dim,
                    cover.pc
                ),
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("solquo: cannot configure {n} threads: {e}");
            return ExitCode::from(5);
        }
    }
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("solquo: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
