use std::fs;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use branchcov::classify::{classify, verify_theorems_with};
use branchcov::oracle::{oracle_classify, DEFAULT_BUDGET};
use branchcov::partition::{algebraic_factorizations, enumerate_minimal_data};
use branchcov::realization::{
    realize_decomposable, realize_indecomposable, verify_witness, RealizationWitness, DEFAULT_DECOMPOSABLE_BUDGET,
};
use branchcov::{BranchDatum, Error, Partition};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

const EXIT_IO: u8 = 1;
const EXIT_HYPOTHESIS: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

/// Realizability and decomposability of branch data for self-coverings of
/// the projective plane.
#[derive(Parser)]
#[command(name = "branchcov", version)]
struct Cli {
    /// Worker threads for exhaustive searches.
    #[arg(long, global = true, env = "BRANCHCOV_THREADS")]
    threads: Option<usize>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide which kinds of realization a minimal-defect datum admits.
    Classify(DatumArgs),
    /// Build primitive and imprimitive realizations where they exist.
    Realize {
        #[command(flatten)]
        datum: DatumArgs,
        /// Tuple budget for the imprimitive search.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        budget: Option<u64>,
    },
    /// List the algebraic factorizations of a datum, one per line.
    Factorize {
        #[command(flatten)]
        datum: DatumArgs,
        /// Keep only factorizations with this `u`.
        #[arg(long)]
        u: Option<usize>,
        /// Keep only factorizations with this `w`.
        #[arg(long)]
        w: Option<usize>,
    },
    /// List every minimal-defect datum of degree `d` with `k` partitions.
    Enumerate {
        #[arg(short)]
        d: usize,
        #[arg(short)]
        k: usize,
        /// Skip this many data first.
        #[arg(long, default_value_t = 0)]
        skip: usize,
    },
    /// Exhaustively search all realizations of a datum.
    Oracle {
        #[command(flatten)]
        datum: DatumArgs,
        #[arg(long, default_value_t = DEFAULT_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
        budget: u64,
    },
    /// Compare the classifier with the oracle over all data of a size.
    VerifyTheorems {
        #[arg(short)]
        d: usize,
        #[arg(short)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
        budget: u64,
        /// Resume after this many data.
        #[arg(long, default_value_t = 0)]
        skip: usize,
    },
    /// Re-check a witness, or every witness in a `realize` report.
    VerifyWitness {
        /// JSON file, or `-` for standard input.
        #[arg(long)]
        file: PathBuf,
    },
}

#[derive(Args)]
struct DatumArgs {
    /// Degree; inferred from the partitions when omitted.
    #[arg(short)]
    d: Option<usize>,
    /// Partitions separated by semicolons, e.g. "[6,1,1,1];[2,2,2,1,1,1]".
    #[arg(short, conflicts_with = "file")]
    p: Option<String>,
    /// JSON datum `{"d": .., "partitions": [..]}`.
    #[arg(long)]
    file: Option<PathBuf>,
}

enum Failure {
    Io(String),
    Hypothesis(String),
    Partial(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Hypothesis(_) => Failure::Hypothesis(e.to_string()),
            Error::SearchExhausted(_) | Error::BudgetExceeded(_) => Failure::Partial(e.to_string()),
            _ => Failure::Io(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn read_source(path: &PathBuf) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

impl DatumArgs {
    fn load(&self) -> Result<BranchDatum, Failure> {
        if let Some(path) = &self.file {
            let datum: BranchDatum = serde_json::from_str(&read_source(path)?)?;
            if let Some(d) = self.d {
                if d != datum.degree() {
                    return Err(Error::DegreeMismatch(d, datum.degree()).into());
                }
            }
            return Ok(datum);
        }
        let Some(inline) = &self.p else {
            return Err(Failure::Io("a datum is required: pass -p or --file".into()));
        };
        let parts: Vec<Partition> =
            inline.split(';').filter(|s| !s.trim().is_empty()).map(|s| s.trim().parse()).collect::<Result<_, _>>()?;
        let d = match (self.d, parts.first()) {
            (Some(d), _) => d,
            (None, Some(p)) => p.degree(),
            (None, None) => return Err(Failure::Io("no partitions given".into())),
        };
        Ok(BranchDatum::new(d, parts)?)
    }
}

fn line(out: &mut dyn Write, v: &Value) -> Outcome {
    serde_json::to_writer(&mut *out, v)?;
    writeln!(out)?;
    Ok(())
}

fn with_datum(datum: &BranchDatum, body: Value) -> Value {
    let mut obj = serde_json::Map::new();
    obj.insert("datum".into(), json!(datum));
    if let Value::Object(rest) = body {
        obj.extend(rest);
    }
    Value::Object(obj)
}

fn run(cmd: Command, out: &mut dyn Write) -> Outcome {
    match cmd {
        Command::Classify(args) => {
            let datum = args.load()?;
            let c = classify(&datum)?;
            line(out, &with_datum(&datum, json!(c)))
        }
        Command::Realize { datum, budget } => {
            let datum = datum.load()?;
            let c = classify(&datum)?;
            let indecomposable = if c.indecomposable_realizable { Some(realize_indecomposable(&datum)?) } else { None };
            let decomposable = match &c.factorization {
                Some(f) => Some(realize_decomposable(&datum, f, budget.unwrap_or(DEFAULT_DECOMPOSABLE_BUDGET))?),
                None => None,
            };
            line(out, &json!({ "datum": datum, "indecomposable": indecomposable, "decomposable": decomposable }))
        }
        Command::Factorize { datum, u, w } => {
            let datum = datum.load()?;
            for f in algebraic_factorizations(&datum)? {
                if u.is_some_and(|u| u != f.u) || w.is_some_and(|w| w != f.w) {
                    continue;
                }
                line(out, &json!(f))?;
            }
            Ok(())
        }
        Command::Enumerate { d, k, skip } => {
            for datum in enumerate_minimal_data(d, k)?.skip(skip) {
                line(out, &json!(datum))?;
            }
            Ok(())
        }
        Command::Oracle { datum, budget } => {
            let datum = datum.load()?;
            datum.require_minimal_defect()?;
            let r = oracle_classify(&datum, budget)?;
            line(out, &with_datum(&datum, json!(r)))?;
            if r.complete {
                Ok(())
            } else {
                Err(Failure::Partial(format!(
                    "oracle stopped after {} of {} tuples",
                    r.tuples_examined, r.tuples_total
                )))
            }
        }
        Command::VerifyTheorems { d, k, budget, skip } => {
            let mut write_err = None;
            let report = verify_theorems_with(d, k, budget, skip, |l| {
                if write_err.is_none() {
                    write_err = line(out, &json!(l)).err();
                }
            })?;
            if let Some(e) = write_err {
                return Err(e);
            }
            let summary = json!({ "summary": {
                "d": d,
                "k": k,
                "data": report.data,
                "skipped": report.skipped,
                "discrepancies": report.discrepancies.len(),
                "partial": report.partial.len(),
            }});
            line(out, &summary)?;
            if report.partial.is_empty() {
                Ok(())
            } else {
                Err(Failure::Partial(format!("{} data stopped at the budget", report.partial.len())))
            }
        }
        Command::VerifyWitness { file } => {
            let v: Value = serde_json::from_str(&read_source(&file)?)?;
            let witnesses: Vec<Value> = if v.get("alphas").is_some() {
                vec![v]
            } else {
                ["indecomposable", "decomposable"]
                    .iter()
                    .filter_map(|k| v.get(*k))
                    .filter(|w| !w.is_null())
                    .cloned()
                    .collect()
            };
            if witnesses.is_empty() {
                return Err(Failure::Io("no witness found in input".into()));
            }
            let mut failed = 0;
            for w in witnesses {
                let w: RealizationWitness = serde_json::from_value(w)?;
                let report = verify_witness(&w);
                if !report.ok {
                    failed += 1;
                }
                line(out, &json!(report))?;
            }
            if failed == 0 {
                Ok(())
            } else {
                Err(Failure::Hypothesis(format!("{failed} witness(es) failed verification")))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_IO);
        }
    }
    let mut out: Box<dyn Write> = match &cli.out {
        Some(path) => match fs::File::create(path) {
            Ok(f) => Box::new(BufWriter::new(f)),
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(EXIT_IO);
            }
        },
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let result = run(cli.command, &mut *out).and_then(|()| out.flush().map_err(Failure::from));
    drop(out);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_IO)
        }
        Err(Failure::Hypothesis(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_HYPOTHESIS)
        }
        Err(Failure::Partial(m)) => {
            eprintln!("partial: {m}");
            ExitCode::from(EXIT_PARTIAL)
        }
    }
}
