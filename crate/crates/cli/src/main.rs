//! `engine`: batch validation of problem files.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 for
//! unusable input (bad schema, malformed numbers, truncation too small).

mod commands;
mod model;
mod report;
mod schema;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tqft_algebra::exactlin::{GaussRational, Rational};

use commands::SaitoStage;
use report::RunReport;
use schema::{InputError, PolyvectorIn, ProblemFile};

#[derive(Parser)]
#[command(name = "engine", version, about = "Exact validation of transfer, TQM, commutativity, BCOV and Saito data")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FieldArg {
    /// Rationals.
    Q,
    /// Gaussian rationals.
    Qi,
}

#[derive(Args, Clone)]
struct Common {
    /// Problem file (JSON).
    #[arg(long)]
    input: PathBuf,
    /// Truncation order of the formal parameters.
    #[arg(long, default_value_t = 3)]
    order: u32,
    /// Where to write the JSON report; printed to stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "q")]
    field: FieldArg,
}

#[derive(Subcommand)]
enum Cmd {
    /// Strong deformation retract and its evolution operators.
    Sdr(Common),
    /// Homotopy transfer of operations and Maurer-Cartan elements.
    Transfer(Common),
    /// Graph amplitudes: closeness, gluing, factorization.
    Tqm(Common),
    /// Commutativity equations from a strong Hodge datum and a family.
    Commutativity(Common),
    /// Tree-level BCOV on a polyvector model.
    Bcov(Common),
    /// Saito structure for x^n.
    Saito {
        #[command(subcommand)]
        stage: SaitoCmd,
    },
    /// Writes a problem file for a built-in model.
    BuildModel {
        #[command(subcommand)]
        model: ModelCmd,
    },
}

#[derive(Subcommand)]
enum SaitoCmd {
    Milnor(Common),
    Coperators(Common),
    Gmframe(Common),
    Goodsection(Common),
}

#[derive(Subcommand)]
enum ModelCmd {
    /// Polyvector model of W′ (coefficients lowest degree first).
    Polyvector {
        #[arg(long, value_delimiter = ',', required = true)]
        w_prime: Vec<String>,
        #[arg(long)]
        cutoff: usize,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    Saito {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        search_bound: Option<u32>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

enum Failure {
    Input(InputError),
    Checks,
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e)
    }
}

fn read_problem(path: &Path, kind: &str) -> Result<ProblemFile, InputError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| InputError(format!("cannot read {}: {}", path.display(), e)))?;
    let p = schema::parse_problem(&text)?;
    if p.kind != kind {
        return Err(InputError::at("kind", format!("expected {:?} for this command, found {:?}", kind, p.kind)));
    }
    Ok(p)
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), InputError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| InputError(format!("cannot write {}: {}", p.display(), e))),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

fn only_q(c: &Common, command: &str) -> Result<(), InputError> {
    if c.field == FieldArg::Qi {
        return Err(InputError(format!("--field qi is not available for {}: the model is defined over Q", command)));
    }
    Ok(())
}

fn emit(out: RunReport, c: &Common) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(&out.to_json()).expect("report serializes") + "\n";
    if c.report.is_some() {
        print!("{}", out.summary());
    } else {
        eprint!("{}", out.summary());
    }
    write_text(c.report.as_deref(), &text)?;
    if out.passed() {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

macro_rules! generic {
    ($f:ident, $c:expr, $kind:expr) => {{
        let p = read_problem(&$c.input, $kind)?;
        match $c.field {
            FieldArg::Q => commands::$f::<Rational>(&p.payload, $c.order)?,
            FieldArg::Qi => commands::$f::<GaussRational>(&p.payload, $c.order)?,
        }
    }};
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Sdr(c) => emit(generic!(run_sdr, c, "sdr"), &c),
        Cmd::Transfer(c) => emit(generic!(run_transfer, c, "transfer"), &c),
        Cmd::Tqm(c) => emit(generic!(run_tqm, c, "tqm"), &c),
        Cmd::Commutativity(c) => emit(generic!(run_commutativity, c, "commutativity"), &c),
        Cmd::Bcov(c) => {
            only_q(&c, "bcov")?;
            let p = read_problem(&c.input, "bcov")?;
            emit(commands::run_bcov(&p.payload, c.order)?, &c)
        }
        Cmd::Saito { stage } => {
            let (c, stage) = match stage {
                SaitoCmd::Milnor(c) => (c, SaitoStage::Milnor),
                SaitoCmd::Coperators(c) => (c, SaitoStage::Coperators),
                SaitoCmd::Gmframe(c) => (c, SaitoStage::Gmframe),
                SaitoCmd::Goodsection(c) => (c, SaitoStage::Goodsection),
            };
            only_q(&c, "saito")?;
            let p = read_problem(&c.input, "saito")?;
            emit(commands::run_saito(&p.payload, c.order, stage)?, &c)
        }
        Cmd::BuildModel { model } => {
            let (file, output) = match model {
                ModelCmd::Polyvector { w_prime, cutoff, window, output } => {
                    (model::polyvector_problem(&PolyvectorIn { w_prime, cutoff, window })?, output)
                }
                ModelCmd::Saito { n, search_bound, output } => (model::saito_problem(n, search_bound)?, output),
            };
            let text = serde_json::to_string_pretty(&file).expect("problem serializes") + "\n";
            // the written file must parse back into a valid payload
            let back = schema::parse_problem(&text)?;
            match back.kind.as_str() {
                "commutativity" => {
                    schema::payload::<schema::CommutativityPayload>(&back.payload)?;
                }
                _ => {
                    schema::payload::<schema::SaitoPayload>(&back.payload)?;
                }
            }
            write_text(output.as_deref(), &text)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Input(e)) => {
            eprintln!("error: {}", e);
            if e.0.contains("truncation overflow") {
                eprintln!("hint: increase the window or the order (--order) and rerun");
            }
            ExitCode::from(2)
        }
    }
}
