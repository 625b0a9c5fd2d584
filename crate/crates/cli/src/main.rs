use blenc::cost::PolyMethod;
use blenc_cli::{exit, CliError, CompileArgs, Emit, Suite};
use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "blenc", version, about = "Cost analysis, optimization and compilation of block-encoding programs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Lcu,
    Horner,
    Qsvt,
    Gqet,
}

impl From<MethodArg> for PolyMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Lcu => PolyMethod::Lcu,
            MethodArg::Horner => PolyMethod::Horner,
            MethodArg::Qsvt => PolyMethod::Qsvt,
            MethodArg::Gqet => PolyMethod::Gqet,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitArg {
    Qasm,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Matrix,
    Algorithms,
    Chebyshev,
    All,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and type-check a program.
    Check { file: PathBuf },
    /// Print (queries, subnorm, total) and the ancilla count.
    Cost {
        file: PathBuf,
        /// Cost the optimized program.
        #[arg(long)]
        opt: bool,
        /// Force an implementation for every polynomial.
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[arg(long)]
        json: bool,
    },
    /// Print the optimized program.
    Opt {
        file: PathBuf,
        /// Print every rewrite step with its cost.
        #[arg(long)]
        trace: bool,
    },
    /// Compile to OpenQASM 2.0 or a JSON gate list.
    Compile {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "qasm")]
        emit: EmitArg,
        #[arg(long)]
        seed: Option<u64>,
        /// Keep oracles as opaque gates instead of instantiating them.
        #[arg(long)]
        opaque: bool,
        /// Compile the program as written.
        #[arg(long)]
        no_opt: bool,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        /// Write to this file instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Simulate the circuits before and after optimization.
    Verify {
        file: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Run the benchmark fixtures.
    Bench {
        #[arg(long, value_enum, default_value = "matrix")]
        suite: SuiteArg,
        /// Also time compilation of T_n(X) for 2 <= n <= 30.
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        json: bool,
    },
}

fn run(cmd: Cmd) -> Result<String, CliError> {
    use blenc_cli as c;
    match cmd {
        Cmd::Check { file } => c::check(&c::load(&file)?),
        Cmd::Cost { file, opt, method, json } => c::cost(&c::load(&file)?, opt, method.map(Into::into), json),
        Cmd::Opt { file, trace } => c::opt(&c::load(&file)?, trace),
        Cmd::Compile {
            file,
            emit,
            seed,
            opaque,
            no_opt,
            method,
            output,
        } => {
            let args = CompileArgs {
                emit: match emit {
                    EmitArg::Qasm => Emit::Qasm,
                    EmitArg::Json => Emit::Json,
                },
                seed: c::resolve_seed(seed)?,
                opaque,
                no_opt,
                method: method.map(Into::into),
            };
            let text = c::compile(&c::load(&file)?, args)?;
            match output {
                Some(p) => {
                    std::fs::write(&p, text)
                        .map_err(|e| CliError::new(exit::USAGE, format!("cannot write {}: {e}", p.display())))?;
                    Ok(String::new())
                }
                None => Ok(text),
            }
        }
        Cmd::Verify { file, seed, json } => c::verify(&c::load(&file)?, c::resolve_seed(seed)?, json),
        Cmd::Bench { suite, timing, json } => {
            let s = match suite {
                SuiteArg::Matrix => Suite::Matrix,
                SuiteArg::Algorithms => Suite::Algorithms,
                SuiteArg::Chebyshev => Suite::Chebyshev,
                SuiteArg::All => Suite::All,
            };
            c::bench(s, timing, json)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli.cmd) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            if e.code == exit::VERIFY {
                print!("{}", e.message);
            } else {
                eprintln!("error: {}", e.message);
            }
            ExitCode::from(e.code as u8)
        }
    }
}
