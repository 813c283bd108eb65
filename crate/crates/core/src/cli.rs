//! Command-line front end: end-to-end solve, fidelity check, circuit
//! rendering, brute-force baseline and unit-commitment QUBO export.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::circuit::AnsatzSpec;
use crate::error::{DvqeError, Result};
use crate::hamiltonian::IsingHamiltonian;
use crate::qubo::{build_uc_qubo, QuboProblem, UcInstance};
use crate::sampler::{
    execute_and_sample, select_solution, Histogram, Selection, SelectionConfig, SolutionReport, UcFilter,
};
use crate::streams::{stream_seed, Stream};
use crate::telegate::{verify_equivalence, TelegateMode};
use crate::topology::Topology;
use crate::trainer::{train, Ansatz, EnergyModel, TrainConfig, TrainHistory};
use crate::warm_start::{warm_start, InitConfig, InitType};

#[derive(Debug, Parser)]
#[command(name = "dvqe", version, about = "Distributed VQE simulator for QUBO problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full pipeline on a problem file.
    Solve(SolveArgs),
    /// Compare monolithic and distributed ansatz output states.
    Fidelity(FidelityArgs),
    /// Print the distributed circuit for an ansatz.
    Remap(RemapArgs),
    /// Exhaustive baseline.
    Brute(BruteArgs),
    /// Turn a unit-commitment file into a QUBO problem file.
    UcBuild(UcBuildArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Monolithic,
    Distributed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TelegateArg {
    Deferred,
    Stochastic,
}

impl From<TelegateArg> for TelegateMode {
    fn from(t: TelegateArg) -> Self {
        match t {
            TelegateArg::Deferred => TelegateMode::Deferred,
            TelegateArg::Stochastic => TelegateMode::Stochastic,
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub mode: Mode,
    #[arg(long)]
    pub problem: PathBuf,
    /// Treat the problem file as a unit-commitment instance.
    #[arg(long)]
    pub uc: bool,
    #[arg(long, default_value_t = 2)]
    pub depth: usize,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub init: u8,
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub rel_tol: f64,
    /// Compute qubits per QPU, e.g. `3,1,1`.
    #[arg(long, value_delimiter = ',')]
    pub qpus: Option<Vec<usize>>,
    #[arg(long, default_value_t = 4000)]
    pub shots: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = TelegateArg::Deferred)]
    pub telegate: TelegateArg,
    #[arg(long, default_value = "dvqe-out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub pop: usize,
    #[arg(long, default_value_t = 50)]
    pub meta_iters: usize,
    #[arg(long, default_value_t = 20)]
    pub abc_limit: usize,
}

#[derive(Debug, Args)]
pub struct FidelityArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub depth: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    pub qpus: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RemapArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub depth: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    pub qpus: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct BruteArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long)]
    pub uc: bool,
}

#[derive(Debug, Args)]
pub struct UcBuildArgs {
    #[arg(long)]
    pub uc: PathBuf,
}

/// Everything a single solver run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub problem: ProblemSource,
    pub depth: usize,
    pub init_type: InitType,
    pub train: TrainConfig,
    pub qpu_qubit_config: Option<Vec<usize>>,
    pub shots: usize,
    pub seed: u64,
    pub telegate_mode: TelegateMode,
    pub population: usize,
    pub meta_iters: usize,
    pub abc_limit: usize,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    Qubo(QuboProblem),
    Uc(UcInstance),
}

impl ProblemSource {
    pub fn load(path: &Path, uc: bool) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| DvqeError::Io(format!("reading {}: {e}", path.display())))?;
        if uc {
            Ok(Self::Uc(UcInstance::from_json(&text)?))
        } else {
            Ok(Self::Qubo(QuboProblem::from_json(&text)?))
        }
    }

    pub fn qubo(&self) -> Result<QuboProblem> {
        match self {
            Self::Qubo(p) => Ok(p.clone()),
            Self::Uc(uc) => build_uc_qubo(uc),
        }
    }
}

impl RunConfig {
    /// Defaults for everything except the problem and mode.
    pub fn new(mode: Mode, problem: ProblemSource) -> Self {
        Self {
            mode,
            problem,
            depth: 2,
            init_type: InitType::GrayWolf,
            train: TrainConfig::default(),
            qpu_qubit_config: None,
            shots: 4000,
            seed: 0,
            telegate_mode: TelegateMode::Deferred,
            population: 20,
            meta_iters: 50,
            abc_limit: 20,
            out: None,
        }
    }

    pub fn from_args(args: &SolveArgs) -> Result<Self> {
        Ok(Self {
            mode: args.mode,
            problem: ProblemSource::load(&args.problem, args.uc)?,
            depth: args.depth,
            init_type: InitType::from_code(args.init)?,
            train: TrainConfig {
                lr: args.lr,
                max_iters: args.max_iters,
                rel_tol: args.rel_tol,
                ..TrainConfig::default()
            },
            qpu_qubit_config: args.qpus.clone(),
            shots: args.shots,
            seed: args.seed,
            telegate_mode: args.telegate.into(),
            population: args.pop,
            meta_iters: args.meta_iters,
            abc_limit: args.abc_limit,
            out: Some(args.out.clone()),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub selection: Selection,
    pub theta: Vec<f64>,
    pub history: TrainHistory,
    pub histogram: Histogram,
    pub warm_start_energy: Option<f64>,
    pub history_path: Option<PathBuf>,
    pub histogram_path: Option<PathBuf>,
}

impl RunOutcome {
    pub fn converged(&self) -> bool {
        self.history.converged
    }

    pub fn iterations(&self) -> usize {
        self.history.iterations_used
    }
}

fn stage<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        DvqeError::Config(m) => DvqeError::Config(format!("{name}: {m}")),
        DvqeError::Io(m) => DvqeError::Io(format!("{name}: {m}")),
        other => other,
    })
}

/// Builds the (monolithic or distributed) ansatz for a run.
pub fn build_ansatz(cfg: &RunConfig, n: usize) -> Result<Ansatz> {
    let spec = AnsatzSpec::new(n, cfg.depth)?;
    match cfg.mode {
        Mode::Monolithic => Ok(Ansatz::monolithic(spec)),
        Mode::Distributed => {
            let config = cfg.qpu_qubit_config.as_deref().ok_or_else(|| {
                DvqeError::Config("distributed mode requires a QPU configuration (--qpus)".into())
            })?;
            let topology = Topology::for_problem(config, n)?;
            Ansatz::distributed(
                spec,
                topology,
                cfg.telegate_mode,
                stream_seed(cfg.seed, Stream::Telegate),
            )
        }
    }
}

/// QUBO → Hamiltonian → topology → warm start → ansatz → train → sample →
/// select, writing artifacts when an output directory is configured.
pub fn run_dvqe(cfg: &RunConfig) -> Result<RunOutcome> {
    let problem = stage("load", cfg.problem.qubo())?;
    let h = IsingHamiltonian::from_qubo(&problem);
    let ansatz = stage("topology", build_ansatz(cfg, problem.n()))?;
    let model = EnergyModel::new(&ansatz, &h)?;

    let init = InitConfig {
        init_type: cfg.init_type,
        population: cfg.population,
        max_iter: cfg.meta_iters,
        seed: cfg.seed,
        abc_limit: cfg.abc_limit,
    };
    let start = stage("warm start", warm_start(&model, ansatz.n_params(), &init))?;
    let (theta, history) = stage("train", train(&model, &start.theta, &cfg.train))?;

    let histogram = stage(
        "sample",
        execute_and_sample(
            &ansatz,
            &theta,
            cfg.shots,
            stream_seed(cfg.seed, Stream::Sampling),
        ),
    )?;
    let selection_cfg = SelectionConfig {
        shots: cfg.shots,
        uc_filter: match &cfg.problem {
            ProblemSource::Uc(uc) => Some(UcFilter::from_instance(uc)),
            ProblemSource::Qubo(_) => None,
        },
    };
    let selection = stage("select", select_solution(&histogram, &h, &selection_cfg))?;

    let mut outcome = RunOutcome {
        selection,
        theta,
        history,
        histogram,
        warm_start_energy: start.energy,
        history_path: None,
        histogram_path: None,
    };
    if let Some(dir) = &cfg.out {
        stage("write", write_artifacts(dir, &ansatz, &mut outcome))?;
    }
    Ok(outcome)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| DvqeError::Io(format!("writing {}: {e}", path.display())))
}

fn write_artifacts(dir: &Path, ansatz: &Ansatz, outcome: &mut RunOutcome) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| DvqeError::Io(format!("creating {}: {e}", dir.display())))?;
    let report = SolutionReport::new(&outcome.selection, outcome.histogram.shots());
    write_file(&dir.join("solution.json"), &(report.to_json() + "\n"))?;
    let hist_path = dir.join("histogram.json");
    write_file(&hist_path, &(outcome.histogram.to_json() + "\n"))?;
    let csv_path = dir.join("convergence.csv");
    write_file(&csv_path, &outcome.history.to_csv())?;
    let mut circuit = ansatz.circuit().render_text(ansatz.topology());
    for (i, t) in outcome.theta.iter().enumerate() {
        writeln!(circuit, "# theta[{i}] = {t}").unwrap();
    }
    write_file(&dir.join("circuit.txt"), &circuit)?;
    outcome.history_path = Some(csv_path);
    outcome.histogram_path = Some(hist_path);
    Ok(())
}

/// Fidelity between monolithic and distributed ansatz outputs at random θ.
pub fn run_fidelity(n: usize, depth: usize, qpus: &[usize], seed: u64) -> Result<f64> {
    let spec = AnsatzSpec::new(n, depth)?;
    let topology = Topology::for_problem(qpus, n)?;
    let theta = crate::warm_start::random_init(spec.n_params(), seed);
    verify_equivalence(spec, &topology, &theta)
}

pub fn run_brute(source: &ProblemSource) -> Result<(Vec<u8>, f64)> {
    source.qubo()?.brute_force()
}

pub fn run_remap(n: usize, depth: usize, qpus: &[usize]) -> Result<String> {
    let spec = AnsatzSpec::new(n, depth)?;
    let topology = Topology::for_problem(qpus, n)?;
    let ansatz = Ansatz::distributed(spec, topology, TelegateMode::Deferred, 0)?;
    Ok(ansatz.circuit().render_text(ansatz.topology()))
}

fn format_bits(bits: &[u8]) -> String {
    let inner: Vec<String> = bits.iter().map(u8::to_string).collect();
    format!("[{}]", inner.join(" "))
}

/// Executes a parsed command line, returning text for stdout and the process
/// exit code.
pub fn execute(cli: &Cli) -> Result<(String, i32)> {
    match &cli.command {
        Command::Solve(args) => {
            let cfg = RunConfig::from_args(args)?;
            let out = run_dvqe(&cfg)?;
            let mut text = String::new();
            writeln!(
                text,
                "solution: {} -> cost {}{}",
                format_bits(out.selection.bitstring()),
                out.selection.cost(),
                if out.selection.is_feasible() {
                    ""
                } else {
                    " (infeasible)"
                }
            )
            .unwrap();
            writeln!(
                text,
                "converged: {} after {} iterations",
                out.converged(),
                out.iterations()
            )
            .unwrap();
            writeln!(text, "artifacts: {}", args.out.display()).unwrap();
            let code = if out.selection.is_feasible() {
                0
            } else {
                DvqeError::Infeasible.exit_code()
            };
            Ok((text, code))
        }
        Command::Fidelity(args) => {
            let f = run_fidelity(args.n, args.depth, &args.qpus, args.seed)?;
            Ok((format!("{f:.12}\n"), 0))
        }
        Command::Remap(args) => Ok((run_remap(args.n, args.depth, &args.qpus)?, 0)),
        Command::Brute(args) => {
            let source = ProblemSource::load(&args.problem, args.uc)?;
            let (x, c) = run_brute(&source)?;
            Ok((format!("best: {} -> cost {c}\n", format_bits(&x)), 0))
        }
        Command::UcBuild(args) => {
            let text = fs::read_to_string(&args.uc)
                .map_err(|e| DvqeError::Io(format!("reading {}: {e}", args.uc.display())))?;
            let uc = UcInstance::from_json(&text)?;
            Ok((build_uc_qubo(&uc)?.to_json() + "\n", 0))
        }
    }
}
