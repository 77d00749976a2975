use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use swingsync::io::{
    network_to_json, parse_network, parse_partition, write_trajectory_csv, FormatError,
    ProjectionFile,
};
use swingsync::simulator::recover_voltages;
use swingsync::sync::{gamma_p, synchronized_pairs, Violation, ViolationKind};
use swingsync::{
    aggregate, analyze, build_p, coarsest_equitable_refinement, compare, integrate, lift,
    project_initial, strong_sync, weak_sync, CompareMetrics, DMatrix, Error, KronSystem, Partition,
    PowerNetwork, SimConfig, SyncReport, Trajectory, DEFAULT_TOL,
};

#[derive(Parser)]
#[command(
    name = "swingsync",
    version,
    about = "Synchronization analysis and model reduction for swing-equation networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report synchronized pairs, partition verdicts and equitable refinements.
    Analyze {
        network: PathBuf,
        /// Partition file to check; may be repeated.
        #[arg(long = "partition")]
        partitions: Vec<PathBuf>,
        /// Seed partition for the coarsest equitable refinement.
        #[arg(long)]
        seed: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Aggregate a network; writes the reduced network and a
    /// `<stem>.projection.json` sidecar next to it.
    Reduce {
        network: PathBuf,
        partition: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Integrate the swing equations and write a trajectory CSV.
    Simulate {
        network: PathBuf,
        #[command(flatten)]
        sim: SimArgs,
        /// CSV path; stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Simulate the full and the reduced network and report the lifting error.
    Compare {
        network: PathBuf,
        partition: PathBuf,
        #[command(flatten)]
        sim: SimArgs,
        /// Directory for `full.csv` and `reduced.csv` (the lifted reduced
        /// trajectory).
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SimArgs {
    /// Initial rotor angles, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required = true
    )]
    delta0: Vec<f64>,
    /// Initial velocities, comma separated; zero when absent.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    omega0: Option<Vec<f64>>,
    #[arg(long, default_value_t = 10.0)]
    t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Recover bus voltage amplitudes and phases at every sample.
    #[arg(long)]
    with_voltages: bool,
}

impl SimArgs {
    fn config(&self) -> SimConfig {
        SimConfig {
            t_end: self.t_end,
            dt: self.dt,
            with_voltages: self.with_voltages,
        }
    }

    fn omega0(&self, n: usize) -> Vec<f64> {
        self.omega0.clone().unwrap_or_else(|| vec![0.0; n])
    }
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NonFiniteState { .. }
            | Error::SingularSystem(_)
            | Error::NonLaplacianResult(..)
            | Error::InvariantViolation(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

fn in_file(path: &Path) -> impl Fn(FormatError) -> CliError + '_ {
    move |e| CliError::Input(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_network(path: &Path) -> Result<PowerNetwork, CliError> {
    parse_network(&read(path)?).map_err(in_file(path))
}

fn load_partition(path: &Path, n: usize) -> Result<Partition, CliError> {
    parse_partition(&read(path)?, n).map_err(in_file(path))
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    let mut out = io::stdout().lock();
    writeln!(out, "{text}").map_err(|e| CliError::Input(format!("stdout: {e}")))
}

#[derive(Serialize)]
struct ViolationOut {
    kind: ViolationKind,
    condition: String,
    indices: Vec<usize>,
    residual: f64,
}

#[derive(Serialize)]
struct ReportOut {
    verdict: bool,
    criterion: swingsync::sync::Criterion,
    hypothesis_failed: bool,
    violations: Vec<ViolationOut>,
}

impl From<SyncReport> for ReportOut {
    fn from(r: SyncReport) -> Self {
        let hypothesis_failed = r.hypothesis_failed();
        let one_based = |v: Violation| ViolationOut {
            kind: v.kind,
            condition: v.condition,
            indices: v.indices.iter().map(|i| i + 1).collect(),
            residual: v.residual,
        };
        Self {
            verdict: r.verdict,
            criterion: r.criterion,
            hypothesis_failed,
            violations: r.violations.into_iter().map(one_based).collect(),
        }
    }
}

#[derive(Serialize)]
struct PartitionOut {
    clusters: Vec<Vec<usize>>,
    strong: ReportOut,
    weak: ReportOut,
    gamma_p: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct RefinementOut {
    seed: Vec<Vec<usize>>,
    refinement: Vec<Vec<usize>>,
}

#[derive(Serialize)]
struct AnalysisOut {
    generators: usize,
    nongen_buses: usize,
    tol: f64,
    gamma: Vec<Vec<f64>>,
    synchronized_pairs: Vec<[usize; 2]>,
    partitions: Vec<PartitionOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    refinement: Option<RefinementOut>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn cmd_analyze(
    network: &Path,
    partitions: &[PathBuf],
    seed: Option<&Path>,
    tol: f64,
) -> Result<(), CliError> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(CliError::Input(format!(
            "--tol must be positive, got {tol}"
        )));
    }
    let net = load_network(network)?;
    let n = net.generators();
    let parts = partitions
        .iter()
        .map(|p| load_partition(p, n))
        .collect::<Result<Vec<_>, _>>()?;
    let seed = seed.map(|p| load_partition(p, n)).transpose()?;
    let (_, ks) = analyze(&net)?;

    let pairs = synchronized_pairs(&net, &ks, tol)?
        .into_iter()
        .map(|(i, j)| [i + 1, j + 1])
        .collect();
    let partitions = parts
        .iter()
        .map(|part| {
            Ok(PartitionOut {
                clusters: part.to_one_based(),
                strong: strong_sync(&net, &ks, part, tol)?.into(),
                weak: weak_sync(&net, &ks, part, tol)?.into(),
                gamma_p: rows(&gamma_p(&ks, part)),
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let refinement = seed
        .map(|s| -> Result<RefinementOut, Error> {
            Ok(RefinementOut {
                seed: s.to_one_based(),
                refinement: coarsest_equitable_refinement(&ks, &net, &s, tol)?.to_one_based(),
            })
        })
        .transpose()?;
    print_json(&AnalysisOut {
        generators: n,
        nongen_buses: net.nongen_buses(),
        tol,
        gamma: rows(&ks.gamma),
        synchronized_pairs: pairs,
        partitions,
        refinement,
    })
}

fn sidecar_path(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "reduced".into());
    output.with_file_name(format!("{stem}.projection.json"))
}

fn cmd_reduce(network: &Path, partition: &Path, output: &Path) -> Result<(), CliError> {
    let net = load_network(network)?;
    let part = load_partition(partition, net.generators())?;
    let reduced = aggregate(&net, &part)?;
    let sidecar =
        serde_json::to_string_pretty(&ProjectionFile::new(&net, &part)).expect("serializable");
    write(output, (network_to_json(&reduced) + "\n").as_bytes())?;
    write(&sidecar_path(output), (sidecar + "\n").as_bytes())
}

fn simulate(
    ks: &KronSystem,
    net: &PowerNetwork,
    delta0: &[f64],
    omega0: &[f64],
    cfg: &SimConfig,
) -> Result<Trajectory, Error> {
    let mut traj = integrate(ks, net, delta0, omega0, cfg)?;
    if cfg.with_voltages {
        recover_voltages(ks, net, &mut traj)?;
    }
    Ok(traj)
}

fn csv_bytes(traj: &Trajectory) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_trajectory_csv(&mut buf, traj).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(buf)
}

fn cmd_simulate(network: &Path, sim: &SimArgs, output: Option<&Path>) -> Result<(), CliError> {
    let net = load_network(network)?;
    let (_, ks) = analyze(&net)?;
    let traj = simulate(
        &ks,
        &net,
        &sim.delta0,
        &sim.omega0(net.generators()),
        &sim.config(),
    )?;
    let bytes = csv_bytes(&traj)?;
    match output {
        Some(path) => write(path, &bytes),
        None => io::stdout()
            .lock()
            .write_all(&bytes)
            .map_err(|e| CliError::Input(format!("stdout: {e}"))),
    }
}

fn cmd_compare(
    network: &Path,
    partition: &Path,
    sim: &SimArgs,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let net = load_network(network)?;
    let part = load_partition(partition, net.generators())?;
    let (_, ks) = analyze(&net)?;
    let reduced = aggregate(&net, &part)?;
    let (_, ks_hat) = analyze(&reduced)?;
    let agg = build_p(&part);
    let cfg = sim.config();
    let omega0 = sim.omega0(net.generators());
    // Fail on bad initial state before spawning anything.
    let (d_hat, w_hat) = project_initial(&agg, &sim.delta0, &omega0)?;

    let (full, red) = std::thread::scope(|s| {
        let full = s.spawn(|| simulate(&ks, &net, &sim.delta0, &omega0, &cfg));
        let red = simulate(&ks_hat, &reduced, d_hat.as_slice(), w_hat.as_slice(), &cfg);
        (full.join().expect("simulation thread"), red)
    });
    let (full, red) = (full?, red?);
    let lifted = lift(&agg, &red)?;
    let metrics: CompareMetrics = compare(&full, &lifted)?;
    if let Some(dir) = output {
        fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
        write(&dir.join("full.csv"), &csv_bytes(&full)?)?;
        write(&dir.join("reduced.csv"), &csv_bytes(&lifted)?)?;
    }
    print_json(&metrics)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Analyze {
            network,
            partitions,
            seed,
            tol,
        } => cmd_analyze(network, partitions, seed.as_deref(), *tol),
        Command::Reduce {
            network,
            partition,
            output,
        } => cmd_reduce(network, partition, output),
        Command::Simulate {
            network,
            sim,
            output,
        } => cmd_simulate(network, sim, output.as_deref()),
        Command::Compare {
            network,
            partition,
            sim,
            output,
        } => cmd_compare(network, partition, sim, output.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (CliError::Input(msg) | CliError::Numerical(msg)) = &e;
            eprintln!("error: {msg}");
            ExitCode::from(e.exit_code())
        }
    }
}
