//! Experiment runner. Every subcommand reads one TOML config describing the
//! system and the ensemble, derives all randomness from the master seed, and
//! emits self-describing CSV: rerunning with the same config and seed gives
//! byte-identical output. Progress goes to stderr, data to stdout or --out.
//!
//! Exit codes: 0 success, 2 configuration error, 3 no percolation
//! transition in the scanned window, 1 anything else.

mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use mutperc::analysis::{
    eps_surv, find_pc, find_qc, noi_vs_q, sweep_p, thresholds, write_critical_csv,
    write_curve_csv, EnsembleCfg, MapSpec, TopologySpec,
};
use mutperc::depmap::write_map;
use mutperc::entropy::apen_of_map;
use mutperc::error::Error as CoreError;
use mutperc::exec::ExecMode;
use mutperc::graphs::write_edge_list;
use mutperc::seed::{derive_seed, f64_bits};

use config::ExperimentConfig;

#[derive(Parser)]
#[command(
    name = "mutperc",
    about = "Mutual percolation on interdependent networks: generation, sweeps, critical points, map entropy",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment description (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override the config's master_seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; 1 runs fully serial. Default: all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output file (file prefix for generate). Default: the config's
    /// output_path, else stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the graph edge list and dependency map to files.
    Generate,
    /// Mean giant fraction and NOI over the configured p grid.
    Sweep,
    /// Locate p_c (bisection target "pc") or q_c (target "qc").
    Critical,
    /// Approximate entropy of the dependency map, per map parameter.
    Apen,
    /// NOI at the critical point over a q grid.
    Noi,
}

enum Failure {
    Config(String),
    NoTransition(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::NoTransition(_) => 3,
            Failure::Other(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::NoTransition(m) | Failure::Other(m) => m,
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Failure {
        match e {
            CoreError::InvalidParameter(_) | CoreError::InsufficientData(_) => {
                Failure::Config(e.to_string())
            }
            CoreError::Parse { .. } => Failure::Config(e.to_string()),
            CoreError::NoTransition(_) => Failure::NoTransition(e.to_string()),
            CoreError::Io { .. } => Failure::Other(e.to_string()),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(f) = run(cli) {
        eprintln!("error: {}", f.message());
        std::process::exit(f.code());
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Failure::Config("missing --config <PATH>".into()))?;
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let mut cfg = ExperimentConfig::from_toml(&text)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }

    let exec = match cli.threads {
        Some(0) => return Err(Failure::Config("--threads must be >= 1".into())),
        Some(1) => ExecMode::Sequential,
        Some(k) => {
            // Best effort: the global pool may already exist (tests run
            // several commands in-process never do, but a library consumer
            // might); the seeding scheme keeps results identical anyway.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            ExecMode::Parallel
        }
        None => ExecMode::Parallel,
    };

    let topology = cfg.topology_spec().map_err(Failure::Config)?;
    let map = cfg.map_spec().map_err(Failure::Config)?;
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output_path.as_ref().map(PathBuf::from));

    match cli.command {
        Command::Generate => cmd_generate(&cfg, &topology, &map, out.as_deref()),
        Command::Sweep => cmd_sweep(&cfg, &topology, &map, exec, out.as_deref()),
        Command::Critical => cmd_critical(&cfg, &topology, &map, exec, out.as_deref()),
        Command::Apen => cmd_apen(&cfg, &topology, &map, out.as_deref()),
        Command::Noi => cmd_noi(&cfg, &topology, &map, exec, out.as_deref()),
    }
}

fn ensemble(cfg: &ExperimentConfig, topology: &TopologySpec, map: &MapSpec, exec: ExecMode) -> EnsembleCfg {
    EnsembleCfg {
        topology: topology.clone(),
        map: map.clone(),
        realizations: cfg.realizations,
        master_seed: cfg.master_seed,
        exec,
    }
}

/// Comment block prepended to every data product: the resolved system, the
/// seed, and each default in play, so a CSV alone identifies its experiment.
fn header(command: &str, cfg: &ExperimentConfig, topology: &TopologySpec, map: &MapSpec) -> String {
    let n = topology.node_count();
    let size = match topology {
        TopologySpec::Lattice { side } => format!("L={side} N={n}"),
        _ => format!("N={n}"),
    };
    let apen = cfg.apen_params();
    format!(
        "# command={command} topology={} {size} map={} param={} realizations={} master_seed={}\n\
         # defaults: beta=0.1 exponent=3 mean_degree=4 m={} tolerance_factor={} jump_threshold={} eps_surv={} tol_p={} tol_q={}\n",
        topology.tag().as_str(),
        map.tag(),
        map.parameter(),
        cfg.realizations,
        cfg.master_seed,
        apen.m,
        apen.tolerance_factor,
        thresholds::JUMP_THRESHOLD,
        eps_surv(n),
        thresholds::TOL_P,
        thresholds::TOL_Q,
    )
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, bytes)
            .map_err(|e| Failure::Other(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure::Other(format!("stdout: {e}"))),
    }
}

fn cmd_generate(
    cfg: &ExperimentConfig,
    topology: &TopologySpec,
    map_spec: &MapSpec,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let base = out.ok_or_else(|| {
        Failure::Config("generate writes two files and needs --out or output_path as prefix".into())
    })?;
    let graph_seed = derive_seed(cfg.master_seed, &[1]);
    let map_seed = derive_seed(cfg.master_seed, &[2]);
    let graph = topology.build(graph_seed)?;
    let map = map_spec.build(topology, map_seed)?;

    let edges_path = base.with_extension("edges");
    let mut w = Vec::new();
    write_edge_list(&graph, graph_seed, &mut w)
        .map_err(|e| Failure::Other(format!("{}: {e}", edges_path.display())))?;
    emit(Some(&edges_path), &w)?;
    eprintln!(
        "generate: {} nodes, {} edges -> {}",
        graph.node_count(),
        graph.edge_count(),
        edges_path.display()
    );

    let map_path = base.with_extension("map");
    let mut w = Vec::new();
    write_map(&map, map_seed, &mut w)
        .map_err(|e| Failure::Other(format!("{}: {e}", map_path.display())))?;
    emit(Some(&map_path), &w)?;
    eprintln!("generate: {} map -> {}", map.kind().tag(), map_path.display());
    Ok(())
}

fn cmd_sweep(
    cfg: &ExperimentConfig,
    topology: &TopologySpec,
    map: &MapSpec,
    exec: ExecMode,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let grid = cfg
        .p_grid
        .as_ref()
        .ok_or_else(|| Failure::Config("sweep needs a p_grid".into()))?
        .expand()
        .map_err(Failure::Config)?;
    eprintln!(
        "sweep: {} p points x {} realizations on {} nodes",
        grid.len(),
        cfg.realizations,
        topology.node_count()
    );
    let curve = sweep_p(&ensemble(cfg, topology, map, exec), &grid)?;
    let mut bytes = header("sweep", cfg, topology, map).into_bytes();
    write_curve_csv(&curve, &mut bytes).expect("vec write");
    emit(out, &bytes)?;
    eprintln!("sweep: done");
    Ok(())
}

fn cmd_critical(
    cfg: &ExperimentConfig,
    topology: &TopologySpec,
    map: &MapSpec,
    exec: ExecMode,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let spec = cfg
        .bisection
        .as_ref()
        .ok_or_else(|| Failure::Config("critical needs a bisection table".into()))?;
    let ecfg = ensemble(cfg, topology, map, exec);
    let mut bytes = header("critical", cfg, topology, map).into_bytes();
    match spec.target.as_str() {
        "pc" => {
            eprintln!("critical: locating p_c to tolerance {}", spec.tol);
            let cp = find_pc(&ecfg, spec.tol)?;
            write_critical_csv(&[(topology.tag(), map.parameter(), cp)], &mut bytes)
                .expect("vec write");
        }
        "qc" => {
            eprintln!("critical: bisecting q_c to tolerance {}", spec.tol);
            let est = find_qc(&ecfg, spec.tol)?;
            bytes.extend_from_slice(b"topology,q_c,lower,upper\n");
            bytes.extend_from_slice(
                format!(
                    "{},{},{},{}\n",
                    topology.tag().as_str(),
                    est.value,
                    est.lower,
                    est.upper
                )
                .as_bytes(),
            );
        }
        other => {
            return Err(Failure::Config(format!(
                "bisection target must be \"pc\" or \"qc\", got \"{other}\""
            )))
        }
    }
    emit(out, &bytes)?;
    eprintln!("critical: done");
    Ok(())
}

fn cmd_apen(
    cfg: &ExperimentConfig,
    topology: &TopologySpec,
    map: &MapSpec,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let params = cfg.apen_params();
    params.validate()?;

    // Rewired maps scan their q grid; every other family is a single point
    // at its own parameter.
    let points: Vec<(f64, MapSpec)> = match map {
        MapSpec::Rewired { .. } => grid_or_default(cfg)?
            .into_iter()
            .map(|q| (q, MapSpec::Rewired { q }))
            .collect(),
        other => vec![(other.parameter(), other.clone())],
    };

    let mut bytes = header("apen", cfg, topology, map).into_bytes();
    bytes.extend_from_slice(b"param,mean_apen,se_apen,realizations\n");
    for (param, spec) in points {
        let mut vals = Vec::with_capacity(cfg.realizations);
        for s in 0..cfg.realizations as u64 {
            let seed = derive_seed(cfg.master_seed, &[f64_bits(param), s]);
            let m = spec.build(topology, seed)?;
            vals.push(apen_of_map(&m, &params)?);
        }
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let se = if vals.len() > 1 {
            let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                / (vals.len() - 1) as f64;
            (var / vals.len() as f64).sqrt()
        } else {
            0.0
        };
        eprintln!("apen: param={param} mean={mean:.4}");
        bytes.extend_from_slice(
            format!("{param},{mean},{se},{}\n", cfg.realizations).as_bytes(),
        );
    }
    emit(out, &bytes)?;
    Ok(())
}

fn cmd_noi(
    cfg: &ExperimentConfig,
    topology: &TopologySpec,
    map: &MapSpec,
    exec: ExecMode,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let grid = grid_or_default(cfg)?;
    eprintln!(
        "noi: locating p_c at {} q points, {} realizations each",
        grid.len(),
        cfg.realizations
    );
    let rows = noi_vs_q(&ensemble(cfg, topology, map, exec), &grid)?;
    let mut bytes = header("noi", cfg, topology, map).into_bytes();
    bytes.extend_from_slice(b"q,noi_at_pc\n");
    for (q, noi) in rows {
        bytes.extend_from_slice(format!("{q},{noi}\n").as_bytes());
    }
    emit(out, &bytes)?;
    eprintln!("noi: done");
    Ok(())
}

fn grid_or_default(cfg: &ExperimentConfig) -> Result<Vec<f64>, Failure> {
    match &cfg.q_grid {
        Some(g) => g.expand().map_err(Failure::Config),
        None => Ok((0..=10).map(|k| k as f64 * 0.1).collect()),
    }
}
