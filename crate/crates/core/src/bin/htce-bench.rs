//! Command-line front end: experiment grids, data simulation, single training runs
//! and the architecture table.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use htce::harness::{emit_report, generate_data, pehe, run_experiment_with, CellOutcome, ExperimentSpec, ReportFormat, Sweep};
use htce::learners::{
    architecture, train_baseline, train_htce, Ablation, BaselineMode, CateModel, LearnerKind, TrainConfig,
    ARCHITECTURE_JSON,
};
use htce::simbench::{load_covariates_csv, simulate_split, write_pair_csv, CovariateSchema, SimConfig};

#[derive(Parser)]
#[command(name = "htce-bench", about = "Heterogeneous-transfer CATE benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment grid and write CSV and JSON reports into a directory.
    Run {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Suppress per-cell progress lines.
        #[arg(long)]
        quiet: bool,
    },
    /// Simulate a source/target pair and write it as one CSV.
    Simulate {
        /// SimConfig JSON.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Covariate CSV; requires --schema. Its partition replaces the config's.
        #[arg(long, requires = "schema")]
        covariates: Option<PathBuf>,
        #[arg(long)]
        schema: Option<PathBuf>,
    },
    /// Train one learner on simulated data and report its test PEHE.
    Train {
        #[arg(long, value_enum)]
        learner: LearnerArg,
        #[arg(long, value_enum, default_value = "htce")]
        mode: ModeArg,
        /// SimConfig JSON; defaults to the benchmark settings with data from --seed (or 0).
        #[arg(long)]
        config: Option<PathBuf>,
        /// TrainConfig JSON; defaults to the standard training settings.
        #[arg(long)]
        train_config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        ablation: Option<AblationArg>,
        /// Write the trained model manifest here.
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Print the architecture and training defaults.
    Describe {
        /// Print the raw constants file instead of a summary.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LearnerArg {
    S,
    T,
    Dr,
    Tarnet,
}

impl From<LearnerArg> for LearnerKind {
    fn from(a: LearnerArg) -> Self {
        match a {
            LearnerArg::S => LearnerKind::S,
            LearnerArg::T => LearnerKind::T,
            LearnerArg::Dr => LearnerKind::Dr,
            LearnerArg::Tarnet => LearnerKind::Tarnet,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Htce,
    Target,
    Shared,
}

#[derive(Clone, Copy, ValueEnum)]
enum AblationArg {
    NoPoSharing,
    NoOrthZ,
    NoOrthPo,
}

impl From<AblationArg> for Ablation {
    fn from(a: AblationArg) -> Self {
        match a {
            AblationArg::NoPoSharing => Ablation::NoPoSharing,
            AblationArg::NoOrthZ => Ablation::NoOrthZ,
            AblationArg::NoOrthPo => Ablation::NoOrthPo,
        }
    }
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> htce::Result<()> {
    match cli.command {
        Command::Run { spec, out, quiet } => cmd_run(spec, out, quiet),
        Command::Simulate {
            config,
            out,
            covariates,
            schema,
        } => cmd_simulate(config, out, covariates, schema),
        Command::Train {
            learner,
            mode,
            config,
            train_config,
            seed,
            ablation,
            save,
        } => cmd_train(learner.into(), mode, config, train_config, seed, ablation, save),
        Command::Describe { json } => {
            if json {
                println!("{ARCHITECTURE_JSON}");
            } else {
                describe();
            }
            Ok(())
        }
    }
}

fn cmd_run(spec: PathBuf, out: PathBuf, quiet: bool) -> htce::Result<()> {
    let spec = ExperimentSpec::from_json_file(spec)?;
    std::fs::create_dir_all(&out)?;
    let total = htce::harness::cells(&spec).len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let report = run_experiment_with(&spec, &|o| {
        let k = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
        if quiet {
            return;
        }
        match o {
            CellOutcome::Done(r) => eprintln!(
                "[{k}/{total}] {}={} {} {} seed {}: pehe {:.4} ({:.1}s)",
                r.sweep, r.sweep_value, r.learner, r.method, r.seed, r.pehe, r.wallclock_s
            ),
            CellOutcome::Failed(f) => eprintln!(
                "[{k}/{total}] {}={} {} {} seed {}: FAILED {}",
                f.sweep, f.sweep_value, f.learner, f.method, f.seed, f.error
            ),
        }
    })?;
    let mut files = emit_report(&report, ReportFormat::Csv, out.join("records.csv"))?;
    files.extend(emit_report(&report, ReportFormat::Json, out.join("report.json"))?);
    print!("{}", report.table());
    if !report.failures.is_empty() {
        println!("{} of {total} cells failed", report.failures.len());
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn read_sim_config(path: &PathBuf) -> htce::Result<SimConfig> {
    let c: SimConfig = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    c.validate()?;
    Ok(c)
}

fn cmd_simulate(config: PathBuf, out: PathBuf, covariates: Option<PathBuf>, schema: Option<PathBuf>) -> htce::Result<()> {
    let mut cfg = read_sim_config(&config)?;
    let pair = match (covariates, schema) {
        (Some(csv), Some(schema)) => {
            let (x, partition) = load_covariates_csv(csv, &CovariateSchema::from_json_file(schema)?)?;
            cfg.partition = partition;
            simulate_split(&cfg, Some(&x))?
        }
        _ => simulate_split(&cfg, None)?,
    };
    write_pair_csv(&pair, std::fs::File::create(&out)?)?;
    println!(
        "wrote {} ({} source rows, {} target rows)",
        out.display(),
        pair.source.len(),
        pair.target.len()
    );
    Ok(())
}

fn cmd_train(
    learner: LearnerKind,
    mode: ModeArg,
    config: Option<PathBuf>,
    train_config: Option<PathBuf>,
    seed: Option<u64>,
    ablation: Option<AblationArg>,
    save: Option<PathBuf>,
) -> htce::Result<()> {
    let data = match &config {
        Some(path) => simulate_split(&read_sim_config(path)?, None)?,
        None => generate_data(&ExperimentSpec::new(Sweep::Benchmark), None, seed.unwrap_or(0))?,
    };
    let mut cfg = match train_config {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
        None => TrainConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(a) = ablation {
        cfg.ablation = a.into();
    }
    let start = Instant::now();
    let test = &data.target.test;
    let (name, tau_hat, manifest) = match mode {
        ModeArg::Htce => {
            let m = train_htce(learner, &data.source, &data.target, &cfg)?;
            (m.name(), m.predict_cate(&test.x)?, m.manifest()?)
        }
        ModeArg::Target | ModeArg::Shared => {
            let bm = if matches!(mode, ModeArg::Target) {
                BaselineMode::TargetOnly
            } else {
                BaselineMode::SharedFeaturesOnly
            };
            let m = train_baseline(&data.target, learner, bm, &cfg)?;
            (m.name(), m.predict_cate(&test.x)?, m.manifest()?)
        }
    };
    println!(
        "{name}: test pehe {:.4} on {} target rows ({:.1}s)",
        pehe(&tau_hat, &test.tau)?,
        test.len(),
        start.elapsed().as_secs_f64()
    );
    if let Some(path) = save {
        manifest.save_json(&path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn describe() {
    let a = architecture();
    let h = &a.htce;
    let b = &a.baseline;
    let t = &a.training;
    println!("architecture constants v{}", a.version);
    println!("HTCE");
    println!(
        "  encoders: 1 x {} {} (shared on shared features, private on the full domain input)",
        h.encoder_units, h.encoder_activation
    );
    println!("  stacks: {} units, {} hidden, 1 output per subspace", h.stack_units, h.stack_activation);
    let d = &h.stack_depth;
    println!(
        "  stack depth: S {}, T {}, DR outcome {}, DR propensity {}, DR pseudo-outcome {}, TARNet {}",
        d.s, d.t, d.dr_outcome, d.dr_propensity, d.dr_pseudo_outcome, d.tarnet
    );
    println!(
        "  TARNet representation: {} x {} {}",
        h.tarnet_representation_layers, h.tarnet_representation_units, h.tarnet_representation_activation
    );
    println!("baselines");
    println!("  MLP: {} x {} {}", b.mlp_hidden_layers, b.mlp_units, b.hidden_activation);
    println!(
        "  TARNet: representation {} x {}, heads {} x {}",
        b.tarnet_representation_layers, b.tarnet_representation_units, b.tarnet_head_layers, b.tarnet_head_units
    );
    println!("training");
    println!(
        "  {} lr {}, batch {} per domain, orthogonality weight {}, patience {}, max epochs {}, propensity clip {}",
        t.optimizer, t.learning_rate, t.batch_per_domain, t.orth_weight, t.patience, t.max_epochs, t.propensity_clip
    );
}
