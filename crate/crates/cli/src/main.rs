// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qclspin::bench::{self, ExperimentConfig, RunManifest};
use qclspin::qcl::{self, AnsatzConfig, Dataset, TrainedModel, TrainingObservable};
use qclspin::{Accounting, ChannelKind, Error, Result};

#[derive(Parser)]
#[command(
    name = "qclspin",
    version,
    about = "Learned shallow circuits for Trotterized XXX chains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Restrict to one channel: bitflip, depolarizing, ampdamp, phasedamp
    #[arg(long, global = true)]
    noise: Option<String>,
    /// Channel probability (defaults per channel)
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Measurement shots for noisy columns, 0 for exact
    #[arg(long, global = true)]
    shots: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// template or paper-tally
    #[arg(long, global = true)]
    accounting: Option<String>,
    /// Loss weight of the Hamiltonian term, within [2, 4]
    #[arg(long, global = true)]
    alpha5: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Write training datasets, one per configured step count
    GenData,
    /// Train one model per (d, D) pair
    Train {
        /// Use this dataset instead of generating one
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Train every configured D and select the lowest loss
    #[command(name = "sweep-D")]
    SweepD {
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Ideal/noisy comparison of original and learned circuits
    Benchmark {
        #[arg(long)]
        model: PathBuf,
    },
    /// Gate counts of original and learned circuits
    Gatecount,
    /// Apply a learned circuit several times and compare with exact evolution
    Reuse {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        repetitions: Option<usize>,
    },
}

fn resolve(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(n) = &common.noise {
        cfg.channels = vec![n.parse::<ChannelKind>()?];
    }
    if common.p.is_some() {
        cfg.p = common.p;
    }
    if let Some(s) = common.shots {
        cfg.shots = s;
    }
    if let Some(d) = &common.out_dir {
        cfg.out_dir = d.clone();
    }
    if let Some(a) = &common.accounting {
        cfg.accounting = a.parse::<Accounting>()?;
    }
    if let Some(w) = common.alpha5 {
        if !(2.0..=4.0).contains(&w) {
            return Err(Error::Config(format!("--alpha5 = {w} outside [2, 4]")));
        }
        cfg.alpha[4] = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(path: &Path, text: &str, outputs: &mut Vec<String>) -> Result<()> {
    std::fs::write(path, text)?;
    outputs.push(path.display().to_string());
    Ok(())
}

fn load_dataset(cfg: &ExperimentConfig, path: &Path) -> Result<Dataset<f64>> {
    let ds: Dataset<f64> = Dataset::load(path)?;
    let spec = cfg.model_spec::<f64>()?;
    if ds.spec.length != spec.length || (ds.spec.delta - spec.delta).abs() > 1e-12 {
        return Err(Error::Config(format!(
            "dataset {} (L = {}, delta = {}) does not match config (L = {}, delta = {})",
            path.display(),
            ds.spec.length,
            ds.spec.delta,
            spec.length,
            spec.delta
        )));
    }
    Ok(ds)
}

fn datasets(cfg: &ExperimentConfig, given: Option<&Path>) -> Result<Vec<Dataset<f64>>> {
    match given {
        Some(p) => Ok(vec![load_dataset(cfg, p)?]),
        None => cfg
            .steps
            .iter()
            .map(|&d| qcl::gen_dataset(&cfg.model_spec()?, d, cfg.grid_size))
            .collect(),
    }
}

fn report_model(m: &TrainedModel<f64>) {
    println!(
        "  D={} d={} loss={:.4e} a={:.6} restarts=[{}]",
        m.config.layers,
        m.steps,
        m.final_loss,
        m.a,
        m.metadata
            .restart_losses
            .iter()
            .map(|l| format!("{l:.3e}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    if let Some(w) = m.scale_warning() {
        eprintln!("warning: {w}");
    }
}

fn model_path(cfg: &ExperimentConfig, d: usize, layers: usize) -> PathBuf {
    cfg.out_dir.join(format!("model_L{}_d{d}_D{layers}.json", cfg.length))
}

/// Model file plus a text dump of its ansatz circuit.
fn write_model(cfg: &ExperimentConfig, m: &TrainedModel<f64>, outputs: &mut Vec<String>) -> Result<()> {
    write(
        &model_path(cfg, m.steps, m.config.layers),
        &qcl::persist::model_to_json(m)?,
        outputs,
    )?;
    let dump = cfg
        .out_dir
        .join(format!("circuit_L{}_d{}_D{}.txt", cfg.length, m.steps, m.config.layers));
    write(&dump, &m.ansatz()?.to_text(), outputs)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = resolve(&cli.common)?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let mut outputs = Vec::new();
    let name = match &cli.command {
        Command::GenData => {
            for ds in datasets(&cfg, None)? {
                let path = cfg.out_dir.join(format!("dataset_L{}_d{}.csv", cfg.length, ds.steps));
                write(&path, &ds.to_csv(), &mut outputs)?;
                println!("{} ({} rows)", path.display(), ds.len());
                for o in TrainingObservable::ALL {
                    let t = ds.target(o);
                    let mean = t.iter().sum::<f64>() / t.len() as f64;
                    let (lo, hi) = t
                        .iter()
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
                    println!("  {:<7} mean {mean:+.6} min {lo:+.6} max {hi:+.6}", o.column());
                }
            }
            "gen-data"
        }
        Command::Train { dataset } => {
            for ds in datasets(&cfg, dataset.as_deref())? {
                for layers in cfg.layers_for(ds.steps) {
                    let ansatz = AnsatzConfig::random(cfg.length, layers, cfg.seed)?;
                    let m = qcl::train(&ansatz, &ds, &cfg.training_options())?;
                    report_model(&m);
                    write_model(&cfg, &m, &mut outputs)?;
                }
            }
            "train"
        }
        Command::SweepD { dataset } => {
            for ds in datasets(&cfg, dataset.as_deref())? {
                let depths = cfg.sweep_layers();
                let base = AnsatzConfig::random(cfg.length, depths[0], cfg.seed)?;
                let sweep = qcl::sweep_layers(&base, &ds, &depths, &cfg.training_options())?;
                let mut csv = String::from("d,D,final_loss,a,selected\n");
                for (i, m) in sweep.models.iter().enumerate() {
                    report_model(m);
                    csv.push_str(&format!(
                        "{},{},{},{},{}\n",
                        m.steps,
                        m.config.layers,
                        qcl::dataset::fmt12(m.final_loss),
                        qcl::dataset::fmt12(m.a),
                        i == sweep.best
                    ));
                    write_model(&cfg, m, &mut outputs)?;
                }
                println!("  selected D={}", sweep.models[sweep.best].config.layers);
                let path = cfg.out_dir.join(format!("sweep_L{}_d{}.csv", cfg.length, ds.steps));
                write(&path, &csv, &mut outputs)?;
            }
            "sweep-D"
        }
        Command::Benchmark { model } => {
            let m: TrainedModel<f64> = qcl::load_model(model)?;
            let rows = bench::benchmark(&cfg, &m)?;
            let path = cfg.out_dir.join(format!(
                "benchmark_L{}_d{}_D{}.csv",
                cfg.length, m.steps, m.config.layers
            ));
            write(&path, &bench::comparison_csv(&rows), &mut outputs)?;
            println!("{} ({} rows)", path.display(), rows.len());
            for &kind in &cfg.channels {
                for o in &cfg.observables {
                    let (orig, learned) = bench::mean_deviation(&rows, o, kind);
                    println!(
                        "  {:<12} {:<5} mean |noisy-ideal|: original {orig:.6} learned {learned:.6}",
                        kind.name(),
                        o
                    );
                }
            }
            "benchmark"
        }
        Command::Gatecount => {
            let report = bench::gatecount(&cfg)?;
            print!("{}", report.to_text());
            let path = cfg.out_dir.join(format!("gatecount_L{}.csv", cfg.length));
            write(&path, &report.to_csv(), &mut outputs)?;
            let spec = cfg.model_spec::<f64>()?;
            for &d in &cfg.steps {
                let dump = cfg.out_dir.join(format!("circuit_original_L{}_d{d}.txt", cfg.length));
                write(&dump, &qclspin::model::evolution(&spec, d)?.to_text(), &mut outputs)?;
            }
            "gatecount"
        }
        Command::Reuse { model, repetitions } => {
            let m: TrainedModel<f64> = qcl::load_model(model)?;
            let n = repetitions.unwrap_or(cfg.repetitions);
            let rows = bench::reuse(&cfg, &m, n)?;
            let path = cfg.out_dir.join(format!("reuse_L{}_d{}_n{n}.csv", cfg.length, m.steps));
            write(&path, &bench::reuse_csv(&rows), &mut outputs)?;
            println!(
                "{}: mean |learned-exact| of Z1 over {} points, {}x{} steps: {:.6}",
                path.display(),
                rows.len(),
                n,
                m.steps,
                bench::reuse_mean_deviation(&rows)
            );
            "reuse"
        }
    };
    let mut manifest = RunManifest::new(name, &cfg);
    manifest.outputs = outputs;
    manifest.write(&cfg.out_dir)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
