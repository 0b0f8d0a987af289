//! Command-line harness for the HTM region service.
//!
//! Every subcommand except `serve` is a client of the HTTP service: with
//! `--server` it talks to a running instance, otherwise it spins up an
//! embedded service on an ephemeral local port and drives that.
//!
//! Exit codes: 0 success, 2 usage error, 3 data/runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use htm_client::types::{CapacityRequest, CreateRegionRequest, SparsityRequest};
use htm_client::{
    BenchSpec, ClassifySpec, Client, FieldSpec, NoiseSweepSpec, RegionConfig, SequenceSpec,
    TrainSpSpec,
};

const DESK_TRAIN_LIMIT: usize = 10_000;
const DESK_TEST_LIMIT: usize = 2_000;

#[derive(Parser)]
#[command(
    name = "htm",
    version,
    about = "HTM cortical learning engine: spatial pooling, sequence prediction and the \
             classification/noise/prediction experiment suite over an HTTP service"
)]
struct Cli {
    /// Base URL of a running service; when absent an embedded service is
    /// started for the duration of the command.
    #[arg(long, global = true)]
    server: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Region config file (flat key=value lines).
    #[arg(long)]
    config: Option<PathBuf>,

    /// Seed for all synthetic synapses and sampling (overrides the file).
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Receptive-field mode: "global" or "local:<radius>".
    #[arg(long, default_value = "local:5")]
    field_mode: String,
}

#[derive(Args, Clone)]
struct MnistArgs {
    #[arg(long, default_value = "data/mnist/train-images-10k-idx3-ubyte")]
    train_images: PathBuf,
    #[arg(long, default_value = "data/mnist/train-labels-10k-idx1-ubyte")]
    train_labels: PathBuf,
    #[arg(long, default_value = "data/mnist/test-images-2k-idx3-ubyte")]
    test_images: PathBuf,
    #[arg(long, default_value = "data/mnist/test-labels-2k-idx1-ubyte")]
    test_labels: PathBuf,
    /// Use every record in the files instead of the 10k/2k desk profile.
    #[arg(long)]
    full_mnist: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service in the foreground.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8643")]
        addr: String,
    },
    /// Train the spatial pooler unsupervised and write a region snapshot.
    TrainSp {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        data: MnistArgs,
        #[arg(long, default_value_t = 3)]
        epochs: usize,
        /// Snapshot output path.
        #[arg(long, default_value = "region.htmr")]
        snapshot: PathBuf,
        /// Per-epoch mean-overlap CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encode datasets through a frozen pooler and classify with KNN.
    Classify {
        #[command(flatten)]
        data: MnistArgs,
        #[arg(long, default_value = "region.htmr")]
        snapshot: PathBuf,
        #[arg(long, default_value_t = 5)]
        knn_k: usize,
        /// Inference-time sweep: winners_per_step=20,30 / min_overlap=0,2,4
        /// / train_size=1000,5000
        #[arg(long)]
        sweep: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the test-set SDR dump (one line per input, winner ids).
        #[arg(long)]
        sdr_out: Option<PathBuf>,
    },
    /// Classification accuracy under salt-and-pepper and Gaussian noise.
    NoiseSweep {
        #[command(flatten)]
        data: MnistArgs,
        #[arg(long, default_value = "region.htmr")]
        snapshot: PathBuf,
        #[arg(long, default_value_t = 5)]
        knn_k: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Present a cyclic glyph sequence and measure first/second-order
    /// prediction accuracy.
    Sequence {
        #[command(flatten)]
        config: ConfigArgs,
        /// Directory of 0.pgm..9.pgm glyphs (defaults to the built-in set).
        #[arg(long)]
        glyph_dir: Option<PathBuf>,
        /// Digit order, comma-separated.
        #[arg(long, default_value = "1,2,4,5,7")]
        order: String,
        #[arg(long, default_value_t = 10)]
        presentations: usize,
        /// Salt-and-pepper density applied per presentation.
        #[arg(long, default_value_t = 0.0)]
        noise_density: f64,
        /// Prediction-accuracy CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Cell-state CSV path (t,column,cell,active,predictive,learning).
        #[arg(long)]
        cell_out: Option<PathBuf>,
    },
    /// Software throughput of the engine (per-sample medians).
    Bench {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Worker counts, comma-separated (default: 1 and all cores).
        #[arg(long)]
        workers: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analytic helpers: validate a config, sparsity and capacity.
    Analyze {
        #[command(flatten)]
        config: ConfigArgs,
        /// Write the receptive-field dump of a freshly initialized region
        /// (one line per column, comma-separated addresses).
        #[arg(long)]
        dump_fields: Option<PathBuf>,
    },
}

enum CliFailure {
    Usage(String),
    Data(String),
}

impl From<htm_client::ClientError> for CliFailure {
    fn from(e: htm_client::ClientError) -> Self {
        match &e {
            htm_client::ClientError::Api { status, .. } if *status == 400 => {
                CliFailure::Usage(e.to_string())
            }
            _ => CliFailure::Data(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliFailure {
    fn from(e: std::io::Error) -> Self {
        CliFailure::Data(e.to_string())
    }
}

fn parse_field_mode(s: &str) -> Result<FieldSpec, CliFailure> {
    if s == "global" {
        Ok(FieldSpec::Global)
    } else if let Some(r) = s.strip_prefix("local:") {
        let radius = r
            .parse()
            .map_err(|_| CliFailure::Usage(format!("bad field radius {r:?}")))?;
        Ok(FieldSpec::Local { radius })
    } else {
        Err(CliFailure::Usage(format!(
            "--field-mode must be 'global' or 'local:<radius>', got {s:?}"
        )))
    }
}

fn load_config(args: &ConfigArgs) -> Result<Option<RegionConfig>, CliFailure> {
    match &args.config {
        None => Ok(None),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliFailure::Data(format!("{}: {e}", path.display())))?;
            let mut cfg = RegionConfig::parse_file(&text)
                .map_err(|e| CliFailure::Data(e.to_string()))?;
            cfg.rng_seed = args.seed; // CLI overrides take precedence
            Ok(Some(cfg))
        }
    }
}

fn parse_sweep(s: &str) -> Result<(String, Vec<u32>), CliFailure> {
    let (param, values) = s
        .split_once('=')
        .ok_or_else(|| CliFailure::Usage(format!("--sweep expects param=v1,v2,..., got {s:?}")))?;
    if !matches!(param, "winners_per_step" | "min_overlap" | "train_size") {
        return Err(CliFailure::Usage(format!(
            "unknown sweep parameter {param:?} (winners_per_step, min_overlap, train_size)"
        )));
    }
    let values = values
        .split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| CliFailure::Usage(format!("bad sweep value {v:?}")))
        })
        .collect::<Result<Vec<u32>, _>>()?;
    if values.is_empty() {
        return Err(CliFailure::Usage("empty sweep value list".into()));
    }
    Ok((param.to_string(), values))
}

fn parse_order(s: &str) -> Result<Vec<u8>, CliFailure> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<u8>()
                .ok()
                .filter(|d| *d < 10)
                .ok_or_else(|| CliFailure::Usage(format!("bad digit {v:?} in --order")))
        })
        .collect()
}

fn write_out(path: &Option<PathBuf>, body: &str) -> Result<(), CliFailure> {
    if let Some(p) = path {
        std::fs::write(p, body)?;
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

/// Resolve a path so the server side (same host here) sees it correctly.
fn absolute(p: &std::path::Path) -> PathBuf {
    std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf())
}

fn connect(server: &Option<String>) -> Result<Client, CliFailure> {
    let base = match server {
        Some(url) => url.clone(),
        None => {
            let (addr, _handle) = htm_service::spawn_background("127.0.0.1:0")
                .map_err(|e| CliFailure::Data(format!("embedded service: {e}")))?;
            format!("http://{addr}")
        }
    };
    let client = Client::new(base);
    client.health()?;
    Ok(client)
}

fn run(cli: Cli) -> Result<(), CliFailure> {
    match cli.command {
        Command::Serve { addr } => {
            tracing_subscriber::fmt::init();
            let listener = std::net::TcpListener::bind(&addr)
                .map_err(|e| CliFailure::Data(format!("bind {addr}: {e}")))?;
            println!("htm service listening on http://{}", listener.local_addr()?);
            listener.set_nonblocking(true)?;
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(listener)?;
                htm_service::serve(listener).await
            })?;
            Ok(())
        }

        Command::TrainSp {
            config,
            data,
            epochs,
            snapshot,
            out,
        } => {
            let client = connect(&cli.server)?;
            let spec = TrainSpSpec {
                config: load_config(&config)?,
                field: parse_field_mode(&config.field_mode)?,
                train_images: absolute(&data.train_images),
                train_labels: absolute(&data.train_labels),
                train_limit: (!data.full_mnist).then_some(DESK_TRAIN_LIMIT),
                epochs,
                seed: config.seed,
                snapshot_path: absolute(&snapshot),
            };
            let result = client.train_sp(&spec)?;
            let mut csv = String::from("epoch,mean_winner_overlap\n");
            for (e, m) in &result.epochs {
                csv.push_str(&format!("{e},{m:.6}\n"));
            }
            write_out(&out, &csv)?;
            println!(
                "trained on {} images for {} epochs; snapshot {} ({} bytes)",
                result.trained_images,
                result.epochs.len(),
                snapshot.display(),
                result.snapshot_bytes
            );
            for (e, m) in &result.epochs {
                println!("  epoch {e}: mean winner overlap {m:.3}");
            }
            Ok(())
        }

        Command::Classify {
            data,
            snapshot,
            knn_k,
            sweep,
            out,
            sdr_out,
        } => {
            let client = connect(&cli.server)?;
            let spec = ClassifySpec {
                snapshot_path: absolute(&snapshot),
                train_images: absolute(&data.train_images),
                train_labels: absolute(&data.train_labels),
                test_images: absolute(&data.test_images),
                test_labels: absolute(&data.test_labels),
                train_limit: (!data.full_mnist).then_some(DESK_TRAIN_LIMIT),
                test_limit: (!data.full_mnist).then_some(DESK_TEST_LIMIT),
                knn_k,
                sweep: sweep.as_deref().map(parse_sweep).transpose()?,
                dump_test_sdrs: sdr_out.is_some(),
            };
            let result = client.classify(&spec)?;
            write_out(&out, &htm_core::experiments::accuracy_rows_to_csv(&result.rows))?;
            if let Some(dump) = &result.sdr_dump {
                write_out(&sdr_out, dump)?;
            }
            for row in &result.rows {
                println!(
                    "{} {}={}: accuracy {:.4}",
                    row.experiment, row.parameter, row.value, row.accuracy
                );
            }
            Ok(())
        }

        Command::NoiseSweep {
            data,
            snapshot,
            knn_k,
            seed,
            out,
        } => {
            let client = connect(&cli.server)?;
            let (sp_densities, gaussian_variances) = NoiseSweepSpec::default_levels();
            let spec = NoiseSweepSpec {
                snapshot_path: absolute(&snapshot),
                train_images: absolute(&data.train_images),
                train_labels: absolute(&data.train_labels),
                test_images: absolute(&data.test_images),
                test_labels: absolute(&data.test_labels),
                train_limit: (!data.full_mnist).then_some(DESK_TRAIN_LIMIT),
                test_limit: (!data.full_mnist).then_some(DESK_TEST_LIMIT),
                knn_k,
                seed,
                sp_densities,
                gaussian_variances,
            };
            let result = client.noise_sweep(&spec)?;
            write_out(&out, &htm_core::experiments::accuracy_rows_to_csv(&result.rows))?;
            for row in &result.rows {
                println!(
                    "{} {}={}: accuracy {:.4}",
                    row.experiment, row.parameter, row.value, row.accuracy
                );
            }
            Ok(())
        }

        Command::Sequence {
            config,
            glyph_dir,
            order,
            presentations,
            noise_density,
            out,
            cell_out,
        } => {
            let client = connect(&cli.server)?;
            let spec = SequenceSpec {
                glyph_dir: glyph_dir.as_deref().map(absolute),
                order: parse_order(&order)?,
                presentations,
                noise_density,
                seed: config.seed,
                config: load_config(&config)?,
                field: parse_field_mode(&config.field_mode)?,
            };
            let result = client.sequence(&spec)?;
            write_out(&out, &result.prediction_csv)?;
            write_out(&cell_out, &result.cell_state_csv)?;
            println!("presentation  first-order  second-order  bursts");
            for p in 0..result.first_order.len() {
                println!(
                    "{:>12}  {:>11.2}  {:>12.2}  {:>6}",
                    p + 1,
                    result.first_order[p],
                    result.second_order[p],
                    result.bursting[p]
                );
            }
            Ok(())
        }

        Command::Bench {
            config,
            samples,
            workers,
            out,
        } => {
            let client = connect(&cli.server)?;
            let workers = match workers {
                None => vec![],
                Some(s) => s
                    .split(',')
                    .map(|v| {
                        v.trim().parse().map_err(|_| {
                            CliFailure::Usage(format!("bad worker count {v:?}"))
                        })
                    })
                    .collect::<Result<Vec<usize>, _>>()?,
            };
            let spec = BenchSpec {
                samples,
                seed: config.seed,
                config: load_config(&config)?,
                workers,
            };
            let result = client.bench(&spec)?;
            println!(
                "config {:08x}, seed {}, {} samples",
                result.config_digest, result.seed, result.samples
            );
            println!("metric    workers  median_us  samples/sec");
            for r in &result.rows {
                println!(
                    "{:<9} {:>7}  {:>9.2}  {:>11.1}",
                    r.metric, r.workers, r.median_us, r.samples_per_sec
                );
            }
            let mut csv = String::from("metric,workers,median_us,samples_per_sec\n");
            for r in &result.rows {
                csv.push_str(&format!(
                    "{},{},{:.3},{:.1}\n",
                    r.metric, r.workers, r.median_us, r.samples_per_sec
                ));
            }
            csv.push_str(&format!(
                "# config_digest={:08x} seed={} samples={}\n",
                result.config_digest, result.seed, result.samples
            ));
            write_out(&out, &csv)?;
            Ok(())
        }

        Command::Analyze { config, dump_fields } => {
            let client = connect(&cli.server)?;
            let mut cfg = load_config(&config)?.unwrap_or_default();
            cfg.rng_seed = config.seed;
            let cfg = client.validate_config(&cfg)?;
            let sparsity = client.sparsity(&SparsityRequest {
                num_columns: cfg.num_columns,
                winners_per_step: cfg.winners_per_step,
            })?;
            let capacity = client.capacity(&CapacityRequest {
                num_columns: cfg.num_columns as u64,
                winners_per_step: cfg.winners_per_step as u64,
            })?;
            println!("config valid: {} columns, {} winners", cfg.num_columns, cfg.winners_per_step);
            println!("sparsity: {:.2}%", sparsity.percent);
            println!("capacity: {} ({:.6e})", capacity.exact, capacity.approx);
            let created = client.create_region(&CreateRegionRequest {
                config: cfg.clone(),
                field: parse_field_mode(&config.field_mode)?,
                grid: None,
            })?;
            let info = client.region_info(created.id)?;
            println!("region {} created ({} distal synapses)", info.id, info.distal_synapses);
            if dump_fields.is_some() {
                let dump = client.region_fields(created.id)?;
                write_out(&dump_fields, &dump.lines)?;
            }
            client.delete_region(created.id)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliFailure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliFailure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
