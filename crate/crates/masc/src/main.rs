use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use masc::harness::report::{read_report_json, write_reports};
use masc::harness::runner::permille;
use masc::harness::{ExperimentConfig, Harness, Profile, ReportFormat};
use masc::io::bank::{load_bank, save_bank};
use masc::io::npy::{import_activations, write_labels, write_matrix, write_sidecar, ActivationSidecar};
use masc::io::tables::write_prediction_dump;
use masc::masc_core::masc::{classify_batch, evaluate, MetricKind};
use masc::masc_core::subspace::{component_counts, estimate_bank, BankParams, LabelSource};
use masc::{Error, Result};

#[derive(Parser)]
#[command(version, about = "Minimum-angle subspace classification of network layers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(clap::Args)]
struct Overrides {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Corruption degree; replaces the configured list.
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Layer index (0 is the input); replaces the configured list.
    #[arg(long, global = true)]
    layer: Option<usize>,
    /// Variance threshold; replaces the configured list.
    #[arg(long, global = true)]
    variance: Option<f64>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Size preset.
    #[arg(long, global = true)]
    profile: Option<ProfileArg>,
    /// Run index for single-cell commands.
    #[arg(long, global = true, default_value_t = 0)]
    run: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Desk,
    Paper,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    Corrupted,
    True,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Corrupt the training labels of one cell and write them as NPY.
    Corrupt,
    /// Train (or reuse) the model of one cell.
    Train,
    /// Export one layer's activations of a cell's model as NPY with sidecars.
    Activations,
    /// Fit a subspace bank to exported activations.
    Subspace {
        /// Activation sidecar (JSON).
        #[arg(long)]
        activations: PathBuf,
        /// Labels to partition by.
        #[arg(long, value_enum, default_value = "corrupted")]
        labels: SourceArg,
        /// Output bank file.
        #[arg(long)]
        output: PathBuf,
    },
    /// Score a bank on exported activations.
    Masc {
        /// Bank file.
        #[arg(long)]
        bank: PathBuf,
        /// Activation sidecar (JSON).
        #[arg(long)]
        activations: PathBuf,
        /// Per-sample prediction dump (CSV).
        #[arg(long)]
        predictions: Option<PathBuf>,
    },
    /// Run the configured experiment.
    Experiment,
    /// Rewrite a `report.json` as CSV or JSON.
    Report {
        /// Input `report.json`.
        #[arg(long)]
        input: PathBuf,
        /// Output directory.
        #[arg(long)]
        output: PathBuf,
        /// Output format.
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
}

impl Overrides {
    fn load(&self) -> Result<ExperimentConfig> {
        let path = self
            .config
            .as_deref()
            .ok_or_else(|| Error::Config("this command needs --config".into()))?;
        let mut c = ExperimentConfig::load(path)?;
        if let Some(p) = self.p {
            c.corruption_degrees = vec![p];
        }
        if let Some(l) = self.layer {
            c.layers = Some(vec![l]);
        }
        if let Some(v) = self.variance {
            c.variance_thresholds = vec![v];
        }
        if let Some(s) = self.seed {
            c.master_seed = s;
        }
        if let Some(p) = self.profile {
            c.profile = match p {
                ProfileArg::Desk => Profile::Desk,
                ProfileArg::Paper => Profile::Paper,
            };
        }
        c.validate()?;
        if self.run >= c.num_runs {
            return Err(Error::Config(format!("run {} out of range 0..{}", self.run, c.num_runs)));
        }
        Ok(c)
    }

    /// The single corruption degree a cell command works on.
    fn degree(&self, c: &ExperimentConfig) -> f64 {
        self.p.unwrap_or(c.corruption_degrees[0])
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let o = &cli.overrides;
    match &cli.command {
        Command::Corrupt => {
            let h = Harness::new(o.load()?)?;
            let p = o.degree(h.config());
            let (train, manifest) = h.cell_data(o.run, p)?;
            let dir = h.output_dir().join(h.cell_dir(o.run, p));
            write_labels(&dir.join("labels_true.npy"), train.true_labels())?;
            write_labels(&dir.join("labels_corrupted.npy"), train.corrupted_labels())?;
            manifest.save(&dir.join("manifest.json"))?;
            let rec = manifest.corruption.expect("corrupted manifest");
            println!("p = {p}: {} of labels changed, written to {}", rec.changed_fraction, dir.display());
        }
        Command::Train => {
            let h = Harness::new(o.load()?)?;
            let p = o.degree(h.config());
            let m = h.obtain_model(o.run, p)?;
            let last = m.trace.last().copied();
            println!(
                "{}: {} epochs, train {}, test {}, best test {}",
                m.checkpoint,
                m.trace.epochs.len(),
                last.map_or(f64::NAN, |r| r.train_accuracy),
                last.map_or(f64::NAN, |r| r.test_accuracy),
                m.trace.best_test_accuracy
            );
        }
        Command::Activations => {
            let h = Harness::new(o.load()?)?;
            let p = o.degree(h.config());
            let m = h.obtain_model(o.run, p)?;
            let (train, _) = h.cell_data(o.run, p)?;
            let test = &h.data().test;
            let rel_dir = h.cell_dir(o.run, p).join("activations");
            let dir = h.output_dir().join(&rel_dir);
            for layer in h.layers(&m.model)? {
                let name = masc::harness::runner::layer_name(&m.model, layer);
                for (split, set, labels, truth) in [
                    ("train", &train, train.corrupted_labels(), Some(train.true_labels())),
                    ("test", test, test.true_labels(), None),
                ] {
                    let stem = format!("layer{layer}_{split}");
                    write_matrix(&dir.join(format!("{stem}.npy")), &m.model.activations(set.inputs(), layer)?)?;
                    write_labels(&dir.join(format!("{stem}_labels.npy")), labels)?;
                    if let Some(t) = truth {
                        write_labels(&dir.join(format!("{stem}_true_labels.npy")), t)?;
                    }
                    let sidecar = ActivationSidecar {
                        layer_index: layer,
                        layer_name: name.clone(),
                        activations: format!("{stem}.npy").into(),
                        labels: format!("{stem}_labels.npy").into(),
                        true_labels: truth.map(|_| format!("{stem}_true_labels.npy").into()),
                        num_classes: set.num_classes(),
                        post_activation: Some(layer > 0),
                        source: m.checkpoint.clone(),
                    };
                    let path = dir.join(format!("{stem}.json"));
                    write_sidecar(&path, &sidecar)?;
                    println!("{}", path.display());
                }
            }
        }
        Command::Subspace {
            activations,
            labels,
            output,
        } => {
            let imported = import_activations(activations)?;
            let (source, l) = match labels {
                SourceArg::Corrupted => (LabelSource::Corrupted, &imported.labels),
                SourceArg::True => (
                    LabelSource::True,
                    imported.true_labels.as_ref().unwrap_or(&imported.labels),
                ),
            };
            let threshold = o.variance.unwrap_or(masc::masc_core::subspace::DEFAULT_VARIANCE_THRESHOLD);
            let params = BankParams {
                num_classes: imported.sidecar.num_classes,
                variance_threshold: threshold,
                layer_index: imported.sidecar.layer_index,
                label_source: source,
            };
            let bank = estimate_bank(&imported.activations, l, &params)?;
            save_bank(output, &bank)?;
            let cc = component_counts(&bank);
            println!(
                "{}: layer {}, k per class {:?} (mean {})",
                output.display(),
                bank.layer_index,
                cc.per_class,
                cc.mean
            );
        }
        Command::Masc {
            bank,
            activations,
            predictions,
        } => {
            let bank = load_bank(bank)?;
            let imported = import_activations(activations)?;
            let x = &imported.activations;
            let r = evaluate(x, &imported.labels, &bank, MetricKind::MascTest)?;
            println!(
                "accuracy {} on {} samples ({} degenerate)",
                r.accuracy, r.num_samples, r.num_degenerate
            );
            if let Some(t) = &imported.true_labels {
                let r = evaluate(x, t, &bank, MetricKind::MascOriginalTrain)?;
                println!("accuracy against true labels {}", r.accuracy);
            }
            if let Some(path) = predictions {
                write_prediction_dump(path, &classify_batch(x, &bank)?, &imported.labels)?;
            }
        }
        Command::Experiment => {
            let h = Harness::new(o.load()?)?;
            let reports = h.run()?;
            let dir = h.output_dir().join(h.config().experiment_kind.as_str());
            print_summary(&reports);
            println!("reports in {}", dir.display());
        }
        Command::Report { input, output, format } => {
            let reports = read_report_json(input)?;
            let format = match format {
                FormatArg::Csv => ReportFormat::Csv,
                FormatArg::Json => ReportFormat::Json,
            };
            write_reports(output, &reports, format)?;
            println!("{} layer reports written to {}", reports.len(), display(output));
        }
    }
    Ok(())
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn print_summary(reports: &[masc::harness::LayerReport]) {
    for r in reports {
        let cells: Vec<String> = r
            .metrics
            .iter()
            .map(|m| format!("{} {:.4}", m.column_name(), m.accuracy.mean))
            .collect();
        println!(
            "p{:04} t{} {:<10} model test {:.4} | {}",
            permille(r.p),
            r.variance_threshold,
            r.layer_name,
            r.model_test_accuracy,
            cells.join(", ")
        );
    }
}
