//! `hflc` — generate gait data, train the controller hierarchy, and run
//! the evaluation experiments from the command line.
//!
//! Every command is deterministic: the same config and flags produce the
//! same output bytes. Exit codes: 0 success, 1 usage/validation error,
//! 2 I/O failure, 3 numerical failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process;

use clap::{Parser, Subcommand};

use hflc::biped::generate_dataset;
use hflc::config::{load_config, RunConfig};
use hflc::hierarchy::{closed_loop_walk, train_hierarchy, ControllerId};
use hflc::persist::{
    dataset_from_csv, dataset_to_csv, load_model, save_model, walk_log_to_csv, ModelFile,
};
use hflc::study::{export_error_table, export_surface, run_sweep};
use hflc::train::evaluate;
use hflc::{Error, Result};

#[derive(Parser)]
#[command(
    name = "hflc",
    version,
    about = "Hierarchical neuro-fuzzy biped controller: data synthesis, training, and experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic gait dataset and write it as CSV
    GenData {
        /// Key-value config file (defaults apply when omitted)
        #[arg(long)]
        config: Option<PathBuf>,
        /// Number of samples (overrides the config)
        #[arg(long)]
        n: Option<usize>,
        /// Dataset seed (overrides the config)
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
    /// Train all hierarchy models on a dataset and save them
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Training dataset CSV
        #[arg(long)]
        data: PathBuf,
        /// Output model file (JSON)
        #[arg(long)]
        out: PathBuf,
    },
    /// Score every model of a saved hierarchy on a dataset
    Eval {
        /// Model file produced by `train` or `sweep`
        #[arg(long)]
        model: PathBuf,
        /// Evaluation dataset CSV
        #[arg(long)]
        data: PathBuf,
        /// Also write the table to this CSV file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train at several training-set sizes and tabulate test errors
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory for errors.csv and per-size model files
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample one model's response surface over two of its inputs
    Surface {
        #[arg(long)]
        model: PathBuf,
        /// Controller name, e.g. HFLC1
        #[arg(long)]
        controller: String,
        /// Which of the controller's outputs (0-based)
        #[arg(long, default_value_t = 0)]
        output_index: usize,
        /// The two input signals to sweep, e.g. `x0,beta_left`
        #[arg(long)]
        axes: String,
        /// Pin a remaining input, e.g. `y0=0.9` (repeatable)
        #[arg(long = "fixed")]
        fixed: Vec<String>,
        /// Grid resolution per axis
        #[arg(long, default_value_t = 41)]
        resolution: usize,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
    /// Drive a saved hierarchy along the reference gait and log the walk
    Walk {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Number of gait phases to resolve
        #[arg(long, default_value_t = 50)]
        steps: usize,
        /// Output CSV path for the walk log
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version to stdout (exit 0) and usage
            // errors to stderr (exit 1)
            let code = i32::from(e.use_stderr());
            let _ = e.print();
            process::exit(code);
        }
    };
    if let Err(e) = run(cli.command) {
        eprintln!("error: {e}");
        process::exit(e.exit_code());
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::GenData { config, n, seed, out } => cmd_gen_data(config, n, seed, &out),
        Command::Train { config, data, out } => cmd_train(config, &data, &out),
        Command::Eval { model, data, out } => cmd_eval(&model, &data, out.as_deref()),
        Command::Sweep { config, out } => cmd_sweep(config, &out),
        Command::Surface { model, controller, output_index, axes, fixed, resolution, out } => {
            cmd_surface(&model, &controller, output_index, &axes, &fixed, resolution, &out)
        }
        Command::Walk { model, config, steps, out } => cmd_walk(&model, config, steps, &out),
    }
}

/// An input file the user named but that does not exist is a usage
/// error (exit 1), not an I/O failure (exit 2); exit 2 is reserved for
/// genuine filesystem trouble such as unwritable outputs.
fn require_file(path: &Path, what: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{what} not found: {}", path.display())))
    }
}

fn read_config(path: Option<PathBuf>) -> Result<RunConfig> {
    if let Some(p) = &path {
        require_file(p, "config file")?;
    }
    load_config(path.as_deref())
}

fn read_dataset(path: &Path) -> Result<Vec<hflc::biped::GaitSample>> {
    require_file(path, "dataset")?;
    let text = fs::read_to_string(path)?;
    dataset_from_csv(&text).map_err(|e| e.with_context(&path.display().to_string()))
}

fn read_model(path: &Path) -> Result<ModelFile> {
    require_file(path, "model file")?;
    load_model(path).map_err(|e| e.with_context(&path.display().to_string()))
}

fn cmd_gen_data(
    config: Option<PathBuf>,
    n: Option<usize>,
    seed: Option<u64>,
    out: &Path,
) -> Result<()> {
    let mut config = read_config(config)?;
    if let Some(n) = n {
        config.gait.n_samples = n;
    }
    if let Some(seed) = seed {
        config.gait.seed = seed;
    }
    let samples = generate_dataset(&config.params, &config.gait)?;
    fs::write(out, dataset_to_csv(&samples))?;
    println!("wrote {} rows to {}", samples.len(), out.display());
    Ok(())
}

fn cmd_train(config: Option<PathBuf>, data: &Path, out: &Path) -> Result<()> {
    let config = read_config(config)?;
    let samples = read_dataset(data)?;
    let (hierarchy, reports) = train_hierarchy(&samples, config.params, &config.train)?;

    save_model(out, &ModelFile::from_hierarchy(&hierarchy, &config.train, &reports))?;

    println!("controller,output,train_rmse");
    let n = samples.len() as f64;
    for r in &reports {
        let rmse = (r.report.final_train_se / n).sqrt();
        println!("{},{},{}", r.controller, r.output, rmse);
    }
    println!("saved {} models to {}", reports.len(), out.display());
    Ok(())
}

fn cmd_eval(model: &Path, data: &Path, out: Option<&Path>) -> Result<()> {
    let file = read_model(model)?;
    let samples = read_dataset(data)?;
    let entries = file.models.clone();
    let hierarchy = file.into_hierarchy()?;

    let mut table = String::from("controller,output,cumulative_se,rmse\n");
    for entry in &entries {
        let node = hierarchy.node(entry.controller).expect("validated hierarchy has all nodes");
        let view = hflc::hierarchy::project_dataset(&samples, &node.spec, entry.output_index)?;
        let model = hierarchy
            .model(entry.controller, entry.output_index)
            .expect("validated hierarchy has all models");
        let metrics = evaluate(model, &view).map_err(|e| {
            e.with_context(&format!("{} output '{}'", entry.controller, entry.output))
        })?;
        table.push_str(&format!(
            "{},{},{},{}\n",
            entry.controller, entry.output, metrics.cumulative_se, metrics.rmse
        ));
    }

    print!("{table}");
    if let Some(path) = out {
        fs::write(path, &table)?;
    }
    Ok(())
}

fn cmd_sweep(config: Option<PathBuf>, out: &Path) -> Result<()> {
    let config = read_config(config)?;
    let sweep = config.sweep_config();
    let result = run_sweep(&sweep)?;

    fs::create_dir_all(out)?;
    fs::write(out.join("errors.csv"), export_error_table(&result))?;
    for trained in &result.models {
        let file =
            ModelFile::from_hierarchy(&trained.hierarchy, &sweep.train_config, &trained.reports);
        save_model(&out.join(format!("model_{}.json", trained.size)), &file)?;
    }

    println!(
        "wrote errors.csv ({} entries) and {} model files to {}",
        result.entries.len(),
        result.models.len(),
        out.display()
    );
    Ok(())
}

fn cmd_surface(
    model: &Path,
    controller: &str,
    output_index: usize,
    axes: &str,
    fixed: &[String],
    resolution: usize,
    out: &Path,
) -> Result<()> {
    let file = read_model(model)?;
    let id = ControllerId::parse(controller)?;
    let entry = file
        .models
        .iter()
        .find(|m| m.controller == id && m.output_index == output_index)
        .ok_or_else(|| {
        Error::InvalidArgument(format!("model file has no {id} output #{output_index}"))
    })?;
    let fis = &entry.fis;

    let input_index = |name: &str| -> Result<usize> {
        fis.inputs.iter().position(|i| i.name == name).ok_or_else(|| {
            let available: Vec<&str> = fis.inputs.iter().map(|i| i.name.as_str()).collect();
            Error::InvalidArgument(format!(
                "{id} has no input '{name}' (inputs: {})",
                available.join(", ")
            ))
        })
    };

    let axis_names: Vec<&str> = axes.split(',').map(str::trim).collect();
    let [axis_i, axis_j] = axis_names.as_slice() else {
        return Err(Error::InvalidArgument(format!(
            "--axes expects two comma-separated input names, got '{axes}'"
        )));
    };

    let mut pinned = Vec::new();
    for pair in fixed {
        let Some((name, value)) = pair.split_once('=') else {
            return Err(Error::InvalidArgument(format!(
                "--fixed expects name=value, got '{pair}'"
            )));
        };
        let value: f64 = value.trim().parse().map_err(|_| {
            Error::InvalidArgument(format!("--fixed {name}: invalid number '{}'", value.trim()))
        })?;
        pinned.push((input_index(name.trim())?, value));
    }

    let csv = export_surface(fis, input_index(axis_i)?, input_index(axis_j)?, &pinned, resolution)?;
    fs::write(out, &csv)?;
    println!(
        "wrote {} surface points for {id} '{}' to {}",
        resolution * resolution,
        entry.output,
        out.display()
    );
    Ok(())
}

fn cmd_walk(model: &Path, config: Option<PathBuf>, steps: usize, out: &Path) -> Result<()> {
    let file = read_model(model)?;
    let hierarchy = file.into_hierarchy()?;
    let config = read_config(config)?;

    let log = closed_loop_walk(&hierarchy, &config.gait, steps)?;
    fs::write(out, walk_log_to_csv(&log))?;

    let n = log.len();
    let converged = log.iter().filter(|e| e.converged).count();
    let mean_error = log.iter().map(|e| e.com_error()).sum::<f64>() / n as f64;
    let max_error = log.iter().map(|e| e.com_error()).fold(0.0f64, f64::max);
    println!("wrote {n} rows to {}", out.display());
    println!("converged: {converged}/{n} phases ({}%)", 100.0 * converged as f64 / n as f64);
    println!("mean COM error: {mean_error} m");
    println!("max COM error: {max_error} m");
    Ok(())
}
