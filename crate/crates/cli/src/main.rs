use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use cvflow::bench::metrics::front_width;
use cvflow::bench::{run_experiment, ExperimentSpec, RunOptions, BUILTIN_EXPERIMENTS};
use cvflow::mesh::io::write_mesh;
use cvflow::mesh::mesh_quality_report;

#[derive(Parser)]
#[command(name = "cvflow", version, about = "Shallow water flow with solute transport on dual meshes")]
struct Cli {
    /// Worker threads (default: all cores; ignored in sequential builds).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment and write its output.
    Run {
        #[command(flatten)]
        exp: ExpArgs,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write VTK files for each output time.
        #[arg(long)]
        vtk: bool,
        /// Also write per-cell limiter values for each output time.
        #[arg(long)]
        limiters: bool,
    },
    /// Run an experiment for several dissipation blends and compare.
    Sweep {
        #[command(flatten)]
        exp: ExpArgs,
        /// Comma-separated blend values.
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.5, 1.0])]
        blends: Vec<f64>,
        /// Write the table as CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Build the mesh of an experiment and report its quality.
    Mesh {
        #[command(flatten)]
        exp: ExpArgs,
        /// Write the triangulation to this file.
        #[arg(long)]
        write: Option<PathBuf>,
    },
    /// Print an experiment as TOML, ready to edit and pass back with --config.
    Show {
        #[command(flatten)]
        exp: ExpArgs,
    },
    /// List the built-in experiments.
    List,
}

#[derive(Args)]
struct ExpArgs {
    /// Built-in experiment name.
    #[arg(required_unless_present = "config", conflicts_with = "config")]
    experiment: Option<String>,
    /// TOML experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Approximate number of cells (overrides the target cell area).
    #[arg(long)]
    cells: Option<usize>,
    /// Dissipation blend in [0, 1].
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    end_time: Option<f64>,
}

impl ExpArgs {
    fn spec(&self) -> Result<ExperimentSpec> {
        let mut spec = match (&self.experiment, &self.config) {
            (_, Some(path)) => ExperimentSpec::from_file(path).with_context(|| format!("loading {}", path.display()))?,
            (Some(name), None) => ExperimentSpec::builtin(name)?,
            (None, None) => bail!("give an experiment name or --config"),
        };
        if let Some(n) = self.cells {
            spec = spec.with_cells(n);
        }
        if let Some(nu) = self.nu {
            spec.scheme.nu = nu;
        }
        if let Some(t) = self.end_time {
            spec.scheme.end_time = t;
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let threads = cli.threads;
    cvflow::par::install(threads, move || dispatch(cli.cmd))?
}

fn dispatch(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::List => {
            for name in BUILTIN_EXPERIMENTS {
                println!("{name}");
            }
        }
        Cmd::Show { exp } => print!("{}", exp.spec()?.to_toml()?),
        Cmd::Mesh { exp, write } => {
            let spec = exp.spec()?;
            let mesh = spec.build_mesh()?;
            println!("{}", mesh_quality_report(&mesh));
            if let Some(path) = write {
                write_mesh(&path, &mesh.triangulation)?;
                println!("wrote {}", path.display());
            }
        }
        Cmd::Run { exp, out, vtk, limiters } => {
            let spec = exp.spec()?;
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            std::fs::write(out.join("experiment.toml"), spec.to_toml()?)?;
            let opts = RunOptions { out_dir: Some(out.clone()), vtk, limiters, keep_diagnostics: false };
            let res = run_experiment(&spec, &opts)?;
            println!("{}", res.quality);
            println!(
                "{}: {} steps ({} retries) to t = {}, volume drift {:.3e}, solute drift {:.3e}",
                spec.name,
                res.summary.steps,
                res.summary.retries,
                res.state.t,
                res.summary.volume_drift(),
                res.summary.mass_drift()
            );
            if let Some(e) = &res.error {
                println!("error in {}: L1 {:.4e}  L2 {:.4e}  max {:.4e}", e.field, e.l1, e.l2, e.max);
            }
            println!("output in {}", out.display());
        }
        Cmd::Sweep { exp, blends, csv } => {
            let base = exp.spec()?;
            let perimeter = match base.reference {
                Some(cvflow::bench::experiment::Reference::Disk { radius, .. }) => 2.0 * std::f64::consts::PI * radius,
                _ => 1.0,
            };
            let mut rows = vec!["nu,steps,l1,l2,max,front_width".to_string()];
            println!("{:>6} {:>7} {:>12} {:>12} {:>12} {:>12}", "nu", "steps", "L1", "L2", "max", "width");
            for nu in blends {
                let mut spec = base.clone();
                spec.scheme.nu = nu;
                let res = run_experiment(&spec, &RunOptions::default())?;
                let (l1, l2, max) = res.error.as_ref().map_or((f64::NAN, f64::NAN, f64::NAN), |e| (e.l1, e.l2, e.max));
                let width = front_width(&res.mesh, &res.state.c, 0.05, 0.95, perimeter);
                println!("{nu:>6} {:>7} {l1:>12.4e} {l2:>12.4e} {max:>12.4e} {width:>12.4e}", res.summary.steps);
                rows.push(format!("{nu},{},{l1},{l2},{max},{width}", res.summary.steps));
            }
            if let Some(path) = csv {
                std::fs::write(&path, rows.join("\n") + "\n").with_context(|| format!("writing {}", path.display()))?;
            }
        }
    }
    Ok(())
}
