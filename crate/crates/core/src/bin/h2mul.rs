use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use h2mul::bench::{emit_csv, run_level, write_csv, BenchConfig};
use h2mul::{
    assemble_h2, build_block_tree, build_cluster_tree, build_sphere_mesh, multiply, InterpolationScheme,
    LaplaceSingleLayer, TruncationControl,
};

#[derive(Parser)]
#[command(name = "h2mul", version, about = "Adaptive multiplication of H²-matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Square the single-layer matrix on spheres and report timings, memory and error.
    Bench {
        /// Sphere refinement levels (8 * 4^level triangles).
        #[arg(long, value_delimiter = ',', default_value = "3,4,5")]
        levels: Vec<usize>,
        #[arg(long, default_value_t = 1e-4)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        /// Chebyshev points per axis.
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long, default_value_t = 16)]
        leaf_size: usize,
        #[arg(long, default_value_t = 0.25)]
        theta: f64,
        #[arg(long, default_value_t = 10)]
        power_steps: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Compare against the dense product (small levels only).
        #[arg(long)]
        dense_check: bool,
        /// CSV output; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the sphere mesh of a level as text.
    Mesh {
        #[arg(long)]
        level: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Square the single-layer matrix of one level and store the result in binary form.
    Square {
        #[arg(long)]
        level: usize,
        #[arg(long, default_value_t = 1e-4)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long, default_value_t = 16)]
        leaf_size: usize,
        #[arg(long, default_value_t = 0.25)]
        theta: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn bench(config: BenchConfig, out: Option<PathBuf>) -> h2mul::Result<bool> {
    config.validate()?;
    let mut rows = Vec::new();
    eprintln!("{:>8} {:>10} {:>10} {:>10} {:>12} {:>6}", "n", "row/s", "col/s", "mem/MB", "rel. error", "rank");
    for &level in &config.levels {
        let row = run_level(&config, level)?.row;
        eprintln!(
            "{:>8} {:>10.3} {:>10.3} {:>10.2} {:>12.3e} {:>6}",
            row.n, row.row_s, row.col_s, row.mem_mb, row.rel_error, row.max_rank
        );
        if let Some(e) = row.dense_error {
            eprintln!("{:>8} dense relative error {e:.3e}", "");
        }
        rows.push(row);
    }
    match out {
        Some(path) => emit_csv(&rows, &path)?,
        None => write_csv(&rows, io::stdout().lock())?,
    }
    let limit = 2.0 * config.eps;
    let mut ok = true;
    for r in &rows {
        if !(r.rel_error <= limit) {
            eprintln!("error: n = {} has estimated relative error {:.3e} above {limit:.1e}", r.n, r.rel_error);
            ok = false;
        }
    }
    Ok(ok)
}

#[allow(clippy::too_many_arguments)]
fn square(level: usize, eps: f64, eta: f64, order: usize, leaf_size: usize, theta: f64, out: PathBuf) -> h2mul::Result<()> {
    let mesh = build_sphere_mesh(level);
    let tree = Arc::new(build_cluster_tree(&mesh, leaf_size)?);
    let blocks = Arc::new(build_block_tree(tree.clone(), tree, eta)?);
    let g = assemble_h2(&mesh, blocks.clone(), &LaplaceSingleLayer, &InterpolationScheme::new(order)?)?;
    let z = multiply(&g, &g, &blocks, &TruncationControl::new(eps, theta)?)?;
    z.write_binary(BufWriter::new(File::create(&out)?))?;
    eprintln!("wrote {}x{} matrix to {}", z.nrows(), z.ncols(), out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bench { levels, eps, eta, order, leaf_size, theta, power_steps, seed, dense_check, out } => {
            let config = BenchConfig { levels, leaf_size, order, eta, eps, theta, power_steps, seed, dense_check };
            bench(config, out).map(|ok| if ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Mesh { level, out } => build_sphere_mesh(level)
            .write_text(BufWriter::new(match File::create(&out) {
                Ok(f) => f,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::FAILURE;
                }
            }))
            .map(|_| ExitCode::SUCCESS),
        Command::Square { level, eps, eta, order, leaf_size, theta, out } => {
            square(level, eps, eta, order, leaf_size, theta, out).map(|_| ExitCode::SUCCESS)
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
