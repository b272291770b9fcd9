use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use igabem::io::export::{self, ResultSummary, SampleRow, Timings};
use igabem::io::Model;
use igabem::verify::{self, Report};
use igabem::{models, Error};

#[derive(Parser)]
#[command(name = "igabem", version, about = "Isogeometric BEM for tunnels with inclusions and plasticity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Args)]
struct SolverFlags {
    /// Load increments after first yield.
    #[arg(long)]
    steps: Option<usize>,
    /// Relative change of the initial stresses that ends an iteration.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct OutputFlags {
    /// Points per sample line and tessellation density per patch.
    #[arg(long, value_name = "N")]
    sample: Option<usize>,
    /// Directory for CSV, VTK and summary files.
    #[arg(long, value_name = "DIR")]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a model file (or a bundled model by name) and write results.
    Solve {
        model: String,
        #[command(flatten)]
        solver: SolverFlags,
        #[command(flatten)]
        out: OutputFlags,
    },
    /// Compare the bundled elastic tunnel with the Kirsch solution.
    VerifyKirsch {
        #[command(flatten)]
        out: OutputFlags,
    },
    /// Compare the bundled plastic tunnel with the Duncan-Fama solution.
    VerifyDuncanfama {
        #[command(flatten)]
        solver: SolverFlags,
        #[command(flatten)]
        out: OutputFlags,
    },
    /// Print a summary of a model without solving it.
    Inspect { model: String },
}

fn load(name: &str) -> igabem::Result<Model> {
    let path = Path::new(name);
    if !path.exists() {
        if let Some(m) = models::bundled(name) {
            return m;
        }
    }
    Model::load(path)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::NonConvergence { .. }) => 3,
        Some(Error::Io(_)) | None => 1,
        Some(_) => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if let Some(Error::NonConvergence { history, .. }) = e.downcast_ref::<Error>() {
                eprintln!("change history: {history:?}");
            }
            ExitCode::from(exit_code(&e))
        }
    }
}

fn apply(model: &mut Model, flags: &SolverFlags) -> igabem::Result<()> {
    if let Some(s) = flags.steps {
        model.solver.steps = s;
    }
    if let Some(t) = flags.tol {
        model.solver.tol = t;
    }
    model.validate()
}

fn finish(report: &Report, out: &OutputFlags) -> anyhow::Result<bool> {
    print!("{}", report.table());
    if let Some(dir) = &out.output {
        let path = dir.join("verification.json");
        export::write(&path, &serde_json::to_string_pretty(report)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(report.pass())
}

fn run(cmd: Command) -> anyhow::Result<bool> {
    match cmd {
        Command::Solve { model, solver, out } => {
            let mut m = load(&model)?;
            apply(&mut m, &solver)?;
            for w in m.warnings() {
                eprintln!("warning: {w}");
            }
            solve(&m, &out)?;
            Ok(true)
        }
        Command::VerifyKirsch { out } => finish(&verify::kirsch(out.sample.unwrap_or(21))?, &out),
        Command::VerifyDuncanfama { solver, out } => {
            let mut m = Model::from_json(models::TUNNEL_PLASTIC)?;
            apply(&mut m, &solver)?;
            let (report, run) = verify::duncan_fama_check(Some(m.solver))?;
            println!("first yield factor {:.4}, iterations per increment {:?}", run.first_yield_factor, run.iterations);
            finish(&report, &out)
        }
        Command::Inspect { model } => {
            let m = load(&model)?;
            inspect(&m)?;
            Ok(true)
        }
    }
}

fn solve(m: &Model, out: &OutputFlags) -> anyhow::Result<()> {
    let t = Instant::now();
    let analysis = m.build()?;
    let ops = analysis.operators()?;
    let assembly_s = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let sol = analysis.solve(&ops, &m.solver)?;
    let solve_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let mut rows = Vec::new();
    for line in &m.samples {
        let pts = line.points(out.sample.unwrap_or(line.count));
        for (i, (p, u)) in pts.iter().zip(analysis.displacement_at(&sol, &pts)?).enumerate() {
            rows.push(SampleRow { line: line.name.clone(), index: i, position: *p, displacement: u });
        }
    }
    let sampling_s = t.elapsed().as_secs_f64();
    let summary = ResultSummary {
        name: m.name.clone(),
        units: m.units.clone(),
        n_dof: analysis.mesh.n_dof(),
        n_grid: analysis.n_grid(),
        first_yield_factor: sol.driver.lambda,
        iterations: sol.driver.iterations.clone(),
        history: sol.driver.history.clone(),
        boundary_parameters: sol.boundary_parameters(),
        timings: Timings { assembly_s, solve_s, sampling_s },
    };
    println!(
        "{}: {} dof, {} grid points, first yield factor {:.4}, iterations {:?}",
        m.name, summary.n_dof, summary.n_grid, summary.first_yield_factor, summary.iterations
    );
    println!("assembly {assembly_s:.2} s, solve {solve_s:.2} s, sampling {sampling_s:.2} s (units: {})", m.units);
    let dir = out.output.clone().unwrap_or_else(|| PathBuf::from("results"));
    let write = |name: &str, text: &str| -> anyhow::Result<()> {
        let path = dir.join(name);
        export::write(&path, text).with_context(|| format!("writing {}", path.display()))
    };
    write("samples.csv", &export::samples_csv(&rows))?;
    write("grid.csv", &export::grid_csv(&analysis, &sol))?;
    write("results.vtk", &export::vtk(&analysis, &sol, out.sample.unwrap_or(8))?)?;
    write("summary.json", &serde_json::to_string_pretty(&summary)?)?;
    println!("results written to {}", dir.display());
    Ok(())
}

fn inspect(m: &Model) -> anyhow::Result<()> {
    println!("model {} (version {}, units: {})", m.name, m.version, m.units);
    println!("elastic E = {}, nu = {}; virgin stress {:?}", m.elastic.young, m.elastic.poisson, m.virgin_stress);
    let analysis = m.build()?;
    println!("{} patches, {} boundary nodes, {} dof", m.patches.len(), analysis.mesh.n_nodes(), analysis.mesh.n_dof());
    for p in &analysis.mesh.patches {
        let kind = if p.is_infinite() { "infinite" } else { "finite" };
        println!("  {:<14} {:<9} {} field functions", p.label, kind, p.n_field());
    }
    for (d, inc) in m.inclusions.iter().zip(&analysis.inclusions) {
        println!("  inclusion {:<12} {} grid points", d.label(), inc.n_nodes());
    }
    let on_wall = analysis.grid.iter().filter(|g| g.boundary.is_some()).count();
    println!("{} grid points, {} on the excavation surface", analysis.n_grid(), on_wall);
    println!(
        "solver: {} steps, tol {}, max {} iterations, {:?} path",
        m.solver.steps, m.solver.tol, m.solver.max_iter, m.solver.path
    );
    for w in m.warnings() {
        println!("warning: {w}");
    }
    Ok(())
}
