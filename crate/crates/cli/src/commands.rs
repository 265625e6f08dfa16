use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use boostqaoa::circuit::{build_qaoa_circuit, decompose, export_qasm, Circuit};
use boostqaoa::oracle::{ground_states, separation_report, SolutionClass};
use boostqaoa::qaoa::{GridAxis, QaoaProblem, TrainConfig};
use boostqaoa::tuner::{decompose_energies, tune, DEFAULT_WEIGHT_BOUND};

use crate::error::{CliError, CliResult, Context};
use crate::experiment::{
    class_color, load_problem, load_weights, parse_p_range, run_experiment, sweep, with_outputs, write_report,
    ExperimentConfig, Outputs, Problem,
};
use crate::plot::{self, Series};

#[derive(Debug, Parser)]
#[command(name = "boostqaoa", version, about = "QAOA experiments on boost-converter filter selection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Seed for random initialization and shot sampling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for enumeration and landscape scans.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate and classify every basis state.
    Spectrum {
        instance: String,
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Choose M5 and M6 by linear programming.
    Tune {
        instance: String,
        /// Upper bound on M5 and M6.
        #[arg(long, default_value_t = DEFAULT_WEIGHT_BOUND)]
        bound: f64,
    },
    /// Train QAOA at each depth and report figures of merit.
    Train {
        instance: String,
        #[arg(long, default_value = "1..15")]
        p: String,
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Report shot frequencies instead of exact probabilities.
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long)]
        iters: Option<usize>,
    },
    /// Expectation over a p = 1 grid on [-pi/4, pi/4]^2.
    Landscape {
        instance: String,
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Build the trained ansatz, count gates and export OpenQASM.
    Circuit {
        instance: String,
        #[arg(long, default_value_t = 1)]
        p: usize,
        /// Lower to {H, RZ, CX}.
        #[arg(long)]
        decompose: bool,
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Walk through the four-variable example end to end.
    Didactic,
}

fn weights_arg(path: &Option<PathBuf>) -> CliResult<Option<boostqaoa::boost::DesignWeights>> {
    path.as_deref().map(load_weights).transpose()
}

/// Executes a parsed command; returns the files written.
pub fn run(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    if let Some(t) = cli.common.threads {
        if t == 0 {
            return Err(CliError::config("--threads must be at least 1"));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let out = &cli.common.out;
    let seed = cli.common.seed;
    match &cli.command {
        Command::Spectrum { instance, weights } => {
            let problem = load_problem(instance, weights_arg(weights)?)?;
            Ok(with_outputs(out, |o| write_spectrum(o, &problem))?.1)
        }
        Command::Tune { instance, bound } => {
            let problem = load_problem(instance, None)?;
            let (Some(design), Some(w)) = (&problem.design, &problem.weights) else {
                return Err(CliError::config("tuning needs a design instance"));
            };
            let result = tune(design, w, *bound).context("tuning weights")?;
            let json = result.to_json().context("serializing")?;
            let (_, files) = with_outputs(out, |o| {
                o.write("tune.json", &(json + "\n"))?;
                Ok(())
            })?;
            println!(
                "M5 = {:.6}, M6 = {:.6}, gap = {:.6}, separated = {}",
                result.m5, result.m6, result.gap, result.separation_ok
            );
            Ok(files)
        }
        Command::Train {
            instance,
            p,
            weights,
            shots,
            iters,
        } => {
            let mut cfg = ExperimentConfig::new(instance, parse_p_range(p)?, out);
            cfg.weights = weights_arg(weights)?;
            cfg.shots = *shots;
            cfg.train.seed = seed;
            if let Some(it) = iters {
                cfg.train.max_iters = *it;
            }
            let (report, files) = run_experiment(&cfg)?;
            for r in &report.rows {
                println!(
                    "p={:>2}  <H>={:>10.4}  P(opt)={:.4}  P(feas)={:.4}  most probable |{}> ({})",
                    r.p,
                    r.expectation,
                    r.prob_optimal,
                    r.prob_feasible,
                    r.most_probable_index,
                    r.most_probable_class.as_str()
                );
            }
            Ok(files)
        }
        Command::Landscape {
            instance,
            points,
            weights,
        } => {
            if *points == 0 {
                return Err(CliError::config("--points must be at least 1"));
            }
            let problem = load_problem(instance, weights_arg(weights)?)?;
            Ok(with_outputs(out, |o| write_landscape(o, &problem, *points).map(|_| ()))?.1)
        }
        Command::Circuit {
            instance,
            p,
            decompose: lower,
            weights,
        } => {
            if *p == 0 {
                return Err(CliError::config("--p must be at least 1"));
            }
            let problem = load_problem(instance, weights_arg(weights)?)?;
            let cfg = TrainConfig {
                seed,
                ..TrainConfig::default()
            };
            Ok(with_outputs(out, |o| write_circuit(o, &problem, *p, *lower, &cfg).map(|_| ()))?.1)
        }
        Command::Didactic => {
            let problem = load_problem("didactic", None)?;
            let mut cfg = ExperimentConfig::new("didactic", 1..=3, out);
            cfg.train.seed = seed;
            let (_, files) = with_outputs(out, |o| {
                write_spectrum(o, &problem)?;
                let ising = problem.qubo.to_ising();
                let couplings: Vec<_> = ising.r.iter().map(|(&(i, j), &r)| json!([i, j, r])).collect();
                let model = json!({
                    "qubo": { "linear": problem.qubo.c, "offset": problem.qubo.offset },
                    "ising": { "offset": ising.offset, "h": ising.h, "couplings": couplings },
                });
                o.write("ising.json", &(serde_json::to_string_pretty(&model).expect("plain json") + "\n"))?;
                let report = sweep(&problem, &cfg)?;
                write_report(o, &report)?;
                for r in &report.rows {
                    println!("p={}  <H>={:.4}  P(1001)={:.4}", r.p, r.expectation, r.prob_optimal);
                }
                write_landscape(o, &problem, 101)?;
                write_circuit(o, &problem, 1, true, &cfg.train)?;
                Ok(())
            })?;
            Ok(files)
        }
    }
}

fn write_spectrum(o: &mut Outputs, problem: &Problem) -> CliResult<()> {
    let sp = &problem.spectrum;
    o.write("spectrum.csv", &sp.to_csv())?;
    let sorted = sp.sorted_by_energy();
    let series = [SolutionClass::Optimal, SolutionClass::Feasible, SolutionClass::Infeasible].map(|class| Series {
        label: class.as_str(),
        color: class_color(class),
        points: sorted
            .entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.class == Some(class))
            .map(|(rank, e)| (rank as f64, e.energy))
            .collect(),
        scatter: true,
    });
    let svg = plot::line_chart(
        &format!("{}: energy spectrum", problem.name),
        "rank",
        "energy",
        &series,
    );
    o.write("spectrum.svg", &svg)?;
    let gs = ground_states(sp);
    match separation_report(sp) {
        Ok(rep) => println!(
            "{}: {} states, ground state(s) {:?}, max feasible {:.6}, min infeasible {:.6}, gap {:.6}",
            problem.name,
            sp.entries.len(),
            gs,
            rep.max_feasible,
            rep.min_infeasible,
            rep.gap
        ),
        Err(_) => println!("{}: {} states, ground state(s) {:?}", problem.name, sp.entries.len(), gs),
    }
    if let (Some(design), Some(w)) = (&problem.design, &problem.weights) {
        let dec = decompose_energies(design, w).context("decomposing energies")?;
        let mut s = String::from("index,e0,e1,e2,class\n");
        for e in &dec.entries {
            let _ = writeln!(s, "{},{},{},{},{}", e.index, e.e0, e.e1, e.e2, e.class.as_str());
        }
        o.write("decomposition.csv", &s)?;
    }
    Ok(())
}

fn write_landscape(o: &mut Outputs, problem: &Problem, points: usize) -> CliResult<(f64, f64, f64)> {
    let qaoa = QaoaProblem::new(&problem.qubo).context("preparing QAOA")?;
    let axis = GridAxis::quarter_pi(points);
    let land = qaoa.landscape_scan(1, axis, axis).context("scanning landscape")?;
    o.write("landscape.csv", &land.to_csv())?;
    let svg = plot::heatmap(
        &format!("{}: p = 1 landscape", problem.name),
        "beta",
        "gamma",
        &land.betas,
        &land.gammas,
        &land.values,
    );
    o.write("landscape.svg", &svg)?;
    let min = land.minimum();
    println!("grid minimum {:.6} at beta = {:.6}, gamma = {:.6}", min.2, min.0, min.1);
    Ok(min)
}

fn write_circuit(
    o: &mut Outputs,
    problem: &Problem,
    p: usize,
    lower: bool,
    cfg: &TrainConfig,
) -> CliResult<Circuit> {
    let qaoa = QaoaProblem::new(&problem.qubo).context("preparing QAOA")?;
    let trace = qaoa.train_adam(p, cfg).context("training")?;
    let ising = problem.qubo.to_ising();
    let mut circuit = build_qaoa_circuit(&ising, &trace.params).context("building circuit")?;
    if lower {
        circuit = decompose(&circuit);
    }
    o.write("ansatz.qasm", &export_qasm(&circuit))?;
    let mut counts = serde_json::Map::new();
    for name in ["h", "x", "rx", "rz", "rzz", "cx"] {
        let c = circuit.count(name);
        if c > 0 {
            counts.insert(name.into(), c.into());
        }
    }
    let stats = json!({
        "instance": problem.name,
        "n": circuit.num_qubits(),
        "p": p,
        "decomposed": lower,
        "gates": circuit.gates().len(),
        "depth": circuit.depth(),
        "two_qubit_count": circuit.two_qubit_count(),
        "counts": counts,
        "beta": trace.params.beta,
        "gamma": trace.params.gamma,
        "expectation": trace.expectation,
    });
    o.write("stats.json", &(serde_json::to_string_pretty(&stats).expect("plain json") + "\n"))?;
    println!(
        "{} qubits, {} gates, depth {}, {} two-qubit gates",
        circuit.num_qubits(),
        circuit.gates().len(),
        circuit.depth(),
        circuit.two_qubit_count()
    );
    Ok(circuit)
}
