//! Problem loading and the per-depth training sweep.

use std::fmt::Write as _;
use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use boostqaoa::bits::BitConvention;
use boostqaoa::boost::{builtin, DesignInstance, DesignWeights, InstanceFile};
use boostqaoa::merit::{MeritRow, TTS_INFINITE};
use boostqaoa::model::{didactic_qubo, QuboModel};
use boostqaoa::oracle::{classify, enumerate, SolutionClass, Spectrum, Unconstrained};
use boostqaoa::qaoa::{QaoaProblem, TrainConfig};

use crate::error::{CliError, CliResult, Context};
use crate::plot::{self, Series, PALETTE};

/// A model ready for enumeration and training, with per-state classes.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub qubo: QuboModel,
    pub spectrum: Spectrum,
    pub design: Option<DesignInstance>,
    pub weights: Option<DesignWeights>,
}

impl Problem {
    pub fn n(&self) -> usize {
        self.qubo.n
    }

    pub fn classes(&self) -> Vec<SolutionClass> {
        self.spectrum
            .entries
            .iter()
            .map(|e| e.class.unwrap_or(SolutionClass::Infeasible))
            .collect()
    }
}

/// Reads an instance by built-in name or JSON path.
pub fn load_instance_file(target: &str) -> CliResult<InstanceFile> {
    if let Some(f) = builtin(target) {
        return Ok(f);
    }
    let path = Path::new(target);
    if !path.exists() {
        return Err(CliError::config(format!(
            "unknown instance '{target}' (expected didactic, instance1, instance2, instance3 or a JSON file)"
        )));
    }
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    InstanceFile::from_json(&text).context("parsing instance file")
}

/// Weights from a JSON file holding `M1..M6` (missing `M1..M4` default to 5).
pub fn load_weights(path: &Path) -> CliResult<DesignWeights> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let v: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let get = |k: &str, default: Option<f64>| -> CliResult<f64> {
        match v.get(k) {
            Some(x) => x
                .as_f64()
                .ok_or_else(|| CliError::config(format!("{k} in {} is not a number", path.display()))),
            None => default.ok_or_else(|| CliError::config(format!("{} lacks {k}", path.display()))),
        }
    };
    Ok(DesignWeights {
        m1: get("M1", Some(5.0))?,
        m2: get("M2", Some(5.0))?,
        m3: get("M3", Some(5.0))?,
        m4: get("M4", Some(5.0))?,
        m5: get("M5", None)?,
        m6: get("M6", None)?,
    })
}

pub fn load_problem(target: &str, weights: Option<DesignWeights>) -> CliResult<Problem> {
    if target == "didactic" {
        if weights.is_some() {
            return Err(CliError::config("the didactic model takes no penalty weights"));
        }
        let qubo = didactic_qubo();
        let spectrum = classify(&enumerate(&qubo).context("enumerating")?, &Unconstrained(&qubo)).context("classifying")?;
        return Ok(Problem {
            name: "didactic".into(),
            qubo,
            spectrum,
            design: None,
            weights: None,
        });
    }
    let file = load_instance_file(target)?;
    let design = file.instance().context("preprocessing instance")?;
    let w = weights
        .or(file.weights)
        .ok_or_else(|| CliError::config(format!("{target} carries no weights; pass --weights")))?;
    let qubo = design.build_qubo(&w).context("building QUBO")?.qubo;
    let spectrum = classify(&enumerate(&qubo).context("enumerating")?, &design).context("classifying")?;
    let name = Path::new(target)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| target.to_string());
    Ok(Problem {
        name,
        qubo,
        spectrum,
        design: Some(design),
        weights: Some(w),
    })
}

/// Parses `A..B`, `A..=B` or a single depth.
pub fn parse_p_range(text: &str) -> CliResult<RangeInclusive<usize>> {
    let bad = || CliError::config(format!("bad p range '{text}' (expected A..B or N)"));
    let (lo, hi) = match text.split_once("..") {
        Some((a, b)) => {
            let b = b.strip_prefix('=').unwrap_or(b);
            (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?)
        }
        None => {
            let p = text.trim().parse().map_err(|_| bad())?;
            (p, p)
        }
    };
    if lo == 0 || lo > hi {
        return Err(CliError::config(format!("p range '{text}' is empty or starts at 0")));
    }
    Ok(lo..=hi)
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub target: String,
    pub p_range: RangeInclusive<usize>,
    pub train: TrainConfig,
    pub weights: Option<DesignWeights>,
    /// Replace exact probabilities by shot frequencies.
    pub shots: Option<u64>,
    pub out: PathBuf,
}

impl ExperimentConfig {
    pub fn new(target: &str, p_range: RangeInclusive<usize>, out: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            target: target.to_string(),
            p_range,
            train: TrainConfig::default(),
            weights: None,
            shots: None,
            out: out.into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MeritReport {
    pub name: String,
    pub n: usize,
    pub rows: Vec<MeritRow>,
    /// Per-depth distributions, aligned with `rows`.
    pub probabilities: Vec<Vec<f64>>,
    pub classes: Vec<SolutionClass>,
}

impl MeritReport {
    pub fn merits_csv(&self) -> String {
        let mut s = String::from("p,prob_optimal,prob_feasible,cop,tts,most_probable_index,most_probable_class\n");
        for r in &self.rows {
            let tts = if r.tts == TTS_INFINITE { "inf".to_string() } else { r.tts.to_string() };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                r.p,
                r.prob_optimal,
                r.prob_feasible,
                r.cop,
                tts,
                r.most_probable_index,
                r.most_probable_class.as_str()
            );
        }
        s
    }

    pub fn probabilities_csv(&self, k: usize) -> String {
        let mut s = String::from("index,bitstring,probability,class\n");
        for (i, pr) in self.probabilities[k].iter().enumerate() {
            let _ = writeln!(s, "{i},{},{pr},{}", BitConvention::bitstring(i, self.n), self.classes[i].as_str());
        }
        s
    }

    pub fn expectations_csv(&self) -> String {
        let mut s = String::from("p,expectation\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{}", r.p, r.expectation);
        }
        s
    }
}

/// Tracks files written by one command so they can be removed on failure.
pub struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
    created_dir: bool,
}

impl Outputs {
    pub fn new(dir: &Path) -> CliResult<Self> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            written: Vec::new(),
            created_dir,
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.written
    }

    /// Deletes everything written so far.
    pub fn discard(self) {
        for p in &self.written {
            let _ = fs::remove_file(p);
        }
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

/// Runs `f`; on error removes whatever it wrote.
pub fn with_outputs<T>(dir: &Path, f: impl FnOnce(&mut Outputs) -> CliResult<T>) -> CliResult<(T, Vec<PathBuf>)> {
    let mut out = Outputs::new(dir)?;
    match f(&mut out) {
        Ok(v) => Ok((v, out.written)),
        Err(e) => {
            out.discard();
            Err(e)
        }
    }
}

/// Trains at every depth in the range and summarizes the distributions.
pub fn sweep(problem: &Problem, config: &ExperimentConfig) -> CliResult<MeritReport> {
    if config.p_range.is_empty() || *config.p_range.start() == 0 {
        return Err(CliError::config("p range is empty"));
    }
    config.train.validate().context("training configuration")?;
    let qaoa = QaoaProblem::new(&problem.qubo).context("preparing QAOA")?;
    let classes = problem.classes();
    let mut rows = Vec::new();
    let mut probabilities = Vec::new();
    for p in config.p_range.clone() {
        let trace = qaoa.train_adam(p, &config.train).context("training")?;
        let state = qaoa.state(&trace.params).context("evaluating state")?;
        let probs = match config.shots {
            None => state.probabilities(),
            Some(shots) => {
                let counts = state
                    .sample(shots, config.train.seed.wrapping_add(p as u64))
                    .context("sampling")?;
                (0..classes.len()).map(|i| counts.frequency(i)).collect()
            }
        };
        rows.push(MeritRow::from_distribution(p, trace.expectation, &probs, &classes));
        probabilities.push(probs);
    }
    Ok(MeritReport {
        name: problem.name.clone(),
        n: problem.n(),
        rows,
        probabilities,
        classes,
    })
}

pub fn class_color(c: SolutionClass) -> &'static str {
    match c {
        SolutionClass::Optimal => PALETTE[2],
        SolutionClass::Feasible => PALETTE[0],
        SolutionClass::Infeasible => PALETTE[3],
    }
}

/// The full `train` pipeline: sweep, then CSV tables and SVG plots.
pub fn run_experiment(config: &ExperimentConfig) -> CliResult<(MeritReport, Vec<PathBuf>)> {
    if config.p_range.is_empty() || *config.p_range.start() == 0 {
        return Err(CliError::config("p range is empty"));
    }
    let problem = load_problem(&config.target, config.weights)?;
    let report = sweep(&problem, config)?;
    let (_, files) = with_outputs(&config.out, |out| write_report(out, &report))?;
    Ok((report, files))
}

pub fn write_report(out: &mut Outputs, report: &MeritReport) -> CliResult<()> {
    out.write("merits.csv", &report.merits_csv())?;
    out.write("expectations.csv", &report.expectations_csv())?;
    for (k, r) in report.rows.iter().enumerate() {
        out.write(&format!("probs_p{}.csv", r.p), &report.probabilities_csv(k))?;
        let bars: Vec<(f64, &str)> = report.probabilities[k]
            .iter()
            .zip(&report.classes)
            .map(|(&pr, &c)| (pr, class_color(c)))
            .collect();
        let svg = plot::bar_chart(
            &format!("{}: measurement probabilities, p = {}", report.name, r.p),
            "basis index",
            "probability",
            &bars,
        );
        out.write(&format!("probs_p{}.svg", r.p), &svg)?;
    }
    let pts = |f: fn(&MeritRow) -> f64| report.rows.iter().map(|r| (r.p as f64, f(r))).collect::<Vec<_>>();
    let svg = plot::line_chart(
        &format!("{}: success probabilities", report.name),
        "p",
        "probability",
        &[
            Series {
                label: "P(optimal)",
                color: PALETTE[2],
                points: pts(|r| r.prob_optimal),
                scatter: false,
            },
            Series {
                label: "P(feasible)",
                color: PALETTE[0],
                points: pts(|r| r.prob_feasible),
                scatter: false,
            },
        ],
    );
    out.write("merits.svg", &svg)?;
    let svg = plot::line_chart(
        &format!("{}: figures of merit", report.name),
        "p",
        "value",
        &[
            Series {
                label: "CoP",
                color: PALETTE[0],
                points: pts(|r| r.cop),
                scatter: false,
            },
            Series {
                label: "TTS (shots)",
                color: PALETTE[1],
                points: pts(|r| if r.tts == TTS_INFINITE { f64::INFINITY } else { r.tts as f64 }),
                scatter: false,
            },
        ],
    );
    out.write("cop_tts.svg", &svg)?;
    let svg = plot::line_chart(
        &format!("{}: trained expectation", report.name),
        "p",
        "<H_C>",
        &[Series {
            label: "expectation",
            color: PALETTE[1],
            points: pts(|r| r.expectation),
            scatter: false,
        }],
    );
    out.write("expectations.svg", &svg)?;
    Ok(())
}
