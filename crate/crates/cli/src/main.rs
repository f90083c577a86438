use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use pawn_meta::meta::{
    build_meta_design, influential_inputs, meta_sensitivity, pool, ranking_screening_report, run_meta,
    Pooling, MIN_META_ROWS,
};
use pawn_meta::report::{
    convergence_csv, indices_csv, meta_result_csv, meta_sensitivity_csv, overlap_csv, summary_markdown,
    with_config,
};
use pawn_meta::runs::{compute_indices, convergence_scan, RunSpec};
use pawn_meta::{FunctionSpec, Setting};

/// Falls back to this directory when neither `--out` nor a config file sets one.
const OUT_ENV: &str = "PAWN_META_OUT";

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_OTHER: u8 = 1;

#[derive(Parser)]
#[command(name = "pawn-meta", version, about = "PAWN and Sobol' sensitivity analysis and its meta-analysis")]
struct Cli {
    /// Plain-text `key = value` file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute PAWN or Sobol' indices of one benchmark function.
    ComputeIndices(Flags),
    /// Run the meta-experiment and write results, meta-sensitivity and overlaps.
    RunMeta(Flags),
    /// Overlap of the index distributions only (no meta-level indices).
    Overlap(Flags),
    /// Index mean and spread over seeds for a list of sample sizes.
    ConvergenceScan(Flags),
}

#[derive(Args, Default)]
struct Flags {
    /// Benchmark: liu, ishigami, sobol_g, morris; run-meta also takes a comma list or `all`.
    #[arg(long)]
    function: Option<String>,
    /// pawn, sobol_first, sobol_total or sobol.
    #[arg(long)]
    method: Option<String>,
    /// Model-run budget.
    #[arg(long = "N")]
    sample_size: Option<usize>,
    /// Conditioning intervals (PAWN).
    #[arg(long = "n")]
    intervals: Option<usize>,
    /// 1..=3: PAWN summary (mean, median, max) or total-order estimator.
    #[arg(long)]
    theta: Option<u8>,
    #[arg(long)]
    seed: Option<u64>,
    /// max_in_theta, max_not_in_theta, optimum or total_order_star.
    #[arg(long)]
    setting: Option<String>,
    /// Rows of each meta design matrix.
    #[arg(long)]
    rows: Option<usize>,
    /// Worker threads for meta rows; defaults to the available cores.
    #[arg(long)]
    parallelism: Option<usize>,
    /// Highest meta-level index order: 0 (none), 1 (first and total), 2 or 3.
    #[arg(long)]
    orders: Option<usize>,
    /// Replicates per sample size (convergence-scan).
    #[arg(long)]
    reps: Option<usize>,
    /// Comma-separated sample sizes (convergence-scan).
    #[arg(long)]
    sizes: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A bad flag, file entry or value; maps to the usage exit status.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

const FILE_KEYS: [&str; 13] = [
    "function", "method", "N", "n", "theta", "seed", "setting", "rows", "parallelism", "orders", "reps", "sizes",
    "out",
];

fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("{}:{}: expected key = value", path.display(), no + 1)))?;
        let k = k.trim();
        if !FILE_KEYS.contains(&k) {
            return Err(usage(format!("{}:{}: unknown key '{k}'", path.display(), no + 1)));
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Flag values layered over config-file values.
struct Resolved {
    flags: Flags,
    file: BTreeMap<String, String>,
}

impl Resolved {
    fn get<T: FromStr>(&self, key: &str, flag: &Option<T>) -> Result<Option<T>>
    where
        T: Clone,
        T::Err: fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(Some(v.clone()));
        }
        match self.file.get(key) {
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| usage(format!("invalid value '{raw}' for {key}: {e}"))),
            None => Ok(None),
        }
    }

    fn required<T: FromStr + Clone>(&self, key: &str, flag: &Option<T>) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        self.get(key, flag)?
            .ok_or_else(|| usage(format!("--{key} is required")))
    }

    fn or<T: FromStr + Clone>(&self, key: &str, flag: &Option<T>, default: T) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        Ok(self.get(key, flag)?.unwrap_or(default))
    }

    fn function(&self) -> Result<FunctionSpec> {
        let name: String = self.required("function", &self.flags.function)?;
        Ok(name.parse()?)
    }

    fn functions(&self) -> Result<Vec<FunctionSpec>> {
        let names: String = self.required("function", &self.flags.function)?;
        if names == "all" {
            return Ok(FunctionSpec::ALL.to_vec());
        }
        let mut out = Vec::new();
        for name in names.split(',') {
            let f: FunctionSpec = name.trim().parse()?;
            if out.contains(&f) {
                return Err(usage(format!("function '{f}' listed twice")));
            }
            out.push(f);
        }
        Ok(out)
    }

    fn out_dir(&self) -> Result<PathBuf> {
        if let Some(p) = self.get("out", &self.flags.out)? {
            return Ok(p);
        }
        Ok(std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".")))
    }

    fn seed(&self) -> Result<u64> {
        self.or("seed", &self.flags.seed, 0)
    }

    fn parallelism(&self) -> Result<usize> {
        let default = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
        let p = self.or("parallelism", &self.flags.parallelism, default)?;
        if p == 0 {
            return Err(usage("--parallelism must be at least 1"));
        }
        Ok(p)
    }

    fn run_spec(&self, sample_size: usize) -> Result<RunSpec> {
        let method: String = self.or("method", &self.flags.method, "pawn".into())?;
        Ok(RunSpec {
            method: method.parse()?,
            sample_size,
            intervals: self.or("n", &self.flags.intervals, 10)?,
            theta: self.or("theta", &self.flags.theta, 1)?,
            seed: self.seed()?,
        })
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn spec_config(command: &str, f: FunctionSpec, spec: &RunSpec) -> Vec<(&'static str, String)> {
    vec![
        ("command", command.to_string()),
        ("function", f.to_string()),
        ("method", spec.method.to_string()),
        ("N", spec.sample_size.to_string()),
        ("n", spec.intervals.to_string()),
        ("theta", spec.theta.to_string()),
        ("seed", spec.seed.to_string()),
    ]
}

fn cmd_compute_indices(r: &Resolved) -> Result<()> {
    let f = r.function()?;
    let n = r.required("N", &r.flags.sample_size)?;
    let spec = r.run_spec(n)?;
    let rows = compute_indices(&f, &spec)?;
    let dir = r.out_dir()?;
    prepare_dir(&dir)?;
    write_file(&dir, "indices.csv", &with_config(&spec_config("compute-indices", f, &spec), &indices_csv(&rows)))
}

fn cmd_convergence_scan(r: &Resolved) -> Result<()> {
    let f = r.function()?;
    let sizes_raw: String = r.required("sizes", &r.flags.sizes)?;
    let sizes = sizes_raw
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|e| usage(format!("invalid size '{s}': {e}"))))
        .collect::<Result<Vec<_>>>()?;
    let reps = r.or("reps", &r.flags.reps, 10)?;
    if reps == 0 {
        return Err(usage("--reps must be at least 1"));
    }
    let spec = r.run_spec(0)?;
    let rows = convergence_scan(&f, &spec, &sizes, reps)?;
    let mut config = spec_config("convergence-scan", f, &spec);
    config.retain(|(k, _)| *k != "N");
    config.push(("sizes", sizes_raw.replace(' ', "")));
    config.push(("reps", reps.to_string()));
    let dir = r.out_dir()?;
    prepare_dir(&dir)?;
    write_file(&dir, "convergence.csv", &with_config(&config, &convergence_csv(&rows)))
}

struct MetaArgs {
    setting: Setting,
    functions: Vec<FunctionSpec>,
    rows: usize,
    seed: u64,
    parallelism: usize,
    orders: usize,
}

impl MetaArgs {
    fn resolve(r: &Resolved, default_orders: usize) -> Result<Self> {
        let setting: String = r.required("setting", &r.flags.setting)?;
        let rows = r.or("rows", &r.flags.rows, 1024)?;
        if rows < MIN_META_ROWS {
            return Err(usage(format!("--rows must be at least {MIN_META_ROWS}")));
        }
        Ok(Self {
            setting: setting.parse()?,
            functions: r.functions()?,
            rows,
            seed: r.seed()?,
            parallelism: r.parallelism()?,
            orders: r.or("orders", &r.flags.orders, default_orders)?,
        })
    }

    /// Config recorded in every CSV. Parallelism is left out on purpose:
    /// outputs do not depend on it.
    fn config(&self, command: &str) -> Vec<(&'static str, String)> {
        let functions: Vec<&str> = self.functions.iter().map(|f| f.key()).collect();
        vec![
            ("command", command.to_string()),
            ("setting", self.setting.to_string()),
            ("function", functions.join(";")),
            ("rows", self.rows.to_string()),
            ("orders", self.orders.to_string()),
            ("seed", self.seed.to_string()),
        ]
    }
}

fn cmd_meta(r: &Resolved, overlap_only: bool) -> Result<()> {
    let args = MetaArgs::resolve(r, if overlap_only { 0 } else { 1 })?;
    // Validate the design before spending any model runs.
    build_meta_design(args.setting, args.rows, args.orders)?;
    let dir = r.out_dir()?;
    prepare_dir(&dir)?;

    let mut results = Vec::new();
    let mut reports = Vec::new();
    for &f in &args.functions {
        let meta = run_meta(args.setting, &f, args.rows, args.seed, args.parallelism, args.orders)?;
        reports.push(ranking_screening_report(&meta, Some(&influential_inputs(f)))?);
        results.push(meta);
    }
    let matrices: Vec<_> = results
        .iter()
        .zip(&reports)
        .map(|(m, rep)| (m.function.clone(), rep.overlap.clone()))
        .collect();
    let command = if overlap_only { "overlap" } else { "run-meta" };
    let config = args.config(command);
    write_file(&dir, "overlap.csv", &with_config(&config, &overlap_csv(&matrices)))?;

    let mut pooled = Vec::new();
    if !overlap_only {
        let sens = if args.orders > 0 {
            results.iter().map(meta_sensitivity).collect::<pawn_meta::Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        if !sens.is_empty() {
            pooled = pool(&sens, Pooling::Equal);
            pooled.extend(pool(&sens, Pooling::ByFunction));
        }
        write_file(&dir, "meta_result.csv", &with_config(&config, &meta_result_csv(&results)))?;
        write_file(&dir, "meta_sensitivity.csv", &with_config(&config, &meta_sensitivity_csv(&sens, &pooled)))?;
    }
    let labels: Vec<String> = args.setting.parameter_labels().iter().map(|s| s.to_string()).collect();
    write_file(&dir, "summary.md", &summary_markdown(&results, &reports, &pooled, &labels))
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => read_config_file(p)?,
        None => BTreeMap::new(),
    };
    let (command, flags) = match cli.command {
        Command::ComputeIndices(f) => ("compute-indices", f),
        Command::RunMeta(f) => ("run-meta", f),
        Command::Overlap(f) => ("overlap", f),
        Command::ConvergenceScan(f) => ("convergence-scan", f),
    };
    let r = Resolved { flags, file };
    match command {
        "compute-indices" => cmd_compute_indices(&r),
        "run-meta" => cmd_meta(&r, false),
        "overlap" => cmd_meta(&r, true),
        _ => cmd_convergence_scan(&r),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return EXIT_USAGE;
    }
    match err.downcast_ref::<pawn_meta::Error>() {
        Some(e) if e.is_usage() => EXIT_USAGE,
        Some(_) => EXIT_NUMERIC,
        None => EXIT_OTHER,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&usage("x")), EXIT_USAGE);
        assert_eq!(exit_code(&pawn_meta::Error::Config("x".into()).into()), EXIT_USAGE);
        assert_eq!(exit_code(&pawn_meta::Error::DegenerateOutput.into()), EXIT_NUMERIC);
        assert_eq!(exit_code(&anyhow::anyhow!("io")), EXIT_OTHER);
    }

    #[test]
    fn flags_override_file() {
        let mut file = BTreeMap::new();
        file.insert("seed".to_string(), "7".to_string());
        file.insert("rows".to_string(), "64".to_string());
        let r = Resolved {
            flags: Flags {
                seed: Some(3),
                ..Flags::default()
            },
            file,
        };
        assert_eq!(r.seed().unwrap(), 3);
        assert_eq!(r.or("rows", &r.flags.rows, 1024).unwrap(), 64);
    }
}
