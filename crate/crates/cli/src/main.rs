use std::collections::hash_map::RandomState;
use std::fs::File;
use std::hash::{BuildHasher, Hasher};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use msboot::analysis::{
    analyze, analyze_table, write_fit_csv, write_fit_json, AnalysisOptions, Ridge,
};
use msboot::experiment::{
    coverage, curve_rows, observation, reference_rows, table2_row, write_coverage_csv,
    write_curve_csv, write_table2_csv, BuiltinKind, CoverageOptions,
};
use msboot::pvalue::{write_reports_csv, Method};
use msboot::{
    solve_on_axis, BootstrapTable, Error, ErrorKind, Mode, Model, Point, Result, ScalePlan,
};

mod config;

use config::{parse_list, ConfigFile};

const DEFAULT_B: usize = 10_000;

#[derive(Parser, Debug)]
#[command(
    name = "msboot",
    version,
    about = "Multiscale bootstrap p-values for the problem of regions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bootstrap table, fits and p-values for one observation.
    Analyze(RunArgs),
    /// Rows of p-values (percent) for the built-in examples.
    Table2 {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated exact p-values to place the observation at.
        #[arg(long)]
        targets: Option<String>,
        /// Comma-separated sample sizes.
        #[arg(long)]
        sizes: Option<String>,
    },
    /// z-values of the one-step cells against 1/tau, with the fitted curve.
    Curve {
        #[command(flatten)]
        run: RunArgs,
        /// Points on the fitted-curve grid.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Rejection frequency of one method at a boundary parameter.
    Coverage {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        level: Option<f64>,
        #[arg(long)]
        trials: Option<usize>,
    },
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// key=value file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// spherical | exponential (table2: normal, exponential or all).
    #[arg(long)]
    model: Option<String>,
    /// Dimension of the spherical model.
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    n: Option<f64>,
    #[arg(long = "xbar-norm2")]
    xbar_norm2: Option<f64>,
    /// Comma-separated sample mean.
    #[arg(long, allow_hyphen_values = true)]
    xbar: Option<String>,
    /// Place the observation on the first axis with this exact p-value.
    #[arg(long)]
    target: Option<f64>,
    /// mc | oracle.
    #[arg(long)]
    mode: Option<String>,
    /// Replicates per cell (nominal B in oracle mode).
    #[arg(long)]
    b: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of p0,abc,p1,p2,p3,exact, or all.
    #[arg(long)]
    methods: Option<String>,
    /// zero | default | six comma-separated weights.
    #[arg(long)]
    ridge: Option<String>,
    /// CSV with columns tau1[,tau2,tau3] replacing the default scale plan.
    #[arg(long = "scales-file")]
    scales_file: Option<PathBuf>,
    /// Import a count table instead of resampling.
    #[arg(long)]
    counts: Option<PathBuf>,
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

const CONFIG_KEYS: &[&str] = &[
    "model",
    "p",
    "n",
    "xbar-norm2",
    "xbar",
    "target",
    "mode",
    "b",
    "seed",
    "methods",
    "ridge",
    "scales-file",
    "counts",
    "out-dir",
    "workers",
    "targets",
    "sizes",
    "grid",
    "method",
    "level",
    "trials",
];

/// Flags merged with the optional config file.
struct Resolved {
    cfg: ConfigFile,
    args: RunArgs,
}

impl Resolved {
    fn new(args: RunArgs) -> Result<Self> {
        let cfg = match &args.config {
            Some(path) => ConfigFile::load(path, CONFIG_KEYS)?,
            None => ConfigFile::default(),
        };
        let a = RunArgs {
            model: cfg.pick(args.model, "model")?,
            p: cfg.pick(args.p, "p")?,
            n: cfg.pick(args.n, "n")?,
            xbar_norm2: cfg.pick(args.xbar_norm2, "xbar-norm2")?,
            xbar: cfg.pick(args.xbar, "xbar")?,
            target: cfg.pick(args.target, "target")?,
            mode: cfg.pick(args.mode, "mode")?,
            b: cfg.pick(args.b, "b")?,
            seed: cfg.pick(args.seed, "seed")?,
            methods: cfg.pick(args.methods, "methods")?,
            ridge: cfg.pick(args.ridge, "ridge")?,
            scales_file: cfg.pick(args.scales_file, "scales-file")?,
            counts: cfg.pick(args.counts, "counts")?,
            out_dir: cfg.pick(args.out_dir, "out-dir")?,
            workers: cfg.pick(args.workers, "workers")?,
            config: args.config,
        };
        Ok(Self { cfg, args: a })
    }

    fn kind(&self) -> Result<BuiltinKind> {
        let name = self
            .args
            .model
            .as_deref()
            .ok_or_else(|| Error::Usage("--model is required".into()))?;
        Ok(match name.parse()? {
            BuiltinKind::Spherical { .. } => BuiltinKind::Spherical {
                p: self.args.p.unwrap_or(4),
            },
            other => other,
        })
    }

    fn n(&self) -> Result<f64> {
        self.args
            .n
            .ok_or_else(|| Error::Usage("--n is required".into()))
    }

    fn b(&self) -> usize {
        self.args.b.unwrap_or(DEFAULT_B)
    }

    fn mode(&self, default: &str) -> Result<Mode> {
        self.mode_with(default, || self.seed())
    }

    fn mode_with(&self, default: &str, seed: impl FnOnce() -> u64) -> Result<Mode> {
        match self.args.mode.as_deref().unwrap_or(default) {
            "oracle" => Ok(Mode::Oracle),
            "mc" => Ok(Mode::MonteCarlo { seed: seed() }),
            other => Err(Error::Usage(format!(
                "unknown mode `{other}` (expected mc or oracle)"
            ))),
        }
    }

    /// The given seed, or a fresh one reported on stderr.
    fn seed(&self) -> u64 {
        self.args.seed.unwrap_or_else(|| {
            let mut h = RandomState::new().build_hasher();
            h.write_u128(
                std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map_or(0, |d| d.as_nanos()),
            );
            let seed = h.finish();
            eprintln!("msboot: no --seed given, using seed={seed}");
            seed
        })
    }

    fn methods(&self) -> Result<Vec<Method>> {
        Method::parse_list(self.args.methods.as_deref().unwrap_or("all"))
    }

    fn ridge(&self) -> Result<Ridge> {
        self.args.ridge.as_deref().unwrap_or("zero").parse()
    }

    fn plan(&self, n: f64) -> Result<ScalePlan> {
        match &self.args.scales_file {
            Some(path) => ScalePlan::from_scales_file(path, self.b()),
            None => ScalePlan::default_for(n, self.b()),
        }
    }

    fn observation(&self, kind: BuiltinKind, n: f64, model: &dyn Model) -> Result<Option<Point>> {
        let xbar = self
            .args
            .xbar
            .as_deref()
            .map(|s| parse_list(s).map_err(|_| Error::Parse(format!("bad --xbar `{s}`"))))
            .transpose()?;
        match (self.args.target, self.args.xbar_norm2, xbar) {
            (None, None, None) => Ok(None),
            (Some(t), None, None) => solve_on_axis(model, t).map(Some),
            (None, r2, x) => observation(kind, n, r2, x.as_deref()).map(Some),
            _ => Err(Error::Usage(
                "--target cannot be combined with --xbar or --xbar-norm2".into(),
            )),
        }
    }

    fn analysis_options(
        &self,
        n: f64,
        mode: Mode,
        methods: Vec<Method>,
    ) -> Result<AnalysisOptions> {
        Ok(AnalysisOptions {
            plan: self.plan(n)?,
            mode,
            methods,
            ridge: self.ridge()?,
            workers: self.args.workers,
        })
    }
}

/// Writes to `dir/name`, or to stdout without an output directory.
fn emit(
    dir: Option<&Path>,
    name: &str,
    f: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    match dir {
        Some(d) => {
            std::fs::create_dir_all(d)?;
            let mut w = BufWriter::new(File::create(d.join(name))?);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock)?;
        }
    }
    Ok(())
}

fn cmd_analyze(args: RunArgs) -> Result<()> {
    let r = Resolved::new(args)?;
    let kind = r.kind()?;
    let n = r.n()?;
    let model = kind.build(n)?;
    let methods = r.methods()?;
    let out = r.args.out_dir.as_deref();

    let analysis = if let Some(path) = &r.args.counts {
        let table = BootstrapTable::read_csv(File::open(path)?)?;
        let y = match r.observation(kind, n, model.as_ref())? {
            Some(y) => y,
            None => Point::new(table.observation.clone()).map_err(|_| {
                Error::Usage("count table has no observation; give --xbar or --xbar-norm2".into())
            })?,
        };
        let mode = if table.cells.iter().any(|c| c.count.is_some()) {
            Mode::MonteCarlo {
                seed: r
                    .args
                    .seed
                    .or(table.master_seed)
                    .unwrap_or_else(|| r.seed()),
            }
        } else {
            Mode::Oracle
        };
        let opts = r.analysis_options(n, mode, methods)?;
        analyze_table(table, model.as_ref(), &y, &opts)?
    } else {
        let y = r
            .observation(kind, n, model.as_ref())?
            .ok_or_else(|| Error::Usage("give --xbar-norm2, --xbar or --target".into()))?;
        let opts = r.analysis_options(n, r.mode("mc")?, methods)?;
        analyze(model.as_ref(), &y, &opts)?
    };

    if out.is_some() {
        emit(out, "table.csv", |w| analysis.table.write_csv(w))?;
        emit(out, "fit.csv", |w| write_fit_csv(&analysis, w))?;
        emit(out, "fit.json", |w| write_fit_json(&analysis, w))?;
    }
    emit(out, "pvalues.csv", |w| {
        write_reports_csv(&analysis.reports, w)
    })
}

fn cmd_table2(args: RunArgs, targets: Option<String>, sizes: Option<String>) -> Result<()> {
    let r = Resolved::new(args)?;
    let targets = r.cfg.pick_list(
        targets
            .as_deref()
            .map(parse_list)
            .transpose()
            .map_err(bad("--targets"))?,
        "targets",
    )?;
    let sizes = r.cfg.pick_list(
        sizes
            .as_deref()
            .map(parse_list)
            .transpose()
            .map_err(bad("--sizes"))?,
        "sizes",
    )?;
    let which = r
        .args
        .model
        .as_deref()
        .unwrap_or("all")
        .to_ascii_lowercase();
    let mode = r.mode("oracle")?;
    let mut rows = Vec::new();
    for (kind, target, n) in reference_rows() {
        let keep_model = which == "all"
            || which
                .parse::<BuiltinKind>()
                .map(|k| k.label() == kind.label())?;
        let keep_target = targets
            .as_ref()
            .is_none_or(|t| t.iter().any(|x| (x - target).abs() < 1e-12));
        let keep_n = sizes
            .as_ref()
            .is_none_or(|s| s.iter().any(|x| (x - n).abs() < 1e-9));
        if keep_model && keep_target && keep_n {
            let kind = match kind {
                BuiltinKind::Spherical { .. } => BuiltinKind::Spherical {
                    p: r.args.p.unwrap_or(4),
                },
                k => k,
            };
            rows.push(table2_row(kind, n, target, r.b(), mode, r.args.workers)?);
        }
    }
    if rows.is_empty() {
        return Err(Error::Usage("no rows selected".into()));
    }
    emit(r.args.out_dir.as_deref(), "table2.csv", |w| {
        write_table2_csv(&rows, w)
    })
}

fn bad(flag: &'static str) -> impl Fn(std::num::ParseFloatError) -> Error {
    move |_| Error::Parse(format!("bad list for {flag}"))
}

fn cmd_curve(args: RunArgs, grid: Option<usize>) -> Result<()> {
    let r = Resolved::new(args)?;
    let grid = r.cfg.pick(grid, "grid")?.unwrap_or(50);
    let kind = r.kind()?;
    let n = r.n()?;
    let model = kind.build(n)?;
    let y = r
        .observation(kind, n, model.as_ref())?
        .ok_or_else(|| Error::Usage("give --xbar-norm2, --xbar or --target".into()))?;
    let opts = r.analysis_options(n, r.mode("mc")?, vec![Method::P1])?;
    let a = analyze(model.as_ref(), &y, &opts)?;
    let fit = a.onestep.as_ref().expect("p1 requested");
    let rows = curve_rows(&a.table, fit, grid);
    emit(r.args.out_dir.as_deref(), "curve.csv", |w| {
        write_curve_csv(&rows, w)
    })
}

fn cmd_coverage(
    args: RunArgs,
    method: Option<String>,
    level: Option<f64>,
    trials: Option<usize>,
) -> Result<()> {
    let r = Resolved::new(args)?;
    let method: Method = r
        .cfg
        .pick(method, "method")?
        .unwrap_or_else(|| "p1".into())
        .parse()?;
    let level = r.cfg.pick(level, "level")?.unwrap_or(0.05);
    let trials = r.cfg.pick(trials, "trials")?.unwrap_or(1000);
    let kind = r.kind()?;
    let n = r.n()?;
    let model = kind.build(n)?;
    let seed = r.seed();
    let mode = r.mode_with("oracle", || seed)?;
    let opts = CoverageOptions {
        method,
        level,
        trials,
        seed,
        analysis: r.analysis_options(n, mode, vec![method])?,
    };
    let result = coverage(model.as_ref(), &opts)?;
    emit(r.args.out_dir.as_deref(), "coverage.csv", |w| {
        write_coverage_csv(&[result], w)
    })
}

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Config => 2,
        ErrorKind::Capability => 3,
        ErrorKind::Numerical => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(run) => cmd_analyze(run),
        Command::Table2 {
            run,
            targets,
            sizes,
        } => cmd_table2(run, targets, sizes),
        Command::Curve { run, grid } => cmd_curve(run, grid),
        Command::Coverage {
            run,
            method,
            level,
            trials,
        } => cmd_coverage(run, method, level, trials),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("msboot: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
