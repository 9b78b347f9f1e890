//! Subcommands of the `tlbr` binary.
//!
//! Each command writes its outputs, `manifest.json` and `resolved.conf`
//! into `--out`. `resolved.conf` holds every setting the run used and can
//! be passed back with `--config` to repeat it.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tlbr_core::{
    tlbr, Augmentation, DenseOperator, Mode, SolverConfig, SolverError, Tensor3, TlbrOutput,
};

use crate::bench::{self, Size, Suite};
use crate::compress::{compress, default_subspace, Method};
use crate::config::{self, Resolver};
use crate::error::{Error, Result};
use crate::faces::{self, build_face_db, display_name, identification_rate, train_basis, MatchRow};
use crate::image_io::{load_image, save_image};
use crate::manifest::RunManifest;
use crate::{t3b, tube_errors, SolverSettings};

#[derive(Debug, Parser)]
#[command(
    name = "tlbr",
    version,
    about = "Partial t-SVD of third-order tensors and its applications"
)]
pub struct Cli {
    /// Worker threads for the frame-parallel kernels.
    #[arg(long, global = true, env = "TLBR_THREADS")]
    pub threads: Option<usize>,
    /// Flat `key = value` file with defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Do not print summaries to stdout.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Singular triplets of a tensor stored as T3B.
    Svd(SvdArgs),
    /// Rank-k approximations of an RGB image.
    Compress(CompressArgs),
    /// Face recognition on a `root/<person>/*.png` tree.
    Recognize(RecognizeArgs),
    /// Experiment suites on random tensors.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_restarts: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SvdArgs {
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    pub aug: Option<AugArg>,
    /// Also compute the full t-SVD and write per-tube errors.
    #[arg(long, value_enum)]
    pub reference: Option<ReferenceArg>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct CompressArgs {
    pub input: Option<PathBuf>,
    /// Comma-separated ranks.
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<usize>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Lanczos subspace size (default `max(20, 2k)`).
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct RecognizeArgs {
    pub train_dir: Option<PathBuf>,
    /// Images per person held out as probes.
    #[arg(long)]
    pub holdout: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Lanczos subspace size (default `min(max(20, 2k), N)`).
    #[arg(long)]
    pub m: Option<usize>,
    /// Identify a single image.
    #[arg(long, conflicts_with = "evaluate")]
    pub probe: Option<PathBuf>,
    /// Identify every held-out image and report the identification rate.
    #[arg(long)]
    pub evaluate: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    /// Comma-separated `LxPxN` sizes.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<Size>,
    /// Allow sizes above the desk-scale limit.
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Largest,
    Smallest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AugArg {
    Ritz,
    Harm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Tlbr,
    Tsvd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReferenceArg {
    FullTsvd,
}

macro_rules! value_enum_text {
    ($($t:ty),*) => {$(
        impl std::fmt::Display for $t {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
            }
        }

        impl std::str::FromStr for $t {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, String> {
                <Self as ValueEnum>::from_str(s, true)
            }
        }
    )*};
}

value_enum_text!(ModeArg, AugArg, MethodArg, ReferenceArg);

/// Runs a parsed command line and returns the exit status.
pub fn run(cli: Cli) -> Result<i32> {
    let file = match &cli.config {
        Some(path) => config::load(path)?,
        None => BTreeMap::new(),
    };
    let mut r = Resolver::new(file);
    let threads = r.value("threads", cli.threads, None)?;
    if threads == Some(0) {
        return Err(Error::Config("threads must be positive".into()));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let say = Say(!cli.quiet);
    pool.install(|| match cli.command {
        Command::Svd(a) => cmd_svd(a, r, say),
        Command::Compress(a) => cmd_compress(a, r, say),
        Command::Recognize(a) => cmd_recognize(a, r, say),
        Command::Bench(a) => cmd_bench(a, r, say),
    })
}

/// Prints run summaries unless `--quiet` was given.
#[derive(Clone, Copy)]
struct Say(bool);

impl Say {
    fn line(self, text: impl std::fmt::Display) {
        if self.0 {
            println!("{text}");
        }
    }
}

fn solver_settings(r: &mut Resolver, a: &SolverArgs) -> Result<SolverSettings> {
    let d = SolverSettings::default();
    Ok(SolverSettings {
        delta: r.required("delta", a.delta, Some(d.delta))?,
        seed: r.required("seed", a.seed, Some(d.seed))?,
        max_restarts: r.required("max-restarts", a.max_restarts, Some(d.max_restarts))?,
    })
}

fn path_setting(r: &mut Resolver, key: &str, flag: Option<PathBuf>) -> Result<PathBuf> {
    r.value_with(key, flag.map(|p| p.display().to_string()), None, |s| {
        Ok(s.to_string())
    })?
    .map(PathBuf::from)
    .ok_or_else(|| Error::Config(format!("missing required setting {key}")))
}

fn list_setting<T: std::str::FromStr + ToString>(
    r: &mut Resolver,
    key: &str,
    flag: &[T],
    default: Option<&[T]>,
) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let join = |v: &[T]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    let flag = (!flag.is_empty()).then(|| join(flag));
    let raw = r.value_with(key, flag, default.map(join), |s| Ok(s.to_string()))?;
    raw.map(|raw| {
        raw.split(',')
            .map(|s| {
                s.trim()
                    .parse::<T>()
                    .map_err(|e| Error::Config(format!("{key}: {s:?}: {e}")))
            })
            .collect()
    })
    .unwrap_or_else(|| Err(Error::Config(format!("missing required setting {key}"))))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `resolved.conf` and `manifest.json` and returns `code`.
fn finish(mut manifest: RunManifest, out: &Path, start: Instant, code: i32) -> Result<i32> {
    let conf = out.join("resolved.conf");
    fs::write(&conf, config::render(&manifest.config)).map_err(|e| Error::io(&conf, e))?;
    manifest.add_output(&conf);
    let path = out.join("manifest.json");
    manifest.add_output(&path);
    manifest.exit_code = code;
    manifest.wall_time_seconds = start.elapsed().as_secs_f64();
    manifest.save(&path)?;
    Ok(code)
}

fn cmd_svd(a: SvdArgs, mut r: Resolver, say: Say) -> Result<i32> {
    let start = Instant::now();
    let input = path_setting(&mut r, "input", a.input)?;
    let out = path_setting(&mut r, "out", a.out)?;
    let tensor = t3b::load(&input)?;
    let k: usize = r.required("k", a.k, None)?;
    let min_dim = tensor.rows().min(tensor.cols());
    let m = r.required("m", a.m, Some(default_subspace(k, min_dim)))?;
    let mode = r.required("mode", a.mode, Some(ModeArg::Largest))?;
    let aug = r.required("aug", a.aug, Some(AugArg::Ritz))?;
    let reference = r.value("reference", a.reference, None)?;
    let solver = solver_settings(&mut r, &a.solver)?;
    let mut manifest = RunManifest::new("svd", r.finish()?, solver.seed);
    manifest.add_input(&input)?;

    let cfg = solver.apply(
        SolverConfig::new(k, m)
            .mode(match mode {
                ModeArg::Largest => Mode::Largest,
                ModeArg::Smallest => Mode::Smallest,
            })
            .augmentation(match aug {
                AugArg::Ritz => Augmentation::Ritz,
                AugArg::Harm => Augmentation::Harmonic,
            }),
    );
    let (result, code) = match tlbr(&DenseOperator::new(&tensor), &cfg) {
        Ok(res) => (res, 0),
        Err(SolverError::NotConverged(partial)) => {
            eprintln!(
                "tlbr: not all triplets converged within {} iterations; writing the best estimates",
                partial.iterations
            );
            (*partial, 3)
        }
        Err(e) => return Err(e.into()),
    };
    create_dir(&out)?;
    write_triplets(&result, &out, &mut manifest)?;

    if reference.is_some() {
        let errors = tube_errors(&tensor, &result.triplets)?;
        let rows: Vec<Vec<String>> = errors
            .iter()
            .enumerate()
            .map(|(i, e)| vec![(i + 1).to_string(), format!("{e:e}")])
            .collect();
        let path = out.join("reference.csv");
        write_csv(&path, &["triplet_index", "tube_error"], &rows)?;
        manifest.add_output(&path);
        for (i, e) in errors.iter().enumerate() {
            say.line(format!("tube {}: error {e:e}", i + 1));
        }
    }
    say.line(format!(
        "iterations: {}, converged: {}",
        result.iterations, result.converged
    ));
    finish(manifest, &out, start, code)
}

fn write_triplets(result: &TlbrOutput, out: &Path, manifest: &mut RunManifest) -> Result<()> {
    let dir = out.join("triplets");
    create_dir(&dir)?;
    let t = &result.triplets;
    for (name, tensor) in [("U.t3b", &t.u), ("S.t3b", &t.s_tensor()?), ("V.t3b", &t.v)] {
        let path = dir.join(name);
        t3b::save(&path, tensor)?;
        manifest.add_output(&path);
    }
    let path = out.join("history.csv");
    fs::write(&path, result.history.to_csv()).map_err(|e| Error::io(&path, e))?;
    manifest.add_output(&path);
    Ok(())
}

fn cmd_compress(a: CompressArgs, mut r: Resolver, say: Say) -> Result<i32> {
    let start = Instant::now();
    let input = path_setting(&mut r, "input", a.input)?;
    let out = path_setting(&mut r, "out", a.out)?;
    let ks: Vec<usize> = list_setting(&mut r, "k", &a.k, Some(&[5, 10, 15, 25]))?;
    let method = r.required("method", a.method, Some(MethodArg::Tlbr))?;
    let m = r.value("m", a.m, None)?;
    let solver = solver_settings(&mut r, &a.solver)?;
    let mut manifest = RunManifest::new("compress", r.finish()?, solver.seed);
    manifest.add_input(&input)?;

    let image = load_image(&input)?;
    let method = match method {
        MethodArg::Tlbr => Method::Tlbr,
        MethodArg::Tsvd => Method::FullTsvd,
    };
    create_dir(&out)?;
    let mut rows = Vec::new();
    for &k in &ks {
        let c = compress(&image.data, k, method, m, &solver)?;
        let path = out.join(format!("k{k}.png"));
        save_image(&c.approx, &path)?;
        manifest.add_output(&path);
        say.line(format!("k = {k}: relative error {:e}", c.rel_error));
        rows.push(vec![
            k.to_string(),
            method.name().to_string(),
            format!("{:e}", c.rel_error),
        ]);
    }
    let path = out.join("relerr.csv");
    write_csv(&path, &["k", "method", "relative_error"], &rows)?;
    manifest.add_output(&path);
    finish(manifest, &out, start, 0)
}

fn cmd_recognize(a: RecognizeArgs, mut r: Resolver, say: Say) -> Result<i32> {
    let start = Instant::now();
    let root = path_setting(&mut r, "train-dir", a.train_dir)?;
    let out = path_setting(&mut r, "out", a.out)?;
    let holdout = r.required("holdout", a.holdout, Some(3))?;
    let k: usize = r.required("k", a.k, None)?;
    let m = r.value("m", a.m, None)?;
    let probe = r.value_with(
        "probe",
        a.probe.map(|p| p.display().to_string()),
        None,
        |s| Ok(s.to_string()),
    )?;
    let evaluate = r.switch("evaluate", a.evaluate)?;
    let solver = solver_settings(&mut r, &a.solver)?;
    if probe.is_some() == evaluate {
        return Err(Error::Config(
            "pass exactly one of --probe and --evaluate".into(),
        ));
    }
    let split = build_face_db(&root, holdout, solver.seed)?;
    let m = m.unwrap_or_else(|| default_subspace(k, split.db.len()));
    let mut config = r.finish()?;
    config.insert("m".into(), m.to_string());
    let mut manifest = RunManifest::new("recognize", config, solver.seed);
    let mut inputs: Vec<&Path> = split.db.paths.iter().map(PathBuf::as_path).collect();
    inputs.extend(split.test.iter().map(|t| t.path.as_path()));
    inputs.sort();
    for p in inputs {
        manifest.add_input(p)?;
    }

    let basis = train_basis(&split.db, k, m, &solver)?;
    create_dir(&out)?;
    let bundle = out.join("basis");
    basis.save(&bundle)?;
    manifest.add_output(&bundle);

    let rows: Vec<MatchRow> = match &probe {
        Some(p) => {
            let p = PathBuf::from(p);
            manifest.add_input(&p)?;
            let image = load_image(&p)?;
            let hit = basis.identify(&image.data)?;
            vec![MatchRow {
                probe: display_name(&p),
                predicted: hit.label,
                actual: String::new(),
                distance: hit.distance,
            }]
        }
        None => faces::identify_all(&basis, &split.test)?,
    };
    let path = out.join("matches.csv");
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|m| {
            vec![
                m.probe.clone(),
                m.predicted.clone(),
                m.actual.clone(),
                format!("{:e}", m.distance),
            ]
        })
        .collect();
    write_csv(&path, &["probe", "predicted", "actual", "distance"], &table)?;
    manifest.add_output(&path);
    if evaluate {
        let rate = identification_rate(&rows);
        let correct = rows.iter().filter(|m| m.predicted == m.actual).count();
        let path = out.join("rate.csv");
        write_csv(
            &path,
            &["probes", "correct", "identification_rate"],
            &[vec![
                rows.len().to_string(),
                correct.to_string(),
                format!("{rate}"),
            ]],
        )?;
        manifest.add_output(&path);
        say.line(format!(
            "identification rate: {rate}% ({correct} of {})",
            rows.len()
        ));
    } else {
        say.line(format!(
            "{}: {} (distance {:e})",
            rows[0].probe, rows[0].predicted, rows[0].distance
        ));
    }
    finish(manifest, &out, start, 0)
}

fn cmd_bench(a: BenchArgs, mut r: Resolver, say: Say) -> Result<i32> {
    let start = Instant::now();
    let out = path_setting(&mut r, "out", a.out)?;
    let suite: Suite = r.required("suite", a.suite, None)?;
    let sizes: Vec<Size> = list_setting(&mut r, "sizes", &a.sizes, Some(&bench::default_sizes()))?;
    let force = r.switch("force", a.force)?;
    let solver = solver_settings(&mut r, &a.solver)?;
    bench::check_sizes(&sizes, force)?;
    let mut manifest = RunManifest::new("bench", r.finish()?, solver.seed);

    let rows = bench::run(suite, &sizes, &solver)?;
    create_dir(&out)?;
    let path = out.join(format!("{suite}.csv"));
    write_csv(&path, suite.header(), &rows)?;
    manifest.add_output(&path);
    say.line(suite.header().join(","));
    for row in &rows {
        say.line(row.join(","));
    }
    finish(manifest, &out, start, 0)
}

/// Reads the triplets written by `tlbr svd`.
pub fn load_triplets(out: &Path) -> Result<(Tensor3, Tensor3, Tensor3)> {
    let dir = out.join("triplets");
    Ok((
        t3b::load(&dir.join("U.t3b"))?,
        t3b::load(&dir.join("S.t3b"))?,
        t3b::load(&dir.join("V.t3b"))?,
    ))
}
