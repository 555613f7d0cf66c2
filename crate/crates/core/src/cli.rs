//! Batch experiment runner behind the `nlevel` binary.
//!
//! Every subcommand builds an [`ExperimentConfig`] and hands it to [`run`],
//! which writes `results.csv`, `comparisons.csv`, one breakdown JSON per
//! closed-form evaluation, one report JSON per lemma and `manifest.json`.
//! Exit status: 0 all comparisons within tolerance, 1 tolerance breach,
//! 2 invalid configuration or failed evaluation.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::closedform::{gao_rhs, rubinstein_rhs, support3_rhs_with, ClosedFormOptions, PairCounting};
use crate::combinat::IndexSet;
use crate::contour::{verify_lemma, ContourSpec, LemmaInput, LemmaOptions, LemmaReport, DEFAULT_DELTA_SCALE};
use crate::detform::{full_pair_with, one_level_finite_n_with};
use crate::error::{domain, Error, Result};
use crate::haar::{for_each_sample, mc_n_level_many, McOptions, DEFAULT_K_MAX};
use crate::testfn::{FourierProfile, ProfileKind, TestFunction, TestFunctionProduct};
use crate::Method;

pub const OUT_DIR_ENV: &str = "NLEVEL_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "nlevel-out";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    MonteCarlo,
    Contour,
    ClosedForm,
    Determinantal,
    LemmaVerify,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Monte Carlo rows may deviate by this many standard errors …
    #[serde(default = "default_mc_sigmas")]
    pub mc_sigmas: f64,
    /// … plus this allowance for finite-N bias against N → ∞ values.
    #[serde(default = "default_allowance")]
    pub finite_n_allowance: f64,
    /// Relative deviation allowed for lemma reports (Lemma 3 is held to 1e−9).
    #[serde(default = "default_lemma_rel")]
    pub lemma_rel: f64,
}

fn default_mc_sigmas() -> f64 {
    3.0
}
fn default_allowance() -> f64 {
    2e-2
}
fn default_lemma_rel() -> f64 {
    1e-2
}
fn default_samples() -> usize {
    10_000
}
fn default_k_max() -> usize {
    DEFAULT_K_MAX
}
fn default_delta_scale() -> f64 {
    DEFAULT_DELTA_SCALE
}
fn default_true() -> bool {
    true
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            mc_sigmas: default_mc_sigmas(),
            finite_n_allowance: default_allowance(),
            lemma_rel: default_lemma_rel(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub profiles: Vec<FourierProfile>,
    pub methods: Vec<MethodChoice>,
    #[serde(default, alias = "N_list")]
    pub n_list: Vec<usize>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub pair_counting: PairCounting,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default = "default_delta_scale")]
    pub delta_scale: f64,
    /// Worker threads for sampling; 0 uses every core.
    #[serde(default)]
    pub threads: usize,
    /// Fill the wall_time column; switch off for byte-reproducible CSV.
    #[serde(default = "default_true")]
    pub record_timings: bool,
}

impl ExperimentConfig {
    pub fn new(profiles: Vec<FourierProfile>, methods: Vec<MethodChoice>) -> Self {
        ExperimentConfig {
            profiles,
            methods,
            n_list: vec![],
            samples: default_samples(),
            seed: None,
            output_dir: None,
            tolerances: Tolerances::default(),
            pair_counting: PairCounting::default(),
            k_max: DEFAULT_K_MAX,
            delta_scale: DEFAULT_DELTA_SCALE,
            threads: 0,
            record_timings: true,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn wants(&self, m: MethodChoice) -> bool {
        self.methods.contains(&m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.profiles.is_empty() {
            return domain("config needs at least one profile");
        }
        if self.methods.is_empty() {
            return domain("config needs at least one method");
        }
        for p in &self.profiles {
            p.validate()?;
        }
        let total: f64 = self.profiles.iter().map(|p| p.sigma).sum();
        let mc_only = self.methods.iter().all(|m| *m == MethodChoice::MonteCarlo);
        if total >= 3.0 && !mc_only {
            return domain(format!("total support {total} ≥ 3 is only allowed for monte_carlo runs"));
        }
        if self.wants(MethodChoice::MonteCarlo) {
            if self.seed.is_none() {
                return domain("monte_carlo requires a seed");
            }
            if self.samples < 2 {
                return domain("monte_carlo requires at least 2 samples");
            }
        }
        let finite = [MethodChoice::MonteCarlo, MethodChoice::Contour, MethodChoice::Determinantal];
        if finite.iter().any(|m| self.wants(*m)) && self.n_list.is_empty() {
            return domain("N_list is empty but a finite-N method was requested");
        }
        if self.n_list.contains(&0) {
            return domain("N must be positive");
        }
        if !(self.delta_scale > 0.0) {
            return domain("delta_scale must be positive");
        }
        Ok(())
    }

    fn sigmas(&self) -> String {
        self.profiles.iter().map(|p| format!("{}", p.sigma)).collect::<Vec<_>>().join(";")
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> Result<String> {
        let bytes = serde_json::to_vec(self)?;
        Ok(format!("{:x}", Sha256::digest(bytes)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub method: String,
    pub n: usize,
    #[serde(rename = "N")]
    pub n_half: String,
    pub sigmas: String,
    pub value: f64,
    pub err: f64,
    pub wall_time: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub left: String,
    pub right: String,
    #[serde(rename = "N")]
    pub n_half: String,
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub start_time_unix: f64,
    pub end_time_unix: f64,
    pub files: Vec<String>,
    pub config: ExperimentConfig,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub rows: Vec<ResultRow>,
    pub comparisons: Vec<Comparison>,
    pub lemmas: Vec<LemmaReport>,
    pub out_dir: PathBuf,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.comparisons.iter().all(|c| c.pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

fn n_label(n_half: usize) -> String {
    if n_half == 0 {
        "inf".into()
    } else {
        n_half.to_string()
    }
}

struct Recorder<'a> {
    cfg: &'a ExperimentConfig,
    rows: Vec<ResultRow>,
}

impl Recorder<'_> {
    fn push(&mut self, method: &str, n_half: usize, value: f64, err: f64, started: Instant) {
        let wall = self.cfg.record_timings.then(|| started.elapsed().as_secs_f64());
        self.rows.push(ResultRow {
            method: method.to_string(),
            n: self.cfg.profiles.len(),
            n_half: n_label(n_half),
            sigmas: self.cfg.sigmas(),
            value,
            err,
            wall_time: wall,
        });
    }
}

fn closed_form_rows(
    cfg: &ExperimentConfig,
    product: &TestFunctionProduct,
    rec: &mut Recorder,
    out: &Path,
    files: &mut Vec<String>,
) -> Result<()> {
    let t0 = Instant::now();
    let opts = ClosedFormOptions { pair_counting: cfg.pair_counting, ..Default::default() };
    // lowest valid form first; refusals of the others are logged, not fatal
    let attempts: [(Method, fn(&TestFunctionProduct) -> Result<_>); 2] =
        [(Method::ClosedFormQ1, rubinstein_rhs), (Method::ClosedFormQ2, gao_rhs)];
    let mut chosen = None;
    for (m, f) in attempts {
        match f(product) {
            Ok(b) => {
                chosen = Some((m, b));
                break;
            }
            Err(Error::Domain(msg)) => log::info!("{} refused: {msg}", m.as_str()),
            Err(e) => return Err(e),
        }
    }
    let (method, breakdown) = match chosen {
        Some(c) => c,
        None => (Method::ClosedFormQ3, support3_rhs_with(product, opts.clone())?),
    };
    rec.push(method.as_str(), 0, breakdown.total, breakdown.error, t0);
    let name = format!("breakdown_{}.json", method.as_str());
    fs::write(out.join(&name), breakdown.to_json()?)?;
    files.push(name);
    if method == Method::ClosedFormQ3 && product.n() >= 2 {
        // the alternative reading of the double-shift pair counting
        let t1 = Instant::now();
        let other = match cfg.pair_counting {
            PairCounting::AsPrinted => PairCounting::Unordered,
            PairCounting::Unordered => PairCounting::AsPrinted,
        };
        let alt = support3_rhs_with(product, ClosedFormOptions { pair_counting: other, ..opts })?;
        let label = format!("{}_{}", method.as_str(), pair_label(other));
        rec.push(&label, 0, alt.total, alt.error, t1);
        let name = format!("breakdown_{label}.json");
        fs::write(out.join(&name), alt.to_json()?)?;
        files.push(name);
    }
    Ok(())
}

fn pair_label(p: PairCounting) -> &'static str {
    match p {
        PairCounting::AsPrinted => "as_printed",
        PairCounting::Unordered => "unordered",
    }
}

/// The lemma instances exercised for a product: Lemmas 1–3 on the leading
/// factors, Lemma 4 with B = {last}, Lemma 5 with B₁ = {first}, B₂ = {second}.
pub fn lemma_inputs(fns: &[TestFunction]) -> Vec<LemmaInput> {
    let f0 = fns[0].clone();
    let f1 = fns.get(1).cloned().unwrap_or_else(|| f0.clone());
    let m = fns.len();
    let mut v = vec![
        LemmaInput::One { f1: f0.clone(), f2: f1 },
        LemmaInput::Two { f: f0.clone() },
        LemmaInput::Three { f: f0 },
        LemmaInput::Four { fns: fns.to_vec(), a: IndexSet::range(m - 1), b: IndexSet::single(m - 1) },
    ];
    if m >= 2 {
        v.push(LemmaInput::Five {
            fns: fns.to_vec(),
            a1: IndexSet::empty(),
            b1: IndexSet::single(0),
            a2: IndexSet::new((2..m).collect()).expect("distinct"),
            b2: IndexSet::single(1),
        });
    }
    v
}

/// Runs every requested method and writes all artifacts under the output
/// directory (config field, else `NLEVEL_OUT_DIR`, else `./nlevel-out`).
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let start = unix_now();
    let out_dir = cfg
        .output_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    fs::create_dir_all(&out_dir)?;
    let fns: Vec<TestFunction> =
        cfg.profiles.iter().cloned().map(TestFunction::new).collect::<Result<_>>()?;
    let product = TestFunctionProduct::unrestricted(fns.clone());
    let n = fns.len();
    let mut rec = Recorder { cfg, rows: Vec::new() };
    let mut files = Vec::new();
    let mut lemmas = Vec::new();

    if cfg.wants(MethodChoice::ClosedForm) {
        closed_form_rows(cfg, &product, &mut rec, &out_dir, &mut files)?;
    }
    for &nh in &cfg.n_list {
        if cfg.wants(MethodChoice::MonteCarlo) {
            let t0 = Instant::now();
            let opts = McOptions { k_max: cfg.k_max, threads: cfg.threads };
            let est = mc_n_level_many(nh, std::slice::from_ref(&product), cfg.samples, cfg.seed.unwrap_or(0), &opts)?
                .remove(0);
            rec.push(Method::MonteCarlo.as_str(), nh, est.value, est.std_error, t0);
        }
        if cfg.wants(MethodChoice::Contour) {
            if n > 2 {
                log::warn!("contour evaluation skipped for n = {n} (supported for n ≤ 2)");
            } else {
                let t0 = Instant::now();
                let spec = ContourSpec::for_n(nh, n, cfg.delta_scale)?;
                let est = crate::contour::n_level_contour(nh, &TestFunctionProduct::new(fns.clone())?, &spec)?;
                rec.push(Method::Contour.as_str(), nh, est.value, est.std_error, t0);
            }
        }
        if cfg.wants(MethodChoice::Determinantal) {
            let t0 = Instant::now();
            let est = match n {
                1 => Some(one_level_finite_n_with(nh, &fns[0], cfg.k_max)?),
                2 => Some(full_pair_with(nh, &fns[0], &fns[1], cfg.k_max)?),
                _ => {
                    log::warn!("determinantal baseline skipped for n = {n} (supported for n ≤ 2)");
                    None
                }
            };
            if let Some(e) = est {
                rec.push(Method::Determinantal.as_str(), nh, e.value, e.std_error, t0);
            }
        }
    }
    if cfg.wants(MethodChoice::LemmaVerify) {
        let opts = LemmaOptions { delta_scale: cfg.delta_scale, ..Default::default() };
        for input in lemma_inputs(&fns) {
            let report = verify_lemma(&input, &opts)?;
            let name = format!("lemma_{}.json", report.lemma);
            fs::write(out_dir.join(&name), serde_json::to_string_pretty(&report)?)?;
            files.push(name);
            lemmas.push(report);
        }
    }

    let comparisons = compare_rows(&rec.rows, &lemmas, &cfg.tolerances);
    write_csv(&out_dir.join("results.csv"), &rec.rows)?;
    write_csv(&out_dir.join("comparisons.csv"), &comparisons)?;
    files.push("results.csv".into());
    files.push("comparisons.csv".into());
    files.push("manifest.json".into());
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        tool_version: env!("CARGO_PKG_VERSION"),
        config_hash: cfg.hash()?,
        seed: cfg.seed,
        start_time_unix: start,
        end_time_unix: unix_now(),
        files,
        config: cfg.clone(),
    };
    fs::write(out_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(RunOutcome { rows: rec.rows, comparisons, lemmas, out_dir })
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Finite-N rows against every N → ∞ row, and Monte Carlo against the
/// deterministic finite-N methods at equal N; lemma reports against their
/// relative tolerance.
pub fn compare_rows(rows: &[ResultRow], lemmas: &[LemmaReport], tol: &Tolerances) -> Vec<Comparison> {
    let mut out = Vec::new();
    let limits: Vec<&ResultRow> = rows.iter().filter(|r| r.n_half == "inf").collect();
    for r in rows.iter().filter(|r| r.n_half != "inf") {
        let mc_part = if r.method == Method::MonteCarlo.as_str() { tol.mc_sigmas * r.err } else { r.err };
        for l in &limits {
            let dev = (r.value - l.value).abs();
            let t = mc_part + l.err + tol.finite_n_allowance;
            out.push(Comparison {
                left: r.method.clone(),
                right: l.method.clone(),
                n_half: r.n_half.clone(),
                deviation: dev,
                tolerance: t,
                pass: dev <= t,
            });
        }
    }
    for mc in rows.iter().filter(|r| r.method == Method::MonteCarlo.as_str()) {
        for d in rows.iter().filter(|r| r.n_half == mc.n_half && r.method != mc.method && r.n_half != "inf") {
            let dev = (mc.value - d.value).abs();
            let t = tol.mc_sigmas * mc.err + d.err + tol.finite_n_allowance;
            out.push(Comparison {
                left: mc.method.clone(),
                right: d.method.clone(),
                n_half: mc.n_half.clone(),
                deviation: dev,
                tolerance: t,
                pass: dev <= t,
            });
        }
    }
    for rep in lemmas {
        let t = if rep.lemma == 3 { 1e-9 } else { tol.lemma_rel };
        out.push(Comparison {
            left: format!("lemma_{}_lhs", rep.lemma),
            right: format!("lemma_{}_rhs", rep.lemma),
            n_half: "extrapolated".into(),
            deviation: rep.rel_dev,
            tolerance: t,
            pass: rep.rel_dev <= t,
        });
    }
    out
}

// ---------------------------------------------------------------------------
// Command line

#[derive(Parser, Debug)]
#[command(name = "nlevel", version, about = "n-level densities of USp(2N) eigenangles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Monte Carlo estimate over Haar-random USp(2N) samples.
    Sample {
        #[command(flatten)]
        common: CommonArgs,
        /// Also write raw eigenangles (sample_index, j, theta) for the first N in the list.
        #[arg(long)]
        dump_angles: Option<PathBuf>,
    },
    /// Exact N → ∞ value from the closed Fourier-side formulas.
    ClosedForm {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Finite-N value by contour integration of the ratio kernel (n ≤ 2).
    Contour {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Numerical verification of the five key lemmas.
    Lemmas {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run several methods and compare them against each other.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        /// Methods to run (default: all except lemma_verify).
        #[arg(long, value_delimiter = ',')]
        methods: Vec<MethodChoice>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// JSON experiment config; flags below are ignored when given.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Fourier-support widths σ of the factors.
    #[arg(long, value_delimiter = ',')]
    pub sigma: Vec<f64>,
    #[arg(long, value_enum, default_value = "triangle")]
    pub profile: ProfileArg,
    /// Coefficients for the piecewise-polynomial profile.
    #[arg(long, value_delimiter = ',')]
    pub coefficients: Vec<f64>,
    #[arg(long = "n-list", value_delimiter = ',', default_value = "16,32,64")]
    pub n_list: Vec<usize>,
    #[arg(long, default_value_t = default_samples())]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_K_MAX)]
    pub k_max: usize,
    #[arg(long, default_value_t = DEFAULT_DELTA_SCALE)]
    pub delta_scale: f64,
    #[arg(long, value_enum, default_value = "unordered")]
    pub pair_counting: PairArg,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Leave wall_time empty so repeated runs give identical CSV.
    #[arg(long)]
    pub no_timings: bool,
    #[arg(long, env = OUT_DIR_ENV)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ProfileArg {
    Triangle,
    RaisedCosine,
    PiecewisePolynomial,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PairArg {
    AsPrinted,
    Unordered,
}

impl CommonArgs {
    fn to_config(&self, methods: Vec<MethodChoice>) -> Result<ExperimentConfig> {
        if let Some(path) = &self.config {
            let mut c: ExperimentConfig = serde_json::from_str(&fs::read_to_string(path)?)?;
            if c.output_dir.is_none() {
                c.output_dir = self.out_dir.clone();
            }
            c.validate()?;
            return Ok(c);
        }
        let kind = match self.profile {
            ProfileArg::Triangle => ProfileKind::Triangle,
            ProfileArg::RaisedCosine => ProfileKind::RaisedCosine,
            ProfileArg::PiecewisePolynomial => ProfileKind::PiecewisePolynomial,
        };
        let profiles = self
            .sigma
            .iter()
            .map(|&s| FourierProfile { kind, sigma: s, coefficients: self.coefficients.clone() })
            .collect();
        let mut cfg = ExperimentConfig::new(profiles, methods);
        cfg.n_list = self.n_list.clone();
        cfg.samples = self.samples;
        cfg.seed = Some(self.seed);
        cfg.k_max = self.k_max;
        cfg.delta_scale = self.delta_scale;
        cfg.pair_counting = match self.pair_counting {
            PairArg::AsPrinted => PairCounting::AsPrinted,
            PairArg::Unordered => PairCounting::Unordered,
        };
        cfg.threads = self.threads;
        cfg.record_timings = !self.no_timings;
        cfg.output_dir = self.out_dir.clone();
        cfg.validate()?;
        Ok(cfg)
    }
}

fn dump_angles(cfg: &ExperimentConfig, path: &Path) -> Result<()> {
    let nh = cfg.n_list[0];
    let table = for_each_sample(nh, cfg.samples, cfg.seed.unwrap_or(0), cfg.threads, nh, |set, row| {
        row.copy_from_slice(set.angles());
    })?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["sample_index", "j", "theta"])?;
    for (s, row) in table.chunks(nh).enumerate() {
        for (j, t) in row.iter().enumerate() {
            w.write_record([s.to_string(), (j + 1).to_string(), format!("{t:.17e}")])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn print_table(outcome: &RunOutcome) {
    let mut so = std::io::stdout().lock();
    let _ = writeln!(so, "{:<34} {:>6} {:>18} {:>12}", "method", "N", "value", "err");
    for r in &outcome.rows {
        let _ = writeln!(so, "{:<34} {:>6} {:>18.12} {:>12.3e}", r.method, r.n_half, r.value, r.err);
    }
    if !outcome.comparisons.is_empty() {
        let _ = writeln!(so, "\n{:<34} {:<30} {:>8} {:>11} {:>11}  ok", "left", "right", "N", "deviation", "tolerance");
        for c in &outcome.comparisons {
            let _ = writeln!(
                so,
                "{:<34} {:<30} {:>8} {:>11.3e} {:>11.3e}  {}",
                c.left,
                c.right,
                c.n_half,
                c.deviation,
                c.tolerance,
                if c.pass { "yes" } else { "NO" }
            );
        }
    }
    let _ = writeln!(so, "\nartifacts in {}", outcome.out_dir.display());
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = (|| -> Result<RunOutcome> {
        let (common, methods, dump) = match &cli.command {
            Command::Sample { common, dump_angles } => (common, vec![MethodChoice::MonteCarlo], dump_angles.clone()),
            Command::ClosedForm { common } => (common, vec![MethodChoice::ClosedForm], None),
            Command::Contour { common } => (common, vec![MethodChoice::Contour], None),
            Command::Lemmas { common } => (common, vec![MethodChoice::LemmaVerify], None),
            Command::Compare { common, methods } => {
                let m = if methods.is_empty() {
                    vec![
                        MethodChoice::ClosedForm,
                        MethodChoice::MonteCarlo,
                        MethodChoice::Contour,
                        MethodChoice::Determinantal,
                    ]
                } else {
                    methods.clone()
                };
                (common, m, None)
            }
        };
        let cfg = common.to_config(methods)?;
        let outcome = run(&cfg)?;
        if let Some(p) = dump {
            dump_angles(&cfg, &p)?;
        }
        Ok(outcome)
    })();
    match result {
        Ok(outcome) => {
            print_table(&outcome);
            if !outcome.passed() {
                eprintln!("tolerance breach: see comparisons above");
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
