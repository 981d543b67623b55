//! Command-line driver. Exit codes: 0 pass, 1 check failure, 2 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hypercusp_core::clifford::mul_para_mv;
use hypercusp_core::diffops::{kholo_defect, sample_points, FieldFn};
use hypercusp_core::fourier::{
    cusp_coefficient_test, fit_bessel_profile, fit_monogenic_profile, fourier_coefficients, hecke_coefficients,
    lowest_shells, structured_coefficients, FourierError, FourierRecord, ZeroModeBasis,
};
use hypercusp_core::lattice_sum::EwaldParams;
use hypercusp_core::petersson::{petersson_product, FundamentalDomainApprox, Integrand, SamplingOptions};
use hypercusp_core::series::{build, eisenstein_hecke, gk, scale_map, SeriesKind, SeriesSpec, Summation, TruncatedForm, HECKE_LADDER};
use hypercusp_core::tolerances::{HECKE_PROFILE, KERNEL_DEFECT, PROFILE_RESIDUAL, ZERO_MODE};
use hypercusp_core::vahlen::{congruence_representatives, enumerate_cosets, Enumeration, Lattice};
use hypercusp_core::{Complex64, HalfSpacePoint, Multivector, Paravector};
use serde_json::{json, Value};

use crate::acceptance;
use crate::config::{ConfigError, OutputFormat, RunConfig};
use crate::formats::{self, CsvTable};

/// Environment variable for the worker thread count.
pub const THREADS_ENV: &str = "HYPERCUSP_THREADS";

#[derive(Parser, Debug)]
#[command(name = "hypercusp", version, about = "Clifford-valued automorphic forms on upper half-space")]
pub struct Cli {
    /// Flat key = value configuration file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default)]
pub struct Common {
    #[arg(long, global = true)]
    pub n: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub k: Option<String>,
    #[arg(long, global = true)]
    pub p: Option<String>,
    /// Congruence level.
    #[arg(long = "N", global = true)]
    pub level: Option<String>,
    #[arg(long, global = true)]
    pub radius: Option<String>,
    /// Stencil step, or `auto`.
    #[arg(long, global = true)]
    pub h: Option<String>,
    #[arg(long, global = true)]
    pub order: Option<String>,
    /// Comma-separated fit heights.
    #[arg(long, global = true)]
    pub heights: Option<String>,
    #[arg(long, global = true)]
    pub grid: Option<String>,
    #[arg(long, global = true)]
    pub samples: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// json or csv.
    #[arg(long = "out", global = true)]
    pub format: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub output: Option<String>,
}

impl Common {
    fn overrides(&self) -> Vec<(String, String)> {
        let pairs = [
            ("n", &self.n),
            ("k", &self.k),
            ("p", &self.p),
            ("N", &self.level),
            ("radius", &self.radius),
            ("h", &self.h),
            ("order", &self.order),
            ("heights", &self.heights),
            ("grid", &self.grid),
            ("samples", &self.samples),
            ("seed", &self.seed),
            ("format", &self.format),
            ("output", &self.output),
        ];
        pairs.iter().filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))).collect()
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Enumerate cosets of the level-N subgroup with ‖c‖² + ‖d‖² ≤ radius².
    GroupEnum {
        /// Enumerate by words in the generators up to this length.
        #[arg(long)]
        words: Option<usize>,
    },
    /// Finite-difference kernel test at a set of points.
    VerifyKernel {
        /// gk, x-en, eisenstein, eisenstein-periodized, poincare or hecke.
        #[arg(long)]
        function: String,
        /// JSON point or array of points; 20 sample points when absent.
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long)]
        w: Option<PathBuf>,
    },
    /// Evaluate a truncated Eisenstein series.
    Eisenstein {
        #[arg(long)]
        at: PathBuf,
        /// Sum translates exactly by lattice sums.
        #[arg(long)]
        periodized: bool,
    },
    /// Evaluate a truncated Poincaré series.
    Poincare {
        #[arg(long)]
        at: PathBuf,
        /// Base point; e_n when absent.
        #[arg(long)]
        w: Option<PathBuf>,
    },
    /// Fourier coefficients and profile fits.
    Fourier {
        /// eisenstein, hecke or poincare.
        #[arg(long)]
        series: String,
        /// `auto` or a JSON array of frequency vectors.
        #[arg(long, default_value = "auto")]
        freqs: String,
        #[arg(long)]
        w: Option<PathBuf>,
    },
    /// Monte-Carlo Petersson product ⟨f, g⟩.
    Petersson {
        /// eisenstein or poincare.
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        /// Word length of the fundamental-domain test set.
        #[arg(long, default_value_t = 4)]
        words: usize,
        #[arg(long)]
        w: Option<PathBuf>,
        /// Skip the cusp coefficient test.
        #[arg(long)]
        allow_noncuspidal: bool,
    },
    /// Run the acceptance criteria.
    Acceptance {
        /// Reduced sample sizes.
        #[arg(long)]
        quick: bool,
        /// Comma-separated criterion numbers.
        #[arg(long)]
        only: Option<String>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Check(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<formats::FormatError> for CliError {
    fn from(e: formats::FormatError) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

/// Parses arguments, runs the subcommand and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let msg = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(msg.as_bytes()) } else { stderr.write_all(msg.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(CliError::Check(m)) => {
            let _ = writeln!(stderr, "check failed: {m}");
            1
        }
        Err(CliError::Usage(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            2
        }
    }
}

/// Applies the thread-count variable to the global pool.
pub fn init_threads() -> Result<(), String> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v.parse().map_err(|_| format!("{THREADS_ENV} must be a positive integer, got {v:?}"))?;
            if n == 0 {
                return Err(format!("{THREADS_ENV} must be positive"));
            }
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
        }
        Err(_) => Ok(()),
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<bool, CliError> {
    let cfg = RunConfig::load(cli.config.as_deref(), &cli.common.overrides())?;
    let (body, pass) = match &cli.command {
        Command::GroupEnum { words } => group_enum(&cfg, *words)?,
        Command::VerifyKernel { function, points, w } => verify_kernel(&cfg, function, points.as_ref(), w.as_ref())?,
        Command::Eisenstein { at, periodized } => evaluate(&cfg, SeriesKind::Eisenstein, at, None, *periodized)?,
        Command::Poincare { at, w } => evaluate(&cfg, SeriesKind::Poincare, at, w.as_ref(), false)?,
        Command::Fourier { series, freqs, w } => fourier(&cfg, series, freqs, w.as_ref())?,
        Command::Petersson { f, g, words, w, allow_noncuspidal } => {
            petersson(&cfg, f, g, *words, w.as_ref(), *allow_noncuspidal)?
        }
        Command::Acceptance { quick, only } => return acceptance_cmd(&cfg, *quick, only.as_deref(), stdout),
    };
    emit(&cfg, &body, stdout)?;
    Ok(pass)
}

/// JSON document plus its CSV rendering.
struct Body(Value, CsvTable);

fn emit(cfg: &RunConfig, body: &Body, stdout: &mut dyn Write) -> Result<(), CliError> {
    let text = match cfg.format {
        OutputFormat::Json => formats::to_json_string(&body.0),
        OutputFormat::Csv => body.1.render(),
    };
    match &cfg.output {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(usage),
    }
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn base_point(cfg: &RunConfig, w: Option<&PathBuf>) -> Result<HalfSpacePoint, CliError> {
    let p = match w {
        Some(path) => {
            let v = formats::points_from_json(&read(path)?)?;
            match v.as_slice() {
                [p] => *p,
                _ => return Err(CliError::Usage("w must be a single point".into())),
            }
        }
        None => Paravector::unit(cfg.n, cfg.n),
    };
    if p.dim() != cfg.n {
        return Err(CliError::Usage(format!("w has dimension {} but n = {}", p.dim(), cfg.n)));
    }
    HalfSpacePoint::new(p).map_err(usage)
}

fn group_enum(cfg: &RunConfig, words: Option<usize>) -> Result<(Body, bool), CliError> {
    let method = words.map(Enumeration::Words).unwrap_or(Enumeration::Arithmetic);
    let cosets = enumerate_cosets(cfg.n, cfg.p, cfg.level, cfg.radius, method).map_err(usage)?;
    let mut t = CsvTable::new(["c", "d"]);
    for c in &cosets {
        t.rows.push(vec![formats::mv_to_text(&c.key.c), formats::mv_to_text(&c.key.d)]);
    }
    Ok((Body(formats::cosets_value(&cosets), t), true))
}

/// A named test function with its weight.
struct Built {
    f: FieldFn,
    k: i32,
    form: Option<TruncatedForm>,
}

fn build_named(cfg: &RunConfig, name: &str, w: Option<&PathBuf>, fast: bool) -> Result<Built, CliError> {
    let ewald = if fast { EwaldParams::FAST } else { EwaldParams::ACCURATE };
    let series = |kind, periodized| -> Result<Built, CliError> {
        let wp = if kind == SeriesKind::Poincare { Some(base_point(cfg, w)?) } else { None };
        let spec = cfg.series(kind, wp, periodized)?.with_ewald(ewald);
        let form = build(&spec).map_err(usage)?;
        Ok(Built { f: form.evaluator().clone(), k: cfg.k, form: Some(form) })
    };
    match name {
        "gk" => Ok(Built { f: gk(cfg.n, cfg.k), k: cfg.k, form: None }),
        "x-en" => {
            let en = Multivector::e(cfg.n, cfg.n);
            let f = FieldFn::total(cfg.n, move |x: &Paravector| mul_para_mv(x, &en));
            Ok(Built { f, k: cfg.k, form: None })
        }
        "eisenstein" => series(SeriesKind::Eisenstein, false),
        "eisenstein-periodized" => series(SeriesKind::Eisenstein, true),
        "poincare" => series(SeriesKind::Poincare, false),
        "hecke" => {
            let h = eisenstein_hecke(&hecke_spec(cfg)?.with_ewald(ewald), HECKE_LADDER).map_err(usage)?;
            Ok(Built { f: h.evaluator().clone(), k: 0, form: None })
        }
        _ => Err(CliError::Usage(format!(
            "unknown function {name:?}; expected gk, x-en, eisenstein, eisenstein-periodized, poincare or hecke"
        ))),
    }
}

/// Periodized k = 0 Hecke series at the first rung of the ladder.
fn hecke_spec(cfg: &RunConfig) -> Result<SeriesSpec, CliError> {
    let spec = SeriesSpec::eisenstein(cfg.n, 0, cfg.p, cfg.level, cfg.radius)
        .with_kind(SeriesKind::EisensteinHecke)
        .with_summation(Summation::Periodized)
        .with_hecke_s(HECKE_LADDER[0]);
    spec.validate().map_err(|e| CliError::Usage(format!("guard violated: {e}")))?;
    Ok(spec)
}

fn verify_kernel(cfg: &RunConfig, name: &str, points: Option<&PathBuf>, w: Option<&PathBuf>) -> Result<(Body, bool), CliError> {
    let b = build_named(cfg, name, w, false)?;
    let pts = match points {
        Some(p) => formats::points_from_json(&read(p)?)?,
        None => sample_points(cfg.n, 20, (1.0, 2.5), (1.0, 2.0), cfg.seed),
    };
    if pts.iter().any(|p| p.dim() != cfg.n) {
        return Err(CliError::Usage("point dimension does not match n".into()));
    }
    // negative weights are tested through the scaling map
    let (f, param) = if b.k < 0 { (scale_map(&b.f, b.k), 2 - b.k) } else { (b.f.clone(), b.k) };
    let spec = cfg.stencil((param / 2) as u32)?;
    let mut all = true;
    let mut rows = Vec::new();
    let mut t = CsvTable::new((0..=cfg.n).map(|i| format!("x{i}")).chain(["defect", "est_error", "pass"].map(String::from)));
    for x in &pts {
        let d = kholo_defect(&f, x, param, &spec).map_err(usage)?;
        let pass = d.passes(KERNEL_DEFECT);
        all &= pass;
        rows.push(json!({ "point": formats::point_value(x), "defect": formats::number(d.defect), "est_error": formats::number(d.est_error), "pass": pass }));
        let mut r: Vec<String> = x.coords().iter().map(|v| format!("{v:?}")).collect();
        r.extend([format!("{:?}", d.defect), format!("{:?}", d.est_error), pass.to_string()]);
        t.rows.push(r);
    }
    Ok((Body(Value::Array(rows), t), all))
}

fn evaluate(
    cfg: &RunConfig,
    kind: SeriesKind,
    at: &PathBuf,
    w: Option<&PathBuf>,
    periodized: bool,
) -> Result<(Body, bool), CliError> {
    let name = match (kind, periodized) {
        (SeriesKind::Poincare, _) => "poincare",
        (_, true) => "eisenstein-periodized",
        _ => "eisenstein",
    };
    let b = build_named(cfg, name, w, false)?;
    let form = b.form.expect("series");
    let pts = formats::points_from_json(&read(at)?)?;
    if pts.iter().any(|p| p.dim() != cfg.n) {
        return Err(CliError::Usage("point dimension does not match n".into()));
    }
    let mut header = formats::point_coeff_header(cfg.n);
    header.push("tail_bound".into());
    let mut t = CsvTable::new(header);
    let mut vals = Vec::new();
    for x in &pts {
        let v = form.eval(x).map_err(usage)?;
        vals.push(json!({ "point": formats::point_value(x), "value": formats::mv_value(&v), "tail_bound": formats::number(form.tail_bound) }));
        let mut row: Vec<f64> = x.coords().to_vec();
        row.extend_from_slice(v.coeffs());
        row.push(form.tail_bound);
        t.push_numbers(&row);
    }
    let s = &form.spec;
    let body = json!({
        "series": name,
        "n": s.n, "k": s.k, "p": s.p, "N": s.level, "radius": s.radius,
        "terms": form.term_count(),
        "tail_bound": formats::number(form.tail_bound),
        "values": vals,
    });
    Ok((Body(body, t), true))
}

fn record_value(r: &FourierRecord) -> Value {
    json!({
        "omega": formats::point_value(&r.omega),
        "k": r.k,
        "heights": r.heights,
        "coeffs": r.coeffs.iter().map(formats::cmv_value).collect::<Vec<_>>(),
        "alpha": formats::cmv_value(&r.alpha),
        "beta": formats::cmv_value(&r.beta),
        "residual": formats::number(r.residual),
        "coupling": formats::number(r.coupling),
    })
}

fn fourier(cfg: &RunConfig, series: &str, freqs: &str, w: Option<&PathBuf>) -> Result<(Body, bool), CliError> {
    let (name, period) = match series {
        "eisenstein" => ("eisenstein-periodized", 1.0),
        "hecke" => ("hecke", 1.0),
        "poincare" => ("poincare", cfg.level as f64),
        _ => return Err(CliError::Usage(format!("unknown series {series:?}; expected eisenstein, hecke or poincare"))),
    };
    let omegas: Vec<Paravector> = if freqs == "auto" {
        lowest_shells(&Lattice::for_level(cfg.n, cfg.p, period).map_err(usage)?, 3)
    } else {
        let v: Value = serde_json::from_str(&read(&PathBuf::from(freqs))?).map_err(usage)?;
        let arr = v.as_array().ok_or_else(|| CliError::Usage("frequency file must hold an array".into()))?;
        arr.iter()
            .map(|x| {
                let c: Vec<f64> = x
                    .as_array()
                    .ok_or_else(|| CliError::Usage("each frequency is an array".into()))?
                    .iter()
                    .map(|c| c.as_f64().ok_or_else(|| CliError::Usage("frequency entries are numbers".into())))
                    .collect::<Result<_, _>>()?;
                let mut p = Paravector::zero(cfg.n);
                if c.len() > cfg.p + 1 {
                    return Err(CliError::Usage("frequency has too many components".into()));
                }
                for (i, v) in c.iter().enumerate() {
                    p.set(i, *v);
                }
                Ok(p)
            })
            .collect::<Result<_, _>>()?
    };
    if omegas.iter().any(|w| w.norm() == 0.0) {
        return Err(CliError::Usage("frequencies must be nonzero".into()));
    }
    let lattice = Lattice::for_level(cfg.n, cfg.p, cfg.level as f64).map_err(usage)?;
    let hs = &cfg.heights;
    // coeffs[height][omega]
    let (coeffs, k): (Vec<Vec<Multivector<Complex64>>>, i32) = match name {
        "hecke" => {
            let h = eisenstein_hecke(&hecke_spec(cfg)?, HECKE_LADDER).map_err(usage)?;
            (hecke_coefficients(&h, &omegas, hs, cfg.grid).map_err(usage)?, 0)
        }
        _ => {
            let b = build_named(cfg, name, w, false)?;
            let form = b.form.expect("series");
            if form.is_periodized() {
                (structured_coefficients(&form, &omegas, hs, cfg.grid).map_err(usage)?, b.k)
            } else {
                let per_h: Vec<Vec<_>> = hs
                    .iter()
                    .map(|&h| fourier_coefficients(form.evaluator(), &omegas, h, &lattice, cfg.grid))
                    .collect::<Result<_, _>>()
                    .map_err(usage)?;
                (per_h, b.k)
            }
        }
    };
    let mut records = Vec::new();
    let mut pass = true;
    let mut header: Vec<String> = (0..=cfg.p).map(|i| format!("w{i}")).collect();
    header.extend(["alpha_norm", "beta_norm", "residual"].map(String::from));
    let mut t = CsvTable::new(header);
    for (j, w) in omegas.iter().enumerate() {
        let col: Vec<_> = coeffs.iter().map(|row| row[j].clone()).collect();
        let rec = if name == "hecke" {
            let (alpha, residual) = fit_monogenic_profile(hs, &col, w).map_err(usage)?;
            pass &= residual < HECKE_PROFILE;
            FourierRecord {
                omega: *w,
                k,
                heights: hs.clone(),
                coeffs: col,
                alpha,
                beta: Multivector::zero(cfg.n),
                residual,
                coupling: 0.0,
            }
        } else {
            let r = fit_bessel_profile(hs, &col, w, k).map_err(usage)?;
            pass &= r.residual < PROFILE_RESIDUAL;
            r
        };
        let mut row: Vec<f64> = (0..=cfg.p).map(|i| w.get(i)).collect();
        row.extend([rec.alpha.norm(), rec.beta.norm(), rec.residual]);
        t.push_numbers(&row);
        records.push(record_value(&rec));
    }
    Ok((Body(Value::Array(records), t), pass))
}

fn petersson(
    cfg: &RunConfig,
    f: &str,
    g: &str,
    words: usize,
    w: Option<&PathBuf>,
    allow_noncuspidal: bool,
) -> Result<(Body, bool), CliError> {
    for s in [f, g] {
        if s != "eisenstein" && s != "poincare" {
            return Err(CliError::Usage(format!("unknown function {s:?}; expected eisenstein or poincare")));
        }
    }
    if cfg.p + 1 != cfg.n {
        return Err(CliError::Usage("the Petersson product runs over p = n-1".into()));
    }
    let fb = build_named(cfg, f, w, true)?;
    let gb = build_named(cfg, g, w, true)?;
    let lattice = Lattice::for_level(cfg.n, cfg.p, cfg.level as f64).map_err(usage)?;
    let mut flags = [false, false];
    if !allow_noncuspidal {
        let reps = congruence_representatives(cfg.n, cfg.p, cfg.level).map_err(usage)?;
        for (flag, b) in flags.iter_mut().zip([&fb, &gb]) {
            // a truncation too far from periodic cannot be certified cuspidal
            *flag = match cusp_coefficient_test(&b.f, b.k, &reps, &lattice, &cfg.heights, 8, ZeroModeBasis::Weinstein, ZERO_MODE) {
                Ok(r) => r.pass,
                Err(FourierError::NonPeriodic(_)) => false,
                Err(e) => return Err(usage(e)),
            };
        }
        if !flags.iter().any(|&x| x) {
            return Err(CliError::Check(
                "neither argument passed the cusp coefficient test; use --allow-noncuspidal to override".into(),
            ));
        }
    }
    let dom = FundamentalDomainApprox::new(cfg.n, cfg.level, words).map_err(usage)?;
    let mut opts = SamplingOptions::new(cfg.samples, cfg.seed);
    opts.allow_noncuspidal = allow_noncuspidal;
    let r = petersson_product(&Integrand::new(fb.f, flags[0]), &Integrand::new(gb.f, flags[1]), cfg.k, &dom, &opts)
        .map_err(usage)?;
    let body = json!({
        "value": formats::mv_value(&r.value),
        "stderr": r.stderr,
        "samples": r.samples,
        "accepted": r.accepted,
        "domain": { "n": cfg.n, "N": cfg.level, "word_length": r.word_length, "y0": r.y0, "ymax": r.ymax,
                    "tests": dom.active_tests() },
        "cusp_verified": flags,
    });
    let mut t = CsvTable::new(["blade", "value", "stderr"]);
    for (i, (v, s)) in r.value.coeffs().iter().zip(&r.stderr).enumerate() {
        t.rows.push(vec![formats::blade_name(i), format!("{v:?}"), format!("{s:?}")]);
    }
    Ok((Body(body, t), true))
}

fn acceptance_cmd(cfg: &RunConfig, quick: bool, only: Option<&str>, stdout: &mut dyn Write) -> Result<bool, CliError> {
    let ids: Vec<u8> = match only {
        Some(s) => s
            .split(',')
            .map(|x| x.trim().parse::<u8>().ok().filter(|i| (1..=15).contains(i)))
            .collect::<Option<_>>()
            .ok_or_else(|| CliError::Usage(format!("bad criterion list {s:?}")))?,
        None => (1..=15).collect(),
    };
    let mut all = true;
    let mut results = Vec::new();
    for id in ids {
        let r = acceptance::run_criterion(id, quick);
        writeln!(stdout, "{r}").map_err(usage)?;
        all &= r.pass;
        results.push(json!({ "id": r.id, "name": r.name, "pass": r.pass, "detail": r.detail }));
    }
    if let Some(p) = &cfg.output {
        std::fs::write(p, formats::to_json_string(&Value::Array(results)))
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display())))?;
    }
    Ok(all)
}
