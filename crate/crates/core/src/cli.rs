//! Experiment runner: configuration, dispatch to the numerical modules, fitted
//! summaries, CSV/JSON reports and a content-addressed run cache.

use crate::approx::{self, CubatureFamily, DyadicPieces, NearBest};
use crate::cubature::{self, DEFAULT_DELTA};
use crate::error::{Error, Result};
use crate::fit;
use crate::jacobi::JacobiParams;
use crate::kernels;
use crate::operators::{self, Ensemble, RateMode, SweepOptions};
use crate::sphere;
use crate::weights::{self, Weight, WeightKind};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const CSV_HEADER: &str =
    "experiment,d,alpha,beta,p,r,n,value,predicted_exponent,fitted_exponent,log_power,constant_band,theorem";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    KernelNorms,
    BernsteinSweep,
    WeightsCheck,
    Cubature,
    ApproxLp,
    Embedding,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::KernelNorms => "kernel-norms",
            Experiment::BernsteinSweep => "bernstein-sweep",
            Experiment::WeightsCheck => "weights-check",
            Experiment::Cubature => "cubature",
            Experiment::ApproxLp => "approx-lp",
            Experiment::Embedding => "embedding",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "kernel-norms" => Experiment::KernelNorms,
            "bernstein-sweep" => Experiment::BernsteinSweep,
            "weights-check" => Experiment::WeightsCheck,
            "cubature" => Experiment::Cubature,
            "approx-lp" => Experiment::ApproxLp,
            "embedding" => Experiment::Embedding,
            _ => return Err(Error::param(format!("unknown experiment '{s}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::param(format!("unknown format '{s}' (csv or json)"))),
        }
    }
}

/// Everything that determines a run.
///
/// Parameter lists are swept as a Cartesian product; n runs over the powers of
/// two in [n_min, n_max]. For `approx-lp`, r is the decay exponent γ of the
/// lacunary test function; for `embedding`, q lists the target exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub d: usize,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub p: Vec<f64>,
    pub r: Vec<f64>,
    pub q: Vec<f64>,
    pub n_min: usize,
    pub n_max: usize,
    pub weight: String,
    pub ensemble: Ensemble,
    pub draws: usize,
    pub seed: u64,
    pub tol: f64,
    pub oversample: f64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub format: Format,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(experiment: Experiment) -> Self {
        RunConfig {
            experiment,
            d: 3,
            alpha: vec![0.0],
            beta: vec![0.0],
            p: vec![1.0],
            r: vec![1.0],
            q: vec![2.0],
            n_min: 8,
            n_max: 64,
            weight: "unit".into(),
            ensemble: Ensemble::ZonalExtremal,
            draws: 16,
            seed: 0,
            tol: 1e-6,
            oversample: 2.0,
            out: None,
            format: Format::Csv,
            cache_dir: None,
        }
    }

    /// Applies one `key = value` assignment; lists are comma separated.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        match key.as_str() {
            "experiment" => self.experiment = Experiment::parse(value)?,
            "d" => self.d = parse_num(&key, value)?,
            "alpha" => self.alpha = parse_list(&key, value)?,
            "beta" => self.beta = parse_list(&key, value)?,
            "p" => self.p = parse_list(&key, value)?,
            "r" => self.r = parse_list(&key, value)?,
            "q" => self.q = parse_list(&key, value)?,
            "n-min" => self.n_min = parse_num(&key, value)?,
            "n-max" => self.n_max = parse_num(&key, value)?,
            "weight" => self.weight = value.to_string(),
            "ensemble" => {
                self.ensemble = match value {
                    "zonal-extremal" => Ensemble::ZonalExtremal,
                    "random-coefficients" | "random" => Ensemble::RandomCoefficients,
                    _ => return Err(Error::param(format!("unknown ensemble '{value}'"))),
                }
            }
            "draws" => self.draws = parse_num(&key, value)?,
            "seed" => self.seed = parse_num(&key, value)?,
            "tol" => self.tol = parse_num(&key, value)?,
            "oversample" => self.oversample = parse_num(&key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = Format::parse(value)?,
            "cache-dir" => self.cache_dir = Some(PathBuf::from(value)),
            _ => return Err(Error::param(format!("unknown configuration key '{key}'"))),
        }
        Ok(())
    }

    /// Reads a flat config: one `key = value` per line, `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::param(format!("config line {}: expected key = value", i + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn n_list(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut n = 1usize;
        while n <= self.n_max {
            if n >= self.n_min {
                out.push(n);
            }
            n *= 2;
        }
        out
    }

    /// Checks every parameter point against the preconditions of its experiment.
    pub fn validate(&self) -> Result<()> {
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(Error::param(format!("need 1 <= n-min <= n-max, got {}..{}", self.n_min, self.n_max)));
        }
        if self.p.is_empty() || self.r.is_empty() || self.alpha.is_empty() || self.beta.is_empty() {
            return Err(Error::param("parameter lists must be nonempty"));
        }
        if let Some(p) = self.p.iter().find(|p| !(**p > 0.0)) {
            return Err(Error::param(format!("p must be positive, got {p}")));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::param(format!("tol must lie in (0,1), got {}", self.tol)));
        }
        if !(self.oversample >= 1.0) {
            return Err(Error::param(format!("oversample must be >= 1, got {}", self.oversample)));
        }
        let sphere_exp = !matches!(self.experiment, Experiment::KernelNorms);
        if sphere_exp && self.d != 3 {
            return Err(Error::param(format!("sphere experiments run on S^2 (d = 3), got d = {}", self.d)));
        }
        if sphere_exp {
            Weight::parse(&self.weight)?;
        }
        match self.experiment {
            Experiment::KernelNorms => {
                for (&a, &b) in self.alpha.iter().flat_map(|a| self.beta.iter().map(move |b| (a, b))) {
                    JacobiParams::new(a, b)?;
                }
                if let Some(r) = self.r.iter().find(|r| !(**r >= 0.0)) {
                    return Err(Error::param(format!("r must be >= 0, got {r}")));
                }
            }
            Experiment::BernsteinSweep => {
                if let Some(r) = self.r.iter().find(|r| !(**r > 0.0)) {
                    return Err(Error::param(format!("r must be positive, got {r}")));
                }
                if self.draws == 0 {
                    return Err(Error::param("draws must be >= 1"));
                }
            }
            Experiment::WeightsCheck => {
                if let Some(p) = self.p.iter().find(|p| !(**p >= 1.0)) {
                    return Err(Error::param(format!("the A_(p,tau) quantity needs p >= 1, got {p}")));
                }
            }
            Experiment::Cubature => {
                if self.n_max > 8 {
                    return Err(Error::param(format!("cubature runs are limited to n <= 8, got {}", self.n_max)));
                }
            }
            Experiment::ApproxLp => {
                if let Some(p) = self.p.iter().find(|p| !(**p < 1.0)) {
                    return Err(Error::param(format!("approx-lp needs p in (0,1), got {p}")));
                }
                if let Some(r) = self.r.iter().find(|r| !(**r > 0.0)) {
                    return Err(Error::param(format!("decay exponent must be positive, got {r}")));
                }
                if self.n_max > 64 {
                    return Err(Error::param(format!("approx-lp runs are limited to n <= 64, got {}", self.n_max)));
                }
                if !matches!(Weight::parse(&self.weight)?.kind, WeightKind::Unit) {
                    return Err(Error::param("approx-lp runs on the unit weight"));
                }
            }
            Experiment::Embedding => {
                for &p in &self.p {
                    for &q in &self.q {
                        if !(q > p && q.is_finite()) {
                            return Err(Error::param(format!("embedding needs p < q < inf, got p={p}, q={q}")));
                        }
                    }
                }
                if self.n_max > 64 {
                    return Err(Error::param(format!("embedding runs are limited to n <= 64, got {}", self.n_max)));
                }
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON of the result-determining fields plus the library version.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        c.format = Format::Csv;
        c.cache_dir = None;
        let json = serde_json::to_string(&c).expect("config serializes");
        let mut h = Sha256::new();
        h.update(json.as_bytes());
        h.update(VERSION.as_bytes());
        format!("{:x}", h.finalize())
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::param(format!("{key}: cannot parse '{v}'")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_num(key, s.trim())).collect()
}

/// One measured value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    pub r: f64,
    pub n: usize,
    #[serde(deserialize_with = "nan_from_null")]
    pub value: f64,
}

// JSON writes NaN as null.
fn nan_from_null<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// Fitted summary of one parameter combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    pub r: f64,
    pub theorem: String,
    #[serde(deserialize_with = "nan_from_null")]
    pub predicted_exponent: f64,
    #[serde(deserialize_with = "nan_from_null")]
    pub log_power: f64,
    #[serde(deserialize_with = "nan_from_null")]
    pub fitted_exponent: f64,
    /// max/min of value/(n^predicted·log^log_power n).
    #[serde(deserialize_with = "nan_from_null")]
    pub constant_band: f64,
    pub points: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub config: RunConfig,
    pub series: Vec<Series>,
    pub wall_time_s: f64,
    pub version: String,
    #[serde(default)]
    pub cache_hit: bool,
}

impl RunRecord {
    /// Equality of everything except timing and cache provenance.
    pub fn same_results(&self, other: &RunRecord) -> bool {
        // Serialized comparison so NaN summaries compare equal.
        self.config_hash == other.config_hash
            && self.version == other.version
            && serde_json::to_string(&self.series).ok() == serde_json::to_string(&other.series).ok()
    }
}

fn summarize(mut s: Series) -> Series {
    let ns: Vec<f64> = s.points.iter().map(|p| p.n as f64).collect();
    let vs: Vec<f64> = s.points.iter().map(|p| p.value).collect();
    s.fitted_exponent = if ns.len() >= 2 && vs.iter().all(|v| *v > 0.0) { fit::top_half_slope(&ns, &vs) } else { f64::NAN };
    s.constant_band = if s.predicted_exponent.is_finite() && !vs.is_empty() && vs.iter().all(|v| *v > 0.0) {
        let cs: Vec<f64> = ns
            .iter()
            .zip(&vs)
            .map(|(n, v)| {
                let lp = if s.log_power != 0.0 { n.ln().max(1.0).powf(s.log_power) } else { 1.0 };
                v / (n.powf(s.predicted_exponent) * lp)
            })
            .collect();
        fit::band(&cs)
    } else {
        f64::NAN
    };
    s
}

fn series(alpha: f64, beta: f64, p: f64, r: f64, theorem: &str, exponent: f64, log_power: f64) -> Series {
    Series {
        alpha,
        beta,
        p,
        r,
        theorem: theorem.into(),
        predicted_exponent: exponent,
        log_power,
        fitted_exponent: f64::NAN,
        constant_band: f64::NAN,
        points: Vec::new(),
    }
}

fn at(e: Error, what: String) -> Error {
    match e {
        Error::Parameter(m) => Error::Parameter(format!("{what}: {m}")),
        Error::Range(m) => Error::Range(format!("{what}: {m}")),
        Error::Numerical { message, diagnostics } => Error::Numerical { message: format!("{what}: {message}"), diagnostics },
        Error::Convergence(m) => Error::Convergence(format!("{what}: {m}")),
        Error::Precondition(m) => Error::Precondition(format!("{what}: {m}")),
        Error::Infeasible(m) => Error::Infeasible(format!("{what}: {m}")),
        Error::Io(m) => Error::Io(format!("{what}: {m}")),
        Error::Internal(m) => Error::Internal(format!("{what}: {m}")),
    }
}

/// Validates, consults the cache, runs and stores the record.
pub fn run_experiment(config: &RunConfig) -> Result<RunRecord> {
    config.validate()?;
    let hash = config.hash();
    if let Some(dir) = &config.cache_dir {
        let path = dir.join(format!("{hash}.json"));
        if path.exists() {
            let text = std::fs::read_to_string(&path)?;
            let mut rec: RunRecord =
                serde_json::from_str(&text).map_err(|e| Error::Io(format!("corrupt cache entry {}: {e}", path.display())))?;
            if rec.config_hash == hash {
                rec.cache_hit = true;
                rec.config = config.clone();
                return Ok(rec);
            }
        }
    }
    let start = Instant::now();
    let series = match config.experiment {
        Experiment::KernelNorms => kernel_norms(config)?,
        Experiment::BernsteinSweep => bernstein(config)?,
        Experiment::WeightsCheck => weights_check(config)?,
        Experiment::Cubature => cubature_run(config)?,
        Experiment::ApproxLp => approx_lp(config)?,
        Experiment::Embedding => embedding(config)?,
    };
    let rec = RunRecord {
        config_hash: hash.clone(),
        config: config.clone(),
        series: series.into_iter().map(summarize).collect(),
        wall_time_s: start.elapsed().as_secs_f64(),
        version: VERSION.into(),
        cache_hit: false,
    };
    if let Some(dir) = &config.cache_dir {
        std::fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(&rec).map_err(|e| Error::Internal(e.to_string()))?;
        std::fs::write(dir.join(format!("{hash}.json")), json)?;
    }
    Ok(rec)
}

fn kernel_norms(c: &RunConfig) -> Result<Vec<Series>> {
    let mut out = Vec::new();
    for &a in &c.alpha {
        for &b in &c.beta {
            let q = JacobiParams::new(a, b)?;
            for &p in &c.p {
                for &r in &c.r {
                    let mut s = if r > 0.0 {
                        let pred = operators::predict_rate(RateMode::JacobiThm23 { alpha: a }, p, r)?;
                        series(a, b, p, r, &pred.theorem, pred.exponent, pred.log_power)
                    } else {
                        series(a, b, p, r, "jacobi-thm2.3", 0.0, 0.0)
                    };
                    for n in c.n_list() {
                        let what = format!("alpha={a}, beta={b}, p={p}, r={r}, n={n}");
                        let base = kernels::build_g(n, 0.0, q).and_then(|g| g.norm(p, Some(c.tol))).map_err(|e| at(e, what.clone()))?;
                        let num = if r > 0.0 {
                            kernels::build_g(n, r, q).and_then(|g| g.norm(p, Some(c.tol))).map_err(|e| at(e, what))?
                        } else {
                            base
                        };
                        s.points.push(Point { alpha: a, beta: b, p, r, n, value: num / base });
                    }
                    out.push(s);
                }
            }
        }
    }
    Ok(out)
}

fn rate_mode(w: &Weight, d: usize) -> RateMode {
    match w.kind {
        WeightKind::Unit => RateMode::UnweightedThm11 { d },
        _ => RateMode::DoublingThm41 { d, s_w: w.s_w },
    }
}

fn bernstein(c: &RunConfig) -> Result<Vec<Series>> {
    let w = Weight::parse(&c.weight)?;
    let opts = SweepOptions { draws: c.draws, seed: c.seed, oversample: c.oversample, tol: c.tol };
    let ns = c.n_list();
    let mut out = Vec::new();
    for &p in &c.p {
        for &r in &c.r {
            let pred = operators::predict_rate(rate_mode(&w, c.d), p, r)?;
            let mut s = series(0.0, 0.0, p, r, &pred.theorem, pred.exponent, pred.log_power);
            let t = operators::bernstein_sweep(c.ensemble, p, r, &w, &ns, &opts).map_err(|e| at(e, format!("p={p}, r={r}")))?;
            s.points = t.rows.iter().map(|row| Point { alpha: 0.0, beta: 0.0, p, r, n: row.n, value: row.max_ratio }).collect();
            out.push(s);
        }
    }
    Ok(out)
}

fn weights_check(c: &RunConfig) -> Result<Vec<Series>> {
    let w = Weight::parse(&c.weight)?;
    let mut out = Vec::new();
    for &p in &c.p {
        let profiles: Vec<(usize, weights::ApTauProfile)> = c
            .n_list()
            .into_iter()
            .map(|n| {
                let nf = n as f64;
                weights::ap_tau_profile(&w, p, nf, &weights::degeneracy_caps(nf)).map(|pr| (n, pr)).map_err(|e| at(e, format!("p={p}, n={n}")))
            })
            .collect::<Result<_>>()?;
        for &r in &c.r {
            let mut s = series(0.0, 0.0, p, r, "ap-tau-class", 0.0, 0.0);
            s.points = profiles.iter().map(|(n, pr)| Point { alpha: 0.0, beta: 0.0, p, r, n: *n, value: pr.quantity(r) }).collect();
            out.push(s);
        }
    }
    Ok(out)
}

fn cubature_run(c: &RunConfig) -> Result<Vec<Series>> {
    let w = Weight::parse(&c.weight)?;
    let cubs: Vec<(usize, cubature::Cubature)> = c
        .n_list()
        .into_iter()
        .map(|n| cubature::build_cubature(&w, n, DEFAULT_DELTA, c.seed).map(|cb| (n, cb)).map_err(|e| at(e, format!("n={n}"))))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for &p in &c.p {
        let mut s = series(0.0, 0.0, p, 0.0, "mz-cubature", 0.0, 0.0);
        for (n, cb) in &cubs {
            let st = cubature::mz_check(cb, p, c.draws, c.seed).map_err(|e| at(e, format!("p={p}, n={n}")))?;
            s.points.push(Point { alpha: 0.0, beta: 0.0, p, r: 0.0, n: *n, value: st.band });
        }
        out.push(s);
    }
    Ok(out)
}

fn approx_lp(c: &RunConfig) -> Result<Vec<Series>> {
    const DEPTH: usize = 4;
    let ns = c.n_list();
    let family = CubatureFamily::build(DEPTH, DEFAULT_DELTA, c.seed)?;
    let top = *ns.last().unwrap();
    let levels = (usize::BITS - top.leading_zeros()) as usize;
    let unit = Weight::unit();
    let mut out = Vec::new();
    for &p in &c.p {
        for &gamma in &c.r {
            let f = approx::lacunary_function(gamma, DEPTH, c.seed);
            let pieces = DyadicPieces::build(&f, levels.max(DEPTH + 1), p, &unit, NearBest::Truncation)?;
            let mut s = series(0.0, 0.0, p, gamma, "vn-sigma", 0.0, 0.0);
            for &n in &ns {
                let what = format!("p={p}, gamma={gamma}, n={n}");
                let v = approx::vn_sigma_approximant(&f, n, p, &family, NearBest::Truncation).map_err(|e| at(e, what.clone()))?;
                let deg = v.max_degree.max(f.max_degree);
                let grid = sphere::build_grid(2 * deg, c.oversample).map_err(|e| at(e, what.clone()))?;
                let diff = f.resized(deg).sub(&v.resized(deg));
                let err = sphere::lp_norm_sphere(&sphere::inverse_sh(&diff, &grid)?, p, &grid).map_err(|e| at(e, what))?;
                let bound = approx::approximation_bound(&pieces, n, p);
                s.points.push(Point { alpha: 0.0, beta: 0.0, p, r: gamma, n, value: err / bound });
            }
            out.push(s);
        }
    }
    Ok(out)
}

fn embedding(c: &RunConfig) -> Result<Vec<Series>> {
    let w = Weight::parse(&c.weight)?;
    let depth = c.n_list().last().map(|n| n.trailing_zeros() as usize).unwrap_or(1).max(1);
    let mut out = Vec::new();
    for &p in &c.p {
        for &q in &c.q {
            // Margin ε = ν/3; the q-norm partial sums grow at least like n^{ε/2}.
            let eps = w.s_w * (1.0 / p - 1.0 / q) / 3.0;
            let tab = approx::sharpness_series(&w, p, q, eps, depth).map_err(|e| at(e, format!("p={p}, q={q}")))?;
            let mut s = series(0.0, 0.0, p, q, "embedding-sharpness", eps / 2.0, 0.0);
            s.points = tab
                .rows
                .iter()
                .filter(|row| (1usize << row.n) >= c.n_min)
                .map(|row| Point { alpha: 0.0, beta: 0.0, p, r: q, n: 1usize << row.n, value: row.partial_q })
                .collect();
            out.push(s);
        }
    }
    Ok(out)
}

fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:e}")
    }
}

/// CSV with the fixed column schema; an empty record yields the header alone.
pub fn to_csv(rec: &RunRecord) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    let name = rec.config.experiment.name();
    for se in &rec.series {
        for pt in &se.points {
            let _ = writeln!(
                s,
                "{name},{},{},{},{},{},{},{},{},{},{},{},{}",
                rec.config.d,
                num(pt.alpha),
                num(pt.beta),
                num(pt.p),
                num(pt.r),
                pt.n,
                num(pt.value),
                num(se.predicted_exponent),
                num(se.fitted_exponent),
                num(se.log_power),
                num(se.constant_band),
                se.theorem
            );
        }
    }
    s
}

pub fn to_json(rec: &RunRecord) -> Result<String> {
    serde_json::to_string_pretty(rec).map_err(|e| Error::Internal(e.to_string()))
}

pub fn from_json(text: &str) -> Result<RunRecord> {
    serde_json::from_str(text).map_err(|e| Error::param(format!("invalid run record: {e}")))
}

/// Writes the report to `path`, or returns it for stdout when `path` is None.
pub fn emit_report(rec: &RunRecord, format: Format, path: Option<&Path>) -> Result<String> {
    let body = match format {
        Format::Csv => to_csv(rec),
        Format::Json => to_json(rec)?,
    };
    if let Some(p) = path {
        std::fs::write(p, &body)?;
    }
    Ok(body)
}

/// Process exit code for an error: 2 for rejected input, 1 for runtime failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parameter(_) | Error::Precondition(_) => 2,
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> RunConfig {
        let mut c = RunConfig::new(Experiment::KernelNorms);
        c.p = vec![0.4];
        c.r = vec![4.0];
        c.n_min = 32;
        c.n_max = 512;
        c
    }

    #[test]
    fn kernel_norms_slope() {
        let rec = run_experiment(&quick()).unwrap();
        assert_eq!(rec.series.len(), 1);
        let s = &rec.series[0];
        assert_eq!(s.points.len(), 5);
        assert!((s.fitted_exponent - 4.0).abs() < 0.15, "{}", s.fitted_exponent);
        assert_eq!(s.predicted_exponent, 4.0);
    }

    #[test]
    fn config_text_and_overrides() {
        let mut c = RunConfig::new(Experiment::Cubature);
        c.apply_text("# sweep\nexperiment = bernstein-sweep\np = 0.5, 2\nn_max = 32\nweight = power:1,0,0\n").unwrap();
        assert_eq!(c.experiment, Experiment::BernsteinSweep);
        assert_eq!(c.p, vec![0.5, 2.0]);
        assert_eq!(c.n_list(), vec![8, 16, 32]);
        c.set("ensemble", "random").unwrap();
        assert_eq!(c.ensemble, Ensemble::RandomCoefficients);
        assert!(c.apply_text("bogus").is_err());
        assert!(c.set("colour", "red").is_err());
    }

    #[test]
    fn invalid_p_is_rejected_before_work() {
        let mut c = quick();
        c.p = vec![0.0];
        let e = run_experiment(&c).unwrap_err();
        assert_eq!(exit_code(&e), 2);
        let mut c = RunConfig::new(Experiment::WeightsCheck);
        c.p = vec![0.5];
        assert!(matches!(c.validate(), Err(Error::Parameter(_))));
    }

    #[test]
    fn hash_ignores_output_plumbing() {
        let a = quick();
        let mut b = quick();
        b.out = Some("x.csv".into());
        b.format = Format::Json;
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn csv_schema_and_empty_sweep() {
        let mut c = quick();
        c.n_max = 64;
        let rec = run_experiment(&c).unwrap();
        let csv = to_csv(&rec);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert_eq!(lines.count(), 2);
        let empty = RunRecord { series: Vec::new(), ..rec };
        assert_eq!(to_csv(&empty), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn json_round_trip() {
        let mut c = quick();
        c.n_max = 64;
        let rec = run_experiment(&c).unwrap();
        let back = from_json(&to_json(&rec).unwrap()).unwrap();
        assert_eq!(back, rec);
    }

    #[test]
    fn cache_hit_reproduces_record() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = quick();
        c.n_max = 64;
        c.cache_dir = Some(dir.path().to_path_buf());
        let a = run_experiment(&c).unwrap();
        assert!(!a.cache_hit);
        let b = run_experiment(&c).unwrap();
        assert!(b.cache_hit);
        assert!(a.same_results(&b));
        assert_eq!(a.wall_time_s, b.wall_time_s);
        c.cache_dir = None;
        let fresh = run_experiment(&c).unwrap();
        assert!(fresh.same_results(&a));
    }
}
