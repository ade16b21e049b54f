//! Spectral operators on S² expansions and zonal kernels, best-approximation
//! brackets, Bernstein-ratio regime predictions and sweeps.

use crate::error::{Error, Result};
use crate::fit;
use crate::jacobi::JacobiParams;
use crate::kernels::{self, CutoffFunction, KernelLabel, ZonalKernel};
use crate::sphere::{self, Rotation, SHExpansion, SphereGrid, SpherePoint};
use crate::weights::{self, Weight, WeightKind, WeightRef};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Objects whose degree-k components can be rescaled.
pub trait Spectral: Sized {
    fn apply_multiplier(&self, m: &dyn Fn(usize) -> f64) -> Result<Self>;
    /// Laplace–Beltrami eigenvalue magnitude on degree k.
    fn eigenvalue(&self, k: usize) -> f64;
}

impl Spectral for SHExpansion {
    fn apply_multiplier(&self, m: &dyn Fn(usize) -> f64) -> Result<Self> {
        Ok(self.map_degrees(m))
    }

    fn eigenvalue(&self, k: usize) -> f64 {
        (k * (k + 1)) as f64
    }
}

impl Spectral for ZonalKernel {
    fn apply_multiplier(&self, m: &dyn Fn(usize) -> f64) -> Result<Self> {
        self.map_coeffs(m, KernelLabel::Custom(format!("{:?}+multiplier", self.label())))
    }

    fn eigenvalue(&self, k: usize) -> f64 {
        let kf = k as f64;
        kf * (kf + self.params().lambda())
    }
}

/// Degree-k component.
pub fn project(f: &SHExpansion, k: usize) -> Result<SHExpansion> {
    if k > f.max_degree {
        return Err(Error::param(format!("degree {k} exceeds max degree {}", f.max_degree)));
    }
    Ok(f.map_degrees(|l| if l == k { 1.0 } else { 0.0 }))
}

/// (−Δ₀)^{r/2}: degree-k block times (k(k+d−2))^{r/2}, zonal path (k(k+α+β+1))^{r/2}.
pub fn frac_laplace<T: Spectral>(f: &T, r: f64) -> Result<T> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::param(format!("order r must be >= 0, got {r}")));
    }
    f.apply_multiplier(&|k| if k == 0 { if r == 0.0 { 1.0 } else { 0.0 } } else { f.eigenvalue(k).powf(r / 2.0) })
}

/// V_n: degree-k block times η(k/n).
pub fn vallee_poussin<T: Spectral>(f: &T, n: usize) -> Result<T> {
    if n == 0 {
        return Err(Error::param("de la Vallée Poussin scale must be >= 1"));
    }
    f.apply_multiplier(&|k| kernels::eta(k as f64 / n as f64))
}

/// σ_n^δ: degree-k block times A_{n−k}^δ/A_n^δ for k ≤ n, zero above.
pub fn cesaro_mean<T: Spectral>(f: &T, n: usize, delta: f64) -> Result<T> {
    if !(delta > -1.0) {
        return Err(Error::param(format!("Cesàro order must exceed -1, got {delta}")));
    }
    f.apply_multiplier(&|k| kernels::cesaro_multiplier(n, k, delta))
}

/// ∫_{S²}|K(x·y)|dσ(y) for the V_n reproducing kernel, an upper bound for ‖V_n‖_{p→p}, p ≥ 1.
pub fn vallee_poussin_lebesgue_constant(n: usize) -> Result<f64> {
    let q = JacobiParams::new(0.0, 0.0)?;
    // V_n f = (4π)^{-1}∫ f(y) Σ η(k/n)E_k(x·y) dσ(y); the (0,0) density is sinθ/2 dθ.
    kernels::build_localized(CutoffFunction::eta(), n, q)?.norm(1.0, Some(1e-8))
}

/// Two-sided estimate of E_n(f)_p on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestApprox {
    /// Rigorous lower bound (0 when none is available, p < 1 and p ≠ 2).
    pub lower: f64,
    /// ‖f − V_{⌊n/2⌋} f‖_p, V_{⌊n/2⌋}f ∈ Π_n.
    pub upper: f64,
    /// ‖f − V_n f‖_p, comparable to E_n(f)_p up to the near-best constant.
    pub near_best: f64,
    /// Tail energy, the exact value when p = 2.
    pub exact: Option<f64>,
}

/// Best-approximation bracket for an expansion, norms on `grid` (surface measure).
///
/// Lower bounds: p = 2 exact; p > 2 uses ‖g‖_p ≥ (4π)^{1/p−1/2}‖g‖₂; p ≥ 1 also uses
/// ‖f − V_n f‖_p ≤ (1 + L_n)E_n(f)_p with L_n the Lebesgue constant of V_n.
pub fn best_approx(f: &SHExpansion, n: usize, p: f64, grid: &SphereGrid) -> Result<BestApprox> {
    if !(p > 0.0) {
        return Err(Error::param(format!("p must be positive, got {p}")));
    }
    let tail = ((n + 1)..=f.max_degree).map(|l| f.degree_energy(l)).sum::<f64>().sqrt();
    if n >= f.degree() {
        return Ok(BestApprox { lower: 0.0, upper: 0.0, near_best: 0.0, exact: if p == 2.0 { Some(0.0) } else { None } });
    }
    if p == 2.0 {
        return Ok(BestApprox { lower: tail, upper: tail, near_best: tail, exact: Some(tail) });
    }
    let norm = |g: &SHExpansion| -> Result<f64> { sphere::lp_norm_sphere(&sphere::inverse_sh(g, grid)?, p, grid) };
    let upper = if n >= 2 { norm(&f.sub(&vallee_poussin(f, n / 2)?))? } else { norm(&f.sub(&project(f, 0)?))? };
    let upper = if n == 0 { norm(&f.sub(&project(f, 0)?))?.min(norm(f)?) } else { upper };
    let near_best = if n >= 1 { norm(&f.sub(&vallee_poussin(f, n)?))? } else { upper };
    let mut lower: f64 = 0.0;
    if p > 2.0 {
        lower = lower.max((4.0 * PI).powf(1.0 / p - 0.5) * tail);
    }
    if p >= 1.0 && n >= 1 {
        lower = lower.max(near_best / (1.0 + vallee_poussin_lebesgue_constant(n)?));
    }
    Ok(BestApprox { lower: lower.min(upper), upper, near_best, exact: None })
}

/// Which theorem a rate prediction follows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RateMode {
    /// Unweighted sphere S^{d−1}, threshold (d−1)(1/p−1).
    UnweightedThm11 { d: usize },
    /// Jacobi ratio ‖G_{n,r}‖/‖G_n‖, threshold (2α+2)(1/p−1).
    JacobiThm23 { alpha: f64 },
    /// Doubling weight with exponent s_w, threshold δ(p,w).
    DoublingThm41 { d: usize, s_w: f64 },
}

impl RateMode {
    pub fn tag(&self) -> &'static str {
        match self {
            RateMode::UnweightedThm11 { .. } => "unweighted-thm1.1",
            RateMode::JacobiThm23 { .. } => "jacobi-thm2.3",
            RateMode::DoublingThm41 { .. } => "doubling-thm4.1",
        }
    }

    /// Parses a mode tag with its geometry.
    pub fn from_tag(tag: &str, d: usize, alpha: f64, s_w: f64) -> Result<Self> {
        match tag {
            "unweighted-thm1.1" => Ok(RateMode::UnweightedThm11 { d }),
            "jacobi-thm2.3" => Ok(RateMode::JacobiThm23 { alpha }),
            "doubling-thm4.1" => Ok(RateMode::DoublingThm41 { d, s_w }),
            _ => Err(Error::param(format!("unknown rate mode '{tag}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Supercritical,
    Critical,
    Subcritical,
    EvenInteger,
}

/// Predicted growth n^exponent · log^log_power n of the Bernstein ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimePrediction {
    pub theorem: String,
    pub exponent: f64,
    pub log_power: f64,
    pub regime: Regime,
    pub critical_threshold: f64,
    /// q = max{p, (d−1+pr)/(d−1)}.
    pub aq_index: f64,
}

fn is_even_integer(r: f64) -> bool {
    r > 0.0 && r.fract() == 0.0 && (r as i64) % 2 == 0
}

/// Exponent and log power of the sharp Bernstein constant.
///
/// Even r is always reported as `EvenInteger` with exponent r (no saturation).
/// The Jacobi-ratio theorem excludes even r when α+β+1 > 0; the same label is used.
pub fn predict_rate(mode: RateMode, p: f64, r: f64) -> Result<RegimePrediction> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::param(format!("p must be positive and finite, got {p}")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::param(format!("r must be positive, got {r}")));
    }
    let (threshold, crit_log, dim) = match mode {
        RateMode::UnweightedThm11 { d } => {
            if d < 3 {
                return Err(Error::param(format!("dimension must be >= 3, got {d}")));
            }
            ((d as f64 - 1.0) * (1.0 / p - 1.0), 1.0 / p, d as f64)
        }
        RateMode::JacobiThm23 { alpha } => {
            if !(alpha >= -0.5) {
                return Err(Error::param(format!("alpha must be >= -1/2, got {alpha}")));
            }
            ((2.0 * alpha + 2.0) * (1.0 / p - 1.0), 1.0 / p, 2.0 * alpha + 3.0)
        }
        RateMode::DoublingThm41 { d, s_w } => {
            if d < 3 || !(s_w >= d as f64 - 1.0) {
                return Err(Error::param(format!("need d >= 3 and s_w >= d-1, got d={d}, s_w={s_w}")));
            }
            let dm = d as f64 - 1.0;
            let delta = if p <= 1.0 { s_w / p - dm } else { (s_w - dm) / p };
            (delta, (1.0 / p).max(1.0), d as f64)
        }
    };
    let aq_index = p.max((dim - 1.0 + p * r) / (dim - 1.0));
    let (exponent, log_power, regime) = if is_even_integer(r) {
        (r, 0.0, Regime::EvenInteger)
    } else if r > threshold {
        (r, 0.0, Regime::Supercritical)
    } else if (r - threshold).abs() <= 1e-12 * threshold.abs().max(1.0) {
        (r, crit_log, Regime::Critical)
    } else {
        (threshold, 0.0, Regime::Subcritical)
    };
    Ok(RegimePrediction { theorem: mode.tag().into(), exponent, log_power, regime, critical_threshold: threshold, aq_index })
}

/// Test-function family for Bernstein sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ensemble {
    ZonalExtremal,
    RandomCoefficients,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub draws: usize,
    pub seed: u64,
    /// Node-count inflation for |f|^p quadrature.
    pub oversample: f64,
    /// Relative tolerance of the adaptive zonal norms.
    pub tol: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { draws: 64, seed: 0, oversample: 3.0, tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    /// Max over the ensemble of ‖(−Δ₀)^{r/2}f‖_{p,w}/‖f‖_{p,w}.
    pub max_ratio: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub ensemble: Ensemble,
    pub p: f64,
    pub r: f64,
    pub weight: String,
    pub rows: Vec<SweepRow>,
    /// Least-squares log–log slope over the top half of the n list.
    pub top_half_slope: f64,
}

/// Bernstein ratios ‖(−Δ₀)^{r/2}f‖_{p,w}/‖f‖_{p,w} over f ∈ Π_n, for each n in `n_list`.
///
/// Zonal-extremal: f = G_n(x·y) with y at the pole (unit weight, adaptive zonal
/// grids) or at each coordinate axis (power weights, power grids in the axis frame),
/// taking the largest ratio. Random: iid N(0,1) coefficients of every Y_{l,m}, l ≤ n.
pub fn bernstein_sweep(
    ensemble: Ensemble,
    p: f64,
    r: f64,
    w: &Weight,
    n_list: &[usize],
    opts: &SweepOptions,
) -> Result<SweepTable> {
    if !(p > 0.0) {
        return Err(Error::param(format!("p must be positive, got {p}")));
    }
    if !(r >= 0.0) {
        return Err(Error::param(format!("r must be >= 0, got {r}")));
    }
    if n_list.is_empty() || n_list.iter().any(|&n| n == 0) {
        return Err(Error::param("n list must be nonempty with n >= 1"));
    }
    let rows: Vec<SweepRow> = n_list
        .iter()
        .map(|&n| match ensemble {
            Ensemble::ZonalExtremal => zonal_ratio(n, p, r, w, opts).map(|v| SweepRow { n, max_ratio: v, samples: 1 }),
            Ensemble::RandomCoefficients => random_ratio(n, p, r, w, opts),
        })
        .collect::<Result<_>>()?;
    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let vs: Vec<f64> = rows.iter().map(|r| r.max_ratio).collect();
    let slope = if rows.len() >= 2 { fit::top_half_slope(&ns, &vs) } else { f64::NAN };
    Ok(SweepTable { ensemble, p, r, weight: w.spec(), rows, top_half_slope: slope })
}

/// G_n coefficients for α = β = 0 and its fractional image.
fn zonal_pair(n: usize, r: f64) -> Result<(ZonalKernel, ZonalKernel)> {
    let q = JacobiParams::new(0.0, 0.0)?;
    Ok((kernels::build_g(n, 0.0, q)?, kernels::build_g(n, r, q)?))
}

fn zonal_ratio(n: usize, p: f64, r: f64, w: &Weight, opts: &SweepOptions) -> Result<f64> {
    let (g0, gr) = zonal_pair(n, r)?;
    match &w.kind {
        WeightKind::Unit => {
            let f = SHExpansion::from_zonal(g0.coeffs(), &SpherePoint::north());
            let df = frac_laplace(&f, r)?;
            Ok(sphere::lp_norm_zonal_sphere(&df, p, opts.tol)? / sphere::lp_norm_zonal_sphere(&f, p, opts.tol)?)
        }
        WeightKind::Power(a) => {
            let deg = g0.degree().max(1);
            let mut best: f64 = 0.0;
            for j in 0..3 {
                let frame = Rotation::pole_to_axis(j, false)?;
                let grid = sphere::power_weight_grid(*a, 2 * deg, opts.oversample, frame)?.collapse_azimuth();
                let ring = |k: &ZonalKernel| -> Vec<f64> { grid.thetas.iter().map(|t| k.eval(t.cos())).collect() };
                let num = sphere::lp_norm_sphere(&ring(&gr), p, &grid)?;
                let den = sphere::lp_norm_sphere(&ring(&g0), p, &grid)?;
                best = best.max(num / den);
            }
            Ok(best)
        }
        WeightKind::Custom { .. } => {
            let grid = sphere::build_grid(2 * g0.degree().max(1), opts.oversample)?;
            let e = SpherePoint::north();
            let s0 = grid.sample(|x| g0.eval(x.dot(&e)));
            let sr = grid.sample(|x| gr.eval(x.dot(&e)));
            Ok(weights::weighted_lp_norm(&sr, p, WeightRef::Base(w), &grid)?
                / weights::weighted_lp_norm(&s0, p, WeightRef::Base(w), &grid)?)
        }
    }
}

/// Grid carrying the weight for degree-n random polynomials.
pub fn weighted_grid(w: &Weight, degree: usize, oversample: f64) -> Result<SphereGrid> {
    match &w.kind {
        WeightKind::Unit => sphere::build_grid(degree, oversample),
        WeightKind::Power(a) => sphere::power_weight_grid(*a, degree, oversample, Rotation::identity()),
        WeightKind::Custom { .. } => sphere::build_grid(degree, oversample),
    }
}

/// Expansion with iid standard normal coefficients up to degree n.
pub fn random_polynomial(n: usize, rng: &mut ChaCha8Rng) -> SHExpansion {
    let c = (0..(n + 1) * (n + 1)).map(|_| StandardNormal.sample(rng)).collect();
    SHExpansion { max_degree: n, coeffs: c }
}

fn random_ratio(n: usize, p: f64, r: f64, w: &Weight, opts: &SweepOptions) -> Result<SweepRow> {
    let grid = weighted_grid(w, 2 * n, opts.oversample)?;
    // One seeded stream per (seed, n); draws split deterministically.
    let seeds: Vec<u64> = {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        (0..opts.draws).map(|_| rand::Rng::gen(&mut rng)).collect()
    };
    let ratios: Vec<f64> = seeds
        .par_iter()
        .map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let f = random_polynomial(n, &mut rng);
            let df = frac_laplace(&f, r)?;
            let a = weights::weighted_lp_norm(&sphere::inverse_sh(&df, &grid)?, p, WeightRef::Base(w), &grid)?;
            let b = weights::weighted_lp_norm(&sphere::inverse_sh(&f, &grid)?, p, WeightRef::Base(w), &grid)?;
            Ok(a / b)
        })
        .collect::<Result<_>>()?;
    Ok(SweepRow { n, max_ratio: ratios.iter().cloned().fold(0.0, f64::max), samples: ratios.len() })
}
