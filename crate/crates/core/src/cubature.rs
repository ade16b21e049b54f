//! Positive weighted cubature on maximal separated sets and the
//! Marcinkiewicz–Zygmund norm comparison.

use crate::error::{Error, Result};
use crate::sphere::{self, GridMeasure, NodeSet, SHExpansion, SeparatedSet, SpherePoint};
use crate::weights::{Weight, WeightKind, WeightRef};
use crate::weights;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Default separation constant δ₀ (nodes are δ/n separated).
pub const DEFAULT_DELTA: f64 = 0.3;
/// Required certified exactness defect.
pub const RESIDUAL_TOL: f64 = 1e-8;
const MAX_ITERS: usize = 60;

#[derive(Debug, Clone)]
pub struct Cubature {
    pub nodes: SeparatedSet,
    pub weights: Vec<f64>,
    pub exactness_degree: usize,
    pub weight_fn: Weight,
    /// Scale n the nodes were built for.
    pub n: usize,
    /// Certified max |Σλ_ω Y(ω) − ∫Y w dσ| over real harmonics of degree ≤ exactness_degree.
    pub residual: f64,
}

/// Moments ∫ Y_{l,m} w dσ, l ≤ degree, of the normalized weight.
pub fn weighted_moments(w: &Weight, degree: usize) -> Result<Vec<f64>> {
    let m = (degree + 1) * (degree + 1);
    let (pts, wts) = match &w.kind {
        WeightKind::Unit => {
            let mut b = vec![0.0; m];
            b[0] = 1.0 / (4.0 * std::f64::consts::PI).sqrt();
            return Ok(b);
        }
        WeightKind::Power(a) => {
            let g = sphere::power_weight_grid(*a, degree, 1.0, sphere::Rotation::identity())?;
            let total = g.total_measure();
            (g.points(), g.weights().into_iter().map(|v| v / total).collect::<Vec<_>>())
        }
        WeightKind::Custom { .. } => {
            let g = sphere::build_grid(degree + 64, 2.0)?;
            let pts = g.points();
            let wts = g.weights().iter().zip(&pts).map(|(v, x)| v * w.eval(x)).collect();
            (pts, wts)
        }
    };
    Ok(moments(&pts, &wts, degree))
}

fn moments(pts: &[SpherePoint], wts: &[f64], degree: usize) -> Vec<f64> {
    let m = (degree + 1) * (degree + 1);
    pts.par_chunks(256)
        .zip(wts.par_chunks(256))
        .map(|(ps, ws)| {
            let mut acc = vec![0.0; m];
            let mut y = vec![0.0; m];
            for (p, w) in ps.iter().zip(ws) {
                sphere::sh_basis_into(degree, p, &mut y);
                for (a, v) in acc.iter_mut().zip(&y) {
                    *a += w * v;
                }
            }
            acc
        })
        .reduce(|| vec![0.0; m], |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        })
}

fn basis_matrix(pts: &[SpherePoint], degree: usize) -> DMatrix<f64> {
    let m = (degree + 1) * (degree + 1);
    let cols: Vec<Vec<f64>> = pts
        .par_iter()
        .map(|p| {
            let mut y = vec![0.0; m];
            sphere::sh_basis_into(degree, p, &mut y);
            y
        })
        .collect();
    DMatrix::from_fn(m, pts.len(), |i, j| cols[j][i])
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Nonnegative weights matching all moments of degree ≤ 4n.
///
/// Starts at λ₀ ∝ w(B(ω, 1/n)) rescaled to the total mass and projects onto the
/// moment constraints in the metric Σ(λ−λ₀)²/λ₀. If that leaves a nonpositive
/// weight, scaled steps Δ = DAᵀ(ADAᵀ)⁻¹(b − Aλ), D = diag(λ), are damped to keep
/// every weight positive.
pub fn solve_cubature(nodes: &SeparatedSet, w: &Weight, n: usize) -> Result<Cubature> {
    if n == 0 {
        return Err(Error::param("cubature scale n must be >= 1"));
    }
    if nodes.is_empty() {
        return Err(Error::param("empty node set"));
    }
    let degree = 4 * n;
    let m = (degree + 1) * (degree + 1);
    if nodes.len() < m {
        return Err(Error::Infeasible(format!(
            "{} nodes cannot carry {m} moment conditions; use a smaller separation δ",
            nodes.len()
        )));
    }
    let b = DVector::from_vec(weighted_moments(w, degree)?);
    let a = basis_matrix(&nodes.points, degree);
    let radius = 1.0 / n as f64;
    let init: Vec<f64> = nodes.points.par_iter().map(|x| w.cap_integral(x, radius)).collect::<Result<_>>()?;
    let mass = b[0] * (4.0 * std::f64::consts::PI).sqrt();
    let s: f64 = init.iter().sum();
    if !(s > 0.0) {
        return Err(Error::numerical("cap-measure initializer vanished", format!("sum {s}")));
    }
    let lam0 = DVector::from_iterator(init.len(), init.iter().map(|v| v * mass / s));
    let (mut lam, mut iters) = scaled_projection(&a, &b, &lam0, &lam0, mass, 3)?;
    if lam.iter().any(|v| *v <= 0.0) {
        let mut cur = lam0.clone();
        let mut total = iters;
        loop {
            let res = &b - &a * &cur;
            if max_abs(&res) <= 1e-14 * mass || total >= MAX_ITERS {
                break;
            }
            let (step, _) = scaled_projection(&a, &b, &cur, &cur, mass, 1)?;
            let delta = step - &cur;
            let mut t: f64 = 1.0;
            for (d, l) in delta.iter().zip(cur.iter()) {
                if *d < 0.0 {
                    t = t.min(0.9 * l / -d);
                }
            }
            cur += delta * t;
            total += 1;
        }
        lam = cur;
        iters = total;
    }
    let weights_out: Vec<f64> = lam.iter().copied().collect();
    if weights_out.iter().any(|v| *v < 0.0) {
        return Err(Error::Internal("negative cubature weight after a positivity-preserving step".into()));
    }
    let residual = certify(&nodes.points, &weights_out, w, degree)?;
    if residual > RESIDUAL_TOL {
        return Err(Error::Infeasible(format!(
            "moment residual {residual:.3e} after {iters} iterations exceeds {RESIDUAL_TOL:e}; use a smaller separation δ (denser nodes)"
        )));
    }
    Ok(Cubature { nodes: nodes.clone(), weights: weights_out, exactness_degree: degree, weight_fn: w.clone(), n, residual })
}

/// Repeated corrections λ ← λ + DAᵀ(ADAᵀ)⁻¹(b − Aλ) with D = diag(metric), one factorization.
fn scaled_projection(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    start: &DVector<f64>,
    metric: &DVector<f64>,
    mass: f64,
    sweeps: usize,
) -> Result<(DVector<f64>, usize)> {
    let m = a.nrows();
    let mut sa = a.clone();
    for (j, mut col) in sa.column_iter_mut().enumerate() {
        col *= metric[j].max(0.0).sqrt();
    }
    let mut gram = &sa * sa.transpose();
    let ridge = 1e-15 * gram.trace() / m as f64;
    for i in 0..m {
        gram[(i, i)] += ridge;
    }
    let chol = gram.cholesky().ok_or_else(|| Error::numerical("scaled moment Gram matrix is not positive definite", ""))?;
    let mut lam = start.clone();
    let mut used = 0;
    for _ in 0..sweeps {
        let res = b - a * &lam;
        if max_abs(&res) <= 1e-14 * mass {
            break;
        }
        used += 1;
        let g = a.transpose() * chol.solve(&res);
        lam += g.component_mul(metric);
    }
    Ok((lam, used))
}

/// Builds δ/n-separated nodes and solves for the weights.
pub fn build_cubature(w: &Weight, n: usize, delta: f64, seed: u64) -> Result<Cubature> {
    if !(delta > 0.0) {
        return Err(Error::param(format!("separation constant δ must be positive, got {delta}")));
    }
    let nodes = sphere::build_separated_set(delta / n.max(1) as f64, seed)?;
    solve_cubature(&nodes, w, n)
}

/// Moment defect recomputed from scratch (fresh moments and basis sums).
fn certify(pts: &[SpherePoint], lam: &[f64], w: &Weight, degree: usize) -> Result<f64> {
    let got = moments(pts, lam, degree);
    let want = weighted_moments(w, degree)?;
    Ok(got.iter().zip(&want).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
}

impl Cubature {
    /// Σ λ_ω f(ω).
    pub fn apply(&self, f: impl Fn(&SpherePoint) -> f64 + Sync) -> f64 {
        self.nodes.points.par_iter().zip(&self.weights).map(|(x, l)| l * f(x)).sum()
    }

    /// Σ λ_ω Y_{l,m}(ω) for l ≤ degree.
    pub fn node_moments(&self, degree: usize) -> Vec<f64> {
        moments(&self.nodes.points, &self.weights, degree)
    }

    /// max/min over nodes of λ_ω / w(B(ω, 1/n)).
    pub fn comparability_band(&self) -> Result<f64> {
        let r = 1.0 / self.n as f64;
        let ratios: Vec<f64> = self
            .nodes
            .points
            .par_iter()
            .zip(&self.weights)
            .map(|(x, l)| Ok(l / self.weight_fn.cap_integral(x, r)?))
            .collect::<Result<_>>()?;
        let mx = ratios.iter().cloned().fold(0.0, f64::max);
        let mn = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(mx / mn)
    }

    pub fn to_node_set(&self) -> NodeSet {
        let measure = self.weight_fn.exponents().map(GridMeasure::Power);
        NodeSet {
            kind: "cubature".into(),
            points: self.nodes.points.clone(),
            weights: self.weights.clone(),
            epsilon: Some(self.nodes.epsilon),
            degree: Some(self.exactness_degree),
            measure,
            residual: Some(self.residual),
        }
    }

    pub fn to_text(&self) -> String {
        self.to_node_set().to_text()
    }

    /// Parses the text form; the weight comes from the measure line (unit is power:0,0,0)
    /// and the residual is re-certified.
    pub fn from_text(text: &str) -> Result<Self> {
        let ns = NodeSet::from_text(text)?;
        let w = match &ns.measure {
            Some(GridMeasure::Power(a)) => weights::make_power_weight(a)?,
            _ => return Err(Error::Io("cubature files need a power:a,b,c measure line".into())),
        };
        let degree = ns.degree.ok_or_else(|| Error::Io("cubature file lacks a degree line".into()))?;
        if degree % 4 != 0 || degree == 0 {
            return Err(Error::Io(format!("cubature degree {degree} is not 4n")));
        }
        let epsilon = ns.epsilon.ok_or_else(|| Error::Io("cubature file lacks an epsilon line".into()))?;
        let residual = certify(&ns.points, &ns.weights, &w, degree)?;
        if residual > RESIDUAL_TOL || ns.weights.iter().any(|v| *v < 0.0) {
            return Err(Error::Precondition(format!("loaded cubature fails its certificate: residual {residual:.3e}")));
        }
        Ok(Cubature {
            nodes: SeparatedSet { points: ns.points, epsilon, maximal: false },
            weights: ns.weights,
            exactness_degree: degree,
            weight_fn: w,
            n: degree / 4,
            residual,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Cubature::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Discrete-to-continuous norm ratios over a random ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MzStats {
    pub p: f64,
    pub ratios: Vec<f64>,
    pub min: f64,
    pub max: f64,
    /// max(max, 1/min): the C in ratio ∈ [1/C, C].
    pub band: f64,
}

/// (Σ λ_ω |f(ω)|^p)^{1/p} / ‖f‖_{p,w} for `samples` random f ∈ Π_n (iid normal coefficients).
pub fn mz_check(cub: &Cubature, p: f64, samples: usize, seed: u64) -> Result<MzStats> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::param(format!("p must be positive and finite, got {p}")));
    }
    let n = cub.n;
    let grid = match &cub.weight_fn.kind {
        WeightKind::Power(a) => sphere::power_weight_grid(*a, 8 * n + 8, 4.0, sphere::Rotation::identity())?,
        _ => sphere::build_grid(8 * n + 8, 4.0)?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fs: Vec<SHExpansion> = (0..samples).map(|_| crate::operators::random_polynomial(n, &mut rng)).collect();
    let ratios: Vec<f64> = fs
        .par_iter()
        .map(|f| {
            let disc = cub.apply(|x| f.eval(x).abs().powf(p)).powf(1.0 / p);
            let cont = weights::weighted_lp_norm(&sphere::inverse_sh(f, &grid)?, p, WeightRef::Base(&cub.weight_fn), &grid)?;
            Ok(disc / cont)
        })
        .collect::<Result<_>>()?;
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(MzStats { p, ratios, min, max, band: max.max(1.0 / min) })
}
