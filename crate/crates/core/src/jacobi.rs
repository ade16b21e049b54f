//! Jacobi polynomials, the normalized kernels E_k, Gauss–Jacobi rules and the
//! weighted 1-D (quasi-)norm
//!
//! ‖g‖_{p,α,β} = ( ∫_0^π |g(cos θ)|^p (sin θ/2)^{2α+1} (cos θ/2)^{2β+1} dθ )^{1/p}.

use crate::error::{Error, Result};
use crate::quad::{self, PanelOptions};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Jacobi indices with α ≥ β ≥ −1/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiParams {
    alpha: f64,
    beta: f64,
}

impl JacobiParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(Error::param("Jacobi indices must be finite"));
        }
        if beta < -0.5 || alpha < beta {
            return Err(Error::param(format!(
                "Jacobi indices need alpha >= beta >= -1/2, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(JacobiParams { alpha, beta })
    }

    /// Parameters of the zonal reduction on S^{d−1}: α = β = (d−3)/2.
    pub fn for_dimension(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::param("dimension must be at least 2"));
        }
        let a = (d as f64 - 3.0) / 2.0;
        JacobiParams::new(a, a)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// α + β + 1, the shift in the eigenvalue k(k+α+β+1).
    pub fn lambda(&self) -> f64 {
        self.alpha + self.beta + 1.0
    }

    /// Same β, α raised by `by`.
    pub fn shift_alpha(&self, by: f64) -> Self {
        JacobiParams { alpha: self.alpha + by, beta: self.beta }
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(t.abs() <= 1.0 + 1e-12) {
        return Err(Error::param(format!("t={t} outside [-1,1]")));
    }
    Ok(())
}

/// P_k^{(α,β)}(t) by the forward three-term recurrence.
pub fn jacobi_poly(params: JacobiParams, k: usize, t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(jacobi_poly_unchecked(params, k, t))
}

pub(crate) fn jacobi_poly_unchecked(params: JacobiParams, k: usize, t: f64) -> f64 {
    let (a, b) = (params.alpha, params.beta);
    let mut p0 = 1.0;
    if k == 0 {
        return p0;
    }
    let mut p1 = (a + 1.0) + (a + b + 2.0) * (t - 1.0) / 2.0;
    for n in 2..=k {
        let p2 = recurrence_step(a, b, n, t, p1, p0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

#[inline]
fn recurrence_step(a: f64, b: f64, n: usize, t: f64, p1: f64, p0: f64) -> f64 {
    let nf = n as f64;
    let s = 2.0 * nf + a + b;
    let c0 = 2.0 * nf * (nf + a + b) * (s - 2.0);
    let c1 = (s - 1.0) * (s * (s - 2.0) * t + a * a - b * b);
    let c2 = 2.0 * (nf + a - 1.0) * (nf + b - 1.0) * s;
    (c1 * p1 - c2 * p0) / c0
}

/// Fill `out[k] = P_k(t)` for k < out.len().
pub fn jacobi_values(params: JacobiParams, t: f64, out: &mut [f64]) {
    let (a, b) = (params.alpha, params.beta);
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    out[1] = (a + 1.0) + (a + b + 2.0) * (t - 1.0) / 2.0;
    for n in 2..out.len() {
        out[n] = recurrence_step(a, b, n, t, out[n - 1], out[n - 2]);
    }
}

fn lgamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

/// Normalization h_k with E_k = h_k P_k, h_k = (2k+α+β+1)Γ(k+α+β+1)/Γ(k+β+1).
pub fn kernel_h(params: JacobiParams, k: usize) -> Result<f64> {
    let (a, b) = (params.alpha, params.beta);
    let kf = k as f64;
    let v = if k == 0 {
        // (α+β+1)Γ(α+β+1) = Γ(α+β+2), valid also when α+β+1 = 0.
        (lgamma(a + b + 2.0) - lgamma(b + 1.0)).exp()
    } else {
        (2.0 * kf + a + b + 1.0) * (lgamma(kf + a + b + 1.0) - lgamma(kf + b + 1.0)).exp()
    };
    if !v.is_finite() {
        return Err(Error::Range(format!("h_{k} not representable for {params:?}")));
    }
    Ok(v)
}

/// h_0..h_kmax by the ratio recurrence seeded from log-gamma values.
pub fn kernel_h_table(params: JacobiParams, kmax: usize) -> Result<Vec<f64>> {
    let (a, b) = (params.alpha, params.beta);
    let mut h = Vec::with_capacity(kmax + 1);
    h.push(kernel_h(params, 0)?);
    if kmax >= 1 {
        h.push(kernel_h(params, 1)?);
    }
    for k in 2..=kmax {
        let kf = k as f64;
        let r = (2.0 * kf + a + b + 1.0) / (2.0 * kf + a + b - 1.0) * (kf + a + b) / (kf + b);
        let v = h[k - 1] * r;
        if !v.is_finite() {
            return Err(Error::Range(format!("h_{k} not representable for {params:?}")));
        }
        h.push(v);
    }
    Ok(h)
}

/// E_k^{(α,β)}(t).
pub fn kernel_e(params: JacobiParams, k: usize, t: f64) -> Result<f64> {
    check_t(t)?;
    let v = kernel_h(params, k)? * jacobi_poly_unchecked(params, k, t);
    if !v.is_finite() {
        return Err(Error::Range(format!("E_{k}({t}) overflowed")));
    }
    Ok(v)
}

/// The norm density (sin θ/2)^{2α+1}(cos θ/2)^{2β+1}.
pub fn density(params: JacobiParams, theta: f64) -> f64 {
    let s = (0.5 * theta).sin().max(0.0);
    let c = (0.5 * theta).cos().max(0.0);
    s.powf(2.0 * params.alpha + 1.0) * c.powf(2.0 * params.beta + 1.0)
}

/// ∫_0^π density = B(α+1, β+1).
pub fn density_mass(params: JacobiParams) -> f64 {
    let (a, b) = (params.alpha, params.beta);
    (lgamma(a + 1.0) + lgamma(b + 1.0) - lgamma(a + b + 2.0)).exp()
}

/// Nodes θ_i ∈ [0, π] and positive weights absorbing the norm density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub exactness_degree: usize,
    pub panel_count: usize,
}

impl QuadratureRule1D {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&th, &w)| w * f(th)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Symmetric tridiagonal eigenvalues by implicit QL (diagonal `d`, off-diagonal `e[i]` couples i and i+1).
fn tridiagonal_eigenvalues(mut d: Vec<f64>, e_in: &[f64]) -> Result<Vec<f64>> {
    let n = d.len();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(&e_in[..n - 1]);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::numerical(
                    "tridiagonal QL did not converge",
                    format!("size={n}, index={l}"),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut early = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(d)
}

/// Gauss–Jacobi rule in t with m nodes for (1−t)^a(1+t)^b dt, any a, b > −1:
/// Golub–Welsch nodes, Newton polish, weights from the closed derivative formula.
pub fn gauss_jacobi_t(a: f64, b: f64, m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(a > -1.0 && b > -1.0) {
        return Err(Error::param(format!("Gauss–Jacobi exponents must exceed -1, got ({a}, {b})")));
    }
    if m == 0 {
        return Err(Error::param("Gauss–Jacobi rule needs at least one node"));
    }
    let params = JacobiParams { alpha: a, beta: b };
    let mut diag = Vec::with_capacity(m);
    let mut off = Vec::with_capacity(m);
    for k in 0..m {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        let dk = if k == 0 { (b - a) / (a + b + 2.0) } else { (b * b - a * a) / (s * (s + 2.0)) };
        diag.push(dk);
        if k + 1 < m {
            let j = kf + 1.0;
            let s = 2.0 * j + a + b;
            let ek = if k == 0 {
                (4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b))).sqrt()
            } else {
                (4.0 * j * (j + a) * (j + b) * (j + a + b) / (s * s * (s + 1.0) * (s - 1.0))).sqrt()
            };
            off.push(ek);
        }
    }
    off.push(0.0);
    let mut nodes = tridiagonal_eigenvalues(diag, &off)?;
    // log of Γ(m+α+1)Γ(m+β+1)2^{α+β+1}/(Γ(m+α+β+1) m!)
    let mf = m as f64;
    let log_c = lgamma(mf + a + 1.0) + lgamma(mf + b + 1.0) + (a + b + 1.0) * std::f64::consts::LN_2
        - lgamma(mf + a + b + 1.0)
        - lgamma(mf + 1.0);
    let deriv = |t: f64| -> (f64, f64) {
        let p = jacobi_poly_unchecked(params, m, t);
        let dp = if m == 0 {
            0.0
        } else {
            0.5 * (mf + a + b + 1.0) * jacobi_poly_unchecked(params.shift_alpha(1.0).shift_beta(1.0), m - 1, t)
        };
        (p, dp)
    };
    let mut weights = Vec::with_capacity(m);
    for t in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = deriv(*t);
            if dp == 0.0 || !dp.is_finite() {
                break;
            }
            let step = p / dp;
            let cand = *t - step;
            if cand.abs() < 1.0 {
                *t = cand;
            }
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = deriv(*t);
        let w = (log_c - (1.0 - *t * *t).ln() - 2.0 * dp.abs().ln()).exp();
        weights.push(w);
    }
    Ok((nodes, weights))
}

impl JacobiParams {
    pub(crate) fn shift_beta(&self, by: f64) -> Self {
        JacobiParams { alpha: self.alpha, beta: self.beta + by }
    }
}

/// Gauss–Jacobi rule in θ, exact for polynomials in cos θ of degree ≤ target_degree·oversample
/// against the norm density. Exactness is certified on the kernels E_k before returning.
pub fn gauss_jacobi_rule(params: JacobiParams, target_degree: usize, oversample: f64) -> Result<QuadratureRule1D> {
    if !(oversample >= 1.0) {
        return Err(Error::param("oversample must be >= 1"));
    }
    let m = (((target_degree + 1) as f64 / 2.0) * oversample).ceil().max(1.0) as usize;
    let (t, wt) = gauss_jacobi_t(params.alpha, params.beta, m)?;
    let scale = (-(params.alpha + params.beta + 1.0) * std::f64::consts::LN_2).exp();
    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    // Store in increasing θ.
    for i in (0..m).rev() {
        nodes.push(t[i].clamp(-1.0, 1.0).acos());
        weights.push(wt[i] * scale);
    }
    let rule = QuadratureRule1D { nodes, weights, exactness_degree: 2 * m - 1, panel_count: 1 };
    certify_rule(params, &rule)?;
    Ok(rule)
}

fn certify_rule(params: JacobiParams, rule: &QuadratureRule1D) -> Result<()> {
    if rule.weights.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::numerical("non-positive Gauss–Jacobi weight", format!("nodes={}", rule.len())));
    }
    let mass = density_mass(params);
    let total: f64 = rule.weights.iter().sum();
    if (total - mass).abs() > 1e-12 * mass {
        return Err(Error::numerical(
            "Gauss–Jacobi mass defect",
            format!("sum={total:e}, exact={mass:e}"),
        ));
    }
    let deg = rule.exactness_degree;
    let h = kernel_h_table(params, deg)?;
    let mut buf = vec![0.0; deg + 1];
    let mut acc = vec![0.0; deg + 1];
    let mut abs = vec![0.0; deg + 1];
    for (&th, &w) in rule.nodes.iter().zip(&rule.weights) {
        jacobi_values(params, th.cos(), &mut buf);
        for k in 1..=deg {
            let e = h[k] * buf[k];
            acc[k] += w * e;
            abs[k] += w * e.abs();
        }
    }
    for k in 1..=deg {
        // E_k can vanish at every node (k = m), so the scale also uses ‖E_k‖₂ ~ (mass·E_k(1))^{1/2}.
        let l2 = (mass * h[k] * jacobi_poly_unchecked(params, k, 1.0)).abs().sqrt();
        if acc[k].abs() > 1e-11 * abs[k].max(l2) {
            return Err(Error::numerical(
                "Gauss–Jacobi exactness certificate failed",
                format!("k={k}, moment={:e}, scale={:e}", acc[k], abs[k]),
            ));
        }
    }
    Ok(())
}

/// Tuning for [`weighted_norm_1d_with`].
#[derive(Debug, Clone, Copy)]
pub struct NormOptions {
    /// Relative tolerance; `None` picks 1e−6 (1e−5 when p < 0.5).
    pub tol: Option<f64>,
    /// Panels per oscillation unit: width = π/(M·n_osc).
    pub panels_per_osc: usize,
    pub order: usize,
    pub max_doublings: usize,
    pub split_roots: bool,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions { tol: None, panels_per_osc: 8, order: 8, max_doublings: 6, split_roots: true }
    }
}

impl NormOptions {
    pub fn resolved_tol(&self, p: f64) -> f64 {
        self.tol.unwrap_or(if p < 0.5 { 1e-5 } else { 1e-6 })
    }
}

/// Result of a 1-D norm computation with its refinement trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    pub value: f64,
    pub panels: usize,
    pub rel_change: f64,
}

/// ‖g‖_{p,α,β} with default options; `n_osc` is the oscillation degree of g.
pub fn weighted_norm_1d(
    g: impl Fn(f64) -> f64 + Sync,
    p: f64,
    params: JacobiParams,
    n_osc: usize,
    tol: f64,
) -> Result<f64> {
    let opts = NormOptions { tol: Some(tol), ..Default::default() };
    Ok(weighted_norm_1d_with(g, p, params, n_osc, &opts)?.value)
}

/// ‖g‖_{p,α,β} with explicit options.
pub fn weighted_norm_1d_with(
    g: impl Fn(f64) -> f64 + Sync,
    p: f64,
    params: JacobiParams,
    n_osc: usize,
    opts: &NormOptions,
) -> Result<NormReport> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::param(format!("p must be in (0,inf), got {p}")));
    }
    let tol = opts.resolved_tol(p);
    let h = |th: f64| g(th.cos());
    let dens = |th: f64| density(params, th);
    let popts = PanelOptions { order: opts.order, grading: 4, split_roots: opts.split_roots };
    let start = opts.panels_per_osc * n_osc.max(1);
    let r = quad::refine_by_doubling(
        |panels| quad::lp_power_integral(&h, &dens, p, 0.0, PI, panels, popts).powf(1.0 / p),
        start,
        tol,
        opts.max_doublings,
    )?;
    Ok(NormReport { value: r.value, panels: r.panels, rel_change: r.rel_change })
}
