//! Smooth cutoffs and the localized zonal kernels built from them.
//!
//! A [`ZonalKernel`] stores coefficients `c_k` over the basis `E_k^{(α,β)}` and
//! evaluates `Σ c_k E_k(t)` alongside the three-term recurrence.

use crate::error::{Error, Result};
use crate::jacobi::{self, JacobiParams, NormOptions};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

fn sigma(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// η: 1 on [0,1], 0 on [2,∞), exponential-bump partition in between.
pub fn eta(x: f64) -> f64 {
    if x <= 1.0 {
        1.0
    } else if x >= 2.0 {
        0.0
    } else {
        let a = sigma(2.0 - x);
        let b = sigma(x - 1.0);
        a / (a + b)
    }
}

/// ψ(x) = η(x/2) − η(x), supported in [1, 4].
pub fn psi(x: f64) -> f64 {
    eta(0.5 * x) - eta(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutoffKind {
    Eta,
    Psi,
}

/// One of the shipped cutoffs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutoffFunction {
    pub kind: CutoffKind,
}

impl CutoffFunction {
    pub fn eta() -> Self {
        CutoffFunction { kind: CutoffKind::Eta }
    }

    pub fn psi() -> Self {
        CutoffFunction { kind: CutoffKind::Psi }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            CutoffKind::Eta => eta(x),
            CutoffKind::Psi => psi(x),
        }
    }
}

/// Where a kernel's coefficients came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum KernelLabel {
    G { n: usize, r: f64 },
    K { n: usize, d: usize },
    Cesaro { n: usize, delta: f64 },
    Sbp { n: usize, r: f64, ell: usize },
    Localized { n: usize },
    Custom(String),
}

/// Σ_k c_k E_k^{(α,β)}(t) with finite degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZonalKernel {
    params: JacobiParams,
    coeffs: Vec<f64>,
    label: KernelLabel,
    #[serde(skip)]
    eval_cache: Option<EvalTables>,
}

#[derive(Debug, Clone, PartialEq)]
struct EvalTables {
    /// c_k h_k
    weights: Vec<f64>,
    /// P_n = (a_n t + b_n) P_{n−1} − c_n P_{n−2}
    ra: Vec<f64>,
    rb: Vec<f64>,
    rc: Vec<f64>,
    p1: (f64, f64),
}

impl EvalTables {
    fn build(params: JacobiParams, coeffs: &[f64]) -> Result<Self> {
        let deg = coeffs.len().saturating_sub(1);
        let h = jacobi::kernel_h_table(params, deg)?;
        let weights = coeffs.iter().zip(&h).map(|(c, h)| c * h).collect();
        let (a, b) = (params.alpha(), params.beta());
        let mut ra = vec![0.0; deg + 1];
        let mut rb = vec![0.0; deg + 1];
        let mut rc = vec![0.0; deg + 1];
        for n in 2..=deg {
            let nf = n as f64;
            let s = 2.0 * nf + a + b;
            let c0 = 2.0 * nf * (nf + a + b) * (s - 2.0);
            ra[n] = (s - 1.0) * s * (s - 2.0) / c0;
            rb[n] = (s - 1.0) * (a * a - b * b) / c0;
            rc[n] = 2.0 * (nf + a - 1.0) * (nf + b - 1.0) * s / c0;
        }
        // P_1 = (α+β+2)/2 · t + (α−β)/2
        let p1 = ((a + b + 2.0) / 2.0, (a - b) / 2.0);
        Ok(EvalTables { weights, ra, rb, rc, p1 })
    }

    #[inline]
    fn eval(&self, t: f64) -> f64 {
        let w = &self.weights;
        if w.is_empty() {
            return 0.0;
        }
        let mut p0 = 1.0;
        let mut acc = w[0];
        if w.len() == 1 {
            return acc;
        }
        let mut p1 = self.p1.0 * t + self.p1.1;
        acc += w[1] * p1;
        for n in 2..w.len() {
            let p2 = (self.ra[n] * t + self.rb[n]) * p1 - self.rc[n] * p0;
            acc += w[n] * p2;
            p0 = p1;
            p1 = p2;
        }
        acc
    }
}

impl ZonalKernel {
    /// Generic-coefficient constructor.
    pub fn new(params: JacobiParams, coeffs: Vec<f64>, label: KernelLabel) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::param("a zonal kernel needs at least one coefficient"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Range("non-finite kernel coefficient".into()));
        }
        let tables = EvalTables::build(params, &coeffs)?;
        Ok(ZonalKernel { params, coeffs, label, eval_cache: Some(tables) })
    }

    pub fn params(&self) -> JacobiParams {
        self.params
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn label(&self) -> &KernelLabel {
        &self.label
    }

    /// Index of the last nonzero coefficient.
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| *c != 0.0).unwrap_or(0)
    }

    /// Rebuild evaluation tables after deserialization.
    pub fn rehydrate(&mut self) -> Result<()> {
        if self.eval_cache.is_none() {
            self.eval_cache = Some(EvalTables::build(self.params, &self.coeffs)?);
        }
        Ok(())
    }

    /// Σ c_k E_k(t); `t` is clamped to [−1, 1].
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(-1.0, 1.0);
        match &self.eval_cache {
            Some(tab) => tab.eval(t),
            None => EvalTables::build(self.params, &self.coeffs).map(|tab| tab.eval(t)).unwrap_or(f64::NAN),
        }
    }

    pub fn eval_checked(&self, t: f64) -> Result<f64> {
        if !(t.abs() <= 1.0 + 1e-12) {
            return Err(Error::param(format!("t={t} outside [-1,1]")));
        }
        Ok(self.eval(t))
    }

    pub fn eval_theta(&self, theta: f64) -> f64 {
        self.eval(theta.cos())
    }

    /// Σ c_k E_k(1) summed directly from the coefficient list.
    pub fn sum_at_one(&self) -> Result<f64> {
        let mut s = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            if *c != 0.0 {
                s += c * jacobi::kernel_e(self.params, k, 1.0)?;
            }
        }
        Ok(s)
    }

    /// ‖K‖_{p,α,β} with the default panel refinement.
    pub fn norm(&self, p: f64, tol: Option<f64>) -> Result<f64> {
        let opts = NormOptions { tol, ..Default::default() };
        self.norm_with(p, &opts)
    }

    pub fn norm_with(&self, p: f64, opts: &NormOptions) -> Result<f64> {
        Ok(jacobi::weighted_norm_1d_with(|t| self.eval(t), p, self.params, self.degree().max(1), opts)?.value)
    }

    /// Multiply coefficient k by m(k).
    pub fn map_coeffs(&self, m: impl Fn(usize) -> f64, label: KernelLabel) -> Result<ZonalKernel> {
        let c = self.coeffs.iter().enumerate().map(|(k, c)| c * m(k)).collect();
        ZonalKernel::new(self.params, c, label)
    }
}

/// (k(k+α+β+1))^{r/2}, with 0^0 = 1.
pub fn eigen_multiplier(params: JacobiParams, k: usize, r: f64) -> f64 {
    if r == 0.0 {
        return 1.0;
    }
    let kf = k as f64;
    (kf * (kf + params.lambda())).max(0.0).powf(r / 2.0)
}

/// G_{n,r}: c_k = η(k/n)(k(k+α+β+1))^{r/2} for k ≤ 2n.
pub fn build_g(n: usize, r: f64, params: JacobiParams) -> Result<ZonalKernel> {
    if n == 0 {
        return Err(Error::param("n must be >= 1"));
    }
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::param(format!("r must be >= 0, got {r}")));
    }
    let nf = n as f64;
    let coeffs = (0..=2 * n).map(|k| eta(k as f64 / nf) * eigen_multiplier(params, k, r)).collect();
    ZonalKernel::new(params, coeffs, KernelLabel::G { n, r })
}

/// |S^{d−1}| = 2π^{d/2}/Γ(d/2).
pub fn sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * (h * PI.ln() - libm::lgamma_r(h).0).exp()
}

/// C_d = Γ((d−1)/2)/(Γ(d−1)|S^{d−1}|), the constant making ∫K_n = 1.
pub fn kn_constant(d: usize) -> f64 {
    let a = (d as f64 - 1.0) / 2.0;
    (libm::lgamma_r(a).0 - libm::lgamma_r(d as f64 - 1.0).0).exp() / sphere_area(d)
}

/// de la Vallée Poussin kernel K_n on S^{d−1}.
pub fn build_k(n: usize, d: usize) -> Result<ZonalKernel> {
    if n == 0 {
        return Err(Error::param("n must be >= 1"));
    }
    if d < 2 {
        return Err(Error::param("d must be >= 2"));
    }
    let params = JacobiParams::for_dimension(d)?;
    let cd = kn_constant(d);
    let nf = n as f64;
    let coeffs = (0..=2 * n).map(|k| cd * eta(k as f64 / nf)).collect();
    ZonalKernel::new(params, coeffs, KernelLabel::K { n, d })
}

/// K_{n,r} = (−Δ₀)^{r/2} K_n on S^{d−1}.
pub fn build_k_r(n: usize, d: usize, r: f64) -> Result<ZonalKernel> {
    let k = build_k(n, d)?;
    let params = k.params();
    k.map_coeffs(|j| eigen_multiplier(params, j, r), KernelLabel::Custom(format!("K_{{{n},{r}}}")))
}

/// Σ_k φ(k/N) E_k for a cutoff φ.
pub fn build_localized(cutoff: CutoffFunction, big_n: usize, params: JacobiParams) -> Result<ZonalKernel> {
    if big_n == 0 {
        return Err(Error::param("N must be >= 1"));
    }
    let support = match cutoff.kind {
        CutoffKind::Eta => 2,
        CutoffKind::Psi => 4,
    };
    let nf = big_n as f64;
    let coeffs = (0..=support * big_n).map(|k| cutoff.eval(k as f64 / nf)).collect();
    ZonalKernel::new(params, coeffs, KernelLabel::Localized { n: big_n })
}

/// A_k^δ = Γ(k+δ+1)/(Γ(k+1)Γ(δ+1)).
pub fn cesaro_a(k: usize, delta: f64) -> f64 {
    let kf = k as f64;
    (libm::lgamma_r(kf + delta + 1.0).0 - libm::lgamma_r(kf + 1.0).0 - libm::lgamma_r(delta + 1.0).0).exp()
}

/// Cesàro multiplier A_{n−k}^δ / A_n^δ (0 for k > n).
pub fn cesaro_multiplier(n: usize, k: usize, delta: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    let (nf, jf) = (n as f64, (n - k) as f64);
    let lg = |x: f64| libm::lgamma_r(x).0;
    (lg(jf + delta + 1.0) - lg(jf + 1.0) - lg(nf + delta + 1.0) + lg(nf + 1.0)).exp()
}

/// Cesàro kernel S_n^{δ,(α,β)}.
pub fn build_cesaro(n: usize, delta: f64, params: JacobiParams) -> Result<ZonalKernel> {
    if !(delta > -1.0) {
        return Err(Error::param(format!("delta must be > -1, got {delta}")));
    }
    let coeffs = (0..=n).map(|k| cesaro_multiplier(n, k, delta)).collect();
    ZonalKernel::new(params, coeffs, KernelLabel::Cesaro { n, delta })
}

/// γ_{r,j} = 2^{1−j}(−1)^j r(r−2)⋯(r−2j+2), the leading constant of a_{n,r,j}(s) ~ γ s^{r+1−2j}.
pub fn gamma_rj(r: f64, j: usize) -> f64 {
    let mut g = 2.0;
    for i in 0..j {
        g *= -(r - 2.0 * i as f64) / 2.0;
    }
    g
}

/// Output of [`sbp_representation`].
#[derive(Debug, Clone, PartialEq)]
pub struct SbpRepresentation {
    pub ell: usize,
    /// a_{n,r,j}(s) for j = 0..=ℓ, s = 0..=2n+ℓ.
    pub a: Vec<Vec<f64>>,
    /// b_k = a_{n,r,ℓ}(k)/(2k+α+β+ℓ+1)
    pub b: Vec<f64>,
    /// Σ b_k E_k^{(α+ℓ,β)} before scaling by the fitted constant.
    pub kernel: ZonalKernel,
    /// Least-squares constant c in G_{n,r} ≈ c·kernel.
    pub fitted_c: f64,
    /// max relative deviation of c·kernel from G_{n,r} on the fit grid.
    pub fit_residual: f64,
}

/// Summation-by-parts rewriting of G_{n,r} over the raised basis E_k^{(α+ℓ,β)}.
pub fn sbp_representation(n: usize, r: f64, params: JacobiParams) -> Result<SbpRepresentation> {
    if !(r > 0.0) {
        return Err(Error::param("r must be > 0"));
    }
    let lam = params.lambda();
    if lam > 0.0 && (r / 2.0).fract() == 0.0 {
        return Err(Error::Precondition(format!(
            "r={r} is an even integer with alpha+beta+1>0: gamma_(r,l) vanishes"
        )));
    }
    let ell = (params.alpha() + params.beta() + r + 2.0).floor() as usize + 1;
    let smax = 2 * n + ell + 1;
    let nf = n as f64;
    let ab = params.alpha() + params.beta();
    let mut a = Vec::with_capacity(ell + 1);
    a.push(
        (0..=smax)
            .map(|s| {
                let sf = s as f64;
                (2.0 * sf + lam) * (sf * (sf + lam)).max(0.0).powf(r / 2.0) * eta(sf / nf)
            })
            .collect::<Vec<f64>>(),
    );
    for j in 0..ell {
        let prev = &a[j];
        let jf = j as f64;
        let next: Vec<f64> = (0..=smax)
            .map(|s| {
                let sf = s as f64;
                let hi = if s < smax { prev[s + 1] } else { 0.0 };
                prev[s] / (2.0 * sf + ab + jf + 1.0) - hi / (2.0 * sf + ab + jf + 3.0)
            })
            .collect();
        a.push(next);
    }
    let ellf = ell as f64;
    let b: Vec<f64> = (0..2 * n).map(|k| a[ell][k] / (2.0 * k as f64 + ab + ellf + 1.0)).collect();
    let kernel = ZonalKernel::new(params.shift_alpha(ellf), b.clone(), KernelLabel::Sbp { n, r, ell })?;

    // Fit c on a θ-grid, skipping points where G is near a zero.
    let g = build_g(n, r, params)?;
    let g1 = g.eval(1.0).abs();
    let thetas: Vec<f64> = (0..400).map(|i| PI * (i as f64 + 0.5) / 400.0).collect();
    let pairs: Vec<(f64, f64)> = thetas
        .iter()
        .map(|th| (g.eval_theta(*th), kernel.eval_theta(*th)))
        .filter(|(gv, _)| gv.abs() > 1e-6 * g1)
        .collect();
    let num: f64 = pairs.iter().map(|(gv, kv)| gv * kv).sum();
    let den: f64 = pairs.iter().map(|(_, kv)| kv * kv).sum();
    if den == 0.0 {
        return Err(Error::numerical("degenerate summation-by-parts fit", format!("n={n}, r={r}")));
    }
    let c = num / den;
    let fit_residual = pairs.iter().map(|(gv, kv)| ((gv - c * kv) / gv).abs()).fold(0.0, f64::max);
    Ok(SbpRepresentation { ell, a, b, kernel, fitted_c: c, fit_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p00() -> JacobiParams {
        JacobiParams::new(0.0, 0.0).unwrap()
    }

    #[test]
    fn eta_examples() {
        assert_eq!(eta(0.5), 1.0);
        assert_eq!(eta(2.5), 0.0);
        assert!((eta(1.5) - 0.5).abs() < 1e-15);
        assert_eq!(psi(0.5), 0.0);
        assert!((psi(2.0) - 1.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn eta_is_a_monotone_partition(x in 0.0f64..3.0, y in 0.0f64..3.0) {
            let (ex, ey) = (eta(x), eta(y));
            prop_assert!((0.0..=1.0).contains(&ex));
            if x <= y { prop_assert!(ex >= ey); }
            prop_assert!((eta(3.0 - x) + eta(x) - 1.0).abs() < 1e-14 || !(1.0..=2.0).contains(&x));
        }
    }

    #[test]
    fn eta_finite_differences_bounded() {
        // Scaled forward differences of order ≤ 6 stay finite and stabilize under grid refinement.
        let sup = |j: usize, h: f64| {
            let mut m: f64 = 0.0;
            let mut x = 0.9;
            while x < 2.1 {
                let mut d = 0.0;
                for i in 0..=j {
                    let binom = (0..i).fold(1.0, |acc, q| acc * (j - q) as f64 / (q + 1) as f64);
                    let sign = if (j - i) % 2 == 0 { 1.0 } else { -1.0 };
                    d += sign * binom * eta(x + i as f64 * h);
                }
                m = m.max((d / h.powi(j as i32)).abs());
                x += 1e-3;
            }
            m
        };
        for j in 1..=6usize {
            let (a, b) = (sup(j, 4e-3), sup(j, 2e-3));
            assert!(a.is_finite() && b.is_finite());
            assert!((a / b - 1.0).abs() < 0.25, "order {j}: {a} vs {b}");
        }
    }

    #[test]
    fn g_coefficients() {
        let g = build_g(2, 2.0, p00()).unwrap();
        assert!((g.coeffs()[1] - 2.0).abs() < 1e-14);
        let g = build_g(10, 1.5, p00()).unwrap();
        assert_eq!(g.coeffs().len(), 21);
        assert_eq!(g.coeffs()[20], 0.0);
        assert!(g.degree() < 20);
        let g0 = build_g(4, 0.0, p00()).unwrap();
        assert_eq!(g0.coeffs()[0], 1.0);
    }

    #[test]
    fn g_at_one_matches_coefficient_sum() {
        for &(a, b) in &[(0.0, 0.0), (0.5, 0.0), (1.0, 0.5)] {
            let q = JacobiParams::new(a, b).unwrap();
            let g = build_g(37, 1.3, q).unwrap();
            let direct = g.sum_at_one().unwrap();
            assert!((g.eval(1.0) - direct).abs() <= 1e-12 * direct.abs());
        }
    }

    #[test]
    fn g_at_one_scales_like_power() {
        let q = p00();
        let ratios: Vec<f64> = [16usize, 32, 64, 128, 256, 512]
            .iter()
            .map(|&n| build_g(n, 0.0, q).unwrap().eval(1.0) / (n as f64).powi(2))
            .collect();
        let (mx, mn) = ratios.iter().fold((0.0f64, f64::MAX), |(a, b), r| (a.max(*r), b.min(*r)));
        assert!(mx / mn <= 4.0);
    }

    #[test]
    fn single_coefficient_kernel_is_constant() {
        let k = ZonalKernel::new(p00(), vec![5.0], KernelLabel::Custom("c".into())).unwrap();
        for t in [-1.0, -0.3, 0.7, 1.0] {
            assert_eq!(k.eval(t), 5.0);
        }
        assert!(k.eval_checked(1.2).is_err());
    }

    #[test]
    fn kernel_eval_matches_direct_sum() {
        let q = JacobiParams::new(1.0, 0.5).unwrap();
        let coeffs: Vec<f64> = (0..30).map(|k| (k as f64 * 0.37).sin()).collect();
        let k = ZonalKernel::new(q, coeffs.clone(), KernelLabel::Custom("x".into())).unwrap();
        for &t in &[-0.99, -0.2, 0.4, 0.93] {
            let direct: f64 = coeffs.iter().enumerate().map(|(j, c)| c * jacobi::kernel_e(q, j, t).unwrap()).sum();
            assert!((k.eval(t) - direct).abs() < 1e-11 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn k_constant_and_params() {
        let k = build_k(5, 3).unwrap();
        assert_eq!(k.degree(), 9);
        assert_eq!(k.params(), p00());
        assert!((kn_constant(3) - 1.0 / (4.0 * PI)).abs() < 1e-15);
        // ∫_{S²} K_n(x·y) dσ(y) = 2π ∫_0^π K_n(cos θ) sin θ dθ, by a Gauss–Legendre rule in t.
        let (x, w) = crate::quad::gauss_legendre(40);
        let integral: f64 = x.iter().zip(&w).map(|(t, wt)| wt * k.eval(*t)).sum::<f64>() * 2.0 * PI;
        assert!((integral - 1.0).abs() < 1e-12);
        // d = 4: α = β = 1/2, ∫_{S³} = |S²| ∫ K(t)(1−t²)^{1/2} dt.
        let k4 = build_k(3, 4).unwrap();
        let rule = jacobi::gauss_jacobi_rule(k4.params(), 20, 1.0).unwrap();
        // density dθ integrates against sin^{2}θ/4 ... use the Jacobi-measure identity:
        // ∫_{S^{d−1}} F(x·y)dσ(y) = |S^{d−2}| 2^{2α+1} ∫ F(cosθ) (sin θ/2)^{2α+1}(cos θ/2)^{2β+1} dθ with α=β.
        let s2 = sphere_area(3);
        let v = s2 * 2f64.powf(2.0 * 0.5 + 1.0) * rule.integrate(|th| k4.eval_theta(th));
        assert!((v - 1.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn cesaro_examples() {
        assert!((cesaro_a(2, 1.0) - 3.0).abs() < 1e-13);
        let s0 = build_cesaro(0, 2.0, p00()).unwrap();
        assert!((s0.eval(0.3) - 1.0).abs() < 1e-15);
        assert!((cesaro_multiplier(7, 3, 1.5) - cesaro_a(4, 1.5) / cesaro_a(7, 1.5)).abs() < 1e-13);
    }

    #[test]
    fn cesaro_positivity_small_n() {
        for n in [1usize, 5, 17, 60] {
            let s = build_cesaro(n, 2.0, p00()).unwrap();
            let s1 = s.eval(1.0);
            for i in 0..2000 {
                let t = -1.0 + 2.0 * i as f64 / 1999.0;
                assert!(s.eval(t) >= -1e-9 * s1, "n={n} t={t}");
            }
        }
    }

    #[test]
    fn gamma_rj_values() {
        assert_eq!(gamma_rj(1.7, 0), 2.0);
        assert!((gamma_rj(1.7, 1) + 1.7).abs() < 1e-15);
        assert!((gamma_rj(1.5, 2) - 0.5 * 1.5 * (-0.5)).abs() < 1e-15);
        assert_eq!(gamma_rj(2.0, 2), 0.0);
    }

    #[test]
    fn sbp_leading_asymptotic() {
        let rep = sbp_representation(512, 1.5, p00()).unwrap();
        for s in [50usize, 100, 200, 400] {
            let sf = s as f64;
            let ratio = rep.a[0][s] / sf.powf(2.5);
            assert!((ratio - 2.0).abs() < 3.0 / sf, "s={s} {ratio}");
        }
    }

    #[test]
    fn sbp_reconstructs_g() {
        let rep = sbp_representation(64, 1.5, p00()).unwrap();
        assert!(rep.fit_residual <= 1e-6, "{}", rep.fit_residual);
        assert!(rep.ell == 4);
        assert!(sbp_representation(8, 2.0, p00()).is_err());
    }
}
