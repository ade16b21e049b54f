//! Doubling weights on S², the mollification w_n, weighted norms, the discrete
//! maximal function and the A_{p,τ} balance quantity.
//!
//! Weights are normalized so that ∫ w dσ = 1. Cap integrals w(B) are computed in
//! polar coordinates about the cap center; zero sets of power weights cross the cap
//! along great circles, so both angular variables are split at the crossings and
//! integrated with graded Gauss rules.

use crate::error::{Error, Result};
use crate::quad;
use crate::sphere::{self, GridMeasure, SphereGrid, SpherePoint};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Evaluator type for custom weights (unnormalized).
pub type WeightFn = Arc<dyn Fn(&SpherePoint) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum WeightKind {
    Unit,
    Power([f64; 3]),
    Custom { name: String, eval: WeightFn },
}

impl fmt::Debug for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightKind::Unit => write!(f, "Unit"),
            WeightKind::Power(a) => write!(f, "Power({a:?})"),
            WeightKind::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// A normalized doubling weight.
#[derive(Clone, Debug)]
pub struct Weight {
    pub kind: WeightKind,
    pub normalizer: f64,
    pub s_w: f64,
    pub doubling_constant_estimate: f64,
}

/// A spherical cap B(center, radius).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cap {
    pub center: SpherePoint,
    pub radius: f64,
}

impl Weight {
    pub fn unit() -> Self {
        let mut w = Weight { kind: WeightKind::Unit, normalizer: 1.0 / (4.0 * PI), s_w: 2.0, doubling_constant_estimate: 0.0 };
        w.doubling_constant_estimate = w.estimate_doubling();
        w
    }

    /// Parses "unit" or "power:a1,a2,a3".
    pub fn parse(spec: &str) -> Result<Self> {
        let s = spec.trim();
        if s == "unit" {
            return Ok(Weight::unit());
        }
        if let Some(list) = s.strip_prefix("power:") {
            let a: Vec<f64> = list
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::param(format!("bad power-weight exponents in '{spec}'")))?;
            return make_power_weight(&a);
        }
        Err(Error::param(format!("unknown weight spec '{spec}' (expected unit or power:a1,a2,a3)")))
    }

    /// Canonical spec string (custom weights report their name).
    pub fn spec(&self) -> String {
        match &self.kind {
            WeightKind::Unit => "unit".into(),
            WeightKind::Power(a) => format!("power:{},{},{}", a[0], a[1], a[2]),
            WeightKind::Custom { name, .. } => format!("custom:{name}"),
        }
    }

    /// Normalized weight value.
    pub fn eval(&self, x: &SpherePoint) -> f64 {
        self.normalizer * self.raw(x)
    }

    fn raw(&self, x: &SpherePoint) -> f64 {
        match &self.kind {
            WeightKind::Unit => 1.0,
            WeightKind::Power(a) => power_raw(a, x),
            WeightKind::Custom { eval, .. } => eval(x),
        }
    }

    /// Power exponents, with the unit weight as (0,0,0).
    pub fn exponents(&self) -> Option<[f64; 3]> {
        match &self.kind {
            WeightKind::Unit => Some([0.0; 3]),
            WeightKind::Power(a) => Some(*a),
            WeightKind::Custom { .. } => None,
        }
    }

    /// Custom weight; normalizer by quadrature, s_w from dyadic cap ratios plus 0.01.
    pub fn custom(name: &str, eval: WeightFn) -> Result<Self> {
        let g = sphere::build_grid(64, 2.0)?;
        let vals = g.sample(|x| eval(x));
        if vals.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::param("custom weight must be finite and nonnegative"));
        }
        let mass = g.integrate(&vals)?;
        if !(mass > 0.0) {
            return Err(Error::param("custom weight has zero mass"));
        }
        let mut w = Weight {
            kind: WeightKind::Custom { name: name.to_string(), eval },
            normalizer: 1.0 / mass,
            s_w: 0.0,
            doubling_constant_estimate: 0.0,
        };
        w.doubling_constant_estimate = w.estimate_doubling();
        w.s_w = w.doubling_constant_estimate.log2() + 0.01;
        Ok(w)
    }

    /// max w(2B)/w(B) over caps at ±e_j and a Fibonacci set, radii 2^{-i}, i = 1..6.
    fn estimate_doubling(&self) -> f64 {
        let mut centers: Vec<SpherePoint> = sphere::fibonacci_lattice(0.6);
        for j in 0..3 {
            centers.push(SpherePoint::axis(j, false));
            centers.push(SpherePoint::axis(j, true));
        }
        let ratios: Vec<f64> = centers
            .par_iter()
            .map(|c| {
                let mut m: f64 = 1.0;
                for i in 1..=6 {
                    let r = 0.5f64.powi(i);
                    let big = self.cap_integral(c, 2.0 * r).unwrap_or(f64::NAN);
                    let small = self.cap_integral(c, r).unwrap_or(f64::NAN);
                    if small > 0.0 {
                        m = m.max(big / small);
                    }
                }
                m
            })
            .collect();
        ratios.into_iter().fold(1.0, f64::max)
    }

    /// w(B(center, radius)) for the normalized weight.
    pub fn cap_integral(&self, center: &SpherePoint, radius: f64) -> Result<f64> {
        if !(radius > 0.0 && radius <= PI) {
            return Err(Error::param(format!("cap radius must lie in (0, π], got {radius}")));
        }
        let raw = match &self.kind {
            WeightKind::Unit => 2.0 * PI * (1.0 - radius.cos()),
            WeightKind::Power(a) => power_cap_integral(a, center, radius)?,
            WeightKind::Custom { eval, .. } => generic_cap_integral(|x| eval(x), center, radius)?,
        };
        Ok(self.normalizer * raw)
    }

    /// w_n(x) = n^{d−1} w(B(x, 1/n)) with d = 3.
    pub fn mollified_at(&self, x: &SpherePoint, n: f64) -> Result<f64> {
        if !(n >= 1.0) {
            return Err(Error::param(format!("mollification scale must be >= 1, got {n}")));
        }
        Ok(n * n * self.cap_integral(x, 1.0 / n)?)
    }
}

fn power_raw(a: &[f64; 3], x: &SpherePoint) -> f64 {
    let c = x.coords();
    let mut v = 1.0;
    for j in 0..3 {
        if a[j] != 0.0 {
            v *= c[j].abs().powf(a[j]);
        }
    }
    v
}

/// Normalized power weight c·Π|x_j|^{a_j} on S².
pub fn make_power_weight(exponents: &[f64]) -> Result<Weight> {
    if exponents.len() != 3 {
        return Err(Error::param(format!("power weights are supported on S² (3 exponents), got {}", exponents.len())));
    }
    if exponents.iter().any(|&a| !(a >= 0.0 && a.is_finite())) {
        return Err(Error::param(format!("power-weight exponents must be nonnegative, got {exponents:?}")));
    }
    let a = [exponents[0], exponents[1], exponents[2]];
    if a == [0.0; 3] {
        return Ok(Weight::unit());
    }
    let sum: f64 = a.iter().sum();
    let min = a.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut w = Weight {
        kind: WeightKind::Power(a),
        normalizer: 1.0 / sphere::abs_monomial_integral(a),
        s_w: 2.0 + sum - min,
        doubling_constant_estimate: 0.0,
    };
    w.doubling_constant_estimate = w.estimate_doubling();
    Ok(w)
}

/// Orthonormal (u, v) completing `c` to a frame.
fn cap_frame(c: &SpherePoint) -> ([f64; 3], [f64; 3], [f64; 3]) {
    let c = c.coords();
    let k = (0..3).min_by(|&i, &j| c[i].abs().total_cmp(&c[j].abs())).unwrap();
    let mut e = [0.0; 3];
    e[k] = 1.0;
    let d: f64 = (0..3).map(|i| e[i] * c[i]).sum();
    let mut u = [e[0] - d * c[0], e[1] - d * c[1], e[2] - d * c[2]];
    let nu = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    u.iter_mut().for_each(|x| *x /= nu);
    let v = [c[1] * u[2] - c[2] * u[1], c[2] * u[0] - c[0] * u[2], c[0] * u[1] - c[1] * u[0]];
    (c, u, v)
}

fn point_at(frame: &([f64; 3], [f64; 3], [f64; 3]), psi: f64, phi: f64) -> [f64; 3] {
    let (c, u, v) = frame;
    let (sp, cp) = psi.sin_cos();
    let (sf, cf) = phi.sin_cos();
    [
        cp * c[0] + sp * (cf * u[0] + sf * v[0]),
        cp * c[1] + sp * (cf * u[1] + sf * v[1]),
        cp * c[2] + sp * (cf * u[2] + sf * v[2]),
    ]
}

const CAP_ORDER: usize = 12;
const CAP_GRADING: i32 = 3;

/// Unnormalized ∫_{B(c,r)} Π|x_j|^{a_j} dσ.
fn power_cap_integral(a: &[f64; 3], center: &SpherePoint, radius: f64) -> Result<f64> {
    let frame = cap_frame(center);
    let (c, u, v) = frame;
    let monomial = |x: [f64; 3]| {
        let mut p = 1.0;
        for j in 0..3 {
            if a[j] != 0.0 {
                p *= x[j].abs().powf(a[j]);
            }
        }
        p
    };
    let even = a.iter().all(|&e| e.fract() == 0.0 && (e as i64) % 2 == 0);
    if even {
        // Polynomial integrand: Gauss in t = cos ψ times uniform azimuth is exact.
        let deg = a.iter().sum::<f64>() as usize;
        let mt = deg / 2 + 2;
        let mp = deg + 2;
        let t0 = radius.cos();
        let (ts, ws) = quad::unit_rule(mt);
        let mut total = 0.0;
        for (&s, &w) in ts.iter().zip(ws) {
            let t = t0 + (1.0 - t0) * s;
            let psi = t.clamp(-1.0, 1.0).acos();
            let ring: f64 = (0..mp).map(|j| monomial(point_at(&frame, psi, 2.0 * PI * j as f64 / mp as f64))).sum();
            total += w * (1.0 - t0) * ring * 2.0 * PI / mp as f64;
        }
        return Ok(total);
    }
    // Kinked factors: those with non-even exponents.
    let kinked: Vec<usize> = (0..3).filter(|&j| a[j] != 0.0 && !(a[j].fract() == 0.0 && (a[j] as i64) % 2 == 0)).collect();
    let amp: Vec<(f64, f64, f64)> = kinked
        .iter()
        .map(|&j| (c[j], u[j].hypot(v[j]), v[j].atan2(u[j])))
        .collect();
    let mut psi_breaks = vec![0.0, radius];
    for &(cj, rj, _) in &amp {
        let star = cj.abs().atan2(rj);
        for b in [star, PI - star] {
            if b > 1e-14 && b < radius - 1e-14 {
                psi_breaks.push(b);
            }
        }
    }
    // Two zero circles x_i = 0, x_j = 0 meet at ±e_k, where their crossings merge.
    for (ii, &i) in kinked.iter().enumerate() {
        for &j in &kinked[ii + 1..] {
            let k = 3 - i - j;
            for b in [c[k].clamp(-1.0, 1.0).acos(), (-c[k]).clamp(-1.0, 1.0).acos()] {
                if b > 1e-14 && b < radius - 1e-14 {
                    psi_breaks.push(b);
                }
            }
        }
    }
    psi_breaks.sort_by(f64::total_cmp);
    psi_breaks.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    let ring = |psi: f64| -> f64 {
        let (sp, cp) = psi.sin_cos();
        let mut cuts = Vec::new();
        for &(cj, rj, phj) in &amp {
            if sp * rj > (cp * cj).abs() {
                let k = (-cp * cj / (sp * rj)).clamp(-1.0, 1.0).acos();
                cuts.push((phj + k).rem_euclid(2.0 * PI));
                cuts.push((phj - k).rem_euclid(2.0 * PI));
            } else if rj > 0.0 {
                // No crossing: break where the factor is smallest, so rings near
                // tangency still see clustered nodes.
                let at = if cp * cj > 0.0 { phj + PI } else { phj };
                cuts.push(at.rem_euclid(2.0 * PI));
            }
        }
        if cuts.is_empty() {
            cuts.push(0.0);
        }
        let f = |phi: f64| monomial(point_at(&frame, psi, phi));
        cuts.sort_by(f64::total_cmp);
        let mut acc = 0.0;
        for i in 0..cuts.len() {
            let lo = cuts[i];
            let hi = if i + 1 == cuts.len() { cuts[0] + 2.0 * PI } else { cuts[i + 1] };
            acc += graded_both(&f, lo, hi);
        }
        acc
    };
    let mut total = 0.0;
    for w in psi_breaks.windows(2) {
        total += graded_both(&|psi: f64| ring(psi) * psi.sin(), w[0], w[1]);
    }
    if !total.is_finite() {
        return Err(Error::numerical("cap quadrature produced a non-finite value", format!("center {center:?}, radius {radius}")));
    }
    Ok(total)
}

fn graded_both(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let mid = 0.5 * (lo + hi);
    quad::graded_left(f, lo, mid, CAP_ORDER, CAP_GRADING) + quad::graded_right(f, mid, hi, CAP_ORDER, CAP_GRADING)
}

/// ∫_0^{2π} f by the trapezoid rule, doubled until the relative change is below 1e-12.
fn periodic_trapezoid(f: &impl Fn(f64) -> f64) -> f64 {
    let mut n = 16usize;
    let mut prev: f64 = (0..n).map(|j| f(2.0 * PI * j as f64 / n as f64)).sum::<f64>() * 2.0 * PI / n as f64;
    while n < 8192 {
        // Reuse the previous nodes: only odd multiples are new.
        let add: f64 = (0..n).map(|j| f(2.0 * PI * (2 * j + 1) as f64 / (2 * n) as f64)).sum();
        let cur = 0.5 * prev + add * PI / n as f64;
        n *= 2;
        if (cur - prev).abs() <= 1e-12 * cur.abs() {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// Cap integral of a continuous function by Gauss in cos ψ times periodic trapezoid,
/// doubled until the relative change is below 1e-8.
fn generic_cap_integral(f: impl Fn(&SpherePoint) -> f64, center: &SpherePoint, radius: f64) -> Result<f64> {
    let frame = cap_frame(center);
    let t0 = radius.cos();
    let eval = |m: usize| -> f64 {
        let (ts, ws) = quad::unit_rule(m);
        ts.iter()
            .zip(ws)
            .map(|(&s, &w)| {
                let t = t0 + (1.0 - t0) * s;
                let psi = t.clamp(-1.0, 1.0).acos();
                w * (1.0 - t0) * periodic_trapezoid(&|phi| f(&SpherePoint::new_unchecked(point_at(&frame, psi, phi))))
            })
            .sum()
    };
    let mut prev = eval(16);
    for m in [32usize, 64] {
        let cur = eval(m);
        if (cur - prev).abs() <= 1e-8 * cur.abs() {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::numerical("cap quadrature did not converge", format!("center {center:?}, radius {radius}")))
}

/// w_n tabulated at the nodes of a grid (ring-major).
#[derive(Clone, Debug)]
pub struct MollifiedWeight {
    pub base: Weight,
    pub n: f64,
    pub values: Vec<f64>,
}

/// Tabulates w_n = n² w(B(·, 1/n)) on a grid.
pub fn mollify(w: &Weight, n: f64, grid: &SphereGrid) -> Result<MollifiedWeight> {
    if !(n >= 1.0) {
        return Err(Error::param(format!("mollification scale must be >= 1, got {n}")));
    }
    let pts = grid.points();
    let values: Vec<f64> = pts.par_iter().map(|x| w.mollified_at(x, n)).collect::<Result<_>>()?;
    if values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::numerical("mollified weight is not positive", format!("n={n}")));
    }
    Ok(MollifiedWeight { base: w.clone(), n, values })
}

/// Which weight a norm is taken against.
#[derive(Clone, Copy, Debug)]
pub enum WeightRef<'a> {
    Base(&'a Weight),
    Mollified(&'a MollifiedWeight),
}

/// (∫|f|^p w dσ)^{1/p} on a grid; p = ∞ gives the grid max.
///
/// A power weight on its own power grid is absorbed into the node weights;
/// otherwise the grid must carry surface measure and w is applied at the nodes.
pub fn weighted_lp_norm(samples: &[f64], p: f64, w: WeightRef<'_>, grid: &SphereGrid) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::param(format!("p must be positive, got {p}")));
    }
    if samples.len() != grid.len() {
        return Err(Error::Precondition(format!("sample count {} does not match grid size {}", samples.len(), grid.len())));
    }
    if p.is_infinite() {
        return Ok(samples.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }
    let wvals: Vec<f64> = match (w, &grid.measure) {
        (WeightRef::Base(b), GridMeasure::Power(a)) => {
            if b.exponents() != Some(*a) {
                return Err(Error::Precondition(format!("grid measure {a:?} does not match weight {}", b.spec())));
            }
            return sphere::lp_norm_sphere(samples, p, grid);
        }
        (WeightRef::Base(b), GridMeasure::Surface) => {
            if grid.axisymmetric {
                return Err(Error::Precondition("axisymmetric surface grids cannot carry a non-zonal weight".into()));
            }
            grid.points().iter().map(|x| b.eval(x)).collect()
        }
        (WeightRef::Mollified(m), GridMeasure::Surface) => {
            if m.values.len() != grid.len() {
                return Err(Error::Precondition("mollified weight was tabulated on a different grid".into()));
            }
            m.values.clone()
        }
        (WeightRef::Mollified(_), GridMeasure::Power(_)) => {
            return Err(Error::Precondition("mollified weights need a surface-measure grid".into()))
        }
    };
    let powered: Vec<f64> = samples.iter().zip(&wvals).map(|(f, w)| f.abs().powf(p) * w).collect();
    Ok(grid.integrate(&powered)?.powf(1.0 / p))
}

/// f*_{ξ,n}(x) = max_y |f(y)|(1+nρ(x,y))^{−ξ} over the grid nodes y.
pub fn maximal_function(samples: &[f64], n: f64, xi: f64, grid: &SphereGrid) -> Result<Vec<f64>> {
    if !(xi > 0.0) {
        return Err(Error::param(format!("decay exponent must be positive, got {xi}")));
    }
    if samples.len() != grid.len() {
        return Err(Error::Precondition("sample count does not match grid size".into()));
    }
    let pts = grid.points();
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&i, &j| samples[j].abs().total_cmp(&samples[i].abs()));
    Ok(pts
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let mut best = samples[i].abs();
            for &j in &order {
                let fy = samples[j].abs();
                if fy <= best {
                    break;
                }
                let rho = sphere::chord_angle(x, &pts[j]);
                best = best.max(fy * (1.0 + n * rho).powf(-xi));
            }
            best
        })
        .collect())
}

/// Caps centered at ±e_j with radii 2^{−i} ≥ 1/n.
pub fn degeneracy_caps(n: f64) -> Vec<Cap> {
    let mut caps = Vec::new();
    for j in 0..3 {
        for neg in [false, true] {
            let mut r = 1.0;
            while r >= 1.0 / n {
                caps.push(Cap { center: SpherePoint::axis(j, neg), radius: r });
                r *= 0.5;
            }
        }
    }
    caps
}

/// Per-cap averages entering the A_{p,τ} quantity; the order r only enters
/// through the final factor, so one profile serves every r.
#[derive(Debug, Clone)]
pub struct ApTauProfile {
    pub p: f64,
    pub n: f64,
    pub caps: Vec<Cap>,
    /// w_n(B)/|B|.
    pub mean_w: Vec<f64>,
    /// ((1/|B|)∫_B w_n^{−1/(p−1)})^{p−1}, or 1/inf_B w_n when p = 1.
    pub dual: Vec<f64>,
    pub measure: Vec<f64>,
}

impl ApTauProfile {
    /// max over caps of mean·dual·(1 + n|B|^{1/2})^{−rp}.
    pub fn quantity(&self, r: f64) -> f64 {
        (0..self.caps.len())
            .map(|i| self.mean_w[i] * self.dual[i] * (1.0 + self.n * self.measure[i].sqrt()).powf(-r * self.p))
            .fold(0.0, f64::max)
    }
}

/// Evaluates the cap averages of w_n and of its dual power on each cap.
pub fn ap_tau_profile(w: &Weight, p: f64, n: f64, caps: &[Cap]) -> Result<ApTauProfile> {
    if !(p >= 1.0) {
        return Err(Error::param(format!("A_(p,tau) needs p >= 1, got {p}")));
    }
    if caps.is_empty() {
        return Err(Error::param("cap family is empty"));
    }
    if !(n >= 1.0) {
        return Err(Error::param(format!("scale must be >= 1, got {n}")));
    }
    let rows: Vec<(f64, f64, f64)> = caps
        .par_iter()
        .map(|cap| {
            let (nodes, wts) = cap_nodes(w, cap, n);
            let vals: Vec<f64> = nodes.iter().map(|x| w.mollified_at(x, n)).collect::<Result<_>>()?;
            let meas: f64 = wts.iter().sum();
            let mean = vals.iter().zip(&wts).map(|(v, q)| v * q).sum::<f64>() / meas;
            let dual = if p == 1.0 {
                1.0 / vals.iter().cloned().fold(f64::INFINITY, f64::min)
            } else {
                let e = -1.0 / (p - 1.0);
                (vals.iter().zip(&wts).map(|(v, q)| v.powf(e) * q).sum::<f64>() / meas).powf(p - 1.0)
            };
            Ok((mean, dual, meas))
        })
        .collect::<Result<_>>()?;
    Ok(ApTauProfile {
        p,
        n,
        caps: caps.to_vec(),
        mean_w: rows.iter().map(|r| r.0).collect(),
        dual: rows.iter().map(|r| r.1).collect(),
        measure: rows.iter().map(|r| r.2).collect(),
    })
}

/// max over caps of (w_n(B)/|B|)·((1/|B|)∫_B w_n^{−1/(p−1)})^{p−1}·(1+n|B|^{1/2})^{−rp}.
pub fn ap_tau_quantity(w: &Weight, p: f64, r: f64, n: f64, caps: &[Cap]) -> Result<f64> {
    Ok(ap_tau_profile(w, p, n, caps)?.quantity(r))
}

/// Surface-measure nodes on a cap, graded toward the center and toward the
/// zero-set crossings of the weight down to angular scale 1/(4n).
fn cap_nodes(w: &Weight, cap: &Cap, n: f64) -> (Vec<SpherePoint>, Vec<f64>) {
    const ORDER: usize = 6;
    let frame = cap_frame(&cap.center);
    let (c, u, v) = frame;
    let fine = 0.25 / n;
    let zero_axes: Vec<(f64, f64, f64)> = match w.exponents() {
        Some(a) => (0..3).filter(|&j| a[j] > 0.0).map(|j| (c[j], u[j].hypot(v[j]), v[j].atan2(u[j]))).collect(),
        None => Vec::new(),
    };
    let mut psi_edges = vec![cap.radius];
    while *psi_edges.last().unwrap() > fine {
        let e = *psi_edges.last().unwrap() * 0.5;
        psi_edges.push(e);
    }
    psi_edges.push(0.0);
    psi_edges.reverse();
    let (gx, gw) = quad::unit_rule(ORDER);
    let mut nodes = Vec::new();
    let mut wts = Vec::new();
    for pw in psi_edges.windows(2) {
        let (a, b) = (pw[0], pw[1]);
        for (&s, &q) in gx.iter().zip(gw) {
            let psi = a + (b - a) * s;
            let jac = q * (b - a) * psi.sin();
            let (sp, cp) = psi.sin_cos();
            let mut cuts = Vec::new();
            for &(cj, rj, phj) in &zero_axes {
                if sp * rj > (cp * cj).abs() {
                    let k = (-cp * cj / (sp * rj)).clamp(-1.0, 1.0).acos();
                    cuts.push((phj + k).rem_euclid(2.0 * PI));
                    cuts.push((phj - k).rem_euclid(2.0 * PI));
                }
            }
            let mut phis = Vec::new();
            let mut pwts = Vec::new();
            if cuts.is_empty() {
                let m = 32;
                for j in 0..m {
                    phis.push(2.0 * PI * j as f64 / m as f64);
                    pwts.push(2.0 * PI / m as f64);
                }
            } else {
                cuts.sort_by(f64::total_cmp);
                let min_w = (fine / sp.max(1e-300)).min(0.5);
                for i in 0..cuts.len() {
                    let lo = cuts[i];
                    let hi = if i + 1 == cuts.len() { cuts[0] + 2.0 * PI } else { cuts[i + 1] };
                    geometric_panels(lo, hi, min_w, ORDER, &mut phis, &mut pwts);
                }
            }
            for (ph, q2) in phis.iter().zip(&pwts) {
                nodes.push(SpherePoint::new_unchecked(point_at(&frame, psi, *ph)));
                wts.push(jac * q2);
            }
        }
    }
    (nodes, wts)
}

/// Gauss panels on [lo, hi] refined geometrically toward both ends down to `min_w`.
fn geometric_panels(lo: f64, hi: f64, min_w: f64, order: usize, xs: &mut Vec<f64>, ws: &mut Vec<f64>) {
    if hi <= lo {
        return;
    }
    let half = 0.5 * (hi - lo);
    let mut edges = vec![0.0];
    let mut e = half;
    let mut inner = Vec::new();
    while e > min_w {
        inner.push(e);
        e *= 0.5;
    }
    inner.reverse();
    edges.extend(inner);
    if *edges.last().unwrap() < half {
        edges.push(half);
    }
    let (gx, gw) = quad::unit_rule(order);
    for side in [false, true] {
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            for (&s, &q) in gx.iter().zip(gw) {
                let d = a + (b - a) * s;
                xs.push(if side { hi - d } else { lo + d });
                ws.push(q * (b - a));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut ChaCha8Rng) -> SpherePoint {
        let z: f64 = rng.gen_range(-1.0..1.0);
        let ph: f64 = rng.gen_range(0.0..2.0 * PI);
        let r = (1.0 - z * z).sqrt();
        SpherePoint::new(r * ph.cos(), r * ph.sin(), z).unwrap()
    }

    #[test]
    fn power_weight_examples() {
        let u = make_power_weight(&[0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(u.kind, WeightKind::Unit));
        assert!((u.normalizer - 1.0 / (4.0 * PI)).abs() < 1e-16);
        assert_eq!(u.s_w, 2.0);
        let w = make_power_weight(&[1.0, 0.0, 0.0]).unwrap();
        assert!((w.normalizer - 1.0 / (2.0 * PI)).abs() < 1e-14);
        assert_eq!(w.s_w, 3.0);
        assert_eq!(make_power_weight(&[2.0, 2.0, 2.0]).unwrap().s_w, 6.0);
        assert!(make_power_weight(&[-1.0, 0.0, 0.0]).is_err());
        assert!(Weight::parse("power:1,0,0").unwrap().s_w == 3.0);
        assert!(Weight::parse("bogus").is_err());
    }

    #[test]
    fn normalized_mass_is_one() {
        for a in [[1.0, 0.0, 0.0], [0.5, 1.5, 0.0], [2.0, 2.0, 2.0]] {
            let w = make_power_weight(&a).unwrap();
            let whole = w.cap_integral(&SpherePoint::new(0.3, 0.2, 0.9).unwrap(), PI).unwrap();
            assert!((whole - 1.0).abs() < 1e-8, "{a:?} {whole}");
            let g = sphere::build_grid(40, 3.0).unwrap();
            let vals = g.sample(|x| w.eval(x));
            assert!((g.integrate(&vals).unwrap() - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn cap_integrals_against_closed_forms() {
        // ∫_{x₁>0} x₁ dσ = π, hemisphere centered at e₁.
        let w = make_power_weight(&[1.0, 0.0, 0.0]).unwrap();
        let v = w.cap_integral(&SpherePoint::axis(0, false), PI / 2.0).unwrap() / w.normalizer;
        assert!((v - PI).abs() < 1e-9, "{v}");
        // Cap at e₃: ∫_0^r sin²ψ dψ ∫_0^{2π}|cos φ| dφ = 2(r − sin r cos r).
        let r: f64 = 0.7;
        let v = w.cap_integral(&SpherePoint::axis(2, false), r).unwrap() / w.normalizer;
        let exact = 2.0 * (r - r.sin() * r.cos());
        assert!((v - exact).abs() < 1e-9 * exact, "{v} {exact}");
        // Even exponents: exact rule agrees with the generic route.
        let e = make_power_weight(&[2.0, 2.0, 2.0]).unwrap();
        let c = SpherePoint::new(0.4, -0.7, 0.2).unwrap();
        let exact_rule = e.cap_integral(&c, 0.3).unwrap();
        let generic = e.normalizer * generic_cap_integral(|x| power_raw(&[2.0, 2.0, 2.0], x), &c, 0.3).unwrap();
        assert!((exact_rule - generic).abs() < 1e-10 * exact_rule);
    }

    #[test]
    fn kinked_caps_converge() {
        // Cross-check the split rule against brute force on a fine surface grid.
        let w = make_power_weight(&[0.5, 1.0, 0.0]).unwrap();
        let c = SpherePoint::new(0.05, 0.1, 1.0).unwrap();
        let r = 0.4;
        let v = w.cap_integral(&c, r).unwrap();
        let g = sphere::build_grid(800, 1.0).unwrap();
        let s = g.sample(|x| if sphere::geodesic(x, &c) <= r { w.eval(x) } else { 0.0 });
        let brute = g.integrate(&s).unwrap();
        assert!((v - brute).abs() < 2e-3 * v, "{v} {brute}");
    }

    #[test]
    fn unit_weight_mollification() {
        let u = Weight::unit();
        for n in [1.0, 4.0, 64.0] {
            let v = u.mollified_at(&SpherePoint::north(), n).unwrap();
            let exact = n * n / 2.0 * (1.0 - (1.0 / n).cos());
            assert!((v - exact).abs() < 1e-14, "{v} {exact}");
        }
        let v = u.mollified_at(&SpherePoint::north(), 1e4).unwrap();
        assert!((v - 0.25).abs() < 1e-8);
    }

    #[test]
    fn mollified_weight_tracks_pi_times_w_off_the_zero_set() {
        // n² w(B(x,1/n)) = n²|B(x,1/n)| w(x)(1 + O(1/n)) and n²|B| → π.
        let w = make_power_weight(&[1.0, 0.0, 0.0]).unwrap();
        let x = SpherePoint::new(0.6, 0.3, 0.5).unwrap();
        let n = 512.0;
        let cap = sphere::cap_measure(1.0 / n, 3).unwrap() * n * n;
        let ratio = w.mollified_at(&x, n).unwrap() / (cap * w.eval(&x));
        assert!((ratio - 1.0).abs() < 4.0 / n, "{ratio}");
    }

    #[test]
    fn lemma_3_1_doubling_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for a in [[1.0, 0.0, 0.0], [2.0, 2.0, 2.0], [0.5, 0.0, 1.0]] {
            let w = make_power_weight(&a).unwrap();
            let mut c: f64 = 0.0;
            for _ in 0..200 {
                let x = random_point(&mut rng);
                let r: f64 = rng.gen_range(0.01..0.5);
                let t: f64 = rng.gen_range(r..1.0);
                let ratio = w.cap_integral(&x, t).unwrap() / ((t / r).powf(w.s_w) * w.cap_integral(&x, r).unwrap());
                c = c.max(ratio);
            }
            assert!(c <= 10.0, "{a:?}: {c}");
        }
        // Mollified weight comparability for (1,0,0): 500 pairs at n = 32.
        let w = make_power_weight(&[1.0, 0.0, 0.0]).unwrap();
        let n = 32.0;
        let mut c: f64 = 0.0;
        for _ in 0..500 {
            let x = random_point(&mut rng);
            let y = if rng.gen_bool(0.5) {
                random_point(&mut rng)
            } else {
                // Nearby pairs probe the small-distance regime.
                let d = x.coords();
                SpherePoint::new(d[0] + rng.gen_range(-0.1..0.1), d[1] + rng.gen_range(-0.1..0.1), d[2]).unwrap()
            };
            let rho = sphere::geodesic(&x, &y);
            let ratio = w.mollified_at(&x, n).unwrap() / ((1.0 + n * rho).powf(w.s_w) * w.mollified_at(&y, n).unwrap());
            c = c.max(ratio);
        }
        assert!(c <= 16.0, "{c}");
    }

    #[test]
    fn doubling_estimate_is_finite() {
        let w = make_power_weight(&[1.0, 0.0, 0.0]).unwrap();
        assert!(w.doubling_constant_estimate > 1.0 && w.doubling_constant_estimate < 2f64.powf(w.s_w + 1.0));
        let custom = Weight::custom("z2", Arc::new(|x: &SpherePoint| x.coords()[2].powi(2))).unwrap();
        let exact = make_power_weight(&[0.0, 0.0, 2.0]).unwrap();
        let x = SpherePoint::new(0.2, 0.5, 0.4).unwrap();
        assert!((custom.eval(&x) - exact.eval(&x)).abs() < 1e-10);
        assert!(custom.s_w > 0.0 && custom.s_w.is_finite());
    }

    #[test]
    fn weighted_norm_reductions() {
        let g = sphere::build_grid(20, 1.0).unwrap();
        let ones = vec![1.0; g.len()];
        let u = Weight::unit();
        for p in [0.5, 1.0, 2.0] {
            assert!((weighted_lp_norm(&ones, p, WeightRef::Base(&u), &g).unwrap() - 1.0).abs() < 1e-13);
            let f = g.sample(|x| 1.0 + x.coords()[0] * x.coords()[2]);
            let lhs = weighted_lp_norm(&f, p, WeightRef::Base(&u), &g).unwrap();
            let rhs = sphere::lp_norm_sphere(&f, p, &g).unwrap() / (4.0 * PI).powf(1.0 / p);
            assert!((lhs - rhs).abs() < 1e-13);
        }
        let w = make_power_weight(&[1.0, 0.0, 0.0]).unwrap();
        let pg = sphere::power_weight_grid([1.0, 0.0, 0.0], 10, 1.0, sphere::Rotation::identity()).unwrap();
        let ones = vec![1.0; pg.len()];
        assert!((weighted_lp_norm(&ones, 0.5, WeightRef::Base(&w), &pg).unwrap() - 1.0).abs() < 1e-13);
        assert!(weighted_lp_norm(&ones, 0.5, WeightRef::Base(&u), &pg).is_err());
    }

    #[test]
    fn maximal_function_basics() {
        let g = sphere::build_grid(12, 1.0).unwrap();
        let c = vec![2.5; g.len()];
        assert!(maximal_function(&c, 8.0, 3.0, &g).unwrap().iter().all(|v| (v - 2.5).abs() < 1e-15));
        let f = g.sample(|x| x.coords()[0] * x.coords()[1] - 0.2);
        let m = maximal_function(&f, 8.0, 3.0, &g).unwrap();
        assert!(m.iter().zip(&f).all(|(a, b)| *a >= b.abs()));
        // Brute-force oracle without pruning.
        let pts = g.points();
        for i in (0..pts.len()).step_by(17) {
            let brute = (0..pts.len())
                .map(|j| f[j].abs() * (1.0 + 8.0 * sphere::chord_angle(&pts[i], &pts[j])).powf(-3.0))
                .fold(0.0, f64::max);
            assert_eq!(brute, m[i]);
        }
    }

    #[test]
    fn ap_tau_examples() {
        let u = Weight::unit();
        let caps = degeneracy_caps(16.0);
        let small = ap_tau_quantity(&u, 2.0, 1.0, 16.0, &caps).unwrap();
        let big = ap_tau_quantity(&u, 2.0, 1.0, 128.0, &degeneracy_caps(128.0)).unwrap();
        assert!(small < 2.0 && big < 2.0 && (small / big) < 2.0 && (big / small) < 2.0);
        assert!(ap_tau_quantity(&u, 0.5, 1.0, 16.0, &caps).is_err());
        // Monotone in r.
        let w = make_power_weight(&[2.0, 2.0, 2.0]).unwrap();
        let prof = ap_tau_profile(&w, 2.0, 16.0, &degeneracy_caps(16.0)).unwrap();
        let qs: Vec<f64> = [0.25, 0.5, 1.0, 1.5, 3.0].iter().map(|&r| prof.quantity(r)).collect();
        assert!(qs.windows(2).all(|q| q[1] <= q[0]));
    }

    #[test]
    fn cap_measure_lower_bound_band() {
        // n^{s_w}·min_x w(B(x,1/n)) stays in a bounded band.
        let w = make_power_weight(&[1.0, 0.0, 0.0]).unwrap();
        let pts = sphere::fibonacci_lattice(0.05);
        let vals: Vec<f64> = [16.0, 32.0, 64.0, 128.0, 256.0]
            .iter()
            .map(|&n: &f64| {
                let mut extra: Vec<SpherePoint> = pts.clone();
                extra.push(SpherePoint::axis(1, false));
                let m = extra.iter().map(|x| w.cap_integral(x, 1.0 / n).unwrap()).fold(f64::INFINITY, f64::min);
                n.powf(w.s_w) * m
            })
            .collect();
        let band = vals.iter().cloned().fold(0.0, f64::max) / vals.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(band <= 8.0, "{vals:?}");
    }
}
