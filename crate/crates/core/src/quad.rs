//! Panel quadrature helpers shared by the 1-D norm, sphere grids and cap integrals.
//!
//! The workhorse is [`lp_power_integral`], which integrates `|h(θ)|^p ρ(θ)` over an
//! interval by composite Gauss–Legendre panels. Panels whose endpoints straddle a
//! sign change of `h` are split at the located root and both halves are integrated
//! with a graded substitution that flattens the `|x − root|^p` kink.

use crate::error::{Error, Result};
use std::sync::OnceLock;

/// Gauss–Legendre nodes and weights on [-1, 1], computed by Newton iteration on P_m.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1, "gauss_legendre needs at least one node");
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        // Tricomi initial guess, then Newton.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 1e-16 * z.abs().max(1.0) {
                let (_, d) = legendre_with_derivative(m, z);
                dp = d;
                break;
            }
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    if m % 2 == 1 {
        x[m / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(m: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Cached Gauss–Legendre rules on [0, 1] for small orders.
pub fn unit_rule(m: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<Vec<(Vec<f64>, Vec<f64>)>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        (0..=64)
            .map(|k| {
                if k == 0 {
                    return (Vec::new(), Vec::new());
                }
                let (x, w) = gauss_legendre(k);
                (
                    x.iter().map(|v| 0.5 * (v + 1.0)).collect(),
                    w.iter().map(|v| 0.5 * v).collect(),
                )
            })
            .collect()
    });
    assert!(m >= 1 && m <= 64, "unit_rule order out of range");
    &cache[m]
}

/// Integrate `f` over [a, b] with an m-point Gauss rule.
pub fn gauss_interval(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let (x, w) = unit_rule(m);
    let h = b - a;
    x.iter().zip(w).map(|(&s, &ws)| ws * f(a + h * s)).sum::<f64>() * h
}

/// Integrate `f` over [a, b] with points graded toward `a`: x = a + (b−a)s^q.
pub fn graded_left(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize, q: i32) -> f64 {
    let (x, w) = unit_rule(m);
    let h = b - a;
    let qf = q as f64;
    x.iter()
        .zip(w)
        .map(|(&s, &ws)| ws * qf * s.powi(q - 1) * f(a + h * s.powi(q)))
        .sum::<f64>()
        * h
}

/// Integrate `f` over [a, b] with points graded toward `b`.
pub fn graded_right(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize, q: i32) -> f64 {
    graded_left(|x| f(a + b - x), a, b, m, q)
}

/// Tuning for [`lp_power_integral`].
#[derive(Debug, Clone, Copy)]
pub struct PanelOptions {
    /// Gauss order per panel.
    pub order: usize,
    /// Grading exponent used next to located roots.
    pub grading: i32,
    /// Locate sign changes and split panels there.
    pub split_roots: bool,
}

impl Default for PanelOptions {
    fn default() -> Self {
        PanelOptions { order: 8, grading: 4, split_roots: true }
    }
}

/// Locate a root of `h` in [a, b] given opposite-signed endpoint values (Illinois).
pub fn bracket_root(h: &impl Fn(f64) -> f64, mut a: f64, mut fa: f64, mut b: f64, mut fb: f64) -> f64 {
    let width = b - a;
    let mut side = 0i32;
    for _ in 0..60 {
        let c = (a * fb - b * fa) / (fb - fa);
        let c = if c.is_finite() && c > a && c < b { c } else { 0.5 * (a + b) };
        let fc = h(c);
        if fc == 0.0 {
            return c;
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if (b - a) <= 1e-13 * width {
            break;
        }
    }
    0.5 * (a + b)
}

/// Composite rule on [a, b] with nominal panel width (b−a)/panels.
///
/// Sign changes of `h` detected on the uniform panel grid become breakpoints; the
/// panels touching a breakpoint use the graded rule so the root kink of `|h|^p`
/// does not pollute the Gauss error of either neighbour. Nodes are ascending.
pub fn panel_rule(
    h: &(impl Fn(f64) -> f64 + Sync),
    a: f64,
    b: f64,
    panels: usize,
    opts: PanelOptions,
) -> (Vec<f64>, Vec<f64>) {
    use rayon::prelude::*;
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let grid = |i: usize| if i == panels { b } else { a + width * i as f64 };
    let mut breaks = vec![(a, false)];
    if opts.split_roots {
        let ends: Vec<f64> = (0..=panels).into_par_iter().map(|i| h(grid(i))).collect();
        let roots: Vec<Option<f64>> = (0..panels)
            .into_par_iter()
            .map(|i| {
                let (lo, hi) = (grid(i), grid(i + 1));
                let (flo, fhi) = (ends[i], ends[i + 1]);
                if flo == 0.0 && i > 0 {
                    Some(lo)
                } else if flo != 0.0 && fhi != 0.0 && flo.signum() != fhi.signum() {
                    Some(bracket_root(h, lo, flo, hi, fhi))
                } else {
                    None
                }
            })
            .collect();
        breaks[0].1 = ends[0] == 0.0;
        breaks.extend(roots.into_iter().flatten().map(|r| (r, true)));
        breaks.push((b, ends[panels] == 0.0));
    } else {
        breaks.push((b, false));
    }
    let pieces: Vec<(Vec<f64>, Vec<f64>)> = breaks
        .par_windows(2)
        .map(|w| {
            let ((l, lroot), (r, rroot)) = (w[0], w[1]);
            let mut xs = Vec::new();
            let mut ws = Vec::new();
            if r <= l {
                return (xs, ws);
            }
            let m = ((r - l) / width).ceil().max(1.0) as usize;
            let step = (r - l) / m as f64;
            for j in 0..m {
                let lo = l + step * j as f64;
                let hi = if j + 1 == m { r } else { lo + step };
                let gl = j == 0 && lroot;
                let gr = j + 1 == m && rroot;
                match (gl, gr) {
                    (true, true) => {
                        let mid = 0.5 * (lo + hi);
                        push_graded(&mut xs, &mut ws, lo, mid, opts, false);
                        push_graded(&mut xs, &mut ws, mid, hi, opts, true);
                    }
                    (true, false) => push_graded(&mut xs, &mut ws, lo, hi, opts, false),
                    (false, true) => push_graded(&mut xs, &mut ws, lo, hi, opts, true),
                    (false, false) => {
                        let (u, v) = unit_rule(opts.order);
                        for (&s, &ws0) in u.iter().zip(v) {
                            xs.push(lo + (hi - lo) * s);
                            ws.push(ws0 * (hi - lo));
                        }
                    }
                }
            }
            (xs, ws)
        })
        .collect();
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    for (x, w) in pieces {
        xs.extend(x);
        ws.extend(w);
    }
    (xs, ws)
}

fn push_graded(xs: &mut Vec<f64>, ws: &mut Vec<f64>, lo: f64, hi: f64, opts: PanelOptions, toward_right: bool) {
    let (u, v) = unit_rule(opts.order);
    let q = opts.grading;
    let h = hi - lo;
    let mut pts: Vec<(f64, f64)> = u
        .iter()
        .zip(v)
        .map(|(&s, &w)| {
            let g = s.powi(q);
            let wt = w * q as f64 * s.powi(q - 1) * h;
            if toward_right {
                (hi - h * g, wt)
            } else {
                (lo + h * g, wt)
            }
        })
        .collect();
    if toward_right {
        pts.reverse();
    }
    for (x, w) in pts {
        xs.push(x);
        ws.push(w);
    }
}

/// ∫_a^b |h(θ)|^p ρ(θ) dθ over the [`panel_rule`] for `h`.
pub fn lp_power_integral(
    h: &(impl Fn(f64) -> f64 + Sync),
    density: &(impl Fn(f64) -> f64 + Sync),
    p: f64,
    a: f64,
    b: f64,
    panels: usize,
    opts: PanelOptions,
) -> f64 {
    use rayon::prelude::*;
    let (xs, ws) = panel_rule(h, a, b, panels, opts);
    let terms: Vec<f64> = xs
        .par_iter()
        .zip(ws.par_iter())
        .map(|(&x, &w)| w * h(x).abs().powf(p) * density(x))
        .collect();
    // Sequential sum keeps the result independent of the thread schedule.
    terms.iter().sum()
}

/// Outcome of a panel-doubling refinement loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refined {
    pub value: f64,
    pub panels: usize,
    pub doublings: usize,
    pub rel_change: f64,
}

/// Evaluate `compute(panels)` with doubling panel counts until successive values
/// agree to `tol` relative.
pub fn refine_by_doubling(
    mut compute: impl FnMut(usize) -> f64,
    start_panels: usize,
    tol: f64,
    max_doublings: usize,
) -> Result<Refined> {
    let mut panels = start_panels.max(1);
    let mut prev = compute(panels);
    let mut rel = f64::INFINITY;
    for k in 1..=max_doublings {
        panels *= 2;
        let cur = compute(panels);
        if !cur.is_finite() {
            return Err(Error::numerical("non-finite quadrature value", format!("panels={panels}")));
        }
        let scale = cur.abs().max(prev.abs());
        rel = if scale == 0.0 { 0.0 } else { (cur - prev).abs() / scale };
        if rel <= tol {
            return Ok(Refined { value: cur, panels, doublings: k, rel_change: rel });
        }
        prev = cur;
    }
    Err(Error::Convergence(format!(
        "relative change {rel:.3e} > tol {tol:.1e} after {max_doublings} doublings ({panels} panels)"
    )))
}
