//! Geometry of S²: points, caps, rotations, product quadrature grids, real
//! spherical-harmonic transforms, maximal separated sets and a flat text format.
//!
//! Real harmonics use the orthonormal convention ∫ Y_{l,m} Y_{l',m'} dσ = δδ with
//! σ the unnormalized surface measure (|S²| = 4π):
//! Y_{l,0} = Q_l^0(cos θ), Y_{l,m} = √2 Q_l^m(cos θ) cos mφ, Y_{l,−m} = √2 Q_l^m(cos θ) sin mφ.
//! Coefficients are stored at index l² + l + m.

use crate::error::{Error, Result};
use crate::jacobi::gauss_jacobi_t;
use crate::quad::{self, PanelOptions};
use rand::Rng;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

/// Unit vector in R³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint([f64; 3]);

impl SpherePoint {
    /// Normalizes a nonzero vector onto the sphere.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let r = (x * x + y * y + z * z).sqrt();
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::param("cannot normalize a zero or non-finite vector"));
        }
        Ok(SpherePoint([x / r, y / r, z / r]))
    }

    /// Wraps coordinates already known to be unit length.
    pub(crate) fn new_unchecked(c: [f64; 3]) -> Self {
        SpherePoint(c)
    }

    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let s = theta.sin();
        SpherePoint([s * phi.cos(), s * phi.sin(), theta.cos()])
    }

    /// Coordinate axis e_j (j = 0, 1, 2), negated when `negative`.
    pub fn axis(j: usize, negative: bool) -> Self {
        let mut c = [0.0; 3];
        c[j] = if negative { -1.0 } else { 1.0 };
        SpherePoint(c)
    }

    pub fn north() -> Self {
        SpherePoint([0.0, 0.0, 1.0])
    }

    pub fn coords(&self) -> [f64; 3] {
        self.0
    }

    pub fn dot(&self, o: &SpherePoint) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    /// (θ, φ) with θ ∈ [0, π], φ ∈ (−π, π].
    pub fn to_spherical(&self) -> (f64, f64) {
        let [x, y, z] = self.0;
        ((x * x + y * y).sqrt().atan2(z), y.atan2(x))
    }

    pub fn neg(&self) -> Self {
        SpherePoint([-self.0[0], -self.0[1], -self.0[2]])
    }

    fn chord2(&self, o: &SpherePoint) -> f64 {
        let d = [self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]];
        d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
    }
}

/// Geodesic distance arccos(x·y), inner product clamped to [−1, 1].
pub fn geodesic(x: &SpherePoint, y: &SpherePoint) -> f64 {
    x.dot(y).clamp(-1.0, 1.0).acos()
}

/// Geodesic distance from the chord, 2·asin(|x−y|/2); accurate at small separations.
pub fn chord_angle(x: &SpherePoint, y: &SpherePoint) -> f64 {
    chord_to_angle(x.chord2(y).sqrt())
}

/// Surface measure of S^{d−1}.
pub fn sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * PI.powf(h) / libm::tgamma(h)
}

/// Surface measure of a cap of geodesic radius `radius` on S^{d−1}.
pub fn cap_measure(radius: f64, d: usize) -> Result<f64> {
    if !(radius > 0.0 && radius <= PI) {
        return Err(Error::param(format!("cap radius must lie in (0, π], got {radius}")));
    }
    if d < 2 {
        return Err(Error::param("dimension must be at least 2"));
    }
    if d == 3 {
        return Ok(2.0 * PI * (1.0 - radius.cos()));
    }
    // |S^{d−2}| ∫_0^r sin^{d−2}ψ dψ; the integrand is smooth, 64-point Gauss on
    // 8 panels is far below f64 resolution.
    let k = (d - 2) as i32;
    let panels = 8;
    let h = radius / panels as f64;
    let integral: f64 = (0..panels)
        .map(|i| quad::gauss_interval(|s: f64| s.sin().powi(k), h * i as f64, h * (i + 1) as f64, 32))
        .sum();
    Ok(sphere_area(d - 1) * integral)
}

/// Orthogonal 3×3 matrix acting on column vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rotation(pub [[f64; 3]; 3]);

impl Rotation {
    pub fn identity() -> Self {
        Rotation([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn is_identity(&self) -> bool {
        *self == Rotation::identity()
    }

    pub fn apply(&self, x: &SpherePoint) -> SpherePoint {
        let m = &self.0;
        let v = x.0;
        SpherePoint([
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ])
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        let mut t = [[0.0; 3]; 3];
        for (i, row) in t.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = m[j][i];
            }
        }
        Rotation(t)
    }

    pub fn compose(&self, other: &Rotation) -> Self {
        let mut t = [[0.0; 3]; 3];
        for (i, row) in t.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.0[i][k] * other.0[k][j]).sum();
            }
        }
        Rotation(t)
    }

    /// Rodrigues rotation by `angle` about the unit `axis`.
    pub fn about_axis(axis: &SpherePoint, angle: f64) -> Self {
        let [x, y, z] = axis.0;
        let (s, c) = angle.sin_cos();
        let v = 1.0 - c;
        Rotation([
            [c + x * x * v, x * y * v - z * s, x * z * v + y * s],
            [y * x * v + z * s, c + y * y * v, y * z * v - x * s],
            [z * x * v - y * s, z * y * v + x * s, c + z * z * v],
        ])
    }

    /// Haar-distributed rotation from a uniform unit quaternion.
    pub fn random(rng: &mut impl Rng) -> Self {
        let (u1, u2, u3): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
        let a = (1.0 - u1).sqrt();
        let b = u1.sqrt();
        let (w, x, y, z) = (
            a * (2.0 * PI * u2).sin(),
            a * (2.0 * PI * u2).cos(),
            b * (2.0 * PI * u3).sin(),
            b * (2.0 * PI * u3).cos(),
        );
        Rotation([
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w)],
            [2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w)],
            [2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y)],
        ])
    }

    /// Signed permutation taking e₃ to ±e_j, so a polar grid becomes centered there.
    pub fn pole_to_axis(j: usize, negative: bool) -> Result<Self> {
        let s = if negative { -1.0 } else { 1.0 };
        let m = match j {
            0 => [[0.0, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, 0.0]],
            1 => [[1.0, 0.0, 0.0], [0.0, 0.0, s], [0.0, -s, 0.0]],
            2 => [[1.0, 0.0, 0.0], [0.0, s, 0.0], [0.0, 0.0, s]],
            _ => return Err(Error::param(format!("axis index {j} out of range for S²"))),
        };
        Ok(Rotation(m))
    }
}

/// Measure a grid integrates against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GridMeasure {
    /// Unnormalized surface measure, total 4π.
    Surface,
    /// Normalized power weight c·Π|x_j|^{a_j} dσ in physical coordinates, total 1.
    Power([f64; 3]),
}

/// Product rule on S²: polar nodes × azimuth nodes, mapped to physical space by `frame`.
///
/// Samples on a grid are stored ring-major: index i·n_azimuth + j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereGrid {
    pub thetas: Vec<f64>,
    pub theta_weights: Vec<f64>,
    pub phis: Vec<f64>,
    pub phi_weights: Vec<f64>,
    pub uniform_azimuth: bool,
    pub frame: Rotation,
    pub measure: GridMeasure,
    pub exactness_degree: usize,
    /// Valid only for integrands constant on the rings of the frame.
    pub axisymmetric: bool,
}

impl SphereGrid {
    pub fn n_rings(&self) -> usize {
        self.thetas.len()
    }

    pub fn n_azimuth(&self) -> usize {
        self.phis.len()
    }

    pub fn len(&self) -> usize {
        self.n_rings() * self.n_azimuth()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, i: usize, j: usize) -> SpherePoint {
        self.frame.apply(&SpherePoint::from_spherical(self.thetas[i], self.phis[j]))
    }

    pub fn points(&self) -> Vec<SpherePoint> {
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.n_rings() {
            for j in 0..self.n_azimuth() {
                out.push(self.point(i, j));
            }
        }
        out
    }

    pub fn weights(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for &a in &self.theta_weights {
            for &b in &self.phi_weights {
                out.push(a * b);
            }
        }
        out
    }

    pub fn total_measure(&self) -> f64 {
        self.theta_weights.iter().sum::<f64>() * self.phi_weights.iter().sum::<f64>()
    }

    /// Evaluates `f` at every node (parallel, ring-major order).
    pub fn sample(&self, f: impl Fn(&SpherePoint) -> f64 + Sync) -> Vec<f64> {
        let na = self.n_azimuth();
        (0..self.len()).into_par_iter().map(|k| f(&self.point(k / na, k % na))).collect()
    }

    pub fn integrate(&self, samples: &[f64]) -> Result<f64> {
        self.check_len(samples)?;
        let na = self.n_azimuth();
        let mut total = 0.0;
        for (i, wt) in self.theta_weights.iter().enumerate() {
            let ring: f64 = samples[i * na..(i + 1) * na].iter().zip(&self.phi_weights).map(|(f, w)| f * w).sum();
            total += wt * ring;
        }
        Ok(total)
    }

    fn check_len(&self, samples: &[f64]) -> Result<()> {
        if samples.len() != self.len() {
            return Err(Error::Precondition(format!(
                "sample count {} does not match grid size {}",
                samples.len(),
                self.len()
            )));
        }
        Ok(())
    }

    /// Same polar rule with the azimuth collapsed to one node; for ring-constant integrands.
    pub fn collapse_azimuth(&self) -> SphereGrid {
        SphereGrid {
            phis: vec![0.0],
            phi_weights: vec![self.phi_weights.iter().sum()],
            uniform_azimuth: false,
            axisymmetric: true,
            ..self.clone()
        }
    }

    /// Largest exactness defect over the certificate family.
    ///
    /// Surface grids: |∫Y_{l,m} dσ − √(4π)δ_{l0}| for l ≤ degree. Power grids: relative
    /// error on every monomial x^a y^b z^c of total degree ≤ min(degree, 16), against
    /// the closed Gamma-function moments.
    pub fn certify(&self) -> Result<f64> {
        if self.axisymmetric {
            return Err(Error::Precondition("axisymmetric grids carry no full-sphere certificate".into()));
        }
        match &self.measure {
            GridMeasure::Surface => {
                let ones = vec![1.0; self.len()];
                let pts = self.points();
                let wts = self.weights();
                let deg = self.exactness_degree;
                let mut moments = vec![0.0; (deg + 1) * (deg + 1)];
                if self.frame.is_identity() {
                    let tr = sh_analysis(&ones, self, deg)?;
                    moments.copy_from_slice(&tr.coeffs);
                } else {
                    scattered_moments(&pts, &wts, deg, &mut moments);
                }
                moments[0] -= (4.0 * PI).sqrt();
                Ok(moments.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            }
            GridMeasure::Power(a) => {
                let pts = self.points();
                let wts = self.weights();
                Ok(monomial_defect(&pts, &wts, a, self.exactness_degree.min(16)))
            }
        }
    }
}

fn scattered_moments(pts: &[SpherePoint], wts: &[f64], deg: usize, out: &mut [f64]) {
    let parts: Vec<Vec<f64>> = pts
        .par_chunks(256)
        .zip(wts.par_chunks(256))
        .map(|(ps, ws)| {
            let mut acc = vec![0.0; (deg + 1) * (deg + 1)];
            let mut y = vec![0.0; (deg + 1) * (deg + 1)];
            for (p, w) in ps.iter().zip(ws) {
                sh_basis_into(deg, p, &mut y);
                for (a, v) in acc.iter_mut().zip(&y) {
                    *a += w * v;
                }
            }
            acc
        })
        .collect();
    for part in parts {
        for (o, v) in out.iter_mut().zip(part) {
            *o += v;
        }
    }
}

/// ∫_{S²} Π|x_j|^{b_j} dσ = 2ΠΓ((b_j+1)/2)/Γ((Σb+3)/2).
pub fn abs_monomial_integral(b: [f64; 3]) -> f64 {
    let num: f64 = b.iter().map(|&v| libm::lgamma((v + 1.0) / 2.0)).sum();
    let den = libm::lgamma((b.iter().sum::<f64>() + 3.0) / 2.0);
    2.0 * (num - den).exp()
}

fn monomial_defect(pts: &[SpherePoint], wts: &[f64], a: &[f64; 3], deg: usize) -> f64 {
    let norm = 1.0 / abs_monomial_integral(*a);
    let mut worst: f64 = 0.0;
    for total in 0..=deg {
        for i in 0..=total {
            for j in 0..=(total - i) {
                let k = total - i - j;
                let e = [i as i32, j as i32, k as i32];
                let exact = if e.iter().any(|v| v % 2 == 1) {
                    0.0
                } else {
                    norm * abs_monomial_integral([a[0] + e[0] as f64, a[1] + e[1] as f64, a[2] + e[2] as f64])
                };
                let got: f64 = pts
                    .iter()
                    .zip(wts)
                    .map(|(p, w)| {
                        let c = p.coords();
                        w * c[0].powi(e[0]) * c[1].powi(e[1]) * c[2].powi(e[2])
                    })
                    .sum();
                worst = worst.max((got - exact).abs());
            }
        }
    }
    worst
}

/// Gauss–Legendre in cos θ times uniform azimuth, exact for Π_degree on S².
///
/// `oversample` ≥ 1 inflates both node counts for non-polynomial integrands.
pub fn build_grid(exactness_degree: usize, oversample: f64) -> Result<SphereGrid> {
    if !(oversample >= 1.0 && oversample.is_finite()) {
        return Err(Error::param(format!("oversample must be >= 1, got {oversample}")));
    }
    let d = exactness_degree as f64;
    let nt = (((d + 1.0) / 2.0) * oversample).ceil().max(1.0) as usize;
    let np = ((d + 1.0) * oversample).ceil().max(1.0) as usize;
    let (t, wt) = quad::gauss_legendre(nt);
    // Rings ordered from the north pole down.
    let thetas: Vec<f64> = t.iter().rev().map(|v| v.clamp(-1.0, 1.0).acos()).collect();
    let theta_weights: Vec<f64> = wt.iter().rev().cloned().collect();
    let phis: Vec<f64> = (0..np).map(|j| 2.0 * PI * j as f64 / np as f64).collect();
    let phi_weights = vec![2.0 * PI / np as f64; np];
    Ok(SphereGrid {
        thetas,
        theta_weights,
        phis,
        phi_weights,
        uniform_azimuth: true,
        frame: Rotation::identity(),
        measure: GridMeasure::Surface,
        exactness_degree,
        axisymmetric: false,
    })
}

/// Product rule for the normalized power weight c·Π|x_j|^{a_j} dσ, exact on Π_degree.
///
/// In frame coordinates x = (sin θ cos φ, sin θ sin φ, cos θ) the weight separates.
/// Polar: v = cos²θ turns |cos θ|^{b₃} sin^{b₁+b₂}θ d(cos θ) into a Jacobi weight in v,
/// nodes placed at cos θ = ±√v. Azimuth: u = sin²φ does the same on each quadrant.
/// Odd parts integrate to zero by the sign symmetry of the weight.
pub fn power_weight_grid(exponents: [f64; 3], exactness_degree: usize, oversample: f64, frame: Rotation) -> Result<SphereGrid> {
    if exponents.iter().any(|&a| !(a >= 0.0 && a.is_finite())) {
        return Err(Error::param(format!("power-weight exponents must be nonnegative, got {exponents:?}")));
    }
    if !(oversample >= 1.0 && oversample.is_finite()) {
        return Err(Error::param(format!("oversample must be >= 1, got {oversample}")));
    }
    // Exponent attached to local coordinate k: the physical axis it maps to.
    let mut b = [0.0; 3];
    for (k, bk) in b.iter_mut().enumerate() {
        let j = (0..3).max_by(|&x, &y| frame.0[x][k].abs().total_cmp(&frame.0[y][k].abs())).unwrap();
        if (frame.0[j][k].abs() - 1.0).abs() > 1e-12 {
            return Err(Error::Precondition("power-weight grids need a signed-permutation frame".into()));
        }
        *bk = exponents[j];
    }
    // Rules in v and u exact to degree 2m−1 cover trig/polynomial degree 4m−1 ≥ D.
    let m = (((exactness_degree as f64 + 2.0) / 4.0 * oversample).ceil() as usize).max(1);
    let (sv, wv) = gauss_jacobi_t((b[0] + b[1]) / 2.0, (b[2] - 1.0) / 2.0, m)?;
    let (su, wu) = gauss_jacobi_t((b[0] - 1.0) / 2.0, (b[1] - 1.0) / 2.0, m)?;
    // Map s ∈ [−1,1] to [0,1]: (1−s)^α(1+s)^β ds = 2^{α+β+1}(1−v)^α v^β dv.
    let scale_v = 2f64.powf((b[0] + b[1]) / 2.0 + (b[2] - 1.0) / 2.0 + 1.0);
    let scale_u = 2f64.powf((b[0] - 1.0) / 2.0 + (b[1] - 1.0) / 2.0 + 1.0);
    let mut rings: Vec<(f64, f64)> = Vec::with_capacity(2 * m);
    for (s, w) in sv.iter().zip(&wv) {
        let v = 0.5 * (1.0 + s);
        let c = v.sqrt();
        // The even part integrates against the v-rule; split it between ±√v.
        let wt = 0.5 * w / scale_v;
        rings.push((c.clamp(-1.0, 1.0).acos(), wt));
        rings.push(((-c).clamp(-1.0, 1.0).acos(), wt));
    }
    rings.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut az: Vec<(f64, f64)> = Vec::with_capacity(4 * m);
    for (s, w) in su.iter().zip(&wu) {
        let u = 0.5 * (1.0 + s);
        let phi = u.sqrt().clamp(0.0, 1.0).asin();
        let wt = 0.5 * w / scale_u;
        for ph in [phi, PI - phi, PI + phi, 2.0 * PI - phi] {
            az.push((ph, wt));
        }
    }
    az.sort_by(|x, y| x.0.total_cmp(&y.0));
    let norm = 1.0 / abs_monomial_integral(exponents);
    Ok(SphereGrid {
        thetas: rings.iter().map(|r| r.0).collect(),
        theta_weights: rings.iter().map(|r| r.1 * norm).collect(),
        phis: az.iter().map(|r| r.0).collect(),
        phi_weights: az.iter().map(|r| r.1).collect(),
        uniform_azimuth: false,
        frame,
        measure: GridMeasure::Power(exponents),
        exactness_degree,
        axisymmetric: false,
    })
}

/// Axisymmetric surface-measure grid whose polar rule is the root-split panel rule
/// for `profile(θ)`; valid for integrands constant on the rings of `frame`.
pub fn zonal_adapted_grid(profile: &(impl Fn(f64) -> f64 + Sync), panels: usize, frame: Rotation) -> SphereGrid {
    let (thetas, w) = quad::panel_rule(profile, 0.0, PI, panels, PanelOptions::default());
    let theta_weights = thetas.iter().zip(&w).map(|(t, w)| w * t.sin()).collect();
    SphereGrid {
        thetas,
        theta_weights,
        phis: vec![0.0],
        phi_weights: vec![2.0 * PI],
        uniform_azimuth: false,
        frame,
        measure: GridMeasure::Surface,
        exactness_degree: 0,
        axisymmetric: true,
    }
}

/// Real spherical-harmonic coefficients up to `max_degree`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SHExpansion {
    pub max_degree: usize,
    pub coeffs: Vec<f64>,
}

impl SHExpansion {
    pub fn zeros(max_degree: usize) -> Self {
        SHExpansion { max_degree, coeffs: vec![0.0; (max_degree + 1) * (max_degree + 1)] }
    }

    pub fn from_coeffs(max_degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != (max_degree + 1) * (max_degree + 1) {
            return Err(Error::param(format!(
                "expected {} coefficients for degree {max_degree}, got {}",
                (max_degree + 1) * (max_degree + 1),
                coeffs.len()
            )));
        }
        Ok(SHExpansion { max_degree, coeffs })
    }

    pub fn get(&self, l: usize, m: i64) -> f64 {
        self.coeffs[sh_index(l, m)]
    }

    pub fn set(&mut self, l: usize, m: i64, v: f64) {
        self.coeffs[sh_index(l, m)] = v;
    }

    /// Σ_m f_{l,m}².
    pub fn degree_energy(&self, l: usize) -> f64 {
        self.coeffs[l * l..(l + 1) * (l + 1)].iter().map(|v| v * v).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Highest degree with a nonzero coefficient.
    pub fn degree(&self) -> usize {
        (0..=self.max_degree).rev().find(|&l| self.degree_energy(l) > 0.0).unwrap_or(0)
    }

    /// Multiplies the degree-l block by `mult(l)`.
    pub fn map_degrees(&self, mult: impl Fn(usize) -> f64) -> Self {
        let mut out = self.clone();
        for l in 0..=self.max_degree {
            let s = mult(l);
            for v in &mut out.coeffs[l * l..(l + 1) * (l + 1)] {
                *v *= s;
            }
        }
        out
    }

    /// Copy with max degree changed (zero padded or truncated).
    pub fn resized(&self, max_degree: usize) -> Self {
        let mut out = SHExpansion::zeros(max_degree);
        let n = out.coeffs.len().min(self.coeffs.len());
        out.coeffs[..n].copy_from_slice(&self.coeffs[..n]);
        out
    }

    pub fn add(&self, other: &SHExpansion) -> Self {
        let deg = self.max_degree.max(other.max_degree);
        let mut out = self.resized(deg);
        for (o, v) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *o += v;
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        SHExpansion { max_degree: self.max_degree, coeffs: self.coeffs.iter().map(|v| v * s).collect() }
    }

    pub fn sub(&self, other: &SHExpansion) -> Self {
        self.add(&other.scaled(-1.0))
    }

    /// True when every m ≠ 0 coefficient vanishes (axisymmetric about e₃).
    pub fn is_zonal_about_pole(&self) -> bool {
        (0..=self.max_degree).all(|l| (1..=l as i64).all(|m| self.get(l, m) == 0.0 && self.get(l, -m) == 0.0))
    }

    /// Expansion of F(x·e) = Σ c_l E_l^{(0,0)}(x·e) by the addition theorem:
    /// f_{l,m} = 4π c_l Y_{l,m}(e).
    pub fn from_zonal(coeffs: &[f64], center: &SpherePoint) -> Self {
        let deg = coeffs.len().saturating_sub(1);
        let mut y = vec![0.0; (deg + 1) * (deg + 1)];
        sh_basis_into(deg, center, &mut y);
        let mut out = SHExpansion::zeros(deg);
        for (l, c) in coeffs.iter().enumerate() {
            for k in l * l..(l + 1) * (l + 1) {
                out.coeffs[k] = 4.0 * PI * c * y[k];
            }
        }
        out
    }

    /// Value at a point, O(L²).
    pub fn eval(&self, x: &SpherePoint) -> f64 {
        let mut y = vec![0.0; self.coeffs.len()];
        sh_basis_into(self.max_degree, x, &mut y);
        y.iter().zip(&self.coeffs).map(|(a, b)| a * b).sum()
    }
}

#[inline]
pub fn sh_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

/// Q_l^m(t) for l = m..=L, s = sin θ ≥ 0.
fn legendre_column(m: usize, lmax: usize, t: f64, s: f64, out: &mut [f64]) {
    let mut q = 1.0 / (4.0 * PI).sqrt();
    for k in 1..=m {
        let kf = k as f64;
        q *= ((2.0 * kf + 1.0) / (2.0 * kf)).sqrt() * s;
    }
    out[0] = q;
    if lmax == m {
        return;
    }
    out[1] = (2.0 * m as f64 + 3.0).sqrt() * t * q;
    let mf = m as f64;
    for l in (m + 2)..=lmax {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let l1 = lf - 1.0;
        let b = ((l1 * l1 - mf * mf) / (4.0 * l1 * l1 - 1.0)).sqrt();
        out[l - m] = a * (t * out[l - m - 1] - b * out[l - m - 2]);
    }
}

/// All Y_{l,m}(x), l ≤ L, written at index l² + l + m.
pub fn sh_basis_into(lmax: usize, x: &SpherePoint, out: &mut [f64]) {
    let (theta, phi) = x.to_spherical();
    let (s, t) = theta.sin_cos();
    let mut col = vec![0.0; lmax + 1];
    for m in 0..=lmax {
        legendre_column(m, lmax, t, s, &mut col);
        if m == 0 {
            for l in 0..=lmax {
                out[sh_index(l, 0)] = col[l];
            }
        } else {
            let (sm, cm) = (m as f64 * phi).sin_cos();
            let r2 = std::f64::consts::SQRT_2;
            for l in m..=lmax {
                out[sh_index(l, m as i64)] = r2 * col[l - m] * cm;
                out[sh_index(l, -(m as i64))] = r2 * col[l - m] * sm;
            }
        }
    }
}

/// Samples of an expansion on a grid (ring-major).
///
/// Identity-frame grids use per-ring Legendre sums and an FFT (uniform azimuth) or
/// direct trig sums; other frames fall back to pointwise evaluation.
pub fn inverse_sh(exp: &SHExpansion, grid: &SphereGrid) -> Result<Vec<f64>> {
    if grid.axisymmetric && !(exp.is_zonal_about_pole() && grid.frame.is_identity()) {
        return Err(Error::Precondition(
            "axisymmetric grids only carry expansions that are zonal about their pole".into(),
        ));
    }
    if !grid.frame.is_identity() {
        return Ok(grid.sample(|x| exp.eval(x)));
    }
    let lmax = exp.max_degree;
    let na = grid.n_azimuth();
    if exp.is_zonal_about_pole() {
        let rings: Vec<f64> = grid
            .thetas
            .par_iter()
            .map(|&th| {
                let mut col = vec![0.0; lmax + 1];
                let (s, t) = th.sin_cos();
                legendre_column(0, lmax, t, s, &mut col);
                (0..=lmax).map(|l| exp.get(l, 0) * col[l]).sum()
            })
            .collect();
        return Ok(rings.iter().flat_map(|&v| std::iter::repeat(v).take(na)).collect());
    }
    let fft = if grid.uniform_azimuth { Some(FftPlanner::<f64>::new().plan_fft_inverse(na)) } else { None };
    let rows: Vec<Vec<f64>> = grid
        .thetas
        .par_iter()
        .map(|&th| {
            let (s, t) = th.sin_cos();
            let mut col = vec![0.0; lmax + 1];
            let mut fc = vec![0.0; lmax + 1];
            let mut fs = vec![0.0; lmax + 1];
            for m in 0..=lmax {
                legendre_column(m, lmax, t, s, &mut col);
                let mi = m as i64;
                for l in m..=lmax {
                    fc[m] += exp.get(l, mi) * col[l - m];
                    if m > 0 {
                        fs[m] += exp.get(l, -mi) * col[l - m];
                    }
                }
            }
            let r2 = std::f64::consts::SQRT_2;
            match &fft {
                Some(plan) => {
                    let mut buf = vec![Complex::new(0.0, 0.0); na];
                    buf[0] += Complex::new(fc[0], 0.0);
                    for m in 1..=lmax {
                        buf[m % na] += Complex::new(r2 * fc[m], -r2 * fs[m]);
                    }
                    plan.process(&mut buf);
                    buf.iter().map(|c| c.re).collect()
                }
                None => grid
                    .phis
                    .iter()
                    .map(|&ph| {
                        let mut v = fc[0];
                        for m in 1..=lmax {
                            let (sm, cm) = (m as f64 * ph).sin_cos();
                            v += r2 * (fc[m] * cm + fs[m] * sm);
                        }
                        v
                    })
                    .collect(),
            }
        })
        .collect();
    Ok(rows.concat())
}

/// Quadrature projection of grid samples onto harmonics of degree ≤ max_degree.
///
/// Requires a surface-measure, identity-frame grid exact to degree 2·max_degree.
pub fn sh_transform(samples: &[f64], grid: &SphereGrid, max_degree: usize) -> Result<SHExpansion> {
    if grid.measure != GridMeasure::Surface || grid.axisymmetric || !grid.frame.is_identity() {
        return Err(Error::Precondition("sh_transform needs a full surface-measure grid in the standard frame".into()));
    }
    if grid.exactness_degree < 2 * max_degree {
        return Err(Error::Precondition(format!(
            "grid exactness {} < 2·max_degree = {}",
            grid.exactness_degree,
            2 * max_degree
        )));
    }
    sh_analysis(samples, grid, max_degree)
}

fn sh_analysis(samples: &[f64], grid: &SphereGrid, lmax: usize) -> Result<SHExpansion> {
    grid.check_len(samples)?;
    let na = grid.n_azimuth();
    let r2 = std::f64::consts::SQRT_2;
    let uniform = grid.uniform_azimuth && na > lmax;
    let fft = if uniform { Some(FftPlanner::<f64>::new().plan_fft_forward(na)) } else { None };
    // Per ring: a_m (cos part) and b_m (sin part) including azimuth weights.
    let ring_coeffs: Vec<(Vec<f64>, Vec<f64>)> = (0..grid.n_rings())
        .into_par_iter()
        .map(|i| {
            let row = &samples[i * na..(i + 1) * na];
            let mut a = vec![0.0; lmax + 1];
            let mut b = vec![0.0; lmax + 1];
            match &fft {
                Some(plan) => {
                    let w = grid.phi_weights[0];
                    let mut buf: Vec<Complex<f64>> = row.iter().map(|&v| Complex::new(v, 0.0)).collect();
                    plan.process(&mut buf);
                    a[0] = w * buf[0].re;
                    for m in 1..=lmax {
                        a[m] = r2 * w * buf[m].re;
                        b[m] = -r2 * w * buf[m].im;
                    }
                }
                None => {
                    for (j, (&ph, &w)) in grid.phis.iter().zip(&grid.phi_weights).enumerate() {
                        let v = w * row[j];
                        a[0] += v;
                        for m in 1..=lmax {
                            let (sm, cm) = (m as f64 * ph).sin_cos();
                            a[m] += r2 * v * cm;
                            b[m] += r2 * v * sm;
                        }
                    }
                }
            }
            (a, b)
        })
        .collect();
    let trig: Vec<(f64, f64)> = grid.thetas.iter().map(|t| t.sin_cos()).collect();
    let columns: Vec<(Vec<f64>, Vec<f64>)> = (0..=lmax)
        .into_par_iter()
        .map(|m| {
            let mut cpos = vec![0.0; lmax + 1 - m];
            let mut cneg = vec![0.0; lmax + 1 - m];
            let mut col = vec![0.0; lmax + 1 - m];
            for (i, &(s, t)) in trig.iter().enumerate() {
                legendre_column(m, lmax, t, s, &mut col);
                let w = grid.theta_weights[i];
                let (am, bm) = (ring_coeffs[i].0[m] * w, ring_coeffs[i].1[m] * w);
                for k in 0..col.len() {
                    cpos[k] += col[k] * am;
                    cneg[k] += col[k] * bm;
                }
            }
            (cpos, cneg)
        })
        .collect();
    let mut out = SHExpansion::zeros(lmax);
    for (m, (cpos, cneg)) in columns.into_iter().enumerate() {
        for l in m..=lmax {
            out.set(l, m as i64, cpos[l - m]);
            if m > 0 {
                out.set(l, -(m as i64), cneg[l - m]);
            }
        }
    }
    Ok(out)
}

/// (Σ w|f|^p)^{1/p} over the grid measure; p = ∞ gives the grid max.
pub fn lp_norm_sphere(samples: &[f64], p: f64, grid: &SphereGrid) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::param(format!("p must be positive, got {p}")));
    }
    grid.check_len(samples)?;
    if p.is_infinite() {
        return Ok(samples.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }
    let powered: Vec<f64> = samples.iter().map(|v| v.abs().powf(p)).collect();
    let s = grid.integrate(&powered)?;
    Ok(s.powf(1.0 / p))
}

/// ‖f‖_{L^p(S²)} for an expansion that is zonal about e₃, on doubling root-adapted
/// axisymmetric grids. Stops when the norm changes by less than `tol` relative.
pub fn lp_norm_zonal_sphere(exp: &SHExpansion, p: f64, tol: f64) -> Result<f64> {
    if !exp.is_zonal_about_pole() {
        return Err(Error::Precondition("expansion is not zonal about the pole".into()));
    }
    if !(p > 0.0) {
        return Err(Error::param(format!("p must be positive, got {p}")));
    }
    let lmax = exp.max_degree;
    let profile = |th: f64| {
        let mut col = vec![0.0; lmax + 1];
        let (s, t) = th.sin_cos();
        legendre_column(0, lmax, t, s, &mut col);
        (0..=lmax).map(|l| exp.get(l, 0) * col[l]).sum::<f64>()
    };
    if p.is_infinite() {
        let g = zonal_adapted_grid(&profile, 8 * (lmax + 1), Rotation::identity());
        return lp_norm_sphere(&inverse_sh(exp, &g)?, p, &g);
    }
    let start = 8 * (exp.degree() + 1);
    let mut err = None;
    let r = quad::refine_by_doubling(
        |panels| {
            let g = zonal_adapted_grid(&profile, panels, Rotation::identity());
            match inverse_sh(exp, &g).and_then(|s| lp_norm_sphere(&s, p, &g)) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    f64::NAN
                }
            }
        },
        start,
        tol,
        6,
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok(r?.value)
}

/// Fibonacci lattice with roughly `spacing` between neighbours.
pub fn fibonacci_lattice(spacing: f64) -> Vec<SpherePoint> {
    let n = ((4.0 * PI / (spacing * spacing)).ceil() as usize).max(2);
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let ph = golden * i as f64;
            SpherePoint([r * ph.cos(), r * ph.sin(), z])
        })
        .collect()
}

/// Points with pairwise geodesic distance ≥ epsilon; `maximal` certifies that every
/// node of an ε/4 check lattice lies within epsilon of the set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatedSet {
    pub points: Vec<SpherePoint>,
    pub epsilon: f64,
    pub maximal: bool,
}

impl SeparatedSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Minimum pairwise geodesic distance (brute force above a cell index).
    pub fn min_separation(&self) -> f64 {
        let index = CellIndex::new(&self.points, chord(self.epsilon).max(1e-3));
        let reach = chord(self.epsilon) * 1.01;
        let mut best2 = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            index.for_each_near(p, reach, |j| {
                if j != i {
                    best2 = best2.min(p.chord2(&self.points[j]));
                }
            });
        }
        if best2.is_infinite() {
            // Nothing within ε·1.01 of anything: fall back to the exact pairwise scan.
            for i in 0..self.points.len() {
                for j in 0..i {
                    best2 = best2.min(self.points[i].chord2(&self.points[j]));
                }
            }
        }
        chord_to_angle(best2.sqrt())
    }
}

fn chord(angle: f64) -> f64 {
    2.0 * (0.5 * angle.min(PI)).sin()
}

fn chord_to_angle(c: f64) -> f64 {
    2.0 * (0.5 * c).min(1.0).asin()
}

struct CellIndex {
    cell: f64,
    dim: usize,
    start: Vec<u32>,
    items: Vec<u32>,
}

impl CellIndex {
    fn new(points: &[SpherePoint], cell: f64) -> Self {
        let dim = ((2.0 / cell).ceil() as usize).clamp(1, 256);
        let cell = 2.0 / dim as f64;
        let key = |p: &SpherePoint| {
            let c = p.coords().map(|v| (((v + 1.0) / cell) as usize).min(dim - 1));
            (c[0] * dim + c[1]) * dim + c[2]
        };
        let mut counts = vec![0u32; dim * dim * dim + 1];
        for p in points {
            counts[key(p) + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let mut fill = counts.clone();
        let mut items = vec![0u32; points.len()];
        for (i, p) in points.iter().enumerate() {
            let k = key(p);
            items[fill[k] as usize] = i as u32;
            fill[k] += 1;
        }
        CellIndex { cell, dim, start: counts, items }
    }

    fn for_each_near(&self, p: &SpherePoint, radius: f64, mut f: impl FnMut(usize)) {
        let c = p.coords();
        let lo = c.map(|v| (((v - radius + 1.0) / self.cell).floor().max(0.0) as usize).min(self.dim - 1));
        let hi = c.map(|v| (((v + radius + 1.0) / self.cell).floor().max(0.0) as usize).min(self.dim - 1));
        for x in lo[0]..=hi[0] {
            for y in lo[1]..=hi[1] {
                for z in lo[2]..=hi[2] {
                    let k = (x * self.dim + y) * self.dim + z;
                    for &i in &self.items[self.start[k] as usize..self.start[k + 1] as usize] {
                        f(i as usize);
                    }
                }
            }
        }
    }
}

#[derive(PartialEq)]
struct HeapItem(f64, u32);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(other.1.cmp(&self.1))
    }
}

/// Greedy farthest-point maximal ε-separated set.
///
/// Candidates are a seeded random rotation of a Fibonacci lattice at spacing
/// min(ε/8, 0.05) together with the ε/4 check lattice, so maximality over the
/// candidates is also the covering certificate on the check lattice.
pub fn build_separated_set(epsilon: f64, seed: u64) -> Result<SeparatedSet> {
    use rand::SeedableRng;
    if !(epsilon > 0.0 && epsilon < PI) {
        return Err(Error::param(format!("epsilon must lie in (0, π), got {epsilon}")));
    }
    if epsilon < 5e-3 {
        return Err(Error::param(format!("epsilon {epsilon} below the supported resolution 5e-3")));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let rot = Rotation::random(&mut rng);
    let check = fibonacci_lattice(epsilon / 4.0);
    let n_check = check.len();
    let mut cands: Vec<SpherePoint> = check;
    cands.extend(fibonacci_lattice((epsilon / 8.0).min(0.05)).iter().map(|p| rot.apply(p)));
    let sep2 = chord(epsilon).powi(2);
    let index = CellIndex::new(&cands, chord(epsilon));
    let mut dist = vec![f64::INFINITY; cands.len()];
    let mut heap = std::collections::BinaryHeap::with_capacity(cands.len());
    let mut chosen: Vec<SpherePoint> = Vec::new();
    // First pick: the first rotated candidate, so the seed moves the whole set.
    let mut next = n_check.min(cands.len() - 1);
    let mut reach = 2.0f64;
    loop {
        let s = cands[next];
        chosen.push(s);
        dist[next] = 0.0;
        index.for_each_near(&s, reach * 1.000001, |j| {
            let d = s.chord2(&cands[j]);
            if d < dist[j] {
                dist[j] = d;
                heap.push(HeapItem(d, j as u32));
            }
        });
        let mut found = None;
        while let Some(HeapItem(d, j)) = heap.pop() {
            if d == dist[j as usize] && d > 0.0 {
                found = Some((d, j as usize));
                break;
            }
        }
        match found {
            Some((d, j)) if d >= sep2 => {
                next = j;
                reach = d.sqrt();
            }
            _ => break,
        }
    }
    let worst_check = dist[..n_check].iter().fold(0.0f64, |m, &v| m.max(v));
    let covering = chord_to_angle(worst_check.sqrt());
    if covering > epsilon {
        return Err(Error::Internal(format!("covering check failed: radius {covering} > epsilon {epsilon}")));
    }
    let set = SeparatedSet { points: chosen, epsilon, maximal: true };
    if set.len() > 1 {
        let sep = set.min_separation();
        if sep < epsilon * (1.0 - 1e-12) {
            return Err(Error::Internal(format!("separation check failed: {sep} < {epsilon}")));
        }
    }
    Ok(set)
}

/// Scattered nodes with weights, as read from or written to the flat text format.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    pub kind: String,
    pub points: Vec<SpherePoint>,
    pub weights: Vec<f64>,
    pub epsilon: Option<f64>,
    pub degree: Option<usize>,
    pub measure: Option<GridMeasure>,
    pub residual: Option<f64>,
}

impl NodeSet {
    pub fn from_grid(grid: &SphereGrid) -> Result<Self> {
        if grid.axisymmetric {
            return Err(Error::Precondition("axisymmetric grids are not full node sets".into()));
        }
        Ok(NodeSet {
            kind: "grid".into(),
            points: grid.points(),
            weights: grid.weights(),
            epsilon: None,
            degree: Some(grid.exactness_degree),
            measure: Some(grid.measure.clone()),
            residual: None,
        })
    }

    pub fn from_separated(set: &SeparatedSet) -> Self {
        NodeSet {
            kind: "separated".into(),
            points: set.points.clone(),
            weights: vec![1.0; set.len()],
            epsilon: Some(set.epsilon),
            degree: None,
            measure: None,
            residual: None,
        }
    }

    /// Exactness defect of a node set claiming a degree and a measure.
    pub fn exactness_defect(&self) -> Option<f64> {
        let deg = self.degree?;
        match self.measure.as_ref()? {
            GridMeasure::Surface => {
                let mut mom = vec![0.0; (deg + 1) * (deg + 1)];
                scattered_moments(&self.points, &self.weights, deg, &mut mom);
                mom[0] -= (4.0 * PI).sqrt();
                Some(mom.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            }
            GridMeasure::Power(a) => Some(monomial_defect(&self.points, &self.weights, a, deg.min(16))),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# fracbern nodes v1").unwrap();
        writeln!(s, "# kind {}", self.kind).unwrap();
        writeln!(s, "# count {}", self.points.len()).unwrap();
        if let Some(e) = self.epsilon {
            writeln!(s, "# epsilon {e}").unwrap();
        }
        if let Some(d) = self.degree {
            writeln!(s, "# degree {d}").unwrap();
        }
        match &self.measure {
            Some(GridMeasure::Surface) => writeln!(s, "# measure surface").unwrap(),
            Some(GridMeasure::Power(a)) => writeln!(s, "# measure power:{},{},{}", a[0], a[1], a[2]).unwrap(),
            None => {}
        }
        if let Some(r) = self.residual {
            writeln!(s, "# residual {r}").unwrap();
        }
        for (p, w) in self.points.iter().zip(&self.weights) {
            let c = p.coords();
            writeln!(s, "{} {} {} {}", c[0], c[1], c[2], w).unwrap();
        }
        s
    }

    /// Parses the text format; node sets with a degree and measure are re-certified.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut ns = NodeSet {
            kind: String::new(),
            points: Vec::new(),
            weights: Vec::new(),
            epsilon: None,
            degree: None,
            measure: None,
            residual: None,
        };
        let mut count = None;
        let bad = |line: usize, what: &str| Error::Io(format!("line {line}: {what}"));
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let mut it = rest.split_whitespace();
                let key = it.next().unwrap_or("");
                let val = it.next().unwrap_or("");
                match key {
                    "kind" => ns.kind = val.to_string(),
                    "count" => count = Some(val.parse::<usize>().map_err(|_| bad(no + 1, "bad count"))?),
                    "epsilon" => ns.epsilon = Some(val.parse().map_err(|_| bad(no + 1, "bad epsilon"))?),
                    "degree" => ns.degree = Some(val.parse().map_err(|_| bad(no + 1, "bad degree"))?),
                    "residual" => ns.residual = Some(val.parse().map_err(|_| bad(no + 1, "bad residual"))?),
                    "measure" => {
                        ns.measure = Some(if val == "surface" {
                            GridMeasure::Surface
                        } else if let Some(list) = val.strip_prefix("power:") {
                            let v: Vec<f64> = list
                                .split(',')
                                .map(|t| t.parse::<f64>())
                                .collect::<std::result::Result<_, _>>()
                                .map_err(|_| bad(no + 1, "bad measure"))?;
                            if v.len() != 3 {
                                return Err(bad(no + 1, "power measure needs three exponents"));
                            }
                            GridMeasure::Power([v[0], v[1], v[2]])
                        } else {
                            return Err(bad(no + 1, "unknown measure"));
                        })
                    }
                    _ => {}
                }
                continue;
            }
            let v: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad(no + 1, "non-numeric node line"))?;
            if v.len() != 4 {
                return Err(bad(no + 1, "node lines need x y z w"));
            }
            let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if (r - 1.0).abs() > 1e-12 {
                return Err(bad(no + 1, "node is not on the unit sphere"));
            }
            ns.points.push(SpherePoint([v[0], v[1], v[2]]));
            ns.weights.push(v[3]);
        }
        if let Some(c) = count {
            if c != ns.points.len() {
                return Err(Error::Io(format!("header count {c} but {} nodes", ns.points.len())));
            }
        }
        if let Some(def) = ns.exactness_defect() {
            let scale = ns.weights.iter().map(|w| w.abs()).sum::<f64>().max(1.0);
            if def > 1e-11 * scale {
                return Err(Error::Precondition(format!("loaded node set fails its exactness certificate: defect {def:.3e}")));
            }
        }
        Ok(ns)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        NodeSet::from_text(&std::fs::read_to_string(path)?)
    }
}
