//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`). The process exits 0 after printing
//! every line so the workspace test run records the outcome; set
//! `FRACBERN_ACCEPTANCE_STRICT=1` to turn any FAIL into a non-zero exit.
//! `FRACBERN_ACCEPTANCE_ONLY=3,6` restricts the run to the listed criteria.

use fracbern::approx::{self, besov_norm, localized_bump, mean_growth, minimizing_point, sharpness_series};
use fracbern::approx::{CubatureFamily, DyadicPieces, LocalSeries, NearBest};
use fracbern::cli::{self, Experiment, RunConfig};
use fracbern::cubature;
use fracbern::jacobi::{self, JacobiParams};
use fracbern::kernels;
use fracbern::operators::{bernstein_sweep, random_polynomial, weighted_grid, Ensemble, SweepOptions};
use fracbern::sphere::{self, SHExpansion, SpherePoint};
use fracbern::weights::{self, make_power_weight, weighted_lp_norm, Weight, WeightRef};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    detail: String,
}

fn slope(ns: &[f64], vals: &[f64]) -> f64 {
    let x: Vec<f64> = ns.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
    fracbern::fit::least_squares_slope(&x, &y)
}

fn band(vals: &[f64]) -> f64 {
    let mx = vals.iter().cloned().fold(f64::MIN, f64::max);
    let mn = vals.iter().cloned().fold(f64::MAX, f64::min);
    mx / mn
}

fn p00() -> JacobiParams {
    JacobiParams::new(0.0, 0.0).unwrap()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let thetas: Vec<f64> = (0..20).map(|_| rng.gen_range(0.0..PI)).collect();
    let mut worst: f64 = 0.0;
    for &(a, b) in &[(0.0, 0.0), (0.5, 0.0), (1.0, 0.5)] {
        let q = JacobiParams::new(a, b).unwrap();
        let q1 = q.shift_alpha(1.0);
        for &th in &thetas {
            let t = th.cos();
            let mut partial = 0.0;
            for k in 0..=50usize {
                partial += jacobi::kernel_e(q, k, t).unwrap();
                let rhs = jacobi::kernel_e(q1, k, t).unwrap() / (2.0 * k as f64 + a + b + 2.0);
                worst = worst.max((partial - rhs).abs() / rhs.abs().max(1.0));
            }
        }
    }
    Outcome { pass: worst <= 1e-9, detail: format!("max scaled residual {worst:.2e} (tol 1e-9)") }
}

const DYADIC: [usize; 5] = [32, 64, 128, 256, 512];

fn g_norms(r: f64, p: f64) -> Vec<f64> {
    DYADIC.iter().map(|&n| kernels::build_g(n, r, p00()).unwrap().norm(p, None).unwrap()).collect()
}

fn criterion_2() -> Outcome {
    let ns: Vec<f64> = DYADIC.iter().map(|&n| n as f64).collect();
    let g = g_norms(0.0, 0.4);
    let s = slope(&ns, &g);
    Outcome {
        pass: (s + 3.0).abs() <= 0.15,
        detail: format!("fitted slope of ||G_n||_(0.4,0,0) = {s:.3} (target -3 +/- 0.15)"),
    }
}

fn criterion_3() -> Outcome {
    let ns: Vec<f64> = DYADIC.iter().map(|&n| n as f64).collect();
    let g0 = g_norms(0.0, 0.4);
    let ratio = |r: f64| -> Vec<f64> { g_norms(r, 0.4).iter().zip(&g0).map(|(a, b)| a / b).collect() };
    let r4 = ratio(4.0);
    let r1 = ratio(1.0);
    let r3 = ratio(3.0);
    let s4 = slope(&ns, &r4);
    let s1 = slope(&ns, &r1);
    let scaled: Vec<f64> = r3.iter().zip(&ns).map(|(v, n)| v / n.powi(3)).collect();
    let increasing = scaled.windows(2).all(|w| w[1] > w[0]);
    let logged: Vec<f64> = scaled.iter().zip(&ns).map(|(v, n)| v / n.ln().powf(2.5)).collect();
    let b = band(&logged);
    let ok4 = (s4 - 4.0).abs() <= 0.15;
    let ok1 = (s1 - 3.0).abs() <= 0.15;
    let ok3 = increasing && b <= 2.0;
    Outcome {
        pass: ok4 && ok1 && ok3,
        detail: format!(
            "r=4 slope {s4:.3} [{}]; r=1 slope {s1:.3} [{}]; r=3 ratio/n^3 increasing={increasing}, log^2.5 band {b:.2} [{}]",
            tag(ok4),
            tag(ok1),
            tag(ok3)
        ),
    }
}

fn criterion_4() -> Outcome {
    // Localization: B_N = Σ η(k/N) E_k, ℓ = 6.
    let q = p00();
    let mut cs = Vec::new();
    for big_n in [32usize, 64, 128, 256] {
        let k = kernels::build_localized(kernels::CutoffFunction::eta(), big_n, q).unwrap();
        let nf = big_n as f64;
        let mut c: f64 = 0.0;
        for i in 0..=4000 {
            let th = PI * i as f64 / 4000.0;
            let bound = nf * nf * (1.0 + nf * th).powi(-6);
            c = c.max(k.eval_theta(th).abs() / bound);
        }
        cs.push(c);
    }
    let loc_band = band(&cs);
    // Two-sided bound for G_{256,1.5} on [A/n, ε] with A = 20, ε = 0.1.
    let n = 256usize;
    let g = kernels::build_g(n, 1.5, q).unwrap();
    let lo = 20.0 / n as f64;
    let vals: Vec<f64> = (0..=2000)
        .map(|i| {
            let th = lo + (0.1 - lo) * i as f64 / 2000.0;
            g.eval_theta(th).abs() * th.powf(3.5)
        })
        .collect();
    let two_band = band(&vals);
    let ok_loc = loc_band <= 8.0;
    let ok_two = two_band <= 25.0;
    Outcome {
        pass: ok_loc && ok_two,
        detail: format!(
            "localization band {loc_band:.2} (<= 8) [{}]; two-sided band {two_band:.1} (<= 25) [{}]",
            tag(ok_loc),
            tag(ok_two)
        ),
    }
}

fn criterion_5() -> Outcome {
    let q = p00();
    let mut worst = f64::MAX;
    for n in 0..=200usize {
        let s = kernels::build_cesaro(n, 2.0, q).unwrap();
        let s1 = s.eval(1.0);
        for i in 0..2000 {
            let t = -1.0 + 2.0 * i as f64 / 1999.0;
            worst = worst.min(s.eval(t) / s1);
        }
    }
    Outcome { pass: worst >= -1e-9, detail: format!("min S_n^2(t)/S_n(1) = {worst:.3e} (>= -1e-9)") }
}

fn dyadic_f64(ns: &[usize]) -> Vec<f64> {
    ns.iter().map(|&n| n as f64).collect()
}

fn criterion_6() -> Outcome {
    let unit = Weight::unit();
    let opts = SweepOptions { draws: 1, seed: 0, oversample: 1.0, tol: 1e-7 };
    let ns = dyadic_f64(&DYADIC);
    let g0 = g_norms(0.0, 0.4);
    let mut worst: f64 = 0.0;
    let mut sphere_ratios = Vec::new();
    for r in [4.0, 1.0, 3.0] {
        let t = bernstein_sweep(Ensemble::ZonalExtremal, 0.4, r, &unit, &DYADIC, &opts).unwrap();
        let one_d = g_norms(r, 0.4);
        for ((row, a), b) in t.rows.iter().zip(&one_d).zip(&g0) {
            worst = worst.max((row.max_ratio / (a / b) - 1.0).abs());
        }
        sphere_ratios.push(t.rows.iter().map(|row| row.max_ratio).collect::<Vec<f64>>());
    }
    let s4 = slope(&ns, &sphere_ratios[0]);
    let s1 = slope(&ns, &sphere_ratios[1]);
    let scaled: Vec<f64> = sphere_ratios[2].iter().zip(&ns).map(|(v, n)| v / n.powi(3)).collect();
    let increasing = scaled.windows(2).all(|w| w[1] > w[0]);
    let b = band(&scaled.iter().zip(&ns).map(|(v, n)| v / n.ln().powf(2.5)).collect::<Vec<f64>>());
    let ok_agree = worst <= 1e-6;
    let ok_reg = (s4 - 4.0).abs() <= 0.15 && (s1 - 3.0).abs() <= 0.15 && increasing && b <= 2.0;
    Outcome {
        pass: ok_agree && ok_reg,
        detail: format!(
            "sphere vs 1-D max rel diff {worst:.2e} (<= 1e-6) [{}]; r=4 slope {s4:.3}, r=1 slope {s1:.3}, r=3 increasing={increasing} log band {b:.2} [{}]",
            tag(ok_agree),
            tag(ok_reg)
        ),
    }
}

fn criterion_7() -> Outcome {
    let w = make_power_weight(&[1.0, 0.0, 0.0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    // Mollified-weight equivalence: ‖f‖_{p,w_n}/‖f‖_{p,w} over 100 random f per n.
    let mut eq = Vec::new();
    for n in [8usize, 16, 32] {
        let sg = sphere::build_grid(3 * n, 1.5).unwrap();
        let m = weights::mollify(&w, n as f64, &sg).unwrap();
        let pg = weighted_grid(&w, 3 * n, 1.5).unwrap();
        for _ in 0..100 {
            let f = random_polynomial(n, &mut rng);
            let a = sphere::inverse_sh(&f, &sg).unwrap();
            let b = sphere::inverse_sh(&f, &pg).unwrap();
            for p in [0.5, 1.0, 2.0] {
                eq.push(
                    weighted_lp_norm(&a, p, WeightRef::Mollified(&m), &sg).unwrap()
                        / weighted_lp_norm(&b, p, WeightRef::Base(&w), &pg).unwrap(),
                );
            }
        }
    }
    let band32 = band(&eq);
    // Maximal function bound: ‖f*_{ξ,n}‖_{p,w}/‖f‖_{p,w} ≥ 1, ξ = s_w/p + 1.
    let mut mx = Vec::new();
    let mut below_one = false;
    for n in [8usize, 16] {
        let pg = weighted_grid(&w, 3 * n, 1.5).unwrap();
        for _ in 0..10 {
            let f = random_polynomial(n, &mut rng);
            let b = sphere::inverse_sh(&f, &pg).unwrap();
            for p in [0.5, 1.0, 2.0] {
                let ms = weights::maximal_function(&b, n as f64, w.s_w / p + 1.0, &pg).unwrap();
                let r = weighted_lp_norm(&ms, p, WeightRef::Base(&w), &pg).unwrap()
                    / weighted_lp_norm(&b, p, WeightRef::Base(&w), &pg).unwrap();
                below_one |= r < 1.0 - 1e-12;
                mx.push(r);
            }
        }
    }
    let c34 = mx.iter().cloned().fold(0.0, f64::max);
    // Nikolskii: fitted C per n = max over a bump on the zero set and random f.
    let y = SpherePoint::axis(1, false);
    let mut nik = Vec::new();
    for (p, q) in [(0.5, 1.0), (1.0, 2.0), (2.0, f64::INFINITY)] {
        let mut cs = Vec::new();
        for j in 4..=8usize {
            let n = 1usize << j;
            let g = weighted_grid(&w, 2 * n, 2.0).unwrap();
            let s = g.sample(localized_bump(j - 1, &y).unwrap());
            let mut c = weighted_lp_norm(&s, q, WeightRef::Base(&w), &g).unwrap()
                / weighted_lp_norm(&s, p, WeightRef::Base(&w), &g).unwrap();
            if n <= 64 {
                for _ in 0..5 {
                    let b = sphere::inverse_sh(&random_polynomial(n, &mut rng), &g).unwrap();
                    c = c.max(
                        weighted_lp_norm(&b, q, WeightRef::Base(&w), &g).unwrap()
                            / weighted_lp_norm(&b, p, WeightRef::Base(&w), &g).unwrap(),
                    );
                }
            }
            cs.push(c / (n as f64).powf((1.0 / p - 1.0 / q) * w.s_w));
        }
        nik.push(band(&cs));
    }
    let nik_band = nik.iter().cloned().fold(0.0, f64::max);
    let ok32 = band32 <= 10.0;
    let ok34 = !below_one && c34 <= 10.0;
    let okn = nik_band <= 4.0;
    Outcome {
        pass: ok32 && ok34 && okn,
        detail: format!(
            "w_n equivalence band {band32:.2} (<= 10) [{}]; maximal-function C {c34:.3} (<= 10) [{}]; Nikolskii bands {:.2}/{:.2}/{:.2} (<= 4) [{}]",
            tag(ok32),
            tag(ok34),
            nik[0],
            nik[1],
            nik[2],
            tag(okn)
        ),
    }
}

fn criterion_8() -> Outcome {
    let mut worst_res: f64 = 0.0;
    let mut negative = false;
    let mut worst_cmp: f64 = 0.0;
    let mut worst_mz: f64 = 0.0;
    let mut max_deg = 0;
    for spec in ["unit", "power:1,0,0"] {
        let w = Weight::parse(spec).unwrap();
        for n in [2usize, 4, 8] {
            let c = cubature::build_cubature(&w, n, cubature::DEFAULT_DELTA, 11).unwrap();
            worst_res = worst_res.max(c.residual);
            negative |= c.weights.iter().any(|&l| l < 0.0);
            worst_cmp = worst_cmp.max(c.comparability_band().unwrap());
            max_deg = max_deg.max(c.exactness_degree);
            for p in [0.5, 2.0] {
                worst_mz = worst_mz.max(cubature::mz_check(&c, p, 8, 5).unwrap().band);
            }
        }
    }
    let ok_res = worst_res <= 1e-8 && !negative && max_deg <= 32;
    let ok_cmp = worst_cmp <= 32.0;
    let ok_mz = worst_mz <= 8.0;
    Outcome {
        pass: ok_res && ok_cmp && ok_mz,
        detail: format!(
            "max residual {worst_res:.2e} (<= 1e-8), weights >= 0: {}, degree <= {max_deg} [{}]; comparability band {worst_cmp:.2} (<= 32) [{}]; MZ band {worst_mz:.3} (<= 8) [{}]",
            !negative,
            tag(ok_res),
            tag(ok_cmp),
            tag(ok_mz)
        ),
    }
}

fn criterion_9() -> Outcome {
    let w = make_power_weight(&[2.0, 2.0, 2.0]).unwrap();
    let (mut hi, mut lo) = (Vec::new(), Vec::new());
    for n in [16.0, 32.0, 64.0, 128.0, 256.0] {
        let prof = weights::ap_tau_profile(&w, 2.0, n, &weights::degeneracy_caps(n)).unwrap();
        hi.push(prof.quantity(1.5));
        lo.push(prof.quantity(0.5));
    }
    let b = band(&hi);
    let growth = lo[lo.len() - 1] / lo[0];
    let opts = SweepOptions { draws: 1, seed: 3, oversample: 1.5, tol: 1e-8 };
    let t = bernstein_sweep(Ensemble::ZonalExtremal, 2.0, 1.5, &w, &[16, 32, 64, 128, 256], &opts).unwrap();
    let ok_b = b <= 4.0;
    let ok_g = growth >= 2.0;
    let ok_s = t.top_half_slope <= 1.5 + 0.15;
    Outcome {
        pass: ok_b && ok_g && ok_s,
        detail: format!(
            "r=1.5 band {b:.3} (<= 4) [{}]; r=0.5 growth {growth:.1}x (>= 2) [{}]; sweep slope {:.3} (<= 1.65) [{}]",
            tag(ok_b),
            tag(ok_g),
            t.top_half_slope,
            tag(ok_s)
        ),
    }
}

fn lp_unit(f: &SHExpansion, p: f64) -> f64 {
    let g = sphere::build_grid(2 * f.degree().max(4), 3.0).unwrap();
    sphere::lp_norm_sphere(&sphere::inverse_sh(f, &g).unwrap(), p, &g).unwrap()
}

fn criterion_10() -> Outcome {
    let p = 0.6;
    let family = CubatureFamily::build(4, cubature::DEFAULT_DELTA, 1).unwrap();
    // S_k σ = g for g = E_4(⟨·,e⟩).
    let k = 4usize;
    let mut zc = vec![0.0; k + 1];
    zc[k] = 1.0;
    let g = SHExpansion::from_zonal(&zc, &SpherePoint::north());
    let series = LocalSeries::new(&g, k, family.for_degree(k).unwrap()).unwrap();
    let sk = series.partial_sum(k).unwrap();
    let d = sk.max_degree.max(g.max_degree);
    let err = sk.resized(d).sub(&g.resized(d)).coeffs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // ‖V_nσ‖_p decay for the fixed piece.
    let ns = [8usize, 16, 32, 64, 128];
    let norms: Vec<f64> = ns.iter().map(|&n| lp_unit(&series.vallee_poussin(n).unwrap(), p)).collect();
    let decay = slope(&dyadic_f64(&ns), &norms);
    let n256 = lp_unit(&series.vallee_poussin(256).unwrap(), p);
    let steps: Vec<String> = norms
        .iter()
        .chain(std::iter::once(&n256))
        .collect::<Vec<_>>()
        .windows(2)
        .map(|w| format!("{:.2}", (w[1] / w[0]).log2()))
        .collect();
    let target = -2.0 * (1.0 / p - 1.0);
    // End-to-end: ‖f − V_nσ‖_p over the computable right-hand side.
    let mut bands = Vec::new();
    for gamma in [0.5, 1.5] {
        let f = approx::lacunary_function(gamma, 4, 7);
        let pieces = DyadicPieces::build(&f, 7, p, &Weight::unit(), NearBest::Truncation).unwrap();
        let ratios: Vec<f64> = [8usize, 16, 32, 64]
            .iter()
            .map(|&n| {
                let v = approx::vn_sigma_approximant(&f, n, p, &family, NearBest::Truncation).unwrap();
                let d = v.max_degree.max(f.max_degree);
                lp_unit(&f.resized(d).sub(&v.resized(d)), p) / approx::approximation_bound(&pieces, n, p)
            })
            .collect();
        bands.push(band(&ratios));
    }
    let e2e = bands.iter().cloned().fold(0.0, f64::max);
    let ok_s = err <= 1e-8;
    let ok_d = (decay - target).abs() <= 0.2;
    let ok_e = e2e <= 8.0;
    Outcome {
        pass: ok_s && ok_d && ok_e,
        detail: format!(
            "S_k sigma = g max coeff error {err:.2e} (<= 1e-8) [{}]; piece decay slope {decay:.3} over n=8..128 (target {target:.3} +/- 0.2, step slopes to n=256: {}) [{}]; end-to-end band {:.1}/{:.1} (<= 8) [{}]",
            tag(ok_s),
            steps.join(","),
            tag(ok_d),
            bands[0],
            bands[1],
            tag(ok_e)
        ),
    }
}

fn criterion_11() -> Outcome {
    let mut bands = Vec::new();
    for a in [[1.0, 0.0, 0.0], [2.0, 2.0, 2.0]] {
        let w = make_power_weight(&a).unwrap();
        for (p, q) in [(0.5, 1.0), (1.0, 2.0)] {
            let nu = w.s_w * (1.0 / p - 1.0 / q);
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            // Fitted C at scale 2^j: max ratio over the family of that scale.
            let cs: Vec<f64> = (1..=4usize)
                .map(|j| {
                    let deg = 1usize << (j + 1);
                    let y = minimizing_point(&w, 2f64.powi(-(j as i32))).unwrap();
                    let g = sphere::build_grid(2 * deg + 8, 2.0).unwrap();
                    let bump = sphere::sh_transform(&g.sample(localized_bump(j, &y).unwrap()), &g, deg).unwrap();
                    let mut fam = vec![bump];
                    for gamma in [0.5, 1.0, 2.0] {
                        fam.push(approx::lacunary_function(nu + gamma, j, 3));
                    }
                    for _ in 0..3 {
                        fam.push(random_polynomial(1 << j, &mut rng));
                    }
                    let ng = weighted_grid(&w, 4 * deg, 3.0).unwrap();
                    fam.iter()
                        .map(|f| {
                            let b = besov_norm(f, nu, p, q, &w, j + 2).unwrap();
                            weighted_lp_norm(&sphere::inverse_sh(f, &ng).unwrap(), q, WeightRef::Base(&w), &ng).unwrap() / b.value
                        })
                        .fold(0.0, f64::max)
                })
                .collect();
            bands.push(band(&cs));
        }
    }
    let emb = bands.iter().cloned().fold(0.0, f64::max);
    // Sharpness series for the (1,0,0) weight with margin ε = ν/3, ν′ = ν − 2ε.
    let w = make_power_weight(&[1.0, 0.0, 0.0]).unwrap();
    let mut growth_ok = true;
    let mut cauchy_ok = true;
    let mut notes = Vec::new();
    for (p, q) in [(0.5, 1.0), (1.0, 2.0)] {
        let nu = w.s_w * (1.0 / p - 1.0 / q);
        let eps = nu / 3.0;
        let tab = sharpness_series(&w, p, q, eps, 6).unwrap();
        let pq: Vec<f64> = tab.rows.iter().map(|r| r.partial_q).collect();
        let g = mean_growth(&pq);
        growth_ok &= g >= 2f64.powf(eps / 2.0);
        let bp: Vec<f64> = tab.rows.iter().map(|r| r.besov_partial).collect();
        let inc: Vec<f64> = bp.windows(2).map(|w| w[1] - w[0]).collect();
        let tail = &inc[inc.len() / 2..];
        let peak = inc.iter().cloned().fold(0.0, f64::max);
        let c = tail.windows(2).all(|w| w[1] < w[0]) && *inc.last().unwrap() <= 0.5 * peak;
        cauchy_ok &= c;
        notes.push(format!("p={p}: growth {g:.2} vs {:.2}, increments shrinking={c}", 2f64.powf(eps / 2.0)));
    }
    let ok_e = emb <= 8.0;
    Outcome {
        pass: ok_e && growth_ok && cauchy_ok,
        detail: format!(
            "embedding C bands {} (<= 8) [{}]; sharpness {} [{}]",
            bands.iter().map(|b| format!("{b:.2}")).collect::<Vec<_>>().join("/"),
            tag(ok_e),
            notes.join("; "),
            tag(growth_ok && cauchy_ok)
        ),
    }
}

fn criterion_12() -> Outcome {
    let mut configs = Vec::new();
    let mut c = RunConfig::new(Experiment::KernelNorms);
    c.p = vec![0.4, 2.0];
    c.r = vec![1.0, 3.0];
    c.n_min = 16;
    c.n_max = 128;
    configs.push(c);
    let mut c = RunConfig::new(Experiment::BernsteinSweep);
    c.ensemble = Ensemble::RandomCoefficients;
    c.weight = "power:1,0,0".into();
    c.p = vec![0.5];
    c.r = vec![1.5];
    c.n_min = 8;
    c.n_max = 32;
    c.draws = 6;
    c.seed = 42;
    configs.push(c);
    let mut c = RunConfig::new(Experiment::Cubature);
    c.p = vec![0.5];
    c.n_min = 2;
    c.n_max = 4;
    c.draws = 4;
    configs.push(c);
    let dir = tempfile::tempdir().unwrap();
    let mut ok = true;
    for mut c in configs {
        let a = cli::run_experiment(&c).unwrap();
        let b = cli::run_experiment(&c).unwrap();
        ok &= a.same_results(&b);
        ok &= cli::from_json(&cli::to_json(&a).unwrap()).unwrap().same_results(&a);
        c.cache_dir = Some(dir.path().to_path_buf());
        let first = cli::run_experiment(&c).unwrap();
        let hit = cli::run_experiment(&c).unwrap();
        ok &= hit.cache_hit && hit.same_results(&a) && first.same_results(&a);
    }
    Outcome { pass: ok, detail: format!("re-runs, JSON round trips and cache hits bit-identical: {ok}") }
}

fn tag(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "out of tolerance"
    }
}

type Check = fn() -> Outcome;

fn main() {
    let only: Option<Vec<usize>> = std::env::var("FRACBERN_ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let strict = std::env::var("FRACBERN_ACCEPTANCE_STRICT").map(|v| v == "1").unwrap_or(false);
    let checks: Vec<(usize, &str, u64, Check)> = vec![
        (1, "summation identity", 1, criterion_1),
        (2, "||G_n|| asymptotics", 30, criterion_2),
        (3, "norm regimes of G_(n,r)", 120, criterion_3),
        (4, "kernel localization and two-sided bound", 60, criterion_4),
        (5, "Cesaro positivity", 10, criterion_5),
        (6, "Bernstein regimes through the sphere pipeline", 180, criterion_6),
        (7, "weighted norm equivalences and Nikolskii", 120, criterion_7),
        (8, "positive cubature and MZ bands", 60, criterion_8),
        (9, "A_(p,tau) characterization", 120, criterion_9),
        (10, "V_n sigma approximation for p < 1", 300, criterion_10),
        (11, "weighted Besov embedding and sharpness", 180, criterion_11),
        (12, "determinism of run records", 60, criterion_12),
    ];
    let mut failures = 0;
    for (id, name, limit, f) in checks {
        if let Some(sel) = &only {
            if !sel.contains(&id) {
                continue;
            }
        }
        let start = Instant::now();
        let out = f();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(limit);
        let pass = out.pass && in_time;
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {id:>2} [{}] {name}: {} | {:.2}s of {limit}s{}",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            took.as_secs_f64(),
            if in_time { "" } else { " (over time limit)" }
        );
    }
    println!("acceptance: {failures} criterion(s) failing");
    if strict && failures > 0 {
        std::process::exit(1);
    }
}
