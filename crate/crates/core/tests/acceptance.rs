//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! `ACCEPTANCE_ONLY=3,7` restricts the run to the listed criteria.
//! Criterion 5 is a known failure; the process exits nonzero only when
//! another criterion fails.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use blockradial::dyadic::make_partition;
use blockradial::harness::{
    kernel_sample_points, make_family, region_label, region_label_exact, riesz_corners, riesz_map,
    FamilyKind, ProbeConfig, Region, TestFamily, Trend,
};
use blockradial::kernels::{
    apply_t0, apply_tj, check_kj_bound, check_tj_scaling, default_lorentz_exponent, extend,
    kernel_kj, phi_j, DyadicPiece,
};
use blockradial::lap::{
    check_phim_asymptotics, fit_slope, plemelj_eps_extrapolated, plemelj_limit, residual, resolve,
    SymbolKind, SymbolModel,
};
use blockradial::oscint::{check_envelope, SweepConfig};
use blockradial::profile::{gaussian, lebesgue_norm, BlockRadialProfile, Dimensions, RadialGrid};
use blockradial::quadrature::gauss_legendre;
use blockradial::specfun::{asymptotic_sum, sphere_kernel, SphereKernelParams};
use blockradial::transform::{forward_transform, inverse_transform};

type Outcome = (bool, String);

const KNOWN_FAILURES: &[usize] = &[5];

fn dims(d: usize, k: usize) -> Dimensions {
    Dimensions::new(d, k).unwrap()
}

fn c1_kernel_closed_form() -> Outcome {
    let n = 100_000;
    let worst = (1..=n)
        .map(|i| {
            let r = 50.0 * i as f64 / n as f64;
            (sphere_kernel(3, r).unwrap() - (2.0 / PI).sqrt() * r.sin() / r).abs()
        })
        .fold(0.0, f64::max);
    (
        worst < 1e-10,
        format!("max error {worst:.2e} over {n} radii"),
    )
}

fn c2_partition() -> Outcome {
    let fam = make_partition(24).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let worst = (0..10_000)
        .map(|i| {
            // half linear on [0, 8], half log-uniform up to 2^20
            let z = if i % 2 == 0 {
                rng.random_range(0.0..8.0)
            } else {
                2f64.powf(rng.random_range(-4.0..20.0))
            };
            (fam.sum(z) - 1.0).abs()
        })
        .fold(0.0, f64::max);
    (worst < 1e-12, format!("max |sum - 1| = {worst:.2e}"))
}

fn c3_round_trip() -> Outcome {
    let grid = Arc::new(RadialGrid::uniform(12.0, 16, 16).unwrap());
    let widths = [(0.5, 0.5), (0.3, 0.8), (1.0, 0.4), (0.7, 1.5)];
    let (mut trip, mut planch, mut exact) = (0.0f64, 0.0f64, 0.0f64);
    for (d, k) in [(3, 1), (4, 2), (5, 2), (6, 3)] {
        let dd = dims(d, k);
        let (l1, l2) = (dd.dk() as f64, k as f64);
        for &(a, b) in &widths {
            let f = BlockRadialProfile::from_real_fn(
                dd,
                Arc::clone(&grid),
                Arc::clone(&grid),
                move |x, y| (-a * x * x - b * y * y).exp(),
            );
            let fh = forward_transform(&f);
            let back = inverse_transform(&fh);
            let n = lebesgue_norm(&f, 2.0);
            trip = trip.max(lebesgue_norm(&back.sub(&f), 2.0) / n);
            planch = planch.max((lebesgue_norm(&fh, 2.0) - n).abs() / n);
            // closed form of the transform of a separable Gaussian
            let want = BlockRadialProfile::from_real_fn(
                dd,
                Arc::clone(&grid),
                Arc::clone(&grid),
                move |x, y| {
                    (2.0 * a).powf(-l1 / 2.0)
                        * (2.0 * b).powf(-l2 / 2.0)
                        * (-x * x / (4.0 * a) - y * y / (4.0 * b)).exp()
                },
            );
            exact = exact.max(lebesgue_norm(&fh.sub(&want), 2.0) / n);
        }
    }
    let worst = trip.max(planch).max(exact);
    (
        worst < 1e-6,
        format!("round trip {trip:.2e}, Plancherel {planch:.2e}, closed form {exact:.2e}"),
    )
}

/// Slope of the per-period maxima of `|𝒥_d − A_L|` on `[20, 200]`, or `None`
/// when the residual is zero to rounding.
fn expansion_residual_slope(d: usize, l: usize) -> Option<f64> {
    let params = SphereKernelParams::new(d, l).unwrap();
    let per = 64;
    let blocks = ((200.0 - 20.0) / (2.0 * PI)).floor() as usize;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut largest_ratio = 0.0f64;
    for b in 0..blocks {
        let (mut zmax, mut vmax) = (0.0, 0.0f64);
        for i in 0..per {
            let z = 20.0 + 2.0 * PI * (b as f64 + i as f64 / per as f64);
            let v = (sphere_kernel(d, z).unwrap() - asymptotic_sum(&params, z).re).abs();
            let scale = z.powf((1.0 - d as f64) / 2.0);
            largest_ratio = largest_ratio.max(v / scale);
            if v > vmax {
                zmax = z;
                vmax = v;
            }
        }
        if vmax > 0.0 {
            xs.push(f64::ln(zmax));
            ys.push(vmax.ln());
        }
    }
    if largest_ratio < 1e-13 {
        None
    } else {
        Some(fit_slope(&xs, &ys))
    }
}

fn c4_expansion() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for d in [3, 4, 5] {
        for l in [1, 2] {
            let want = (1.0 - d as f64) / 2.0 - l as f64;
            match expansion_residual_slope(d, l) {
                Some(s) => {
                    ok &= (s - want).abs() <= 0.15;
                    notes.push(format!("d{d} L{l} {s:.3} (want {want})"));
                }
                None => notes.push(format!("d{d} L{l} exact")),
            }
        }
    }
    (ok, notes.join(", "))
}

fn c5_envelope() -> Outcome {
    let sweep = SweepConfig::default();
    let mut ok = true;
    let mut bad = Vec::new();
    let mut worst_ok = 0.0f64;
    for (a1, a2) in sweep.pairs() {
        let specs = sweep.specs(a1, a2).unwrap();
        assert!(specs.len() >= 200);
        let rep = check_envelope(&specs).unwrap();
        if rep.exceedance <= 1.2 {
            worst_ok = worst_ok.max(rep.exceedance);
        } else {
            ok = false;
            bad.push(format!("({a1}, {a2}) {:.3}", rep.exceedance));
        }
    }
    let mut msg = format!("exceedance <= {worst_ok:.3} on passing pairs");
    if !bad.is_empty() {
        msg.push_str(&format!("; above 1.2: {}", bad.join(", ")));
    }
    (ok, msg)
}

fn c6_kernel_bound() -> Outcome {
    let points = kernel_sample_points(1..=6, 1000, 7);
    let mut ok = true;
    let mut notes = Vec::new();
    for (d, k) in [(4, 2), (5, 2)] {
        let rep = check_kj_bound(dims(d, k), 3, &points).unwrap();
        ok &= rep.exceedance <= 1.2;
        notes.push(format!("({d},{k}) {:.3}", rep.exceedance));
    }
    (ok, format!("exceedance {}", notes.join(", ")))
}

/// `(x·ω, weight)` for a rule on `S^{n−1}`, `n ∈ {2, 3}`, with `x` a fixed
/// generic unit vector.
fn sphere_dots(n: usize, size: usize) -> Vec<(f64, f64)> {
    if n == 2 {
        let h = 2.0 * PI / size as f64;
        return (0..size).map(|i| ((i as f64 * h + 0.3).cos(), h)).collect();
    }
    assert_eq!(n, 3);
    let rule = gauss_legendre(size);
    let (a, b) = (0.7f64, 0.4f64);
    let e = [a.sin() * b.cos(), a.sin() * b.sin(), a.cos()];
    let m = 2 * size;
    let h = 2.0 * PI / m as f64;
    let mut out = Vec::with_capacity(size * m);
    for (c, w) in rule.nodes.iter().zip(&rule.weights) {
        let s = (1.0 - c * c).sqrt();
        for i in 0..m {
            let p = i as f64 * h;
            out.push((e[0] * s * p.cos() + e[1] * s * p.sin() + e[2] * c, w * h));
        }
    }
    out
}

/// `∫_{S^{d−k−1}}∫_{S^{k−1}} Φ_j(|x − y|) dσ dσ` by a product rule.
fn double_sphere(p: &DyadicPiece, dd: Dimensions, x: (f64, f64, f64, f64), size: usize) -> f64 {
    let (t1, t2, r1, r2) = x;
    let pick = |n: usize| sphere_dots(n, if n == 2 { 8 * size } else { size });
    let (s1, s2) = (pick(dd.dk()), pick(dd.k));
    let mut acc = 0.0;
    for &(a, wa) in &s1 {
        let da = t1 * t1 + r1 * r1 - 2.0 * t1 * r1 * a;
        for &(b, wb) in &s2 {
            let db = t2 * t2 + r2 * r2 - 2.0 * t2 * r2 * b;
            acc += wa * wb * phi_j(p, (da + db).max(0.0).sqrt()).re;
        }
    }
    acc
}

fn c7_funk_hecke() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut worst, mut drift) = (0.0f64, 0.0f64);
    for (d, k) in [(4, 2), (5, 2)] {
        let dd = dims(d, k);
        for _ in 0..10 {
            let j = rng.random_range(1..=3u32);
            let top = 1.5 * 2f64.powi(j as i32);
            let mut c = || rng.random_range(0.0..top);
            let x = (c(), c(), c(), c());
            let p = DyadicPiece::new(d, j, 3).unwrap();
            let kv = kernel_kj(&p, dd, x.0, x.1, x.2, x.3).unwrap();
            let coarse = double_sphere(&p, dd, x, 40);
            let fine = double_sphere(&p, dd, x, 56);
            worst = worst.max((kv - fine).abs() / fine.abs());
            drift = drift.max((coarse - fine).abs() / fine.abs());
        }
    }
    (
        worst < 1e-5,
        format!(
            "max relative gap {worst:.2e} over 20 points (oracle self-convergence {drift:.1e})"
        ),
    )
}

fn c8_reconstruction() -> Outcome {
    let grid = Arc::new(RadialGrid::default());
    let dd = dims(4, 2);
    let members = [
        gaussian(dd, Arc::clone(&grid), Arc::clone(&grid)),
        BlockRadialProfile::from_real_fn(dd, Arc::clone(&grid), Arc::clone(&grid), |a, b| {
            (-(a * a + 2.0 * b * b) / 2.0).exp()
        }),
    ];
    let params = SphereKernelParams::new(4, 3).unwrap();
    let mut worst = 0.0f64;
    for f in &members {
        let tf = extend(f).unwrap();
        let mut sum = apply_t0(f, &params, 1.0 / 64.0).unwrap();
        for j in 1..=6 {
            sum = sum.add(&apply_tj(f, &DyadicPiece::new(4, j, 3).unwrap()).unwrap());
        }
        worst = worst.max(lebesgue_norm(&tf.sub(&sum), 2.0) / lebesgue_norm(&tf, 2.0));
    }
    (worst < 0.01, format!("max relative L2 error {worst:.2e}"))
}

fn c9_scaling() -> Outcome {
    let dd = dims(4, 2);
    let grid = Arc::new(RadialGrid::uniform(160.0, 20, 17).unwrap());
    let fam = TestFamily::new(FamilyKind::SphereConstant, dd).with_widths(&[1.0, 0.5]);
    let profiles: Vec<_> = make_family(&fam)
        .unwrap()
        .iter()
        .map(|m| m.profile_on(Arc::clone(&grid), Arc::clone(&grid)).unwrap())
        .collect();
    let rep = check_tj_scaling(&profiles, 1..=6, 3, default_lorentz_exponent(dd)).unwrap();
    let (a, b) = (rep.l2_spread(), rep.lorentz_spread());
    (
        a < 2.0 && b < 2.0,
        format!("spread L2 {a:.3}, Lorentz {b:.3}"),
    )
}

fn c10_plemelj() -> Outcome {
    let sym = |k: SymbolKind| SymbolModel::new(k).unwrap();
    let cases: Vec<(SymbolModel, usize, f64)> = vec![
        (SymbolModel::helmholtz(), 0, 0.6),
        (SymbolModel::helmholtz(), 0, 1.0),
        (SymbolModel::helmholtz(), 0, 1.3),
        (sym(SymbolKind::Fractional { s: 1.5 }), 0, 0.8),
        (sym(SymbolKind::Fractional { s: 1.5 }), 0, 1.2),
        (
            sym(SymbolKind::Relativistic {
                mu: 1.0,
                lambda: 2.0,
                s: 1.0,
            }),
            0,
            1.5,
        ),
        (
            sym(SymbolKind::Relativistic {
                mu: 1.0,
                lambda: 2.0,
                s: 1.0,
            }),
            0,
            2.0,
        ),
        (sym("-8 14 -7 1".parse().unwrap()), 0, 1.0),
        (sym("-8 14 -7 1".parse().unwrap()), 1, 2.0),
        (sym("-8 14 -7 1".parse().unwrap()), 2, 4.0),
    ];
    let ladder: Vec<f64> = (3..=8).map(|k| 0.5f64.powi(k)).collect();
    let mut worst = 0.0f64;
    for (s, m, c) in &cases {
        let c = *c;
        let h = move |r: f64| r * (-(r - c) * (r - c)).exp();
        let lim = plemelj_limit(s, *m, h).unwrap();
        let oracle = plemelj_eps_extrapolated(s, *m, h, &ladder).unwrap();
        worst = worst.max((lim - oracle).norm() / lim.norm());
    }
    (
        worst < 1e-4,
        format!("max relative gap {worst:.2e} over {} pairs", cases.len()),
    )
}

fn c11_imaginary_part() -> Outcome {
    let grid = Arc::new(RadialGrid::uniform(12.0, 18, 17).unwrap());
    let mut worst = 0.0f64;
    let mut used = 0;
    let mut internal = 0.0f64;
    for d in [3, 4] {
        let f = gaussian(dims(d, 2), Arc::clone(&grid), Arc::clone(&grid));
        let u = resolve(&f, &SymbolModel::helmholtz()).unwrap();
        // f̂ = e^{-|ξ|²/2} is e^{-1/2} on the sphere, so Tf = e^{-1/2} 𝒥_d(|x|)
        let tf = BlockRadialProfile::from_real_fn(
            dims(d, 2),
            Arc::clone(&grid),
            Arc::clone(&grid),
            move |a, b| (-0.5f64).exp() * sphere_kernel(d, a.hypot(b)).unwrap(),
        );
        let computed = extend(&f).unwrap();
        let top = tf.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for ((a, b), c) in u
            .profile
            .values
            .iter()
            .zip(&tf.values)
            .zip(&computed.values)
        {
            if b.norm() > 1e-3 * top {
                let want = -PI / 2.0 * b.re;
                worst = worst.max((a.im - want).abs() / want.abs());
                internal = internal.max((a.im + PI / 2.0 * c.re).abs() / want.abs());
                used += 1;
            }
        }
    }
    (
        worst < 1e-3,
        format!("max pointwise relative deviation {worst:.2e} at {used} nodes (against computed Tf {internal:.1e})"),
    )
}

fn c12_residual() -> Outcome {
    let grid = Arc::new(RadialGrid::uniform(32.0, 48, 17).unwrap());
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    for (d, k) in [(3, 1), (4, 2)] {
        let f = gaussian(dims(d, k), Arc::clone(&grid), Arc::clone(&grid));
        for (name, kind) in [
            ("r^2-1", SymbolKind::Helmholtz),
            ("r^1.5-1", SymbolKind::Fractional { s: 1.5 }),
        ] {
            let s = SymbolModel::new(kind).unwrap();
            let field = resolve(&f, &s).unwrap();
            let r = residual(&f, &s, &field).unwrap().residual;
            worst = worst.max(r);
            notes.push(format!("({d},{k}) {name} {r:.1e}"));
        }
    }
    (worst < 1e-3, notes.join(", "))
}

fn c13_phim() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let s = SymbolModel::helmholtz();
    for d in [3, 4] {
        let r = check_phim_asymptotics(&s, 0, d, 1, 20.0, 200.0).unwrap();
        let slope_ok = (r.leading_slope - r.expected_slope()).abs() <= 0.15;
        let freq_ok = (r.frequency - r.zero).abs() <= 0.01 * r.zero;
        ok &= slope_ok && freq_ok;
        notes.push(format!(
            "d{d} slope {:.3} (want {}), frequency {:.4}",
            r.leading_slope,
            r.expected_slope(),
            r.frequency
        ));
    }
    (ok, notes.join(", "))
}

fn c14_necessity() -> Outcome {
    let d = 4;
    let fam = TestFamily::new(FamilyKind::SphereConstant, dims(d, 2)).with_widths(&[0.5]);
    let f = &make_family(&fam).unwrap()[0];
    let radii = [16.0, 32.0, 64.0, 128.0];
    let mut ok = true;
    let mut notes = Vec::new();
    for q in [2.0, 2.4] {
        let t = f.extension_trajectory(2.0, q, &radii, false).unwrap();
        let want = d as f64 / q - (d as f64 - 1.0) / 2.0;
        let s = t.tail_slope();
        ok &= (s - want).abs() <= 0.15;
        notes.push(format!("q={q} slope {s:.3} (want {want:.3})"));
    }
    for q in [4.0, 6.0] {
        let t = f.extension_trajectory(2.0, q, &radii, false).unwrap();
        let v = t.last_variation();
        ok &= v < 0.1;
        notes.push(format!("q={q} variation {v:.1e}"));
    }
    (ok, notes.join(", "))
}

fn c15_riesz() -> Outcome {
    let (d, k) = (4, 2);
    let r = |n, m| Ratio::new(n, m);
    let c = riesz_corners(d, k);
    let expected = [
        (r(1, 1), r(0, 1)),
        (r(1, 1), r(3, 8)),
        (r(17, 24), r(3, 8)),
        (r(5, 8), r(7, 24)),
        (r(5, 8), r(0, 1)),
    ];
    let mut corners_ok = c
        .named()
        .iter()
        .zip(&expected)
        .all(|((_, got), want)| got == want);
    corners_ok &= region_label_exact(d, k, c.a.0, c.a.1) == Region::Inside;
    corners_ok &= c.named()[1..]
        .iter()
        .all(|(_, (x, y))| region_label_exact(d, k, *x, *y) == Region::Boundary);

    let mut points = Vec::new();
    for i in 0..=8 {
        for j in 0..=4 {
            let (x, y) = (0.5 + i as f64 / 16.0, j as f64 / 16.0);
            if region_label(d, k, x, y) == Region::Inside {
                points.push((x, y));
            }
        }
    }
    let probe = ProbeConfig {
        points,
        radii: vec![32.0, 64.0, 128.0, 256.0, 512.0],
        lorentz: false,
    };
    let mut all_bounded = true;
    let mut notes = Vec::new();
    for kind in [FamilyKind::Gaussian, FamilyKind::KnappBlock] {
        let rep = riesz_map(&TestFamily::new(kind, dims(d, k)), &probe).unwrap();
        let bad: Vec<_> = rep
            .points
            .iter()
            .filter(|p| p.trend != Trend::Bounded)
            .collect();
        all_bounded &= bad.is_empty();
        notes.push(format!(
            "{kind}: {}/{} bounded-trend",
            rep.points.len() - bad.len(),
            rep.points.len()
        ));
    }
    (
        corners_ok && all_bounded,
        format!(
            "corners {}, {}",
            if corners_ok { "exact" } else { "mismatch" },
            notes.join(", ")
        ),
    )
}

fn c16_stein_tomas() -> Outcome {
    let dd = dims(4, 2);
    let widths = [1.0 / 4.0, 1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
    let fam = TestFamily::new(FamilyKind::KnappBlock, dd).with_widths(&widths);
    let ratios: Vec<f64> = make_family(&fam)
        .unwrap()
        .iter()
        .map(|m| m.stein_tomas_ratio(dd.p_st()).ratio)
        .collect();
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let list: Vec<String> = ratios.iter().map(|r| format!("{r:.4}")).collect();
    (
        hi / lo < 2.0 && lo > 0.0,
        format!("ratios [{}], max/min {:.3}", list.join(", "), hi / lo),
    )
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let criteria: [(usize, fn() -> Outcome); 16] = [
        (1, c1_kernel_closed_form),
        (2, c2_partition),
        (3, c3_round_trip),
        (4, c4_expansion),
        (5, c5_envelope),
        (6, c6_kernel_bound),
        (7, c7_funk_hecke),
        (8, c8_reconstruction),
        (9, c9_scaling),
        (10, c10_plemelj),
        (11, c11_imaginary_part),
        (12, c12_residual),
        (13, c13_phim),
        (14, c14_necessity),
        (15, c15_riesz),
        (16, c16_stein_tomas),
    ];
    let mut unexpected = Vec::new();
    for (n, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&n)) {
            continue;
        }
        let t = Instant::now();
        let (pass, detail) = run();
        let tag = if pass { "PASS" } else { "FAIL" };
        let known = if !pass && KNOWN_FAILURES.contains(&n) {
            " [known]"
        } else {
            ""
        };
        println!(
            "criterion {n:>2} {tag}{known} {detail} ({:.1} s)",
            t.elapsed().as_secs_f64()
        );
        if !pass && !KNOWN_FAILURES.contains(&n) {
            unexpected.push(n);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
