//! Two-dimensional oscillatory integrals
//! `I = ∫∫ (1-s₁²)^α₁ (1-s₂²)^α₂ m(s) χ(Ψ(s)) e^{iλΨ(s)} ds` with
//! `Ψ(s) = sqrt(A - B₁s₁ - B₂s₂)`, and checks of their decay envelope.
//!
//! Two evaluation paths exist. The tensor path integrates over the square
//! with Gauss–Jacobi end panels and inner panels restricted to the band
//! `Ψ ∈ supp χ`. When the amplitude is constant the integrand depends on `s`
//! only through `X = B₁s₁ + B₂s₂`, and the integral collapses to a 1D
//! oscillatory integral against the density of `X`; that path is used for
//! large `λ·B`.

use std::io::Write;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::{Interval, SmoothCutoff};
use crate::quadrature::{gauss_jacobi, gauss_legendre};
use crate::specfun::gamma;
use crate::{Error, Result};

/// Largest admissible `|λ|`.
pub const LAMBDA_BUDGET: f64 = 4096.0;
/// Relative change under panel doubling that is reported as non-convergence.
pub const DOUBLING_TOLERANCE: f64 = 1e-4;
/// Absolute resolution of `I_λ` relative to the weight mass `∫∫ w₁w₂`.
pub const ABSOLUTE_FLOOR: f64 = 1e-10;
/// Calibration subset `|λ| ≤ 8` for the fitted constant.
pub const CALIBRATION_LAMBDA: f64 = 8.0;

const ORDER: usize = 16;

/// Smooth amplitude on `[-1, 1]²`.
#[derive(Clone, Default)]
pub enum Amplitude {
    #[default]
    One,
    General(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl Amplitude {
    pub fn eval(&self, s1: f64, s2: f64) -> f64 {
        match self {
            Amplitude::One => 1.0,
            Amplitude::General(f) => f(s1, s2),
        }
    }
}

impl std::fmt::Debug for Amplitude {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Amplitude::One => write!(f, "One"),
            Amplitude::General(_) => write!(f, "General(..)"),
        }
    }
}

/// One member of the class of oscillatory integrals.
#[derive(Debug, Clone)]
pub struct OscIntegralSpec {
    pub alpha1: f64,
    pub alpha2: f64,
    pub a: f64,
    pub b1: f64,
    pub b2: f64,
    pub lambda: f64,
    pub amplitude: Amplitude,
    pub cutoff: SmoothCutoff,
}

/// Cutoff with support `[1/2, 2]`, equal to 1 only at `1`.
pub fn default_cutoff() -> SmoothCutoff {
    SmoothCutoff {
        support: Interval::new(0.5, 2.0),
        plateau: Interval::new(1.0, 1.0),
    }
}

impl OscIntegralSpec {
    pub fn new(alpha1: f64, alpha2: f64, a: f64, b1: f64, b2: f64, lambda: f64) -> Result<Self> {
        let spec = OscIntegralSpec {
            alpha1,
            alpha2,
            a,
            b1,
            b2,
            lambda,
            amplitude: Amplitude::One,
            cutoff: default_cutoff(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_amplitude(mut self, m: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.amplitude = Amplitude::General(Arc::new(m));
        self
    }

    pub fn with_cutoff(mut self, cutoff: SmoothCutoff) -> Result<Self> {
        self.cutoff = cutoff;
        self.validate()?;
        Ok(self)
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        let mut s = self.clone();
        s.lambda = lambda;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha1 > -1.0 && self.alpha2 > -1.0) {
            return Err(Error::Domain(format!(
                "exponents must exceed -1, got ({}, {})",
                self.alpha1, self.alpha2
            )));
        }
        if self.b1 == 0.0 || self.b2 == 0.0 || !self.a.is_finite() {
            return Err(Error::Domain(
                "A, B1, B2 must be finite and B1, B2 nonzero".into(),
            ));
        }
        if self.b1.abs() + self.b2.abs() > self.a * (1.0 + 1e-14) {
            return Err(Error::Domain(format!(
                "|B1| + |B2| = {} exceeds A = {}",
                self.b1.abs() + self.b2.abs(),
                self.a
            )));
        }
        if !(self.lambda.abs() >= 1.0) {
            return Err(Error::Domain(format!(
                "|lambda| must be >= 1, got {}",
                self.lambda
            )));
        }
        let sup = self.cutoff.support;
        if sup.lo < 0.5 || sup.hi > 2.0 {
            return Err(Error::Domain(format!(
                "cutoff support [{}, {}] is not inside [1/2, 2]",
                sup.lo, sup.hi
            )));
        }
        Ok(())
    }

    pub fn phase(&self) -> Phase {
        Phase {
            a: self.a,
            b1: self.b1,
            b2: self.b2,
        }
    }

    pub fn psi(&self, s1: f64, s2: f64) -> f64 {
        self.phase().psi(s1, s2)
    }
}

/// `Ψ(s) = sqrt(A - B₁s₁ - B₂s₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    pub a: f64,
    pub b1: f64,
    pub b2: f64,
}

impl Phase {
    pub fn psi(&self, s1: f64, s2: f64) -> f64 {
        (self.a - self.b1 * s1 - self.b2 * s2).max(0.0).sqrt()
    }

    /// `∂ᵢΨ = -Bᵢ / (2Ψ)`.
    pub fn gradient(&self, s1: f64, s2: f64) -> (f64, f64) {
        let p = self.psi(s1, s2);
        (-self.b1 / (2.0 * p), -self.b2 / (2.0 * p))
    }

    /// Range of `Ψ` over the square.
    pub fn range(&self) -> (f64, f64) {
        let s = self.b1.abs() + self.b2.abs();
        ((self.a - s).max(0.0).sqrt(), (self.a + s).max(0.0).sqrt())
    }
}

// x^a for the exponents that occur most often.
fn pw(x: f64, a: f64) -> f64 {
    if a == 0.0 {
        1.0
    } else if a == -0.5 {
        1.0 / x.sqrt()
    } else if a == 0.5 {
        x.sqrt()
    } else if a == 1.5 {
        x * x.sqrt()
    } else if a == 1.0 {
        x
    } else {
        x.powf(a)
    }
}

/// `∫_{-1}^{1} (1-s²)^α ds`.
pub fn beta_weight(alpha: f64) -> f64 {
    2f64.powf(2.0 * alpha + 1.0) * gamma(alpha + 1.0).powi(2) / gamma(2.0 * alpha + 2.0)
}

/// Values `s ∈ [-1, 1]` with `c - b·s ∈ [lo, hi]`, if any.
fn affine_preimage(c: f64, b: f64, lo: f64, hi: f64) -> Option<(f64, f64)> {
    if b == 0.0 {
        return (lo <= c && c <= hi).then_some((-1.0, 1.0));
    }
    let (p, q) = ((c - hi) / b, (c - lo) / b);
    let (p, q) = if p <= q { (p, q) } else { (q, p) };
    let (l, u) = (p.max(-1.0), q.min(1.0));
    (l < u).then_some((l, u))
}

/// Rule for `∫ (1-s²)^α g(s) ds` over consecutive breaks inside `[-1, 1]`.
/// A panel touching `±1` uses Gauss–Jacobi for the endpoint factor.
fn weighted_rule(alpha: f64, breaks: &[f64], out: &mut Vec<(f64, f64)>) {
    out.clear();
    let gl = gauss_legendre(ORDER);
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b <= a {
            continue;
        }
        let half = 0.5 * (b - a);
        if a == -1.0 && alpha != 0.0 {
            let gj = gauss_jacobi(ORDER, 0.0, alpha);
            for (&t, &w) in gj.nodes.iter().zip(&gj.weights) {
                let s = a + half * (t + 1.0);
                out.push((s, w * half.powf(alpha + 1.0) * pw(1.0 - s, alpha)));
            }
        } else if b == 1.0 && alpha != 0.0 {
            let gj = gauss_jacobi(ORDER, alpha, 0.0);
            for (&t, &w) in gj.nodes.iter().zip(&gj.weights) {
                let s = b - half * (1.0 - t);
                out.push((s, w * half.powf(alpha + 1.0) * pw(1.0 + s, alpha)));
            }
        } else {
            for (&t, &w) in gl.nodes.iter().zip(&gl.weights) {
                let s = a + half * (t + 1.0);
                out.push((s, w * half * pw((1.0 - s) * (1.0 + s), alpha)));
            }
        }
    }
}

fn panel_count(scale: f64, lambda: f64, dpsi: f64) -> usize {
    (scale * (2.0 + lambda.abs() * dpsi / 3.0 + 8.0 * dpsi)).ceil() as usize
}

/// Inner integral `∫ (1-s₂²)^α₂ f(s₂, Ψ) e^{iλΨ} ds₂` at fixed `c = A - B₁s₁`,
/// restricted to `Ψ ∈ [psi_lo, psi_hi]`.
#[allow(clippy::too_many_arguments)]
fn inner_integral(
    alpha2: f64,
    c: f64,
    b2: f64,
    lambda: f64,
    band: (f64, f64),
    scale: f64,
    f: &dyn Fn(f64, f64) -> Complex64,
    buf: &mut Vec<(f64, f64)>,
) -> Complex64 {
    let Some((l, u)) = affine_preimage(c, b2, band.0 * band.0, band.1 * band.1) else {
        return Complex64::new(0.0, 0.0);
    };
    let breaks: Vec<f64> = if b2 == 0.0 {
        vec![-1.0, 0.0, 1.0]
    } else {
        let psi = |s: f64| (c - b2 * s).max(0.0).sqrt();
        let (pl, pu) = (psi(l), psi(u));
        let n = panel_count(scale, lambda, (pl - pu).abs());
        let mut br: Vec<f64> = (0..=n)
            .map(|i| {
                let p = pl + (pu - pl) * i as f64 / n as f64;
                (c - p * p) / b2
            })
            .collect();
        br[0] = l;
        br[n] = u;
        br.sort_by(f64::total_cmp);
        br
    };
    weighted_rule(alpha2, &breaks, buf);
    let mut acc = Complex64::new(0.0, 0.0);
    for &(s2, w) in buf.iter() {
        let p = (c - b2 * s2).max(0.0).sqrt();
        acc += w * f(s2, p) * Complex64::cis(lambda * p);
    }
    acc
}

/// Tensor quadrature of `∫∫ (1-s₁²)^α₁ (1-s₂²)^α₂ f(s₁, s₂, Ψ) e^{iλΨ} ds`,
/// where `f` is assumed to vanish unless `Ψ ∈ [1/2, 2]`.
pub fn tensor_integral(
    alpha1: f64,
    alpha2: f64,
    phase: Phase,
    lambda: f64,
    scale: f64,
    f: &(dyn Fn(f64, f64, f64) -> Complex64 + Sync),
) -> Complex64 {
    let band = (0.5, 2.0);
    let Phase { a, b1, b2 } = phase;
    let (lo, hi) = (band.0 * band.0 - b2.abs(), band.1 * band.1 + b2.abs());
    let Some((l1, u1)) = affine_preimage(a, b1, lo, hi) else {
        return Complex64::new(0.0, 0.0);
    };
    let n1 = (scale * (2.0 + (lambda.abs() / 3.0 + 8.0) * b1.abs() * (u1 - l1))).ceil() as usize;
    let step = (u1 - l1) / n1 as f64;
    let mut breaks: Vec<f64> = (0..=n1).map(|i| l1 + step * i as f64).collect();
    breaks[n1] = u1;
    let mut outer = Vec::new();
    weighted_rule(alpha1, &breaks, &mut outer);
    outer
        .par_iter()
        .map_init(Vec::new, |buf, &(s1, w1)| {
            let c = a - b1 * s1;
            let g = |s2: f64, p: f64| f(s1, s2, p);
            w1 * inner_integral(alpha2, c, b2, lambda, band, scale, &g, buf)
        })
        .sum()
}

// Tanh-sinh nodes on [-1, 1] as (1 + x, 1 - x, weight), accurate near both ends.
fn tanh_sinh() -> &'static [(f64, f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| {
        let h = 1.0 / 16.0;
        let half_pi = std::f64::consts::FRAC_PI_2;
        let mut v = Vec::new();
        let kmax = (3.4 / h) as i64;
        for k in -kmax..=kmax {
            let t = k as f64 * h;
            let u = half_pi * t.sinh();
            let ch = u.abs().cosh();
            // 1 - tanh|u| without cancellation
            let comp = 2.0 / ((2.0 * u.abs()).exp() + 1.0);
            let (lower, upper) = if u < 0.0 {
                (comp, 2.0 - comp)
            } else {
                (2.0 - comp, comp)
            };
            let w = h * half_pi * t.cosh() / (ch * ch);
            if w > 0.0 && comp > 0.0 {
                v.push((lower, upper, w));
            }
        }
        v
    })
}

/// Density of `X = B₁s₁ + B₂s₂` under the weight `(1-s₁²)^α₁ (1-s₂²)^α₂`.
#[derive(Debug, Clone, Copy)]
pub struct ProjectedDensity {
    alpha1: f64,
    alpha2: f64,
    b1: f64,
    b2: f64,
}

impl ProjectedDensity {
    /// Stores `|B|` sorted so that `b1 ≤ b2`; the weights are even.
    pub fn new(alpha1: f64, alpha2: f64, b1: f64, b2: f64) -> Self {
        let (b1, b2) = (b1.abs(), b2.abs());
        if b1 <= b2 {
            ProjectedDensity {
                alpha1,
                alpha2,
                b1,
                b2,
            }
        } else {
            ProjectedDensity {
                alpha1: alpha2,
                alpha2: alpha1,
                b1: b2,
                b2: b1,
            }
        }
    }

    /// Points where the density is not smooth, `±(B₂ ± B₁)`.
    pub fn kinks(&self) -> [f64; 4] {
        let (s, d) = (self.b1 + self.b2, self.b2 - self.b1);
        [-s, -d, d, s]
    }

    pub fn eval(&self, x: f64) -> f64 {
        let ProjectedDensity {
            alpha1,
            alpha2,
            b1,
            b2,
        } = *self;
        if b2 == 0.0 || x.abs() >= b1 + b2 {
            return 0.0;
        }
        if b1 == 0.0 {
            let t = x / b2;
            return beta_weight(alpha1) * pw((1.0 - t) * (1.0 + t), alpha2) / b2;
        }
        let (z3, z4) = ((x - b2) / b1, (x + b2) / b1);
        let (l, u) = (z3.max(-1.0), z4.min(1.0));
        if u <= l {
            return 0.0;
        }
        let half = 0.5 * (u - l);
        let r = b1 / b2;
        let (gl1, gl3) = (l + 1.0, l - z3);
        let (gu1, gu4) = (1.0 - u, z4 - u);
        let mut acc = 0.0;
        for &(lower, upper, w) in tanh_sinh() {
            let (dl, du) = (half * lower, half * upper);
            let f12 = (gu1 + du) * (gl1 + dl);
            let f34 = r * r * (gl3 + dl) * (gu4 + du);
            acc += w * pw(f12, alpha1) * pw(f34, alpha2);
        }
        acc * half / b2
    }
}

/// Breaks on `[p, q]` graded geometrically toward the ends flagged singular.
fn graded_breaks(base: &[f64], sing_lo: bool, sing_hi: bool) -> Vec<f64> {
    const LEVELS: i32 = 18;
    const RATIO: f64 = 0.25;
    let n = base.len() - 1;
    let mut out = Vec::with_capacity(base.len() + 2 * LEVELS as usize);
    out.push(base[0]);
    if sing_lo {
        let (e, h) = (base[0], base[1] - base[0]);
        for k in (1..=LEVELS).rev() {
            out.push(e + h * RATIO.powi(k));
        }
    }
    out.extend_from_slice(&base[1..n]);
    if sing_hi {
        let (e, h) = (base[n], base[n] - base[n - 1]);
        for k in 1..=LEVELS {
            out.push(e - h * RATIO.powi(k));
        }
    }
    out.push(base[n]);
    out
}

/// `∫∫ w₁w₂ h(Ψ) ds` for an amplitude depending on `s` only through `Ψ`.
///
/// `h` must vanish for `Ψ ∉ [band.0, band.1]`; `lambda` only sizes panels.
pub fn psi_integral(
    alpha1: f64,
    alpha2: f64,
    phase: Phase,
    band: (f64, f64),
    lambda: f64,
    scale: f64,
    h: &(dyn Fn(f64) -> Complex64 + Sync),
) -> Complex64 {
    let Phase { a, b1, b2 } = phase;
    if b1 == 0.0 && b2 == 0.0 {
        let p = a.max(0.0).sqrt();
        return beta_weight(alpha1) * beta_weight(alpha2) * h(p);
    }
    let dens = ProjectedDensity::new(alpha1, alpha2, b1, b2);
    let s = b1.abs() + b2.abs();
    let (x_lo, x_hi) = ((-s).max(a - band.1 * band.1), s.min(a - band.0 * band.0));
    if x_lo >= x_hi {
        return Complex64::new(0.0, 0.0);
    }
    let kinks = dens.kinks();
    let mut cuts = vec![x_lo, x_hi];
    cuts.extend(kinks.iter().copied().filter(|&k| k > x_lo && k < x_hi));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let is_kink = |x: f64| kinks.iter().any(|&k| k == x);
    let psi = |x: f64| (a - x).max(0.0).sqrt();
    let mut nodes = Vec::new();
    let gl = gauss_legendre(ORDER);
    for seg in cuts.windows(2) {
        let (p, q) = (seg[0], seg[1]);
        let (pp, pq) = (psi(p), psi(q));
        let n = panel_count(scale, lambda, pp - pq).max(2);
        let mut base: Vec<f64> = (0..=n)
            .map(|i| {
                let y = pp + (pq - pp) * i as f64 / n as f64;
                a - y * y
            })
            .collect();
        base[0] = p;
        base[n] = q;
        let br = graded_breaks(&base, is_kink(p), is_kink(q));
        for pair in br.windows(2) {
            let half = 0.5 * (pair[1] - pair[0]);
            for (&t, &w) in gl.nodes.iter().zip(&gl.weights) {
                nodes.push((pair[0] + half * (t + 1.0), w * half));
            }
        }
    }
    nodes
        .par_iter()
        .map(|&(x, w)| w * dens.eval(x) * h(psi(x)))
        .sum()
}

fn relative_gap(coarse: Complex64, fine: Complex64, floor: f64) -> f64 {
    (coarse - fine).norm() / fine.norm().max(floor)
}

fn check_budget(lambda: f64) -> Result<()> {
    if lambda.abs() > LAMBDA_BUDGET {
        return Err(Error::Budget(format!(
            "|lambda| = {} exceeds the resolution budget {}",
            lambda.abs(),
            LAMBDA_BUDGET
        )));
    }
    Ok(())
}

fn evaluate_at(spec: &OscIntegralSpec, scale: f64, force_tensor: bool) -> Complex64 {
    let chi = spec.cutoff;
    let lambda = spec.lambda;
    match (&spec.amplitude, force_tensor) {
        (Amplitude::One, false) => {
            let band = (chi.support.lo, chi.support.hi);
            psi_integral(
                spec.alpha1,
                spec.alpha2,
                spec.phase(),
                band,
                lambda,
                scale,
                &|p| chi.eval(p) * Complex64::cis(lambda * p),
            )
        }
        (m, _) => tensor_integral(
            spec.alpha1,
            spec.alpha2,
            spec.phase(),
            lambda,
            scale,
            &|s1, s2, p| Complex64::new(m.eval(s1, s2) * chi.eval(p), 0.0),
        ),
    }
}

fn validated(spec: &OscIntegralSpec, force_tensor: bool) -> Result<Complex64> {
    spec.validate()?;
    check_budget(spec.lambda)?;
    let coarse = evaluate_at(spec, 1.0, force_tensor);
    let fine = evaluate_at(spec, 2.0, force_tensor);
    let floor = ABSOLUTE_FLOOR * beta_weight(spec.alpha1) * beta_weight(spec.alpha2);
    let gap = relative_gap(coarse, fine, floor);
    if gap > DOUBLING_TOLERANCE {
        return Err(Error::Convergence(format!(
            "panel doubling changed I by {gap:.2e} (relative) at lambda = {}",
            spec.lambda
        )));
    }
    Ok(fine)
}

/// Evaluates `I_λ`, validated by panel doubling.
pub fn eval_osc_integral(spec: &OscIntegralSpec) -> Result<Complex64> {
    validated(spec, false)
}

/// Same integral through the tensor path regardless of the amplitude.
pub fn eval_osc_integral_tensor(spec: &OscIntegralSpec) -> Result<Complex64> {
    validated(spec, true)
}

/// `min{1, |λB₁|^{-1-α₁}} · min{1, |λB₂|^{-1-α₂}}`.
pub fn envelope(spec: &OscIntegralSpec) -> f64 {
    let f = |b: f64, al: f64| (spec.lambda * b).abs().powf(-1.0 - al).min(1.0);
    f(spec.b1, spec.alpha1) * f(spec.b2, spec.alpha2)
}

/// `ζ` for one coordinate.
pub fn zeta(alpha: f64, b: f64, lambda: f64) -> f64 {
    if alpha > 0.0 {
        b.abs().powf(-alpha - 1.0).min(1.0)
    } else {
        (lambda * b).abs().powf(-alpha - 1.0).min(1.0)
    }
}

/// One row of an envelope report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub alpha1: f64,
    pub alpha2: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B1")]
    pub b1: f64,
    #[serde(rename = "B2")]
    pub b2: f64,
    pub lambda: f64,
    #[serde(rename = "abs_I")]
    pub abs_i: f64,
    pub envelope: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct EnvelopeReport {
    pub rows: Vec<EnvelopeRow>,
    /// Max ratio over the calibration subset `|λ| ≤ 8`.
    pub c_star: f64,
    /// Max of `ratio / C*` over all specs (at least 1 when calibrated specs exist).
    pub exceedance: f64,
    pub calibration_count: usize,
}

impl EnvelopeReport {
    pub fn passes(&self, gate: f64) -> bool {
        self.exceedance <= gate
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_to(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Evaluates every spec and fits `C*` on the low-λ subset.
pub fn check_envelope(sweep: &[OscIntegralSpec]) -> Result<EnvelopeReport> {
    if sweep.is_empty() {
        return Err(Error::Domain("empty sweep".into()));
    }
    let rows = sweep
        .par_iter()
        .map(|spec| {
            let value = eval_osc_integral(spec)?;
            let env = envelope(spec);
            Ok(EnvelopeRow {
                alpha1: spec.alpha1,
                alpha2: spec.alpha2,
                a: spec.a,
                b1: spec.b1,
                b2: spec.b2,
                lambda: spec.lambda,
                abs_i: value.norm(),
                envelope: env,
                ratio: value.norm() / env,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let calib: Vec<f64> = rows
        .iter()
        .filter(|r| r.lambda.abs() <= CALIBRATION_LAMBDA)
        .map(|r| r.ratio)
        .collect();
    let c_star = calib.iter().copied().fold(0.0, f64::max);
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let exceedance = if c_star > 0.0 {
        max_ratio / c_star
    } else if max_ratio > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };
    Ok(EnvelopeReport {
        rows,
        c_star,
        exceedance,
        calibration_count: calib.len(),
    })
}

/// Inner integral at fixed `s₁` and its bound `ζ₂`.
pub fn inner_1d_bound_check(spec: &OscIntegralSpec, s1: f64) -> Result<(Complex64, f64)> {
    spec.validate()?;
    check_budget(spec.lambda)?;
    if !(-1.0..=1.0).contains(&s1) {
        return Err(Error::Domain(format!("s1 = {s1} outside [-1, 1]")));
    }
    let chi = spec.cutoff;
    let m = &spec.amplitude;
    let c = spec.a - spec.b1 * s1;
    let g = |s2: f64, p: f64| Complex64::new(m.eval(s1, s2) * chi.eval(p), 0.0);
    let mut buf = Vec::new();
    let band = (chi.support.lo, chi.support.hi);
    let run = |scale: f64, buf: &mut Vec<(f64, f64)>| {
        inner_integral(spec.alpha2, c, spec.b2, spec.lambda, band, scale, &g, buf)
    };
    let coarse = run(1.0, &mut buf);
    let fine = run(2.0, &mut buf);
    if relative_gap(coarse, fine, ABSOLUTE_FLOOR * beta_weight(spec.alpha2)) > DOUBLING_TOLERANCE {
        return Err(Error::Convergence("inner integral did not converge".into()));
    }
    Ok((fine, zeta(spec.alpha2, spec.b2, spec.lambda)))
}

/// `∫∫ w₁w₂ 1_{Ψ ≤ 2} ds` and the bound `min{1,|B₁|^{-α₁-1}}·min{1,|B₂|^{-α₂-1}}`.
pub fn indicator_integral(
    alpha1: f64,
    alpha2: f64,
    a: f64,
    b1: f64,
    b2: f64,
) -> Result<(f64, f64)> {
    if !(alpha1 > -1.0 && alpha2 > -1.0) || b1.abs() + b2.abs() > a * (1.0 + 1e-14) {
        return Err(Error::Domain("invalid indicator parameters".into()));
    }
    let bound = b1.abs().powf(-alpha1 - 1.0).min(1.0) * b2.abs().powf(-alpha2 - 1.0).min(1.0);
    let value = psi_integral(
        alpha1,
        alpha2,
        Phase { a, b1, b2 },
        (0.0, 2.0),
        0.0,
        1.0,
        &|_| Complex64::new(1.0, 0.0),
    );
    Ok((value.re, bound))
}

/// Sweep definition: exponent pairs, a λ ladder and a grid of `(B₁, B₂)` magnitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub alphas: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub b_grid: Vec<f64>,
    /// `A - |B₁| - |B₂|`, cycled over the `(B₁, B₂)` pairs.
    pub a_offsets: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            alphas: vec![-0.5, 0.0, 0.5, 1.5],
            lambdas: (0..=10).map(|k| 2f64.powi(k)).collect(),
            b_grid: vec![1.0 / 64.0, 1.0 / 8.0, 0.5, 1.0, 2.0],
            a_offsets: vec![0.3, 1.0, 2.5],
        }
    }
}

impl SweepConfig {
    /// All specs for one exponent pair; signs of `B` alternate over the pairs.
    pub fn specs(&self, alpha1: f64, alpha2: f64) -> Result<Vec<OscIntegralSpec>> {
        let mut out = Vec::new();
        let mut idx = 0usize;
        for &b1 in &self.b_grid {
            for &b2 in &self.b_grid {
                let off = self.a_offsets[idx % self.a_offsets.len().max(1)];
                let sign = if idx % 2 == 0 { 1.0 } else { -1.0 };
                let a = b1 + b2 + off;
                for &lambda in &self.lambdas {
                    out.push(OscIntegralSpec::new(
                        alpha1,
                        alpha2,
                        a,
                        b1,
                        sign * b2,
                        lambda,
                    )?);
                }
                idx += 1;
            }
        }
        Ok(out)
    }

    pub fn pairs(&self) -> Vec<(f64, f64)> {
        let mut v = Vec::new();
        for &a1 in &self.alphas {
            for &a2 in &self.alphas {
                v.push((a1, a2));
            }
        }
        v
    }
}
