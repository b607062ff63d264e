//! Limiting absorption for radial symbols `P(|D|)`: symbol models, Plemelj
//! limits, principal values, resolvent kernels and the outgoing solution.

use std::fmt;
use std::str::FromStr;

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::dyadic::{default_delta, make_zero_cutoffs, Interval, SmoothCutoff, ZeroCutoffs};
use crate::error::{Error, Result};
use crate::kernels::extend_restriction;
use crate::profile::{lebesgue_norm, BlockRadialProfile, RadialGrid};
use crate::quadrature::{composite_legendre, extrapolate_to_zero, uniform_breaks};
use crate::specfun::SphereKernel;
use crate::transform::{
    apply_complex_multiplier_via, apply_symbol_via, forward_transform, restrict_at_radius,
    SPHERE_NODES,
};

/// Closed-form radial symbols.
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolKind {
    /// `r² − 1`
    Helmholtz,
    /// `r^s − 1`
    Fractional { s: f64 },
    /// `(μ + r²)^{s/2} − Λ`
    Relativistic { mu: f64, lambda: f64, s: f64 },
    /// `Σ c_i r^i`, lowest degree first
    Polynomial { coeffs: Vec<f64> },
}

impl SymbolKind {
    fn eval(&self, r: f64) -> f64 {
        match self {
            SymbolKind::Helmholtz => r * r - 1.0,
            SymbolKind::Fractional { s } => r.powf(*s) - 1.0,
            SymbolKind::Relativistic { mu, lambda, s } => (mu + r * r).powf(s / 2.0) - lambda,
            SymbolKind::Polynomial { coeffs } => {
                coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c)
            }
        }
    }

    fn derivative(&self, r: f64) -> f64 {
        match self {
            SymbolKind::Helmholtz => 2.0 * r,
            SymbolKind::Fractional { s } => {
                if r == 0.0 {
                    if *s > 1.0 {
                        0.0
                    } else if *s == 1.0 {
                        1.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    s * r.powf(s - 1.0)
                }
            }
            SymbolKind::Relativistic { mu, s, .. } => s * r * (mu + r * r).powf(s / 2.0 - 1.0),
            SymbolKind::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (i, c)| acc * r + i as f64 * c),
        }
    }

    fn order(&self) -> f64 {
        match self {
            SymbolKind::Helmholtz => 2.0,
            SymbolKind::Fractional { s } | SymbolKind::Relativistic { s, .. } => *s,
            SymbolKind::Polynomial { coeffs } => (coeffs.len() - 1) as f64,
        }
    }

    fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Symbol(m));
        match self {
            SymbolKind::Helmholtz => Ok(()),
            SymbolKind::Fractional { s } if !(*s > 0.0) => {
                bad(format!("order must be positive, got {s}"))
            }
            SymbolKind::Relativistic { mu, s, .. } if !(*s > 0.0) || !(*mu >= 0.0) => {
                bad(format!("need s > 0 and mu >= 0, got s = {s}, mu = {mu}"))
            }
            SymbolKind::Polynomial { coeffs } => {
                if coeffs.len() < 2 || coeffs.iter().any(|c| !c.is_finite()) {
                    return bad("polynomial needs at least two finite coefficients".into());
                }
                if *coeffs.last().unwrap() <= 0.0 {
                    return bad("leading coefficient must be positive".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Radius beyond which `P` has no zeros.
    fn search_radius(&self) -> f64 {
        match self {
            SymbolKind::Helmholtz => 2.0,
            SymbolKind::Fractional { .. } => 2.0,
            SymbolKind::Relativistic { mu, lambda, s } => {
                (lambda.abs().powf(2.0 / s) - mu).max(0.0).sqrt() + 1.0
            }
            SymbolKind::Polynomial { coeffs } => {
                let lead = coeffs.last().unwrap();
                1.0 + coeffs[..coeffs.len() - 1]
                    .iter()
                    .map(|c| (c / lead).abs())
                    .fold(0.0, f64::max)
            }
        }
    }
}

impl fmt::Display for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolKind::Helmholtz => write!(f, "helmholtz"),
            SymbolKind::Fractional { s } => write!(f, "fractional {s}"),
            SymbolKind::Relativistic { mu, lambda, s } => {
                write!(f, "relativistic {mu} {lambda} {s}")
            }
            SymbolKind::Polynomial { coeffs } => {
                write!(f, "polynomial")?;
                for c in coeffs {
                    write!(f, " {c}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for SymbolKind {
    type Err = Error;

    /// `helmholtz`, `fractional s`, `relativistic mu Lambda s`, or
    /// `polynomial c0 c1 ...` (also a bare coefficient list).
    fn from_str(s: &str) -> Result<Self> {
        let mut words = s.split_whitespace();
        let head = words
            .next()
            .ok_or_else(|| Error::Parse("empty symbol spec".into()))?;
        let nums = |w: std::str::SplitWhitespace<'_>| -> Result<Vec<f64>> {
            w.map(|t| {
                t.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("{t}: {e}")))
            })
            .collect()
        };
        let kind = match head.to_ascii_lowercase().as_str() {
            "helmholtz" => SymbolKind::Helmholtz,
            "fractional" => match nums(words)?.as_slice() {
                [s] => SymbolKind::Fractional { s: *s },
                _ => return Err(Error::Parse("fractional takes one parameter s".into())),
            },
            "relativistic" => match nums(words)?.as_slice() {
                [mu, lambda, s] => SymbolKind::Relativistic {
                    mu: *mu,
                    lambda: *lambda,
                    s: *s,
                },
                _ => return Err(Error::Parse("relativistic takes mu Lambda s".into())),
            },
            "polynomial" | "poly" => SymbolKind::Polynomial {
                coeffs: nums(words)?,
            },
            _ => {
                let coeffs = nums(s.split_whitespace())
                    .map_err(|_| Error::Parse(format!("unknown symbol preset '{head}'")))?;
                SymbolKind::Polynomial { coeffs }
            }
        };
        kind.check()?;
        Ok(kind)
    }
}

/// Radial symbol with its located positive zeros and zero cutoffs.
#[derive(Debug, Clone)]
pub struct SymbolModel {
    kind: SymbolKind,
    zeros: Vec<f64>,
    cutoffs: Option<ZeroCutoffs>,
}

impl SymbolModel {
    /// Locate zeros by bisection and Newton refinement and attach cutoffs
    /// with the default half-width.
    pub fn new(kind: SymbolKind) -> Result<Self> {
        kind.check()?;
        if kind.eval(0.0) == 0.0 {
            return Err(Error::Symbol("P(0) must be nonzero".into()));
        }
        let zeros = locate_zeros(&kind)?;
        let mut model = Self {
            kind,
            zeros,
            cutoffs: None,
        };
        if !model.zeros.is_empty() {
            // halve the default until P' keeps one sign on every support
            let mut delta = default_delta(&model.zeros);
            let mut last = None;
            for _ in 0..30 {
                match make_zero_cutoffs(&model, delta) {
                    Ok(c) => {
                        model.cutoffs = Some(c);
                        break;
                    }
                    Err(e) => last = Some(e),
                }
                delta *= 0.5;
            }
            if model.cutoffs.is_none() {
                return Err(last.expect("at least one attempt"));
            }
        }
        Ok(model)
    }

    pub fn helmholtz() -> Self {
        Self::new(SymbolKind::Helmholtz).expect("Helmholtz symbol is valid")
    }

    /// Rebuild the zero cutoffs with half-width `delta`.
    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        if !self.zeros.is_empty() {
            self.cutoffs = Some(make_zero_cutoffs(&self, delta)?);
        }
        Ok(self)
    }

    pub fn kind(&self) -> &SymbolKind {
        &self.kind
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.kind.eval(r)
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.kind.derivative(r)
    }

    pub fn order(&self) -> f64 {
        self.kind.order()
    }

    pub fn zeros(&self) -> &[f64] {
        &self.zeros
    }

    pub fn cutoffs(&self) -> Option<&ZeroCutoffs> {
        self.cutoffs.as_ref()
    }

    pub fn delta(&self) -> Option<f64> {
        self.cutoffs.as_ref().map(|c| c.delta)
    }

    /// `χ₀(r)`, identically 1 without zeros.
    pub fn chi0(&self, r: f64) -> f64 {
        self.cutoffs.as_ref().map_or(1.0, |c| c.complement(r))
    }

    /// `χ_m(r)` (zero-based `m`).
    pub fn chi(&self, m: usize, r: f64) -> f64 {
        self.cutoffs.as_ref().map_or(0.0, |c| c.cutoffs[m].eval(r))
    }
}

fn locate_zeros(kind: &SymbolKind) -> Result<Vec<f64>> {
    let top = kind.search_radius();
    let n = 20_000;
    let mut zeros = Vec::new();
    let mut prev_x = 0.0;
    let mut prev = kind.eval(0.0);
    for i in 1..=n {
        let x = top * i as f64 / n as f64;
        let v = kind.eval(x);
        if v == 0.0 {
            zeros.push(x);
        } else if prev != 0.0 && v.signum() != prev.signum() {
            zeros.push(refine(kind, prev_x, x));
        }
        prev_x = x;
        prev = v;
    }
    zeros.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    for &z in &zeros {
        if kind.derivative(z).abs() <= 1e-8 {
            return Err(Error::Symbol(format!("zero at {z} is not simple")));
        }
    }
    // a tangential zero shows no sign change: locate critical points of P
    // between samples and test the value there
    let h = top / n as f64;
    let scale = kind.eval(0.0).abs().max(1.0);
    for i in 1..n {
        let (a, b) = ((i - 1) as f64 * h, (i + 1) as f64 * h);
        let (da, db) = (kind.derivative(a), kind.derivative(b));
        if da.is_finite() && db.is_finite() && da.signum() != db.signum() {
            let c = bisect_derivative(kind, a, b);
            if kind.eval(c).abs() < 1e-12 * scale {
                return Err(Error::Symbol(format!("zero at {c} is not simple")));
            }
        }
    }
    Ok(zeros)
}

fn bisect_derivative(kind: &SymbolKind, mut a: f64, mut b: f64) -> f64 {
    let sa = kind.derivative(a).signum();
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if kind.derivative(m).signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn refine(kind: &SymbolKind, mut a: f64, mut b: f64) -> f64 {
    let fa = kind.eval(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if b - a < 1e-15 * b.max(1.0) {
            break;
        }
        if kind.eval(m).signum() == fa.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..4 {
        let d = kind.derivative(x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let step = kind.eval(x) / d;
        if !(x - step).is_finite() || (x - step - x).abs() > (b - a).max(1e-14) * 4.0 {
            break;
        }
        x -= step;
    }
    x
}

/// Outcome of the assumption-(A) spot checks.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub zeros: Vec<f64>,
    pub derivatives_at_zeros: Vec<f64>,
    pub derivative_order: usize,
    /// Fitted log-log slope of `|d^k/dr^k (r^s/P(r))|`.
    pub decay_slope: f64,
    pub slope_threshold: f64,
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Spot-check assumption (A) in dimension `d`; `eps` is the decay margin
/// demanded beyond `−k`.
pub fn validate_symbol(symbol: &SymbolModel, d: usize, eps: f64) -> ValidationReport {
    let mut violations = Vec::new();
    if symbol.eval(0.0) == 0.0 {
        violations.push("P(0) = 0".to_string());
    }
    let derivs: Vec<f64> = symbol
        .zeros()
        .iter()
        .map(|&z| symbol.derivative(z))
        .collect();
    for (z, dp) in symbol.zeros().iter().zip(&derivs) {
        if dp.abs() <= 1e-8 {
            violations.push(format!("zero {z} is not simple (P' = {dp})"));
        }
        if symbol.eval(*z).abs() > 1e-8 {
            violations.push(format!("P({z}) = {} is not a zero", symbol.eval(*z)));
        }
    }
    if let Some(c) = symbol.cutoffs() {
        for (m, cut) in c.cutoffs.iter().enumerate() {
            if cut.support.lo <= 0.0 {
                violations.push(format!("support of cutoff {m} contains 0"));
            }
            for i in 0..=200 {
                let x = cut.support.lo + (cut.support.hi - cut.support.lo) * i as f64 / 200.0;
                if symbol.derivative(x).abs() <= 0.0 {
                    violations.push(format!("P' vanishes at {x} on cutoff {m}"));
                    break;
                }
            }
        }
    }
    let k = d / 2 + 1;
    let s = symbol.order();
    let q = |r: f64| r.powf(s) / symbol.eval(r);
    let r_lo = symbol
        .zeros()
        .last()
        .map_or(4.0, |z| 4.0 * z.max(1.0))
        .max(10.0);
    let samples = 16;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..samples {
        let r = r_lo * (1e3 / r_lo).powf(i as f64 / (samples - 1) as f64);
        let h = 0.02 * r;
        let mut acc = 0.0;
        let mut binom = 1.0;
        for j in 0..=k {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * binom * q(r + (k as f64 / 2.0 - j as f64) * h);
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
        let dk = (acc / h.powi(k as i32)).abs();
        if dk > 0.0 {
            xs.push(r.ln());
            ys.push(dk.ln());
        }
    }
    let decay_slope = if xs.len() >= 2 {
        fit_slope(&xs, &ys)
    } else {
        f64::NEG_INFINITY
    };
    let slope_threshold = -(k as f64) - eps;
    if decay_slope > slope_threshold {
        violations.push(format!(
            "derivative of order {k} of r^s/P decays with slope {decay_slope:.3} > {slope_threshold:.3}"
        ));
    }
    ValidationReport {
        zeros: symbol.zeros().to_vec(),
        derivatives_at_zeros: derivs,
        derivative_order: k,
        decay_slope,
        slope_threshold,
        violations,
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Gauss–Legendre order of the principal-value panels.
pub const PV_ORDER: usize = 20;
/// Minimum number of panels on each side of the singular point.
pub const PV_PANELS: usize = 4;
/// Largest `|z|` accepted by [`phi_m_kernel`].
pub const MAX_KERNEL_Z: f64 = 1.0e4;
/// Share of `‖f̂‖²` allowed beyond `0.8·R_max` in [`resolve`].
pub const BAND_LIMIT_TOLERANCE: f64 = 1e-8;

/// The functional `g ↦ Σ c_i g(r_i) + c₀ g(r₀)` approximating
/// `p.v.∫ g(r)/(r − r₀) dr` over a window.
#[derive(Debug, Clone)]
pub struct PvRule {
    pub r0: f64,
    pub nodes: Vec<f64>,
    pub coeffs: Vec<f64>,
    pub center: f64,
}

impl PvRule {
    /// `eta` is an even cutoff in `r − r₀` with `η(0) = 1`; `panels` is the
    /// panel count on each side of `r₀`.
    pub fn new(r0: f64, window: Interval, eta: &SmoothCutoff, panels: usize) -> Result<Self> {
        if !(window.lo < r0 && r0 < window.hi) {
            return Err(Error::Domain(format!(
                "singular point {r0} must lie inside the window [{}, {}]",
                window.lo, window.hi
            )));
        }
        if (eta.eval(0.0) - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(
                "subtraction cutoff must equal 1 at the origin".into(),
            ));
        }
        let panels = panels.max(1);
        let mut breaks = uniform_breaks(window.lo, r0, panels);
        breaks.extend(uniform_breaks(r0, window.hi, panels).into_iter().skip(1));
        let rule = composite_legendre(&breaks, PV_ORDER);
        let mut center = 0.0;
        let mut coeffs = Vec::with_capacity(rule.len());
        for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
            let c = w / (r - r0);
            coeffs.push(c);
            center -= c * eta.eval(r - r0);
        }
        // the odd part of η/ρ cancels on the symmetric piece; anything left
        // over is a regular integral
        let reach = r0 - window.lo;
        let reach_hi = window.hi - r0;
        let c = reach.min(reach_hi);
        let (lo, hi) = if reach > reach_hi {
            (window.lo, r0 - c)
        } else {
            (r0 + c, window.hi)
        };
        let leaks = eta.support.lo < -c || eta.support.hi > c;
        if leaks && hi > lo {
            log::warn!("subtraction cutoff reaches beyond the window around {r0}; adding the one-sided remainder");
            let rest = composite_legendre(&uniform_breaks(lo, hi, panels), PV_ORDER);
            center += rest.integrate(|r| eta.eval(r - r0) / (r - r0));
        }
        Ok(Self {
            r0,
            nodes: rule.nodes,
            coeffs,
            center,
        })
    }

    pub fn apply<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        let s: f64 = self
            .nodes
            .iter()
            .zip(&self.coeffs)
            .map(|(&r, c)| c * g(r))
            .sum();
        s + self.center * g(self.r0)
    }

    pub fn apply_complex<F: Fn(f64) -> Complex64>(&self, g: F) -> Complex64 {
        let s: Complex64 = self
            .nodes
            .iter()
            .zip(&self.coeffs)
            .map(|(&r, c)| g(r) * c)
            .sum();
        s + g(self.r0) * self.center
    }
}

/// `p.v.∫_window g(r)/(r − r₀) dr` by subtracting `g(r₀)η(r − r₀)`.
pub fn pv_integral<F: Fn(f64) -> f64>(
    g: F,
    r0: f64,
    window: Interval,
    eta: &SmoothCutoff,
) -> Result<f64> {
    Ok(PvRule::new(r0, window, eta, PV_PANELS)?.apply(g))
}

fn zero_data(symbol: &SymbolModel, m: usize) -> Result<(f64, f64, SmoothCutoff)> {
    let cut = symbol
        .cutoffs()
        .ok_or_else(|| Error::Domain("symbol has no zeros".into()))?;
    if m >= cut.zeros.len() {
        return Err(Error::Domain(format!(
            "zero index {m} out of range ({} zeros)",
            cut.zeros.len()
        )));
    }
    Ok((
        cut.zeros[m],
        symbol.derivative(cut.zeros[m]),
        cut.cutoffs[m],
    ))
}

fn centered(c: &SmoothCutoff, r0: f64) -> SmoothCutoff {
    SmoothCutoff {
        support: Interval::new(c.support.lo - r0, c.support.hi - r0),
        plateau: Interval::new(c.plateau.lo - r0, c.plateau.hi - r0),
    }
}

/// `g(r) = χ_m(r)(r − r_m)/P(r)`, continued by `1/P′(r_m)` at `r_m`.
fn localized_inverse(symbol: &SymbolModel, chi: &SmoothCutoff, rm: f64, dp: f64, r: f64) -> f64 {
    if r == rm {
        1.0 / dp
    } else {
        chi.eval(r) * (r - rm) / symbol.eval(r)
    }
}

fn pv_setup(
    symbol: &SymbolModel,
    m: usize,
    panels: usize,
) -> Result<(f64, f64, SmoothCutoff, PvRule)> {
    let (rm, dp, chi) = zero_data(symbol, m)?;
    let rule = PvRule::new(rm, chi.support, &centered(&chi, rm), panels)?;
    Ok((rm, dp, chi, rule))
}

/// `lim_{ε→0⁺} ∫ χ_m h/(P + iε) dr = −iπ h(r_m)/|P′(r_m)| + p.v.∫ χ_m h/P dr`.
pub fn plemelj_limit<F: Fn(f64) -> f64>(symbol: &SymbolModel, m: usize, h: F) -> Result<Complex64> {
    let (rm, dp, chi, rule) = pv_setup(symbol, m, PV_PANELS)?;
    let pv = rule.apply(|r| localized_inverse(symbol, &chi, rm, dp, r) * h(r));
    Ok(Complex64::new(pv, -PI * h(rm) / dp.abs()))
}

/// `∫ χ_m h/(P + iε) dr` with panels graded towards `r_m`.
pub fn plemelj_eps<F: Fn(f64) -> f64>(
    symbol: &SymbolModel,
    m: usize,
    h: F,
    eps: f64,
) -> Result<Complex64> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    let (rm, _, chi) = zero_data(symbol, m)?;
    let (lo, hi) = (chi.support.lo, chi.support.hi);
    let mut breaks = vec![rm];
    let mut w = eps / symbol.derivative(rm).abs();
    while rm - w > lo || rm + w < hi {
        breaks.push(rm - w);
        breaks.push(rm + w);
        w *= 2.0;
    }
    breaks.retain(|&b| b > lo && b < hi);
    breaks.push(lo);
    breaks.push(hi);
    breaks.sort_by(f64::total_cmp);
    let rule = composite_legendre(&breaks, PV_ORDER);
    Ok(rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&r, &w)| {
            Complex64::new(chi.eval(r) * h(r) * w, 0.0) / Complex64::new(symbol.eval(r), eps)
        })
        .sum())
}

/// Neville extrapolation of [`plemelj_eps`] over an ε-ladder.
pub fn plemelj_eps_extrapolated<F: Fn(f64) -> f64>(
    symbol: &SymbolModel,
    m: usize,
    h: F,
    ladder: &[f64],
) -> Result<Complex64> {
    let vals = ladder
        .iter()
        .map(|&e| plemelj_eps(symbol, m, &h, e))
        .collect::<Result<Vec<_>>>()?;
    let re: Vec<f64> = vals.iter().map(|v| v.re).collect();
    let im: Vec<f64> = vals.iter().map(|v| v.im).collect();
    Ok(Complex64::new(
        extrapolate_to_zero(ladder, &re),
        extrapolate_to_zero(ladder, &im),
    ))
}

fn oscillation_panels(width: f64, freq: f64) -> usize {
    PV_PANELS.max((freq * width / 2.0).ceil() as usize)
}

/// `Φ^m(z) = −iπ r_m^{d−1}|P′(r_m)|^{-1} 𝒥(r_m z) + p.v.∫ χ_m r^{d−1} P^{-1} 𝒥(r z) dr`.
pub fn phi_m_kernel(symbol: &SymbolModel, m: usize, d: usize, z: f64) -> Result<Complex64> {
    if !(z > 0.0) {
        return Err(Error::Domain(format!("|z| must be positive, got {z}")));
    }
    if z > MAX_KERNEL_Z {
        return Err(Error::Budget(format!("|z| = {z} exceeds {MAX_KERNEL_Z}")));
    }
    let kernel = SphereKernel::new(d)?;
    let (rm, dp, chi) = zero_data(symbol, m)?;
    let half = 0.5 * (chi.support.hi - chi.support.lo);
    let rule = PvRule::new(
        rm,
        chi.support,
        &centered(&chi, rm),
        oscillation_panels(half, z),
    )?;
    let pv = rule.apply(|r| {
        localized_inverse(symbol, &chi, rm, dp, r) * r.powi(d as i32 - 1) * kernel.eval(r * z)
    });
    let delta = -PI * rm.powi(d as i32 - 1) / dp.abs() * kernel.eval(rm * z);
    Ok(Complex64::new(pv, delta))
}

/// Frequency grid for resolvent multipliers: panels of width `fine` up to
/// just past the last zero window, then coarser ones up to `r_max`.
pub fn resolvent_frequency_grid(
    symbol: &SymbolModel,
    r_max: f64,
    fine: f64,
) -> Result<Arc<RadialGrid>> {
    let edge = symbol
        .cutoffs()
        .and_then(|c| c.cutoffs.last().map(|x| x.support.hi + 0.25))
        .unwrap_or(0.0)
        .min(r_max);
    let mut marks = Vec::new();
    if edge > 0.0 {
        marks.push((edge, fine));
    }
    marks.push((r_max, 0.5));
    Ok(Arc::new(RadialGrid::piecewise(&marks, 16)?))
}

/// `Rf = 𝓕^{-1}(χ₀ P^{-1} f̂)`.
pub fn regular_part(f: &BlockRadialProfile, symbol: &SymbolModel) -> Result<BlockRadialProfile> {
    let freq = resolvent_frequency_grid(symbol, f.r_max(), 0.1)?;
    Ok(apply_complex_multiplier_via(
        f,
        |r| Complex64::new(symbol.chi0(r) / symbol.eval(r), 0.0),
        Arc::clone(&freq),
        freq,
    ))
}

/// Share of `‖f̂‖²` carried by frequencies above `radius`.
pub fn spectral_tail(f_hat: &BlockRadialProfile, radius: f64) -> f64 {
    let meas = f_hat.cell_measures();
    let (mut tail, mut total) = (0.0, 0.0);
    for i in 0..f_hat.n1() {
        let a = f_hat.grid1.nodes()[i];
        for j in 0..f_hat.n2() {
            let b = f_hat.grid2.nodes()[j];
            let w = meas[i * f_hat.n2() + j] * f_hat.at(i, j).norm_sqr();
            total += w;
            if a.hypot(b) > radius {
                tail += w;
            }
        }
    }
    if total > 0.0 {
        tail / total
    } else {
        0.0
    }
}

/// The outgoing solution with its parts.
#[derive(Debug, Clone)]
pub struct ResolventField {
    pub profile: BlockRadialProfile,
    pub regular: BlockRadialProfile,
    pub delta_parts: Vec<BlockRadialProfile>,
    pub pv_parts: Vec<BlockRadialProfile>,
}

impl ResolventField {
    /// Largest deviation of `Rf + Σ(δ_m + pv_m)` from the stored profile.
    pub fn parts_mismatch(&self) -> f64 {
        let mut sum = self.regular.clone();
        for (a, b) in self.delta_parts.iter().zip(&self.pv_parts) {
            sum = sum.add(a).add(b);
        }
        sum.values
            .iter()
            .zip(&self.profile.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// `u_f = lim_{ε→0⁺} 𝓕^{-1}(f̂/(P + iε))` on the grids of `f`.
pub fn resolve(f: &BlockRadialProfile, symbol: &SymbolModel) -> Result<ResolventField> {
    let d = f.dims.d;
    let f_hat = forward_transform(f);
    let tail = spectral_tail(&f_hat, 0.8 * f.r_max());
    if tail > BAND_LIMIT_TOLERANCE {
        return Err(Error::Truncation(format!(
            "spectral mass share {tail:.3e} above 0.8·R_max exceeds {BAND_LIMIT_TOLERANCE:.0e}"
        )));
    }
    let regular = regular_part(f, symbol)?;
    let mut delta_parts = Vec::new();
    let mut pv_parts = Vec::new();
    for m in 0..symbol.zeros().len() {
        let (rm, dp, chi) = zero_data(symbol, m)?;
        let half = 0.5 * (chi.support.hi - chi.support.lo);
        let panels = oscillation_panels(half, f.r_max());
        let rule = PvRule::new(rm, chi.support, &centered(&chi, rm), panels)?;
        let at = |r: f64| -> Result<BlockRadialProfile> {
            let restr = restrict_at_radius(&f_hat, r, SPHERE_NODES)?;
            Ok(extend_restriction(
                &restr,
                Arc::clone(&f.grid1),
                Arc::clone(&f.grid2),
            ))
        };
        let weight = |r: f64| localized_inverse(symbol, &chi, rm, dp, r) * r.powi(d as i32 - 1);
        let e_center = at(rm)?;
        let terms = rule
            .nodes
            .par_iter()
            .zip(&rule.coeffs)
            .map(|(&r, &c)| Ok(at(r)?.scale(Complex64::new(c * weight(r), 0.0))))
            .collect::<Result<Vec<_>>>()?;
        let mut pv = e_center.scale(Complex64::new(rule.center * weight(rm), 0.0));
        for t in &terms {
            pv = pv.add(t);
        }
        let delta = e_center.scale(Complex64::new(0.0, -PI * rm.powi(d as i32 - 1) / dp.abs()));
        delta_parts.push(delta);
        pv_parts.push(pv);
    }
    let mut profile = regular.clone();
    for (a, b) in delta_parts.iter().zip(&pv_parts) {
        profile = profile.add(a).add(b);
    }
    Ok(ResolventField {
        profile,
        regular,
        delta_parts,
        pv_parts,
    })
}

/// `‖P(|D|)u_f − f‖₂/‖f‖₂` over the inner ball, with `P` applied through
/// the transform to `w·u_f` and `w` an erfc window.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResidualReport {
    pub residual: f64,
    pub inner_radius: f64,
    pub window_center: f64,
    pub window_width: f64,
}

/// Residual of `field` as a solution of `P(|D|)u = f`. `u_f` is not square
/// integrable, so it is cut off by `½ erfc((|x| − 5R/8)/(R/8))`. Nonlocal
/// symbols see the cut through the far field; this shrinks as `R` grows.
pub fn residual(
    f: &BlockRadialProfile,
    symbol: &SymbolModel,
    field: &ResolventField,
) -> Result<ResidualReport> {
    let r_max = f.r_max();
    let (inner, center, width) = (r_max / 6.0, 0.625 * r_max, r_max / 8.0);
    let edge = symbol.zeros().last().copied().unwrap_or(0.0);
    let freq = resolvent_frequency_grid(symbol, (edge + 4.0).max(8.0).min(r_max), 0.05)?;
    let wu = field
        .profile
        .map(|a, b, v| v * (0.5 * erfc((a.hypot(b) - center) / width)));
    let pw = apply_symbol_via(&wu, symbol, Arc::clone(&freq), freq);
    let ball = |x: &BlockRadialProfile| {
        x.map(|a, b, v| {
            if a.hypot(b) <= inner {
                v
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    };
    let residual = lebesgue_norm(&ball(&pw.sub(f)), 2.0) / lebesgue_norm(&ball(f), 2.0);
    Ok(ResidualReport {
        residual,
        inner_radius: inner,
        window_center: center,
        window_width: width,
    })
}

/// `𝓕^{-1}(f̂/(P + iε))` with the frequency grid refined to the width `ε`.
pub fn eps_resolvent(
    f: &BlockRadialProfile,
    symbol: &SymbolModel,
    eps: f64,
) -> Result<BlockRadialProfile> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    let fine = (2.0 * eps).min(0.1);
    let freq = resolvent_frequency_grid(symbol, f.r_max(), fine)?;
    Ok(apply_complex_multiplier_via(
        f,
        |r| Complex64::new(1.0, 0.0) / Complex64::new(symbol.eval(r), eps),
        Arc::clone(&freq),
        freq,
    ))
}

/// Slopes and frequency of `Φ^m` over a range of `|z|`.
#[derive(Debug, Clone, Serialize)]
pub struct SlopeReport {
    pub d: usize,
    pub zero: f64,
    pub terms: usize,
    pub z_lo: f64,
    pub z_hi: f64,
    pub leading_slope: f64,
    pub residual_slope: f64,
    pub frequency: f64,
}

impl SlopeReport {
    pub fn expected_slope(&self) -> f64 {
        (1.0 - self.d as f64) / 2.0
    }
}

fn envelope_slope(z: &[f64], mags: &[f64], period: f64) -> f64 {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut start = 0;
    while start < z.len() {
        let mut end = start;
        while end < z.len() && z[end] < z[start] + period {
            end += 1;
        }
        if end == z.len() && z[end - 1] - z[start] < 0.9 * period {
            break;
        }
        let (k, v) = (start..end)
            .map(|i| (i, mags[i]))
            .fold((start, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        if v > 0.0 {
            xs.push(z[k].ln());
            ys.push(v.ln());
        }
        start = end;
    }
    fit_slope(&xs, &ys)
}

/// Fit `Φ^m(z) ≈ Σ_{l≤L} z^{(1−d)/2−l}(α_l e^{i r_m z} + β_l e^{−i r_m z})` on
/// `[z_lo, z_hi]` and report the envelope slopes of `Φ^m` and of what is left
/// after removing the orders `l < L`.
pub fn check_phim_asymptotics(
    symbol: &SymbolModel,
    m: usize,
    d: usize,
    terms: usize,
    z_lo: f64,
    z_hi: f64,
) -> Result<SlopeReport> {
    if !(20.0 <= z_lo && z_lo < z_hi && z_hi <= 500.0) {
        return Err(Error::Domain(format!(
            "z range [{z_lo}, {z_hi}] must lie in [20, 500]"
        )));
    }
    let terms = terms.max(1);
    let (rm, _, _) = zero_data(symbol, m)?;
    let period = 2.0 * PI / rm;
    let n = ((z_hi - z_lo) / period * 48.0).ceil() as usize + 1;
    let z: Vec<f64> = (0..n)
        .map(|i| z_lo + (z_hi - z_lo) * i as f64 / (n - 1) as f64)
        .collect();
    let phi = z
        .par_iter()
        .map(|&x| phi_m_kernel(symbol, m, d, x))
        .collect::<Result<Vec<_>>>()?;
    let lead = (1.0 - d as f64) / 2.0;
    let basis = |x: f64, c: usize| {
        let l = (c / 2) as i32;
        let s = if c % 2 == 0 { 1.0 } else { -1.0 };
        Complex64::from_polar(x.powf(lead - l as f64), s * rm * x)
    };
    // one order beyond `terms` is fitted so that the kept coefficients are
    // not biased by the next term; only the first `terms` orders are removed
    let cols = 2 * (terms + 1);
    // rescale rows so that each sample carries the same relative weight
    let a = DMatrix::from_fn(n, cols, |i, c| basis(z[i], c) * z[i].powf(-lead));
    let b = DMatrix::from_fn(n, 1, |i, _| phi[i] * z[i].powf(-lead));
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Convergence(format!("least-squares fit failed: {e}")))?;
    let residual: Vec<f64> = (0..n)
        .map(|i| {
            let fit: Complex64 = (0..2 * terms).map(|c| basis(z[i], c) * coef[(c, 0)]).sum();
            (phi[i] - fit).norm()
        })
        .collect();
    let mags: Vec<f64> = phi.iter().map(|v| v.norm()).collect();
    let leading_slope = envelope_slope(&z, &mags, period);
    let residual_slope = envelope_slope(&z, &residual, period);
    // zero crossings of Im Φ^m, which is proportional to 𝒥(r_m z)
    let mut crossings = Vec::new();
    for i in 1..n {
        let (p, q) = (phi[i - 1].im, phi[i].im);
        if p == 0.0 || p.signum() != q.signum() {
            crossings.push(z[i - 1] + (z[i] - z[i - 1]) * p / (p - q));
        }
    }
    let frequency = if crossings.len() >= 2 {
        let span = crossings[crossings.len() - 1] - crossings[0];
        PI * (crossings.len() - 1) as f64 / span
    } else {
        f64::NAN
    };
    Ok(SlopeReport {
        d,
        zero: rm,
        terms,
        z_lo,
        z_hi,
        leading_slope,
        residual_slope,
        frequency,
    })
}
