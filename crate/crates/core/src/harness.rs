//! Test-function families, Riesz-diagram probes and Stein–Tomas ratios.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::{make_bump, Interval, SmoothCutoff};
use crate::kernels::extend_restriction;
use crate::lap::{resolve, SymbolModel};
use crate::profile::{
    block_measures, lorentz_from_samples, BlockRadialProfile, Dimensions, LorentzSpec, RadialGrid,
};
use crate::quadrature::{composite_legendre, uniform_breaks};
use crate::transform::{
    forward_transform, hankel_matrix, restrict_at_radius, sphere_l2, transform_to,
    SphereRestriction, SPHERE_NODES,
};
use crate::{Error, Result};

/// Largest number of samples a test function is materialized on.
pub const MATERIALIZE_BUDGET: usize = 4_000_000;
/// Smallest Knapp width accepted.
pub const MIN_KNAPP_WIDTH: f64 = 1.0 / 128.0;
/// Spatial extent of a Knapp function in units of its dual widths.
pub const KNAPP_EXTENT: f64 = 12.0;
/// Most `(1/p, 1/q)` points one Riesz probe may evaluate.
pub const MAX_PROBE_POINTS: usize = 200;

const ORDER: usize = 17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Gaussian,
    SphereConstant,
    KnappBlock,
    RandomBandlimited,
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "gaussian" => Ok(Self::Gaussian),
            "sphere_constant" | "sphere" => Ok(Self::SphereConstant),
            "knapp_block" | "knapp" => Ok(Self::KnappBlock),
            "random_bandlimited" | "random" => Ok(Self::RandomBandlimited),
            other => Err(Error::Parse(format!("unknown family '{other}'"))),
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Gaussian => "gaussian",
            Self::SphereConstant => "sphere_constant",
            Self::KnappBlock => "knapp_block",
            Self::RandomBandlimited => "random_bandlimited",
        };
        f.write_str(s)
    }
}

/// Block whose axis the Knapp slab hugs: `θ ≈ 0` (first) or `θ ≈ π/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockAxis {
    #[default]
    First,
    Second,
}

/// Parameters of a family. `widths` is the Gaussian `σ`, the sphere
/// profile width or the Knapp `δ`; random members use `seed + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFamily {
    pub kind: FamilyKind,
    pub d: usize,
    pub k: usize,
    #[serde(default = "default_widths")]
    pub widths: Vec<f64>,
    #[serde(default)]
    pub axis: BlockAxis,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_count")]
    pub count: usize,
}

fn default_widths() -> Vec<f64> {
    vec![]
}

fn default_count() -> usize {
    1
}

impl TestFamily {
    pub fn new(kind: FamilyKind, dims: Dimensions) -> Self {
        Self {
            kind,
            d: dims.d,
            k: dims.k,
            widths: vec![],
            axis: BlockAxis::First,
            seed: 0,
            count: 1,
        }
    }

    pub fn with_widths(mut self, widths: &[f64]) -> Self {
        self.widths = widths.to_vec();
        self
    }

    pub fn dims(&self) -> Result<Dimensions> {
        Dimensions::new(self.d, self.k)
    }

    fn widths_or_default(&self) -> Vec<f64> {
        if !self.widths.is_empty() {
            return self.widths.clone();
        }
        match self.kind {
            FamilyKind::Gaussian => vec![1.0],
            FamilyKind::SphereConstant => vec![0.5],
            FamilyKind::KnappBlock => vec![0.25],
            FamilyKind::RandomBandlimited => vec![1.0],
        }
    }
}

type Spectrum = Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>;

/// A test function held through its spectrum `f̂₀` on frequency grids,
/// scaled so that `‖f‖₂ = 1`. Spatial samples come from the transform onto
/// `space1 × space2`.
#[derive(Clone)]
pub struct TestFunction {
    pub label: String,
    pub dims: Dimensions,
    pub width: f64,
    spectrum: Spectrum,
    scale: f64,
    /// Angular range of `supp f̂` on the sphere.
    pub theta_range: (f64, f64),
    pub freq1: Arc<RadialGrid>,
    pub freq2: Arc<RadialGrid>,
    pub space1: Arc<RadialGrid>,
    pub space2: Arc<RadialGrid>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("label", &self.label)
            .field("dims", &self.dims)
            .field("width", &self.width)
            .field("scale", &self.scale)
            .field("space", &(self.space1.r_max(), self.space2.r_max()))
            .finish()
    }
}

/// Lobatto panels on `[0, extent]` with node spacing at most `π/(4·dual)`
/// (also at most `cap`), so that transforms to frequencies `≤ dual` resolve.
fn dual_grid(extent: f64, dual: f64, cap: f64) -> Result<Arc<RadialGrid>> {
    let spacing = (FRAC_PI_4 / dual.max(1e-12)).min(cap);
    let panels = ((extent / (spacing * (ORDER - 1) as f64)).ceil() as usize).max(4);
    Ok(Arc::new(RadialGrid::uniform(extent, panels, ORDER)?))
}

/// Splits panels of `grid` so that transforms out to `reach` resolve.
fn refine(grid: &Arc<RadialGrid>, reach: f64) -> Result<Arc<RadialGrid>> {
    let width = FRAC_PI_4 / reach * (grid.order() - 1) as f64;
    let old = grid.breaks();
    if old.windows(2).all(|w| w[1] - w[0] <= width) {
        return Ok(Arc::clone(grid));
    }
    let mut breaks = vec![old[0]];
    for w in old.windows(2) {
        let n = ((w[1] - w[0]) / width).ceil().max(1.0) as usize;
        breaks.extend((1..=n).map(|i| w[0] + (w[1] - w[0]) * i as f64 / n as f64));
    }
    Ok(Arc::new(RadialGrid::from_breaks(breaks, grid.order())?))
}

impl TestFunction {
    fn build(
        label: String,
        dims: Dimensions,
        width: f64,
        spectrum: Spectrum,
        theta_range: (f64, f64),
        freq: (Arc<RadialGrid>, Arc<RadialGrid>),
        space: (Arc<RadialGrid>, Arc<RadialGrid>),
    ) -> Self {
        let mut out = Self {
            label,
            dims,
            width,
            spectrum,
            scale: 1.0,
            theta_range,
            freq1: freq.0,
            freq2: freq.1,
            space1: space.0,
            space2: space.1,
        };
        let hat = out.spectrum_profile();
        let mass: f64 = hat
            .cell_measures()
            .iter()
            .zip(&hat.values)
            .map(|(m, v)| m * v.norm_sqr())
            .sum();
        out.scale = if mass > 0.0 { 1.0 / mass.sqrt() } else { 0.0 };
        out
    }

    /// `f̂₀(ξ₁, ξ₂)` after normalization.
    pub fn spectrum(&self, a: f64, b: f64) -> Complex64 {
        (self.spectrum)(a, b) * self.scale
    }

    /// `f̂₀` on the frequency grids.
    pub fn spectrum_profile(&self) -> BlockRadialProfile {
        BlockRadialProfile::from_fn(
            self.dims,
            Arc::clone(&self.freq1),
            Arc::clone(&self.freq2),
            |a, b| self.spectrum(a, b),
        )
    }

    pub fn sample_count(&self) -> usize {
        self.space1.len() * self.space2.len()
    }

    /// `f₀` on other spatial grids.
    pub fn profile_on(
        &self,
        grid1: Arc<RadialGrid>,
        grid2: Arc<RadialGrid>,
    ) -> Result<BlockRadialProfile> {
        if grid1.len() * grid2.len() > MATERIALIZE_BUDGET {
            return Err(Error::Budget(format!(
                "{} samples requested",
                grid1.len() * grid2.len()
            )));
        }
        let reach = grid1.r_max().max(grid2.r_max());
        let f1 = refine(&self.freq1, reach)?;
        let f2 = refine(&self.freq2, reach)?;
        let hat = BlockRadialProfile::from_fn(self.dims, f1, f2, |a, b| self.spectrum(a, b));
        Ok(transform_to(&hat, grid1, grid2))
    }

    /// `f₀` on the spatial grids.
    pub fn profile(&self) -> Result<BlockRadialProfile> {
        if self.sample_count() > MATERIALIZE_BUDGET {
            return Err(Error::Budget(format!(
                "{} has {} spatial samples, above {MATERIALIZE_BUDGET}",
                self.label,
                self.sample_count()
            )));
        }
        Ok(transform_to(
            &self.spectrum_profile(),
            Arc::clone(&self.space1),
            Arc::clone(&self.space2),
        ))
    }

    /// `‖f‖_p`, streamed over row blocks so that `f` is never stored whole.
    pub fn lebesgue_norm(&self, p: f64) -> f64 {
        let hat = self.spectrum_profile();
        let (m1, m2) = (hat.n1(), hat.n2());
        let re = DMatrix::from_fn(m1, m2, |i, j| hat.values[i * m2 + j].re);
        let im = DMatrix::from_fn(m1, m2, |i, j| hat.values[i * m2 + j].im);
        let k2t = hankel_matrix(self.dims.k, self.space2.nodes(), &self.freq2).transpose();
        let (g_re, g_im) = (&re * &k2t, &im * &k2t);
        let meas1 = block_measures(&self.space1, self.dims.dk());
        let meas2 = block_measures(&self.space2, self.dims.k);
        let nodes = self.space1.nodes();
        let chunk = 256;
        let sum: f64 = (0..nodes.len().div_ceil(chunk))
            .into_par_iter()
            .map(|c| {
                let rows = &nodes[c * chunk..((c + 1) * chunk).min(nodes.len())];
                let k1 = hankel_matrix(self.dims.dk(), rows, &self.freq1);
                let (v_re, v_im) = (&k1 * &g_re, &k1 * &g_im);
                let mut acc = 0.0;
                for i in 0..rows.len() {
                    let w1 = meas1[c * chunk + i];
                    for j in 0..meas2.len() {
                        let v = v_re[(i, j)].hypot(v_im[(i, j)]);
                        acc += w1 * meas2[j] * v.powf(p);
                    }
                }
                acc
            })
            .sum();
        sum.powf(1.0 / p)
    }

    /// `‖f‖_{L^{p,r}}` from the materialized profile.
    pub fn lorentz_norm(&self, spec: LorentzSpec) -> Result<f64> {
        let f = self.profile()?;
        let mags: Vec<f64> = f.values.iter().map(|v| v.norm()).collect();
        Ok(lorentz_from_samples(&mags, &f.cell_measures(), spec))
    }

    /// `f̂` on the unit sphere with at least `n` angular nodes placed on the
    /// angular support.
    pub fn restriction(&self, n: usize) -> SphereRestriction {
        let (lo, hi) = self.theta_range;
        let (dk, k) = (self.dims.dk() as i32, self.dims.k as i32);
        let panels = n.div_ceil(16).max(1);
        let rule = composite_legendre(&uniform_breaks(lo, hi, panels), 16);
        let weights = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&t, &w)| w * t.cos().powi(dk - 1) * t.sin().powi(k - 1))
            .collect();
        let values = rule
            .nodes
            .iter()
            .map(|&t| self.spectrum(t.cos(), t.sin()))
            .collect();
        SphereRestriction {
            dims: self.dims,
            radius: 1.0,
            theta: rule.nodes,
            weights,
            values,
        }
    }

    /// `Tf` on the given grids, with the angular rule sized for them.
    pub fn extension(&self, out1: Arc<RadialGrid>, out2: Arc<RadialGrid>) -> BlockRadialProfile {
        let reach = out1.r_max().max(out2.r_max());
        let span = self.theta_range.1 - self.theta_range.0;
        let n = SPHERE_NODES.max((2.0 * reach * span) as usize + 32);
        extend_restriction(&self.restriction(n), out1, out2)
    }

    /// `∫_{S^{d−1}} |f̂|² dσ / ‖f‖_p²`.
    pub fn stein_tomas_ratio(&self, p: f64) -> SteinTomasRatio {
        let num = sphere_l2(&self.restriction(256));
        SteinTomasRatio::new(num, self.lebesgue_norm(p))
    }
}

/// Outcome of a Stein–Tomas ratio; `degenerate` flags `f = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteinTomasRatio {
    pub ratio: f64,
    pub sphere_l2: f64,
    pub norm_p: f64,
    pub degenerate: bool,
}

impl SteinTomasRatio {
    fn new(sphere_l2: f64, norm_p: f64) -> Self {
        let degenerate = !(norm_p > 0.0);
        let ratio = if degenerate {
            0.0
        } else {
            sphere_l2 / (norm_p * norm_p)
        };
        Self {
            ratio,
            sphere_l2,
            norm_p,
            degenerate,
        }
    }
}

/// `∫_{S^{d−1}} |f̂|² dσ / ‖f‖_p²` for a profile on its own grids.
pub fn stein_tomas_ratio(f: &BlockRadialProfile, p: f64) -> Result<SteinTomasRatio> {
    let f_hat = forward_transform(f);
    let restr = restrict_at_radius(&f_hat, 1.0, SPHERE_NODES)?;
    Ok(SteinTomasRatio::new(
        sphere_l2(&restr),
        crate::profile::lebesgue_norm(f, p),
    ))
}

fn gaussian_member(dims: Dimensions, sigma: f64) -> Result<TestFunction> {
    let d = dims.d as i32;
    let top = 9.0 / sigma;
    let extent = 9.0 * sigma;
    let freq = dual_grid(top, extent, 0.25)?;
    let space = dual_grid(extent, top, 0.25)?;
    let spectrum: Spectrum = Arc::new(move |a, b| {
        Complex64::new(
            sigma.powi(d) * (-(sigma * sigma) * (a * a + b * b) / 2.0).exp(),
            0.0,
        )
    });
    Ok(TestFunction::build(
        format!("gaussian(sigma={sigma})"),
        dims,
        sigma,
        spectrum,
        (0.0, FRAC_PI_2),
        (Arc::clone(&freq), freq),
        (Arc::clone(&space), space),
    ))
}

/// `f̂(ξ) = exp(−(|ξ|² − 1)²/(2w²))`, equal to 1 on the sphere.
fn sphere_member(dims: Dimensions, w: f64) -> Result<TestFunction> {
    let top = (1.0 + 9.0 * w).sqrt();
    let extent = 16.0 / w;
    let freq = dual_grid(top, extent, w / 8.0)?;
    let space = dual_grid(extent, top, 0.25)?;
    let spectrum: Spectrum = Arc::new(move |a, b| {
        let s = a * a + b * b - 1.0;
        Complex64::new((-s * s / (2.0 * w * w)).exp(), 0.0)
    });
    Ok(TestFunction::build(
        format!("sphere_constant(w={w})"),
        dims,
        w,
        spectrum,
        (0.0, FRAC_PI_2),
        (Arc::clone(&freq), freq),
        (Arc::clone(&space), space),
    ))
}

/// Frequency bump on `{|r − 1| ≤ δ²}` times an angular slab of width `δ`
/// around the chosen block axis.
fn knapp_member(dims: Dimensions, delta: f64, axis: BlockAxis) -> Result<TestFunction> {
    if !(delta > 0.0 && delta <= 0.25) {
        return Err(Error::Domain(format!(
            "Knapp width must lie in (0, 1/4], got {delta}"
        )));
    }
    if delta < MIN_KNAPP_WIDTH {
        return Err(Error::Resolution(format!(
            "Knapp width {delta} puts δ² below the frequency resolution (minimum {MIN_KNAPP_WIDTH})"
        )));
    }
    let e = delta * delta;
    let radial = make_bump(
        Interval::new(1.0 - e, 1.0 + e),
        Interval::new(1.0 - e / 2.0, 1.0 + e / 2.0),
    )?;
    let angular = SmoothCutoff {
        support: Interval::new(f64::NEG_INFINITY, delta),
        plateau: Interval::new(f64::NEG_INFINITY, delta / 2.0),
    };
    // the axis block sees the thin annulus, the other one the slab
    let along_lo = (1.0 - e) * delta.cos();
    let along = Arc::new(RadialGrid::piecewise(
        &[(along_lo, along_lo), (1.0 + e, e / 3.0)],
        16,
    )?);
    let across_top = (1.0 + e) * delta.sin();
    let across = Arc::new(RadialGrid::piecewise(
        &[(across_top, across_top / 8.0)],
        16,
    )?);
    let along_space = dual_grid(KNAPP_EXTENT / e, 1.0 + e, 2.0)?;
    let across_space = dual_grid(KNAPP_EXTENT / delta, across_top, 2.0)?;
    let (freq, space, theta_range) = match axis {
        BlockAxis::First => ((along, across), (along_space, across_space), (0.0, delta)),
        BlockAxis::Second => (
            (across, along),
            (across_space, along_space),
            (FRAC_PI_2 - delta, FRAC_PI_2),
        ),
    };
    let spectrum: Spectrum = Arc::new(move |a, b| {
        let r = a.hypot(b);
        let theta = match axis {
            BlockAxis::First => b.atan2(a),
            BlockAxis::Second => a.atan2(b),
        };
        Complex64::new(radial.eval(r) * angular.eval(theta), 0.0)
    });
    Ok(TestFunction::build(
        format!("knapp_block(delta={delta})"),
        dims,
        delta,
        spectrum,
        theta_range,
        freq,
        space,
    ))
}

/// `f̂(ξ) = e^{−|ξ|²/2} Σ_{a,b≤2} c_{ab} |ξ₁|^{2a}|ξ₂|^{2b}` with seeded `c_{ab}`.
fn random_member(dims: Dimensions, seed: u64) -> Result<TestFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
    let top = 11.0;
    let extent = 12.0;
    let freq = dual_grid(top, extent, 0.25)?;
    let space = dual_grid(extent, top, 0.25)?;
    let spectrum: Spectrum = Arc::new(move |a, b| {
        let (a2, b2) = (a * a, b * b);
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                acc += coeffs[3 * i + j] * a2.powi(i as i32) * b2.powi(j as i32);
            }
        }
        Complex64::new(acc * (-(a2 + b2) / 2.0).exp(), 0.0)
    });
    Ok(TestFunction::build(
        format!("random_bandlimited(seed={seed})"),
        dims,
        1.0,
        spectrum,
        (0.0, FRAC_PI_2),
        (Arc::clone(&freq), freq),
        (Arc::clone(&space), space),
    ))
}

/// Members of a family, each normalized to `‖f‖₂ = 1`.
pub fn make_family(spec: &TestFamily) -> Result<Vec<TestFunction>> {
    let dims = spec.dims()?;
    match spec.kind {
        FamilyKind::Gaussian => spec
            .widths_or_default()
            .iter()
            .map(|&s| gaussian_member(dims, s))
            .collect(),
        FamilyKind::SphereConstant => spec
            .widths_or_default()
            .iter()
            .map(|&w| sphere_member(dims, w))
            .collect(),
        FamilyKind::KnappBlock => spec
            .widths_or_default()
            .iter()
            .map(|&delta| knapp_member(dims, delta, spec.axis))
            .collect(),
        FamilyKind::RandomBandlimited => (0..spec.count.max(1) as u64)
            .map(|i| random_member(dims, spec.seed + i))
            .collect(),
    }
}

impl TestFunction {
    /// Measure of `{f̂ ≠ 0}` in `R^d`, from the frequency grid cells.
    pub fn support_measure(&self) -> f64 {
        let hat = self.spectrum_profile();
        hat.cell_measures()
            .iter()
            .zip(&hat.values)
            .filter(|(_, v)| v.norm() > 0.0)
            .map(|(m, _)| m)
            .sum()
    }
}

/// Position of `(1/p, 1/q)` relative to the boundedness region of `T` on
/// `G_k`-symmetric functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Inside,
    Boundary,
    Outside,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Region::Inside => "inside",
            Region::Boundary => "boundary",
            Region::Outside => "outside",
        })
    }
}

pub type Rational = Ratio<i64>;

fn thresholds(d: usize, k: usize) -> (Rational, Rational) {
    let m = k.min(d - k) as i64;
    let d = d as i64;
    (Ratio::new(d + 1, 2 * d), Ratio::new(2, d + m))
}

fn classify<T: PartialOrd + Copy>(c1: T, c2: T, zero: T, lo: T, hi: T) -> Region {
    if c1 < lo || c2 < lo {
        Region::Outside
    } else if c1 <= hi || c2 <= hi {
        Region::Boundary
    } else {
        let _ = zero;
        Region::Inside
    }
}

/// Exact label: inside iff `min{1/p, 1/q′} > (d+1)/(2d)` and
/// `1/p − 1/q ≥ 2/(d+m)` with neither constraint active.
pub fn region_label_exact(d: usize, k: usize, p_inv: Rational, q_inv: Rational) -> Region {
    let one = Rational::from_integer(1);
    let zero = Rational::from_integer(0);
    if p_inv < zero || p_inv > one || q_inv < zero || q_inv > one {
        return Region::Outside;
    }
    let (a, b) = thresholds(d, k);
    let c1 = p_inv.min(one - q_inv) - a;
    let c2 = p_inv - q_inv - b;
    classify(c1, c2, zero, zero, zero)
}

/// Floating-point label with a `1e−9` boundary band.
pub fn region_label(d: usize, k: usize, p_inv: f64, q_inv: f64) -> Region {
    if !(0.0..=1.0).contains(&p_inv) || !(0.0..=1.0).contains(&q_inv) {
        return Region::Outside;
    }
    let (a, b) = thresholds(d, k);
    let to_f = |r: Rational| *r.numer() as f64 / *r.denom() as f64;
    let c1 = p_inv.min(1.0 - q_inv) - to_f(a);
    let c2 = p_inv - q_inv - to_f(b);
    classify(c1, c2, 0.0, -1e-9, 1e-9)
}

/// Corners `A, B, D, D′, B′` of the region in the `(1/p, 1/q)` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RieszCorners {
    pub a: (Rational, Rational),
    pub b: (Rational, Rational),
    pub d: (Rational, Rational),
    pub d_prime: (Rational, Rational),
    pub b_prime: (Rational, Rational),
}

impl RieszCorners {
    pub fn named(&self) -> [(&'static str, (Rational, Rational)); 5] {
        [
            ("A", self.a),
            ("B", self.b),
            ("D", self.d),
            ("D'", self.d_prime),
            ("B'", self.b_prime),
        ]
    }
}

pub fn riesz_corners(d: usize, k: usize) -> RieszCorners {
    let (a, b) = thresholds(d, k);
    let one = Rational::from_integer(1);
    let zero = Rational::from_integer(0);
    let q_line = one - a;
    RieszCorners {
        a: (one, zero),
        b: (one, q_line),
        d: (q_line + b, q_line),
        d_prime: (a, a - b),
        b_prime: (a, zero),
    }
}

/// Operator whose `L^p → L^q` ratios are probed.
#[derive(Debug, Clone)]
pub enum ProbeOperator {
    Extend,
    Resolve(SymbolModel),
}

/// Ball norms `‖op f‖_{L^q(B_R)}/‖f‖_p` over a radius ladder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub radii: Vec<f64>,
    pub ratios: Vec<f64>,
}

impl Trajectory {
    /// Log-log slope over the last three radii.
    pub fn tail_slope(&self) -> f64 {
        let n = self.radii.len();
        if n < 2 {
            return 0.0;
        }
        let from = n.saturating_sub(3);
        let pts: Vec<(f64, f64)> = (from..n)
            .filter(|&i| self.ratios[i] > 0.0)
            .map(|i| (self.radii[i].ln(), self.ratios[i].ln()))
            .collect();
        if pts.len() < 2 {
            return 0.0;
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        crate::lap::fit_slope(&xs, &ys)
    }

    /// Relative change over the last radius step.
    pub fn last_variation(&self) -> f64 {
        let n = self.ratios.len();
        if n < 2 || self.ratios[n - 2] == 0.0 {
            return 0.0;
        }
        (self.ratios[n - 1] - self.ratios[n - 2]).abs() / self.ratios[n - 2].abs()
    }

    pub fn trend(&self) -> Trend {
        let s = self.tail_slope();
        if s > 0.05 {
            Trend::Divergent(s)
        } else if s.abs() <= 0.02 {
            Trend::Bounded
        } else {
            Trend::Inconclusive
        }
    }
}

/// Empirical trend of a trajectory; never a proof of boundedness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Bounded,
    Divergent(f64),
    Inconclusive,
}

impl fmt::Display for Trend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Trend::Bounded => f.write_str("bounded-trend"),
            Trend::Divergent(_) => f.write_str("divergent-trend"),
            Trend::Inconclusive => f.write_str("inconclusive"),
        }
    }
}

/// `‖g‖` over the ball `{ρ₁² + ρ₂² ≤ R²}` in the given Lorentz space.
pub fn ball_norm(g: &BlockRadialProfile, radius: f64, spec: LorentzSpec) -> f64 {
    let meas = g.cell_measures();
    let n2 = g.n2();
    let mut mags = Vec::new();
    let mut ms = Vec::new();
    for (i, &a) in g.grid1.nodes().iter().enumerate() {
        for (j, &b) in g.grid2.nodes().iter().enumerate() {
            if a.hypot(b) <= radius {
                mags.push(g.values[i * n2 + j].norm());
                ms.push(meas[i * n2 + j]);
            }
        }
    }
    lorentz_from_samples(&mags, &ms, spec)
}

fn check_ladder(radii: &[f64], reach: f64) -> Result<()> {
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("radius ladder must increase".into()));
    }
    if let Some(&top) = radii.last() {
        if top > reach {
            return Err(Error::Coverage(format!(
                "largest radius {top} exceeds the grid ({reach})"
            )));
        }
    }
    Ok(())
}

fn apply_probe(f: &BlockRadialProfile, op: &ProbeOperator) -> Result<BlockRadialProfile> {
    match op {
        ProbeOperator::Extend => crate::kernels::extend(f),
        ProbeOperator::Resolve(symbol) => Ok(resolve(f, symbol)?.profile),
    }
}

/// `‖op(f)‖_{L^q(B_R)}/‖f‖_{L^p}` on the grids of `f`.
pub fn ratio_trajectory(
    f: &BlockRadialProfile,
    op: &ProbeOperator,
    p: LorentzSpec,
    q: LorentzSpec,
    radii: &[f64],
) -> Result<Trajectory> {
    check_ladder(radii, f.r_max())?;
    let denom = lorentz_from_samples(
        &f.values.iter().map(|v| v.norm()).collect::<Vec<_>>(),
        &f.cell_measures(),
        p,
    );
    if denom == 0.0 {
        return Ok(Trajectory {
            radii: radii.to_vec(),
            ratios: vec![0.0; radii.len()],
        });
    }
    let g = apply_probe(f, op)?;
    let ratios = radii.iter().map(|&r| ball_norm(&g, r, q) / denom).collect();
    Ok(Trajectory {
        radii: radii.to_vec(),
        ratios,
    })
}

/// Output grid for `Tf` on balls up to `radius`.
pub fn ball_grid(radius: f64) -> Result<Arc<RadialGrid>> {
    dual_grid(radius, 1.0, 0.25)
}

impl TestFunction {
    /// `‖Tf‖_{L^q(B_R)}/‖f‖_p` with `Tf` evaluated on dedicated ball grids;
    /// `lorentz` switches to `L^{p,1} → L^{q,∞}`.
    pub fn extension_trajectory(
        &self,
        p: f64,
        q: f64,
        radii: &[f64],
        lorentz: bool,
    ) -> Result<Trajectory> {
        let top = radii.last().copied().unwrap_or(1.0);
        check_ladder(radii, top)?;
        let grid = ball_grid(top)?;
        let tf = self.extension(Arc::clone(&grid), grid);
        self.trajectory_from(&tf, p, q, radii, lorentz)
    }

    fn trajectory_from(
        &self,
        tf: &BlockRadialProfile,
        p: f64,
        q: f64,
        radii: &[f64],
        lorentz: bool,
    ) -> Result<Trajectory> {
        let (denom, qspec) = if lorentz {
            (
                self.lorentz_norm(LorentzSpec::strong(p))?,
                LorentzSpec::weak(q),
            )
        } else {
            (self.lebesgue_norm(p), LorentzSpec::lebesgue(q))
        };
        let ratios = radii
            .iter()
            .map(|&r| {
                if denom > 0.0 {
                    ball_norm(tf, r, qspec) / denom
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Trajectory {
            radii: radii.to_vec(),
            ratios,
        })
    }
}

/// One probed exponent pair.
#[derive(Debug, Clone, Serialize)]
pub struct ProbePoint {
    pub p_inv: f64,
    pub q_inv: f64,
    pub region: Region,
    /// Largest ratio over the family members, per radius.
    pub trajectory: Trajectory,
    pub slope: f64,
    pub trend: Trend,
}

/// Trajectories over a grid of `(1/p, 1/q)` points.
#[derive(Debug, Clone, Serialize)]
pub struct RieszProbeReport {
    pub d: usize,
    pub k: usize,
    pub family: String,
    pub lorentz: bool,
    pub points: Vec<ProbePoint>,
}

/// Probe setup: exponent points, radius ladder and Lorentz switch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub points: Vec<(f64, f64)>,
    pub radii: Vec<f64>,
    #[serde(default)]
    pub lorentz: bool,
}

impl ProbeConfig {
    /// All inside points of a regular `(1/p, 1/q)` lattice with `n` steps.
    pub fn interior_lattice(d: usize, k: usize, n: usize, radii: &[f64]) -> Self {
        let mut points = Vec::new();
        for i in 0..=n {
            for j in 0..=n {
                let (x, y) = (0.5 + 0.5 * i as f64 / n as f64, 0.5 * j as f64 / n as f64);
                if region_label(d, k, x, y) == Region::Inside {
                    points.push((x, y));
                }
            }
        }
        Self {
            points,
            radii: radii.to_vec(),
            lorentz: false,
        }
    }
}

/// Probe `T` on a family over the configured exponent points.
pub fn riesz_map(family: &TestFamily, probe: &ProbeConfig) -> Result<RieszProbeReport> {
    let dims = family.dims()?;
    if probe.points.len() > MAX_PROBE_POINTS {
        return Err(Error::Budget(format!(
            "{} probe points exceed {MAX_PROBE_POINTS}",
            probe.points.len()
        )));
    }
    let mut report = RieszProbeReport {
        d: dims.d,
        k: dims.k,
        family: family.kind.to_string(),
        lorentz: probe.lorentz,
        points: Vec::new(),
    };
    if probe.points.is_empty() {
        return Ok(report);
    }
    let top = probe.radii.last().copied().unwrap_or(1.0);
    check_ladder(&probe.radii, top)?;
    let members = make_family(family)?;
    let grid = ball_grid(top)?;
    let fields: Vec<BlockRadialProfile> = members
        .iter()
        .map(|m| m.extension(Arc::clone(&grid), Arc::clone(&grid)))
        .collect();
    let per_point = probe
        .points
        .par_iter()
        .map(|&(pi, qi)| {
            let (p, q) = (1.0 / pi, 1.0 / qi);
            let mut best = vec![0.0f64; probe.radii.len()];
            for (m, tf) in members.iter().zip(&fields) {
                let t = m.trajectory_from(tf, p, q, &probe.radii, probe.lorentz)?;
                for (b, r) in best.iter_mut().zip(&t.ratios) {
                    *b = b.max(*r);
                }
            }
            let trajectory = Trajectory {
                radii: probe.radii.clone(),
                ratios: best,
            };
            Ok(ProbePoint {
                p_inv: pi,
                q_inv: qi,
                region: region_label(dims.d, dims.k, pi, qi),
                slope: trajectory.tail_slope(),
                trend: trajectory.trend(),
                trajectory,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    report.points = per_point;
    Ok(report)
}

#[derive(Serialize)]
struct ProbeRow<'a> {
    p_inv: f64,
    q_inv: f64,
    region: Region,
    radius: f64,
    ratio: f64,
    slope: f64,
    trend: &'a str,
}

impl RieszProbeReport {
    /// Columns `p_inv, q_inv, region, radius, ratio, slope, trend`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for pt in &self.points {
            let trend = pt.trend.to_string();
            for (r, v) in pt.trajectory.radii.iter().zip(&pt.trajectory.ratios) {
                w.serialize(ProbeRow {
                    p_inv: pt.p_inv,
                    q_inv: pt.q_inv,
                    region: pt.region,
                    radius: *r,
                    ratio: *v,
                    slope: pt.slope,
                    trend: &trend,
                })?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Riesz diagram with the region outline and one marker per point.
    pub fn svg(&self) -> String {
        let corners = riesz_corners(self.d, self.k);
        let marks = self
            .points
            .iter()
            .map(|p| {
                let colour = match p.trend {
                    Trend::Bounded => "#2a7",
                    Trend::Divergent(_) => "#c33",
                    Trend::Inconclusive => "#999",
                };
                (p.p_inv, p.q_inv, colour)
            })
            .collect::<Vec<_>>();
        svg::riesz_diagram(
            &corners,
            &marks,
            &format!("d = {}, k = {}, {}", self.d, self.k, self.family),
        )
    }
}

/// Minimal SVG writers for the reports.
pub mod svg {
    use super::{Rational, RieszCorners};
    use std::fmt::Write;

    const W: f64 = 480.0;
    const H: f64 = 360.0;
    const PAD: f64 = 48.0;

    fn frame(title: &str) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
             <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
             <text x=\"{}\" y=\"20\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
            W / 2.0,
            escape(title)
        )
    }

    fn escape(s: &str) -> String {
        s.replace('&', "&amp;")
            .replace('<', "&lt;")
            .replace('>', "&gt;")
    }

    fn axes(out: &mut String, xlabel: &str, ylabel: &str) {
        let _ = writeln!(
            out,
            "<line x1=\"{PAD}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
             <line x1=\"{PAD}\" y1=\"{PAD}\" x2=\"{PAD}\" y2=\"{}\" stroke=\"black\"/>\n\
             <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n\
             <text x=\"14\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 14 {})\" text-anchor=\"middle\">{}</text>",
            H - PAD,
            W - PAD,
            H - PAD,
            H - PAD,
            W / 2.0,
            H - 12.0,
            escape(xlabel),
            H / 2.0,
            H / 2.0,
            escape(ylabel)
        );
    }

    /// Log-log line plot of several `(label, x, y)` series.
    pub fn loglog(
        title: &str,
        xlabel: &str,
        ylabel: &str,
        series: &[(String, Vec<f64>, Vec<f64>)],
    ) -> String {
        let mut out = frame(title);
        axes(&mut out, xlabel, ylabel);
        let pts: Vec<(f64, f64)> = series
            .iter()
            .flat_map(|(_, x, y)| {
                x.iter()
                    .zip(y)
                    .filter(|(a, b)| **a > 0.0 && **b > 0.0)
                    .map(|(a, b)| (a.ln(), b.ln()))
            })
            .collect();
        if pts.is_empty() {
            out.push_str("</svg>\n");
            return out;
        }
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &(x, y) in &pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let (dx, dy) = ((x1 - x0).max(1e-12), (y1 - y0).max(1e-12));
        let sx = |x: f64| PAD + (x - x0) / dx * (W - 2.0 * PAD);
        let sy = |y: f64| H - PAD - (y - y0) / dy * (H - 2.0 * PAD);
        let palette = [
            "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
        ];
        for (i, (label, x, y)) in series.iter().enumerate() {
            let colour = palette[i % palette.len()];
            let path: Vec<String> = x
                .iter()
                .zip(y)
                .filter(|(a, b)| **a > 0.0 && **b > 0.0)
                .map(|(a, b)| format!("{:.2},{:.2}", sx(a.ln()), sy(b.ln())))
                .collect();
            let _ = writeln!(
                out,
                "<polyline fill=\"none\" stroke=\"{colour}\" stroke-width=\"1.5\" points=\"{}\"/>\n\
                 <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" fill=\"{colour}\">{}</text>",
                path.join(" "),
                W - PAD - 110.0,
                PAD + 12.0 * i as f64,
                escape(label)
            );
        }
        let _ = writeln!(
            out,
            "<text x=\"{PAD}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\">{:.3e}</text>\n\
             <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{:.3e}</text>",
            H - PAD + 14.0,
            x0.exp(),
            W - PAD,
            H - PAD + 14.0,
            x1.exp()
        );
        out.push_str("</svg>\n");
        out
    }

    fn to_f(r: Rational) -> f64 {
        *r.numer() as f64 / *r.denom() as f64
    }

    /// `(1/p, 1/q) ∈ [1/2, 1] × [0, 1/2]` with the region outline.
    pub fn riesz_diagram(
        corners: &RieszCorners,
        marks: &[(f64, f64, &str)],
        title: &str,
    ) -> String {
        let mut out = frame(title);
        axes(&mut out, "1/p", "1/q");
        let sx = |x: f64| PAD + (x - 0.5) / 0.5 * (W - 2.0 * PAD);
        let sy = |y: f64| H - PAD - y / 0.5 * (H - 2.0 * PAD);
        let outline: Vec<String> = corners
            .named()
            .iter()
            .map(|(_, (x, y))| format!("{:.2},{:.2}", sx(to_f(*x)), sy(to_f(*y))))
            .collect();
        let _ = writeln!(
            out,
            "<polygon points=\"{}\" fill=\"#eef\" stroke=\"#336\" stroke-width=\"1.5\"/>",
            outline.join(" ")
        );
        for (name, (x, y)) in corners.named() {
            let _ = writeln!(
                out,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\">{name} ({x}, {y})</text>",
                sx(to_f(x)) + 4.0,
                sy(to_f(y)) - 4.0
            );
        }
        for &(x, y, colour) in marks {
            let _ = writeln!(
                out,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{colour}\"/>",
                sx(x),
                sy(y)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Ratio::new(n, d)
    }

    #[test]
    fn region_examples() {
        assert_eq!(region_label(4, 2, 0.8, 0.3), Region::Inside);
        assert_eq!(region_label(4, 2, 0.6, 0.1), Region::Outside);
        assert_eq!(region_label(4, 2, 0.3 + 1.0 / 3.0, 0.3), Region::Boundary);
        assert_eq!(region_label_exact(4, 2, r(2, 3), r(1, 3)), Region::Boundary);
        assert_eq!(region_label_exact(4, 2, r(5, 8), r(1, 8)), Region::Boundary);
        assert_eq!(region_label(4, 2, 1.2, 0.1), Region::Outside);
    }

    #[test]
    fn corners_at_four_two() {
        let c = riesz_corners(4, 2);
        assert_eq!(c.a, (r(1, 1), r(0, 1)));
        assert_eq!(c.b, (r(1, 1), r(3, 8)));
        assert_eq!(c.d, (r(17, 24), r(3, 8)));
        assert_eq!(c.d_prime, (r(5, 8), r(7, 24)));
        assert_eq!(c.b_prime, (r(5, 8), r(0, 1)));
        // A sits on the p = 1 edge, the others on an active constraint
        assert_eq!(region_label_exact(4, 2, c.a.0, c.a.1), Region::Inside);
        for (_, (x, y)) in &c.named()[1..] {
            assert_eq!(region_label_exact(4, 2, *x, *y), Region::Boundary);
        }
    }

    #[test]
    fn symmetric_threshold_beats_classical() {
        // 1/p_ST = (d+m+2)/(2(d+m)) versus (d+3)/(2(d+1))
        let (d, m) = (4.0f64, 2.0f64);
        let p_st = 2.0 * (d + m) / (d + m + 2.0);
        assert!((p_st - 1.5).abs() < 1e-15);
        assert!(p_st > 2.0 * (d + 1.0) / (d + 3.0));
    }

    #[test]
    fn sphere_member_restriction_is_constant() {
        let dims = Dimensions::new(4, 2).unwrap();
        let f = &make_family(&TestFamily::new(FamilyKind::SphereConstant, dims)).unwrap()[0];
        let restr = f.restriction(64);
        let first = restr.values[0];
        assert!(restr
            .values
            .iter()
            .all(|v| (v - first).norm() < 1e-14 * first.norm()));
        // before scaling the spectrum is exactly 1 on the sphere
        assert!((first.re / f.scale - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_input_gives_zero_trajectory() {
        let dims = Dimensions::new(3, 1).unwrap();
        let grid = Arc::new(RadialGrid::uniform(8.0, 4, ORDER).unwrap());
        let zero = BlockRadialProfile::from_fn(dims, Arc::clone(&grid), grid, |_, _| {
            Complex64::new(0.0, 0.0)
        });
        let t = ratio_trajectory(
            &zero,
            &ProbeOperator::Extend,
            LorentzSpec::lebesgue(1.5),
            LorentzSpec::lebesgue(4.0),
            &[2.0, 4.0, 8.0],
        )
        .unwrap();
        assert_eq!(t.ratios, vec![0.0; 3]);
        assert!(stein_tomas_ratio(&zero, 1.5).unwrap().degenerate);
    }

    #[test]
    fn trajectory_rejects_radii_beyond_grid() {
        let dims = Dimensions::new(3, 1).unwrap();
        let grid = Arc::new(RadialGrid::uniform(8.0, 4, ORDER).unwrap());
        let g = BlockRadialProfile::from_fn(dims, Arc::clone(&grid), grid, |a, b| {
            Complex64::new((-(a * a + b * b)).exp(), 0.0)
        });
        let err = ratio_trajectory(
            &g,
            &ProbeOperator::Extend,
            LorentzSpec::lebesgue(1.5),
            LorentzSpec::lebesgue(4.0),
            &[4.0, 16.0],
        );
        assert!(matches!(err, Err(Error::Coverage(_))));
    }

    #[test]
    fn profile_and_streamed_paths_agree() {
        let dims = Dimensions::new(4, 2).unwrap();
        let f = &make_family(&TestFamily::new(FamilyKind::Gaussian, dims)).unwrap()[0];
        let prof = f.profile().unwrap();
        assert!((f.lebesgue_norm(2.0) - 1.0).abs() < 1e-6);
        for p in [1.2, 1.5, 3.0] {
            let a = f.lebesgue_norm(p);
            let b = crate::profile::lebesgue_norm(&prof, p);
            assert!((a - b).abs() < 1e-6 * b, "p = {p}: {a} vs {b}");
        }
        let radii = [2.0, 4.0, 8.0];
        let direct = f.extension_trajectory(1.5, 4.0, &radii, false).unwrap();
        let via = ratio_trajectory(
            &prof,
            &ProbeOperator::Extend,
            LorentzSpec::lebesgue(1.5),
            LorentzSpec::lebesgue(4.0),
            &radii,
        )
        .unwrap();
        for (a, b) in direct.ratios.iter().zip(&via.ratios) {
            // the ball edge cuts grid cells differently on the two grids
            assert!((a - b).abs() < 1e-2 * b, "{a} vs {b}");
        }
    }

    #[test]
    fn trend_classes() {
        let radii = vec![8.0, 16.0, 32.0, 64.0];
        let grow = Trajectory {
            radii: radii.clone(),
            ratios: radii.iter().map(|r: &f64| r.sqrt()).collect(),
        };
        assert!(matches!(grow.trend(), Trend::Divergent(s) if (s - 0.5).abs() < 1e-12));
        let flat = Trajectory {
            radii: radii.clone(),
            ratios: vec![1.0; 4],
        };
        assert_eq!(flat.trend(), Trend::Bounded);
        let creep = Trajectory {
            radii: radii.clone(),
            ratios: radii.iter().map(|r: &f64| r.powf(0.03)).collect(),
        };
        assert_eq!(creep.trend(), Trend::Inconclusive);
    }

    #[test]
    fn riesz_map_guards() {
        let dims = Dimensions::new(4, 2).unwrap();
        let fam = TestFamily::new(FamilyKind::Gaussian, dims);
        let empty = ProbeConfig {
            points: vec![],
            radii: vec![4.0, 8.0],
            lorentz: false,
        };
        assert!(riesz_map(&fam, &empty).unwrap().points.is_empty());
        let many = ProbeConfig {
            points: vec![(0.9, 0.1); MAX_PROBE_POINTS + 1],
            ..empty
        };
        assert!(matches!(riesz_map(&fam, &many), Err(Error::Budget(_))));
    }

    #[test]
    fn knapp_support_shrinks() {
        let dims = Dimensions::new(4, 2).unwrap();
        let fam =
            make_family(&TestFamily::new(FamilyKind::KnappBlock, dims).with_widths(&[0.25, 0.125]))
                .unwrap();
        let (a, b) = (fam[0].support_measure(), fam[1].support_measure());
        // annulus thickness δ² times slab measure δ^k
        let slope = (a / b).log2();
        assert!((slope - 4.0).abs() < 0.3, "{slope}");
        assert!(matches!(
            make_family(&TestFamily::new(FamilyKind::KnappBlock, dims).with_widths(&[1.0 / 256.0])),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn probe_csv_and_svg() {
        let dims = Dimensions::new(4, 2).unwrap();
        let fam = TestFamily::new(FamilyKind::Gaussian, dims);
        let probe = ProbeConfig {
            points: vec![(0.9, 0.1), (0.8, 0.2)],
            radii: vec![4.0, 8.0],
            lorentz: false,
        };
        let rep = riesz_map(&fam, &probe).unwrap();
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("p_inv,q_inv,region,radius,ratio,slope,trend"));
        let svg = rep.svg();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 2);
    }
}

/// Seeded `(j, t₁, t₂, ρ₁, ρ₂)` points with `j` cycling over `js` and each
/// coordinate uniform on `[0, 3·2^{j−1}]`.
pub fn kernel_sample_points(
    js: std::ops::RangeInclusive<u32>,
    count: usize,
    seed: u64,
) -> Vec<(u32, f64, f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let js: Vec<u32> = js.collect();
    if js.is_empty() {
        return Vec::new();
    }
    (0..count)
        .map(|i| {
            let j = js[i % js.len()];
            let top = 1.5 * 2f64.powi(j as i32);
            let mut u = || rng.random_range(1e-3..1.0) * top;
            (j, u(), u(), u(), u())
        })
        .collect()
}
