//! The extension operator `T`, its dyadic pieces `T_j` and the kernels `K_j`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dyadic::{make_partition, tau, RadialCutoffFamily};
use crate::oscint::{psi_integral, Phase};
use crate::profile::{
    lebesgue_norm, lorentz_norm, BlockRadialProfile, Dimensions, LorentzSpec, RadialGrid,
};
use crate::quadrature::gauss_legendre;
use crate::specfun::{asymptotic_sum_with, surface_measure, SphereKernel, SphereKernelParams};
use crate::transform::{
    forward_transform, restrict_at_radius, transform_to, SphereRestriction, SPHERE_NODES,
};
use crate::{Error, Result};

/// Largest dyadic index accepted by the kernel evaluator.
pub const MAX_J: u32 = 12;
/// Default cap on kernel evaluations in [`apply_tj_kernel`].
pub const KERNEL_BUDGET: usize = 50_000;

/// `Φ_j` together with the data it is built from.
#[derive(Debug, Clone, Copy)]
pub struct DyadicPiece {
    pub j: u32,
    pub params: SphereKernelParams,
    pub family: RadialCutoffFamily,
}

impl DyadicPiece {
    pub fn new(d: usize, j: u32, order: usize) -> Result<Self> {
        if j < 1 {
            return Err(Error::Domain("dyadic index must be >= 1".into()));
        }
        let params = SphereKernelParams::new(d, order)?;
        if !params.splits_remainder() {
            return Err(Error::Domain(format!(
                "expansion order {order} must exceed (d-1)/2 = {}",
                (d as f64 - 1.0) / 2.0
            )));
        }
        Ok(Self {
            j,
            params,
            family: make_partition(j.max(1))?,
        })
    }

    pub fn order(&self) -> usize {
        self.params.order
    }

    pub fn d(&self) -> usize {
        self.params.d
    }

    /// Support `[2^{j-1}, 2^{j+1}]` of `Φ_j`.
    pub fn support(&self) -> (f64, f64) {
        let s = 2f64.powi(self.j as i32);
        (0.5 * s, 2.0 * s)
    }
}

/// `Φ_j(ρ) = χ(2^{-j}ρ) Σ_{l<L} ρ^{(1-d)/2-l}(α_l e^{iρ} + conj(α_l) e^{-iρ})`.
pub fn phi_j(piece: &DyadicPiece, rho: f64) -> Complex64 {
    let c = piece.family.piece(piece.j, rho);
    if c == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    c * asymptotic_sum_with(&piece.params.alphas(), piece.d(), rho)
}

/// `Φ₀ = 𝒥 - (1-χ₀) A_L`: the part of `𝒥` not covered by any `Φ_j`.
pub fn phi_0(params: &SphereKernelParams, kernel: &SphereKernel, rho: f64) -> f64 {
    let family = make_partition(1).expect("j_max = 1 is valid");
    let far = 1.0 - family.chi0.eval(rho);
    let j = kernel.eval(rho);
    if far == 0.0 {
        return j;
    }
    j - far * asymptotic_sum_with(&params.alphas(), params.d, rho).re
}

fn bessel_matrix(l: usize, t: &[f64], scaled_args: &[f64]) -> DMatrix<f64> {
    let kernel = SphereKernel::new(l).expect("block dimension >= 1");
    let data: Vec<f64> = t
        .par_iter()
        .flat_map_iter(|&x| {
            let kernel = &kernel;
            scaled_args.iter().map(move |&a| kernel.eval(x * a))
        })
        .collect();
    DMatrix::from_row_slice(t.len(), scaled_args.len(), &data)
}

/// `∫₀^{π/2} g(θ) 𝒥_{d-k}(t₁ r cos θ) 𝒥_k(t₂ r sin θ) cos^{d-k-1}θ sin^{k-1}θ dθ`
/// for the restriction `g` of radius `r`, on the given output grids.
pub fn extend_restriction(
    restr: &SphereRestriction,
    out1: Arc<RadialGrid>,
    out2: Arc<RadialGrid>,
) -> BlockRadialProfile {
    let dims = restr.dims;
    let r = restr.radius;
    let cos: Vec<f64> = restr.theta.iter().map(|t| r * t.cos()).collect();
    let sin: Vec<f64> = restr.theta.iter().map(|t| r * t.sin()).collect();
    let a = bessel_matrix(dims.dk(), out1.nodes(), &cos);
    let b = bessel_matrix(dims.k, out2.nodes(), &sin);
    let n = restr.theta.len();
    let wre = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            restr.weights[i] * restr.values[i].re
        } else {
            0.0
        }
    });
    let wim = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            restr.weights[i] * restr.values[i].im
        } else {
            0.0
        }
    });
    let bt = b.transpose();
    let re = &a * wre * &bt;
    let im = &a * wim * &bt;
    let (n1, n2) = (out1.len(), out2.len());
    let mut values = Vec::with_capacity(n1 * n2);
    for i in 0..n1 {
        for j in 0..n2 {
            values.push(Complex64::new(re[(i, j)], im[(i, j)]));
        }
    }
    BlockRadialProfile {
        dims,
        grid1: out1,
        grid2: out2,
        values,
    }
}

/// Extension from the sphere of radius `r`, evaluated on the grids of `f`.
pub fn extend_at_radius(f: &BlockRadialProfile, r: f64) -> Result<BlockRadialProfile> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    let f_hat = forward_transform(f);
    let restr = restrict_at_radius(&f_hat, r, SPHERE_NODES)?;
    Ok(extend_restriction(
        &restr,
        Arc::clone(&f.grid1),
        Arc::clone(&f.grid2),
    ))
}

/// `Tf = 𝓕^{-1}(f̂ dσ)` on the grids of `f`.
pub fn extend(f: &BlockRadialProfile) -> Result<BlockRadialProfile> {
    extend_at_radius(f, 1.0)
}

/// `K_j(t, ρ)`: integral of `Φ_j(|x - y|)` over the product of spheres
/// `|y₁| = ρ₁`, `|y₂| = ρ₂`, written in Funk–Hecke form.
pub fn kernel_kj(
    piece: &DyadicPiece,
    dims: Dimensions,
    t1: f64,
    t2: f64,
    rho1: f64,
    rho2: f64,
) -> Result<f64> {
    if dims.d != piece.d() {
        return Err(Error::Domain("piece and block dimensions disagree".into()));
    }
    let (n1, n2) = (dims.dk(), dims.k);
    if n1 < 2 || n2 < 2 {
        return Err(Error::Domain(format!(
            "block dimensions ({n1}, {n2}) must both be at least 2"
        )));
    }
    if piece.j > MAX_J {
        return Err(Error::Resolution(format!(
            "j = {} exceeds {MAX_J}",
            piece.j
        )));
    }
    let (a1, a2) = ((n1 as f64 - 3.0) / 2.0, (n2 as f64 - 3.0) / 2.0);
    let scale = 2f64.powi(piece.j as i32);
    let q = 1.0 / (scale * scale);
    let phase = Phase {
        a: q * (t1 * t1 + t2 * t2 + rho1 * rho1 + rho2 * rho2),
        b1: q * 2.0 * t1 * rho1,
        b2: q * 2.0 * t2 * rho2,
    };
    let alphas = piece.params.alphas();
    let d = piece.d();
    let chi = piece.family.chi;
    let h = |p: f64| {
        let c = chi.eval(p);
        if c == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(c * asymptotic_sum_with(&alphas, d, scale * p).re, 0.0)
        }
    };
    let band = (chi.support.lo, chi.support.hi);
    let coarse = psi_integral(a1, a2, phase, band, scale, 1.0, &h).re;
    let fine = psi_integral(a1, a2, phase, band, scale, 2.0, &h).re;
    let size = scale.powf((1.0 - d as f64) / 2.0);
    if (coarse - fine).abs() > 1e-6 * fine.abs().max(1e-8 * size) {
        return Err(Error::Resolution(format!(
            "kernel quadrature unresolved at j = {} (t = ({t1}, {t2}), rho = ({rho1}, {rho2}))",
            piece.j
        )));
    }
    Ok(surface_measure(n1 - 1) * surface_measure(n2 - 1) * fine)
}

/// `2^{j(1-d)/2} min{1,(2^{-j}ρ₁t₁)^{-(d-k-1)/2}} min{1,(2^{-j}ρ₂t₂)^{-(k-1)/2}}`.
pub fn kj_bound(
    piece: &DyadicPiece,
    dims: Dimensions,
    t1: f64,
    t2: f64,
    rho1: f64,
    rho2: f64,
) -> f64 {
    let s = 2f64.powi(-(piece.j as i32));
    let f = |x: f64, n: usize| (s * x).powf(-(n as f64 - 1.0) / 2.0).min(1.0);
    s.powf((dims.d as f64 - 1.0) / 2.0) * f(rho1 * t1, dims.dk()) * f(rho2 * t2, dims.k)
}

/// `m(r) = ∫ φ(ρ) ρ^{d-1} 𝒥_d(rρ) dρ`, the Fourier multiplier of a radial
/// convolution kernel, tabulated on `[1/2, 3/2]` where `τ` lives.
#[derive(Debug, Clone)]
pub struct MultiplierTable {
    grid: RadialGrid,
    values: Vec<f64>,
}

impl MultiplierTable {
    fn build(
        d: usize,
        table_h: f64,
        rho_breaks: &[f64],
        phi: &(dyn Fn(f64) -> f64 + Sync),
    ) -> Self {
        let grid =
            RadialGrid::piecewise(&[(0.5, 0.5), (1.5, table_h)], 16).expect("valid table grid");
        let kernel = SphereKernel::new(d).expect("d >= 1");
        let gl = gauss_legendre(20);
        let mut rho = Vec::new();
        for pair in rho_breaks.windows(2) {
            let half = 0.5 * (pair[1] - pair[0]);
            for (&t, &w) in gl.nodes.iter().zip(&gl.weights) {
                let x = pair[0] + half * (t + 1.0);
                rho.push((x, w * half * phi(x) * x.powi(d as i32 - 1)));
            }
        }
        let values = grid
            .nodes()
            .par_iter()
            .map(|&r| {
                if r < 0.5 {
                    0.0
                } else {
                    rho.iter().map(|&(x, w)| w * kernel.eval(r * x)).sum()
                }
            })
            .collect();
        Self { grid, values }
    }

    pub fn eval(&self, r: f64) -> f64 {
        if !(0.5..=1.5).contains(&r) {
            return 0.0;
        }
        self.grid.interpolate(&self.values, r)
    }
}

fn rho_breaks(lo: f64, hi: f64, per_panel: f64) -> Vec<f64> {
    let n = ((hi - lo) / per_panel).ceil().max(1.0) as usize;
    (0..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .collect()
}

/// Multiplier of `(2π)^{-d/2} Φ_j ∗`.
pub fn tj_multiplier(piece: &DyadicPiece) -> MultiplierTable {
    let (lo, hi) = piece.support();
    let h = 0.5f64.powi(piece.j as i32 + 1).min(0.05);
    let p = *piece;
    MultiplierTable::build(piece.d(), h, &rho_breaks(lo, hi, 0.6), &move |x| {
        phi_j(&p, x).re
    })
}

/// Upper end of the radial integral for the multiplier of `Φ₀`.
pub const PHI0_CUTOFF: f64 = 2000.0;

/// Multiplier of `(2π)^{-d/2} Φ₀ ∗`.
pub fn t0_multiplier(params: &SphereKernelParams) -> Result<MultiplierTable> {
    if !params.splits_remainder() {
        return Err(Error::Domain(
            "expansion order too small for an integrable remainder".into(),
        ));
    }
    let kernel = SphereKernel::new(params.d)?;
    let p = *params;
    Ok(MultiplierTable::build(
        params.d,
        1.0 / 32.0,
        &rho_breaks(0.0, PHI0_CUTOFF, 0.6),
        &move |x| phi_0(&p, &kernel, x),
    ))
}

/// Frequency grid on `[0, 3/2]` fine enough for multipliers of width `h`.
pub fn band_grid(h: f64) -> Arc<RadialGrid> {
    Arc::new(RadialGrid::piecewise(&[(1.5, h)], 16).expect("valid band grid"))
}

/// `𝓕^{-1}(m τ f̂)` for a multiplier table, back on the grids of `f`.
pub fn apply_band_multiplier(
    f: &BlockRadialProfile,
    m: &MultiplierTable,
    h: f64,
) -> BlockRadialProfile {
    let freq = band_grid(h);
    let t = tau();
    let f_hat = transform_to(f, Arc::clone(&freq), freq);
    let weighted = f_hat.map(|a, b, v| {
        let r = (a * a + b * b).sqrt();
        v * (t.eval(r) * m.eval(r))
    });
    transform_to(&weighted, Arc::clone(&f.grid1), Arc::clone(&f.grid2))
}

fn frequency_width(j: u32) -> f64 {
    0.5f64.powi(j as i32 + 1).min(1.0 / 32.0)
}

/// `T_j f = (2π)^{-d/2} Φ_j ∗ (τ(|D|) f)` evaluated through its multiplier.
pub fn apply_tj(f: &BlockRadialProfile, piece: &DyadicPiece) -> Result<BlockRadialProfile> {
    if f.dims.d != piece.d() {
        return Err(Error::Domain(
            "piece and profile dimensions disagree".into(),
        ));
    }
    let m = tj_multiplier(piece);
    Ok(apply_band_multiplier(f, &m, frequency_width(piece.j)))
}

/// `T₀ f = (2π)^{-d/2} Φ₀ ∗ (τ(|D|) f)`.
pub fn apply_t0(
    f: &BlockRadialProfile,
    params: &SphereKernelParams,
    h: f64,
) -> Result<BlockRadialProfile> {
    if f.dims.d != params.d {
        return Err(Error::Domain(
            "kernel and profile dimensions disagree".into(),
        ));
    }
    let m = t0_multiplier(params)?;
    Ok(apply_band_multiplier(f, &m, h))
}

/// `τ(|D|) f` with a frequency grid on the support of `τ`.
pub fn apply_tau(f: &BlockRadialProfile) -> BlockRadialProfile {
    let freq = band_grid(0.05);
    let t = tau();
    let f_hat = transform_to(f, Arc::clone(&freq), freq);
    let weighted = f_hat.map(|a, b, v| v * t.eval((a * a + b * b).sqrt()));
    transform_to(&weighted, Arc::clone(&f.grid1), Arc::clone(&f.grid2))
}

/// `T_j f` at one output point from the kernel, given `g = τ(|D|)f`.
pub fn apply_tj_kernel_at(
    g: &BlockRadialProfile,
    piece: &DyadicPiece,
    t1: f64,
    t2: f64,
) -> Result<Complex64> {
    let dims = g.dims;
    let (lo, hi) = piece.support();
    let (w1, w2) = (g.grid1.weights(), g.grid2.weights());
    let (r1, r2) = (g.grid1.nodes(), g.grid2.nodes());
    let pairs: Vec<(usize, usize)> = (0..g.n1())
        .flat_map(|i| (0..g.n2()).map(move |k| (i, k)))
        .filter(|&(i, k)| {
            // |x - y| ranges over [|t - ρ|, t + ρ] blockwise
            let near = ((t1 - r1[i]).powi(2) + (t2 - r2[k]).powi(2)).sqrt();
            let far = ((t1 + r1[i]).powi(2) + (t2 + r2[k]).powi(2)).sqrt();
            far >= lo && near <= hi && w1[i] * w2[k] != 0.0
        })
        .collect();
    let sum = pairs
        .par_iter()
        .map(|&(i, k)| {
            let kv = kernel_kj(piece, dims, t1, t2, r1[i], r2[k])?;
            let meas =
                r1[i].powi(dims.dk() as i32 - 1) * r2[k].powi(dims.k as i32 - 1) * w1[i] * w2[k];
            Ok(g.at(i, k) * (kv * meas))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum::<Complex64>();
    Ok(sum * (2.0 * PI).powf(-(dims.d as f64) / 2.0))
}

/// `T_j f` on explicit output grids by weighted quadrature against `K_j`.
///
/// Refuses when `|out| · |in|` exceeds `budget` kernel evaluations.
pub fn apply_tj_kernel(
    f: &BlockRadialProfile,
    piece: &DyadicPiece,
    out1: Arc<RadialGrid>,
    out2: Arc<RadialGrid>,
    budget: usize,
) -> Result<BlockRadialProfile> {
    let cost = out1.len() * out2.len() * f.n1() * f.n2();
    if cost > budget {
        return Err(Error::Budget(format!(
            "{cost} kernel evaluations requested, budget is {budget}"
        )));
    }
    let g = apply_tau(f);
    let mut values = Vec::with_capacity(out1.len() * out2.len());
    for &t1 in out1.nodes() {
        for &t2 in out2.nodes() {
            values.push(apply_tj_kernel_at(&g, piece, t1, t2)?);
        }
    }
    Ok(BlockRadialProfile {
        dims: f.dims,
        grid1: out1,
        grid2: out2,
        values,
    })
}

/// One evaluated point of a kernel-bound sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelRow {
    pub d: usize,
    pub k: usize,
    pub j: u32,
    pub t1: f64,
    pub t2: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub kernel: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Fitted constant and exceedance of a ratio sweep.
#[derive(Debug, Clone)]
pub struct RatioReport {
    pub rows: Vec<KernelRow>,
    pub c_star: f64,
    pub exceedance: f64,
}

impl RatioReport {
    pub fn write_csv(&self, out: impl std::io::Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Calibration subset `j ≤ 2` for the kernel bound.
pub const KERNEL_CALIBRATION_J: u32 = 2;

/// Evaluates `|K_j| / bound` at every `(j, t₁, t₂, ρ₁, ρ₂)`; the constant is
/// fitted on `j ≤ 2` and the exceedance is the max ratio over it.
pub fn check_kj_bound(
    dims: Dimensions,
    order: usize,
    points: &[(u32, f64, f64, f64, f64)],
) -> Result<RatioReport> {
    if points.is_empty() {
        return Err(Error::Domain("empty sweep".into()));
    }
    let rows = points
        .par_iter()
        .map(|&(j, t1, t2, r1, r2)| {
            let piece = DyadicPiece::new(dims.d, j, order)?;
            let kernel = kernel_kj(&piece, dims, t1, t2, r1, r2)?;
            let bound = kj_bound(&piece, dims, t1, t2, r1, r2);
            Ok(KernelRow {
                d: dims.d,
                k: dims.k,
                j,
                t1,
                t2,
                rho1: r1,
                rho2: r2,
                kernel,
                bound,
                ratio: kernel.abs() / bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let calib = rows.iter().filter(|r| r.j <= KERNEL_CALIBRATION_J);
    let c_star = calib.map(|r| r.ratio).fold(0.0, f64::max);
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let exceedance = if c_star > 0.0 {
        max_ratio / c_star
    } else if rows.len() == 1 || max_ratio == 0.0 {
        1.0
    } else {
        f64::INFINITY
    };
    Ok(RatioReport {
        rows,
        c_star,
        exceedance,
    })
}

/// Per-`j` ratios of the `T_j` scaling laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRow {
    pub j: u32,
    /// `max_f ‖T_j f‖₂ / (2^{j/2} ‖f‖_{p_ST})`.
    pub l2_ratio: f64,
    /// `max_f ‖T_j f‖_{p',∞} / (2^{j((1+d)/2-d/p)} ‖f‖_{p,1})`.
    pub lorentz_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct ScalingReport {
    pub p_st: f64,
    pub p: f64,
    pub rows: Vec<ScalingRow>,
}

impl ScalingReport {
    fn spread(v: impl Iterator<Item = f64>) -> f64 {
        let v: Vec<f64> = v.collect();
        let hi = v.iter().copied().fold(0.0, f64::max);
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        if hi == 0.0 {
            1.0
        } else {
            hi / lo
        }
    }

    pub fn l2_spread(&self) -> f64 {
        Self::spread(self.rows.iter().map(|r| r.l2_ratio))
    }

    pub fn lorentz_spread(&self) -> f64 {
        Self::spread(self.rows.iter().map(|r| r.lorentz_ratio))
    }

    /// Growth across `j` beyond a factor 2 in either ratio.
    pub fn non_uniform(&self) -> bool {
        self.l2_spread() >= 2.0 || self.lorentz_spread() >= 2.0
    }

    pub fn write_csv(&self, out: impl std::io::Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Default Lorentz exponent `p = 2m/(m+1)` with `m = min(k, d-k)`.
pub fn default_lorentz_exponent(dims: Dimensions) -> f64 {
    let m = dims.m() as f64;
    2.0 * m / (m + 1.0)
}

/// Tabulates both scaling ratios for `j` in `js` over the family.
pub fn check_tj_scaling(
    family: &[BlockRadialProfile],
    js: std::ops::RangeInclusive<u32>,
    order: usize,
    p: f64,
) -> Result<ScalingReport> {
    let first = family
        .first()
        .ok_or_else(|| Error::Domain("empty family".into()))?;
    let dims = first.dims;
    let p_st = dims.p_st();
    let p_dual = p / (p - 1.0);
    let mut rows = Vec::new();
    for j in js {
        let piece = DyadicPiece::new(dims.d, j, order)?;
        let m = tj_multiplier(&piece);
        let (mut l2, mut lor) = (0.0f64, 0.0f64);
        for f in family {
            let tf = apply_band_multiplier(f, &m, frequency_width(j));
            let n_st = lebesgue_norm(f, p_st);
            let n_p1 = lorentz_norm(f, LorentzSpec::strong(p));
            if n_st > 0.0 {
                l2 = l2.max(lebesgue_norm(&tf, 2.0) / (2f64.powf(j as f64 / 2.0) * n_st));
            }
            if n_p1 > 0.0 {
                let e = (1.0 + dims.d as f64) / 2.0 - dims.d as f64 / p;
                let weak = lorentz_norm(&tf, LorentzSpec::weak(p_dual));
                lor = lor.max(weak / (2f64.powf(j as f64 * e) * n_p1));
            }
        }
        rows.push(ScalingRow {
            j,
            l2_ratio: l2,
            lorentz_ratio: lor,
        });
    }
    Ok(ScalingReport { p_st, p, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::gaussian;
    use crate::specfun::sphere_kernel;

    fn dims(d: usize, k: usize) -> Dimensions {
        Dimensions::new(d, k).unwrap()
    }

    fn grid(r: f64, panels: usize, order: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::uniform(r, panels, order).unwrap())
    }

    #[test]
    fn constant_restriction_gives_sphere_kernel() {
        for &(d, k) in &[(4, 2), (5, 2), (3, 1), (6, 3)] {
            let dm = dims(d, k);
            let g = grid(16.0, 24, 17);
            // f̂(ξ) = e^{(1-|ξ|²)/8} equals 1 on the sphere; f is a Gaussian
            let c = 4f64.powf(d as f64 / 2.0) * (0.125f64).exp();
            let f = BlockRadialProfile::from_real_fn(dm, g.clone(), g.clone(), |a, b| {
                c * (-2.0 * (a * a + b * b)).exp()
            });
            let tf = extend(&f).unwrap();
            let mut err = 0.0f64;
            for (i, &a) in g.nodes().iter().enumerate().step_by(7) {
                for (k2, &b) in g.nodes().iter().enumerate().step_by(7) {
                    let want = sphere_kernel(d, (a * a + b * b).sqrt()).unwrap();
                    err = err.max((tf.at(i, k2) - want).norm());
                }
            }
            assert!(err < 1e-5, "(d, k) = ({d}, {k}): {err}");
        }
    }

    #[test]
    fn zero_profile_extends_to_zero() {
        let dm = dims(4, 2);
        let g = grid(8.0, 8, 9);
        let f = BlockRadialProfile::zeros(dm, g.clone(), g);
        assert!(extend(&f).unwrap().values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn extension_is_symmetric() {
        let dm = dims(4, 2);
        let g = grid(16.0, 24, 17);
        let f = gaussian(dm, g.clone(), g.clone());
        let h = BlockRadialProfile::from_real_fn(dm, g.clone(), g.clone(), |a, b| {
            (-(a * a) - 0.3 * b * b).exp() * (1.0 + 0.5 * a)
        });
        let lhs = extend(&f).unwrap().inner(&h);
        let rhs = f.inner(&extend(&h).unwrap());
        assert!((lhs - rhs).norm() < 1e-6 * lhs.norm(), "{lhs} {rhs}");
    }

    #[test]
    fn extension_at_radius_two_matches_angular_oracle() {
        let dm = dims(4, 2);
        let g = grid(16.0, 24, 17);
        let f = gaussian(dm, g.clone(), g.clone());
        let e = extend_at_radius(&f, 2.0).unwrap();
        let rule = gauss_legendre(200).mapped(0.0, PI / 2.0);
        let k2 = SphereKernel::new(2).unwrap();
        for &(i, k) in &[(0usize, 0usize), (10, 30), (50, 20), (100, 100)] {
            let (t1, t2) = (g.nodes()[i], g.nodes()[k]);
            let want = (-2.0f64).exp()
                * rule.integrate(|th| {
                    k2.eval(2.0 * t1 * th.cos())
                        * k2.eval(2.0 * t2 * th.sin())
                        * th.cos()
                        * th.sin()
                });
            assert!((e.at(i, k).re - want).abs() < 1e-6, "{} {want}", e.at(i, k));
        }
        let e1 = extend_at_radius(&f, 1.0).unwrap();
        assert_eq!(e1, extend(&f).unwrap());
    }

    #[test]
    fn dyadic_piece_support_and_size() {
        for &d in &[3usize, 4, 5] {
            for j in 1..=6u32 {
                let p = DyadicPiece::new(d, j, 3).unwrap();
                let s = 2f64.powi(j as i32);
                assert_eq!(phi_j(&p, s / 4.0), Complex64::new(0.0, 0.0));
                assert_eq!(phi_j(&p, 2.01 * s), Complex64::new(0.0, 0.0));
                let size = s.powf((1.0 - d as f64) / 2.0);
                let mx = (0..400)
                    .map(|i| phi_j(&p, s * (0.5 + 1.5 * i as f64 / 400.0)).norm())
                    .fold(0.0, f64::max);
                assert!(mx <= 2.0 * size, "d = {d} j = {j}: {mx} vs {size}");
            }
        }
        assert!(DyadicPiece::new(4, 0, 3).is_err());
        assert!(DyadicPiece::new(4, 1, 1).is_err());
    }

    #[test]
    fn dyadic_sum_reconstructs_far_field() {
        let (d, order) = (4usize, 2usize);
        let pieces: Vec<_> = (1..=10)
            .map(|j| DyadicPiece::new(d, j, order).unwrap())
            .collect();
        let mut worst = 0.0f64;
        for i in 0..200 {
            let rho = 4.0 + 496.0 * i as f64 / 199.0;
            let sum: f64 = pieces.iter().map(|p| phi_j(p, rho).re).sum();
            let resid = (sphere_kernel(d, rho).unwrap() - sum).abs();
            worst = worst.max(resid / rho.powf((1.0 - d as f64) / 2.0 - order as f64));
        }
        assert!(worst < 1.0, "{worst}");
    }

    #[test]
    fn kernel_vanishes_at_origin_and_bound_saturates() {
        let dm = dims(4, 2);
        let p = DyadicPiece::new(4, 3, 3).unwrap();
        assert_eq!(kernel_kj(&p, dm, 0.0, 0.0, 0.0, 0.0).unwrap(), 0.0);
        assert!((kj_bound(&p, dm, 0.0, 5.0, 3.0, 0.0) - 8f64.powf(-1.5)).abs() < 1e-15);
        assert!(kernel_kj(&p, dims(4, 1), 1.0, 1.0, 1.0, 1.0).is_err());
    }

    // Φ_j(|x - y|) integrated over circle × circle by the trapezoid rule
    fn circle_oracle(p: &DyadicPiece, t1: f64, t2: f64, r1: f64, r2: f64) -> f64 {
        let n = 512;
        let h = 2.0 * PI / n as f64;
        let mut acc = 0.0;
        for a in 0..n {
            let (ca, sa) = ((a as f64 * h + 0.3).cos(), (a as f64 * h + 0.3).sin());
            for b in 0..n {
                let (cb, sb) = ((b as f64 * h).cos(), (b as f64 * h).sin());
                let dx = (t1 - r1 * ca).powi(2) + (r1 * sa).powi(2);
                let dy = (t2 - r2 * cb).powi(2) + (r2 * sb).powi(2);
                acc += phi_j(p, (dx + dy).sqrt()).re;
            }
        }
        acc * h * h
    }

    #[test]
    fn kernel_matches_double_circle_quadrature() {
        let dm = dims(4, 2);
        for &(j, t1, t2, r1, r2) in &[
            (1u32, 1.0, 0.7, 1.5, 0.4),
            (2, 2.5, 1.0, 1.0, 3.0),
            (3, 4.0, 3.0, 5.0, 2.0),
        ] {
            let p = DyadicPiece::new(4, j, 3).unwrap();
            let k = kernel_kj(&p, dm, t1, t2, r1, r2).unwrap();
            let o = circle_oracle(&p, t1, t2, r1, r2);
            assert!(
                (k - o).abs() < 1e-5 * o.abs().max(1e-3),
                "j = {j}: {k} vs {o}"
            );
        }
    }

    #[test]
    fn kernel_and_multiplier_paths_agree() {
        let dm = dims(4, 2);
        let g = grid(8.0, 4, 13);
        let f = gaussian(dm, g.clone(), g.clone());
        let p = DyadicPiece::new(4, 1, 3).unwrap();
        let via_m = apply_tj(&f, &p).unwrap();
        let tau_f = apply_tau(&f);
        for &(i, k) in &[(3usize, 5usize), (12, 2)] {
            let (t1, t2) = (g.nodes()[i], g.nodes()[k]);
            let v = apply_tj_kernel_at(&tau_f, &p, t1, t2).unwrap();
            let w = via_m.at(i, k);
            assert!(
                (v - w).norm() < 1e-4 * via_m.values.iter().map(|x| x.norm()).fold(0.0, f64::max),
                "{v} {w}"
            );
        }
    }

    #[test]
    fn tj_is_linear_and_kills_zero() {
        let dm = dims(4, 2);
        let g = grid(12.0, 12, 13);
        let f = gaussian(dm, g.clone(), g.clone());
        let h = BlockRadialProfile::from_real_fn(dm, g.clone(), g.clone(), |a, b| {
            (-(a * a + 2.0 * b * b)).exp()
        });
        let p = DyadicPiece::new(4, 2, 3).unwrap();
        let lhs = apply_tj(&f.add(&h), &p).unwrap();
        let rhs = apply_tj(&f, &p).unwrap().add(&apply_tj(&h, &p).unwrap());
        let scale = lhs.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(lhs
            .values
            .iter()
            .zip(&rhs.values)
            .all(|(a, b)| (a - b).norm() <= 1e-10 * scale));
        let z = BlockRadialProfile::zeros(dm, g.clone(), g);
        assert!(apply_tj(&z, &p)
            .unwrap()
            .values
            .iter()
            .all(|v| v.norm() == 0.0));
        assert!(apply_tj_kernel(&f, &p, grid(1.0, 1, 3), grid(1.0, 1, 3), 10).is_err());
    }

    #[test]
    fn single_point_kernel_report() {
        let r = check_kj_bound(dims(4, 2), 3, &[(3, 4.0, 3.0, 5.0, 2.0)]).unwrap();
        assert_eq!(r.exceedance, 1.0);
    }

    #[test]
    fn scaling_exponents_and_zero_family() {
        assert!((dims(4, 2).p_st() - 1.5).abs() < 1e-15);
        let d5 = dims(5, 2);
        let p = default_lorentz_exponent(d5);
        assert!((p - 4.0 / 3.0).abs() < 1e-15);
        let e = (1.0 + 5.0) / 2.0 - 5.0 / p;
        assert!((e + 0.75).abs() < 1e-15);
        let g = grid(8.0, 8, 9);
        let z = BlockRadialProfile::zeros(dims(4, 2), g.clone(), g);
        let r = check_tj_scaling(&[z], 1..=2, 3, 4.0 / 3.0).unwrap();
        assert!(r
            .rows
            .iter()
            .all(|row| row.l2_ratio == 0.0 && row.lorentz_ratio == 0.0));
    }
}
