//! Fourier transform of block-radial functions as two separable Hankel
//! passes, restriction to spheres and radial Fourier multipliers.

use std::f64::consts::FRAC_PI_4;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lap::SymbolModel;
use crate::profile::{BlockRadialProfile, Dimensions, RadialGrid};
use crate::quadrature::gauss_jacobi;
use crate::specfun::SphereKernel;

/// Default number of angular nodes on the sphere.
pub const SPHERE_NODES: usize = 64;

/// `K[i, j] = 𝒥_l(out_i·ρ_j)·ρ_j^{l-1}·w_j` for the block of dimension `l`.
pub fn hankel_matrix(l: usize, out: &[f64], grid_in: &RadialGrid) -> DMatrix<f64> {
    let kernel = SphereKernel::new(l).expect("block dimension >= 1");
    let col_w: Vec<f64> = grid_in
        .nodes()
        .iter()
        .zip(grid_in.weights())
        .map(|(&r, &w)| r.powi(l as i32 - 1) * w)
        .collect();
    let n_in = grid_in.len();
    let rows: Vec<f64> = out
        .par_iter()
        .flat_map_iter(|&t| {
            let kernel = &kernel;
            grid_in.nodes().iter().zip(&col_w).map(move |(&r, &w)| {
                if w == 0.0 {
                    0.0
                } else {
                    kernel.eval(t * r) * w
                }
            })
        })
        .collect();
    DMatrix::from_row_slice(out.len(), n_in, &rows)
}

fn split(f: &BlockRadialProfile) -> (DMatrix<f64>, DMatrix<f64>) {
    let (n1, n2) = (f.n1(), f.n2());
    let re = DMatrix::from_fn(n1, n2, |i, j| f.values[i * n2 + j].re);
    let im = DMatrix::from_fn(n1, n2, |i, j| f.values[i * n2 + j].im);
    (re, im)
}

fn join(re: &DMatrix<f64>, im: &DMatrix<f64>) -> Vec<Complex64> {
    let (n1, n2) = re.shape();
    let mut v = Vec::with_capacity(n1 * n2);
    for i in 0..n1 {
        for j in 0..n2 {
            v.push(Complex64::new(re[(i, j)], im[(i, j)]));
        }
    }
    v
}

fn budget_check(grid_in: &RadialGrid, r_out: f64, axis: &str) {
    let h = grid_in.max_spacing();
    if h * r_out > FRAC_PI_4 * 1.0001 {
        log::warn!(
            "{axis}: node spacing {h:.4} exceeds pi/(4*{r_out}); kernel may be under-resolved"
        );
    }
}

/// Hankel pair on explicit output grids. Forward and inverse transforms
/// share this kernel because `𝒥` is real and even.
pub fn transform_to(
    f: &BlockRadialProfile,
    out1: Arc<RadialGrid>,
    out2: Arc<RadialGrid>,
) -> BlockRadialProfile {
    budget_check(&f.grid1, out1.r_max(), "first block");
    budget_check(&f.grid2, out2.r_max(), "second block");
    let k1 = hankel_matrix(f.dims.dk(), out1.nodes(), &f.grid1);
    let k2 = hankel_matrix(f.dims.k, out2.nodes(), &f.grid2);
    let (re, im) = split(f);
    let k2t = k2.transpose();
    let out_re = &k1 * re * &k2t;
    let out_im = if f.values.iter().all(|v| v.im == 0.0) {
        DMatrix::zeros(out1.len(), out2.len())
    } else {
        &k1 * im * &k2t
    };
    BlockRadialProfile {
        dims: f.dims,
        grid1: out1,
        grid2: out2,
        values: join(&out_re, &out_im),
    }
}

/// `f̂₀` on the input grids.
pub fn forward_transform(f: &BlockRadialProfile) -> BlockRadialProfile {
    transform_to(f, Arc::clone(&f.grid1), Arc::clone(&f.grid2))
}

/// `𝓕^{-1}` on the input grids.
pub fn inverse_transform(f_hat: &BlockRadialProfile) -> BlockRadialProfile {
    forward_transform(f_hat)
}

/// Angular rule on `[0, π/2]` whose weights include `cos^{d-k-1}θ sin^{k-1}θ`.
///
/// With `x = cos 2θ` the weight becomes the Jacobi weight
/// `(1-x)^{(k-2)/2} (1+x)^{(d-k-2)/2}` up to the factor `2^{-(d-4)/2}/4`.
pub fn sphere_rule(dims: Dimensions, n: usize) -> (Vec<f64>, Vec<f64>) {
    let a = (dims.k as f64 - 2.0) / 2.0;
    let b = (dims.dk() as f64 - 2.0) / 2.0;
    let gj = gauss_jacobi(n, a, b);
    let c = 2f64.powf(-(dims.d as f64 - 4.0) / 2.0) / 4.0;
    let theta = gj.nodes.iter().map(|x| 0.5 * x.acos()).collect();
    let w = gj.weights.iter().map(|w| w * c).collect();
    (theta, w)
}

/// `f̂₀(r cos θ_i, r sin θ_i)` at the angular nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRestriction {
    pub dims: Dimensions,
    pub radius: f64,
    pub theta: Vec<f64>,
    pub weights: Vec<f64>,
    pub values: Vec<Complex64>,
}

/// Restriction of `f̂` to the sphere of radius `radius` with `n` angular nodes.
pub fn restrict_at_radius(
    f_hat: &BlockRadialProfile,
    radius: f64,
    n: usize,
) -> Result<SphereRestriction> {
    if f_hat.grid1.r_max() < radius || f_hat.grid2.r_max() < radius {
        return Err(Error::Coverage(format!(
            "grid extends to ({}, {}) but the sphere has radius {radius}",
            f_hat.grid1.r_max(),
            f_hat.grid2.r_max()
        )));
    }
    let (theta, weights) = sphere_rule(f_hat.dims, n);
    let values = theta
        .iter()
        .map(|&t: &f64| f_hat.eval(radius * t.cos(), radius * t.sin()))
        .collect();
    Ok(SphereRestriction {
        dims: f_hat.dims,
        radius,
        theta,
        weights,
        values,
    })
}

pub fn restrict_to_sphere(f_hat: &BlockRadialProfile) -> Result<SphereRestriction> {
    restrict_at_radius(f_hat, 1.0, SPHERE_NODES)
}

impl SphereRestriction {
    /// Restriction of a function given in closed form on the unit sphere.
    pub fn from_fn<F: Fn(f64, f64) -> Complex64>(dims: Dimensions, n: usize, f: F) -> Self {
        let (theta, weights) = sphere_rule(dims, n);
        let values = theta.iter().map(|t: &f64| f(t.cos(), t.sin())).collect();
        Self {
            dims,
            radius: 1.0,
            theta,
            weights,
            values,
        }
    }
}

/// `∫_{S^{d-1}} |f̂|² dσ` (unit radius measure).
pub fn sphere_l2(restriction: &SphereRestriction) -> f64 {
    restriction.dims.c_dk()
        * restriction
            .weights
            .iter()
            .zip(&restriction.values)
            .map(|(w, v)| w * v.norm_sqr())
            .sum::<f64>()
}

/// `𝓕^{-1}(φ(|·|) 𝓕f)` with the frequency side sampled on the given grids.
pub fn apply_complex_multiplier_via<F>(
    f: &BlockRadialProfile,
    phi: F,
    freq1: Arc<RadialGrid>,
    freq2: Arc<RadialGrid>,
) -> BlockRadialProfile
where
    F: Fn(f64) -> Complex64,
{
    let f_hat = transform_to(f, freq1, freq2);
    let weighted = f_hat.map(|a, b, v| v * phi((a * a + b * b).sqrt()));
    transform_to(&weighted, Arc::clone(&f.grid1), Arc::clone(&f.grid2))
}

pub fn apply_complex_multiplier<F: Fn(f64) -> Complex64>(
    f: &BlockRadialProfile,
    phi: F,
) -> BlockRadialProfile {
    apply_complex_multiplier_via(f, phi, Arc::clone(&f.grid1), Arc::clone(&f.grid2))
}

/// `φ(|D|)f` for a real multiplier.
pub fn apply_multiplier<F: Fn(f64) -> f64>(f: &BlockRadialProfile, phi: F) -> BlockRadialProfile {
    apply_complex_multiplier(f, |r| Complex64::new(phi(r), 0.0))
}

/// `P(|D|)u`.
pub fn apply_symbol(u: &BlockRadialProfile, symbol: &SymbolModel) -> BlockRadialProfile {
    apply_multiplier(u, |r| symbol.eval(r))
}

/// `P(|D|)u` with the frequency side sampled on the given grids.
pub fn apply_symbol_via(
    u: &BlockRadialProfile,
    symbol: &SymbolModel,
    freq1: Arc<RadialGrid>,
    freq2: Arc<RadialGrid>,
) -> BlockRadialProfile {
    apply_complex_multiplier_via(u, |r| Complex64::new(symbol.eval(r), 0.0), freq1, freq2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::tau;
    use crate::profile::{gaussian, lebesgue_norm};
    use crate::quadrature::gauss_legendre;
    use crate::specfun::{sphere_kernel, surface_measure};

    fn dims(d: usize, k: usize) -> Dimensions {
        Dimensions::new(d, k).unwrap()
    }

    fn grid() -> Arc<RadialGrid> {
        Arc::new(RadialGrid::uniform(12.0, 16, 16).unwrap())
    }

    fn max_abs_diff(a: &BlockRadialProfile, b: &BlockRadialProfile) -> f64 {
        a.values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn gaussian_is_fixed_point() {
        for (d, k) in [(3, 1), (4, 2), (5, 2), (6, 3), (2, 1)] {
            let f = gaussian(dims(d, k), grid(), grid());
            let fh = forward_transform(&f);
            assert!(max_abs_diff(&f, &fh) < 1e-6, "d {d} k {k}");
            let l2 = lebesgue_norm(&fh, 2.0);
            assert!((l2 - lebesgue_norm(&f, 2.0)).abs() < 1e-6 * l2);
            let back = inverse_transform(&fh);
            assert!(lebesgue_norm(&back.sub(&f), 2.0) < 1e-6 * l2);
        }
    }

    #[test]
    fn one_dimensional_pass_matches_line_quadrature() {
        // oracle for the l = 3 Hankel pass of e^{-ρ²/2}: 1D quadrature of ∫ ρ² e^{-ρ²/2} 𝒥_3(tρ) dρ
        let g = grid();
        let t = [0.5, 2.0, 5.0];
        let k = hankel_matrix(3, &t, &g);
        let rule = gauss_legendre(200).mapped(0.0, 15.0);
        for (i, &ti) in t.iter().enumerate() {
            let got: f64 = (0..g.len())
                .map(|j| k[(i, j)] * (-g.nodes()[j].powi(2) / 2.0).exp())
                .sum();
            let want = rule
                .integrate(|r| r * r * (-r * r / 2.0).exp() * sphere_kernel(3, ti * r).unwrap());
            assert!((got - want).abs() < 1e-10);
            assert!((got - (-ti * ti / 2.0).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        let z = BlockRadialProfile::zeros(dims(4, 2), grid(), grid());
        assert!(forward_transform(&z).values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn separable_matches_direct_tensor_quadrature() {
        let g = Arc::new(RadialGrid::uniform(8.0, 2, 16).unwrap());
        assert_eq!(g.len(), 31);
        let dd = dims(5, 2);
        let f = BlockRadialProfile::from_real_fn(dd, g.clone(), g.clone(), |a, b| {
            (-a * a - 0.5 * b * b).exp() * (1.0 + a * b)
        });
        let fh = forward_transform(&f);
        let k1 = SphereKernel::new(3).unwrap();
        let k2 = SphereKernel::new(2).unwrap();
        for &(i1, i2) in &[(0, 0), (3, 7), (10, 2), (20, 25)] {
            let (t1, t2) = (g.nodes()[i1], g.nodes()[i2]);
            let mut s = 0.0;
            for (a, (&r1, &w1)) in g.nodes().iter().zip(g.weights()).enumerate() {
                for (b, (&r2, &w2)) in g.nodes().iter().zip(g.weights()).enumerate() {
                    s += f.at(a, b).re
                        * k1.eval(t1 * r1)
                        * k2.eval(t2 * r2)
                        * r1
                        * r1
                        * r2
                        * w1
                        * w2;
                }
            }
            assert!((fh.at(i1, i2).re - s).abs() < 1e-9);
        }
    }

    #[test]
    fn real_even_profile_has_real_transform() {
        let f = gaussian(dims(4, 2), grid(), grid());
        let fh = forward_transform(&f);
        assert!(fh.values.iter().all(|v| v.im.abs() < 1e-10));
    }

    #[test]
    fn restriction_of_gaussian() {
        for (d, k) in [(3, 1), (4, 2), (5, 2)] {
            let f = gaussian(dims(d, k), grid(), grid());
            let r = restrict_to_sphere(&f).unwrap();
            assert!(r.theta.len() >= 64);
            let c = (-0.5f64).exp();
            assert!(r.values.iter().all(|v| (v.re - c).abs() < 1e-6));
            let l2 = sphere_l2(&r);
            assert!((l2 - (-1.0f64).exp() * surface_measure(d)).abs() < 1e-6);
        }
        let r = restrict_to_sphere(&gaussian(dims(4, 2), grid(), grid())).unwrap();
        assert!(
            (sphere_l2(&r) - (-1.0f64).exp() * 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-6
        );
        let small = Arc::new(RadialGrid::uniform(0.9, 1, 8).unwrap());
        let f = gaussian(dims(4, 2), small.clone(), small);
        assert!(matches!(restrict_to_sphere(&f), Err(Error::Coverage(_))));
    }

    #[test]
    fn sphere_l2_of_constants() {
        for (d, k) in [(2, 1), (3, 1), (4, 2), (5, 2), (6, 3), (5, 4)] {
            let r = SphereRestriction::from_fn(dims(d, k), 64, |_, _| Complex64::new(3.0, 0.0));
            assert!((sphere_l2(&r) - 9.0 * surface_measure(d)).abs() < 1e-12 * surface_measure(d));
        }
    }

    #[test]
    fn multipliers() {
        let dd = dims(4, 2);
        let f = gaussian(dd, grid(), grid());
        let id = apply_multiplier(&f, |_| 1.0);
        assert!(max_abs_diff(&id, &f) < 1e-6);
        let lap = apply_multiplier(&f, |r| r * r);
        let want = f.map(|a, b, v| v * (4.0 - a * a - b * b));
        assert!(max_abs_diff(&lap, &want) < 1e-5);
        let helm = apply_symbol(&f, &SymbolModel::helmholtz());
        let want = f.map(|a, b, v| v * (3.0 - a * a - b * b));
        assert!(max_abs_diff(&helm, &want) < 1e-5);
        let frac = SymbolModel::new("fractional 2".parse().unwrap()).unwrap();
        assert!(max_abs_diff(&apply_symbol(&f, &frac), &want) < 1e-5);
        // τ = 1 near the unit sphere leaves the restriction unchanged
        let t = tau();
        let fq =
            Arc::new(RadialGrid::piecewise(&[(0.4, 0.4), (1.6, 0.05), (12.0, 0.75)], 16).unwrap());
        let fh = transform_to(&f, fq.clone(), fq);
        let tfh = fh.map(|a, b, v| v * t.eval((a * a + b * b).sqrt()));
        let a = restrict_to_sphere(&tfh).unwrap();
        let b = restrict_to_sphere(&fh).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).norm() < 1e-6, "{}", (x - y).norm());
        }
    }

    #[test]
    fn plancherel_battery() {
        let dd = dims(5, 2);
        for i in 0..20 {
            let a = 0.6 + 0.05 * i as f64;
            let b = 1.3 - 0.03 * i as f64;
            let f = BlockRadialProfile::from_real_fn(dd, grid(), grid(), move |x, y| {
                (-a * x * x - b * y * y).exp() * (1.0 + (i % 3) as f64 * x * x)
            });
            let n = lebesgue_norm(&f, 2.0);
            let nh = lebesgue_norm(&forward_transform(&f), 2.0);
            assert!((n - nh).abs() < 1e-6 * n, "battery member {i}");
        }
    }
}
