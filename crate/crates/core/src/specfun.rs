//! Bessel functions of the first kind, the sphere kernel `𝒥_d` and its
//! large-argument structure.
//!
//! `𝒥_d(r) = (2π)^{-d/2} ∫_{S^{d-1}} e^{-i r e·ω} dσ(ω) = r^{(2-d)/2} J_{(d-2)/2}(r)`,
//! i.e. the dimensional constant in front of the Bessel form is exactly 1.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::dyadic::smooth_step;
use crate::error::{Error, Result};
use crate::quadrature::gauss_laguerre;

/// Below this argument the power series is used; above it the Hankel expansion.
pub const SERIES_SWITCH: f64 = 12.0;

const MAX_HANKEL_TERMS: usize = 60;

/// Gamma function; exact products at integers and half-integers.
pub fn gamma(x: f64) -> f64 {
    let twice = 2.0 * x;
    if twice == twice.round() && x > 0.0 && x <= 171.0 {
        let (mut acc, mut y) = if twice as i64 % 2 == 0 {
            (1.0, 1.0)
        } else {
            (PI.sqrt(), 0.5)
        };
        while y < x {
            acc *= y;
            y += 1.0;
        }
        return acc;
    }
    statrs::function::gamma::gamma(x)
}

/// Hausdorff measure of the unit sphere `S^{l-1} ⊂ R^l`.
pub fn surface_measure(l: usize) -> f64 {
    assert!(l >= 1, "sphere dimension must be at least 1");
    let half = l as f64 / 2.0;
    2.0 * PI.powf(half) / gamma(half)
}

/// Hankel-expansion coefficient `a_k(ν) = ∏_{j=1}^{k} (4ν² − (2j−1)²) / (k! 8^k)`.
pub fn hankel_coefficient(nu: f64, k: usize) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut a = 1.0;
    for j in 1..=k {
        let odd = (2 * j - 1) as f64;
        a *= (mu - odd * odd) / (j as f64 * 8.0);
    }
    a
}

/// Precomputed evaluator for `x ↦ x^{-ν} J_ν(x)` and `J_ν(x)` at a fixed order.
#[derive(Debug, Clone)]
pub struct Bessel {
    nu: f64,
    series_scale: f64,
    hankel: Vec<f64>,
    terminates: bool,
}

impl Bessel {
    pub fn new(nu: f64) -> Result<Self> {
        if !(nu >= 0.0) {
            return Err(Error::Domain(format!(
                "Bessel order must be >= 0, got {nu}"
            )));
        }
        Ok(Self::new_unchecked(nu))
    }

    fn new_unchecked(nu: f64) -> Self {
        let mut hankel = Vec::with_capacity(MAX_HANKEL_TERMS);
        let mut terminates = false;
        for k in 0..MAX_HANKEL_TERMS {
            let a = hankel_coefficient(nu, k);
            if a == 0.0 {
                terminates = true;
                break;
            }
            hankel.push(a);
        }
        Self {
            nu,
            series_scale: 1.0 / (2f64.powf(nu) * gamma(nu + 1.0)),
            hankel,
            terminates,
        }
    }

    pub fn order(&self) -> f64 {
        self.nu
    }

    /// `x^{-ν} J_ν(x)` by its power series (entire in `x`).
    fn scaled_series(&self, x: f64) -> f64 {
        let q = 0.25 * x * x;
        let mut term = self.series_scale;
        let mut sum = term;
        let mut k = 0.0;
        loop {
            k += 1.0;
            term *= -q / (k * (k + self.nu));
            sum += term;
            if term.abs() <= 1e-17 * sum.abs().max(1e-300) && k > 0.5 * x {
                break;
            }
            if k > 200.0 {
                break;
            }
        }
        sum
    }

    /// Hankel sums `P` and `Q` with `J_ν(x) = √(2/(πx)) (P cos ω − Q sin ω)`.
    fn hankel_pq(&self, x: f64) -> (f64, f64) {
        let mut p = 0.0;
        let mut q = 0.0;
        let mut xk = 1.0;
        let mut prev = f64::INFINITY;
        for (k, &a) in self.hankel.iter().enumerate() {
            let term = a * xk;
            if !self.terminates && term.abs() > prev && k > 2 {
                break;
            }
            prev = term.abs();
            match k % 4 {
                0 => p += term,
                1 => q += term,
                2 => p -= term,
                _ => q -= term,
            }
            if term.abs() < 1e-17 * p.abs().max(1e-300) {
                break;
            }
            xk /= x;
        }
        (p, q)
    }

    /// `J_ν(x)` for `x ≥ 0`.
    pub fn j(&self, x: f64) -> f64 {
        if x < SERIES_SWITCH {
            self.scaled_series(x) * x.powf(self.nu)
        } else {
            let (p, q) = self.hankel_pq(x);
            let omega = x - self.nu * FRAC_PI_2 - FRAC_PI_4;
            (2.0 / (PI * x)).sqrt() * (p * omega.cos() - q * omega.sin())
        }
    }

    /// `x^{-ν} J_ν(x)`, continuous at the origin.
    pub fn scaled(&self, x: f64) -> f64 {
        if x < SERIES_SWITCH {
            self.scaled_series(x)
        } else {
            self.j(x) / x.powf(self.nu)
        }
    }

    /// Envelope `e^{-ix} H^{(1)}_ν(x)` of the Hankel function, `x > 0`.
    ///
    /// Large arguments use the Hankel expansion; small ones the Laplace-type
    /// integral `∫₀^∞ e^{-u} u^{ν-1/2} (1 + iu/(2x))^{ν-1/2} du`.
    pub fn hankel1_envelope(&self, x: f64) -> Complex64 {
        let phase = Complex64::from_polar(1.0, -(self.nu * FRAC_PI_2 + FRAC_PI_4));
        let pref = (2.0 / (PI * x)).sqrt();
        if x >= SERIES_SWITCH {
            let (p, q) = self.hankel_pq(x);
            return phase * Complex64::new(p, q) * pref;
        }
        let alpha = self.nu - 0.5;
        let rule = gauss_laguerre(96, alpha);
        let mut acc = Complex64::new(0.0, 0.0);
        for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
            acc += Complex64::new(1.0, u / (2.0 * x)).powf(alpha) * w;
        }
        phase * acc * pref / gamma(self.nu + 0.5)
    }
}

/// Bessel function of the first kind `J_ν(x)` for `ν ≥ 0`, `x ≥ 0`.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!(
            "Bessel argument must be >= 0, got {x}"
        )));
    }
    Ok(Bessel::new(nu)?.j(x))
}

/// Evaluator of `𝒥_l` for a block of dimension `l ≥ 1`.
///
/// `l = 1` is the zero-dimensional sphere `S⁰ = {±1}`: `𝒥_1(r) = √(2/π) cos r`.
#[derive(Debug, Clone)]
pub struct SphereKernel {
    dim: usize,
    bessel: Option<Bessel>,
}

impl SphereKernel {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("sphere kernel needs dimension >= 1".into()));
        }
        let bessel = (dim >= 2).then(|| Bessel::new_unchecked((dim as f64 - 2.0) / 2.0));
        Ok(Self { dim, bessel })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        match &self.bessel {
            None => (2.0 / PI).sqrt() * r.cos(),
            Some(b) => b.scaled(r.abs()),
        }
    }

    pub fn bessel(&self) -> Option<&Bessel> {
        self.bessel.as_ref()
    }
}

/// `𝒥_d(r)` for `d ≥ 2`.
pub fn sphere_kernel(d: usize, r: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::Domain(format!("dimension must be >= 2, got {d}")));
    }
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("radius must be >= 0, got {r}")));
    }
    Ok(SphereKernel::new(d)?.eval(r))
}

/// Dimension and expansion order of the large-argument expansion of `𝒥_d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereKernelParams {
    pub d: usize,
    pub order: usize,
}

impl SphereKernelParams {
    pub fn new(d: usize, order: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::Domain(format!("dimension must be >= 2, got {d}")));
        }
        Ok(Self { d, order })
    }

    /// Whether `L > (d-1)/2`, the condition for an integrable remainder.
    pub fn splits_remainder(&self) -> bool {
        2 * self.order > self.d - 1
    }

    pub fn nu(&self) -> f64 {
        (self.d as f64 - 2.0) / 2.0
    }

    /// Coefficient `α_l` of `|z|^{(1-d)/2-l} e^{i|z|}`.
    pub fn alpha(&self, l: usize) -> Complex64 {
        let nu = self.nu();
        let i_pow = Complex64::i().powu(l as u32);
        let phase = Complex64::from_polar(1.0, -(nu * FRAC_PI_2 + FRAC_PI_4));
        i_pow * phase * (0.5 * (2.0 / PI).sqrt() * hankel_coefficient(nu, l))
    }

    pub fn alphas(&self) -> Vec<Complex64> {
        (0..self.order).map(|l| self.alpha(l)).collect()
    }
}

/// Partial sum `Σ_{l<L} z^{(1-d)/2-l}(α_l e^{iz} + conj(α_l) e^{-iz})`.
pub fn asymptotic_sum(params: &SphereKernelParams, z: f64) -> Complex64 {
    asymptotic_sum_with(&params.alphas(), params.d, z)
}

pub(crate) fn asymptotic_sum_with(alphas: &[Complex64], d: usize, z: f64) -> Complex64 {
    let z = z.abs();
    let e = Complex64::from_polar(1.0, z);
    let base = (1.0 - d as f64) / 2.0;
    let mut acc = Complex64::new(0.0, 0.0);
    for (l, a) in alphas.iter().enumerate() {
        let pw = z.powf(base - l as f64);
        acc += (a * e + a.conj() * e.conj()) * pw;
    }
    acc
}

/// Near/far splitting `𝒥 = 𝒥¹ + s^{(1-d)/2}(𝒥² e^{is} + conj(𝒥²) e^{-is})`.
#[derive(Debug, Clone)]
pub struct KernelDecomposition {
    d: usize,
    split_radius: f64,
    kernel: SphereKernel,
}

impl KernelDecomposition {
    pub fn split_radius(&self) -> f64 {
        self.split_radius
    }

    /// Near-field weight: 1 on `[0, split]`, 0 from `2·split` on.
    fn near(&self, s: f64) -> f64 {
        1.0 - smooth_step(s / self.split_radius - 1.0)
    }

    /// Smooth compactly supported near-field part `𝒥¹`.
    pub fn j1(&self, s: f64) -> f64 {
        self.near(s) * self.kernel.eval(s)
    }

    /// Slowly varying far-field amplitude `𝒥²`.
    pub fn j2(&self, s: f64) -> Complex64 {
        let far = 1.0 - self.near(s);
        if far == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let bessel = self
            .kernel
            .bessel()
            .expect("decomposition is built for d >= 2");
        bessel.hankel1_envelope(s) * (0.5 * far * s.sqrt())
    }

    /// Right-hand side of the reconstruction identity.
    pub fn reconstruct(&self, s: f64) -> f64 {
        let j2 = self.j2(s);
        let e = Complex64::from_polar(1.0, s);
        let far = (j2 * e + j2.conj() * e.conj()) * s.powf((1.0 - self.d as f64) / 2.0);
        self.j1(s) + far.re
    }
}

/// Build the near/far decomposition of `𝒥_d` with the given split radius.
pub fn decompose_kernel(d: usize, split_radius: f64) -> Result<KernelDecomposition> {
    if d < 2 {
        return Err(Error::Domain(format!("dimension must be >= 2, got {d}")));
    }
    if !(split_radius > 0.0) {
        return Err(Error::Domain(format!(
            "split radius must be positive, got {split_radius}"
        )));
    }
    Ok(KernelDecomposition {
        d,
        split_radius,
        kernel: SphereKernel::new(d)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::ln_gamma;

    /// Independent oracle: direct power series summed in extended form.
    fn series_oracle(nu: f64, x: f64) -> f64 {
        let mut sum = 0.0;
        for k in 0..120 {
            let kf = k as f64;
            let lg = ln_gamma(kf + 1.0) + ln_gamma(kf + nu + 1.0);
            let mag = ((2.0 * kf + nu) * (0.5 * x).ln() - lg).exp();
            sum += if k % 2 == 0 { mag } else { -mag };
        }
        sum
    }

    /// Oracle: Bessel's integral for integer orders (periodic trapezoid),
    /// elementary closed forms for half-integer orders.
    fn integral_oracle(nu: f64, x: f64) -> f64 {
        if nu.fract() == 0.0 {
            let n = 4000;
            let h = PI / n as f64;
            let mut s = 0.0;
            for i in 0..n {
                let t = (i as f64 + 0.5) * h;
                s += (nu * t - x * t.sin()).cos();
            }
            return s * h / PI;
        }
        let (sn, cs) = x.sin_cos();
        let base = (2.0 / (PI * x)).sqrt();
        match (2.0 * nu) as i32 {
            1 => base * sn,
            3 => base * (sn / x - cs),
            5 => base * ((3.0 / (x * x) - 1.0) * sn - 3.0 * cs / x),
            _ => unreachable!(),
        }
    }

    #[test]
    fn half_order_vanishes_at_pi() {
        let v = bessel_j(0.5, PI).unwrap();
        assert!(v.abs() < 1e-15);
        let closed = (2.0 / (PI * 2.0)).sqrt() * 2f64.sin();
        assert!((bessel_j(0.5, 2.0).unwrap() - closed).abs() < 1e-14);
        assert!((series_oracle(0.5, 2.0) - closed).abs() < 1e-13);
    }

    #[test]
    fn origin_values() {
        assert_eq!(bessel_j(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_j(-0.5, 1.0).is_err());
        assert!(bessel_j(1.0, -1.0).is_err());
        assert!(sphere_kernel(1, 1.0).is_err());
    }

    #[test]
    fn branches_agree_at_switch() {
        for l in 2..=8 {
            let nu = (l as f64 - 2.0) / 2.0;
            let b = Bessel::new(nu).unwrap();
            let x = SERIES_SWITCH;
            let series = b.scaled_series(x) * x.powf(nu);
            let (p, q) = b.hankel_pq(x);
            let omega = x - nu * FRAC_PI_2 - FRAC_PI_4;
            let hankel = (2.0 / (PI * x)).sqrt() * (p * omega.cos() - q * omega.sin());
            assert!(
                (series - hankel).abs() < 1e-11,
                "nu {nu}: {series} vs {hankel}"
            );
        }
    }

    #[test]
    fn matches_oracle_on_both_branches() {
        for &nu in &[0.0, 0.5, 1.0, 1.5, 2.0, 2.5] {
            let large = [50.0, 137.5, 400.0, 999.0];
            for x in (1..150).map(|i| i as f64 * 0.2).chain(large) {
                let got = bessel_j(nu, x).unwrap();
                let want = integral_oracle(nu, x);
                assert!((got - want).abs() < 1e-12, "nu {nu} x {x}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn known_values() {
        // J0(5), J1(20), J2(100) from standard tables
        assert!((bessel_j(0.0, 5.0).unwrap() - (-0.177_596_771_314_338_3)).abs() < 1e-13);
        assert!((bessel_j(1.0, 20.0).unwrap() - 0.066_833_124_175_849_93).abs() < 1e-12);
        assert!((bessel_j(2.0, 100.0).unwrap() - (-0.021_528_757_344_505_36)).abs() < 1e-12);
    }

    #[test]
    fn surface_measures() {
        assert!((surface_measure(1) - 2.0).abs() < 1e-15);
        assert!((surface_measure(2) - 2.0 * PI).abs() < 1e-14);
        assert!((surface_measure(3) - 4.0 * PI).abs() < 1e-14);
        // recursive oracle |S^{l-1}| = |S^{l-2}| ∫₀^π sin^{l-2}θ dθ
        let rule = crate::quadrature::gauss_legendre(40).mapped(0.0, PI);
        let s3 = surface_measure(3) * rule.integrate(|t| t.sin().powi(2));
        assert!((surface_measure(4) - s3).abs() < 1e-12);
        assert!((surface_measure(4) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn kernel_at_origin_is_sphere_mass() {
        for d in 2..=7 {
            let want = (2.0 * PI).powf(-(d as f64) / 2.0) * surface_measure(d);
            assert!((sphere_kernel(d, 0.0).unwrap() - want).abs() < 1e-15);
        }
    }

    #[test]
    fn kernel_d3_against_line_integral() {
        // oracle: (2π)^{-3/2} 2π ∫_{-1}^{1} e^{irs} ds
        let rule = crate::quadrature::gauss_legendre(80);
        for &r in &[1.0, 5.0, 20.0] {
            let quad = (2.0 * PI).powf(-1.5) * 2.0 * PI * rule.integrate(|s| (r * s).cos());
            let closed = (2.0 / PI).sqrt() * r.sin() / r;
            let got = sphere_kernel(3, r).unwrap();
            assert!((got - quad).abs() < 1e-12);
            assert!((got - closed).abs() < 1e-13);
        }
    }

    #[test]
    fn kernel_d2_is_j0() {
        // oracle: (2π)^{-1} ∫₀^{2π} cos(r cos φ) dφ via periodic trapezoid
        for &r in &[0.7, 3.0, 15.0] {
            let n = 200;
            let quad: f64 = (0..n)
                .map(|i| (r * (2.0 * PI * i as f64 / n as f64).cos()).cos())
                .sum::<f64>()
                / n as f64;
            assert!((sphere_kernel(2, r).unwrap() - quad).abs() < 1e-13);
        }
    }

    #[test]
    fn asymptotic_sum_basics() {
        let p = SphereKernelParams::new(3, 0).unwrap();
        assert_eq!(asymptotic_sum(&p, 10.0), Complex64::new(0.0, 0.0));
        let p = SphereKernelParams::new(4, 3).unwrap();
        let v = asymptotic_sum(&p, 30.0);
        assert!(v.im.abs() < 1e-15);
        let resid = (sphere_kernel(4, 50.0).unwrap() - asymptotic_sum(&p, 50.0).re).abs();
        assert!(resid < 50f64.powf(-1.5 - 3.0));
    }

    #[test]
    fn leading_term_envelope_d3() {
        let p = SphereKernelParams::new(3, 1).unwrap();
        let a0 = p.alpha(0).norm();
        for i in 0..400 {
            let z = 20.0 + i as f64 * 0.45;
            assert!(asymptotic_sum(&p, z).re.abs() <= 2.0 * a0 / z + 1e-15);
            assert!((asymptotic_sum(&p, z).re - sphere_kernel(3, z).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn decomposition_reconstructs() {
        let dec = decompose_kernel(4, 1.0).unwrap();
        let lhs = sphere_kernel(4, 10.0).unwrap();
        assert!((lhs - dec.reconstruct(10.0)).abs() < 1e-8);
        for &s in &[0.3, 1.2, 1.7, 2.5, 7.0, 11.9, 12.1, 40.0] {
            let lhs = sphere_kernel(4, s).unwrap();
            assert!((lhs - dec.reconstruct(s)).abs() < 1e-8, "s = {s}");
        }
        // inside the plateau the far part vanishes identically
        assert_eq!(dec.j2(0.8), Complex64::new(0.0, 0.0));
        assert_eq!(dec.j1(0.8), sphere_kernel(4, 0.8).unwrap());
        assert_eq!(dec.j1(2.0), 0.0);
    }

    #[test]
    fn far_amplitude_tends_to_alpha0() {
        for d in [3, 4, 5] {
            let dec = decompose_kernel(d, 1.0).unwrap();
            let a0 = SphereKernelParams::new(d, 1).unwrap().alpha(0);
            let mut prev = f64::INFINITY;
            for &s in &[25.0, 50.0, 100.0, 200.0] {
                let dev = (dec.j2(s) - a0).norm();
                assert!(dev * s < 1.0, "d {d} s {s}");
                assert!(dev <= prev + 1e-15);
                prev = dev;
            }
        }
    }
}
