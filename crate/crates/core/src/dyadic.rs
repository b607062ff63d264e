//! Smooth cutoffs built from the bump `exp(-1/(1-t²))`, the dyadic partition
//! of unity and the cutoffs localizing the zeros of a symbol.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::lap::SymbolModel;
use crate::quadrature::gauss_legendre;

pub const MAX_DERIVATIVE: usize = 8;

const PANELS: usize = 128;
const DEGREE: usize = 18;

struct StepTable {
    /// Chebyshev coefficients per panel of `t ↦ S(t)` on `[0, 1/2]`.
    coeffs: Vec<[f64; DEGREE]>,
    norm: f64,
}

fn bump(u: f64) -> f64 {
    if u <= -1.0 || u >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

fn step_table() -> &'static StepTable {
    static TABLE: OnceLock<StepTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let gl = gauss_legendre(24);
        let integral = |a: f64, b: f64| -> f64 {
            // sub-panels of width ≤ 1/32 keep the flat endpoint well resolved
            let pieces = ((b - a) * 32.0).ceil().max(1.0) as usize;
            let h = (b - a) / pieces as f64;
            (0..pieces)
                .map(|i| {
                    gl.mapped(a + i as f64 * h, a + (i + 1) as f64 * h)
                        .integrate(bump)
                })
                .sum()
        };
        let norm = 2.0 * integral(-1.0, 0.0);
        let width = 0.5 / PANELS as f64;
        let mut coeffs = Vec::with_capacity(PANELS);
        let mut base = 0.0;
        for p in 0..PANELS {
            let t0 = p as f64 * width;
            let u0 = 2.0 * t0 - 1.0;
            // values at Chebyshev points of the first kind
            let mut vals = [0.0; DEGREE];
            for (m, v) in vals.iter_mut().enumerate() {
                let x = ((2 * m + 1) as f64 * std::f64::consts::PI / (2 * DEGREE) as f64).cos();
                let t = t0 + 0.5 * width * (x + 1.0);
                *v = (base + integral(u0, 2.0 * t - 1.0)) / norm;
            }
            let mut c = [0.0; DEGREE];
            for (j, cj) in c.iter_mut().enumerate() {
                let mut s = 0.0;
                for (m, v) in vals.iter().enumerate() {
                    let th = (2 * m + 1) as f64 * std::f64::consts::PI / (2 * DEGREE) as f64;
                    s += v * (j as f64 * th).cos();
                }
                *cj = s * 2.0 / DEGREE as f64;
            }
            c[0] *= 0.5;
            coeffs.push(c);
            base += integral(u0, u0 + 2.0 * width);
        }
        StepTable { coeffs, norm }
    })
}

fn step_lower_half(t: f64) -> f64 {
    let table = step_table();
    let scaled = t * 2.0 * PANELS as f64;
    let p = (scaled.floor() as usize).min(PANELS - 1);
    let x = 2.0 * (scaled - p as f64) - 1.0;
    let c = &table.coeffs[p];
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    (x * b1 - b2 + c[0]).max(0.0)
}

/// Monotone smooth step: 0 for `t ≤ 0`, 1 for `t ≥ 1`, `S(t) + S(1−t) = 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else if t <= 0.5 {
        step_lower_half(t)
    } else {
        1.0 - step_lower_half(1.0 - t)
    }
}

/// Taylor coefficients `g^{(m)}(u)/m!` of the bump for `m ≤ n`.
fn bump_jet(u: f64, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    if u <= -1.0 || u >= 1.0 {
        return out;
    }
    // h(u) = -1/(1-u²) = -½(1/(1-u) + 1/(1+u)); its Taylor coefficients are explicit
    let a = 1.0 / (1.0 - u);
    let b = 1.0 / (1.0 + u);
    let mut h = vec![0.0; n + 1];
    let (mut ak, mut bk) = (a, b);
    for (k, hk) in h.iter_mut().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        *hk = -0.5 * (ak + sign * bk);
        ak *= a;
        bk *= b;
    }
    // g = exp(h): m g_m = Σ_{k=1}^{m} k h_k g_{m-k}
    out[0] = h[0].exp();
    for m in 1..=n {
        let mut s = 0.0;
        for k in 1..=m {
            s += k as f64 * h[k] * out[m - k];
        }
        out[m] = s / m as f64;
    }
    out
}

/// `n`-th derivative of [`smooth_step`].
pub fn smooth_step_derivative(t: f64, n: usize) -> f64 {
    if n == 0 {
        return smooth_step(t);
    }
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let jet = bump_jet(2.0 * t - 1.0, n - 1);
    let fact: f64 = (1..n).map(|k| k as f64).product();
    2f64.powi(n as i32) * jet[n - 1] * fact / step_table().norm
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }
}

/// Smooth cutoff `rise(x)·fall(x)` equal to 1 on the plateau.
///
/// An infinite support end means the cutoff does not decay on that side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothCutoff {
    pub support: Interval,
    pub plateau: Interval,
}

impl SmoothCutoff {
    fn rise_arg(&self, x: f64) -> Option<f64> {
        let (a, c) = (self.support.lo, self.plateau.lo);
        (a.is_finite() && x < c).then(|| (x - a) / (c - a))
    }

    fn fall_arg(&self, x: f64) -> Option<f64> {
        let (e, b) = (self.plateau.hi, self.support.hi);
        (b.is_finite() && x > e).then(|| (b - x) / (b - e))
    }

    pub fn eval(&self, x: f64) -> f64 {
        if !self.support.contains(x) {
            return 0.0;
        }
        let r = self.rise_arg(x).map_or(1.0, smooth_step);
        let f = self.fall_arg(x).map_or(1.0, smooth_step);
        r * f
    }

    /// Derivative of order `n ≤ 8`.
    pub fn derivative(&self, x: f64, n: usize) -> f64 {
        assert!(
            n <= MAX_DERIVATIVE,
            "derivatives beyond order {MAX_DERIVATIVE} are not provided"
        );
        if n == 0 {
            return self.eval(x);
        }
        if !self.support.contains(x) {
            return 0.0;
        }
        let rise = |i: usize| match self.rise_arg(x) {
            None => (i == 0) as u8 as f64,
            Some(t) => {
                let w = self.plateau.lo - self.support.lo;
                smooth_step_derivative(t, i) / w.powi(i as i32)
            }
        };
        let fall = |i: usize| match self.fall_arg(x) {
            None => (i == 0) as u8 as f64,
            Some(t) => {
                let w = self.support.hi - self.plateau.hi;
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                sign * smooth_step_derivative(t, i) / w.powi(i as i32)
            }
        };
        let mut binom = 1.0;
        let mut acc = 0.0;
        for i in 0..=n {
            acc += binom * rise(i) * fall(n - i);
            binom = binom * (n - i) as f64 / (i + 1) as f64;
        }
        acc
    }
}

/// Bump with the given support and plateau, which must lie strictly inside.
pub fn make_bump(support: Interval, plateau: Interval) -> Result<SmoothCutoff> {
    let ok = support.lo < plateau.lo && plateau.hi < support.hi && plateau.lo <= plateau.hi;
    if !ok || !support.lo.is_finite() || !support.hi.is_finite() {
        return Err(Error::InvalidInterval(format!(
            "plateau [{}, {}] must lie strictly inside support [{}, {}]",
            plateau.lo, plateau.hi, support.lo, support.hi
        )));
    }
    Ok(SmoothCutoff { support, plateau })
}

/// Annulus cutoff `τ`: 1 on `[3/4, 5/4]`, supported in `[1/2, 3/2]`.
pub fn tau() -> SmoothCutoff {
    make_bump(Interval::new(0.5, 1.5), Interval::new(0.75, 1.25)).expect("valid intervals")
}

/// Dyadic partition `χ₀(z) + Σ_{j≥1} χ(2^{-j} z) = 1`.
#[derive(Debug, Clone, Copy)]
pub struct RadialCutoffFamily {
    pub chi0: SmoothCutoff,
    pub chi: SmoothCutoff,
    pub j_max: u32,
}

impl RadialCutoffFamily {
    /// `χ(2^{-j} z)` (and `χ₀(z)` for `j = 0`).
    pub fn piece(&self, j: u32, z: f64) -> f64 {
        if j == 0 {
            self.chi0.eval(z)
        } else {
            self.chi.eval(z * 0.5f64.powi(j as i32))
        }
    }

    /// Partial sum of the partition over `j ≤ j_max`.
    pub fn sum(&self, z: f64) -> f64 {
        (0..=self.j_max).map(|j| self.piece(j, z)).sum()
    }

    /// Indices `j` whose piece can be nonzero at `z`.
    pub fn active(&self, z: f64) -> impl Iterator<Item = u32> + '_ {
        (0..=self.j_max).filter(move |&j| {
            if j == 0 {
                z <= 2.0
            } else {
                let s = z * 0.5f64.powi(j as i32);
                (0.5..=2.0).contains(&s)
            }
        })
    }
}

/// With `H = 0` on `[0, 1/2]` and `H = 1` on `[1, ∞)`, `χ(z) = H(z) − H(z/2)`
/// and `χ₀(z) = 1 − H(z/2)`. Both are stored as rise/fall products, which is
/// the same function because `S(t) + S(1−t) = 1` holds exactly.
pub fn make_partition(j_max: u32) -> Result<RadialCutoffFamily> {
    if j_max < 1 {
        return Err(Error::Domain("j_max must be >= 1".into()));
    }
    let chi = SmoothCutoff {
        support: Interval::new(0.5, 2.0),
        plateau: Interval::new(1.0, 1.0),
    };
    let chi0 = SmoothCutoff {
        support: Interval::new(f64::NEG_INFINITY, 2.0),
        plateau: Interval::new(f64::NEG_INFINITY, 1.0),
    };
    Ok(RadialCutoffFamily { chi0, chi, j_max })
}

/// Cutoffs `χ_m` around the positive zeros of a symbol and their complement.
#[derive(Debug, Clone)]
pub struct ZeroCutoffs {
    pub delta: f64,
    pub zeros: Vec<f64>,
    pub cutoffs: Vec<SmoothCutoff>,
}

impl ZeroCutoffs {
    /// `χ₀ = 1 − Σ χ_m`.
    pub fn complement(&self, r: f64) -> f64 {
        1.0 - self.cutoffs.iter().map(|c| c.eval(r)).sum::<f64>()
    }

    /// `χ_m(r_m + ρ)`, the even profile used for principal values.
    pub fn centered(&self, m: usize, rho: f64) -> f64 {
        self.cutoffs[m].eval(self.zeros[m] + rho)
    }
}

/// Default half-width: a quarter of the smallest of `r_1` and the zero gaps.
pub fn default_delta(zeros: &[f64]) -> f64 {
    let mut m = zeros.first().copied().unwrap_or(1.0);
    for w in zeros.windows(2) {
        m = m.min(w[1] - w[0]);
    }
    m / 4.0
}

/// `χ_m = 1` on `|r − r_m| ≤ δ`, supported in `|r − r_m| ≤ 2δ`.
pub fn make_zero_cutoffs(symbol: &SymbolModel, delta: f64) -> Result<ZeroCutoffs> {
    let zeros = symbol.zeros().to_vec();
    if zeros.is_empty() {
        return Err(Error::Symbol("symbol has no positive zeros".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::DeltaTooLarge(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if zeros[0] - 2.0 * delta <= 0.0 {
        return Err(Error::DeltaTooLarge(format!(
            "support of the first cutoff reaches 0 (r_1 = {}, delta = {delta})",
            zeros[0]
        )));
    }
    for w in zeros.windows(2) {
        if w[1] - w[0] <= 4.0 * delta {
            return Err(Error::DeltaTooLarge(format!(
                "supports around {} and {} overlap for delta = {delta}",
                w[0], w[1]
            )));
        }
    }
    let mut cutoffs = Vec::with_capacity(zeros.len());
    for &r in &zeros {
        for i in 0..=400 {
            let x = r - 2.0 * delta + 4.0 * delta * i as f64 / 400.0;
            if symbol.derivative(x) == 0.0 {
                return Err(Error::DeltaTooLarge(format!(
                    "P' vanishes at {x} inside the cutoff around {r}"
                )));
            }
        }
        let sign = symbol.derivative(r).signum();
        let changes = (0..=400).any(|i| {
            let x = r - 2.0 * delta + 4.0 * delta * i as f64 / 400.0;
            symbol.derivative(x).signum() != sign
        });
        if changes {
            return Err(Error::DeltaTooLarge(format!(
                "P' changes sign inside the cutoff around {r}"
            )));
        }
        cutoffs.push(make_bump(
            Interval::new(r - 2.0 * delta, r + 2.0 * delta),
            Interval::new(r - delta, r + delta),
        )?);
    }
    Ok(ZeroCutoffs {
        delta,
        zeros,
        cutoffs,
    })
}
