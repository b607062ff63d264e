//! Gaussian quadrature rules and extrapolation helpers.
//!
//! Rules are computed on `[-1, 1]` and cached per `(kind, n, parameters)`;
//! callers map them onto their own intervals.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::specfun::gamma;
use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and weights of a quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Affine map of a `[-1, 1]` rule onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> Rule {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Rule {
            nodes: self.nodes.iter().map(|x| mid + half * x).collect(),
            weights: self.weights.iter().map(|w| w * half).collect(),
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Key {
    Legendre(usize),
    Lobatto(usize),
    Jacobi(usize, u64, u64),
    Laguerre(usize, u64),
}

fn cache() -> &'static Mutex<HashMap<Key, Arc<Rule>>> {
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<Rule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached(key: Key, build: impl FnOnce() -> Rule) -> Arc<Rule> {
    if let Some(rule) = cache().lock().unwrap().get(&key) {
        return Arc::clone(rule);
    }
    let rule = Arc::new(build());
    cache()
        .lock()
        .unwrap()
        .entry(key)
        .or_insert_with(|| Arc::clone(&rule));
    rule
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre rule with `n` points (Newton iteration on the three-term recurrence).
pub fn gauss_legendre(n: usize) -> Arc<Rule> {
    assert!(n >= 1, "rule needs at least one node");
    cached(Key::Legendre(n), || {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Rule { nodes, weights }
    })
}

/// Gauss–Lobatto–Legendre rule with `n >= 2` points including both endpoints.
pub fn gauss_lobatto(n: usize) -> Arc<Rule> {
    assert!(n >= 2, "Lobatto rule needs both endpoints");
    cached(Key::Lobatto(n), || {
        let mut nodes = vec![-1.0];
        if n > 2 {
            let interior = gauss_jacobi(n - 2, 1.0, 1.0);
            nodes.extend(interior.nodes.iter().copied());
        }
        nodes.push(1.0);
        let nm1 = (n - 1) as f64;
        let weights = nodes
            .iter()
            .map(|&x| {
                let (p, _) = legendre_with_derivative(n - 1, x);
                2.0 / (nm1 * (nm1 + 1.0) * p * p)
            })
            .collect();
        Rule { nodes, weights }
    })
}

/// Gauss–Jacobi rule for the weight `(1-x)^a (1+x)^b` on `[-1, 1]`, `a, b > -1`.
///
/// Golub–Welsch on the Jacobi matrix.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Arc<Rule> {
    assert!(n >= 1 && a > -1.0 && b > -1.0);
    if a == 0.0 && b == 0.0 {
        return gauss_legendre(n);
    }
    cached(Key::Jacobi(n, a.to_bits(), b.to_bits()), || {
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            let kf = k as f64;
            let s = 2.0 * kf + a + b;
            let diag = if k == 0 {
                (b - a) / (a + b + 2.0)
            } else {
                (b * b - a * a) / (s * (s + 2.0))
            };
            jac[(k, k)] = diag;
            if k + 1 < n {
                let k1 = kf + 1.0;
                let s1 = 2.0 * k1 + a + b;
                let off = if k == 0 {
                    // the generic formula has a removable 0/0 when a + b = -1
                    (4.0 * (1.0 + a) * (1.0 + b) / (s1 * s1 * (s1 + 1.0))).sqrt()
                } else {
                    let num = 4.0 * k1 * (k1 + a) * (k1 + b) * (k1 + a + b);
                    let den = s1 * s1 * (s1 + 1.0) * (s1 - 1.0);
                    (num / den).sqrt()
                };
                jac[(k, k + 1)] = off;
                jac[(k + 1, k)] = off;
            }
        }
        let mu0 = 2f64.powf(a + b + 1.0) * gamma(a + 1.0) * gamma(b + 1.0) / gamma(a + b + 2.0);
        let eig = SymmetricEigen::new(jac);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let v0 = eig.eigenvectors[(0, i)];
                (eig.eigenvalues[i], mu0 * v0 * v0)
            })
            .collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        Rule {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    })
}

/// Generalized Gauss–Laguerre rule for the weight `x^alpha e^{-x}` on `[0, ∞)`.
pub fn gauss_laguerre(n: usize, alpha: f64) -> Arc<Rule> {
    assert!(n >= 1 && alpha > -1.0);
    cached(Key::Laguerre(n, alpha.to_bits()), || {
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            let kf = k as f64;
            jac[(k, k)] = 2.0 * kf + alpha + 1.0;
            if k + 1 < n {
                let off = ((kf + 1.0) * (kf + 1.0 + alpha)).sqrt();
                jac[(k, k + 1)] = off;
                jac[(k + 1, k)] = off;
            }
        }
        let mu0 = gamma(alpha + 1.0);
        let eig = SymmetricEigen::new(jac);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let v0 = eig.eigenvectors[(0, i)];
                (eig.eigenvalues[i], mu0 * v0 * v0)
            })
            .collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        Rule {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    })
}

/// Composite Gauss–Legendre rule over consecutive breakpoints.
pub fn composite_legendre(breaks: &[f64], order: usize) -> Rule {
    let base = gauss_legendre(order);
    let mut nodes = Vec::with_capacity(order * breaks.len());
    let mut weights = Vec::with_capacity(order * breaks.len());
    for pair in breaks.windows(2) {
        let panel = base.mapped(pair[0], pair[1]);
        nodes.extend(panel.nodes);
        weights.extend(panel.weights);
    }
    Rule { nodes, weights }
}

/// Breakpoints splitting `[a, b]` into `panels` equal pieces.
pub fn uniform_breaks(a: f64, b: f64, panels: usize) -> Vec<f64> {
    let panels = panels.max(1);
    (0..=panels)
        .map(|i| a + (b - a) * i as f64 / panels as f64)
        .collect()
}

/// Rule for `∫_{-1}^{1} (1-s^2)^alpha g(s) ds` split into `panels` pieces.
///
/// The two end panels carry the algebraic endpoint factor through a
/// Gauss–Jacobi rule; interior panels are plain Gauss–Legendre. The returned
/// weights already include `(1-s^2)^alpha`.
pub fn jacobi_panels(alpha: f64, panels: usize, order: usize) -> Rule {
    let panels = panels.max(2);
    let breaks = uniform_breaks(-1.0, 1.0, panels);
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for (p, pair) in breaks.windows(2).enumerate() {
        let (a, b) = (pair[0], pair[1]);
        let half = 0.5 * (b - a);
        if p == 0 {
            // (1+s)^alpha singular at s = -1 = a: weight (1+t)^alpha in local t.
            let gj = gauss_jacobi(order, 0.0, alpha);
            for (&t, &w) in gj.nodes.iter().zip(&gj.weights) {
                let s = a + half * (t + 1.0);
                nodes.push(s);
                weights.push(w * half.powf(alpha + 1.0) * (1.0 - s).powf(alpha));
            }
        } else if p == panels - 1 {
            let gj = gauss_jacobi(order, alpha, 0.0);
            for (&t, &w) in gj.nodes.iter().zip(&gj.weights) {
                let s = b - half * (1.0 - t);
                nodes.push(s);
                weights.push(w * half.powf(alpha + 1.0) * (1.0 + s).powf(alpha));
            }
        } else {
            let gl = gauss_legendre(order).mapped(a, b);
            for (&s, &w) in gl.nodes.iter().zip(&gl.weights) {
                nodes.push(s);
                weights.push(w * (1.0 - s * s).powf(alpha));
            }
        }
    }
    Rule { nodes, weights }
}

/// Polynomial (Neville) extrapolation of `values[i] ≈ F(steps[i])` to `F(0)`.
pub fn extrapolate_to_zero(steps: &[f64], values: &[f64]) -> f64 {
    assert_eq!(steps.len(), values.len());
    let n = steps.len();
    let mut table = values.to_vec();
    for level in 1..n {
        for i in 0..n - level {
            let (hi, hj) = (steps[i], steps[i + level]);
            table[i] = (hj * table[i] - hi * table[i + 1]) / (hj - hi);
        }
    }
    table[0]
}
