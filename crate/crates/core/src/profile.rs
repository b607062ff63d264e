//! Block-radial functions `f(y, z) = f₀(|y|, |z|)` on `R^{d-k} × R^k`,
//! stored as samples of the profile `f₀` on a tensor grid, and their norms.

use std::f64::consts::PI;
use std::io::{BufRead, BufWriter, Read, Write};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::gauss_lobatto;
use crate::specfun::surface_measure;

/// Ambient dimension `d` and block size `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dimensions {
    pub d: usize,
    pub k: usize,
}

impl Dimensions {
    pub fn new(d: usize, k: usize) -> Result<Self> {
        if d < 2 || k < 1 || k + 1 > d {
            return Err(Error::Domain(format!(
                "need d >= 2 and 1 <= k <= d-1, got d = {d}, k = {k}"
            )));
        }
        Ok(Self { d, k })
    }

    /// Dimension `d − k` of the first block.
    pub fn dk(&self) -> usize {
        self.d - self.k
    }

    /// `m = min(k, d − k)`.
    pub fn m(&self) -> usize {
        self.k.min(self.d - self.k)
    }

    /// `c_{d,k} = |S^{d-k-1}|·|S^{k-1}|`.
    pub fn c_dk(&self) -> f64 {
        surface_measure(self.dk()) * surface_measure(self.k)
    }

    /// Symmetric Stein–Tomas exponent `2(d+m)/(d+m+2)`.
    pub fn p_st(&self) -> f64 {
        let dm = (self.d + self.m()) as f64;
        2.0 * dm / (dm + 2.0)
    }
}

/// Composite Gauss–Lobatto grid on `[0, R_max]`; neighbouring panels share
/// their endpoint node.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    breaks: Vec<f64>,
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    bary: Vec<f64>,
}

impl RadialGrid {
    /// Panels between consecutive `breaks` (starting at 0) with `order` nodes each.
    pub fn from_breaks(breaks: Vec<f64>, order: usize) -> Result<Self> {
        if order < 2 || breaks.len() < 2 || breaks[0] != 0.0 {
            return Err(Error::Resolution(
                "grid needs breaks starting at 0 and order >= 2".into(),
            ));
        }
        if breaks.windows(2).any(|w| !(w[1] > w[0])) || breaks.iter().any(|b| !b.is_finite()) {
            return Err(Error::Resolution(
                "breaks must be finite and strictly increasing".into(),
            ));
        }
        let base = gauss_lobatto(order);
        let panels = breaks.len() - 1;
        let n = panels * (order - 1) + 1;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for (p, w) in breaks.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            let half = 0.5 * (b - a);
            for (i, (&x, &wt)) in base.nodes.iter().zip(&base.weights).enumerate() {
                let idx = p * (order - 1) + i;
                nodes[idx] = if i == 0 {
                    a
                } else if i == order - 1 {
                    b
                } else {
                    a + half * (x + 1.0)
                };
                weights[idx] += wt * half;
            }
        }
        let bary = (0..order)
            .map(|j| {
                let xj = base.nodes[j];
                let prod: f64 = (0..order)
                    .filter(|&m| m != j)
                    .map(|m| xj - base.nodes[m])
                    .product();
                1.0 / prod
            })
            .collect();
        Ok(Self {
            breaks,
            order,
            nodes,
            weights,
            bary,
        })
    }

    /// `panels` equal panels on `[0, r_max]`.
    pub fn uniform(r_max: f64, panels: usize, order: usize) -> Result<Self> {
        if !(r_max > 0.0) || panels == 0 {
            return Err(Error::Resolution(
                "need r_max > 0 and at least one panel".into(),
            ));
        }
        let breaks = (0..=panels)
            .map(|i| r_max * i as f64 / panels as f64)
            .collect();
        Self::from_breaks(breaks, order)
    }

    /// Panels of width at most `h` on each piece of `[0, r_max]` cut at `marks`.
    pub fn piecewise(marks: &[(f64, f64)], order: usize) -> Result<Self> {
        let mut breaks = vec![0.0];
        for &(end, h) in marks {
            let start = *breaks.last().unwrap();
            if end <= start {
                continue;
            }
            let n = ((end - start) / h).ceil().max(1.0) as usize;
            for i in 1..=n {
                breaks.push(start + (end - start) * i as f64 / n as f64);
            }
        }
        Self::from_breaks(breaks, order)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Quadrature weights for `∫₀^{R_max} g(ρ) dρ`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    /// Largest mean node spacing over the panels.
    pub fn max_spacing(&self) -> f64 {
        self.breaks
            .windows(2)
            .map(|w| (w[1] - w[0]) / (self.order - 1) as f64)
            .fold(0.0, f64::max)
    }

    /// Interpolation stencil at `x`: first node index and Lagrange weights.
    /// `None` outside `[0, R_max]`.
    pub fn stencil(&self, x: f64) -> Option<(usize, Vec<f64>)> {
        if !(x >= 0.0) || x > self.r_max() {
            return None;
        }
        let p = self
            .breaks
            .partition_point(|&b| b <= x)
            .saturating_sub(1)
            .min(self.breaks.len() - 2);
        let start = p * (self.order - 1);
        let local = &self.nodes[start..start + self.order];
        let mut w = vec![0.0; self.order];
        if let Some(hit) = local.iter().position(|&n| n == x) {
            w[hit] = 1.0;
            return Some((start, w));
        }
        let mut total = 0.0;
        for (j, (wj, &nj)) in w.iter_mut().zip(local).enumerate() {
            *wj = self.bary[j] / (x - nj);
            total += *wj;
        }
        for wj in &mut w {
            *wj /= total;
        }
        Some((start, w))
    }

    /// Interpolate samples `values` (one per node) at `x`; zero outside the grid.
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        match self.stencil(x) {
            None => 0.0,
            Some((s, w)) => w.iter().zip(&values[s..]).map(|(a, b)| a * b).sum(),
        }
    }
}

impl Default for RadialGrid {
    /// 385 nodes on `[0, 16]`.
    fn default() -> Self {
        Self::uniform(16.0, 24, 17).expect("valid default grid")
    }
}

/// Samples of a profile `f₀(ρ₁, ρ₂)`, row-major with `ρ₁` the row index.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockRadialProfile {
    pub dims: Dimensions,
    pub grid1: Arc<RadialGrid>,
    pub grid2: Arc<RadialGrid>,
    pub values: Vec<Complex64>,
}

impl BlockRadialProfile {
    pub fn zeros(dims: Dimensions, grid1: Arc<RadialGrid>, grid2: Arc<RadialGrid>) -> Self {
        let n = grid1.len() * grid2.len();
        Self {
            dims,
            grid1,
            grid2,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn from_fn<F: Fn(f64, f64) -> Complex64>(
        dims: Dimensions,
        grid1: Arc<RadialGrid>,
        grid2: Arc<RadialGrid>,
        f: F,
    ) -> Self {
        let mut values = Vec::with_capacity(grid1.len() * grid2.len());
        for &a in grid1.nodes() {
            for &b in grid2.nodes() {
                values.push(f(a, b));
            }
        }
        Self {
            dims,
            grid1,
            grid2,
            values,
        }
    }

    pub fn from_real_fn<F: Fn(f64, f64) -> f64>(
        dims: Dimensions,
        grid1: Arc<RadialGrid>,
        grid2: Arc<RadialGrid>,
        f: F,
    ) -> Self {
        Self::from_fn(dims, grid1, grid2, |a, b| Complex64::new(f(a, b), 0.0))
    }

    pub fn n1(&self) -> usize {
        self.grid1.len()
    }

    pub fn n2(&self) -> usize {
        self.grid2.len()
    }

    pub fn at(&self, i1: usize, i2: usize) -> Complex64 {
        self.values[i1 * self.n2() + i2]
    }

    pub fn r_max(&self) -> f64 {
        self.grid1.r_max().max(self.grid2.r_max())
    }

    /// Same grids and dimensions.
    pub fn same_layout(&self, other: &Self) -> bool {
        self.dims == other.dims && self.grid1 == other.grid1 && self.grid2 == other.grid2
    }

    pub fn with_values(&self, values: Vec<Complex64>) -> Self {
        assert_eq!(values.len(), self.values.len());
        Self {
            dims: self.dims,
            grid1: Arc::clone(&self.grid1),
            grid2: Arc::clone(&self.grid2),
            values,
        }
    }

    pub fn map<F: Fn(f64, f64, Complex64) -> Complex64>(&self, f: F) -> Self {
        let n2 = self.n2();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| f(self.grid1.nodes()[i / n2], self.grid2.nodes()[i % n2], v))
            .collect();
        self.with_values(values)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.with_values(self.values.iter().map(|v| v * c).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert!(self.same_layout(other), "profiles live on different grids");
        self.with_values(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert!(self.same_layout(other), "profiles live on different grids");
        self.with_values(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn real_part(&self) -> Self {
        self.with_values(
            self.values
                .iter()
                .map(|v| Complex64::new(v.re, 0.0))
                .collect(),
        )
    }

    pub fn imag_part(&self) -> Self {
        self.with_values(
            self.values
                .iter()
                .map(|v| Complex64::new(v.im, 0.0))
                .collect(),
        )
    }

    /// Tensor interpolation at `(x, y)`; zero outside the grid.
    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        let (Some((s1, w1)), Some((s2, w2))) = (self.grid1.stencil(x), self.grid2.stencil(y))
        else {
            return Complex64::new(0.0, 0.0);
        };
        let n2 = self.n2();
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, wa) in w1.iter().enumerate() {
            if *wa == 0.0 {
                continue;
            }
            let row = (s1 + a) * n2 + s2;
            let mut inner = Complex64::new(0.0, 0.0);
            for (b, wb) in w2.iter().enumerate() {
                inner += self.values[row + b] * wb;
            }
            acc += inner * wa;
        }
        acc
    }

    /// Measure `c_{d,k} ρ₁^{d-k-1} ρ₂^{k-1} w₁ w₂` attached to each sample.
    pub fn cell_measures(&self) -> Vec<f64> {
        let m1 = block_measures(&self.grid1, self.dims.dk());
        let m2 = block_measures(&self.grid2, self.dims.k);
        let mut out = Vec::with_capacity(self.values.len());
        for a in &m1 {
            for b in &m2 {
                out.push(a * b);
            }
        }
        out
    }

    /// Weighted inner product `∫ f conj(g) dx`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        assert!(self.same_layout(other), "profiles live on different grids");
        self.cell_measures()
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(m, (a, b))| a * b.conj() * m)
            .sum()
    }
}

/// `|S^{l-1}| ρ^{l-1} w` per node.
pub fn block_measures(grid: &RadialGrid, l: usize) -> Vec<f64> {
    let s = surface_measure(l);
    grid.nodes()
        .iter()
        .zip(grid.weights())
        .map(|(&r, &w)| s * r.powi(l as i32 - 1) * w)
        .collect()
}

/// Second Lorentz exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LorentzSecond {
    One,
    Same,
    Infinity,
}

/// Lorentz space `L^{p,r}` with `r ∈ {1, p, ∞}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzSpec {
    pub p: f64,
    pub r: LorentzSecond,
}

impl LorentzSpec {
    pub fn lebesgue(p: f64) -> Self {
        Self {
            p,
            r: LorentzSecond::Same,
        }
    }

    pub fn strong(p: f64) -> Self {
        Self {
            p,
            r: LorentzSecond::One,
        }
    }

    pub fn weak(p: f64) -> Self {
        Self {
            p,
            r: LorentzSecond::Infinity,
        }
    }

    /// Dual space: `(p,1) ↦ (p′,∞)`, `(p,p) ↦ (p′,p′)`, `(p,∞) ↦ (p′,1)`.
    pub fn dual(&self) -> Self {
        let q = conjugate_exponent(self.p);
        let r = match self.r {
            LorentzSecond::One => LorentzSecond::Infinity,
            LorentzSecond::Same => LorentzSecond::Same,
            LorentzSecond::Infinity => LorentzSecond::One,
        };
        Self { p: q, r }
    }
}

/// Hölder conjugate `p′`.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// `L^{p,r}` norm of a step function given by magnitudes and cell measures,
/// evaluated exactly on its decreasing rearrangement.
pub fn lorentz_from_samples(mags: &[f64], measures: &[f64], spec: LorentzSpec) -> f64 {
    let p = spec.p;
    if p.is_infinite() {
        return mags.iter().copied().fold(0.0, f64::max);
    }
    if spec.r == LorentzSecond::Same {
        let s: f64 = mags.iter().zip(measures).map(|(v, m)| v.powf(p) * m).sum();
        return s.powf(1.0 / p);
    }
    let mut order: Vec<usize> = (0..mags.len()).filter(|&i| mags[i] > 0.0).collect();
    order.sort_by(|&a, &b| mags[b].total_cmp(&mags[a]));
    let mut t = 0.0;
    let mut acc = 0.0;
    for i in order {
        let t_next = t + measures[i];
        match spec.r {
            LorentzSecond::Infinity => acc = f64::max(acc, t_next.powf(1.0 / p) * mags[i]),
            _ => acc += mags[i] * p * (t_next.powf(1.0 / p) - t.powf(1.0 / p)),
        }
        t = t_next;
    }
    acc
}

/// `(c_{d,k} ∫ ρ₁^{d-k-1} ρ₂^{k-1} |f₀|^p)^{1/p}`; `p = ∞` gives the sup.
pub fn lebesgue_norm(f: &BlockRadialProfile, p: f64) -> f64 {
    lorentz_norm(f, LorentzSpec::lebesgue(p))
}

pub fn lorentz_norm(f: &BlockRadialProfile, spec: LorentzSpec) -> f64 {
    let mags: Vec<f64> = f.values.iter().map(|v| v.norm()).collect();
    lorentz_from_samples(&mags, &f.cell_measures(), spec)
}

/// Which variable carries the outer norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormOrder {
    YOuter,
    ZOuter,
}

/// `‖ ‖f‖_{p2 in z} ‖_{p1 in y}` (y outer) or `‖ ‖f‖_{p1 in y} ‖_{p2 in z}` (z outer).
pub fn mixed_norm(
    f: &BlockRadialProfile,
    p1: LorentzSpec,
    p2: LorentzSpec,
    order: NormOrder,
) -> f64 {
    let m1 = block_measures(&f.grid1, f.dims.dk());
    let m2 = block_measures(&f.grid2, f.dims.k);
    let (n1, n2) = (f.n1(), f.n2());
    match order {
        NormOrder::YOuter => {
            let inner: Vec<f64> = (0..n1)
                .map(|i| {
                    let row: Vec<f64> = (0..n2).map(|j| f.at(i, j).norm()).collect();
                    lorentz_from_samples(&row, &m2, p2)
                })
                .collect();
            lorentz_from_samples(&inner, &m1, p1)
        }
        NormOrder::ZOuter => {
            let inner: Vec<f64> = (0..n2)
                .map(|j| {
                    let col: Vec<f64> = (0..n1).map(|i| f.at(i, j).norm()).collect();
                    lorentz_from_samples(&col, &m1, p1)
                })
                .collect();
            lorentz_from_samples(&inner, &m2, p2)
        }
    }
}

/// `‖u‖_{(L_y^{p1})′(L_z^{p2})′} + ‖u‖_{(L_z^{p2})′(L_y^{p1})′}`.
pub fn x_dual_norm(f: &BlockRadialProfile, p1: LorentzSpec, p2: LorentzSpec) -> f64 {
    let (d1, d2) = (p1.dual(), p2.dual());
    mixed_norm(f, d1, d2, NormOrder::YOuter) + mixed_norm(f, d1, d2, NormOrder::ZOuter)
}

/// Upper bound `min` over both nesting orders for the (infimum) `X_p` norm.
pub fn x_norm_upper(f: &BlockRadialProfile, p1: LorentzSpec, p2: LorentzSpec) -> f64 {
    mixed_norm(f, p1, p2, NormOrder::YOuter).min(mixed_norm(f, p1, p2, NormOrder::ZOuter))
}

const TEXT_MAGIC: &str = "# blockradial profile v1";
const BIN_MAGIC: &[u8; 8] = b"BRPROF01";

fn grid_line(tag: &str, g: &RadialGrid) -> String {
    let mut s = format!("{tag} {}", g.order());
    for b in g.breaks() {
        s.push_str(&format!(" {b:.16e}"));
    }
    s
}

fn parse_err<E: std::fmt::Display>(e: E) -> Error {
    Error::Parse(e.to_string())
}

impl BlockRadialProfile {
    /// Text format: header (magic, `d k`, `n1 n2`, two grid lines) followed by
    /// rows `ρ₁ ρ₂ re im` at 17 significant digits.
    pub fn write_text<W: Write>(&self, w: W) -> Result<()> {
        let mut w = BufWriter::new(w);
        writeln!(w, "{TEXT_MAGIC}")?;
        writeln!(w, "{} {}", self.dims.d, self.dims.k)?;
        writeln!(w, "{} {}", self.n1(), self.n2())?;
        writeln!(w, "{}", grid_line("grid1", &self.grid1))?;
        writeln!(w, "{}", grid_line("grid2", &self.grid2))?;
        for (i, &a) in self.grid1.nodes().iter().enumerate() {
            for (j, &b) in self.grid2.nodes().iter().enumerate() {
                let v = self.at(i, j);
                writeln!(w, "{a:.16e} {b:.16e} {:.16e} {:.16e}", v.re, v.im)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let mut next = || -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::Parse("unexpected end of profile".into()))?
                .map_err(Error::from)
        };
        if next()?.trim() != TEXT_MAGIC {
            return Err(Error::Parse("missing profile header".into()));
        }
        let nums = |s: String| -> Result<Vec<f64>> {
            s.split_whitespace()
                .map(|t| t.parse::<f64>().map_err(parse_err))
                .collect()
        };
        let dk = nums(next()?)?;
        let sizes = nums(next()?)?;
        if dk.len() != 2 || sizes.len() != 2 {
            return Err(Error::Parse("malformed size lines".into()));
        }
        let dims = Dimensions::new(dk[0] as usize, dk[1] as usize)?;
        let mut read_grid = |tag: &str| -> Result<RadialGrid> {
            let line = next()?;
            let mut it = line.split_whitespace();
            if it.next() != Some(tag) {
                return Err(Error::Parse(format!("expected {tag} line")));
            }
            let order = it
                .next()
                .ok_or_else(|| Error::Parse("missing grid order".into()))?
                .parse::<usize>()
                .map_err(parse_err)?;
            let breaks = it
                .map(|t| t.parse::<f64>().map_err(parse_err))
                .collect::<Result<_>>()?;
            RadialGrid::from_breaks(breaks, order)
        };
        let grid1 = read_grid("grid1")?;
        let grid2 = read_grid("grid2")?;
        let (n1, n2) = (sizes[0] as usize, sizes[1] as usize);
        if grid1.len() != n1 || grid2.len() != n2 {
            return Err(Error::Parse(
                "grid sizes do not match the grid description".into(),
            ));
        }
        let mut values = Vec::with_capacity(n1 * n2);
        for idx in 0..n1 * n2 {
            let row = nums(next()?)?;
            if row.len() != 4 {
                return Err(Error::Parse(format!("row {idx} needs 4 columns")));
            }
            let (i, j) = (idx / n2, idx % n2);
            if row[0] != grid1.nodes()[i] || row[1] != grid2.nodes()[j] {
                return Err(Error::Parse(format!("row {idx} node mismatch")));
            }
            values.push(Complex64::new(row[2], row[3]));
        }
        Ok(Self {
            dims,
            grid1: Arc::new(grid1),
            grid2: Arc::new(grid2),
            values,
        })
    }

    /// Little-endian binary variant of the text format.
    pub fn write_binary<W: Write>(&self, w: W) -> Result<()> {
        let mut w = BufWriter::new(w);
        w.write_all(BIN_MAGIC)?;
        for x in [self.dims.d, self.dims.k] {
            w.write_all(&(x as u32).to_le_bytes())?;
        }
        for g in [&self.grid1, &self.grid2] {
            w.write_all(&(g.order() as u32).to_le_bytes())?;
            w.write_all(&(g.breaks().len() as u32).to_le_bytes())?;
            for b in g.breaks() {
                w.write_all(&b.to_le_bytes())?;
            }
        }
        for v in &self.values {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != BIN_MAGIC {
            return Err(Error::Parse("not a binary profile".into()));
        }
        let mut u32_buf = [0u8; 4];
        let mut f64_buf = [0u8; 8];
        let mut read_u32 = |r: &mut R| -> Result<usize> {
            r.read_exact(&mut u32_buf)?;
            Ok(u32::from_le_bytes(u32_buf) as usize)
        };
        let d = read_u32(&mut r)?;
        let k = read_u32(&mut r)?;
        let dims = Dimensions::new(d, k)?;
        let mut grids = Vec::with_capacity(2);
        for _ in 0..2 {
            let order = read_u32(&mut r)?;
            let nb = read_u32(&mut r)?;
            let mut breaks = Vec::with_capacity(nb);
            for _ in 0..nb {
                r.read_exact(&mut f64_buf)?;
                breaks.push(f64::from_le_bytes(f64_buf));
            }
            grids.push(Arc::new(RadialGrid::from_breaks(breaks, order)?));
        }
        let grid2 = grids.pop().unwrap();
        let grid1 = grids.pop().unwrap();
        let n = grid1.len() * grid2.len();
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            r.read_exact(&mut f64_buf)?;
            let re = f64::from_le_bytes(f64_buf);
            r.read_exact(&mut f64_buf)?;
            values.push(Complex64::new(re, f64::from_le_bytes(f64_buf)));
        }
        Ok(Self {
            dims,
            grid1,
            grid2,
            values,
        })
    }
}

/// Standard Gaussian `e^{-(ρ₁²+ρ₂²)/2}`.
pub fn gaussian(
    dims: Dimensions,
    grid1: Arc<RadialGrid>,
    grid2: Arc<RadialGrid>,
) -> BlockRadialProfile {
    BlockRadialProfile::from_real_fn(dims, grid1, grid2, |a, b| (-(a * a + b * b) / 2.0).exp())
}

/// `‖e^{-|x|²/2}‖_{L²(R^d)} = π^{d/4}`.
pub fn gaussian_l2(d: usize) -> f64 {
    PI.powf(d as f64 / 4.0)
}
