//! Command-line front end: one subcommand per experiment, each writing CSV
//! and SVG into an output directory.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::harness::{
    kernel_sample_points, make_family, riesz_map, svg, BlockAxis, FamilyKind, ProbeConfig,
    RieszProbeReport, TestFamily, Trend,
};
use crate::kernels::{check_kj_bound, check_tj_scaling, default_lorentz_exponent, extend};
use crate::lap::{
    plemelj_eps, plemelj_eps_extrapolated, plemelj_limit, residual, resolve, SymbolKind,
    SymbolModel,
};
use crate::oscint::{check_envelope, SweepConfig};
use crate::profile::{gaussian, BlockRadialProfile, Dimensions, RadialGrid};
use crate::{Error, Result};

/// Exit status of a run.
pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "blockradial",
    version,
    about = "Block-radial restriction-extension experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ratios |K_j| / bound over seeded parameter points.
    KernelBounds(Common),
    /// Oscillatory integrals against their envelope.
    OscSweep(Common),
    /// Tf for a stored profile (or a Gaussian).
    ApplyT(Common),
    /// Scaling ratios of the dyadic pieces T_j.
    TjScaling(Common),
    /// Outgoing resolvent, its parts and the residual.
    Resolve(Common),
    /// Closed-form Plemelj limits against the ε-ladder.
    Plemelj(Common),
    /// Ball-norm trajectories over a (1/p, 1/q) grid.
    RieszMap(Common),
    /// Sphere L² over L^p ratios across a family.
    SteinTomas(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML file with the run parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    symbol: Option<String>,
    /// Input profile in the text format.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Spatial grid `[0, r_max]` in `panels` Lobatto panels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub r_max: f64,
    pub panels: usize,
    pub order: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            r_max: 12.0,
            panels: 18,
            order: 17,
        }
    }
}

impl GridConfig {
    fn build(&self) -> Result<Arc<RadialGrid>> {
        Ok(Arc::new(RadialGrid::uniform(
            self.r_max,
            self.panels,
            self.order,
        )?))
    }
}

/// Every key a run may read; each subcommand uses its own subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub d: usize,
    pub k: usize,
    pub family: FamilyKind,
    pub widths: Vec<f64>,
    pub axis: BlockAxis,
    pub seed: u64,
    pub count: usize,
    /// Expansion order `L` of the dyadic pieces.
    pub order: usize,
    pub grid: GridConfig,
    pub j_min: u32,
    pub j_max: u32,
    /// Parameter points for `kernel-bounds`.
    pub points: usize,
    /// Exponent for the Lorentz scaling and the Stein–Tomas ratio; defaults
    /// to `2m/(m+1)` and `p_ST`.
    pub p: Option<f64>,
    pub symbol: String,
    /// Centres `c` of the test weights `h(r) = r e^{−(r−c)²}`.
    pub h_centers: Vec<f64>,
    pub eps_ladder: Vec<f64>,
    pub probe_points: Vec<(f64, f64)>,
    /// Interior lattice steps used when `probe_points` is empty.
    pub lattice: usize,
    pub radii: Vec<f64>,
    pub lorentz: bool,
    pub sweep: SweepConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            d: 4,
            k: 2,
            family: FamilyKind::Gaussian,
            widths: Vec::new(),
            axis: BlockAxis::First,
            seed: 7,
            count: 1,
            order: 3,
            grid: GridConfig::default(),
            j_min: 1,
            j_max: 6,
            points: 1000,
            p: None,
            symbol: "helmholtz".into(),
            h_centers: vec![0.6, 0.9, 1.2],
            eps_ladder: (3..9).map(|k| 0.5f64.powi(k)).collect(),
            probe_points: Vec::new(),
            lattice: 4,
            radii: vec![16.0, 32.0, 64.0, 128.0],
            lorentz: false,
            sweep: SweepConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    fn load(args: &Common) -> Result<Self> {
        let mut cfg = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                Self::from_toml(&text)?
            }
            None => Self::default(),
        };
        if let Some(d) = args.d {
            cfg.d = d;
        }
        if let Some(k) = args.k {
            cfg.k = k;
        }
        if let Some(f) = &args.family {
            cfg.family = f.parse().map_err(|e: Error| Error::Config(e.to_string()))?;
        }
        if let Some(s) = &args.symbol {
            cfg.symbol = s.clone();
        }
        Ok(cfg)
    }

    fn dims(&self) -> Result<Dimensions> {
        Dimensions::new(self.d, self.k).map_err(|e| Error::Config(e.to_string()))
    }

    fn family(&self) -> Result<TestFamily> {
        Ok(TestFamily {
            kind: self.family,
            d: self.d,
            k: self.k,
            widths: self.widths.clone(),
            axis: self.axis,
            seed: self.seed,
            count: self.count,
        })
    }

    fn symbol_model(&self) -> Result<SymbolModel> {
        let kind: SymbolKind = self
            .symbol
            .parse()
            .map_err(|e: Error| Error::Config(e.to_string()))?;
        SymbolModel::new(kind)
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e @ (Error::Config(_) | Error::Parse(_))) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_COMPUTATION
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    let (args, job): (&Common, fn(&RunConfig, &Common, &Path) -> Result<()>) = match &command {
        Command::KernelBounds(a) => (a, kernel_bounds),
        Command::OscSweep(a) => (a, osc_sweep),
        Command::ApplyT(a) => (a, apply_t),
        Command::TjScaling(a) => (a, tj_scaling),
        Command::Resolve(a) => (a, resolve_cmd),
        Command::Plemelj(a) => (a, plemelj),
        Command::RieszMap(a) => (a, riesz),
        Command::SteinTomas(a) => (a, stein_tomas),
    };
    let cfg = RunConfig::load(args)?;
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from("report"));
    fs::create_dir_all(&out)?;
    job(&cfg, args, &out)
}

fn write_rows<S: Serialize>(path: &Path, rows: impl IntoIterator<Item = S>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_svg(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}

fn load_profile(args: &Common, cfg: &RunConfig) -> Result<BlockRadialProfile> {
    match &args.input {
        Some(path) => {
            let file =
                File::open(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            BlockRadialProfile::read_text(BufReader::new(file))
        }
        None => {
            let g = cfg.grid.build()?;
            Ok(gaussian(cfg.dims()?, Arc::clone(&g), g))
        }
    }
}

/// Largest `|g|` on the shells `[R/√2, R]` of a dyadic radius ladder.
fn shell_maxima(g: &BlockRadialProfile) -> (Vec<f64>, Vec<f64>) {
    let mut radii = Vec::new();
    let mut r = 1.0;
    while r <= g.r_max() {
        radii.push(r);
        r *= std::f64::consts::SQRT_2;
    }
    let mut top = vec![0.0f64; radii.len()];
    for (i, &a) in g.grid1.nodes().iter().enumerate() {
        for (j, &b) in g.grid2.nodes().iter().enumerate() {
            let rho = a.hypot(b);
            if let Some(s) = radii.iter().position(|&r| rho <= r) {
                top[s] = top[s].max(g.at(i, j).norm());
            }
        }
    }
    (radii, top)
}

fn kernel_bounds(cfg: &RunConfig, _: &Common, out: &Path) -> Result<()> {
    let dims = cfg.dims()?;
    let points = kernel_sample_points(cfg.j_min..=cfg.j_max, cfg.points, cfg.seed);
    let rep = check_kj_bound(dims, cfg.order, &points)?;
    rep.write_csv(File::create(out.join("kernel_bounds.csv"))?)?;
    let (mut js, mut worst) = (Vec::new(), Vec::new());
    for j in cfg.j_min..=cfg.j_max {
        let m = rep
            .rows
            .iter()
            .filter(|r| r.j == j)
            .map(|r| r.ratio)
            .fold(0.0, f64::max);
        js.push(2f64.powi(j as i32));
        worst.push(m / rep.c_star.max(f64::MIN_POSITIVE));
    }
    let plot = svg::loglog(
        "max |K_j| / (C* bound)",
        "2^j",
        "ratio",
        &[("max ratio".into(), js, worst)],
    );
    write_svg(&out.join("kernel_bounds.svg"), &plot)?;
    println!(
        "C* = {:.6e}, exceedance = {:.4}",
        rep.c_star, rep.exceedance
    );
    Ok(())
}

fn osc_sweep(cfg: &RunConfig, _: &Common, out: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(out.join("osc_sweep.csv"))?;
    let mut series = Vec::new();
    for (a1, a2) in cfg.sweep.pairs() {
        let rep = check_envelope(&cfg.sweep.specs(a1, a2)?)?;
        for row in &rep.rows {
            w.serialize(row)?;
        }
        let lams = cfg.sweep.lambdas.clone();
        let worst = lams
            .iter()
            .map(|&l| {
                let m = rep
                    .rows
                    .iter()
                    .filter(|r| r.lambda == l)
                    .map(|r| r.ratio)
                    .fold(0.0, f64::max);
                m / rep.c_star.max(f64::MIN_POSITIVE)
            })
            .collect();
        println!(
            "alpha = ({a1}, {a2}): C* = {:.4e}, exceedance = {:.4}",
            rep.c_star, rep.exceedance
        );
        series.push((format!("({a1}, {a2})"), lams, worst));
    }
    w.flush()?;
    let plot = svg::loglog("max |I| / (C* envelope)", "lambda", "ratio", &series);
    write_svg(&out.join("osc_sweep.svg"), &plot)
}

#[derive(Serialize)]
struct ValueRow {
    rho1: f64,
    rho2: f64,
    re: f64,
    im: f64,
}

fn value_rows(g: &BlockRadialProfile) -> Vec<ValueRow> {
    let mut rows = Vec::with_capacity(g.values.len());
    for (i, &a) in g.grid1.nodes().iter().enumerate() {
        for (j, &b) in g.grid2.nodes().iter().enumerate() {
            let v = g.at(i, j);
            rows.push(ValueRow {
                rho1: a,
                rho2: b,
                re: v.re,
                im: v.im,
            });
        }
    }
    rows
}

fn apply_t(cfg: &RunConfig, args: &Common, out: &Path) -> Result<()> {
    let f = load_profile(args, cfg)?;
    let tf = extend(&f)?;
    tf.write_text(File::create(out.join("tf.profile"))?)?;
    write_rows(&out.join("tf.csv"), value_rows(&tf))?;
    let (r, m) = shell_maxima(&tf);
    write_svg(
        &out.join("tf.svg"),
        &svg::loglog(
            "shell maxima of |Tf|",
            "radius",
            "|Tf|",
            &[("Tf".into(), r, m)],
        ),
    )
}

fn tj_scaling(cfg: &RunConfig, _: &Common, out: &Path) -> Result<()> {
    let dims = cfg.dims()?;
    let grid = cfg.grid.build()?;
    let family = make_family(&cfg.family()?)?
        .iter()
        .map(|m| m.profile_on(Arc::clone(&grid), Arc::clone(&grid)))
        .collect::<Result<Vec<_>>>()?;
    let p = cfg.p.unwrap_or_else(|| default_lorentz_exponent(dims));
    let rep = check_tj_scaling(&family, cfg.j_min..=cfg.j_max, cfg.order, p)?;
    rep.write_csv(File::create(out.join("tj_scaling.csv"))?)?;
    let x: Vec<f64> = rep.rows.iter().map(|r| 2f64.powi(r.j as i32)).collect();
    let plot = svg::loglog(
        "T_j scaling ratios",
        "2^j",
        "ratio",
        &[
            (
                "L2 / p_ST".into(),
                x.clone(),
                rep.rows.iter().map(|r| r.l2_ratio).collect(),
            ),
            (
                "Lorentz".into(),
                x,
                rep.rows.iter().map(|r| r.lorentz_ratio).collect(),
            ),
        ],
    );
    write_svg(&out.join("tj_scaling.svg"), &plot)?;
    println!(
        "spread: L2 {:.3}, Lorentz {:.3}",
        rep.l2_spread(),
        rep.lorentz_spread()
    );
    Ok(())
}

/// Files written by `resolve`.
#[derive(Debug, Serialize, Deserialize)]
pub struct PartsManifest {
    pub symbol: String,
    pub zeros: Vec<f64>,
    pub solution: String,
    pub regular: String,
    pub delta: Vec<String>,
    pub pv: Vec<String>,
    pub real_csv: String,
    pub imag_csv: String,
    pub residual: f64,
    pub residual_inner_radius: f64,
    pub parts_mismatch: f64,
}

#[derive(Serialize)]
struct PartRow {
    rho1: f64,
    rho2: f64,
    value: f64,
}

fn resolve_cmd(cfg: &RunConfig, args: &Common, out: &Path) -> Result<()> {
    let symbol = cfg.symbol_model()?;
    let f = load_profile(args, cfg)?;
    let field = resolve(&f, &symbol)?;
    let res = residual(&f, &symbol, &field)?;
    let save = |name: String, g: &BlockRadialProfile| -> Result<String> {
        g.write_text(File::create(out.join(&name))?)?;
        Ok(name)
    };
    let part_rows = |pick: fn(Complex64) -> f64| {
        value_rows(&field.profile)
            .into_iter()
            .map(move |r| PartRow {
                rho1: r.rho1,
                rho2: r.rho2,
                value: pick(Complex64::new(r.re, r.im)),
            })
    };
    write_rows(&out.join("u_real.csv"), part_rows(|v| v.re))?;
    write_rows(&out.join("u_imag.csv"), part_rows(|v| v.im))?;
    let manifest = PartsManifest {
        symbol: symbol.kind().to_string(),
        zeros: symbol.zeros().to_vec(),
        solution: save("u.profile".into(), &field.profile)?,
        regular: save("regular.profile".into(), &field.regular)?,
        delta: (0..field.delta_parts.len())
            .map(|m| save(format!("delta_{m}.profile"), &field.delta_parts[m]))
            .collect::<Result<_>>()?,
        pv: (0..field.pv_parts.len())
            .map(|m| save(format!("pv_{m}.profile"), &field.pv_parts[m]))
            .collect::<Result<_>>()?,
        real_csv: "u_real.csv".into(),
        imag_csv: "u_imag.csv".into(),
        residual: res.residual,
        residual_inner_radius: res.inner_radius,
        parts_mismatch: field.parts_mismatch(),
    };
    let text = toml::to_string(&manifest).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(out.join("parts.toml"), text)?;
    let (r, m) = shell_maxima(&field.profile);
    write_svg(
        &out.join("u.svg"),
        &svg::loglog(
            "shell maxima of |u_f|",
            "radius",
            "|u|",
            &[("u".into(), r, m)],
        ),
    )?;
    println!(
        "residual = {:.3e} on the ball of radius {:.3}",
        res.residual, res.inner_radius
    );
    Ok(())
}

#[derive(Serialize)]
struct PlemeljRow {
    zero: f64,
    h_center: f64,
    limit_re: f64,
    limit_im: f64,
    oracle_re: f64,
    oracle_im: f64,
    relative_gap: f64,
}

fn plemelj(cfg: &RunConfig, _: &Common, out: &Path) -> Result<()> {
    let symbol = cfg.symbol_model()?;
    if cfg.eps_ladder.len() < 2 {
        return Err(Error::Config(
            "eps_ladder needs at least two entries".into(),
        ));
    }
    let mut rows = Vec::new();
    let mut series = Vec::new();
    for (m, &rm) in symbol.zeros().iter().enumerate() {
        for &c in &cfg.h_centers {
            let h = move |r: f64| r * (-(r - c) * (r - c)).exp();
            let limit = plemelj_limit(&symbol, m, h)?;
            let oracle = plemelj_eps_extrapolated(&symbol, m, h, &cfg.eps_ladder)?;
            let gaps = cfg
                .eps_ladder
                .iter()
                .map(|&e| Ok((plemelj_eps(&symbol, m, h, e)? - limit).norm() / limit.norm()))
                .collect::<Result<Vec<_>>>()?;
            series.push((
                format!("r = {rm:.3}, c = {c}"),
                cfg.eps_ladder.clone(),
                gaps,
            ));
            rows.push(PlemeljRow {
                zero: rm,
                h_center: c,
                limit_re: limit.re,
                limit_im: limit.im,
                oracle_re: oracle.re,
                oracle_im: oracle.im,
                relative_gap: (limit - oracle).norm() / limit.norm(),
            });
        }
    }
    let worst = rows.iter().map(|r| r.relative_gap).fold(0.0, f64::max);
    write_rows(&out.join("plemelj.csv"), rows)?;
    write_svg(
        &out.join("plemelj.svg"),
        &svg::loglog("distance to the limit", "eps", "relative gap", &series),
    )?;
    println!("largest relative gap to the extrapolated ladder: {worst:.3e}");
    Ok(())
}

fn riesz(cfg: &RunConfig, _: &Common, out: &Path) -> Result<()> {
    let probe = if cfg.probe_points.is_empty() {
        ProbeConfig {
            lorentz: cfg.lorentz,
            ..ProbeConfig::interior_lattice(cfg.d, cfg.k, cfg.lattice, &cfg.radii)
        }
    } else {
        ProbeConfig {
            points: cfg.probe_points.clone(),
            radii: cfg.radii.clone(),
            lorentz: cfg.lorentz,
        }
    };
    let rep: RieszProbeReport = riesz_map(&cfg.family()?, &probe)?;
    rep.write_csv(File::create(out.join("riesz_map.csv"))?)?;
    write_svg(&out.join("riesz_map.svg"), &rep.svg())?;
    let series: Vec<_> = rep
        .points
        .iter()
        .map(|p| {
            (
                format!("({:.3}, {:.3})", p.p_inv, p.q_inv),
                p.trajectory.radii.clone(),
                p.trajectory.ratios.clone(),
            )
        })
        .collect();
    write_svg(
        &out.join("trajectories.svg"),
        &svg::loglog("ball-norm ratios", "R", "ratio", &series),
    )?;
    let count = |t: fn(&Trend) -> bool| rep.points.iter().filter(|p| t(&p.trend)).count();
    println!(
        "{} points: {} bounded-trend, {} divergent-trend, {} inconclusive",
        rep.points.len(),
        count(|t| matches!(t, Trend::Bounded)),
        count(|t| matches!(t, Trend::Divergent(_))),
        count(|t| matches!(t, Trend::Inconclusive))
    );
    Ok(())
}

#[derive(Serialize)]
struct SteinTomasRow {
    label: String,
    width: f64,
    p: f64,
    ratio: f64,
    sphere_l2: f64,
    norm_p: f64,
    degenerate: bool,
}

fn stein_tomas(cfg: &RunConfig, _: &Common, out: &Path) -> Result<()> {
    let dims = cfg.dims()?;
    let p = cfg.p.unwrap_or_else(|| dims.p_st());
    let rows: Vec<SteinTomasRow> = make_family(&cfg.family()?)?
        .iter()
        .map(|m| {
            let st = m.stein_tomas_ratio(p);
            SteinTomasRow {
                label: m.label.clone(),
                width: m.width,
                p,
                ratio: st.ratio,
                sphere_l2: st.sphere_l2,
                norm_p: st.norm_p,
                degenerate: st.degenerate,
            }
        })
        .collect();
    let x = rows.iter().map(|r| r.width).collect();
    let y = rows.iter().map(|r| r.ratio).collect();
    write_svg(
        &out.join("stein_tomas.svg"),
        &svg::loglog(
            "sphere L2 over ||f||_p^2",
            "width",
            "ratio",
            &[("ratio".into(), x, y)],
        ),
    )?;
    write_rows(&out.join("stein_tomas.csv"), rows)
}
