use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use nfk_core::borel::{borel_transform, gevrey_fit, BorelRecord, BorelSeries};
use nfk_core::convolution::{convolve_monomial, convolve_numeric, convolve_series, QuadratureConfig};
use nfk_core::laplace::{laplace_polynomial, LaplaceOptions};
use nfk_core::pipeline::{hopf_report, laplace_monomial_exact, normal_form, verify_file, verify_spec, NormalFormFile, DEFAULT_TOL};
use nfk_core::problem::ProblemSpec;
use nfk_core::sector::SectorSpec;
use nfk_core::series::{CoeffRecord, TruncatedSeries};
use nfk_core::Error;

mod output;

use output::to_json_string;

const AFTER_HELP: &str = "\
Exit codes: 0 success, 1 verification failure, 2 validation error, 3 numerical failure.
Errors are written to stderr as JSON {\"error\": {\"kind\", \"message\"}, \"exit_code\"}.
NFK_THREADS caps the worker threads used for sample sweeps.

Series files are JSON arrays of {l, j: [j1..jn], i, re, im} (i is 1-based);
Borel series use {m, j, i, re, im}. Problem files may be JSON or TOML.";

#[derive(Parser)]
#[command(name = "nfk", version, about = "Formal normal forms and k-summation for saddle-node vector fields", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Tolerance; the default depends on the command.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file; writes the result JSON (g, phi, diagnostics).
    /// Exit 0 iff the relative residual is within --tol (default 1e-10).
    NormalForm {
        #[arg(value_name = "PROBLEM")]
        spec: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Order-k Borel transform of an O(x) series file.
    Borel {
        series: PathBuf,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Laplace transform along a ray, of w^n (--monomial) or of a Borel
    /// series file evaluated at --z.
    ///
    /// With --csv the output has columns x_re,x_im,value_re,value_im,est_error.
    Laplace {
        /// Borel series file; alternative to --monomial.
        input: Option<PathBuf>,
        #[arg(long)]
        monomial: Option<usize>,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Comma-separated |x| values on the ray theta.
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
        /// Comma-separated z values (real) for series input.
        #[arg(long, value_delimiter = ',')]
        z: Vec<f64>,
        /// 1-based component for series input.
        #[arg(long, default_value_t = 1)]
        component: usize,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        csv: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Convolution w^a *_k w^b (--a, --b), or of two Borel series files.
    Convolve {
        files: Vec<PathBuf>,
        #[arg(long)]
        a: Option<usize>,
        #[arg(long)]
        b: Option<usize>,
        #[arg(long)]
        k: usize,
        /// Quadrature nodes for the numeric cross-check.
        #[arg(long, default_value_t = 64)]
        nodes: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Gevrey fit ||h_l|| ~ K T^(l-1) Gamma(l/k). Accepts a result file
    /// (fits x*phi) or a series file with --k.
    ///
    /// With --csv the output has columns l,norm.
    Gevrey {
        input: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        /// z-radius used in the order norms.
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long)]
        csv: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Zero-Hopf real normal form: h10 table, polar samples, manifold.
    ///
    /// The manifold CSV (--manifold-csv) has columns x,u1_re,u1_im,u2_re,u2_im.
    Hopf {
        #[arg(value_name = "PROBLEM")]
        spec: PathBuf,
        #[arg(long)]
        manifold_csv: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run residual, route-equivalence, Jordan-oracle, bound-margin and
    /// (for zero-Hopf problems) reality checks on a problem or result file.
    /// Exit 1 if any check fails.
    Verify {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure { code: 2, kind: "validation", message: e.to_string() }
        } else {
            Failure { code: 3, kind: "numerical", message: e.to_string() }
        }
    }
}

fn validation(msg: impl Into<String>) -> Failure {
    Failure { code: 2, kind: "validation", message: msg.into() }
}

type CmdResult = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| validation(format!("cannot read {}: {e}", path.display())))
}

/// JSON as is; TOML when the extension says so or JSON parsing fails.
fn read_value(path: &Path) -> Result<Value, Failure> {
    let text = read(path)?;
    let is_toml = path.extension().map_or(false, |e| e == "toml");
    if !is_toml {
        if let Ok(v) = serde_json::from_str(&text) {
            return Ok(v);
        }
    }
    toml::from_str::<Value>(&text).map_err(|e| validation(format!("{} is neither JSON nor TOML: {e}", path.display())))
}

fn read_spec(path: &Path) -> Result<ProblemSpec, Failure> {
    serde_json::from_value(read_value(path)?).map_err(|e| validation(format!("problem file: {e}")))
}

fn emit(common: &Common, text: &str) -> Result<(), Failure> {
    match &common.out {
        Some(p) => fs::write(p, text).map_err(|e| validation(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| validation(format!("stdout: {e}")))
        }
    }
}

fn emit_json<T: Serialize>(common: &Common, v: &T) -> Result<(), Failure> {
    let value = serde_json::to_value(v).map_err(|e| validation(format!("serialization: {e}")))?;
    emit(common, &to_json_string(&value))
}

/// Dimensions implied by a set of series records.
fn series_from_records(records: &[CoeffRecord]) -> Result<TruncatedSeries, Failure> {
    let first = records.first().ok_or_else(|| validation("empty series file"))?;
    let n_vars = first.j.len();
    let n_comps = records.iter().map(|r| r.i).max().unwrap_or(1);
    let l_max = records.iter().map(|r| r.l).max().unwrap_or(0);
    let j_max = records.iter().map(|r| r.j.iter().sum::<u32>() as usize).max().unwrap_or(0);
    Ok(TruncatedSeries::from_records(records, n_vars, n_comps, l_max, j_max)?)
}

fn borel_from_records(records: &[BorelRecord]) -> Result<BorelSeries, Failure> {
    let first = records.first().ok_or_else(|| validation("empty Borel series file"))?;
    let n_vars = first.j.len();
    let n_comps = records.iter().map(|r| r.i).max().unwrap_or(1);
    let m_max = records.iter().map(|r| r.m).max().unwrap_or(0);
    let j_max = records.iter().map(|r| r.j.iter().sum::<u32>() as usize).max().unwrap_or(0);
    Ok(BorelSeries::from_records(records, n_vars, n_comps, m_max, j_max)?)
}

fn read_borel(path: &Path) -> Result<BorelSeries, Failure> {
    let records: Vec<BorelRecord> =
        serde_json::from_value(read_value(path)?).map_err(|e| validation(format!("{}: {e}", path.display())))?;
    borel_from_records(&records)
}

fn cmd_normal_form(spec: &Path, common: &Common) -> CmdResult {
    let spec = read_spec(spec)?;
    let result = normal_form(&spec)?;
    emit_json(common, &result)?;
    Ok(if result.within_tolerance(common.tol.unwrap_or(DEFAULT_TOL)) { 0 } else { 1 })
}

fn cmd_borel(series: &Path, k: usize, common: &Common) -> CmdResult {
    let records: Vec<CoeffRecord> =
        serde_json::from_value(read_value(series)?).map_err(|e| validation(format!("series file: {e}")))?;
    let hb = borel_transform(&series_from_records(&records)?, k)?;
    emit_json(common, &hb.to_records())?;
    Ok(0)
}

/// Sector for ad hoc Laplace evaluations: opening pi/(2k) unless given,
/// nu just above the largest |x|, and mu as large as the radius rule allows.
fn laplace_sector(theta: f64, alpha: Option<f64>, mu: Option<f64>, k: usize, xs: &[f64]) -> Result<SectorSpec, Failure> {
    let alpha = alpha.unwrap_or(std::f64::consts::PI / (2.0 * k as f64));
    let xmax = xs.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let nu = 1.01 * xmax;
    let mut sec = SectorSpec::new(theta, alpha, nu, 1.0, k);
    sec.mu = mu.unwrap_or(0.99 * (k as f64 * alpha / 4.0).sin().powf(1.0 / k as f64) / nu);
    sec.validate()?;
    Ok(sec)
}

#[derive(Serialize)]
struct LaplaceRow {
    x_re: f64,
    x_im: f64,
    value_re: f64,
    value_im: f64,
    est_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_re: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_im: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_laplace(
    input: Option<&Path>,
    monomial: Option<usize>,
    k: usize,
    xs: &[f64],
    z: &[f64],
    component: usize,
    theta: f64,
    alpha: Option<f64>,
    mu: Option<f64>,
    csv: bool,
    common: &Common,
) -> CmdResult {
    let sec = laplace_sector(theta, alpha, mu, k, xs)?;
    let opts = LaplaceOptions { tol: common.tol.unwrap_or(1e-12), ..LaplaceOptions::default() };
    let coeffs: Vec<C64> = match (input, monomial) {
        (None, Some(n)) => {
            let mut c = vec![C64::new(0.0, 0.0); n + 1];
            c[n] = C64::new(1.0, 0.0);
            c
        }
        (Some(path), None) => {
            let hb = read_borel(path)?;
            if z.len() != hb.n_vars() {
                return Err(validation(format!("--z needs {} values, got {}", hb.n_vars(), z.len())));
            }
            if component == 0 || component > hb.n_comps() {
                return Err(validation(format!("--component {component} outside 1..={}", hb.n_comps())));
            }
            let zc: Vec<C64> = z.iter().map(|&v| C64::new(v, 0.0)).collect();
            let mut c = vec![C64::new(0.0, 0.0); hb.m_max() + 1];
            for (m, j, i, v) in hb.nonzero() {
                if i + 1 == component {
                    let zp = j.iter().zip(&zc).fold(C64::new(1.0, 0.0), |acc, (&e, zq)| acc * zq.powu(e));
                    c[m] += v * zp;
                }
            }
            c
        }
        _ => return Err(validation("give exactly one of a Borel series file or --monomial")),
    };
    let rows: Vec<Result<LaplaceRow, Error>> = xs
        .par_iter()
        .map(|&r| {
            let x = C64::from_polar(r, theta);
            let v = laplace_polynomial(&coeffs, x, &sec, &opts)?;
            let exact = monomial.map(|n| laplace_monomial_exact(n, x, k));
            Ok(LaplaceRow {
                x_re: x.re,
                x_im: x.im,
                value_re: v.value.re,
                value_im: v.value.im,
                est_error: v.error_estimate,
                exact_re: exact.map(|e| e.re),
                exact_im: exact.map(|e| e.im),
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    if csv {
        let mut s = String::from("x_re,x_im,value_re,value_im,est_error\n");
        for r in &rows {
            s.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r.x_re, r.x_im, r.value_re, r.value_im, r.est_error
            ));
        }
        emit(common, &s)?;
    } else {
        emit_json(common, &rows)?;
    }
    Ok(0)
}

fn cmd_convolve(files: &[PathBuf], a: Option<usize>, b: Option<usize>, k: usize, nodes: usize, common: &Common) -> CmdResult {
    match (files, a, b) {
        ([], Some(a), Some(b)) => {
            let (degree, coefficient) = convolve_monomial(a, b, k);
            let cfg = QuadratureConfig { node_count: nodes, tolerance: common.tol.unwrap_or(1e-10), ..QuadratureConfig::default() };
            // the quadrature value at w = 1 is the coefficient itself
            let w = C64::new(1.0, 0.0);
            let q = convolve_numeric(&|s| s.powu(a as u32), &|s| s.powu(b as u32), w, k, &cfg)?;
            emit_json(
                common,
                &json!({
                    "a": a, "b": b, "k": k,
                    "degree": degree,
                    "coefficient": coefficient,
                    "quadrature": {"value": q.value.re, "error_estimate": q.error_estimate, "nodes": nodes}
                }),
            )?;
            Ok(0)
        }
        ([fa, fb], None, None) => {
            let ha = read_borel(fa)?;
            let hb = read_borel(fb)?;
            let m = ha.m_max() + hb.m_max() + 1;
            let j = ha.j_max().max(hb.j_max());
            let out = convolve_series(&ha.pad_polynomial(m, j), &hb.pad_polynomial(m, j), k)?;
            emit_json(common, &out.to_records())?;
            Ok(0)
        }
        _ => Err(validation("give either --a and --b, or two Borel series files")),
    }
}

fn cmd_gevrey(input: &Path, k: Option<usize>, radius: f64, csv: bool, common: &Common) -> CmdResult {
    let value = read_value(input)?;
    let (series, k) = if value.get("problem").is_some() {
        let file: NormalFormFile = serde_json::from_value(value).map_err(|e| validation(format!("result file: {e}")))?;
        let (p, _, phi) = file.load()?;
        let xphi = phi.pad_polynomial(phi.l_max() + 1, phi.j_max()).shift_x(1);
        (xphi, k.unwrap_or(p.spectrum.k))
    } else {
        let records: Vec<CoeffRecord> = serde_json::from_value(value).map_err(|e| validation(format!("series file: {e}")))?;
        let k = k.ok_or_else(|| validation("--k is required for a plain series file"))?;
        (series_from_records(&records)?, k)
    };
    let fit = gevrey_fit(&series, k, radius)?;
    if csv {
        emit(common, &fit.to_csv())?;
    } else {
        emit_json(common, &fit)?;
    }
    Ok(0)
}

fn cmd_hopf(spec: &Path, manifold_csv: Option<&Path>, common: &Common) -> CmdResult {
    let spec = read_spec(spec)?;
    if spec.hopf.is_none() {
        return Err(validation("problem file has no hopf block"));
    }
    let report = hopf_report(&spec)?;
    if let Some(p) = manifold_csv {
        fs::write(p, report.manifold.to_csv()).map_err(|e| validation(format!("cannot write {}: {e}", p.display())))?;
    }
    emit_json(common, &report)?;
    let tol = common.tol.unwrap_or(1e-12);
    Ok(if report.p_defect <= tol && report.manifold.realness_defect <= 1e-8 { 0 } else { 1 })
}

fn cmd_verify(input: &Path, common: &Common) -> CmdResult {
    let value = read_value(input)?;
    let tol = common.tol.unwrap_or(DEFAULT_TOL);
    let report = if value.get("problem").is_some() {
        let file: NormalFormFile = serde_json::from_value(value).map_err(|e| validation(format!("result file: {e}")))?;
        verify_file(&file, tol)?
    } else {
        let spec: ProblemSpec = serde_json::from_value(value).map_err(|e| validation(format!("problem file: {e}")))?;
        verify_spec(&spec, tol)?
    };
    emit_json(common, &report)?;
    Ok(if report.all_pass { 0 } else { 1 })
}

fn init_threads() {
    if let Some(n) = std::env::var("NFK_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn run(cli: Cli) -> CmdResult {
    match &cli.command {
        Command::NormalForm { spec, common } => cmd_normal_form(spec, common),
        Command::Borel { series, k, common } => cmd_borel(series, *k, common),
        Command::Laplace { input, monomial, k, x, z, component, theta, alpha, mu, csv, common } => {
            cmd_laplace(input.as_deref(), *monomial, *k, x, z, *component, *theta, *alpha, *mu, *csv, common)
        }
        Command::Convolve { files, a, b, k, nodes, common } => cmd_convolve(files, *a, *b, *k, *nodes, common),
        Command::Gevrey { input, k, radius, csv, common } => cmd_gevrey(input, *k, *radius, *csv, common),
        Command::Hopf { spec, manifold_csv, common } => cmd_hopf(spec, manifold_csv.as_deref(), common),
        Command::Verify { input, common } => cmd_verify(input, common),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            let v = json!({"error": {"kind": f.kind, "message": f.message}, "exit_code": f.code});
            eprintln!("{}", to_json_string(&v).trim_end());
            ExitCode::from(f.code)
        }
    }
}
