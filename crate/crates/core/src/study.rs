//! Reproducible convergence studies: sweep the horizon, build expansions and
//! exact distribution curves, emit one CSV row per horizon plus fitted
//! log-log slopes and pass/fail flags.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;

use crate::dist::{kolmogorov, lp_distance, weighted_sup, wp_exact, wp_upper, CdfCurve};
use crate::error::StudyError;
use crate::expansion::{
    selfnorm_polynomials, sqrtn_polynomials, NormalizationPair,
};
use crate::invert::{invert_cf, linspace, InversionOptions};
use crate::markov::{asymptotic_pq, char_fn, exact_cumulants, FiniteChainSpec};
use crate::models::{builtin, BuiltinModel};
use crate::sim::{dkw_band, empirical_cdf, sample_chain};

/// Which centering/scaling the study expands around.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormalizationMode {
    SelfNorm,
    SqrtN,
    Custom { a_n: f64, b_shift: f64 },
}

/// Distance columns a study can request.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistanceKind {
    Kolmogorov,
    Weighted,
    Lp(u8),
    W1,
    WpUpper(u8),
    WpExact(u8),
    Moment3,
}

impl DistanceKind {
    pub fn token(&self) -> String {
        match self {
            DistanceKind::Kolmogorov => "kolmogorov".into(),
            DistanceKind::Weighted => "weighted".into(),
            DistanceKind::Lp(p) => format!("lp{p}"),
            DistanceKind::W1 => "w1".into(),
            DistanceKind::WpUpper(p) => format!("wpu{p}"),
            DistanceKind::WpExact(p) => format!("wpe{p}"),
            DistanceKind::Moment3 => "moment3".into(),
        }
    }

    fn parse(tok: &str) -> Option<DistanceKind> {
        match tok {
            "kolmogorov" => Some(DistanceKind::Kolmogorov),
            "weighted" => Some(DistanceKind::Weighted),
            "w1" => Some(DistanceKind::W1),
            "moment3" => Some(DistanceKind::Moment3),
            _ => {
                let (head, num) = tok.split_at(tok.len().saturating_sub(1));
                let p: u8 = num.parse().ok()?;
                match head {
                    "lp" => Some(DistanceKind::Lp(p)),
                    "wpu" => Some(DistanceKind::WpUpper(p)),
                    "wpe" => Some(DistanceKind::WpExact(p)),
                    _ => None,
                }
            }
        }
    }

    /// Theorem-guaranteed log-log slope in `n`, given the study's order `r`:
    /// the comparison against `Psi_r` is `o(B_n^{-r})` in sup/Lp/moment form
    /// and `o(B_n^{-r/p})` in transport form, while the Berry-Esseen
    /// transport distance to the normal is `O(B_n^{-1})`. With linearly
    /// growing variance, rates halve in `n`.
    fn expected_slope(&self, r: usize) -> f64 {
        let rf = r as f64;
        match self {
            DistanceKind::Kolmogorov
            | DistanceKind::Weighted
            | DistanceKind::Lp(_)
            | DistanceKind::Moment3 => -rf / 2.0,
            DistanceKind::W1 | DistanceKind::WpExact(_) => -0.5,
            DistanceKind::WpUpper(p) => -rf / (2.0 * *p as f64),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub model: String,
    pub params: Vec<f64>,
    pub chain_file: Option<String>,
    pub nsweep: Vec<usize>,
    pub order: usize,
    pub power: f64,
    pub normalization: NormalizationMode,
    pub distances: Vec<DistanceKind>,
    pub mc_count: usize,
    pub seed: u64,
    pub slope_margin: f64,
    pub grid_halfwidth: f64,
    pub grid_points: usize,
    pub inversion_tolerance: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: "two-state-markov".into(),
            params: vec![0.3],
            chain_file: None,
            nsweep: vec![64, 128, 256, 512, 1024, 2048, 4096],
            order: 1,
            power: 3.0,
            normalization: NormalizationMode::SelfNorm,
            distances: vec![
                DistanceKind::Kolmogorov,
                DistanceKind::Weighted,
                DistanceKind::Lp(1),
                DistanceKind::Lp(2),
                DistanceKind::W1,
                DistanceKind::WpUpper(2),
                DistanceKind::WpExact(2),
                DistanceKind::Moment3,
            ],
            mc_count: 0,
            seed: 7,
            slope_margin: 0.15,
            grid_halfwidth: 8.0,
            grid_points: 401,
            inversion_tolerance: 5e-2,
        }
    }
}

impl ExperimentConfig {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "model = {}", self.model);
        if !self.params.is_empty() {
            let _ = write!(out, "params =");
            for p in &self.params {
                let _ = write!(out, " {}", p);
            }
            out.push('\n');
        }
        if let Some(f) = &self.chain_file {
            let _ = writeln!(out, "chain_file = {}", f);
        }
        let _ = write!(out, "nsweep =");
        for n in &self.nsweep {
            let _ = write!(out, " {}", n);
        }
        out.push('\n');
        let _ = writeln!(out, "order = {}", self.order);
        let _ = writeln!(out, "power = {}", self.power);
        let norm = match self.normalization {
            NormalizationMode::SelfNorm => "selfnorm".to_string(),
            NormalizationMode::SqrtN => "sqrt-n".to_string(),
            NormalizationMode::Custom { a_n, b_shift } => format!("custom {} {}", a_n, b_shift),
        };
        let _ = writeln!(out, "normalization = {}", norm);
        let _ = write!(out, "distances =");
        for d in &self.distances {
            let _ = write!(out, " {}", d.token());
        }
        out.push('\n');
        let _ = writeln!(out, "mc_count = {}", self.mc_count);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "slope_margin = {}", self.slope_margin);
        let _ = writeln!(out, "grid_halfwidth = {}", self.grid_halfwidth);
        let _ = writeln!(out, "grid_points = {}", self.grid_points);
        let _ = writeln!(out, "inversion_tolerance = {}", self.inversion_tolerance);
        out
    }

    pub fn from_text(text: &str) -> Result<ExperimentConfig, StudyError> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(StudyError::ConfigParse {
                    line: lineno + 1,
                    message: "expected key = value".into(),
                });
            };
            let key = key.trim();
            let value = value.trim();
            let bad = |message: &str| StudyError::ConfigParse {
                line: lineno + 1,
                message: message.into(),
            };
            match key {
                "model" => cfg.model = value.to_string(),
                "params" => {
                    cfg.params = value
                        .split_whitespace()
                        .map(|s| s.parse().map_err(|_| bad("bad number in params")))
                        .collect::<Result<_, _>>()?;
                }
                "chain_file" => cfg.chain_file = Some(value.to_string()),
                "nsweep" => {
                    cfg.nsweep = value
                        .split_whitespace()
                        .map(|s| s.parse().map_err(|_| bad("bad integer in nsweep")))
                        .collect::<Result<_, _>>()?;
                    if cfg.nsweep.windows(2).any(|w| w[0] >= w[1]) {
                        return Err(StudyError::BadSweep);
                    }
                }
                "order" => cfg.order = value.parse().map_err(|_| bad("bad order"))?,
                "power" => cfg.power = value.parse().map_err(|_| bad("bad power"))?,
                "normalization" => {
                    let mut parts = value.split_whitespace();
                    cfg.normalization = match parts.next() {
                        Some("selfnorm") => NormalizationMode::SelfNorm,
                        Some("sqrt-n") => NormalizationMode::SqrtN,
                        Some("custom") => {
                            let a_n = parts
                                .next()
                                .and_then(|s| s.parse().ok())
                                .ok_or_else(|| bad("custom expects A B"))?;
                            let b_shift = parts
                                .next()
                                .and_then(|s| s.parse().ok())
                                .ok_or_else(|| bad("custom expects A B"))?;
                            NormalizationMode::Custom { a_n, b_shift }
                        }
                        _ => return Err(bad("unknown normalization")),
                    };
                }
                "distances" => {
                    cfg.distances = value
                        .split_whitespace()
                        .map(|tok| DistanceKind::parse(tok).ok_or_else(|| bad("unknown distance token")))
                        .collect::<Result<_, _>>()?;
                }
                "mc_count" => cfg.mc_count = value.parse().map_err(|_| bad("bad mc_count"))?,
                "seed" => cfg.seed = value.parse().map_err(|_| bad("bad seed"))?,
                "slope_margin" => cfg.slope_margin = value.parse().map_err(|_| bad("bad margin"))?,
                "grid_halfwidth" => cfg.grid_halfwidth = value.parse().map_err(|_| bad("bad halfwidth"))?,
                "grid_points" => cfg.grid_points = value.parse().map_err(|_| bad("bad grid points"))?,
                "inversion_tolerance" => {
                    cfg.inversion_tolerance = value.parse().map_err(|_| bad("bad tolerance"))?
                }
                _ => return Err(bad(&format!("unknown key '{key}'"))),
            }
        }
        Ok(cfg)
    }
}

/// Least-squares slope of `ln y` against `ln n` plus the fit residual.
pub fn loglog_slope(ns: &[usize], ys: &[f64]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .zip(ys)
        .filter(|&(_, &y)| y > 0.0 && y.is_finite())
        .map(|(&n, &y)| ((n as f64).ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let residual = pts
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum::<f64>()
        .sqrt()
        / n.sqrt();
    (slope, residual)
}

/// Everything the study produced for one horizon.
#[derive(Clone, Debug)]
pub struct StudyRow {
    pub n: usize,
    pub sigma_n: f64,
    pub values: Vec<f64>,
    pub inversion_error: f64,
    pub dkw_ok: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct StudyOutcome {
    pub rows: Vec<StudyRow>,
    pub columns: Vec<String>,
    pub slopes: Vec<(String, f64, f64, bool)>,
    pub pass: bool,
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
}

fn fmt_value(v: f64) -> String {
    format!("{:.12e}", v)
}

/// Run the sweep and write `study.csv` and `summary.txt` under `out_dir`.
/// Exit contract: `pass` is true iff every inversion met its tolerance and
/// every requested slope met the theorem exponent within the margin.
pub fn run_convergence_study(cfg: &ExperimentConfig, out_dir: &Path) -> Result<StudyOutcome, StudyError> {
    std::fs::create_dir_all(out_dir)?;
    let spec = resolve_chain(cfg)?;
    let r = cfg.order;
    let stationary = match cfg.normalization {
        NormalizationMode::SqrtN => Some(asymptotic_pq(&spec, (r + 2).max(4))?),
        _ => None,
    };

    let xs = linspace(-cfg.grid_halfwidth, cfg.grid_halfwidth, cfg.grid_points);
    let mut rows: Vec<StudyRow> = Vec::new();
    for &n in &cfg.nsweep {
        let cum = exact_cumulants(&spec, n, (r + 2).max(4))?;
        let sigma = cum.sigma_n();
        let (polys, norm) = match cfg.normalization {
            NormalizationMode::SelfNorm => {
                let norm = NormalizationPair::self_normalized(sigma);
                (selfnorm_polynomials(&cum.reduced(), r)?.with_normalization(norm), norm)
            }
            NormalizationMode::SqrtN => {
                let coeffs = stationary.as_ref().expect("built above");
                let b_n = (coeffs.p(2) * n as f64).sqrt();
                let norm = NormalizationPair { a_n: coeffs.c, b_n, sigma_n: sigma };
                (sqrtn_polynomials(coeffs, r, r + 2)?.with_normalization(norm), norm)
            }
            NormalizationMode::Custom { a_n, b_shift } => {
                let norm = NormalizationPair { a_n, b_n: sigma + b_shift, sigma_n: sigma };
                (selfnorm_polynomials(&cum.reduced(), r)?.with_normalization(norm), norm)
            }
        };
        let psi_curve = CdfCurve::expansion(polys.clone(), r);
        let phi_curve = CdfCurve::std_normal();

        let cf = |t: f64| -> C64 {
            let phase = C64::new(0.0, -t * norm.a_n / norm.b_n).exp();
            phase * char_fn(&spec, n, t / norm.b_n).expect("horizon checked")
        };
        let opts = InversionOptions {
            tolerance: cfg.inversion_tolerance,
            ..Default::default()
        };
        let (f_curve, report) = invert_cf(cf, &xs, &opts)?;

        let mut values = Vec::with_capacity(cfg.distances.len());
        for d in &cfg.distances {
            let v = match d {
                DistanceKind::Kolmogorov => kolmogorov(&f_curve, &psi_curve),
                DistanceKind::Weighted => weighted_sup(&f_curve, &psi_curve, cfg.power)?.value,
                DistanceKind::Lp(p) => lp_distance(&f_curve, &psi_curve, *p as f64),
                DistanceKind::W1 => wp_exact(&f_curve, &phi_curve, 1.0)?,
                DistanceKind::WpUpper(p) => wp_upper(&f_curve, &psi_curve, *p as f64)?,
                DistanceKind::WpExact(p) => wp_exact(&f_curve, &phi_curve, *p as f64)?,
                DistanceKind::Moment3 => {
                    let w3 = cum.gamma(3) / sigma.powi(3);
                    let psi_m3 = third_moment_of_expansion(&polys, r);
                    (w3 - psi_m3).abs()
                }
            };
            values.push(v);
        }
        let dkw_ok = if cfg.mc_count > 0 {
            let batch = sample_chain(&spec, n, cfg.mc_count, cfg.seed);
            let standardized = crate::sim::SampleBatch {
                values: batch.values.iter().map(|v| (v - norm.a_n) / norm.b_n).collect(),
                ..batch
            };
            let emp = empirical_cdf(&standardized).expect("count > 0");
            Some(kolmogorov(&emp, &f_curve) < dkw_band(cfg.mc_count, 0.01) + report.total_error)
        } else {
            None
        };
        rows.push(StudyRow {
            n,
            sigma_n: sigma,
            values,
            inversion_error: report.total_error,
            dkw_ok,
        });
    }

    // slope fits and pass flags
    let ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    let mut slopes = Vec::new();
    let mut pass = true;
    for (i, d) in cfg.distances.iter().enumerate() {
        let ys: Vec<f64> = rows.iter().map(|r| r.values[i]).collect();
        let (slope, residual) = loglog_slope(&ns, &ys);
        let at_roundoff = ys.iter().all(|&y| y < 1e-12);
        // fewer than two usable points carry no evidence either way, and a
        // column at the roundoff floor satisfies any decay trivially
        let ok = at_roundoff || slope.is_nan() || slope <= d.expected_slope(r) + cfg.slope_margin;
        pass &= ok;
        slopes.push((d.token(), slope, residual, ok));
    }
    pass &= rows.iter().all(|row| row.dkw_ok.unwrap_or(true));

    // CSV
    let mut columns = vec!["n".to_string(), "sigma_n".to_string()];
    columns.extend(cfg.distances.iter().map(|d| d.token()));
    columns.push("inversion_error".into());
    if cfg.mc_count > 0 {
        columns.push("dkw_ok".into());
    }
    let mut csv = columns.join(",");
    csv.push('\n');
    for row in &rows {
        let mut fields = vec![row.n.to_string(), fmt_value(row.sigma_n)];
        fields.extend(row.values.iter().map(|&v| fmt_value(v)));
        fields.push(fmt_value(row.inversion_error));
        if let Some(ok) = row.dkw_ok {
            fields.push(ok.to_string());
        }
        csv.push_str(&fields.join(","));
        csv.push('\n');
    }
    let csv_path = out_dir.join("study.csv");
    std::fs::write(&csv_path, &csv)?;

    // summary
    let mut summary = String::new();
    let _ = writeln!(summary, "model = {}", cfg.model);
    let _ = writeln!(summary, "order = {}", r);
    let _ = writeln!(summary, "power = {}", cfg.power);
    for (name, slope, residual, ok) in &slopes {
        let _ = writeln!(
            summary,
            "slope_{} = {} residual {} expected <= {} -> {}",
            name,
            fmt_value(*slope),
            fmt_value(*residual),
            fmt_value(
                cfg.distances
                    .iter()
                    .find(|d| d.token() == *name)
                    .map(|d| d.expected_slope(r) + cfg.slope_margin)
                    .unwrap_or(f64::NAN)
            ),
            if *ok { "PASS" } else { "FAIL" }
        );
    }
    let _ = writeln!(summary, "overall = {}", if pass { "PASS" } else { "FAIL" });
    let summary_path = out_dir.join("summary.txt");
    std::fs::write(&summary_path, &summary)?;

    Ok(StudyOutcome { rows, columns, slopes, pass, csv_path, summary_path })
}

fn resolve_chain(cfg: &ExperimentConfig) -> Result<FiniteChainSpec, StudyError> {
    if let Some(path) = &cfg.chain_file {
        let text = std::fs::read_to_string(path)?;
        return Ok(crate::chainfile::from_text(&text)?);
    }
    match builtin(&cfg.model, &cfg.params)? {
        BuiltinModel::Chain(spec) => Ok(spec),
        _ => Err(StudyError::UnknownModel(format!(
            "{} is simulation-only; studies need an exact chain model",
            cfg.model
        ))),
    }
}

/// `int x^3 dPsi_r` in closed form: integrating by parts,
/// `int x^3 (phi H_j)' dx = -3 int x^2 phi(x) H_j(x) dx`, and the remaining
/// integral reduces to even Gaussian moments of the stored coefficients.
pub fn third_moment_of_expansion(polys: &crate::expansion::ExpansionPolynomials, r: usize) -> f64 {
    let b_n = polys.normalization().b_n;
    let mut total = 0.0;
    for j in 1..=r.min(polys.order()) {
        let h = polys.correction(j);
        let mut ix2 = 0.0;
        for (k, &a) in h.coeffs().iter().enumerate() {
            ix2 += a * gaussian_moment(k + 2);
        }
        total += b_n.powi(-(j as i32)) * (-3.0) * ix2;
    }
    total
}

fn gaussian_moment(k: usize) -> f64 {
    // E[Z^k] = (k-1)!! for even k
    if k % 2 == 1 {
        return 0.0;
    }
    let mut acc = 1.0;
    let mut i = k as i64 - 1;
    while i > 1 {
        acc *= i as f64;
        i -= 2;
    }
    acc
}
