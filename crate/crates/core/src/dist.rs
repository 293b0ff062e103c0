//! Distribution-function representations and the distance functionals the
//! expansion error bounds are stated in: Kolmogorov, weighted sup, `L^p`,
//! and transport distances (exact quantile coupling plus the integral upper
//! bound valid for generalized, non-monotone curves).

use crate::error::DistError;
use crate::expansion::{evaluate_expansion, ExpansionPolynomials};
use crate::quad::gauss_legendre;

/// Analytic tail envelope: for `|x| >= cutoff`,
/// `|F(x) - 1_{x>0}| <= amp * (1+|x|)^degree * exp(-(|x|-shift)^2 / 2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianTail {
    pub cutoff: f64,
    pub amp: f64,
    pub degree: i32,
    pub shift: f64,
}

impl GaussianTail {
    pub fn new(cutoff: f64, amp: f64, degree: i32) -> Self {
        GaussianTail { cutoff, amp, degree, shift: 0.0 }
    }

    /// Envelope value at `x` (assumes `|x| >= cutoff`).
    pub fn bound(&self, x: f64) -> f64 {
        let a = x.abs();
        let arg = (a - self.shift).max(0.0);
        self.amp * (1.0 + a).powi(self.degree) * (-0.5 * arg * arg).exp()
    }
}

/// A distribution-function curve.
///
/// `Grid` and `Expansion` evaluate by interpolation / closed form; `Atoms`
/// and `Empirical` are right-continuous step functions. Expansion curves of
/// order `r >= 1` are generalized distribution functions: limits 0 and 1 but
/// not necessarily monotone.
#[derive(Clone, Debug)]
pub enum CdfCurve {
    Grid {
        xs: Vec<f64>,
        vals: Vec<f64>,
        tail: Option<GaussianTail>,
        genuine: bool,
    },
    Atoms {
        pts: Vec<(f64, f64)>,
    },
    Empirical {
        values: Vec<f64>,
    },
    Expansion {
        polys: ExpansionPolynomials,
        r: usize,
    },
}

impl CdfCurve {
    pub fn grid(xs: Vec<f64>, vals: Vec<f64>, tail: Option<GaussianTail>) -> Result<Self, DistError> {
        if xs.len() != vals.len() || xs.len() < 2 {
            return Err(DistError::Contract("grid needs matching xs/vals of length >= 2".into()));
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(DistError::Contract("grid nodes must be strictly increasing".into()));
        }
        let genuine = vals.windows(2).all(|w| w[1] >= w[0] - 1e-12);
        Ok(CdfCurve::Grid { xs, vals, tail, genuine })
    }

    pub fn from_atoms(pts: Vec<(f64, f64)>) -> Result<Self, DistError> {
        let mut pts = pts;
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mass: f64 = pts.iter().map(|p| p.1).sum();
        if (mass - 1.0).abs() > 1e-12 {
            return Err(DistError::MassMismatch { left: mass, right: 1.0 });
        }
        Ok(CdfCurve::Atoms { pts })
    }

    pub fn expansion(polys: ExpansionPolynomials, r: usize) -> Self {
        assert!(r <= polys.order());
        CdfCurve::Expansion { polys, r }
    }

    /// The standard normal distribution function as a curve.
    pub fn std_normal() -> Self {
        CdfCurve::Expansion {
            polys: ExpansionPolynomials::from_corrections(
                Vec::new(),
                crate::expansion::NormalizationPair::self_normalized(1.0),
            ),
            r: 0,
        }
    }

    /// Right-continuous evaluation `F(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            CdfCurve::Grid { xs, vals, .. } => {
                if x <= xs[0] {
                    if x == xs[0] { vals[0] } else { vals[0].min(0.0).max(0.0) }
                } else if x >= *xs.last().unwrap() {
                    if x == *xs.last().unwrap() { *vals.last().unwrap() } else { 1.0 }
                } else {
                    let i = match xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
                        Ok(i) => return vals[i],
                        Err(i) => i - 1,
                    };
                    let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
                    vals[i] + w * (vals[i + 1] - vals[i])
                }
            }
            CdfCurve::Atoms { pts } => {
                let mut acc = 0.0;
                for &(v, p) in pts {
                    if v <= x {
                        acc += p;
                    } else {
                        break;
                    }
                }
                acc
            }
            CdfCurve::Empirical { values } => {
                let n = values.len() as f64;
                let idx = values.partition_point(|&v| v <= x);
                idx as f64 / n
            }
            CdfCurve::Expansion { polys, r } => evaluate_expansion(polys, *r, x),
        }
    }

    /// Left limit `F(x-)`; differs from `eval` only for step curves.
    pub fn eval_left(&self, x: f64) -> f64 {
        match self {
            CdfCurve::Atoms { pts } => {
                let mut acc = 0.0;
                for &(v, p) in pts {
                    if v < x {
                        acc += p;
                    } else {
                        break;
                    }
                }
                acc
            }
            CdfCurve::Empirical { values } => {
                let n = values.len() as f64;
                let idx = values.partition_point(|&v| v < x);
                idx as f64 / n
            }
            _ => self.eval(x),
        }
    }

    /// Whether the curve is a genuine (monotone) distribution function.
    pub fn is_genuine(&self) -> bool {
        match self {
            CdfCurve::Grid { genuine, .. } => *genuine,
            CdfCurve::Atoms { .. } | CdfCurve::Empirical { .. } => true,
            CdfCurve::Expansion { r, .. } => *r == 0,
        }
    }

    /// Places where the curve changes shape (grid nodes, atom positions).
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            CdfCurve::Grid { xs, .. } => xs.clone(),
            CdfCurve::Atoms { pts } => pts.iter().map(|p| p.0).collect(),
            CdfCurve::Empirical { values } => values.clone(),
            CdfCurve::Expansion { .. } => Vec::new(),
        }
    }

    /// Tail envelope beyond the represented range, when available.
    pub fn tail_model(&self) -> Option<GaussianTail> {
        match self {
            CdfCurve::Grid { tail, .. } => *tail,
            CdfCurve::Atoms { pts } => {
                let cutoff = pts.iter().map(|p| p.0.abs()).fold(0.0, f64::max);
                Some(GaussianTail { cutoff, amp: 0.0, degree: 0, shift: 0.0 })
            }
            CdfCurve::Empirical { values } => {
                let cutoff = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
                Some(GaussianTail { cutoff, amp: 0.0, degree: 0, shift: 0.0 })
            }
            CdfCurve::Expansion { polys, r } => {
                let (amp, deg) = polys.envelope(*r);
                Some(GaussianTail {
                    cutoff: 1.0,
                    amp: amp / (2.0 * std::f64::consts::PI).sqrt(),
                    degree: deg as i32,
                    shift: 0.0,
                })
            }
        }
    }

    /// Interval outside of which the curve is within its tail envelope of
    /// 0/1.
    pub fn hull(&self) -> (f64, f64) {
        match self {
            CdfCurve::Grid { xs, .. } => (xs[0], *xs.last().unwrap()),
            CdfCurve::Atoms { pts } => (pts.first().unwrap().0, pts.last().unwrap().0),
            CdfCurve::Empirical { values } => (*values.first().unwrap(), *values.last().unwrap()),
            CdfCurve::Expansion { .. } => (-12.0, 12.0),
        }
    }
}

fn default_xs(lo: f64, hi: f64) -> Vec<f64> {
    let n = 4001usize;
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Merged candidate/segment nodes for a pair of curves. Step curves keep
/// their exact breakpoints; smooth curves contribute a dense mesh.
fn merged_nodes(f: &CdfCurve, g: &CdfCurve) -> Vec<f64> {
    let mut nodes = f.breakpoints();
    nodes.extend(g.breakpoints());
    let needs_mesh = matches!(f, CdfCurve::Expansion { .. }) || matches!(g, CdfCurve::Expansion { .. });
    if needs_mesh || nodes.len() < 16 {
        let (flo, fhi) = f.hull();
        let (glo, ghi) = g.hull();
        let lo = flo.min(glo).max(-40.0);
        let hi = fhi.max(ghi).min(40.0);
        nodes.extend(default_xs(lo, hi));
    }
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nodes.dedup_by(|a, b| (*a - *b).abs() < 1e-300);
    nodes
}

/// Kolmogorov (uniform) distance `sup_x |F(x) - G(x)|`, taking both one-sided
/// limits at every breakpoint; exact for atoms-vs-grid pairs.
pub fn kolmogorov(f: &CdfCurve, g: &CdfCurve) -> f64 {
    let nodes = merged_nodes(f, g);
    let mut sup: f64 = 0.0;
    for w in nodes.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        sup = sup.max((f.eval(mid) - g.eval(mid)).abs());
    }
    for &x in &nodes {
        sup = sup.max((f.eval(x) - g.eval(x)).abs());
        sup = sup.max((f.eval_left(x) - g.eval_left(x)).abs());
    }
    sup
}

/// Which regime attained the weighted supremum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SupRegime {
    Interior,
    TailBound,
}

#[derive(Clone, Debug)]
pub struct WeightedSup {
    pub value: f64,
    pub at_x: f64,
    pub regime: SupRegime,
}

/// Non-uniform distance `sup_x (1+|x|)^s |F(x) - G(x)|`. The interior part
/// scans the merged nodes; past the joint hull the analytic tail envelopes
/// take over (they decrease there as long as `s + degree` stays below the
/// cutoff squared, which holds for every curve built in this crate).
pub fn weighted_sup(f: &CdfCurve, g: &CdfCurve, s: f64) -> Result<WeightedSup, DistError> {
    let tf = f.tail_model().ok_or(DistError::MissingTailModel)?;
    let tg = g.tail_model().ok_or(DistError::MissingTailModel)?;
    let nodes = merged_nodes(f, g);
    let mut best = WeightedSup { value: 0.0, at_x: 0.0, regime: SupRegime::Interior };
    let mut consider = |x: f64, d: f64| {
        let v = (1.0 + x.abs()).powf(s) * d;
        if v > best.value {
            best = WeightedSup { value: v, at_x: x, regime: SupRegime::Interior };
        }
    };
    for w in nodes.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        consider(mid, (f.eval(mid) - g.eval(mid)).abs());
    }
    for &x in &nodes {
        consider(x, (f.eval(x) - g.eval(x)).abs());
        consider(x, (f.eval_left(x) - g.eval_left(x)).abs());
    }
    // tail regime at the edge of the scanned range
    let edge = nodes.last().copied().unwrap_or(8.0).abs().max(nodes[0].abs());
    let edge = edge.max(tf.cutoff).max(tg.cutoff);
    let tail_val = (1.0 + edge).powf(s) * (tf.bound(edge) + tg.bound(edge));
    if tail_val > best.value {
        best = WeightedSup { value: tail_val, at_x: edge, regime: SupRegime::TailBound };
    }
    Ok(best)
}

/// Integrate `|F - G|^power` over the merged hull with per-segment
/// Gauss-Legendre, splitting segments at sign crossings of the difference.
fn integrate_abs_diff_power(f: &CdfCurve, g: &CdfCurve, power: f64) -> f64 {
    let nodes = merged_nodes(f, g);
    let rule = gauss_legendre(6);
    let diff = |x: f64| f.eval(x) - g.eval(x);
    let mut total = 0.0;
    for w in nodes.windows(2) {
        let (mut a, b) = (w[0], w[1]);
        if b - a <= 0.0 {
            continue;
        }
        // locate at most one crossing by bisection when signs differ
        let (da, db) = (diff(a + 1e-15 * (b - a)), diff(b - 1e-15 * (b - a)));
        let mut pieces = vec![b];
        if da * db < 0.0 {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                if diff(mid) * da >= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            pieces.insert(0, 0.5 * (lo + hi));
        }
        for &end in &pieces {
            if end <= a {
                continue;
            }
            let mid = 0.5 * (a + end);
            let half = 0.5 * (end - a);
            let mut acc = 0.0;
            for &(t, wt) in &rule {
                acc += wt * diff(mid + half * t).abs().powf(power);
            }
            total += acc * half;
            a = end;
        }
    }
    // analytic tail contribution
    if let (Some(tf), Some(tg)) = (f.tail_model(), g.tail_model()) {
        let hi = nodes.last().copied().unwrap_or(0.0);
        let lo = nodes[0];
        for (edge, sign) in [(hi, 1.0f64), (lo, -1.0)] {
            let mut x = edge.abs().max(1.0);
            let step = 0.25;
            let mut acc = 0.0;
            for _ in 0..80 {
                let e = (tf.bound(sign * x) + tg.bound(sign * x)).powf(power);
                acc += e * step;
                x += step;
                if e < 1e-300 {
                    break;
                }
            }
            total += acc;
        }
    }
    total
}

/// `L^p` distance `(int |F - G|^p dx)^{1/p}`.
pub fn lp_distance(f: &CdfCurve, g: &CdfCurve, p: f64) -> f64 {
    assert!(p >= 1.0);
    integrate_abs_diff_power(f, g, p).powf(1.0 / p)
}

/// Transport upper bound `int |F - G|^{1/p} dx`, valid for generalized
/// (non-monotone) curves with matching total mass.
pub fn wp_upper(f: &CdfCurve, g: &CdfCurve, p: f64) -> Result<f64, DistError> {
    if p < 1.0 {
        return Err(DistError::Contract("p must be at least 1".into()));
    }
    Ok(integrate_abs_diff_power(f, g, 1.0 / p))
}

/// Quantile polyline: pairs `(u, x)` such that the quantile function is
/// linear in `u` between consecutive entries; step curves get `beta = 0`
/// segments through duplicated `u` values.
fn quantile_levels(curve: &CdfCurve) -> Vec<f64> {
    match curve {
        CdfCurve::Grid { vals, .. } => vals.clone(),
        CdfCurve::Atoms { pts } => {
            let mut acc = 0.0;
            pts.iter()
                .map(|&(_, p)| {
                    acc += p;
                    acc
                })
                .collect()
        }
        CdfCurve::Empirical { values } => {
            let n = values.len() as f64;
            (1..=values.len()).map(|i| i as f64 / n).collect()
        }
        CdfCurve::Expansion { .. } => {
            // denser than the evaluation mesh: segment widths set the
            // tangent-model error of the quantile integration
            let n = 16001usize;
            (0..n)
                .map(|i| curve.eval(-12.0 + 24.0 * i as f64 / (n - 1) as f64))
                .collect()
        }
    }
}

/// Quantile at `u` for a genuine curve (right-continuous inverse), clamped
/// to the represented range.
pub fn quantile(curve: &CdfCurve, u: f64) -> f64 {
    match curve {
        CdfCurve::Atoms { pts } => {
            let mut acc = 0.0;
            for &(v, p) in pts {
                acc += p;
                if acc >= u - 1e-15 {
                    return v;
                }
            }
            pts.last().unwrap().0
        }
        CdfCurve::Empirical { values } => {
            let n = values.len() as f64;
            let k = ((u * n).ceil() as usize).clamp(1, values.len());
            values[k - 1]
        }
        CdfCurve::Grid { xs, vals, .. } => {
            if u <= vals[0] {
                return xs[0];
            }
            if u >= *vals.last().unwrap() {
                return *xs.last().unwrap();
            }
            let i = vals.partition_point(|&v| v < u) - 1;
            let (v0, v1) = (vals[i], vals[i + 1]);
            if v1 <= v0 {
                return xs[i + 1];
            }
            xs[i] + (u - v0) / (v1 - v0) * (xs[i + 1] - xs[i])
        }
        CdfCurve::Expansion { .. } => {
            // bisection on the evaluated curve
            let (mut lo, mut hi) = (-13.0f64, 13.0f64);
            for _ in 0..90 {
                let mid = 0.5 * (lo + hi);
                if curve.eval(mid) < u {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }
    }
}

/// Local linear model of the quantile at the midpoint of a `u`-segment:
/// returns `(alpha, beta)` with `Q(u) ~ alpha + beta u` on the segment.
fn quantile_linear(curve: &CdfCurve, u_mid: f64) -> (f64, f64) {
    match curve {
        CdfCurve::Atoms { .. } | CdfCurve::Empirical { .. } => (quantile(curve, u_mid), 0.0),
        CdfCurve::Grid { xs, vals, .. } => {
            if u_mid <= vals[0] {
                return (xs[0], 0.0);
            }
            if u_mid >= *vals.last().unwrap() {
                return (*xs.last().unwrap(), 0.0);
            }
            let i = vals.partition_point(|&v| v < u_mid) - 1;
            let (v0, v1) = (vals[i], vals[i + 1]);
            if v1 <= v0 {
                return (xs[i + 1], 0.0);
            }
            let beta = (xs[i + 1] - xs[i]) / (v1 - v0);
            (xs[i] - beta * v0, beta)
        }
        CdfCurve::Expansion { polys, r } => {
            // exact tangent: dQ/du = 1 / density(Q(u))
            let q = quantile(curve, u_mid);
            let dens = crate::expansion::evaluate_expansion_density(polys, *r, q);
            let beta = if dens.abs() > 1e-300 { 1.0 / dens } else { 0.0 };
            (q - beta * u_mid, beta)
        }
    }
}

/// Closed form `int_a^b |alpha + beta u|^p du`. The antiderivative
/// difference cancels catastrophically when `beta (b-a)` is tiny relative to
/// the integrand, so a nearly-constant integrand falls back to Simpson
/// (error `O((beta (b-a))^4)`, far below the cancellation noise).
fn abs_linear_power_integral(alpha: f64, beta: f64, p: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let wa = alpha + beta * a;
    let wb = alpha + beta * b;
    if wa * wb >= 0.0 && (beta * (b - a)).abs() <= 1e-6 * wa.abs().max(wb.abs()) {
        let wm = alpha + beta * 0.5 * (a + b);
        return (b - a) / 6.0 * (wa.abs().powf(p) + 4.0 * wm.abs().powf(p) + wb.abs().powf(p));
    }
    let anti = |u: f64| {
        let w = alpha + beta * u;
        w.signum() * w.abs().powf(p + 1.0) / (beta * (p + 1.0))
    };
    anti(b) - anti(a)
}

/// Exact `W_p` between two genuine distribution functions through the 1-D
/// quantile coupling `(int_0^1 |F^{-1}(u) - G^{-1}(u)|^p du)^{1/p}`.
///
/// Quantiles are piecewise linear in `u` between the merged level sets, so
/// every segment integrates in closed form.
pub fn wp_exact(f: &CdfCurve, g: &CdfCurve, p: f64) -> Result<f64, DistError> {
    if p < 1.0 {
        return Err(DistError::Contract("p must be at least 1".into()));
    }
    if !f.is_genuine() || !g.is_genuine() {
        return Err(DistError::NotMonotone);
    }
    let mut levels = quantile_levels(f);
    levels.extend(quantile_levels(g));
    levels.retain(|&u| u > 1e-13 && u < 1.0 - 1e-13);
    levels.push(1e-13);
    levels.push(1.0 - 1e-13);
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    levels.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let mut total = 0.0;
    for w in levels.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let mid = 0.5 * (a + b);
        let (af, bf) = quantile_linear(f, mid);
        let (ag, bg) = quantile_linear(g, mid);
        total += abs_linear_power_integral(af - ag, bf - bg, p, a, b);
    }
    Ok(total.powf(1.0 / p))
}

/// Moment-style gap `| int h'(x) (F(x) - G(x)) dx |`, the integration-by-
/// parts form of `|E_F[h] - E_G[h]|` for curves with matching total mass.
pub fn moment_gap(h_prime: impl Fn(f64) -> f64, f: &CdfCurve, g: &CdfCurve) -> f64 {
    let nodes = merged_nodes(f, g);
    let rule = gauss_legendre(6);
    let mut total = 0.0;
    for w in nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for &(t, wt) in &rule {
            let x = mid + half * t;
            acc += wt * h_prime(x) * (f.eval(x) - g.eval(x));
        }
        total += acc * half;
    }
    total.abs()
}

/// Serialize a curve to the two-column text format (plus a header describing
/// the kind and tail model). `f64` values use the shortest round-trip
/// representation, so parse(serialize(c)) reproduces the numbers bit-exactly.
pub fn curve_to_text(curve: &CdfCurve) -> String {
    let mut out = String::new();
    match curve {
        CdfCurve::Grid { xs, vals, tail, genuine } => {
            out.push_str("kind grid\n");
            if let Some(t) = tail {
                out.push_str(&format!("tail {} {} {} {}\n", t.cutoff, t.amp, t.degree, t.shift));
            }
            out.push_str(&format!("genuine {}\n", genuine));
            for (x, v) in xs.iter().zip(vals) {
                out.push_str(&format!("{} {}\n", x, v));
            }
        }
        CdfCurve::Atoms { pts } => {
            out.push_str("kind atoms\n");
            for (v, p) in pts {
                out.push_str(&format!("{} {}\n", v, p));
            }
        }
        CdfCurve::Empirical { values } => {
            out.push_str("kind empirical\n");
            for v in values {
                out.push_str(&format!("{}\n", v));
            }
        }
        CdfCurve::Expansion { polys, r } => {
            // expansions serialize as a sampled grid
            let xs = default_xs(-12.0, 12.0);
            let vals: Vec<f64> = xs.iter().map(|&x| evaluate_expansion(polys, *r, x)).collect();
            let tail = curve.tail_model();
            let sampled = CdfCurve::Grid { xs, vals, tail, genuine: *r == 0 };
            return curve_to_text(&sampled);
        }
    }
    out
}

/// Parse the text format produced by [`curve_to_text`].
pub fn curve_from_text(text: &str) -> Result<CdfCurve, DistError> {
    let mut kind = None;
    let mut tail = None;
    let mut genuine = true;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let head = parts.next().unwrap();
        match head {
            "kind" => kind = parts.next().map(str::to_owned),
            "tail" => {
                let nums: Vec<f64> = parts.filter_map(|s| s.parse().ok()).collect();
                if nums.len() != 4 {
                    return Err(DistError::ParseError {
                        line: lineno + 1,
                        message: "tail expects cutoff amp degree shift".into(),
                    });
                }
                tail = Some(GaussianTail {
                    cutoff: nums[0],
                    amp: nums[1],
                    degree: nums[2] as i32,
                    shift: nums[3],
                });
            }
            "genuine" => genuine = parts.next() == Some("true"),
            _ => {
                let mut nums = vec![head.parse::<f64>().map_err(|e| DistError::ParseError {
                    line: lineno + 1,
                    message: e.to_string(),
                })?];
                for s in parts {
                    nums.push(s.parse().map_err(|_| DistError::ParseError {
                        line: lineno + 1,
                        message: format!("bad number '{s}'"),
                    })?);
                }
                rows.push(nums);
            }
        }
    }
    match kind.as_deref() {
        Some("grid") => {
            let xs = rows.iter().map(|r| r[0]).collect();
            let vals = rows.iter().map(|r| r[1]).collect();
            let mut c = CdfCurve::grid(xs, vals, tail)?;
            if let CdfCurve::Grid { genuine: gflag, .. } = &mut c {
                *gflag = genuine;
            }
            Ok(c)
        }
        Some("atoms") => CdfCurve::from_atoms(rows.iter().map(|r| (r[0], r[1])).collect()),
        Some("empirical") => {
            let mut values: Vec<f64> = rows.iter().map(|r| r[0]).collect();
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            Ok(CdfCurve::Empirical { values })
        }
        other => Err(DistError::ParseError {
            line: 0,
            message: format!("unknown kind {other:?}"),
        }),
    }
}

/// Sample the standard normal (or any closure) onto a grid curve; test and
/// tooling helper.
pub fn sampled_curve(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    n: usize,
    tail: Option<GaussianTail>,
) -> CdfCurve {
    let xs: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    CdfCurve::grid(xs, vals, tail).unwrap()
}
