//! Gauss-Legendre and Gauss-Hermite nodes.
//!
//! Nodes are computed by Newton iteration on the three-term recurrences and
//! cached per order. Legendre rules drive the distance integrals in [`crate::dist`];
//! Hermite rules integrate against the Gaussian weight in tests and moment checks.

use std::f64::consts::PI;
use std::sync::Mutex;

/// Nodes and weights of an `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "quadrature order must be positive");
    static CACHE: Mutex<Vec<Option<Vec<(f64, f64)>>>> = Mutex::new(Vec::new());
    let mut cache = CACHE.lock().unwrap();
    if cache.len() <= n {
        cache.resize(n + 1, None);
    }
    if let Some(rule) = &cache[n] {
        return rule.clone();
    }
    let mut rule = Vec::with_capacity(n);
    let nf = n as f64;
    for i in 0..n {
        // Tricomi-style initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_and_deriv(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((x, w));
    }
    rule.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    cache[n] = Some(rule.clone());
    rule
}

fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Integrate `f` over `[a, b]` with a composite `points`-point Gauss-Legendre
/// rule on `panels` equal panels.
pub fn integrate_gl(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, points: usize) -> f64 {
    let rule = gauss_legendre(points);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + h * p as f64;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        let mut acc = 0.0;
        for &(x, w) in &rule {
            acc += w * f(mid + half * x);
        }
        total += acc * half;
    }
    total
}

/// Nodes and weights for integrals of the form `int f(x) phi(x) dx` against
/// the standard normal density.
///
/// Built from the physicists' Gauss-Hermite rule: roots of H_n are found by
/// interlacing bisection (roots of successive Hermite polynomials interlace),
/// which is slow but fully robust for the small orders used here.
pub fn gauss_hermite_normal(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    // roots[k] holds the roots of the physicists' H_k
    let mut roots: Vec<Vec<f64>> = vec![vec![], vec![0.0]];
    for k in 2..=n {
        let prev = &roots[k - 1];
        let bound = (2.0 * k as f64 + 1.0).sqrt();
        let mut brackets = Vec::with_capacity(k + 1);
        brackets.push(-bound);
        brackets.extend(prev.iter().copied());
        brackets.push(bound);
        let mut rk = Vec::with_capacity(k);
        for w in brackets.windows(2) {
            rk.push(bisect_hermite(k, w[0], w[1]));
        }
        roots.push(rk);
    }
    let mut rule = Vec::with_capacity(n);
    let log_wnum = 0.5 * PI.ln() + (n as f64 - 1.0) * std::f64::consts::LN_2 + ln_factorial(n);
    for &t in &roots[n] {
        let hm1 = hermite_phys(n - 1, t);
        // w_i = 2^{n-1} n! sqrt(pi) / (n^2 H_{n-1}(t_i)^2), in log form to
        // survive n up to ~64.
        let log_w = log_wnum - 2.0 * (n as f64).ln() - 2.0 * hm1.abs().ln();
        // Converting weight*exp(t^2)-free form: for int f phi dx substitute
        // x = sqrt(2) t and divide by sqrt(pi).
        let w = (log_w - 0.5 * PI.ln()).exp();
        rule.push((std::f64::consts::SQRT_2 * t, w));
    }
    rule
}

fn bisect_hermite(k: usize, mut lo: f64, mut hi: f64) -> f64 {
    let flo = hermite_phys(k, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = hermite_phys(k, mid);
        if fm == 0.0 || (hi - lo) < 1e-15 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Physicists' Hermite polynomial value by recurrence, rescaled on the fly to
/// avoid overflow; only the sign and log-magnitude matter for bisection, and
/// the ratio used in the weight formula is restored by the caller in log form.
fn hermite_phys(k: usize, x: f64) -> f64 {
    let mut h0 = 1.0f64;
    let mut h1 = 2.0 * x;
    if k == 0 {
        return h0;
    }
    for j in 1..k {
        let h2 = 2.0 * x * h1 - 2.0 * (j as f64) * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        // 5-point rule is exact through degree 9
        let val = integrate_gl(|x| x.powi(8) + 3.0 * x.powi(2), -1.0, 1.0, 1, 5);
        assert_abs_diff_eq!(val, 2.0 / 9.0 + 2.0, epsilon = 1e-14);
    }

    #[test]
    fn legendre_composite_smooth() {
        let val = integrate_gl(|x| x.sin(), 0.0, PI, 8, 8);
        assert_abs_diff_eq!(val, 2.0, epsilon = 1e-13);
    }

    #[test]
    fn hermite_normal_moments() {
        // E[x^2] = 1, E[x^4] = 3, E[x^6] = 15 under phi
        let rule = gauss_hermite_normal(12);
        let mass: f64 = rule.iter().map(|&(_, w)| w).sum();
        let m2: f64 = rule.iter().map(|&(x, w)| w * x * x).sum();
        let m4: f64 = rule.iter().map(|&(x, w)| w * x.powi(4)).sum();
        let m6: f64 = rule.iter().map(|&(x, w)| w * x.powi(6)).sum();
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m2, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m4, 3.0, epsilon = 1e-11);
        assert_abs_diff_eq!(m6, 15.0, epsilon = 1e-10);
    }

    #[test]
    fn hermite_normal_high_order_stays_finite() {
        let rule = gauss_hermite_normal(40);
        assert!(rule.iter().all(|&(x, w)| x.is_finite() && w.is_finite() && w > 0.0));
        let mass: f64 = rule.iter().map(|&(_, w)| w).sum();
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-10);
    }
}
