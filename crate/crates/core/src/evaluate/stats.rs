//! Ordinary least squares with a t-test on the slope.

use serde::{Deserialize, Serialize};

use super::EvalError;

const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Γ(x) for x > 0 (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection keeps the approximation in its accurate range.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let t = x + 7.5;
    let sum = LANCZOS[1..].iter().enumerate().fold(LANCZOS[0], |acc, (i, c)| acc + c / (x + i as f64 + 1.0));
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + sum.ln()
}

/// Continued fraction for the incomplete beta function, evaluated with
/// the modified Lentz method.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        d = if d.abs() < TINY { TINY } else { d };
        c = 1.0 + aa / c;
        c = if c.abs() < TINY { TINY } else { c };
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        d = if d.abs() < TINY { TINY } else { d };
        c = 1.0 + aa / c;
        c = if c.abs() < TINY { TINY } else { c };
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function I_x(a, b).
pub fn incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Two-sided p-value of a t statistic with `df` degrees of freedom.
pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    incomplete_beta(df / 2.0, 0.5, df / (df + t * t))
}

/// `min(1, m p)`.
pub fn bonferroni(p: f64, m: usize) -> f64 {
    (p * m as f64).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub t: f64,
    pub df: usize,
    pub p_value: f64,
    pub adjusted_p: f64,
    pub n: usize,
}

/// Fit `y = intercept + slope x` by least squares and test the slope
/// against zero, Bonferroni-adjusting for `n_comparisons` tests.
pub fn regress(points: &[(f64, f64)], n_comparisons: usize) -> Result<RegressionResult, EvalError> {
    let n = points.len();
    if n < 3 {
        return Err(EvalError::TooFewValues { needed: 3, found: n });
    }
    let nf = n as f64;
    let xbar = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let ybar = points.iter().map(|p| p.1).sum::<f64>() / nf;
    // Normal equations in centered form.
    let sxx: f64 = points.iter().map(|p| (p.0 - xbar).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - xbar) * (p.1 - ybar)).sum();
    if sxx <= f64::EPSILON * nf * xbar.abs().max(1.0).powi(2) {
        return Err(EvalError::DegenerateX);
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let sse: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let df = n - 2;
    let slope_se = (sse / df as f64 / sxx).sqrt();
    let t = if slope == 0.0 {
        0.0
    } else if slope_se == 0.0 {
        slope.signum() * f64::INFINITY
    } else {
        slope / slope_se
    };
    let p_value = t_two_sided_p(t, df as f64);
    Ok(RegressionResult {
        slope,
        intercept,
        slope_se,
        t,
        df,
        p_value,
        adjusted_p: bonferroni(p_value, n_comparisons.max(1)),
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_at_integers() {
        let mut fact = 1.0f64;
        for n in 1..20 {
            assert!((ln_gamma(n as f64) - fact.ln()).abs() < 1e-12, "{n}");
            fact *= n as f64;
        }
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
    }

    #[test]
    fn beta_edges_and_symmetry() {
        assert_eq!(incomplete_beta(2.0, 3.0, 0.0), 0.0);
        assert_eq!(incomplete_beta(2.0, 3.0, 1.0), 1.0);
        for &(a, b, x) in &[(2.0, 3.0, 0.3), (0.5, 7.0, 0.8), (12.0, 1.5, 0.6)] {
            let s = incomplete_beta(a, b, x) + incomplete_beta(b, a, 1.0 - x);
            assert!((s - 1.0).abs() < 1e-13);
        }
        // I_x(1, 1) = x
        assert!((incomplete_beta(1.0, 1.0, 0.37) - 0.37).abs() < 1e-14);
    }

    #[test]
    fn exact_line() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 2.0 * i as f64 + 1.0)).collect();
        let r = regress(&pts, 1).unwrap();
        assert!((r.slope - 2.0).abs() < 1e-9 && (r.intercept - 1.0).abs() < 1e-9);
        assert!(r.p_value < 1e-6);
    }

    #[test]
    fn flat_line() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 0.7)).collect();
        let r = regress(&pts, 3).unwrap();
        assert_eq!(r.slope, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.adjusted_p, 1.0);
    }

    #[test]
    fn degenerate() {
        assert!(matches!(regress(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)], 1), Err(EvalError::DegenerateX)));
        assert!(matches!(regress(&[(1.0, 1.0), (2.0, 2.0)], 1), Err(EvalError::TooFewValues { .. })));
    }

    #[test]
    fn bonferroni_caps() {
        assert_eq!(bonferroni(0.02, 9), 0.18);
        assert_eq!(bonferroni(0.2, 9), 1.0);
    }
}
