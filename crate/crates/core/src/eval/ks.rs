//! Two-sample Kolmogorov-Smirnov test with asymptotic p-values.
//!
//! `D = sup_x |F_a(x) - F_b(x)|` over the empirical CDFs. The p-value is the
//! Kolmogorov survival function at `sqrt(n_a * n_b / (n_a + n_b)) * D`:
//!
//! ```text
//! Q(l) = 2 * sum_{j >= 1} (-1)^(j - 1) * exp(-2 j^2 l^2)
//!      = 1 - sqrt(2 pi) / l * sum_{j >= 1} exp(-(2j - 1)^2 pi^2 / (8 l^2))
//! ```
//!
//! The second form converges fast for small `l` and is used below 1.18.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let statistic = ks_statistic(a, b);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let effective = n * m / (n + m);
    Ok(KsResult {
        statistic,
        p_value: kolmogorov_survival(effective.sqrt() * statistic),
    })
}

fn sorted(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (sorted(a), sorted(b));
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    d
}

/// `P(K > lambda)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let p = if lambda < 1.18 {
        let y = (-std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda)).exp();
        let mut sum = 0.0;
        for j in 1..=20u32 {
            let odd = f64::from(2 * j - 1);
            let term = y.powf(odd * odd);
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * sum
    } else {
        let mut sum = 0.0;
        for j in 1..=100u32 {
            let jf = f64::from(j);
            let term = (-2.0 * jf * jf * lambda * lambda).exp();
            sum += if j % 2 == 1 { term } else { -term };
            if term < 1e-18 * sum.abs() {
                break;
            }
        }
        2.0 * sum
    };
    p.clamp(0.0, 1.0)
}
