//! Blow-up rate fit: regress `log λ(t)` on `log|t|` and `log log(1/|t|)`,
//!
//! ```text
//! log λ ≈ e · log|t| + c · log log(1/|t|) + a,
//! ```
//!
//! whose predicted coefficients are `e = 1/(1+σ)` and `c = 1/(2+2σ)`. The
//! pure power law (`c` forced to 0) is fitted alongside so the improvement
//! from the log correction can be reported.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct RateFit {
    /// Coefficient of `log|t|` (leading power).
    pub exponent: f64,
    /// Coefficient of `log log(1/|t|)`.
    pub log_coeff: f64,
    pub intercept: f64,
    /// RMS residual of the full model.
    pub residual: f64,
    /// RMS residual with the log-correction term removed.
    pub residual_power_only: f64,
    /// Decades of λ-decrease covered by the data.
    pub decades: f64,
}

/// Least-squares fit of the rate law on a `(t, λ)` series with `t < 0`
/// approaching the blow-up time 0. Requires `|t| < 1` (so the iterated
/// logarithm is defined) and at least one decade of λ-decrease.
pub fn fit_rate(t: &[f64], lambda: &[f64]) -> Result<RateFit> {
    if t.len() != lambda.len() || t.len() < 4 {
        return Err(Error::Config("rate fit needs >= 4 matched (t, lambda) samples".into()));
    }
    for (&ti, &li) in t.iter().zip(lambda) {
        if !(ti < 0.0 && -ti < 1.0) {
            return Err(Error::OutOfRange(format!(
                "rate fit needs -1 < t < 0, got t = {ti}"
            )));
        }
        if !(li > 0.0) {
            return Err(Error::OutOfRange(format!("rate fit needs lambda > 0, got {li}")));
        }
    }
    let lmax = lambda.iter().cloned().fold(f64::MIN, f64::max);
    let lmin = lambda.iter().cloned().fold(f64::MAX, f64::min);
    let decades = (lmax / lmin).log10();
    if decades < 1.0 {
        return Err(Error::InsufficientConcentration(decades));
    }

    // regressors: x1 = log|t|, x2 = log log(1/|t|), target y = log lambda
    let rows: Vec<[f64; 3]> = t
        .iter()
        .map(|&ti| {
            let at = -ti;
            [at.ln(), (1.0 / at).ln().ln(), 1.0]
        })
        .collect();
    let y: Vec<f64> = lambda.iter().map(|&l| l.ln()).collect();

    let full = lsq(&rows, &y, 3)?;
    // power-only: drop the middle regressor
    let rows2: Vec<[f64; 3]> = rows.iter().map(|r| [r[0], r[2], 0.0]).collect();
    let power = lsq(&rows2, &y, 2)?;

    let rms = |coef: &[f64; 3], rows: &[[f64; 3]], k: usize| -> f64 {
        let mut ss = 0.0;
        for (r, &yi) in rows.iter().zip(&y) {
            let pred: f64 = (0..k).map(|j| coef[j] * r[j]).sum();
            ss += (pred - yi) * (pred - yi);
        }
        (ss / rows.len() as f64).sqrt()
    };

    Ok(RateFit {
        exponent: full[0],
        log_coeff: full[1],
        intercept: full[2],
        residual: rms(&full, &rows, 3),
        residual_power_only: rms(&power, &rows2, 2),
        decades,
    })
}

/// Normal-equation least squares for up to three regressors.
fn lsq(rows: &[[f64; 3]], y: &[f64], k: usize) -> Result<[f64; 3]> {
    let mut a = [[0.0f64; 3]; 3];
    let mut b = [0.0f64; 3];
    for (r, &yi) in rows.iter().zip(y) {
        for i in 0..k {
            b[i] += r[i] * yi;
            for j in 0..k {
                a[i][j] += r[i] * r[j];
            }
        }
    }
    for i in k..3 {
        a[i][i] = 1.0;
    }
    // Gaussian elimination with partial pivoting on the 3x3 system
    let mut m = a;
    let mut v = b;
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if m[piv][col].abs() < 1e-300 {
            return Err(Error::Config("rate fit design matrix is singular".into()));
        }
        m.swap(col, piv);
        v.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for j in col..3 {
                m[row][j] -= f * m[col][j];
            }
            v[row] -= f * v[col];
        }
    }
    let mut x = [0.0f64; 3];
    for col in (0..3).rev() {
        let mut s = v[col];
        for j in col + 1..3 {
            s -= m[col][j] * x[j];
        }
        x[col] = s / m[col][col];
    }
    Ok(x)
}
