//! Real branches of the Lambert W function and the asymptotic bracket used by
//! the blow-up rate analysis.
//!
//! `W_0` and `W_{-1}` solve `W e^W = z`. The rate analysis only ever needs
//! `W_{-1}(-e^{-u-1})` for large `u`, where the argument underflows long before
//! `u` is large; [`wm1_of_exponent`] therefore solves the equivalent equation
//! `x - log x = u + 1` (with `W = -x`, `x >= 1`) directly in the exponent.

use crate::error::{Error, Result};

const EM1: f64 = 0.36787944117144233; // e^{-1}

/// Principal branch `W_0(z)` for `z >= -1/e`.
pub fn w0(z: f64) -> Result<f64> {
    if !(z >= -EM1) {
        return Err(Error::OutsideBranchDomain { branch: 0, z });
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    // initial guess
    let mut w = if z < 1.0 {
        // series about the branch point: W = -1 + p - p^2/3, p = sqrt(2(ez+1))
        let p = (2.0 * (std::f64::consts::E * z + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0
    } else {
        let l = z.ln();
        l - l.ln().max(0.0)
    };
    halley(&mut w, z);
    Ok(w)
}

/// Secondary real branch `W_{-1}(z)` for `-1/e <= z < 0`.
pub fn wm1(z: f64) -> Result<f64> {
    if !(z >= -EM1 && z < 0.0) {
        return Err(Error::OutsideBranchDomain { branch: -1, z });
    }
    // initial guess: near the branch point use the branch-point series, deep in
    // the tail use the log-log asymptotic
    let mut w = if z > -0.25 {
        let l = (-z).ln(); // l < 0, W ~ l - log(-l)
        l - (-l).ln()
    } else {
        let p = -(2.0 * (std::f64::consts::E * z + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0
    };
    halley(&mut w, z);
    Ok(w)
}

fn halley(w: &mut f64, z: f64) {
    for _ in 0..50 {
        let e = w.exp();
        let f = *w * e - z;
        if f == 0.0 {
            break;
        }
        let denom = e * (*w + 1.0) - (*w + 2.0) * f / (2.0 * *w + 2.0);
        let dw = f / denom;
        *w -= dw;
        if dw.abs() < 1e-15 * (1.0 + w.abs()) {
            break;
        }
    }
}

/// `W_{-1}(-e^{-u-1})` for `u >= 0`, computed without forming the (possibly
/// underflowing) argument: returns `-x` where `x >= 1` solves `x - log x = u + 1`.
pub fn wm1_of_exponent(u: f64) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(Error::OutsideBranchDomain { branch: -1, z: u });
    }
    let t = u + 1.0;
    // x in [1, t + log t + 1]; Newton on g(x) = x - log x - t, g' = 1 - 1/x
    let mut x = if u < 1e-6 {
        // branch point: x = 1 + sqrt(2u) + 2u/3 + ...
        1.0 + (2.0 * u).sqrt() + 2.0 * u / 3.0
    } else {
        t + t.ln()
    };
    for _ in 0..60 {
        let g = x - x.ln() - t;
        let gp = 1.0 - 1.0 / x;
        if gp <= 0.0 {
            break;
        }
        let dx = g / gp;
        x -= dx;
        if x < 1.0 {
            x = 1.0 + 1e-16;
        }
        if dx.abs() < 1e-15 * x {
            break;
        }
    }
    Ok(-x)
}

/// Sharp two-sided bracket for `-W_{-1}(-e^{-u-1}) - 1 - sqrt(2u)`:
/// for every `eps` in (0, 1) and `u > 0`,
/// `(1 - eps) u - 2/eps < -W_{-1}(-e^{-u-1}) - 1 - sqrt(2u) < u`.
pub fn wm1_bracket(u: f64, eps: f64) -> (f64, f64) {
    ((1.0 - eps) * u - 2.0 / eps, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_values() {
        assert!((w0(0.0).unwrap()).abs() < 1e-15);
        assert!((w0(std::f64::consts::E).unwrap() - 1.0).abs() < 1e-14);
        assert!((w0(-EM1).unwrap() + 1.0).abs() < 1e-6);
        assert!((wm1(-EM1).unwrap() + 1.0).abs() < 1e-6);
        // W_{-1}(-e^{-2}) solves w e^w = -e^{-2}
        let w = wm1(-(-2.0f64).exp()).unwrap();
        assert!((w * w.exp() + (-2.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn branch_domains() {
        assert!(w0(-0.4).is_err());
        assert!(wm1(0.1).is_err());
        assert!(wm1(-0.5).is_err());
        assert!(wm1_of_exponent(-1.0).is_err());
    }

    #[test]
    fn exponent_form_matches_direct_evaluation() {
        for u in [1e-8, 1e-4, 0.1, 1.0, 5.0, 20.0, 200.0] {
            let w = wm1_of_exponent(u).unwrap();
            // residual of x - log x = u + 1 with x = -w
            let x = -w;
            assert!(
                (x - x.ln() - (u + 1.0)).abs() < 1e-12 * (u + 1.0),
                "u = {u}"
            );
            if u < 500.0 {
                let z = -(-u - 1.0f64).exp();
                if z < 0.0 {
                    let direct = wm1(z).unwrap();
                    assert!((w - direct).abs() < 1e-9 * (1.0 + w.abs()), "u = {u}");
                }
            }
        }
        // far beyond underflow of the argument
        let w = wm1_of_exponent(1e3).unwrap();
        let x = -w;
        assert!((x - x.ln() - 1001.0).abs() < 1e-9);
    }

    #[test]
    fn bracket_holds_on_a_sweep() {
        for &eps in &[0.1, 0.3, 0.7] {
            let mut u = 1e-3;
            while u < 800.0 {
                let mid = -wm1_of_exponent(u).unwrap() - 1.0 - (2.0 * u).sqrt();
                let (lo, hi) = wm1_bracket(u, eps);
                assert!(lo < mid && mid < hi, "u = {u}, eps = {eps}, mid = {mid}");
                u *= 1.7;
            }
        }
    }

    proptest! {
        #[test]
        fn w0_residual(z in -EM1..50.0) {
            let w = w0(z).unwrap();
            let res = (w * w.exp() - z).abs();
            prop_assert!(res < 1e-10 * (1.0 + z.abs()));
        }

        #[test]
        fn wm1_residual(t in 0.0f64..30.0) {
            // z = -e^{-1-t} spans (-1/e, 0)
            let z = -(-1.0 - t).exp();
            let w = wm1(z).unwrap();
            prop_assert!(w <= -1.0 + 1e-9);
            let res = (w * w.exp() - z).abs();
            prop_assert!(res < 1e-12);
        }
    }
}
