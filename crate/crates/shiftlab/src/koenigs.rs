//! Linearizing conjugacy at a non-neutral fixed point.
//!
//! Given a shift map `eta` with `eta(t0) = t0` and multiplier
//! `lambda = eta'(t0)`, `|lambda| != 0, 1`, there is a unique analytic `sigma`
//! with `sigma(t0) = t0`, `sigma'(t0) = 1` and
//! `eta(sigma(t)) = sigma(t0 + lambda (t - t0))`. In the conjugated variable
//! the shift is exactly linear, which is what makes the pantograph-form
//! coefficient recursions applicable near a general expansive fixed point.
//!
//! Two independent algorithms are provided: direct order-by-order coefficient
//! matching (always applicable) and a contraction-mapping sweep specific to
//! the sine family, kept as a cross-check.

use crate::error::{Error, Result};
use crate::series::TruncatedSeries;
use crate::shiftmap::{ShiftMap, NEUTRAL_BAND};

/// Smallest multiplier accepted by [`zeta_iteration`]; the sweep operator is
/// only a contraction for large `lambda`.
pub const LAMBDA_FLOOR: f64 = 10.0;

/// Conjugacy jet together with its re-substitution residual.
#[derive(Debug, Clone)]
pub struct ConjugacyResult {
    /// `sigma` centered at `t0`; `coeffs[0] = t0`, `coeffs[1] = 1` exactly.
    pub sigma: TruncatedSeries,
    pub lambda: f64,
    /// Max |coefficient| of `eta(sigma(t)) - sigma(t0 + lambda (t - t0))`
    /// through the truncation order.
    pub residual: f64,
}

fn check_multiplier(lambda: f64) -> Result<()> {
    if lambda == 0.0 {
        return Err(Error::Invalid("multiplier lambda must be nonzero".into()));
    }
    if (lambda.abs() - 1.0).abs() <= NEUTRAL_BAND {
        return Err(Error::NeutralMultiplier(lambda));
    }
    Ok(())
}

/// Solves for the conjugacy by matching Taylor coefficients order by order.
///
/// At order `n` the conjugacy equation pins `sigma_n` through the divisor
/// `lambda^n - lambda`, which never vanishes for `|lambda| != 0, 1`.
pub fn koenigs_series(map: &ShiftMap, t0: f64, n_order: usize) -> Result<ConjugacyResult> {
    if n_order < 2 {
        return Err(Error::Invalid("conjugacy order must be at least 2".into()));
    }
    let jet = map.taylor_jet(t0, n_order);
    if jet.order() < n_order {
        return Err(Error::JetTooShort { order: jet.order(), needed: n_order });
    }
    let defect = jet.coeff(0) - t0;
    if defect.abs() > 1e-9 * t0.abs().max(1.0) {
        return Err(Error::Invalid(format!(
            "t0 = {t0} is not a fixed point: eta(t0) - t0 = {defect}"
        )));
    }
    let lambda = jet.coeff(1);
    check_multiplier(lambda)?;

    if lambda.abs() > 1.0 {
        // divisor lower bound for expansive multipliers
        let min_div = (2..=n_order)
            .map(|n| (lambda.powi(n as i32) - lambda).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(
            min_div >= (lambda.abs() - 1.0) * lambda.abs() - 1e-9 * min_div.max(1.0),
            "divisor bound violated: {min_div}"
        );
    }

    // deviation coordinates: e(s) = eta(t0 + s) - t0, S(s) = s + sum sigma_n s^n
    let mut e_coeffs = jet.coeffs().to_vec();
    e_coeffs[0] = 0.0;
    let e = TruncatedSeries::new(0.0, e_coeffs)?;
    let mut s_coeffs = vec![0.0; n_order + 1];
    s_coeffs[1] = 1.0;

    for n in 2..=n_order {
        // with sigma_n still zero, the order-n coefficient of e(S(s)) is the
        // inhomogeneity c; the full equation reads c + lambda sigma_n =
        // lambda^n sigma_n
        let s_jet = TruncatedSeries::new(0.0, s_coeffs[..=n].to_vec())?;
        let c = e.truncated(n).compose(&s_jet)?.coeff(n);
        s_coeffs[n] = c / (lambda.powi(n as i32) - lambda);
    }

    let mut sigma_coeffs = s_coeffs;
    sigma_coeffs[0] = t0;
    let sigma = TruncatedSeries::new(t0, sigma_coeffs)?;
    let residual = conjugacy_residual(&sigma, map, lambda)?;
    Ok(ConjugacyResult { sigma, lambda, residual })
}

/// Max residual coefficient of `eta(sigma(t)) - sigma(t0 + lambda (t - t0))`.
pub fn conjugacy_residual(sigma: &TruncatedSeries, map: &ShiftMap, lambda: f64) -> Result<f64> {
    let t0 = sigma.center();
    let n = sigma.order();
    let eta_jet = map.taylor_jet(t0, n);
    let lhs = eta_jet.compose(sigma)?;
    // jet of t0 + lambda (t - t0), same center and order as sigma
    let mut lin = vec![0.0; n + 1];
    lin[0] = t0;
    if n >= 1 {
        lin[1] = lambda;
    }
    let rhs = sigma.compose(&TruncatedSeries::new(t0, lin)?)?;
    let diff = TruncatedSeries::linear_combine(1.0, &lhs, -1.0, &rhs)?;
    Ok(diff.coeffs().iter().fold(0.0_f64, |m, c| m.max(c.abs())))
}

/// Re-substitution check of a conjugacy result against a tolerance.
pub fn verify_conjugacy(result: &ConjugacyResult, map: &ShiftMap, tol: f64) -> Result<bool> {
    Ok(conjugacy_residual(&result.sigma, map, result.lambda)? <= tol)
}

/// Independent solver for the sine family `eta(t) = t + (lambda - 1) sin t`
/// at its fixed point 0, by sweeping the substitution operator on
/// `zeta(t) = sigma(t)/t - 1` until the update stalls.
///
/// Returns the `sigma` jet of the requested order, centered at 0.
pub fn zeta_iteration(lambda: f64, n_order: usize, iters: usize) -> Result<TruncatedSeries> {
    if lambda < LAMBDA_FLOOR {
        return Err(Error::LambdaBelowFloor(lambda, LAMBDA_FLOOR));
    }
    if n_order < 2 || iters == 0 {
        return Err(Error::Invalid("need order >= 2 and iters >= 1".into()));
    }
    let delta = 1.0 / lambda;
    let m = n_order - 1; // zeta order: sigma(t) = t + t zeta(t)

    // g(u) = sin(u)/u - 1, even series with g_{2k} = (-1)^k / (2k+1)!
    let mut g_coeffs = vec![0.0; m + 1];
    let mut fact = 1.0; // (2k+1)! running value
    for k in 1..=(m / 2) {
        fact *= (2 * k) as f64 * (2 * k + 1) as f64;
        g_coeffs[2 * k] = if k % 2 == 1 { -1.0 } else { 1.0 } / fact;
    }
    let g = TruncatedSeries::new(0.0, g_coeffs)?;

    let rescale = |z: &TruncatedSeries| -> Result<TruncatedSeries> {
        // z(delta t) from z(t)
        let coeffs = z
            .coeffs()
            .iter()
            .enumerate()
            .map(|(n, c)| c * delta.powi(n as i32))
            .collect();
        TruncatedSeries::new(0.0, coeffs)
    };

    let mut zeta = TruncatedSeries::constant(0.0, 0.0, m);
    let mut prev_gap = f64::INFINITY;
    for sweep in 0..iters {
        let zd = rescale(&zeta)?;
        let one_plus = TruncatedSeries::linear_combine(
            1.0,
            &TruncatedSeries::constant(0.0, 1.0, m),
            1.0,
            &zd,
        )?;
        // u(t) = delta t (1 + zeta(delta t)): multiply by t, then pad back
        let mut u_coeffs = vec![0.0; m + 1];
        for n in 0..m {
            u_coeffs[n + 1] = delta * one_plus.coeff(n);
        }
        let u = TruncatedSeries::new(0.0, u_coeffs)?;
        let g_of_u = g.compose(&u)?;
        let next = TruncatedSeries::linear_combine(
            1.0,
            &zd,
            1.0 - delta,
            &one_plus.mul(&g_of_u)?,
        )?;
        let gap = (0..=m)
            .map(|n| (next.coeff(n) - zeta.coeff(n)).abs())
            .fold(0.0_f64, f64::max);
        zeta = next;
        if gap < 1e-16 {
            break;
        }
        if sweep > 0 && gap > 0.9 * prev_gap {
            return Err(Error::NoContraction(gap / prev_gap));
        }
        prev_gap = gap;
        if sweep + 1 == iters && gap > 1e-12 {
            return Err(Error::NoContraction(gap));
        }
    }

    let mut sigma = vec![0.0; n_order + 1];
    sigma[1] = 1.0 + zeta.coeff(0);
    for n in 2..=n_order {
        sigma[n] = zeta.coeff(n - 1);
    }
    TruncatedSeries::new(0.0, sigma)
}
