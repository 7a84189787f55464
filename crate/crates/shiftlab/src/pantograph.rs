//! Analyticity decision engine for the scalar linear equation
//! `x'(t) = a(t) x(t) + b(t) x(eta(t)) + h(t)` near a fixed point of `eta`.
//!
//! The linearizing conjugacy turns the equation into pantograph form
//! `y'(t) = alpha(t) y(t) + beta(t) y(lambda t) + gamma(t)` with a genuinely
//! linear argument scaling. For expansive `lambda` the rescaled coefficient
//! sequence `w_n` converges; its limit `w_inf` is the obstruction: nonzero
//! `w_inf` rules out analytic solutions, `w_inf = 0` makes the formal series
//! geometrically bounded.
//!
//! Raw `y_n` grow like `lambda^(n(n-1)/2) / n!`, which overflows binary64
//! near n = 40 for lambda = 2. The `w` recursion therefore carries its
//! rescaling weights as (sign, log-magnitude) pairs throughout.

use crate::error::{Error, Result};
use crate::koenigs::ConjugacyResult;
use crate::series::TruncatedSeries;
use crate::shiftmap::{PointClass, ShiftMap};

/// Minimum |beta_0| before the leading-coefficient degeneracy guard fires.
pub const BETA0_FLOOR: f64 = 1e-12;

/// Scalar linear equation data localized at a fixed point of the shift map.
#[derive(Debug, Clone)]
pub struct LocalLinearDDE {
    pub a: TruncatedSeries,
    pub b: TruncatedSeries,
    pub h: TruncatedSeries,
    pub map: ShiftMap,
}

impl LocalLinearDDE {
    pub fn new(a: TruncatedSeries, b: TruncatedSeries, h: TruncatedSeries, map: ShiftMap) -> Result<Self> {
        let t0 = a.center();
        if (b.center() - t0).abs() > 0.0 || (h.center() - t0).abs() > 0.0 {
            return Err(Error::CenterMismatch(t0, b.center()));
        }
        let defect = map.eval(t0) - t0;
        if defect.abs() > 1e-10 * t0.abs().max(1.0) {
            return Err(Error::Invalid(format!(
                "map does not fix the expansion center: eta(t0) - t0 = {defect}"
            )));
        }
        Ok(Self { a, b, h, map })
    }

    pub fn t0(&self) -> f64 {
        self.a.center()
    }
}

/// Coefficients of the conjugated equation, centered at 0.
#[derive(Debug, Clone)]
pub struct PantographForm {
    pub alpha: TruncatedSeries,
    pub beta: TruncatedSeries,
    pub gamma: TruncatedSeries,
    pub lambda: f64,
}

/// Applies the conjugacy: in the new variable the shifted argument is exactly
/// `lambda t`, and the coefficients pick up the Jacobian factor `sigma'`.
pub fn to_pantograph(dde: &LocalLinearDDE, conj: &ConjugacyResult, n_order: usize) -> Result<PantographForm> {
    let sigma = &conj.sigma;
    if sigma.order() < n_order + 1 {
        return Err(Error::JetTooShort { order: sigma.order(), needed: n_order + 1 });
    }
    let sigma_dot = sigma.differentiate().with_center(sigma.center());
    let transform = |c: &TruncatedSeries| -> Result<TruncatedSeries> {
        let composed = c.compose(sigma)?;
        Ok(sigma_dot.mul(&composed)?.truncated(n_order).with_center(0.0))
    };
    Ok(PantographForm {
        alpha: transform(&dde.a)?,
        beta: transform(&dde.b)?,
        gamma: transform(&dde.h)?,
        lambda: conj.lambda,
    })
}

/// Direct Taylor recursion for the pantograph form:
/// `(n+1) y_{n+1} = sum alpha_{n-k} y_k + sum beta_{n-k} lambda^k y_k + gamma_n`.
///
/// Valid for any lambda; aborts with `CoefficientOverflow` once |y| passes
/// 1e300 (super-geometric growth in the expansive case).
pub fn taylor_coefficients(form: &PantographForm, y0: f64, n_order: usize) -> Result<TruncatedSeries> {
    let lambda = form.lambda;
    let mut y = vec![0.0; n_order + 1];
    y[0] = y0;
    let mut lam_pow = vec![0.0; n_order + 1];
    lam_pow[0] = 1.0;
    for k in 1..=n_order {
        lam_pow[k] = lam_pow[k - 1] * lambda;
    }
    for n in 0..n_order {
        let mut s = form.gamma.coeff(n);
        for k in 0..=n {
            s += (form.alpha.coeff(n - k) + form.beta.coeff(n - k) * lam_pow[k]) * y[k];
        }
        let next = s / (n + 1) as f64;
        if !next.is_finite() || next.abs() > 1e300 {
            return Err(Error::CoefficientOverflow(n + 1));
        }
        y[n + 1] = next;
    }
    TruncatedSeries::new(0.0, y)
}

/// Overflow-safe variant of [`taylor_coefficients`]: returns
/// `z_n = y_n / lambda^(n(n-1)/2)`, which stays bounded in the expansive
/// case. Used for cross-checking the `w` rescaling identity at large n.
pub fn scaled_taylor_coefficients(form: &PantographForm, y0: f64, n_order: usize) -> Result<Vec<f64>> {
    let lambda = form.lambda;
    if lambda.abs() <= 1.0 {
        return Err(Error::NotExpansive(lambda));
    }
    let log_lam = lambda.abs().ln();
    let sgn_lam = lambda.signum();
    let mut z = vec![0.0; n_order + 1];
    z[0] = y0;
    // lambda^(k(k-1)/2 - n(n+1)/2) and the beta counterpart, in log form
    for n in 0..n_order {
        let tri_next = (n * (n + 1) / 2) as f64;
        let mut s = form.gamma.coeff(n) * (-tri_next * log_lam).exp()
            * sign_pow(sgn_lam, n * (n + 1) / 2);
        for k in 0..=n {
            let tri_lo = k * k.saturating_sub(1) / 2; // k(k-1)/2
            let tri_k = tri_lo as f64;
            let wa = ((tri_k - tri_next) * log_lam).exp()
                * sign_pow(sgn_lam, tri_sub_parity(tri_lo, n * (n + 1) / 2));
            let tri_kp = (k * (k + 1) / 2) as f64;
            let wb = ((tri_kp - tri_next) * log_lam).exp()
                * sign_pow(sgn_lam, tri_sub_parity(k * (k + 1) / 2, n * (n + 1) / 2));
            s += (form.alpha.coeff(n - k) * wa + form.beta.coeff(n - k) * wb) * z[k];
        }
        z[n + 1] = s / (n + 1) as f64;
        if !z[n + 1].is_finite() {
            return Err(Error::CoefficientOverflow(n + 1));
        }
    }
    Ok(z)
}

fn sign_pow(s: f64, e: usize) -> f64 {
    if s >= 0.0 || e % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

// parity of (a - b) as an exponent of a sign; equals parity of a + b
fn tri_sub_parity(a: usize, b: usize) -> usize {
    (a + b) % 2
}

/// The bounded rescaled sequence and its convergence evidence.
#[derive(Debug, Clone)]
pub struct WDiagnostics {
    pub w: Vec<f64>,
    pub w_inf: f64,
    /// Max |w_{n+1} - w_n| over the last quarter of computed indices.
    pub tail_gap: f64,
    pub converged: bool,
}

impl WDiagnostics {
    /// CSV `n,w_n,delta_n` with full round-trip precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,w_n,delta_n\n");
        for (n, wn) in self.w.iter().enumerate() {
            let delta = if n == 0 { 0.0 } else { wn - self.w[n - 1] };
            out.push_str(&format!(
                "{},{},{}\n",
                n,
                crate::report::fmt_f64(*wn),
                crate::report::fmt_f64(delta)
            ));
        }
        out
    }
}

/// Runs the rescaled recursion
/// `w_{n+1} = (1 + alpha_0/(lambda^n beta_0)) w_n
///   + sum_{k<n} (theta_n/theta_k)(beta_{n-k} + alpha_{n-k}/lambda^k) w_k / beta_0
///   + theta_n gamma_n / beta_0`,
/// with `theta_k = k! / (lambda^(k(k+1)/2) beta_0^k)` carried in
/// (sign, log-magnitude) form.
pub fn w_sequence(form: &PantographForm, y0: f64, n_order: usize) -> Result<WDiagnostics> {
    let lambda = form.lambda;
    if lambda.abs() <= 1.0 {
        return Err(Error::NotExpansive(lambda));
    }
    let beta0 = form.beta.coeff(0);
    if beta0.abs() < BETA0_FLOOR {
        return Err(Error::DegenerateLeadingCoefficient(beta0));
    }
    let alpha0 = form.alpha.coeff(0);
    let log_lam = lambda.abs().ln();
    let log_b0 = beta0.abs().ln();

    let mut w = vec![0.0; n_order + 1];
    w[0] = y0;
    // theta_0 = 1; theta_k / theta_{k-1} = k / (lambda^k beta_0)
    let mut log_theta = vec![0.0; n_order.max(1)];
    let mut sgn_theta = vec![1.0; n_order.max(1)];
    for k in 1..n_order {
        log_theta[k] = log_theta[k - 1] + (k as f64).ln() - k as f64 * log_lam - log_b0;
        sgn_theta[k] = sgn_theta[k - 1] * sign_pow(lambda.signum(), k) * beta0.signum();
    }
    // 1 / lambda^k, underflowing harmlessly to zero
    let mut inv_lam = vec![1.0; n_order.max(1)];
    for k in 1..n_order {
        inv_lam[k] = inv_lam[k - 1] / lambda;
    }

    for n in 0..n_order {
        let lam_n = lambda.powi(n as i32);
        let mut val = (1.0 + alpha0 / (lam_n * beta0)) * w[n];
        for k in 0..n {
            let ratio = sgn_theta[n] * sgn_theta[k] * (log_theta[n] - log_theta[k]).exp();
            let coeff = form.beta.coeff(n - k) + form.alpha.coeff(n - k) * inv_lam[k];
            val += ratio * coeff * w[k] / beta0;
        }
        val += sgn_theta[n] * log_theta[n].exp() * form.gamma.coeff(n) / beta0;
        if !val.is_finite() {
            return Err(Error::CoefficientOverflow(n + 1));
        }
        w[n + 1] = val;
    }

    let start = n_order - n_order / 4;
    let tail_gap = (start.max(1)..=n_order)
        .map(|n| (w[n] - w[n - 1]).abs())
        .fold(0.0_f64, f64::max);
    let w_inf = w[n_order];
    let converged = tail_gap <= 1e-12 * w_inf.abs().max(1.0);
    Ok(WDiagnostics { w, w_inf, tail_gap, converged })
}

/// Exact running product for constant coefficients:
/// `w_n = x0 * prod_{k=0}^{n-1} (1 + a0 / (lambda^k b0))`.
/// Independent oracle for [`w_sequence`].
pub fn closed_form_oracle_simple(a0: f64, b0: f64, lambda: f64, x0: f64, n_order: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(n_order + 1);
    w.push(x0);
    let mut acc = x0;
    let mut lam_k = 1.0;
    for _ in 0..n_order {
        acc *= 1.0 + a0 / (lam_k * b0);
        w.push(acc);
        lam_k *= lambda;
    }
    w
}

/// Outcome of the adaptive limit estimate.
#[derive(Debug, Clone, Copy)]
pub struct WInfinity {
    pub w_inf: f64,
    pub converged: bool,
    pub n_used: usize,
}

/// Doubles the truncation order from 64 until the tail gap clears `tol`.
pub fn w_infinity(form: &PantographForm, y0: f64, tol: f64, n_max: usize) -> Result<WInfinity> {
    let mut n = 64;
    loop {
        let n_run = n.min(n_max);
        let diag = w_sequence(form, y0, n_run)?;
        if diag.tail_gap <= tol * diag.w_inf.abs().max(1.0) {
            return Ok(WInfinity { w_inf: diag.w_inf, converged: true, n_used: n_run });
        }
        if n_run == n_max {
            return Err(Error::NonConvergence { tail_gap: diag.tail_gap, n_max });
        }
        n *= 2;
    }
}

/// Least-squares geometric envelope of a coefficient sequence.
#[derive(Debug, Clone, Copy)]
pub struct GeometricFit {
    pub a: f64,
    pub nu: f64,
    pub rms_residual: f64,
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub series: TruncatedSeries,
    pub fit: GeometricFit,
    pub plausible: bool,
}

/// Builds the formal series and checks it against a geometric envelope
/// `|y_n| <= A nu^n`. Intended for points where `w_inf` vanished (or the
/// multiplier is contractive); super-geometric growth marks the fit
/// implausible.
pub fn reconstruct_analytic(form: &PantographForm, y0: f64, n_order: usize) -> Result<Reconstruction> {
    let series = taylor_coefficients(form, y0, n_order)?;
    let pts: Vec<(f64, f64)> = series
        .coeffs()
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, c)| c.abs() > 0.0)
        .map(|(n, c)| (n as f64, c.abs().ln()))
        .collect();
    let fit = if pts.len() < 2 {
        // polynomial (or constant) tail: trivially inside any envelope
        GeometricFit { a: y0.abs().max(1.0), nu: 0.0, rms_residual: 0.0 }
    } else {
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let intercept = (sy - slope * sx) / n;
        let rms = (pts
            .iter()
            .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        GeometricFit { a: intercept.exp(), nu: slope.exp(), rms_residual: rms }
    };
    let radius_ok = if series.order() >= 8 {
        series.radius_estimate(8.max(series.order() / 4).min(series.order()))?.radius_estimate > 0.0
    } else {
        true
    };
    let plausible = fit.rms_residual <= 0.5 && radius_ok;
    Ok(Reconstruction { series, fit, plausible })
}

/// Classification of a point after the full pipeline has run.
#[derive(Debug, Clone)]
pub enum Verdict {
    /// Contractive multiplier: the local solution exists and is analytic.
    Analytic { series: TruncatedSeries },
    /// Expansive with vanishing obstruction: the formal series is
    /// geometrically bounded. Non-analytic smooth solutions with the same
    /// jet still coexist, hence "candidate".
    AnalyticCandidate { series: TruncatedSeries, w_inf: f64 },
    /// Expansive with `w_inf` clearly nonzero: no analytic solution.
    Nonanalytic { w_inf: f64, tail_gap: f64, n_used: usize },
    /// `|w_inf|` landed between the zero and nonzero thresholds.
    Inconclusive { w_inf: f64 },
}

impl Verdict {
    pub fn class_name(&self) -> &'static str {
        match self {
            Verdict::Analytic { .. } => "Analytic",
            Verdict::AnalyticCandidate { .. } => "AnalyticCandidate",
            Verdict::Nonanalytic { .. } => "Nonanalytic",
            Verdict::Inconclusive { .. } => "Inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ClassifyConfig {
    /// Truncation order for the linearizing conjugacy.
    pub conj_order: usize,
    /// Tail tolerance for the `w_inf` estimate.
    pub w_tol: f64,
    /// Order cap for the adaptive `w` run.
    pub w_max_order: usize,
    /// Order of the reconstructed local series.
    pub series_order: usize,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self { conj_order: 40, w_tol: 1e-10, w_max_order: 512, series_order: 32 }
    }
}

/// Full decision at one fixed point: contractive multipliers are analytic
/// outright; expansive ones are decided by the size of `w_inf` with an
/// honest inconclusive band between the two thresholds.
pub fn classify_point(dde: &LocalLinearDDE, y0: f64, cfg: &ClassifyConfig) -> Result<Verdict> {
    let t0 = dde.t0();
    let lambda = dde.map.deriv(t0);
    let class = PointClass::of_multiplier(lambda);
    let conj = crate::koenigs::koenigs_series(&dde.map, t0, cfg.conj_order)?;
    let form = to_pantograph(dde, &conj, cfg.conj_order - 1)?;
    match class {
        PointClass::Contractive => {
            let series = taylor_coefficients(&form, y0, cfg.series_order.min(cfg.conj_order - 1))?;
            Ok(Verdict::Analytic { series })
        }
        PointClass::Expansive => {
            let est = w_infinity(&form, y0, cfg.w_tol, cfg.w_max_order)?;
            let scale = y0.abs().max(1.0);
            if est.w_inf.abs() > 1e-6 * scale {
                let diag = w_sequence(&form, y0, est.n_used)?;
                Ok(Verdict::Nonanalytic {
                    w_inf: est.w_inf,
                    tail_gap: diag.tail_gap,
                    n_used: est.n_used,
                })
            } else if est.w_inf.abs() <= 1e-8 * scale {
                let rec = reconstruct_analytic(&form, y0, cfg.series_order.min(cfg.conj_order - 1))?;
                Ok(Verdict::AnalyticCandidate { series: rec.series, w_inf: est.w_inf })
            } else {
                Ok(Verdict::Inconclusive { w_inf: est.w_inf })
            }
        }
        PointClass::Neutral => Err(Error::NeutralMultiplier(lambda)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::koenigs::koenigs_series;

    fn constant_form(a0: f64, b0: f64, lambda: f64, order: usize) -> PantographForm {
        PantographForm {
            alpha: TruncatedSeries::constant(0.0, a0, order),
            beta: TruncatedSeries::constant(0.0, b0, order),
            gamma: TruncatedSeries::constant(0.0, 0.0, order),
            lambda,
        }
    }

    fn constant_dde(a0: f64, b0: f64, lambda: f64, order: usize) -> LocalLinearDDE {
        LocalLinearDDE::new(
            TruncatedSeries::constant(0.0, a0, order),
            TruncatedSeries::constant(0.0, b0, order),
            TruncatedSeries::constant(0.0, 0.0, order),
            ShiftMap::Affine { lambda, t0: 0.0 },
        )
        .unwrap()
    }

    #[test]
    fn affine_transform_is_identity() {
        let dde = constant_dde(2.0, -1.5, 3.0, 20);
        let conj = koenigs_series(&dde.map, 0.0, 20).unwrap();
        let form = to_pantograph(&dde, &conj, 18).unwrap();
        assert_eq!(form.lambda, 3.0);
        assert_eq!(form.alpha.coeff(0), 2.0);
        assert_eq!(form.beta.coeff(0), -1.5);
        for n in 1..=18 {
            assert_eq!(form.alpha.coeff(n), 0.0);
            assert_eq!(form.beta.coeff(n), 0.0);
            assert_eq!(form.gamma.coeff(n), 0.0);
        }
    }

    #[test]
    fn sine_family_transform_coefficients() {
        // a = 1/kappa, b(t) = -(1 + (lambda-1) cos t)/kappa, h = 0:
        // alpha_n = (n+1) sigma_{n+1} / kappa and
        // beta_n = -(n+1) lambda^{n+1} sigma_{n+1} / kappa
        let lambda = 7.0;
        let kappa = 10.0;
        let order = 16;
        let map = ShiftMap::SineShift { lambda, offset: 0.0 };
        let conj = koenigs_series(&map, 0.0, order + 2).unwrap();
        let cos = crate::series::cos_jet(0.0, order + 2);
        let b = TruncatedSeries::linear_combine(
            -1.0 / kappa,
            &TruncatedSeries::constant(0.0, 1.0, order + 2),
            -(lambda - 1.0) / kappa,
            &cos,
        )
        .unwrap();
        let dde = LocalLinearDDE::new(
            TruncatedSeries::constant(0.0, 1.0 / kappa, order + 2),
            b,
            TruncatedSeries::constant(0.0, 0.0, order + 2),
            map,
        )
        .unwrap();
        let form = to_pantograph(&dde, &conj, order).unwrap();
        for n in 0..=order - 1 {
            let s_next = conj.sigma.coeff(n + 1);
            let expect_a = (n + 1) as f64 * s_next / kappa;
            let expect_b = -((n + 1) as f64) * lambda.powi(n as i32 + 1) * s_next / kappa;
            let scale_a = expect_a.abs().max(1e-12);
            let scale_b = expect_b.abs().max(1e-9);
            assert!((form.alpha.coeff(n) - expect_a).abs() <= 1e-9 * scale_a, "alpha n={n}");
            assert!((form.beta.coeff(n) - expect_b).abs() <= 1e-7 * scale_b, "beta n={n}");
            assert_eq!(form.gamma.coeff(n), 0.0);
        }
    }

    #[test]
    fn taylor_recursion_examples() {
        // alpha=0, beta=1, lambda=2: y_n = lambda^(n(n-1)/2)/n!
        let form = constant_form(0.0, 1.0, 2.0, 8);
        let y = taylor_coefficients(&form, 1.0, 4).unwrap();
        let expect = [1.0, 1.0, 1.0, 4.0 / 3.0, 8.0 / 3.0];
        for (n, e) in expect.iter().enumerate() {
            assert!((y.coeff(n) - e).abs() < 1e-14, "n = {n}");
        }

        // gamma only: antiderivative
        let form = PantographForm {
            alpha: TruncatedSeries::constant(0.0, 0.0, 4),
            beta: TruncatedSeries::constant(0.0, 0.0, 4),
            gamma: TruncatedSeries::new(0.0, vec![1.0, 2.0, 3.0, 0.0, 0.0]).unwrap(),
            lambda: 2.0,
        };
        let y = taylor_coefficients(&form, 0.0, 4).unwrap();
        assert_eq!(y.coeffs(), &[0.0, 1.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn monomial_beta_lacunary_coefficients() {
        // y' = t^m y(lambda t): y_{(m+1)k} = lambda^((m+1)k(k-1)/2) / ((m+1)^k k!)
        for (m, lambda) in [(1usize, 2.0_f64), (2, 2.0)] {
            let order = 12;
            let mut beta = vec![0.0; order + 1];
            beta[m] = 1.0;
            let form = PantographForm {
                alpha: TruncatedSeries::constant(0.0, 0.0, order),
                beta: TruncatedSeries::new(0.0, beta).unwrap(),
                gamma: TruncatedSeries::constant(0.0, 0.0, order),
                lambda,
            };
            let y = taylor_coefficients(&form, 1.0, order).unwrap();
            let mut fact = 1.0;
            for k in 0..=order / (m + 1) {
                if k > 0 {
                    fact *= k as f64;
                }
                let idx = (m + 1) * k;
                let expect = lambda.powi(((m + 1) * k * k.saturating_sub(1) / 2) as i32)
                    / ((m + 1) as f64).powi(k as i32)
                    / fact;
                assert!(
                    (y.coeff(idx) - expect).abs() <= 1e-10 * expect.abs().max(1.0),
                    "m={m} k={k}: {} vs {expect}",
                    y.coeff(idx)
                );
            }
            for n in 0..=order {
                if n % (m + 1) != 0 {
                    assert_eq!(y.coeff(n), 0.0, "m={m} n={n}");
                }
            }
        }
    }

    #[test]
    fn w_sequence_product_values() {
        let form = constant_form(1.0, 1.0, 2.0, 8);
        let d = w_sequence(&form, 1.0, 5).unwrap();
        let expect = [1.0, 2.0, 3.0, 3.75, 4.21875, 4.482421875];
        for (n, e) in expect.iter().enumerate() {
            assert!((d.w[n] - e).abs() < 1e-12, "n = {n}: {}", d.w[n]);
        }

        // a0 = 0: w_n constant
        let form = constant_form(0.0, 1.0, 2.0, 8);
        let d = w_sequence(&form, 3.0, 20).unwrap();
        assert!(d.w.iter().all(|&w| w == 3.0));
        assert!(d.converged);
    }

    #[test]
    fn w_sequence_matches_oracle_with_variation() {
        // sanity slice of the oracle grid; the full grid runs in acceptance
        for (a0, b0, lambda) in [(-3.0, 1.0, 2.0), (2.0, -2.0, -3.0), (3.0, 2.0, 10.0)] {
            let form = constant_form(a0, b0, lambda, 4);
            let d = w_sequence(&form, 1.0, 120).unwrap();
            let oracle = closed_form_oracle_simple(a0, b0, lambda, 1.0, 120);
            for n in 0..=120 {
                let scale = oracle[n].abs().max(1e-300);
                assert!(
                    (d.w[n] - oracle[n]).abs() <= 1e-10 * scale,
                    "a0={a0} b0={b0} lambda={lambda} n={n}: {} vs {}",
                    d.w[n],
                    oracle[n]
                );
            }
        }
    }

    #[test]
    fn polynomial_degeneration() {
        // a0 = -lambda^k b0 kills the k-th product factor
        let d = w_sequence(&constant_form(-4.0, 1.0, 2.0, 4), 1.0, 10).unwrap();
        assert_eq!(d.w[1], -3.0);
        assert_eq!(d.w[2], 3.0);
        for n in 3..=10 {
            assert!(d.w[n].abs() < 1e-13, "n = {n}: {}", d.w[n]);
        }
    }

    #[test]
    fn rescaling_identity_log_form() {
        // w_n from the rescaled recursion equals theta_n y_n, checked in
        // log-magnitude to dodge the lambda^(n(n-1)/2) overflow
        let form = PantographForm {
            alpha: TruncatedSeries::new(0.0, vec![0.7, -0.2, 0.05, 0.0, 0.0]).unwrap(),
            beta: TruncatedSeries::new(0.0, vec![1.1, 0.3, -0.1, 0.0, 0.0]).unwrap(),
            gamma: TruncatedSeries::new(0.0, vec![0.4, 0.1, 0.0, 0.0, 0.0]).unwrap(),
            lambda: 2.0,
        };
        let n_top = 60;
        let z = scaled_taylor_coefficients(&form, 1.0, n_top).unwrap();
        let d = w_sequence(&form, 1.0, n_top).unwrap();
        let beta0: f64 = 1.1;
        let mut log_fact = 0.0;
        for n in 1..=n_top {
            log_fact += (n as f64).ln();
            // w_n = n! z_n / beta0^n
            let check = z[n].signum()
                * sign_pow(beta0.signum(), n)
                * (log_fact + z[n].abs().ln() - n as f64 * beta0.abs().ln()).exp();
            let scale = d.w[n].abs().max(1e-9);
            assert!(
                (d.w[n] - check).abs() <= 1e-9 * scale,
                "n = {n}: {} vs {check}",
                d.w[n]
            );
        }
    }

    #[test]
    fn w_infinity_oracle_and_guards() {
        let form = constant_form(1.0, 1.0, 2.0, 4);
        let est = w_infinity(&form, 1.0, 1e-12, 1024).unwrap();
        let oracle = closed_form_oracle_simple(1.0, 1.0, 2.0, 1.0, 400);
        assert!(est.converged);
        assert!((est.w_inf - oracle[400]).abs() <= 1e-11 * oracle[400].abs());

        let est = w_infinity(&constant_form(-4.0, 1.0, 2.0, 4), 1.0, 1e-12, 1024).unwrap();
        assert_eq!(est.w_inf, 0.0);

        let degenerate = constant_form(1.0, 0.0, 2.0, 4);
        assert!(matches!(
            w_infinity(&degenerate, 1.0, 1e-12, 256),
            Err(Error::DegenerateLeadingCoefficient(_))
        ));
        assert!(matches!(
            w_sequence(&constant_form(1.0, 1.0, 0.5, 4), 1.0, 10),
            Err(Error::NotExpansive(_))
        ));
    }

    #[test]
    fn w_infinity_linearity() {
        let base = constant_form(2.0, 1.0, 3.0, 4);
        let w1 = w_infinity(&base, 1.0, 1e-12, 1024).unwrap().w_inf;
        for c in [-2.0, 0.5, 10.0] {
            let scaled = PantographForm {
                alpha: base.alpha.clone(),
                beta: base.beta.clone(),
                gamma: base.gamma.scale(c),
                lambda: base.lambda,
            };
            let wc = w_infinity(&scaled, c, 1e-12, 1024).unwrap().w_inf;
            assert!(
                (wc - c * w1).abs() <= 1e-10 * (c * w1).abs().max(1e-12),
                "c = {c}: {wc} vs {}",
                c * w1
            );
        }
    }

    #[test]
    fn reconstruction_polynomial_and_growth() {
        // polynomial case: trailing zeros, infinite radius, plausible
        let rec = reconstruct_analytic(&constant_form(-2.0, 1.0, 2.0, 34), 1.0, 32).unwrap();
        assert!(rec.plausible);
        for n in 2..=32 {
            assert!(rec.series.coeff(n).abs() < 1e-13, "n = {n}");
        }
        assert_eq!(
            rec.series.radius_estimate(8).unwrap().radius_estimate,
            f64::INFINITY
        );

        // w_inf != 0: super-geometric growth fails the envelope fit
        let rec = reconstruct_analytic(&constant_form(1.0, 1.0, 2.0, 34), 1.0, 32).unwrap();
        assert!(!rec.plausible);
    }

    #[test]
    fn classify_three_ways() {
        let cfg = ClassifyConfig::default();
        let analytic = classify_point(&constant_dde(1.0, 1.0, 0.5, 64), 1.0, &cfg).unwrap();
        assert!(matches!(analytic, Verdict::Analytic { .. }));

        let non = classify_point(&constant_dde(1.0, 1.0, 2.0, 64), 1.0, &cfg).unwrap();
        match non {
            Verdict::Nonanalytic { w_inf, .. } => assert!(w_inf > 2.0),
            other => panic!("expected Nonanalytic, got {}", other.class_name()),
        }

        let cand = classify_point(&constant_dde(-2.0, 1.0, 2.0, 64), 1.0, &cfg).unwrap();
        match cand {
            Verdict::AnalyticCandidate { w_inf, series } => {
                assert!(w_inf.abs() < 1e-10);
                for n in 2..=series.order() {
                    assert!(series.coeff(n).abs() < 1e-13);
                }
            }
            other => panic!("expected AnalyticCandidate, got {}", other.class_name()),
        }

        let neutral = constant_dde(1.0, 1.0, 1.0, 8);
        assert!(matches!(
            classify_point(&neutral, 1.0, &cfg),
            Err(Error::NeutralMultiplier(_))
        ));
    }

    #[test]
    fn wdiagnostics_csv_shape() {
        let d = w_sequence(&constant_form(1.0, 1.0, 2.0, 4), 1.0, 3).unwrap();
        let csv = d.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("n,w_n,delta_n"));
        assert_eq!(csv.lines().count(), 5);
        let row1: Vec<&str> = csv.lines().nth(2).unwrap().split(',').collect();
        assert_eq!(row1[0], "1");
        let w1: f64 = row1[1].parse().unwrap();
        let d1: f64 = row1[2].parse().unwrap();
        assert_eq!(w1, 2.0);
        assert_eq!(d1, 1.0);
    }
}
