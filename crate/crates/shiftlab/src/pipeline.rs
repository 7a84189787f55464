//! End-to-end coexistence run on the sine-family delay
//! `r(t) = -(lambda - 1) sin t + 2 pi m`.
//!
//! One configuration drives the whole chain: eigenvalue of the integral
//! operator, localization at the expansive fixed point `t = 0`, conjugacy,
//! rescaled sequence `w_n`, the explicit tail bound `Omega(lambda)`, and —
//! when the branch inequality holds — a contractive fixed point of the same
//! equation on another delay branch.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::koenigs::{koenigs_series, ConjugacyResult};
use crate::kreigen::{
    power_iteration, to_ode_coefficients, verify_bounds, EigenResult, IntegralOperatorSpec,
    PeriodicProfile, DEFAULT_PERIOD,
};
use crate::pantograph::WDiagnostics;
use crate::report::JsonWriter;
use crate::shiftmap::{FixedPointRecord, PointClass, ShiftMap};

/// `1 + 18 * sum_{j>=1} (j+1)/2^j = 1 + 18*3`: the constant in the
/// geometric envelope `H_n = (2/lambda)^n * K` for `n >= 1`.
pub const TAIL_CONSTANT: f64 = 55.0;

#[derive(Debug, Clone)]
pub struct CoexistenceConfig {
    pub lambda: f64,
    /// Delay branch: `r(t) = -(lambda - 1) sin t + 2 pi m`.
    pub m: u32,
    /// Candidate branch for the contractive fixed point.
    pub n: u32,
    /// Quadrature grid for the eigenproblem; power of two.
    pub grid: usize,
    /// Truncation order for the conjugacy and coefficient jets.
    pub order: usize,
    /// Length of the rescaled sequence.
    pub w_order: usize,
    pub eigen_tol: f64,
}

impl Default for CoexistenceConfig {
    fn default() -> Self {
        Self {
            lambda: 7.4,
            m: 2,
            n: 1,
            grid: 1024,
            order: 40,
            w_order: 256,
            eigen_tol: 1e-10,
        }
    }
}

impl CoexistenceConfig {
    /// `1 < lambda < 2 pi m + 1` keeps the delay strictly positive;
    /// `lambda > 2` keeps the tail bound finite.
    pub fn validate(&self) -> Result<()> {
        let cap = DEFAULT_PERIOD * self.m as f64 + 1.0;
        if !(self.lambda > 1.0 && self.lambda < cap) {
            return Err(Error::ConfigInfeasible(format!(
                "need 1 < lambda < 2*pi*m + 1 = {cap}, got lambda = {}",
                self.lambda
            )));
        }
        if self.lambda <= 2.0 {
            return Err(Error::LambdaTooSmall(self.lambda));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CoexistenceReport {
    pub eigen: EigenResult,
    pub expansive: FixedPointRecord,
    pub w_diag: WDiagnostics,
    /// `Omega(lambda)`; caps `|w_inf - w_0| / |w_0|`.
    pub omega_bound: f64,
    pub bound_satisfied: bool,
    /// `2 pi m <= 2 lambda + 1`, which pins the eigenvalue under `3 lambda`.
    /// The run proceeds either way; the tail estimate only needs this flag.
    pub kappa_ratio_ok: bool,
    /// Contractive fixed point on branch `m - n`, present when the branch
    /// inequality holds.
    pub contractive: Option<FixedPointRecord>,
    /// `sqrt((lambda-1)^2 - 4) < 2 pi n < lambda - 1`.
    pub pq_satisfied: bool,
}

impl CoexistenceReport {
    pub fn kappa(&self) -> f64 {
        self.eigen.kappa
    }

    pub fn to_json(&self) -> String {
        let mut w = JsonWriter::new();
        w.real("kappa", self.eigen.kappa)
            .real("eigen_residual", self.eigen.residual)
            .real("bound_lo", self.eigen.bound_lo)
            .real("bound_hi", self.eigen.bound_hi)
            .begin_object("expansive")
            .real("t_star", self.expansive.t_star)
            .real("multiplier", self.expansive.multiplier)
            .string("class", self.expansive.class.as_str())
            .end_object()
            .real("w0", self.w_diag.w[0])
            .real("w_inf", self.w_diag.w_inf)
            .real("tail_gap", self.w_diag.tail_gap)
            .boolean("w_converged", self.w_diag.converged)
            .real("omega_bound", self.omega_bound)
            .boolean("bound_satisfied", self.bound_satisfied)
            .boolean("kappa_ratio_ok", self.kappa_ratio_ok)
            .boolean("pq_satisfied", self.pq_satisfied);
        match &self.contractive {
            Some(rec) => {
                w.begin_object("contractive")
                    .real("t_star", rec.t_star)
                    .real("multiplier", rec.multiplier)
                    .string("class", rec.class.as_str())
                    .end_object();
            }
            None => {
                w.null("contractive");
            }
        }
        w.finish()
    }
}

/// Specialization of the rescaled recursion to the sine family, where the
/// conjugated coefficients are pure multiples of the conjugacy coefficients:
/// `w_{n+1} = (1 - lambda^{-(n+1)}) (w_n
///   + sum_{k<n} (xi_n/xi_k) (n-k+1) sigma_{n-k+1} w_k)`,
/// `xi_k = (-1)^k kappa^k k! / lambda^{k(k+1)/2}` carried as ratios in
/// (sign, log-magnitude) form. Identical to the general recursion with
/// `beta_0 = -lambda/kappa`; the agreement is a cross-check, not a shortcut.
pub fn w_sequence_sine(
    kappa: f64,
    conj: &ConjugacyResult,
    lambda: f64,
    y0: f64,
    n_order: usize,
) -> Result<WDiagnostics> {
    if lambda <= 1.0 {
        return Err(Error::NotExpansive(lambda));
    }
    if kappa <= 0.0 {
        return Err(Error::NotPositive("kappa"));
    }
    if (conj.lambda - lambda).abs() > 1e-9 * lambda.abs() {
        return Err(Error::Invalid(format!(
            "conjugacy multiplier {} does not match lambda = {lambda}",
            conj.lambda
        )));
    }
    let sigma = &conj.sigma;
    let log_lam = lambda.ln();
    let log_kap = kappa.ln();

    let mut w = vec![0.0; n_order + 1];
    w[0] = y0;
    // xi_0 = 1; xi_k / xi_{k-1} = -kappa k / lambda^k
    let mut log_xi = vec![0.0; n_order.max(1)];
    let mut sgn_xi = vec![1.0; n_order.max(1)];
    for k in 1..n_order {
        log_xi[k] = log_xi[k - 1] + log_kap + (k as f64).ln() - k as f64 * log_lam;
        sgn_xi[k] = -sgn_xi[k - 1];
    }

    for n in 0..n_order {
        let mut val = w[n];
        for k in 0..n {
            let ratio = sgn_xi[n] * sgn_xi[k] * (log_xi[n] - log_xi[k]).exp();
            let j = n - k;
            val += ratio * (j + 1) as f64 * sigma.coeff(j + 1) * w[k];
        }
        val *= 1.0 - lambda.powi(-(n as i32 + 1));
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

/// `Omega(lambda) = (sum_n H_n)(prod_k (1 + H_k))` with `H_0 = 1/lambda` and
/// `H_n = (2/lambda)^n K` for `n >= 1`. The sum telescopes in closed form;
/// the product is taken until its factors reach 1 in machine precision.
pub fn omega_bound(lambda: f64) -> Result<f64> {
    if lambda <= 2.0 {
        return Err(Error::LambdaTooSmall(lambda));
    }
    let q = 2.0 / lambda;
    let sum = 1.0 / lambda + TAIL_CONSTANT * q / (1.0 - q);
    let mut prod = 1.0 + 1.0 / lambda;
    let mut hn = TAIL_CONSTANT * q;
    while 1.0 + hn != 1.0 {
        prod *= 1.0 + hn;
        hn *= q;
    }
    Ok(sum * prod)
}

/// Smallest `lambda` with `Omega(lambda) < 1`, by bisection on the monotone
/// tail. The bound is sufficient, not sharp.
pub fn omega_unity_threshold(tol: f64) -> f64 {
    let mut lo = 2.0 + 1e-9;
    let mut hi = 4.0;
    while omega_bound(hi).expect("hi > 2") >= 1.0 {
        hi *= 2.0;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if omega_bound(mid).expect("mid > 2") >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Runs the full chain. The expansive record always refers to `t = 0` on
/// branch `m`; the contractive record, when present, to
/// `t_00 = pi/2 + arccos(2 pi n / (lambda - 1))` on branch `m - n`.
pub fn run_coexistence(cfg: &CoexistenceConfig) -> Result<CoexistenceReport> {
    cfg.validate()?;
    let lambda = cfg.lambda;
    let period = DEFAULT_PERIOD;

    let spec = IntegralOperatorSpec::new(
        PeriodicProfile::SineDelay { lambda, m: cfg.m },
        PeriodicProfile::Const(1.0),
        period,
    );
    let eigen = power_iteration(&spec, cfg.grid, cfg.eigen_tol, 20_000)?;
    let bc = verify_bounds(&spec, &eigen)?;
    if !bc.ok {
        return Err(Error::Invalid(format!(
            "eigenvalue {} escapes the quadrature sandwich [{}, {}]",
            eigen.kappa, bc.lo, bc.hi
        )));
    }
    // analytic sandwich for the sine delay, with the same grid slack
    let slack = 10.0 * period / (cfg.grid * cfg.grid) as f64;
    let lo = period * cfg.m as f64 - lambda + 1.0;
    let hi = period * cfg.m as f64 + lambda - 1.0;
    if eigen.kappa < lo - slack || eigen.kappa > hi + slack {
        return Err(Error::Invalid(format!(
            "eigenvalue {} escapes [{lo}, {hi}]",
            eigen.kappa
        )));
    }
    let kappa = eigen.kappa;
    let kappa_ratio_ok = period * cfg.m as f64 <= 2.0 * lambda + 1.0;

    // r(0) = 2 pi m, so branch m fixes t = 0; the multiplier is lambda.
    let dde = to_ode_coefficients(&spec, kappa, cfg.m as i64, 0.0, cfg.order + 1)?;
    let mult = dde.map.deriv(0.0);
    let expansive = FixedPointRecord {
        t_star: 0.0,
        period_m: 1,
        multiplier: mult,
        class: PointClass::of_multiplier(mult),
    };
    if expansive.class != PointClass::Expansive {
        return Err(Error::NotExpansive(mult));
    }

    let conj = koenigs_series(&dde.map, 0.0, cfg.order + 1)?;
    let y0 = eigen.x.samples[0];
    if y0 <= 0.0 {
        return Err(Error::NotPositive("eigenfunction at 0"));
    }
    let w_diag = w_sequence_sine(kappa, &conj, lambda, y0, cfg.w_order)?;

    let omega = omega_bound(lambda)?;
    let bound_satisfied =
        (w_diag.w_inf - w_diag.w[0]).abs() <= omega * w_diag.w[0].abs() + 1e-9;

    // branch inequality: sqrt((lambda-1)^2 - 4) < 2 pi n < lambda - 1.
    // The lower half is exactly |multiplier| < 1 at the candidate point.
    let two_pi_n = period * cfg.n as f64;
    let lower = ((lambda - 1.0).powi(2) - 4.0).max(0.0).sqrt();
    let pq_satisfied = lower < two_pi_n && two_pi_n < lambda - 1.0;
    let contractive = if pq_satisfied {
        let t00 = PI / 2.0 + (two_pi_n / (lambda - 1.0)).acos();
        let mult_c = 1.0 - ((lambda - 1.0).powi(2) - two_pi_n * two_pi_n).sqrt();
        // branch m - n fixes t00: eta(t) = t + (lambda-1) sin t - 2 pi n
        let shifted = ShiftMap::SineShift { lambda, offset: -two_pi_n };
        let defect = shifted.eval(t00) - t00;
        if defect.abs() > 1e-10 {
            return Err(Error::BranchNotFixed {
                m: cfg.m as i64 - cfg.n as i64,
                t0: t00,
                defect,
            });
        }
        let class = PointClass::of_multiplier(mult_c);
        if class != PointClass::Contractive {
            return Err(Error::Invalid(format!(
                "candidate multiplier {mult_c} is not contractive"
            )));
        }
        Some(FixedPointRecord { t_star: t00, period_m: 1, multiplier: mult_c, class })
    } else {
        None
    };

    Ok(CoexistenceReport {
        eigen,
        expansive,
        w_diag,
        omega_bound: omega,
        bound_satisfied,
        kappa_ratio_ok,
        contractive,
        pq_satisfied,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pantograph::{to_pantograph, w_sequence};
    use crate::series::TruncatedSeries;

    #[test]
    fn tail_constant_matches_series() {
        // sum_{j>=1} (j+1)/2^j = 3
        let s: f64 = (1..200).map(|j| (j + 1) as f64 / 2f64.powi(j)).sum();
        assert!((1.0 + 18.0 * s - TAIL_CONSTANT).abs() < 1e-12);
    }

    #[test]
    fn omega_needs_lambda_above_two() {
        assert!(matches!(omega_bound(2.0), Err(Error::LambdaTooSmall(_))));
        assert!(matches!(omega_bound(1.5), Err(Error::LambdaTooSmall(_))));
    }

    #[test]
    fn omega_monotone_and_vanishing() {
        let lams = [3.0, 5.0, 10.0, 100.0, 1e4, 1e8];
        let vals: Vec<f64> = lams.iter().map(|&l| omega_bound(l).unwrap()).collect();
        for pair in vals.windows(2) {
            assert!(pair[1] < pair[0]);
        }
        assert!(vals[5] < 1e-5);
    }

    #[test]
    fn omega_at_13_frozen() {
        let v = omega_bound(13.0).unwrap();
        assert!((v - 294.0522173104654).abs() < 1e-9 * 294.0);
    }

    #[test]
    fn omega_threshold_brackets_unity() {
        let star = omega_unity_threshold(1e-9);
        assert!((star - 182.1805369813755).abs() < 1e-6);
        assert!(omega_bound(star + 1e-6).unwrap() < 1.0);
        assert!(omega_bound(star - 1e-6).unwrap() > 1.0);
    }

    fn identity_conjugacy(lambda: f64, order: usize) -> ConjugacyResult {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[1] = 1.0;
        ConjugacyResult {
            sigma: TruncatedSeries::new(0.0, coeffs).unwrap(),
            lambda,
            residual: 0.0,
        }
    }

    #[test]
    fn identity_sigma_telescopes() {
        let lambda = 5.0;
        let conj = identity_conjugacy(lambda, 60);
        let d = w_sequence_sine(3.0, &conj, lambda, 2.0, 50).unwrap();
        let mut expect = 2.0;
        for (n, wn) in d.w.iter().enumerate() {
            assert!((wn - expect).abs() <= 1e-14 * expect.abs());
            expect *= 1.0 - lambda.powi(-(n as i32 + 1));
        }
    }

    #[test]
    fn zero_initial_value_stays_zero() {
        let conj = identity_conjugacy(4.0, 30);
        let d = w_sequence_sine(2.0, &conj, 4.0, 0.0, 20).unwrap();
        assert!(d.w.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_bad_parameters() {
        let conj = identity_conjugacy(4.0, 10);
        assert!(matches!(
            w_sequence_sine(2.0, &conj, 0.5, 1.0, 8),
            Err(Error::NotExpansive(_))
        ));
        assert!(matches!(
            w_sequence_sine(-1.0, &conj, 4.0, 1.0, 8),
            Err(Error::NotPositive(_))
        ));
        assert!(w_sequence_sine(2.0, &conj, 5.0, 1.0, 8).is_err());
    }

    #[test]
    fn sine_recursion_matches_general_recursion() {
        // lambda = 13, m = 2: run both recursions from the same data.
        let lambda = 13.0;
        let spec = IntegralOperatorSpec::new(
            PeriodicProfile::SineDelay { lambda, m: 2 },
            PeriodicProfile::Const(1.0),
            DEFAULT_PERIOD,
        );
        let eigen = power_iteration(&spec, 1024, 1e-10, 20_000).unwrap();
        let n_ord = 200;
        let dde = to_ode_coefficients(&spec, eigen.kappa, 2, 0.0, n_ord + 1).unwrap();
        let conj = koenigs_series(&dde.map, 0.0, n_ord + 1).unwrap();
        let form = to_pantograph(&dde, &conj, n_ord).unwrap();
        let y0 = eigen.x.samples[0];
        let general = w_sequence(&form, y0, n_ord).unwrap();
        let sine = w_sequence_sine(eigen.kappa, &conj, lambda, y0, n_ord).unwrap();
        let scale = general.w.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for (a, b) in general.w.iter().zip(&sine.w) {
            assert!((a - b).abs() <= 1e-9 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn coexistence_reference_run() {
        let cfg = CoexistenceConfig::default();
        let report = run_coexistence(&cfg).unwrap();

        let kappa = report.kappa();
        assert!(kappa > DEFAULT_PERIOD * 2.0 - 6.4 && kappa < DEFAULT_PERIOD * 2.0 + 6.4);
        assert!(report.kappa_ratio_ok);
        assert!((report.expansive.multiplier - 7.4).abs() < 1e-12);
        assert_eq!(report.expansive.class, PointClass::Expansive);
        assert!(report.bound_satisfied);
        assert!(report.pq_satisfied);

        let rec = report.contractive.as_ref().unwrap();
        assert!((rec.t_star - 1.76215).abs() < 1e-4);
        assert!((rec.multiplier + 0.21720269291625205).abs() < 1e-10);
        // closed forms are self-consistent with the shift map itself
        let shifted = ShiftMap::SineShift { lambda: 7.4, offset: -DEFAULT_PERIOD };
        assert!((shifted.eval(rec.t_star) - rec.t_star).abs() < 1e-10);
        assert!((shifted.deriv(rec.t_star) - rec.multiplier).abs() < 1e-10);

        let json = report.to_json();
        assert!(json.contains("\"pq_satisfied\":true"));
    }

    #[test]
    fn branch_inequality_can_fail() {
        // 2 pi m > 2 lambda + 1: flagged but still run; n = 1 fails pq.
        let cfg = CoexistenceConfig { lambda: 5.0, ..CoexistenceConfig::default() };
        let report = run_coexistence(&cfg).unwrap();
        assert!(!report.kappa_ratio_ok);
        assert!(!report.pq_satisfied);
        assert!(report.contractive.is_none());
        assert!(report.to_json().contains("\"contractive\":null"));
    }

    #[test]
    fn positivity_window_is_enforced() {
        let cfg = CoexistenceConfig { m: 1, ..CoexistenceConfig::default() };
        assert!(matches!(run_coexistence(&cfg), Err(Error::ConfigInfeasible(_))));
    }
}
