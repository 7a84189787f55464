//! Periodic positive integral-operator eigenproblem
//! `kappa x(t) = integral of rho(s) x(s) ds over [t - r(t), t]`
//! with positive periodic delay `r` and weight `rho`.
//!
//! The operator maps positive periodic functions to positive periodic
//! functions, so the leading eigenpair is found by power iteration on a
//! uniform-grid quadrature (trapezoid with a linearly interpolated partial
//! cell at the moving lower endpoint, O(G^-2)). Differentiating the
//! eigenrelation yields a delay ODE whose shift map is
//! `eta(t) = t - r(t) + period * m`; that ODE is what feeds the
//! analyticity pipeline.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::pantograph::LocalLinearDDE;
use crate::series::{sin_jet, TruncatedSeries};
use crate::shiftmap::ShiftMap;

pub const DEFAULT_PERIOD: f64 = 2.0 * std::f64::consts::PI;

/// Uniformly sampled periodic function; `G` a power of two, at least 64.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicFunction {
    pub period: f64,
    pub samples: Vec<f64>,
}

impl PeriodicFunction {
    pub fn new(period: f64, samples: Vec<f64>) -> Result<Self> {
        let g = samples.len();
        if g < 64 || !g.is_power_of_two() {
            return Err(Error::Invalid(format!("grid size {g} must be a power of two >= 64")));
        }
        if period <= 0.0 || samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::Invalid("period must be positive, samples finite".into()));
        }
        Ok(Self { period, samples })
    }

    pub fn from_fn(period: f64, g: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let samples = (0..g).map(|j| f(period * j as f64 / g as f64)).collect();
        Self::new(period, samples)
    }

    pub fn grid(&self) -> usize {
        self.samples.len()
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// CSV `t,x` over one period.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x\n");
        let g = self.grid();
        for (j, x) in self.samples.iter().enumerate() {
            out.push_str(&format!(
                "{},{}\n",
                crate::report::fmt_f64(self.period * j as f64 / g as f64),
                crate::report::fmt_f64(*x)
            ));
        }
        out
    }
}

/// Delay/weight profile: closed forms carry exact jets, sampled profiles get
/// spectral (Fourier) derivatives.
#[derive(Debug, Clone)]
pub enum PeriodicProfile {
    Const(f64),
    /// `-(lambda - 1) sin t + period * m`: the delay whose shift map is the
    /// sine family.
    SineDelay { lambda: f64, m: u32 },
    Samples(PeriodicFunction),
}

impl PeriodicProfile {
    fn values_on_grid(&self, period: f64, g: usize) -> Result<Vec<f64>> {
        match self {
            PeriodicProfile::Const(c) => Ok(vec![*c; g]),
            PeriodicProfile::SineDelay { lambda, m } => Ok((0..g)
                .map(|j| {
                    let t = period * j as f64 / g as f64;
                    -(lambda - 1.0) * t.sin() + period * *m as f64
                })
                .collect()),
            PeriodicProfile::Samples(pf) => {
                if pf.grid() != g {
                    return Err(Error::GridMismatch(pf.grid(), g));
                }
                if (pf.period - period).abs() > 1e-12 * period {
                    return Err(Error::Invalid("sampled profile period mismatch".into()));
                }
                Ok(pf.samples.clone())
            }
        }
    }

    pub fn value(&self, period: f64, t: f64) -> f64 {
        match self {
            PeriodicProfile::Const(c) => *c,
            PeriodicProfile::SineDelay { lambda, m } => {
                -(lambda - 1.0) * t.sin() + period * *m as f64
            }
            PeriodicProfile::Samples(pf) => {
                let g = pf.grid() as f64;
                let pos = (t / pf.period * g).rem_euclid(g);
                let lo = pos.floor() as usize % pf.grid();
                let hi = (lo + 1) % pf.grid();
                let th = pos - pos.floor();
                (1.0 - th) * pf.samples[lo] + th * pf.samples[hi]
            }
        }
    }

    /// Taylor jet at `t0`; exact for closed forms, spectral for samples.
    pub fn jet(&self, period: f64, t0: f64, order: usize) -> Result<TruncatedSeries> {
        match self {
            PeriodicProfile::Const(c) => Ok(TruncatedSeries::constant(t0, *c, order)),
            PeriodicProfile::SineDelay { lambda, m } => TruncatedSeries::linear_combine(
                -(lambda - 1.0),
                &sin_jet(t0, order),
                1.0,
                &TruncatedSeries::constant(t0, period * *m as f64, order),
            ),
            PeriodicProfile::Samples(pf) => spectral_jet(pf, t0, order),
        }
    }
}

fn spectral_jet(pf: &PeriodicFunction, t0: f64, order: usize) -> Result<TruncatedSeries> {
    let g = pf.grid();
    let mut buf: Vec<Complex<f64>> =
        pf.samples.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(g).process(&mut buf);
    // drop rounding-level modes: differentiation amplifies them by k^p
    let peak = buf.iter().map(|c| c.norm()).fold(0.0_f64, f64::max);
    for c in &mut buf {
        if c.norm() <= 1e-12 * peak {
            *c = Complex::new(0.0, 0.0);
        }
    }
    let omega = 2.0 * std::f64::consts::PI / pf.period;
    let mut coeffs = vec![0.0; order + 1];
    let mut fact = 1.0;
    for (p, c) in coeffs.iter_mut().enumerate() {
        if p > 0 {
            fact *= p as f64;
        }
        let mut d = Complex::new(0.0, 0.0);
        for (k, bk) in buf.iter().enumerate() {
            let kk = if k <= g / 2 { k as i64 } else { k as i64 - g as i64 };
            // the Nyquist mode carries no usable odd-derivative information
            if kk == (g / 2) as i64 && p % 2 == 1 {
                continue;
            }
            let ik = Complex::new(0.0, kk as f64 * omega);
            d += bk / g as f64 * ik.powi(p as i32) * (ik * t0).exp();
        }
        *c = d.re / fact;
    }
    TruncatedSeries::new(t0, coeffs)
}

/// The integral operator data; both profiles must be strictly positive.
#[derive(Debug, Clone)]
pub struct IntegralOperatorSpec {
    pub r: PeriodicProfile,
    pub rho: PeriodicProfile,
    pub period: f64,
}

impl IntegralOperatorSpec {
    pub fn new(r: PeriodicProfile, rho: PeriodicProfile, period: f64) -> Self {
        Self { r, rho, period }
    }
}

/// Applies the operator on the grid of `x` in O(G) using prefix sums:
/// full cells come from a cumulative trapezoid table, the partial cell at
/// the moving lower endpoint from linear interpolation.
pub fn apply_l(spec: &IntegralOperatorSpec, x: &PeriodicFunction) -> Result<PeriodicFunction> {
    let g = x.grid();
    if (x.period - spec.period).abs() > 1e-12 * spec.period {
        return Err(Error::Invalid("grid period does not match operator period".into()));
    }
    let r = spec.r.values_on_grid(spec.period, g)?;
    let rho = spec.rho.values_on_grid(spec.period, g)?;
    if r.iter().any(|&v| v <= 0.0) {
        return Err(Error::NotPositive("r"));
    }
    if rho.iter().any(|&v| v <= 0.0) {
        return Err(Error::NotPositive("rho"));
    }
    let h = spec.period / g as f64;
    let f: Vec<f64> = (0..g).map(|j| rho[j] * x.samples[j]).collect();
    // cum[i] = trapezoid integral from node 0 to node i; cum[g] = full period
    let mut cum = vec![0.0; g + 1];
    for i in 0..g {
        cum[i + 1] = cum[i] + h * (f[i] + f[(i + 1) % g]) / 2.0;
    }
    let full = cum[g];
    let integral_to = |node: i64| -> f64 {
        let q = node.div_euclid(g as i64);
        let rem = node.rem_euclid(g as i64) as usize;
        q as f64 * full + cum[rem]
    };
    let mut out = Vec::with_capacity(g);
    for j in 0..g {
        let pos = j as f64 - r[j] / h; // lower endpoint in grid units
        let lo_node = pos.ceil() as i64;
        let mut v = integral_to(j as i64) - integral_to(lo_node);
        let w = (lo_node as f64 - pos) * h;
        if w > 0.0 {
            let fl = pos.floor() as i64;
            let th = pos - fl as f64;
            let f_at = |n: i64| f[n.rem_euclid(g as i64) as usize];
            let f_a = (1.0 - th) * f_at(fl) + th * f_at(fl + 1);
            v += w * (f_a + f_at(lo_node)) / 2.0;
        }
        out.push(v);
    }
    PeriodicFunction::new(spec.period, out)
}

/// Leading eigenpair with its quadrature-level evidence.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub kappa: f64,
    /// Eigenfunction normalized to sup-norm 1; strictly positive.
    pub x: PeriodicFunction,
    /// Sup-norm of `Lx - kappa x` on the grid.
    pub residual: f64,
    pub bound_lo: f64,
    pub bound_hi: f64,
}

impl EigenResult {
    pub fn to_json(&self) -> String {
        let mut w = crate::report::JsonWriter::new();
        w.real("kappa", self.kappa)
            .real("residual", self.residual)
            .real("bound_lo", self.bound_lo)
            .real("bound_hi", self.bound_hi)
            .uint("grid", self.x.grid() as u64);
        w.finish()
    }
}

/// Power iteration from `x = 1`.
pub fn power_iteration(
    spec: &IntegralOperatorSpec,
    g: usize,
    tol: f64,
    max_iter: usize,
) -> Result<EigenResult> {
    let x0 = PeriodicFunction::new(spec.period, vec![1.0; g])?;
    power_iteration_from(spec, x0, tol, max_iter)
}

/// Power iteration from an arbitrary strictly positive initial guess. The
/// limit is independent of the guess (leading eigenpair is simple).
pub fn power_iteration_from(
    spec: &IntegralOperatorSpec,
    mut x: PeriodicFunction,
    tol: f64,
    max_iter: usize,
) -> Result<EigenResult> {
    if x.min() <= 0.0 {
        return Err(Error::NotPositive("initial guess"));
    }
    let sup = x.max();
    for s in &mut x.samples {
        *s /= sup;
    }
    let mut kappa = 0.0_f64;
    let mut small_changes = 0;
    for _ in 0..max_iter {
        let y = apply_l(spec, &x)?;
        if let Some(j) = y.samples.iter().position(|&v| v <= 0.0) {
            return Err(Error::PositivityLost(j));
        }
        let new_kappa = y.max();
        let change = (new_kappa - kappa).abs() / new_kappa.abs().max(1e-300);
        small_changes = if change <= tol { small_changes + 1 } else { 0 };
        kappa = new_kappa;
        let next =
            PeriodicFunction::new(spec.period, y.samples.iter().map(|&v| v / kappa).collect())?;
        if small_changes >= 3 {
            let ly = apply_l(spec, &next)?;
            let residual = next
                .samples
                .iter()
                .zip(&ly.samples)
                .map(|(xi, li)| (li - kappa * xi).abs())
                .fold(0.0_f64, f64::max);
            if residual <= tol {
                let (bound_lo, bound_hi) = radius_bounds(spec, next.grid())?;
                return Ok(EigenResult { kappa, x: next, residual, bound_lo, bound_hi });
            }
        }
        x = next;
    }
    Err(Error::EigenNoConvergence(max_iter))
}

/// `min` and `max` over the grid of the full delayed integral of `rho` —
/// the eigenvalue is sandwiched between them.
pub fn radius_bounds(spec: &IntegralOperatorSpec, g: usize) -> Result<(f64, f64)> {
    let one = PeriodicFunction::new(spec.period, vec![1.0; g])?;
    let integrals = apply_l(spec, &one)?;
    Ok((integrals.min(), integrals.max()))
}

#[derive(Debug, Clone, Copy)]
pub struct BoundsCheck {
    pub lo: f64,
    pub hi: f64,
    pub ok: bool,
}

/// Re-derives the sandwich bounds with the same quadrature and checks the
/// eigenvalue against them, with O(G^-2) slack.
pub fn verify_bounds(spec: &IntegralOperatorSpec, result: &EigenResult) -> Result<BoundsCheck> {
    let g = result.x.grid();
    let (lo, hi) = radius_bounds(spec, g)?;
    let slack = 10.0 * spec.period / (g * g) as f64;
    let ok = lo - slack <= result.kappa && result.kappa <= hi + slack;
    Ok(BoundsCheck { lo, hi, ok })
}

/// Differentiates the eigenrelation into the delay ODE
/// `kappa x'(t) = rho(t) x(t) - eta'(t) rho(eta(t)) x(eta(t))` with
/// `eta(t) = t - r(t) + period * m_branch`, as jets at `t0`.
pub fn to_ode_coefficients(
    spec: &IntegralOperatorSpec,
    kappa: f64,
    m_branch: i64,
    t0: f64,
    order: usize,
) -> Result<LocalLinearDDE> {
    if kappa == 0.0 {
        return Err(Error::Invalid("kappa must be nonzero".into()));
    }
    let offset = spec.period * m_branch as f64;
    let defect = -spec.r.value(spec.period, t0) + offset;
    if defect.abs() > 1e-8 * t0.abs().max(1.0) {
        return Err(Error::BranchNotFixed { m: m_branch, t0, defect });
    }

    let r_jet = spec.r.jet(spec.period, t0, order + 1)?;
    let rho_jet = spec.rho.jet(spec.period, t0, order + 1)?;

    // eta = t - r(t) + offset
    let mut eta = TruncatedSeries::linear_combine(
        1.0,
        &TruncatedSeries::identity(t0, order + 1),
        -1.0,
        &r_jet,
    )?;
    eta = TruncatedSeries::linear_combine(
        1.0,
        &eta,
        1.0,
        &TruncatedSeries::constant(t0, offset, order + 1),
    )?;

    let a = rho_jet.scale(1.0 / kappa).truncated(order);
    // pin the composition point exactly at the fixed point
    let mut eta_coeffs = eta.coeffs().to_vec();
    eta_coeffs[0] = t0;
    let eta_exact = TruncatedSeries::new(t0, eta_coeffs)?;
    let rho_of_eta = rho_jet.compose(&eta_exact)?;
    let b = eta_exact
        .differentiate()
        .mul(&rho_of_eta.truncated(order))?
        .scale(-1.0 / kappa)
        .truncated(order);
    let h = TruncatedSeries::constant(t0, 0.0, order);

    let map = match &spec.r {
        PeriodicProfile::SineDelay { lambda, m } => ShiftMap::SineShift {
            lambda: *lambda,
            offset: spec.period * (m_branch - *m as i64) as f64,
        },
        _ => ShiftMap::SeriesMap { jet: eta_exact },
    };
    LocalLinearDDE::new(a, b, h, map)
}
