//! Method-of-steps simulation of the pantograph-form equation
//! `y'(t) = alpha(t) y(t) + beta(t) y(lambda t) + gamma(t)` with expansive
//! `lambda`, integrating inward from annuli `[tau/|lambda|, tau]` toward the
//! fixed point at 0.
//!
//! On each layer the advanced argument `lambda t` falls in the previous
//! layer, so the equation is an ordinary linear ODE there; classical RK4
//! plus cubic interpolation for the advanced term. The one-sided limits
//! `Lambda_-` and `Lambda_+` of the solution at 0 are affine in the initial
//! data; matching both to a prescribed `y(0)` produces smooth solutions
//! that share the formal Taylor jet of the recursion without being analytic.

use crate::error::{Error, Result};
use crate::pantograph::{taylor_coefficients, PantographForm};

/// Sampled initial data on the outer annulus: `phi_minus` on
/// `[-tau, -tau/|lambda|]`, `phi_plus` on `[tau/|lambda|, tau]`, both on
/// uniform inclusive grids of at least 64 nodes.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub tau: f64,
    pub phi_minus: Vec<f64>,
    pub phi_plus: Vec<f64>,
}

impl InitialData {
    pub fn new(tau: f64, phi_minus: Vec<f64>, phi_plus: Vec<f64>) -> Result<Self> {
        if tau <= 0.0 {
            return Err(Error::Invalid("tau must be positive".into()));
        }
        for phi in [&phi_minus, &phi_plus] {
            if phi.len() < 64 {
                return Err(Error::Invalid(format!(
                    "initial data needs >= 64 nodes, got {}",
                    phi.len()
                )));
            }
            if phi.iter().any(|v| !v.is_finite()) {
                return Err(Error::Invalid("initial data must be finite".into()));
            }
        }
        Ok(Self { tau, phi_minus, phi_plus })
    }

    /// Constant data `c_minus` on the left, `c_plus` on the right.
    pub fn constant(tau: f64, c_minus: f64, c_plus: f64, nodes: usize) -> Result<Self> {
        Self::new(tau, vec![c_minus; nodes], vec![c_plus; nodes])
    }

    pub fn sup_norm(&self) -> f64 {
        self.phi_minus
            .iter()
            .chain(&self.phi_plus)
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// One integrated annulus, samples ascending in `t` on `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct Layer {
    pub k: usize,
    pub lo: f64,
    pub hi: f64,
    pub y: Vec<f64>,
}

/// Cubic 4-point Lagrange interpolation on a uniform inclusive grid.
fn interp_cubic(lo: f64, hi: f64, y: &[f64], t: f64) -> f64 {
    let n = y.len();
    debug_assert!(n >= 4);
    let h = (hi - lo) / (n - 1) as f64;
    let x = ((t - lo) / h).clamp(0.0, (n - 1) as f64);
    let i0 = ((x.floor() as isize) - 1).clamp(0, n as isize - 4) as usize;
    let mut s = 0.0;
    for a in 0..4 {
        let mut l = 1.0;
        for b in 0..4 {
            if b != a {
                l *= (x - (i0 + b) as f64) / (a as f64 - b as f64);
            }
        }
        s += l * y[i0 + a];
    }
    s
}

/// Inward step cascade with its extrapolated one-sided limits.
#[derive(Debug, Clone)]
pub struct StepSolution {
    pub tau: f64,
    pub lambda: f64,
    pub data: InitialData,
    pub layers_minus: Vec<Layer>,
    pub layers_plus: Vec<Layer>,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub sup_norm_phi: f64,
}

impl StepSolution {
    /// Evaluates the piecewise solution; inside the deepest layer the
    /// one-sided limit is returned (the gap is `O(tau/|lambda|^depth)`).
    pub fn eval(&self, t: f64) -> f64 {
        let q = 1.0 / self.lambda.abs();
        let b1 = self.tau * q;
        if t >= b1 {
            return interp_cubic(b1, self.tau, &self.data.phi_plus, t);
        }
        if t <= -b1 {
            return interp_cubic(-self.tau, -b1, &self.data.phi_minus, t);
        }
        let (layers, limit) = if t >= 0.0 {
            (&self.layers_plus, self.lambda_plus)
        } else {
            (&self.layers_minus, self.lambda_minus)
        };
        let a = t.abs();
        if a == 0.0 {
            return limit;
        }
        // layer k spans |t| in [tau q^(k+1), tau q^k]
        let mut k = ((self.tau / a).ln() / self.lambda.abs().ln()).floor() as isize;
        k = k.clamp(1, self.layers_plus.len() as isize);
        // guard against log rounding at layer boundaries
        while k > 1 && a > self.tau * q.powi(k as i32) {
            k -= 1;
        }
        while (k as usize) < layers.len() && a < self.tau * q.powi(k as i32 + 1) {
            k += 1;
        }
        if k as usize > layers.len() {
            return limit;
        }
        let layer = &layers[k as usize - 1];
        interp_cubic(layer.lo, layer.hi, &layer.y, t)
    }

    /// CSV `t,y,layer`; layer 0 is the initial data, negative indices the
    /// left cascade.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,y,layer\n");
        let q = 1.0 / self.lambda.abs();
        let b1 = self.tau * q;
        let mut push = |t: f64, y: f64, layer: i64| {
            out.push_str(&format!(
                "{},{},{}\n",
                crate::report::fmt_f64(t),
                crate::report::fmt_f64(y),
                layer
            ));
        };
        let nm = self.data.phi_minus.len();
        for (j, y) in self.data.phi_minus.iter().enumerate() {
            let t = -self.tau + (self.tau - b1) * j as f64 / (nm - 1) as f64;
            push(t, *y, 0);
        }
        for layer in &self.layers_minus {
            let n = layer.y.len();
            for (j, y) in layer.y.iter().enumerate() {
                let t = layer.lo + (layer.hi - layer.lo) * j as f64 / (n - 1) as f64;
                push(t, *y, -(layer.k as i64));
            }
        }
        for layer in self.layers_plus.iter().rev() {
            let n = layer.y.len();
            for (j, y) in layer.y.iter().enumerate() {
                let t = layer.lo + (layer.hi - layer.lo) * j as f64 / (n - 1) as f64;
                push(t, *y, layer.k as i64);
            }
        }
        let np = self.data.phi_plus.len();
        for (j, y) in self.data.phi_plus.iter().enumerate() {
            let t = b1 + (self.tau - b1) * j as f64 / (np - 1) as f64;
            push(t, *y, 0);
        }
        out
    }
}

fn jet_tail_check(series: &crate::series::TruncatedSeries, tau: f64) -> Result<()> {
    let order = series.order();
    let lo = order.saturating_sub((order / 4).max(4)).max(1);
    let mut tail = 0.0_f64;
    for n in lo..=order {
        let c = series.coeff(n).abs();
        if c > 0.0 {
            tail = tail.max(c.powf(1.0 / n as f64));
        }
    }
    if tail * tau >= 0.5 {
        return Err(Error::JetRadiusExceeded { tau, tail });
    }
    Ok(())
}

/// Integrates the cascade inward for `depth` layers on each side, RK4 with
/// `steps_per_layer >= 64` and cubic interpolation for the advanced term.
/// The limits are Richardson-extrapolated from the geometric layer-endpoint
/// sequence (ratio `1/|lambda|`).
pub fn integrate_inward(
    form: &PantographForm,
    data: &InitialData,
    depth: usize,
    steps_per_layer: usize,
) -> Result<StepSolution> {
    let lambda = form.lambda;
    if lambda.abs() <= 1.0 {
        return Err(Error::NotExpansive(lambda));
    }
    if depth < 4 {
        return Err(Error::Invalid("depth must be at least 4".into()));
    }
    if steps_per_layer < 64 {
        return Err(Error::Invalid("need at least 64 steps per layer".into()));
    }
    for series in [&form.alpha, &form.beta, &form.gamma] {
        jet_tail_check(series, data.tau)?;
    }

    let q = 1.0 / lambda.abs();
    let tau = data.tau;
    let b = |k: i32| tau * q.powi(k);

    let mut layers_minus: Vec<Layer> = Vec::with_capacity(depth);
    let mut layers_plus: Vec<Layer> = Vec::with_capacity(depth);

    // value of the already-known solution at the advanced argument
    let prev_eval = |k: usize, s: f64, lm: &[Layer], lp: &[Layer]| -> f64 {
        if k == 1 {
            if s >= 0.0 {
                interp_cubic(b(1), tau, &data.phi_plus, s)
            } else {
                interp_cubic(-tau, -b(1), &data.phi_minus, s)
            }
        } else {
            let layer = if s >= 0.0 { &lp[k - 2] } else { &lm[k - 2] };
            interp_cubic(layer.lo, layer.hi, &layer.y, s)
        }
    };

    for k in 1..=depth {
        let outer = b(k as i32);
        let inner = b(k as i32 + 1);
        for positive in [false, true] {
            let (t_start, t_end) = if positive { (outer, inner) } else { (-outer, -inner) };
            let y_start = if k == 1 {
                if positive {
                    data.phi_plus[0]
                } else {
                    *data.phi_minus.last().expect("validated nonempty")
                }
            } else {
                let prev = if positive {
                    &layers_plus[k - 2]
                } else {
                    &layers_minus[k - 2]
                };
                // innermost endpoint of the previous layer
                if positive { prev.y[0] } else { *prev.y.last().unwrap() }
            };
            let h = (t_end - t_start) / steps_per_layer as f64;
            let f = |t: f64, y: f64| -> f64 {
                form.alpha.eval(t) * y
                    + form.beta.eval(t) * prev_eval(k, lambda * t, &layers_minus, &layers_plus)
                    + form.gamma.eval(t)
            };
            let mut y = y_start;
            let mut samples = Vec::with_capacity(steps_per_layer + 1);
            samples.push(y);
            for i in 0..steps_per_layer {
                let t = t_start + i as f64 * h;
                let k1 = f(t, y);
                let k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
                let k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
                let k4 = f(t + h, y + h * k3);
                y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                samples.push(y);
            }
            let layer = if positive {
                samples.reverse(); // ascending t
                Layer { k, lo: inner, hi: outer, y: samples }
            } else {
                Layer { k, lo: -outer, hi: -inner, y: samples }
            };
            if positive {
                layers_plus.push(layer);
            } else {
                layers_minus.push(layer);
            }
        }
    }

    // Richardson on the geometric endpoint sequence v_k = y(+-tau q^(k+1))
    let richardson = |v: &[f64]| -> Result<f64> {
        let n = v.len();
        let extrap = |k: usize| v[k] + (v[k] - v[k - 1]) * q / (1.0 - q);
        let last = extrap(n - 1);
        let prev = extrap(n - 2);
        if (last - prev).abs() > 1e-6 {
            return Err(Error::DepthTooSmall((last - prev).abs()));
        }
        Ok(last)
    };
    let v_plus: Vec<f64> = layers_plus.iter().map(|l| l.y[0]).collect();
    let v_minus: Vec<f64> = layers_minus.iter().map(|l| *l.y.last().unwrap()).collect();
    let lambda_plus = richardson(&v_plus)?;
    let lambda_minus = richardson(&v_minus)?;

    Ok(StepSolution {
        tau,
        lambda,
        data: data.clone(),
        layers_minus,
        layers_plus,
        lambda_minus,
        lambda_plus,
        sup_norm_phi: data.sup_norm(),
    })
}

/// Sup bound for |alpha|, |beta|, |gamma| on `[-tau, tau]`, sampled.
pub fn coefficient_bound(form: &PantographForm, tau: f64) -> f64 {
    let mut k = 0.0_f64;
    for i in 0..=1000 {
        let t = -tau + 2.0 * tau * i as f64 / 1000.0;
        k = k
            .max(form.alpha.eval(t).abs())
            .max(form.beta.eval(t).abs())
            .max(form.gamma.eval(t).abs());
    }
    k
}

/// A-priori growth bound on the inner region: every computed sample must
/// satisfy `|y(t)| < (||phi|| + K tau/|lambda|) exp(2K (tau/|lambda| - |t|))`.
pub fn gronwall_check(solution: &StepSolution, k_bound: f64) -> bool {
    let q = 1.0 / solution.lambda.abs();
    let b1 = solution.tau * q;
    let base = solution.sup_norm_phi + k_bound * b1;
    for layer in solution.layers_minus.iter().chain(&solution.layers_plus) {
        let n = layer.y.len();
        for (j, y) in layer.y.iter().enumerate() {
            let t = layer.lo + (layer.hi - layer.lo) * j as f64 / (n - 1) as f64;
            let bound = base * (2.0 * k_bound * (b1 - t.abs())).exp();
            if y.abs() >= bound {
                return false;
            }
        }
    }
    true
}

/// A matched pair of constant data levels realizing `y(0) = y0` from both
/// sides, with the solution that achieves it.
#[derive(Debug, Clone)]
pub struct MatchResult {
    pub c_minus: f64,
    pub c_plus: f64,
    /// `|Lambda_- - y0| + |Lambda_+ - y0|` on the matched run.
    pub residual: f64,
    pub solution: StepSolution,
}

impl MatchResult {
    pub fn to_json(&self) -> String {
        let mut w = crate::report::JsonWriter::new();
        w.real("c_minus", self.c_minus)
            .real("c_plus", self.c_plus)
            .real("residual", self.residual)
            .real("lambda_minus", self.solution.lambda_minus)
            .real("lambda_plus", self.solution.lambda_plus);
        w.finish()
    }
}

fn limits(
    form: &PantographForm,
    tau: f64,
    c_minus: f64,
    c_plus: f64,
    depth: usize,
    steps: usize,
) -> Result<(f64, f64)> {
    let data = InitialData::constant(tau, c_minus, c_plus, 64)?;
    let sol = integrate_inward(form, &data, depth, steps)?;
    Ok((sol.lambda_minus, sol.lambda_plus))
}

/// Solves the 2x2 affine system `Lambda(c_minus, c_plus) = (y0, y0)` over
/// constant data levels. The four-corner quadrant test on the linear part is
/// the runtime surrogate for the smallness condition on `tau`: the corner
/// images `(+-u) + (+-v)` must land in the four distinct open quadrants.
pub fn match_initial(
    form: &PantographForm,
    tau: f64,
    y0: f64,
    depth: usize,
    steps: usize,
) -> Result<MatchResult> {
    let l00 = limits(form, tau, 0.0, 0.0, depth, steps)?;
    let l10 = limits(form, tau, 1.0, 0.0, depth, steps)?;
    let l01 = limits(form, tau, 0.0, 1.0, depth, steps)?;
    let u = (l10.0 - l00.0, l10.1 - l00.1);
    let v = (l01.0 - l00.0, l01.1 - l00.1);

    let mut quadrants = std::collections::BTreeSet::new();
    for (sm, sp) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
        let w = (sm * u.0 + sp * v.0, sm * u.1 + sp * v.1);
        if w.0 == 0.0 || w.1 == 0.0 {
            return Err(Error::QuadrantTestFailed(tau));
        }
        quadrants.insert((w.0 > 0.0, w.1 > 0.0));
    }
    if quadrants.len() != 4 {
        return Err(Error::QuadrantTestFailed(tau));
    }

    let det = u.0 * v.1 - u.1 * v.0;
    let scale = (u.0.abs() + u.1.abs()).max(v.0.abs() + v.1.abs()).max(1.0);
    if det.abs() <= 1e-10 * scale {
        return Err(Error::SingularMatching(det));
    }
    let rhs = (y0 - l00.0, y0 - l00.1);
    let c_minus = (rhs.0 * v.1 - rhs.1 * v.0) / det;
    let c_plus = (u.0 * rhs.1 - u.1 * rhs.0) / det;

    let data = InitialData::constant(tau, c_minus, c_plus, 64)?;
    let solution = integrate_inward(form, &data, depth, steps)?;
    let residual = (solution.lambda_minus - y0).abs() + (solution.lambda_plus - y0).abs();
    Ok(MatchResult { c_minus, c_plus, residual, solution })
}

/// One row of the jet cross-check at 0.
#[derive(Debug, Clone, Copy)]
pub struct JetComparison {
    pub n: usize,
    pub fd_coeff: f64,
    pub recursion_coeff: f64,
    pub gap: f64,
    /// Set when finite differencing has lost all significant digits.
    pub noise_floor: bool,
}

/// Compares one-sided finite-difference Taylor coefficients of the matched
/// solution against the recursion's coefficients. The smooth matched
/// solution shares the formal jet even when that jet diverges.
pub fn jet_comparison(
    solution: &StepSolution,
    form: &PantographForm,
    y0: f64,
    n_max: usize,
) -> Result<Vec<JetComparison>> {
    if n_max > 5 {
        return Err(Error::Invalid("jet comparison supports n <= 5".into()));
    }
    let recursion = taylor_coefficients(form, y0, n_max)?;
    let q = 1.0 / solution.lambda.abs();
    let mut rows = Vec::with_capacity(n_max + 1);
    rows.push(JetComparison {
        n: 0,
        fd_coeff: y0,
        recursion_coeff: recursion.coeff(0),
        gap: (y0 - recursion.coeff(0)).abs(),
        noise_floor: false,
    });
    let binom = |n: usize, i: usize| -> f64 {
        let mut c = 1.0;
        for j in 0..i {
            c = c * (n - j) as f64 / (j + 1) as f64;
        }
        c
    };
    for n in 1..=n_max {
        // forward stencil confined to the innermost region; a short Romberg
        // ladder cancels the O(h) and O(h^2) error terms, which is as deep as
        // the cascade's own accuracy supports before noise amplification wins
        let h0 = solution.tau * q / 50.0;
        let diff = |step: f64| -> f64 {
            let mut d = 0.0;
            for i in 0..=n {
                let yi = if i == 0 { y0 } else { solution.eval(i as f64 * step) };
                d += if (n - i) % 2 == 0 { 1.0 } else { -1.0 } * binom(n, i) * yi;
            }
            d / step.powi(n as i32)
        };
        let d: Vec<f64> = (0..4).map(|k| diff(h0 / 2f64.powi(k))).collect();
        let lvl1: Vec<f64> = (0..3).map(|i| 2.0 * d[i + 1] - d[i]).collect();
        let lvl2: Vec<f64> = (0..2).map(|i| (4.0 * lvl1[i + 1] - lvl1[i]) / 3.0).collect();
        let deriv = lvl2[1];
        let mut fact = 1.0;
        for j in 2..=n {
            fact *= j as f64;
        }
        let fd_coeff = deriv / fact;
        let smallest = h0 / 8.0;
        let stencil_scale = (0..=n)
            .map(|i| solution.eval(i as f64 * smallest).abs())
            .fold(y0.abs(), f64::max);
        let noise_floor =
            (diff(smallest) * smallest.powi(n as i32)).abs() <= 1e3 * f64::EPSILON * stencil_scale;
        rows.push(JetComparison {
            n,
            fd_coeff,
            recursion_coeff: recursion.coeff(n),
            gap: (fd_coeff - recursion.coeff(n)).abs(),
            noise_floor,
        });
    }
    Ok(rows)
}
