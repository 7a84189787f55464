//! Dynamics of the time-shift map `t -> eta(t)`.
//!
//! Fixed and periodic points of the shift decide everything downstream: a
//! contractive point forces local analyticity of solutions, an expansive one
//! generically destroys it. This module locates and classifies those points,
//! iterates orbits, estimates rotation numbers of periodic lifts, tests
//! basins of attraction, and propagates analyticity labels along orbits.

use crate::error::{Error, Result};
use crate::report::JsonWriter;
use crate::series::{cos_jet, sin_jet, TruncatedSeries};

/// Half-width of the band around `|multiplier| = 1` inside which a point is
/// classified Neutral. Downstream solvers refuse neutral points.
pub const NEUTRAL_BAND: f64 = 1e-9;

/// Default number of bracketing cells for fixed-point searches.
pub const DEFAULT_GRID: usize = 4096;

/// A time-shift map with an evaluator and derivative contract.
#[derive(Debug, Clone, PartialEq)]
pub enum ShiftMap {
    /// `eta(t) = t0 + lambda (t - t0)`.
    Affine { lambda: f64, t0: f64 },
    /// `eta(t) = t + (lambda - 1) sin t + offset`; `offset` a multiple of
    /// `2 pi` selects the branch of the periodic delay.
    SineShift { lambda: f64, offset: f64 },
    /// `eta(t) = t + advance + amplitude sin t`; a perturbed rigid rotation
    /// lift (`amplitude = 0` gives the rigid rotation `t + advance`).
    PerturbedRotation { advance: f64, amplitude: f64 },
    /// Polynomial map given by a Taylor jet.
    SeriesMap { jet: TruncatedSeries },
}

impl ShiftMap {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ShiftMap::Affine { lambda, t0 } => t0 + lambda * (t - t0),
            ShiftMap::SineShift { lambda, offset } => t + (lambda - 1.0) * t.sin() + offset,
            ShiftMap::PerturbedRotation { advance, amplitude } => {
                t + advance + amplitude * t.sin()
            }
            ShiftMap::SeriesMap { jet } => jet.eval(t),
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        match self {
            ShiftMap::Affine { lambda, .. } => *lambda,
            ShiftMap::SineShift { lambda, .. } => 1.0 + (lambda - 1.0) * t.cos(),
            ShiftMap::PerturbedRotation { amplitude, .. } => 1.0 + amplitude * t.cos(),
            ShiftMap::SeriesMap { jet } => jet.differentiate().eval(t),
        }
    }

    /// Taylor jet of `eta` about `center`, to the given order.
    pub fn taylor_jet(&self, center: f64, order: usize) -> TruncatedSeries {
        match self {
            ShiftMap::Affine { lambda, t0 } => {
                let mut coeffs = vec![0.0; order + 1];
                coeffs[0] = t0 + lambda * (center - t0);
                if order >= 1 {
                    coeffs[1] = *lambda;
                }
                TruncatedSeries::new(center, coeffs).expect("finite jet")
            }
            ShiftMap::SineShift { lambda, offset } => {
                let id = TruncatedSeries::identity(center, order);
                let sj = sin_jet(center, order).scale(lambda - 1.0);
                let mut s = TruncatedSeries::linear_combine(1.0, &id, 1.0, &sj)
                    .expect("same center");
                let mut coeffs = s.coeffs().to_vec();
                coeffs[0] += offset;
                s = TruncatedSeries::new(center, coeffs).expect("finite jet");
                s
            }
            ShiftMap::PerturbedRotation { advance, amplitude } => {
                let id = TruncatedSeries::identity(center, order);
                let sj = sin_jet(center, order).scale(*amplitude);
                let mut s =
                    TruncatedSeries::linear_combine(1.0, &id, 1.0, &sj).expect("same center");
                let mut coeffs = s.coeffs().to_vec();
                coeffs[0] += advance;
                s = TruncatedSeries::new(center, coeffs).expect("finite jet");
                s
            }
            ShiftMap::SeriesMap { jet } => taylor_shift(jet, center).truncated(order),
        }
    }

    /// Jet of the derivative `deta/dt` about `center`.
    pub fn deriv_jet(&self, center: f64, order: usize) -> TruncatedSeries {
        match self {
            ShiftMap::SineShift { lambda, .. } => {
                let one = TruncatedSeries::constant(center, 1.0, order);
                let cj = cos_jet(center, order).scale(lambda - 1.0);
                TruncatedSeries::linear_combine(1.0, &one, 1.0, &cj).expect("same center")
            }
            _ => self.taylor_jet(center, order + 1).differentiate(),
        }
    }

    /// `eta^n(t)` by repeated evaluation.
    pub fn iterate(&self, t: f64, n: usize) -> Result<f64> {
        let mut x = t;
        for _ in 0..n {
            x = self.eval(x);
            if !x.is_finite() {
                return Err(Error::DomainEscape(x));
            }
        }
        Ok(x)
    }

    fn iterate_with_deriv(&self, t: f64, n: usize) -> (f64, f64) {
        let mut x = t;
        let mut d = 1.0;
        for _ in 0..n {
            d *= self.deriv(x);
            x = self.eval(x);
        }
        (x, d)
    }
}

/// Recenters a polynomial jet via repeated synthetic division (Taylor shift).
fn taylor_shift(jet: &TruncatedSeries, center: f64) -> TruncatedSeries {
    let h = center - jet.center();
    let n = jet.order();
    let mut c = jet.coeffs().to_vec();
    // in-place Horner shift: after the loop c[k] holds the coefficient of
    // (t - center)^k
    for k in 0..n {
        for j in (k..n).rev() {
            let c_next = c[j + 1];
            c[j] += h * c_next;
        }
    }
    TruncatedSeries::new(center, c).expect("finite jet")
}

/// Classification of a fixed or periodic point by its multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointClass {
    Contractive,
    Expansive,
    Neutral,
}

impl PointClass {
    pub fn of_multiplier(m: f64) -> Self {
        if m.abs() < 1.0 - NEUTRAL_BAND {
            PointClass::Contractive
        } else if m.abs() > 1.0 + NEUTRAL_BAND {
            PointClass::Expansive
        } else {
            PointClass::Neutral
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            PointClass::Contractive => "Contractive",
            PointClass::Expansive => "Expansive",
            PointClass::Neutral => "Neutral",
        }
    }
}

/// A located fixed or periodic point of the shift map.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointRecord {
    pub t_star: f64,
    pub period_m: usize,
    /// `d/dt eta^M` at `t_star`, by the chain rule along the orbit.
    pub multiplier: f64,
    pub class: PointClass,
}

impl FixedPointRecord {
    pub fn to_json(&self) -> String {
        let mut w = JsonWriter::new();
        w.real("t_star", self.t_star)
            .uint("period_M", self.period_m as u64)
            .real("multiplier", self.multiplier)
            .string("class", self.class.as_str());
        w.finish()
    }
}

/// Locates all roots of `eta^M(t) - t` on `interval` by sign-change
/// bracketing on a uniform grid, refined by bisection with Newton polish.
pub fn find_fixed_points(
    map: &ShiftMap,
    interval: (f64, f64),
    period_m: usize,
    tol: f64,
) -> Result<Vec<FixedPointRecord>> {
    find_fixed_points_grid(map, interval, period_m, tol, DEFAULT_GRID)
}

/// As [`find_fixed_points`] with a caller-chosen bracketing grid density.
pub fn find_fixed_points_grid(
    map: &ShiftMap,
    interval: (f64, f64),
    period_m: usize,
    tol: f64,
    grid: usize,
) -> Result<Vec<FixedPointRecord>> {
    let (a, b) = interval;
    if !(b > a) || tol <= 0.0 || period_m == 0 || grid < 2 {
        return Err(Error::Invalid("bad fixed-point search parameters".into()));
    }
    let g = |t: f64| map.iterate(t, period_m).map(|x| x - t);
    let h = (b - a) / grid as f64;
    let mut roots: Vec<f64> = Vec::new();
    let mut prev_t = a;
    let mut prev_g = g(a)?;
    for i in 1..=grid {
        let t = a + i as f64 * h;
        let gt = g(t)?;
        if prev_g == 0.0 {
            push_root(&mut roots, prev_t, h);
        } else if prev_g * gt < 0.0 {
            let r = refine_root(map, period_m, prev_t, t, tol)?;
            push_root(&mut roots, r, h);
        }
        prev_t = t;
        prev_g = gt;
    }
    if prev_g == 0.0 {
        push_root(&mut roots, prev_t, h);
    }

    let mut records = Vec::with_capacity(roots.len());
    for r in roots {
        let (image, multiplier) = map.iterate_with_deriv(r, period_m);
        if (image - r).abs() > tol {
            return Err(Error::NoConvergence(r));
        }
        records.push(FixedPointRecord {
            t_star: r,
            period_m,
            multiplier,
            class: PointClass::of_multiplier(multiplier),
        });
    }
    Ok(records)
}

fn push_root(roots: &mut Vec<f64>, r: f64, h: f64) {
    if roots.iter().all(|&x| (x - r).abs() > 0.5 * h) {
        roots.push(r);
    }
}

/// Bisection to width 1e-8, then Newton polish; Newton steps that leave the
/// bracket are rejected, which keeps the refinement robust near neutral
/// multipliers.
fn refine_root(
    map: &ShiftMap,
    period_m: usize,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64> {
    let g = |t: f64| map.iterate(t, period_m).map(|x| x - t);
    let mut glo = g(lo)?;
    while hi - lo > 1e-8 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid)?;
        if gm == 0.0 {
            return Ok(mid);
        }
        if glo * gm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            glo = gm;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..50 {
        let gx = g(x)?;
        if gx.abs() <= tol {
            return Ok(x);
        }
        let (_, d) = map.iterate_with_deriv(x, period_m);
        let slope = d - 1.0;
        if slope == 0.0 {
            break;
        }
        let next = x - gx / slope;
        if next <= lo || next >= hi {
            break;
        }
        x = next;
    }
    if g(x)?.abs() <= tol {
        Ok(x)
    } else {
        Err(Error::NoConvergence(x))
    }
}

/// Rotation number estimate for a lift of a circle homeomorphism.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationEstimate {
    pub omega: f64,
    /// Birkhoff error bar `1 / n_iter`.
    pub error_bar: f64,
    pub n_iter: usize,
}

/// Estimates the rotation number `lim eta^n(t0) / (n p)`.
///
/// The map must satisfy `eta(t + p) = eta(t) + p` (checked by sampling) and
/// be nondecreasing on one period.
pub fn rotation_number(
    map: &ShiftMap,
    period_p: f64,
    t0: f64,
    n_iter: usize,
) -> Result<RotationEstimate> {
    if period_p <= 0.0 || n_iter < 100 {
        return Err(Error::Invalid("need period_p > 0 and n_iter >= 100".into()));
    }
    let samples = 256;
    for i in 0..samples {
        let t = t0 + period_p * i as f64 / samples as f64;
        let defect = map.eval(t + period_p) - map.eval(t) - period_p;
        if defect.abs() > 1e-10 * period_p.max(1.0) {
            return Err(Error::NotPeriodicLift { period: period_p, defect });
        }
        let d = map.deriv(t);
        if d < -1e-12 {
            return Err(Error::NotMonotone { t, deriv: d });
        }
    }
    let end = map.iterate(t0, n_iter)?;
    Ok(RotationEstimate {
        omega: (end - t0) / (n_iter as f64 * period_p),
        error_bar: 1.0 / n_iter as f64,
        n_iter,
    })
}

/// Tests whether `t` is captured by the basin of a contractive orbit.
///
/// `capture_radius` must lie inside the local contraction zone of the orbit;
/// this is verified by sampling `|d eta^M / dt|` on the capture ball.
pub fn basin_test(
    map: &ShiftMap,
    t: f64,
    record: &FixedPointRecord,
    max_iter: usize,
    capture_radius: f64,
) -> Result<bool> {
    if record.class != PointClass::Contractive {
        return Err(Error::Invalid(
            "basin_test needs a contractive fixed/periodic point".into(),
        ));
    }
    if capture_radius <= 0.0 {
        return Err(Error::Invalid("capture_radius must be positive".into()));
    }
    // orbit of the periodic point
    let mut orbit = Vec::with_capacity(record.period_m);
    let mut p = record.t_star;
    for _ in 0..record.period_m {
        orbit.push(p);
        p = map.eval(p);
    }
    // contraction on the capture ball, sampled
    for &o in &orbit {
        for i in 0..=32 {
            let s = o - capture_radius + 2.0 * capture_radius * i as f64 / 32.0;
            let (_, d) = map.iterate_with_deriv(s, record.period_m);
            if d.abs() >= 1.0 {
                return Err(Error::Invalid(format!(
                    "capture_radius {capture_radius} is outside the contraction zone at t = {s}"
                )));
            }
        }
    }
    let escape = 1e12_f64.max(1e6 * (record.t_star.abs() + 1.0));
    let mut x = t;
    for _ in 0..=max_iter {
        if orbit.iter().any(|&o| (x - o).abs() < capture_radius) {
            return Ok(true);
        }
        if x.abs() > escape {
            return Ok(false);
        }
        x = map.iterate(x, record.period_m)?;
    }
    Err(Error::InconclusiveBudget(max_iter))
}

/// Analyticity label carried along orbits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Analytic,
    Nonanalytic,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Analytic => "Analytic",
            Label::Nonanalytic => "Nonanalytic",
        }
    }
}

/// A labeled orbit point: `k` is the iterate index (negative for preimages).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledPoint {
    pub k: i64,
    pub t: f64,
    pub label: Label,
}

/// Propagates analyticity labels along forward orbits, and along backward
/// orbits too when the caller asserts the map is monotone (the set equality
/// that justifies backward propagation needs monotonicity).
///
/// The caller is responsible for the nondegeneracy hypotheses at each seed.
pub fn propagate_classification(
    map: &ShiftMap,
    seeds: &[(f64, Label)],
    n_steps: usize,
    monotone: bool,
) -> Result<Vec<LabeledPoint>> {
    let mut out = Vec::new();
    for &(t, label) in seeds {
        out.push(LabeledPoint { k: 0, t, label });
        let mut x = t;
        for k in 1..=n_steps {
            x = map.eval(x);
            if !x.is_finite() {
                return Err(Error::DomainEscape(x));
            }
            out.push(LabeledPoint { k: k as i64, t: x, label });
        }
        if monotone {
            let mut y = t;
            for k in 1..=n_steps {
                y = preimage(map, y)?;
                out.push(LabeledPoint { k: -(k as i64), t: y, label });
            }
        }
    }
    Ok(out)
}

/// Solves `eta(s) = t` for a monotone map by expanding a bracket and bisecting.
fn preimage(map: &ShiftMap, t: f64) -> Result<f64> {
    let mut w = 1.0 + t.abs();
    let (mut lo, mut hi) = (t - w, t + w);
    for _ in 0..64 {
        if (map.eval(lo) - t) <= 0.0 && (map.eval(hi) - t) >= 0.0 {
            break;
        }
        w *= 2.0;
        lo = t - w;
        hi = t + w;
        if !w.is_finite() {
            return Err(Error::DomainEscape(t));
        }
    }
    if (map.eval(lo) - t) > 0.0 || (map.eval(hi) - t) < 0.0 {
        return Err(Error::DomainEscape(t));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if map.eval(mid) - t <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * (1.0 + t.abs()) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Renders a labeled orbit as CSV `k,t,label`.
pub fn orbit_to_csv(points: &[LabeledPoint]) -> String {
    let mut out = String::from("k,t,label\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{}\n",
            p.k,
            crate::report::fmt_f64(p.t),
            p.label.as_str()
        ));
    }
    out
}
