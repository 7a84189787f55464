//! Truncated power-series arithmetic.
//!
//! A [`TruncatedSeries`] is a finite Taylor jet of an analytic function at a
//! center point. It is the currency every other module trades in: shift maps
//! hand out jets of `eta`, the Koenigs solver returns the conjugacy as a jet,
//! and the coefficient recursions consume and produce jets.
//!
//! Operations never extrapolate beyond the shorter of their operands' orders.

use crate::error::{Error, Result};

const CENTER_TOL: f64 = 1e-14;

/// Finite Taylor jet `a_0 + a_1 (t - c) + ... + a_N (t - c)^N` at center `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    center: f64,
    coeffs: Vec<f64>,
}

impl TruncatedSeries {
    /// Builds a jet from its coefficients. All coefficients must be finite.
    pub fn new(center: f64, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Invalid("series needs at least one coefficient".into()));
        }
        if !center.is_finite() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Invalid("series coefficients must be finite".into()));
        }
        Ok(Self { center, coeffs })
    }

    /// Constant jet of the given order (all higher coefficients zero).
    pub fn constant(center: f64, value: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        Self { center, coeffs }
    }

    /// The identity jet `t` expanded about `center`, to the given order.
    pub fn identity(center: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = center;
        if order >= 1 {
            coeffs[1] = 1.0;
        }
        Self { center, coeffs }
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> f64 {
        self.coeffs.get(n).copied().unwrap_or(0.0)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Same coefficients, relabeled center. Used when a change of variables
    /// moves the expansion point without touching the coefficients.
    pub fn with_center(&self, center: f64) -> Self {
        Self { center, coeffs: self.coeffs.clone() }
    }

    /// Truncates to the given order (no-op if already shorter).
    pub fn truncated(&self, order: usize) -> Self {
        let n = (order + 1).min(self.coeffs.len());
        Self { center: self.center, coeffs: self.coeffs[..n].to_vec() }
    }

    /// Horner evaluation at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        let s = t - self.center;
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    fn check_center(&self, other: &Self) -> Result<()> {
        if (self.center - other.center).abs() > CENTER_TOL {
            return Err(Error::CenterMismatch(self.center, other.center));
        }
        Ok(())
    }

    /// Coefficientwise `c1 * s1 + c2 * s2`, truncated at the shorter order.
    pub fn linear_combine(c1: f64, s1: &Self, c2: f64, s2: &Self) -> Result<Self> {
        s1.check_center(s2)?;
        let n = s1.coeffs.len().min(s2.coeffs.len());
        let coeffs = (0..n).map(|k| c1 * s1.coeffs[k] + c2 * s2.coeffs[k]).collect();
        Self::new(s1.center, coeffs)
    }

    /// Cauchy product truncated at the shorter order.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_center(other)?;
        let n = self.coeffs.len().min(other.coeffs.len());
        let mut coeffs = vec![0.0; n];
        for k in 0..n {
            for i in 0..=k {
                coeffs[k] += self.coeffs[i] * other.coeffs[k - i];
            }
        }
        Self::new(self.center, coeffs)
    }

    /// Scalar multiple.
    pub fn scale(&self, c: f64) -> Self {
        Self {
            center: self.center,
            coeffs: self.coeffs.iter().map(|a| c * a).collect(),
        }
    }

    /// Jet of `self(other(t))`, centered at `other`'s center.
    ///
    /// Requires `other`'s value at its center to equal `self`'s center, since
    /// a truncated outer jet only represents the function near its center.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        let scale = 1.0_f64.max(self.center.abs());
        if (inner.coeffs[0] - self.center).abs() > 1e-12 * scale {
            return Err(Error::CompositionMismatch {
                inner_value: inner.coeffs[0],
                outer_center: self.center,
            });
        }
        let order = self.order().min(inner.order());
        // Deviation of the inner jet from the outer center; its constant term
        // is below tolerance and keeps Horner exact through the truncation.
        let mut dev = inner.truncated(order);
        dev.coeffs[0] -= self.center;
        let outer = self.truncated(order);

        let mut acc = TruncatedSeries::constant(inner.center, 0.0, order);
        for &c in outer.coeffs.iter().rev() {
            acc = acc.mul(&dev)?;
            acc.coeffs[0] += c;
        }
        Ok(acc)
    }

    /// Term-by-term derivative; the order drops by one.
    pub fn differentiate(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::constant(self.center, 0.0, 0);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, &a)| n as f64 * a)
            .collect();
        Self { center: self.center, coeffs }
    }

    /// Root-test estimate of the radius of convergence.
    ///
    /// The limsup estimate is the largest `|a_n|^(1/n)` over the last
    /// `window` indices, skipping zero coefficients (lacunary series leave
    /// gaps that would otherwise read as infinite radius). The radius is its
    /// reciprocal, `+inf` when every sampled coefficient vanishes.
    pub fn radius_estimate(&self, window: usize) -> Result<RadiusEstimate> {
        if window < 8 {
            return Err(Error::WindowTooSmall(window));
        }
        if window > self.order() {
            return Err(Error::WindowTooLarge { window, order: self.order() });
        }
        let hi = self.order();
        let lo = hi + 1 - window;
        let mut limsup = 0.0_f64;
        let mut seen = false;
        for n in lo..=hi {
            let a = self.coeffs[n].abs();
            if a == 0.0 {
                continue;
            }
            seen = true;
            limsup = limsup.max(a.powf(1.0 / n as f64));
        }
        let radius = if !seen || limsup == 0.0 { f64::INFINITY } else { 1.0 / limsup };
        Ok(RadiusEstimate { limsup_estimate: limsup, radius_estimate: radius })
    }

    /// Writes the series as CSV `n,coeff` with full round-trip precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,coeff\n");
        for (n, c) in self.coeffs.iter().enumerate() {
            out.push_str(&format!("{},{}\n", n, crate::report::fmt_f64(*c)));
        }
        out
    }

    /// Parses the CSV produced by [`to_csv`](Self::to_csv); the center is not
    /// part of the format and must be supplied.
    pub fn from_csv(center: f64, csv: &str) -> Result<Self> {
        let mut coeffs = Vec::new();
        for (i, line) in csv.lines().enumerate() {
            if i == 0 {
                if line.trim() != "n,coeff" {
                    return Err(Error::Invalid(format!("bad series CSV header: {line}")));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.splitn(2, ',');
            let n: usize = parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Invalid(format!("bad series CSV row: {line}")))?;
            let c: f64 = parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Invalid(format!("bad series CSV row: {line}")))?;
            if n != coeffs.len() {
                return Err(Error::Invalid(format!("series CSV rows out of order at n = {n}")));
            }
            coeffs.push(c);
        }
        Self::new(center, coeffs)
    }
}

/// Output of [`TruncatedSeries::radius_estimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusEstimate {
    pub limsup_estimate: f64,
    pub radius_estimate: f64,
}

/// Jet of `sin` about `center` to the given order.
pub fn sin_jet(center: f64, order: usize) -> TruncatedSeries {
    let (s, c) = center.sin_cos();
    cycle_jet([s, c, -s, -c], center, order)
}

/// Jet of `cos` about `center` to the given order.
pub fn cos_jet(center: f64, order: usize) -> TruncatedSeries {
    let (s, c) = center.sin_cos();
    cycle_jet([c, -s, -c, s], center, order)
}

/// Jet of `exp` about `center`.
pub fn exp_jet(center: f64, order: usize) -> TruncatedSeries {
    let e = center.exp();
    let mut coeffs = vec![0.0; order + 1];
    let mut fact = 1.0;
    for (n, c) in coeffs.iter_mut().enumerate() {
        if n > 0 {
            fact *= n as f64;
        }
        *c = e / fact;
    }
    TruncatedSeries { center, coeffs }
}

fn cycle_jet(derivs: [f64; 4], center: f64, order: usize) -> TruncatedSeries {
    let mut coeffs = vec![0.0; order + 1];
    let mut fact = 1.0;
    for (n, c) in coeffs.iter_mut().enumerate() {
        if n > 0 {
            fact *= n as f64;
        }
        *c = derivs[n % 4] / fact;
    }
    TruncatedSeries { center, coeffs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(center: f64, coeffs: &[f64]) -> TruncatedSeries {
        TruncatedSeries::new(center, coeffs.to_vec()).unwrap()
    }

    #[test]
    fn linear_combine_cancellation() {
        let a = s(0.0, &[1.0, 1.0]);
        let b = s(0.0, &[1.0, -1.0]);
        let r = TruncatedSeries::linear_combine(1.0, &a, 1.0, &b).unwrap();
        assert_eq!(r.coeffs(), &[2.0, 0.0]);
    }

    #[test]
    fn linear_combine_zero_and_identity() {
        let a = s(0.0, &[1.0, 2.0, 3.0]);
        let z = TruncatedSeries::linear_combine(0.0, &a, 0.0, &a).unwrap();
        assert!(z.coeffs().iter().all(|&c| c == 0.0));
        let r = TruncatedSeries::linear_combine(2.0, &a, -1.0, &a).unwrap();
        assert_eq!(r.coeffs(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn linear_combine_center_mismatch() {
        let a = s(0.0, &[1.0]);
        let b = s(1.0, &[1.0]);
        assert!(matches!(
            TruncatedSeries::linear_combine(1.0, &a, 1.0, &b),
            Err(Error::CenterMismatch(..))
        ));
    }

    #[test]
    fn mul_basic() {
        let a = s(0.0, &[1.0, 1.0, 0.0]);
        let b = s(0.0, &[1.0, -1.0, 0.0]);
        assert_eq!(a.mul(&b).unwrap().coeffs(), &[1.0, 0.0, -1.0]);

        let one = TruncatedSeries::constant(0.0, 1.0, 2);
        let c = s(0.0, &[2.0, 3.0, 4.0]);
        assert_eq!(c.mul(&one).unwrap().coeffs(), c.coeffs());

        // hand convolution of (1 + t + t^2)^2 at order 2
        let p = s(0.0, &[1.0, 1.0, 1.0]);
        assert_eq!(p.mul(&p).unwrap().coeffs(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn compose_scaling_law() {
        let e = exp_jet(0.0, 8);
        let inner = s(0.0, &[0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let r = e.compose(&inner).unwrap();
        let mut fact = 1.0;
        for n in 0..=8usize {
            if n > 0 {
                fact *= n as f64;
            }
            let expect = 2.0_f64.powi(n as i32) / fact;
            assert!((r.coeff(n) - expect).abs() <= 1e-12 * expect.abs().max(1.0));
        }
    }

    #[test]
    fn compose_identity() {
        let a = s(0.0, &[0.0, 1.5, -0.25, 3.0]);
        let id = TruncatedSeries::identity(0.0, 3);
        assert_eq!(a.compose(&id).unwrap().coeffs(), a.coeffs());
    }

    #[test]
    fn compose_sin_with_shifted_inner() {
        // sin(t + t^2) = t + t^2 - t^3/6 + O(t^4)
        let sj = sin_jet(0.0, 3);
        let inner = s(0.0, &[0.0, 1.0, 1.0, 0.0]);
        let r = sj.compose(&inner).unwrap();
        let expect = [0.0, 1.0, 1.0, -1.0 / 6.0];
        for (n, e) in expect.iter().enumerate() {
            assert!((r.coeff(n) - e).abs() < 1e-14, "n={n}: {} vs {e}", r.coeff(n));
        }
    }

    #[test]
    fn compose_mismatch() {
        let a = s(1.0, &[1.0, 1.0]);
        let inner = s(0.0, &[0.0, 1.0]);
        assert!(matches!(a.compose(&inner), Err(Error::CompositionMismatch { .. })));
    }

    #[test]
    fn differentiate_basic() {
        assert_eq!(s(0.0, &[1.0, 1.0, 1.0]).differentiate().coeffs(), &[1.0, 2.0]);
        assert_eq!(s(0.0, &[5.0]).differentiate().coeffs(), &[0.0]);
        // exp jet is a fixed point of d/dt up to the order drop
        let e = exp_jet(0.0, 6);
        let d = e.differentiate();
        for n in 0..=5usize {
            assert!((d.coeff(n) - e.coeff(n)).abs() < 1e-15);
        }
    }

    #[test]
    fn radius_geometric() {
        let coeffs: Vec<f64> = (0..=64).map(|n| 3.0_f64.powi(-n)).collect();
        let a = TruncatedSeries::new(0.0, coeffs).unwrap();
        let r = a.radius_estimate(16).unwrap();
        assert!((r.radius_estimate - 3.0).abs() / 3.0 < 0.05);
    }

    #[test]
    fn radius_polynomial_is_infinite() {
        let mut coeffs = vec![0.0; 65];
        coeffs[0] = 1.0;
        coeffs[3] = -2.0;
        let a = TruncatedSeries::new(0.0, coeffs).unwrap();
        let r = a.radius_estimate(16).unwrap();
        assert_eq!(r.radius_estimate, f64::INFINITY);
    }

    #[test]
    fn radius_supergeometric_growth() {
        // a_n = lambda^(n(n-1)/2) / n! with lambda = 2: limsup estimate grows
        // with the sampled order, so the estimated radius shrinks toward zero.
        let lam: f64 = 2.0;
        let estimate_at = |order: usize| {
            let mut coeffs = vec![0.0; order + 1];
            let mut log_c = 0.0;
            for (n, c) in coeffs.iter_mut().enumerate() {
                if n > 0 {
                    log_c += (n as f64 - 1.0) * lam.ln() - (n as f64).ln();
                }
                *c = log_c.exp().min(1e290);
            }
            let s = TruncatedSeries::new(0.0, coeffs).unwrap();
            s.radius_estimate(8).unwrap().limsup_estimate
        };
        let a = estimate_at(32);
        let b = estimate_at(64);
        assert!(b > 2.0 * a, "limsup should grow without bound: {a} vs {b}");
    }

    #[test]
    fn radius_window_errors() {
        let a = TruncatedSeries::constant(0.0, 1.0, 10);
        assert!(matches!(a.radius_estimate(4), Err(Error::WindowTooSmall(4))));
        assert!(matches!(a.radius_estimate(11), Err(Error::WindowTooLarge { .. })));
    }

    #[test]
    fn csv_round_trip() {
        let a = s(0.5, &[1.0, -1.0 / 3.0, 2.0e-17, 4.0]);
        let b = TruncatedSeries::from_csv(0.5, &a.to_csv()).unwrap();
        assert_eq!(a, b);
    }

    fn small_series() -> impl Strategy<Value = TruncatedSeries> {
        proptest::collection::vec(-2.0..2.0f64, 4..9)
            .prop_map(|c| TruncatedSeries::new(0.0, c).unwrap())
    }

    proptest! {
        #[test]
        fn mul_commutes(a in small_series(), b in small_series()) {
            let ab = a.mul(&b).unwrap();
            let ba = b.mul(&a).unwrap();
            for k in 0..=ab.order() {
                let scale = 1.0_f64.max(ab.coeff(k).abs());
                prop_assert!((ab.coeff(k) - ba.coeff(k)).abs() <= 1e-13 * scale);
            }
        }

        #[test]
        fn product_rule(a in small_series(), b in small_series()) {
            let lhs = a.mul(&b).unwrap().differentiate();
            let rhs = TruncatedSeries::linear_combine(
                1.0, &a.differentiate().mul(&b).unwrap(),
                1.0, &a.mul(&b.differentiate()).unwrap(),
            ).unwrap();
            let n = lhs.order().min(rhs.order());
            for k in 0..=n {
                let scale = 1.0_f64.max(lhs.coeff(k).abs());
                prop_assert!((lhs.coeff(k) - rhs.coeff(k)).abs() <= 1e-12 * scale);
            }
        }

        #[test]
        fn compose_associates(a in small_series(), mut b in small_series(), mut c in small_series()) {
            // force zero constant terms so the composition chain is well posed
            b.coeffs[0] = 0.0;
            c.coeffs[0] = 0.0;
            let mut a0 = a;
            a0.center = 0.0;
            let lhs = a0.compose(&b).unwrap().compose(&c).unwrap();
            let rhs = a0.compose(&b.compose(&c).unwrap()).unwrap();
            let n = lhs.order().min(rhs.order());
            for k in 0..=n {
                let scale = 1.0_f64.max(lhs.coeff(k).abs());
                prop_assert!((lhs.coeff(k) - rhs.coeff(k)).abs() <= 1e-10 * scale,
                    "k={}: {} vs {}", k, lhs.coeff(k), rhs.coeff(k));
            }
        }
    }
}
