//! Nondegeneracy polynomials and their sampled nonvanishing check.
//!
//! `build_pn(n)` constructs the exact integer-coefficient polynomial that
//! expresses the (n+1)-st derivative of a scalar ODE solution in terms of
//! the mixed partials of the right-hand side. `evaluate_qn` differentiates
//! that expression through the delayed argument, giving the functions whose
//! nonvanishing is the checkable hypothesis for pushing analyticity forward
//! along orbits.
//!
//! Negative results from the sampled check are inconclusive: nonvanishing is
//! a statement about a neighborhood, and sampling cannot certify a zero.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};

/// Default cap on `n` for `build_pn`; term count grows quickly.
pub const DEFAULT_CAP: usize = 8;

/// A monomial in the variables `z_{i,j}`: sorted map from the variable index
/// to its exponent. The empty map is the constant monomial.
pub type Monomial = BTreeMap<(u32, u32), u32>;

/// Exact integer-coefficient polynomial in the variables `z_{i,j}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexedPolynomial {
    /// Declared index `n`: every variable satisfies `i + j <= n`.
    pub n: usize,
    terms: BTreeMap<Monomial, i64>,
}

impl IndexedPolynomial {
    fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    fn variable(n: usize, i: u32, j: u32) -> Self {
        let mut m = Monomial::new();
        m.insert((i, j), 1);
        let mut terms = BTreeMap::new();
        terms.insert(m, 1);
        Self { n, terms }
    }

    fn add_term(&mut self, m: Monomial, c: i64) {
        if c == 0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if *e.get() == 0 {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    fn add(&mut self, other: &Self) {
        for (m, &c) in &other.terms {
            self.add_term(m.clone(), c);
        }
    }

    fn mul(&self, other: &Self, n: usize) -> Self {
        let mut out = Self::zero(n);
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                let mut m = ma.clone();
                for (&v, &e) in mb {
                    *m.entry(v).or_insert(0) += e;
                }
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    /// Partial derivative with respect to `z_{i,j}`.
    pub fn partial(&self, i: u32, j: u32) -> Self {
        let mut out = Self::zero(self.n);
        for (m, &c) in &self.terms {
            if let Some(&e) = m.get(&(i, j)) {
                let mut dm = m.clone();
                if e == 1 {
                    dm.remove(&(i, j));
                } else {
                    dm.insert((i, j), e - 1);
                }
                out.add_term(dm, c * e as i64);
            }
        }
        out
    }

    /// Variables actually appearing in the polynomial.
    pub fn variables(&self) -> Vec<(u32, u32)> {
        let mut vars: Vec<(u32, u32)> = self
            .terms
            .keys()
            .flat_map(|m| m.keys().copied())
            .collect();
        vars.sort_unstable();
        vars.dedup();
        vars
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Evaluates with `z_{i,j}` taken from the supplied table.
    pub fn eval(&self, value: &dyn Fn(u32, u32) -> Result<f64>) -> Result<f64> {
        let mut sum = 0.0;
        for (m, &c) in &self.terms {
            let mut prod = c as f64;
            for (&(i, j), &e) in m {
                prod *= value(i, j)?.powi(e as i32);
            }
            sum += prod;
        }
        Ok(sum)
    }

    /// Renders the polynomial in the `z{i}{j}` notation, terms ordered by
    /// total degree then index, e.g. `z10 + z00*z01` for `n = 1`.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut entries: Vec<(&Monomial, i64)> =
            self.terms.iter().map(|(m, &c)| (m, c)).collect();
        entries.sort_by_key(|(m, _)| {
            let degree: u32 = m.values().sum();
            (degree, (*m).clone())
        });
        let mut out = String::new();
        for (idx, (m, c)) in entries.iter().enumerate() {
            if idx > 0 {
                out.push_str(" + ");
            }
            let mut factors = Vec::new();
            if *c != 1 || m.is_empty() {
                factors.push(c.to_string());
            }
            for (&(i, j), &e) in m.iter() {
                let mut f = format!("z{i}{j}");
                if e > 1 {
                    let _ = write!(f, "^{e}");
                }
                factors.push(f);
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

/// Builds the n-th derivative polynomial by the inductive substitution rule
/// `P_n = sum over k+m <= n-1 of (dP_{n-1}/dz_{k,m}) (z_{k+1,m} + z_{0,0} z_{k,m+1})`,
/// starting from `P_0 = z_{0,0}`. Results are memoized.
pub fn build_pn(n: usize) -> Result<IndexedPolynomial> {
    build_pn_capped(n, DEFAULT_CAP)
}

pub fn build_pn_capped(n: usize, cap: usize) -> Result<IndexedPolynomial> {
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    static CACHE: OnceLock<Mutex<Vec<IndexedPolynomial>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(vec![IndexedPolynomial::variable(0, 0, 0)]));
    let mut guard = cache.lock().expect("pn cache poisoned");
    while guard.len() <= n {
        let prev = guard.last().expect("cache seeded with P_0").clone();
        let next_n = guard.len();
        let mut next = IndexedPolynomial::zero(next_n);
        for k in 0..next_n as u32 {
            for m in 0..next_n as u32 {
                if k + m > next_n as u32 - 1 {
                    continue;
                }
                let d = prev.partial(k, m);
                if d.term_count() == 0 {
                    continue;
                }
                let mut shift = IndexedPolynomial::variable(next_n, k + 1, m);
                let z00 = IndexedPolynomial::variable(next_n, 0, 0);
                let zk = IndexedPolynomial::variable(next_n, k, m + 1);
                shift.add(&z00.mul(&zk, next_n));
                let mut dn = d.clone();
                dn.n = next_n;
                next.add(&dn.mul(&shift, next_n));
            }
        }
        guard.push(next);
    }
    Ok(guard[n].clone())
}

/// Oracle for the mixed partials of `f(t, x, v)` at a base point `(t0, x0)`,
/// as functions of the delayed argument `v`.
pub trait PartialsOracle {
    /// `D_t^i D_x^j f(t0, x0, v)`, or `None` when unavailable.
    fn partial(&self, i: usize, j: usize, v: f64) -> Option<f64>;
    /// `D_v D_t^i D_x^j f(t0, x0, v)`, or `None` when unavailable.
    fn partial_dv(&self, i: usize, j: usize, v: f64) -> Option<f64>;
}

/// Oracle backed by a pair of closures.
pub struct FnOracle<F, G>
where
    F: Fn(usize, usize, f64) -> Option<f64>,
    G: Fn(usize, usize, f64) -> Option<f64>,
{
    pub partial: F,
    pub partial_dv: G,
}

impl<F, G> PartialsOracle for FnOracle<F, G>
where
    F: Fn(usize, usize, f64) -> Option<f64>,
    G: Fn(usize, usize, f64) -> Option<f64>,
{
    fn partial(&self, i: usize, j: usize, v: f64) -> Option<f64> {
        (self.partial)(i, j, v)
    }
    fn partial_dv(&self, i: usize, j: usize, v: f64) -> Option<f64> {
        (self.partial_dv)(i, j, v)
    }
}

/// Evaluates `Q_n(v) = D_v P_n({D_t^i D_x^j f(t0, x0, v)})` by the chain
/// rule through the substitution.
pub fn evaluate_qn(oracle: &dyn PartialsOracle, v: f64, n: usize) -> Result<f64> {
    let pn = build_pn(n)?;
    let value = |i: u32, j: u32| -> Result<f64> {
        oracle
            .partial(i as usize, j as usize, v)
            .ok_or(Error::OracleGap(i as usize, j as usize))
    };
    let mut q = 0.0;
    for (i, j) in pn.variables() {
        let coeff = pn.partial(i, j).eval(&value)?;
        let dv = oracle
            .partial_dv(i as usize, j as usize, v)
            .ok_or(Error::OracleGap(i as usize, j as usize))?;
        q += coeff * dv;
    }
    Ok(q)
}

/// Result of the sampled hypothesis check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisCheck {
    pub holds: bool,
    /// `(n, v)` at which some `Q_n(v)` exceeded the threshold.
    pub witness: Option<(usize, f64)>,
}

/// Samples `Q_n(v)` over `v_samples` for `n <= n_max` and reports the first
/// witness above `1e-10` in absolute value. A negative result is only a
/// sampled negative, never a certificate.
pub fn check_theorem34_hypothesis(
    oracle: &dyn PartialsOracle,
    v_samples: &[f64],
    n_max: usize,
) -> Result<HypothesisCheck> {
    if v_samples.is_empty() {
        return Err(Error::Invalid("v_samples must be nonempty".into()));
    }
    for n in 0..=n_max {
        for &v in v_samples {
            if evaluate_qn(oracle, v, n)?.abs() > 1e-10 {
                return Ok(HypothesisCheck { holds: true, witness: Some((n, v)) });
            }
        }
    }
    Ok(HypothesisCheck { holds: false, witness: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly_eq(a: &IndexedPolynomial, b: &IndexedPolynomial) -> bool {
        a.terms == b.terms
    }

    #[test]
    fn p0_p1_p2_match_displayed_forms() {
        assert_eq!(build_pn(0).unwrap().render(), "z00");
        assert_eq!(build_pn(1).unwrap().render(), "z10 + z00*z01");
        // z20 + z00 z11 + (z10 + z00 z01) z01 + z00 (z11 + z00 z02), expanded
        let p2 = build_pn(2).unwrap();
        let mut expect = IndexedPolynomial::zero(2);
        let var = |i, j| IndexedPolynomial::variable(2, i, j);
        expect.add(&var(2, 0));
        expect.add(&var(0, 0).mul(&var(1, 1), 2));
        let mut inner = var(1, 0);
        inner.add(&var(0, 0).mul(&var(0, 1), 2));
        expect.add(&inner.mul(&var(0, 1), 2));
        let mut inner2 = var(1, 1);
        inner2.add(&var(0, 0).mul(&var(0, 2), 2));
        expect.add(&var(0, 0).mul(&inner2, 2));
        assert!(poly_eq(&p2, &expect), "P2 = {}", p2.render());
    }

    #[test]
    fn recursion_reproduced_independently() {
        // re-derive P_3 from P_2 with an independent implementation of the rule
        let p2 = build_pn(2).unwrap();
        let p3 = build_pn(3).unwrap();
        let mut rebuilt = IndexedPolynomial::zero(3);
        for (k, m) in p2.variables() {
            let d = p2.partial(k, m);
            let mut factor = IndexedPolynomial::variable(3, k + 1, m);
            factor.add(&IndexedPolynomial::variable(3, 0, 0)
                .mul(&IndexedPolynomial::variable(3, k, m + 1), 3));
            let mut dn = d.clone();
            dn.n = 3;
            rebuilt.add(&dn.mul(&factor, 3));
        }
        assert!(poly_eq(&p3, &rebuilt));
    }

    #[test]
    fn cap_enforced() {
        assert!(matches!(build_pn_capped(9, 8), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn substitution_reproduces_ode_derivatives() {
        // f(t, x) = x: x^(n+1)(t0) = x0 since P_n collapses to the z00 chain
        let x0 = 0.7;
        let value_fx = |i: u32, j: u32| -> Result<f64> {
            Ok(match (i, j) {
                (0, 0) => x0,
                (0, 1) => 1.0,
                _ => 0.0,
            })
        };
        for n in 0..=3 {
            let pn = build_pn(n).unwrap();
            assert!((pn.eval(&value_fx).unwrap() - x0).abs() < 1e-15, "n = {n}");
        }
        // f(t, x) = t at t0 = 0: second derivative 1, higher derivatives 0
        let value_ft = |i: u32, j: u32| -> Result<f64> {
            Ok(match (i, j) {
                (0, 0) => 0.0,
                (1, 0) => 1.0,
                _ => 0.0,
            })
        };
        assert_eq!(build_pn(1).unwrap().eval(&value_ft).unwrap(), 1.0);
        for n in [2usize, 3] {
            assert_eq!(build_pn(n).unwrap().eval(&value_ft).unwrap(), 0.0, "n = {n}");
        }
    }

    struct AdditiveLinear;
    // f(t, u, v) = u + v
    impl PartialsOracle for AdditiveLinear {
        fn partial(&self, i: usize, j: usize, v: f64) -> Option<f64> {
            Some(match (i, j) {
                (0, 0) => v, // x0 = 0 base point: f = x0 + v
                (0, 1) => 1.0,
                _ => 0.0,
            })
        }
        fn partial_dv(&self, i: usize, j: usize, _v: f64) -> Option<f64> {
            Some(if (i, j) == (0, 0) { 1.0 } else { 0.0 })
        }
    }

    #[test]
    fn q0_is_dv_f() {
        let q0 = evaluate_qn(&AdditiveLinear, 0.3, 0).unwrap();
        assert_eq!(q0, 1.0);

        // f = v^2: Q0 = 2v
        let sq = FnOracle {
            partial: |i, j, v: f64| {
                Some(if (i, j) == (0, 0) { v * v } else { 0.0 })
            },
            partial_dv: |i, j, v: f64| {
                Some(if (i, j) == (0, 0) { 2.0 * v } else { 0.0 })
            },
        };
        assert_eq!(evaluate_qn(&sq, 1.5, 0).unwrap(), 3.0);
    }

    #[test]
    fn f_independent_of_v_gives_zero_qn() {
        let indep = FnOracle {
            partial: |i, j, _v| {
                Some(match (i, j) {
                    (0, 0) => 2.0,
                    (0, 1) => 0.5,
                    (1, 0) => -1.0,
                    _ => 0.0,
                })
            },
            partial_dv: |_i, _j, _v| Some(0.0),
        };
        for n in 0..=3 {
            assert_eq!(evaluate_qn(&indep, 0.4, n).unwrap(), 0.0);
        }
        let check = check_theorem34_hypothesis(&indep, &[0.0, 1.0], 3).unwrap();
        assert!(!check.holds);
        assert!(check.witness.is_none());
    }

    #[test]
    fn cubic_dependence_needs_the_right_sample() {
        // f = u + v^3: Q0(v) = 3 v^2 vanishes at the sample v = 0 only
        let cubic = FnOracle {
            partial: |i, j, v: f64| {
                Some(match (i, j) {
                    (0, 0) => v * v * v,
                    (0, 1) => 1.0,
                    _ => 0.0,
                })
            },
            partial_dv: |i, j, v: f64| {
                Some(if (i, j) == (0, 0) { 3.0 * v * v } else { 0.0 })
            },
        };
        let at_zero = check_theorem34_hypothesis(&cubic, &[0.0], 0).unwrap();
        assert!(!at_zero.holds);
        let at_one = check_theorem34_hypothesis(&cubic, &[1.0], 0).unwrap();
        assert!(at_one.holds);
        assert_eq!(at_one.witness, Some((0, 1.0)));
        assert_eq!(evaluate_qn(&cubic, 1.0, 0).unwrap(), 3.0);
    }

    #[test]
    fn affine_delay_term_enters_linearly() {
        // f = f0(t, u) + c v with f0 = u: Q0 = c, and Q_n scales linearly in c
        let oracle = |c: f64| FnOracle {
            partial: move |i, j, v: f64| {
                Some(match (i, j) {
                    (0, 0) => c * v, // base point x0 = 0
                    (0, 1) => 1.0,
                    _ => 0.0,
                })
            },
            partial_dv: move |i, j, _v| Some(if (i, j) == (0, 0) { c } else { 0.0 }),
        };
        for n in 0..=2 {
            let q1 = evaluate_qn(&oracle(1.0), 0.2, n).unwrap();
            let q2 = evaluate_qn(&oracle(2.0), 0.2, n).unwrap();
            let q3 = evaluate_qn(&oracle(3.0), 0.2, n).unwrap();
            assert!((q3 - (q1 + q2)).abs() < 1e-12, "n = {n}: {q1} {q2} {q3}");
        }
        assert_eq!(evaluate_qn(&oracle(2.5), 0.0, 0).unwrap(), 2.5);
    }

    #[test]
    fn oracle_gap_reported() {
        let gappy = FnOracle {
            partial: |i, j, _v| if (i, j) == (0, 0) { Some(1.0) } else { None },
            partial_dv: |_i, _j, _v| Some(1.0),
        };
        assert!(matches!(evaluate_qn(&gappy, 0.0, 1), Err(Error::OracleGap(..))));
    }
}
