//! Classify the fixed point of `y'(t) = a0 y(t) + b0 y(lambda t)` at 0.
//!
//! With an expansive multiplier the rescaled sequence decides the question:
//! a limit away from zero rules out any analytic solution through y0.

use shiftlab::pantograph::{classify_point, ClassifyConfig, LocalLinearDDE, Verdict};
use shiftlab::{ShiftMap, TruncatedSeries};

fn main() {
    for (a0, b0, lambda) in [(1.0, 1.0, 2.0), (-1.0, 1.0, 2.0), (1.0, 1.0, 0.5)] {
        let order = 64;
        let map = ShiftMap::Affine { lambda, t0: 0.0 };
        let dde = LocalLinearDDE::new(
            TruncatedSeries::constant(0.0, a0, order),
            TruncatedSeries::constant(0.0, b0, order),
            TruncatedSeries::constant(0.0, 0.0, order),
            map,
        )
        .unwrap();
        let verdict = classify_point(&dde, 1.0, &ClassifyConfig::default()).unwrap();
        print!("a0 = {a0:5}, b0 = {b0}, lambda = {lambda:4}: {}", verdict.class_name());
        match verdict {
            Verdict::Nonanalytic { w_inf, .. } => println!("  (w_inf = {w_inf:.6})"),
            Verdict::AnalyticCandidate { w_inf, .. } => println!("  (w_inf = {w_inf:.2e})"),
            _ => println!(),
        }
    }
}
