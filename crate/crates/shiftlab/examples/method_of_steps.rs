//! Integrate y'(t) = alpha y(t) + beta y(lambda t) inward from both sides
//! of the expansive point and match the boundary data.
//!
//! On each side the time axis splits into geometric layers; integrating
//! layer by layer, the one-sided limits at 0 are affine in the outer data.
//! Solving the 2x2 system produces a smooth solution whose jet at 0 agrees
//! with the (generally divergent) formal series.

use shiftlab::pantograph::PantographForm;
use shiftlab::stepsim::{jet_comparison, match_initial};
use shiftlab::TruncatedSeries;

fn main() {
    let (lambda, a0, b0, tau, y0) = (2.0, 1.0, 1.0, 0.5, 1.0);
    let form = PantographForm {
        alpha: TruncatedSeries::constant(0.0, a0, 8),
        beta: TruncatedSeries::constant(0.0, b0, 8),
        gamma: TruncatedSeries::constant(0.0, 0.0, 8),
        lambda,
    };
    let matched = match_initial(&form, tau, y0, 40, 256).unwrap();
    println!("matched boundary data: c- = {:.8}, c+ = {:.8}", matched.c_minus, matched.c_plus);
    println!("matching residual: {:.2e}", matched.residual);

    println!(" n   finite differences   recursion        gap");
    for row in jet_comparison(&matched.solution, &form, y0, 3).unwrap() {
        println!(
            " {}   {:>18.10}   {:>12.10}   {:.2e}",
            row.n, row.fd_coeff, row.recursion_coeff, row.gap
        );
    }
}
