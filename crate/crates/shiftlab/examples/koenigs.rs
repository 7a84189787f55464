//! Linearize the shift `eta(t) = t + (lambda - 1) sin t` at its fixed point 0.
//!
//! The conjugacy sigma satisfies eta(sigma(t)) = sigma(lambda t) with
//! sigma(0) = 0, sigma'(0) = 1; its coefficients come out of an
//! order-by-order solve. For large lambda a contraction-mapping iteration
//! gives the same series — we print both to show the agreement.

use shiftlab::koenigs::{koenigs_series, zeta_iteration};
use shiftlab::ShiftMap;

fn main() {
    let lambda = 13.0;
    let map = ShiftMap::SineShift { lambda, offset: 0.0 };
    let conj = koenigs_series(&map, 0.0, 12).unwrap();
    println!("lambda = {lambda}, residual = {:.2e}", conj.residual);
    println!("  n  sigma_n (direct)   sigma_n (iteration)");
    let iterated = zeta_iteration(lambda, 12, 200).unwrap();
    for n in 0..=8 {
        println!(
            " {n:2}  {:>17.10e}  {:>17.10e}",
            conj.sigma.coeff(n),
            iterated.coeff(n)
        );
    }
    // sigma_3 has the closed form -1/(6 lambda (lambda + 1))
    println!(
        "closed-form sigma_3 = {:.10e}",
        -1.0 / (6.0 * lambda * (lambda + 1.0))
    );
}
