//! Rotation numbers of circle-map lifts.
//!
//! Fixed-point-free monotone shifts advance every orbit at the same average
//! rate; a shift with a fixed point has rotation number zero.

use shiftlab::kreigen::DEFAULT_PERIOD;
use shiftlab::shiftmap::rotation_number;
use shiftlab::ShiftMap;

fn main() {
    // the perturbation has period 2 pi, so that is the lift period
    for frac in [0.5, 1.0 / 3.0, (5f64.sqrt() - 1.0) / 2.0] {
        let map = ShiftMap::PerturbedRotation {
            advance: frac * DEFAULT_PERIOD,
            amplitude: 0.05,
        };
        let est = rotation_number(&map, DEFAULT_PERIOD, 0.0, 100_000).unwrap();
        println!(
            "advance {frac:.6} turns, perturbed: omega = {:.6} +/- {:.0e}",
            est.omega, est.error_bar
        );
    }

    let map = ShiftMap::SineShift { lambda: 1.5, offset: 0.0 };
    let est = rotation_number(&map, DEFAULT_PERIOD, 0.0, 10_000).unwrap();
    println!("sine shift with fixed point: omega = {}", est.omega);
}
