//! The universal polynomials expressing higher derivatives of a solution of
//! x'(t) = f(t, x(t)) in the mixed partials z_ij = D_t^i D_x^j f.

use shiftlab::nondegeneracy::build_pn;

fn main() {
    for n in 0..=4 {
        let p = build_pn(n).unwrap();
        println!("P_{n} = {}", p.render());
    }
}
