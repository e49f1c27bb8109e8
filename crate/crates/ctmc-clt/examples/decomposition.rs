//! Split the generator into symmetric and antisymmetric parts with
//! respect to the stationary inner product, G = -S + A, and take the
//! square root of S.
//!
//!     cargo run --example decomposition

use ctmc_clt::calculus::{decompose, pi_adjoint};
use ctmc_clt::{make_example, ExampleFamily, Observable};

fn main() {
    let (chain, f) = make_example(ExampleFamily::RandomGeneral { n: 5 }, 3).unwrap();
    let dec = decompose(&chain).unwrap();

    // the adjoint is taken in L^2(pi), not entrywise
    let g_star = pi_adjoint(&chain, chain.generator()).unwrap();
    println!(
        "||G* - G|| = {:.3e}  (zero only for reversible chains)",
        (&g_star - chain.generator()).norm()
    );

    println!(
        "reconstruction ||G - (-S + A)|| = {:.3e}",
        (chain.generator() - (-&dec.s + &dec.a)).norm()
    );
    println!(
        "S self-adjointness ||S* - S|| = {:.3e}",
        (pi_adjoint(&chain, &dec.s).unwrap() - &dec.s).norm()
    );
    println!(
        "A skewness ||A* + A|| = {:.3e}",
        (pi_adjoint(&chain, &dec.a).unwrap() + &dec.a).norm()
    );
    println!(
        "square root ||S^(1/2) S^(1/2) - S|| = {:.3e}",
        (&dec.s_half * &dec.s_half - &dec.s).norm()
    );

    // the Dirichlet form only sees the symmetric part
    let sf = Observable::new(&dec.s * &f.values);
    let gf = Observable::new(chain.generator() * &f.values);
    println!(
        "\nDirichlet form: (f, -G f) = {:.6}, (f, S f) = {:.6}",
        -chain.inner(&f, &gf).unwrap(),
        chain.inner(&f, &sf).unwrap()
    );
    let rf = Observable::new(&dec.s_half * &f.values);
    println!(
        "matches ||S^(1/2) f||^2 = {:.6}",
        chain.inner(&rf, &rf).unwrap()
    );
}
