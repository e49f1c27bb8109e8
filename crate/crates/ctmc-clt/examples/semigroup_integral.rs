//! The integrated semigroup v_t = int_0^t P_s f ds and its two defining
//! identities: the Laplace transform recovers the resolvent, and for a
//! centered observable v_t converges to the corrector u_0.
//!
//!     cargo run --example semigroup_integral

use ctmc_clt::calculus::{resolvent, semigroup_apply, u_zero, v_of_t};
use ctmc_clt::conditions::{laplace_identity, QuadConfig};
use ctmc_clt::{make_example, ExampleFamily, Observable};

fn main() {
    let (chain, f) = make_example(ExampleFamily::RandomReversible { n: 5 }, 23).unwrap();
    let u0 = u_zero(&chain, &f).unwrap();
    let u0_norm = chain.norm(&u0).unwrap();

    println!("||v_t|| grows from 0 to ||u_0|| = {u0_norm:.6}:");
    for t in [0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0] {
        let v = v_of_t(&chain, t, &f).unwrap();
        let p = semigroup_apply(&chain, t, &f).unwrap();
        println!(
            "  t = {t:>6}: ||v_t|| = {:.6}   ||P_t f|| = {:.6}",
            chain.norm(&v.v).unwrap(),
            chain.norm(&p).unwrap()
        );
    }

    // u_lambda = lambda int_0^inf e^{-lambda t} v_t dt, via certified
    // quadrature against the direct linear solve
    let quad = QuadConfig::default();
    println!("\nLaplace transform vs direct resolvent:");
    for lam in [2.0, 0.5, 0.1] {
        let rep = laplace_identity(&chain, &f, lam, &quad).unwrap();
        let u = resolvent(&chain, lam, &f).unwrap();
        println!(
            "  lambda = {lam:>4}: ||u_lambda|| = {:.6}, {}",
            chain.norm(&u.u).unwrap(),
            rep.witness.label
        );
    }

    // at large t the remainder is the mixing remainder P_t u_0
    let t = 30.0;
    let v = v_of_t(&chain, t, &f).unwrap();
    let gap = chain
        .norm(&Observable::new(&v.v.values - &u0.values))
        .unwrap();
    println!("\n||v_30 - u_0|| = {gap:.3e}");
}
