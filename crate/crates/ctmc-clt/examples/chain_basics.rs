//! Build a chain from a raw generator matrix and inspect its basic
//! structure: stationary distribution, reversibility, centering.
//!
//!     cargo run --example chain_basics

use ctmc_clt::{build_chain, MarkovChain, Observable};
use nalgebra::DMatrix;

fn describe(name: &str, chain: &MarkovChain, f: &Observable) {
    println!("== {name} (n = {}) ==", chain.n());
    print!("pi =");
    for p in chain.stationary().iter() {
        print!(" {p:.6}");
    }
    println!();
    println!("reversible: {}", chain.is_reversible(1e-12));
    let centered = chain.center(f).unwrap();
    println!(
        "observable mean {:.3e} -> {:.3e} after centering, norm {:.6}",
        chain.inner(f, &Observable::ones(chain.n())).unwrap(),
        chain
            .inner(&centered, &Observable::ones(chain.n()))
            .unwrap(),
        chain.norm(&centered).unwrap()
    );
    println!();
}

fn main() {
    // symmetric two-state flip
    let q2 = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0]);
    let chain2 = build_chain(q2).unwrap();
    describe("two-state flip", &chain2, &Observable::from_slice(&[1.0, -1.0]));

    // uni-directional three-cycle: stationary but not reversible
    let q3 = DMatrix::from_row_slice(
        3,
        3,
        &[-1.0, 1.0, 0.0, 0.0, -1.0, 1.0, 1.0, 0.0, -1.0],
    );
    let chain3 = build_chain(q3).unwrap();
    describe("three-cycle", &chain3, &Observable::from_slice(&[1.0, 0.0, -1.0]));

    // a birth-death chain with a pull toward state 0
    let q4 = DMatrix::from_row_slice(
        4,
        4,
        &[
            -1.0, 1.0, 0.0, 0.0, //
            2.0, -3.0, 1.0, 0.0, //
            0.0, 2.0, -3.0, 1.0, //
            0.0, 0.0, 2.0, -2.0,
        ],
    );
    let chain4 = build_chain(q4).unwrap();
    describe(
        "birth-death",
        &chain4,
        &Observable::from_slice(&[0.0, 1.0, 2.0, 3.0]),
    );

    // rejected inputs come back as typed errors
    let bad = DMatrix::from_row_slice(2, 2, &[-1.0, 2.0, 1.0, -1.0]);
    println!("bad generator: {}", build_chain(bad).unwrap_err());
}
