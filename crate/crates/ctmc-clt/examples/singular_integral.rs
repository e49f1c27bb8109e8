//! The singular integral int_0^inf t^{-3/2} ||v_t|| dt and the kernel
//! machinery that compares it to the geometric resolvent sum.
//!
//!     cargo run --example singular_integral

use ctmc_clt::conditions::{gamma_bound, gamma_sum, lemma_chain_check, mw_integral, QuadConfig};
use ctmc_clt::{make_example, ExampleFamily};

fn main() {
    let quad = QuadConfig::default();

    // two-state flip: the integral is exactly sqrt(2 pi)
    let (chain, f) = make_example(ExampleFamily::TwoState { a: 1.0, b: 1.0 }, 0).unwrap();
    let (value, report) = mw_integral(&chain, &f, &quad).unwrap();
    println!(
        "two-state integral = {value:.8}, sqrt(2 pi) = {:.8}, certified: {}",
        (2.0 * std::f64::consts::PI).sqrt(),
        report.verdict
    );

    // the two-sided gamma kernel stays below its uniform bound in t
    println!("\nkernel K(t) at delta = 0.5 (bound {:.6}):", gamma_bound(0.5));
    for i in 0..9 {
        let t = 10f64.powf(-2.0 + 4.0 * i as f64 / 8.0);
        let (sum, bound) = gamma_sum(t, 0.5);
        println!("  t = {t:>10.4e}   K(t) = {sum:.6}   slack = {:.6}", bound - sum);
    }

    // chained comparison: resolvent sum <= kernel integral <= bound * integral
    for seed in [0, 1, 2] {
        let (chain, f) = make_example(ExampleFamily::RandomReversible { n: 5 }, seed).unwrap();
        let rep = lemma_chain_check(&chain, &f, 0.5, &quad).unwrap();
        let lhs = rep.profile[0].1;
        let mid = rep.profile[1].1;
        let rhs = rep.profile[2].1;
        println!(
            "\nrandom n=5 seed {seed}: {lhs:.6} <= {mid:.6} <= {rhs:.6}  ({})",
            if rep.verdict { "PASS" } else { "FAIL" }
        );
    }
}
