//! Simulate the chain exactly (Gillespie), normalize the additive
//! functional by sigma sqrt(N), and test the marginal against a standard
//! normal with the Kolmogorov-Smirnov statistic.
//!
//!     cargo run --release --example clt_demo

use ctmc_clt::simulate::{clt_statistics, ks_critical_1pct, ks_critical_5pct};
use ctmc_clt::{make_example, ExampleFamily};

fn main() {
    let cases = [
        ("two-state flip", make_example(ExampleFamily::TwoState { a: 1.0, b: 1.0 }, 0)),
        ("three-cycle drift", make_example(ExampleFamily::CycleDrift { n: 3 }, 0)),
        ("random reversible n=6", make_example(ExampleFamily::RandomReversible { n: 6 }, 17)),
    ];
    let n_paths = 4000;
    let horizon = 200.0;

    for (name, case) in cases {
        let (chain, f) = case.unwrap();
        let rep = clt_statistics(&chain, &f, horizon, n_paths, 7).unwrap();
        println!("{name}:");
        println!(
            "  {n_paths} paths, horizon {horizon}: mean {:+.4}, variance {:.4}",
            rep.mean, rep.variance
        );
        println!(
            "  KS distance {:.4}  (5% critical {:.4}, 1% critical {:.4})",
            rep.ks_distance,
            ks_critical_5pct(n_paths),
            ks_critical_1pct(n_paths)
        );

        // a crude histogram of the normalized samples
        let mut bins = [0usize; 11];
        for s in &rep.samples {
            let idx = (((s + 2.75) / 0.5).floor() as isize).clamp(0, 10) as usize;
            bins[idx] += 1;
        }
        for (i, count) in bins.iter().enumerate() {
            let lo = -2.75 + 0.5 * i as f64;
            let bar = "#".repeat(count * 120 / n_paths);
            println!("  [{:+.2}] {bar}", lo + 0.25);
        }
        println!();
    }
}
