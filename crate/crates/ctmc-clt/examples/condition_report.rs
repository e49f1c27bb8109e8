//! Run the full battery of martingale-approximation conditions on one
//! chain and print each verdict with its witness.
//!
//!     cargo run --example condition_report

use ctmc_clt::calculus::decompose;
use ctmc_clt::conditions::{
    auxbound_check, bt_identity_check, kv1_profile, kv2_limit, laplace_identity,
    lemma_chain_check, mw_integral, summability, LambdaSchedule, QuadConfig,
};
use ctmc_clt::{make_example, ExampleFamily};

fn main() {
    let (chain, f) = make_example(ExampleFamily::RandomGeneral { n: 6 }, 42).unwrap();
    let dec = decompose(&chain).unwrap();
    let schedule = LambdaSchedule::geometric(0.5, 40).unwrap();
    let quad = QuadConfig::default();

    let show = |report: &ctmc_clt::conditions::ConditionReport| {
        println!(
            "{:<22} {}  margin {:+.3e}  ({})",
            report.condition_name,
            if report.verdict { "PASS" } else { "FAIL" },
            report.witness.margin,
            report.witness.label
        );
    };

    show(&kv1_profile(&chain, &f, &schedule, 1e-6).unwrap());

    let (_, kv2) = kv2_limit(&chain, &dec, &f, &schedule, 1e-6).unwrap();
    show(&kv2);

    // the two-resolvent identity, checked at one representative pair
    let (lhs, rhs) = bt_identity_check(&chain, &dec, &f, 1.0, 0.125).unwrap();
    println!(
        "{:<22} gap {:.3e}  (lhs = {lhs:.6})",
        "two-term identity",
        (lhs - rhs).abs()
    );

    show(&auxbound_check(&chain, &dec, &f, 1.0, 0.125).unwrap());

    let (mw, rep) = mw_integral(&chain, &f, &quad).unwrap();
    println!("{:<22} value {mw:.6}", "singular integral");
    show(&rep);

    let (sum, rep) = summability(&chain, &f, 0.5, 1e-6).unwrap();
    println!("{:<22} value {sum:.6}", "resolvent sum");
    show(&rep);

    show(&laplace_identity(&chain, &f, 1.0, &quad).unwrap());
    show(&lemma_chain_check(&chain, &f, 0.5, &quad).unwrap());
}
