//! Reviews that report the reviewer's own taste plus a quality bit. Newest vs
//! random display against the binary-review baseline under `N(0, 1)` tastes.
use conf_lab::simulator::{run, SimConfig, SimOrdering, Variant};
use conf_lab::{analytics, Estimator, Instance, PricingPolicy, ValuationDistribution};

fn main() -> conf_lab::Result<()> {
    let reps: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(16);
    let inst = Instance::new(0.5, ValuationDistribution::normal(0.0, 1.0)?, 1, Estimator::table([0.0, 1.0]))?;
    println!("price  coarse_newest  coarse_random  baseline_newest  baseline_random");
    for p in [0.25, 0.5, 1.0, 1.5, 2.0] {
        let mk = |ord| {
            SimConfig::new(inst.clone(), ord, PricingPolicy::static_price(p), 100_000, reps, 5)
                .with_variant(Variant::CoarseRatings)
        };
        let n = run(&mk(SimOrdering::Newest))?;
        let r = run(&mk(SimOrdering::RandomFinitePool))?;
        println!(
            "{p:<6} {:.6}±{:.4}  {:.6}±{:.4}  {:.6}         {:.6}",
            n.avg_revenue_per_round,
            n.stderr,
            r.avg_revenue_per_round,
            r.stderr,
            analytics::rev_newest_static(&inst, p)?,
            analytics::rev_random_static(&inst, p),
        );
    }
    Ok(())
}
