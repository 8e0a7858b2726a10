//! Revenue if customers knew the quality, against what review-driven
//! customers generate under either display.
use conf_lab::analytics;
use conf_lab::pricing::{optimal_static, price_demand_diagnostics};
use conf_lab::{Estimator, Instance, Ordering, ValuationDistribution};

fn main() -> conf_lab::Result<()> {
    let inst = Instance::new(0.5, ValuationDistribution::uniform(0.0, 1.0)?, 2, Estimator::beta_mean(1.0, 1.0))?;
    for p in [0.5, 0.75, 1.0] {
        println!(
            "p = {p}: known quality {:.6}, random {:.6}, newest {:.6}",
            analytics::rev_known_quality(&inst, p),
            analytics::rev_random_static(&inst, p),
            analytics::rev_newest_static(&inst, p)?
        );
    }
    for ord in [Ordering::Random, Ordering::Newest] {
        let o = optimal_static(&inst, ord);
        println!("best static price under {ord:?}: {:?} -> {:.6}", o.policy, o.revenue);
    }
    let pd = price_demand_diagnostics(&inst)?;
    println!("expected price ratio {:.4}, max demand ratio {:.4}", pd.expected_price_ratio, pd.max_demand_ratio);
    Ok(())
}
