//! Optimal state-dependent prices. Newest first is best served by offsetting
//! each state's estimate; random display uses the single-customer optimum
//! per count.
use conf_lab::pricing::{self, PolicyClass};
use conf_lab::{Estimator, Instance, Ordering, ValuationDistribution};

fn main() -> conf_lab::Result<()> {
    let inst = Instance::new(0.5, ValuationDistribution::uniform(0.0, 1.0)?, 2, Estimator::beta_mean(1.0, 1.0))?;
    let newest = pricing::optimal_dynamic_newest(&inst)?;
    let random = pricing::optimal_dynamic_random(&inst)?;
    println!("newest: offset {:.4}, prices {:?}, revenue {:.6}", newest.diagnostics.offset.unwrap(), newest.diagnostics.per_count_prices.unwrap(), newest.revenue);
    println!("random: prices {:?}, revenue {:.6}", random.diagnostics.per_count_prices.unwrap(), random.revenue);

    let (grid, best) = pricing::brute_force_count_table(&inst, Ordering::Newest, 0.01);
    println!("grid search over count tables: {grid:?} -> {best:.6}");

    for cmp in pricing::compare_dynamic_prices(&inst)? {
        println!("n = {}: newest {:.4} vs random {:.4}", cmp.n, cmp.newest_price, cmp.random_price);
    }
    for class in [PolicyClass::Static, PolicyClass::Dynamic] {
        let cc = pricing::conf_class(&inst, class)?;
        println!("{class:?}: chi = {:.6}, bounds {:?} .. {:?}", cc.chi, cc.lower_bound, cc.upper_bound);
    }
    Ok(())
}
