//! Revenue as the number of displayed reviews grows: flat under random
//! display, dipping then recovering under newest first.
use conf_lab::analytics;
use conf_lab::{Estimator, Instance, ValuationDistribution};

fn main() -> conf_lab::Result<()> {
    let d = ValuationDistribution::uniform(-1.0, 1.0)?;
    println!("c,rev_random_0.1,rev_newest_0.1,rev_random_0.5,rev_newest_0.5");
    for c in 1..=50 {
        let mut row = vec![c.to_string()];
        for mu in [0.1, 0.5] {
            let inst = Instance::new(mu, d, c, Estimator::beta_mean(mu, 1.0 - mu))?;
            row.push(format!("{:.6}", analytics::rev_random_static(&inst, 1.0)));
            row.push(format!("{:.6}", analytics::rev_newest_static(&inst, 1.0)?));
        }
        println!("{}", row.join(","));
    }
    Ok(())
}
