//! The newest-first review process as an explicit Markov chain: closed-form
//! stationary law against a dense linear solve, and the lazy-chain identity.
use conf_lab::analytics;
use conf_lab::markov::{build_newest_chain, lazify, stationary_solve, stationarity_residual};
use conf_lab::model::ReviewState;
use conf_lab::{Estimator, Instance, PricingPolicy, ValuationDistribution};

fn main() -> conf_lab::Result<()> {
    let inst = Instance::new(0.4, ValuationDistribution::uniform(0.0, 1.0)?, 3, Estimator::beta_mean(1.0, 1.0))?;
    let pol = PricingPolicy::static_price(0.9);
    let chain = build_newest_chain(&inst, &pol)?;
    let solved = stationary_solve(&chain)?;
    let closed = analytics::stationary_newest_states(&inst, &pol)?;
    println!("state  closed      solve");
    for (z, (a, b)) in ReviewState::all(3).zip(closed.iter().zip(&solved.probs)) {
        println!("{}    {a:.8}  {b:.8}", z.label());
    }
    println!("residual |pi P - pi|_inf = {:.2e}", stationarity_residual(&chain, &solved));

    let f: Vec<f64> = (0..chain.len()).map(|s| 0.2 + 0.1 * s as f64).collect();
    let lz = lazify(&chain, &f)?;
    let direct = stationary_solve(&lz.chain)?;
    let cf = lz.closed_form.expect("irreducible");
    let gap = cf.probs.iter().zip(&direct.probs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("lazy chain: closed form vs solve max gap {gap:.2e}");
    println!("\n{}", chain.to_csv());
    Ok(())
}
