//! Simulator against closed forms on generated instances.

use conf_lab::analytics;
use conf_lab::simulator::{run, SimConfig, SimOrdering};
use conf_lab::{Estimator, Instance, PricingPolicy, ValuationDistribution};
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = (Instance, f64)> {
    (1usize..=3, 0.2f64..0.8, 0.3f64..3.0, 0.3f64..3.0, 0.55f64..0.95).prop_map(|(c, mu, a, b, t)| {
        let inst = Instance::new(mu, ValuationDistribution::uniform(0.0, 1.0).unwrap(), c, Estimator::beta_mean(a, b)).unwrap();
        // sells with probability at least 0.05 in the worst state
        let price = inst.h(0) + t;
        (inst, price)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn simulation_matches_closed_forms((inst, p) in instance(), seed in any::<u64>()) {
        let mk = |o| SimConfig::new(inst.clone(), o, PricingPolicy::static_price(p), 100_000, 16, seed);
        let n = run(&mk(SimOrdering::Newest)).unwrap();
        let r = run(&mk(SimOrdering::RandomIid)).unwrap();
        let w = inst.c() + 2;
        let win = run(&mk(SimOrdering::Window { w })).unwrap();
        for (res, exact) in [
            (&n, analytics::rev_newest_static(&inst, p).unwrap()),
            (&r, analytics::rev_random_static(&inst, p)),
            (&win, analytics::window_revenue(&inst, w, p).unwrap()),
        ] {
            prop_assert!((res.avg_revenue_per_round - exact).abs() <= 5.0 * res.stderr, "{} vs {}", res.avg_revenue_per_round, exact);
        }
    }

    #[test]
    fn dynamic_policies_match_in_simulation((inst, _p) in instance()) {
        let opt = conf_lab::pricing::optimal_dynamic_newest(&inst).unwrap();
        let cfg = SimConfig::new(inst.clone(), SimOrdering::Newest, opt.policy.clone(), 100_000, 16, 4);
        let r = run(&cfg).unwrap();
        prop_assert!((r.avg_revenue_per_round - opt.revenue).abs() <= 5.0 * r.stderr);
    }
}
