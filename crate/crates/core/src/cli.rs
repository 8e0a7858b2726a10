//! Command-line front end: JSON experiment configs, sweeps, oracle checks.
//!
//! Exit codes: 0 on success, 1 on a usage or validation error, 2 when an
//! oracle check in `verify` fails.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{self, ConfReport, NsSteady};
use crate::distributions::ValuationDistribution;
use crate::error::Error;
use crate::markov::{build_newest_chain, build_nonstationary_chain, build_window_chain, stationary_solve, MAX_DENSE_BITS};
use crate::model::{Estimator, Instance, InstanceSpec, Ordering, PricingPolicy};
use crate::pricing::{self, ClassConf, OptimizedPricing, PolicyClass};
use crate::simulator::{self, with_thread_cap, SimConfig, SimOrdering, SimResult, Variant};

#[derive(Debug, Parser)]
#[command(name = "conf-lab", version, about = "Review ordering, pricing and the cost of newest first")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Static revenues, CoNF and stationary laws at one price.
    Analyze,
    /// Optimal static and dynamic policies under both orderings.
    Optimize,
    /// Monte Carlo run.
    Simulate,
    /// One CSV row per value of a swept parameter.
    Sweep,
    /// Cross-check closed forms, chain solves and the simulator.
    Verify,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct Opts {
    /// JSON experiment file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Result file (JSON, or CSV for `sweep`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Sweep axis: price, c, w, gamma, xi, mu, epsilon, prior_strength.
    #[arg(long, global = true)]
    pub axis: Option<String>,
    /// `a,b,c`, `lo..hi` (integer steps) or `lo..hi:step`.
    #[arg(long, global = true)]
    pub values: Option<String>,
    #[arg(long, global = true)]
    pub rounds: Option<u64>,
    #[arg(long, global = true)]
    pub reps: Option<u64>,
    /// Per-round trajectory CSV for `simulate`.
    #[arg(long, global = true)]
    pub trajectory: Option<PathBuf>,
    /// Inline instance, used when no config is given (defaults give a
    /// uniform [0,1] market with one review and a uniform prior).
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    #[arg(long = "attention", short = 'c', global = true)]
    pub c: Option<usize>,
    /// `uniform:LO:HI`, `exponential:RATE`, `normal:MEAN:SD` or `bernoulli:P`.
    #[arg(long, global = true)]
    pub dist: Option<String>,
    /// `beta_mean:A:B`, `beta_quantile:A:B:PHI` or `table:V0,V1,...`.
    #[arg(long, global = true)]
    pub estimator: Option<String>,
    #[arg(long, global = true)]
    pub price: Option<f64>,
    /// `newest`, `random`, `random_finite_pool` or `window:W`.
    #[arg(long, global = true)]
    pub ordering: Option<String>,
}

/// Experiment document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub instance: Instance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub price: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pricing: Option<PricingPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordering: Option<OrderingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    /// Two-state quality levels, for `xi` sweeps and `verify`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonstationary: Option<NsSection>,
}

/// Either a bare name or a tagged ordering object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OrderingSpec {
    Name(String),
    Tagged(SimOrdering),
}

impl OrderingSpec {
    pub fn resolve(&self) -> CliResult<SimOrdering> {
        match self {
            Self::Tagged(o) => Ok(*o),
            Self::Name(s) => parse_ordering(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    #[serde(default = "default_rounds")]
    pub rounds: u64,
    #[serde(default = "default_reps")]
    pub replications: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub variant: Variant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<u64>,
    #[serde(default)]
    pub record_trajectory: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<usize>,
}

fn default_rounds() -> u64 {
    100_000
}

fn default_reps() -> u64 {
    16
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            rounds: default_rounds(),
            replications: default_reps(),
            seed: 0,
            variant: Variant::Baseline,
            burn_in: None,
            record_trajectory: false,
            blocks: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: String,
    pub values: SweepValues,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValues {
    List(Vec<f64>),
    Range(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NsSection {
    pub mu_lo: f64,
    pub mu_hi: f64,
    #[serde(default = "default_xi")]
    pub xi: f64,
}

fn default_xi() -> f64 {
    0.5
}

pub const SWEEP_AXES: [&str; 8] = ["price", "c", "w", "gamma", "xi", "mu", "epsilon", "prior_strength"];

#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Oracle(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Invalid(_) => 1,
            Self::Oracle(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Invalid(m) => write!(f, "error: {m}"),
            Self::Oracle(m) => write!(f, "oracle check failed: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::Invalid(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn invalid(m: impl Into<String>) -> CliError {
    CliError::Invalid(m.into())
}

/// Parses an experiment document with the failing field's path in errors.
pub fn parse_spec(text: &str) -> CliResult<ExperimentSpec> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        invalid(format!("config field `{path}`: {}", e.inner()))
    })
}

pub fn load_spec(path: &Path) -> CliResult<ExperimentSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    parse_spec(&text)
}

fn split_params<'a>(s: &'a str, kind: &str, n: usize) -> CliResult<Vec<f64>> {
    let parts: Vec<&'a str> = s.split(':').skip(1).collect();
    if parts.len() != n {
        return Err(invalid(format!("`{s}`: {kind} takes {n} parameter(s)")));
    }
    parts.iter().map(|p| p.trim().parse::<f64>().map_err(|_| invalid(format!("`{s}`: bad number `{p}`")))).collect()
}

pub fn parse_dist(s: &str) -> CliResult<ValuationDistribution> {
    let kind = s.split(':').next().unwrap_or_default();
    Ok(match kind {
        "uniform" => {
            let v = split_params(s, kind, 2)?;
            ValuationDistribution::uniform(v[0], v[1])?
        }
        "exponential" => ValuationDistribution::exponential(split_params(s, kind, 1)?[0])?,
        "normal" => {
            let v = split_params(s, kind, 2)?;
            ValuationDistribution::normal(v[0], v[1])?
        }
        "bernoulli" => ValuationDistribution::bernoulli(split_params(s, kind, 1)?[0])?,
        o => return Err(invalid(format!("unknown distribution `{o}`"))),
    })
}

pub fn parse_estimator(s: &str) -> CliResult<Estimator> {
    let kind = s.split(':').next().unwrap_or_default();
    Ok(match kind {
        "beta_mean" => {
            let v = split_params(s, kind, 2)?;
            Estimator::beta_mean(v[0], v[1])
        }
        "beta_quantile" => {
            let v = split_params(s, kind, 3)?;
            Estimator::BetaQuantile { a: v[0], b: v[1], phi: v[2] }
        }
        "table" => {
            let body = s.strip_prefix("table:").ok_or_else(|| invalid("table estimator needs values"))?;
            Estimator::table(parse_list(body)?)
        }
        o => return Err(invalid(format!("unknown estimator `{o}`"))),
    })
}

pub fn parse_ordering(s: &str) -> CliResult<SimOrdering> {
    Ok(match s {
        "newest" => SimOrdering::Newest,
        "random" | "random_iid" => SimOrdering::RandomIid,
        "random_finite_pool" => SimOrdering::RandomFinitePool,
        o => match o.strip_prefix("window:").map(str::parse::<usize>) {
            Some(Ok(w)) => SimOrdering::Window { w },
            _ => return Err(invalid(format!("unknown ordering `{o}`"))),
        },
    })
}

fn parse_list(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| invalid(format!("bad number `{p}` in list `{s}`"))))
        .collect()
}

/// Parses `--values`: comma list, `lo..hi` (unit steps) or `lo..hi:step`.
pub fn parse_values(s: &str) -> CliResult<Vec<f64>> {
    let Some((lo, rest)) = s.split_once("..") else {
        return parse_list(s);
    };
    let (hi, step) = match rest.split_once(':') {
        Some((h, st)) => (h, st),
        None => (rest, "1"),
    };
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| invalid(format!("bad range `{s}`")));
    let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
    if !(step > 0.0) || hi < lo {
        return Err(invalid(format!("bad range `{s}`")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| lo + k as f64 * step).collect())
}

fn sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return String::new();
    }
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&mag) {
        return format!("{:.*e}", digits - 1, x);
    }
    let dec = (digits as i32 - 1 - mag).max(0) as usize;
    let s = format!("{x:.dec$}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
    if s == "-0" { "0".into() } else { s }
}

/// CSV cell: 12 significant digits, empty for NaN.
pub fn csv_cell(x: f64) -> String {
    sig(x, 12)
}

/// Tabular result for sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.iter().map(|&x| csv_cell(x)).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Config document merged with command-line overrides.
struct Resolved {
    spec: ExperimentSpec,
    opts: Opts,
}

fn resolve(opts: &Opts) -> CliResult<Resolved> {
    let mut spec = match &opts.config {
        Some(p) => load_spec(p)?,
        None => {
            let dist = parse_dist(opts.dist.as_deref().unwrap_or("uniform:0:1"))?;
            let est = parse_estimator(opts.estimator.as_deref().unwrap_or("beta_mean:1:1"))?;
            let instance = Instance::new(opts.mu.unwrap_or(0.5), dist, opts.c.unwrap_or(1), est)?;
            ExperimentSpec {
                name: None,
                instance,
                price: None,
                pricing: None,
                ordering: None,
                simulation: None,
                sweep: None,
                nonstationary: None,
            }
        }
    };
    if opts.config.is_some() && (opts.mu.is_some() || opts.c.is_some() || opts.dist.is_some() || opts.estimator.is_some()) {
        return Err(invalid("inline instance flags cannot be combined with --config"));
    }
    if let Some(p) = opts.price {
        spec.price = Some(p);
        spec.pricing = None;
    }
    if let Some(o) = &opts.ordering {
        spec.ordering = Some(OrderingSpec::Name(o.clone()));
    }
    if spec.price.is_some() && spec.pricing.is_some() {
        return Err(invalid("give either `price` or `pricing`, not both"));
    }
    Ok(Resolved { spec, opts: opts.clone() })
}

impl Resolved {
    fn inst(&self) -> &Instance {
        &self.spec.instance
    }

    fn static_price(&self) -> CliResult<f64> {
        match (&self.spec.price, &self.spec.pricing) {
            (Some(p), _) => Ok(*p),
            (None, Some(PricingPolicy::Static { price })) => Ok(*price),
            (None, Some(_)) => Err(invalid("this command needs a static price")),
            (None, None) => Err(invalid("no price given (`price` in the config or --price)")),
        }
    }

    fn policy(&self) -> CliResult<PricingPolicy> {
        match (&self.spec.price, &self.spec.pricing) {
            (Some(p), _) => Ok(PricingPolicy::static_price(*p)),
            (None, Some(pol)) => Ok(pol.clone()),
            (None, None) => Err(invalid("no price or pricing policy given")),
        }
    }

    fn ordering(&self) -> CliResult<Option<SimOrdering>> {
        self.spec.ordering.as_ref().map(OrderingSpec::resolve).transpose()
    }

    fn simulation(&self) -> SimulationSection {
        let mut s = self.spec.simulation.clone().unwrap_or_default();
        if let Some(r) = self.opts.rounds {
            s.rounds = r;
        }
        if let Some(r) = self.opts.reps {
            s.replications = r;
        }
        if let Some(seed) = self.opts.seed {
            s.seed = seed;
        }
        if self.opts.trajectory.is_some() {
            s.record_trajectory = true;
        }
        s
    }

    fn sim_config(&self, inst: Instance, ordering: SimOrdering, policy: PricingPolicy) -> SimConfig {
        let s = self.simulation();
        SimConfig {
            instance: inst,
            ordering,
            pricing: policy,
            rounds: s.rounds,
            replications: s.replications,
            seed: s.seed,
            variant: s.variant,
            burn_in: s.burn_in,
            record_trajectory: s.record_trajectory,
            blocks: s.blocks,
        }
    }

    fn sweep(&self) -> CliResult<(String, Vec<f64>)> {
        let from_spec = self.spec.sweep.as_ref();
        let axis = self
            .opts
            .axis
            .clone()
            .or_else(|| from_spec.map(|s| s.axis.clone()))
            .ok_or_else(|| invalid("no sweep axis (--axis or `sweep.axis`)"))?;
        if !SWEEP_AXES.contains(&axis.as_str()) {
            return Err(invalid(format!("unknown sweep axis `{axis}`; expected one of {}", SWEEP_AXES.join(", "))));
        }
        let values = match (&self.opts.values, from_spec.map(|s| &s.values)) {
            (Some(v), _) => parse_values(v)?,
            (None, Some(SweepValues::List(v))) => v.clone(),
            (None, Some(SweepValues::Range(r))) => parse_values(r)?,
            (None, None) => return Err(invalid("no sweep values (--values or `sweep.values`)")),
        };
        if values.is_empty() {
            return Err(invalid("empty sweep value list"));
        }
        Ok((axis, values))
    }
}

fn write_out(path: &Option<PathBuf>, text: &str) -> CliResult<()> {
    if let Some(p) = path {
        std::fs::write(p, text).map_err(|e| invalid(format!("cannot write {}: {e}", p.display())))?;
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable result");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub price: f64,
    pub conf: ConfReport,
    /// Newest-first law of the positive-review count, indexed by count.
    pub stationary_counts: Vec<f64>,
    pub expected_positive_newest: f64,
    pub expected_positive_random: f64,
    /// Newest-first law over full review states, newest review first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stationary_states: Option<Vec<(String, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub w: usize,
    pub revenue: f64,
}

pub fn analyze(inst: &Instance, price: f64, ordering: Option<SimOrdering>) -> CliResult<AnalyzeReport> {
    let conf = analytics::conf_static(inst, price)?;
    let stationary_counts = analytics::stationary_newest_counts(inst, price)?;
    let stationary_states = if inst.c() <= MAX_DENSE_BITS {
        let pi = analytics::stationary_newest_states(inst, &PricingPolicy::static_price(price))?;
        Some(crate::model::ReviewState::all(inst.c()).map(|z| z.label()).zip(pi).collect())
    } else {
        None
    };
    let window = match ordering {
        Some(SimOrdering::Window { w }) => Some(WindowReport { w, revenue: analytics::window_revenue(inst, w, price)? }),
        _ => None,
    };
    Ok(AnalyzeReport {
        price,
        conf,
        stationary_counts,
        expected_positive_newest: analytics::expected_positive_reviews(inst, price, Ordering::Newest)?,
        expected_positive_random: analytics::expected_positive_reviews(inst, price, Ordering::Random)?,
        stationary_states,
        window,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeReport {
    pub static_random: OptimizedPricing,
    pub static_newest: OptimizedPricing,
    pub dynamic_random: OptimizedPricing,
    pub dynamic_newest: OptimizedPricing,
    pub conf_static: ClassConf,
    pub conf_dynamic: ClassConf,
}

pub fn optimize(inst: &Instance) -> CliResult<OptimizeReport> {
    Ok(OptimizeReport {
        static_random: pricing::optimal_static(inst, Ordering::Random),
        static_newest: pricing::optimal_static(inst, Ordering::Newest),
        dynamic_random: pricing::optimal_dynamic_random(inst)?,
        dynamic_newest: pricing::optimal_dynamic_newest(inst)?,
        conf_static: pricing::conf_class(inst, PolicyClass::Static)?,
        conf_dynamic: pricing::conf_class(inst, PolicyClass::Dynamic)?,
    })
}

fn respec(inst: &Instance, f: impl FnOnce(&mut InstanceSpec)) -> crate::Result<Instance> {
    let mut s: InstanceSpec = inst.clone().into();
    f(&mut s);
    Instance::try_from(s)
}

fn as_count(v: f64, axis: &str) -> crate::Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(Error::InvalidParams(format!("{axis} must be a non-negative integer, got {v}")))
    }
}

fn static_row(inst: &Instance, price: f64) -> Vec<f64> {
    let rr = analytics::rev_random_static(inst, price);
    let rn = pricing::static_revenue(inst, Ordering::Newest, price);
    let (chi, beta) = match analytics::conf_static(inst, price) {
        Ok(r) => (r.chi, r.beta),
        Err(_) => (f64::NAN, f64::NAN),
    };
    vec![rr, rn, chi, beta]
}

fn class_row(inst: crate::Result<Instance>) -> Vec<f64> {
    let row = |inst: &Instance| -> crate::Result<Vec<f64>> {
        let s = pricing::conf_class(inst, PolicyClass::Static)?;
        let d = pricing::conf_class(inst, PolicyClass::Dynamic)?;
        Ok(vec![s.rev_random, s.rev_newest, s.chi, d.rev_random, d.rev_newest, d.chi])
    };
    inst.and_then(|i| row(&i)).unwrap_or_else(|_| vec![f64::NAN; 6])
}

fn replace_prior(e: &Estimator, strength: f64) -> crate::Result<Estimator> {
    match e {
        Estimator::BetaMean { .. } => Ok(Estimator::beta_mean(strength, strength)),
        Estimator::BetaQuantile { phi, .. } => Ok(Estimator::BetaQuantile { a: strength, b: strength, phi: *phi }),
        Estimator::Table { .. } => Err(Error::InvalidParams("prior_strength needs a Beta estimator".into())),
    }
}

/// Runs a sweep; rows follow the order of `values`.
fn sweep(r: &Resolved, axis: &str, values: &[f64]) -> CliResult<Table> {
    let inst = r.inst();
    let nan_row = |n: usize| vec![f64::NAN; n];
    let header = |cols: &[&str]| std::iter::once(axis).chain(cols.iter().copied()).map(String::from).collect();
    let static_cols = ["rev_random", "rev_newest", "chi", "beta"];
    let class_cols = ["rev_random_static", "rev_newest_static", "chi_static", "rev_random_dynamic", "rev_newest_dynamic", "chi_dynamic"];
    let ordering = r.ordering()?;

    let (cols, rows): (Vec<String>, Vec<Vec<f64>>) = match axis {
        "price" => {
            let w = match ordering {
                Some(SimOrdering::Window { w }) => Some(w),
                _ => None,
            };
            let mut cols: Vec<String> = header(&static_cols);
            if w.is_some() {
                cols.push("rev_window".into());
            }
            let rows = values
                .par_iter()
                .map(|&p| {
                    let mut row = static_row(inst, p);
                    if let Some(w) = w {
                        row.push(analytics::window_revenue(inst, w, p).unwrap_or(f64::NAN));
                    }
                    row
                })
                .collect();
            (cols, rows)
        }
        "c" | "mu" => {
            let price = r.static_price()?;
            let rows = values
                .par_iter()
                .map(|&v| {
                    let i = if axis == "c" {
                        as_count(v, axis).and_then(|c| respec(inst, |s| s.c = c))
                    } else {
                        inst.with_mu(v)
                    };
                    i.map(|i| static_row(&i, price)).unwrap_or_else(|_| nan_row(4))
                })
                .collect();
            (header(&static_cols), rows)
        }
        "w" => {
            let price = r.static_price()?;
            let base = static_row(inst, price);
            let rows = values
                .par_iter()
                .map(|&v| {
                    let rw = as_count(v, axis).and_then(|w| analytics::window_revenue(inst, w, price)).unwrap_or(f64::NAN);
                    vec![rw, base[1], base[0]]
                })
                .collect();
            (header(&["rev_window", "rev_newest", "rev_random"]), rows)
        }
        "epsilon" => {
            let rows = values
                .par_iter()
                .map(|&e| class_row(ValuationDistribution::uniform(-e, e).and_then(|d| inst.with_dist(d))))
                .collect();
            (header(&class_cols), rows)
        }
        "prior_strength" => {
            let rows = values
                .par_iter()
                .map(|&a| class_row(replace_prior(inst.estimator(), a).and_then(|e| respec(inst, |s| s.estimator = e))))
                .collect();
            (header(&class_cols), rows)
        }
        "xi" => {
            let price = r.static_price()?;
            let ns = r.spec.nonstationary.ok_or_else(|| invalid("xi sweep needs a `nonstationary` section"))?;
            let rows = values
                .par_iter()
                .map(|&xi| match analytics::ns_steady(ns.mu_lo, ns.mu_hi, xi, price, inst) {
                    Ok(NsSteady { rev_newest, rev_random, belief_error_newest, belief_error_random, .. }) => vec![
                        rev_newest,
                        rev_random,
                        belief_error_newest.unwrap_or(f64::NAN),
                        belief_error_random.unwrap_or(f64::NAN),
                    ],
                    Err(_) => nan_row(4),
                })
                .collect();
            (header(&["rev_newest", "rev_random", "belief_error_newest", "belief_error_random"]), rows)
        }
        "gamma" => {
            let policy = r.policy()?;
            let ords = [
                ("newest", SimOrdering::Newest),
                ("random_finite_pool", SimOrdering::RandomFinitePool),
                ("random_iid", SimOrdering::RandomIid),
            ];
            let mut cols: Vec<String> = vec![axis.into()];
            for (n, _) in &ords {
                cols.push(format!("rev_{n}"));
                cols.push(format!("stderr_{n}"));
            }
            let mut rows = vec![];
            // the simulator parallelizes internally
            for &g in values {
                let mut row = vec![];
                for (_, o) in ords {
                    let cfg = r.sim_config(inst.clone(), o, policy.clone()).with_variant(Variant::TimeVaryingPrior { gamma: g });
                    let res = simulator::run(&cfg)?;
                    row.push(res.avg_revenue_per_round);
                    row.push(res.stderr);
                }
                rows.push(row);
            }
            (cols, rows)
        }
        _ => unreachable!("axis validated"),
    };
    let rows = values.iter().zip(rows).map(|(&v, mut row)| {
        row.insert(0, v);
        row
    });
    Ok(Table { header: cols, rows: rows.collect() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub discrepancy: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

fn check(name: &str, discrepancy: f64, tolerance: f64) -> Check {
    Check { name: name.into(), discrepancy, tolerance, pass: discrepancy <= tolerance }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Closed forms vs dense chain solves vs simulation. Simulator checks are
/// z-scores against a 5σ gate.
pub fn verify(inst: &Instance, price: f64, ns: Option<NsSection>, sim: &SimulationSection) -> CliResult<VerifyReport> {
    let c = inst.c();
    let mut checks = vec![];
    let policy = PricingPolicy::static_price(price);
    let q = inst.purchase_probs(price);
    if c <= MAX_DENSE_BITS {
        let counts = analytics::stationary_newest_counts(inst, price)?;
        let pi = stationary_solve(&build_newest_chain(inst, &policy)?)?;
        let mut agg = vec![0.0; c + 1];
        for (m, p) in pi.probs.iter().enumerate() {
            agg[(m as u64).count_ones() as usize] += p;
        }
        checks.push(check("newest counts: closed form vs chain", max_abs_diff(&counts, &agg), 1e-9));
        let chain_rev: f64 = agg.iter().zip(&q).map(|(p, q)| price * p * q).sum();
        checks.push(check("newest revenue: closed form vs chain", (chain_rev - analytics::rev_newest_static(inst, price)?).abs(), 1e-9));
        let mut worst: f64 = 0.0;
        for w in c..=8.max(c).min(MAX_DENSE_BITS) {
            let rates = analytics::window_purchase_rates(inst, w, price)?;
            let pi = stationary_solve(&build_window_chain(inst, w, price)?)?;
            let chain: f64 = (0..1usize << w).map(|m| price * pi.probs[m] * rates[m.count_ones() as usize]).sum();
            worst = worst.max((chain - analytics::window_revenue(inst, w, price)?).abs());
        }
        checks.push(check("window revenue: closed form vs chain (w <= 8)", worst, 1e-9));
    }
    let ns = match ns {
        Some(n) => Some(n),
        None if c == 1 && inst.h(0) < inst.h(1) && inst.h(0) > 0.0 && inst.h(1) < 1.0 => {
            Some(NsSection { mu_lo: inst.h(0), mu_hi: inst.h(1), xi: 0.5 })
        }
        None => None,
    };
    if let (Some(ns), 1) = (ns, c) {
        let mut worst: f64 = 0.0;
        for k in 1..=10 {
            let xi = k as f64 / 10.0;
            let s = analytics::ns_steady(ns.mu_lo, ns.mu_hi, xi, price, inst)?;
            let pi = stationary_solve(&build_nonstationary_chain(ns.mu_lo, ns.mu_hi, xi, price, inst)?)?;
            worst = worst.max(max_abs_diff(&s.pi, &pi.probs));
        }
        checks.push(check("two-state stationary law: closed form vs chain (xi grid)", worst, 1e-9));
    }
    let sim_cfg = |o| SimConfig::new(inst.clone(), o, policy.clone(), sim.rounds, sim.replications, sim.seed);
    let zscore = |r: &SimResult, target: f64| if r.stderr > 0.0 { (r.avg_revenue_per_round - target).abs() / r.stderr } else { f64::INFINITY };
    let rn = simulator::run(&sim_cfg(SimOrdering::Newest))?;
    checks.push(check("simulated newest revenue (z-score)", zscore(&rn, analytics::rev_newest_static(inst, price)?), 5.0));
    let rr = simulator::run(&sim_cfg(SimOrdering::RandomIid))?;
    checks.push(check("simulated random revenue (z-score)", zscore(&rr, analytics::rev_random_static(inst, price)), 5.0));
    let w = c + 1;
    let rw = simulator::run(&sim_cfg(SimOrdering::Window { w }))?;
    checks.push(check(&format!("simulated window({w}) revenue (z-score)"), zscore(&rw, analytics::window_revenue(inst, w, price)?), 5.0));
    let all_pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport { checks, all_pass })
}

/// Runs one command, writing the human-readable summary to `term`.
pub fn execute(cli: &Cli, term: &mut dyn Write) -> CliResult<()> {
    let r = resolve(&cli.opts)?;
    let mut text = String::new();
    match cli.command {
        Command::Analyze => {
            let price = r.static_price()?;
            let rep = analyze(r.inst(), price, r.ordering()?)?;
            let c = &rep.conf;
            writeln!(text, "rev_random={}\nrev_newest={}\nchi={}", sig(c.rev_random, 6), sig(c.rev_newest, 6), sig(c.chi, 6)).unwrap();
            writeln!(text, "beta={}", sig(c.beta, 6)).unwrap();
            for (n, p) in rep.stationary_counts.iter().enumerate() {
                writeln!(text, "pi_newest[n={n}]={}", sig(*p, 6)).unwrap();
            }
            if let Some(w) = rep.window {
                writeln!(text, "rev_window[w={}]={}", w.w, sig(w.revenue, 6)).unwrap();
            }
            write_out(&r.opts.out, &to_json(&rep))?;
        }
        Command::Optimize => {
            let rep = optimize(r.inst())?;
            for (name, o) in [
                ("static_random", &rep.static_random),
                ("static_newest", &rep.static_newest),
                ("dynamic_random", &rep.dynamic_random),
                ("dynamic_newest", &rep.dynamic_newest),
            ] {
                writeln!(text, "{name}: revenue={}", sig(o.revenue, 6)).unwrap();
            }
            writeln!(text, "chi_static={}\nchi_dynamic={}", sig(rep.conf_static.chi, 6), sig(rep.conf_dynamic.chi, 6)).unwrap();
            write_out(&r.opts.out, &to_json(&rep))?;
        }
        Command::Simulate => {
            let ordering = r.ordering()?.ok_or_else(|| invalid("simulate needs an ordering"))?;
            let cfg = r.sim_config(r.inst().clone(), ordering, r.policy()?);
            let res = simulator::run(&cfg)?;
            writeln!(text, "avg_revenue_per_round={}\nstderr={}", sig(res.avg_revenue_per_round, 6), sig(res.stderr, 3)).unwrap();
            writeln!(text, "purchase_rate={}", sig(res.purchase_rate, 6)).unwrap();
            if let Some(b) = res.belief_error {
                writeln!(text, "belief_error={}", sig(b, 6)).unwrap();
            }
            write_out(&r.opts.out, &to_json(&res))?;
            if let (Some(p), Some(csv)) = (&r.opts.trajectory, res.trajectory_csv()) {
                std::fs::write(p, csv).map_err(|e| invalid(format!("cannot write {}: {e}", p.display())))?;
            }
        }
        Command::Sweep => {
            let (axis, values) = r.sweep()?;
            let table = with_thread_cap(|| sweep(&r, &axis, &values))?;
            let csv = table.to_csv();
            match &r.opts.out {
                Some(_) => write_out(&r.opts.out, &csv)?,
                None => text.push_str(&csv),
            }
        }
        Command::Verify => {
            let price = r.static_price()?;
            let rep = verify(r.inst(), price, r.spec.nonstationary, &r.simulation())?;
            for c in &rep.checks {
                writeln!(text, "{} {}: {} (tol {})", if c.pass { "PASS" } else { "FAIL" }, c.name, sig(c.discrepancy, 3), c.tolerance).unwrap();
            }
            write_out(&r.opts.out, &to_json(&rep))?;
            term.write_all(text.as_bytes()).map_err(|e| invalid(e.to_string()))?;
            if !rep.all_pass {
                let failed: Vec<_> = rep.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
                return Err(CliError::Oracle(failed.join("; ")));
            }
            return Ok(());
        }
    }
    term.write_all(text.as_bytes()).map_err(|e| invalid(e.to_string()))
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    match execute(&cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_cli(args: &[&str]) -> (CliResult<()>, String) {
        let cli = Cli::try_parse_from(std::iter::once("conf-lab").chain(args.iter().copied())).unwrap();
        let mut buf = vec![];
        let r = execute(&cli, &mut buf);
        (r, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn values_grammar() {
        assert_eq!(parse_values("1..4").unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(parse_values("0.5,1,2").unwrap(), vec![0.5, 1.0, 2.0]);
        let v = parse_values("0..1:0.25").unwrap();
        assert_eq!(v, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_values("0..0.3:0.1").unwrap().len(), 4);
        assert!(parse_values("3..1").is_err());
        assert!(parse_values("a,b").is_err());
    }

    #[test]
    fn significant_digits() {
        assert_eq!(csv_cell(0.5), "0.5");
        assert_eq!(csv_cell(4.0 / 9.0), "0.444444444444");
        assert_eq!(csv_cell(1.0 / 3.0 * 100.0), "33.3333333333");
        assert_eq!(csv_cell(f64::NAN), "");
        assert_eq!(csv_cell(12.0), "12");
        assert_eq!(csv_cell(1.5e-9), "1.50000000000e-9");
        assert_eq!(sig(0.470588235294, 6), "0.470588");
    }

    #[test]
    fn analyze_e1_inline() {
        let (r, out) = run_cli(&["analyze", "--price", "1"]);
        r.unwrap();
        assert!(out.contains("rev_random=0.5\n"), "{out}");
        assert!(out.contains("rev_newest=0.444444\n"));
        assert!(out.contains("chi=1.125\n"));
    }

    #[test]
    fn missing_price_is_a_validation_error() {
        let (r, _) = run_cli(&["analyze"]);
        assert_eq!(r.unwrap_err().exit_code(), 1);
    }

    #[test]
    fn config_errors_name_the_field() {
        let bad = r#"{"instance": {"mu": 0.5, "c": 1, "dist": {"kind": "uniform", "lo": 0, "hi": "x"}, "estimator": {"kind": "beta_mean", "a": 1, "b": 1}}}"#;
        let CliError::Invalid(m) = parse_spec(bad).unwrap_err() else { panic!() };
        assert!(m.contains("instance"), "{m}");
        let unknown = r#"{"instance": {"mu": 0.5, "c": 1, "dist": {"kind": "uniform", "lo": 0, "hi": 1}, "estimator": {"kind": "beta_mean", "a": 1, "b": 1}}, "prices": 1}"#;
        let CliError::Invalid(m) = parse_spec(unknown).unwrap_err() else { panic!() };
        assert!(m.contains("prices"), "{m}");
        let range = r#"{"instance": {"mu": 1.5, "c": 1, "dist": {"kind": "uniform", "lo": 0, "hi": 1}, "estimator": {"kind": "beta_mean", "a": 1, "b": 1}}}"#;
        let CliError::Invalid(m) = parse_spec(range).unwrap_err() else { panic!() };
        assert!(m.contains("mu"), "{m}");
    }

    #[test]
    fn ordering_spellings() {
        assert_eq!(parse_ordering("window:3").unwrap(), SimOrdering::Window { w: 3 });
        assert_eq!(parse_ordering("random").unwrap(), SimOrdering::RandomIid);
        assert!(parse_ordering("oldest").is_err());
        let t: OrderingSpec = serde_json::from_str(r#"{"kind": "window", "w": 4}"#).unwrap();
        assert_eq!(t.resolve().unwrap(), SimOrdering::Window { w: 4 });
        let n: OrderingSpec = serde_json::from_str(r#""newest""#).unwrap();
        assert_eq!(n.resolve().unwrap(), SimOrdering::Newest);
    }

    #[test]
    fn unknown_axis_rejected() {
        let (r, _) = run_cli(&["sweep", "--axis", "temperature", "--values", "1,2", "--price", "1"]);
        assert_eq!(r.unwrap_err().exit_code(), 1);
    }

    #[test]
    fn price_sweep_marks_absorbing_prices_empty() {
        let (r, out) = run_cli(&["sweep", "--axis", "price", "--values", "0.5,5"]);
        r.unwrap();
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "price,rev_random,rev_newest,chi,beta");
        assert_eq!(lines[2], "5,0,0,,");
    }

    #[test]
    fn verify_passes_on_e1() {
        let (r, out) = run_cli(&["verify", "--price", "1", "--rounds", "20000", "--reps", "8"]);
        r.unwrap();
        assert!(out.lines().all(|l| l.starts_with("PASS")), "{out}");
    }
}
