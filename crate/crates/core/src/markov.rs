//! Explicit finite Markov chains over review states and an exact dense
//! stationary solver. These are the oracle for the closed forms in
//! [`crate::analytics`].

use std::collections::VecDeque;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{Instance, PricingPolicy, ReviewState, ABSORBING_EPS};

/// Largest state space handed to the dense solver is `2^MAX_DENSE_BITS`.
pub const MAX_DENSE_BITS: usize = 12;

const ROW_TOL: f64 = 1e-12;

/// Row-stochastic transition matrix with labelled states.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteChain {
    labels: Vec<String>,
    p: DMatrix<f64>,
}

/// Stationary law aligned with the chain's states.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDist {
    pub labels: Vec<String>,
    pub probs: Vec<f64>,
}

impl StationaryDist {
    /// Probability of the state with `label`.
    pub fn get(&self, label: &str) -> Option<f64> {
        self.labels.iter().position(|l| l == label).map(|i| self.probs[i])
    }
}

impl FiniteChain {
    pub fn new(labels: Vec<String>, p: DMatrix<f64>) -> Result<Self> {
        let n = labels.len();
        if n == 0 || p.nrows() != n || p.ncols() != n {
            return Err(Error::InvalidChain(format!(
                "{} labels for a {}x{} matrix",
                n,
                p.nrows(),
                p.ncols()
            )));
        }
        for i in 0..n {
            let row = p.row(i);
            if row.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                return Err(Error::InvalidChain(format!("row {} has entries outside [0, 1]", labels[i])));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_TOL {
                return Err(Error::InvalidChain(format!("row {} sums to {s}", labels[i])));
            }
        }
        Ok(Self { labels, p })
    }

    /// Chain from row-major nested vectors.
    pub fn from_rows(labels: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidChain("transition matrix is not square".into()));
        }
        let p = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::new(labels, p)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn transition(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn prob(&self, from: usize, to: usize) -> f64 {
        self.p[(from, to)]
    }

    /// Row-major CSV dump with the state labels as header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("from");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (i, l) in self.labels.iter().enumerate() {
            out.push_str(l);
            for j in 0..self.len() {
                let _ = write!(out, ",{}", self.p[(i, j)]);
            }
            out.push('\n');
        }
        out
    }

    fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&j| self.p[(i, j)] > 0.0)
    }

    fn predecessors(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| self.p[(i, j)] > 0.0)
    }

    fn bfs(&self, forward: bool) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.len()];
        dist[0] = Some(0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            let next: Vec<usize> =
                if forward { self.successors(u).collect() } else { self.predecessors(u).collect() };
            for v in next {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_irreducible(&self) -> bool {
        self.bfs(true).iter().all(Option::is_some) && self.bfs(false).iter().all(Option::is_some)
    }

    /// Period of an irreducible chain: gcd over edges `u -> v` of
    /// `d(u) + 1 - d(v)` with `d` the BFS depth from state 0.
    pub fn period(&self) -> usize {
        let d = self.bfs(true);
        let mut g = 0usize;
        for u in 0..self.len() {
            let Some(du) = d[u] else { continue };
            for v in self.successors(u) {
                let Some(dv) = d[v] else { continue };
                g = gcd(g, (du as i64 + 1 - dv as i64).unsigned_abs() as usize);
            }
        }
        g
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Dense solve of `πᵀP = πᵀ`, `Σπ = 1` for an irreducible chain.
fn solve_irreducible(chain: &FiniteChain) -> Result<StationaryDist> {
    let n = chain.len();
    let mut a = chain.p.transpose() - DMatrix::<f64>::identity(n, n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::NotErgodic("singular stationary system".into()))?;
    let mut probs: Vec<f64> = x.iter().map(|&v| v.max(0.0)).collect();
    let s: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|v| *v /= s);
    Ok(StationaryDist { labels: chain.labels.clone(), probs })
}

/// Unique stationary distribution of an irreducible aperiodic chain.
pub fn stationary_solve(chain: &FiniteChain) -> Result<StationaryDist> {
    if !chain.is_irreducible() {
        return Err(Error::NotErgodic("chain is reducible".into()));
    }
    let per = chain.period();
    if per != 1 {
        return Err(Error::NotErgodic(format!("chain has period {per}")));
    }
    solve_irreducible(chain)
}

/// Max-norm of `πᵀP − πᵀ`.
pub fn stationarity_residual(chain: &FiniteChain, pi: &StationaryDist) -> f64 {
    let v = DVector::from_column_slice(&pi.probs);
    let r = chain.p.transpose() * &v - &v;
    r.amax()
}

/// Output of [`lazify`]: the modified chain and, when the base chain is
/// irreducible, its stationary law in closed form `κπ(s)/f(s)`.
#[derive(Debug, Clone)]
pub struct Lazified {
    pub chain: FiniteChain,
    pub closed_form: Option<StationaryDist>,
}

/// Chain that steps according to `chain` with probability `f[s]` and
/// otherwise remains in `s`.
pub fn lazify(chain: &FiniteChain, f: &[f64]) -> Result<Lazified> {
    let stay = f;
    if stay.len() != chain.len() {
        return Err(Error::InvalidParams(format!("{} move probabilities for {} states", stay.len(), chain.len())));
    }
    if let Some((state, &value)) = stay.iter().enumerate().find(|(_, &f)| !(f > 0.0 && f <= 1.0)) {
        return Err(Error::InvalidStay { state, value });
    }
    let n = chain.len();
    let mut p = chain.p.clone();
    for i in 0..n {
        for j in 0..n {
            p[(i, j)] *= stay[i];
        }
        p[(i, i)] += 1.0 - stay[i];
    }
    let lazy = FiniteChain { labels: chain.labels.clone(), p };
    let closed_form = if chain.is_irreducible() {
        let base = solve_irreducible(chain)?;
        Some(lazy_stationary(&base, stay))
    } else {
        None
    };
    Ok(Lazified { chain: lazy, closed_form })
}

/// `π_f(s) = κ π(s) / f(s)`.
pub fn lazy_stationary(base: &StationaryDist, f: &[f64]) -> StationaryDist {
    let raw: Vec<f64> = base.probs.iter().zip(f).map(|(p, f)| p / f).collect();
    let s: f64 = raw.iter().sum();
    StationaryDist { labels: base.labels.clone(), probs: raw.into_iter().map(|v| v / s).collect() }
}

fn check_bits(bits: usize) -> Result<()> {
    if bits > MAX_DENSE_BITS {
        return Err(Error::WindowTooLarge { w: bits, max: MAX_DENSE_BITS });
    }
    Ok(())
}

/// Shift-register chain over `{0,1}^len` with per-state purchase
/// probability `q[mask]`.
fn shift_chain(len: usize, mu: f64, q: &[f64]) -> Result<FiniteChain> {
    let absorbing: Vec<String> = ReviewState::all(len)
        .filter(|z| q[z.mask() as usize] <= ABSORBING_EPS)
        .map(|z| z.label())
        .collect();
    if !absorbing.is_empty() {
        return Err(Error::AbsorbingState { states: absorbing });
    }
    let n = 1usize << len;
    let mut p = DMatrix::<f64>::zeros(n, n);
    for z in ReviewState::all(len) {
        let i = z.mask() as usize;
        let qz = q[i];
        p[(i, i)] += 1.0 - qz;
        p[(i, z.push_newest(true).mask() as usize)] += mu * qz;
        p[(i, z.push_newest(false).mask() as usize)] += (1.0 - mu) * qz;
    }
    let labels = ReviewState::all(len).map(|z| z.label()).collect();
    FiniteChain::new(labels, p)
}

/// Newest-first dynamics over the `c` displayed reviews under `policy`.
pub fn build_newest_chain(inst: &Instance, policy: &PricingPolicy) -> Result<FiniteChain> {
    let c = inst.c();
    check_bits(c)?;
    policy.validate_for(c)?;
    let q: Vec<f64> = ReviewState::all(c).map(|z| inst.q(z.n_pos(), policy.price(z))).collect();
    shift_chain(c, inst.mu(), &q)
}

/// Window-random dynamics: the state is the `w` newest reviews and `c` of
/// them are shown uniformly at random.
pub fn build_window_chain(inst: &Instance, w: usize, price: f64) -> Result<FiniteChain> {
    let c = inst.c();
    if w < c {
        return Err(Error::InvalidParams(format!("window {w} is smaller than c = {c}")));
    }
    check_bits(w)?;
    let subsets: Vec<u64> = (0..1u64 << w).filter(|m| m.count_ones() as usize == c).collect();
    let qn = inst.purchase_probs(price);
    let q: Vec<f64> = (0..1u64 << w)
        .map(|z| subsets.iter().map(|s| qn[(z & s).count_ones() as usize]).sum::<f64>() / subsets.len() as f64)
        .collect();
    shift_chain(w, inst.mu(), &q)
}

/// Labels of the two-state-quality chain, in matrix order.
pub const NS_LABELS: [&str; 4] = ["0,L", "1,L", "0,H", "1,H"];

/// Newest-first with a single displayed review and quality switching
/// between `mu_l` and `mu_h`. Each round the review updates first (rating
/// drawn from the current quality, purchase probability `q_r`), then the
/// quality moves to the other level with probability `xi / 2`.
pub fn build_nonstationary_chain(
    mu_l: f64,
    mu_h: f64,
    xi: f64,
    price: f64,
    base: &Instance,
) -> Result<FiniteChain> {
    check_ns_params(mu_l, mu_h, xi, base)?;
    let q = [base.q(0, price), base.q(1, price)];
    if q[0] <= ABSORBING_EPS {
        return Err(Error::InvalidParams(format!("price {price} is absorbing with a negative review")));
    }
    let mus = [mu_l, mu_h];
    let mut rows = vec![vec![0.0; 4]; 4];
    for (qi, &mu) in mus.iter().enumerate() {
        for r in 0..2 {
            // review step
            let mut next_r = [0.0; 2];
            next_r[r] += 1.0 - q[r];
            next_r[1] += q[r] * mu;
            next_r[0] += q[r] * (1.0 - mu);
            let from = 2 * qi + r;
            for (qj, flip) in [(qi, 1.0 - xi / 2.0), (1 - qi, xi / 2.0)] {
                for (r2, pr) in next_r.iter().enumerate() {
                    rows[from][2 * qj + r2] += pr * flip;
                }
            }
        }
    }
    FiniteChain::from_rows(NS_LABELS.iter().map(|s| s.to_string()).collect(), &rows)
}

pub(crate) fn check_ns_params(mu_l: f64, mu_h: f64, xi: f64, base: &Instance) -> Result<()> {
    if !(0.0 < mu_l && mu_l < mu_h && mu_h < 1.0) {
        return Err(Error::InvalidParams(format!("need 0 < mu_L < mu_H < 1, got ({mu_l}, {mu_h})")));
    }
    if !(xi > 0.0 && xi <= 1.0) {
        return Err(Error::InvalidParams(format!("xi must lie in (0, 1], got {xi}")));
    }
    if base.c() != 1 {
        return Err(Error::InvalidParams(format!("two-state quality model needs c = 1, got {}", base.c())));
    }
    Ok(())
}
