//! Prokhorov distance by bisection over coupling feasibility.

use crate::error::{invalid, Result};
use crate::measures::{dist, PointCloud};
use crate::metrics::{canonical_pair, DiscretePair};
use crate::rng::{derive_seed, rng_from_seed};
use rand::Rng;

/// Residual capacities at or below this count as saturated; flow values
/// are then accurate to a few multiples of it, far below any bisection
/// tolerance.
const CAP_EPS: f64 = 1e-12;

/// Slack on mass comparisons so boundary cases do not flip on rounding.
const MASS_SLACK: f64 = 1e-9;

/// One feasibility probe of the coupling characterization: the mass that
/// can be shipped across atom pairs at distance <= eps, and whether it
/// reaches 1 - eps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingFeasibility {
    pub eps: f64,
    pub flow: f64,
    pub feasible: bool,
}

/// Max-flow probe on the bipartite network: the source feeds each left
/// atom its weight, each right atom drains its weight, and left-right
/// arcs are unbounded exactly where the atom distance is at most eps.
/// dist_matrix is row-major |wx| x |wy|.
pub fn coupling_feasibility(
    dist_matrix: &[f64],
    wx: &[f64],
    wy: &[f64],
    eps: f64,
) -> Result<CouplingFeasibility> {
    let (kx, ky) = (wx.len(), wy.len());
    if kx == 0 || ky == 0 {
        return Err(invalid("weight vectors must be nonempty"));
    }
    if dist_matrix.len() != kx * ky {
        return Err(invalid("distance matrix shape must be |wx| x |wy|"));
    }
    if !dist_matrix.iter().all(|d| d.is_finite() && *d >= 0.0) {
        return Err(invalid("distances must be finite and nonnegative"));
    }
    for w in [wx, wy] {
        if !w.iter().all(|v| v.is_finite() && *v >= 0.0) {
            return Err(invalid("weights must be finite and nonnegative"));
        }
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid("weights must sum to 1"));
        }
    }
    if !eps.is_finite() || eps < 0.0 {
        return Err(invalid("eps must be finite and nonnegative"));
    }
    let source = 0;
    let sink = 1 + kx + ky;
    let mut net = Dinic::new(kx + ky + 2);
    for (i, w) in wx.iter().enumerate() {
        net.add_edge(source, 1 + i, *w);
    }
    for (j, w) in wy.iter().enumerate() {
        net.add_edge(1 + kx + j, sink, *w);
    }
    for i in 0..kx {
        for j in 0..ky {
            if dist_matrix[i * ky + j] <= eps {
                net.add_edge(1 + i, 1 + kx + j, f64::INFINITY);
            }
        }
    }
    let flow = net.max_flow(source, sink);
    Ok(CouplingFeasibility { eps, flow, feasible: flow >= 1.0 - eps - MASS_SLACK })
}

/// Prokhorov distance between the two weightings of a shared support, by
/// bisection over coupling feasibility. Returns the upper end of the
/// final bracket, so the value overshoots by at most tol.
pub fn prokhorov_discrete(pair: &DiscretePair, tol: f64) -> Result<f64> {
    validate_tol(tol)?;
    let support = pair.support();
    let k = support.len();
    let mut dm = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            dm[i * k + j] = dist(support.point(i), support.point(j));
        }
    }
    bisect(tol, |eps| {
        Ok(coupling_feasibility(&dm, pair.weights_mu(), pair.weights_nu(), eps)?.feasible)
    })
}

/// Prokhorov distance between uniform empirical measures, bisecting over
/// the matched-mass probe: feasible at eps when atoms within distance eps
/// can pair off disjointly until at most an eps fraction is left over.
/// Unequal counts are first equalized by drawing min(m_x, m_y) points
/// from the larger cloud without replacement, seeded by the two counts so
/// repeat calls agree. Arguments are evaluated in a canonical order, so
/// the result is bitwise symmetric.
pub fn prokhorov_empirical(x: &PointCloud, y: &PointCloud, tol: f64) -> Result<f64> {
    validate_tol(tol)?;
    if x.dim() != y.dim() {
        return Err(invalid("point clouds must share a dimension"));
    }
    let (x, y) = canonical_pair(x, y);
    let (x, y) = equalize_counts(x, y);
    let m = x.len();
    if x.dim() == 1 {
        let mut xs = x.coords().to_vec();
        let mut ys = y.coords().to_vec();
        xs.sort_unstable_by(f64::total_cmp);
        ys.sort_unstable_by(f64::total_cmp);
        bisect(tol, |eps| Ok(line_matched(&xs, &ys, eps) >= needed(m, eps)))
    } else {
        let mut dm = vec![0.0; m * m];
        for i in 0..m {
            let xi = x.point(i);
            for j in 0..m {
                dm[i * m + j] = dist(xi, y.point(j));
            }
        }
        bisect(tol, |eps| {
            let enough = needed(m, eps);
            Ok(kuhn_matched(&dm, m, eps, enough) >= enough)
        })
    }
}

fn validate_tol(tol: f64) -> Result<()> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(invalid("bisection tolerance must be positive and finite"));
    }
    Ok(())
}

/// Bisection on [0, 1]; eps = 1 is always feasible because the mass
/// requirement drops to zero there.
fn bisect(tol: f64, mut feasible: impl FnMut(f64) -> Result<bool>) -> Result<f64> {
    if feasible(0.0)? {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Matched atoms required at level eps: count/m >= 1 - eps, with slack so
/// the integer threshold does not flip on rounding of (1 - eps) * m.
fn needed(m: usize, eps: f64) -> usize {
    (((1.0 - eps) * m as f64) - MASS_SLACK).ceil().max(0.0) as usize
}

/// Maximum number of disjoint pairs (x_i, y_j) with |x_i - y_j| <= eps
/// between sorted lists: match and advance both when close enough, else
/// advance past the smaller endpoint. Agrees with the general matcher on
/// the line (oracle-tested).
fn line_matched(xs: &[f64], ys: &[f64], eps: f64) -> usize {
    let (mut i, mut j, mut matched) = (0, 0, 0);
    while i < xs.len() && j < ys.len() {
        if (xs[i] - ys[j]).abs() <= eps {
            matched += 1;
            i += 1;
            j += 1;
        } else if xs[i] < ys[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    matched
}

/// Maximum bipartite matching size over pairs at distance <= eps, by
/// augmenting paths; stops as soon as `enough` pairs are matched.
fn kuhn_matched(dm: &[f64], m: usize, eps: f64, enough: usize) -> usize {
    let mut match_of = vec![usize::MAX; m];
    let mut seen = vec![false; m];
    let mut matched = 0;
    for i in 0..m {
        if matched >= enough {
            break;
        }
        seen.fill(false);
        if augment(dm, m, eps, i, &mut seen, &mut match_of) {
            matched += 1;
        }
    }
    matched
}

fn augment(dm: &[f64], m: usize, eps: f64, i: usize, seen: &mut [bool], match_of: &mut [usize]) -> bool {
    for j in 0..m {
        if dm[i * m + j] <= eps && !seen[j] {
            seen[j] = true;
            if match_of[j] == usize::MAX || augment(dm, m, eps, match_of[j], seen, match_of) {
                match_of[j] = i;
                return true;
            }
        }
    }
    false
}

/// Subsamples the larger cloud so both carry min(m_x, m_y) points. The
/// seed depends only on the two counts, so equalization is reproducible
/// and, together with canonical argument order, symmetric.
fn equalize_counts(x: &PointCloud, y: &PointCloud) -> (PointCloud, PointCloud) {
    let k = x.len().min(y.len());
    if x.len() == y.len() {
        return (x.clone(), y.clone());
    }
    let seed = derive_seed(
        ((x.len() as u64) << 32) ^ y.len() as u64,
        "equalize-counts",
        0,
    );
    (subsample(x, k, seed), subsample(y, k, seed))
}

/// k distinct rows drawn by a partial shuffle, emitted in original order.
fn subsample(cloud: &PointCloud, k: usize, seed: u64) -> PointCloud {
    let m = cloud.len();
    if m == k {
        return cloud.clone();
    }
    let mut idx: Vec<usize> = (0..m).collect();
    let mut rng = rng_from_seed(seed);
    for i in 0..k {
        let j = rng.random_range(i..m);
        idx.swap(i, j);
    }
    let mut chosen = idx[..k].to_vec();
    chosen.sort_unstable();
    let mut data = Vec::with_capacity(k * cloud.dim());
    for &i in &chosen {
        data.extend_from_slice(cloud.point(i));
    }
    PointCloud::from_validated(cloud.dim(), data, None)
}

/// f64 max-flow, usable here because every capacity is a probability
/// weight or infinite and the graph has three layers.
struct Dinic {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<f64>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl Dinic {
    fn new(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
            level: vec![-1; n],
            iter: vec![0; n],
        }
    }

    fn add_edge(&mut self, a: usize, b: usize, c: f64) {
        self.adj[a].push(self.to.len());
        self.to.push(b);
        self.cap.push(c);
        self.adj[b].push(self.to.len());
        self.to.push(a);
        self.cap.push(0.0);
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.fill(-1);
        self.level[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.adj[v] {
                let w = self.to[e];
                if self.cap[e] > CAP_EPS && self.level[w] < 0 {
                    self.level[w] = self.level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, v: usize, t: usize, limit: f64) -> f64 {
        if v == t {
            return limit;
        }
        while self.iter[v] < self.adj[v].len() {
            let e = self.adj[v][self.iter[v]];
            let w = self.to[e];
            if self.cap[e] > CAP_EPS && self.level[w] == self.level[v] + 1 {
                let pushed = self.dfs(w, t, limit.min(self.cap[e]));
                if pushed > 0.0 {
                    self.cap[e] -= pushed;
                    self.cap[e ^ 1] += pushed;
                    return pushed;
                }
            }
            self.iter[v] += 1;
        }
        0.0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut flow = 0.0;
        while self.bfs(s, t) {
            self.iter.fill(0);
            loop {
                let pushed = self.dfs(s, t, f64::INFINITY);
                if pushed <= 0.0 {
                    break;
                }
                flow += pushed;
            }
        }
        flow
    }
}
